//! Sinus-flow explicit spectral formulas: eigenvalues on the boundary
//! curves (c = U_beta, c = 0, c = 1, c = +-inf), the first two
//! eigenfunctions at c = 0, the singular-neutral-mode curve, endpoint
//! values of the negative part of lambda_1, and the one-sided derivative
//! of lambda_1 at c = 0.

use crate::error::{Error, Result};
use crate::specfun::Extended;
use std::f64::consts::PI;

fn pi2() -> f64 {
    PI * PI
}

/// The exponents gamma (valid beta < 9 pi^2/16) and gamma~ (valid
/// beta > -9 pi^2/16) controlling the c = 0 and c = 1 eigenfunctions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaExponents {
    pub gamma: f64,
    pub gamma_tilde: f64,
}

/// gamma = 1/4 + sqrt(9/16 - beta/pi^2).
pub fn gamma_exponent(beta: f64) -> Result<f64> {
    let d = 9.0 / 16.0 - beta / pi2();
    if d < 0.0 {
        return Err(Error::BetaOutOfRange {
            beta,
            min: f64::NEG_INFINITY,
            max: 9.0 * pi2() / 16.0,
        });
    }
    Ok(0.25 + d.sqrt())
}

/// gamma~ = 1/4 + sqrt(9/16 + beta/pi^2).
pub fn gamma_tilde_exponent(beta: f64) -> Result<f64> {
    let d = 9.0 / 16.0 + beta / pi2();
    if d < 0.0 {
        return Err(Error::BetaOutOfRange {
            beta,
            min: -9.0 * pi2() / 16.0,
            max: f64::INFINITY,
        });
    }
    Ok(0.25 + d.sqrt())
}

pub fn gamma_exponents(beta: f64) -> Result<GammaExponents> {
    Ok(GammaExponents {
        gamma: gamma_exponent(beta)?,
        gamma_tilde: gamma_tilde_exponent(beta)?,
    })
}

/// lambda_n at the regular speed c = U_beta: (n^2/4 - 1) pi^2.
pub fn lambda_regular(n: usize) -> f64 {
    assert!(n >= 1);
    let nf = n as f64;
    (nf * nf / 4.0 - 1.0) * pi2()
}

/// lambda_n at c = +-infinity: n^2 pi^2 / 4.
pub fn lambda_infinity(n: usize) -> f64 {
    assert!(n >= 1);
    let nf = n as f64;
    nf * nf * pi2() / 4.0
}

/// lambda_n at c = 0: ((gamma + (n-1)/2)^2 - 1) pi^2, beta < 9 pi^2/16.
pub fn lambda_c0(beta: f64, n: usize) -> Result<f64> {
    assert!(n >= 1);
    let g = gamma_exponent(beta)?;
    let r = g + (n as f64 - 1.0) / 2.0;
    Ok((r * r - 1.0) * pi2())
}

/// lambda_n at c = 1: ((gamma~ - 1/2 + ceil(n/2))^2 - 1) pi^2,
/// beta > -9 pi^2/16; consecutive pairs coincide.
pub fn lambda_c1(beta: f64, n: usize) -> Result<f64> {
    assert!(n >= 1);
    let g = gamma_tilde_exponent(beta)?;
    let r = g - 0.5 + n.div_ceil(2) as f64;
    Ok((r * r - 1.0) * pi2())
}

/// Principal eigenvalue at c = 0 with the coincidence point beta = pi^2/2
/// (where c = U_beta) served by the regular formula.
pub fn lambda1_c0_endpoint(beta: f64) -> Result<f64> {
    if beta == pi2() / 2.0 {
        return Ok(lambda_regular(1));
    }
    lambda_c0(beta, 1)
}

/// Principal eigenvalue at c = 1; at the coincidence point beta = -pi^2/2
/// the regular value -3 pi^2/4 takes precedence over the singular formula.
pub fn lambda1_c1_endpoint(beta: f64) -> Result<f64> {
    if beta == -pi2() / 2.0 {
        return Ok(lambda_regular(1));
    }
    lambda_c1(beta, 1)
}

/// The singular-neutral-mode curve: c = 0, alpha = pi sqrt(1 - gamma^2),
/// beta = pi^2 (-gamma^2 + gamma/2 + 1/2), for gamma in (1/2, 1).
pub fn snm_curve(gamma: f64) -> Result<(f64, f64, f64)> {
    if !(gamma > 0.5 && gamma < 1.0) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    let alpha = PI * (1.0 - gamma * gamma).sqrt();
    let beta = pi2() * (-gamma * gamma + gamma / 2.0 + 0.5);
    Ok((0.0, alpha, beta))
}

/// beta_+ = (sqrt(3) - 1) pi^2 / 4, where the SNM signature changes sign.
pub fn beta_plus() -> f64 {
    (3.0f64.sqrt() - 1.0) / 4.0 * pi2()
}

/// Values of the negative part of lambda_1 at the finite endpoints c = 0
/// and c = 1, for beta in (-pi^2/2, pi^2/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointValues {
    pub at0: f64,
    pub at1: f64,
}

pub fn lambda_minus_at_endpoints(beta: f64) -> EndpointValues {
    let at0 = if beta > 0.0 {
        let g = gamma_exponent(beta).expect("beta < 9pi^2/16 on this range");
        pi2() * (1.0 - g * g)
    } else {
        0.0
    };
    EndpointValues { at0, at1: 0.0 }
}

/// One-sided derivative of lambda_1 in c at c = 0^- for beta in
/// (0, pi^2/2): finite pi^2 g(g-1)(g^2-3/4)/((g-1/4)(g-3/4)) when
/// gamma > 3/4 (beta < 5 pi^2/16), +infinity otherwise.
pub fn dlambda1_dc_at_zero(beta: f64) -> Result<Extended> {
    if !(beta > 0.0 && beta < pi2() / 2.0) {
        return Err(Error::BetaOutOfRange {
            beta,
            min: 0.0,
            max: pi2() / 2.0,
        });
    }
    let g = gamma_exponent(beta)?;
    if g <= 0.75 {
        return Ok(Extended::PlusInfinity);
    }
    let v = pi2() * g * (g - 1.0) * (g * g - 0.75) / ((g - 0.25) * (g - 0.75));
    Ok(Extended::Finite(v))
}

/// Unnormalized eigenfunction at c = 0 for n = 1, 2:
/// cos^{2 gamma}(pi y/2) times (1 or sin(pi y/2)).
pub fn eigfun_c0(beta: f64, n: usize, y: f64) -> Result<f64> {
    let g = gamma_exponent(beta)?;
    let base = (PI * y / 2.0).cos().powf(2.0 * g);
    match n {
        1 => Ok(base),
        2 => Ok(base * (PI * y / 2.0).sin()),
        _ => Err(Error::UnsupportedIndex(n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn regular_and_infinity_values() {
        let p2 = pi2();
        assert_relative_eq!(lambda_regular(1), -0.75 * p2);
        assert_relative_eq!(lambda_regular(2), 0.0);
        assert_relative_eq!(lambda_regular(4), 3.0 * p2);
        assert_relative_eq!(lambda_infinity(1), p2 / 4.0);
        assert_relative_eq!(lambda_infinity(2), p2);
        assert_relative_eq!(lambda_infinity(3), 9.0 * p2 / 4.0);
    }

    #[test]
    fn lambda_c0_values() {
        let p2 = pi2();
        assert_relative_eq!(lambda_c0(p2 / 2.0, 1).unwrap(), -0.75 * p2, max_relative = 1e-14);
        assert_relative_eq!(lambda_c0(0.0, 1).unwrap(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(
            lambda_c0(5.0 * p2 / 16.0, 1).unwrap(),
            -7.0 * p2 / 16.0,
            max_relative = 1e-13
        );
        assert!(lambda_c0(0.6 * p2, 1).is_err());
    }

    #[test]
    fn lambda_c1_values_and_pairing() {
        let p2 = pi2();
        assert_relative_eq!(lambda_c1(0.0, 1).unwrap(), 1.25 * p2, max_relative = 1e-14);
        // lambda_{2k-1} = lambda_{2k} exactly
        for &beta in &[-0.3 * p2, 0.0, 0.45 * p2] {
            for k in 1..=3usize {
                assert_eq!(
                    lambda_c1(beta, 2 * k - 1).unwrap(),
                    lambda_c1(beta, 2 * k).unwrap()
                );
            }
        }
        assert!(lambda_c1(-0.6 * p2, 1).is_err());
    }

    #[test]
    fn coincidence_point_precedence() {
        let p2 = pi2();
        // at beta = -pi^2/2 the regular value wins over the formula branch
        assert_relative_eq!(lambda1_c1_endpoint(-p2 / 2.0).unwrap(), -0.75 * p2);
        assert_relative_eq!(lambda1_c0_endpoint(p2 / 2.0).unwrap(), -0.75 * p2);
        // off the coincidence point, the singular formula applies
        assert_relative_eq!(
            lambda1_c1_endpoint(0.0).unwrap(),
            lambda_c1(0.0, 1).unwrap()
        );
    }

    #[test]
    fn snm_curve_points() {
        let p2 = pi2();
        let (c, a, b) = snm_curve(3.0f64.sqrt() / 2.0).unwrap();
        assert_eq!(c, 0.0);
        assert_relative_eq!(a, PI / 2.0, max_relative = 1e-14);
        assert_relative_eq!(b, beta_plus(), max_relative = 1e-14);
        assert_relative_eq!(beta_plus(), (3.0f64.sqrt() - 1.0) / 4.0 * p2);
        // endpoints
        let (_, a, b) = snm_curve(0.5 + 1e-12).unwrap();
        assert_relative_eq!(a, 3.0f64.sqrt() * PI / 2.0, max_relative = 1e-9);
        assert_relative_eq!(b, p2 / 2.0, max_relative = 1e-9);
        let (_, a, b) = snm_curve(1.0 - 1e-12).unwrap();
        assert!(a < 1e-5 && b.abs() < 1e-10);
        assert!(snm_curve(0.3).is_err());
        assert!(snm_curve(1.0).is_err());
    }

    #[test]
    fn snm_gamma_round_trip() {
        // recomputing gamma from beta on the SNM curve recovers it
        for &g in &[0.51, 0.6, 0.75, 0.9, 0.99] {
            let (_, _, beta) = snm_curve(g).unwrap();
            let g2 = gamma_exponent(beta).unwrap();
            assert!((g - g2).abs() < 1e-12, "gamma {g} -> beta {beta} -> {g2}");
        }
    }

    #[test]
    fn snm_consistency_with_lambda_c0() {
        // lambda_1(beta(gamma), 0) = -pi^2 (1 - gamma^2) algebraically
        for &g in &[0.55, 0.7, 0.9] {
            let (_, _, beta) = snm_curve(g).unwrap();
            let lam = lambda_c0(beta, 1).unwrap();
            assert_relative_eq!(lam, -pi2() * (1.0 - g * g), max_relative = 1e-12);
        }
    }

    #[test]
    fn endpoint_values() {
        let p2 = pi2();
        let e = lambda_minus_at_endpoints(p2 / 2.0);
        assert_relative_eq!(e.at0, 0.75 * p2, max_relative = 1e-12);
        let e = lambda_minus_at_endpoints(-0.2 * p2);
        assert_eq!(e, EndpointValues { at0: 0.0, at1: 0.0 });
        // beta = 0.25 pi^2: gamma = 1/4 + sqrt(5/16)
        let e = lambda_minus_at_endpoints(0.25 * p2);
        let g = 0.25 + (5.0f64 / 16.0).sqrt();
        assert_relative_eq!(e.at0, p2 * (1.0 - g * g), max_relative = 1e-13);
        assert_relative_eq!(e.at0, 3.40985, max_relative = 1e-5);
    }

    #[test]
    fn derivative_at_zero_branches() {
        let p2 = pi2();
        // root of the numerator at beta_+
        match dlambda1_dc_at_zero(beta_plus()).unwrap() {
            Extended::Finite(v) => assert!(v.abs() < 1e-9, "expected 0, got {v}"),
            _ => panic!("expected finite"),
        }
        assert_eq!(dlambda1_dc_at_zero(0.4 * p2).unwrap(), Extended::PlusInfinity);
        match dlambda1_dc_at_zero(0.25 * p2).unwrap() {
            Extended::Finite(v) => {
                assert!(v > 0.0);
                assert_relative_eq!(v, 4.4137, max_relative = 1e-3);
            }
            _ => panic!("expected finite"),
        }
        assert!(dlambda1_dc_at_zero(-0.1).is_err());
    }

    #[test]
    fn derivative_sign_pattern() {
        // <= 0 on (0, beta_+], > 0 on (beta_+, 5pi^2/16), +inf beyond
        let p2 = pi2();
        let bp = beta_plus();
        for &beta in &[0.1 * p2, 0.19 * p2, 0.25 * p2, 0.35 * p2, 0.45 * p2] {
            let v = dlambda1_dc_at_zero(beta).unwrap();
            if beta <= bp {
                match v {
                    Extended::Finite(x) => assert!(x <= 1e-12, "beta {beta}: {x}"),
                    _ => panic!("unexpected +inf at beta {beta}"),
                }
            } else if beta < 5.0 * p2 / 16.0 {
                match v {
                    Extended::Finite(x) => assert!(x > 0.0, "beta {beta}: {x}"),
                    _ => panic!("unexpected +inf at beta {beta}"),
                }
            } else {
                assert_eq!(v, Extended::PlusInfinity, "beta {beta}");
            }
        }
    }

    #[test]
    fn eigfun_c0_basics() {
        let beta = 0.2 * pi2();
        assert_relative_eq!(eigfun_c0(beta, 1, 0.0).unwrap(), 1.0);
        assert!(eigfun_c0(beta, 1, 1.0).unwrap().abs() < 1e-15);
        assert!(eigfun_c0(beta, 1, -1.0).unwrap().abs() < 1e-15);
        let g = gamma_exponent(beta).unwrap();
        assert_relative_eq!(
            eigfun_c0(beta, 1, 0.5).unwrap(),
            (PI / 4.0).cos().powf(2.0 * g),
            max_relative = 1e-14
        );
        assert!(matches!(eigfun_c0(beta, 3, 0.0), Err(Error::UnsupportedIndex(3))));
    }

    #[test]
    fn eigfun_c0_satisfies_ode() {
        // plug phi = cos^{2g}(pi y/2) into -phi'' - q phi = lambda phi with
        // q = (beta - U'')/U, analytic derivatives
        let p2 = pi2();
        for &beta in &[0.2 * p2, 0.45 * p2, -0.3 * p2] {
            let g = gamma_exponent(beta).unwrap();
            let lam = lambda_c0(beta, 1).unwrap();
            let a = 2.0 * g;
            for i in 1..=101usize {
                let y = -1.0 + 2.0 * i as f64 / 102.0;
                let t = PI * y / 2.0;
                let phi = t.cos().powf(a);
                // phi'' = a (pi/2)^2 cos^{a-2} [ (a-1) sin^2 - cos^2 ]
                let d2 = a * (PI / 2.0) * (PI / 2.0)
                    * t.cos().powf(a - 2.0)
                    * ((a - 1.0) * t.sin() * t.sin() - t.cos() * t.cos());
                let u = 0.5 * (1.0 + (PI * y).cos());
                let upp = -0.5 * p2 * (PI * y).cos();
                let q = (beta - upp) / u;
                let resid = -d2 - q * phi - lam * phi;
                assert!(
                    resid.abs() < 1e-8 * (lam.abs().max(1.0)),
                    "beta {beta} y {y}: residual {resid}"
                );
            }
        }
    }
}
