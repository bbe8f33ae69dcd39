//! Special functions backing the closed-form eigenvalue formulas:
//! log-Gamma, the Gauss hypergeometric function 2F1 on [0,1], and the
//! cosine-power integral C_s.

use crate::error::{Error, Result};

/// A real value extended with an explicit +infinity marker, so that the
/// divergent branches stay testable instead of turning into float infs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    PlusInfinity,
}

impl Extended {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn unwrap_finite(&self) -> f64 {
        match self {
            Extended::Finite(v) => *v,
            Extended::PlusInfinity => panic!("expected finite value, got +inf"),
        }
    }
}

/// Parameters of 2F1(a,b;c;z).
#[derive(Debug, Clone, Copy)]
pub struct HypArgs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub z: f64,
}

// Lanczos approximation, g = 7, 9 coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// ln Gamma(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        return Err(Error::PoleError(x));
    }
    if x <= 0.0 {
        // served via gamma_signed; keep the primary contract strict
        return Err(Error::PoleError(x));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    // Lanczos series is accurate for x >= 0.5; shift up otherwise.
    if x < 0.5 {
        // Gamma(x) = Gamma(x+1)/x
        return ln_gamma_pos(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + acc.ln()
}

/// (ln |Gamma(x)|, sign of Gamma(x)) for any non-pole x, via reflection.
pub fn gamma_signed(x: f64) -> Result<(f64, f64)> {
    if is_nonpositive_integer(x) {
        return Err(Error::PoleError(x));
    }
    if x > 0.0 {
        return Ok((ln_gamma_pos(x), 1.0));
    }
    // Gamma(x) Gamma(1-x) = pi / sin(pi x)
    let s = (std::f64::consts::PI * x).sin();
    let ln_abs = std::f64::consts::PI.ln() - s.abs().ln() - ln_gamma_pos(1.0 - x);
    Ok((ln_abs, s.signum()))
}

const MAX_TERMS: usize = 1_000_000;
const SERIES_EPS: f64 = 1e-15;

/// Direct power series, assuming convergence checks were done by the caller.
/// Terminates early when a or b hits a non-positive integer along the
/// Pochhammer ladder.
fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let an = a + nf;
        let bn = b + nf;
        if an == 0.0 || bn == 0.0 {
            // series terminated: polynomial case
            return Ok(sum);
        }
        let cn = c + nf;
        if cn == 0.0 {
            return Err(Error::PoleError(c));
        }
        term *= an * bn / cn * z / (nf + 1.0);
        sum += term;
        if term.abs() <= SERIES_EPS * sum.abs().max(1.0) {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence(MAX_TERMS))
}

/// True when the series for (a,b;c) terminates before c's Pochhammer ladder
/// hits zero, making a non-positive-integer c harmless.
fn terminates_safely(a: f64, b: f64, c: f64) -> bool {
    let stop = |p: f64| {
        if is_nonpositive_integer(p) {
            Some((-p) as usize)
        } else {
            None
        }
    };
    let n_stop = match (stop(a), stop(b)) {
        (Some(na), Some(nb)) => Some(na.min(nb)),
        (Some(na), None) => Some(na),
        (None, Some(nb)) => Some(nb),
        (None, None) => None,
    };
    match (n_stop, stop(c)) {
        (_, None) => true,
        (Some(ns), Some(nc)) => ns < nc,
        (None, Some(_)) => false,
    }
}

/// Gauss hypergeometric 2F1(a,b;c;z) for real parameters and z in [0,1).
///
/// Direct summation for z <= 1/2; Euler transformation
/// (1-z)^(c-a-b) 2F1(c-a, c-b; c; z) for z > 1/2.
pub fn hyp2f1(args: HypArgs) -> Result<f64> {
    let HypArgs { a, b, c, z } = args;
    if !(0.0..1.0).contains(&z) {
        return Err(Error::NoConvergence(0));
    }
    if !terminates_safely(a, b, c) {
        return Err(Error::PoleError(c));
    }
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    if z <= 0.5 || is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        return hyp2f1_series(a, b, c, z);
    }
    let s = c - a - b;
    let f = hyp2f1_series(c - a, c - b, c, z)?;
    Ok((1.0 - z).powf(s) * f)
}

/// 2F1(a,b;c;1) by the Gauss summation formula
/// Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b)); requires c-a-b > 0.
pub fn gauss_at_one(a: f64, b: f64, c: f64) -> Result<f64> {
    if a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        // terminating series: a finite polynomial value at z = 1
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for n in 0..MAX_TERMS {
            let nf = n as f64;
            if a + nf == 0.0 || b + nf == 0.0 {
                return Ok(sum);
            }
            if c + nf == 0.0 {
                return Err(Error::PoleError(c));
            }
            term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0));
            sum += term;
        }
        return Err(Error::NoConvergence(MAX_TERMS));
    }
    let s = c - a - b;
    if s <= 0.0 {
        return Err(Error::DivergesAtOne(s));
    }
    // poles of the denominator Gammas give a zero value (terminating cases
    // approach it continuously)
    let den_a = match gamma_signed(c - a) {
        Ok(v) => v,
        Err(Error::PoleError(_)) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let den_b = match gamma_signed(c - b) {
        Ok(v) => v,
        Err(Error::PoleError(_)) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let num_c = gamma_signed(c)?;
    let num_s = gamma_signed(s)?;
    let ln = num_c.0 + num_s.0 - den_a.0 - den_b.0;
    let sign = num_c.1 * num_s.1 * den_a.1 * den_b.1;
    Ok(sign * ln.exp())
}

/// C_s = integral of cos^s(pi y / 2) over [-1, 1]:
/// (2/sqrt(pi)) Gamma((s+1)/2) / Gamma(s/2 + 1) for s > -1, +inf otherwise.
pub fn cos_power_integral(s: f64) -> Extended {
    if s <= -1.0 {
        return Extended::PlusInfinity;
    }
    let ln = ln_gamma_pos((s + 1.0) / 2.0) - ln_gamma_pos(s / 2.0 + 1.0);
    Extended::Finite(2.0 / std::f64::consts::PI.sqrt() * ln.exp())
}
