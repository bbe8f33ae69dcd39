//! Shear-flow profiles: evaluable U and derivatives on a channel, range
//! metadata, and the class-K+ structure function K_beta.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An analytic shear profile U on [y1, y2] with derivatives up to third
/// order, range data, and the map beta -> U_beta. Immutable after
/// construction; safe to share across workers.
#[derive(Clone)]
pub struct FlowProfile {
    pub name: String,
    pub y1: f64,
    pub y2: f64,
    u: RealFn,
    du: RealFn,
    d2u: RealFn,
    d3u: RealFn,
    pub u_min: f64,
    pub u_max: f64,
    pub upp_min: f64,
    pub upp_max: f64,
    u_beta: RealFn,
}

impl fmt::Debug for FlowProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowProfile")
            .field("name", &self.name)
            .field("domain", &(self.y1, self.y2))
            .field("u_range", &(self.u_min, self.u_max))
            .field("upp_range", &(self.upp_min, self.upp_max))
            .finish()
    }
}

/// Report from sampling K_beta over the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KPlusReport {
    pub u_beta: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub ok: bool,
}

const REMOVABLE_WINDOW: f64 = 1e-10;

impl FlowProfile {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        y1: f64,
        y2: f64,
        u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        du: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d3u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        u_min: f64,
        u_max: f64,
        upp_min: f64,
        upp_max: f64,
        u_beta: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FlowProfile {
            name: name.into(),
            y1,
            y2,
            u: Arc::new(u),
            du: Arc::new(du),
            d2u: Arc::new(d2u),
            d3u: Arc::new(d3u),
            u_min,
            u_max,
            upp_min,
            upp_max,
            u_beta: Arc::new(u_beta),
        }
    }

    pub fn u(&self, y: f64) -> f64 {
        (self.u)(y)
    }

    pub fn du(&self, y: f64) -> f64 {
        (self.du)(y)
    }

    pub fn d2u(&self, y: f64) -> f64 {
        (self.d2u)(y)
    }

    pub fn d3u(&self, y: f64) -> f64 {
        (self.d3u)(y)
    }

    /// The speed U_beta with K_beta = (beta - U'')/(U - U_beta) positive
    /// and bounded; defined for beta in Ran(U'').
    pub fn u_beta(&self, beta: f64) -> Result<f64> {
        if beta < self.upp_min || beta > self.upp_max {
            return Err(Error::BetaOutOfRange {
                beta,
                min: self.upp_min,
                max: self.upp_max,
            });
        }
        Ok((self.u_beta)(beta))
    }

    /// K_beta(y); the removable singularity at U = U_beta is evaluated by
    /// the ratio of derivatives -U'''/U' inside a small window.
    pub fn k_beta(&self, beta: f64, y: f64) -> Result<f64> {
        let ub = self.u_beta(beta)?;
        let denom = self.u(y) - ub;
        if denom.abs() >= REMOVABLE_WINDOW {
            return Ok((beta - self.d2u(y)) / denom);
        }
        let up = self.du(y);
        if up.abs() > 1e-8 {
            return Ok(-self.d3u(y) / up);
        }
        // degenerate point (U' = 0 as well); fall back to nearby samples
        let h = 1e-4 * (self.y2 - self.y1);
        let left = (beta - self.d2u(y - h)) / (self.u(y - h) - ub);
        let right = (beta - self.d2u(y + h)) / (self.u(y + h) - ub);
        Ok(0.5 * (left + right))
    }

    /// Samples K_beta on a uniform grid of n_samples points and reports its
    /// range; ok iff every sample is strictly positive and finite.
    pub fn check_class_k_plus(&self, beta: f64, n_samples: usize) -> Result<KPlusReport> {
        assert!(n_samples >= 16, "need at least 16 samples");
        let u_beta = self.u_beta(beta)?;
        let mut k_min = f64::INFINITY;
        let mut k_max = f64::NEG_INFINITY;
        let mut ok = true;
        for i in 0..n_samples {
            let t = i as f64 / (n_samples - 1) as f64;
            let y = self.y1 + t * (self.y2 - self.y1);
            let k = self.k_beta(beta, y)?;
            if !(k.is_finite() && k > 0.0) {
                ok = false;
            }
            k_min = k_min.min(k);
            k_max = k_max.max(k);
        }
        Ok(KPlusReport {
            u_beta,
            k_min,
            k_max,
            ok,
        })
    }
}

/// The Sinus flow U(y) = (1 + cos(pi y))/2 on [-1, 1]; K_beta is
/// identically pi^2 and U_beta = 1/2 - beta/pi^2.
pub fn sinus_profile() -> FlowProfile {
    let pi2 = PI * PI;
    FlowProfile::new(
        "sinus",
        -1.0,
        1.0,
        |y| 0.5 * (1.0 + (PI * y).cos()),
        |y| -0.5 * PI * (PI * y).sin(),
        move |y| -0.5 * pi2 * (PI * y).cos(),
        move |y| 0.5 * pi2 * PI * (PI * y).sin(),
        0.0,
        1.0,
        -0.5 * pi2,
        0.5 * pi2,
        move |beta| 0.5 - beta / pi2,
    )
}

/// U(y) = tanh(y) on [-1/2, 1/2]. Here U'' = g(U) with
/// g(u) = -2u(1 - u^2) and g' < 0 on Ran(U), so the profile is in class
/// K+; U_beta is the Newton inverse of g.
pub fn tanh_profile() -> FlowProfile {
    let half = 0.5f64;
    let u_max = half.tanh();
    let g = |u: f64| -2.0 * u * (1.0 - u * u);
    let upp_max = g(-u_max);
    FlowProfile::new(
        "tanh",
        -half,
        half,
        |y| y.tanh(),
        |y| {
            let s = y.cosh();
            1.0 / (s * s)
        },
        |y| {
            let t = y.tanh();
            -2.0 * t * (1.0 - t * t)
        },
        |y| {
            let t = y.tanh();
            let s2 = 1.0 - t * t;
            // d/dy [-2 t s2] = -2 s2^2 + 4 t^2 s2
            s2 * (4.0 * t * t - 2.0 * s2)
        },
        -u_max,
        u_max,
        -upp_max,
        upp_max,
        move |beta| {
            // invert g on [-u_max, u_max] (strictly decreasing there)
            let mut u = -beta / 2.0;
            for _ in 0..60 {
                let f = -2.0 * u * (1.0 - u * u) - beta;
                let fp = -2.0 + 6.0 * u * u;
                let step = f / fp;
                u -= step;
                u = u.clamp(-u_max, u_max);
                if step.abs() < 1e-15 {
                    break;
                }
            }
            u
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sinus_point_values() {
        let p = sinus_profile();
        assert_eq!(p.u(0.0), 1.0);
        assert!(p.u(1.0).abs() < 1e-15);
        assert!(p.u(-1.0).abs() < 1e-15);
        assert_relative_eq!(p.d2u(0.3), -0.5 * PI * PI * (PI * 0.3).cos(), max_relative = 1e-14);
        assert_relative_eq!(p.u_beta(0.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(p.k_beta(2.0, 0.37).unwrap(), PI * PI, max_relative = 1e-9);
    }

    #[test]
    fn sinus_k_plus_reports() {
        let p = sinus_profile();
        let pi2 = PI * PI;
        let r = p.check_class_k_plus(0.0, 1024).unwrap();
        assert!(r.ok);
        assert_relative_eq!(r.u_beta, 0.5, max_relative = 1e-14);
        assert_relative_eq!(r.k_min, pi2, max_relative = 1e-8);
        assert_relative_eq!(r.k_max, pi2, max_relative = 1e-8);

        let r = p.check_class_k_plus(-pi2 / 2.0, 1024).unwrap();
        assert!(r.ok);
        assert_relative_eq!(r.u_beta, 1.0, max_relative = 1e-14);
        assert_relative_eq!(r.k_min, pi2, max_relative = 1e-8);

        assert!(matches!(
            p.check_class_k_plus(10.0, 64),
            Err(Error::BetaOutOfRange { .. })
        ));
    }

    #[test]
    fn sinus_k_beta_pointwise_is_pi_squared() {
        let p = sinus_profile();
        let pi2 = PI * PI;
        for &beta in &[-4.0, -0.5, 0.0, 1.3, 4.8] {
            let ub = p.u_beta(beta).unwrap();
            let mut y = -0.999;
            while y < 1.0 {
                if (p.u(y) - ub).abs() > 1e-12 {
                    let k = (beta - p.d2u(y)) / (p.u(y) - ub);
                    assert!(
                        (k - pi2).abs() < 1e-9 * pi2,
                        "K mismatch at beta={beta}, y={y}: {k}"
                    );
                }
                y += 0.013;
            }
        }
    }

    fn check_derivative_consistency(p: &FlowProfile) {
        // deterministic pseudo-random sample points
        let h = 1e-5;
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..64 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let t = (state >> 11) as f64 / (1u64 << 53) as f64;
            let y = p.y1 + h + t * (p.y2 - p.y1 - 2.0 * h);
            let fd1 = (p.u(y + h) - p.u(y - h)) / (2.0 * h);
            let fd2 = (p.du(y + h) - p.du(y - h)) / (2.0 * h);
            let fd3 = (p.d2u(y + h) - p.d2u(y - h)) / (2.0 * h);
            let scale = |v: f64| v.abs().max(1e-3);
            assert!((fd1 - p.du(y)).abs() / scale(p.du(y)) < 1e-6, "U' at {y}");
            assert!((fd2 - p.d2u(y)).abs() / scale(p.d2u(y)) < 1e-6, "U'' at {y}");
            assert!((fd3 - p.d3u(y)).abs() / scale(p.d3u(y)) < 1e-6, "U''' at {y}");
        }
    }

    #[test]
    fn derivative_consistency_sinus() {
        check_derivative_consistency(&sinus_profile());
    }

    #[test]
    fn derivative_consistency_tanh() {
        check_derivative_consistency(&tanh_profile());
    }

    #[test]
    fn tanh_is_class_k_plus() {
        let p = tanh_profile();
        for &frac in &[-0.9, -0.4, 0.0, 0.4, 0.9] {
            let beta = frac * p.upp_max;
            let r = p.check_class_k_plus(beta, 512).unwrap();
            assert!(r.ok, "tanh not K+ at beta = {beta}: {r:?}");
            assert!(r.k_min > 0.0 && r.k_max.is_finite());
        }
    }
}
