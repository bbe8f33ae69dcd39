//! Stability analysis of the Sinus flow U(y) = (1 + cos(pi y))/2 on
//! [-1, 1]: the lower boundary Lambda_beta of the unstable wave-number
//! band, the threshold beta_-, dispersion roots in the upper half plane,
//! the non-resonant neutral-mode census, and the Hamiltonian index
//! counts k_c + k_r + k_i^{<=0} = n^-(L_alpha).
//!
//! Sign conventions: lambda_n are the eigenvalues of -d^2/dy^2 - q with
//! q = (beta - U'')/(U - c); a neutral mode with wave number alpha has
//! lambda_n = -alpha^2, and Lambda_beta is the supremum of -lambda_1 over
//! admissible real speeds.

use crate::closedform;
use crate::error::{Error, Result};
use crate::slsolver::{self, SlProblem, Speed};
use crate::specfun::Extended;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

fn pi2() -> f64 {
    PI * PI
}

fn sinus_u(y: f64) -> f64 {
    0.5 * (1.0 + (PI * y).cos())
}

fn sinus_upp(y: f64) -> f64 {
    -0.5 * pi2() * (PI * y).cos()
}

fn sinus_u_beta(beta: f64) -> f64 {
    0.5 - beta / pi2()
}

/// Which half of the neutral speed range: c <= 0 or c >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Unstable,
    RegularNeutral,
    SingularNeutral,
    NonresonantNeutral,
}

/// Residual diagnostics of a computed mode; all normalized by the L2
/// norm of phi (which is 1 after construction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeIdentities {
    /// boundary defect |phi(y2)| / max |phi|
    pub ode: f64,
    /// int (beta - U'')/|U - c|^2 |phi|^2
    pub identity2: f64,
    /// the q-identity at q = U_beta
    pub identity1: f64,
    /// int K |phi|^2 - int (|phi'|^2 + alpha^2 |phi|^2)
    pub h1_slack: f64,
    /// ||K|| int K |phi|^2 - int (|phi''|^2 + 2 alpha^2 |phi'|^2 + alpha^4 |phi|^2)
    pub h2_slack: f64,
    /// |(c - U_beta)| times identity2
    pub lform: f64,
}

/// A normal mode phi(y) e^{i alpha (x - c t)} with its diagnostics.
#[derive(Debug, Clone)]
pub struct Mode {
    pub c: Complex64,
    pub alpha: f64,
    pub beta: f64,
    pub grid: Vec<f64>,
    pub phi: Vec<Complex64>,
    pub dphi: Vec<Complex64>,
    pub kind: ModeKind,
    pub residuals: ModeIdentities,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCase {
    EndpointMonotone,
    InteriorHump,
    Zero,
}

/// One point of the stability boundary alpha^2 = Lambda_beta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub beta: f64,
    pub capital_lambda: f64,
    /// location of the supremum; 0 or 1 means the endpoint itself
    pub c_star: f64,
    pub alpha_lower: f64,
    /// pi sqrt(1 - gamma^2) for beta in (0, pi^2/2), NaN otherwise
    pub snm_alpha: f64,
    pub case: BoundaryCase,
}

/// Count data entering the index formula at one (alpha, beta).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexCount {
    pub alpha: f64,
    pub beta: f64,
    pub n_minus: usize,
    pub k_unstable: usize,
    pub k_i_nonpos: usize,
    pub holds: bool,
}

/// A non-resonant neutral mode: real speed c outside [0, 1] with
/// lambda_n(beta, c) = -alpha^2; signature is the sign of the energy
/// quadratic form -(c - U_beta) dlambda_n/dc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensusEntry {
    pub c: f64,
    pub n: usize,
    pub signature: i8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticForm {
    pub via_identity: f64,
    pub via_definition: f64,
}

/// Morse index data of L_alpha for the Sinus flow:
/// sigma(L_alpha) = {1/pi^2 - 1/(k^2 pi^2/4 + alpha^2)}, beta-independent.
pub fn n_minus_l_alpha(alpha: f64, _beta: f64) -> (usize, usize) {
    assert!(alpha > 0.0);
    let a2 = alpha * alpha;
    let mut n_minus = 0;
    let mut n_zero = 0;
    for k in 1..=8usize {
        let v = (k * k) as f64 * pi2() / 4.0 + a2;
        if (v - pi2()).abs() < 1e-12 {
            n_zero += 1;
        } else if v < pi2() {
            n_minus += 1;
        }
    }
    (n_minus, n_zero)
}

fn lambda_n_at(beta: f64, speed: Speed, n: usize, tol: f64) -> Result<f64> {
    let prob = SlProblem::new(crate::profiles::sinus_profile(), beta, speed);
    Ok(slsolver::eigenvalues(&prob, n, tol)?[n - 1])
}

/// -lambda_1, the quantity whose supremum is Lambda_beta.
fn lm_at(beta: f64, speed: Speed, tol: f64) -> Result<f64> {
    Ok(-lambda_n_at(beta, speed, 1, tol)?)
}

fn golden_max<F: FnMut(f64) -> Result<f64>>(
    mut a: f64,
    mut b: f64,
    xtol: f64,
    f: &mut F,
) -> Result<(f64, f64)> {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > xtol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}

struct SideSearch {
    interior_lm: f64,
    interior_c: f64,
    endpoint_lm: f64,
}

/// Supremum of -lambda_1 over one side of the neutral speed range.
/// The maximizer is either deep in the compactified grid or hides within
/// 10^-2..10^-6 of the finite endpoint, so a coarse ctilde scan and a
/// log-distance ladder are refined separately and the best taken.
fn side_search(beta: f64, side: Side, tol: f64, fast: bool) -> Result<SideSearch> {
    let endpoint_lm = match side {
        Side::Left => -closedform::lambda1_c0_endpoint(beta)?,
        Side::Right => -closedform::lambda1_c1_endpoint(beta)?,
    };
    let sgn = match side {
        Side::Left => -1.0,
        Side::Right => 1.0,
    };
    let n_scan = if fast { 32usize } else { 128 };
    let scan_tol = tol.max(1e-6);
    let ref_tol = tol.max(if fast { 1e-7 } else { 1e-8 });

    // coarse scan over the compactified coordinate, endpoints excluded
    let ct_of = |x: f64| sgn * 2.0 * x / n_scan as f64;
    let mut best_j = 1usize;
    let mut best_v = f64::NEG_INFINITY;
    for j in 1..n_scan {
        let v = lm_at(beta, Speed::Compactified(ct_of(j as f64)), scan_tol)?;
        if v > best_v {
            best_v = v;
            best_j = j;
        }
    }
    let xlo = (best_j as f64 - 1.0).max(0.5);
    let xhi = (best_j as f64 + 1.0).min(n_scan as f64 - 0.5);
    let (x_best, _) = golden_max(xlo, xhi, 1e-3 * n_scan as f64, &mut |x| {
        lm_at(beta, Speed::Compactified(ct_of(x)), scan_tol)
    })?;
    let lm_grid = lm_at(beta, Speed::Compactified(ct_of(x_best)), ref_tol)?;
    let c_grid = 1.0 / ct_of(x_best) + 0.5;

    // endpoint ladder c = endpoint -+ 10^-t
    let base = match side {
        Side::Left => 0.0,
        Side::Right => 1.0,
    };
    let c_of = |t: f64| base + sgn * 10f64.powf(-t);
    let mut best_t = 2.0f64;
    let mut best_lad = f64::NEG_INFINITY;
    for k in 2..=6 {
        let v = lm_at(beta, Speed::Finite(c_of(k as f64)), ref_tol)?;
        if v > best_lad {
            best_lad = v;
            best_t = k as f64;
        }
    }
    let (t_best, lm_lad) = golden_max((best_t - 1.0).max(1.5), (best_t + 1.0).min(7.0), 0.02, &mut |t| {
        lm_at(beta, Speed::Finite(c_of(t)), ref_tol)
    })?;
    let c_lad = c_of(t_best);

    let (interior_lm, interior_c) = if lm_lad >= lm_grid {
        (lm_lad, c_lad)
    } else {
        (lm_grid, c_grid)
    };
    Ok(SideSearch {
        interior_lm,
        interior_c,
        endpoint_lm,
    })
}

/// Samples lambda_1(beta, c) along one side: endpoint closed-form value,
/// geometric refinement ladder near the finite endpoint, compactified
/// interior grid, and the point at infinity. Sorted by c.
pub fn lambda_beta_profile(beta: f64, side: Side, grid: usize) -> Result<Vec<(f64, f64)>> {
    assert!(grid >= 64, "grid must be at least 64");
    let tol = 1e-7;
    let mut out: Vec<(f64, f64)> = Vec::new();
    let (endpoint_c, endpoint_lam, sgn) = match side {
        Side::Left => (0.0, closedform::lambda1_c0_endpoint(beta)?, -1.0),
        Side::Right => (1.0, closedform::lambda1_c1_endpoint(beta)?, 1.0),
    };
    out.push((endpoint_c, endpoint_lam));
    for k in 2..=6 {
        let c = endpoint_c + sgn * 10f64.powi(-k);
        out.push((c, lambda_n_at(beta, Speed::Finite(c), 1, tol)?));
    }
    for j in 1..grid {
        let ct = sgn * 2.0 * j as f64 / grid as f64;
        let c = 1.0 / ct + 0.5;
        out.push((c, lambda_n_at(beta, Speed::Compactified(ct), 1, tol)?));
    }
    let inf_c = match side {
        Side::Left => f64::NEG_INFINITY,
        Side::Right => f64::INFINITY,
    };
    out.push((inf_c, closedform::lambda_infinity(1)));
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(out)
}

/// The interior maximizer must beat the endpoint by this much before an
/// interior hump is declared; sized between the solver error floor and
/// the smallest hump excess in the reference table (about 2e-5).
const HUMP_MARGIN: f64 = 3e-6;

/// The lower stability boundary Lambda_beta = sup_{c not in (0,1)} of
/// the negative part of lambda_1, with the supremum location and the
/// shape classification of the boundary.
pub fn capital_lambda(beta: f64, tol: f64) -> Result<BoundaryPoint> {
    assert!(tol > 0.0);
    let half = pi2() / 2.0;
    if !(beta > -half && beta < half) {
        return Err(Error::BetaOutOfRange {
            beta,
            min: -half,
            max: half,
        });
    }
    // unstable phase speeds obey Re c <= u_max for beta > 0 and
    // Re c >= u_min for beta < 0, so neutral limits sit on one side only
    let side = if beta > 0.0 { Side::Left } else { Side::Right };
    let ss = side_search(beta, side, tol, false)?;
    let endpoint_c = match side {
        Side::Left => 0.0,
        Side::Right => 1.0,
    };
    let snm_alpha = if beta > 0.0 {
        let g = closedform::gamma_exponent(beta)?;
        PI * (1.0 - g * g).sqrt()
    } else {
        f64::NAN
    };
    let (raw, c_star, interior) = if ss.interior_lm > ss.endpoint_lm + HUMP_MARGIN {
        (ss.interior_lm, ss.interior_c, true)
    } else {
        (ss.endpoint_lm, endpoint_c, false)
    };
    if raw <= 1e-9 {
        return Ok(BoundaryPoint {
            beta,
            capital_lambda: 0.0,
            c_star: endpoint_c,
            alpha_lower: 0.0,
            snm_alpha,
            case: BoundaryCase::Zero,
        });
    }
    Ok(BoundaryPoint {
        beta,
        capital_lambda: raw,
        c_star,
        alpha_lower: raw.sqrt(),
        snm_alpha,
        case: if interior {
            BoundaryCase::InteriorHump
        } else {
            BoundaryCase::EndpointMonotone
        },
    })
}

/// The threshold beta_- where g(beta) = inf_{c in [1, inf)} lambda_1
/// crosses zero; g is nondecreasing in beta, so plain bisection applies.
pub fn find_beta_minus(tol: f64) -> Result<f64> {
    assert!(tol > 0.0);
    let g = |beta: f64| -> Result<f64> {
        let ss = side_search(beta, Side::Right, tol, true)?;
        Ok(-ss.interior_lm.max(ss.endpoint_lm))
    };
    let mut lo = -0.499 * pi2();
    let mut hi = -0.001 * pi2();
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn boundary_sweep(beta_grid: &[f64], tol: f64) -> Result<Vec<BoundaryPoint>> {
    beta_grid
        .par_iter()
        .map(|&b| capital_lambda(b, tol))
        .collect()
}

// ---------------------------------------------------------------------
// Shooting integrator for the dispersion function D(c) = phi(y2)
// ---------------------------------------------------------------------

const SHOOT_TOL: f64 = 1e-10;

struct Shooter {
    alpha2: f64,
    beta: f64,
    c: Complex64,
    removable: bool,
}

impl Shooter {
    fn q(&self, y: f64) -> Complex64 {
        if self.removable {
            // K_beta is identically pi^2 for the Sinus flow
            Complex64::new(pi2(), 0.0)
        } else {
            Complex64::new(self.beta - sinus_upp(y), 0.0) / (Complex64::new(sinus_u(y), 0.0) - self.c)
        }
    }

    fn deriv(&self, y: f64, s: [Complex64; 2]) -> [Complex64; 2] {
        [s[1], (self.alpha2 - self.q(y)) * s[0]]
    }

    fn rk4(&self, y: f64, h: f64, s: [Complex64; 2]) -> [Complex64; 2] {
        let k1 = self.deriv(y, s);
        let s2 = [s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]];
        let k2 = self.deriv(y + 0.5 * h, s2);
        let s3 = [s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]];
        let k3 = self.deriv(y + 0.5 * h, s3);
        let s4 = [s[0] + h * k3[0], s[1] + h * k3[1]];
        let k4 = self.deriv(y + h, s4);
        [
            s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    }

    /// Adaptive step-doubling RK4 from checkpoint to checkpoint; returns
    /// the state at every checkpoint, starting from s0 at checkpoints[0].
    fn integrate(&self, checkpoints: &[f64], s0: [Complex64; 2]) -> Result<Vec<[Complex64; 2]>> {
        let span = checkpoints[checkpoints.len() - 1] - checkpoints[0];
        let mut out = Vec::with_capacity(checkpoints.len());
        out.push(s0);
        let mut s = s0;
        let mut y = checkpoints[0];
        let mut h = span / 64.0;
        for &target in &checkpoints[1..] {
            while y < target {
                let step = h.min(target - y);
                let full = self.rk4(y, step, s);
                let mid = self.rk4(y, 0.5 * step, s);
                let half = self.rk4(y + 0.5 * step, 0.5 * step, mid);
                let scale = s[0]
                    .norm()
                    .max(s[1].norm())
                    .max(half[0].norm())
                    .max(half[1].norm())
                    .max(1e-8);
                let err = ((half[0] - full[0]).norm().max((half[1] - full[1]).norm())) / (15.0 * scale);
                if err <= SHOOT_TOL {
                    s = [
                        half[0] + (half[0] - full[0]) / 15.0,
                        half[1] + (half[1] - full[1]) / 15.0,
                    ];
                    y += step;
                    let grow = if err > 0.0 {
                        (0.9 * (SHOOT_TOL / err).powf(0.2)).clamp(1.0, 4.0)
                    } else {
                        4.0
                    };
                    h = step * grow;
                } else {
                    h = step * (0.9 * (SHOOT_TOL / err).powf(0.25)).clamp(0.1, 0.9);
                }
                if h < 1e-13 * span.abs() {
                    return Err(Error::StepFailure(y));
                }
            }
            out.push(s);
        }
        Ok(out)
    }
}

fn build_shooter(alpha: f64, beta: f64, c: Complex64) -> Result<Shooter> {
    assert!(alpha >= 0.0);
    let mut removable = false;
    if c.im == 0.0 {
        let cr = c.re;
        let ub = sinus_u_beta(beta);
        if (0.0..=1.0).contains(&cr) {
            if (cr - ub).abs() < 1e-12 && (0.0..=1.0).contains(&ub) {
                removable = true;
            } else if cr != 0.0 {
                // c = 0 is handled by the Frobenius wall start below
                return Err(Error::InvalidSpeed(cr));
            }
        }
    }
    Ok(Shooter {
        alpha2: alpha * alpha,
        beta,
        c,
        removable,
    })
}

/// D(c) = phi(1) for the shooting solution with phi(-1) = 0, phi'(-1) = 1.
/// Analytic in c off the real segment [0, 1]; the singular endpoint c = 0
/// is served by the regular Frobenius branch phi ~ d^{2 gamma} at the wall.
pub fn dispersion(alpha: f64, beta: f64, c: Complex64) -> Result<Complex64> {
    let shooter = build_shooter(alpha, beta, c)?;
    if c.im == 0.0 && c.re == 0.0 && !shooter.removable {
        let g = closedform::gamma_exponent(beta)?;
        let delta = 1e-6f64;
        let s0 = [
            Complex64::new(delta.powf(2.0 * g), 0.0),
            Complex64::new(2.0 * g * delta.powf(2.0 * g - 1.0), 0.0),
        ];
        let states = shooter.integrate(&[-1.0 + delta, 1.0 - delta], s0)?;
        return Ok(states[1][0]);
    }
    let s0 = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let states = shooter.integrate(&[-1.0, 1.0], s0)?;
    Ok(states[1][0])
}

// ---------------------------------------------------------------------
// Winding-number root counting
// ---------------------------------------------------------------------

const CONTOUR_EPS: f64 = 1e-4;

/// Number of dispersion roots with Im c > CONTOUR_EPS inside the
/// semicircle box, by the argument principle on a rectangular contour
/// with adaptive phase tracking.
pub fn count_unstable(alpha: f64, beta: f64) -> Result<usize> {
    assert!(alpha > 0.0);
    let m = 0.5;
    let r = 0.5 + beta.abs() / (2.0 * alpha * alpha) + 0.1;
    let eps = CONTOUR_EPS;
    let corners = [
        Complex64::new(m - r, eps),
        Complex64::new(m + r, eps),
        Complex64::new(m + r, r),
        Complex64::new(m - r, r),
        Complex64::new(m - r, eps),
    ];
    // The bottom edge needs dense seeding near the branch points c = 0 and
    // c = 1: the phase of D varies there on the scale eps, and a whole
    // multiple of 2 pi inside one coarse segment is invisible to the
    // subdivision test below (the wrapped jump looks small).
    let mut bottom: Vec<f64> = Vec::new();
    let n0 = 24usize;
    for k in 0..=n0 {
        bottom.push(m - r + 2.0 * r * k as f64 / n0 as f64);
    }
    for window in [0.0f64, 1.0] {
        let (lo, hi) = (window - 0.05, window + 0.05);
        let mut x = lo.max(m - r);
        while x < hi.min(m + r) {
            bottom.push(x);
            x += 0.5 * eps;
        }
    }
    bottom.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bottom.dedup();

    let mut pts: Vec<(Complex64, Complex64)> = Vec::new();
    for &x in &bottom[..bottom.len() - 1] {
        let c = Complex64::new(x, eps);
        pts.push((c, dispersion(alpha, beta, c)?));
    }
    for w in corners[1..].windows(2) {
        for k in 0..n0 {
            let t = k as f64 / n0 as f64;
            let c = w[0] + t * (w[1] - w[0]);
            pts.push((c, dispersion(alpha, beta, c)?));
        }
    }
    pts.push(pts[0]);

    // Newton estimate |D| / |D'| of the distance to the nearest root,
    // skipping the bottom edge: it runs close to the continuous spectrum
    // by construction and roots below it are excluded on purpose.
    let dist_estimate = |pts: &[(Complex64, Complex64)]| {
        let mut dist = f64::INFINITY;
        for w in pts.windows(2) {
            if w[0].0.im < 2.0 * eps && w[1].0.im < 2.0 * eps {
                continue;
            }
            let dd = (w[1].1 - w[0].1).norm();
            if dd > 1e-300 {
                dist = dist.min(w[0].1.norm() * (w[1].0 - w[0].0).norm() / dd);
            }
        }
        dist
    };

    loop {
        let mut inserted = false;
        let mut i = 0;
        while i + 1 < pts.len() {
            let dphase = (pts[i + 1].1 / pts[i].1).arg();
            if dphase.abs() > PI / 2.0 {
                let gap = (pts[i + 1].0 - pts[i].0).norm();
                if gap < 1e-9 || pts.len() > 40_000 {
                    return Err(Error::ContourAmbiguous {
                        dist: dist_estimate(&pts),
                    });
                }
                let c = 0.5 * (pts[i].0 + pts[i + 1].0);
                pts.insert(i + 1, (c, dispersion(alpha, beta, c)?));
                inserted = true;
            } else {
                i += 1;
            }
        }
        if !inserted {
            break;
        }
    }

    let total: f64 = pts.windows(2).map(|w| (w[1].1 / w[0].1).arg()).sum();
    let winding = total / (2.0 * PI);
    let k = winding.round();
    let dist = dist_estimate(&pts);
    if (winding - k).abs() > 0.1 || k < -0.5 || dist < 10.0 * eps {
        return Err(Error::ContourAmbiguous { dist });
    }
    Ok(k as usize)
}

// ---------------------------------------------------------------------
// Mode construction and identities
// ---------------------------------------------------------------------

const MODE_GRID: usize = 4096;

fn trapezoid(grid: &[f64], vals: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..grid.len() {
        acc += 0.5 * (grid[i] - grid[i - 1]) * (vals[i] + vals[i - 1]);
    }
    acc
}

fn mode_from_speed(alpha: f64, beta: f64, c: Complex64, kind: ModeKind) -> Result<Mode> {
    let shooter = build_shooter(alpha, beta, c)?;
    let grid: Vec<f64> = (0..=MODE_GRID)
        .map(|i| -1.0 + 2.0 * i as f64 / MODE_GRID as f64)
        .collect();
    let s0 = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let states = shooter.integrate(&grid, s0)?;
    let mut phi: Vec<Complex64> = states.iter().map(|s| s[0]).collect();
    let mut dphi: Vec<Complex64> = states.iter().map(|s| s[1]).collect();

    // L2-normalize and rotate the largest sample onto the positive axis
    let sq: Vec<f64> = phi.iter().map(|p| p.norm_sqr()).collect();
    let nrm = trapezoid(&grid, &sq).sqrt();
    let imax = (0..phi.len())
        .max_by(|&a, &b| phi[a].norm().partial_cmp(&phi[b].norm()).unwrap())
        .unwrap();
    let factor = phi[imax].conj() / (phi[imax].norm() * nrm);
    for v in phi.iter_mut().chain(dphi.iter_mut()) {
        *v *= factor;
    }

    let mut mode = Mode {
        c,
        alpha,
        beta,
        grid,
        phi,
        dphi,
        kind,
        residuals: ModeIdentities {
            ode: 0.0,
            identity2: 0.0,
            identity1: 0.0,
            h1_slack: 0.0,
            h2_slack: 0.0,
            lform: 0.0,
        },
    };
    mode.residuals = verify_mode_identities(&mode);
    Ok(mode)
}

/// Second derivative of phi from the stored first derivative, by central
/// differences (independent of the ODE relation).
fn second_derivative(grid: &[f64], dphi: &[Complex64]) -> Vec<Complex64> {
    let n = grid.len();
    let mut d2 = vec![Complex64::new(0.0, 0.0); n];
    for i in 1..n - 1 {
        d2[i] = (dphi[i + 1] - dphi[i - 1]) / (grid[i + 1] - grid[i - 1]);
    }
    d2[0] = (dphi[1] - dphi[0]) / (grid[1] - grid[0]);
    d2[n - 1] = (dphi[n - 1] - dphi[n - 2]) / (grid[n - 1] - grid[n - 2]);
    d2
}

/// Integral identities and slack bounds evaluated on a mode's samples.
pub fn verify_mode_identities(mode: &Mode) -> ModeIdentities {
    let n = mode.grid.len();
    let alpha2 = mode.alpha * mode.alpha;
    let ub = sinus_u_beta(mode.beta);
    let removable = mode.c.im == 0.0 && (mode.c.re - ub).abs() < 1e-12;

    let mut i2_vals = vec![0.0; n];
    let mut i1_vals = vec![0.0; n];
    let mut grad_vals = vec![0.0; n];
    let mut sq_vals = vec![0.0; n];
    for i in 0..n {
        let y = mode.grid[i];
        let u = sinus_u(y);
        let upp = sinus_upp(y);
        let p2 = mode.phi[i].norm_sqr();
        let dp2 = mode.dphi[i].norm_sqr();
        let denom = (Complex64::new(u, 0.0) - mode.c).norm_sqr();
        sq_vals[i] = p2;
        grad_vals[i] = dp2 + alpha2 * p2;
        if removable {
            // (beta - U'')(U - U_beta)/|U - U_beta|^2 reduces to K = pi^2
            i1_vals[i] = grad_vals[i] - pi2() * p2;
            i2_vals[i] = 0.0;
        } else {
            i2_vals[i] = (mode.beta - upp) / denom * p2;
            i1_vals[i] = grad_vals[i] - (mode.beta - upp) * (u - ub) / denom * p2;
        }
    }
    let l2 = trapezoid(&mode.grid, &sq_vals).max(1e-300);
    let identity2 = trapezoid(&mode.grid, &i2_vals) / l2;
    let identity1 = trapezoid(&mode.grid, &i1_vals) / l2;

    // H1/H2 bounds; K_beta is identically pi^2 for the Sinus flow
    let grad = trapezoid(&mode.grid, &grad_vals) / l2;
    let h1_slack = pi2() - grad;
    let d2 = second_derivative(&mode.grid, &mode.dphi);
    let h2_vals: Vec<f64> = (0..n)
        .map(|i| d2[i].norm_sqr() + 2.0 * alpha2 * mode.dphi[i].norm_sqr() + alpha2 * alpha2 * sq_vals[i])
        .collect();
    let h2_slack = pi2() * pi2() - trapezoid(&mode.grid, &h2_vals) / l2;

    let lform = if removable {
        0.0
    } else {
        ((mode.c - Complex64::new(ub, 0.0)) * identity2).norm()
    };
    let max_phi = mode
        .phi
        .iter()
        .fold(0.0f64, |a, p| a.max(p.norm()))
        .max(1e-300);
    let ode = mode.phi[n - 1].norm() / max_phi;

    ModeIdentities {
        ode,
        identity2,
        identity1,
        h1_slack,
        h2_slack,
        lform,
    }
}

/// Energy quadratic form on the mode's vorticity omega = -phi'' + alpha^2 phi,
/// through the boundary-term identity and through the definition.
pub fn quadratic_form(mode: &Mode) -> QuadraticForm {
    let n = mode.grid.len();
    let alpha2 = mode.alpha * mode.alpha;
    let ub = sinus_u_beta(mode.beta);
    let via_identity = (mode.c.re - ub) * mode.residuals.identity2;

    let d2 = second_derivative(&mode.grid, &mode.dphi);
    let vals: Vec<f64> = (0..n)
        .map(|i| {
            let omega = -d2[i] + alpha2 * mode.phi[i];
            omega.norm_sqr() / pi2() - (mode.dphi[i].norm_sqr() + alpha2 * mode.phi[i].norm_sqr())
        })
        .collect();
    let sq: Vec<f64> = mode.phi.iter().map(|p| p.norm_sqr()).collect();
    let l2 = trapezoid(&mode.grid, &sq).max(1e-300);
    QuadraticForm {
        via_identity,
        via_definition: trapezoid(&mode.grid, &vals) / l2,
    }
}

// ---------------------------------------------------------------------
// Unstable mode location
// ---------------------------------------------------------------------

fn secant_root(alpha: f64, beta: f64, seed: Complex64, box_r: f64) -> Result<Complex64> {
    let m = Complex64::new(0.5, 0.0);
    let mut c_prev = seed;
    let mut d_prev = dispersion(alpha, beta, c_prev)?;
    let mut c = seed + Complex64::new(1e-4, 1e-4);
    let mut d = dispersion(alpha, beta, c)?;
    for _ in 0..100 {
        let denom = d - d_prev;
        if denom.norm() < 1e-300 {
            break;
        }
        let step = d * (c - c_prev) / denom;
        c_prev = c;
        d_prev = d;
        c -= step;
        if c.im < 1e-12 || (c - m).norm() > 3.0 * box_r {
            break;
        }
        if step.norm() < 1e-13 * (1.0 + c.norm()) {
            return Ok(c);
        }
        d = dispersion(alpha, beta, c)?;
    }
    Err(Error::NoConvergence(100))
}

/// Slack of the semicircle bound: nonnegative iff c lies inside the disk
/// of radius 1/2 + |beta| / (2 alpha^2) around the midpoint of Ran(U).
pub fn semicircle_slack(alpha: f64, beta: f64, c: Complex64) -> f64 {
    let r = 0.5 + beta.abs() / (2.0 * alpha.max(1e-12) * alpha.max(1e-12));
    r * r - ((c.re - 0.5) * (c.re - 0.5) + c.im * c.im)
}

/// Locates the unstable mode at (alpha, beta), if any. For alpha = 0 a
/// direct |D| grid scan replaces the winding count.
pub fn find_unstable_mode(alpha: f64, beta: f64) -> Result<Option<Mode>> {
    assert!(alpha >= 0.0);
    let (re_lo, re_hi, im_hi, box_r) = if alpha == 0.0 {
        (0.0, 1.0, 0.6, 2.0)
    } else {
        if count_unstable(alpha, beta)? == 0 {
            return Ok(None);
        }
        let r = 0.5 + beta.abs() / (2.0 * alpha * alpha) + 0.1;
        (0.5 - r, 0.5 + r, r, r)
    };

    let mut seeds: Vec<(f64, Complex64)> = Vec::new();
    let (nr, ni) = (41usize, 21usize);
    for i in 0..=nr {
        for j in 1..=ni {
            let c = Complex64::new(
                re_lo + (re_hi - re_lo) * i as f64 / nr as f64,
                1e-3 + (im_hi - 1e-3) * j as f64 / ni as f64,
            );
            if let Ok(d) = dispersion(alpha, beta, c) {
                seeds.push((d.norm(), c));
            }
        }
    }
    seeds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    for &(_, seed) in seeds.iter().take(5) {
        match secant_root(alpha, beta, seed, box_r) {
            Ok(c) if c.im > 1e-9 && semicircle_slack(alpha.max(1e-9), beta, c) > -1e-6 => {
                return Ok(Some(mode_from_speed(alpha, beta, c, ModeKind::Unstable)?));
            }
            _ => continue,
        }
    }
    if alpha == 0.0 {
        // no root in the upper half box
        return Ok(None);
    }
    Err(Error::NoConvergence(100))
}

// ---------------------------------------------------------------------
// Neutral-mode census and index counts
// ---------------------------------------------------------------------

const CENSUS_TOL: f64 = 1e-7;

fn census_points(side: Side, fine: bool) -> Vec<f64> {
    let (base, sgn) = match side {
        Side::Left => (0.0, -1.0),
        Side::Right => (1.0, 1.0),
    };
    let mut cs: Vec<f64> = Vec::new();
    // half-decade ladder near the endpoint; quarter decades across the
    // 10^-3..10^-6 range where the hump hides, when this is the dip side
    let mut ks: Vec<f64> = (4..=14).map(|k| k as f64 / 2.0).collect();
    if fine {
        ks.extend((14..=22).map(|k| k as f64 / 4.0));
    }
    for t in ks {
        cs.push(base + sgn * 10f64.powf(-t));
    }
    for j in 1..64 {
        let ct = sgn * 2.0 * j as f64 / 64.0;
        cs.push(1.0 / ct + 0.5);
    }
    cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cs.dedup();
    cs
}

fn illinois<F: FnMut(f64) -> Result<f64>>(
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    mut fb: f64,
    ftol: f64,
    f: &mut F,
) -> Result<f64> {
    for _ in 0..80 {
        let m = b - fb * (b - a) / (fb - fa);
        let m = if m.is_finite() && m > a.min(b) && m < a.max(b) {
            m
        } else {
            0.5 * (a + b)
        };
        let fm = f(m)?;
        if fm.abs() < ftol || (b - a).abs() < 1e-10 * a.abs().max(b.abs()).max(1e-6) {
            return Ok(m);
        }
        if (fm > 0.0) == (fb > 0.0) {
            b = m;
            fb = fm;
            fa *= 0.5;
        } else {
            a = b;
            fa = fb;
            b = m;
            fb = fm;
        }
    }
    Ok(0.5 * (a + b))
}

/// All real non-resonant neutral speeds: roots of lambda_n(beta, c) =
/// -alpha^2 over c outside [0, 1], with the quadratic-form signature
/// sign(-(c - U_beta) dlambda_n/dc) of each.
pub fn neutral_nonresonant_census(alpha: f64, beta: f64) -> Result<Vec<CensusEntry>> {
    assert!(alpha > 0.0);
    let a2 = alpha * alpha;
    let ub = sinus_u_beta(beta);
    let in_class = beta.abs() <= pi2() / 2.0 + 1e-12;
    let mut entries: Vec<CensusEntry> = Vec::new();

    for side in [Side::Left, Side::Right] {
        let fine = match side {
            Side::Left => beta > 0.0,
            Side::Right => beta < 0.0,
        };
        let cs = census_points(side, fine);
        let mut n = 1usize;
        loop {
            // lambda_n + alpha^2 along the scan; drop points the ladder
            // cannot resolve rather than abort the whole census
            let mut samples: Vec<(f64, f64)> = Vec::new();
            let mut min_lam = f64::INFINITY;
            for &c in &cs {
                match lambda_n_at(beta, Speed::Finite(c), n, CENSUS_TOL) {
                    Ok(lam) => {
                        min_lam = min_lam.min(lam);
                        samples.push((c, lam + a2));
                    }
                    Err(Error::NoConvergence(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            for w in samples.windows(2) {
                let ((ca, fa), (cb, fb)) = (w[0], w[1]);
                if fa == 0.0 || fa.signum() == fb.signum() {
                    continue;
                }
                let root = illinois(ca, fa, cb, fb, 1e-8 * a2.max(1.0), &mut |c| {
                    Ok(lambda_n_at(beta, Speed::Finite(c), n, CENSUS_TOL)? + a2)
                })?;
                let prob = SlProblem::new(crate::profiles::sinus_profile(), beta, Speed::Finite(root));
                let pair = slsolver::eigenfunction(&prob, n, CENSUS_TOL)?;
                let dldc = slsolver::dlambda_dc(&pair, &prob);
                let sig_val = -(root - ub) * dldc;
                let signature = if sig_val.abs() < 1e-10 {
                    0
                } else if sig_val > 0.0 {
                    1
                } else {
                    -1
                };
                entries.push(CensusEntry {
                    c: root,
                    n,
                    signature,
                });
            }
            // lambda_2 > 0 > -alpha^2 whenever |beta| <= pi^2/2; beyond
            // that range higher n are swept until lambda_n stays positive
            if in_class || min_lam > 0.0 || n >= 4 {
                break;
            }
            n += 1;
        }
    }
    entries.sort_by(|a, b| a.c.partial_cmp(&b.c).unwrap());
    Ok(entries)
}

/// The index formula k_c + k_r + k_i^{<=0} = n^-(L_alpha) at one point.
pub fn index_counts(alpha: f64, beta: f64) -> Result<IndexCount> {
    assert!(alpha > 0.0);
    let (n_minus, _) = n_minus_l_alpha(alpha, beta);
    let k_unstable = count_unstable(alpha, beta)?;
    let census = neutral_nonresonant_census(alpha, beta)?;
    let mut k_i_nonpos = census.iter().filter(|e| e.signature <= 0).count();

    // singular neutral mode at c = 0 when alpha sits on the SNM curve;
    // its signature is sign(U_beta lambda'(0^-)), the +inf branch positive
    if beta > 0.0 && beta < pi2() / 2.0 {
        let g = closedform::gamma_exponent(beta)?;
        let snm_alpha = PI * (1.0 - g * g).sqrt();
        if (alpha - snm_alpha).abs() < 1e-9 {
            let nonpos = match closedform::dlambda1_dc_at_zero(beta)? {
                Extended::PlusInfinity => false,
                Extended::Finite(v) => sinus_u_beta(beta) * v <= 0.0,
            };
            if nonpos {
                k_i_nonpos += 1;
            }
        }
    }

    Ok(IndexCount {
        alpha,
        beta,
        n_minus,
        k_unstable,
        k_i_nonpos,
        holds: k_unstable + k_i_nonpos == n_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn morse_index_counts() {
        assert_eq!(n_minus_l_alpha(1.0, 0.0), (1, 0));
        assert_eq!(n_minus_l_alpha(3.0, 0.7), (0, 0));
        assert_eq!(n_minus_l_alpha(3.0f64.sqrt() * PI / 2.0, 0.0), (0, 1));
    }

    #[test]
    fn dispersion_regular_neutral() {
        // potential is identically pi^2 at c = U_beta; alpha^2 = 3 pi^2/4
        // makes phi = sin(pi (y+1)/2) an exact Dirichlet solution
        let alpha = 3.0f64.sqrt() * PI / 2.0;
        let d = dispersion(alpha, 0.0, Complex64::new(0.5, 0.0)).unwrap();
        assert!(d.norm() < 1e-8, "|D| = {}", d.norm());
    }

    #[test]
    fn dispersion_golden_value() {
        // frozen from a fixed-step RK4 oracle at h = 2^-14
        let d = dispersion(1.0, 0.0, Complex64::new(0.5, 0.5)).unwrap();
        let gold = Complex64::new(0.5622223749323858, -1.844535555782428);
        assert!(
            (d - gold).norm() < 1e-9,
            "D = {d}, expected {gold}"
        );
    }

    #[test]
    fn dispersion_vanishes_on_snm_curve() {
        // gamma = sqrt(3)/2: alpha = pi/2, beta = beta_+, c = 0
        let d = dispersion(PI / 2.0, closedform::beta_plus(), Complex64::new(0.0, 0.0)).unwrap();
        assert!(d.norm() < 1e-6, "|D(0)| = {}", d.norm());
    }

    #[test]
    fn dispersion_rejects_interior_real_speed() {
        assert!(matches!(
            dispersion(1.0, 0.3, Complex64::new(0.4, 0.0)),
            Err(Error::InvalidSpeed(_))
        ));
    }

    #[test]
    fn winding_counts() {
        let a_mid = (0.5 * 3.0 * pi2() / 4.0).sqrt();
        assert_eq!(count_unstable(a_mid, 0.0).unwrap(), 1);
        assert_eq!(count_unstable(3.0, 0.3 * pi2()).unwrap(), 0);
    }

    #[test]
    fn unstable_mode_at_alpha_one() {
        let mode = find_unstable_mode(1.0, 0.0).unwrap().expect("mode");
        // frozen from an independent python RK4 + secant oracle
        let gold = Complex64::new(0.19784749492925144, 0.13508828494741584);
        assert!(
            (mode.c - gold).norm() < 1e-7,
            "c = {}, expected {gold}",
            mode.c
        );
        let r = &mode.residuals;
        assert!(r.ode < 1e-8, "ode {}", r.ode);
        assert!(r.identity2.abs() < 1e-6, "identity2 {}", r.identity2);
        assert!(r.identity1.abs() < 1e-6, "identity1 {}", r.identity1);
        assert!(r.h1_slack > -1e-8, "h1 {}", r.h1_slack);
        assert!(r.h2_slack > -1e-8, "h2 {}", r.h2_slack);
        assert!(r.lform < 1e-5, "lform {}", r.lform);
        assert!(semicircle_slack(1.0, 0.0, mode.c) > -1e-8);
        // quadratic form vanishes on unstable modes
        let qf = quadratic_form(&mode);
        assert!(qf.via_identity.abs() < 1e-5, "{qf:?}");
        assert!(qf.via_definition.abs() < 1e-3, "{qf:?}");
    }

    #[test]
    fn quadratic_form_regular_neutral() {
        let alpha = 3.0f64.sqrt() * PI / 2.0;
        let mode =
            mode_from_speed(alpha, 0.0, Complex64::new(0.5, 0.0), ModeKind::RegularNeutral)
                .unwrap();
        let qf = quadratic_form(&mode);
        assert!(qf.via_identity.abs() < 1e-10, "{qf:?}");
        assert!(qf.via_definition.abs() < 1e-5, "{qf:?}");
    }

    #[test]
    fn boundary_zero_case() {
        let bp = capital_lambda(-0.2 * pi2(), 1e-7).unwrap();
        assert_eq!(bp.case, BoundaryCase::Zero);
        assert_eq!(bp.capital_lambda, 0.0);
        assert_eq!(bp.alpha_lower, 0.0);
        assert!(bp.snm_alpha.is_nan());
    }

    #[test]
    fn boundary_hump_case() {
        // beta = 0.25 pi^2 > beta_+ = (sqrt(3)-1) pi^2/4
        let bp = capital_lambda(0.25 * pi2(), 1e-7).unwrap();
        assert_eq!(bp.case, BoundaryCase::InteriorHump);
        assert!(bp.c_star < 0.0 && bp.c_star > -1e-2, "c* = {}", bp.c_star);
        assert!(bp.alpha_lower > bp.snm_alpha, "{bp:?}");
        assert!(bp.alpha_lower < 3.0f64.sqrt() * PI / 2.0);
    }

    #[test]
    fn boundary_endpoint_case() {
        let bp = capital_lambda(0.1 * pi2(), 1e-7).unwrap();
        assert_eq!(bp.case, BoundaryCase::EndpointMonotone);
        assert_eq!(bp.c_star, 0.0);
        // Lambda = lambda_beta^-(0), the closed-form endpoint value
        let end = closedform::lambda_minus_at_endpoints(0.1 * pi2()).at0;
        assert_relative_eq!(bp.capital_lambda, end, max_relative = 1e-12);
        assert_relative_eq!(bp.alpha_lower, bp.snm_alpha, max_relative = 1e-12);
    }

    #[test]
    fn profile_shapes() {
        // beta = 0: lambda_1 > 0 all along [1, inf)
        let prof = lambda_beta_profile(0.0, Side::Right, 64).unwrap();
        assert!(prof.iter().all(|&(_, l)| l > 0.0), "{prof:?}");
        // beta = -pi^2/2: lambda_1 increasing in c on (1, inf), inf at c -> 1
        let prof = lambda_beta_profile(-pi2() / 2.0, Side::Right, 64).unwrap();
        let finite: Vec<_> = prof.iter().filter(|p| p.0.is_finite()).collect();
        for w in finite.windows(2) {
            assert!(
                w[1].1 >= w[0].1 - 1e-6,
                "not monotone at c = {}: {} vs {}",
                w[1].0,
                w[0].1,
                w[1].1
            );
        }
        assert_relative_eq!(finite[0].1, -0.75 * pi2(), max_relative = 1e-9);
    }

    #[test]
    fn census_region_three() {
        // below the endpoint value: a single crossing with c < 0
        let beta = 0.3 * pi2();
        let end = closedform::lambda_minus_at_endpoints(beta).at0;
        let alpha = (0.5 * end).sqrt();
        let census = neutral_nonresonant_census(alpha, beta).unwrap();
        assert_eq!(census.len(), 1, "{census:?}");
        assert!(census[0].c < 0.0);
        assert_eq!(census[0].n, 1);
    }

    #[test]
    fn index_count_trivial() {
        let ic = index_counts(3.0, 0.2 * pi2()).unwrap();
        assert_eq!(
            (ic.n_minus, ic.k_unstable, ic.k_i_nonpos, ic.holds),
            (0, 0, 0, true)
        );
    }

    #[test]
    fn index_count_unstable_cell() {
        let alpha = (0.9 * 3.0 * pi2() / 4.0).sqrt();
        let ic = index_counts(alpha, 0.0).unwrap();
        assert_eq!(
            (ic.n_minus, ic.k_unstable, ic.k_i_nonpos, ic.holds),
            (1, 1, 0, true)
        );
    }
}
