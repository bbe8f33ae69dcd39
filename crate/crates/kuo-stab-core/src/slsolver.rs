//! Finite-difference solver for the regular Sturm-Liouville problem
//!
//!   -phi'' - (beta - U'')/(U - c) phi = lambda phi,  phi(y1) = phi(y2) = 0,
//!
//! for real speeds c outside the open range of U (or the removable case
//! c = U_beta). Second-order central differences on a uniform grid give a
//! symmetric tridiagonal matrix; eigenvalues are located by Sturm-sequence
//! bisection and refined by Richardson extrapolation over grid doubling.

use crate::error::{Error, Result};
use crate::profiles::FlowProfile;

/// Phase speed of an SL problem: finite, compactified (ct = 1/(c - mid)
/// with mid the midpoint of Ran(U)), or at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Speed {
    Finite(f64),
    Compactified(f64),
    Infinity,
}

/// A resolved speed: compactification already undone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolvedSpeed {
    Finite(f64),
    Infinity,
}

/// A (profile, beta, speed) triple defining the operator
/// -d^2/dy^2 - (beta - U'')/(U - c).
#[derive(Debug, Clone)]
pub struct SlProblem {
    pub profile: FlowProfile,
    pub beta: f64,
    pub speed: Speed,
}

/// One converged eigenvalue/eigenfunction with diagnostics.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub n: usize,
    pub lambda: f64,
    pub grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub nodes: usize,
    pub converged: bool,
    pub est_error: f64,
}

const N_START: usize = 4096;
const N_CAP: usize = 1 << 22;
const REMOVABLE_TOL: f64 = 1e-12;

impl SlProblem {
    pub fn new(profile: FlowProfile, beta: f64, speed: Speed) -> Self {
        SlProblem {
            profile,
            beta,
            speed,
        }
    }

    pub fn resolved_speed(&self) -> ResolvedSpeed {
        match self.speed {
            Speed::Finite(c) => ResolvedSpeed::Finite(c),
            Speed::Infinity => ResolvedSpeed::Infinity,
            Speed::Compactified(ct) => {
                // below this the finite-speed correction to the spectrum,
                // (beta + pi^2/4)/|c|, is under the advertised closed-form
                // accuracy of the infinite-speed limit
                if ct.abs() < 1e-5 {
                    ResolvedSpeed::Infinity
                } else {
                    let mid = 0.5 * (self.profile.u_min + self.profile.u_max);
                    ResolvedSpeed::Finite(1.0 / ct + mid)
                }
            }
        }
    }

    /// True when the speed coincides with U_beta (removable potential).
    fn removable_speed(&self) -> Option<f64> {
        if let ResolvedSpeed::Finite(c) = self.resolved_speed() {
            if let Ok(ub) = self.profile.u_beta(self.beta) {
                if (c - ub).abs() < REMOVABLE_TOL {
                    return Some(ub);
                }
            }
        }
        None
    }

    fn validate(&self) -> Result<()> {
        if let ResolvedSpeed::Finite(c) = self.resolved_speed() {
            if c > self.profile.u_min && c < self.profile.u_max && self.removable_speed().is_none()
            {
                return Err(Error::InvalidSpeed(c));
            }
        }
        Ok(())
    }

    /// The potential q(y) = (beta - U'')/(U - c); K_beta in the removable
    /// case, zero at infinite speed.
    pub fn potential(&self, y: f64) -> f64 {
        match self.resolved_speed() {
            ResolvedSpeed::Infinity => 0.0,
            ResolvedSpeed::Finite(c) => {
                if self.removable_speed().is_some() {
                    self.profile
                        .k_beta(self.beta, y)
                        .expect("removable case implies beta in Ran(U'')")
                } else {
                    (self.beta - self.profile.d2u(y)) / (self.profile.u(y) - c)
                }
            }
        }
    }
}

/// Potential samples at the interior points of an n_grid-interval uniform
/// grid. When doubling, even-index samples are copied from the parent grid.
fn assemble(problem: &SlProblem, n_grid: usize, parent: Option<&[f64]>) -> Vec<f64> {
    let (y1, y2) = (problem.profile.y1, problem.profile.y2);
    let h = (y2 - y1) / n_grid as f64;
    let m = n_grid - 1;
    let mut q = vec![0.0; m];
    match parent {
        Some(p) if p.len() == n_grid / 2 - 1 => {
            for (i, qi) in q.iter_mut().enumerate() {
                let j = i + 1;
                if j % 2 == 0 {
                    *qi = p[j / 2 - 1];
                } else {
                    *qi = problem.potential(y1 + j as f64 * h);
                }
            }
        }
        _ => {
            for (i, qi) in q.iter_mut().enumerate() {
                *qi = problem.potential(y1 + (i + 1) as f64 * h);
            }
        }
    }
    q
}

/// Number of eigenvalues of the tridiagonal matrix (diag 2/h^2 - q_i,
/// off-diagonal -1/h^2) strictly below x, by the Sturm LDL^T recurrence.
fn sturm_count(q: &[f64], h: f64, x: f64) -> usize {
    let inv_h2 = 1.0 / (h * h);
    let off2 = inv_h2 * inv_h2;
    let pivmin = 1e-280;
    let mut count = 0usize;
    let mut p = 2.0 * inv_h2 - q[0] - x;
    if p < 0.0 {
        count += 1;
    }
    if p.abs() < pivmin {
        p = -pivmin;
    }
    for &qi in &q[1..] {
        p = (2.0 * inv_h2 - qi - x) - off2 / p;
        if p < 0.0 {
            count += 1;
        }
        if p.abs() < pivmin {
            p = -pivmin;
        }
    }
    count
}

/// Bisection for the n-th (1-based) eigenvalue, optionally warm-started
/// around a previous estimate.
fn bisect_eigenvalue(q: &[f64], h: f64, n: usize, warm: Option<f64>) -> f64 {
    let inv_h2 = 1.0 / (h * h);
    let q_min = q.iter().cloned().fold(f64::INFINITY, f64::min);
    let q_max = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let glob_lo = -q_max; // Gershgorin: d_i - 2|e| = -q_i
    let glob_hi = 4.0 * inv_h2 - q_min;

    let (mut lo, mut hi) = match warm {
        Some(w) => {
            let mut half = (0.05 * w.abs()).max(0.5);
            let mut lo = w - half;
            let mut hi = w + half;
            // expand until the bracket is certified
            loop {
                let ok_lo = lo <= glob_lo || sturm_count(q, h, lo) < n;
                let ok_hi = hi >= glob_hi || sturm_count(q, h, hi) >= n;
                if ok_lo && ok_hi {
                    break;
                }
                half *= 4.0;
                if !ok_lo {
                    lo = (w - half).max(glob_lo);
                }
                if !ok_hi {
                    hi = (w + half).min(glob_hi);
                }
                if half > (glob_hi - glob_lo) {
                    lo = glob_lo;
                    hi = glob_hi;
                    break;
                }
            }
            (lo.max(glob_lo), hi.min(glob_hi))
        }
        None => (glob_lo, glob_hi),
    };

    while hi - lo > 1e-12 * hi.abs().max(lo.abs()).max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(q, h, mid) >= n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Internal result of the grid-doubling ladder.
pub(crate) struct LadderSolution {
    pub lambdas: Vec<f64>,
    pub raw: Vec<f64>,
    pub est_errors: Vec<f64>,
    pub q: Vec<f64>,
    pub h: f64,
    pub converged: bool,
}

// Worst extrapolated-error estimate still accepted when the ladder
// stalls on the f64 rounding floor of the Sturm bisection.
const ROUNDING_ACCEPT: f64 = 1e-7;

pub(crate) fn solve_ladder(problem: &SlProblem, n_max: usize, tol: f64) -> Result<LadderSolution> {
    assert!(n_max >= 1 && tol > 0.0);
    problem.validate()?;
    let span = problem.profile.y2 - problem.profile.y1;

    let mut n_grid = N_START;
    let mut q = assemble(problem, n_grid, None);
    let mut h = span / n_grid as f64;
    let mut prev: Vec<f64> = (1..=n_max).map(|n| bisect_eigenvalue(&q, h, n, None)).collect();

    let mut best: Option<LadderSolution> = None;
    let mut best_worst = f64::INFINITY;

    loop {
        let n2 = n_grid * 2;
        if n2 > N_CAP {
            break;
        }
        q = assemble(problem, n2, Some(&q));
        h = span / n2 as f64;
        let cur: Vec<f64> = prev
            .iter()
            .enumerate()
            .map(|(i, &w)| bisect_eigenvalue(&q, h, i + 1, Some(w)))
            .collect();
        let rels: Vec<f64> = cur
            .iter()
            .zip(&prev)
            .map(|(&c, &p)| (c - p).abs() / p.abs().max(1.0))
            .collect();
        let worst = rels.iter().cloned().fold(0.0f64, f64::max);
        n_grid = n2;

        if worst < best_worst {
            best_worst = worst;
            let lambdas: Vec<f64> = cur
                .iter()
                .zip(&prev)
                .map(|(&c, &p)| (4.0 * c - p) / 3.0)
                .collect();
            let est_errors: Vec<f64> = rels.iter().map(|r| r / 3.0).collect();
            best = Some(LadderSolution {
                lambdas,
                raw: cur.clone(),
                est_errors,
                q: q.clone(),
                h,
                converged: true,
            });
        }

        // the Richardson estimate of the extrapolated error is worst / 3
        if worst / 3.0 < tol {
            return Ok(best.expect("just stored"));
        }
        // consecutive diffs growing again: rounding noise dominates and
        // finer grids cannot improve the answer
        if worst > 4.0 * best_worst {
            break;
        }
        prev = cur;
    }

    match best {
        Some(mut sol) if best_worst / 3.0 < ROUNDING_ACCEPT => {
            sol.converged = best_worst / 3.0 < tol;
            Ok(sol)
        }
        _ => Err(Error::NoConvergence(n_grid)),
    }
}

/// First n_max eigenvalues, strictly increasing, Richardson extrapolated.
pub fn eigenvalues(problem: &SlProblem, n_max: usize, tol: f64) -> Result<Vec<f64>> {
    Ok(solve_ladder(problem, n_max, tol)?.lambdas)
}

/// Eigenvalues together with their extrapolation error estimates.
pub fn eigenvalues_with_errors(
    problem: &SlProblem,
    n_max: usize,
    tol: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let sol = solve_ladder(problem, n_max, tol)?;
    Ok((sol.lambdas, sol.est_errors))
}

/// Solve (T - sigma) x = b for the tridiagonal T (diag 2/h^2 - q_i, off
/// -1/h^2) by the Thomas algorithm with a pivot floor.
fn shifted_solve(q: &[f64], h: f64, sigma: f64, b: &[f64]) -> Vec<f64> {
    let m = q.len();
    let inv_h2 = 1.0 / (h * h);
    let e = -inv_h2;
    let mut cp = vec![0.0; m];
    let mut x = vec![0.0; m];
    let floor = 1e-30 * inv_h2;
    let mut denom = 2.0 * inv_h2 - q[0] - sigma;
    if denom.abs() < floor {
        denom = floor;
    }
    cp[0] = e / denom;
    x[0] = b[0] / denom;
    for i in 1..m {
        let mut den = (2.0 * inv_h2 - q[i] - sigma) - e * cp[i - 1];
        if den.abs() < floor {
            den = floor;
        }
        cp[i] = e / den;
        x[i] = (b[i] - e * x[i - 1]) / den;
    }
    for i in (0..m - 1).rev() {
        x[i] -= cp[i] * x[i + 1];
    }
    x
}

fn count_interior_nodes(phi: &[f64]) -> usize {
    let max = phi.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let floor = 1e-8 * max;
    let mut nodes = 0usize;
    let mut last = 0.0f64;
    for &v in phi {
        if v.abs() < floor {
            continue;
        }
        let s = v.signum();
        if last != 0.0 && s != last {
            nodes += 1;
        }
        last = s;
    }
    nodes
}

/// The n-th eigenpair: inverse iteration on the converged tridiagonal
/// system, trapezoid L2-normalized, sign fixed so phi'(y1) > 0.
pub fn eigenfunction(problem: &SlProblem, n: usize, tol: f64) -> Result<EigenPair> {
    let ladder = solve_ladder(problem, n, tol)?;
    let sigma = ladder.raw[n - 1];
    let m = ladder.q.len();
    let h = ladder.h;

    let mut x = vec![1.0; m];
    for _ in 0..3 {
        x = shifted_solve(&ladder.q, h, sigma, &x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut x {
            *v /= norm;
        }
    }

    let nodes = count_interior_nodes(&x);
    if nodes != n - 1 {
        return Err(Error::NodeCountMismatch {
            expected: n - 1,
            found: nodes,
        });
    }

    // L2 normalization by the trapezoid rule (boundary values are zero)
    let l2 = (h * x.iter().map(|v| v * v).sum::<f64>()).sqrt();
    for v in &mut x {
        *v /= l2;
    }
    // sign: phi rises from the left wall
    let max = x.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-3 * max) {
        if *first < 0.0 {
            for v in &mut x {
                *v = -*v;
            }
        }
    }

    let y1 = problem.profile.y1;
    let mut grid = Vec::with_capacity(m + 2);
    let mut phi = Vec::with_capacity(m + 2);
    grid.push(y1);
    phi.push(0.0);
    for (i, &v) in x.iter().enumerate() {
        grid.push(y1 + (i + 1) as f64 * h);
        phi.push(v);
    }
    grid.push(problem.profile.y2);
    phi.push(0.0);

    Ok(EigenPair {
        n,
        lambda: ladder.lambdas[n - 1],
        grid,
        phi,
        nodes,
        converged: ladder.converged,
        est_error: ladder.est_errors[n - 1],
    })
}

fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..grid.len() {
        acc += 0.5 * (grid[i] - grid[i - 1]) * (values[i] + values[i - 1]);
    }
    acc
}

/// d lambda_n / d beta = -int 1/(U - c) |phi_n|^2 dy.
pub fn dlambda_dbeta(pair: &EigenPair, problem: &SlProblem) -> f64 {
    match problem.resolved_speed() {
        ResolvedSpeed::Infinity => 0.0,
        ResolvedSpeed::Finite(c) => {
            let vals: Vec<f64> = pair
                .grid
                .iter()
                .zip(&pair.phi)
                .map(|(&y, &p)| -p * p / (problem.profile.u(y) - c))
                .collect();
            trapezoid(&pair.grid, &vals)
        }
    }
}

/// d lambda_n / d c = -int (beta - U'')/(U - c)^2 |phi_n|^2 dy.
pub fn dlambda_dc(pair: &EigenPair, problem: &SlProblem) -> f64 {
    match problem.resolved_speed() {
        ResolvedSpeed::Infinity => 0.0,
        ResolvedSpeed::Finite(c) => {
            let vals: Vec<f64> = pair
                .grid
                .iter()
                .zip(&pair.phi)
                .map(|(&y, &p)| {
                    let d = problem.profile.u(y) - c;
                    -(problem.beta - problem.profile.d2u(y)) / (d * d) * p * p
                })
                .collect();
            trapezoid(&pair.grid, &vals)
        }
    }
}
