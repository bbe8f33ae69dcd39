//! Verification suites: each one re-checks a family of library
//! invariants and reports per-check pass/fail lines.

use kuo_stab_core::specfun::{self, Extended};
use kuo_stab_core::{
    closedform, eigenvalues, find_unstable_mode, index_counts, semicircle_slack, sinus_profile,
    SlProblem, Speed,
};
use std::f64::consts::PI;

pub struct SuiteReport {
    pub details: Vec<String>,
    pub passed: usize,
    pub failed: usize,
}

impl SuiteReport {
    fn new() -> Self {
        SuiteReport {
            details: Vec::new(),
            passed: 0,
            failed: 0,
        }
    }

    fn check(&mut self, name: &str, ok: bool, detail: &str) {
        if ok {
            self.passed += 1;
            self.details.push(format!("{name}: ok"));
        } else {
            self.failed += 1;
            self.details.push(format!("{name}: FAIL ({detail})"));
        }
    }

    fn merge(&mut self, other: SuiteReport) {
        self.passed += other.passed;
        self.failed += other.failed;
        self.details.extend(other.details);
    }
}

fn pi2() -> f64 {
    PI * PI
}

pub const SUITES: &[&str] = &["closedform", "identities", "index", "slsolver", "specfun"];

pub fn run_suite(name: &str, grid: (usize, usize), tol: f64) -> Option<SuiteReport> {
    match name {
        "specfun" => Some(suite_specfun()),
        "closedform" => Some(suite_closedform()),
        "slsolver" => Some(suite_slsolver(tol)),
        "identities" => Some(suite_identities()),
        "index" => Some(suite_index(grid)),
        "all" => {
            let mut rep = SuiteReport::new();
            for s in SUITES {
                rep.merge(run_suite(s, grid, tol).expect("known suite"));
            }
            Some(rep)
        }
        _ => None,
    }
}

fn suite_specfun() -> SuiteReport {
    let mut rep = SuiteReport::new();

    let v = specfun::ln_gamma(1.0).unwrap();
    rep.check("ln_gamma(1) = 0", v.abs() < 1e-13, &format!("{v}"));
    let v = specfun::ln_gamma(0.5).unwrap();
    let want = (PI.sqrt()).ln();
    rep.check(
        "ln_gamma(1/2) = ln sqrt(pi)",
        (v - want).abs() < 1e-13,
        &format!("{v} vs {want}"),
    );
    // recurrence Gamma(x+1) = x Gamma(x)
    let x = 3.7f64;
    let lhs = specfun::ln_gamma(x + 1.0).unwrap();
    let rhs = specfun::ln_gamma(x).unwrap() + x.ln();
    rep.check(
        "gamma recurrence",
        (lhs - rhs).abs() < 1e-12,
        &format!("{lhs} vs {rhs}"),
    );
    // 2F1(1, 1; 2; z) = -ln(1 - z)/z
    let z = 0.37f64;
    let v = specfun::hyp2f1(specfun::HypArgs {
        a: 1.0,
        b: 1.0,
        c: 2.0,
        z,
    })
    .unwrap();
    let want = -(1.0 - z).ln() / z;
    rep.check(
        "2F1 log identity",
        (v - want).abs() < 1e-12,
        &format!("{v} vs {want}"),
    );
    let v = specfun::cos_power_integral(2.0).unwrap_finite();
    rep.check(
        "cos-power integral s = 2",
        (v - 1.0).abs() < 1e-13,
        &format!("{v}"),
    );
    rep
}

fn suite_closedform() -> SuiteReport {
    let mut rep = SuiteReport::new();

    let v = closedform::lambda_regular(1);
    rep.check(
        "lambda_1 at regular speed",
        (v + 0.75 * pi2()).abs() < 1e-14,
        &format!("{v}"),
    );
    let v = closedform::lambda_infinity(2);
    rep.check(
        "lambda_2 at infinite speed",
        (v - pi2()).abs() < 1e-14,
        &format!("{v}"),
    );
    let v = closedform::gamma_exponent(0.0).unwrap();
    rep.check("gamma(0) = 1", (v - 1.0).abs() < 1e-14, &format!("{v}"));
    let bp = closedform::beta_plus();
    let want = (3.0f64.sqrt() - 1.0) * pi2() / 4.0;
    rep.check("beta_plus value", (bp - want).abs() < 1e-14, &format!("{bp}"));
    // SNM curve point gamma = 1/2 and its endpoint eigenvalue
    let (c, alpha, beta) = closedform::snm_curve(0.75).unwrap();
    let end = closedform::lambda_minus_at_endpoints(beta).at0;
    rep.check(
        "SNM alpha^2 matches the endpoint value",
        c == 0.0 && (alpha * alpha - end).abs() < 1e-12,
        &format!("{} vs {end}", alpha * alpha),
    );
    // derivative sign pattern of lambda_1'(0-) across (0, pi^2/2)
    let pattern = [
        (0.10 * pi2(), -1i8),
        (closedform::beta_plus(), -1),
        (0.25 * pi2(), 1),
        (0.3125 * pi2(), 2),
        (0.45 * pi2(), 2),
    ];
    for (beta, want) in pattern {
        let v = closedform::dlambda1_dc_at_zero(beta).unwrap();
        let got = match v {
            Extended::PlusInfinity => 2i8,
            Extended::Finite(x) if x > 0.0 => 1,
            Extended::Finite(_) => -1,
        };
        rep.check(
            &format!("lambda_1'(0-) sign at beta = {beta:.4}"),
            got == want,
            &format!("{v:?}"),
        );
    }
    rep
}

fn suite_slsolver(tol: f64) -> SuiteReport {
    let mut rep = SuiteReport::new();
    let profile = sinus_profile();
    let tol = tol.min(1e-8);

    for &beta in &[0.0, 1.3] {
        let ub = profile.u_beta(beta).unwrap();
        let prob = SlProblem::new(profile.clone(), beta, Speed::Finite(ub));
        let lams = eigenvalues(&prob, 3, tol).unwrap();
        for (i, &lam) in lams.iter().enumerate() {
            let n = (i + 1) as f64;
            let want = (n * n / 4.0 - 1.0) * pi2();
            rep.check(
                &format!("regular-speed lambda_{} at beta = {beta}", i + 1),
                (lam - want).abs() < 1e-8 * want.abs().max(1.0),
                &format!("{lam} vs {want}"),
            );
        }
    }
    for &ct in &[1e-6, -1e-6] {
        let prob = SlProblem::new(profile.clone(), 0.4, Speed::Compactified(ct));
        let lams = eigenvalues(&prob, 3, tol).unwrap();
        for (i, &lam) in lams.iter().enumerate() {
            let n = (i + 1) as f64;
            let want = n * n * pi2() / 4.0;
            rep.check(
                &format!("near-infinite-speed lambda_{} at ctilde = {ct}", i + 1),
                (lam - want).abs() < 1e-8 * want.abs().max(1.0),
                &format!("{lam} vs {want}"),
            );
        }
    }
    // strict ordering away from closed-form speeds
    let prob = SlProblem::new(profile, 0.2 * pi2(), Speed::Finite(-0.4));
    let lams = eigenvalues(&prob, 4, tol).unwrap();
    rep.check(
        "eigenvalue ordering",
        lams.windows(2).all(|w| w[0] < w[1]),
        &format!("{lams:?}"),
    );
    rep
}

fn suite_identities() -> SuiteReport {
    let mut rep = SuiteReport::new();
    let cells = [
        ((0.5 * 3.0 * pi2() / 4.0).sqrt(), 0.0),
        ((0.5 * 3.0 * pi2() / 4.0).sqrt(), 0.1 * pi2()),
    ];
    for (alpha, beta) in cells {
        let tag = format!("(alpha = {alpha:.4}, beta = {beta:.4})");
        match find_unstable_mode(alpha, beta) {
            Ok(Some(mode)) => {
                let r = &mode.residuals;
                rep.check(
                    &format!("Pedlosky identity at {tag}"),
                    r.identity2.abs() < 1e-6,
                    &format!("{}", r.identity2),
                );
                rep.check(
                    &format!("q-shifted identity at {tag}"),
                    r.identity1.abs() < 1e-6,
                    &format!("{}", r.identity1),
                );
                rep.check(
                    &format!("H1 bound at {tag}"),
                    r.h1_slack > -1e-8,
                    &format!("{}", r.h1_slack),
                );
                rep.check(
                    &format!("H2 bound at {tag}"),
                    r.h2_slack > -1e-8,
                    &format!("{}", r.h2_slack),
                );
                rep.check(
                    &format!("energy form vanishes at {tag}"),
                    r.lform < 1e-5,
                    &format!("{}", r.lform),
                );
                rep.check(
                    &format!("semicircle bound at {tag}"),
                    semicircle_slack(alpha, beta, mode.c) > -1e-8,
                    &format!("{}", semicircle_slack(alpha, beta, mode.c)),
                );
            }
            Ok(None) => rep.check(&format!("unstable mode exists at {tag}"), false, "none found"),
            Err(e) => rep.check(&format!("unstable mode exists at {tag}"), false, &e.to_string()),
        }
    }
    rep
}

fn suite_index(grid: (usize, usize)) -> SuiteReport {
    let mut rep = SuiteReport::new();
    let (nb, na) = grid;
    let mut ambiguous = 0usize;
    for i in 0..nb {
        let beta = (-0.45 + 0.9 * i as f64 / (nb - 1).max(1) as f64) * pi2();
        for j in 0..na {
            let frac = 0.15 + 0.8 * j as f64 / (na - 1).max(1) as f64;
            let alpha = (frac * 3.0 * pi2() / 4.0).sqrt();
            match index_counts(alpha, beta) {
                Ok(ic) => rep.check(
                    &format!("index formula at (alpha = {alpha:.4}, beta = {beta:.4})"),
                    ic.holds,
                    &format!(
                        "n- = {}, k_unstable = {}, k_i<=0 = {}",
                        ic.n_minus, ic.k_unstable, ic.k_i_nonpos
                    ),
                ),
                Err(_) => ambiguous += 1,
            }
        }
    }
    rep.details
        .push(format!("index grid: {ambiguous} ambiguous cells skipped"));
    rep
}
