//! The acceptance checks, shared by the integration test target and the
//! `selftest` subcommand.
//!
//! Every tolerance is a named constant below; a check reports PASS or FAIL
//! with enough detail to see how close it came.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::capacity::{ball_density, profile_power_decay};
use crate::capacity::{radial_capacity, radial_capacity_oracle, CapacityProfile, Condenser, ProfileGeometry};
use crate::error::Result;
use crate::exponents::{
    self, beta_excess_of_alpha, duality_record, ln_q_of_excess, rel_diff, solve_alpha_bar, solve_p1, wiener_exponent,
};
use crate::onedim::best_constant_search;
use crate::sharpness::{
    iterated_sharpness_check, run_sharpness, summarize, IteratedVerdict, SharpnessConfig, SharpnessRun,
};
use crate::wiener::{classify_with_exponent, potential_lower_bound, ClassifierConfig, Verdict};

pub const IDENTITY_REL_TOL: f64 = 1e-8;
pub const IDENTITY_MAX_SECS: f64 = 5.0;
pub const CLOSED_FORM_ABS_TOL: f64 = 1e-10;
pub const CLOSED_FORM_SAMPLES: usize = 1000;
pub const ONEDIM_GRID: usize = 400;
pub const ONEDIM_ABS_TOL: f64 = 1e-3;
pub const ONEDIM_MAX_SECS: f64 = 30.0;
pub const ORACLE_POINTS: usize = 10_000;
pub const ORACLE_REL_TOL: f64 = 5e-3;
pub const ORACLE_MAX_SECS: f64 = 10.0;
pub const CAP_RATIO_SPREAD: f64 = 2.0;
pub const SLOPE_REL_TOL: f64 = 0.02;
pub const SLOPE_MAX_SECS: f64 = 5.0;
pub const FLIP_REL_OFFSET: f64 = 1e-6;
pub const CLASSIFIER_TERMS: usize = 100_000;
pub const RECURSION_ABS_TOL: f64 = 1e-12;
pub const RECURSION_PROFILES: usize = 1000;
pub const RECURSION_SEED: u64 = 0x5eed_cafe;
pub const CLASSICAL_Q_OFFSET: f64 = 1e-8;
pub const CLASSICAL_ABS_TOL: f64 = 1e-6;

/// Sharpness configurations `(Q, p, n)` used by the slope and flip checks.
pub const SHARPNESS_MATRIX: [(f64, f64, u32); 7] = [
    (4.0 / 3.0, 2.0, 3),
    (4.0 / 3.0, 2.0, 4),
    (2.0, 2.0, 3),
    (2.0, 2.0, 4),
    (16.0 / 7.0, 2.0, 3),
    (16.0 / 7.0, 2.0, 4),
    (2.0, 2.5, 4),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {} ({:.3} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            self.detail
        )
    }
}

fn timed(id: u8, title: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CriterionOutcome {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionOutcome {
        id,
        title,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| match i {
            0 => lo,
            _ if i == count - 1 => hi,
            _ => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

/// `Q` log-spaced on `[1, 1e3]`.
pub fn identity_q_grid() -> Vec<f64> {
    log_grid(1.0, 1e3, 50)
}

/// `p = 1 + s` with `s` log-spaced on `[0.02, 9]`.
pub fn identity_p_grid() -> Vec<f64> {
    log_grid(0.02, 9.0, 50).into_iter().map(|s| 1.0 + s).collect()
}

/// Worst relative residual of the exponent identities at `(Q, p)`.
pub fn identity_residual(q: f64, p: f64) -> Result<f64> {
    let rec = duality_record(q, p)?;
    let pd = rec.p_dual;
    let ln_q_dual = q.ln() / (p - 1.0);
    let mut worst: f64 = rec.cross_residuals().into_iter().fold(0.0, f64::max);
    for alpha in [rec.alpha_lower, rec.alpha_bar] {
        // a log difference is the relative error of the underlying quantity
        let back = ln_q_of_excess(beta_excess_of_alpha(alpha, p)?, pd)?;
        worst = worst.max((back - ln_q_dual).abs());
    }
    worst = worst.max(rel_diff(rec.inverse_delta_threshold(), rec.alpha_bar / (p - 1.0)));
    if q > 1.0 {
        let t = q.powf(1.0 / p);
        worst = worst.max(rel_diff(solve_p1(p, t)?, 1.0 / (1.0 - rec.alpha_lower)));
        worst = worst.max(rel_diff(solve_p1(pd, t)?, 1.0 / (1.0 - rec.beta_lower)));
    }
    Ok(worst)
}

pub fn criterion_identities() -> CriterionOutcome {
    timed(1, "exponent identities on the 50x50 grid", || {
        let start = Instant::now();
        let ps = identity_p_grid();
        let rows = crate::par::map(&identity_q_grid(), |&q| {
            ps.iter()
                .map(|&p| identity_residual(q, p).map(|r| (r, q, p)))
                .collect::<Result<Vec<_>>>()
        });
        let mut worst = (0.0, 1.0, 2.0);
        for row in rows {
            for cell in row? {
                if cell.0 > worst.0 || cell.0.is_nan() {
                    worst = cell;
                }
            }
        }
        let secs = start.elapsed().as_secs_f64();
        Ok((
            worst.0 < IDENTITY_REL_TOL && secs < IDENTITY_MAX_SECS,
            format!(
                "max rel err {:.2e} at Q = {:.4}, p = {:.4} (tol {IDENTITY_REL_TOL:e}); {secs:.2} s (limit {IDENTITY_MAX_SECS} s)",
                worst.0, worst.1, worst.2
            ),
        ))
    })
}

/// `Q^{1/(p-1)} <= alpha_bar < (pQ)^{1/(p-1)}`, compared in logs.
///
/// For `p` near 1 and large `alpha_bar` the true gap below the upper bound,
/// `-ln(1 - (p-1)/(p alpha_bar))/(p-1)`, is smaller than the conditioning
/// of `ln alpha_bar` itself (rounding in `g` amplified by `1/(p-1)`). Strict
/// inequality is demanded wherever the gap exceeds that error; elsewhere the
/// comparison allows the error.
fn bounds_hold(q: f64, p: f64) -> Result<bool> {
    let w = solve_alpha_bar(q, p)?.ln();
    let ln_q = q.ln();
    let (ln_lo, ln_hi) = (ln_q / (p - 1.0), (p.ln() + ln_q) / (p - 1.0));
    let err = 8.0 * f64::EPSILON * (p * w.abs() + ln_q.abs() + 1.0) / (p - 1.0);
    let gap = -(-(p - 1.0) / (p * w.exp())).ln_1p() / (p - 1.0);
    let upper_ok = if gap > err { w < ln_hi } else { w <= ln_hi + err };
    Ok(w >= ln_lo - err && upper_ok)
}

pub fn criterion_closed_form() -> CriterionOutcome {
    timed(2, "closed form at p = 2 and alpha_bar bounds", || {
        let mut worst = (0.0f64, 1.0);
        let qs = log_grid(1.0, 1e3, CLOSED_FORM_SAMPLES);
        for &q in &qs {
            let err = (solve_alpha_bar(q, 2.0)? - (q + (q * (q - 1.0)).sqrt())).abs();
            if err > worst.0 {
                worst = (err, q);
            }
        }
        let mut violations = 0usize;
        let mut checked = 0usize;
        for &q in &qs {
            checked += 1;
            violations += usize::from(!bounds_hold(q, 2.0)?);
        }
        for &q in &identity_q_grid() {
            for &p in &identity_p_grid() {
                checked += 1;
                violations += usize::from(!bounds_hold(q, p)?);
            }
        }
        Ok((
            worst.0 < CLOSED_FORM_ABS_TOL && violations == 0,
            format!(
                "max |alpha_bar - (Q + sqrt(Q^2 - Q))| = {:.2e} at Q = {:.4} (tol {CLOSED_FORM_ABS_TOL:e}); bound violations {violations}/{checked}",
                worst.0, worst.1
            ),
        ))
    })
}

pub fn criterion_onedim() -> CriterionOutcome {
    timed(3, "1D best-constant oracle", || {
        let start = Instant::now();
        let cases = [
            (0.6, 2.0),
            (0.8, 2.0),
            (1.5, 2.0),
            (2.0, 2.0),
            (5.0, 2.0),
            (0.75, 3.0),
            (3.0, 3.0),
        ];
        let mut worst = (-1.0f64, 0.0, 0.0);
        for (alpha, p) in cases {
            let err = (best_constant_search(alpha, p, ONEDIM_GRID)? - exponents::q_of_alpha(alpha, p)?).abs();
            if err > worst.0 || err.is_nan() {
                worst = (err, alpha, p);
            }
        }
        let secs = start.elapsed().as_secs_f64();
        Ok((
            worst.0 < ONEDIM_ABS_TOL && secs < ONEDIM_MAX_SECS,
            format!(
                "max abs err {:.2e} at alpha = {}, p = {} (tol {ONEDIM_ABS_TOL:e}); {secs:.2} s (limit {ONEDIM_MAX_SECS} s)",
                worst.0, worst.1, worst.2
            ),
        ))
    })
}

/// Distinct valid `(n, p, rho)` cases of `{2,3,4} x {1.5, 2, 2.5, n} x {0.1, 0.5}`
/// with outer radius 1.
pub fn oracle_matrix() -> Vec<(u32, f64, f64)> {
    let mut cases = Vec::new();
    for n in [2u32, 3, 4] {
        let mut ps = vec![1.5, 2.0, 2.5, n as f64];
        ps.retain(|&p| p <= n as f64);
        ps.dedup();
        for p in ps {
            for rho in [0.1, 0.5] {
                cases.push((n, p, rho));
            }
        }
    }
    cases
}

pub fn criterion_oracle() -> CriterionOutcome {
    timed(4, "capacity oracle equivalence", || {
        let start = Instant::now();
        let cases = oracle_matrix();
        let errs = crate::par::map(&cases, |&(n, p, rho)| -> Result<f64> {
            let c = Condenser::new(n, p, rho, 1.0)?;
            Ok(rel_diff(
                radial_capacity_oracle(&c, ORACLE_POINTS)?,
                radial_capacity(&c),
            ))
        });
        let mut worst = (0.0f64, cases[0]);
        for (e, case) in errs.into_iter().zip(&cases) {
            let e = e?;
            if e > worst.0 || e.is_nan() {
                worst = (e, *case);
            }
        }
        let secs = start.elapsed().as_secs_f64();
        Ok((
            worst.0 < ORACLE_REL_TOL && secs < ORACLE_MAX_SECS,
            format!(
                "{} cases, max rel err {:.2e} at (n, p, rho) = {:?} (tol {ORACLE_REL_TOL:e}); {secs:.2} s (limit {ORACLE_MAX_SECS} s)",
                cases.len(),
                worst.0,
                worst.1
            ),
        ))
    })
}

pub fn canonical_run() -> Result<SharpnessRun> {
    run_sharpness(&SharpnessConfig::new(4.0 / 3.0, 2.0, 3))
}

pub fn criterion_capacity_ratio() -> CriterionOutcome {
    timed(5, "capacity term comparable to rho_eps^(n-p)", || {
        let run = canonical_run()?;
        let np = run.config.n as f64 - run.config.p;
        let ratios: Vec<f64> = run.records.iter().map(|r| r.cap_term / r.rho_eps.powf(np)).collect();
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        let (e_lo, e_hi) = (run.records.last().unwrap().eps, run.records[0].eps);
        Ok((
            lo > 0.0 && hi / lo < CAP_RATIO_SPREAD,
            format!(
                "ratio in [{lo:.4}, {hi:.4}], spread {:.4} (limit {CAP_RATIO_SPREAD}) over eps in [{e_lo:.1e}, {e_hi:.1e}]",
                hi / lo
            ),
        ))
    })
}

pub fn criterion_slopes() -> CriterionOutcome {
    timed(6, "sharpness slope", || {
        let start = Instant::now();
        let mut worst = (0.0f64, SHARPNESS_MATRIX[0], 0.0, 0.0);
        for cfg in SHARPNESS_MATRIX {
            let s = summarize(&run_sharpness(&SharpnessConfig::new(cfg.0, cfg.1, cfg.2))?)?;
            if s.rel_err > worst.0 || s.rel_err.is_nan() {
                worst = (s.rel_err, cfg, s.fitted_slope, s.target_slope);
            }
        }
        let secs = start.elapsed().as_secs_f64();
        Ok((
            worst.0 < SLOPE_REL_TOL && secs < SLOPE_MAX_SECS,
            format!(
                "{} configs, max rel err {:.3}% at (Q, p, n) = ({:.4}, {}, {}): slope {:.5} vs {:.5} (tol {}%); {secs:.2} s (limit {SLOPE_MAX_SECS} s)",
                SHARPNESS_MATRIX.len(),
                100.0 * worst.0,
                worst.1 .0,
                worst.1 .1,
                worst.1 .2,
                worst.2,
                worst.3,
                100.0 * SLOPE_REL_TOL
            ),
        ))
    })
}

pub fn criterion_flip() -> CriterionOutcome {
    timed(7, "iterated-estimate verdict flips at delta = (n-p)/gamma", || {
        let mut mismatches = Vec::new();
        let mut checked = 0;
        for cfg in SHARPNESS_MATRIX {
            let run = run_sharpness(&SharpnessConfig::new(cfg.0, cfg.1, cfg.2))?;
            let crit = (cfg.2 as f64 - cfg.1) / run.gamma;
            for k in 0..3 {
                let expected = [
                    (crit * 0.5, IteratedVerdict::Consistent),
                    (crit * (1.0 - FLIP_REL_OFFSET), IteratedVerdict::Consistent),
                    (crit, IteratedVerdict::Boundary),
                    (crit * (1.0 + FLIP_REL_OFFSET), IteratedVerdict::Falsified),
                    (crit * 2.0, IteratedVerdict::Falsified),
                ];
                for (delta, want) in expected {
                    checked += 1;
                    let got = iterated_sharpness_check(&run, delta, 1.0, k)?.verdict;
                    if got != want {
                        mismatches.push(format!("{cfg:?} k={k} delta={delta:.6}: {got:?}"));
                    }
                }
            }
        }
        Ok((
            mismatches.is_empty(),
            if mismatches.is_empty() {
                format!("{checked} verdicts match (offset {FLIP_REL_OFFSET:e} around the critical delta)")
            } else {
                format!(
                    "{} of {checked} mismatched: {}",
                    mismatches.len(),
                    mismatches.join("; ")
                )
            },
        ))
    })
}

fn series_diverges(a: f64, e: f64) -> bool {
    a * e <= 1.0
}

pub fn criterion_classifier() -> CriterionOutcome {
    timed(8, "Wiener classifier on the power-decay family", || {
        let geometry = ProfileGeometry::dyadic(3, 2.0)?;
        let scale = 1.0f64.min(ball_density(&geometry));
        let config = ClassifierConfig::default();
        let mut mismatches = Vec::new();
        let mut inconclusive = 0;
        let mut checked = 0;
        for e in [0.5, 1.0, 2.0, 3.0] {
            for a in [0.1, 0.4, 1.0 / e, 0.9 / e, 1.1 / e, 2.0 / e] {
                checked += 1;
                let profile = profile_power_decay(&geometry, a, scale, CLASSIFIER_TERMS)?;
                let verdict = classify_with_exponent(&profile, e, &config)?.verdict;
                let in_band = (a * e - 1.0).abs() < config.fit_margin;
                let want = if series_diverges(a, e) {
                    Verdict::Divergent
                } else {
                    Verdict::Convergent
                };
                if verdict == Verdict::Inconclusive && in_band {
                    inconclusive += 1;
                } else if verdict != want {
                    mismatches.push(format!("e={e} a={a:.4}: {verdict:?}, expected {want:?}"));
                }
            }
        }
        Ok((
            mismatches.is_empty(),
            if mismatches.is_empty() {
                format!("{checked} cases match, {inconclusive} inconclusive inside the band")
            } else {
                mismatches.join("; ")
            },
        ))
    })
}

pub fn criterion_recursion() -> CriterionOutcome {
    timed(9, "potential lower-bound recursion", || {
        let mut rng = ChaCha8Rng::seed_from_u64(RECURSION_SEED);
        let mut worst = 0.0f64;
        for _ in 0..RECURSION_PROFILES {
            let len = rng.gen_range(10..200);
            let kappa: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..1.0)).collect();
            let delta = rng.gen_range(0.2..3.0);
            let c = rng.gen_range(0.1..3.0);
            let profile = CapacityProfile::new(1.0, 0.5, kappa)?;
            let bound = potential_lower_bound(&profile, delta, c, len - 1)?;
            for k in 0..len - 1 {
                let lhs = 1.0 - bound.levels[k + 1];
                let rhs = (1.0 - bound.levels[k]) * (-c * profile.kappa[k + 1].powf(1.0 / delta)).exp();
                worst = worst.max((lhs - rhs).abs());
            }
        }
        Ok((
            worst < RECURSION_ABS_TOL,
            format!("{RECURSION_PROFILES} profiles, max abs residual {worst:.2e} (tol {RECURSION_ABS_TOL:e})"),
        ))
    })
}

pub fn criterion_classical_limit() -> CriterionOutcome {
    timed(10, "classical limit of the Wiener exponent", || {
        let q = 1.0 + CLASSICAL_Q_OFFSET;
        let mut parts = Vec::new();
        let mut passed = true;
        for p in [1.5, 2.0, 3.0, 5.0, 10.0] {
            let err = (wiener_exponent(q, p, 0.0)? - 1.0 / (p - 1.0)).abs();
            passed &= err < CLASSICAL_ABS_TOL;
            parts.push(format!("p={p}: {err:.2e}"));
        }
        Ok((
            passed,
            format!(
                "Q = 1 + {CLASSICAL_Q_OFFSET:e}, |e - 1/(p-1)| {} (tol {CLASSICAL_ABS_TOL:e})",
                parts.join(", ")
            ),
        ))
    })
}

pub fn run_all() -> Vec<CriterionOutcome> {
    vec![
        criterion_identities(),
        criterion_closed_form(),
        criterion_onedim(),
        criterion_oracle(),
        criterion_capacity_ratio(),
        criterion_slopes(),
        criterion_flip(),
        criterion_classifier(),
        criterion_recursion(),
        criterion_classical_limit(),
    ]
}
