//! Wiener-type sums over capacity profiles.
//!
//! A numerical partial sum can never prove divergence, so the classifier
//! combines a log-log tail slope test with a large-sum escape hatch and
//! leaves an honest `Inconclusive` band around slope 1. Only sufficiency is
//! known: a divergent sum means the point is regular, a convergent one
//! says nothing about irregularity.

use std::io::Write;

use serde::Serialize;

use crate::capacity::CapacityProfile;
use crate::error::{ensure_domain, Error, Result};
use crate::exponents::{self, DeltaExponent};
use crate::fit::{fit_line, LineFit};
use crate::par;
use crate::summation::prefix_sums;

pub const REPORT_SCHEMA: &str = "qwiener/wiener-report/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Divergent,
    Convergent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    /// Half-width of the band around slope 1 where no verdict is given.
    pub fit_margin: f64,
    /// Partial sums above this count as divergent.
    pub divergence_threshold: f64,
    /// Smallest tail window; the window is `max(min_window, terms / 2)`.
    pub min_window: usize,
    /// Largest RMS residual (natural-log units) of a convergent tail fit.
    pub max_residual: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            fit_margin: 0.05,
            divergence_threshold: 1e3,
            min_window: 10,
            max_residual: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WienerReport {
    pub schema: &'static str,
    pub exponent: f64,
    /// `kappa_j^exponent`.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Fitted `b` in `kappa_j^e ~ C (j + 1)^{-b}`; `None` when the tail has
    /// too few positive terms to fit.
    pub tail_slope: Option<f64>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl WienerReport {
    pub fn total(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }

    /// Writes `K,S_K` rows with a header.
    pub fn write_partial_sums_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        w.write_record(["K", "S_K"])?;
        for (k, s) in self.partial_sums.iter().enumerate() {
            w.write_record([k.to_string(), s.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn powered_terms(profile: &CapacityProfile, e: f64, count: usize) -> Vec<f64> {
    par::map(&profile.kappa[..count], |&k| k.powf(e))
}

/// `S_k = sum_{j <= k} kappa_j^e` for `k = 0..=last`.
pub fn wiener_partial_sums(profile: &CapacityProfile, e: f64, last: usize) -> Result<Vec<f64>> {
    ensure_domain!(e.is_finite() && e > 0.0, "exponent must be positive (got {e})");
    ensure_domain!(
        last < profile.len(),
        "K = {last} exceeds the profile length {}",
        profile.len()
    );
    Ok(prefix_sums(&powered_terms(profile, e, last + 1)))
}

/// Classifies the sum `sum_j kappa_j^e` for a given exponent.
pub fn classify_with_exponent(profile: &CapacityProfile, e: f64, config: &ClassifierConfig) -> Result<WienerReport> {
    ensure_domain!(e.is_finite() && e > 0.0, "exponent must be positive (got {e})");
    let count = profile.len();
    if count < config.min_window {
        return Err(Error::Degenerate(format!(
            "profile has {count} terms, fewer than the fit window of {}",
            config.min_window
        )));
    }
    let terms = powered_terms(profile, e, count);
    let partial_sums = prefix_sums(&terms);
    let total = *partial_sums.last().unwrap();

    let window = config.min_window.max(count / 2);
    let start = count - window;
    let (xs, ys): (Vec<f64>, Vec<f64>) = (start..count)
        .filter(|&j| terms[j] > 0.0)
        .map(|j| (((j + 1) as f64).ln(), terms[j].ln()))
        .unzip();
    let fit: Option<LineFit> = if xs.len() >= 3 { fit_line(&xs, &ys) } else { None };
    let tail_slope = fit.map(|f| -f.slope);

    let mut notes = Vec::new();
    let verdict = if total > config.divergence_threshold {
        notes.push(format!(
            "partial sum {total:.6e} exceeds the divergence threshold {:.1e}",
            config.divergence_threshold
        ));
        Verdict::Divergent
    } else if let Some(f) = fit {
        let b = -f.slope;
        notes.push(format!(
            "tail fit over j in [{start}, {}]: slope {b:.6}, rms residual {:.3e}",
            count - 1,
            f.rms_residual
        ));
        if b < 1.0 - config.fit_margin {
            Verdict::Divergent
        } else if b > 1.0 + config.fit_margin && f.rms_residual <= config.max_residual {
            Verdict::Convergent
        } else {
            Verdict::Inconclusive
        }
    } else if xs.is_empty() {
        notes.push("tail terms vanish identically".to_string());
        Verdict::Convergent
    } else {
        notes.push("too few positive tail terms to fit a slope".to_string());
        Verdict::Inconclusive
    };
    match verdict {
        Verdict::Divergent => notes.push("sufficient condition for regularity met".to_string()),
        Verdict::Convergent => notes.push("condition not met; no conclusion about irregularity".to_string()),
        Verdict::Inconclusive => notes.push("tail slope within the margin of 1; no verdict".to_string()),
    }

    Ok(WienerReport {
        schema: REPORT_SCHEMA,
        exponent: e,
        terms,
        partial_sums,
        tail_slope,
        verdict,
        notes,
    })
}

/// Classifies `profile` with exponent `alpha_bar(Q, p) / (p - 1) + eps`.
///
/// The regularity statement needs `eps > 0`; `eps = 0` is accepted to probe
/// the limiting exponent.
pub fn classify_regularity(
    profile: &CapacityProfile,
    q: f64,
    p: f64,
    eps: f64,
    config: &ClassifierConfig,
) -> Result<WienerReport> {
    ensure_domain!(eps.is_finite() && eps >= 0.0, "eps must be non-negative (got {eps})");
    let e = exponents::wiener_exponent(q, p, eps)?;
    classify_with_exponent(profile, e, config)
}

/// Lower bounds `m_k <= inf_{B_{k+1}} u` for a quasiminimizing potential.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialBound {
    pub delta: f64,
    pub c: f64,
    /// `m_k = 1 - exp(-c sum_{j <= k} kappa_j^{1/delta})`.
    pub levels: Vec<f64>,
    /// `1 - m_k`, kept separately because `m_k` rounds to 1 long before the
    /// deficit underflows.
    pub deficits: Vec<f64>,
}

impl PotentialBound {
    /// `m_k`, with the empty-sum convention `m_{-1} = 0`.
    pub fn level(&self, k: isize) -> f64 {
        if k < 0 {
            0.0
        } else {
            self.levels[k as usize]
        }
    }
}

/// Iterated lower bound for the potential from a capacity profile.
pub fn potential_lower_bound(profile: &CapacityProfile, delta: f64, c: f64, k: usize) -> Result<PotentialBound> {
    ensure_domain!(delta.is_finite() && delta > 0.0, "delta must be positive (got {delta})");
    ensure_domain!(c.is_finite() && c > 0.0, "c must be positive (got {c})");
    let sums = wiener_partial_sums(profile, 1.0 / delta, k)?;
    let levels = sums.iter().map(|&s| -(-c * s).exp_m1()).collect();
    let deficits = sums.iter().map(|&s| (-c * s).exp()).collect();
    Ok(PotentialBound {
        delta,
        c,
        levels,
        deficits,
    })
}

/// `delta = p - s/(s-1)` for `s` strictly between `p/(p-1)` and
/// `p_1(p/(p-1), Q^{1/p})`.
pub fn admissible_delta(q: f64, p: f64, s: f64) -> Result<f64> {
    Ok(DeltaExponent::new(q, p, s)?.delta)
}
