//! Brute-force recovery of the best one-dimensional quasiminimizer constant
//! of `x^alpha` on `(0, 1)`.
//!
//! On each subinterval `[a, b]` the competitor with the same endpoint values
//! and least `p`-energy is affine, so the constant is the supremum of
//! `E_pow / E_lin` over subintervals. Both energies have closed forms.

use std::io::Write;

use serde::Serialize;

use crate::error::{ensure_domain, Result};
use crate::exponents::q_of_alpha;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerEnergyRatio {
    pub alpha: f64,
    pub p: f64,
    pub a: f64,
    pub b: f64,
    /// `int_a^b |alpha t^{alpha-1}|^p dt`.
    pub e_pow: f64,
    /// `|b^alpha - a^alpha|^p / (b - a)^{p-1}`.
    pub e_lin: f64,
    pub ratio: f64,
}

impl PowerEnergyRatio {
    pub fn new(alpha: f64, p: f64, a: f64, b: f64) -> Result<Self> {
        let ratio = energy_ratio(alpha, p, a, b)?;
        let m = (alpha - 1.0) * p + 1.0;
        let e_pow = alpha.powf(p) * (b.powf(m) - a.powf(m)) / m;
        let e_lin = (b.powf(alpha) - a.powf(alpha)).abs().powf(p) / (b - a).powf(p - 1.0);
        Ok(Self {
            alpha,
            p,
            a,
            b,
            e_pow,
            e_lin,
            ratio,
        })
    }
}

fn check_args(alpha: f64, p: f64) -> Result<()> {
    ensure_domain!(p.is_finite() && p > 1.0, "p must exceed 1 (got {p})");
    ensure_domain!(
        alpha.is_finite() && alpha > 1.0 - 1.0 / p,
        "alpha must exceed 1 - 1/p = {} (got {alpha})",
        1.0 - 1.0 / p
    );
    Ok(())
}

/// `E_pow / E_lin` on `[a, b]`.
///
/// Written in terms of `x = a/b`, where both energies scale by the same
/// power of `b`; the differences `b^m - a^m` go through `expm1` so nearby
/// endpoints keep their digits.
pub fn energy_ratio(alpha: f64, p: f64, a: f64, b: f64) -> Result<f64> {
    check_args(alpha, p)?;
    ensure_domain!(
        a.is_finite() && b.is_finite() && a >= 0.0 && a < b && b <= 1.0,
        "need 0 <= a < b <= 1 (a = {a}, b = {b})"
    );
    ensure_domain!(b - a >= 1e-12, "interval [{a}, {b}] is degenerate");
    let m = (alpha - 1.0) * p + 1.0;
    let ln_x = (a / b).ln();
    let one_minus = |e: f64| if a == 0.0 { 1.0 } else { -(e * ln_x).exp_m1() };
    let num = alpha.powf(p) * one_minus(m) / m * one_minus(1.0).powf(p - 1.0);
    let den = one_minus(alpha).powf(p);
    Ok(num / den)
}

fn ratio_unchecked(alpha: f64, p: f64, a: f64, b: f64) -> f64 {
    energy_ratio(alpha, p, a, b).unwrap_or(f64::NEG_INFINITY)
}

fn pick(best: (f64, f64, f64), cand: (f64, f64, f64)) -> (f64, f64, f64) {
    // strict comparison keeps the first maximizer, so ties are deterministic
    if cand.0 > best.0 {
        cand
    } else {
        best
    }
}

/// Largest energy ratio over the grid `a = i/grid < b = j/grid`, refined by
/// a compass search around the grid maximizer.
pub fn best_constant_search(alpha: f64, p: f64, grid: usize) -> Result<f64> {
    check_args(alpha, p)?;
    ensure_domain!(grid >= 50, "grid must be at least 50 (got {grid})");
    let h = 1.0 / grid as f64;
    let rows = par::map_range(grid, |i| {
        let a = if i == 0 { 0.0 } else { i as f64 * h };
        (i + 1..=grid).fold((f64::NEG_INFINITY, a, 1.0), |best, j| {
            let b = if j == grid { 1.0 } else { j as f64 * h };
            pick(best, (ratio_unchecked(alpha, p, a, b), a, b))
        })
    });
    let mut best = rows.into_iter().fold((f64::NEG_INFINITY, 0.0, 1.0), pick);

    let mut step = h;
    while step > 1e-12 {
        let (_, a, b) = best;
        let mut improved = false;
        for (da, db) in [(-step, 0.0), (step, 0.0), (0.0, -step), (0.0, step)] {
            let (na, nb) = ((a + da).max(0.0), (b + db).min(1.0));
            if nb - na < 1e-12 {
                continue;
            }
            let cand = (ratio_unchecked(alpha, p, na, nb), na, nb);
            if cand.0 > best.0 {
                best = cand;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(best.0)
}

pub const VERIFY_HEADER: [&str; 5] = ["alpha", "p", "Q_formula", "Q_bruteforce", "abs_err"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyRow {
    pub alpha: f64,
    pub p: f64,
    pub q_formula: f64,
    pub q_bruteforce: f64,
    pub abs_err: f64,
}

pub fn verify_power(alpha: f64, p: f64, grid: usize) -> Result<VerifyRow> {
    let q_formula = q_of_alpha(alpha, p)?;
    let q_bruteforce = best_constant_search(alpha, p, grid)?;
    Ok(VerifyRow {
        alpha,
        p,
        q_formula,
        q_bruteforce,
        abs_err: (q_formula - q_bruteforce).abs(),
    })
}

pub fn write_verify_csv<W: Write>(rows: &[VerifyRow], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(VERIFY_HEADER)?;
    for r in rows {
        w.write_record([r.alpha, r.p, r.q_formula, r.q_bruteforce, r.abs_err].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
