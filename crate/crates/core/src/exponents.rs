//! Power exponents attached to a quasiminimizing constant.
//!
//! For `p > 1` the map `alpha -> Q(alpha, p) = alpha^p / (1 + p(alpha - 1))`
//! on `(1 - 1/p, inf)` has its minimum `Q = 1` at `alpha = 1`, decreases to
//! the left and increases to the right. Each `Q > 1` therefore has exactly
//! two preimages `alpha_lower < 1 < alpha_bar`; `alpha_bar / (p - 1)` is the
//! exponent of the Wiener-type sum.
//!
//! The solvers work in logarithmic variables (`ln alpha_bar`, and the log of
//! the distance `alpha_lower - (1 - 1/p)`), which keeps them accurate when
//! `alpha_bar` is astronomically large or `alpha_lower` sits within a few ulps
//! of the critical exponent `1 - 1/p`. The latter happens on the dual side
//! `(Q^{1/(p-1)}, p/(p-1))` whenever `p` is close to 1.

use serde::Serialize;

use crate::error::{ensure_domain, Error, Result};
use crate::roots::{newton_bisect, RootOptions};

/// `ln Q` below this is treated as `Q = 1`.
pub const DEGENERATE_LN_Q: f64 = 1e-14;

fn solver_options(scale: f64) -> RootOptions {
    RootOptions {
        xtol: 1e-15 * scale.abs().max(1.0),
        max_iter: 200,
    }
}

fn check_p(p: f64) -> Result<()> {
    ensure_domain!(p.is_finite() && p > 1.0, "p must satisfy p > 1 (got {p})");
    Ok(())
}

fn check_q(q: f64) -> Result<()> {
    ensure_domain!(q.is_finite() && q >= 1.0, "Q must satisfy Q >= 1 (got {q})");
    Ok(())
}

fn check_alpha(alpha: f64, p: f64) -> Result<()> {
    ensure_domain!(
        alpha.is_finite() && alpha > 1.0 - 1.0 / p,
        "alpha must exceed 1 - 1/p = {} (got {alpha})",
        1.0 - 1.0 / p
    );
    Ok(())
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Dimension and integrability exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PEnvironment {
    pub p: f64,
    pub n: u32,
}

impl PEnvironment {
    pub fn new(p: f64, n: u32) -> Result<Self> {
        check_p(p)?;
        ensure_domain!(n >= 1, "dimension n must be at least 1");
        Ok(Self { p, n })
    }

    /// Capacity densities `cp_p / r^{n-p}` need `p <= n`.
    pub fn require_capacity_range(&self) -> Result<()> {
        ensure_domain!(
            self.p <= self.n as f64,
            "capacity normalization needs 1 < p <= n (p = {}, n = {})",
            self.p,
            self.n
        );
        Ok(())
    }
}

/// `Q(alpha, p) = alpha^p / (1 + p(alpha - 1))`.
pub fn q_of_alpha(alpha: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    check_alpha(alpha, p)?;
    Ok(alpha.powf(p) / (1.0 + p * (alpha - 1.0)))
}

/// `ln Q(alpha, p)`.
pub fn ln_q_of_alpha(alpha: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    check_alpha(alpha, p)?;
    Ok(p * alpha.ln() - (p * (alpha - 1.0)).ln_1p())
}

/// `ln Q(alpha, p)` at `alpha = 1 - 1/p + excess`.
///
/// The denominator `1 + p(alpha - 1)` equals `p * excess` exactly, so this
/// stays accurate for excesses far below the ulp of `1 - 1/p`.
pub fn ln_q_of_excess(excess: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    ensure_domain!(
        excess.is_finite() && excess > 0.0,
        "excess over 1 - 1/p must be positive (got {excess})"
    );
    let alpha = 1.0 - 1.0 / p + excess;
    Ok(p * alpha.ln() - (p * excess).ln())
}

/// `ln(1 + p(e^w - 1))` without overflow for large `w`.
fn ln_denominator(w: f64, p: f64) -> f64 {
    if w < 1.0 {
        (p * w.exp_m1()).ln_1p()
    } else {
        w + p.ln() + (-(p - 1.0) / p * (-w).exp()).ln_1p()
    }
}

/// `ln alpha_bar` for given `ln Q`.
pub(crate) fn ln_alpha_bar(ln_q: f64, p: f64) -> Result<f64> {
    if ln_q < DEGENERATE_LN_Q {
        return Ok(0.0);
    }
    // slightly above ln((pQ)^{1/(p-1)} + 1); for large alpha_bar the exact
    // gap below (pQ)^{1/(p-1)} drops under the rounding of g
    let a = (p.ln() + ln_q) / (p - 1.0);
    let w_hi = a + (-a).exp().ln_1p() + 1e-6 * (1.0 + a);
    newton_bisect(
        "alpha_bar",
        |w| {
            let g = p * w - ln_denominator(w, p) - ln_q;
            let dg = p - p / (p - (p - 1.0) * (-w).exp());
            (g, dg)
        },
        0.0,
        w_hi,
        solver_options(w_hi),
    )
}

/// `ln(alpha_lower - (1 - 1/p))` for given `ln Q`.
pub(crate) fn ln_lower_excess(ln_q: f64, p: f64) -> Result<f64> {
    let v_hi = -p.ln(); // alpha = 1
    if ln_q < DEGENERATE_LN_Q {
        return Ok(v_hi);
    }
    let a0 = 1.0 - 1.0 / p;
    let g = |v: f64| p * (a0 + v.exp()).ln() - p.ln() - v - ln_q;
    // shrink the left end towards the critical exponent until Q(.) exceeds Q
    let mut v_lo = 1e-3f64.min(0.5 / p).ln();
    let mut halvings = 0;
    while g(v_lo) <= 0.0 {
        v_lo -= std::f64::consts::LN_2;
        halvings += 1;
        if halvings > 5000 {
            return Err(Error::NoBracket {
                what: "alpha_lower",
                lo: v_lo.exp(),
                hi: 1.0 / p,
            });
        }
    }
    newton_bisect(
        "alpha_lower",
        |v| {
            let e = v.exp();
            (g(v), p * e / (a0 + e) - 1.0)
        },
        v_lo,
        v_hi,
        solver_options(v_lo),
    )
}

/// The unique `alpha_bar >= 1` with `Q(alpha_bar, p) = Q`.
pub fn solve_alpha_bar(q: f64, p: f64) -> Result<f64> {
    check_q(q)?;
    check_p(p)?;
    let a = ln_alpha_bar(q.ln(), p)?.exp();
    ensure_domain!(a.is_finite(), "alpha_bar for Q = {q}, p = {p} exceeds the f64 range");
    Ok(a)
}

/// The unique `alpha in (1 - 1/p, 1]` with `Q(alpha, p) = Q`.
pub fn solve_alpha_lower(q: f64, p: f64) -> Result<f64> {
    check_q(q)?;
    check_p(p)?;
    let ln_q = q.ln();
    if ln_q < DEGENERATE_LN_Q {
        return Ok(1.0);
    }
    Ok(1.0 - 1.0 / p + ln_lower_excess(ln_q, p)?.exp())
}

/// `solve_alpha_lower(q, p) - (1 - 1/p)`, computed without cancellation.
pub fn solve_alpha_lower_excess(q: f64, p: f64) -> Result<f64> {
    check_q(q)?;
    check_p(p)?;
    Ok(ln_lower_excess(q.ln(), p)?.exp())
}

/// `p_1(p, t)`: the unique `x > p` with `t^p (x - p)/x (x/(x - 1))^p = 1`.
pub fn solve_p1(p: f64, t: f64) -> Result<f64> {
    check_p(p)?;
    ensure_domain!(t.is_finite() && t > 1.0, "t must satisfy t > 1 (got {t})");
    p1_from_log(p, p * t.ln())
}

/// `p_1` given `p ln t` instead of `t`.
pub(crate) fn p1_from_log(p: f64, p_ln_t: f64) -> Result<f64> {
    ensure_domain!(p_ln_t > 0.0 && p_ln_t.is_finite(), "t must satisfy t > 1");
    // substitute x = p + e^y; the left side is increasing in y
    let h = |y: f64| {
        let d = y.exp();
        let x = p + d;
        let ln_ratio = if d < p { y - x.ln() } else { (-p / x).ln_1p() };
        let value = p_ln_t + ln_ratio - p * (-1.0 / x).ln_1p();
        (value, p * (p - 1.0) / (x * (x - 1.0)))
    };
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    let mut step = 1.0;
    let mut expansions = 0;
    if h(0.0).0 < 0.0 {
        loop {
            hi = lo + step;
            if h(hi).0 > 0.0 {
                break;
            }
            lo = hi;
            step *= 2.0;
            expansions += 1;
            if expansions > 200 {
                return Err(Error::NoBracket { what: "p1", lo, hi });
            }
        }
    } else {
        loop {
            lo = hi - step;
            if h(lo).0 < 0.0 {
                break;
            }
            hi = lo;
            step *= 2.0;
            expansions += 1;
            if expansions > 200 {
                return Err(Error::NoBracket { what: "p1", lo, hi });
            }
        }
    }
    let y = newton_bisect("p1", h, lo, hi, solver_options(lo.abs().max(hi.abs())))?;
    Ok(p + y.exp())
}

/// `beta(alpha) = alpha / (1 + p(alpha - 1))`.
pub fn beta_of_alpha(alpha: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    check_alpha(alpha, p)?;
    Ok(alpha / (1.0 + p * (alpha - 1.0)))
}

/// `beta(alpha) - 1/p = (p - 1) / (p (1 + p(alpha - 1)))`.
///
/// `1/p` is the critical exponent `1 - 1/p'` of the dual exponent `p'`.
pub fn beta_excess_of_alpha(alpha: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    check_alpha(alpha, p)?;
    Ok((p - 1.0) / (p * (1.0 + p * (alpha - 1.0))))
}

/// The two exponents attached to `(Q, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentPair {
    pub p: f64,
    pub q: f64,
    pub alpha_lower: f64,
    pub alpha_bar: f64,
}

impl ExponentPair {
    pub fn new(q: f64, p: f64) -> Result<Self> {
        Ok(Self {
            p,
            q,
            alpha_lower: solve_alpha_lower(q, p)?,
            alpha_bar: solve_alpha_bar(q, p)?,
        })
    }
}

/// Exponents for `(Q, p)` together with those of the dual pair
/// `(Q' = Q^{1/(p-1)}, p' = p/(p-1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityRecord {
    pub p: f64,
    pub p_dual: f64,
    pub q: f64,
    /// May be `inf` when `Q^{1/(p-1)}` overflows; all solves go through `ln Q`.
    pub q_dual: f64,
    pub alpha_lower: f64,
    pub alpha_bar: f64,
    pub beta_lower: f64,
    pub beta_bar: f64,
    /// `beta_lower - 1/p`, kept separately since it can be far below the ulp of `1/p`.
    pub beta_lower_excess: f64,
}

pub fn duality_record(q: f64, p: f64) -> Result<DualityRecord> {
    check_q(q)?;
    check_p(p)?;
    let ln_q = q.ln();
    let p_dual = p / (p - 1.0);
    let ln_q_dual = ln_q / (p - 1.0);

    let alpha_bar = ln_alpha_bar(ln_q, p)?.exp();
    let beta_bar = ln_alpha_bar(ln_q_dual, p_dual)?.exp();
    ensure_domain!(
        alpha_bar.is_finite() && beta_bar.is_finite(),
        "exponents for Q = {q}, p = {p} exceed the f64 range"
    );
    let (alpha_lower, beta_lower, beta_lower_excess) = if ln_q < DEGENERATE_LN_Q {
        (1.0, 1.0, 1.0 - 1.0 / p)
    } else {
        let excess = ln_lower_excess(ln_q_dual, p_dual)?.exp();
        (
            1.0 - 1.0 / p + ln_lower_excess(ln_q, p)?.exp(),
            1.0 / p + excess,
            excess,
        )
    };
    Ok(DualityRecord {
        p,
        p_dual,
        q,
        q_dual: (ln_q_dual).exp(),
        alpha_lower,
        alpha_bar,
        beta_lower,
        beta_bar,
        beta_lower_excess,
    })
}

impl DualityRecord {
    /// `beta / (p beta - 1)` evaluated from the dual solve.
    pub fn inverse_delta_threshold(&self) -> f64 {
        self.beta_lower / (self.p * self.beta_lower_excess)
    }

    /// Relative residuals of the four cross relations
    /// `beta = beta(alpha_bar)`, `beta_bar = beta(alpha)`,
    /// `alpha = beta_bar / (1 + p'(beta_bar - 1))`,
    /// `alpha_bar = beta / (1 + p'(beta - 1))`.
    pub fn cross_residuals(&self) -> [f64; 4] {
        let p = self.p;
        let pd = self.p_dual;
        let beta_excess_from_alpha_bar = (p - 1.0) / (p * (1.0 + p * (self.alpha_bar - 1.0)));
        let beta_bar_from_alpha = self.alpha_lower / (1.0 + p * (self.alpha_lower - 1.0));
        let alpha_from_beta_bar = self.beta_bar / (1.0 + pd * (self.beta_bar - 1.0));
        // 1 + p'(beta - 1) = p' * (beta - 1/p)
        let alpha_bar_from_beta = self.beta_lower / (pd * self.beta_lower_excess);
        [
            rel_diff(beta_excess_from_alpha_bar, self.beta_lower_excess),
            rel_diff(beta_bar_from_alpha, self.beta_bar),
            rel_diff(alpha_from_beta_bar, self.alpha_lower),
            rel_diff(alpha_bar_from_beta, self.alpha_bar),
        ]
    }
}

/// `alpha_bar / (p - 1) + eps`, the exponent of the Wiener-type sum.
pub fn wiener_exponent(q: f64, p: f64, eps: f64) -> Result<f64> {
    ensure_domain!(eps.is_finite() && eps >= 0.0, "eps must be non-negative (got {eps})");
    Ok(solve_alpha_bar(q, p)? / (p - 1.0) + eps)
}

/// `(Q^{1/(p-1)}, (pQ)^{1/(p-1)})`; `alpha_bar` lies in `[lower, upper)`.
pub fn alpha_bar_bounds(q: f64, p: f64) -> Result<(f64, f64)> {
    check_q(q)?;
    check_p(p)?;
    Ok((q.powf(1.0 / (p - 1.0)), (p * q).powf(1.0 / (p - 1.0))))
}

/// Admissible `delta` values: the open interval `(0, upper)` with
/// `upper = (p beta - 1) / beta = p - 1/beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaRange {
    pub lower: f64,
    pub upper: f64,
    pub beta: f64,
    /// `beta / (p beta - 1)`, which equals `alpha_bar / (p - 1)`.
    pub inverse_threshold: f64,
}

pub fn delta_range(q: f64, p: f64) -> Result<DeltaRange> {
    ensure_domain!(q.is_finite() && q > 1.0, "Q must satisfy Q > 1 (got {q})");
    let rec = duality_record(q, p)?;
    Ok(DeltaRange {
        lower: 0.0,
        upper: p * rec.beta_lower_excess / rec.beta_lower,
        beta: rec.beta_lower,
        inverse_threshold: rec.inverse_delta_threshold(),
    })
}

/// `delta = p - s/(s - 1)` for an admissible auxiliary exponent `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaExponent {
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub delta: f64,
    /// `p_1(p/(p-1), Q^{1/p})`, the open upper end for `s`.
    pub p1: f64,
}

impl DeltaExponent {
    pub fn new(q: f64, p: f64, s: f64) -> Result<Self> {
        check_p(p)?;
        ensure_domain!(q.is_finite() && q > 1.0, "Q must satisfy Q > 1 (got {q})");
        let p_dual = p / (p - 1.0);
        // p' ln(Q^{1/p}) = ln Q / (p - 1)
        let p1 = p1_from_log(p_dual, q.ln() / (p - 1.0))?;
        ensure_domain!(
            s.is_finite() && s > p_dual && s < p1,
            "s must lie in the open interval ({p_dual}, {p1}) (got {s})"
        );
        Ok(Self {
            p,
            q,
            s,
            delta: p - s / (s - 1.0),
            p1,
        })
    }
}

/// Which family `best_constant_power` evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerMode {
    /// `|x|^alpha` with `p > n`, admissible for `alpha > 1 - n/p`.
    PositivePower,
    /// `|x|^{-gamma}` with `1 < p < n`, admissible for `gamma > n/p - 1`.
    NegativePower,
}

/// Best quasiminimizer constant of a radial power in `B(0,1) \ {0}`.
///
/// The zero exponent (a constant function) is a minimizer and returns 1.
pub fn best_constant_power(exponent: f64, p: f64, n: u32, mode: PowerMode) -> Result<f64> {
    check_p(p)?;
    ensure_domain!(n >= 1, "dimension n must be at least 1");
    ensure_domain!(exponent.is_finite(), "exponent must be finite");
    let nf = n as f64;
    ensure_domain!(p != nf, "p = n is not covered by either power family");
    match mode {
        PowerMode::PositivePower => {
            ensure_domain!(p > nf, "positive powers need p > n (p = {p}, n = {n})");
            if exponent == 0.0 {
                return Ok(1.0);
            }
            ensure_domain!(
                exponent > 1.0 - nf / p,
                "alpha must exceed 1 - n/p = {} (got {exponent})",
                1.0 - nf / p
            );
            Ok(((p - 1.0) / (p - nf)).powf(p - 1.0) * exponent.powf(p) / (nf + p * (exponent - 1.0)))
        }
        PowerMode::NegativePower => {
            ensure_domain!(p < nf, "negative powers need p < n (p = {p}, n = {n})");
            if exponent == 0.0 {
                return Ok(1.0);
            }
            ensure_domain!(
                exponent > nf / p - 1.0,
                "gamma must exceed n/p - 1 = {} (got {exponent})",
                nf / p - 1.0
            );
            Ok(((p - 1.0) / (nf - p)).powf(p - 1.0) * exponent.powf(p) / (p * exponent - (nf - p)))
        }
    }
}
