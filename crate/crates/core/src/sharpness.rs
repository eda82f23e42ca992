//! The potentials `u_eps = min{eps(|x|^{-gamma} - 1), 1}` on `B(0, 1)` and
//! the exponent relating their infima to the capacity of `E_eps`.
//!
//! With `gamma = alpha_bar (n - p)/(p - 1)` each `u_eps` is a quasiminimizing
//! potential for the constant `Q`, so the fitted slope of `ln inf u_eps`
//! against `ln cap` bounds how large the exponent `1/delta` in an iterated
//! lower estimate may be.

use std::io::Write;

use serde::Serialize;

use crate::capacity::{radial_capacity, Condenser};
use crate::error::{ensure_domain, Error, Result};
use crate::exponents::{self, rel_diff};
use crate::fit::fit_line;
use crate::par;

pub const SUMMARY_SCHEMA: &str = "qwiener/sharpness-summary/v1";
pub const RUN_HEADER: [&str; 4] = ["eps", "rho_eps", "inf_u", "cap_term"];

/// Slopes within this distance of zero count as the boundary case.
pub const BOUNDARY_SLOPE_TOL: f64 = 1e-9;

/// `gamma = alpha_bar(Q, p) (n - p)/(p - 1)`.
pub fn gamma_of(q: f64, p: f64, n: u32) -> Result<f64> {
    ensure_domain!(q.is_finite() && q > 1.0, "Q must exceed 1 (got {q})");
    ensure_domain!(
        p.is_finite() && p > 1.0 && p < n as f64,
        "need 1 < p < n (p = {p}, n = {n})"
    );
    let nf = n as f64;
    let gamma = exponents::solve_alpha_bar(q, p)? * (nf - p) / (p - 1.0);
    if gamma <= nf / p - 1.0 {
        return Err(Error::Degenerate(format!(
            "gamma = {gamma} does not exceed n/p - 1 = {}",
            nf / p - 1.0
        )));
    }
    Ok(gamma)
}

/// `rho_eps = (eps/(1 + eps))^{1/gamma}`, the radius where `u_eps` reaches 1.
pub fn rho_eps(eps: f64, gamma: f64) -> f64 {
    // ln(eps/(1+eps)) = -ln(1 + 1/eps)
    (-(1.0 / eps).ln_1p() / gamma).exp()
}

/// `inf_{B(0, radius)} u_eps = eps(radius^{-gamma} - 1)`.
pub fn u_eps_inf(eps: f64, gamma: f64, radius: f64) -> Result<f64> {
    ensure_domain!(eps.is_finite() && eps > 0.0, "eps must be positive (got {eps})");
    ensure_domain!(gamma.is_finite() && gamma > 0.0, "gamma must be positive (got {gamma})");
    ensure_domain!(
        radius.is_finite() && radius > 0.0 && radius <= 1.0,
        "radius must lie in (0, 1] (got {radius})"
    );
    let rho = rho_eps(eps, gamma);
    if radius < rho {
        return Err(Error::Saturated { radius, rho_eps: rho });
    }
    Ok((eps * (-gamma * radius.ln()).exp_m1()).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpnessConfig {
    pub q: f64,
    pub p: f64,
    pub n: u32,
    pub points: usize,
    /// Range of `rho_eps` swept; the `eps` range follows from `gamma`.
    pub rho_range: (f64, f64),
    /// Overrides `rho_range` when set.
    pub eps_range: Option<(f64, f64)>,
    /// Radius of `B`; the infimum is taken over `2B`.
    pub ball_radius: f64,
    /// Outer radius of the condenser `(E_eps, B(0, outer_radius))`.
    pub outer_radius: f64,
}

impl SharpnessConfig {
    pub fn new(q: f64, p: f64, n: u32) -> Self {
        Self {
            q,
            p,
            n,
            points: 40,
            rho_range: (1e-4, 1e-1),
            eps_range: None,
            ball_radius: 1.0 / 3.0,
            outer_radius: 1.0,
        }
    }

    fn eps_bounds(&self, gamma: f64) -> Result<(f64, f64)> {
        let (lo, hi) = match self.eps_range {
            Some(r) => r,
            None => {
                let (a, b) = self.rho_range;
                ensure_domain!(0.0 < a && a < b && b < 1.0, "rho range must satisfy 0 < lo < hi < 1");
                (a.powf(gamma), b.powf(gamma))
            }
        };
        ensure_domain!(
            lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi,
            "eps range must satisfy 0 < lo < hi (got [{lo}, {hi}])"
        );
        Ok((lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpnessRecord {
    pub eps: f64,
    pub rho_eps: f64,
    /// `inf_{2B} u_eps`.
    pub inf_u: f64,
    /// `cp(E_eps, B(0, outer)) / ball_radius^{n-p}`.
    pub cap_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessRun {
    pub config: SharpnessConfig,
    pub gamma: f64,
    pub alpha_bar: f64,
    /// Ordered by decreasing `eps`.
    pub records: Vec<SharpnessRecord>,
}

impl SharpnessRun {
    pub fn eps_decades(&self) -> f64 {
        match (self.records.first(), self.records.last()) {
            (Some(a), Some(b)) => (a.eps / b.eps).log10(),
            _ => 0.0,
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        w.write_record(RUN_HEADER)?;
        for r in &self.records {
            w.write_record([r.eps, r.rho_eps, r.inf_u, r.cap_term].map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sweeps `eps` over a log grid and records infima and capacity terms.
pub fn run_sharpness(config: &SharpnessConfig) -> Result<SharpnessRun> {
    let SharpnessConfig { q, p, n, points, .. } = *config;
    let gamma = gamma_of(q, p, n)?;
    let alpha_bar = exponents::solve_alpha_bar(q, p)?;
    ensure_domain!(points >= 2, "need at least 2 grid points (got {points})");
    let b = config.ball_radius;
    ensure_domain!(b > 0.0 && 2.0 * b <= 1.0, "ball radius must lie in (0, 1/2] (got {b})");
    ensure_domain!(
        config.outer_radius.is_finite() && config.outer_radius > 0.0,
        "outer radius must be positive"
    );
    let (lo, hi) = config.eps_bounds(gamma)?;
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let eps_grid: Vec<f64> = (0..points)
        .map(|i| (ln_hi + (ln_lo - ln_hi) * i as f64 / (points - 1) as f64).exp())
        .collect();
    let scale = b.powf(n as f64 - p);
    let records = par::map(&eps_grid, |&eps| {
        let rho = rho_eps(eps, gamma);
        let inf_u = u_eps_inf(eps, gamma, 2.0 * b)?;
        let cap = radial_capacity(&Condenser::new(n, p, rho, config.outer_radius)?);
        Ok(SharpnessRecord {
            eps,
            rho_eps: rho,
            inf_u,
            cap_term: cap / scale,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(SharpnessRun {
        config: *config,
        gamma,
        alpha_bar,
        records,
    })
}

/// Least-squares slope of `ln inf_u` against `ln cap_term`.
pub fn sharpness_fit(run: &SharpnessRun) -> Result<f64> {
    let decades = run.eps_decades();
    ensure_domain!(
        decades >= 4.0 - 1e-9,
        "eps grid spans {decades:.2} decades, need at least 4"
    );
    let (xs, ys): (Vec<f64>, Vec<f64>) = run
        .records
        .iter()
        .filter(|r| r.inf_u > 0.0 && r.cap_term > 0.0)
        .map(|r| (r.cap_term.ln(), r.inf_u.ln()))
        .unzip();
    if xs.len() < 4 {
        return Err(Error::Degenerate(format!(
            "only {} usable points for the slope fit",
            xs.len()
        )));
    }
    fit_line(&xs, &ys)
        .map(|f| f.slope)
        .ok_or_else(|| Error::Degenerate("capacity terms do not vary over the grid".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessSummary {
    pub schema: &'static str,
    pub q: f64,
    pub p: f64,
    pub n: u32,
    pub gamma: f64,
    pub alpha_bar: f64,
    pub fitted_slope: f64,
    pub target_slope: f64,
    pub rel_err: f64,
}

pub fn summarize(run: &SharpnessRun) -> Result<SharpnessSummary> {
    let fitted_slope = sharpness_fit(run)?;
    let target_slope = run.alpha_bar / (run.config.p - 1.0);
    Ok(SharpnessSummary {
        schema: SUMMARY_SCHEMA,
        q: run.config.q,
        p: run.config.p,
        n: run.config.n,
        gamma: run.gamma,
        alpha_bar: run.alpha_bar,
        fitted_slope,
        target_slope,
        rel_err: rel_diff(fitted_slope, target_slope),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IteratedVerdict {
    /// `LHS/RHS -> 0`: the lower estimate fails for small `eps`.
    Falsified,
    /// `LHS/RHS` stays bounded below.
    Consistent,
    /// `delta = (n - p)/gamma`; left undecided.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IteratedCheck {
    pub delta: f64,
    pub c: f64,
    pub k: usize,
    pub critical_delta: f64,
    pub predicted_slope: f64,
    /// Slope of `ln(LHS/RHS)` against `ln eps`.
    pub fitted_slope: f64,
    pub min_ratio: f64,
    pub points: usize,
    pub verdict: IteratedVerdict,
}

/// `r_j = 3^{-(j+1)}`.
pub fn dyadic_radius(j: usize) -> f64 {
    3f64.powi(-(j as i32 + 1))
}

/// `(eps r_{k+1}^{-gamma}, c (eps^{1/gamma}/r_k)^{(n-p)/delta})`.
pub fn iterated_sides(eps: f64, gamma: f64, n_minus_p: f64, delta: f64, c: f64, k: usize) -> (f64, f64) {
    let lhs = eps * dyadic_radius(k + 1).powf(-gamma);
    let rhs = c * (eps.powf(1.0 / gamma) / dyadic_radius(k)).powf(n_minus_p / delta);
    (lhs, rhs)
}

/// Compares both sides of the iterated estimate along the run's `eps` grid.
pub fn iterated_sharpness_check(run: &SharpnessRun, delta: f64, c: f64, k: usize) -> Result<IteratedCheck> {
    ensure_domain!(delta.is_finite() && delta > 0.0, "delta must be positive (got {delta})");
    ensure_domain!(c.is_finite() && c > 0.0, "c must be positive (got {c})");
    let gamma = run.gamma;
    let n_minus_p = run.config.n as f64 - run.config.p;
    let r_next = dyadic_radius(k + 1);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut min_ratio = f64::INFINITY;
    for r in run.records.iter().filter(|r| r.eps.powf(1.0 / gamma) <= r_next) {
        let (lhs, rhs) = iterated_sides(r.eps, gamma, n_minus_p, delta, c, k);
        min_ratio = min_ratio.min(lhs / rhs);
        xs.push(r.eps.ln());
        ys.push((lhs / rhs).ln());
    }
    if xs.len() < 4 {
        return Err(Error::Degenerate(format!(
            "only {} grid points satisfy eps^(1/gamma) <= r_(k+1) = {r_next:e}",
            xs.len()
        )));
    }
    let fitted_slope = fit_line(&xs, &ys)
        .ok_or_else(|| Error::Degenerate("eps grid is constant".into()))?
        .slope;
    let verdict = if fitted_slope > BOUNDARY_SLOPE_TOL {
        IteratedVerdict::Falsified
    } else if fitted_slope < -BOUNDARY_SLOPE_TOL {
        IteratedVerdict::Consistent
    } else {
        IteratedVerdict::Boundary
    };
    Ok(IteratedCheck {
        delta,
        c,
        k,
        critical_delta: n_minus_p / gamma,
        predicted_slope: 1.0 - n_minus_p / (gamma * delta),
        fitted_slope,
        min_ratio,
        points: xs.len(),
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{best_constant_power, PowerMode};

    fn canonical() -> SharpnessRun {
        run_sharpness(&SharpnessConfig::new(4.0 / 3.0, 2.0, 3)).unwrap()
    }

    #[test]
    fn gamma_examples() {
        assert!((gamma_of(4.0 / 3.0, 2.0, 3).unwrap() - 2.0).abs() < 1e-13);
        assert!((gamma_of(16.0 / 7.0, 2.0, 3).unwrap() - 4.0).abs() < 1e-13);
        let g = gamma_of(1.0 + 1e-12, 2.5, 4).unwrap();
        assert!((g - 1.0).abs() < 1e-5);
        assert!(gamma_of(2.0, 3.0, 3).is_err());
        assert!(gamma_of(1.0, 2.0, 3).is_err());
    }

    #[test]
    fn gamma_closes_the_loop() {
        for &(q, p, n) in &[
            (4.0 / 3.0, 2.0, 3),
            (2.0, 2.0, 4),
            (16.0 / 7.0, 2.0, 3),
            (2.0, 2.5, 4),
            (7.0, 1.3, 5),
        ] {
            let g = gamma_of(q, p, n).unwrap();
            let back = best_constant_power(g, p, n, PowerMode::NegativePower).unwrap();
            assert!((back - q).abs() < 1e-10, "({q}, {p}, {n}): {back}");
        }
    }

    #[test]
    fn potential_infimum_examples() {
        assert_eq!(u_eps_inf(0.3, 2.0, 1.0).unwrap(), 0.0);
        assert!((u_eps_inf(0.01, 2.0, 2.0 / 3.0).unwrap() - 0.0125).abs() < 1e-15);
        let rho = rho_eps(0.01, 2.0);
        assert!((u_eps_inf(0.01, 2.0, rho).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(u_eps_inf(0.01, 2.0, 0.5 * rho), Err(Error::Saturated { .. })));
    }

    #[test]
    fn rho_decreases_to_zero() {
        let mut prev = 1.0;
        for i in 0..20 {
            let r = rho_eps(10f64.powi(-i), 2.5);
            assert!(r > 0.0 && r < prev);
            prev = r;
        }
        assert!(prev < 1e-7);
    }

    #[test]
    fn canonical_grid_matches_fixed_eps_range() {
        let run = canonical();
        assert_eq!(run.records.len(), 40);
        assert!((run.records[0].eps - 1e-2).abs() < 1e-15);
        assert!((run.records[39].eps / 1e-8 - 1.0).abs() < 1e-12);
        assert!(run.records.windows(2).all(|w| w[1].eps < w[0].eps));
    }

    #[test]
    fn capacity_term_is_comparable_to_rho_power() {
        let run = canonical();
        let ratios: Vec<f64> = run.records.iter().map(|r| r.cap_term / r.rho_eps).collect();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(lo > 0.0 && hi / lo < 2.0);
    }

    #[test]
    fn canonical_slope() {
        let s = summarize(&canonical()).unwrap();
        assert!((s.target_slope - 2.0).abs() < 1e-13);
        assert!(s.rel_err < 0.02, "{s:?}");
    }

    #[test]
    fn slope_ignores_constant_rescaling() {
        let mut run = canonical();
        let base = sharpness_fit(&run).unwrap();
        for r in &mut run.records {
            r.cap_term *= 17.0;
        }
        assert!((sharpness_fit(&run).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn doubled_gamma_doubles_slope() {
        let a = sharpness_fit(&canonical()).unwrap();
        let b = sharpness_fit(&run_sharpness(&SharpnessConfig::new(16.0 / 7.0, 2.0, 3)).unwrap()).unwrap();
        assert!((b / a - 2.0).abs() < 0.04);
    }

    #[test]
    fn short_grids_are_rejected() {
        let mut cfg = SharpnessConfig::new(4.0 / 3.0, 2.0, 3);
        cfg.eps_range = Some((1e-5, 1e-2));
        assert!(sharpness_fit(&run_sharpness(&cfg).unwrap()).is_err());
        let mut cfg = SharpnessConfig::new(4.0 / 3.0, 2.0, 3);
        cfg.points = 3;
        assert!(matches!(
            sharpness_fit(&run_sharpness(&cfg).unwrap()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn iterated_check_flips_at_critical_delta() {
        let run = canonical();
        let crit = 1.0 / run.gamma;
        for k in 0..3 {
            let at = iterated_sharpness_check(&run, crit, 1.0, k).unwrap();
            assert_eq!(at.verdict, IteratedVerdict::Boundary);
            let above = iterated_sharpness_check(&run, crit * (1.0 + 1e-6), 1.0, k).unwrap();
            assert_eq!(above.verdict, IteratedVerdict::Falsified);
            let below = iterated_sharpness_check(&run, crit * (1.0 - 1e-6), 1.0, k).unwrap();
            assert_eq!(below.verdict, IteratedVerdict::Consistent);
        }
        let doubled = iterated_sharpness_check(&run, 2.0 * crit, 0.5, 0).unwrap();
        assert!((doubled.fitted_slope - 0.5).abs() < 1e-10);
        assert!((doubled.predicted_slope - 0.5).abs() < 1e-15);
    }

    #[test]
    fn iterated_sides_at_saturation() {
        let gamma = 2.0;
        let k = 1;
        let eps = dyadic_radius(k + 1).powf(gamma);
        let (lhs, _) = iterated_sides(eps, gamma, 1.0, 0.5, 1.0, k);
        assert!((lhs - 1.0).abs() < 1e-14);
    }

    #[test]
    fn iterated_check_errors() {
        let run = canonical();
        assert!(iterated_sharpness_check(&run, 0.0, 1.0, 0).is_err());
        assert!(iterated_sharpness_check(&run, 0.5, -1.0, 0).is_err());
        assert!(matches!(
            iterated_sharpness_check(&run, 0.5, 1.0, 12),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        canonical().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("eps,rho_eps,inf_u,cap_term\n"));
        assert_eq!(text.lines().count(), 41);
    }
}
