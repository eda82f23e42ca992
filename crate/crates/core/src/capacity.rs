//! Variational `p`-capacity of radial condensers and capacity-density profiles.

use std::f64::consts::PI;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_domain, Error, Result};
use crate::summation::NeumaierSum;

/// Surface measure of the unit sphere in `R^n`, `2 pi^{n/2} / Gamma(n/2)`.
pub fn unit_sphere_area(n: u32) -> f64 {
    assert!(n >= 1);
    // Gamma(n/2) by the half-integer recursion
    let mut gamma = if n.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut k = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while k + 1.0 <= n as f64 / 2.0 {
        gamma *= k;
        k += 1.0;
    }
    2.0 * PI.powf(n as f64 / 2.0) / gamma
}

/// Concentric balls `B(0, rho)` inside `B(0, r)` in `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condenser {
    pub n: u32,
    pub p: f64,
    pub rho: f64,
    pub r: f64,
}

impl Condenser {
    pub fn new(n: u32, p: f64, rho: f64, r: f64) -> Result<Self> {
        ensure_domain!(n >= 2, "condensers need dimension n >= 2 (got {n})");
        ensure_domain!(
            p.is_finite() && p > 1.0 && p <= n as f64,
            "condensers need 1 < p <= n (p = {p}, n = {n})"
        );
        ensure_domain!(
            rho.is_finite() && r.is_finite() && rho > 0.0 && rho < r,
            "radii must satisfy 0 < rho < r (rho = {rho}, r = {r})"
        );
        Ok(Self { n, p, rho, r })
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(self.n, self.p, t * self.rho, t * self.r)
    }
}

/// Exact capacity `cp_p(B(0, rho), B(0, r))`.
pub fn radial_capacity(c: &Condenser) -> f64 {
    let n = c.n as f64;
    let p = c.p;
    let omega = unit_sphere_area(c.n);
    if p == n {
        omega * (c.r / c.rho).ln().powf(1.0 - n)
    } else {
        let k = (p - n) / (p - 1.0);
        omega * ((n - p) / (p - 1.0)).powf(p - 1.0) * (c.rho.powf(k) - c.r.powf(k)).powf(1.0 - p)
    }
}

/// Discrete minimizer of the radial `p`-energy.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// Log-spaced nodes from `rho` to `r`.
    pub radii: Vec<f64>,
    /// Nodal values, `1` at `rho` and `0` at `r`.
    pub values: Vec<f64>,
    pub energy: f64,
}

/// Minimizes `omega_{n-1} * int_rho^r |u'(t)|^p t^{n-1} dt` over continuous
/// piecewise-linear `u` on a log-spaced grid with `u(rho) = 1`, `u(r) = 0`.
///
/// On a segment of length `h_i` carrying weight `w_i = int t^{n-1}` the energy
/// of a drop `d_i` is `a_i |d_i|^p` with `a_i = w_i / h_i^p`. Minimizing
/// `sum a_i |d_i|^p` subject to `sum d_i = 1` gives
/// `d_i = c_i / sum c_j` with `c_i = a_i^{-1/(p-1)}`, and the minimum
/// `(sum c_j)^{1-p}`.
pub fn radial_oracle_solution(c: &Condenser, grid_points: usize) -> Result<OracleSolution> {
    ensure_domain!(
        grid_points >= 100,
        "oracle grid needs at least 100 points (got {grid_points})"
    );
    let n = c.n as f64;
    let p = c.p;
    let segments = grid_points - 1;
    let step = (c.r / c.rho).ln() / segments as f64;
    let radii: Vec<f64> = (0..grid_points)
        .map(|i| {
            if i == segments {
                c.r
            } else {
                c.rho * (step * i as f64).exp()
            }
        })
        .collect();

    let growth = step.exp_m1();
    let weight_growth = (n * step).exp_m1() / n;
    let conductance: Vec<f64> = radii[..segments]
        .iter()
        .map(|&t| {
            let h = t * growth;
            let w = t.powf(n) * weight_growth;
            // a^{-1/(p-1)} = (h^p / w)^{1/(p-1)}
            ((p * h.ln() - w.ln()) / (p - 1.0)).exp()
        })
        .collect();
    let total = conductance.iter().copied().collect::<NeumaierSum>().value();
    ensure_domain!(total.is_finite() && total > 0.0, "oracle weights degenerate for {c:?}");

    let mut values = Vec::with_capacity(grid_points);
    let mut drop = NeumaierSum::new();
    values.push(1.0);
    for &ci in &conductance[..segments - 1] {
        drop.add(ci);
        values.push(1.0 - drop.value() / total);
    }
    values.push(0.0);

    Ok(OracleSolution {
        radii,
        values,
        energy: unit_sphere_area(c.n) * total.powf(1.0 - p),
    })
}

/// Minimum discrete radial energy; see [`radial_oracle_solution`].
pub fn radial_capacity_oracle(c: &Condenser, grid_points: usize) -> Result<f64> {
    Ok(radial_oracle_solution(c, grid_points)?.energy)
}

/// Setting for a capacity profile: dimension, exponent and the geometric
/// radii `r_j = r0 * ratio^j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileGeometry {
    pub n: u32,
    pub p: f64,
    pub ratio: f64,
    pub r0: f64,
}

impl ProfileGeometry {
    pub fn new(n: u32, p: f64, ratio: f64, r0: f64) -> Result<Self> {
        ensure_domain!(n >= 2, "profiles need dimension n >= 2 (got {n})");
        ensure_domain!(
            p.is_finite() && p > 1.0 && p <= n as f64,
            "profiles need 1 < p <= n (p = {p}, n = {n})"
        );
        ensure_domain!(
            ratio > 0.0 && ratio < 1.0,
            "radius ratio must lie in (0, 1) (got {ratio})"
        );
        ensure_domain!(r0.is_finite() && r0 > 0.0, "initial radius must be positive");
        Ok(Self { n, p, ratio, r0 })
    }

    /// Halving radii starting from 1.
    pub fn dyadic(n: u32, p: f64) -> Result<Self> {
        Self::new(n, p, 0.5, 1.0)
    }
}

/// Density `cp_p(B(0, ratio r), B(0, r)) / r^{n-p}` of a full ball, the
/// largest possible value of any profile term. Independent of `r`.
pub fn ball_density(g: &ProfileGeometry) -> f64 {
    radial_capacity(&Condenser {
        n: g.n,
        p: g.p,
        rho: g.ratio,
        r: 1.0,
    })
}

/// Normalized capacity densities `kappa_j` at radii `r_j = r0 * ratio^j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityProfile {
    pub r0: f64,
    pub ratio: f64,
    pub kappa: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProfileRow {
    j: usize,
    r_j: f64,
    kappa_j: f64,
}

impl CapacityProfile {
    pub fn new(r0: f64, ratio: f64, kappa: Vec<f64>) -> Result<Self> {
        ensure_domain!(r0.is_finite() && r0 > 0.0, "initial radius must be positive");
        ensure_domain!(
            ratio > 0.0 && ratio < 1.0,
            "radius ratio must lie in (0, 1) (got {ratio})"
        );
        if let Some((j, k)) = kappa.iter().enumerate().find(|(_, k)| !(k.is_finite() && **k >= 0.0)) {
            return Err(Error::Domain(format!("kappa_{j} = {k} is not a non-negative number")));
        }
        Ok(Self { r0, ratio, kappa })
    }

    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }

    pub fn radius(&self, j: usize) -> f64 {
        self.r0 * self.ratio.powi(j as i32)
    }

    /// Writes `j,r_j,kappa_j` rows with a header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        for (j, &kappa_j) in self.kappa.iter().enumerate() {
            w.serialize(ProfileRow {
                j,
                r_j: self.radius(j),
                kappa_j,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format written by [`CapacityProfile::write_csv`]. The ratio
    /// is recovered from the first two radii (1/2 for a single row).
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut radii = Vec::new();
        let mut kappa = Vec::new();
        for (expected, row) in rdr.deserialize::<ProfileRow>().enumerate() {
            let row = row?;
            ensure_domain!(
                row.j == expected,
                "profile rows must be numbered 0, 1, 2, ... (row {expected} has j = {})",
                row.j
            );
            radii.push(row.r_j);
            kappa.push(row.kappa_j);
        }
        ensure_domain!(!kappa.is_empty(), "profile file has no rows");
        let ratio = if radii.len() >= 2 { radii[1] / radii[0] } else { 0.5 };
        Self::new(radii[0], ratio, kappa)
    }
}

/// Profile of a complement containing a whole ball around the point: all
/// terms equal the full-ball density.
pub fn profile_ball(g: &ProfileGeometry, count: usize) -> CapacityProfile {
    CapacityProfile {
        r0: g.r0,
        ratio: g.ratio,
        kappa: vec![ball_density(g); count],
    }
}

/// Model profile `kappa_j = scale * (j + 1)^{-a}` for thin complements.
pub fn profile_power_decay(g: &ProfileGeometry, a: f64, scale: f64, count: usize) -> Result<CapacityProfile> {
    ensure_domain!(
        a.is_finite() && a >= 0.0,
        "decay exponent must be non-negative (got {a})"
    );
    let bound = ball_density(g);
    ensure_domain!(
        scale.is_finite() && scale > 0.0 && scale <= bound,
        "scale must lie in (0, {bound}], the full-ball density (got {scale})"
    );
    let kappa = (0..count).map(|j| scale * ((j + 1) as f64).powf(-a)).collect();
    Ok(CapacityProfile {
        r0: g.r0,
        ratio: g.ratio,
        kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn sphere_areas() {
        assert!(rel(unit_sphere_area(1), 2.0) < 1e-15);
        assert!(rel(unit_sphere_area(2), 2.0 * PI) < 1e-15);
        assert!(rel(unit_sphere_area(3), 4.0 * PI) < 1e-15);
        assert!(rel(unit_sphere_area(4), 2.0 * PI * PI) < 1e-15);
        assert!(rel(unit_sphere_area(5), 8.0 * PI * PI / 3.0) < 1e-15);
    }

    #[test]
    fn closed_form_examples() {
        let e = std::f64::consts::E;
        let c = Condenser::new(2, 2.0, 1.0 / e, 1.0).unwrap();
        assert!(rel(radial_capacity(&c), 2.0 * PI) < 1e-14);

        let c = Condenser::new(3, 2.0, 1.0, 1e12).unwrap();
        assert!(rel(radial_capacity(&c), 4.0 * PI) < 1e-11);

        let c = Condenser::new(3, 2.0, 1.0, 2.0).unwrap();
        assert!(rel(radial_capacity(&c), 8.0 * PI) < 1e-14);
        let oracle = radial_capacity_oracle(&c, 10_000).unwrap();
        assert!(rel(oracle, 8.0 * PI) < 5e-3);
    }

    #[test]
    fn condenser_validation() {
        assert!(Condenser::new(1, 1.5, 0.1, 1.0).is_err());
        assert!(Condenser::new(3, 1.0, 0.1, 1.0).is_err());
        assert!(Condenser::new(3, 3.5, 0.1, 1.0).is_err());
        assert!(Condenser::new(3, 2.0, 1.0, 1.0).is_err());
        assert!(Condenser::new(3, 2.0, 0.0, 1.0).is_err());
        assert!(Condenser::new(3, 3.0, 0.1, 1.0).is_ok());
    }

    #[test]
    fn oracle_grid_floor() {
        let c = Condenser::new(3, 2.0, 0.5, 1.0).unwrap();
        assert!(matches!(radial_capacity_oracle(&c, 99), Err(Error::Domain(_))));
    }

    #[test]
    fn oracle_decreases_under_nested_refinement() {
        for &(n, p) in &[(2, 2.0), (3, 1.5), (4, 4.0), (4, 2.5)] {
            let c = Condenser::new(n, p, 0.1, 1.0).unwrap();
            let mut prev = f64::INFINITY;
            let mut points = 100;
            for _ in 0..5 {
                let e = radial_capacity_oracle(&c, points).unwrap();
                assert!(e < prev, "n={n} p={p} points={points}");
                assert!(e >= radial_capacity(&c) * (1.0 - 1e-12));
                prev = e;
                points = 2 * points - 1;
            }
        }
    }

    #[test]
    fn harmonic_profile_in_the_plane() {
        let c = Condenser::new(2, 2.0, 0.1, 1.0).unwrap();
        let sol = radial_oracle_solution(&c, 10_000).unwrap();
        let denom = (c.r / c.rho).ln();
        let worst = sol
            .radii
            .iter()
            .zip(&sol.values)
            .map(|(&t, &u)| (u - (c.r / t).ln() / denom).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "{worst}");
        assert_eq!(sol.values[0], 1.0);
        assert_eq!(*sol.values.last().unwrap(), 0.0);
        assert!(sol.values.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn ball_profile_is_scale_invariant() {
        let g = ProfileGeometry::new(3, 2.0, 0.5, 1.0).unwrap();
        let prof = profile_ball(&g, 12);
        assert!(prof.kappa.iter().all(|&k| k == prof.kappa[0] && k > 0.0));
        for j in 0..12 {
            let rj = prof.radius(j);
            let c = Condenser::new(3, 2.0, 0.5 * rj, rj).unwrap();
            let direct = radial_capacity(&c) / rj;
            assert!(rel(direct, prof.kappa[j]) < 1e-12);
        }
        // 4 pi (1/rho - 1/r)^{-1} / r with rho = r/2
        assert!(rel(prof.kappa[0], 4.0 * PI) < 1e-14);
    }

    #[test]
    fn power_decay_profile() {
        let g = ProfileGeometry::dyadic(3, 2.0).unwrap();
        let flat = profile_power_decay(&g, 0.0, 1.0, 5).unwrap();
        assert!(flat.kappa.iter().all(|&k| k == 1.0));
        let prof = profile_power_decay(&g, 1.0, 1.0, 10).unwrap();
        assert!((prof.kappa[5] - 1.0 / 6.0).abs() < 1e-16);
        assert!(prof.kappa.windows(2).all(|w| w[1] <= w[0]));
        assert!(profile_power_decay(&g, 1.0, 20.0, 10).is_err());
        assert!(profile_power_decay(&g, -1.0, 1.0, 10).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = ProfileGeometry::dyadic(3, 2.0).unwrap();
        let prof = profile_power_decay(&g, 0.7, 2.0, 6).unwrap();
        let mut buf = Vec::new();
        prof.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("j,r_j,kappa_j\n0,1.0,2.0\n"), "{text}");
        let back = CapacityProfile::read_csv(&buf[..]).unwrap();
        assert_eq!(back, prof);
    }

    #[test]
    fn csv_rejects_bad_rows() {
        let gap = "j,r_j,kappa_j\n0,1,0.5\n2,0.5,0.2\n";
        assert!(CapacityProfile::read_csv(gap.as_bytes()).is_err());
        let neg = "j,r_j,kappa_j\n0,1,-0.5\n";
        assert!(CapacityProfile::read_csv(neg.as_bytes()).is_err());
        assert!(CapacityProfile::read_csv("j,r_j,kappa_j\n".as_bytes()).is_err());
    }
}
