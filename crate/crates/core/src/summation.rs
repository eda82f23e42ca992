//! Compensated summation.

use crate::par;

/// Kahan–Babuška (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        // after an overflow the compensation holds inf - inf
        if self.sum.is_finite() {
            self.sum + self.compensation
        } else {
            self.sum
        }
    }
}

impl Extend<f64> for NeumaierSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

/// Compensated sum of a slice.
pub fn neumaier_sum(values: &[f64]) -> f64 {
    values.iter().copied().collect::<NeumaierSum>().value()
}

/// Running compensated prefix sums: `out[k] = values[0] + ... + values[k]`.
pub fn prefix_sums(values: &[f64]) -> Vec<f64> {
    let mut acc = NeumaierSum::new();
    values
        .iter()
        .map(|&v| {
            acc.add(v);
            acc.value()
        })
        .collect()
}

const PAIRWISE_LEAF: usize = 256;
const PARALLEL_SPLIT: usize = 1 << 14;

/// Pairwise (tree) sum with compensated leaves.
///
/// The tree shape depends only on the slice length, so the result is
/// bit-identical with and without the `parallel` feature.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_LEAF {
        return neumaier_sum(values);
    }
    let (left, right) = values.split_at(values.len() / 2);
    if values.len() >= PARALLEL_SPLIT {
        let (a, b) = par::join(|| pairwise_sum(left), || pairwise_sum(right));
        a + b
    } else {
        pairwise_sum(left) + pairwise_sum(right)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_small_terms() {
        let mut values = vec![1.0];
        values.extend(std::iter::repeat_n(1e-16, 10_000));
        let naive: f64 = values.iter().sum();
        assert_eq!(naive, 1.0);
        assert!((neumaier_sum(&values) - (1.0 + 1e-12)).abs() < 1e-24);
        assert!((pairwise_sum(&values) - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn cancellation() {
        let values = [1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(&values), 1.0);
    }

    #[test]
    fn prefix_sums_of_harmonic_terms() {
        let terms: Vec<f64> = (1..=1000).map(|k| 1.0 / k as f64).collect();
        let s = prefix_sums(&terms);
        assert_eq!(s.len(), 1000);
        assert!(s.windows(2).all(|w| w[1] >= w[0]));
        // H_1000
        assert!((s[999] - 7.485_470_860_550_345).abs() < 1e-13);
    }

    #[test]
    fn pairwise_is_deterministic_over_large_inputs() {
        let values: Vec<f64> = (0..100_000).map(|k| ((k as f64) * 0.37).sin()).collect();
        let a = pairwise_sum(&values);
        let b = pairwise_sum(&values);
        assert_eq!(a.to_bits(), b.to_bits());
        assert!((a - neumaier_sum(&values)).abs() < 1e-10);
    }

    #[test]
    fn overflow_gives_infinity() {
        assert_eq!(neumaier_sum(&[f64::MAX, f64::MAX, 1.0]), f64::INFINITY);
        assert_eq!(prefix_sums(&[1.0, f64::INFINITY, 2.0])[2], f64::INFINITY);
    }
}
