//! Pairwise (cascade) summation.
//!
//! The rounding error of a pairwise sum grows as O(log n) ulp instead of the
//! O(n) of a left fold, which matters for per-series sums over long horizons.

const BLOCK: usize = 32;

/// Pairwise sum of a slice.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    pairwise_sum_by(values.len(), |k| values[k])
}

/// Pairwise sum of `term(0) + term(1) + ... + term(len - 1)`.
///
/// The summation tree depends only on `len`, so the result is reproducible for
/// a given term sequence.
pub fn pairwise_sum_by<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64,
{
    sum_range(0, len, &term)
}

fn sum_range<F>(lo: usize, hi: usize, term: &F) -> f64
where
    F: Fn(usize) -> f64,
{
    let len = hi - lo;
    if len <= BLOCK {
        let mut acc = 0.0;
        for k in lo..hi {
            acc += term(k);
        }
        return acc;
    }
    let mid = lo + len / 2;
    sum_range(lo, mid, term) + sum_range(mid, hi, term)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_and_small() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.5]), 1.5);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0]), 6.0);
    }

    #[test]
    fn beats_naive_on_long_constant_sum() {
        let n = 10_000_000;
        let naive: f64 = (0..n).map(|_| 0.1).sum();
        let pairwise = pairwise_sum_by(n, |_| 0.1);
        let exact = 1_000_000.0;
        assert!((pairwise - exact).abs() < (naive - exact).abs());
        assert!((pairwise - exact).abs() / exact < 1e-13);
    }

    proptest! {
        #[test]
        fn integers_sum_exactly(v in prop::collection::vec(-1_000_000i64..1_000_000, 0..500)) {
            let xs: Vec<f64> = v.iter().map(|&x| x as f64).collect();
            let exact: i64 = v.iter().sum();
            prop_assert_eq!(pairwise_sum(&xs), exact as f64);
        }
    }
}
