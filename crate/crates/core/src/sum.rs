//! Order-fixed summation.
//!
//! Every reduction in the crate goes through [`pairwise`], which splits the
//! slice recursively at its midpoint. The association order depends only on
//! the slice length, so the result is reproducible regardless of how the
//! values were produced.

use num_complex::Complex64;
use std::ops::Add;

const LEAF: usize = 8;

pub fn pairwise<T>(values: &[T]) -> T
where
    T: Copy + Add<Output = T> + Default,
{
    if values.len() <= LEAF {
        let mut acc = T::default();
        for &v in values {
            acc = acc + v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise(&values[..mid]) + pairwise(&values[mid..])
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    pairwise(values) / values.len() as f64
}

pub fn complex_sum(values: &[Complex64]) -> Complex64 {
    pairwise(values)
}

/// Maximum ignoring NaN; `-inf` for an empty slice.
pub fn max(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
