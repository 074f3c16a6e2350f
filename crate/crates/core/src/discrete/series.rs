//! Truncated power-series arithmetic.

use crate::error::{Result, RuinError};
use crate::scalar::Scalar;

/// First `terms` coefficients of `num(s) / den(s)`; needs `den[0] != 0`.
pub fn series_divide<T: Scalar>(num: &[T], den: &[T], terms: usize) -> Result<Vec<T>> {
    let d0 = den
        .first()
        .filter(|d| !d.is_zero())
        .cloned()
        .ok_or_else(|| RuinError::Domain("denominator has zero constant term".into()))?;
    let mut out: Vec<T> = Vec::with_capacity(terms);
    for n in 0..terms {
        let mut acc = num.get(n).cloned().unwrap_or_else(T::zero);
        for k in 1..=n.min(den.len().saturating_sub(1)) {
            acc = acc - den[k].clone() * out[n - k].clone();
        }
        out.push(acc / d0.clone());
    }
    Ok(out)
}

/// Product of two coefficient vectors.
pub fn poly_mul<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}
