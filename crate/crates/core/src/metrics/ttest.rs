//! Paired two-sided Student t-test.

use serde::{Deserialize, Serialize};

use super::special::student_t_two_sided_p;
use crate::error::{contract, Result};
use crate::scalar::Real;

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTestResult<T> {
    pub t_statistic: T,
    pub dof: usize,
    pub p_value: T,
    pub significant: bool,
}

/// Tests whether the mean of `a[i] - b[i]` differs from zero.
///
/// All-zero differences leave t undefined; this is reported as t = 0,
/// p = 1. Constant non-zero differences give an infinite t and p = 0.
pub fn paired_t_test<T: Real>(a: &[T], b: &[T]) -> Result<PairedTestResult<T>> {
    if a.len() != b.len() {
        return Err(contract(format!("paired samples differ in length ({} vs {})", a.len(), b.len())));
    }
    let n = a.len();
    if n < 2 {
        return Err(contract("paired t-test needs at least two pairs"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(contract("paired t-test inputs must be finite"));
    }
    let diffs: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
    let nf = T::of_usize(n);
    let mean = diffs.iter().copied().sum::<T>() / nf;
    let ss: T = diffs.iter().map(|&d| (d - mean) * (d - mean)).sum();
    let sd = (ss / (nf - T::one())).sqrt();
    let dof = n - 1;

    let t = if sd > T::zero() {
        mean / (sd / nf.sqrt())
    } else if mean == T::zero() {
        return Ok(PairedTestResult { t_statistic: T::zero(), dof, p_value: T::one(), significant: false });
    } else {
        T::infinity().copysign(mean)
    };
    let p = student_t_two_sided_p(t, T::of_usize(dof));
    Ok(PairedTestResult { t_statistic: t, dof, p_value: p, significant: p < T::of(SIGNIFICANCE_LEVEL) })
}
