//! Gaussian KDE of per-utterance WER, estimated in the log domain.
//!
//! WER is non-negative, so the density of `y = ln(w)` is estimated with a
//! Gaussian kernel and mapped back with the change of variable
//! `f_W(w) = f_Y(ln w) / w`, then renormalized on the evaluation grid.
//! Zero WERs cannot be logged; they are reported as a point-mass fraction.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::scalar::Real;

pub const DEFAULT_GRID_SIZE: usize = 512;

/// Log-domain bandwidth used when the sample has no spread at all.
pub const DEGENERATE_LOG_BANDWIDTH: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeCurve<T> {
    pub grid: Vec<T>,
    pub density: Vec<T>,
    /// Bandwidth in log-WER units.
    pub bandwidth: T,
}

impl<T: Real> KdeCurve<T> {
    pub fn integral(&self) -> T {
        trapezoid(&self.grid, &self.density)
    }

    /// Grid point with the highest density.
    pub fn mode(&self) -> T {
        let i = self
            .density
            .iter()
            .enumerate()
            .fold(0, |best, (i, &d)| if d > self.density[best] { i } else { best });
        self.grid[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeEstimate<T> {
    pub curve: KdeCurve<T>,
    /// Fraction of the input that was zero (excluded from the curve).
    pub zero_fraction: T,
    pub n_positive: usize,
    pub n_zero: usize,
}

pub fn trapezoid<T: Real>(x: &[T], y: &[T]) -> T {
    let half = T::of(0.5);
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| (xs[1] - xs[0]) * (ys[0] + ys[1]) * half)
        .sum()
}

/// Linear-interpolation quantile of sorted data.
fn quantile<T: Real>(sorted: &[T], q: f64) -> T {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = T::of(pos - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Silverman's rule, `0.9 · min(sd, IQR/1.34) · n^(-1/5)`.
///
/// Falls back to whichever spread measure is non-zero, then to
/// [`DEGENERATE_LOG_BANDWIDTH`].
pub fn silverman_bandwidth<T: Real>(sorted: &[T]) -> T {
    let n = T::of_usize(sorted.len());
    let mean = sorted.iter().copied().sum::<T>() / n;
    let var = sorted.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / (n - T::one());
    let sd = var.sqrt();
    let iqr = (quantile(sorted, 0.75) - quantile(sorted, 0.25)) / T::of(1.34);
    let spread = match (sd > T::zero(), iqr > T::zero()) {
        (true, true) => sd.min(iqr),
        (true, false) => sd,
        (false, true) => iqr,
        (false, false) => return T::of(DEGENERATE_LOG_BANDWIDTH),
    };
    T::of(0.9) * spread * n.powf(T::of(-0.2))
}

/// Estimates the WER density on a log-spaced grid over `[min/2, 2·max]` of
/// the positive values.
pub fn kde_log_wer<T: Real>(values: &[T], grid_size: usize) -> Result<KdeEstimate<T>> {
    if grid_size < 2 {
        return Err(contract("KDE grid needs at least two points"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(contract("KDE input contains non-finite values"));
    }
    let mut logs: Vec<T> = values.iter().filter(|&&v| v > T::zero()).map(|v| v.ln()).collect();
    let n_positive = logs.len();
    let n_zero = values.len() - n_positive;
    if n_positive < 2 {
        return Err(contract(format!("KDE needs at least two positive values, got {n_positive}")));
    }
    logs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let h = silverman_bandwidth(&logs);

    let lo = logs[0].exp() * T::of(0.5);
    let hi = logs[n_positive - 1].exp() * T::of(2.0);
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let step = (ln_hi - ln_lo) / T::of_usize(grid_size - 1);
    let grid: Vec<T> = (0..grid_size).map(|i| (ln_lo + step * T::of_usize(i)).exp()).collect();

    let norm = T::one() / (T::of_usize(n_positive) * h * (T::PI() + T::PI()).sqrt());
    let half = T::of(0.5);
    let mut density: Vec<T> = grid
        .iter()
        .map(|&w| {
            let y = w.ln();
            let f_y = logs.iter().map(|&yi| (-(y - yi) * (y - yi) / (h * h) * half).exp()).sum::<T>() * norm;
            f_y / w
        })
        .collect();
    let area = trapezoid(&grid, &density);
    if area > T::zero() {
        for d in &mut density {
            *d = *d / area;
        }
    }
    Ok(KdeEstimate {
        curve: KdeCurve { grid, density, bandwidth: h },
        zero_fraction: T::of_usize(n_zero) / T::of_usize(values.len()),
        n_positive,
        n_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample_peaks_at_value() {
        let est = kde_log_wer(&[0.3f64; 10], DEFAULT_GRID_SIZE).unwrap();
        assert!((est.curve.integral() - 1.0).abs() < 1e-3);
        assert!((est.curve.mode() - 0.3).abs() / 0.3 < 0.01, "mode {}", est.curve.mode());
        assert_eq!(est.curve.bandwidth, DEGENERATE_LOG_BANDWIDTH);
    }

    #[test]
    fn zeros_become_point_mass() {
        let est = kde_log_wer(&[0.0f64, 0.0, 0.1, 0.2, 0.4, 0.0], 64).unwrap();
        assert_eq!(est.n_zero, 3);
        assert_eq!(est.n_positive, 3);
        assert_eq!(est.zero_fraction, 0.5);
        assert!(kde_log_wer(&[0.0f64, 0.0, 0.1], 64).is_err());
    }

    #[test]
    fn grid_bounds() {
        let est = kde_log_wer(&[0.1f64, 0.2, 0.8], 100).unwrap();
        let g = &est.curve.grid;
        assert_eq!(g.len(), 100);
        assert!((g[0] - 0.05).abs() < 1e-12);
        assert!((g[99] - 1.6).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn silverman_matches_hand_computation() {
        // logs = [0, 1, 2, 3]: sd = 1.2909944, IQR = 1.5 -> 1.5 / 1.34 = 1.1194030
        let h = silverman_bandwidth(&[0.0f64, 1.0, 2.0, 3.0]);
        let expected = 0.9 * 1.5 / 1.34 * 4f64.powf(-0.2);
        assert!((h - expected).abs() < 1e-12);
    }

    #[test]
    fn f32_curve_normalizes() {
        let est = kde_log_wer(&[0.05f32, 0.1, 0.5, 1.2, 0.3], 256).unwrap();
        assert!((est.curve.integral() - 1.0).abs() < 1e-3);
    }
}
