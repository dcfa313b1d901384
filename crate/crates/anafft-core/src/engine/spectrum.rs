use alloc::vec::Vec;

use crate::tensor::ComplexTensor;
use crate::{Error, Result, C64};

/// One-sided magnitude spectrum of length `N/2` for a real input: bin `f`
/// is the mean of `|X_f|` and `|X_{N-f}|`, the DC bin is passed through.
pub fn symmetrize_spectrum(x: &[C64]) -> Vec<f64> {
    let n = x.len();
    (0..n / 2)
        .map(|f| if f == 0 { x[0].norm() } else { 0.5 * (x[f].norm() + x[n - f].norm()) })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StreakDiagnostic {
    /// Mean absolute error over the DC row and DC column.
    pub dc_error: f64,
    pub median_error: f64,
    /// `dc_error > 3 * median_error`.
    pub flagged: bool,
}

/// Detects the DC-row/column error streaks that clipping produces in direct
/// 2-D transforms of non-negative images.
pub fn dc_streak_diagnostic(analog: &ComplexTensor, reference: &ComplexTensor) -> Result<StreakDiagnostic> {
    if analog.shape() != reference.shape() || analog.ndim() != 2 {
        return Err(Error::Shape("diagnostic needs two 2-D spectra of equal shape".into()));
    }
    let (m, n) = (analog.shape()[0], analog.shape()[1]);
    let err: Vec<f64> = analog.data().iter().zip(reference.data()).map(|(a, b)| (a - b).norm()).collect();
    let mut dc = 0.0;
    let mut count = 0usize;
    for i in 0..m {
        for j in 0..n {
            if i == 0 || j == 0 {
                dc += err[i * n + j];
                count += 1;
            }
        }
    }
    let dc_error = dc / count.max(1) as f64;
    let mut sorted = err;
    sorted.sort_by(f64::total_cmp);
    let median_error = if sorted.is_empty() { 0.0 } else { sorted[sorted.len() / 2] };
    Ok(StreakDiagnostic { dc_error, median_error, flagged: dc_error > 3.0 * median_error })
}
