use alloc::format;
use alloc::vec::Vec;

use super::input::plane_bit;
use super::mvm::{column_sums, Columns};
use super::{complex_components, map_matrix_to_targets, quantize_input, HardwareModel, InputEncoding, ProgrammedArray};
use crate::math;
use crate::tensor::ComplexMatrix;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalibrationOptions {
    pub encoding: InputEncoding,
    pub n_tiles: usize,
    /// Fraction of column currents (in percent) that must stay in range.
    pub percentile: f64,
    pub ceiling: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self { encoding: InputEncoding::Signed { bits: 13 }, n_tiles: 1, percentile: 99.99, ceiling: 20e-6 }
    }
}

/// Column currents (before noise and IR drop) produced by `samples` on `w`
/// programmed at unit `g_max`; multiply by `g_max` for a real array.
pub fn unit_column_currents(
    w: &ComplexMatrix,
    samples: &[Vec<C64>],
    model: &HardwareModel,
    opts: &CalibrationOptions,
) -> Result<Vec<f64>> {
    let grid = map_matrix_to_targets(w, 1.0, opts.n_tiles)?;
    let unit = ProgrammedArray::from_parts(grid.layout, 1.0, 0, grid.values.clone(), grid.values)?;
    let layout = unit.layout();
    let enc = opts.encoding;
    let mb = enc.magnitude_bits();
    let polarities: &[bool] = if enc.is_signed() { &[false, true] } else { &[false] };
    let mut currents = Vec::new();
    let mut rows = Vec::new();
    for x in samples {
        if x.len() != w.cols() {
            return Err(Error::Shape(format!("sample of length {} for a {}-input array", x.len(), w.cols())));
        }
        let planes = quantize_input(&complex_components(x), enc)?;
        for &neg in polarities {
            let mut bit = 0;
            while bit < mb {
                let used = layout.n_tiles.min((mb - bit) as usize);
                rows.clear();
                for t in 0..used {
                    for (comp, &v) in planes.ints().iter().enumerate() {
                        if plane_bit(v, bit + t as u32, neg) {
                            rows.push(layout.row(t, comp));
                        }
                    }
                }
                let (sum, _) = column_sums(&unit, &rows, Columns::All, false);
                let active = used * 4 * layout.k_out;
                currents.extend(sum[..active].iter().map(|s| s * model.read_voltage));
                bit += used as u32;
            }
        }
    }
    Ok(currents)
}

/// Largest `g_max <= ceiling` for which at most `100 - percentile` percent
/// of the column currents exceed the ADC range, found by bisection on the
/// noise-free workload. An all-zero workload returns the ceiling.
pub fn calibrate_gmax(
    w: &ComplexMatrix,
    samples: &[Vec<C64>],
    model: &HardwareModel,
    opts: &CalibrationOptions,
) -> Result<f64> {
    if !(opts.percentile > 0.0 && opts.percentile <= 100.0) {
        return Err(Error::InvalidArgument(format!("percentile {} outside (0, 100]", opts.percentile)));
    }
    if !(opts.ceiling.is_finite() && opts.ceiling > 0.0) {
        return Err(Error::InvalidArgument("g_max ceiling must be positive".into()));
    }
    let mut currents = unit_column_currents(w, samples, model, opts)?;
    currents.sort_by(f64::total_cmp);
    let allowed = math::floor((1.0 - opts.percentile / 100.0) * currents.len() as f64 + 1e-9) as usize;
    let passes = |g: f64| {
        let over = currents.len() - currents.partition_point(|&u| u * g <= model.adc_range_max);
        over <= allowed
    };
    if passes(opts.ceiling) {
        return Ok(opts.ceiling);
    }
    let (mut lo, mut hi) = (0.0, opts.ceiling);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if passes(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * opts.ceiling {
            break;
        }
    }
    Ok(lo)
}
