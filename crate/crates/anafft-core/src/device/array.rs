use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::HardwareModel;
use crate::math;
use crate::rng::{gaussian, hash_words};
use crate::tensor::ComplexMatrix;
use crate::{Error, Result};

/// Physical arrangement of a complex `k_out x k_in` matrix on a crossbar.
///
/// Rows carry inputs as `[Re x_0 .. Re x_{k_in-1}, Im x_0 .. Im x_{k_in-1}]`.
/// Logical output columns are `[Re y_0 .., Im y_0 ..]`, each expanded into an
/// adjacent `(G+, G-)` pair. The four real quadrants are therefore
/// `Re -> Re: Re w`, `Im -> Re: -Im w`, `Re -> Im: Im w`, `Im -> Im: Re w`.
/// With `n_tiles > 1` the whole block is repeated along the diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Layout {
    pub k_in: usize,
    pub k_out: usize,
    pub n_tiles: usize,
}

impl Layout {
    pub fn rows(&self) -> usize {
        2 * self.k_in * self.n_tiles
    }

    pub fn cols(&self) -> usize {
        4 * self.k_out * self.n_tiles
    }

    /// Physical row of real input component `comp` (`0..2 k_in`) in `tile`.
    #[inline]
    pub fn row(&self, tile: usize, comp: usize) -> usize {
        tile * 2 * self.k_in + comp
    }

    /// Physical column of logical output `j` (`0..2 k_out`) in `tile`.
    #[inline]
    pub fn col(&self, tile: usize, j: usize, negative: bool) -> usize {
        tile * 4 * self.k_out + 2 * j + negative as usize
    }
}

/// Target conductances for a layout, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetGrid {
    pub layout: Layout,
    pub g_max: f64,
    pub values: Vec<f64>,
}

/// Maps `w` (outputs x inputs, all components in `[-1, 1]`) to differential
/// target conductances with `|w| g_max` on the signed side of each pair.
pub fn map_matrix_to_targets(w: &ComplexMatrix, g_max: f64, n_tiles: usize) -> Result<TargetGrid> {
    if !(g_max.is_finite() && g_max > 0.0) {
        return Err(Error::InvalidArgument(format!("g_max must be positive, got {g_max}")));
    }
    if n_tiles == 0 {
        return Err(Error::InvalidArgument("n_tiles must be at least 1".into()));
    }
    if let Some(v) = w.data().iter().find(|c| c.re.abs() > 1.0 + 1e-12 || c.im.abs() > 1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!("weight {v} is outside the programmable range")));
    }
    let layout = Layout { k_in: w.cols(), k_out: w.rows(), n_tiles };
    let cols = layout.cols();
    let mut values = vec![0.0; layout.rows() * cols];
    let (ki, ko) = (layout.k_in, layout.k_out);
    let mut put = |row: usize, j: usize, tile: usize, v: f64| {
        let v = v.clamp(-1.0, 1.0);
        values[row * cols + layout.col(tile, j, false)] = v.max(0.0) * g_max;
        values[row * cols + layout.col(tile, j, true)] = (-v).max(0.0) * g_max;
    };
    for t in 0..n_tiles {
        for n in 0..ki {
            let (re_row, im_row) = (layout.row(t, n), layout.row(t, ki + n));
            for k in 0..ko {
                let c = w.at(k, n);
                put(re_row, k, t, c.re);
                put(im_row, k, t, -c.im);
                put(re_row, ko + k, t, c.im);
                put(im_row, ko + k, t, c.re);
            }
        }
    }
    Ok(TargetGrid { layout, g_max, values })
}

/// `map_matrix_to_targets` for a DFT (or any square) matrix.
pub fn map_dft_to_targets(w: &ComplexMatrix, g_max: f64, n_tiles: usize) -> Result<TargetGrid> {
    if w.rows() != w.cols() {
        return Err(Error::Shape(format!("DFT matrix must be square, got {}x{}", w.rows(), w.cols())));
    }
    map_matrix_to_targets(w, g_max, n_tiles)
}

/// A crossbar after programming: targets plus the conductances actually
/// reached.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgrammedArray {
    layout: Layout,
    g_max: f64,
    array_id: u64,
    target: Vec<f64>,
    actual: Vec<f64>,
}

impl ProgrammedArray {
    pub fn from_parts(layout: Layout, g_max: f64, array_id: u64, target: Vec<f64>, actual: Vec<f64>) -> Result<Self> {
        let n = layout.rows() * layout.cols();
        if target.len() != n || actual.len() != n {
            return Err(Error::Shape(format!(
                "layout needs {n} cells, got {} targets and {} actual",
                target.len(),
                actual.len()
            )));
        }
        Ok(Self { layout, g_max, array_id, target, actual })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn g_max(&self) -> f64 {
        self.g_max
    }

    pub fn array_id(&self) -> u64 {
        self.array_id
    }

    pub fn rows(&self) -> usize {
        self.layout.rows()
    }

    pub fn cols(&self) -> usize {
        self.layout.cols()
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn actual(&self) -> &[f64] {
        &self.actual
    }

    #[inline]
    pub fn actual_row(&self, row: usize) -> &[f64] {
        let c = self.cols();
        &self.actual[row * c..(row + 1) * c]
    }

    /// Weights as stored in `tile`, decoded from the rows driven by real
    /// input parts.
    pub fn decoded_weights(&self, tile: usize) -> ComplexMatrix {
        let l = self.layout;
        let c = self.cols();
        let g = &self.actual;
        let diff = |row: usize, j: usize| {
            (g[row * c + l.col(tile, j, false)] - g[row * c + l.col(tile, j, true)]) / self.g_max
        };
        ComplexMatrix::from_fn(l.k_out, l.k_in, |k, n| {
            let row = l.row(tile, n);
            crate::C64::new(diff(row, k), diff(row, l.k_out + k))
        })
    }
}

/// `g = max(0, g_target + N(mu, sigma))`, keyed on `(seed, array_id, row, col)`.
pub fn program(targets: &TargetGrid, model: &HardwareModel, array_id: u64) -> Result<ProgrammedArray> {
    model.validate()?;
    let cols = targets.layout.cols();
    let actual = targets
        .values
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let (sigma, mu) = model.programming_error(t);
            if sigma == 0.0 && mu == 0.0 {
                return t;
            }
            let key = hash_words(&[model.rng_seed, array_id, (i / cols) as u64, (i % cols) as u64]);
            (t + mu + sigma * gaussian(key)).max(0.0)
        })
        .collect();
    ProgrammedArray::from_parts(targets.layout, targets.g_max, array_id, targets.values.clone(), actual)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightErrorStats {
    pub mae_magnitude: f64,
    /// Radians, wrapped to `[0, pi]`.
    pub mae_phase: f64,
    pub count: usize,
}

/// Mean absolute magnitude and phase error of the stored weights against
/// `reference`, pooled over all tiles.
pub fn weight_error_stats(array: &ProgrammedArray, reference: &ComplexMatrix) -> Result<WeightErrorStats> {
    let l = array.layout();
    if reference.rows() != l.k_out || reference.cols() != l.k_in {
        return Err(Error::Shape(format!(
            "reference is {}x{}, array holds {}x{}",
            reference.rows(),
            reference.cols(),
            l.k_out,
            l.k_in
        )));
    }
    let (mut mag, mut phase, mut count) = (0.0, 0.0, 0usize);
    for t in 0..l.n_tiles {
        let w = array.decoded_weights(t);
        for (a, b) in w.data().iter().zip(reference.data()) {
            mag += (a.norm() - b.norm()).abs();
            let mut d = math::atan2(a.im, a.re) - math::atan2(b.im, b.re);
            let tau = 2.0 * core::f64::consts::PI;
            d -= tau * math::floor(d / tau + 0.5);
            phase += d.abs();
            count += 1;
        }
    }
    let n = count.max(1) as f64;
    Ok(WeightErrorStats { mae_magnitude: mag / n, mae_phase: phase / n, count })
}
