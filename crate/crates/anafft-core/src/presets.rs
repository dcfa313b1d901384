//! Array programming presets for the measured-chip experiments.

use alloc::vec::Vec;

use crate::device::HardwareModel;
use crate::engine::ArrayBank;
use crate::math;
use crate::Result;

/// Signal class an array bank is tuned for. Images carry a large DC
/// component, so their arrays use a smaller maximum conductance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Application {
    Audio,
    Image,
}

const AUDIO: [(usize, f64); 6] = [(4, 20.0), (8, 20.0), (16, 20.0), (32, 16.7), (64, 13.3), (256, 6.17)];
const IMAGE: [(usize, f64); 7] = [(4, 20.0), (8, 20.0), (16, 20.0), (32, 10.0), (64, 5.0), (128, 2.67), (256, 1.67)];

/// Maximum conductance in siemens for a `k`-point DFT array. Sizes between
/// tabulated points are interpolated in log-log space; sizes outside clamp.
pub fn g_max(k: usize, app: Application) -> f64 {
    let t: &[(usize, f64)] = match app {
        Application::Audio => &AUDIO,
        Application::Image => &IMAGE,
    };
    let us = if k <= t[0].0 {
        t[0].1
    } else if k >= t[t.len() - 1].0 {
        t[t.len() - 1].1
    } else {
        let i = t.partition_point(|e| e.0 < k);
        let ((k0, g0), (k1, g1)) = (t[i - 1], t[i]);
        let u = (math::ln(k as f64) - math::ln(k0 as f64)) / (math::ln(k1 as f64) - math::ln(k0 as f64));
        math::exp(math::ln(g0) + u * (math::ln(g1) - math::ln(g0)))
    };
    us * 1e-6
}

/// Block-diagonal copies per array: four up to DFT-16, two for DFT-32, none
/// above.
pub fn n_tiles(k: usize) -> usize {
    match k {
        0..=16 => 4,
        17..=32 => 2,
        _ => 1,
    }
}

/// A bank holding one preset-programmed array per size.
pub fn bank(sizes: &[usize], app: Application, model: &HardwareModel) -> Result<ArrayBank> {
    let entries: Vec<(usize, f64, usize)> = sizes.iter().map(|&k| (k, g_max(k, app), n_tiles(k))).collect();
    ArrayBank::with_arrays(&entries, model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_values() {
        assert!((g_max(16, Application::Audio) - 20e-6).abs() < 1e-15);
        assert!((g_max(256, Application::Audio) - 6.17e-6).abs() < 1e-15);
        assert!((g_max(256, Application::Image) - 1.67e-6).abs() < 1e-15);
        assert!((g_max(64, Application::Image) - 5e-6).abs() < 1e-15);
        assert!((g_max(2, Application::Image) - 20e-6).abs() < 1e-15);
        assert!((g_max(1024, Application::Audio) - 6.17e-6).abs() < 1e-15);
    }

    #[test]
    fn interpolation_is_between_neighbours() {
        let g = g_max(48, Application::Audio);
        assert!(g < g_max(32, Application::Audio) && g > g_max(64, Application::Audio));
    }
}
