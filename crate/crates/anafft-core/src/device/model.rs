use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Piecewise-linear function given by `(x, y)` knots with ascending `x`.
/// Flat outside the knot range.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(transparent))]
pub struct Pwl {
    pub points: Vec<(f64, f64)>,
}

impl Pwl {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        let p = Self { points };
        p.validate()?;
        Ok(p)
    }

    pub fn zero() -> Self {
        Self { points: vec![(0.0, 0.0)] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Model("piecewise-linear table has no points".into()));
        }
        if self.points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Model("piecewise-linear table has non-finite values".into()));
        }
        if self.points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Model("piecewise-linear knots must be strictly ascending".into()));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x <= pts[0].0 {
            return pts[0].1;
        }
        let last = pts[pts.len() - 1];
        if x >= last.0 {
            return last.1;
        }
        let i = pts.partition_point(|p| p.0 <= x);
        let (x0, y0) = pts[i - 1];
        let (x1, y1) = pts[i];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Crossbar, converter and noise parameters. Conductances are in siemens,
/// currents in amperes, voltages in volts.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct HardwareModel {
    pub read_voltage: f64,
    pub adc_bits: u32,
    pub adc_step: f64,
    pub adc_range_max: f64,
    /// Skip ADC rounding and clipping entirely.
    pub adc_ideal: bool,
    /// Programming-error standard deviation versus target conductance.
    pub sigma_prog: Pwl,
    /// Standard deviation after drift, used when `drifted` is set.
    pub sigma_drift: Pwl,
    /// Mean conductance shift after drift, used when `drifted` is set.
    pub drift_mean: Pwl,
    pub drifted: bool,
    /// Relative per-cell read noise (multiplicative, per MVM).
    pub read_noise_gamma: f64,
    /// IR-drop coefficient `c`: fractional current loss at full-scale current.
    pub ir_drop_coeff: f64,
    pub rng_seed: u64,
}

impl Default for HardwareModel {
    fn default() -> Self {
        Self::standard()
    }
}

impl HardwareModel {
    /// Measured-device defaults: 12-bit ADC with a 4.88 nA step clipped at
    /// 17 uA, 0.06 V read pulses, 1% read noise.
    pub fn standard() -> Self {
        Self {
            read_voltage: 0.06,
            adc_bits: 12,
            adc_step: 4.88e-9,
            adc_range_max: 17e-6,
            adc_ideal: false,
            // min(0.02 G + 5 nS, 0.4 uS)
            sigma_prog: Pwl { points: vec![(0.0, 5e-9), ((0.4e-6 - 5e-9) / 0.02, 0.4e-6)] },
            // min(0.03 G + 10 nS, 0.6 uS)
            sigma_drift: Pwl { points: vec![(0.0, 1e-8), ((0.6e-6 - 1e-8) / 0.03, 0.6e-6)] },
            drift_mean: Pwl { points: vec![(0.0, 0.0), (1e-3, -1e-5)] },
            drifted: false,
            read_noise_gamma: 0.01,
            ir_drop_coeff: 0.05,
            rng_seed: 0,
        }
    }

    /// Noise-free, IR-free, infinite-resolution converter.
    pub fn ideal() -> Self {
        Self {
            adc_ideal: true,
            sigma_prog: Pwl::zero(),
            sigma_drift: Pwl::zero(),
            drift_mean: Pwl::zero(),
            read_noise_gamma: 0.0,
            ir_drop_coeff: 0.0,
            ..Self::standard()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Model(format!("{name} must be positive and finite, got {v}")))
            }
        };
        pos(self.read_voltage, "read_voltage")?;
        pos(self.adc_step, "adc_step")?;
        pos(self.adc_range_max, "adc_range_max")?;
        if !(1..=31).contains(&self.adc_bits) {
            return Err(Error::Model(format!("adc_bits must be in 1..=31, got {}", self.adc_bits)));
        }
        if !(self.read_noise_gamma.is_finite() && self.read_noise_gamma >= 0.0) {
            return Err(Error::Model("read_noise_gamma must be non-negative".into()));
        }
        if !(self.ir_drop_coeff.is_finite() && self.ir_drop_coeff >= 0.0) {
            return Err(Error::Model("ir_drop_coeff must be non-negative".into()));
        }
        self.sigma_prog.validate()?;
        self.sigma_drift.validate()?;
        self.drift_mean.validate()?;
        if self.sigma_prog.points.iter().chain(&self.sigma_drift.points).any(|p| p.1 < 0.0) {
            return Err(Error::Model("noise tables must be non-negative".into()));
        }
        Ok(())
    }

    /// Column current after IR drop: `I - c I |I| / I_max`.
    #[inline]
    pub fn apply_ir_drop(&self, current: f64, coeff: f64) -> f64 {
        current - coeff * current * current.abs() / self.adc_range_max
    }

    pub fn adc_max_code(&self) -> f64 {
        ((1u64 << self.adc_bits) - 1) as f64
    }

    /// Returns `(code, clipped)`. Currents above `adc_range_max` saturate to
    /// the full-scale code.
    #[inline]
    pub fn adc_convert(&self, current: f64) -> (f64, bool) {
        if self.adc_ideal {
            return (current / self.adc_step, false);
        }
        let max = self.adc_max_code();
        if current > self.adc_range_max {
            return (max, true);
        }
        (math::round(current / self.adc_step).clamp(0.0, max), false)
    }

    /// Current represented by a code. The full-scale code stands for the
    /// clipping level, not `max_code * step`.
    #[inline]
    pub fn adc_decode(&self, code: f64) -> f64 {
        if self.adc_ideal {
            code * self.adc_step
        } else {
            (code * self.adc_step).min(self.adc_range_max)
        }
    }

    /// Programming standard deviation and mean shift for a target.
    pub fn programming_error(&self, g_target: f64) -> (f64, f64) {
        if self.drifted {
            (self.sigma_drift.eval(g_target), self.drift_mean.eval(g_target))
        } else {
            (self.sigma_prog.eval(g_target), 0.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sigma_curve() {
        let m = HardwareModel::standard();
        assert!((m.sigma_prog.eval(10e-6) - 0.205e-6).abs() < 1e-15);
        assert!((m.sigma_prog.eval(20e-6) - 0.4e-6).abs() < 1e-15);
        assert!((m.sigma_prog.eval(0.0) - 5e-9).abs() < 1e-18);
        assert!((m.sigma_drift.eval(10e-6) - 0.31e-6).abs() < 1e-15);
        assert!((m.sigma_drift.eval(30e-6) - 0.6e-6).abs() < 1e-15);
        assert!((m.drift_mean.eval(10e-6) + 0.1e-6).abs() < 1e-15);
    }

    #[test]
    fn adc_codes() {
        let m = HardwareModel::standard();
        assert_eq!(m.adc_convert(1e-6), (205.0, false));
        assert_eq!(m.adc_convert(18e-6), (4095.0, true));
        assert_eq!(m.adc_convert(-1e-9), (0.0, false));
        assert_eq!(m.adc_decode(4095.0), 17e-6);
    }

    #[test]
    fn ir_reference_loss() {
        let m = HardwareModel::standard();
        let c = m.ir_drop_coeff;
        assert_eq!(c, 0.05);
        let i = m.apply_ir_drop(17e-6, c);
        assert!((i - 17e-6 * 0.95).abs() < 1e-18);
    }
}
