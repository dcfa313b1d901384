//! Multi-stage analog transforms.
//!
//! Every elementary DFT runs on a programmed array through the bit-serial
//! device model. Between stages the complex intermediates are multiplied by
//! exact twiddles where the decomposition needs them, then requantized to
//! `intermediate_bits` over a range set by the largest component of the
//! whole intermediate matrix.

mod bank;
mod exec;
mod spectrum;

pub(crate) use exec::root_key;

pub use bank::{dft_array_id, ArrayBank, Partitioned};
pub use exec::{
    analog_dft_2d_direct, analog_dft_2d_direct_keyed, analog_dft_direct, analog_fft_1d, analog_ifft_1d,
    analog_transform_1d, analog_vr_fft_2d, analog_vr_fft_2d_keyed, QuantizedVector, StageInput, Transform1d,
};
pub use spectrum::{dc_streak_diagnostic, symmetrize_spectrum, StreakDiagnostic};

use alloc::vec::Vec;

use crate::device::{ExecStats, HardwareModel, InputEncoding};

#[derive(Clone, Debug)]
pub struct ExecutionConfig {
    pub model: HardwareModel,
    pub bank: ArrayBank,
    /// Format of the transform input.
    pub input_encoding: InputEncoding,
    /// Signed bit width of requantized intermediates.
    pub intermediate_bits: u32,
    /// Run independent DFTs of a stage on the rayon pool (needs the
    /// `parallel` feature; ignored otherwise). Results do not change.
    pub parallel: bool,
    /// Read-noise stream selector; distinct streams give independent noise
    /// on the same programmed arrays.
    pub stream: u64,
}

impl ExecutionConfig {
    pub fn new(model: HardwareModel, bank: ArrayBank) -> Self {
        Self {
            model,
            bank,
            input_encoding: InputEncoding::Signed { bits: 13 },
            intermediate_bits: 13,
            parallel: cfg!(feature = "parallel"),
            stream: 0,
        }
    }

    pub fn intermediate_encoding(&self) -> InputEncoding {
        InputEncoding::Signed { bits: self.intermediate_bits }
    }
}

/// Per-stage counters. Stages are the leaves of the decomposition in
/// execution order.
#[derive(Clone, Debug, PartialEq)]
pub struct StageTrace {
    pub stage: usize,
    pub dft_size: usize,
    pub dft_count: u64,
    pub mvms: u64,
    pub adc_conversions: u64,
    pub clipped: u64,
    pub max_current: f64,
}

pub(crate) fn build_trace(sizes: &[usize], stats: &[ExecStats]) -> Vec<StageTrace> {
    sizes
        .iter()
        .zip(stats)
        .enumerate()
        .map(|(i, (&n, s))| StageTrace {
            stage: i,
            dft_size: n,
            dft_count: s.dfts,
            mvms: s.mvms,
            adc_conversions: s.conversions,
            clipped: s.clipped,
            max_current: s.max_current,
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct AnalogResult<T> {
    pub output: T,
    pub trace: Vec<StageTrace>,
}

impl<T> AnalogResult<T> {
    pub fn total_conversions(&self) -> u64 {
        self.trace.iter().map(|s| s.adc_conversions).sum()
    }

    pub fn total_mvms(&self) -> u64 {
        self.trace.iter().map(|s| s.mvms).sum()
    }

    pub fn total_clipped(&self) -> u64 {
        self.trace.iter().map(|s| s.clipped).sum()
    }
}
