use alloc::format;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result, C64};

/// Integer input format for bit-serial MVMs. `Signed { bits: 13 }` carries
/// 12 magnitude bits plus a sign; positive and negative components are
/// applied in separate cycles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum InputEncoding {
    Signed { bits: u32 },
    Unsigned { bits: u32 },
}

impl InputEncoding {
    pub fn magnitude_bits(self) -> u32 {
        match self {
            InputEncoding::Signed { bits } => bits.saturating_sub(1),
            InputEncoding::Unsigned { bits } => bits,
        }
    }

    pub fn is_signed(self) -> bool {
        matches!(self, InputEncoding::Signed { .. })
    }

    pub fn max_int(self) -> i32 {
        ((1u64 << self.magnitude_bits()) - 1) as i32
    }

    /// Bit planes applied per input vector: one per magnitude bit and sign
    /// polarity.
    pub fn slices(self) -> usize {
        self.magnitude_bits() as usize * if self.is_signed() { 2 } else { 1 }
    }

    /// MVM cycles per input vector with `n_tiles` planes applied at once.
    pub fn mvm_count(self, n_tiles: usize) -> usize {
        let polarities = if self.is_signed() { 2 } else { 1 };
        polarities * (self.magnitude_bits() as usize).div_ceil(n_tiles.max(1))
    }

    pub fn validate(self) -> Result<()> {
        let mb = self.magnitude_bits();
        if !(1..=30).contains(&mb) {
            return Err(Error::InvalidArgument(format!("{self:?} must have 1..=30 magnitude bits")));
        }
        Ok(())
    }
}

/// A quantized real vector together with its scale. Bit planes are derived
/// on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct BitPlanes {
    ints: Vec<i32>,
    scale: f64,
    encoding: InputEncoding,
}

impl BitPlanes {
    pub fn from_ints(ints: Vec<i32>, scale: f64, encoding: InputEncoding) -> Result<Self> {
        encoding.validate()?;
        let max = encoding.max_int();
        let min = if encoding.is_signed() { -max } else { 0 };
        if let Some(v) = ints.iter().find(|&&v| v < min || v > max) {
            return Err(Error::InvalidArgument(format!("{v} does not fit {encoding:?}")));
        }
        Ok(Self { ints, scale, encoding })
    }

    pub fn ints(&self) -> &[i32] {
        &self.ints
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn encoding(&self) -> InputEncoding {
        self.encoding
    }

    pub fn len(&self) -> usize {
        self.ints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ints.is_empty()
    }

    /// Rows driven for magnitude bit `bit` in the positive (`negative =
    /// false`) or negative cycle.
    pub fn plane(&self, bit: u32, negative: bool) -> Vec<bool> {
        self.ints.iter().map(|&v| plane_bit(v, bit, negative)).collect()
    }

    /// `scale * sum_b 2^b (plane+_b - plane-_b)`.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut acc = alloc::vec![0i64; self.ints.len()];
        for b in 0..self.encoding.magnitude_bits() {
            for (i, (p, n)) in self.plane(b, false).into_iter().zip(self.plane(b, true)).enumerate() {
                acc[i] += (p as i64 - n as i64) << b;
            }
        }
        acc.into_iter().map(|v| v as f64 * self.scale).collect()
    }
}

#[inline]
pub(crate) fn plane_bit(v: i32, bit: u32, negative: bool) -> bool {
    (v < 0) == negative && v != 0 && (v.unsigned_abs() >> bit) & 1 == 1
}

/// Quantizes with `scale = max|v| / (2^mag_bits - 1)`.
pub fn quantize_input(values: &[f64], encoding: InputEncoding) -> Result<BitPlanes> {
    encoding.validate()?;
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = max / encoding.max_int() as f64;
    quantize_with_scale(values, encoding, scale)
}

pub fn quantize_with_scale(values: &[f64], encoding: InputEncoding, scale: f64) -> Result<BitPlanes> {
    encoding.validate()?;
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(Error::InvalidArgument(format!("quantization scale {scale} must be finite and non-negative")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("input contains non-finite values".into()));
    }
    if !encoding.is_signed() && values.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument("negative value with an unsigned input encoding".into()));
    }
    let ints = quantize_ints(values, encoding, scale);
    Ok(BitPlanes { ints, scale, encoding })
}

pub(crate) fn quantize_ints(values: &[f64], encoding: InputEncoding, scale: f64) -> Vec<i32> {
    let max = encoding.max_int() as f64;
    if scale == 0.0 {
        return alloc::vec![0; values.len()];
    }
    values.iter().map(|&v| math::round(v / scale).clamp(-max, max) as i32).collect()
}

/// `[re_0 .. re_{k-1}, im_0 .. im_{k-1}]`, the row order of a mapped array.
pub fn complex_components(x: &[C64]) -> Vec<f64> {
    x.iter().map(|c| c.re).chain(x.iter().map(|c| c.im)).collect()
}
