//! Audio and image pipelines built on the analog engine.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::device::InputEncoding;
use crate::dft::{inverse_dft, inverse_dft_2d, reference_dft};
use crate::engine::{
    analog_dft_2d_direct_keyed, analog_transform_1d, analog_vr_fft_2d_keyed, root_key, symmetrize_spectrum,
    ExecutionConfig, QuantizedVector, StageInput, StageTrace, Transform1d,
};
use crate::math;
use crate::reshape::VrFactors;
use crate::tensor::ComplexTensor;
use crate::{Error, Result, C64};

/// Magnitude spectrogram, `frames x bins`, frame-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    pub bins: usize,
    pub frames: usize,
    pub data: Vec<f64>,
}

impl Spectrogram {
    pub fn get(&self, frame: usize, bin: usize) -> f64 {
        self.data[frame * self.bins + bin]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &v| m.max(v))
    }
}

pub fn frame_count(len: usize, window: usize, hop: usize) -> usize {
    if window == 0 || hop == 0 || len < window {
        0
    } else {
        (len - window) / hop + 1
    }
}

fn check_framing(len: usize, window: usize, hop: usize) -> Result<usize> {
    if window == 0 || hop == 0 || hop > window {
        return Err(Error::InvalidArgument(format!("window {window} / hop {hop} must satisfy 0 < hop <= window")));
    }
    let frames = frame_count(len, window, hop);
    if frames == 0 {
        return Err(Error::InvalidArgument(format!("signal of {len} samples is shorter than one window")));
    }
    Ok(frames)
}

/// The signal on the input grid shared by every window (one scale from the
/// global peak).
pub fn quantize_signal(signal: &[f64], encoding: InputEncoding) -> Result<QuantizedVector> {
    let x: Vec<C64> = signal.iter().map(|&v| C64::new(v, 0.0)).collect();
    QuantizedVector::quantize(&x, encoding)
}

#[derive(Clone, Debug)]
pub struct SpectrogramResult {
    pub spectrogram: Spectrogram,
    /// Full complex spectrum of every window.
    pub spectra: Vec<Vec<C64>>,
    pub trace: Vec<StageTrace>,
}

/// Analog short-time spectrum with a rectangular window; every frame draws
/// its own read-noise stream.
pub fn spectrogram(
    signal: &[f64],
    window: usize,
    hop: usize,
    op: &Transform1d,
    cfg: &ExecutionConfig,
) -> Result<SpectrogramResult> {
    let frames = check_framing(signal.len(), window, hop)?;
    let q = quantize_signal(signal, cfg.input_encoding)?;
    let key = root_key(cfg);
    let mut spectra = Vec::with_capacity(frames);
    let mut trace: Vec<StageTrace> = Vec::new();
    for f in 0..frames {
        let w = QuantizedVector { ints: q.ints[f * hop..f * hop + window].to_vec(), scale: q.scale, encoding: q.encoding };
        let r = analog_transform_1d(&w, op, cfg, key.child(f as u64))?;
        merge_trace(&mut trace, &r.trace);
        spectra.push(r.output);
    }
    Ok(SpectrogramResult { spectrogram: stack(&spectra, window), spectra, trace })
}

/// Exact spectrogram of the same quantized signal the analog path sees.
pub fn ideal_spectrogram(signal: &[f64], window: usize, hop: usize, encoding: InputEncoding) -> Result<SpectrogramResult> {
    let frames = check_framing(signal.len(), window, hop)?;
    let x = quantize_signal(signal, encoding)?.values();
    let spectra: Vec<Vec<C64>> = (0..frames).map(|f| reference_dft(&x[f * hop..f * hop + window])).collect();
    Ok(SpectrogramResult { spectrogram: stack(&spectra, window), spectra, trace: Vec::new() })
}

fn stack(spectra: &[Vec<C64>], window: usize) -> Spectrogram {
    let bins = window / 2;
    let data = spectra.iter().flat_map(|s| symmetrize_spectrum(s)).collect();
    Spectrogram { bins, frames: spectra.len(), data }
}

pub(crate) fn merge_trace(acc: &mut Vec<StageTrace>, t: &[StageTrace]) {
    if acc.is_empty() {
        acc.extend_from_slice(t);
        return;
    }
    for (a, b) in acc.iter_mut().zip(t) {
        a.dft_count += b.dft_count;
        a.mvms += b.mvms;
        a.adc_conversions += b.adc_conversions;
        a.clipped += b.clipped;
        a.max_current = a.max_current.max(b.max_current);
    }
}

#[derive(Clone, Debug)]
pub struct FullSpectrum {
    pub spectrum: Vec<C64>,
    /// Transform length after padding.
    pub length: usize,
    pub padded: bool,
    pub trace: Vec<StageTrace>,
}

/// Whole-signal analog FFT. With `pad`, the signal is zero-padded to the
/// next power of two; otherwise its length must factor over the bank.
pub fn full_spectrum(signal: &[f64], cfg: &ExecutionConfig, pad: bool) -> Result<FullSpectrum> {
    if signal.is_empty() {
        return Err(Error::InvalidArgument("empty signal".into()));
    }
    let length = if pad { signal.len().next_power_of_two() } else { signal.len() };
    let mut x: Vec<C64> = signal.iter().map(|&v| C64::new(v, 0.0)).collect();
    x.resize(length, C64::new(0.0, 0.0));
    let plan = cfg.bank.plan_for(length)?;
    let q = QuantizedVector::quantize(&x, cfg.input_encoding)?;
    let r = analog_transform_1d(&q, &Transform1d::Fft(plan), cfg, root_key(cfg))?;
    Ok(FullSpectrum { spectrum: r.output, length, padded: length != signal.len(), trace: r.trace })
}

/// Overlap-add of the inverse window spectra, normalised by how many
/// windows cover each sample. Uncovered samples are zero.
pub fn reconstruct_audio(spectra: &[Vec<C64>], window: usize, hop: usize, len: usize) -> Result<Vec<f64>> {
    if hop == 0 || window == 0 {
        return Err(Error::InvalidArgument("window and hop must be positive".into()));
    }
    let mut out = vec![0.0; len];
    let mut cover = vec![0u32; len];
    for (f, s) in spectra.iter().enumerate() {
        if s.len() != window {
            return Err(Error::Shape(format!("frame {f} has {} bins, window is {window}", s.len())));
        }
        let start = f * hop;
        for (i, v) in inverse_dft(s).into_iter().enumerate() {
            if let Some(o) = out.get_mut(start + i) {
                *o += v.re;
                cover[start + i] += 1;
            }
        }
    }
    for (o, &c) in out.iter_mut().zip(&cover) {
        if c > 0 {
            *o /= c as f64;
        }
    }
    Ok(out)
}

/// Energy-matching gain `sqrt(E_x / (E_X / n))` for a reconstruction whose
/// spectrum `X` has `n` points.
pub fn parseval_correct(original_energy: f64, spectrum_energy: f64, n: usize) -> f64 {
    if spectrum_energy <= 0.0 || n == 0 {
        return 1.0;
    }
    math::sqrt(original_energy / (spectrum_energy / n as f64))
}

/// Planar image, each plane `height x width` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ImagePlanes {
    pub width: usize,
    pub height: usize,
    pub planes: Vec<Vec<f64>>,
}

impl ImagePlanes {
    pub fn new(width: usize, height: usize, planes: Vec<Vec<f64>>) -> Result<Self> {
        if planes.iter().any(|p| p.len() != width * height) || planes.is_empty() {
            return Err(Error::Shape(format!("planes do not match {width}x{height}")));
        }
        Ok(Self { width, height, planes })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Transform2d {
    VectorRadix(VrFactors),
    Direct { k_max: usize },
}

#[derive(Clone, Debug)]
pub struct ImageResult {
    /// Rounded and clamped to `0..=255`.
    pub reconstruction: ImagePlanes,
    pub spectra: Vec<ComplexTensor>,
    pub traces: Vec<Vec<StageTrace>>,
}

/// Forward analog 2-D transform of each channel, exact digital inverse,
/// Parseval gain correction, then rounding to 8 bits. The vector-radix path
/// feeds raw 8-bit pixels to its first stage; the direct path uses the
/// configured input encoding.
pub fn image_spectrum_and_reconstruct(img: &ImagePlanes, op: &Transform2d, cfg: &ExecutionConfig) -> Result<ImageResult> {
    let (w, h) = (img.width, img.height);
    let key = root_key(cfg);
    let mut planes = Vec::new();
    let mut spectra = Vec::new();
    let mut traces = Vec::new();
    for (c, plane) in img.planes.iter().enumerate() {
        let t = ComplexTensor::from_real(&[h, w], plane)?;
        let ck = key.child(c as u64);
        let r = match op {
            Transform2d::VectorRadix(f) => analog_vr_fft_2d_keyed(&t, *f, cfg, Some(StageInput::pixels()), ck)?,
            Transform2d::Direct { k_max } => analog_dft_2d_direct_keyed(&t, *k_max, cfg, None, ck)?,
        };
        let x = inverse_dft_2d(&r.output)?;
        let e_orig: f64 = plane.iter().map(|v| v * v).sum();
        let g = parseval_correct(e_orig, r.output.energy(), w * h);
        planes.push(x.data().iter().map(|v| math::round(v.re * g).clamp(0.0, 255.0)).collect());
        spectra.push(r.output);
        traces.push(r.trace);
    }
    Ok(ImageResult { reconstruction: ImagePlanes::new(w, h, planes)?, spectra, traces })
}
