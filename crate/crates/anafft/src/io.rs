//! File formats.
//!
//! Binary formats are little-endian.
//!
//! Array snapshot (`.anfa`):
//!
//! | field                        | type        |
//! |------------------------------|-------------|
//! | magic `ANFA`                 | 4 bytes     |
//! | version (1)                  | u32         |
//! | rows, cols                   | u64, u64    |
//! | g_max (siemens)              | f64         |
//! | k_in, k_out, n_tiles         | u64 x 3     |
//! | array id                     | u64         |
//! | layout order (1)             | u32         |
//! | target grid, row-major       | f64 x rows*cols |
//! | realized grid, row-major     | f64 x rows*cols |
//!
//! Layout order 1 is the canonical arrangement of [`Layout`]: rows hold all
//! real input components then all imaginary ones, each logical output is an
//! adjacent `(G+, G-)` column pair, real outputs precede imaginary outputs,
//! and tiles repeat along the diagonal.
//!
//! Tensor (`.anft`):
//!
//! | field                        | type        |
//! |------------------------------|-------------|
//! | magic `ANFT`                 | 4 bytes     |
//! | version (1)                  | u32         |
//! | element kind (1 complex, 2 real) | u32     |
//! | ndim                         | u32         |
//! | dims                         | u64 x ndim  |
//! | data, row-major              | f64 (complex: re then im) |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anafft_core::device::{Layout, ProgrammedArray};
use anafft_core::engine::StageTrace;
use anafft_core::sigproc::{ImagePlanes, Spectrogram};
use anafft_core::tensor::ComplexTensor;
use anafft_core::C64;
use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageReader};

use crate::error::{CliError, CliResult};

const ARRAY_MAGIC: &[u8; 4] = b"ANFA";
const TENSOR_MAGIC: &[u8; 4] = b"ANFT";
const VERSION: u32 = 1;
const LAYOUT_CANONICAL: u32 = 1;
const KIND_COMPLEX: u32 = 1;
const KIND_REAL: u32 = 2;

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

/// Mono audio with samples scaled to `[-1, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Audio {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

/// Reads a 16-bit PCM mono WAV file.
pub fn read_wav(path: &Path) -> CliResult<Audio> {
    let reader = hound::WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(CliError::format(
            path,
            format!("{} channels; only mono input is supported, downmix first (e.g. `sox in.wav -c 1 out.wav`)", spec.channels),
        ));
    }
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(CliError::format(path, "only 16-bit integer PCM is supported"));
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32768.0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| wav_error(path, e))?;
    Ok(Audio { samples, sample_rate: spec.sample_rate })
}

/// Writes 16-bit PCM mono, clamping to full scale.
pub fn write_wav(path: &Path, audio: &Audio) -> CliResult<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    for &s in &audio.samples {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        w.write_sample(v).map_err(|e| wav_error(path, e))?;
    }
    w.finalize().map_err(|e| wav_error(path, e))
}

fn wav_error(path: &Path, e: hound::Error) -> CliError {
    match e {
        hound::Error::IoError(io) => CliError::io(path, io),
        other => CliError::format(path, other.to_string()),
    }
}

/// Reads a binary PPM (P6) or PGM (P5) with 8-bit samples.
pub fn read_ppm(path: &Path) -> CliResult<ImagePlanes> {
    let reader = ImageReader::open(path)
        .map_err(|e| CliError::io(path, e))?
        .with_guessed_format()
        .map_err(|e| CliError::io(path, e))?;
    if reader.format() != Some(image::ImageFormat::Pnm) {
        return Err(CliError::format(path, "not a PPM/PGM file"));
    }
    let img = reader.decode().map_err(|e| CliError::format(path, e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let planes = match img {
        image::DynamicImage::ImageRgb8(buf) => {
            let raw = buf.into_raw();
            (0..3).map(|c| raw.iter().skip(c).step_by(3).map(|&v| v as f64).collect()).collect()
        }
        image::DynamicImage::ImageLuma8(buf) => vec![buf.into_raw().into_iter().map(|v| v as f64).collect()],
        _ => return Err(CliError::format(path, "only 8-bit PPM (P6) or PGM (P5) images are supported")),
    };
    Ok(ImagePlanes::new(w, h, planes)?)
}

/// Writes three planes as P6 or one plane as P5. Values are rounded and
/// clamped to `0..=255`.
pub fn write_ppm(path: &Path, img: &ImagePlanes) -> CliResult<()> {
    let n = img.width * img.height;
    let (bytes, color): (Vec<u8>, _) = match img.planes.len() {
        3 => ((0..n).flat_map(|i| img.planes.iter().map(move |p| to_u8(p[i]))).collect(), ExtendedColorType::Rgb8),
        1 => (img.planes[0].iter().map(|&v| to_u8(v)).collect(), ExtendedColorType::L8),
        c => return Err(CliError::format(path, format!("cannot store {c} channels as PPM"))),
    };
    let subtype = if color == ExtendedColorType::Rgb8 { PnmSubtype::Pixmap(SampleEncoding::Binary) } else { PnmSubtype::Graymap(SampleEncoding::Binary) };
    let mut out = create(path)?;
    PnmEncoder::new(&mut out)
        .with_subtype(subtype)
        .write_image(&bytes, img.width as u32, img.height as u32, color)
        .map_err(|e| CliError::format(path, e.to_string()))?;
    out.flush().map_err(|e| CliError::io(path, e))
}

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// `index,real,imag` rows.
pub fn write_spectrum_csv(path: &Path, x: &[C64]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    let res = (|| {
        w.write_record(["index", "real", "imag"])?;
        for (i, v) in x.iter().enumerate() {
            w.write_record([i.to_string(), v.re.to_string(), v.im.to_string()])?;
        }
        w.flush()?;
        Ok::<_, csv::Error>(())
    })();
    res.map_err(|e| csv_error(path, e))
}

/// `index,freq_hz,magnitude` rows of a one-sided spectrum.
pub fn write_magnitude_csv(path: &Path, mags: &[f64], bin_hz: f64) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    let res = (|| {
        w.write_record(["index", "freq_hz", "magnitude"])?;
        for (i, v) in mags.iter().enumerate() {
            w.write_record([i.to_string(), (i as f64 * bin_hz).to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok::<_, csv::Error>(())
    })();
    res.map_err(|e| csv_error(path, e))
}

/// One row per frequency bin, one column per frame: `freq_hz,t0,t1,...`.
pub fn write_spectrogram_csv(path: &Path, s: &Spectrogram, values: &[f64], bin_hz: f64) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    let res = (|| {
        let mut header = vec!["freq_hz".to_string()];
        header.extend((0..s.frames).map(|f| format!("t{f}")));
        w.write_record(&header)?;
        for b in 0..s.bins {
            let mut row = vec![(b as f64 * bin_hz).to_string()];
            row.extend((0..s.frames).map(|f| values[f * s.bins + b].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok::<_, csv::Error>(())
    })();
    res.map_err(|e| csv_error(path, e))
}

pub const TRACE_HEADER: [&str; 7] = ["stage", "dft_size", "dft_count", "mvms", "adc_conversions", "clipped", "max_current"];

pub fn write_trace_csv(path: &Path, trace: &[StageTrace]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    let res = (|| {
        w.write_record(TRACE_HEADER)?;
        for t in trace {
            w.write_record([
                t.stage.to_string(),
                t.dft_size.to_string(),
                t.dft_count.to_string(),
                t.mvms.to_string(),
                t.adc_conversions.to_string(),
                t.clipped.to_string(),
                t.max_current.to_string(),
            ])?;
        }
        w.flush()?;
        Ok::<_, csv::Error>(())
    })();
    res.map_err(|e| csv_error(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            other => CliError::format(path, format!("{other:?}")),
        }
    } else {
        CliError::format(path, e.to_string())
    }
}

pub fn write_array(path: &Path, a: &ProgrammedArray) -> CliResult<()> {
    let mut w = create(path)?;
    encode_array(&mut w, a).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn encode_array<W: Write>(w: &mut W, a: &ProgrammedArray) -> std::io::Result<()> {
    let l = a.layout();
    w.write_all(ARRAY_MAGIC)?;
    w.write_u32::<LE>(VERSION)?;
    w.write_u64::<LE>(a.rows() as u64)?;
    w.write_u64::<LE>(a.cols() as u64)?;
    w.write_f64::<LE>(a.g_max())?;
    for v in [l.k_in, l.k_out, l.n_tiles] {
        w.write_u64::<LE>(v as u64)?;
    }
    w.write_u64::<LE>(a.array_id())?;
    w.write_u32::<LE>(LAYOUT_CANONICAL)?;
    for &v in a.target().iter().chain(a.actual()) {
        w.write_f64::<LE>(v)?;
    }
    Ok(())
}

pub fn read_array(path: &Path) -> CliResult<ProgrammedArray> {
    let mut r = open(path)?;
    decode_array(&mut r, path)
}

pub fn decode_array<R: Read>(r: &mut R, path: &Path) -> CliResult<ProgrammedArray> {
    let io = |e| CliError::io(path, e);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != ARRAY_MAGIC {
        return Err(CliError::format(path, "not an array snapshot"));
    }
    let version = r.read_u32::<LE>().map_err(io)?;
    if version != VERSION {
        return Err(CliError::format(path, format!("unsupported snapshot version {version}")));
    }
    let rows = r.read_u64::<LE>().map_err(io)? as usize;
    let cols = r.read_u64::<LE>().map_err(io)? as usize;
    let g_max = r.read_f64::<LE>().map_err(io)?;
    let k_in = r.read_u64::<LE>().map_err(io)? as usize;
    let k_out = r.read_u64::<LE>().map_err(io)? as usize;
    let n_tiles = r.read_u64::<LE>().map_err(io)? as usize;
    let id = r.read_u64::<LE>().map_err(io)?;
    let order = r.read_u32::<LE>().map_err(io)?;
    if order != LAYOUT_CANONICAL {
        return Err(CliError::format(path, format!("unknown layout order {order}")));
    }
    let layout = Layout { k_in, k_out, n_tiles };
    if layout.rows() != rows || layout.cols() != cols {
        return Err(CliError::format(path, format!("{rows}x{cols} grid does not match the layout fields")));
    }
    let n = rows.checked_mul(cols).ok_or_else(|| CliError::format(path, "grid too large"))?;
    let mut target = vec![0.0; n];
    let mut actual = vec![0.0; n];
    r.read_f64_into::<LE>(&mut target).map_err(io)?;
    r.read_f64_into::<LE>(&mut actual).map_err(io)?;
    ProgrammedArray::from_parts(layout, g_max, id, target, actual).map_err(|e| CliError::format(path, e.to_string()))
}

pub fn write_tensor(path: &Path, t: &ComplexTensor) -> CliResult<()> {
    let mut w = create(path)?;
    encode_tensor(&mut w, t).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn encode_tensor<W: Write>(w: &mut W, t: &ComplexTensor) -> std::io::Result<()> {
    write_tensor_header(w, KIND_COMPLEX, t.shape())?;
    for v in t.data() {
        w.write_f64::<LE>(v.re)?;
        w.write_f64::<LE>(v.im)?;
    }
    Ok(())
}

/// A real-valued tensor (for example a magnitude spectrogram).
pub fn write_real_tensor(path: &Path, shape: &[usize], data: &[f64]) -> CliResult<()> {
    if shape.iter().product::<usize>() != data.len() {
        return Err(CliError::format(path, "tensor shape does not match its data"));
    }
    let mut w = create(path)?;
    (|| {
        write_tensor_header(&mut w, KIND_REAL, shape)?;
        for &v in data {
            w.write_f64::<LE>(v)?;
        }
        w.flush()
    })()
    .map_err(|e| CliError::io(path, e))
}

fn write_tensor_header<W: Write>(w: &mut W, kind: u32, shape: &[usize]) -> std::io::Result<()> {
    w.write_all(TENSOR_MAGIC)?;
    w.write_u32::<LE>(VERSION)?;
    w.write_u32::<LE>(kind)?;
    w.write_u32::<LE>(shape.len() as u32)?;
    for &d in shape {
        w.write_u64::<LE>(d as u64)?;
    }
    Ok(())
}

/// Reads either tensor kind; real data comes back with zero imaginary parts.
pub fn read_tensor(path: &Path) -> CliResult<ComplexTensor> {
    let mut r = open(path)?;
    decode_tensor(&mut r, path)
}

pub fn decode_tensor<R: Read>(r: &mut R, path: &Path) -> CliResult<ComplexTensor> {
    let io = |e| CliError::io(path, e);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != TENSOR_MAGIC {
        return Err(CliError::format(path, "not a tensor file"));
    }
    let version = r.read_u32::<LE>().map_err(io)?;
    if version != VERSION {
        return Err(CliError::format(path, format!("unsupported tensor version {version}")));
    }
    let kind = r.read_u32::<LE>().map_err(io)?;
    let ndim = r.read_u32::<LE>().map_err(io)? as usize;
    let shape = (0..ndim).map(|_| r.read_u64::<LE>().map(|d| d as usize)).collect::<Result<Vec<_>, _>>().map_err(io)?;
    let n: usize = shape.iter().product();
    let data = match kind {
        KIND_COMPLEX => {
            let mut raw = vec![0.0; 2 * n];
            r.read_f64_into::<LE>(&mut raw).map_err(io)?;
            raw.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect()
        }
        KIND_REAL => {
            let mut raw = vec![0.0; n];
            r.read_f64_into::<LE>(&mut raw).map_err(io)?;
            raw.into_iter().map(|v| C64::new(v, 0.0)).collect()
        }
        k => return Err(CliError::format(path, format!("unknown element kind {k}"))),
    };
    ComplexTensor::new(&shape, data).map_err(|e| CliError::format(path, e.to_string()))
}
