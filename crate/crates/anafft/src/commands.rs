//! Subcommand implementations. Each returns a short human-readable summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anafft_core::cost::{energy_estimate, report_csv, scaling_report, ConversionModel, EnergyTable, Workload};
use anafft_core::device::{
    calibrate_gmax, program as program_array, weight_error_stats, CalibrationOptions, HardwareModel, InputEncoding,
    ProgrammedArray,
};
use anafft_core::dft::{dft_matrix, factored_dft};
use anafft_core::engine::{symmetrize_spectrum, ArrayBank, ExecutionConfig, StageTrace, Transform1d};
use anafft_core::metrics::{psnr, ssim_multichannel, to_dbfs};
use anafft_core::plan::{plan_factorization, FactorPlan, PlanStrategy};
use anafft_core::presets::{self, Application};
use anafft_core::reshape::VrFactors;
use anafft_core::sigproc::{
    full_spectrum, ideal_spectrogram, image_spectrum_and_reconstruct, quantize_signal, reconstruct_audio, spectrogram,
    ImagePlanes, Transform2d,
};
use anafft_core::tensor::ComplexTensor;
use anafft_core::{fixtures, C64};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::io;

/// Largest array the 1-D pipelines program by default.
pub const K_MAX: usize = 256;

/// Settings shared by every subcommand.
#[derive(Clone, Debug)]
pub struct Context {
    pub model: HardwareModel,
    pub energy: EnergyTable,
    pub config: RunConfig,
    /// Arrays loaded from snapshots; they replace preset arrays of the same
    /// size.
    pub arrays: Vec<ProgrammedArray>,
    /// Disable concurrent execution of independent DFTs.
    pub serial: bool,
}

impl Default for Context {
    fn default() -> Self {
        Self {
            model: HardwareModel::standard(),
            energy: EnergyTable::standard(),
            config: RunConfig::default(),
            arrays: Vec::new(),
            serial: false,
        }
    }
}

impl Context {
    /// Merges the config file, an optional model file and the seed flag
    /// (later sources win).
    pub fn new(config: RunConfig, model: Option<HardwareModel>, seed: Option<u64>) -> Self {
        let mut m = model.or_else(|| config.model.clone()).unwrap_or_else(HardwareModel::standard);
        if let Some(s) = seed {
            m.rng_seed = s;
        }
        let energy = config.energy_table.clone().unwrap_or_default();
        Self { model: m, energy, config, ..Self::default() }
    }

    pub fn input_encoding(&self) -> InputEncoding {
        InputEncoding::Signed { bits: self.config.input_bits.unwrap_or(13) }
    }

    fn array_params(&self, k: usize, app: Application) -> (f64, usize) {
        let over = self.config.arrays.iter().find(|a| a.size == k);
        let g = over.and_then(|a| a.g_max).unwrap_or_else(|| presets::g_max(k, app));
        let t = over.and_then(|a| a.n_tiles).unwrap_or_else(|| presets::n_tiles(k));
        (g, t)
    }

    /// Preset arrays for `sizes`, then any loaded snapshots.
    pub fn bank(&self, sizes: &[usize], app: Application) -> CliResult<ArrayBank> {
        let mut bank = ArrayBank::new();
        for &k in sizes {
            if self.arrays.iter().any(|a| a.layout().k_in == k) {
                continue;
            }
            let (g, t) = self.array_params(k, app);
            bank.program_dft(k, g, t, &self.model)?;
        }
        for a in &self.arrays {
            bank.insert(a.clone())?;
        }
        Ok(bank)
    }

    pub fn exec(&self, bank: ArrayBank) -> ExecutionConfig {
        let mut cfg = ExecutionConfig::new(self.model.clone(), bank);
        cfg.input_encoding = self.input_encoding();
        if let Some(b) = self.config.intermediate_bits {
            cfg.intermediate_bits = b;
        }
        cfg.parallel = !self.serial;
        cfg
    }
}

/// Parses `auto`, `direct` or `AxB[xC...]` (outermost factor first).
pub fn parse_plan(spec: &str, n: usize, k_max: usize) -> CliResult<Transform1d> {
    match spec.trim() {
        "direct" => Ok(Transform1d::Direct { k_max }),
        "auto" => Ok(Transform1d::Fft(plan_factorization(n, k_max, &PlanStrategy::MinDepth)?)),
        s => {
            let factors = s
                .split(['x', 'X', '*'])
                .map(|f| f.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| CliError::Config(format!("cannot parse plan `{s}`; use auto, direct or e.g. 16x16")))?;
            Ok(Transform1d::Fft(plan_factorization(n, k_max, &PlanStrategy::Explicit(factors))?))
        }
    }
}

fn plan_leaves(op: &Transform1d, n: usize, k_max: usize) -> Vec<usize> {
    match op {
        Transform1d::Fft(p) => {
            let mut l = p.leaves();
            l.sort_unstable();
            l.dedup();
            l
        }
        Transform1d::Direct { .. } => vec![n.min(k_max)],
    }
}

fn trace_summary(out: &mut String, trace: &[StageTrace]) {
    for t in trace {
        let _ = writeln!(
            out,
            "  stage {}: {} x DFT-{}, {} MVMs, {} conversions, {} clipped",
            t.stage, t.dft_count, t.dft_size, t.mvms, t.adc_conversions, t.clipped
        );
    }
}

fn application(s: &str) -> CliResult<Application> {
    match s {
        "audio" => Ok(Application::Audio),
        "image" => Ok(Application::Image),
        _ => Err(CliError::Config(format!("unknown application `{s}` (audio or image)"))),
    }
}

pub struct ProgramArgs {
    pub size: usize,
    pub app: String,
    pub g_max: Option<f64>,
    pub tiles: Option<usize>,
    pub out: PathBuf,
}

pub fn program(ctx: &Context, a: &ProgramArgs) -> CliResult<String> {
    let app = application(&a.app)?;
    let (g, t) = ctx.array_params(a.size, app);
    let (g, t) = (a.g_max.unwrap_or(g), a.tiles.unwrap_or(t));
    let w = dft_matrix(a.size);
    let grid = anafft_core::device::map_dft_to_targets(&w, g, t)?;
    let array = program_array(&grid, &ctx.model, anafft_core::engine::dft_array_id(a.size))?;
    io::write_array(&a.out, &array)?;
    let st = weight_error_stats(&array, &w)?;
    Ok(format!(
        "DFT-{}: {} x {} devices, {} tile(s), g_max {:.4e} S\nweight error: magnitude MAE {:.4}, phase MAE {:.4} rad\nwrote {}\n",
        a.size,
        array.rows(),
        array.cols(),
        t,
        g,
        st.mae_magnitude,
        st.mae_phase,
        a.out.display()
    ))
}

pub struct CalibrateArgs {
    pub size: usize,
    pub input: Option<PathBuf>,
    pub percentile: f64,
    pub ceiling: f64,
    pub tiles: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Searches the largest `g_max` that keeps the requested share of column
/// currents inside the ADC range, using non-overlapping windows of the input
/// (or of the bundled speech fixture) as the workload.
pub fn calibrate(ctx: &Context, a: &CalibrateArgs) -> CliResult<String> {
    let signal = match &a.input {
        Some(p) => io::read_wav(p)?.samples,
        None => fixtures::speech_like(65536, 16000.0, ctx.model.rng_seed),
    };
    if a.size == 0 || signal.len() < a.size {
        return Err(CliError::Config(format!("need at least one {}-sample window", a.size)));
    }
    let samples: Vec<Vec<C64>> =
        signal.chunks_exact(a.size).map(|c| c.iter().map(|&v| C64::new(v, 0.0)).collect()).collect();
    let opts = CalibrationOptions {
        encoding: ctx.input_encoding(),
        n_tiles: a.tiles.unwrap_or_else(|| presets::n_tiles(a.size)),
        percentile: a.percentile,
        ceiling: a.ceiling,
    };
    let g = calibrate_gmax(&dft_matrix(a.size), &samples, &ctx.model, &opts)?;
    if let Some(out) = &a.out {
        let frag = serde_json::json!({ "arrays": [ { "size": a.size, "g_max": g, "n_tiles": opts.n_tiles } ] });
        io::write_text(out, &format!("{frag:#}\n"))?;
    }
    Ok(format!(
        "DFT-{}: g_max {:.4e} S keeps {}% of column currents below {:.3e} A ({} windows)\n",
        a.size,
        g,
        a.percentile,
        ctx.model.adc_range_max,
        samples.len()
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Anft,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "anft" => Ok(Format::Anft),
            _ => Err(format!("unknown format `{s}` (csv or anft)")),
        }
    }
}

pub struct FftArgs {
    pub input: PathBuf,
    pub pad: bool,
    pub format: Format,
    pub trace: Option<PathBuf>,
    pub out: PathBuf,
}

/// Whole-signal analog FFT on the DFT-256 array.
pub fn fft(ctx: &Context, a: &FftArgs) -> CliResult<String> {
    let audio = io::read_wav(&a.input)?;
    let cfg = ctx.exec(ctx.bank(&[K_MAX], Application::Audio)?);
    let r = full_spectrum(&audio.samples, &cfg, a.pad)?;
    let plan = cfg.bank.plan_for(r.length)?;
    match a.format {
        Format::Csv => io::write_spectrum_csv(&a.out, &r.spectrum)?,
        Format::Anft => io::write_tensor(&a.out, &ComplexTensor::new(&[r.length], r.spectrum.clone())?)?,
    }
    if let Some(t) = &a.trace {
        io::write_trace_csv(t, &r.trace)?;
    }
    let mut x = quantize_signal(&audio.samples, ctx.input_encoding())?.values();
    x.resize(r.length, C64::new(0.0, 0.0));
    let exact = factored_dft(&x, &plan)?;
    let p = psnr(&symmetrize_spectrum(&exact), &symmetrize_spectrum(&r.spectrum))?;
    let mut s = format!(
        "{}-point FFT{} via {plan}, bin spacing {:.5} Hz\n",
        r.length,
        if r.padded { " (zero-padded)" } else { "" },
        audio.sample_rate as f64 / r.length as f64
    );
    trace_summary(&mut s, &r.trace);
    let _ = writeln!(s, "PSNR vs exact spectrum: {p:.2} dB\nwrote {}", a.out.display());
    Ok(s)
}

pub struct SpectrogramArgs {
    pub input: PathBuf,
    pub plan: Option<String>,
    pub window: Option<usize>,
    pub hop: Option<usize>,
    pub linear: bool,
    pub format: Format,
    pub trace: Option<PathBuf>,
    pub reconstruct: Option<PathBuf>,
    pub out: PathBuf,
}

pub fn spectrogram_cmd(ctx: &Context, a: &SpectrogramArgs) -> CliResult<String> {
    let audio = io::read_wav(&a.input)?;
    let st = &ctx.config.spectrogram;
    let window = a.window.unwrap_or(st.window);
    let hop = a.hop.unwrap_or(st.hop);
    let plan_spec = a.plan.as_deref().unwrap_or(&st.plan);
    let op = parse_plan(plan_spec, window, K_MAX)?;
    let cfg = ctx.exec(ctx.bank(&plan_leaves(&op, window, K_MAX), Application::Audio)?);
    let r = spectrogram(&audio.samples, window, hop, &op, &cfg)?;
    let ideal = ideal_spectrogram(&audio.samples, window, hop, ctx.input_encoding())?;
    let sg = &r.spectrogram;
    let normalize = st.normalize && !a.linear;
    let values = if normalize { to_dbfs(&sg.data, sg.max(), st.db_floor) } else { sg.data.clone() };
    match a.format {
        Format::Csv => io::write_spectrogram_csv(&a.out, sg, &values, audio.sample_rate as f64 / window as f64)?,
        Format::Anft => io::write_real_tensor(&a.out, &[sg.frames, sg.bins], &values)?,
    }
    if let Some(t) = &a.trace {
        io::write_trace_csv(t, &r.trace)?;
    }
    if let Some(path) = &a.reconstruct {
        let samples = reconstruct_audio(&r.spectra, window, hop, audio.samples.len())?;
        io::write_wav(path, &io::Audio { samples, sample_rate: audio.sample_rate })?;
    }
    let p = psnr(&ideal.spectrogram.data, &sg.data)?;
    let plan_text = match &op {
        Transform1d::Fft(p) => p.to_string(),
        Transform1d::Direct { .. } => format!("direct {window}-point MVM"),
    };
    let mut s = format!(
        "{} frames x {} bins ({} window, {} hop) via {plan_text}{}\n",
        sg.frames,
        sg.bins,
        window,
        hop,
        if normalize { format!(", dBFS with {} dB floor", st.db_floor) } else { String::new() }
    );
    trace_summary(&mut s, &r.trace);
    let _ = writeln!(s, "PSNR vs exact spectrogram: {p:.2} dB\nwrote {}", a.out.display());
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageMethod {
    Vr,
    Direct,
}

impl std::str::FromStr for ImageMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "vr" => Ok(ImageMethod::Vr),
            "direct" => Ok(ImageMethod::Direct),
            _ => Err(format!("unknown method `{s}` (vr or direct)")),
        }
    }
}

pub struct ImageArgs {
    pub input: PathBuf,
    pub method: ImageMethod,
    pub spectrum: Option<PathBuf>,
    pub out: PathBuf,
}

/// Split of one image axis for the vector-radix FFT.
fn axis_split(n: usize) -> CliResult<(usize, usize)> {
    let f = VrFactors::square(n).map_err(|_| {
        CliError::Core(anafft_core::Error::InvalidFactors(format!(
            "vector-radix needs power-of-two image sides of at least 4, got {n}"
        )))
    })?;
    Ok((f.p, f.r))
}

pub struct ImageOutcome {
    pub reconstruction: ImagePlanes,
    pub psnr: f64,
    pub ssim: f64,
    pub spectra: Vec<ComplexTensor>,
    pub trace: Vec<Vec<StageTrace>>,
}

pub fn run_image(ctx: &Context, img: &ImagePlanes, method: ImageMethod) -> CliResult<ImageOutcome> {
    let (op, sizes) = match method {
        ImageMethod::Vr => {
            let (p, r) = axis_split(img.height)?;
            let (q, s) = axis_split(img.width)?;
            let mut sizes = vec![p, q, r, s];
            sizes.sort_unstable();
            sizes.dedup();
            (Transform2d::VectorRadix(VrFactors::new(p, q, r, s)), sizes)
        }
        ImageMethod::Direct => {
            let k = img.width.max(img.height).min(K_MAX);
            (Transform2d::Direct { k_max: k }, vec![k])
        }
    };
    let cfg = ctx.exec(ctx.bank(&sizes, Application::Image)?);
    let r = image_spectrum_and_reconstruct(img, &op, &cfg)?;
    let p = psnr(&img.planes.concat(), &r.reconstruction.planes.concat())?;
    let s = ssim_multichannel(&img.planes, &r.reconstruction.planes, img.width, img.height, 255.0)?;
    Ok(ImageOutcome { reconstruction: r.reconstruction, psnr: p, ssim: s, spectra: r.spectra, trace: r.traces })
}

/// Stacks per-channel spectra into one `channels x height x width` tensor.
pub fn stack_spectra(spectra: &[ComplexTensor]) -> CliResult<ComplexTensor> {
    let shape = spectra.first().map(|t| t.shape().to_vec()).unwrap_or_default();
    let mut full = vec![spectra.len()];
    full.extend(&shape);
    let data = spectra.iter().flat_map(|t| t.data().iter().copied()).collect();
    Ok(ComplexTensor::new(&full, data)?)
}

pub fn image(ctx: &Context, a: &ImageArgs) -> CliResult<String> {
    let img = io::read_ppm(&a.input)?;
    let o = run_image(ctx, &img, a.method)?;
    io::write_ppm(&a.out, &o.reconstruction)?;
    if let Some(sp) = &a.spectrum {
        io::write_tensor(sp, &stack_spectra(&o.spectra)?)?;
    }
    let mut s = format!("{}x{} image, {} channel(s), method {:?}\n", img.width, img.height, img.planes.len(), a.method);
    if let Some(t) = o.trace.first() {
        trace_summary(&mut s, t);
    }
    let psnr_text = if o.psnr.is_infinite() { "inf".to_string() } else { format!("{:.2}", o.psnr) };
    let _ = writeln!(s, "PSNR {psnr_text} dB, SSIM {:.4}\nwrote {}", o.ssim, a.out.display());
    Ok(s)
}

pub struct CostArgs {
    pub ks: Vec<usize>,
    pub max_exp: u32,
    pub bit_serial: bool,
    pub two_d: bool,
    pub out: Option<PathBuf>,
}

/// Conversion, twiddle, buffer and energy rows for powers of two up to
/// `2^max_exp`.
pub fn cost(ctx: &Context, a: &CostArgs) -> CliResult<String> {
    if a.ks.is_empty() || a.ks.contains(&0) {
        return Err(CliError::Config("array sizes must be positive".into()));
    }
    if !(2..=40).contains(&a.max_exp) {
        return Err(CliError::Config(format!("max exponent {} outside 2..=40", a.max_exp)));
    }
    let conv = if a.bit_serial { ConversionModel::bit_serial(ctx.input_encoding()) } else { ConversionModel::default() };
    let ns: Vec<usize> = (2..=a.max_exp).map(|e| 1usize << e).collect();
    let mut rows = scaling_report(&a.ks, &ns, &ctx.energy, conv)?;
    if a.two_d {
        for &k in &a.ks {
            for e in 2..=a.max_exp.min(13) {
                let n = 1usize << e;
                rows.push(energy_estimate(&Workload::VrFft2d { n, k_max: k }, &ctx.energy, conv)?);
                rows.push(energy_estimate(&Workload::Direct2d { n, k_max: k }, &ctx.energy, conv)?);
            }
        }
    }
    let csv = report_csv(&rows);
    match &a.out {
        Some(p) => {
            io::write_text(p, &csv)?;
            Ok(format!("{} rows written to {}\n", rows.len(), p.display()))
        }
        None => Ok(csv),
    }
}

/// Artifacts of `selftest`, in writing order.
pub const SELFTEST_FILES: [&str; 11] = [
    "signal.wav",
    "dft16.anfa",
    "spectrogram.csv",
    "spectrogram_trace.csv",
    "spectrum.anft",
    "spectrum_trace.csv",
    "image.ppm",
    "image_vr.ppm",
    "image_vr_spectrum.anft",
    "cost.csv",
    "summary.json",
];

/// Runs small versions of every pipeline on the bundled fixtures and writes
/// their outputs to `dir`. Identical seeds give identical bytes.
pub fn selftest(ctx: &Context, dir: &Path) -> CliResult<String> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let seed = ctx.model.rng_seed;
    let audio = io::Audio { samples: fixtures::speech_like(8192, 16000.0, seed), sample_rate: 16000 };
    io::write_wav(&dir.join("signal.wav"), &audio)?;
    let audio = io::read_wav(&dir.join("signal.wav"))?;

    program(
        ctx,
        &ProgramArgs { size: 16, app: "audio".into(), g_max: None, tiles: None, out: dir.join("dft16.anfa") },
    )?;

    let op = Transform1d::Fft(FactorPlan::split(FactorPlan::Leaf(16), FactorPlan::Leaf(16)));
    let cfg = ctx.exec(ctx.bank(&[16], Application::Audio)?);
    let sg = spectrogram(&audio.samples, 256, 128, &op, &cfg)?;
    let ideal = ideal_spectrogram(&audio.samples, 256, 128, ctx.input_encoding())?;
    let db = to_dbfs(&sg.spectrogram.data, sg.spectrogram.max(), ctx.config.spectrogram.db_floor);
    io::write_spectrogram_csv(&dir.join("spectrogram.csv"), &sg.spectrogram, &db, 16000.0 / 256.0)?;
    io::write_trace_csv(&dir.join("spectrogram_trace.csv"), &sg.trace)?;
    let spec_psnr = psnr(&ideal.spectrogram.data, &sg.spectrogram.data)?;

    let cfg = ctx.exec(ctx.bank(&[K_MAX], Application::Audio)?);
    let full = full_spectrum(&audio.samples, &cfg, false)?;
    io::write_tensor(&dir.join("spectrum.anft"), &ComplexTensor::new(&[full.length], full.spectrum.clone())?)?;
    io::write_trace_csv(&dir.join("spectrum_trace.csv"), &full.trace)?;
    let x = quantize_signal(&audio.samples, ctx.input_encoding())?.values();
    let exact = factored_dft(&x, &cfg.bank.plan_for(full.length)?)?;
    let full_psnr = psnr(&symmetrize_spectrum(&exact), &symmetrize_spectrum(&full.spectrum))?;

    let img = fixtures::test_image(64, seed);
    io::write_ppm(&dir.join("image.ppm"), &img)?;
    let img = io::read_ppm(&dir.join("image.ppm"))?;
    let vr = run_image(ctx, &img, ImageMethod::Vr)?;
    io::write_ppm(&dir.join("image_vr.ppm"), &vr.reconstruction)?;
    io::write_tensor(&dir.join("image_vr_spectrum.anft"), &stack_spectra(&vr.spectra)?)?;

    cost(ctx, &CostArgs { ks: vec![16, 256], max_exp: 16, bit_serial: false, two_d: true, out: Some(dir.join("cost.csv")) })?;

    let summary = serde_json::json!({
        "seed": seed,
        "spectrogram": { "frames": sg.spectrogram.frames, "bins": sg.spectrogram.bins, "psnr_db": spec_psnr,
            "adc_conversions": sg.trace.iter().map(|t| t.adc_conversions).sum::<u64>() },
        "full_spectrum": { "length": full.length, "psnr_db": full_psnr,
            "adc_conversions": full.trace.iter().map(|t| t.adc_conversions).sum::<u64>() },
        "image_vr": { "width": img.width, "height": img.height, "psnr_db": vr.psnr, "ssim": vr.ssim },
    });
    io::write_text(&dir.join("summary.json"), &format!("{summary:#}\n"))?;
    Ok(format!(
        "selftest seed {seed}: spectrogram PSNR {spec_psnr:.2} dB, {}-point FFT PSNR {full_psnr:.2} dB, image PSNR {:.2} dB / SSIM {:.4}\nwrote {} files to {}\n",
        full.length,
        vr.psnr,
        vr.ssim,
        SELFTEST_FILES.len(),
        dir.display()
    ))
}
