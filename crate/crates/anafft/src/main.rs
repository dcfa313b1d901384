use std::path::PathBuf;
use std::process::ExitCode;

use anafft::commands::{self, Context, Format, ImageMethod};
use anafft::config::{load_model, RunConfig};
use anafft::io;
use anafft::{CliError, CliResult};
use clap::{Args, Parser, Subcommand};

/// Simulated analog in-memory FFTs: spectra, spectrograms, image transforms
/// and cost projections.
#[derive(Parser, Debug)]
#[command(name = "anafft", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// JSON run configuration (model, energy table, arrays, spectrogram).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// JSON hardware model; overrides the model in --config.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Noise seed; overrides the model's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (output directory for selftest).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent DFTs (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Run every DFT on the calling thread.
    #[arg(long, global = true)]
    serial: bool,
    /// Programmed array snapshots to use instead of freshly programmed ones.
    #[arg(long = "array", global = true)]
    arrays: Vec<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Program a DFT array and save its snapshot.
    Program {
        #[arg(long)]
        size: usize,
        /// Conductance preset: audio or image.
        #[arg(long, default_value = "audio")]
        app: String,
        /// Maximum conductance in siemens (default: preset).
        #[arg(long)]
        g_max: Option<f64>,
        #[arg(long)]
        tiles: Option<usize>,
    },
    /// Find the largest g_max that keeps the ADC out of saturation.
    Calibrate {
        #[arg(long)]
        size: usize,
        /// Workload WAV (default: bundled speech fixture).
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 99.99)]
        percentile: f64,
        #[arg(long, default_value_t = 20e-6)]
        ceiling: f64,
        #[arg(long)]
        tiles: Option<usize>,
    },
    /// Analog FFT of a whole WAV file.
    Fft {
        #[arg(long)]
        input: PathBuf,
        /// Zero-pad to the next power of two.
        #[arg(long)]
        pad: bool,
        #[arg(long, default_value = "csv")]
        format: Format,
        /// Per-stage trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Short-time analog spectrum of a WAV file.
    Spectrogram {
        #[arg(long)]
        input: PathBuf,
        /// auto, direct or factors such as 16x16 or 32x8.
        #[arg(long)]
        plan: Option<String>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        hop: Option<usize>,
        /// Write magnitudes instead of dBFS.
        #[arg(long)]
        linear: bool,
        #[arg(long, default_value = "csv")]
        format: Format,
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Resynthesize audio from the analog spectra.
        #[arg(long)]
        reconstruct: Option<PathBuf>,
    },
    /// 2-D analog transform and reconstruction of a PPM image.
    Image {
        #[arg(long)]
        input: PathBuf,
        /// vr (vector-radix FFT) or direct (row/column MVMs).
        #[arg(long, default_value = "vr")]
        method: ImageMethod,
        /// Write the per-channel spectra as a tensor file.
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// Conversion and energy scaling report (CSV).
    Cost {
        /// Array sizes.
        #[arg(long, value_delimiter = ',', default_values_t = vec![16usize, 64, 256])]
        k: Vec<usize>,
        /// Largest transform length as a power of two.
        #[arg(long, default_value_t = 24)]
        max_exp: u32,
        /// Count every bit-serial column read instead of one per output.
        #[arg(long)]
        bit_serial: bool,
        /// Add 2-D vector-radix and direct rows.
        #[arg(long = "2d")]
        two_d: bool,
    },
    /// Run every pipeline on bundled fixtures and write the artifacts.
    Selftest,
}

fn context(g: &Global) -> CliResult<Context> {
    let config = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let model = g.model.as_deref().map(load_model).transpose()?;
    let mut ctx = Context::new(config, model, g.seed);
    ctx.serial = g.serial;
    ctx.arrays = g.arrays.iter().map(|p| io::read_array(p)).collect::<CliResult<_>>()?;
    Ok(ctx)
}

fn out_or(g: &Global, default: &str) -> PathBuf {
    g.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn run(cli: Cli) -> CliResult<String> {
    let g = &cli.global;
    if g.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(g.threads)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let ctx = context(g)?;
    match cli.command {
        Command::Program { size, app, g_max, tiles } => commands::program(
            &ctx,
            &commands::ProgramArgs { size, app, g_max, tiles, out: out_or(g, &format!("dft{size}.anfa")) },
        ),
        Command::Calibrate { size, input, percentile, ceiling, tiles } => commands::calibrate(
            &ctx,
            &commands::CalibrateArgs { size, input, percentile, ceiling, tiles, out: g.out.clone() },
        ),
        Command::Fft { input, pad, format, trace } => {
            let out = out_or(g, if format == Format::Csv { "spectrum.csv" } else { "spectrum.anft" });
            commands::fft(&ctx, &commands::FftArgs { input, pad, format, trace, out })
        }
        Command::Spectrogram { input, plan, window, hop, linear, format, trace, reconstruct } => {
            let out = out_or(g, if format == Format::Csv { "spectrogram.csv" } else { "spectrogram.anft" });
            commands::spectrogram_cmd(
                &ctx,
                &commands::SpectrogramArgs { input, plan, window, hop, linear, format, trace, reconstruct, out },
            )
        }
        Command::Image { input, method, spectrum } => {
            commands::image(&ctx, &commands::ImageArgs { input, method, spectrum, out: out_or(g, "reconstruction.ppm") })
        }
        Command::Cost { k, max_exp, bit_serial, two_d } => {
            commands::cost(&ctx, &commands::CostArgs { ks: k, max_exp, bit_serial, two_d, out: g.out.clone() })
        }
        Command::Selftest => commands::selftest(&ctx, &out_or(g, "selftest")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
