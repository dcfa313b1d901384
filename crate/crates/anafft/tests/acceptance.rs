//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported as FAIL but do not fail
//! the run unless `ANAFFT_ACCEPTANCE_STRICT=1` is set. Every other failure
//! exits non-zero.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use anafft::commands::{parse_plan, run_image, Context, ImageMethod, K_MAX, SELFTEST_FILES};
use anafft_core::cost::{
    count_conversions_direct, count_conversions_fft, count_twiddles_fft, digital_comparator, energy_estimate,
    plan_min_energy, ConversionModel, DigitalFit, EnergyTable, Workload,
};
use anafft_core::device::{
    map_dft_to_targets, map_matrix_to_targets, program, quantize_input, subsample_view, BitPlanes, DftView,
    HardwareModel, InputEncoding, Pwl,
};
use anafft_core::dft::{dft_matrix, factored_dft, reference_dft};
use anafft_core::engine::{analog_fft_1d, symmetrize_spectrum, ArrayBank, ExecutionConfig, Transform1d};
use anafft_core::fixtures::{speech_like, test_image};
use anafft_core::metrics::psnr;
use anafft_core::plan::{plan_factorization, FactorPlan, PlanStrategy};
use anafft_core::presets::Application;
use anafft_core::rng::{hash2, uniform, StreamKey};
use anafft_core::sigproc::{full_spectrum, ideal_spectrogram, quantize_signal, spectrogram};
use anafft_core::tensor::{relative_rms_error, ComplexMatrix};
use anafft_core::{presets, C64};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const KNOWN_FAILURES: [&str; 2] = ["5a", "6b"];
const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const S13: InputEncoding = InputEncoding::Signed { bits: 13 };

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, detail }
}

fn signal(n: usize, seed: u64) -> Vec<C64> {
    (0..n as u64)
        .map(|i| C64::new(2.0 * uniform(hash2(seed, 2 * i)) - 1.0, 2.0 * uniform(hash2(seed, 2 * i + 1)) - 1.0))
        .collect()
}

fn ctx(seed: u64) -> Context {
    Context::new(Default::default(), None, Some(seed))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let m = HardwareModel::ideal();
    let mut worst: (f64, String) = (0.0, String::new());
    for k in [4usize, 16, 256] {
        for n in [4usize, 16, 64, 256, 1024, 4096] {
            let plan = plan_factorization(n, k, &PlanStrategy::MinDepth).unwrap();
            let mut leaves = plan.leaves();
            leaves.sort_unstable();
            leaves.dedup();
            let entries: Vec<_> = leaves.iter().map(|&l| (l, presets::g_max(l, Application::Audio), presets::n_tiles(l))).collect();
            let cfg = ExecutionConfig::new(m.clone(), ArrayBank::with_arrays(&entries, &m).unwrap());
            let x = signal(n, (k * n) as u64);
            let e = relative_rms_error(&analog_fft_1d(&x, &plan, &cfg).unwrap().output, &reference_dft(&x));
            if e >= worst.0 {
                worst = (e, format!("N={n} K={k} {plan}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        "1",
        worst.0 < 2e-3 && secs < 60.0,
        format!("ideal hardware, worst relative RMS {:.2e} at {}, {secs:.1} s to run", worst.0, worst.1),
    )
}

fn criterion_2() -> Outcome {
    let one = ConversionModel(1);
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [4u64, 16] {
        let ku = k as usize;
        let p2 = plan_factorization(ku * ku, ku, &PlanStrategy::MinDepth).unwrap();
        let p4 = plan_factorization(ku.pow(4), ku, &PlanStrategy::MinDepth).unwrap();
        let got = [count_conversions_fft(&p2, one), count_conversions_fft(&p4, one), count_twiddles_fft(&p2), count_twiddles_fft(&p4)];
        let want = [4 * k * k, 8 * k.pow(4), k * k, 3 * k.pow(4)];
        ok &= got == want;
        parts.push(format!("K={k}: {got:?}"));
    }
    outcome("2", ok, format!("conversions and twiddles at N=K^2, K^4: {}", parts.join("; ")))
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    cov / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

fn criterion_3() -> Outcome {
    let one = ConversionModel(1);
    let table = EnergyTable::standard();
    let md = PlanStrategy::MinDepth;
    let ns: Vec<usize> = (2..=6).map(|s| 16usize.pow(s)).collect();
    let lx: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let conv: Vec<f64> =
        ns.iter().map(|&n| count_conversions_fft(&plan_factorization(n, 16, &md).unwrap(), one) as f64).collect();
    let model: Vec<f64> = ns.iter().map(|&n| n as f64 * (n as f64).ln() / 16f64.ln()).collect();
    let fft_slope = slope(&lx, &conv.iter().map(|c| c.ln()).collect::<Vec<_>>());
    let model_slope = slope(&lx, &model.iter().map(|c| c.ln()).collect::<Vec<_>>());
    let ratios: Vec<f64> = conv.iter().zip(&model).map(|(c, m)| c / m).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let fit_ok = (fft_slope / model_slope - 1.0).abs() <= 0.1 && ratios.iter().all(|r| (r / mean - 1.0).abs() <= 0.1);

    let dn: Vec<usize> = (12..=24).map(|e| 1usize << e).collect();
    let dx: Vec<f64> = dn.iter().map(|&n| (n as f64).ln()).collect();
    let dy: Vec<f64> = dn.iter().map(|&n| (count_conversions_direct(n, 256, one) as f64).ln()).collect();
    let direct_slope = slope(&dx, &dy);

    let mut order_ok = true;
    for &n in &dn {
        let p256 = plan_min_energy(n, 256, &table).unwrap();
        let p16 = plan_min_energy(n, 16, &table).unwrap();
        let c = [count_conversions_fft(&p256, one), count_conversions_fft(&p16, one), count_conversions_direct(n, 256, one)];
        let e = [
            energy_estimate(&Workload::Fft1d(p256), &table, one).unwrap().energy_joules,
            energy_estimate(&Workload::Fft1d(p16), &table, one).unwrap().energy_joules,
            energy_estimate(&Workload::Direct1d { n, k_max: 256 }, &table, one).unwrap().energy_joules,
        ];
        order_ok &= c[0] < c[1] && c[1] < c[2] && e[0] < e[1] && e[1] < e[2];
    }
    outcome(
        "3",
        fit_ok && (direct_slope - 2.0).abs() <= 0.05 && order_ok,
        format!(
            "FFT slope {fft_slope:.3} vs N log_K N slope {model_slope:.3}, direct slope {direct_slope:.3}, \
             FFT(256) < FFT(16) < direct(256) for N=2^12..2^24: {order_ok}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let table = EnergyTable::standard();
    let one = ConversionModel(1);
    let leaf = energy_estimate(&Workload::Fft1d(FactorPlan::Leaf(256)), &table, one).unwrap().energy_joules;
    let e = |w: Workload| energy_estimate(&w, &table, one).unwrap().energy_joules;
    let (d64, v64) = (e(Workload::Direct2d { n: 64, k_max: 256 }), e(Workload::VrFft2d { n: 64, k_max: 256 }));
    let (d1k, v1k) = (e(Workload::Direct2d { n: 1024, k_max: 256 }), e(Workload::VrFft2d { n: 1024, k_max: 256 }));
    let mut detail = format!(
        "Leaf(256) = {leaf:e} J; 64x64 direct {d64:.3e} < VR {v64:.3e}; 1024x1024 VR {v1k:.3e} < direct {d1k:.3e}"
    );
    match std::env::var("ANAFFT_DIGITAL_COEFF").ok().and_then(|v| v.parse::<f64>().ok()) {
        Some(c) => {
            let d = digital_comparator(1024, &DigitalFit { coefficient: c, log_base: 2.0, dims: 2 }).unwrap();
            detail += &format!("; digital/analog at 1024x1024 = {:.2} (not asserted)", d / v1k);
        }
        None => detail += "; digital comparator skipped (set ANAFFT_DIGITAL_COEFF)",
    }
    outcome("4", leaf == 6.496e-9 && d64 < v64 && v1k < d1k, detail)
}

fn spectrogram_psnr(ctx: &Context, x: &[f64], plan: &str) -> f64 {
    let op = parse_plan(plan, 256, K_MAX).unwrap();
    let sizes = match &op {
        Transform1d::Fft(p) => p.leaves(),
        Transform1d::Direct { .. } => vec![256],
    };
    let cfg = ctx.exec(ctx.bank(&sizes, Application::Audio).unwrap());
    let r = spectrogram(x, 256, 128, &op, &cfg).unwrap();
    let ideal = ideal_spectrogram(x, 256, 128, S13).unwrap();
    psnr(&ideal.spectrogram.data, &r.spectrogram.data).unwrap()
}

fn count_in<T: Copy>(v: &[T], f: impl Fn(T) -> bool) -> usize {
    v.iter().filter(|&&x| f(x)).count()
}

fn fmt(v: &[f64]) -> String {
    v.iter().map(|p| format!("{p:.1}")).collect::<Vec<_>>().join(", ")
}

fn criterion_5a() -> Outcome {
    let x = speech_like(16000, 16000.0, 0);
    let p: Vec<f64> = SEEDS.iter().map(|&s| spectrogram_psnr(&ctx(s), &x, "16x16")).collect();
    let n = count_in(&p, |v| (35.0..=48.0).contains(&v));
    outcome("5a", n >= 4, format!("256-point (16x16) spectrogram PSNR [{}] dB, {n}/5 in [35, 48]", fmt(&p)))
}

fn criterion_5b() -> Outcome {
    let x = speech_like(65536, 16000.0, 0);
    let q = quantize_signal(&x, S13).unwrap().values();
    let mut p = Vec::new();
    for &s in &SEEDS {
        let c = ctx(s);
        let cfg = c.exec(c.bank(&[K_MAX], Application::Audio).unwrap());
        let r = full_spectrum(&x, &cfg, false).unwrap();
        let exact = factored_dft(&q, &cfg.bank.plan_for(65536).unwrap()).unwrap();
        p.push(psnr(&symmetrize_spectrum(&exact), &symmetrize_spectrum(&r.spectrum)).unwrap());
    }
    let n = count_in(&p, |v| v >= 30.0);
    outcome("5b", n >= 4, format!("65536-point FFT PSNR [{}] dB, {n}/5 >= 30", fmt(&p)))
}

fn criterion_5c() -> Outcome {
    let img = test_image(256, 0);
    let p: Vec<f64> = SEEDS.iter().map(|&s| run_image(&ctx(s), &img, ImageMethod::Vr).unwrap().psnr).collect();
    let n = count_in(&p, |v| v > 25.0);
    outcome("5c", n >= 4, format!("256x256 VR-FFT image PSNR [{}] dB, {n}/5 > 25", fmt(&p)))
}

fn criterion_6a() -> Outcome {
    let img = test_image(256, 0);
    let mut wins = 0;
    let mut margins = Vec::new();
    for s in 1..=10 {
        let c = ctx(s);
        let vr = run_image(&c, &img, ImageMethod::Vr).unwrap().ssim;
        let direct = run_image(&c, &img, ImageMethod::Direct).unwrap().ssim;
        wins += (vr > direct) as usize;
        margins.push(vr - direct);
    }
    let mean = margins.iter().sum::<f64>() / 10.0;
    outcome("6a", wins >= 9, format!("VR SSIM > direct-256 SSIM in {wins}/10 seeds, mean margin {mean:.4}"))
}

fn criterion_6b() -> Outcome {
    let plans = ["16x16", "32x8", "64x4", "direct"];
    let utterances: Vec<Vec<f64>> = (0..8).map(|u| speech_like(16000, 16000.0, 100 + u)).collect();
    let mut means = Vec::new();
    let mut sds = Vec::new();
    for plan in plans {
        let p: Vec<f64> = utterances.iter().enumerate().map(|(u, x)| spectrogram_psnr(&ctx(u as u64 + 1), x, plan)).collect();
        let m = p.iter().sum::<f64>() / p.len() as f64;
        let sd = (p.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (p.len() - 1) as f64).sqrt();
        means.push(m);
        sds.push(sd);
    }
    let ok = (1..means.len()).all(|i| means[i] <= means[i - 1] + sds[i].max(sds[i - 1]));
    outcome(
        "6b",
        ok,
        format!("mean spectrogram PSNR over 8 utterances for {plans:?}: [{}] dB (sd [{}])", fmt(&means), fmt(&sds)),
    )
}

fn run_view(view: &DftView<'_>, x: &[C64], model: &HardwareModel) -> Vec<C64> {
    let comps: Vec<f64> = x.iter().map(|c| c.re).chain(x.iter().map(|c| c.im)).collect();
    view.execute(&quantize_input(&comps, S13).unwrap(), model, StreamKey(0)).unwrap().0
}

fn criterion_7() -> Outcome {
    let m = HardwareModel::ideal();
    let g = presets::g_max(256, Application::Audio);
    let big = program(&map_dft_to_targets(&dft_matrix(256), g, 1).unwrap(), &m, 256).unwrap();
    let small = program(&map_dft_to_targets(&dft_matrix(16), g, 1).unwrap(), &m, 16).unwrap();
    let view = subsample_view(&big, 16, 4, 4).unwrap();
    let exact = (0..20).all(|s| {
        let x = signal(16, s);
        run_view(&view, &x, &m) == run_view(&DftView::native(&small), &x, &m)
    });

    let x = speech_like(16000, 16000.0, 0);
    let op = parse_plan("16x16", 256, K_MAX).unwrap();
    let ideal = ideal_spectrogram(&x, 256, 128, S13).unwrap();
    let run = |cfg: &ExecutionConfig| {
        psnr(&ideal.spectrogram.data, &spectrogram(&x, 256, 128, &op, cfg).unwrap().spectrogram.data).unwrap()
    };
    // Native DFT-16 programmed like the DFT-256 it is compared against.
    let (mut diffs, mut preset) = (Vec::new(), Vec::new());
    for &s in &SEEDS {
        let c = ctx(s);
        let mut matched = ArrayBank::new();
        matched.program_dft(16, g, 1, &c.model).unwrap();
        let reused = run(&c.exec(c.bank(&[256], Application::Audio).unwrap()));
        diffs.push(run(&c.exec(matched)) - reused);
        preset.push(run(&c.exec(c.bank(&[16], Application::Audio).unwrap())) - reused);
    }
    let worst = diffs.iter().fold(0.0f64, |w, d| w.max(d.abs()));
    outcome(
        "7",
        exact && worst <= 1.0,
        format!(
            "ideal subsample == native: {exact}; noisy 16x16 spectrogram native - reused PSNR [{}] dB \
             (native at its own preset g_max: [{}] dB)",
            fmt(&diffs),
            fmt(&preset)
        ),
    )
}

fn selftest(dir: &Path, extra: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_anafft"))
        .args(["--seed", "7", "--out", dir.to_str().unwrap()])
        .args(extra)
        .arg("selftest")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).into_owned())
    }
}

fn criterion_8() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 4] = [&[], &[], &["--serial"], &["--threads", "2"]];
    let mut dirs = Vec::new();
    for (i, extra) in runs.iter().enumerate() {
        let d = root.path().join(format!("run{i}"));
        if let Err(e) = selftest(&d, extra) {
            return outcome("8", false, format!("selftest run {i} failed: {e}"));
        }
        dirs.push(d);
    }
    let mut mismatched = Vec::new();
    for f in SELFTEST_FILES {
        let first = std::fs::read(dirs[0].join(f)).unwrap();
        if dirs[1..].iter().any(|d| std::fs::read(d.join(f)).unwrap() != first) {
            mismatched.push(f);
        }
    }
    outcome(
        "8",
        mismatched.is_empty(),
        format!(
            "{} selftest files over 4 runs (repeat, --serial, --threads 2), mismatched: {mismatched:?}",
            SELFTEST_FILES.len()
        ),
    )
}

fn suite(name: &str, failures: &mut Vec<String>, run: impl FnOnce(&mut TestRunner) -> Result<(), String>) {
    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    if let Err(e) = run(&mut runner) {
        failures.push(format!("{name}: {e}"));
    }
}

fn criterion_9() -> Outcome {
    let mut failures = Vec::new();
    let cplx = (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b));

    suite("parseval", &mut failures, |r| {
        r.run(&prop::collection::vec(cplx.clone(), 1..=256), |x| {
            let ex: f64 = x.iter().map(|c| c.norm_sqr()).sum();
            let ey: f64 = reference_dft(&x).iter().map(|c| c.norm_sqr()).sum::<f64>() / x.len() as f64;
            prop_assert!((ex - ey).abs() <= 1e-9 * ex.max(1.0));
            Ok(())
        })
        .map_err(|e| e.to_string())
    });

    suite("adc clip bounds", &mut failures, |r| {
        let m = HardwareModel::standard();
        r.run(&(-5e-6f64..60e-6), |i| {
            let (code, clipped) = m.adc_convert(i);
            prop_assert!((0.0..=m.adc_max_code()).contains(&code));
            prop_assert_eq!(clipped, i > m.adc_range_max);
            prop_assert!(m.adc_decode(code) <= m.adc_range_max);
            Ok(())
        })
        .map_err(|e| e.to_string())
    });

    suite("differential mapping", &mut failures, |r| {
        r.run(&(1usize..8, 1usize..8, 1usize..4, prop::collection::vec(cplx.clone(), 64), 1e-6f64..40e-6), |(rows, cols, tiles, v, g)| {
            let w = ComplexMatrix::from_fn(rows, cols, |a, b| v[a * 8 + b]);
            let a = program(&map_matrix_to_targets(&w, g, tiles).unwrap(), &HardwareModel::ideal(), 0).unwrap();
            for t in 0..tiles {
                for (x, y) in a.decoded_weights(t).data().iter().zip(w.data()) {
                    prop_assert!((x - y).norm() < 1e-12);
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    });

    suite("bit planes", &mut failures, |r| {
        r.run(&(2u32..16, prop::collection::vec(any::<i32>(), 1..64)), |(bits, raw)| {
            let enc = InputEncoding::Signed { bits };
            let ints: Vec<i32> = raw.iter().map(|v| v % (enc.max_int() + 1)).collect();
            let p = BitPlanes::from_ints(ints.clone(), 0.5, enc).unwrap();
            prop_assert_eq!(p.reconstruct(), ints.iter().map(|&v| v as f64 * 0.5).collect::<Vec<_>>());
            Ok(())
        })
        .map_err(|e| e.to_string())
    });

    suite("tiling independence", &mut failures, |r| {
        let m = HardwareModel { read_noise_gamma: 0.0, ir_drop_coeff: 0.0, sigma_prog: Pwl::zero(), ..HardwareModel::standard() };
        r.run(&(prop::sample::select(vec![2usize, 4, 8]), 2usize..=4, any::<u64>()), |(k, tiles, seed)| {
            let x = signal(k, seed);
            let arr = |t| program(&map_dft_to_targets(&dft_matrix(k), 20e-6, t).unwrap(), &m, k as u64).unwrap();
            let (tiled, flat) = (arr(tiles), arr(1));
            prop_assert_eq!(run_view(&DftView::native(&tiled), &x, &m), run_view(&DftView::native(&flat), &x, &m));
            Ok(())
        })
        .map_err(|e| e.to_string())
    });

    outcome("9", failures.is_empty(), format!("5 invariant suites x 1000 cases, failures: {failures:?}"))
}

fn main() -> ExitCode {
    let strict = std::env::var("ANAFFT_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let criteria: [fn() -> Outcome; 12] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5a,
        criterion_5b,
        criterion_5c,
        criterion_6a,
        criterion_6b,
        criterion_7,
        criterion_8,
        criterion_9,
    ];
    let mut unexpected = 0;
    let mut known = 0;
    for c in criteria {
        let start = Instant::now();
        let o = c();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_FAILURES.contains(&o.id) { " [known]" } else { "" };
        println!("{tag} {:<3} {} ({:.1} s){note}", o.id, o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            if KNOWN_FAILURES.contains(&o.id) {
                known += 1;
            } else {
                unexpected += 1;
            }
        }
    }
    println!("acceptance: {unexpected} unexpected failure(s), {known} known failure(s)");
    if unexpected > 0 || (strict && known > 0) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
