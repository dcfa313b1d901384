mod common;

use anafft_core::device::{HardwareModel, InputEncoding};
use anafft_core::dft::reference_dft;
use anafft_core::engine::{ArrayBank, ExecutionConfig, Transform1d};
use anafft_core::fixtures::{speech_like, test_image};
use anafft_core::metrics::{gaussian_window, psnr, ssim, to_dbfs};
use anafft_core::plan::FactorPlan;
use anafft_core::reshape::VrFactors;
use anafft_core::rng::{gaussian, hash2};
use anafft_core::sigproc::{
    frame_count, ideal_spectrogram, image_spectrum_and_reconstruct, parseval_correct, reconstruct_audio, spectrogram,
    ImagePlanes, Transform2d,
};
use anafft_core::{presets, C64};

const S13: InputEncoding = InputEncoding::Signed { bits: 13 };

#[test]
fn frame_counts() {
    assert_eq!(frame_count(65536, 256, 128), 511);
    assert_eq!(frame_count(256, 256, 128), 1);
    assert_eq!(frame_count(255, 256, 128), 0);
}

#[test]
fn sine_peaks_in_its_bin() {
    let x: Vec<f64> = (0..1024).map(|i| (2.0 * std::f64::consts::PI * 1000.0 * i as f64 / 16000.0).sin()).collect();
    let s = ideal_spectrogram(&x, 256, 128, S13).unwrap().spectrogram;
    assert_eq!((s.frames, s.bins), (7, 128));
    for f in 0..s.frames {
        let peak = (0..s.bins).max_by(|&a, &b| s.get(f, a).total_cmp(&s.get(f, b))).unwrap();
        assert_eq!(peak, 16);
    }
    let db = to_dbfs(&s.data, s.max(), -80.0);
    assert_eq!(db.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 0.0);
    assert!(db.iter().all(|&v| v >= -80.0));
}

#[test]
fn ideal_engine_spectrogram() {
    let m = HardwareModel::ideal();
    let cfg = ExecutionConfig::new(m.clone(), ArrayBank::with_arrays(&[(16, 20e-6, 4)], &m).unwrap());
    let x = speech_like(2048, 16000.0, 1);
    let plan = FactorPlan::split(FactorPlan::Leaf(16), FactorPlan::Leaf(16));
    let got = spectrogram(&x, 256, 128, &Transform1d::Fft(plan), &cfg).unwrap();
    let want = ideal_spectrogram(&x, 256, 128, S13).unwrap();
    for (a, b) in got.spectra.iter().zip(&want.spectra) {
        assert!(common::rel_rms(a, b) < 2e-3);
    }
    assert_eq!(got.trace[0].dft_count, 15 * 16);
}

#[test]
fn overlap_add_round_trip() {
    let x = common::real_signal(1024, 2);
    let spectra: Vec<Vec<C64>> = (0..7)
        .map(|f| reference_dft(&x[f * 128..f * 128 + 256].iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>()))
        .collect();
    let y = reconstruct_audio(&spectra, 256, 128, 1024).unwrap();
    assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-12));
    let silent = reconstruct_audio(&vec![vec![C64::new(0.0, 0.0); 256]; 7], 256, 128, 1024).unwrap();
    assert!(silent.iter().all(|&v| v == 0.0));
}

#[test]
fn white_spectral_noise_gives_flat_residual() {
    let x = common::real_signal(4096, 3);
    let frames = frame_count(4096, 256, 128);
    let mut spectra = Vec::new();
    for f in 0..frames {
        let mut s = reference_dft(&x[f * 128..f * 128 + 256].iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>());
        for (i, c) in s.iter_mut().enumerate() {
            let k = hash2(f as u64, i as u64);
            *c += C64::new(gaussian(k), gaussian(k ^ 0x55)) * 0.1;
        }
        spectra.push(s);
    }
    let y = reconstruct_audio(&spectra, 256, 128, 4096).unwrap();
    let resid: Vec<C64> = x.iter().zip(&y).map(|(a, b)| C64::new(b - a, 0.0)).collect();
    let r = reference_dft(&resid);
    let bands: Vec<f64> = r[1..2048].chunks(256).map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>()).collect();
    let (lo, hi) = bands.iter().fold((f64::MAX, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(10.0 * (hi / lo).log10() < 6.0, "{bands:?}");
}

#[test]
fn parseval_gain_examples() {
    let x = common::signal(64, 4);
    let ex: f64 = x.iter().map(|c| c.norm_sqr()).sum();
    let ey: f64 = reference_dft(&x).iter().map(|c| c.norm_sqr()).sum();
    assert!((parseval_correct(ex, ey, 64) - 1.0).abs() < 1e-9);
    let att: f64 = reference_dft(&x).iter().map(|c| (c * 0.9).norm_sqr()).sum();
    assert!((parseval_correct(ex, att, 64) - 1.0 / 0.9).abs() < 1e-9);
    assert_eq!(parseval_correct(ex, 0.0, 64), 1.0);
}

fn psnr_oracle(a: &[f64], b: &[f64]) -> f64 {
    let mut peak = f64::MIN;
    let mut sum = 0.0;
    for i in 0..a.len() {
        peak = peak.max(a[i]);
        sum += (a[i] - b[i]) * (a[i] - b[i]);
    }
    10.0 * (peak * peak / (sum / a.len() as f64)).log10()
}

/// Direct 11x11 window sum at every valid position.
fn ssim_oracle(a: &[f64], b: &[f64], w: usize, h: usize, range: f64) -> f64 {
    let g1: Vec<f64> = (0..11).map(|i| (-((i as f64 - 5.0).powi(2)) / 4.5).exp()).collect();
    let norm: f64 = g1.iter().sum::<f64>().powi(2);
    let (c1, c2) = ((0.01 * range).powi(2), (0.03 * range).powi(2));
    let mut total = 0.0;
    let mut count = 0;
    for y in 0..=h - 11 {
        for x in 0..=w - 11 {
            let (mut ma, mut mb, mut aa, mut bb, mut ab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for dy in 0..11 {
                for dx in 0..11 {
                    let wt = g1[dy] * g1[dx] / norm;
                    let (p, q) = (a[(y + dy) * w + x + dx], b[(y + dy) * w + x + dx]);
                    ma += wt * p;
                    mb += wt * q;
                    aa += wt * p * p;
                    bb += wt * q * q;
                    ab += wt * p * q;
                }
            }
            let (va, vb, cov) = (aa - ma * ma, bb - mb * mb, ab - ma * mb);
            total += (2.0 * ma * mb + c1) * (2.0 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    total / count as f64
}

#[test]
fn metrics_match_scalar_oracles() {
    let w = gaussian_window();
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    for seed in 0..5 {
        let img = test_image(32, seed);
        let a = &img.planes[0];
        let b: Vec<f64> = a
            .iter()
            .enumerate()
            .map(|(i, &v)| (v + 8.0 * gaussian(hash2(seed, i as u64))).clamp(0.0, 255.0))
            .collect();
        assert!((psnr(a, &b).unwrap() - psnr_oracle(a, &b)).abs() < 1e-6);
        assert!((ssim(a, &b, 32, 32, 255.0).unwrap() - ssim_oracle(a, &b, 32, 32, 255.0)).abs() < 1e-4);
    }
}

#[test]
fn metric_examples() {
    let img = test_image(32, 0);
    let a = &img.planes[1];
    assert_eq!(psnr(a, a).unwrap(), f64::INFINITY);
    assert!((ssim(a, a, 32, 32, 255.0).unwrap() - 1.0).abs() < 1e-12);
    let inv: Vec<f64> = a.iter().map(|v| 255.0 - v).collect();
    assert!(ssim(a, &inv, 32, 32, 255.0).unwrap() < -0.5);

    // uniform noise on [-d, d] has variance d^2 / 3
    let big = test_image(256, 1);
    let a = &big.planes[0];
    let peak_big = a.iter().cloned().fold(0.0, f64::max);
    let d = 6.0;
    let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| v + d * (2.0 * anafft_core::rng::uniform(hash2(77, i as u64)) - 1.0)).collect();
    let expect = 10.0 * (peak_big * peak_big / (d * d / 3.0)).log10();
    assert!((psnr(a, &b).unwrap() - expect).abs() < 0.2);
    assert!(ssim(a, &b[..100], 256, 256, 255.0).is_err());
    assert!(ssim(&a[..100], &b[..100], 10, 10, 255.0).is_err());
}

fn image_cfg(model: HardwareModel, seed: u64) -> ExecutionConfig {
    let m = model.with_seed(seed);
    let bank = presets::bank(&[8], presets::Application::Image, &m).unwrap();
    ExecutionConfig::new(m, bank)
}

#[test]
fn ideal_image_round_trip() {
    let img = test_image(64, 2);
    let cfg = image_cfg(HardwareModel::ideal(), 0);
    let r = image_spectrum_and_reconstruct(&img, &Transform2d::VectorRadix(VrFactors::square(64).unwrap()), &cfg).unwrap();
    let (a, b) = (img.planes.concat(), r.reconstruction.planes.concat());
    // only the 13-bit intermediates separate this from the exact transform
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1.0));
    assert!(psnr(&a, &b).unwrap() > 50.0);
}

#[test]
fn parseval_correction_helps() {
    let img = test_image(64, 3);
    let op = Transform2d::VectorRadix(VrFactors::square(64).unwrap());
    let mut wins = 0;
    for seed in 0..10 {
        let cfg = image_cfg(HardwareModel::standard(), seed);
        let r = image_spectrum_and_reconstruct(&img, &op, &cfg).unwrap();
        let corrected = psnr(&img.planes.concat(), &r.reconstruction.planes.concat()).unwrap();
        let mut raw = Vec::new();
        for s in &r.spectra {
            let x = anafft_core::dft::inverse_dft_2d(s).unwrap();
            raw.extend(x.data().iter().map(|v| v.re.round().clamp(0.0, 255.0)));
        }
        let uncorrected = psnr(&img.planes.concat(), &raw).unwrap();
        wins += (corrected >= uncorrected) as usize;
    }
    assert!(wins >= 9, "{wins}/10");
}

#[test]
fn image_planes_validate() {
    assert!(ImagePlanes::new(2, 2, vec![vec![0.0; 3]]).is_err());
    assert!(ImagePlanes::new(2, 2, vec![]).is_err());
}
