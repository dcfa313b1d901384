#![allow(dead_code)]

use anafft_core::rng::{hash2, uniform};
use anafft_core::C64;

pub fn signal(n: usize, seed: u64) -> Vec<C64> {
    (0..n as u64)
        .map(|i| C64::new(2.0 * uniform(hash2(seed, 2 * i)) - 1.0, 2.0 * uniform(hash2(seed, 2 * i + 1)) - 1.0))
        .collect()
}

pub fn real_signal(n: usize, seed: u64) -> Vec<f64> {
    (0..n as u64).map(|i| 2.0 * uniform(hash2(seed, i)) - 1.0).collect()
}

pub fn max_err(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn rel_rms(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Textbook recursive radix-2 FFT, written independently of the library.
pub fn radix2(x: &[C64]) -> Vec<C64> {
    let n = x.len();
    if n == 1 {
        return x.to_vec();
    }
    assert!(n.is_power_of_two());
    let even: Vec<C64> = x.iter().step_by(2).copied().collect();
    let odd: Vec<C64> = x.iter().skip(1).step_by(2).copied().collect();
    let (e, o) = (radix2(&even), radix2(&odd));
    let mut out = vec![C64::new(0.0, 0.0); n];
    for k in 0..n / 2 {
        let t = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / n as f64) * o[k];
        out[k] = e[k] + t;
        out[k + n / 2] = e[k] - t;
    }
    out
}

/// Naive 2-D DFT straight from the double sum.
pub fn dft2_naive(x: &[C64], m: usize, n: usize) -> Vec<C64> {
    let tau = 2.0 * std::f64::consts::PI;
    let mut out = vec![C64::new(0.0, 0.0); m * n];
    for km in 0..m {
        for kn in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..m {
                for b in 0..n {
                    let ph = -tau * ((a * km) as f64 / m as f64 + (b * kn) as f64 / n as f64);
                    acc += x[a * n + b] * C64::from_polar(1.0, ph);
                }
            }
            out[km * n + kn] = acc;
        }
    }
    out
}
