//! Deterministic synthetic test signals.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::rng::{gaussian, hash2, hash_words, uniform};
use crate::sigproc::ImagePlanes;

const TAU: f64 = 2.0 * core::f64::consts::PI;

struct Draws {
    seed: u64,
    n: u64,
}

impl Draws {
    fn next(&mut self) -> f64 {
        self.n += 1;
        uniform(hash2(self.seed, self.n))
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }
}

/// Speech-like audio in `[-0.9, 0.9]`: voiced segments (gliding pitch,
/// harmonics shaped by three formant resonances), fricative noise bursts and
/// pauses.
pub fn speech_like(len: usize, sample_rate: f64, seed: u64) -> Vec<f64> {
    let mut out = vec![0.0; len];
    let mut d = Draws { seed: hash2(0x5_9eec, seed), n: 0 };
    let mut t = 0usize;
    let mut noise_id = 0u64;
    while t < len {
        let kind = d.next();
        if kind < 0.68 {
            let dur = (d.range(0.08, 0.25) * sample_rate) as usize;
            let f0a = d.range(105.0, 220.0);
            let f0b = f0a * d.range(0.8, 1.2);
            let formants = [
                (d.range(300.0, 800.0), d.range(60.0, 120.0)),
                (d.range(900.0, 2300.0), d.range(80.0, 160.0)),
                (d.range(2400.0, 3300.0), d.range(120.0, 220.0)),
            ];
            let level = d.range(0.25, 1.0);
            let harmonics = ((0.45 * sample_rate) / f0a.max(f0b)) as usize;
            let gains: Vec<f64> = (1..=harmonics)
                .map(|h| {
                    let f = h as f64 * 0.5 * (f0a + f0b);
                    let shape: f64 = formants.iter().map(|&(fc, bw)| 1.0 / (1.0 + ((f - fc) / bw) * ((f - fc) / bw))).sum();
                    (0.02 + shape) / math::sqrt(h as f64)
                })
                .collect();
            let mut phase = 0.0;
            for i in 0..dur.min(len - t) {
                let u = i as f64 / dur as f64;
                let f0 = f0a + (f0b - f0a) * u;
                phase += TAU * f0 / sample_rate;
                let env = math::sin(core::f64::consts::PI * u);
                let s: f64 = gains.iter().enumerate().map(|(h, g)| g * math::sin((h + 1) as f64 * phase)).sum();
                out[t + i] += level * env * env * s;
            }
            t += dur;
        } else if kind < 0.84 {
            let dur = (d.range(0.04, 0.12) * sample_rate) as usize;
            let level = d.range(0.05, 0.2);
            noise_id += 1;
            let mut prev = 0.0;
            for i in 0..dur.min(len - t) {
                let u = i as f64 / dur as f64;
                let w = gaussian(hash_words(&[seed, noise_id, i as u64]));
                let env = math::sin(core::f64::consts::PI * u);
                out[t + i] += level * env * (w - prev);
                prev = w;
            }
            t += dur;
        } else {
            t += (d.range(0.03, 0.12) * sample_rate) as usize;
        }
    }
    for (i, v) in out.iter_mut().enumerate() {
        *v += 1e-3 * gaussian(hash_words(&[seed, u64::MAX, i as u64]));
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        out.iter_mut().for_each(|v| *v *= 0.9 / peak);
    }
    out
}

/// Integer-valued RGB scene (`size x size`, values in `0..=255`): sky and
/// ground gradients, a sun, buildings with lit windows, a road with lane
/// markings and fine texture.
pub fn test_image(size: usize, seed: u64) -> ImagePlanes {
    let s = size as f64 / 256.0;
    let mut planes = vec![vec![0.0; size * size]; 3];
    let horizon = 150.0 * s;
    let buildings = [(20.0, 60.0, 70.0, 120.0), (75.0, 110.0, 50.0, 150.0), (120.0, 175.0, 90.0, 110.0), (185.0, 235.0, 40.0, 135.0)];
    for y in 0..size {
        for x in 0..size {
            let (fx, fy) = (x as f64, y as f64);
            let mut rgb = if fy < horizon {
                let u = fy / horizon;
                [90.0 + 80.0 * u, 140.0 + 60.0 * u, 230.0 - 30.0 * u]
            } else {
                let u = (fy - horizon) / (size as f64 - horizon);
                [70.0 + 60.0 * u, 120.0 - 20.0 * u, 50.0 + 10.0 * u]
            };
            let (dx, dy) = (fx - 205.0 * s, fy - 40.0 * s);
            let r = math::sqrt(dx * dx + dy * dy);
            if r < 18.0 * s {
                rgb = [255.0, 236.0, 120.0];
            } else if r < 30.0 * s {
                let k = (30.0 * s - r) / (12.0 * s);
                rgb = [rgb[0] + 80.0 * k, rgb[1] + 70.0 * k, rgb[2] - 20.0 * k];
            }
            for (i, &(x0, x1, top, shade)) in buildings.iter().enumerate() {
                if fx >= x0 * s && fx < x1 * s && fy >= top * s && fy < horizon {
                    rgb = [shade, shade + 5.0 * i as f64, shade + 12.0];
                    let wx = ((fx - x0 * s) / (6.0 * s)) as usize;
                    let wy = ((fy - top * s) / (8.0 * s)) as usize;
                    let inside_x = (fx - x0 * s) % (6.0 * s) > 2.0 * s;
                    let inside_y = (fy - top * s) % (8.0 * s) > 3.0 * s;
                    if inside_x && inside_y {
                        let lit = hash_words(&[seed, i as u64, wx as u64, wy as u64]) % 3 == 0;
                        rgb = if lit { [250.0, 220.0, 140.0] } else { [40.0, 45.0, 60.0] };
                    }
                }
            }
            let road = fy - horizon - 0.6 * (fx - 128.0 * s);
            if fy > horizon && road.abs() < 12.0 * s + 0.3 * (fy - horizon) {
                rgb = [75.0, 75.0, 80.0];
                if road.abs() < 1.5 * s && ((fy / (10.0 * s)) as usize) % 2 == 0 {
                    rgb = [245.0, 245.0, 235.0];
                }
            }
            let n = 5.0 * gaussian(hash_words(&[seed, 0x7e47, x as u64, y as u64]));
            for c in 0..3 {
                planes[c][y * size + x] = math::round(rgb[c] + n).clamp(0.0, 255.0);
            }
        }
    }
    ImagePlanes { width: size, height: size, planes }
}
