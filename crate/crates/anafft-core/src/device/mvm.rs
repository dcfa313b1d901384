use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::input::plane_bit;
use super::{BitPlanes, HardwareModel, ProgrammedArray};
use crate::math;
use crate::rng::{gaussian_pair, hash2, StreamKey};
use crate::{Error, Result, C64};

/// Which physical columns an MVM digitizes.
#[derive(Clone, Copy, Debug)]
pub enum Columns<'a> {
    All,
    List(&'a [usize]),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MvmReadout {
    /// One code per requested column; integral unless the ADC is ideal.
    pub codes: Vec<f64>,
    pub clipped: usize,
    /// Largest column current after IR drop, before conversion.
    pub max_current: f64,
}

/// One analog MVM: rows in `active_rows` are pulsed at the read voltage and
/// each requested column current is perturbed by read noise, reduced by IR
/// drop and digitized.
///
/// Read noise is multiplicative per cell, `g (1 + N(0, gamma))`. The column
/// sum of those independent terms is drawn directly as one normal deviate
/// with standard deviation `gamma V sqrt(sum g^2)`; columns `2m` and `2m + 1`
/// share one Box-Muller draw keyed on `(key, m)`.
pub fn analog_mvm(
    array: &ProgrammedArray,
    active_rows: &[usize],
    columns: Columns<'_>,
    model: &HardwareModel,
    key: StreamKey,
) -> MvmReadout {
    let noisy = model.read_noise_gamma > 0.0;
    let (sum, sq) = column_sums(array, active_rows, columns, noisy);
    let v = model.read_voltage;
    let ir = model.ir_drop_coeff;
    let mut codes = Vec::with_capacity(sum.len());
    let mut clipped = 0;
    let mut max_current = 0.0f64;
    let mut pair = (u64::MAX, (0.0, 0.0));
    for (j, &s) in sum.iter().enumerate() {
        let mut i = v * s;
        if noisy && sq[j] > 0.0 {
            let col = match columns {
                Columns::All => j,
                Columns::List(l) => l[j],
            };
            let p = (col / 2) as u64;
            if pair.0 != p {
                pair = (p, gaussian_pair(hash2(key.0, p)));
            }
            let z = if col % 2 == 0 { pair.1 .0 } else { pair.1 .1 };
            i += model.read_noise_gamma * v * math::sqrt(sq[j]) * z;
        }
        if ir > 0.0 {
            i = model.apply_ir_drop(i, ir);
        }
        max_current = max_current.max(i);
        let (code, clip) = model.adc_convert(i);
        clipped += clip as usize;
        codes.push(code);
    }
    MvmReadout { codes, clipped, max_current }
}

/// Per-column `sum g` and (optionally) `sum g^2` over `rows`, accumulated in
/// row order.
pub(crate) fn column_sums(
    array: &ProgrammedArray,
    rows: &[usize],
    columns: Columns<'_>,
    squares: bool,
) -> (Vec<f64>, Vec<f64>) {
    let n = match columns {
        Columns::All => array.cols(),
        Columns::List(l) => l.len(),
    };
    let mut sum = vec![0.0; n];
    let mut sq = if squares { vec![0.0; n] } else { Vec::new() };
    for &r in rows {
        let g = array.actual_row(r);
        match (columns, squares) {
            (Columns::All, false) => sum.iter_mut().zip(g).for_each(|(s, &x)| *s += x),
            (Columns::All, true) => {
                sum.iter_mut().zip(g).for_each(|(s, &x)| *s += x);
                sq.iter_mut().zip(g).for_each(|(q, &x)| *q += x * x);
            }
            (Columns::List(l), false) => sum.iter_mut().zip(l).for_each(|(s, &c)| *s += g[c]),
            (Columns::List(l), true) => {
                for ((s, q), &c) in sum.iter_mut().zip(sq.iter_mut()).zip(l) {
                    let x = g[c];
                    *s += x;
                    *q += x * x;
                }
            }
        }
    }
    (sum, sq)
}

/// ADC codes of one input bit plane for every logical output: the `G+` and
/// `G-` column of each pair.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceReadout {
    pub bit: u32,
    pub negative: bool,
    pub positive_codes: Vec<f64>,
    pub negative_codes: Vec<f64>,
}

/// Digital recombination: differential pairs, input polarity and bit
/// weights, then conversion back to input units.
pub fn accumulate_bits(slices: &[SliceReadout], scale: f64, g_max: f64, model: &HardwareModel) -> Vec<f64> {
    let n = slices.first().map_or(0, |s| s.positive_codes.len());
    let mut acc = vec![0.0; n];
    for s in slices {
        let w = (1u64 << s.bit) as f64 * if s.negative { -1.0 } else { 1.0 };
        for (a, (p, q)) in acc.iter_mut().zip(s.positive_codes.iter().zip(&s.negative_codes)) {
            *a += w * (model.adc_decode(*p) - model.adc_decode(*q));
        }
    }
    let k = scale / (g_max * model.read_voltage);
    acc.into_iter().map(|v| v * k).collect()
}

/// Counters for executed elementary DFTs.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExecStats {
    pub dfts: u64,
    pub mvms: u64,
    pub conversions: u64,
    pub clipped: u64,
    pub max_current: f64,
}

impl ExecStats {
    pub fn merge(&mut self, o: &ExecStats) {
        self.dfts += o.dfts;
        self.mvms += o.mvms;
        self.conversions += o.conversions;
        self.clipped += o.clipped;
        self.max_current = self.max_current.max(o.max_current);
    }
}

/// A (possibly subsampled) window onto a programmed array that executes one
/// complex matrix-vector product.
///
/// A native view uses every row and column. `subsample_view` of an
/// `n1`-point DFT array computes an `n2`-point DFT by driving every `a`-th
/// input and reading every `b`-th output, since
/// `omega_{n1}^{(n a)(k b)} = omega_{n2}^{nk}` when `a b = n1 / n2`.
#[derive(Clone, Copy, Debug)]
pub struct DftView<'a> {
    array: &'a ProgrammedArray,
    n_in: usize,
    n_out: usize,
    a: usize,
    b: usize,
}

impl<'a> DftView<'a> {
    pub fn native(array: &'a ProgrammedArray) -> Self {
        let l = array.layout();
        Self { array, n_in: l.k_in, n_out: l.k_out, a: 1, b: 1 }
    }

    pub fn array(&self) -> &'a ProgrammedArray {
        self.array
    }

    pub fn input_len(&self) -> usize {
        self.n_in
    }

    pub fn output_len(&self) -> usize {
        self.n_out
    }

    pub fn strides(&self) -> (usize, usize) {
        (self.a, self.b)
    }

    fn is_native(&self) -> bool {
        self.a == 1 && self.b == 1 && self.n_in == self.array.layout().k_in && self.n_out == self.array.layout().k_out
    }

    #[inline]
    fn array_comp(&self, comp: usize) -> usize {
        if comp < self.n_in {
            self.a * comp
        } else {
            self.array.layout().k_in + self.a * (comp - self.n_in)
        }
    }

    #[inline]
    fn array_out(&self, j: usize) -> usize {
        if j < self.n_out {
            self.b * j
        } else {
            self.array.layout().k_out + self.b * (j - self.n_out)
        }
    }

    /// Runs the bit-serial sequence for one input vector (components laid out
    /// as `[re.., im..]`, length `2 input_len`). Up to `n_tiles` bit planes
    /// of the same polarity share one MVM, one per tile.
    pub fn execute(&self, planes: &BitPlanes, model: &HardwareModel, key: StreamKey) -> Result<(Vec<C64>, ExecStats)> {
        if planes.len() != 2 * self.n_in {
            return Err(Error::Shape(format!(
                "{} input components for a {}-input view",
                planes.len(),
                self.n_in
            )));
        }
        let layout = self.array.layout();
        let enc = planes.encoding();
        let mb = enc.magnitude_bits();
        let polarities: &[bool] = if enc.is_signed() { &[false, true] } else { &[false] };
        let tiles = layout.n_tiles;
        let native = self.is_native();
        let ints = planes.ints();
        let mut stats = ExecStats { dfts: 1, ..Default::default() };
        let mut slices = Vec::with_capacity(enc.slices());
        let mut rows = Vec::with_capacity(2 * self.n_in * tiles);
        let mut cols = Vec::new();
        let mut group = 0u64;
        for &neg in polarities {
            let mut bit = 0;
            while bit < mb {
                let used = tiles.min((mb - bit) as usize);
                rows.clear();
                for t in 0..used {
                    let b = bit + t as u32;
                    for (comp, &v) in ints.iter().enumerate() {
                        if plane_bit(v, b, neg) {
                            rows.push(layout.row(t, self.array_comp(comp)));
                        }
                    }
                }
                let full = native && used == tiles;
                if !full {
                    cols.clear();
                    for t in 0..used {
                        for j in 0..2 * self.n_out {
                            let lj = self.array_out(j);
                            cols.push(layout.col(t, lj, false));
                            cols.push(layout.col(t, lj, true));
                        }
                    }
                }
                let sel = if full { Columns::All } else { Columns::List(&cols) };
                let r = analog_mvm(self.array, &rows, sel, model, key.child(group));
                group += 1;
                stats.mvms += 1;
                stats.conversions += r.codes.len() as u64;
                stats.clipped += r.clipped as u64;
                stats.max_current = stats.max_current.max(r.max_current);
                for t in 0..used {
                    let code = |j: usize, n: bool| {
                        if full {
                            r.codes[layout.col(t, j, n)]
                        } else {
                            r.codes[(t * 2 * self.n_out + j) * 2 + n as usize]
                        }
                    };
                    let (pos, negc): (Vec<f64>, Vec<f64>) = (0..2 * self.n_out)
                        .map(|j| {
                            if full {
                                let lj = self.array_out(j);
                                (code(lj, false), code(lj, true))
                            } else {
                                (code(j, false), code(j, true))
                            }
                        })
                        .unzip();
                    slices.push(SliceReadout { bit: bit + t as u32, negative: neg, positive_codes: pos, negative_codes: negc });
                }
                bit += used as u32;
            }
        }
        let real = accumulate_bits(&slices, planes.scale(), self.array.g_max(), model);
        let out = (0..self.n_out).map(|k| C64::new(real[k], real[self.n_out + k])).collect();
        Ok((out, stats))
    }
}

/// `n2`-point DFT on an `n1`-point DFT array with input stride `a` and
/// output stride `b`, `a b n2 = n1`.
pub fn subsample_view(array: &ProgrammedArray, n2: usize, a: usize, b: usize) -> Result<DftView<'_>> {
    let l = array.layout();
    if l.k_in != l.k_out {
        return Err(Error::InvalidArgument("subsampling needs a square DFT array".into()));
    }
    if n2 == 0 || a == 0 || b == 0 || a * b * n2 != l.k_in {
        return Err(Error::InvalidArgument(format!(
            "a * b * n2 = {a} * {b} * {n2} must equal the array size {}",
            l.k_in
        )));
    }
    Ok(DftView { array, n_in: n2, n_out: n2, a, b })
}

/// Splits `ratio = a b` as evenly as possible, `a >= b`.
pub fn default_strides(ratio: usize) -> (usize, usize) {
    let mut b = 1;
    let mut d = 1;
    while d * d <= ratio {
        if ratio % d == 0 {
            b = d;
        }
        d += 1;
    }
    (ratio / b, b)
}
