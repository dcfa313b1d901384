use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::bank::Partitioned;
use super::{build_trace, AnalogResult, ExecutionConfig};
use crate::device::{quantize_with_scale, BitPlanes, DftView, ExecStats, InputEncoding};
use crate::dft::omega;
use crate::plan::FactorPlan;
use crate::reshape::{line_starts, vr_axis_swap, vr_reshape, vr_reshape_output, vr_twiddle, VrFactors};
use crate::rng::StreamKey;
use crate::tensor::{max_abs_component, ComplexTensor};
use crate::{Error, Result, C64};

/// A complex vector on an integer grid: value = `ints * scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedVector {
    pub ints: Vec<[i32; 2]>,
    pub scale: f64,
    pub encoding: InputEncoding,
}

impl QuantizedVector {
    /// Scale set by the largest real or imaginary magnitude.
    pub fn quantize(x: &[C64], encoding: InputEncoding) -> Result<Self> {
        encoding.validate()?;
        let scale = max_abs_component(x) / encoding.max_int() as f64;
        Self::with_scale(x, encoding, scale)
    }

    pub fn with_scale(x: &[C64], encoding: InputEncoding, scale: f64) -> Result<Self> {
        let comps: Vec<f64> = x.iter().flat_map(|c| [c.re, c.im]).collect();
        let planes = quantize_with_scale(&comps, encoding, scale)?;
        let ints = planes.ints().chunks_exact(2).map(|p| [p[0], p[1]]).collect();
        Ok(Self { ints, scale, encoding })
    }

    pub fn len(&self) -> usize {
        self.ints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ints.is_empty()
    }

    pub fn values(&self) -> Vec<C64> {
        self.ints.iter().map(|v| C64::new(v[0] as f64 * self.scale, v[1] as f64 * self.scale)).collect()
    }

    fn planes(&self) -> Result<BitPlanes> {
        let comps = self.ints.iter().map(|v| v[0]).chain(self.ints.iter().map(|v| v[1])).collect();
        BitPlanes::from_ints(comps, self.scale, self.encoding)
    }
}

/// Input format of the first stage; `scale: None` derives it from the data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageInput {
    pub encoding: InputEncoding,
    pub scale: Option<f64>,
}

impl StageInput {
    /// 8-bit pixels applied as-is (unit scale).
    pub fn pixels() -> Self {
        Self { encoding: InputEncoding::Unsigned { bits: 8 }, scale: Some(1.0) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Transform1d {
    Fft(FactorPlan),
    /// Single-stage MVM, partitioned into `k_max` blocks when larger.
    Direct { k_max: usize },
}

impl Transform1d {
    pub fn stage_sizes(&self, n: usize) -> Vec<usize> {
        match self {
            Transform1d::Fft(p) => p.leaves(),
            Transform1d::Direct { .. } => vec![n],
        }
    }
}

#[derive(Clone, Copy)]
enum LineOp<'p> {
    Plan(&'p FactorPlan),
    Direct(usize),
}

impl LineOp<'_> {
    fn stages(&self) -> usize {
        match self {
            LineOp::Plan(p) => p.leaf_count(),
            LineOp::Direct(_) => 1,
        }
    }
}

struct QTensor {
    shape: Vec<usize>,
    q: QuantizedVector,
}

struct Runner<'a> {
    cfg: &'a ExecutionConfig,
    partition: Option<Partitioned>,
}

type Staged<T> = (T, Vec<ExecStats>);

impl<'a> Runner<'a> {
    fn new(cfg: &'a ExecutionConfig) -> Result<Self> {
        cfg.model.validate()?;
        Ok(Self { cfg, partition: None })
    }

    /// Makes the `n`-point partitioned array available when `n > k_max`.
    fn with_partition(mut self, n: usize, k_max: usize) -> Result<Self> {
        if n <= k_max || self.cfg.bank.partition(n).is_some() {
            return Ok(self);
        }
        let base = self.cfg.bank.get(k_max).ok_or(Error::MissingArray(k_max))?;
        let p = Partitioned::program(n, k_max, base.g_max(), base.layout().n_tiles, &self.cfg.model)?;
        self.partition = Some(p);
        Ok(self)
    }

    fn requantize(&self, t: &ComplexTensor) -> Result<QTensor> {
        Ok(QTensor {
            shape: t.shape().to_vec(),
            q: QuantizedVector::quantize(t.data(), self.cfg.intermediate_encoding())?,
        })
    }

    fn map_lines<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.cfg.parallel && n > 1 {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    fn run_op(&self, q: &QuantizedVector, op: LineOp<'_>, key: StreamKey) -> Result<Staged<Vec<C64>>> {
        match op {
            LineOp::Plan(p) => self.run_plan(q, p, key),
            LineOp::Direct(k) => self.run_direct(q, k, key),
        }
    }

    fn leaf(&self, view: DftView<'_>, q: &QuantizedVector, key: StreamKey) -> Result<(Vec<C64>, ExecStats)> {
        view.execute(&q.planes()?, &self.cfg.model, key)
    }

    fn run_plan(&self, q: &QuantizedVector, plan: &FactorPlan, key: StreamKey) -> Result<Staged<Vec<C64>>> {
        if q.len() != plan.size() {
            return Err(Error::Shape(format!("{}-point plan given {} points", plan.size(), q.len())));
        }
        match plan {
            FactorPlan::Leaf(n) => {
                let (out, st) = self.leaf(self.cfg.bank.resolve(*n)?, q, key)?;
                Ok((out, vec![st]))
            }
            FactorPlan::Split { n1, n2, outer, inner } => {
                let (n1, n2) = (*n1, *n2);
                let n = n1 * n2;
                let mut ints = Vec::with_capacity(n);
                for a in 0..n1 {
                    for b in 0..n2 {
                        ints.push(q.ints[a + n1 * b]);
                    }
                }
                let qt = QTensor { shape: vec![n1, n2], q: QuantizedVector { ints, ..q.clone() } };
                let (mut mid, mut stats) = self.run_lines(&qt, 1, LineOp::Plan(inner), key.child(0))?;
                for (i, v) in mid.data_mut().iter_mut().enumerate() {
                    *v *= omega(n, (i / n2) * (i % n2));
                }
                let q2 = self.requantize(&mid)?;
                let (out, s2) = self.run_lines(&q2, 0, LineOp::Plan(outer), key.child(1))?;
                stats.extend(s2);
                Ok((out.into_data(), stats))
            }
        }
    }

    fn run_direct(&self, q: &QuantizedVector, k_max: usize, key: StreamKey) -> Result<Staged<Vec<C64>>> {
        let n = q.len();
        if n <= k_max {
            let (out, st) = self.leaf(self.cfg.bank.resolve(n)?, q, key)?;
            return Ok((out, vec![st]));
        }
        let part = self
            .cfg
            .bank
            .partition(n)
            .or(self.partition.as_ref().filter(|p| p.n == n))
            .ok_or(Error::MissingArray(n))?;
        let nb = part.blocks();
        let mut out = vec![C64::new(0.0, 0.0); n];
        let mut st = ExecStats::default();
        for j in 0..nb {
            let o0 = j * part.block;
            for i in 0..nb {
                let i0 = i * part.block;
                let i1 = (i0 + part.block).min(n);
                let sub = QuantizedVector { ints: q.ints[i0..i1].to_vec(), ..q.clone() };
                let view = DftView::native(&part.arrays[j * nb + i]);
                let (y, s) = self.leaf(view, &sub, key.child((j * nb + i) as u64))?;
                for (o, v) in out[o0..].iter_mut().zip(y) {
                    *o += v;
                }
                st.merge(&s);
            }
        }
        st.dfts = 1;
        Ok((out, vec![st]))
    }

    /// Applies `op` to every line along `axis`.
    fn run_lines(&self, qt: &QTensor, axis: usize, op: LineOp<'_>, key: StreamKey) -> Result<Staged<ComplexTensor>> {
        let shape = &qt.shape;
        let len = shape[axis];
        let stride: usize = shape[axis + 1..].iter().product();
        let starts = line_starts(shape, axis);
        let results = self.map_lines(starts.len(), |li| {
            let base = starts[li];
            let ints = (0..len).map(|i| qt.q.ints[base + i * stride]).collect();
            let line = QuantizedVector { ints, scale: qt.q.scale, encoding: qt.q.encoding };
            self.run_op(&line, op, key.child(li as u64))
        });
        let mut out = ComplexTensor::zeros(shape);
        let mut stats = vec![ExecStats::default(); op.stages()];
        let data = out.data_mut();
        for (res, &base) in results.into_iter().zip(&starts) {
            let (y, s) = res?;
            for (i, v) in y.into_iter().enumerate() {
                data[base + i * stride] = v;
            }
            for (acc, s) in stats.iter_mut().zip(&s) {
                acc.merge(s);
            }
        }
        Ok((out, stats))
    }
}

pub(crate) fn root_key(cfg: &ExecutionConfig) -> StreamKey {
    StreamKey::root(cfg.model.rng_seed, cfg.stream)
}

/// Runs a 1-D transform on pre-quantized input with an explicit noise key.
pub fn analog_transform_1d(
    q: &QuantizedVector,
    op: &Transform1d,
    cfg: &ExecutionConfig,
    key: StreamKey,
) -> Result<AnalogResult<Vec<C64>>> {
    let n = q.len();
    let (runner, line) = match op {
        Transform1d::Fft(p) => (Runner::new(cfg)?, LineOp::Plan(p)),
        Transform1d::Direct { k_max } => (Runner::new(cfg)?.with_partition(n, *k_max)?, LineOp::Direct(*k_max)),
    };
    let (output, stats) = runner.run_op(q, line, key)?;
    Ok(AnalogResult { output, trace: build_trace(&op.stage_sizes(n), &stats) })
}

/// Multi-stage analog FFT of `x` following `plan`.
pub fn analog_fft_1d(x: &[C64], plan: &FactorPlan, cfg: &ExecutionConfig) -> Result<AnalogResult<Vec<C64>>> {
    let q = QuantizedVector::quantize(x, cfg.input_encoding)?;
    analog_transform_1d(&q, &Transform1d::Fft(plan.clone()), cfg, root_key(cfg))
}

/// Single-stage analog DFT, partitioned over `k_max`-point blocks with
/// digital accumulation of partial outputs when `x` is longer than `k_max`.
pub fn analog_dft_direct(x: &[C64], k_max: usize, cfg: &ExecutionConfig) -> Result<AnalogResult<Vec<C64>>> {
    let q = QuantizedVector::quantize(x, cfg.input_encoding)?;
    analog_transform_1d(&q, &Transform1d::Direct { k_max }, cfg, root_key(cfg))
}

/// Inverse transform on the forward arrays: `conj(W conj(X)) / N`, which
/// equals driving arrays programmed with conjugate weights.
pub fn analog_ifft_1d(x: &[C64], plan: &FactorPlan, cfg: &ExecutionConfig) -> Result<AnalogResult<Vec<C64>>> {
    let conj: Vec<C64> = x.iter().map(|c| c.conj()).collect();
    let mut r = analog_fft_1d(&conj, plan, cfg)?;
    let n = x.len() as f64;
    r.output.iter_mut().for_each(|c| *c = c.conj() / n);
    Ok(r)
}

fn quantize_first(t: &ComplexTensor, first: Option<StageInput>, cfg: &ExecutionConfig) -> Result<QTensor> {
    let input = first.unwrap_or(StageInput { encoding: cfg.input_encoding, scale: None });
    let q = match input.scale {
        Some(s) => QuantizedVector::with_scale(t.data(), input.encoding, s)?,
        None => QuantizedVector::quantize(t.data(), input.encoding)?,
    };
    Ok(QTensor { shape: t.shape().to_vec(), q })
}

fn check_image(img: &ComplexTensor) -> Result<(usize, usize)> {
    if img.ndim() != 2 {
        return Err(Error::Shape(format!("expected an M x N image, got {:?}", img.shape())));
    }
    Ok((img.shape()[0], img.shape()[1]))
}

/// Four-stage vector-radix 2-D FFT: `P x Q` DFTs on the decimated
/// sub-matrices, twiddle, axis swap, then `R x S` DFTs.
pub fn analog_vr_fft_2d(
    img: &ComplexTensor,
    f: VrFactors,
    cfg: &ExecutionConfig,
    first: Option<StageInput>,
) -> Result<AnalogResult<ComplexTensor>> {
    analog_vr_fft_2d_keyed(img, f, cfg, first, root_key(cfg))
}

pub fn analog_vr_fft_2d_keyed(
    img: &ComplexTensor,
    f: VrFactors,
    cfg: &ExecutionConfig,
    first: Option<StageInput>,
    key: StreamKey,
) -> Result<AnalogResult<ComplexTensor>> {
    check_image(img)?;
    let runner = Runner::new(cfg)?;
    let plans = [f.p, f.q, f.r, f.s].map(|n| cfg.bank.plan_for(n));
    let [pp, pq, pr, ps] = plans;
    let (pp, pq, pr, ps) = (pp?, pq?, pr?, ps?);

    let q0 = quantize_first(&vr_reshape(img, f)?, first, cfg)?;
    let (t, mut stats) = runner.run_lines(&q0, 2, LineOp::Plan(&pp), key.child(0))?;
    let (mut t, s) = runner.run_lines(&runner.requantize(&t)?, 3, LineOp::Plan(&pq), key.child(1))?;
    stats.extend(s);
    {
        let d = t.data_mut();
        let mut i = 0;
        for r in 0..f.r {
            for s in 0..f.s {
                for kp in 0..f.p {
                    for kq in 0..f.q {
                        d[i] *= vr_twiddle(f, r, s, kp, kq);
                        i += 1;
                    }
                }
            }
        }
    }
    let u = vr_axis_swap(&t)?;
    let (u, s) = runner.run_lines(&runner.requantize(&u)?, 2, LineOp::Plan(&pr), key.child(2))?;
    stats.extend(s);
    let (u, s) = runner.run_lines(&runner.requantize(&u)?, 3, LineOp::Plan(&ps), key.child(3))?;
    stats.extend(s);

    let sizes: Vec<usize> = [&pp, &pq, &pr, &ps].iter().flat_map(|p| p.leaves()).collect();
    Ok(AnalogResult { output: vr_reshape_output(&u)?, trace: build_trace(&sizes, &stats) })
}

/// Two-stage 2-D DFT with direct (possibly partitioned) MVMs along each axis.
pub fn analog_dft_2d_direct(
    img: &ComplexTensor,
    k_max: usize,
    cfg: &ExecutionConfig,
    first: Option<StageInput>,
) -> Result<AnalogResult<ComplexTensor>> {
    analog_dft_2d_direct_keyed(img, k_max, cfg, first, root_key(cfg))
}

pub fn analog_dft_2d_direct_keyed(
    img: &ComplexTensor,
    k_max: usize,
    cfg: &ExecutionConfig,
    first: Option<StageInput>,
    key: StreamKey,
) -> Result<AnalogResult<ComplexTensor>> {
    let (m, n) = check_image(img)?;
    let runner = Runner::new(cfg)?.with_partition(m, k_max)?;
    let q0 = quantize_first(img, first, cfg)?;
    let (t, mut stats) = runner.run_lines(&q0, 0, LineOp::Direct(k_max), key.child(0))?;
    let runner = Runner { partition: None, ..runner }.with_partition(n, k_max)?;
    let (t, s) = runner.run_lines(&runner.requantize(&t)?, 1, LineOp::Direct(k_max), key.child(1))?;
    stats.extend(s);
    Ok(AnalogResult { output: t, trace: build_trace(&[m, n], &stats) })
}
