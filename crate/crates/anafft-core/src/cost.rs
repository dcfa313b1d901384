//! ADC conversion, twiddle and buffer counts, and energy projections.
//!
//! Counts follow the per-output convention: one conversion per real or
//! imaginary output of each elementary DFT. Set `ConversionModel` to
//! [`ConversionModel::bit_serial`] to count every physical column read of the
//! bit-serial simulator instead.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::device::InputEncoding;
use crate::math;
use crate::plan::{plan_factorization, prime_factors, FactorPlan, PlanStrategy};
use crate::reshape::VrFactors;
use crate::{Error, Result};

/// Energy of one elementary analog DFT on an array sized for it.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyEntry {
    pub size: usize,
    pub energy_j: f64,
    pub rows: usize,
    pub cols: usize,
    pub g_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct EnergyTable {
    pub entries: Vec<EnergyEntry>,
    /// One 8-bit buffer write plus read.
    pub sram_per_value_j: f64,
    pub twiddle_mult_j: f64,
}

impl Default for EnergyTable {
    fn default() -> Self {
        Self::standard()
    }
}

impl EnergyTable {
    /// Projected SONOS accelerator energies.
    pub fn standard() -> Self {
        let e = |size: usize, energy_j: f64, g_us: f64| EnergyEntry {
            size,
            energy_j,
            rows: 2 * size,
            cols: 4 * size,
            g_max: g_us * 1e-6,
        };
        Self {
            entries: alloc::vec![
                e(4, 0.234e-9, 20.0),
                e(8, 0.316e-9, 20.0),
                e(16, 0.483e-9, 20.0),
                e(32, 0.826e-9, 10.0),
                e(64, 1.543e-9, 5.0),
                e(128, 3.077e-9, 2.67),
                e(256, 6.496e-9, 1.67),
            ],
            sram_per_value_j: 3.48e-12,
            twiddle_mult_j: 0.8e-12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::InvalidArgument("energy table is empty".into()));
        }
        if self.entries.windows(2).any(|w| w[1].size <= w[0].size) {
            return Err(Error::InvalidArgument("energy table sizes must be strictly ascending".into()));
        }
        if self.entries.iter().any(|e| e.size == 0 || !(e.energy_j > 0.0 && e.energy_j.is_finite())) {
            return Err(Error::InvalidArgument("energy table needs positive sizes and energies".into()));
        }
        Ok(())
    }

    pub fn max_size(&self) -> usize {
        self.entries.last().map_or(0, |e| e.size)
    }

    /// Tabulated energy, or log-log interpolation between neighbours. Sizes
    /// below the table extend the first segment; sizes above are refused.
    pub fn dft_energy(&self, k: usize) -> Result<f64> {
        self.validate()?;
        let max = self.max_size();
        if k == 0 || k > max {
            return Err(Error::OutsideEnergyTable { size: k, max });
        }
        let es = &self.entries;
        if let Some(e) = es.iter().find(|e| e.size == k) {
            return Ok(e.energy_j);
        }
        if es.len() == 1 {
            return Ok(es[0].energy_j * k as f64 / es[0].size as f64);
        }
        let i = es.partition_point(|e| e.size < k).clamp(1, es.len() - 1);
        let (a, b) = (es[i - 1], es[i]);
        let t = (math::ln(k as f64) - math::ln(a.size as f64)) / (math::ln(b.size as f64) - math::ln(a.size as f64));
        Ok(math::exp(math::ln(a.energy_j) + t * (math::ln(b.energy_j) - math::ln(a.energy_j))))
    }
}

/// ADC conversions charged per real output value of an elementary DFT.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConversionModel(pub u64);

impl Default for ConversionModel {
    fn default() -> Self {
        ConversionModel(1)
    }
}

impl ConversionModel {
    /// Physical column reads of the bit-serial simulator per real output:
    /// one per bit plane and polarity, on both columns of the differential
    /// pair. Tiling changes the MVM count, not this total.
    pub fn bit_serial(encoding: InputEncoding) -> Self {
        ConversionModel(2 * encoding.slices() as u64)
    }
}

pub fn count_conversions_fft(plan: &FactorPlan, conv: ConversionModel) -> u64 {
    2 * plan.leaf_count() as u64 * plan.size() as u64 * conv.0
}

/// Twiddle multiplies summed over the tree; `(s - 1) N` for `s` leaves.
pub fn count_twiddles_fft(plan: &FactorPlan) -> u64 {
    match plan {
        FactorPlan::Leaf(_) => 0,
        FactorPlan::Split { n1, n2, outer, inner } => {
            (n1 * n2) as u64 + *n1 as u64 * count_twiddles_fft(inner) + *n2 as u64 * count_twiddles_fft(outer)
        }
    }
}

pub fn count_conversions_direct(n: usize, k_max: usize, conv: ConversionModel) -> u64 {
    2 * n as u64 * n.div_ceil(k_max.max(1)) as u64 * conv.0
}

/// Buffered 8-bit values: real and imaginary part of every intermediate at
/// every boundary between stages.
fn buffer_values(points: u64, stages: u64) -> u64 {
    2 * points * stages.saturating_sub(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Fft,
    Direct,
    VrFft2d,
    Direct2d,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Fft => "fft",
            Method::Direct => "direct",
            Method::VrFft2d => "vr-fft-2d",
            Method::Direct2d => "direct-2d",
        }
    }
}

/// Asymptotic energy, area and time classes (1-D, N much larger than K).
pub fn scaling_class(method: Method) -> (&'static str, &'static str, &'static str) {
    match method {
        Method::Fft | Method::VrFft2d => ("N log_K N", "N log_K N", "N log_K N"),
        Method::Direct | Method::Direct2d => ("N^2 / K", "N^2 or N^2 / K", "log_2(N / K)"),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    pub method: Method,
    pub k: usize,
    /// Transform length (1-D) or side length (2-D, `N x N`).
    pub n: usize,
    pub adc_conversions: u64,
    pub twiddle_mults: u64,
    pub buffer_accesses: u64,
    pub energy_joules: f64,
}

/// What to cost.
#[derive(Clone, Debug, PartialEq)]
pub enum Workload {
    Fft1d(FactorPlan),
    Direct1d { n: usize, k_max: usize },
    /// `n x n` vector-radix FFT with a square split; axis DFTs larger than
    /// `k_max` are decomposed further.
    VrFft2d { n: usize, k_max: usize },
    Direct2d { n: usize, k_max: usize },
}

pub fn energy_estimate(w: &Workload, table: &EnergyTable, conv: ConversionModel) -> Result<CostReport> {
    table.validate()?;
    match w {
        Workload::Fft1d(plan) => fft_cost(plan, table, conv),
        Workload::Direct1d { n, k_max } => direct_cost(*n, *k_max, table, conv),
        Workload::VrFft2d { n, k_max } => {
            let f = VrFactors::square(*n)?;
            let points = (*n as u64) * (*n as u64);
            let mut r = CostReport {
                method: Method::VrFft2d,
                k: *k_max,
                n: *n,
                adc_conversions: 0,
                twiddle_mults: points,
                buffer_accesses: 0,
                energy_joules: 0.0,
            };
            let mut leaf_stages = 0u64;
            for size in [f.p, f.q, f.r, f.s] {
                let plan = plan_min_energy(size, *k_max, table)?;
                let sub = fft_cost(&plan, table, conv)?;
                let count = points / size as u64;
                r.adc_conversions += count * sub.adc_conversions;
                r.twiddle_mults += count * sub.twiddle_mults;
                leaf_stages += plan.leaf_count() as u64;
                r.energy_joules += count as f64
                    * (sub.energy_joules - sub.buffer_accesses as f64 * table.sram_per_value_j);
            }
            r.buffer_accesses = buffer_values(points, leaf_stages);
            r.energy_joules += points as f64 * table.twiddle_mult_j + r.buffer_accesses as f64 * table.sram_per_value_j;
            Ok(r)
        }
        Workload::Direct2d { n, k_max } => {
            let line = direct_cost(*n, *k_max, table, conv)?;
            let points = (*n as u64) * (*n as u64);
            let lines = 2 * *n as u64;
            let buffer = buffer_values(points, 2);
            Ok(CostReport {
                method: Method::Direct2d,
                k: *k_max,
                n: *n,
                adc_conversions: lines * line.adc_conversions,
                twiddle_mults: 0,
                buffer_accesses: buffer,
                energy_joules: lines as f64 * line.energy_joules + buffer as f64 * table.sram_per_value_j,
            })
        }
    }
}

fn fft_cost(plan: &FactorPlan, table: &EnergyTable, conv: ConversionModel) -> Result<CostReport> {
    let n = plan.size();
    let mut dft = 0.0;
    for leaf in plan.leaves() {
        dft += (n / leaf) as f64 * table.dft_energy(leaf)?;
    }
    let tw = count_twiddles_fft(plan);
    let buf = buffer_values(n as u64, plan.leaf_count() as u64);
    Ok(CostReport {
        method: Method::Fft,
        k: plan.max_leaf(),
        n,
        adc_conversions: count_conversions_fft(plan, conv),
        twiddle_mults: tw,
        buffer_accesses: buf,
        energy_joules: dft + tw as f64 * table.twiddle_mult_j + buf as f64 * table.sram_per_value_j,
    })
}

fn direct_cost(n: usize, k_max: usize, table: &EnergyTable, conv: ConversionModel) -> Result<CostReport> {
    if n == 0 || k_max == 0 {
        return Err(Error::InvalidArgument("sizes must be positive".into()));
    }
    let blocks = n.div_ceil(k_max) as f64;
    Ok(CostReport {
        method: Method::Direct,
        k: k_max,
        n,
        adc_conversions: count_conversions_direct(n, k_max, conv),
        twiddle_mults: 0,
        buffer_accesses: 0,
        energy_joules: blocks * blocks * table.dft_energy(n.min(k_max))?,
    })
}

/// Lowest-energy factorization with all leaves `<= k_max`.
pub fn plan_min_energy(n: usize, k_max: usize, table: &EnergyTable) -> Result<FactorPlan> {
    if n == 0 {
        return Err(Error::InvalidArgument("transform length must be positive".into()));
    }
    let k = k_max.min(table.max_size());
    if let Some(p) = prime_factors(n).into_iter().find(|&p| p > k) {
        return Err(Error::Unfactorable { n, factor: p, k_max: k });
    }
    let mut memo = BTreeMap::new();
    Ok(min_energy(n, k, table, &mut memo)?.1)
}

fn min_energy(
    n: usize,
    k: usize,
    table: &EnergyTable,
    memo: &mut BTreeMap<usize, (f64, FactorPlan)>,
) -> Result<(f64, FactorPlan)> {
    if let Some(v) = memo.get(&n) {
        return Ok(v.clone());
    }
    let mut best = if n <= k { Some((table.dft_energy(n)?, FactorPlan::Leaf(n))) } else { None };
    for d in crate::plan::divisors(n) {
        {
            let (n1, n2) = (d, n / d);
            let (e1, p1) = min_energy(n1, k, table, memo)?;
            let (e2, p2) = min_energy(n2, k, table, memo)?;
            // the two children each contribute their own internal buffering;
            // one more boundary and n twiddles join them
            let e = n2 as f64 * e1
                + n1 as f64 * e2
                + n as f64 * table.twiddle_mult_j
                + 2.0 * n as f64 * table.sram_per_value_j;
            if best.as_ref().map_or(true, |(b, _)| e < *b * (1.0 - 1e-12)) {
                best = Some((e, FactorPlan::split(p1, p2)));
            }
        }
    }
    let v = best.ok_or(Error::MissingArray(n))?;
    memo.insert(n, v.clone());
    Ok(v)
}

/// Digital FFT energy model `coefficient * n^dims * log_base(n)`; the
/// coefficient is a user fit.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DigitalFit {
    pub coefficient: f64,
    pub log_base: f64,
    pub dims: u32,
}

impl Default for DigitalFit {
    fn default() -> Self {
        Self { coefficient: 0.0, log_base: 2.0, dims: 2 }
    }
}

pub fn digital_comparator(n: usize, fit: &DigitalFit) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if fit.log_base.is_nan() || fit.log_base <= 1.0 {
        return Err(Error::InvalidArgument(format!("log base {} must exceed 1", fit.log_base)));
    }
    let nf = n as f64;
    let log = math::ln(nf) / math::ln(fit.log_base);
    Ok(fit.coefficient * math::pow(nf, fit.dims as f64) * log)
}

pub const CSV_HEADER: &str = "method,K,N,adc_conversions,twiddle_mults,buffer_accesses,energy_joules";

/// FFT (lowest-energy plan) and direct-MVM rows for every `(K, N)` pair.
/// Energy is `NaN` where a leaf exceeds the energy table.
pub fn scaling_report(ks: &[usize], ns: &[usize], table: &EnergyTable, conv: ConversionModel) -> Result<Vec<CostReport>> {
    let mut rows = Vec::new();
    for &k in ks {
        for &n in ns {
            let plan = if k <= table.max_size() {
                plan_min_energy(n, k, table)?
            } else {
                plan_factorization(n, k, &PlanStrategy::MinDepth)?
            };
            let mut fft = fft_cost(&plan, table, conv).unwrap_or_else(|_| CostReport {
                method: Method::Fft,
                k,
                n,
                adc_conversions: count_conversions_fft(&plan, conv),
                twiddle_mults: count_twiddles_fft(&plan),
                buffer_accesses: buffer_values(n as u64, plan.leaf_count() as u64),
                energy_joules: f64::NAN,
            });
            fft.k = k;
            rows.push(fft);
            let direct = direct_cost(n, k, table, conv).unwrap_or(CostReport {
                method: Method::Direct,
                k,
                n,
                adc_conversions: count_conversions_direct(n, k, conv),
                twiddle_mults: 0,
                buffer_accesses: 0,
                energy_joules: f64::NAN,
            });
            rows.push(direct);
        }
    }
    Ok(rows)
}

pub fn report_csv(rows: &[CostReport]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{:e}",
            r.method.label(),
            r.k,
            r.n,
            r.adc_conversions,
            r.twiddle_mults,
            r.buffer_accesses,
            r.energy_joules
        );
    }
    s
}
