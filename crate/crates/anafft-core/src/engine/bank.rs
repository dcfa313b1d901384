use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::device::{default_strides, map_matrix_to_targets, program, subsample_view, DftView, HardwareModel, ProgrammedArray};
use crate::dft::{dft_matrix, omega};
use crate::plan::{plan_factorization, FactorPlan, PlanStrategy};
use crate::tensor::ComplexMatrix;
use crate::{Error, Result};

/// Array id of the bank's `k`-point DFT array (programming-noise key).
pub fn dft_array_id(k: usize) -> u64 {
    k as u64
}

fn block_array_id(n: usize, out_block: usize, in_block: usize) -> u64 {
    (1u64 << 48) | ((n as u64) << 24) | ((out_block as u64) << 12) | in_block as u64
}

/// Programmed arrays available to the engine, keyed by DFT size.
#[derive(Clone, Debug, Default)]
pub struct ArrayBank {
    arrays: BTreeMap<usize, ProgrammedArray>,
    partitions: BTreeMap<usize, Partitioned>,
}

/// `W_N` split into `ceil(N/k)^2` blocks of at most `k x k`, one array each.
#[derive(Clone, Debug)]
pub struct Partitioned {
    pub n: usize,
    pub block: usize,
    /// Row-major over `(output block, input block)`.
    pub arrays: Vec<ProgrammedArray>,
}

impl Partitioned {
    pub fn blocks(&self) -> usize {
        self.n.div_ceil(self.block)
    }

    pub fn program(n: usize, block: usize, g_max: f64, n_tiles: usize, model: &HardwareModel) -> Result<Self> {
        if block == 0 || n == 0 {
            return Err(Error::InvalidArgument("partition sizes must be positive".into()));
        }
        let nb = n.div_ceil(block);
        let mut arrays = Vec::with_capacity(nb * nb);
        for j in 0..nb {
            let (o0, o1) = (j * block, ((j + 1) * block).min(n));
            for i in 0..nb {
                let (i0, i1) = (i * block, ((i + 1) * block).min(n));
                let w = ComplexMatrix::from_fn(o1 - o0, i1 - i0, |k, m| omega(n, ((o0 + k) * (i0 + m)) % n));
                let grid = map_matrix_to_targets(&w, g_max, n_tiles)?;
                arrays.push(program(&grid, model, block_array_id(n, j, i))?);
            }
        }
        Ok(Self { n, block, arrays })
    }
}

impl ArrayBank {
    pub fn new() -> Self {
        Self::default()
    }

    /// Maps and programs a `k`-point DFT array.
    pub fn program_dft(&mut self, k: usize, g_max: f64, n_tiles: usize, model: &HardwareModel) -> Result<()> {
        let grid = map_matrix_to_targets(&dft_matrix(k), g_max, n_tiles)?;
        self.insert(program(&grid, model, dft_array_id(k))?)
    }

    /// Programs one DFT array per `(size, g_max, n_tiles)` entry.
    pub fn with_arrays(entries: &[(usize, f64, usize)], model: &HardwareModel) -> Result<Self> {
        let mut bank = Self::new();
        for &(k, g, t) in entries {
            bank.program_dft(k, g, t, model)?;
        }
        Ok(bank)
    }

    pub fn insert(&mut self, array: ProgrammedArray) -> Result<()> {
        let l = array.layout();
        if l.k_in != l.k_out {
            return Err(Error::InvalidArgument("bank arrays must hold square DFT matrices".into()));
        }
        self.arrays.insert(l.k_in, array);
        Ok(())
    }

    pub fn insert_partition(&mut self, p: Partitioned) {
        self.partitions.insert(p.n, p);
    }

    pub fn get(&self, k: usize) -> Option<&ProgrammedArray> {
        self.arrays.get(&k)
    }

    pub fn partition(&self, n: usize) -> Option<&Partitioned> {
        self.partitions.get(&n)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.arrays.keys().copied().collect()
    }

    pub fn largest(&self) -> Option<usize> {
        self.arrays.keys().next_back().copied()
    }

    pub fn arrays(&self) -> impl Iterator<Item = &ProgrammedArray> {
        self.arrays.values()
    }

    /// An executable `k`-point DFT: the native array if present, otherwise a
    /// subsample view of the smallest array whose size is a multiple of `k`.
    pub fn resolve(&self, k: usize) -> Result<DftView<'_>> {
        if let Some(a) = self.arrays.get(&k) {
            return Ok(DftView::native(a));
        }
        let (&n1, array) = self
            .arrays
            .iter()
            .find(|(&n1, _)| k > 0 && n1 > k && n1 % k == 0)
            .ok_or(Error::MissingArray(k))?;
        let (a, b) = default_strides(n1 / k);
        subsample_view(array, k, a, b)
    }

    /// A leaf if `n` resolves directly, otherwise the min-depth plan over the
    /// largest array.
    pub fn plan_for(&self, n: usize) -> Result<FactorPlan> {
        if self.resolve(n).is_ok() {
            return Ok(FactorPlan::Leaf(n));
        }
        let k = self.largest().ok_or(Error::MissingArray(n))?;
        let plan = plan_factorization(n, k, &PlanStrategy::MinDepth)?;
        if let Some(&leaf) = plan.leaves().iter().find(|&&l| self.resolve(l).is_err()) {
            return Err(Error::InvalidFactors(format!("plan for {n} needs a {leaf}-point DFT the bank cannot run")));
        }
        Ok(plan)
    }
}
