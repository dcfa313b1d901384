//! Factorization of an N-point DFT into a tree of elementary DFTs.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// A Cooley-Tukey decomposition tree.
///
/// `Split { n1, n2, .. }` computes an `n1 * n2`-point DFT as `n1` DFTs of
/// size `n2` (the `inner` subtree, first stage), a twiddle multiply, then
/// `n2` DFTs of size `n1` (the `outer` subtree, second stage).
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FactorPlan {
    Leaf(usize),
    Split { n1: usize, n2: usize, outer: Box<FactorPlan>, inner: Box<FactorPlan> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanStrategy {
    /// Fewest elementary DFTs, then shallowest, then most balanced.
    MinDepth,
    /// Explicit factor list `[n1, n2, ...]`; longer lists are split in half
    /// recursively with the first half forming `n1`.
    Explicit(Vec<usize>),
}

impl FactorPlan {
    pub fn split(outer: FactorPlan, inner: FactorPlan) -> Self {
        FactorPlan::Split {
            n1: outer.size(),
            n2: inner.size(),
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            FactorPlan::Leaf(n) => *n,
            FactorPlan::Split { n1, n2, .. } => n1 * n2,
        }
    }

    /// Number of split levels; a leaf has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            FactorPlan::Leaf(_) => 0,
            FactorPlan::Split { outer, inner, .. } => 1 + outer.depth().max(inner.depth()),
        }
    }

    /// Leaf sizes in execution order (first stage first).
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            FactorPlan::Leaf(n) => out.push(*n),
            FactorPlan::Split { outer, inner, .. } => {
                inner.collect_leaves(out);
                outer.collect_leaves(out);
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            FactorPlan::Leaf(_) => 1,
            FactorPlan::Split { outer, inner, .. } => outer.leaf_count() + inner.leaf_count(),
        }
    }

    pub fn max_leaf(&self) -> usize {
        self.leaves().into_iter().max().unwrap_or(0)
    }
}

impl core::fmt::Display for FactorPlan {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FactorPlan::Leaf(n) => write!(f, "{n}"),
            FactorPlan::Split { outer, inner, .. } => write!(f, "({outer} x {inner})"),
        }
    }
}

pub fn plan_factorization(n: usize, k_max: usize, strategy: &PlanStrategy) -> Result<FactorPlan> {
    if n == 0 {
        return Err(Error::InvalidArgument("transform length must be positive".into()));
    }
    match strategy {
        PlanStrategy::MinDepth => {
            if let Some(p) = prime_factors(n).into_iter().find(|&p| p > k_max) {
                return Err(Error::Unfactorable { n, factor: p, k_max });
            }
            let mut memo = BTreeMap::new();
            Ok(best(n, k_max, &mut memo).plan)
        }
        PlanStrategy::Explicit(factors) => {
            if factors.is_empty() {
                return Err(Error::InvalidFactors("empty factor list".into()));
            }
            if let Some(&f) = factors.iter().find(|&&f| f < 2 && n > 1) {
                return Err(Error::InvalidFactors(format!("factor {f} is not a valid DFT size")));
            }
            if let Some(&f) = factors.iter().find(|&&f| f > k_max) {
                return Err(Error::InvalidFactors(format!("factor {f} exceeds the largest array size {k_max}")));
            }
            let prod = factors.iter().try_fold(1usize, |acc, &f| acc.checked_mul(f));
            if prod != Some(n) {
                return Err(Error::InvalidFactors(format!("factors {factors:?} do not multiply to {n}")));
            }
            Ok(balanced(factors))
        }
    }
}

fn balanced(f: &[usize]) -> FactorPlan {
    if f.len() == 1 {
        return FactorPlan::Leaf(f[0]);
    }
    let mid = f.len() / 2;
    FactorPlan::split(balanced(&f[..mid]), balanced(&f[mid..]))
}

#[derive(Clone)]
struct Best {
    plan: FactorPlan,
    leaves: usize,
    depth: usize,
}

fn best(n: usize, k_max: usize, memo: &mut BTreeMap<usize, Best>) -> Best {
    if n <= k_max {
        return Best { plan: FactorPlan::Leaf(n), leaves: 1, depth: 0 };
    }
    if let Some(b) = memo.get(&n) {
        return b.clone();
    }
    let mut chosen: Option<(SplitScore, Best, Best)> = None;
    for n1 in divisors(n) {
        let n2 = n / n1;
        let a = best(n1, k_max, memo);
        let b = best(n2, k_max, memo);
        let score = SplitScore {
            leaves: a.leaves + b.leaves,
            depth: 1 + a.depth.max(b.depth),
            imbalance: n1.max(n2) as f64 / n1.min(n2) as f64,
            non_pow2: !(n1.is_power_of_two() && n2.is_power_of_two()),
            n2,
        };
        if chosen.as_ref().map_or(true, |(s, _, _)| score.better_than(s)) {
            chosen = Some((score, a, b));
        }
    }
    let (score, a, b) = chosen.expect("n > k_max >= every prime factor, so n is composite");
    let out = Best { plan: FactorPlan::split(a.plan, b.plan), leaves: score.leaves, depth: score.depth };
    memo.insert(n, out.clone());
    out
}

struct SplitScore {
    leaves: usize,
    depth: usize,
    imbalance: f64,
    non_pow2: bool,
    n2: usize,
}

impl SplitScore {
    fn better_than(&self, o: &SplitScore) -> bool {
        if self.leaves != o.leaves {
            return self.leaves < o.leaves;
        }
        if self.depth != o.depth {
            return self.depth < o.depth;
        }
        if self.imbalance != o.imbalance {
            return self.imbalance < o.imbalance;
        }
        if self.non_pow2 != o.non_pow2 {
            return !self.non_pow2;
        }
        self.n2 > o.n2
    }
}

/// Proper divisors in `2..n`, ascending.
pub(crate) fn divisors(n: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        while n % p == 0 {
            out.push(p);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}
