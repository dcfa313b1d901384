//! DFT and twiddle matrices, the O(N^2) reference transforms and an exact
//! (double precision) multi-stage Cooley-Tukey evaluation of a [`FactorPlan`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::plan::FactorPlan;
use crate::tensor::{ComplexMatrix, ComplexTensor};
use crate::{Error, Result, C64};

pub type DftMatrix = ComplexMatrix;
pub type TwiddleMatrix = ComplexMatrix;

/// `exp(-i 2 pi m / n)`.
///
/// The exponent is reduced modulo `n` and by `gcd(m, n)` before evaluating,
/// so `omega(n, m)` and `omega(n * d, m * d)` are bit-identical; quarter
/// turns are exact.
pub fn omega(n: usize, m: usize) -> C64 {
    let m = m % n;
    if m == 0 {
        return C64::new(1.0, 0.0);
    }
    let g = gcd(m, n);
    let (m, n) = (m / g, n / g);
    match (n, m) {
        (2, 1) => return C64::new(-1.0, 0.0),
        (4, 1) => return C64::new(0.0, -1.0),
        (4, 3) => return C64::new(0.0, 1.0),
        _ => {}
    }
    let theta = 2.0 * core::f64::consts::PI * m as f64 / n as f64;
    C64::new(math::cos(theta), -math::sin(theta))
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `W_N` with entry `(k, n) = omega_N^{nk}`.
pub fn dft_matrix(n: usize) -> DftMatrix {
    ComplexMatrix::from_fn(n, n, |k, j| omega(n, (k * j) % n.max(1)))
}

/// `T` with entry `(n1, k2) = omega_N^{n1 k2}`, `N = n1 * n2`, shape `n1 x n2`.
pub fn twiddle_matrix(n1: usize, n2: usize) -> TwiddleMatrix {
    let n = n1 * n2;
    ComplexMatrix::from_fn(n1, n2, |a, b| omega(n, a * b))
}

/// Direct O(N^2) DFT.
pub fn reference_dft(x: &[C64]) -> Vec<C64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let table: Vec<C64> = (0..n).map(|m| omega(n, m)).collect();
    (0..n)
        .map(|k| {
            let mut acc = C64::new(0.0, 0.0);
            let mut m = 0usize;
            for v in x {
                acc += table[m] * v;
                m += k;
                if m >= n {
                    m -= n;
                }
            }
            acc
        })
        .collect()
}

/// Inverse DFT with `1/N` normalisation.
pub fn inverse_dft(x: &[C64]) -> Vec<C64> {
    let n = x.len() as f64;
    let conj: Vec<C64> = x.iter().map(|c| c.conj()).collect();
    reference_dft(&conj).into_iter().map(|c| c.conj() / n).collect()
}

/// `X = [W_N (W_M x)^T]^T` for an `M x N` tensor.
pub fn reference_dft_2d(x: &ComplexTensor) -> Result<ComplexTensor> {
    apply_2d(x, reference_dft)
}

pub fn inverse_dft_2d(x: &ComplexTensor) -> Result<ComplexTensor> {
    apply_2d(x, inverse_dft)
}

fn apply_2d(x: &ComplexTensor, f: impl Fn(&[C64]) -> Vec<C64>) -> Result<ComplexTensor> {
    if x.ndim() != 2 {
        return Err(Error::Shape(format!("expected a 2-D tensor, got shape {:?}", x.shape())));
    }
    let (m, n) = (x.shape()[0], x.shape()[1]);
    let mut out = x.clone();
    let data = out.data_mut();
    let mut col = vec![C64::new(0.0, 0.0); m];
    for j in 0..n {
        for i in 0..m {
            col[i] = data[i * n + j];
        }
        for (i, v) in f(&col).into_iter().enumerate() {
            data[i * n + j] = v;
        }
    }
    for i in 0..m {
        let row = f(&data[i * n..(i + 1) * n]);
        data[i * n..(i + 1) * n].copy_from_slice(&row);
    }
    Ok(out)
}

/// Exact evaluation of the Cooley-Tukey cascade described by `plan`.
///
/// Leaves are direct DFTs. Used as a fast digital reference for sizes where
/// the O(N^2) transform is too slow.
pub fn factored_dft(x: &[C64], plan: &FactorPlan) -> Result<Vec<C64>> {
    if x.len() != plan.size() {
        return Err(Error::Shape(format!("plan covers {} points, input has {}", plan.size(), x.len())));
    }
    Ok(factored_rec(x, plan))
}

fn factored_rec(x: &[C64], plan: &FactorPlan) -> Vec<C64> {
    match plan {
        FactorPlan::Leaf(_) => reference_dft(x),
        FactorPlan::Split { n1, n2, outer, inner } => {
            let (n1, n2) = (*n1, *n2);
            let n = n1 * n2;
            // rows of x~: x~[a][b] = x[a + n1 b]
            let mut mid = vec![C64::new(0.0, 0.0); n];
            let mut row = vec![C64::new(0.0, 0.0); n2];
            for a in 0..n1 {
                for b in 0..n2 {
                    row[b] = x[a + n1 * b];
                }
                let y = factored_rec(&row, inner);
                for (k2, v) in y.into_iter().enumerate() {
                    mid[a * n2 + k2] = v * omega(n, a * k2);
                }
            }
            let mut out = vec![C64::new(0.0, 0.0); n];
            let mut col = vec![C64::new(0.0, 0.0); n1];
            for k2 in 0..n2 {
                for a in 0..n1 {
                    col[a] = mid[a * n2 + k2];
                }
                for (k1, v) in factored_rec(&col, outer).into_iter().enumerate() {
                    out[n2 * k1 + k2] = v;
                }
            }
            out
        }
    }
}
