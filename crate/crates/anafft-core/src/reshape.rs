//! Index maps for the Cooley-Tukey and vector-radix decompositions.
//!
//! 1-D, `N = n1 * n2`: the input is viewed as an `n1 x n2` matrix with
//! `x~[a][b] = x[a + n1 b]`; after the two stages `X~[k1][k2] = X[n2 k1 + k2]`.
//!
//! 2-D, `M = P R`, `N = Q S`: the image becomes an `R x S` grid of `P x Q`
//! sub-matrices, `x~[r][s][p][q] = x[r + R p][s + S q]`. After the first
//! 2-D DFT and twiddle, axes are swapped to `P x Q x R x S` and the output is
//! `X[P kr + kp][Q ks + kq] = X~[kp][kq][kr][ks]`.

use alloc::format;
use alloc::vec::Vec;

use crate::dft::{omega, reference_dft};
use crate::tensor::ComplexTensor;
use crate::{Error, Result, C64};

pub fn ct_reshape_input(x: &[C64], n1: usize, n2: usize) -> Result<ComplexTensor> {
    check_len(x.len(), n1 * n2)?;
    let mut data = Vec::with_capacity(x.len());
    for a in 0..n1 {
        for b in 0..n2 {
            data.push(x[a + n1 * b]);
        }
    }
    ComplexTensor::new(&[n1, n2], data)
}

/// Flattens `X~[k1][k2]` (shape `n1 x n2`) to `X[n2 k1 + k2]`, i.e. row-major.
pub fn ct_reshape_output(xt: &ComplexTensor) -> Result<Vec<C64>> {
    if xt.ndim() != 2 {
        return Err(Error::Shape(format!("expected n1 x n2, got {:?}", xt.shape())));
    }
    Ok(xt.data().to_vec())
}

/// Vector-radix factor sizes: `M = P R` rows, `N = Q S` columns. `P x Q` is
/// the first-stage DFT, `R x S` the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VrFactors {
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub s: usize,
}

impl VrFactors {
    pub fn new(p: usize, q: usize, r: usize, s: usize) -> Self {
        Self { p, q, r, s }
    }

    /// Square split for an `n x n` image: `sqrt(n)` per axis when `n` is a
    /// power of 4, otherwise adjacent powers of two (larger first).
    pub fn square(n: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 4 {
            return Err(Error::InvalidArgument(format!("square vector-radix split needs a power of two >= 4, got {n}")));
        }
        let bits = n.trailing_zeros();
        let hi = 1usize << bits.div_ceil(2);
        let lo = n / hi;
        Ok(Self { p: hi, q: hi, r: lo, s: lo })
    }

    pub fn rows(&self) -> usize {
        self.p * self.r
    }

    pub fn cols(&self) -> usize {
        self.q * self.s
    }
}

pub fn vr_reshape(x: &ComplexTensor, f: VrFactors) -> Result<ComplexTensor> {
    check_2d(x, f)?;
    let n = f.cols();
    let d = x.data();
    let mut out = Vec::with_capacity(x.len());
    for r in 0..f.r {
        for s in 0..f.s {
            for p in 0..f.p {
                for q in 0..f.q {
                    out.push(d[(r + f.r * p) * n + (s + f.s * q)]);
                }
            }
        }
    }
    ComplexTensor::new(&[f.r, f.s, f.p, f.q], out)
}

/// `R x S x P x Q` to `P x Q x R x S`.
pub fn vr_axis_swap(y: &ComplexTensor) -> Result<ComplexTensor> {
    if y.ndim() != 4 {
        return Err(Error::Shape(format!("expected a 4-D tensor, got {:?}", y.shape())));
    }
    y.permute(&[2, 3, 0, 1])
}

/// `P x Q x R x S` to the `M x N` spectrum.
pub fn vr_reshape_output(xt: &ComplexTensor) -> Result<ComplexTensor> {
    if xt.ndim() != 4 {
        return Err(Error::Shape(format!("expected a 4-D tensor, got {:?}", xt.shape())));
    }
    let (p, q, r, s) = (xt.shape()[0], xt.shape()[1], xt.shape()[2], xt.shape()[3]);
    let (m, n) = (p * r, q * s);
    let mut out = ComplexTensor::zeros(&[m, n]);
    let src = xt.data();
    let dst = out.data_mut();
    let mut i = 0;
    for kp in 0..p {
        for kq in 0..q {
            for kr in 0..r {
                for ks in 0..s {
                    dst[(p * kr + kp) * n + (q * ks + kq)] = src[i];
                    i += 1;
                }
            }
        }
    }
    Ok(out)
}

/// Twiddle for sub-matrix `(r, s)` at first-stage frequency `(kp, kq)`.
#[inline]
pub fn vr_twiddle(f: VrFactors, r: usize, s: usize, kp: usize, kq: usize) -> C64 {
    omega(f.rows(), r * kp) * omega(f.cols(), s * kq)
}

/// Exact vector-radix 2-D DFT built from the maps above, with direct DFTs
/// along each axis.
pub fn vector_radix_dft(x: &ComplexTensor, f: VrFactors) -> Result<ComplexTensor> {
    let mut t = vr_reshape(x, f)?;
    dft_along(&mut t, 2);
    dft_along(&mut t, 3);
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
    let mut u = vr_axis_swap(&t)?;
    dft_along(&mut u, 2);
    dft_along(&mut u, 3);
    vr_reshape_output(&u)
}

fn dft_along(t: &mut ComplexTensor, axis: usize) {
    let shape = t.shape().to_vec();
    let strides = t.strides();
    let len = shape[axis];
    let stride = strides[axis];
    let d = t.data_mut();
    let mut buf = Vec::with_capacity(len);
    for base in line_starts(&shape, axis) {
        buf.clear();
        buf.extend((0..len).map(|i| d[base + i * stride]));
        for (i, v) in reference_dft(&buf).into_iter().enumerate() {
            d[base + i * stride] = v;
        }
    }
}

/// Offsets of the first element of every line along `axis`, row-major over
/// the remaining axes.
pub fn line_starts(shape: &[usize], axis: usize) -> Vec<usize> {
    let strides = crate::tensor::strides(shape);
    let mut rest: Vec<usize> = shape.to_vec();
    rest[axis] = 1;
    let count: usize = rest.iter().product();
    let mut idx = alloc::vec![0usize; shape.len()];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(idx.iter().zip(&strides).map(|(i, s)| i * s).sum());
        crate::tensor::increment(&mut idx, &rest);
    }
    out
}

fn check_len(got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Shape(format!("expected {want} elements, got {got}")));
    }
    Ok(())
}

fn check_2d(x: &ComplexTensor, f: VrFactors) -> Result<()> {
    if x.ndim() != 2 || x.shape()[0] != f.rows() || x.shape()[1] != f.cols() {
        return Err(Error::Shape(format!(
            "image {:?} does not match factors {}x{} (P R x Q S)",
            x.shape(),
            f.rows(),
            f.cols()
        )));
    }
    Ok(())
}
