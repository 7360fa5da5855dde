//! Eigen-based zero-forcing weights.
//!
//! `V_k[j]` holds the conjugated top-`r` eigenvectors of the mean Gram
//! `H^H H` over the resource elements of RB `j` as rows, with the phase
//! convention of [`leading_left_singular_vectors`]. Precoders are
//! `W = V^H (V V^H)^-1`.

use crate::error::{Error, Result};
use crate::linalg::{leading_left_singular_vectors, pseudo_inverse, CMatrix};
use crate::tensor::ComplexTensor3;

use super::channel::ChannelSet;

const PINV_RCOND: f64 = 1e-12;

/// Weight tensors `V_k` (`r x N_t x J`) and precoders `W_k[j]` (`N_t x r`).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet {
    pub v: Vec<ComplexTensor3>,
    pub w: Vec<Vec<CMatrix>>,
}

/// Top-`r` eigenvectors of `sum_e H_e^H H_e` as the rows of an `r x N_t`
/// matrix.
pub fn eigen_rows(h: &[CMatrix], r: usize) -> Result<CMatrix> {
    let nt = h[0].cols();
    let nu = h[0].rows();
    let stacked = CMatrix::from_fn(nt, nu * h.len(), |b, c| h[c / nu][(c % nu, b)].conj());
    Ok(leading_left_singular_vectors(&stacked, r)?.adjoint())
}

/// Slice `j` of a weight tensor as an `r x N_t` matrix.
pub fn rb_slice(v: &ComplexTensor3, j: usize) -> CMatrix {
    let [r, nt, _] = v.dims();
    CMatrix::from_fn(r, nt, |s, n| v.get(s, n, j))
}

/// `V^H (V V^H)^-1`, with a pseudo-inverse guarding rank loss.
pub fn zf_precoder(v: &CMatrix) -> Result<CMatrix> {
    let gram = v.mul_adjoint(v)?;
    v.adjoint().matmul(&pseudo_inverse(&gram, PINV_RCOND)?)
}

/// Precoders for every RB of a (possibly decoded) weight tensor.
pub fn precoders_from_tensor(v: &ComplexTensor3) -> Result<Vec<CMatrix>> {
    (0..v.dims()[2]).map(|j| zf_precoder(&rb_slice(v, j))).collect()
}

/// Builds a [`WeightSet`] from decoded weight tensors.
pub fn weights_from_tensors(v: Vec<ComplexTensor3>) -> Result<WeightSet> {
    let w = v.iter().map(precoders_from_tensor).collect::<Result<_>>()?;
    Ok(WeightSet { v, w })
}

/// Reference ZF weights of a channel set.
pub fn zf_weights(ch: &ChannelSet) -> Result<WeightSet> {
    let s = &ch.spec;
    let mut vs = Vec::with_capacity(s.users);
    for k in 0..s.users {
        let mut t = ComplexTensor3::zeros([s.streams, s.nt, s.rbs]);
        for j in 0..s.rbs {
            let rows = eigen_rows(ch.rb(k, j), s.streams).map_err(|_| Error::Eigen { user: k, rb: j })?;
            for n in 0..s.nt {
                for l in 0..s.streams {
                    t.set(l, n, j, rows[(l, n)]);
                }
            }
        }
        vs.push(t);
    }
    weights_from_tensors(vs)
}

/// Largest `||V_k[j] W_k[j] - I_r||_F` over all users and RBs.
pub fn zf_identity_defect(ws: &WeightSet) -> Result<f64> {
    let mut worst = 0.0f64;
    for (v, w) in ws.v.iter().zip(&ws.w) {
        for (j, wj) in w.iter().enumerate() {
            let p = rb_slice(v, j).matmul(wj)?;
            worst = worst.max(p.sub(&CMatrix::identity(p.rows())).frobenius_norm());
        }
    }
    Ok(worst)
}

/// Largest `||V V^H - I_r||_F` over all users and RBs.
pub fn row_orthonormality_defect(ws: &WeightSet) -> f64 {
    let mut worst = 0.0f64;
    for v in &ws.v {
        for j in 0..v.dims()[2] {
            worst = worst.max(rb_slice(v, j).adjoint().orthogonality_defect());
        }
    }
    worst
}
