//! Closed-form block updates of one APBCD iteration.

use crate::error::{Error, Result};
use crate::linalg::{polar_factor, CMatrix, FactorMatrix, C64};
use crate::tensor::ComplexTensor3;
use crate::tucker::{project_core, tucker_reconstruct};

use super::prox::prox_l0_topk;
use super::SparseTucker;

fn finite(t: &ComplexTensor3, what: &'static str) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Core block: `A = (eta [[V - S; Ub^H]] + G) / (eta + 1)`, then keep the
/// top `alpha1` entries.
pub fn update_core(state: &SparseTucker, v: &ComplexTensor3, eta: f64, alpha1: usize) -> Result<ComplexTensor3> {
    let proj = project_core(&v.sub(&state.residual)?, &state.factors_bar)?;
    let w = 1.0 / (eta + 1.0);
    let a = proj.zip_map(&state.core, |p, g| (p * eta + g) * w)?;
    finite(&a, "core update")?;
    Ok(prox_l0_topk(&a, alpha1))
}

/// `(G x_{j != mode} Ub_j)_(mode)`, so that `[[G; .., U, ..]]_(mode) = U Y`.
pub fn companion_unfolding(state: &SparseTucker, mode: usize) -> Result<CMatrix> {
    let mut t = state.core.clone();
    for j in 1..=3 {
        if j != mode {
            t = t.expand(&state.factors_bar[j - 1], j)?;
        }
    }
    t.unfold(mode)
}

/// Factor block: polar factor of `M = (V - S)_(i) Y^H + Ub_i / eta_i`.
///
/// Uses whatever extrapolated factors `state` currently holds for the other
/// modes, so calling it for modes 1, 2, 3 in turn while refreshing
/// `factors_bar` gives the Gauss-Seidel order. Returns the new factor and a
/// rank-deficiency flag.
pub fn update_factor(state: &SparseTucker, v: &ComplexTensor3, mode: usize, eta: f64) -> Result<(FactorMatrix, bool)> {
    let x = v.sub(&state.residual)?.unfold(mode)?;
    let y = companion_unfolding(state, mode)?;
    let mut m = x.mul_adjoint(&y)?;
    let ub = &state.factors_bar[mode - 1];
    let w = 1.0 / eta;
    for (d, &b) in m.data_mut().iter_mut().zip(ub.data()) {
        *d += b * w;
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("factor update"));
    }
    polar_factor(&m).map_err(|e| match e {
        Error::SvdNonConvergence { sweeps, .. } => Error::SvdNonConvergence { mode: Some(mode), sweeps },
        other => other,
    })
}

/// Sparse block: `B = (eta V - eta [[G; Ub]] + S) / (eta + 1)`, then keep
/// the top `alpha2` entries.
pub fn update_sparse(state: &SparseTucker, v: &ComplexTensor3, eta: f64, alpha2: usize) -> Result<ComplexTensor3> {
    if alpha2 == 0 {
        return Ok(ComplexTensor3::zeros(v.dims()));
    }
    let low = tucker_reconstruct(&state.core, &state.factors_bar)?;
    let w = 1.0 / (eta + 1.0);
    let mut b = v.zip_map(&low, |x, l| (x - l) * eta)?;
    for (d, &s) in b.data_mut().iter_mut().zip(state.residual.data()) {
        *d = (*d + s) * w;
    }
    finite(&b, "sparse update")?;
    Ok(prox_l0_topk(&b, alpha2))
}

/// Inertial step `U + beta (U - Ub_old)`.
pub fn extrapolate_factor(u_new: &FactorMatrix, u_bar_old: &FactorMatrix, beta: f64) -> FactorMatrix {
    if beta == 0.0 {
        return u_new.clone();
    }
    let b = C64::new(beta, 0.0);
    let mut out = u_new.clone();
    for (d, &o) in out.data_mut().iter_mut().zip(u_bar_old.data()) {
        *d += (*d - o) * b;
    }
    out
}
