//! Step-size and auxiliary-weight estimates.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::spectral_norm_sqr;
use crate::tensor::ComplexTensor3;
use crate::tucker::tucker_reconstruct;

use super::SparseTucker;

pub const M_FLOOR: f64 = 1e-6;

/// Proximal weights of the five blocks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSizes {
    pub core: f64,
    pub sparse: f64,
    pub factors: [f64; 3],
}

/// Everything [`auto_step_sizes`] derives from the current iterate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepEstimate {
    pub eta: StepSizes,
    /// Weights of `||U_i - Ub_i||^2` in the auxiliary function.
    pub gamma: [f64; 3],
    pub l_core: f64,
    pub l_factors: [f64; 3],
    pub m: f64,
    pub beta: f64,
}

impl StepEstimate {
    /// Scales every step by `c`; `gamma` is recomputed for the scaled
    /// factor steps.
    pub fn with_safety(mut self, c: f64) -> Self {
        if c == 1.0 {
            return self;
        }
        self.eta.core *= c;
        self.eta.sparse *= c;
        for i in 0..3 {
            self.eta.factors[i] *= c;
            if self.gamma[i] != 0.0 {
                self.gamma[i] = gamma_weight(self.beta, self.eta.factors[i], self.l_factors[i], self.m, i + 1);
            }
        }
        self
    }
}

fn gamma_weight(beta: f64, eta: f64, l: f64, m: f64, mode: usize) -> f64 {
    let b2 = beta * beta;
    let idx = mode as f64;
    (1.0 + b2) / (4.0 * eta * b2) + m * (idx - 2.0) / 2.0 + (l + m) * (1.0 + beta) * (beta - 1.0) / (2.0 * b2)
}

/// Blockwise Lipschitz estimates and step sizes `eta = 1 / (L + M)`.
///
/// `L_G = prod ||Ub_i||_2^2` (1 for orthonormal factors), `L_S = 1`,
/// `L_i = ||G_(i)||_2^2 prod_{j != i} ||Ub_j||_2^2` and `M` is twice the
/// largest spectral norm among the residual unfoldings, floored at
/// [`M_FLOOR`]. For `beta > 0` the factor steps and `gamma_i` follow the
/// inertial descent condition with `eps = (1 - beta^2) / (2 (1 + beta^2))`.
pub fn auto_step_sizes(state: &SparseTucker, v: &ComplexTensor3, beta: f64) -> Result<StepEstimate> {
    let mut ub_norm = [0.0; 3];
    for (n, u) in ub_norm.iter_mut().zip(&state.factors_bar) {
        *n = spectral_norm_sqr(u)?;
    }
    let l_core: f64 = ub_norm.iter().product();
    let l_sparse = 1.0;

    let low = tucker_reconstruct(&state.core, &state.factors)?;
    let resid = v.sub(&state.residual)?.sub(&low)?;
    let mut m = 0.0f64;
    for mode in 1..=3 {
        m = m.max(spectral_norm_sqr(&resid.unfold(mode)?)?.sqrt());
    }
    let m = (2.0 * m).max(M_FLOOR);

    let mut l_factors = [0.0; 3];
    for i in 0..3 {
        let g = spectral_norm_sqr(&state.core.unfold(i + 1)?)?;
        let others: f64 = (0..3).filter(|&j| j != i).map(|j| ub_norm[j]).product();
        l_factors[i] = g * others;
    }

    let mut factors = [0.0; 3];
    let mut gamma = [0.0; 3];
    if beta == 0.0 {
        for i in 0..3 {
            factors[i] = 1.0 / (l_factors[i] + m);
        }
    } else {
        let b2 = beta * beta;
        let eps = (1.0 - b2) / (2.0 * (1.0 + b2));
        for i in 0..3 {
            let li = l_factors[i] + m;
            let idx = (i + 1) as f64;
            let num = 1.0 - b2 - eps * (1.0 + b2);
            let den = 4.0 * m * b2
                + 2.0 * eps * b2 * m * (idx - 2.0)
                + 2.0 * li * (1.0 + beta) * ((1.0 + beta) + eps * (beta - 1.0));
            factors[i] = num / den;
            gamma[i] = gamma_weight(beta, factors[i], l_factors[i], m, i + 1);
        }
    }
    Ok(StepEstimate {
        eta: StepSizes {
            core: 1.0 / (l_core + m),
            sparse: 1.0 / (l_sparse + m),
            factors,
        },
        gamma,
        l_core,
        l_factors,
        m,
        beta,
    })
}
