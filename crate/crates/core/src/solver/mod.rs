//! Sparse Tucker model `V ~ S + [[G; U1, U2, U3]]` and its accelerated
//! proximal block coordinate descent (APBCD) solver.
//!
//! One iteration updates the core, then each factor followed by its inertial
//! extrapolation `Ub = U + beta (U - Ub_old)`, then the sparse residual.
//! Internally the solve runs on `V / ||V||_F`; the returned core and residual
//! are rescaled and every trace value is reported on the original scale
//! (factor-step terms are scale free).

mod prox;
mod steps;
mod updates;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use prox::{prox_l0_topk, sparsity_budget};
pub use steps::{auto_step_sizes, StepEstimate, StepSizes, M_FLOOR};
pub use updates::{companion_unfolding, extrapolate_factor, update_core, update_factor, update_sparse};

use crate::error::{ensure, Error, Result};
use crate::linalg::{svd, CMatrix, FactorMatrix, C64};
use crate::rng::{gaussian_matrix, named_rng};
use crate::tensor::ComplexTensor3;
use crate::tucker::{hosvd, project_core, tucker_reconstruct};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

/// `"auto"` or explicit proximal weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSetting {
    Auto(AutoTag),
    Values(StepSizes),
}

impl Default for EtaSetting {
    fn default() -> Self {
        EtaSetting::Auto(AutoTag::Auto)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    /// Truncated HOSVD of `V`, core cut to its top `alpha1` entries.
    #[default]
    Hosvd,
    /// Seeded random orthonormal factors, core projected from `V`.
    Random,
}

fn default_max_iters() -> usize {
    50
}
fn default_tol() -> f64 {
    1e-4
}
fn default_refresh() -> usize {
    10
}
fn default_safety() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StdConfig {
    pub ranks: [usize; 3],
    pub s1: f64,
    pub s2: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub eta: EtaSetting,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub init: Init,
    /// Automatic step sizes are re-estimated every this many iterations.
    #[serde(default = "default_refresh")]
    pub eta_refresh: usize,
    /// Safety factor `c` of automatic steps `eta = c / (L + M)`.
    #[serde(default = "default_safety")]
    pub eta_safety: f64,
}

impl StdConfig {
    pub fn new(ranks: [usize; 3], s1: f64, s2: f64) -> Self {
        Self {
            ranks,
            s1,
            s2,
            beta: 0.0,
            eta: EtaSetting::default(),
            max_iters: default_max_iters(),
            tol: default_tol(),
            seed: 0,
            init: Init::Hosvd,
            eta_refresh: default_refresh(),
            eta_safety: default_safety(),
        }
    }

    /// `(alpha1, alpha2)` for a tensor of shape `dims`.
    pub fn budgets(&self, dims: [usize; 3]) -> (usize, usize) {
        (
            sparsity_budget(self.s1, self.ranks.iter().product()),
            sparsity_budget(self.s2, dims.iter().product()),
        )
    }

    pub fn validate(&self, dims: [usize; 3]) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        for i in 0..3 {
            if self.ranks[i] == 0 || self.ranks[i] > dims[i] {
                return bad(format!("rank {} = {} outside 1..={}", i + 1, self.ranks[i], dims[i]));
            }
        }
        if !(self.s1 > 0.0 && self.s1 <= 1.0) {
            return bad(format!("s1 = {} outside (0, 1]", self.s1));
        }
        if !(0.0..=1.0).contains(&self.s2) {
            return bad(format!("s2 = {} outside [0, 1]", self.s2));
        }
        if self.budgets(dims).0 == 0 {
            return bad(format!("s1 = {} keeps no core entries at ranks {:?}", self.s1, self.ranks));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return bad(format!("beta = {} outside [0, 1)", self.beta));
        }
        if let EtaSetting::Values(s) = &self.eta {
            let all = [s.core, s.sparse, s.factors[0], s.factors[1], s.factors[2]];
            if all.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
                return bad(format!("step sizes must be positive: {s:?}"));
            }
        }
        if !(self.tol >= 0.0) {
            return bad(format!("tol = {} must be nonnegative", self.tol));
        }
        if !(self.eta_safety.is_finite() && self.eta_safety > 0.0) {
            return bad(format!("eta_safety = {} must be positive", self.eta_safety));
        }
        if self.eta_refresh == 0 {
            return bad("eta_refresh must be positive".into());
        }
        Ok(())
    }
}

/// Decomposition state `(G, U1..U3, S)` plus the extrapolated factors.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseTucker {
    pub core: ComplexTensor3,
    pub factors: [FactorMatrix; 3],
    pub residual: ComplexTensor3,
    pub factors_bar: [FactorMatrix; 3],
    pub iter: usize,
    /// Factor updates whose SVD needed a basis completion.
    pub rank_deficient_updates: usize,
}

impl SparseTucker {
    pub fn new(core: ComplexTensor3, factors: [FactorMatrix; 3], residual: ComplexTensor3) -> Self {
        Self {
            core,
            factors_bar: factors.clone(),
            factors,
            residual,
            iter: 0,
            rank_deficient_updates: 0,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.residual.dims()
    }

    pub fn ranks(&self) -> [usize; 3] {
        self.core.dims()
    }

    /// `[[G; U1, U2, U3]]`.
    pub fn low_rank(&self) -> Result<ComplexTensor3> {
        tucker_reconstruct(&self.core, &self.factors)
    }

    /// `S + [[G; U1, U2, U3]]`.
    pub fn reconstruct(&self) -> Result<ComplexTensor3> {
        self.low_rank()?.add(&self.residual)
    }

    /// `1/2 ||V - S - [[G; U]]||_F^2`.
    pub fn objective(&self, v: &ComplexTensor3) -> Result<f64> {
        Ok(0.5 * self.reconstruct()?.dist_sqr(v))
    }

    pub fn inertia(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.factors[i].sub(&self.factors_bar[i]).frobenius_norm_sqr())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub objective: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub step_sq: f64,
    pub rel_err: f64,
}

/// Per-iteration diagnostics; record 0 is the initial point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DescentTrace {
    pub records: Vec<TraceRecord>,
    pub converged: bool,
}

impl DescentTrace {
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iter)
    }

    pub fn final_rel_err(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.rel_err)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.records {
            wr.serialize(r)?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn random_init(v: &ComplexTensor3, cfg: &StdConfig) -> Result<[FactorMatrix; 3]> {
    let dims = v.dims();
    let mut rng = named_rng(cfg.seed, "std-init");
    let mut out: Vec<CMatrix> = Vec::with_capacity(3);
    for i in 0..3 {
        out.push(svd(&gaussian_matrix(&mut rng, dims[i], cfg.ranks[i]))?.u);
    }
    Ok(out.try_into().expect("three factors"))
}

fn initial_state(vn: &ComplexTensor3, cfg: &StdConfig, alpha1: usize) -> Result<SparseTucker> {
    let factors = match cfg.init {
        Init::Hosvd => hosvd(vn, cfg.ranks)?.factors,
        Init::Random => random_init(vn, cfg)?,
    };
    let core = prox_l0_topk(&project_core(vn, &factors)?, alpha1);
    Ok(SparseTucker::new(core, factors, ComplexTensor3::zeros(vn.dims())))
}

fn fixed_estimate(s: StepSizes) -> StepEstimate {
    StepEstimate {
        eta: s,
        gamma: [0.0; 3],
        l_core: 1.0,
        l_factors: [0.0; 3],
        m: 0.0,
        beta: 0.0,
    }
}

/// Runs APBCD on `v` and returns the final state with its trace.
pub fn apbcd_solve(v: &ComplexTensor3, cfg: &StdConfig) -> Result<(SparseTucker, DescentTrace)> {
    cfg.validate(v.dims())?;
    ensure!(v.is_finite(), "input tensor contains non-finite entries");
    let dims = v.dims();
    let (alpha1, alpha2) = cfg.budgets(dims);
    let scale = v.frobenius_norm();
    let mut trace = DescentTrace::default();

    if scale == 0.0 {
        let factors = [0, 1, 2].map(|i| CMatrix::thin_identity(dims[i], cfg.ranks[i]));
        let st = SparseTucker::new(ComplexTensor3::zeros(cfg.ranks), factors, ComplexTensor3::zeros(dims));
        trace.records.push(TraceRecord {
            iter: 0,
            objective: 0.0,
            h: 0.0,
            step_sq: 0.0,
            rel_err: 0.0,
        });
        trace.converged = true;
        return Ok((st, trace));
    }

    let vn = v.scale(C64::new(1.0 / scale, 0.0));
    let s2 = scale * scale;
    let mut st = initial_state(&vn, cfg, alpha1)?;

    let mut est = match cfg.eta {
        EtaSetting::Auto(_) => auto_step_sizes(&st, &vn, cfg.beta)?.with_safety(cfg.eta_safety),
        EtaSetting::Values(s) => fixed_estimate(s),
    };
    let f0 = st.objective(&vn)?;
    let h_of = |st: &SparseTucker, f: f64, est: &StepEstimate| -> f64 {
        let inertia = st.inertia();
        f + (0..3).map(|i| est.gamma[i] * inertia[i]).sum::<f64>()
    };
    trace.records.push(TraceRecord {
        iter: 0,
        objective: f0 * s2,
        h: h_of(&st, f0, &est) * s2,
        step_sq: 0.0,
        rel_err: (2.0 * f0).sqrt(),
    });
    let diverge_at = (10.0 * f0).max(1e-14);
    let mut quiet = 0usize;

    for k in 1..=cfg.max_iters {
        if k > 1 && (k - 1) % cfg.eta_refresh == 0 {
            if let EtaSetting::Auto(_) = cfg.eta {
                est = auto_step_sizes(&st, &vn, cfg.beta)?.with_safety(cfg.eta_safety);
            }
        }
        let prev = st.clone();

        st.core = update_core(&st, &vn, est.eta.core, alpha1)?;
        for mode in 1..=3 {
            let (u, deficient) = update_factor(&st, &vn, mode, est.eta.factors[mode - 1])?;
            if deficient {
                st.rank_deficient_updates += 1;
            }
            st.factors_bar[mode - 1] = extrapolate_factor(&u, &prev.factors_bar[mode - 1], cfg.beta);
            st.factors[mode - 1] = u;
        }
        st.residual = update_sparse(&st, &vn, est.eta.sparse, alpha2)?;
        st.iter = k;

        let f = st.objective(&vn)?;
        if !f.is_finite() {
            return Err(Error::NonFinite("objective"));
        }
        if f > diverge_at {
            return Err(Error::Divergence {
                iter: k,
                objective: f * s2,
                initial: f0 * s2,
            });
        }
        let step_sq = s2 * (st.core.dist_sqr(&prev.core) + st.residual.dist_sqr(&prev.residual))
            + (0..3)
                .map(|i| st.factors[i].sub(&prev.factors[i]).frobenius_norm_sqr())
                .sum::<f64>();
        let rel_err = (2.0 * f).sqrt();
        let last = trace.records.last().expect("initial record").rel_err;
        trace.records.push(TraceRecord {
            iter: k,
            objective: f * s2,
            h: h_of(&st, f, &est) * s2,
            step_sq,
            rel_err,
        });
        if (last - rel_err).abs() < cfg.tol {
            quiet += 1;
            if quiet >= 3 {
                trace.converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }

    let up = C64::new(scale, 0.0);
    st.core = st.core.scale(up);
    st.residual = st.residual.scale(up);
    Ok((st, trace))
}
