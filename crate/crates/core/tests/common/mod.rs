//! Fixtures and tolerances shared by the integration tests and the
//! acceptance harness.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use stz::eval::{synth_channels, zf_weights, ChannelSet, ChannelSpec, WeightSet};
use stz::linalg::svd;
use stz::rng::{complex_normal, gaussian_matrix, named_rng};
use stz::{tucker_reconstruct, CMatrix, ComplexTensor3, FactorMatrix, C64};

/// Exact-arithmetic compositions (reconstructions, unitary round trips).
pub const EXACT: f64 = 1e-10;
/// Givens reconstruction after elimination and re-application.
pub const GIVENS_RT: f64 = 1e-9;
/// ZF identity `V W = I` and row orthonormality.
pub const ZF: f64 = 1e-8;
/// Sum-rate oracle agreement.
pub const RATE_ORACLE: f64 = 1e-10;
/// Relative error the solver must reach on planted instances.
pub const EXACT_RECOVERY: f64 = 1e-6;
/// Per-factor relative error the angle coder targets.
pub const FACTOR_RE: f64 = 0.01;
/// Monotonicity slack for objective and auxiliary sequences, relative to
/// the initial objective.
pub const DESCENT_SLACK: f64 = 1e-12;

pub fn random_orthonormal(rng: &mut impl rand::Rng, n: usize, r: usize) -> FactorMatrix {
    svd(&gaussian_matrix(rng, n, r)).unwrap().u
}

/// Core of shape `ranks` whose `alpha1` nonzeros pairwise share at most one
/// index, so every unfolding has orthogonal rows and HOSVD recovers the
/// factors up to column phases. Magnitudes are distinct.
pub fn orthogonal_sparse_core(rng: &mut impl rand::Rng, ranks: [usize; 3], alpha1: usize) -> ComplexTensor3 {
    assert!(ranks[1] <= ranks[2] && ranks[0] <= ranks[2], "pattern needs r1, r2 <= r3");
    let shift = ranks[2] / ranks[0];
    let mut g = ComplexTensor3::zeros(ranks);
    let mut placed = 0;
    'outer: for i in 0..ranks[0] {
        for j in 0..ranks[1] {
            if placed == alpha1 {
                break 'outer;
            }
            let k = (j + i * shift) % ranks[2];
            g.set(i, j, k, complex_normal(rng) * (1.0 + 0.37 * placed as f64));
            placed += 1;
        }
    }
    assert_eq!(placed, alpha1, "support pattern holds at most r1 * r2 entries");
    g
}

/// `S* + [[G*; U*]]` with a dense core (`alpha1 = r1 r2 r3`) or a sparse
/// all-orthogonal core, and `alpha2` residual spikes whose magnitude is
/// `spike` times the RMS entry of the low-rank part.
pub struct Planted {
    pub v: ComplexTensor3,
    pub core: ComplexTensor3,
    pub factors: [FactorMatrix; 3],
    pub residual: ComplexTensor3,
}

pub fn planted(seed: u64, dims: [usize; 3], ranks: [usize; 3], alpha1: usize, alpha2: usize, spike: f64) -> Planted {
    let mut rng = named_rng(seed, "planted");
    let full: usize = ranks.iter().product();
    let core = if alpha1 == full {
        ComplexTensor3::from_fn(ranks, |_, _, _| complex_normal(&mut rng))
    } else {
        orthogonal_sparse_core(&mut rng, ranks, alpha1)
    };
    let factors = [0, 1, 2].map(|i| random_orthonormal(&mut rng, dims[i], ranks[i]));
    let low = tucker_reconstruct(&core, &factors).unwrap();
    let rms = low.frobenius_norm() / (low.numel() as f64).sqrt();
    let mut residual = ComplexTensor3::zeros(dims);
    let mut idx: Vec<usize> = (0..low.numel()).collect();
    idx.shuffle(&mut rng);
    for &i in &idx[..alpha2] {
        residual.data_mut()[i] = complex_normal(&mut rng) * (rms * spike);
    }
    let v = low.add(&residual).unwrap();
    Planted { v, core, factors, residual }
}

/// Geometric-model channel spec with `users` users and `N_u = 4`.
pub fn channel_spec(seed: u64, users: usize, rbs: usize, nt: usize, streams: usize) -> ChannelSpec {
    let mut s = ChannelSpec::new(users, rbs, nt, 4, streams);
    s.seed = seed;
    s
}

/// Reference ZF weights of a seeded geometric channel.
pub fn zf_set(seed: u64, users: usize, rbs: usize, nt: usize, streams: usize) -> WeightSet {
    zf_weights(&synth_channels(&channel_spec(seed, users, rbs, nt, streams)).unwrap()).unwrap()
}

pub fn random_tensor(rng: &mut impl rand::Rng, dims: [usize; 3]) -> ComplexTensor3 {
    ComplexTensor3::from_fn(dims, |_, _, _| complex_normal(rng))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// i.i.d. Gaussian channels with random noise powers in `[0.1, 1)`.
pub fn random_channel_set(seed: u64, users: usize, rbs: usize, nt: usize, nu: usize, streams: usize, res: usize) -> ChannelSet {
    let mut rng = named_rng(seed, "rate-oracle-channel");
    let mut spec = ChannelSpec::new(users, rbs, nt, nu, streams);
    spec.res_per_rb = res;
    let h = (0..users)
        .map(|_| (0..rbs * res).map(|_| gaussian_matrix(&mut rng, nu, nt)).collect())
        .collect();
    let noise = (0..users).map(|_| (0..rbs).map(|_| rng.gen_range(0.1..1.0)).collect()).collect();
    ChannelSet { spec, h, noise }
}

pub fn random_precoders(seed: u64, users: usize, rbs: usize, nt: usize, streams: usize) -> Vec<Vec<CMatrix>> {
    let mut rng = named_rng(seed, "rate-oracle-precoders");
    (0..users)
        .map(|_| (0..rbs).map(|_| gaussian_matrix(&mut rng, nt, streams)).collect())
        .collect()
}

fn to_dense(m: &CMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Sum rate by dense linear algebra: each stream's rate is
/// `log2 det(A) - log2 det(A - a a^H)` with `A` the full received covariance
/// and `a = H w_l`, averaged over resource elements.
pub fn dense_sum_rate(ch: &ChannelSet, w: &[Vec<CMatrix>]) -> f64 {
    let e = ch.spec.res_per_rb;
    let mut total = 0.0;
    for j in 0..ch.spec.rbs {
        let cols: Vec<(usize, DMatrix<C64>)> = w
            .iter()
            .enumerate()
            .flat_map(|(k, wk)| {
                let m = to_dense(&wk[j]);
                (0..m.ncols())
                    .map(|c| {
                        let col = m.column(c).into_owned();
                        let norm = col.norm();
                        let unit = if norm > 0.0 { col.unscale(norm) } else { col };
                        (k, DMatrix::from_column_slice(unit.nrows(), 1, unit.as_slice()))
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        for (k, wl) in &cols {
            let mut acc = 0.0;
            for h in ch.rb(*k, j) {
                let h = to_dense(h);
                let n = ch.noise[*k][j];
                let mut a = DMatrix::<C64>::identity(h.nrows(), h.nrows()) * C64::new(n, 0.0);
                for (_, wi) in &cols {
                    let hw = &h * wi;
                    a += &hw * hw.adjoint();
                }
                let hw = &h * wl;
                let c = &a - &hw * hw.adjoint();
                acc += (a.determinant().re / c.determinant().re).log2();
            }
            total += acc / e as f64;
        }
    }
    total
}

/// Full sort on (modulus desc, index asc); keeps the first `k`.
pub fn brute_force_topk(t: &ComplexTensor3, k: usize) -> ComplexTensor3 {
    let mut idx: Vec<usize> = (0..t.numel()).collect();
    idx.sort_by(|&a, &b| {
        let (ma, mb) = (t.data()[a].norm_sqr(), t.data()[b].norm_sqr());
        mb.partial_cmp(&ma).unwrap().then(a.cmp(&b))
    });
    let mut out = ComplexTensor3::zeros(t.dims());
    for &i in idx.iter().take(k) {
        out.data_mut()[i] = t.data()[i];
    }
    out
}
