//! Complex Givens parameterization of semi-orthogonal factors.
//!
//! An `n x r` factor with orthonormal columns is written as
//! `U = (prod_{i=1..r} prod_{j=i+1..n} G_ij) I_bar`, where `G_ij` acts on
//! rows `(i, j)` as `[[cos eta, e^{j theta} sin eta], [-e^{-j theta} sin eta, cos eta]]`
//! and `I_bar` is the `n x r` leading identity. Rotation `(i, j)` (1-based)
//! is stored at position `k = (2n - i)(i - 1)/2 + j - i`, which enumerates
//! the pairs column by column.
//!
//! Such a product only reaches factors whose elimination pivots are real
//! positive. The remaining `r` column phases are moved into the core by
//! [`normalize_column_phases`] before decomposition.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::linalg::{CMatrix, FactorMatrix, C64, ONE, ZERO};
use crate::tensor::ComplexTensor3;

/// Orthogonality tolerance accepted by [`givens_decompose`].
pub const ORTHO_TOL: f64 = 1e-8;
/// Largest distance from `I_bar` tolerated after elimination.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GivensParams {
    pub n: usize,
    pub r: usize,
    pub etas: Vec<f64>,
    pub thetas: Vec<f64>,
    pub phase_absorbed: bool,
}

/// Number of rotations `(2n - r - 1) r / 2`.
pub fn rotation_count(n: usize, r: usize) -> usize {
    assert!(r <= n);
    (2 * n - r - 1) * r / 2
}

/// 1-based `(i, j)` to 1-based position `k`.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    (2 * n - i) * (i - 1) / 2 + j - i
}

fn arg(z: C64) -> f64 {
    if z == ZERO {
        0.0
    } else {
        z.arg()
    }
}

fn wrap_tau(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y >= TAU {
        0.0
    } else {
        y
    }
}

/// Applies `G^H` on rows `(p, q)` of `w`.
fn apply_adjoint(w: &mut CMatrix, p: usize, q: usize, c: f64, s: f64, e: C64, from_col: usize) {
    for col in from_col..w.cols() {
        let a = w[(p, col)];
        let b = w[(q, col)];
        w[(p, col)] = a * c - e * b * s;
        w[(q, col)] = e.conj() * a * s + b * c;
    }
}

/// Applies `G` on rows `(p, q)` of `w`.
fn apply(w: &mut CMatrix, p: usize, q: usize, c: f64, s: f64, e: C64, from_col: usize) {
    for col in from_col..w.cols() {
        let a = w[(p, col)];
        let b = w[(q, col)];
        w[(p, col)] = a * c + e * b * s;
        w[(q, col)] = -(e.conj() * a * s) + b * c;
    }
}

struct Elimination {
    etas: Vec<f64>,
    thetas: Vec<f64>,
    /// Unit phase of each pivot after its column was reduced.
    pivots: Vec<C64>,
    reduced: CMatrix,
}

fn eliminate(u: &CMatrix) -> Elimination {
    let (n, r) = u.shape();
    let count = rotation_count(n, r);
    let mut etas = Vec::with_capacity(count);
    let mut thetas = Vec::with_capacity(count);
    let mut pivots = Vec::with_capacity(r);
    let mut w = u.clone();
    for i in 0..r {
        for j in i + 1..n {
            let a = w[(i, i)];
            let b = w[(j, i)];
            let eta = b.norm().atan2(a.norm());
            let theta = wrap_tau(arg(a) - arg(b) + PI);
            let e = C64::from_polar(1.0, theta);
            apply_adjoint(&mut w, i, j, eta.cos(), eta.sin(), e, i);
            w[(j, i)] = ZERO;
            etas.push(eta);
            thetas.push(theta);
        }
        let p = w[(i, i)];
        pivots.push(if p == ZERO { ONE } else { p / p.norm() });
    }
    Elimination {
        etas,
        thetas,
        pivots,
        reduced: w,
    }
}

/// Unit phases that [`normalize_column_phases`] removes from each column:
/// the phase of each column's pivot at the moment it is eliminated.
pub fn pivot_phases(u: &FactorMatrix) -> Vec<C64> {
    eliminate(u).pivots
}

/// Makes every elimination pivot of `u` real nonnegative and moves the
/// removed phases into `core` along `mode`, leaving the Tucker product
/// unchanged.
pub fn normalize_column_phases(u: &FactorMatrix, core: &ComplexTensor3, mode: usize) -> Result<(FactorMatrix, ComplexTensor3)> {
    ensure!((1..=3).contains(&mode), "mode {mode} out of range 1..=3");
    ensure!(
        core.dims()[mode - 1] == u.cols(),
        "core mode {mode} has size {}, factor has {} columns",
        core.dims()[mode - 1],
        u.cols()
    );
    for c in 0..u.cols() {
        if u.col(c).iter().all(|z| *z == ZERO) {
            return Err(Error::DegenerateFactor(c));
        }
    }
    let phases = pivot_phases(u);
    let mut un = u.clone();
    for (c, ph) in phases.iter().enumerate() {
        let inv = ph.conj();
        for z in un.col_mut(c) {
            *z *= inv;
        }
    }
    Ok((un, absorb_phases(core, mode, &phases)?))
}

/// Multiplies slice `c` of `core` along `mode` by `phases[c]`.
pub fn absorb_phases(core: &ComplexTensor3, mode: usize, phases: &[C64]) -> Result<ComplexTensor3> {
    ensure!((1..=3).contains(&mode), "mode {mode} out of range 1..=3");
    ensure!(
        core.dims()[mode - 1] == phases.len(),
        "core mode {mode} has size {}, got {} phases",
        core.dims()[mode - 1],
        phases.len()
    );
    let mut g = core.clone();
    let d = g.dims();
    for k in 0..d[2] {
        for j in 0..d[1] {
            for i in 0..d[0] {
                let idx = [i, j, k][mode - 1];
                let v = g.get(i, j, k) * phases[idx];
                g.set(i, j, k, v);
            }
        }
    }
    Ok(g)
}

/// Angles of `u diag(conj(p))` together with the pivot phases `p`, from one
/// elimination pass. Unlike normalizing first and decomposing second, this
/// cannot disagree with itself on columns whose entries are at rounding
/// level, where the rotation angles are decided by noise.
pub fn givens_decompose_with_phases(u: &FactorMatrix) -> Result<(GivensParams, Vec<C64>)> {
    let (n, r) = u.shape();
    ensure!(r <= n, "factor {n}x{r} has more columns than rows");
    let defect = u.orthogonality_defect();
    if !(defect <= ORTHO_TOL) {
        return Err(Error::NotSemiOrthogonal(defect));
    }
    for c in 0..r {
        if u.col(c).iter().all(|z| *z == ZERO) {
            return Err(Error::DegenerateFactor(c));
        }
    }
    let el = eliminate(u);
    let mut expect = CMatrix::thin_identity(n, r);
    for (c, p) in el.pivots.iter().enumerate() {
        expect.data_mut()[c + c * n] = *p;
    }
    let residual = el.reduced.sub(&expect).frobenius_norm();
    if residual > RESIDUAL_TOL {
        return Err(Error::NotSemiOrthogonal(residual));
    }
    Ok((
        GivensParams {
            n,
            r,
            etas: el.etas,
            thetas: el.thetas,
            phase_absorbed: true,
        },
        el.pivots,
    ))
}

/// Angles of the rotations that reduce `u` to `I_bar`.
pub fn givens_decompose(u: &FactorMatrix) -> Result<GivensParams> {
    let (n, r) = u.shape();
    ensure!(r <= n, "factor {n}x{r} has more columns than rows");
    let defect = u.orthogonality_defect();
    if !(defect <= ORTHO_TOL) {
        return Err(Error::NotSemiOrthogonal(defect));
    }
    let el = eliminate(u);
    let residual = el.reduced.sub(&CMatrix::thin_identity(n, r)).frobenius_norm();
    if residual > RESIDUAL_TOL {
        return Err(Error::PhaseNormalizationMissing(residual));
    }
    Ok(GivensParams {
        n,
        r,
        etas: el.etas,
        thetas: el.thetas,
        phase_absorbed: true,
    })
}

/// `U = G_12 G_13 ... G_{r,n} I_bar`. Always semi-orthogonal, whatever the
/// angle values.
pub fn givens_reconstruct(p: &GivensParams) -> Result<FactorMatrix> {
    let count = rotation_count(p.n, p.r);
    ensure!(
        p.etas.len() == count && p.thetas.len() == count,
        "expected {count} angle pairs, got {} etas and {} thetas",
        p.etas.len(),
        p.thetas.len()
    );
    let mut w = CMatrix::thin_identity(p.n, p.r);
    let mut k = count;
    for i in (0..p.r).rev() {
        for j in (i + 1..p.n).rev() {
            k -= 1;
            let (eta, theta) = (p.etas[k], p.thetas[k]);
            if eta == 0.0 {
                continue;
            }
            // rows i and j of the partial product are zero in columns < i
            apply(&mut w, i, j, eta.cos(), eta.sin(), C64::from_polar(1.0, theta), i);
        }
    }
    Ok(w)
}

impl GivensParams {
    pub fn pair_count(&self) -> usize {
        rotation_count(self.n, self.r)
    }

    /// Checks counts and angle ranges (`eta` in `[0, pi]`, `theta` in `[0, 2 pi)`).
    pub fn validate(&self) -> Result<()> {
        let count = self.pair_count();
        ensure!(self.etas.len() == count && self.thetas.len() == count, "angle count mismatch");
        ensure!(
            self.etas.iter().all(|e| (0.0..=PI).contains(e)),
            "eta outside [0, pi]"
        );
        ensure!(
            self.thetas.iter().all(|t| (0.0..TAU).contains(t)),
            "theta outside [0, 2 pi)"
        );
        Ok(())
    }
}

/// Upper end of the exact `eta` range.
pub const ETA_MAX: f64 = FRAC_PI_2;
