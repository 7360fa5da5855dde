//! Small dense complex linear algebra.
//!
//! Everything here is column-major and sized for factor matrices and mode
//! unfoldings (a few hundred rows at most). The SVD is a one-sided (Hestenes)
//! Jacobi iteration with a fixed cyclic sweep order, so results are
//! bit-reproducible for identical inputs.

use num_complex::Complex64;

use crate::error::{ensure, Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Jacobi stops once every column pair satisfies |a_p^H a_q| <= tol * |a_p| |a_q|.
pub const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 80;

/// Dense complex matrix, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// A factor matrix `U_i` (`n_i x r_i`). Semi-orthogonality is a runtime
/// property checked with [`CMatrix::orthogonality_defect`].
pub type FactorMatrix = CMatrix;

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::thin_identity(n, n)
    }

    /// The `n x r` matrix with ones on the leading diagonal.
    pub fn thin_identity(n: usize, r: usize) -> Self {
        let mut m = Self::zeros(n, r);
        for i in 0..n.min(r) {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        ensure!(
            data.len() == rows * cols,
            "matrix data length {} != {rows}x{cols}",
            data.len()
        );
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices (test and example convenience).
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        Self::from_fn(nr, nc, |r, c| rows[r][c])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn col(&self, c: usize) -> &[C64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, c: usize) -> &mut [C64] {
        let r = self.rows;
        &mut self.data[c * r..(c + 1) * r]
    }

    /// Mutable views of two distinct columns.
    fn col_pair_mut(&mut self, p: usize, q: usize) -> (&mut [C64], &mut [C64]) {
        debug_assert!(p < q);
        let r = self.rows;
        let (head, tail) = self.data.split_at_mut(q * r);
        (&mut head[p * r..(p + 1) * r], &mut tail[..r])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Leading `k` columns.
    pub fn leading_cols(&self, k: usize) -> Self {
        assert!(k <= self.cols);
        Self {
            rows: self.rows,
            cols: k,
            data: self.data[..k * self.rows].to_vec(),
        }
    }

    /// `self * other`.
    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        ensure!(
            self.cols == other.rows,
            "matmul {}x{} * {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let oc = other.col(j);
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in oc.iter().enumerate() {
                if b == ZERO {
                    continue;
                }
                for (d, &a) in dst.iter_mut().zip(self.col(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self^H * other`.
    pub fn adjoint_mul(&self, other: &CMatrix) -> Result<CMatrix> {
        ensure!(
            self.rows == other.rows,
            "adjoint_mul {}x{} ^H * {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
        Ok(CMatrix::from_fn(self.cols, other.cols, |i, j| {
            dot_conj(self.col(i), other.col(j))
        }))
    }

    /// `self * other^H`.
    pub fn mul_adjoint(&self, other: &CMatrix) -> Result<CMatrix> {
        ensure!(
            self.cols == other.cols,
            "mul_adjoint {}x{} * ({}x{})^H",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
        let mut out = CMatrix::zeros(self.rows, other.rows);
        for k in 0..self.cols {
            let a = self.col(k);
            let b = other.col(k);
            for (j, &bj) in b.iter().enumerate() {
                let bj = bj.conj();
                if bj == ZERO {
                    continue;
                }
                let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
                for (d, &ai) in dst.iter_mut().zip(a) {
                    *d += ai * bj;
                }
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sqr().sqrt()
    }

    /// Frobenius inner product `<self, other> = tr(self^H other)`.
    pub fn inner(&self, other: &CMatrix) -> C64 {
        assert_eq!(self.shape(), other.shape());
        dot_conj(&self.data, &other.data)
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), other.shape());
        self.zip_map(other, |a, b| a - b)
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), other.shape());
        self.zip_map(other, |a, b| a + b)
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    fn zip_map(&self, other: &CMatrix, f: impl Fn(C64, C64) -> C64) -> CMatrix {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `||U^H U - I||_F`.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.cols {
            for j in 0..self.cols {
                let mut g = dot_conj(self.col(i), self.col(j));
                if i == j {
                    g -= ONE;
                }
                acc += g.norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[c * self.rows + r]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[c * self.rows + r]
    }
}

/// `sum conj(a_i) b_i`.
#[inline]
pub fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    C64::new(re, im)
}

fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Thin SVD `A = U diag(s) V^H` with `k = min(m, n)` singular triplets,
/// sorted by non-increasing singular value (stable for ties).
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
    /// Set when some singular values were numerically zero and the matching
    /// left singular vectors had to be completed to an orthonormal set.
    pub rank_deficient: bool,
}

/// One-sided Jacobi SVD.
pub fn svd(a: &CMatrix) -> Result<Svd> {
    ensure!(a.is_finite(), "svd input contains non-finite entries");
    if a.rows >= a.cols {
        jacobi_svd(a)
    } else {
        let t = jacobi_svd(&a.adjoint())?;
        // A^H = U S V^H  =>  A = V S U^H; the completed side is now V, which
        // is a product of rotations and therefore already orthonormal.
        Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
            rank_deficient: t.rank_deficient,
        })
    }
}

fn jacobi_svd(a: &CMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut w = a.clone();
    let mut v = CMatrix::identity(n);
    let mut converged = n < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::SvdNonConvergence { mode: None, sweeps });
        }
        sweeps += 1;
        converged = true;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = norm_sqr(w.col(p));
                let beta = norm_sqr(w.col(q));
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot_conj(w.col(p), w.col(q));
                let g = gamma.norm();
                if g <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut w, p, q, c, s, phase);
                rotate_pair(&mut v, p, q, c, s, phase);
            }
        }
    }

    let mut sigma: Vec<f64> = (0..n).map(|j| norm_sqr(w.col(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));

    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let cutoff = smax * f64::EPSILON * (m.max(n) as f64);
    let mut u = CMatrix::zeros(m, n);
    let mut vs = CMatrix::zeros(n, n);
    let mut s_out = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let sv = sigma[src];
        vs.col_mut(dst).copy_from_slice(v.col(src));
        if sv > cutoff && sv > 0.0 {
            for (d, &x) in u.col_mut(dst).iter_mut().zip(w.col(src)) {
                *d = x / sv;
            }
            s_out.push(sv);
        } else {
            deficient.push(dst);
            s_out.push(0.0);
        }
    }
    sigma.clear();
    if !deficient.is_empty() {
        complete_orthonormal(&mut u, &deficient);
    }
    Ok(Svd {
        u,
        s: s_out,
        v: vs,
        rank_deficient: !deficient.is_empty(),
    })
}

/// Columns p, q <- (c a_p - s e^{-i phi} a_q, s a_p + c e^{-i phi} a_q).
fn rotate_pair(m: &mut CMatrix, p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let ph = phase.conj();
    let (cp, cq) = m.col_pair_mut(p, q);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let a = *x;
        let b = *y * ph;
        *x = a * c - b * s;
        *y = a * s + b * c;
    }
}

/// Fills the listed columns of `u` with unit vectors orthogonal to all other
/// columns, drawing candidates from the standard basis in index order.
fn complete_orthonormal(u: &mut CMatrix, fill: &[usize]) {
    let m = u.rows;
    let n = u.cols;
    let mut filled: Vec<bool> = (0..n).map(|j| !fill.contains(&j)).collect();
    let mut next_basis = 0;
    for &target in fill {
        while next_basis < m {
            let mut cand = vec![ZERO; m];
            cand[next_basis] = ONE;
            next_basis += 1;
            // two passes of Gram-Schmidt against everything already fixed
            for _ in 0..2 {
                for j in (0..n).filter(|&j| filled[j]) {
                    let proj = dot_conj(u.col(j), &cand);
                    for (c, &x) in cand.iter_mut().zip(u.col(j)) {
                        *c -= proj * x;
                    }
                }
            }
            let nrm = norm_sqr(&cand).sqrt();
            if nrm > 1e-6 {
                for (d, c) in u.col_mut(target).iter_mut().zip(cand) {
                    *d = c / nrm;
                }
                filled[target] = true;
                break;
            }
        }
    }
}

/// Rotates every column so that its largest-modulus entry (lowest index on
/// ties) is real and nonnegative. Returns the applied unit phases.
pub fn normalize_max_entry_phase(u: &mut CMatrix) -> Vec<C64> {
    let mut phases = Vec::with_capacity(u.cols);
    for j in 0..u.cols {
        let col = u.col_mut(j);
        let mut best = 0;
        let mut best_mod = -1.0;
        for (i, z) in col.iter().enumerate() {
            let m = z.norm_sqr();
            if m > best_mod {
                best_mod = m;
                best = i;
            }
        }
        let pivot = col.get(best).copied().unwrap_or(ZERO);
        let ph = if pivot.norm() > 0.0 {
            (pivot / pivot.norm()).conj()
        } else {
            ONE
        };
        for z in col.iter_mut() {
            *z *= ph;
        }
        phases.push(ph);
    }
    phases
}

/// `||a||_2^2` by power iteration on the smaller Gram matrix, stopped when
/// the Rayleigh quotient changes by less than `1e-13` relative.
pub fn spectral_norm_sqr(a: &CMatrix) -> Result<f64> {
    let gram = if a.cols() <= a.rows() { a.adjoint_mul(a)? } else { a.mul_adjoint(a)? };
    let n = gram.rows();
    if n == 0 {
        return Ok(0.0);
    }
    let mut x: Vec<C64> = (0..n).map(|i| C64::new(1.0 + (i as f64 * 0.618).fract(), 0.0)).collect();
    let mut lambda = 0.0f64;
    for _ in 0..1000 {
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        x.iter_mut().for_each(|z| *z /= norm);
        let mut y = vec![ZERO; n];
        for c in 0..n {
            let xc = x[c];
            for (yr, g) in y.iter_mut().zip(gram.col(c)) {
                *yr += g * xc;
            }
        }
        let next = dot_conj(&x, &y).re;
        let done = (next - lambda).abs() <= 1e-13 * next.abs();
        lambda = next;
        x = y;
        if done {
            break;
        }
    }
    if !lambda.is_finite() {
        return Err(Error::NonFinite("spectral norm"));
    }
    Ok(lambda.max(0.0))
}

/// Leading `k` left singular vectors of `a`, phase-normalized so each
/// vector's largest-magnitude entry is real nonnegative. When `k` exceeds
/// `min(m, n)` the basis is completed deterministically.
pub fn leading_left_singular_vectors(a: &CMatrix, k: usize) -> Result<CMatrix> {
    ensure!(k <= a.rows, "requested {k} singular vectors of a {}-row matrix", a.rows);
    let dec = svd(a)?;
    let avail = dec.u.cols.min(k);
    let mut u = CMatrix::zeros(a.rows, k);
    for j in 0..avail {
        u.col_mut(j).copy_from_slice(dec.u.col(j));
    }
    if k > avail {
        let fill: Vec<usize> = (avail..k).collect();
        complete_orthonormal(&mut u, &fill);
    }
    normalize_max_entry_phase(&mut u);
    Ok(u)
}

/// Orthogonal polar factor `W Q^H` of `m = W S Q^H`; the closest
/// semi-orthogonal matrix to `m` and the maximizer of `Re <U, m>` over
/// `U^H U = I`. The flag reports rank deficiency.
pub fn polar_factor(m: &CMatrix) -> Result<(CMatrix, bool)> {
    ensure!(m.rows >= m.cols, "polar factor needs rows >= cols, got {}x{}", m.rows, m.cols);
    let dec = svd(m)?;
    Ok((dec.u.mul_adjoint(&dec.v)?, dec.rank_deficient))
}

/// Moore-Penrose pseudo-inverse with relative cutoff `rcond`.
pub fn pseudo_inverse(a: &CMatrix, rcond: f64) -> Result<CMatrix> {
    let dec = svd(a)?;
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let mut vs = dec.v.clone();
    for (j, &s) in dec.s.iter().enumerate() {
        let inv = if s > rcond * smax && s > 0.0 { 1.0 / s } else { 0.0 };
        for z in vs.col_mut(j) {
            *z *= inv;
        }
    }
    vs.mul_adjoint(&dec.u)
}

/// Cholesky factor `L` (lower) of a Hermitian positive definite matrix.
pub fn cholesky(a: &CMatrix) -> Result<CMatrix> {
    let n = a.rows;
    ensure!(a.cols == n, "cholesky of non-square {}x{}", a.rows, a.cols);
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(Error::Contract(format!(
                "matrix not positive definite at pivot {j} ({d:.3e})"
            )));
        }
        let d = d.sqrt();
        l[(j, j)] = C64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// `x^H A^{-1} x` for Hermitian positive definite `A`, via Cholesky.
pub fn hpd_quadratic_inverse(a: &CMatrix, x: &[C64]) -> Result<f64> {
    let l = cholesky(a)?;
    // forward solve L y = x; then x^H A^{-1} x = ||y||^2
    let n = l.rows;
    ensure!(x.len() == n, "vector length {} vs matrix {n}", x.len());
    let mut y = vec![ZERO; n];
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    Ok(norm_sqr(&y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, m: usize, n: usize) -> CMatrix {
        CMatrix::from_fn(m, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn reconstruct(d: &Svd) -> CMatrix {
        let mut us = d.u.clone();
        for (j, &s) in d.s.iter().enumerate() {
            for z in us.col_mut(j) {
                *z *= s;
            }
        }
        us.mul_adjoint(&d.v).unwrap()
    }

    #[test]
    fn spectral_norm_matches_svd() {
        let mut rng = crate::rng::named_rng(21, "linalg-test");
        for (m, n) in [(5, 3), (3, 7), (40, 12), (1, 1)] {
            let a = crate::rng::gaussian_matrix(&mut rng, m, n);
            let s = svd(&a).unwrap().s[0];
            assert!((spectral_norm_sqr(&a).unwrap() - s * s).abs() < 1e-9 * s * s);
        }
        assert_eq!(spectral_norm_sqr(&CMatrix::zeros(4, 2)).unwrap(), 0.0);
        let two = CMatrix::from_fn(3, 3, |i, j| if i == j { C64::new(2.0, 0.0) } else { ZERO });
        assert!((spectral_norm_sqr(&two).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn svd_reconstructs_tall_and_wide() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(m, n) in &[(6, 3), (3, 6), (1, 1), (5, 5), (40, 7), (7, 40)] {
            let a = random_matrix(&mut rng, m, n);
            let d = svd(&a).unwrap();
            assert!(reconstruct(&d).sub(&a).frobenius_norm() < 1e-12 * a.frobenius_norm().max(1.0));
            assert!(d.u.orthogonality_defect() < 1e-11);
            assert!(d.v.orthogonality_defect() < 1e-11);
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_rank_deficient_is_completed() {
        let col = vec![C64::new(1.0, 0.5), C64::new(-0.3, 0.2), C64::new(0.0, 1.0), ZERO];
        let a = CMatrix::from_fn(4, 3, |r, c| col[r] * (c as f64 + 1.0));
        let d = svd(&a).unwrap();
        assert!(d.rank_deficient);
        assert!(d.u.orthogonality_defect() < 1e-12);
        assert!(reconstruct(&d).sub(&a).frobenius_norm() < 1e-12);
    }

    #[test]
    fn polar_factor_of_semi_orthogonal_is_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = svd(&random_matrix(&mut rng, 6, 3)).unwrap().u;
        let (p, flag) = polar_factor(&q).unwrap();
        assert!(!flag);
        assert!(p.sub(&q).frobenius_norm() < 1e-10);
    }

    #[test]
    fn max_entry_phase_convention() {
        let mut u = CMatrix::from_rows(&[vec![C64::new(0.0, 0.1)], vec![C64::new(0.0, -2.0)]]);
        normalize_max_entry_phase(&mut u);
        assert!((u[(1, 0)] - C64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cholesky_quadratic_form() {
        let a = CMatrix::from_rows(&[
            vec![C64::new(4.0, 0.0), C64::new(1.0, 1.0)],
            vec![C64::new(1.0, -1.0), C64::new(3.0, 0.0)],
        ]);
        let x = [C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        // A^{-1} = 1/(12-2) [[3, -(1+i)], [-(1-i), 4]]
        let q = hpd_quadratic_inverse(&a, &x).unwrap();
        // x^H A^{-1} x = (3 + 4 + (1 - i) + (1 + i)) / 10
        let expect = 0.9;
        assert!((q - expect).abs() < 1e-14, "{q} vs {expect}");
    }

    #[test]
    fn pseudo_inverse_of_invertible() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(&mut rng, 4, 4);
        let p = pseudo_inverse(&a, 1e-12).unwrap();
        let i = a.matmul(&p).unwrap();
        assert!(i.sub(&CMatrix::identity(4)).frobenius_norm() < 1e-10);
    }
}
