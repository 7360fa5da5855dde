//! Dense third-order complex tensors.
//!
//! Storage is mode-1 fastest: entry `(i1, i2, i3)` lives at
//! `i1 + n1 * (i2 + n2 * i3)`. The mode-`m` unfolding has `n_m` rows and its
//! columns enumerate the remaining two modes in cyclic order starting after
//! `m` (mode 1: (2, 3), mode 2: (3, 1), mode 3: (1, 2)), the first of them
//! varying fastest. Modes are 1-based in the public API.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{ensure, Error, Result};
use crate::linalg::{dot_conj, CMatrix, C64, ZERO};

pub const CT3_MAGIC: &[u8; 4] = b"CT3\0";
pub const CT3_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexTensor3 {
    dims: [usize; 3],
    data: Vec<C64>,
}

fn check_mode(mode: usize) -> Result<usize> {
    ensure!((1..=3).contains(&mode), "mode {mode} out of range 1..=3");
    Ok(mode - 1)
}

impl ComplexTensor3 {
    pub fn new(dims: [usize; 3], data: Vec<C64>) -> Result<Self> {
        ensure!(
            data.len() == dims.iter().product::<usize>(),
            "tensor data length {} != {:?}",
            data.len(),
            dims
        );
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: [usize; 3]) -> Self {
        Self {
            dims,
            data: vec![ZERO; dims.iter().product()],
        }
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dims.iter().product());
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    data.push(f(i, j, k));
                }
            }
        }
        Self { dims, data }
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn numel(&self) -> usize {
        self.data.len()
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
    pub fn linear_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.data[self.linear_index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: C64) {
        let idx = self.linear_index(i, j, k);
        self.data[idx] = v;
    }

    /// Mode-`mode` unfolding, shape `(n_mode, numel / n_mode)`.
    pub fn unfold(&self, mode: usize) -> Result<CMatrix> {
        let m = check_mode(mode)?;
        let a = (m + 1) % 3;
        let b = (m + 2) % 3;
        let d = self.dims;
        let cols = d[a] * d[b];
        let mut out = CMatrix::zeros(d[m], cols);
        let mut idx = [0usize; 3];
        for ib in 0..d[b] {
            idx[b] = ib;
            for ia in 0..d[a] {
                idx[a] = ia;
                let col = out.col_mut(ia + d[a] * ib);
                for (im, dst) in col.iter_mut().enumerate() {
                    idx[m] = im;
                    *dst = self.data[idx[0] + d[0] * (idx[1] + d[1] * idx[2])];
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`unfold`](Self::unfold) for a tensor of shape `dims`.
    pub fn fold(mat: &CMatrix, mode: usize, dims: [usize; 3]) -> Result<Self> {
        let m = check_mode(mode)?;
        let a = (m + 1) % 3;
        let b = (m + 2) % 3;
        ensure!(
            mat.rows() == dims[m] && mat.cols() == dims[a] * dims[b],
            "fold: {}x{} matrix does not match dims {:?} in mode {mode}",
            mat.rows(),
            mat.cols(),
            dims
        );
        let mut out = Self::zeros(dims);
        let mut idx = [0usize; 3];
        for ib in 0..dims[b] {
            idx[b] = ib;
            for ia in 0..dims[a] {
                idx[a] = ia;
                let col = mat.col(ia + dims[a] * ib);
                for (im, &v) in col.iter().enumerate() {
                    idx[m] = im;
                    out.data[idx[0] + dims[0] * (idx[1] + dims[1] * idx[2])] = v;
                }
            }
        }
        Ok(out)
    }

    fn with_mode_dim(&self, m: usize, n: usize) -> [usize; 3] {
        let mut d = self.dims;
        d[m] = n;
        d
    }

    /// Mode product `(t x_mode M)[.., p, ..] = sum_i t[.., i, ..] M[i, p]`.
    /// `m.rows()` must equal the size of `mode`; the result has `m.cols()`
    /// entries along that mode. No conjugation is applied.
    pub fn mode_product(&self, m: &CMatrix, mode: usize) -> Result<Self> {
        let mi = check_mode(mode)?;
        ensure!(
            m.rows() == self.dims[mi],
            "mode_product: matrix has {} rows, mode {mode} has size {}",
            m.rows(),
            self.dims[mi]
        );
        let x = self.unfold(mode)?;
        let y = m.transpose().matmul(&x)?;
        Self::fold(&y, mode, self.with_mode_dim(mi, m.cols()))
    }

    /// Adjoint contraction `t x_mode U^H`: maps size `u.rows()` to `u.cols()`.
    pub fn project(&self, u: &CMatrix, mode: usize) -> Result<Self> {
        let mi = check_mode(mode)?;
        ensure!(
            u.rows() == self.dims[mi],
            "project: factor has {} rows, mode {mode} has size {}",
            u.rows(),
            self.dims[mi]
        );
        let x = self.unfold(mode)?;
        let y = u.adjoint_mul(&x)?;
        Self::fold(&y, mode, self.with_mode_dim(mi, u.cols()))
    }

    /// Expansion `t x_mode U`: maps size `u.cols()` to `u.rows()`; the
    /// direction used by Tucker reconstruction.
    pub fn expand(&self, u: &CMatrix, mode: usize) -> Result<Self> {
        let mi = check_mode(mode)?;
        ensure!(
            u.cols() == self.dims[mi],
            "expand: factor has {} cols, mode {mode} has size {}",
            u.cols(),
            self.dims[mi]
        );
        let x = self.unfold(mode)?;
        let y = u.matmul(&x)?;
        Self::fold(&y, mode, self.with_mode_dim(mi, u.rows()))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self, other> = sum conj(self) other`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dims, other.dims);
        dot_conj(&self.data, &other.data)
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|z| **z != ZERO).count()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        ensure!(
            self.dims == other.dims,
            "shape mismatch {:?} vs {:?}",
            self.dims,
            other.dims
        );
        Ok(Self {
            dims: self.dims,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Squared Frobenius distance without allocating.
    pub fn dist_sqr(&self, other: &Self) -> f64 {
        assert_eq!(self.dims, other.dims);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum()
    }

    pub fn to_ct3_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(20 + 16 * self.numel());
        out.extend_from_slice(CT3_MAGIC);
        out.extend_from_slice(&CT3_VERSION.to_le_bytes());
        for d in self.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for z in &self.data {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }

    pub fn from_ct3_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || &bytes[..4] != CT3_MAGIC {
            return Err(Error::BadMagic { expected: "CT3\\0" });
        }
        if bytes.len() < 20 {
            return Err(Error::Truncated("ct3 header".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let version = u32_at(4);
        if version != CT3_VERSION {
            return Err(Error::UnsupportedVersion {
                found: version,
                supported: CT3_VERSION,
            });
        }
        let dims = [u32_at(8) as usize, u32_at(12) as usize, u32_at(16) as usize];
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Malformed(format!("ct3 dims {dims:?} overflow")))?;
        let body = &bytes[20..];
        if body.len() < 16 * n {
            return Err(Error::Truncated(format!(
                "ct3 body has {} bytes, need {}",
                body.len(),
                16 * n
            )));
        }
        if body.len() > 16 * n {
            return Err(Error::Malformed("trailing bytes after ct3 body".into()));
        }
        let data: Vec<C64> = body
            .chunks_exact(16)
            .map(|c| {
                C64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        let t = Self::new(dims, data)?;
        if !t.is_finite() {
            return Err(Error::NonFinite("ct3 payload"));
        }
        Ok(t)
    }

    pub fn read_ct3(path: impl AsRef<Path>) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        Self::from_ct3_bytes(&buf)
    }

    pub fn write_ct3(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_ct3_bytes())?;
        Ok(())
    }
}

/// `||a - b||_F / ||b||_F`.
pub fn relative_error(a: &ComplexTensor3, b: &ComplexTensor3) -> Result<f64> {
    ensure!(
        a.dims == b.dims,
        "relative_error shape mismatch {:?} vs {:?}",
        a.dims,
        b.dims
    );
    let nb = b.norm_sqr();
    if nb == 0.0 {
        return Err(Error::DegenerateReference);
    }
    Ok((a.dist_sqr(b) / nb).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rc(rng: &mut impl Rng) -> C64 {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    fn random_tensor(rng: &mut impl Rng, dims: [usize; 3]) -> ComplexTensor3 {
        ComplexTensor3::from_fn(dims, |_, _, _| rc(rng))
    }

    fn random_matrix(rng: &mut impl Rng, m: usize, n: usize) -> CMatrix {
        CMatrix::from_fn(m, n, |_, _| rc(rng))
    }

    // Elementwise sum oracle for t x_mode M with the contraction over M's rows.
    fn mode_product_oracle(t: &ComplexTensor3, m: &CMatrix, mode: usize) -> ComplexTensor3 {
        let mut d = t.dims();
        d[mode - 1] = m.cols();
        ComplexTensor3::from_fn(d, |a, b, c| {
            let out = [a, b, c];
            let mut s = ZERO;
            for i in 0..m.rows() {
                let mut idx = out;
                idx[mode - 1] = i;
                s += t.get(idx[0], idx[1], idx[2]) * m[(i, out[mode - 1])];
            }
            s
        })
    }

    #[test]
    fn mode_product_identity_and_scalar() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_tensor(&mut rng, [2, 3, 4]);
        assert_eq!(t.mode_product(&CMatrix::identity(3), 2).unwrap(), t);
        let s = ComplexTensor3::new([1, 1, 1], vec![C64::new(2.0, 1.0)]).unwrap();
        let a = CMatrix::from_rows(&[vec![C64::new(0.0, 3.0)]]);
        let r = s.mode_product(&a, 1).unwrap();
        assert_eq!(r.data()[0], C64::new(2.0, 1.0) * C64::new(0.0, 3.0));
    }

    #[test]
    fn mode_product_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_tensor(&mut rng, [2, 3, 4]);
        for mode in 1..=3 {
            let m = random_matrix(&mut rng, t.dims()[mode - 1], 2);
            let fast = t.mode_product(&m, mode).unwrap();
            let slow = mode_product_oracle(&t, &m, mode);
            assert!(fast.dist_sqr(&slow).sqrt() < 1e-12);
            // adjoint contraction is the same product against conj(U)
            let p = t.project(&m, mode).unwrap();
            let slow = mode_product_oracle(&t, &m.conj(), mode);
            assert!(p.dist_sqr(&slow).sqrt() < 1e-12);
            let e = p.expand(&m, mode).unwrap();
            let slow = mode_product_oracle(&p, &m.transpose(), mode);
            assert!(e.dist_sqr(&slow).sqrt() < 1e-12);
        }
    }

    #[test]
    fn mode_product_dimension_mismatch() {
        let t = ComplexTensor3::zeros([2, 3, 4]);
        assert!(matches!(
            t.mode_product(&CMatrix::zeros(2, 2), 2),
            Err(Error::Contract(_))
        ));
        assert!(t.unfold(4).is_err());
    }

    #[test]
    fn distinct_modes_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random_tensor(&mut rng, [3, 4, 5]);
        let a = random_matrix(&mut rng, 3, 2);
        let b = random_matrix(&mut rng, 4, 6);
        let x = t.mode_product(&a, 1).unwrap().mode_product(&b, 2).unwrap();
        let y = t.mode_product(&b, 2).unwrap().mode_product(&a, 1).unwrap();
        assert!(x.dist_sqr(&y).sqrt() < 1e-12);
    }

    #[test]
    fn unfold_layout_and_round_trip() {
        let t = ComplexTensor3::from_fn([2, 2, 2], |i, j, k| C64::new((i + 2 * j + 4 * k) as f64, 0.0));
        let u = t.unfold(1).unwrap();
        assert_eq!(u.shape(), (2, 4));
        // column index of (j, k) is j + 2k
        assert_eq!(u[(1, 2)], t.get(1, 0, 1));
        let u2 = t.unfold(2).unwrap();
        // mode 2 columns enumerate (k, i): k + 2i
        assert_eq!(u2[(1, 1 + 2 * 0)], t.get(0, 1, 1));
        let u3 = t.unfold(3).unwrap();
        // mode 3 columns enumerate (i, j): i + 2j
        assert_eq!(u3[(0, 1 + 2)], t.get(1, 1, 0));
        for mode in 1..=3 {
            let f = ComplexTensor3::fold(&t.unfold(mode).unwrap(), mode, t.dims()).unwrap();
            assert_eq!(f, t);
        }
        let one = ComplexTensor3::new([1, 1, 1], vec![C64::new(5.0, -1.0)]).unwrap();
        assert_eq!(one.unfold(2).unwrap()[(0, 0)], C64::new(5.0, -1.0));
    }

    #[test]
    fn unfold_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = random_tensor(&mut rng, [3, 4, 5]);
        for mode in 1..=3 {
            let u = t.unfold(mode).unwrap();
            assert!((u.frobenius_norm() - t.frobenius_norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn relative_error_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = random_tensor(&mut rng, [2, 3, 2]);
        assert_eq!(relative_error(&b, &b).unwrap(), 0.0);
        let z = ComplexTensor3::zeros(b.dims());
        assert!((relative_error(&z, &b).unwrap() - 1.0).abs() < 1e-15);
        let a = b.scale(C64::new(1.01, 0.0));
        assert!((relative_error(&a, &b).unwrap() - 0.01).abs() < 1e-12);
        assert!(matches!(relative_error(&b, &z), Err(Error::DegenerateReference)));
    }

    #[test]
    fn ct3_round_trip_and_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t = random_tensor(&mut rng, [2, 3, 4]);
        let bytes = t.to_ct3_bytes();
        assert_eq!(ComplexTensor3::from_ct3_bytes(&bytes).unwrap(), t);
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(ComplexTensor3::from_ct3_bytes(&bad), Err(Error::BadMagic { .. })));
        assert!(matches!(
            ComplexTensor3::from_ct3_bytes(&bytes[..bytes.len() - 1]),
            Err(Error::Truncated(_))
        ));
        let mut v2 = bytes;
        v2[4] = 2;
        assert!(matches!(
            ComplexTensor3::from_ct3_bytes(&v2),
            Err(Error::UnsupportedVersion { found: 2, .. })
        ));
    }
}
