//! Tucker reconstruction and truncated HOSVD.

use crate::error::{ensure, Error, Result};
use crate::linalg::{leading_left_singular_vectors, FactorMatrix};
use crate::tensor::ComplexTensor3;

/// A dense Tucker model `[[core; U1, U2, U3]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tucker {
    pub core: ComplexTensor3,
    pub factors: [FactorMatrix; 3],
}

impl Tucker {
    pub fn reconstruct(&self) -> Result<ComplexTensor3> {
        tucker_reconstruct(&self.core, &self.factors)
    }

    pub fn ranks(&self) -> [usize; 3] {
        self.core.dims()
    }
}

/// `g x_1 U1 x_2 U2 x_3 U3` with `U_i` of shape `n_i x r_i`.
pub fn tucker_reconstruct(g: &ComplexTensor3, u: &[FactorMatrix; 3]) -> Result<ComplexTensor3> {
    for (i, ui) in u.iter().enumerate() {
        ensure!(
            ui.cols() == g.dims()[i],
            "factor {} has {} columns, core mode size {}",
            i + 1,
            ui.cols(),
            g.dims()[i]
        );
    }
    g.expand(&u[0], 1)?.expand(&u[1], 2)?.expand(&u[2], 3)
}

/// `t x_1 U1^H x_2 U2^H x_3 U3^H`.
pub fn project_core(t: &ComplexTensor3, u: &[FactorMatrix; 3]) -> Result<ComplexTensor3> {
    t.project(&u[0], 1)?.project(&u[1], 2)?.project(&u[2], 3)
}

/// Truncated higher-order SVD. Each factor holds the leading `r_i` left
/// singular vectors of the mode-`i` unfolding under the max-entry phase
/// convention.
pub fn hosvd(t: &ComplexTensor3, ranks: [usize; 3]) -> Result<Tucker> {
    let dims = t.dims();
    for i in 0..3 {
        ensure!(
            ranks[i] >= 1 && ranks[i] <= dims[i],
            "rank {} = {} outside 1..={}",
            i + 1,
            ranks[i],
            dims[i]
        );
    }
    let mut factors = Vec::with_capacity(3);
    for mode in 1..=3 {
        let x = t.unfold(mode)?;
        let u = leading_left_singular_vectors(&x, ranks[mode - 1]).map_err(|e| match e {
            Error::SvdNonConvergence { sweeps, .. } => Error::SvdNonConvergence {
                mode: Some(mode),
                sweeps,
            },
            other => other,
        })?;
        factors.push(u);
    }
    let factors: [FactorMatrix; 3] = factors.try_into().expect("three factors");
    let core = project_core(t, &factors)?;
    Ok(Tucker { core, factors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CMatrix, C64, ZERO};
    use crate::tensor::relative_error;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rc(rng: &mut impl Rng) -> C64 {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    // Full summation over all core indices.
    fn tucker_oracle(g: &ComplexTensor3, u: &[CMatrix; 3]) -> ComplexTensor3 {
        let r = g.dims();
        ComplexTensor3::from_fn([u[0].rows(), u[1].rows(), u[2].rows()], |i, j, k| {
            let mut s = ZERO;
            for a in 0..r[0] {
                for b in 0..r[1] {
                    for c in 0..r[2] {
                        s += g.get(a, b, c) * u[0][(i, a)] * u[1][(j, b)] * u[2][(k, c)];
                    }
                }
            }
            s
        })
    }

    #[test]
    fn reconstruct_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let g = ComplexTensor3::from_fn([2, 3, 2], |_, _, _| rc(&mut rng));
        let u = [
            CMatrix::from_fn(3, 2, |_, _| rc(&mut rng)),
            CMatrix::from_fn(4, 3, |_, _| rc(&mut rng)),
            CMatrix::from_fn(5, 2, |_, _| rc(&mut rng)),
        ];
        let fast = tucker_reconstruct(&g, &u).unwrap();
        assert!(fast.dist_sqr(&tucker_oracle(&g, &u)).sqrt() < 1e-12);
    }

    #[test]
    fn trivial_reconstructions() {
        let g = ComplexTensor3::new([1, 1, 1], vec![C64::new(1.0, 0.0)]).unwrap();
        let cols = [
            vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)],
            vec![C64::new(1.0, 0.0)],
            vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        ];
        let u = cols
            .clone()
            .map(|c| CMatrix::from_col_major(c.len(), 1, c).unwrap());
        let t = tucker_reconstruct(&g, &u).unwrap();
        assert_eq!(t.get(1, 0, 0), cols[0][1] * cols[1][0] * cols[2][0]);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = ComplexTensor3::from_fn([2, 3, 4], |_, _, _| rc(&mut rng));
        let eye = [CMatrix::identity(2), CMatrix::identity(3), CMatrix::identity(4)];
        assert_eq!(tucker_reconstruct(&g, &eye).unwrap(), g);
    }

    #[test]
    fn hosvd_full_rank_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let t = ComplexTensor3::from_fn([2, 5, 6], |_, _, _| rc(&mut rng));
        let d = hosvd(&t, t.dims()).unwrap();
        for u in &d.factors {
            assert!(u.orthogonality_defect() < 1e-10);
        }
        assert!(relative_error(&d.reconstruct().unwrap(), &t).unwrap() < 1e-10);
    }

    #[test]
    fn hosvd_recovers_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a: Vec<C64> = (0..3).map(|_| rc(&mut rng)).collect();
        let b: Vec<C64> = (0..4).map(|_| rc(&mut rng)).collect();
        let c: Vec<C64> = (0..5).map(|_| rc(&mut rng)).collect();
        let t = ComplexTensor3::from_fn([3, 4, 5], |i, j, k| a[i] * b[j] * c[k]);
        let d = hosvd(&t, [1, 1, 1]).unwrap();
        assert!(relative_error(&d.reconstruct().unwrap(), &t).unwrap() < 1e-12);
    }

    #[test]
    fn hosvd_error_monotone_in_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let t = ComplexTensor3::from_fn([2, 16, 24], |_, _, _| rc(&mut rng));
        for mode in 0..3 {
            let mut prev = f64::INFINITY;
            for r in 1..=t.dims()[mode] {
                let mut ranks = [2, 6, 8];
                ranks[mode] = r;
                let e = relative_error(&hosvd(&t, ranks).unwrap().reconstruct().unwrap(), &t).unwrap();
                assert!(e <= prev + 1e-12, "mode {} rank {r}: {e} > {prev}", mode + 1);
                prev = e;
            }
        }
    }

    #[test]
    fn hosvd_rejects_bad_ranks() {
        let t = ComplexTensor3::zeros([2, 3, 4]);
        assert!(hosvd(&t, [3, 1, 1]).is_err());
        assert!(hosvd(&t, [0, 1, 1]).is_err());
    }
}
