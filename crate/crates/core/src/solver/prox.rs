use std::cmp::Ordering;

use crate::tensor::ComplexTensor3;

/// Proximal operator of the L0 ball: keeps the `k` largest-modulus entries.
///
/// Ranking is by `|x|^2` descending; among equal moduli the lower linear
/// index wins, so the result is fully deterministic.
pub fn prox_l0_topk(t: &ComplexTensor3, k: usize) -> ComplexTensor3 {
    let n = t.numel();
    if k >= n {
        return t.clone();
    }
    let mut out = ComplexTensor3::zeros(t.dims());
    if k == 0 {
        return out;
    }
    let data = t.data();
    let mut idx: Vec<usize> = (0..n).collect();
    let order = |&a: &usize, &b: &usize| -> Ordering {
        data[b]
            .norm_sqr()
            .total_cmp(&data[a].norm_sqr())
            .then(a.cmp(&b))
    };
    idx.select_nth_unstable_by(k - 1, order);
    let dst = out.data_mut();
    for &i in &idx[..k] {
        dst[i] = data[i];
    }
    out
}

/// Number of entries `prox_l0_topk` keeps for a sparsity fraction `s` of `n`
/// entries: `floor(s * n)`.
pub fn sparsity_budget(s: f64, n: usize) -> usize {
    ((s * n as f64).floor() as usize).min(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{C64, ZERO};

    fn zero_count(t: &ComplexTensor3) -> usize {
        t.data().iter().filter(|z| **z == ZERO).count()
    }

    fn real(v: &[f64]) -> ComplexTensor3 {
        ComplexTensor3::new([v.len(), 1, 1], v.iter().map(|&x| C64::new(x, 0.0)).collect()).unwrap()
    }

    #[test]
    fn keeps_top_two() {
        let t = real(&[3.0, 1.0, -4.0, 2.0]);
        assert_eq!(prox_l0_topk(&t, 2), real(&[3.0, 0.0, -4.0, 0.0]));
        assert_eq!(prox_l0_topk(&t, 4), t);
        assert_eq!(zero_count(&prox_l0_topk(&t, 0)), 4);
    }

    #[test]
    fn tie_keeps_lower_index() {
        let t = ComplexTensor3::new([2, 1, 1], vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]).unwrap();
        let p = prox_l0_topk(&t, 1);
        assert_eq!(p.data(), &[C64::new(1.0, 0.0), ZERO]);
    }

    #[test]
    fn budget_floors() {
        assert_eq!(sparsity_budget(0.5, 7), 3);
        assert_eq!(sparsity_budget(0.0, 7), 0);
        assert_eq!(sparsity_budget(1.0, 7), 7);
    }
}
