//! Quantized coefficient payloads: a position mask plus values for sparse
//! tensors, values only for dense blocks.

use crate::error::{ensure, Error, Result};
use crate::linalg::{C64, ZERO};
use crate::tensor::ComplexTensor3;

use super::bits::{BitReader, BitWriter};
use super::quant::Uniform;

/// Complex values quantized per component against one shared scale
/// (the largest absolute component).
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedValues {
    pub scale: f64,
    pub bits: u8,
    pub codes: Vec<(u64, u64)>,
}

impl QuantizedValues {
    pub fn encode(values: &[C64], bits: u8) -> Self {
        let scale = values.iter().fold(0.0f64, |m, z| m.max(z.re.abs()).max(z.im.abs()));
        let q = Uniform { scale, bits };
        Self {
            scale,
            bits,
            codes: values.iter().map(|z| (q.encode(z.re), q.encode(z.im))).collect(),
        }
    }

    pub fn decode(&self) -> Vec<C64> {
        let q = Uniform {
            scale: self.scale,
            bits: self.bits,
        };
        self.codes
            .iter()
            .map(|&(a, b)| C64::new(q.decode(a), q.decode(b)))
            .collect()
    }

    /// Largest per-component reconstruction error.
    pub fn max_error(&self) -> f64 {
        Uniform {
            scale: self.scale,
            bits: self.bits,
        }
        .max_error()
    }

    /// The scale is only stored when there is at least one value.
    pub fn bit_cost(&self) -> usize {
        if self.codes.is_empty() {
            0
        } else {
            64 + 2 * self.bits as usize * self.codes.len()
        }
    }

    pub fn write(&self, w: &mut BitWriter) {
        if self.codes.is_empty() {
            return;
        }
        w.write_f64(self.scale);
        for &(a, b) in &self.codes {
            w.write_bits(a, self.bits as u32);
            w.write_bits(b, self.bits as u32);
        }
    }

    pub fn read(r: &mut BitReader<'_>, count: usize, bits: u8) -> Result<Self> {
        if count == 0 {
            return Ok(Self {
                scale: 0.0,
                bits,
                codes: Vec::new(),
            });
        }
        let scale = r.read_f64()?;
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::Malformed(format!("invalid value scale {scale}")));
        }
        let mut codes = Vec::with_capacity(count);
        for _ in 0..count {
            let a = r.read_bits(bits as u32)?;
            let b = r.read_bits(bits as u32)?;
            codes.push((a, b));
        }
        Ok(Self { scale, bits, codes })
    }
}

/// Mask over all entries in storage order, then the nonzero values.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePayload {
    pub dims: [usize; 3],
    pub mask: Vec<bool>,
    pub values: QuantizedValues,
}

/// Splits `t` into a position mask and its quantized nonzero entries.
pub fn encode_sparse(t: &ComplexTensor3, bits: u8) -> SparsePayload {
    let mask: Vec<bool> = t.data().iter().map(|z| *z != ZERO).collect();
    let nz: Vec<C64> = t.data().iter().copied().filter(|z| *z != ZERO).collect();
    SparsePayload {
        dims: t.dims(),
        mask,
        values: QuantizedValues::encode(&nz, bits),
    }
}

impl SparsePayload {
    pub fn nnz(&self) -> usize {
        self.values.codes.len()
    }

    pub fn decode(&self) -> Result<ComplexTensor3> {
        let vals = self.values.decode();
        ensure!(
            self.mask.iter().filter(|b| **b).count() == vals.len(),
            "mask popcount does not match value count"
        );
        let mut out = ComplexTensor3::zeros(self.dims);
        let mut it = vals.into_iter();
        for (dst, &m) in out.data_mut().iter_mut().zip(&self.mask) {
            if m {
                *dst = it.next().expect("popcount checked");
            }
        }
        Ok(out)
    }

    /// `prod dims` mask bits plus value bits.
    pub fn bit_cost(&self) -> usize {
        self.mask.len() + self.values.bit_cost()
    }

    pub fn write(&self, w: &mut BitWriter) {
        for &m in &self.mask {
            w.write_bit(m);
        }
        self.values.write(w);
    }

    pub fn read(r: &mut BitReader<'_>, dims: [usize; 3], bits: u8) -> Result<Self> {
        let n: usize = dims.iter().product();
        let mut mask = Vec::with_capacity(n);
        for _ in 0..n {
            mask.push(r.read_bit()?);
        }
        let nnz = mask.iter().filter(|b| **b).count();
        let values = QuantizedValues::read(r, nnz, bits)?;
        Ok(Self { dims, mask, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_normal, named_rng};
    use rand::Rng;

    fn round_trip(p: &SparsePayload) -> SparsePayload {
        let mut w = BitWriter::new();
        p.write(&mut w);
        assert_eq!(w.bit_len(), p.bit_cost());
        let (bytes, len) = w.finish();
        let mut r = BitReader::new(&bytes, len).unwrap();
        SparsePayload::read(&mut r, p.dims, p.values.bits).unwrap()
    }

    #[test]
    fn zero_tensor_costs_only_the_mask() {
        let t = ComplexTensor3::zeros([2, 3, 4]);
        let p = encode_sparse(&t, 16);
        assert_eq!(p.nnz(), 0);
        assert!(p.mask.iter().all(|m| !m));
        assert_eq!(p.bit_cost(), 24);
        assert_eq!(round_trip(&p).decode().unwrap(), t);
    }

    #[test]
    fn single_entry() {
        let mut t = ComplexTensor3::zeros([2, 2, 2]);
        t.data_mut()[0] = C64::new(1.0, 0.0);
        let p = encode_sparse(&t, 16);
        assert!(p.mask[0]);
        let d = round_trip(&p).decode().unwrap();
        assert!((d.data()[0] - C64::new(1.0, 0.0)).norm() <= 2f64.powi(-16) * 2f64.sqrt());
        assert!(d.data()[1..].iter().all(|z| *z == ZERO));
    }

    #[test]
    fn random_sparse_error_bound() {
        let mut rng = named_rng(1, "sparse-test");
        let t = ComplexTensor3::from_fn([4, 8, 8], |_, _, _| {
            if rng.gen_bool(0.1) {
                complex_normal(&mut rng)
            } else {
                ZERO
            }
        });
        let p = encode_sparse(&t, 16);
        let d = round_trip(&p).decode().unwrap();
        assert_eq!(d.nnz(), t.nnz());
        let bound = p.values.max_error() + p.values.scale * 1e-14;
        for (a, b) in d.data().iter().zip(t.data()) {
            assert!((a.re - b.re).abs() <= bound && (a.im - b.im).abs() <= bound, "{a} {b} {bound}");
        }
    }
}
