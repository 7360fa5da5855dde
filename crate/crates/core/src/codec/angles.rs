//! Coding of Givens angle sequences.
//!
//! Stream layout (all fields LSB first):
//!
//! ```text
//! bits - 1        5 bits
//! mode            1 bit   (0 = raw, 1 = run-length)
//! tau exponent    6 bits  (e + 31, only in run-length mode)
//! payload
//! ```
//!
//! Raw payload: every pair as `eta` then `theta`, `bits` each. Run-length
//! payload: for each surviving pair (`eta >= 2^e`) the gamma code of
//! `1 + zeroed pairs before it`, then its `eta` and `theta`; a final gamma
//! code covers any zeroed tail. Zeroed pairs decode to `eta = theta = 0`.
//!
//! The encoder tries every width from 2 up to `angle_bits` and, for each,
//! the largest threshold whose trial reconstruction stays within
//! `rle_rel_err_target` of the exact factor, and keeps the shortest stream.

use crate::error::{Error, Result};
use crate::givens::{givens_reconstruct, rotation_count, GivensParams};
use crate::linalg::CMatrix;

use super::bits::{gamma_len, BitReader, BitWriter};
use super::quant::{dequantize_eta, dequantize_theta, quantize_eta, quantize_theta, QuantizerSpec};

const TAU_EXP_MAX: i32 = 1;
const TAU_EXP_MIN: i32 = -24;
const HEADER_BITS: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct AngleStream {
    pub bytes: Vec<u8>,
    pub bit_len: usize,
    pub bits: u8,
    /// Threshold exponent when run-length coded.
    pub tau_exp: Option<i32>,
    /// Relative error of the decoded factor against the exact one.
    pub rel_err: f64,
}

#[derive(Clone, Debug)]
struct Plan {
    bits: u8,
    tau_exp: Option<i32>,
    keep: Vec<bool>,
    size: usize,
    rel_err: f64,
}

fn plan_size(bits: u8, keep: &[bool], rle: bool) -> usize {
    let pair = 2 * bits as usize;
    if !rle {
        return HEADER_BITS + pair * keep.len();
    }
    let mut size = HEADER_BITS + 6;
    let mut run = 0u64;
    for &k in keep {
        if k {
            size += gamma_len(run + 1) + pair;
            run = 0;
        } else {
            run += 1;
        }
    }
    if run > 0 {
        size += gamma_len(run + 1);
    }
    size
}

fn decoded_params(p: &GivensParams, bits: u8, keep: &[bool]) -> GivensParams {
    let mut out = GivensParams {
        n: p.n,
        r: p.r,
        etas: vec![0.0; p.etas.len()],
        thetas: vec![0.0; p.thetas.len()],
        phase_absorbed: p.phase_absorbed,
    };
    for (k, &kept) in keep.iter().enumerate() {
        if kept {
            out.etas[k] = dequantize_eta(quantize_eta(p.etas[k], bits), bits);
            out.thetas[k] = dequantize_theta(quantize_theta(p.thetas[k], bits), bits);
        }
    }
    out
}

fn trial_error(p: &GivensParams, exact: &CMatrix, bits: u8, keep: &[bool]) -> Result<f64> {
    let u = givens_reconstruct(&decoded_params(p, bits, keep))?;
    let norm = exact.frobenius_norm();
    let diff = u.sub(exact).frobenius_norm();
    Ok(if norm == 0.0 { diff } else { diff / norm })
}

/// Encodes `p` under the error target of `q`.
pub fn encode_angles(p: &GivensParams, q: &QuantizerSpec) -> Result<AngleStream> {
    q.validate()?;
    p.validate()?;
    let exact = givens_reconstruct(p)?;
    let target = q.rle_rel_err_target;
    let count = p.etas.len();
    let all = vec![true; count];
    let mut best: Option<Plan> = None;
    let consider = |best: &mut Option<Plan>, cand: Plan| {
        let better = match best {
            None => true,
            Some(b) => cand.size < b.size || (cand.size == b.size && cand.bits > b.bits),
        };
        if better {
            *best = Some(cand);
        }
    };

    for bits in q.angle_bits.min(2)..=q.angle_bits {
        let raw_err = trial_error(p, &exact, bits, &all)?;
        if raw_err > target {
            continue;
        }
        consider(
            &mut best,
            Plan {
                bits,
                tau_exp: None,
                keep: all.clone(),
                size: plan_size(bits, &all, false),
                rel_err: raw_err,
            },
        );
        let mut last_zeroed = usize::MAX;
        for e in (TAU_EXP_MIN..=TAU_EXP_MAX).rev() {
            let tau = 2f64.powi(e);
            let keep: Vec<bool> = p.etas.iter().map(|&x| x >= tau).collect();
            let zeroed = keep.iter().filter(|k| !**k).count();
            if zeroed == 0 {
                break;
            }
            if zeroed == last_zeroed {
                continue;
            }
            last_zeroed = zeroed;
            let err = trial_error(p, &exact, bits, &keep)?;
            if err <= target {
                let size = plan_size(bits, &keep, true);
                consider(
                    &mut best,
                    Plan {
                        bits,
                        tau_exp: Some(e),
                        keep,
                        size,
                        rel_err: err,
                    },
                );
                break;
            }
        }
    }

    let plan = match best {
        Some(p) => p,
        None => {
            let bits = q.angle_bits;
            Plan {
                bits,
                tau_exp: None,
                keep: all.clone(),
                size: plan_size(bits, &all, false),
                rel_err: trial_error(p, &exact, bits, &all)?,
            }
        }
    };

    let mut w = BitWriter::new();
    let b = plan.bits as u32;
    w.write_bits(plan.bits as u64 - 1, 5);
    w.write_bit(plan.tau_exp.is_some());
    match plan.tau_exp {
        None => {
            for k in 0..count {
                w.write_bits(quantize_eta(p.etas[k], plan.bits), b);
                w.write_bits(quantize_theta(p.thetas[k], plan.bits), b);
            }
        }
        Some(e) => {
            w.write_bits((e + 31) as u64, 6);
            let mut run = 0u64;
            for k in 0..count {
                if plan.keep[k] {
                    w.write_gamma(run + 1);
                    w.write_bits(quantize_eta(p.etas[k], plan.bits), b);
                    w.write_bits(quantize_theta(p.thetas[k], plan.bits), b);
                    run = 0;
                } else {
                    run += 1;
                }
            }
            if run > 0 {
                w.write_gamma(run + 1);
            }
        }
    }
    debug_assert_eq!(w.bit_len(), plan.size);
    let (bytes, bit_len) = w.finish();
    Ok(AngleStream {
        bytes,
        bit_len,
        bits: plan.bits,
        tau_exp: plan.tau_exp,
        rel_err: plan.rel_err,
    })
}

/// Decodes an angle stream for an `n x r` factor.
pub fn decode_angles(bytes: &[u8], bit_len: usize, n: usize, r: usize) -> Result<GivensParams> {
    if r > n {
        return Err(Error::Malformed(format!("factor shape {n}x{r}")));
    }
    let count = rotation_count(n, r);
    let mut rd = BitReader::new(bytes, bit_len)?;
    let bits = rd.read_bits(5)? as u8 + 1;
    let rle = rd.read_bit()?;
    let mut etas = vec![0.0; count];
    let mut thetas = vec![0.0; count];
    let b = bits as u32;
    if rle {
        let _tau = rd.read_bits(6)?;
        let mut pos = 0usize;
        while pos < count {
            let run = rd.read_gamma()? as usize - 1;
            pos += run;
            if pos == count {
                break;
            }
            if pos > count {
                return Err(Error::Malformed("angle run exceeds rotation count".into()));
            }
            etas[pos] = dequantize_eta(rd.read_bits(b)?, bits);
            thetas[pos] = dequantize_theta(rd.read_bits(b)?, bits);
            pos += 1;
        }
    } else {
        for k in 0..count {
            etas[k] = dequantize_eta(rd.read_bits(b)?, bits);
            thetas[k] = dequantize_theta(rd.read_bits(b)?, bits);
        }
    }
    if rd.remaining() != 0 {
        return Err(Error::Malformed(format!("{} unread bits in angle stream", rd.remaining())));
    }
    Ok(GivensParams {
        n,
        r,
        etas,
        thetas,
        phase_absorbed: true,
    })
}
