//! Uniform scalar quantizers.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_bits() -> u8 {
    16
}
fn default_target() -> f64 {
    0.01
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantizerSpec {
    /// Bits per real or imaginary component of stored coefficients.
    #[serde(default = "default_bits")]
    pub bits_per_component: u8,
    /// Largest bit width for Givens angles.
    #[serde(default = "default_bits")]
    pub angle_bits: u8,
    /// Per-factor relative error allowed by the angle coder.
    #[serde(default = "default_target")]
    pub rle_rel_err_target: f64,
}

impl Default for QuantizerSpec {
    fn default() -> Self {
        Self {
            bits_per_component: default_bits(),
            angle_bits: default_bits(),
            rle_rel_err_target: default_target(),
        }
    }
}

impl QuantizerSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, b) in [("bits_per_component", self.bits_per_component), ("angle_bits", self.angle_bits)] {
            if !(1..=32).contains(&b) {
                return Err(Error::Config(format!("{name} = {b} outside 1..=32")));
            }
        }
        if !(self.rle_rel_err_target.is_finite() && self.rle_rel_err_target >= 0.0) {
            return Err(Error::Config(format!(
                "rle_rel_err_target = {} must be nonnegative",
                self.rle_rel_err_target
            )));
        }
        Ok(())
    }
}

/// Mid-rise quantizer on `[-scale, scale]` with `2^bits` cells; the
/// reconstruction error is at most `scale / 2^bits`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Uniform {
    pub scale: f64,
    pub bits: u8,
}

impl Uniform {
    fn levels(&self) -> u64 {
        1u64 << self.bits
    }

    fn step(&self) -> f64 {
        2.0 * self.scale / self.levels() as f64
    }

    pub fn encode(&self, x: f64) -> u64 {
        if self.scale == 0.0 {
            return self.levels() / 2;
        }
        let q = ((x + self.scale) / self.step()).floor();
        q.clamp(0.0, (self.levels() - 1) as f64) as u64
    }

    pub fn decode(&self, q: u64) -> f64 {
        -self.scale + (q as f64 + 0.5) * self.step()
    }

    pub fn max_error(&self) -> f64 {
        self.scale / self.levels() as f64
    }
}

/// `eta` on `[0, pi/2]` with `2^bits - 1` steps, so both ends are exact.
pub fn quantize_eta(eta: f64, bits: u8) -> u64 {
    let top = ((1u64 << bits) - 1) as f64;
    (eta.clamp(0.0, FRAC_PI_2) / FRAC_PI_2 * top).round() as u64
}

pub fn dequantize_eta(q: u64, bits: u8) -> f64 {
    let top = ((1u64 << bits) - 1) as f64;
    q as f64 / top * FRAC_PI_2
}

/// `theta` on the circle in steps of `2 pi / 2^bits`.
pub fn quantize_theta(theta: f64, bits: u8) -> u64 {
    let levels = 1u64 << bits;
    let q = (theta.rem_euclid(TAU) / TAU * levels as f64).round() as u64;
    q % levels
}

pub fn dequantize_theta(q: u64, bits: u8) -> f64 {
    q as f64 * TAU / (1u64 << bits) as f64
}
