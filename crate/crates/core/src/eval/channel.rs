//! Synthetic downlink channels.
//!
//! `iid`: unit-variance complex Gaussian entries.
//!
//! `geometric`: per user, `paths` clusters of `subpaths` plane waves over
//! half-wavelength uniform linear arrays at both ends. Cluster `p` has a
//! departure angle uniform in +-60 degrees, an arrival angle uniform in
//! +-90 degrees, subpath offsets uniform within +-`angle_spread_deg`, and a
//! delay `tau_p` uniform in `[0, delay_spread)` measured in inverse
//! bandwidths, and each subpath adds a delay uniform in
//! `[0, cluster_delay_spread)`, so resource element `f` of `F = J *
//! res_per_rb` sees the phase `exp(-2 pi i tau f / F)`. Each user is scaled to mean `||H||_F^2 =
//! N_u N_t` per resource element.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::rng::{complex_normal, named_rng};
use crate::tensor::ComplexTensor3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelModel {
    Iid,
    #[default]
    Geometric,
}

fn default_snr() -> f64 {
    20.0
}
fn default_paths() -> usize {
    12
}
fn default_subpaths() -> usize {
    20
}
fn default_spread() -> f64 {
    12.0
}
fn default_delay() -> f64 {
    12.0
}
fn default_cluster_delay() -> f64 {
    2.0
}
fn default_res() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub users: usize,
    pub rbs: usize,
    pub nt: usize,
    pub nu: usize,
    pub streams: usize,
    #[serde(default = "default_snr")]
    pub snr_db: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub model: ChannelModel,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_subpaths")]
    pub subpaths: usize,
    #[serde(default = "default_spread")]
    pub angle_spread_deg: f64,
    #[serde(default = "default_delay")]
    pub delay_spread: f64,
    /// Extra per-subpath delay, uniform in `[0, cluster_delay_spread)`.
    #[serde(default = "default_cluster_delay")]
    pub cluster_delay_spread: f64,
    /// Resource elements per resource block; weights use their mean Gram.
    #[serde(default = "default_res")]
    pub res_per_rb: usize,
}

impl ChannelSpec {
    pub fn new(users: usize, rbs: usize, nt: usize, nu: usize, streams: usize) -> Self {
        Self {
            users,
            rbs,
            nt,
            nu,
            streams,
            snr_db: default_snr(),
            seed: 0,
            model: ChannelModel::default(),
            paths: default_paths(),
            subpaths: default_subpaths(),
            angle_spread_deg: default_spread(),
            delay_spread: default_delay(),
            cluster_delay_spread: default_cluster_delay(),
            res_per_rb: default_res(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.users == 0 || self.rbs == 0 || self.nt == 0 || self.nu == 0 || self.res_per_rb == 0 {
            return bad(format!("channel sizes must be positive: {self:?}"));
        }
        if self.streams == 0 || self.streams > self.nu.min(self.nt) {
            return bad(format!(
                "streams = {} outside 1..={}",
                self.streams,
                self.nu.min(self.nt)
            ));
        }
        if !self.snr_db.is_finite() {
            return bad("snr_db must be finite".into());
        }
        if self.model == ChannelModel::Geometric
            && (self.paths == 0
                || self.subpaths == 0
                || !(self.angle_spread_deg >= 0.0)
                || !(self.delay_spread >= 0.0)
                || !(self.cluster_delay_spread >= 0.0))
        {
            return bad("geometric model needs paths, subpaths >= 1 and nonnegative spreads".into());
        }
        Ok(())
    }

    pub fn res_total(&self) -> usize {
        self.rbs * self.res_per_rb
    }
}

/// Channels `h[k][f]` (`N_u x N_t`) per user and resource element, plus the
/// noise power `noise[k][j]` per user and resource block.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    pub spec: ChannelSpec,
    pub h: Vec<Vec<CMatrix>>,
    pub noise: Vec<Vec<f64>>,
}

impl ChannelSet {
    pub fn users(&self) -> usize {
        self.spec.users
    }

    pub fn rbs(&self) -> usize {
        self.spec.rbs
    }

    pub fn streams(&self) -> usize {
        self.spec.streams
    }

    /// Channels of user `k` on resource block `j`.
    pub fn rb(&self, k: usize, j: usize) -> &[CMatrix] {
        let e = self.spec.res_per_rb;
        &self.h[k][j * e..(j + 1) * e]
    }

    pub fn is_finite(&self) -> bool {
        self.h.iter().flatten().all(CMatrix::is_finite) && self.noise.iter().flatten().all(|n| n.is_finite())
    }

    /// Writes `user_<k>.ct3` (`N_u x N_t x F` each) and `manifest.json`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut files = Vec::with_capacity(self.users());
        for k in 0..self.users() {
            let name = format!("user_{k}.ct3");
            self.user_tensor(k).write_ct3(dir.join(&name))?;
            files.push(name);
        }
        let manifest = ChannelManifest {
            spec: self.spec.clone(),
            noise: self.noise.clone(),
            files,
        };
        fs::write(dir.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest: ChannelManifest = serde_json::from_slice(&fs::read(dir.join("manifest.json"))?)?;
        manifest.spec.validate()?;
        let s = &manifest.spec;
        if manifest.files.len() != s.users || manifest.noise.len() != s.users {
            return Err(Error::Malformed("manifest user count mismatch".into()));
        }
        let mut h = Vec::with_capacity(s.users);
        for (k, f) in manifest.files.iter().enumerate() {
            let t = ComplexTensor3::read_ct3(dir.join(PathBuf::from(f)))?;
            if t.dims() != [s.nu, s.nt, s.res_total()] || manifest.noise[k].len() != s.rbs {
                return Err(Error::Malformed(format!("{f} has shape {:?}", t.dims())));
            }
            h.push(
                (0..s.res_total())
                    .map(|e| CMatrix::from_fn(s.nu, s.nt, |a, b| t.get(a, b, e)))
                    .collect(),
            );
        }
        Ok(Self {
            spec: manifest.spec,
            h,
            noise: manifest.noise,
        })
    }

    fn user_tensor(&self, k: usize) -> ComplexTensor3 {
        let s = &self.spec;
        ComplexTensor3::from_fn([s.nu, s.nt, s.res_total()], |a, b, e| self.h[k][e][(a, b)])
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelManifest {
    spec: ChannelSpec,
    noise: Vec<Vec<f64>>,
    files: Vec<String>,
}

fn ula(n: usize, angle: f64) -> Vec<C64> {
    (0..n).map(|i| C64::from_polar(1.0, PI * i as f64 * angle.sin())).collect()
}

fn offset(rng: &mut impl Rng, spread: f64) -> f64 {
    if spread > 0.0 {
        rng.gen_range(-spread..spread)
    } else {
        0.0
    }
}

fn geometric_user(spec: &ChannelSpec, rng: &mut impl Rng) -> Vec<CMatrix> {
    let f_total = spec.res_total();
    let spread = spec.angle_spread_deg.to_radians();
    let mut h = vec![CMatrix::zeros(spec.nu, spec.nt); f_total];
    let sub_gain = 1.0 / ((spec.paths * spec.subpaths) as f64).sqrt();
    for _ in 0..spec.paths {
        let aod = rng.gen_range(-PI / 3.0..PI / 3.0);
        let aoa = rng.gen_range(-PI / 2.0..PI / 2.0);
        let tau = rng.gen_range(0.0..1.0) * spec.delay_spread;
        for _ in 0..spec.subpaths {
            let at = ula(spec.nt, aod + offset(rng, spread));
            let ar = ula(spec.nu, aoa + offset(rng, spread));
            let g = complex_normal(rng) * sub_gain;
            let tau_s = tau + rng.gen_range(0.0..1.0) * spec.cluster_delay_spread;
            for (f, hf) in h.iter_mut().enumerate() {
                let c = g * C64::from_polar(1.0, -2.0 * PI * tau_s * f as f64 / f_total as f64);
                for b in 0..spec.nt {
                    let cb = c * at[b].conj();
                    for a in 0..spec.nu {
                        hf.data_mut()[a + b * spec.nu] += ar[a] * cb;
                    }
                }
            }
        }
    }
    let mean: f64 = h.iter().map(CMatrix::frobenius_norm_sqr).sum::<f64>() / f_total as f64;
    if mean > 0.0 {
        let s = C64::new(((spec.nu * spec.nt) as f64 / mean).sqrt(), 0.0);
        for hf in &mut h {
            *hf = hf.scale(s);
        }
    }
    h
}

/// Noise for SNR `snr_db` against the mean channel power of an RB.
pub fn noise_power(h: &[CMatrix], snr_db: f64) -> f64 {
    let p = h.iter().map(CMatrix::frobenius_norm_sqr).sum::<f64>() / h.len() as f64;
    10f64.powf(-snr_db / 10.0) * p
}

/// Deterministic channel set for `spec`.
pub fn synth_channels(spec: &ChannelSpec) -> Result<ChannelSet> {
    spec.validate()?;
    let mut h = Vec::with_capacity(spec.users);
    for k in 0..spec.users {
        let mut rng = named_rng(spec.seed, &format!("channel-user-{k}"));
        h.push(match spec.model {
            ChannelModel::Iid => (0..spec.res_total())
                .map(|_| CMatrix::from_fn(spec.nu, spec.nt, |_, _| complex_normal(&mut rng)))
                .collect(),
            ChannelModel::Geometric => geometric_user(spec, &mut rng),
        });
    }
    let e = spec.res_per_rb;
    let noise = h
        .iter()
        .map(|hk: &Vec<CMatrix>| {
            (0..spec.rbs)
                .map(|j| noise_power(&hk[j * e..(j + 1) * e], spec.snr_db))
                .collect()
        })
        .collect();
    Ok(ChannelSet {
        spec: spec.clone(),
        h,
        noise,
    })
}
