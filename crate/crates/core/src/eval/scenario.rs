//! Parameter sweeps over methods, ranks and sparsities on synthetic channels.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{compress, decompress, reference_bits, CodecConfig, Method, QuantizerSpec};
use crate::error::{Error, Result};
use crate::solver::{DescentTrace, EtaSetting, Init, StdConfig};
use crate::tensor::ComplexTensor3;

use super::channel::{synth_channels, ChannelSet, ChannelSpec};
use super::rate::rate_loss;
use super::zf::{weights_from_tensors, zf_identity_defect, zf_weights, WeightSet};

/// Solver settings shared by every grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub beta: f64,
    pub eta: EtaSetting,
    pub max_iters: usize,
    pub tol: f64,
    pub init: Init,
    pub eta_refresh: usize,
    pub eta_safety: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        let d = StdConfig::new([1, 1, 1], 1.0, 0.0);
        Self {
            beta: d.beta,
            eta: d.eta,
            max_iters: d.max_iters,
            tol: d.tol,
            init: d.init,
            eta_refresh: d.eta_refresh,
            eta_safety: d.eta_safety,
        }
    }
}

impl SolverOptions {
    pub fn config(&self, ranks: [usize; 3], s1: f64, s2: f64, seed: u64) -> StdConfig {
        StdConfig {
            ranks,
            s1,
            s2,
            beta: self.beta,
            eta: self.eta,
            max_iters: self.max_iters,
            tol: self.tol,
            seed,
            init: self.init,
            eta_refresh: self.eta_refresh,
            eta_safety: self.eta_safety,
        }
    }
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_s1() -> Vec<f64> {
    vec![0.5]
}
fn default_s2() -> Vec<f64> {
    vec![0.01]
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Channel parameters; `seed` is replaced by each entry of `seeds`.
    pub channel: ChannelSpec,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    pub ranks: Vec<[usize; 3]>,
    #[serde(default = "default_s1")]
    pub s1: Vec<f64>,
    #[serde(default = "default_s2")]
    pub s2: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub quant: QuantizerSpec,
    #[serde(default = "default_true")]
    pub refit: bool,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.quant.validate()?;
        if self.methods.is_empty() || self.ranks.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config("methods, ranks and seeds must be nonempty".into()));
        }
        let dims = [self.channel.streams, self.channel.nt, self.channel.rbs];
        for &ranks in &self.ranks {
            for &s1 in &self.s1 {
                for &s2 in &self.s2 {
                    self.solver.config(ranks, s1, s2, 0).validate(dims)?;
                }
            }
        }
        Ok(())
    }

    /// Grid points in report order. `TD` ignores the sparsity axes.
    pub fn combos(&self) -> Vec<Combo> {
        let mut out = Vec::new();
        for &method in &self.methods {
            for &ranks in &self.ranks {
                if method == Method::Td {
                    out.push(Combo { method, ranks, s1: 1.0, s2: 0.0 });
                    continue;
                }
                for &s1 in &self.s1 {
                    for &s2 in &self.s2 {
                        out.push(Combo { method, ranks, s1, s2 });
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Combo {
    pub method: Method,
    pub ranks: [usize; 3],
    pub s1: f64,
    pub s2: f64,
}

impl Combo {
    pub fn label(&self) -> String {
        let m = match self.method {
            Method::StdFc => "stdfc",
            Method::Std => "std",
            Method::Td => "td",
        };
        let [a, b, c] = self.ranks;
        format!("{m}_{a}x{b}x{c}_s1-{}_s2-{}", self.s1, self.s2)
    }
}

/// One report row. Metrics are NaN when `error` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub seed: u64,
    pub method: Method,
    pub r1: usize,
    pub r2: usize,
    pub r3: usize,
    pub s1: f64,
    pub s2: f64,
    #[serde(rename = "CR")]
    pub cr: f64,
    #[serde(rename = "RE")]
    pub re: f64,
    #[serde(rename = "RL")]
    pub rl: f64,
    /// Largest iteration count over users.
    pub iters: usize,
    pub seconds: f64,
    pub error: Option<String>,
}

impl ReportRow {
    pub fn ranks(&self) -> [usize; 3] {
        [self.r1, self.r2, self.r3]
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct TraceEntry {
    pub seed: u64,
    pub combo: Combo,
    pub user: usize,
    pub trace: DescentTrace,
}

#[derive(Clone, Debug)]
pub struct ScenarioReport {
    pub rows: Vec<ReportRow>,
    pub traces: Vec<TraceEntry>,
    /// Largest `||V W - I||_F` over every reference and decoded weight set.
    pub zf_defect: f64,
}

struct Prepared {
    seed: u64,
    ch: ChannelSet,
    reference: WeightSet,
}

struct ComboOutcome {
    cr: f64,
    re: f64,
    rl: f64,
    iters: usize,
    traces: Vec<DescentTrace>,
    zf_defect: f64,
}

fn run_combo(p: &Prepared, combo: &Combo, cfg: &ScenarioConfig) -> Result<ComboOutcome> {
    let mut bits = 0usize;
    let mut ref_bits = 0usize;
    let mut err = 0.0;
    let mut norm = 0.0;
    let mut iters = 0;
    let mut traces = Vec::new();
    let mut decoded: Vec<ComplexTensor3> = Vec::with_capacity(p.reference.v.len());
    let codec = CodecConfig {
        method: combo.method,
        solver: cfg.solver.config(combo.ranks, combo.s1, combo.s2, p.seed),
        quant: cfg.quant,
        refit: cfg.refit,
    };
    for v in &p.reference.v {
        let c = compress(v, &codec)?;
        let d = decompress(&c.blob)?;
        bits += c.blob.bit_size();
        ref_bits += reference_bits(v.dims(), cfg.quant.bits_per_component);
        err += d.dist_sqr(v);
        norm += v.norm_sqr();
        if let Some(t) = c.trace {
            iters = iters.max(t.iterations());
            traces.push(t);
        }
        decoded.push(d);
    }
    let ws = weights_from_tensors(decoded)?;
    Ok(ComboOutcome {
        cr: bits as f64 / ref_bits as f64,
        re: (err / norm).sqrt(),
        rl: rate_loss(&p.ch, &p.reference.w, &ws.w)?,
        iters,
        traces,
        zf_defect: zf_identity_defect(&ws)?,
    })
}

/// Runs every (seed, grid point) pair; failures become rows with `error`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    cfg.validate()?;
    let prepared: Vec<Prepared> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut spec = cfg.channel.clone();
            spec.seed = seed;
            let ch = synth_channels(&spec)?;
            let reference = zf_weights(&ch)?;
            Ok(Prepared { seed, ch, reference })
        })
        .collect::<Result<_>>()?;
    let mut zf_defect = 0.0f64;
    for p in &prepared {
        zf_defect = zf_defect.max(zf_identity_defect(&p.reference)?);
    }
    let combos = cfg.combos();
    let tasks: Vec<(usize, usize)> = (0..prepared.len())
        .flat_map(|s| (0..combos.len()).map(move |c| (s, c)))
        .collect();
    let outcomes: Vec<(ReportRow, Vec<TraceEntry>, f64)> = tasks
        .par_iter()
        .map(|&(s, c)| {
            let p = &prepared[s];
            let combo = &combos[c];
            let start = Instant::now();
            let res = run_combo(p, combo, cfg);
            let seconds = start.elapsed().as_secs_f64();
            let mut row = ReportRow {
                seed: p.seed,
                method: combo.method,
                r1: combo.ranks[0],
                r2: combo.ranks[1],
                r3: combo.ranks[2],
                s1: combo.s1,
                s2: combo.s2,
                cr: f64::NAN,
                re: f64::NAN,
                rl: f64::NAN,
                iters: 0,
                seconds,
                error: None,
            };
            match res {
                Ok(o) => {
                    row.cr = o.cr;
                    row.re = o.re;
                    row.rl = o.rl;
                    row.iters = o.iters;
                    let traces = o
                        .traces
                        .into_iter()
                        .enumerate()
                        .map(|(user, trace)| TraceEntry {
                            seed: p.seed,
                            combo: *combo,
                            user,
                            trace,
                        })
                        .collect();
                    (row, traces, o.zf_defect)
                }
                Err(e) => {
                    row.error = Some(e.to_string());
                    (row, Vec::new(), 0.0)
                }
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(outcomes.len());
    let mut traces = Vec::new();
    for (row, t, d) in outcomes {
        zf_defect = zf_defect.max(d);
        rows.push(row);
        traces.extend(t);
    }
    Ok(ScenarioReport { rows, traces, zf_defect })
}

/// For each (seed, method), the successful row with `CR` in `[lo, hi]` and
/// the lowest `RL`.
pub fn best_in_band(rows: &[ReportRow], lo: f64, hi: f64) -> Vec<ReportRow> {
    let mut best: Vec<ReportRow> = Vec::new();
    for r in rows.iter().filter(|r| r.ok() && r.cr >= lo && r.cr <= hi) {
        match best.iter_mut().find(|b| b.seed == r.seed && b.method == r.method) {
            Some(b) if r.rl < b.rl => *b = r.clone(),
            Some(_) => {}
            None => best.push(r.clone()),
        }
    }
    best.sort_by(|a, b| (a.seed, a.method.label()).cmp(&(b.seed, b.method.label())));
    best
}

impl ScenarioReport {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let doc = serde_json::json!({ "rows": self.rows, "zf_defect": self.zf_defect });
        fs::write(path, serde_json::to_vec_pretty(&doc)?)?;
        Ok(())
    }

    /// One CSV per (seed, grid point, user) under `dir`; returns the paths.
    pub fn write_traces(&self, dir: impl AsRef<Path>) -> Result<Vec<std::path::PathBuf>> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut paths = Vec::with_capacity(self.traces.len());
        for t in &self.traces {
            let path = dir.join(format!("seed{}_{}_user{}.csv", t.seed, t.combo.label(), t.user));
            t.trace.write_csv(fs::File::create(&path)?)?;
            paths.push(path);
        }
        Ok(paths)
    }
}
