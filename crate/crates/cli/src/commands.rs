//! Subcommand implementations. Each returns a one-line stderr summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::Value;
use stz::codec::{
    blob_unpack, coefficient_cr, compress, compression_ratio, decompress, CodecConfig, CompressedBlob, MethodCode,
};
use stz::eval::{run_scenario, ScenarioConfig};
use stz::{relative_error, ComplexTensor3};

use crate::exit::{CliError, CliResult, ExitCode};
use crate::manifest::{artifact, read_file, write_atomic, RunManifest};
use crate::overrides::load_config;

fn read_text(path: &Path) -> CliResult<String> {
    String::from_utf8(read_file(path)?).map_err(|_| CliError::config(format!("{} is not UTF-8", path.display())))
}

fn read_tensor(path: &Path) -> CliResult<(ComplexTensor3, Vec<u8>)> {
    let bytes = read_file(path)?;
    let t = ComplexTensor3::from_ct3_bytes(&bytes).map_err(CliError::wrap(path.display()))?;
    Ok((t, bytes))
}

fn method_label(m: MethodCode) -> &'static str {
    match m {
        MethodCode::StdFc => "STD+FC",
        MethodCode::Std => "STD",
        MethodCode::Td => "TD",
    }
}

fn dims_label(d: [usize; 3]) -> String {
    format!("{}x{}x{}", d[0], d[1], d[2])
}

pub struct CompressArgs<'a> {
    pub input: &'a Path,
    pub config: &'a Path,
    pub output: &'a Path,
    pub overrides: &'a [String],
    pub manifest: Option<&'a Path>,
}

pub fn cmd_compress(a: &CompressArgs<'_>) -> CliResult<String> {
    let (cfg, _): (CodecConfig, Value) = load_config(&read_text(a.config)?, a.overrides)?;
    let (v, in_bytes) = read_tensor(a.input)?;
    cfg.validate(v.dims()).map_err(CliError::wrap("config"))?;

    let start = Instant::now();
    let c = compress(&v, &cfg)?;
    let t_compress = start.elapsed().as_secs_f64();
    let bytes = c.blob.to_bytes();
    let start = Instant::now();
    let decoded = decompress(&c.blob)?;
    // A zero input is reproduced exactly by its header-only blob.
    let re = if v.norm_sqr() == 0.0 { decoded.frobenius_norm() } else { relative_error(&decoded, &v)? };
    let t_verify = start.elapsed().as_secs_f64();

    let cr = compression_ratio(&c.blob);
    let iters = c.trace.as_ref().map_or(0, |t| t.iterations());
    write_atomic(a.output, &bytes)?;
    if let Some(path) = a.manifest {
        let config = serde_json::to_value(&cfg).expect("config serializes");
        let mut m = RunManifest::new("compress", config, vec![cfg.solver.seed]);
        m.inputs.push(artifact(&a.input.display().to_string(), &in_bytes));
        m.outputs.push(artifact(&a.output.display().to_string(), &bytes));
        m.time("compress", t_compress);
        m.time("verify", t_verify);
        m.metric("CR", cr);
        m.metric("RE", re);
        m.metric("coefficient_CR", coefficient_cr(&c));
        m.metric("iterations", iters);
        m.metric("bits", c.blob.bit_size());
        write_atomic(path, &m.to_json())?;
    }
    Ok(format!(
        "compress {}: method {}, dims {}, ranks {}, CR {cr:.4}, RE {re:.3e}, iterations {iters}, {} bits",
        a.output.display(),
        cfg.method,
        dims_label(v.dims()),
        dims_label(cfg.solver.ranks),
        c.blob.bit_size()
    ))
}

fn read_blob(path: &Path) -> CliResult<CompressedBlob> {
    blob_unpack(&read_file(path)?).map_err(CliError::wrap(path.display()))
}

pub fn cmd_decompress(input: &Path, output: &Path) -> CliResult<String> {
    let blob = read_blob(input)?;
    let v = decompress(&blob).map_err(CliError::wrap(input.display()))?;
    write_atomic(output, &v.to_ct3_bytes())?;
    Ok(format!(
        "decompress {}: method {}, dims {}",
        output.display(),
        method_label(blob.meta.method),
        dims_label(v.dims())
    ))
}

/// Header and section table of a blob, one field per line.
pub fn cmd_inspect(input: &Path) -> CliResult<String> {
    let blob = read_blob(input)?;
    let m = &blob.meta;
    let mut out = String::new();
    let mut line = |k: &str, v: String| out.push_str(&format!("{k:<18}{v}\n"));
    line("method", method_label(m.method).into());
    line("flags", format!("{:#04x}", m.flags));
    line("dims", dims_label(m.dims));
    line("ranks", dims_label(m.ranks));
    line("s1", m.s1.to_string());
    line("s2", m.s2.to_string());
    line("bits/component", m.quant.bits_per_component.to_string());
    line("angle bits", m.quant.angle_bits.to_string());
    line("angle err target", m.quant.rle_rel_err_target.to_string());
    line("header bits", blob.header_bits().to_string());
    line("total bits", blob.bit_size().to_string());
    line("CR", format!("{:.6}", compression_ratio(&blob)));
    for s in &blob.sections {
        line(&format!("section {}", s.tag.name()), format!("{} bits", s.bit_len));
    }
    Ok(out)
}

pub struct EvalArgs<'a> {
    pub scenario: &'a Path,
    pub out: &'a Path,
    pub overrides: &'a [String],
    pub jobs: usize,
    pub force: bool,
    pub no_timings: bool,
}

fn collect_outputs(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> CliResult<()> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(format!("listing {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    for p in paths {
        if p.is_dir() {
            collect_outputs(root, &p, out)?;
        } else {
            out.push(p.strip_prefix(root).expect("under root").to_path_buf());
        }
    }
    Ok(())
}

/// Runs a sweep into a staging directory and moves it to `out` when done.
pub fn cmd_eval(a: &EvalArgs<'_>) -> CliResult<String> {
    let (cfg, _): (ScenarioConfig, Value) = load_config(&read_text(a.scenario)?, a.overrides)?;
    cfg.validate().map_err(CliError::wrap("scenario"))?;
    if a.out.exists() && !a.force {
        return Err(CliError::io(format!("{} exists (pass --force to replace it)", a.out.display())));
    }
    let parent = match a.out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |what: &str| {
        let what = what.to_string();
        move |e: std::io::Error| CliError::io(format!("{what}: {e}"))
    };
    let staging = tempfile::Builder::new()
        .prefix(".stz-eval-")
        .tempdir_in(parent)
        .map_err(io("creating staging directory"))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| CliError::config(format!("--jobs: {e}")))?;
    let start = Instant::now();
    let mut report = pool.install(|| run_scenario(&cfg))?;
    let t_run = start.elapsed().as_secs_f64();
    if a.no_timings {
        for r in &mut report.rows {
            r.seconds = 0.0;
        }
    }

    let dir = staging.path();
    report.write_csv(dir.join("report.csv"))?;
    report.write_json(dir.join("report.json"))?;
    report.write_traces(dir.join("traces"))?;

    let config = serde_json::to_value(&cfg).expect("scenario serializes");
    let mut m = RunManifest::new("eval", config, cfg.seeds.clone());
    m.inputs.push(artifact(&a.scenario.display().to_string(), &read_file(a.scenario)?));
    let mut outputs = Vec::new();
    collect_outputs(dir, dir, &mut outputs)?;
    for rel in outputs {
        let bytes = read_file(&dir.join(&rel))?;
        m.outputs.push(artifact(&rel.display().to_string(), &bytes));
    }
    if !a.no_timings {
        m.time("run", t_run);
    }
    let failed = report.rows.iter().filter(|r| !r.ok()).count();
    m.metric("rows", report.rows.len());
    m.metric("failed", failed);
    m.metric("zf_defect", report.zf_defect);
    fs::write(dir.join("manifest.json"), m.to_json()).map_err(io("writing manifest"))?;

    if a.out.exists() {
        let remove = if a.out.is_dir() { fs::remove_dir_all(a.out) } else { fs::remove_file(a.out) };
        remove.map_err(io(&format!("replacing {}", a.out.display())))?;
    }
    let staged = staging.keep();
    if let Err(e) = fs::rename(&staged, a.out) {
        let _ = fs::remove_dir_all(&staged);
        return Err(CliError::io(format!("moving results to {}: {e}", a.out.display())));
    }
    let code = if report.zf_defect > 1e-8 { " (ZF identity check failed)" } else { "" };
    Ok(format!(
        "eval {}: {} rows, {failed} failed, max ZF defect {:.1e}{code}",
        a.out.display(),
        report.rows.len(),
        report.zf_defect
    ))
}

/// Maps a finished command to its summary stream and exit code.
pub fn finish(r: CliResult<String>) -> (ExitCode, String) {
    match r {
        Ok(s) => (ExitCode::Ok, s),
        Err(e) => (e.code, format!("error: {e}")),
    }
}
