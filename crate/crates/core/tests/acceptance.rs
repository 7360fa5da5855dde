//! Acceptance harness: one PASS/FAIL line per criterion, plus notes.
//! Exits nonzero when any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use rand::Rng;
use stz::codec::{
    coefficient_cr, coefficient_cr_bound, compress, compression_ratio, decode_angles, decompress, encode_angles,
    encode_sparse, reference_bits, CodecConfig, Compressed, Method,
};
use stz::eval::{
    best_in_band, run_scenario, sum_rate, synth_channels, zf_identity_defect, zf_weights, ChannelModel, ReportRow,
    ScenarioConfig,
};
use stz::givens::{givens_decompose_with_phases, givens_reconstruct};
use stz::rng::{complex_normal, named_rng};
use stz::solver::prox_l0_topk;
use stz::{apbcd_solve, hosvd, relative_error, CMatrix, ComplexTensor3, DescentTrace, StdConfig};

/// Step-size safety factor used where a criterion asks for iteration counts.
const FAST_ETA: f64 = 100.0;

struct Harness {
    failed: usize,
}

impl Harness {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        if !pass {
            self.failed += 1;
        }
        println!("[{id}] {} {detail}", if pass { "PASS" } else { "FAIL" });
    }

    fn note(&self, id: &str, text: String) {
        println!("[{id}] note: {text}");
    }
}

fn median(mut v: Vec<usize>) -> usize {
    v.sort_unstable();
    v[v.len() / 2]
}

fn first_below(tr: &DescentTrace, tol: f64) -> Option<usize> {
    tr.records.iter().find(|r| r.rel_err <= tol).map(|r| r.iter)
}

fn exact_recovery(h: &mut Harness) {
    let dims = [2, 16, 24];
    let ranks = [2, 4, 4];
    let run = |seed: u64, s1: f64, eta_safety: f64| {
        let mut cfg = StdConfig::new(ranks, s1, 0.01);
        let (a1, a2) = cfg.budgets(dims);
        let p = planted(seed, dims, ranks, a1, a2, 1.0);
        cfg.tol = 0.0;
        cfg.max_iters = 50;
        cfg.eta_safety = eta_safety;
        let t = Instant::now();
        let (_, tr) = apbcd_solve(&p.v, &cfg).unwrap();
        (first_below(&tr, EXACT_RECOVERY), t.elapsed().as_secs_f64(), tr.final_rel_err())
    };
    let runs: Vec<_> = (0..20).map(|s| run(s, 1.0, FAST_ETA)).collect();
    let hits: Vec<usize> = runs.iter().filter_map(|r| r.0).collect();
    let slowest = runs.iter().map(|r| r.1).fold(0.0, f64::max);
    h.check(
        "AC1",
        hits.len() == runs.len() && slowest < 5.0,
        format!(
            "dense core + spikes, 2x16x24, ranks (2,4,4): {}/20 reach RE <= 1e-6 within 50 iterations (median {}), slowest {slowest:.3} s",
            hits.len(),
            if hits.is_empty() { 0 } else { median(hits.clone()) }
        ),
    );
    let slow: Vec<_> = (0..20).map(|s| run(s, 1.0, 1.0)).collect();
    let worst = slow.iter().map(|r| r.2).fold(0.0, f64::max);
    h.note(
        "AC1",
        format!(
            "default step safety 1: {}/20 within 50 iterations, worst final RE {worst:.2e}",
            slow.iter().filter(|r| r.0.is_some()).count()
        ),
    );
    let sparse: Vec<_> = (0..20).map(|s| run(s, 0.25, FAST_ETA)).collect();
    h.note(
        "AC1",
        format!(
            "sparse all-orthogonal core (s1 0.25) + spikes: {}/20 within 50 iterations",
            sparse.iter().filter(|r| r.0.is_some()).count()
        ),
    );
}

fn descent(h: &mut Harness) {
    let mut f_bad = 0;
    let mut h_bad = 0;
    let mut tail_bad = 0;
    for beta in [0.0, 0.3] {
        for seed in 0..100u64 {
            let mut rng = named_rng(seed, "descent");
            let dims = [2 + (seed % 2) as usize, 6 + (seed % 5) as usize, 8 + (seed % 3) as usize];
            let v = random_tensor(&mut rng, dims);
            let mut cfg = StdConfig::new([2, 3, 4], 0.5, 0.05);
            cfg.beta = beta;
            cfg.tol = 0.0;
            cfg.max_iters = 60;
            cfg.seed = seed;
            let (_, tr) = apbcd_solve(&v, &cfg).unwrap();
            let f0 = tr.records[0].objective;
            let rises = |f: fn(&stz::solver::TraceRecord) -> f64| {
                tr.records.windows(2).any(|w| f(&w[1]) > f(&w[0]) + DESCENT_SLACK * f0)
            };
            if beta == 0.0 {
                f_bad += rises(|r| r.objective) as usize;
            } else {
                h_bad += rises(|r| r.h) as usize;
                let steps: Vec<f64> = tr.records[1..].iter().map(|r| r.step_sq).collect();
                let head: f64 = steps[..5].iter().sum();
                let tail: f64 = steps[steps.len() - 5..].iter().sum();
                let total: f64 = steps.iter().sum();
                if !(tail < head && total.is_finite()) {
                    tail_bad += 1;
                }
            }
        }
    }
    h.check(
        "AC2",
        f_bad == 0 && h_bad == 0 && tail_bad == 0,
        format!("100 instances: F rises (beta 0) {f_bad}, H rises (beta 0.3) {h_bad}, non-shrinking step tails {tail_bad}"),
    );
}

fn prox_oracle(h: &mut Harness) {
    let mut rng = named_rng(0, "prox-acceptance");
    let mut mismatches = 0;
    for case in 0..10_000 {
        let dims = [rng.gen_range(1..5), rng.gen_range(1..7), rng.gen_range(1..9)];
        let ties = case % 2 == 0;
        let t = ComplexTensor3::from_fn(dims, |_, _, _| {
            if ties {
                stz::C64::new(rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64)
            } else {
                complex_normal(&mut rng)
            }
        });
        let k = rng.gen_range(0..=t.numel() + 1);
        if prox_l0_topk(&t, k) != brute_force_topk(&t, k) {
            mismatches += 1;
        }
    }
    h.check("AC3", mismatches == 0, format!("10^4 tensors, half with integer ties: {mismatches} mismatches"));
}

fn givens_round_trip(h: &mut Harness) {
    let mut rng = named_rng(0, "givens-acceptance");
    let mut worst = 0.0f64;
    let mut count_bad = 0;
    for _ in 0..500 {
        let n = rng.gen_range(1..=64);
        let r = rng.gen_range(1..=n);
        let u = random_orthonormal(&mut rng, n, r);
        let (p, phases) = givens_decompose_with_phases(&u).unwrap();
        let normalized = CMatrix::from_fn(n, r, |i, j| u[(i, j)] * phases[j].conj());
        worst = worst.max(max_abs_diff(&givens_reconstruct(&p).unwrap(), &normalized));
        if p.etas.len() + p.thetas.len() != (2 * n - r - 1) * r {
            count_bad += 1;
        }
    }
    h.check(
        "AC4",
        worst <= GIVENS_RT && count_bad == 0,
        format!("500 matrices, 1 <= r <= n <= 64: worst entry error {worst:.2e}, parameter count mismatches {count_bad}"),
    );
}

fn codec_cases() -> Vec<(ComplexTensor3, CodecConfig)> {
    let mut out = Vec::new();
    for seed in 0..4u64 {
        let v = zf_set(seed, 1, 64, 64, 2).v.remove(0);
        for method in Method::ALL {
            for (ranks, s1, s2) in [([2, 8, 8], 0.5, 0.0), ([2, 10, 12], 0.5, 0.01), ([2, 6, 6], 1.0, 0.02)] {
                out.push((v.clone(), CodecConfig::new(method, StdConfig::new(ranks, s1, s2))));
            }
        }
    }
    out
}

fn codec_round_trip(h: &mut Harness, cases: &[(ComplexTensor3, CodecConfig)]) -> Vec<Compressed> {
    let mut comp_bad = 0;
    let mut factor_worst = 0.0f64;
    let mut nondeterministic = 0;
    let mut decode_bad = 0;
    let mut out = Vec::new();
    for (v, cfg) in cases {
        let (st, _) = apbcd_solve(v, &cfg.solver).unwrap();
        for t in [&st.core, &st.residual] {
            let p = encode_sparse(t, cfg.quant.bits_per_component);
            let bound = p.values.max_error() * (1.0 + 1e-9) + p.values.scale * 1e-15;
            let d = p.decode().unwrap();
            let within = t.data().iter().zip(d.data()).all(|(a, b)| (a.re - b.re).abs() <= bound && (a.im - b.im).abs() <= bound);
            comp_bad += !within as usize;
        }
        if cfg.method == Method::StdFc {
            for u in &st.factors {
                let (p, _) = givens_decompose_with_phases(u).unwrap();
                let s = encode_angles(&p, &cfg.quant).unwrap();
                let back = givens_reconstruct(&decode_angles(&s.bytes, s.bit_len, p.n, p.r).unwrap()).unwrap();
                let exact = givens_reconstruct(&p).unwrap();
                factor_worst = factor_worst.max(back.sub(&exact).frobenius_norm() / exact.frobenius_norm());
            }
        }
        let a = compress(v, cfg).unwrap();
        if cfg.method == Method::StdFc {
            factor_worst = factor_worst.max(a.factor_rel_err);
        }
        let b = compress(v, cfg).unwrap();
        nondeterministic += (a.blob.to_bytes() != b.blob.to_bytes()) as usize;
        let d = decompress(&a.blob).unwrap();
        decode_bad += (d.dims() != v.dims() || !d.is_finite()) as usize;
        out.push(a);
    }
    h.check(
        "AC5",
        comp_bad == 0 && factor_worst <= FACTOR_RE && nondeterministic == 0 && decode_bad == 0,
        format!(
            "{} blobs on 2x64x64 ZF weights: component bound violations {comp_bad}, worst factor RE {factor_worst:.4}, differing reruns {nondeterministic}, bad decodes {decode_bad}",
            cases.len()
        ),
    );
    out
}

fn cr_accounting(h: &mut Harness, cases: &[(ComplexTensor3, CodecConfig)], blobs: &[Compressed]) {
    let mut sum_bad = 0;
    let mut bound_bad = 0;
    let mut header_worst = 0.0f64;
    let mut dense_overhead = 0.0f64;
    let mut index_excess = 0.0f64;
    for ((v, cfg), c) in cases.iter().zip(blobs) {
        let blob = &c.blob;
        let declared: usize = blob.sections.iter().map(|s| s.bit_len).sum();
        sum_bad += (blob.bit_size() != blob.header_bits() + declared) as usize;
        let reference = reference_bits(v.dims(), cfg.quant.bits_per_component) as f64;
        header_worst = header_worst.max(blob.header_bits() as f64 / reference);
        let (a1, a2) = if cfg.method == Method::Td {
            (cfg.solver.ranks.iter().product(), 0)
        } else {
            cfg.solver.budgets(v.dims())
        };
        let bound = coefficient_cr_bound(v.dims(), cfg.solver.ranks, a1, a2);
        bound_bad += (coefficient_cr(c) > bound) as usize;
        let excess = compression_ratio(blob) - bound;
        match cfg.method {
            Method::Td => dense_overhead = dense_overhead.max(excess),
            Method::Std => index_excess = index_excess.max(excess),
            Method::StdFc => {}
        }
    }
    h.check(
        "AC6",
        sum_bad == 0 && bound_bad == 0 && header_worst < 0.01 && dense_overhead < 0.01,
        format!(
            "{} blobs: bit-sum mismatches {sum_bad}, coefficient bound violations {bound_bad}, worst header share {:.3}%, dense-coded CR above bound by at most {:.3}%",
            blobs.len(),
            100.0 * header_worst,
            100.0 * dense_overhead
        ),
    );
    h.note(
        "AC6",
        format!("STD blobs exceed the coefficient bound by up to {:.2}% of raw size for sparse index bits", 100.0 * index_excess),
    );
}

fn hosvd_desk_scale(h: &mut Harness) -> f64 {
    let t = Instant::now();
    let ws = zf_set(0, 1, 136, 128, 2);
    let v = &ws.v[0];
    let mut best: Option<([usize; 3], f64)> = None;
    let mut at_max = f64::NAN;
    for ranks in [[2, 30, 40], [2, 20, 30], [2, 16, 24], [2, 12, 16]] {
        let re = relative_error(&hosvd(v, ranks).unwrap().reconstruct().unwrap(), v).unwrap();
        if ranks == [2, 30, 40] {
            at_max = re;
        }
        if re <= 0.05 {
            best = Some((ranks, re));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    h.check(
        "AC7",
        best.is_some() && secs < 60.0,
        format!(
            "geometric 2x128x136: HOSVD RE {:.2}% at (2,30,40); smallest tried rank within 5%: {}; {secs:.1} s",
            100.0 * at_max,
            best.map_or("none".into(), |(r, e)| format!("{r:?} at {:.2}%", 100.0 * e))
        ),
    );
    let t = Instant::now();
    let cfg = CodecConfig::new(Method::StdFc, StdConfig::new([2, 30, 40], 0.5, 0.01));
    let c = compress(v, &cfg).unwrap();
    let cr = compression_ratio(&c.blob);
    h.note(
        "AC7",
        format!(
            "2x128x136 STD+FC at (2,30,40), s1 0.5, s2 0.01: CR {cr:.4} (target <= 0.15: {}), {:.1} s",
            if cr <= 0.15 { "met" } else { "not met" },
            t.elapsed().as_secs_f64()
        ),
    );
    zf_identity_defect(&ws).unwrap()
}

fn ablation(h: &mut Harness) -> f64 {
    let t = Instant::now();
    let cfg: ScenarioConfig = serde_json::from_value(serde_json::json!({
        "channel": {"users": 2, "rbs": 64, "nt": 64, "nu": 4, "streams": 2},
        "ranks": [[2, 6, 6], [2, 5, 7], [2, 7, 5], [2, 8, 4], [2, 4, 8], [2, 10, 10], [2, 10, 12], [2, 12, 10]],
        "s1": [0.5, 1.0],
        "s2": [0.0],
        "seeds": (0..10).collect::<Vec<u64>>()
    }))
    .unwrap();
    let report = run_scenario(&cfg).unwrap();
    let best = best_in_band(&report.rows, 0.09, 0.11);
    let rl = |seed: u64, m: Method| -> Option<f64> { best.iter().find(|r: &&ReportRow| r.seed == seed && r.method == m).map(|r| r.rl) };
    let mut mean = [0.0; 3];
    let mut complete = 0;
    let mut wins = [0usize; 2];
    for &seed in &cfg.seeds {
        let (Some(fc), Some(std), Some(td)) = (rl(seed, Method::StdFc), rl(seed, Method::Std), rl(seed, Method::Td)) else {
            continue;
        };
        complete += 1;
        mean[0] += fc;
        mean[1] += std;
        mean[2] += td;
        wins[0] += (fc < std) as usize;
        wins[1] += (std < td) as usize;
    }
    let n = complete.max(1) as f64;
    let mean = mean.map(|m| m / n);
    // One-sided sign test at 5%: P(X >= 9 | n = 10, p = 0.5) = 0.011.
    let need = sign_test_threshold(complete);
    h.check(
        "AC8",
        complete >= 10 && mean[0] < mean[1] && mean[1] < mean[2] && wins.iter().all(|&w| w >= need),
        format!(
            "{complete} seeds with all methods in CR [0.09, 0.11]: mean RL STD+FC {:.4}, STD {:.4}, TD {:.4}; wins {}/{complete} and {}/{complete} (need {need}); {:.0} s",
            mean[0],
            mean[1],
            mean[2],
            wins[0],
            wins[1],
            t.elapsed().as_secs_f64()
        ),
    );
    report.zf_defect
}

/// Smallest `w` with `P(Binomial(n, 1/2) >= w) <= 0.05`.
fn sign_test_threshold(n: usize) -> usize {
    let mut tail = 0.0;
    for w in (0..=n).rev() {
        let mut c = 1.0;
        for i in 0..w {
            c = c * (n - i) as f64 / (i + 1) as f64;
        }
        tail += c / 2f64.powi(n as i32);
        if tail > 0.05 {
            return w + 1;
        }
    }
    0
}

fn rate_oracle(h: &mut Harness) {
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let users = 1 + seed as usize % 3;
        let streams = 1 + seed as usize % 2;
        let nt = users * streams + 2;
        let ch = random_channel_set(seed, users, 3, nt, 3, streams, 1 + seed as usize % 2);
        let w = random_precoders(seed, users, 3, nt, streams);
        let dense = dense_sum_rate(&ch, &w);
        worst = worst.max((sum_rate(&ch, &w).unwrap() - dense).abs() / dense.max(1.0));
    }
    let ch = random_channel_set(99, 1, 4, 5, 2, 1, 1);
    let w = random_precoders(99, 1, 4, 5, 1);
    let mut expected = 0.0;
    for j in 0..4 {
        let col = w[0][j].col(0);
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let hm = &ch.h[0][j];
        let gain: f64 = (0..hm.rows())
            .map(|a| (0..hm.cols()).map(|b| hm[(a, b)] * col[b] / norm).sum::<stz::C64>().norm_sqr())
            .sum();
        expected += (1.0 + gain / ch.noise[0][j]).log2();
    }
    let single = (sum_rate(&ch, &w).unwrap() - expected).abs() / expected;
    h.check(
        "AC9",
        worst <= RATE_ORACLE && single <= 1e-12,
        format!("20 instances vs dense determinant oracle: worst rel diff {worst:.2e}; single user vs log2(1+SNR): {single:.2e}"),
    );
}

fn zf_invariant(h: &mut Harness, seen: f64) {
    let mut worst = seen;
    for model in [ChannelModel::Geometric, ChannelModel::Iid] {
        for seed in 0..5u64 {
            let mut spec = channel_spec(seed, 3, 16, 24, 2);
            spec.model = model;
            spec.res_per_rb = 1 + seed as usize % 3;
            worst = worst.max(zf_identity_defect(&zf_weights(&synth_channels(&spec).unwrap()).unwrap()).unwrap());
        }
    }
    h.check("AC10", worst <= ZF, format!("largest ||V W - I||_F over every generated (k, j): {worst:.2e}"));
}

/// First iteration after which the relative error stays within 1% of its
/// final value.
fn plateau_iteration(tr: &DescentTrace) -> usize {
    let last = tr.final_rel_err();
    let mut k = tr.iterations();
    for r in tr.records.iter().rev() {
        if (r.rel_err - last).abs() > 0.01 * last {
            break;
        }
        k = r.iter;
    }
    k
}

fn convergence_speed(h: &mut Harness) {
    let run = |eta_safety: f64| -> Vec<usize> {
        (0..100u64)
            .map(|seed| {
                let v = &zf_set(seed, 1, 24, 16, 2).v[0];
                let mut cfg = StdConfig::new([2, 6, 8], 0.5, 0.01);
                cfg.eta_safety = eta_safety;
                let (_, tr) = apbcd_solve(v, &cfg).unwrap();
                plateau_iteration(&tr)
            })
            .collect()
    };
    let fast = run(FAST_ETA);
    let m = median(fast.clone());
    let mut sorted = fast;
    sorted.sort_unstable();
    h.check(
        "AC11",
        m <= 20,
        format!("100 ZF instances 2x16x24, ranks (2,6,8): median plateau iteration {m}, p90 {}", sorted[89]),
    );
    h.note("AC11", format!("default step safety 1: median plateau iteration {}", median(run(1.0))));
}

fn main() -> ExitCode {
    let mut h = Harness { failed: 0 };
    exact_recovery(&mut h);
    descent(&mut h);
    prox_oracle(&mut h);
    givens_round_trip(&mut h);
    let cases = codec_cases();
    let blobs = codec_round_trip(&mut h, &cases);
    cr_accounting(&mut h, &cases, &blobs);
    let zf_large = hosvd_desk_scale(&mut h);
    let zf_scenario = ablation(&mut h);
    rate_oracle(&mut h);
    zf_invariant(&mut h, zf_large.max(zf_scenario));
    convergence_speed(&mut h);
    println!("acceptance: {} failed", h.failed);
    if h.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
