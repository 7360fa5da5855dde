//! Sum rate, rate loss and per-stream SINR.
//!
//! Stream `l = (k, s)` on RB `j` sees
//! `C = n_k[j] I + sum_{i != l} H_k w_i w_i^H H_k^H` and achieves
//! `log2(1 + w_l^H H_k^H C^-1 H_k w_l)`, where `w` are precoder columns
//! scaled to unit norm (zero columns stay zero). With several resource
//! elements per RB the rate is averaged over them.

use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::linalg::{hpd_quadratic_inverse, CMatrix, C64};

use super::channel::ChannelSet;

/// SINR of one stream on one RB.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StreamSnr {
    pub user: usize,
    pub stream: usize,
    pub rb: usize,
    /// Mean over the RB's resource elements.
    pub sinr: f64,
}

struct Stream {
    user: usize,
    index: usize,
    w: Vec<C64>,
}

/// Unit-norm precoder columns of every user on RB `j`, user-major.
fn streams_on(w: &[Vec<CMatrix>], j: usize) -> Vec<Stream> {
    let mut out = Vec::new();
    for (user, wk) in w.iter().enumerate() {
        let m = &wk[j];
        for index in 0..m.cols() {
            let col = m.col(index);
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let w = if norm > 0.0 {
                col.iter().map(|z| z / norm).collect()
            } else {
                vec![C64::new(0.0, 0.0); col.len()]
            };
            out.push(Stream { user, index, w });
        }
    }
    out
}

fn apply(h: &CMatrix, w: &[C64]) -> Vec<C64> {
    (0..h.rows())
        .map(|a| (0..h.cols()).map(|b| h[(a, b)] * w[b]).sum())
        .collect()
}

fn check_shapes(ch: &ChannelSet, w: &[Vec<CMatrix>]) -> Result<()> {
    let s = &ch.spec;
    ensure!(w.len() == s.users, "precoders for {} users, channel has {}", w.len(), s.users);
    for wk in w {
        ensure!(wk.len() == s.rbs, "precoders for {} RBs, channel has {}", wk.len(), s.rbs);
        for m in wk {
            ensure!(m.rows() == s.nt, "precoder has {} rows, channel has {} antennas", m.rows(), s.nt);
        }
    }
    for (k, nk) in ch.noise.iter().enumerate() {
        for (j, &n) in nk.iter().enumerate() {
            ensure!(n > 0.0 && n.is_finite(), "noise power for user {k}, RB {j} must be positive");
        }
    }
    Ok(())
}

/// Visits every (stream, RB) with the SINRs of its resource elements.
fn for_each_sinr(ch: &ChannelSet, w: &[Vec<CMatrix>], mut f: impl FnMut(&Stream, usize, &[f64])) -> Result<()> {
    check_shapes(ch, w)?;
    let mut sinrs = Vec::with_capacity(ch.spec.res_per_rb);
    for j in 0..ch.spec.rbs {
        let streams = streams_on(w, j);
        for (l, st) in streams.iter().enumerate() {
            sinrs.clear();
            let n = ch.noise[st.user][j];
            for h in ch.rb(st.user, j) {
                let nu = h.rows();
                let mut c = CMatrix::identity(nu).scale(C64::new(n, 0.0));
                for (i, other) in streams.iter().enumerate() {
                    if i == l {
                        continue;
                    }
                    let hw = apply(h, &other.w);
                    let data = c.data_mut();
                    for b in 0..nu {
                        for a in 0..nu {
                            data[a + b * nu] += hw[a] * hw[b].conj();
                        }
                    }
                }
                sinrs.push(hpd_quadratic_inverse(&c, &apply(h, &st.w))?);
            }
            f(st, j, &sinrs);
        }
    }
    Ok(())
}

/// SINR of every stream on every RB, in (user, stream, rb) order.
pub fn per_stream_snr(ch: &ChannelSet, w: &[Vec<CMatrix>]) -> Result<Vec<StreamSnr>> {
    let mut table = Vec::new();
    for_each_sinr(ch, w, |st, rb, s| {
        table.push(StreamSnr {
            user: st.user,
            stream: st.index,
            rb,
            sinr: s.iter().sum::<f64>() / s.len() as f64,
        })
    })?;
    table.sort_by_key(|e| (e.user, e.stream, e.rb));
    Ok(table)
}

/// `sum_l sum_j R_{l,j}` in bit/s/Hz.
pub fn sum_rate(ch: &ChannelSet, w: &[Vec<CMatrix>]) -> Result<f64> {
    let mut total = 0.0;
    for_each_sinr(ch, w, |_, _, s| {
        total += s.iter().map(|x| (1.0 + x).log2()).sum::<f64>() / s.len() as f64;
    })?;
    Ok(total)
}

/// `1 - R(w_cmp) / R(w_ref)`.
pub fn rate_loss(ch: &ChannelSet, w_ref: &[Vec<CMatrix>], w_cmp: &[Vec<CMatrix>]) -> Result<f64> {
    let r_ref = sum_rate(ch, w_ref)?;
    if r_ref == 0.0 {
        return Err(Error::ZeroReferenceRate);
    }
    Ok(1.0 - sum_rate(ch, w_cmp)? / r_ref)
}
