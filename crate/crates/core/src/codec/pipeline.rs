//! End-to-end compression of a weight tensor into a [`CompressedBlob`].
//!
//! * `STD+FC`: sparse Tucker, column phases folded into the core, factors as
//!   coded Givens angles, core and residual as sparse payloads.
//! * `STD`: sparse Tucker with factors stored as raw quantized entries.
//! * `TD`: truncated HOSVD, dense core and raw factors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::givens::{absorb_phases, givens_decompose_with_phases, givens_reconstruct};
use crate::linalg::{CMatrix, FactorMatrix, C64, ZERO};
use crate::solver::{apbcd_solve, DescentTrace, StdConfig};
use crate::tensor::ComplexTensor3;
use crate::tucker::{hosvd, project_core, tucker_reconstruct};

use super::angles::{decode_angles, encode_angles};
use super::bits::{BitReader, BitWriter};
use super::blob::{
    blob_pack, BlobMeta, CompressedBlob, MethodCode, Section, SectionTag, FLAG_PHASES_ABSORBED, FLAG_ZERO_TENSOR,
};
use super::quant::QuantizerSpec;
use super::sparse::{encode_sparse, QuantizedValues, SparsePayload};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[default]
    #[serde(rename = "STD+FC")]
    StdFc,
    #[serde(rename = "STD")]
    Std,
    #[serde(rename = "TD")]
    Td,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::StdFc, Method::Std, Method::Td];

    pub fn label(self) -> &'static str {
        match self {
            Method::StdFc => "STD+FC",
            Method::Std => "STD",
            Method::Td => "TD",
        }
    }

    fn code(self) -> MethodCode {
        match self {
            Method::StdFc => MethodCode::StdFc,
            Method::Std => MethodCode::Std,
            Method::Td => MethodCode::Td,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown method {s:?} (expected STD+FC, STD or TD)")))
    }
}

fn default_refit() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodecConfig {
    #[serde(default)]
    pub method: Method,
    pub solver: StdConfig,
    #[serde(default)]
    pub quant: QuantizerSpec,
    /// Re-fit core and residual values on their supports against the
    /// decoded factors before quantizing them.
    #[serde(default = "default_refit")]
    pub refit: bool,
}

impl CodecConfig {
    pub fn new(method: Method, solver: StdConfig) -> Self {
        Self {
            method,
            solver,
            quant: QuantizerSpec::default(),
            refit: true,
        }
    }

    pub fn validate(&self, dims: [usize; 3]) -> Result<()> {
        self.quant.validate()?;
        self.solver.validate(dims)
    }
}

/// A blob together with what produced it.
#[derive(Clone, Debug)]
pub struct Compressed {
    pub blob: CompressedBlob,
    pub trace: Option<DescentTrace>,
    /// Nonzeros of the stored core and residual.
    pub nnz_core: usize,
    pub nnz_residual: usize,
    /// Largest relative error among the coded factors.
    pub factor_rel_err: f64,
}

/// Bits of the raw tensor at `bits_per_component`.
pub fn reference_bits(dims: [usize; 3], bits_per_component: u8) -> usize {
    2 * bits_per_component as usize * dims.iter().product::<usize>()
}

/// Exact ratio of blob bits to raw tensor bits.
pub fn compression_ratio(blob: &CompressedBlob) -> f64 {
    blob.bit_size() as f64 / reference_bits(blob.meta.dims, blob.meta.quant.bits_per_component) as f64
}

/// Stage-1 coefficient count bound `(a1 + a2 + sum r_i n_i) / prod n_i`.
pub fn coefficient_cr_bound(dims: [usize; 3], ranks: [usize; 3], alpha1: usize, alpha2: usize) -> f64 {
    let factors: usize = (0..3).map(|i| ranks[i] * dims[i]).sum();
    (alpha1 + alpha2 + factors) as f64 / dims.iter().product::<usize>() as f64
}

/// Stage-1 coefficient ratio of what was actually stored.
pub fn coefficient_cr(c: &Compressed) -> f64 {
    let m = &c.blob.meta;
    coefficient_cr_bound(m.dims, m.ranks, c.nnz_core, c.nnz_residual)
}

fn to_section(tag: SectionTag, write: impl FnOnce(&mut BitWriter)) -> Section {
    let mut w = BitWriter::new();
    write(&mut w);
    let (bytes, bit_len) = w.finish();
    Section::new(tag, bytes, bit_len)
}

fn raw_factor_section(mode: usize, u: &FactorMatrix, bits: u8) -> Section {
    to_section(SectionTag::raw_factor(mode), |w| QuantizedValues::encode(u.data(), bits).write(w))
}

fn mask_of(t: &ComplexTensor3) -> Vec<bool> {
    t.data().iter().map(|z| *z != ZERO).collect()
}

fn restrict(t: &ComplexTensor3, mask: &[bool]) -> ComplexTensor3 {
    let mut out = t.clone();
    for (z, &m) in out.data_mut().iter_mut().zip(mask) {
        if !m {
            *z = ZERO;
        }
    }
    out
}

/// One alternating pass: core values on their support from the projection
/// of `v - s`, then residual values on their support from `v - low rank`.
fn refit(
    v: &ComplexTensor3,
    core: &ComplexTensor3,
    residual: &ComplexTensor3,
    u: &[FactorMatrix; 3],
) -> Result<(ComplexTensor3, ComplexTensor3)> {
    let core_mask = mask_of(core);
    let res_mask = mask_of(residual);
    let g = restrict(&project_core(&v.sub(residual)?, u)?, &core_mask);
    let s = restrict(&v.sub(&tucker_reconstruct(&g, u)?)?, &res_mask);
    Ok((g, s))
}

/// An all-zero residual is stored as an empty section.
fn sparse_section(tag: SectionTag, t: &ComplexTensor3, bits: u8) -> (Section, usize) {
    if tag == SectionTag::ResidualSparse && t.data().iter().all(|z| *z == ZERO) {
        return (Section::empty(tag), 0);
    }
    let p = encode_sparse(t, bits);
    let nnz = p.nnz();
    (to_section(tag, |w| p.write(w)), nnz)
}

/// Compresses `v` according to `cfg`.
pub fn compress(v: &ComplexTensor3, cfg: &CodecConfig) -> Result<Compressed> {
    let dims = v.dims();
    cfg.validate(dims)?;
    if !v.is_finite() {
        return Err(Error::NonFinite("input tensor"));
    }
    let q = cfg.quant;
    let ranks = cfg.solver.ranks;
    let mut meta = BlobMeta {
        method: cfg.method.code(),
        flags: 0,
        dims,
        ranks,
        s1: cfg.solver.s1,
        s2: cfg.solver.s2,
        quant: q,
    };
    if cfg.method == Method::Td {
        meta.s1 = 1.0;
        meta.s2 = 0.0;
    }
    if v.data().iter().all(|z| *z == ZERO) {
        meta.flags |= FLAG_ZERO_TENSOR;
        return Ok(Compressed {
            blob: blob_pack(meta, Vec::new()),
            trace: None,
            nnz_core: 0,
            nnz_residual: 0,
            factor_rel_err: 0.0,
        });
    }
    let bits = q.bits_per_component;

    match cfg.method {
        Method::Td => {
            let t = hosvd(v, ranks)?;
            let mut sections = vec![to_section(SectionTag::DenseCore, |w| {
                QuantizedValues::encode(t.core.data(), bits).write(w)
            })];
            for m in 0..3 {
                sections.push(raw_factor_section(m + 1, &t.factors[m], bits));
            }
            Ok(Compressed {
                blob: blob_pack(meta, sections),
                trace: None,
                nnz_core: t.core.numel(),
                nnz_residual: 0,
                factor_rel_err: 0.0,
            })
        }
        Method::StdFc => {
            let (st, trace) = apbcd_solve(v, &cfg.solver)?;
            let mut core = st.core.clone();
            let mut decoded: Vec<FactorMatrix> = Vec::with_capacity(3);
            let mut streams = Vec::with_capacity(3);
            let mut factor_rel_err = 0.0f64;
            for m in 0..3 {
                let (p, phases) = givens_decompose_with_phases(&st.factors[m])?;
                core = absorb_phases(&core, m + 1, &phases)?;
                let s = encode_angles(&p, &q)?;
                factor_rel_err = factor_rel_err.max(s.rel_err);
                decoded.push(givens_reconstruct(&decode_angles(&s.bytes, s.bit_len, dims[m], ranks[m])?)?);
                streams.push(s);
            }
            let decoded: [FactorMatrix; 3] = decoded.try_into().expect("three factors");
            let (core, residual) = if cfg.refit {
                refit(v, &core, &st.residual, &decoded)?
            } else {
                (core, st.residual.clone())
            };
            let (core_sec, nnz_core) = sparse_section(SectionTag::CoreSparse, &core, bits);
            let (res_sec, nnz_residual) = sparse_section(SectionTag::ResidualSparse, &residual, bits);
            let mut sections = vec![core_sec, res_sec];
            for (m, s) in streams.into_iter().enumerate() {
                sections.push(Section::new(SectionTag::angles(m + 1), s.bytes, s.bit_len));
            }
            sections.push(Section::empty(SectionTag::Phases));
            meta.flags |= FLAG_PHASES_ABSORBED;
            Ok(Compressed {
                blob: blob_pack(meta, sections),
                trace: Some(trace),
                nnz_core,
                nnz_residual,
                factor_rel_err,
            })
        }
        Method::Std => {
            let (st, trace) = apbcd_solve(v, &cfg.solver)?;
            let mut sections = Vec::with_capacity(5);
            let mut decoded: Vec<FactorMatrix> = Vec::with_capacity(3);
            let mut factor_rel_err = 0.0f64;
            for m in 0..3 {
                let u = &st.factors[m];
                let qv = QuantizedValues::encode(u.data(), bits);
                let back = CMatrix::from_col_major(u.rows(), u.cols(), qv.decode())?;
                factor_rel_err = factor_rel_err.max(back.sub(u).frobenius_norm() / u.frobenius_norm());
                decoded.push(back);
                sections.push(to_section(SectionTag::raw_factor(m + 1), |w| qv.write(w)));
            }
            let decoded: [FactorMatrix; 3] = decoded.try_into().expect("three factors");
            let (core, residual) = if cfg.refit {
                refit(v, &st.core, &st.residual, &decoded)?
            } else {
                (st.core.clone(), st.residual.clone())
            };
            let (core_sec, nnz_core) = sparse_section(SectionTag::CoreSparse, &core, bits);
            let (res_sec, nnz_residual) = sparse_section(SectionTag::ResidualSparse, &residual, bits);
            sections.insert(0, res_sec);
            sections.insert(0, core_sec);
            Ok(Compressed {
                blob: blob_pack(meta, sections),
                trace: Some(trace),
                nnz_core,
                nnz_residual,
                factor_rel_err,
            })
        }
    }
}

fn section<'a>(blob: &'a CompressedBlob, tag: SectionTag) -> Result<&'a Section> {
    blob.section(tag)
        .ok_or_else(|| Error::Malformed(format!("missing section {}", tag.name())))
}

fn reader(s: &Section) -> Result<BitReader<'_>> {
    BitReader::new(&s.bytes, s.bit_len)
}

fn expect_consumed(r: &BitReader<'_>, s: &Section) -> Result<()> {
    if r.remaining() != 0 {
        return Err(Error::Malformed(format!("{} unread bits in section {}", r.remaining(), s.tag.name())));
    }
    Ok(())
}

fn read_sparse(blob: &CompressedBlob, tag: SectionTag, dims: [usize; 3]) -> Result<ComplexTensor3> {
    let s = section(blob, tag)?;
    if tag == SectionTag::ResidualSparse && s.bit_len == 0 {
        return Ok(ComplexTensor3::zeros(dims));
    }
    let mut r = reader(s)?;
    let p = SparsePayload::read(&mut r, dims, blob.meta.quant.bits_per_component)?;
    expect_consumed(&r, s)?;
    p.decode()
}

fn read_values(blob: &CompressedBlob, tag: SectionTag, count: usize) -> Result<Vec<C64>> {
    let s = section(blob, tag)?;
    let mut r = reader(s)?;
    let v = QuantizedValues::read(&mut r, count, blob.meta.quant.bits_per_component)?;
    expect_consumed(&r, s)?;
    Ok(v.decode())
}

fn read_raw_factors(blob: &CompressedBlob) -> Result<[FactorMatrix; 3]> {
    let m = &blob.meta;
    let mut out = Vec::with_capacity(3);
    for i in 0..3 {
        let data = read_values(blob, SectionTag::raw_factor(i + 1), m.dims[i] * m.ranks[i])?;
        out.push(CMatrix::from_col_major(m.dims[i], m.ranks[i], data)?);
    }
    Ok(out.try_into().expect("three factors"))
}

fn check_meta(m: &BlobMeta) -> Result<()> {
    m.quant
        .validate()
        .map_err(|e| Error::Malformed(format!("header quantizer settings: {e}")))?;
    for i in 0..3 {
        if m.dims[i] == 0 || m.ranks[i] == 0 || m.ranks[i] > m.dims[i] {
            return Err(Error::Malformed(format!("header shape {:?} with ranks {:?}", m.dims, m.ranks)));
        }
    }
    Ok(())
}

/// Reconstructs the tensor stored in `blob`.
pub fn decompress(blob: &CompressedBlob) -> Result<ComplexTensor3> {
    let m = &blob.meta;
    check_meta(m)?;
    if m.flags & FLAG_ZERO_TENSOR != 0 {
        return Ok(ComplexTensor3::zeros(m.dims));
    }
    match m.method {
        MethodCode::Td => {
            let core = ComplexTensor3::new(m.ranks, read_values(blob, SectionTag::DenseCore, m.ranks.iter().product())?)?;
            tucker_reconstruct(&core, &read_raw_factors(blob)?)
        }
        MethodCode::Std => {
            let core = read_sparse(blob, SectionTag::CoreSparse, m.ranks)?;
            let residual = read_sparse(blob, SectionTag::ResidualSparse, m.dims)?;
            tucker_reconstruct(&core, &read_raw_factors(blob)?)?.add(&residual)
        }
        MethodCode::StdFc => {
            if m.flags & FLAG_PHASES_ABSORBED == 0 {
                return Err(Error::Malformed("column phases not absorbed into the core".into()));
            }
            let core = read_sparse(blob, SectionTag::CoreSparse, m.ranks)?;
            let residual = read_sparse(blob, SectionTag::ResidualSparse, m.dims)?;
            let mut factors = Vec::with_capacity(3);
            for i in 0..3 {
                let s = section(blob, SectionTag::angles(i + 1))?;
                factors.push(givens_reconstruct(&decode_angles(&s.bytes, s.bit_len, m.dims[i], m.ranks[i])?)?);
            }
            let factors: [FactorMatrix; 3] = factors.try_into().expect("three factors");
            tucker_reconstruct(&core, &factors)?.add(&residual)
        }
    }
}

/// Plain Tucker truncation baseline: returns the blob and its decoding.
pub fn td_baseline(v: &ComplexTensor3, ranks: [usize; 3], q: QuantizerSpec) -> Result<(CompressedBlob, ComplexTensor3)> {
    let cfg = CodecConfig {
        method: Method::Td,
        solver: StdConfig::new(ranks, 1.0, 0.0),
        quant: q,
        refit: false,
    };
    let c = compress(v, &cfg)?;
    let d = decompress(&c.blob)?;
    Ok((c.blob, d))
}
