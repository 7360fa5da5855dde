//! `.stz` container.
//!
//! ```text
//! offset  size  field
//!  0       4    magic "STZ1"
//!  4       2    format version (u16)
//!  6       1    method (0 = STD+FC, 1 = STD, 2 = TD)
//!  7       1    flags (bit 0: column phases absorbed into the core)
//!  8      12    dims n1 n2 n3 (u32 each)
//! 20      12    ranks r1 r2 r3 (u32 each)
//! 32       8    s1 (f64)
//! 40       8    s2 (f64)
//! 48       1    bits_per_component
//! 49       1    angle_bits
//! 50       8    rle_rel_err_target (f64)
//! 58       4    section count N (u32)
//! 62     13N    per section: tag (u8), byte offset (u32), bit length (u32), crc32 (u32)
//! 62+13N   4    crc32 of all preceding header bytes
//! ```
//!
//! Integers and floats are little-endian. Each section starts on a byte
//! boundary and occupies `ceil(bit_length / 8)` bytes; padding bits are zero
//! and are not counted by [`CompressedBlob::bit_size`].

use crate::error::{Error, Result};

use super::quant::QuantizerSpec;

pub const MAGIC: &[u8; 4] = b"STZ1";
pub const FORMAT_VERSION: u16 = 1;
const FIXED_HEADER: usize = 62;
const ENTRY: usize = 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum SectionTag {
    CoreSparse = 1,
    ResidualSparse = 2,
    Angles1 = 3,
    Angles2 = 4,
    Angles3 = 5,
    Phases = 6,
    RawFactor1 = 7,
    RawFactor2 = 8,
    RawFactor3 = 9,
    DenseCore = 10,
}

impl SectionTag {
    pub fn from_u8(v: u8) -> Result<Self> {
        use SectionTag::*;
        Ok(match v {
            1 => CoreSparse,
            2 => ResidualSparse,
            3 => Angles1,
            4 => Angles2,
            5 => Angles3,
            6 => Phases,
            7 => RawFactor1,
            8 => RawFactor2,
            9 => RawFactor3,
            10 => DenseCore,
            other => return Err(Error::Malformed(format!("unknown section tag {other}"))),
        })
    }

    pub fn angles(mode: usize) -> Self {
        [SectionTag::Angles1, SectionTag::Angles2, SectionTag::Angles3][mode - 1]
    }

    pub fn raw_factor(mode: usize) -> Self {
        [SectionTag::RawFactor1, SectionTag::RawFactor2, SectionTag::RawFactor3][mode - 1]
    }

    pub fn name(self) -> &'static str {
        use SectionTag::*;
        match self {
            CoreSparse => "core",
            ResidualSparse => "residual",
            Angles1 => "angles-1",
            Angles2 => "angles-2",
            Angles3 => "angles-3",
            Phases => "phases",
            RawFactor1 => "factor-1",
            RawFactor2 => "factor-2",
            RawFactor3 => "factor-3",
            DenseCore => "dense-core",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum MethodCode {
    StdFc = 0,
    Std = 1,
    Td = 2,
}

impl MethodCode {
    pub fn from_u8(v: u8) -> Result<Self> {
        Ok(match v {
            0 => MethodCode::StdFc,
            1 => MethodCode::Std,
            2 => MethodCode::Td,
            other => return Err(Error::Malformed(format!("unknown method code {other}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlobMeta {
    pub method: MethodCode,
    pub flags: u8,
    pub dims: [usize; 3],
    pub ranks: [usize; 3],
    pub s1: f64,
    pub s2: f64,
    pub quant: QuantizerSpec,
}

pub const FLAG_PHASES_ABSORBED: u8 = 1;
pub const FLAG_ZERO_TENSOR: u8 = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub tag: SectionTag,
    pub bytes: Vec<u8>,
    pub bit_len: usize,
}

impl Section {
    pub fn new(tag: SectionTag, bytes: Vec<u8>, bit_len: usize) -> Self {
        debug_assert_eq!(bytes.len(), bit_len.div_ceil(8));
        Self { tag, bytes, bit_len }
    }

    pub fn empty(tag: SectionTag) -> Self {
        Self::new(tag, Vec::new(), 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompressedBlob {
    pub meta: BlobMeta,
    pub sections: Vec<Section>,
}

/// Assembles a blob from its sections.
pub fn blob_pack(meta: BlobMeta, sections: Vec<Section>) -> CompressedBlob {
    CompressedBlob { meta, sections }
}

/// Parses and verifies a serialized blob.
pub fn blob_unpack(bytes: &[u8]) -> Result<CompressedBlob> {
    CompressedBlob::from_bytes(bytes)
}

fn u32_at(b: &[u8], o: usize) -> u32 {
    u32::from_le_bytes(b[o..o + 4].try_into().unwrap())
}

fn f64_at(b: &[u8], o: usize) -> f64 {
    f64::from_le_bytes(b[o..o + 8].try_into().unwrap())
}

fn to_u32(x: usize, what: &str) -> u32 {
    u32::try_from(x).unwrap_or_else(|_| panic!("{what} {x} exceeds u32"))
}

impl CompressedBlob {
    pub fn header_len(&self) -> usize {
        FIXED_HEADER + ENTRY * self.sections.len() + 4
    }

    pub fn header_bits(&self) -> usize {
        8 * self.header_len()
    }

    /// Header bits plus the declared bit length of every section.
    pub fn bit_size(&self) -> usize {
        self.header_bits() + self.sections.iter().map(|s| s.bit_len).sum::<usize>()
    }

    pub fn section(&self, tag: SectionTag) -> Option<&Section> {
        self.sections.iter().find(|s| s.tag == tag)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let m = &self.meta;
        let mut out = Vec::with_capacity(self.header_len() + self.sections.iter().map(|s| s.bytes.len()).sum::<usize>());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(m.method as u8);
        out.push(m.flags);
        for d in m.dims.iter().chain(&m.ranks) {
            out.extend_from_slice(&to_u32(*d, "dimension").to_le_bytes());
        }
        out.extend_from_slice(&m.s1.to_le_bytes());
        out.extend_from_slice(&m.s2.to_le_bytes());
        out.push(m.quant.bits_per_component);
        out.push(m.quant.angle_bits);
        out.extend_from_slice(&m.quant.rle_rel_err_target.to_le_bytes());
        out.extend_from_slice(&to_u32(self.sections.len(), "section count").to_le_bytes());
        let mut offset = self.header_len();
        for s in &self.sections {
            out.push(s.tag as u8);
            out.extend_from_slice(&to_u32(offset, "section offset").to_le_bytes());
            out.extend_from_slice(&to_u32(s.bit_len, "section length").to_le_bytes());
            out.extend_from_slice(&crc32fast::hash(&s.bytes).to_le_bytes());
            offset += s.bytes.len();
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        for s in &self.sections {
            out.extend_from_slice(&s.bytes);
        }
        out
    }

    /// Reads only the fixed header fields (no checksum verification beyond
    /// magic and version); used for inspection.
    pub fn peek_meta(bytes: &[u8]) -> Result<(BlobMeta, u16)> {
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(Error::BadMagic { expected: "STZ1" });
        }
        if bytes.len() < 6 {
            return Err(Error::Truncated("blob version".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                found: version as u32,
                supported: FORMAT_VERSION as u32,
            });
        }
        if bytes.len() < FIXED_HEADER {
            return Err(Error::Truncated("blob header".into()));
        }
        let dim = |o: usize| u32_at(bytes, o) as usize;
        let meta = BlobMeta {
            method: MethodCode::from_u8(bytes[6])?,
            flags: bytes[7],
            dims: [dim(8), dim(12), dim(16)],
            ranks: [dim(20), dim(24), dim(28)],
            s1: f64_at(bytes, 32),
            s2: f64_at(bytes, 40),
            quant: QuantizerSpec {
                bits_per_component: bytes[48],
                angle_bits: bytes[49],
                rle_rel_err_target: f64_at(bytes, 50),
            },
        };
        Ok((meta, version))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (meta, _) = Self::peek_meta(bytes)?;
        let count = u32_at(bytes, 58) as usize;
        let header_len = count
            .checked_mul(ENTRY)
            .and_then(|x| x.checked_add(FIXED_HEADER + 4))
            .ok_or_else(|| Error::Malformed("section count overflow".into()))?;
        if bytes.len() < header_len {
            return Err(Error::Truncated(format!("header of {header_len} bytes, blob has {}", bytes.len())));
        }
        let stored = u32_at(bytes, header_len - 4);
        if crc32fast::hash(&bytes[..header_len - 4]) != stored {
            return Err(Error::Checksum("header".into()));
        }
        let mut sections = Vec::with_capacity(count);
        let mut expect_offset = header_len;
        for i in 0..count {
            let e = FIXED_HEADER + ENTRY * i;
            let tag = SectionTag::from_u8(bytes[e])?;
            let offset = u32_at(bytes, e + 1) as usize;
            let bit_len = u32_at(bytes, e + 5) as usize;
            let crc = u32_at(bytes, e + 9);
            if offset != expect_offset {
                return Err(Error::Malformed(format!("section {} at offset {offset}, expected {expect_offset}", tag.name())));
            }
            let len = bit_len.div_ceil(8);
            let end = offset + len;
            if end > bytes.len() {
                return Err(Error::Truncated(format!("section {} needs {len} bytes", tag.name())));
            }
            let body = &bytes[offset..end];
            if crc32fast::hash(body) != crc {
                return Err(Error::Checksum(format!("section {}", tag.name())));
            }
            sections.push(Section::new(tag, body.to_vec(), bit_len));
            expect_offset = end;
        }
        if expect_offset != bytes.len() {
            return Err(Error::Malformed(format!("{} trailing bytes", bytes.len() - expect_offset)));
        }
        Ok(Self { meta, sections })
    }
}
