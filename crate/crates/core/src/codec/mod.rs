//! Stage-2 coding: quantizers, sparse payloads, Givens angle streams and
//! the `.stz` container.

pub mod angles;
pub mod bits;
pub mod blob;
pub mod pipeline;
pub mod quant;
pub mod sparse;

pub use angles::{decode_angles, encode_angles, AngleStream};
pub use blob::{blob_pack, blob_unpack, BlobMeta, CompressedBlob, MethodCode, Section, SectionTag};
pub use quant::QuantizerSpec;
pub use sparse::{encode_sparse, QuantizedValues, SparsePayload};
pub use pipeline::{
    coefficient_cr, coefficient_cr_bound, compress, compression_ratio, decompress, reference_bits, td_baseline,
    CodecConfig, Compressed, Method,
};
