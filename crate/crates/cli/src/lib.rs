//! Command-line front end: `compress`, `decompress`, `eval`, `inspect`.

pub mod commands;
pub mod exit;
pub mod manifest;
pub mod overrides;
