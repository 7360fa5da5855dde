//! Evaluation harness: synthetic channels, zero-forcing weights, rate
//! metrics and parameter sweeps.

pub mod channel;
pub mod rate;
pub mod scenario;
pub mod zf;

pub use channel::{synth_channels, ChannelModel, ChannelSet, ChannelSpec};
pub use rate::{per_stream_snr, rate_loss, sum_rate, StreamSnr};
pub use scenario::{best_in_band, run_scenario, ReportRow, ScenarioConfig, ScenarioReport, SolverOptions};
pub use zf::{weights_from_tensors, zf_identity_defect, zf_weights, WeightSet};
