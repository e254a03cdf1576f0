//! Sweeps, parallel Monte Carlo campaigns, file formats and the CLI for the
//! sensing-throughput tradeoff. The models live in `sensing-tradeoff-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaign;
pub mod cli;
pub mod config;
pub mod output;
pub mod sweep;
