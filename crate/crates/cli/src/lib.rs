//! Data ingest, synthetic data, experiment sweeps and the command line of the
//! `mvbeta` binary.

pub mod commands;
pub mod config;
pub mod demo;
pub mod experiment;
pub mod manifest;
pub mod synth;
