//! Experiment driver for `idslab`: config parsing, validation, the run
//! pipeline and output manifests.

pub mod config;
pub mod manifest;
pub mod pipeline;
pub mod report;
pub mod validate;
