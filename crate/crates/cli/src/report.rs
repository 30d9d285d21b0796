//! `report`: rebuild the convergence table of a finished run from its CSVs.

use std::fs;
use std::path::Path;

use idslab::convergence::{convergence_report, ConvergenceReport};
use idslab::io::step_function_from_csv;
use idslab::spectra::{IdsEstimate, RealizationCounting};
use thiserror::Error;

use crate::config::{self, ConfigError};
use crate::manifest::{read_manifest, verify_files};
use crate::pipeline::IdsRecord;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("echoed config: {0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Core { path: String, source: idslab::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("files changed since the run: {}", .0.join(", "))]
    Tampered(Vec<String>),
    #[error("run is incomplete")]
    Incomplete,
}

#[derive(Debug)]
pub struct Rederived {
    pub manifest_hash: String,
    pub report: Option<ConvergenceReport>,
    /// Whether the rebuilt table equals the stored `convergence.csv`.
    pub matches_stored: Option<bool>,
}

fn load_ids(dir: &Path, record: &IdsRecord) -> Result<IdsEstimate, ReportError> {
    let read = |rel: &str| -> Result<_, ReportError> {
        let text = fs::read_to_string(dir.join(rel))?;
        step_function_from_csv(&text).map_err(|source| ReportError::Core { path: rel.to_string(), source })
    };
    let realizations = record
        .realizations
        .iter()
        .map(|m| Ok(RealizationCounting { seed: m.seed, active: m.active, function: read(&m.csv)? }))
        .collect::<Result<Vec<_>, ReportError>>()?;
    let pooled = match &record.pooled_csv {
        Some(rel) => read(rel)?,
        None => realizations[0].function.clone(),
    };
    Ok(IdsEstimate {
        n: record.n,
        normalizer: record.normalizer,
        realizations,
        pooled,
        density: record.density,
        merge_tolerance: record.merge_tolerance,
    })
}

pub fn rederive(dir: &Path) -> Result<Rederived, ReportError> {
    if dir.join(crate::manifest::INCOMPLETE).exists() {
        return Err(ReportError::Incomplete);
    }
    let (manifest, manifest_hash) = read_manifest(dir)?;
    let changed = verify_files(dir, &manifest);
    if !changed.is_empty() {
        return Err(ReportError::Tampered(changed));
    }
    let echo: String = manifest.config.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    let cfg = config::parse(&echo)?;
    let mut sequence = Vec::new();
    for n in &cfg.windows {
        let rel = format!("ids/n{n}.json");
        let text = fs::read_to_string(dir.join(&rel))?;
        let record: IdsRecord = serde_json::from_str(&text).map_err(|source| ReportError::Json { path: rel, source })?;
        sequence.push(load_ids(dir, &record)?);
    }
    if sequence.len() < 2 {
        return Ok(Rederived { manifest_hash, report: None, matches_stored: None });
    }
    let lambdas: Vec<f64> = cfg.lambdas.iter().map(|l| l.value()).collect();
    let report = convergence_report(&cfg.name, &sequence, cfg.reference, &lambdas)
        .map_err(|source| ReportError::Core { path: "ids".into(), source })?;
    let matches_stored = fs::read_to_string(dir.join("convergence.csv")).ok().map(|s| s == report.to_csv());
    Ok(Rederived { manifest_hash, report: Some(report), matches_stored })
}
