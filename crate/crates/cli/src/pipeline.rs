//! `run`: sample, restrict, count, bound jumps and compare window sizes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use idslab::convergence::{convergence_report, ConvergenceReport};
use idslab::geometry::{boundary_shell, FolnerBox, PointSet};
use idslab::io::step_function_to_csv;
use idslab::jumps::{candidate_jump_scan, jump_sandwich, JumpEstimate, Mode};
use idslab::models::{build_operator, density_estimate, OperatorRealization};
use idslab::spectra::{ids_estimate, moment_gap, trace_estimate, IdsEstimate, MomentGap, Normalizer, TraceFunction};
use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::config::{CarrierConfig, ExperimentConfig};
use crate::manifest::{Manifest, OutputDir};
use crate::validate::{build_boxes, build_carrier, has_fatal, validate, Diagnostic};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config rejected")]
    Config(Vec<Diagnostic>),
    #[error(transparent)]
    Core(#[from] idslab::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("moment bound violated at n = {n}, seed = {seed}, k = {k}: {lhs} > {bound}")]
    MomentViolation { n: usize, seed: u64, k: usize, lhs: f64, bound: f64 },
}

impl RunError {
    /// 2 for config errors, 3 for failed numerical consistency checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Core(idslab::Error::SandwichViolation { .. }) | RunError::MomentViolation { .. } => 3,
            _ => 1,
        }
    }
}

/// One realization's counting CSV inside an `ids/n*.json` record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdsMember {
    pub seed: u64,
    pub active: usize,
    pub csv: String,
}

/// `ids/n{n}.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdsRecord {
    pub n: usize,
    pub normalizer: Normalizer,
    pub density: f64,
    pub merge_tolerance: f64,
    pub realizations: Vec<IdsMember>,
    /// Absent for a single realization, whose function is the pooled one.
    pub pooled_csv: Option<String>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub manifest_hash: String,
}

pub fn counting_path(n: usize, seed: Option<u64>) -> String {
    match seed {
        Some(s) => format!("counting/n{n}_seed{s}.csv"),
        None => format!("counting/n{n}_pooled.csv"),
    }
}

pub fn sample(cfg: &ExperimentConfig, carrier: &std::sync::Arc<PointSet>) -> idslab::Result<Vec<OperatorRealization>> {
    cfg.seed_list().par_iter().map(|&s| build_operator(&cfg.model, carrier.clone(), s)).collect()
}

fn ids_record(ids: &IdsEstimate) -> IdsRecord {
    IdsRecord {
        n: ids.n,
        normalizer: ids.normalizer,
        density: ids.density,
        merge_tolerance: ids.merge_tolerance,
        realizations: ids
            .realizations
            .iter()
            .map(|r| IdsMember { seed: r.seed, active: r.active, csv: counting_path(ids.n, Some(r.seed)) })
            .collect(),
        pooled_csv: (ids.len() > 1).then(|| counting_path(ids.n, None)),
    }
}

/// `(n, mean over seeds of ω(∂^R Λ_n)/|I_n|)`.
fn boundary_ratios(ops: &[OperatorRealization], boxes: &[FolnerBox], range: f64) -> Vec<(usize, f64)> {
    boxes
        .iter()
        .map(|bx| {
            let shell = boundary_shell(ops[0].carrier(), &bx.window, range);
            let total: usize = ops.iter().map(|op| op.weight(&shell)).sum();
            (bx.n, total as f64 / ops.len() as f64 / bx.volume)
        })
        .collect()
}

fn jumps_csv(rows: &[JumpEstimate]) -> String {
    let mut s = format!("{}\n", JumpEstimate::CSV_HEADER);
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// Dens(m) used to normalize traces.
fn trace_density(cfg: &ExperimentConfig, ids: &IdsEstimate) -> f64 {
    match (&cfg.carrier, cfg.model.density_hint) {
        (_, Some(d)) => d,
        (CarrierConfig::Lattice { .. }, None) => cfg.model.lattice_density(),
        (CarrierConfig::Delone { .. }, None) => ids.density,
    }
}

pub fn run(cfg: &ExperimentConfig, mode: Mode, dir: &Path) -> Result<RunOutcome, RunError> {
    let diags = validate(cfg, mode);
    if has_fatal(&diags) {
        return Err(RunError::Config(diags));
    }
    let carrier = build_carrier(cfg)?;
    let boxes = build_boxes(cfg, &carrier)?;
    let mut out = OutputDir::create(dir)?;
    info!("sampling {} realizations on {} points", cfg.seeds, carrier.len());
    let ops = sample(cfg, &carrier)?;

    let mut sequence = Vec::with_capacity(boxes.len());
    for bx in &boxes {
        info!("counting functions at n = {}", bx.n);
        let ids = ids_estimate(&ops, bx, cfg.normalizer)?;
        for r in &ids.realizations {
            out.write(&counting_path(bx.n, Some(r.seed)), step_function_to_csv(&r.function).as_bytes())?;
        }
        if ids.len() > 1 {
            out.write(&counting_path(bx.n, None), step_function_to_csv(&ids.pooled).as_bytes())?;
        }
        let record = serde_json::to_string_pretty(&ids_record(&ids)).expect("record serializes");
        out.write(&format!("ids/n{}.json", bx.n), format!("{record}\n").as_bytes())?;
        sequence.push(ids);
    }

    let mut density = String::from("n,seed,density\n");
    for est in density_estimate(&ops, &boxes)? {
        for (n, d) in &est.series {
            let _ = writeln!(density, "{n},{},{d}", est.seed);
        }
    }
    out.write("density.csv", density.as_bytes())?;

    let jobs: Vec<(usize, usize, usize)> = (0..boxes.len())
        .flat_map(|b| (0..ops.len()).flat_map(move |s| (0..cfg.lambdas.len()).map(move |l| (b, s, l))))
        .collect();
    info!("{} jump sandwiches in {} mode", jobs.len(), mode.name());
    let jumps: Vec<JumpEstimate> = jobs
        .par_iter()
        .map(|&(b, s, l)| jump_sandwich(&ops[s], &boxes[b], &cfg.lambdas[l], mode))
        .collect::<idslab::Result<_>>()?;
    out.write("jumps.csv", jumps_csv(&jumps).as_bytes())?;

    let mut candidate_rows = 0;
    if let Some(threshold) = cfg.threshold {
        let mut s = String::from("n,lambda,mass\n");
        for ids in &sequence {
            for (lambda, mass) in candidate_jump_scan(ids, threshold) {
                let _ = writeln!(s, "{},{lambda},{mass}", ids.n);
                candidate_rows += 1;
            }
        }
        out.write("candidates.csv", s.as_bytes())?;
    }

    let mut report: Option<ConvergenceReport> = None;
    if sequence.len() > 1 {
        let lambdas: Vec<f64> = cfg.lambdas.iter().map(|l| l.value()).collect();
        let r = convergence_report(&cfg.name, &sequence, cfg.reference, &lambdas)?
            .with_boundary_ratios(boundary_ratios(&ops, &boxes, cfg.model.hopping_range));
        out.write("convergence.csv", r.to_csv().as_bytes())?;
        let text = serde_json::to_string_pretty(&r).expect("report serializes");
        out.write("convergence.json", format!("{text}\n").as_bytes())?;
        report = Some(r);
    }

    if cfg.moments > 0 {
        let jobs: Vec<(usize, usize, usize)> = (0..boxes.len())
            .flat_map(|b| (0..ops.len()).flat_map(move |s| (1..=cfg.moments).map(move |k| (b, s, k))))
            .collect();
        let gaps: Vec<MomentGap> =
            jobs.par_iter().map(|&(b, s, k)| moment_gap(&ops[s], &boxes[b], k)).collect::<idslab::Result<_>>()?;
        let mut s = String::from("n,seed,k,lhs,bound\n");
        for (&(b, o, _), g) in jobs.iter().zip(&gaps) {
            let _ = writeln!(s, "{},{},{},{},{}", boxes[b].n, ops[o].seed(), g.k, g.lhs, g.bound);
        }
        out.write("moments.csv", s.as_bytes())?;
        if let Some((&(b, o, _), g)) = jobs.iter().zip(&gaps).find(|(_, g)| !g.holds()) {
            return Err(RunError::MomentViolation { n: boxes[b].n, seed: ops[o].seed(), k: g.k, lhs: g.lhs, bound: g.bound });
        }
        let mut s = String::from("n,k,mean,std_error\n");
        for (bx, ids) in boxes.iter().zip(&sequence) {
            let dens = trace_density(cfg, ids);
            for k in 0..=cfg.moments {
                let t = trace_estimate(&ops, bx, &TraceFunction::monomial(k), dens)?;
                let _ = writeln!(s, "{},{k},{},{}", bx.n, t.mean, t.std_error);
            }
        }
        out.write("trace.csv", s.as_bytes())?;
    }

    let mut summary = BTreeMap::new();
    summary.insert("windows".to_string(), json!(cfg.windows));
    summary.insert("seeds".to_string(), json!(cfg.seeds));
    summary.insert("active_sites".to_string(), json!(sequence.iter().map(|ids| {
        ids.realizations.iter().map(|r| r.active).sum::<usize>()
    }).collect::<Vec<_>>()));
    summary.insert("jump_rows".to_string(), json!(jumps.len()));
    summary.insert("candidates".to_string(), json!(candidate_rows));
    if let Some(r) = &report {
        summary.insert("pooled_sup_distance".to_string(), json!(r.pooled_distances()));
        summary.insert("trend_holds".to_string(), json!(r.trend_holds()));
    }
    let manifest = Manifest {
        schema: 1,
        status: "complete".into(),
        name: cfg.name.clone(),
        config: cfg.entries.clone(),
        mode: mode.name().into(),
        files: Vec::new(),
        summary,
    };
    let files = out.entries();
    let hash = out.finish(manifest.clone())?;
    Ok(RunOutcome { dir: dir.to_path_buf(), manifest: Manifest { files, ..manifest }, manifest_hash: hash })
}

/// `generate`: the carrier patch and one triplet dump per seed.
pub fn generate(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let carrier = build_carrier(cfg)?;
    let ops = sample(cfg, &carrier)?;
    std::fs::create_dir_all(dir.join("realizations"))?;
    let mut written = vec![dir.join("carrier.txt")];
    std::fs::write(&written[0], carrier.to_text())?;
    for op in &ops {
        let path = dir.join(format!("realizations/seed{}.txt", op.seed()));
        std::fs::write(&path, op.to_triplet_text())?;
        written.push(path);
    }
    Ok(written)
}
