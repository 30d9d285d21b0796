use std::fmt;
use std::sync::Arc;

use idslab::geometry::{folner_box_at, generate_delone, generate_lattice, FolnerBox, PointSet};
use idslab::jumps::Mode;
use idslab::models::{Dilution, Kernel};
use idslab::convergence::{AnalyticIds, Reference};
use serde::Serialize;

use crate::config::{Anchor, CarrierConfig, ExperimentConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Fatal,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Fatal => "error",
            Severity::Warning => "warning",
        };
        match self.line {
            Some(line) => write!(f, "{tag}: line {line}: {}", self.message),
            None => write!(f, "{tag}: {}", self.message),
        }
    }
}

pub fn has_fatal(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Fatal)
}

pub fn build_carrier(cfg: &ExperimentConfig) -> idslab::Result<Arc<PointSet>> {
    Ok(Arc::new(match &cfg.carrier {
        CarrierConfig::Lattice { dim, extent } => generate_lattice(*dim, *extent)?,
        CarrierConfig::Delone { spec, extent } => generate_delone(spec, *extent)?,
    }))
}

/// Origin of the size-`n` box for the configured anchor.
pub fn box_origin(cfg: &ExperimentConfig, carrier: &PointSet, n: usize) -> Vec<f64> {
    let (lo, hi) = carrier.region();
    match (cfg.anchor, &cfg.carrier) {
        (Anchor::Origin, _) => vec![0.0; carrier.dim()],
        // integer origins keep lattice boxes aligned
        (Anchor::Centered, CarrierConfig::Lattice { .. }) => {
            lo.iter().zip(hi).map(|(l, h)| ((l + h) / 2.0).floor() - (n / 2) as f64).collect()
        }
        (Anchor::Centered, CarrierConfig::Delone { .. }) => {
            lo.iter().zip(hi).map(|(l, h)| (l + h - n as f64) / 2.0).collect()
        }
    }
}

pub fn build_boxes(cfg: &ExperimentConfig, carrier: &PointSet) -> idslab::Result<Vec<FolnerBox>> {
    cfg.windows.iter().map(|&n| folner_box_at(carrier, &box_origin(cfg, carrier, n), n)).collect()
}

/// Smallest `carrier.extent` leaving `reach` on every side of the size-`n` box.
pub fn required_extent(cfg: &ExperimentConfig, n: usize, reach: f64) -> f64 {
    match (cfg.anchor, &cfg.carrier) {
        (Anchor::Centered, CarrierConfig::Lattice { .. }) => (n - n / 2) as f64 + reach.ceil(),
        (Anchor::Origin, CarrierConfig::Lattice { .. }) => n as f64 + reach.ceil(),
        (Anchor::Centered, CarrierConfig::Delone { .. }) => n as f64 + 2.0 * reach,
        (Anchor::Origin, CarrierConfig::Delone { .. }) => f64::INFINITY,
    }
}

/// Spatial reach of every requested operation: `max(1, moments) · R`.
pub fn reach(cfg: &ExperimentConfig) -> f64 {
    cfg.moments.max(1) as f64 * cfg.model.hopping_range
}

/// Checks a parsed config. `mode` overrides `analysis.mode`.
pub fn validate(cfg: &ExperimentConfig, mode: Mode) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let fatal = |out: &mut Vec<Diagnostic>, line: Option<usize>, message: String| {
        out.push(Diagnostic { severity: Severity::Fatal, line, message })
    };
    let warn = |out: &mut Vec<Diagnostic>, line: Option<usize>, message: String| {
        out.push(Diagnostic { severity: Severity::Warning, line, message })
    };
    let carrier = match build_carrier(cfg) {
        Ok(c) => Some(c),
        Err(e) => {
            fatal(&mut out, cfg.line_of("carrier.kind").or(cfg.line_of("carrier.extent")), format!("carrier: {e}"));
            None
        }
    };
    if let Some(carrier) = &carrier {
        if let Err(e) = cfg.model.validate(carrier) {
            fatal(&mut out, cfg.line_of("model.kernel"), format!("model: {e}"));
        }
        let reach = reach(cfg);
        let extent_line = cfg.line_of("carrier.extent");
        for &n in &cfg.windows {
            let needed = required_extent(cfg, n, reach);
            let ok = folner_box_at(carrier, &box_origin(cfg, carrier, n), n)
                .map(|bx| bx.margin(carrier) + 1e-9 >= reach)
                .unwrap_or(false);
            if !ok {
                let msg = if needed.is_finite() {
                    format!("window n = {n} needs carrier.extent >= {needed} (margin {reach} on every side)")
                } else {
                    format!("window n = {n} anchored at the origin leaves no margin on a Delone patch; use windows.anchor = centered")
                };
                fatal(&mut out, extent_line.or(cfg.line_of("windows.n")), msg);
            }
        }
    }
    if mode == Mode::ExactRational {
        let line = cfg.line_of("lambdas.values");
        for level in cfg.lambdas.iter().filter(|l| !l.is_rational()) {
            fatal(&mut out, line, format!("level {} is irrational; exact mode needs rational levels", level.label()));
        }
        if cfg.model.flux != 0.0 && cfg.model.flux != 0.5 {
            fatal(&mut out, cfg.line_of("model.flux"), format!("flux {} gives complex entries; exact mode needs real ones", cfg.model.flux));
        }
    }
    let density_line = cfg.line_of("model.density");
    match (cfg.model.density_hint, &cfg.carrier, cfg.model.dilution) {
        (Some(d), _, _) if !(d > 0.0) => {
            fatal(&mut out, density_line, format!("model.density {d} must be positive"))
        }
        (Some(d), CarrierConfig::Lattice { .. }, Dilution::Site { p }) if (d - p).abs() > 1e-12 => {
            warn(&mut out, density_line, format!("model.density {d} differs from the site retention probability {p}"))
        }
        (Some(d), CarrierConfig::Lattice { .. }, Dilution::None | Dilution::Bond { .. }) if d != 1.0 => {
            warn(&mut out, density_line, format!("model.density {d} differs from 1, the density of an undiluted lattice"))
        }
        (None, CarrierConfig::Delone { .. }, _) if cfg.moments > 0 => {
            warn(&mut out, None, "no model.density on a Delone carrier; traces use the empirical density".into())
        }
        _ => {}
    }
    if let Reference::Analytic(AnalyticIds::FreeChain1d) = cfg.reference {
        let free = matches!(cfg.carrier, CarrierConfig::Lattice { dim: 1, .. })
            && cfg.model.is_deterministic()
            && matches!(cfg.model.kernel, Kernel::Table { .. });
        if !free {
            warn(&mut out, cfg.line_of("analysis.reference"), "free_chain_1d reference on a model that is not the free chain".into());
        }
    }
    if cfg.lambdas.is_empty() && cfg.threshold.is_none() {
        warn(&mut out, None, "no lambdas.values or lambdas.threshold; no jump analysis".into());
    }
    out
}
