//! Experiment configuration: flat `key = value` text with dotted keys.
//!
//! ```text
//! schema = 1
//! name = site-percolation
//! model.kernel = nearest_neighbor
//! model.dilution = site(0.5)
//! carrier.kind = lattice
//! carrier.dim = 2
//! carrier.extent = 45
//! windows.n = 20, 40, 80
//! seeds.count = 20
//! lambdas.values = 0, 1, -1
//! ```
//!
//! A `[section]` line prefixes the keys that follow it. `#` starts a comment.

use std::collections::HashMap;
use std::path::PathBuf;

use idslab::convergence::Reference;
use idslab::geometry::{DeloneSpec, GOLDEN_MEAN};
use idslab::jumps::Mode;
use idslab::models::{Dilution, Kernel, ModelSpec, PotentialLaw};
use idslab::spectra::Normalizer;
use idslab::Level;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("{0}")]
    General(String),
}

const KEYS: &[&str] = &[
    "schema",
    "name",
    "model.kernel",
    "model.amplitude",
    "model.radius",
    "model.range",
    "model.potential",
    "model.dilution",
    "model.flux",
    "model.density",
    "carrier.kind",
    "carrier.dim",
    "carrier.extent",
    "carrier.amplitude",
    "carrier.seed",
    "windows.n",
    "windows.anchor",
    "seeds.count",
    "seeds.base",
    "lambdas.values",
    "lambdas.threshold",
    "analysis.mode",
    "analysis.reference",
    "analysis.normalizer",
    "analysis.moments",
    "output.dir",
];

#[derive(Debug, Clone, PartialEq)]
pub enum CarrierConfig {
    /// `ℤ^dim ∩ [−extent, extent)^dim`.
    Lattice { dim: usize, extent: usize },
    /// Delone patch inside `[0, extent)^d`.
    Delone { spec: DeloneSpec, extent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    /// Boxes centred in the patch.
    Centered,
    /// Boxes `[0, n)^d`.
    Origin,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// `(key, value)` pairs in file order, with section prefixes applied.
    pub entries: Vec<(String, String)>,
    lines: HashMap<String, usize>,
    pub name: String,
    pub model: ModelSpec,
    pub carrier: CarrierConfig,
    pub windows: Vec<usize>,
    pub anchor: Anchor,
    pub seeds: usize,
    pub base_seed: u64,
    pub lambdas: Vec<Level>,
    pub threshold: Option<f64>,
    pub mode: Mode,
    pub reference: Reference,
    pub normalizer: Normalizer,
    pub moments: usize,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.lines.get(key).copied()
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).map(|k| self.base_seed + k).collect()
    }

    /// The entries as config text, for reparsing.
    pub fn echo(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// `name(a, b)` → `("name", ["a", "b"])`; a bare word has no arguments.
fn call(text: &str) -> Option<(&str, Vec<&str>)> {
    let text = text.trim();
    match text.split_once('(') {
        None => Some((text, Vec::new())),
        Some((name, rest)) => {
            let inner = rest.strip_suffix(')')?;
            let args = if inner.trim().is_empty() { Vec::new() } else { inner.split(',').map(str::trim).collect() };
            Some((name.trim(), args))
        }
    }
}

fn list(text: &str) -> Vec<&str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

struct Raw {
    values: HashMap<String, (String, usize)>,
}

impl Raw {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.values.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some((v, line)) => {
                v.parse().map_err(|_| ConfigError::Line { line, msg: format!("cannot parse {key} = {v:?}") })
            }
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        let (v, line) = self.get(key).ok_or_else(|| ConfigError::General(format!("missing required key {key}")))?;
        v.parse().map_err(|_| ConfigError::Line { line, msg: format!("cannot parse {key} = {v:?}") })
    }

    fn line(&self, key: &str) -> usize {
        self.get(key).map_or(0, |p| p.1)
    }
}

fn parse_potential(text: &str, line: usize) -> Result<PotentialLaw, ConfigError> {
    let err = |msg: &str| ConfigError::Line { line, msg: format!("model.potential: {msg}") };
    let (name, args) = call(text).ok_or_else(|| err("malformed"))?;
    let num = |s: &str| s.parse::<f64>().map_err(|_| err(&format!("not a number: {s:?}")));
    match (name, args.len()) {
        ("none", 0) => Ok(PotentialLaw::None),
        ("uniform", 1) => Ok(PotentialLaw::Uniform { bound: num(args[0])? }),
        ("bernoulli", k) if k > 0 => {
            let mut values = Vec::new();
            let mut probs = Vec::new();
            for a in args {
                let (v, p) = a.split_once(':').ok_or_else(|| err("bernoulli entries are value:probability"))?;
                values.push(num(v.trim())?);
                probs.push(num(p.trim())?);
            }
            Ok(PotentialLaw::Bernoulli { values, probs })
        }
        _ => Err(err("expected none, uniform(C) or bernoulli(v:p, ...)")),
    }
}

fn parse_dilution(text: &str, line: usize) -> Result<Dilution, ConfigError> {
    let err = || ConfigError::Line { line, msg: "model.dilution: expected none, site(p) or bond(p)".into() };
    let (name, args) = call(text).ok_or_else(err)?;
    let p = || args.first().and_then(|a| a.parse::<f64>().ok()).ok_or_else(err);
    match (name, args.len()) {
        ("none", 0) => Ok(Dilution::None),
        ("site", 1) => Ok(Dilution::Site { p: p()? }),
        ("bond", 1) => Ok(Dilution::Bond { p: p()? }),
        _ => Err(err()),
    }
}

/// Reals with the extra spelling `golden`.
fn parse_real(text: &str) -> Option<f64> {
    match text.trim() {
        "golden" => Some(GOLDEN_MEAN),
        t => t.parse().ok(),
    }
}

pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut values: HashMap<String, (String, usize)> = HashMap::new();
    let mut entries = Vec::new();
    let mut section = String::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Line { line, msg: format!("expected `key = value`, got {content:?}") })?;
        let key = if section.is_empty() { key.trim().to_string() } else { format!("{section}.{}", key.trim()) };
        let value = value.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::Line { line, msg: format!("unknown key {key}") });
        }
        if values.contains_key(&key) {
            return Err(ConfigError::Line { line, msg: format!("duplicate key {key}") });
        }
        values.insert(key.clone(), (value.clone(), line));
        entries.push((key, value));
    }
    let raw = Raw { values };

    match raw.get("schema") {
        Some(("1", _)) => {}
        Some((v, line)) => return Err(ConfigError::Line { line, msg: format!("unsupported schema {v}") }),
        None => return Err(ConfigError::General("missing `schema = 1`".into())),
    }

    let carrier_kind: String = raw.parse("carrier.kind", "lattice".to_string())?;
    let dim: usize = raw.parse("carrier.dim", 1)?;
    let carrier = match carrier_kind.as_str() {
        "lattice" => CarrierConfig::Lattice { dim, extent: raw.require("carrier.extent")? },
        "fibonacci" => CarrierConfig::Delone { spec: DeloneSpec::Fibonacci, extent: raw.require("carrier.extent")? },
        "perturbed" => CarrierConfig::Delone {
            spec: DeloneSpec::PerturbedLattice {
                dim,
                amplitude: raw.parse("carrier.amplitude", 0.0)?,
                seed: raw.parse("carrier.seed", 0)?,
            },
            extent: raw.require("carrier.extent")?,
        },
        other => {
            return Err(ConfigError::Line { line: raw.line("carrier.kind"), msg: format!("unknown carrier kind {other}") })
        }
    };
    let model_dim = match &carrier {
        CarrierConfig::Lattice { dim, .. } => *dim,
        CarrierConfig::Delone { spec, .. } => spec.dim(),
    };

    let amplitude: f64 = raw.parse("model.amplitude", 1.0)?;
    let kernel = match raw.get("model.kernel").map(|p| p.0).unwrap_or("nearest_neighbor") {
        "nearest_neighbor" => Kernel::nearest_neighbor(model_dim, amplitude),
        "radial" => {
            let (text, line) = raw
                .get("model.radius")
                .ok_or_else(|| ConfigError::General("radial kernel needs model.radius".into()))?;
            let radius = parse_real(text)
                .ok_or_else(|| ConfigError::Line { line, msg: format!("cannot parse model.radius = {text:?}") })?;
            Kernel::Radial { radius, amplitude }
        }
        other => {
            return Err(ConfigError::Line { line: raw.line("model.kernel"), msg: format!("unknown kernel {other}") })
        }
    };
    let default_range = match &carrier {
        CarrierConfig::Lattice { .. } => kernel.support_radius(idslab::geometry::Metric::Graph),
        CarrierConfig::Delone { .. } => kernel.support_radius(idslab::geometry::Metric::Euclidean),
    };
    let hopping_range = match raw.get("model.range") {
        None => default_range,
        Some((t, line)) => {
            parse_real(t).ok_or_else(|| ConfigError::Line { line, msg: format!("cannot parse model.range = {t:?}") })?
        }
    };
    let potential = match raw.get("model.potential") {
        None => PotentialLaw::None,
        Some((t, line)) => parse_potential(t, line)?,
    };
    let dilution = match raw.get("model.dilution") {
        None => Dilution::None,
        Some((t, line)) => parse_dilution(t, line)?,
    };
    let density_hint = match raw.get("model.density") {
        None => None,
        Some(_) => Some(raw.require::<f64>("model.density")?),
    };
    let model = ModelSpec { kernel, hopping_range, potential, dilution, flux: raw.parse("model.flux", 0.0)?, density_hint };

    let (windows, windows_line) = match raw.get("windows.n") {
        None => return Err(ConfigError::General("missing required key windows.n".into())),
        Some((t, line)) => (
            list(t)
                .iter()
                .map(|s| s.parse::<usize>().map_err(|_| ConfigError::Line { line, msg: format!("bad window size {s:?}") }))
                .collect::<Result<Vec<_>, _>>()?,
            line,
        ),
    };
    if windows.is_empty() || windows.contains(&0) {
        return Err(ConfigError::Line { line: windows_line, msg: "windows.n needs positive sizes".into() });
    }
    if windows.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConfigError::Line { line: windows_line, msg: "windows.n must be strictly increasing".into() });
    }
    let anchor = match raw.get("windows.anchor").map(|p| p.0).unwrap_or("centered") {
        "centered" => Anchor::Centered,
        "origin" => Anchor::Origin,
        other => {
            return Err(ConfigError::Line { line: raw.line("windows.anchor"), msg: format!("unknown anchor {other}") })
        }
    };
    let seeds: usize = raw.parse("seeds.count", 1)?;
    if seeds == 0 {
        return Err(ConfigError::Line { line: raw.line("seeds.count"), msg: "seeds.count must be at least 1".into() });
    }
    let lambdas = match raw.get("lambdas.values") {
        None => Vec::new(),
        Some((t, line)) => list(t)
            .iter()
            .map(|s| Level::parse(s).map_err(|e| ConfigError::Line { line, msg: e.to_string() }))
            .collect::<Result<_, _>>()?,
    };
    let threshold = match raw.get("lambdas.threshold") {
        None => None,
        Some(_) => Some(raw.require::<f64>("lambdas.threshold")?),
    };
    let mode = match raw.get("analysis.mode") {
        None => Mode::Float,
        Some((t, line)) => t.parse().map_err(|_| ConfigError::Line { line, msg: format!("unknown mode {t:?}") })?,
    };
    let reference = match raw.get("analysis.reference") {
        None => Reference::LargestN,
        Some((t, line)) => t.parse().map_err(|e: idslab::Error| ConfigError::Line { line, msg: e.to_string() })?,
    };
    let normalizer = match raw.get("analysis.normalizer").map(|p| p.0).unwrap_or("per_active_site") {
        "per_active_site" => Normalizer::PerActiveSite,
        "per_group_volume" => Normalizer::PerGroupVolume,
        other => {
            return Err(ConfigError::Line {
                line: raw.line("analysis.normalizer"),
                msg: format!("unknown normalizer {other}"),
            })
        }
    };
    let lines = raw.values.iter().map(|(k, (_, l))| (k.clone(), *l)).collect();
    Ok(ExperimentConfig {
        entries,
        lines,
        name: raw.parse("name", "experiment".to_string())?,
        model,
        carrier,
        windows,
        anchor,
        seeds,
        base_seed: raw.parse("seeds.base", 0)?,
        lambdas,
        threshold,
        mode,
        reference,
        normalizer,
        moments: raw.parse("analysis.moments", 0)?,
        output: raw.get("output.dir").map(|p| PathBuf::from(p.0)),
    })
}
