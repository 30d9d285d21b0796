//! Exact supremum distances between distribution functions and
//! convergence reports over growing windows.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{IdsEstimate, StepFunction};

/// `sup_λ |F(λ) − G(λ)|`, evaluated at every breakpoint of either function
/// and at its left limit.
pub fn sup_distance(f: &StepFunction, g: &StepFunction) -> f64 {
    let mut worst: f64 = 0.0;
    for x in f.breakpoints().iter().chain(g.breakpoints()) {
        worst = worst.max((f.eval(*x) - g.eval(*x)).abs());
        worst = worst.max((f.left_limit(*x) - g.left_limit(*x)).abs());
    }
    worst
}

/// Closed-form integrated densities of states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticIds {
    /// Nearest-neighbour adjacency on `ℤ`: `N(λ) = arccos(−λ/2)/π` on `[−2, 2]`.
    FreeChain1d,
    /// Zero operator: unit step at 0.
    UnitStep,
}

impl AnalyticIds {
    pub fn id(self) -> &'static str {
        match self {
            AnalyticIds::FreeChain1d => "free_chain_1d",
            AnalyticIds::UnitStep => "unit_step",
        }
    }

    pub fn eval(self, lambda: f64) -> f64 {
        match self {
            AnalyticIds::FreeChain1d => {
                if lambda <= -2.0 {
                    0.0
                } else if lambda >= 2.0 {
                    1.0
                } else {
                    (-lambda / 2.0).acos() / std::f64::consts::PI
                }
            }
            AnalyticIds::UnitStep => f64::from(u8::from(lambda >= 0.0)),
        }
    }

    /// `sup_λ |F(λ) − N(λ)|`.
    pub fn sup_distance(self, f: &StepFunction) -> f64 {
        match self {
            AnalyticIds::UnitStep => {
                let step = StepFunction::from_atoms([(0.0, 1.0)]).expect("valid atom");
                sup_distance(f, &step)
            }
            AnalyticIds::FreeChain1d => {
                // N is continuous and nondecreasing, F is constant between
                // breakpoints: the sup sits at a breakpoint, one side or the other,
                // or in a tail.
                let mut worst = (f.total_mass() - 1.0).abs();
                for &x in f.breakpoints() {
                    let n = self.eval(x);
                    worst = worst.max((f.eval(x) - n).abs()).max((f.left_limit(x) - n).abs());
                }
                worst
            }
        }
    }
}

impl FromStr for AnalyticIds {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free_chain_1d" => Ok(AnalyticIds::FreeChain1d),
            "unit_step" => Ok(AnalyticIds::UnitStep),
            other => Err(Error::UnknownReference(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum Reference {
    LargestN,
    Analytic(AnalyticIds),
}

impl FromStr for Reference {
    type Err = Error;

    /// `largest_n` or `analytic:<id>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "largest_n" => Ok(Reference::LargestN),
            Some(("analytic", id)) => Ok(Reference::Analytic(id.parse()?)),
            _ => Err(Error::UnknownReference(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSeries {
    pub lambda: f64,
    /// `(n, ν_n({λ}))`.
    pub masses: Vec<(usize, f64)>,
}

/// Mass of the atoms within `tol` of each `λ`, across the sequence.
pub fn atom_convergence_table(sequence: &[(usize, StepFunction)], lambdas: &[f64], tol: f64) -> Vec<AtomSeries> {
    lambdas
        .iter()
        .map(|&lambda| AtomSeries {
            lambda,
            masses: sequence.iter().map(|(n, f)| (*n, f.mass_near(lambda, tol))).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub n: usize,
    /// `None` for the pooled function.
    pub seed: Option<u64>,
    pub sup_distance: f64,
}

/// `sup|F_{n_{k+1}} − F_{n_k}|` for one pair of consecutive windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyIncrement {
    pub n_from: usize,
    pub n_to: usize,
    pub pooled: f64,
    /// Mean over seeds present at both sizes.
    pub mean: f64,
    pub std_error: f64,
    pub per_seed: Vec<(u64, f64)>,
}

/// One step of the trend rule `value(next) ≤ value(prev) + 2·SE`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendCheck {
    pub from: usize,
    pub to: usize,
    pub previous: f64,
    pub next: f64,
    pub slack: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub model: String,
    pub reference: Reference,
    pub n_list: Vec<usize>,
    /// Sorted by `n`, then seed, pooled row last.
    pub rows: Vec<DistanceRow>,
    pub cauchy: Vec<CauchyIncrement>,
    pub trend: Vec<TrendCheck>,
    /// Set when the pooled distance to the reference increases with `n`.
    pub non_monotone: bool,
    pub atom_tables: Vec<AtomSeries>,
    pub boundary_ratios: Vec<(usize, f64)>,
}

impl ConvergenceReport {
    pub fn pooled_distances(&self) -> Vec<(usize, f64)> {
        self.rows.iter().filter(|r| r.seed.is_none()).map(|r| (r.n, r.sup_distance)).collect()
    }

    pub fn trend_holds(&self) -> bool {
        self.trend.iter().all(|t| t.holds)
    }

    pub fn with_boundary_ratios(mut self, ratios: Vec<(usize, f64)>) -> Self {
        self.boundary_ratios = ratios;
        self
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,seed,sup_distance\n");
        for r in &self.rows {
            let seed = r.seed.map_or_else(|| "pooled".to_string(), |v| v.to_string());
            let _ = writeln!(s, "{},{},{}", r.n, seed, r.sup_distance);
        }
        s
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let se = if xs.len() > 1 { (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt() } else { 0.0 };
    (mean, se)
}

fn seed_function(ids: &IdsEstimate, seed: u64) -> Option<&StepFunction> {
    ids.realizations.iter().find(|r| r.seed == seed).map(|r| &r.function)
}

/// Distances of every window's counting functions to the reference, Cauchy
/// increments between consecutive windows, and the trend check on those
/// increments.
pub fn convergence_report(
    model: &str,
    sequence: &[IdsEstimate],
    reference: Reference,
    lambdas: &[f64],
) -> Result<ConvergenceReport> {
    if sequence.len() < 2 {
        return Err(Error::InvalidParameter("need at least two window sizes".into()));
    }
    if sequence.windows(2).any(|w| w[0].n >= w[1].n) {
        return Err(Error::InvalidParameter("window sizes must be strictly increasing".into()));
    }
    let largest = sequence.last().expect("non-empty");
    let to_reference = |f: &StepFunction, seed: Option<u64>| -> f64 {
        match reference {
            Reference::Analytic(a) => a.sup_distance(f),
            Reference::LargestN => {
                let target = seed.and_then(|s| seed_function(largest, s)).unwrap_or(&largest.pooled);
                sup_distance(f, target)
            }
        }
    };
    let mut rows = Vec::new();
    for ids in sequence {
        for r in &ids.realizations {
            rows.push(DistanceRow { n: ids.n, seed: Some(r.seed), sup_distance: to_reference(&r.function, Some(r.seed)) });
        }
        rows.push(DistanceRow { n: ids.n, seed: None, sup_distance: to_reference(&ids.pooled, None) });
    }

    let mut cauchy = Vec::new();
    for w in sequence.windows(2) {
        let per_seed: Vec<(u64, f64)> = w[0]
            .realizations
            .iter()
            .filter_map(|r| seed_function(&w[1], r.seed).map(|g| (r.seed, sup_distance(&r.function, g))))
            .collect();
        let values: Vec<f64> = per_seed.iter().map(|p| p.1).collect();
        let (mean, std_error) = mean_and_se(&values);
        cauchy.push(CauchyIncrement {
            n_from: w[0].n,
            n_to: w[1].n,
            pooled: sup_distance(&w[0].pooled, &w[1].pooled),
            mean,
            std_error,
            per_seed,
        });
    }

    // paired per-seed differences give the standard error of each step
    let trend = cauchy
        .windows(2)
        .map(|w| {
            let diffs: Vec<f64> = w[1]
                .per_seed
                .iter()
                .filter_map(|(s, b)| w[0].per_seed.iter().find(|p| p.0 == *s).map(|(_, a)| b - a))
                .collect();
            let (_, se) = mean_and_se(&diffs);
            let slack = 2.0 * se;
            TrendCheck {
                from: w[0].n_from,
                to: w[1].n_to,
                previous: w[0].mean,
                next: w[1].mean,
                slack,
                holds: w[1].mean <= w[0].mean + slack,
            }
        })
        .collect();

    let pooled: Vec<f64> = rows.iter().filter(|r| r.seed.is_none()).map(|r| r.sup_distance).collect();
    let compared = match reference {
        Reference::LargestN => &pooled[..pooled.len() - 1],
        Reference::Analytic(_) => &pooled[..],
    };
    let non_monotone = compared.windows(2).any(|w| w[1] > w[0]);
    let tol = sequence.iter().map(|s| s.merge_tolerance).fold(0.0, f64::max);
    let pooled_seq: Vec<(usize, StepFunction)> = sequence.iter().map(|s| (s.n, s.pooled.clone())).collect();
    Ok(ConvergenceReport {
        model: model.to_string(),
        reference,
        n_list: sequence.iter().map(|s| s.n).collect(),
        rows,
        cauchy,
        trend,
        non_monotone,
        atom_tables: atom_convergence_table(&pooled_seq, lambdas, tol),
        boundary_ratios: Vec::new(),
    })
}
