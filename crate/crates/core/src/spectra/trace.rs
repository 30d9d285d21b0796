use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::restrict;
use crate::error::{Error, Result};
use crate::geometry::{boundary_shell, folner_box_at, packing_constant, FolnerBox};
use crate::linalg;
use crate::models::OperatorRealization;

/// Bounded function applied to the operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceFunction {
    /// `Σ c_j x^j`, coefficients from degree 0 upward.
    Polynomial { coeffs: Vec<f64> },
    /// `1_{(lower, upper]}`, evaluated on a window enlarged by `margin`.
    Indicator { lower: f64, upper: f64, margin: f64 },
}

impl TraceFunction {
    pub fn identity() -> Self {
        TraceFunction::Polynomial { coeffs: vec![1.0] }
    }

    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = 1.0;
        TraceFunction::Polynomial { coeffs }
    }
}

/// `(H^j)_{xx}` for `j = 0..=k`, with `H` cut down to the points in `mask`.
fn diagonal_powers(op: &OperatorRealization, mask: &[bool], x: usize, k: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(k + 1);
    let mut v: BTreeMap<usize, Complex64> = BTreeMap::from([(x, Complex64::new(1.0, 0.0))]);
    out.push(Complex64::new(1.0, 0.0));
    for _ in 0..k {
        let mut next: BTreeMap<usize, Complex64> = BTreeMap::new();
        for (&b, &vb) in &v {
            let d = op.diagonal(b);
            if d != 0.0 {
                *next.entry(b).or_default() += vb * d;
            }
            // H(c, b) = conj(H(b, c))
            for &(c, z) in op.row(b) {
                if mask[c] {
                    *next.entry(c).or_default() += z.conj() * vb;
                }
            }
        }
        v = next;
        out.push(v.get(&x).copied().unwrap_or_default());
    }
    out
}

fn window_mask(op: &OperatorRealization, window: &FolnerBox) -> Vec<bool> {
    let mut mask = vec![false; op.carrier().len()];
    for i in window.window.iter() {
        mask[i] = op.is_active(i);
    }
    mask
}

/// `Tr(χ_Λ f(H_ω))`.
pub fn local_trace(op: &OperatorRealization, window: &FolnerBox, f: &TraceFunction) -> Result<f64> {
    let sites: Vec<usize> = window.window.iter().filter(|&i| op.is_active(i)).collect();
    match f {
        TraceFunction::Polynomial { coeffs } => {
            let degree = coeffs.len().saturating_sub(1);
            window.require_margin(op.carrier(), degree as f64 * op.hopping_range())?;
            let per_site: Vec<f64> = sites
                .par_iter()
                .map(|&x| {
                    diagonal_powers(op, op.active(), x, degree)
                        .iter()
                        .zip(coeffs)
                        .map(|(p, c)| c * p.re)
                        .sum::<f64>()
                })
                .collect();
            Ok(per_site.iter().sum())
        }
        TraceFunction::Indicator { lower, upper, margin } => {
            let origin: Vec<f64> = window.origin.iter().map(|o| o - margin).collect();
            let n = window.n + (2.0 * margin).ceil() as usize;
            let enlarged = folner_box_at(op.carrier(), &origin, n)?;
            let rop = restrict(op, &enlarged)?;
            let mut total = 0.0;
            for comp in rop.components() {
                let inside: Vec<usize> =
                    comp.iter().enumerate().filter(|(_, &i)| window.window.contains(rop.indices()[i])).map(|(a, _)| a).collect();
                if inside.is_empty() {
                    continue;
                }
                let block = rop.block(&comp);
                let (lo, hi) = linalg::gershgorin(&block);
                if *lower < lo && *upper >= hi {
                    total += inside.len() as f64;
                    continue;
                }
                if *upper < lo || *lower >= hi {
                    continue;
                }
                let (vals, vecs) = linalg::hermitian_eigen(&block)?;
                for (e, val) in vals.iter().enumerate() {
                    if val > lower && val <= upper {
                        total += inside.iter().map(|&a| vecs[(a, e)].norm_sqr()).sum::<f64>();
                    }
                }
            }
            Ok(total)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub mean: f64,
    /// Standard error of the mean; zero for a single realization.
    pub std_error: f64,
    pub samples: Vec<f64>,
}

/// Monte-Carlo estimate of `τ(f(H)) = (1/(|I|·dens)) E[Tr(χ_Λ f(H_ω))]`.
pub fn trace_estimate(
    realizations: &[OperatorRealization],
    window: &FolnerBox,
    f: &TraceFunction,
    density: f64,
) -> Result<TraceEstimate> {
    if realizations.is_empty() {
        return Err(Error::InvalidParameter("need at least one realization".into()));
    }
    if !(density > 0.0) {
        return Err(Error::InvalidParameter(format!("density {density} must be positive")));
    }
    let scale = window.volume * density;
    let samples: Vec<f64> =
        realizations.iter().map(|op| Ok(local_trace(op, window, f)? / scale)).collect::<Result<_>>()?;
    let m = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / m;
    let std_error = if samples.len() > 1 {
        (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt()
    } else {
        0.0
    };
    Ok(TraceEstimate { mean, std_error, samples })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentGap {
    pub k: usize,
    /// `|Tr(χ_Λ H^k) − Tr(H_n^k)|`.
    pub lhs: f64,
    /// `ω(∂^{kR}Λ) · M_{kR}^k · ‖H‖^k`.
    pub bound: f64,
    pub full_trace: f64,
    pub window_trace: f64,
    pub boundary_weight: usize,
    pub packing: usize,
    pub norm: f64,
}

impl MomentGap {
    pub fn holds(&self) -> bool {
        self.lhs <= self.bound
    }
}

pub fn moment_gap(op: &OperatorRealization, window: &FolnerBox, k: usize) -> Result<MomentGap> {
    if k == 0 {
        return Err(Error::InvalidParameter("moment order must be positive".into()));
    }
    let reach = k as f64 * op.hopping_range();
    window.require_margin(op.carrier(), reach)?;
    let mask = window_mask(op, window);
    let sites: Vec<usize> = window.window.iter().filter(|&i| op.is_active(i)).collect();
    let pairs: Vec<(Complex64, Complex64)> = sites
        .par_iter()
        .map(|&x| (diagonal_powers(op, op.active(), x, k)[k], diagonal_powers(op, &mask, x, k)[k]))
        .collect();
    let full: Complex64 = pairs.iter().map(|p| p.0).sum();
    let restricted: Complex64 = pairs.iter().map(|p| p.1).sum();
    let shell = boundary_shell(op.carrier(), &window.window, reach);
    let boundary_weight = op.weight(&shell);
    let packing = packing_constant(op.carrier(), reach);
    let norm = op.norm_bound();
    Ok(MomentGap {
        k,
        lhs: (full - restricted).norm(),
        bound: boundary_weight as f64 * (packing as f64).powi(k as i32) * norm.powi(k as i32),
        full_trace: full.re,
        window_trace: restricted.re,
        boundary_weight,
        packing,
        norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{folner_box, generate_lattice};
    use crate::models::{build_operator, Dilution, ModelSpec, PotentialLaw};
    use std::sync::Arc;

    fn z(dim: usize, n: usize) -> Arc<crate::geometry::PointSet> {
        Arc::new(generate_lattice(dim, n).unwrap())
    }

    #[test]
    fn free_chain_second_moment_gap_is_two() {
        let op = build_operator(&ModelSpec::adjacency(1), z(1, 40), 0).unwrap();
        for n in [5, 10, 30] {
            let g = moment_gap(&op, &folner_box(op.carrier(), n).unwrap(), 2).unwrap();
            assert_eq!(g.full_trace, 2.0 * n as f64);
            assert_eq!(g.window_trace, 2.0 * (n as f64 - 1.0));
            assert_eq!(g.lhs, 2.0);
            assert!(g.holds());
        }
    }

    #[test]
    fn odd_moment_and_pure_potential() {
        let op = build_operator(&ModelSpec::adjacency(2), z(2, 10), 0).unwrap();
        let bx = folner_box(op.carrier(), 4).unwrap();
        assert_eq!(moment_gap(&op, &bx, 1).unwrap().lhs, 0.0);
        let spec = ModelSpec::adjacency(2)
            .with_potential(PotentialLaw::Uniform { bound: 1.0 })
            .with_dilution(Dilution::Bond { p: 0.0 });
        let op = build_operator(&spec, z(2, 10), 4).unwrap();
        for k in 1..=4 {
            assert_eq!(moment_gap(&op, &bx, k).unwrap().lhs, 0.0);
        }
    }

    #[test]
    fn moment_needs_margin() {
        let op = build_operator(&ModelSpec::adjacency(1), z(1, 6), 0).unwrap();
        let bx = folner_box(op.carrier(), 4).unwrap();
        assert!(moment_gap(&op, &bx, 2).is_ok());
        assert!(matches!(moment_gap(&op, &bx, 3), Err(Error::InsufficientMargin { .. })));
    }

    #[test]
    fn polynomial_traces_of_free_lattice() {
        for d in 1..=3 {
            let op = build_operator(&ModelSpec::adjacency(d), z(d, 6), 0).unwrap();
            let bx = folner_box(op.carrier(), 3).unwrap();
            let vol = bx.volume;
            let t1 = trace_estimate(std::slice::from_ref(&op), &bx, &TraceFunction::monomial(1), 1.0).unwrap();
            assert_eq!(t1.mean, 0.0);
            let t2 = trace_estimate(std::slice::from_ref(&op), &bx, &TraceFunction::monomial(2), 1.0).unwrap();
            assert_eq!(t2.mean, 2.0 * d as f64);
            let id = local_trace(&op, &bx, &TraceFunction::identity()).unwrap();
            assert_eq!(id, vol);
        }
    }

    #[test]
    fn fourth_moment_counts_closed_walks() {
        // closed 4-walks on ℤ²: C(4,2)^2 = 36
        let op = build_operator(&ModelSpec::adjacency(2), z(2, 8), 0).unwrap();
        let bx = folner_box(op.carrier(), 2).unwrap();
        assert_eq!(local_trace(&op, &bx, &TraceFunction::monomial(4)).unwrap(), 36.0 * 4.0);
    }

    #[test]
    fn indicator_of_whole_line() {
        let spec = ModelSpec::adjacency(2).with_potential(PotentialLaw::Uniform { bound: 1.0 });
        let op = build_operator(&spec, z(2, 8), 2).unwrap();
        let bx = folner_box(op.carrier(), 4).unwrap();
        let f = TraceFunction::Indicator { lower: f64::NEG_INFINITY, upper: f64::INFINITY, margin: 2.0 };
        assert_eq!(local_trace(&op, &bx, &f).unwrap(), 16.0);
        let half = TraceFunction::Indicator { lower: -10.0, upper: 0.0, margin: 2.0 };
        let t = local_trace(&op, &bx, &half).unwrap();
        assert!(t > 0.0 && t < 16.0);
    }

    #[test]
    fn identity_trace_is_one_for_site_percolation() {
        let spec = ModelSpec::adjacency(2).with_dilution(Dilution::Site { p: 0.6 });
        let carrier = z(2, 25);
        let ops: Vec<_> = (0..30).map(|s| build_operator(&spec, carrier.clone(), s).unwrap()).collect();
        let bx = folner_box_at(&carrier, &[-20.0, -20.0], 40).unwrap();
        let est = trace_estimate(&ops, &bx, &TraceFunction::identity(), 0.6).unwrap();
        assert!((est.mean - 1.0).abs() <= 3.0 * est.std_error, "{est:?}");
    }
}
