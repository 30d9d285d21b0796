//! Restriction of realizations to Følner windows, eigenvalue counting
//! functions and trace estimators.

mod ids;
mod step;
mod trace;

pub use ids::{ids_estimate, IdsEstimate, RealizationCounting};
pub use step::{snap_to_grid, StepFunction, ATOM_GRID};
pub use trace::{local_trace, moment_gap, trace_estimate, MomentGap, TraceEstimate, TraceFunction};

use std::collections::VecDeque;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::FolnerBox;
use crate::linalg;
use crate::models::OperatorRealization;

/// Relative tolerance under which eigenvalues are merged into one atom.
pub const MERGE_RTOL: f64 = 1e-9;
/// Relative pivot size below which inertia counting is abandoned.
pub const PIVOT_RTOL: f64 = 1e-12;

/// `H_{ω,n} = p_Λ H_ω i_Λ` on the active points of a window, in canonical
/// point order.
#[derive(Debug, Clone)]
pub struct RestrictedOperator {
    window: FolnerBox,
    indices: Vec<usize>,
    diagonal: Vec<f64>,
    rows: Vec<Vec<(usize, Complex64)>>,
    seed: u64,
    hopping_range: f64,
    source_norm: f64,
}

impl RestrictedOperator {
    pub fn window(&self) -> &FolnerBox {
        &self.window
    }

    /// Carrier indices of the rows, ascending.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn hopping_range(&self) -> f64 {
        self.hopping_range
    }

    /// Row-sum bound of the source realization.
    pub fn norm_bound(&self) -> f64 {
        self.source_norm
    }

    pub fn merge_tolerance(&self) -> f64 {
        MERGE_RTOL * self.source_norm.max(1.0)
    }

    /// Local index of a carrier index.
    pub fn local(&self, carrier_index: usize) -> Option<usize> {
        self.indices.binary_search(&carrier_index).ok()
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.diagonal[i]
    }

    /// Off-diagonal entries of local row `i`, by local column.
    pub fn row(&self, i: usize) -> &[(usize, Complex64)] {
        &self.rows[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        if i == j {
            return Complex64::new(self.diagonal[i], 0.0);
        }
        match self.rows[i].binary_search_by_key(&j, |e| e.0) {
            Ok(k) => self.rows[i][k].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let all: Vec<usize> = (0..self.dim()).collect();
        self.block(&all)
    }

    /// Principal submatrix on sorted local indices.
    pub fn block(&self, members: &[usize]) -> DMatrix<Complex64> {
        let k = members.len();
        let mut m = DMatrix::from_element(k, k, Complex64::new(0.0, 0.0));
        for (a, &i) in members.iter().enumerate() {
            m[(a, a)] = Complex64::new(self.diagonal[i], 0.0);
            for &(j, z) in &self.rows[i] {
                if let Ok(b) = members.binary_search(&j) {
                    m[(a, b)] = z;
                }
            }
        }
        m
    }

    /// Connected components of the hopping graph, each sorted, ordered by
    /// smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.dim();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                for &(j, _) in &self.rows[i] {
                    if !seen[j] {
                        seen[j] = true;
                        comp.push(j);
                        queue.push_back(j);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Restriction to a smaller window of the same carrier.
    pub fn restrict_to(&self, sub: &FolnerBox) -> Result<RestrictedOperator> {
        if !sub.window.is_subset_of(&self.window.window) {
            return Err(Error::InvalidParameter("sub-window is not inside the window".into()));
        }
        let keep: Vec<usize> = sub.window.iter().filter_map(|c| self.local(c)).collect();
        let relabel = |j: usize| keep.binary_search(&j).ok();
        let rows = keep
            .iter()
            .map(|&i| self.rows[i].iter().filter_map(|&(j, z)| relabel(j).map(|b| (b, z))).collect())
            .collect();
        Ok(RestrictedOperator {
            window: sub.clone(),
            indices: keep.iter().map(|&i| self.indices[i]).collect(),
            diagonal: keep.iter().map(|&i| self.diagonal[i]).collect(),
            rows,
            seed: self.seed,
            hopping_range: self.hopping_range,
            source_norm: self.source_norm,
        })
    }
}

/// Restricts a realization to a window; the window needs a margin of `R`
/// inside the generated patch.
pub fn restrict(op: &OperatorRealization, window: &FolnerBox) -> Result<RestrictedOperator> {
    window.require_margin(op.carrier(), op.hopping_range())?;
    let indices: Vec<usize> = window.window.iter().filter(|&i| op.is_active(i)).collect();
    let rows = indices
        .iter()
        .map(|&i| {
            op.row(i)
                .iter()
                .filter_map(|&(j, z)| indices.binary_search(&j).ok().map(|b| (b, z)))
                .collect()
        })
        .collect();
    Ok(RestrictedOperator {
        window: window.clone(),
        diagonal: indices.iter().map(|&i| op.diagonal(i)).collect(),
        indices,
        rows,
        seed: op.seed(),
        hopping_range: op.hopping_range(),
        source_norm: op.norm_bound(),
    })
}

/// All eigenvalues with multiplicity, ascending. Each connected component is
/// diagonalized on its own.
pub fn spectrum(rop: &RestrictedOperator) -> Result<Vec<f64>> {
    let parts: Vec<Vec<f64>> = rop
        .components()
        .par_iter()
        .map(|comp| {
            if comp.len() == 1 {
                Ok(vec![rop.diagonal[comp[0]]])
            } else {
                linalg::hermitian_eigenvalues(&rop.block(comp))
            }
        })
        .collect::<Result<_>>()?;
    let mut all: Vec<f64> = parts.into_iter().flatten().collect();
    all.sort_by(f64::total_cmp);
    Ok(all)
}

/// `N_{ω,n}(λ) = #{eigenvalues ≤ λ}`.
pub fn counting_function(rop: &RestrictedOperator) -> Result<StepFunction> {
    Ok(StepFunction::from_eigenvalues(&spectrum(rop)?, rop.merge_tolerance(), 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountBelow {
    pub count: usize,
    /// Set when some block fell back to a full eigendecomposition.
    pub fallback: bool,
}

/// Number of eigenvalues `≤ λ` from the inertia of `H − λ`.
pub fn count_below(rop: &RestrictedOperator, lambda: f64) -> Result<CountBelow> {
    let pivot_tol = PIVOT_RTOL * rop.norm_bound().max(1.0);
    let mut count = 0;
    let mut fallback = false;
    for comp in rop.components() {
        let block = rop.block(&comp);
        let (lo, hi) = linalg::gershgorin(&block);
        if lambda < lo {
            continue;
        }
        if lambda >= hi {
            count += comp.len();
            continue;
        }
        let shifted = DMatrix::from_fn(comp.len(), comp.len(), |i, j| {
            if i == j {
                block[(i, j)] - Complex64::new(lambda, 0.0)
            } else {
                block[(i, j)]
            }
        });
        match linalg::negative_inertia(shifted, pivot_tol) {
            Some(k) => count += k,
            None => {
                log::debug!("inertia breakdown at λ={lambda} on a block of size {}", comp.len());
                fallback = true;
                let vals = linalg::hermitian_eigenvalues(&block)?;
                let f = StepFunction::from_eigenvalues(&vals, rop.merge_tolerance(), 1.0);
                count += f.eval(lambda).round() as usize;
            }
        }
    }
    Ok(CountBelow { count, fallback })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalizer {
    /// Divide by `ω(Λ_n)`.
    PerActiveSite,
    /// Divide by `|I_n|`.
    PerGroupVolume,
}

impl Normalizer {
    pub fn value(&self, rop: &RestrictedOperator) -> Result<f64> {
        match self {
            Normalizer::PerActiveSite if rop.dim() == 0 => Err(Error::EmptyWindow),
            Normalizer::PerActiveSite => Ok(rop.dim() as f64),
            Normalizer::PerGroupVolume => Ok(rop.window.volume),
        }
    }
}

pub fn normalized_counting(rop: &RestrictedOperator, normalizer: Normalizer) -> Result<StepFunction> {
    let norm = normalizer.value(rop)?;
    Ok(StepFunction::from_eigenvalues(&spectrum(rop)?, rop.merge_tolerance(), norm))
}
