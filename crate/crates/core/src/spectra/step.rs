use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Right-continuous nondecreasing step function, zero left of the first
/// breakpoint. `values[k]` is the value on `[breakpoints[k], breakpoints[k+1])`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

/// Spacing of the grid atoms are snapped to, `2^-30`. It is below every
/// merge tolerance, so distinct groups stay distinct, and grid points are
/// exact in binary, so the same level found in different windows lands on
/// the same float.
pub const ATOM_GRID: f64 = 1.0 / (1u64 << 30) as f64;

pub fn snap_to_grid(x: f64) -> f64 {
    // adding 0.0 turns -0.0 into 0.0
    (x / ATOM_GRID).round() * ATOM_GRID + 0.0
}

/// Splits sorted points into runs whose spread is at most `tol`; each run is
/// represented by its midpoint.
fn group_sorted(points: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    while start < points.len() {
        let mut end = start + 1;
        while end < points.len() && points[end] - points[start] <= tol {
            end += 1;
        }
        let (lo, hi) = (points[start], points[end - 1]);
        let mid = if lo == hi { lo } else { 0.5 * (lo + hi) };
        out.push((mid, end));
        start = end;
    }
    out
}

impl StepFunction {
    pub fn zero() -> Self {
        StepFunction::default()
    }

    pub fn from_parts(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::InvalidParameter("breakpoints and values differ in length".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("breakpoints must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter("non-finite step function data".into()));
        }
        if values.first().is_some_and(|v| *v < 0.0) || values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("values must be nonnegative and nondecreasing".into()));
        }
        Ok(StepFunction { breakpoints, values })
    }

    /// Distribution function of a finite atomic measure.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().filter(|a| a.1 != 0.0).collect();
        if atoms.iter().any(|a| a.1 < 0.0) {
            return Err(Error::InvalidParameter("negative atom mass".into()));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut breakpoints = Vec::with_capacity(atoms.len());
        let mut values: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut acc = 0.0;
        for (x, m) in atoms {
            acc += m;
            if breakpoints.last() == Some(&x) {
                *values.last_mut().expect("paired") = acc;
            } else {
                breakpoints.push(x);
                values.push(acc);
            }
        }
        Self::from_parts(breakpoints, values)
    }

    /// Eigenvalue counting function divided by `normalizer`. Sorted
    /// eigenvalues closer than `merge_tol` form a single atom.
    pub fn from_eigenvalues(sorted: &[f64], merge_tol: f64, normalizer: f64) -> Self {
        let groups = group_sorted(sorted, merge_tol.max(ATOM_GRID));
        StepFunction {
            breakpoints: groups.iter().map(|g| snap_to_grid(g.0)).collect(),
            values: groups.iter().map(|g| g.1 as f64 / normalizer).collect(),
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `F(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        match self.breakpoints.partition_point(|b| *b <= x) {
            0 => 0.0,
            k => self.values[k - 1],
        }
    }

    /// `F(x−)`.
    pub fn left_limit(&self, x: f64) -> f64 {
        match self.breakpoints.partition_point(|b| *b < x) {
            0 => 0.0,
            k => self.values[k - 1],
        }
    }

    /// `(location, mass)` of every jump.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        let mut prev = 0.0;
        self.breakpoints
            .iter()
            .zip(&self.values)
            .map(|(b, v)| {
                let m = v - prev;
                prev = *v;
                (*b, m)
            })
            .collect()
    }

    /// Total mass of the atoms within `tol` of `x`.
    pub fn mass_near(&self, x: f64, tol: f64) -> f64 {
        self.eval(x + tol) - self.left_limit(x - tol)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        StepFunction {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Distribution function of the reflected measure `A ↦ ν(−A)`.
    pub fn reflect(&self) -> Self {
        Self::from_atoms(self.atoms().into_iter().map(|(x, m)| (-x, m))).expect("masses stay nonnegative")
    }

    /// Pointwise mean. Breakpoints of different functions closer than
    /// `merge_tol` are fused into one at the run midpoint, snapped to the atom
    /// grid; with `merge_tol = 0` the result is the exact pointwise mean.
    pub fn mean(functions: &[StepFunction], merge_tol: f64) -> Self {
        if functions.is_empty() {
            return StepFunction::zero();
        }
        let mut all: Vec<f64> = functions.iter().flat_map(|f| f.breakpoints.iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        let m = functions.len() as f64;
        let mut breakpoints = Vec::new();
        let mut values = Vec::new();
        let mut start = 0;
        for (mid, end) in group_sorted(&all, merge_tol) {
            let right = all[end - 1];
            let v = functions.iter().map(|f| f.eval(right)).sum::<f64>() / m;
            let at = if end - start > 1 && merge_tol >= ATOM_GRID { snap_to_grid(mid) } else { mid };
            breakpoints.push(at);
            values.push(v);
            start = end;
        }
        debug_assert_eq!(start, all.len());
        StepFunction { breakpoints, values }
    }
}
