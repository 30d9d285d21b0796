//! IDS jumps through compactly supported eigenfunctions.
//!
//! For a window `Λ_n` the number `D_n` of independent solutions of
//! `(H_ω − λ)v = 0` supported in the interior `Λ_{n,R}` brackets the atom
//! count of the restricted operator: `0 ≤ ν_{ω,n}({λ}) − D_n ≤ ω(∂^R Λ_n)`.

use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{bareiss_echelon, gauss_jordan_rank, integer_rows, rational_of, rational_of_complex};
use crate::geometry::{boundary_shell, interior, FolnerBox};
use crate::level::Level;
use crate::linalg;
use crate::models::OperatorRealization;
use crate::spectra::{restrict, spectrum, IdsEstimate, RestrictedOperator};

/// Residual tolerance for float-mode basis vectors, relative to `‖v‖_∞`.
pub const RESIDUAL_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Float,
    ExactRational,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "float" | "float_svd" => Ok(Mode::Float),
            "exact" | "exact_rational" => Ok(Mode::ExactRational),
            other => Err(Error::InvalidParameter(format!("unknown mode {other:?}"))),
        }
    }
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Float => "float",
            Mode::ExactRational => "exact",
        }
    }
}

/// Basis of the in-window compactly supported solutions at `λ`, as vectors
/// over the active window points (zero outside `Λ_{n,R}`).
#[derive(Debug, Clone)]
pub struct CompactEigenbasis {
    pub lambda: f64,
    /// Carrier indices of the active window points, ascending.
    pub rows: Vec<usize>,
    pub vectors: Vec<Vec<Complex64>>,
    /// Rational vectors in exact mode.
    pub exact: Option<Vec<Vec<BigRational>>>,
}

impl CompactEigenbasis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Largest `‖(H − λ)v‖_∞ / ‖v‖_∞` over the basis, evaluated on every
    /// active point of the patch after extending each vector by zero.
    pub fn max_relative_residual(&self, op: &OperatorRealization) -> f64 {
        let mut value = vec![None; op.carrier().len()];
        let mut worst: f64 = 0.0;
        for v in &self.vectors {
            for (a, &i) in self.rows.iter().enumerate() {
                value[i] = Some(v[a]);
            }
            let vmax = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let mut rmax: f64 = 0.0;
            for x in (0..op.carrier().len()).filter(|&x| op.is_active(x)) {
                let mut acc = value[x].unwrap_or_default() * (op.diagonal(x) - self.lambda);
                for &(y, z) in op.row(x) {
                    if let Some(vy) = value[y] {
                        acc += z * vy;
                    }
                }
                rmax = rmax.max(acc.norm());
            }
            worst = worst.max(if vmax > 0.0 { rmax / vmax } else { rmax });
            for &i in &self.rows {
                value[i] = None;
            }
        }
        worst
    }

    /// Checks every rational vector against `(H − λ)v = 0` exactly on the
    /// rows of the window.
    pub fn exact_residual_is_zero(&self, op: &OperatorRealization, lambda: &BigRational) -> Result<bool> {
        let Some(exact) = &self.exact else { return Ok(false) };
        for v in exact {
            for (a, &x) in self.rows.iter().enumerate() {
                let mut acc = &v[a] * (rational_of(op.diagonal(x))? - lambda);
                for &(y, z) in op.row(x) {
                    if let Ok(b) = self.rows.binary_search(&y) {
                        acc += rational_of_complex(z)? * &v[b];
                    }
                }
                if !acc.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn exact_lambda(level: &Level, mode: Mode) -> Result<Option<BigRational>> {
    match mode {
        Mode::Float => Ok(None),
        Mode::ExactRational => Ok(Some(level.require_exact()?.clone())),
    }
}

/// `(H − λ)[rows, cols]` over local indices of `rop`.
fn system(rop: &RestrictedOperator, rows: &[usize], cols: &[usize], lambda: f64) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows.len(), cols.len(), |a, b| {
        let (i, j) = (rows[a], cols[b]);
        if i == j {
            Complex64::new(rop.diagonal(i) - lambda, 0.0)
        } else {
            rop.entry(i, j)
        }
    })
}

fn exact_system(
    rop: &RestrictedOperator,
    rows: &[usize],
    cols: &[usize],
    lambda: &BigRational,
) -> Result<Vec<Vec<BigRational>>> {
    rows.iter()
        .map(|&i| {
            cols.iter()
                .map(|&j| {
                    if i == j {
                        Ok(rational_of(rop.diagonal(i))? - lambda)
                    } else {
                        rational_of_complex(rop.entry(i, j))
                    }
                })
                .collect()
        })
        .collect()
}

/// `D_n`: nullity of `(H − λ)` with rows `Λ_n(ω)` and columns `Λ_{n,R}(ω)`.
/// The system splits over connected components of the window graph.
pub fn compact_kernel_dim(
    op: &OperatorRealization,
    window: &FolnerBox,
    level: &Level,
    mode: Mode,
) -> Result<(usize, CompactEigenbasis)> {
    let exact = exact_lambda(level, mode)?;
    let rop = restrict(op, window)?;
    let inner = interior(op.carrier(), &window.window, op.hopping_range());
    let lambda = level.value();
    let mut vectors = Vec::new();
    let mut exact_vectors = Vec::new();
    for comp in rop.components() {
        let cols: Vec<usize> = comp.iter().copied().filter(|&i| inner.contains(rop.indices()[i])).collect();
        if cols.is_empty() {
            continue;
        }
        let embed = |coeffs: &[Complex64]| {
            let mut v = vec![Complex64::new(0.0, 0.0); rop.dim()];
            for (b, &j) in cols.iter().enumerate() {
                v[j] = coeffs[b];
            }
            v
        };
        match &exact {
            None => {
                let (_, null) = linalg::rank_and_null_space(&system(&rop, &comp, &cols, lambda));
                vectors.extend(null.iter().map(|c| embed(c)));
            }
            Some(q) => {
                let m = exact_system(&rop, &comp, &cols, q)?;
                let echelon = bareiss_echelon(integer_rows(&m), cols.len());
                for null in echelon.null_space() {
                    let mut v = vec![BigRational::zero(); rop.dim()];
                    for (b, &j) in cols.iter().enumerate() {
                        v[j] = null[b].clone();
                    }
                    vectors.push(v.iter().map(|x| Complex64::new(x.to_f64().unwrap_or(f64::NAN), 0.0)).collect());
                    exact_vectors.push(v);
                }
            }
        }
    }
    let basis = CompactEigenbasis {
        lambda,
        rows: rop.indices().to_vec(),
        vectors,
        exact: exact.map(|_| exact_vectors),
    };
    Ok((basis.len(), basis))
}

/// Multiplicity of `λ` as an eigenvalue of `H_{ω,n}`: eigenvalues within the
/// merging tolerance in float mode, exact nullity in exact mode.
pub fn atom_count(rop: &RestrictedOperator, level: &Level, mode: Mode) -> Result<usize> {
    match exact_lambda(level, mode)? {
        None => {
            let tol = rop.merge_tolerance();
            let lambda = level.value();
            Ok(spectrum(rop)?.iter().filter(|e| (*e - lambda).abs() <= tol).count())
        }
        Some(q) => {
            let mut total = 0;
            for comp in rop.components() {
                let m = exact_system(rop, &comp, &comp, &q)?;
                total += bareiss_echelon(integer_rows(&m), comp.len()).nullity();
            }
            Ok(total)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpEstimate {
    pub lambda: f64,
    pub n: usize,
    pub seed: u64,
    pub mode: Mode,
    /// `D_n`.
    pub compact_dim: usize,
    /// `ν_{ω,n}({λ})`.
    pub atom_count: usize,
    /// `Tr χ_Λ E_ω({λ})` proxy; not computed by [`jump_sandwich`].
    pub trace_count: Option<f64>,
    /// `ω(∂^R Λ_n)`.
    pub boundary_budget: usize,
    /// `ω(Λ_n)`.
    pub active: usize,
    pub lower: f64,
    pub upper: f64,
}

impl JumpEstimate {
    pub const CSV_HEADER: &'static str = "lambda,n,seed,D,atom_count,boundary_budget,lower,upper";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.lambda, self.n, self.seed, self.compact_dim, self.atom_count, self.boundary_budget, self.lower, self.upper
        )
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Assembles `D_n`, the atom count and the boundary budget, and fails with
/// [`Error::SandwichViolation`] if `0 ≤ atom_count − D_n ≤ ω(∂^R Λ_n)` breaks.
pub fn jump_sandwich(op: &OperatorRealization, window: &FolnerBox, level: &Level, mode: Mode) -> Result<JumpEstimate> {
    let rop = restrict(op, window)?;
    let (compact_dim, _) = compact_kernel_dim(op, window, level, mode)?;
    let atoms = atom_count(&rop, level, mode)?;
    let budget = op.weight(&boundary_shell(op.carrier(), &window.window, op.hopping_range()));
    if atoms < compact_dim || atoms - compact_dim > budget {
        return Err(Error::SandwichViolation {
            lambda: level.value(),
            compact_dim,
            atom_count: atoms,
            budget,
        });
    }
    let active = rop.dim();
    let (lower, upper) = if active == 0 {
        (0.0, 0.0)
    } else {
        (compact_dim as f64 / active as f64, atoms as f64 / active as f64)
    };
    Ok(JumpEstimate {
        lambda: level.value(),
        n: window.n,
        seed: op.seed(),
        mode,
        compact_dim,
        atom_count: atoms,
        trace_count: None,
        boundary_budget: budget,
        active,
        lower,
        upper,
    })
}

/// Atoms of the pooled function with mass at least `threshold`.
pub fn candidate_jump_scan(ids: &IdsEstimate, threshold: f64) -> Vec<(f64, f64)> {
    ids.pooled.atoms().into_iter().filter(|a| a.1 >= threshold).collect()
}

#[derive(Debug, Clone)]
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Cluster decomposition of the compactly supported solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterCount {
    /// From clusters lying entirely inside `Λ_{n,R}`.
    pub contained: usize,
    /// From clusters that meet `Λ_{n,R}` without being contained in it.
    pub straddling: usize,
    pub total: usize,
}

fn check_percolation(op: &OperatorRealization) -> Result<()> {
    for x in (0..op.carrier().len()).filter(|&x| op.is_active(x)) {
        if op.diagonal(x) != 0.0 {
            return Err(Error::NotPercolation("non-zero diagonal".into()));
        }
        if op.row(x).iter().any(|&(_, z)| z != Complex64::new(1.0, 0.0)) {
            return Err(Error::NotPercolation("hopping amplitudes other than 1".into()));
        }
    }
    Ok(())
}

fn adjacency_nullity(
    op: &OperatorRealization,
    rows: &[usize],
    cols: &[usize],
    lambda: f64,
    exact: Option<&BigRational>,
    tol: f64,
    square: bool,
) -> Result<usize> {
    let entry = |x: usize, y: usize| -> i64 {
        if x == y {
            0
        } else {
            i64::from(op.row(x).binary_search_by_key(&y, |e| e.0).is_ok())
        }
    };
    match exact {
        Some(q) => {
            let m: Vec<Vec<BigRational>> = rows
                .iter()
                .map(|&x| {
                    cols.iter()
                        .map(|&y| {
                            let a = BigRational::from_integer(entry(x, y).into());
                            if x == y {
                                a - q
                            } else {
                                a
                            }
                        })
                        .collect()
                })
                .collect();
            Ok(cols.len() - gauss_jordan_rank(m, cols.len()))
        }
        None if square => {
            let m = DMatrix::from_fn(rows.len(), rows.len(), |a, b| Complex64::new(entry(rows[a], rows[b]) as f64, 0.0));
            let vals = linalg::hermitian_eigenvalues(&m)?;
            Ok(vals.iter().filter(|e| (*e - lambda).abs() <= tol).count())
        }
        None => {
            let m = DMatrix::from_fn(rows.len(), cols.len(), |a, b| {
                let (x, y) = (rows[a], cols[b]);
                Complex64::new(entry(x, y) as f64 - if x == y { lambda } else { 0.0 }, 0.0)
            });
            Ok(cols.len() - linalg::rank_and_null_space(&m).0)
        }
    }
}

/// Independent count of compactly supported solutions for adjacency models:
/// clusters are found by union–find over the whole patch and each cluster's
/// share is an eigenvalue multiplicity (contained clusters) or a rectangular
/// nullity (clusters crossing the interior edge).
pub fn cluster_oracle(op: &OperatorRealization, window: &FolnerBox, level: &Level, mode: Mode) -> Result<ClusterCount> {
    check_percolation(op)?;
    let exact = exact_lambda(level, mode)?;
    window.require_margin(op.carrier(), op.hopping_range())?;
    let n = op.carrier().len();
    let mut uf = UnionFind::new(n);
    for x in 0..n {
        for &(y, _) in op.row(x) {
            uf.union(x, y);
        }
    }
    let inner = interior(op.carrier(), &window.window, op.hopping_range());
    let mut clusters: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for x in (0..n).filter(|&x| op.is_active(x)) {
        let root = uf.find(x);
        clusters.entry(root).or_default().push(x);
    }
    let tol = crate::spectra::MERGE_RTOL * op.norm_bound().max(1.0);
    let lambda = level.value();
    let mut count = ClusterCount { contained: 0, straddling: 0, total: 0 };
    for members in clusters.values() {
        let cols: Vec<usize> = members.iter().copied().filter(|&x| inner.contains(x)).collect();
        if cols.is_empty() {
            continue;
        }
        if cols.len() == members.len() {
            count.contained += adjacency_nullity(op, members, members, lambda, exact.as_ref(), tol, true)?;
        } else {
            let rows: Vec<usize> = members.iter().copied().filter(|&x| window.window.contains(x)).collect();
            count.straddling += adjacency_nullity(op, &rows, &cols, lambda, exact.as_ref(), tol, false)?;
        }
    }
    count.total = count.contained + count.straddling;
    Ok(count)
}
