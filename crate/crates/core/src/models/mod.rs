//! Sampling of finite-range operator realizations `ω = (A, h)`.
//!
//! A realization is `h = (h₀ + V_ω) χ_{A×A}`: a hopping kernel `h₀`, an
//! i.i.d. bounded diagonal potential, and site or bond dilution. Every
//! random choice is keyed by canonical point indices (see [`crate::rng`]),
//! so a realization is a pure function of `(spec, carrier, seed)`.

mod density;
mod magnetic;

pub use density::{density_estimate, DensityEstimate};
pub use magnetic::{apply_magnetic_phase, check_equivariance, EquivarianceCheck, Gauge, MagneticPhase};

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Metric, PointSet, PointSubset};
use crate::rng::{self, pair_key, Stream};

/// One entry `h₀(v)` of a lattice hopping table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hop {
    pub displacement: Vec<i64>,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    /// Finitely supported table over lattice displacements; `H(x, y) = h₀(x − y)`.
    Table { hops: Vec<Hop> },
    /// `h₀(v) = amplitude` for `0 < |v| ≤ radius` in the carrier metric.
    Radial { radius: f64, amplitude: f64 },
}

impl Kernel {
    /// Nearest-neighbour hopping with amplitude `t` on `ℤ^d`.
    pub fn nearest_neighbor(dim: usize, t: f64) -> Kernel {
        let mut hops = Vec::with_capacity(2 * dim);
        for a in 0..dim {
            for s in [-1, 1] {
                let mut v = vec![0; dim];
                v[a] = s;
                hops.push(Hop { displacement: v, amplitude: Complex64::new(t, 0.0) });
            }
        }
        Kernel::Table { hops }
    }

    pub fn support_radius(&self, metric: Metric) -> f64 {
        match self {
            Kernel::Table { hops } => hops
                .iter()
                .map(|h| {
                    let v: Vec<f64> = h.displacement.iter().map(|&c| c as f64).collect();
                    metric.distance(&v, &vec![0.0; v.len()])
                })
                .fold(0.0, f64::max),
            Kernel::Radial { radius, .. } => *radius,
        }
    }

    /// `‖h₀‖_∞`.
    pub fn sup_norm(&self) -> f64 {
        match self {
            Kernel::Table { hops } => hops.iter().map(|h| h.amplitude.norm()).fold(0.0, f64::max),
            Kernel::Radial { amplitude, .. } => amplitude.abs(),
        }
    }

    /// Checks `h₀(−v) = conj(h₀(v))`.
    pub fn validate(&self) -> Result<()> {
        match self {
            Kernel::Table { hops } => {
                for h in hops {
                    let neg: Vec<i64> = h.displacement.iter().map(|c| -c).collect();
                    let partner = hops.iter().find(|g| g.displacement == neg).ok_or_else(|| {
                        Error::InvalidKernel(format!("no partner for displacement {neg:?}"))
                    })?;
                    if (partner.amplitude - h.amplitude.conj()).norm() > 1e-15 {
                        return Err(Error::InvalidKernel(format!(
                            "h0({neg:?}) != conj(h0({:?}))",
                            h.displacement
                        )));
                    }
                }
                let mut seen = std::collections::HashSet::new();
                for h in hops {
                    if !seen.insert(&h.displacement) {
                        return Err(Error::InvalidKernel(format!(
                            "duplicate displacement {:?}",
                            h.displacement
                        )));
                    }
                }
                Ok(())
            }
            Kernel::Radial { radius, amplitude } => {
                if !(*radius > 0.0) || !amplitude.is_finite() {
                    return Err(Error::InvalidKernel("radial kernel needs radius > 0".into()));
                }
                Ok(())
            }
        }
    }
}

/// Bounded i.i.d. law of the diagonal potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialLaw {
    None,
    /// Uniform on `[−bound, bound]`.
    Uniform { bound: f64 },
    Bernoulli { values: Vec<f64>, probs: Vec<f64> },
}

impl PotentialLaw {
    /// The constant `C` with `|V_ω| ≤ C`.
    pub fn bound(&self) -> f64 {
        match self {
            PotentialLaw::None => 0.0,
            PotentialLaw::Uniform { bound } => *bound,
            PotentialLaw::Bernoulli { values, .. } => values.iter().map(|v| v.abs()).fold(0.0, f64::max),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            PotentialLaw::None => Ok(()),
            PotentialLaw::Uniform { bound } if *bound >= 0.0 && bound.is_finite() => Ok(()),
            PotentialLaw::Uniform { bound } => {
                Err(Error::InvalidParameter(format!("potential bound {bound} must be finite and ≥ 0")))
            }
            PotentialLaw::Bernoulli { values, probs } => {
                let sum: f64 = probs.iter().sum();
                if values.is_empty()
                    || values.len() != probs.len()
                    || probs.iter().any(|p| *p < 0.0)
                    || (sum - 1.0).abs() > 1e-9
                    || values.iter().any(|v| !v.is_finite())
                {
                    return Err(Error::InvalidParameter(
                        "bernoulli potential needs matching values/probs summing to 1".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    fn sample(&self, u: f64) -> f64 {
        match self {
            PotentialLaw::None => 0.0,
            PotentialLaw::Uniform { bound } => (2.0 * u - 1.0) * bound,
            PotentialLaw::Bernoulli { values, probs } => {
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                *values.last().expect("validated non-empty")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dilution {
    None,
    /// Each site kept independently with probability `p`.
    Site { p: f64 },
    /// Each hopping pair kept independently with probability `p`.
    Bond { p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kernel: Kernel,
    /// `R`: `h(x, y) = 0` whenever `d(x, y) > R`.
    pub hopping_range: f64,
    pub potential: PotentialLaw,
    pub dilution: Dilution,
    /// Magnetic flux per plaquette (Landau gauge), in units of the flux quantum.
    pub flux: f64,
    /// `dens(m)` when analytically known.
    pub density_hint: Option<f64>,
}

impl ModelSpec {
    /// Plain nearest-neighbour adjacency on `ℤ^d`.
    pub fn adjacency(dim: usize) -> Self {
        ModelSpec {
            kernel: Kernel::nearest_neighbor(dim, 1.0),
            hopping_range: 1.0,
            potential: PotentialLaw::None,
            dilution: Dilution::None,
            flux: 0.0,
            density_hint: None,
        }
    }

    pub fn with_potential(mut self, potential: PotentialLaw) -> Self {
        self.potential = potential;
        self
    }

    pub fn with_dilution(mut self, dilution: Dilution) -> Self {
        self.dilution = dilution;
        self
    }

    pub fn with_flux(mut self, flux: f64) -> Self {
        self.flux = flux;
        self
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.potential, PotentialLaw::None) && matches!(self.dilution, Dilution::None)
    }

    /// `dens(m)` for lattice carriers: the hint, else `p` for site dilution,
    /// else one point per unit cell.
    pub fn lattice_density(&self) -> f64 {
        self.density_hint.unwrap_or(match self.dilution {
            Dilution::Site { p } => p,
            _ => 1.0,
        })
    }

    pub fn validate(&self, carrier: &PointSet) -> Result<()> {
        self.kernel.validate()?;
        self.potential.validate()?;
        if let Dilution::Site { p } | Dilution::Bond { p } = self.dilution {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("dilution probability {p} outside [0, 1]")));
            }
        }
        if !(0.0..1.0).contains(&self.flux) {
            return Err(Error::InvalidParameter(format!("flux {} outside [0, 1)", self.flux)));
        }
        if let Kernel::Table { hops } = &self.kernel {
            if !carrier.is_lattice() {
                return Err(Error::NotALattice("table kernels need integer displacements".into()));
            }
            if hops.iter().any(|h| h.displacement.len() != carrier.dim()) {
                return Err(Error::InvalidKernel("displacement dimension mismatch".into()));
            }
        }
        let support = self.kernel.support_radius(carrier.metric());
        if support > self.hopping_range + 1e-12 {
            return Err(Error::InvalidKernel(format!(
                "kernel support {support} exceeds hopping range {}",
                self.hopping_range
            )));
        }
        let (lo, hi) = carrier.region();
        let width = lo.iter().zip(hi).map(|(l, h)| h - l).fold(f64::INFINITY, f64::min);
        if 2.0 * self.hopping_range >= width {
            return Err(Error::InvalidParameter(format!(
                "hopping range {} too large for patch of width {width}",
                self.hopping_range
            )));
        }
        Ok(())
    }
}

/// One sampled operator on a carrier patch.
#[derive(Debug, Clone)]
pub struct OperatorRealization {
    carrier: Arc<PointSet>,
    active: Vec<bool>,
    diagonal: Vec<f64>,
    /// Off-diagonal entries per row, sorted by column.
    hops: Vec<Vec<(usize, Complex64)>>,
    seed: u64,
    hopping_range: f64,
    norm_bound: f64,
}

impl OperatorRealization {
    pub(crate) fn from_parts(
        carrier: Arc<PointSet>,
        active: Vec<bool>,
        diagonal: Vec<f64>,
        mut hops: Vec<Vec<(usize, Complex64)>>,
        seed: u64,
        hopping_range: f64,
    ) -> Self {
        for row in &mut hops {
            row.sort_by_key(|e| e.0);
        }
        let norm_bound = (0..carrier.len())
            .filter(|&i| active[i])
            .map(|i| diagonal[i].abs() + hops[i].iter().map(|e| e.1.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        OperatorRealization { carrier, active, diagonal, hops, seed, hopping_range, norm_bound }
    }

    pub fn carrier(&self) -> &PointSet {
        &self.carrier
    }

    pub fn carrier_arc(&self) -> &Arc<PointSet> {
        &self.carrier
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn hopping_range(&self) -> f64 {
        self.hopping_range
    }

    /// Row-sum bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.diagonal[i]
    }

    pub fn row(&self, i: usize) -> &[(usize, Complex64)] {
        &self.hops[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        if i == j {
            return Complex64::new(if self.active[i] { self.diagonal[i] } else { 0.0 }, 0.0);
        }
        match self.hops[i].binary_search_by_key(&j, |e| e.0) {
            Ok(k) => self.hops[i][k].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// `ω(S)`.
    pub fn weight(&self, set: &PointSubset) -> usize {
        set.weight(Some(&self.active))
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    pub fn stored_hops(&self) -> usize {
        self.hops.iter().map(Vec::len).sum()
    }

    /// Largest `|h(x, y) − conj h(y, x)|` over stored pairs.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.hops.iter().enumerate() {
            for &(j, z) in row {
                worst = worst.max((z - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Largest distance between stored hopping pairs.
    pub fn max_hop_distance(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.hops.iter().enumerate() {
            for &(j, _) in row {
                worst = worst.max(self.carrier.distance(i, j));
            }
        }
        worst
    }

    pub(crate) fn map_hops(&self, mut f: impl FnMut(usize, usize, Complex64) -> Complex64) -> Self {
        let hops = self
            .hops
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().map(|&(j, z)| (j, f(i, j, z))).collect())
            .collect();
        Self::from_parts(
            self.carrier.clone(),
            self.active.clone(),
            self.diagonal.clone(),
            hops,
            self.seed,
            self.hopping_range,
        )
    }

    /// Sparse triplet dump: a point table header followed by `i j re im`.
    pub fn to_triplet_text(&self) -> String {
        let mut s = format!(
            "# dim={} metric={} points={} seed={}\n",
            self.carrier.dim(),
            self.carrier.metric().name(),
            self.carrier.len(),
            self.seed
        );
        for (i, p) in self.carrier.points().enumerate() {
            let coords = p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
            let _ = writeln!(s, "# point {i} {} {coords}", u8::from(self.active[i]));
        }
        for i in 0..self.carrier.len() {
            if !self.active[i] {
                continue;
            }
            if self.diagonal[i] != 0.0 {
                let _ = writeln!(s, "{i} {i} {} 0", self.diagonal[i]);
            }
            for &(j, z) in &self.hops[i] {
                let _ = writeln!(s, "{i} {j} {} {}", z.re, z.im);
            }
        }
        s
    }
}

/// Samples `h = (h₀ + V_ω) χ_{A×A}` on the carrier.
pub fn build_operator(spec: &ModelSpec, carrier: Arc<PointSet>, seed: u64) -> Result<OperatorRealization> {
    spec.validate(&carrier)?;
    let n = carrier.len();
    let active: Vec<bool> = (0..n)
        .map(|i| match spec.dilution {
            Dilution::Site { p } => rng::uniform(seed, Stream::Site, i as u128) < p,
            _ => true,
        })
        .collect();
    let diagonal: Vec<f64> = (0..n)
        .map(|i| match spec.potential {
            PotentialLaw::None => 0.0,
            ref law => law.sample(rng::uniform(seed, Stream::Potential, i as u128)),
        })
        .collect();
    let bond_kept = |i: usize, j: usize| match spec.dilution {
        Dilution::Bond { p } => rng::uniform(seed, Stream::Bond, pair_key(i, j)) < p,
        _ => true,
    };
    let hops: Vec<Vec<(usize, Complex64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            if !active[i] {
                return Vec::new();
            }
            let x = carrier.point(i);
            let mut row = Vec::new();
            match &spec.kernel {
                Kernel::Table { hops } => {
                    for h in hops {
                        if h.displacement.iter().all(|c| *c == 0) {
                            continue;
                        }
                        // h0(x − y) with y = x − v
                        let y: Vec<f64> = x.iter().zip(&h.displacement).map(|(c, v)| c - *v as f64).collect();
                        if let Some(j) = carrier.find(&y) {
                            if active[j] && bond_kept(i, j) && h.amplitude != Complex64::new(0.0, 0.0) {
                                row.push((j, h.amplitude));
                            }
                        }
                    }
                }
                Kernel::Radial { radius, amplitude } => {
                    if *amplitude != 0.0 {
                        for j in carrier.ball(x, *radius, false) {
                            if j != i && active[j] && bond_kept(i, j) {
                                row.push((j, Complex64::new(*amplitude, 0.0)));
                            }
                        }
                    }
                }
            }
            row
        })
        .collect();
    // on-site part of a table kernel
    let onsite = match &spec.kernel {
        Kernel::Table { hops } => hops
            .iter()
            .find(|h| h.displacement.iter().all(|c| *c == 0))
            .map(|h| h.amplitude.re)
            .unwrap_or(0.0),
        Kernel::Radial { .. } => 0.0,
    };
    let diagonal = diagonal.into_iter().map(|v| v + onsite).collect();
    let op = OperatorRealization::from_parts(carrier, active, diagonal, hops, seed, spec.hopping_range);
    if spec.flux != 0.0 {
        return apply_magnetic_phase(&op, &MagneticPhase { flux: spec.flux });
    }
    Ok(op)
}

/// Bond percolation on a Delone carrier: each pair with `h₀(x − y) ≠ 0` is
/// kept with probability `p` and carries `h₀(x − y)`.
pub fn build_delone_percolation(
    spec: &ModelSpec,
    carrier: Arc<PointSet>,
    seed: u64,
) -> Result<OperatorRealization> {
    spec.kernel.validate()?;
    if !matches!(spec.dilution, Dilution::Bond { .. }) {
        return Err(Error::InvalidParameter("Delone percolation needs bond dilution".into()));
    }
    build_operator(spec, carrier, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_delone, generate_lattice, DeloneSpec, GOLDEN_MEAN};

    fn z(dim: usize, n: usize) -> Arc<PointSet> {
        Arc::new(generate_lattice(dim, n).unwrap())
    }

    #[test]
    fn free_chain_is_path_adjacency() {
        let carrier = z(1, 4);
        let op = build_operator(&ModelSpec::adjacency(1), carrier.clone(), 0).unwrap();
        for i in 0..carrier.len() {
            for j in 0..carrier.len() {
                let expected = if i.abs_diff(j) == 1 { 1.0 } else { 0.0 };
                assert_eq!(op.entry(i, j), Complex64::new(expected, 0.0));
            }
        }
        assert_eq!(op.norm_bound(), 2.0);
    }

    #[test]
    fn full_site_dilution_gives_zero_operator() {
        let spec = ModelSpec::adjacency(2)
            .with_dilution(Dilution::Site { p: 0.0 })
            .with_potential(PotentialLaw::Uniform { bound: 1.0 });
        let op = build_operator(&spec, z(2, 5), 4).unwrap();
        assert_eq!(op.active_count(), 0);
        assert_eq!(op.stored_hops(), 0);
        assert_eq!(op.norm_bound(), 0.0);
    }

    #[test]
    fn bond_fraction_is_binomial() {
        let carrier = z(2, 36);
        let p = 0.37;
        let op = build_operator(&ModelSpec::adjacency(2).with_dilution(Dilution::Bond { p }), carrier.clone(), 9)
            .unwrap();
        let full = build_operator(&ModelSpec::adjacency(2), carrier, 9).unwrap();
        let pairs = full.stored_hops() as f64 / 2.0;
        assert!(pairs > 1e4);
        let kept = op.stored_hops() as f64 / 2.0;
        let sd = (pairs * p * (1.0 - p)).sqrt();
        assert!((kept - pairs * p).abs() < 3.0 * sd, "kept {kept} of {pairs}");
    }

    #[test]
    fn realizations_are_hermitian_and_finite_range() {
        let carrier = z(2, 8);
        for (k, dilution) in [Dilution::None, Dilution::Site { p: 0.6 }, Dilution::Bond { p: 0.4 }]
            .into_iter()
            .enumerate()
        {
            let spec = ModelSpec::adjacency(2)
                .with_dilution(dilution)
                .with_potential(PotentialLaw::Bernoulli { values: vec![-1.0, 2.0], probs: vec![0.3, 0.7] });
            let op = build_operator(&spec, carrier.clone(), k as u64).unwrap();
            assert_eq!(op.hermiticity_defect(), 0.0);
            assert!(op.max_hop_distance() <= spec.hopping_range);
            for i in 0..carrier.len() {
                for &(j, zz) in op.row(i) {
                    assert!(op.is_active(i) && op.is_active(j));
                    assert!(zz.norm() <= spec.kernel.sup_norm() + spec.potential.bound());
                }
            }
        }
    }

    #[test]
    fn bond_dilution_keeps_diagonal_and_sites() {
        let spec = ModelSpec::adjacency(2)
            .with_potential(PotentialLaw::Uniform { bound: 1.0 })
            .with_dilution(Dilution::Bond { p: 0.5 });
        let undiluted = ModelSpec::adjacency(2).with_potential(PotentialLaw::Uniform { bound: 1.0 });
        let a = build_operator(&spec, z(2, 6), 2).unwrap();
        let b = build_operator(&undiluted, z(2, 6), 2).unwrap();
        assert_eq!(a.active_count(), b.active_count());
        for i in 0..a.carrier().len() {
            assert_eq!(a.diagonal(i), b.diagonal(i));
            for &(j, _) in a.row(i) {
                assert_eq!(a.entry(i, j), b.entry(i, j));
            }
        }
    }

    #[test]
    fn reproducible_under_thread_counts() {
        let spec = ModelSpec::adjacency(2)
            .with_dilution(Dilution::Bond { p: 0.5 })
            .with_potential(PotentialLaw::Uniform { bound: 2.0 });
        let carrier = z(2, 12);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| build_operator(&spec, carrier.clone(), 77).unwrap());
        let b = four.install(|| build_operator(&spec, carrier.clone(), 77).unwrap());
        assert_eq!(a.to_triplet_text(), b.to_triplet_text());
        let c = build_operator(&spec, carrier, 78).unwrap();
        assert_ne!(a.to_triplet_text(), c.to_triplet_text());
    }

    #[test]
    fn non_hermitian_kernel_rejected() {
        let kernel = Kernel::Table {
            hops: vec![
                Hop { displacement: vec![1], amplitude: Complex64::new(1.0, 0.0) },
                Hop { displacement: vec![-1], amplitude: Complex64::new(2.0, 0.0) },
            ],
        };
        let spec = ModelSpec { kernel, ..ModelSpec::adjacency(1) };
        assert!(matches!(build_operator(&spec, z(1, 5), 0), Err(Error::InvalidKernel(_))));
        let one_sided = Kernel::Table {
            hops: vec![Hop { displacement: vec![1], amplitude: Complex64::new(1.0, 0.0) }],
        };
        let spec = ModelSpec { kernel: one_sided, ..ModelSpec::adjacency(1) };
        assert!(spec.kernel.validate().is_err());
    }

    #[test]
    fn range_larger_than_patch_rejected() {
        let spec = ModelSpec { hopping_range: 5.0, ..ModelSpec::adjacency(1) };
        assert!(build_operator(&spec, z(1, 3), 0).is_err());
    }

    fn fib_spec(p: f64) -> ModelSpec {
        ModelSpec {
            kernel: Kernel::Radial { radius: GOLDEN_MEAN, amplitude: 1.0 },
            hopping_range: GOLDEN_MEAN,
            potential: PotentialLaw::None,
            dilution: Dilution::Bond { p },
            flux: 0.0,
            density_hint: None,
        }
    }

    #[test]
    fn delone_percolation_limits() {
        let carrier = Arc::new(generate_delone(&DeloneSpec::Fibonacci, 200.0).unwrap());
        let full = build_delone_percolation(&fib_spec(1.0), carrier.clone(), 3).unwrap();
        for i in 1..carrier.len() {
            assert_eq!(full.entry(i, i - 1), Complex64::new(1.0, 0.0));
        }
        assert_eq!(full.stored_hops(), 2 * (carrier.len() - 1));
        let none = build_delone_percolation(&fib_spec(0.0), carrier.clone(), 3).unwrap();
        assert_eq!(none.stored_hops(), 0);
        assert_eq!(none.active_count(), carrier.len());
    }

    #[test]
    fn delone_percolation_half() {
        let carrier = Arc::new(generate_delone(&DeloneSpec::Fibonacci, 20_000.0).unwrap());
        let op = build_delone_percolation(&fib_spec(0.5), carrier.clone(), 21).unwrap();
        let pairs = (carrier.len() - 1) as f64;
        let kept = op.stored_hops() as f64 / 2.0;
        assert!((kept - 0.5 * pairs).abs() < 3.0 * (pairs * 0.25).sqrt());
        assert_eq!(op.hermiticity_defect(), 0.0);
    }

    #[test]
    fn delone_percolation_needs_bond_dilution() {
        let carrier = Arc::new(generate_delone(&DeloneSpec::Fibonacci, 50.0).unwrap());
        let spec = ModelSpec { dilution: Dilution::None, ..fib_spec(1.0) };
        assert!(build_delone_percolation(&spec, carrier, 0).is_err());
    }
}
