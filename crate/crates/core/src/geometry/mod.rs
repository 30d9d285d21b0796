//! Point-set carriers, Følner windows and boundary set operations.
//!
//! A [`PointSet`] is a finite patch of a uniformly discrete space `X`
//! together with the half-open region `[lo, hi)` it was generated in. Points
//! outside the region are never stored but are still treated as part of `X`
//! when interiors are computed, so a point close to the patch edge is never
//! considered interior.

mod boundary;
mod delone;

pub use boundary::{
    boundary_ratio_series, boundary_shell, folner_box, folner_box_at, interior, lattice_ball_size,
    outer_neighborhood, packing_constant, FolnerBox,
};
pub use delone::{fibonacci_word, generate_delone, DeloneSpec, Spacing, GOLDEN_MEAN};

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when comparing real-valued distances against radii.
pub(crate) const DIST_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// ℓ¹ distance, the graph metric of the nearest-neighbour lattice.
    Graph,
    Euclidean,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Graph => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Graph => "graph",
            Metric::Euclidean => "euclidean",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graph" => Ok(Metric::Graph),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::InvalidParameter(format!("unknown metric `{other}`"))),
        }
    }
}

/// Finite patch of a uniformly discrete carrier, lexicographically ordered.
#[derive(Debug, Clone)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    metric: Metric,
    min_separation: f64,
    lattice: bool,
    region_lo: Vec<f64>,
    region_hi: Vec<f64>,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl PointSet {
    /// Builds a point set, sorting the points and checking that no two are
    /// closer than `min_separation`.
    pub fn new(
        dim: usize,
        mut points: Vec<Vec<f64>>,
        metric: Metric,
        min_separation: f64,
        region: (Vec<f64>, Vec<f64>),
        lattice: bool,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !(min_separation > 0.0) {
            return Err(Error::InvalidParameter("min_separation must be positive".into()));
        }
        let (region_lo, region_hi) = region;
        if region_lo.len() != dim || region_hi.len() != dim {
            return Err(Error::InvalidParameter("region dimension mismatch".into()));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidParameter("point dimension mismatch".into()));
        }
        points.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let coords: Vec<f64> = points.into_iter().flatten().collect();
        let mut set = PointSet {
            dim,
            coords,
            metric,
            min_separation,
            lattice,
            region_lo,
            region_hi,
            cells: HashMap::new(),
        };
        for i in 0..set.len() {
            let cell = set.cell_of(set.point(i));
            set.cells.entry(cell).or_default().push(i);
        }
        for i in 0..set.len() {
            let p = set.point(i).to_vec();
            for j in set.ball(&p, min_separation, true) {
                if j != i {
                    return Err(Error::InvalidParameter(format!(
                        "points {i} and {j} are closer than {min_separation}"
                    )));
                }
            }
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    /// True for integer lattice patches (graph metric, integer coordinates).
    pub fn is_lattice(&self) -> bool {
        self.lattice
    }

    pub fn region(&self) -> (&[f64], &[f64]) {
        (&self.region_lo, &self.region_hi)
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.metric.distance(self.point(i), self.point(j))
    }

    /// Index of the point with exactly these coordinates.
    pub fn find(&self, x: &[f64]) -> Option<usize> {
        self.cells
            .get(&self.cell_of(x))?
            .iter()
            .copied()
            .find(|&i| self.point(i) == x)
    }

    /// Indices of points within distance `r` of `center`; `strict` selects
    /// `d < r` instead of `d <= r`. Sorted ascending.
    pub fn ball(&self, center: &[f64], r: f64, strict: bool) -> Vec<usize> {
        let mut out = Vec::new();
        if r < 0.0 || (strict && r <= 0.0) {
            return out;
        }
        let lo: Vec<i64> = center.iter().map(|c| (c - r).floor() as i64).collect();
        let hi: Vec<i64> = center.iter().map(|c| (c + r).floor() as i64).collect();
        let mut cell = lo.clone();
        loop {
            if let Some(members) = self.cells.get(&cell) {
                for &i in members {
                    let d = self.metric.distance(center, self.point(i));
                    let inside = if strict { d < r - DIST_EPS } else { d <= r + DIST_EPS };
                    if inside {
                        out.push(i);
                    }
                }
            }
            // odometer over the cell range
            let mut axis = 0;
            loop {
                if axis == self.dim {
                    out.sort_unstable();
                    return out;
                }
                if cell[axis] < hi[axis] {
                    cell[axis] += 1;
                    break;
                }
                cell[axis] = lo[axis];
                axis += 1;
            }
        }
    }

    /// Distance from point `i` to the part of `X` lying outside the patch.
    pub fn exterior_distance(&self, i: usize) -> f64 {
        let p = self.point(i);
        let mut best = f64::INFINITY;
        for a in 0..self.dim {
            let below = if self.lattice {
                // nearest exterior lattice point is lo - 1
                p[a] - self.region_lo[a] + 1.0
            } else {
                p[a] - self.region_lo[a]
            };
            best = best.min(below).min(self.region_hi[a] - p[a]);
        }
        best
    }

    fn cell_of(&self, x: &[f64]) -> Vec<i64> {
        x.iter().map(|c| c.floor() as i64).collect()
    }

    /// Line-oriented text form: a `# dim=<d> metric=<kind>` header, a
    /// region comment, then one point per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("# dim={} metric={}\n", self.dim, self.metric.name());
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(
            s,
            "# region_lo={} region_hi={} lattice={} min_separation={}",
            join(&self.region_lo).replace(' ', ","),
            join(&self.region_hi).replace(' ', ","),
            self.lattice,
            self.min_separation
        );
        for p in self.points() {
            s.push_str(&join(p));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut metric = None;
        let mut region: Option<(Vec<f64>, Vec<f64>)> = None;
        let mut lattice = false;
        let mut min_sep = 1.0;
        let mut points = Vec::new();
        let parse_list = |v: &str, line: usize| -> Result<Vec<f64>> {
            v.split(',')
                .map(|t| t.parse::<f64>().map_err(|e| Error::Parse { line, msg: e.to_string() }))
                .collect()
        };
        let mut lo = None;
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            if let Some(rest) = raw.strip_prefix('#') {
                for tok in rest.split_whitespace() {
                    let Some((k, v)) = tok.split_once('=') else { continue };
                    match k {
                        "dim" => {
                            dim = Some(v.parse::<usize>().map_err(|e| Error::Parse {
                                line,
                                msg: e.to_string(),
                            })?)
                        }
                        "metric" => metric = Some(v.parse::<Metric>()?),
                        "region_lo" => lo = Some(parse_list(v, line)?),
                        "region_hi" => {
                            let hi = parse_list(v, line)?;
                            let lo = lo.take().ok_or(Error::Parse {
                                line,
                                msg: "region_hi before region_lo".into(),
                            })?;
                            region = Some((lo, hi));
                        }
                        "lattice" => lattice = v == "true",
                        "min_separation" => {
                            min_sep = v.parse().map_err(|_| Error::Parse {
                                line,
                                msg: "bad min_separation".into(),
                            })?
                        }
                        _ => {}
                    }
                }
                continue;
            }
            let p = raw
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            points.push(p);
        }
        let dim = dim.ok_or(Error::Parse { line: 1, msg: "missing dim header".into() })?;
        let metric = metric.ok_or(Error::Parse { line: 1, msg: "missing metric header".into() })?;
        let region = match region {
            Some(r) => r,
            None => {
                // bounding box of the points
                let mut lo = vec![f64::INFINITY; dim];
                let mut hi = vec![f64::NEG_INFINITY; dim];
                for p in &points {
                    for a in 0..dim.min(p.len()) {
                        lo[a] = lo[a].min(p[a]);
                        hi[a] = hi[a].max(p[a] + 1.0);
                    }
                }
                (lo, hi)
            }
        };
        PointSet::new(dim, points, metric, min_sep, region, lattice)
    }
}

/// Generates `ℤ^d ∩ [−n_max, n_max)^d` with the graph metric.
pub fn generate_lattice(dim: usize, n_max: usize) -> Result<PointSet> {
    if !(1..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let side = 2 * n_max;
    let total = side.pow(dim as u32);
    let mut points = Vec::with_capacity(total);
    for k in 0..total {
        let mut rem = k;
        let mut p = vec![0.0; dim];
        for a in (0..dim).rev() {
            p[a] = (rem % side) as f64 - n_max as f64;
            rem /= side;
        }
        points.push(p);
    }
    let lo = vec![-(n_max as f64); dim];
    let hi = vec![n_max as f64; dim];
    PointSet::new(dim, points, Metric::Graph, 1.0, (lo, hi), true)
}

/// Sorted set of point indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSubset(Vec<usize>);

impl PointSubset {
    pub fn from_indices(mut v: Vec<usize>) -> Self {
        v.sort_unstable();
        v.dedup();
        PointSubset(v)
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_subset_of(&self, other: &PointSubset) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn difference(&self, other: &PointSubset) -> PointSubset {
        PointSubset(self.iter().filter(|&i| !other.contains(i)).collect())
    }

    /// Membership mask over a carrier of `n` points.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for i in self.iter() {
            m[i] = true;
        }
        m
    }

    /// `ω(S)`: number of members that are active, or all members when no
    /// activity mask is given.
    pub fn weight(&self, active: Option<&[bool]>) -> usize {
        match active {
            None => self.len(),
            Some(a) => self.iter().filter(|&i| a[i]).count(),
        }
    }
}
