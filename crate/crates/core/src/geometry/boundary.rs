use serde::{Deserialize, Serialize};

use super::{Metric, PointSet, PointSubset, DIST_EPS};
use crate::error::{Error, Result};

/// Box `I_n = origin + [0, n)^d` and the carrier points it captures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FolnerBox {
    pub n: usize,
    pub origin: Vec<f64>,
    pub window: PointSubset,
    /// `|I_n| = n^d`.
    pub volume: f64,
}

impl FolnerBox {
    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    /// Width of the carrier patch left on every side of the box.
    pub fn margin(&self, carrier: &PointSet) -> f64 {
        let (lo, hi) = carrier.region();
        (0..self.dim())
            .map(|a| (self.origin[a] - lo[a]).min(hi[a] - self.origin[a] - self.n as f64))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn require_margin(&self, carrier: &PointSet, required: f64) -> Result<()> {
        let available = self.margin(carrier);
        if available + DIST_EPS < required {
            return Err(Error::InsufficientMargin { required, available });
        }
        Ok(())
    }

    /// `ω(Λ_n)`.
    pub fn weight(&self, active: Option<&[bool]>) -> usize {
        self.window.weight(active)
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.origin)
            .all(|(c, o)| *c >= *o && *c < *o + self.n as f64)
    }
}

/// Box `[0, n)^d` on the carrier.
pub fn folner_box(carrier: &PointSet, n: usize) -> Result<FolnerBox> {
    folner_box_at(carrier, &vec![0.0; carrier.dim()], n)
}

/// Box `origin + [0, n)^d`; fails if the box is not inside the patch region.
pub fn folner_box_at(carrier: &PointSet, origin: &[f64], n: usize) -> Result<FolnerBox> {
    if n == 0 {
        return Err(Error::InvalidParameter("box size must be positive".into()));
    }
    if origin.len() != carrier.dim() {
        return Err(Error::InvalidParameter("box origin dimension mismatch".into()));
    }
    let (lo, hi) = carrier.region();
    for a in 0..carrier.dim() {
        if origin[a] < lo[a] || origin[a] + n as f64 > hi[a] {
            return Err(Error::BoxExceedsCarrier { n, extent: hi[a] - lo[a] });
        }
    }
    let mut bx = FolnerBox {
        n,
        origin: origin.to_vec(),
        window: PointSubset::default(),
        volume: (n as f64).powi(carrier.dim() as i32),
    };
    let members = (0..carrier.len()).filter(|&i| bx.contains_point(carrier.point(i))).collect();
    bx.window = PointSubset::from_indices(members);
    Ok(bx)
}

/// `Λ^r = {x ∈ X : d(x, Λ) < r}`.
pub fn outer_neighborhood(carrier: &PointSet, set: &PointSubset, r: f64) -> PointSubset {
    if r <= 0.0 {
        return PointSubset::default();
    }
    let mut hit = vec![false; carrier.len()];
    for y in set.iter() {
        for x in carrier.ball(carrier.point(y), r, true) {
            hit[x] = true;
        }
    }
    PointSubset::from_indices(hit.iter().enumerate().filter(|(_, h)| **h).map(|(i, _)| i).collect())
}

/// `Λ_r = {x ∈ X : d(x, X∖Λ) > r}`. The complement includes everything
/// outside the generated patch.
pub fn interior(carrier: &PointSet, set: &PointSubset, r: f64) -> PointSubset {
    let mask = set.mask(carrier.len());
    let members = set
        .iter()
        .filter(|&x| {
            carrier.exterior_distance(x) > r + DIST_EPS
                && carrier.ball(carrier.point(x), r, false).into_iter().all(|z| mask[z])
        })
        .collect();
    PointSubset::from_indices(members)
}

/// `∂^r Λ = Λ^r ∖ Λ_r`.
pub fn boundary_shell(carrier: &PointSet, set: &PointSubset, r: f64) -> PointSubset {
    outer_neighborhood(carrier, set, r).difference(&interior(carrier, set, r))
}

/// `(n, ω(∂^r Λ_n) / |I_n|)` for each box size.
pub fn boundary_ratio_series(
    carrier: &PointSet,
    r: f64,
    n_list: &[usize],
    active: Option<&[bool]>,
) -> Result<Vec<(usize, f64)>> {
    n_list
        .iter()
        .map(|&n| {
            let bx = folner_box(carrier, n)?;
            let shell = boundary_shell(carrier, &bx.window, r);
            Ok((n, shell.weight(active) as f64 / bx.volume))
        })
        .collect()
}

/// Number of points of `ℤ^d` in the ℓ¹ ball of radius `r` around 0.
pub fn lattice_ball_size(dim: usize, r: f64, strict: bool) -> usize {
    let reach = r.floor().max(0.0) as i64;
    let inside = |s: i64| if strict { (s as f64) < r } else { (s as f64) <= r };
    fn count(dim: usize, budget: i64, used: i64, inside: &dyn Fn(i64) -> bool) -> usize {
        if dim == 0 {
            return usize::from(inside(used));
        }
        (-budget..=budget).map(|v| count(dim - 1, budget, used + v.abs(), inside)).sum()
    }
    count(dim, reach, 0, &inside)
}

/// Upper bound `M_S` on the number of points with mutual distance at least 1
/// in a closed ball of radius `S`. Exact for lattice carriers.
pub fn packing_constant(carrier: &PointSet, s: f64) -> usize {
    if carrier.is_lattice() && carrier.metric() == Metric::Graph {
        return lattice_ball_size(carrier.dim(), s, false);
    }
    // disjoint balls of radius 1/2 inside a ball of radius S + 1/2, valid for
    // both ℓ¹ and Euclidean volumes
    ((2.0 * s + 1.0).powi(carrier.dim() as i32) + 1e-9).floor().max(1.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_lattice;

    fn coords(carrier: &PointSet, s: &PointSubset) -> Vec<Vec<i64>> {
        s.iter().map(|i| carrier.point(i).iter().map(|c| *c as i64).collect()).collect()
    }

    #[test]
    fn box_2d_n3() {
        let z2 = generate_lattice(2, 5).unwrap();
        let b = folner_box(&z2, 3).unwrap();
        assert_eq!(b.window.len(), 9);
        assert_eq!(b.volume, 9.0);
    }

    #[test]
    fn box_1d_n5() {
        let z = generate_lattice(1, 8).unwrap();
        let b = folner_box(&z, 5).unwrap();
        assert_eq!(coords(&z, &b.window), (0..5).map(|k| vec![k]).collect::<Vec<_>>());
    }

    #[test]
    fn box_exceeding_carrier() {
        let z = generate_lattice(1, 4).unwrap();
        assert!(folner_box(&z, 4).is_ok());
        assert!(matches!(folner_box(&z, 5), Err(Error::BoxExceedsCarrier { .. })));
    }

    #[test]
    fn boxes_are_nested() {
        let z2 = generate_lattice(2, 8).unwrap();
        for n in 1..8 {
            let a = folner_box(&z2, n).unwrap();
            let b = folner_box(&z2, n + 1).unwrap();
            assert!(a.window.is_subset_of(&b.window));
        }
    }

    #[test]
    fn shell_of_5x5_box() {
        let z2 = generate_lattice(2, 10).unwrap();
        let b = folner_box(&z2, 5).unwrap();
        assert_eq!(outer_neighborhood(&z2, &b.window, 1.0), b.window);
        assert_eq!(interior(&z2, &b.window, 1.0).len(), 9);
        assert_eq!(boundary_shell(&z2, &b.window, 1.0).len(), 16);
    }

    #[test]
    fn shell_at_zero_radius_is_empty() {
        let z2 = generate_lattice(2, 6).unwrap();
        let b = folner_box(&z2, 4).unwrap();
        assert!(boundary_shell(&z2, &b.window, 0.0).is_empty());
        assert!(boundary_shell(&z2, &PointSubset::default(), 2.0).is_empty());
    }

    #[test]
    fn shell_1d_radius_one_and_a_half() {
        // Λ^1.5 adds −1 and 10; Λ_1.5 keeps points at distance ≥ 2 from the complement
        let z = generate_lattice(1, 20).unwrap();
        let b = folner_box(&z, 10).unwrap();
        let shell = boundary_shell(&z, &b.window, 1.5);
        assert_eq!(coords(&z, &shell), vec![vec![-1], vec![0], vec![9], vec![10]]);
    }

    #[test]
    fn patch_edge_is_never_interior() {
        let z = generate_lattice(1, 5).unwrap();
        let all = PointSubset::from_indices((0..z.len()).collect());
        let inner = interior(&z, &all, 1.0);
        // points −5..4; interior needs distance ≥ 2 from −6 and from 5
        assert_eq!(coords(&z, &inner), (-4..=3).map(|k| vec![k]).collect::<Vec<_>>());
    }

    #[test]
    fn set_identities_hold() {
        let z2 = generate_lattice(2, 9).unwrap();
        for n in [2, 4, 6] {
            let b = folner_box(&z2, n).unwrap();
            for r in [0.5, 1.0, 1.5, 2.0, 3.0] {
                let outer = outer_neighborhood(&z2, &b.window, r);
                let inner = interior(&z2, &b.window, r);
                let shell = boundary_shell(&z2, &b.window, r);
                assert!(inner.is_subset_of(&b.window));
                assert!(b.window.is_subset_of(&outer));
                assert_eq!(shell, outer.difference(&inner));
            }
        }
    }

    #[test]
    fn ratio_series_closed_form_2d() {
        let z2 = generate_lattice(2, 41).unwrap();
        let series = boundary_ratio_series(&z2, 1.0, &[10, 20, 40], None).unwrap();
        for (n, ratio) in &series {
            let n = *n as f64;
            assert_eq!(*ratio, (n * n - (n - 2.0) * (n - 2.0)) / (n * n));
        }
        for w in series.windows(2) {
            assert!(w[1].1 <= 0.75 * w[0].1);
        }
    }

    #[test]
    fn ratio_series_1d() {
        let z = generate_lattice(1, 110).unwrap();
        let series = boundary_ratio_series(&z, 1.5, &[100], None).unwrap();
        assert!(series[0].1 <= 6.0 / 100.0);
        assert_eq!(series[0].1, 4.0 / 100.0);
    }

    #[test]
    fn ratio_is_translation_invariant() {
        let z2 = generate_lattice(2, 20).unwrap();
        let a = folner_box_at(&z2, &[0.0, 0.0], 7).unwrap();
        let b = folner_box_at(&z2, &[-6.0, 3.0], 7).unwrap();
        let sa = boundary_shell(&z2, &a.window, 2.0).len() as f64 / a.volume;
        let sb = boundary_shell(&z2, &b.window, 2.0).len() as f64 / b.volume;
        assert_eq!(sa, sb);
    }

    #[test]
    fn packing_constants() {
        let z = generate_lattice(1, 5).unwrap();
        let z2 = generate_lattice(2, 5).unwrap();
        assert_eq!(packing_constant(&z, 2.0), 5);
        assert_eq!(packing_constant(&z2, 1.0), 5);
        assert_eq!(packing_constant(&z2, 1e-6), 1);
        assert_eq!(lattice_ball_size(2, 2.0, false), 13);
        assert_eq!(lattice_ball_size(3, 1.0, false), 7);
        assert_eq!(lattice_ball_size(2, 1.0, true), 1);
    }

    #[test]
    fn folner_property_for_shifted_boxes() {
        // |I_n △ (k e_1 + I_n)| ≤ 2 d k n^{d-1}
        let z2 = generate_lattice(2, 30).unwrap();
        for n in [5usize, 10, 20] {
            for k in [1usize, 2, 3] {
                let a = folner_box_at(&z2, &[0.0, 0.0], n).unwrap();
                let b = folner_box_at(&z2, &[k as f64, 0.0], n).unwrap();
                let sym = a.window.difference(&b.window).len() + b.window.difference(&a.window).len();
                assert!(sym <= 2 * 2 * k * n);
            }
        }
    }
}
