use std::sync::Arc;

use idslab::exact::gauss_jordan_rank;
use idslab::geometry::{
    boundary_shell, folner_box_at, generate_delone, generate_lattice, interior, lattice_ball_size,
    outer_neighborhood, packing_constant, DeloneSpec, PointSet, PointSubset,
};
use idslab::models::{build_operator, Dilution, ModelSpec};
use num_rational::BigRational;
use proptest::prelude::*;

fn lattice(dim: usize, n: usize) -> Arc<PointSet> {
    Arc::new(generate_lattice(dim, n).unwrap())
}

/// Random subset of a small lattice patch from a bit mask.
fn subset_from_bits(set: &PointSet, bits: &[bool]) -> PointSubset {
    PointSubset::from_indices((0..set.len()).filter(|&i| bits[i % bits.len()]).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interior_inside_set_inside_neighbourhood(
        bits in proptest::collection::vec(any::<bool>(), 1..80),
        r in prop_oneof![Just(0.0), Just(0.5), Just(1.0), Just(1.5), Just(2.0), Just(3.0)],
    ) {
        let set = lattice(2, 5);
        let lam = subset_from_bits(&set, &bits);
        let inner = interior(&set, &lam, r);
        let outer = outer_neighborhood(&set, &lam, r);
        prop_assert!(inner.is_subset_of(&lam));
        if r > 0.0 {
            prop_assert!(lam.is_subset_of(&outer));
        }
        let shell = boundary_shell(&set, &lam, r);
        prop_assert_eq!(shell, outer.difference(&inner));
    }

    /// `0 ≤ dim U − dim U_S ≤ ω(∂^S Λ)` for random integer subspaces `U` of
    /// functions on `Λ(ω)`.
    #[test]
    fn subspace_loses_at_most_the_boundary(
        seed in 0u64..1000,
        s in prop_oneof![Just(1.0), Just(1.5), Just(2.0)],
        k in 1usize..8,
        entries in proptest::collection::vec(-2i64..3, 8 * 40),
        supported_inside in proptest::collection::vec(any::<bool>(), 8),
    ) {
        let carrier = lattice(2, 6);
        let spec = ModelSpec::adjacency(2).with_dilution(Dilution::Site { p: 0.7 });
        let op = build_operator(&spec, carrier.clone(), seed).unwrap();
        let bx = folner_box_at(&carrier, &[-3.0, -3.0], 6).unwrap();
        let sites: Vec<usize> = bx.window.iter().filter(|&i| op.is_active(i)).collect();
        prop_assume!(!sites.is_empty());
        let inner = interior(&carrier, &bx.window, s);
        // basis vectors as columns; some are forced to vanish outside Λ_S
        let mut basis: Vec<Vec<BigRational>> = Vec::new();
        for c in 0..k {
            let col: Vec<BigRational> = sites
                .iter()
                .enumerate()
                .map(|(a, &x)| {
                    let v = entries[(c * 40 + a) % entries.len()];
                    let v = if supported_inside[c] && !inner.contains(x) { 0 } else { v };
                    BigRational::from_integer(v.into())
                })
                .collect();
            basis.push(col);
        }
        let rows = |keep: &dyn Fn(usize) -> bool| -> Vec<Vec<BigRational>> {
            sites
                .iter()
                .enumerate()
                .filter(|(_, &x)| keep(x))
                .map(|(a, _)| basis.iter().map(|col| col[a].clone()).collect())
                .collect()
        };
        let dim_u = gauss_jordan_rank(rows(&|_| true), k);
        // U_S = B·ker(B_out) and ker B ⊆ ker B_out
        let outside = rows(&|x| !inner.contains(x));
        let null_all = k - dim_u;
        let null_outside = k - gauss_jordan_rank(outside, k);
        let dim_us = null_outside - null_all;
        let budget = op.weight(&boundary_shell(&carrier, &bx.window, s));
        prop_assert!(dim_us <= dim_u);
        prop_assert!(dim_u - dim_us <= budget, "{} - {} > {}", dim_u, dim_us, budget);
    }

    /// `ω(I F′) ≤ C |I^ρ|` with `C = M_{2ρ}/|B_ρ|` on ℤ² site percolation.
    #[test]
    fn universal_bound_on_random_boxes(
        seed in 0u64..1000,
        ox in -9i64..0,
        oy in -9i64..0,
        n in 1usize..8,
        rho in prop_oneof![Just(0.5), Just(1.0), Just(1.5), Just(2.0), Just(3.0)],
    ) {
        let carrier = lattice(2, 10);
        let spec = ModelSpec::adjacency(2).with_dilution(Dilution::Site { p: 0.8 });
        let op = build_operator(&spec, carrier.clone(), seed).unwrap();
        let bx = folner_box_at(&carrier, &[ox as f64, oy as f64], n).unwrap();
        // on ℤ^d the group and the carrier coincide, so |I^ρ| is a point count
        let grown = outer_neighborhood(&carrier, &bx.window, rho).len() as f64;
        let c = packing_constant(&carrier, 2.0 * rho) as f64 / lattice_ball_size(2, rho, true) as f64;
        prop_assert!(op.weight(&bx.window) as f64 <= c * grown);
    }
}

#[test]
fn delone_window_weights_respect_packing() {
    // every unit-separated Fibonacci window of length L has at most L + 1 points
    let set = generate_delone(&DeloneSpec::Fibonacci, 500.0).unwrap();
    for start in [0.0, 13.7, 100.0, 250.5] {
        for len in [10, 50, 100] {
            let bx = folner_box_at(&set, &[start], len).unwrap();
            assert!(bx.window.len() <= len + 1);
            assert!(bx.window.len() as f64 >= len as f64 / idslab::geometry::GOLDEN_MEAN - 1.0);
        }
    }
}
