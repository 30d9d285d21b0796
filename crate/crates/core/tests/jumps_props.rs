use std::sync::Arc;

use idslab::geometry::{folner_box_at, generate_lattice, PointSet};
use idslab::jumps::{cluster_oracle, compact_kernel_dim, jump_sandwich, Mode, RESIDUAL_RTOL};
use idslab::models::{build_operator, Dilution, ModelSpec, PotentialLaw};
use idslab::Level;

fn lattice(dim: usize, n: usize) -> Arc<PointSet> {
    Arc::new(generate_lattice(dim, n).unwrap())
}

fn levels() -> Vec<Level> {
    ["0", "1", "-1", "sqrt(2)", "-sqrt(2)"].iter().map(|s| Level::parse(s).unwrap()).collect()
}

#[test]
fn oracle_agrees_on_percolation_windows() {
    let carrier = lattice(2, 12);
    let mut windows = 0;
    for (seed, dilution) in (0..6).zip([Dilution::Site { p: 0.5 }, Dilution::Bond { p: 0.5 }, Dilution::Site { p: 0.65 }].iter().cycle()) {
        let op = build_operator(&ModelSpec::adjacency(2).with_dilution(*dilution), carrier.clone(), seed).unwrap();
        for n in [5, 10, 20] {
            let bx = folner_box_at(&carrier, &[-10.0, -10.0], n).unwrap();
            for level in levels() {
                let float = compact_kernel_dim(&op, &bx, &level, Mode::Float).unwrap().0;
                let oracle = cluster_oracle(&op, &bx, &level, Mode::Float).unwrap();
                assert_eq!(float, oracle.total, "seed {seed} n {n} λ {level}");
                if level.is_rational() {
                    let exact = compact_kernel_dim(&op, &bx, &level, Mode::ExactRational).unwrap().0;
                    let oracle = cluster_oracle(&op, &bx, &level, Mode::ExactRational).unwrap();
                    assert_eq!(exact, oracle.total);
                    assert_eq!(exact, float);
                    assert!(oracle.contained <= exact);
                }
            }
            windows += 1;
        }
    }
    assert_eq!(windows, 18);
}

#[test]
fn basis_vectors_solve_the_full_equation() {
    let carrier = lattice(2, 12);
    for seed in 0..6 {
        let spec = ModelSpec::adjacency(2).with_dilution(Dilution::Site { p: 0.55 });
        let op = build_operator(&spec, carrier.clone(), seed).unwrap();
        let bx = folner_box_at(&carrier, &[-8.0, -8.0], 16).unwrap();
        for level in levels() {
            let (d, basis) = compact_kernel_dim(&op, &bx, &level, Mode::Float).unwrap();
            assert_eq!(d, basis.len());
            // residual over the whole patch, i.e. after zero extension
            assert!(basis.max_relative_residual(&op) <= RESIDUAL_RTOL);
            if let Some(q) = level.exact() {
                let (_, exact) = compact_kernel_dim(&op, &bx, &level, Mode::ExactRational).unwrap();
                assert!(exact.exact_residual_is_zero(&op, q).unwrap());
                assert_eq!(exact.max_relative_residual(&op), 0.0);
            }
        }
    }
}

#[test]
fn basis_support_is_interior() {
    let carrier = lattice(2, 10);
    let op = build_operator(&ModelSpec::adjacency(2).with_dilution(Dilution::Site { p: 0.5 }), carrier.clone(), 3).unwrap();
    let bx = folner_box_at(&carrier, &[-6.0, -6.0], 12).unwrap();
    let inner = idslab::geometry::interior(&carrier, &bx.window, 1.0);
    let (_, basis) = compact_kernel_dim(&op, &bx, &Level::integer(0), Mode::Float).unwrap();
    for v in &basis.vectors {
        for (a, z) in v.iter().enumerate() {
            if z.norm() > 0.0 {
                assert!(inner.contains(basis.rows[a]));
            }
        }
    }
}

#[test]
fn sandwich_on_anderson_and_percolation() {
    let carrier = lattice(2, 14);
    for seed in 0..10 {
        for spec in [
            ModelSpec::adjacency(2).with_dilution(Dilution::Bond { p: 0.4 }),
            ModelSpec::adjacency(2)
                .with_dilution(Dilution::Site { p: 0.6 })
                .with_potential(PotentialLaw::Bernoulli { values: vec![0.0, 1.0], probs: vec![0.5, 0.5] }),
        ] {
            let op = build_operator(&spec, carrier.clone(), seed).unwrap();
            for n in [6, 12, 20] {
                let bx = folner_box_at(&carrier, &[-10.0, -10.0], n).unwrap();
                for level in levels() {
                    let est = jump_sandwich(&op, &bx, &level, Mode::Float).unwrap();
                    assert!(est.lower <= est.upper);
                    assert!(est.atom_count - est.compact_dim <= est.boundary_budget);
                }
            }
        }
    }
}

/// `|D_{2n}/ω(Λ_{2n}) − D_n/ω(Λ_n)|` stays within the boundary budget of the
/// smaller window plus a sampling allowance.
#[test]
fn compact_density_stabilises() {
    let carrier = lattice(2, 45);
    let spec = ModelSpec::adjacency(2).with_dilution(Dilution::Site { p: 0.5 });
    for seed in 0..3 {
        let op = build_operator(&spec, carrier.clone(), seed).unwrap();
        let mut prev: Option<(f64, f64)> = None;
        for n in [10, 20, 40] {
            let o = -(n as f64) / 2.0;
            let est = jump_sandwich(&op, &folner_box_at(&carrier, &[o, o], n).unwrap(), &Level::integer(0), Mode::Float).unwrap();
            let value = est.lower;
            let slack = est.boundary_budget as f64 / est.active as f64;
            if let Some((v, s)) = prev {
                let sampling = 3.0 * (value * (1.0 - value) / est.active as f64).sqrt();
                assert!((value - v).abs() <= s + sampling, "n {n}: {value} vs {v}");
            }
            prev = Some((value, slack));
        }
    }
}
