use std::sync::Arc;

use idslab::convergence::{convergence_report, sup_distance, AnalyticIds, Reference};
use idslab::geometry::{folner_box_at, generate_lattice};
use idslab::models::{build_operator, Dilution, ModelSpec};
use idslab::spectra::{ids_estimate, normalized_counting, restrict, Normalizer, StepFunction, ATOM_GRID};
use proptest::prelude::*;

/// Dense grid plus both one-sided limits at every breakpoint.
fn brute_force(f: &StepFunction, g: &StepFunction) -> f64 {
    let all: Vec<f64> = f.breakpoints().iter().chain(g.breakpoints()).copied().collect();
    if all.is_empty() {
        return 0.0;
    }
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min) - 0.01;
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 0.01;
    let mut worst: f64 = 0.0;
    let steps = ((hi - lo) / 1e-4).ceil() as usize;
    for k in 0..=steps {
        let x = lo + k as f64 * 1e-4;
        worst = worst.max((f.eval(x) - g.eval(x)).abs());
    }
    for &x in &all {
        worst = worst.max((f.eval(x) - g.eval(x)).abs());
        worst = worst.max((f.left_limit(x) - g.left_limit(x)).abs());
    }
    worst
}

fn arb_step() -> impl Strategy<Value = StepFunction> {
    proptest::collection::vec((-1.0f64..1.0, 0.01f64..1.0), 1..10)
        .prop_map(|atoms| StepFunction::from_atoms(atoms).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn exact_distance_matches_grid(f in arb_step(), g in arb_step()) {
        prop_assert_eq!(sup_distance(&f, &g), brute_force(&f, &g));
    }
}

fn free_chain(n: usize) -> StepFunction {
    let carrier = Arc::new(generate_lattice(1, n + 2).unwrap());
    let op = build_operator(&ModelSpec::adjacency(1), carrier.clone(), 0).unwrap();
    let bx = folner_box_at(&carrier, &[0.0], n).unwrap();
    normalized_counting(&restrict(&op, &bx).unwrap(), Normalizer::PerActiveSite).unwrap()
}

#[test]
fn free_chain_within_two_over_n_plus_one() {
    for n in [10, 11, 37, 100, 257, 1000, 2000] {
        let f = free_chain(n);
        let d = AnalyticIds::FreeChain1d.sup_distance(&f);
        assert!(d <= 2.0 / (n as f64 + 1.0), "n {n}: {d}");
        // the eigenvalues sit on the quantiles j/(n+1), up to the shift of at
        // most half a grid step times the analytic density
        let slope = f
            .breakpoints()
            .iter()
            .map(|e| 1.0 / (std::f64::consts::PI * (4.0 - e * e).max(0.0).sqrt()))
            .fold(0.0, f64::max);
        assert!(d <= 1.0 / (n as f64 + 1.0) + slope * ATOM_GRID / 2.0 + 1e-12, "n {n}: {d}");
    }
}

#[test]
fn zero_operator_matches_unit_step() {
    let carrier = Arc::new(generate_lattice(2, 12).unwrap());
    let spec = ModelSpec::adjacency(2).with_dilution(Dilution::Bond { p: 0.0 });
    let ops = vec![build_operator(&spec, carrier.clone(), 0).unwrap()];
    let seq: Vec<_> = [4, 8, 16]
        .iter()
        .map(|&n| {
            let o = -(n as f64) / 2.0;
            ids_estimate(&ops, &folner_box_at(&carrier, &[o, o], n).unwrap(), Normalizer::PerActiveSite).unwrap()
        })
        .collect();
    let report = convergence_report("zero", &seq, Reference::Analytic(AnalyticIds::UnitStep), &[0.0]).unwrap();
    assert!(report.pooled_distances().iter().all(|(_, d)| *d == 0.0));
    assert!(!report.non_monotone);
    assert_eq!(report.atom_tables[0].masses, vec![(4, 1.0), (8, 1.0), (16, 1.0)]);
}

#[test]
fn percolation_cauchy_increments_trend_down() {
    let carrier = Arc::new(generate_lattice(2, 45).unwrap());
    let spec = ModelSpec::adjacency(2).with_dilution(Dilution::Site { p: 0.5 });
    let ops: Vec<_> = (0..20).map(|s| build_operator(&spec, carrier.clone(), s).unwrap()).collect();
    let seq: Vec<_> = [20, 40, 80]
        .iter()
        .map(|&n| {
            let o = -(n as f64) / 2.0;
            ids_estimate(&ops, &folner_box_at(&carrier, &[o, o], n).unwrap(), Normalizer::PerActiveSite).unwrap()
        })
        .collect();
    let report = convergence_report("site-0.5", &seq, Reference::LargestN, &[0.0, 1.0, -1.0]).unwrap();
    assert!(report.trend_holds(), "{:?}", report.trend);
    let csv = report.to_csv();
    assert_eq!(csv.lines().count(), 1 + 3 * 21);
    assert!(report.rows.windows(2).all(|w| w[0].n <= w[1].n));
    // the reference is at distance 0 from itself
    assert!(report.rows.iter().filter(|r| r.n == 80).all(|r| r.sup_distance == 0.0));
}
