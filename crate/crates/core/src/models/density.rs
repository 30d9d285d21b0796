use serde::{Deserialize, Serialize};

use super::OperatorRealization;
use crate::error::{Error, Result};
use crate::geometry::FolnerBox;

/// `ω(Λ_n)/|I_n|` along a nested box sequence for one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub seed: u64,
    pub series: Vec<(usize, f64)>,
    /// Value at the largest box.
    pub density: f64,
    /// Set when the largest window has no active point.
    pub empty: bool,
}

pub fn density_estimate(ops: &[OperatorRealization], boxes: &[FolnerBox]) -> Result<Vec<DensityEstimate>> {
    if boxes.is_empty() {
        return Err(Error::InvalidParameter("need at least one box".into()));
    }
    for w in boxes.windows(2) {
        if w[0].n >= w[1].n || !w[0].window.is_subset_of(&w[1].window) {
            return Err(Error::InvalidParameter("boxes must be strictly nested".into()));
        }
    }
    Ok(ops
        .iter()
        .map(|op| {
            let series: Vec<(usize, f64)> =
                boxes.iter().map(|b| (b.n, op.weight(&b.window) as f64 / b.volume)).collect();
            let last = boxes.last().expect("non-empty");
            let count = op.weight(&last.window);
            DensityEstimate {
                seed: op.seed(),
                density: series.last().map(|s| s.1).unwrap_or(0.0),
                series,
                empty: count == 0,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{folner_box, folner_box_at, generate_lattice};
    use crate::models::{build_operator, Dilution, ModelSpec};
    use std::sync::Arc;

    #[test]
    fn undiluted_density_is_one() {
        let carrier = Arc::new(generate_lattice(2, 20).unwrap());
        let op = build_operator(&ModelSpec::adjacency(2), carrier.clone(), 1).unwrap();
        let boxes: Vec<_> = [5, 10, 20].iter().map(|&n| folner_box(&carrier, n).unwrap()).collect();
        let est = density_estimate(&[op], &boxes).unwrap();
        assert!(est[0].series.iter().all(|(_, d)| *d == 1.0));
        assert!(!est[0].empty);
    }

    #[test]
    fn site_percolation_density_concentrates() {
        let carrier = Arc::new(generate_lattice(2, 200).unwrap());
        let spec = ModelSpec::adjacency(2).with_dilution(Dilution::Site { p: 0.7 });
        let op = build_operator(&spec, carrier.clone(), 5).unwrap();
        let boxes: Vec<_> = [50, 100, 200].iter().map(|&n| folner_box(&carrier, n).unwrap()).collect();
        let est = density_estimate(&[op], &boxes).unwrap();
        assert!((est[0].density - 0.7).abs() < 0.01, "{}", est[0].density);
    }

    #[test]
    fn thinned_window_count() {
        let carrier = Arc::new(generate_lattice(2, 6).unwrap());
        let spec = ModelSpec::adjacency(2).with_dilution(Dilution::Site { p: 0.5 });
        let op = build_operator(&spec, carrier.clone(), 12).unwrap();
        let b = folner_box(&carrier, 3).unwrap();
        let direct = b.window.iter().filter(|&i| op.is_active(i)).count();
        assert_eq!(op.weight(&b.window), direct);
        assert!(direct <= 9);
    }

    #[test]
    fn empty_window_flagged() {
        let carrier = Arc::new(generate_lattice(1, 10).unwrap());
        let spec = ModelSpec::adjacency(1).with_dilution(Dilution::Site { p: 0.0 });
        let op = build_operator(&spec, carrier.clone(), 0).unwrap();
        let est = density_estimate(&[op], &[folner_box(&carrier, 4).unwrap()]).unwrap();
        assert!(est[0].empty);
        assert_eq!(est[0].density, 0.0);
    }

    #[test]
    fn non_nested_boxes_rejected() {
        let carrier = Arc::new(generate_lattice(1, 10).unwrap());
        let op = build_operator(&ModelSpec::adjacency(1), carrier.clone(), 0).unwrap();
        let a = folner_box_at(&carrier, &[0.0], 3).unwrap();
        let b = folner_box_at(&carrier, &[4.0], 4).unwrap();
        assert!(density_estimate(&[op], &[a, b]).is_err());
    }
}
