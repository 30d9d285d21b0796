use serde::{Deserialize, Serialize};

use super::{Metric, PointSet};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};

pub const GOLDEN_MEAN: f64 = 1.618_033_988_749_895;

/// Parameters of a Delone-set patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeloneSpec {
    /// Fibonacci chain with spacings `τ` (long) and `1` (short).
    Fibonacci,
    /// `s·ℤ^d` with every point displaced uniformly by at most
    /// `amplitude·s` per axis, where `s = 1/(1 − 2·amplitude)`.
    PerturbedLattice { dim: usize, amplitude: f64, seed: u64 },
}

impl DeloneSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DeloneSpec::Fibonacci => Ok(()),
            DeloneSpec::PerturbedLattice { dim, amplitude, .. } => {
                if !(1..=3).contains(dim) {
                    return Err(Error::UnsupportedDimension(*dim));
                }
                if !(0.0..0.5).contains(amplitude) {
                    return Err(Error::InvalidParameter(format!(
                        "perturbation amplitude {amplitude} must lie in [0, 1/2)"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DeloneSpec::Fibonacci => 1,
            DeloneSpec::PerturbedLattice { dim, .. } => *dim,
        }
    }

    /// Lattice spacing that keeps the minimal distance at 1.
    fn spacing(&self) -> f64 {
        match self {
            DeloneSpec::Fibonacci => 1.0,
            DeloneSpec::PerturbedLattice { amplitude, .. } => 1.0 / (1.0 - 2.0 * amplitude),
        }
    }

    /// Radius `R′` such that every open ball of that radius centred in the
    /// bulk of the patch meets the set.
    pub fn relative_denseness_radius(&self) -> f64 {
        match self {
            DeloneSpec::Fibonacci => GOLDEN_MEAN / 2.0 + 1e-6,
            DeloneSpec::PerturbedLattice { dim, amplitude, .. } => {
                self.spacing() * (*dim as f64).sqrt() * (0.5 + amplitude) + 1e-6
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Long,
    Short,
}

/// Prefix of length `len` of the fixed point of `a → ab, b → a`.
pub fn fibonacci_word(len: usize) -> Vec<Spacing> {
    let mut word = vec![Spacing::Long];
    while word.len() < len {
        word = word
            .iter()
            .flat_map(|s| match s {
                Spacing::Long => vec![Spacing::Long, Spacing::Short],
                Spacing::Short => vec![Spacing::Long],
            })
            .collect();
    }
    word.truncate(len);
    word
}

/// Patch of the Delone set inside `[0, extent)^d` (Euclidean metric).
pub fn generate_delone(spec: &DeloneSpec, extent: f64) -> Result<PointSet> {
    spec.validate()?;
    if !(extent > 0.0) {
        return Err(Error::InvalidParameter("extent must be positive".into()));
    }
    let dim = spec.dim();
    let region = (vec![0.0; dim], vec![extent; dim]);
    let points = match spec {
        DeloneSpec::Fibonacci => {
            // positions are (#long)·τ + (#short), kept as exact counts
            let max_len = extent.ceil() as usize + 1;
            let word = fibonacci_word(max_len);
            let (mut long, mut short) = (0u64, 0u64);
            let mut pts = Vec::new();
            for s in std::iter::once(None).chain(word.iter().map(Some)) {
                match s {
                    Some(Spacing::Long) => long += 1,
                    Some(Spacing::Short) => short += 1,
                    None => {}
                }
                let x = long as f64 * GOLDEN_MEAN + short as f64;
                if x >= extent {
                    break;
                }
                pts.push(vec![x]);
            }
            pts
        }
        DeloneSpec::PerturbedLattice { dim, amplitude, seed } => {
            let s = spec.spacing();
            let per_axis = (extent / s).ceil() as usize;
            let total = per_axis.pow(*dim as u32);
            let mut pts = Vec::with_capacity(total);
            for k in 0..total {
                let mut rem = k;
                let mut p = vec![0.0; *dim];
                for a in (0..*dim).rev() {
                    let z = (rem % per_axis) as f64;
                    rem /= per_axis;
                    let u = rng::uniform(*seed, Stream::Perturbation, (k * dim + a) as u128);
                    p[a] = s * z + (2.0 * u - 1.0) * amplitude * s;
                }
                if p.iter().all(|c| *c >= 0.0 && *c < extent) {
                    pts.push(p);
                }
            }
            pts
        }
    };
    PointSet::new(dim, points, Metric::Euclidean, 1.0, region, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_lattice;

    /// Independent oracle: Fibonacci word from the concatenation recursion
    /// `S_{k+1} = S_k S_{k-1}`.
    fn word_by_concatenation(len: usize) -> String {
        let (mut prev, mut cur) = ("a".to_string(), "ab".to_string());
        while cur.len() < len {
            let next = format!("{cur}{prev}");
            prev = cur;
            cur = next;
        }
        cur[..len].to_string()
    }

    fn letters(w: &[Spacing]) -> String {
        w.iter().map(|s| if *s == Spacing::Long { 'a' } else { 'b' }).collect()
    }

    #[test]
    fn substitution_prefix() {
        assert_eq!(letters(&fibonacci_word(8)), "abaababa");
        assert_eq!(letters(&fibonacci_word(500)), word_by_concatenation(500));
    }

    #[test]
    fn fibonacci_patch_spacings() {
        // first 8 points: spacings a b a a b a b
        let set = generate_delone(&DeloneSpec::Fibonacci, 11.0).unwrap();
        assert_eq!(set.len(), 8);
        let gaps: Vec<f64> = (1..set.len()).map(|i| set.point(i)[0] - set.point(i - 1)[0]).collect();
        let word: String =
            gaps.iter().map(|g| if (g - GOLDEN_MEAN).abs() < 1e-9 { 'a' } else { 'b' }).collect();
        assert_eq!(word, "abaabab");
        for g in gaps {
            assert!((g - GOLDEN_MEAN).abs() < 1e-9 || (g - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn long_short_ratio_approaches_golden_mean() {
        let w = fibonacci_word(10_000);
        let long = w.iter().filter(|s| **s == Spacing::Long).count() as f64;
        let short = w.len() as f64 - long;
        assert!(((long / short) - GOLDEN_MEAN).abs() / GOLDEN_MEAN < 0.01);
    }

    #[test]
    fn zero_perturbation_is_the_lattice() {
        let spec = DeloneSpec::PerturbedLattice { dim: 2, amplitude: 0.0, seed: 3 };
        let set = generate_delone(&spec, 6.0).unwrap();
        let z2 = generate_lattice(2, 6).unwrap();
        let expected: Vec<Vec<f64>> =
            z2.points().filter(|p| p.iter().all(|c| *c >= 0.0)).map(|p| p.to_vec()).collect();
        let got: Vec<Vec<f64>> = set.points().map(|p| p.to_vec()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn perturbed_lattice_is_uniformly_discrete() {
        let spec = DeloneSpec::PerturbedLattice { dim: 2, amplitude: 0.3, seed: 11 };
        let set = generate_delone(&spec, 20.0).unwrap();
        for i in 0..set.len() {
            for j in 0..i {
                assert!(set.distance(i, j) >= 1.0);
            }
        }
    }

    #[test]
    fn large_amplitude_rejected() {
        let spec = DeloneSpec::PerturbedLattice { dim: 1, amplitude: 0.5, seed: 0 };
        assert!(generate_delone(&spec, 10.0).is_err());
    }

    #[test]
    fn relative_denseness_holds_in_bulk() {
        for spec in [
            DeloneSpec::Fibonacci,
            DeloneSpec::PerturbedLattice { dim: 2, amplitude: 0.25, seed: 5 },
        ] {
            let extent = 30.0;
            let set = generate_delone(&spec, extent).unwrap();
            let r = spec.relative_denseness_radius();
            let dim = spec.dim();
            let steps: usize = 40;
            let mut probe = vec![0.0; dim];
            for k in 0..steps.pow(dim as u32) {
                let mut rem = k;
                for c in probe.iter_mut() {
                    *c = r + (extent - 2.0 * r) * (rem % steps) as f64 / steps as f64;
                    rem /= steps;
                }
                assert!(!set.ball(&probe, r, true).is_empty(), "empty ball at {probe:?}");
            }
        }
    }
}
