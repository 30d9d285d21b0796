use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{build_operator, ModelSpec, OperatorRealization};
use crate::error::{Error, Result};
use crate::geometry::PointSet;

/// `exp(2πi t)`, exact when `t` is a multiple of 1/4.
fn cis_turns(t: f64) -> Complex64 {
    let frac = t - t.floor();
    match frac {
        f if f == 0.0 => Complex64::new(1.0, 0.0),
        f if f == 0.25 => Complex64::new(0.0, 1.0),
        f if f == 0.5 => Complex64::new(-1.0, 0.0),
        f if f == 0.75 => Complex64::new(0.0, -1.0),
        f => Complex64::from_polar(1.0, std::f64::consts::TAU * f),
    }
}

/// Uniform magnetic field on `ℤ²` in the Landau gauge: hops along `e₂` from
/// `x` pick up `exp(2πi α x₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticPhase {
    pub flux: f64,
}

impl MagneticPhase {
    pub fn hop_phase(&self, x1: f64) -> Complex64 {
        cis_turns(self.flux * x1)
    }

    /// Magnetic translation factor `s_γ(x) = exp(−2πi α γ₁ x₂)`.
    pub fn translation_phase(&self, gamma: &[i64], x: &[f64]) -> Complex64 {
        cis_turns(-self.flux * gamma[0] as f64 * x[1])
    }
}

/// Phase family `s_γ` used on the left-hand side of the equivariance identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gauge {
    Trivial,
    Landau(MagneticPhase),
}

impl Gauge {
    fn phase(&self, gamma: &[i64], x: &[f64]) -> Complex64 {
        match self {
            Gauge::Trivial => Complex64::new(1.0, 0.0),
            Gauge::Landau(m) => m.translation_phase(gamma, x),
        }
    }
}

pub fn apply_magnetic_phase(op: &OperatorRealization, phase: &MagneticPhase) -> Result<OperatorRealization> {
    let carrier = op.carrier();
    if !carrier.is_lattice() || carrier.dim() != 2 {
        return Err(Error::NotALattice("magnetic phases need a ℤ² carrier".into()));
    }
    if op.max_hop_distance() > 1.0 {
        return Err(Error::InvalidKernel("magnetic phases need a nearest-neighbour kernel".into()));
    }
    if phase.flux == 0.0 {
        return Ok(op.clone());
    }
    Ok(op.map_hops(|i, j, z| {
        let (xi, xj) = (carrier.point(i), carrier.point(j));
        // entry (row i, col j) moves a particle from j to i
        let step = xi[1] - xj[1];
        if step == 0.0 {
            z
        } else if step > 0.0 {
            z * phase.hop_phase(xj[0])
        } else {
            z * phase.hop_phase(xj[0]).conj()
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceCheck {
    pub max_deviation: f64,
    pub pairs_checked: usize,
}

impl EquivarianceCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_deviation <= tol
    }
}

/// Evaluates `s_γ(x) H(γx, γy) conj(s_γ(y)) − H(x, y)` over every in-range
/// pair `(x, y)` whose translates lie in the patch.
pub fn check_equivariance(
    spec: &ModelSpec,
    carrier: std::sync::Arc<PointSet>,
    gamma: &[i64],
    gauge: Gauge,
) -> Result<EquivarianceCheck> {
    if !spec.is_deterministic() {
        return Err(Error::RandomSpec);
    }
    if !carrier.is_lattice() {
        return Err(Error::NotALattice("translations act on lattice carriers".into()));
    }
    if gamma.len() != carrier.dim() {
        return Err(Error::InvalidParameter("translation dimension mismatch".into()));
    }
    let op = build_operator(spec, carrier.clone(), 0)?;
    let shift = |x: &[f64]| -> Vec<f64> { x.iter().zip(gamma).map(|(c, g)| c + *g as f64).collect() };
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for i in 0..carrier.len() {
        let x = carrier.point(i);
        let Some(gi) = carrier.find(&shift(x)) else { continue };
        for j in carrier.ball(x, spec.hopping_range, false) {
            let y = carrier.point(j);
            let Some(gj) = carrier.find(&shift(y)) else { continue };
            let lhs = gauge.phase(gamma, x) * op.entry(gi, gj) * gauge.phase(gamma, y).conj();
            worst = worst.max((lhs - op.entry(i, j)).norm());
            pairs += 1;
        }
    }
    Ok(EquivarianceCheck { max_deviation: worst, pairs_checked: pairs })
}
