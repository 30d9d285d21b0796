use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{normalized_counting, restrict, Normalizer, StepFunction, MERGE_RTOL};
use crate::error::{Error, Result};
use crate::geometry::FolnerBox;
use crate::models::OperatorRealization;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationCounting {
    pub seed: u64,
    /// `ω(Λ_n)`.
    pub active: usize,
    pub function: StepFunction,
}

/// Normalized counting functions of several realizations on one window and
/// their pointwise mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdsEstimate {
    pub n: usize,
    pub normalizer: Normalizer,
    /// Sorted by seed.
    pub realizations: Vec<RealizationCounting>,
    pub pooled: StepFunction,
    /// Mean of `ω(Λ_n)/|I_n|`.
    pub density: f64,
    pub merge_tolerance: f64,
}

impl IdsEstimate {
    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }

    pub fn functions(&self) -> Vec<StepFunction> {
        self.realizations.iter().map(|r| r.function.clone()).collect()
    }
}

/// All realizations must live on carriers with the same point indexing as
/// the one `window` was built on.
pub fn ids_estimate(ops: &[OperatorRealization], window: &FolnerBox, normalizer: Normalizer) -> Result<IdsEstimate> {
    if ops.is_empty() {
        return Err(Error::InvalidParameter("need at least one realization".into()));
    }
    let mut realizations: Vec<RealizationCounting> = ops
        .par_iter()
        .map(|op| {
            let rop = restrict(op, window)?;
            Ok(RealizationCounting {
                seed: op.seed(),
                active: rop.dim(),
                function: normalized_counting(&rop, normalizer)?,
            })
        })
        .collect::<Result<_>>()?;
    realizations.sort_by_key(|r| r.seed);
    let merge_tolerance = ops.iter().map(|op| MERGE_RTOL * op.norm_bound().max(1.0)).fold(0.0, f64::max);
    let functions: Vec<StepFunction> = realizations.iter().map(|r| r.function.clone()).collect();
    let density =
        realizations.iter().map(|r| r.active as f64 / window.volume).sum::<f64>() / realizations.len() as f64;
    Ok(IdsEstimate {
        n: window.n,
        normalizer,
        pooled: StepFunction::mean(&functions, merge_tolerance),
        realizations,
        density,
        merge_tolerance,
    })
}
