//! Overwritability hierarchy: κ, ν, class polytopes, and the four tier deciders.

mod classify;
mod fiber;
mod program;

use serde::{Deserialize, Serialize};

use crate::channel::MyopicAvc;
use crate::error::{Error, Result};
use crate::math::{Distribution, StochasticMatrix};

pub use classify::{
    classify, classify_with, is_i_overwritable, is_i_overwritable_with, is_u_dist_overwritable,
    is_u_dist_overwritable_with, is_u_overwritable, is_u_overwritable_with,
    is_ux_dist_overwritable, is_ux_dist_overwritable_with, nu_estimate, nu_estimate_with,
    CaseWitness, ClassifierReport, ClassifyOptions, KappaEntry, NuEstimate, TierDecision,
};
pub use fiber::{
    are_indistinguishable, fiber_polytope, fiber_polytope_auto, fiber_polytope_sampled,
    FiberPolytope, MAX_EXACT_INPUTS,
};
pub use program::{induced_output, min_max_tv, overwrite_feasible, MinMax};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub value: f64,
    /// A strategy attaining `value`.
    pub strategy: StochasticMatrix,
}

/// κ(P, x′): the smallest TV distance from `W(·|x′,∅)` that a memoryless
/// strategy can induce when the input is drawn from `p`.
pub fn kappa(p: &Distribution, x_prime: usize, avc: &MyopicAvc) -> Result<Kappa> {
    if p.len() != avc.x_size() {
        return Err(Error::DimensionMismatch {
            expected: avc.x_size(),
            actual: p.len(),
        });
    }
    if x_prime >= avc.x_size() {
        return Err(Error::IndexOutOfRange {
            index: x_prime,
            len: avc.x_size(),
        });
    }
    let MinMax { value, strategy } = min_max_tv(avc, std::slice::from_ref(p), x_prime)?;
    Ok(Kappa { value, strategy })
}
