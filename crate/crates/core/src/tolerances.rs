use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// LP equality constraints and push-forward comparisons.
    pub equality: f64,
    /// Row sums of distributions and stochastic matrices.
    pub stochasticity: f64,
    /// Optimal TV values at or below this are treated as zero (overwritable).
    pub classification_margin: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        equality: 1e-9,
        stochasticity: 1e-12,
        classification_margin: 1e-6,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
