use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Result};

pub const MIN_DECAY_POINTS: usize = 4;

/// Least-squares line through `(n, log2 estimate)`; `gamma = −slope`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    pub n_values: Vec<usize>,
    pub log2_estimates: Vec<f64>,
    pub gamma: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// All estimates equal: the slope is 0 and `r_squared` is meaningless.
    pub degenerate: bool,
}

pub fn decay_fit(n_values: &[usize], estimates: &[f64]) -> Result<DecayEstimate> {
    if n_values.len() != estimates.len() {
        return Err(crate::Error::DimensionMismatch {
            expected: n_values.len(),
            actual: estimates.len(),
        });
    }
    if n_values.len() < MIN_DECAY_POINTS {
        return Err(out_of_range(
            "n_values",
            format!("{} points given, at least {MIN_DECAY_POINTS} needed", n_values.len()),
        ));
    }
    if let Some(e) = estimates.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
        return Err(out_of_range("estimates", format!("{e} not in (0,1]; use the rule-of-three bound for zero counts")));
    }
    let xs: Vec<f64> = n_values.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = estimates.iter().map(|e| e.log2()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(out_of_range("n_values", "need at least two distinct n"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let degenerate = syy <= 1e-24;
    let slope = if degenerate { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let r_squared = if degenerate { 0.0 } else { sxy * sxy / (sxx * syy) };
    Ok(DecayEstimate {
        n_values: n_values.to_vec(),
        log2_estimates: ys,
        gamma: -slope,
        slope,
        intercept,
        r_squared,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let ns = [50, 100, 200, 400];
        let est: Vec<f64> = ns.iter().map(|&n| 2f64.powf(-0.01 * n as f64)).collect();
        let d = decay_fit(&ns, &est).unwrap();
        assert!((d.gamma - 0.01).abs() < 1e-6);
        assert!((d.r_squared - 1.0).abs() < 1e-12);
        assert!(d.intercept.abs() < 1e-9);
    }

    #[test]
    fn constant_is_flagged() {
        let d = decay_fit(&[1, 2, 3, 4], &[0.3; 4]).unwrap();
        assert!(d.degenerate);
        assert_eq!(d.slope, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(decay_fit(&[1, 2, 3], &[0.1, 0.1, 0.1]).is_err());
        assert!(decay_fit(&[1, 2, 3, 4], &[0.1, 0.0, 0.1, 0.1]).is_err());
        assert!(decay_fit(&[5, 5, 5, 5], &[0.1, 0.2, 0.1, 0.1]).is_err());
    }
}
