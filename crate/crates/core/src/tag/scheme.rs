use rand::Rng;
use serde::{Deserialize, Serialize};

use super::family::{set_difference, SetFamily};
use crate::channel::MyopicAvc;
use crate::error::{out_of_range, Error, Result};
use crate::math::{CategoricalSampler, Distribution, EmpiricalCounts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Decision {
    Accept,
    Reject,
}

impl Decision {
    pub fn is_accept(self) -> bool {
        self == Decision::Accept
    }
}

/// Positions in the message's set carry `x′`; all others are drawn i.i.d. from
/// `p_x`. The decoder for `m̂` accepts iff the empirical output distribution on
/// the set of `m̂` is within `ρ` (TV, strict) of `W(·|x′,∅)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagScheme {
    pub p_x: Distribution,
    pub x_prime: usize,
    pub family: SetFamily,
    pub mu: f64,
    pub rho: f64,
    /// `W(·|x′,∅)`.
    pub target: Distribution,
}

impl TagScheme {
    /// `rho` defaults to `μ/4`.
    pub fn new(
        avc: &MyopicAvc,
        p_x: Distribution,
        x_prime: usize,
        family: SetFamily,
        mu: f64,
        rho: Option<f64>,
    ) -> Result<Self> {
        if p_x.len() != avc.x_size() {
            return Err(Error::DimensionMismatch {
                expected: avc.x_size(),
                actual: p_x.len(),
            });
        }
        if x_prime >= avc.x_size() {
            return Err(Error::IndexOutOfRange {
                index: x_prime,
                len: avc.x_size(),
            });
        }
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(out_of_range("mu", format!("{mu} not in (0,1]")));
        }
        let rho = rho.unwrap_or(mu / 4.0);
        if !(rho > 0.0 && rho < mu / 2.0) {
            return Err(out_of_range("rho", format!("{rho} not in (0, μ/2 = {})", mu / 2.0)));
        }
        if family.len() < 2 {
            return Err(out_of_range("family", "at least two sets are required"));
        }
        Ok(Self {
            p_x,
            x_prime,
            family,
            mu,
            rho,
            target: avc.no_adversary().row(x_prime).clone(),
        })
    }

    pub fn block_len(&self) -> usize {
        self.family.n
    }

    pub fn message_count(&self) -> usize {
        self.family.len()
    }

    fn check_message(&self, m: usize) -> Result<()> {
        if m >= self.message_count() {
            return Err(Error::IndexOutOfRange {
                index: m,
                len: self.message_count(),
            });
        }
        Ok(())
    }

    pub fn encode<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<Vec<usize>> {
        self.encode_with(m, &self.p_x.sampler(), rng)
    }

    /// Encodes with `sampler` standing in for `p_x` off the set.
    pub(crate) fn encode_with<R: Rng + ?Sized>(
        &self,
        m: usize,
        sampler: &CategoricalSampler,
        rng: &mut R,
    ) -> Result<Vec<usize>> {
        self.check_message(m)?;
        let set = self.family.set(m);
        let mut out = Vec::with_capacity(self.block_len());
        let mut next = 0;
        for i in 0..self.block_len() {
            if next < set.len() && set[next] == i {
                out.push(self.x_prime);
                next += 1;
            } else {
                out.push(sampler.sample(rng));
            }
        }
        Ok(out)
    }

    /// TV between the empirical distribution of `y` on the set of `m_hat` and the target.
    pub fn statistic(&self, m_hat: usize, y: &[usize]) -> Result<f64> {
        self.check_message(m_hat)?;
        if y.len() != self.block_len() {
            return Err(Error::DimensionMismatch {
                expected: self.block_len(),
                actual: y.len(),
            });
        }
        let counts = EmpiricalCounts::tally(y, self.family.set(m_hat), self.target.len())?;
        Ok(counts.distance_to(&self.target))
    }

    pub fn decode(&self, m_hat: usize, y: &[usize]) -> Result<Decision> {
        Ok(if self.statistic(m_hat, y)? < self.rho {
            Decision::Accept
        } else {
            Decision::Reject
        })
    }
}

/// Both sides of the set-overlap inequality for `B′ = B_{m̂}`, `B = B_m`:
///
/// `V(P̂(·|B′), T) ≥ (1−α)(1−β)/(1+β) · V(P̂(·|B′∖B), T) − 2α(1+β)/(1−β)`
///
/// Returns `(lhs, rhs)`. If `B′ ∖ B` is empty the difference term is taken as 0.
pub fn overlap_gap(
    y: &[usize],
    family: &SetFamily,
    m: usize,
    m_hat: usize,
    target: &Distribution,
) -> Result<(f64, f64)> {
    if m == m_hat {
        return Err(out_of_range("m_hat", "must differ from m"));
    }
    let (a, b) = (family.alpha, family.beta);
    let b_prime = family.set(m_hat);
    let lhs = EmpiricalCounts::tally(y, b_prime, target.len())?.distance_to(target);
    let diff = set_difference(b_prime, family.set(m));
    let v_diff = if diff.is_empty() {
        0.0
    } else {
        EmpiricalCounts::tally(y, &diff, target.len())?.distance_to(target)
    };
    let rhs = (1.0 - a) * (1.0 - b) / (1.0 + b) * v_diff - 2.0 * a * (1.0 + b) / (1.0 - b);
    Ok((lhs, rhs))
}

/// Left side of the `(α, β)` admissibility condition for threshold `rho`:
/// `(1+β)/((1−α)(1−β)) · (ρ + 2α(1+β)/(1−β))`. Must not exceed `μ/2`.
pub fn alphabeta_lhs(alpha: f64, beta: f64, rho: f64) -> f64 {
    (1.0 + beta) / ((1.0 - alpha) * (1.0 - beta)) * (rho + 2.0 * alpha * (1.0 + beta) / (1.0 - beta))
}

pub fn check_alphabeta(alpha: f64, beta: f64, mu: f64, rho: f64) -> Result<()> {
    let lhs = alphabeta_lhs(alpha, beta, rho);
    if lhs <= mu / 2.0 {
        Ok(())
    } else {
        Err(out_of_range(
            "alpha/beta",
            format!("(1+β)/((1−α)(1−β))·(ρ+2α(1+β)/(1−β)) = {lhs:.4} exceeds μ/2 = {:.4}", mu / 2.0),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::make_r_ow_bsc_bec;
    use crate::tag::family::build_set_family;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scheme(p_x: Distribution) -> TagScheme {
        let avc = make_r_ow_bsc_bec(0.1, 0.3, 0.5).unwrap();
        let fam = build_set_family(400, 0.25, 0.3, 4, 5, 10).unwrap();
        TagScheme::new(&avc, p_x, 0, fam, 0.2, None).unwrap()
    }

    #[test]
    fn point_mass_input_gives_constant_codeword() {
        let s = scheme(Distribution::point_mass(2, 0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(s.encode(2, &mut rng).unwrap().iter().all(|&x| x == 0));
    }

    #[test]
    fn set_positions_carry_x_prime() {
        let s = scheme(Distribution::point_mass(2, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = s.encode(1, &mut rng).unwrap();
        for (i, &xi) in x.iter().enumerate() {
            assert_eq!(xi == 0, s.family.set(1).binary_search(&i).is_ok());
        }
    }

    #[test]
    fn decoder_examples() {
        let s = scheme(Distribution::uniform(2));
        let set = s.family.set(0).to_vec();
        // exact target frequencies (0.9, 0.1) on the set
        let mut y = vec![1; 400];
        let zeros = (set.len() as f64 * 0.9).round() as usize;
        for (k, &i) in set.iter().enumerate() {
            y[i] = if k < zeros { 0 } else { 1 };
        }
        assert!(s.statistic(0, &y).unwrap() < 0.01);
        assert_eq!(s.decode(0, &y).unwrap(), Decision::Accept);
        // constant symbol 1 on the set: TV 0.9
        let ones = vec![1; 400];
        assert_eq!(s.decode(0, &ones).unwrap(), Decision::Reject);
        assert!(s.decode(9, &ones).is_err());
        assert!(s.decode(0, &ones[..10]).is_err());
    }

    #[test]
    fn rho_must_stay_below_half_mu() {
        let avc = make_r_ow_bsc_bec(0.1, 0.3, 0.5).unwrap();
        let fam = build_set_family(400, 0.25, 0.3, 2, 5, 10).unwrap();
        assert!(TagScheme::new(&avc, Distribution::uniform(2), 0, fam.clone(), 0.2, Some(0.1)).is_err());
        let s = TagScheme::new(&avc, Distribution::uniform(2), 0, fam, 0.2, None).unwrap();
        assert_eq!(s.rho, 0.05);
    }

    #[test]
    fn overlap_gap_disjoint_sets() {
        let fam = SetFamily::from_sets(10, 0.2, 0.5, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let target = Distribution::new(vec![0.9, 0.1]).unwrap();
        let y = vec![1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
        let (lhs, rhs) = overlap_gap(&y, &fam, 0, 1, &target).unwrap();
        // B′∖B = B′, so rhs = c·lhs − slack with c < 1
        let c = 0.8 * 0.5 / 1.5;
        assert!((rhs - (c * lhs - 2.0 * 0.2 * 1.5 / 0.5)).abs() < 1e-12);
        assert!(lhs >= rhs);
        assert!(overlap_gap(&y, &fam, 1, 1, &target).is_err());
    }

    #[test]
    fn alphabeta_condition() {
        assert!(check_alphabeta(0.04, 0.1, 0.8, 0.2).is_ok());
        assert!(check_alphabeta(0.2, 0.2, 0.2, 0.05).is_err());
    }
}
