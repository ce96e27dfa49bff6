//! Keyless authentication tags built on overlapping position sets.

mod family;
mod mixture;
mod scheme;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::math::Distribution;

pub use family::{
    build_set_family, build_set_family_with, set_difference, FamilyCheck, FamilyParams,
    PairwiseRule, SetFamily, DEFAULT_SET_ATTEMPTS,
};
pub use mixture::{build_mixture_tag, MixtureParams, MixtureTagScheme};
pub use scheme::{alphabeta_lhs, check_alphabeta, overlap_gap, Decision, TagScheme};

/// Either tag construction, behind one encode/decode interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tag {
    Simple(TagScheme),
    Mixture(MixtureTagScheme),
}

impl Tag {
    pub fn block_len(&self) -> usize {
        match self {
            Tag::Simple(t) => t.block_len(),
            Tag::Mixture(t) => t.block_len(),
        }
    }

    pub fn message_count(&self) -> usize {
        match self {
            Tag::Simple(t) => t.message_count(),
            Tag::Mixture(t) => t.message_count(),
        }
    }

    /// The scheme holding the shared family, `x′`, `ρ` and target.
    pub fn base(&self) -> &TagScheme {
        match self {
            Tag::Simple(t) => t,
            Tag::Mixture(t) => &t.base,
        }
    }

    pub fn encode<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<Vec<usize>> {
        match self {
            Tag::Simple(t) => t.encode(m, rng),
            Tag::Mixture(t) => t.encode(m, rng),
        }
    }

    pub fn decode(&self, m_hat: usize, y: &[usize]) -> Result<Decision> {
        match self {
            Tag::Simple(t) => t.decode(m_hat, y),
            Tag::Mixture(t) => t.decode(m_hat, y),
        }
    }

    /// Largest per-sub-block TV statistic; the decoder accepts iff it is below `ρ`.
    pub fn statistic(&self, m_hat: usize, y: &[usize]) -> Result<f64> {
        match self {
            Tag::Simple(t) => t.statistic(m_hat, y),
            Tag::Mixture(t) => {
                if y.len() != t.block_len() {
                    return Err(crate::Error::DimensionMismatch {
                        expected: t.block_len(),
                        actual: y.len(),
                    });
                }
                let mut worst = 0.0f64;
                for block in y.chunks(t.sub_block_len) {
                    worst = worst.max(t.base.statistic(m_hat, block)?);
                }
                Ok(worst)
            }
        }
    }

    /// Every message the decoder would accept on `y`, in increasing order.
    pub fn accepted_messages(&self, y: &[usize]) -> Result<Vec<usize>> {
        if y.len() != self.block_len() {
            return Err(crate::Error::DimensionMismatch {
                expected: self.block_len(),
                actual: y.len(),
            });
        }
        let base = self.base();
        let target = base.target.probs();
        if let Some(&bad) = y.iter().find(|&&s| s >= target.len()) {
            return Err(crate::Error::IndexOutOfRange {
                index: bad,
                len: target.len(),
            });
        }
        let (sub_len, blocks) = match self {
            Tag::Simple(t) => (t.block_len(), 1),
            Tag::Mixture(t) => (t.sub_block_len, t.sub_block_count),
        };
        let mut counts = vec![0u64; target.len()];
        let mut out = Vec::new();
        'msg: for m in 0..self.message_count() {
            let set = base.family.set(m);
            let n = set.len() as f64;
            for l in 0..blocks {
                counts.iter_mut().for_each(|c| *c = 0);
                for &i in set {
                    counts[y[l * sub_len + i]] += 1;
                }
                let tv = 0.5 * counts.iter().zip(target).map(|(&c, t)| (c as f64 / n - t).abs()).sum::<f64>();
                if tv >= base.rho {
                    continue 'msg;
                }
            }
            out.push(m);
        }
        Ok(out)
    }

    /// Positions of the whole tag block inspected by the decoder for `m_hat`,
    /// one list per sub-block.
    pub fn decision_sets(&self, m_hat: usize) -> Vec<Vec<usize>> {
        match self {
            Tag::Simple(t) => vec![t.family.set(m_hat).to_vec()],
            Tag::Mixture(t) => (0..t.sub_block_count)
                .map(|l| {
                    t.base
                        .family
                        .set(m_hat)
                        .iter()
                        .map(|&i| l * t.sub_block_len + i)
                        .collect()
                })
                .collect(),
        }
    }

    /// Per-symbol input distribution at positions outside the message's set,
    /// averaged over the private component choice.
    pub fn off_set_input(&self) -> Distribution {
        match self {
            Tag::Simple(t) => t.p_x.clone(),
            Tag::Mixture(t) => {
                let k = t.components.len() as f64;
                let mut avg = vec![0.0; t.base.p_x.len()];
                for c in &t.components {
                    for (a, p) in avg.iter_mut().zip(c.probs()) {
                        *a += p / k;
                    }
                }
                Distribution::from_approx(avg, 1e-9).expect("average of distributions")
            }
        }
    }
}

impl From<TagScheme> for Tag {
    fn from(t: TagScheme) -> Self {
        Tag::Simple(t)
    }
}

impl From<MixtureTagScheme> for Tag {
    fn from(t: MixtureTagScheme) -> Self {
        Tag::Mixture(t)
    }
}
