//! Families of overlapping position sets for authentication tags.
//!
//! Each set includes every position independently with probability `α`. A family
//! is accepted when, for all sets and all distinct pairs `B ≠ B′`:
//!
//! 1. `α(1−β)n ≤ |B| ≤ α(1+β)n`
//! 2. `|B ∩ B′| < α²(1+β)n`
//! 3. `|B′ ∖ B| > α(1−α)(1−β)n`
//!
//! Properties 2 and 3 are only meaningful for distinct pairs: with `B = B′`,
//! property 2 would demand `|B| < α²(1+β)n`, while property 1 forces
//! `|B| ≥ α(1−β)n`, which is larger whenever `α(1+β) < 1−β`.
//! The stronger form of property 3 with `(1+β)` in place of `(1−β)` is checked
//! and reported but never required.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};

/// Per-slot resampling budget inside one family attempt.
pub const DEFAULT_SET_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairwiseRule {
    /// Properties 1–3.
    Enforce,
    /// Property 1 only; pairwise properties are reported.
    SizeOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub target_count: usize,
    pub seed: u64,
    pub max_retries: usize,
    pub set_attempts: usize,
    pub pairwise: PairwiseRule,
}

impl FamilyParams {
    pub fn new(n: usize, alpha: f64, beta: f64, target_count: usize, seed: u64) -> Self {
        Self {
            n,
            alpha,
            beta,
            target_count,
            seed,
            max_retries: 10,
            set_attempts: DEFAULT_SET_ATTEMPTS,
            pairwise: PairwiseRule::Enforce,
        }
    }
}

/// Outcome of checking every property on a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyCheck {
    pub property1: bool,
    pub property2: bool,
    pub property3: bool,
    /// Property 3 with the `(1+β)` constant.
    pub property3_strong: bool,
    /// `log2(N)/n`.
    pub achieved_rate: f64,
    /// `min{β²α²/6, β²α(1−α)/4}`.
    pub rate_bound: f64,
    /// Family reaches `2^{R n}` sets at the rate bound.
    pub property4: bool,
    pub pairs_checked: usize,
}

impl FamilyCheck {
    pub fn passes_1_to_3(&self) -> bool {
        self.property1 && self.property2 && self.property3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetFamily {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    /// `log2(N)/n` of the family as built.
    pub rate_r: f64,
    /// Sorted 0-based positions, one set per message.
    pub sets: Vec<Vec<usize>>,
    pub seed: u64,
    /// Whole-family restarts used.
    pub retries: usize,
    /// Individual set redraws used across all attempts.
    pub resamples: usize,
    pub pairwise: PairwiseRule,
}

struct Bounds {
    size_lo: f64,
    size_hi: f64,
    inter_hi: f64,
    diff_lo: f64,
    diff_lo_strong: f64,
}

fn bounds(n: usize, alpha: f64, beta: f64) -> Bounds {
    let n = n as f64;
    Bounds {
        size_lo: alpha * (1.0 - beta) * n,
        size_hi: alpha * (1.0 + beta) * n,
        inter_hi: alpha * alpha * (1.0 + beta) * n,
        diff_lo: alpha * (1.0 - alpha) * (1.0 - beta) * n,
        diff_lo_strong: alpha * (1.0 - alpha) * (1.0 + beta) * n,
    }
}

fn intersection(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Positions of `b` not in `a`.
pub fn set_difference(b: &[usize], a: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(b.len());
    let mut j = 0;
    for &x in b {
        while j < a.len() && a[j] < x {
            j += 1;
        }
        if j >= a.len() || a[j] != x {
            out.push(x);
        }
    }
    out
}

#[derive(Clone, Copy)]
enum Violation {
    Size,
    Intersection,
    Difference,
}

const VIOLATION_NAMES: [&str; 3] = ["property 1", "property 2", "property 3"];

fn first_violation(candidate: &[usize], accepted: &[Vec<usize>], b: &Bounds, pairwise: PairwiseRule) -> Option<Violation> {
    let size = candidate.len() as f64;
    if size < b.size_lo || size > b.size_hi {
        return Some(Violation::Size);
    }
    if pairwise == PairwiseRule::SizeOnly {
        return None;
    }
    for other in accepted {
        let inter = intersection(candidate, other);
        if inter as f64 >= b.inter_hi {
            return Some(Violation::Intersection);
        }
        let diff_c = (candidate.len() - inter) as f64;
        let diff_o = (other.len() - inter) as f64;
        if diff_c <= b.diff_lo || diff_o <= b.diff_lo {
            return Some(Violation::Difference);
        }
    }
    None
}

fn validate(p: &FamilyParams) -> Result<()> {
    if !(p.alpha > 0.0 && p.alpha < 1.0) {
        return Err(out_of_range("alpha", format!("{} not in (0,1)", p.alpha)));
    }
    if !(p.beta > 0.0 && p.beta < 1.0) {
        return Err(out_of_range("beta", format!("{} not in (0,1)", p.beta)));
    }
    if p.target_count < 2 {
        return Err(out_of_range("target_count", format!("{} < 2", p.target_count)));
    }
    if p.n == 0 {
        return Err(out_of_range("n", "block length must be positive"));
    }
    Ok(())
}

/// Builds a family of `target_count` sets passing properties 1–3 (or property 1
/// alone under [`PairwiseRule::SizeOnly`]).
///
/// Each slot is redrawn up to `set_attempts` times; a slot that cannot be filled
/// restarts the whole family, at most `max_retries` times.
pub fn build_set_family_with(p: &FamilyParams) -> Result<SetFamily> {
    validate(p)?;
    let b = bounds(p.n, p.alpha, p.beta);
    if b.size_lo.ceil() > b.size_hi.floor() || b.size_lo > p.n as f64 {
        return Err(Error::FamilyExhausted {
            attempts: 0,
            most_failed: VIOLATION_NAMES[0],
            counts: format!(
                "no integer set size in [{:.3}, {:.3}] with n = {}",
                b.size_lo, b.size_hi, p.n
            ),
        });
    }

    let mut counts = [0usize; 3];
    let mut resamples = 0;
    for attempt in 0..=p.max_retries {
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        rng.set_stream(attempt as u64);
        let mut sets: Vec<Vec<usize>> = Vec::with_capacity(p.target_count);
        'slots: for _ in 0..p.target_count {
            for _ in 0..p.set_attempts.max(1) {
                let candidate: Vec<usize> = (0..p.n).filter(|_| rng.random::<f64>() < p.alpha).collect();
                match first_violation(&candidate, &sets, &b, p.pairwise) {
                    None => {
                        sets.push(candidate);
                        continue 'slots;
                    }
                    Some(v) => {
                        counts[v as usize] += 1;
                        resamples += 1;
                    }
                }
            }
            break;
        }
        if sets.len() == p.target_count {
            return Ok(SetFamily {
                n: p.n,
                alpha: p.alpha,
                beta: p.beta,
                rate_r: (p.target_count as f64).log2() / p.n as f64,
                sets,
                seed: p.seed,
                retries: attempt,
                resamples,
                pairwise: p.pairwise,
            });
        }
    }
    let worst = (0..3).max_by_key(|&i| (counts[i], std::cmp::Reverse(i))).unwrap();
    Err(Error::FamilyExhausted {
        attempts: p.max_retries + 1,
        most_failed: VIOLATION_NAMES[worst],
        counts: format!(
            "property 1: {}, property 2: {}, property 3: {}",
            counts[0], counts[1], counts[2]
        ),
    })
}

pub fn build_set_family(
    n: usize,
    alpha: f64,
    beta: f64,
    target_count: usize,
    seed: u64,
    max_retries: usize,
) -> Result<SetFamily> {
    let mut p = FamilyParams::new(n, alpha, beta, target_count, seed);
    p.max_retries = max_retries;
    build_set_family_with(&p)
}

impl SetFamily {
    /// A family from explicit 0-based sets (sorted and deduplicated here).
    pub fn from_sets(n: usize, alpha: f64, beta: f64, sets: Vec<Vec<usize>>) -> Result<Self> {
        let mut sets = sets;
        for s in sets.iter_mut() {
            s.sort_unstable();
            s.dedup();
            if let Some(&last) = s.last() {
                if last >= n {
                    return Err(Error::IndexOutOfRange { index: last, len: n });
                }
            }
        }
        let count = sets.len().max(1);
        Ok(Self {
            n,
            alpha,
            beta,
            rate_r: (count as f64).log2() / n as f64,
            sets,
            seed: 0,
            retries: 0,
            resamples: 0,
            pairwise: PairwiseRule::Enforce,
        })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn set(&self, m: usize) -> &[usize] {
        &self.sets[m]
    }

    /// The ordered pair `(m, m_hat)` maximizing `|B_m ∩ B_m̂| / |B_m̂|`, the
    /// share of the candidate's set that carries `x′` when `m` is sent. Ties go
    /// to the lexicographically smallest pair.
    pub fn max_overlap_pair(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for m in 0..self.len() {
            for m_hat in 0..self.len() {
                if m == m_hat || self.sets[m_hat].is_empty() {
                    continue;
                }
                let f = intersection(&self.sets[m], &self.sets[m_hat]) as f64 / self.sets[m_hat].len() as f64;
                if best.is_none_or(|b| f > b.2) {
                    best = Some((m, m_hat, f));
                }
            }
        }
        best
    }

    /// Exhaustive check of every property over all sets and distinct pairs.
    pub fn check(&self) -> FamilyCheck {
        let b = bounds(self.n, self.alpha, self.beta);
        let property1 = self
            .sets
            .iter()
            .all(|s| (s.len() as f64) >= b.size_lo && (s.len() as f64) <= b.size_hi);
        let (mut p2, mut p3, mut p3s, mut pairs) = (true, true, true, 0);
        for i in 0..self.sets.len() {
            for j in 0..self.sets.len() {
                if i == j {
                    continue;
                }
                pairs += 1;
                let inter = intersection(&self.sets[i], &self.sets[j]);
                p2 &= (inter as f64) < b.inter_hi;
                // |B_j ∖ B_i|
                let diff = (self.sets[j].len() - inter) as f64;
                p3 &= diff > b.diff_lo;
                p3s &= diff > b.diff_lo_strong;
            }
        }
        let (a, be) = (self.alpha, self.beta);
        let rate_bound = (be * be * a * a / 6.0).min(be * be * a * (1.0 - a) / 4.0);
        let achieved_rate = (self.sets.len().max(1) as f64).log2() / self.n as f64;
        FamilyCheck {
            property1,
            property2: p2,
            property3: p3,
            property3_strong: p3s,
            achieved_rate,
            rate_bound,
            property4: achieved_rate >= rate_bound,
            pairs_checked: pairs,
        }
    }
}
