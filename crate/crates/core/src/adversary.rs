//! Adversarial state selection from the non-causal view `z^n`.
//!
//! All attacks here give lower bounds on what an unrestricted adversary can do.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{MyopicAvc, NULL_STATE};
use crate::code::TwoPhaseCode;
use crate::error::{Error, Result};
use crate::math::prob::tv_slices;
use crate::math::{simplex_grid, Distribution, StochasticMatrix};
use crate::overwrite::{kappa, TierDecision};
use crate::sim::{run_tag_trial, AvcSampler};
use crate::tag::Tag;

/// How the forger picks the message it tries to get accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ForgeryTarget {
    Fixed(usize),
    Random,
    /// The runner-up codeword under ML decoding of the observed prefix.
    #[default]
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdversaryStrategy {
    /// Always plays ∅.
    Absent,
    /// `s_i ~ Q(·|z_i)` independently.
    Memoryless { q: StochasticMatrix },
    /// A classifier witness `Q` for overwriting toward `x_prime`.
    OverwriteWitness { q: StochasticMatrix, x_prime: usize },
    /// Guesses the sent message from the prefix view, steers the prefix toward a
    /// different codeword and the tag phase toward that codeword's acceptance set.
    TwoPhaseForger { target: ForgeryTarget },
}

impl AdversaryStrategy {
    pub fn label(&self) -> &'static str {
        match self {
            AdversaryStrategy::Absent => "absent",
            AdversaryStrategy::Memoryless { .. } => "memoryless",
            AdversaryStrategy::OverwriteWitness { .. } => "overwrite_witness",
            AdversaryStrategy::TwoPhaseForger { .. } => "two_phase_forger",
        }
    }

    /// The witness for `x_prime` from an overwritable tier decision.
    pub fn from_witness(tier: &TierDecision, x_prime: usize) -> Result<Self> {
        let w = tier
            .witnesses
            .iter()
            .find(|w| w.x_prime == x_prime)
            .ok_or(Error::MissingWitness("an overwrite witness for the requested x′"))?;
        Ok(AdversaryStrategy::OverwriteWitness {
            q: w.strategy.clone(),
            x_prime,
        })
    }
}

/// What the adversary knows about the transmission scheme.
#[derive(Debug, Clone, Copy)]
pub enum Scheme<'a> {
    /// A bare tag; `m_hat` is the message whose acceptance is sought.
    Tag { tag: &'a Tag, m_hat: usize },
    TwoPhase { code: &'a TwoPhaseCode },
}

fn check_strategy(avc: &MyopicAvc, q: &StochasticMatrix) -> Result<()> {
    if q.in_size() != avc.z_size() || q.out_size() != avc.s_size() {
        return Err(Error::DimensionMismatch {
            expected: avc.z_size() * avc.s_size(),
            actual: q.in_size() * q.out_size(),
        });
    }
    Ok(())
}

/// Chooses `s^n` from the full observation `z^n`.
pub fn select_states<R: Rng + ?Sized>(
    strategy: &AdversaryStrategy,
    avc: &MyopicAvc,
    z: &[usize],
    scheme: Scheme<'_>,
    rng: &mut R,
) -> Result<Vec<usize>> {
    match strategy {
        AdversaryStrategy::Absent => Ok(vec![NULL_STATE; z.len()]),
        AdversaryStrategy::Memoryless { q } | AdversaryStrategy::OverwriteWitness { q, .. } => {
            check_strategy(avc, q)?;
            let samplers = q.samplers();
            Ok(z.iter().map(|&zi| samplers[zi].sample(rng)).collect())
        }
        AdversaryStrategy::TwoPhaseForger { target } => forge(avc, z, scheme, *target, rng),
    }
}

/// Posterior over `x` given `z` under prior `prior`.
fn posterior(avc: &MyopicAvc, prior: &[f64], z: usize) -> Vec<f64> {
    let mut post: Vec<f64> = prior.iter().enumerate().map(|(x, p)| p * avc.u().get(x, z)).collect();
    let total: f64 = post.iter().sum();
    if total > 0.0 {
        post.iter_mut().for_each(|p| *p /= total);
        post
    } else {
        prior.to_vec()
    }
}

/// The state whose output mixture under `post` is closest to `target`; ties go
/// to the lowest state index.
fn closest_state(avc: &MyopicAvc, post: &[f64], target: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for s in 0..avc.s_size() {
        let mut out = vec![0.0; avc.y_size()];
        for (x, px) in post.iter().enumerate() {
            for (y, o) in out.iter_mut().enumerate() {
                *o += px * avc.w_prob(y, x, s);
            }
        }
        let d = tv_slices(&out, target);
        if d < best.0 - 1e-15 {
            best = (d, s);
        }
    }
    best.1
}

/// Greedy tag-phase states pushing outputs on the decision sets of `m_hat`
/// toward the target. `guessed_set` holds positions believed to carry `x′`.
fn forge_tag_phase(
    avc: &MyopicAvc,
    tag: &Tag,
    m_hat: usize,
    z: &[usize],
    guessed_set: Option<&[Vec<usize>]>,
) -> Vec<usize> {
    let base = tag.base();
    let target = base.target.probs();
    let off = tag.off_set_input();
    let on = Distribution::point_mass(off.len(), base.x_prime);
    let mut states = vec![NULL_STATE; z.len()];
    let mut believed_on = vec![false; z.len()];
    if let Some(sets) = guessed_set {
        for &i in sets.iter().flatten() {
            believed_on[i] = true;
        }
    }
    for &i in tag.decision_sets(m_hat).iter().flatten() {
        let prior = if believed_on[i] { on.probs() } else { off.probs() };
        states[i] = closest_state(avc, &posterior(avc, prior, z[i]), target);
    }
    states
}

fn forge<R: Rng + ?Sized>(
    avc: &MyopicAvc,
    z: &[usize],
    scheme: Scheme<'_>,
    target: ForgeryTarget,
    rng: &mut R,
) -> Result<Vec<usize>> {
    match scheme {
        Scheme::Tag { tag, m_hat } => Ok(forge_tag_phase(avc, tag, m_hat, z, None)),
        Scheme::TwoPhase { code } => {
            let cc = &code.channel_code;
            let split = code.split();
            let n_msg = code.message_count();
            let scores = cc.log_likelihoods(avc.u(), &z[..split]);
            let mut guess = 0;
            for (m, &s) in scores.iter().enumerate() {
                if s > scores[guess] {
                    guess = m;
                }
            }
            let m_hat = match target {
                ForgeryTarget::Fixed(k) => {
                    let k = k % n_msg;
                    if k == guess {
                        (k + 1) % n_msg
                    } else {
                        k
                    }
                }
                ForgeryTarget::Random => {
                    let r = rng.random_range(0..n_msg - 1);
                    if r >= guess {
                        r + 1
                    } else {
                        r
                    }
                }
                ForgeryTarget::Adaptive => {
                    let mut best: Option<usize> = None;
                    for (m, &s) in scores.iter().enumerate() {
                        if m != guess && best.is_none_or(|b| s > scores[b]) {
                            best = Some(m);
                        }
                    }
                    best.expect("at least two messages")
                }
            };
            let x_guess = cc.codeword(guess);
            let y_goal = cc.codeword(m_hat);
            let mut states = Vec::with_capacity(z.len());
            for i in 0..split {
                let mut best = (f64::NEG_INFINITY, NULL_STATE);
                for s in 0..avc.s_size() {
                    let p = avc.w_prob(y_goal[i], x_guess[i], s);
                    if p > best.0 {
                        best = (p, s);
                    }
                }
                states.push(best.1);
            }
            let guessed = code.tag.decision_sets(guess);
            states.extend(forge_tag_phase(avc, &code.tag, m_hat, &z[split..], Some(&guessed)));
            Ok(states)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Simulated transmissions per candidate strategy.
    pub trials: usize,
    /// Common seed for every candidate evaluation.
    pub seed: u64,
    /// Candidate rows are the points `k/grid_steps` of the state simplex.
    pub grid_steps: usize,
    pub max_sweeps: usize,
    /// Starting strategy; the κ witness for `(p_x, x′)` when absent.
    pub start: Option<StochasticMatrix>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            trials: 500,
            seed: 0,
            grid_steps: 4,
            max_sweeps: 3,
            start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub q: StochasticMatrix,
    /// Acceptance frequency of `m_hat` over the search trials.
    pub acceptance: f64,
    pub evaluations: usize,
}

/// Lexicographic score: acceptances, then closeness of the decision statistic.
fn evaluate(
    avc: &MyopicAvc,
    sampler: &AvcSampler,
    tag: &Tag,
    m: usize,
    m_hat: usize,
    q: &StochasticMatrix,
    cfg: &SearchConfig,
) -> Result<(usize, f64)> {
    let strategy = AdversaryStrategy::Memoryless { q: q.clone() };
    let mut accepts = 0;
    let mut stat_sum = 0.0;
    for t in 0..cfg.trials {
        let out = run_tag_trial(avc, sampler, tag, &strategy, m, m_hat, cfg.seed, t as u64)?;
        accepts += out.decision.is_accept() as usize;
        stat_sum += out.statistic;
    }
    Ok((accepts, -stat_sum / cfg.trials.max(1) as f64))
}

fn better(a: (usize, f64), b: (usize, f64)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 > b.1 + 1e-12)
}

/// Coordinate ascent over the rows of a memoryless `Q(s|z)`, maximizing the
/// simulated acceptance of `m_hat` when `m` is sent. Deterministic in `cfg`.
pub fn best_memoryless_response(
    avc: &MyopicAvc,
    tag: &Tag,
    m: usize,
    m_hat: usize,
    cfg: &SearchConfig,
) -> Result<BestResponse> {
    if m == m_hat {
        return Err(crate::error::out_of_range("m_hat", "must differ from m"));
    }
    let sampler = AvcSampler::new(avc);
    let mut q = match &cfg.start {
        Some(q) => {
            check_strategy(avc, q)?;
            q.clone()
        }
        None => kappa(&tag.off_set_input(), tag.base().x_prime, avc)?.strategy,
    };
    let mut score = evaluate(avc, &sampler, tag, m, m_hat, &q, cfg)?;
    let mut evaluations = 1;
    let candidates: Vec<Distribution> = simplex_grid(avc.s_size(), cfg.grid_steps.max(1))
        .into_iter()
        .map(|r| Distribution::from_approx(r, 1e-12))
        .collect::<Result<_>>()?;
    for _ in 0..cfg.max_sweeps {
        let mut improved = false;
        for z in 0..avc.z_size() {
            for row in &candidates {
                if row == q.row(z) {
                    continue;
                }
                let mut rows = q.rows().to_vec();
                rows[z] = row.clone();
                let cand = StochasticMatrix::from_rows(rows)?;
                let s = evaluate(avc, &sampler, tag, m, m_hat, &cand, cfg)?;
                evaluations += 1;
                if better(s, score) {
                    score = s;
                    q = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(BestResponse {
        q,
        acceptance: score.0 as f64 / cfg.trials.max(1) as f64,
        evaluations,
    })
}
