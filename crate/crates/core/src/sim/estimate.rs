use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::record::{spot_checked, TrialRecord};
use super::sampler::AvcSampler;
use super::trial::{code_record, run_code_trial, run_tag_trial, tag_record};
use crate::adversary::AdversaryStrategy;
use crate::channel::MyopicAvc;
use crate::code::{CodeOutput, TwoPhaseCode};
use crate::error::{out_of_range, Result};
use crate::exec::Execution;
use crate::tag::Tag;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

pub const MIN_TAG_TRIALS: usize = 100;
pub const DEFAULT_MESSAGE_SAMPLE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// λ₁: rejection of the true message.
    FalseAlarm,
    /// λ₂: acceptance of a wrong candidate.
    MissedDetection,
    /// `Φ ≠ m`, maximized over sampled messages.
    CodeNoAdversary,
    /// `Φ ∉ {m, REJECT}`, maximized over sampled messages.
    CodeAdversary,
    /// `g ≠ m` on the payload prefix.
    PrefixError,
    /// Largest per-candidate acceptance frequency of the suffix tag, over
    /// sampled `m` and every `m̂ ≠ m`, from the same trials as the code error.
    PairedMissedDetection,
}

impl Quantity {
    pub fn label(self) -> &'static str {
        match self {
            Quantity::FalseAlarm => "false_alarm",
            Quantity::MissedDetection => "missed_detection",
            Quantity::CodeNoAdversary => "code_no_adv",
            Quantity::CodeAdversary => "code_adv",
            Quantity::PrefixError => "prefix_error",
            Quantity::PairedMissedDetection => "paired_missed_detection",
        }
    }
}

/// Wilson score interval at normal quantile `z`.
pub fn wilson_interval(events: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = events as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // rounding must not push the point estimate outside
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub quantity: Quantity,
    pub estimate: f64,
    pub events: u64,
    pub trials: u64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub method: String,
}

impl ErrorEstimate {
    pub fn from_counts(quantity: Quantity, events: u64, trials: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(events, trials, Z95);
        Self {
            quantity,
            estimate: if trials == 0 { 0.0 } else { events as f64 / trials as f64 },
            events,
            trials,
            ci_lo,
            ci_hi,
            method: "wilson95".to_string(),
        }
    }

    pub fn half_width(&self) -> f64 {
        (self.ci_hi - self.ci_lo) / 2.0
    }

    /// The estimate, or the rule-of-three bound `3/trials` when no event occurred.
    pub fn positive_value(&self) -> f64 {
        if self.events == 0 {
            3.0 / self.trials.max(1) as f64
        } else {
            self.estimate
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagEstimate {
    pub estimate: ErrorEstimate,
    pub mean_statistic: f64,
    /// Traces of every hundredth trial.
    pub records: Vec<TrialRecord>,
}

/// λ₁ when `m_hat == m` (REJECT frequency), λ₂ otherwise (ACCEPT frequency).
#[allow(clippy::too_many_arguments)]
pub fn estimate_tag_errors(
    tag: &Tag,
    avc: &MyopicAvc,
    strategy: &AdversaryStrategy,
    m: usize,
    m_hat: usize,
    trials: usize,
    seed: u64,
    execution: Execution,
) -> Result<TagEstimate> {
    if trials < MIN_TAG_TRIALS {
        return Err(out_of_range("trials", format!("{trials} is below the minimum {MIN_TAG_TRIALS}")));
    }
    let sampler = AvcSampler::new(avc);
    let outcomes = execution.try_map::<_, crate::Error, _>(trials, |t| {
        let trial = run_tag_trial(avc, &sampler, tag, strategy, m, m_hat, seed, t as u64)?;
        let rec = spot_checked(t).then(|| tag_record(&trial, m, m_hat, seed, t as u64));
        Ok((trial.is_error(m, m_hat), trial.statistic, rec))
    })?;
    let events = outcomes.iter().filter(|o| o.0).count() as u64;
    let mean_statistic = outcomes.iter().map(|o| o.1).sum::<f64>() / trials as f64;
    let quantity = if m == m_hat {
        Quantity::FalseAlarm
    } else {
        Quantity::MissedDetection
    };
    Ok(TagEstimate {
        estimate: ErrorEstimate::from_counts(quantity, events, trials as u64),
        mean_statistic,
        records: outcomes.into_iter().filter_map(|o| o.2).collect(),
    })
}

/// `count` distinct messages out of `n_messages`, sorted; all of them if
/// `count ≥ n_messages`.
pub fn sample_messages(n_messages: usize, count: usize, seed: u64) -> Vec<usize> {
    if count >= n_messages {
        return (0..n_messages).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = sample(&mut rng, n_messages, count).into_vec();
    v.sort_unstable();
    v
}

/// Per-message counts from one batch of trials.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageCounts {
    pub m: usize,
    pub trials: u64,
    /// `Φ ≠ m`.
    pub wrong: u64,
    /// `Φ ∉ {m, REJECT}`.
    pub forged: u64,
    /// `g ≠ m`.
    pub prefix_wrong: u64,
    /// The `m̂ ≠ m` most often accepted by the suffix tag, and how often.
    pub top_candidate: Option<usize>,
    pub top_candidate_accepts: u64,
    pub structural_violations: u64,
}

/// Whether the forgery rate stays below the paired suffix acceptance bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Worst message by `lhs − rhs`.
    pub m: usize,
    /// `Pr(Φ ∉ {m, REJECT})`.
    pub lhs: f64,
    /// `max_{m̂≠m} Pr(suffix tag accepts m̂)`.
    pub rhs: f64,
    /// Twice the larger of the two Wilson half-widths.
    pub slack: f64,
    /// `lhs ≤ rhs + slack` for every sampled message.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeEstimate {
    /// `code_no_adv` for the absent strategy, `code_adv` otherwise.
    pub primary: ErrorEstimate,
    pub no_adversary_error: ErrorEstimate,
    pub adversary_error: ErrorEstimate,
    pub prefix_error: ErrorEstimate,
    pub paired_missed_detection: ErrorEstimate,
    pub messages: Vec<usize>,
    pub per_message: Vec<MessageCounts>,
    pub structural_violations: u64,
    pub decomposition: Decomposition,
    pub records: Vec<TrialRecord>,
}

/// What is kept of one code trial.
struct Summary {
    wrong: bool,
    forged: bool,
    prefix_wrong: bool,
    structural: bool,
    suffix_accepts: Vec<usize>,
    rec: Option<TrialRecord>,
}

fn worst(quantity: Quantity, per: &[MessageCounts], trials: u64, f: impl Fn(&MessageCounts) -> u64) -> ErrorEstimate {
    let events = per.iter().map(f).max().unwrap_or(0);
    ErrorEstimate::from_counts(quantity, events, trials)
}

/// Code error probabilities, maximized over `messages`, with `trials`
/// transmissions each. Message `m`, trial `t` uses stream `(m << 32) | t`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_code_errors(
    code: &TwoPhaseCode,
    avc: &MyopicAvc,
    strategy: &AdversaryStrategy,
    messages: &[usize],
    trials: usize,
    seed: u64,
    execution: Execution,
) -> Result<CodeEstimate> {
    if trials == 0 {
        return Err(out_of_range("trials", "must be positive"));
    }
    if messages.is_empty() {
        return Err(out_of_range("messages", "at least one message is required"));
    }
    if let Some(&m) = messages.iter().find(|&&m| m >= code.message_count()) {
        return Err(crate::Error::IndexOutOfRange {
            index: m,
            len: code.message_count(),
        });
    }
    let sampler = AvcSampler::new(avc);
    let total = messages.len() * trials;
    let outcomes = execution.try_map::<_, crate::Error, _>(total, |k| {
        let (mi, t) = (k / trials, k % trials);
        let m = messages[mi];
        let stream = ((m as u64) << 32) | t as u64;
        let trial = run_code_trial(avc, &sampler, code, strategy, m, seed, stream)?;
        let rec = spot_checked(k).then(|| code_record(&trial, m, seed, stream));
        Ok(Summary {
            wrong: trial.output != CodeOutput::Message(m),
            forged: trial.forged(m),
            prefix_wrong: trial.g != m,
            structural: trial.structural_violation(m),
            suffix_accepts: trial.suffix_accepts,
            rec,
        })
    })?;

    let n_msg = code.message_count();
    let mut per_message = Vec::with_capacity(messages.len());
    let mut records = Vec::new();
    let mut accepts = vec![0u64; n_msg];
    for (mi, chunk) in outcomes.chunks(trials).enumerate() {
        let m = messages[mi];
        accepts.iter_mut().for_each(|a| *a = 0);
        let mut c = MessageCounts {
            m,
            trials: trials as u64,
            wrong: 0,
            forged: 0,
            prefix_wrong: 0,
            top_candidate: None,
            top_candidate_accepts: 0,
            structural_violations: 0,
        };
        for o in chunk {
            c.wrong += o.wrong as u64;
            c.forged += o.forged as u64;
            c.prefix_wrong += o.prefix_wrong as u64;
            c.structural_violations += o.structural as u64;
            for &k in &o.suffix_accepts {
                accepts[k] += 1;
            }
            if let Some(r) = &o.rec {
                records.push(r.clone());
            }
        }
        for (k, &a) in accepts.iter().enumerate() {
            if k != m && (c.top_candidate.is_none() || a > c.top_candidate_accepts) {
                c.top_candidate = Some(k);
                c.top_candidate_accepts = a;
            }
        }
        per_message.push(c);
    }

    let t = trials as u64;
    let no_adversary_error = worst(Quantity::CodeNoAdversary, &per_message, t, |c| c.wrong);
    let adversary_error = worst(Quantity::CodeAdversary, &per_message, t, |c| c.forged);
    let prefix_error = worst(Quantity::PrefixError, &per_message, t, |c| c.prefix_wrong);
    let paired_missed_detection =
        worst(Quantity::PairedMissedDetection, &per_message, t, |c| c.top_candidate_accepts);

    let mut decomposition: Option<Decomposition> = None;
    let mut holds = true;
    for c in &per_message {
        let lhs = ErrorEstimate::from_counts(Quantity::CodeAdversary, c.forged, t);
        let rhs = ErrorEstimate::from_counts(Quantity::PairedMissedDetection, c.top_candidate_accepts, t);
        let slack = 2.0 * lhs.half_width().max(rhs.half_width());
        holds &= lhs.estimate <= rhs.estimate + slack;
        let gap = lhs.estimate - rhs.estimate;
        if decomposition.as_ref().is_none_or(|d| gap > d.lhs - d.rhs) {
            decomposition = Some(Decomposition {
                m: c.m,
                lhs: lhs.estimate,
                rhs: rhs.estimate,
                slack,
                holds: true,
            });
        }
    }
    let mut decomposition = decomposition.expect("at least one message");
    decomposition.holds = holds;

    let primary = if matches!(strategy, AdversaryStrategy::Absent) {
        no_adversary_error.clone()
    } else {
        adversary_error.clone()
    };
    Ok(CodeEstimate {
        primary,
        no_adversary_error,
        adversary_error,
        prefix_error,
        paired_missed_detection,
        messages: messages.to_vec(),
        structural_violations: per_message.iter().map(|c| c.structural_violations).sum(),
        per_message,
        decomposition,
        records,
    })
}
