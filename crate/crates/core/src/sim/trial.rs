use super::record::{sequence_digest, TrialRecord};
use super::sampler::{trial_rng, AvcSampler, Transmission};
use crate::adversary::{AdversaryStrategy, Scheme};
use crate::channel::MyopicAvc;
use crate::code::{CodeOutput, TwoPhaseCode};
use crate::error::{Error, Result};
use crate::tag::{Decision, Tag};

#[derive(Debug, Clone)]
pub struct TagTrial {
    pub x: Vec<usize>,
    pub transmission: Transmission,
    pub decision: Decision,
    pub statistic: f64,
}

impl TagTrial {
    /// Error event: a rejection when `m_hat == m`, an acceptance otherwise.
    pub fn is_error(&self, m: usize, m_hat: usize) -> bool {
        (m == m_hat) != self.decision.is_accept()
    }
}

/// Sends `m` through the tag and decodes as `m_hat`, on stream `stream` of `seed`.
#[allow(clippy::too_many_arguments)]
pub fn run_tag_trial(
    avc: &MyopicAvc,
    sampler: &AvcSampler,
    tag: &Tag,
    strategy: &AdversaryStrategy,
    m: usize,
    m_hat: usize,
    seed: u64,
    stream: u64,
) -> Result<TagTrial> {
    let mut rng = trial_rng(seed, stream);
    let x = tag.encode(m, &mut rng)?;
    let transmission = sampler.transmit(avc, &x, strategy, Scheme::Tag { tag, m_hat }, &mut rng)?;
    let statistic = tag.statistic(m_hat, &transmission.y)?;
    let decision = if statistic < tag.base().rho {
        Decision::Accept
    } else {
        Decision::Reject
    };
    Ok(TagTrial {
        x,
        transmission,
        decision,
        statistic,
    })
}

#[derive(Debug, Clone)]
pub struct CodeTrial {
    pub x: Vec<usize>,
    pub transmission: Transmission,
    pub output: CodeOutput,
    /// Prefix decision `g`.
    pub g: usize,
    /// Every message the tag decoder accepts on the received suffix.
    pub suffix_accepts: Vec<usize>,
}

impl CodeTrial {
    /// `Φ ∉ {m, REJECT}`.
    pub fn forged(&self, m: usize) -> bool {
        matches!(self.output, CodeOutput::Message(k) if k != m)
    }

    /// `g = m` yet `Φ ∉ {m, REJECT}`; impossible by construction of `Φ`.
    pub fn structural_violation(&self, m: usize) -> bool {
        self.g == m && self.forged(m)
    }
}

pub fn run_code_trial(
    avc: &MyopicAvc,
    sampler: &AvcSampler,
    code: &TwoPhaseCode,
    strategy: &AdversaryStrategy,
    m: usize,
    seed: u64,
    stream: u64,
) -> Result<CodeTrial> {
    let mut rng = trial_rng(seed, stream);
    let x = code.encode(m, &mut rng)?;
    let transmission = sampler.transmit(avc, &x, strategy, Scheme::TwoPhase { code }, &mut rng)?;
    let (output, g) = code.decode_traced(&transmission.y)?;
    let suffix_accepts = code.tag.accepted_messages(&transmission.y[code.split()..])?;
    Ok(CodeTrial {
        x,
        transmission,
        output,
        g,
        suffix_accepts,
    })
}

fn record(
    seed: u64,
    stream: u64,
    m: usize,
    m_hat: usize,
    output: String,
    x: &[usize],
    t: &Transmission,
    outcome: bool,
) -> TrialRecord {
    TrialRecord {
        seed,
        stream,
        m,
        m_hat,
        output,
        x_digest: sequence_digest(x),
        z_digest: sequence_digest(&t.z),
        s_digest: sequence_digest(&t.s),
        y_digest: sequence_digest(&t.y),
        outcome,
    }
}

fn output_label(out: CodeOutput) -> String {
    match out {
        CodeOutput::Message(k) => k.to_string(),
        CodeOutput::Reject => "REJECT".to_string(),
    }
}

pub(crate) fn tag_record(trial: &TagTrial, m: usize, m_hat: usize, seed: u64, stream: u64) -> TrialRecord {
    let output = if trial.decision.is_accept() { "ACCEPT" } else { "REJECT" };
    record(
        seed,
        stream,
        m,
        m_hat,
        output.to_string(),
        &trial.x,
        &trial.transmission,
        trial.is_error(m, m_hat),
    )
}

pub(crate) fn code_record(trial: &CodeTrial, m: usize, seed: u64, stream: u64) -> TrialRecord {
    record(
        seed,
        stream,
        m,
        trial.g,
        output_label(trial.output),
        &trial.x,
        &trial.transmission,
        trial.output != CodeOutput::Message(m),
    )
}

fn mismatch(what: &str) -> Error {
    crate::error::out_of_range("trial record", format!("replay disagrees on {what}"))
}

fn same_trace(a: &TrialRecord, b: &TrialRecord) -> Result<()> {
    for (what, x, y) in [
        ("x", &a.x_digest, &b.x_digest),
        ("z", &a.z_digest, &b.z_digest),
        ("s", &a.s_digest, &b.s_digest),
        ("y", &a.y_digest, &b.y_digest),
        ("output", &a.output, &b.output),
    ] {
        if x != y {
            return Err(mismatch(what));
        }
    }
    if a.outcome != b.outcome {
        return Err(mismatch("outcome"));
    }
    Ok(())
}

/// Regenerates a tag trial, re-runs the decoder on the regenerated output and
/// checks it against `rec`.
pub fn replay_tag_record(avc: &MyopicAvc, tag: &Tag, strategy: &AdversaryStrategy, rec: &TrialRecord) -> Result<()> {
    let sampler = AvcSampler::new(avc);
    let t = run_tag_trial(avc, &sampler, tag, strategy, rec.m, rec.m_hat, rec.seed, rec.stream)?;
    let decision = tag.decode(rec.m_hat, &t.transmission.y)?;
    if decision != t.decision {
        return Err(mismatch("decision"));
    }
    same_trace(rec, &tag_record(&t, rec.m, rec.m_hat, rec.seed, rec.stream))
}

pub fn replay_code_record(
    avc: &MyopicAvc,
    code: &TwoPhaseCode,
    strategy: &AdversaryStrategy,
    rec: &TrialRecord,
) -> Result<()> {
    let sampler = AvcSampler::new(avc);
    let t = run_code_trial(avc, &sampler, code, strategy, rec.m, rec.seed, rec.stream)?;
    if code.decode(&t.transmission.y)? != t.output {
        return Err(mismatch("decoder output"));
    }
    same_trace(rec, &code_record(&t, rec.m, rec.seed, rec.stream))
}
