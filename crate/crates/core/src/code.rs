//! Two-phase authentication codes: a channel code for the payload followed by a tag.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::blahut_arimoto;
use crate::error::{out_of_range, Error, Result};
use crate::math::{Distribution, StochasticMatrix};
use crate::tag::{Decision, Tag};

/// Largest message set of a desk-scale channel code, as a power of two.
pub const MAX_MESSAGE_BITS: usize = 12;

/// Everything needed to regenerate a [`ChannelCode`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelCodeDescriptor {
    pub w: StochasticMatrix,
    pub rate: f64,
    pub block_len: usize,
    pub seed: u64,
}

/// Random i.i.d. codebook at a capacity-achieving input with ML decoding.
#[derive(Debug, Clone)]
pub struct ChannelCode {
    pub descriptor: ChannelCodeDescriptor,
    /// `log2(N)/l`; differs from the requested rate when `N` is capped.
    pub effective_rate: f64,
    pub capacity: f64,
    pub input: Distribution,
    codewords: Vec<Vec<usize>>,
    /// `masks[m][x]`: bitmask of positions where codeword `m` carries `x`.
    masks: Vec<Vec<Vec<u64>>>,
}

fn words(len: usize) -> usize {
    len.div_ceil(64)
}

fn symbol_masks(seq: &[usize], alphabet: usize) -> Vec<Vec<u64>> {
    let mut masks = vec![vec![0u64; words(seq.len())]; alphabet];
    for (i, &s) in seq.iter().enumerate() {
        masks[s][i / 64] |= 1u64 << (i % 64);
    }
    masks
}

pub fn build_random_channel_code(
    w: &StochasticMatrix,
    rate: f64,
    block_len: usize,
    seed: u64,
) -> Result<ChannelCode> {
    if !(rate > 0.0) {
        return Err(out_of_range("rate", format!("{rate} must be positive")));
    }
    if block_len == 0 {
        return Err(out_of_range("block_len", "must be positive"));
    }
    let cap = blahut_arimoto(w, 1e-9, 100_000);
    if rate > cap.bits + 1e-9 {
        return Err(Error::RateAboveCapacity {
            rate,
            capacity: cap.bits,
        });
    }
    let bits = ((rate * block_len as f64 + 1e-9).floor() as usize).min(MAX_MESSAGE_BITS);
    let n_messages = 1usize << bits;
    let nx = w.in_size();
    let support = cap.input.probs().iter().filter(|&&p| p > 0.0).count() as f64;
    if (n_messages as f64).log2() > block_len as f64 * support.log2() + 1e-9 {
        return Err(out_of_range(
            "rate",
            format!("{n_messages} distinct codewords do not fit in block length {block_len}"),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = cap.input.sampler();
    let mut seen = HashSet::with_capacity(n_messages);
    let mut codewords = Vec::with_capacity(n_messages);
    while codewords.len() < n_messages {
        let cw: Vec<usize> = (0..block_len).map(|_| sampler.sample(&mut rng)).collect();
        if seen.insert(cw.clone()) {
            codewords.push(cw);
        }
    }
    let masks = codewords.iter().map(|c| symbol_masks(c, nx)).collect();
    Ok(ChannelCode {
        descriptor: ChannelCodeDescriptor {
            w: w.clone(),
            rate,
            block_len,
            seed,
        },
        effective_rate: bits as f64 / block_len as f64,
        capacity: cap.bits,
        input: cap.input,
        codewords,
        masks,
    })
}

impl ChannelCode {
    pub fn from_descriptor(d: &ChannelCodeDescriptor) -> Result<Self> {
        build_random_channel_code(&d.w, d.rate, d.block_len, d.seed)
    }

    pub fn message_count(&self) -> usize {
        self.codewords.len()
    }

    pub fn block_len(&self) -> usize {
        self.descriptor.block_len
    }

    pub fn codeword(&self, m: usize) -> &[usize] {
        &self.codewords[m]
    }

    pub fn codewords(&self) -> &[Vec<usize>] {
        &self.codewords
    }

    /// Log-likelihood of `obs` under each codeword through `channel`.
    pub fn log_likelihoods(&self, channel: &StochasticMatrix, obs: &[usize]) -> Vec<f64> {
        let nx = channel.in_size();
        let no = channel.out_size();
        let log_w: Vec<Vec<f64>> = (0..nx)
            .map(|x| (0..no).map(|o| channel.get(x, o).ln()).collect())
            .collect();
        let obs_masks = symbol_masks(obs, no);
        self.masks
            .iter()
            .map(|cm| {
                let mut score = 0.0;
                for (x, xm) in cm.iter().enumerate() {
                    for (o, om) in obs_masks.iter().enumerate() {
                        let count: u32 = xm.iter().zip(om).map(|(a, b)| (a & b).count_ones()).sum();
                        // 0·log 0 contributes nothing
                        if count > 0 {
                            score += count as f64 * log_w[x][o];
                        }
                    }
                }
                score
            })
            .collect()
    }

    /// Most likely message given `obs` through `channel`; ties go to the lowest index.
    pub fn ml_decode_with(&self, channel: &StochasticMatrix, obs: &[usize]) -> usize {
        let scores = self.log_likelihoods(channel, obs);
        let mut best = 0;
        for (m, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = m;
            }
        }
        best
    }

    /// The decoder `g`: ML through the channel the code was built for.
    pub fn decode(&self, y: &[usize]) -> usize {
        self.ml_decode_with(&self.descriptor.w, y)
    }

    /// Monte Carlo maximal error over `messages`, `trials` transmissions each.
    pub fn simulate_max_error(&self, messages: &[usize], trials: usize, seed: u64) -> f64 {
        let samplers = self.descriptor.w.samplers();
        let mut worst = 0.0f64;
        for &m in messages {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(m as u64);
            let mut errors = 0;
            for _ in 0..trials {
                let y: Vec<usize> = self.codewords[m].iter().map(|&x| samplers[x].sample(&mut rng)).collect();
                if self.decode(&y) != m {
                    errors += 1;
                }
            }
            worst = worst.max(errors as f64 / trials as f64);
        }
        worst
    }
}

/// `t = ⌈log2(n·R) / C_tag⌉` with `c_tag_proxy` in place of `C_tag`; at least 1.
pub fn tag_length_rule(n: usize, rate: f64, c_tag_proxy: f64) -> usize {
    let t = ((n as f64 * rate).log2() / c_tag_proxy).ceil();
    if t.is_finite() && t >= 1.0 {
        t as usize
    } else {
        1
    }
}

/// Default stand-in for the tag capacity in [`tag_length_rule`].
pub const DEFAULT_C_TAG_PROXY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeOutput {
    Message(usize),
    Reject,
}

/// Channel code `f(m)` followed by the tag for `m`. The decoder runs `g` on the
/// prefix and the tag decoder of `g`'s output on the suffix.
#[derive(Debug, Clone)]
pub struct TwoPhaseCode {
    pub channel_code: ChannelCode,
    pub tag: Tag,
}

impl TwoPhaseCode {
    pub fn new(channel_code: ChannelCode, tag: Tag) -> Result<Self> {
        if tag.message_count() != channel_code.message_count() {
            return Err(Error::DimensionMismatch {
                expected: channel_code.message_count(),
                actual: tag.message_count(),
            });
        }
        Ok(Self { channel_code, tag })
    }

    /// Index of the first tag symbol.
    pub fn split(&self) -> usize {
        self.channel_code.block_len()
    }

    pub fn total_len(&self) -> usize {
        self.split() + self.tag.block_len()
    }

    pub fn message_count(&self) -> usize {
        self.channel_code.message_count()
    }

    pub fn encode<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<Vec<usize>> {
        if m >= self.message_count() {
            return Err(Error::IndexOutOfRange {
                index: m,
                len: self.message_count(),
            });
        }
        let mut x = self.channel_code.codeword(m).to_vec();
        x.extend(self.tag.encode(m, rng)?);
        Ok(x)
    }

    /// Also returns the prefix decision `g(y_prefix)`.
    pub fn decode_traced(&self, y: &[usize]) -> Result<(CodeOutput, usize)> {
        if y.len() != self.total_len() {
            return Err(Error::DimensionMismatch {
                expected: self.total_len(),
                actual: y.len(),
            });
        }
        let (prefix, suffix) = y.split_at(self.split());
        let m_hat = self.channel_code.decode(prefix);
        let out = match self.tag.decode(m_hat, suffix)? {
            Decision::Accept => CodeOutput::Message(m_hat),
            Decision::Reject => CodeOutput::Reject,
        };
        Ok((out, m_hat))
    }

    pub fn decode(&self, y: &[usize]) -> Result<CodeOutput> {
        Ok(self.decode_traced(y)?.0)
    }
}
