//! Config-driven experiment runs. A config names a channel, a tag or two-phase
//! code, an `n` sweep and a list of adversaries; every cell is estimated from
//! the master seed alone, so reruns produce identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::decay::{decay_fit, DecayEstimate, MIN_DECAY_POINTS};
use super::estimate::{estimate_code_errors, estimate_tag_errors, sample_messages, ErrorEstimate, DEFAULT_MESSAGE_SAMPLE};
use crate::adversary::{best_memoryless_response, AdversaryStrategy, ForgeryTarget, SearchConfig};
use crate::channel::{load_channel, make_r_ow_bsc_bec, MyopicAvc};
use crate::code::{build_random_channel_code, tag_length_rule, TwoPhaseCode, DEFAULT_C_TAG_PROXY};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::math::{Distribution, StochasticMatrix};
use crate::overwrite::{fiber_polytope_auto, is_u_overwritable};
use crate::tag::{build_mixture_tag, build_set_family_with, FamilyParams, MixtureParams, PairwiseRule, Tag, TagScheme};
use crate::tolerances::Tolerances;

fn config_err(field: impl Into<String>, detail: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSource {
    /// A channel file; relative paths resolve against the config's directory.
    File { path: PathBuf },
    /// The r-overwritable BSC(p)/BEC(u) family.
    ROwBscBec { p: f64, r: f64, u: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TagKind {
    #[default]
    Simple,
    Mixture,
}

fn default_retries() -> usize {
    10
}

fn default_m_hat() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagConfig {
    #[serde(default)]
    pub kind: TagKind,
    /// Tag block lengths to sweep (sub-block length for mixture tags).
    pub n_values: Vec<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    /// `μ/4` when absent.
    pub rho: Option<f64>,
    pub sets: usize,
    #[serde(default)]
    pub x_prime: usize,
    /// Uniform when absent.
    pub p_x: Option<Vec<f64>>,
    #[serde(default)]
    pub family_seed: u64,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
    /// Sent message.
    #[serde(default)]
    pub m: usize,
    /// Decoded candidate; equal to `m` for false alarm.
    #[serde(default = "default_m_hat")]
    pub m_hat: usize,
    /// Replace `m`, `m_hat` by the family's largest-overlap pair at each `n`.
    #[serde(default)]
    pub worst_pair: bool,
    /// Mixture only.
    pub sub_blocks: Option<usize>,
    /// Mixture only: net radius.
    pub delta: Option<f64>,
}

fn default_messages() -> usize {
    DEFAULT_MESSAGE_SAMPLE
}

fn default_proxy() -> f64 {
    DEFAULT_C_TAG_PROXY
}

fn default_code_alpha() -> f64 {
    0.5
}

fn default_code_beta() -> f64 {
    0.1
}

fn default_code_mu() -> f64 {
    0.8
}

fn default_code_rho() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    pub rate: f64,
    pub block_len: usize,
    #[serde(default)]
    pub code_seed: u64,
    #[serde(default = "default_proxy")]
    pub c_tag_proxy: f64,
    /// Fixed point of the length rule over the total length when absent.
    pub tag_len: Option<usize>,
    #[serde(default = "default_code_alpha")]
    pub alpha: f64,
    #[serde(default = "default_code_beta")]
    pub beta: f64,
    #[serde(default = "default_code_mu")]
    pub mu: f64,
    #[serde(default = "default_code_rho")]
    pub rho: f64,
    #[serde(default)]
    pub x_prime: usize,
    pub p_x: Option<Vec<f64>>,
    #[serde(default)]
    pub family_seed: u64,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
    /// Size of the sampled message subset for maximal error.
    #[serde(default = "default_messages")]
    pub messages: usize,
}

fn default_search_trials() -> usize {
    300
}

fn default_grid_steps() -> usize {
    4
}

fn default_sweeps() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategyConfig {
    Absent,
    Memoryless {
        q: Vec<Vec<f64>>,
    },
    /// The classifier's U-overwrite witness toward the tag's `x′`.
    OverwriteWitness,
    /// Coordinate-ascent memoryless response, searched on a separate seed.
    BestMemoryless {
        #[serde(default = "default_search_trials")]
        search_trials: usize,
        #[serde(default = "default_grid_steps")]
        grid_steps: usize,
        #[serde(default = "default_sweeps")]
        max_sweeps: usize,
    },
    TwoPhaseForger {
        #[serde(default)]
        target: ForgeryTarget,
    },
}

impl StrategyConfig {
    pub fn label(&self) -> &'static str {
        match self {
            StrategyConfig::Absent => "absent",
            StrategyConfig::Memoryless { .. } => "memoryless",
            StrategyConfig::OverwriteWitness => "overwrite_witness",
            StrategyConfig::BestMemoryless { .. } => "best_memoryless",
            StrategyConfig::TwoPhaseForger { .. } => "two_phase_forger",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    /// Trials per cell (per message for codes).
    pub trials: usize,
    #[serde(default)]
    pub execution: Execution,
    pub channel: ChannelSource,
    pub tag: Option<TagConfig>,
    pub code: Option<CodeConfig>,
    pub strategies: Vec<StrategyConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err("toml", e.to_string().trim_end()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err("toml", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(config_err("trials", "must be positive"));
        }
        if self.strategies.is_empty() {
            return Err(config_err("strategies", "at least one strategy is required"));
        }
        match (&self.tag, &self.code) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(config_err("tag/code", "exactly one of [tag] and [code] must be given"))
            }
            (Some(t), None) => {
                if self.trials < super::estimate::MIN_TAG_TRIALS {
                    return Err(config_err("trials", format!("tag experiments need at least {}", super::estimate::MIN_TAG_TRIALS)));
                }
                if t.n_values.is_empty() || t.n_values.contains(&0) {
                    return Err(config_err("tag.n_values", "must be a non-empty list of positive lengths"));
                }
                if t.sets < 2 {
                    return Err(config_err("tag.sets", "at least two sets are required"));
                }
                if !t.worst_pair && (t.m >= t.sets || t.m_hat >= t.sets) {
                    return Err(config_err("tag.m", "m and m_hat must be below tag.sets"));
                }
                for (name, v) in [("tag.alpha", t.alpha), ("tag.beta", t.beta)] {
                    if !(v > 0.0 && v < 1.0) {
                        return Err(config_err(name, format!("{v} not in (0,1)")));
                    }
                }
                if t.kind == TagKind::Mixture && (t.sub_blocks.is_none() || t.delta.is_none()) {
                    return Err(config_err("tag.sub_blocks", "mixture tags need sub_blocks and delta"));
                }
                if t.kind == TagKind::Simple && (t.sub_blocks.is_some() || t.delta.is_some()) {
                    return Err(config_err("tag.kind", "sub_blocks and delta apply to mixture tags only"));
                }
            }
            (None, Some(c)) => {
                if c.messages == 0 {
                    return Err(config_err("code.messages", "must be positive"));
                }
                if c.block_len == 0 {
                    return Err(config_err("code.block_len", "must be positive"));
                }
                if !(c.c_tag_proxy > 0.0) {
                    return Err(config_err("code.c_tag_proxy", "must be positive"));
                }
            }
        }
        for (i, s) in self.strategies.iter().enumerate() {
            match s {
                StrategyConfig::TwoPhaseForger { .. } if self.code.is_none() => {
                    return Err(config_err(format!("strategies[{i}]"), "two_phase_forger needs a [code] experiment"))
                }
                StrategyConfig::BestMemoryless { search_trials, .. } if *search_trials == 0 => {
                    return Err(config_err(format!("strategies[{i}].search_trials"), "must be positive"))
                }
                StrategyConfig::BestMemoryless { .. } | StrategyConfig::OverwriteWitness if self.tag.is_none() => {
                    return Err(config_err(format!("strategies[{i}]"), "only available for [tag] experiments"))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub cell_id: String,
    pub quantity: String,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: u64,
    pub seed: u64,
}

impl ResultRow {
    fn new(cell_id: &str, e: &ErrorEstimate, seed: u64) -> Self {
        Self {
            cell_id: cell_id.to_string(),
            quantity: e.quantity.label().to_string(),
            estimate: e.estimate,
            ci_lo: e.ci_lo,
            ci_hi: e.ci_hi,
            trials: e.trials,
            seed,
        }
    }
}

/// One line of `decay.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub strategy: String,
    pub n_values: String,
    pub gamma: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellInfo {
    pub cell_id: String,
    pub strategy: String,
    pub n: usize,
    pub m: Option<usize>,
    pub m_hat: Option<usize>,
    pub family_retries: usize,
    /// Memoryless strategy actually used, if any.
    pub q: Option<Vec<Vec<f64>>>,
    /// Acceptance frequency seen during the best-response search.
    pub search_acceptance: Option<f64>,
    pub messages: Option<Vec<usize>>,
    pub structural_violations: Option<u64>,
    pub decomposition_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub crate_version: String,
    pub config: ExperimentConfig,
    pub channel: String,
    pub tolerances: Tolerances,
    pub cells: Vec<CellInfo>,
    pub decay: Vec<DecayEstimate>,
    pub results_sha256: String,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub decay: Vec<DecayRow>,
    pub manifest: Manifest,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path.as_ref())?;
    ExperimentConfig::from_toml(&text)
}

fn resolve_channel(src: &ChannelSource, base_dir: &Path) -> Result<MyopicAvc> {
    match src {
        ChannelSource::File { path } => load_channel(base_dir.join(path)),
        ChannelSource::ROwBscBec { p, r, u } => make_r_ow_bsc_bec(*p, *r, *u),
    }
}

fn input_distribution(p_x: &Option<Vec<f64>>, size: usize, field: &str) -> Result<Distribution> {
    match p_x {
        None => Ok(Distribution::uniform(size)),
        Some(v) => Distribution::new(v.clone()).map_err(|e| config_err(field, e.to_string())),
    }
}

fn build_tag(avc: &MyopicAvc, t: &TagConfig, n: usize) -> Result<Tag> {
    let p_x = input_distribution(&t.p_x, avc.x_size(), "tag.p_x")?;
    match t.kind {
        TagKind::Simple => {
            let mut fp = FamilyParams::new(n, t.alpha, t.beta, t.sets, t.family_seed);
            fp.max_retries = t.max_retries;
            let family = build_set_family_with(&fp)?;
            Ok(TagScheme::new(avc, p_x, t.x_prime, family, t.mu, t.rho)?.into())
        }
        TagKind::Mixture => {
            let fiber = fiber_polytope_auto(&p_x, avc, t.family_seed)?;
            let params = MixtureParams {
                mu: t.mu,
                rho: t.rho,
                delta: t.delta.unwrap_or(0.25),
                n,
                sub_blocks: t.sub_blocks.unwrap_or(1),
                alpha: t.alpha,
                beta: t.beta,
                target_count: t.sets,
                seed: t.family_seed,
                max_retries: t.max_retries,
            };
            Ok(build_mixture_tag(avc, &fiber, t.x_prime, &params)?.into())
        }
    }
}

fn strategy_matrix(avc: &MyopicAvc, q: &[Vec<f64>], field: String) -> Result<StochasticMatrix> {
    let q = StochasticMatrix::new(q.to_vec()).map_err(|e| config_err(field.clone(), e.to_string()))?;
    if q.in_size() != avc.z_size() || q.out_size() != avc.s_size() {
        return Err(config_err(
            field,
            format!("expected a {}×{} matrix (z by s)", avc.z_size(), avc.s_size()),
        ));
    }
    Ok(q)
}

/// Seed for the best-response search of cell `cell`; never the evaluation seed.
fn search_seed(seed: u64, cell: usize) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(cell as u64 + 1)
}

/// Runs every cell of `cfg`; `base_dir` resolves relative channel paths.
pub fn run_experiment_config(cfg: &ExperimentConfig, base_dir: &Path) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let avc = resolve_channel(&cfg.channel, base_dir)?;
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    let mut decay = Vec::new();
    let mut decay_rows = Vec::new();

    if let Some(t) = &cfg.tag {
        let tags: Vec<Tag> = t.n_values.iter().map(|&n| build_tag(&avc, t, n)).collect::<Result<_>>()?;
        for (si, s) in cfg.strategies.iter().enumerate() {
            let mut estimates = Vec::new();
            for (ni, (&n, tag)) in t.n_values.iter().zip(&tags).enumerate() {
                let (m, m_hat) = if t.worst_pair {
                    let (a, b, _) = tag.base().family.max_overlap_pair().expect("at least two sets");
                    (a, b)
                } else {
                    (t.m, t.m_hat)
                };
                let cell_id = format!("{}[{si}]/n={n}", s.label());
                let (strategy, search_acceptance) = match s {
                    StrategyConfig::Absent => (AdversaryStrategy::Absent, None),
                    StrategyConfig::Memoryless { q } => (
                        AdversaryStrategy::Memoryless {
                            q: strategy_matrix(&avc, q, format!("strategies[{si}].q"))?,
                        },
                        None,
                    ),
                    StrategyConfig::OverwriteWitness => {
                        let tier = is_u_overwritable(&avc)?;
                        (AdversaryStrategy::from_witness(&tier, t.x_prime)?, None)
                    }
                    StrategyConfig::BestMemoryless {
                        search_trials,
                        grid_steps,
                        max_sweeps,
                    } => {
                        let search = SearchConfig {
                            trials: *search_trials,
                            seed: search_seed(cfg.seed, si * t.n_values.len() + ni),
                            grid_steps: *grid_steps,
                            max_sweeps: *max_sweeps,
                            start: None,
                        };
                        let best = best_memoryless_response(&avc, tag, m, m_hat, &search)?;
                        (AdversaryStrategy::Memoryless { q: best.q }, Some(best.acceptance))
                    }
                    StrategyConfig::TwoPhaseForger { .. } => unreachable!("rejected by validation"),
                };
                let est = estimate_tag_errors(tag, &avc, &strategy, m, m_hat, cfg.trials, cfg.seed, cfg.execution)?;
                rows.push(ResultRow::new(&cell_id, &est.estimate, cfg.seed));
                estimates.push(est.estimate.positive_value());
                let q = match &strategy {
                    AdversaryStrategy::Memoryless { q } | AdversaryStrategy::OverwriteWitness { q, .. } => Some(q.to_nested()),
                    _ => None,
                };
                cells.push(CellInfo {
                    cell_id,
                    strategy: s.label().to_string(),
                    n,
                    m: Some(m),
                    m_hat: Some(m_hat),
                    family_retries: tag.base().family.retries,
                    q,
                    search_acceptance,
                    messages: None,
                    structural_violations: None,
                    decomposition_holds: None,
                });
            }
            if t.n_values.len() >= MIN_DECAY_POINTS {
                let fit = decay_fit(&t.n_values, &estimates)?;
                decay_rows.push(DecayRow {
                    strategy: format!("{}[{si}]", s.label()),
                    n_values: t.n_values.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(";"),
                    gamma: fit.gamma,
                    intercept: fit.intercept,
                    r_squared: fit.r_squared,
                    degenerate: fit.degenerate,
                });
                decay.push(fit);
            }
        }
    }

    if let Some(c) = &cfg.code {
        let code = build_two_phase(&avc, c)?;
        let messages = sample_messages(code.message_count(), c.messages, cfg.seed);
        let n = code.total_len();
        for (si, s) in cfg.strategies.iter().enumerate() {
            let cell_id = format!("{}[{si}]/n={n}", s.label());
            let strategy = match s {
                StrategyConfig::Absent => AdversaryStrategy::Absent,
                StrategyConfig::Memoryless { q } => AdversaryStrategy::Memoryless {
                    q: strategy_matrix(&avc, q, format!("strategies[{si}].q"))?,
                },
                StrategyConfig::TwoPhaseForger { target } => AdversaryStrategy::TwoPhaseForger { target: *target },
                _ => unreachable!("rejected by validation"),
            };
            let est = estimate_code_errors(&code, &avc, &strategy, &messages, cfg.trials, cfg.seed, cfg.execution)?;
            for e in [&est.primary, &est.prefix_error, &est.paired_missed_detection] {
                rows.push(ResultRow::new(&cell_id, e, cfg.seed));
            }
            cells.push(CellInfo {
                cell_id,
                strategy: s.label().to_string(),
                n,
                m: None,
                m_hat: None,
                family_retries: code.tag.base().family.retries,
                q: match &strategy {
                    AdversaryStrategy::Memoryless { q } => Some(q.to_nested()),
                    _ => None,
                },
                search_acceptance: None,
                messages: Some(messages.clone()),
                structural_violations: Some(est.structural_violations),
                decomposition_holds: Some(est.decomposition.holds),
            });
        }
    }

    let csv = rows_to_csv(&rows)?;
    let manifest = Manifest {
        name: cfg.name.clone(),
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        channel: avc.name.clone(),
        tolerances: Tolerances::DEFAULT,
        cells,
        decay,
        results_sha256: Sha256::digest(csv.as_bytes()).iter().map(|b| format!("{b:02x}")).collect(),
        note: "attack results are lower bounds on what an unrestricted adversary achieves".to_string(),
    };
    Ok(ExperimentOutput {
        rows,
        decay: decay_rows,
        manifest,
    })
}

/// Tag length: the fixed point of the length rule applied to the total length.
pub fn two_phase_tag_len(block_len: usize, rate: f64, proxy: f64) -> usize {
    let mut t = tag_length_rule(block_len, rate, proxy);
    for _ in 0..64 {
        let next = tag_length_rule(block_len + t, rate, proxy);
        if next == t {
            break;
        }
        t = next;
    }
    t
}

/// Payload code on `W[∅]` followed by a simple tag with a size-only family.
pub fn build_two_phase(avc: &MyopicAvc, c: &CodeConfig) -> Result<TwoPhaseCode> {
    let cc = build_random_channel_code(avc.no_adversary(), c.rate, c.block_len, c.code_seed)?;
    let t = c.tag_len.unwrap_or_else(|| two_phase_tag_len(c.block_len, c.rate, c.c_tag_proxy));
    let mut fp = FamilyParams::new(t, c.alpha, c.beta, cc.message_count(), c.family_seed);
    fp.max_retries = c.max_retries;
    fp.pairwise = PairwiseRule::SizeOnly;
    let family = build_set_family_with(&fp)?;
    let p_x = input_distribution(&c.p_x, avc.x_size(), "code.p_x")?;
    let tag = TagScheme::new(avc, p_x, c.x_prime, family, c.mu, Some(c.rho))?;
    TwoPhaseCode::new(cc, tag.into())
}

pub fn rows_to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn decay_to_csv(rows: &[DecayRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `results.csv`, `manifest.json` and, for sweeps of at least four
/// lengths, `decay.csv` into `out_dir`.
pub fn write_outputs(out: &ExperimentOutput, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let results = out_dir.join("results.csv");
    fs::write(&results, rows_to_csv(&out.rows)?)?;
    written.push(results);
    let manifest = out_dir.join("manifest.json");
    fs::write(&manifest, serde_json::to_string_pretty(&out.manifest)? + "\n")?;
    written.push(manifest);
    if !out.decay.is_empty() {
        let decay = out_dir.join("decay.csv");
        fs::write(&decay, decay_to_csv(&out.decay)?)?;
        written.push(decay);
    }
    Ok(written)
}

/// Loads, runs and writes an experiment.
pub fn run_experiment(config_path: impl AsRef<Path>, out_dir: impl AsRef<Path>) -> Result<ExperimentOutput> {
    let path = config_path.as_ref();
    let cfg = load_config(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let out = run_experiment_config(&cfg, base)?;
    write_outputs(&out, out_dir.as_ref())?;
    Ok(out)
}
