//! Regenerates the two worked examples of the r-overwritable BSC/BEC family:
//! tier classification against the stated outcomes, κ over the input simplex,
//! and a missed-detection decay sweep.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{make_r_ow_bsc_bec, save_channel, MyopicAvc};
use crate::error::Result;
use crate::exec::Execution;
use crate::math::{simplex_grid, Distribution};
use crate::overwrite::{classify_with, kappa, ClassifierReport, ClassifyOptions};
use crate::sim::experiment::{
    run_experiment_config, write_outputs, ChannelSource, ExperimentConfig, StrategyConfig, TagConfig, TagKind,
};

pub const EXAMPLE_P: f64 = 0.1;
pub const EXAMPLE_R: f64 = 0.3;
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_TRIALS: usize = 20_000;
/// κ heat-map resolution: `P(X=1)` in steps of `1/KAPPA_STEPS`.
pub const KAPPA_STEPS: usize = 100;

/// One worked example and the tier outcomes it states; `None` where it is silent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example {
    pub name: &'static str,
    pub u: f64,
    /// U-ow, U-dist-ow, (U,X)-dist-ow, I-ow.
    pub claims: [Option<bool>; 4],
}

pub const EXAMPLES: [Example; 2] = [
    Example {
        name: "example1",
        u: 0.5,
        claims: [Some(false), Some(true), Some(true), Some(true)],
    },
    Example {
        name: "example2",
        u: 1.0,
        claims: [None, Some(false), Some(true), None],
    },
];

impl Example {
    pub fn channel(&self) -> Result<MyopicAvc> {
        Ok(make_r_ow_bsc_bec(EXAMPLE_P, EXAMPLE_R, self.u)?.with_name(self.name))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub example: String,
    pub p: f64,
    pub r: f64,
    pub u: f64,
    pub tier: String,
    pub computed: String,
    pub claim: String,
    pub matches: String,
    pub worst_value: f64,
    pub margin: f64,
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

pub fn classification_rows(example: &Example, report: &ClassifierReport) -> Vec<ClassificationRow> {
    report
        .tiers()
        .iter()
        .zip(example.claims)
        .map(|((tier, d), claim)| ClassificationRow {
            example: example.name.to_string(),
            p: EXAMPLE_P,
            r: EXAMPLE_R,
            u: example.u,
            tier: tier.to_string(),
            computed: yes_no(d.overwritable),
            claim: claim.map(yes_no).unwrap_or_default(),
            matches: match claim {
                Some(c) => yes_no(c == d.overwritable),
                None => String::new(),
            },
            worst_value: d.worst.value,
            margin: d.margin,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaRow {
    pub p0: f64,
    pub p1: f64,
    pub x_prime: usize,
    pub kappa: f64,
}

/// κ(P, x′) over the binary input simplex for every `x′`.
pub fn kappa_heat_map(avc: &MyopicAvc, steps: usize, execution: Execution) -> Result<Vec<KappaRow>> {
    let grid = simplex_grid(avc.x_size(), steps);
    let cases: Vec<(Vec<f64>, usize)> = grid
        .iter()
        .flat_map(|p| (0..avc.x_size()).map(move |xp| (p.clone(), xp)))
        .collect();
    execution.try_map(cases.len(), |i| {
        let (p, xp) = &cases[i];
        let d = Distribution::from_approx(p.clone(), 1e-9)?;
        let k = kappa(&d, *xp, avc)?;
        Ok(KappaRow {
            p0: p[0],
            p1: p.get(1).copied().unwrap_or(0.0),
            x_prime: *xp,
            kappa: k.value,
        })
    })
}

/// The decay sweep: memoryless best response against tags for `x′ = 0` at
/// uniform input on the second example, worst-overlap pair at each length.
pub fn decay_config(seed: u64, trials: usize, execution: Execution) -> ExperimentConfig {
    ExperimentConfig {
        name: "example2_decay".to_string(),
        seed,
        trials,
        execution,
        channel: ChannelSource::ROwBscBec {
            p: EXAMPLE_P,
            r: EXAMPLE_R,
            u: 1.0,
        },
        tag: Some(TagConfig {
            kind: TagKind::Simple,
            n_values: vec![50, 100, 200, 400],
            alpha: 0.2,
            beta: 0.2,
            mu: 0.2,
            rho: Some(0.05),
            sets: 8,
            x_prime: 0,
            p_x: None,
            family_seed: 1,
            max_retries: 10,
            m: 0,
            m_hat: 1,
            worst_pair: true,
            sub_blocks: None,
            delta: None,
        }),
        code: None,
        strategies: vec![StrategyConfig::BestMemoryless {
            search_trials: 2000,
            grid_steps: 4,
            max_sweeps: 3,
        }],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReproduceOptions {
    pub grid_delta: f64,
    pub seed: u64,
    pub trials: usize,
    pub execution: Execution,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self {
            grid_delta: ClassifyOptions::default().grid_delta,
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReproduceReport {
    pub classification: Vec<ClassificationRow>,
    pub reports: Vec<ClassifierReport>,
    /// Every stated tier outcome was reproduced.
    pub all_match: bool,
    pub files: Vec<PathBuf>,
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn reproduce_examples(out_dir: &Path, opts: &ReproduceOptions) -> Result<ReproduceReport> {
    fs::create_dir_all(out_dir.join("channels"))?;
    let mut files = Vec::new();
    let mut classification = Vec::new();
    let mut reports = Vec::new();
    let copts = ClassifyOptions {
        execution: opts.execution,
        ..ClassifyOptions::new(opts.grid_delta)
    };
    for ex in &EXAMPLES {
        let avc = ex.channel()?;
        let path = out_dir.join("channels").join(format!("{}.toml", ex.name));
        save_channel(&avc, &path)?;
        files.push(path);

        let report = classify_with(&avc, &copts)?;
        classification.extend(classification_rows(ex, &report));
        reports.push(report);

        let heat = kappa_heat_map(&avc, KAPPA_STEPS, opts.execution)?;
        let path = out_dir.join(format!("kappa_{}.csv", ex.name));
        write_csv(&path, &heat)?;
        files.push(path);
    }
    let path = out_dir.join("classification.csv");
    write_csv(&path, &classification)?;
    files.push(path);

    let decay = run_experiment_config(&decay_config(opts.seed, opts.trials, opts.execution), out_dir)?;
    files.extend(write_outputs(&decay, &out_dir.join("decay_example2"))?);

    let all_match = classification.iter().all(|r| r.matches != "no");
    Ok(ReproduceReport {
        classification,
        reports,
        all_match,
        files,
    })
}
