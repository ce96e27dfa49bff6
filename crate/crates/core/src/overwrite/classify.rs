//! The four overwritability tiers, decided by sweeps of min-max TV programs.
//!
//! Every tier is reported as the largest optimal value over its cases, compared
//! against one classification margin:
//!
//! - U-ow: for each x′, one `Q` for all point-mass inputs.
//! - U-dist-ow: for each sampled class and x′, one `Q` for all class vertices.
//!   The overwrite condition is linear in `P` at fixed `Q`, so matching at the
//!   vertices matches on the whole class.
//! - (U,X)-dist-ow: κ(P, x′) on a grid of the simplex plus local refinement.
//! - I-ow: κ(δ_x, x′) for every pair.
//!
//! The case sets are nested (grid points include the simplex vertices and every
//! κ sample point lies in a sampled class), and TV to the target is convex in `P`
//! at fixed `Q`, so the reported values are ordered and the tiers nest.

use serde::{Deserialize, Serialize};

use super::fiber::{fiber_polytope_auto, FiberPolytope};
use super::program::{min_max_tv, MinMax};
use crate::channel::MyopicAvc;
use crate::error::{out_of_range, Error, Result};
use crate::exec::Execution;
use crate::math::net::grid_resolution;
use crate::math::prob::tv_slices;
use crate::math::{simplex_grid, Distribution, StochasticMatrix};
use crate::tolerances::Tolerances;

/// One program instance and its solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseWitness {
    /// Inputs that must all be overwritten by the same strategy.
    pub inputs: Vec<Distribution>,
    pub x_prime: usize,
    /// Optimal worst-case TV from the target row.
    pub value: f64,
    pub strategy: StochasticMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierDecision {
    pub overwritable: bool,
    /// The case with the largest optimal value.
    pub worst: CaseWitness,
    /// Every case when overwritable; empty otherwise.
    pub witnesses: Vec<CaseWitness>,
    pub cases_checked: usize,
    /// True when the tier quantifies over a continuum and was decided on samples.
    pub grid_based: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaEntry {
    pub p: Vec<f64>,
    pub x_prime: usize,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuEstimate {
    /// Largest class value over the sampled classes; a lower bound on ν.
    pub value: f64,
    pub classes: usize,
    pub worst: CaseWitness,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub grid_delta: f64,
    pub class_grid_delta: f64,
    pub tolerances: Tolerances,
    pub execution: Execution,
    /// Seeds vertex sampling for alphabets beyond exact enumeration.
    pub seed: u64,
}

impl ClassifyOptions {
    pub fn new(grid_delta: f64) -> Self {
        Self {
            grid_delta,
            class_grid_delta: grid_delta,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, d) in [
            ("grid_delta", self.grid_delta),
            ("class_grid_delta", self.class_grid_delta),
        ] {
            if !(d > 0.0 && d <= 0.2) {
                return Err(out_of_range(name, format!("{d} not in (0, 0.2]")));
            }
        }
        Ok(())
    }
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            grid_delta: 0.05,
            class_grid_delta: 0.05,
            tolerances: Tolerances::DEFAULT,
            execution: Execution::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub channel: String,
    pub u_overwritable: TierDecision,
    pub u_dist_overwritable: TierDecision,
    pub ux_dist_overwritable: TierDecision,
    pub i_overwritable: TierDecision,
    pub kappa_table: Vec<KappaEntry>,
    pub nu_estimate: f64,
    pub grid_delta: f64,
    pub class_grid_delta: f64,
    pub tolerances: Tolerances,
    pub fibers_exact: bool,
    pub warnings: Vec<String>,
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "YES"
    } else {
        "NO"
    }
}

impl ClassifierReport {
    /// `U-ow: NO, U-dist-ow: YES, (U,X)-dist-ow: YES, I-ow: YES`
    pub fn summary_line(&self) -> String {
        format!(
            "U-ow: {}, U-dist-ow: {}, (U,X)-dist-ow: {}, I-ow: {}",
            yes_no(self.u_overwritable.overwritable),
            yes_no(self.u_dist_overwritable.overwritable),
            yes_no(self.ux_dist_overwritable.overwritable),
            yes_no(self.i_overwritable.overwritable),
        )
    }

    pub fn tiers(&self) -> [(&'static str, &TierDecision); 4] {
        [
            ("U-ow", &self.u_overwritable),
            ("U-dist-ow", &self.u_dist_overwritable),
            ("(U,X)-dist-ow", &self.ux_dist_overwritable),
            ("I-ow", &self.i_overwritable),
        ]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

type Case = (Vec<Distribution>, usize);

fn solve_cases(avc: &MyopicAvc, cases: &[Case], exec: Execution) -> Result<Vec<CaseWitness>> {
    exec.try_map(cases.len(), |i| {
        let (inputs, x_prime) = &cases[i];
        let MinMax { value, strategy } = min_max_tv(avc, inputs, *x_prime)?;
        Ok(CaseWitness {
            inputs: inputs.clone(),
            x_prime: *x_prime,
            value,
            strategy,
        })
    })
}

fn worst_index(solved: &[CaseWitness]) -> usize {
    let mut best = 0;
    for (i, c) in solved.iter().enumerate() {
        if c.value > solved[best].value {
            best = i;
        }
    }
    best
}

fn decide(solved: Vec<CaseWitness>, margin: f64, grid_based: bool) -> TierDecision {
    let w = worst_index(&solved);
    let worst = solved[w].clone();
    let overwritable = worst.value <= margin;
    TierDecision {
        overwritable,
        worst,
        cases_checked: solved.len(),
        witnesses: if overwritable { solved } else { Vec::new() },
        grid_based,
        margin,
    }
}

fn point_masses(n: usize) -> Vec<Distribution> {
    (0..n).map(|x| Distribution::point_mass(n, x)).collect()
}

pub fn is_u_overwritable_with(avc: &MyopicAvc, opts: &ClassifyOptions) -> Result<TierDecision> {
    let inputs = point_masses(avc.x_size());
    let cases: Vec<Case> = (0..avc.x_size()).map(|xp| (inputs.clone(), xp)).collect();
    Ok(decide(
        solve_cases(avc, &cases, opts.execution)?,
        opts.tolerances.classification_margin,
        false,
    ))
}

pub fn is_i_overwritable_with(avc: &MyopicAvc, opts: &ClassifyOptions) -> Result<TierDecision> {
    let inputs = point_masses(avc.x_size());
    let mut cases = Vec::new();
    for x in 0..avc.x_size() {
        for xp in 0..avc.x_size() {
            cases.push((vec![inputs[x].clone()], xp));
        }
    }
    Ok(decide(
        solve_cases(avc, &cases, opts.execution)?,
        opts.tolerances.classification_margin,
        false,
    ))
}

/// Single-pair moves of up to four grid steps away from `p`.
fn refinement_points(p: &Distribution, step: f64) -> Vec<Distribution> {
    let d = p.len();
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            for k in 1..=4 {
                let moved = (k as f64 * step).min(p.get(j));
                if moved <= 0.0 {
                    break;
                }
                let mut q = p.probs().to_vec();
                q[j] -= moved;
                q[i] += moved;
                if let Ok(q) = Distribution::from_approx(q, 1e-12) {
                    out.push(q);
                }
                if moved < k as f64 * step {
                    break;
                }
            }
        }
    }
    out
}

fn grid_points(d: usize, delta: f64) -> (Vec<Distribution>, f64) {
    let m = grid_resolution(d, delta);
    let points = simplex_grid(d, m)
        .into_iter()
        .map(|g| Distribution::from_approx(g, 1e-12).expect("grid points lie on the simplex"))
        .collect();
    (points, 1.0 / (4 * m) as f64)
}

struct KappaSweep {
    solved: Vec<CaseWitness>,
}

impl KappaSweep {
    fn points(&self) -> Vec<Distribution> {
        let mut pts: Vec<Distribution> = Vec::new();
        for c in &self.solved {
            if c.x_prime == 0 {
                pts.push(c.inputs[0].clone());
            }
        }
        pts
    }

    fn table(&self) -> Vec<KappaEntry> {
        self.solved
            .iter()
            .map(|c| KappaEntry {
                p: c.inputs[0].probs().to_vec(),
                x_prime: c.x_prime,
                kappa: c.value,
            })
            .collect()
    }
}

fn kappa_sweep(avc: &MyopicAvc, opts: &ClassifyOptions) -> Result<KappaSweep> {
    let nx = avc.x_size();
    let (points, step) = grid_points(nx, opts.grid_delta);
    let cases_for = |pts: &[Distribution]| -> Vec<Case> {
        pts.iter()
            .flat_map(|p| (0..nx).map(move |xp| (vec![p.clone()], xp)))
            .collect()
    };
    let mut solved = solve_cases(avc, &cases_for(&points), opts.execution)?;
    let worst = solved[worst_index(&solved)].inputs[0].clone();
    let extra = refinement_points(&worst, step);
    solved.extend(solve_cases(avc, &cases_for(&extra), opts.execution)?);
    Ok(KappaSweep { solved })
}

pub fn is_ux_dist_overwritable_with(avc: &MyopicAvc, opts: &ClassifyOptions) -> Result<TierDecision> {
    opts.validate()?;
    let sweep = kappa_sweep(avc, opts)?;
    Ok(decide(sweep.solved, opts.tolerances.classification_margin, true))
}

struct ClassSweep {
    solved: Vec<CaseWitness>,
    classes: usize,
    exact: bool,
}

fn class_sweep(avc: &MyopicAvc, seed_points: &[Distribution], opts: &ClassifyOptions) -> Result<ClassSweep> {
    let nx = avc.x_size();
    let (grid, step) = grid_points(nx, opts.class_grid_delta);
    let mut fibers: Vec<FiberPolytope> = Vec::new();
    let mut exact = true;

    let mut add_classes = |reps: &[Distribution], fibers: &mut Vec<FiberPolytope>| -> Result<Vec<usize>> {
        let mut new = Vec::new();
        for p in reps {
            let image = crate::math::push_forward(p, avc.u())?;
            if fibers
                .iter()
                .any(|f| tv_slices(f.image.probs(), image.probs()) <= 1e-9)
            {
                continue;
            }
            let f = fiber_polytope_auto(p, avc, opts.seed)?;
            exact &= f.exact;
            new.push(fibers.len());
            fibers.push(f);
        }
        Ok(new)
    };

    let mut reps = seed_points.to_vec();
    reps.extend(grid);
    let first = add_classes(&reps, &mut fibers)?;
    let cases_for = |idx: &[usize], fibers: &[FiberPolytope]| -> Vec<Case> {
        idx.iter()
            .flat_map(|&i| (0..nx).map(move |xp| (fibers[i].vertices.clone(), xp)))
            .collect()
    };
    let mut solved = solve_cases(avc, &cases_for(&first, &fibers), opts.execution)?;

    let w = worst_index(&solved);
    let worst_class = fibers
        .iter()
        .position(|f| f.vertices == solved[w].inputs)
        .expect("solved case comes from a class");
    let extra = refinement_points(&fibers[worst_class].representative, step);
    let more = add_classes(&extra, &mut fibers)?;
    solved.extend(solve_cases(avc, &cases_for(&more, &fibers), opts.execution)?);
    Ok(ClassSweep {
        solved,
        classes: fibers.len(),
        exact,
    })
}

pub fn is_u_dist_overwritable_with(avc: &MyopicAvc, opts: &ClassifyOptions) -> Result<TierDecision> {
    opts.validate()?;
    let sweep = kappa_sweep(avc, opts)?;
    let classes = class_sweep(avc, &sweep.points(), opts)?;
    Ok(decide(classes.solved, opts.tolerances.classification_margin, true))
}

fn nu_from(classes: ClassSweep, margin: f64) -> NuEstimate {
    let w = worst_index(&classes.solved);
    let worst = classes.solved[w].clone();
    if worst.value <= margin {
        NuEstimate {
            value: 0.0,
            classes: classes.classes,
            worst,
            warning: Some("channel is U-distribution overwritable on the sampled classes".into()),
        }
    } else {
        NuEstimate {
            value: worst.value,
            classes: classes.classes,
            worst,
            warning: None,
        }
    }
}

pub fn nu_estimate_with(avc: &MyopicAvc, opts: &ClassifyOptions) -> Result<NuEstimate> {
    opts.validate()?;
    let sweep = kappa_sweep(avc, opts)?;
    let classes = class_sweep(avc, &sweep.points(), opts)?;
    Ok(nu_from(classes, opts.tolerances.classification_margin))
}

pub fn classify_with(avc: &MyopicAvc, opts: &ClassifyOptions) -> Result<ClassifierReport> {
    opts.validate()?;
    let margin = opts.tolerances.classification_margin;
    let u = is_u_overwritable_with(avc, opts)?;
    let i = is_i_overwritable_with(avc, opts)?;
    let sweep = kappa_sweep(avc, opts)?;
    let classes = class_sweep(avc, &sweep.points(), opts)?;
    let fibers_exact = classes.exact;
    let kappa_table = sweep.table();
    let ux = decide(sweep.solved, margin, true);
    let class_solved = classes.solved.clone();
    let nu = nu_from(classes, margin);
    let ud = decide(class_solved, margin, true);

    let chain = [
        ("U-ow", &u),
        ("U-dist-ow", &ud),
        ("(U,X)-dist-ow", &ux),
        ("I-ow", &i),
    ];
    for pair in chain.windows(2) {
        let ((a, ta), (b, tb)) = (pair[0], pair[1]);
        if ta.overwritable && !tb.overwritable {
            return Err(Error::NestingViolated(format!(
                "{a} holds (worst {:.3e}) but {b} fails (worst {:.3e})",
                ta.worst.value, tb.worst.value
            )));
        }
    }

    let mut warnings = Vec::new();
    if !fibers_exact {
        warnings.push("class vertices were sampled, not enumerated".to_string());
    }
    warnings.extend(nu.warning.clone());
    Ok(ClassifierReport {
        channel: avc.name.clone(),
        u_overwritable: u,
        u_dist_overwritable: ud,
        ux_dist_overwritable: ux,
        i_overwritable: i,
        kappa_table,
        nu_estimate: nu.value,
        grid_delta: opts.grid_delta,
        class_grid_delta: opts.class_grid_delta,
        tolerances: opts.tolerances,
        fibers_exact,
        warnings,
    })
}

pub fn is_u_overwritable(avc: &MyopicAvc) -> Result<TierDecision> {
    is_u_overwritable_with(avc, &ClassifyOptions::default())
}

pub fn is_i_overwritable(avc: &MyopicAvc) -> Result<TierDecision> {
    is_i_overwritable_with(avc, &ClassifyOptions::default())
}

pub fn is_ux_dist_overwritable(avc: &MyopicAvc, grid_delta: f64) -> Result<TierDecision> {
    is_ux_dist_overwritable_with(avc, &ClassifyOptions::new(grid_delta))
}

pub fn is_u_dist_overwritable(avc: &MyopicAvc, class_grid_delta: f64) -> Result<TierDecision> {
    is_u_dist_overwritable_with(avc, &ClassifyOptions::new(class_grid_delta))
}

pub fn nu_estimate(avc: &MyopicAvc, grid_delta: f64) -> Result<NuEstimate> {
    nu_estimate_with(avc, &ClassifyOptions::new(grid_delta))
}

pub fn classify(avc: &MyopicAvc, grid_delta: f64) -> Result<ClassifierReport> {
    classify_with(avc, &ClassifyOptions::new(grid_delta))
}
