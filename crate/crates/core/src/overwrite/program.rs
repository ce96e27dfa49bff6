//! Linear programs over memoryless adversarial strategies `Q(s|z)`.
//!
//! For an input distribution `P` and a strategy `Q`, the receiver sees
//! `out_P(y) = Σ_{x,z,s} P(x) U(z|x) Q(s|z) W(y|x,s)`, which is linear in `Q`
//! and linear in `P`. Every overwritability question reduces to how close
//! `out_P` can be pushed to the target row `W(·|x′,∅)`.

use crate::channel::{MyopicAvc, NULL_STATE};
use crate::error::{Error, Result};
use crate::math::{solve_lp, Distribution, LpProblem, LpStatus, Relation, Sense, StochasticMatrix};

/// `coef[z][s][y] = Σ_x P(x) U(z|x) W(y|x,s)`.
pub(crate) fn mixture_coefficients(avc: &MyopicAvc, p: &Distribution) -> Vec<Vec<Vec<f64>>> {
    let (nz, ns, ny) = (avc.z_size(), avc.s_size(), avc.y_size());
    let mut coef = vec![vec![vec![0.0; ny]; ns]; nz];
    for (x, &px) in p.probs().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (z, cz) in coef.iter_mut().enumerate() {
            let pu = px * avc.u().get(x, z);
            if pu == 0.0 {
                continue;
            }
            for (s, cs) in cz.iter_mut().enumerate() {
                for (y, c) in cs.iter_mut().enumerate() {
                    *c += pu * avc.w_prob(y, x, s);
                }
            }
        }
    }
    coef
}

/// Output distribution induced by input `p` and strategy `q`.
pub fn induced_output(avc: &MyopicAvc, p: &Distribution, q: &StochasticMatrix) -> Vec<f64> {
    let coef = mixture_coefficients(avc, p);
    let mut out = vec![0.0; avc.y_size()];
    for (z, cz) in coef.iter().enumerate() {
        for (s, cs) in cz.iter().enumerate() {
            let w = q.get(z, s);
            for (o, c) in out.iter_mut().zip(cs) {
                *o += w * c;
            }
        }
    }
    out
}

pub(crate) fn target_row(avc: &MyopicAvc, x_prime: usize) -> &[f64] {
    avc.w(NULL_STATE).row(x_prime).probs()
}

fn q_var(avc: &MyopicAvc, z: usize, s: usize) -> usize {
    z * avc.s_size() + s
}

fn add_row_sums(avc: &MyopicAvc, lp: &mut LpProblem) {
    for z in 0..avc.z_size() {
        lp.add_constraint(
            (0..avc.s_size()).map(|s| (q_var(avc, z, s), 1.0)).collect(),
            Relation::Eq,
            1.0,
        );
    }
}

fn extract_strategy(avc: &MyopicAvc, point: &[f64]) -> Result<StochasticMatrix> {
    let ns = avc.s_size();
    let rows = (0..avc.z_size())
        .map(|z| Distribution::from_approx(point[z * ns..(z + 1) * ns].to_vec(), 1e-8))
        .collect::<Result<Vec<_>>>()?;
    StochasticMatrix::from_rows(rows)
}

/// Optimum of a min-max TV program and the strategy attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMax {
    pub value: f64,
    pub strategy: StochasticMatrix,
}

/// `min_Q max_j TV(out_{P_j}(Q), W(·|x′,∅))` as one LP.
///
/// Variables: `Q(s|z)`, per-input slacks `t_{j,y} ≥ |out_j(y) − target(y)|`,
/// and the bound `τ ≥ ½ Σ_y t_{j,y}` shared across inputs.
pub fn min_max_tv(avc: &MyopicAvc, inputs: &[Distribution], x_prime: usize) -> Result<MinMax> {
    if inputs.is_empty() {
        return Err(Error::Lp("min-max program needs at least one input".into()));
    }
    let (nz, ns, ny) = (avc.z_size(), avc.s_size(), avc.y_size());
    let nq = nz * ns;
    let t_var = |j: usize, y: usize| nq + j * ny + y;
    let tau = nq + inputs.len() * ny;
    let mut lp = LpProblem::new(tau + 1);
    lp.set_objective_coeff(tau, 1.0);
    lp.set_sense(Sense::Minimize);
    add_row_sums(avc, &mut lp);

    let target = target_row(avc, x_prime);
    for (j, p) in inputs.iter().enumerate() {
        let coef = mixture_coefficients(avc, p);
        for (y, &ty) in target.iter().enumerate() {
            let mut mix: Vec<(usize, f64)> = Vec::with_capacity(nq + 1);
            for (z, cz) in coef.iter().enumerate() {
                for (s, cs) in cz.iter().enumerate() {
                    if cs[y] != 0.0 {
                        mix.push((q_var(avc, z, s), cs[y]));
                    }
                }
            }
            let mut le = mix.clone();
            le.push((t_var(j, y), -1.0));
            lp.add_constraint(le, Relation::Le, ty);
            let mut ge = mix;
            ge.push((t_var(j, y), 1.0));
            lp.add_constraint(ge, Relation::Ge, ty);
        }
        let mut bound: Vec<(usize, f64)> = (0..ny).map(|y| (t_var(j, y), 0.5)).collect();
        bound.push((tau, -1.0));
        lp.add_constraint(bound, Relation::Le, 0.0);
    }

    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(format!("min-max TV program returned {:?}", sol.status)));
    }
    let strategy = extract_strategy(avc, &sol.point)?;
    Ok(MinMax {
        value: sol.value.max(0.0),
        strategy,
    })
}

/// Exact overwrite feasibility: a `Q` with `out_{P_j}(Q) = W(·|x′,∅)` for every
/// input at once, or `None`.
pub fn overwrite_feasible(
    avc: &MyopicAvc,
    inputs: &[Distribution],
    x_prime: usize,
) -> Result<Option<StochasticMatrix>> {
    let mut lp = LpProblem::new(avc.z_size() * avc.s_size());
    add_row_sums(avc, &mut lp);
    let target = target_row(avc, x_prime);
    for p in inputs {
        let coef = mixture_coefficients(avc, p);
        for (y, &ty) in target.iter().enumerate() {
            let mut mix = Vec::new();
            for (z, cz) in coef.iter().enumerate() {
                for (s, cs) in cz.iter().enumerate() {
                    if cs[y] != 0.0 {
                        mix.push((q_var(avc, z, s), cs[y]));
                    }
                }
            }
            lp.add_constraint(mix, Relation::Eq, ty);
        }
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(Some(extract_strategy(avc, &sol.point)?)),
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(Error::Lp("feasibility program reported unbounded".into())),
    }
}
