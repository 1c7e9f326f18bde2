use rayon::prelude::*;

use super::mdp::{CompositionMdp, MdpStateId};
use super::StochasticError;
use crate::num::{compensated_sum, Scalar};

/// States per sweep above which Bellman updates run in parallel.
const PARALLEL_THRESHOLD: usize = 2048;

#[derive(Clone, Debug)]
pub struct SolverOptions<T> {
    /// Convergence threshold on the max-norm residual, and the slack for
    /// optimal-action membership and greedy ties.
    pub tolerance: T,
    pub max_iterations: usize,
    /// Any expected cost above this signals an improper policy.
    pub divergence_cap: T,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            tolerance: T::default_tolerance(),
            max_iterations: 1_000_000,
            divergence_cap: T::from_f64_lossy(1e12),
        }
    }
}

/// Jacobi sweep: every new value reads only the previous vector.
fn sweep<T: Scalar>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    if n >= PARALLEL_THRESHOLD {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

fn max_residual<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
}

/// States from which some path reaches a target state.
pub fn can_reach_target<T>(mdp: &CompositionMdp<T>) -> Vec<bool> {
    let n = mdp.num_states();
    let mut preds = vec![Vec::new(); n];
    for s in 0..n {
        for a in mdp.actions(s) {
            for &(_, t, _) in &a.outcomes {
                preds[t].push(s);
            }
        }
    }
    let mut reach = mdp.targets().to_vec();
    let mut stack: Vec<MdpStateId> = (0..n).filter(|&s| reach[s]).collect();
    while let Some(t) = stack.pop() {
        for &s in &preds[t] {
            if !reach[s] {
                reach[s] = true;
                stack.push(s);
            }
        }
    }
    reach
}

/// States from which some policy reaches a target with probability 1:
/// the greatest `U` such that every state of `U` reaches a target inside `U`
/// using only actions whose whole support stays in `U`.
pub fn almost_sure_region<T>(mdp: &CompositionMdp<T>) -> Vec<bool> {
    let n = mdp.num_states();
    let mut region = can_reach_target(mdp);
    loop {
        let mut reach = mdp.targets().to_vec();
        loop {
            let mut changed = false;
            for s in 0..n {
                if reach[s] || !region[s] {
                    continue;
                }
                let ok = mdp.actions(s).iter().any(|a| {
                    a.outcomes.iter().all(|o| region[o.1]) && a.outcomes.iter().any(|o| reach[o.1])
                });
                if ok {
                    reach[s] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if reach == region {
            return region;
        }
        region = reach;
    }
}

/// `Σ P′(s′|s,a)·v(s′)` for action `a` of `s`.
fn expectation<T: Scalar>(mdp: &CompositionMdp<T>, s: MdpStateId, a: usize, v: &[T]) -> T {
    compensated_sum(mdp.actions(s)[a].outcomes.iter().map(|&(_, t, p)| p * v[t]))
}

/// One reachability Bellman update, targets pinned to 1.
pub fn reachability_sweep<T: Scalar>(mdp: &CompositionMdp<T>, p: &[T]) -> Vec<T> {
    sweep(mdp.num_states(), |s| {
        if mdp.is_target(s) {
            return T::one();
        }
        (0..mdp.actions(s).len())
            .map(|a| expectation(mdp, s, a, p))
            .fold(T::zero(), T::max)
    })
}

/// Maximal reachability probabilities and the actions attaining them.
#[derive(Clone, Debug, PartialEq)]
pub struct Reachability<T> {
    pub p: Vec<T>,
    /// Per state, indices into `mdp.actions(s)`; empty on targets and on
    /// states with `p = 0`.
    pub optimal: Vec<Vec<usize>>,
    pub almost_sure: Vec<bool>,
    pub iterations: usize,
    pub residual: T,
}

/// Value iteration for `max P(◊T)` after an exact graph pass: states that
/// cannot reach `T` get exactly 0, the almost-sure region exactly 1, and
/// only the remaining states are iterated.
///
/// In the almost-sure region the optimal actions are exactly those that keep
/// the whole support inside it; elsewhere they are the actions within
/// `tolerance` of the maximum.
pub fn max_reachability<T: Scalar>(
    mdp: &CompositionMdp<T>,
    options: &SolverOptions<T>,
) -> Result<Reachability<T>, StochasticError> {
    let n = mdp.num_states();
    let reach = can_reach_target(mdp);
    let sure = almost_sure_region(mdp);
    let mut p: Vec<T> = sure
        .iter()
        .map(|&b| if b { T::one() } else { T::zero() })
        .collect();
    let mut iterations = 0;
    let mut residual = T::zero();
    if (0..n).any(|s| reach[s] && !sure[s]) {
        loop {
            if iterations >= options.max_iterations {
                return Err(StochasticError::NonConvergence {
                    stage: "reachability",
                    iterations,
                    residual: residual.to_f64_lossy(),
                });
            }
            iterations += 1;
            let next = sweep(n, |s| {
                if sure[s] {
                    T::one()
                } else if !reach[s] {
                    T::zero()
                } else {
                    (0..mdp.actions(s).len())
                        .map(|a| expectation(mdp, s, a, &p))
                        .fold(T::zero(), T::max)
                }
            });
            residual = max_residual(&next, &p);
            p = next;
            if residual < options.tolerance {
                break;
            }
        }
    }
    let optimal = (0..n)
        .map(|s| {
            let actions = mdp.actions(s);
            if mdp.is_target(s) || p[s] <= T::zero() {
                Vec::new()
            } else if sure[s] {
                (0..actions.len())
                    .filter(|&a| actions[a].outcomes.iter().all(|o| sure[o.1]))
                    .collect()
            } else {
                (0..actions.len())
                    .filter(|&a| expectation(mdp, s, a, &p) >= p[s] - options.tolerance)
                    .collect()
            }
        })
        .collect();
    Ok(Reachability {
        p,
        optimal,
        almost_sure: sure,
        iterations,
        residual,
    })
}

/// Action of the pruned MDP: an optimal action of the original MDP with its
/// distribution conditioned on reaching `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrunedAction<T> {
    /// Index into `mdp.actions(s)`.
    pub action: usize,
    pub cost: T,
    pub outcomes: Vec<(MdpStateId, T)>,
}

/// The MDP restricted to states with `p* > 0` and their optimal actions,
/// reweighted by `P̃(s′|s,a) = P′(s′|s,a)·p*(s′)/p*(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrunedMdp<T> {
    pub alive: Vec<bool>,
    pub actions: Vec<Vec<PrunedAction<T>>>,
}

/// Prunes to optimal actions and applies the conditioning transform.
///
/// Weights are renormalized when the (tolerance-optimal) action does not
/// sum to exactly 1 after reweighting; on a `p* ≡ 1` region they are `P′`
/// unchanged.
pub fn prune<T: Scalar>(
    mdp: &CompositionMdp<T>,
    reach: &Reachability<T>,
) -> Result<PrunedMdp<T>, StochasticError> {
    if reach.p[mdp.initial()] <= T::zero() {
        return Err(StochasticError::Unachievable);
    }
    let p = &reach.p;
    let alive: Vec<bool> = p.iter().map(|&x| x > T::zero()).collect();
    let actions = (0..mdp.num_states())
        .map(|s| {
            reach.optimal[s]
                .iter()
                .map(|&a| {
                    let action = &mdp.actions(s)[a];
                    let mut outcomes: Vec<(MdpStateId, T)> = action
                        .outcomes
                        .iter()
                        .filter(|o| alive[o.1])
                        .map(|&(_, t, prob)| {
                            (
                                t,
                                if p[t] == p[s] {
                                    prob
                                } else {
                                    prob * (p[t] / p[s])
                                },
                            )
                        })
                        .collect();
                    let total = compensated_sum(outcomes.iter().map(|o| o.1));
                    if total != T::one() && total > T::zero() {
                        for o in &mut outcomes {
                            o.1 = o.1 / total;
                        }
                    }
                    PrunedAction {
                        action: a,
                        cost: action.cost,
                        outcomes,
                    }
                })
                .collect()
        })
        .collect();
    Ok(PrunedMdp { alive, actions })
}

/// One SSP Bellman update on the pruned MDP, targets pinned to 0. Dead
/// states and states without actions keep their value.
pub fn cost_sweep<T: Scalar>(mdp: &CompositionMdp<T>, pruned: &PrunedMdp<T>, j: &[T]) -> Vec<T> {
    sweep(mdp.num_states(), |s| {
        if mdp.is_target(s) || pruned.actions[s].is_empty() {
            return if mdp.is_target(s) { T::zero() } else { j[s] };
        }
        pruned.actions[s]
            .iter()
            .map(|a| action_cost(a, j))
            .fold(T::infinity(), T::min)
    })
}

fn action_cost<T: Scalar>(a: &PrunedAction<T>, j: &[T]) -> T {
    a.cost + compensated_sum(a.outcomes.iter().map(|&(t, p)| p * j[t]))
}

/// Minimal conditional expected costs and a greedy policy.
#[derive(Clone, Debug, PartialEq)]
pub struct CostSolution<T> {
    /// Defined on surviving states.
    pub j: Vec<Option<T>>,
    /// Index into `mdp.actions(s)`; `None` on targets and dead states.
    pub policy: Vec<Option<usize>>,
    pub iterations: usize,
    pub residual: T,
}

/// Value iteration `J_{k+1}(s) = min_a [C′(s,a) + Σ P̃(s′|s,a)·J_k(s′)]` from
/// `J_0 = 0`, then the greedy policy, ties going to the least action.
pub fn min_expected_cost<T: Scalar>(
    mdp: &CompositionMdp<T>,
    pruned: &PrunedMdp<T>,
    options: &SolverOptions<T>,
) -> Result<CostSolution<T>, StochasticError> {
    let n = mdp.num_states();
    let mut j = vec![T::zero(); n];
    let mut iterations = 0;
    let mut residual = T::zero();
    loop {
        if iterations >= options.max_iterations {
            return Err(StochasticError::NonConvergence {
                stage: "expected cost",
                iterations,
                residual: residual.to_f64_lossy(),
            });
        }
        iterations += 1;
        let next = cost_sweep(mdp, pruned, &j);
        residual = max_residual(&next, &j);
        j = next;
        if let Some(s) = (0..n).find(|&s| j[s] > options.divergence_cap || j[s].is_nan()) {
            return Err(StochasticError::Divergence {
                state: mdp.label(s),
                value: j[s].to_f64_lossy(),
            });
        }
        if residual < options.tolerance {
            break;
        }
    }
    let policy = (0..n)
        .map(|s| {
            if mdp.is_target(s) || !pruned.alive[s] {
                return None;
            }
            let costs: Vec<T> = pruned.actions[s]
                .iter()
                .map(|a| action_cost(a, &j))
                .collect();
            let best = costs.iter().copied().fold(T::infinity(), T::min);
            costs
                .iter()
                .position(|&c| c <= best + options.tolerance)
                .map(|k| pruned.actions[s][k].action)
        })
        .collect();
    let j = (0..n).map(|s| pruned.alive[s].then_some(j[s])).collect();
    Ok(CostSolution {
        j,
        policy,
        iterations,
        residual,
    })
}
