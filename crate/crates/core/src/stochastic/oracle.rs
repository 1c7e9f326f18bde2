use super::mdp::CompositionMdp;
use super::StochasticError;
use crate::num::{compensated_sum, Scalar};

pub const ORACLE_MAX_STATES: usize = 200;
pub const ORACLE_MAX_HORIZON: usize = 10;

/// Result of the finite-horizon brute force: the best probability of
/// reaching `T` within the horizon and, among policies attaining it, the
/// least expected cost conditioned on success.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<T> {
    pub probability: T,
    /// `None` when the probability is 0.
    pub conditional_cost: Option<T>,
    pub horizon: usize,
}

/// Exhaustive finite-horizon search, memoized over `(state, steps left)`.
///
/// For every `(s, k)` it keeps the pair `(p, w)` where `p` is the best
/// probability of first entering `T` within `k` steps and `w` the least
/// success-weighted cost `E[cost · 1{success}]` among `p`-maximizing
/// choices. Costs stop accruing at the first target entry.
pub fn brute_force_oracle<T: Scalar>(
    mdp: &CompositionMdp<T>,
    horizon: usize,
) -> Result<OracleResult<T>, StochasticError> {
    if mdp.num_states() > ORACLE_MAX_STATES {
        return Err(StochasticError::GuardRail(format!(
            "MDP has {} states, the oracle accepts at most {ORACLE_MAX_STATES}",
            mdp.num_states()
        )));
    }
    if horizon > ORACLE_MAX_HORIZON {
        return Err(StochasticError::GuardRail(format!(
            "horizon {horizon} exceeds the oracle limit of {ORACLE_MAX_HORIZON}"
        )));
    }
    let n = mdp.num_states();
    let tie = T::epsilon() * T::from_f64_lossy(1024.0);
    let base = |s: usize| {
        if mdp.is_target(s) {
            (T::one(), T::zero())
        } else {
            (T::zero(), T::zero())
        }
    };
    let mut layer: Vec<(T, T)> = (0..n).map(base).collect();
    for _ in 0..horizon {
        layer = (0..n)
            .map(|s| {
                if mdp.is_target(s) {
                    return (T::one(), T::zero());
                }
                let mut best = (T::zero(), T::zero());
                for a in mdp.actions(s) {
                    let p = compensated_sum(a.outcomes.iter().map(|&(_, t, q)| q * layer[t].0));
                    let w = compensated_sum(
                        a.outcomes
                            .iter()
                            .map(|&(_, t, q)| q * (a.cost * layer[t].0 + layer[t].1)),
                    );
                    if p > best.0 + tie || ((p - best.0).abs() <= tie && w < best.1) {
                        best = (p, w);
                    }
                }
                best
            })
            .collect();
    }
    let (p, w) = layer[mdp.initial()];
    Ok(OracleResult {
        probability: p,
        conditional_cost: (p > T::zero()).then(|| w / p),
        horizon,
    })
}
