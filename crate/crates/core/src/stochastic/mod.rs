//! Synthesis for stochastic communities: the composition MDP, the
//! lexicographic objective (maximize `P(◊T)`, then minimize the conditional
//! expected cost) and the resulting orchestrator.

mod mdp;
mod oracle;
mod solve;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use mdp::{CompositionMdp, MdpAction, MdpOptions, MdpState, MdpStateId};
pub use oracle::{brute_force_oracle, OracleResult, ORACLE_MAX_HORIZON, ORACLE_MAX_STATES};
pub use solve::{
    almost_sure_region, can_reach_target, cost_sweep, max_reachability, min_expected_cost, prune,
    reachability_sweep, CostSolution, PrunedAction, PrunedMdp, Reachability, SolverOptions,
};

use crate::automata::{AutomatonError, ControllableDfa, Nfa, NfaOptions};
use crate::ltlf::{check_alphabet, Formula};
use crate::nondet::Delegation;
use crate::num::Scalar;
use crate::orchestrator::{Decision, Orchestrator, ProtocolError};
use crate::services::{Configuration, StochasticCommunity};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum StochasticError {
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("formula mentions actions no service offers: {}", .0.join(", "))]
    AlphabetViolation(Vec<String>),
    #[error("community action `{0}` missing from the automaton alphabet")]
    AlphabetMismatch(String),
    #[error("MDP exceeds the state cap of {cap} states")]
    StateCap { cap: usize },
    #[error("{stage} value iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        stage: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("expected cost of {state} exceeded the divergence cap ({value:e}); improper policy in the pruned MDP")]
    Divergence { state: String, value: f64 },
    #[error("goal unreachable: the initial state has reachability probability 0")]
    Unachievable,
    #[error("oracle guard rail: {0}")]
    GuardRail(String),
}

/// Solution of the lexicographic objective.
#[derive(Clone, Debug, PartialEq)]
pub struct LexSolution<T> {
    pub p_star: Vec<T>,
    pub optimal_actions: Vec<Vec<usize>>,
    /// Conditional expected cost; defined where `p* > 0`.
    pub j_star: Vec<Option<T>>,
    /// Index into `mdp.actions(s)`; `None` on targets and where `p* = 0`.
    pub policy: Vec<Option<usize>>,
    /// `false` when `p*(s′0) = 0`; the cost stage is then skipped.
    pub achievable: bool,
    pub iterations: StageMetrics<usize>,
    pub residuals: StageMetrics<T>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageMetrics<V> {
    pub reachability: V,
    pub cost: V,
}

impl<T: Scalar> LexSolution<T> {
    pub fn initial_probability(&self) -> T {
        self.p_star[0]
    }

    pub fn initial_cost(&self) -> Option<T> {
        self.j_star[0]
    }

    pub fn to_json(&self, mdp: &CompositionMdp<T>) -> SolutionJson {
        let n = mdp.num_states();
        SolutionJson {
            achievable: self.achievable,
            initial: mdp.label(mdp.initial()),
            p_star: (0..n)
                .map(|s| (mdp.label(s), self.p_star[s].to_f64_lossy()))
                .collect(),
            j_star: (0..n)
                .filter_map(|s| self.j_star[s].map(|j| (mdp.label(s), j.to_f64_lossy())))
                .collect(),
            policy: (0..n)
                .filter_map(|s| {
                    self.policy[s].map(|a| {
                        let sym = mdp.actions(s)[a].symbol;
                        let entry = PolicyEntry {
                            action: mdp.action_name(sym.action).to_string(),
                            q: sym.target,
                            service: sym.service + 1,
                        };
                        (mdp.label(s), entry)
                    })
                })
                .collect(),
            residuals: StageMetrics {
                reachability: self.residuals.reachability.to_f64_lossy(),
                cost: self.residuals.cost.to_f64_lossy(),
            },
            iterations: self.iterations,
        }
    }
}

/// Serialized [`LexSolution`], keyed by state label. Service indices are
/// 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub achievable: bool,
    pub initial: String,
    pub p_star: BTreeMap<String, f64>,
    #[serde(rename = "J_star")]
    pub j_star: BTreeMap<String, f64>,
    pub policy: BTreeMap<String, PolicyEntry>,
    pub residuals: StageMetrics<f64>,
    pub iterations: StageMetrics<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyEntry {
    pub action: String,
    pub q: usize,
    pub service: usize,
}

/// Maps a serialized policy back onto the action indices of `mdp`.
pub fn policy_from_json<T>(
    json: &SolutionJson,
    mdp: &CompositionMdp<T>,
) -> Result<Vec<Option<usize>>, String> {
    let by_label = mdp.state_by_label();
    let mut policy = vec![None; mdp.num_states()];
    for (label, entry) in &json.policy {
        let &s = by_label
            .get(label)
            .ok_or_else(|| format!("unknown state `{label}`"))?;
        let action = mdp
            .alphabet()
            .iter()
            .position(|a| *a == entry.action)
            .ok_or_else(|| format!("unknown action `{}`", entry.action))?;
        if entry.service == 0 {
            return Err(format!("state `{label}`: service indices start at 1"));
        }
        let symbol = Delegation {
            action,
            target: entry.q,
            service: entry.service - 1,
        };
        policy[s] = Some(mdp.find_action(s, symbol).ok_or_else(|| {
            format!(
                "state `{label}`: action ({}, {}, {}) unavailable",
                entry.action, entry.q, entry.service
            )
        })?);
    }
    Ok(policy)
}

/// Maximal reachability, pruning, then the stochastic shortest path.
pub fn solve_lexicographic<T: Scalar>(
    mdp: &CompositionMdp<T>,
    options: &SolverOptions<T>,
) -> Result<LexSolution<T>, StochasticError> {
    let reach = max_reachability(mdp, options)?;
    let n = mdp.num_states();
    if reach.p[mdp.initial()] <= T::zero() {
        return Ok(LexSolution {
            p_star: reach.p,
            optimal_actions: reach.optimal,
            j_star: vec![None; n],
            policy: vec![None; n],
            achievable: false,
            iterations: StageMetrics {
                reachability: reach.iterations,
                cost: 0,
            },
            residuals: StageMetrics {
                reachability: reach.residual,
                cost: T::zero(),
            },
        });
    }
    let pruned = prune(mdp, &reach)?;
    let cost = min_expected_cost(mdp, &pruned, options)?;
    Ok(LexSolution {
        p_star: reach.p,
        optimal_actions: reach.optimal,
        j_star: cost.j,
        policy: cost.policy,
        achievable: true,
        iterations: StageMetrics {
            reachability: reach.iterations,
            cost: cost.iterations,
        },
        residuals: StageMetrics {
            reachability: reach.residual,
            cost: cost.residual,
        },
    })
}

#[derive(Clone, Debug)]
pub struct StochasticOptions<T> {
    pub nfa: NfaOptions,
    pub mdp: MdpOptions,
    pub solver: SolverOptions<T>,
}

impl<T: Scalar> Default for StochasticOptions<T> {
    fn default() -> Self {
        StochasticOptions {
            nfa: NfaOptions::default(),
            mdp: MdpOptions::default(),
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StochasticSynthesis<T> {
    pub dfa: ControllableDfa,
    pub mdp: CompositionMdp<T>,
    pub solution: LexSolution<T>,
}

impl<T: Scalar> StochasticSynthesis<T> {
    pub fn orchestrator(&self) -> PolicyOrchestrator<'_, T> {
        PolicyOrchestrator::new(&self.mdp, &self.solution.policy)
    }
}

/// Formula to NFA, controllable DFA, composition MDP, lexicographic solution.
pub fn synthesize<T: Scalar>(
    formula: &Formula,
    community: &StochasticCommunity<T>,
    options: &StochasticOptions<T>,
) -> Result<StochasticSynthesis<T>, StochasticError> {
    let report = check_alphabet(formula, community.alphabet());
    if !report.is_ok() {
        return Err(StochasticError::AlphabetViolation(report.violations));
    }
    let nfa = Nfa::build(formula, community.alphabet(), &options.nfa)?;
    let dfa = ControllableDfa::new(nfa);
    let mdp = CompositionMdp::build(&dfa, community, &options.mdp)?;
    let solution = solve_lexicographic(&mdp, &options.solver)?;
    Ok(StochasticSynthesis { dfa, mdp, solution })
}

/// Runs a stationary MDP policy as an orchestrator. The tracked MDP state
/// follows the policy's own choice of `q′`, so configurations alone
/// determine it. Halts on the first target entry.
#[derive(Clone, Debug)]
pub struct PolicyOrchestrator<'a, T> {
    mdp: &'a CompositionMdp<T>,
    policy: &'a [Option<usize>],
    current: MdpStateId,
    steps: usize,
}

impl<'a, T> PolicyOrchestrator<'a, T> {
    pub fn new(mdp: &'a CompositionMdp<T>, policy: &'a [Option<usize>]) -> Self {
        PolicyOrchestrator {
            mdp,
            policy,
            current: mdp.initial(),
            steps: 0,
        }
    }

    pub fn current_state(&self) -> MdpStateId {
        self.current
    }

    /// Action index the policy takes in the tracked state, if any.
    pub fn pending_action(&self) -> Option<usize> {
        if self.mdp.is_target(self.current) {
            None
        } else {
            self.policy[self.current]
        }
    }

    fn describe(&self, config: &Configuration) -> String {
        let names: Vec<String> = config
            .0
            .iter()
            .enumerate()
            .map(|(i, &q)| {
                self.mdp
                    .try_local_state_name(i, q)
                    .unwrap_or("?")
                    .to_string()
            })
            .collect();
        format!("({})", names.join(", "))
    }
}

impl<T> Orchestrator for PolicyOrchestrator<'_, T> {
    fn reset(&mut self, initial: &Configuration) -> Result<(), ProtocolError> {
        let expected = &self.mdp.state(self.mdp.initial()).config;
        if expected != initial {
            return Err(ProtocolError::InitialMismatch {
                expected: self.describe(expected),
                found: self.describe(initial),
            });
        }
        self.current = self.mdp.initial();
        self.steps = 0;
        Ok(())
    }

    fn observe(&mut self, next: &Configuration) -> Result<(), ProtocolError> {
        self.steps += 1;
        let a = self
            .pending_action()
            .ok_or(ProtocolError::NoPendingDelegation { step: self.steps })?;
        let service = self.mdp.actions(self.current)[a].symbol.service;
        let succ = next
            .0
            .get(service)
            .and_then(|&l| self.mdp.successor(self.current, a, l))
            .map(|(t, _)| t);
        match succ {
            Some(t) if self.mdp.state(t).config == *next => {
                self.current = t;
                Ok(())
            }
            _ => Err(ProtocolError::UnexpectedConfiguration {
                step: self.steps,
                found: self.describe(next),
            }),
        }
    }

    fn decide(&self) -> Decision {
        if self.mdp.is_target(self.current) {
            return Decision::Halt;
        }
        match self.policy[self.current] {
            Some(a) => {
                let sym = self.mdp.actions(self.current)[a].symbol;
                Decision::Delegate {
                    action: self.mdp.action_name(sym.action).to_string(),
                    service: sym.service,
                }
            }
            None => Decision::Stuck,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltlf::parse;
    use crate::services::{load_community, Community, StochasticService};

    const GARDEN_GOAL: &str = "clean & (clean U ((water & X pluck) | (pluck & X water)))";

    fn garden() -> StochasticCommunity<f64> {
        load_community(include_str!("../../examples/garden_bots.json"))
            .unwrap()
            .into_stochastic()
            .unwrap()
    }

    fn run<T: Scalar>(goal: &str, community: &StochasticCommunity<T>) -> StochasticSynthesis<T> {
        synthesize(
            &parse(goal).unwrap(),
            community,
            &StochasticOptions::default(),
        )
        .unwrap()
    }

    /// `a` from `s0` reaches a final state with probability ½ and an absorbing
    /// non-final sink otherwise.
    fn coin_flip() -> StochasticCommunity<f64> {
        let svc = StochasticService::new(
            "coin",
            &["s0", "win", "sink"],
            "s0",
            &["win"],
            &[("s0", "a", 1.0, &[("win", 0.5), ("sink", 0.5)])],
        )
        .unwrap();
        Community::new(vec![svc]).unwrap()
    }

    fn looping(name: &str, cost: f64) -> StochasticService<f64> {
        StochasticService::new(
            name,
            &["s"],
            "s",
            &["s"],
            &[("s", "a", cost, &[("s", 1.0)])],
        )
        .unwrap()
    }

    fn state_with(mdp: &CompositionMdp<f64>, config: &[&str]) -> Vec<MdpStateId> {
        (0..mdp.num_states())
            .filter(|&s| mdp.config_names(&mdp.state(s).config) == config)
            .collect()
    }

    #[test]
    fn garden_initial_clean_distribution() {
        let syn = run(GARDEN_GOAL, &garden());
        let mdp = &syn.mdp;
        assert_eq!(mdp.state(0).nfa_state, syn.dfa.initial());
        assert_eq!(mdp.config_names(&mdp.state(0).config), ["a0", "b0", "c0"]);
        let actions = mdp.actions(0);
        assert!(!actions.is_empty());
        for a in actions {
            assert_eq!(mdp.action_name(a.symbol.action), "clean");
            assert_eq!(a.symbol.service, 0);
            assert_eq!(a.cost, 0.1);
            let dist: Vec<(String, f64)> = a
                .outcomes
                .iter()
                .map(|&(_, t, p)| (mdp.config_names(&mdp.state(t).config)[0].clone(), p))
                .collect();
            assert_eq!(dist, [("a0".to_string(), 0.8), ("a1".to_string(), 0.2)]);
        }
    }

    #[test]
    fn distributions_are_normalized_and_costs_positive() {
        let syn = run(GARDEN_GOAL, &garden());
        for s in 0..syn.mdp.num_states() {
            for a in syn.mdp.actions(s) {
                let total: f64 = a.outcomes.iter().map(|o| o.2).sum();
                assert!((total - 1.0).abs() < 1e-9);
                assert!(a.cost > 0.0);
            }
        }
    }

    #[test]
    fn single_service_chain() {
        let c = Community::new(vec![looping("solo", 1.0)]).unwrap();
        let syn = run("a", &c);
        assert_eq!(syn.mdp.num_states(), 2);
        assert!(!syn.mdp.is_target(0));
        assert!(syn.mdp.is_target(1));
        assert_eq!(syn.solution.initial_probability(), 1.0);
        assert_eq!(syn.solution.initial_cost(), Some(1.0));
        assert_eq!(syn.solution.j_star[1], Some(0.0));
        assert_eq!(syn.solution.p_star[1], 1.0);
    }

    #[test]
    fn undeclared_actions_are_omitted() {
        let syn = run(GARDEN_GOAL, &garden());
        let mdp = &syn.mdp;
        for s in 0..mdp.num_states() {
            let config = &mdp.state(s).config;
            for a in mdp.actions(s) {
                let svc = garden().service(a.symbol.service).clone();
                assert!(svc
                    .transition(config.0[a.symbol.service], mdp.action_name(a.symbol.action))
                    .is_some());
            }
        }
        // water is only offered by bot2
        assert!((0..mdp.num_states())
            .flat_map(|s| mdp.actions(s))
            .filter(|a| mdp.action_name(a.symbol.action) == "water")
            .all(|a| a.symbol.service == 1));
    }

    #[test]
    fn garden_is_almost_surely_achievable() {
        let syn = run(GARDEN_GOAL, &garden());
        assert!(syn.solution.achievable);
        assert_eq!(syn.solution.initial_probability(), 1.0);
    }

    #[test]
    fn coin_flip_probability_and_cost() {
        let syn = run("a", &coin_flip());
        let sol = &syn.solution;
        assert!((sol.initial_probability() - 0.5).abs() < 1e-12);
        assert_eq!(sol.initial_cost(), Some(1.0));
        let sink = state_with(&syn.mdp, &["sink"]);
        assert_eq!(sink.len(), 1);
        assert_eq!(sol.p_star[sink[0]], 0.0);
        assert_eq!(sol.j_star[sink[0]], None);
    }

    #[test]
    fn coin_flip_pruning_conditions_on_success() {
        let syn = run("a", &coin_flip());
        let reach = max_reachability(&syn.mdp, &SolverOptions::default()).unwrap();
        let pruned = prune(&syn.mdp, &reach).unwrap();
        let a = &pruned.actions[0][0];
        assert_eq!(a.outcomes.len(), 1);
        assert!(syn.mdp.is_target(a.outcomes[0].0));
        assert!((a.outcomes[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pruning_is_identity_where_p_is_one() {
        let syn = run(GARDEN_GOAL, &garden());
        let reach = max_reachability(&syn.mdp, &SolverOptions::default()).unwrap();
        let pruned = prune(&syn.mdp, &reach).unwrap();
        for s in 0..syn.mdp.num_states() {
            for pa in &pruned.actions[s] {
                let orig: Vec<(usize, f64)> = syn.mdp.actions(s)[pa.action]
                    .outcomes
                    .iter()
                    .map(|&(_, t, p)| (t, p))
                    .collect();
                assert_eq!(pa.outcomes, orig);
            }
        }
    }

    #[test]
    fn garden_pruned_keeps_both_pluck_services() {
        let syn = run(GARDEN_GOAL, &garden());
        let reach = max_reachability(&syn.mdp, &SolverOptions::default()).unwrap();
        let pruned = prune(&syn.mdp, &reach).unwrap();
        let found = (0..syn.mdp.num_states()).any(|s| {
            let services: Vec<usize> = pruned.actions[s]
                .iter()
                .map(|pa| syn.mdp.actions(s)[pa.action].symbol)
                .filter(|sym| syn.mdp.action_name(sym.action) == "pluck")
                .map(|sym| sym.service)
                .collect();
            services.contains(&1) && services.contains(&2)
        });
        assert!(found);
    }

    #[test]
    fn unreachable_goal_is_unachievable() {
        let c = Community::new(vec![
            looping("x", 1.0),
            StochasticService::new(
                "y",
                &["s0", "s1"],
                "s0",
                &["s0"],
                &[("s0", "b", 1.0, &[("s1", 1.0)])],
            )
            .unwrap(),
        ])
        .unwrap();
        let syn = run("b", &c);
        assert!(!syn.solution.achievable);
        assert_eq!(syn.solution.initial_probability(), 0.0);
        assert!(syn.solution.policy.iter().all(Option::is_none));
        let reach = max_reachability(&syn.mdp, &SolverOptions::default()).unwrap();
        assert_eq!(prune(&syn.mdp, &reach), Err(StochasticError::Unachievable));
    }

    #[test]
    fn parallel_actions_pick_the_cheaper() {
        let c = Community::new(vec![looping("cheap", 2.0), looping("dear", 5.0)]).unwrap();
        let syn = run("a", &c);
        assert_eq!(syn.solution.initial_cost(), Some(2.0));
        let a = syn.solution.policy[0].unwrap();
        assert_eq!(syn.mdp.actions(0)[a].symbol.service, 0);
        let oracle = brute_force_oracle(&syn.mdp, 3).unwrap();
        assert_eq!(
            (oracle.probability, oracle.conditional_cost),
            (1.0, Some(2.0))
        );
    }

    #[test]
    fn equal_costs_tie_break_to_the_first_service() {
        let c = Community::new(vec![looping("x", 3.0), looping("y", 3.0)]).unwrap();
        let syn = run("a", &c);
        let a = syn.solution.policy[0].unwrap();
        assert_eq!(syn.mdp.actions(0)[a].symbol.service, 0);
    }

    #[test]
    fn garden_cost_matches_the_oracle() {
        let syn = run(GARDEN_GOAL, &garden());
        let oracle = brute_force_oracle(&syn.mdp, 8).unwrap();
        assert!((oracle.probability - 1.0).abs() < 1e-12);
        let j = syn.solution.initial_cost().unwrap();
        assert!((j - oracle.conditional_cost.unwrap()).abs() < 1e-6);
        // clean 0.1, empty on bot1 0.1 with probability 0.2, water, pluck and empty on bot3
        assert!((j - 3.12).abs() < 1e-9, "{j}");
    }

    #[test]
    fn garden_policy_prefers_bot3_for_pluck() {
        let syn = run(GARDEN_GOAL, &garden());
        let mdp = &syn.mdp;
        let initial = state_with(mdp, &["a0", "b0", "c0"]);
        assert!(initial.len() > 1);
        for s in initial {
            if let Some(a) = syn.solution.policy[s] {
                let sym = mdp.actions(s)[a].symbol;
                assert!(!(mdp.action_name(sym.action) == "pluck" && sym.service == 1));
            }
        }
    }

    #[test]
    fn policy_stays_in_optimal_sets() {
        let syn = run(GARDEN_GOAL, &garden());
        for s in 0..syn.mdp.num_states() {
            if let Some(a) = syn.solution.policy[s] {
                assert!(syn.solution.optimal_actions[s].contains(&a));
            }
        }
    }

    #[test]
    fn value_iterates_are_monotone() {
        let syn = run(GARDEN_GOAL, &garden());
        let mdp = &syn.mdp;
        let mut p: Vec<f64> = mdp
            .targets()
            .iter()
            .map(|&t| if t { 1.0 } else { 0.0 })
            .collect();
        for _ in 0..20 {
            let next = reachability_sweep(mdp, &p);
            assert!(next.iter().zip(&p).all(|(a, b)| a >= b));
            p = next;
        }
        let reach = max_reachability(mdp, &SolverOptions::default()).unwrap();
        let pruned = prune(mdp, &reach).unwrap();
        let mut j = vec![0.0; mdp.num_states()];
        for _ in 0..20 {
            let next = cost_sweep(mdp, &pruned, &j);
            assert!(next.iter().zip(&j).all(|(a, b)| a >= b));
            j = next;
        }
    }

    #[test]
    fn oracle_guard_rails_and_small_cases() {
        let syn = run("a", &coin_flip());
        let r = brute_force_oracle(&syn.mdp, 1).unwrap();
        assert!((r.probability - 0.5).abs() < 1e-15);
        assert_eq!(r.conditional_cost, Some(1.0));
        assert_eq!(
            brute_force_oracle(&syn.mdp, 0).unwrap().conditional_cost,
            None
        );
        assert!(matches!(
            brute_force_oracle(&syn.mdp, 11),
            Err(StochasticError::GuardRail(_))
        ));
    }

    #[test]
    fn f32_garden_agrees_with_f64() {
        let syn64 = run(GARDEN_GOAL, &garden());
        let syn32 = run(GARDEN_GOAL, &garden().cast::<f32>());
        assert_eq!(syn32.mdp.num_states(), syn64.mdp.num_states());
        assert_eq!(syn32.solution.initial_probability(), 1.0f32);
        let j32 = syn32.solution.initial_cost().unwrap() as f64;
        assert!((j32 - syn64.solution.initial_cost().unwrap()).abs() < 1e-4);
    }

    #[test]
    fn orchestrator_replays_and_halts() {
        let community = garden();
        let syn = run(GARDEN_GOAL, &community);
        let init = community.initial_configuration();
        let mut orch = syn.orchestrator();
        assert_eq!(
            orch.replay(std::slice::from_ref(&init)).unwrap(),
            Decision::Delegate {
                action: "clean".into(),
                service: 0
            }
        );
        assert!(matches!(
            orch.replay(&[init.with(2, 1)]),
            Err(ProtocolError::InitialMismatch { .. })
        ));
        assert!(matches!(
            orch.replay(&[init.clone(), init.with(1, 1)]),
            Err(ProtocolError::UnexpectedConfiguration { step: 1, .. })
        ));
        // always take the most likely outcome
        orch.reset(&init).unwrap();
        let mut config = init;
        for _ in 0..10 {
            match orch.decide() {
                Decision::Delegate { action, service } => {
                    let tr = community
                        .service(service)
                        .transition(config.0[service], &action)
                        .unwrap();
                    let landing = tr
                        .distribution
                        .iter()
                        .max_by(|a, b| a.1.total_cmp(&b.1))
                        .unwrap()
                        .0;
                    config = config.with(service, landing);
                    orch.observe(&config).unwrap();
                }
                Decision::Halt => break,
                Decision::Stuck => panic!("stuck"),
            }
        }
        assert!(syn.mdp.is_target(orch.current_state()));
        assert!(community.is_final(&config));
        assert!(matches!(
            orch.observe(&config),
            Err(ProtocolError::NoPendingDelegation { .. })
        ));
    }

    #[test]
    fn solution_json_round_trips_the_policy() {
        let syn = run(GARDEN_GOAL, &garden());
        let json = syn.solution.to_json(&syn.mdp);
        assert_eq!(json.p_star[&json.initial], 1.0);
        assert_eq!(
            json.policy[&json.initial],
            PolicyEntry {
                action: "clean".into(),
                q: json.policy[&json.initial].q,
                service: 1
            }
        );
        let text = serde_json::to_string(&json).unwrap();
        assert!(text.contains("\"J_star\""));
        let back: SolutionJson = serde_json::from_str(&text).unwrap();
        assert_eq!(
            policy_from_json(&back, &syn.mdp).unwrap(),
            syn.solution.policy
        );
    }

    #[test]
    fn path_probability_multiplies_factors() {
        let syn = run(GARDEN_GOAL, &garden());
        let mdp = &syn.mdp;
        let a = &mdp.actions(0)[0];
        let (_, t, p) = a.outcomes[1];
        assert_eq!(mdp.path_probability(&[(0, 0, t)]), Some(p));
        assert_eq!(mdp.path_probability(&[(0, 0, 0)]), None);
        assert_eq!(mdp.path_probability(&[]), Some(1.0));
    }
}
