//! Executing orchestrators against communities: adversarial resolution for
//! nondeterministic services, seeded sampling for stochastic ones.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ltlf::{evaluate, Formula};
use crate::num::{compensated_sum, Scalar};
use crate::orchestrator::{Decision, Orchestrator};
use crate::services::{
    Community, Configuration, LocalState, NondetCommunity, ServiceModel, StochasticCommunity,
};
use crate::stochastic::{CompositionMdp, MdpStateId, PolicyOrchestrator};

/// How the delegated service moved.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolution<T> {
    pub landing: LocalState,
    /// Probability of this landing state (stochastic environments only).
    pub prob: Option<T>,
    pub cost: Option<T>,
}

/// The community side of an execution.
pub trait Environment<T> {
    fn initial_configuration(&self) -> Configuration;
    fn is_final(&self, config: &Configuration) -> bool;
    /// Runs `action` on `service`; `None` when the service cannot perform it.
    fn resolve(
        &mut self,
        config: &Configuration,
        service: usize,
        action: &str,
    ) -> Option<Resolution<T>>;
}

/// Nondeterministic community whose choices are made by `choose`, called
/// with the configuration, service, action and the sorted successor set.
pub struct Adversary<'a, F> {
    community: &'a NondetCommunity,
    choose: F,
}

impl<'a, F> Adversary<'a, F>
where
    F: FnMut(&Configuration, usize, &str, &[LocalState]) -> LocalState,
{
    pub fn new(community: &'a NondetCommunity, choose: F) -> Self {
        Adversary { community, choose }
    }
}

impl<T, F> Environment<T> for Adversary<'_, F>
where
    F: FnMut(&Configuration, usize, &str, &[LocalState]) -> LocalState,
{
    fn initial_configuration(&self) -> Configuration {
        self.community.initial_configuration()
    }

    fn is_final(&self, config: &Configuration) -> bool {
        self.community.is_final(config)
    }

    fn resolve(
        &mut self,
        config: &Configuration,
        service: usize,
        action: &str,
    ) -> Option<Resolution<T>> {
        let svc = self.community.services().get(service)?;
        let succ = svc.step_nondet(*config.0.get(service)?, action);
        let landing = (self.choose)(config, service, action, &succ);
        debug_assert!(succ.contains(&landing));
        Some(Resolution {
            landing,
            prob: None,
            cost: None,
        })
    }
}

/// Stochastic community sampled with a ChaCha8 generator.
pub struct Sampler<'a, T> {
    community: &'a StochasticCommunity<T>,
    rng: ChaCha8Rng,
}

impl<'a, T: Scalar> Sampler<'a, T> {
    pub fn new(community: &'a StochasticCommunity<T>, seed: u64) -> Self {
        Sampler {
            community,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl<T: Scalar> Environment<T> for Sampler<'_, T> {
    fn initial_configuration(&self) -> Configuration {
        self.community.initial_configuration()
    }

    fn is_final(&self, config: &Configuration) -> bool {
        self.community.is_final(config)
    }

    fn resolve(
        &mut self,
        config: &Configuration,
        service: usize,
        action: &str,
    ) -> Option<Resolution<T>> {
        let tr = self
            .community
            .services()
            .get(service)?
            .transition(*config.0.get(service)?, action)?;
        let weights = tr.distribution.iter().map(|(_, p)| p.to_f64_lossy());
        let k = WeightedIndex::new(weights).ok()?.sample(&mut self.rng);
        let (landing, prob) = tr.distribution[k];
        Some(Resolution {
            landing,
            prob: Some(prob),
            cost: Some(tr.cost),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep<T> {
    pub config: Configuration,
    pub action: String,
    /// 0-based service index.
    pub service: usize,
    pub next_config: Configuration,
    pub prob: Option<T>,
    pub cost: Option<T>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// First successful prefix after `steps` delegations.
    Success {
        steps: usize,
    },
    /// The step cap ran out; not a proof of failure.
    CapReached {
        steps: usize,
    },
    /// The orchestrator halted on an unsuccessful history.
    Halted {
        steps: usize,
    },
    Stuck {
        steps: usize,
    },
    /// The delegated service cannot perform the action.
    Unavailable {
        steps: usize,
        action: String,
        service: usize,
    },
    ProtocolError {
        steps: usize,
        message: String,
    },
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success { .. })
    }
}

/// Alternating configurations and delegations, with the outcome and, in
/// stochastic runs, the accumulated cost.
#[derive(Clone, Debug, PartialEq)]
pub struct ExecutionTrace<T> {
    pub seed: Option<u64>,
    pub initial: Configuration,
    pub steps: Vec<TraceStep<T>>,
    pub outcome: Outcome,
    pub total_cost: Option<T>,
}

impl<T: Scalar> ExecutionTrace<T> {
    pub fn actions(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.action.clone()).collect()
    }

    pub fn last_configuration(&self) -> &Configuration {
        self.steps.last().map_or(&self.initial, |s| &s.next_config)
    }

    /// Product of the sampled transition probabilities.
    pub fn probability(&self) -> Option<T> {
        self.steps
            .iter()
            .try_fold(T::one(), |acc, s| s.prob.map(|p| acc * p))
    }

    pub fn to_json<S: ServiceModel>(&self, community: &Community<S>) -> TraceJson {
        TraceJson {
            seed: self.seed,
            steps: self
                .steps
                .iter()
                .map(|s| StepJson {
                    config: community.state_names(&s.config),
                    action: s.action.clone(),
                    service: s.service + 1,
                    next_config: community.state_names(&s.next_config),
                    prob: s.prob.map(Scalar::to_f64_lossy),
                    cost: s.cost.map(Scalar::to_f64_lossy),
                })
                .collect(),
            outcome: self.outcome.clone(),
            total_cost: self.total_cost.map(Scalar::to_f64_lossy),
        }
    }
}

/// One line of the trace log. Service indices are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceJson {
    pub seed: Option<u64>,
    pub steps: Vec<StepJson>,
    pub outcome: Outcome,
    pub total_cost: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepJson {
    pub config: Vec<String>,
    pub action: String,
    pub service: usize,
    pub next_config: Vec<String>,
    pub prob: Option<f64>,
    pub cost: Option<f64>,
}

fn is_successful<T>(
    env: &impl Environment<T>,
    formula: &Formula,
    actions: &[String],
    config: &Configuration,
) -> bool {
    env.is_final(config) && evaluate(formula, actions, 0)
}

/// Runs `orchestrator` against `env` until the first successful prefix or
/// `step_cap` delegations.
pub fn run_episode<T: Scalar, O: Orchestrator, E: Environment<T>>(
    orchestrator: &mut O,
    env: &mut E,
    formula: &Formula,
    step_cap: usize,
) -> ExecutionTrace<T> {
    let initial = env.initial_configuration();
    let mut trace = ExecutionTrace {
        seed: None,
        initial: initial.clone(),
        steps: Vec::new(),
        outcome: Outcome::CapReached { steps: 0 },
        total_cost: None,
    };
    let mut costs = Vec::new();
    let mut actions = Vec::new();
    let mut config = initial;
    let outcome = match orchestrator.reset(&config) {
        Err(e) => Outcome::ProtocolError {
            steps: 0,
            message: e.to_string(),
        },
        Ok(()) => loop {
            let steps = actions.len();
            if is_successful(env, formula, &actions, &config) {
                break Outcome::Success { steps };
            }
            if steps >= step_cap {
                break Outcome::CapReached { steps };
            }
            let (action, service) = match orchestrator.decide() {
                Decision::Halt => break Outcome::Halted { steps },
                Decision::Stuck => break Outcome::Stuck { steps },
                Decision::Delegate { action, service } => (action, service),
            };
            let Some(res) = env.resolve(&config, service, &action) else {
                break Outcome::Unavailable {
                    steps,
                    action,
                    service,
                };
            };
            let next = config.with(service, res.landing);
            costs.extend(res.cost);
            actions.push(action.clone());
            trace.steps.push(TraceStep {
                config: config.clone(),
                action,
                service,
                next_config: next.clone(),
                prob: res.prob,
                cost: res.cost,
            });
            config = next;
            if let Err(e) = orchestrator.observe(&config) {
                break Outcome::ProtocolError {
                    steps: steps + 1,
                    message: e.to_string(),
                };
            }
        },
    };
    trace.outcome = outcome;
    if trace.steps.iter().all(|s| s.cost.is_some()) && (!trace.steps.is_empty() || costs.is_empty())
    {
        trace.total_cost = Some(compensated_sum(costs));
    }
    trace
}

/// Result of exploring every environment resolution.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// Every branch reached success within the depth.
    AllSuccessful { branches: usize, max_steps: usize },
    /// A branch that failed, was cut by the depth, or broke the protocol.
    Counterexample(ExecutionTrace<f64>),
}

impl Verdict {
    pub fn is_all_successful(&self) -> bool {
        matches!(self, Verdict::AllSuccessful { .. })
    }
}

/// Explores every nondeterministic resolution up to `depth` delegations,
/// depth first in successor order, stopping at the first failing branch.
pub fn exhaustive_adversary<O: Orchestrator + Clone>(
    orchestrator: &O,
    community: &NondetCommunity,
    formula: &Formula,
    depth: usize,
) -> Verdict {
    struct Walk<'a> {
        community: &'a NondetCommunity,
        formula: &'a Formula,
        depth: usize,
        branches: usize,
        max_steps: usize,
    }

    impl Walk<'_> {
        fn fail(
            &self,
            initial: &Configuration,
            steps: &[TraceStep<f64>],
            outcome: Outcome,
        ) -> Verdict {
            Verdict::Counterexample(ExecutionTrace {
                seed: None,
                initial: initial.clone(),
                steps: steps.to_vec(),
                outcome,
                total_cost: None,
            })
        }

        fn go<O: Orchestrator + Clone>(
            &mut self,
            orch: O,
            initial: &Configuration,
            config: &Configuration,
            steps: &mut Vec<TraceStep<f64>>,
            actions: &mut Vec<String>,
        ) -> Option<Verdict> {
            let k = actions.len();
            if self.community.is_final(config) && evaluate(self.formula, actions, 0) {
                self.branches += 1;
                self.max_steps = self.max_steps.max(k);
                return None;
            }
            if k >= self.depth {
                return Some(self.fail(initial, steps, Outcome::CapReached { steps: k }));
            }
            let (action, service) = match orch.decide() {
                Decision::Halt => {
                    return Some(self.fail(initial, steps, Outcome::Halted { steps: k }))
                }
                Decision::Stuck => {
                    return Some(self.fail(initial, steps, Outcome::Stuck { steps: k }))
                }
                Decision::Delegate { action, service } => (action, service),
            };
            let Some(svc) = self.community.services().get(service) else {
                return Some(self.fail(
                    initial,
                    steps,
                    Outcome::Unavailable {
                        steps: k,
                        action,
                        service,
                    },
                ));
            };
            for landing in svc.step_nondet(config.0[service], &action) {
                let next = config.with(service, landing);
                steps.push(TraceStep {
                    config: config.clone(),
                    action: action.clone(),
                    service,
                    next_config: next.clone(),
                    prob: None,
                    cost: None,
                });
                actions.push(action.clone());
                let mut child = orch.clone();
                let found = match child.observe(&next) {
                    Err(e) => Some(self.fail(
                        initial,
                        steps,
                        Outcome::ProtocolError {
                            steps: k + 1,
                            message: e.to_string(),
                        },
                    )),
                    Ok(()) => self.go(child, initial, &next, steps, actions),
                };
                if found.is_some() {
                    return found;
                }
                steps.pop();
                actions.pop();
            }
            None
        }
    }

    let initial = community.initial_configuration();
    let mut walk = Walk {
        community,
        formula,
        depth,
        branches: 0,
        max_steps: 0,
    };
    let mut orch = orchestrator.clone();
    if let Err(e) = orch.reset(&initial) {
        return walk.fail(
            &initial,
            &[],
            Outcome::ProtocolError {
                steps: 0,
                message: e.to_string(),
            },
        );
    }
    match walk.go(orch, &initial, &initial, &mut Vec::new(), &mut Vec::new()) {
        Some(v) => v,
        None => Verdict::AllSuccessful {
            branches: walk.branches,
            max_steps: walk.max_steps,
        },
    }
}

/// Aggregate statistics of a Monte Carlo run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub episodes: usize,
    pub base_seed: u64,
    pub successes: usize,
    pub cap_reached: usize,
    pub success_rate: f64,
    /// Binomial standard error of the success rate.
    pub success_rate_stderr: f64,
    /// Mean cost over successful episodes; `None` without successes.
    pub mean_conditional_cost: Option<f64>,
    /// Standard error of the mean conditional cost; `None` below two
    /// successes.
    pub conditional_cost_stderr: Option<f64>,
}

/// Runs `episodes` independent episodes in parallel; episode `k` samples
/// with seed `base_seed + k`. Traces are returned in episode order.
pub fn monte_carlo<T, O>(
    orchestrator: &O,
    community: &StochasticCommunity<T>,
    formula: &Formula,
    episodes: usize,
    base_seed: u64,
    step_cap: usize,
) -> (MonteCarloReport, Vec<ExecutionTrace<T>>)
where
    T: Scalar,
    O: Orchestrator + Clone + Send + Sync,
{
    assert!(episodes >= 1, "at least one episode");
    let traces: Vec<ExecutionTrace<T>> = (0..episodes)
        .into_par_iter()
        .map(|k| {
            let seed = base_seed.wrapping_add(k as u64);
            let mut orch = orchestrator.clone();
            let mut env = Sampler::new(community, seed);
            let mut trace = run_episode(&mut orch, &mut env, formula, step_cap);
            trace.seed = Some(seed);
            trace
        })
        .collect();
    (summarize(&traces, base_seed), traces)
}

/// Statistics over already-run episodes.
pub fn summarize<T: Scalar>(traces: &[ExecutionTrace<T>], base_seed: u64) -> MonteCarloReport {
    let n = traces.len();
    let costs: Vec<f64> = traces
        .iter()
        .filter(|t| t.outcome.is_success())
        .map(|t| t.total_cost.map_or(0.0, Scalar::to_f64_lossy))
        .collect();
    let successes = costs.len();
    let rate = successes as f64 / n as f64;
    let mean = (successes > 0).then(|| compensated_sum(costs.iter().copied()) / successes as f64);
    let stderr = mean.filter(|_| successes > 1).map(|m| {
        let var = compensated_sum(costs.iter().map(|c| (c - m) * (c - m))) / (successes - 1) as f64;
        (var / successes as f64).sqrt()
    });
    MonteCarloReport {
        episodes: n,
        base_seed,
        successes,
        cap_reached: traces
            .iter()
            .filter(|t| matches!(t.outcome, Outcome::CapReached { .. }))
            .count(),
        success_rate: rate,
        success_rate_stderr: (rate * (1.0 - rate) / n as f64).sqrt(),
        mean_conditional_cost: mean,
        conditional_cost_stderr: stderr,
    }
}

/// The MDP path `(state, action index, successor)` a policy run follows
/// along a trace; `None` if the trace leaves the policy's support.
pub fn trace_to_mdp_path<T: Scalar>(
    trace: &ExecutionTrace<T>,
    mdp: &CompositionMdp<T>,
    policy: &[Option<usize>],
) -> Option<Vec<(MdpStateId, usize, MdpStateId)>> {
    let mut orch = PolicyOrchestrator::new(mdp, policy);
    orch.reset(&trace.initial).ok()?;
    let mut path = Vec::with_capacity(trace.steps.len());
    for step in &trace.steps {
        let s = orch.current_state();
        let a = orch.pending_action()?;
        orch.observe(&step.next_config).ok()?;
        path.push((s, a, orch.current_state()));
    }
    Some(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltlf::parse;
    use crate::nondet::{self, NondetOptions, Transducer, TransducerOrchestrator};
    use crate::services::{load_community, StochasticService};
    use crate::stochastic::{self, StochasticOptions};

    const GARDEN_GOAL: &str = "clean & (clean U ((water & X pluck) | (pluck & X water)))";

    fn goal() -> Formula {
        parse(GARDEN_GOAL).unwrap()
    }

    fn garden_nondet() -> NondetCommunity {
        load_community(include_str!("../examples/garden_bots_nondet.json"))
            .unwrap()
            .into_nondet()
            .unwrap()
    }

    fn garden() -> StochasticCommunity<f64> {
        load_community(include_str!("../examples/garden_bots.json"))
            .unwrap()
            .into_stochastic()
            .unwrap()
    }

    #[test]
    fn adversary_forcing_bot1_dirty_needs_an_extra_empty() {
        let community = garden_nondet();
        let syn = nondet::synthesize(&goal(), &community, &NondetOptions::default()).unwrap();
        let t = syn.transducer.unwrap();
        let mut orch = TransducerOrchestrator::new(&t);
        let a1 = community.service(0).state_index("a1").unwrap();
        let mut env = Adversary::new(
            &community,
            |_: &Configuration, svc: usize, _: &str, succ: &[LocalState]| {
                if svc == 0 && succ.contains(&a1) {
                    a1
                } else {
                    succ[0]
                }
            },
        );
        let trace: ExecutionTrace<f64> = run_episode(&mut orch, &mut env, &goal(), 20);
        assert!(trace.outcome.is_success());
        // bot1 is emptied only once φ already holds
        let actions = trace.actions();
        let satisfied = (0..=actions.len())
            .find(|&k| evaluate(&goal(), &actions[..k], 0))
            .unwrap();
        assert!(satisfied < actions.len());
        let empties: Vec<usize> = (0..actions.len())
            .filter(|&k| trace.steps[k].action == "empty" && trace.steps[k].service == 0)
            .collect();
        assert_eq!(empties.len(), 1);
        assert!(empties[0] >= satisfied);
        assert_eq!(trace.total_cost, None);
    }

    #[test]
    fn sampled_garden_episode_costs_add_up() {
        let community = garden();
        let syn =
            stochastic::synthesize(&goal(), &community, &StochasticOptions::default()).unwrap();
        let mut orch = syn.orchestrator();
        let mut env = Sampler::new(&community, 42);
        let trace = run_episode(&mut orch, &mut env, &goal(), 100);
        assert!(trace.outcome.is_success());
        let sum: f64 = trace.steps.iter().map(|s| s.cost.unwrap()).sum();
        assert!((trace.total_cost.unwrap() - sum).abs() < 1e-12);
    }

    #[test]
    fn already_successful_start_has_an_empty_trace() {
        let community = garden();
        let syn = stochastic::synthesize(
            &parse("G false").unwrap(),
            &community,
            &StochasticOptions::default(),
        )
        .unwrap();
        let mut orch = syn.orchestrator();
        let mut env = Sampler::new(&community, 0);
        let trace = run_episode(&mut orch, &mut env, &parse("G false").unwrap(), 10);
        assert_eq!(trace.outcome, Outcome::Success { steps: 0 });
        assert!(trace.steps.is_empty());
        assert_eq!(trace.total_cost, Some(0.0));
        assert_eq!(trace.probability(), Some(1.0));
    }

    #[test]
    fn exhaustive_walk_of_the_garden_transducer() {
        let community = garden_nondet();
        let syn = nondet::synthesize(&goal(), &community, &NondetOptions::default()).unwrap();
        let rank = syn.initial_rank().unwrap();
        let t = syn.transducer.unwrap();
        let verdict = exhaustive_adversary(
            &TransducerOrchestrator::new(&t),
            &community,
            &goal(),
            rank + 2,
        );
        match verdict {
            Verdict::AllSuccessful {
                branches,
                max_steps,
            } => {
                assert_eq!(branches, 2);
                assert!(max_steps <= rank);
            }
            Verdict::Counterexample(c) => panic!("{c:?}"),
        }
    }

    #[test]
    fn corrupted_transducer_yields_a_counterexample() {
        let community = garden_nondet();
        let syn = nondet::synthesize(&goal(), &community, &NondetOptions::default()).unwrap();
        let mut json = syn.transducer.unwrap().to_json();
        json.outputs.get_mut("0").unwrap().action = "water".into();
        let names = syn.arena.state_name_table().to_vec();
        let bad = Transducer::from_json(&json, names).unwrap();
        let verdict =
            exhaustive_adversary(&TransducerOrchestrator::new(&bad), &community, &goal(), 10);
        let Verdict::Counterexample(trace) = verdict else {
            panic!("expected a counterexample")
        };
        assert!(!trace.outcome.is_success());
        assert_eq!(trace.steps[0].action, "water");
        assert!(matches!(
            trace.outcome,
            Outcome::ProtocolError { steps: 1, .. }
        ));
    }

    #[test]
    fn depth_zero_success_at_start() {
        let community = garden_nondet();
        let f = parse("G false").unwrap();
        let syn = nondet::synthesize(&f, &community, &NondetOptions::default()).unwrap();
        let t = syn.transducer.unwrap();
        let v = exhaustive_adversary(&TransducerOrchestrator::new(&t), &community, &f, 0);
        assert_eq!(
            v,
            Verdict::AllSuccessful {
                branches: 1,
                max_steps: 0
            }
        );
    }

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

    #[test]
    fn coin_flip_rate_is_near_one_half() {
        let community = coin_flip();
        let f = parse("a").unwrap();
        let syn = stochastic::synthesize(&f, &community, &StochasticOptions::default()).unwrap();
        let (report, traces) = monte_carlo(&syn.orchestrator(), &community, &f, 10_000, 7, 10);
        let sigma = (0.25f64 / 10_000.0).sqrt();
        assert!((report.success_rate - 0.5).abs() <= 3.0 * sigma);
        assert_eq!(report.mean_conditional_cost, Some(1.0));
        // failures end stuck in the sink, not at the cap
        assert_eq!(report.cap_reached, 0);
        assert!(traces.iter().all(|t| t.steps.len() == 1));
    }

    #[test]
    fn single_episode_rate_is_binary() {
        let community = coin_flip();
        let f = parse("a").unwrap();
        let syn = stochastic::synthesize(&f, &community, &StochasticOptions::default()).unwrap();
        let (report, _) = monte_carlo(&syn.orchestrator(), &community, &f, 1, 3, 10);
        assert!(report.success_rate == 0.0 || report.success_rate == 1.0);
        assert_eq!(report.conditional_cost_stderr, None);
    }

    #[test]
    fn zero_successes_leave_the_cost_undefined() {
        let report = summarize::<f64>(
            &[ExecutionTrace {
                seed: Some(0),
                initial: Configuration(vec![0]),
                steps: Vec::new(),
                outcome: Outcome::Stuck { steps: 0 },
                total_cost: Some(0.0),
            }],
            0,
        );
        assert_eq!(report.mean_conditional_cost, None);
        assert_eq!(report.success_rate, 0.0);
    }

    #[test]
    fn same_seed_same_log() {
        let community = garden();
        let syn =
            stochastic::synthesize(&goal(), &community, &StochasticOptions::default()).unwrap();
        let log = |seed| {
            let (_, traces) = monte_carlo(&syn.orchestrator(), &community, &goal(), 50, seed, 100);
            traces
                .iter()
                .map(|t| serde_json::to_string(&t.to_json(&community)).unwrap())
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(log(11), log(11));
        assert_ne!(log(11), log(12));
    }

    #[test]
    fn logged_probabilities_match_mdp_paths() {
        let community = garden();
        let syn =
            stochastic::synthesize(&goal(), &community, &StochasticOptions::default()).unwrap();
        let (_, traces) = monte_carlo(&syn.orchestrator(), &community, &goal(), 200, 5, 100);
        for t in &traces {
            let path = trace_to_mdp_path(t, &syn.mdp, &syn.solution.policy).unwrap();
            let p = syn.mdp.path_probability(&path).unwrap();
            assert!((p - t.probability().unwrap()).abs() <= 1e-12);
        }
    }
}
