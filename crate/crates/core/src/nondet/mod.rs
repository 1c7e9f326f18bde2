//! Synthesis for nondeterministic communities: composition arena, DFA game,
//! and transducer extraction.

mod arena;
mod solve;
mod transducer;

pub use arena::{ArenaOptions, ArenaState, ArenaStateId, Delegation, GameArena, Move};
pub use solve::{controllable_preimage, solve_game, solve_game_naive, WinningRegion};
pub use transducer::{
    Output, OutputJson, Transducer, TransducerJson, TransducerOrchestrator, TransducerStateJson,
    TransitionJson,
};

use crate::automata::{AutomatonError, ControllableDfa, Nfa, NfaOptions};
use crate::ltlf::{check_alphabet, Formula};
use crate::services::NondetCommunity;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("formula mentions actions no service offers: {}", .0.join(", "))]
    AlphabetViolation(Vec<String>),
    #[error("community action `{0}` missing from the automaton alphabet")]
    AlphabetMismatch(String),
    #[error("arena exceeds the state cap of {cap} states")]
    StateCap { cap: usize },
    #[error("unrealizable: the initial state is not winning ({} winning states)", .winning_states.len())]
    Unrealizable { winning_states: Vec<ArenaStateId> },
}

#[derive(Clone, Debug, Default)]
pub struct NondetOptions {
    pub nfa: NfaOptions,
    pub arena: ArenaOptions,
}

/// Everything produced by a synthesis run. `transducer` is `None` exactly
/// when the initial arena state is losing.
#[derive(Clone, Debug)]
pub struct NondetSynthesis {
    pub dfa: ControllableDfa,
    pub arena: GameArena,
    pub region: WinningRegion,
    pub transducer: Option<Transducer>,
}

impl NondetSynthesis {
    pub fn is_realizable(&self) -> bool {
        self.transducer.is_some()
    }

    pub fn initial_rank(&self) -> Option<usize> {
        self.region.rank(self.arena.initial())
    }
}

/// Runs the whole pipeline: formula to NFA, controllable DFA, arena, game,
/// transducer. Unrealizability is reported through
/// [`NondetSynthesis::transducer`], not as an error.
pub fn synthesize(
    formula: &Formula,
    community: &NondetCommunity,
    options: &NondetOptions,
) -> Result<NondetSynthesis, SynthesisError> {
    let report = check_alphabet(formula, community.alphabet());
    if !report.is_ok() {
        return Err(SynthesisError::AlphabetViolation(report.violations));
    }
    let nfa = Nfa::build(formula, community.alphabet(), &options.nfa)?;
    let dfa = ControllableDfa::new(nfa);
    let arena = GameArena::build(&dfa, community, &options.arena)?;
    let region = solve_game(&arena);
    let transducer = match Transducer::extract(&arena, &region) {
        Ok(t) => Some(t),
        Err(SynthesisError::Unrealizable { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(NondetSynthesis {
        dfa,
        arena,
        region,
        transducer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltlf::parse;
    use crate::orchestrator::{Decision, Orchestrator, ProtocolError};
    use crate::services::{load_community, Community, Configuration, Service, ServiceModel};

    const GARDEN_GOAL: &str = "clean & (clean U ((water & X pluck) | (pluck & X water)))";

    fn garden() -> NondetCommunity {
        load_community(include_str!("../../examples/garden_bots_nondet.json"))
            .unwrap()
            .into_nondet()
            .unwrap()
    }

    fn run(goal: &str, community: &NondetCommunity) -> NondetSynthesis {
        synthesize(&parse(goal).unwrap(), community, &NondetOptions::default()).unwrap()
    }

    fn solo(transitions: &[(&str, &str, &str)], finals: &[&str]) -> NondetCommunity {
        Community::new(vec![Service::new(
            "solo",
            &["s0", "s1"],
            "s0",
            finals,
            transitions,
        )
        .unwrap()])
        .unwrap()
    }

    #[test]
    fn garden_is_realizable_and_starts_with_clean_on_bot1() {
        let syn = run(GARDEN_GOAL, &garden());
        assert!(syn.is_realizable());
        let st = syn.arena.state(syn.arena.initial());
        assert_eq!(st.nfa_state, syn.dfa.initial());
        assert_eq!(st.config, Configuration(vec![0, 0, 0]));
        let t = syn.transducer.as_ref().unwrap();
        let out = t.output(t.initial()).unwrap();
        assert_eq!((out.action.as_str(), out.service), ("clean", 0));
        let decision = t.orchestrate(&[Configuration(vec![0, 0, 0])]).unwrap();
        assert_eq!(
            decision,
            Decision::Delegate {
                action: "clean".into(),
                service: 0
            }
        );
        for s in 0..syn.arena.num_states() {
            if syn.arena.is_accepting(s) {
                let st = syn.arena.state(s);
                assert!(syn.dfa.is_accepting(st.nfa_state));
                assert_eq!(st.config, Configuration(vec![0, 0, 0]));
            }
        }
    }

    #[test]
    fn arena_transitions_respect_both_side_conditions() {
        let community = garden();
        let syn = run(GARDEN_GOAL, &community);
        let arena = &syn.arena;
        for s in 0..arena.num_states() {
            let st = arena.state(s);
            for m in arena.moves(s) {
                let sym = crate::automata::ControlSymbol {
                    action: m.symbol.action,
                    target: m.symbol.target,
                };
                assert_eq!(syn.dfa.step(st.nfa_state, sym), m.symbol.target);
                let svc = community.service(m.symbol.service);
                let expected = svc.step_nondet(
                    st.config.0[m.symbol.service],
                    arena.action_name(m.symbol.action),
                );
                let got: Vec<_> = m.outcomes.iter().map(|&(l, _)| l).collect();
                assert_eq!(got, expected);
                for &(l, t) in &m.outcomes {
                    let next = arena.state(t);
                    assert_eq!(next.nfa_state, m.symbol.target);
                    assert_eq!(next.config, st.config.with(m.symbol.service, l));
                }
            }
        }
    }

    #[test]
    fn single_service_self_loop() {
        let c = solo(&[("s0", "a", "s0")], &["s0"]);
        let syn = run("a", &c);
        let arena = &syn.arena;
        let m = &arena.moves(arena.initial())[0];
        assert_eq!(arena.action_name(m.symbol.action), "a");
        assert_eq!(m.symbol.service, 0);
        let (_, t) = m.outcomes[0];
        assert!(arena.is_accepting(t));
        assert!(syn.dfa.is_accepting(m.symbol.target));
        assert_eq!(syn.initial_rank(), Some(1));
    }

    #[test]
    fn no_service_offers_the_action() {
        let c = Community::new(vec![
            Service::new("x", &["s0"], "s0", &["s0"], &[("s0", "b", "s0")]).unwrap(),
            Service::new("y", &["s0", "s1"], "s0", &["s0"], &[("s0", "a", "s1")]).unwrap(),
        ])
        .unwrap();
        // `a` exists only on y, which then never returns to a final state
        let syn = run("a", &c);
        assert!(!syn.is_realizable());
        assert!(matches!(
            Transducer::extract(&syn.arena, &syn.region),
            Err(SynthesisError::Unrealizable { .. })
        ));
    }

    #[test]
    fn alphabet_violation_is_an_error() {
        let c = solo(&[("s0", "a", "s0")], &["s0"]);
        let err = synthesize(&parse("fly").unwrap(), &c, &NondetOptions::default()).unwrap_err();
        assert_eq!(err, SynthesisError::AlphabetViolation(vec!["fly".into()]));
    }

    #[test]
    fn empty_execution_wins() {
        let c = solo(&[("s0", "a", "s1")], &["s0"]);
        let syn = run("G false", &c);
        assert!(syn.arena.is_accepting(syn.arena.initial()));
        assert_eq!(syn.initial_rank(), Some(0));
        let t = syn.transducer.unwrap();
        assert_eq!(t.num_states(), 1);
        assert!(t.is_halting(0));
        assert_eq!(
            t.orchestrate(&[Configuration(vec![0])]).unwrap(),
            Decision::Halt
        );
    }

    /// One-step enumeration over the NFA relation and the services, without
    /// going through the arena's move lists.
    #[test]
    fn preimage_of_accepting_matches_one_step_enumeration() {
        let community = garden();
        let syn = run(GARDEN_GOAL, &community);
        let arena = &syn.arena;
        let nfa = syn.dfa.nfa();
        let accepting: Vec<bool> = (0..arena.num_states())
            .map(|s| arena.is_accepting(s))
            .collect();
        let pre: Vec<usize> = controllable_preimage(arena, &accepting)
            .into_iter()
            .map(|(s, _)| s)
            .collect();
        let mut brute = Vec::new();
        for s in 0..arena.num_states() {
            let st = arena.state(s);
            if st
                .config
                .0
                .iter()
                .zip(community.services())
                .any(|(&q, svc)| q >= svc.num_states())
            {
                continue;
            }
            let ok = nfa.alphabet().iter().enumerate().any(|(a, name)| {
                nfa.successors(st.nfa_state, a).iter().any(|&q2| {
                    (0..community.len()).any(|i| {
                        community
                            .service(i)
                            .step_nondet(st.config.0[i], name)
                            .iter()
                            .all(|&l| {
                                nfa.is_accepting(q2) && community.is_final(&st.config.with(i, l))
                            })
                    })
                })
            });
            if ok {
                brute.push(s);
            }
        }
        assert_eq!(pre, brute);
        assert!(!pre.is_empty());
    }

    #[test]
    fn preimage_edge_cases() {
        let syn = run(GARDEN_GOAL, &garden());
        let arena = &syn.arena;
        let n = arena.num_states();
        assert!(controllable_preimage(arena, &vec![false; n]).is_empty());
        let all: Vec<usize> = controllable_preimage(arena, &vec![true; n])
            .into_iter()
            .map(|(s, _)| s)
            .collect();
        let with_moves: Vec<usize> = (0..n).filter(|&s| !arena.moves(s).is_empty()).collect();
        assert_eq!(all, with_moves);
    }

    #[test]
    fn fast_and_naive_fixpoints_agree() {
        let syn = run(GARDEN_GOAL, &garden());
        let naive = solve_game_naive(&syn.arena);
        assert_eq!(syn.region.ranks(), naive.ranks());
        for s in 0..syn.arena.num_states() {
            assert_eq!(syn.region.witness(s), naive.witness(s));
        }
        assert!(naive.iterations() <= syn.arena.num_states() + 1);
    }

    #[test]
    fn witnesses_force_progress() {
        let syn = run(GARDEN_GOAL, &garden());
        let (arena, region) = (&syn.arena, &syn.region);
        for s in region.winning_states() {
            let k = region.rank(s).unwrap();
            if k == 0 {
                continue;
            }
            let m = &arena.moves(s)[region.witness(s).unwrap()];
            assert!(!m.outcomes.is_empty());
            for &(_, t) in &m.outcomes {
                assert!(region.rank(t).unwrap() < k);
            }
            // tie-breaking: no earlier move forces into Win_{k-1}
            let earlier = region.witness(s).unwrap();
            for m in &arena.moves(s)[..earlier] {
                let forced = !m.outcomes.is_empty()
                    && m.outcomes
                        .iter()
                        .all(|&(_, t)| region.rank(t).is_some_and(|r| r < k));
                assert!(!forced);
            }
        }
    }

    #[test]
    fn rank_one_outputs_land_in_accepting_states() {
        let syn = run(GARDEN_GOAL, &garden());
        let t = syn.transducer.unwrap();
        let mut seen = false;
        for s in 0..t.num_states() {
            if t.rank(s) == 1 {
                seen = true;
                for (_, next) in t.successors(s) {
                    assert!(t.is_halting(next));
                }
            }
        }
        assert!(seen);
    }

    #[test]
    fn orchestrate_protocol() {
        let community = garden();
        let syn = run(GARDEN_GOAL, &community);
        let t = syn.transducer.as_ref().unwrap();
        let init = community.initial_configuration();
        assert_eq!(t.orchestrate(&[]), Err(ProtocolError::EmptyHistory));
        assert!(matches!(
            t.orchestrate(&[init.with(1, 1)]),
            Err(ProtocolError::InitialMismatch { .. })
        ));
        // clean on bot1 cannot move bot2
        assert!(matches!(
            t.orchestrate(&[init.clone(), init.with(1, 1)]),
            Err(ProtocolError::UnexpectedConfiguration { step: 1, .. })
        ));
        // drive to completion with bot1 always dropping to a1
        let mut orch = TransducerOrchestrator::new(t);
        orch.reset(&init).unwrap();
        let mut config = init.clone();
        let mut actions = Vec::new();
        for _ in 0..10 {
            match orch.decide() {
                Decision::Delegate { action, service } => {
                    let succ = community
                        .service(service)
                        .step_nondet(config.0[service], &action);
                    config = config.with(service, *succ.last().unwrap());
                    actions.push(action);
                    orch.observe(&config).unwrap();
                }
                Decision::Halt => break,
                Decision::Stuck => panic!("stuck"),
            }
        }
        assert_eq!(orch.decide(), Decision::Halt);
        assert!(community.is_final(&config));
        assert!(crate::ltlf::evaluate(
            &parse(GARDEN_GOAL).unwrap(),
            &actions,
            0
        ));
        assert_eq!(actions.last().map(String::as_str), Some("empty"));
        assert!(matches!(
            orch.observe(&config),
            Err(ProtocolError::NoPendingDelegation { .. })
        ));
    }

    #[test]
    fn transducer_json_round_trip() {
        let syn = run(GARDEN_GOAL, &garden());
        let t = syn.transducer.unwrap();
        let json = t.to_json();
        assert_eq!(json.outputs["0"].service, 1);
        assert_eq!(json.outputs["0"].action, "clean");
        let text = serde_json::to_string(&json).unwrap();
        let back: TransducerJson = serde_json::from_str(&text).unwrap();
        let rebuilt = Transducer::from_json(&back, syn.arena.state_name_table().to_vec()).unwrap();
        assert_eq!(rebuilt, t);
    }

    #[test]
    fn arena_dot_has_ranks() {
        let syn = run("a", &solo(&[("s0", "a", "s0")], &["s0"]));
        let dot = syn.arena.to_dot(Some(syn.region.ranks()));
        assert!(dot.contains("rank 0"));
        assert!(dot.contains("rank 1"));
    }

    #[test]
    fn arena_state_cap() {
        let nfa = Nfa::build(
            &parse(GARDEN_GOAL).unwrap(),
            garden().alphabet(),
            &NfaOptions::default(),
        )
        .unwrap();
        let dfa = ControllableDfa::new(nfa);
        let err = GameArena::build(&dfa, &garden(), &ArenaOptions { max_states: 3 }).unwrap_err();
        assert_eq!(err, SynthesisError::StateCap { cap: 3 });
    }
}
