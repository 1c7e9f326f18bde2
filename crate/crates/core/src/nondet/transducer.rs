use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::arena::{ArenaStateId, GameArena};
use super::solve::WinningRegion;
use super::SynthesisError;
use crate::automata::StateId;
use crate::orchestrator::{Decision, Orchestrator, ProtocolError};
use crate::services::{Configuration, LocalState};

/// Output of the strategy in a transducer state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Output {
    pub action: String,
    pub nfa_state: StateId,
    /// 0-based service index.
    pub service: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct TState {
    nfa_state: StateId,
    config: Configuration,
    accepting: bool,
    rank: usize,
    output: Option<Output>,
    /// landing state of the delegated service -> successor
    next: BTreeMap<LocalState, usize>,
}

/// Finite-state strategy read off the winning region: it reads the
/// delegated service's landing state and emits the next delegation.
///
/// Only states reachable from the initial state under the strategy are kept;
/// they are renumbered in breadth-first order from `0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transducer {
    services: Vec<String>,
    state_names: Vec<Vec<String>>,
    states: Vec<TState>,
}

impl Transducer {
    /// Strategy from the witnesses of `region`; fails when the initial arena
    /// state is losing.
    pub fn extract(arena: &GameArena, region: &WinningRegion) -> Result<Self, SynthesisError> {
        if !region.is_winning(arena.initial()) {
            return Err(SynthesisError::Unrealizable {
                winning_states: region.winning_states().collect(),
            });
        }
        let mut ids: HashMap<ArenaStateId, usize> = HashMap::new();
        let mut order = vec![arena.initial()];
        ids.insert(arena.initial(), 0);
        let mut queue = VecDeque::from([arena.initial()]);
        let mut states = Vec::new();
        while let Some(s) = queue.pop_front() {
            let st = arena.state(s);
            let accepting = arena.is_accepting(s);
            let mut tstate = TState {
                nfa_state: st.nfa_state,
                config: st.config.clone(),
                accepting,
                rank: region
                    .rank(s)
                    .expect("strategy stays in the winning region"),
                output: None,
                next: BTreeMap::new(),
            };
            if !accepting {
                let m = &arena.moves(s)[region
                    .witness(s)
                    .expect("non-accepting winning state has a witness")];
                tstate.output = Some(Output {
                    action: arena.action_name(m.symbol.action).to_string(),
                    nfa_state: m.symbol.target,
                    service: m.symbol.service,
                });
                for &(landing, t) in &m.outcomes {
                    let next = *ids.entry(t).or_insert_with(|| {
                        order.push(t);
                        queue.push_back(t);
                        order.len() - 1
                    });
                    tstate.next.insert(landing, next);
                }
            }
            states.push(tstate);
        }
        let state_names = arena.state_name_table().to_vec();
        Ok(Transducer {
            services: arena.service_names().to_vec(),
            state_names,
            states,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn is_halting(&self, t: usize) -> bool {
        self.states[t].accepting
    }

    pub fn output(&self, t: usize) -> Option<&Output> {
        self.states[t].output.as_ref()
    }

    pub fn configuration(&self, t: usize) -> &Configuration {
        &self.states[t].config
    }

    pub fn nfa_state(&self, t: usize) -> StateId {
        self.states[t].nfa_state
    }

    /// Winning rank of the arena state behind `t`; every run from `t` halts
    /// within this many steps.
    pub fn rank(&self, t: usize) -> usize {
        self.states[t].rank
    }

    /// Transducer transition on the delegated service's landing state.
    pub fn step(&self, t: usize, landing: LocalState) -> Option<usize> {
        self.states[t].next.get(&landing).copied()
    }

    pub fn successors(&self, t: usize) -> impl Iterator<Item = (LocalState, usize)> + '_ {
        self.states[t].next.iter().map(|(&l, &n)| (l, n))
    }

    fn describe(&self, config: &Configuration) -> String {
        let names: Vec<&str> = config
            .0
            .iter()
            .enumerate()
            .map(|(i, &q)| {
                self.state_names
                    .get(i)
                    .and_then(|n| n.get(q))
                    .map(String::as_str)
                    .unwrap_or("?")
            })
            .collect();
        format!("({})", names.join(", "))
    }

    /// Replays a history and returns the strategy's answer.
    pub fn orchestrate(&self, history: &[Configuration]) -> Result<Decision, ProtocolError> {
        TransducerOrchestrator::new(self).replay(history)
    }

    pub fn to_json(&self) -> TransducerJson {
        TransducerJson {
            services: self.services.clone(),
            states: self
                .states
                .iter()
                .enumerate()
                .map(|(id, s)| TransducerStateJson {
                    id,
                    nfa_state: s.nfa_state,
                    config: s
                        .config
                        .0
                        .iter()
                        .enumerate()
                        .map(|(i, &q)| self.state_names[i][q].clone())
                        .collect(),
                    halting: s.accepting,
                    rank: s.rank,
                })
                .collect(),
            initial: 0,
            outputs: self
                .states
                .iter()
                .enumerate()
                .filter_map(|(id, s)| {
                    s.output.as_ref().map(|o| {
                        (
                            id.to_string(),
                            OutputJson {
                                action: o.action.clone(),
                                nfa_state: o.nfa_state,
                                service: o.service + 1,
                            },
                        )
                    })
                })
                .collect(),
            transitions: self
                .states
                .iter()
                .enumerate()
                .flat_map(|(id, s)| {
                    let service = s.output.as_ref().map(|o| o.service).unwrap_or(0);
                    s.next
                        .iter()
                        .map(move |(&landing, &to)| (id, service, landing, to))
                })
                .map(|(from, service, landing, to)| TransitionJson {
                    from,
                    input: self.state_names[service][landing].clone(),
                    to,
                })
                .collect(),
        }
    }

    /// Rebuilds a transducer from its JSON form. `state_names[i]` lists the
    /// local state names of service `i`, error state last.
    pub fn from_json(json: &TransducerJson, state_names: Vec<Vec<String>>) -> Result<Self, String> {
        let lookup = |i: usize, name: &str| -> Result<LocalState, String> {
            state_names
                .get(i)
                .and_then(|names| names.iter().position(|n| n == name))
                .ok_or_else(|| format!("unknown state `{name}` for service {}", i + 1))
        };
        if json.services.len() != state_names.len() {
            return Err("service count does not match the community".into());
        }
        if json.initial != 0 {
            return Err("initial transducer state must be 0".into());
        }
        let mut states = Vec::with_capacity(json.states.len());
        for (k, s) in json.states.iter().enumerate() {
            if s.id != k {
                return Err(format!(
                    "state ids must be dense, found {} at position {k}",
                    s.id
                ));
            }
            if s.config.len() != state_names.len() {
                return Err(format!("state {k}: configuration has the wrong length"));
            }
            let config = s
                .config
                .iter()
                .enumerate()
                .map(|(i, n)| lookup(i, n))
                .collect::<Result<Vec<_>, _>>()?;
            let output = match json.outputs.get(&k.to_string()) {
                Some(o) if o.service >= 1 && o.service <= state_names.len() => Some(Output {
                    action: o.action.clone(),
                    nfa_state: o.nfa_state,
                    service: o.service - 1,
                }),
                Some(o) => {
                    return Err(format!(
                        "state {k}: service index {} out of range",
                        o.service
                    ))
                }
                None => None,
            };
            states.push(TState {
                nfa_state: s.nfa_state,
                config: Configuration(config),
                accepting: s.halting,
                rank: s.rank,
                output,
                next: BTreeMap::new(),
            });
        }
        for t in &json.transitions {
            let service = states
                .get(t.from)
                .and_then(|s| s.output.as_ref())
                .map(|o| o.service)
                .ok_or_else(|| format!("transition from state {} without output", t.from))?;
            if t.to >= states.len() {
                return Err(format!("transition to unknown state {}", t.to));
            }
            let landing = lookup(service, &t.input)?;
            states[t.from].next.insert(landing, t.to);
        }
        Ok(Transducer {
            services: json.services.clone(),
            state_names,
            states,
        })
    }
}

/// Serialized transducer. Service indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransducerJson {
    pub services: Vec<String>,
    pub states: Vec<TransducerStateJson>,
    pub initial: usize,
    pub outputs: BTreeMap<String, OutputJson>,
    pub transitions: Vec<TransitionJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransducerStateJson {
    pub id: usize,
    pub nfa_state: StateId,
    pub config: Vec<String>,
    pub halting: bool,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputJson {
    pub action: String,
    pub nfa_state: StateId,
    pub service: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionJson {
    pub from: usize,
    pub input: String,
    pub to: usize,
}

/// Runs a [`Transducer`] as an [`Orchestrator`].
#[derive(Clone, Debug)]
pub struct TransducerOrchestrator<'a> {
    transducer: &'a Transducer,
    current: usize,
    steps: usize,
}

impl<'a> TransducerOrchestrator<'a> {
    pub fn new(transducer: &'a Transducer) -> Self {
        TransducerOrchestrator {
            transducer,
            current: 0,
            steps: 0,
        }
    }

    pub fn current_state(&self) -> usize {
        self.current
    }
}

impl Orchestrator for TransducerOrchestrator<'_> {
    fn reset(&mut self, initial: &Configuration) -> Result<(), ProtocolError> {
        let t = self.transducer;
        if t.configuration(0) != initial {
            return Err(ProtocolError::InitialMismatch {
                expected: t.describe(t.configuration(0)),
                found: t.describe(initial),
            });
        }
        self.current = 0;
        self.steps = 0;
        Ok(())
    }

    fn observe(&mut self, next: &Configuration) -> Result<(), ProtocolError> {
        let t = self.transducer;
        self.steps += 1;
        let output = t
            .output(self.current)
            .ok_or(ProtocolError::NoPendingDelegation { step: self.steps })?;
        let landing = next.0.get(output.service).copied();
        let expected = landing.map(|l| t.configuration(self.current).with(output.service, l));
        match (landing.and_then(|l| t.step(self.current, l)), expected) {
            (Some(succ), Some(exp)) if exp == *next => {
                self.current = succ;
                Ok(())
            }
            _ => Err(ProtocolError::UnexpectedConfiguration {
                step: self.steps,
                found: t.describe(next),
            }),
        }
    }

    fn decide(&self) -> Decision {
        let t = self.transducer;
        if t.is_halting(self.current) {
            return Decision::Halt;
        }
        match t.output(self.current) {
            Some(o) => Decision::Delegate {
                action: o.action.clone(),
                service: o.service,
            },
            None => Decision::Stuck,
        }
    }
}
