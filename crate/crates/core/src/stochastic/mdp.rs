use std::collections::{HashMap, VecDeque};
use std::fmt::Write;

use crate::automata::{ControllableDfa, StateId};
use crate::nondet::Delegation;
use crate::num::Scalar;
use crate::services::{Configuration, LocalState, ServiceModel, StochasticCommunity};

use super::StochasticError;

pub type MdpStateId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MdpState {
    pub nfa_state: StateId,
    pub config: Configuration,
}

/// An available action `(a, q′, i)` of an MDP state with its cost and
/// distribution. Outcomes are `(landing state of service i, successor,
/// probability)`, sorted by landing state.
#[derive(Clone, Debug, PartialEq)]
pub struct MdpAction<T> {
    pub symbol: Delegation,
    pub cost: T,
    pub outcomes: Vec<(LocalState, MdpStateId, T)>,
}

#[derive(Clone, Debug)]
pub struct MdpOptions {
    pub max_states: usize,
}

impl Default for MdpOptions {
    fn default() -> Self {
        MdpOptions {
            max_states: 10_000_000,
        }
    }
}

/// Reachable part of the product of the controllable DFA with a stochastic
/// community.
///
/// An action `(a, q′, i)` is available only when `q′` is an NFA successor
/// under `a` and service `i` declares `a` in its current state. Target states
/// keep their actions; solvers treat them as absorbing.
#[derive(Clone, Debug)]
pub struct CompositionMdp<T> {
    alphabet: Vec<String>,
    nfa_labels: Vec<String>,
    service_names: Vec<String>,
    state_names: Vec<Vec<String>>,
    states: Vec<MdpState>,
    target: Vec<bool>,
    actions: Vec<Vec<MdpAction<T>>>,
}

impl<T: Scalar> CompositionMdp<T> {
    pub fn build(
        dfa: &ControllableDfa,
        community: &StochasticCommunity<T>,
        options: &MdpOptions,
    ) -> Result<Self, StochasticError> {
        for a in community.alphabet() {
            if dfa.action_index(a).is_none() {
                return Err(StochasticError::AlphabetMismatch(a.clone()));
            }
        }
        let nfa = dfa.nfa();
        let services = community.services();
        let mut mdp = CompositionMdp {
            alphabet: dfa.alphabet().to_vec(),
            nfa_labels: (0..nfa.num_states())
                .map(|q| nfa.label(q).to_string())
                .collect(),
            service_names: services.iter().map(|s| s.name().to_string()).collect(),
            state_names: services
                .iter()
                .map(|s| {
                    (0..s.num_states())
                        .map(|q| s.state_name(q).to_string())
                        .collect()
                })
                .collect(),
            states: Vec::new(),
            target: Vec::new(),
            actions: Vec::new(),
        };
        let mut index: HashMap<MdpState, MdpStateId> = HashMap::new();
        let mut queue = VecDeque::new();
        let mut intern =
            |mdp: &mut CompositionMdp<T>, st: MdpState, queue: &mut VecDeque<MdpStateId>| {
                if let Some(&id) = index.get(&st) {
                    return Ok(id);
                }
                if mdp.states.len() >= options.max_states {
                    return Err(StochasticError::StateCap {
                        cap: options.max_states,
                    });
                }
                let id = mdp.states.len();
                mdp.target
                    .push(dfa.is_accepting(st.nfa_state) && community.is_final(&st.config));
                index.insert(st.clone(), id);
                mdp.states.push(st);
                mdp.actions.push(Vec::new());
                queue.push_back(id);
                Ok(id)
            };
        intern(
            &mut mdp,
            MdpState {
                nfa_state: dfa.initial(),
                config: community.initial_configuration(),
            },
            &mut queue,
        )?;

        while let Some(id) = queue.pop_front() {
            let MdpState {
                nfa_state: q,
                config,
            } = mdp.states[id].clone();
            let mut actions = Vec::new();
            for a in 0..mdp.alphabet.len() {
                for &target in nfa.successors(q, a) {
                    for (i, service) in services.iter().enumerate() {
                        let Some(tr) = service.transition(config.0[i], &mdp.alphabet[a]) else {
                            continue;
                        };
                        let mut outcomes = Vec::with_capacity(tr.distribution.len());
                        for &(landing, p) in &tr.distribution {
                            let next = MdpState {
                                nfa_state: target,
                                config: config.with(i, landing),
                            };
                            outcomes.push((landing, intern(&mut mdp, next, &mut queue)?, p));
                        }
                        actions.push(MdpAction {
                            symbol: Delegation {
                                action: a,
                                target,
                                service: i,
                            },
                            cost: tr.cost,
                            outcomes,
                        });
                    }
                }
            }
            mdp.actions[id] = actions;
        }
        Ok(mdp)
    }
}

impl<T> CompositionMdp<T> {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.iter().map(Vec::len).sum()
    }

    pub fn initial(&self) -> MdpStateId {
        0
    }

    pub fn state(&self, s: MdpStateId) -> &MdpState {
        &self.states[s]
    }

    pub fn is_target(&self, s: MdpStateId) -> bool {
        self.target[s]
    }

    pub fn targets(&self) -> &[bool] {
        &self.target
    }

    /// Available actions of `s`, sorted by `(action name, q′, service)`.
    pub fn actions(&self, s: MdpStateId) -> &[MdpAction<T>] {
        &self.actions[s]
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn action_name(&self, action: usize) -> &str {
        &self.alphabet[action]
    }

    pub fn service_names(&self) -> &[String] {
        &self.service_names
    }

    pub fn local_state_name(&self, service: usize, state: LocalState) -> &str {
        &self.state_names[service][state]
    }

    pub fn try_local_state_name(&self, service: usize, state: LocalState) -> Option<&str> {
        self.state_names
            .get(service)?
            .get(state)
            .map(String::as_str)
    }

    pub fn config_names(&self, config: &Configuration) -> Vec<String> {
        config
            .0
            .iter()
            .enumerate()
            .map(|(i, &q)| self.state_names[i][q].clone())
            .collect()
    }

    pub fn nfa_label(&self, q: StateId) -> &str {
        &self.nfa_labels[q]
    }

    /// `q{n}|σ1,…,σn`; unique per state.
    pub fn label(&self, s: MdpStateId) -> String {
        let st = &self.states[s];
        format!(
            "q{}|{}",
            st.nfa_state,
            self.config_names(&st.config).join(",")
        )
    }

    pub fn state_by_label(&self) -> HashMap<String, MdpStateId> {
        (0..self.num_states()).map(|s| (self.label(s), s)).collect()
    }

    /// Index into `actions(s)` of the action with the given symbol.
    pub fn find_action(&self, s: MdpStateId, symbol: Delegation) -> Option<usize> {
        self.actions[s].iter().position(|a| a.symbol == symbol)
    }

    /// Successor of `s` under action `action` when the delegated service
    /// lands in `landing`, with its probability.
    pub fn successor(
        &self,
        s: MdpStateId,
        action: usize,
        landing: LocalState,
    ) -> Option<(MdpStateId, &T)> {
        self.actions[s][action]
            .outcomes
            .iter()
            .find(|o| o.0 == landing)
            .map(|(_, t, p)| (*t, p))
    }
}

impl<T: Scalar> CompositionMdp<T> {
    /// Product of `P′` factors along `(state, action index, successor)`
    /// steps; `None` when a step is not a transition of the MDP.
    pub fn path_probability(&self, path: &[(MdpStateId, usize, MdpStateId)]) -> Option<T> {
        let mut prob = T::one();
        for &(s, a, t) in path {
            let action = self.actions.get(s)?.get(a)?;
            let p = action.outcomes.iter().find(|o| o.1 == t)?.2;
            prob = prob * p;
        }
        Some(prob)
    }

    /// DOT rendering; `values` annotates states (e.g. with `p*`).
    pub fn to_dot(&self, values: Option<&[T]>) -> String {
        let mut out = String::from("digraph mdp {\n  rankdir=LR;\n  init [shape=point];\n");
        for s in 0..self.num_states() {
            let shape = if self.target[s] {
                "doublecircle"
            } else {
                "circle"
            };
            let value = values
                .map(|v| format!("\\n{:.6}", v[s].to_f64_lossy()))
                .unwrap_or_default();
            writeln!(
                out,
                "  s{s} [shape={shape}, label=\"{}{value}\"];",
                self.label(s)
            )
            .unwrap();
        }
        writeln!(out, "  init -> s{};", self.initial()).unwrap();
        for (s, actions) in self.actions.iter().enumerate() {
            for a in actions {
                for &(_, t, p) in &a.outcomes {
                    writeln!(
                        out,
                        "  s{s} -> s{t} [label=\"{}, q{}, {} : {} / {}\"];",
                        self.alphabet[a.symbol.action],
                        a.symbol.target,
                        a.symbol.service + 1,
                        p,
                        a.cost
                    )
                    .unwrap();
                }
            }
        }
        out.push_str("}\n");
        out
    }
}
