use std::collections::{HashMap, VecDeque};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::SynthesisError;
use crate::automata::{ControllableDfa, StateId};
use crate::services::{Configuration, LocalState, NondetCommunity, ServiceModel};

pub type ArenaStateId = usize;

/// Controller move `(action, committed NFA state, service)`; `service` is a
/// 0-based community index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Delegation {
    pub action: usize,
    pub target: StateId,
    pub service: usize,
}

/// A controller move with every environment response: the delegated
/// service's landing state and the resulting arena state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Move {
    pub symbol: Delegation,
    pub outcomes: Vec<(LocalState, ArenaStateId)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ArenaState {
    pub nfa_state: StateId,
    pub config: Configuration,
}

#[derive(Clone, Debug)]
pub struct ArenaOptions {
    pub max_states: usize,
}

impl Default for ArenaOptions {
    fn default() -> Self {
        ArenaOptions {
            max_states: 10_000_000,
        }
    }
}

/// Reachable part of the composition of the controllable DFA with the
/// community, seen as a game: the controller picks a [`Delegation`], the
/// environment picks the delegated service's successor.
///
/// Configurations containing an error state are kept as terminal states
/// without moves; they can never become accepting.
#[derive(Clone, Debug)]
pub struct GameArena {
    alphabet: Vec<String>,
    nfa_labels: Vec<String>,
    service_names: Vec<String>,
    state_names: Vec<Vec<String>>,
    states: Vec<ArenaState>,
    accepting: Vec<bool>,
    moves: Vec<Vec<Move>>,
}

impl GameArena {
    pub fn build(
        dfa: &ControllableDfa,
        community: &NondetCommunity,
        options: &ArenaOptions,
    ) -> Result<Self, SynthesisError> {
        let alphabet = dfa.alphabet().to_vec();
        for a in community.alphabet() {
            if dfa.action_index(a).is_none() {
                return Err(SynthesisError::AlphabetMismatch(a.clone()));
            }
        }
        let nfa = dfa.nfa();
        let services = community.services();

        // successors[i][σ][a], error state included at index num_states()
        let successors: Vec<Vec<Vec<Vec<LocalState>>>> = services
            .iter()
            .map(|s| {
                (0..=s.num_states())
                    .map(|q| alphabet.iter().map(|a| s.step_nondet(q, a)).collect())
                    .collect()
            })
            .collect();

        let initial = ArenaState {
            nfa_state: dfa.initial(),
            config: community.initial_configuration(),
        };
        let mut arena = GameArena {
            alphabet,
            nfa_labels: (0..nfa.num_states())
                .map(|q| nfa.label(q).to_string())
                .collect(),
            service_names: services.iter().map(|s| s.name().to_string()).collect(),
            state_names: services
                .iter()
                .map(|s| {
                    (0..=s.num_states())
                        .map(|q| s.state_name(q).to_string())
                        .collect()
                })
                .collect(),
            states: Vec::new(),
            accepting: Vec::new(),
            moves: Vec::new(),
        };
        let mut index: HashMap<ArenaState, ArenaStateId> = HashMap::new();
        let mut queue = VecDeque::new();
        let mut intern =
            |arena: &mut GameArena, st: ArenaState, queue: &mut VecDeque<ArenaStateId>| {
                if let Some(&id) = index.get(&st) {
                    return Ok(id);
                }
                if arena.states.len() >= options.max_states {
                    return Err(SynthesisError::StateCap {
                        cap: options.max_states,
                    });
                }
                let id = arena.states.len();
                let accepting = dfa.is_accepting(st.nfa_state) && community.is_final(&st.config);
                index.insert(st.clone(), id);
                arena.states.push(st);
                arena.accepting.push(accepting);
                arena.moves.push(Vec::new());
                queue.push_back(id);
                Ok(id)
            };
        intern(&mut arena, initial, &mut queue)?;

        while let Some(id) = queue.pop_front() {
            let ArenaState {
                nfa_state: q,
                config,
            } = arena.states[id].clone();
            let errored = config
                .0
                .iter()
                .zip(services)
                .any(|(&q, s)| q >= s.num_states());
            if errored {
                continue;
            }
            let mut moves = Vec::new();
            for a in 0..arena.alphabet.len() {
                for &target in nfa.successors(q, a) {
                    for (i, succ_i) in successors.iter().enumerate() {
                        let mut outcomes = Vec::new();
                        for &landing in &succ_i[config.0[i]][a] {
                            let next = ArenaState {
                                nfa_state: target,
                                config: config.with(i, landing),
                            };
                            outcomes.push((landing, intern(&mut arena, next, &mut queue)?));
                        }
                        moves.push(Move {
                            symbol: Delegation {
                                action: a,
                                target,
                                service: i,
                            },
                            outcomes,
                        });
                    }
                }
            }
            arena.moves[id] = moves;
        }
        Ok(arena)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> ArenaStateId {
        0
    }

    pub fn state(&self, id: ArenaStateId) -> &ArenaState {
        &self.states[id]
    }

    pub fn is_accepting(&self, id: ArenaStateId) -> bool {
        self.accepting[id]
    }

    /// Moves of `id` sorted by `(action name, NFA state, service)`.
    pub fn moves(&self, id: ArenaStateId) -> &[Move] {
        &self.moves[id]
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

    /// Local state names per service, error state last.
    pub fn state_name_table(&self) -> &[Vec<String>] {
        &self.state_names
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

    pub fn label(&self, id: ArenaStateId) -> String {
        let st = &self.states[id];
        format!(
            "q{}|{}",
            st.nfa_state,
            self.config_names(&st.config).join(",")
        )
    }

    /// Predecessor lists, deduplicated and sorted.
    pub fn predecessors(&self) -> Vec<Vec<ArenaStateId>> {
        let mut preds = vec![Vec::new(); self.num_states()];
        for (s, moves) in self.moves.iter().enumerate() {
            for m in moves {
                for &(_, t) in &m.outcomes {
                    preds[t].push(s);
                }
            }
        }
        for p in &mut preds {
            p.sort_unstable();
            p.dedup();
        }
        preds
    }

    /// DOT rendering; `ranks` annotates states with their winning rank.
    pub fn to_dot(&self, ranks: Option<&[Option<usize>]>) -> String {
        let mut out = String::from("digraph arena {\n  rankdir=LR;\n  init [shape=point];\n");
        for id in 0..self.num_states() {
            let shape = if self.accepting[id] {
                "doublecircle"
            } else {
                "circle"
            };
            let rank = match ranks.and_then(|r| r[id]) {
                Some(k) => format!("\\nrank {k}"),
                None if ranks.is_some() => "\\nlosing".into(),
                None => String::new(),
            };
            writeln!(
                out,
                "  s{id} [shape={shape}, label=\"{}{rank}\"];",
                self.label(id)
            )
            .unwrap();
        }
        writeln!(out, "  init -> s{};", self.initial()).unwrap();
        for (id, moves) in self.moves.iter().enumerate() {
            for m in moves {
                for &(landing, t) in &m.outcomes {
                    writeln!(
                        out,
                        "  s{id} -> s{t} [label=\"{}, q{}, {} / {}\"];",
                        self.alphabet[m.symbol.action],
                        m.symbol.target,
                        m.symbol.service + 1,
                        self.state_names[m.symbol.service][landing]
                    )
                    .unwrap();
                }
            }
        }
        out.push_str("}\n");
        out
    }
}
