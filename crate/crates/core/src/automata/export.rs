use std::fmt::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{ControllableDfa, Nfa};

/// Interchange form shared by the NFA and the controllable DFA.
///
/// NFA symbols are action names; controllable-DFA symbols are
/// `[action, target_state]` pairs. For the DFA only live transitions are
/// listed; every other `(state, symbol)` goes to `dead`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomatonJson {
    pub alphabet: Vec<Value>,
    pub states: Vec<String>,
    pub initial: usize,
    pub accepting: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dead: Option<usize>,
    pub transitions: Vec<TransitionJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionJson {
    pub from: usize,
    pub symbol: Value,
    pub to: usize,
}

impl Nfa {
    pub fn to_json(&self) -> AutomatonJson {
        AutomatonJson {
            alphabet: self.alphabet().iter().map(|a| json!(a)).collect(),
            states: (0..self.num_states())
                .map(|q| self.label(q).to_string())
                .collect(),
            initial: self.initial(),
            accepting: self.accepting_states().collect(),
            dead: None,
            transitions: self
                .transitions()
                .map(|(from, a, to)| TransitionJson {
                    from,
                    symbol: json!(self.alphabet()[a]),
                    to,
                })
                .collect(),
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph nfa {\n  rankdir=LR;\n  init [shape=point];\n");
        for q in 0..self.num_states() {
            let shape = if self.is_accepting(q) {
                "doublecircle"
            } else {
                "circle"
            };
            writeln!(
                out,
                "  q{q} [shape={shape}, label=\"{}\"];",
                escape(self.label(q))
            )
            .unwrap();
        }
        writeln!(out, "  init -> q{};", self.initial()).unwrap();
        for (from, a, to) in self.transitions() {
            writeln!(
                out,
                "  q{from} -> q{to} [label=\"{}\"];",
                escape(&self.alphabet()[a])
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }
}

impl ControllableDfa {
    pub fn to_json(&self) -> AutomatonJson {
        let nfa = self.nfa();
        let mut states: Vec<String> = (0..nfa.num_states())
            .map(|q| nfa.label(q).to_string())
            .collect();
        states.push("dead".into());
        let alphabet = nfa
            .alphabet()
            .iter()
            .flat_map(|a| (0..nfa.num_states()).map(move |q| json!([a, q])))
            .collect();
        let transitions = (0..nfa.num_states())
            .flat_map(|q| {
                self.live_symbols(q).map(move |s| TransitionJson {
                    from: q,
                    symbol: json!([nfa.alphabet()[s.action], s.target]),
                    to: s.target,
                })
            })
            .collect();
        AutomatonJson {
            alphabet,
            states,
            initial: self.initial(),
            accepting: nfa.accepting_states().collect(),
            dead: Some(self.dead_state()),
            transitions,
        }
    }

    pub fn to_dot(&self) -> String {
        let nfa = self.nfa();
        let mut out =
            String::from("digraph controllable_dfa {\n  rankdir=LR;\n  init [shape=point];\n");
        for q in 0..nfa.num_states() {
            let shape = if self.is_accepting(q) {
                "doublecircle"
            } else {
                "circle"
            };
            writeln!(
                out,
                "  q{q} [shape={shape}, label=\"{}\"];",
                escape(nfa.label(q))
            )
            .unwrap();
        }
        writeln!(out, "  init -> q{};", self.initial()).unwrap();
        for q in 0..nfa.num_states() {
            for s in self.live_symbols(q) {
                writeln!(
                    out,
                    "  q{q} -> q{} [label=\"({}, q{})\"];",
                    s.target,
                    escape(&nfa.alphabet()[s.action]),
                    s.target
                )
                .unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
