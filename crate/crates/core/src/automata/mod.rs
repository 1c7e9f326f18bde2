//! LTLf to NFA translation by progression, and the controllable DFA obtained
//! by letting the controller pick the NFA successor.

mod dfa;
mod export;
mod progression;

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::ltlf::{to_nnf, Formula};
use progression::{Clause, Closure};

pub use dfa::{ControlSymbol, ControllableDfa};
pub use export::AutomatonJson;

pub type StateId = usize;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AutomatonError {
    #[error("automaton exceeds the state cap of {cap} states")]
    StateCap { cap: usize },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NfaOptions {
    pub max_states: usize,
    /// Drop states from which no accepting state is reachable (the initial
    /// state is always kept).
    pub trim_non_coaccessible: bool,
}

impl Default for NfaOptions {
    fn default() -> Self {
        NfaOptions {
            max_states: 1_000_000,
            trim_non_coaccessible: false,
        }
    }
}

/// Nondeterministic automaton over action names.
///
/// State `0` is initial. Each state stands for a conjunction of pending
/// obligations; `label` renders it as a formula set.
#[derive(Clone, Debug)]
pub struct Nfa {
    alphabet: Vec<String>,
    labels: Vec<String>,
    accepting: Vec<bool>,
    /// `delta[q][a]` holds the sorted successors of `q` on action `a`.
    delta: Vec<Vec<Vec<StateId>>>,
    closure_size: usize,
}

impl Nfa {
    /// Translates `formula` over `alphabet` (the formula's own atoms are
    /// always included). The formula is put in negation normal form first.
    pub fn build<S: AsRef<str>>(
        formula: &Formula,
        alphabet: &[S],
        options: &NfaOptions,
    ) -> Result<Nfa, AutomatonError> {
        let nnf = to_nnf(formula);
        let mut names: BTreeSet<String> = alphabet.iter().map(|s| s.as_ref().to_string()).collect();
        names.extend(nnf.atoms());
        let alphabet: Vec<String> = names.into_iter().collect();
        let lookup: HashMap<&str, usize> = alphabet
            .iter()
            .enumerate()
            .map(|(i, a)| (a.as_str(), i))
            .collect();

        let mut closure = Closure::new();
        let root = closure.add(&nnf, &|name| lookup[name]);

        let mut index: HashMap<Clause, StateId> = HashMap::new();
        let mut clauses: Vec<Clause> = Vec::new();
        let mut delta: Vec<Vec<Vec<StateId>>> = Vec::new();
        let mut queue = VecDeque::new();

        let initial = vec![root];
        index.insert(initial.clone(), 0);
        clauses.push(initial);
        queue.push_back(0);
        while let Some(q) = queue.pop_front() {
            let mut row = Vec::with_capacity(alphabet.len());
            for a in 0..alphabet.len() {
                let clause = clauses[q].clone();
                let mut succ = Vec::new();
                for next in closure.progress_clause(&clause, a) {
                    let id = match index.get(&next) {
                        Some(&id) => id,
                        None => {
                            if clauses.len() >= options.max_states {
                                return Err(AutomatonError::StateCap {
                                    cap: options.max_states,
                                });
                            }
                            let id = clauses.len();
                            index.insert(next.clone(), id);
                            clauses.push(next);
                            queue.push_back(id);
                            id
                        }
                    };
                    succ.push(id);
                }
                succ.sort_unstable();
                succ.dedup();
                row.push(succ);
            }
            delta.push(row);
        }

        let nfa = Nfa {
            labels: clauses.iter().map(|c| closure.clause_label(c)).collect(),
            accepting: clauses.iter().map(|c| closure.clause_eps(c)).collect(),
            alphabet,
            delta,
            closure_size: closure.len(),
        };
        Ok(if options.trim_non_coaccessible {
            nfa.trimmed()
        } else {
            nfa
        })
    }

    fn trimmed(self) -> Nfa {
        let n = self.num_states();
        let mut alive = self.accepting.clone();
        let mut changed = true;
        while changed {
            changed = false;
            for q in 0..n {
                if !alive[q] && self.delta[q].iter().flatten().any(|&t| alive[t]) {
                    alive[q] = true;
                    changed = true;
                }
            }
        }
        alive[0] = true;
        // renumber in breadth-first order over surviving states
        let mut order = vec![usize::MAX; n];
        let mut kept = vec![0];
        order[0] = 0;
        let mut head = 0;
        while head < kept.len() {
            let q = kept[head];
            head += 1;
            for &t in self.delta[q].iter().flatten() {
                if alive[t] && order[t] == usize::MAX {
                    order[t] = kept.len();
                    kept.push(t);
                }
            }
        }
        let delta = kept
            .iter()
            .map(|&q| {
                self.delta[q]
                    .iter()
                    .map(|succ| {
                        let mut s: Vec<StateId> = succ
                            .iter()
                            .filter(|&&t| order[t] != usize::MAX)
                            .map(|&t| order[t])
                            .collect();
                        s.sort_unstable();
                        s
                    })
                    .collect()
            })
            .collect();
        Nfa {
            labels: kept.iter().map(|&q| self.labels[q].clone()).collect(),
            accepting: kept.iter().map(|&q| self.accepting[q]).collect(),
            alphabet: self.alphabet,
            delta,
            closure_size: self.closure_size,
        }
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn action_index(&self, action: &str) -> Option<usize> {
        self.alphabet
            .binary_search_by(|a| a.as_str().cmp(action))
            .ok()
    }

    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    pub fn initial(&self) -> StateId {
        0
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q]
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.num_states()).filter(|&q| self.accepting[q])
    }

    pub fn label(&self, q: StateId) -> &str {
        &self.labels[q]
    }

    /// Successors of `q` on the action with index `action`.
    pub fn successors(&self, q: StateId, action: usize) -> &[StateId] {
        &self.delta[q][action]
    }

    /// Number of closure entries the states are built from, including the
    /// two end-of-trace markers.
    pub fn closure_size(&self) -> usize {
        self.closure_size
    }

    /// All `(from, action, to)` triples in lexicographic order.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, usize, StateId)> + '_ {
        self.delta.iter().enumerate().flat_map(|(q, row)| {
            row.iter()
                .enumerate()
                .flat_map(move |(a, succ)| succ.iter().map(move |&t| (q, a, t)))
        })
    }

    /// Subset-simulation membership test.
    pub fn accepts<S: AsRef<str>>(&self, word: &[S]) -> Result<bool, AutomatonError> {
        let mut current = vec![false; self.num_states()];
        current[0] = true;
        for sym in word {
            let a = self
                .action_index(sym.as_ref())
                .ok_or_else(|| AutomatonError::UnknownSymbol(sym.as_ref().to_string()))?;
            let mut next = vec![false; self.num_states()];
            for (q, _) in current.iter().enumerate().filter(|(_, &on)| on) {
                for &t in &self.delta[q][a] {
                    next[t] = true;
                }
            }
            current = next;
        }
        Ok(current
            .iter()
            .zip(&self.accepting)
            .any(|(&on, &acc)| on && acc))
    }
}

/// Translation with default options, over the formula's own atoms.
pub fn ltlf_to_nfa(formula: &Formula) -> Result<Nfa, AutomatonError> {
    Nfa::build::<&str>(formula, &[], &NfaOptions::default())
}

pub fn nfa_accepts<S: AsRef<str>>(nfa: &Nfa, word: &[S]) -> Result<bool, AutomatonError> {
    nfa.accepts(word)
}

pub fn make_controllable_dfa(nfa: &Nfa) -> ControllableDfa {
    ControllableDfa::new(nfa.clone())
}
