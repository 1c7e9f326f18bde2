use serde::{Deserialize, Serialize};

use super::{Nfa, StateId};

/// Controller symbol of the controllable DFA: an action together with the
/// NFA state the controller commits to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ControlSymbol {
    pub action: usize,
    pub target: StateId,
}

/// Deterministic lift of an [`Nfa`] over the alphabet `actions × states`.
///
/// Reading `(a, q')` in `q` moves to `q'` when `q'` is an `a`-successor of
/// `q` in the NFA, and to an absorbing non-accepting dead state otherwise.
/// States keep the NFA numbering; the dead state is the last index.
#[derive(Clone, Debug)]
pub struct ControllableDfa {
    nfa: Nfa,
}

impl ControllableDfa {
    pub fn new(nfa: Nfa) -> Self {
        ControllableDfa { nfa }
    }

    pub fn nfa(&self) -> &Nfa {
        &self.nfa
    }

    pub fn alphabet(&self) -> &[String] {
        self.nfa.alphabet()
    }

    pub fn action_index(&self, action: &str) -> Option<usize> {
        self.nfa.action_index(action)
    }

    /// NFA states plus the dead state.
    pub fn num_states(&self) -> usize {
        self.nfa.num_states() + 1
    }

    pub fn dead_state(&self) -> StateId {
        self.nfa.num_states()
    }

    pub fn initial(&self) -> StateId {
        self.nfa.initial()
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        q != self.dead_state() && self.nfa.is_accepting(q)
    }

    pub fn step(&self, q: StateId, symbol: ControlSymbol) -> StateId {
        let dead = self.dead_state();
        if q == dead || symbol.action >= self.alphabet().len() || symbol.target >= dead {
            return dead;
        }
        if self
            .nfa
            .successors(q, symbol.action)
            .binary_search(&symbol.target)
            .is_ok()
        {
            symbol.target
        } else {
            dead
        }
    }

    /// Symbols that do not lead to the dead state from `q`, in
    /// `(action, target)` order.
    pub fn live_symbols(&self, q: StateId) -> impl Iterator<Item = ControlSymbol> + '_ {
        let n = if q == self.dead_state() {
            0
        } else {
            self.alphabet().len()
        };
        (0..n).flat_map(move |action| {
            self.nfa
                .successors(q, action)
                .iter()
                .map(move |&target| ControlSymbol { action, target })
        })
    }

    pub fn run(&self, word: &[ControlSymbol]) -> StateId {
        word.iter().fold(self.initial(), |q, &s| self.step(q, s))
    }

    pub fn accepts(&self, word: &[ControlSymbol]) -> bool {
        self.is_accepting(self.run(word))
    }
}
