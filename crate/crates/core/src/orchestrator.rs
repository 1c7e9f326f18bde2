//! The orchestrator interface: a function from configuration histories to
//! delegations, implemented incrementally.

use serde::Serialize;

use crate::services::Configuration;

/// What the orchestrator asks for next.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decision {
    /// Run `action` on the service with 0-based index `service`.
    Delegate { action: String, service: usize },
    /// The goal is reached; no further delegation.
    Halt,
    /// The orchestrator has no move (only possible outside the winning or
    /// positive-probability region).
    Stuck,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("empty history")]
    EmptyHistory,
    #[error("history starts at {found}, expected the initial configuration {expected}")]
    InitialMismatch { expected: String, found: String },
    #[error("step {step}: configuration {found} is not a possible outcome of the last delegation")]
    UnexpectedConfiguration { step: usize, found: String },
    #[error("step {step}: configuration observed after the orchestrator halted or got stuck")]
    NoPendingDelegation { step: usize },
}

/// Incremental form of an orchestrator `γ : (Σ1 × … × Σn)* → A × {1..n}`.
///
/// `reset` starts a new history at its first configuration, `observe`
/// appends one configuration, and `decide` is `γ` applied to the history so
/// far.
pub trait Orchestrator {
    fn reset(&mut self, initial: &Configuration) -> Result<(), ProtocolError>;
    fn observe(&mut self, next: &Configuration) -> Result<(), ProtocolError>;
    fn decide(&self) -> Decision;

    /// `γ(history)`, replaying from scratch.
    fn replay(&mut self, history: &[Configuration]) -> Result<Decision, ProtocolError> {
        let (first, rest) = history.split_first().ok_or(ProtocolError::EmptyHistory)?;
        self.reset(first)?;
        for c in rest {
            self.observe(c)?;
        }
        Ok(self.decide())
    }
}
