//! Orchestrator synthesis for service communities driven by LTLf goals.

pub mod automata;
pub mod cli;
pub mod ltlf;
pub mod nondet;
pub mod num;
pub mod orchestrator;
pub mod services;
pub mod simulation;
pub mod stochastic;

pub type StochasticCommunity64 = services::StochasticCommunity<f64>;
pub type StochasticCommunity32 = services::StochasticCommunity<f32>;
pub type CompositionMdp64 = stochastic::CompositionMdp<f64>;
pub type CompositionMdp32 = stochastic::CompositionMdp<f32>;
pub type LexSolution64 = stochastic::LexSolution<f64>;
pub type LexSolution32 = stochastic::LexSolution<f32>;
pub type ExecutionTrace64 = simulation::ExecutionTrace<f64>;
