//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use orchestra::ltlf::{evaluate, Formula};
use orchestra::services::{
    Community, Configuration, NondetCommunity, Service, StochasticCommunity, StochasticRow,
    StochasticService,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GARDEN_GOAL: &str = include_str!("../../examples/garden.ltlf");
pub const GARDEN_STOCHASTIC: &str = include_str!("../../examples/garden_bots.json");
pub const GARDEN_NONDET: &str = include_str!("../../examples/garden_bots_nondet.json");

pub fn garden_goal() -> Formula {
    orchestra::ltlf::parse(GARDEN_GOAL).unwrap()
}

pub fn garden() -> StochasticCommunity<f64> {
    orchestra::services::load_community(GARDEN_STOCHASTIC)
        .unwrap()
        .into_stochastic()
        .unwrap()
}

pub fn garden_nondet() -> NondetCommunity {
    orchestra::services::load_community(GARDEN_NONDET)
        .unwrap()
        .into_nondet()
        .unwrap()
}

pub fn random_formula(rng: &mut impl Rng, atoms: &[&str], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::atom(*atoms.choose(rng).unwrap()),
        };
    }
    let sub = |rng: &mut _| random_formula(rng, atoms, depth - 1);
    match rng.gen_range(0..11) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::next(sub(rng)),
        4 => Formula::weak_next(sub(rng)),
        5 => Formula::until(sub(rng), sub(rng)),
        6 => Formula::weak_until(sub(rng), sub(rng)),
        7 => Formula::eventually(sub(rng)),
        8 => Formula::always(sub(rng)),
        9 => Formula::implies(sub(rng), sub(rng)),
        _ => Formula::atom(*atoms.choose(rng).unwrap()),
    }
}

/// `n` distinct formulas over `a, b, c` of depth at most `max_depth`.
pub fn formula_pool(n: usize, max_depth: usize, seed: u64) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut pool = Vec::with_capacity(n);
    while pool.len() < n {
        let f = random_formula(&mut rng, &["a", "b", "c"], max_depth);
        if f.depth() <= max_depth && seen.insert(f.clone()) {
            pool.push(f);
        }
    }
    pool
}

/// Every word over `alphabet` of length at most `max_len`, shortest first.
pub fn all_words(alphabet: &[&str], max_len: usize) -> Vec<Vec<String>> {
    let mut words = vec![Vec::new()];
    let mut layer: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w| {
                alphabet.iter().map(move |a| {
                    let mut w = w.clone();
                    w.push(a.to_string());
                    w
                })
            })
            .collect();
        words.extend(layer.iter().cloned());
    }
    words
}

/// A small random synthesis problem with both a nondeterministic and a
/// stochastic reading of the same supports.
pub struct Instance {
    pub formula: Formula,
    pub nondet: NondetCommunity,
    pub stochastic: StochasticCommunity<f64>,
}

const STATE_NAMES: [&str; 4] = ["s0", "s1", "s2", "s3"];
const ACTIONS: [&str; 3] = ["a", "b", "c"];

pub fn random_instance(rng: &mut impl Rng, formula_depth: usize) -> Instance {
    loop {
        let n_services = rng.gen_range(1..=3);
        let mut nondet = Vec::new();
        let mut stochastic = Vec::new();
        for k in 0..n_services {
            let n_states = rng.gen_range(1..=4);
            let states = &STATE_NAMES[..n_states];
            let mut finals: Vec<&str> = states
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            if finals.is_empty() {
                finals.push(states[rng.gen_range(0..n_states)]);
            }
            let mut supports: Vec<(&str, &str, Vec<&str>)> = Vec::new();
            for &from in states {
                for &action in &ACTIONS {
                    if rng.gen_bool(0.45) {
                        let mut succ: Vec<&str> = states
                            .iter()
                            .copied()
                            .filter(|_| rng.gen_bool(0.3))
                            .collect();
                        if succ.is_empty() {
                            succ.push(states[rng.gen_range(0..n_states)]);
                        }
                        supports.push((from, action, succ));
                    }
                }
            }
            let name = format!("svc{}", k + 1);
            let nd: Vec<(&str, &str, &str)> = supports
                .iter()
                .flat_map(|(f, a, succ)| succ.iter().map(move |t| (*f, *a, *t)))
                .collect();
            nondet.push(Service::new(&name, states, "s0", &finals, &nd).unwrap());
            let dists: Vec<Vec<(&str, f64)>> = supports
                .iter()
                .map(|(_, _, succ)| {
                    let weights: Vec<f64> =
                        succ.iter().map(|_| rng.gen_range(1..=4) as f64).collect();
                    let total: f64 = weights.iter().sum();
                    succ.iter()
                        .zip(weights)
                        .map(|(t, w)| (*t, w / total))
                        .collect()
                })
                .collect();
            let costs: Vec<f64> = supports
                .iter()
                .map(|_| rng.gen_range(1..=10) as f64 / 2.0)
                .collect();
            let st: Vec<StochasticRow<'_, f64>> = supports
                .iter()
                .zip(&dists)
                .zip(&costs)
                .map(|(((f, a, _), d), c)| (*f, *a, *c, d.as_slice()))
                .collect();
            stochastic.push(StochasticService::new(&name, states, "s0", &finals, &st).unwrap());
        }
        let Ok(nondet) = Community::new(nondet) else {
            continue;
        };
        let stochastic = Community::new(stochastic).unwrap();
        let atoms: Vec<&str> = nondet.alphabet().iter().map(String::as_str).collect();
        let formula = random_formula(rng, &atoms, formula_depth);
        if formula.depth() <= formula_depth {
            return Instance {
                formula,
                nondet,
                stochastic,
            };
        }
    }
}

/// Game-tree search straight from the definitions: the controller wins from
/// a history if it is successful now, or if some delegation declared by the
/// delegated service wins for every successor within `depth - 1` steps.
/// Undeclared delegations lead to the absorbing error state and are never
/// winning, so they are skipped.
pub fn tree_search_wins(formula: &Formula, community: &NondetCommunity, depth: usize) -> bool {
    fn wins(
        formula: &Formula,
        community: &NondetCommunity,
        actions: &mut Vec<String>,
        config: &Configuration,
        depth: usize,
    ) -> bool {
        if community.is_final(config) && evaluate(formula, actions, 0) {
            return true;
        }
        if depth == 0 {
            return false;
        }
        for action in community.alphabet() {
            for (i, svc) in community.services().iter().enumerate() {
                let succ: Vec<_> = svc
                    .transitions()
                    .filter(|t| t.0 == config.0[i] && t.1 == action)
                    .map(|t| t.2)
                    .collect();
                if succ.is_empty() {
                    continue;
                }
                actions.push(action.clone());
                let all = succ
                    .iter()
                    .all(|&l| wins(formula, community, actions, &config.with(i, l), depth - 1));
                actions.pop();
                if all {
                    return true;
                }
            }
        }
        false
    }
    wins(
        formula,
        community,
        &mut Vec::new(),
        &community.initial_configuration(),
        depth,
    )
}
