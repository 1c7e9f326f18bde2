use std::collections::BTreeSet;

use super::arena::{ArenaStateId, GameArena};

/// Least fixpoint of the controllable preimage seeded with the accepting
/// states, with per-state ranks and witnesses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WinningRegion {
    rank: Vec<Option<usize>>,
    witness: Vec<Option<usize>>,
    iterations: usize,
}

impl WinningRegion {
    pub fn is_winning(&self, s: ArenaStateId) -> bool {
        self.rank[s].is_some()
    }

    /// Least `k` with `s ∈ Win_k`.
    pub fn rank(&self, s: ArenaStateId) -> Option<usize> {
        self.rank[s]
    }

    pub fn ranks(&self) -> &[Option<usize>] {
        &self.rank
    }

    /// Index into `arena.moves(s)` of the move that forces progress from a
    /// state of rank `k + 1` into `Win_k`.
    pub fn witness(&self, s: ArenaStateId) -> Option<usize> {
        self.witness[s]
    }

    pub fn winning_states(&self) -> impl Iterator<Item = ArenaStateId> + '_ {
        (0..self.rank.len()).filter(|&s| self.rank[s].is_some())
    }

    pub fn len(&self) -> usize {
        self.rank.iter().filter(|r| r.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of preimage rounds run, the last (unproductive) one included.
    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

/// Least move of `s` whose outcomes are nonempty and all inside `target`.
fn forcing_move(arena: &GameArena, s: ArenaStateId, target: &[bool]) -> Option<usize> {
    arena
        .moves(s)
        .iter()
        .position(|m| !m.outcomes.is_empty() && m.outcomes.iter().all(|&(_, t)| target[t]))
}

/// `PreC(E)`: states with a move whose every environment response lands in
/// `E`, each paired with its least such move.
pub fn controllable_preimage(arena: &GameArena, target: &[bool]) -> Vec<(ArenaStateId, usize)> {
    (0..arena.num_states())
        .filter_map(|s| forcing_move(arena, s, target).map(|m| (s, m)))
        .collect()
}

/// Solves the reachability game level by level.
///
/// A state can first enter `Win_{k+1}` only if one of its successors entered
/// at level `k`, so each round only re-examines predecessors of the last
/// frontier.
pub fn solve_game(arena: &GameArena) -> WinningRegion {
    let n = arena.num_states();
    let preds = arena.predecessors();
    let mut rank = vec![None; n];
    let mut witness = vec![None; n];
    let mut won = vec![false; n];
    let mut frontier: Vec<ArenaStateId> = (0..n).filter(|&s| arena.is_accepting(s)).collect();
    for &s in &frontier {
        rank[s] = Some(0);
        won[s] = true;
    }
    let mut level = 0;
    let mut iterations = 0;
    while !frontier.is_empty() {
        iterations += 1;
        let candidates: BTreeSet<ArenaStateId> = frontier
            .iter()
            .flat_map(|&t| preds[t].iter().copied())
            .filter(|&s| !won[s])
            .collect();
        let entering: Vec<(ArenaStateId, usize)> = candidates
            .into_iter()
            .filter_map(|s| forcing_move(arena, s, &won).map(|m| (s, m)))
            .collect();
        level += 1;
        frontier = entering.iter().map(|&(s, _)| s).collect();
        for (s, m) in entering {
            rank[s] = Some(level);
            witness[s] = Some(m);
            won[s] = true;
        }
    }
    WinningRegion {
        rank,
        witness,
        iterations,
    }
}

/// Literal fixpoint `Win_{k+1} = Win_k ∪ PreC(Win_k)`, recomputing the full
/// preimage every round. Quadratic; kept as a cross-check for
/// [`solve_game`].
pub fn solve_game_naive(arena: &GameArena) -> WinningRegion {
    let n = arena.num_states();
    let mut rank = vec![None; n];
    let mut witness = vec![None; n];
    let mut won: Vec<bool> = (0..n).map(|s| arena.is_accepting(s)).collect();
    for s in 0..n {
        if won[s] {
            rank[s] = Some(0);
        }
    }
    let mut iterations = 0;
    loop {
        iterations += 1;
        let fresh: Vec<_> = controllable_preimage(arena, &won)
            .into_iter()
            .filter(|&(s, _)| !won[s])
            .collect();
        if fresh.is_empty() {
            break;
        }
        for (s, m) in fresh {
            rank[s] = Some(iterations);
            witness[s] = Some(m);
            won[s] = true;
        }
    }
    WinningRegion {
        rank,
        witness,
        iterations,
    }
}
