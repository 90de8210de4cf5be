//! Word-building game between an opponent and a scheduler. The opponent moves
//! first; each move appends a nonempty finite word.

use serde::Serialize;
use thiserror::Error;

use crate::fairness::{FairnessError, WordPrefix};
use crate::graph::EdgeId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("strategy {0} returned an empty extension in round {1}")]
    EmptyMove(String, usize),
    #[error("rounds must be at least 1")]
    NoRounds,
    #[error(transparent)]
    Fairness(#[from] FairnessError),
}

pub trait GameStrategy {
    fn name(&self) -> String;

    /// A finite extension of `word`, played in round `round` (1-based).
    fn play(&mut self, word: &[EdgeId], round: usize) -> Vec<EdgeId>;
}

/// Plays one edge repeated `round` times: `c`, `cc`, `ccc`, …
#[derive(Clone, Debug)]
pub struct SingleEdgeFlood(pub EdgeId);

impl GameStrategy for SingleEdgeFlood {
    fn name(&self) -> String {
        format!("flood({})", self.0 .0)
    }

    fn play(&mut self, _: &[EdgeId], round: usize) -> Vec<EdgeId> {
        vec![self.0; round]
    }
}

/// Plays a single fixed edge each turn.
#[derive(Clone, Debug)]
pub struct FixedEdge(pub EdgeId);

impl GameStrategy for FixedEdge {
    fn name(&self) -> String {
        format!("fixed({})", self.0 .0)
    }

    fn play(&mut self, _: &[EdgeId], _: usize) -> Vec<EdgeId> {
        vec![self.0]
    }
}

/// Appends a complete (m,k) multi-window: `m` copies of all edges in order,
/// each padded with the first edge up to length `k`.
#[derive(Clone, Debug)]
pub struct MultiWindowStrategy {
    pub m: usize,
    pub k: usize,
    pub alphabet: usize,
}

impl GameStrategy for MultiWindowStrategy {
    fn name(&self) -> String {
        format!("multi-window({},{})", self.m, self.k)
    }

    fn play(&mut self, _: &[EdgeId], _: usize) -> Vec<EdgeId> {
        let mut window: Vec<EdgeId> = (0..self.alphabet).map(EdgeId).collect();
        while window.len() < self.k {
            window.push(EdgeId(0));
        }
        window.iter().copied().cycle().take(window.len() * self.m).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundDiagnostics {
    pub round: usize,
    pub opponent_move: usize,
    pub scheduler_move: usize,
    pub length: usize,
    pub multiwindows: usize,
    pub minimal_uniform_k: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameOutcome {
    pub word: Vec<EdgeId>,
    pub rounds: Vec<RoundDiagnostics>,
}

/// Alternate `rounds` rounds, opponent first, and scan the word with the
/// (m,k) multi-window analyzer after each round.
pub fn banach_mazur_game(
    opponent: &mut dyn GameStrategy,
    scheduler: &mut dyn GameStrategy,
    rounds: usize,
    alphabet: usize,
    m: usize,
    k: usize,
) -> Result<GameOutcome, GameError> {
    if rounds == 0 {
        return Err(GameError::NoRounds);
    }
    let mut word = Vec::new();
    let mut diagnostics = Vec::with_capacity(rounds);
    for round in 1..=rounds {
        let mut moves = [0; 2];
        for (slot, length) in moves.iter_mut().enumerate() {
            let player: &mut dyn GameStrategy = if slot == 0 { opponent } else { scheduler };
            let ext = player.play(&word, round);
            if ext.is_empty() {
                return Err(GameError::EmptyMove(player.name(), round));
            }
            *length = ext.len();
            word.extend(ext);
        }
        let prefix = WordPrefix::new(word.clone(), alphabet)?;
        diagnostics.push(RoundDiagnostics {
            round,
            opponent_move: moves[0],
            scheduler_move: moves[1],
            length: word.len(),
            multiwindows: prefix.find_multiwindows(m, k)?.len(),
            minimal_uniform_k: prefix.minimal_uniform_k(),
        });
    }
    Ok(GameOutcome { word, rounds: diagnostics })
}
