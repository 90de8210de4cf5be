//! Schedulers: producers of the action word driving a run. Some read the
//! live opinion state (the adversarial constructions); all are deterministic
//! given their parameters, seed and the states fed in.

mod game;

pub use game::{
    banach_mazur_game, FixedEdge, GameError, GameOutcome, GameStrategy, MultiWindowStrategy,
    RoundDiagnostics, SingleEdgeFlood,
};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fairness::{FairnessTag, WordPrefix};
use crate::graph::{EdgeId, InfluenceGraph};

pub const DEFAULT_GUARD: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchedulerError {
    #[error("counter-example loop did not terminate within guard ({guard} emissions)")]
    GuardExhausted { guard: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("graph does not have the required shape: {0}")]
    Topology(String),
    #[error("edge {0:?} is not in the graph")]
    UnknownEdge(EdgeId),
    #[error("pattern must be nonempty")]
    EmptyPattern,
    #[error("probability for edge {edge:?} must be positive and finite, got {value}")]
    BadProbability { edge: EdgeId, value: f64 },
}

/// Stateful producer of the next action.
pub trait Scheduler: Send {
    /// The next edge, given the state the transition will fire from.
    fn next(&mut self, state: &[f64]) -> Result<EdgeId, SchedulerError>;

    /// What the generator knows about its whole infinite word.
    fn tag(&self) -> FairnessTag;
}

impl<S: Scheduler + ?Sized> Scheduler for Box<S> {
    fn next(&mut self, state: &[f64]) -> Result<EdgeId, SchedulerError> {
        (**self).next(state)
    }

    fn tag(&self) -> FairnessTag {
        (**self).tag()
    }
}

fn check_edges(graph: &InfluenceGraph, word: &[EdgeId]) -> Result<(), SchedulerError> {
    match word.iter().find(|e| e.0 >= graph.edge_count()) {
        Some(e) => Err(SchedulerError::UnknownEdge(*e)),
        None => Ok(()),
    }
}

/// Exact uniform-k of the periodic word `pattern^ω`: every window of length at
/// most `|pattern|` already occurs in `pattern · pattern`.
pub fn cyclic_uniform_k(pattern: &[EdgeId], alphabet: usize) -> Option<usize> {
    let doubled: Vec<EdgeId> = pattern.iter().chain(pattern).copied().collect();
    let prefix = WordPrefix::new(doubled, alphabet).ok()?;
    prefix.minimal_uniform_k().filter(|&k| k <= pattern.len())
}

/// `pattern^ω`.
#[derive(Clone, Debug)]
pub struct Periodic {
    pattern: Vec<EdgeId>,
    cursor: usize,
    tag: FairnessTag,
}

impl Periodic {
    pub fn new(graph: &InfluenceGraph, pattern: Vec<EdgeId>) -> Result<Self, SchedulerError> {
        if pattern.is_empty() {
            return Err(SchedulerError::EmptyPattern);
        }
        check_edges(graph, &pattern)?;
        let tag = match cyclic_uniform_k(&pattern, graph.edge_count()) {
            Some(k) => FairnessTag::KFair(k),
            None => FairnessTag::NotStronglyFair,
        };
        Ok(Self { pattern, cursor: 0, tag })
    }

    pub fn from_labels(graph: &InfluenceGraph, labels: &[&str]) -> Result<Self, SchedulerError> {
        let pattern = graph.word(labels).map_err(|e| SchedulerError::Topology(e.to_string()))?;
        Self::new(graph, pattern)
    }

    pub fn pattern(&self) -> &[EdgeId] {
        &self.pattern
    }
}

impl Scheduler for Periodic {
    fn next(&mut self, _: &[f64]) -> Result<EdgeId, SchedulerError> {
        let e = self.pattern[self.cursor];
        self.cursor = (self.cursor + 1) % self.pattern.len();
        Ok(e)
    }

    fn tag(&self) -> FairnessTag {
        self.tag
    }
}

/// Independent draws from a fixed distribution over edges.
#[derive(Clone, Debug)]
pub struct RandomWord {
    support: Vec<EdgeId>,
    dist: WeightedIndex<f64>,
    rng: ChaCha8Rng,
    covers_all: bool,
}

impl RandomWord {
    /// `weights` are normalized; edges not listed are never drawn.
    pub fn new(
        graph: &InfluenceGraph,
        weights: &[(EdgeId, f64)],
        seed: u64,
    ) -> Result<Self, SchedulerError> {
        if weights.is_empty() {
            return Err(SchedulerError::EmptyPattern);
        }
        for &(edge, value) in weights {
            if edge.0 >= graph.edge_count() {
                return Err(SchedulerError::UnknownEdge(edge));
            }
            if !(value > 0.0 && value.is_finite()) {
                return Err(SchedulerError::BadProbability { edge, value });
            }
        }
        let support: Vec<EdgeId> = weights.iter().map(|w| w.0).collect();
        let dist = WeightedIndex::new(weights.iter().map(|w| w.1))
            .map_err(|e| SchedulerError::Precondition(e.to_string()))?;
        let mut seen = vec![false; graph.edge_count()];
        for e in &support {
            seen[e.0] = true;
        }
        Ok(Self {
            support,
            dist,
            rng: ChaCha8Rng::seed_from_u64(seed),
            covers_all: seen.iter().all(|s| *s),
        })
    }

    pub fn uniform(graph: &InfluenceGraph, seed: u64) -> Result<Self, SchedulerError> {
        let weights: Vec<(EdgeId, f64)> = graph.edge_ids().map(|e| (e, 1.0)).collect();
        Self::new(graph, &weights, seed)
    }
}

impl Scheduler for RandomWord {
    fn next(&mut self, _: &[f64]) -> Result<EdgeId, SchedulerError> {
        Ok(self.support[self.dist.sample(&mut self.rng)])
    }

    fn tag(&self) -> FairnessTag {
        if self.covers_all {
            FairnessTag::AlmostSurelyMBoundedFair
        } else {
            FairnessTag::NotStronglyFair
        }
    }
}

/// Edges named by label with fixed endpoints; used to check that an
/// adversarial scheduler is attached to the graph it was designed for.
fn require_labeled(
    graph: &InfluenceGraph,
    wanted: &[(&str, usize, usize)],
) -> Result<Vec<EdgeId>, SchedulerError> {
    wanted
        .iter()
        .map(|&(label, from, to)| {
            let id = graph
                .edge_by_label(label)
                .map_err(|e| SchedulerError::Topology(e.to_string()))?;
            let e = &graph.edges()[id.0];
            if (e.from.display(), e.to.display()) == (from, to) {
                Ok(id)
            } else {
                Err(SchedulerError::Topology(format!(
                    "edge {label} should be ({from},{to}), found ({},{})",
                    e.from, e.to
                )))
            }
        })
        .collect()
}

fn check_threshold_pair(lower: f64, upper: f64) -> Result<(), SchedulerError> {
    if lower.is_finite() && upper.is_finite() && 0.0 <= lower && lower < upper && upper <= 1.0 {
        Ok(())
    } else {
        Err(SchedulerError::Precondition(format!("need 0 <= L < U <= 1, got L={lower}, U={upper}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SeesawPhase {
    Start,
    PullDown,
    PullUp,
}

/// State-feedback word `(a⁺ b c⁺ d)^ω` on the three-agent line: repeat `a`
/// until agent 2 drops below `lower`, play `b`, repeat `c` until agent 2
/// rises above `upper`, play `d`. Agent 1 never reaches `lower` and agent 3
/// never falls to `upper`, although the word is strongly fair.
#[derive(Clone, Debug)]
pub struct Seesaw {
    lower: f64,
    upper: f64,
    guard: usize,
    edges: [EdgeId; 4],
    phase: SeesawPhase,
    run: usize,
    checked: bool,
}

impl Seesaw {
    pub fn new(
        graph: &InfluenceGraph,
        lower: f64,
        upper: f64,
        guard: usize,
    ) -> Result<Self, SchedulerError> {
        check_threshold_pair(lower, upper)?;
        if graph.agent_count() != 3 || graph.edge_count() != 4 {
            return Err(SchedulerError::Topology("expected three agents and four edges".into()));
        }
        let ids = require_labeled(graph, &[("a", 1, 2), ("b", 2, 1), ("c", 3, 2), ("d", 2, 3)])?;
        Ok(Self {
            lower,
            upper,
            guard: guard.max(1),
            edges: [ids[0], ids[1], ids[2], ids[3]],
            phase: SeesawPhase::Start,
            run: 0,
            checked: false,
        })
    }

    fn emit_in_loop(&mut self, edge: EdgeId) -> Result<EdgeId, SchedulerError> {
        self.run += 1;
        if self.run > self.guard {
            return Err(SchedulerError::GuardExhausted { guard: self.guard });
        }
        Ok(edge)
    }
}

impl Scheduler for Seesaw {
    fn next(&mut self, state: &[f64]) -> Result<EdgeId, SchedulerError> {
        let [a, b, c, d] = self.edges;
        if !self.checked {
            let (l, u) = (self.lower, self.upper);
            if !(state[0] < l && l < state[1] && state[1] < u && u < state[2]) {
                return Err(SchedulerError::Precondition(format!(
                    "need B1 < L < B2 < U < B3, got B={state:?}, L={l}, U={u}"
                )));
            }
            self.checked = true;
        }
        let b2 = state[1];
        match self.phase {
            SeesawPhase::Start => {
                self.phase = SeesawPhase::PullDown;
                self.run = 0;
                self.emit_in_loop(a)
            }
            SeesawPhase::PullDown if b2 >= self.lower => self.emit_in_loop(a),
            SeesawPhase::PullDown => {
                self.phase = SeesawPhase::PullUp;
                self.run = 0;
                Ok(b)
            }
            SeesawPhase::PullUp if self.run == 0 || b2 <= self.upper => self.emit_in_loop(c),
            SeesawPhase::PullUp => {
                self.phase = SeesawPhase::Start;
                Ok(d)
            }
        }
    }

    fn tag(&self) -> FairnessTag {
        FairnessTag::StronglyFair
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BlockPhase {
    Block(usize),
    PullDown,
    PullUp,
}

/// State-feedback word `(bfdace a* e*)^ω` on the four-agent line: the block
/// `bfdace` is a complete window that recurs forever, so the word is
/// 1-bounded fair, yet agents 1 and 4 stay on opposite sides of `[L, U]`.
#[derive(Clone, Debug)]
pub struct BlockedSeesaw {
    lower: f64,
    upper: f64,
    guard: usize,
    block: [EdgeId; 6],
    pull_down: EdgeId,
    pull_up: EdgeId,
    phase: BlockPhase,
    run: usize,
    checked: bool,
}

impl BlockedSeesaw {
    pub fn new(
        graph: &InfluenceGraph,
        lower: f64,
        upper: f64,
        guard: usize,
    ) -> Result<Self, SchedulerError> {
        check_threshold_pair(lower, upper)?;
        if graph.agent_count() != 4 || graph.edge_count() != 6 {
            return Err(SchedulerError::Topology("expected four agents and six edges".into()));
        }
        let ids = require_labeled(
            graph,
            &[("a", 1, 2), ("b", 2, 1), ("c", 3, 2), ("d", 2, 3), ("e", 4, 3), ("f", 3, 4)],
        )?;
        let [a, b, c, d, e, f] = [ids[0], ids[1], ids[2], ids[3], ids[4], ids[5]];
        Ok(Self {
            lower,
            upper,
            guard: guard.max(1),
            block: [b, f, d, a, c, e],
            pull_down: a,
            pull_up: e,
            phase: BlockPhase::Block(0),
            run: 0,
            checked: false,
        })
    }

    fn looped(&mut self, edge: EdgeId) -> Result<EdgeId, SchedulerError> {
        self.run += 1;
        if self.run > self.guard {
            return Err(SchedulerError::GuardExhausted { guard: self.guard });
        }
        Ok(edge)
    }
}

impl Scheduler for BlockedSeesaw {
    fn next(&mut self, state: &[f64]) -> Result<EdgeId, SchedulerError> {
        if !self.checked {
            let (l, u) = (self.lower, self.upper);
            if !(state[1] <= l && u <= state[2]) {
                return Err(SchedulerError::Precondition(format!(
                    "need B2 <= L < U <= B3, got B={state:?}, L={l}, U={u}"
                )));
            }
            self.checked = true;
        }
        loop {
            match self.phase {
                BlockPhase::Block(i) => {
                    self.phase = if i == 5 { BlockPhase::PullDown } else { BlockPhase::Block(i + 1) };
                    self.run = 0;
                    return Ok(self.block[i]);
                }
                BlockPhase::PullDown if state[1] >= self.lower => return self.looped(self.pull_down),
                BlockPhase::PullDown => {
                    self.phase = BlockPhase::PullUp;
                    self.run = 0;
                }
                BlockPhase::PullUp if state[2] <= self.upper => return self.looped(self.pull_up),
                BlockPhase::PullUp => self.phase = BlockPhase::Block(0),
            }
        }
    }

    fn tag(&self) -> FairnessTag {
        FairnessTag::MBoundedFair(1)
    }
}

/// `prefix · (e_1 … e_m)^ω` with the edges in label order: any finite word
/// extends to a bounded-fair one.
#[derive(Clone, Debug)]
pub struct Extended {
    prefix: Vec<EdgeId>,
    cycle: Vec<EdgeId>,
    position: usize,
}

impl Extended {
    pub fn new(graph: &InfluenceGraph, prefix: Vec<EdgeId>) -> Result<Self, SchedulerError> {
        check_edges(graph, &prefix)?;
        let mut cycle: Vec<EdgeId> = graph.edge_ids().collect();
        cycle.sort_by(|x, y| graph.label(*x).cmp(graph.label(*y)));
        if cycle.is_empty() {
            return Err(SchedulerError::EmptyPattern);
        }
        Ok(Self { prefix, cycle, position: 0 })
    }
}

impl Scheduler for Extended {
    fn next(&mut self, _: &[f64]) -> Result<EdgeId, SchedulerError> {
        let p = self.position;
        self.position += 1;
        Ok(match self.prefix.get(p) {
            Some(e) => *e,
            None => self.cycle[(p - self.prefix.len()) % self.cycle.len()],
        })
    }

    fn tag(&self) -> FairnessTag {
        FairnessTag::BoundedFair(self.prefix.len() + self.cycle.len())
    }
}

/// Blocks `x^n y z^n w` for `n = start, start+1, …`, e.g. `(aⁿbcⁿd)`.
#[derive(Clone, Debug)]
pub struct GrowingBlocks {
    letters: [EdgeId; 4],
    n: usize,
    offset: usize,
}

impl GrowingBlocks {
    pub fn new(
        graph: &InfluenceGraph,
        letters: [EdgeId; 4],
        start: usize,
    ) -> Result<Self, SchedulerError> {
        check_edges(graph, &letters)?;
        if start == 0 {
            return Err(SchedulerError::Precondition("blocks start at n >= 1".into()));
        }
        Ok(Self { letters, n: start, offset: 0 })
    }

    /// The first `len` letters, without any state.
    pub fn prefix(letters: [EdgeId; 4], start: usize, len: usize) -> Vec<EdgeId> {
        let mut word = Vec::with_capacity(len);
        let mut n = start;
        while word.len() < len {
            word.extend(std::iter::repeat_n(letters[0], n));
            word.push(letters[1]);
            word.extend(std::iter::repeat_n(letters[2], n));
            word.push(letters[3]);
            n += 1;
        }
        word.truncate(len);
        word
    }
}

impl Scheduler for GrowingBlocks {
    fn next(&mut self, _: &[f64]) -> Result<EdgeId, SchedulerError> {
        let n = self.n;
        let i = self.offset;
        let letter = if i < n {
            self.letters[0]
        } else if i == n {
            self.letters[1]
        } else if i <= 2 * n {
            self.letters[2]
        } else {
            self.letters[3]
        };
        self.offset += 1;
        if self.offset == 2 * n + 2 {
            self.offset = 0;
            self.n += 1;
        }
        Ok(letter)
    }

    fn tag(&self) -> FairnessTag {
        let distinct: std::collections::HashSet<_> = self.letters.iter().collect();
        if distinct.len() == 4 {
            FairnessTag::StronglyFair
        } else {
            FairnessTag::Unknown
        }
    }
}

/// Draw `len` edges from a scheduler that ignores the state.
pub fn take_word<S: Scheduler + ?Sized>(
    scheduler: &mut S,
    state: &[f64],
    len: usize,
) -> Result<Vec<EdgeId>, SchedulerError> {
    (0..len).map(|_| scheduler.next(state)).collect()
}
