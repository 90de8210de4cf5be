//! Finite-prefix fairness diagnostics: window completeness, per-edge gaps,
//! (m,k) multi-windows and their density, plus the witness words that
//! separate the fairness classes.
//!
//! Fairness is a property of infinite words; everything here is a
//! necessary-condition check on a prefix with an explicit horizon.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{EdgeId, InfluenceGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FairnessError {
    #[error("edge {edge:?} at position {position} is outside an alphabet of {alphabet} edges")]
    ForeignEdge { position: usize, edge: EdgeId, alphabet: usize },
    #[error("window [{start}, {start}+{k}) exceeds prefix length {len}")]
    WindowOutOfRange { start: usize, k: usize, len: usize },
    #[error("horizon G = {g} is shorter than m*k = {mk}")]
    HorizonTooShort { g: usize, mk: usize },
    #[error("parameter {0} must be at least 1")]
    ZeroParameter(&'static str),
}

/// What a scheduler knows about its own infinite word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FairnessTag {
    StronglyFair,
    KFair(usize),
    BoundedFair(usize),
    MKFair(usize, usize),
    MBoundedFair(usize),
    /// m-bounded fair for every m with probability one; not a sure property.
    AlmostSurelyMBoundedFair,
    /// Some edge never occurs.
    NotStronglyFair,
    Unknown,
}

impl FairnessTag {
    /// Whether every word carrying `self` also satisfies `other`.
    pub fn implies(&self, other: &FairnessTag) -> bool {
        use FairnessTag::*;
        if self == other || *other == Unknown {
            return true;
        }
        match (*self, *other) {
            (KFair(k) | BoundedFair(k), KFair(j) | BoundedFair(j)) => k <= j,
            (KFair(k) | BoundedFair(k), MKFair(_, j)) => k <= j,
            (KFair(_) | BoundedFair(_), MBoundedFair(_) | StronglyFair) => true,
            (MKFair(m, k), MKFair(n, j)) => k == j && n <= m,
            (MKFair(m, _), MBoundedFair(n)) => n <= m,
            (MBoundedFair(m), MBoundedFair(n)) => n <= m,
            (MKFair(..) | MBoundedFair(_), StronglyFair) => true,
            _ => false,
        }
    }
}

/// A finite word over the edges `0..alphabet`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordPrefix {
    edges: Vec<EdgeId>,
    alphabet: usize,
}

impl WordPrefix {
    pub fn new(edges: Vec<EdgeId>, alphabet: usize) -> Result<Self, FairnessError> {
        if let Some((position, &edge)) = edges.iter().enumerate().find(|(_, e)| e.0 >= alphabet) {
            return Err(FairnessError::ForeignEdge { position, edge, alphabet });
        }
        Ok(Self { edges, alphabet })
    }

    pub fn for_graph(edges: Vec<EdgeId>, graph: &InfluenceGraph) -> Result<Self, FairnessError> {
        Self::new(edges, graph.edge_count())
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// The first `len` letters.
    pub fn truncated(&self, len: usize) -> WordPrefix {
        Self { edges: self.edges[..len.min(self.edges.len())].to_vec(), alphabet: self.alphabet }
    }

    pub fn window_complete(&self, start: usize, k: usize) -> Result<bool, FairnessError> {
        let len = self.edges.len();
        if start.checked_add(k).is_none_or(|end| end > len) {
            return Err(FairnessError::WindowOutOfRange { start, k, len });
        }
        if k < self.alphabet {
            return Ok(false);
        }
        let mut seen = vec![false; self.alphabet];
        let mut distinct = 0;
        for e in &self.edges[start..start + k] {
            if !seen[e.0] {
                seen[e.0] = true;
                distinct += 1;
            }
        }
        Ok(distinct == self.alphabet)
    }

    /// For each start `s`, the length of the shortest complete window
    /// beginning at `s` (`None` when the rest of the prefix is incomplete).
    fn shortest_complete_from(&self) -> Vec<Option<usize>> {
        let n = self.edges.len();
        let mut out = vec![None; n];
        if self.alphabet == 0 {
            return vec![Some(0); n];
        }
        let mut counts = vec![0usize; self.alphabet];
        let mut distinct = 0;
        let mut end = 0;
        for (start, slot) in out.iter_mut().enumerate() {
            while distinct < self.alphabet && end < n {
                let e = self.edges[end].0;
                if counts[e] == 0 {
                    distinct += 1;
                }
                counts[e] += 1;
                end += 1;
            }
            if distinct == self.alphabet {
                *slot = Some(end - start);
            }
            let e = self.edges[start].0;
            counts[e] -= 1;
            if counts[e] == 0 {
                distinct -= 1;
            }
        }
        out
    }

    /// Smallest k with every k-window of the prefix complete; `None` when even
    /// the whole prefix misses an edge. Monotone in k, so one pass suffices.
    pub fn minimal_uniform_k(&self) -> Option<usize> {
        let n = self.edges.len();
        if n < self.alphabet || n == 0 {
            return None;
        }
        // need[x] = longest shortest-complete-window over starts 0..=x
        let shortest = self.shortest_complete_from();
        let mut need = Vec::with_capacity(n);
        let mut worst = 0usize;
        for s in &shortest {
            worst = worst.max(s.unwrap_or(usize::MAX));
            need.push(worst);
        }
        (self.alphabet.max(1)..=n).find(|&k| need[n - k] <= k)
    }

    /// `minimal_uniform_k` when it is at most `cap`.
    pub fn minimal_uniform_k_capped(&self, cap: usize) -> Option<usize> {
        self.minimal_uniform_k().filter(|&k| k <= cap)
    }

    /// Per edge, the longest run between consecutive occurrences, with virtual
    /// occurrences at −1 and at the prefix end. Absent edges get `len + 1`.
    pub fn max_edge_gaps(&self) -> Vec<usize> {
        let mut last = vec![-1i64; self.alphabet];
        let mut gap = vec![0usize; self.alphabet];
        for (t, e) in self.edges.iter().enumerate() {
            let t = t as i64;
            gap[e.0] = gap[e.0].max((t - last[e.0]) as usize);
            last[e.0] = t;
        }
        let end = self.edges.len() as i64;
        for (g, l) in gap.iter_mut().zip(&last) {
            *g = (*g).max((end - l) as usize);
        }
        gap
    }

    fn complete_windows(&self, k: usize) -> Vec<bool> {
        self.shortest_complete_from()
            .into_iter()
            .enumerate()
            .map(|(s, len)| len.is_some_and(|l| l <= k) && s + k <= self.edges.len())
            .collect()
    }

    /// Starts `s` whose `m*k` letters split into `m` consecutive complete
    /// k-windows. Overlapping occurrences are all reported.
    pub fn find_multiwindows(&self, m: usize, k: usize) -> Result<Vec<usize>, FairnessError> {
        if m == 0 {
            return Err(FairnessError::ZeroParameter("m"));
        }
        if k == 0 {
            return Err(FairnessError::ZeroParameter("k"));
        }
        let n = self.edges.len();
        let Some(last) = n.checked_sub(m * k) else { return Ok(Vec::new()) };
        let complete = self.complete_windows(k);
        Ok((0..=last).filter(|&s| (0..m).all(|i| complete[s + i * k])).collect())
    }

    /// Every length-`g` window of the prefix holds the start of a complete
    /// (m,k) multi-window that ends inside the prefix.
    pub fn density_check(&self, m: usize, k: usize, g: usize) -> Result<bool, FairnessError> {
        if g < m * k {
            return Err(FairnessError::HorizonTooShort { g, mk: m * k });
        }
        let hits = self.find_multiwindows(m, k)?;
        let n = self.edges.len();
        if n < g {
            return Ok(true);
        }
        let mut is_hit = vec![false; n];
        for h in hits {
            is_hit[h] = true;
        }
        let mut in_window = is_hit[..g].iter().filter(|h| **h).count();
        if in_window == 0 {
            return Ok(false);
        }
        for x in 1..=n - g {
            in_window += is_hit[x + g - 1] as usize;
            in_window -= is_hit[x - 1] as usize;
            if in_window == 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Longest distance between consecutive multi-window starts, with virtual
    /// starts at −1 and at the prefix end; `len + 1` when there are none.
    pub fn density_gap(&self, m: usize, k: usize) -> Result<usize, FairnessError> {
        let hits = self.find_multiwindows(m, k)?;
        let mut prev = -1i64;
        let mut worst = 0;
        for h in hits.into_iter().map(|h| h as i64).chain([self.edges.len() as i64]) {
            worst = worst.max((h - prev) as usize);
            prev = h;
        }
        Ok(worst)
    }

    /// Whether the minimal uniform k settles as the prefix grows: `Some(k)`
    /// when it is defined and identical at the last two horizons. A word that
    /// is not bounded fair keeps raising it and yields `None`.
    pub fn stable_uniform_k(&self, horizons: &[usize]) -> Option<usize> {
        let values: Vec<Option<usize>> =
            horizons.iter().map(|&h| self.truncated(h).minimal_uniform_k()).collect();
        match values.as_slice() {
            [.., Some(a), Some(b)] if a == b => Some(*b),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiWindowSummary {
    pub m: usize,
    pub k: usize,
    pub positions: Vec<usize>,
    pub density_gap: usize,
    pub horizon: Option<usize>,
    pub density_ok: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FairnessReport {
    pub length: usize,
    pub per_edge_max_gap: BTreeMap<String, usize>,
    pub absent_edges: Vec<String>,
    pub minimal_uniform_k: Option<usize>,
    pub multiwindows: Option<MultiWindowSummary>,
    pub analytic_tag: FairnessTag,
}

/// Full diagnostic report; `labels[e]` names edge `e`.
pub fn report(
    prefix: &WordPrefix,
    labels: &[String],
    multiwindow: Option<(usize, usize, Option<usize>)>,
    analytic_tag: FairnessTag,
) -> Result<FairnessReport, FairnessError> {
    let gaps = prefix.max_edge_gaps();
    let absent_edges = gaps
        .iter()
        .zip(labels)
        .filter(|(g, _)| **g == prefix.len() + 1)
        .map(|(_, l)| l.clone())
        .collect();
    let per_edge_max_gap = labels.iter().cloned().zip(gaps).collect();
    let multiwindows = match multiwindow {
        None => None,
        Some((m, k, horizon)) => Some(MultiWindowSummary {
            m,
            k,
            positions: prefix.find_multiwindows(m, k)?,
            density_gap: prefix.density_gap(m, k)?,
            horizon,
            density_ok: horizon.map(|g| prefix.density_check(m, k, g)).transpose()?,
        }),
    };
    Ok(FairnessReport {
        length: prefix.len(),
        per_edge_max_gap,
        absent_edges,
        minimal_uniform_k: prefix.minimal_uniform_k(),
        multiwindows,
        analytic_tag,
    })
}

/// A checkable claim about a witness prefix.
#[derive(Clone, Debug, PartialEq)]
pub enum WitnessClaim {
    /// Every k-window is complete.
    AllWindowsComplete(usize),
    /// Some k-window is incomplete.
    SomeWindowIncomplete(usize),
    /// Every edge of the alphabet occurs in every window of this length.
    EveryEdgeWithin(usize),
    /// The minimal uniform k at prefix length `2^j` equals `2^(j-1)` for
    /// each listed `j`, so it never settles and no fixed k persists.
    UniformKHalvesHorizon(Vec<u32>),
    /// `stable_uniform_k` over these horizons is `None`.
    NoStableUniformK(Vec<usize>),
    /// With cap `k`, `minimal_uniform_k_capped` is `None`.
    NotKFairAt(usize),
    /// Exactly `count` (m,k) multi-window starts per period of length `period`.
    MultiwindowsPerPeriod { m: usize, k: usize, period: usize, count: usize },
    NoMultiwindows { m: usize, k: usize },
    DensityFails { m: usize, k: usize, g: usize },
    DensityHolds { m: usize, k: usize, g: usize },
}

#[derive(Clone, Debug)]
pub struct Witness {
    pub name: &'static str,
    pub prefix: WordPrefix,
    pub claims: Vec<WitnessClaim>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClaimOutcome {
    pub claim: String,
    pub holds: bool,
}

impl Witness {
    pub fn verify(&self) -> Vec<ClaimOutcome> {
        self.claims
            .iter()
            .map(|c| ClaimOutcome { claim: format!("{}: {c:?}", self.name), holds: self.check(c) })
            .collect()
    }

    fn all_windows(&self, k: usize, expect: bool) -> bool {
        let p = &self.prefix;
        if k > p.len() {
            return false;
        }
        let complete = (0..=p.len() - k).map(|s| p.window_complete(s, k).unwrap_or(false));
        if expect {
            complete.into_iter().all(|c| c)
        } else {
            complete.into_iter().any(|c| !c)
        }
    }

    fn check(&self, claim: &WitnessClaim) -> bool {
        let p = &self.prefix;
        match claim {
            WitnessClaim::AllWindowsComplete(k) => self.all_windows(*k, true),
            WitnessClaim::SomeWindowIncomplete(k) => self.all_windows(*k, false),
            WitnessClaim::EveryEdgeWithin(g) => *g <= p.len() && p.max_edge_gaps().iter().all(|x| x <= g),
            WitnessClaim::UniformKHalvesHorizon(exps) => exps.iter().all(|&j| {
                let h = 1usize << j;
                h <= p.len() && p.truncated(h).minimal_uniform_k() == Some(h / 2)
            }),
            WitnessClaim::NoStableUniformK(hs) => p.stable_uniform_k(hs).is_none(),
            WitnessClaim::NotKFairAt(k) => p.minimal_uniform_k_capped(*k).is_none(),
            WitnessClaim::MultiwindowsPerPeriod { m, k, period, count } => {
                let Ok(hits) = p.find_multiwindows(*m, *k) else { return false };
                let periods = (p.len() - m * k) / period;
                periods > 0
                    && (0..periods).all(|q| {
                        hits.iter().filter(|&&h| h / period == q).count() == *count
                    })
            }
            WitnessClaim::NoMultiwindows { m, k } => {
                p.find_multiwindows(*m, *k).is_ok_and(|h| h.is_empty())
            }
            WitnessClaim::DensityFails { m, k, g } => p.density_check(*m, *k, *g) == Ok(false),
            WitnessClaim::DensityHolds { m, k, g } => p.density_check(*m, *k, *g) == Ok(true),
        }
    }
}

fn repeat_to(period: &[usize], len: usize, alphabet: usize) -> WordPrefix {
    let edges = period.iter().cycle().take(len).map(|&e| EdgeId(e)).collect();
    WordPrefix::new(edges, alphabet).expect("witness letters lie in the alphabet")
}

/// `(e_1 … e_k e_1)^ω`: (k+1)-fair but not k-fair.
pub fn witness_k_plus_one(k: usize, len: usize) -> Witness {
    let mut period: Vec<usize> = (0..k).collect();
    period.push(0);
    Witness {
        name: "window one longer than the alphabet",
        prefix: repeat_to(&period, len, k),
        claims: vec![
            WitnessClaim::AllWindowsComplete(k + 1),
            WitnessClaim::SomeWindowIncomplete(k),
        ],
    }
}

/// `w(i) = e_1` iff `i` (1-based) is a power of two, `e_2` otherwise: strongly
/// fair, since both edges keep occurring, but the gaps between `e_1`'s double.
pub fn power_of_two_word(len: usize) -> WordPrefix {
    let edges = (1..=len).map(|i| EdgeId(if i.is_power_of_two() { 0 } else { 1 })).collect();
    WordPrefix::new(edges, 2).expect("two-letter word")
}

pub fn witness_power_of_two(log_len: u32) -> Witness {
    let len = 1usize << log_len;
    let exps: Vec<u32> = (3..=log_len).collect();
    let horizons: Vec<usize> = exps.iter().map(|&j| 1usize << j).collect();
    let mut claims = vec![
        WitnessClaim::EveryEdgeWithin(len / 2 + 1),
        WitnessClaim::UniformKHalvesHorizon(exps),
        WitnessClaim::NoStableUniformK(horizons),
    ];
    for k in [2, 4, 16, 256, len / 4] {
        claims.push(WitnessClaim::NotKFairAt(k));
        claims.push(WitnessClaim::DensityFails { m: 1, k, g: k.max(len / 4) });
    }
    Witness { name: "power-of-two word", prefix: power_of_two_word(len), claims }
}

/// Period `(e_2 e_1 e_3 … e_k)^m e_1^k` over `k` edges: one complete (m,k)
/// multi-window per period and no (m+1,k) multi-window.
pub fn witness_separated_multiwindows(m: usize, k: usize, periods: usize) -> Witness {
    assert!(k >= 2, "need at least two edges");
    let mut window: Vec<usize> = vec![1, 0];
    window.extend(2..k);
    let mut period: Vec<usize> = window.iter().copied().cycle().take(m * k).collect();
    period.extend(std::iter::repeat_n(0, k));
    let plen = period.len();
    Witness {
        name: "multi-windows separated by single-edge blocks",
        prefix: repeat_to(&period, plen * periods, k),
        claims: vec![
            WitnessClaim::MultiwindowsPerPeriod { m, k, period: plen, count: 1 },
            WitnessClaim::NoMultiwindows { m: m + 1, k },
            WitnessClaim::DensityHolds { m, k, g: plen },
        ],
    }
}

/// `(e_1 … e_{k+1})^ω`: no complete k-window exists, yet complete
/// (m, k+1) multi-windows start at every position.
pub fn witness_window_too_short(k: usize, m: usize, len: usize) -> Witness {
    let period: Vec<usize> = (0..=k).collect();
    Witness {
        name: "alphabet one larger than the window",
        prefix: repeat_to(&period, len, k + 1),
        claims: vec![
            WitnessClaim::NoMultiwindows { m: 1, k },
            WitnessClaim::MultiwindowsPerPeriod { m, k: k + 1, period: 1, count: 1 },
            WitnessClaim::AllWindowsComplete(k + 1),
        ],
    }
}

/// The catalogue used by the acceptance checks.
pub fn hierarchy_witnesses() -> Vec<Witness> {
    vec![
        witness_k_plus_one(4, 400),
        witness_power_of_two(16),
        witness_separated_multiwindows(2, 4, 50),
        witness_window_too_short(3, 2, 200),
    ]
}
