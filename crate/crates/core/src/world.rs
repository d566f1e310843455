//! The Stick Contest sample space.
//!
//! A world is a multiset of `n` stick lengths drawn i.i.d. uniformly from a
//! [`LengthGrid`]. Worlds are enumerated as multisets with multinomial
//! weights, so the default 9-value grid with five sticks has 1287 states
//! rather than 9^5 ordered tuples.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ceiling on `|grid|^n` ordered tuples.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

const TIE_TOLERANCE: f64 = 1e-9;
const MEMBERSHIP_TOLERANCE: f64 = 1e-9;

/// Allowed stick lengths, strictly increasing, plus the midpoint that the
/// mean is judged against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthGrid {
    values: Vec<f64>,
    midpoint: f64,
}

impl LengthGrid {
    pub fn new(values: Vec<f64>, midpoint: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid("grid has no values".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidGrid(
                "grid values must be finite and positive".into(),
            ));
        }
        if values.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidGrid(
                "grid values must be strictly increasing".into(),
            ));
        }
        if !midpoint.is_finite() {
            return Err(Error::InvalidGrid("midpoint must be finite".into()));
        }
        Ok(Self { values, midpoint })
    }

    /// Integers `lo..=hi` with the given midpoint.
    pub fn integers(lo: u32, hi: u32, midpoint: f64) -> Result<Self> {
        Self::new((lo..=hi).map(f64::from).collect(), midpoint)
    }

    /// Lengths 1..9 inches with midpoint 5, as in the experiment.
    pub fn experiment() -> Self {
        Self::integers(1, 9, 5.0).expect("static grid")
    }

    /// Lengths 0.1..0.9 with midpoint 0.5.
    pub fn normalized() -> Self {
        Self::new((1..=9).map(|i| f64::from(i) / 10.0).collect(), 0.5).expect("static grid")
    }

    /// Lengths 1..10 with midpoint 5, wide enough to query evidence 10.
    pub fn extended() -> Self {
        Self::integers(1, 10, 5.0).expect("static grid")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn midpoint(&self) -> f64 {
        self.midpoint
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn index_of(&self, length: f64) -> Option<usize> {
        self.values
            .iter()
            .position(|v| (v - length).abs() <= MEMBERSHIP_TOLERANCE * v.abs().max(1.0))
    }

    pub fn require_index(&self, length: f64) -> Result<usize> {
        self.index_of(length).ok_or(Error::NotOnGrid(length))
    }

    /// Which side of the midpoint a single length falls on.
    pub fn side_of(&self, length: f64) -> Truth {
        classify(length - self.midpoint, self.midpoint)
    }
}

/// One of the two contested propositions; also serves as a contestant's goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Proposition {
    Longer,
    Shorter,
}

/// A contestant's persuasive target.
pub type Goal = Proposition;

impl Proposition {
    pub fn opposite(self) -> Self {
        match self {
            Proposition::Longer => Proposition::Shorter,
            Proposition::Shorter => Proposition::Longer,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Proposition::Longer => 0,
            Proposition::Shorter => 1,
        }
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Proposition::Longer => f.write_str("longer"),
            Proposition::Shorter => f.write_str("shorter"),
        }
    }
}

impl std::str::FromStr for Proposition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "longer" => Ok(Proposition::Longer),
            "shorter" => Ok(Proposition::Shorter),
            other => Err(Error::Validation(format!("unknown proposition {other:?}"))),
        }
    }
}

/// Truth value of the mean-vs-midpoint comparison for a concrete world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    Longer,
    Shorter,
    Tie,
}

impl Truth {
    pub fn satisfies(self, goal: Proposition) -> bool {
        matches!(
            (self, goal),
            (Truth::Longer, Proposition::Longer) | (Truth::Shorter, Proposition::Shorter)
        )
    }
}

fn classify(diff: f64, scale: f64) -> Truth {
    if diff.abs() <= TIE_TOLERANCE * scale.abs().max(1.0) {
        Truth::Tie
    } else if diff > 0.0 {
        Truth::Longer
    } else {
        Truth::Shorter
    }
}

/// A multiset of stick lengths, stored as a count per grid index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StickSet {
    counts: Vec<u32>,
}

impl StickSet {
    pub fn from_counts(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    pub fn from_lengths(grid: &LengthGrid, lengths: &[f64]) -> Result<Self> {
        let mut counts = vec![0; grid.len()];
        for &l in lengths {
            counts[grid.require_index(l)?] += 1;
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn count(&self, index: usize) -> u32 {
        self.counts.get(index).copied().unwrap_or(0)
    }

    pub fn n(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.count(index) > 0
    }

    /// Lengths in ascending order, with repeats.
    pub fn lengths(&self, grid: &LengthGrid) -> Vec<f64> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(grid.value(i), c as usize))
            .collect()
    }

    pub fn sum(&self, grid: &LengthGrid) -> f64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| f64::from(c) * grid.value(i))
            .sum()
    }

    /// Grid indices present in the set with their multiplicities.
    pub fn present(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i, c))
    }

    /// The set with one copy of `index` removed.
    pub fn without_one(&self, index: usize) -> Option<StickSet> {
        if self.count(index) == 0 {
            return None;
        }
        let mut counts = self.counts.clone();
        counts[index] -= 1;
        Some(StickSet { counts })
    }
}

/// Whether the mean of `w` is above, below, or exactly at the midpoint.
pub fn proposition_truth(w: &StickSet, grid: &LengthGrid) -> Truth {
    let n = f64::from(w.n());
    classify(w.sum(grid) - n * grid.midpoint(), n * grid.midpoint())
}

/// Uniform i.i.d. prior over `n` sticks on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldPrior {
    pub grid: LengthGrid,
    pub n: u32,
    pub cap: u128,
}

impl WorldPrior {
    pub fn new(grid: LengthGrid, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("stick count must be positive".into()));
        }
        Ok(Self {
            grid,
            n,
            cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    pub fn experiment() -> Self {
        Self::new(LengthGrid::experiment(), 5).expect("static prior")
    }

    pub fn with_cap(mut self, cap: u128) -> Self {
        self.cap = cap;
        self
    }

    pub fn ordered_tuples(&self) -> u128 {
        (self.grid.len() as u128).saturating_pow(self.n)
    }

    fn check_cap(&self) -> Result<()> {
        let required = self.ordered_tuples();
        if required > self.cap {
            return Err(Error::EnumerationTooLarge {
                required,
                cap: self.cap,
            });
        }
        Ok(())
    }

    /// Every distinct multiset once, with its multinomial probability.
    pub fn enumerate(&self) -> Result<WorldIter> {
        self.check_cap()?;
        Ok(WorldIter::new(self.grid.len(), self.n as usize))
    }

    /// Materialize the enumeration with per-world truth values.
    pub fn table(&self) -> Result<WorldTable> {
        let worlds = self
            .enumerate()?
            .map(|(sticks, prob)| {
                let truth = proposition_truth(&sticks, &self.grid);
                let present = sticks.present().collect();
                World {
                    sticks,
                    prob,
                    truth,
                    present,
                }
            })
            .collect();
        Ok(WorldTable {
            grid: self.grid.clone(),
            n: self.n,
            worlds,
        })
    }
}

/// Streams `(multiset, probability)` pairs in lexicographic order.
#[derive(Debug, Clone)]
pub struct WorldIter {
    k: usize,
    idx: Vec<usize>,
    total: f64,
    done: bool,
}

impl WorldIter {
    fn new(k: usize, n: usize) -> Self {
        Self {
            k,
            idx: vec![0; n],
            total: (k as f64).powi(n as i32),
            done: k == 0,
        }
    }

    fn advance(&mut self) {
        match self.idx.iter().rposition(|&i| i + 1 < self.k) {
            Some(pos) => {
                let next = self.idx[pos] + 1;
                for slot in &mut self.idx[pos..] {
                    *slot = next;
                }
            }
            None => self.done = true,
        }
    }
}

impl Iterator for WorldIter {
    type Item = (StickSet, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut counts = vec![0u32; self.k];
        for &i in &self.idx {
            counts[i] += 1;
        }
        let prob = multinomial(&counts) / self.total;
        self.advance();
        Some((StickSet::from_counts(counts), prob))
    }
}

/// `n! / prod(c_i!)` as a product of binomials.
pub(crate) fn multinomial(counts: &[u32]) -> f64 {
    let mut remaining: u32 = counts.iter().sum();
    let mut coef = 1.0;
    for &c in counts {
        coef *= binomial(remaining, c);
        remaining -= c;
    }
    coef
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// One enumerated world with cached quantities.
#[derive(Debug, Clone)]
pub struct World {
    pub sticks: StickSet,
    pub prob: f64,
    pub truth: Truth,
    /// `(grid index, multiplicity)` for lengths present in the set.
    pub present: Vec<(usize, u32)>,
}

/// The full enumerated prior, shared by every listener computation.
#[derive(Debug, Clone)]
pub struct WorldTable {
    pub grid: LengthGrid,
    pub n: u32,
    pub worlds: Vec<World>,
}

impl WorldTable {
    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }
}

/// Prior marginals of the three truth outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropositionPrior {
    pub longer: f64,
    pub shorter: f64,
    pub tie: f64,
}

impl PropositionPrior {
    pub fn of(&self, goal: Proposition) -> f64 {
        match goal {
            Proposition::Longer => self.longer,
            Proposition::Shorter => self.shorter,
        }
    }
}

pub fn proposition_prior(prior: &WorldPrior) -> Result<PropositionPrior> {
    let mut out = PropositionPrior {
        longer: 0.0,
        shorter: 0.0,
        tie: 0.0,
    };
    for (w, p) in prior.enumerate()? {
        match proposition_truth(&w, &prior.grid) {
            Truth::Longer => out.longer += p,
            Truth::Shorter => out.shorter += p,
            Truth::Tie => out.tie += p,
        }
    }
    Ok(out)
}

/// `P(sum of k i.i.d. grid draws < x)`.
///
/// Sums within the tie tolerance of `x` count as equal, not below.
pub fn remaining_sum_cdf(prior: &WorldPrior, k: u32, x: f64) -> Result<f64> {
    if k == 0 {
        return Ok(if x > TIE_TOLERANCE { 1.0 } else { 0.0 });
    }
    let sub = WorldPrior {
        grid: prior.grid.clone(),
        n: k,
        cap: prior.cap,
    };
    let mut total = 0.0;
    for (w, p) in sub.enumerate()? {
        let s = w.sum(&prior.grid);
        if classify(s - x, x) == Truth::Shorter {
            total += p;
        }
    }
    Ok(total)
}
