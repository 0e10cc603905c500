//! Sensor index assignment and per-channel empirical statistics.
//!
//! `n` sensors are split among `K` channels in contiguous blocks whose sizes
//! track the target proportions to within one sample. A sequence observed at
//! the fusion center is then summarized per channel group by its partial type:
//! the empirical distribution of the symbols that group produced, together
//! with the group's sample count.

use crate::error::{Error, Result};
use crate::prob::{Distribution, Proportions};

/// Assignment of `n` sample indices to `K` contiguous channel blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexMap {
    counts: Vec<usize>,
    offsets: Vec<usize>,
    n: usize,
}

impl IndexMap {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_groups(&self) -> usize {
        self.counts.len()
    }

    /// Samples assigned to group `k`.
    pub fn count(&self, k: usize) -> usize {
        self.counts[k]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Group owning sample index `i`.
    pub fn group_of(&self, i: usize) -> usize {
        assert!(i < self.n, "index {i} out of range for n = {}", self.n);
        // offsets is sorted; partition_point returns how many blocks start at or before i.
        self.offsets.partition_point(|&o| o <= i) - 1
    }

    /// Half-open index range `[start, end)` of group `k`.
    pub fn range(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k] + self.counts[k]
    }
}

/// Apportion `n` samples to groups by the largest-remainder rule.
///
/// Every count differs from its ideal share `n * a_k` by strictly less than 1;
/// leftover samples go to the largest fractional parts, ties to the smallest
/// group index.
pub fn index_map(n: usize, a: &Proportions) -> IndexMap {
    let k = a.len();
    let mut counts = vec![0usize; k];
    let mut fracs: Vec<(usize, f64)> = Vec::with_capacity(k);
    let mut assigned = 0usize;
    for j in 0..k {
        let ideal = n as f64 * a.get(j);
        let fl = ideal.floor();
        counts[j] = fl as usize;
        assigned += counts[j];
        fracs.push((j, ideal - fl));
    }
    let mut leftover = n - assigned;
    fracs.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(&y.0)));
    let mut cursor = 0;
    while leftover > 0 {
        counts[fracs[cursor].0] += 1;
        cursor += 1;
        leftover -= 1;
    }
    let mut offsets = Vec::with_capacity(k);
    let mut acc = 0;
    for &c in &counts {
        offsets.push(acc);
        acc += c;
    }
    IndexMap { counts, offsets, n }
}

/// Empirical symbol counts of one channel group. A group that received no
/// samples is the explicit empty state: its type carries no distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialType {
    counts: Vec<u64>,
}

impl PartialType {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    pub fn alphabet(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// The type as a distribution; `None` for an empty group. Entries are
    /// exact integer multiples of `1/total` up to one floating-point division.
    pub fn distribution(&self) -> Option<Distribution> {
        let t = self.total();
        if t == 0 {
            return None;
        }
        let tf = t as f64;
        Some(Distribution::from_normalized(
            self.counts.iter().map(|&c| c as f64 / tf).collect(),
        ))
    }
}

/// The per-channel partial types of one observed sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialTypeVector {
    groups: Vec<PartialType>,
    n: usize,
}

impl PartialTypeVector {
    pub fn new(groups: Vec<PartialType>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::DimensionMismatch("type vector needs at least one group".into()));
        }
        let l = groups[0].alphabet();
        if groups.iter().any(|g| g.alphabet() != l) {
            return Err(Error::DimensionMismatch(
                "all groups of a type vector share one alphabet".into(),
            ));
        }
        let n = groups.iter().map(|g| g.total() as usize).sum();
        Ok(Self { groups, n })
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// Total samples across groups.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> usize {
        self.groups[0].alphabet()
    }

    pub fn group(&self, k: usize) -> &PartialType {
        &self.groups[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &PartialType> {
        self.groups.iter()
    }

    /// Realized per-group sample shares `count_k / n`.
    pub fn proportions(&self) -> Proportions {
        assert!(self.n > 0, "proportions of an empty sequence are undefined");
        let nf = self.n as f64;
        Proportions::new(self.groups.iter().map(|g| g.total() as f64 / nf).collect())
            .expect("counts always form valid proportions")
    }
}

/// Split a symbol sequence by the index map and tally each group's type.
///
/// `symbols[i]` is the output of the sensor at index `i`; all symbols must lie
/// in `0..alphabet`.
pub fn partial_types(
    symbols: &[usize],
    map: &IndexMap,
    alphabet: usize,
) -> Result<PartialTypeVector> {
    if symbols.len() != map.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} symbols for an index map over {}",
            symbols.len(),
            map.n()
        )));
    }
    if alphabet < 2 {
        return Err(Error::InvalidParameter {
            name: "alphabet".into(),
            reason: "needs at least 2 symbols".into(),
        });
    }
    let mut groups: Vec<Vec<u64>> = vec![vec![0; alphabet]; map.n_groups()];
    for k in 0..map.n_groups() {
        for i in map.range(k) {
            let s = symbols[i];
            if s >= alphabet {
                return Err(Error::InvalidParameter {
                    name: "symbols".into(),
                    reason: format!("symbol {s} at index {i} exceeds alphabet {alphabet}"),
                });
            }
            groups[k][s] += 1;
        }
    }
    PartialTypeVector::new(groups.into_iter().map(PartialType::from_counts).collect())
}
