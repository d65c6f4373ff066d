//! Multi-index moves and orders on exponent vectors of jet monomials
//! `y_1^{m_1} ... y_r^{m_r}`.
//!
//! Positions are 1-based in the public API to match how the moves are
//! usually written: `d(i, j, m)` adds one at position `j - i` and removes
//! one at position `j`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        assert!(!entries.is_empty(), "multi-index needs r >= 1");
        MultiIndex(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// 1-based access.
    pub fn at(&self, k: usize) -> u32 {
        self.0[k - 1]
    }

    fn check_move(&self, i: usize, j: usize) -> bool {
        1 <= i && i < j && j <= self.len()
    }

    /// `d_i^j`: `+1` at `j - i`, `-1` at `j`; `None` if entry `j` is zero or
    /// the indices are out of range.
    pub fn d(&self, i: usize, j: usize) -> Option<MultiIndex> {
        if !self.check_move(i, j) || self.at(j) == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[j - i - 1] += 1;
        v[j - 1] -= 1;
        Some(MultiIndex(v))
    }

    /// `b_i^j`, the inverse move of [`d`](Self::d).
    pub fn b(&self, i: usize, j: usize) -> Option<MultiIndex> {
        if !self.check_move(i, j) || self.at(j - i) == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[j - i - 1] -= 1;
        v[j - 1] += 1;
        Some(MultiIndex(v))
    }

    /// All defined `d`-moves as `(i, j, result)`.
    pub fn d_moves(&self) -> impl Iterator<Item = (usize, usize, MultiIndex)> + '_ {
        let r = self.len();
        (2..=r).flat_map(move |j| (1..j).filter_map(move |i| self.d(i, j).map(|m| (i, j, m))))
    }

    /// Weight `m_1 + 2 m_2 + ... + r m_r`.
    pub fn weight(&self) -> u64 {
        self.0.iter().enumerate().map(|(k, &e)| (k as u64 + 1) * e as u64).sum()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn d(i: usize, j: usize, m: &MultiIndex) -> Option<MultiIndex> {
    m.d(i, j)
}

pub fn b(i: usize, j: usize, m: &MultiIndex) -> Option<MultiIndex> {
    m.b(i, j)
}

pub fn weight_c(m: &MultiIndex) -> u64 {
    m.weight()
}

fn same_len(m: &MultiIndex, p: &MultiIndex) -> Result<()> {
    if m.len() != p.len() {
        return Err(Error::LengthMismatch);
    }
    Ok(())
}

/// Degree order: compare from the last entry down; the first difference decides.
pub fn cmp_degree(m: &MultiIndex, p: &MultiIndex) -> Result<Ordering> {
    same_len(m, p)?;
    Ok(m.0.iter().rev().cmp(p.0.iter().rev()))
}

/// `m ≻ p` iff some `d_i^j(m) = p`.
pub fn succ(m: &MultiIndex, p: &MultiIndex) -> Result<bool> {
    same_len(m, p)?;
    Ok(m.d_moves().any(|(_, _, q)| q == *p))
}

/// Finite set of equal-length multi-indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexSet {
    indices: BTreeSet<MultiIndex>,
}

impl IndexSet {
    pub fn new(it: impl IntoIterator<Item = MultiIndex>) -> Result<Self> {
        let indices: BTreeSet<MultiIndex> = it.into_iter().collect();
        let mut lens = indices.iter().map(|m| m.len());
        if let Some(l) = lens.next() {
            if lens.any(|x| x != l) {
                return Err(Error::LengthMismatch);
            }
        }
        Ok(IndexSet { indices })
    }

    pub fn contains(&self, m: &MultiIndex) -> bool {
        self.indices.contains(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.indices.iter()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    fn common_len(&self) -> Option<usize> {
        self.indices.iter().next().map(|m| m.len())
    }
}

/// Members `p` of `set` with `p ≻ m`.
pub fn predecessors(m: &MultiIndex, set: &IndexSet) -> Result<IndexSet> {
    if set.common_len().is_some_and(|l| l != m.len()) {
        return Err(Error::LengthMismatch);
    }
    let mut out = BTreeSet::new();
    for p in set.iter() {
        if succ(p, m)? {
            out.insert(p.clone());
        }
    }
    Ok(IndexSet { indices: out })
}

/// `subset` is closed in `ambient` when every `p ∈ ambient` with `p ≻ m` for
/// some `m ∈ subset` is itself in `subset`.
pub fn is_closed(ambient: &IndexSet, subset: &IndexSet) -> Result<bool> {
    if let (Some(a), Some(s)) = (ambient.common_len(), subset.common_len()) {
        if a != s {
            return Err(Error::LengthMismatch);
        }
    }
    for m in subset.iter() {
        for p in predecessors(m, ambient)?.iter() {
            if !subset.contains(p) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn move_examples() {
        assert_eq!(mi(&[0, 1]).d(1, 2), Some(mi(&[1, 0])));
        assert_eq!(mi(&[1, 0, 1]).d(1, 3), Some(mi(&[1, 1, 0])));
        assert_eq!(mi(&[1, 1, 0]).b(1, 3), Some(mi(&[1, 0, 1])));
        assert_eq!(mi(&[1, 0]).d(1, 2), None);
        assert_eq!(mi(&[0, 1]).b(1, 2), None);
        assert_eq!(mi(&[1, 1]).d(2, 2), None);
        assert_eq!(mi(&[1, 1]).d(1, 3), None);
    }

    #[test]
    fn weight_examples() {
        assert_eq!(mi(&[1, 0, 1]).weight(), 4);
        assert_eq!(mi(&[2, 0, 0]).weight(), 2);
    }

    #[test]
    fn degree_order() {
        assert_eq!(cmp_degree(&mi(&[1, 0]), &mi(&[0, 1])), Ok(Ordering::Less));
        assert_eq!(cmp_degree(&mi(&[5, 0, 1]), &mi(&[0, 9, 0])), Ok(Ordering::Greater));
        assert_eq!(cmp_degree(&mi(&[1]), &mi(&[1, 0])), Err(Error::LengthMismatch));
    }

    #[test]
    fn succ_and_predecessors() {
        assert_eq!(succ(&mi(&[0, 1]), &mi(&[1, 0])), Ok(true));
        assert_eq!(succ(&mi(&[1, 0]), &mi(&[0, 1])), Ok(false));
        let s = IndexSet::new([mi(&[1, 0, 1]), mi(&[0, 2, 0]), mi(&[2, 0, 0])]).unwrap();
        let p = predecessors(&mi(&[1, 1, 0]), &s).unwrap();
        assert_eq!(p, IndexSet::new([mi(&[1, 0, 1]), mi(&[0, 2, 0])]).unwrap());
    }

    #[test]
    fn closed_sets() {
        let s = IndexSet::new([mi(&[1, 0, 1]), mi(&[0, 2, 0]), mi(&[2, 0, 0])]).unwrap();
        assert!(is_closed(&s, &s).unwrap());
        let top = IndexSet::new([mi(&[1, 0, 1])]).unwrap();
        assert!(is_closed(&s, &top).unwrap());
        // (1,0,1) ≻ (2,0,0) via d(2,3)
        let bottom = IndexSet::new([mi(&[2, 0, 0])]).unwrap();
        assert!(!is_closed(&s, &bottom).unwrap());
        assert!(IndexSet::new([mi(&[1]), mi(&[1, 0])]).is_err());
    }
}
