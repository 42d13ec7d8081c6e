//! Multi-indices `[α, β]` and downward-closed sets of them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// A tuple of positive integers, ordered lexicographically.
///
/// In the collocation code the first `d` entries are fidelity (spatial)
/// indices and the remaining `N` are parametric levels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Argument("empty multi-index".into()));
        }
        if entries.contains(&0) {
            return Err(Error::Argument(format!(
                "multi-index entries must be >= 1, got {entries:?}"
            )));
        }
        Ok(Self(entries))
    }

    /// The all-ones index of length `len`.
    pub fn ones(len: usize) -> Self {
        Self(alloc::vec![1; len])
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self + e_k`.
    pub fn forward(&self, k: usize) -> Self {
        let mut e = self.0.clone();
        e[k] += 1;
        Self(e)
    }

    /// `self - e_k`, or `None` when that entry is already 1.
    pub fn backward(&self, k: usize) -> Option<Self> {
        if self.0[k] <= 1 {
            return None;
        }
        let mut e = self.0.clone();
        e[k] -= 1;
        Some(Self(e))
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

impl core::ops::Index<usize> for MultiIndex {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

/// A set of multi-indices of a common length.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MultiIndexSet {
    dim: usize,
    members: BTreeSet<MultiIndex>,
}

impl MultiIndexSet {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            members: BTreeSet::new(),
        }
    }

    /// `{[1, ..., 1]}`.
    pub fn unit(dim: usize) -> Self {
        let mut s = Self::new(dim);
        s.members.insert(MultiIndex::ones(dim));
        s
    }

    pub fn from_indices(dim: usize, indices: impl IntoIterator<Item = MultiIndex>) -> Result<Self> {
        let mut s = Self::new(dim);
        for i in indices {
            s.insert(i)?;
        }
        Ok(s)
    }

    /// Convenience constructor from raw tuples.
    pub fn from_entries(dim: usize, entries: &[&[usize]]) -> Result<Self> {
        Self::from_indices(
            dim,
            entries
                .iter()
                .map(|e| MultiIndex::new(e.to_vec()))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// All `k` with `1 <= k <= corner` componentwise.
    pub fn full_box(corner: &MultiIndex) -> Self {
        let dim = corner.len();
        let mut s = Self::new(dim);
        let mut cur = alloc::vec![1usize; dim];
        loop {
            s.members.insert(MultiIndex(cur.clone()));
            let mut k = dim;
            loop {
                if k == 0 {
                    return s;
                }
                k -= 1;
                if cur[k] < corner[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = 1;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, idx: &MultiIndex) -> bool {
        self.members.contains(idx)
    }

    pub fn insert(&mut self, idx: MultiIndex) -> Result<bool> {
        if idx.len() != self.dim {
            return Err(Error::Argument(format!(
                "multi-index {idx} has length {}, set expects {}",
                idx.len(),
                self.dim
            )));
        }
        Ok(self.members.insert(idx))
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.members.iter()
    }

    /// Every backward neighbour of `idx` is in the set.
    pub fn has_backward_neighbors(&self, idx: &MultiIndex) -> bool {
        (0..idx.len()).all(|k| idx.backward(k).is_none_or(|b| self.contains(&b)))
    }

    pub fn is_downward_closed(&self) -> bool {
        self.members.iter().all(|k| self.has_backward_neighbors(k))
    }

    pub fn require_downward_closed(&self) -> Result<()> {
        match self.members.iter().find(|k| !self.has_backward_neighbors(k)) {
            None => Ok(()),
            Some(k) => Err(Error::Structure(format!(
                "index set is not downward closed at {k}"
            ))),
        }
    }

    /// `{j + e_k : j in set} \ set`.
    pub fn margin(&self) -> Self {
        let mut out = Self::new(self.dim);
        for j in &self.members {
            for k in 0..self.dim {
                let f = j.forward(k);
                if !self.contains(&f) {
                    out.members.insert(f);
                }
            }
        }
        out
    }

    /// Margin members whose addition keeps the set downward closed.
    pub fn reduced_margin(&self) -> Self {
        let mut out = self.margin();
        out.members.retain(|i| self.has_backward_neighbors(i));
        out
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.members.extend(other.members.iter().cloned());
        out
    }

    pub fn with(&self, idx: &MultiIndex) -> Self {
        let mut out = self.clone();
        out.members.insert(idx.clone());
        out
    }
}

impl<'a> IntoIterator for &'a MultiIndexSet {
    type Item = &'a MultiIndex;
    type IntoIter = alloc::collections::btree_set::Iter<'a, MultiIndex>;
    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

/// Integer combination-technique coefficients of every member of `lambda`:
/// `c_k = Σ_{i in {0,1}^D, k+i in Λ} (-1)^{|i|}`. Zero coefficients are kept.
pub fn combination_coefficients(lambda: &MultiIndexSet) -> Result<BTreeMap<MultiIndex, i64>> {
    lambda.require_downward_closed()?;
    let dim = lambda.dim();
    if dim > 24 {
        return Err(Error::Argument(format!("{dim} index dimensions is too many")));
    }
    let mut out = BTreeMap::new();
    let mut probe = alloc::vec![0usize; dim];
    for k in lambda.iter() {
        let mut c = 0i64;
        for mask in 0u32..(1u32 << dim) {
            for (n, p) in probe.iter_mut().enumerate() {
                *p = k[n] + ((mask >> n) & 1) as usize;
            }
            // `probe` is a valid index by construction; avoid re-validating.
            if lambda.contains(&MultiIndex(probe.clone())) {
                c += if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            }
        }
        out.insert(k.clone(), c);
    }
    Ok(out)
}

/// Coefficients with zeros dropped.
pub fn nonzero_coefficients(lambda: &MultiIndexSet) -> Result<BTreeMap<MultiIndex, i64>> {
    let mut c = combination_coefficients(lambda)?;
    c.retain(|_, v| *v != 0);
    Ok(c)
}

/// `c(Λ ∪ {idx}) - c(Λ)` over the union, zeros dropped. This is the signed
/// combination of tensor operators forming the mixed detail at `idx`.
pub fn coefficient_increment(
    lambda: &MultiIndexSet,
    idx: &MultiIndex,
) -> Result<BTreeMap<MultiIndex, i64>> {
    let grown = lambda.with(idx);
    if !grown.has_backward_neighbors(idx) {
        return Err(Error::Structure(format!(
            "adding {idx} breaks downward closure"
        )));
    }
    let before = combination_coefficients(lambda)?;
    let mut after = combination_coefficients(&grown)?;
    for (k, c) in before {
        *after.entry(k).or_insert(0) -= c;
    }
    after.retain(|_, v| *v != 0);
    Ok(after)
}
