use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// A simplex identified with its vertex set, stored sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SimplexKey(SmallVec<[u32; 6]>);

impl SimplexKey {
    /// Canonicalise an arbitrary vertex list. Returns `None` on duplicates or
    /// an empty list.
    pub fn new(vertices: &[u32]) -> Option<Self> {
        if vertices.is_empty() {
            return None;
        }
        let mut v: SmallVec<[u32; 6]> = vertices.iter().copied().collect();
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some(Self(v))
    }

    pub(crate) fn from_sorted(v: SmallVec<[u32; 6]>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        Self(v)
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Sub-simplex on the positions selected by `mask` (bit `i` picks the
    /// `i`-th smallest vertex).
    pub fn subset(&self, mask: u32) -> SimplexKey {
        let v = self
            .0
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &x)| x)
            .collect();
        SimplexKey(v)
    }

    /// The youngest `m`-face `{v_{k-m}, ..., v_k}`.
    pub fn suffix(&self, m: usize) -> SimplexKey {
        let n = self.0.len();
        SimplexKey(self.0[n - m - 1..].iter().copied().collect())
    }

    pub fn contains(&self, other: &SimplexKey) -> bool {
        other.0.iter().all(|v| self.0.binary_search(v).is_ok())
    }
}

/// A point `(i_0, ..., i_k)` of the degree lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DegreeVector(pub SmallVec<[u32; 6]>);

impl DegreeVector {
    pub fn new(entries: &[u32]) -> Self {
        Self(entries.iter().copied().collect())
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `i_0 > i_1 > ... > i_k >= 1` with `k + 1` entries.
    pub fn is_admissible(&self, k: usize) -> bool {
        self.0.len() == k + 1
            && self.0.last().is_some_and(|&x| x >= 1)
            && self.0.windows(2).all(|w| w[0] > w[1])
    }

    pub fn get(&self, m: usize) -> u32 {
        self.0[m]
    }
}

impl From<Vec<u32>> for DegreeVector {
    fn from(v: Vec<u32>) -> Self {
        Self(v.into_iter().collect())
    }
}

/// A `k`-simplex with its permanent enumeration label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KSimplexRecord {
    pub label: usize,
    pub vertices: SimplexKey,
    pub birth_step: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let a = SimplexKey::new(&[4, 1, 3]).unwrap();
        assert_eq!(a.vertices(), &[1, 3, 4]);
        assert_eq!(a.dim(), 2);
        assert!(SimplexKey::new(&[1, 1]).is_none());
        assert!(SimplexKey::new(&[]).is_none());
        assert_eq!(a.suffix(0).vertices(), &[4]);
        assert_eq!(a.suffix(1).vertices(), &[3, 4]);
        assert_eq!(a.suffix(2), a);
        assert_eq!(a.subset(0b101).vertices(), &[1, 4]);
        assert!(a.contains(&a.subset(0b110)));
        assert!(!a.contains(&SimplexKey::new(&[2]).unwrap()));
    }

    #[test]
    fn admissibility() {
        assert!(DegreeVector::new(&[3, 2, 1]).is_admissible(2));
        assert!(!DegreeVector::new(&[3, 3, 1]).is_admissible(2));
        assert!(!DegreeVector::new(&[3, 2, 0]).is_admissible(2));
        assert!(!DegreeVector::new(&[3, 2]).is_admissible(2));
    }
}
