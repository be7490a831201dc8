//! Weighted selection over `k`-simplex labels.
//!
//! The selection weight of a label is `degree + delta`. It is split as
//! `(degree - 1) + (1 + delta)`: both parts are non-negative for every
//! admissible `delta`, the first is an integer kept in a Fenwick tree, the
//! second is uniform over labels. One uniform draw decides both the part and
//! the label, so the index stays exact in integer arithmetic and a single
//! stream of uniforms reproduces a trajectory.

#[derive(Clone, Debug, Default)]
pub struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    /// Append an element with value `w` at position `len()`.
    pub fn push(&mut self, w: u64) {
        let i = self.tree.len() + 1; // 1-based position of the new element
        let low = i & i.wrapping_neg();
        // node i covers (i - low, i]; collect the already-stored part
        let covered = self.prefix(i - 1) - self.prefix(i - low);
        self.tree.push(covered + w);
    }

    /// Add `w` to the element at 0-based `idx`.
    pub fn add(&mut self, idx: usize, w: u64) {
        let mut i = idx + 1;
        while i <= self.tree.len() {
            self.tree[i - 1] += w;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of the first `count` elements.
    pub fn prefix(&self, count: usize) -> u64 {
        let mut i = count;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i - 1];
            i -= i & i.wrapping_neg();
        }
        s
    }

    pub fn total(&self) -> u64 {
        self.prefix(self.tree.len())
    }

    /// Smallest 0-based index whose inclusive prefix sum exceeds `r`.
    /// Requires `r < total()`.
    pub fn search(&self, mut r: u64) -> usize {
        let n = self.tree.len();
        let mut pos = 0usize;
        let mut step = if n == 0 { 0 } else { 1usize << (usize::BITS - 1 - n.leading_zeros()) };
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next - 1] <= r {
                pos = next;
                r -= self.tree[next - 1];
            }
            step >>= 1;
        }
        pos
    }
}

/// Selection index over labels `0..len()` (0-based) with weights `degree + delta`.
#[derive(Clone, Debug)]
pub struct WeightIndex {
    excess: Fenwick,
    excess_total: u64,
    uniform_part: f64,
}

impl WeightIndex {
    pub fn new(delta: f64) -> Self {
        Self {
            excess: Fenwick::default(),
            excess_total: 0,
            uniform_part: 1.0 + delta,
        }
    }

    pub fn len(&self) -> usize {
        self.excess.len()
    }

    pub fn is_empty(&self) -> bool {
        self.excess.is_empty()
    }

    /// Register a new label with the given degree (>= 1).
    pub fn push(&mut self, degree: u64) {
        debug_assert!(degree >= 1);
        self.excess.push(degree - 1);
        self.excess_total += degree - 1;
    }

    /// Increase the degree of label `idx` by one.
    pub fn increment(&mut self, idx: usize) {
        self.excess.add(idx, 1);
        self.excess_total += 1;
    }

    /// `sum(degree + delta)` over all labels.
    pub fn total_weight(&self) -> f64 {
        self.excess_total as f64 + self.uniform_part * self.len() as f64
    }

    /// Map a uniform `u` in `[0, 1)` to a label, proportionally to weight.
    pub fn select(&self, u: f64) -> usize {
        let n = self.len();
        debug_assert!(n > 0);
        let excess = self.excess_total as f64;
        let x = u * self.total_weight();
        if x < excess {
            // floor of a uniform on [0, excess) is uniform on the integers
            let r = (x as u64).min(self.excess_total - 1);
            self.excess.search(r)
        } else {
            let j = ((x - excess) / self.uniform_part) as usize;
            j.min(n - 1)
        }
    }

    /// Exact selection probability of label `idx` given its degree.
    pub fn probability(&self, degree: u64) -> f64 {
        (degree as f64 - 1.0 + self.uniform_part) / self.total_weight()
    }
}
