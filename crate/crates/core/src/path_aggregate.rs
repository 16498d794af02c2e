//! Root-path add and root-path minimum over per-vertex markers of a static
//! rooted tree.
//!
//! Heavy-path decomposition over the tree's heavy-first preorder, so every
//! root path is O(log n) contiguous position ranges, each handled by a
//! lazy range-add / range-min segment tree: O(log² n) per operation.
//!
//! Infinity is tracked as a separate integer count per marker. A marker is
//! `+∞` while its count is positive; finite deltas still accumulate
//! underneath, so adding and later subtracting `∞` restores the exact
//! finite value.

use crate::rooted_tree::{RootedTree, NONE};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Delta {
    inf: i32,
    val: f64,
}

impl Delta {
    const ZERO: Delta = Delta { inf: 0, val: 0.0 };

    fn from_value(x: f64) -> Self {
        if x == f64::INFINITY {
            Delta { inf: 1, val: 0.0 }
        } else if x == f64::NEG_INFINITY {
            Delta { inf: -1, val: 0.0 }
        } else {
            Delta { inf: 0, val: x }
        }
    }

    fn negated(self) -> Self {
        Delta {
            inf: -self.inf,
            val: -self.val,
        }
    }

    fn is_zero(&self) -> bool {
        self.inf == 0 && self.val == 0.0
    }
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    inf: i32,
    val: f64,
    pos: u32,
}

impl Slot {
    const EMPTY: Slot = Slot {
        inf: i32::MAX,
        val: f64::INFINITY,
        pos: u32::MAX,
    };

    #[inline]
    fn min(a: Slot, b: Slot) -> Slot {
        let a_first = match a.inf.cmp(&b.inf) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => match a.val.total_cmp(&b.val) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => a.pos <= b.pos,
            },
        };
        if a_first {
            a
        } else {
            b
        }
    }

    #[inline]
    fn apply(&mut self, d: Delta) {
        if self.pos != u32::MAX {
            self.inf += d.inf;
            self.val += d.val;
        }
    }

    fn logical(&self) -> f64 {
        if self.inf > 0 {
            f64::INFINITY
        } else {
            self.val
        }
    }
}

/// Iterative range-add / range-min tree over a power-of-two leaf array.
/// `min[p]` is the minimum of `p`'s leaves with every pending delta at `p`
/// and below applied; `lazy[p]` is what `p` still owes its children.
struct LazySegTree {
    size: usize,
    height: u32,
    min: Vec<Slot>,
    lazy: Vec<Delta>,
}

impl LazySegTree {
    fn new(values: &[Slot]) -> Self {
        let size = values.len().max(1).next_power_of_two();
        let mut min = vec![Slot::EMPTY; 2 * size];
        min[size..size + values.len()].copy_from_slice(values);
        for p in (1..size).rev() {
            min[p] = Slot::min(min[2 * p], min[2 * p + 1]);
        }
        Self {
            size,
            height: size.trailing_zeros(),
            min,
            lazy: vec![Delta::ZERO; size],
        }
    }

    #[inline]
    fn apply(&mut self, p: usize, d: Delta) {
        self.min[p].apply(d);
        if p < self.size {
            self.lazy[p].inf += d.inf;
            self.lazy[p].val += d.val;
        }
    }

    #[inline]
    fn recompute(&mut self, p: usize) {
        let mut m = Slot::min(self.min[2 * p], self.min[2 * p + 1]);
        m.apply(self.lazy[p]);
        self.min[p] = m;
    }

    /// Recomputes the ancestors of leaves `a <= b`, each shared one once.
    #[inline]
    fn pull(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (a >> 1, b >> 1);
        while a != b {
            self.recompute(a);
            self.recompute(b);
            a >>= 1;
            b >>= 1;
        }
        while a >= 1 {
            self.recompute(a);
            a >>= 1;
        }
    }

    /// Hands pending deltas down the root path of `p`.
    #[inline]
    fn push(&mut self, p: usize) {
        for s in (1..=self.height).rev() {
            let i = p >> s;
            let d = self.lazy[i];
            if !d.is_zero() {
                self.apply(2 * i, d);
                self.apply(2 * i + 1, d);
                self.lazy[i] = Delta::ZERO;
            }
        }
    }

    /// Adds `d` on positions `l..=r`.
    fn add(&mut self, l: usize, r: usize, d: Delta) {
        let (l0, r0) = (l + self.size, r + self.size);
        let (mut l, mut r) = (l0, r0 + 1);
        while l < r {
            if l & 1 == 1 {
                self.apply(l, d);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                self.apply(r, d);
            }
            l >>= 1;
            r >>= 1;
        }
        self.pull(l0, r0);
    }

    /// Minimum over positions `l..=r`.
    fn query(&mut self, l: usize, r: usize) -> Slot {
        let (l0, r0) = (l + self.size, r + self.size);
        self.push(l0);
        if r0 != l0 {
            self.push(r0);
        }
        let (mut l, mut r) = (l0, r0 + 1);
        let mut best = Slot::EMPTY;
        while l < r {
            if l & 1 == 1 {
                best = Slot::min(best, self.min[l]);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                best = Slot::min(best, self.min[r]);
            }
            l >>= 1;
            r >>= 1;
        }
        best
    }
}

/// Markers over the vertices of a rooted tree supporting `add_path` and
/// `min_path` over the inclusive root path of a vertex.
pub struct PathAggregator<'a> {
    tree: &'a RootedTree,
    seg: LazySegTree,
    log: Vec<(usize, Delta)>,
    logging: bool,
    touches: u64,
}

impl<'a> PathAggregator<'a> {
    /// `initial[v]` may be `+∞`.
    pub fn new(tree: &'a RootedTree, initial: &[f64]) -> Self {
        assert_eq!(initial.len(), tree.n(), "one initial marker per vertex");
        let slots: Vec<Slot> = tree
            .preorder()
            .iter()
            .enumerate()
            .map(|(pos, &v)| {
                let x = initial[v];
                let (inf, val) = if x == f64::INFINITY { (1, 0.0) } else { (0, x) };
                Slot {
                    inf,
                    val,
                    pos: pos as u32,
                }
            })
            .collect();
        Self {
            tree,
            seg: LazySegTree::new(&slots),
            log: Vec::new(),
            logging: false,
            touches: 0,
        }
    }

    /// Adds `x` to every marker on the path from `v` to the root. `±∞`
    /// raises or lowers the marker's infinity count.
    pub fn add_path(&mut self, v: usize, x: f64) {
        let d = Delta::from_value(x);
        if d.is_zero() {
            return;
        }
        if self.logging {
            self.log.push((v, d));
        }
        self.apply_path(v, d);
    }

    fn apply_path(&mut self, mut v: usize, d: Delta) {
        while v != NONE {
            let h = self.tree.head(v);
            self.seg.add(self.tree.entry(h), self.tree.entry(v), d);
            self.touches += 1;
            v = self.tree.parent(h);
        }
    }

    /// Minimum marker on the path from `v` to the root and a vertex
    /// attaining it; ties go to the smallest preorder position, i.e. the
    /// vertex closest to the root.
    pub fn min_path(&mut self, mut v: usize) -> (f64, usize) {
        let mut best = Slot::EMPTY;
        while v != NONE {
            let h = self.tree.head(v);
            best = Slot::min(best, self.seg.query(self.tree.entry(h), self.tree.entry(v)));
            self.touches += 1;
            v = self.tree.parent(h);
        }
        (best.logical(), self.tree.preorder()[best.pos as usize])
    }

    pub fn marker(&mut self, v: usize) -> f64 {
        let p = self.tree.entry(v);
        self.seg.query(p, p).logical()
    }

    /// Starts recording `add_path` calls; a later [`Self::rollback`]
    /// replays them negated.
    pub fn checkpoint(&mut self) {
        self.log.clear();
        self.logging = true;
    }

    /// Undoes every `add_path` since the last checkpoint by replaying it
    /// with the opposite sign.
    pub fn rollback(&mut self) {
        let log = std::mem::take(&mut self.log);
        for &(v, d) in log.iter().rev() {
            self.apply_path(v, d.negated());
        }
        self.logging = false;
    }

    /// Segment-tree range operations issued so far.
    pub fn touches(&self) -> u64 {
        self.touches
    }
}
