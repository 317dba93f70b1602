//! Pac-Man on the cut-tree and the function `F` it defines.
//!
//! With budget `h`, Pac-Man walks from the root towards its current target
//! leaf and stops at the first node whose target-side subtree fits in the
//! remaining budget. It eats that subtree, retargets to the node's
//! half-routing leaf and continues until the budget is exactly spent.
//! `F(h)` is the sum of `τ × mass` over the eaten subtrees.

use crate::cut_tree::{CutTree, NodeId, ROOT};
use crate::error::{contract, Error, Result};
use crate::fragmentation::FragmentationTimeline;
use crate::scalar::Scalar;

/// Pairs `(B_k, L_k)`: record nodes and the target leaf in force after each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordChain {
    pub entries: Vec<(NodeId, NodeId)>,
}

impl RecordChain {
    pub fn last(&self) -> NodeId {
        self.entries.last().expect("chains start at the root").0
    }
}

/// Records leading from the root to `x`: each step moves to the deepest
/// common node of the paths towards `x` and towards the current target.
pub fn record_sequence<T: Scalar>(ct: &CutTree<T>, x: NodeId) -> Result<RecordChain> {
    if x >= ct.len() {
        return Err(contract(format!("node {x} does not exist")));
    }
    let mut entries = vec![(ROOT, ct.leaf0())];
    if x == ROOT {
        return Ok(RecordChain { entries });
    }
    let cap = ct.depth(x) + 2;
    while entries.len() <= cap {
        let (_, target) = *entries.last().unwrap();
        let b = ct.lca(x, target);
        if b == x {
            let t = if ct.is_branch(x) { ct.half_routing(x) } else { x };
            entries.push((x, t));
            return Ok(RecordChain { entries });
        }
        if !ct.is_branch(b) || ct.is_ancestor(ct.entry(b), x) {
            return Err(Error::Malformed(format!("records towards {x} stall at {b}")));
        }
        entries.push((b, ct.half_routing(b)));
    }
    Err(Error::Malformed(format!("records towards {x} do not terminate")))
}

/// `(h0, h1, h2)` of a branchpoint as vertex counts.
pub fn h_counts<T: Scalar>(ct: &CutTree<T>, b: NodeId) -> Result<(usize, usize, usize)> {
    if !ct.is_branch(b) {
        return Err(contract(format!("node {b} is not a branchpoint")));
    }
    let chain = record_sequence(ct, b)?;
    let h1: usize = chain.entries[1..].iter().map(|&(r, _)| ct.node(ct.entry(r)).mass).sum();
    let e = ct.node(ct.entry(b)).mass;
    let f = ct.node(ct.far(b)).mass;
    Ok((h1 - e, h1, h1 + f))
}

/// `h1` is the budget at which Pac-Man stops exactly at `b`; `h0` and `h2`
/// bracket the budgets landing in its entry and far sides.
pub fn h_triple<T: Scalar>(ct: &CutTree<T>, b: NodeId) -> Result<(T, T, T)> {
    let (a, m, z) = h_counts(ct, b)?;
    Ok((T::mass(a, ct.n), T::mass(m, ct.n), T::mass(z, ct.n)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PacManTrace<T> {
    pub h: T,
    pub chain: RecordChain,
    /// `(record, mass of the subtree eaten there)`.
    pub eaten: Vec<(NodeId, T)>,
    /// Where Pac-Man stops.
    pub last: NodeId,
    pub value: T,
}

/// A single run with budget `h`, which must be a multiple of `1/n`.
pub fn pacman_run<T: Scalar>(ct: &CutTree<T>, h: T) -> Result<PacManTrace<T>> {
    if h < T::zero() || h > T::one() {
        return Err(contract(format!("budget {h:?} outside [0, 1]")));
    }
    let count = h.to_count(ct.n).ok_or_else(|| Error::OffGrid(format!("{h:?}")))?;
    run_count(ct, count, h)
}

pub(crate) fn run_count<T: Scalar>(ct: &CutTree<T>, count: usize, h: T) -> Result<PacManTrace<T>> {
    let n = ct.n;
    let mut chain = vec![(ROOT, ct.leaf0())];
    let mut eaten = Vec::new();
    let mut value = T::zero();
    let last;
    if count == n {
        eaten.push((ROOT, T::one()));
        last = ROOT;
    } else if count == 0 {
        last = ct.leaf0();
    } else {
        let mut left = count;
        let mut cur = ct.top();
        loop {
            if !ct.is_branch(cur) {
                return Err(Error::Malformed(format!("Pac-Man reached leaf {cur} with budget left")));
            }
            let e = ct.entry(cur);
            let m = ct.node(e).mass;
            if m <= left {
                let mass = T::mass(m, n);
                value += ct.tau(cur) * mass;
                eaten.push((cur, mass));
                chain.push((cur, ct.half_routing(cur)));
                left -= m;
                if left == 0 {
                    last = cur;
                    break;
                }
                cur = ct.far(cur);
            } else {
                cur = e;
            }
        }
    }
    Ok(PacManTrace { h, chain: RecordChain { entries: chain }, eaten, last, value })
}

/// Positions (in the cut-tree leaf order) of the leaves a trace ate.
pub fn eaten_leaf_positions<T: Scalar>(ct: &CutTree<T>, trace: &PacManTrace<T>) -> Vec<usize> {
    let mut out = Vec::new();
    for &(b, _) in &trace.eaten {
        let (lo, hi) = ct.leaf_span(ct.entry(b));
        out.extend(lo..hi);
    }
    out.sort_unstable();
    out
}

/// `F` on its breakpoint grid, linearly interpolated in between.
#[derive(Clone, Debug, PartialEq)]
pub struct BreakpointFunction<T> {
    pub h: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Scalar> BreakpointFunction<T> {
    /// Checks the grid starts at 0, ends at 1, increases strictly, and that
    /// values are nonnegative and vanish at both ends.
    pub fn new(h: Vec<T>, values: Vec<T>) -> Result<Self> {
        let bad = |m: &str| Err(Error::Malformed(m.to_string()));
        if h.len() < 2 || h.len() != values.len() {
            return bad("need at least two breakpoints with one value each");
        }
        if h[0] != T::zero() || *h.last().unwrap() != T::one() {
            return bad("grid must run from 0 to 1");
        }
        if h.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("grid must increase strictly");
        }
        if values[0] != T::zero() || *values.last().unwrap() != T::zero() {
            return bad("values must vanish at 0 and 1");
        }
        if values.iter().any(|v| *v < T::zero()) {
            return bad("values must be nonnegative");
        }
        Ok(BreakpointFunction { h, values })
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Linear interpolation; clamps outside `[0, 1]`.
    pub fn eval(&self, x: T) -> T {
        match self.h.iter().position(|&g| g >= x) {
            None => *self.values.last().unwrap(),
            Some(0) => self.values[0],
            Some(j) => {
                let (x0, x1) = (self.h[j - 1], self.h[j]);
                let (y0, y1) = (self.values[j - 1], self.values[j]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &b| a.max(b))
    }

    /// Index of the breakpoint nearest `x`.
    pub fn nearest(&self, x: T) -> usize {
        let d = |j: usize| (self.h[j] - x).abs();
        (0..self.len()).fold(0, |best, j| if d(j) < d(best) { j } else { best })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("h, F\n");
        for (h, v) in self.h.iter().zip(&self.values) {
            s.push_str(&format!("{}, {}\n", h.render(), v.render()));
        }
        s
    }

    pub fn to_f64(&self) -> BreakpointFunction<f64> {
        BreakpointFunction {
            h: self.h.iter().map(|x| x.to_f64()).collect(),
            values: self.values.iter().map(|x| x.to_f64()).collect(),
        }
    }
}

/// `F` on the grid `{0} ∪ {h1(b)} ∪ {1}`, one Pac-Man run per grid point.
pub fn bertoin_function<T: Scalar>(ct: &CutTree<T>) -> Result<BreakpointFunction<T>> {
    let mut counts = vec![0, ct.n];
    for b in ct.branchpoints() {
        counts.push(h_counts(ct, b)?.1);
    }
    counts.sort_unstable();
    counts.dedup();
    let mut h = Vec::with_capacity(counts.len());
    let mut values = Vec::with_capacity(counts.len());
    for c in counts {
        let x = T::mass(c, ct.n);
        values.push(run_count(ct, c, x)?.value);
        h.push(x);
    }
    BreakpointFunction::new(h, values)
}

/// Single pass variant of [`bertoin_function`]: a far child starts from its
/// parent's `(h1, F)`, an entry child inherits its parent's base, and each
/// branchpoint adds its own entry side.
pub fn bertoin_function_linear<T: Scalar>(ct: &CutTree<T>) -> Result<BreakpointFunction<T>> {
    let n = ct.n;
    let mut base: Vec<(usize, T)> = vec![(0, T::zero()); ct.len()];
    let mut point: Vec<(usize, T)> = vec![(0, T::zero()); ct.len()];
    let mut pts = vec![(0usize, T::zero()), (n, T::zero())];
    for x in ct.preorder() {
        if !ct.is_branch(x) {
            continue;
        }
        let p = ct.parent(x).unwrap();
        let b = if p != ROOT && ct.far(p) == x { point[p] } else { base[p] };
        base[x] = b;
        let e = ct.node(ct.entry(x)).mass;
        point[x] = (b.0 + e, b.1 + ct.tau(x) * T::mass(e, n));
        pts.push(point[x]);
    }
    pts.sort_by_key(|p| p.0);
    if pts.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::Malformed("two branchpoints share a grid point".into()));
    }
    BreakpointFunction::new(pts.iter().map(|p| T::mass(p.0, n)).collect(), pts.iter().map(|p| p.1).collect())
}

/// `F(h)` straight from the fragmentation timeline: along the current
/// lineage take the first cut leaving a reference side that fits in the
/// budget, spend it at that cut time, then follow the severed side.
pub fn direct_value<T: Scalar>(timeline: &FragmentationTimeline<T>, h: T) -> Result<T> {
    let n = timeline.n;
    let count = h.to_count(n).filter(|&c| c <= n).ok_or_else(|| Error::OffGrid(format!("{h:?}")))?;
    if count == 0 || count == n {
        return Ok(T::zero());
    }
    let mut left = count;
    let mut value = T::zero();
    let mut k = Some(0);
    while let Some(e) = k {
        let ev = &timeline.events[e];
        let entry = ev.entry_size();
        if entry <= left {
            value += ev.time * T::mass(entry, n);
            left -= entry;
            if left == 0 {
                return Ok(value);
            }
            k = ev.far_next;
        } else {
            k = ev.entry_next;
        }
    }
    Err(Error::Malformed("lineage ended with budget left".into()))
}
