//! Prim exploration order and the lattice path of the forest obtained by
//! deleting the largest edge labels.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{contract, Result};
use crate::model::{CutSchedule, MassList, RootedTree};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimPath {
    /// Vertices in Prim order.
    pub order: Vec<u32>,
    /// `S_0 = 0, ..., S_n`.
    pub values: Vec<i64>,
    /// Number of deleted edges.
    pub k: usize,
}

/// Starting from the root, repeatedly visit the pending child whose edge to
/// its parent has the smallest label.
pub fn prim_order(tree: &RootedTree, schedule: &CutSchedule) -> Result<Vec<u32>> {
    let ranks = schedule.ranks()?;
    schedule.validate(tree.edges.len())?;
    tree.validate()?;
    let o = tree.orient();
    let mut children = vec![Vec::new(); tree.n];
    for &v in &o.order[1..] {
        children[o.parent[v]].push(v);
    }
    let mut heap = BinaryHeap::new();
    let mut order = Vec::with_capacity(tree.n);
    let root = tree.root as usize - 1;
    heap.push(Reverse((0u32, root)));
    while let Some(Reverse((_, v))) = heap.pop() {
        order.push(v as u32 + 1);
        for &c in &children[v] {
            heap.push(Reverse((ranks[o.parent_edge[c]], c)));
        }
    }
    Ok(order)
}

/// Path of `X_i - 1` summed in Prim order, where `X_i` counts the children
/// of the `i`-th vertex once the `k` largest labels are deleted.
pub fn prim_path(tree: &RootedTree, schedule: &CutSchedule, k: usize) -> Result<PrimPath> {
    let order = prim_order(tree, schedule)?;
    prim_path_with_order(tree, schedule, order, k)
}

/// As [`prim_path`], reusing a precomputed order.
pub fn prim_path_with_order(tree: &RootedTree, schedule: &CutSchedule, order: Vec<u32>, k: usize) -> Result<PrimPath> {
    let n = tree.n;
    if k >= n.max(1) {
        return Err(contract(format!("k = {k} outside 0..={}", n.saturating_sub(1))));
    }
    let ranks = schedule.ranks()?;
    let cutoff = (n - k) as u32;
    let o = tree.orient();
    let mut kept_children = vec![0i64; n];
    for &v in &o.order[1..] {
        if ranks[o.parent_edge[v]] < cutoff {
            kept_children[o.parent[v]] += 1;
        }
    }
    let mut values = Vec::with_capacity(n + 1);
    let mut s = 0i64;
    values.push(0);
    for &v in &order {
        s += kept_children[v as usize - 1] - 1;
        values.push(s);
    }
    Ok(PrimPath { order, values, k })
}

impl PrimPath {
    pub fn n(&self) -> usize {
        self.order.len()
    }

    /// Gaps between successive strict new minima of the path, `S_0` being
    /// the first.
    pub fn component_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::new();
        let mut last = 0;
        let mut min = 0i64;
        for (i, &s) in self.values.iter().enumerate().skip(1) {
            if s < min {
                min = s;
                sizes.push(i - last);
                last = i;
            }
        }
        sizes
    }

    pub fn to_csv(&self) -> String {
        self.values.iter().enumerate().map(|(i, s)| format!("{i}, {s}\n")).collect()
    }
}

/// Component masses read off the path.
pub fn path_component_sizes<T: Scalar>(path: &PrimPath) -> MassList<T> {
    MassList::from_counts(path.component_sizes(), path.n())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fixtures, Dsu, Mode};
    use crate::samplers::{sample_cayley, sample_cut_schedule, Seed};
    use crate::scalar::Exact;

    /// Component sizes of the forest keeping labels `< n - k`, and the
    /// component label of every vertex.
    fn forest(tree: &RootedTree, ranks: &[u32], k: usize) -> (Vec<usize>, Vec<usize>) {
        let mut d = Dsu::new(tree.n);
        for (e, &(a, b)) in tree.edges.iter().enumerate() {
            if (ranks[e] as usize) < tree.n - k {
                d.union(a as usize - 1, b as usize - 1);
            }
        }
        let labels: Vec<usize> = (0..tree.n).map(|v| d.find(v)).collect();
        let mut counts = vec![0; tree.n];
        for &l in &labels {
            counts[l] += 1;
        }
        let mut sizes: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        (sizes, labels)
    }

    #[test]
    fn figure_fixture() {
        let f = fixtures::prim_figure();
        let order = prim_order(&f.tree, &f.schedule).unwrap();
        assert_eq!(order, (1..=15).collect::<Vec<u32>>());
        let p = prim_path(&f.tree, &f.schedule, 6).unwrap();
        assert_eq!(p.values, vec![0, 0, 1, 0, -1, 0, -1, -2, -1, -2, -3, -3, -4, -5, -6, -7]);
        let mut sizes = p.component_sizes();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, vec![4, 3, 3, 2, 1, 1, 1]);
    }

    #[test]
    fn small_orders() {
        let path = RootedTree::new(3, 1, vec![(1, 2), (2, 3)]).unwrap();
        assert_eq!(prim_order(&path, &CutSchedule::Rank(vec![1, 2])).unwrap(), vec![1, 2, 3]);
        let star = RootedTree::new(4, 1, vec![(1, 2), (1, 3), (1, 4)]).unwrap();
        assert_eq!(prim_order(&star, &CutSchedule::Rank(vec![3, 1, 2])).unwrap(), vec![1, 3, 4, 2]);
        assert!(prim_order(&star, &CutSchedule::Exponential(vec![1.0, 2.0, 3.0])).is_err());
        assert!(prim_path(&star, &CutSchedule::Rank(vec![3, 1, 2]), 4).is_err());
    }

    #[test]
    fn extreme_k() {
        let s = Seed::new(8);
        let tree = sample_cayley(30, &s).unwrap();
        let sch = sample_cut_schedule(&tree, Mode::Rank, &s);
        let all = prim_path(&tree, &sch, 29).unwrap();
        assert_eq!(all.values, (0..=30).map(|i| -(i as i64)).collect::<Vec<_>>());
        assert_eq!(path_component_sizes::<Exact>(&all).masses, vec![Exact::ratio(1, 30); 30]);
        let none = prim_path(&tree, &sch, 0).unwrap();
        assert_eq!(*none.values.last().unwrap(), -1);
        assert_eq!(none.component_sizes(), vec![30]);
    }

    #[test]
    fn identity_and_contiguity() {
        let s = Seed::new(31);
        for rep in 0..40u64 {
            let n = 1 + rep as usize * 3;
            let tree = sample_cayley(n, &s.derive("t", rep)).unwrap();
            let sch = sample_cut_schedule(&tree, Mode::Rank, &s.derive("r", rep));
            let order = prim_order(&tree, &sch).unwrap();
            for k in 0..n {
                let p = prim_path_with_order(&tree, &sch, order.clone(), k).unwrap();
                let (expected, labels) = forest(&tree, sch.ranks().unwrap(), k);
                let mut got = p.component_sizes();
                got.sort_unstable_by(|a, b| b.cmp(a));
                assert_eq!(got, expected);
                assert_eq!(*p.values.last().unwrap(), -(expected.len() as i64));
                // each component occupies one block of consecutive positions
                let mut blocks = 1;
                for w in order.windows(2) {
                    if labels[w[0] as usize - 1] != labels[w[1] as usize - 1] {
                        blocks += 1;
                    }
                }
                assert_eq!(blocks, expected.len());
            }
        }
    }
}
