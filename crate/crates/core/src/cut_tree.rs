//! The cut-tree: genealogy of the fragments.
//!
//! Node 0 is the root `ρ` with a single child, the whole tree. Each
//! branchpoint is a cut; its children are the entry side (holding the
//! component's reference vertex) and the far side. Leaves are the original
//! vertices. The segment above a branchpoint has length
//! `mass × (τ − τ_parent)`; segments above leaves have length 0.

use serde_json::{json, Value};

use crate::error::{contract, Error, Result};
use crate::model::{check_distinct, CutSchedule, Dsu, MassList, RootedTree};
use crate::scalar::Scalar;

pub type NodeId = usize;

/// The root `ρ`.
pub const ROOT: NodeId = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CutEdge {
    pub edge: usize,
    /// Endpoint on the entry side.
    pub u: u32,
    /// Endpoint on the far side.
    pub v: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind<T> {
    Root {
        child: NodeId,
    },
    Branch {
        tau: T,
        entry: NodeId,
        far: NodeId,
        /// A leaf of the far side: the image of the cut point.
        half_routing: NodeId,
        /// Absent for trees rebuilt from a function alone.
        cut: Option<CutEdge>,
    },
    Leaf {
        vertex: u32,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node<T> {
    pub kind: NodeKind<T>,
    pub parent: Option<NodeId>,
    /// Number of leaves below.
    pub mass: usize,
    /// Length of the segment to the parent.
    pub length: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutTree<T> {
    pub n: usize,
    pub root_vertex: u32,
    nodes: Vec<Node<T>>,
    leaf_of: Vec<NodeId>,
    depth: Vec<usize>,
    pre: Vec<usize>,
    count: Vec<usize>,
    leaf_order: Vec<NodeId>,
    leaf_start: Vec<usize>,
}

/// Builds the cut-tree of an instance by merging components in reverse
/// time, then orienting each merge by the reference vertex.
pub fn build_cut_tree<T: Scalar>(tree: &RootedTree, schedule: &CutSchedule) -> Result<CutTree<T>> {
    tree.validate()?;
    schedule.validate(tree.edges.len())?;
    let times = T::times(schedule)?;
    let order = check_distinct(&times)?;
    let n = tree.n;
    let ends: Vec<(usize, usize)> = tree.edges.iter().map(|&(a, b)| (a as usize - 1, b as usize - 1)).collect();

    // Merge tree: ids below n are vertices, n + j is the j-th merge.
    let mut merges: Vec<(usize, usize, usize)> = Vec::with_capacity(n.saturating_sub(1));
    let mut top: Vec<usize> = (0..n).collect();
    let mut dsu = Dsu::new(n);
    for &e in order.iter().rev() {
        let (a, b) = ends[e];
        let (ra, rb) = (dsu.find(a), dsu.find(b));
        merges.push((top[ra], top[rb], e));
        dsu.union(a, b);
        let r = dsu.find(a);
        top[r] = n + merges.len() - 1;
    }
    let whole = top[dsu.find(0)];

    // Euler intervals of the merge tree for membership tests.
    let total = n + merges.len();
    let mut tin = vec![0usize; total];
    let mut tout = vec![0usize; total];
    let mut msize = vec![1usize; total];
    let mut clock = 0;
    let mut stack = vec![(whole, false)];
    while let Some((x, done)) = stack.pop() {
        if done {
            tout[x] = clock;
            if x >= n {
                let (a, b, _) = merges[x - n];
                msize[x] = msize[a] + msize[b];
            }
            continue;
        }
        tin[x] = clock;
        clock += 1;
        stack.push((x, true));
        if x >= n {
            let (a, b, _) = merges[x - n];
            stack.push((a, false));
            stack.push((b, false));
        }
    }
    let inside = |x: usize, vertex: usize| tin[x] <= tin[vertex] && tin[vertex] < tout[x];

    let mut nodes: Vec<Node<T>> = Vec::with_capacity(2 * n);
    nodes.push(Node { kind: NodeKind::Root { child: 1 }, parent: None, mass: n, length: T::zero() });
    let mut leaf_of = vec![0; n];
    let mut pending_routing = Vec::new();
    // (merge node, reference vertex, parent node, parent time, is entry child)
    let mut work = vec![(whole, tree.root as usize - 1, ROOT, T::zero(), true)];
    while let Some((x, reference, parent, ptau, is_entry)) = work.pop() {
        let id = nodes.len();
        match &mut nodes[parent].kind {
            NodeKind::Root { child } => *child = id,
            NodeKind::Branch { entry, far, .. } => {
                if is_entry {
                    *entry = id
                } else {
                    *far = id
                }
            }
            NodeKind::Leaf { .. } => unreachable!(),
        }
        if x < n {
            leaf_of[x] = id;
            nodes.push(Node { kind: NodeKind::Leaf { vertex: x as u32 + 1 }, parent: Some(parent), mass: 1, length: T::zero() });
            continue;
        }
        let (a_side, b_side, e) = merges[x - n];
        let (entry_m, far_m) = if inside(a_side, reference) { (a_side, b_side) } else { (b_side, a_side) };
        let (p, q) = ends[e];
        let (u, v) = if inside(entry_m, p) { (p, q) } else { (q, p) };
        let tau = times[e];
        let mass = msize[x];
        nodes.push(Node {
            kind: NodeKind::Branch {
                tau,
                entry: usize::MAX,
                far: usize::MAX,
                half_routing: usize::MAX,
                cut: Some(CutEdge { edge: e, u: u as u32 + 1, v: v as u32 + 1 }),
            },
            parent: Some(parent),
            mass,
            length: T::mass(mass, n) * (tau - ptau),
        });
        pending_routing.push((id, v));
        work.push((far_m, v, id, tau, false));
        work.push((entry_m, reference, id, tau, true));
    }
    for (id, v) in pending_routing {
        if let NodeKind::Branch { half_routing, .. } = &mut nodes[id].kind {
            *half_routing = leaf_of[v];
        }
    }
    CutTree::from_nodes(n, tree.root, nodes)
}

impl<T: Scalar> CutTree<T> {
    /// Wraps raw nodes (node 0 must be the root) after checking every
    /// structural invariant.
    pub fn from_nodes(n: usize, root_vertex: u32, nodes: Vec<Node<T>>) -> Result<Self> {
        if nodes.len() != 2 * n || !matches!(nodes.first().map(|x| &x.kind), Some(NodeKind::Root { .. })) {
            return Err(Error::Malformed(format!("expected {} nodes with the root first", 2 * n)));
        }
        let total = nodes.len();
        let mut ct = CutTree {
            n,
            root_vertex,
            nodes,
            leaf_of: vec![usize::MAX; n],
            depth: vec![0; total],
            pre: vec![usize::MAX; total],
            count: vec![1; total],
            leaf_order: Vec::with_capacity(n),
            leaf_start: vec![0; total],
        };
        let mut stack = vec![(ROOT, false)];
        let mut clock = 0;
        let mut visited = 0;
        while let Some((x, done)) = stack.pop() {
            if done {
                ct.count[x] = clock - ct.pre[x];
                continue;
            }
            if ct.pre[x] != usize::MAX || visited >= total {
                return Err(Error::Malformed("node reached twice".into()));
            }
            visited += 1;
            ct.pre[x] = clock;
            clock += 1;
            ct.leaf_start[x] = ct.leaf_order.len();
            stack.push((x, true));
            let kids = ct.children(x);
            for &c in kids.iter().rev() {
                if c >= total || ct.nodes[c].parent != Some(x) {
                    return Err(Error::Malformed(format!("node {c} has a wrong parent link")));
                }
                ct.depth[c] = ct.depth[x] + 1;
                stack.push((c, false));
            }
            if let NodeKind::Leaf { vertex } = ct.nodes[x].kind {
                let slot = (vertex as usize).wrapping_sub(1);
                if slot >= n || ct.leaf_of[slot] != usize::MAX {
                    return Err(Error::Malformed(format!("bad leaf vertex {vertex}")));
                }
                ct.leaf_of[slot] = x;
                ct.leaf_order.push(x);
            }
        }
        if visited != total {
            return Err(Error::Malformed("unreachable nodes".into()));
        }
        let issues = ct.check_invariants();
        if !issues.is_empty() {
            return Err(Error::Malformed(issues.join("; ")));
        }
        Ok(ct)
    }

    /// Violated structural invariants, if any.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.root_vertex == 0 || self.root_vertex as usize > self.n {
            out.push(format!("root vertex {} out of range", self.root_vertex));
        }
        for (id, node) in self.nodes.iter().enumerate() {
            match &node.kind {
                NodeKind::Root { child } => {
                    if id != ROOT {
                        out.push(format!("second root at {id}"));
                    }
                    if self.nodes[*child].mass != self.n {
                        out.push("root child does not carry the full mass".into());
                    }
                }
                NodeKind::Leaf { .. } => {
                    if node.mass != 1 || node.length != T::zero() {
                        out.push(format!("leaf {id} must have mass 1/n and length 0"));
                    }
                }
                NodeKind::Branch { tau, entry, far, half_routing, .. } => {
                    let ptau = self.tau_of(node.parent.unwrap_or(ROOT)).unwrap_or_else(T::zero);
                    if !(*tau > ptau) {
                        out.push(format!("time does not increase at {id}"));
                    }
                    if node.mass != self.nodes[*entry].mass + self.nodes[*far].mass {
                        out.push(format!("mass not additive at {id}"));
                    }
                    let want = T::mass(node.mass, self.n) * (*tau - ptau);
                    if (node.length - want).abs() > T::slack(want) {
                        out.push(format!("length at {id} is not mass times elapsed time"));
                    }
                    if *half_routing >= self.nodes.len() || !self.is_leaf(*half_routing) || !self.is_ancestor(*far, *half_routing) {
                        out.push(format!("half-routing of {id} is not a far-side leaf"));
                    }
                }
            }
        }
        out
    }

    /// Overwrites one branchpoint time without touching lengths or
    /// re-checking anything. Only useful to build negative controls.
    pub fn set_tau_unchecked(&mut self, b: NodeId, tau: T) {
        if let NodeKind::Branch { tau: t, .. } = &mut self.nodes[b].kind {
            *t = tau;
        }
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node<T> {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The single child of `ρ`.
    pub fn top(&self) -> NodeId {
        match self.nodes[ROOT].kind {
            NodeKind::Root { child } => child,
            _ => unreachable!(),
        }
    }

    pub fn children(&self, id: NodeId) -> Vec<NodeId> {
        match self.nodes[id].kind {
            NodeKind::Root { child } => vec![child],
            NodeKind::Branch { entry, far, .. } => vec![entry, far],
            NodeKind::Leaf { .. } => vec![],
        }
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        matches!(self.nodes[id].kind, NodeKind::Leaf { .. })
    }

    pub fn is_branch(&self, id: NodeId) -> bool {
        matches!(self.nodes[id].kind, NodeKind::Branch { .. })
    }

    /// `0` at the root, the cut time at branchpoints, `None` at leaves
    /// (never cut).
    pub fn tau_of(&self, id: NodeId) -> Option<T> {
        match self.nodes[id].kind {
            NodeKind::Root { .. } => Some(T::zero()),
            NodeKind::Branch { tau, .. } => Some(tau),
            NodeKind::Leaf { .. } => None,
        }
    }

    pub fn tau(&self, b: NodeId) -> T {
        self.tau_of(b).expect("not a leaf")
    }

    pub fn nu(&self, id: NodeId) -> T {
        T::mass(self.nodes[id].mass, self.n)
    }

    pub fn entry(&self, b: NodeId) -> NodeId {
        match self.nodes[b].kind {
            NodeKind::Branch { entry, .. } => entry,
            NodeKind::Root { child } => child,
            NodeKind::Leaf { .. } => panic!("leaf {b} has no children"),
        }
    }

    pub fn far(&self, b: NodeId) -> NodeId {
        match self.nodes[b].kind {
            NodeKind::Branch { far, .. } => far,
            _ => panic!("node {b} is not a branchpoint"),
        }
    }

    pub fn half_routing(&self, b: NodeId) -> NodeId {
        match self.nodes[b].kind {
            NodeKind::Branch { half_routing, .. } => half_routing,
            _ => panic!("node {b} is not a branchpoint"),
        }
    }

    pub fn cut(&self, b: NodeId) -> Option<CutEdge> {
        match self.nodes[b].kind {
            NodeKind::Branch { cut, .. } => cut,
            _ => None,
        }
    }

    pub fn vertex(&self, leaf: NodeId) -> Option<u32> {
        match self.nodes[leaf].kind {
            NodeKind::Leaf { vertex } => Some(vertex),
            _ => None,
        }
    }

    pub fn leaf(&self, vertex: u32) -> Result<NodeId> {
        self.leaf_of.get((vertex as usize).wrapping_sub(1)).copied().ok_or(Error::UnknownLeaf(vertex))
    }

    /// The leaf of the root vertex.
    pub fn leaf0(&self) -> NodeId {
        self.leaf_of[self.root_vertex as usize - 1]
    }

    pub fn branchpoints(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&i| self.is_branch(i))
    }

    pub fn depth(&self, id: NodeId) -> usize {
        self.depth[id]
    }

    /// Ancestor-or-self test.
    pub fn is_ancestor(&self, a: NodeId, b: NodeId) -> bool {
        self.pre[a] <= self.pre[b] && self.pre[b] < self.pre[a] + self.count[a]
    }

    pub fn lca(&self, mut a: NodeId, mut b: NodeId) -> NodeId {
        while self.depth[a] > self.depth[b] {
            a = self.nodes[a].parent.unwrap();
        }
        while self.depth[b] > self.depth[a] {
            b = self.nodes[b].parent.unwrap();
        }
        while a != b {
            a = self.nodes[a].parent.unwrap();
            b = self.nodes[b].parent.unwrap();
        }
        a
    }

    /// Sum of segment lengths from `b` up to its ancestor `a`.
    pub fn path_length(&self, a: NodeId, mut b: NodeId) -> T {
        let mut acc = T::zero();
        while b != a {
            acc += self.nodes[b].length;
            b = self.nodes[b].parent.expect("a is an ancestor of b");
        }
        acc
    }

    /// Leaves in depth-first order, entry side first.
    pub fn leaf_order(&self) -> &[NodeId] {
        &self.leaf_order
    }

    /// Positions `[lo, hi)` of the leaves below `id` in [`CutTree::leaf_order`].
    pub fn leaf_span(&self, id: NodeId) -> (usize, usize) {
        let lo = self.leaf_start[id];
        (lo, lo + self.nodes[id].mass)
    }

    /// Largest root-to-node length.
    pub fn height(&self) -> T {
        let mut dist = vec![T::zero(); self.nodes.len()];
        let mut best = T::zero();
        let mut stack = vec![ROOT];
        while let Some(x) = stack.pop() {
            for c in self.children(x) {
                dist[c] = dist[x] + self.nodes[c].length;
                best = best.max(dist[c]);
                stack.push(c);
            }
        }
        best
    }

    /// Entry-first preorder of all nodes.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = (0..self.nodes.len()).collect();
        v.sort_unstable_by_key(|&x| self.pre[x]);
        v
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "root_vertex": self.root_vertex,
            "tree": self.node_json(self.top()),
        })
    }

    fn node_json(&self, id: NodeId) -> Value {
        let node = &self.nodes[id];
        match &node.kind {
            NodeKind::Leaf { vertex } => json!({
                "vertex": vertex,
                "mass": self.nu(id).to_json(),
            }),
            NodeKind::Branch { tau, entry, far, half_routing, cut } => json!({
                "tau": tau.to_json(),
                "mass": self.nu(id).to_json(),
                "length_to_parent": node.length.to_json(),
                "cut_edge": cut.map(|c| c.edge),
                "u": cut.map(|c| c.u),
                "v": cut.map(|c| c.v),
                "half_routing": self.vertex(*half_routing),
                "children": [self.node_json(*entry), self.node_json(*far)],
            }),
            NodeKind::Root { .. } => unreachable!(),
        }
    }

    /// First difference between two cut-trees compared as ordered
    /// (entry, far) trees with equal times, masses and lengths and
    /// half-routings at the same relative leaf position. `None` when equal.
    pub fn first_difference(&self, other: &CutTree<T>, tol: T) -> Option<String> {
        if self.n != other.n {
            return Some(format!("sizes {} and {}", self.n, other.n));
        }
        let close = |a: T, b: T| (a - b).abs() <= tol;
        let mut stack = vec![(self.top(), other.top())];
        while let Some((x, y)) = stack.pop() {
            let (nx, ny) = (&self.nodes[x], &other.nodes[y]);
            if nx.mass != ny.mass || !close(nx.length, ny.length) {
                return Some(format!("mass or length differs at nodes {x}/{y}"));
            }
            match (&nx.kind, &ny.kind) {
                (NodeKind::Leaf { .. }, NodeKind::Leaf { .. }) => {}
                (NodeKind::Branch { tau: ta, .. }, NodeKind::Branch { tau: tb, .. }) => {
                    if !close(*ta, *tb) {
                        return Some(format!("time differs at nodes {x}/{y}"));
                    }
                    let rel = |ct: &CutTree<T>, b: NodeId| {
                        ct.leaf_order.iter().position(|&l| l == ct.half_routing(b)).unwrap() - ct.leaf_span(b).0
                    };
                    if rel(self, x) != rel(other, y) {
                        return Some(format!("half-routing differs at nodes {x}/{y}"));
                    }
                    stack.push((self.entry(x), other.entry(y)));
                    stack.push((self.far(x), other.far(y)));
                }
                _ => return Some(format!("node kinds differ at {x}/{y}")),
            }
        }
        None
    }
}

/// Times recovered from lengths alone: the sum of `length / mass` over the
/// segments above each branchpoint.
pub fn tau_from_lengths<T: Scalar>(ct: &CutTree<T>) -> Vec<(NodeId, T)> {
    let mut rec = vec![T::zero(); ct.len()];
    let mut out = Vec::with_capacity(ct.n.saturating_sub(1));
    for x in ct.preorder() {
        if let Some(p) = ct.parent(x) {
            if ct.is_branch(x) {
                rec[x] = rec[p] + ct.node(x).length / ct.nu(x);
                out.push((x, rec[x]));
            }
        }
    }
    out
}

/// Masses of the subtrees alive at time `t`: born at a cut `<= t` and not
/// yet cut themselves.
pub fn components_from_cut_tree<T: Scalar>(ct: &CutTree<T>, t: T) -> MassList<T> {
    let counts = (1..ct.len()).filter_map(|c| {
        let born = ct.tau_of(ct.parent(c)?).expect("parents are not leaves");
        let alive = born <= t && ct.tau_of(c).is_none_or(|tc| tc > t);
        alive.then_some(ct.node(c).mass)
    });
    MassList::from_counts(counts, ct.n)
}

/// Length of the cut-tree path between the leaves of two vertices.
pub fn leaf_distance<T: Scalar>(ct: &CutTree<T>, i: u32, j: u32) -> Result<T> {
    let (a, b) = (ct.leaf(i)?, ct.leaf(j)?);
    if a == b {
        return Err(contract("leaf distance needs two distinct leaves"));
    }
    let m = ct.lca(a, b);
    Ok(ct.path_length(m, a) + ct.path_length(m, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragmentation::fragmentation_timeline;
    use crate::model::{component_masses, fixtures, Instance, Mode};
    use crate::samplers::{sample_cayley, sample_cut_schedule, Seed};
    use crate::scalar::Exact;

    fn r(p: i64, q: i64) -> Exact {
        Exact::ratio(p, q)
    }

    fn ct(i: &Instance) -> CutTree<Exact> {
        build_cut_tree(&i.tree, &i.schedule).unwrap()
    }

    #[test]
    fn p3_shape() {
        let c = ct(&fixtures::p3());
        let b1 = c.top();
        assert_eq!(c.tau(b1), r(1, 1));
        assert_eq!(c.node(b1).length, r(1, 1));
        assert_eq!(c.cut(b1), Some(CutEdge { edge: 1, u: 2, v: 3 }));
        assert_eq!(c.vertex(c.half_routing(b1)), Some(3));
        assert_eq!(c.vertex(c.far(b1)), Some(3));
        let b2 = c.entry(b1);
        assert_eq!(c.tau(b2), r(2, 1));
        assert_eq!(c.node(b2).length, r(2, 3));
        assert_eq!(c.cut(b2), Some(CutEdge { edge: 0, u: 1, v: 2 }));
        assert_eq!(c.vertex(c.half_routing(b2)), Some(2));
        assert_eq!(c.vertex(c.entry(b2)), Some(1));
        assert_eq!(c.leaf0(), c.entry(b2));
        for v in 1..=3 {
            assert_eq!(c.nu(c.leaf(v).unwrap()), r(1, 3));
        }
        assert_eq!(c.height(), r(5, 3));
    }

    #[test]
    fn c3_and_single_edge_shape() {
        let c = ct(&fixtures::c3());
        let b1 = c.top();
        assert_eq!((c.tau(b1), c.node(b1).length), (r(1, 1), r(1, 1)));
        assert_eq!(c.vertex(c.far(b1)), Some(2));
        let b2 = c.entry(b1);
        assert_eq!((c.tau(b2), c.node(b2).length, c.nu(b2)), (r(2, 1), r(2, 3), r(2, 3)));
        assert_eq!(c.vertex(c.far(b2)), Some(3));

        let c = ct(&fixtures::single_edge());
        let b = c.top();
        assert_eq!((c.tau(b), c.node(b).length), (r(1, 1), r(1, 1)));
        assert_eq!(c.nu(c.entry(b)), r(1, 2));
        assert_eq!(leaf_distance(&c, 1, 2).unwrap(), r(0, 1));

        let c = ct(&fixtures::single_vertex());
        assert_eq!(c.len(), 2);
        assert!(c.is_leaf(c.top()));
        assert_eq!(components_from_cut_tree(&c, r(3, 1)).masses, vec![r(1, 1)]);
    }

    #[test]
    fn tau_recovery_fixtures() {
        let c = ct(&fixtures::p3());
        let got: Vec<Exact> = tau_from_lengths(&c).into_iter().map(|x| x.1).collect();
        assert_eq!(got, vec![r(1, 1), r(2, 1)]);
        let c = ct(&fixtures::p4());
        let got: Vec<Exact> = tau_from_lengths(&c).into_iter().map(|x| x.1).collect();
        assert_eq!(got, vec![r(1, 1), r(2, 1), r(3, 1)]);
    }

    #[test]
    fn components_fixtures() {
        let c = ct(&fixtures::p3());
        assert_eq!(components_from_cut_tree(&c, r(3, 2)).masses, vec![r(2, 3), r(1, 3)]);
        assert_eq!(components_from_cut_tree(&c, r(1, 2)).masses, vec![r(1, 1)]);
        let c = ct(&fixtures::p4());
        assert_eq!(components_from_cut_tree(&c, r(5, 2)).masses, vec![r(1, 2), r(1, 4), r(1, 4)]);
    }

    #[test]
    fn distances_fixtures() {
        let c = ct(&fixtures::p3());
        assert_eq!(leaf_distance(&c, 1, 2).unwrap(), r(0, 1));
        assert_eq!(leaf_distance(&c, 1, 3).unwrap(), r(2, 3));
        assert!(leaf_distance(&c, 1, 1).is_err());
        assert!(matches!(leaf_distance(&c, 1, 9), Err(Error::UnknownLeaf(9))));
    }

    #[test]
    fn random_instances_match_timeline() {
        let s = Seed::new(4);
        for rep in 0..40u64 {
            let n = 2 + rep as usize * 2;
            let tree = sample_cayley(n, &s.derive("t", rep)).unwrap();
            let sch = sample_cut_schedule(&tree, Mode::Rank, &s.derive("c", rep));
            let c: CutTree<Exact> = build_cut_tree(&tree, &sch).unwrap();
            assert!(c.check_invariants().is_empty());
            let tl = fragmentation_timeline::<Exact>(&tree, &sch).unwrap();
            for (b, tau) in tau_from_lengths(&c) {
                assert_eq!(tau, c.tau(b));
            }
            for k in 0..n as i64 {
                for t in [r(k, 1), r(2 * k + 1, 2)] {
                    assert_eq!(components_from_cut_tree(&c, t), component_masses(&tree, &sch, t).unwrap());
                }
            }
            // each branchpoint matches the timeline event with the same edge
            for b in c.branchpoints().collect::<Vec<_>>() {
                let cut = c.cut(b).unwrap();
                let ev = tl.events.iter().find(|e| e.edge == cut.edge).unwrap();
                assert_eq!((ev.u, ev.v), (cut.u, cut.v));
                assert_eq!(c.node(c.far(b)).mass, ev.far_size);
                assert_eq!(c.node(c.entry(b)).mass, ev.entry_size());
            }
            for i in 1..=n as u32 {
                for j in (i + 1)..=n as u32 {
                    assert_eq!(leaf_distance(&c, i, j).unwrap(), tl.pair_integral(i, j).unwrap());
                }
            }
        }
    }

    #[test]
    fn float_build_matches_exact_shape() {
        let s = Seed::new(12);
        let tree = sample_cayley(60, &s).unwrap();
        let sch = sample_cut_schedule(&tree, Mode::Exponential, &s);
        let c: CutTree<f64> = build_cut_tree(&tree, &sch).unwrap();
        for (b, tau) in tau_from_lengths(&c) {
            assert!((tau - c.tau(b)).abs() <= 1e-9 * c.tau(b));
        }
        assert!(c.first_difference(&c, 0.0).is_none());
    }

    #[test]
    fn json_shape() {
        let j = ct(&fixtures::p3()).to_json();
        assert_eq!(j["tree"]["tau"], "1/1");
        assert_eq!(j["tree"]["children"][1]["vertex"], 3);
        assert_eq!(j["tree"]["children"][0]["length_to_parent"], "2/3");
        assert_eq!(j["tree"]["children"][0]["children"][0]["mass"], "1/3");
    }
}
