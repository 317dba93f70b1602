//! From `F` back to a cut-tree (stick-breaking), routing completion, and
//! the rebuild of a tree with cut times from a routed cut-tree.

use rand::Rng;

use crate::cut_tree::{CutTree, Node, NodeId, NodeKind, ROOT};
use crate::error::{contract, Error, Result};
use crate::model::{CutSchedule, Instance, RootedTree};
use crate::pacman::BreakpointFunction;
use crate::samplers::Seed;
use crate::scalar::Scalar;

/// Rebuilds the cut-tree encoded by a function on the uniform grid
/// `{0, 1/n, ..., 1}`.
///
/// A piece of the grid `[lo, hi]` born at time `t0` with base value `f0` is
/// handled like the whole function: the first zero of
/// `f(h) - f0 - (t0 + s)(h - h_lo)` jumps to smaller `h` as `s` grows; each
/// jump is a spine branchpoint whose far side is the piece between
/// consecutive jump positions. Grid cells become leaves, cell `j` holding
/// vertex `j + 1`.
pub fn xi_stick_breaking<T: Scalar>(f: &BreakpointFunction<T>) -> Result<CutTree<T>> {
    let f = BreakpointFunction::new(f.h.clone(), f.values.clone())?;
    let n = f.len() - 1;
    if f.h.iter().enumerate().any(|(j, &h)| h != T::mass(j, n)) {
        return Err(Error::Malformed("grid is not uniform".into()));
    }
    let mut nodes: Vec<Node<T>> = Vec::with_capacity(2 * n);
    nodes.push(Node { kind: NodeKind::Root { child: usize::MAX }, parent: None, mass: n, length: T::zero() });
    let mut leaf_of_cell = vec![usize::MAX; n];
    let mut routed = Vec::new();

    struct Piece<T> {
        lo: usize,
        hi: usize,
        t0: T,
        f0: T,
        parent: NodeId,
        far: bool,
    }
    let attach = |nodes: &mut Vec<Node<T>>, parent: NodeId, far: bool, child: NodeId| match &mut nodes[parent].kind {
        NodeKind::Root { child: c } => *c = child,
        NodeKind::Branch { entry, far: fr, .. } => {
            if far {
                *fr = child
            } else {
                *entry = child
            }
        }
        NodeKind::Leaf { .. } => unreachable!(),
    };
    let leaf = |nodes: &mut Vec<Node<T>>, cells: &mut Vec<usize>, cell: usize, parent: NodeId| {
        let id = nodes.len();
        nodes.push(Node { kind: NodeKind::Leaf { vertex: cell as u32 + 1 }, parent: Some(parent), mass: 1, length: T::zero() });
        cells[cell] = id;
        id
    };

    let mut work = vec![Piece { lo: 0, hi: n, t0: T::zero(), f0: T::zero(), parent: ROOT, far: false }];
    while let Some(p) = work.pop() {
        if p.hi - p.lo == 1 {
            let id = leaf(&mut nodes, &mut leaf_of_cell, p.lo, p.parent);
            attach(&mut nodes, p.parent, p.far, id);
            continue;
        }
        // Strict prefix minima of the relative slopes, in grid order.
        let base = f.h[p.lo];
        let mut jumps: Vec<(usize, T)> = Vec::new();
        for j in p.lo + 1..p.hi {
            let x = f.h[j] - base;
            let s = (f.values[j] - p.f0) / x - p.t0;
            if jumps.last().is_none_or(|&(_, b)| s < b) {
                jumps.push((j, s));
            }
        }
        // Time order is reverse grid order.
        let (mut parent, mut far) = (p.parent, p.far);
        let mut upper = p.hi;
        let mut ptau = p.t0;
        for &(j, s) in jumps.iter().rev() {
            if !(s > T::zero()) {
                return Err(Error::Malformed(format!("nonpositive jump time at grid point {j}")));
            }
            let tau = p.t0 + s;
            let mass = upper - p.lo;
            let id = nodes.len();
            nodes.push(Node {
                kind: NodeKind::Branch { tau, entry: usize::MAX, far: usize::MAX, half_routing: usize::MAX, cut: None },
                parent: Some(parent),
                mass,
                length: T::mass(mass, n) * (tau - ptau),
            });
            attach(&mut nodes, parent, far, id);
            routed.push((id, j));
            work.push(Piece { lo: j, hi: upper, t0: tau, f0: f.values[j], parent: id, far: true });
            parent = id;
            far = false;
            upper = j;
            ptau = tau;
        }
        let id = leaf(&mut nodes, &mut leaf_of_cell, p.lo, parent);
        attach(&mut nodes, parent, false, id);
    }
    for (id, cell) in routed {
        if let NodeKind::Branch { half_routing, .. } = &mut nodes[id].kind {
            *half_routing = leaf_of_cell[cell];
        }
    }
    CutTree::from_nodes(n, 1, nodes)
}

/// A cut-tree with one chosen entry-side leaf per branchpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct RoutedCutTree<T> {
    pub tree: CutTree<T>,
    /// Indexed by node; meaningful at branchpoints only.
    pub routing: Vec<NodeId>,
}

/// Picks, independently for every branchpoint, a uniform leaf of its entry
/// side.
pub fn complete_routings<T: Scalar>(ct: &CutTree<T>, seed: &Seed) -> RoutedCutTree<T> {
    let mut rng = seed.rng();
    let mut routing = vec![usize::MAX; ct.len()];
    for (b, slot) in routing.iter_mut().enumerate() {
        if ct.is_branch(b) {
            let (lo, hi) = ct.leaf_span(ct.entry(b));
            *slot = ct.leaf_order()[rng.random_range(lo..hi)];
        }
    }
    RoutedCutTree { tree: ct.clone(), routing }
}

/// Routes every branchpoint through the entry endpoint of its cut edge.
pub fn true_routings<T: Scalar>(ct: &CutTree<T>) -> Result<RoutedCutTree<T>> {
    let mut routing = vec![usize::MAX; ct.len()];
    for (b, slot) in routing.iter_mut().enumerate() {
        if ct.is_branch(b) {
            let cut = ct.cut(b).ok_or_else(|| contract("cut-tree carries no cut edges"))?;
            *slot = ct.leaf(cut.u)?;
        }
    }
    Ok(RoutedCutTree { tree: ct.clone(), routing })
}

/// One edge per branchpoint between its routing leaf and its half-routing
/// leaf, cut at the branchpoint time; the root is the vertex of leaf 0.
pub fn phi_rebuild<T: Scalar>(rct: &RoutedCutTree<T>) -> Result<Instance> {
    let ct = &rct.tree;
    let with_cuts = ct.branchpoints().all(|b| ct.cut(b).is_some());
    let mut slots: Vec<(usize, (u32, u32), T)> = Vec::with_capacity(ct.n.saturating_sub(1));
    for b in ct.preorder() {
        if !ct.is_branch(b) {
            continue;
        }
        let z = *rct.routing.get(b).ok_or_else(|| contract("routing table too short"))?;
        if z >= ct.len() || !ct.is_leaf(z) || !ct.is_ancestor(ct.entry(b), z) {
            return Err(contract(format!("routing of branchpoint {b} is not an entry-side leaf")));
        }
        let a = ct.vertex(z).unwrap();
        let v = ct.vertex(ct.half_routing(b)).unwrap();
        let slot = if with_cuts { ct.cut(b).unwrap().edge } else { slots.len() };
        slots.push((slot, (a, v), ct.tau(b)));
    }
    slots.sort_by_key(|s| s.0);
    let edges = slots.iter().map(|s| s.1).collect();
    let times: Vec<T> = slots.iter().map(|s| s.2).collect();
    let root = ct.vertex(ct.leaf0()).unwrap();
    let schedule: CutSchedule = T::into_schedule(&times)?;
    Instance::new(RootedTree { n: ct.n, root, edges }, schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cut_tree::build_cut_tree;
    use crate::model::{fixtures, Mode};
    use crate::pacman::bertoin_function;
    use crate::samplers::{sample_cayley, sample_cut_schedule};
    use crate::scalar::Exact;

    fn r(p: i64, q: i64) -> Exact {
        Exact::ratio(p, q)
    }

    fn ct(i: &Instance) -> CutTree<Exact> {
        build_cut_tree(&i.tree, &i.schedule).unwrap()
    }

    #[test]
    fn xi_on_fixtures() {
        for inst in [fixtures::p3(), fixtures::p4(), fixtures::c3(), fixtures::single_edge(), fixtures::single_vertex()] {
            let c = ct(&inst);
            let x = xi_stick_breaking(&bertoin_function(&c).unwrap()).unwrap();
            assert_eq!(x.first_difference(&c, r(0, 1)), None);
        }
        let x = xi_stick_breaking(&bertoin_function(&ct(&fixtures::p3())).unwrap()).unwrap();
        let b1 = x.top();
        let b2 = x.entry(b1);
        assert_eq!((x.tau(b1), x.tau(b2)), (r(1, 1), r(2, 1)));
        assert_eq!(x.node(b1).length + x.node(b2).length, r(5, 3));
        assert_eq!((x.nu(x.far(b1)), x.nu(x.far(b2))), (r(1, 3), r(1, 3)));
    }

    #[test]
    fn xi_single_edge_function() {
        let t1 = r(7, 2);
        let f = BreakpointFunction::new(vec![r(0, 1), r(1, 2), r(1, 1)], vec![r(0, 1), t1 / r(2, 1), r(0, 1)]).unwrap();
        let x = xi_stick_breaking(&f).unwrap();
        assert_eq!(x.tau(x.top()), t1);
        assert_eq!((x.nu(x.entry(x.top())), x.nu(x.far(x.top()))), (r(1, 2), r(1, 2)));
    }

    #[test]
    fn xi_rejects_malformed() {
        let zero_inside = BreakpointFunction::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.0, 0.0]).unwrap();
        assert!(xi_stick_breaking(&zero_inside).is_err());
        let uneven = BreakpointFunction::new(vec![0.0, 0.25, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert!(xi_stick_breaking(&uneven).is_err());
    }

    #[test]
    fn phi_on_fixtures() {
        let p3 = fixtures::p3();
        let back = phi_rebuild(&true_routings(&ct(&p3)).unwrap()).unwrap();
        assert_eq!(back, p3);
        let e = fixtures::single_edge();
        assert_eq!(phi_rebuild(&true_routings(&ct(&e)).unwrap()).unwrap(), e);

        // C3 with the first cut routed through leaf 3 instead of leaf 1.
        let c3 = fixtures::c3();
        let c = ct(&c3);
        let mut routed = true_routings(&c).unwrap();
        routed.routing[c.top()] = c.leaf(3).unwrap();
        let shuffled = phi_rebuild(&routed).unwrap();
        assert_eq!(shuffled.tree.edges, vec![(3, 2), (1, 3)]);
        assert_eq!(shuffled.schedule, CutSchedule::Rank(vec![1, 2]));
        assert!(!shuffled.same_labeled(&c3));
        let f = bertoin_function(&c).unwrap();
        let g = bertoin_function(&ct(&shuffled)).unwrap();
        assert_eq!(f, g);

        routed.routing[c.top()] = c.leaf(2).unwrap();
        assert!(phi_rebuild(&routed).is_err());
    }

    #[test]
    fn sampled_routing_frequencies() {
        let c = ct(&fixtures::c3());
        let b1 = c.top();
        let l3 = c.leaf(3).unwrap();
        let reps = 10_000;
        let hits = (0..reps)
            .filter(|&k| complete_routings(&c, &Seed::new(5).derive("z", k)).routing[b1] == l3)
            .count();
        assert!((hits as f64 / reps as f64 - 0.5).abs() <= 0.05);
        let e = ct(&fixtures::single_edge());
        let z = complete_routings(&e, &Seed::new(1)).routing[e.top()];
        assert_eq!(e.vertex(z), Some(1));
    }

    #[test]
    fn random_roundtrips() {
        let s = Seed::new(77);
        for rep in 0..30u64 {
            let n = 2 + 3 * rep as usize;
            let tree = sample_cayley(n, &s.derive("t", rep)).unwrap();
            let sch = sample_cut_schedule(&tree, Mode::Rank, &s.derive("c", rep));
            let inst = Instance::new(tree, sch).unwrap();
            let c = ct(&inst);
            let f = bertoin_function(&c).unwrap();
            let x = xi_stick_breaking(&f).unwrap();
            assert_eq!(x.first_difference(&c, r(0, 1)), None);
            assert!(phi_rebuild(&true_routings(&c).unwrap()).unwrap().same_labeled(&inst));
            for k in 0..3 {
                let rebuilt = phi_rebuild(&complete_routings(&x, &s.derive("z", k))).unwrap();
                let c2 = ct(&rebuilt);
                assert_eq!(c2.first_difference(&x, r(0, 1)), None);
                assert_eq!(bertoin_function(&c2).unwrap(), f);
            }
        }
    }
}
