//! Trees, cut schedules, mass lists and the component oracle.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{contract, Error, Result};
use crate::scalar::Scalar;

/// A finite tree on vertices `1..=n`, rooted at `root`, carrying the uniform
/// mass `1/n` on every vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedTree {
    pub n: usize,
    pub root: u32,
    pub edges: Vec<(u32, u32)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoVertices,
    RootOutOfRange(u32),
    EdgeCount { expected: usize, got: usize },
    VertexOutOfRange { edge: usize, vertex: u32 },
    SelfLoop { edge: usize },
    DuplicateEdge { first: usize, second: usize },
    Cycle { edge: usize },
    Disconnected { components: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoVertices => write!(f, "tree has no vertices"),
            Violation::RootOutOfRange(r) => write!(f, "root {r} is not a vertex"),
            Violation::EdgeCount { expected, got } => {
                write!(f, "expected {expected} edges, found {got}")
            }
            Violation::VertexOutOfRange { edge, vertex } => {
                write!(f, "edge {edge} uses unknown vertex {vertex}")
            }
            Violation::SelfLoop { edge } => write!(f, "edge {edge} is a self-loop"),
            Violation::DuplicateEdge { first, second } => {
                write!(f, "edges {first} and {second} are duplicates")
            }
            Violation::Cycle { edge } => write!(f, "edge {edge} closes a cycle"),
            Violation::Disconnected { components } => {
                write!(f, "graph has {components} connected components")
            }
        }
    }
}

/// Every violated tree invariant; empty iff `tree` is a valid rooted tree.
pub fn validate_tree(tree: &RootedTree) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = tree.n;
    if n == 0 {
        out.push(Violation::NoVertices);
    }
    if tree.root == 0 || tree.root as usize > n {
        out.push(Violation::RootOutOfRange(tree.root));
    }
    if tree.edges.len() + 1 != n.max(1) {
        out.push(Violation::EdgeCount { expected: n.saturating_sub(1), got: tree.edges.len() });
    }
    let mut seen = std::collections::HashMap::new();
    let mut dsu = Dsu::new(n);
    let mut merges = 0;
    for (i, &(a, b)) in tree.edges.iter().enumerate() {
        let mut ok = true;
        for v in [a, b] {
            if v == 0 || v as usize > n {
                out.push(Violation::VertexOutOfRange { edge: i, vertex: v });
                ok = false;
            }
        }
        if a == b {
            out.push(Violation::SelfLoop { edge: i });
            continue;
        }
        if let Some(&first) = seen.get(&(a.min(b), a.max(b))) {
            out.push(Violation::DuplicateEdge { first, second: i });
            continue;
        }
        seen.insert((a.min(b), a.max(b)), i);
        if ok {
            if dsu.union(a as usize - 1, b as usize - 1) {
                merges += 1;
            } else {
                out.push(Violation::Cycle { edge: i });
            }
        }
    }
    if n > 0 && merges + 1 < n {
        out.push(Violation::Disconnected { components: n - merges });
    }
    out
}

impl RootedTree {
    /// Validated constructor.
    pub fn new(n: usize, root: u32, edges: Vec<(u32, u32)>) -> Result<Self> {
        let t = RootedTree { n, root, edges };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let v = validate_tree(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidTree(v))
        }
    }

    /// Zero-based adjacency: `adj[v]` lists `(neighbour, edge index)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            adj[a as usize - 1].push((b as usize - 1, i));
            adj[b as usize - 1].push((a as usize - 1, i));
        }
        adj
    }

    /// Parent pointers (zero-based) and a BFS order from the root.
    pub fn orient(&self) -> Orientation {
        let adj = self.adjacency();
        let r = self.root as usize - 1;
        let mut parent = vec![usize::MAX; self.n];
        let mut parent_edge = vec![usize::MAX; self.n];
        let mut order = Vec::with_capacity(self.n);
        let mut seen = vec![false; self.n];
        seen[r] = true;
        order.push(r);
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            i += 1;
            for &(w, e) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = v;
                    parent_edge[w] = e;
                    order.push(w);
                }
            }
        }
        Orientation { parent, parent_edge, order }
    }
}

pub struct Orientation {
    /// `usize::MAX` at the root.
    pub parent: Vec<usize>,
    pub parent_edge: Vec<usize>,
    pub order: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rank,
    Exponential,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rank" => Ok(Mode::Rank),
            "exp" | "exponential" => Ok(Mode::Exponential),
            _ => Err(Error::InvalidParameter(format!("unknown mode `{s}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Rank => "rank",
            Mode::Exponential => "exponential",
        })
    }
}

/// One cut time per edge, parallel to `RootedTree::edges`.
#[derive(Clone, Debug, PartialEq)]
pub enum CutSchedule {
    Rank(Vec<u32>),
    Exponential(Vec<f64>),
}

impl CutSchedule {
    pub fn mode(&self) -> Mode {
        match self {
            CutSchedule::Rank(_) => Mode::Rank,
            CutSchedule::Exponential(_) => Mode::Exponential,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            CutSchedule::Rank(r) => r.len(),
            CutSchedule::Exponential(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ranks(&self) -> Result<&[u32]> {
        match self {
            CutSchedule::Rank(r) => Ok(r),
            CutSchedule::Exponential(_) => Err(Error::RanksRequired),
        }
    }

    pub fn time_f64(&self, edge: usize) -> f64 {
        match self {
            CutSchedule::Rank(r) => r[edge] as f64,
            CutSchedule::Exponential(t) => t[edge],
        }
    }

    /// Checks length and the per-mode invariants.
    pub fn validate(&self, edges: usize) -> Result<()> {
        if self.len() != edges {
            return Err(Error::ScheduleLength { expected: edges, got: self.len() });
        }
        match self {
            CutSchedule::Rank(r) => {
                let mut owner = vec![usize::MAX; edges + 1];
                for (i, &x) in r.iter().enumerate() {
                    let x = x as usize;
                    if x == 0 || x > edges {
                        return Err(contract(format!("rank {x} on edge {i} is outside 1..={edges}")));
                    }
                    if owner[x] != usize::MAX {
                        return Err(Error::DuplicateTime(owner[x], i));
                    }
                    owner[x] = i;
                }
            }
            CutSchedule::Exponential(t) => {
                if let Some(i) = t.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(contract(format!("time {} on edge {i} is not positive", t[i])));
                }
                check_distinct(t)?;
            }
        }
        Ok(())
    }
}

/// Edge indices sorted by increasing time; fails on ties.
pub(crate) fn check_distinct<T: Scalar>(times: &[T]) -> Result<Vec<usize>> {
    let mut idx: Vec<usize> = (0..times.len()).collect();
    idx.sort_by(|&a, &b| times[a].partial_cmp(&times[b]).expect("comparable times"));
    for w in idx.windows(2) {
        if times[w[0]] == times[w[1]] {
            return Err(Error::DuplicateTime(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    Ok(idx)
}

/// A rooted tree together with its cut schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub tree: RootedTree,
    pub schedule: CutSchedule,
}

impl Instance {
    pub fn new(tree: RootedTree, schedule: CutSchedule) -> Result<Self> {
        tree.validate()?;
        schedule.validate(tree.edges.len())?;
        Ok(Instance { tree, schedule })
    }

    pub fn n(&self) -> usize {
        self.tree.n
    }

    pub fn to_json(&self) -> Value {
        let times: Vec<Value> = match &self.schedule {
            CutSchedule::Rank(r) => r.iter().map(|&x| json!(x)).collect(),
            CutSchedule::Exponential(t) => t.iter().map(|&x| x.to_json()).collect(),
        };
        json!({
            "n": self.tree.n,
            "root": self.tree.root,
            "edges": self.tree.edges.iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>(),
            "cut_times": times,
            "mode": self.schedule.mode(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            root: u32,
            edges: Vec<(u32, u32)>,
            cut_times: Vec<Value>,
            mode: Mode,
        }
        let raw: Raw = serde_json::from_value(v.clone())?;
        let schedule = match raw.mode {
            Mode::Rank => CutSchedule::Rank(
                raw.cut_times
                    .iter()
                    .map(|x| {
                        let r = crate::scalar::Exact::from_json(x)?;
                        if r.is_integer() && *r.numer() > 0 && *r.numer() <= u32::MAX as i64 {
                            Ok(*r.numer() as u32)
                        } else {
                            Err(Error::Malformed(format!("rank {r} is not a positive integer")))
                        }
                    })
                    .collect::<Result<_>>()?,
            ),
            Mode::Exponential => CutSchedule::Exponential(
                raw.cut_times.iter().map(f64::from_json).collect::<Result<_>>()?,
            ),
        };
        Instance::new(RootedTree { n: raw.n, root: raw.root, edges: raw.edges }, schedule)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_json())?)?;
        Ok(())
    }

    /// Equality as unrooted edge sets with times, plus root and size.
    pub fn same_labeled(&self, other: &Instance) -> bool {
        fn key(i: &Instance) -> Vec<(u32, u32, u64)> {
            let mut v: Vec<_> = i
                .tree
                .edges
                .iter()
                .enumerate()
                .map(|(e, &(a, b))| (a.min(b), a.max(b), i.schedule.time_f64(e).to_bits()))
                .collect();
            v.sort_unstable();
            v
        }
        self.tree.n == other.tree.n
            && self.tree.root == other.tree.root
            && self.schedule.mode() == other.schedule.mode()
            && key(self) == key(other)
    }
}

/// Fragment masses sorted nonincreasing.
#[derive(Clone, Debug, PartialEq)]
pub struct MassList<T> {
    pub masses: Vec<T>,
}

impl<T: Scalar> MassList<T> {
    /// Sorts `masses` nonincreasing.
    pub fn new(mut masses: Vec<T>) -> Self {
        masses.sort_by(|a, b| b.partial_cmp(a).expect("comparable masses"));
        MassList { masses }
    }

    pub fn from_counts(counts: impl IntoIterator<Item = usize>, n: usize) -> Self {
        let mut c: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
        c.sort_unstable_by(|a, b| b.cmp(a));
        MassList { masses: c.into_iter().map(|c| T::mass(c, n)).collect() }
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn largest(&self) -> Option<T> {
        self.masses.first().copied()
    }

    pub fn total(&self) -> T {
        self.masses.iter().fold(T::zero(), |a, &b| a + b)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.masses.iter().map(|m| m.to_f64()).collect()
    }
}

pub(crate) struct Dsu {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when already joined. The surviving representative is
    /// `find(a)` afterwards.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

/// Component label of every vertex (zero-based) after removing the edges
/// with time `<= t`.
pub fn component_labels<T: Scalar>(tree: &RootedTree, schedule: &CutSchedule, t: T) -> Result<Vec<usize>> {
    schedule.validate(tree.edges.len())?;
    let times = T::times(schedule)?;
    let mut dsu = Dsu::new(tree.n);
    for (e, &(a, b)) in tree.edges.iter().enumerate() {
        if times[e] > t {
            dsu.union(a as usize - 1, b as usize - 1);
        }
    }
    Ok((0..tree.n).map(|v| dsu.find(v)).collect())
}

/// Masses of the components left after removing every edge cut at or
/// before `t`.
pub fn component_masses<T: Scalar>(tree: &RootedTree, schedule: &CutSchedule, t: T) -> Result<MassList<T>> {
    let labels = component_labels(tree, schedule, t)?;
    let mut counts = vec![0usize; tree.n];
    for l in labels {
        counts[l] += 1;
    }
    Ok(MassList::from_counts(counts, tree.n))
}

/// Small instances used across tests, examples and the CLI.
pub mod fixtures {
    use super::*;

    fn inst(n: usize, edges: &[(u32, u32)], ranks: &[u32]) -> Instance {
        Instance::new(RootedTree { n, root: 1, edges: edges.to_vec() }, CutSchedule::Rank(ranks.to_vec()))
            .expect("fixture is valid")
    }

    /// Path 1-2-3; edge (2,3) cut at 1, edge (1,2) at 2.
    pub fn p3() -> Instance {
        inst(3, &[(1, 2), (2, 3)], &[2, 1])
    }

    /// Star at 1; edge (1,2) cut at 1, edge (1,3) at 2.
    pub fn c3() -> Instance {
        inst(3, &[(1, 2), (1, 3)], &[1, 2])
    }

    /// Path 1-2-3-4 cut from the far end inwards.
    pub fn p4() -> Instance {
        inst(4, &[(1, 2), (2, 3), (3, 4)], &[3, 2, 1])
    }

    pub fn single_edge() -> Instance {
        inst(2, &[(1, 2)], &[1])
    }

    pub fn single_vertex() -> Instance {
        inst(1, &[], &[])
    }

    /// The 15-vertex labelled tree used to illustrate the Prim encoding,
    /// with vertices numbered in Prim order.
    pub fn prim_figure() -> Instance {
        let labelled: [((u32, u32), u32); 14] = [
            ((7, 5), 5),
            ((5, 1), 9),
            ((1, 2), 4),
            ((1, 8), 11),
            ((12, 11), 8),
            ((11, 5), 12),
            ((5, 6), 1),
            ((3, 2), 3),
            ((2, 4), 7),
            ((4, 13), 14),
            ((14, 13), 10),
            ((13, 15), 13),
            ((9, 8), 2),
            ((8, 10), 6),
        ];
        let edges: Vec<_> = labelled.iter().map(|x| x.0).collect();
        let ranks: Vec<_> = labelled.iter().map(|x| x.1).collect();
        inst(15, &edges, &ranks)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::scalar::Exact;

    fn r(p: i64, q: i64) -> Exact {
        Exact::ratio(p, q)
    }

    #[test]
    fn validation() {
        assert!(validate_tree(&RootedTree { n: 1, root: 1, edges: vec![] }).is_empty());
        assert!(validate_tree(&p3().tree).is_empty());
        let dup = validate_tree(&RootedTree { n: 3, root: 1, edges: vec![(1, 2), (1, 2)] });
        assert!(dup.contains(&Violation::DuplicateEdge { first: 0, second: 1 }));
        assert!(dup.contains(&Violation::Disconnected { components: 2 }));
        let bad = validate_tree(&RootedTree { n: 3, root: 4, edges: vec![(1, 1), (2, 7)] });
        assert!(bad.contains(&Violation::RootOutOfRange(4)));
        assert!(bad.contains(&Violation::SelfLoop { edge: 0 }));
        assert!(bad.contains(&Violation::VertexOutOfRange { edge: 1, vertex: 7 }));
        let cyc = validate_tree(&RootedTree { n: 4, root: 1, edges: vec![(1, 2), (2, 3), (3, 1)] });
        assert!(cyc.contains(&Violation::Cycle { edge: 2 }));
        assert!(validate_tree(&RootedTree { n: 0, root: 1, edges: vec![] }).contains(&Violation::NoVertices));
    }

    #[test]
    fn p3_components() {
        let p = p3();
        let cm = |t| component_masses(&p.tree, &p.schedule, t).unwrap().masses;
        assert_eq!(cm(r(1, 2)), vec![r(1, 1)]);
        assert_eq!(cm(r(3, 2)), vec![r(2, 3), r(1, 3)]);
        assert_eq!(cm(r(1, 1)), vec![r(2, 3), r(1, 3)]);
        assert_eq!(cm(r(2, 1)), vec![r(1, 3); 3]);
    }

    #[test]
    fn schedule_checks() {
        assert!(matches!(CutSchedule::Rank(vec![1, 1]).validate(2), Err(Error::DuplicateTime(0, 1))));
        assert!(CutSchedule::Rank(vec![1, 3]).validate(2).is_err());
        assert!(matches!(CutSchedule::Rank(vec![1]).validate(2), Err(Error::ScheduleLength { .. })));
        assert!(CutSchedule::Exponential(vec![0.5, -1.0]).validate(2).is_err());
        assert!(CutSchedule::Exponential(vec![0.5, 0.5]).validate(2).is_err());
        let p = p3();
        assert!(component_masses(&p.tree, &CutSchedule::Rank(vec![1]), r(1, 1)).is_err());
    }

    #[test]
    fn json_roundtrip() {
        for i in [p3(), c3(), prim_figure()] {
            assert_eq!(Instance::from_json(&i.to_json()).unwrap(), i);
        }
        let e = Instance::new(p3().tree, CutSchedule::Exponential(vec![0.25, 1.5])).unwrap();
        assert_eq!(Instance::from_json(&e.to_json()).unwrap(), e);
        let s = json!({"n": 2, "root": 1, "edges": [[1, 2]], "cut_times": ["1/1"], "mode": "rank"});
        assert_eq!(Instance::from_json(&s).unwrap(), single_edge());
        let bad = json!({"n": 2, "root": 1, "edges": [[1, 2]], "cut_times": ["1/2"], "mode": "rank"});
        assert!(Instance::from_json(&bad).is_err());
    }

    #[test]
    fn labelled_equality_ignores_orientation() {
        let a = p3();
        let mut b = p3();
        b.tree.edges = vec![(3, 2), (2, 1)];
        b.schedule = CutSchedule::Rank(vec![1, 2]);
        assert!(a.same_labeled(&b));
        assert!(!a.same_labeled(&c3()));
    }
}
