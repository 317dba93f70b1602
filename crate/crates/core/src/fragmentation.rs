//! Forward replay of the cuts: the event timeline, the fragment mass
//! process and the per-vertex lineages.
//!
//! Each cut splits one component in two. The side holding the component's
//! reference vertex is the entry side; the other side is the far side and
//! its reference vertex becomes the far endpoint `v` of the cut edge. The
//! whole tree uses the root as reference.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{contract, Error, Result};
use crate::model::{check_distinct, CutSchedule, MassList, RootedTree};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Entry,
    Far,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutEvent<T> {
    pub time: T,
    pub edge: usize,
    /// Endpoint on the side holding the reference vertex.
    pub u: u32,
    /// Endpoint on the severed side.
    pub v: u32,
    pub far_size: usize,
    /// Size of the component before the cut.
    pub component_size: usize,
    /// The event that created the split component, and on which side.
    pub parent: Option<(usize, Side)>,
    /// Next event splitting the entry side.
    pub entry_next: Option<usize>,
    /// Next event splitting the far side.
    pub far_next: Option<usize>,
}

impl<T> CutEvent<T> {
    pub fn entry_size(&self) -> usize {
        self.component_size - self.far_size
    }

    pub fn side_size(&self, side: Side) -> usize {
        match side {
            Side::Entry => self.entry_size(),
            Side::Far => self.far_size,
        }
    }

    pub fn next(&self, side: Side) -> Option<usize> {
        match side {
            Side::Entry => self.entry_next,
            Side::Far => self.far_next,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FragmentationTimeline<T> {
    pub n: usize,
    pub root: u32,
    /// Sorted by strictly increasing time.
    pub events: Vec<CutEvent<T>>,
    /// Steps of the root component mass, starting at `(0, 1)`.
    pub rootmass: Vec<(T, T)>,
    /// Per vertex (zero-based): the cut that isolated it and its side.
    pub isolation: Vec<Option<(usize, Side)>>,
}

/// Replays the cuts in time order by splitting off the smaller side, found
/// with two interleaved traversals. Total cost is `O(n log n)`.
pub fn fragmentation_timeline<T: Scalar>(tree: &RootedTree, schedule: &CutSchedule) -> Result<FragmentationTimeline<T>> {
    tree.validate()?;
    schedule.validate(tree.edges.len())?;
    let times = T::times(schedule)?;
    let order = check_distinct(&times)?;
    let n = tree.n;
    let ends: Vec<(usize, usize)> = tree.edges.iter().map(|&(a, b)| (a as usize - 1, b as usize - 1)).collect();

    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut slot = vec![[0usize; 2]; ends.len()];
    for (e, &(a, b)) in ends.iter().enumerate() {
        slot[e] = [adj[a].len(), adj[b].len()];
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    let mut remove = |adj: &mut Vec<Vec<(usize, usize)>>, e: usize| {
        for side in 0..2 {
            let x = if side == 0 { ends[e].0 } else { ends[e].1 };
            let p = slot[e][side];
            adj[x].swap_remove(p);
            if let Some(&(_, moved)) = adj[x].get(p) {
                let s = if ends[moved].0 == x { 0 } else { 1 };
                slot[moved][s] = p;
            }
        }
    };

    struct Comp {
        size: usize,
        reference: usize,
        origin: Option<(usize, Side)>,
    }
    let root = tree.root as usize - 1;
    let mut comp_of = vec![0usize; n];
    let mut comps = vec![Comp { size: n, reference: root, origin: None }];
    let mut mark = vec![0u32; n];
    let mut events: Vec<CutEvent<T>> = Vec::with_capacity(ends.len());
    let mut rootmass = vec![(T::zero(), T::one())];
    let mut isolation = vec![None; n];
    let mut stacks = [Vec::new(), Vec::new()];
    let mut seen = [Vec::new(), Vec::new()];

    for (k, &e) in order.iter().enumerate() {
        let (a, b) = ends[e];
        let c = comp_of[a];
        debug_assert_eq!(c, comp_of[b]);
        remove(&mut adj, e);

        let stamps = [2 * k as u32 + 1, 2 * k as u32 + 2];
        for (s, start) in [a, b].into_iter().enumerate() {
            mark[start] = stamps[s];
            stacks[s].clear();
            stacks[s].push((start, 0usize));
            seen[s].clear();
            seen[s].push(start);
        }
        // Alternate single steps until one side is exhausted.
        let small = 'explore: loop {
            for s in 0..2 {
                let Some(top) = stacks[s].last_mut() else { break 'explore s };
                let (x, i) = *top;
                if i < adj[x].len() {
                    top.1 += 1;
                    let w = adj[x][i].0;
                    if mark[w] != stamps[s] {
                        mark[w] = stamps[s];
                        stacks[s].push((w, 0));
                        seen[s].push(w);
                    }
                } else {
                    stacks[s].pop();
                }
            }
        };
        let ends_ab = [a, b];
        let small_size = seen[small].len();
        let large_size = comps[c].size - small_size;
        let reference = comps[c].reference;
        let entry_is_small = mark[reference] == stamps[small];
        let (u, v) = if entry_is_small {
            (ends_ab[small], ends_ab[1 - small])
        } else {
            (ends_ab[1 - small], ends_ab[small])
        };
        let far_size = if entry_is_small { large_size } else { small_size };
        let parent = comps[c].origin;
        let holds_root = comp_of[root] == c;

        let nc = comps.len();
        for &x in &seen[small] {
            comp_of[x] = nc;
        }
        let (small_side, large_side) = if entry_is_small { (Side::Entry, Side::Far) } else { (Side::Far, Side::Entry) };
        let ref_of = |side: Side| if side == Side::Entry { reference } else { v };
        comps.push(Comp { size: small_size, reference: ref_of(small_side), origin: Some((k, small_side)) });
        comps[c] = Comp { size: large_size, reference: ref_of(large_side), origin: Some((k, large_side)) };

        if let Some((p, side)) = parent {
            let ev: &mut CutEvent<T> = &mut events[p];
            match side {
                Side::Entry => ev.entry_next = Some(k),
                Side::Far => ev.far_next = Some(k),
            }
        }
        if holds_root {
            rootmass.push((times[e], T::mass(small_size + large_size - far_size, n)));
        }
        if small_size == 1 {
            isolation[seen[small][0]] = Some((k, small_side));
        }
        if large_size == 1 {
            isolation[ends_ab[1 - small]] = Some((k, large_side));
        }
        events.push(CutEvent {
            time: times[e],
            edge: e,
            u: u as u32 + 1,
            v: v as u32 + 1,
            far_size,
            component_size: small_size + large_size,
            parent,
            entry_next: None,
            far_next: None,
        });
    }
    Ok(FragmentationTimeline { n, root: tree.root, events, rootmass, isolation })
}

impl<T: Scalar> FragmentationTimeline<T> {
    /// Fragment masses at time `t`, cuts at exactly `t` included.
    pub fn x_ap(&self, t: T) -> MassList<T> {
        let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
        sizes.insert(self.n, 1);
        for ev in self.events.iter().take_while(|ev| ev.time <= t) {
            let c = sizes.get_mut(&ev.component_size).expect("split component is alive");
            *c -= 1;
            if *c == 0 {
                sizes.remove(&ev.component_size);
            }
            *sizes.entry(ev.entry_size()).or_default() += 1;
            *sizes.entry(ev.far_size).or_default() += 1;
        }
        MassList::from_counts(sizes.iter().flat_map(|(&s, &c)| std::iter::repeat_n(s, c)), self.n)
    }

    /// Root component mass at time `t`.
    pub fn rootmass_at(&self, t: T) -> T {
        self.rootmass.iter().take_while(|(s, _)| *s <= t).last().map_or(T::one(), |x| x.1)
    }

    /// The cuts that split the component of `vertex` (one-based), oldest
    /// first, each with the side the vertex ends on.
    pub fn lineage(&self, vertex: u32) -> Result<Vec<(usize, Side)>> {
        if vertex == 0 || vertex as usize > self.n {
            return Err(Error::UnknownLeaf(vertex));
        }
        let mut chain = Vec::new();
        let mut cur = self.isolation[vertex as usize - 1];
        while let Some((k, side)) = cur {
            chain.push((k, side));
            cur = self.events[k].parent;
        }
        chain.reverse();
        Ok(chain)
    }

    /// Piecewise-constant mass of the component holding `vertex`, as
    /// `(start time, vertex count)` steps.
    pub fn mass_trajectory(&self, vertex: u32) -> Result<Vec<(T, usize)>> {
        let mut out = vec![(T::zero(), self.n)];
        for (k, side) in self.lineage(vertex)? {
            out.push((self.events[k].time, self.events[k].side_size(side)));
        }
        Ok(out)
    }

    /// `∫ (μ_s(i) + μ_s(j)) ds` from the separation time of `i` and `j` up
    /// to the time each is isolated.
    pub fn pair_integral(&self, i: u32, j: u32) -> Result<T> {
        if i == j {
            return Err(contract("pair integral needs two distinct vertices"));
        }
        let (li, lj) = (self.lineage(i)?, self.lineage(j)?);
        let d = li.iter().zip(&lj).take_while(|(x, y)| x == y).count();
        let tail = |l: &[(usize, Side)]| {
            let mut acc = T::zero();
            for w in l[d..].windows(2) {
                let (k, side) = w[0];
                let dt = self.events[w[1].0].time - self.events[k].time;
                acc += T::mass(self.events[k].side_size(side), self.n) * dt;
            }
            acc
        };
        Ok(tail(&li) + tail(&lj))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "root": self.root,
            "events": self.events.iter().map(|e| json!({
                "time": e.time.to_json(),
                "edge": e.edge,
                "u": e.u,
                "v": e.v,
                "far_size": e.far_size,
                "component_size": e.component_size,
            })).collect::<Vec<_>>(),
            "rootmass": self.rootmass.iter().map(|(t, m)| json!([t.to_json(), m.to_json()])).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{component_masses, fixtures};
    use crate::samplers::{sample_cayley, sample_cut_schedule, Seed};
    use crate::scalar::Exact;
    use crate::model::Mode;

    fn r(p: i64, q: i64) -> Exact {
        Exact::ratio(p, q)
    }

    fn tl(i: &crate::model::Instance) -> FragmentationTimeline<Exact> {
        fragmentation_timeline(&i.tree, &i.schedule).unwrap()
    }

    fn brief(t: &FragmentationTimeline<Exact>) -> Vec<(Exact, usize, u32, u32, usize)> {
        t.events.iter().map(|e| (e.time, e.edge, e.u, e.v, e.far_size)).collect()
    }

    #[test]
    fn p3_events() {
        let t = tl(&fixtures::p3());
        assert_eq!(brief(&t), vec![(r(1, 1), 1, 2, 3, 1), (r(2, 1), 0, 1, 2, 1)]);
        assert_eq!(t.rootmass, vec![(r(0, 1), r(1, 1)), (r(1, 1), r(2, 3)), (r(2, 1), r(1, 3))]);
        assert_eq!(t.x_ap(r(0, 1)).masses, vec![r(1, 1)]);
        assert_eq!(t.x_ap(r(2, 1)).masses, vec![r(1, 3); 3]);
    }

    #[test]
    fn c3_and_single_edge() {
        let t = tl(&fixtures::c3());
        assert_eq!(brief(&t), vec![(r(1, 1), 0, 1, 2, 1), (r(2, 1), 1, 1, 3, 1)]);
        let t = tl(&fixtures::single_edge());
        assert_eq!(brief(&t), vec![(r(1, 1), 0, 1, 2, 1)]);
        assert_eq!(t.rootmass, vec![(r(0, 1), r(1, 1)), (r(1, 1), r(1, 2))]);
        let t = tl(&fixtures::single_vertex());
        assert!(t.events.is_empty());
        assert_eq!(t.x_ap(r(5, 1)).masses, vec![r(1, 1)]);
    }

    #[test]
    fn p4_masses() {
        let t = tl(&fixtures::p4());
        assert_eq!(t.x_ap(r(5, 2)).masses, vec![r(1, 2), r(1, 4), r(1, 4)]);
    }

    #[test]
    fn duplicate_times_rejected() {
        let p = fixtures::p3();
        let s = CutSchedule::Exponential(vec![1.0, 1.0]);
        assert!(fragmentation_timeline::<f64>(&p.tree, &s).is_err());
    }

    #[test]
    fn lineages_and_integrals() {
        let t = tl(&fixtures::p3());
        assert_eq!(t.mass_trajectory(3).unwrap(), vec![(r(0, 1), 3), (r(1, 1), 1)]);
        assert_eq!(t.mass_trajectory(1).unwrap(), vec![(r(0, 1), 3), (r(1, 1), 2), (r(2, 1), 1)]);
        assert_eq!(t.pair_integral(1, 2).unwrap(), r(0, 1));
        assert_eq!(t.pair_integral(1, 3).unwrap(), r(2, 3));
        assert!(t.pair_integral(1, 1).is_err());
        assert!(t.lineage(4).is_err());
    }

    #[test]
    fn agrees_with_component_oracle() {
        let s = Seed::new(17);
        for rep in 0..60 {
            let n = 2 + rep % 37;
            let tree = sample_cayley(n, &s.derive("t", rep as u64)).unwrap();
            let sch = sample_cut_schedule(&tree, Mode::Rank, &s.derive("c", rep as u64));
            let t = fragmentation_timeline::<Exact>(&tree, &sch).unwrap();
            let labels_root = |time: Exact| {
                let l = crate::model::component_labels(&tree, &sch, time).unwrap();
                let rl = l[tree.root as usize - 1];
                Exact::mass(l.iter().filter(|&&x| x == rl).count(), n)
            };
            for k in 0..n {
                let time = r(2 * k as i64 + 1, 2);
                for q in [time, r(k as i64, 1)] {
                    assert_eq!(t.x_ap(q), component_masses(&tree, &sch, q).unwrap());
                    assert_eq!(t.rootmass_at(q), labels_root(q));
                }
            }
            // u sits with the reference vertex, v does not, at each cut.
            for ev in &t.events {
                let (a, b) = tree.edges[ev.edge];
                assert!((ev.u, ev.v) == (a, b) || (ev.u, ev.v) == (b, a));
            }
        }
    }
}
