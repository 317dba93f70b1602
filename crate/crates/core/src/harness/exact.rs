//! Exact and float identity experiments.

use rand::Rng;
use rayon::prelude::*;

use super::{invalid, param, CheckRecord, Comparison, SuiteConfig, Tallies};
use crate::cut_tree::{build_cut_tree, components_from_cut_tree, leaf_distance, tau_from_lengths, CutTree, ROOT};
use crate::error::Result;
use crate::excursion_ops::{drifted_records, p_process};
use crate::fragmentation::fragmentation_timeline;
use crate::model::{component_masses, fixtures, Dsu, Instance, Mode};
use crate::pacman::{
    bertoin_function, bertoin_function_linear, direct_value, eaten_leaf_positions, h_counts, pacman_run,
    record_sequence, PacManTrace,
};
use crate::prim::{prim_order, prim_path, prim_path_with_order};
use crate::reconstruct::{complete_routings, phi_rebuild, true_routings, xi_stick_breaking};
use crate::samplers::{sample_instance, Seed};
use crate::scalar::{Exact, Scalar};

use super::multiset_equal;

/// Runs `f` for every replica and merges in replica order.
pub(super) fn replicate<F>(reps: usize, f: F) -> Result<Tallies>
where
    F: Fn(u64) -> Result<Tallies> + Sync + Send,
{
    let parts: Vec<Result<Tallies>> = (0..reps as u64).into_par_iter().map(f).collect();
    let mut all = Tallies::default();
    for p in parts {
        all.merge(p?);
    }
    Ok(all)
}

fn replica_seed(cfg: &SuiteConfig, r: u64) -> Seed {
    Seed::new(cfg.seed).derive(&cfg.experiment, r)
}

/// The configured instance, or a fresh one with size uniform in
/// `lo..=max_n`.
fn instance_for(cfg: &SuiteConfig, r: u64, max_n: usize, mode: Mode) -> Result<Instance> {
    if let Some(i) = cfg.instance()? {
        return Ok(i);
    }
    let seed = replica_seed(cfg, r);
    let lo = 2.min(max_n);
    let n = seed.derive("size", 0).rng().random_range(lo..=max_n);
    sample_instance(n, mode, &seed)
}

fn default_replicas(cfg: &SuiteConfig, default: usize) -> usize {
    if cfg.instance.is_some() {
        param(cfg.replicas, 1)
    } else {
        param(cfg.replicas, default)
    }
}

/// Cut times, their midpoints, and one time before and after all cuts.
fn probe_times<T: Scalar>(sorted: &[T]) -> Vec<T> {
    let mut out = vec![T::zero()];
    if let Some(&first) = sorted.first() {
        out.push(first / T::from_int(2));
    }
    for (i, &t) in sorted.iter().enumerate() {
        out.push(t);
        out.push(match sorted.get(i + 1) {
            Some(&next) => T::midpoint(t, next),
            None => t + T::one(),
        });
    }
    out
}

/// The coupling identity on one instance; with `structural` also every
/// invariant of the cut-tree, Pac-Man and the timeline (exact mode only).
fn coupling_checks<T: Scalar>(
    inst: &Instance,
    corrupt: bool,
    structural: bool,
    pair_seed: &Seed,
    ts: &mut Tallies,
) -> Result<()> {
    let tl = fragmentation_timeline::<T>(&inst.tree, &inst.schedule)?;
    let mut ct: CutTree<T> = build_cut_tree(&inst.tree, &inst.schedule)?;
    if corrupt && ct.is_branch(ct.top()) {
        let b = ct.top();
        ct.set_tau_unchecked(b, ct.tau(b) + T::ratio(1, 2));
    }
    let f = bertoin_function(&ct)?;
    let times: Vec<T> = tl.events.iter().map(|e| e.time).collect();
    let probes = probe_times(&times);
    let oracle: Vec<_> =
        probes.iter().map(|&t| component_masses(&inst.tree, &inst.schedule, t)).collect::<Result<_>>()?;
    let mass_tol = if T::EXACT { T::zero() } else { T::ratio(1, 1_000_000_000) };

    ts.timed("coupling", |ts| {
        for (t, want) in probes.iter().zip(&oracle) {
            let got = drifted_records(&f, *t).sorted_lengths();
            let (ok, dev) = multiset_equal(&got, want, mass_tol);
            let note = || format!("n={} t={:?}: {:?} vs {:?}", inst.n(), t, got.masses, want.masses);
            if T::EXACT {
                ts.record("coupling", ok, note);
            } else {
                ts.deviation("coupling", dev, note);
            }
        }
    });
    ts.timed("x-ap", |ts| {
        for (t, want) in probes.iter().zip(&oracle) {
            let got = tl.x_ap(*t);
            ts.record("x-ap", &got == want, || format!("n={} t={t:?}", inst.n()));
        }
    });
    if !structural {
        return Ok(());
    }

    ts.timed("cut-tree-invariants", |ts| {
        let issues = ct.check_invariants();
        ts.record("cut-tree-invariants", issues.is_empty(), || issues.join("; "));
        for (t, want) in probes.iter().zip(&oracle) {
            ts.record("cut-tree-invariants", &components_from_cut_tree(&ct, *t) == want, || {
                format!("components at t={t:?}")
            });
        }
    });
    ts.timed("mass-correspondence", |ts| {
        for b in ct.branchpoints() {
            let Some(cut) = ct.cut(b) else { continue };
            let ok = tl.events.iter().find(|e| e.edge == cut.edge).is_some_and(|ev| {
                ev.entry_size() == ct.node(ct.entry(b)).mass
                    && ev.far_size == ct.node(ct.far(b)).mass
                    && (ev.u, ev.v) == (cut.u, cut.v)
            });
            ts.record("mass-correspondence", ok, || format!("branchpoint {b}"));
        }
    });
    ts.timed("tau-recovery", |ts| {
        for (b, tau) in tau_from_lengths(&ct) {
            ts.record("tau-recovery", tau == ct.tau(b), || format!("branchpoint {b}"));
        }
    });

    let traces: Vec<PacManTrace<T>> = f.h.iter().map(|&h| pacman_run(&ct, h)).collect::<Result<_>>()?;
    ts.timed("budget-conservation", |ts| {
        for tr in &traces {
            let spent = tr.eaten.iter().fold(T::zero(), |a, e| a + e.1);
            ts.record("budget-conservation", spent == tr.h, || format!("h={:?}", tr.h));
        }
    });
    ts.timed("boundedness", |ts| {
        let (m, h) = (f.max_value(), ct.height());
        ts.record("boundedness", m <= h, || format!("max F {m:?} > height {h:?}"));
    });
    ts.timed("interval-pushforward", |ts| {
        for (c, tr) in traces.iter().enumerate() {
            let eaten = eaten_leaf_positions(&ct, tr);
            ts.record("interval-pushforward", eaten.iter().copied().eq(0..c), || format!("budget {c}/n"));
        }
        for b in ct.branchpoints() {
            let ok = h_counts(&ct, b).is_ok_and(|(h0, h1, h2)| {
                let (lo, hi) = ct.leaf_span(b);
                (h0, h1, h2) == (lo, lo + ct.node(ct.entry(b)).mass, hi)
            });
            ts.record("interval-pushforward", ok, || format!("branchpoint {b}"));
        }
    });
    ts.timed("p-process", |ts| {
        let p = p_process(&f);
        ts.record("p-process", p.jumps[..] == tl.rootmass[1..], || format!("{:?} vs {:?}", p.jumps, tl.rootmass));
    });
    ts.timed("half-routing-consistency", |ts| {
        for x in 1..ct.len() {
            let ok = record_sequence(&ct, x).is_ok_and(|c| c.last() == x);
            ts.record("half-routing-consistency", ok, || format!("node {x}"));
        }
    });
    ts.timed("direct-definition", |ts| {
        for (h, v) in f.h.iter().zip(&f.values) {
            let ok = direct_value(&tl, *h).is_ok_and(|d| d == *v);
            ts.record("direct-definition", ok, || format!("h={h:?}"));
        }
    });
    ts.timed("linear-variant", |ts| {
        let ok = bertoin_function_linear(&ct).is_ok_and(|g| g == f);
        ts.record("linear-variant", ok, String::new);
    });

    let mut rng = pair_seed.rng();
    let n = inst.n();
    ts.timed("leaf-distance", |ts| {
        let pairs: Vec<(u32, u32)> = if n <= 30 {
            (1..=n as u32).flat_map(|i| (i + 1..=n as u32).map(move |j| (i, j))).collect()
        } else {
            (0..200)
                .map(|_| {
                    let i = rng.random_range(1..=n as u32);
                    let j = rng.random_range(1..n as u32);
                    (i, if j >= i { j + 1 } else { j })
                })
                .collect()
        };
        for (i, j) in pairs {
            let ok = match (leaf_distance(&ct, i, j), tl.pair_integral(i, j)) {
                (Ok(a), Ok(b)) => a == b,
                _ => false,
            };
            ts.record("leaf-distance", ok, || format!("leaves {i},{j}"));
        }
    });

    let grid = f.len();
    let pairs: Vec<(usize, usize)> = if grid * grid <= 900 {
        (0..grid).flat_map(|a| (0..grid).map(move |b| (a, b))).filter(|(a, b)| a != b).collect()
    } else {
        (0..400).map(|_| (rng.random_range(0..grid), rng.random_range(0..grid))).filter(|(a, b)| a != b).collect()
    };
    ts.timed("lipschitz", |ts| {
        ts.declare("monotone-drift");
        for &(a, b) in &pairs {
            let (x, y) = (traces[a].last, traces[b].last);
            let Some(tau) = ct.tau_of(x) else { continue };
            if !ct.is_ancestor(x, y) {
                continue;
            }
            let (ha, hb) = (f.h[a], f.h[b]);
            let (fa, fb) = (f.values[a], f.values[b]);
            let bound = tau * (ha - hb).abs() + ct.path_length(x, y);
            ts.record("lipschitz", (fa - fb).abs() <= bound, || format!("grid {a},{b}"));
            let (lhs, rhs) = (fb - tau * hb, fa - tau * ha);
            // the start of the grid sits at the end of the entry spine,
            // where both sides coincide
            let ok = if ct.is_leaf(y) { lhs >= rhs } else { lhs > rhs };
            ts.record("monotone-drift", ok, || format!("grid {a},{b} via {x}->{y}"));
        }
    });
    debug_assert!(traces.last().is_none_or(|t| t.last == ROOT));
    Ok(())
}

/// Excursion lengths of `F` against fragment masses, rank mode, with every
/// structural invariant.
pub(super) fn coupling_exact(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let reps = default_replicas(cfg, 200);
    let max_n = param(cfg.n, 200);
    if cfg.mode == Some(Mode::Exponential) {
        return Err(invalid("coupling-exact runs in rank mode"));
    }
    let ts = replicate(reps, |r| {
        let inst = instance_for(cfg, r, max_n, Mode::Rank)?;
        let mut ts = Tallies::default();
        coupling_checks::<Exact>(&inst, cfg.corrupt_tau, true, &replica_seed(cfg, r).derive("pairs", 0), &mut ts)?;
        Ok(ts)
    })?;
    Ok(ts.into_records())
}

/// The same identity on exponential clocks with a mass tolerance.
pub(super) fn coupling_float(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let reps = default_replicas(cfg, 50);
    let max_n = param(cfg.n, 2000);
    let mode = param(cfg.mode, Mode::Exponential);
    let ts = replicate(reps, |r| {
        let inst = instance_for(cfg, r, max_n, mode)?;
        let mut ts = Tallies::default();
        ts.declare_tolerance("coupling", 1e-9);
        coupling_checks::<f64>(&inst, cfg.corrupt_tau, false, &replica_seed(cfg, r), &mut ts)?;
        Ok(ts)
    })?;
    Ok(ts.into_records())
}

fn forest_sizes(inst: &Instance, ranks: &[u32], k: usize) -> (Vec<usize>, Vec<usize>) {
    let n = inst.n();
    let mut d = Dsu::new(n);
    for (e, &(a, b)) in inst.tree.edges.iter().enumerate() {
        if (ranks[e] as usize) < n - k {
            d.union(a as usize - 1, b as usize - 1);
        }
    }
    let labels: Vec<usize> = (0..n).map(|v| d.find(v)).collect();
    let mut counts = vec![0; n];
    for &l in &labels {
        counts[l] += 1;
    }
    let mut sizes: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    (sizes, labels)
}

/// Prim-path excursions against forest components for every `k`.
pub(super) fn prim_identity(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let reps = default_replicas(cfg, 200);
    let max_n = param(cfg.n, 500);
    let ts = replicate(reps, |r| {
        let inst = instance_for(cfg, r, max_n, Mode::Rank)?;
        let ranks = inst.schedule.ranks()?;
        let order = prim_order(&inst.tree, &inst.schedule)?;
        let mut ts = Tallies::default();
        for k in 0..inst.n() {
            let path = prim_path_with_order(&inst.tree, &inst.schedule, order.clone(), k)?;
            let (want, labels) = forest_sizes(&inst, ranks, k);
            ts.timed("prim-identity", |ts| {
                let mut got = path.component_sizes();
                got.sort_unstable_by(|a, b| b.cmp(a));
                ts.record("prim-identity", got == want, || format!("n={} k={k}", inst.n()));
                ts.record("prim-identity", path.values.last() == Some(&-(want.len() as i64)), || {
                    format!("final value n={} k={k}", inst.n())
                });
            });
            ts.timed("contiguity", |ts| {
                let blocks = 1 + order.windows(2).filter(|w| labels[w[0] as usize - 1] != labels[w[1] as usize - 1]).count();
                ts.record("contiguity", blocks == want.len(), || format!("n={} k={k}", inst.n()));
            });
        }
        Ok(ts)
    })?;
    Ok(ts.into_records())
}

/// The 15-vertex labelled example.
pub(super) fn prim_figure(_cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let f = fixtures::prim_figure();
    let mut ts = Tallies::default();
    let order = prim_order(&f.tree, &f.schedule)?;
    ts.record("order", order == (1..=15).collect::<Vec<u32>>(), || format!("{order:?}"));
    let p = prim_path(&f.tree, &f.schedule, 6)?;
    let want = [0, 0, 1, 0, -1, 0, -1, -2, -1, -2, -3, -3, -4, -5, -6, -7];
    ts.record("ordinates", p.values == want, || format!("{:?}", p.values));
    let mut sizes = p.component_sizes();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    ts.record("sizes", sizes == [4, 3, 3, 2, 1, 1, 1], || format!("{sizes:?}"));
    Ok(ts.into_records())
}

/// Cut times from lengths and masses: exact on ranks, relative error on
/// exponential clocks.
pub(super) fn tau_recovery(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let reps = default_replicas(cfg, 100);
    let max_n = param(cfg.n, 1000);
    let ts = replicate(reps, |r| {
        let mut ts = Tallies::default();
        ts.declare_tolerance("tau-float", 1e-9);
        let inst = instance_for(cfg, r, max_n, Mode::Rank)?;
        if inst.schedule.mode() == Mode::Rank {
            let ct: CutTree<Exact> = build_cut_tree(&inst.tree, &inst.schedule)?;
            ts.timed("tau-exact", |ts| {
                for (b, tau) in tau_from_lengths(&ct) {
                    ts.record("tau-exact", tau == ct.tau(b), || format!("n={} node {b}", inst.n()));
                }
            });
        }
        let inst = match cfg.instance()? {
            Some(i) if i.schedule.mode() == Mode::Exponential => i,
            _ => instance_for(&SuiteConfig { instance: None, ..cfg.clone() }, r, max_n, Mode::Exponential)?,
        };
        let ct: CutTree<f64> = build_cut_tree(&inst.tree, &inst.schedule)?;
        ts.timed("tau-float", |ts| {
            for (b, tau) in tau_from_lengths(&ct) {
                let rel = (tau - ct.tau(b)).abs() / ct.tau(b);
                ts.deviation("tau-float", rel, || format!("n={} node {b}", inst.n()));
            }
        });
        Ok(ts)
    })?;
    Ok(ts.into_records())
}

/// Stick-breaking of `F` against the source cut-tree.
pub(super) fn xi_roundtrip(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let reps = default_replicas(cfg, 100);
    let max_n = param(cfg.n, 500);
    let ts = replicate(reps, |r| {
        let inst = instance_for(cfg, r, max_n, Mode::Rank)?;
        let ct: CutTree<Exact> = build_cut_tree(&inst.tree, &inst.schedule)?;
        let f = bertoin_function(&ct)?;
        let mut ts = Tallies::default();
        ts.timed("xi-isomorphic", |ts| {
            let diff = match xi_stick_breaking(&f) {
                Ok(x) => x.first_difference(&ct, Exact::zero()),
                Err(e) => Some(e.to_string()),
            };
            ts.record("xi-isomorphic", diff.is_none(), || format!("n={}: {}", inst.n(), diff.unwrap_or_default()));
        });
        Ok(ts)
    })?;
    Ok(ts.into_records())
}

/// Rebuild with the true routings.
pub(super) fn phi_true(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let reps = default_replicas(cfg, 100);
    let max_n = param(cfg.n, 500);
    let ts = replicate(reps, |r| {
        let inst = instance_for(cfg, r, max_n, Mode::Rank)?;
        let ct: CutTree<Exact> = build_cut_tree(&inst.tree, &inst.schedule)?;
        let mut ts = Tallies::default();
        ts.timed("phi-true", |ts| {
            let ok = true_routings(&ct).and_then(|rt| phi_rebuild(&rt)).is_ok_and(|b| b.same_labeled(&inst));
            ts.record("phi-true", ok, || format!("n={}", inst.n()));
        });
        Ok(ts)
    })?;
    Ok(ts.into_records())
}

/// Rebuild with sampled routings: `F` survives, the labelled tree does not.
pub(super) fn phi_sampled(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let reps = default_replicas(cfg, 100);
    let max_n = param(cfg.n, 500);
    let seeds = param(cfg.routings, 5) as u64;
    let mut differing = 0u64;
    let mut total = 0u64;
    let parts: Vec<Result<(Tallies, u64)>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let inst = instance_for(cfg, r, max_n, Mode::Rank)?;
            let ct: CutTree<Exact> = build_cut_tree(&inst.tree, &inst.schedule)?;
            let f = bertoin_function(&ct)?;
            let xi = xi_stick_breaking(&f)?;
            let mut ts = Tallies::default();
            let mut diff = 0;
            for k in 0..seeds {
                let seed = replica_seed(cfg, r).derive("routing", k);
                ts.timed("f-preserved", |ts| -> Result<()> {
                    let rebuilt = phi_rebuild(&complete_routings(&ct, &seed))?;
                    let c2: CutTree<Exact> = build_cut_tree(&rebuilt.tree, &rebuilt.schedule)?;
                    ts.record("f-preserved", bertoin_function(&c2)? == f, || format!("n={} seed {k}", inst.n()));
                    if !rebuilt.same_labeled(&inst) {
                        diff += 1;
                    }
                    let from_xi = phi_rebuild(&complete_routings(&xi, &seed))?;
                    let c3: CutTree<Exact> = build_cut_tree(&from_xi.tree, &from_xi.schedule)?;
                    ts.record("f-preserved", bertoin_function(&c3)? == f, || format!("stick-breaking n={}", inst.n()));
                    Ok(())
                })?;
            }
            Ok((ts, diff))
        })
        .collect();
    let mut all = Tallies::default();
    for p in parts {
        let (ts, d) = p?;
        all.merge(ts);
        differing += d;
        total += seeds;
    }
    let mut out = all.into_records();
    let mut shuffle = CheckRecord::new("shuffle-observed", differing as f64, Comparison::AtLeast, 1.0)
        .with_note(format!("{differing} of {total} rebuilt trees differ from the original"));
    shuffle.cases = total;
    out.push(shuffle);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probes_cover_cuts_and_gaps() {
        let r = Exact::ratio;
        let p = probe_times(&[r(1, 1), r(2, 1)]);
        assert_eq!(p, vec![r(0, 1), r(1, 2), r(1, 1), r(3, 2), r(2, 1), r(3, 1)]);
        assert_eq!(probe_times::<Exact>(&[]), vec![r(0, 1)]);
    }
}
