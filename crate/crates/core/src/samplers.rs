//! Every random object is drawn here, from a [`Seed`]-derived ChaCha stream.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{contract, Result};
use crate::model::{CutSchedule, Instance, Mode, RootedTree};

/// A reproducible random stream: a master seed plus a derivation path.
///
/// Streams for replicas are derived by tag and index, so Monte Carlo output
/// does not depend on scheduling or thread count.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    pub path: String,
}

impl Seed {
    pub fn new(master: u64) -> Self {
        Seed { master, path: String::new() }
    }

    /// Child stream `tag#replica`.
    pub fn derive(&self, tag: &str, replica: u64) -> Seed {
        Seed { master: self.master, path: format!("{}/{tag}#{replica}", self.path) }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut h = Sha256::new();
        h.update(self.master.to_le_bytes());
        h.update(self.path.as_bytes());
        let digest = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        ChaCha20Rng::from_seed(key)
    }
}

/// Uniform labelled tree on `1..=n` rooted at 1, decoded from a uniform
/// Prüfer sequence.
pub fn sample_cayley(n: usize, seed: &Seed) -> Result<RootedTree> {
    if n == 0 {
        return Err(contract("a tree needs at least one vertex"));
    }
    if n <= 2 {
        let edges = if n == 2 { vec![(1, 2)] } else { vec![] };
        return Ok(RootedTree { n, root: 1, edges });
    }
    let mut rng = seed.rng();
    let code: Vec<usize> = (0..n - 2).map(|_| rng.random_range(1..=n)).collect();
    Ok(RootedTree { n, root: 1, edges: prufer_decode(n, &code) })
}

/// Linear-time Prüfer decoding; `code` has length `n - 2` with entries in
/// `1..=n`.
pub fn prufer_decode(n: usize, code: &[usize]) -> Vec<(u32, u32)> {
    debug_assert_eq!(code.len() + 2, n);
    let mut degree = vec![1usize; n + 1];
    for &x in code {
        degree[x] += 1;
    }
    let mut ptr = 1;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    let mut edges = Vec::with_capacity(n - 1);
    for &x in code {
        edges.push((leaf as u32, x as u32));
        degree[x] -= 1;
        if degree[x] == 1 && x < ptr {
            leaf = x;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    edges.push((leaf as u32, n as u32));
    edges
}

/// Rank mode: a uniform permutation of `1..n-1`. Exponential mode: i.i.d.
/// `sqrt(n) * Exp(1)` clocks.
pub fn sample_cut_schedule(tree: &RootedTree, mode: Mode, seed: &Seed) -> CutSchedule {
    let m = tree.edges.len();
    let mut rng = seed.rng();
    match mode {
        Mode::Rank => {
            let mut r: Vec<u32> = (1..=m as u32).collect();
            r.shuffle(&mut rng);
            CutSchedule::Rank(r)
        }
        Mode::Exponential => {
            let scale = (tree.n as f64).sqrt();
            CutSchedule::Exponential((0..m).map(|_| scale * rng.sample::<f64, _>(Exp1)).collect())
        }
    }
}

/// A uniform tree on `n` vertices with an independent schedule.
pub fn sample_instance(n: usize, mode: Mode, seed: &Seed) -> Result<Instance> {
    let tree = sample_cayley(n, &seed.derive("tree", 0))?;
    let schedule = sample_cut_schedule(&tree, mode, &seed.derive("cuts", 0));
    Instance::new(tree, schedule)
}

/// A Brownian excursion sampled on the grid `i/m`, `i = 0..=m`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExcursionGrid {
    pub values: Vec<f64>,
}

impl ExcursionGrid {
    pub fn m(&self) -> usize {
        self.values.len() - 1
    }

    /// Value at the grid point nearest `x`.
    pub fn at(&self, x: f64) -> f64 {
        let i = (x * self.m() as f64).round() as usize;
        self.values[i.min(self.m())]
    }
}

/// Gaussian random-walk bridge with step deviation `m^{-1/2}`, rotated at
/// its first minimum so that both endpoints are exactly zero.
pub fn sample_excursion_grid(m: usize, seed: &Seed) -> Result<ExcursionGrid> {
    if m < 2 || !m.is_power_of_two() {
        return Err(contract(format!("grid size {m} must be a power of two >= 2")));
    }
    let mut rng = seed.rng();
    let sd = (m as f64).sqrt().recip();
    let mut walk = Vec::with_capacity(m + 1);
    walk.push(0.0f64);
    let mut s = 0.0;
    for _ in 0..m {
        s += sd * rng.sample::<f64, _>(StandardNormal);
        walk.push(s);
    }
    let end = walk[m];
    let bridge: Vec<f64> = walk.iter().enumerate().map(|(i, w)| w - end * i as f64 / m as f64).collect();
    let mut k = 0;
    for i in 1..m {
        if bridge[i] < bridge[k] {
            k = i;
        }
    }
    let mut values: Vec<f64> = (0..=m).map(|i| bridge[(k + i) % m] - bridge[k]).collect();
    values[0] = 0.0;
    values[m] = 0.0;
    Ok(ExcursionGrid { values })
}

/// `z^2 / (z^2 + t^2)`: the tagged-fragment mass for normal deviate `z`.
pub fn tagged_mass(z: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let z2 = z * z;
    z2 / (z2 + t * t)
}

/// `count` draws of `1 / (1 + S_t)` for a 1/2-stable subordinator `S`.
pub fn sample_tagged_mass(t: f64, count: usize, seed: &Seed) -> Result<Vec<f64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(contract(format!("drift {t} must be finite and nonnegative")));
    }
    let mut rng = seed.rng();
    Ok((0..count).map(|_| tagged_mass(rng.sample(StandardNormal), t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::ks_two_sample;
    use crate::model::validate_tree;

    #[test]
    fn seeds_are_reproducible_and_separated() {
        let s = Seed::new(7);
        let a: Vec<u64> = (0..4).map(|_| s.rng().random()).collect();
        let b: Vec<u64> = (0..4).map(|_| s.rng().random()).collect();
        assert_eq!(a, b);
        let x: u64 = s.derive("tree", 0).rng().random();
        let y: u64 = s.derive("tree", 1).rng().random();
        let z: u64 = s.derive("cuts", 0).rng().random();
        assert!(x != y && x != z && y != z);
        assert_eq!(s.derive("a", 1).derive("b", 2).path, "/a#1/b#2");
    }

    #[test]
    fn small_cayley() {
        let s = Seed::new(1);
        assert!(sample_cayley(0, &s).is_err());
        assert_eq!(sample_cayley(1, &s).unwrap().edges, vec![]);
        assert_eq!(sample_cayley(2, &s).unwrap().edges, vec![(1, 2)]);
        for r in 0..200 {
            let t = sample_cayley(2 + r % 40, &s.derive("t", r as u64)).unwrap();
            assert!(validate_tree(&t).is_empty());
        }
    }

    #[test]
    fn prufer_known_code() {
        // code (4,4,4,5) on 6 vertices: a star at 4 plus the path 4-5-6.
        let e = prufer_decode(6, &[4, 4, 4, 5]);
        assert_eq!(e, vec![(1, 4), (2, 4), (3, 4), (4, 5), (5, 6)]);
    }

    #[test]
    fn cayley_three_is_uniform() {
        let s = Seed::new(99);
        let reps = 30_000;
        let mut counts = [0usize; 3];
        for r in 0..reps {
            let t = sample_cayley(3, &s.derive("c3", r)).unwrap();
            let mut deg = [0; 4];
            for &(a, b) in &t.edges {
                deg[a as usize] += 1;
                deg[b as usize] += 1;
            }
            let centre = (1..=3).find(|&v| deg[v] == 2).unwrap();
            counts[centre - 1] += 1;
        }
        for c in counts {
            assert!((c as f64 / reps as f64 - 1.0 / 3.0).abs() <= 0.01, "{counts:?}");
        }
    }

    #[test]
    fn schedules() {
        let s = Seed::new(3);
        let t2 = sample_cayley(2, &s).unwrap();
        assert_eq!(sample_cut_schedule(&t2, Mode::Rank, &s), CutSchedule::Rank(vec![1]));
        let t4 = sample_cayley(4, &s).unwrap();
        let CutSchedule::Rank(mut r) = sample_cut_schedule(&t4, Mode::Rank, &s) else { panic!() };
        r.sort();
        assert_eq!(r, vec![1, 2, 3]);
    }

    #[test]
    fn exponential_clock_scale() {
        let s = Seed::new(11);
        let tree = RootedTree { n: 1000, root: 1, edges: sample_cayley(1000, &s).unwrap().edges };
        let draws = 10_000;
        let mean = (0..draws)
            .map(|r| sample_cut_schedule(&tree, Mode::Exponential, &s.derive("e", r)).time_f64(0))
            .sum::<f64>()
            / draws as f64;
        let target = 1000f64.sqrt();
        assert!((mean / target - 1.0).abs() <= 0.03, "mean {mean}");
    }

    #[test]
    fn excursion_grid_shape() {
        let s = Seed::new(5);
        assert!(sample_excursion_grid(3, &s).is_err());
        assert!(sample_excursion_grid(1, &s).is_err());
        for r in 0..50 {
            let e = sample_excursion_grid(2, &s.derive("m2", r)).unwrap();
            assert_eq!(e.values.len(), 3);
            assert_eq!((e.values[0], e.values[2]), (0.0, 0.0));
            assert!(e.values[1] >= 0.0);
            let e = sample_excursion_grid(64, &s.derive("m64", r)).unwrap();
            assert_eq!((e.values[0], e.values[64]), (0.0, 0.0));
            assert!(e.values.iter().all(|v| *v >= 0.0 && v.is_finite()));
        }
    }

    #[test]
    fn excursion_midpoint_self_consistent() {
        let draw = |tag: &str| -> Vec<f64> {
            (0..2000)
                .map(|r| sample_excursion_grid(256, &Seed::new(21).derive(tag, r)).unwrap().at(0.5))
                .collect()
        };
        assert!(ks_two_sample(&draw("a"), &draw("b")).unwrap() <= 0.05);
    }

    #[test]
    fn tagged_mass_law() {
        assert!(sample_tagged_mass(0.0, 10, &Seed::new(1)).unwrap().iter().all(|&x| x == 1.0));
        assert_eq!(tagged_mass(1.0, 1.0), 0.5);
        assert!(sample_tagged_mass(-1.0, 1, &Seed::new(1)).is_err());
        let xs = sample_tagged_mass(1.0, 100_000, &Seed::new(2)).unwrap();
        let frac = xs.iter().filter(|&&x| x <= 0.5).count() as f64 / xs.len() as f64;
        use statrs::distribution::{ContinuousCDF, Normal};
        let oracle = 2.0 * Normal::new(0.0, 1.0).unwrap().cdf(1.0) - 1.0;
        assert!((oracle - 0.6827).abs() < 1e-4);
        assert!((frac - oracle).abs() <= 0.01, "{frac}");
    }
}
