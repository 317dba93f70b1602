//! Drifted running-minimum decompositions and the root-mass process.

use serde_json::{json, Value};

use crate::model::MassList;
use crate::pacman::BreakpointFunction;
use crate::samplers::ExcursionGrid;
use crate::scalar::Scalar;

/// A function known at finitely many increasing abscissae in `[0, 1]`.
pub trait SampledFunction<T: Scalar> {
    fn points(&self) -> usize;
    fn abscissa(&self, i: usize) -> T;
    fn value(&self, i: usize) -> T;
}

impl<T: Scalar> SampledFunction<T> for BreakpointFunction<T> {
    fn points(&self) -> usize {
        self.h.len()
    }
    fn abscissa(&self, i: usize) -> T {
        self.h[i]
    }
    fn value(&self, i: usize) -> T {
        self.values[i]
    }
}

impl SampledFunction<f64> for ExcursionGrid {
    fn points(&self) -> usize {
        self.values.len()
    }
    fn abscissa(&self, i: usize) -> f64 {
        i as f64 / self.m() as f64
    }
    fn value(&self, i: usize) -> f64 {
        self.values[i]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecordDecomposition<T> {
    pub t: T,
    /// Abscissae where `f(x) - t x` reaches its running minimum.
    pub records: Vec<T>,
    /// Gaps between consecutive records.
    pub lengths: Vec<T>,
}

impl<T: Scalar> RecordDecomposition<T> {
    pub fn sorted_lengths(&self) -> MassList<T> {
        MassList::new(self.lengths.clone())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "t": self.t.to_json(),
            "records": self.records.iter().map(|x| x.to_json()).collect::<Vec<_>>(),
            "lengths": self.lengths.iter().map(|x| x.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// Indices where `f(x) - t x` is at or below its running minimum. Ties
/// count as records.
pub fn record_indices<T: Scalar, F: SampledFunction<T> + ?Sized>(f: &F, t: T) -> Vec<usize> {
    let m = f.points();
    let mut scale = t.abs();
    for i in 0..m {
        scale = scale.max(f.value(i).abs());
    }
    let tol = T::slack(scale);
    let mut out = vec![0];
    let mut low = f.value(0) - t * f.abscissa(0);
    for i in 1..m {
        let g = f.value(i) - t * f.abscissa(i);
        if g <= low + tol {
            out.push(i);
            low = low.min(g);
        }
    }
    out
}

/// Excursions of `f(x) - t x` above its running minimum.
pub fn drifted_records<T: Scalar, F: SampledFunction<T> + ?Sized>(f: &F, t: T) -> RecordDecomposition<T> {
    let idx = record_indices(f, t);
    let records: Vec<T> = idx.iter().map(|&i| f.abscissa(i)).collect();
    let lengths = records.windows(2).map(|w| w[1] - w[0]).collect();
    RecordDecomposition { t, records, lengths }
}

/// Excursion lengths of a grid excursion under drift `t`, largest first.
pub fn x_b(e: &ExcursionGrid, t: f64) -> MassList<f64> {
    let m = e.m() as f64;
    let idx = record_indices(e, t);
    MassList::new(idx.windows(2).map(|w| (w[1] - w[0]) as f64 / m).collect())
}

/// Length of the excursion starting at 0: the first `u > 0` on the grid
/// with `e(u) <= t u`.
pub fn first_excursion_length(e: &ExcursionGrid, t: f64) -> f64 {
    let m = e.m();
    (1..=m).find(|&i| e.values[i] <= t * i as f64 / m as f64).unwrap_or(m) as f64 / m as f64
}

/// Right-continuous nonincreasing step process starting at 1.
#[derive(Clone, Debug, PartialEq)]
pub struct PProcess<T> {
    /// `(time, value from that time on)`, times increasing.
    pub jumps: Vec<(T, T)>,
}

impl<T: Scalar> PProcess<T> {
    pub fn value_at(&self, t: T) -> T {
        self.jumps.iter().take_while(|j| j.0 <= t).last().map_or(T::one(), |j| j.1)
    }
}

/// `P_t = min { h > 0 on the grid : F(h) <= t h }`.
pub fn p_process<T: Scalar>(f: &BreakpointFunction<T>) -> PProcess<T> {
    let mut jumps = Vec::new();
    let mut best: Option<T> = None;
    for j in 1..f.len() - 1 {
        let s = f.values[j] / f.h[j];
        if best.is_none_or(|b| s < b - T::slack(b)) {
            best = Some(s);
            jumps.push((s, f.h[j]));
        }
    }
    jumps.reverse();
    PProcess { jumps }
}
