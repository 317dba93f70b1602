//! Per-check accumulators merged across replicas in index order.

use std::time::Instant;

use super::{CheckRecord, Comparison};

#[derive(Clone, Debug)]
struct Tally {
    name: &'static str,
    failures: u64,
    cases: u64,
    /// Largest deviation, for checks with a numeric tolerance.
    deviation: f64,
    tolerance: Option<f64>,
    note: Option<String>,
    secs: f64,
}

/// Named checks in first-use order.
#[derive(Clone, Debug, Default)]
pub(crate) struct Tallies {
    items: Vec<Tally>,
}

impl Tallies {
    fn get(&mut self, name: &'static str) -> &mut Tally {
        if let Some(i) = self.items.iter().position(|t| t.name == name) {
            return &mut self.items[i];
        }
        self.items.push(Tally { name, failures: 0, cases: 0, deviation: 0.0, tolerance: None, note: None, secs: 0.0 });
        self.items.last_mut().unwrap()
    }

    /// Declares a check so it shows up even when no case was run.
    pub fn declare(&mut self, name: &'static str) {
        self.get(name);
    }

    /// Declares a check compared by deviation against `tol`.
    pub fn declare_tolerance(&mut self, name: &'static str, tol: f64) {
        self.get(name).tolerance = Some(tol);
    }

    /// Records one case.
    pub fn record(&mut self, name: &'static str, ok: bool, note: impl FnOnce() -> String) {
        let t = self.get(name);
        t.cases += 1;
        if !ok {
            t.failures += 1;
            if t.note.is_none() {
                t.note = Some(note());
            }
        }
    }

    /// Records one case with a numeric deviation.
    pub fn deviation(&mut self, name: &'static str, dev: f64, note: impl FnOnce() -> String) {
        let t = self.get(name);
        let tol = t.tolerance.unwrap_or(0.0);
        t.deviation = t.deviation.max(dev);
        t.cases += 1;
        if !(dev <= tol) {
            t.failures += 1;
            if t.note.is_none() {
                t.note = Some(note());
            }
        }
    }

    /// Runs `f`, charging its time to `name`.
    pub fn timed<R>(&mut self, name: &'static str, f: impl FnOnce(&mut Self) -> R) -> R {
        let start = Instant::now();
        let r = f(self);
        self.get(name).secs += start.elapsed().as_secs_f64();
        r
    }

    pub fn merge(&mut self, other: Tallies) {
        for o in other.items {
            let t = self.get(o.name);
            t.failures += o.failures;
            t.cases += o.cases;
            t.deviation = t.deviation.max(o.deviation);
            if t.tolerance.is_none() {
                t.tolerance = o.tolerance;
            }
            if t.note.is_none() {
                t.note = o.note;
            }
            t.secs += o.secs;
        }
    }

    pub fn into_records(self) -> Vec<CheckRecord> {
        self.items
            .into_iter()
            .map(|t| {
                let mut c = match t.tolerance {
                    Some(tol) => {
                        // a NaN deviation fails without raising the maximum
                        let stat = if t.failures > 0 && t.deviation <= tol { f64::MAX } else { t.deviation };
                        CheckRecord::new(t.name, stat, Comparison::AtMost, tol)
                    }
                    None => CheckRecord::new(t.name, t.failures as f64, Comparison::AtMost, 0.0),
                };
                c.cases = t.cases;
                c.runtime_s = t.secs;
                if let Some(n) = t.note {
                    c.note = n;
                }
                c
            })
            .collect()
    }
}
