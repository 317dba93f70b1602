//! Monte Carlo law comparisons by two-sample KS statistics.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use super::{invalid, ks_two_sample, param, CheckRecord, Comparison, SuiteConfig};
use crate::cut_tree::{build_cut_tree, CutTree};
use crate::error::Result;
use crate::excursion_ops::{first_excursion_length, x_b};
use crate::model::{component_masses, Mode};
use crate::pacman::bertoin_function;
use crate::prim::prim_path;
use crate::samplers::{sample_excursion_grid, sample_instance, sample_tagged_mass, ExcursionGrid, Seed};

fn seed(cfg: &SuiteConfig, tag: &str, r: u64) -> Seed {
    Seed::new(cfg.seed).derive(&cfg.experiment, 0).derive(tag, r)
}

fn grids(cfg: &SuiteConfig, reps: usize, m: usize) -> Result<Vec<ExcursionGrid>> {
    (0..reps as u64).into_par_iter().map(|r| sample_excursion_grid(m, &seed(cfg, "grid", r))).collect()
}

fn draws<F>(reps: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(u64) -> Result<f64> + Sync + Send,
{
    (0..reps as u64).into_par_iter().map(f).collect()
}

/// Writes the two samples side by side when a dump directory is set.
fn dump(cfg: &SuiteConfig, name: &str, a: &[f64], b: &[f64]) -> Result<()> {
    let Some(dir) = &cfg.dump_dir else { return Ok(()) };
    std::fs::create_dir_all(dir)?;
    let mut out = String::from("index,discrete,continuum\n");
    for i in 0..a.len().max(b.len()) {
        let cell = |s: &[f64]| s.get(i).map(|x| x.to_string()).unwrap_or_default();
        writeln!(out, "{i},{},{}", cell(a), cell(b)).unwrap();
    }
    std::fs::write(dir.join(format!("{}-{name}.csv", cfg.experiment)), out)?;
    Ok(())
}

fn ks_record(name: &str, a: &[f64], b: &[f64], cmp: Comparison, tol: f64, start: Instant) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(name, ks_two_sample(a, b)?, cmp, tol)
        .with_note(format!("{} vs {} samples", a.len(), b.len()))
        .with_runtime(start.elapsed().as_secs_f64());
    rec.cases = a.len() as u64;
    Ok(rec)
}

fn times(cfg: &SuiteConfig, default: &[f64]) -> Result<Vec<f64>> {
    let ts = if cfg.t.is_empty() { default.to_vec() } else { cfg.t.clone() };
    if ts.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(invalid("drift times must be finite and nonnegative"));
    }
    Ok(ts)
}

/// First drifted excursion length against `Z^2 / (Z^2 + t^2)`.
pub(super) fn tagged_law(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let reps = param(cfg.replicas, 4000);
    let m = param(cfg.grid, 1 << 15);
    let es = grids(cfg, reps, m)?;
    let mut out = Vec::new();
    for (i, t) in times(cfg, &[0.5, 1.0, 2.0])?.into_iter().enumerate() {
        let start = Instant::now();
        let a: Vec<f64> = es.par_iter().map(|e| first_excursion_length(e, t)).collect();
        let b = sample_tagged_mass(t, reps, &seed(cfg, "tagged", i as u64))?;
        dump(cfg, &format!("t{t}"), &a, &b)?;
        out.push(ks_record(&format!("ks t={t}"), &a, &b, Comparison::AtMost, 0.04, start)?);
    }
    Ok(out)
}

/// Largest fragment of the discrete forest against the largest drifted
/// excursion of the Brownian grid.
pub(super) fn cross_law(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let reps = param(cfg.replicas, 2000);
    let n = param(cfg.n, 2000);
    let m = param(cfg.grid, 1 << 14);
    let ts = times(cfg, &[1.0])?;
    let insts: Vec<_> = (0..reps as u64)
        .into_par_iter()
        .map(|r| sample_instance(n, Mode::Exponential, &seed(cfg, "instance", r)))
        .collect::<Result<_>>()?;
    let es = grids(cfg, reps, m)?;
    let mut out = Vec::new();
    for t in ts {
        let start = Instant::now();
        let a = draws(reps, |r| {
            let i = &insts[r as usize];
            Ok(component_masses(&i.tree, &i.schedule, t)?.largest().unwrap_or(0.0))
        })?;
        let b: Vec<f64> = es.par_iter().map(|e| x_b(e, t).largest().unwrap_or(0.0)).collect();
        dump(cfg, &format!("t{t}"), &a, &b)?;
        out.push(ks_record(&format!("ks t={t}"), &a, &b, Comparison::AtMost, 0.05, start)?);
    }
    Ok(out)
}

/// `F` at the breakpoint nearest `1/2` against the excursion at `1/2`.
pub(super) fn f_marginal(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let reps = param(cfg.replicas, 2000);
    let n = param(cfg.n, 2000);
    let m = param(cfg.grid, 1 << 14);
    let start = Instant::now();
    let a = draws(reps, |r| {
        let inst = sample_instance(n, Mode::Exponential, &seed(cfg, "instance", r))?;
        let ct: CutTree<f64> = build_cut_tree(&inst.tree, &inst.schedule)?;
        let f = bertoin_function(&ct)?;
        Ok(f.values[f.nearest(0.5)])
    })?;
    let b: Vec<f64> = grids(cfg, reps, m)?.iter().map(|e| e.at(0.5)).collect();
    dump(cfg, "half", &a, &b)?;
    Ok(vec![ks_record("ks h=1/2", &a, &b, Comparison::AtMost, 0.05, start)?])
}

/// Largest Prim-path component fraction under two removal scalings.
pub(super) fn prim_scaling(cfg: &SuiteConfig) -> Result<Vec<CheckRecord>> {
    let reps = param(cfg.replicas, 2000);
    let n = param(cfg.n, 10_000);
    let m = param(cfg.grid, 1 << 14);
    if n < 2 {
        return Err(invalid("prim-scaling needs n >= 2"));
    }
    let insts: Vec<_> = (0..reps as u64)
        .into_par_iter()
        .map(|r| sample_instance(n, Mode::Rank, &seed(cfg, "instance", r)))
        .collect::<Result<_>>()?;
    let es = grids(cfg, reps, m)?;
    let largest = |k: usize| {
        draws(reps, |r| {
            let i = &insts[r as usize];
            let p = prim_path(&i.tree, &i.schedule, k.min(n - 1))?;
            Ok(p.component_sizes().into_iter().max().unwrap_or(0) as f64 / n as f64)
        })
    };
    let mut out = Vec::new();
    for t in times(cfg, &[0.5, 1.0])? {
        let b: Vec<f64> = es.par_iter().map(|e| x_b(e, t).largest().unwrap_or(0.0)).collect();
        let start = Instant::now();
        let a = largest((t * (n as f64).sqrt()).floor() as usize)?;
        dump(cfg, &format!("sqrt-t{t}"), &a, &b)?;
        out.push(ks_record(&format!("ks sqrt(n) t={t}"), &a, &b, Comparison::AtMost, 0.07, start)?);
        let start = Instant::now();
        let a = largest((t * n as f64).floor() as usize)?;
        dump(cfg, &format!("linear-t{t}"), &a, &b)?;
        out.push(ks_record(&format!("ks n t={t}"), &a, &b, Comparison::AtLeast, 0.3, start)?);
    }
    Ok(out)
}
