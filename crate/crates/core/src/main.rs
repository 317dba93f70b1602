use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cutlab::excursion_ops::{drifted_records, x_b};
use cutlab::fragmentation::fragmentation_timeline;
use cutlab::harness::{run_suite, SuiteConfig, EXPERIMENTS};
use cutlab::pacman::bertoin_function;
use cutlab::prim::prim_path;
use cutlab::reconstruct::{complete_routings, phi_rebuild, true_routings, xi_stick_breaking};
use cutlab::samplers::{sample_excursion_grid, sample_instance, Seed};
use cutlab::{build_cut_tree, CutTree, Error, Exact, Instance, Mode, Result, Scalar};

#[derive(Parser)]
#[command(name = "cutlab", version, about = "Cut-tree, fragmentation and excursion laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a labelled Cayley tree with a cut schedule.
    Gen(Common),
    /// Fragmentation timeline and fragment masses at the given times.
    Fragment(Common),
    /// Cut-tree of an instance.
    Cuttree(Common),
    /// Breakpoints of the Pac-Man function `F`.
    Bertoin(Common),
    /// Drifted excursion decomposition of a sampled Brownian excursion grid.
    Xb(Common),
    /// Stick-breaking and rebuild roundtrips on an instance.
    Reconstruct(Common),
    /// Prim-order path with `k` deleted edges.
    Prim {
        #[command(flatten)]
        common: Common,
        /// Number of deleted edges (largest ranks first).
        #[arg(long, default_value_t = 0)]
        k: usize,
    },
    /// Run an acceptance suite.
    Verify(Suite),
    /// Run a statistical suite.
    Stats(Suite),
}

#[derive(Args, Clone)]
struct Common {
    /// Number of vertices.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Cut schedule: rank or exp.
    #[arg(long, default_value = "rank")]
    mode: Mode,
    /// Compute in exact rationals (rank mode only).
    #[arg(long)]
    exact: bool,
    /// Drift or cut times, comma separated; rationals like 3/2 allowed.
    #[arg(long, value_delimiter = ',')]
    t: Vec<String>,
    /// Grid size for Brownian excursions (power of two).
    #[arg(long)]
    grid: Option<usize>,
    /// Replicas.
    #[arg(long)]
    reps: Option<usize>,
    /// Read the instance from this JSON file instead of sampling one.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Write the main output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct Suite {
    /// Experiment name; `list` prints the catalogue.
    experiment: String,
    #[command(flatten)]
    common: SuiteFlags,
}

#[derive(Args)]
struct SuiteFlags {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    /// Run on this instance only.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Write the report JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for sample CSV dumps.
    #[arg(long)]
    dump_dir: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen(c) => {
            let inst = load(&c)?;
            emit(&c, &serde_json::to_string_pretty(&inst.to_json())?)?;
        }
        Command::Fragment(c) => dispatch(&c, fragment::<Exact>, fragment::<f64>)?,
        Command::Cuttree(c) => dispatch(&c, cuttree::<Exact>, cuttree::<f64>)?,
        Command::Bertoin(c) => dispatch(&c, bertoin::<Exact>, bertoin::<f64>)?,
        Command::Reconstruct(c) => return dispatch_bool(&c, reconstruct::<Exact>, reconstruct::<f64>),
        Command::Xb(c) => xb(&c)?,
        Command::Prim { common, k } => {
            let inst = load(&common)?;
            let p = prim_path(&inst.tree, &inst.schedule, k)?;
            let text = if common.json {
                serde_json::to_string_pretty(&json!({
                    "order": p.order, "values": p.values, "k": p.k, "component_sizes": p.component_sizes(),
                }))?
            } else {
                p.to_csv()
            };
            emit(&common, &text)?;
        }
        Command::Verify(s) | Command::Stats(s) => return suite(s),
    }
    Ok(true)
}

fn load(c: &Common) -> Result<Instance> {
    match &c.input {
        Some(path) => Instance::read(path),
        None => sample_instance(c.n, c.mode, &Seed::new(c.seed)),
    }
}

fn emit(c: &Common, text: &str) -> Result<()> {
    match &c.out {
        Some(path) => std::fs::write(path, text)?,
        None => say(text.trim_end())?,
    }
    Ok(())
}

/// Prints a line; a closed pipe ends output quietly.
fn say(text: impl AsRef<str>) -> Result<()> {
    match writeln!(std::io::stdout().lock(), "{}", text.as_ref()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn use_exact(c: &Common, inst: &Instance) -> Result<bool> {
    if c.exact && inst.schedule.mode() != Mode::Rank {
        return Err(Error::RanksRequired);
    }
    Ok(c.exact)
}

fn dispatch(
    c: &Common,
    exact: fn(&Common, &Instance) -> Result<String>,
    float: fn(&Common, &Instance) -> Result<String>,
) -> Result<()> {
    let inst = load(c)?;
    let text = if use_exact(c, &inst)? { exact(c, &inst)? } else { float(c, &inst)? };
    emit(c, &text)
}

fn dispatch_bool(
    c: &Common,
    exact: fn(&Common, &Instance) -> Result<(String, bool)>,
    float: fn(&Common, &Instance) -> Result<(String, bool)>,
) -> Result<bool> {
    let inst = load(c)?;
    let (text, ok) = if use_exact(c, &inst)? { exact(c, &inst)? } else { float(c, &inst)? };
    emit(c, &text)?;
    Ok(ok)
}

/// Parses `p/q`, integers and decimals.
fn parse_time<T: Scalar>(s: &str) -> Result<T> {
    if let Ok(x) = T::from_json(&Value::String(s.to_string())) {
        return Ok(x);
    }
    let bad = || Error::InvalidParameter(format!("`{s}` is not a time"));
    let (int, frac) = s.trim().split_once('.').ok_or_else(bad)?;
    let digits = format!("{int}{frac}");
    if frac.len() > 12 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let num: i64 = digits.parse().map_err(|_| bad())?;
    Ok(T::ratio(num, 10i64.pow(frac.len() as u32)))
}

fn times<T: Scalar>(c: &Common, default: &[&str]) -> Result<Vec<T>> {
    let given: Vec<&str> = c.t.iter().map(String::as_str).collect();
    let list = if given.is_empty() { default } else { &given[..] };
    list.iter().map(|s| parse_time(s)).collect()
}

fn render_masses<T: Scalar>(m: &[T]) -> String {
    m.iter().map(|x| x.render()).collect::<Vec<_>>().join(" ")
}

fn fragment<T: Scalar>(c: &Common, inst: &Instance) -> Result<String> {
    let tl = fragmentation_timeline::<T>(&inst.tree, &inst.schedule)?;
    let ts: Vec<T> = times(c, &["1"])?;
    if c.json {
        let masses: Vec<Value> = ts
            .iter()
            .map(|&t| json!({ "t": t.to_json(), "masses": tl.x_ap(t).masses.iter().map(|x| x.to_json()).collect::<Vec<_>>() }))
            .collect();
        return Ok(serde_json::to_string_pretty(&json!({ "timeline": tl.to_json(), "x_ap": masses }))?);
    }
    let mut out = String::from("time, edge, u, v, far_size, component_size\n");
    for e in &tl.events {
        writeln!(out, "{}, {}, {}, {}, {}, {}", e.time.render(), e.edge, e.u, e.v, e.far_size, e.component_size).unwrap();
    }
    for t in ts {
        writeln!(out, "X_AP({}) = {}", t.render(), render_masses(&tl.x_ap(t).masses)).unwrap();
    }
    Ok(out)
}

fn cuttree<T: Scalar>(_c: &Common, inst: &Instance) -> Result<String> {
    let ct: CutTree<T> = build_cut_tree(&inst.tree, &inst.schedule)?;
    Ok(serde_json::to_string_pretty(&ct.to_json())?)
}

fn bertoin<T: Scalar>(c: &Common, inst: &Instance) -> Result<String> {
    let ct: CutTree<T> = build_cut_tree(&inst.tree, &inst.schedule)?;
    let f = bertoin_function(&ct)?;
    if !c.json {
        return Ok(f.to_csv());
    }
    let ts: Vec<T> = times(c, &[])?;
    let records: Vec<Value> = ts.iter().map(|&t| drifted_records(&f, t).to_json()).collect();
    Ok(serde_json::to_string_pretty(&json!({
        "h": f.h.iter().map(|x| x.to_json()).collect::<Vec<_>>(),
        "values": f.values.iter().map(|x| x.to_json()).collect::<Vec<_>>(),
        "records": records,
    }))?)
}

fn reconstruct<T: Scalar>(c: &Common, inst: &Instance) -> Result<(String, bool)> {
    let ct: CutTree<T> = build_cut_tree(&inst.tree, &inst.schedule)?;
    let f = bertoin_function(&ct)?;
    let xi = xi_stick_breaking(&f)?;
    let tol = if T::EXACT { T::zero() } else { T::ratio(1, 1_000_000_000) };
    let xi_diff = xi.first_difference(&ct, tol);
    let rebuilt_true = phi_rebuild(&true_routings(&ct)?)?;
    let sampled = phi_rebuild(&complete_routings(&xi, &Seed::new(c.seed).derive("routing", 0)))?;
    let sampled_ct: CutTree<T> = build_cut_tree(&sampled.tree, &sampled.schedule)?;
    let sampled_f = bertoin_function(&sampled_ct)?;
    let close = |a: &[T], b: &[T]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (*x - *y).abs() <= tol);
    let f_preserved = close(&sampled_f.h, &f.h) && close(&sampled_f.values, &f.values);
    let true_ok = rebuilt_true.same_labeled(inst);
    let report = json!({
        "xi_isomorphic": xi_diff.is_none(),
        "xi_difference": xi_diff,
        "phi_true_identical": true_ok,
        "phi_sampled_same_labels": sampled.same_labeled(inst),
        "phi_sampled_f_preserved": f_preserved,
        "sampled_instance": sampled.to_json(),
    });
    let ok = report["xi_isomorphic"] == true && true_ok && f_preserved;
    let text = if c.json {
        serde_json::to_string_pretty(&report)?
    } else {
        format!(
            "stick-breaking isomorphic: {}\ntrue-routing rebuild identical: {}\nsampled rebuild preserves F: {}\nsampled rebuild same labels: {}\n",
            report["xi_isomorphic"], true_ok, f_preserved, report["phi_sampled_same_labels"]
        )
    };
    Ok((text, ok))
}

fn xb(c: &Common) -> Result<()> {
    let m = c.grid.unwrap_or(1 << 12);
    let e = sample_excursion_grid(m, &Seed::new(c.seed))?;
    let ts: Vec<f64> = times(c, &["1"])?;
    if let Some(path) = &c.out {
        let mut csv = String::from("i, e_i\n");
        for (i, v) in e.values.iter().enumerate() {
            writeln!(csv, "{i}, {v}").unwrap();
        }
        std::fs::write(path, csv)?;
    }
    for t in ts {
        let masses = x_b(&e, t).masses;
        if c.json {
            say(json!({ "t": t, "masses": masses }).to_string())?;
        } else {
            say(format!("X_B({t}) = {}", render_masses(&masses)))?;
        }
    }
    Ok(())
}

fn suite(s: Suite) -> Result<bool> {
    if s.experiment == "list" {
        for (name, about) in EXPERIMENTS {
            say(format!("{name:16} {about}"))?;
        }
        return Ok(true);
    }
    let f = s.common;
    let mut cfg = SuiteConfig::new(&s.experiment, f.seed);
    cfg.n = f.n;
    cfg.replicas = f.reps;
    cfg.grid = f.grid;
    cfg.t = f.t;
    cfg.mode = f.mode;
    cfg.dump_dir = f.dump_dir;
    if let Some(path) = f.input {
        cfg.instance = Some(Instance::read(&path)?.to_json());
    }
    let report = run_suite(&cfg)?;
    if let Some(path) = &f.out {
        std::fs::write(path, serde_json::to_string_pretty(&report.to_json())?)?;
    }
    if f.json {
        say(serde_json::to_string_pretty(&report.to_json())?)?;
    } else {
        say(report.summary().trim_end())?;
    }
    Ok(report.pass)
}
