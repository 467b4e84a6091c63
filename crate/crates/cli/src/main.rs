//! `freeze-swarm`: generate instances, run the algorithms, verify traces,
//! sweep parameters and render runs.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use freeze_swarm::geometry::{hop_bound_check, is_admissible, InstanceMetrics, Point};
use freeze_swarm::harness::bounds::{verdicts, Bound, Constants};
use freeze_swarm::harness::rho::rho_study;
use freeze_swarm::harness::sweep::{
    fit, pin_value, run_point, write_csv, BudgetSpec, GridPoint, RowStatus,
};
use freeze_swarm::harness::{render_svg, run_sweep, SweepConfig};
use freeze_swarm::instances::{read_instance, write_instance, Family, Instance, RectilinearLayout};
use freeze_swarm::oracles::{replay_validate, Verdict};
use freeze_swarm::run::{run, Algo, RunParams};
use freeze_swarm::sim::{RunSummary, Trace};
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_PARSE: u8 = 2;
const EXIT_VIOLATION: u8 = 3;
const EXIT_INCOMPLETE: u8 = 4;
const EXIT_BOUND: u8 = 5;

#[derive(Parser)]
#[command(
    name = "freeze-swarm",
    version,
    about = "Wake a sleeping robot swarm in the plane"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Run an algorithm on an instance.
    Run(RunArgs),
    /// Recompute metrics of an instance and optionally replay a trace against it.
    Verify(VerifyArgs),
    /// Run a parameter sweep and write one CSV row per run.
    Bench(BenchArgs),
    /// Render a trace as SVG.
    Render(RenderArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct InstanceArgs {
    #[arg(long, default_value = "connected")]
    family: Family,
    #[arg(long)]
    ell: Option<i64>,
    #[arg(long)]
    rho: Option<i64>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Vertical gap parameter of the rectilinear family.
    #[arg(long)]
    b: Option<f64>,
    /// Target eccentricity of the rectilinear family.
    #[arg(long)]
    ecc: Option<f64>,
}

impl InstanceArgs {
    fn generate(&self) -> Result<Instance> {
        let ell = self.ell.unwrap_or(1);
        let rho = self.rho.unwrap_or(ell.max(1) * 8);
        let b = self.b.unwrap_or(2.0 * ell as f64);
        let ecc = self.ecc.unwrap_or_else(|| {
            let (lo, hi) = RectilinearLayout::ecc_range(rho as f64, b, self.n, ell as f64);
            (lo + hi) / 2.0
        });
        let p = GridPoint {
            family: self.family,
            ell,
            rho,
            n: self.n,
            seed: self.seed,
            b,
            ecc,
        };
        Ok(p.generate()?)
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Instance file; otherwise one is generated from the family flags.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value = "aseparator")]
    algo: Algo,
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long)]
    budget: Option<f64>,
    /// Directory receiving trace.jsonl and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Fail when a bound verdict fails.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Disk radius for the eccentricity; defaults to the instance hint.
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct BenchArgs {
    /// Built-in sweep: `connected` or `rectilinear`.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Sweep configuration as JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Restrict to these algorithms (comma separated).
    #[arg(long, value_delimiter = ',')]
    algo: Vec<Algo>,
    #[arg(long, value_delimiter = ',')]
    ell: Vec<i64>,
    #[arg(long, value_delimiter = ',')]
    rho: Vec<i64>,
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    family: Vec<Family>,
    #[arg(long)]
    budget: Option<f64>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the radius-estimation study instead of a sweep.
    #[arg(long, conflicts_with_all = ["preset", "config"])]
    rho_study: bool,
    /// Write the fitted constants, rounded up, to this file.
    #[arg(long)]
    fit: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    trace: PathBuf,
    /// Summary whose round log adds squares to the picture.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Instance supplying the initial positions.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// Error carrying its exit status.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn fail(code: u8, msg: impl Into<String>) -> anyhow::Error {
    Exit(code, msg.into()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_PARSE } else { 0 });
        }
    };
    let result = match cli.cmd {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Run(a) => cmd_run(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Render(a) => cmd_render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Exit>().map(|x| x.0).unwrap_or(EXIT_PARSE);
            ExitCode::from(code)
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    read_instance(path).with_context(|| format!("reading {}", path.display()))
}

fn load_trace(path: &Path) -> Result<Trace> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Trace::read_jsonl(BufReader::new(f)).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn load_summary(path: &Path) -> Result<RunSummary> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let inst = a.inst.generate()?;
    match a.out {
        Some(p) => {
            write_instance(&inst, &p).with_context(|| format!("writing {}", p.display()))?;
            eprintln!("wrote {} ({} robots)", p.display(), inst.n);
        }
        None => println!("{}", inst.to_json()),
    }
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let inst = match &a.instance {
        Some(p) => load_instance(p)?,
        None => a.inst.generate()?,
    };
    let params = RunParams {
        ell: a.inst.ell.map(|x| x as f64),
        rho: a.inst.rho.map(|x| x as f64),
        budget: a.budget,
        record: true,
        track_discovery: false,
    };
    let out = run(&inst, a.algo, &params).map_err(|e| fail(EXIT_PARSE, e.to_string()))?;
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let f = File::create(dir.join("trace.jsonl"))?;
        out.trace.write_jsonl(std::io::BufWriter::new(f))?;
        std::fs::write(dir.join("summary.json"), out.summary.to_json() + "\n")?;
    }
    let constants = Constants::pinned();
    let v = verdicts(a.algo, &out.summary, &constants);
    let s = &out.summary;
    match a.format {
        Some(Format::Json) => println!("{}", s.to_json()),
        Some(Format::Csv) => {
            let p = GridPoint {
                family: inst.family,
                ell: inst.ell_hint,
                rho: inst.rho_hint,
                n: inst.n,
                seed: inst.seed,
                b: 0.0,
                ecc: 0.0,
            };
            let budget = a
                .budget
                .map(BudgetSpec::Fixed)
                .unwrap_or(BudgetSpec::Unbounded);
            let row = run_point(&p, &inst, a.algo, budget, &constants).row;
            write_csv(&[row], std::io::stdout())?;
        }
        None => {
            println!("algorithm: {}", s.algorithm);
            println!("robots: {}", s.n);
            println!(
                "status: {}",
                if s.complete { "complete" } else { "incomplete" }
            );
            println!("makespan (last wake): {:.3}", s.makespan_last_wake);
            println!("makespan (last action): {:.3}", s.makespan_last_action);
            if let Some(r0) = s.rounds.iter().find(|r| r.k == 0) {
                println!("round 0 ends at: {:.3}", r0.end);
            }
            println!("rounds: {}", s.round_count());
            println!("max energy: {:.3}", s.max_energy);
            println!("wake events: {}", s.wake_events);
            for x in &v {
                println!(
                    "bound {}: measured {:.3}, limit {:.3} (ratio {:.4}) {}",
                    x.bound.name(),
                    x.measured,
                    x.limit(),
                    x.ratio,
                    if x.pass { "pass" } else { "FAIL" }
                );
            }
        }
    }
    if let Some(e) = out.violation() {
        return Err(fail(EXIT_VIOLATION, format!("model violation: {e}")));
    }
    if !s.complete {
        let ids: Vec<String> = s
            .still_sleeping
            .iter()
            .take(10)
            .map(Point::to_string)
            .collect();
        return Err(fail(
            EXIT_INCOMPLETE,
            format!(
                "incomplete: {} robots still sleeping, {} lazy robots never placed {}",
                s.still_sleeping.len(),
                s.unresolved_lazy,
                ids.join(" ")
            ),
        ));
    }
    if a.strict && v.iter().any(|x| !x.pass) {
        return Err(fail(EXIT_BOUND, "bound check failed"));
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let ell = a.ell.unwrap_or(inst.ell_hint as f64);
    let admissible = is_admissible(inst.ell_hint, inst.rho_hint, inst.n as i64);
    let summary = a.summary.as_deref().map(load_summary).transpose()?;
    let metrics = if inst.is_lazy() {
        summary.as_ref().and_then(|s| s.metrics)
    } else if inst.positions.is_empty() {
        None
    } else {
        Some(InstanceMetrics::compute(
            &inst.positions,
            Point::ORIGIN,
            ell,
        )?)
    };
    let report = a
        .trace
        .as_deref()
        .map(load_trace)
        .transpose()?
        .map(|t| replay_validate(&t, &inst, summary.as_ref()));
    match a.format {
        Some(Format::Json) => {
            let doc = serde_json::json!({
                "n": inst.n,
                "family": inst.family,
                "admissible": admissible,
                "metrics": metrics,
                "replay": report,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        _ => {
            println!("family: {:?}", inst.family);
            println!("robots: {}", inst.n);
            println!(
                "admissible (ell={}, rho={}, n={}): {admissible}",
                inst.ell_hint, inst.rho_hint, inst.n
            );
            match &metrics {
                Some(m) => {
                    println!("ell*: {:.6}", m.ell_star);
                    println!("rho*: {:.6}", m.rho_star);
                    match m.ecc {
                        Some(e) => println!("ecc_ell (ell={}): {:.6}", m.ecc_ell, e),
                        None => println!("ecc_ell (ell={}): infinite", m.ecc_ell),
                    }
                    println!("metric chain holds: {}", m.chain_holds());
                }
                None => println!("metrics: unavailable (lazy instance without a summary)"),
            }
            if !inst.is_lazy() && !inst.positions.is_empty() {
                if let Ok(h) = hop_bound_check(&inst.positions, Point::ORIGIN, ell) {
                    println!("hop bound holds: {h}");
                }
            }
            if let Some(r) = &report {
                match &r.verdict {
                    Verdict::Pass => println!("replay: pass (max energy {:.3})", r.reference),
                    Verdict::Fail { event, reason } => {
                        println!("replay: FAIL at event {event:?}: {reason}")
                    }
                }
            }
        }
    }
    if !inst.is_lazy() && !inst.positions.is_empty() {
        inst.verify_hints()
            .map_err(|e| fail(EXIT_PARSE, e.to_string()))?;
    }
    if report.is_some_and(|r| !r.passed()) {
        return Err(fail(EXIT_VIOLATION, "trace replay failed"));
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    if a.rho_study {
        return cmd_rho_study(a);
    }
    let mut config = match (&a.preset, &a.config) {
        (Some(p), _) => SweepConfig::preset(p).ok_or_else(|| anyhow!("unknown preset {p:?}"))?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        (None, None) => bail!("give --preset or --config"),
    };
    if !a.algo.is_empty() {
        config.algorithms = a.algo.clone();
    }
    if !a.ell.is_empty() {
        config.ells = a.ell.clone();
    }
    if !a.rho.is_empty() {
        config.rhos = a.rho.clone();
    }
    if !a.seed.is_empty() {
        config.seeds = a.seed.clone();
    }
    if !a.family.is_empty() {
        config.families = a.family.clone();
    }
    if let Some(b) = a.budget {
        config.budgets = vec![BudgetSpec::Fixed(b)];
    }
    let results = run_sweep(&config);
    let rows: Vec<_> = results.iter().map(|r| r.row.clone()).collect();
    let out = a.out.clone().or(config.csv_out.clone());
    match a.format {
        Some(Format::Json) => println!("{}", serde_json::to_string_pretty(&rows)?),
        _ => match &out {
            Some(p) => write_csv(
                &rows,
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            )?,
            None => write_csv(&rows, std::io::stdout())?,
        },
    }
    let fits = fit(&results, &config.constants);
    let mut err = std::io::stderr();
    for f in &fits {
        writeln!(
            err,
            "fit {}: max ratio {:.4} over {} runs, pinned {:.4} {}",
            f.bound.name(),
            f.max_ratio,
            f.samples,
            f.pinned,
            if f.pass { "pass" } else { "FAIL" }
        )?;
    }
    let count = |s: RowStatus| rows.iter().filter(|r| r.status == s).count();
    writeln!(
        err,
        "runs: {} complete, {} incomplete, {} errors, {} skipped",
        count(RowStatus::Complete),
        count(RowStatus::Incomplete),
        count(RowStatus::Error),
        count(RowStatus::Skipped)
    )?;
    if let Some(path) = &a.fit {
        let mut c = config.constants.clone();
        for f in &fits {
            c.set(f.bound, pin_value(f.max_ratio));
        }
        std::fs::write(path, c.to_json() + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if a.strict {
        if count(RowStatus::Error) > 0 {
            return Err(fail(
                EXIT_VIOLATION,
                "some runs stopped on a model violation",
            ));
        }
        if count(RowStatus::Incomplete) > 0 {
            return Err(fail(EXIT_INCOMPLETE, "some runs left robots asleep"));
        }
        if fits.iter().any(|f| !f.pass) {
            return Err(fail(EXIT_BOUND, "bound check failed"));
        }
    }
    Ok(())
}

fn cmd_render(a: RenderArgs) -> Result<()> {
    let trace = load_trace(&a.trace)?;
    let rounds = match &a.summary {
        Some(p) => load_summary(p)?.rounds,
        None => Vec::new(),
    };
    let inst = a.instance.as_deref().map(load_instance).transpose()?;
    let initial = inst
        .as_ref()
        .filter(|i| !i.is_lazy())
        .map(|i| i.positions.as_slice());
    let svg = render_svg(&trace, &rounds, initial);
    std::fs::write(&a.out, svg).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn cmd_rho_study(a: BenchArgs) -> Result<()> {
    let mut constants = Constants::pinned();
    let rows = rho_study(&constants);
    let mut ok = Vec::new();
    for r in rows {
        match r {
            Ok(r) => ok.push(r),
            Err(e) => return Err(fail(EXIT_VIOLATION, format!("estimation failed: {e}"))),
        }
    }
    let body = serde_json::to_string_pretty(&ok)?;
    match &a.out {
        Some(p) => {
            std::fs::write(p, body + "\n").with_context(|| format!("writing {}", p.display()))?
        }
        None => println!("{body}"),
    }
    let out_of_range = ok.iter().filter(|r| !r.in_range).count();
    let max_ratio = ok.iter().map(|r| r.overcost.ratio).fold(0.0, f64::max);
    let failing = ok.iter().filter(|r| !r.overcost.pass).count();
    eprintln!(
        "rho study: {} instances, {out_of_range} estimates outside [rho*, 3 rho*], overcost max ratio {max_ratio:.4} (pinned {:.4}, {failing} over)",
        ok.len(),
        constants.c_rho_overcost
    );
    if let Some(path) = &a.fit {
        constants.set(Bound::RhoOvercost, pin_value(max_ratio));
        std::fs::write(path, constants.to_json() + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if a.strict && (out_of_range > 0 || failing > 0) {
        return Err(fail(EXIT_BOUND, "radius estimation gate failed"));
    }
    Ok(())
}
