//! `smil` command-line front end.
//!
//! Exit codes: 0 when every run ends critical, 1 on input or I/O errors,
//! 2 on usage errors, and 3..=9 for the other solver statuses (see
//! [`status_code`]).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use smil::bench::{
    build_complementarity, build_turbo, decode_trajectory, random_instance, turbo_initial_guess, TurboInstance,
    TurboParams,
};
use smil::expr::Expression;
use smil::model::{MixedIntegerPolyhedron, NormKind, SmoothObjective};
use smil::oracle::{enumerate_minlp, DEFAULT_COMBO_LIMIT};
use smil::problem::{load_problem, ProblemFile};
use smil::refine::RefineConfig;
use smil::report::{campaign_stats, trace_csv, trajectory_csv, Summary};
use smil::smil::{solve, SolveStatus, SolverConfig, TrRule};

#[derive(Parser)]
#[command(name = "smil", version, about = "Trust-region solver for smooth objectives over mixed-integer polyhedra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver on a problem file or a built-in instance.
    Solve(SolveArgs),
    /// Enumerate integer combinations and refine each feasible one.
    Baseline(BaselineArgs),
    /// Aggregate summary JSON files into quartile statistics.
    Stats(StatsArgs),
    /// Write a built-in instance as a problem file.
    Export(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    Turbo,
    Random,
    Complementarity,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Linf,
    L1,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Classic,
    Reset,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem file (JSON).
    #[arg(long, conflicts_with = "problem")]
    file: Option<PathBuf>,
    /// Built-in instance.
    #[arg(long)]
    problem: Option<Builtin>,
    /// Turbo grid intervals.
    #[arg(long, default_value_t = 25)]
    n: usize,
    /// Random instance: real variables.
    #[arg(long, default_value_t = 4)]
    n_real: usize,
    /// Random instance: integer variables.
    #[arg(long, default_value_t = 2)]
    n_int: usize,
    /// Random instance: inequality rows.
    #[arg(long, default_value_t = 4)]
    rows: usize,
    /// Complementarity bound U.
    #[arg(long, default_value_t = 1.0)]
    bound: f64,
    /// Complementarity objective coefficients g1,g2,g3.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.0, 0.0])]
    gradient: Vec<f64>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Seed of the initial guess (and of the random instance).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of runs with consecutive seeds, solved in parallel.
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    delta0: f64,
    #[arg(long, default_value_t = 0.1)]
    rho: f64,
    #[arg(long, default_value_t = 0.5)]
    kappa: f64,
    #[arg(long = "kappa-m", default_value_t = 0.5)]
    kappa_m: f64,
    #[arg(long, value_enum, default_value_t = NormArg::Linf)]
    norm: NormArg,
    #[arg(long = "tr-rule", value_enum, default_value_t = RuleArg::Classic)]
    tr_rule: RuleArg,
    #[arg(long = "delta-min", default_value_t = 1e-6)]
    delta_min: f64,
    #[arg(long = "delta-max", default_value_t = 1e3)]
    delta_max: f64,
    #[arg(long, value_enum, default_value_t = Switch::Off)]
    refine: Switch,
    #[arg(long = "max-iter", default_value_t = 1000)]
    max_iter: usize,
    #[arg(long = "max-backtracks", default_value_t = 60)]
    max_backtracks: usize,
    /// Trace CSV path (single run).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Summary JSON path (single run); printed to stdout either way.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Turbo trajectory CSV path (single run).
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Directory for per-seed traces and summaries when `--runs > 1`.
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BaselineArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long = "combo-limit", default_value_t = DEFAULT_COMBO_LIMIT)]
    combo_limit: usize,
    /// Refinement starts per feasible combination.
    #[arg(long, default_value_t = 10)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    /// Per-combination table as CSV.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Summary files; each holds one summary or an array of them.
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Process exit code for a solver status.
fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Critical => 0,
        SolveStatus::IterationLimit => 3,
        SolveStatus::BacktrackLimit => 4,
        SolveStatus::MilpSubproblemInfeasible => 5,
        SolveStatus::SubproblemFailure => 6,
        SolveStatus::NegativeCriticality => 7,
        SolveStatus::ObjectiveDiverging => 8,
        SolveStatus::InfeasibleSet => 9,
    }
}

struct Loaded {
    name: String,
    set: MixedIntegerPolyhedron,
    objective: SmoothObjective,
    initial_point: Option<Vec<f64>>,
    turbo: Option<TurboInstance>,
}

fn load(args: &ProblemArgs, seed: u64) -> Result<Loaded> {
    if let Some(path) = &args.file {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let p = load_problem(&text).with_context(|| format!("{}", path.display()))?;
        return Ok(Loaded {
            name: path.display().to_string(),
            set: p.set,
            objective: p.objective,
            initial_point: p.initial_point,
            turbo: None,
        });
    }
    match args.problem {
        None => bail!("give either --file or --problem"),
        Some(Builtin::Turbo) => {
            let inst = build_turbo(&TurboParams::with_intervals(args.n))?;
            Ok(Loaded {
                name: format!("turbo-n{}", args.n),
                set: inst.set.clone(),
                objective: inst.objective.clone(),
                initial_point: None,
                turbo: Some(inst),
            })
        }
        Some(Builtin::Random) => {
            let inst = random_instance(seed, args.n_real, args.n_int, args.rows)?;
            Ok(Loaded {
                name: format!("random-{}-{}-{}-s{seed}", args.n_real, args.n_int, args.rows),
                set: inst.set,
                objective: inst.objective,
                initial_point: None,
                turbo: None,
            })
        }
        Some(Builtin::Complementarity) => {
            let set = build_complementarity(args.bound)?;
            let g = &args.gradient;
            if g.len() != 3 {
                bail!("--gradient takes three comma-separated values, got {}", g.len());
            }
            let objective = smil::bench::linear_objective(&set, [g[0], g[1], g[2]])?;
            Ok(Loaded {
                name: "complementarity".into(),
                set,
                objective,
                initial_point: None,
                turbo: None,
            })
        }
    }
}

fn solver_config(a: &SolveArgs) -> Result<SolverConfig> {
    let tr_rule = match a.tr_rule {
        RuleArg::Classic => TrRule::Classic {
            rho1: a.rho,
            rho2: 2.0 * a.rho,
        },
        RuleArg::Reset => TrRule::Reset {
            delta_min: a.delta_min,
            delta_max: a.delta_max,
        },
    };
    let mut cfg = SolverConfig {
        eps: a.eps,
        delta0: a.delta0,
        rho: a.rho,
        kappa: a.kappa,
        kappa_m: a.kappa_m,
        norm: match a.norm {
            NormArg::Linf => NormKind::Linf,
            NormArg::L1 => NormKind::L1,
        },
        tr_rule,
        max_outer_iterations: a.max_iter,
        max_backtracks: a.max_backtracks,
        ..SolverConfig::default()
    };
    if let Switch::On = a.refine {
        cfg = cfg.with_refinement();
    }
    cfg.validate()?;
    Ok(cfg)
}

struct RunOutput {
    summary: Summary,
    trace: String,
    trajectory: Option<String>,
}

fn run_once(a: &SolveArgs, cfg: &SolverConfig, seed: u64) -> Result<RunOutput> {
    let p = load(&a.problem, seed)?;
    let x0 = match (&p.initial_point, &p.turbo) {
        (Some(x), _) => x.clone(),
        (None, Some(_)) => turbo_initial_guess(p.set.num_vars(), seed),
        (None, None) => vec![0.0; p.set.num_vars()],
    };
    let start = Instant::now();
    let result = solve(&p.set, &p.objective, &x0, cfg).with_context(|| format!("solving {} (seed {seed})", p.name))?;
    let runtime = start.elapsed().as_secs_f64();
    Ok(RunOutput {
        summary: Summary::new(p.name.clone(), Some(seed), &result, runtime),
        trace: trace_csv(&result),
        trajectory: p.turbo.as_ref().map(|t| trajectory_csv(&decode_trajectory(t, &result.x))),
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_solve(a: &SolveArgs) -> Result<u8> {
    let cfg = solver_config(a)?;
    if a.runs == 0 {
        bail!("--runs must be at least 1");
    }
    if a.runs == 1 {
        let out = run_once(a, &cfg, a.seed)?;
        if let Some(path) = &a.trace {
            write(path, &out.trace)?;
        }
        let text = serde_json::to_string_pretty(&out.summary)?;
        if let Some(path) = &a.summary {
            write(path, &text)?;
        }
        if let Some(path) = &a.trajectory {
            match &out.trajectory {
                Some(csv) => write(path, csv)?,
                None => bail!("--trajectory is only available for the turbo instance"),
            }
        }
        println!("{text}");
        return Ok(status_code(out.summary.status));
    }

    let seeds: Vec<u64> = (0..a.runs as u64).map(|i| a.seed + i).collect();
    let outputs: Vec<Result<RunOutput>> = seeds.par_iter().map(|&s| run_once(a, &cfg, s)).collect();
    let mut summaries = Vec::with_capacity(outputs.len());
    for (seed, out) in seeds.iter().zip(outputs) {
        let out = out?;
        if let Some(dir) = &a.out_dir {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write(&dir.join(format!("trace_seed{seed}.csv")), &out.trace)?;
            write(
                &dir.join(format!("summary_seed{seed}.json")),
                &serde_json::to_string_pretty(&out.summary)?,
            )?;
            if let Some(csv) = &out.trajectory {
                write(&dir.join(format!("trajectory_seed{seed}.csv")), csv)?;
            }
        }
        summaries.push(out.summary);
    }
    let text = serde_json::to_string_pretty(&summaries)?;
    if let Some(dir) = &a.out_dir {
        write(&dir.join("summaries.json"), &text)?;
    }
    println!("{text}");
    Ok(summaries
        .iter()
        .map(|s| status_code(s.status))
        .find(|&c| c != 0)
        .unwrap_or(0))
}

fn cmd_baseline(a: &BaselineArgs) -> Result<u8> {
    let p = load(&a.problem, a.seed)?;
    let cfg = RefineConfig {
        eps: a.eps,
        ..RefineConfig::default()
    };
    let start = Instant::now();
    let e = enumerate_minlp(&p.set, &p.objective, a.combo_limit, a.starts, &cfg, a.seed)?;
    let runtime = start.elapsed().as_secs_f64();
    if let Some(path) = &a.table {
        let mut csv = String::from("combo,feasible,best_f\n");
        for row in &e.table {
            let combo: Vec<String> = row.combo.iter().map(|v| format!("{}", *v as i64)).collect();
            let f = row.best_f.map(|f| format!("{f:?}")).unwrap_or_default();
            csv.push_str(&format!("{},{},{f}\n", combo.join(" "), u8::from(row.feasible)));
        }
        write(path, &csv)?;
    }
    let (best_x, best_f) = match &e.best {
        Some((x, f)) => (Some(x.clone()), Some(*f)),
        None => (None, None),
    };
    let out = json!({
        "problem": p.name,
        "combinations": e.table.len(),
        "feasible_combinations": e.feasible_combos,
        "starts_per_combination": a.starts,
        "best_objective": best_f,
        "best_x": best_x,
        "runtime_seconds": runtime,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn cmd_stats(a: &StatsArgs) -> Result<u8> {
    let mut all: Vec<Summary> = Vec::new();
    for path in &a.files {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("{}: invalid JSON", path.display()))?;
        if value.is_array() {
            let many: Vec<Summary> =
                serde_json::from_value(value).with_context(|| format!("{}: not a summary array", path.display()))?;
            all.extend(many);
        } else {
            all.push(serde_json::from_value(value).with_context(|| format!("{}: not a summary", path.display()))?);
        }
    }
    println!("{}", serde_json::to_string_pretty(&campaign_stats(&all))?);
    Ok(0)
}

fn cmd_export(a: &ExportArgs) -> Result<u8> {
    let p = load(&a.problem, a.seed)?;
    let initial = p
        .initial_point
        .or_else(|| p.turbo.as_ref().map(|_| turbo_initial_guess(p.set.num_vars(), a.seed)));
    let file = ProblemFile::export(&p.set, &p.objective, initial)?;
    let text = file.to_json_pretty();
    // Sanity check: the exported objective must parse back.
    Expression::parse(&file.objective.f1).context("exported objective does not parse")?;
    match &a.out {
        Some(path) => write(path, &text)?,
        None => println!("{text}"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
