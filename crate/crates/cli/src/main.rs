//! `macroplace`: legalize, search, refine, and render macro placements for
//! Bookshelf designs.
//!
//! Exit status: 0 on success with a feasible placement, 2 when the final
//! placement is infeasible (or the input cannot be legalized), 1 on errors.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use macroplace_core::{
    default_partitions, evaluate, finetune, local_search_traced, order_macros, parse_aux,
    read_placement, report, run_ea, run_rs, write_placement, Budget, Genotype, GridSpec,
    LocalSearchConfig, MacroOrder, MutationOp, Netlist, OrderingStrategy, OverlapMode,
    ParseOptions, Placement, RunLog,
};
use serde_json::{json, Value};

mod svg;

#[derive(Parser)]
#[command(
    name = "macroplace",
    version,
    about = "Grid-legalized macro placement: greedy wire-mask mapping driven by black-box search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a placement and write result.pl, runlog.jsonl, metrics.json, layout.svg
    Place(PlaceArgs),
    /// Legalize one placement file and print its metric record as JSON
    Evaluate(EvaluateArgs),
    /// Warm-start the evolutionary search from an existing placement
    Finetune(FinetuneArgs),
    /// Refine an existing placement with single-macro relocation passes
    Localsearch(LocalsearchArgs),
    /// Render a placement file to SVG
    Plot(PlotArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OptimizerKind {
    /// Independent random genotypes
    Rs,
    /// (1+1) evolutionary search
    Ea,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MutationKind {
    /// Exchange the coordinates of two macros
    Swap,
    /// Redraw one macro's coordinates uniformly
    Uniform,
    /// Fair coin between swap and uniform each step
    Mix,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderingKind {
    /// Decreasing total area of cells sharing a net with the macro
    ConnectedArea,
    /// Decreasing own area
    SizeOnly,
    /// Seeded uniform permutation
    Random,
}

impl From<MutationKind> for MutationOp {
    fn from(kind: MutationKind) -> MutationOp {
        match kind {
            MutationKind::Swap => MutationOp::Swap,
            MutationKind::Uniform => MutationOp::Uniform,
            MutationKind::Mix => MutationOp::Mix,
        }
    }
}

fn strategy_of(kind: OrderingKind, seed: u64) -> OrderingStrategy {
    match kind {
        OrderingKind::ConnectedArea => OrderingStrategy::ConnectedArea,
        OrderingKind::SizeOnly => OrderingStrategy::SizeOnly,
        OrderingKind::Random => OrderingStrategy::Random { seed },
    }
}

#[derive(Args)]
struct DesignArgs {
    /// Bookshelf .aux manifest of the design
    #[arg(long, value_name = "FILE")]
    aux: PathBuf,
    /// Grid cells per side (default: published table for known designs,
    /// otherwise sized so the median macro spans about one cell)
    #[arg(long)]
    partitions: Option<usize>,
    /// Keep pins on zero-area terminal pads as immovable pin sites
    #[arg(long)]
    include_fixed_pins: bool,
    /// Check overlap against exact macro rectangles instead of grid-cell footprints
    #[arg(long)]
    exact_overlap: bool,
}

#[derive(Args)]
struct MappingArgs {
    /// Macro visit order for the greedy mapping [default: connected-area]
    #[arg(long, value_enum)]
    ordering: Option<OrderingKind>,
    /// Master seed; every random stream derives from it [default: 0]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SearchArgs {
    /// Mutation operator for the evolutionary search [default: swap]
    #[arg(long, value_enum)]
    mutation: Option<MutationKind>,
    /// Random genotypes evaluated to pick the EA's initial parent [default: 100]
    #[arg(long)]
    init_samples: Option<u64>,
    /// Stop after this many evaluations
    #[arg(long)]
    max_evals: Option<u64>,
    /// Stop after this much wall time (suffix s, m, or h; bare number = seconds)
    #[arg(long, value_name = "TIME")]
    max_time: Option<String>,
    /// Concurrent evaluations; random search only [default: 1]
    #[arg(long, value_name = "N")]
    parallel_evals: Option<usize>,
    /// Refine the final placement with relocation passes
    #[arg(long)]
    post_ls: bool,
    /// Relocation passes used by --post-ls [default: 2]
    #[arg(long)]
    ls_passes: Option<usize>,
    /// key=value defaults file; explicit flags win
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory for the artifacts
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct PlaceArgs {
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    mapping: MappingArgs,
    /// Optimizer to run [default: ea]
    #[arg(long, value_enum)]
    optimizer: Option<OptimizerKind>,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    mapping: MappingArgs,
    /// Placement file to map through the greedy legalizer
    #[arg(long, value_name = "FILE")]
    pl: PathBuf,
}

#[derive(Args)]
struct FinetuneArgs {
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    mapping: MappingArgs,
    /// Starting placement to improve
    #[arg(long, value_name = "FILE")]
    pl: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct LocalsearchArgs {
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    mapping: MappingArgs,
    /// Placement file to refine
    #[arg(long, value_name = "FILE")]
    pl: PathBuf,
    /// Full sweeps over the macro order [default: 2]
    #[arg(long)]
    passes: Option<usize>,
    /// Output directory for the artifacts
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// Bookshelf .aux manifest of the design
    #[arg(long, value_name = "FILE")]
    aux: PathBuf,
    /// Placement file to draw (macros at their file coordinates, as-is)
    #[arg(long, value_name = "FILE")]
    pl: PathBuf,
    /// Output SVG path
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Draw the placement grid
    #[arg(long)]
    grid: bool,
    /// Grid cells per side when --grid is set (default: as in place)
    #[arg(long)]
    partitions: Option<usize>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Place(args) => cmd_place(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Finetune(args) => cmd_finetune(args),
        Command::Localsearch(args) => cmd_localsearch(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

// ---------------------------------------------------------------- config --

const CONFIG_KEYS: &[&str] = &[
    "optimizer",
    "mutation",
    "ordering",
    "seed",
    "init-samples",
    "max-evals",
    "max-time",
    "partitions",
    "post-ls",
    "parallel-evals",
    "ls-passes",
];

/// `key = value` lines; `#` comments and blank lines are skipped. Explicit
/// command-line flags take precedence over file values.
fn load_config(path: &Path) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let mut map = HashMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value, got '{line}'", path.display(), ln + 1);
        };
        let key = key.trim().to_string();
        if !CONFIG_KEYS.contains(&key.as_str()) {
            bail!(
                "{}:{}: unknown config key '{key}' (known: {})",
                path.display(),
                ln + 1,
                CONFIG_KEYS.join(", ")
            );
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Flag value, else parsed config value, else `default`.
fn pick<T>(
    flag: Option<T>,
    cfg: &HashMap<String, String>,
    key: &str,
    parse: impl FnOnce(&str) -> Result<T>,
    default: T,
) -> Result<T> {
    pick_opt(flag, cfg, key, parse).map(|v| v.unwrap_or(default))
}

fn pick_opt<T>(
    flag: Option<T>,
    cfg: &HashMap<String, String>,
    key: &str,
    parse: impl FnOnce(&str) -> Result<T>,
) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    cfg.get(key)
        .map(|s| parse(s).with_context(|| format!("config key '{key}'")))
        .transpose()
}

fn parse_u64(s: &str) -> Result<u64> {
    s.parse().with_context(|| format!("expected an integer, got '{s}'"))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse().with_context(|| format!("expected an integer, got '{s}'"))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => bail!("expected a boolean, got '{s}'"),
    }
}

fn parse_kind<T: ValueEnum + Clone>(s: &str) -> Result<T> {
    T::from_str(s, true).map_err(|e| anyhow::anyhow!("{e}"))
}

/// `90s`, `10m`, `2h`, or a bare number of seconds.
fn parse_duration_seconds(s: &str) -> Result<f64> {
    let t = s.trim();
    let (digits, scale) = match t.as_bytes().last() {
        Some(b's') => (&t[..t.len() - 1], 1.0),
        Some(b'm') => (&t[..t.len() - 1], 60.0),
        Some(b'h') => (&t[..t.len() - 1], 3600.0),
        _ => (t, 1.0),
    };
    let v: f64 = digits
        .trim()
        .parse()
        .with_context(|| format!("bad duration '{s}' (use e.g. 90s, 10m, 2h)"))?;
    ensure!(v.is_finite() && v > 0.0, "duration must be positive, got '{s}'");
    Ok(v * scale)
}

fn build_budget(max_evals: Option<u64>, max_time: Option<&str>) -> Result<Budget> {
    let budget = Budget {
        max_evaluations: max_evals,
        max_wall_seconds: max_time.map(parse_duration_seconds).transpose()?,
    };
    if budget.max_evaluations.is_none() && budget.max_wall_seconds.is_none() {
        bail!("set --max-evals and/or --max-time");
    }
    budget.validate()?;
    Ok(budget)
}

// -------------------------------------------------------------- pipeline --

struct Design {
    netlist: Netlist,
    grid: GridSpec,
    order: MacroOrder,
}

fn load_design(
    design: &DesignArgs,
    partitions: Option<usize>,
    strategy: OrderingStrategy,
) -> Result<Design> {
    let netlist = parse_aux(
        &design.aux,
        ParseOptions {
            include_fixed_pins: design.include_fixed_pins,
        },
    )?;
    let m = partitions.unwrap_or_else(|| default_partitions(&netlist));
    ensure!(m > 0, "partitions must be positive");
    let overlap = if design.exact_overlap {
        OverlapMode::Exact
    } else {
        OverlapMode::Conservative
    };
    let grid = GridSpec::new(&netlist, m).with_overlap(overlap);
    let order = order_macros(&netlist, strategy);
    Ok(Design { netlist, grid, order })
}

fn read_genotype(pl: &Path, netlist: &Netlist) -> Result<Genotype> {
    let (genotype, clamped) = read_placement(pl, netlist)?;
    if clamped > 0 {
        eprintln!("note: {clamped} coordinates clamped into the canvas");
    }
    Ok(genotype)
}

/// Write the artifact set. The run log (when given) is always written; the
/// placement-derived artifacts only exist for a feasible placement. Returns
/// whether the placement was feasible.
fn write_artifacts(
    out: &Path,
    design: &Design,
    placement: &Placement,
    log: Option<&RunLog>,
    seconds: f64,
) -> Result<bool> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    if let Some(log) = log {
        fs::write(out.join("runlog.jsonl"), log.to_jsonl())
            .with_context(|| format!("writing {}", out.join("runlog.jsonl").display()))?;
    }
    if !placement.feasible {
        return Ok(false);
    }
    write_placement(placement, &design.netlist, &out.join("result.pl"))?;
    let record = report(placement, &design.netlist, &design.grid, seconds)?;
    fs::write(
        out.join("metrics.json"),
        format!("{}\n", serde_json::to_string_pretty(&record)?),
    )?;
    fs::write(
        out.join("layout.svg"),
        svg::render(&design.netlist, &placement.positions, Some(&design.grid)),
    )?;
    Ok(true)
}

fn refine_in_place(
    placement: &mut Placement,
    design: &Design,
    seed: u64,
    passes: usize,
) -> Result<usize> {
    let mut config = LocalSearchConfig::new(design.order.clone(), seed);
    config.passes = passes;
    let (refined, moves) =
        local_search_traced(placement, &design.netlist, &design.grid, &mut config)?;
    *placement = refined;
    Ok(moves.len())
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

// -------------------------------------------------------------- commands --

fn cmd_place(args: PlaceArgs) -> Result<ExitCode> {
    let cfg = match &args.search.config {
        Some(path) => load_config(path)?,
        None => HashMap::new(),
    };
    let seed = pick(args.mapping.seed, &cfg, "seed", parse_u64, 0)?;
    let ordering = pick(
        args.mapping.ordering,
        &cfg,
        "ordering",
        parse_kind,
        OrderingKind::ConnectedArea,
    )?;
    let optimizer = pick(args.optimizer, &cfg, "optimizer", parse_kind, OptimizerKind::Ea)?;
    let mutation = pick(args.search.mutation, &cfg, "mutation", parse_kind, MutationKind::Swap)?;
    let init_samples = pick(args.search.init_samples, &cfg, "init-samples", parse_u64, 100)?;
    let parallel = pick(args.search.parallel_evals, &cfg, "parallel-evals", parse_usize, 1)?;
    let ls_passes = pick(args.search.ls_passes, &cfg, "ls-passes", parse_usize, 2)?;
    let post_ls = args.search.post_ls
        || pick_opt(None, &cfg, "post-ls", parse_bool)?.unwrap_or(false);
    let partitions = pick_opt(args.design.partitions, &cfg, "partitions", parse_usize)?;
    let max_evals = pick_opt(args.search.max_evals, &cfg, "max-evals", parse_u64)?;
    let max_time = pick_opt(args.search.max_time.clone(), &cfg, "max-time", |s| {
        Ok(s.to_string())
    })?;
    let budget = build_budget(max_evals, max_time.as_deref())?;

    ensure!(parallel >= 1, "--parallel-evals must be at least 1");
    if optimizer != OptimizerKind::Rs && parallel > 1 {
        bail!("--parallel-evals applies to the random-search optimizer only");
    }

    let design = load_design(&args.design, partitions, strategy_of(ordering, seed))?;
    let started = Instant::now();
    let log = match optimizer {
        OptimizerKind::Rs => {
            run_rs(&design.netlist, &design.grid, &design.order, &budget, seed, parallel)?
        }
        OptimizerKind::Ea => run_ea(
            &design.netlist,
            &design.grid,
            &design.order,
            &budget,
            seed,
            mutation.into(),
            init_samples,
        )?,
    };
    let mut placement = log.final_best.1.clone();
    let mut moves = 0;
    if post_ls && placement.feasible {
        moves = refine_in_place(&mut placement, &design, seed, ls_passes)?;
    }
    let seconds = started.elapsed().as_secs_f64();

    let out = &args.search.out;
    if write_artifacts(out, &design, &placement, Some(&log), seconds)? {
        let refined = if post_ls {
            format!(", {moves} relocation moves")
        } else {
            String::new()
        };
        println!(
            "feasible placement: hpwl {} after {} evaluations{refined}; artifacts in {}",
            placement.hpwl,
            log.evaluations,
            out.display()
        );
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "final best is infeasible after {} evaluations; wrote the run log only",
            log.evaluations
        );
        Ok(ExitCode::from(2))
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<ExitCode> {
    let seed = args.mapping.seed.unwrap_or(0);
    let ordering = args.mapping.ordering.unwrap_or(OrderingKind::ConnectedArea);
    let design = load_design(&args.design, args.design.partitions, strategy_of(ordering, seed))?;
    let genotype = read_genotype(&args.pl, &design.netlist)?;
    let started = Instant::now();
    let placement = evaluate(&genotype, &design.netlist, &design.grid, &design.order)?;
    let seconds = started.elapsed().as_secs_f64();
    if !placement.feasible {
        eprintln!(
            "the placement could not be legalized on the {0}x{0} grid",
            design.grid.m
        );
        return Ok(ExitCode::from(2));
    }
    let record = report(&placement, &design.netlist, &design.grid, seconds)?;
    println!("{}", serde_json::to_string(&record)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_finetune(args: FinetuneArgs) -> Result<ExitCode> {
    let cfg = match &args.search.config {
        Some(path) => load_config(path)?,
        None => HashMap::new(),
    };
    let seed = pick(args.mapping.seed, &cfg, "seed", parse_u64, 0)?;
    let ordering = pick(
        args.mapping.ordering,
        &cfg,
        "ordering",
        parse_kind,
        OrderingKind::ConnectedArea,
    )?;
    let mutation = pick(args.search.mutation, &cfg, "mutation", parse_kind, MutationKind::Swap)?;
    let ls_passes = pick(args.search.ls_passes, &cfg, "ls-passes", parse_usize, 2)?;
    let post_ls = args.search.post_ls
        || pick_opt(None, &cfg, "post-ls", parse_bool)?.unwrap_or(false);
    let partitions = pick_opt(args.design.partitions, &cfg, "partitions", parse_usize)?;
    let max_evals = pick_opt(args.search.max_evals, &cfg, "max-evals", parse_u64)?;
    let max_time = pick_opt(args.search.max_time.clone(), &cfg, "max-time", |s| {
        Ok(s.to_string())
    })?;
    let budget = build_budget(max_evals, max_time.as_deref())?;
    if let Some(n) = pick_opt(args.search.parallel_evals, &cfg, "parallel-evals", parse_usize)? {
        if n > 1 {
            bail!("--parallel-evals applies to the random-search optimizer only");
        }
    }

    let design = load_design(&args.design, partitions, strategy_of(ordering, seed))?;
    let genotype = read_genotype(&args.pl, &design.netlist)?;
    let before = evaluate(&genotype, &design.netlist, &design.grid, &design.order)?;

    let started = Instant::now();
    let log = finetune(
        &genotype,
        &design.netlist,
        &design.grid,
        &design.order,
        &budget,
        seed,
        mutation.into(),
    )?;
    let mut placement = log.final_best.1.clone();
    if post_ls && placement.feasible {
        refine_in_place(&mut placement, &design, seed, ls_passes)?;
    }
    let seconds = started.elapsed().as_secs_f64();

    let out = &args.search.out;
    let feasible = write_artifacts(out, &design, &placement, Some(&log), seconds)?;
    let ratio = if before.hpwl.is_finite() && placement.hpwl.is_finite() && before.hpwl > 0.0 {
        json!((before.hpwl - placement.hpwl) / before.hpwl)
    } else {
        Value::Null
    };
    let improvement = json!({
        "before": finite_or_null(before.hpwl),
        "after": finite_or_null(placement.hpwl),
        "ratio": ratio,
    });
    fs::write(
        out.join("improvement.json"),
        format!("{}\n", serde_json::to_string_pretty(&improvement)?),
    )?;

    if feasible {
        println!(
            "fine-tuned hpwl {} -> {} after {} evaluations; artifacts in {}",
            before.hpwl,
            placement.hpwl,
            log.evaluations,
            out.display()
        );
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "final best is infeasible after {} evaluations; wrote the run log only",
            log.evaluations
        );
        Ok(ExitCode::from(2))
    }
}

fn cmd_localsearch(args: LocalsearchArgs) -> Result<ExitCode> {
    let seed = args.mapping.seed.unwrap_or(0);
    let ordering = args.mapping.ordering.unwrap_or(OrderingKind::ConnectedArea);
    let passes = args.passes.unwrap_or(2);
    let design = load_design(&args.design, args.design.partitions, strategy_of(ordering, seed))?;
    let genotype = read_genotype(&args.pl, &design.netlist)?;

    let started = Instant::now();
    let start = evaluate(&genotype, &design.netlist, &design.grid, &design.order)?;
    if !start.feasible {
        eprintln!(
            "the placement could not be legalized on the {0}x{0} grid",
            design.grid.m
        );
        return Ok(ExitCode::from(2));
    }
    let mut placement = start.clone();
    let moves = refine_in_place(&mut placement, &design, seed, passes)?;
    let seconds = started.elapsed().as_secs_f64();

    write_artifacts(&args.out, &design, &placement, None, seconds)?;
    println!(
        "{moves} relocation moves over {passes} passes: hpwl {} -> {}; artifacts in {}",
        start.hpwl,
        placement.hpwl,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_plot(args: PlotArgs) -> Result<ExitCode> {
    let netlist = parse_aux(&args.aux, ParseOptions::default())?;
    let genotype = read_genotype(&args.pl, &netlist)?;
    let positions: Vec<(f64, f64)> = (0..netlist.k()).map(|mi| genotype.xy(mi)).collect();
    let grid_spec;
    let grid = if args.grid {
        let m = args.partitions.unwrap_or_else(|| default_partitions(&netlist));
        ensure!(m > 0, "partitions must be positive");
        grid_spec = GridSpec::new(&netlist, m);
        Some(&grid_spec)
    } else {
        None
    };
    fs::write(&args.out, svg::render(&netlist, &positions, grid))
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}
