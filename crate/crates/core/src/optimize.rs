//! Black-box optimizers over the genotype space: random search and a
//! (1+1) evolutionary algorithm, behind an ask/tell interface so further
//! optimizers can be plugged in without touching evaluation.
//!
//! Runs are bounded by evaluations and/or wall-clock time and produce a
//! [`RunLog`]: the best-so-far trajectory plus the final best genotype and
//! placement. Under a pure evaluation budget the log is fully deterministic
//! for a given seed — entries carry `t = 0.0` so reruns and different
//! evaluation-dispatch widths serialize byte-identically. Wall-clock-bounded
//! runs record real elapsed seconds and add a heartbeat entry every minute.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{evaluate, Genotype, MacroOrder, Placement};
use crate::grid::GridSpec;
use crate::netlist::Netlist;
use crate::rng::{fnv1a, substream};

/// Stop conditions; at least one must be set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub max_evaluations: Option<u64>,
    pub max_wall_seconds: Option<f64>,
}

impl Budget {
    pub fn evaluations(n: u64) -> Budget {
        Budget {
            max_evaluations: Some(n),
            max_wall_seconds: None,
        }
    }

    pub fn wall_seconds(s: f64) -> Budget {
        Budget {
            max_evaluations: None,
            max_wall_seconds: Some(s),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_evaluations.is_none() && self.max_wall_seconds.is_none() {
            return Err(Error::InvalidBudget(
                "set max_evaluations and/or max_wall_seconds".into(),
            ));
        }
        if self.max_evaluations == Some(0) {
            return Err(Error::InvalidBudget("max_evaluations must be positive".into()));
        }
        if let Some(s) = self.max_wall_seconds {
            if !s.is_finite() || s <= 0.0 {
                return Err(Error::InvalidBudget(format!(
                    "max_wall_seconds must be a positive real, got {s}"
                )));
            }
        }
        Ok(())
    }

    fn wall_mode(&self) -> bool {
        self.max_wall_seconds.is_some()
    }
}

/// One point on the best-so-far trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogEntry {
    pub eval: u64,
    pub t: f64,
    pub best_hpwl: f64,
}

/// Trajectory and outcome of one seeded optimizer run.
#[derive(Debug, Clone)]
pub struct RunLog {
    pub entries: Vec<LogEntry>,
    pub seed: u64,
    pub optimizer: String,
    /// Evaluations actually performed (≥ entries; only improvements and
    /// heartbeats are logged).
    pub evaluations: u64,
    /// Hash of the effective run configuration, for the serialized footer.
    pub config_hash: u64,
    pub final_best: (Genotype, Placement),
}

impl RunLog {
    /// One JSON object per line: every entry, then a footer identifying the
    /// run. Byte-stable for a given log.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            out.push_str(&serde_json::to_string(entry).expect("plain numeric record"));
            out.push('\n');
        }
        out.push_str(&format!(
            "{{\"seed\":{},\"optimizer\":{:?},\"config_hash\":\"{:016x}\"}}\n",
            self.seed, self.optimizer, self.config_hash
        ));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationOp {
    /// Exchange the coordinate pairs of two distinct macros.
    Swap,
    /// Redraw one macro's coordinate pair uniformly over the canvas.
    Uniform,
    /// Fair coin between the two above, per call.
    Mix,
}

/// Uniform sample over the canvas, one coordinate pair per macro.
pub fn random_genotype(netlist: &Netlist, rng: &mut ChaCha8Rng) -> Genotype {
    let mut coords = Vec::with_capacity(2 * netlist.k());
    for _ in 0..netlist.k() {
        coords.push(sample_axis(netlist.canvas_width, rng));
        coords.push(sample_axis(netlist.canvas_height, rng));
    }
    Genotype::new(coords)
}

fn sample_axis(extent: f64, rng: &mut ChaCha8Rng) -> f64 {
    if extent > 0.0 {
        rng.random_range(0.0..=extent)
    } else {
        0.0
    }
}

/// Derive a child genotype; the parent is left untouched.
pub fn mutate(
    parent: &Genotype,
    op: MutationOp,
    netlist: &Netlist,
    rng: &mut ChaCha8Rng,
) -> Result<Genotype> {
    let k = parent.k();
    match op {
        MutationOp::Swap => {
            if k < 2 {
                return Err(Error::MutationArity {
                    op: "swap",
                    needed: 2,
                    got: k,
                });
            }
            let a = rng.random_range(0..k);
            let mut b = rng.random_range(0..k - 1);
            if b >= a {
                b += 1;
            }
            let mut child = parent.clone();
            let (ax, ay) = parent.xy(a);
            let (bx, by) = parent.xy(b);
            child.set_xy(a, bx, by);
            child.set_xy(b, ax, ay);
            Ok(child)
        }
        MutationOp::Uniform => {
            if k == 0 {
                return Err(Error::MutationArity {
                    op: "uniform",
                    needed: 1,
                    got: 0,
                });
            }
            let i = rng.random_range(0..k);
            let mut child = parent.clone();
            let x = sample_axis(netlist.canvas_width, rng);
            let y = sample_axis(netlist.canvas_height, rng);
            child.set_xy(i, x, y);
            Ok(child)
        }
        MutationOp::Mix => {
            let swap = rng.random::<bool>();
            mutate(
                parent,
                if swap {
                    MutationOp::Swap
                } else {
                    MutationOp::Uniform
                },
                netlist,
                rng,
            )
        }
    }
}

/// Ask/tell candidate source: `ask` proposes the next genotype, `tell`
/// reports its fitness back. The runner owns budgeting, evaluation, and
/// best-so-far tracking.
pub trait AskTell {
    fn ask(&mut self) -> Genotype;
    fn tell(&mut self, genotype: &Genotype, hpwl: f64);
    /// Whether several `ask` calls may be issued before their `tell`s
    /// (enables concurrent evaluation of a batch). Only stateless proposers
    /// such as random search should say yes.
    fn speculative_ask(&self) -> bool {
        false
    }
}

/// Random search: independent uniform samples, no feedback.
pub struct RandomSearch<'a> {
    netlist: &'a Netlist,
    rng: ChaCha8Rng,
}

impl AskTell for RandomSearch<'_> {
    fn ask(&mut self) -> Genotype {
        random_genotype(self.netlist, &mut self.rng)
    }

    fn tell(&mut self, _genotype: &Genotype, _hpwl: f64) {}

    fn speculative_ask(&self) -> bool {
        true
    }
}

/// (1+1)-EA: one parent, mutated each step; the child replaces the parent
/// when its fitness is no worse. Starts either from the best of
/// `init_remaining` random samples or from a seeded genotype.
pub struct OnePlusOneEa<'a> {
    netlist: &'a Netlist,
    rng: ChaCha8Rng,
    op: MutationOp,
    init_remaining: u64,
    seeded: Option<Genotype>,
    parent: Option<(Genotype, f64)>,
}

impl AskTell for OnePlusOneEa<'_> {
    fn ask(&mut self) -> Genotype {
        if let Some(g) = self.seeded.take() {
            return g;
        }
        if self.init_remaining > 0 {
            return random_genotype(self.netlist, &mut self.rng);
        }
        let (parent, _) = self
            .parent
            .as_ref()
            .expect("tell precedes mutation asks");
        mutate(parent, self.op, self.netlist, &mut self.rng)
            .expect("mutation arity checked at construction")
    }

    fn tell(&mut self, genotype: &Genotype, hpwl: f64) {
        if self.init_remaining > 0 {
            self.init_remaining -= 1;
            // Keep the best initialization sample; first one wins ties.
            if self.parent.as_ref().is_none_or(|&(_, ph)| hpwl < ph) {
                self.parent = Some((genotype.clone(), hpwl));
            }
        } else if self.parent.as_ref().is_none_or(|&(_, ph)| hpwl <= ph) {
            // ≤ acceptance: equal-fitness children replace the parent, so
            // the chain can drift across plateaus. An infeasible child
            // (infinite HPWL) never displaces a feasible parent.
            self.parent = Some((genotype.clone(), hpwl));
        }
    }
}

const HEARTBEAT_SECONDS: f64 = 60.0;

/// Best-so-far bookkeeping and log emission. In wall-clock mode `t` is real
/// elapsed seconds and quiet stretches get heartbeat entries; otherwise `t`
/// stays 0.0 so equal runs log identically.
struct Recorder {
    entries: Vec<LogEntry>,
    wall_mode: bool,
    started: Instant,
    best: f64,
    last_logged_t: f64,
}

impl Recorder {
    fn new(wall_mode: bool) -> Recorder {
        Recorder {
            entries: Vec::new(),
            wall_mode,
            started: Instant::now(),
            best: f64::INFINITY,
            last_logged_t: 0.0,
        }
    }

    fn elapsed(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }

    fn now(&self) -> f64 {
        if self.wall_mode {
            self.elapsed()
        } else {
            0.0
        }
    }

    fn observe(&mut self, eval: u64, hpwl: f64) {
        self.observe_at(eval, self.now(), hpwl);
    }

    fn observe_at(&mut self, eval: u64, t: f64, hpwl: f64) {
        if hpwl < self.best {
            self.best = hpwl;
            self.entries.push(LogEntry {
                eval,
                t,
                best_hpwl: hpwl,
            });
            self.last_logged_t = t;
        } else if self.wall_mode && t - self.last_logged_t >= HEARTBEAT_SECONDS {
            self.entries.push(LogEntry {
                eval,
                t,
                best_hpwl: self.best,
            });
            self.last_logged_t = t;
        }
    }

    /// Terminal entry, unless the last evaluation is already logged or
    /// nothing feasible was ever seen.
    fn finish(&mut self, evals: u64) {
        if !self.best.is_finite() {
            return;
        }
        if self.entries.last().is_some_and(|e| e.eval == evals) {
            return;
        }
        self.entries.push(LogEntry {
            eval: evals,
            t: self.now(),
            best_hpwl: self.best,
        });
    }
}

// The evaluation-dispatch width is deliberately not part of the hash: under
// an evaluation budget the run is width-independent, and the serialized log
// must be too.
fn config_hash(
    name: &str,
    seed: u64,
    budget: &Budget,
    grid: &GridSpec,
    order: &MacroOrder,
    extra: &str,
) -> u64 {
    let evals = budget
        .max_evaluations
        .map_or_else(|| "none".to_string(), |v| v.to_string());
    let wall = budget
        .max_wall_seconds
        .map_or_else(|| "none".to_string(), |v| v.to_string());
    let canonical = format!(
        "optimizer={name};seed={seed};max_evals={evals};max_wall={wall};m={};overlap={:?};ordering={:?};{extra}",
        grid.m, grid.overlap, order.strategy,
    );
    fnv1a(canonical.as_bytes())
}

/// Evaluations still allowed right now; 0 means stop. The first evaluation
/// always runs so every run yields a result; afterwards wall time is checked
/// before each dispatch (in-flight evaluations complete).
fn batch_allowance(budget: &Budget, evals_done: u64, width: usize, elapsed: f64) -> usize {
    if evals_done > 0 {
        if let Some(s) = budget.max_wall_seconds {
            if elapsed >= s {
                return 0;
            }
        }
    }
    let mut n = width;
    if let Some(me) = budget.max_evaluations {
        if evals_done >= me {
            return 0;
        }
        n = n.min((me - evals_done) as usize);
    }
    n
}

/// Drive an ask/tell optimizer to its budget. `width` > 1 evaluates batches
/// of speculative asks concurrently; results are folded back in submission
/// order, so the outcome matches a sequential run over the same genotypes.
#[allow(clippy::too_many_arguments)]
pub fn drive(
    optimizer: &mut dyn AskTell,
    name: &str,
    netlist: &Netlist,
    grid: &GridSpec,
    order: &MacroOrder,
    budget: &Budget,
    seed: u64,
    width: usize,
    config_extra: &str,
) -> Result<RunLog> {
    budget.validate()?;
    let width = if optimizer.speculative_ask() {
        width.max(1)
    } else {
        1
    };
    let mut recorder = Recorder::new(budget.wall_mode());
    let mut evals: u64 = 0;
    let mut best: Option<(Genotype, Placement)> = None;

    loop {
        let batch = batch_allowance(budget, evals, width, recorder.elapsed());
        if batch == 0 {
            break;
        }
        let genotypes: Vec<Genotype> = (0..batch).map(|_| optimizer.ask()).collect();
        let placements: Vec<Placement> = if batch > 1 {
            genotypes
                .par_iter()
                .map(|g| evaluate(g, netlist, grid, order))
                .collect::<Result<_>>()?
        } else {
            genotypes
                .iter()
                .map(|g| evaluate(g, netlist, grid, order))
                .collect::<Result<_>>()?
        };
        for (genotype, placement) in genotypes.iter().zip(placements) {
            evals += 1;
            recorder.observe(evals, placement.hpwl);
            if best
                .as_ref()
                .is_none_or(|(_, bp)| placement.hpwl < bp.hpwl)
            {
                best = Some((genotype.clone(), placement.clone()));
            }
            optimizer.tell(genotype, placement.hpwl);
        }
    }

    recorder.finish(evals);
    Ok(RunLog {
        entries: recorder.entries,
        seed,
        optimizer: name.to_string(),
        evaluations: evals,
        config_hash: config_hash(name, seed, budget, grid, order, config_extra),
        final_best: best.expect("at least one evaluation always runs"),
    })
}

/// Random search to the budget, dispatching up to `parallel` evaluations at
/// a time.
pub fn run_rs(
    netlist: &Netlist,
    grid: &GridSpec,
    order: &MacroOrder,
    budget: &Budget,
    seed: u64,
    parallel: usize,
) -> Result<RunLog> {
    let mut opt = RandomSearch {
        netlist,
        rng: substream(seed, "rs"),
    };
    drive(
        &mut opt, "rs", netlist, grid, order, budget, seed, parallel, "",
    )
}

fn check_arity(op: MutationOp, k: usize) -> Result<()> {
    if matches!(op, MutationOp::Swap | MutationOp::Mix) && k < 2 {
        return Err(Error::MutationArity {
            op: if op == MutationOp::Swap { "swap" } else { "mix" },
            needed: 2,
            got: k,
        });
    }
    Ok(())
}

/// (1+1)-EA to the budget: best of `init_samples` random genotypes, then
/// mutate-and-select. Initialization evaluations count against the budget.
pub fn run_ea(
    netlist: &Netlist,
    grid: &GridSpec,
    order: &MacroOrder,
    budget: &Budget,
    seed: u64,
    op: MutationOp,
    init_samples: u64,
) -> Result<RunLog> {
    if init_samples == 0 {
        return Err(Error::InvalidBudget("init_samples must be positive".into()));
    }
    if let Some(me) = budget.max_evaluations {
        if me < init_samples {
            return Err(Error::InvalidBudget(format!(
                "evaluation budget {me} cannot cover {init_samples} initialization samples"
            )));
        }
    }
    check_arity(op, netlist.k())?;
    let mut opt = OnePlusOneEa {
        netlist,
        rng: substream(seed, "ea"),
        op,
        init_remaining: init_samples,
        seeded: None,
        parent: None,
    };
    let extra = format!("mutation={op:?};init_samples={init_samples}");
    drive(&mut opt, "ea", netlist, grid, order, budget, seed, 1, &extra)
}

/// (1+1)-EA warm-started from an existing genotype, which is evaluated once
/// as the initial parent (no random initialization phase).
pub fn finetune(
    initial: &Genotype,
    netlist: &Netlist,
    grid: &GridSpec,
    order: &MacroOrder,
    budget: &Budget,
    seed: u64,
    op: MutationOp,
) -> Result<RunLog> {
    if initial.coords.len() != 2 * netlist.k() {
        return Err(Error::GenotypeLength {
            expected: 2 * netlist.k(),
            got: initial.coords.len(),
        });
    }
    check_arity(op, netlist.k())?;
    let mut opt = OnePlusOneEa {
        netlist,
        rng: substream(seed, "finetune"),
        op,
        init_remaining: 0,
        seeded: Some(initial.clone()),
        parent: None,
    };
    let extra = format!("mutation={op:?};seeded=true");
    drive(
        &mut opt, "finetune", netlist, grid, order, budget, seed, 1, &extra,
    )
}
