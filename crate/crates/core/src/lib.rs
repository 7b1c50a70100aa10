//! Macro placement by wire-mask-guided greedy legalization.
//!
//! A candidate solution (genotype) is a flat vector of preferred macro
//! coordinates. [`evaluate`] legalizes it onto an m×m grid: macros are
//! ordered by connectivity, each one lands on the free anchor that adds the
//! least wirelength, breaking ties toward the genotype's preference. The
//! resulting placement is overlap-free by construction, and the summed
//! increments equal its half-perimeter wirelength. Black-box optimizers
//! ([`run_rs`], [`run_ea`], [`finetune`]) search the genotype space through
//! that mapping; [`local_search`] polishes a finished placement one macro at
//! a time. Designs enter and leave through Bookshelf files ([`parse_aux`],
//! [`read_placement`], [`write_placement`]), and placements are scored by
//! HPWL plus a routing-demand congestion map ([`congestion`], [`report`]).

mod bookshelf;
mod error;
mod eval;
mod grid;
mod metrics;
mod netlist;
mod optimize;
mod refine;
pub mod rng;

pub use bookshelf::{parse_aux, read_placement, write_placement, ParseOptions};
pub use error::{Error, Result};
pub use eval::{
    evaluate, evaluate_traced, hpwl_full, order_macros, wire_mask, EvalStep, EvalTrace, Genotype,
    MacroOrder, NetBox, NetBoxes, OrderingStrategy, Placement, WireMask,
};
pub use grid::{
    anchor_rect, default_partitions, footprint, partitions_override, valid_anchors, Field,
    GridRect, GridSpec, Occupancy, OverlapMode, PlacedRect, Rect,
};
pub use metrics::{congestion, report, CongestionMap, CongestionMode, MetricRecord};
pub use netlist::{CellKind, CellRecord, Net, NetSpan, Netlist, PinRef, SourcePosition};
pub use optimize::{
    drive, finetune, mutate, random_genotype, run_ea, run_rs, AskTell, Budget, LogEntry,
    MutationOp, OnePlusOneEa, RandomSearch, RunLog,
};
pub use refine::{local_search, local_search_traced, LocalSearchConfig, MoveRecord};
