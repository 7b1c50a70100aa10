//! Post-placement local search: sequential single-macro best-improvement
//! passes. Each macro in turn is lifted off the grid and dropped on the
//! anchor that lowers the total HPWL the most, with every other macro fixed
//! where it currently stands — in contrast to greedy construction, which
//! conditions each macro only on those placed before it.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::{hpwl_full, mask_profiles, MacroOrder, NetBoxes, Placement};
use crate::grid::{valid_anchors, GridSpec, Occupancy};
use crate::netlist::Netlist;
use crate::rng::substream;

#[derive(Debug, Clone)]
pub struct LocalSearchConfig {
    /// Full sweeps over the macro order.
    pub passes: usize,
    pub order: MacroOrder,
    pub rng: ChaCha8Rng,
}

impl LocalSearchConfig {
    pub fn new(order: MacroOrder, seed: u64) -> LocalSearchConfig {
        LocalSearchConfig {
            passes: 2,
            order,
            rng: substream(seed, "local-search"),
        }
    }
}

/// One applied relocation, for inspection by tests and tools.
#[derive(Debug, Clone, Copy)]
pub struct MoveRecord {
    pub pass: usize,
    pub macro_index: usize,
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub hpwl_before: f64,
    pub hpwl_after: f64,
}

/// Refine a feasible placement; returns the result and the moves applied.
///
/// Per macro: its own footprint is vacated first (so it may shift by less
/// than its own width), all valid anchors are scored by exact HPWL delta
/// against the other macros' current positions, and the macro moves only if
/// the best anchor strictly improves — ties among equally best improving
/// anchors are broken uniformly at random. Staying put is always allowed,
/// so the HPWL never increases and repeated passes terminate.
pub fn local_search_traced(
    placement: &Placement,
    netlist: &Netlist,
    grid: &GridSpec,
    config: &mut LocalSearchConfig,
) -> Result<(Placement, Vec<MoveRecord>)> {
    if !placement.feasible {
        return Err(Error::Infeasible("local search needs a feasible placement".into()));
    }
    if config.passes == 0 {
        return Err(Error::InvalidBudget("local search needs at least one pass".into()));
    }
    let mut anchors = placement.anchors.clone();
    let mut positions = placement.positions.clone();
    let mut hpwl = placement.hpwl;
    let mut moves = Vec::new();

    let mut occupancy = Occupancy::new(grid.m);
    for (mi, &anchor) in anchors.iter().enumerate() {
        occupancy.commit(grid, netlist.macro_cell(mi), mi, anchor)?;
    }

    for pass in 0..config.passes {
        for &mi in &config.order.sequence {
            occupancy.vacate(grid, mi)?;

            // Net boxes over everything except the moving macro.
            let mut boxes = NetBoxes::new(netlist);
            for (other, &(x, y)) in positions.iter().enumerate() {
                if other != mi {
                    boxes.insert_macro(netlist, other, x, y);
                }
            }
            let (cx, cy) = mask_profiles(netlist, mi, &boxes, grid);
            let valid = valid_anchors(netlist.macro_cell(mi), &occupancy, grid);

            let (ci, cj) = anchors[mi];
            let current_delta = cx[ci] + cy[cj];
            let mut best_delta = f64::INFINITY;
            for (j, &cyj) in cy.iter().enumerate() {
                for (i, &cxi) in cx.iter().enumerate() {
                    if valid.at(i, j) {
                        let d = cxi + cyj;
                        if d < best_delta {
                            best_delta = d;
                        }
                    }
                }
            }

            // Strict improvement only; equal-best anchors elsewhere lose to
            // staying put, which guarantees termination.
            let target = if best_delta < current_delta {
                let mut ties = Vec::new();
                for (j, &cyj) in cy.iter().enumerate() {
                    for (i, &cxi) in cx.iter().enumerate() {
                        if valid.at(i, j) && cxi + cyj == best_delta {
                            ties.push((i, j));
                        }
                    }
                }
                ties[config.rng.random_range(0..ties.len())]
            } else {
                (ci, cj)
            };

            occupancy.commit(grid, netlist.macro_cell(mi), mi, target)?;
            if target != (ci, cj) {
                let before = hpwl;
                hpwl = hpwl - current_delta + best_delta;
                anchors[mi] = target;
                positions[mi] = grid.anchor_position(target.0, target.1);
                moves.push(MoveRecord {
                    pass,
                    macro_index: mi,
                    from: (ci, cj),
                    to: target,
                    hpwl_before: before,
                    hpwl_after: hpwl,
                });
            }
        }
    }

    debug_assert!(
        {
            let full = hpwl_full(&positions, netlist);
            (hpwl - full).abs() <= 1e-6 * full.abs().max(1.0)
        },
        "tracked HPWL drifted from the closed form"
    );

    Ok((
        Placement {
            anchors,
            positions,
            hpwl,
            feasible: true,
        },
        moves,
    ))
}

/// [`local_search_traced`] without the move records.
pub fn local_search(
    placement: &Placement,
    netlist: &Netlist,
    grid: &GridSpec,
    config: &mut LocalSearchConfig,
) -> Result<Placement> {
    local_search_traced(placement, netlist, grid, config).map(|(p, _)| p)
}
