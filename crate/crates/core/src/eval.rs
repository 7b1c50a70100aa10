//! Genotype-to-placement mapping.
//!
//! A genotype is a flat vector of continuous bottom-left coordinates, two
//! per macro. Mapping it to a placement is greedy: macros are visited in a
//! fixed order, and each one goes to the grid anchor with the smallest
//! half-perimeter wirelength (HPWL) increment given the macros committed so
//! far, breaking ties toward the genotype's coordinate. The sum of the
//! per-step increments telescopes to the placement's total HPWL.
//!
//! Per-net increment costs are separable: expanding a bounding box
//! `[lx, hx] x [ly, hy]` to absorb a macro whose pins on that net span
//! `[x+dx_min, x+dx_max] x [y+dy_min, y+dy_max]` costs
//! `max(0, lx-(x+dx_min)) + max(0, (x+dx_max)-hx)` in x plus the analogous
//! term in y. Summing over nets gives two per-axis profiles whose outer sum
//! is the full mask, so a mask costs O(nets * m) instead of O(nets * m^2).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{valid_anchors, Field, GridSpec, Occupancy};
use crate::netlist::Netlist;

/// Flat candidate solution: `coords[2m]`, `coords[2m+1]` are macro `m`'s
/// preferred bottom-left corner.
#[derive(Debug, Clone, PartialEq)]
pub struct Genotype {
    pub coords: Vec<f64>,
}

impl Genotype {
    pub fn new(coords: Vec<f64>) -> Genotype {
        Genotype { coords }
    }

    pub fn k(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn xy(&self, m: usize) -> (f64, f64) {
        (self.coords[2 * m], self.coords[2 * m + 1])
    }

    pub fn set_xy(&mut self, m: usize, x: f64, y: f64) {
        self.coords[2 * m] = x;
        self.coords[2 * m + 1] = y;
    }
}

/// How the greedy pass orders macros.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingStrategy {
    /// Decreasing total area of the distinct cells sharing a net with the
    /// macro (itself included); the default.
    ConnectedArea,
    /// Decreasing own area.
    SizeOnly,
    /// Seeded uniform permutation.
    Random { seed: u64 },
}

/// A visit order over macro indices.
#[derive(Debug, Clone)]
pub struct MacroOrder {
    pub sequence: Vec<usize>,
    pub strategy: OrderingStrategy,
}

/// Compute the macro visit order for `strategy`. Deterministic: area ties
/// break toward the smaller macro index, and `Random` carries its own seed.
pub fn order_macros(netlist: &Netlist, strategy: OrderingStrategy) -> MacroOrder {
    let k = netlist.k();
    let mut sequence: Vec<usize> = (0..k).collect();
    match strategy {
        OrderingStrategy::ConnectedArea => {
            // Stamp array gives the distinct-cell union in O(sum of degrees).
            let mut stamp = vec![usize::MAX; netlist.cells.len()];
            let keys: Vec<f64> = (0..k)
                .map(|mi| {
                    let mut key = 0.0;
                    for span in netlist.macro_spans(mi) {
                        for pin in &netlist.nets[span.net].pins {
                            if stamp[pin.cell] != mi {
                                stamp[pin.cell] = mi;
                                key += netlist.cells[pin.cell].area();
                            }
                        }
                    }
                    key
                })
                .collect();
            sequence.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]).then(a.cmp(&b)));
        }
        OrderingStrategy::SizeOnly => {
            let keys: Vec<f64> = (0..k).map(|mi| netlist.macro_cell(mi).area()).collect();
            sequence.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]).then(a.cmp(&b)));
        }
        OrderingStrategy::Random { seed } => {
            sequence.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
    }
    MacroOrder { sequence, strategy }
}

/// Bounding box of the pins a net has accumulated so far. Empty until the
/// first pin lands.
#[derive(Debug, Clone, Copy)]
pub struct NetBox {
    pub lx: f64,
    pub hx: f64,
    pub ly: f64,
    pub hy: f64,
}

impl NetBox {
    pub const EMPTY: NetBox = NetBox {
        lx: f64::INFINITY,
        hx: f64::NEG_INFINITY,
        ly: f64::INFINITY,
        hy: f64::NEG_INFINITY,
    };

    pub fn is_empty(&self) -> bool {
        self.lx > self.hx
    }

    pub fn half_perimeter(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            (self.hx - self.lx) + (self.hy - self.ly)
        }
    }

    fn absorb(&mut self, lx: f64, hx: f64, ly: f64, hy: f64) {
        self.lx = self.lx.min(lx);
        self.hx = self.hx.max(hx);
        self.ly = self.ly.min(ly);
        self.hy = self.hy.max(hy);
    }
}

/// Per-net bounding boxes over the macros placed so far (plus any fixed
/// pins). This is the state a wire mask is conditioned on.
#[derive(Debug, Clone)]
pub struct NetBoxes {
    boxes: Vec<NetBox>,
}

impl NetBoxes {
    /// Fresh state: every box empty except those seeded by fixed pins.
    pub fn new(netlist: &Netlist) -> NetBoxes {
        let mut boxes = vec![NetBox::EMPTY; netlist.nets.len()];
        for (ni, net) in netlist.nets.iter().enumerate() {
            for &(x, y) in &net.fixed_pins {
                boxes[ni].absorb(x, x, y, y);
            }
        }
        NetBoxes { boxes }
    }

    pub fn get(&self, net: usize) -> NetBox {
        self.boxes[net]
    }

    /// Grow the boxes of every net that macro `mi` pins, with the macro's
    /// bottom-left corner at `(x, y)`.
    pub fn insert_macro(&mut self, netlist: &Netlist, mi: usize, x: f64, y: f64) {
        for span in netlist.macro_spans(mi) {
            self.boxes[span.net].absorb(
                x + span.dx_min,
                x + span.dx_max,
                y + span.dy_min,
                y + span.dy_max,
            );
        }
    }

    /// Sum of half-perimeters over all nets.
    pub fn total_half_perimeter(&self) -> f64 {
        self.boxes.iter().map(NetBox::half_perimeter).sum()
    }
}

/// HPWL increments of placing one macro at every grid anchor, with validity.
#[derive(Debug, Clone)]
pub struct WireMask {
    /// Increment at each anchor; meaningful wherever `valid` holds.
    pub delta: Field<f64>,
    /// Anchors that are in bounds and conflict-free. All-false means the
    /// macro no longer fits anywhere.
    pub valid: Field<bool>,
}

/// Per-axis increment profiles for macro `mi` against the current boxes:
/// the mask value at anchor `(i, j)` is `cx[i] + cy[j]`.
pub(crate) fn mask_profiles(
    netlist: &Netlist,
    mi: usize,
    boxes: &NetBoxes,
    grid: &GridSpec,
) -> (Vec<f64>, Vec<f64>) {
    let m = grid.m;
    let mut cx = vec![0.0; m];
    let mut cy = vec![0.0; m];
    // A net with no pins yet charges the macro's own pin spread wherever it
    // goes; fold those constants in once.
    let mut const_x = 0.0;
    let mut const_y = 0.0;
    for span in netlist.macro_spans(mi) {
        let b = boxes.get(span.net);
        if b.is_empty() {
            const_x += span.dx_max - span.dx_min;
            const_y += span.dy_max - span.dy_min;
            continue;
        }
        for (i, v) in cx.iter_mut().enumerate() {
            let x = i as f64 * grid.cell_w;
            *v += (b.lx - (x + span.dx_min)).max(0.0) + ((x + span.dx_max) - b.hx).max(0.0);
        }
        for (j, v) in cy.iter_mut().enumerate() {
            let y = j as f64 * grid.cell_h;
            *v += (b.ly - (y + span.dy_min)).max(0.0) + ((y + span.dy_max) - b.hy).max(0.0);
        }
    }
    if const_x != 0.0 || const_y != 0.0 {
        for v in &mut cx {
            *v += const_x;
        }
        for v in &mut cy {
            *v += const_y;
        }
    }
    (cx, cy)
}

/// The wire mask of macro `mi` against the current partial placement.
pub fn wire_mask(
    netlist: &Netlist,
    mi: usize,
    boxes: &NetBoxes,
    occupancy: &Occupancy,
    grid: &GridSpec,
) -> WireMask {
    let (cx, cy) = mask_profiles(netlist, mi, boxes, grid);
    let valid = valid_anchors(netlist.macro_cell(mi), occupancy, grid);
    let mut delta = Field::fill(grid.m, 0.0);
    for (j, &cyj) in cy.iter().enumerate() {
        for (i, &cxi) in cx.iter().enumerate() {
            delta.set(i, j, cxi + cyj);
        }
    }
    WireMask { delta, valid }
}

/// Pick the valid anchor with the smallest increment; among equal increments
/// the one whose bottom-left corner is Euclidean-closest to `(gx, gy)`, and
/// among equal distances the lexicographically smallest `(row, column)`.
fn best_anchor(
    cx: &[f64],
    cy: &[f64],
    valid: &Field<bool>,
    grid: &GridSpec,
    gx: f64,
    gy: f64,
) -> Option<((usize, usize), f64)> {
    let mut best: Option<((usize, usize), f64, f64)> = None;
    for (j, &cyj) in cy.iter().enumerate() {
        let y = j as f64 * grid.cell_h;
        for (i, &cxi) in cx.iter().enumerate() {
            if !valid.at(i, j) {
                continue;
            }
            let delta = cxi + cyj;
            if let Some((_, bd, _)) = best {
                if delta > bd {
                    continue;
                }
            }
            let x = i as f64 * grid.cell_w;
            let d2 = (x - gx) * (x - gx) + (y - gy) * (y - gy);
            // Scanning runs in ascending (row, column), so strict-less
            // replacement leaves the lexicographically first of any residual
            // ties in place.
            let replace = match best {
                None => true,
                Some((_, bd, bd2)) => delta < bd || (delta == bd && d2 < bd2),
            };
            if replace {
                best = Some(((i, j), delta, d2));
            }
        }
    }
    best.map(|(anchor, delta, _)| (anchor, delta))
}

/// A legalized placement: one grid anchor and bottom-left position per
/// macro, with the accumulated HPWL. `feasible` is false when some macro had
/// no valid anchor left; then `hpwl` is infinite and the vectors are empty.
#[derive(Debug, Clone)]
pub struct Placement {
    pub anchors: Vec<(usize, usize)>,
    pub positions: Vec<(f64, f64)>,
    pub hpwl: f64,
    pub feasible: bool,
}

impl Placement {
    pub fn infeasible() -> Placement {
        Placement {
            anchors: Vec::new(),
            positions: Vec::new(),
            hpwl: f64::INFINITY,
            feasible: false,
        }
    }
}

/// One greedy step, for inspection by tests and tools.
#[derive(Debug, Clone, Copy)]
pub struct EvalStep {
    pub macro_index: usize,
    pub anchor: (usize, usize),
    pub increment: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EvalTrace {
    pub steps: Vec<EvalStep>,
}

/// Map a genotype to a placement, also returning the per-step trace.
pub fn evaluate_traced(
    genotype: &Genotype,
    netlist: &Netlist,
    grid: &GridSpec,
    order: &MacroOrder,
) -> Result<(Placement, EvalTrace)> {
    let k = netlist.k();
    if genotype.coords.len() != 2 * k {
        return Err(Error::GenotypeLength {
            expected: 2 * k,
            got: genotype.coords.len(),
        });
    }

    let mut occupancy = Occupancy::new(grid.m);
    let mut boxes = NetBoxes::new(netlist);
    // With fixed pins the boxes start non-empty; seeding the accumulator
    // with their half-perimeters keeps the telescoping sum equal to the full
    // HPWL.
    let mut hpwl = boxes.total_half_perimeter();
    let mut anchors = vec![(0usize, 0usize); k];
    let mut positions = vec![(0.0f64, 0.0f64); k];
    let mut trace = EvalTrace::default();

    for &mi in &order.sequence {
        let (gx, gy) = genotype.xy(mi);
        let gx = gx.clamp(0.0, grid.canvas_width);
        let gy = gy.clamp(0.0, grid.canvas_height);
        let (cx, cy) = mask_profiles(netlist, mi, &boxes, grid);
        let valid = valid_anchors(netlist.macro_cell(mi), &occupancy, grid);
        let Some((anchor, increment)) = best_anchor(&cx, &cy, &valid, grid, gx, gy) else {
            return Ok((Placement::infeasible(), trace));
        };
        occupancy
            .commit(grid, netlist.macro_cell(mi), mi, anchor)
            .expect("best_anchor returned a committable anchor");
        let (x, y) = grid.anchor_position(anchor.0, anchor.1);
        anchors[mi] = anchor;
        positions[mi] = (x, y);
        boxes.insert_macro(netlist, mi, x, y);
        hpwl += increment;
        trace.steps.push(EvalStep {
            macro_index: mi,
            anchor,
            increment,
        });
    }

    debug_assert!(
        {
            let full = hpwl_full(&positions, netlist);
            (hpwl - full).abs() <= 1e-6 * full.abs().max(1.0)
        },
        "incremental HPWL drifted from the closed form"
    );

    Ok((
        Placement {
            anchors,
            positions,
            hpwl,
            feasible: true,
        },
        trace,
    ))
}

/// Map a genotype to a placement.
pub fn evaluate(
    genotype: &Genotype,
    netlist: &Netlist,
    grid: &GridSpec,
    order: &MacroOrder,
) -> Result<Placement> {
    evaluate_traced(genotype, netlist, grid, order).map(|(p, _)| p)
}

/// Closed-form HPWL of macro positions: the sum over nets of the
/// half-perimeter of the bounding box of all pin locations.
pub fn hpwl_full(positions: &[(f64, f64)], netlist: &Netlist) -> f64 {
    let mut total = 0.0;
    for net in &netlist.nets {
        let mut b = NetBox::EMPTY;
        for pin in &net.pins {
            let mi = netlist
                .macro_index_of(pin.cell)
                .expect("retained nets hold only macro pins");
            let (x, y) = positions[mi];
            b.absorb(x + pin.dx, x + pin.dx, y + pin.dy, y + pin.dy);
        }
        for &(x, y) in &net.fixed_pins {
            b.absorb(x, x, y, y);
        }
        total += b.half_perimeter();
    }
    total
}
