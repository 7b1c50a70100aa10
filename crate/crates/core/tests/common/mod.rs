//! Shared instance generators and brute-force oracles for the integration
//! suites. The oracles recompute everything from the definitions — full
//! bounding-box recomputation per anchor, all-pairs rectangle checks — and
//! are deliberately slow and direct.
//!
//! Lattice instances keep every coordinate on the 0.5 grid with unit cells,
//! so both the engine's separable increments and the oracle's recomputed
//! differences are exact in f64 and can be compared with `==`.

// Each integration target compiles this module independently and uses a
// different subset of it.
#![allow(dead_code)]

use macroplace_core::{
    evaluate_traced, hpwl_full, local_search_traced, order_macros, CellKind, CellRecord, Genotype,
    GridSpec, LocalSearchConfig, MacroOrder, Net, Netlist, OrderingStrategy, PinRef, Placement,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn macro_cell(name: &str, w: f64, h: f64) -> CellRecord {
    CellRecord {
        name: name.into(),
        width: w,
        height: h,
        kind: CellKind::Macro,
    }
}

pub fn pin(cell: usize, dx: f64, dy: f64) -> PinRef {
    PinRef { cell, dx, dy }
}

pub struct Toy {
    pub netlist: Netlist,
    pub m: usize,
}

impl Toy {
    pub fn grid(&self) -> GridSpec {
        GridSpec::new(&self.netlist, self.m)
    }

    pub fn order(&self) -> MacroOrder {
        order_macros(&self.netlist, OrderingStrategy::ConnectedArea)
    }
}

/// Random instance with every dimension and pin offset on the 0.5 lattice:
/// k ≤ 6 macros, m ≤ 10 partitions, ≤ 8 nets.
pub fn random_lattice_instance(rng: &mut ChaCha8Rng) -> Toy {
    random_instance(rng, false)
}

/// Random instance with fractional macro dimensions and arbitrary real pin
/// offsets, for suites that do not need exact float comparison.
pub fn random_continuous_instance(rng: &mut ChaCha8Rng) -> Toy {
    random_instance(rng, true)
}

fn random_instance(rng: &mut ChaCha8Rng, continuous: bool) -> Toy {
    let m = rng.random_range(4..=10usize);
    let k = rng.random_range(2..=6usize);
    let canvas = m as f64;
    let dmax = (m / 3).clamp(1, 3);
    let cells: Vec<CellRecord> = (0..k)
        .map(|i| {
            let (w, h) = if continuous {
                (
                    rng.random_range(0.3..=dmax as f64),
                    rng.random_range(0.3..=dmax as f64),
                )
            } else {
                (
                    rng.random_range(1..=dmax) as f64,
                    rng.random_range(1..=dmax) as f64,
                )
            };
            macro_cell(&format!("m{i}"), w, h)
        })
        .collect();

    let n_nets = rng.random_range(1..=8usize);
    let mut nets = Vec::new();
    for id in 0..n_nets {
        let degree = rng.random_range(2..=3.min(k));
        let mut members: Vec<usize> = (0..k).collect();
        members.shuffle(rng);
        members.truncate(degree);
        // Occasionally give one member a second pin so multi-pin membership
        // of a single macro in one net is exercised.
        if rng.random::<f64>() < 0.3 {
            let dup = members[rng.random_range(0..members.len())];
            members.push(dup);
        }
        let pins = members
            .iter()
            .map(|&c| {
                let (w, h) = (cells[c].width, cells[c].height);
                let (dx, dy) = if continuous {
                    (rng.random_range(0.0..=w), rng.random_range(0.0..=h))
                } else {
                    (
                        rng.random_range(0..=(2.0 * w) as u32) as f64 * 0.5,
                        rng.random_range(0..=(2.0 * h) as u32) as f64 * 0.5,
                    )
                };
                pin(c, dx, dy)
            })
            .collect();
        nets.push(Net {
            id,
            pins,
            fixed_pins: vec![],
        });
    }

    let netlist = Netlist::new("toy", cells, nets, canvas, canvas).expect("generator stays legal");
    Toy { netlist, m }
}

/// Half-perimeter of the bounding box of a point set; zero when empty.
pub fn hp(points: &[(f64, f64)]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let (mut lx, mut hx, mut ly, mut hy) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        lx = lx.min(x);
        hx = hx.max(x);
        ly = ly.min(y);
        hy = hy.max(y);
    }
    (hx - lx) + (hy - ly)
}

/// Pin locations of one net given optional per-macro positions, with macro
/// `over` hypothetically moved to `over_pos`.
fn net_points(
    net: &Net,
    netlist: &Netlist,
    positions: &[Option<(f64, f64)>],
    over: Option<(usize, (f64, f64))>,
) -> Vec<(f64, f64)> {
    let mut points = Vec::new();
    for p in &net.pins {
        let mi = netlist
            .macro_index_of(p.cell)
            .expect("retained nets hold only macro pins");
        let at = match over {
            Some((omi, opos)) if omi == mi => Some(opos),
            _ => positions[mi],
        };
        if let Some((x, y)) = at {
            points.push((x + p.dx, y + p.dy));
        }
    }
    for &(x, y) in &net.fixed_pins {
        points.push((x, y));
    }
    points
}

pub fn rects_strictly_overlap(a: (f64, f64, f64, f64), b: (f64, f64, f64, f64)) -> bool {
    a.0 < b.2 && b.0 < a.2 && a.1 < b.3 && b.1 < a.3
}

pub fn macro_rect(netlist: &Netlist, mi: usize, pos: (f64, f64)) -> (f64, f64, f64, f64) {
    let c = netlist.macro_cell(mi);
    (pos.0, pos.1, pos.0 + c.width, pos.1 + c.height)
}

/// Assert the full legality contract on a feasible placement with exact
/// comparisons: every macro sits on its anchor's grid corner, inside the
/// canvas, and no two rectangles share interior area.
pub fn assert_exactly_legal(netlist: &Netlist, grid: &GridSpec, placement: &Placement) {
    assert!(placement.feasible, "legality check expects a feasible placement");
    let k = netlist.k();
    assert_eq!(placement.positions.len(), k);
    assert_eq!(placement.anchors.len(), k);
    let rects: Vec<_> = (0..k)
        .map(|mi| {
            let (i, j) = placement.anchors[mi];
            let pos = placement.positions[mi];
            assert_eq!(
                pos,
                grid.anchor_position(i, j),
                "macro {mi} strayed from its anchor corner"
            );
            let r = macro_rect(netlist, mi, pos);
            assert!(
                r.0 >= 0.0 && r.1 >= 0.0 && r.2 <= grid.canvas_width && r.3 <= grid.canvas_height,
                "macro {mi} rectangle {r:?} leaves the canvas"
            );
            r
        })
        .collect();
    for a in 0..k {
        for b in (a + 1)..k {
            assert!(
                !rects_strictly_overlap(rects[a], rects[b]),
                "macros {a} and {b} overlap: {:?} vs {:?}",
                rects[a],
                rects[b]
            );
        }
    }
}

/// Total half-perimeter wirelength over nets whose bounding box has positive
/// width and height. Nets with a degenerate (zero-extent) box on either axis
/// contribute nothing to the area-weighted congestion integral, so this is
/// the quantity that integral must reproduce.
pub fn non_degenerate_wirelength(netlist: &Netlist, positions: &[(f64, f64)]) -> f64 {
    let opt: Vec<Option<(f64, f64)>> = positions.iter().copied().map(Some).collect();
    let mut total = 0.0;
    for net in &netlist.nets {
        let points = net_points(net, netlist, &opt, None);
        if points.is_empty() {
            continue;
        }
        let (mut lx, mut hx, mut ly, mut hy) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            lx = lx.min(x);
            hx = hx.max(x);
            ly = ly.min(y);
            hy = hy.max(y);
        }
        let (w, h) = (hx - lx, hy - ly);
        if w > 0.0 && h > 0.0 {
            total += w + h;
        }
    }
    total
}

/// True when `mi` can sit at grid anchor `(i, j)`: inside the canvas and not
/// strictly overlapping any positioned macro other than itself.
fn oracle_anchor_valid(
    netlist: &Netlist,
    grid: &GridSpec,
    mi: usize,
    anchor: (usize, usize),
    positions: &[Option<(f64, f64)>],
) -> bool {
    let (x, y) = grid.anchor_position(anchor.0, anchor.1);
    let c = netlist.macro_cell(mi);
    if x + c.width > grid.canvas_width || y + c.height > grid.canvas_height {
        return false;
    }
    let r = (x, y, x + c.width, y + c.height);
    for (other, pos) in positions.iter().enumerate() {
        if other == mi {
            continue;
        }
        if let Some(p) = pos {
            if rects_strictly_overlap(r, macro_rect(netlist, other, *p)) {
                return false;
            }
        }
    }
    true
}

/// HPWL increment of putting `mi` at `at`, by full recomputation of every
/// net it touches against the currently positioned macros.
fn oracle_increment(
    netlist: &Netlist,
    mi: usize,
    at: (f64, f64),
    positions: &[Option<(f64, f64)>],
) -> f64 {
    let mut delta = 0.0;
    for span in netlist.macro_spans(mi) {
        let net = &netlist.nets[span.net];
        let before = hp(&net_points(net, netlist, positions, None));
        let after = hp(&net_points(net, netlist, positions, Some((mi, at))));
        delta += after - before;
    }
    delta
}

/// Replay a greedy construction step by step against brute force. For every
/// step the chosen anchor must lie in the oracle's argmin set, be its
/// nearest member to the genotype coordinate, and carry the oracle's exact
/// increment; an infeasible outcome must coincide with the oracle finding no
/// valid anchor. Returns the placement and the number of steps verified.
pub fn check_greedy_against_oracle(
    toy: &Toy,
    grid: &GridSpec,
    order: &MacroOrder,
    genotype: &Genotype,
) -> (Placement, usize) {
    let netlist = &toy.netlist;
    let (placement, trace) = evaluate_traced(genotype, netlist, grid, order).expect("valid length");

    let mut positions: Vec<Option<(f64, f64)>> = vec![None; netlist.k()];
    for (step_no, step) in trace.steps.iter().enumerate() {
        let mi = order.sequence[step_no];
        assert_eq!(mi, step.macro_index, "trace follows the macro order");

        let mut min_delta = f64::INFINITY;
        let mut argmin: Vec<(usize, usize)> = Vec::new();
        for j in 0..grid.m {
            for i in 0..grid.m {
                if !oracle_anchor_valid(netlist, grid, mi, (i, j), &positions) {
                    continue;
                }
                let delta =
                    oracle_increment(netlist, mi, grid.anchor_position(i, j), &positions);
                if delta < min_delta {
                    min_delta = delta;
                    argmin = vec![(i, j)];
                } else if delta == min_delta {
                    argmin.push((i, j));
                }
            }
        }

        assert!(
            argmin.contains(&step.anchor),
            "step {step_no}: anchor {:?} not in the oracle argmin {argmin:?}",
            step.anchor
        );
        assert_eq!(step.increment, min_delta, "step {step_no}: increment");

        let (gx, gy) = genotype.xy(mi);
        let gx = gx.clamp(0.0, grid.canvas_width);
        let gy = gy.clamp(0.0, grid.canvas_height);
        let d2 = |a: (usize, usize)| {
            let (x, y) = grid.anchor_position(a.0, a.1);
            (x - gx) * (x - gx) + (y - gy) * (y - gy)
        };
        let best_d2 = argmin.iter().map(|&a| d2(a)).fold(f64::INFINITY, f64::min);
        assert_eq!(
            d2(step.anchor),
            best_d2,
            "step {step_no}: anchor is not the nearest argmin member"
        );

        positions[mi] = Some(grid.anchor_position(step.anchor.0, step.anchor.1));
    }

    if placement.feasible {
        assert_eq!(trace.steps.len(), netlist.k());
        let full = hpwl_full(&placement.positions, netlist);
        assert!(
            (placement.hpwl - full).abs() <= 1e-6 * full.abs().max(1.0),
            "accumulated {} vs recomputed {full}",
            placement.hpwl
        );
    } else {
        // The macro that failed must have no valid anchor in the oracle's
        // view either.
        let failed = order.sequence[trace.steps.len()];
        let any_valid = (0..grid.m).any(|j| {
            (0..grid.m).any(|i| oracle_anchor_valid(netlist, grid, failed, (i, j), &positions))
        });
        assert!(!any_valid, "engine gave up where the oracle finds room");
    }
    (placement, trace.steps.len())
}

/// Drive local search and verify every decision — moves and stays alike —
/// against an exhaustive single-macro relocation oracle. Returns the number
/// of relocation decisions verified.
pub fn check_local_search_against_oracle(
    toy: &Toy,
    grid: &GridSpec,
    placement: &Placement,
    seed: u64,
) -> usize {
    let netlist = &toy.netlist;
    let order = order_macros(netlist, OrderingStrategy::ConnectedArea);
    let mut config = LocalSearchConfig::new(order.clone(), seed);
    let passes = config.passes;
    let (refined, moves) =
        local_search_traced(placement, netlist, grid, &mut config).expect("feasible input");

    let mut positions = placement.positions.clone();
    let mut next_move = moves.iter().peekable();
    let mut decisions = 0;

    for pass in 0..passes {
        for &mi in &order.sequence {
            let options: Vec<Option<(f64, f64)>> = positions.iter().copied().map(Some).collect();
            let current_total = hpwl_full(&positions, netlist);
            let mut min_total = f64::INFINITY;
            let mut argmin: Vec<(usize, usize)> = Vec::new();
            for j in 0..grid.m {
                for i in 0..grid.m {
                    if !oracle_anchor_valid(netlist, grid, mi, (i, j), &options) {
                        continue;
                    }
                    let mut moved = positions.clone();
                    moved[mi] = grid.anchor_position(i, j);
                    let total = hpwl_full(&moved, netlist);
                    if total < min_total {
                        min_total = total;
                        argmin = vec![(i, j)];
                    } else if total == min_total {
                        argmin.push((i, j));
                    }
                }
            }
            decisions += 1;

            let moved_here = next_move
                .peek()
                .is_some_and(|mv| mv.pass == pass && mv.macro_index == mi);
            if moved_here {
                let mv = next_move.next().unwrap();
                assert!(
                    min_total < current_total,
                    "pass {pass} macro {mi}: moved without strict improvement"
                );
                assert!(
                    argmin.contains(&mv.to),
                    "pass {pass} macro {mi}: target {:?} not among oracle minima {argmin:?}",
                    mv.to
                );
                positions[mi] = grid.anchor_position(mv.to.0, mv.to.1);
                assert_eq!(mv.hpwl_after, min_total, "pass {pass} macro {mi}: new HPWL");
            } else {
                assert_eq!(
                    min_total, current_total,
                    "pass {pass} macro {mi}: stayed despite a strictly better anchor"
                );
            }
        }
    }
    assert!(next_move.next().is_none(), "unaccounted move records");
    assert_eq!(refined.positions, positions, "final replayed state");
    assert_eq!(refined.hpwl, hpwl_full(&positions, netlist));
    decisions
}

/// Minimum HPWL over every legal assignment of anchors to macros, by
/// exhaustive enumeration. Only sensible for tiny instances.
pub fn exhaustive_optimum(netlist: &Netlist, grid: &GridSpec) -> Option<f64> {
    fn recurse(
        netlist: &Netlist,
        grid: &GridSpec,
        mi: usize,
        positions: &mut Vec<Option<(f64, f64)>>,
        best: &mut Option<f64>,
    ) {
        if mi == netlist.k() {
            let placed: Vec<(f64, f64)> = positions.iter().map(|p| p.unwrap()).collect();
            let total = hpwl_full(&placed, netlist);
            if best.is_none_or(|b| total < b) {
                *best = Some(total);
            }
            return;
        }
        for j in 0..grid.m {
            for i in 0..grid.m {
                if oracle_anchor_valid(netlist, grid, mi, (i, j), positions) {
                    positions[mi] = Some(grid.anchor_position(i, j));
                    recurse(netlist, grid, mi + 1, positions, best);
                    positions[mi] = None;
                }
            }
        }
    }
    let mut positions = vec![None; netlist.k()];
    let mut best = None;
    recurse(netlist, grid, 0, &mut positions, &mut best);
    best
}

/// The worked 3-macro example: macros A 2×1, B 3×2, C 2×2 on a 5×5 canvas
/// split into 5×5 cells, net n0 = {A, B}, net n1 = {A, C}, each macro
/// pinned at its bottom-left and top-right corners. The genotype below maps
/// to increments 6, 3, 2 and total HPWL 11.
pub fn worked_example() -> (Toy, Genotype) {
    let cells = vec![
        macro_cell("A", 2.0, 1.0),
        macro_cell("B", 3.0, 2.0),
        macro_cell("C", 2.0, 2.0),
    ];
    let nets = vec![
        Net {
            id: 0,
            pins: vec![pin(0, 0.0, 0.0), pin(0, 2.0, 1.0), pin(1, 0.0, 0.0), pin(1, 3.0, 2.0)],
            fixed_pins: vec![],
        },
        Net {
            id: 1,
            pins: vec![pin(0, 0.0, 0.0), pin(0, 2.0, 1.0), pin(2, 0.0, 0.0), pin(2, 2.0, 2.0)],
            fixed_pins: vec![],
        },
    ];
    let netlist = Netlist::new("worked", cells, nets, 5.0, 5.0).unwrap();
    let genotype = Genotype::new(vec![2.2, 2.2, 2.4, 0.3, 0.5, 4.0]);
    (Toy { netlist, m: 5 }, genotype)
}
