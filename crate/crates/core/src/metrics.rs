//! Placement quality metrics: routing-demand (RUDY-style) congestion maps
//! and the summary record emitted next to placements.
//!
//! Each net spreads a routing demand of `(w + h) / (w * h)` over its pin
//! bounding box. Grid values aggregate that demand; the headline congestion
//! number is the mean over the most congested tenth of the grid. In
//! area-weighted mode, demand is weighted by how much of each cell the box
//! actually covers, which makes the map total times the cell area equal the
//! HPWL over non-degenerate nets exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{NetBox, Placement};
use crate::grid::{Field, GridSpec, Rect};
use crate::netlist::Netlist;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CongestionMode {
    /// Full net demand lands on every cell the box positively intersects.
    /// Degenerate box axes (zero extent) widen to one cell so thin nets
    /// still register demand. This is the reporting default.
    Covered,
    /// Demand weighted by covered cell fraction; degenerate nets are skipped
    /// because a zero-area box covers nothing.
    AreaWeighted,
}

#[derive(Debug, Clone)]
pub struct CongestionMap {
    pub values: Field<f64>,
    /// Mean of the top tenth (rounded up) of grid values, zeros included.
    pub rudy: f64,
}

/// Per-axis range of cells `[lo, hi]` that `[b1, b2]` positively intersects
/// (more than `tol`), or `None`. Index guesses from division are confirmed
/// against the interval directly so float rounding at shared edges cannot
/// misclassify a boundary cell.
fn cover_range(b1: f64, b2: f64, cell: f64, m: usize, tol: f64) -> Option<(usize, usize)> {
    if b2 - b1 <= 0.0 {
        return None;
    }
    let hits = |i: usize| -> bool {
        let lo = i as f64 * cell;
        lo < b2 - tol && lo + cell > b1 + tol
    };
    let guess_lo = ((b1 / cell).floor() as isize - 1).max(0) as usize;
    let guess_hi = (((b2 / cell).ceil() as isize + 1).max(0) as usize).min(m.saturating_sub(1));
    let lo = (guess_lo..=guess_hi).find(|&i| hits(i))?;
    let hi = (lo..=guess_hi).take_while(|&i| hits(i)).last()?;
    Some((lo, hi))
}

/// Build the congestion map of a feasible placement.
pub fn congestion(
    placement: &Placement,
    netlist: &Netlist,
    grid: &GridSpec,
    mode: CongestionMode,
) -> Result<CongestionMap> {
    if !placement.feasible {
        return Err(Error::Infeasible("congestion needs a feasible placement".into()));
    }
    let m = grid.m;
    let tol = grid.eps();
    let mut values = Field::fill(m, 0.0);

    for net in &netlist.nets {
        let b = net_box(net, netlist, &placement.positions);
        if b.is_empty() {
            continue;
        }
        let (w, h) = (b.hx - b.lx, b.hy - b.ly);
        match mode {
            CongestionMode::Covered => {
                // Degenerate axes widen to one cell, centered on the box.
                let (lx, hx) = if w > 0.0 {
                    (b.lx, b.hx)
                } else {
                    (b.lx - grid.cell_w / 2.0, b.hx + grid.cell_w / 2.0)
                };
                let (ly, hy) = if h > 0.0 {
                    (b.ly, b.hy)
                } else {
                    (b.ly - grid.cell_h / 2.0, b.hy + grid.cell_h / 2.0)
                };
                let impact = ((hx - lx) + (hy - ly)) / ((hx - lx) * (hy - ly));
                let Some((i0, i1)) = cover_range(lx, hx, grid.cell_w, m, tol) else {
                    continue;
                };
                let Some((j0, j1)) = cover_range(ly, hy, grid.cell_h, m, tol) else {
                    continue;
                };
                for j in j0..=j1 {
                    for i in i0..=i1 {
                        values.set(i, j, values.at(i, j) + impact);
                    }
                }
            }
            CongestionMode::AreaWeighted => {
                if w <= 0.0 || h <= 0.0 {
                    continue;
                }
                let impact = (w + h) / (w * h);
                let cell_area = grid.cell_w * grid.cell_h;
                let Some((i0, i1)) = cover_range(b.lx, b.hx, grid.cell_w, m, 0.0) else {
                    continue;
                };
                let Some((j0, j1)) = cover_range(b.ly, b.hy, grid.cell_h, m, 0.0) else {
                    continue;
                };
                for j in j0..=j1 {
                    let y0 = (j as f64 * grid.cell_h).max(b.ly);
                    let y1 = ((j + 1) as f64 * grid.cell_h).min(b.hy);
                    for i in i0..=i1 {
                        let x0 = (i as f64 * grid.cell_w).max(b.lx);
                        let x1 = ((i + 1) as f64 * grid.cell_w).min(b.hx);
                        let frac = ((x1 - x0).max(0.0) * (y1 - y0).max(0.0)) / cell_area;
                        values.set(i, j, values.at(i, j) + impact * frac);
                    }
                }
            }
        }
    }

    let rudy = top_decile_mean(values.data(), m);
    Ok(CongestionMap { values, rudy })
}

fn net_box(net: &crate::netlist::Net, netlist: &Netlist, positions: &[(f64, f64)]) -> NetBox {
    let mut b = NetBox::EMPTY;
    for pin in &net.pins {
        let mi = netlist
            .macro_index_of(pin.cell)
            .expect("retained nets hold only macro pins");
        let (x, y) = positions[mi];
        let (px, py) = (x + pin.dx, y + pin.dy);
        b = NetBox {
            lx: b.lx.min(px),
            hx: b.hx.max(px),
            ly: b.ly.min(py),
            hy: b.hy.max(py),
        };
    }
    for &(x, y) in &net.fixed_pins {
        b = NetBox {
            lx: b.lx.min(x),
            hx: b.hx.max(x),
            ly: b.ly.min(y),
            hy: b.hy.max(y),
        };
    }
    b
}

fn top_decile_mean(values: &[f64], m: usize) -> f64 {
    let take = (m * m).div_ceil(10);
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    sorted.iter().take(take).sum::<f64>() / take as f64
}

/// Summary quality record for a placement.
#[derive(Debug, Clone, Serialize)]
pub struct MetricRecord {
    pub hpwl: f64,
    pub rudy: f64,
    /// Total pairwise macro overlap area; zero for any legal placement.
    pub overlap_area: f64,
    /// Macros extending past the canvas; zero for any legal placement.
    pub oob_count: usize,
    /// Wall-clock seconds the caller spent producing the placement.
    pub eval_seconds: f64,
}

/// Assemble the quality record of a feasible placement.
pub fn report(
    placement: &Placement,
    netlist: &Netlist,
    grid: &GridSpec,
    eval_seconds: f64,
) -> Result<MetricRecord> {
    if !placement.feasible {
        return Err(Error::Infeasible("report needs a feasible placement".into()));
    }
    let rudy = congestion(placement, netlist, grid, CongestionMode::Covered)?.rudy;

    let eps = grid.eps();
    let rects: Vec<Rect> = (0..netlist.k())
        .map(|mi| {
            let c = netlist.macro_cell(mi);
            let (x, y) = placement.positions[mi];
            Rect {
                x1: x,
                y1: y,
                x2: x + c.width,
                y2: y + c.height,
            }
        })
        .collect();
    let mut overlap_area = 0.0;
    for a in 0..rects.len() {
        for b in a + 1..rects.len() {
            if rects[a].overlaps(&rects[b], eps) {
                overlap_area += rects[a].intersection_area(&rects[b]);
            }
        }
    }
    let oob_count = rects
        .iter()
        .filter(|r| {
            r.x1 < -eps
                || r.y1 < -eps
                || r.x2 > grid.canvas_width + eps
                || r.y2 > grid.canvas_height + eps
        })
        .count();

    Ok(MetricRecord {
        hpwl: placement.hpwl,
        rudy,
        overlap_area,
        oob_count,
        eval_seconds,
    })
}
