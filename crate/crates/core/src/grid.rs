//! Canvas geometry: the m x m placement grid, macro footprints, and
//! occupancy tracking.
//!
//! Macros are only ever anchored at grid corners. A macro anchored at grid
//! `(i, j)` has its bottom-left corner at `(i * cell_w, j * cell_h)` and
//! conservatively occupies `ceil(w / cell_w) x ceil(h / cell_h)` whole cells.
//! Because anchors are quantized to corners, blocking whole footprint cells
//! admits exactly the same anchor set as exact rectangle tests (per axis,
//! `q * c < i * c + w` iff `q < i + ceil(w / c)`); the exact mode exists for
//! validation and for callers that want rectangle-level checks anyway.

use crate::error::{Error, Result};
use crate::netlist::{CellRecord, Netlist};

/// Relative tolerance for geometric edge comparisons. Scaled by the canvas
/// extent, it separates floating-point noise at shared edges (a few ulps)
/// from genuine overlap (at least one macro dimension).
pub const EDGE_TOL: f64 = 1e-9;

/// How anchor validity treats already-placed macros.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapMode {
    /// Block every cell of the conservative footprint.
    #[default]
    Conservative,
    /// Block anchors whose exact rectangle would intersect a placed one.
    Exact,
}

/// The placement grid: `m x m` cells over the canvas.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub m: usize,
    pub cell_w: f64,
    pub cell_h: f64,
    pub canvas_width: f64,
    pub canvas_height: f64,
    pub overlap: OverlapMode,
}

impl GridSpec {
    pub fn new(netlist: &Netlist, m: usize) -> GridSpec {
        assert!(m > 0, "partition count must be positive");
        GridSpec {
            m,
            cell_w: netlist.canvas_width / m as f64,
            cell_h: netlist.canvas_height / m as f64,
            canvas_width: netlist.canvas_width,
            canvas_height: netlist.canvas_height,
            overlap: OverlapMode::Conservative,
        }
    }

    pub fn with_overlap(mut self, overlap: OverlapMode) -> GridSpec {
        self.overlap = overlap;
        self
    }

    /// Bottom-left corner of grid `(i, j)`.
    pub fn anchor_position(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.cell_w, j as f64 * self.cell_h)
    }

    /// Absolute edge tolerance for this canvas.
    pub fn eps(&self) -> f64 {
        EDGE_TOL * self.canvas_width.max(self.canvas_height).max(1.0)
    }
}

/// Dense `m x m` field, row-major by grid row `j`; `(i, j)` is column then row.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    m: usize,
    data: Vec<T>,
}

impl<T: Clone> Field<T> {
    pub fn fill(m: usize, value: T) -> Field<T> {
        Field {
            m,
            data: vec![value; m * m],
        }
    }
}

impl<T> Field<T> {
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.m && j < self.m);
        j * self.m + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let idx = self.idx(i, j);
        self.data[idx] = value;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }
}

impl<T: Copy> Field<T> {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[self.idx(i, j)]
    }
}

/// Half-open rectangle of grid cells `[i0, i1) x [j0, j1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridRect {
    pub i0: usize,
    pub j0: usize,
    pub i1: usize,
    pub j1: usize,
}

impl GridRect {
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (i0, i1) = (self.i0, self.i1);
        (self.j0..self.j1).flat_map(move |j| (i0..i1).map(move |i| (i, j)))
    }

    pub fn cell_count(&self) -> usize {
        (self.i1 - self.i0) * (self.j1 - self.j0)
    }
}

/// Axis-aligned rectangle in canvas units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl Rect {
    /// True when the rectangles share more than `eps` of extent on both
    /// axes. Touching edges do not overlap.
    pub fn overlaps(&self, other: &Rect, eps: f64) -> bool {
        let w = self.x2.min(other.x2) - self.x1.max(other.x1);
        let h = self.y2.min(other.y2) - self.y1.max(other.y1);
        w > eps && h > eps
    }

    pub fn intersection_area(&self, other: &Rect) -> f64 {
        let w = (self.x2.min(other.x2) - self.x1.max(other.x1)).max(0.0);
        let h = (self.y2.min(other.y2) - self.y1.max(other.y1)).max(0.0);
        w * h
    }
}

/// Number of whole cells a macro dimension spans.
fn span_cells(dim: f64, cell: f64) -> usize {
    ((dim / cell).ceil() as usize).max(1)
}

/// Conservative footprint of `cell` anchored at grid `(i, j)`: the whole
/// cells that cover the macro's rectangle.
pub fn footprint(cell: &CellRecord, grid: &GridSpec, anchor: (usize, usize)) -> GridRect {
    let (i, j) = anchor;
    GridRect {
        i0: i,
        j0: j,
        i1: i + span_cells(cell.width, grid.cell_w),
        j1: j + span_cells(cell.height, grid.cell_h),
    }
}

/// Exact rectangle of `cell` anchored at grid `(i, j)`.
pub fn anchor_rect(cell: &CellRecord, grid: &GridSpec, anchor: (usize, usize)) -> Rect {
    let (x, y) = grid.anchor_position(anchor.0, anchor.1);
    Rect {
        x1: x,
        y1: y,
        x2: x + cell.width,
        y2: y + cell.height,
    }
}

/// One committed macro.
#[derive(Debug, Clone)]
pub struct PlacedRect {
    pub macro_id: usize,
    pub rect: Rect,
    pub cells: GridRect,
}

/// Which grid cells are taken, plus the exact rectangles that took them.
#[derive(Debug, Clone)]
pub struct Occupancy {
    bitmap: Field<bool>,
    placed: Vec<PlacedRect>,
}

impl Occupancy {
    pub fn new(m: usize) -> Occupancy {
        Occupancy {
            bitmap: Field::fill(m, false),
            placed: Vec::new(),
        }
    }

    pub fn bitmap(&self) -> &Field<bool> {
        &self.bitmap
    }

    pub fn placed(&self) -> &[PlacedRect] {
        &self.placed
    }

    fn cells_free(&self, cells: GridRect) -> bool {
        cells.cells().all(|(i, j)| !self.bitmap.at(i, j))
    }

    /// Place `macro_id` at `anchor`. Errors when the anchor is out of bounds
    /// or conflicts with an earlier commit — callers are expected to pick
    /// anchors from `valid_anchors`, so a failure here is a contract bug.
    pub fn commit(
        &mut self,
        grid: &GridSpec,
        cell: &CellRecord,
        macro_id: usize,
        anchor: (usize, usize),
    ) -> Result<()> {
        let cells = footprint(cell, grid, anchor);
        if cells.i1 > grid.m || cells.j1 > grid.m {
            return Err(Error::InvalidAnchor {
                i: anchor.0,
                j: anchor.1,
                reason: format!("footprint exceeds the {0}x{0} grid", grid.m),
            });
        }
        let rect = anchor_rect(cell, grid, anchor);
        match grid.overlap {
            OverlapMode::Conservative => {
                if !self.cells_free(cells) {
                    return Err(Error::InvalidAnchor {
                        i: anchor.0,
                        j: anchor.1,
                        reason: "footprint overlaps an occupied cell".into(),
                    });
                }
                // The cheap cell test is meant to imply rectangle disjointness.
                debug_assert!(
                    self.placed.iter().all(|p| !p.rect.overlaps(&rect, grid.eps())),
                    "conservative footprint admitted a rectangle overlap"
                );
            }
            OverlapMode::Exact => {
                if let Some(p) = self.placed.iter().find(|p| p.rect.overlaps(&rect, grid.eps())) {
                    return Err(Error::InvalidAnchor {
                        i: anchor.0,
                        j: anchor.1,
                        reason: format!("rectangle overlaps macro {}", p.macro_id),
                    });
                }
            }
        }
        for (i, j) in cells.cells() {
            self.bitmap.set(i, j, true);
        }
        self.placed.push(PlacedRect {
            macro_id,
            rect,
            cells,
        });
        Ok(())
    }

    /// Remove a committed macro. In conservative mode footprints are
    /// disjoint, so clearing the macro's own cells suffices; in exact mode
    /// the bitmap is rebuilt from the remaining footprints.
    pub fn vacate(&mut self, grid: &GridSpec, macro_id: usize) -> Result<()> {
        let pos = self
            .placed
            .iter()
            .position(|p| p.macro_id == macro_id)
            .ok_or_else(|| Error::Infeasible(format!("macro {macro_id} is not placed")))?;
        let removed = self.placed.swap_remove(pos);
        match grid.overlap {
            OverlapMode::Conservative => {
                for (i, j) in removed.cells.cells() {
                    self.bitmap.set(i, j, false);
                }
            }
            OverlapMode::Exact => {
                self.bitmap = Field::fill(grid.m, false);
                for p in &self.placed {
                    for (i, j) in p.cells.cells() {
                        self.bitmap.set(i, j, true);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Anchors where `cell` fits: footprint inside the grid and no conflict with
/// committed macros under the grid's overlap mode.
pub fn valid_anchors(cell: &CellRecord, occupancy: &Occupancy, grid: &GridSpec) -> Field<bool> {
    let m = grid.m;
    let cols = span_cells(cell.width, grid.cell_w);
    let rows = span_cells(cell.height, grid.cell_h);
    let mut valid = Field::fill(m, false);
    if cols > m || rows > m {
        return valid;
    }
    let (i_max, j_max) = (m - cols, m - rows);

    match grid.overlap {
        OverlapMode::Conservative => {
            // Summed-area table over the bitmap makes each anchor query O(1).
            let mut prefix = vec![0u32; (m + 1) * (m + 1)];
            for j in 0..m {
                for i in 0..m {
                    prefix[(j + 1) * (m + 1) + (i + 1)] = prefix[j * (m + 1) + (i + 1)]
                        + prefix[(j + 1) * (m + 1) + i]
                        - prefix[j * (m + 1) + i]
                        + u32::from(occupancy.bitmap.at(i, j));
                }
            }
            let sum = |i0: usize, j0: usize, i1: usize, j1: usize| {
                prefix[j1 * (m + 1) + i1] + prefix[j0 * (m + 1) + i0]
                    - prefix[j0 * (m + 1) + i1]
                    - prefix[j1 * (m + 1) + i0]
            };
            for j in 0..=j_max {
                for i in 0..=i_max {
                    valid.set(i, j, sum(i, j, i + cols, j + rows) == 0);
                }
            }
        }
        OverlapMode::Exact => {
            for j in 0..=j_max {
                for i in 0..=i_max {
                    valid.set(i, j, true);
                }
            }
            let eps = grid.eps();
            for p in &occupancy.placed {
                // Anchor (i, j) conflicts iff the rectangles overlap on both
                // axes. Derive a candidate index range from the rectangle,
                // padded by one cell, and confirm each index exactly so that
                // float rounding in the division cannot misclassify an edge.
                let blocked = |a0: f64, a1: f64, dim: f64, cell_sz: f64, q: usize| {
                    let lo = q as f64 * cell_sz;
                    lo < a1 - eps && lo + dim > a0 + eps
                };
                let range = |a0: f64, a1: f64, dim: f64, cell_sz: f64, q_max: usize| {
                    let lo = (((a0 - dim) / cell_sz).floor() as isize - 1).max(0) as usize;
                    let hi = (((a1 / cell_sz).ceil() as isize + 1).max(0) as usize).min(q_max);
                    (lo, hi)
                };
                let (il, ih) = range(p.rect.x1, p.rect.x2, cell.width, grid.cell_w, i_max);
                let (jl, jh) = range(p.rect.y1, p.rect.y2, cell.height, grid.cell_h, j_max);
                for j in jl..=jh {
                    if !blocked(p.rect.y1, p.rect.y2, cell.height, grid.cell_h, j) {
                        continue;
                    }
                    for i in il..=ih {
                        if blocked(p.rect.x1, p.rect.x2, cell.width, grid.cell_w, i) {
                            valid.set(i, j, false);
                        }
                    }
                }
            }
        }
    }
    valid
}

/// Partition counts used in published runs for the well-known benchmarks.
pub fn partitions_override(benchmark: &str) -> Option<usize> {
    match benchmark {
        "adaptec1" => Some(160),
        "adaptec2" => Some(158),
        "adaptec3" => Some(113),
        "adaptec4" => Some(108),
        "bigblue1" => Some(160),
        "bigblue3" => Some(234),
        "bigblue4" => Some(273),
        "ariane" => Some(357),
        _ => None,
    }
}

/// Default partition count `m` for a design: the published value when the
/// design name is known, otherwise chosen so one grid cell is roughly the
/// median macro's larger side (one macro ~ one cell), clamped to [64, 512].
pub fn default_partitions(netlist: &Netlist) -> usize {
    if let Some(m) = partitions_override(&netlist.name) {
        return m;
    }
    if netlist.k() == 0 {
        return 64;
    }
    let mut sides: Vec<f64> = netlist
        .macro_ids
        .iter()
        .map(|&ci| netlist.cells[ci].width.max(netlist.cells[ci].height))
        .collect();
    sides.sort_by(f64::total_cmp);
    let median = sides[(sides.len() - 1) / 2];
    let extent = netlist.canvas_width.min(netlist.canvas_height);
    let m = (extent / median).round() as isize;
    m.clamp(64, 512) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{CellKind, CellRecord, Netlist};

    fn macro_cell(name: &str, w: f64, h: f64) -> CellRecord {
        CellRecord {
            name: name.into(),
            width: w,
            height: h,
            kind: CellKind::Macro,
        }
    }

    fn toy_netlist(name: &str, dims: &[(f64, f64)], canvas: (f64, f64)) -> Netlist {
        let cells = dims
            .iter()
            .enumerate()
            .map(|(i, &(w, h))| macro_cell(&format!("m{i}"), w, h))
            .collect();
        Netlist::new(name, cells, vec![], canvas.0, canvas.1).unwrap()
    }

    #[test]
    fn default_partitions_identical_macros() {
        // 9000x9000 canvas tiled by 30x20 macros: cells of 30 units, m = 300.
        let nl = toy_netlist("chip", &[(30.0, 20.0); 12], (9000.0, 9000.0));
        assert_eq!(default_partitions(&nl), 300);
    }

    #[test]
    fn default_partitions_uses_published_overrides() {
        let nl = toy_netlist("adaptec1", &[(30.0, 20.0)], (9000.0, 9000.0));
        assert_eq!(default_partitions(&nl), 160);
        assert_eq!(partitions_override("adaptec4"), Some(108));
        assert_eq!(partitions_override("ariane"), Some(357));
        assert_eq!(partitions_override("bigblue2"), None);
    }

    #[test]
    fn default_partitions_clamps_tiny_and_huge() {
        // One macro as large as the canvas: the ratio would be 1.
        let nl = toy_netlist("chip", &[(10.0, 10.0)], (10.0, 10.0));
        assert_eq!(default_partitions(&nl), 64);
        // Very fine macros relative to the canvas: the ratio would be 10000.
        let nl = toy_netlist("chip", &[(1.0, 1.0)], (10000.0, 10000.0));
        assert_eq!(default_partitions(&nl), 512);
    }

    #[test]
    fn footprint_rounds_up_to_whole_cells() {
        let nl = toy_netlist("chip", &[(2.0, 1.0)], (5.0, 5.0));
        let grid = GridSpec::new(&nl, 5);
        let fp = |w: f64, h: f64| footprint(&macro_cell("x", w, h), &grid, (1, 1));
        assert_eq!(fp(2.0, 1.0), GridRect { i0: 1, j0: 1, i1: 3, j1: 2 });
        assert_eq!(fp(2.1, 1.0).i1, 4, "2.1 units must take 3 columns");
        assert_eq!(fp(0.5, 0.5), GridRect { i0: 1, j0: 1, i1: 2, j1: 2 });
    }

    #[test]
    fn valid_anchors_around_a_center_macro() {
        let nl = toy_netlist("chip", &[(1.0, 1.0); 2], (5.0, 5.0));
        let grid = GridSpec::new(&nl, 5);
        let mut occ = Occupancy::new(5);
        let free = valid_anchors(nl.macro_cell(1), &occ, &grid);
        assert_eq!(free.data().iter().filter(|&&v| v).count(), 25);

        occ.commit(&grid, nl.macro_cell(0), 0, (2, 2)).unwrap();
        let free = valid_anchors(nl.macro_cell(1), &occ, &grid);
        assert_eq!(free.data().iter().filter(|&&v| v).count(), 24);
        assert!(!free.at(2, 2));
    }

    #[test]
    fn bounds_respect_exact_fit() {
        // 2-cell-wide macro on a 5-cell canvas: anchors 0..=3 fit in x.
        let nl = toy_netlist("chip", &[(2.0, 1.0)], (5.0, 5.0));
        let grid = GridSpec::new(&nl, 5);
        let occ = Occupancy::new(5);
        let free = valid_anchors(nl.macro_cell(0), &occ, &grid);
        for j in 0..5 {
            for i in 0..5 {
                assert_eq!(free.at(i, j), i <= 3, "anchor ({i}, {j})");
            }
        }
    }

    #[test]
    fn commit_rejects_conflicts_and_allows_touching() {
        let nl = toy_netlist("chip", &[(1.0, 1.0); 3], (5.0, 5.0));
        let grid = GridSpec::new(&nl, 5);
        let mut occ = Occupancy::new(5);
        occ.commit(&grid, nl.macro_cell(0), 0, (0, 0)).unwrap();
        let err = occ.commit(&grid, nl.macro_cell(1), 1, (0, 0)).unwrap_err();
        assert!(matches!(err, Error::InvalidAnchor { .. }), "{err}");
        // Shared edges are legal.
        occ.commit(&grid, nl.macro_cell(2), 2, (1, 0)).unwrap();
    }

    #[test]
    fn commit_rejects_out_of_bounds() {
        let nl = toy_netlist("chip", &[(2.0, 1.0)], (5.0, 5.0));
        let grid = GridSpec::new(&nl, 5);
        let mut occ = Occupancy::new(5);
        let err = occ.commit(&grid, nl.macro_cell(0), 0, (4, 0)).unwrap_err();
        assert!(matches!(err, Error::InvalidAnchor { .. }), "{err}");
    }

    #[test]
    fn vacate_restores_anchors() {
        let nl = toy_netlist("chip", &[(2.0, 2.0), (1.0, 1.0)], (5.0, 5.0));
        let grid = GridSpec::new(&nl, 5);
        let mut occ = Occupancy::new(5);
        occ.commit(&grid, nl.macro_cell(0), 0, (1, 1)).unwrap();
        let before = valid_anchors(nl.macro_cell(1), &occ, &grid);
        occ.vacate(&grid, 0).unwrap();
        let after = valid_anchors(nl.macro_cell(1), &occ, &grid);
        assert!(before.data().iter().filter(|&&v| v).count() < 25);
        assert_eq!(after.data().iter().filter(|&&v| v).count(), 25);
        assert!(occ.vacate(&grid, 0).is_err(), "double vacate must fail");
    }

    #[test]
    fn exact_mode_matches_conservative_for_grid_anchors() {
        // Anchors are corner-quantized, so both modes must admit the same
        // anchor sets; exercised across fractional macro sizes.
        let dims = [(1.2, 0.7), (0.5, 2.0), (2.0, 2.0), (1.0, 1.5), (0.9, 0.9)];
        let nl = toy_netlist("chip", &dims, (6.0, 6.0));
        let cons = GridSpec::new(&nl, 6);
        let exact = cons.with_overlap(OverlapMode::Exact);
        let mut occ_c = Occupancy::new(6);
        let mut occ_e = Occupancy::new(6);
        let anchors = [(0, 0), (3, 1), (1, 3)];
        for (id, &a) in anchors.iter().enumerate() {
            occ_c.commit(&cons, nl.macro_cell(id), id, a).unwrap();
            occ_e.commit(&exact, nl.macro_cell(id), id, a).unwrap();
        }
        for probe in 0..dims.len() {
            let vc = valid_anchors(nl.macro_cell(probe), &occ_c, &cons);
            let ve = valid_anchors(nl.macro_cell(probe), &occ_e, &exact);
            assert_eq!(vc.data(), ve.data(), "macro {probe}");
        }
    }

    #[test]
    fn committed_rectangles_stay_disjoint() {
        let nl = toy_netlist("chip", &[(1.3, 0.8), (2.0, 1.0), (0.6, 2.4)], (8.0, 8.0));
        let grid = GridSpec::new(&nl, 8);
        let mut occ = Occupancy::new(8);
        occ.commit(&grid, nl.macro_cell(0), 0, (0, 0)).unwrap();
        occ.commit(&grid, nl.macro_cell(1), 1, (2, 0)).unwrap();
        occ.commit(&grid, nl.macro_cell(2), 2, (0, 1)).unwrap();
        let placed = occ.placed();
        for a in 0..placed.len() {
            for b in a + 1..placed.len() {
                assert!(
                    !placed[a].rect.overlaps(&placed[b].rect, grid.eps()),
                    "macros {a} and {b} overlap"
                );
            }
        }
    }
}
