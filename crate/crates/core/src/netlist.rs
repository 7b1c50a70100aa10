//! In-memory netlist model.
//!
//! A [`Netlist`] holds the cells and hyper-edges of one design plus the
//! placeable canvas extents. Only macros are placed by this crate, so nets
//! are filtered at construction time: pins on standard cells are dropped and
//! nets left without a macro pin are removed entirely. Optionally, pins on
//! fixed terminals survive as immovable pin locations.
//!
//! Coordinates are canvas-relative: the placeable region spans
//! `[0, canvas_width] x [0, canvas_height]`, and `canvas_origin` records the
//! offset back to the source file's coordinate system.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    /// Movable block with positive area. The only kind this crate places.
    Macro,
    /// Standard cell; ignored by the placer and dropped from nets.
    Standard,
    /// Immovable zero-area pad. Its pins may be kept as fixed pin sites.
    FixedTerminal,
}

#[derive(Debug, Clone)]
pub struct CellRecord {
    pub name: String,
    pub width: f64,
    pub height: f64,
    pub kind: CellKind,
}

impl CellRecord {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// A pin, expressed as an offset from its cell's bottom-left corner.
/// Offsets always lie within the cell's bounding box.
#[derive(Debug, Clone, Copy)]
pub struct PinRef {
    /// Index into [`Netlist::cells`].
    pub cell: usize,
    pub dx: f64,
    pub dy: f64,
}

/// A hyper-edge after filtering: at least one macro pin, plus any retained
/// fixed pin locations (absolute, canvas-relative coordinates).
#[derive(Debug, Clone)]
pub struct Net {
    /// Index of the net in its source file, kept for diagnostics.
    pub id: usize,
    pub pins: Vec<PinRef>,
    pub fixed_pins: Vec<(f64, f64)>,
}

/// Position of a cell in the source `.pl` file, kept so that placement
/// output can reproduce the untouched lines.
#[derive(Debug, Clone)]
pub struct SourcePosition {
    pub x: f64,
    pub y: f64,
    pub orient: String,
    pub fixed: bool,
}

/// Pin-offset span of one macro within one net: the min/max pin offsets over
/// all of the macro's pins on that net. Placing the macro at `(x, y)` makes
/// the net's bounding box absorb `[x+dx_min, x+dx_max] x [y+dy_min, y+dy_max]`.
#[derive(Debug, Clone, Copy)]
pub struct NetSpan {
    /// Index into [`Netlist::nets`].
    pub net: usize,
    pub dx_min: f64,
    pub dx_max: f64,
    pub dy_min: f64,
    pub dy_max: f64,
}

#[derive(Debug, Clone)]
pub struct Netlist {
    /// Short design name (the `.aux` file stem for parsed designs).
    pub name: String,
    pub cells: Vec<CellRecord>,
    /// Retained nets only; every net has at least one macro pin.
    pub nets: Vec<Net>,
    /// Cell indices of the macros, in cell order. Macro index `m` throughout
    /// the crate means `cells[macro_ids[m]]`.
    pub macro_ids: Vec<usize>,
    pub canvas_width: f64,
    pub canvas_height: f64,
    /// Offset from canvas-relative coordinates back to the source file's.
    pub canvas_origin: (f64, f64),
    /// Per-cell position from the source `.pl`, if one was parsed.
    pub source_positions: Vec<Option<SourcePosition>>,

    // Derived lookup tables.
    macro_index: Vec<Option<usize>>,
    macro_nets: Vec<Vec<NetSpan>>,
}

impl Netlist {
    /// Build a netlist from raw parts, applying the net retention rule:
    /// standard-cell pins are dropped, nets without macro pins are removed.
    /// Fixed-terminal pins inside `nets` are dropped too; callers that want
    /// them keep such pins in `Net::fixed_pins` instead.
    pub fn new(
        name: impl Into<String>,
        cells: Vec<CellRecord>,
        nets: Vec<Net>,
        canvas_width: f64,
        canvas_height: f64,
    ) -> Result<Netlist> {
        if !(canvas_width >= 0.0 && canvas_height >= 0.0) {
            return Err(Error::BadCanvas {
                width: canvas_width,
                height: canvas_height,
            });
        }
        for cell in &cells {
            if cell.kind == CellKind::Macro && !(cell.width > 0.0 && cell.height > 0.0) {
                return Err(Error::ZeroAreaMacro {
                    name: cell.name.clone(),
                    width: cell.width,
                    height: cell.height,
                });
            }
        }

        let mut macro_index = vec![None; cells.len()];
        let mut macro_ids = Vec::new();
        for (ci, cell) in cells.iter().enumerate() {
            if cell.kind == CellKind::Macro {
                macro_index[ci] = Some(macro_ids.len());
                macro_ids.push(ci);
            }
        }

        let mut retained = Vec::new();
        for mut net in nets {
            for pin in &net.pins {
                if pin.cell >= cells.len() {
                    return Err(Error::UnknownCell {
                        net: format!("#{}", net.id),
                        cell: format!("cell index {}", pin.cell),
                    });
                }
            }
            net.pins.retain(|p| macro_index[p.cell].is_some());
            if !net.pins.is_empty() {
                retained.push(net);
            }
        }

        let mut macro_nets: Vec<Vec<NetSpan>> = vec![Vec::new(); macro_ids.len()];
        for (ni, net) in retained.iter().enumerate() {
            for pin in &net.pins {
                let mi = macro_index[pin.cell].expect("retained pins are macro pins");
                match macro_nets[mi].last_mut() {
                    Some(span) if span.net == ni => {
                        span.dx_min = span.dx_min.min(pin.dx);
                        span.dx_max = span.dx_max.max(pin.dx);
                        span.dy_min = span.dy_min.min(pin.dy);
                        span.dy_max = span.dy_max.max(pin.dy);
                    }
                    _ => macro_nets[mi].push(NetSpan {
                        net: ni,
                        dx_min: pin.dx,
                        dx_max: pin.dx,
                        dy_min: pin.dy,
                        dy_max: pin.dy,
                    }),
                }
            }
        }

        let source_positions = vec![None; cells.len()];
        Ok(Netlist {
            name: name.into(),
            cells,
            nets: retained,
            macro_ids,
            canvas_width,
            canvas_height,
            canvas_origin: (0.0, 0.0),
            source_positions,
            macro_index,
            macro_nets,
        })
    }

    /// Number of macros.
    pub fn k(&self) -> usize {
        self.macro_ids.len()
    }

    pub fn macro_cell(&self, mi: usize) -> &CellRecord {
        &self.cells[self.macro_ids[mi]]
    }

    /// Macro index of a cell, if the cell is a macro.
    pub fn macro_index_of(&self, cell: usize) -> Option<usize> {
        self.macro_index[cell]
    }

    /// Per-net pin-offset spans of one macro. A net appears once even when
    /// the macro has several pins on it.
    pub fn macro_spans(&self, mi: usize) -> &[NetSpan] {
        &self.macro_nets[mi]
    }
}
