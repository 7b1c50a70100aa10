//! Bookshelf benchmark I/O: `.aux` manifests with `.nodes`, `.nets`, `.pl`,
//! and `.scl` members.
//!
//! Reading translates every coordinate into canvas-relative form (the
//! canvas's bottom-left corner becomes the origin); writing translates back.
//! Nodes flagged `terminal` with positive area are treated as movable
//! macros — that is how the classic mixed-size benchmarks mark their blocks.
//! Zero-area terminals are immovable pads whose pins can optionally be kept
//! as fixed pin sites; everything else is a standard cell, invisible to the
//! placer.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::{Genotype, Placement};
use crate::netlist::{CellKind, CellRecord, Net, Netlist, PinRef, SourcePosition};

/// Options for [`parse_aux`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Keep pins on zero-area terminals as immovable pin sites. Off by
    /// default: such pads are fabric outside the macro problem, and keeping
    /// them pins every net box to the pad locations.
    pub include_fixed_pins: bool,
}

fn open_lines(path: &Path) -> Result<impl Iterator<Item = (usize, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(file)
        .lines()
        .map_while(|l| l.ok())
        .enumerate()
        .map(|(n, l)| (n + 1, l)))
}

/// Lines that carry data: not blank, not `#` comments, not the `UCLA`
/// format header.
fn is_content(line: &str) -> bool {
    let t = line.trim_start();
    !t.is_empty() && !t.starts_with('#') && !t.starts_with("UCLA")
}

fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(path, line, format!("expected a number, got '{tok}'")))
}

fn parse_count(path: &Path, line: usize, tok: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| Error::parse(path, line, format!("expected a count, got '{tok}'")))
}

/// Value of a `Key : value` line, if this is one.
fn keyed_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.trim_start().strip_prefix(key)?;
    let rest = rest.trim_start();
    let rest = rest.strip_prefix(':')?;
    rest.split_whitespace().next()
}

struct AuxFiles {
    nodes: PathBuf,
    nets: PathBuf,
    pl: Option<PathBuf>,
    scl: PathBuf,
}

fn parse_aux_manifest(path: &Path) -> Result<AuxFiles> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut by_ext: HashMap<String, PathBuf> = HashMap::new();
    for (ln, line) in open_lines(path)? {
        if !is_content(&line) {
            continue;
        }
        for tok in line.split_whitespace() {
            if let Some(ext) = Path::new(tok).extension().and_then(|e| e.to_str()) {
                by_ext.insert(ext.to_ascii_lowercase(), dir.join(tok));
            }
        }
        let missing = ["nodes", "nets", "scl"]
            .iter()
            .find(|ext| !by_ext.contains_key(**ext));
        if let Some(ext) = missing {
            return Err(Error::parse(path, ln, format!("manifest lists no .{ext} file")));
        }
        return Ok(AuxFiles {
            nodes: by_ext.remove("nodes").unwrap(),
            nets: by_ext.remove("nets").unwrap(),
            pl: by_ext.remove("pl"),
            scl: by_ext.remove("scl").unwrap(),
        });
    }
    Err(Error::parse(path, 0, "empty .aux manifest"))
}

fn parse_nodes(path: &Path) -> Result<Vec<CellRecord>> {
    let mut cells = Vec::new();
    let mut declared = None;
    for (ln, line) in open_lines(path)? {
        if !is_content(&line) {
            continue;
        }
        if let Some(v) = keyed_value(&line, "NumNodes") {
            declared = Some(parse_count(path, ln, v)?);
            continue;
        }
        if keyed_value(&line, "NumTerminals").is_some() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(Error::parse(path, ln, format!("malformed node line '{}'", line.trim())));
        }
        let width = parse_f64(path, ln, toks[1])?;
        let height = parse_f64(path, ln, toks[2])?;
        if width < 0.0 || height < 0.0 {
            return Err(Error::parse(path, ln, "negative node dimensions"));
        }
        let terminal = toks.get(3).is_some_and(|t| t.starts_with("terminal"));
        let kind = if terminal && width > 0.0 && height > 0.0 {
            CellKind::Macro
        } else if terminal {
            CellKind::FixedTerminal
        } else {
            CellKind::Standard
        };
        cells.push(CellRecord {
            name: toks[0].to_string(),
            width,
            height,
            kind,
        });
    }
    if let Some(n) = declared {
        if n != cells.len() {
            return Err(Error::parse(
                path,
                0,
                format!("NumNodes declares {n} nodes but {} were found", cells.len()),
            ));
        }
    }
    Ok(cells)
}

/// Raw pins: cell index plus center-relative offsets as written in the file.
struct RawNet {
    pins: Vec<(usize, f64, f64)>,
}

fn parse_nets(path: &Path, index_of: &HashMap<&str, usize>) -> Result<Vec<RawNet>> {
    let mut nets: Vec<RawNet> = Vec::new();
    let mut remaining = 0usize;
    let mut declared = None;
    for (ln, line) in open_lines(path)? {
        if !is_content(&line) {
            continue;
        }
        if let Some(v) = keyed_value(&line, "NumNets") {
            declared = Some(parse_count(path, ln, v)?);
            continue;
        }
        if keyed_value(&line, "NumPins").is_some() {
            continue;
        }
        if let Some(v) = keyed_value(&line, "NetDegree") {
            if remaining > 0 {
                return Err(Error::parse(path, ln, "previous net is missing pin lines"));
            }
            remaining = parse_count(path, ln, v)?;
            nets.push(RawNet { pins: Vec::with_capacity(remaining) });
            continue;
        }
        if remaining == 0 {
            return Err(Error::parse(path, ln, format!("unexpected line '{}'", line.trim())));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let name = toks[0];
        let &cell = index_of.get(name).ok_or_else(|| Error::UnknownCell {
            net: format!("#{}", nets.len() - 1),
            cell: name.to_string(),
        })?;
        let (mut dx, mut dy) = (0.0, 0.0);
        if let Some(colon) = toks.iter().position(|&t| t == ":") {
            if toks.len() < colon + 3 {
                return Err(Error::parse(path, ln, "pin offsets missing after ':'"));
            }
            dx = parse_f64(path, ln, toks[colon + 1])?;
            dy = parse_f64(path, ln, toks[colon + 2])?;
        }
        nets.last_mut().unwrap().pins.push((cell, dx, dy));
        remaining -= 1;
    }
    if remaining > 0 {
        return Err(Error::parse(path, 0, "file ends inside a net's pin list"));
    }
    if let Some(n) = declared {
        if n != nets.len() {
            return Err(Error::parse(
                path,
                0,
                format!("NumNets declares {n} nets but {} were found", nets.len()),
            ));
        }
    }
    Ok(nets)
}

/// Canvas extents from the `.scl` row geometry: x spans the union of row
/// spans (`SubrowOrigin` to `SubrowOrigin + NumSites * Sitewidth`), y spans
/// the rows themselves.
fn parse_scl(path: &Path) -> Result<(f64, f64, f64, f64)> {
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut coord = None;
    let mut height = None;
    let mut sitewidth = 1.0;
    for (ln, line) in open_lines(path)? {
        if !is_content(&line) {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if let Some(v) = keyed_value(&lower, "coordinate") {
            coord = Some(parse_f64(path, ln, v)?);
        } else if let Some(v) = keyed_value(&lower, "height") {
            height = Some(parse_f64(path, ln, v)?);
        } else if let Some(v) = keyed_value(&lower, "sitewidth") {
            sitewidth = parse_f64(path, ln, v)?;
        } else if let Some(origin) = keyed_value(&lower, "subroworigin") {
            let origin = parse_f64(path, ln, origin)?;
            let sites = match lower.find("numsites") {
                Some(at) => keyed_value(&lower[at..], "numsites")
                    .map(|v| parse_f64(path, ln, v))
                    .transpose()?
                    .unwrap_or(0.0),
                None => 0.0,
            };
            x0 = x0.min(origin);
            x1 = x1.max(origin + sites * sitewidth);
            let (Some(c), Some(h)) = (coord, height) else {
                return Err(Error::parse(path, ln, "subrow before Coordinate/Height"));
            };
            y0 = y0.min(c);
            y1 = y1.max(c + h);
        } else if lower.trim_start().starts_with("end") {
            // Row scope closed; the next row declares its own geometry.
            coord = None;
            height = None;
            sitewidth = 1.0;
        }
    }
    let (w, h) = (x1 - x0, y1 - y0);
    if !(w > 0.0 && h > 0.0) {
        return Err(Error::BadCanvas { width: w, height: h });
    }
    Ok((x0, y0, w, h))
}

/// One `.pl` line: `name x y [: orient [/FIXED]]`.
fn parse_pl_line<'a>(
    path: &Path,
    ln: usize,
    line: &'a str,
) -> Result<(&'a str, f64, f64, String, bool)> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() < 3 {
        return Err(Error::parse(path, ln, format!("malformed placement line '{}'", line.trim())));
    }
    let x = parse_f64(path, ln, toks[1])?;
    let y = parse_f64(path, ln, toks[2])?;
    let orient = match toks.iter().position(|&t| t == ":") {
        Some(c) => toks
            .get(c + 1)
            .filter(|t| !t.starts_with('/'))
            .unwrap_or(&"N")
            .to_string(),
        None => "N".to_string(),
    };
    let fixed = toks.contains(&"/FIXED");
    Ok((toks[0], x, y, orient, fixed))
}

/// Parse a `.aux` manifest into a [`Netlist`].
pub fn parse_aux(path: &Path, options: ParseOptions) -> Result<Netlist> {
    let files = parse_aux_manifest(path)?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("design")
        .to_string();

    let cells = parse_nodes(&files.nodes)?;
    let index_of: HashMap<&str, usize> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| (c.name.as_str(), i))
        .collect();
    let raw_nets = parse_nets(&files.nets, &index_of)?;
    let (ox, oy, width, height) = parse_scl(&files.scl)?;

    let mut source_positions: Vec<Option<SourcePosition>> = vec![None; cells.len()];
    if let Some(pl) = &files.pl {
        for (ln, line) in open_lines(pl)? {
            if !is_content(&line) {
                continue;
            }
            let (cell_name, x, y, orient, fixed) = parse_pl_line(pl, ln, &line)?;
            if let Some(&ci) = index_of.get(cell_name) {
                source_positions[ci] = Some(SourcePosition {
                    x: x - ox,
                    y: y - oy,
                    orient,
                    fixed,
                });
            }
        }
    }

    // Normalize pin offsets from center-relative to bottom-left-relative,
    // clamped into the cell box; collect fixed pin sites when asked to.
    let mut nets = Vec::with_capacity(raw_nets.len());
    for (id, raw) in raw_nets.into_iter().enumerate() {
        let mut pins = Vec::with_capacity(raw.pins.len());
        let mut fixed_pins = Vec::new();
        for (cell, dx, dy) in raw.pins {
            let c = &cells[cell];
            let bl_dx = (dx + c.width / 2.0).clamp(0.0, c.width);
            let bl_dy = (dy + c.height / 2.0).clamp(0.0, c.height);
            if options.include_fixed_pins && c.kind == CellKind::FixedTerminal {
                if let Some(sp) = &source_positions[cell] {
                    fixed_pins.push((sp.x + bl_dx, sp.y + bl_dy));
                }
                continue;
            }
            pins.push(PinRef {
                cell,
                dx: bl_dx,
                dy: bl_dy,
            });
        }
        nets.push(Net { id, pins, fixed_pins });
    }

    let mut netlist = Netlist::new(name, cells, nets, width, height)?;
    netlist.canvas_origin = (ox, oy);
    netlist.source_positions = source_positions;
    Ok(netlist)
}

/// Read macro coordinates from a `.pl` file as a genotype, translating into
/// canvas-relative form and clamping into the canvas. Returns the genotype
/// and the number of clamped coordinates.
pub fn read_placement(path: &Path, netlist: &Netlist) -> Result<(Genotype, usize)> {
    let mut coords_by_name: HashMap<String, (f64, f64)> = HashMap::new();
    for (ln, line) in open_lines(path)? {
        if !is_content(&line) {
            continue;
        }
        let (name, x, y, _, _) = parse_pl_line(path, ln, &line)?;
        coords_by_name.insert(name.to_string(), (x, y));
    }

    let (ox, oy) = netlist.canvas_origin;
    let mut coords = Vec::with_capacity(2 * netlist.k());
    let mut warnings = 0usize;
    for &ci in &netlist.macro_ids {
        let name = &netlist.cells[ci].name;
        let &(x, y) = coords_by_name
            .get(name)
            .ok_or_else(|| Error::MissingMacro { name: name.clone() })?;
        let mut clamp = |v: f64, hi: f64| {
            if (0.0..=hi).contains(&v) {
                v
            } else {
                warnings += 1;
                v.clamp(0.0, hi)
            }
        };
        coords.push(clamp(x - ox, netlist.canvas_width));
        coords.push(clamp(y - oy, netlist.canvas_height));
    }
    Ok((Genotype::new(coords), warnings))
}

/// Write a placement as a `.pl` file: macros at their new positions, any
/// other cells from the source `.pl` passed through. The placement must be
/// feasible and overlap-free, or nothing is written.
pub fn write_placement(placement: &Placement, netlist: &Netlist, path: &Path) -> Result<()> {
    if !placement.feasible || placement.positions.len() != netlist.k() {
        return Err(Error::Infeasible(
            "refusing to write an infeasible placement".into(),
        ));
    }
    let eps = edge_tolerance(netlist);
    for (a, &ia) in netlist.macro_ids.iter().enumerate() {
        let ra = macro_rect(netlist, ia, placement.positions[a]);
        for (b, &ib) in netlist.macro_ids.iter().enumerate().skip(a + 1) {
            let rb = macro_rect(netlist, ib, placement.positions[b]);
            if ra.overlaps(&rb, eps) {
                return Err(Error::Infeasible(format!(
                    "macros '{}' and '{}' overlap",
                    netlist.cells[ia].name, netlist.cells[ib].name
                )));
            }
        }
    }

    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let (ox, oy) = netlist.canvas_origin;
    let emit = |w: &mut BufWriter<File>, line: String| -> Result<()> {
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))
    };
    emit(&mut w, "UCLA pl 1.0".into())?;
    for (ci, cell) in netlist.cells.iter().enumerate() {
        match netlist.macro_index_of(ci) {
            Some(mi) => {
                let (x, y) = placement.positions[mi];
                emit(&mut w, format!("{} {} {} : N", cell.name, x + ox, y + oy))?;
            }
            None => {
                if let Some(sp) = &netlist.source_positions[ci] {
                    let fixed = if sp.fixed { " /FIXED" } else { "" };
                    emit(
                        &mut w,
                        format!("{} {} {} : {}{}", cell.name, sp.x + ox, sp.y + oy, sp.orient, fixed),
                    )?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn edge_tolerance(netlist: &Netlist) -> f64 {
    crate::grid::EDGE_TOL
        * netlist
            .canvas_width
            .max(netlist.canvas_height)
            .max(1.0)
}

fn macro_rect(netlist: &Netlist, cell: usize, pos: (f64, f64)) -> crate::grid::Rect {
    let c = &netlist.cells[cell];
    crate::grid::Rect {
        x1: pos.0,
        y1: pos.1,
        x2: pos.0 + c.width,
        y2: pos.1 + c.height,
    }
}
