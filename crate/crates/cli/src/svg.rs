//! Deterministic SVG rendering of a placement: canvas frame, optional grid
//! lines, and one filled rectangle per macro at its exact geometry.

use macroplace_core::{GridSpec, Netlist};

/// Shortest round-trip decimal; stable for fixed input bits.
fn num(v: f64) -> String {
    format!("{v}")
}

/// Render macros at `positions` (canvas-relative bottom-left corners). Grid
/// lines are drawn as a single path when `grid` is given, so the rectangle
/// count stays `macros + 1` (the canvas frame). Output bytes depend only on
/// the inputs.
pub fn render(netlist: &Netlist, positions: &[(f64, f64)], grid: Option<&GridSpec>) -> String {
    let w = netlist.canvas_width;
    let h = netlist.canvas_height;
    let stroke = (w.max(h) / 400.0).max(1e-9);
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n",
        num(-stroke),
        num(-stroke),
        num(w + 2.0 * stroke),
        num(h + 2.0 * stroke),
    ));

    if let Some(g) = grid {
        let mut d = String::new();
        for i in 1..g.m {
            d.push_str(&format!("M{} 0V{}", num(i as f64 * g.cell_w), num(h)));
        }
        for j in 1..g.m {
            d.push_str(&format!("M0 {}H{}", num(h - j as f64 * g.cell_h), num(w)));
        }
        if !d.is_empty() {
            out.push_str(&format!(
                "<path d=\"{d}\" fill=\"none\" stroke=\"#d9d9d9\" stroke-width=\"{}\"/>\n",
                num(stroke / 2.0)
            ));
        }
    }

    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333333\" stroke-width=\"{}\"/>\n",
        num(w),
        num(h),
        num(stroke)
    ));

    // SVG y grows downward; the chip's y grows upward.
    for (mi, &(x, y)) in positions.iter().enumerate() {
        let c = netlist.macro_cell(mi);
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#f2c94c\" stroke=\"#8a6d1a\" stroke-width=\"{}\"/>\n",
            num(x),
            num(h - (y + c.height)),
            num(c.width),
            num(c.height),
            num(stroke / 2.0)
        ));
    }

    out.push_str("</svg>\n");
    out
}
