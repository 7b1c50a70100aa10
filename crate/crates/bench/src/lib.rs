//! Deterministic synthetic designs for benchmarking: sized like mid-range
//! floorplans, generated from a tiny splitmix-style stream so benches need
//! no RNG dependency and never drift between runs.

use macroplace_core::{CellKind, CellRecord, Genotype, Net, Netlist, PinRef};

fn mix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn pick(state: &mut u64, lo: u64, hi: u64) -> u64 {
    lo + mix(state) % (hi - lo + 1)
}

/// A `k`-macro design on an `m x m`-cell canvas (unit cells) with
/// `net_count` nets of degree 2..=4. Macro sides span 1..=3 cells, so the
/// canvas stays sparse and every genotype legalizes.
pub fn synthetic_design(k: usize, m: usize, net_count: usize, seed: u64) -> Netlist {
    assert!(k >= 2 && m >= 8);
    let mut state = seed ^ 0xA076_1D64_78BD_642F;
    let canvas = m as f64;

    let cells: Vec<CellRecord> = (0..k)
        .map(|i| CellRecord {
            name: format!("macro{i}"),
            width: pick(&mut state, 1, 3) as f64,
            height: pick(&mut state, 1, 3) as f64,
            kind: CellKind::Macro,
        })
        .collect();

    let mut nets = Vec::with_capacity(net_count);
    for id in 0..net_count {
        let degree = pick(&mut state, 2, 4.min(k as u64)) as usize;
        let mut members = Vec::with_capacity(degree);
        while members.len() < degree {
            let cell = pick(&mut state, 0, k as u64 - 1) as usize;
            if !members.contains(&cell) {
                members.push(cell);
            }
        }
        let pins = members
            .into_iter()
            .map(|cell| {
                let c = &cells[cell];
                PinRef {
                    cell,
                    dx: pick(&mut state, 0, 2) as f64 * c.width / 2.0,
                    dy: pick(&mut state, 0, 2) as f64 * c.height / 2.0,
                }
            })
            .collect();
        nets.push(Net {
            id,
            pins,
            fixed_pins: Vec::new(),
        });
    }

    Netlist::new(format!("synthetic-k{k}-m{m}"), cells, nets, canvas, canvas)
        .expect("generator keeps dimensions legal")
}

/// A deterministic genotype spread over the canvas.
pub fn genotype_for(netlist: &Netlist, seed: u64) -> Genotype {
    let mut state = seed ^ 0x9E6C_63D0_876A_9A7D;
    let mut coords = Vec::with_capacity(2 * netlist.k());
    for _ in 0..netlist.k() {
        coords.push(pick(&mut state, 0, 1000) as f64 / 1000.0 * netlist.canvas_width);
        coords.push(pick(&mut state, 0, 1000) as f64 / 1000.0 * netlist.canvas_height);
    }
    Genotype::new(coords)
}
