//! Hot-path benchmarks: macro ordering, a single wire-mask build, a full
//! greedy evaluation, congestion mapping, and local-search refinement.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use macroplace_bench::{genotype_for, synthetic_design};
use macroplace_core::{
    congestion, evaluate, local_search, order_macros, wire_mask, CongestionMode, GridSpec,
    LocalSearchConfig, NetBoxes, Occupancy, OrderingStrategy,
};

fn bench_ordering(c: &mut Criterion) {
    let netlist = synthetic_design(128, 128, 512, 11);
    c.bench_function("order_macros/connected-area/k128", |b| {
        b.iter(|| order_macros(black_box(&netlist), OrderingStrategy::ConnectedArea))
    });
}

fn bench_wire_mask(c: &mut Criterion) {
    let netlist = synthetic_design(64, 128, 256, 3);
    let grid = GridSpec::new(&netlist, 128);
    let order = order_macros(&netlist, OrderingStrategy::ConnectedArea);
    // Box state right before the last macro's step.
    let genotype = genotype_for(&netlist, 5);
    let placement = evaluate(&genotype, &netlist, &grid, &order).unwrap();
    let mut boxes = NetBoxes::new(&netlist);
    for &mi in &order.sequence[..order.sequence.len() - 1] {
        let (x, y) = placement.positions[mi];
        boxes.insert_macro(&netlist, mi, x, y);
    }
    let occupancy = Occupancy::new(grid.m);
    let last = *order.sequence.last().unwrap();
    c.bench_function("wire_mask/m128", |b| {
        b.iter(|| wire_mask(black_box(&netlist), last, &boxes, &occupancy, &grid))
    });
}

fn bench_evaluate(c: &mut Criterion) {
    let netlist = synthetic_design(64, 128, 256, 3);
    let grid = GridSpec::new(&netlist, 128);
    let order = order_macros(&netlist, OrderingStrategy::ConnectedArea);
    let genotype = genotype_for(&netlist, 5);
    c.bench_function("evaluate/k64-m128", |b| {
        b.iter(|| evaluate(black_box(&genotype), &netlist, &grid, &order).unwrap())
    });
}

fn bench_congestion(c: &mut Criterion) {
    let netlist = synthetic_design(64, 128, 256, 3);
    let grid = GridSpec::new(&netlist, 128);
    let order = order_macros(&netlist, OrderingStrategy::ConnectedArea);
    let placement = evaluate(&genotype_for(&netlist, 5), &netlist, &grid, &order).unwrap();
    c.bench_function("congestion/covered/m128", |b| {
        b.iter(|| congestion(black_box(&placement), &netlist, &grid, CongestionMode::Covered))
    });
}

fn bench_local_search(c: &mut Criterion) {
    let netlist = synthetic_design(16, 32, 64, 9);
    let grid = GridSpec::new(&netlist, 32);
    let order = order_macros(&netlist, OrderingStrategy::ConnectedArea);
    let placement = evaluate(&genotype_for(&netlist, 5), &netlist, &grid, &order).unwrap();
    c.bench_function("local_search/k16-m32", |b| {
        b.iter(|| {
            let mut config = LocalSearchConfig::new(order.clone(), 7);
            local_search(black_box(&placement), &netlist, &grid, &mut config).unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_ordering,
    bench_wire_mask,
    bench_evaluate,
    bench_congestion,
    bench_local_search
);
criterion_main!(benches);
