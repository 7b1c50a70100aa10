//! End-to-end searches on the small fixture: random search, the (1+1)-EA,
//! and warm-started fine-tuning all drive the greedy mapping close to (or
//! onto) the exhaustively enumerated optimum.

mod common;

use common::*;
use macroplace_core::{evaluate, finetune, run_ea, run_rs, Budget, Genotype, MutationOp};

#[test]
fn random_search_lands_within_five_percent_of_the_optimum() {
    let (toy, _) = worked_example();
    let grid = toy.grid();
    let order = toy.order();
    let optimum = exhaustive_optimum(&toy.netlist, &grid).unwrap();
    let log = run_rs(&toy.netlist, &grid, &order, &Budget::evaluations(10_000), 5, 4).unwrap();
    assert!(log.final_best.1.feasible);
    assert!(
        log.final_best.1.hpwl <= 1.05 * optimum,
        "best {} vs optimum {optimum}",
        log.final_best.1.hpwl
    );
    assert_eq!(log.evaluations, 10_000);
}

#[test]
fn swap_ea_reaches_the_optimum() {
    let (toy, _) = worked_example();
    let grid = toy.grid();
    let order = toy.order();
    let optimum = exhaustive_optimum(&toy.netlist, &grid).unwrap();
    for seed in [0, 1, 2] {
        let log = run_ea(
            &toy.netlist,
            &grid,
            &order,
            &Budget::evaluations(1_000),
            seed,
            MutationOp::Swap,
            100,
        )
        .unwrap();
        assert!(log.final_best.1.feasible);
        assert_eq!(
            log.final_best.1.hpwl, optimum,
            "seed {seed} stalled above the optimum"
        );
    }
}

#[test]
fn finetuning_a_scrambled_placement_recovers_the_optimum() {
    let (toy, _) = worked_example();
    let grid = toy.grid();
    let order = toy.order();
    let optimum = exhaustive_optimum(&toy.netlist, &grid).unwrap();

    // Macros deliberately thrown to opposite corners of the canvas.
    let scrambled = Genotype::new(vec![4.99, 4.99, 0.0, 0.0, 0.0, 4.99]);
    let start = evaluate(&scrambled, &toy.netlist, &grid, &order).unwrap();
    assert!(
        start.hpwl > optimum,
        "scrambled start must leave room to recover (got {})",
        start.hpwl
    );

    let log = finetune(
        &scrambled,
        &toy.netlist,
        &grid,
        &order,
        &Budget::evaluations(1_000),
        9,
        MutationOp::Mix,
    )
    .unwrap();
    assert!(log.final_best.1.feasible);
    assert_eq!(log.final_best.1.hpwl, optimum);
    // The warm start itself is the first logged evaluation.
    assert_eq!(log.entries.first().map(|e| e.eval), Some(1));
    assert_eq!(
        log.entries.first().map(|e| e.best_hpwl),
        Some(start.hpwl)
    );
}
