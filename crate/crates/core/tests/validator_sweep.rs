mod common;

use mwsrpdt_core::aco::{self, AcoParams, Variant};
use mwsrpdt_core::validate::recompute_objective;
use mwsrpdt_core::{check_feasible, construct_greedy, evaluate, read_solution, write_solution, InstanceType};

#[test]
fn every_produced_solution_is_feasible() {
    for ty in [InstanceType::A, InstanceType::B, InstanceType::C] {
        for n in [2, 5, 9] {
            for seed in 0..4 {
                let inst = common::generated(n, ty, seed);
                let mut sols = vec![construct_greedy(&inst).unwrap()];
                for variant in [Variant::AntSystem, Variant::MaxMin, Variant::ColonySystem] {
                    let params = AcoParams { num_ants: 4, max_iter: 3, seed, ..AcoParams::defaults(variant) };
                    sols.push(aco::run(&inst, &params, None).unwrap().best.solution);
                }
                for sol in sols {
                    let report = check_feasible(&inst, &sol);
                    assert!(report.ok(), "{ty} n={n} seed={seed}: {:?}", report.violations);
                    let back = read_solution(&write_solution(&sol)).unwrap();
                    assert!(check_feasible(&inst, &back).ok());
                    assert_eq!(recompute_objective(&inst, &sol).unwrap(), evaluate(&inst, &sol).unwrap());
                }
            }
        }
    }
}
