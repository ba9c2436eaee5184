mod common;

use mwsrpdt_core::mip_export::{lint_lp, model_to_string};
use mwsrpdt_core::{Instance, InstanceType, TaskTime};

/// Counts derived from the instance data alone.
fn expected(inst: &Instance, horizon: usize) -> (usize, usize, usize) {
    let tasks: Vec<_> = inst.tasks().collect();
    let n = tasks.len();
    let mut arcs = 0;
    let mut usable = 0;
    let mut active = 0;
    for k in 1..=inst.teams() {
        let m = tasks.iter().filter(|&&t| matches!(inst.task_time(k, t), TaskTime::Finite(_))).count();
        arcs += (m + 1) * m;
        usable += m;
        active += usize::from(m > 0);
    }
    let precedences: usize = inst.customers().map(|i| inst.service_of(i).deps.len()).sum();
    let binaries = horizon * arcs + inst.teams() * horizon * n;
    let continuous = horizon * arcs;
    let constraints = n + precedences + 4 * horizon * usable + horizon * arcs + 2 * horizon * active;
    (binaries, continuous, constraints)
}

#[test]
fn counts_match_closed_forms() {
    let cases = [
        (3, InstanceType::A, 1, 1, 1),
        (4, InstanceType::A, 2, 3, 2),
        (5, InstanceType::B, 3, 2, 3),
        (6, InstanceType::C, 4, 3, 2),
        (8, InstanceType::B, 5, 3, 4),
    ];
    for (n, ty, seed, teams, horizon) in cases {
        let inst = common::generated(n, ty, seed);
        let inst = if teams < inst.teams() { inst.with_teams(teams).unwrap_or(inst) } else { inst };
        let (binaries, continuous, constraints) = expected(&inst, horizon);
        let (text, stats) = model_to_string(&inst, horizon as u32).unwrap();
        assert_eq!(
            (stats.num_binary, stats.num_continuous, stats.num_general_integer, stats.num_constraints),
            (binaries, continuous, 1, constraints),
            "n={n} type={ty} K={} H={horizon}",
            inst.teams()
        );
        let lint = lint_lp(&text).unwrap();
        assert_eq!(
            (lint.binaries, lint.continuous, lint.generals, lint.constraints),
            (binaries, continuous, 1, constraints)
        );
    }
}

#[test]
fn full_skill_reduces_to_complete_graph() {
    let inst = common::generated(4, InstanceType::A, 7);
    let v = inst.total_tasks() + 1;
    let k = inst.teams();
    let (_, stats) = model_to_string(&inst, 2).unwrap();
    assert_eq!(stats.num_continuous, 2 * k * v * (v - 1));
    assert_eq!(stats.num_binary, 2 * k * v * (v - 1) + k * 2 * (v - 1));
}
