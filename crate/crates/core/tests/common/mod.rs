#![allow(dead_code)]

use mwsrpdt_core::instances::{generate, GeneratorConfig};
use mwsrpdt_core::{Instance, InstanceParts, InstanceType, Service, TaskTime};

pub fn generated(n: usize, ty: InstanceType, seed: u64) -> Instance {
    generate(&GeneratorConfig::new(n, ty, seed)).unwrap()
}

/// Leading customers of a generated instance with at most `max_tasks` tasks
/// and `teams` teams. `None` when even one customer is too big or a team
/// set cannot cover every task.
pub fn tiny(ty: InstanceType, seed: u64, max_tasks: usize, teams: usize) -> Option<Instance> {
    let full = generated(6, ty, seed);
    (1..full.n()).rev().find_map(|c| {
        let inst = full.truncated(c).ok()?.with_teams(teams).ok()?;
        (inst.total_tasks() <= max_tasks).then_some(inst)
    })
}

/// Customer `i` requests service `i - 2`; `times[k][s][a]` in hours, with
/// `f64::INFINITY` for tasks the team cannot do.
pub fn hand_built(
    teams: usize,
    coords: Vec<(u32, u32)>,
    services: Vec<Service>,
    times: Vec<Vec<Vec<f64>>>,
) -> Instance {
    let requested = (0..coords.len() - 1).collect();
    let times = times
        .into_iter()
        .map(|team| {
            team.into_iter()
                .map(|svc| {
                    svc.into_iter()
                        .map(|h| if h.is_finite() { TaskTime::Finite(h) } else { TaskTime::Infinite })
                        .collect()
                })
                .collect()
        })
        .collect();
    Instance::new(InstanceParts {
        teams,
        day_length: 8.0,
        coords,
        services,
        requested,
        times,
        instance_type: InstanceType::A,
        seed: 0,
    })
    .unwrap()
}
