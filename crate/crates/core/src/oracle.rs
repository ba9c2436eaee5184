//! Exhaustive search for tiny instances.
//!
//! The search branches on every candidate of every decision of the
//! constructive simulation, so its feasible set is exactly the schedules
//! the heuristics can produce: teams are re-dispatched only when they
//! finish a task and go home once nothing fits. This is the reference the
//! heuristics are measured against. It is not the optimum of the MIP model,
//! which admits more waiting patterns.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::constructive::{construct_greedy, ConstructError, Simulator};
use crate::model::{evaluate, Instance, ObjectiveValue, Solution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("instance has {tasks} tasks, the oracle accepts at most {max}")]
    TooManyTasks { tasks: usize, max: usize },
    #[error("instance has {0} teams, the oracle accepts at most 3")]
    TooManyTeams(usize),
    #[error("search budget exhausted after {nodes} nodes")]
    BudgetExceeded { nodes: u64 },
    #[error(transparent)]
    Construct(#[from] ConstructError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleLimits {
    pub max_tasks: usize,
    pub max_nodes: u64,
    pub wall_clock: Option<Duration>,
    /// Prune branches whose lower bound cannot beat the incumbent.
    pub bound_pruning: bool,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_tasks: 7, max_nodes: 50_000_000, wall_clock: None, bound_pruning: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub optimal: ObjectiveValue,
    pub solution: Solution,
    pub nodes_explored: u64,
}

struct Search<'a> {
    limits: OracleLimits,
    started: Instant,
    nodes: u64,
    best: Option<(f64, Solution)>,
    inst: &'a Instance,
}

impl Search<'_> {
    fn tick(&mut self) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            return Err(OracleError::BudgetExceeded { nodes: self.nodes });
        }
        if self.nodes.is_multiple_of(1024) {
            if let Some(limit) = self.limits.wall_clock {
                if self.started.elapsed() >= limit {
                    return Err(OracleError::BudgetExceeded { nodes: self.nodes });
                }
            }
        }
        Ok(())
    }

    fn incumbent(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |(f, _)| *f)
    }

    fn explore(&mut self, mut sim: Simulator<'_>) -> Result<(), OracleError> {
        loop {
            if self.limits.bound_pruning && sim.fprime_lower_bound() >= self.incumbent() - 1e-12 {
                return Ok(());
            }
            let count = match sim.next_decision() {
                Ok(Some(d)) => d.candidates.len(),
                Ok(None) => break,
                // Nothing fits in a day on this branch.
                Err(ConstructError::StalledDay { .. }) => return Ok(()),
            };
            self.tick()?;
            if count == 1 {
                sim.choose(0);
                continue;
            }
            for i in 1..count {
                let mut child = sim.clone();
                child.choose(i);
                self.explore(child)?;
            }
            sim.choose(0);
        }
        let solution = sim.finish().solution;
        let f = evaluate(self.inst, &solution).expect("complete constructions are non-empty").fprime;
        if f < self.incumbent() {
            self.best = Some((f, solution));
        }
        Ok(())
    }
}

/// Optimal schedule among those the constructive simulation can reach.
pub fn solve_exact(inst: &Instance, limits: OracleLimits) -> Result<OracleResult, OracleError> {
    let tasks = inst.total_tasks();
    if tasks > limits.max_tasks {
        return Err(OracleError::TooManyTasks { tasks, max: limits.max_tasks });
    }
    if inst.teams() > 3 {
        return Err(OracleError::TooManyTeams(inst.teams()));
    }
    let mut search = Search { limits, started: Instant::now(), nodes: 0, best: None, inst };
    search.explore(Simulator::new(inst))?;
    match search.best {
        Some((_, solution)) => Ok(OracleResult {
            optimal: evaluate(inst, &solution).expect("non-empty"),
            solution,
            nodes_explored: search.nodes,
        }),
        // Every branch stalled: report what the heuristic reports.
        None => Err(construct_greedy(inst).err().unwrap_or(ConstructError::StalledDay { day: 1 }).into()),
    }
}
