//! Solvers for the multiperiod workforce scheduling and routing problem
//! with dependent tasks.
//!
//! Teams leave a depot every day, travel between customers and execute the
//! tasks of the services those customers requested. Tasks of one service
//! are linked by precedence arcs, teams have task-specific execution times
//! (possibly none at all) and every route must be back at the depot within
//! the day. The goal is to finish everything in as few days as possible.
//!
//! * [`instances`] generates random instances and reads/writes them.
//! * [`constructive`] is the event-driven constructive heuristic.
//! * [`aco`] runs AS, MMAS and ACS on top of it.
//! * [`oracle`] enumerates every construction of tiny instances.
//! * [`validate`] re-checks solutions against the model constraints.
//! * [`mip_export`] writes the MIP model in LP format.

pub mod aco;
pub mod constructive;
pub mod instances;
pub mod mip_export;
pub mod model;
pub mod oracle;
pub mod validate;

pub use aco::{AcoParams, ComponentKey, Encoding, PheromoneTable, Variant};
pub use constructive::{construct, construct_greedy, Candidate, Decision, SelectionRule};
pub use instances::{generate, read_instance, write_instance, GeneratorConfig};
pub use model::{
    evaluate, Instance, InstanceParts, InstanceType, ObjectiveValue, Service, Solution, TaskRef, TaskTime, TimePoint,
    Vertex, Visit,
};
pub use validate::{check_feasible, read_solution, write_solution, FeasibilityReport, ViolationCode};
