//! Problem model shared by every solver: instances, the extended graph,
//! timed solutions and the fractional makespan objective.
//!
//! Indexing follows the problem statement: vertex `1` is the depot and
//! customers are `2..=n`; teams are `1..=K`. Services and the tasks inside a
//! service are zero-based.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Absolute tolerance, in hours, for every time comparison.
pub const EPS: f64 = 1e-9;

/// Travel speed used to turn grid distances into hours.
pub const SPEED_KMH: f64 = 40.0;
/// Distance between adjacent grid rows/columns.
pub const GRID_STEP_KM: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("solution has no visits")]
    EmptySolution,
    #[error("task {0} does not belong to the instance")]
    UnknownTask(TaskRef),
}

/// A task requested by a customer: a vertex of the extended graph other
/// than the depot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskRef {
    pub customer: usize,
    pub task: usize,
}

impl TaskRef {
    pub const fn new(customer: usize, task: usize) -> Self {
        Self { customer, task }
    }
}

impl fmt::Display for TaskRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.customer, self.task)
    }
}

/// Vertex of the extended graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    Depot,
    Task(TaskRef),
}

impl Vertex {
    pub fn task(self) -> Option<TaskRef> {
        match self {
            Vertex::Depot => None,
            Vertex::Task(t) => Some(t),
        }
    }

    /// Underlying vertex of the original graph.
    pub fn site(self) -> usize {
        match self {
            Vertex::Depot => 1,
            Vertex::Task(t) => t.customer,
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Depot => f.write_str("depot"),
            Vertex::Task(t) => t.fmt(f),
        }
    }
}

/// Execution time of a task by a team. A team without the required skill
/// has an `Infinite` time; it is never represented as a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TaskTime {
    Finite(f64),
    Infinite,
}

impl TaskTime {
    pub fn hours(self) -> Option<f64> {
        match self {
            TaskTime::Finite(h) => Some(h),
            TaskTime::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, TaskTime::Finite(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InstanceType {
    A,
    B,
    C,
}

impl fmt::Display for InstanceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceType::A => "A",
            InstanceType::B => "B",
            InstanceType::C => "C",
        })
    }
}

impl FromStr for InstanceType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(InstanceType::A),
            "B" | "b" => Ok(InstanceType::B),
            "C" | "c" => Ok(InstanceType::C),
            other => Err(format!("unknown instance type `{other}` (expected A, B or C)")),
        }
    }
}

/// A service: tasks `0..num_tasks` plus precedence arcs. `(a, b)` in `deps`
/// means task `a` may only start once task `b` has completed.
#[derive(Debug, Clone, PartialEq)]
pub struct Service {
    pub id: usize,
    pub num_tasks: usize,
    pub deps: Vec<(usize, usize)>,
}

impl Service {
    pub fn new(id: usize, num_tasks: usize, deps: Vec<(usize, usize)>) -> Self {
        Self { id, num_tasks, deps }
    }

    /// Tasks that must complete before `task` may start.
    pub fn predecessors(&self, task: usize) -> impl Iterator<Item = usize> + '_ {
        self.deps.iter().filter(move |&&(a, _)| a == task).map(|&(_, b)| b)
    }

    /// Tasks that wait on `task`.
    pub fn successors(&self, task: usize) -> impl Iterator<Item = usize> + '_ {
        self.deps.iter().filter(move |&&(_, b)| b == task).map(|&(a, _)| a)
    }

    fn check(&self) -> Result<(), String> {
        for &(a, b) in &self.deps {
            if a >= self.num_tasks || b >= self.num_tasks {
                return Err(format!("service {}: dependency ({a}, {b}) out of range", self.id));
            }
            if a == b {
                return Err(format!("service {}: task {a} depends on itself", self.id));
            }
        }
        // Kahn's algorithm; anything left over sits on a cycle.
        let mut indegree = vec![0usize; self.num_tasks];
        for &(a, _) in &self.deps {
            indegree[a] += 1;
        }
        let mut ready: Vec<usize> = (0..self.num_tasks).filter(|&t| indegree[t] == 0).collect();
        let mut seen = 0;
        while let Some(b) = ready.pop() {
            seen += 1;
            for &(a, bb) in &self.deps {
                if bb == b {
                    indegree[a] -= 1;
                    if indegree[a] == 0 {
                        ready.push(a);
                    }
                }
            }
        }
        if seen != self.num_tasks {
            return Err(format!("service {}: dependencies contain a cycle", self.id));
        }
        Ok(())
    }
}

/// Raw instance data. Converted into a validated [`Instance`] with
/// [`Instance::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceParts {
    pub teams: usize,
    /// Day length `D`, hours.
    pub day_length: f64,
    /// Grid coordinates; index 0 is the depot (vertex 1).
    pub coords: Vec<(u32, u32)>,
    pub services: Vec<Service>,
    /// Requested service per customer; index 0 is vertex 2.
    pub requested: Vec<usize>,
    /// `times[team - 1][service][task]`.
    pub times: Vec<Vec<Vec<TaskTime>>>,
    pub instance_type: InstanceType,
    pub seed: u64,
}

/// A validated, immutable problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    parts: InstanceParts,
}

impl Instance {
    pub fn new(parts: InstanceParts) -> Result<Self, ModelError> {
        check_parts(&parts).map_err(ModelError::InvalidInstance)?;
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &InstanceParts {
        &self.parts
    }

    pub fn into_parts(self) -> InstanceParts {
        self.parts
    }

    /// Vertex count, depot included.
    pub fn n(&self) -> usize {
        self.parts.coords.len()
    }

    pub fn teams(&self) -> usize {
        self.parts.teams
    }

    pub fn day_length(&self) -> f64 {
        self.parts.day_length
    }

    pub fn instance_type(&self) -> InstanceType {
        self.parts.instance_type
    }

    pub fn seed(&self) -> u64 {
        self.parts.seed
    }

    pub fn services(&self) -> &[Service] {
        &self.parts.services
    }

    pub fn coord(&self, vertex: usize) -> (u32, u32) {
        self.parts.coords[vertex - 1]
    }

    pub fn customers(&self) -> std::ops::RangeInclusive<usize> {
        2..=self.n()
    }

    pub fn requested_service(&self, customer: usize) -> usize {
        self.parts.requested[customer - 2]
    }

    pub fn service_of(&self, customer: usize) -> &Service {
        &self.parts.services[self.requested_service(customer)]
    }

    pub fn contains(&self, task: TaskRef) -> bool {
        task.customer >= 2 && task.customer <= self.n() && task.task < self.service_of(task.customer).num_tasks
    }

    /// Every `(customer, task)` pair, ordered by customer then task.
    pub fn tasks(&self) -> impl Iterator<Item = TaskRef> + '_ {
        self.customers().flat_map(move |i| (0..self.service_of(i).num_tasks).map(move |a| TaskRef::new(i, a)))
    }

    pub fn total_tasks(&self) -> usize {
        self.customers().map(|i| self.service_of(i).num_tasks).sum()
    }

    /// `t^k_{ia}`; `team` is 1-based.
    pub fn task_time(&self, team: usize, task: TaskRef) -> TaskTime {
        self.parts.times[team - 1][self.requested_service(task.customer)][task.task]
    }

    /// Time table entry by service rather than by customer.
    pub fn service_time(&self, team: usize, service: usize, task: usize) -> TaskTime {
        self.parts.times[team - 1][service][task]
    }

    /// Base travel time `d_ij` between original vertices, in hours.
    pub fn travel(&self, i: usize, j: usize) -> f64 {
        let (xi, yi) = self.coord(i);
        let (xj, yj) = self.coord(j);
        let grid = xi.abs_diff(xj) + yi.abs_diff(yj);
        GRID_STEP_KM * f64::from(grid) / SPEED_KMH
    }

    /// Travel time `d'` on the extended graph. Moving between two tasks of
    /// the same customer is free.
    pub fn extended_travel_time(&self, u: Vertex, v: Vertex) -> f64 {
        match (u, v) {
            (Vertex::Depot, Vertex::Depot) => 0.0,
            (Vertex::Task(a), Vertex::Task(b)) if a.customer == b.customer => 0.0,
            _ => self.travel(u.site(), v.site()),
        }
    }

    /// Copy keeping only the first `customers` customers.
    pub fn truncated(&self, customers: usize) -> Result<Instance, ModelError> {
        let mut parts = self.parts.clone();
        let keep = customers.min(self.n() - 1);
        parts.coords.truncate(keep + 1);
        parts.requested.truncate(keep);
        Instance::new(parts)
    }

    /// Copy keeping only teams `1..=teams`. Fails when some requested task
    /// is left without a capable team.
    pub fn with_teams(&self, teams: usize) -> Result<Instance, ModelError> {
        let mut parts = self.parts.clone();
        parts.teams = teams;
        parts.times.truncate(teams);
        Instance::new(parts)
    }
}

fn check_parts(p: &InstanceParts) -> Result<(), String> {
    if p.teams == 0 {
        return Err("at least one team is required".into());
    }
    if !(p.day_length.is_finite() && p.day_length > 0.0) {
        return Err(format!("day length must be positive, got {}", p.day_length));
    }
    if p.coords.len() < 2 {
        return Err("at least one customer besides the depot is required".into());
    }
    if p.requested.len() != p.coords.len() - 1 {
        return Err(format!("expected {} service requests, got {}", p.coords.len() - 1, p.requested.len()));
    }
    for (idx, s) in p.services.iter().enumerate() {
        if s.id != idx {
            return Err(format!("service at position {idx} has id {}", s.id));
        }
        s.check()?;
    }
    for (idx, &s) in p.requested.iter().enumerate() {
        if s >= p.services.len() {
            return Err(format!("customer {} requests unknown service {s}", idx + 2));
        }
    }
    if p.times.len() != p.teams {
        return Err(format!("time table has {} teams, expected {}", p.times.len(), p.teams));
    }
    for (k, per_team) in p.times.iter().enumerate() {
        if per_team.len() != p.services.len() {
            return Err(format!("team {} has times for {} services", k + 1, per_team.len()));
        }
        for (s, row) in per_team.iter().enumerate() {
            if row.len() != p.services[s].num_tasks {
                return Err(format!("team {} service {s}: wrong number of task times", k + 1));
            }
            for (a, t) in row.iter().enumerate() {
                if let TaskTime::Finite(h) = *t {
                    if !(h.is_finite() && h > 0.0) {
                        return Err(format!("team {} service {s} task {a}: time {h} is not positive", k + 1));
                    }
                }
            }
        }
    }
    for &s in &p.requested {
        for a in 0..p.services[s].num_tasks {
            if !p.times.iter().any(|per_team| per_team[s][a].is_finite()) {
                return Err(format!("service {s} task {a} cannot be executed by any team"));
            }
        }
    }
    Ok(())
}

/// A moment expressed as (day, hours within that day).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimePoint {
    pub day: u32,
    pub moment: f64,
}

impl TimePoint {
    pub fn new(day: u32, moment: f64) -> Self {
        Self { day, moment }
    }

    /// Hours since the start of day 1.
    pub fn absolute(self, day_length: f64) -> f64 {
        f64::from(self.day.saturating_sub(1)) * day_length + self.moment
    }
}

/// One task executed by one team on one day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit {
    pub team: usize,
    pub day: u32,
    pub task: TaskRef,
    pub start: f64,
    pub end: f64,
}

/// A complete schedule. `p` and `m` are stored as produced; the validator
/// re-derives them from the visits.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub visits: Vec<Visit>,
    /// Makespan, days.
    pub p: u32,
    /// Completion moment of the last task on day `p`, hours.
    pub m: f64,
}

impl Solution {
    pub fn from_visits(visits: Vec<Visit>) -> Self {
        let p = visits.iter().map(|v| v.day).max().unwrap_or(0);
        let m = visits.iter().filter(|v| v.day == p).map(|v| v.end).fold(0.0, f64::max);
        Self { visits, p, m }
    }

    /// Visit sequence of every (team, day) pair, ordered by start time.
    pub fn routes(&self) -> BTreeMap<(usize, u32), Vec<&Visit>> {
        let mut routes: BTreeMap<(usize, u32), Vec<&Visit>> = BTreeMap::new();
        for v in &self.visits {
            routes.entry((v.team, v.day)).or_default().push(v);
        }
        for route in routes.values_mut() {
            route.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.end.total_cmp(&b.end)));
        }
        routes
    }

    /// Visits sorted by (day, team, start), the on-disk order.
    pub fn sorted_visits(&self) -> Vec<Visit> {
        let mut out = self.visits.clone();
        out.sort_by(|a, b| {
            a.day.cmp(&b.day).then(a.team.cmp(&b.team)).then(a.start.total_cmp(&b.start)).then(a.task.cmp(&b.task))
        });
        out
    }
}

/// `(p, m, f')` with `f' = p - 1 + m / D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub p: u32,
    pub m: f64,
    pub fprime: f64,
}

impl ObjectiveValue {
    pub fn new(p: u32, m: f64, day_length: f64) -> Self {
        Self { p, m, fprime: f64::from(p) - 1.0 + m / day_length }
    }
}

/// Objective of a solution, computed from its visits.
pub fn evaluate(inst: &Instance, sol: &Solution) -> Result<ObjectiveValue, ModelError> {
    if sol.visits.is_empty() {
        return Err(ModelError::EmptySolution);
    }
    if let Some(v) = sol.visits.iter().find(|v| !inst.contains(v.task)) {
        return Err(ModelError::UnknownTask(v.task));
    }
    let p = sol.visits.iter().map(|v| v.day).max().unwrap_or(0);
    let m = sol.visits.iter().filter(|v| v.day == p).map(|v| v.end).fold(f64::NEG_INFINITY, f64::max);
    Ok(ObjectiveValue::new(p, m, inst.day_length()))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// One service containing every task, a single customer located at
    /// `site`, and a uniform time table.
    pub fn single_customer(
        teams: usize,
        site: (u32, u32),
        num_tasks: usize,
        deps: Vec<(usize, usize)>,
        hours: f64,
    ) -> Instance {
        Instance::new(InstanceParts {
            teams,
            day_length: 8.0,
            coords: vec![(0, 0), site],
            services: vec![Service::new(0, num_tasks, deps)],
            requested: vec![0],
            times: vec![vec![vec![TaskTime::Finite(hours); num_tasks]]; teams],
            instance_type: InstanceType::A,
            seed: 0,
        })
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::single_customer;
    use super::*;
    use proptest::prelude::*;

    fn grid(coords: Vec<(u32, u32)>) -> Instance {
        let customers = coords.len() - 1;
        Instance::new(InstanceParts {
            teams: 1,
            day_length: 8.0,
            coords,
            services: vec![Service::new(0, 2, vec![])],
            requested: vec![0; customers],
            times: vec![vec![vec![TaskTime::Finite(1.0); 2]]],
            instance_type: InstanceType::A,
            seed: 0,
        })
        .unwrap()
    }

    #[test]
    fn same_customer_travel_is_free() {
        let inst = single_customer(1, (40, 70), 2, vec![], 1.0);
        let a = Vertex::Task(TaskRef::new(2, 0));
        let b = Vertex::Task(TaskRef::new(2, 1));
        assert_eq!(inst.extended_travel_time(a, b), 0.0);
    }

    #[test]
    fn manhattan_travel_time() {
        let inst = single_customer(1, (10, 10), 1, vec![], 1.0);
        let t = Vertex::Task(TaskRef::new(2, 0));
        assert_eq!(inst.extended_travel_time(Vertex::Depot, t), 0.05);
        assert_eq!(inst.extended_travel_time(t, Vertex::Depot), 0.05);
    }

    #[test]
    fn objective_examples() {
        let inst = single_customer(1, (10, 10), 1, vec![], 1.0);
        let o = ObjectiveValue::new(3, 4.0, 8.0);
        assert_eq!(o.fprime, 2.5);
        let o = ObjectiveValue::new(1, 8.0, 8.0);
        assert_eq!(o.fprime, 1.0);

        let sol =
            Solution::from_visits(vec![Visit { team: 1, day: 1, task: TaskRef::new(2, 0), start: 0.05, end: 1.05 }]);
        let o = evaluate(&inst, &sol).unwrap();
        assert_eq!(o.p, 1);
        assert_eq!(o.m, 1.05);
        assert!((o.fprime - 0.13125).abs() < 1e-12);
    }

    #[test]
    fn empty_solution_is_rejected() {
        let inst = single_customer(1, (10, 10), 1, vec![], 1.0);
        assert_eq!(evaluate(&inst, &Solution::from_visits(vec![])), Err(ModelError::EmptySolution));
    }

    #[test]
    fn unknown_task_is_rejected() {
        let inst = single_customer(1, (10, 10), 1, vec![], 1.0);
        let sol =
            Solution::from_visits(vec![Visit { team: 1, day: 1, task: TaskRef::new(2, 5), start: 0.0, end: 1.0 }]);
        assert_eq!(evaluate(&inst, &sol), Err(ModelError::UnknownTask(TaskRef::new(2, 5))));
    }

    #[test]
    fn cyclic_dependencies_are_rejected() {
        let parts = single_customer(1, (1, 1), 2, vec![], 1.0).into_parts();
        let mut bad = parts.clone();
        bad.services[0].deps = vec![(0, 1), (1, 0)];
        assert!(matches!(Instance::new(bad), Err(ModelError::InvalidInstance(_))));
        let mut bad = parts;
        bad.times[0][0][1] = TaskTime::Infinite;
        assert!(Instance::new(bad).is_err());
    }

    proptest! {
        #[test]
        fn travel_is_a_metric(pts in proptest::collection::vec((0u32..=100, 0u32..=100), 4)) {
            let inst = grid(pts);
            let verts = [
                Vertex::Depot,
                Vertex::Task(TaskRef::new(2, 0)),
                Vertex::Task(TaskRef::new(2, 1)),
                Vertex::Task(TaskRef::new(3, 0)),
                Vertex::Task(TaskRef::new(4, 1)),
            ];
            for &u in &verts {
                for &v in &verts {
                    let uv = inst.extended_travel_time(u, v);
                    prop_assert_eq!(uv, inst.extended_travel_time(v, u));
                    for &w in &verts {
                        let uw = inst.extended_travel_time(u, w);
                        let wv = inst.extended_travel_time(w, v);
                        prop_assert!(uv <= uw + wv + EPS);
                    }
                }
            }
        }

        #[test]
        fn fprime_lies_in_last_day(p in 1u32..50, m in 1e-6f64..=8.0) {
            let o = ObjectiveValue::new(p, m, 8.0);
            prop_assert!(f64::from(p) - 1.0 < o.fprime && o.fprime <= f64::from(p));
        }
    }
}
