//! Independent feasibility checks on a concrete solution, plus the solution
//! file format.
//!
//! The checker only trusts the instance and the visit list. Routes are
//! rebuilt from start times and the objective is recomputed here rather
//! than taken from [`crate::model::evaluate`].

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::instances::ParseError;
use crate::model::{Instance, ObjectiveValue, Solution, TaskRef, TaskTime, Vertex, Visit, EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationCode {
    /// Team index, day or times outside their domains.
    InvalidVisit,
    UnknownTask,
    MissingTask,
    DuplicateTask,
    /// Consecutive visits of a route overlap once travel is accounted for.
    Travel,
    /// First visit of a route starts before the team could reach it.
    DepotDeparture,
    /// Last visit plus the return trip exceeds the day.
    DayLength,
    /// `end - start` differs from the task time, or the time is infinite.
    Duration,
    Precedence,
    Objective,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::InvalidVisit => "INVALID_VISIT",
            ViolationCode::UnknownTask => "UNKNOWN_TASK",
            ViolationCode::MissingTask => "MISSING_TASK",
            ViolationCode::DuplicateTask => "DUPLICATE_TASK",
            ViolationCode::Travel => "TRAVEL",
            ViolationCode::DepotDeparture => "DEPOT_DEPARTURE",
            ViolationCode::DayLength => "DAY_LENGTH",
            ViolationCode::Duration => "DURATION",
            ViolationCode::Precedence => "PRECEDENCE",
            ViolationCode::Objective => "OBJECTIVE",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub code: ViolationCode,
    pub team: Option<usize>,
    pub day: Option<u32>,
    pub task: Option<TaskRef>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code)?;
        if let Some(k) = self.team {
            write!(f, " team={k}")?;
        }
        if let Some(h) = self.day {
            write!(f, " day={h}")?;
        }
        if let Some(t) = self.task {
            write!(f, " task={t}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    fn push(&mut self, code: ViolationCode, visit: Option<&Visit>, detail: String) {
        self.violations.push(Violation {
            code,
            team: visit.map(|v| v.team),
            day: visit.map(|v| v.day),
            task: visit.map(|v| v.task),
            detail,
        });
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidateError {
    #[error("solution is infeasible ({0} violations)")]
    InfeasibleInput(usize),
}

fn absolute(day: u32, moment: f64, day_length: f64) -> f64 {
    f64::from(day.saturating_sub(1)) * day_length + moment
}

/// Re-derives every model constraint on `sol`.
pub fn check_feasible(inst: &Instance, sol: &Solution) -> FeasibilityReport {
    let mut report = FeasibilityReport::default();
    let d = inst.day_length();

    // Visits that can be looked up at all.
    let mut sane: Vec<&Visit> = Vec::with_capacity(sol.visits.len());
    for v in &sol.visits {
        if v.team == 0
            || v.team > inst.teams()
            || v.day == 0
            || !v.start.is_finite()
            || !v.end.is_finite()
            || v.start < -EPS
        {
            report.push(
                ViolationCode::InvalidVisit,
                Some(v),
                format!("team {} day {} start {} end {}", v.team, v.day, v.start, v.end),
            );
            continue;
        }
        if !inst.contains(v.task) {
            report.push(ViolationCode::UnknownTask, Some(v), "task not requested by the instance".into());
            continue;
        }
        sane.push(v);
    }

    // (a) every task exactly once.
    let mut by_task: HashMap<TaskRef, &Visit> = HashMap::new();
    for v in &sane {
        if by_task.insert(v.task, v).is_some() {
            report.push(ViolationCode::DuplicateTask, Some(v), "task executed more than once".into());
        }
    }
    for t in inst.tasks() {
        if !by_task.contains_key(&t) {
            report.violations.push(Violation {
                code: ViolationCode::MissingTask,
                team: None,
                day: None,
                task: Some(t),
                detail: "task never executed".into(),
            });
        }
    }

    // (e) durations.
    for v in &sane {
        match inst.task_time(v.team, v.task) {
            TaskTime::Infinite => {
                report.push(ViolationCode::Duration, Some(v), "team cannot perform this task".into());
            }
            TaskTime::Finite(t) => {
                if ((v.end - v.start) - t).abs() > EPS {
                    report.push(
                        ViolationCode::Duration,
                        Some(v),
                        format!("lasts {} h, task time is {t} h", v.end - v.start),
                    );
                }
            }
        }
    }

    // (b)-(d) routes rebuilt from start times; one contiguous route per
    // team and day also covers the single depot departure.
    let mut routes: HashMap<(usize, u32), Vec<&Visit>> = HashMap::new();
    for v in &sane {
        routes.entry((v.team, v.day)).or_default().push(v);
    }
    let mut keys: Vec<(usize, u32)> = routes.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let route = routes.get_mut(&key).expect("key exists");
        route.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.end.total_cmp(&b.end)));
        let first = route[0];
        let out = inst.extended_travel_time(Vertex::Depot, Vertex::Task(first.task));
        if first.start + EPS < out {
            report.push(
                ViolationCode::DepotDeparture,
                Some(first),
                format!("starts at {} but the depot is {out} h away", first.start),
            );
        }
        for pair in route.windows(2) {
            let (prev, next) = (pair[0], pair[1]);
            let gap = inst.extended_travel_time(Vertex::Task(prev.task), Vertex::Task(next.task));
            if next.start + EPS < prev.end + gap {
                report.push(
                    ViolationCode::Travel,
                    Some(next),
                    format!(
                        "starts at {} but previous task {} ends at {} with {gap} h travel",
                        next.start, prev.task, prev.end
                    ),
                );
            }
        }
        let last = route[route.len() - 1];
        let back = inst.extended_travel_time(Vertex::Task(last.task), Vertex::Depot);
        if last.end + back > d + EPS {
            report.push(
                ViolationCode::DayLength,
                Some(last),
                format!("back at the depot at {} h, day length {d} h", last.end + back),
            );
        }
    }

    // (f) precedence on absolute hours.
    for v in &sane {
        let service = inst.service_of(v.task.customer);
        for b in service.predecessors(v.task.task) {
            let dep = TaskRef::new(v.task.customer, b);
            if let Some(u) = by_task.get(&dep) {
                let done = absolute(u.day, u.end, d);
                let begins = absolute(v.day, v.start, d);
                if begins + EPS < done {
                    report.push(
                        ViolationCode::Precedence,
                        Some(v),
                        format!("starts before dependency {dep} completes"),
                    );
                }
            }
        }
    }

    // (h) stored makespan fields.
    if let Some(obj) = objective_of(&sane, d) {
        if obj.p != sol.p || (obj.m - sol.m).abs() > EPS {
            report.violations.push(Violation {
                code: ViolationCode::Objective,
                team: None,
                day: None,
                task: None,
                detail: format!("stored (p, m) = ({}, {}), recomputed ({}, {})", sol.p, sol.m, obj.p, obj.m),
            });
        }
    }

    report
}

fn objective_of(visits: &[&Visit], d: f64) -> Option<ObjectiveValue> {
    let mut best: Option<(u32, f64)> = None;
    for v in visits {
        best = match best {
            None => Some((v.day, v.end)),
            Some((p, m)) if v.day > p || (v.day == p && v.end > m) => Some((v.day, v.end)),
            keep => keep,
        };
    }
    best.map(|(p, m)| ObjectiveValue::new(p, m, d))
}

/// Objective of a feasible solution.
pub fn recompute_objective(inst: &Instance, sol: &Solution) -> Result<ObjectiveValue, ValidateError> {
    let report = check_feasible(inst, sol);
    if !report.ok() {
        return Err(ValidateError::InfeasibleInput(report.violations.len()));
    }
    let visits: Vec<&Visit> = sol.visits.iter().collect();
    Ok(objective_of(&visits, inst.day_length()).expect("feasible solutions are non-empty"))
}

/// Serializes a solution: `SOLUTION p m`, one `day team customer task start
/// end` line per visit sorted by (day, team, start), then `END`.
pub fn write_solution(sol: &Solution) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "SOLUTION {} {}", sol.p, sol.m);
    for v in sol.sorted_visits() {
        let _ = writeln!(out, "{} {} {} {} {} {}", v.day, v.team, v.task.customer, v.task.task, v.start, v.end);
    }
    let _ = writeln!(out, "END");
    out
}

pub fn read_solution(src: &str) -> Result<Solution, ParseError> {
    let mut lines = src
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let perr = |line: usize, reason: String| ParseError { line, reason };

    let (line, header) =
        lines.next().ok_or_else(|| perr(1, "unexpected end of file: missing SOLUTION header".into()))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 3 || tokens[0] != "SOLUTION" {
        return Err(perr(line, "expected `SOLUTION p m`".into()));
    }
    let p: u32 = tokens[1].parse().map_err(|_| perr(line, format!("invalid p `{}`", tokens[1])))?;
    let m: f64 = tokens[2].parse().map_err(|_| perr(line, format!("invalid m `{}`", tokens[2])))?;

    let mut visits = Vec::new();
    let mut last = line;
    for (line, text) in lines {
        last = line;
        if text == "END" {
            return Ok(Solution { visits, p, m });
        }
        let t: Vec<&str> = text.split_whitespace().collect();
        if t.len() != 6 {
            return Err(perr(line, format!("expected 6 fields, found {}", t.len())));
        }
        let bad = |what: &str, raw: &str| perr(line, format!("invalid {what} `{raw}`"));
        visits.push(Visit {
            day: t[0].parse().map_err(|_| bad("day", t[0]))?,
            team: t[1].parse().map_err(|_| bad("team", t[1]))?,
            task: TaskRef::new(
                t[2].parse().map_err(|_| bad("customer", t[2]))?,
                t[3].parse().map_err(|_| bad("task", t[3]))?,
            ),
            start: t[4].parse().map_err(|_| bad("start", t[4]))?,
            end: t[5].parse().map_err(|_| bad("end", t[5]))?,
        });
    }
    Err(perr(last + 1, "unexpected end of file: missing END".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructive::construct_greedy;
    use crate::instances::{generate, GeneratorConfig};
    use crate::model::fixtures::single_customer;
    use crate::model::{evaluate, InstanceType};

    fn visit(team: usize, day: u32, customer: usize, task: usize, start: f64, end: f64) -> Visit {
        Visit { team, day, task: TaskRef::new(customer, task), start, end }
    }

    #[test]
    fn constructive_output_is_feasible() {
        for t in [InstanceType::A, InstanceType::B, InstanceType::C] {
            for seed in 0..5 {
                let inst = generate(&GeneratorConfig::new(15, t, seed)).unwrap();
                let sol = construct_greedy(&inst).unwrap();
                let report = check_feasible(&inst, &sol);
                assert!(report.ok(), "{t} {seed}: {:?}", report.violations);
                assert_eq!(recompute_objective(&inst, &sol).unwrap(), evaluate(&inst, &sol).unwrap());
            }
        }
    }

    #[test]
    fn precedence_violation() {
        let inst = single_customer(2, (0, 0), 2, vec![(1, 0)], 1.0);
        let sol = Solution::from_visits(vec![visit(1, 1, 2, 0, 0.0, 1.0), visit(2, 1, 2, 1, 0.5, 1.5)]);
        let r = check_feasible(&inst, &sol);
        assert!(r.has(ViolationCode::Precedence));
        assert_eq!(r.violations.len(), 1);
    }

    #[test]
    fn precedence_across_days_uses_absolute_time() {
        let inst = single_customer(2, (0, 0), 2, vec![(1, 0)], 1.0);
        // Dependency finishes day 2, dependent runs day 1.
        let sol = Solution::from_visits(vec![visit(1, 2, 2, 0, 0.0, 1.0), visit(2, 1, 2, 1, 5.0, 6.0)]);
        assert!(check_feasible(&inst, &sol).has(ViolationCode::Precedence));
    }

    #[test]
    fn day_length_violation() {
        // Customer 8 grid steps away: 0.02 h each way.
        let inst = single_customer(1, (8, 0), 1, vec![], 1.0);
        let sol = Solution::from_visits(vec![visit(1, 1, 2, 0, 6.99, 7.99)]);
        assert!(check_feasible(&inst, &sol).has(ViolationCode::DayLength));
        // 7.9 + 0.2 > 8 with a customer 80 steps away.
        let inst = single_customer(1, (80, 0), 1, vec![], 1.0);
        let sol = Solution::from_visits(vec![visit(1, 1, 2, 0, 6.9, 7.9)]);
        let r = check_feasible(&inst, &sol);
        assert!(r.has(ViolationCode::DayLength));
        assert_eq!(r.violations.len(), 1);
    }

    #[test]
    fn travel_and_departure_violations() {
        let mut parts = single_customer(1, (40, 0), 1, vec![], 1.0).into_parts();
        parts.coords.push((0, 40));
        parts.requested.push(0);
        let inst = Instance::new(parts).unwrap();
        // Depot to customer 2 takes 0.1 h.
        let sol = Solution::from_visits(vec![visit(1, 1, 2, 0, 0.05, 1.05), visit(1, 1, 3, 0, 1.1, 2.1)]);
        let r = check_feasible(&inst, &sol);
        assert!(r.has(ViolationCode::DepotDeparture));
        assert!(r.has(ViolationCode::Travel));
    }

    #[test]
    fn coverage_duration_and_domain_violations() {
        let inst = single_customer(1, (0, 0), 2, vec![], 1.0);
        let sol = Solution::from_visits(vec![
            visit(1, 1, 2, 0, 0.0, 1.0),
            visit(1, 1, 2, 0, 1.0, 2.5),
            visit(3, 1, 2, 1, 0.0, 1.0),
            visit(1, 1, 7, 0, 3.0, 4.0),
        ]);
        let r = check_feasible(&inst, &sol);
        for code in [
            ViolationCode::DuplicateTask,
            ViolationCode::MissingTask,
            ViolationCode::Duration,
            ViolationCode::InvalidVisit,
            ViolationCode::UnknownTask,
        ] {
            assert!(r.has(code), "{code} missing from {:?}", r.violations);
        }
    }

    #[test]
    fn infinite_time_is_a_duration_violation() {
        let mut parts = single_customer(2, (0, 0), 1, vec![], 1.0).into_parts();
        parts.times[1][0][0] = TaskTime::Infinite;
        let inst = Instance::new(parts).unwrap();
        let sol = Solution::from_visits(vec![visit(2, 1, 2, 0, 0.0, 1.0)]);
        assert!(check_feasible(&inst, &sol).has(ViolationCode::Duration));
    }

    #[test]
    fn tampered_objective() {
        let inst = generate(&GeneratorConfig::new(8, InstanceType::A, 1)).unwrap();
        let mut sol = construct_greedy(&inst).unwrap();
        sol.p += 1;
        let r = check_feasible(&inst, &sol);
        assert!(r.has(ViolationCode::Objective));
        assert_eq!(recompute_objective(&inst, &sol), Err(ValidateError::InfeasibleInput(1)));
    }

    #[test]
    fn waiting_and_same_customer_revisits_are_legal() {
        let inst = single_customer(1, (4, 0), 2, vec![], 1.0);
        let sol = Solution::from_visits(vec![visit(1, 1, 2, 0, 3.0, 4.0), visit(1, 1, 2, 1, 4.0, 5.0)]);
        assert!(check_feasible(&inst, &sol).ok());
    }

    #[test]
    fn solution_file_round_trip() {
        let inst = generate(&GeneratorConfig::new(12, InstanceType::B, 9)).unwrap();
        let sol = construct_greedy(&inst).unwrap();
        let text = write_solution(&sol);
        let back = read_solution(&text).unwrap();
        assert_eq!(back.sorted_visits(), sol.sorted_visits());
        assert_eq!((back.p, back.m), (sol.p, sol.m));
        assert!(check_feasible(&inst, &back).ok());
        assert!(read_solution(&text.replace("END", "")).unwrap_err().reason.contains("END"));
    }
}
