//! Event-driven constructive heuristic.
//!
//! Each day starts with every team at the depot. An event queue holds the
//! moments at which teams become free; the earliest event is popped, the
//! team looks at every open task it could still finish (and return from)
//! today, and a [`SelectionRule`] picks one. A team with nothing left to do
//! returns to the depot and is done for the day.
//!
//! [`Simulator`] exposes the process one decision at a time so that the
//! greedy heuristic, the ant colony and the exact oracle all share the same
//! timing semantics.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{Instance, Solution, TaskRef, TimePoint, Vertex, Visit, EPS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error("day {day} ended without executing any task although tasks remain")]
    StalledDay { day: u32 },
}

/// A task a team may perform next, with the timing it would get.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub task: TaskRef,
    pub start: f64,
    pub end: f64,
}

/// The choice presented to a [`SelectionRule`].
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub team: usize,
    pub position: Vertex,
    pub day: u32,
    /// Moment the team became free.
    pub now: f64,
    pub candidates: Vec<Candidate>,
}

/// Picks one of the candidates of a decision, by index.
pub trait SelectionRule {
    fn select(&mut self, decision: &Decision) -> usize;
}

impl<F: FnMut(&Decision) -> usize> SelectionRule for F {
    fn select(&mut self, decision: &Decision) -> usize {
        self(decision)
    }
}

/// A team moving along an arc of the extended graph. Returns to the depot
/// are recorded too.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub day: u32,
    pub team: usize,
    pub from: Vertex,
    pub to: Vertex,
}

/// A solution together with the moves that built it.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub solution: Solution,
    pub moves: Vec<Move>,
}

/// Static per-instance lookup tables, shared between cloned simulators.
#[derive(Debug)]
struct Layout {
    tasks: Vec<TaskRef>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    /// `time[team - 1][task]`, `None` when the team lacks the skill.
    time: Vec<Vec<Option<f64>>>,
    to_depot: Vec<f64>,
}

impl Layout {
    fn new(inst: &Instance) -> Self {
        let tasks: Vec<TaskRef> = inst.tasks().collect();
        let mut offset = vec![0usize; inst.n() + 1];
        let mut acc = 0;
        for i in inst.customers() {
            offset[i] = acc;
            acc += inst.service_of(i).num_tasks;
        }
        let dense = |t: TaskRef| offset[t.customer] + t.task;
        let mut preds = vec![Vec::new(); tasks.len()];
        let mut succs = vec![Vec::new(); tasks.len()];
        for &t in &tasks {
            let service = inst.service_of(t.customer);
            preds[dense(t)] = service.predecessors(t.task).map(|b| dense(TaskRef::new(t.customer, b))).collect();
            succs[dense(t)] = service.successors(t.task).map(|a| dense(TaskRef::new(t.customer, a))).collect();
        }
        let time = (1..=inst.teams()).map(|k| tasks.iter().map(|&t| inst.task_time(k, t).hours()).collect()).collect();
        let to_depot = tasks.iter().map(|&t| inst.extended_travel_time(Vertex::Task(t), Vertex::Depot)).collect();
        Self { tasks, preds, succs, time, to_depot }
    }
}

#[derive(Debug, Clone, Copy)]
struct Event {
    team: usize,
    position: Vertex,
    completion: f64,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl Ord for Event {
    // Reversed so that `BinaryHeap` pops the earliest completion first,
    // lowest team index on ties.
    fn cmp(&self, other: &Self) -> Ordering {
        other.completion.total_cmp(&self.completion).then_with(|| other.team.cmp(&self.team))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Step-by-step execution of the constructive heuristic. Cloning a
/// simulator forks the construction, which the exact oracle uses to branch.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    inst: &'a Instance,
    layout: Arc<Layout>,
    day: u32,
    remaining: usize,
    done: Vec<bool>,
    open: Vec<Option<TimePoint>>,
    completed: Vec<Option<TimePoint>>,
    events: BinaryHeap<Event>,
    executed_today: usize,
    pending: Option<Decision>,
    visits: Vec<Visit>,
    moves: Vec<Move>,
}

impl<'a> Simulator<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        let layout = Arc::new(Layout::new(inst));
        let count = layout.tasks.len();
        let open =
            layout.preds.iter().map(|p| if p.is_empty() { Some(TimePoint::new(0, 0.0)) } else { None }).collect();
        Self {
            inst,
            layout,
            day: 0,
            remaining: count,
            done: vec![false; count],
            open,
            completed: vec![None; count],
            events: BinaryHeap::new(),
            executed_today: 0,
            pending: None,
            visits: Vec::with_capacity(count),
            moves: Vec::with_capacity(2 * count),
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn day(&self) -> u32 {
        self.day
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn visits(&self) -> &[Visit] {
        &self.visits
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    /// Lower bound on the final `f'` of any completion of this partial
    /// construction.
    pub fn fprime_lower_bound(&self) -> f64 {
        let d = self.inst.day_length();
        let so_far = self.visits.iter().map(|v| TimePoint::new(v.day, v.end).absolute(d)).fold(0.0, f64::max) / d;
        if self.remaining > 0 {
            so_far.max(f64::from(self.day.max(1)) - 1.0)
        } else {
            so_far
        }
    }

    /// Runs the simulation up to the next decision with at least one
    /// candidate. Returns `None` once every task has been executed and all
    /// teams are back at the depot.
    pub fn next_decision(&mut self) -> Result<Option<&Decision>, ConstructError> {
        while self.pending.is_none() {
            let Some(event) = self.events.pop() else {
                if self.remaining == 0 {
                    return Ok(None);
                }
                if self.day > 0 && self.executed_today == 0 {
                    return Err(ConstructError::StalledDay { day: self.day });
                }
                self.start_day();
                continue;
            };
            let candidates = self.candidates(event.team, event.position, event.completion);
            if candidates.is_empty() {
                if event.position != Vertex::Depot {
                    self.moves.push(Move { day: self.day, team: event.team, from: event.position, to: Vertex::Depot });
                }
            } else {
                self.pending = Some(Decision {
                    team: event.team,
                    position: event.position,
                    day: self.day,
                    now: event.completion,
                    candidates,
                });
            }
        }
        Ok(self.pending.as_ref())
    }

    /// Commits candidate `index` of the pending decision.
    ///
    /// # Panics
    /// If there is no pending decision or the index is out of range.
    pub fn choose(&mut self, index: usize) {
        let decision = self.pending.take().expect("no pending decision");
        let c = decision.candidates[index];
        let id = self.dense(c.task);
        self.moves.push(Move { day: self.day, team: decision.team, from: decision.position, to: Vertex::Task(c.task) });
        self.visits.push(Visit { team: decision.team, day: self.day, task: c.task, start: c.start, end: c.end });
        self.done[id] = true;
        self.remaining -= 1;
        self.executed_today += 1;
        self.completed[id] = Some(TimePoint::new(self.day, c.end));

        let d = self.inst.day_length();
        for &succ in &self.layout.succs[id] {
            let mut latest: Option<TimePoint> = None;
            let mut all_done = true;
            for &pred in &self.layout.preds[succ] {
                match self.completed[pred] {
                    None => {
                        all_done = false;
                        break;
                    }
                    Some(tp) => {
                        if latest.is_none_or(|l| tp.absolute(d) > l.absolute(d)) {
                            latest = Some(tp);
                        }
                    }
                }
            }
            if all_done {
                self.open[succ] = latest;
            }
        }
        self.events.push(Event { team: decision.team, position: Vertex::Task(c.task), completion: c.end });
    }

    pub fn finish(self) -> Construction {
        Construction { solution: Solution::from_visits(self.visits), moves: self.moves }
    }

    fn dense(&self, t: TaskRef) -> usize {
        // Tasks are stored in (customer, task) order.
        self.layout.tasks.binary_search(&t).expect("task belongs to the instance")
    }

    fn start_day(&mut self) {
        self.day += 1;
        self.executed_today = 0;
        for team in 1..=self.inst.teams() {
            self.events.push(Event { team, position: Vertex::Depot, completion: 0.0 });
        }
    }

    fn candidates(&self, team: usize, position: Vertex, now: f64) -> Vec<Candidate> {
        let d = self.inst.day_length();
        let mut out = Vec::new();
        for (id, &task) in self.layout.tasks.iter().enumerate() {
            if self.done[id] {
                continue;
            }
            let Some(open) = self.open[id] else { continue };
            let Some(duration) = self.layout.time[team - 1][id] else { continue };
            let ready = if open.day == self.day { open.moment } else { 0.0 };
            let start = (now + self.inst.extended_travel_time(position, Vertex::Task(task))).max(ready);
            let end = start + duration;
            if end + self.layout.to_depot[id] <= d + EPS {
                out.push(Candidate { task, start, end });
            }
        }
        out
    }
}

/// Runs the heuristic to completion with `rule`, keeping the move trace.
pub fn construct_traced(inst: &Instance, rule: &mut impl SelectionRule) -> Result<Construction, ConstructError> {
    let mut sim = Simulator::new(inst);
    while let Some(decision) = sim.next_decision()? {
        let idx = rule.select(decision);
        sim.choose(idx);
    }
    Ok(sim.finish())
}

pub fn construct(inst: &Instance, rule: &mut impl SelectionRule) -> Result<Solution, ConstructError> {
    construct_traced(inst, rule).map(|c| c.solution)
}

/// Smallest completion time first; ties go to the lowest (customer, task).
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyRule;

impl SelectionRule for GreedyRule {
    fn select(&mut self, decision: &Decision) -> usize {
        greedy_index(&decision.candidates)
    }
}

pub fn greedy_index(candidates: &[Candidate]) -> usize {
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate().skip(1) {
        let b = &candidates[best];
        let better = if (c.end - b.end).abs() <= EPS { c.task < b.task } else { c.end < b.end };
        if better {
            best = i;
        }
    }
    best
}

/// The constructive heuristic on its own: greedy selection.
pub fn construct_greedy(inst: &Instance) -> Result<Solution, ConstructError> {
    construct(inst, &mut GreedyRule)
}

/// Re-executes a recorded sequence of task choices.
#[derive(Debug, Clone)]
pub struct ReplayRule {
    choices: std::vec::IntoIter<TaskRef>,
}

impl ReplayRule {
    pub fn new(choices: Vec<TaskRef>) -> Self {
        Self { choices: choices.into_iter() }
    }

    /// Task choices recorded in a move trace.
    pub fn from_moves(moves: &[Move]) -> Self {
        Self::new(moves.iter().filter_map(|m| m.to.task()).collect())
    }
}

impl SelectionRule for ReplayRule {
    fn select(&mut self, decision: &Decision) -> usize {
        let next = self.choices.next().expect("replay trace exhausted");
        decision.candidates.iter().position(|c| c.task == next).expect("recorded task is not a candidate")
    }
}
