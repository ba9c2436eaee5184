//! Ant colony optimization over the constructive heuristic: Ant System,
//! Max-Min Ant System and Ant Colony System, learning pheromone on one of
//! four component encodings.
//!
//! Every ant runs the ordinary [`Simulator`]; only the selection step
//! changes. The pheromone table is sparse, but absent keys read a
//! background trail that evaporates (and is clamped) exactly like a stored
//! trail would, so the table behaves as if every component were stored.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::constructive::{construct_traced, Candidate, ConstructError, Decision, Move, SelectionRule};
use crate::model::{evaluate, Instance, ObjectiveValue, Solution, Vertex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AcoError {
    #[error("all selection weights are zero")]
    DegenerateWeights,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Construct(#[from] ConstructError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    AntSystem,
    MaxMin,
    ColonySystem,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::AntSystem => "as",
            Variant::MaxMin => "mmas",
            Variant::ColonySystem => "acs",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = AcoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "as" => Ok(Variant::AntSystem),
            "mmas" => Ok(Variant::MaxMin),
            "acs" => Ok(Variant::ColonySystem),
            other => Err(AcoError::InvalidParam(format!("unknown variant `{other}`"))),
        }
    }
}

/// What a pheromone trail is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Encoding {
    /// Arc of the extended graph.
    Ct1,
    /// Team and arc.
    Ct2,
    /// Day, team and arc.
    Ct3,
    /// Team and the task it performs.
    Ct4,
}

impl Encoding {
    pub fn key(self, day: u32, team: usize, from: Vertex, to: Vertex) -> ComponentKey {
        match self {
            Encoding::Ct1 => ComponentKey::Arc { from, to },
            Encoding::Ct2 => ComponentKey::TeamArc { team, from, to },
            Encoding::Ct3 => ComponentKey::DayTeamArc { day, team, from, to },
            Encoding::Ct4 => ComponentKey::TeamTask { team, to },
        }
    }

    pub fn key_of(self, mv: &Move) -> ComponentKey {
        self.key(mv.day, mv.team, mv.from, mv.to)
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Ct1 => "ct1",
            Encoding::Ct2 => "ct2",
            Encoding::Ct3 => "ct3",
            Encoding::Ct4 => "ct4",
        })
    }
}

impl FromStr for Encoding {
    type Err = AcoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ct1" => Ok(Encoding::Ct1),
            "ct2" => Ok(Encoding::Ct2),
            "ct3" => Ok(Encoding::Ct3),
            "ct4" => Ok(Encoding::Ct4),
            other => Err(AcoError::InvalidParam(format!("unknown encoding `{other}`"))),
        }
    }
}

/// A construction decision as seen by the pheromone table. `to` is the
/// depot for return trips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentKey {
    Arc { from: Vertex, to: Vertex },
    TeamArc { team: usize, from: Vertex, to: Vertex },
    DayTeamArc { day: u32, team: usize, from: Vertex, to: Vertex },
    TeamTask { team: usize, to: Vertex },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneTable {
    trails: HashMap<ComponentKey, f64>,
    tau0: f64,
    background: f64,
}

impl PheromoneTable {
    pub fn new(tau0: f64) -> Self {
        Self { trails: HashMap::new(), tau0, background: tau0 }
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    /// Trail of components never stored.
    pub fn background(&self) -> f64 {
        self.background
    }

    pub fn get(&self, key: &ComponentKey) -> f64 {
        self.trails.get(key).copied().unwrap_or(self.background)
    }

    pub fn set(&mut self, key: ComponentKey, tau: f64) {
        self.trails.insert(key, tau);
    }

    pub fn stored(&self) -> impl Iterator<Item = (&ComponentKey, f64)> + '_ {
        self.trails.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.trails.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trails.is_empty()
    }

    /// Clamps every trail, stored or not, into `[tau_min, tau_max]`.
    pub fn clamp_all(&mut self, tau_min: f64, tau_max: f64) {
        for v in self.trails.values_mut() {
            *v = mmas_clamp(*v, tau_min, tau_max);
        }
        self.background = mmas_clamp(self.background, tau_min, tau_max);
    }
}

/// Offline update: every trail evaporates by `rho`, then each solution
/// deposits `q / f'` on every component it contains.
pub fn offline_update(table: &mut PheromoneTable, deposits: &[(f64, &[ComponentKey])], rho: f64, q: f64) {
    let keep = 1.0 - rho;
    for v in table.trails.values_mut() {
        *v *= keep;
    }
    table.background *= keep;
    let background = table.background;
    for &(fprime, keys) in deposits {
        let amount = q / fprime;
        let unique: HashSet<&ComponentKey> = keys.iter().collect();
        for key in unique {
            *table.trails.entry(*key).or_insert(background) += amount;
        }
    }
}

pub fn mmas_clamp(tau: f64, tau_min: f64, tau_max: f64) -> f64 {
    tau.max(tau_min).min(tau_max)
}

/// ACS local update, applied as soon as an ant picks `key`.
pub fn local_update(table: &mut PheromoneTable, key: ComponentKey, phi: f64, tau0: f64) {
    let tau = (1.0 - phi) * table.get(&key) + phi * tau0;
    table.set(key, tau);
}

/// Heuristic attractiveness of a candidate: the reciprocal of its
/// completion time, so earlier completions are preferred.
pub fn heuristic_value(candidate: &Candidate) -> f64 {
    1.0 / candidate.end
}

/// A candidate component with its trail and heuristic value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Choice {
    pub key: ComponentKey,
    pub tau: f64,
    pub eta: f64,
}

fn log_weight(c: &Choice, alpha: f64, beta: f64) -> f64 {
    // 0^0 = 1, so a zero exponent contributes nothing even for a zero trail.
    let a = if alpha == 0.0 { 0.0 } else { alpha * c.tau.ln() };
    let b = if beta == 0.0 { 0.0 } else { beta * c.eta.ln() };
    a + b
}

/// Selection probabilities `tau^alpha eta^beta / sum`. Computed in log
/// space so that large exponents neither overflow nor underflow.
pub fn selection_probabilities(choices: &[Choice], alpha: f64, beta: f64) -> Result<Vec<f64>, AcoError> {
    let logs: Vec<f64> = choices.iter().map(|c| log_weight(c, alpha, beta)).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(AcoError::DegenerateWeights);
    }
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Random-proportional choice; falls back to a uniform draw when every
/// weight is zero.
pub fn select_probabilistic(choices: &[Choice], alpha: f64, beta: f64, rng: &mut impl Rng) -> usize {
    assert!(!choices.is_empty(), "no candidates to select from");
    match selection_probabilities(choices, alpha, beta) {
        Ok(probs) => {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (i, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    return i;
                }
            }
            // Rounding left `u` above the last partial sum.
            probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
        }
        Err(_) => rng.gen_range(0..choices.len()),
    }
}

/// Index maximizing `tau * eta^beta`; ties go to the smallest key.
pub fn argmax_choice(choices: &[Choice], beta: f64) -> usize {
    let mut best = 0;
    let mut best_score = log_weight(&choices[0], 1.0, beta);
    for (i, c) in choices.iter().enumerate().skip(1) {
        let score = log_weight(c, 1.0, beta);
        if score > best_score || (score == best_score && c.key < choices[best].key) {
            best = i;
            best_score = score;
        }
    }
    best
}

/// Pseudo-random proportional rule: with probability `q0` take the argmax,
/// otherwise draw proportionally.
pub fn select_pseudorandom(choices: &[Choice], alpha: f64, beta: f64, q0: f64, rng: &mut impl Rng) -> usize {
    assert!(!choices.is_empty(), "no candidates to select from");
    let q: f64 = rng.gen();
    if q < q0 {
        argmax_choice(choices, beta)
    } else {
        select_probabilistic(choices, alpha, beta, rng)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcoParams {
    pub variant: Variant,
    pub encoding: Encoding,
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    /// Deposit constant `Q`.
    pub q: f64,
    pub tau0: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub phi: f64,
    pub q0: f64,
    pub num_ants: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// MMAS/ACS: deposit with the best-so-far ant instead of the
    /// iteration best.
    pub global_best: bool,
}

impl AcoParams {
    /// Tuned defaults for each variant, 100 ants and 100 iterations.
    pub fn defaults(variant: Variant) -> Self {
        let base = Self {
            variant,
            encoding: Encoding::Ct2,
            alpha: 1.0,
            beta: 1.0,
            rho: 0.5,
            q: 1.0,
            tau0: 1.0,
            tau_min: 0.0,
            tau_max: f64::INFINITY,
            phi: 0.0,
            q0: 0.0,
            num_ants: 100,
            max_iter: 100,
            seed: 0,
            global_best: false,
        };
        match variant {
            Variant::AntSystem => {
                Self { alpha: 5.97, beta: 1.39, rho: 0.48, q: 4.08, tau0: 9.99, encoding: Encoding::Ct2, ..base }
            }
            Variant::MaxMin => Self {
                alpha: 6.47,
                beta: 5.78,
                rho: 0.02,
                q: 9.96,
                tau0: 8.88,
                tau_min: 0.02,
                tau_max: 5.69,
                encoding: Encoding::Ct3,
                ..base
            },
            Variant::ColonySystem => Self {
                alpha: 9.29,
                beta: 0.53,
                rho: 0.82,
                q: 8.91,
                tau0: 7.28,
                phi: 0.12,
                q0: 0.91,
                encoding: Encoding::Ct2,
                ..base
            },
        }
    }

    /// Sets a parameter from its textual `key=value` form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), AcoError> {
        let num = |v: &str| -> Result<f64, AcoError> {
            v.trim().parse::<f64>().map_err(|_| AcoError::InvalidParam(format!("{key}: `{v}` is not a number")))
        };
        let int = |v: &str| -> Result<u64, AcoError> {
            v.trim()
                .parse::<u64>()
                .map_err(|_| AcoError::InvalidParam(format!("{key}: `{v}` is not a non-negative integer")))
        };
        match key.trim().to_ascii_lowercase().as_str() {
            "alpha" => self.alpha = num(value)?,
            "beta" => self.beta = num(value)?,
            "rho" => self.rho = num(value)?,
            "q" => self.q = num(value)?,
            "tau0" => self.tau0 = num(value)?,
            "tau_min" | "taumin" => self.tau_min = num(value)?,
            "tau_max" | "taumax" => self.tau_max = num(value)?,
            "phi" => self.phi = num(value)?,
            "q0" => self.q0 = num(value)?,
            "encoding" | "component" => self.encoding = value.trim().parse()?,
            "ants" | "num_ants" => self.num_ants = int(value)? as usize,
            "iters" | "max_iter" => self.max_iter = int(value)? as usize,
            "seed" => self.seed = int(value)?,
            "global_best" => {
                self.global_best = value
                    .trim()
                    .parse()
                    .map_err(|_| AcoError::InvalidParam(format!("{key}: `{value}` is not a boolean")))?
            }
            other => return Err(AcoError::InvalidParam(format!("unknown parameter `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), AcoError> {
        let bad = |msg: String| Err(AcoError::InvalidParam(msg));
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !(self.alpha >= 0.0 && self.alpha.is_finite() && self.beta >= 0.0 && self.beta.is_finite()) {
            return bad(format!("alpha and beta must be non-negative (got {}, {})", self.alpha, self.beta));
        }
        if !(unit(self.rho) && unit(self.phi) && unit(self.q0)) {
            return bad("rho, phi and q0 must lie in [0, 1]".into());
        }
        if !(self.q > 0.0 && self.q.is_finite() && self.tau0 > 0.0 && self.tau0.is_finite()) {
            return bad("Q and tau0 must be positive".into());
        }
        if self.variant == Variant::MaxMin && !(self.tau_min > 0.0 && self.tau_min <= self.tau_max) {
            return bad(format!("need 0 < tau_min <= tau_max (got {}, {})", self.tau_min, self.tau_max));
        }
        if self.num_ants == 0 || self.max_iter == 0 {
            return bad("ants and iterations must be positive".into());
        }
        Ok(())
    }
}

/// Pheromone access during one ant's construction.
trait Trails {
    fn tau(&self, key: &ComponentKey) -> f64;
    fn on_selected(&mut self, key: ComponentKey);
}

struct Shared<'a>(&'a PheromoneTable);

impl Trails for Shared<'_> {
    fn tau(&self, key: &ComponentKey) -> f64 {
        self.0.get(key)
    }

    fn on_selected(&mut self, _key: ComponentKey) {}
}

struct LocallyUpdated<'a> {
    table: &'a mut PheromoneTable,
    phi: f64,
}

impl Trails for LocallyUpdated<'_> {
    fn tau(&self, key: &ComponentKey) -> f64 {
        self.table.get(key)
    }

    fn on_selected(&mut self, key: ComponentKey) {
        let tau0 = self.table.tau0();
        local_update(self.table, key, self.phi, tau0);
    }
}

struct AntRule<'p, T> {
    trails: T,
    params: &'p AcoParams,
    rng: ChaCha8Rng,
    choices: Vec<Choice>,
}

impl<T: Trails> SelectionRule for AntRule<'_, T> {
    fn select(&mut self, d: &Decision) -> usize {
        self.choices.clear();
        for c in &d.candidates {
            let key = self.params.encoding.key(d.day, d.team, d.position, Vertex::Task(c.task));
            self.choices.push(Choice { key, tau: self.trails.tau(&key), eta: heuristic_value(c) });
        }
        let p = self.params;
        let idx = match p.variant {
            Variant::ColonySystem => select_pseudorandom(&self.choices, p.alpha, p.beta, p.q0, &mut self.rng),
            _ => select_probabilistic(&self.choices, p.alpha, p.beta, &mut self.rng),
        };
        self.trails.on_selected(self.choices[idx].key);
        idx
    }
}

/// One ant's solution.
#[derive(Debug, Clone, PartialEq)]
pub struct AntSolution {
    pub solution: Solution,
    pub objective: ObjectiveValue,
    pub moves: Vec<Move>,
    pub components: Vec<ComponentKey>,
}

fn ant_rng(seed: u64, iteration: usize, ant: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((iteration as u64) << 32) | ant as u64);
    rng
}

fn run_ant<T: Trails>(
    inst: &Instance,
    params: &AcoParams,
    trails: T,
    rng: ChaCha8Rng,
) -> Result<AntSolution, AcoError> {
    let mut rule = AntRule { trails, params, rng, choices: Vec::new() };
    let c = construct_traced(inst, &mut rule)?;
    let objective = evaluate(inst, &c.solution).expect("instances have at least one task");
    let components = c.moves.iter().map(|m| params.encoding.key_of(m)).collect();
    Ok(AntSolution { solution: c.solution, objective, moves: c.moves, components })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub iteration_best_p: u32,
    pub iteration_best_fprime: f64,
    pub best_p: u32,
    pub best_fprime: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best: AntSolution,
    pub history: Vec<IterationRecord>,
    pub table: PheromoneTable,
}

/// Runs the configured variant for `params.max_iter` iterations, stopping
/// early (after at least one iteration) once `time_limit` has elapsed.
pub fn run(inst: &Instance, params: &AcoParams, time_limit: Option<Duration>) -> Result<RunResult, AcoError> {
    params.validate()?;
    let started = Instant::now();
    let mut table = PheromoneTable::new(params.tau0);
    let mut best: Option<AntSolution> = None;
    let mut history = Vec::with_capacity(params.max_iter);

    for iteration in 0..params.max_iter {
        if iteration > 0 && time_limit.is_some_and(|limit| started.elapsed() >= limit) {
            break;
        }
        let ants: Vec<AntSolution> = match params.variant {
            // Local updates make ACS ants depend on their predecessors.
            Variant::ColonySystem => {
                let mut out = Vec::with_capacity(params.num_ants);
                for ant in 0..params.num_ants {
                    let trails = LocallyUpdated { table: &mut table, phi: params.phi };
                    out.push(run_ant(inst, params, trails, ant_rng(params.seed, iteration, ant))?);
                }
                out
            }
            _ => (0..params.num_ants)
                .into_par_iter()
                .map(|ant| run_ant(inst, params, Shared(&table), ant_rng(params.seed, iteration, ant)))
                .collect::<Result<_, _>>()?,
        };

        let iteration_best = ants
            .iter()
            .enumerate()
            .min_by(|(i, a), (j, b)| a.objective.fprime.total_cmp(&b.objective.fprime).then(i.cmp(j)))
            .map(|(i, _)| i)
            .expect("at least one ant");
        if best.as_ref().is_none_or(|b| ants[iteration_best].objective.fprime < b.objective.fprime) {
            best = Some(ants[iteration_best].clone());
        }
        let global = best.as_ref().expect("set above");

        match params.variant {
            Variant::AntSystem => {
                let deposits: Vec<(f64, &[ComponentKey])> =
                    ants.iter().map(|a| (a.objective.fprime, a.components.as_slice())).collect();
                offline_update(&mut table, &deposits, params.rho, params.q);
            }
            Variant::MaxMin | Variant::ColonySystem => {
                let depositor = if params.global_best { global } else { &ants[iteration_best] };
                offline_update(
                    &mut table,
                    &[(depositor.objective.fprime, depositor.components.as_slice())],
                    params.rho,
                    params.q,
                );
                if params.variant == Variant::MaxMin {
                    table.clamp_all(params.tau_min, params.tau_max);
                }
            }
        }

        history.push(IterationRecord {
            iteration,
            iteration_best_p: ants[iteration_best].objective.p,
            iteration_best_fprime: ants[iteration_best].objective.fprime,
            best_p: global.objective.p,
            best_fprime: global.objective.fprime,
        });
    }

    Ok(RunResult { best: best.expect("max_iter >= 1"), history, table })
}
