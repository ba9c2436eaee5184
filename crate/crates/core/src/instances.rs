//! Random instance generation (types A, B and C) and the line-oriented
//! instance file format.
//!
//! The generator draws from independent ChaCha8 streams derived from the
//! master seed, one per purpose, so that e.g. the coordinates of an
//! instance do not depend on how many draws the service layout consumed.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Instance, InstanceParts, InstanceType, ModelError, Service, TaskTime};

pub const GENERATED_TEAMS: usize = 3;
pub const GENERATED_DAY_LENGTH: f64 = 8.0;
pub const GRID_MAX: u32 = 100;

const REFERENCE_TIMES: [f64; 4] = [0.5, 1.0, 1.5, 2.0];
const SKILLS: [f64; 3] = [0.5, 1.0, 2.0];
// Zero skill means the team cannot perform the task.
const SKILLS_WITH_ZERO: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

const STREAM_COORDS: u64 = 1;
const STREAM_SERVICES: u64 = 2;
const STREAM_REQUESTS: u64 = 3;
const STREAM_SKILLS: u64 = 4;

const MAGIC: &str = "MWSRPDT 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub n: usize,
    pub instance_type: InstanceType,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(n: usize, instance_type: InstanceType, seed: u64) -> Self {
        Self { n, instance_type, seed }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn pick<const N: usize>(rng: &mut ChaCha8Rng, values: &[f64; N]) -> f64 {
    values[rng.gen_range(0..N)]
}

/// Generates a random instance with `K = 3` teams and an 8 hour day.
pub fn generate(cfg: &GeneratorConfig) -> Result<Instance, GenerateError> {
    if cfg.n < 2 {
        return Err(GenerateError::InvalidConfig(format!("n must be at least 2, got {}", cfg.n)));
    }
    let teams = GENERATED_TEAMS;

    let mut rng = stream(cfg.seed, STREAM_COORDS);
    let coords: Vec<(u32, u32)> =
        (0..cfg.n).map(|_| (rng.gen_range(0..=GRID_MAX), rng.gen_range(0..=GRID_MAX))).collect();

    let sizes: &[usize] = match cfg.instance_type {
        InstanceType::A | InstanceType::B => &[1, 3, 5],
        InstanceType::C => &[3],
    };

    // Per service: reference times, the guaranteed team k(a) and the
    // three-layer precedence structure.
    let mut rng = stream(cfg.seed, STREAM_SERVICES);
    let mut services = Vec::with_capacity(sizes.len());
    let mut reference = Vec::with_capacity(sizes.len());
    let mut guaranteed = Vec::with_capacity(sizes.len());
    for (id, &size) in sizes.iter().enumerate() {
        let mut r = Vec::with_capacity(size);
        let mut g = Vec::with_capacity(size);
        for _ in 0..size {
            r.push(pick(&mut rng, &REFERENCE_TIMES));
            g.push(match cfg.instance_type {
                InstanceType::A => None,
                InstanceType::B | InstanceType::C => Some(rng.gen_range(1..=teams)),
            });
        }
        let layer: Vec<usize> = (0..size).map(|_| rng.gen_range(0..3)).collect();
        let mut deps = Vec::new();
        for a in 0..size {
            if layer[a] == 0 {
                continue;
            }
            for b in 0..size {
                if layer[b] + 1 == layer[a] {
                    deps.push((a, b));
                }
            }
        }
        services.push(Service::new(id, size, deps));
        reference.push(r);
        guaranteed.push(g);
    }

    let mut rng = stream(cfg.seed, STREAM_REQUESTS);
    let requested: Vec<usize> = (2..=cfg.n).map(|_| rng.gen_range(0..services.len())).collect();

    let mut rng = stream(cfg.seed, STREAM_SKILLS);
    let mut times = Vec::with_capacity(teams);
    for k in 1..=teams {
        let mut per_team = Vec::with_capacity(services.len());
        for (s, service) in services.iter().enumerate() {
            let mut row = Vec::with_capacity(service.num_tasks);
            for a in 0..service.num_tasks {
                let skill = match (cfg.instance_type, guaranteed[s][a]) {
                    (InstanceType::A, _) => pick(&mut rng, &SKILLS),
                    (InstanceType::B, Some(ka)) if ka != k => pick(&mut rng, &SKILLS_WITH_ZERO),
                    (InstanceType::C, Some(ka)) if ka != k => 0.0,
                    _ => pick(&mut rng, &SKILLS),
                };
                row.push(if skill == 0.0 { TaskTime::Infinite } else { TaskTime::Finite(reference[s][a] / skill) });
            }
            per_team.push(row);
        }
        times.push(per_team);
    }

    Ok(Instance::new(InstanceParts {
        teams,
        day_length: GENERATED_DAY_LENGTH,
        coords,
        services,
        requested,
        times,
        instance_type: cfg.instance_type,
        seed: cfg.seed,
    })?)
}

/// Formats hours with at most six decimals and no trailing zeros.
pub fn format_hours(value: f64) -> String {
    let s = format!("{value:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Serializes an instance in the `MWSRPDT 1` text format.
pub fn write_instance(inst: &Instance) -> String {
    let p = inst.parts();
    let mut out = String::new();
    // Writing into a String cannot fail.
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "{} {} {} {} {}", inst.n(), p.teams, format_hours(p.day_length), p.instance_type, p.seed);
    let _ = writeln!(out, "COORDS");
    for (i, (x, y)) in p.coords.iter().enumerate() {
        let _ = writeln!(out, "{} {x} {y}", i + 1);
    }
    let _ = writeln!(out, "SERVICES");
    for s in &p.services {
        let _ = writeln!(out, "SERVICE {} {}", s.id, s.num_tasks);
        let _ = writeln!(out, "DEPS {}", s.deps.len());
        for (a, b) in &s.deps {
            let _ = writeln!(out, "{a} {b}");
        }
    }
    let _ = writeln!(out, "REQUESTS");
    for (idx, s) in p.requested.iter().enumerate() {
        let _ = writeln!(out, "{} {s}", idx + 2);
    }
    let _ = writeln!(out, "TIMES");
    for (k, per_team) in p.times.iter().enumerate() {
        for (s, row) in per_team.iter().enumerate() {
            for (a, t) in row.iter().enumerate() {
                let value = match t {
                    TaskTime::Finite(h) => format_hours(*h),
                    TaskTime::Infinite => "INF".to_string(),
                };
                let _ = writeln!(out, "{} {s} {a} {value}", k + 1);
            }
        }
    }
    let _ = writeln!(out, "END");
    out
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    last_line: usize,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Self { lines: src.lines().enumerate(), last_line: 0 }
    }

    /// Next non-blank line with comments stripped, split into tokens.
    /// `context` names what was expected, for the end-of-file error.
    fn next(&mut self, context: &str) -> Result<(usize, Vec<&'a str>), ParseError> {
        for (idx, raw) in self.lines.by_ref() {
            self.last_line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if !tokens.is_empty() {
                return Ok((idx + 1, tokens));
            }
        }
        Err(ParseError { line: self.last_line + 1, reason: format!("unexpected end of file: missing {context}") })
    }

    fn header(&mut self, name: &str) -> Result<usize, ParseError> {
        let (line, tokens) = self.next(&format!("section {name}"))?;
        if tokens != [name] {
            return Err(err(line, format!("expected section header `{name}`, found `{}`", tokens.join(" "))));
        }
        Ok(line)
    }
}

fn err(line: usize, reason: impl Into<String>) -> ParseError {
    ParseError { line, reason: reason.into() }
}

fn field<T: std::str::FromStr>(line: usize, tokens: &[&str], idx: usize, what: &str) -> Result<T, ParseError> {
    let raw = tokens.get(idx).ok_or_else(|| err(line, format!("missing field `{what}`")))?;
    raw.parse().map_err(|_| err(line, format!("invalid {what} `{raw}`")))
}

fn arity(line: usize, tokens: &[&str], expected: usize) -> Result<(), ParseError> {
    if tokens.len() != expected {
        return Err(err(line, format!("expected {expected} fields, found {}", tokens.len())));
    }
    Ok(())
}

/// Parses an instance in the `MWSRPDT 1` text format.
pub fn read_instance(src: &str) -> Result<Instance, ParseError> {
    let mut r = Reader::new(src);

    let (line, tokens) = r.next("header `MWSRPDT 1`")?;
    if tokens.join(" ") != MAGIC {
        return Err(err(line, format!("expected `{MAGIC}`")));
    }

    let (line, tokens) = r.next("problem line `n K D type seed`")?;
    arity(line, &tokens, 5)?;
    let n: usize = field(line, &tokens, 0, "vertex count")?;
    let teams: usize = field(line, &tokens, 1, "team count")?;
    let day_length: f64 = field(line, &tokens, 2, "day length")?;
    let instance_type: InstanceType = field(line, &tokens, 3, "instance type")?;
    let seed: u64 = field(line, &tokens, 4, "seed")?;
    if n < 2 {
        return Err(err(line, "at least two vertices are required"));
    }
    if teams == 0 {
        return Err(err(line, "at least one team is required"));
    }

    r.header("COORDS")?;
    let mut coords = Vec::with_capacity(n);
    for i in 1..=n {
        let (line, tokens) = r.next("COORDS entries")?;
        arity(line, &tokens, 3)?;
        let idx: usize = field(line, &tokens, 0, "vertex index")?;
        if idx != i {
            return Err(err(line, format!("expected vertex {i}, found {idx}")));
        }
        coords.push((field(line, &tokens, 1, "x")?, field(line, &tokens, 2, "y")?));
    }

    r.header("SERVICES")?;
    let mut services: Vec<Service> = Vec::new();
    let (mut line, mut tokens) = r.next("section REQUESTS")?;
    while tokens.first() == Some(&"SERVICE") {
        arity(line, &tokens, 3)?;
        let id: usize = field(line, &tokens, 1, "service id")?;
        if id != services.len() {
            return Err(err(line, format!("expected service {}, found {id}", services.len())));
        }
        let num_tasks: usize = field(line, &tokens, 2, "task count")?;
        let (dline, dtokens) = r.next("DEPS line")?;
        if dtokens.first() != Some(&"DEPS") {
            return Err(err(dline, "expected `DEPS m`"));
        }
        arity(dline, &dtokens, 2)?;
        let m: usize = field(dline, &dtokens, 1, "dependency count")?;
        let mut deps = Vec::with_capacity(m);
        for _ in 0..m {
            let (l, t) = r.next("dependency entries")?;
            arity(l, &t, 2)?;
            let a: usize = field(l, &t, 0, "task")?;
            let b: usize = field(l, &t, 1, "task")?;
            if a >= num_tasks || b >= num_tasks {
                return Err(err(l, format!("dependency ({a}, {b}) out of range for {num_tasks} tasks")));
            }
            deps.push((a, b));
        }
        services.push(Service::new(id, num_tasks, deps));
        (line, tokens) = r.next("section REQUESTS")?;
    }
    if tokens != ["REQUESTS"] {
        return Err(err(line, format!("expected `SERVICE` or `REQUESTS`, found `{}`", tokens.join(" "))));
    }

    let mut requested = Vec::with_capacity(n - 1);
    for i in 2..=n {
        let (line, tokens) = r.next("REQUESTS entries")?;
        arity(line, &tokens, 2)?;
        let idx: usize = field(line, &tokens, 0, "customer index")?;
        if idx != i {
            return Err(err(line, format!("expected customer {i}, found {idx}")));
        }
        let s: usize = field(line, &tokens, 1, "service id")?;
        if s >= services.len() {
            return Err(err(line, format!("unknown service {s}")));
        }
        requested.push(s);
    }

    r.header("TIMES")?;
    let mut slots: Vec<Vec<Vec<Option<TaskTime>>>> =
        vec![services.iter().map(|s| vec![None; s.num_tasks]).collect(); teams];
    let expected: usize = teams * services.iter().map(|s| s.num_tasks).sum::<usize>();
    for _ in 0..expected {
        let (line, tokens) = r.next("TIMES entries")?;
        arity(line, &tokens, 4)?;
        let k: usize = field(line, &tokens, 0, "team")?;
        let s: usize = field(line, &tokens, 1, "service id")?;
        let a: usize = field(line, &tokens, 2, "task")?;
        if k == 0 || k > teams || s >= services.len() || a >= services[s].num_tasks {
            return Err(err(line, format!("time entry ({k}, {s}, {a}) out of range")));
        }
        let value = if tokens[3] == "INF" {
            TaskTime::Infinite
        } else {
            let h: f64 = field(line, &tokens, 3, "time")?;
            if !(h.is_finite() && h > 0.0) {
                return Err(err(line, format!("time must be positive or INF, got {h}")));
            }
            TaskTime::Finite(h)
        };
        let slot = &mut slots[k - 1][s][a];
        if slot.is_some() {
            return Err(err(line, format!("duplicate time entry ({k}, {s}, {a})")));
        }
        *slot = Some(value);
    }
    let times: Vec<Vec<Vec<TaskTime>>> = slots
        .into_iter()
        .map(|per_team| {
            per_team.into_iter().map(|row| row.into_iter().map(|t| t.expect("all slots filled")).collect()).collect()
        })
        .collect();

    let end_line = r.header("END")?;

    Instance::new(InstanceParts { teams, day_length, coords, services, requested, times, instance_type, seed })
        .map_err(|e| err(end_line, e.to_string()))
}
