//! LP-format export of the time-indexed MIP model on the extended graph.
//!
//! Variables, for team `k` and day `h`:
//!
//! * `x_k_h_u_v` (binary): the team travels `u -> v`;
//! * `q_k_h_u_v` (continuous): its arrival moment at `v` on that arc;
//! * `y_k_h_i_a` (binary): it performs task `a` of customer `i`;
//! * `p` (general integer): the makespan.
//!
//! Vertex ids are `0` for the depot and `i.a` for task vertices. A team
//! that cannot perform a task gets no `x`/`q` columns touching that vertex
//! and its `y` is fixed to zero, so the file only carries finite
//! coefficients. Bounds `T` on arrival moments are the day length `D`.
//!
//! With `N` task vertices, `m_k` of which team `k` can perform,
//! `A = sum_k (m_k + 1) m_k`, `M = sum_k m_k`, `K' = #{k : m_k > 0}` and
//! `P` precedence arcs over all customers:
//!
//! * binaries: `H A + K H N`; continuous: `H A`; general integers: 1;
//! * constraints: `N + P + 4 H M + H A + 2 H K'`.
//!
//! When every team can perform every task this reduces to
//! `|V'| (|V'| - 1)` arcs per team and day.

use std::fmt;

use thiserror::Error;

use crate::constructive::{construct_greedy, ConstructError};
use crate::model::{Instance, TaskRef, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModelStats {
    pub num_binary: usize,
    pub num_continuous: usize,
    pub num_general_integer: usize,
    pub num_constraints: usize,
    pub horizon: u32,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MipError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error(transparent)]
    Construct(#[from] ConstructError),
}

/// Default horizon: the constructive heuristic's makespan.
pub fn default_horizon(inst: &Instance) -> Result<u32, ConstructError> {
    Ok(construct_greedy(inst)?.p)
}

fn vid(v: Vertex) -> String {
    match v {
        Vertex::Depot => "0".to_string(),
        Vertex::Task(t) => format!("{}.{}", t.customer, t.task),
    }
}

fn xname(k: usize, h: u32, u: Vertex, v: Vertex) -> String {
    format!("x_{k}_{h}_{}_{}", vid(u), vid(v))
}

fn qname(k: usize, h: u32, u: Vertex, v: Vertex) -> String {
    format!("q_{k}_{h}_{}_{}", vid(u), vid(v))
}

fn yname(k: usize, h: u32, t: TaskRef) -> String {
    format!("y_{k}_{h}_{}_{}", t.customer, t.task)
}

/// Number with at most nine significant digits, without trailing zeros.
pub fn format_coef(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        return format!("{}", v as i64);
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Default)]
struct Expr {
    terms: Vec<(f64, String)>,
}

impl Expr {
    fn add(&mut self, coef: f64, var: String) {
        if coef != 0.0 {
            self.terms.push((coef, var));
        }
    }
}

const TERMS_PER_LINE: usize = 6;

struct Writer<'w, W: fmt::Write> {
    out: &'w mut W,
    constraints: usize,
}

impl<W: fmt::Write> Writer<'_, W> {
    fn row(&mut self, name: &str, expr: &Expr, op: &str, rhs: f64) -> fmt::Result {
        write!(self.out, " {name}:")?;
        for (i, (coef, var)) in expr.terms.iter().enumerate() {
            if i > 0 && i % TERMS_PER_LINE == 0 {
                write!(self.out, "\n  ")?;
            }
            let sign = if *coef < 0.0 { "-" } else { "+" };
            let mag = coef.abs();
            if i == 0 && sign == "+" {
                write!(self.out, " ")?;
            } else {
                write!(self.out, " {sign} ")?;
            }
            if mag == 1.0 {
                write!(self.out, "{var}")?;
            } else {
                write!(self.out, "{} {var}", format_coef(mag))?;
            }
        }
        writeln!(self.out, " {op} {}", format_coef(rhs))?;
        self.constraints += 1;
        Ok(())
    }
}

/// Writes the model for `horizon` days in LP format.
pub fn emit_model(inst: &Instance, horizon: u32, out: &mut impl fmt::Write) -> Result<ModelStats, MipError> {
    if horizon == 0 {
        return Err(MipError::ZeroHorizon);
    }
    emit(inst, horizon, out).expect("formatting into the sink failed");
    let tasks: Vec<TaskRef> = inst.tasks().collect();
    let teams = inst.teams();
    let h = horizon as usize;
    let usable: Vec<usize> =
        (1..=teams).map(|k| tasks.iter().filter(|&&t| inst.task_time(k, t).is_finite()).count()).collect();
    let arcs: usize = usable.iter().map(|m| (m + 1) * m).sum();
    let m_total: usize = usable.iter().sum();
    let active = usable.iter().filter(|&&m| m > 0).count();
    let prec: usize = inst.customers().map(|i| inst.service_of(i).deps.len()).sum();
    Ok(ModelStats {
        num_binary: h * arcs + teams * h * tasks.len(),
        num_continuous: h * arcs,
        num_general_integer: 1,
        num_constraints: tasks.len() + prec + 4 * h * m_total + h * arcs + 2 * h * active,
        horizon,
    })
}

pub fn model_to_string(inst: &Instance, horizon: u32) -> Result<(String, ModelStats), MipError> {
    let mut s = String::new();
    let stats = emit_model(inst, horizon, &mut s)?;
    Ok((s, stats))
}

fn emit(inst: &Instance, horizon: u32, out: &mut impl fmt::Write) -> fmt::Result {
    let d = inst.day_length();
    let tasks: Vec<TaskRef> = inst.tasks().collect();
    let teams = 1..=inst.teams();
    let days = 1..=horizon;
    let time = |k: usize, t: TaskRef| inst.task_time(k, t).hours();
    // Depot first, then the task vertices team k can perform.
    let nodes = |k: usize| -> Vec<Vertex> {
        std::iter::once(Vertex::Depot)
            .chain(tasks.iter().filter(|&&t| time(k, t).is_some()).map(|&t| Vertex::Task(t)))
            .collect()
    };
    let team_nodes: Vec<Vec<Vertex>> = teams.clone().map(nodes).collect();

    writeln!(
        out,
        "\\ MWSRPDT model: n={} K={} H={horizon} D={} tasks={}",
        inst.n(),
        inst.teams(),
        format_coef(d),
        tasks.len()
    )?;
    writeln!(out, "Minimize")?;
    writeln!(out, " obj: p")?;
    writeln!(out, "Subject To")?;
    let mut w = Writer { out, constraints: 0 };

    // Every task executed exactly once.
    for &t in &tasks {
        let mut e = Expr::default();
        for k in teams.clone() {
            for h in days.clone() {
                e.add(1.0, yname(k, h, t));
            }
        }
        w.row(&format!("c2_{}_{}", t.customer, t.task), &e, "=", 1.0)?;
    }

    // Precedence: start of a no earlier than completion of b.
    for i in inst.customers() {
        for &(a, b) in &inst.service_of(i).deps {
            let ta = TaskRef::new(i, a);
            let tb = TaskRef::new(i, b);
            let mut e = Expr::default();
            for k in teams.clone() {
                let nk = &team_nodes[k - 1];
                for h in days.clone() {
                    let offset = d * f64::from(h - 1);
                    if time(k, ta).is_some() {
                        e.add(offset, yname(k, h, ta));
                        for &u in nk.iter().filter(|&&u| u != Vertex::Task(ta)) {
                            e.add(1.0, qname(k, h, u, Vertex::Task(ta)));
                        }
                    }
                    if let Some(tb_hours) = time(k, tb) {
                        e.add(-(offset + tb_hours), yname(k, h, tb));
                        for &u in nk.iter().filter(|&&u| u != Vertex::Task(tb)) {
                            e.add(-1.0, qname(k, h, u, Vertex::Task(tb)));
                        }
                    }
                }
            }
            w.row(&format!("c3_{i}_{a}_{b}"), &e, ">=", 0.0)?;
        }
    }

    for k in teams.clone() {
        let nk = &team_nodes[k - 1];
        for h in days.clone() {
            for &v in nk.iter().skip(1) {
                let t = v.task().expect("task vertex");
                let tag = format!("{k}_{h}_{}", vid(v));

                // Leaving the depot takes at least the travel time.
                let mut e = Expr::default();
                e.add(inst.extended_travel_time(Vertex::Depot, v), xname(k, h, Vertex::Depot, v));
                e.add(-1.0, qname(k, h, Vertex::Depot, v));
                w.row(&format!("c4_{tag}"), &e, "<=", 0.0)?;

                // Flow of time through v.
                let mut e = Expr::default();
                for &u in nk.iter().filter(|&&u| u != v) {
                    e.add(1.0, qname(k, h, u, v));
                    e.add(inst.extended_travel_time(v, u), xname(k, h, v, u));
                }
                e.add(time(k, t).expect("usable task"), yname(k, h, t));
                for &u in nk.iter().filter(|&&u| u != v) {
                    e.add(-1.0, qname(k, h, v, u));
                }
                w.row(&format!("c5_{tag}"), &e, "<=", 0.0)?;
            }

            // Arrival moments only on used arcs, within the day.
            for &u in nk {
                for &v in nk.iter().filter(|&&v| v != u) {
                    let mut e = Expr::default();
                    e.add(1.0, qname(k, h, u, v));
                    e.add(-d, xname(k, h, u, v));
                    w.row(&format!("c6_{k}_{h}_{}_{}", vid(u), vid(v)), &e, "<=", 0.0)?;
                }
            }

            // In- and out-degree equal y.
            for &v in nk.iter().skip(1) {
                let t = v.task().expect("task vertex");
                let tag = format!("{k}_{h}_{}", vid(v));
                let mut inflow = Expr::default();
                let mut outflow = Expr::default();
                for &u in nk.iter().filter(|&&u| u != v) {
                    inflow.add(1.0, xname(k, h, u, v));
                    outflow.add(1.0, xname(k, h, v, u));
                }
                inflow.add(-1.0, yname(k, h, t));
                outflow.add(-1.0, yname(k, h, t));
                w.row(&format!("c7_{tag}"), &inflow, "=", 0.0)?;
                w.row(&format!("c8_{tag}"), &outflow, "=", 0.0)?;
            }

            if nk.len() > 1 {
                // One departure from the depot per day.
                let mut e = Expr::default();
                for &v in nk.iter().skip(1) {
                    e.add(1.0, xname(k, h, Vertex::Depot, v));
                }
                w.row(&format!("c9_{k}_{h}"), &e, "<=", 1.0)?;

                // The makespan covers every working day.
                let mut e = Expr::default();
                e.add(1.0, "p".to_string());
                for &v in nk.iter().skip(1) {
                    e.add(-f64::from(h), xname(k, h, Vertex::Depot, v));
                }
                w.row(&format!("c10_{k}_{h}"), &e, ">=", 0.0)?;
            }
        }
    }
    debug_assert!(w.constraints > 0 || tasks.is_empty());
    let out = w.out;

    writeln!(out, "Bounds")?;
    for k in teams.clone() {
        for h in days.clone() {
            for &t in &tasks {
                if time(k, t).is_none() {
                    writeln!(out, " {} = 0", yname(k, h, t))?;
                }
            }
        }
    }
    writeln!(out, "Generals")?;
    writeln!(out, " p")?;
    writeln!(out, "Binaries")?;
    for k in teams.clone() {
        let nk = &team_nodes[k - 1];
        for h in days.clone() {
            for &u in nk {
                for &v in nk.iter().filter(|&&v| v != u) {
                    writeln!(out, " {}", xname(k, h, u, v))?;
                }
            }
            for &t in &tasks {
                writeln!(out, " {}", yname(k, h, t))?;
            }
        }
    }
    writeln!(out, "End")?;
    Ok(())
}

/// Counts recovered from an LP file by [`lint_lp`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LintReport {
    pub constraints: usize,
    pub binaries: usize,
    pub generals: usize,
    /// Variables referenced in the objective or constraints that are
    /// neither binary nor general integer.
    pub continuous: usize,
    pub fixed_bounds: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("LP line {line}: {reason}")]
pub struct LintError {
    pub line: usize,
    pub reason: String,
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

fn parse_expr(tokens: &[&str], line: usize, vars: &mut std::collections::BTreeSet<String>) -> Result<(), LintError> {
    let lerr = |reason: String| LintError { line, reason };
    let mut i = 0;
    let mut first = true;
    while i < tokens.len() {
        if matches!(tokens[i], "+" | "-") {
            i += 1;
        } else if !first {
            return Err(lerr(format!("expected `+` or `-` before `{}`", tokens[i])));
        }
        first = false;
        let tok = tokens.get(i).ok_or_else(|| lerr("dangling sign".into()))?;
        if tok.parse::<f64>().is_ok() {
            i += 1;
        }
        let var = tokens.get(i).ok_or_else(|| lerr("coefficient without variable".into()))?;
        if !valid_name(var) {
            return Err(lerr(format!("invalid variable name `{var}`")));
        }
        vars.insert(var.to_string());
        i += 1;
    }
    Ok(())
}

/// Grammar check of an LP file written by [`emit_model`], returning
/// section counts.
pub fn lint_lp(text: &str) -> Result<LintReport, LintError> {
    #[derive(PartialEq, PartialOrd, Clone, Copy)]
    enum Section {
        Start,
        Objective,
        Constraints,
        Bounds,
        Generals,
        Binaries,
        End,
    }
    let mut section = Section::Start;
    let mut report = LintReport::default();
    let mut vars = std::collections::BTreeSet::new();
    let mut binaries = std::collections::BTreeSet::new();
    let mut generals = std::collections::BTreeSet::new();
    let mut objective_seen = false;
    // Pending multi-line constraint: starting line and tokens so far.
    let mut pending: Option<(usize, Vec<String>)> = None;

    let finish_row =
        |start: usize, tokens: &[String], vars: &mut std::collections::BTreeSet<String>| -> Result<(), LintError> {
            let toks: Vec<&str> = tokens.iter().map(String::as_str).collect();
            let name = toks.first().ok_or_else(|| LintError { line: start, reason: "empty row".into() })?;
            let name = name.strip_suffix(':').filter(|n| valid_name(n)).ok_or_else(|| LintError {
                line: start,
                reason: format!("row must start with `name:`, found `{name}`"),
            })?;
            let _ = name;
            let n = toks.len();
            if n < 4 {
                return Err(LintError { line: start, reason: "row too short".into() });
            }
            if !matches!(toks[n - 2], "<=" | ">=" | "=") {
                return Err(LintError { line: start, reason: format!("expected comparison, found `{}`", toks[n - 2]) });
            }
            toks[n - 1]
                .parse::<f64>()
                .map_err(|_| LintError { line: start, reason: format!("invalid right-hand side `{}`", toks[n - 1]) })?;
            parse_expr(&toks[1..n - 2], start, vars)
        };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('\\') {
            continue;
        }
        let next = match trimmed {
            "Minimize" => Some(Section::Objective),
            "Subject To" => Some(Section::Constraints),
            "Bounds" => Some(Section::Bounds),
            "Generals" => Some(Section::Generals),
            "Binaries" => Some(Section::Binaries),
            "End" => Some(Section::End),
            _ => None,
        };
        if let Some(next) = next {
            if let Some((start, _)) = pending {
                return Err(LintError { line: start, reason: "unterminated constraint".into() });
            }
            if next <= section {
                return Err(LintError { line, reason: format!("section `{trimmed}` out of order") });
            }
            section = next;
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        match section {
            Section::Start => return Err(LintError { line, reason: "content before `Minimize`".into() }),
            Section::End => return Err(LintError { line, reason: "content after `End`".into() }),
            Section::Objective => {
                if tokens.first().map(|t| t.ends_with(':')) != Some(true) {
                    return Err(LintError { line, reason: "objective must be named".into() });
                }
                parse_expr(&tokens[1..], line, &mut vars)?;
                objective_seen = true;
            }
            Section::Constraints => {
                let continuation = raw.starts_with("  ") && pending.is_some();
                let (start, mut acc) = match pending.take() {
                    Some(p) if continuation => p,
                    Some((start, _)) => {
                        return Err(LintError { line: start, reason: "unterminated constraint".into() })
                    }
                    None => (line, Vec::new()),
                };
                acc.extend(tokens.iter().map(|s| s.to_string()));
                let n = acc.len();
                let complete = n >= 2 && matches!(acc[n - 2].as_str(), "<=" | ">=" | "=");
                if complete {
                    finish_row(start, &acc, &mut vars)?;
                    report.constraints += 1;
                } else {
                    pending = Some((start, acc));
                }
            }
            Section::Bounds => {
                if tokens.len() != 3 || !valid_name(tokens[0]) || tokens[1] != "=" || tokens[2].parse::<f64>().is_err()
                {
                    return Err(LintError { line, reason: "expected `var = value`".into() });
                }
                report.fixed_bounds += 1;
            }
            Section::Generals | Section::Binaries => {
                for t in tokens {
                    if !valid_name(t) {
                        return Err(LintError { line, reason: format!("invalid variable name `{t}`") });
                    }
                    let set = if section == Section::Generals { &mut generals } else { &mut binaries };
                    if !set.insert(t.to_string()) {
                        return Err(LintError { line, reason: format!("`{t}` declared twice") });
                    }
                }
            }
        }
    }
    if let Some((start, _)) = pending {
        return Err(LintError { line: start, reason: "unterminated constraint".into() });
    }
    if section != Section::End {
        return Err(LintError { line: text.lines().count() + 1, reason: "missing `End`".into() });
    }
    if !objective_seen {
        return Err(LintError { line: 1, reason: "missing objective".into() });
    }
    report.binaries = binaries.len();
    report.generals = generals.len();
    report.continuous = vars.iter().filter(|v| !binaries.contains(*v) && !generals.contains(*v)).count();
    Ok(report)
}
