//! Command implementations behind the `mwsrpdt` binary.

pub mod bench;
pub mod config;
pub mod error;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use mwsrpdt_core::aco::{self, Variant};
use mwsrpdt_core::constructive::construct_greedy;
use mwsrpdt_core::{evaluate, read_instance, read_solution, Instance, ObjectiveValue, Solution};

pub use bench::{histogram, run_bench, BenchRow, BenchSpec, HistogramBin, CSV_HEADER};
pub use config::ParamSources;
pub use error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, clap::ValueEnum)]
pub enum Algo {
    Constructive,
    As,
    Mmas,
    Acs,
}

impl Algo {
    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Constructive => "constructive",
            Algo::As => "as",
            Algo::Mmas => "mmas",
            Algo::Acs => "acs",
        }
    }

    pub fn variant(self) -> Option<Variant> {
        match self {
            Algo::Constructive => None,
            Algo::As => Some(Variant::AntSystem),
            Algo::Mmas => Some(Variant::MaxMin),
            Algo::Acs => Some(Variant::ColonySystem),
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algo {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "constructive" => Ok(Algo::Constructive),
            "as" => Ok(Algo::As),
            "mmas" => Ok(Algo::Mmas),
            "acs" => Ok(Algo::Acs),
            other => Err(CliError::Usage(format!("unknown algorithm `{other}`"))),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    read_instance(&read_text(path)?).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

pub fn load_solution(path: &Path) -> Result<Solution> {
    read_solution(&read_text(path)?).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solution: Solution,
    pub objective: ObjectiveValue,
    /// Ants and iterations actually used (0 for the constructive heuristic).
    pub ants: usize,
    pub iters: usize,
    pub seed: u64,
    pub seconds: f64,
}

pub fn solve_instance(inst: &Instance, algo: Algo, sources: &ParamSources<'_>) -> Result<SolveOutcome> {
    let started = Instant::now();
    let (solution, ants, iters, seed) = match algo.variant() {
        None => (construct_greedy(inst)?, 0, 0, sources.seed.unwrap_or(0)),
        Some(variant) => {
            let params = config::resolve(variant, sources)?;
            let result = aco::run(inst, &params, None)?;
            (result.best.solution, params.num_ants, params.max_iter, params.seed)
        }
    };
    let seconds = started.elapsed().as_secs_f64();
    let objective = evaluate(inst, &solution).map_err(|e| CliError::Failed(e.to_string()))?;
    Ok(SolveOutcome { solution, objective, ants, iters, seed, seconds })
}

/// `(type, n, id)` from a `<type>_<n>_<id>.mwsrpdt` file name.
pub fn parse_instance_name(path: &Path) -> Option<(String, usize, u64)> {
    let stem = path.file_stem()?.to_str()?;
    let mut parts = stem.rsplitn(3, '_');
    let id = parts.next()?.parse().ok()?;
    let n = parts.next()?.parse().ok()?;
    let ty = parts.next()?.to_string();
    Some((ty, n, id))
}

pub fn instance_file_name(inst: &Instance, id: u64) -> PathBuf {
    PathBuf::from(format!("{}_{}_{}.mwsrpdt", inst.instance_type(), inst.n(), id))
}
