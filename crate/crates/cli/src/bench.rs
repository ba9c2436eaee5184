//! Batch runs over a directory of instances and the histogram of
//! constructive-versus-ACO day counts.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::config::ParamSources;
use crate::error::{CliError, Result};
use crate::{load_instance, parse_instance_name, solve_instance, Algo};

pub const CSV_HEADER: [&str; 11] =
    ["type", "n", "id", "tasks", "algo", "ants", "iters", "seed", "ub", "fprime", "seconds"];

/// Environment variable capping the worker threads of `bench`.
pub const THREADS_ENV: &str = "MWSRPDT_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub instance_type: String,
    pub n: usize,
    pub id: u64,
    pub tasks: usize,
    pub algo: Algo,
    pub ants: usize,
    pub iters: usize,
    pub seed: u64,
    pub ub: u32,
    pub fprime: f64,
    pub seconds: f64,
}

impl BenchRow {
    pub fn record(&self) -> [String; 11] {
        [
            self.instance_type.clone(),
            self.n.to_string(),
            self.id.to_string(),
            self.tasks.to_string(),
            self.algo.to_string(),
            self.ants.to_string(),
            self.iters.to_string(),
            self.seed.to_string(),
            self.ub.to_string(),
            format!("{:.6}", self.fprime),
            format!("{:.1}", self.seconds),
        ]
    }

    pub fn to_csv(&self, header: bool) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if header {
            w.write_record(CSV_HEADER)?;
        }
        w.write_record(self.record())?;
        let bytes = w.into_inner().map_err(|e| CliError::io("<memory>", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub dir: PathBuf,
    pub algos: Vec<Algo>,
    pub repeats: usize,
    pub ants: Option<usize>,
    pub iters: Option<usize>,
    pub seed: u64,
    pub config: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub threads: Option<usize>,
}

pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

/// Instance files (`*.mwsrpdt`) in `dir`, sorted by name.
pub fn list_instances(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "mwsrpdt") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn bench_instance(spec: &BenchSpec, index: usize, path: &Path) -> Result<Vec<BenchRow>> {
    let inst = load_instance(path)?;
    let (instance_type, n, id) =
        parse_instance_name(path).unwrap_or_else(|| (inst.instance_type().to_string(), inst.n(), index as u64));
    let mut rows = Vec::new();
    for &algo in &spec.algos {
        for r in 0..spec.repeats {
            let sources = ParamSources {
                config: spec.config.as_deref(),
                ants: spec.ants,
                iters: spec.iters,
                seed: Some(spec.seed.wrapping_add(r as u64)),
                overrides: &spec.overrides,
            };
            let out = solve_instance(&inst, algo, &sources)?;
            rows.push(BenchRow {
                instance_type: instance_type.clone(),
                n,
                id,
                tasks: inst.total_tasks(),
                algo,
                ants: out.ants,
                iters: out.iters,
                seed: out.seed,
                ub: out.objective.p,
                fprime: out.objective.fprime,
                seconds: out.seconds,
            });
        }
    }
    Ok(rows)
}

struct Ordered<W: Write> {
    next: usize,
    pending: BTreeMap<usize, Vec<BenchRow>>,
    writer: csv::Writer<W>,
    written: usize,
}

impl<W: Write> Ordered<W> {
    fn push(&mut self, index: usize, rows: Vec<BenchRow>) -> Result<()> {
        self.pending.insert(index, rows);
        while let Some(rows) = self.pending.remove(&self.next) {
            for row in rows {
                self.writer.write_record(row.record())?;
                self.writer.flush().map_err(|e| CliError::io("<bench output>", e))?;
                self.written += 1;
            }
            self.next += 1;
        }
        Ok(())
    }
}

/// Runs every algorithm on every instance of `spec.dir`, instances in
/// parallel. Rows come out in file-name order, each flushed as soon as all
/// earlier instances are done. Returns the number of rows written.
pub fn run_bench<W: Write + Send>(spec: &BenchSpec, out: W) -> Result<usize> {
    if spec.algos.is_empty() || spec.repeats == 0 {
        return Err(CliError::Usage("bench needs at least one algorithm and one repeat".into()));
    }
    let files = list_instances(&spec.dir)?;
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    writer.flush().map_err(|e| CliError::io("<bench output>", e))?;
    let state = Mutex::new(Ordered { next: 0, pending: BTreeMap::new(), writer, written: 0 });

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = spec.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| {
        files.par_iter().enumerate().try_for_each(|(i, path)| {
            let rows = bench_instance(spec, i, path)?;
            state.lock().expect("writer lock").push(i, rows)
        })
    })?;
    Ok(state.into_inner().expect("writer lock").written)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistogramBin {
    pub difference_in_days: i64,
    pub count: usize,
}

/// Per instance, constructive `ub` minus the best `ub` of `algo` over
/// repeats; bins cover every integer between the extremes. Instances
/// missing either algorithm are left out.
pub fn histogram(bench_csv: impl Read, algo: Algo) -> Result<Vec<HistogramBin>> {
    let mut reader = csv::Reader::from_reader(bench_csv);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("bench csv has no `{name}` column")))
    };
    let (ty, n, id, al, ub) = (col("type")?, col("n")?, col("id")?, col("algo")?, col("ub")?);

    let mut best: HashMap<(String, String, String), [Option<i64>; 2]> = HashMap::new();
    for record in reader.records() {
        let record = record?;
        let a: Algo = record[al].parse()?;
        let slot = match a {
            Algo::Constructive => 0,
            x if x == algo => 1,
            _ => continue,
        };
        let value: i64 =
            record[ub].parse().map_err(|_| CliError::Usage(format!("bad ub `{}` in bench csv", &record[ub])))?;
        let key = (record[ty].to_string(), record[n].to_string(), record[id].to_string());
        let entry = &mut best.entry(key).or_default()[slot];
        *entry = Some(entry.map_or(value, |v| v.min(value)));
    }

    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for [c, a] in best.into_values() {
        if let (Some(c), Some(a)) = (c, a) {
            *counts.entry(c - a).or_default() += 1;
        }
    }
    let (Some(&lo), Some(&hi)) = (counts.keys().next(), counts.keys().next_back()) else {
        return Ok(Vec::new());
    };
    Ok((lo..=hi).map(|d| HistogramBin { difference_in_days: d, count: counts.get(&d).copied().unwrap_or(0) }).collect())
}

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut s = String::from("difference_in_days,count\n");
    for b in bins {
        s.push_str(&format!("{},{}\n", b.difference_in_days, b.count));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_formatting() {
        let row = BenchRow {
            instance_type: "A".into(),
            n: 10,
            id: 3,
            tasks: 17,
            algo: Algo::Mmas,
            ants: 100,
            iters: 100,
            seed: 9,
            ub: 4,
            fprime: 3.0 + 2.0 / 3.0,
            seconds: 12.345,
        };
        assert_eq!(
            row.to_csv(true).unwrap(),
            "type,n,id,tasks,algo,ants,iters,seed,ub,fprime,seconds\nA,10,3,17,mmas,100,100,9,4,3.666667,12.3\n"
        );
    }

    #[test]
    fn histogram_uses_best_repeat_and_fills_gaps() {
        let csv = "type,n,id,tasks,algo,ants,iters,seed,ub,fprime,seconds\n\
                   A,10,0,9,constructive,0,0,0,5,4.5,0.0\n\
                   A,10,0,9,mmas,5,5,0,5,4.4,0.0\n\
                   A,10,0,9,mmas,5,5,1,3,2.4,0.0\n\
                   A,10,1,9,constructive,0,0,0,4,3.5,0.0\n\
                   A,10,1,9,mmas,5,5,0,4,3.4,0.0\n\
                   A,10,2,9,constructive,0,0,0,4,3.5,0.0\n\
                   A,10,2,9,acs,5,5,0,2,1.4,0.0\n";
        let bins = histogram(csv.as_bytes(), Algo::Mmas).unwrap();
        assert_eq!(
            bins,
            vec![
                HistogramBin { difference_in_days: 0, count: 1 },
                HistogramBin { difference_in_days: 1, count: 0 },
                HistogramBin { difference_in_days: 2, count: 1 },
            ]
        );
        assert_eq!(histogram_csv(&bins[..1]), "difference_in_days,count\n0,1\n");
    }
}
