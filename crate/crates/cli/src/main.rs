use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mwsrpdt_cli::bench::{histogram_csv, threads_from_env};
use mwsrpdt_cli::{
    instance_file_name, load_instance, load_solution, parse_instance_name, read_text, run_bench, solve_instance,
    write_text, Algo, BenchRow, BenchSpec, CliError, ParamSources, Result,
};
use mwsrpdt_core::instances::{generate, write_instance, GeneratorConfig};
use mwsrpdt_core::mip_export::{default_horizon, model_to_string, MipError};
use mwsrpdt_core::oracle::{solve_exact, OracleError, OracleLimits};
use mwsrpdt_core::validate::{check_feasible, write_solution};
use mwsrpdt_core::InstanceType;

#[derive(Parser)]
#[command(name = "mwsrpdt", version, about = "Multi-day workforce scheduling and routing with task dependencies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long = "type")]
        instance_type: InstanceType,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Solve one instance and print a CSV row.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "mmas")]
        algo: Algo,
        #[arg(long)]
        ants: Option<usize>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Parameter override `key=value`, repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
        /// TOML file of parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where to write the solution.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a solution against an instance.
    Validate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Solve a tiny instance exactly.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = OracleLimits::default().max_nodes)]
        max_nodes: u64,
        #[arg(long, default_value_t = OracleLimits::default().max_tasks)]
        max_tasks: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the time-indexed MIP model in LP format.
    ExportMip {
        #[arg(long)]
        instance: PathBuf,
        /// Number of days in the model (default: constructive makespan).
        #[arg(long)]
        horizon: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run algorithms over a directory of instances.
    Bench {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "constructive,mmas")]
        algos: Vec<Algo>,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long)]
        ants: Option<usize>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Histogram of constructive minus ACO day counts from a bench CSV.
    Histogram {
        #[arg(long)]
        bench_csv: PathBuf,
        #[arg(long, value_enum, default_value = "mmas")]
        algo: Algo,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn oracle_error(e: OracleError) -> CliError {
    match e {
        OracleError::Construct(c) => CliError::Stalled(c),
        other => CliError::Failed(other.to_string()),
    }
}

fn mip_error(e: MipError) -> CliError {
    match e {
        MipError::Construct(c) => CliError::Stalled(c),
        MipError::ZeroHorizon => CliError::Usage(e.to_string()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { n, instance_type, seed, count, out_dir } => {
            std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
            for id in 0..count {
                let cfg = GeneratorConfig::new(n, instance_type, seed.wrapping_add(id));
                let inst = generate(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
                let path = out_dir.join(instance_file_name(&inst, id));
                write_text(&path, &write_instance(&inst))?;
                println!("{}", path.display());
            }
        }
        Command::Solve { instance, algo, ants, iters, seed, params, config, out } => {
            let inst = load_instance(&instance)?;
            let sources = ParamSources { config: config.as_deref(), ants, iters, seed, overrides: &params };
            let outcome = solve_instance(&inst, algo, &sources)?;
            if let Some(path) = out {
                write_text(&path, &write_solution(&outcome.solution))?;
            }
            let (instance_type, n, id) =
                parse_instance_name(&instance).unwrap_or_else(|| (inst.instance_type().to_string(), inst.n(), 0));
            let row = BenchRow {
                instance_type,
                n,
                id,
                tasks: inst.total_tasks(),
                algo,
                ants: outcome.ants,
                iters: outcome.iters,
                seed: outcome.seed,
                ub: outcome.objective.p,
                fprime: outcome.objective.fprime,
                seconds: outcome.seconds,
            };
            print!("{}", row.to_csv(true)?);
        }
        Command::Validate { instance, solution } => {
            let inst = load_instance(&instance)?;
            let sol = load_solution(&solution)?;
            let report = check_feasible(&inst, &sol);
            if !report.ok() {
                for v in &report.violations {
                    println!("{v}");
                }
                return Err(CliError::Failed(format!("{} violations", report.violations.len())));
            }
            println!("feasible p={} m={}", sol.p, sol.m);
        }
        Command::Oracle { instance, max_nodes, max_tasks, out } => {
            let inst = load_instance(&instance)?;
            let limits = OracleLimits { max_nodes, max_tasks, ..OracleLimits::default() };
            let r = solve_exact(&inst, limits).map_err(oracle_error)?;
            if let Some(path) = out {
                write_text(&path, &write_solution(&r.solution))?;
            }
            println!("p={} m={} fprime={:.6} nodes={}", r.optimal.p, r.optimal.m, r.optimal.fprime, r.nodes_explored);
        }
        Command::ExportMip { instance, horizon, out } => {
            let inst = load_instance(&instance)?;
            let horizon = match horizon {
                Some(h) => h,
                None => default_horizon(&inst)?,
            };
            let (text, stats) = model_to_string(&inst, horizon).map_err(mip_error)?;
            write_text(&out, &text)?;
            println!(
                "horizon={} binaries={} continuous={} generals={} constraints={}",
                stats.horizon, stats.num_binary, stats.num_continuous, stats.num_general_integer, stats.num_constraints
            );
        }
        Command::Bench { dir, algos, repeats, ants, iters, seed, params, config, out } => {
            let spec = BenchSpec {
                dir,
                algos,
                repeats,
                ants,
                iters,
                seed,
                config,
                overrides: params,
                threads: threads_from_env()?,
            };
            match out {
                Some(path) => {
                    let file = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
                    run_bench(&spec, std::io::BufWriter::new(file))?;
                }
                None => {
                    run_bench(&spec, std::io::stdout())?;
                }
            }
        }
        Command::Histogram { bench_csv, algo, out } => {
            let text = read_text(&bench_csv)?;
            let bins = mwsrpdt_cli::histogram(text.as_bytes(), algo)?;
            let csv = histogram_csv(&bins);
            match out {
                Some(path) => write_text(&path, &csv)?,
                None => std::io::stdout().write_all(csv.as_bytes()).map_err(|e| CliError::io("<stdout>", e))?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
