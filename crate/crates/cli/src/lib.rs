//! Runner, benchmark harness and instance generator behind the `ttef` binary.

pub mod bench;
pub mod generate;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ttef_core::psplib::{self, example1};
use ttef_core::{solve_project, Mode, Project, PropLevel, SolverConfig};

pub use report::RunReport;

/// Built-in instance name accepted in place of a path.
pub const EXAMPLE1: &str = "@example1";

#[derive(Debug, Parser)]
#[command(name = "ttef", version, about = "Cumulative scheduling with explained time-table-edge-finding")]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve every instance of a directory under several configurations and
    /// print one aggregate row per configuration.
    Bench(BenchArgs),
    /// Write random single-mode instances shaped like the 30-activity archive set.
    Generate(generate::GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Ub,
    Lb,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Ub => Mode::Upper,
            ModeArg::Lb => Mode::Lower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PropArg {
    Tt,
    Ttefc,
    Ttef,
}

impl From<PropArg> for PropLevel {
    fn from(p: PropArg) -> PropLevel {
        match p {
            PropArg::Tt => PropLevel::Tt,
            PropArg::Ttefc => PropLevel::TtefCheck,
            PropArg::Ttef => PropLevel::Ttef,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputArg {
    Csv,
    Json,
}

/// Search settings shared by the runner and the bench harness.
#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Wall-clock limit per instance in seconds.
    #[arg(long, default_value_t = 600.0)]
    pub time_limit: f64,
    #[arg(long, default_value_t = 250)]
    pub restart_base: u64,
    #[arg(long, default_value_t = 2.0)]
    pub restart_factor: f64,
    /// Decisions per restart taken from the serial generation heuristic.
    #[arg(long, default_value_t = 500)]
    pub sgs_budget: u64,
    /// First makespan tried by `--mode lb`.
    #[arg(long)]
    pub start_makespan: Option<i64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; reports keep the input order.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Report 0 seconds so that output is reproducible byte for byte.
    #[arg(long)]
    pub no_timing: bool,
}

impl SearchArgs {
    pub fn config(&self, mode: Mode, prop: PropLevel) -> Result<SolverConfig, String> {
        if !self.time_limit.is_finite() || self.time_limit <= 0.0 {
            return Err(format!("invalid time limit {}", self.time_limit));
        }
        if self.jobs == 0 {
            return Err("--jobs must be at least 1".into());
        }
        let config = SolverConfig {
            prop,
            mode,
            restart_base: self.restart_base,
            restart_factor: self.restart_factor,
            sgs_budget: self.sgs_budget,
            time_limit: Some(Duration::from_secs_f64(self.time_limit)),
            start_makespan: self.start_makespan,
            seed: self.seed,
            ..SolverConfig::default()
        };
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, value_enum, default_value = "ub")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "ttef")]
    pub prop: PropArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub output: OutputArg,
    #[command(flatten)]
    pub search: SearchArgs,
    /// `.sm` files, or `@example1` for the built-in five-activity instance.
    #[arg(required = true)]
    pub instances: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Directory holding `.sm` files.
    pub dir: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ub")]
    pub modes: Vec<ModeArg>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "tt,ttef")]
    pub props: Vec<PropArg>,
    /// Also write every individual run as CSV to this file.
    #[arg(long)]
    pub details: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
}

/// Reads a path or the built-in example.
pub fn load(input: &str) -> Result<Project, String> {
    if input == EXAMPLE1 {
        return Ok(example1());
    }
    let path = Path::new(input);
    let text = std::fs::read_to_string(path).map_err(|e| format!("{input}: {e}"))?;
    let raw = psplib::parse_sm(&text).map_err(|e| format!("{input}: {e}"))?;
    psplib::to_project(&raw, &instance_name(input), None).map_err(|e| format!("{input}: {e}"))
}

pub fn instance_name(input: &str) -> String {
    if let Some(name) = input.strip_prefix('@') {
        return name.to_string();
    }
    Path::new(input)
        .file_stem()
        .map_or_else(|| input.to_string(), |s| s.to_string_lossy().into_owned())
}

/// Solves one instance; load failures become an `error` report.
pub fn run_one(input: &str, config: &SolverConfig, timing: bool) -> (RunReport, Option<String>) {
    let name = instance_name(input);
    match load(input) {
        Ok(project) => {
            let t = Instant::now();
            let result = solve_project(&project, config);
            let secs = if timing { t.elapsed().as_secs_f64() } else { 0.0 };
            (RunReport::new(&name, config, &result, secs), None)
        }
        Err(e) => (RunReport::error(&name, config), Some(e)),
    }
}

/// Applies `f` to every item on `jobs` threads, keeping the input order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.min(items.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let r = f(item);
                out.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    out.into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every item was processed"))
        .collect()
}

/// Runs the solver on every instance, writing reports to `out` and errors
/// to `err`. Returns the exit code.
pub fn run(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let config = match args.search.config(args.mode.into(), args.prop.into()) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let results = parallel_map(&args.instances, args.search.jobs, |input| {
        run_one(input, &config, !args.search.no_timing)
    });
    let mut code = 0;
    for (_, e) in &results {
        if let Some(e) = e {
            let _ = writeln!(err, "error: {e}");
            code = 2;
        }
    }
    let reports: Vec<RunReport> = results.into_iter().map(|(r, _)| r).collect();
    let written = match args.output {
        OutputArg::Csv => report::write_csv(&reports, out),
        OutputArg::Json => report::write_json(&reports, out),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return 1;
    }
    code
}

/// Entry point shared by the binary and the tests.
pub fn main_with(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cli.command {
        Some(Command::Bench(b)) => bench::bench(&b, out, err),
        Some(Command::Generate(g)) => generate::generate(&g, err),
        None => run(&cli.run, out, err),
    }
}
