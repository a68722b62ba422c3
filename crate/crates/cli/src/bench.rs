use std::collections::BTreeSet;
use std::io::{self, Write};
use std::path::PathBuf;

use serde::Serialize;

use crate::report::{self, RunReport};
use crate::{parallel_map, run_one, BenchArgs};

/// Aggregate over one configuration. `cmpr_*` columns only count instances
/// that every configuration solved to optimality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub mode: &'static str,
    pub prop: &'static str,
    pub instances: usize,
    pub solved: usize,
    pub common: usize,
    pub cmpr_seconds: Option<f64>,
    pub cmpr_failures: Option<f64>,
}

pub fn instance_files(dir: &std::path::Path) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "sm"))
        .collect();
    files.sort();
    Ok(files)
}

/// Rows in configuration order from `runs[config][instance]`.
pub fn aggregate(runs: &[Vec<RunReport>]) -> Vec<BenchRow> {
    let n = runs.first().map_or(0, Vec::len);
    let common: BTreeSet<usize> = (0..n).filter(|&i| runs.iter().all(|c| c[i].is_optimal())).collect();
    let mean = |xs: Vec<f64>, digits: i32| {
        let scale = 10f64.powi(digits);
        (!xs.is_empty()).then(|| (xs.iter().sum::<f64>() / xs.len() as f64 * scale).round() / scale)
    };
    runs.iter()
        .map(|c| BenchRow {
            mode: c.first().map_or("", |r| r.mode),
            prop: c.first().map_or("", |r| r.prop),
            instances: c.len(),
            solved: c.iter().filter(|r| r.is_optimal()).count(),
            common: common.len(),
            cmpr_seconds: mean(common.iter().map(|&i| c[i].seconds).collect(), 3),
            cmpr_failures: mean(common.iter().map(|&i| c[i].failures as f64).collect(), 1),
        })
        .collect()
}

pub fn bench(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let files = match instance_files(&args.dir) {
        Ok(f) if !f.is_empty() => f,
        Ok(_) => {
            let _ = writeln!(err, "error: no .sm files in {}", args.dir.display());
            return 2;
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", args.dir.display());
            return 2;
        }
    };
    let inputs: Vec<String> = files.iter().map(|p| p.to_string_lossy().into_owned()).collect();
    let mut configs = Vec::new();
    for &m in &args.modes {
        for &p in &args.props {
            match args.search.config(m.into(), p.into()) {
                Ok(c) => configs.push(c),
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return 2;
                }
            }
        }
    }
    let mut code = 0;
    let mut runs = Vec::new();
    for config in &configs {
        let results = parallel_map(&inputs, args.search.jobs, |s| run_one(s, config, !args.search.no_timing));
        let mut reports = Vec::new();
        for (r, e) in results {
            if let Some(e) = e {
                let _ = writeln!(err, "error: {e}");
                code = 2;
            }
            reports.push(r);
        }
        runs.push(reports);
    }
    if let Some(path) = &args.details {
        let all: Vec<RunReport> = runs.iter().flatten().cloned().collect();
        let written = std::fs::File::create(path).and_then(|mut f| report::write_csv(&all, &mut f));
        if let Err(e) = written {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            return 1;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    for row in aggregate(&runs) {
        if let Err(e) = w.serialize(row) {
            let _ = writeln!(err, "error: {e}");
            return 1;
        }
    }
    if w.flush().is_err() {
        return 1;
    }
    code
}
