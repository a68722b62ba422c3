use std::io::{self, Write};

use serde::Serialize;
use ttef_core::{Outcome, SolveResult, SolverConfig, Time};

/// One line of output per solved instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub instance: String,
    pub mode: &'static str,
    pub prop: &'static str,
    pub status: &'static str,
    /// Makespan or bound; empty for `unknown`, `infeasible` and `error`.
    pub value: Option<Time>,
    pub failures: u64,
    pub decisions: u64,
    pub seconds: f64,
    pub seed: u64,
}

impl RunReport {
    pub fn new(instance: &str, config: &SolverConfig, result: &SolveResult, seconds: f64) -> Self {
        RunReport {
            instance: instance.to_string(),
            mode: config.mode.name(),
            prop: config.prop.name(),
            status: result.outcome.status(),
            value: result.outcome.value(),
            failures: result.stats.failures,
            decisions: result.stats.decisions,
            seconds: (seconds * 1000.0).round() / 1000.0,
            seed: config.seed,
        }
    }

    pub fn error(instance: &str, config: &SolverConfig) -> Self {
        RunReport {
            instance: instance.to_string(),
            mode: config.mode.name(),
            prop: config.prop.name(),
            status: "error",
            value: None,
            failures: 0,
            decisions: 0,
            seconds: 0.0,
            seed: config.seed,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Outcome::Optimal(0).status()
    }
}

pub fn write_csv(reports: &[RunReport], out: &mut dyn Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r)?;
    }
    if reports.is_empty() {
        w.write_record(["instance", "mode", "prop", "status", "value", "failures", "decisions", "seconds", "seed"])?;
    }
    w.flush()
}

/// One JSON object per line.
pub fn write_json(reports: &[RunReport], out: &mut dyn Write) -> io::Result<()> {
    for r in reports {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
