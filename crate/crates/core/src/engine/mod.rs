//! Propagation engine, clause learning and the two solving modes.
//!
//! Variable layout: start times `0..n`, the objective `n`, then one 0/1
//! order variable per disjunctive pair of [`Project::disjunctions`] (1 when
//! the first activity of the pair precedes the second).

mod analysis;
mod search;
mod solver;

use std::time::Duration;

pub use analysis::{analyze_conflict, Analysis};
pub use search::{restart_limit, root_lower_bound, solve, solve_audited, solve_lb, solve_ub};
pub use solver::Solver;

use crate::domains::{Explanation, Lit};
use crate::model::{Project, Time};

/// Which cumulative propagators run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropLevel {
    /// Time-table check and filtering.
    Tt,
    /// `Tt` plus the edge-finding overload check.
    TtefCheck,
    /// `TtefCheck` plus edge-finding filtering.
    Ttef,
}

impl PropLevel {
    pub fn name(self) -> &'static str {
        match self {
            PropLevel::Tt => "tt",
            PropLevel::TtefCheck => "ttefc",
            PropLevel::Ttef => "ttef",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Branch and bound from above.
    Upper,
    /// Destructive lower bounds: refute makespans bottom-up.
    Lower,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Upper => "ub",
            Mode::Lower => "lb",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub prop: PropLevel,
    pub mode: Mode,
    /// Failures before the first restart.
    pub restart_base: u64,
    pub restart_factor: f64,
    /// Decisions per (re)start made by the serial generation heuristic.
    pub sgs_budget: u64,
    pub time_limit: Option<Duration>,
    /// First makespan tried in lower-bound mode.
    pub start_makespan: Option<Time>,
    pub seed: u64,
    /// Without learning the search backtracks chronologically.
    pub learning: bool,
    /// Learned clauses kept across restarts.
    pub clause_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            prop: PropLevel::Ttef,
            mode: Mode::Upper,
            restart_base: 250,
            restart_factor: 2.0,
            sgs_budget: 500,
            time_limit: None,
            start_makespan: None,
            seed: 0,
            learning: true,
            clause_cap: 20_000,
        }
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("restart base must be at least 1")]
    RestartBase,
    #[error("restart factor must be at least 1.0")]
    RestartFactor,
    #[error("start makespan must not be negative")]
    StartMakespan,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.restart_base < 1 {
            return Err(ConfigError::RestartBase);
        }
        if self.restart_factor.is_nan() || self.restart_factor < 1.0 {
            return Err(ConfigError::RestartFactor);
        }
        if self.start_makespan.is_some_and(|m| m < 0) {
            return Err(ConfigError::StartMakespan);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveStats {
    pub failures: u64,
    pub decisions: u64,
    pub restarts: u64,
    pub learned: u64,
    pub solutions: u64,
}

impl std::ops::AddAssign for SolveStats {
    fn add_assign(&mut self, o: SolveStats) {
        self.failures += o.failures;
        self.decisions += o.decisions;
        self.restarts += o.restarts;
        self.learned += o.learned;
        self.solutions += o.solutions;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Optimal(Time),
    /// Best makespan found before the time limit.
    Feasible(Time),
    /// Proven lower bound at the time limit.
    LowerBound(Time),
    Infeasible,
    Unknown,
}

impl Outcome {
    pub fn value(&self) -> Option<Time> {
        match *self {
            Outcome::Optimal(v) | Outcome::Feasible(v) | Outcome::LowerBound(v) => Some(v),
            Outcome::Infeasible | Outcome::Unknown => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            Outcome::Optimal(_) => "optimal",
            Outcome::Feasible(_) => "feasible",
            Outcome::LowerBound(_) => "lower_bound",
            Outcome::Infeasible => "infeasible",
            Outcome::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub outcome: Outcome,
    pub stats: SolveStats,
    /// Start times of the best schedule found.
    pub schedule: Option<Vec<Time>>,
}

/// Hooks into the search, used by tests to audit the solver.
pub trait SearchObserver {
    /// Every explanation a propagator emits, before it is applied.
    fn on_explanation(&mut self, _e: &Explanation) {}
    /// Bounds of all variables before and after propagating a node
    /// (`None` after a conflict).
    fn on_node(&mut self, _before: &[(Time, Time)], _after: Option<&[(Time, Time)]>) {}
    /// A learned clause and the root upper bound of the objective when it was learned.
    fn on_learned(&mut self, _clause: &[Lit], _objective_ub: Time) {}
    fn on_solution(&mut self, _starts: &[Time], _makespan: Time) {}
}

/// Observer that ignores everything.
pub struct NoObserver;

impl SearchObserver for NoObserver {}

/// Convenience wrapper over the default observer.
pub fn solve_project(project: &Project, config: &SolverConfig) -> SolveResult {
    solve(project, config, &mut NoObserver)
}
