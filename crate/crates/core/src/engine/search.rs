use std::time::Instant;

use super::solver::Solver;
use super::{Mode, Outcome, SearchObserver, SolveResult, SolveStats, SolverConfig};
use crate::domains::{BoundsSource, Lit, Source};
use crate::model::{Project, Time};

/// Failures allowed before restart `k`: `base * factor^k`.
pub fn restart_limit(base: u64, factor: f64, k: u32) -> u64 {
    (base as f64 * factor.powi(k as i32)).round() as u64
}

pub(super) enum Step {
    Solution(Vec<Time>),
    Exhausted,
    Timeout,
}

struct Restarts {
    enabled: bool,
    k: u32,
    since: u64,
    limit: u64,
}

impl Solver<'_, '_> {
    /// Searches from the root until a solution, exhaustion or the deadline.
    fn run(&mut self, restarts: bool, deadline: Option<Instant>) -> Step {
        let mut r = Restarts {
            enabled: restarts && self.config.learning,
            k: 0,
            since: 0,
            limit: restart_limit(self.config.restart_base, self.config.restart_factor, 0),
        };
        let mut sgs_left = self.config.sgs_budget;
        if self.infeasible_at_root() {
            return Step::Exhausted;
        }
        loop {
            let before = self.audit().then(|| self.dom.snapshot());
            let result = self.propagate();
            if let Some(before) = before {
                let after = result.is_ok().then(|| self.dom.snapshot());
                self.observer.on_node(&before, after.as_deref());
            }
            if let Err(conflict) = result {
                self.stats.failures += 1;
                r.since += 1;
                let alive = if self.config.learning {
                    self.learn(conflict)
                } else {
                    self.backtrack_chronological()
                };
                if !alive {
                    return Step::Exhausted;
                }
                continue;
            }
            if deadline.is_some_and(|d| Instant::now() >= d) {
                return Step::Timeout;
            }
            if r.enabled && r.since >= r.limit && self.dom.level() > 0 {
                self.backtrack(0);
                self.reduce_clauses();
                self.stats.restarts += 1;
                r.k += 1;
                r.since = 0;
                r.limit = restart_limit(self.config.restart_base, self.config.restart_factor, r.k);
                sgs_left = self.config.sgs_budget;
                continue;
            }
            if self.all_fixed() {
                return Step::Solution(self.start_times());
            }
            let lit = if sgs_left > 0 {
                sgs_left -= 1;
                self.sgs_choice()
            } else {
                self.activity_choice()
            }
            .expect("an unfixed start time exists");
            self.stats.decisions += 1;
            self.decide(lit);
        }
    }
}

fn deadline(config: &SolverConfig) -> Option<Instant> {
    config.time_limit.map(|t| Instant::now() + t)
}

fn makespan(project: &Project, starts: &[Time]) -> Time {
    starts
        .iter()
        .zip(&project.durations)
        .map(|(s, p)| s + p)
        .max()
        .unwrap_or(0)
}

/// Branch and bound: every solution tightens the objective at the root.
pub fn solve_ub(project: &Project, config: &SolverConfig, observer: &mut dyn SearchObserver) -> SolveResult {
    solve_ub_audited(project, config, observer, false)
}

pub(crate) fn solve_ub_audited(
    project: &Project,
    config: &SolverConfig,
    observer: &mut dyn SearchObserver,
    audit: bool,
) -> SolveResult {
    let end = deadline(config);
    let mut solver = Solver::with_audit(project, config.clone(), observer, audit);
    let mut best: Option<(Time, Vec<Time>)> = None;
    let outcome = loop {
        match solver.run(true, end) {
            Step::Solution(starts) => {
                let m = makespan(project, &starts);
                solver.stats.solutions += 1;
                solver.observer.on_solution(&starts, m);
                best = Some((m, starts));
                let obj = solver.objective();
                if !solver.post_root(Lit::leq(obj, m - 1), Source::Objective) {
                    break Outcome::Optimal(m);
                }
            }
            Step::Exhausted => break best.as_ref().map_or(Outcome::Infeasible, |b| Outcome::Optimal(b.0)),
            Step::Timeout => break best.as_ref().map_or(Outcome::Unknown, |b| Outcome::Feasible(b.0)),
        }
    };
    SolveResult {
        outcome,
        stats: solver.stats(),
        schedule: best.map(|b| b.1),
    }
}

/// Makespan bound implied by root propagation alone.
pub fn root_lower_bound(project: &Project, config: &SolverConfig) -> Option<Time> {
    let mut obs = super::NoObserver;
    let mut solver = Solver::new(project, config.clone(), &mut obs);
    solver.propagate().ok()?;
    Some(solver.domains().lb(solver.objective()))
}

/// Destructive lower bounds: refutes `m = start, start + 1, ...` until a
/// makespan admits a schedule. A fresh solver is built for every `m`.
pub fn solve_lb(project: &Project, config: &SolverConfig, observer: &mut dyn SearchObserver) -> SolveResult {
    solve_lb_audited(project, config, observer, false)
}

pub(crate) fn solve_lb_audited(
    project: &Project,
    config: &SolverConfig,
    observer: &mut dyn SearchObserver,
    audit: bool,
) -> SolveResult {
    let end = deadline(config);
    let mut stats = SolveStats::default();
    let (start, mut proven) = match config.start_makespan {
        Some(m) => (m, None),
        None => match root_lower_bound(project, config) {
            Some(m) => (m, Some(m)),
            None => {
                return SolveResult {
                    outcome: Outcome::Infeasible,
                    stats,
                    schedule: None,
                }
            }
        },
    };
    for m in start..=project.horizon {
        let mut solver = Solver::with_audit(project, config.clone(), &mut *observer, audit);
        let obj = solver.objective();
        let step = if solver.post_root(Lit::leq(obj, m), Source::Root) {
            solver.run(false, end)
        } else {
            Step::Exhausted
        };
        stats += solver.stats();
        match step {
            Step::Solution(starts) => {
                stats.solutions += 1;
                let mk = makespan(project, &starts);
                solver.observer.on_solution(&starts, mk);
                return SolveResult {
                    outcome: Outcome::Optimal(m),
                    stats,
                    schedule: Some(starts),
                };
            }
            Step::Exhausted => proven = Some(m + 1),
            Step::Timeout => {
                return SolveResult {
                    outcome: proven.map_or(Outcome::Unknown, Outcome::LowerBound),
                    stats,
                    schedule: None,
                }
            }
        }
        if end.is_some_and(|d| Instant::now() >= d) {
            return SolveResult {
                outcome: proven.map_or(Outcome::Unknown, Outcome::LowerBound),
                stats,
                schedule: None,
            };
        }
    }
    SolveResult {
        outcome: Outcome::Infeasible,
        stats,
        schedule: None,
    }
}

/// Dispatches on `config.mode`.
pub fn solve(project: &Project, config: &SolverConfig, observer: &mut dyn SearchObserver) -> SolveResult {
    match config.mode {
        Mode::Upper => solve_ub(project, config, observer),
        Mode::Lower => solve_lb(project, config, observer),
    }
}

/// Like [`solve`], additionally reporting every search node to the observer.
pub fn solve_audited(project: &Project, config: &SolverConfig, observer: &mut dyn SearchObserver) -> SolveResult {
    match config.mode {
        Mode::Upper => solve_ub_audited(project, config, observer, true),
        Mode::Lower => solve_lb_audited(project, config, observer, true),
    }
}
