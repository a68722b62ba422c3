//! Brute-force ground truth for small instances: exhaustive schedule
//! enumeration, direct energy sums, and an independent explanation checker.
//!
//! Nothing here shares code with the propagators beyond the model types.

use std::collections::BTreeSet;

use rand::Rng;
use thiserror::Error;

use crate::domains::{Bound, Explanation, Lit, Source, Window};
use crate::model::{Project, Resource, TaskBounds, Time};

/// Size limits within which the oracle agrees to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumLimits {
    pub max_activities: usize,
    pub max_horizon: Time,
    pub max_capacity: i64,
    /// Search nodes visited before the enumeration gives up.
    pub node_budget: u64,
}

impl Default for EnumLimits {
    fn default() -> Self {
        EnumLimits {
            max_activities: 6,
            max_horizon: 15,
            max_capacity: 4,
            node_budget: 20_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance exceeds enumeration limits: {0}")]
    TooLarge(String),
    #[error("node budget of {0} exhausted")]
    Budget(u64),
}

fn check_limits(project: &Project, limits: &EnumLimits) -> Result<(), OracleError> {
    if project.len() > limits.max_activities {
        return Err(OracleError::TooLarge(format!("{} activities", project.len())));
    }
    let span = project
        .windows
        .iter()
        .zip(&project.durations)
        .map(|(w, p)| w.1 + p)
        .max()
        .unwrap_or(0)
        - project.windows.iter().map(|w| w.0).min().unwrap_or(0);
    if span > limits.max_horizon {
        return Err(OracleError::TooLarge(format!("span {span}")));
    }
    if let Some(r) = project.resources.iter().find(|r| r.capacity > limits.max_capacity) {
        return Err(OracleError::TooLarge(format!("capacity {}", r.capacity)));
    }
    Ok(())
}

struct Enumerator<'a> {
    project: &'a Project,
    bounds: &'a [(Time, Time)],
    origin: Time,
    usage: Vec<Vec<i64>>,
    starts: Vec<Time>,
    nodes: u64,
    budget: u64,
}

impl Enumerator<'_> {
    fn fits(&self, i: usize, s: Time) -> bool {
        for &(a, b) in &self.project.precedences {
            if b == i && a < i && self.starts[a] + self.project.durations[a] > s {
                return false;
            }
            if a == i && b < i && s + self.project.durations[i] > self.starts[b] {
                return false;
            }
        }
        for (k, res) in self.project.resources.iter().enumerate() {
            let r = res.usages[i];
            if r == 0 {
                continue;
            }
            for t in s..s + self.project.durations[i] {
                if self.usage[k][(t - self.origin) as usize] + r > res.capacity {
                    return false;
                }
            }
        }
        true
    }

    fn occupy(&mut self, i: usize, s: Time, sign: i64) {
        for (k, res) in self.project.resources.iter().enumerate() {
            for t in s..s + self.project.durations[i] {
                self.usage[k][(t - self.origin) as usize] += sign * res.usages[i];
            }
        }
    }

    /// Calls `visit` on every complete schedule; stops early when it returns false.
    fn run(&mut self, i: usize, visit: &mut dyn FnMut(&[Time]) -> bool) -> Result<bool, OracleError> {
        if i == self.starts.len() {
            return Ok(visit(&self.starts));
        }
        let (lo, hi) = self.bounds[i];
        for s in lo..=hi {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(OracleError::Budget(self.budget));
            }
            if !self.fits(i, s) {
                continue;
            }
            self.starts[i] = s;
            self.occupy(i, s, 1);
            let go_on = self.run(i + 1, visit);
            self.occupy(i, s, -1);
            if !go_on? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn walk(
    project: &Project,
    bounds: &[(Time, Time)],
    limits: &EnumLimits,
    visit: &mut dyn FnMut(&[Time]) -> bool,
) -> Result<(), OracleError> {
    check_limits(project, limits)?;
    let n = project.len();
    let bounds: Vec<(Time, Time)> = (0..n)
        .map(|i| {
            let w = project.windows[i];
            let b = bounds.get(i).copied().unwrap_or(w);
            (b.0.max(w.0), b.1.min(w.1))
        })
        .collect();
    if bounds.iter().any(|b| b.0 > b.1) {
        return Ok(());
    }
    let origin = bounds.iter().map(|b| b.0).min().unwrap_or(0);
    let top = (0..n).map(|i| bounds[i].1 + project.durations[i]).max().unwrap_or(0);
    let len = (top - origin).max(0) as usize + 1;
    let mut e = Enumerator {
        project,
        bounds: &bounds,
        origin,
        usage: vec![vec![0; len]; project.resources.len()],
        starts: vec![0; n],
        nodes: 0,
        budget: limits.node_budget,
    };
    e.run(0, visit).map(|_| ())
}

/// Every start vector inside `bounds` (intersected with the initial windows)
/// that respects precedences and all capacities. Only the first `n` entries
/// of `bounds` are read; missing entries default to the windows.
pub fn enumerate_feasible(
    project: &Project,
    bounds: &[(Time, Time)],
    limits: &EnumLimits,
) -> Result<Vec<Vec<Time>>, OracleError> {
    let mut out = Vec::new();
    walk(project, bounds, limits, &mut |s| {
        out.push(s.to_vec());
        true
    })?;
    Ok(out)
}

pub fn find_feasible(
    project: &Project,
    bounds: &[(Time, Time)],
    limits: &EnumLimits,
) -> Result<Option<Vec<Time>>, OracleError> {
    let mut found = None;
    walk(project, bounds, limits, &mut |s| {
        found = Some(s.to_vec());
        false
    })?;
    Ok(found)
}

pub fn makespan(project: &Project, starts: &[Time]) -> Time {
    starts
        .iter()
        .zip(&project.durations)
        .map(|(s, p)| s + p)
        .max()
        .unwrap_or(0)
}

/// Smallest makespan over all feasible schedules, `None` when there is none.
pub fn optimal_makespan(project: &Project, limits: &EnumLimits) -> Result<Option<Time>, OracleError> {
    let mut best: Option<Time> = None;
    walk(project, &[], limits, &mut |s| {
        let m = makespan(project, s);
        best = Some(best.map_or(m, |b| b.min(m)));
        true
    })?;
    Ok(best)
}

/// Per-activity sets of start times used by at least one feasible schedule.
pub fn projection(schedules: &[Vec<Time>], n: usize) -> Vec<BTreeSet<Time>> {
    let mut sets = vec![BTreeSet::new(); n];
    for s in schedules {
        for (i, &v) in s.iter().enumerate() {
            sets[i].insert(v);
        }
    }
    sets
}

/// `energy(a, b)` split into its three terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NaiveEnergy {
    pub free: i64,
    pub time_table: i64,
    pub rest: i64,
}

impl NaiveEnergy {
    pub fn total(&self) -> i64 {
        self.free + self.time_table + self.rest
    }
}

fn free_part(t: &TaskBounds) -> (Time, Time) {
    // (free duration, latest start of the free part)
    let fixed = (t.est + t.duration - t.lst).max(0).min(t.duration);
    let free = t.duration - fixed;
    (free, t.lst + t.duration - free)
}

/// Direct per-term summation of the window energy, pointwise for the profile.
pub fn naive_energy(tasks: &[TaskBounds], begin: Time, end: Time) -> NaiveEnergy {
    let mut e = NaiveEnergy::default();
    for t in tasks {
        if t.duration == 0 || t.usage == 0 {
            continue;
        }
        for tau in begin..end {
            if t.lst <= tau && tau < t.est + t.duration {
                e.time_table += t.usage;
            }
        }
        let (free, free_lst) = free_part(t);
        if free == 0 || t.est < begin {
            continue;
        }
        if t.lst + t.duration <= end {
            e.free += t.usage * free;
        } else {
            e.rest += t.usage * (end - free_lst).max(0);
        }
    }
    e
}

/// First task-interval window (by increasing begin, then end) whose energy
/// exceeds the capacity, scanning all pairs of free-part activities.
pub fn naive_ttef_overload(tasks: &[TaskBounds], capacity: i64) -> Option<Window> {
    let free: Vec<&TaskBounds> = tasks
        .iter()
        .filter(|t| t.duration > 0 && t.usage > 0 && free_part(t).0 > 0)
        .collect();
    let mut windows: Vec<Window> = Vec::new();
    for a in &free {
        for b in &free {
            let (begin, end) = (a.est, b.lst + b.duration);
            if begin < end {
                windows.push((begin, end));
            }
        }
    }
    windows.sort_unstable();
    windows.dedup();
    windows
        .into_iter()
        .find(|&(b, e)| naive_energy(tasks, b, e).total() > capacity * (e - b))
}

/// Why an explanation was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    /// Start time of the updated task that escapes the claimed overload.
    pub placement: Option<(usize, Time)>,
    pub message: String,
}

impl std::fmt::Display for Counterexample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.placement {
            Some((i, s)) => write!(f, "{} (S_{i} = {s})", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// Bounds implied by `lits` on top of the initial windows; `None` if empty.
fn antecedent_bounds(project: &Project, lits: &[Lit]) -> Option<Vec<(Time, Time)>> {
    let mut b = project.windows.clone();
    for l in lits {
        if l.var >= b.len() {
            continue;
        }
        match l.bound {
            Bound::Lower => b[l.var].0 = b[l.var].0.max(l.value),
            Bound::Upper => b[l.var].1 = b[l.var].1.min(l.value),
        }
    }
    b.iter().all(|w| w.0 <= w.1).then_some(b)
}

fn overlap(s: Time, p: Time, begin: Time, end: Time) -> Time {
    ((s + p).min(end) - s.max(begin)).max(0)
}

/// Least overlap of `[S, S + p)` with the window over `S` in `[lo, hi]`.
fn min_overlap(lo: Time, hi: Time, p: Time, begin: Time, end: Time) -> Time {
    overlap(lo, p, begin, end).min(overlap(hi, p, begin, end))
}

fn forced_energy(res: &Resource, project: &Project, b: &[(Time, Time)], skip: Option<usize>, w: Window) -> i64 {
    (0..project.len())
        .filter(|&i| Some(i) != skip)
        .map(|i| res.usages[i] * min_overlap(b[i].0, b[i].1, project.durations[i], w.0, w.1))
        .sum()
}

/// Re-derives a cumulative explanation from its antecedents alone.
///
/// Failures must force more energy into the attached window than the
/// resource offers. Updates `[v <= S_u]` (or `[S_u <= v]`) must do so for
/// every excluded placement of `u`, in the attached window or in a single
/// period covered by `u`.
pub fn check_explanation(project: &Project, expl: &Explanation) -> Result<(), Counterexample> {
    let fail = |message: String, placement| Err(Counterexample { placement, message });
    let (resource, window, task) = match expl.source {
        Source::TimeTable {
            resource,
            window,
            task,
        } => (resource, window, task),
        Source::TtefOverload { resource, window, .. } => (resource, window, None),
        Source::TtefUpdate {
            resource,
            window,
            task,
            ..
        } => (resource, window, Some(task)),
        Source::Precedence { .. } => return check_precedence(project, expl),
        _ => return fail(format!("no checker for {:?}", expl.source), None),
    };
    let Some(b) = antecedent_bounds(project, &expl.antecedents) else {
        return Ok(());
    };
    let res = &project.resources[resource];
    let capacity_energy = |w: Window| res.capacity * (w.1 - w.0);

    let Some(lit) = expl.consequent else {
        let e = forced_energy(res, project, &b, None, window);
        if e > capacity_energy(window) {
            return Ok(());
        }
        return fail(format!("forced energy {e} fits into window {window:?}"), None);
    };

    let u = lit.var;
    if task.is_some_and(|t| t != u) {
        return fail(format!("consequent on {u} but source names {task:?}"), None);
    }
    let (lo, hi) = b[u];
    let excluded: Vec<Time> = match lit.bound {
        Bound::Lower => (lo..lit.value.min(hi + 1)).collect(),
        Bound::Upper => ((lit.value + 1).max(lo)..=hi).collect(),
    };
    let p = project.durations[u];
    for s in excluded {
        let mut bu = b.clone();
        bu[u] = (s, s);
        let mut windows = vec![window];
        windows.extend((s..s + p).map(|t| (t, t + 1)));
        let forced = windows
            .iter()
            .any(|&w| forced_energy(res, project, &bu, None, w) > capacity_energy(w));
        if !forced {
            return fail(format!("placement escapes window {window:?}"), Some((u, s)));
        }
    }
    Ok(())
}

/// Structural check of an explanation produced by an edge
/// `S_from + delay <= S_to`, possibly guarded.
pub fn check_precedence(project: &Project, expl: &Explanation) -> Result<(), Counterexample> {
    let Source::Precedence {
        from,
        to,
        delay,
        guard,
    } = expl.source
    else {
        return Err(Counterexample {
            placement: None,
            message: "not a precedence explanation".into(),
        });
    };
    let bad = |m: &str| {
        Err(Counterexample {
            placement: None,
            message: format!("{m}: {expl}"),
        })
    };
    let lower = |v: usize| {
        expl.antecedents
            .iter()
            .filter(|l| l.var == v && l.bound == Bound::Lower)
            .map(|l| l.value)
            .chain(project.windows.get(v).map(|w| w.0))
            .max()
    };
    let upper = |v: usize| {
        expl.antecedents
            .iter()
            .filter(|l| l.var == v && l.bound == Bound::Upper)
            .map(|l| l.value)
            .chain(project.windows.get(v).map(|w| w.1))
            .min()
    };
    let guard_held = guard.is_none_or(|g| expl.antecedents.iter().any(|a| a.implies(g)));
    match expl.consequent {
        Some(c) if guard.is_some_and(|g| c == g.negate()) => {
            match (lower(from), upper(to)) {
                (Some(lf), Some(ut)) if lf + delay > ut => Ok(()),
                _ => bad("guard negation not forced"),
            }
        }
        _ if !guard_held => bad("guard missing from antecedents"),
        Some(c) if c.var == to && c.bound == Bound::Lower => match lower(from) {
            Some(lf) if c.value <= lf + delay => Ok(()),
            _ => bad("lower bound not implied"),
        },
        Some(c) if c.var == from && c.bound == Bound::Upper => match upper(to) {
            Some(ut) if c.value >= ut - delay => Ok(()),
            _ => bad("upper bound not implied"),
        },
        None => match (lower(from), upper(to)) {
            (Some(lf), Some(ut)) if lf + delay > ut => Ok(()),
            _ => bad("failure not forced"),
        },
        _ => bad("consequent is not about the edge"),
    }
}

/// Value of every solver variable for a schedule, following the solver's
/// variable layout: starts, then the objective, then one 0/1 order variable
/// per disjunctive pair (1 when the first activity precedes the second).
pub fn full_assignment(project: &Project, starts: &[Time], objective: Time) -> Vec<Time> {
    let mut v = starts.to_vec();
    v.push(objective);
    for (i, j) in project.disjunctions() {
        v.push(Time::from(starts[i] + project.durations[i] <= starts[j]));
    }
    v
}

fn lit_true(l: &Lit, values: &[Time]) -> bool {
    match l.bound {
        Bound::Lower => values[l.var] >= l.value,
        Bound::Upper => values[l.var] <= l.value,
    }
}

/// A feasible schedule with objective value in `[makespan, objective_ub]`
/// that violates the clause, if any.
pub fn clause_counterexample(
    project: &Project,
    clause: &[Lit],
    objective_ub: Time,
    limits: &EnumLimits,
) -> Result<Option<Vec<Time>>, OracleError> {
    let mut found = None;
    walk(project, &[], limits, &mut |s| {
        let m = makespan(project, s);
        for obj in m..=objective_ub {
            let values = full_assignment(project, s, obj);
            if !clause.iter().any(|l| lit_true(l, &values)) {
                found = Some(values);
                return false;
            }
        }
        true
    })?;
    Ok(found)
}

/// Random single- or multi-resource project within the default limits.
pub fn random_project<R: Rng>(rng: &mut R, resources: usize) -> Project {
    let n = rng.gen_range(2..=6);
    let durations: Vec<Time> = (0..n).map(|_| rng.gen_range(0..=4)).collect();
    let resources = (0..resources.max(1))
        .map(|_| {
            let capacity = rng.gen_range(1..=4);
            Resource {
                capacity,
                usages: (0..n).map(|_| rng.gen_range(0..=capacity)).collect(),
            }
        })
        .collect();
    let mut precedences = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(0.2) {
                precedences.push((i, j));
            }
        }
    }
    let longest = durations.iter().copied().max().unwrap_or(0);
    let total: Time = durations.iter().sum();
    let horizon = rng.gen_range(longest.max(1)..=(total + 2).clamp(longest.max(1), 15));
    let windows = durations
        .iter()
        .map(|&p| {
            let last = horizon - p;
            let first = rng.gen_range(0..=last / 2);
            (first, last)
        })
        .collect();
    Project {
        name: String::from("random"),
        durations,
        resources,
        precedences,
        windows,
        horizon,
    }
}

/// Random sub-window bounds of a project, not necessarily consistent.
pub fn random_bounds<R: Rng>(rng: &mut R, project: &Project) -> Vec<(Time, Time)> {
    project
        .windows
        .iter()
        .map(|&(lo, hi)| {
            let a = rng.gen_range(lo..=hi);
            let b = rng.gen_range(lo..=hi);
            (a.min(b), a.max(b))
        })
        .collect()
}
