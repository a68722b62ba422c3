//! Instance data and the per-activity quantities derived from current bounds.

use std::fmt;

use thiserror::Error;

use crate::domains::BoundsSource;

/// Integer time. Negative values are legal: windows may be shifted freely.
pub type Time = i64;

/// An activity as seen by one cumulative resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Activity {
    pub id: usize,
    pub duration: Time,
    pub usage: i64,
}

impl Activity {
    pub fn energy(&self) -> i64 {
        self.duration * self.usage
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("activity {0}: negative duration or usage")]
    Negative(usize),
    #[error("activity {activity}: empty initial window [{est}, {lst}]")]
    EmptyWindow { activity: usize, est: Time, lst: Time },
    #[error("activity {activity}: latest completion {lct} exceeds horizon {horizon}")]
    BeyondHorizon {
        activity: usize,
        lct: Time,
        horizon: Time,
    },
    #[error("precedence ({0}, {1}) refers to an unknown activity")]
    UnknownActivity(usize, usize),
    #[error("precedence graph contains a cycle through activity {0}")]
    Cycle(usize),
    #[error("expected {expected} entries, found {found}")]
    Length { expected: usize, found: usize },
    #[error("resource capacity must be non-negative")]
    NegativeCapacity,
}

/// A single-resource cumulative scheduling instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub activities: Vec<Activity>,
    pub capacity: i64,
    /// `(i, j)` means `S_i + p_i <= S_j`.
    pub precedences: Vec<(usize, usize)>,
    /// Initial `(est, lst)` per activity.
    pub windows: Vec<(Time, Time)>,
    pub horizon: Time,
}

impl Instance {
    /// Builds an instance from parallel duration/usage vectors; ids are assigned densely.
    pub fn new(
        durations: &[Time],
        usages: &[i64],
        capacity: i64,
        precedences: Vec<(usize, usize)>,
        windows: Vec<(Time, Time)>,
        horizon: Time,
    ) -> Result<Self, ModelError> {
        if usages.len() != durations.len() {
            return Err(ModelError::Length {
                expected: durations.len(),
                found: usages.len(),
            });
        }
        let activities = durations
            .iter()
            .zip(usages)
            .enumerate()
            .map(|(id, (&duration, &usage))| Activity {
                id,
                duration,
                usage,
            })
            .collect();
        let instance = Instance {
            activities,
            capacity,
            precedences,
            windows,
            horizon,
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn len(&self) -> usize {
        self.activities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activities.is_empty()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.capacity < 0 {
            return Err(ModelError::NegativeCapacity);
        }
        let durations: Vec<Time> = self.activities.iter().map(|a| a.duration).collect();
        for a in &self.activities {
            if a.duration < 0 || a.usage < 0 {
                return Err(ModelError::Negative(a.id));
            }
        }
        validate_structure(&durations, &self.precedences, &self.windows, self.horizon)
    }

    /// Start bounds of every activity as a task snapshot under `bounds`.
    pub fn tasks<B: BoundsSource + ?Sized>(&self, bounds: &B) -> Vec<TaskBounds> {
        self.activities
            .iter()
            .map(|a| TaskBounds {
                est: bounds.lb(a.id),
                lst: bounds.ub(a.id),
                duration: a.duration,
                usage: a.usage,
            })
            .collect()
    }
}

/// One renewable resource of a project.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resource {
    pub capacity: i64,
    pub usages: Vec<i64>,
}

/// A multi-resource project: shared start variables, one cumulative
/// constraint per resource, and precedences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Project {
    pub name: String,
    pub durations: Vec<Time>,
    pub resources: Vec<Resource>,
    pub precedences: Vec<(usize, usize)>,
    pub windows: Vec<(Time, Time)>,
    pub horizon: Time,
}

impl Project {
    pub fn new(
        name: impl Into<String>,
        durations: Vec<Time>,
        resources: Vec<Resource>,
        precedences: Vec<(usize, usize)>,
        windows: Vec<(Time, Time)>,
        horizon: Time,
    ) -> Result<Self, ModelError> {
        let project = Project {
            name: name.into(),
            durations,
            resources,
            precedences,
            windows,
            horizon,
        };
        project.validate()?;
        Ok(project)
    }

    pub fn len(&self) -> usize {
        self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations.is_empty()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (i, &p) in self.durations.iter().enumerate() {
            if p < 0 {
                return Err(ModelError::Negative(i));
            }
        }
        for res in &self.resources {
            if res.capacity < 0 {
                return Err(ModelError::NegativeCapacity);
            }
            if res.usages.len() != self.durations.len() {
                return Err(ModelError::Length {
                    expected: self.durations.len(),
                    found: res.usages.len(),
                });
            }
            if let Some(i) = res.usages.iter().position(|&r| r < 0) {
                return Err(ModelError::Negative(i));
            }
        }
        validate_structure(&self.durations, &self.precedences, &self.windows, self.horizon)
    }

    /// The single-resource view of resource `k`.
    pub fn resource_instance(&self, k: usize) -> Instance {
        let res = &self.resources[k];
        Instance {
            activities: self
                .durations
                .iter()
                .zip(&res.usages)
                .enumerate()
                .map(|(id, (&duration, &usage))| Activity {
                    id,
                    duration,
                    usage,
                })
                .collect(),
            capacity: res.capacity,
            precedences: self.precedences.clone(),
            windows: self.windows.clone(),
            horizon: self.horizon,
        }
    }

    /// Pairs that can never overlap on some resource.
    pub fn disjunctions(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut pairs = Vec::new();
        for i in 0..n {
            if self.durations[i] == 0 {
                continue;
            }
            for j in (i + 1)..n {
                if self.durations[j] == 0 {
                    continue;
                }
                if self
                    .resources
                    .iter()
                    .any(|res| res.usages[i] + res.usages[j] > res.capacity)
                {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }

    /// An activity that alone exceeds a capacity makes the project infeasible.
    pub fn overloaded_activity(&self) -> Option<(usize, usize)> {
        for (k, res) in self.resources.iter().enumerate() {
            for (i, &r) in res.usages.iter().enumerate() {
                if self.durations[i] > 0 && r > res.capacity {
                    return Some((i, k));
                }
            }
        }
        None
    }

    /// Same project with every initial window moved by `shift`.
    pub fn shifted(&self, shift: Time) -> Project {
        let mut p = self.clone();
        for w in &mut p.windows {
            w.0 += shift;
            w.1 += shift;
        }
        p.horizon += shift;
        p
    }
}

impl From<Instance> for Project {
    fn from(inst: Instance) -> Self {
        Project {
            name: String::from("instance"),
            durations: inst.activities.iter().map(|a| a.duration).collect(),
            resources: vec![Resource {
                capacity: inst.capacity,
                usages: inst.activities.iter().map(|a| a.usage).collect(),
            }],
            precedences: inst.precedences,
            windows: inst.windows,
            horizon: inst.horizon,
        }
    }
}

fn validate_structure(
    durations: &[Time],
    precedences: &[(usize, usize)],
    windows: &[(Time, Time)],
    horizon: Time,
) -> Result<(), ModelError> {
    let n = durations.len();
    if windows.len() != n {
        return Err(ModelError::Length {
            expected: n,
            found: windows.len(),
        });
    }
    for (i, (&(est, lst), &p)) in windows.iter().zip(durations).enumerate() {
        if est > lst {
            return Err(ModelError::EmptyWindow {
                activity: i,
                est,
                lst,
            });
        }
        if lst + p > horizon {
            return Err(ModelError::BeyondHorizon {
                activity: i,
                lct: lst + p,
                horizon,
            });
        }
    }
    let mut succ = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for &(i, j) in precedences {
        if i >= n || j >= n {
            return Err(ModelError::UnknownActivity(i, j));
        }
        succ[i].push(j);
        indeg[j] += 1;
    }
    let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = stack.pop() {
        seen += 1;
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                stack.push(j);
            }
        }
    }
    if seen < n {
        let culprit = (0..n).find(|&i| indeg[i] > 0).unwrap_or(0);
        return Err(ModelError::Cycle(culprit));
    }
    Ok(())
}

/// Current start window of one activity together with its constant data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskBounds {
    pub est: Time,
    pub lst: Time,
    pub duration: Time,
    pub usage: i64,
}

/// Compulsory ("fixed") and remaining ("free") parts of an activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeFixedSplit {
    pub fixed_duration: Time,
    pub fixed_energy: i64,
    pub free_duration: Time,
    pub free_energy: i64,
    pub free_lst: Time,
}

impl TaskBounds {
    pub fn ect(&self) -> Time {
        self.est + self.duration
    }

    pub fn lct(&self) -> Time {
        self.lst + self.duration
    }

    pub fn energy(&self) -> i64 {
        self.duration * self.usage
    }

    pub fn is_fixed(&self) -> bool {
        self.est == self.lst
    }

    /// Contributes nothing to any resource and is ignored by propagation.
    pub fn is_inert(&self) -> bool {
        self.duration == 0 || self.usage == 0
    }

    pub fn compulsory_part(&self) -> Option<(Time, Time)> {
        (self.lst < self.ect()).then(|| (self.lst, self.ect()))
    }

    pub fn split(&self) -> FreeFixedSplit {
        let fixed_duration = (self.ect() - self.lst).max(0);
        let free_duration = self.duration - fixed_duration;
        let fixed_energy = self.usage * fixed_duration;
        FreeFixedSplit {
            fixed_duration,
            fixed_energy,
            free_duration,
            free_energy: self.energy() - fixed_energy,
            free_lst: self.lct() - free_duration,
        }
    }

    /// Member of the free set: a non-empty free part.
    pub fn has_free_part(&self) -> bool {
        self.split().free_duration > 0
    }

    /// Time units the activity is guaranteed to spend inside `[begin, end)`
    /// when the window is bounded by task-interval endpoints.
    ///
    /// Activities fully contained in the window count with their whole
    /// duration, activities starting inside but possibly ending after it
    /// count with what their latest placement still puts inside, and all
    /// others only with the overlap of their compulsory part.
    pub fn window_length(&self, begin: Time, end: Time) -> Time {
        let free = self.has_free_part();
        if free && begin <= self.est && self.lct() <= end {
            self.duration
        } else if free && begin <= self.est {
            (end - self.lst).max(0)
        } else {
            (end.min(self.ect()) - begin.max(self.lst)).max(0)
        }
    }

    pub fn window_energy(&self, begin: Time, end: Time) -> i64 {
        self.usage * self.window_length(begin, end)
    }

    /// Overlap of `[start, start + p)` with `[begin, end)`.
    pub fn overlap_at(&self, start: Time, begin: Time, end: Time) -> Time {
        ((start + self.duration).min(end) - start.max(begin)).max(0)
    }

    /// Reflection about `horizon`: `S' = horizon - S - p`.
    pub fn mirrored(&self, horizon: Time) -> TaskBounds {
        TaskBounds {
            est: horizon - self.lct(),
            lst: horizon - self.ect(),
            duration: self.duration,
            usage: self.usage,
        }
    }
}

/// `(est, lst, ect, lct)` of activity `i` under the bounds `d`.
pub fn derived_bounds<B: BoundsSource + ?Sized>(
    inst: &Instance,
    i: usize,
    d: &B,
) -> (Time, Time, Time, Time) {
    let p = inst.activities[i].duration;
    let (est, lst) = (d.lb(i), d.ub(i));
    (est, lst, est + p, lst + p)
}

pub fn free_fixed_split<B: BoundsSource + ?Sized>(
    inst: &Instance,
    i: usize,
    d: &B,
) -> FreeFixedSplit {
    task_of(inst, i, d).split()
}

/// Considered length `p_i(a, b)` of activity `i` in the window `[begin, end)`.
pub fn window_length<B: BoundsSource + ?Sized>(
    inst: &Instance,
    i: usize,
    begin: Time,
    end: Time,
    d: &B,
) -> Time {
    task_of(inst, i, d).window_length(begin, end)
}

fn task_of<B: BoundsSource + ?Sized>(inst: &Instance, i: usize, d: &B) -> TaskBounds {
    let a = inst.activities[i];
    TaskBounds {
        est: d.lb(i),
        lst: d.ub(i),
        duration: a.duration,
        usage: a.usage,
    }
}

impl fmt::Display for Project {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} activities, {} resources, horizon {})",
            self.name,
            self.len(),
            self.resources.len(),
            self.horizon
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(est: Time, lst: Time, duration: Time, usage: i64) -> TaskBounds {
        TaskBounds {
            est,
            lst,
            duration,
            usage,
        }
    }

    #[test]
    fn split_with_compulsory_part() {
        let s = task(0, 2, 3, 2).split();
        assert_eq!(
            s,
            FreeFixedSplit {
                fixed_duration: 1,
                fixed_energy: 2,
                free_duration: 2,
                free_energy: 4,
                free_lst: 3,
            }
        );
        assert_eq!(task(0, 2, 3, 2).compulsory_part(), Some((2, 3)));
    }

    #[test]
    fn split_without_compulsory_part() {
        let s = task(0, 2, 2, 1).split();
        assert_eq!(s.fixed_duration, 0);
        assert_eq!(s.free_duration, 2);
        assert_eq!(s.free_lst, 2);
    }

    #[test]
    fn fixed_activity_has_no_free_part() {
        let t = task(5, 5, 4, 1);
        let s = t.split();
        assert_eq!((s.fixed_duration, s.free_duration, s.free_energy), (4, 0, 0));
        assert!(!t.has_free_part());
    }

    #[test]
    fn window_length_cases() {
        assert_eq!(task(1, 3, 2, 1).window_length(0, 10), 2);
        assert_eq!(task(0, 8, 2, 1).window_length(0, 3), 0);
        // est 1 < begin 2, compulsory part [1, 4)
        assert_eq!(task(1, 1, 3, 1).window_length(2, 3), 1);
        let t = task(0, 1, 3, 1);
        assert_eq!(t.window_length(2, 3), 1);
    }

    #[test]
    fn fixed_activity_inside_window_counts_its_duration_only() {
        // Counting it as "partially inside" would give end - lst = 7 > p.
        let t = task(2, 2, 3, 1);
        assert_eq!(t.window_length(0, 9), 3);
    }

    #[test]
    fn zero_duration_is_inert() {
        let t = task(4, 4, 0, 3);
        assert!(t.is_inert());
        assert_eq!(t.split().fixed_duration, 0);
        assert_eq!(t.compulsory_part(), None);
    }

    #[test]
    fn derived_bounds_example_one_d() {
        let inst = Instance::new(&[4], &[2], 4, vec![], vec![(3, 6)], 10).unwrap();
        let bounds = vec![(3, 6)];
        assert_eq!(derived_bounds(&inst, 0, bounds.as_slice()), (3, 6, 7, 10));
    }

    #[test]
    fn rejects_cycles() {
        let err = Instance::new(
            &[1, 1],
            &[1, 1],
            1,
            vec![(0, 1), (1, 0)],
            vec![(0, 5), (0, 5)],
            6,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::Cycle(_)));
    }

    #[test]
    fn disjunction_pairs() {
        let inst = Instance::new(
            &[2, 2, 0, 3],
            &[2, 2, 4, 1],
            3,
            vec![],
            vec![(0, 5); 4],
            8,
        )
        .unwrap();
        assert_eq!(Project::from(inst).disjunctions(), vec![(0, 1)]);
    }
}
