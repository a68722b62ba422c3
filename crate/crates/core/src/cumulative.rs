//! Snapshot of one cumulative constraint that both propagators work on.
//!
//! Upper-bound reasoning runs the lower-bound code on the time-reflected
//! view (`S' = H - S - p`), so every statement a propagator makes is first
//! phrased in view coordinates and mapped back when the explanation is built.

use crate::domains::{canonical_in, BoundsSource, Canonical, Explanation, Lit, Source, Window};
use crate::model::{Instance, Project, TaskBounds, Time};
use crate::profile::ResourceProfile;

/// A bound statement about a task in view coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ViewLit {
    /// `[v <= S]`
    Lower(usize, Time),
    /// `[S <= v]`
    Upper(usize, Time),
}

#[derive(Debug, Clone)]
pub struct CumulativeView<'a> {
    pub resource: usize,
    pub capacity: i64,
    /// Indexed by activity id, which is also the start variable id.
    pub tasks: Vec<TaskBounds>,
    initial: &'a [(Time, Time)],
    /// Reflection axis when this is the mirrored view.
    mirror: Option<Time>,
    horizon: Time,
}

/// A bound change produced by a propagator, with its explanation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundUpdate {
    pub task: usize,
    pub lit: Lit,
    pub explanation: Explanation,
}

impl<'a> CumulativeView<'a> {
    pub fn new(
        resource: usize,
        capacity: i64,
        tasks: Vec<TaskBounds>,
        initial: &'a [(Time, Time)],
        horizon: Time,
    ) -> Self {
        CumulativeView {
            resource,
            capacity,
            tasks,
            initial,
            mirror: None,
            horizon,
        }
    }

    pub fn of_instance<B: BoundsSource + ?Sized>(inst: &'a Instance, bounds: &B) -> Self {
        CumulativeView::new(0, inst.capacity, inst.tasks(bounds), &inst.windows, inst.horizon)
    }

    pub fn of_project<B: BoundsSource + ?Sized>(
        project: &'a Project,
        resource: usize,
        bounds: &B,
    ) -> Self {
        let res = &project.resources[resource];
        let tasks = project
            .durations
            .iter()
            .zip(&res.usages)
            .enumerate()
            .map(|(i, (&duration, &usage))| TaskBounds {
                est: bounds.lb(i),
                lst: bounds.ub(i),
                duration,
                usage,
            })
            .collect();
        CumulativeView::new(resource, res.capacity, tasks, &project.windows, project.horizon)
    }

    pub fn profile(&self) -> ResourceProfile {
        ResourceProfile::build(&self.tasks)
    }

    pub fn is_trivial(&self) -> bool {
        self.tasks.iter().all(|t| t.is_inert())
    }

    pub(crate) fn mirrored(&self) -> CumulativeView<'a> {
        CumulativeView {
            resource: self.resource,
            capacity: self.capacity,
            tasks: self.tasks.iter().map(|t| t.mirrored(self.horizon)).collect(),
            initial: self.initial,
            mirror: match self.mirror {
                Some(_) => None,
                None => Some(self.horizon),
            },
            horizon: self.horizon,
        }
    }

    pub(crate) fn to_lit(&self, vl: ViewLit) -> Lit {
        match (vl, self.mirror) {
            (ViewLit::Lower(i, v), None) => Lit::geq(i, v),
            (ViewLit::Upper(i, v), None) => Lit::leq(i, v),
            (ViewLit::Lower(i, v), Some(h)) => Lit::leq(i, h - self.tasks[i].duration - v),
            (ViewLit::Upper(i, v), Some(h)) => Lit::geq(i, h - self.tasks[i].duration - v),
        }
    }

    pub(crate) fn to_window(&self, (begin, end): Window) -> Window {
        match self.mirror {
            None => (begin, end),
            Some(h) => (h - end, h - begin),
        }
    }

    /// Maps view statements to literals, dropping those true at the root.
    pub(crate) fn explanation(
        &self,
        atoms: impl IntoIterator<Item = ViewLit>,
        consequent: Option<ViewLit>,
        source: Source,
    ) -> Explanation {
        let mut antecedents = Vec::new();
        for vl in atoms {
            let lit = self.to_lit(vl);
            match canonical_in(lit, self.initial[lit.var]) {
                Canonical::True => {}
                Canonical::False => {
                    debug_assert!(false, "antecedent {lit} is false in the initial domain");
                    antecedents.push(lit);
                }
                Canonical::Lit(l) => antecedents.push(l),
            }
        }
        Explanation::new(antecedents, consequent.map(|c| self.to_lit(c)), source)
    }

    /// Non-inert tasks other than `skip` whose compulsory part covers `[begin, end)`,
    /// largest usage first, ties by id.
    pub(crate) fn covering(&self, begin: Time, end: Time, skip: Option<usize>) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.tasks.len())
            .filter(|&i| Some(i) != skip)
            .filter(|&i| {
                let t = &self.tasks[i];
                !t.is_inert() && t.lst <= begin && t.ect() >= end
            })
            .collect();
        ids.sort_by_key(|&i| (std::cmp::Reverse(self.tasks[i].usage), i));
        ids
    }
}

pub(crate) fn ceil_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    a.div_euclid(b) + i64::from(a.rem_euclid(b) != 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_div_rounds_up_for_negatives_too() {
        assert_eq!(ceil_div(4, 2), 2);
        assert_eq!(ceil_div(5, 2), 3);
        assert_eq!(ceil_div(-3, 2), -1);
        assert_eq!(ceil_div(0, 3), 0);
    }

    #[test]
    fn mirror_maps_literals_back() {
        let initial = vec![(0, 10)];
        let tasks = vec![TaskBounds {
            est: 2,
            lst: 6,
            duration: 3,
            usage: 1,
        }];
        let view = CumulativeView::new(0, 1, tasks, &initial, 13);
        let m = view.mirrored();
        // S' = 13 - S - 3: est' = 13 - 9 = 4, lst' = 13 - 5 = 8
        assert_eq!((m.tasks[0].est, m.tasks[0].lst), (4, 8));
        assert_eq!(m.to_lit(ViewLit::Lower(0, 5)), Lit::leq(0, 5));
        assert_eq!(m.to_lit(ViewLit::Upper(0, 7)), Lit::geq(0, 3));
        assert_eq!(m.to_window((4, 9)), (4, 9));
        assert_eq!(m.mirrored().tasks, view.tasks);
    }
}
