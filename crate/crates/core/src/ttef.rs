//! Explained time-table edge-finding: energy overload check and start-time
//! filtering on task-interval windows.

use crate::cumulative::{ceil_div, BoundUpdate, CumulativeView, ViewLit};
use crate::domains::{Explanation, Source};
use crate::model::Time;
use crate::profile::ResourceProfile;

/// How a slack of `total` energy units was spread over the participants of a
/// window explanation. `allocations` holds `(task, units of time)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EnergyBudget {
    pub total: i64,
    pub allocations: Vec<(usize, Time)>,
}

/// A participant of a window explanation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Participant {
    pub task: usize,
    /// Time units it is known to spend inside the window.
    pub length: Time,
    pub usage: i64,
    pub free: bool,
}

/// Spreads `budget` over the participants: free-part activities first, then
/// larger usage, then smaller id. Each one absorbs at most its length.
pub fn allocate_widening(budget: i64, participants: &[Participant]) -> EnergyBudget {
    let mut order: Vec<&Participant> = participants.iter().filter(|p| p.usage > 0).collect();
    order.sort_by_key(|p| (!p.free, std::cmp::Reverse(p.usage), p.task));
    let mut rest = budget.max(0);
    let mut allocations = Vec::new();
    for p in order {
        let d = (rest / p.usage).min(p.length);
        rest -= d * p.usage;
        allocations.push((p.task, d));
    }
    EnergyBudget {
        total: budget,
        allocations,
    }
}

enum Scan {
    Overload(Time, Time),
    Updates(Vec<(usize, Time, Time, Time)>),
}

impl CumulativeView<'_> {
    /// Participants of the window `[begin, end)`, skipping `skip`.
    fn participants(&self, begin: Time, end: Time, skip: Option<usize>) -> Vec<Participant> {
        self.tasks
            .iter()
            .enumerate()
            .filter(|&(i, t)| Some(i) != skip && !t.is_inert())
            .map(|(i, t)| Participant {
                task: i,
                length: t.window_length(begin, end),
                usage: t.usage,
                free: t.has_free_part(),
            })
            .filter(|p| p.length > 0)
            .collect()
    }

    /// `[begin + q - p - d <= S] /\ [S <= end - q + d]` for each participant
    /// that still needs a share of the window after widening.
    fn widened_atoms(&self, begin: Time, end: Time, parts: &[Participant], budget: &EnergyBudget) -> Vec<ViewLit> {
        let mut atoms = Vec::new();
        for &(i, d) in &budget.allocations {
            let q = parts.iter().find(|p| p.task == i).map_or(0, |p| p.length);
            if q - d <= 0 {
                continue;
            }
            let p = self.tasks[i].duration;
            atoms.push(ViewLit::Lower(i, begin + q - p - d));
            atoms.push(ViewLit::Upper(i, end - q + d));
        }
        atoms
    }

    /// Energy overload over `[begin, end)`, explained with the slack spread
    /// over the participants.
    pub fn explain_overload(&self, begin: Time, end: Time) -> Explanation {
        let parts = self.participants(begin, end, None);
        let required: i64 = parts.iter().map(|p| p.usage * p.length).sum();
        let budget = allocate_widening(required - self.capacity * (end - begin) - 1, &parts);
        debug_assert!(budget.total >= 0, "no overload in [{begin}, {end})");
        let atoms = self.widened_atoms(begin, end, &parts, &budget);
        self.explanation(
            atoms,
            None,
            Source::TtefOverload {
                resource: self.resource,
                window: self.to_window((begin, end)),
                budget: budget.total,
            },
        )
    }

    /// Explains `[new_lb <= S_u]` from the energy of the other activities in
    /// `[begin, end)`.
    pub fn explain_update(&self, begin: Time, end: Time, u: usize, new_lb: Time) -> Explanation {
        let tu = self.tasks[u];
        let parts = self.participants(begin, end, Some(u));
        let others: i64 = parts.iter().map(|p| p.usage * p.length).sum();
        let rest = others - (self.capacity - tu.usage) * (end - begin);
        let slack = rest - tu.usage * (new_lb - begin - 1) - 1;
        debug_assert!((0..tu.usage).contains(&slack), "slack {slack} for task {u}");
        let budget = allocate_widening(slack, &parts);
        let mut atoms = vec![ViewLit::Lower(u, begin + end - new_lb + 1 - tu.duration)];
        atoms.extend(self.widened_atoms(begin, end, &parts, &budget));
        self.explanation(
            atoms,
            Some(ViewLit::Lower(u, new_lb)),
            Source::TtefUpdate {
                resource: self.resource,
                window: self.to_window((begin, end)),
                task: u,
                budget: budget.total,
            },
        )
    }

    /// Sweeps task-interval windows: ends at distinct latest completion times
    /// in decreasing order, begins at earliest start times in decreasing order.
    fn scan(&self, profile: &ResourceProfile, filter: bool) -> Scan {
        let free: Vec<usize> = (0..self.tasks.len())
            .filter(|&i| !self.tasks[i].is_inert() && self.tasks[i].has_free_part())
            .collect();
        let mut by_est = free.clone();
        by_est.sort_by_key(|&i| (self.tasks[i].est, i));
        let mut by_lct = free;
        by_lct.sort_by_key(|&i| (self.tasks[i].lct(), i));

        let splits: Vec<_> = self.tasks.iter().map(|t| t.split()).collect();
        let tt_at_est: Vec<i64> = self.tasks.iter().map(|t| profile.tt_after(t.est)).collect();
        let mut est_now: Vec<Time> = self.tasks.iter().map(|t| t.est).collect();
        let mut updates = Vec::new();
        let mut last_end = None;
        for &b in by_lct.iter().rev() {
            let end = self.tasks[b].lct();
            if last_end == Some(end) {
                continue;
            }
            last_end = Some(end);
            let tt_at_end = profile.tt_after(end);

            let mut energy = 0;
            let mut candidate: Option<(usize, i64)> = None;
            for x in (0..by_est.len()).rev() {
                let a = by_est[x];
                let ta = &self.tasks[a];
                if end <= ta.est {
                    continue;
                }
                let begin = ta.est;
                let split = &splits[a];
                if ta.lct() <= end {
                    energy += split.free_energy;
                } else {
                    let inside = ta.usage * (end - split.free_lst).max(0);
                    energy += inside;
                    let req = split.free_energy.min(ta.usage * (end - ta.est)) - inside;
                    if candidate.is_none_or(|(_, best)| req > best) {
                        candidate = Some((a, req));
                    }
                }
                if x > 0 && self.tasks[by_est[x - 1]].est == begin {
                    continue;
                }

                let avail = self.capacity * (end - begin) - energy - (tt_at_est[a] - tt_at_end);
                if avail < 0 {
                    return Scan::Overload(begin, end);
                }
                if !filter {
                    continue;
                }
                if let Some((u, req)) = candidate {
                    if req > 0 && avail < req {
                        let tu = &self.tasks[u];
                        let rest = tu.usage * (end - begin) - avail - tu.usage * (end - tu.lst).max(0);
                        let new_lb = begin + ceil_div(rest, tu.usage);
                        if new_lb > est_now[u] {
                            est_now[u] = new_lb;
                            updates.push((u, begin, end, new_lb));
                        }
                    }
                }
            }
        }
        Scan::Updates(updates)
    }

    pub fn ttef_check(&self, profile: &ResourceProfile) -> Result<(), Explanation> {
        match self.scan(profile, false) {
            Scan::Overload(b, e) => Err(self.explain_overload(b, e)),
            Scan::Updates(_) => Ok(()),
        }
    }

    /// Lower-bound updates in view coordinates, strongest per task last.
    pub fn ttef_filter_lb(&self, profile: &ResourceProfile) -> Result<Vec<BoundUpdate>, Explanation> {
        match self.scan(profile, true) {
            Scan::Overload(b, e) => Err(self.explain_overload(b, e)),
            Scan::Updates(ups) => Ok(ups
                .into_iter()
                .map(|(u, begin, end, new_lb)| BoundUpdate {
                    task: u,
                    lit: self.to_lit(ViewLit::Lower(u, new_lb)),
                    explanation: self.explain_update(begin, end, u, new_lb),
                })
                .collect()),
        }
    }

    /// Upper-bound updates, computed on the reflected view.
    pub fn ttef_filter_ub(&self) -> Result<Vec<BoundUpdate>, Explanation> {
        let mirror = self.mirrored();
        let profile = mirror.profile();
        mirror.ttef_filter_lb(&profile)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Lit;
    use crate::model::TaskBounds;

    fn task(est: i64, lst: i64, duration: i64, usage: i64) -> TaskBounds {
        TaskBounds {
            est,
            lst,
            duration,
            usage,
        }
    }

    fn part(task: usize, length: Time, usage: i64, free: bool) -> Participant {
        Participant {
            task,
            length,
            usage,
            free,
        }
    }

    #[test]
    fn allocation_prefers_free_then_usage_then_id() {
        let parts = [part(0, 3, 1, false), part(1, 2, 2, true), part(2, 2, 3, true)];
        let b = allocate_widening(9, &parts);
        assert_eq!(b.allocations, vec![(2, 2), (1, 1), (0, 1)]);
        let b = allocate_widening(0, &parts);
        assert!(b.allocations.iter().all(|&(_, d)| d == 0));
    }

    #[test]
    fn overload_in_window() {
        // three unit-capacity activities of length 2 confined to [0,5)
        let initial = vec![(0, 3); 3];
        let tasks = vec![task(0, 3, 2, 1); 3];
        let view = CumulativeView::new(0, 1, tasks, &initial, 5);
        let p = view.profile();
        assert!(view.tt_check(&p).is_ok());
        let e = view.ttef_check(&p).unwrap_err();
        assert!(e.is_failure());
        assert_eq!(
            e.source,
            Source::TtefOverload {
                resource: 0,
                window: (0, 5),
                budget: 0
            }
        );
        // all bounds are root bounds, so the nogood is empty
        assert!(e.antecedents.is_empty());
    }

    #[test]
    fn lower_bound_update() {
        // a and b fill [0,4) on capacity 2 at full usage; c must start after
        let initial = vec![(0, 2), (0, 2), (0, 8)];
        let tasks = vec![task(0, 2, 2, 2), task(0, 2, 2, 2), task(0, 8, 2, 1)];
        let view = CumulativeView::new(0, 2, tasks, &initial, 10);
        let p = view.profile();
        assert!(view.ttef_check(&p).is_ok());
        let ups = view.ttef_filter_lb(&p).unwrap();
        let best = ups.iter().filter(|u| u.task == 2).map(|u| u.lit.value).max();
        assert_eq!(best, Some(4));
        let u = ups.iter().find(|u| u.lit == Lit::geq(2, 4)).unwrap();
        assert!(matches!(u.explanation.source, Source::TtefUpdate { task: 2, .. }));
    }

    #[test]
    fn reflection_gives_upper_bounds() {
        let initial = vec![(6, 8), (6, 8), (0, 8)];
        let tasks = vec![task(6, 8, 2, 2), task(6, 8, 2, 2), task(0, 8, 2, 1)];
        let view = CumulativeView::new(0, 2, tasks, &initial, 10);
        let ups = view.ttef_filter_ub().unwrap();
        assert!(ups.iter().any(|u| u.lit == Lit::leq(2, 4)));
    }
}
