//! Explained time-table consistency check and bound filtering.

use crate::cumulative::{BoundUpdate, CumulativeView, ViewLit};
use crate::domains::{Explanation, Source};
use crate::profile::ResourceProfile;

impl CumulativeView<'_> {
    /// Fails on the first period where compulsory parts exceed the capacity.
    ///
    /// The explanation names a pointwise set of contributors at the start `t`
    /// of the overloaded segment: `[t - p + 1 <= S] /\ [S <= t]` each.
    pub fn tt_check(&self, profile: &ResourceProfile) -> Result<(), Explanation> {
        let Some(seg) = profile.segments().iter().find(|s| s.height > self.capacity) else {
            return Ok(());
        };
        let t = seg.begin;
        let mut atoms = Vec::new();
        let mut sum = 0;
        for i in self.covering(t, t + 1, None) {
            if sum > self.capacity {
                break;
            }
            sum += self.tasks[i].usage;
            atoms.push(ViewLit::Lower(i, t - self.tasks[i].duration + 1));
            atoms.push(ViewLit::Upper(i, t));
        }
        debug_assert!(sum > self.capacity);
        Err(self.explanation(
            atoms,
            None,
            Source::TimeTable {
                resource: self.resource,
                window: self.to_window((t, t + 1)),
                task: None,
            },
        ))
    }

    /// Time-table pushes of both bounds. Assumes `tt_check` passed.
    pub fn tt_filter(&self, profile: &ResourceProfile) -> Vec<BoundUpdate> {
        let mut out = self.tt_filter_lb(profile);
        let mirror = self.mirrored();
        out.extend(mirror.tt_filter_lb(&mirror.profile()));
        out
    }

    /// Lower-bound pushes, in view coordinates.
    pub(crate) fn tt_filter_lb(&self, profile: &ResourceProfile) -> Vec<BoundUpdate> {
        let mut out = Vec::new();
        for (u, tu) in self.tasks.iter().enumerate() {
            if tu.is_inert() || tu.is_fixed() {
                continue;
            }
            let own = tu.compulsory_part();
            let mut start = tu.est;
            while start <= tu.lst {
                let blocking = profile
                    .overlapping(start, start + tu.duration)
                    .iter()
                    .find(|s| {
                        let mine = match own {
                            Some((b, e)) if b <= s.begin && s.end <= e => tu.usage,
                            _ => 0,
                        };
                        s.height - mine + tu.usage > self.capacity
                    });
                let Some(seg) = blocking else { break };

                let mut atoms = vec![ViewLit::Lower(u, start)];
                let mut sum = 0;
                for j in self.covering(seg.begin, seg.end, Some(u)) {
                    if sum > self.capacity - tu.usage {
                        break;
                    }
                    sum += self.tasks[j].usage;
                    atoms.push(ViewLit::Lower(j, seg.end - self.tasks[j].duration));
                    atoms.push(ViewLit::Upper(j, seg.begin));
                }
                debug_assert!(sum > self.capacity - tu.usage);
                let consequent = ViewLit::Lower(u, seg.end);
                out.push(BoundUpdate {
                    task: u,
                    lit: self.to_lit(consequent),
                    explanation: self.explanation(
                        atoms,
                        Some(consequent),
                        Source::TimeTable {
                            resource: self.resource,
                            window: self.to_window((seg.begin, seg.end)),
                            task: Some(u),
                        },
                    ),
                });
                start = seg.end;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use crate::cumulative::CumulativeView;
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

    #[test]
    fn overload_is_detected_with_pointwise_reason() {
        let initial = vec![(0, 10); 3];
        let tasks = vec![task(1, 1, 2, 2), task(0, 2, 3, 2), task(0, 9, 1, 1)];
        let view = CumulativeView::new(0, 3, tasks, &initial, 12);
        let e = view.tt_check(&view.profile()).unwrap_err();
        assert!(e.is_failure());
        // both compulsory parts cover t = 2
        assert!(e.antecedents.contains(&Lit::geq(1, 0)) || e.antecedents.contains(&Lit::leq(1, 2)));
        assert_eq!(e.antecedents.iter().filter(|l| l.var == 2).count(), 0);
    }

    #[test]
    fn push_past_blocking_segment() {
        let initial = vec![(0, 10); 2];
        // task 0 fixed on [2,5) r=2; task 1 r=2 p=2 in [0,8] with capacity 3
        let tasks = vec![task(2, 2, 3, 2), task(1, 8, 2, 2)];
        let view = CumulativeView::new(0, 3, tasks, &initial, 12);
        let p = view.profile();
        assert!(view.tt_check(&p).is_ok());
        let ups = view.tt_filter(&p);
        assert_eq!(ups.len(), 1);
        assert_eq!(ups[0].lit, Lit::geq(1, 5));
        let ex = &ups[0].explanation;
        assert!(ex.antecedents.contains(&Lit::geq(0, 2)));
        assert!(ex.antecedents.contains(&Lit::leq(0, 2)));
    }

    #[test]
    fn upper_bound_push_by_reflection() {
        let initial = vec![(0, 10); 2];
        let tasks = vec![task(6, 6, 3, 2), task(0, 8, 2, 2)];
        let view = CumulativeView::new(0, 3, tasks, &initial, 12);
        let ups = view.tt_filter(&view.profile());
        // task 1 cannot overlap [6,9) so S_1 <= 4
        assert!(ups.iter().any(|u| u.lit == Lit::leq(1, 4)));
    }
}
