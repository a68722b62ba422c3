//! Compulsory-part resource profile and its suffix-energy table.

use crate::model::{TaskBounds, Time};

/// A maximal interval over which the set of compulsory parts is constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub begin: Time,
    pub end: Time,
    pub height: i64,
}

impl Segment {
    pub fn energy(&self) -> i64 {
        self.height * (self.end - self.begin)
    }
}

/// Height function of the compulsory parts plus `tt_after(t)`, the profile
/// energy at or after `t`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResourceProfile {
    segments: Vec<Segment>,
    /// `after[k]` is the energy of `segments[k..]`.
    after: Vec<i64>,
}

impl ResourceProfile {
    /// Sweeps compulsory-part start and end events; O(n log n).
    pub fn build(tasks: &[TaskBounds]) -> ResourceProfile {
        let mut events: Vec<(Time, i64)> = Vec::new();
        for t in tasks {
            if t.is_inert() {
                continue;
            }
            if let Some((s, e)) = t.compulsory_part() {
                events.push((s, t.usage));
                events.push((e, -t.usage));
            }
        }
        events.sort_unstable();

        let mut segments = Vec::new();
        let mut height = 0;
        let mut k = 0;
        while k < events.len() {
            let at = events[k].0;
            while k < events.len() && events[k].0 == at {
                height += events[k].1;
                k += 1;
            }
            if height > 0 {
                if let Some(&(next, _)) = events.get(k) {
                    segments.push(Segment {
                        begin: at,
                        end: next,
                        height,
                    });
                }
            }
        }

        let mut after = vec![0; segments.len() + 1];
        for k in (0..segments.len()).rev() {
            after[k] = after[k + 1] + segments[k].energy();
        }
        after.pop();
        ResourceProfile { segments, after }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn height(&self, t: Time) -> i64 {
        let k = self.segments.partition_point(|s| s.end <= t);
        match self.segments.get(k) {
            Some(s) if s.begin <= t => s.height,
            _ => 0,
        }
    }

    /// Total profile energy at or after `t`, interpolated inside segments.
    pub fn tt_after(&self, t: Time) -> i64 {
        let k = self.segments.partition_point(|s| s.end <= t);
        match self.segments.get(k) {
            None => 0,
            Some(s) if s.begin >= t => self.after[k],
            Some(s) => self.after[k] - s.height * (t - s.begin),
        }
    }

    /// Profile energy inside `[begin, end)`.
    pub fn tt_energy(&self, begin: Time, end: Time) -> i64 {
        if end <= begin {
            return 0;
        }
        self.tt_after(begin) - self.tt_after(end)
    }

    pub fn total_energy(&self) -> i64 {
        self.after.first().copied().unwrap_or(0)
    }

    /// Segments overlapping `[begin, end)`.
    pub fn overlapping(&self, begin: Time, end: Time) -> &[Segment] {
        let lo = self.segments.partition_point(|s| s.end <= begin);
        let hi = self.segments.partition_point(|s| s.begin < end);
        &self.segments[lo..hi.max(lo)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed(start: Time, duration: Time, usage: i64) -> TaskBounds {
        TaskBounds {
            est: start,
            lst: start,
            duration,
            usage,
        }
    }

    #[test]
    fn single_fixed_task() {
        let p = ResourceProfile::build(&[fixed(0, 2, 3)]);
        assert_eq!(p.segments(), &[Segment { begin: 0, end: 2, height: 3 }]);
        assert_eq!(p.tt_after(0), 6);
        assert_eq!(p.tt_after(1), 3);
        assert_eq!(p.tt_after(2), 0);
    }

    #[test]
    fn no_compulsory_parts() {
        let p = ResourceProfile::build(&[TaskBounds {
            est: 0,
            lst: 5,
            duration: 2,
            usage: 1,
        }]);
        assert!(p.is_empty());
        assert_eq!(p.tt_after(-100), 0);
        assert_eq!(p.tt_energy(0, 10), 0);
    }

    #[test]
    fn two_overlapping_parts() {
        // compulsory [1,3) r=2 and [2,4) r=1
        let a = TaskBounds {
            est: 0,
            lst: 1,
            duration: 3,
            usage: 2,
        };
        let b = TaskBounds {
            est: 1,
            lst: 2,
            duration: 3,
            usage: 1,
        };
        let p = ResourceProfile::build(&[a, b]);
        let heights: Vec<_> = p.segments().iter().map(|s| (s.begin, s.end, s.height)).collect();
        assert_eq!(heights, vec![(1, 2, 2), (2, 3, 3), (3, 4, 1)]);
        assert_eq!(p.tt_after(1), 6);
        assert_eq!(p.tt_energy(1, 4), 6);
        assert_eq!(p.tt_energy(2, 2), 0);
        assert_eq!(p.tt_energy(10, 20), 0);
        assert_eq!(p.overlapping(2, 3).len(), 1);
        assert_eq!(p.overlapping(0, 10).len(), 3);
    }
}
