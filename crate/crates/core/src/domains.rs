//! Trailed bounds store and the bounds-literal vocabulary used by
//! explanations and conflict analysis.
//!
//! Literals are never allocated as Boolean variables. A literal
//! `[v <= x]` is true exactly when `lb(x) >= v`, and the trail entry that
//! made it true is found by binary search over the bound history of `x`.

use std::fmt;

use thiserror::Error;

use crate::model::Time;

pub type VarId = usize;

/// Read access to current bounds, implemented by the store and by plain
/// bound vectors in tests and oracles.
pub trait BoundsSource {
    fn lb(&self, var: VarId) -> Time;
    fn ub(&self, var: VarId) -> Time;
}

impl BoundsSource for [(Time, Time)] {
    fn lb(&self, var: VarId) -> Time {
        self[var].0
    }
    fn ub(&self, var: VarId) -> Time {
        self[var].1
    }
}

impl BoundsSource for Vec<(Time, Time)> {
    fn lb(&self, var: VarId) -> Time {
        self[var].0
    }
    fn ub(&self, var: VarId) -> Time {
        self[var].1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    /// `[value <= var]`
    Lower,
    /// `[var <= value]`
    Upper,
}

/// A bounds literal. Boolean variables are integer variables over `{0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    pub var: VarId,
    pub bound: Bound,
    pub value: Time,
}

impl Lit {
    pub fn geq(var: VarId, value: Time) -> Lit {
        Lit {
            var,
            bound: Bound::Lower,
            value,
        }
    }

    pub fn leq(var: VarId, value: Time) -> Lit {
        Lit {
            var,
            bound: Bound::Upper,
            value,
        }
    }

    pub fn bool_true(var: VarId) -> Lit {
        Lit::geq(var, 1)
    }

    pub fn bool_false(var: VarId) -> Lit {
        Lit::leq(var, 0)
    }

    /// `not [x <= v]` is `[v + 1 <= x]`.
    pub fn negate(self) -> Lit {
        match self.bound {
            Bound::Lower => Lit::leq(self.var, self.value - 1),
            Bound::Upper => Lit::geq(self.var, self.value + 1),
        }
    }

    pub fn holds_in(self, lb: Time, ub: Time) -> bool {
        match self.bound {
            Bound::Lower => lb >= self.value,
            Bound::Upper => ub <= self.value,
        }
    }

    pub fn fails_in(self, lb: Time, ub: Time) -> bool {
        self.negate().holds_in(lb, ub)
    }

    /// True if `self` being true implies `other`.
    pub fn implies(self, other: Lit) -> bool {
        self.var == other.var
            && self.bound == other.bound
            && match self.bound {
                Bound::Lower => self.value >= other.value,
                Bound::Upper => self.value <= other.value,
            }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bound {
            Bound::Lower => write!(f, "[{} <= x{}]", self.value, self.var),
            Bound::Upper => write!(f, "[x{} <= {}]", self.var, self.value),
        }
    }
}

/// A literal normalized against the initial domain of its variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Canonical {
    True,
    False,
    Lit(Lit),
}

pub type Window = (Time, Time);

/// Which constraint produced an explanation, with what the independent
/// checker needs to re-verify it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    /// `S_from + delay <= S_to`, optionally guarded by a literal.
    Precedence {
        from: VarId,
        to: VarId,
        delay: Time,
        guard: Option<Lit>,
    },
    /// Profile overload (window of one period) or profile push over a segment.
    TimeTable {
        resource: usize,
        window: Window,
        task: Option<usize>,
    },
    TtefOverload {
        resource: usize,
        window: Window,
        budget: i64,
    },
    TtefUpdate {
        resource: usize,
        window: Window,
        task: usize,
        budget: i64,
    },
    /// Unit propagation of a stored nogood.
    Clause,
    /// Root-level bound on the objective after an incumbent.
    Objective,
    /// Root-level restriction posted by the caller.
    Root,
}

/// `antecedents -> consequent`, or `antecedents -> FAIL` when `consequent` is `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Explanation {
    pub antecedents: Vec<Lit>,
    pub consequent: Option<Lit>,
    pub source: Source,
}

impl Explanation {
    pub fn new(antecedents: Vec<Lit>, consequent: Option<Lit>, source: Source) -> Self {
        Explanation {
            antecedents,
            consequent,
            source,
        }
    }

    pub fn root(consequent: Lit, source: Source) -> Self {
        Explanation::new(Vec::new(), Some(consequent), source)
    }

    pub fn is_failure(&self) -> bool {
        self.consequent.is_none()
    }
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, a) in self.antecedents.iter().enumerate() {
            if k > 0 {
                write!(f, " /\\ ")?;
            }
            write!(f, "{a}")?;
        }
        match self.consequent {
            Some(c) => write!(f, " -> {c}"),
            None => write!(f, " -> FAIL"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reason {
    Decision,
    Explained(usize),
}

#[derive(Debug, Clone, Copy)]
struct TrailEntry {
    lit: Lit,
    previous: Time,
    level: usize,
    reason: Reason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetOutcome {
    Changed,
    Unchanged,
    /// The update would empty the domain; carries the failure explanation.
    Conflict(Explanation),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("cannot backtrack to level {target} from level {current}")]
    InvalidBacktrack { target: usize, current: usize },
}

/// Read-only view of one trail entry for conflict analysis.
#[derive(Debug, Clone, Copy)]
pub struct TrailView<'a> {
    pub lit: Lit,
    pub level: usize,
    pub reason: Option<&'a Explanation>,
}

#[derive(Debug, Clone, Default)]
pub struct DomainStore {
    initial: Vec<(Time, Time)>,
    lb: Vec<Time>,
    ub: Vec<Time>,
    trail: Vec<TrailEntry>,
    /// `(trail length, reason count)` at the start of each level above 0.
    marks: Vec<(usize, usize)>,
    lb_steps: Vec<Vec<usize>>,
    ub_steps: Vec<Vec<usize>>,
    reasons: Vec<Explanation>,
}

impl DomainStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, lb: Time, ub: Time) -> VarId {
        debug_assert!(lb <= ub, "empty initial domain");
        self.initial.push((lb, ub));
        self.lb.push(lb);
        self.ub.push(ub);
        self.lb_steps.push(Vec::new());
        self.ub_steps.push(Vec::new());
        self.initial.len() - 1
    }

    pub fn add_bool(&mut self) -> VarId {
        self.add_var(0, 1)
    }

    pub fn num_vars(&self) -> usize {
        self.initial.len()
    }

    pub fn initial(&self, var: VarId) -> (Time, Time) {
        self.initial[var]
    }

    pub fn initial_domains(&self) -> &[(Time, Time)] {
        &self.initial
    }

    pub fn is_fixed(&self, var: VarId) -> bool {
        self.lb[var] == self.ub[var]
    }

    pub fn snapshot(&self) -> Vec<(Time, Time)> {
        self.lb.iter().copied().zip(self.ub.iter().copied()).collect()
    }

    pub fn level(&self) -> usize {
        self.marks.len()
    }

    pub fn trail_len(&self) -> usize {
        self.trail.len()
    }

    pub fn canonical(&self, lit: Lit) -> Canonical {
        canonical_in(lit, self.initial[lit.var])
    }

    pub fn literal_holds(&self, lit: Lit) -> bool {
        lit.holds_in(self.lb[lit.var], self.ub[lit.var])
    }

    pub fn literal_fails(&self, lit: Lit) -> bool {
        lit.fails_in(self.lb[lit.var], self.ub[lit.var])
    }

    pub fn set_lb(&mut self, var: VarId, value: Time, reason: Explanation) -> SetOutcome {
        self.apply(Lit::geq(var, value), Reason::Explained(usize::MAX), Some(reason))
    }

    pub fn set_ub(&mut self, var: VarId, value: Time, reason: Explanation) -> SetOutcome {
        self.apply(Lit::leq(var, value), Reason::Explained(usize::MAX), Some(reason))
    }

    /// Makes `lit` true, explained by `reason`.
    pub fn enforce(&mut self, lit: Lit, reason: Explanation) -> SetOutcome {
        debug_assert!(
            reason.consequent.is_none_or(|c| c.implies(lit)),
            "reason does not conclude {lit}"
        );
        self.apply(lit, Reason::Explained(usize::MAX), Some(reason))
    }

    /// Opens a new decision level and makes `lit` true.
    pub fn decide(&mut self, lit: Lit) -> SetOutcome {
        debug_assert!(
            !self.literal_holds(lit) && !self.literal_fails(lit),
            "decision {lit} is already assigned"
        );
        self.marks.push((self.trail.len(), self.reasons.len()));
        self.apply(lit, Reason::Decision, None)
    }

    pub fn backtrack_to(&mut self, level: usize) -> Result<(), DomainError> {
        if level > self.level() {
            return Err(DomainError::InvalidBacktrack {
                target: level,
                current: self.level(),
            });
        }
        if level == self.level() {
            return Ok(());
        }
        let (trail_len, reason_len) = self.marks[level];
        while self.trail.len() > trail_len {
            let e = self.trail.pop().expect("trail shorter than mark");
            match e.lit.bound {
                Bound::Lower => {
                    self.lb[e.lit.var] = e.previous;
                    self.lb_steps[e.lit.var].pop();
                }
                Bound::Upper => {
                    self.ub[e.lit.var] = e.previous;
                    self.ub_steps[e.lit.var].pop();
                }
            }
        }
        self.reasons.truncate(reason_len);
        self.marks.truncate(level);
        Ok(())
    }

    /// Trail index of the entry that first made `lit` true, or `None` when
    /// it holds in the initial domain.
    pub fn entry_for(&self, lit: Lit) -> Option<usize> {
        let steps = match lit.bound {
            Bound::Lower => &self.lb_steps[lit.var],
            Bound::Upper => &self.ub_steps[lit.var],
        };
        let first = steps.partition_point(|&idx| !self.trail[idx].lit.implies(lit));
        steps.get(first).copied()
    }

    /// Decision level at which `lit` became true (0 if true initially).
    pub fn level_of(&self, lit: Lit) -> usize {
        self.entry_for(lit).map_or(0, |idx| self.trail[idx].level)
    }

    pub fn trail_entry(&self, idx: usize) -> TrailView<'_> {
        let e = &self.trail[idx];
        TrailView {
            lit: e.lit,
            level: e.level,
            reason: match e.reason {
                Reason::Decision => None,
                Reason::Explained(r) => Some(&self.reasons[r]),
            },
        }
    }

    fn apply(&mut self, lit: Lit, reason: Reason, expl: Option<Explanation>) -> SetOutcome {
        let var = lit.var;
        let (lb, ub) = (self.lb[var], self.ub[var]);
        if lit.holds_in(lb, ub) {
            return SetOutcome::Unchanged;
        }
        if lit.fails_in(lb, ub) {
            // The consequent clashes with the opposite bound; the weakest
            // clashing literal keeps the failure general.
            let clash = lit.negate();
            let mut antecedents = expl
                .as_ref()
                .map(|e| e.antecedents.clone())
                .unwrap_or_default();
            if let Canonical::Lit(c) = self.canonical(clash) {
                antecedents.push(c);
            }
            let source = expl.map_or(Source::Root, |e| e.source);
            return SetOutcome::Conflict(Explanation::new(antecedents, None, source));
        }
        let reason = match (reason, expl) {
            (Reason::Decision, _) => Reason::Decision,
            (_, Some(e)) => {
                self.reasons.push(self.clean(e));
                Reason::Explained(self.reasons.len() - 1)
            }
            (r, None) => r,
        };
        let idx = self.trail.len();
        let previous = match lit.bound {
            Bound::Lower => std::mem::replace(&mut self.lb[var], lit.value),
            Bound::Upper => std::mem::replace(&mut self.ub[var], lit.value),
        };
        match lit.bound {
            Bound::Lower => self.lb_steps[var].push(idx),
            Bound::Upper => self.ub_steps[var].push(idx),
        }
        self.trail.push(TrailEntry {
            lit,
            previous,
            level: self.level(),
            reason,
        });
        SetOutcome::Changed
    }

    /// Drops antecedents that hold in the initial domain.
    fn clean(&self, mut e: Explanation) -> Explanation {
        e.antecedents.retain(|&a| {
            let c = self.canonical(a);
            debug_assert!(c != Canonical::False, "antecedent {a} is false at root");
            debug_assert!(self.literal_holds(a), "antecedent {a} does not hold");
            c != Canonical::True
        });
        e
    }
}

/// Normalizes `lit` against the initial domain `(lb0, ub0)` of its variable.
pub fn canonical_in(lit: Lit, (lb0, ub0): (Time, Time)) -> Canonical {
    match lit.bound {
        Bound::Lower if lit.value <= lb0 => Canonical::True,
        Bound::Lower if lit.value > ub0 => Canonical::False,
        Bound::Upper if lit.value >= ub0 => Canonical::True,
        Bound::Upper if lit.value < lb0 => Canonical::False,
        _ => Canonical::Lit(lit),
    }
}

impl BoundsSource for DomainStore {
    fn lb(&self, var: VarId) -> Time {
        self.lb[var]
    }
    fn ub(&self, var: VarId) -> Time {
        self.ub[var]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(bounds: &[(Time, Time)]) -> DomainStore {
        let mut d = DomainStore::new();
        for &(l, u) in bounds {
            d.add_var(l, u);
        }
        d
    }

    fn because(lit: Lit) -> Explanation {
        Explanation::root(lit, Source::Root)
    }

    #[test]
    fn set_lb_outcomes() {
        let mut d = store(&[(0, 10)]);
        assert_eq!(d.set_lb(0, 3, because(Lit::geq(0, 3))), SetOutcome::Changed);
        assert_eq!(d.lb(0), 3);

        let mut d = store(&[(5, 10)]);
        assert_eq!(
            d.set_lb(0, 3, because(Lit::geq(0, 3))),
            SetOutcome::Unchanged
        );

        let mut d = store(&[(0, 10)]);
        d.set_ub(0, 2, because(Lit::leq(0, 2)));
        match d.set_lb(0, 3, because(Lit::geq(0, 3))) {
            SetOutcome::Conflict(e) => {
                assert!(e.is_failure());
                assert_eq!(e.antecedents, vec![Lit::leq(0, 2)]);
            }
            other => panic!("expected conflict, got {other:?}"),
        }
    }

    #[test]
    fn decide_and_backtrack() {
        let mut d = store(&[(0, 10), (0, 10)]);
        let l = Lit::leq(1, 4);
        d.decide(l);
        assert!(d.literal_holds(l));
        assert_eq!(d.level(), 1);
        d.backtrack_to(0).unwrap();
        assert!(!d.literal_holds(l));
        assert_eq!(d.ub(1), 10);
    }

    #[test]
    fn initial_bound_literals_always_hold() {
        let d = store(&[(2, 7)]);
        assert!(d.literal_holds(Lit::leq(0, 7)));
        assert!(d.literal_holds(Lit::geq(0, 2)));
        assert_eq!(d.canonical(Lit::leq(0, 9)), Canonical::True);
        assert_eq!(d.canonical(Lit::geq(0, -4)), Canonical::True);
        assert_eq!(d.canonical(Lit::geq(0, 8)), Canonical::False);
        assert_eq!(d.canonical(Lit::leq(0, 1)), Canonical::False);
    }

    #[test]
    fn backtrack_above_current_level_is_rejected() {
        let mut d = store(&[(0, 3)]);
        assert_eq!(
            d.backtrack_to(1),
            Err(DomainError::InvalidBacktrack {
                target: 1,
                current: 0
            })
        );
    }

    #[test]
    fn entry_lookup_finds_first_implying_entry() {
        let mut d = store(&[(0, 20)]);
        d.decide(Lit::geq(0, 3));
        d.set_lb(0, 7, because(Lit::geq(0, 7)));
        d.decide(Lit::geq(0, 12));
        assert_eq!(d.entry_for(Lit::geq(0, 2)), Some(0));
        assert_eq!(d.entry_for(Lit::geq(0, 5)), Some(1));
        assert_eq!(d.entry_for(Lit::geq(0, 12)), Some(2));
        assert_eq!(d.entry_for(Lit::geq(0, 0)), Some(0));
        assert_eq!(d.level_of(Lit::geq(0, 7)), 1);
        assert_eq!(d.level_of(Lit::geq(0, 9)), 2);
        d.backtrack_to(1).unwrap();
        assert_eq!(d.entry_for(Lit::geq(0, 9)), None);
    }

    #[test]
    fn reasons_drop_root_true_antecedents() {
        let mut d = store(&[(0, 5), (0, 5)]);
        let e = Explanation::new(
            vec![Lit::geq(0, 0), Lit::leq(1, 5)],
            Some(Lit::geq(1, 1)),
            Source::Root,
        );
        d.enforce(Lit::geq(1, 1), e);
        let view = d.trail_entry(0);
        assert!(view.reason.unwrap().antecedents.is_empty());
    }

    #[test]
    fn negation_is_an_involution() {
        let l = Lit::geq(3, 5);
        assert_eq!(l.negate(), Lit::leq(3, 4));
        assert_eq!(l.negate().negate(), l);
    }
}
