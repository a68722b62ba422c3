use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::analysis::{analyze_conflict, Analysis};
use super::{PropLevel, SearchObserver, SolveStats, SolverConfig};
use crate::cumulative::CumulativeView;
use crate::domains::{Bound, BoundsSource, DomainStore, Explanation, Lit, SetOutcome, Source, VarId};
use crate::model::{Project, Time};

/// `S_from + delay <= S_to`, active while `guard` holds.
#[derive(Debug, Clone, Copy)]
struct Edge {
    from: VarId,
    to: VarId,
    delay: Time,
    guard: Option<Lit>,
}

/// One search engine over a fixed project. Owns its domains, learned
/// clauses and activity scores.
pub struct Solver<'p, 'o> {
    pub(super) project: &'p Project,
    pub(super) config: SolverConfig,
    pub(super) dom: DomainStore,
    n: usize,
    obj: VarId,
    edges: Vec<Edge>,
    edges_of: Vec<Vec<usize>>,
    clauses: Vec<Vec<Lit>>,
    /// Clauses watching an upper-bound literal of the variable, woken by lb changes.
    watches_lb: Vec<Vec<usize>>,
    /// Clauses watching a lower-bound literal of the variable, woken by ub changes.
    watches_ub: Vec<Vec<usize>>,
    qhead: usize,
    edges_pending: bool,
    pub(super) activity: Vec<f64>,
    bump_inc: f64,
    /// Decisions of the open levels, with whether each is already a flipped one.
    decisions: Vec<(Lit, bool)>,
    pub(super) stats: SolveStats,
    pub(super) observer: &'o mut dyn SearchObserver,
    audit: bool,
    objective_ub: Time,
    /// An activity alone exceeds a capacity.
    root_conflict: bool,
}

impl<'p, 'o> Solver<'p, 'o> {
    pub fn new(project: &'p Project, config: SolverConfig, observer: &'o mut dyn SearchObserver) -> Self {
        Self::with_audit(project, config, observer, false)
    }

    /// Like `new`, but also reports every node to the observer.
    pub fn with_audit(
        project: &'p Project,
        config: SolverConfig,
        observer: &'o mut dyn SearchObserver,
        audit: bool,
    ) -> Self {
        let n = project.len();
        let mut dom = DomainStore::new();
        for &(lo, hi) in &project.windows {
            dom.add_var(lo, hi);
        }
        let lowest = project.windows.iter().map(|w| w.0).min().unwrap_or(0);
        let obj = dom.add_var(lowest.min(project.horizon), project.horizon);

        let mut edges = Vec::new();
        for &(i, j) in &project.precedences {
            edges.push(Edge {
                from: i,
                to: j,
                delay: project.durations[i],
                guard: None,
            });
        }
        for i in 0..n {
            edges.push(Edge {
                from: i,
                to: obj,
                delay: project.durations[i],
                guard: None,
            });
        }
        for (i, j) in project.disjunctions() {
            let b = dom.add_bool();
            edges.push(Edge {
                from: i,
                to: j,
                delay: project.durations[i],
                guard: Some(Lit::bool_true(b)),
            });
            edges.push(Edge {
                from: j,
                to: i,
                delay: project.durations[j],
                guard: Some(Lit::bool_false(b)),
            });
        }
        let vars = dom.num_vars();
        let mut edges_of = vec![Vec::new(); vars];
        for (k, e) in edges.iter().enumerate() {
            edges_of[e.from].push(k);
            edges_of[e.to].push(k);
            if let Some(g) = e.guard {
                edges_of[g.var].push(k);
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let activity = (0..vars).map(|_| rng.gen::<f64>() * 1e-3).collect();
        Solver {
            project,
            config,
            dom,
            n,
            obj,
            edges,
            edges_of,
            clauses: Vec::new(),
            watches_lb: vec![Vec::new(); vars],
            watches_ub: vec![Vec::new(); vars],
            qhead: 0,
            edges_pending: true,
            activity,
            bump_inc: 1.0,
            decisions: Vec::new(),
            stats: SolveStats::default(),
            observer,
            audit,
            objective_ub: project.horizon,
            root_conflict: project.overloaded_activity().is_some(),
        }
    }

    pub fn domains(&self) -> &DomainStore {
        &self.dom
    }

    pub fn objective(&self) -> VarId {
        self.obj
    }

    pub fn activities(&self) -> usize {
        self.n
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    pub(super) fn audit(&self) -> bool {
        self.audit
    }

    pub(super) fn infeasible_at_root(&self) -> bool {
        self.root_conflict
    }

    pub fn start_times(&self) -> Vec<Time> {
        (0..self.n).map(|i| self.dom.lb(i)).collect()
    }

    /// Opens a new level with `lit`, which must be unassigned.
    pub fn decide(&mut self, lit: Lit) {
        self.decisions.push((lit, false));
        let out = self.dom.decide(lit);
        debug_assert_eq!(out, SetOutcome::Changed);
    }

    pub(super) fn backtrack(&mut self, level: usize) {
        self.dom.backtrack_to(level).expect("backtrack target above current level");
        self.decisions.truncate(level);
        self.qhead = self.qhead.min(self.dom.trail_len());
    }

    /// Adds a root-level fact. Returns false if it contradicts the root.
    pub fn post_root(&mut self, lit: Lit, source: Source) -> bool {
        self.backtrack(0);
        if lit.var == self.obj && lit.bound == Bound::Upper {
            self.objective_ub = self.objective_ub.min(lit.value);
        }
        match self.dom.enforce(lit, Explanation::root(lit, source)) {
            SetOutcome::Conflict(_) => {
                self.root_conflict = true;
                false
            }
            _ => true,
        }
    }

    fn apply(&mut self, lit: Lit, reason: Explanation) -> Result<bool, Explanation> {
        self.observer.on_explanation(&reason);
        match self.dom.enforce(lit, reason) {
            SetOutcome::Changed => Ok(true),
            SetOutcome::Unchanged => Ok(false),
            SetOutcome::Conflict(e) => Err(e),
        }
    }

    fn propagate_edge(&mut self, k: usize) -> Result<(), Explanation> {
        let Edge {
            from,
            to,
            delay,
            guard,
        } = self.edges[k];
        let active = match guard {
            None => true,
            Some(g) if self.dom.literal_holds(g) => true,
            Some(g) if self.dom.literal_fails(g) => return Ok(()),
            Some(_) => false,
        };
        let source = Source::Precedence {
            from,
            to,
            delay,
            guard,
        };
        let lbf = self.dom.lb(from);
        if active {
            if lbf + delay > self.dom.lb(to) {
                let lit = Lit::geq(to, lbf + delay);
                let mut ante = vec![Lit::geq(from, lbf)];
                ante.extend(guard);
                self.apply(lit, Explanation::new(ante, Some(lit), source.clone()))?;
            }
            let ubt = self.dom.ub(to);
            if ubt - delay < self.dom.ub(from) {
                let lit = Lit::leq(from, ubt - delay);
                let mut ante = vec![Lit::leq(to, ubt)];
                ante.extend(guard);
                self.apply(lit, Explanation::new(ante, Some(lit), source))?;
            }
        } else if let Some(g) = guard {
            let ubt = self.dom.ub(to);
            if lbf + delay > ubt {
                let lit = g.negate();
                let ante = vec![Lit::geq(from, lbf), Lit::leq(to, ubt)];
                self.apply(lit, Explanation::new(ante, Some(lit), source))?;
            }
        }
        Ok(())
    }

    fn watch(&mut self, lit: Lit, c: usize) {
        match lit.bound {
            Bound::Lower => self.watches_ub[lit.var].push(c),
            Bound::Upper => self.watches_lb[lit.var].push(c),
        }
    }

    /// Visits the clauses watching a literal that `changed` may have falsified.
    fn propagate_clauses(&mut self, changed: Lit) -> Result<(), Explanation> {
        let var = changed.var;
        let (list, here) = match changed.bound {
            Bound::Lower => (std::mem::take(&mut self.watches_lb[var]), Bound::Upper),
            Bound::Upper => (std::mem::take(&mut self.watches_ub[var]), Bound::Lower),
        };
        let mut keep = Vec::with_capacity(list.len());
        let mut result = Ok(());
        for c in list {
            if result.is_err() {
                keep.push(c);
                continue;
            }
            let dom = &self.dom;
            let lits = &mut self.clauses[c];
            let falsified = |l: &Lit| l.var == var && l.bound == here && dom.literal_fails(*l);
            if !falsified(&lits[0]) {
                if falsified(&lits[1]) {
                    lits.swap(0, 1);
                } else {
                    keep.push(c);
                    continue;
                }
            }
            if dom.literal_holds(lits[1]) {
                keep.push(c);
                continue;
            }
            if let Some(k) = (2..lits.len()).find(|&k| !dom.literal_fails(lits[k])) {
                lits.swap(0, k);
                let w = lits[0];
                if w.var == var && w.bound == here {
                    keep.push(c);
                } else {
                    self.watch(w, c);
                }
                continue;
            }
            keep.push(c);
            let other = lits[1];
            let mut ante: Vec<Lit> = lits.iter().skip(2).map(|l| l.negate()).collect();
            ante.push(lits[0].negate());
            if dom.literal_fails(other) {
                ante.push(other.negate());
                result = Err(Explanation::new(ante, None, Source::Clause));
            } else if let SetOutcome::Conflict(e) =
                self.dom.enforce(other, Explanation::new(ante, Some(other), Source::Clause))
            {
                result = Err(e);
            }
        }
        let slot = match changed.bound {
            Bound::Lower => &mut self.watches_lb[var],
            Bound::Upper => &mut self.watches_ub[var],
        };
        keep.append(slot);
        *slot = keep;
        result
    }

    /// Edges and clauses, driven by the unprocessed part of the trail.
    fn propagate_cheap(&mut self) -> Result<(), Explanation> {
        if self.edges_pending {
            self.edges_pending = false;
            for k in 0..self.edges.len() {
                self.propagate_edge(k)?;
            }
        }
        while self.qhead < self.dom.trail_len() {
            let lit = self.dom.trail_entry(self.qhead).lit;
            self.qhead += 1;
            self.propagate_clauses(lit)?;
            for x in 0..self.edges_of[lit.var].len() {
                let k = self.edges_of[lit.var][x];
                self.propagate_edge(k)?;
            }
        }
        Ok(())
    }

    /// One round of cumulative propagation; true if any bound moved.
    fn propagate_resources(&mut self) -> Result<bool, Explanation> {
        let project = self.project;
        for k in 0..project.resources.len() {
            let view = CumulativeView::of_project(project, k, &self.dom);
            if view.is_trivial() {
                continue;
            }
            let profile = view.profile();
            let mut check = view.tt_check(&profile);
            if check.is_ok() && self.config.prop >= PropLevel::TtefCheck {
                check = view.ttef_check(&profile);
            }
            if let Err(e) = check {
                self.observer.on_explanation(&e);
                return Err(e);
            }
            let mut updates = view.tt_filter(&profile);
            if self.config.prop == PropLevel::Ttef {
                let filtered = view
                    .ttef_filter_lb(&profile)
                    .and_then(|mut lb| view.ttef_filter_ub().map(|ub| {
                        lb.extend(ub);
                        lb
                    }));
                match filtered {
                    Ok(ups) => updates.extend(ups),
                    Err(e) => {
                        self.observer.on_explanation(&e);
                        return Err(e);
                    }
                }
            }
            let mut changed = false;
            for u in updates {
                changed |= self.apply(u.lit, u.explanation)?;
            }
            if changed {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Runs all propagators to a common fixpoint.
    pub fn propagate(&mut self) -> Result<(), Explanation> {
        if self.root_conflict {
            return Err(Explanation::new(Vec::new(), None, Source::Root));
        }
        loop {
            self.propagate_cheap()?;
            if !self.propagate_resources()? {
                return Ok(());
            }
        }
    }

    fn bump(&mut self, var: VarId) {
        self.activity[var] += self.bump_inc;
        if self.activity[var] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.bump_inc *= 1e-100;
        }
    }

    /// Learns from `conflict`, backjumps and asserts. False when the
    /// conflict holds at the root.
    pub fn learn(&mut self, conflict: Explanation) -> bool {
        let mut conflict = conflict;
        loop {
            let mut touched = Vec::new();
            let analysis = analyze_conflict(&mut self.dom, &conflict, |v| touched.push(v));
            for v in touched {
                self.bump(v);
            }
            self.bump_inc /= 0.95;
            let Analysis::Learned { clause, level } = analysis else {
                self.root_conflict = true;
                return false;
            };
            self.backtrack(level);
            self.stats.learned += 1;
            self.observer.on_learned(&clause, self.objective_ub);
            let assert = clause[0];
            let ante = clause[1..].iter().map(|l| l.negate()).collect();
            if clause.len() > 1 {
                let c = self.clauses.len();
                self.watch(clause[0], c);
                self.watch(clause[1], c);
                self.clauses.push(clause);
            }
            match self
                .dom
                .enforce(assert, Explanation::new(ante, Some(assert), Source::Clause))
            {
                SetOutcome::Conflict(e) => conflict = e,
                _ => return true,
            }
        }
    }

    /// Chronological backtracking: flips the deepest unflipped decision.
    pub fn backtrack_chronological(&mut self) -> bool {
        while let Some(&(lit, flipped)) = self.decisions.last() {
            let level = self.dom.level();
            self.backtrack(level - 1);
            if !flipped {
                self.decisions.push((lit.negate(), true));
                self.dom.decide(lit.negate());
                return true;
            }
        }
        self.root_conflict = true;
        false
    }

    /// Drops root-satisfied clauses and, above the cap, the longest ones.
    pub(super) fn reduce_clauses(&mut self) {
        debug_assert_eq!(self.dom.level(), 0);
        let dom = &self.dom;
        let mut kept: Vec<Vec<Lit>> = std::mem::take(&mut self.clauses)
            .into_iter()
            .filter(|c| !c.iter().any(|&l| dom.literal_holds(l)))
            .map(|c| c.into_iter().filter(|&l| !dom.literal_fails(l)).collect::<Vec<_>>())
            .collect();
        debug_assert!(kept.iter().all(|c| c.len() >= 2));
        if kept.len() > self.config.clause_cap {
            // stable: among equal lengths the newer clauses go first
            kept.reverse();
            kept.sort_by_key(|c| c.len());
            kept.truncate(self.config.clause_cap / 2);
        }
        for w in self.watches_lb.iter_mut().chain(self.watches_ub.iter_mut()) {
            w.clear();
        }
        for (c, lits) in kept.iter().enumerate() {
            let (a, b) = (lits[0], lits[1]);
            match a.bound {
                Bound::Lower => self.watches_ub[a.var].push(c),
                Bound::Upper => self.watches_lb[a.var].push(c),
            }
            match b.bound {
                Bound::Lower => self.watches_ub[b.var].push(c),
                Bound::Upper => self.watches_lb[b.var].push(c),
            }
        }
        self.clauses = kept;
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Serial-generation choice: earliest unfixed start, then smallest lst, then id.
    pub(super) fn sgs_choice(&self) -> Option<Lit> {
        (0..self.n)
            .filter(|&i| !self.dom.is_fixed(i))
            .min_by_key(|&i| (self.dom.lb(i), self.dom.ub(i), i))
            .map(|i| Lit::leq(i, self.dom.lb(i)))
    }

    /// Highest-activity unfixed start or objective, split at the midpoint.
    pub(super) fn activity_choice(&self) -> Option<Lit> {
        let mut best: Option<VarId> = None;
        for v in 0..=self.n {
            if self.dom.is_fixed(v) {
                continue;
            }
            if best.is_none_or(|b| self.activity[v] > self.activity[b]) {
                best = Some(v);
            }
        }
        let v = best?;
        let (lo, hi) = (self.dom.lb(v), self.dom.ub(v));
        Some(Lit::leq(v, lo + (hi - lo).div_euclid(2)))
    }

    /// True once every start time is fixed.
    pub(super) fn all_fixed(&self) -> bool {
        (0..self.n).all(|i| self.dom.is_fixed(i))
    }
}
