//! First-UIP conflict analysis over bounds literals.

use std::collections::BTreeMap;

use crate::domains::{Bound, DomainStore, Explanation, Lit, VarId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Analysis {
    /// The conflict holds at the root.
    Unsat,
    /// `clause[0]` is asserting at `level`; `clause[1]` (if any) has the
    /// highest level among the rest.
    Learned { clause: Vec<Lit>, level: usize },
}

fn keep_stronger(slot: &mut Lit, lit: Lit) {
    if lit.implies(*slot) {
        *slot = lit;
    }
}

struct Seen {
    top: usize,
    /// Conflict-level literals by the trail index that made them true.
    pending: BTreeMap<usize, Lit>,
    /// Strongest lower-level literal per variable bound, with its level.
    lower: BTreeMap<(VarId, Bound), (Lit, usize)>,
}

impl Seen {
    fn add(&mut self, dom: &DomainStore, lit: Lit, limit: usize, bump: &mut impl FnMut(VarId)) {
        let Some(idx) = dom.entry_for(lit) else { return };
        debug_assert!(idx < limit, "antecedent {lit} set after its consequent");
        let level = dom.trail_entry(idx).level;
        if level == 0 {
            return;
        }
        bump(lit.var);
        if level == self.top {
            self.pending
                .entry(idx)
                .and_modify(|l| keep_stronger(l, lit))
                .or_insert(lit);
        } else {
            self.lower
                .entry((lit.var, lit.bound))
                .and_modify(|(l, lv)| {
                    if lit.implies(*l) {
                        *l = lit;
                        *lv = level;
                    }
                })
                .or_insert((lit, level));
        }
    }
}

/// Resolves `conflict` against trail reasons until one literal of the
/// conflict level remains. May backtrack first when the whole conflict lies
/// below the current level. `bump` sees every variable touched.
pub fn analyze_conflict(
    dom: &mut DomainStore,
    conflict: &Explanation,
    mut bump: impl FnMut(VarId),
) -> Analysis {
    let top = conflict
        .antecedents
        .iter()
        .map(|&l| dom.level_of(l))
        .max()
        .unwrap_or(0);
    if top == 0 {
        return Analysis::Unsat;
    }
    if top < dom.level() {
        dom.backtrack_to(top).expect("conflict level is below the current level");
    }

    let mut seen = Seen {
        top,
        pending: BTreeMap::new(),
        lower: BTreeMap::new(),
    };
    for &l in &conflict.antecedents {
        seen.add(dom, l, usize::MAX, &mut bump);
    }
    while seen.pending.len() > 1 {
        let (idx, _) = seen.pending.pop_last().expect("pending is not empty");
        let reason = dom
            .trail_entry(idx)
            .reason
            .expect("only the decision of a level has no reason")
            .antecedents
            .clone();
        for a in reason {
            seen.add(dom, a, idx, &mut bump);
        }
    }
    let Seen {
        mut pending, lower, ..
    } = seen;
    let (_, uip) = pending.pop_first().expect("one literal of the conflict level");

    let mut rest: Vec<(Lit, usize)> = lower.into_values().collect();
    rest.sort_by_key(|&(l, lv)| (std::cmp::Reverse(lv), l.var, l.bound == Bound::Upper, l.value));
    let level = rest.first().map_or(0, |&(_, lv)| lv);
    let mut clause = vec![uip.negate()];
    clause.extend(rest.into_iter().map(|(l, _)| l.negate()));
    Analysis::Learned { clause, level }
}
