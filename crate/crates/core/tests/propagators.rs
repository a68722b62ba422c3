use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttef_core::oracle::{self, EnumLimits};
use ttef_core::{BoundUpdate, CumulativeView, Explanation, Project, Time};

fn antecedents_hold(e: &Explanation, bounds: &[(Time, Time)]) {
    for l in &e.antecedents {
        let (lo, hi) = bounds[l.var];
        assert!(l.holds_in(lo, hi), "antecedent {l} does not hold in {e}");
    }
}

fn check_valid(p: &Project, e: &Explanation, bounds: &[(Time, Time)]) {
    antecedents_hold(e, bounds);
    if let Err(c) = oracle::check_explanation(p, e) {
        panic!("invalid explanation {e} ({:?}): {c}\n{p}\nbounds {bounds:?}", e.source);
    }
}

fn check_updates(p: &Project, ups: &[BoundUpdate], bounds: &[(Time, Time)], feasible: &[Vec<Time>]) {
    let proj = oracle::projection(feasible, p.len());
    // updates are committed in order, later ones may rest on earlier ones
    let mut current = bounds.to_vec();
    for u in ups {
        check_valid(p, &u.explanation, &current);
        let b = &mut current[u.task];
        match u.lit.bound {
            ttef_core::Bound::Lower => b.0 = b.0.max(u.lit.value),
            ttef_core::Bound::Upper => b.1 = b.1.min(u.lit.value),
        }
        let (lo, hi) = bounds[u.task];
        for v in lo..=hi {
            if u.lit.fails_in(v, v) {
                assert!(!proj[u.task].contains(&v), "{} prunes feasible S_{} = {v}\n{p}\nbounds {bounds:?}", u.lit, u.task);
            }
        }
    }
}

#[test]
fn random_nodes_against_oracle() {
    let limits = EnumLimits::default();
    let mut checked = 0;
    let (mut overloads, mut ttef_updates, mut tt_updates) = (0, 0, 0);
    for seed in 0..3000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = oracle::random_project(&mut rng, 1);
        let bounds = oracle::random_bounds(&mut rng, &p);
        let Ok(feasible) = oracle::enumerate_feasible(&p, &bounds, &limits) else {
            continue;
        };
        checked += 1;
        let view = CumulativeView::of_project(&p, 0, &bounds);
        let profile = view.profile();

        let naive = oracle::naive_ttef_overload(&view.tasks, view.capacity);
        let ttef = view.ttef_check(&profile);
        assert_eq!(naive.is_some(), ttef.is_err(), "seed {seed}: naive {naive:?}");

        if let Err(e) = view.tt_check(&profile) {
            assert!(feasible.is_empty(), "seed {seed}: tt_check fails a feasible node");
            check_valid(&p, &e, &bounds);
            continue;
        }
        let tt = view.tt_filter(&profile);
        tt_updates += tt.len();
        check_updates(&p, &tt, &bounds, &feasible);
        if let Err(e) = ttef {
            overloads += 1;
            assert!(feasible.is_empty(), "seed {seed}: ttef_check fails a feasible node");
            check_valid(&p, &e, &bounds);
            continue;
        }
        let lb = view.ttef_filter_lb(&profile).expect("check passed");
        check_updates(&p, &lb, &bounds, &feasible);
        let ub = view.ttef_filter_ub().expect("check passed");
        check_updates(&p, &ub, &bounds, &feasible);
        ttef_updates += lb.len() + ub.len();
    }
    eprintln!("{checked} nodes, {overloads} ttef overloads, {tt_updates} tt and {ttef_updates} ttef updates");
    assert!(overloads > 50 && ttef_updates > 50 && tt_updates > 50);
    assert!(checked > 2500);
}
