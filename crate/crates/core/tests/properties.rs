use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttef_core::domains::canonical_in;
use ttef_core::oracle;
use ttef_core::psplib::{parse_sm, render_sm, RawPsplib};
use ttef_core::{solve_project, Canonical, Lit, Mode, Outcome, PropLevel, ResourceProfile, SolverConfig, TaskBounds};

fn task() -> impl Strategy<Value = TaskBounds> {
    (0i64..20, 0i64..10, 0i64..8, 0i64..5).prop_map(|(est, slack, duration, usage)| TaskBounds {
        est,
        lst: est + slack,
        duration,
        usage,
    })
}

proptest! {
    #[test]
    fn canonical_agrees_with_holding(lb in -10i64..10, w in 0i64..10, v in -25i64..25, upper: bool) {
        let ub = lb + w;
        let lit = if upper { Lit::leq(0, v) } else { Lit::geq(0, v) };
        match canonical_in(lit, (lb, ub)) {
            Canonical::True => prop_assert!(lit.holds_in(lb, ub)),
            Canonical::False => prop_assert!(lit.fails_in(lb, ub)),
            Canonical::Lit(l) => {
                prop_assert_eq!(l, lit);
                prop_assert!(!lit.holds_in(lb, ub) && !lit.fails_in(lb, ub));
            }
        }
        prop_assert_eq!(lit.negate().negate(), lit);
    }

    #[test]
    fn profile_is_sum_of_compulsory_parts(tasks in prop::collection::vec(task(), 0..8), t in 0i64..40) {
        let profile = ResourceProfile::build(&tasks);
        let direct: i64 = tasks
            .iter()
            .filter_map(|k| k.compulsory_part().map(|cp| (cp, k.usage)))
            .filter(|&((a, b), _)| a <= t && t < b)
            .map(|(_, r)| r)
            .sum();
        prop_assert_eq!(profile.height(t), direct);
        let energy: i64 = tasks
            .iter()
            .filter_map(|k| k.compulsory_part().map(|(a, b)| (b - a) * k.usage))
            .sum();
        prop_assert_eq!(profile.total_energy(), energy);
        prop_assert_eq!(profile.tt_energy(t, t + 5), (t..t + 5).map(|s| profile.height(s)).sum::<i64>());
    }

    #[test]
    fn window_length_is_monotone(k in task(), b in 0i64..30, w in 0i64..20, grow in 0i64..5) {
        let e = b + w;
        let inner = k.window_length(b, e);
        prop_assert!(inner >= 0 && inner <= k.duration);
        prop_assert!(k.window_length(b, e + grow) >= inner);
        prop_assert!(k.window_length((b - grow).max(0), e) >= inner);
    }

    #[test]
    fn mirror_is_an_involution(k in task(), h in 30i64..60) {
        prop_assert_eq!(k.mirrored(h).mirrored(h), k);
        prop_assert_eq!(k.mirrored(h).compulsory_part().map(|(a, b)| (h - b, h - a)), k.compulsory_part());
    }

    #[test]
    fn psplib_round_trip(
        rows in prop::collection::vec((0i64..12, prop::collection::vec(0i64..6, 2)), 1..10),
        caps in prop::collection::vec(0i64..9, 2),
        density in 0u32..4,
    ) {
        let n = rows.len();
        let successors = (0..n)
            .map(|i| ((i + 1)..n).filter(|j| (i + j) as u32 % 4 < density).collect())
            .collect();
        let raw = RawPsplib {
            capacities: caps,
            durations: rows.iter().map(|r| r.0).collect(),
            requests: rows.iter().map(|r| r.1.clone()).collect(),
            successors,
            horizon: Some(rows.iter().map(|r| r.0).sum()),
        };
        prop_assert_eq!(parse_sm(&render_sm(&raw)), Ok(raw));
    }

    #[test]
    fn parser_never_panics(text in "[ -~\n]{0,400}") {
        let _ = parse_sm(&text);
    }
}

#[test]
fn translation_shifts_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..60 {
        let p = oracle::random_project(&mut rng, 1 + i % 2);
        for mode in [Mode::Upper, Mode::Lower] {
            let config = SolverConfig {
                mode,
                prop: PropLevel::Ttef,
                ..SolverConfig::default()
            };
            let base = solve_project(&p, &config);
            for c in [-7, 13] {
                let moved = solve_project(&p.shifted(c), &config);
                let expected = match base.outcome {
                    Outcome::Optimal(m) => Outcome::Optimal(m + c),
                    other => other,
                };
                assert_eq!(moved.outcome, expected, "shift {c} of {p:?}");
                assert_eq!(moved.stats.failures, base.stats.failures, "shift {c} of {p:?}");
            }
        }
    }
}

