use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttef_core::oracle::{self, EnumLimits};
use ttef_core::psplib::{example1, parse_sm, to_project};
use ttef_core::{solve_project, Mode, Outcome, Project, PropLevel, Resource, SolverConfig};

fn config(mode: Mode, prop: PropLevel) -> SolverConfig {
    SolverConfig {
        mode,
        prop,
        ..SolverConfig::default()
    }
}

fn check_schedule(p: &Project, starts: &[i64]) -> i64 {
    for (i, &(lo, hi)) in p.windows.iter().enumerate() {
        assert!(lo <= starts[i] && starts[i] <= hi, "activity {i} outside its window");
    }
    for &(i, j) in &p.precedences {
        assert!(starts[i] + p.durations[i] <= starts[j]);
    }
    for r in &p.resources {
        for t in 0..p.horizon {
            let load: i64 = (0..p.len())
                .filter(|&i| starts[i] <= t && t < starts[i] + p.durations[i])
                .map(|i| r.usages[i])
                .sum();
            assert!(load <= r.capacity, "overload at {t}");
        }
    }
    (0..p.len()).map(|i| starts[i] + p.durations[i]).max().unwrap_or(0)
}

#[test]
fn example_optimum_in_both_modes() {
    let p = example1();
    for mode in [Mode::Upper, Mode::Lower] {
        for prop in [PropLevel::Tt, PropLevel::TtefCheck, PropLevel::Ttef] {
            let r = solve_project(&p, &config(mode, prop));
            assert_eq!(r.outcome, Outcome::Optimal(9), "{} {}", mode.name(), prop.name());
            assert_eq!(check_schedule(&p, r.schedule.as_ref().unwrap()), 9);
        }
    }
}

#[test]
fn single_activity() {
    let p = Project::new(
        "one",
        vec![5],
        vec![Resource { capacity: 1, usages: vec![1] }],
        vec![],
        vec![(0, 5)],
        10,
    )
    .unwrap();
    for mode in [Mode::Upper, Mode::Lower] {
        assert_eq!(solve_project(&p, &config(mode, PropLevel::Ttef)).outcome, Outcome::Optimal(5));
    }
}

#[test]
fn two_full_width_activities() {
    let p = Project::new(
        "two",
        vec![2, 2],
        vec![Resource { capacity: 3, usages: vec![3, 3] }],
        vec![],
        vec![(0, 8), (0, 8)],
        10,
    )
    .unwrap();
    for mode in [Mode::Upper, Mode::Lower] {
        assert_eq!(solve_project(&p, &config(mode, PropLevel::Ttef)).outcome, Outcome::Optimal(4));
    }
}

#[test]
fn explicit_lower_start() {
    let p = example1();
    let mut c = config(Mode::Lower, PropLevel::Ttef);
    c.start_makespan = Some(1);
    let r = solve_project(&p, &c);
    assert_eq!(r.outcome, Outcome::Optimal(9));
}

#[test]
fn infeasible_deadline() {
    let p = Project::new(
        "tight",
        vec![3, 3],
        vec![Resource { capacity: 1, usages: vec![1, 1] }],
        vec![],
        vec![(0, 2), (0, 2)],
        5,
    )
    .unwrap();
    for mode in [Mode::Upper, Mode::Lower] {
        for learning in [true, false] {
            let mut c = config(mode, PropLevel::Ttef);
            c.learning = learning;
            assert_eq!(solve_project(&p, &c).outcome, Outcome::Infeasible);
        }
    }
}

#[test]
fn matches_enumeration_on_random_projects() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..400 {
        let p = oracle::random_project(&mut rng, 1 + (checked % 2));
        let Ok(expected) = oracle::optimal_makespan(&p, &EnumLimits::default()) else {
            continue;
        };
        checked += 1;
        for mode in [Mode::Upper, Mode::Lower] {
            for prop in [PropLevel::Tt, PropLevel::Ttef] {
                for learning in [true, false] {
                    let mut c = config(mode, prop);
                    c.learning = learning;
                    c.sgs_budget = checked as u64 % 3;
                    c.restart_base = 1 + checked as u64 % 5;
                    let r = solve_project(&p, &c);
                    match expected {
                        Some(m) => {
                            assert_eq!(r.outcome, Outcome::Optimal(m), "{p:?} {c:?}");
                            assert_eq!(check_schedule(&p, r.schedule.as_ref().unwrap()), m);
                        }
                        None => assert_eq!(r.outcome, Outcome::Infeasible, "{p:?} {c:?}"),
                    }
                }
            }
        }
    }
    assert!(checked >= 300, "only {checked} projects enumerated");
}

#[test]
fn archive_instance() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/j30/j301_1.sm")).unwrap();
    let raw = parse_sm(&text).unwrap();
    assert_eq!(raw.jobs(), 32);
    assert_eq!(raw.capacities, vec![12, 13, 4, 12]);
    let p = to_project(&raw, "j301_1", None).unwrap();
    let r = solve_project(&p, &config(Mode::Upper, PropLevel::Ttef));
    assert_eq!(r.outcome, Outcome::Optimal(43));
    check_schedule(&p, r.schedule.as_ref().unwrap());
}
