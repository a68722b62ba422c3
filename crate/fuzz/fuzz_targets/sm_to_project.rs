#![no_main]

use libfuzzer_sys::fuzz_target;
use ttef_core::engine::NoObserver;
use ttef_core::psplib::{parse_sm, to_project};
use ttef_core::{Solver, SolverConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(raw) = parse_sm(text) else {
        return;
    };
    let Ok(project) = to_project(&raw, "fuzz", None) else {
        return;
    };
    if project.len() > 24 || project.horizon > 10_000 {
        return;
    }
    let mut obs = NoObserver;
    let mut solver = Solver::new(&project, SolverConfig::default(), &mut obs);
    let _ = solver.propagate();
});
