//! Lazy clause generation solver for cumulative scheduling with explained
//! time-table and time-table edge-finding propagation.

pub mod cumulative;
pub mod domains;
pub mod engine;
pub mod model;
pub mod oracle;
pub mod profile;
pub mod psplib;
pub mod tt;
pub mod ttef;

pub use cumulative::{BoundUpdate, CumulativeView};
pub use domains::{
    BoundsSource, Bound, Canonical, DomainError, DomainStore, Explanation, Lit, SetOutcome, Source,
    VarId, Window,
};
pub use model::{Activity, Instance, ModelError, Project, Resource, TaskBounds, Time};
pub use profile::{ResourceProfile, Segment};
pub use ttef::{allocate_widening, EnergyBudget, Participant};
pub use engine::{
    solve, solve_project, Mode, Outcome, PropLevel, SearchObserver, SolveResult, SolveStats, Solver,
    SolverConfig,
};
