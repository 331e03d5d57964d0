//! Adaptive mirror descent for non-smooth convex problems with functional
//! constraints, min f(x) s.t. g(x) ≤ 0 over a simple set X.
//!
//! * [`geometry`]: proximal setups (ball, box, entropy simplex) and the
//!   mirror step.
//! * [`oracles`]: first-order oracles, max-type constraints and the built-in
//!   test problems.
//! * [`md`]: the adaptive method and its fixed-step baseline.
//! * [`restart`]: restarts for strongly convex problems.
//! * [`duality`]: multiplier recovery and duality-gap certificates.
//! * [`report`]: CSV export.
//!
//! ```
//! use mdcon::{builtin, solve_md};
//!
//! let p = builtin("p1_linear_ball").unwrap();
//! let r = solve_md(&p, &p.setup, 0.1, p.theta0_sq, None).unwrap();
//! assert!(p.f(&r.x_bar) - p.known_opt.as_ref().unwrap().value <= 0.1);
//! ```

pub mod duality;
pub mod error;
pub mod geometry;
pub mod md;
pub mod oracles;
pub mod report;
pub mod restart;

pub use duality::{
    dual_value, duality_gap, recover_multipliers, DualCertificate, DualEstimate, DualMultipliers,
    InnerSolver,
};
pub use error::{Error, Result};
pub use geometry::{
    bregman, dual_norm, mirror_step, omega_bound, rescale, DualVector, GeometrySpec,
    MirrorGeometry, Point, ProximalSetup, RescaledSetup, SetupKind,
};
pub use md::{
    baseline_fixed_md, solve_md, solve_md_with, IterationRecord, MdOptions, MdResult, StepClass,
    StepRule, Termination,
};
pub use oracles::{
    builtin, builtin_problems, CallCounter, CallCounts, FirstOrderOracle, KnownOptimum,
    MaxConstraint, ProblemDescription, ProblemInstance, Term,
};
pub use restart::{
    check_lemma2, solve_restart, solve_restart_with, RestartOptions, RestartReport,
    RestartSchedule, RestartVariant, StageReport,
};
