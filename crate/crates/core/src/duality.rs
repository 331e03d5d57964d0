//! Lagrange multipliers recovered from a mirror descent trace when
//! g = max_m g_m, and the resulting duality-gap certificate.
//!
//! λ̄_m is the stepsize mass of non-productive steps whose active part was m,
//! divided by the total productive stepsize mass. With φ(λ) the Lagrangian
//! dual function, f(x̄) − φ(λ̄) ≤ ε on every completed run.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, Point};
use crate::md::{solve_md_with, IterationRecord, MdOptions, MdResult, StepClass};
use crate::oracles::grid::{grid_minimize, GridOptions};
use crate::oracles::{FirstOrderOracle, MaxConstraint, ProblemInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualMultipliers {
    pub lambda_bar: Vec<f64>,
}

/// Multipliers from (step class, hᵢ, active index) triples in iteration order.
pub fn multipliers_from_steps<I>(steps: I, num_parts: usize) -> Result<DualMultipliers>
where
    I: IntoIterator<Item = (StepClass, f64, Option<usize>)>,
{
    let mut productive_mass = 0.0;
    let mut lambda = vec![0.0; num_parts];
    for (i, (class, h, active)) in steps.into_iter().enumerate() {
        match class {
            StepClass::Productive => productive_mass += h,
            StepClass::NonProductive => {
                let m = active.ok_or_else(|| {
                    Error::TraceCorrupted(format!("non-productive step {i} has no active index"))
                })?;
                let slot = lambda.get_mut(m).ok_or_else(|| {
                    Error::TraceCorrupted(format!(
                        "step {i} has active index {m} but the constraint has {num_parts} parts"
                    ))
                })?;
                *slot += h;
            }
        }
    }
    if productive_mass <= 0.0 {
        return Err(Error::EmptyProductiveSet);
    }
    lambda.iter_mut().for_each(|l| *l /= productive_mass);
    Ok(DualMultipliers { lambda_bar: lambda })
}

pub fn recover_multipliers(result: &MdResult, num_parts: usize) -> Result<DualMultipliers> {
    multipliers_from_trace(&result.trace, num_parts)
}

pub fn multipliers_from_trace(
    trace: &[IterationRecord],
    num_parts: usize,
) -> Result<DualMultipliers> {
    multipliers_from_steps(
        trace.iter().map(|r| (r.step_class, r.h_i, r.active_index)),
        num_parts,
    )
}

/// How φ(λ) = min_X {f + Σ λ_m g_m} is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerSolver {
    /// Refined grid search; needs at most three free coordinates.
    Grid(GridOptions),
    /// Mirror descent on the Lagrangian over X with no functional constraint.
    NestedMd { eps: f64, max_iters: Option<usize> },
}

impl InnerSolver {
    /// Grid search when the problem is small enough, nested MD at ε/10 otherwise.
    pub fn auto(problem: &ProblemInstance, eps: f64) -> Self {
        let free = match problem.setup.kind() {
            crate::geometry::SetupKind::EntropySimplex => problem.dim() - 1,
            _ => problem.dim(),
        };
        if free <= 3 {
            InnerSolver::Grid(GridOptions::default())
        } else {
            InnerSolver::NestedMd {
                eps: eps / 10.0,
                max_iters: None,
            }
        }
    }
}

/// φ(λ) up to `tolerance`: the true value lies in [value − tolerance, value].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualEstimate {
    pub value: f64,
    pub tolerance: f64,
    pub minimizer: Point,
}

/// f + Σ λ_m g_m as an oracle.
#[derive(Debug, Clone)]
pub struct Lagrangian {
    objective: Arc<dyn FirstOrderOracle>,
    parts: Vec<Arc<dyn FirstOrderOracle>>,
    lambda: Vec<f64>,
}

impl Lagrangian {
    pub fn new(problem: &ProblemInstance, lambda: &DualMultipliers) -> Result<Self> {
        let parts = problem.constraint.parts().to_vec();
        if parts.len() != lambda.lambda_bar.len() {
            return Err(Error::DimensionMismatch {
                expected: parts.len(),
                actual: lambda.lambda_bar.len(),
            });
        }
        if let Some(l) = lambda.lambda_bar.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::InvalidInput(format!("multipliers must be >= 0, got {l}")));
        }
        Ok(Self {
            objective: problem.objective.clone(),
            parts,
            lambda: lambda.lambda_bar.clone(),
        })
    }
}

impl FirstOrderOracle for Lagrangian {
    fn dim(&self) -> usize {
        self.objective.dim()
    }

    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (mut v, mut g) = self.objective.eval(x);
        for (part, &l) in self.parts.iter().zip(&self.lambda) {
            if l == 0.0 {
                continue;
            }
            let (pv, pg) = part.eval(x);
            v += l * pv;
            g.iter_mut().zip(pg).for_each(|(a, b)| *a += l * b);
        }
        (v, g)
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        let mut total = self.objective.lipschitz_hint()?;
        for (part, &l) in self.parts.iter().zip(&self.lambda) {
            if l > 0.0 {
                total += l * part.lipschitz_hint()?;
            }
        }
        Some(total)
    }

    fn strong_convexity(&self) -> f64 {
        self.objective.strong_convexity()
    }
}

pub fn dual_value(
    lambda: &DualMultipliers,
    problem: &ProblemInstance,
    inner: &InnerSolver,
) -> Result<DualEstimate> {
    let lagrangian = Lagrangian::new(problem, lambda)?;
    match inner {
        InnerSolver::Grid(opts) => {
            let lipschitz = lagrangian.lipschitz_hint().ok_or_else(|| {
                Error::MissingLipschitz("grid tolerance needs Lipschitz hints for f and every g_m".into())
            })?;
            let m = grid_minimize(&problem.setup, *opts, |x| Some(lagrangian.value(x)))?
                .ok_or_else(|| Error::InvalidInput("grid contains no feasible point".into()))?;
            Ok(DualEstimate {
                value: m.value,
                tolerance: lipschitz * m.covering_radius,
                minimizer: Point::new(m.point)?,
            })
        }
        InnerSolver::NestedMd { eps, max_iters } => nested_md(problem, lagrangian, *eps, *max_iters),
    }
}

/// Lower bound on min_X L from the stepsize-weighted average of the
/// linearizations L(xⁱ) + ⟨∇L(xⁱ), x − xⁱ⟩ along a trace.
fn linearization_lower_bound(
    problem: &ProblemInstance,
    lagrangian: &Lagrangian,
    trace: &[IterationRecord],
) -> f64 {
    let n = problem.dim();
    let mut mass = 0.0;
    let mut constant = 0.0;
    let mut slope = vec![0.0; n];
    for r in trace.iter().filter(|r| r.h_i > 0.0) {
        let (v, g) = lagrangian.eval(&r.point);
        mass += r.h_i;
        constant += r.h_i * (v - dot(&g, &r.point));
        slope.iter_mut().zip(&g).for_each(|(s, gi)| *s += r.h_i * gi);
    }
    if mass == 0.0 {
        return f64::NEG_INFINITY;
    }
    let (lin_min, _) = problem.setup.minimize_linear(&slope);
    (constant + lin_min) / mass
}

fn nested_md(
    problem: &ProblemInstance,
    lagrangian: Lagrangian,
    eps: f64,
    max_iters: Option<usize>,
) -> Result<DualEstimate> {
    let n = problem.dim();
    let unconstrained = MaxConstraint::single(Arc::new(
        crate::oracles::Composite::constant(n, -1.0)?.bounded_over(&problem.setup),
    ));
    let lagr = Arc::new(lagrangian);
    let inner_problem = ProblemInstance::from_oracles(
        format!("{}_lagrangian", problem.id),
        lagr.clone(),
        unconstrained,
        problem.setup.clone(),
        problem.theta0_sq,
    );
    let opts = MdOptions {
        max_iters,
        check_theta: false,
        ..MdOptions::new(eps, problem.theta0_sq)
    };
    match solve_md_with(&inner_problem, &problem.setup, &opts) {
        Ok(r) => {
            let value = lagr.value(&r.x_bar);
            let lower = linearization_lower_bound(problem, &lagr, &r.trace);
            Ok(DualEstimate {
                value,
                tolerance: (value - lower).max(0.0).min(r.certified_eps),
                minimizer: r.x_bar,
            })
        }
        Err(Error::BudgetExhausted { partial, .. }) => Err(Error::InnerBudgetExhausted {
            lower_estimate: linearization_lower_bound(problem, &lagr, &partial.trace),
        }),
        Err(e) => Err(e),
    }
}

/// Primal-dual certificate for a run against a max-form constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub lambda_bar: Vec<f64>,
    pub x_bar: Point,
    pub primal_value: f64,
    pub dual_value: f64,
    /// primal_value − dual_value; may be slightly negative within the inner tolerance.
    pub gap: f64,
    pub inner_tolerance: f64,
    pub dual_minimizer: Point,
    pub slater_point: Option<Point>,
}

impl DualCertificate {
    /// Re-evaluates the primal value at `x_bar` and the Lagrangian at the
    /// stored dual minimizer; both must reproduce the certificate. The gap
    /// may be negative only as far as x̄'s constraint violation and the inner
    /// tolerance allow: φ(λ) ≤ f(x̄) + Σλ_m g_m(x̄).
    pub fn verify(&self, problem: &ProblemInstance) -> Result<bool> {
        let lagrangian = Lagrangian::new(
            problem,
            &DualMultipliers {
                lambda_bar: self.lambda_bar.clone(),
            },
        )?;
        let primal_ok = problem.f(&self.x_bar) == self.primal_value;
        let dual_ok = lagrangian.value(&self.dual_minimizer) == self.dual_value;
        let violation = problem.g(&self.x_bar).max(0.0);
        let mass: f64 = self.lambda_bar.iter().sum();
        let weak_ok = self.gap >= -self.inner_tolerance - mass * violation - 1e-12;
        Ok(primal_ok && dual_ok && weak_ok && (self.primal_value - self.dual_value) == self.gap)
    }
}

pub fn duality_gap(
    result: &MdResult,
    lambda: &DualMultipliers,
    problem: &ProblemInstance,
    inner: &InnerSolver,
) -> Result<DualCertificate> {
    let estimate = dual_value(lambda, problem, inner)?;
    let primal_value = problem.f(&result.x_bar);
    Ok(DualCertificate {
        lambda_bar: lambda.lambda_bar.clone(),
        x_bar: result.x_bar.clone(),
        primal_value,
        dual_value: estimate.value,
        gap: primal_value - estimate.value,
        inner_tolerance: estimate.tolerance,
        dual_minimizer: estimate.minimizer,
        slater_point: problem.slater_point.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::builtin;
    use crate::oracles::problems::{P1_LINEAR_BALL, P2_MAXLIN_BOX};

    fn step(class: StepClass, h: f64, m: Option<usize>) -> (StepClass, f64, Option<usize>) {
        (class, h, m)
    }

    #[test]
    fn multiplier_examples() {
        let none = multipliers_from_steps([step(StepClass::Productive, 0.1, None)], 3).unwrap();
        assert_eq!(none.lambda_bar, vec![0.0; 3]);

        let one = multipliers_from_steps(
            [
                step(StepClass::Productive, 0.1, None),
                step(StepClass::NonProductive, 0.2, Some(1)),
            ],
            2,
        )
        .unwrap();
        assert_eq!(one.lambda_bar, vec![0.0, 2.0]);

        let mut steps = vec![step(StepClass::Productive, 0.05, None); 8];
        steps.extend([step(StepClass::NonProductive, 0.05, Some(0)); 2]);
        let counts = multipliers_from_steps(steps, 3).unwrap();
        assert!((counts.lambda_bar[0] - 0.25).abs() < 1e-15);
        assert_eq!(&counts.lambda_bar[1..], &[0.0, 0.0]);
    }

    #[test]
    fn corrupted_traces_are_rejected() {
        let missing = multipliers_from_steps(
            [step(StepClass::Productive, 0.1, None), step(StepClass::NonProductive, 0.1, None)],
            1,
        );
        assert!(matches!(missing, Err(Error::TraceCorrupted(_))));
        let out_of_range = multipliers_from_steps(
            [step(StepClass::Productive, 0.1, None), step(StepClass::NonProductive, 0.1, Some(4))],
            2,
        );
        assert!(matches!(out_of_range, Err(Error::TraceCorrupted(_))));
        let empty = multipliers_from_steps([step(StepClass::NonProductive, 0.1, Some(0))], 1);
        assert!(matches!(empty, Err(Error::EmptyProductiveSet)));
    }

    #[test]
    fn dual_value_at_zero_is_min_of_f() {
        let p = builtin(P1_LINEAR_BALL).unwrap();
        let est = dual_value(&DualMultipliers { lambda_bar: vec![0.0] }, &p, &InnerSolver::Grid(GridOptions::default())).unwrap();
        assert!((est.value + 2f64.sqrt()).abs() <= est.tolerance + 1e-12);
    }

    #[test]
    fn dual_value_p1_closed_form() {
        // min over the unit disc of x1 + x2 - l x1 = -|(1 - l, 1)|
        let p = builtin(P1_LINEAR_BALL).unwrap();
        for l in [0.0, 0.5, 1.0, 1.7, 3.0] {
            let lam = DualMultipliers { lambda_bar: vec![l] };
            let est = dual_value(&lam, &p, &InnerSolver::Grid(GridOptions::default())).unwrap();
            let exact = -((1.0 - l) * (1.0f64 - l) + 1.0).sqrt();
            assert!(est.value >= exact - 1e-12 && est.value - exact <= est.tolerance + 1e-12, "l={l}");
            assert!(est.value <= -1.0 + est.tolerance + 1e-12);
        }
    }

    #[test]
    fn nested_md_agrees_with_grid() {
        let p = builtin(P2_MAXLIN_BOX).unwrap();
        let lam = DualMultipliers { lambda_bar: vec![0.55, 0.0, 0.1] };
        let grid = dual_value(&lam, &p, &InnerSolver::Grid(GridOptions::default())).unwrap();
        let md = dual_value(&lam, &p, &InnerSolver::NestedMd { eps: 0.005, max_iters: None }).unwrap();
        assert!(md.tolerance <= 0.005 + 1e-12);
        assert!(md.value - md.tolerance <= grid.value + 1e-9);
        assert!(grid.value - grid.tolerance <= md.value + 1e-9);
    }

    #[test]
    fn nested_md_budget_reports_lower_estimate() {
        let p = builtin(P2_MAXLIN_BOX).unwrap();
        let lam = DualMultipliers { lambda_bar: vec![0.55, 0.0, 0.0] };
        let err = dual_value(&lam, &p, &InnerSolver::NestedMd { eps: 0.001, max_iters: Some(50) }).unwrap_err();
        match err {
            Error::InnerBudgetExhausted { lower_estimate } => assert!(lower_estimate <= -0.105 + 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_multipliers_are_rejected() {
        let p = builtin(P1_LINEAR_BALL).unwrap();
        let bad = DualMultipliers { lambda_bar: vec![-0.1] };
        assert!(dual_value(&bad, &p, &InnerSolver::Grid(GridOptions::default())).is_err());
    }
}
