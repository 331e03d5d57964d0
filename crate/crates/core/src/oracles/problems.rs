//! Problem instances and the built-in desk-scale test set.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{grid_minimize, GridOptions};
use super::{evaluate, max_eval, CallCounter, Composite, FirstOrderOracle, MaxConstraint, Term};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{DualVector, MirrorGeometry, Point, ProximalSetup};

/// Reference solution. `resolution` bounds how far `value` may sit above the
/// true optimal value (0 for analytic optima).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownOptimum {
    pub point: Point,
    pub value: f64,
    #[serde(default)]
    pub resolution: f64,
}

/// Declarative problem description, loadable from JSON.
///
/// ```json
/// {"id": "tiny", "geometry": {"geometry": "euclidean_ball", "radius": 1.0, "dim": 2},
///  "objective": [{"type": "linear", "a": [1, 1]}],
///  "constraints": [[{"type": "linear", "a": [-1, 0]}]]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDescription {
    pub id: String,
    pub geometry: ProximalSetup,
    pub objective: Vec<Term>,
    /// Parts g_m of g = max_m g_m; empty means g ≡ −1.
    #[serde(default)]
    pub constraints: Vec<Vec<Term>>,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub theta0_sq: Option<f64>,
    #[serde(default)]
    pub r0_sq: Option<f64>,
    #[serde(default)]
    pub known_opt: Option<KnownOptimum>,
    #[serde(default)]
    pub slater_point: Option<Point>,
}

/// min f(x) over the feasible set subject to g(x) ≤ 0.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub id: String,
    pub objective: Arc<dyn FirstOrderOracle>,
    pub constraint: MaxConstraint,
    pub setup: ProximalSetup,
    /// Θ₀² with d(x*) ≤ Θ₀².
    pub theta0_sq: f64,
    /// R₀² with ‖x₀ − x*‖² ≤ R₀², for restarts.
    pub r0_sq: Option<f64>,
    /// Common strong-convexity modulus of f and g (0 if merely convex).
    pub mu: f64,
    pub known_opt: Option<KnownOptimum>,
    pub slater_point: Option<Point>,
    description: Option<ProblemDescription>,
}

impl ProblemInstance {
    /// Builds an instance; when no optimum is supplied and the problem has at
    /// most three free coordinates, one is computed by refined grid search.
    pub fn from_description(desc: ProblemDescription) -> Result<Self> {
        let setup = desc.geometry.clone();
        let n = setup.dim();
        let objective = Composite::new(n, desc.objective.clone())?.bounded_over(&setup);
        let constraint = if desc.constraints.is_empty() {
            MaxConstraint::single(Arc::new(Composite::constant(n, -1.0)?.bounded_over(&setup)))
        } else {
            let parts = desc
                .constraints
                .iter()
                .map(|terms| {
                    Composite::new(n, terms.clone())
                        .map(|c| Arc::new(c.bounded_over(&setup)) as Arc<dyn FirstOrderOracle>)
                })
                .collect::<Result<Vec<_>>>()?;
            MaxConstraint::new(parts)?
        };
        if desc.mu < 0.0 || !desc.mu.is_finite() {
            return Err(Error::InvalidInput(format!("mu must be >= 0, got {}", desc.mu)));
        }
        let theta0_sq = desc.theta0_sq.unwrap_or_else(|| setup.default_theta0_sq());
        let known_opt = match desc.known_opt.clone() {
            Some(k) => {
                check_dim(n, k.point.dim())?;
                Some(k)
            }
            None => grid_optimum(&setup, objective.clone(), &constraint)?,
        };
        if let Some(p) = &desc.slater_point {
            check_dim(n, p.dim())?;
            if !(setup.contains(p, 1e-12) && constraint.value(p) < 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{}: recorded Slater point is not strictly feasible",
                    desc.id
                )));
            }
        }
        let inst = Self {
            id: desc.id.clone(),
            objective: Arc::new(objective),
            constraint,
            setup,
            theta0_sq,
            r0_sq: desc.r0_sq,
            mu: desc.mu,
            known_opt,
            slater_point: desc.slater_point.clone(),
            description: Some(desc),
        };
        inst.check_bounds()?;
        Ok(inst)
    }

    /// Wraps arbitrary oracles. No reference optimum is attached.
    pub fn from_oracles(
        id: impl Into<String>,
        objective: Arc<dyn FirstOrderOracle>,
        constraint: MaxConstraint,
        setup: ProximalSetup,
        theta0_sq: f64,
    ) -> Self {
        Self {
            id: id.into(),
            objective,
            constraint,
            setup,
            theta0_sq,
            r0_sq: None,
            mu: 0.0,
            known_opt: None,
            slater_point: None,
            description: None,
        }
    }

    fn check_bounds(&self) -> Result<()> {
        let Some(k) = &self.known_opt else {
            return Ok(());
        };
        // Grid optima are only accurate to the grid cell, so allow that much slack.
        let slack = 1e-9 + if k.resolution > 0.0 { 1e-6 } else { 0.0 };
        let d = self.setup.dgf(&k.point);
        if d > self.theta0_sq + slack {
            return Err(Error::InvalidInput(format!(
                "{}: d(x*) = {d} exceeds theta0_sq = {}",
                self.id, self.theta0_sq
            )));
        }
        if let Some(r0_sq) = self.r0_sq {
            let x0 = self.setup.dgf_minimizer();
            let diff: Vec<f64> = x0.iter().zip(k.point.iter()).map(|(a, b)| a - b).collect();
            let dist = self.setup.norm(&diff);
            if dist * dist > r0_sq + slack {
                return Err(Error::InvalidInput(format!(
                    "{}: |x0 - x*|^2 = {} exceeds r0_sq = {r0_sq}",
                    self.id,
                    dist * dist
                )));
            }
        }
        Ok(())
    }

    pub fn description(&self) -> Option<&ProblemDescription> {
        self.description.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.setup.dim()
    }

    /// Same functions over a different feasible set. Θ₀², R₀² and the
    /// reference optimum are recomputed or dropped since they depend on it.
    pub fn with_setup(&self, setup: ProximalSetup) -> Result<Self> {
        let mut desc = self.description.clone().ok_or_else(|| {
            Error::InvalidInput(format!("{}: instance has no declarative description", self.id))
        })?;
        check_dim(desc.geometry.dim(), setup.dim())?;
        desc.geometry = setup;
        desc.theta0_sq = None;
        desc.r0_sq = None;
        desc.known_opt = None;
        desc.slater_point = desc
            .slater_point
            .filter(|p| desc.geometry.contains(p, 1e-12));
        Self::from_description(desc)
    }

    /// max(L_f, L_g) when both hints are known.
    pub fn lipschitz_hint(&self) -> Option<f64> {
        Some(self.objective.lipschitz_hint()?.max(self.constraint.lipschitz_hint()?))
    }

    fn check_domain(&self, x: &Point) -> Result<()> {
        check_dim(self.dim(), x.dim())?;
        if !self.setup.contains(x, 1e-9) {
            return Err(Error::Domain(format!("{}: point outside the feasible set", self.id)));
        }
        Ok(())
    }

    /// Objective value and subgradient; counts one objective call.
    pub fn eval_objective(&self, x: &Point, counter: &CallCounter) -> Result<(f64, DualVector)> {
        self.check_domain(x)?;
        evaluate(self.objective.as_ref(), x, counter)
    }

    /// Constraint value, subgradient and active part; counts one constraint call.
    pub fn eval_constraint(
        &self,
        x: &Point,
        counter: &CallCounter,
    ) -> Result<(f64, DualVector, usize)> {
        self.check_domain(x)?;
        max_eval(&self.constraint, x, counter)
    }

    pub fn f(&self, x: &[f64]) -> f64 {
        self.objective.value(x)
    }

    pub fn g(&self, x: &[f64]) -> f64 {
        self.constraint.value(x)
    }
}

fn grid_optimum(
    setup: &ProximalSetup,
    objective: Composite,
    constraint: &MaxConstraint,
) -> Result<Option<KnownOptimum>> {
    let free = match setup.kind() {
        crate::geometry::SetupKind::EntropySimplex => setup.dim() - 1,
        _ => setup.dim(),
    };
    if free > 3 {
        return Ok(None);
    }
    let lipschitz = objective.lipschitz_hint().unwrap_or(f64::INFINITY);
    let found = grid_minimize(setup, GridOptions::default(), |x| {
        (constraint.value(x) <= 0.0).then(|| objective.value(x))
    })?;
    Ok(found.map(|m| KnownOptimum {
        point: Point::from_vec_unchecked(m.point),
        value: m.value,
        resolution: lipschitz * m.covering_radius,
    }))
}

pub const P1_LINEAR_BALL: &str = "p1_linear_ball";
pub const P1_UNCONSTRAINED_BALL: &str = "p1_unconstrained_ball";
pub const P2_MAXLIN_BOX: &str = "p2_maxlin_box";
pub const P3_STRONGLY_CONVEX: &str = "p3_strongly_convex";
pub const P4_ENTROPY_SIMPLEX: &str = "p4_entropy_simplex";

pub const BUILTIN_IDS: [&str; 5] = [
    P1_LINEAR_BALL,
    P1_UNCONSTRAINED_BALL,
    P2_MAXLIN_BOX,
    P3_STRONGLY_CONVEX,
    P4_ENTROPY_SIMPLEX,
];

fn lin(a: &[f64], b: f64) -> Term {
    Term::Linear { a: a.to_vec(), b }
}

fn pt(v: &[f64]) -> Option<Point> {
    Some(Point::from_vec_unchecked(v.to_vec()))
}

/// min x₁ + x₂ over the unit disc subject to x₁ ≥ 0; x* = (0, −1).
pub fn p1_linear_ball() -> ProblemDescription {
    ProblemDescription {
        id: P1_LINEAR_BALL.into(),
        geometry: ProximalSetup::euclidean_ball(2, 1.0).expect("valid ball"),
        objective: vec![lin(&[1.0, 1.0], 0.0)],
        constraints: vec![vec![lin(&[-1.0, 0.0], 0.0)]],
        mu: 0.0,
        theta0_sq: None,
        r0_sq: None,
        known_opt: Some(KnownOptimum {
            point: Point::from_vec_unchecked(vec![0.0, -1.0]),
            value: -1.0,
            resolution: 0.0,
        }),
        slater_point: pt(&[0.5, 0.0]),
    }
}

/// P1 with g ≡ −1; x* = −(1, 1)/√2.
pub fn p1_unconstrained_ball() -> ProblemDescription {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ProblemDescription {
        id: P1_UNCONSTRAINED_BALL.into(),
        constraints: vec![vec![Term::Constant { value: -1.0 }]],
        known_opt: Some(KnownOptimum {
            point: Point::from_vec_unchecked(vec![-s, -s]),
            value: -2f64.sqrt(),
            resolution: 0.0,
        }),
        slater_point: pt(&[0.0, 0.0]),
        ..p1_linear_ball()
    }
}

/// Piecewise-linear objective with a three-part max constraint on [−1, 1]².
/// The LP optimum is x* = (0.11, −0.01), f* = −0.105 with multipliers
/// λ* = (0.55, 0, 0).
pub fn p2_maxlin_box() -> ProblemDescription {
    ProblemDescription {
        id: P2_MAXLIN_BOX.into(),
        geometry: ProximalSetup::boxed(vec![-1.0; 2], vec![1.0; 2]).expect("valid box"),
        objective: vec![Term::MaxAffine {
            rows: vec![vec![-1.0, -0.5], vec![0.8, -0.7], vec![-0.3, 1.0]],
            offsets: vec![0.0, -0.2, -0.1],
        }],
        constraints: vec![
            vec![lin(&[1.0, 1.0], -0.1)],
            vec![lin(&[-1.0, 0.6], -0.3)],
            vec![lin(&[0.5, -1.0], -0.2)],
        ],
        mu: 0.0,
        theta0_sq: None,
        r0_sq: None,
        known_opt: Some(KnownOptimum {
            point: Point::from_vec_unchecked(vec![0.11, -0.01]),
            value: -0.105,
            resolution: 0.0,
        }),
        slater_point: pt(&[0.0, 0.0]),
    }
}

/// f(x) = ‖x − c‖² + ‖x‖₁, g(x) = ‖x‖² − r² on the disc of radius 2; both
/// 2-strongly convex. With ‖x*‖ ≤ r, R₀² = r².
pub fn p3_strongly_convex_with(center: [f64; 2], r: f64) -> ProblemDescription {
    ProblemDescription {
        id: P3_STRONGLY_CONVEX.into(),
        geometry: ProximalSetup::euclidean_ball(2, 2.0).expect("valid ball"),
        objective: vec![
            Term::Quadratic {
                coef: 1.0,
                center: center.to_vec(),
                offset: 0.0,
            },
            Term::L1 { coef: 1.0 },
        ],
        constraints: vec![vec![Term::Quadratic {
            coef: 1.0,
            center: vec![0.0, 0.0],
            offset: -r * r,
        }]],
        mu: 2.0,
        theta0_sq: None,
        r0_sq: Some(r * r),
        known_opt: None,
        slater_point: pt(&[0.0, 0.0]),
    }
}

/// r = 1 and c = 2x* + (½, ½) with x* = (2, 1)/√5: the constraint is active
/// with multiplier 1, so ∇f(x*) = −∇g(x*) and f* = 1.5 + 6/√5.
pub fn p3_strongly_convex() -> ProblemDescription {
    let s5 = 5f64.sqrt();
    let x_star = [2.0 / s5, 1.0 / s5];
    ProblemDescription {
        known_opt: Some(KnownOptimum {
            point: Point::from_vec_unchecked(x_star.to_vec()),
            value: 1.5 + 6.0 / s5,
            resolution: 0.0,
        }),
        ..p3_strongly_convex_with([2.0 * x_star[0] + 0.5, 2.0 * x_star[1] + 0.5], 1.0)
    }
}

/// min ⟨(1, 0.2, 0.6), x⟩ over the 3-simplex subject to x₂ ≤ 0.4;
/// x* = (0, 0.4, 0.6), f* = 0.44.
pub fn p4_entropy_simplex() -> ProblemDescription {
    ProblemDescription {
        id: P4_ENTROPY_SIMPLEX.into(),
        geometry: ProximalSetup::entropy_simplex(3).expect("valid simplex"),
        objective: vec![lin(&[1.0, 0.2, 0.6], 0.0)],
        constraints: vec![vec![lin(&[0.0, 1.0, 0.0], -0.4)]],
        mu: 0.0,
        theta0_sq: None,
        r0_sq: None,
        known_opt: Some(KnownOptimum {
            point: Point::from_vec_unchecked(vec![0.0, 0.4, 0.6]),
            value: 0.44,
            resolution: 0.0,
        }),
        slater_point: pt(&[1.0 / 3.0; 3]),
    }
}

/// Looks up a built-in problem by id.
pub fn builtin(id: &str) -> Option<ProblemInstance> {
    let desc = match id {
        P1_LINEAR_BALL => p1_linear_ball(),
        P1_UNCONSTRAINED_BALL => p1_unconstrained_ball(),
        P2_MAXLIN_BOX => p2_maxlin_box(),
        P3_STRONGLY_CONVEX => p3_strongly_convex(),
        P4_ENTROPY_SIMPLEX => p4_entropy_simplex(),
        _ => return None,
    };
    Some(ProblemInstance::from_description(desc).expect("built-in problems are valid"))
}

pub fn builtin_problems() -> Vec<ProblemInstance> {
    BUILTIN_IDS
        .iter()
        .map(|id| builtin(id).expect("listed id"))
        .collect()
}
