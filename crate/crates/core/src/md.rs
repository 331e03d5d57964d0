//! Mirror descent with adaptive stepsizes for min f(x) s.t. g(x) ≤ 0.
//!
//! At iterate xⁱ the constraint is checked first. If g(xⁱ) ≤ ε the step is
//! *productive* and follows a subgradient of f; otherwise it is
//! *non-productive* and follows a subgradient of g. Either way
//! Mᵢ = ‖∇‖*, hᵢ = ε/Mᵢ² and xⁱ⁺¹ = Mirr_{xⁱ}(hᵢ∇). The run stops once
//! Σ 1/Mⱼ² ≥ 2Θ²/ε², and the answer is the hᵢ-weighted average of the
//! productive iterates, which satisfies f(x̄) − f* ≤ ε and g(x̄) ≤ ε.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{MirrorGeometry, Point};
use crate::oracles::{CallCounter, CallCounts, ProblemInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepClass {
    Productive,
    NonProductive,
}

impl StepClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StepClass::Productive => "productive",
            StepClass::NonProductive => "non_productive",
        }
    }
}

/// One iteration of the method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: usize,
    pub point: Point,
    pub step_class: StepClass,
    /// Mᵢ, the dual norm used for the stepsize.
    pub m_i: f64,
    pub h_i: f64,
    pub g_value: f64,
    /// f(xⁱ) on productive steps, g(xⁱ) on non-productive ones.
    pub phi_value: f64,
    /// Part of the max constraint attaining g(xⁱ); set on non-productive steps.
    pub active_index: Option<usize>,
    /// Σ_{j ≤ i} 1/Mⱼ².
    pub cum_inv_m_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum StepRule {
    /// Mᵢ = ‖∇‖* at the current point.
    Adaptive,
    /// Mᵢ = L for every step (global-Lipschitz baseline).
    Fixed { lipschitz: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StoppingRule,
    /// A productive step met a zero subgradient of f: the iterate is
    /// ε-feasible and minimizes f over the set, so it is returned as is.
    StationaryPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdOptions {
    pub eps: f64,
    pub theta_sq: f64,
    /// Defaults to 50·⌈2L²Θ²/ε²⌉ with L the problem's Lipschitz hint, else 10⁷.
    pub max_iters: Option<usize>,
    pub step_rule: StepRule,
    /// Reject Θ² < d(x*) when the problem carries a reference optimum.
    pub check_theta: bool,
}

impl MdOptions {
    pub fn new(eps: f64, theta_sq: f64) -> Self {
        Self {
            eps,
            theta_sq,
            max_iters: None,
            step_rule: StepRule::Adaptive,
            check_theta: true,
        }
    }
}

/// Trace and state at the point a run gave up.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialRun {
    pub trace: Vec<IterationRecord>,
    pub last_point: Point,
    pub sum_inv_m_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdResult {
    pub x_bar: Point,
    /// xᴺ, the iterate after the last step.
    pub final_iterate: Point,
    pub n_calls: usize,
    pub productive: Vec<usize>,
    pub nonproductive: Vec<usize>,
    pub trace: Vec<IterationRecord>,
    pub sum_inv_m_sq: f64,
    /// M with N/M² = Σ 1/Mᵢ².
    pub effective_m: f64,
    /// sqrt(2Θ²/Σ 1/Mᵢ²) ≤ ε, the accuracy this trace certifies.
    pub certified_eps: f64,
    pub eps: f64,
    pub theta_sq: f64,
    pub step_rule: StepRule,
    pub termination: Termination,
    pub calls: CallCounts,
}

impl MdResult {
    /// ⌈2M²Θ²/ε²⌉ with M the effective constant; equals `n_calls` up to
    /// the overshoot of the final step.
    pub fn theorem_calls(&self) -> u64 {
        (2.0 * self.effective_m.powi(2) * self.theta_sq / (self.eps * self.eps)).ceil() as u64
    }

    pub fn max_m(&self) -> f64 {
        self.trace.iter().map(|r| r.m_i).fold(0.0, f64::max)
    }

    pub fn productive_mass(&self) -> f64 {
        self.productive.iter().map(|&i| self.trace[i].h_i).sum()
    }
}

/// Default iteration cap for a run at accuracy `eps` with budget `theta_sq`.
pub fn default_max_iters(problem: &ProblemInstance, eps: f64, theta_sq: f64) -> usize {
    match problem.lipschitz_hint() {
        Some(l) if l > 0.0 => {
            let n = (2.0 * l * l * theta_sq / (eps * eps)).ceil();
            (50.0 * n).clamp(100.0, 1e9) as usize
        }
        _ => 10_000_000,
    }
}

/// Runs adaptive mirror descent from the geometry's start point.
pub fn solve_md<G: MirrorGeometry>(
    problem: &ProblemInstance,
    geometry: &G,
    eps: f64,
    theta_sq: f64,
    max_iters: Option<usize>,
) -> Result<MdResult> {
    solve_md_with(
        problem,
        geometry,
        &MdOptions {
            max_iters,
            ..MdOptions::new(eps, theta_sq)
        },
    )
}

/// Fixed-step baseline: hᵢ = ε/L² and stop after ⌈2L²Θ₀²/ε²⌉ steps, with L
/// the problem's Lipschitz hint.
pub fn baseline_fixed_md<G: MirrorGeometry>(
    problem: &ProblemInstance,
    eps: f64,
    geometry: &G,
) -> Result<MdResult> {
    let lipschitz = problem
        .lipschitz_hint()
        .ok_or_else(|| Error::MissingLipschitz(format!("{} has no Lipschitz hint", problem.id)))?;
    solve_md_with(
        problem,
        geometry,
        &MdOptions {
            step_rule: StepRule::Fixed { lipschitz },
            ..MdOptions::new(eps, problem.theta0_sq)
        },
    )
}

pub fn solve_md_with<G: MirrorGeometry>(
    problem: &ProblemInstance,
    geometry: &G,
    opts: &MdOptions,
) -> Result<MdResult> {
    let eps = opts.eps;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    if !(opts.theta_sq.is_finite() && opts.theta_sq >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "theta_sq must be nonnegative, got {}",
            opts.theta_sq
        )));
    }
    if let StepRule::Fixed { lipschitz } = opts.step_rule {
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "fixed-step Lipschitz constant must be positive, got {lipschitz}"
            )));
        }
    }
    check_dim(problem.dim(), geometry.dim())?;
    if opts.check_theta {
        if let Some(k) = &problem.known_opt {
            let d = geometry.dgf(&k.point);
            if d > opts.theta_sq + 1e-9 + k.resolution.min(1e-6) {
                return Err(Error::InvalidInput(format!(
                    "theta_sq = {} is below d(x*) = {d}",
                    opts.theta_sq
                )));
            }
        }
    }
    let max_iters = opts
        .max_iters
        .unwrap_or_else(|| default_max_iters(problem, eps, opts.theta_sq));
    let threshold = 2.0 * opts.theta_sq / (eps * eps);

    let counter = CallCounter::new();
    let mut x = geometry.start_point();
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut sum_inv = 0.0;
    let mut termination = Termination::StoppingRule;

    loop {
        let i = trace.len();
        if i >= max_iters {
            return Err(Error::BudgetExhausted {
                max_iters,
                partial: Box::new(PartialRun {
                    trace,
                    last_point: x,
                    sum_inv_m_sq: sum_inv,
                }),
            });
        }
        let (g_value, g_grad, active) = problem.eval_constraint(&x, &counter)?;
        let (step_class, phi_value, grad, active_index) = if g_value <= eps {
            let (f_value, f_grad) = problem.eval_objective(&x, &counter)?;
            (StepClass::Productive, f_value, f_grad, None)
        } else {
            (StepClass::NonProductive, g_value, g_grad, Some(active))
        };
        let grad_norm = geometry.dual_norm(&grad);
        if grad_norm == 0.0 {
            if step_class == StepClass::NonProductive {
                return Err(Error::InfeasibleAtTolerance { iteration: i, g_value });
            }
            trace.push(IterationRecord {
                index: i,
                point: x.clone(),
                step_class,
                m_i: 0.0,
                h_i: 0.0,
                g_value,
                phi_value,
                active_index,
                cum_inv_m_sq: sum_inv,
            });
            termination = Termination::StationaryPoint;
            break;
        }
        let m_i = match opts.step_rule {
            StepRule::Adaptive => grad_norm,
            StepRule::Fixed { lipschitz } => lipschitz,
        };
        let h_i = eps / (m_i * m_i);
        let scaled: Vec<f64> = grad.iter().map(|v| h_i * v).collect();
        let next = Point::new(geometry.mirror_step(&x, &scaled))?;
        sum_inv += 1.0 / (m_i * m_i);
        trace.push(IterationRecord {
            index: i,
            point: x,
            step_class,
            m_i,
            h_i,
            g_value,
            phi_value,
            active_index,
            cum_inv_m_sq: sum_inv,
        });
        x = next;
        if sum_inv >= threshold {
            break;
        }
    }

    let n_calls = trace.len();
    let (productive, nonproductive): (Vec<usize>, Vec<usize>) = (0..n_calls)
        .partition(|&i| trace[i].step_class == StepClass::Productive);
    let x_bar = match termination {
        Termination::StationaryPoint => x.clone(),
        Termination::StoppingRule => primal_average(&trace)?,
    };
    let (effective_m, certified_eps) = if sum_inv > 0.0 {
        (
            (n_calls as f64 / sum_inv).sqrt(),
            (2.0 * opts.theta_sq / sum_inv).sqrt(),
        )
    } else {
        (0.0, eps)
    };
    let certified_eps = match termination {
        Termination::StationaryPoint => eps,
        Termination::StoppingRule => certified_eps,
    };
    Ok(MdResult {
        x_bar,
        final_iterate: x,
        n_calls,
        productive,
        nonproductive,
        trace,
        sum_inv_m_sq: sum_inv,
        effective_m,
        certified_eps,
        eps,
        theta_sq: opts.theta_sq,
        step_rule: opts.step_rule,
        termination,
        calls: counter.snapshot(),
    })
}

/// x̄ = Σ_{i∈I} hᵢxⁱ / Σ_{i∈I} hᵢ over the productive records of `trace`.
pub fn primal_average(trace: &[IterationRecord]) -> Result<Point> {
    let mut mass = 0.0;
    let mut acc: Vec<f64> = Vec::new();
    for r in trace
        .iter()
        .filter(|r| r.step_class == StepClass::Productive && r.h_i > 0.0)
    {
        if acc.is_empty() {
            acc = vec![0.0; r.point.dim()];
        }
        check_dim(acc.len(), r.point.dim())?;
        mass += r.h_i;
        acc.iter_mut()
            .zip(r.point.iter())
            .for_each(|(a, p)| *a += r.h_i * p);
    }
    if mass == 0.0 {
        return Err(Error::EmptyProductiveSet);
    }
    Point::new(acc.into_iter().map(|a| a / mass).collect())
}

/// Tolerance for [`check_lemma1_step`].
pub const LEMMA1_TOL: f64 = 1e-7;

/// Checks the one-step mirror descent inequality
/// hᵢ(φ(xⁱ) − φ(ref)) ≤ hᵢ²Mᵢ²/2 + V(xⁱ, ref) − V(xⁱ⁺¹, ref),
/// where φ is the function whose subgradient drove the step and
/// `phi_ref` = φ(ref).
pub fn check_lemma1_step<G: MirrorGeometry>(
    record: &IterationRecord,
    next_point: &[f64],
    reference: &[f64],
    phi_ref: f64,
    geometry: &G,
) -> Result<bool> {
    check_dim(geometry.dim(), next_point.len())?;
    check_dim(geometry.dim(), reference.len())?;
    let h = record.h_i;
    let lhs = h * (record.phi_value - phi_ref);
    let rhs = 0.5 * h * h * record.m_i * record.m_i + geometry.bregman(&record.point, reference)?
        - geometry.bregman(next_point, reference)?;
    Ok(lhs <= rhs + LEMMA1_TOL)
}

/// Indices of steps in `result` that violate [`check_lemma1_step`] against `reference`.
pub fn lemma1_violations<G: MirrorGeometry>(
    result: &MdResult,
    problem: &ProblemInstance,
    geometry: &G,
    reference: &[f64],
) -> Result<Vec<usize>> {
    let f_ref = problem.f(reference);
    let g_ref = problem.g(reference);
    let mut bad = Vec::new();
    for (i, rec) in result.trace.iter().enumerate() {
        if rec.h_i == 0.0 {
            continue;
        }
        let next = result
            .trace
            .get(i + 1)
            .map(|r| &r.point)
            .unwrap_or(&result.final_iterate);
        let phi_ref = match rec.step_class {
            StepClass::Productive => f_ref,
            StepClass::NonProductive => g_ref,
        };
        if !check_lemma1_step(rec, next, reference, phi_ref, geometry)? {
            bad.push(i);
        }
    }
    Ok(bad)
}
