//! Restarting mirror descent for μ-strongly convex f and g.
//!
//! Stage k runs [`solve_md`](crate::md::solve_md) at accuracy εₖ = μRₖ²/2 from
//! the previous stage's output, with Rₖ² = R₀²·2⁻ᵏ. Strong convexity turns
//! an εₖ-solution into the distance bound ‖xₖ − x*‖² ≤ Rₖ², which is what
//! lets the next stage start with a budget of order Rₖ² instead of R₀².

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{MirrorGeometry, Point, ProximalSetup};
use crate::md::{default_max_iters, solve_md_with, MdOptions, MdResult};
use crate::oracles::ProblemInstance;

/// Which radius sets a stage's stopping budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartVariant {
    /// Σ 1/Mᵢ² ≥ ω·R_{k−1}²/εₖ²: the budget the stage's start point actually
    /// supports, so every stage is certified at εₖ.
    #[default]
    Proof,
    /// Σ 1/Mᵢ² ≥ ω·Rₖ²/εₖ², half the budget of `Proof`.
    Literal,
}

impl std::str::FromStr for RestartVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proof" => Ok(Self::Proof),
            "literal" => Ok(Self::Literal),
            other => Err(Error::InvalidInput(format!("unknown restart variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageSpec {
    pub k: usize,
    /// Rₖ²
    pub r_sq: f64,
    /// εₖ = μRₖ²/2
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSchedule {
    pub mu: f64,
    pub r0_sq: f64,
    pub omega: f64,
    pub eps_target: f64,
    /// K = ⌈log₂(μR₀²/(2ε))⌉, at least 1.
    pub k: usize,
    pub stages: Vec<StageSpec>,
}

impl RestartSchedule {
    pub fn new(mu: f64, r0_sq: f64, omega: f64, eps_target: f64) -> Result<Self> {
        for (name, v) in [("mu", mu), ("r0_sq", r0_sq), ("eps", eps_target)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::InvalidInput(format!("omega must be nonnegative, got {omega}")));
        }
        let ratio = mu * r0_sq / (2.0 * eps_target);
        // The small slack keeps exact powers of two from rounding up.
        let k = (ratio.log2() - 1e-12).ceil().max(1.0) as usize;
        let stages = (1..=k)
            .map(|k| {
                let r_sq = r0_sq * 0.5f64.powi(k as i32);
                StageSpec {
                    k,
                    r_sq,
                    eps: 0.5 * mu * r_sq,
                }
            })
            .collect();
        Ok(Self {
            mu,
            r0_sq,
            omega,
            eps_target,
            k,
            stages,
        })
    }

    /// R_{k−1}² for 1-based stage `k`.
    pub fn prev_r_sq(&self, k: usize) -> f64 {
        self.r0_sq * 0.5f64.powi(k as i32 - 1)
    }

    /// Θ² for stage `k` in original-norm units, so that MD stops once
    /// Σ 1/Mᵢ² ≥ 2Θ²/εₖ².
    pub fn stage_theta_sq(&self, k: usize, variant: RestartVariant) -> f64 {
        let r_sq = match variant {
            RestartVariant::Proof => self.prev_r_sq(k),
            RestartVariant::Literal => self.stages[k - 1].r_sq,
        };
        0.5 * self.omega * r_sq
    }

    /// Σ 1/Mᵢ² at which stage `k` stops.
    pub fn stage_budget(&self, k: usize, variant: RestartVariant) -> f64 {
        let eps = self.stages[k - 1].eps;
        2.0 * self.stage_theta_sq(k, variant) / (eps * eps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub spec: StageSpec,
    pub theta_sq: f64,
    /// x_{k−1}, where the stage started.
    pub center: Point,
    pub result: MdResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartReport {
    pub x_final: Point,
    pub schedule: RestartSchedule,
    pub variant: RestartVariant,
    pub stages: Vec<StageReport>,
    pub total_calls: usize,
    pub sum_inv_m_sq: f64,
    /// M with N/M² = Σ over all stages of Σ 1/Mᵢ².
    pub effective_m: f64,
}

impl RestartReport {
    /// ⌈4M²ω/(με)⌉ with the effective M of the whole run.
    pub fn theorem_calls(&self) -> u64 {
        let s = &self.schedule;
        (4.0 * self.effective_m.powi(2) * s.omega / (s.mu * s.eps_target)).ceil() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RestartOptions {
    pub variant: RestartVariant,
    /// Per-stage iteration cap; defaults to [`default_max_iters`] for the stage.
    pub max_iters: Option<usize>,
}

pub fn solve_restart(
    problem: &ProblemInstance,
    eps: f64,
    mu: f64,
    r0_sq: f64,
    setup: &ProximalSetup,
) -> Result<RestartReport> {
    solve_restart_with(problem, eps, mu, r0_sq, setup, &RestartOptions::default())
}

pub fn solve_restart_with(
    problem: &ProblemInstance,
    eps: f64,
    mu: f64,
    r0_sq: f64,
    setup: &ProximalSetup,
    opts: &RestartOptions,
) -> Result<RestartReport> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidInput(format!(
            "restarts need a positive strong-convexity modulus, got mu = {mu}"
        )));
    }
    let schedule = RestartSchedule::new(mu, r0_sq, setup.omega(), eps)?;
    let mut center = setup.dgf_minimizer().clone();
    let mut stages = Vec::with_capacity(schedule.k);
    for spec in schedule.stages.iter().copied() {
        let theta_sq = schedule.stage_theta_sq(spec.k, opts.variant);
        // Same norm as the base setup; only the d.g.f. center moves.
        let geometry = setup.rescale(&center, 1.0)?;
        let md_opts = MdOptions {
            max_iters: Some(
                opts.max_iters
                    .unwrap_or_else(|| default_max_iters(problem, spec.eps, theta_sq)),
            ),
            check_theta: false,
            ..MdOptions::new(spec.eps, theta_sq)
        };
        let result = solve_md_with(problem, &geometry, &md_opts).map_err(|e| Error::Stage {
            stage: spec.k,
            source: Box::new(e),
        })?;
        let next = result.x_bar.clone();
        stages.push(StageReport {
            spec,
            theta_sq,
            center: std::mem::replace(&mut center, next),
            result,
        });
    }
    let total_calls = stages.iter().map(|s| s.result.n_calls).sum();
    let sum_inv_m_sq: f64 = stages.iter().map(|s| s.result.sum_inv_m_sq).sum();
    let effective_m = if sum_inv_m_sq > 0.0 {
        (total_calls as f64 / sum_inv_m_sq).sqrt()
    } else {
        0.0
    };
    Ok(RestartReport {
        x_final: center,
        schedule,
        variant: opts.variant,
        stages,
        total_calls,
        sum_inv_m_sq,
        effective_m,
    })
}

/// (μ/2)‖x − x*‖² ≤ ε, the distance bound strong convexity gives an
/// ε-solution.
pub fn check_lemma2(
    x: &Point,
    x_star: &Point,
    eps: f64,
    mu: f64,
    setup: &impl MirrorGeometry,
) -> bool {
    let diff: Vec<f64> = x.iter().zip(x_star.iter()).map(|(a, b)| a - b).collect();
    0.5 * mu * setup.norm(&diff).powi(2) <= eps + 1e-7
}
