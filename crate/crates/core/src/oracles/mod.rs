//! First-order oracles, call accounting and the max-of-convex constraint.

use std::fmt::Debug;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::geometry::{dot, norm2, DualVector, MirrorGeometry, Point, ProximalSetup};

pub mod grid;
pub mod problems;

pub use problems::{builtin, builtin_problems, KnownOptimum, ProblemDescription, ProblemInstance};

/// A convex function together with a subgradient selector.
pub trait FirstOrderOracle: Debug + Send + Sync {
    fn dim(&self) -> usize;

    /// Value and one subgradient at `x`.
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>);

    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x).0
    }

    /// Upper bound on the dual norm of any returned subgradient over the
    /// feasible set, when known.
    fn lipschitz_hint(&self) -> Option<f64>;

    /// Strong-convexity modulus μ w.r.t. the setup norm (0 if merely convex).
    fn strong_convexity(&self) -> f64;
}

/// Oracle evaluation counts. Increments are atomic so a counter can be
/// shared, though a solver run normally owns its own.
#[derive(Debug, Default)]
pub struct CallCounter {
    calls_f: AtomicU64,
    calls_g: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CallCounts {
    pub calls_f: u64,
    pub calls_g: u64,
}

impl CallCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn calls_f(&self) -> u64 {
        self.calls_f.load(Ordering::Relaxed)
    }

    pub fn calls_g(&self) -> u64 {
        self.calls_g.load(Ordering::Relaxed)
    }

    pub fn snapshot(&self) -> CallCounts {
        CallCounts {
            calls_f: self.calls_f(),
            calls_g: self.calls_g(),
        }
    }

    fn bump_f(&self) {
        self.calls_f.fetch_add(1, Ordering::Relaxed);
    }

    fn bump_g(&self) {
        self.calls_g.fetch_add(1, Ordering::Relaxed);
    }
}

fn check_point(dim: usize, x: &[f64]) -> Result<()> {
    check_dim(dim, x.len())?;
    check_finite(x).map_err(|_| Error::Domain("non-finite point".into()))
}

/// Evaluates an objective oracle, counting one objective call.
pub fn evaluate(
    oracle: &dyn FirstOrderOracle,
    x: &Point,
    counter: &CallCounter,
) -> Result<(f64, DualVector)> {
    check_point(oracle.dim(), x)?;
    let (v, g) = oracle.eval(x);
    counter.bump_f();
    Ok((v, DualVector::new(g)?))
}

/// g(x) = max_m g_m(x). The active index is the lowest maximizing part.
#[derive(Debug, Clone)]
pub struct MaxConstraint {
    parts: Vec<Arc<dyn FirstOrderOracle>>,
}

impl MaxConstraint {
    pub fn new(parts: Vec<Arc<dyn FirstOrderOracle>>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidInput("max constraint needs at least one part".into()))?;
        let dim = first.dim();
        for p in &parts {
            check_dim(dim, p.dim())?;
        }
        Ok(Self { parts })
    }

    pub fn single(part: Arc<dyn FirstOrderOracle>) -> Self {
        Self { parts: vec![part] }
    }

    pub fn parts(&self) -> &[Arc<dyn FirstOrderOracle>] {
        &self.parts
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    /// (value, subgradient of the active part, active index).
    pub fn eval(&self, x: &[f64]) -> (f64, Vec<f64>, usize) {
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (m, part) in self.parts.iter().enumerate() {
            let v = part.value(x);
            if v > best.0 {
                best = (v, m);
            }
        }
        let (v, g) = self.parts[best.1].eval(x);
        (v, g, best.1)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.parts
            .iter()
            .map(|p| p.value(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn lipschitz_hint(&self) -> Option<f64> {
        self.parts
            .iter()
            .map(|p| p.lipschitz_hint())
            .try_fold(0.0f64, |acc, l| l.map(|l| acc.max(l)))
    }

    pub fn strong_convexity(&self) -> f64 {
        self.parts
            .iter()
            .map(|p| p.strong_convexity())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Evaluates a max constraint, counting one constraint call.
pub fn max_eval(
    mc: &MaxConstraint,
    x: &Point,
    counter: &CallCounter,
) -> Result<(f64, DualVector, usize)> {
    check_point(mc.dim(), x)?;
    let (v, g, m) = mc.eval(x);
    counter.bump_g();
    Ok((v, DualVector::new(g)?, m))
}

/// Building blocks for declaratively described functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Term {
    /// ⟨a, x⟩ + b
    Linear {
        a: Vec<f64>,
        #[serde(default)]
        b: f64,
    },
    /// coef·‖x − center‖² + offset
    Quadratic {
        coef: f64,
        center: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// coef·‖x‖₁, with sign(0) = +1 at kinks
    L1 { coef: f64 },
    /// max_k ⟨rows[k], x⟩ + offsets[k], lowest index on ties
    MaxAffine { rows: Vec<Vec<f64>>, offsets: Vec<f64> },
    Constant { value: f64 },
}

impl Term {
    fn check(&self, dim: usize) -> Result<()> {
        match self {
            Term::Linear { a, b } => {
                check_dim(dim, a.len())?;
                check_finite(a)?;
                check_finite(&[*b])
            }
            Term::Quadratic {
                coef,
                center,
                offset,
            } => {
                check_dim(dim, center.len())?;
                check_finite(center)?;
                check_finite(&[*coef, *offset])?;
                if *coef < 0.0 {
                    return Err(Error::InvalidInput("quadratic coefficient must be >= 0".into()));
                }
                Ok(())
            }
            Term::L1 { coef } => {
                check_finite(&[*coef])?;
                if *coef < 0.0 {
                    return Err(Error::InvalidInput("l1 coefficient must be >= 0".into()));
                }
                Ok(())
            }
            Term::MaxAffine { rows, offsets } => {
                if rows.is_empty() {
                    return Err(Error::InvalidInput("max_affine needs at least one row".into()));
                }
                check_dim(rows.len(), offsets.len())?;
                check_finite(offsets)?;
                for r in rows {
                    check_dim(dim, r.len())?;
                    check_finite(r)?;
                }
                Ok(())
            }
            Term::Constant { value } => check_finite(&[*value]),
        }
    }

    fn accumulate(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        match self {
            Term::Linear { a, b } => {
                grad.iter_mut().zip(a).for_each(|(g, ai)| *g += ai);
                dot(a, x) + b
            }
            Term::Quadratic {
                coef,
                center,
                offset,
            } => {
                let mut sq = 0.0;
                for j in 0..x.len() {
                    let d = x[j] - center[j];
                    sq += d * d;
                    grad[j] += 2.0 * coef * d;
                }
                coef * sq + offset
            }
            Term::L1 { coef } => {
                let mut v = 0.0;
                for j in 0..x.len() {
                    v += x[j].abs();
                    grad[j] += if x[j] >= 0.0 { *coef } else { -*coef };
                }
                coef * v
            }
            Term::MaxAffine { rows, offsets } => {
                let (k, v) = rows
                    .iter()
                    .zip(offsets)
                    .map(|(r, o)| dot(r, x) + o)
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (k, v)| {
                        if v > best.1 {
                            (k, v)
                        } else {
                            best
                        }
                    });
                grad.iter_mut().zip(&rows[k]).for_each(|(g, r)| *g += r);
                v
            }
            Term::Constant { value } => *value,
        }
    }

    fn lipschitz_over(&self, setup: &ProximalSetup) -> f64 {
        let dim = setup.dim();
        match self {
            Term::Linear { a, .. } => setup.dual_norm(a),
            // Dual norms here are l2 or l-infinity, both bounded by l2.
            Term::Quadratic { coef, center, .. } => {
                2.0 * coef * (setup.max_euclidean_norm() + norm2(center))
            }
            Term::L1 { coef } => coef * setup.dual_norm(&vec![1.0; dim]),
            Term::MaxAffine { rows, .. } => rows
                .iter()
                .map(|r| setup.dual_norm(r))
                .fold(0.0, f64::max),
            Term::Constant { .. } => 0.0,
        }
    }

    fn strong_convexity(&self) -> f64 {
        match self {
            Term::Quadratic { coef, .. } => 2.0 * coef,
            _ => 0.0,
        }
    }
}

/// A sum of [`Term`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    dim: usize,
    terms: Vec<Term>,
    lipschitz: Option<f64>,
    mu: f64,
}

impl Composite {
    pub fn new(dim: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            t.check(dim)?;
        }
        let mu = terms.iter().map(Term::strong_convexity).sum();
        Ok(Self {
            dim,
            terms,
            lipschitz: None,
            mu,
        })
    }

    pub fn linear(a: Vec<f64>, b: f64) -> Result<Self> {
        Self::new(a.len(), vec![Term::Linear { a, b }])
    }

    pub fn constant(dim: usize, value: f64) -> Result<Self> {
        Self::new(dim, vec![Term::Constant { value }])
    }

    /// Attaches a Lipschitz bound valid over the setup's feasible set.
    ///
    /// Strong convexity is stated in l2; for the simplex (l1 norm) the modulus
    /// is divided by n since ‖v‖₁² ≤ n‖v‖₂².
    pub fn bounded_over(mut self, setup: &ProximalSetup) -> Self {
        self.lipschitz = Some(self.terms.iter().map(|t| t.lipschitz_over(setup)).sum());
        if matches!(setup.kind(), crate::geometry::SetupKind::EntropySimplex) {
            self.mu /= self.dim as f64;
        }
        self
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }
}

impl FirstOrderOracle for Composite {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.dim];
        let v = self
            .terms
            .iter()
            .map(|t| t.accumulate(x, &mut grad))
            .sum();
        (v, grad)
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz
    }

    fn strong_convexity(&self) -> f64 {
        self.mu
    }
}
