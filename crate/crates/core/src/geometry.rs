//! Proximal geometry: norms, distance-generating functions, Bregman
//! divergences and the mirror (proximal) step.
//!
//! Three setups are supported, each with a closed-form mirror step:
//!
//! | setup            | primal norm | d(x)                    | mirror step                 |
//! |------------------|-------------|-------------------------|-----------------------------|
//! | `EuclideanBall`  | l2          | ½‖x‖²                   | radial projection of x − y  |
//! | `Box`            | l2          | ½‖x − x₀‖²              | coordinatewise clamp        |
//! | `EntropySimplex` | l1          | Σ xⱼ ln xⱼ + ln n       | multiplicative weights      |
//!
//! The distance-generating function is minimized at [`ProximalSetup::dgf_minimizer`]
//! (the origin for the ball, the projection of the origin for the box, the
//! uniform point for the simplex), which is where mirror descent starts.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};

/// Coordinates below this are clamped before taking logarithms.
pub const SIMPLEX_FLOOR: f64 = 1e-300;

/// A point of the primal space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

/// An element of the dual space (subgradients live here).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DualVector(Vec<f64>);

macro_rules! vector_newtype {
    ($name:ident) => {
        impl $name {
            /// Wraps `coords`, rejecting NaN and infinite entries.
            pub fn new(coords: Vec<f64>) -> Result<Self> {
                check_finite(&coords)?;
                Ok(Self(coords))
            }

            pub fn zeros(dim: usize) -> Self {
                Self(vec![0.0; dim])
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.0
            }

            #[allow(dead_code)]
            pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
                debug_assert!(coords.iter().all(|c| c.is_finite()));
                Self(coords)
            }
        }

        impl Deref for $name {
            type Target = [f64];

            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl TryFrom<Vec<f64>> for $name {
            type Error = Error;

            fn try_from(v: Vec<f64>) -> Result<Self> {
                Self::new(v)
            }
        }

        impl From<$name> for Vec<f64> {
            fn from(p: $name) -> Vec<f64> {
                p.0
            }
        }
    };
}

vector_newtype!(Point);
vector_newtype!(DualVector);

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn half_sq_dist(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
}

/// Generalized KL divergence Σ yⱼ ln(yⱼ/xⱼ) − yⱼ + xⱼ, the Bregman divergence of
/// Σ x ln x. Requires `x > 0`; zero entries of `y` contribute `xⱼ`.
fn kl(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&xj, &yj)| {
            let xj = xj.max(SIMPLEX_FLOOR);
            if yj > 0.0 {
                yj * (yj / xj).ln() - yj + xj
            } else {
                xj
            }
        })
        .sum()
}

/// Everything mirror descent needs from a geometry.
///
/// Methods take raw slices and assume dimensions have already been checked;
/// the free functions [`dual_norm`], [`bregman`] and [`mirror_step`] are the
/// validated entry points.
pub trait MirrorGeometry {
    fn dim(&self) -> usize;

    /// The primal norm ‖x‖.
    fn norm(&self, x: &[f64]) -> f64;

    /// The conjugate norm ‖ξ‖* = max{⟨ξ, x⟩ : ‖x‖ ≤ 1}.
    fn dual_norm(&self, xi: &[f64]) -> f64;

    /// The distance-generating function d.
    fn dgf(&self, x: &[f64]) -> f64;

    fn dgf_grad(&self, x: &[f64]) -> Vec<f64>;

    /// V(x, y) = d(y) − d(x) − ⟨d′(x), y − x⟩.
    fn bregman(&self, x: &[f64], y: &[f64]) -> Result<f64>;

    /// Mirr_x(y) = argmin_u {⟨y, u⟩ + V(x, u)} over the feasible set.
    fn mirror_step(&self, x: &[f64], y: &[f64]) -> Vec<f64>;

    /// Where mirror descent starts: the minimizer of d.
    fn start_point(&self) -> Point;

    fn contains(&self, x: &[f64], tol: f64) -> bool;

    /// Constant ω with d(x) ≤ ω/2 whenever ‖x − start‖ ≤ 1.
    fn omega(&self) -> f64;
}

/// Feasible-set and d.g.f. family.
#[derive(Debug, Clone, PartialEq)]
pub enum SetupKind {
    /// Euclidean ball of the given radius centered at the origin.
    EuclideanBall { radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Probability simplex with the negative-entropy d.g.f.
    EntropySimplex,
}

/// JSON form of a setup, e.g. `{"geometry": "euclidean_ball", "radius": 1.0, "dim": 2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "geometry", rename_all = "snake_case")]
pub enum GeometrySpec {
    EuclideanBall {
        radius: f64,
        dim: usize,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    #[serde(alias = "entropy_simplex")]
    Simplex {
        dim: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeometrySpec", into = "GeometrySpec")]
pub struct ProximalSetup {
    dim: usize,
    kind: SetupKind,
    dgf_minimizer: Point,
    omega: f64,
}

impl ProximalSetup {
    pub fn euclidean_ball(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self {
            dim,
            kind: SetupKind::EuclideanBall { radius },
            dgf_minimizer: Point::zeros(dim),
            omega: 1.0,
        })
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        check_finite(&lower)?;
        check_finite(&upper)?;
        if let Some(j) = (0..lower.len()).find(|&j| lower[j] > upper[j]) {
            return Err(Error::InvalidInput(format!(
                "box bounds inverted at coordinate {j}: {} > {}",
                lower[j], upper[j]
            )));
        }
        let center: Vec<f64> = lower
            .iter()
            .zip(&upper)
            .map(|(&l, &u)| 0.0f64.clamp(l, u))
            .collect();
        Ok(Self {
            dim: lower.len(),
            kind: SetupKind::Box { lower, upper },
            dgf_minimizer: Point(center),
            omega: 1.0,
        })
    }

    pub fn entropy_simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            kind: SetupKind::EntropySimplex,
            dgf_minimizer: Point(vec![1.0 / dim as f64; dim]),
            omega: 2.0 * (dim as f64).ln(),
        })
    }

    pub fn kind(&self) -> &SetupKind {
        &self.kind
    }

    /// x₀ = argmin d over the feasible set.
    pub fn dgf_minimizer(&self) -> &Point {
        &self.dgf_minimizer
    }

    /// Θ₀² large enough to bound d(x) for every feasible x, so it covers any
    /// optimum: R²/2 for the ball, half the largest squared distance from x₀
    /// for the box, ln n for the simplex.
    pub fn default_theta0_sq(&self) -> f64 {
        match &self.kind {
            SetupKind::EuclideanBall { radius } => 0.5 * radius * radius,
            SetupKind::Box { lower, upper } => {
                let x0 = &self.dgf_minimizer;
                0.5 * (0..self.dim)
                    .map(|j| (lower[j] - x0[j]).powi(2).max((upper[j] - x0[j]).powi(2)))
                    .sum::<f64>()
            }
            SetupKind::EntropySimplex => (self.dim as f64).ln(),
        }
    }

    /// Largest Euclidean norm of a feasible point.
    pub fn max_euclidean_norm(&self) -> f64 {
        match &self.kind {
            SetupKind::EuclideanBall { radius } => *radius,
            SetupKind::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| (l * l).max(u * u))
                .sum::<f64>()
                .sqrt(),
            SetupKind::EntropySimplex => 1.0,
        }
    }

    /// min over the feasible set of ⟨s, x⟩, with a minimizer.
    pub fn minimize_linear(&self, s: &[f64]) -> (f64, Vec<f64>) {
        match &self.kind {
            SetupKind::EuclideanBall { radius } => {
                let n = norm2(s);
                if n == 0.0 {
                    return (0.0, vec![0.0; self.dim]);
                }
                let x: Vec<f64> = s.iter().map(|v| -radius * v / n).collect();
                (-radius * n, x)
            }
            SetupKind::Box { lower, upper } => {
                let x: Vec<f64> = (0..self.dim)
                    .map(|j| if s[j] >= 0.0 { lower[j] } else { upper[j] })
                    .collect();
                (dot(s, &x), x)
            }
            SetupKind::EntropySimplex => {
                let (j, v) = s
                    .iter()
                    .copied()
                    .enumerate()
                    .fold((0, f64::INFINITY), |best, (j, v)| if v < best.1 { (j, v) } else { best });
                let mut x = vec![0.0; self.dim];
                x[j] = 1.0;
                (v, x)
            }
        }
    }

    /// Recenters and rescales the d.g.f.; see [`RescaledSetup`].
    pub fn rescale(&self, center: &Point, radius: f64) -> Result<RescaledSetup> {
        rescale(self, center, radius)
    }

    pub fn spec(&self) -> GeometrySpec {
        self.clone().into()
    }
}

impl TryFrom<GeometrySpec> for ProximalSetup {
    type Error = Error;

    fn try_from(spec: GeometrySpec) -> Result<Self> {
        match spec {
            GeometrySpec::EuclideanBall { radius, dim } => Self::euclidean_ball(dim, radius),
            GeometrySpec::Box { lower, upper } => Self::boxed(lower, upper),
            GeometrySpec::Simplex { dim } => Self::entropy_simplex(dim),
        }
    }
}

impl From<ProximalSetup> for GeometrySpec {
    fn from(setup: ProximalSetup) -> Self {
        match setup.kind {
            SetupKind::EuclideanBall { radius } => GeometrySpec::EuclideanBall {
                radius,
                dim: setup.dim,
            },
            SetupKind::Box { lower, upper } => GeometrySpec::Box { lower, upper },
            SetupKind::EntropySimplex => GeometrySpec::Simplex { dim: setup.dim },
        }
    }
}

impl MirrorGeometry for ProximalSetup {
    fn dim(&self) -> usize {
        self.dim
    }

    fn norm(&self, x: &[f64]) -> f64 {
        match self.kind {
            SetupKind::EntropySimplex => norm1(x),
            _ => norm2(x),
        }
    }

    fn dual_norm(&self, xi: &[f64]) -> f64 {
        match self.kind {
            SetupKind::EntropySimplex => norm_inf(xi),
            _ => norm2(xi),
        }
    }

    fn dgf(&self, x: &[f64]) -> f64 {
        match self.kind {
            SetupKind::EuclideanBall { .. } | SetupKind::Box { .. } => {
                half_sq_dist(x, &self.dgf_minimizer)
            }
            SetupKind::EntropySimplex => {
                x.iter()
                    .map(|&v| if v > 0.0 { v * v.ln() } else { 0.0 })
                    .sum::<f64>()
                    + (self.dim as f64).ln()
            }
        }
    }

    fn dgf_grad(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            SetupKind::EuclideanBall { .. } | SetupKind::Box { .. } => x
                .iter()
                .zip(self.dgf_minimizer.iter())
                .map(|(a, b)| a - b)
                .collect(),
            SetupKind::EntropySimplex => {
                x.iter().map(|&v| v.max(SIMPLEX_FLOOR).ln() + 1.0).collect()
            }
        }
    }

    fn bregman(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self.kind {
            SetupKind::EuclideanBall { .. } | SetupKind::Box { .. } => Ok(half_sq_dist(x, y)),
            SetupKind::EntropySimplex => {
                if let Some(j) = x.iter().position(|&v| v <= 0.0) {
                    return Err(Error::Domain(format!(
                        "entropy d.g.f. is not differentiable at a point with x[{j}] = {}",
                        x[j]
                    )));
                }
                Ok(kl(x, y))
            }
        }
    }

    fn mirror_step(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        match &self.kind {
            SetupKind::EuclideanBall { radius } => {
                let mut z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                let n = norm2(&z);
                if n > *radius {
                    let s = radius / n;
                    z.iter_mut().for_each(|v| *v *= s);
                }
                z
            }
            SetupKind::Box { lower, upper } => (0..self.dim)
                .map(|j| (x[j] - y[j]).clamp(lower[j], upper[j]))
                .collect(),
            SetupKind::EntropySimplex => {
                let w: Vec<f64> = x
                    .iter()
                    .zip(y)
                    .map(|(&a, &b)| a.max(SIMPLEX_FLOOR).ln() - b)
                    .collect();
                let top = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut u: Vec<f64> = w.iter().map(|v| (v - top).exp()).collect();
                let total: f64 = u.iter().sum();
                u.iter_mut()
                    .for_each(|v| *v = (*v / total).max(SIMPLEX_FLOOR));
                u
            }
        }
    }

    fn start_point(&self) -> Point {
        self.dgf_minimizer.clone()
    }

    fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match &self.kind {
            SetupKind::EuclideanBall { radius } => norm2(x) <= radius * (1.0 + tol) + tol,
            SetupKind::Box { lower, upper } => {
                (0..self.dim).all(|j| x[j] >= lower[j] - tol && x[j] <= upper[j] + tol)
            }
            SetupKind::EntropySimplex => {
                x.iter().all(|&v| v >= -tol)
                    && (x.iter().sum::<f64>() - 1.0).abs() <= tol * self.dim as f64
            }
        }
    }

    fn omega(&self) -> f64 {
        self.omega
    }
}

/// The setup with d.g.f. recentered at `center` and scaled by `radius`:
/// d_k(x) = D(x, center)/R², where D is ½‖x − c‖² for the quadratic setups
/// (exactly d((x − c)/R) for the ball) and KL(x‖c) for the simplex.
///
/// d_k is 1-strongly convex w.r.t. ‖·‖/R, so the dual norm is R‖·‖*, Bregman
/// divergences shrink by 1/R² and the mirror step becomes the base step with
/// the dual vector scaled by R².
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledSetup {
    base: ProximalSetup,
    center: Point,
    radius: f64,
}

impl RescaledSetup {
    pub fn base(&self) -> &ProximalSetup {
        &self.base
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn inv_r_sq(&self) -> f64 {
        1.0 / (self.radius * self.radius)
    }
}

impl MirrorGeometry for RescaledSetup {
    fn dim(&self) -> usize {
        self.base.dim
    }

    fn norm(&self, x: &[f64]) -> f64 {
        self.base.norm(x) / self.radius
    }

    fn dual_norm(&self, xi: &[f64]) -> f64 {
        self.radius * self.base.dual_norm(xi)
    }

    fn dgf(&self, x: &[f64]) -> f64 {
        let raw = match self.base.kind {
            SetupKind::EntropySimplex => kl(&self.center, x),
            _ => half_sq_dist(x, &self.center),
        };
        raw * self.inv_r_sq()
    }

    fn dgf_grad(&self, x: &[f64]) -> Vec<f64> {
        let s = self.inv_r_sq();
        match self.base.kind {
            SetupKind::EntropySimplex => x
                .iter()
                .zip(self.center.iter())
                .map(|(&a, &c)| s * (a.max(SIMPLEX_FLOOR).ln() - c.max(SIMPLEX_FLOOR).ln()))
                .collect(),
            _ => x
                .iter()
                .zip(self.center.iter())
                .map(|(a, c)| s * (a - c))
                .collect(),
        }
    }

    fn bregman(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.base.bregman(x, y)? * self.inv_r_sq())
    }

    fn mirror_step(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let r_sq = self.radius * self.radius;
        let scaled: Vec<f64> = y.iter().map(|v| v * r_sq).collect();
        self.base.mirror_step(x, &scaled)
    }

    fn start_point(&self) -> Point {
        self.center.clone()
    }

    fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.base.contains(x, tol)
    }

    fn omega(&self) -> f64 {
        self.base.omega
    }
}

fn check_vector(g: &impl MirrorGeometry, v: &[f64]) -> Result<()> {
    check_dim(g.dim(), v.len())?;
    check_finite(v)
}

/// Conjugate norm of `xi` under the setup's primal norm.
pub fn dual_norm(setup: &impl MirrorGeometry, xi: &DualVector) -> Result<f64> {
    check_vector(setup, xi)?;
    Ok(setup.dual_norm(xi))
}

/// Bregman divergence V(x, y); fails on simplex points with a zero coordinate in `x`.
pub fn bregman(setup: &impl MirrorGeometry, x: &Point, y: &Point) -> Result<f64> {
    check_vector(setup, x)?;
    check_vector(setup, y)?;
    setup.bregman(x, y)
}

pub fn mirror_step(setup: &impl MirrorGeometry, x: &Point, y: &DualVector) -> Result<Point> {
    check_vector(setup, x)?;
    check_vector(setup, y)?;
    Ok(Point::from_vec_unchecked(setup.mirror_step(x, y)))
}

pub fn rescale(setup: &ProximalSetup, center: &Point, radius: f64) -> Result<RescaledSetup> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidInput(format!(
            "rescale radius must be positive, got {radius}"
        )));
    }
    check_vector(setup, center)?;
    if !setup.contains(center, 1e-9) {
        return Err(Error::Domain("rescale center lies outside the feasible set".into()));
    }
    Ok(RescaledSetup {
        base: setup.clone(),
        center: center.clone(),
        radius,
    })
}

pub fn omega_bound(setup: &impl MirrorGeometry) -> f64 {
    setup.omega()
}
