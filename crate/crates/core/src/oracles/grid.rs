//! Brute-force minimization over a uniform grid of the feasible set, refined
//! around the incumbent. Used to compute reference optima and dual values for
//! desk-scale problems (at most three free coordinates).
//!
//! Every point of X lies within [`GridMinimum::covering_radius`] (primal norm)
//! of a point of the first, full grid. For an L-Lipschitz function minimized
//! over all of X the reported value therefore overestimates the minimum by at
//! most L times that radius. Refinement passes can only lower the value, so
//! the bound survives them. When `f` also excludes points (a functional
//! constraint) no such guarantee exists and the radius is only indicative.

use crate::error::{Error, Result};
use crate::geometry::{MirrorGeometry, ProximalSetup, SetupKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    /// Points per free coordinate on the first pass; `None` picks about 10⁶
    /// points in total.
    pub points_per_axis: Option<usize>,
    /// Each refinement re-grids a window of ±2 cells around the incumbent
    /// with 21 points per axis.
    pub refinements: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            points_per_axis: None,
            refinements: 5,
        }
    }
}

impl GridOptions {
    pub fn with_points(points_per_axis: usize) -> Self {
        Self {
            points_per_axis: Some(points_per_axis),
            ..Self::default()
        }
    }
}

fn auto_points(free: usize) -> usize {
    match free {
        0 | 1 => 100_001,
        2 => 1_001,
        _ => 101,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMinimum {
    pub point: Vec<f64>,
    pub value: f64,
    /// Spacing of the first pass in the free coordinates.
    pub spacing: f64,
    /// Primal-norm distance within which every point of X has a first-pass
    /// grid point.
    pub covering_radius: f64,
    pub evaluations: usize,
}

struct Parametrization<'a> {
    setup: &'a ProximalSetup,
    free: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl<'a> Parametrization<'a> {
    fn new(setup: &'a ProximalSetup) -> Self {
        let n = setup.dim();
        let (free, lower, upper) = match setup.kind() {
            SetupKind::EuclideanBall { radius } => (n, vec![-radius; n], vec![*radius; n]),
            SetupKind::Box { lower, upper } => (n, lower.clone(), upper.clone()),
            SetupKind::EntropySimplex => (n - 1, vec![0.0; n - 1], vec![1.0; n - 1]),
        };
        Self {
            setup,
            free,
            lower,
            upper,
        }
    }

    fn embed(&self, t: &[f64], out: &mut Vec<f64>) -> bool {
        out.clear();
        out.extend_from_slice(t);
        if let SetupKind::EntropySimplex = self.setup.kind() {
            let last = 1.0 - t.iter().sum::<f64>();
            if last < 0.0 {
                return false;
            }
            out.push(last);
            return true;
        }
        self.setup.contains(out, 0.0)
    }

    fn covering_radius(&self, spacing: f64) -> f64 {
        let f = self.free as f64;
        match self.setup.kind() {
            // Nearest lattice point of a box point is within half a diagonal.
            SetupKind::Box { .. } => 0.5 * spacing * f.sqrt(),
            // Shrink a sphere point inwards by a diagonal, then round: the
            // lattice point stays inside and is 1.5 diagonals away.
            SetupKind::EuclideanBall { .. } => 1.5 * spacing * f.sqrt(),
            // Rounding the free coordinates down keeps Σt ≤ 1; each moves by
            // at most one cell and the last coordinate absorbs the sum (ℓ1).
            SetupKind::EntropySimplex => 2.0 * f * spacing,
        }
    }
}

/// Minimizes `f` over grid points of the feasible set; `f` returns `None` at
/// points to exclude (e.g. violating a functional constraint).
pub fn grid_minimize<F>(setup: &ProximalSetup, opts: GridOptions, f: F) -> Result<Option<GridMinimum>>
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let param = Parametrization::new(setup);
    if param.free > 3 {
        return Err(Error::InvalidInput(format!(
            "grid search supports at most 3 free coordinates, got {}",
            param.free
        )));
    }
    let p = opts.points_per_axis.unwrap_or_else(|| auto_points(param.free));
    if p < 2 {
        return Err(Error::InvalidInput("grid needs at least 2 points per axis".into()));
    }

    if param.free == 0 {
        let mut x = Vec::new();
        if param.embed(&[], &mut x) {
            if let Some(v) = f(&x) {
                return Ok(Some(GridMinimum {
                    point: x,
                    value: v,
                    spacing: 0.0,
                    covering_radius: 0.0,
                    evaluations: 1,
                }));
            }
        }
        return Ok(None);
    }

    let mut lo = param.lower.clone();
    let mut hi = param.upper.clone();
    let mut best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
    let mut evaluations = 0;
    let mut first_spacing = None;
    let mut t = vec![0.0; param.free];
    let mut x = Vec::with_capacity(setup.dim());
    for round in 0..=opts.refinements {
        // Refinement windows span four old cells; a few points suffice.
        let p = if round == 0 { p } else { p.min(21) };
        let steps: Vec<f64> = (0..param.free)
            .map(|j| (hi[j] - lo[j]) / (p - 1) as f64)
            .collect();
        first_spacing.get_or_insert(steps.iter().copied().fold(0.0, f64::max));
        let total = p.pow(param.free as u32);
        for flat in 0..total {
            let mut rem = flat;
            for j in 0..param.free {
                // The last index lands exactly on the upper bound.
                let k = rem % p;
                t[j] = if k == p - 1 { hi[j] } else { lo[j] + k as f64 * steps[j] };
                rem /= p;
            }
            if !param.embed(&t, &mut x) {
                continue;
            }
            evaluations += 1;
            if let Some(v) = f(&x) {
                if best.as_ref().is_none_or(|b| v < b.2) {
                    best = Some((t.clone(), x.clone(), v));
                }
            }
        }
        let Some((bt, _, _)) = &best else {
            return Ok(None);
        };
        for j in 0..param.free {
            lo[j] = (bt[j] - 2.0 * steps[j]).max(param.lower[j]);
            hi[j] = (bt[j] + 2.0 * steps[j]).min(param.upper[j]);
        }
    }
    let spacing = first_spacing.unwrap_or(0.0);
    Ok(best.map(|(_, point, value)| GridMinimum {
        point,
        value,
        spacing,
        covering_radius: param.covering_radius(spacing),
        evaluations,
    }))
}
