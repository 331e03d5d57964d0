//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use mdcon::md::lemma1_violations;
use mdcon::oracles::problems::{P1_LINEAR_BALL, P2_MAXLIN_BOX, P3_STRONGLY_CONVEX, P4_ENTROPY_SIMPLEX};
use mdcon::{
    baseline_fixed_md, builtin, check_lemma2, duality_gap, recover_multipliers, solve_md,
    solve_restart_with, InnerSolver, MdResult, MirrorGeometry, ProblemInstance, ProximalSetup,
    RestartOptions, RestartReport, RestartVariant,
};
use mdcon_cli::{run, Algorithm, OneOrMany, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Box<dyn FnOnce(&mut Runs) -> Verdict>;

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

/// Converged runs shared between criteria.
#[derive(Default)]
struct Runs {
    md: Vec<(String, f64, ProblemInstance, MdResult, f64)>,
    restart: Vec<(f64, RestartReport)>,
}

impl Runs {
    fn md(&mut self, id: &str, eps: f64) -> MdResult {
        if let Some((_, _, _, r, _)) = self.md.iter().find(|(i, e, ..)| i == id && *e == eps) {
            return r.clone();
        }
        let p = builtin(id).unwrap();
        let t = Instant::now();
        let r = solve_md(&p, &p.setup, eps, p.theta0_sq, None).unwrap();
        let secs = t.elapsed().as_secs_f64();
        self.md.push((id.to_string(), eps, p, r.clone(), secs));
        r
    }

    fn restart(&mut self, eps: f64) -> RestartReport {
        if let Some((_, r)) = self.restart.iter().find(|(e, _)| *e == eps) {
            return r.clone();
        }
        let p = builtin(P3_STRONGLY_CONVEX).unwrap();
        let r = solve_restart_with(&p, eps, p.mu, p.r0_sq.unwrap(), &p.setup, &RestartOptions::default())
            .unwrap();
        self.restart.push((eps, r.clone()));
        r
    }
}

fn f_star(p: &ProblemInstance) -> (f64, f64) {
    let k = p.known_opt.as_ref().expect("reference optimum");
    (k.value, k.resolution)
}

fn c1(runs: &mut Runs) -> Verdict {
    let mut ok = true;
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for id in [P1_LINEAR_BALL, P2_MAXLIN_BOX, P4_ENTROPY_SIMPLEX] {
        let p = builtin(id).unwrap();
        let (fs, res) = f_star(&p);
        for eps in [0.1, 0.05, 0.01] {
            let r = runs.md(id, eps);
            let f_gap = p.f(&r.x_bar) - fs;
            let g = p.g(&r.x_bar);
            ok &= f_gap <= eps + res && g <= eps + 1e-9;
            worst.0 = worst.0.max(f_gap / eps);
            worst.1 = worst.1.max(g / eps);
        }
    }
    worst.2 = runs.md.iter().map(|m| m.4).fold(0.0, f64::max);
    ok &= worst.2 < 10.0;
    Verdict::new(
        ok,
        format!(
            "9 runs; max f_gap/eps = {:.3}, max g/eps = {:.3}, slowest run {:.3}s",
            worst.0, worst.1, worst.2
        ),
    )
}

/// Every converged plain-MD run and every restart stage.
fn c2(runs: &mut Runs) -> Verdict {
    for eps in [0.1, 0.05, 0.025, 0.0125] {
        runs.md(P3_STRONGLY_CONVEX, eps);
        runs.restart(eps);
    }
    let mut checked = 0;
    let mut worst = 0i64;
    let mut check = |r: &MdResult| {
        checked += 1;
        let d = r.n_calls as i64 - r.theorem_calls() as i64;
        if d.abs() > worst.abs() {
            worst = d;
        }
    };
    runs.md.iter().for_each(|m| check(&m.3));
    runs.restart
        .iter()
        .flat_map(|(_, r)| &r.stages)
        .for_each(|s| check(&s.result));
    Verdict::new(
        worst.abs() <= 1,
        format!("{checked} runs; worst n_calls - ceil(2 M^2 Theta^2/eps^2) = {worst}"),
    )
}

fn c3(runs: &mut Runs) -> Verdict {
    let mut steps = 0;
    let mut violations = 0;
    for (_, _, p, r, _) in &runs.md {
        let x_star = &p.known_opt.as_ref().unwrap().point;
        violations += lemma1_violations(r, p, &p.setup, x_star).unwrap().len();
        steps += r.trace.len();
    }
    let p = builtin(P3_STRONGLY_CONVEX).unwrap();
    let x_star = &p.known_opt.as_ref().unwrap().point;
    for (_, rep) in &runs.restart {
        for s in &rep.stages {
            let geometry = p.setup.rescale(&s.center, 1.0).unwrap();
            violations += lemma1_violations(&s.result, &p, &geometry, x_star).unwrap().len();
            steps += s.result.trace.len();
        }
    }
    Verdict::new(
        violations == 0 && steps >= 10_000,
        format!("{steps} steps checked against x*, {violations} violations (tol 1e-7)"),
    )
}

fn c4(runs: &mut Runs) -> Verdict {
    let p = builtin(P3_STRONGLY_CONVEX).unwrap();
    let (fs, res) = f_star(&p);
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [0.1, 0.01] {
        let r = runs.restart(eps);
        let f_gap = p.f(&r.x_final) - fs;
        let g = p.g(&r.x_final);
        let bound = r.theorem_calls() + r.schedule.k as u64;
        let accurate = f_gap <= eps + res && g <= eps;
        let within = (r.total_calls as u64) <= bound;
        ok &= accurate && within;
        let literal = solve_restart_with(
            &p,
            eps,
            p.mu,
            p.r0_sq.unwrap(),
            &p.setup,
            &RestartOptions {
                variant: RestartVariant::Literal,
                max_iters: None,
            },
        )
        .unwrap();
        parts.push(format!(
            "eps={eps}: f_gap={f_gap:.2e} g={g:.2e} total_calls={} bound={bound} (K={}) [literal-radius variant: {} calls, bound {}]",
            r.total_calls,
            r.schedule.k,
            literal.total_calls,
            literal.theorem_calls() + literal.schedule.k as u64
        ));
    }
    Verdict::new(ok, parts.join("; "))
}

fn c5(runs: &mut Runs) -> Verdict {
    let eps = [0.1, 0.05, 0.025, 0.0125];
    let mut ok = true;
    let mut rs = Vec::new();
    let mut ms = Vec::new();
    for w in eps.windows(2) {
        let r = runs.restart(w[1]).total_calls as f64 / runs.restart(w[0]).total_calls as f64;
        let m = runs.md(P3_STRONGLY_CONVEX, w[1]).n_calls as f64
            / runs.md(P3_STRONGLY_CONVEX, w[0]).n_calls as f64;
        ok &= (1.5..=3.0).contains(&r) && (3.0..=5.0).contains(&m);
        rs.push(format!("{r:.2}"));
        ms.push(format!("{m:.2}"));
    }
    Verdict::new(
        ok,
        format!("restart ratios [{}], plain MD ratios [{}]", rs.join(", "), ms.join(", ")),
    )
}

fn c6(runs: &mut Runs) -> Verdict {
    let p = builtin(P3_STRONGLY_CONVEX).unwrap();
    let k = p.known_opt.clone().unwrap();
    let mut stages = 0;
    let mut bad = 0;
    let mut worst: f64 = 0.0;
    for (_, r) in &runs.restart {
        for s in &r.stages {
            stages += 1;
            let x = &s.result.x_bar;
            let d2: f64 = x.iter().zip(k.point.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            worst = worst.max(0.5 * p.mu * d2 / s.spec.eps);
            if !check_lemma2(x, &k.point, s.spec.eps + k.resolution, p.mu, &p.setup) {
                bad += 1;
            }
        }
    }
    Verdict::new(
        bad == 0 && stages > 0,
        format!("{stages} stages, {bad} violations; max (mu/2)|x_k - x*|^2 / eps_k = {worst:.3}"),
    )
}

fn c7(runs: &mut Runs) -> Verdict {
    let p = builtin(P2_MAXLIN_BOX).unwrap();
    let (fs, _) = f_star(&p);
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [0.1, 0.05] {
        let r = runs.md(P2_MAXLIN_BOX, eps);
        let lam = recover_multipliers(&r, p.constraint.num_parts()).unwrap();
        let cert = duality_gap(&r, &lam, &p, &InnerSolver::auto(&p, eps)).unwrap();
        let tol = cert.inner_tolerance;
        ok &= lam.lambda_bar.iter().all(|l| *l >= 0.0)
            && cert.dual_value <= fs + tol
            && cert.gap <= eps + tol
            && tol <= eps / 10.0;
        parts.push(format!(
            "eps={eps}: lambda={:?} gap={:.3e} phi={:.5} tol={:.2e}",
            lam.lambda_bar
                .iter()
                .map(|l| format!("{l:.3}"))
                .collect::<Vec<_>>(),
            cert.gap,
            cert.dual_value,
            tol
        ));
    }
    Verdict::new(ok, parts.join("; "))
}

fn c8(runs: &mut Runs) -> Verdict {
    let p = builtin(P3_STRONGLY_CONVEX).unwrap();
    let l = p.lipschitz_hint().unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [0.1, 0.05] {
        let a = runs.md(P3_STRONGLY_CONVEX, eps);
        let b = baseline_fixed_md(&p, eps, &p.setup).unwrap();
        ok &= a.effective_m <= l && a.n_calls <= b.n_calls;
        parts.push(format!(
            "eps={eps}: effective_m={:.3} L={l:.3} adaptive={} fixed={}",
            a.effective_m, a.n_calls, b.n_calls
        ));
    }
    Verdict::new(ok, parts.join("; "))
}

// ---- criterion 9: geometry oracles written independently of the library ----

const SAMPLES: usize = 1000;

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Ball(f64),
    Box,
    Simplex,
}

struct Case {
    setup: ProximalSetup,
    kind: Kind,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Case {
    fn n(&self) -> usize {
        self.setup.dim()
    }

    fn norm(&self, v: &[f64]) -> f64 {
        match self.kind {
            Kind::Simplex => v.iter().map(|a| a.abs()).sum(),
            _ => v.iter().map(|a| a * a).sum::<f64>().sqrt(),
        }
    }

    fn dgf(&self, x: &[f64]) -> f64 {
        match self.kind {
            Kind::Ball(_) => 0.5 * x.iter().map(|a| a * a).sum::<f64>(),
            Kind::Box => {
                let c = self.box_center();
                0.5 * x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            }
            Kind::Simplex => {
                x.iter().map(|&a| if a > 0.0 { a * a.ln() } else { 0.0 }).sum::<f64>()
                    + (self.n() as f64).ln()
            }
        }
    }

    fn dgf_grad(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            Kind::Ball(_) => x.to_vec(),
            Kind::Box => x.iter().zip(self.box_center()).map(|(a, b)| a - b).collect(),
            Kind::Simplex => x.iter().map(|a| a.ln() + 1.0).collect(),
        }
    }

    fn box_center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0f64.clamp(*l, *u))
            .collect()
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self.kind {
            Kind::Ball(r) => loop {
                let x: Vec<f64> = (0..self.n()).map(|_| r * (2.0 * rng.gen::<f64>() - 1.0)).collect();
                if x.iter().map(|a| a * a).sum::<f64>() <= r * r {
                    return x;
                }
            },
            Kind::Box => self
                .lower
                .iter()
                .zip(&self.upper)
                .map(|(l, u)| l + (u - l) * rng.gen::<f64>())
                .collect(),
            Kind::Simplex => {
                // Interior points, some with tiny coordinates.
                let e: Vec<f64> = (0..self.n())
                    .map(|_| -(1.0 - rng.gen::<f64>()).ln() * 10f64.powf(-4.0 * rng.gen::<f64>()))
                    .collect();
                let s: f64 = e.iter().sum();
                e.iter().map(|a| a / s).collect()
            }
        }
    }

    /// Numerical argmin of ⟨y, u⟩ + V(x, u) over the set.
    fn numeric_argmin(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        match self.kind {
            Kind::Ball(r) => barrier_ball(x, y, r),
            Kind::Box => (0..self.n())
                .map(|j| barrier_interval(x[j] - y[j], self.lower[j], self.upper[j]))
                .collect(),
            Kind::Simplex => entropic_newton(x, y),
        }
    }
}

/// argmin ½(u − a)² over [l, h] by a log-barrier path-following method.
fn barrier_interval(a: f64, l: f64, h: f64) -> f64 {
    let mut u = 0.5 * (l + h);
    let mut t = 1.0;
    while t < 1e13 {
        for _ in 0..100 {
            let g = t * (u - a) - 1.0 / (u - l) + 1.0 / (h - u);
            let hess = t + 1.0 / ((u - l) * (u - l)) + 1.0 / ((h - u) * (h - u));
            let mut step = -g / hess;
            while !(u + step > l && u + step < h) {
                step *= 0.5;
            }
            u += step;
            if step.abs() < 1e-15 * (1.0 + u.abs()) {
                break;
            }
        }
        t *= 10.0;
    }
    u
}

/// argmin ⟨y, u⟩ + ½‖u − x‖² over ‖u‖ ≤ r by a log-barrier method with
/// damped Newton steps.
fn barrier_ball(x: &[f64], y: &[f64], r: f64) -> Vec<f64> {
    let n = x.len();
    let a: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
    let obj = |u: &[f64], t: f64| -> f64 {
        let s = r * r - u.iter().map(|v| v * v).sum::<f64>();
        if s <= 0.0 {
            return f64::INFINITY;
        }
        t * 0.5 * u.iter().zip(&a).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() - s.ln()
    };
    let mut u = vec![0.0; n];
    let mut t = 1.0;
    while t < 1e13 {
        for _ in 0..200 {
            let s = r * r - u.iter().map(|v| v * v).sum::<f64>();
            let g: Vec<f64> = (0..n).map(|i| t * (u[i] - a[i]) + 2.0 * u[i] / s).collect();
            let mut hm = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    hm[i][j] = 4.0 * u[i] * u[j] / (s * s);
                }
                hm[i][i] += t + 2.0 / s;
            }
            let d = solve_linear(hm, g.iter().map(|v| -v).collect());
            let decrement: f64 = -d.iter().zip(&g).map(|(p, q)| p * q).sum::<f64>();
            if decrement < 1e-20 {
                break;
            }
            let f0 = obj(&u, t);
            let mut step = 1.0;
            loop {
                let cand: Vec<f64> = u.iter().zip(&d).map(|(p, q)| p + step * q).collect();
                if obj(&cand, t) <= f0 - 0.25 * step * decrement || step < 1e-12 {
                    u = cand;
                    break;
                }
                step *= 0.5;
            }
        }
        t *= 10.0;
    }
    u
}

fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            let pivot = a[c].clone();
            for (v, p) in a[r][c..].iter_mut().zip(&pivot[c..]) {
                *v -= f * p;
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    x
}

/// argmin ⟨y, u⟩ + Σ u ln(u/x) − u + x over the simplex by Newton's method
/// on the affine set Σu = 1 (the entropy keeps iterates positive).
fn entropic_newton(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let obj = |u: &[f64]| -> f64 {
        (0..n)
            .map(|i| y[i] * u[i] + u[i] * (u[i] / x[i]).ln() - u[i])
            .sum()
    };
    let mut u = vec![1.0 / n as f64; n];
    for _ in 0..500 {
        let g: Vec<f64> = (0..n).map(|i| y[i] + (u[i] / x[i]).ln()).collect();
        // Newton direction with H = diag(1/u) restricted to Σ du = 0.
        let w: f64 = (0..n).map(|i| u[i] * g[i]).sum::<f64>() / u.iter().sum::<f64>();
        let d: Vec<f64> = (0..n).map(|i| -u[i] * (g[i] - w)).collect();
        let decrement: f64 = (0..n).map(|i| d[i] * d[i] / u[i]).sum();
        if decrement < 1e-30 {
            break;
        }
        let f0 = obj(&u);
        let mut step = 1.0;
        loop {
            let cand: Vec<f64> = (0..n).map(|i| u[i] + step * d[i]).collect();
            if cand.iter().all(|v| *v > 0.0)
                && (obj(&cand) <= f0 - 0.25 * step * decrement || step < 1e-12)
            {
                u = cand;
                break;
            }
            step *= 0.5;
            if step < 1e-300 {
                return u;
            }
        }
    }
    u
}

fn cases() -> Vec<Case> {
    let mut out = Vec::new();
    for n in [2, 3, 5] {
        out.push(Case {
            setup: ProximalSetup::euclidean_ball(n, 1.5).unwrap(),
            kind: Kind::Ball(1.5),
            lower: vec![],
            upper: vec![],
        });
        let lower: Vec<f64> = (0..n).map(|i| -1.0 + 0.3 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| 0.5 + 0.4 * i as f64).collect();
        out.push(Case {
            setup: ProximalSetup::boxed(lower.clone(), upper.clone()).unwrap(),
            kind: Kind::Box,
            lower,
            upper,
        });
        out.push(Case {
            setup: ProximalSetup::entropy_simplex(n).unwrap(),
            kind: Kind::Simplex,
            lower: vec![],
            upper: vec![],
        });
    }
    out
}

fn c9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut counts: BTreeMap<&str, [usize; 4]> = BTreeMap::new();
    let mut failures: Vec<String> = Vec::new();
    let mut max_argmin_err: f64 = 0.0;
    for case in cases() {
        let name = match case.kind {
            Kind::Ball(_) => "ball",
            Kind::Box => "box",
            Kind::Simplex => "simplex",
        };
        let tally = counts.entry(name).or_default();
        for _ in 0..SAMPLES {
            let x = case.sample(&mut rng);
            let z = case.sample(&mut rng);
            let scale = 10f64.powf(2.0 * rng.gen::<f64>() - 1.0);
            let y: Vec<f64> = (0..case.n()).map(|_| scale * (2.0 * rng.gen::<f64>() - 1.0)).collect();

            // d.g.f. agrees with the reference formula and is 1-strongly convex.
            let dz = case.dgf(&z);
            let dx = case.dgf(&x);
            if (case.setup.dgf(&x) - dx).abs() > 1e-12 * (1.0 + dx.abs()) {
                failures.push(format!("{name}: dgf mismatch"));
            }
            let gx = case.dgf_grad(&x);
            let lin: f64 = gx.iter().zip(z.iter().zip(&x)).map(|(g, (a, b))| g * (a - b)).sum();
            let diff: Vec<f64> = z.iter().zip(&x).map(|(a, b)| a - b).collect();
            let half_sq = 0.5 * case.norm(&diff).powi(2);
            if dz - dx - lin < half_sq - 1e-9 {
                failures.push(format!("{name}: strong convexity"));
            }
            tally[0] += 1;

            // Bregman lower bound.
            let v = case.setup.bregman(&x, &z).unwrap();
            if v < half_sq - 1e-9 {
                failures.push(format!("{name}: bregman {v} < {half_sq}"));
            }
            tally[1] += 1;

            // Optimality of the mirror step: ⟨y + ∇d(u) − ∇d(x), w − u⟩ ≥ 0.
            let u = case.setup.mirror_step(&x, &y);
            if !case.setup.contains(&u, 1e-12) {
                failures.push(format!("{name}: mirror step left the set"));
            }
            let gu = case.dgf_grad(&u);
            for _ in 0..4 {
                let w = case.sample(&mut rng);
                let vi: f64 = (0..case.n()).map(|i| (y[i] + gu[i] - gx[i]) * (w[i] - u[i])).sum();
                let size: f64 = (0..case.n()).map(|i| (y[i] + gu[i] - gx[i]).abs()).sum();
                if vi < -1e-9 * (1.0 + size) {
                    failures.push(format!("{name}: variational inequality {vi}"));
                }
            }
            tally[2] += 1;

            // Closed form against the numerical argmin.
            let num = case.numeric_argmin(&x, &y);
            let err = u.iter().zip(&num).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            max_argmin_err = max_argmin_err.max(err);
            if err > 1e-6 {
                failures.push(format!("{name}: argmin mismatch {err:.2e}"));
            }
            tally[3] += 1;
        }
    }
    let enough = counts.values().all(|t| t.iter().all(|c| *c >= SAMPLES));
    let summary: Vec<String> = counts
        .iter()
        .map(|(k, t)| format!("{k}: {}x4 checks", t[0]))
        .collect();
    let mut detail = format!(
        "{}; max |closed form - numerical argmin| = {max_argmin_err:.2e}",
        summary.join(", ")
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; {} failures, first: {}", failures.len(), failures[0]));
    }
    Verdict::new(enough && failures.is_empty(), detail)
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn c10() -> Verdict {
    let configs = |out: &Path| {
        vec![
            RunConfig {
                algorithm: OneOrMany::Many(vec![
                    Algorithm::Md,
                    Algorithm::RestartMd,
                    Algorithm::MdFixedBaseline,
                ]),
                eps: OneOrMany::Many(vec![0.1, 0.05]),
                seed: 42,
                output_dir: Some(out.to_path_buf()),
                ..RunConfig::new(P3_STRONGLY_CONVEX, Algorithm::Md, 0.1)
            },
            RunConfig {
                eps: OneOrMany::Many(vec![0.1, 0.05]),
                seed: 42,
                output_dir: Some(out.to_path_buf()),
                ..RunConfig::new(P2_MAXLIN_BOX, Algorithm::Md, 0.1)
            },
            RunConfig {
                seed: 42,
                output_dir: Some(out.to_path_buf()),
                ..RunConfig::new(P4_ENTROPY_SIMPLEX, Algorithm::Md, 0.05)
            },
        ]
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        for c in configs(dir) {
            let outcome = run(&c).unwrap();
            assert_eq!(outcome.exit_code(), 0, "{:?}", outcome.runs);
        }
    }
    let ta = read_tree(a.path());
    let tb = read_tree(b.path());
    let bytes: usize = ta.values().map(|v| v.len()).sum();
    let same = ta == tb;
    Verdict::new(
        same && !ta.is_empty(),
        format!("{} files, {bytes} bytes, identical = {same}", ta.len()),
    )
}

fn main() {
    let mut runs = Runs::default();
    let start = Instant::now();
    let criteria: Vec<(&str, Check)> = vec![
        ("plain MD accuracy on P1, P2, P4", Box::new(c1)),
        ("oracle calls match ceil(2 M^2 Theta0^2 / eps^2) within 1", Box::new(c2)),
        ("per-step inequality along every trace", Box::new(c3)),
        ("restart accuracy and complexity on P3", Box::new(c4)),
        ("1/eps vs 1/eps^2 scaling on P3", Box::new(c5)),
        ("radius contraction after every restart stage", Box::new(c6)),
        ("duality gap certificate on P2", Box::new(c7)),
        ("adaptive constant vs fixed-step baseline on P3", Box::new(c8)),
        ("geometry suite", Box::new(|_: &mut Runs| c9())),
        ("byte-identical artifacts", Box::new(|_: &mut Runs| c10())),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let v = check(&mut runs);
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{tag}] {name}: {}", i + 1, v.detail);
        if !v.passed {
            failed.push(i + 1);
        }
    }
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
