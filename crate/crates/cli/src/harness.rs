//! Executes run configurations and writes their artifacts.
//!
//! Layout under the output root:
//!
//! ```text
//! <problem>/<algorithm>/eps_<eps>/trace.csv
//!                                 summary.json
//!                                 stages.csv        (restart_md)
//!                                 certificate.json  (md, when a Slater point is known)
//!                                 error.json        (failed runs only)
//! <problem>/comparison.csv                          (sweeps)
//! ```
//!
//! Each run directory is assembled under a temporary name and renamed into
//! place, so readers never see a half-written run.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mdcon::md::lemma1_violations;
use mdcon::report::{stage_rows, write_stages_csv, write_trace_csv};
use mdcon::{
    baseline_fixed_md, builtin, duality_gap, recover_multipliers, solve_md_with, solve_restart_with,
    DualCertificate, InnerSolver, IterationRecord, MdOptions, MdResult, MirrorGeometry, Point,
    ProblemDescription, ProblemInstance, ProximalSetup, RestartOptions, RestartReport,
    RestartVariant, SetupKind, Termination,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, RunConfig};
use crate::error::{ErrorRecord, HarnessError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledChecks {
    pub seed: u64,
    /// Reference points: x* when known plus random points of X.
    pub references: usize,
    pub lemma1_steps_checked: usize,
    pub lemma1_violations: usize,
    pub weak_duality_samples: usize,
    pub weak_duality_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub variant: RestartVariant,
    pub k: usize,
    pub mu: f64,
    pub r0_sq: f64,
    pub omega: f64,
    pub total_calls: usize,
    /// ⌈4M²ω/(με)⌉ with the run's effective M.
    pub theorem_calls: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub algorithm: Algorithm,
    pub eps: f64,
    pub geometry: ProximalSetup,
    pub theta0_sq: f64,
    pub n_calls: usize,
    pub productive_steps: usize,
    pub nonproductive_steps: usize,
    pub effective_m: f64,
    pub certified_eps: f64,
    pub theorem_calls: u64,
    pub lipschitz_hint: Option<f64>,
    pub x_final: Point,
    pub f_value: f64,
    pub f_star: Option<f64>,
    pub f_star_resolution: Option<f64>,
    pub f_gap: Option<f64>,
    pub g_value_at_xbar: f64,
    pub termination: Option<Termination>,
    pub restart: Option<RestartSummary>,
    pub duality_gap: Option<f64>,
    pub sampled_checks: SampledChecks,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_s: Option<f64>,
}

/// One line of `comparison.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: Algorithm,
    pub eps: f64,
    pub n_calls: usize,
    pub theorem_calls: u64,
    pub effective_m: f64,
    pub lipschitz_hint: Option<f64>,
    /// effective_m / lipschitz_hint.
    pub m_ratio: Option<f64>,
    pub f_gap: Option<f64>,
    pub g_at_solution: f64,
    pub duality_gap: Option<f64>,
    pub wall_time: Option<f64>,
}

impl From<&RunSummary> for ComparisonRow {
    fn from(s: &RunSummary) -> Self {
        Self {
            algorithm: s.algorithm,
            eps: s.eps,
            n_calls: s.n_calls,
            theorem_calls: s.theorem_calls,
            effective_m: s.effective_m,
            lipschitz_hint: s.lipschitz_hint,
            m_ratio: s.lipschitz_hint.map(|l| s.effective_m / l),
            f_gap: s.f_gap,
            g_at_solution: s.g_value_at_xbar,
            duality_gap: s.duality_gap,
            wall_time: s.wall_time_s,
        }
    }
}

#[derive(Debug)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub eps: f64,
    pub dir: PathBuf,
    pub outcome: Result<RunSummary, ErrorRecord>,
}

#[derive(Debug)]
pub struct Outcome {
    pub root: PathBuf,
    pub runs: Vec<RunRecord>,
    pub comparison: Option<PathBuf>,
}

impl Outcome {
    /// 0 when every run converged, else the code of the first failure.
    pub fn exit_code(&self) -> i32 {
        self.runs
            .iter()
            .find_map(|r| r.outcome.as_ref().err().map(|e| e.exit_code))
            .unwrap_or(0)
    }
}

pub fn load_problem(config: &RunConfig) -> Result<ProblemInstance, HarnessError> {
    let problem = if let Some(path) = &config.problem_file {
        let text = fs::read_to_string(path).map_err(HarnessError::io(path))?;
        let desc: ProblemDescription =
            serde_json::from_str(&text).map_err(|source| HarnessError::Json {
                path: path.clone(),
                source,
            })?;
        ProblemInstance::from_description(desc).map_err(|e| HarnessError::Config(e.to_string()))?
    } else {
        let id = config.problem.as_deref().unwrap_or_default();
        builtin(id).ok_or_else(|| HarnessError::UnknownProblem(id.to_string()))?
    };
    match &config.geometry {
        None => Ok(problem),
        Some(spec) => {
            let setup = ProximalSetup::try_from(spec.clone()).map_err(HarnessError::Geometry)?;
            problem.with_setup(setup).map_err(HarnessError::Geometry)
        }
    }
}

/// Runs every (algorithm, eps) pair of the config, in parallel, and writes
/// the artifacts. Errors of individual runs are recorded per run; only
/// problems with the config itself are returned as `Err`.
pub fn run(config: &RunConfig) -> Result<Outcome, HarnessError> {
    config.validate()?;
    let problem = load_problem(config)?;
    let root = config.output_root();
    let problem_dir = root.join(&problem.id);
    fs::create_dir_all(&problem_dir).map_err(HarnessError::io(&problem_dir))?;

    let jobs: Vec<(Algorithm, f64)> = config
        .algorithms()
        .into_iter()
        .flat_map(|a| config.eps_values().into_iter().map(move |e| (a, e)))
        .collect();
    let runs: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(algorithm, eps)| {
            let dir = problem_dir.join(algorithm.as_str()).join(format!("eps_{eps}"));
            let outcome = match execute(config, &problem, algorithm, eps) {
                Ok(artifacts) => artifacts.write(&dir).map(|()| artifacts.summary),
                Err(e) => write_error(&dir, &e).and(Err(e)),
            };
            RunRecord {
                algorithm,
                eps,
                dir,
                outcome: outcome.map_err(|e| e.record()),
            }
        })
        .collect();

    let comparison = if jobs.len() > 1 {
        let rows: Vec<ComparisonRow> = runs
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(ComparisonRow::from))
            .collect();
        let path = problem_dir.join("comparison.csv");
        let mut buf = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            for row in &rows {
                w.serialize(row)
                    .map_err(|e| HarnessError::Solver(mdcon::Error::Csv(e)))?;
            }
            w.flush().map_err(HarnessError::io(&path))?;
        }
        write_atomic(&path, &buf)?;
        Some(path)
    } else {
        None
    };
    Ok(Outcome {
        root,
        runs,
        comparison,
    })
}

struct Artifacts {
    summary: RunSummary,
    trace: Vec<u8>,
    stages: Option<Vec<u8>>,
    certificate: Option<DualCertificate>,
}

impl Artifacts {
    fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        let mut files: Vec<(&str, Vec<u8>)> = vec![
            ("summary.json", to_json(&self.summary)),
            ("trace.csv", self.trace.clone()),
        ];
        if let Some(s) = &self.stages {
            files.push(("stages.csv", s.clone()));
        }
        if let Some(c) = &self.certificate {
            files.push(("certificate.json", to_json(c)));
        }
        write_dir_atomic(dir, &files)
    }
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("summaries serialize");
    out.push(b'\n');
    out
}

fn write_error(dir: &Path, e: &HarnessError) -> Result<(), HarnessError> {
    write_dir_atomic(dir, &[("error.json", to_json(&e.record()))])
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(HarnessError::io(&tmp))?;
    fs::rename(&tmp, path).map_err(HarnessError::io(path))
}

fn write_dir_atomic(dir: &Path, files: &[(&str, Vec<u8>)]) -> Result<(), HarnessError> {
    let parent = dir.parent().expect("run directories are nested");
    fs::create_dir_all(parent).map_err(HarnessError::io(parent))?;
    let name = dir.file_name().expect("run directories are named").to_string_lossy();
    let staging = parent.join(format!(".{name}.partial"));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(HarnessError::io(&staging))?;
    }
    fs::create_dir(&staging).map_err(HarnessError::io(&staging))?;
    for (file, bytes) in files {
        let p = staging.join(file);
        fs::write(&p, bytes).map_err(HarnessError::io(&p))?;
    }
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(HarnessError::io(dir))?;
    }
    fs::rename(&staging, dir).map_err(HarnessError::io(dir))
}

fn execute(
    config: &RunConfig,
    problem: &ProblemInstance,
    algorithm: Algorithm,
    eps: f64,
) -> Result<Artifacts, HarnessError> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let references = reference_points(problem, config.samples, &mut rng);
    let mut checks = SampledChecks {
        seed: config.seed,
        references: references.len(),
        lemma1_steps_checked: 0,
        lemma1_violations: 0,
        weak_duality_samples: 0,
        weak_duality_violations: 0,
    };

    let (mut summary, trace, stages, certificate) = match algorithm {
        Algorithm::Md | Algorithm::MdFixedBaseline => {
            let result = if algorithm == Algorithm::Md {
                let opts = MdOptions {
                    max_iters: config.max_iters,
                    ..MdOptions::new(eps, problem.theta0_sq)
                };
                solve_md_with(problem, &problem.setup, &opts)?
            } else {
                if problem.lipschitz_hint().is_none() {
                    return Err(HarnessError::Config(format!(
                        "{} has no Lipschitz hint for the fixed-step baseline",
                        problem.id
                    )));
                }
                baseline_fixed_md(problem, eps, &problem.setup)?
            };
            for r in &references {
                checks.lemma1_violations += lemma1_violations(&result, problem, &problem.setup, r)?.len();
                checks.lemma1_steps_checked += result.trace.len();
            }
            let certificate = if algorithm == Algorithm::Md && problem.slater_point.is_some() {
                let lambda = recover_multipliers(&result, problem.constraint.num_parts())?;
                let cert = duality_gap(&result, &lambda, problem, &InnerSolver::auto(problem, eps))?;
                weak_duality_checks(problem, &cert, config.samples, &mut rng, &mut checks);
                Some(cert)
            } else {
                None
            };
            let summary = md_summary(problem, algorithm, &result, certificate.as_ref(), checks.clone());
            (summary, trace_bytes(&result.trace)?, None, certificate)
        }
        Algorithm::RestartMd => {
            if problem.mu <= 0.0 || problem.mu.is_nan() {
                return Err(HarnessError::Config(format!(
                    "{} is not strongly convex (mu = {}); restart_md needs mu > 0",
                    problem.id, problem.mu
                )));
            }
            let r0_sq = problem.r0_sq.ok_or_else(|| {
                HarnessError::Config(format!("{} has no r0_sq for restarts", problem.id))
            })?;
            let opts = RestartOptions {
                variant: config.restart_variant,
                max_iters: config.max_iters,
            };
            let report = solve_restart_with(problem, eps, problem.mu, r0_sq, &problem.setup, &opts)?;
            for stage in &report.stages {
                let geometry = problem.setup.rescale(&stage.center, 1.0)?;
                for r in &references {
                    checks.lemma1_violations +=
                        lemma1_violations(&stage.result, problem, &geometry, r)?.len();
                    checks.lemma1_steps_checked += stage.result.trace.len();
                }
            }
            let mut stages = Vec::new();
            write_stages_csv(&mut stages, &stage_rows(&report))?;
            let trace: Vec<&IterationRecord> =
                report.stages.iter().flat_map(|s| &s.result.trace).collect();
            let summary = restart_summary(problem, eps, &report, checks.clone());
            (summary, trace_bytes(trace)?, Some(stages), None)
        }
    };
    summary.sampled_checks = checks;
    if config.record_timing {
        summary.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(Artifacts {
        summary,
        trace,
        stages,
        certificate,
    })
}

fn trace_bytes<'a>(trace: impl IntoIterator<Item = &'a IterationRecord>) -> Result<Vec<u8>, HarnessError> {
    // Restart traces are concatenated stage by stage; renumber them globally.
    let rows: Vec<IterationRecord> = trace
        .into_iter()
        .enumerate()
        .map(|(i, r)| IterationRecord { index: i, ..r.clone() })
        .collect();
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, &rows)?;
    Ok(buf)
}

fn gap_fields(problem: &ProblemInstance, x: &Point) -> (f64, Option<f64>, Option<f64>, Option<f64>) {
    let f_value = problem.f(x);
    match &problem.known_opt {
        Some(k) => (f_value, Some(k.value), Some(k.resolution), Some(f_value - k.value)),
        None => (f_value, None, None, None),
    }
}

fn md_summary(
    problem: &ProblemInstance,
    algorithm: Algorithm,
    r: &MdResult,
    certificate: Option<&DualCertificate>,
    sampled_checks: SampledChecks,
) -> RunSummary {
    let (f_value, f_star, f_star_resolution, f_gap) = gap_fields(problem, &r.x_bar);
    RunSummary {
        problem: problem.id.clone(),
        algorithm,
        eps: r.eps,
        geometry: problem.setup.clone(),
        theta0_sq: r.theta_sq,
        n_calls: r.n_calls,
        productive_steps: r.productive.len(),
        nonproductive_steps: r.nonproductive.len(),
        effective_m: r.effective_m,
        certified_eps: r.certified_eps,
        theorem_calls: r.theorem_calls(),
        lipschitz_hint: problem.lipschitz_hint(),
        x_final: r.x_bar.clone(),
        f_value,
        f_star,
        f_star_resolution,
        f_gap,
        g_value_at_xbar: problem.g(&r.x_bar),
        termination: Some(r.termination),
        restart: None,
        duality_gap: certificate.map(|c| c.gap),
        sampled_checks,
        wall_time_s: None,
    }
}

fn restart_summary(
    problem: &ProblemInstance,
    eps: f64,
    report: &RestartReport,
    sampled_checks: SampledChecks,
) -> RunSummary {
    let (f_value, f_star, f_star_resolution, f_gap) = gap_fields(problem, &report.x_final);
    let s = &report.schedule;
    let count = |pred: fn(&MdResult) -> usize| report.stages.iter().map(|st| pred(&st.result)).sum();
    let last = report.stages.last().map(|st| &st.result);
    RunSummary {
        problem: problem.id.clone(),
        algorithm: Algorithm::RestartMd,
        eps,
        geometry: problem.setup.clone(),
        theta0_sq: problem.theta0_sq,
        n_calls: report.total_calls,
        productive_steps: count(|r| r.productive.len()),
        nonproductive_steps: count(|r| r.nonproductive.len()),
        effective_m: report.effective_m,
        certified_eps: last.map_or(f64::NAN, |r| r.certified_eps),
        theorem_calls: report.theorem_calls(),
        lipschitz_hint: problem.lipschitz_hint(),
        x_final: report.x_final.clone(),
        f_value,
        f_star,
        f_star_resolution,
        f_gap,
        g_value_at_xbar: problem.g(&report.x_final),
        termination: last.map(|r| r.termination),
        restart: Some(RestartSummary {
            variant: report.variant,
            k: s.k,
            mu: s.mu,
            r0_sq: s.r0_sq,
            omega: s.omega,
            total_calls: report.total_calls,
            theorem_calls: report.theorem_calls(),
        }),
        duality_gap: None,
        sampled_checks,
        wall_time_s: None,
    }
}

/// x* (when known) followed by `samples` random points of X.
fn reference_points(problem: &ProblemInstance, samples: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let mut refs: Vec<Point> = problem.known_opt.iter().map(|k| k.point.clone()).collect();
    refs.extend((0..samples).map(|_| sample_point(&problem.setup, rng)));
    refs
}

fn weak_duality_checks(
    problem: &ProblemInstance,
    cert: &DualCertificate,
    samples: usize,
    rng: &mut ChaCha8Rng,
    checks: &mut SampledChecks,
) {
    // φ(λ) ≤ f(x) for feasible x; try a bounded number of draws.
    for _ in 0..samples * 50 {
        if checks.weak_duality_samples == samples {
            break;
        }
        let x = sample_point(&problem.setup, rng);
        if problem.g(&x) > 0.0 {
            continue;
        }
        checks.weak_duality_samples += 1;
        if cert.dual_value > problem.f(&x) + cert.inner_tolerance {
            checks.weak_duality_violations += 1;
        }
    }
}

/// A random point of the feasible set. Uniform on boxes and simplices; on
/// balls, cube draws falling outside are pulled inside along their ray.
pub fn sample_point<R: Rng>(setup: &ProximalSetup, rng: &mut R) -> Point {
    let n = setup.dim();
    let v: Vec<f64> = match setup.kind() {
        SetupKind::Box { lower, upper } => lower
            .iter()
            .zip(upper)
            .map(|(l, u)| l + (u - l) * rng.gen::<f64>())
            .collect(),
        SetupKind::EuclideanBall { radius } => {
            let mut x: Vec<f64> = (0..n).map(|_| radius * (2.0 * rng.gen::<f64>() - 1.0)).collect();
            let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > *radius {
                let s = radius * rng.gen::<f64>() / norm;
                x.iter_mut().for_each(|a| *a *= s);
            }
            x
        }
        SetupKind::EntropySimplex => {
            let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            let total: f64 = e.iter().sum();
            e.iter().map(|a| a / total).collect()
        }
    };
    let p = Point::new(v).expect("samples are finite");
    debug_assert!(setup.contains(&p, 1e-12));
    p
}
