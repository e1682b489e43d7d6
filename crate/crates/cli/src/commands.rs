//! Subcommand implementations. Exit semantics: configuration problems
//! surface as `CliError::Config` (2), solver breakdowns as `Solver` (3),
//! failed diagnostic verdicts as `Verdict` (4).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use tdflow::analysis::{
    self, contraction_report, energy_identity_residual, evi_residual, DiagnosticsReport, StudyRow,
    StudyTable, Verdict,
};
use tdflow::catalog::{self, InitialSpec, OuParams};
use tdflow::euclidean::{ode_reference, EuclideanPoint, EuclideanProblem};
use tdflow::io::{self, StatePayload};
use tdflow::metric::{tau_star, ProxProblem};
use tdflow::ode::OdeOptions;
use tdflow::pde_oracle::{
    fokker_planck_fd, general_diffusion_fd, ou_gaussian_solution, FvTrajectory, GaussianState,
    GridDensity,
};
use tdflow::scheme::{self, apriori_check, build_partition, SchemeError, Trajectory};
use tdflow::wasserstein1d::{
    to_density, validate_hypotheses, QuantileMeasure, QuantileProblem, SamplePlan,
};

use crate::config::{OracleConfig, RunConfig, SpaceKind, StudyConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
    Verdict(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Verdict(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Solver(m) | CliError::Verdict(m) | CliError::Io(m) => m,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

pub fn out_dir(config: &RunConfig, flag: Option<&Path>) -> Result<PathBuf, CliError> {
    let dir = flag
        .map(Path::to_path_buf)
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("tdflow-out"));
    fs::create_dir_all(&dir).map_err(io_err)?;
    Ok(dir)
}

enum Instance {
    Euclidean(EuclideanProblem<catalog::EuclideanCatalog>),
    Wasserstein(QuantileProblem),
}

fn build_instance(config: &RunConfig) -> Result<Instance, CliError> {
    match config.space {
        SpaceKind::Euclidean => {
            let energy = catalog::euclidean_by_name(&config.functional.name, config.resolution)
                .map_err(|e| config_err(format!("functional.name: {e}")))?;
            Ok(Instance::Euclidean(EuclideanProblem::labelled(
                energy,
                config.functional.name.clone(),
            )))
        }
        SpaceKind::Wasserstein1d => {
            let terms =
                catalog::wasserstein_by_name(&config.functional.name, &config.functional.params)
                    .map_err(|e| config_err(format!("functional: {e}")))?;
            Ok(Instance::Wasserstein(QuantileProblem::new(
                config.resolution,
                terms,
            )))
        }
    }
}

fn run_one<Pr>(
    problem: &Pr,
    config: &RunConfig,
    initial: Pr::Point,
) -> Result<Trajectory<Pr::Point>, CliError>
where
    Pr: ProxProblem,
{
    let ts = tau_star(|s| problem.lambda(s), config.t_end);
    let partition = build_partition(config.t_end, &config.partition.to_spec(config.seed), ts)
        .map_err(|e| config_err(format!("partition: {e}")))?;
    scheme::run_minimizing_movement(problem, partition, initial).map_err(|e| match e {
        SchemeError::Invalid(err) => config_err(format!("initial: {err}")),
        other => CliError::Solver(other.to_string()),
    })
}

/// Shared diagnostics runner; `reference` is the zero point of the space
/// and `probe` the initial datum.
fn run_diagnostics<Pr>(
    problem: &Pr,
    traj: &Trajectory<Pr::Point>,
    config: &RunConfig,
    reference: &Pr::Point,
    probe: &Pr::Point,
) -> Result<DiagnosticsReport, CliError>
where
    Pr: ProxProblem,
{
    let mut report = DiagnosticsReport::new("diagnostics");
    let (diss_lhs, diss_rhs) = traj.dissipation_ledger();
    report.metrics.insert("dissipation_sum".into(), diss_lhs);
    report
        .metrics
        .insert("final_energy".into(), traj.energy_at_mark(traj.partition.num_steps()));
    report.verdicts.push(Verdict::check(
        "dissipation-ledger",
        "sum d^2/(2 tau) <= sum energy gaps",
        diss_lhs,
        diss_rhs,
        1e-10 * diss_rhs.abs().max(1.0),
        None,
    ));

    for spec in &config.diagnostics {
        match spec.name.as_str() {
            "energy_identity" => {
                let slack = spec.slack.unwrap_or(5e-3);
                let residual = energy_identity_residual(problem, traj)
                    .map_err(|e| CliError::Solver(e.to_string()))?;
                report.metrics.insert("energy_identity_residual".into(), residual);
                report.verdicts.push(Verdict::check(
                    "energy-identity",
                    "|identity residual| <= slack",
                    residual,
                    slack,
                    0.0,
                    None,
                ));
            }
            "evi" => {
                let slack = spec.slack.unwrap_or(1e-2);
                let series = evi_residual(problem, traj, probe)
                    .map_err(|e| CliError::Solver(e.to_string()))?;
                let worst = series.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                report.verdicts.push(Verdict::check(
                    "evi-residual",
                    "max residual <= slack",
                    worst,
                    slack,
                    0.0,
                    None,
                ));
                report.series.push(series);
            }
            "apriori" => {
                let d0 = problem.distance(reference, traj.state(0));
                let s_bound = spec
                    .s_bound
                    .unwrap_or_else(|| traj.initial_energy.max(d0 * d0) + 1.0);
                let a = apriori_check(problem, traj, s_bound, reference)
                    .map_err(|e| CliError::Solver(e.to_string()))?;
                report.metrics.insert("apriori_sup_dist_sq".into(), a.sup_dist_sq);
                report
                    .metrics
                    .insert("apriori_dissipation".into(), a.dissipation_sum);
                report.verdicts.push(Verdict::check(
                    "apriori-bounds",
                    "sup d^2 and dissipation within Gronwall bounds",
                    if a.passed { 0.0 } else { 1.0 },
                    0.0,
                    0.5,
                    (!a.hypothesis_ok).then(|| "small-mesh hypothesis violated".into()),
                ));
            }
            other => {
                return Err(config_err(format!(
                    "diagnostics.name: unknown diagnostic {other:?}"
                )))
            }
        }
    }
    Ok(report)
}

fn write_trajectory_artifacts<P: StatePayload>(
    dir: &Path,
    traj: &Trajectory<P>,
) -> Result<(), CliError> {
    io::write_trajectory(dir, traj).map_err(io_err)
}

fn finish(report: DiagnosticsReport, dir: &Path, summary: String) -> Result<(), CliError> {
    io::write_report(dir, &report).map_err(io_err)?;
    println!("{summary}");
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .verdicts
            .iter()
            .filter(|v| !v.passed)
            .map(|v| v.name.as_str())
            .collect();
        Err(CliError::Verdict(format!(
            "diagnostics failed: {}",
            failed.join(", ")
        )))
    }
}

pub fn solve(config: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let dir = out_dir(config, out)?;
    match build_instance(config)? {
        Instance::Euclidean(problem) => {
            let u0 = config
                .initial
                .euclidean(config.resolution)
                .map_err(config_err)?;
            let traj = run_one(&problem, config, u0.clone())?;
            write_trajectory_artifacts(&dir, &traj)?;
            let reference = EuclideanPoint(vec![0.0; config.resolution]);
            let report = run_diagnostics(&problem, &traj, config, &reference, &u0)?;
            let summary = format!(
                "solve space=euclidean functional={} steps={} t_end={} final_energy={:.6e} out={}",
                config.functional.name,
                traj.partition.num_steps(),
                config.t_end,
                traj.energy_at_mark(traj.partition.num_steps()),
                dir.display()
            );
            finish(report, &dir, summary)
        }
        Instance::Wasserstein(problem) => {
            let u0 = config
                .initial
                .quantile(config.resolution)
                .map_err(config_err)?;
            let traj = run_one(&problem, config, u0.clone())?;
            write_trajectory_artifacts(&dir, &traj)?;
            write_density_artifacts(&dir, &traj)?;
            let reference = QuantileMeasure::dirac(config.resolution, 0.0).map_err(io_err)?;
            let report = run_diagnostics(&problem, &traj, config, &reference, &u0)?;
            let summary = format!(
                "solve space=wasserstein1d functional={} steps={} t_end={} final_energy={:.6e} out={}",
                config.functional.name,
                traj.partition.num_steps(),
                config.t_end,
                traj.energy_at_mark(traj.partition.num_steps()),
                dir.display()
            );
            finish(report, &dir, summary)
        }
    }
}

fn write_density_artifacts(dir: &Path, traj: &Trajectory<QuantileMeasure>) -> Result<(), CliError> {
    let last = traj.final_state();
    let q = last.values();
    let span = (q[q.len() - 1] - q[0]).max(1e-6);
    let (lo, hi) = (q[0] - 0.25 * span, q[q.len() - 1] + 0.25 * span);
    if let Ok(rho) = to_density(last, lo, hi, 512) {
        fs::write(dir.join("final_density.csv"), io::density_csv(&rho)).map_err(io_err)?;
    }
    fs::write(dir.join("final_quantiles.csv"), io::quantile_csv(last)).map_err(io_err)?;
    Ok(())
}

pub fn validate(config: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let dir = out_dir(config, out)?;
    let Instance::Wasserstein(problem) = build_instance(config)? else {
        return Err(config_err(
            "space: hypothesis validation applies to wasserstein1d functionals",
        ));
    };
    let plan = SamplePlan::default_plan(config.seed);
    let report = validate_hypotheses(&problem.terms, &plan);
    fs::write(
        dir.join("hypotheses.json"),
        serde_json::to_string_pretty(&report).map_err(io_err)?,
    )
    .map_err(io_err)?;
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    println!(
        "validate functional={} checks={} failed={} out={}",
        config.functional.name,
        report.checks.len(),
        failed.len(),
        dir.display()
    );
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verdict(format!(
            "hypothesis checks failed: {}",
            failed.join(", ")
        )))
    }
}

pub fn compare(config: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let dir = out_dir(config, out)?;
    let Some(initial_b) = &config.initial_b else {
        return Err(config_err("initial_b: required by the compare command"));
    };
    let slack = config
        .diagnostics
        .iter()
        .find(|d| d.name == "contraction")
        .and_then(|d| d.slack)
        .unwrap_or(1e-2);
    let report = match build_instance(config)? {
        Instance::Euclidean(problem) => {
            let a = run_one(
                &problem,
                config,
                config
                    .initial
                    .euclidean(config.resolution)
                    .map_err(config_err)?,
            )?;
            let b = run_one(
                &problem,
                config,
                initial_b.euclidean(config.resolution).map_err(config_err)?,
            )?;
            contraction_report(&problem, &a, &b, slack).map_err(|e| CliError::Solver(e.to_string()))?
        }
        Instance::Wasserstein(problem) => {
            let a = run_one(
                &problem,
                config,
                config
                    .initial
                    .quantile(config.resolution)
                    .map_err(config_err)?,
            )?;
            let b = run_one(
                &problem,
                config,
                initial_b.quantile(config.resolution).map_err(config_err)?,
            )?;
            contraction_report(&problem, &a, &b, slack).map_err(|e| CliError::Solver(e.to_string()))?
        }
    };
    let summary = format!(
        "compare functional={} slack={} worst_margin={:.3e} out={}",
        config.functional.name, slack, report.metrics["worst_margin"], dir.display()
    );
    finish(report, &dir, summary)
}

pub fn study(config: &RunConfig, out: Option<&Path>, threads: usize) -> Result<(), CliError> {
    let dir = out_dir(config, out)?;
    let Some(StudyConfig { tau_ladder, min_order }) = config.study.clone() else {
        return Err(config_err("study: section required by the study command"));
    };
    if tau_ladder.is_empty() || tau_ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(config_err("study.tau_ladder: must be strictly decreasing"));
    }
    let rows = match build_instance(config)? {
        Instance::Euclidean(problem) => {
            let u0 = config
                .initial
                .euclidean(config.resolution)
                .map_err(config_err)?;
            let energy = problem.energy.clone();
            let start = u0.clone();
            let oracle = move |t: f64| -> tdflow::Result<EuclideanPoint> {
                if t <= 0.0 {
                    return Ok(start.clone());
                }
                let sol = ode_reference(&energy, &start, &[t], &OdeOptions::default())?;
                Ok(EuclideanPoint(sol.sample(t).expect("sampled").to_vec()))
            };
            ladder_rows(&problem, &u0, config.t_end, &tau_ladder, threads, oracle)?
        }
        Instance::Wasserstein(problem) => {
            let u0 = config
                .initial
                .quantile(config.resolution)
                .map_err(config_err)?;
            match gaussian_moment_oracle(config)? {
                Some((g0, a, m, k)) => {
                    let n = config.resolution;
                    let oracle = move |t: f64| -> tdflow::Result<QuantileMeasure> {
                        let g = ou_gaussian_solution(&a, &m, &k, g0, t)?;
                        QuantileMeasure::gaussian(n, g.mean, g.variance.sqrt())
                    };
                    ladder_rows(&problem, &u0, config.t_end, &tau_ladder, threads, oracle)?
                }
                None => {
                    // Self-convergence against a run at an eighth of the
                    // finest requested step.
                    let fine_tau = tau_ladder.last().unwrap() / 8.0;
                    let ts = tau_star(|s| problem.lambda(s), config.t_end);
                    let partition = build_partition(
                        config.t_end,
                        &tdflow::scheme::PartitionSpec::Uniform { step: fine_tau },
                        ts,
                    )
                    .map_err(|e| config_err(format!("study.tau_ladder: {e}")))?;
                    let fine = scheme::run_minimizing_movement(&problem, partition, u0.clone())
                        .map_err(|e| CliError::Solver(e.to_string()))?;
                    let oracle = move |t: f64| -> tdflow::Result<QuantileMeasure> {
                        let state = match fine.partition.cell_containing(t)? {
                            Some(n) => fine.state(n),
                            None => fine.state(0),
                        };
                        Ok(state.clone())
                    };
                    ladder_rows(&problem, &u0, config.t_end, &tau_ladder, threads, oracle)?
                }
            }
        }
    };
    let table = StudyTable {
        order: analysis::fit_order(&rows),
        rows,
    };

    let mut csv = String::from("tau,sup_error\n");
    for r in &table.rows {
        let _ = writeln!(csv, "{},{}", r.tau, r.sup_error);
    }
    fs::write(dir.join("study.csv"), csv).map_err(io_err)?;
    let verdict = serde_json::json!({
        "report_version": analysis::REPORT_VERSION,
        "rows": table.rows,
        "order": table.order,
        "min_order": min_order,
        "passed": match (table.order, min_order) {
            (Some(o), Some(m)) => o >= m,
            _ => true,
        },
    });
    fs::write(
        dir.join("study.json"),
        serde_json::to_string_pretty(&verdict).map_err(io_err)?,
    )
    .map_err(io_err)?;
    println!(
        "study functional={} ladder={:?} order={} out={}",
        config.functional.name,
        table.rows.iter().map(|r| r.tau).collect::<Vec<_>>(),
        table
            .order
            .map_or("absent".to_string(), |o| format!("{o:.3}")),
        dir.display()
    );
    match (table.order, min_order) {
        (Some(o), Some(m)) if o < m => Err(CliError::Verdict(format!(
            "fitted order {o:.3} below required {m}"
        ))),
        _ => Ok(()),
    }
}

/// Runs ladder entries, chunked over at most `threads` scoped workers;
/// results keep ladder order.
fn ladder_rows<Pr, O>(
    problem: &Pr,
    initial: &Pr::Point,
    t_end: f64,
    taus: &[f64],
    threads: usize,
    oracle: O,
) -> Result<Vec<StudyRow>, CliError>
where
    Pr: ProxProblem + Sync,
    Pr::Point: Send + Sync,
    O: Fn(f64) -> tdflow::Result<Pr::Point> + Sync,
{
    let workers = threads.max(1).min(taus.len());
    let mut results: Vec<Option<tdflow::Result<StudyRow>>> = Vec::new();
    results.resize_with(taus.len(), || None);
    let chunk = taus.len().div_ceil(workers);
    std::thread::scope(|scope| {
        for (slot, taus_chunk) in results.chunks_mut(chunk).zip(taus.chunks(chunk)) {
            let oracle = &oracle;
            scope.spawn(move || {
                for (out, &tau) in slot.iter_mut().zip(taus_chunk) {
                    *out = Some(analysis::study_single(problem, initial, t_end, tau, oracle));
                }
            });
        }
    });
    results
        .into_iter()
        .map(|r| {
            r.expect("worker filled slot").map_err(|e| match e {
                tdflow::Error::Precondition(msg) => config_err(format!("study.tau_ladder: {msg}")),
                other => CliError::Solver(other.to_string()),
            })
        })
        .collect()
}

/// Moment-evolution oracle pieces when the functional is the confinement
/// catalog entry and the initial datum is Gaussian.
type MomentOracle = (
    GaussianState,
    Box<dyn Fn(f64) -> f64 + Send + Sync>,
    Box<dyn Fn(f64) -> f64 + Send + Sync>,
    Box<dyn Fn(f64) -> f64 + Send + Sync>,
);

fn gaussian_moment_oracle(config: &RunConfig) -> Result<Option<MomentOracle>, CliError> {
    if config.functional.name != "ou_fokker_planck" {
        return Ok(None);
    }
    let InitialSpec::Gaussian { mean, variance } = &config.initial else {
        return Ok(None);
    };
    let params: OuParams = serde_json::from_value(config.functional.params.clone())
        .map_err(|e| config_err(format!("functional.params: {e}")))?;
    let g0 = GaussianState::new(*mean, *variance).map_err(config_err)?;
    let (a0, a1, m_amp) = (params.a0, params.a1, params.m_amplitude);
    let kappa = params.kappa;
    let k = move |t: f64| match kappa {
        catalog::KappaSpec::Constant { value } => value,
        catalog::KappaSpec::InverseLinear { scale } => scale / (1.0 + t),
        catalog::KappaSpec::ExpDecay { scale } => scale * (-t).exp(),
    };
    Ok(Some((
        g0,
        Box::new(move |t| a0 + a1 * t),
        Box::new(move |t| m_amp * t.sin()),
        Box::new(k),
    )))
}

pub fn oracle(config: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let dir = out_dir(config, out)?;
    let Some(oracle_cfg) = &config.oracle else {
        return Err(config_err("oracle: section required by the oracle command"));
    };
    match oracle_cfg {
        OracleConfig::OuGaussian { mean, variance, times } => {
            let Some((_, a, m, k)) = gaussian_moment_oracle(&with_gaussian_initial(
                config, *mean, *variance,
            ))?
            else {
                return Err(config_err(
                    "oracle.kind: ou_gaussian requires the ou_fokker_planck functional",
                ));
            };
            let g0 = GaussianState::new(*mean, *variance).map_err(config_err)?;
            let mut states = Vec::with_capacity(times.len());
            for &t in times {
                states.push(
                    ou_gaussian_solution(&a, &m, &k, g0, t)
                        .map_err(|e| CliError::Solver(e.to_string()))?,
                );
            }
            fs::write(
                dir.join("oracle_series.csv"),
                io::gaussian_series_csv(times, &states),
            )
            .map_err(io_err)?;
            println!(
                "oracle kind=ou_gaussian samples={} out={}",
                times.len(),
                dir.display()
            );
            Ok(())
        }
        OracleConfig::FokkerPlanck { grid, dt, times } => {
            let Instance::Wasserstein(problem) = build_instance(config)? else {
                return Err(config_err("space: oracle runs use wasserstein1d functionals"));
            };
            let rho0 = initial_density(config, grid.x_min, grid.x_max, grid.cells)?;
            let terms = problem.terms;
            let kappa = terms
                .entropy
                .as_ref()
                .map(|e| e.kappa.clone())
                .ok_or_else(|| config_err("functional: oracle needs an entropy term"))?;
            let grad_v = terms.potential.as_ref().map(|p| p.gradient.clone());
            let traj = fokker_planck_fd(
                move |t, x| grad_v.as_ref().map_or(0.0, |g| g(t, x)),
                move |t| kappa(t),
                &rho0,
                config.t_end,
                *dt,
                times,
            )
            .map_err(|e| CliError::Solver(e.to_string()))?;
            write_frames(&dir, &traj)?;
            println!(
                "oracle kind=fokker_planck frames={} steps={} out={}",
                traj.frames.len(),
                traj.steps,
                dir.display()
            );
            Ok(())
        }
        OracleConfig::GeneralDiffusion { grid, dt, times } => {
            let Instance::Wasserstein(problem) = build_instance(config)? else {
                return Err(config_err("space: oracle runs use wasserstein1d functionals"));
            };
            let rho0 = initial_density(config, grid.x_min, grid.x_max, grid.cells)?;
            let terms = problem.terms;
            let internal = terms
                .internal
                .clone()
                .ok_or_else(|| config_err("functional: oracle needs an internal-energy term"))?;
            let pressure =
                move |t: f64, z: f64| z * (internal.dz)(t, z) - (internal.value)(t, z);
            let grad_v = terms.potential.as_ref().map(|p| p.gradient.clone());
            let grad_w = terms.interaction.as_ref().map(|w| w.gradient_x.clone());
            let traj = general_diffusion_fd(
                pressure,
                grad_v.map(|g| move |t: f64, x: f64| g(t, x)),
                // Interaction kernels in the catalog are difference kernels;
                // the convolution evaluates the gradient at (x - y, 0).
                grad_w.map(|g| move |t: f64, d: f64| g(t, d, 0.0)),
                &rho0,
                config.t_end,
                *dt,
                times,
            )
            .map_err(|e| CliError::Solver(e.to_string()))?;
            write_frames(&dir, &traj)?;
            println!(
                "oracle kind=general_diffusion frames={} steps={} out={}",
                traj.frames.len(),
                traj.steps,
                dir.display()
            );
            Ok(())
        }
    }
}

fn with_gaussian_initial(config: &RunConfig, mean: f64, variance: f64) -> RunConfig {
    let mut c = config.clone();
    c.initial = InitialSpec::Gaussian { mean, variance };
    c
}

fn initial_density(
    config: &RunConfig,
    x_min: f64,
    x_max: f64,
    cells: usize,
) -> Result<GridDensity, CliError> {
    let norm = |m: f64, v: f64, x: f64| (-(x - m) * (x - m) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
    match &config.initial {
        InitialSpec::Gaussian { mean, variance } => {
            GridDensity::from_fn(x_min, x_max, cells, |x| norm(*mean, *variance, x))
                .map_err(config_err)
        }
        InitialSpec::Uniform { a, b } => {
            GridDensity::from_fn(x_min, x_max, cells, |x| {
                if x >= *a && x <= *b {
                    1.0
                } else {
                    0.0
                }
            })
            .map_err(config_err)
        }
        InitialSpec::GaussianMixture { components } => {
            let comps = components.clone();
            GridDensity::from_fn(x_min, x_max, cells, |x| {
                comps.iter().map(|(w, m, s)| w * norm(*m, s * s, x)).sum()
            })
            .map_err(config_err)
        }
        _ => Err(config_err(
            "initial: oracle runs need a density-valued initial datum",
        )),
    }
}

fn write_frames(dir: &Path, traj: &FvTrajectory) -> Result<(), CliError> {
    let mut csv = String::from("t,x,rho\n");
    for (t, frame) in traj.times.iter().zip(&traj.frames) {
        for (i, c) in frame.cells.iter().enumerate() {
            let _ = writeln!(csv, "{t},{},{}", frame.center(i), c);
        }
    }
    fs::write(dir.join("oracle_frames.csv"), csv).map_err(io_err)?;
    Ok(())
}
