//! Post-hoc verification of qualitative flow properties on computed
//! trajectories: contraction between runs, the energy identity, evolution
//! variational inequality residuals, local-slope estimators, and mesh
//! convergence studies.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::ProxProblem;
use crate::quad::{self, CumulativeIntegral};
use crate::scheme::Trajectory;

pub const REPORT_VERSION: u32 = 1;

/// One tested inequality with both sides and a witness.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub witness: Option<String>,
}

impl Verdict {
    pub fn check(
        name: impl Into<String>,
        inequality: impl Into<String>,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        witness: Option<String>,
    ) -> Self {
        Verdict {
            name: name.into(),
            inequality: inequality.into(),
            lhs,
            rhs,
            tolerance,
            passed: lhs <= rhs + tolerance,
            witness,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Series {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Structured diagnostics output: named scalars, time series, verdicts.
#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticsReport {
    pub report_version: u32,
    pub name: String,
    pub metrics: BTreeMap<String, f64>,
    pub series: Vec<Series>,
    pub verdicts: Vec<Verdict>,
}

impl DiagnosticsReport {
    pub fn new(name: impl Into<String>) -> Self {
        DiagnosticsReport {
            report_version: REPORT_VERSION,
            name: name.into(),
            metrics: BTreeMap::new(),
            series: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

/// Checks `d(Uⁿ_A, Uⁿ_B) ≤ e^{-∫_0^{tⁿ} λ} · d(U⁰_A, U⁰_B) · (1 + slack)`
/// at every mark. Both runs must share the functional and the partition;
/// the verdict is symmetric in the two trajectories.
pub fn contraction_report<Pr: ProxProblem>(
    problem: &Pr,
    a: &Trajectory<Pr::Point>,
    b: &Trajectory<Pr::Point>,
    slack: f64,
) -> Result<DiagnosticsReport> {
    if a.partition != b.partition {
        return Err(Error::precondition("partition mismatch between runs"));
    }
    let marks = a.partition.marks();
    let lambda_mass = CumulativeIntegral::build(|s| problem.lambda(s), 0.0, a.partition.final_time());
    let d0 = problem.distance(a.state(0), b.state(0));

    let mut report = DiagnosticsReport::new("contraction");
    let mut dist = Vec::with_capacity(marks.len());
    let mut bound = Vec::with_capacity(marks.len());
    let mut worst: Option<(f64, f64, f64)> = None;
    for (n, &t) in marks.iter().enumerate() {
        let d = problem.distance(a.state(n), b.state(n));
        let envelope = (-lambda_mass.at(t)).exp() * d0 * (1.0 + slack);
        dist.push(d);
        bound.push(envelope);
        let margin = envelope - d;
        if worst.map_or(true, |(m, _, _)| margin < m) {
            worst = Some((margin, t, d));
        }
    }
    let (margin, t_worst, d_worst) = worst.unwrap_or((0.0, 0.0, 0.0));
    report.metrics.insert("initial_distance".into(), d0);
    report.metrics.insert("worst_margin".into(), margin);
    report.verdicts.push(Verdict::check(
        "contraction-envelope",
        "d(t) <= exp(-int lambda) d0 (1+slack)",
        d_worst,
        d_worst + margin,
        0.0,
        Some(format!("worst mark t = {t_worst}")),
    ));
    report.series.push(Series {
        name: "distance".into(),
        times: marks.to_vec(),
        values: dist,
    });
    report.series.push(Series {
        name: "bound".into(),
        times: marks.to_vec(),
        values: bound,
    });
    Ok(report)
}

/// Residual of the energy identity over the whole run:
/// `|ℰ(T,U^N) − ℰ(0,U⁰) − ∫∂_tℰ + ½∫|u'|² + ½∫|∂ℰ|²|` with the discrete
/// metric derivative standing in for both rate terms and trapezoid
/// quadrature of `∂_tℰ` on the marks.
pub fn energy_identity_residual<Pr: ProxProblem>(
    problem: &Pr,
    traj: &Trajectory<Pr::Point>,
) -> Result<f64> {
    let marks = traj.partition.marks();
    let dt_values: Vec<f64> = marks
        .iter()
        .enumerate()
        .map(|(n, &t)| {
            problem.time_derivative(t, traj.state(n)).ok_or_else(|| {
                Error::Unsupported("functional provides no time derivative".into())
            })
        })
        .collect::<Result<_>>()?;
    let dt_integral = quad::trapezoid(marks, &dt_values);
    let mut rate_integral = 0.0;
    for (j, rec) in traj.steps.iter().enumerate() {
        rate_integral += rec.distance_moved * rec.distance_moved / traj.partition.step(j + 1);
    }
    let delta_e = traj.energy_at_mark(traj.partition.num_steps()) - traj.initial_energy;
    Ok((delta_e - dt_integral + rate_integral).abs())
}

/// Integral-inequality residuals against a probe point over consecutive
/// marks `(s, t)`:
/// `½d²(u(t),V) − ½d²(u(s),V) + ∫_s^t [λ d²(u,V)/2 + ℰ(r,u(r))] dr − ∫_s^t ℰ(r,V) dr`.
/// Nonpositive values (within slack) are the expected outcome.
pub fn evi_residual<Pr: ProxProblem>(
    problem: &Pr,
    traj: &Trajectory<Pr::Point>,
    probe: &Pr::Point,
) -> Result<Series> {
    let marks = traj.partition.marks();
    let d_sq: Vec<f64> = (0..marks.len())
        .map(|n| {
            let d = problem.distance(traj.state(n), probe);
            d * d
        })
        .collect();
    let probe_energy: Vec<f64> = marks
        .iter()
        .map(|&t| {
            problem
                .energy(t, probe)
                .expect_finite("probe-point energy")
        })
        .collect::<Result<_>>()?;
    let mut times = Vec::with_capacity(marks.len() - 1);
    let mut values = Vec::with_capacity(marks.len() - 1);
    for n in 1..marks.len() {
        let (s, t) = (marks[n - 1], marks[n]);
        let integrand = |i: usize| {
            0.5 * problem.lambda(marks[i]) * d_sq[i] + traj.energy_at_mark(i) - probe_energy[i]
        };
        let integral = 0.5 * (integrand(n - 1) + integrand(n)) * (t - s);
        values.push(0.5 * d_sq[n] - 0.5 * d_sq[n - 1] + integral);
        times.push(t);
    }
    Ok(Series {
        name: "evi_residual".into(),
        times,
        values,
    })
}

/// Per-step discrete form of the same inequality, exact up to solver
/// tolerance at every prox step:
/// `d²(Uⁿ,V)/(2τ) − d²(Uⁿ⁻¹,V)/(2τ) + λ(tⁿ)d²(Uⁿ,V)/2 + ℰ(tⁿ,Uⁿ) ≤ ℰ(tⁿ,V)`.
pub fn discrete_evi_margins<Pr: ProxProblem>(
    problem: &Pr,
    traj: &Trajectory<Pr::Point>,
    probe: &Pr::Point,
) -> Result<Vec<f64>> {
    let marks = traj.partition.marks();
    let mut margins = Vec::with_capacity(traj.partition.num_steps());
    for n in 1..marks.len() {
        let t = marks[n];
        let tau = traj.partition.step(n);
        let d_prev = problem.distance(traj.state(n - 1), probe);
        let d_next = problem.distance(traj.state(n), probe);
        let lhs = d_next * d_next / (2.0 * tau) - d_prev * d_prev / (2.0 * tau)
            + 0.5 * problem.lambda(t) * d_next * d_next
            + traj.energy_at_mark(n);
        let rhs = problem.energy(t, probe).expect_finite("probe energy")?;
        margins.push(rhs - lhs);
    }
    Ok(margins)
}

/// Local-slope estimates at a point.
#[derive(Clone, Debug, Serialize)]
pub struct SlopeEstimate {
    /// `d(u, u_τ)/τ` down the ladder; last entry is the reported estimate.
    pub ladder: Vec<(f64, f64)>,
    pub ladder_estimate: f64,
    /// Sampled form `sup_v ((ℰ(u) − ℰ(v))/d + λ d/2)⁺` over the candidates.
    pub sampled_sup: f64,
}

pub fn local_slope_estimate<Pr: ProxProblem>(
    problem: &Pr,
    t: f64,
    u: &Pr::Point,
    taus: &[f64],
    candidates: &[Pr::Point],
) -> Result<SlopeEstimate> {
    if taus.is_empty() {
        return Err(Error::precondition("empty step ladder"));
    }
    let mut ladder = Vec::with_capacity(taus.len());
    for &tau in taus {
        let r = problem
            .prox(t, tau, u)
            .map_err(|e| Error::numeric(format!("ladder prox failed: {e}")))?;
        ladder.push((tau, r.distance_moved / tau));
    }
    let ladder_estimate = ladder.last().unwrap().1;
    let eu = problem.energy(t, u).expect_finite("slope base energy")?;
    let lam = problem.lambda(t);
    let mut sampled_sup = 0.0f64;
    for v in candidates {
        let d = problem.distance(u, v);
        if d <= 1e-14 {
            continue;
        }
        if let Some(ev) = problem.energy(t, v).finite() {
            sampled_sup = sampled_sup.max(((eu - ev) / d + 0.5 * lam * d).max(0.0));
        }
    }
    Ok(SlopeEstimate {
        ladder,
        ladder_estimate,
        sampled_sup,
    })
}

/// One row of a mesh-convergence study.
#[derive(Clone, Debug, Serialize)]
pub struct StudyRow {
    pub tau: f64,
    pub sup_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
    /// Fitted slope of `log error` against `log τ`; absent with < 2 rows.
    pub order: Option<f64>,
}

/// One ladder entry: runs the scheme at step `tau` and returns the sup
/// distance to the oracle over the marks.
pub fn study_single<Pr, O>(
    problem: &Pr,
    initial: &Pr::Point,
    t_end: f64,
    tau: f64,
    oracle: O,
) -> Result<StudyRow>
where
    Pr: ProxProblem,
    O: Fn(f64) -> Result<Pr::Point>,
{
    let tau_star = crate::metric::tau_star(|s| problem.lambda(s), t_end);
    let partition = crate::scheme::build_partition(
        t_end,
        &crate::scheme::PartitionSpec::Uniform { step: tau },
        tau_star,
    )?;
    let traj = crate::scheme::run_minimizing_movement(problem, partition, initial.clone())
        .map_err(|e| Error::numeric(format!("scheme run failed: {e}")))?;
    let mut sup = 0.0f64;
    for (n, &t) in traj.partition.marks().iter().enumerate() {
        sup = sup.max(problem.distance(traj.state(n), &oracle(t)?));
    }
    Ok(StudyRow {
        tau,
        sup_error: sup,
    })
}

/// Runs the scheme at each step size and measures the sup distance to the
/// oracle over the marks.
pub fn convergence_study<Pr, O>(
    problem: &Pr,
    initial: &Pr::Point,
    t_end: f64,
    taus: &[f64],
    oracle: O,
) -> Result<StudyTable>
where
    Pr: ProxProblem,
    O: Fn(f64) -> Result<Pr::Point>,
{
    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        rows.push(study_single(problem, initial, t_end, tau, &oracle)?);
    }
    Ok(StudyTable {
        order: fit_order(&rows),
        rows,
    })
}

/// Least-squares slope of log(error) vs log(τ), ignoring zero errors.
pub fn fit_order(rows: &[StudyRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.sup_error > 0.0)
        .map(|r| (r.tau.ln(), r.sup_error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclidean::{EuclideanPoint, EuclideanProblem, Quadratic};
    use crate::scheme::{build_partition, run_minimizing_movement, PartitionSpec};

    fn quadratic_run(u0: f64, step: f64) -> Trajectory<EuclideanPoint> {
        let problem = EuclideanProblem::new(Quadratic { dim: 1 });
        let p = build_partition(1.0, &PartitionSpec::Uniform { step }, 1.0).unwrap();
        run_minimizing_movement(&problem, p, EuclideanPoint::scalar(u0)).unwrap()
    }

    #[test]
    fn contraction_identical_initial_data() {
        let problem = EuclideanProblem::new(Quadratic { dim: 1 });
        let a = quadratic_run(1.0, 0.1);
        let b = quadratic_run(1.0, 0.1);
        let report = contraction_report(&problem, &a, &b, 0.0).unwrap();
        assert!(report.passed());
        assert_eq!(report.metrics["initial_distance"], 0.0);
    }

    #[test]
    fn contraction_geometric_vs_exponential() {
        // |Uⁿ_A - Uⁿ_B| = (1+τ)^{-n} = e^{-tⁿ}·e^{n(τ - ln(1+τ))}: the
        // iterates exceed the continuum envelope by a factor that is
        // first-order in τ, so the standard slack absorbs it.
        let problem = EuclideanProblem::new(Quadratic { dim: 1 });
        let a = quadratic_run(1.0, 0.01);
        let b = quadratic_run(0.0, 0.01);
        let report = contraction_report(&problem, &a, &b, 1e-2).unwrap();
        assert!(report.passed(), "{report:?}");
        // Without slack the first-order excess is visible.
        let strict = contraction_report(&problem, &a, &b, 0.0).unwrap();
        assert!(!strict.passed());
    }

    #[test]
    fn contraction_is_symmetric_in_runs() {
        let problem = EuclideanProblem::new(Quadratic { dim: 1 });
        let a = quadratic_run(1.0, 0.1);
        let b = quadratic_run(0.2, 0.1);
        let ab = contraction_report(&problem, &a, &b, 1e-2).unwrap();
        let ba = contraction_report(&problem, &b, &a, 1e-2).unwrap();
        assert_eq!(ab.passed(), ba.passed());
        assert!((ab.metrics["worst_margin"] - ba.metrics["worst_margin"]).abs() < 1e-14);
    }

    #[test]
    fn energy_identity_fixed_point_is_exact() {
        let problem = EuclideanProblem::new(Quadratic { dim: 1 });
        let traj = quadratic_run(0.0, 0.1);
        let r = energy_identity_residual(&problem, &traj).unwrap();
        assert!(r <= 1e-8, "residual {r}");
    }

    #[test]
    fn energy_identity_first_order_in_tau() {
        let problem = EuclideanProblem::new(Quadratic { dim: 1 });
        let coarse = energy_identity_residual(&problem, &quadratic_run(1.0, 2e-3)).unwrap();
        let fine = energy_identity_residual(&problem, &quadratic_run(1.0, 1e-3)).unwrap();
        assert!(fine <= 5e-3, "residual {fine}");
        assert!(fine <= 0.75 * coarse, "no first-order decay: {coarse} -> {fine}");
    }

    #[test]
    fn evi_residual_nonpositive_along_quadratic_flow() {
        let problem = EuclideanProblem::new(Quadratic { dim: 1 });
        let traj = quadratic_run(1.0, 1e-2);
        let series = evi_residual(&problem, &traj, &EuclideanPoint::scalar(0.0)).unwrap();
        for (t, v) in series.times.iter().zip(&series.values) {
            assert!(*v <= 1e-4, "t={t}: residual {v}");
        }
    }

    #[test]
    fn discrete_evi_holds_per_step() {
        let problem = EuclideanProblem::new(Quadratic { dim: 1 });
        let traj = quadratic_run(1.0, 0.1);
        for m in discrete_evi_margins(&problem, &traj, &EuclideanPoint::scalar(0.3)).unwrap() {
            assert!(m >= -1e-9, "margin {m}");
        }
    }

    #[test]
    fn slope_estimate_matches_gradient() {
        let problem = EuclideanProblem::new(Quadratic { dim: 1 });
        let u = EuclideanPoint::scalar(0.8);
        let est = local_slope_estimate(
            &problem,
            0.0,
            &u,
            &[1e-2, 1e-3, 1e-4],
            &[EuclideanPoint::scalar(0.79), EuclideanPoint::scalar(0.81)],
        )
        .unwrap();
        assert!((est.ladder_estimate - 0.8).abs() < 0.8 * 0.01, "{est:?}");
        // Minimizer point: slope 0.
        let at_min = local_slope_estimate(&problem, 0.0, &EuclideanPoint::scalar(0.0), &[1e-3], &[])
            .unwrap();
        assert!(at_min.ladder_estimate.abs() < 1e-10);
    }

    #[test]
    fn ladder_estimates_nonincreasing_in_tau_for_convex_energy() {
        // d(u, u_τ)/τ = u/(1+τ) here: larger steps give smaller estimates,
        // so the values grow toward |∇E| as the ladder descends.
        let problem = EuclideanProblem::new(Quadratic { dim: 1 });
        let est = local_slope_estimate(
            &problem,
            0.0,
            &EuclideanPoint::scalar(1.0),
            &[0.1, 0.05, 0.01, 1e-3],
            &[],
        )
        .unwrap();
        for w in est.ladder.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-6, "{:?}", est.ladder);
        }
    }

    #[test]
    fn convergence_study_first_order() {
        let problem = EuclideanProblem::new(Quadratic { dim: 1 });
        let table = convergence_study(
            &problem,
            &EuclideanPoint::scalar(1.0),
            1.0,
            &[0.1, 0.05, 0.025],
            |t| Ok(EuclideanPoint::scalar((-t).exp())),
        )
        .unwrap();
        let order = table.order.unwrap();
        assert!(order >= 0.9, "order {order}");
    }

    #[test]
    fn single_tau_study_has_no_order() {
        let problem = EuclideanProblem::new(Quadratic { dim: 1 });
        let table = convergence_study(
            &problem,
            &EuclideanPoint::scalar(1.0),
            0.5,
            &[0.1],
            |t| Ok(EuclideanPoint::scalar((-t).exp())),
        )
        .unwrap();
        assert!(table.order.is_none());
    }
}
