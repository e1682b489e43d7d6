//! The implicit variational scheme: time partitions, the discrete states
//! produced by iterated proximal steps, the interpolant family used to
//! compare trajectories across meshes, the intermediate-time minimizer
//! family, and the residual terms with their a-priori bounds.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::error::{Error, Result};
use crate::gronwall;
use crate::metric::{ProxError, ProxProblem, ProxResult};
use crate::quad;

/// Strictly increasing time marks starting at 0 and covering the run.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    marks: Vec<f64>,
}

#[derive(Clone, Debug)]
pub enum PartitionSpec {
    Uniform { step: f64 },
    Explicit { marks: Vec<f64> },
    Random { max_step: f64, seed: u64 },
}

impl Partition {
    pub fn marks(&self) -> &[f64] {
        &self.marks
    }

    /// Number of cells (steps).
    pub fn num_steps(&self) -> usize {
        self.marks.len() - 1
    }

    /// `τ_n = tⁿ - tⁿ⁻¹` for `n` in `1..=num_steps`.
    pub fn step(&self, n: usize) -> f64 {
        self.marks[n] - self.marks[n - 1]
    }

    /// Mesh size `sup τ_n`.
    pub fn mesh(&self) -> f64 {
        (1..self.marks.len())
            .map(|n| self.step(n))
            .fold(0.0, f64::max)
    }

    pub fn final_time(&self) -> f64 {
        *self.marks.last().unwrap()
    }

    /// Index `n ≥ 1` of the half-open cell `(tⁿ⁻¹, tⁿ]` containing `t`;
    /// `t = 0` belongs to no cell and returns `None`.
    pub fn cell_containing(&self, t: f64) -> Result<Option<usize>> {
        if t < 0.0 || t > self.final_time() + 1e-12 * self.final_time().max(1.0) {
            return Err(Error::precondition(format!(
                "time {t} outside [0, {}]",
                self.final_time()
            )));
        }
        if t <= 0.0 {
            return Ok(None);
        }
        let n = match self
            .marks
            .binary_search_by(|m| m.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.min(self.marks.len() - 1),
        };
        Ok(Some(n.max(1)))
    }
}

/// Builds a partition of `[0, t_end]` whose mesh stays below `tau_star`.
pub fn build_partition(t_end: f64, spec: &PartitionSpec, tau_star: f64) -> Result<Partition> {
    if t_end <= 0.0 {
        return Err(Error::precondition("t_end must be positive"));
    }
    let marks = match spec {
        PartitionSpec::Uniform { step } => {
            if *step <= 0.0 {
                return Err(Error::precondition("uniform step must be positive"));
            }
            let n = ((t_end / step) - 1e-9).ceil().max(1.0) as usize;
            let mut marks: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
            if *marks.last().unwrap() < t_end {
                marks.push(t_end.max(marks.last().unwrap() + step));
            }
            marks
        }
        PartitionSpec::Explicit { marks } => marks.clone(),
        PartitionSpec::Random { max_step, seed } => {
            if *max_step <= 0.0 {
                return Err(Error::precondition("max_step must be positive"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut marks = vec![0.0];
            while *marks.last().unwrap() < t_end {
                let step = rng.gen_range(0.5 * max_step..=*max_step);
                marks.push(marks.last().unwrap() + step);
            }
            marks
        }
    };
    if marks.len() < 2 || marks[0] != 0.0 {
        return Err(Error::precondition("marks must start at 0 and cover the run"));
    }
    if marks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::precondition("marks must be strictly increasing"));
    }
    if *marks.last().unwrap() < t_end - 1e-12 {
        return Err(Error::precondition(format!(
            "final mark {} below t_end {t_end}",
            marks.last().unwrap()
        )));
    }
    let p = Partition { marks };
    if p.mesh() >= tau_star {
        return Err(Error::precondition(format!(
            "mesh {} not below the step ceiling {tau_star}",
            p.mesh()
        )));
    }
    Ok(p)
}

/// Per-step bookkeeping of one proximal solve.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub distance_moved: f64,
    /// Energy at `(tⁿ, Uⁿ)`.
    pub energy: f64,
    /// Energy at `(tⁿ, Uⁿ⁻¹)`: the previous state seen at the new mark.
    pub energy_prev_at_mark: f64,
    pub iterations: usize,
}

/// States and per-step diagnostics of one minimizing-movement run.
#[derive(Clone, Debug)]
pub struct Trajectory<P> {
    pub partition: Partition,
    /// `U⁰ … U^N`.
    pub states: Vec<P>,
    /// Energy at `(0, U⁰)`.
    pub initial_energy: f64,
    pub steps: Vec<StepRecord>,
    pub label: Option<String>,
}

impl<P> Trajectory<P> {
    pub fn state(&self, n: usize) -> &P {
        &self.states[n]
    }

    pub fn final_state(&self) -> &P {
        self.states.last().unwrap()
    }

    /// Energy at `(tⁿ, Uⁿ)`.
    pub fn energy_at_mark(&self, n: usize) -> f64 {
        if n == 0 {
            self.initial_energy
        } else {
            self.steps[n - 1].energy
        }
    }

    /// Both sides of the dissipation ledger:
    /// `Σ d²(Uʲ, Uʲ⁻¹)/(2τ_j)` and `Σ (ℰ(tʲ,Uʲ⁻¹) − ℰ(tʲ,Uʲ))`.
    pub fn dissipation_ledger(&self) -> (f64, f64) {
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for (j, rec) in self.steps.iter().enumerate() {
            let tau = self.partition.step(j + 1);
            lhs += rec.distance_moved * rec.distance_moved / (2.0 * tau);
            rhs += rec.energy_prev_at_mark - rec.energy;
        }
        (lhs, rhs)
    }
}

#[derive(Debug, Error)]
pub enum SchemeError<P: std::fmt::Debug> {
    #[error("prox failed at step {step} (t = {time}): {source}")]
    Prox {
        step: usize,
        time: f64,
        partial: Trajectory<P>,
        source: ProxError<P>,
    },
    #[error(transparent)]
    Invalid(#[from] Error),
}

/// Runs the implicit scheme over the partition: each state minimizes the
/// energy at the right mark plus the squared-distance penalty from its
/// predecessor.
pub fn run_minimizing_movement<Pr: ProxProblem>(
    problem: &Pr,
    partition: Partition,
    initial: Pr::Point,
) -> std::result::Result<Trajectory<Pr::Point>, SchemeError<Pr::Point>> {
    let initial_energy = problem
        .energy(0.0, &initial)
        .finite()
        .ok_or_else(|| Error::precondition("initial energy must be finite"))?;

    let n_steps = partition.num_steps();
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut steps = Vec::with_capacity(n_steps);
    states.push(initial);

    for n in 1..=n_steps {
        let t = partition.marks()[n];
        let tau = partition.step(n);
        let base = states.last().unwrap();
        match problem.prox(t, tau, base) {
            Ok(ProxResult {
                minimizer,
                value,
                distance_moved,
                iterations,
                ..
            }) => {
                let energy = value - distance_moved * distance_moved / (2.0 * tau);
                let energy_prev_at_mark = problem
                    .energy(t, base)
                    .finite()
                    .unwrap_or(f64::INFINITY);
                steps.push(StepRecord {
                    distance_moved,
                    energy,
                    energy_prev_at_mark,
                    iterations,
                });
                states.push(minimizer);
            }
            Err(source) => {
                let partial = Trajectory {
                    partition,
                    states,
                    initial_energy,
                    steps,
                    label: problem.label().map(str::to_owned),
                };
                return Err(SchemeError::Prox {
                    step: n,
                    time: t,
                    partial,
                    source,
                });
            }
        }
    }

    Ok(Trajectory {
        partition,
        states,
        initial_energy,
        steps,
        label: problem.label().map(str::to_owned),
    })
}

/// Re-solves every step from its predecessor and reports the largest
/// distance between stored and recomputed states.
pub fn verify_steps<Pr: ProxProblem>(
    problem: &Pr,
    traj: &Trajectory<Pr::Point>,
) -> std::result::Result<f64, ProxError<Pr::Point>> {
    let mut worst = 0.0f64;
    for n in 1..=traj.partition.num_steps() {
        let t = traj.partition.marks()[n];
        let tau = traj.partition.step(n);
        let redo = problem.prox(t, tau, traj.state(n - 1))?;
        worst = worst.max(problem.distance(&redo.minimizer, traj.state(n)));
    }
    Ok(worst)
}

/// The interpolating quantities of one trajectory at a query time.
#[derive(Clone, Debug)]
pub struct InterpolantBundle<'a, P> {
    /// Cell index `n` with `t ∈ (tⁿ⁻¹, tⁿ]` (0 at `t = 0`).
    pub cell: usize,
    /// Right mark of the containing cell.
    pub right_time: f64,
    /// Declared convexity modulus evaluated at the right mark.
    pub lambda_right: f64,
    /// Position inside the cell, `l ∈ (0, 1]`.
    pub fraction: f64,
    /// Convex combination of endpoint squared distances to the probe point.
    pub dist_sq_to_probe: f64,
    /// Convex combination of endpoint energies.
    pub energy: f64,
    /// `U̲(t)` and `Ū(t)`: left and right endpoint states.
    pub lower: &'a P,
    pub upper: &'a P,
}

/// Evaluates the full interpolant family at `t` against a probe point.
pub fn interpolants<'a, Pr: ProxProblem>(
    problem: &Pr,
    traj: &'a Trajectory<Pr::Point>,
    t: f64,
    probe: &Pr::Point,
) -> Result<InterpolantBundle<'a, Pr::Point>> {
    let cell = traj.partition.cell_containing(t)?;
    let Some(n) = cell else {
        let d = problem.distance(traj.state(0), probe);
        return Ok(InterpolantBundle {
            cell: 0,
            right_time: 0.0,
            lambda_right: problem.lambda(0.0),
            fraction: 1.0,
            dist_sq_to_probe: d * d,
            energy: traj.initial_energy,
            lower: traj.state(0),
            upper: traj.state(0),
        });
    };
    let t_left = traj.partition.marks()[n - 1];
    let t_right = traj.partition.marks()[n];
    let fraction = (t - t_left) / (t_right - t_left);
    let d_lower = problem.distance(traj.state(n - 1), probe);
    let d_upper = problem.distance(traj.state(n), probe);
    Ok(InterpolantBundle {
        cell: n,
        right_time: t_right,
        lambda_right: problem.lambda(t_right),
        fraction,
        dist_sq_to_probe: (1.0 - fraction) * d_lower * d_lower + fraction * d_upper * d_upper,
        energy: (1.0 - fraction) * traj.energy_at_mark(n - 1) + fraction * traj.energy_at_mark(n),
        lower: traj.state(n - 1),
        upper: traj.state(n),
    })
}

/// Intermediate-time minimizer (De Giorgi interpolation): for
/// `t ∈ (tⁿ⁻¹, tⁿ]` with offset `δ = t − tⁿ⁻¹`, the proximal point of
/// `Uⁿ⁻¹` at time `tⁿ⁻¹ + δ` and step `δ`.
pub fn de_giorgi<Pr: ProxProblem>(
    problem: &Pr,
    traj: &Trajectory<Pr::Point>,
    t: f64,
) -> std::result::Result<ProxResult<Pr::Point>, ProxError<Pr::Point>> {
    let n = traj
        .partition
        .cell_containing(t)
        .map_err(ProxError::Invalid)?
        .ok_or_else(|| {
            ProxError::Invalid(Error::precondition("offset δ must be positive"))
        })?;
    let delta = t - traj.partition.marks()[n - 1];
    problem.prox(t, delta, traj.state(n - 1))
}

/// The two per-cell residuals at `t`: the energy-gap residual
/// `R = 2(1-l)(ℰ(tⁿ,Uⁿ⁻¹) − ℰ(tⁿ,Uⁿ)) − d²(Uⁿ⁻¹,Uⁿ)/τ_n` and the
/// displacement residual `D = (1-l)·d(Ū, U̲) ≥ 0`.
pub fn interpolation_residuals<P>(traj: &Trajectory<P>, t: f64) -> Result<(f64, f64)> {
    let Some(n) = traj.partition.cell_containing(t)? else {
        return Ok((0.0, 0.0));
    };
    let tau = traj.partition.step(n);
    let l = (t - traj.partition.marks()[n - 1]) / tau;
    let rec = &traj.steps[n - 1];
    let gap = rec.energy_prev_at_mark - rec.energy;
    let r = 2.0 * (1.0 - l) * gap - rec.distance_moved * rec.distance_moved / tau;
    let d = (1.0 - l) * rec.distance_moved;
    Ok((r, d))
}

/// Cross-mesh energy residual of trajectory `a` against the time marks of
/// trajectory `b`:
/// `G(t) = 2(1-l_a)(ℰ(T_b(t),U̲_a) − ℰ(T_a(t),U̲_a)) + 2 l_a (ℰ(T_b(t),Ū_a) − ℰ(T_a(t),Ū_a))`.
pub fn cross_partition_residual<Pr: ProxProblem>(
    problem: &Pr,
    a: &Trajectory<Pr::Point>,
    b: &Trajectory<Pr::Point>,
    t: f64,
) -> Result<f64> {
    if let (Some(la), Some(lb)) = (&a.label, &b.label) {
        if la != lb {
            return Err(Error::precondition(format!(
                "trajectories carry different functionals: {la} vs {lb}"
            )));
        }
    }
    let Some(na) = a.partition.cell_containing(t)? else {
        return Ok(0.0);
    };
    let right_a = a.partition.marks()[na];
    let right_b = match b.partition.cell_containing(t.min(b.partition.final_time()))? {
        Some(nb) => b.partition.marks()[nb],
        None => 0.0,
    };
    let l = (t - a.partition.marks()[na - 1]) / a.partition.step(na);
    let energy_of = |time: f64, state: &Pr::Point| -> f64 {
        problem
            .energy(time, state)
            .finite()
            .unwrap_or(f64::INFINITY)
    };
    let lower = a.state(na - 1);
    let upper = a.state(na);
    Ok(2.0 * (1.0 - l) * (energy_of(right_b, lower) - energy_of(right_a, lower))
        + 2.0 * l * (energy_of(right_b, upper) - energy_of(right_a, upper)))
}

/// `∫_0^T G⁺ dt` by the midpoint rule on the union of both partitions'
/// marks (exact for integrands constant between marks).
pub fn integrated_cross_residual<Pr: ProxProblem>(
    problem: &Pr,
    a: &Trajectory<Pr::Point>,
    b: &Trajectory<Pr::Point>,
    t_end: f64,
) -> Result<f64> {
    let mut cuts: Vec<f64> = a
        .partition
        .marks()
        .iter()
        .chain(b.partition.marks())
        .copied()
        .filter(|t| *t <= t_end + 1e-12)
        .collect();
    cuts.push(t_end);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let g = cross_partition_residual(problem, a, b, mid)?;
        total += g.max(0.0) * (w[1] - w[0]);
    }
    Ok(total)
}

/// `d(Uⁿ⁻¹, Uⁿ)/τ_n` on the cell containing `t`; 0 at `t = 0`.
pub fn discrete_metric_derivative<P>(traj: &Trajectory<P>, t: f64) -> Result<f64> {
    let Some(n) = traj.partition.cell_containing(t)? else {
        return Ok(0.0);
    };
    Ok(traj.steps[n - 1].distance_moved / traj.partition.step(n))
}

/// A-priori summary of one run against its constructive bounds.
#[derive(Clone, Debug, serde::Serialize)]
pub struct AprioriReport {
    pub hypothesis_ok: bool,
    pub feedback_contraction: f64,
    pub sup_dist_sq: f64,
    pub dissipation_sum: f64,
    pub energy_gap_sum: f64,
    pub dist_sq_bound: Option<f64>,
    pub dissipation_bound: Option<f64>,
    pub passed: bool,
}

/// Checks the boundedness estimates of one trajectory: the supremum of
/// `d²(u*, Uⁿ)` and the dissipation sum against bounds assembled from the
/// initial size `S`, the step ceiling, the sampled infimum of the
/// Moreau–Yosida value at the reference point, and the discrete Gronwall
/// bound with feedback weight 4.
pub fn apriori_check<Pr: ProxProblem>(
    problem: &Pr,
    traj: &Trajectory<Pr::Point>,
    s_bound: f64,
    u_star: &Pr::Point,
) -> Result<AprioriReport> {
    let t_end = traj.partition.final_time();
    let tau_star = crate::metric::tau_star(|s| problem.lambda(s), t_end);
    let d0 = problem.distance(u_star, traj.state(0));
    let hyp_initial = traj.initial_energy <= s_bound && d0 * d0 <= s_bound + 1e-12;

    // Sampled infimum of the Moreau–Yosida value at the reference point
    // over [0, T + τ*].
    let mut inf_my = f64::INFINITY;
    let samples = 9;
    for i in 0..=samples {
        let t = (t_end + tau_star) * i as f64 / samples as f64;
        let v = problem
            .prox(t, tau_star * 0.999, u_star)
            .map_err(|e| Error::numeric(format!("reference prox failed: {e}")))?
            .value;
        inf_my = inf_my.min(v);
    }

    let beta_int = |a: f64, b: f64| quad::integrate(|r| problem.beta(r), a, b);
    let n_steps = traj.partition.num_steps();
    let mut betas = Vec::with_capacity(n_steps);
    for j in 1..=n_steps {
        let t_j = traj.partition.marks()[j];
        let t_next = if j + 1 <= n_steps {
            traj.partition.marks()[j + 1]
        } else {
            t_j + traj.partition.step(j)
        };
        betas.push(traj.partition.step(j) / tau_star + 0.5 * tau_star * beta_int(t_j, t_next));
    }
    let m = betas.iter().fold(0.0f64, |acc, b| acc.max(4.0 * b));

    let a_const = 2.0 * tau_star * (s_bound - inf_my).max(0.0)
        + 2.0 * (1.0 + tau_star * beta_int(0.0, tau_star)) * s_bound
        + 2.0 * tau_star * beta_int(0.0, t_end + tau_star);

    let sup_dist_sq = traj
        .states
        .iter()
        .map(|u| {
            let d = problem.distance(u_star, u);
            d * d
        })
        .fold(0.0, f64::max);
    let (dissipation_sum, energy_gap_sum) = traj.dissipation_ledger();

    let hypothesis_ok = hyp_initial && m < 1.0;
    let (dist_sq_bound, dissipation_bound, passed) = if hypothesis_ok {
        let mut worst = 0.0f64;
        for n in 1..=n_steps {
            worst = worst.max(gronwall::discrete_bound(a_const, 4.0, &betas, n)?);
        }
        let diss_bound = (s_bound - inf_my).max(0.0)
            + worst / (2.0 * tau_star)
            + (1.0 + worst) * beta_int(0.0, t_end + tau_star);
        let ok = sup_dist_sq <= worst && dissipation_sum <= diss_bound;
        (Some(worst), Some(diss_bound), ok)
    } else {
        (None, None, false)
    };

    Ok(AprioriReport {
        hypothesis_ok,
        feedback_contraction: m,
        sup_dist_sq,
        dissipation_sum,
        energy_gap_sum,
        dist_sq_bound,
        dissipation_bound,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclidean::{EuclideanPoint, EuclideanProblem, Quadratic, TimeRampedQuadratic};

    fn quadratic_problem() -> EuclideanProblem<Quadratic> {
        EuclideanProblem::labelled(Quadratic { dim: 1 }, "quadratic")
    }

    #[test]
    fn uniform_partition_marks() {
        let p = build_partition(1.0, &PartitionSpec::Uniform { step: 0.25 }, 1.0).unwrap();
        assert_eq!(p.marks(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!((p.mesh() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn explicit_partition_accepted() {
        let p = build_partition(
            1.0,
            &PartitionSpec::Explicit {
                marks: vec![0.0, 0.1, 0.5, 1.0],
            },
            1.0,
        )
        .unwrap();
        assert!((p.mesh() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mesh_above_ceiling_rejected() {
        let err = build_partition(4.0, &PartitionSpec::Uniform { step: 2.0 }, 1.0).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn random_partition_is_seeded_and_covers() {
        let spec = PartitionSpec::Random {
            max_step: 0.2,
            seed: 42,
        };
        let p1 = build_partition(1.0, &spec, 0.5).unwrap();
        let p2 = build_partition(1.0, &spec, 0.5).unwrap();
        assert_eq!(p1, p2);
        assert!(p1.final_time() >= 1.0);
    }

    #[test]
    fn cell_lookup_is_left_open() {
        let p = build_partition(1.0, &PartitionSpec::Uniform { step: 0.25 }, 1.0).unwrap();
        assert_eq!(p.cell_containing(0.0).unwrap(), None);
        assert_eq!(p.cell_containing(0.25).unwrap(), Some(1));
        assert_eq!(p.cell_containing(0.26).unwrap(), Some(2));
        assert!(p.cell_containing(1.2).is_err());
    }

    #[test]
    fn quadratic_flow_is_geometric() {
        let problem = quadratic_problem();
        let p = build_partition(1.0, &PartitionSpec::Uniform { step: 0.25 }, 1.0).unwrap();
        let traj = run_minimizing_movement(&problem, p, EuclideanPoint::scalar(1.0)).unwrap();
        for (n, state) in traj.states.iter().enumerate() {
            let expect = (1.0f64 / 1.25).powi(n as i32);
            assert!((state.0[0] - expect).abs() < 1e-9, "n={n}");
        }
        let (lhs, rhs) = traj.dissipation_ledger();
        assert!(lhs <= rhs + 1e-12, "dissipation ledger violated");
    }

    #[test]
    fn reverification_matches_stored_states() {
        let problem = quadratic_problem();
        let p = build_partition(0.5, &PartitionSpec::Uniform { step: 0.1 }, 1.0).unwrap();
        let traj = run_minimizing_movement(&problem, p, EuclideanPoint::scalar(1.0)).unwrap();
        let worst = verify_steps(&problem, &traj).unwrap();
        assert!(worst < 1e-9);
    }

    #[test]
    fn interpolants_at_marks_and_midpoints() {
        let problem = quadratic_problem();
        let p = build_partition(1.0, &PartitionSpec::Uniform { step: 0.5 }, 1.0).unwrap();
        let traj = run_minimizing_movement(&problem, p, EuclideanPoint::scalar(1.0)).unwrap();
        let probe = EuclideanPoint::scalar(0.0);

        let at_mark = interpolants(&problem, &traj, 0.5, &probe).unwrap();
        assert!((at_mark.fraction - 1.0).abs() < 1e-15);
        let u1 = traj.state(1).0[0];
        assert!((at_mark.dist_sq_to_probe - u1 * u1).abs() < 1e-12);
        assert!((at_mark.energy - traj.energy_at_mark(1)).abs() < 1e-12);

        let mid = interpolants(&problem, &traj, 0.25, &probe).unwrap();
        assert!((mid.fraction - 0.5).abs() < 1e-15);
        let expect = 0.5 * (1.0 + u1 * u1);
        assert!((mid.dist_sq_to_probe - expect).abs() < 1e-12);

        let origin = interpolants(&problem, &traj, 0.0, &probe).unwrap();
        assert_eq!(origin.cell, 0);
        assert!((origin.dist_sq_to_probe - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_interpolant_uses_right_mark() {
        let problem = EuclideanProblem::new(TimeRampedQuadratic { dim: 1 });
        let p = build_partition(
            1.0,
            &PartitionSpec::Explicit {
                marks: vec![0.0, 1.0],
            },
            2.0,
        )
        .unwrap();
        let traj = run_minimizing_movement(&problem, p, EuclideanPoint::scalar(1.0)).unwrap();
        let b = interpolants(&problem, &traj, 0.3, traj.state(0)).unwrap();
        // λ(t) = 1 + t evaluated at the right mark t = 1.
        assert!((b.lambda_right - 2.0).abs() < 1e-15);
    }

    #[test]
    fn de_giorgi_endpoint_recovers_step() {
        let problem = quadratic_problem();
        let p = build_partition(1.0, &PartitionSpec::Uniform { step: 0.5 }, 1.0).unwrap();
        let traj = run_minimizing_movement(&problem, p, EuclideanPoint::scalar(1.0)).unwrap();
        let at_mark = de_giorgi(&problem, &traj, 0.5).unwrap();
        assert!((at_mark.minimizer.0[0] - traj.state(1).0[0]).abs() < 1e-10);
        // δ = 0.5 from U⁰ = 1 under E = v²/2: minimizer 1/(1+δ) = 2/3.
        assert!((at_mark.minimizer.0[0] - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn de_giorgi_small_offset_stays_near_base() {
        let problem = quadratic_problem();
        let p = build_partition(1.0, &PartitionSpec::Uniform { step: 0.5 }, 1.0).unwrap();
        let traj = run_minimizing_movement(&problem, p, EuclideanPoint::scalar(1.0)).unwrap();
        let delta = 0.5 * 1e-4;
        let near = de_giorgi(&problem, &traj, 0.5 + delta).unwrap();
        let d = problem.distance(&near.minimizer, traj.state(1));
        assert!(d <= 1e-2, "distance {d} after offset {delta}");
    }

    #[test]
    fn residuals_on_explicit_states() {
        let problem = quadratic_problem();
        let p = build_partition(1.0, &PartitionSpec::Uniform { step: 0.5 }, 1.0).unwrap();
        let traj = run_minimizing_movement(&problem, p, EuclideanPoint::scalar(1.0)).unwrap();
        // t = 0.25: l = 1/2, states 1 → 2/3, d = 1/3: D = 0.5·(1/3) = 1/6.
        let (r, d) = interpolation_residuals(&traj, 0.25).unwrap();
        assert!((d - 1.0 / 6.0).abs() < 1e-9);
        // R = 2(1-l)(E(U⁰) - E(U¹)) - d²/τ with E at the right mark.
        let gap = 0.5 - 0.5 * (2.0f64 / 3.0).powi(2);
        let expect = 2.0 * 0.5 * gap - (1.0 / 9.0) / 0.5;
        assert!((r - expect).abs() < 1e-9);
        // At the right mark the displacement residual vanishes and the
        // energy-gap residual reduces to its negative dissipation part.
        let (r1, d1) = interpolation_residuals(&traj, 0.5).unwrap();
        assert!(d1.abs() < 1e-12);
        assert!((r1 + (1.0 / 9.0) / 0.5).abs() < 1e-9);
    }

    #[test]
    fn residuals_vanish_on_stationary_trajectory() {
        let problem = quadratic_problem();
        let p = build_partition(1.0, &PartitionSpec::Uniform { step: 0.25 }, 1.0).unwrap();
        let traj = run_minimizing_movement(&problem, p, EuclideanPoint::scalar(0.0)).unwrap();
        for t in [0.1, 0.25, 0.6, 1.0] {
            let (r, d) = interpolation_residuals(&traj, t).unwrap();
            assert!(r.abs() < 1e-18 && d.abs() < 1e-18);
        }
    }

    #[test]
    fn cross_residual_zero_for_identical_partitions() {
        let problem = EuclideanProblem::new(TimeRampedQuadratic { dim: 1 });
        let p = build_partition(1.0, &PartitionSpec::Uniform { step: 0.25 }, 1.0).unwrap();
        let a = run_minimizing_movement(&problem, p.clone(), EuclideanPoint::scalar(1.0)).unwrap();
        let b = run_minimizing_movement(&problem, p, EuclideanPoint::scalar(0.5)).unwrap();
        for t in [0.1, 0.3, 0.9] {
            assert_eq!(cross_partition_residual(&problem, &a, &b, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn cross_residual_zero_for_time_independent_energy() {
        let problem = quadratic_problem();
        let pa = build_partition(1.0, &PartitionSpec::Uniform { step: 0.25 }, 1.0).unwrap();
        let pb = build_partition(1.0, &PartitionSpec::Uniform { step: 0.1 }, 1.0).unwrap();
        let a = run_minimizing_movement(&problem, pa, EuclideanPoint::scalar(1.0)).unwrap();
        let b = run_minimizing_movement(&problem, pb, EuclideanPoint::scalar(1.0)).unwrap();
        for t in [0.15, 0.5, 0.85] {
            assert_eq!(cross_partition_residual(&problem, &a, &b, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn cross_residual_rejects_mismatched_functionals() {
        let pa = build_partition(1.0, &PartitionSpec::Uniform { step: 0.25 }, 1.0).unwrap();
        let qa = quadratic_problem();
        let qb = EuclideanProblem::labelled(Quadratic { dim: 1 }, "other");
        let a = run_minimizing_movement(&qa, pa.clone(), EuclideanPoint::scalar(1.0)).unwrap();
        let b = run_minimizing_movement(&qb, pa, EuclideanPoint::scalar(1.0)).unwrap();
        assert!(cross_partition_residual(&qa, &a, &b, 0.5).is_err());
    }

    #[test]
    fn metric_derivative_explicit_value() {
        let problem = quadratic_problem();
        let p = build_partition(1.0, &PartitionSpec::Uniform { step: 0.5 }, 1.0).unwrap();
        let traj = run_minimizing_movement(&problem, p, EuclideanPoint::scalar(1.0)).unwrap();
        // First cell: |U¹ - U⁰|/τ = (1/3)/0.5 = 2/3.
        let v = discrete_metric_derivative(&traj, 0.2).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-9);
        assert_eq!(discrete_metric_derivative(&traj, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn apriori_stationary_trajectory() {
        // Mesh below τ*/4 keeps the Gronwall feedback weight under 1.
        let problem = quadratic_problem();
        let p = build_partition(1.0, &PartitionSpec::Uniform { step: 0.2 }, 1.0).unwrap();
        let traj = run_minimizing_movement(&problem, p, EuclideanPoint::scalar(0.0)).unwrap();
        let report =
            apriori_check(&problem, &traj, 1.0, &EuclideanPoint::scalar(0.0)).unwrap();
        assert!(report.hypothesis_ok);
        assert_eq!(report.dissipation_sum, 0.0);
        assert!(report.passed);
    }

    #[test]
    fn apriori_contraction_keeps_states_bounded() {
        let problem = quadratic_problem();
        let p = build_partition(1.0, &PartitionSpec::Uniform { step: 0.1 }, 1.0).unwrap();
        let traj = run_minimizing_movement(&problem, p, EuclideanPoint::scalar(1.0)).unwrap();
        let report =
            apriori_check(&problem, &traj, 1.0, &EuclideanPoint::scalar(0.0)).unwrap();
        assert!(report.sup_dist_sq <= 1.0 + 1e-12);
        assert!(report.passed, "{report:?}");
    }
}
