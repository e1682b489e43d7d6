//! Metric-space and functional contracts, the penalized objective, and the
//! proximal (Moreau–Yosida) machinery shared by every instantiation.

use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::quad;
use thiserror::Error;

/// A metric space with the connecting curves needed for convexity checks.
pub trait Space {
    type Point: Clone + std::fmt::Debug;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64;

    /// Point at parameter `s ∈ [0, 1]` on the curve from `a` to `b` along
    /// which penalized objectives are convex.
    fn interpolate(&self, a: &Self::Point, b: &Self::Point, s: f64) -> Self::Point;

    fn validate(&self, p: &Self::Point) -> Result<()>;
}

/// A time-dependent energy on points of some space.
pub trait Functional<P> {
    fn energy(&self, t: f64, u: &P) -> Extended;

    /// ∂_t of the energy at fixed state, when the instance provides it.
    fn time_derivative(&self, t: f64, u: &P) -> Option<f64> {
        let _ = (t, u);
        None
    }

    /// Convexity modulus λ(t) declared for the instance.
    fn lambda(&self, t: f64) -> f64;

    /// Time-variation rate β(t) ≥ 0 declared for the instance.
    fn beta(&self, t: f64) -> f64;
}

/// Spaces whose points are coordinate vectors with a conical feasible set;
/// this is what the generic prox solver operates on.
pub trait CoordinateSpace: Space {
    fn coords<'a>(&self, p: &'a Self::Point) -> &'a [f64];

    fn from_coords(&self, coords: Vec<f64>) -> Self::Point;

    /// Euclidean projection of raw coordinates onto the feasible set.
    fn project(&self, coords: &mut Vec<f64>);

    /// Pushes boundary coordinates strictly inside the domain so that a
    /// barrier-type energy becomes finite. No-op when the feasible set is
    /// the whole space.
    fn interior_hint(&self, coords: &mut Vec<f64>) {
        let _ = coords;
    }

    /// Weight `w` with `d²(a, b) = w · Σ_i (a_i − b_i)²`.
    fn metric_weight(&self) -> f64;
}

/// Functionals exposing a coordinate gradient, finite inside the domain.
pub trait GradFunctional<P>: Functional<P> {
    fn energy_gradient(&self, t: f64, u: &P) -> Vec<f64>;
}

/// Outcome of one proximal solve.
#[derive(Clone, Debug)]
pub struct ProxResult<P> {
    pub minimizer: P,
    /// Value of the penalized objective at the minimizer (the Moreau–Yosida
    /// approximation of the energy at the base point).
    pub value: f64,
    pub distance_moved: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Error)]
pub enum ProxError<P: std::fmt::Debug> {
    #[error("prox solver stopped after {} iterations with residual {residual:.3e}", last.iterations)]
    NonConvergence { last: ProxResult<P>, residual: f64 },
    #[error(transparent)]
    Invalid(#[from] Error),
}

impl<P: std::fmt::Debug> ProxError<P> {
    /// Last iterate carried by a non-convergence report, if any.
    pub fn last_iterate(&self) -> Option<&ProxResult<P>> {
        match self {
            ProxError::NonConvergence { last, .. } => Some(last),
            ProxError::Invalid(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ProxOptions {
    /// Stop when the projected-gradient norm falls below
    /// `grad_tol_rel · max(1, |objective|)`.
    pub grad_tol_rel: f64,
    pub max_iterations: usize,
}

impl Default for ProxOptions {
    fn default() -> Self {
        ProxOptions {
            grad_tol_rel: 1e-8,
            max_iterations: 10_000,
        }
    }
}

/// A space/functional pair able to run proximal steps; the interface the
/// scheme and the diagnostics consume.
pub trait ProxProblem {
    type Point: Clone + std::fmt::Debug;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64;
    fn energy(&self, t: f64, u: &Self::Point) -> Extended;
    fn time_derivative(&self, t: f64, u: &Self::Point) -> Option<f64>;
    fn lambda(&self, t: f64) -> f64;
    fn beta(&self, t: f64) -> f64;
    fn prox(
        &self,
        t: f64,
        tau: f64,
        base: &Self::Point,
    ) -> std::result::Result<ProxResult<Self::Point>, ProxError<Self::Point>>;

    /// Identifier used to detect mismatched functionals across trajectories.
    fn label(&self) -> Option<&str> {
        None
    }
}

/// `E(t, τ, base; v) = energy(t, v) + d²(base, v)/(2τ)`.
pub fn penalized_objective<S: Space, F: Functional<S::Point>>(
    space: &S,
    functional: &F,
    t: f64,
    tau: f64,
    base: &S::Point,
    v: &S::Point,
) -> Result<Extended> {
    if tau <= 0.0 {
        return Err(Error::precondition(format!("step τ = {tau} must be > 0")));
    }
    let d = space.distance(base, v);
    if !d.is_finite() {
        return Err(Error::InvalidState("non-finite distance".into()));
    }
    Ok(functional.energy(t, v).add_finite(d * d / (2.0 * tau)))
}

/// Negative part `max(−inf λ, 0)` of the convexity modulus, sampled over
/// `[0, horizon]`.
pub fn lambda_negative_part<F: Fn(f64) -> f64>(lambda: F, horizon: f64) -> f64 {
    let hi = horizon.max(0.0);
    let n = ((hi * quad::PANELS_PER_UNIT as f64).ceil() as usize).clamp(16, 1 << 20);
    let mut inf = f64::INFINITY;
    for i in 0..=n {
        inf = inf.min(lambda(hi * i as f64 / n as f64));
    }
    (-inf).max(0.0)
}

/// Per-run proximal step ceiling: `min(1, 0.5/max(λ⁻, ε))` with the negative
/// part sampled on `[0, T+1]`.
pub fn tau_star<F: Fn(f64) -> f64>(lambda: F, t_end: f64) -> f64 {
    let lneg = lambda_negative_part(lambda, t_end + 1.0);
    (0.5 / lneg_floor(lneg)).min(1.0)
}

fn lneg_floor(lneg: f64) -> f64 {
    lneg.max(1e-12)
}

fn check_window<P, F: Functional<P>>(functional: &F, t: f64, tau: f64) -> Result<()> {
    if tau <= 0.0 {
        return Err(Error::precondition(format!("step τ = {tau} must be > 0")));
    }
    let lneg = lambda_negative_part(|s| functional.lambda(s), t + 1.0);
    if lneg > 0.0 && tau >= 1.0 / lneg {
        return Err(Error::precondition(format!(
            "step τ = {tau} outside the convexity window (0, {})",
            1.0 / lneg
        )));
    }
    Ok(())
}

/// Proximal step by projected gradient descent with Barzilai–Borwein step
/// initialization and backtracking; stops when the projected-gradient norm
/// drops below `grad_tol_rel · max(1, |objective|)`.
pub fn prox<S, F>(
    space: &S,
    functional: &F,
    t: f64,
    tau: f64,
    base: &S::Point,
    opts: &ProxOptions,
) -> std::result::Result<ProxResult<S::Point>, ProxError<S::Point>>
where
    S: CoordinateSpace,
    F: GradFunctional<S::Point>,
{
    check_window(functional, t, tau)?;
    space.validate(base)?;
    prox_from(space, functional, t, tau, base, base, opts)
}

/// Same solver with an explicit starting iterate (used by restart tests).
pub fn prox_from<S, F>(
    space: &S,
    functional: &F,
    t: f64,
    tau: f64,
    base: &S::Point,
    start: &S::Point,
    opts: &ProxOptions,
) -> std::result::Result<ProxResult<S::Point>, ProxError<S::Point>>
where
    S: CoordinateSpace,
    F: GradFunctional<S::Point>,
{
    let w = space.metric_weight();
    let base_c = space.coords(base).to_vec();
    let objective = |x: &S::Point| -> Extended {
        let c = space.coords(x);
        let pen: f64 = c
            .iter()
            .zip(&base_c)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            * w
            / (2.0 * tau);
        functional.energy(t, x).add_finite(pen)
    };

    // Feasible start: project, then nudge inside if a barrier makes the
    // projected point infinite.
    let mut xc = space.coords(start).to_vec();
    space.project(&mut xc);
    let mut x = space.from_coords(xc.clone());
    if !objective(&x).is_finite() {
        space.interior_hint(&mut xc);
        x = space.from_coords(xc.clone());
        if !objective(&x).is_finite() {
            return Err(Error::InvalidState(
                "no feasible starting iterate for the prox solve".into(),
            )
            .into());
        }
    }

    let full_gradient = |x: &S::Point| -> Vec<f64> {
        let mut g = functional.energy_gradient(t, x);
        let c = space.coords(x);
        for i in 0..g.len() {
            g[i] += w * (c[i] - base_c[i]) / tau;
        }
        g
    };

    let mut fx = objective(&x).finite().unwrap();
    let mut g = full_gradient(&x);
    // Step that normalizes the penalty curvature w/τ to a unit move.
    let alpha_scale = tau / w;
    let mut alpha = alpha_scale;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;

    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;

    while iterations < opts.max_iterations {
        iterations += 1;
        let xc = space.coords(&x).to_vec();

        // Projected-gradient residual probed at the penalty scale.
        let probe = alpha_scale;
        let mut cand = xc.clone();
        for i in 0..cand.len() {
            cand[i] -= probe * g[i];
        }
        space.project(&mut cand);
        residual = cand
            .iter()
            .zip(&xc)
            .map(|(c, x)| {
                let d = (x - c) / probe;
                d * d
            })
            .sum::<f64>()
            .sqrt();
        if residual <= opts.grad_tol_rel * fx.abs().max(1.0) {
            converged = true;
            break;
        }

        // Barzilai–Borwein step from the previous move, safeguarded.
        if let Some((dx, dg)) = &prev {
            let num: f64 = dx.iter().map(|a| a * a).sum();
            let den: f64 = dx.iter().zip(dg).map(|(a, b)| a * b).sum();
            if den > 0.0 {
                alpha = (num / den).clamp(1e-8 * alpha_scale, 1e4 * alpha_scale);
            }
        }

        // Backtrack until strictly measurable decrease; near the
        // floating-point floor of the objective no step qualifies and the
        // loop exits through the stall path below.
        let mut step = alpha;
        let mut accepted = None;
        for _ in 0..60 {
            let mut yc = xc.clone();
            for i in 0..yc.len() {
                yc[i] -= step * g[i];
            }
            space.project(&mut yc);
            let y = space.from_coords(yc.clone());
            if let Some(fy) = objective(&y).finite() {
                let move_sq: f64 = yc.iter().zip(&xc).map(|(a, b)| (a - b) * (a - b)).sum();
                if fy < fx - 1e-4 * move_sq / step {
                    accepted = Some((y, yc, fy));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((y, yc, fy)) = accepted else {
            break;
        };
        let gy = full_gradient(&y);
        let dx: Vec<f64> = yc.iter().zip(&xc).map(|(a, b)| a - b).collect();
        let dg: Vec<f64> = gy.iter().zip(&g).map(|(a, b)| a - b).collect();
        prev = Some((dx, dg));
        x = y;
        fx = fy;
        g = gy;
        alpha = step;
    }

    let distance_moved = space.distance(base, &x);
    let result = ProxResult {
        minimizer: x,
        value: fx,
        distance_moved,
        iterations,
        converged,
    };
    if converged || residual <= 1e3 * opts.grad_tol_rel * fx.abs().max(1.0) {
        // A stalled line search inside a small multiple of the target
        // tolerance is still a usable minimizer.
        Ok(ProxResult {
            converged: true,
            ..result
        })
    } else {
        Err(ProxError::NonConvergence {
            last: result,
            residual,
        })
    }
}

/// `ℰ_{t,τ}(base)`: infimal value of the penalized objective.
pub fn moreau_yosida_value<S, F>(
    space: &S,
    functional: &F,
    t: f64,
    tau: f64,
    base: &S::Point,
    opts: &ProxOptions,
) -> std::result::Result<f64, ProxError<S::Point>>
where
    S: CoordinateSpace,
    F: GradFunctional<S::Point>,
{
    Ok(prox(space, functional, t, tau, base, opts)?.value)
}

/// Mismatch between the numeric derivative of `τ ↦ ℰ_{t+τ,τ}(base)` and its
/// closed form `∂_t ℰ(t+τ, u_τ) − d²(base, u_τ)/(2τ²)`.
///
/// The outer derivative is a centered difference with
/// `h = max(1e-5, 1e-3·τ)`; the stencil must stay inside `(0, τ*/8]`.
pub fn derivative_formula_residual<Pr: ProxProblem>(
    problem: &Pr,
    t: f64,
    tau: f64,
    base: &Pr::Point,
) -> Result<f64> {
    let tau_cap = tau_star(|s| problem.lambda(s), t + 1.0) / 8.0;
    let h = (1e-3 * tau).max(1e-5);
    if tau - h <= 0.0 || tau + h > tau_cap {
        return Err(Error::precondition(format!(
            "stencil τ ± {h} exits (0, {tau_cap}]"
        )));
    }
    let value_at = |r: f64| -> Result<f64> {
        problem
            .prox(t + r, r, base)
            .map(|p| p.value)
            .map_err(|e| Error::numeric(format!("prox failed inside stencil: {e}")))
    };
    let fd = (value_at(tau + h)? - value_at(tau - h)?) / (2.0 * h);
    let at = problem
        .prox(t + tau, tau, base)
        .map_err(|e| Error::numeric(format!("prox failed at stencil center: {e}")))?;
    let dt_energy = problem
        .time_derivative(t + tau, &at.minimizer)
        .ok_or_else(|| Error::Unsupported("functional provides no time derivative".into()))?;
    let d2 = at.distance_moved * at.distance_moved;
    Ok((fd - (dt_energy - d2 / (2.0 * tau * tau))).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Scalar line with an optional half-line domain, for contract tests.
    struct Line;

    impl Space for Line {
        type Point = Vec<f64>;
        fn distance(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
            (a[0] - b[0]).abs()
        }
        fn interpolate(&self, a: &Vec<f64>, b: &Vec<f64>, s: f64) -> Vec<f64> {
            vec![a[0] * (1.0 - s) + b[0] * s]
        }
        fn validate(&self, p: &Vec<f64>) -> Result<()> {
            if p[0].is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidState("non-finite".into()))
            }
        }
    }

    impl CoordinateSpace for Line {
        fn coords<'a>(&self, p: &'a Vec<f64>) -> &'a [f64] {
            p
        }
        fn from_coords(&self, c: Vec<f64>) -> Vec<f64> {
            c
        }
        fn project(&self, _c: &mut Vec<f64>) {}
        fn metric_weight(&self) -> f64 {
            1.0
        }
    }

    struct HalfQuadratic;

    impl Functional<Vec<f64>> for HalfQuadratic {
        fn energy(&self, _t: f64, u: &Vec<f64>) -> Extended {
            Extended::Finite(u[0] * u[0] / 2.0)
        }
        fn lambda(&self, _t: f64) -> f64 {
            1.0
        }
        fn beta(&self, _t: f64) -> f64 {
            0.0
        }
    }

    impl GradFunctional<Vec<f64>> for HalfQuadratic {
        fn energy_gradient(&self, _t: f64, u: &Vec<f64>) -> Vec<f64> {
            vec![u[0]]
        }
    }

    #[test]
    fn penalized_objective_quadratic() {
        // E = v²/2, base = 0, v = 2, τ = 1 → 2 + 4/2 = 4.
        let v = penalized_objective(&Line, &HalfQuadratic, 0.0, 1.0, &vec![0.0], &vec![2.0])
            .unwrap()
            .finite()
            .unwrap();
        assert!((v - 4.0).abs() < 1e-14);
    }

    #[test]
    fn penalized_objective_at_base_is_energy() {
        let base = vec![1.3];
        let v = penalized_objective(&Line, &HalfQuadratic, 0.0, 0.7, &base, &base)
            .unwrap()
            .finite()
            .unwrap();
        assert!((v - 1.3 * 1.3 / 2.0).abs() < 1e-14);
    }

    #[test]
    fn penalized_objective_rejects_bad_tau() {
        let err =
            penalized_objective(&Line, &HalfQuadratic, 0.0, 0.0, &vec![0.0], &vec![1.0]).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn prox_quadratic_line() {
        // E = v²/2, base = 1, τ = 0.5: stationarity (v-1)/τ + v = 0 → v = 2/3.
        let r = prox(
            &Line,
            &HalfQuadratic,
            0.0,
            0.5,
            &vec![1.0],
            &ProxOptions::default(),
        )
        .unwrap();
        assert!((r.minimizer[0] - 2.0 / 3.0).abs() < 1e-8);
        // Moreau–Yosida value: (2/3)²/2 + (1/3)²/(2·0.5) = 1/3.
        assert!((r.value - 1.0 / 3.0).abs() < 1e-10);
        assert!(r.converged);
    }

    #[test]
    fn moreau_yosida_small_tau_approaches_energy() {
        let v = moreau_yosida_value(
            &Line,
            &HalfQuadratic,
            0.0,
            1e-4,
            &vec![1.0],
            &ProxOptions::default(),
        )
        .unwrap();
        assert!((v - 0.5).abs() < 1e-3);
    }

    #[test]
    fn moreau_yosida_monotone_in_tau() {
        // Growing τ weakens the penalty, so the infimum can only drop.
        let mut last = f64::NEG_INFINITY;
        for tau in [0.5, 0.25, 0.1, 0.01] {
            let v = moreau_yosida_value(
                &Line,
                &HalfQuadratic,
                0.0,
                tau,
                &vec![1.0],
                &ProxOptions::default(),
            )
            .unwrap();
            assert!(v >= last - 1e-12, "value not nonincreasing in τ");
            last = v;
        }
    }

    #[test]
    fn tau_star_for_nonnegative_lambda_is_one() {
        assert_eq!(tau_star(|_| 1.0, 1.0), 1.0);
        assert_eq!(tau_star(|_| 0.0, 5.0), 1.0);
    }

    #[test]
    fn tau_star_under_negative_lambda() {
        let ts = tau_star(|_| -2.0, 1.0);
        assert!((ts - 0.25).abs() < 1e-12);
    }
}
