//! Euclidean instantiation: smooth energies on R^d, a Newton-based proximal
//! solver, and an ODE reference integrator for `u' = -∇E(t, u)` that serves
//! as an independent oracle for the abstract scheme.

use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::metric::{
    self, CoordinateSpace, Functional, GradFunctional, ProxError, ProxOptions, ProxProblem,
    ProxResult, Space,
};
use crate::ode::{self, OdeOptions, OdeSolution};

#[derive(Clone, Debug, PartialEq)]
pub struct EuclideanPoint(pub Vec<f64>);

impl EuclideanPoint {
    pub fn scalar(x: f64) -> Self {
        EuclideanPoint(vec![x])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EuclideanSpace {
    pub dim: usize,
}

impl Space for EuclideanSpace {
    type Point = EuclideanPoint;

    fn distance(&self, a: &EuclideanPoint, b: &EuclideanPoint) -> f64 {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    fn interpolate(&self, a: &EuclideanPoint, b: &EuclideanPoint, s: f64) -> EuclideanPoint {
        EuclideanPoint(
            a.0.iter()
                .zip(&b.0)
                .map(|(x, y)| x * (1.0 - s) + y * s)
                .collect(),
        )
    }

    fn validate(&self, p: &EuclideanPoint) -> Result<()> {
        if p.0.len() != self.dim {
            return Err(Error::precondition(format!(
                "dimension mismatch: {} vs {}",
                p.0.len(),
                self.dim
            )));
        }
        if p.0.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("non-finite coordinate".into()));
        }
        Ok(())
    }
}

impl CoordinateSpace for EuclideanSpace {
    fn coords<'a>(&self, p: &'a EuclideanPoint) -> &'a [f64] {
        &p.0
    }

    fn from_coords(&self, coords: Vec<f64>) -> EuclideanPoint {
        EuclideanPoint(coords)
    }

    fn project(&self, _coords: &mut Vec<f64>) {}

    fn metric_weight(&self) -> f64 {
        1.0
    }
}

/// Smooth time-dependent energy on R^d.
pub trait EuclideanEnergy {
    fn dim(&self) -> usize;
    fn value(&self, t: f64, x: &[f64]) -> f64;
    fn gradient(&self, t: f64, x: &[f64], out: &mut [f64]);

    /// Row-major d×d Hessian; the default differentiates the gradient.
    fn hessian(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut h = vec![0.0; d * d];
        let mut xp = x.to_vec();
        let mut gp = vec![0.0; d];
        let mut gm = vec![0.0; d];
        for j in 0..d {
            let step = 1e-6 * x[j].abs().max(1.0);
            xp[j] = x[j] + step;
            self.gradient(t, &xp, &mut gp);
            xp[j] = x[j] - step;
            self.gradient(t, &xp, &mut gm);
            xp[j] = x[j];
            for i in 0..d {
                h[i * d + j] = (gp[i] - gm[i]) / (2.0 * step);
            }
        }
        h
    }

    fn time_derivative(&self, t: f64, x: &[f64]) -> Option<f64> {
        let _ = (t, x);
        None
    }

    fn lambda(&self, t: f64) -> f64;

    fn beta(&self, t: f64) -> f64 {
        let _ = t;
        0.0
    }
}

impl<E: EuclideanEnergy> Functional<EuclideanPoint> for E {
    fn energy(&self, t: f64, u: &EuclideanPoint) -> Extended {
        Extended::Finite(self.value(t, &u.0))
    }

    fn time_derivative(&self, t: f64, u: &EuclideanPoint) -> Option<f64> {
        EuclideanEnergy::time_derivative(self, t, &u.0)
    }

    fn lambda(&self, t: f64) -> f64 {
        EuclideanEnergy::lambda(self, t)
    }

    fn beta(&self, t: f64) -> f64 {
        EuclideanEnergy::beta(self, t)
    }
}

impl<E: EuclideanEnergy> GradFunctional<EuclideanPoint> for E {
    fn energy_gradient(&self, t: f64, u: &EuclideanPoint) -> Vec<f64> {
        let mut g = vec![0.0; u.0.len()];
        self.gradient(t, &u.0, &mut g);
        g
    }
}

/// Solves the dense linear system `m x = rhs` in place (partial pivoting);
/// dimensions here are tiny.
fn solve_dense(mut m: Vec<f64>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if m[r * n + col].abs() > m[pivot * n + col].abs() {
                pivot = r;
            }
        }
        if m[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for c in 0..n {
                m.swap(col * n + c, pivot * n + c);
            }
            rhs.swap(col, pivot);
        }
        let diag = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / diag;
            for c in col..n {
                m[r * n + c] -= f * m[col * n + c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for c in col + 1..n {
            acc -= m[col * n + c] * rhs[c];
        }
        rhs[col] = acc / m[col * n + col];
    }
    Some(rhs)
}

const NEWTON_REJECTION_CAP: usize = 20;

/// Proximal step for a smooth Euclidean energy: Newton on the stationarity
/// system `(v - base)/τ + ∇E(t, v) = 0` with an Armijo safeguard, falling
/// back to the generic projected-gradient solver after repeated rejections.
/// Converged when the stationarity residual is ≤ `1e-10 · max(1, |base|)`.
pub fn euclidean_prox<E: EuclideanEnergy>(
    energy: &E,
    t: f64,
    tau: f64,
    base: &EuclideanPoint,
) -> std::result::Result<ProxResult<EuclideanPoint>, ProxError<EuclideanPoint>> {
    let space = EuclideanSpace { dim: energy.dim() };
    space.validate(base)?;
    if tau <= 0.0 {
        return Err(Error::precondition(format!("step τ = {tau} must be > 0")).into());
    }
    let lneg = metric::lambda_negative_part(|s| EuclideanEnergy::lambda(energy, s), t + 1.0);
    if lneg > 0.0 && tau >= 1.0 / lneg {
        return Err(Error::precondition(format!(
            "step τ = {tau} outside the convexity window (0, {})",
            1.0 / lneg
        ))
        .into());
    }

    let d = energy.dim();
    let tol = 1e-10 * base.norm().max(1.0);
    let objective = |x: &[f64]| -> f64 {
        let pen: f64 = x
            .iter()
            .zip(&base.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / (2.0 * tau);
        energy.value(t, x) + pen
    };
    let residual_vec = |x: &[f64], out: &mut [f64]| {
        energy.gradient(t, x, out);
        for i in 0..d {
            out[i] += (x[i] - base.0[i]) / tau;
        }
    };

    let mut x = base.0.clone();
    let mut r = vec![0.0; d];
    residual_vec(&x, &mut r);
    let mut fx = objective(&x);
    let mut rejections = 0;
    let mut iterations = 0;

    while iterations < 200 {
        let rnorm = r.iter().map(|a| a * a).sum::<f64>().sqrt();
        if rnorm <= tol {
            let point = EuclideanPoint(x);
            let distance_moved = space.distance(base, &point);
            return Ok(ProxResult {
                value: fx,
                minimizer: point,
                distance_moved,
                iterations,
                converged: true,
            });
        }
        iterations += 1;

        let mut jac = energy.hessian(t, &x);
        for i in 0..d {
            jac[i * d + i] += 1.0 / tau;
        }
        let step = solve_dense(jac, r.iter().map(|v| -v).collect());
        let mut advanced = false;
        if let Some(s) = step {
            let mut alpha = 1.0;
            for _ in 0..30 {
                let cand: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a + alpha * b).collect();
                let fc = objective(&cand);
                if fc.is_finite() && fc < fx - 1e-4 * alpha * rnorm * rnorm.min(1.0) {
                    x = cand;
                    fx = fc;
                    advanced = true;
                    break;
                }
                alpha *= 0.5;
            }
        }
        if advanced {
            residual_vec(&x, &mut r);
            continue;
        }
        rejections += 1;
        if rejections >= NEWTON_REJECTION_CAP {
            break;
        }
        // Plain damped gradient step before retrying Newton.
        let scale = 0.5 * tau;
        for i in 0..d {
            x[i] -= scale * r[i];
        }
        fx = objective(&x);
        residual_vec(&x, &mut r);
    }

    // Fallback: generic projected-gradient path.
    let opts = ProxOptions {
        grad_tol_rel: 1e-12,
        ..ProxOptions::default()
    };
    metric::prox_from(
        &space,
        energy,
        t,
        tau,
        base,
        &EuclideanPoint(x),
        &opts,
    )
}

/// A Euclidean energy bundled with its space; the `ProxProblem` the scheme
/// consumes, backed by the Newton solver.
#[derive(Clone, Debug)]
pub struct EuclideanProblem<E> {
    pub energy: E,
    pub label: Option<String>,
}

impl<E: EuclideanEnergy> EuclideanProblem<E> {
    pub fn new(energy: E) -> Self {
        EuclideanProblem {
            energy,
            label: None,
        }
    }

    pub fn labelled(energy: E, label: impl Into<String>) -> Self {
        EuclideanProblem {
            energy,
            label: Some(label.into()),
        }
    }

    pub fn space(&self) -> EuclideanSpace {
        EuclideanSpace {
            dim: self.energy.dim(),
        }
    }
}

impl<E: EuclideanEnergy> ProxProblem for EuclideanProblem<E> {
    type Point = EuclideanPoint;

    fn distance(&self, a: &EuclideanPoint, b: &EuclideanPoint) -> f64 {
        self.space().distance(a, b)
    }

    fn energy(&self, t: f64, u: &EuclideanPoint) -> Extended {
        Extended::Finite(self.energy.value(t, &u.0))
    }

    fn time_derivative(&self, t: f64, u: &EuclideanPoint) -> Option<f64> {
        EuclideanEnergy::time_derivative(&self.energy, t, &u.0)
    }

    fn lambda(&self, t: f64) -> f64 {
        EuclideanEnergy::lambda(&self.energy, t)
    }

    fn beta(&self, t: f64) -> f64 {
        EuclideanEnergy::beta(&self.energy, t)
    }

    fn prox(
        &self,
        t: f64,
        tau: f64,
        base: &EuclideanPoint,
    ) -> std::result::Result<ProxResult<EuclideanPoint>, ProxError<EuclideanPoint>> {
        euclidean_prox(&self.energy, t, tau, base)
    }

    fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }
}

/// Reference trajectory of `u' = -∇E(t, u)` by adaptive embedded
/// Runge–Kutta; every requested sample time is hit exactly.
pub fn ode_reference<E: EuclideanEnergy>(
    energy: &E,
    u0: &EuclideanPoint,
    sample_times: &[f64],
    opts: &OdeOptions,
) -> Result<OdeSolution> {
    let d = energy.dim();
    let mut g = vec![0.0; d];
    ode::integrate(
        |t, y, dy| {
            energy.gradient(t, y, &mut g);
            for i in 0..d {
                dy[i] = -g[i];
            }
        },
        0.0,
        &u0.0,
        sample_times,
        opts,
    )
}

// ---------------------------------------------------------------------------
// Catalog energies.
// ---------------------------------------------------------------------------

/// `E(t, v) = |v|²/2`; gradient flow `u(t) = e^{-t} u0`.
#[derive(Clone, Debug)]
pub struct Quadratic {
    pub dim: usize,
}

impl EuclideanEnergy for Quadratic {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _t: f64, x: &[f64]) -> f64 {
        0.5 * x.iter().map(|a| a * a).sum::<f64>()
    }
    fn gradient(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }
    fn hessian(&self, _t: f64, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            h[i * d + i] = 1.0;
        }
        h
    }
    fn time_derivative(&self, _t: f64, _x: &[f64]) -> Option<f64> {
        Some(0.0)
    }
    fn lambda(&self, _t: f64) -> f64 {
        1.0
    }
}

/// `E(t, v) = (1+t)|v|²/2`; gradient flow `u(t) = e^{-t - t²/2} u0`.
#[derive(Clone, Debug)]
pub struct TimeRampedQuadratic {
    pub dim: usize,
}

impl EuclideanEnergy for TimeRampedQuadratic {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, t: f64, x: &[f64]) -> f64 {
        0.5 * (1.0 + t) * x.iter().map(|a| a * a).sum::<f64>()
    }
    fn gradient(&self, t: f64, x: &[f64], out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(x) {
            *o = (1.0 + t) * a;
        }
    }
    fn hessian(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            h[i * d + i] = 1.0 + t;
        }
        h
    }
    fn time_derivative(&self, _t: f64, x: &[f64]) -> Option<f64> {
        Some(0.5 * x.iter().map(|a| a * a).sum::<f64>())
    }
    fn lambda(&self, t: f64) -> f64 {
        1.0 + t
    }
    fn beta(&self, _t: f64) -> f64 {
        0.5
    }
}

/// Scalar double well `E(v) = (v² - 1)²/4`, convexity modulus -1.
#[derive(Clone, Debug)]
pub struct DoubleWell;

impl EuclideanEnergy for DoubleWell {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, _t: f64, x: &[f64]) -> f64 {
        let s = x[0] * x[0] - 1.0;
        0.25 * s * s
    }
    fn gradient(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        out[0] = x[0] * x[0] * x[0] - x[0];
    }
    fn hessian(&self, _t: f64, x: &[f64]) -> Vec<f64> {
        vec![3.0 * x[0] * x[0] - 1.0]
    }
    fn time_derivative(&self, _t: f64, _x: &[f64]) -> Option<f64> {
        Some(0.0)
    }
    fn lambda(&self, _t: f64) -> f64 {
        -1.0
    }
}

/// Scalar `E(v) = cos v`; used for critical-point cases.
#[derive(Clone, Debug)]
pub struct Cosine;

impl EuclideanEnergy for Cosine {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, _t: f64, x: &[f64]) -> f64 {
        x[0].cos()
    }
    fn gradient(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        out[0] = -x[0].sin();
    }
    fn hessian(&self, _t: f64, x: &[f64]) -> Vec<f64> {
        vec![-x[0].cos()]
    }
    fn lambda(&self, _t: f64) -> f64 {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prox_quadratic_2d() {
        let r = euclidean_prox(
            &Quadratic { dim: 2 },
            0.0,
            1.0,
            &EuclideanPoint(vec![1.0, 1.0]),
        )
        .unwrap();
        assert!((r.minimizer.0[0] - 0.5).abs() < 1e-12);
        assert!((r.minimizer.0[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn prox_time_ramped_linear_solve() {
        // E(t,v) = (1+t)v²/2, base = 1, t = 1, τ = 0.5 → v = 1/(1 + τ(1+t)) = 0.5.
        let r = euclidean_prox(
            &TimeRampedQuadratic { dim: 1 },
            1.0,
            0.5,
            &EuclideanPoint::scalar(1.0),
        )
        .unwrap();
        assert!((r.minimizer.0[0] - 0.5).abs() < 1e-11);
    }

    #[test]
    fn prox_at_critical_point_stays_put() {
        let r = euclidean_prox(&Cosine, 0.0, 0.2, &EuclideanPoint::scalar(0.0)).unwrap();
        assert!(r.minimizer.0[0].abs() < 1e-12);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn prox_rejects_window_violation() {
        // λ = -1 ⇒ window (0, 1).
        let err = euclidean_prox(&DoubleWell, 0.0, 1.5, &EuclideanPoint::scalar(0.2)).unwrap_err();
        assert!(matches!(err, ProxError::Invalid(Error::Precondition(_))));
    }

    #[test]
    fn euclidean_prox_agrees_with_generic_solver() {
        // Two independent routes to the same proximal point.
        let space = EuclideanSpace { dim: 1 };
        let energy = TimeRampedQuadratic { dim: 1 };
        let base = EuclideanPoint::scalar(0.8);
        let newton = euclidean_prox(&energy, 0.3, 0.2, &base).unwrap();
        let generic =
            metric::prox(&space, &energy, 0.3, 0.2, &base, &ProxOptions::default()).unwrap();
        assert!((newton.minimizer.0[0] - generic.minimizer.0[0]).abs() < 1e-7);
        assert!((newton.value - generic.value).abs() < 1e-10);
    }

    #[test]
    fn reference_flow_quadratic() {
        let sol = ode_reference(
            &Quadratic { dim: 1 },
            &EuclideanPoint::scalar(1.0),
            &[0.5, 1.0],
            &OdeOptions::default(),
        )
        .unwrap();
        for (t, y) in &sol.samples {
            assert!((y[0] - (-t).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn reference_flow_time_ramped() {
        let sol = ode_reference(
            &TimeRampedQuadratic { dim: 1 },
            &EuclideanPoint::scalar(1.0),
            &[1.0],
            &OdeOptions::default(),
        )
        .unwrap();
        let y = sol.sample(1.0).unwrap()[0];
        assert!((y - (-1.5f64).exp()).abs() < 1e-8);
    }
}
