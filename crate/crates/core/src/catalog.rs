//! Built-in functional catalog and initial-datum constructors, shared by
//! the command-line front end and the test suites. Arbitrary closures stay
//! a library-level feature; everything here is selectable by name.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::euclidean::{DoubleWell, EuclideanEnergy, EuclideanPoint, Quadratic, TimeRampedQuadratic};
use crate::wasserstein1d::{
    pair_fn, space_time_fn, time_fn, EnergyTerms, InteractionTerm, InternalTerm, PotentialTerm,
    QuantileMeasure,
};

/// Euclidean catalog entries behind one dispatching energy.
#[derive(Clone, Debug)]
pub enum EuclideanCatalog {
    Quadratic(Quadratic),
    TimeRampedQuadratic(TimeRampedQuadratic),
    DoubleWell(DoubleWell),
}

impl EuclideanEnergy for EuclideanCatalog {
    fn dim(&self) -> usize {
        match self {
            EuclideanCatalog::Quadratic(e) => e.dim(),
            EuclideanCatalog::TimeRampedQuadratic(e) => e.dim(),
            EuclideanCatalog::DoubleWell(e) => e.dim(),
        }
    }
    fn value(&self, t: f64, x: &[f64]) -> f64 {
        match self {
            EuclideanCatalog::Quadratic(e) => e.value(t, x),
            EuclideanCatalog::TimeRampedQuadratic(e) => e.value(t, x),
            EuclideanCatalog::DoubleWell(e) => e.value(t, x),
        }
    }
    fn gradient(&self, t: f64, x: &[f64], out: &mut [f64]) {
        match self {
            EuclideanCatalog::Quadratic(e) => e.gradient(t, x, out),
            EuclideanCatalog::TimeRampedQuadratic(e) => e.gradient(t, x, out),
            EuclideanCatalog::DoubleWell(e) => e.gradient(t, x, out),
        }
    }
    fn hessian(&self, t: f64, x: &[f64]) -> Vec<f64> {
        match self {
            EuclideanCatalog::Quadratic(e) => e.hessian(t, x),
            EuclideanCatalog::TimeRampedQuadratic(e) => e.hessian(t, x),
            EuclideanCatalog::DoubleWell(e) => e.hessian(t, x),
        }
    }
    fn time_derivative(&self, t: f64, x: &[f64]) -> Option<f64> {
        match self {
            EuclideanCatalog::Quadratic(e) => e.time_derivative(t, x),
            EuclideanCatalog::TimeRampedQuadratic(e) => e.time_derivative(t, x),
            EuclideanCatalog::DoubleWell(e) => e.time_derivative(t, x),
        }
    }
    fn lambda(&self, t: f64) -> f64 {
        match self {
            EuclideanCatalog::Quadratic(e) => e.lambda(t),
            EuclideanCatalog::TimeRampedQuadratic(e) => e.lambda(t),
            EuclideanCatalog::DoubleWell(e) => e.lambda(t),
        }
    }
    fn beta(&self, t: f64) -> f64 {
        match self {
            EuclideanCatalog::Quadratic(e) => e.beta(t),
            EuclideanCatalog::TimeRampedQuadratic(e) => e.beta(t),
            EuclideanCatalog::DoubleWell(e) => e.beta(t),
        }
    }
}

pub const EUCLIDEAN_NAMES: &[&str] = &["quadratic", "time_ramped_quadratic", "double_well"];

pub fn euclidean_by_name(name: &str, dim: usize) -> Result<EuclideanCatalog> {
    match name {
        "quadratic" => Ok(EuclideanCatalog::Quadratic(Quadratic { dim })),
        "time_ramped_quadratic" => Ok(EuclideanCatalog::TimeRampedQuadratic(
            TimeRampedQuadratic { dim },
        )),
        "double_well" => {
            if dim != 1 {
                return Err(Error::precondition("double_well is one-dimensional"));
            }
            Ok(EuclideanCatalog::DoubleWell(DoubleWell))
        }
        other => Err(Error::precondition(format!(
            "unknown euclidean functional {other:?} (expected one of {EUCLIDEAN_NAMES:?})"
        ))),
    }
}

/// Diffusion-coefficient profiles for entropy terms.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KappaSpec {
    Constant { value: f64 },
    /// `κ(t) = scale/(1 + t)`.
    InverseLinear { scale: f64 },
    /// `κ(t) = scale·e^{-t}`.
    ExpDecay { scale: f64 },
}

impl KappaSpec {
    fn closures(self) -> Result<(crate::wasserstein1d::TimeFn, crate::wasserstein1d::TimeFn)> {
        let positive = |v: f64| {
            if v > 0.0 {
                Ok(v)
            } else {
                Err(Error::precondition("kappa scale must be positive"))
            }
        };
        match self {
            KappaSpec::Constant { value } => {
                let v = positive(value)?;
                Ok((time_fn(move |_| v), time_fn(|_| 0.0)))
            }
            KappaSpec::InverseLinear { scale } => {
                let s = positive(scale)?;
                Ok((
                    time_fn(move |t| s / (1.0 + t)),
                    time_fn(move |t| -s / ((1.0 + t) * (1.0 + t))),
                ))
            }
            KappaSpec::ExpDecay { scale } => {
                let s = positive(scale)?;
                Ok((time_fn(move |t| s * (-t).exp()), time_fn(move |t| -s * (-t).exp())))
            }
        }
    }
}

/// Confinement `V(t,x) = a(t)(x - m(t))²/2` with `a(t) = a0 + a1·t` and
/// `m(t) = m_amplitude·sin t`, plus entropy with the chosen κ profile.
/// Declared convexity modulus is `a(t)`.
pub fn ou_fokker_planck(a0: f64, a1: f64, m_amplitude: f64, kappa: KappaSpec) -> Result<EnergyTerms> {
    if a0 <= 0.0 || a1 < 0.0 {
        return Err(Error::precondition("need a0 > 0 and a1 >= 0"));
    }
    let a = move |t: f64| a0 + a1 * t;
    let m = move |t: f64| m_amplitude * t.sin();
    let m_dt = move |t: f64| m_amplitude * t.cos();
    let (k, k_dt) = kappa.closures()?;
    // |∂_t V| ≤ (|a'|·max(1, m²) + (1 + |m|)|a m'|)(1 + x²).
    let m_max = m_amplitude.abs();
    let beta = move |t: f64| a1 * m_max.powi(2).max(1.0) + (1.0 + m_max) * (a(t) * m_dt(t)).abs();
    Ok(EnergyTerms::new()
        .with_entropy(k, Some(k_dt))
        .with_potential(PotentialTerm {
            value: space_time_fn(move |t, x| 0.5 * a(t) * (x - m(t)) * (x - m(t))),
            gradient: space_time_fn(move |t, x| a(t) * (x - m(t))),
            time_derivative: Some(space_time_fn(move |t, x| {
                let d = x - m(t);
                0.5 * a1 * d * d - a(t) * m_dt(t) * d
            })),
        })
        .with_lambda(time_fn(a))
        .with_beta(time_fn(beta))
        .with_label("ou_fokker_planck"))
}

/// `V(t,x) = cos(2πt)·x²/2` with constant-κ entropy: the declared modulus
/// `λ(t) = cos(2πt)` changes sign.
pub fn cosine_quadratic(kappa: f64) -> Result<EnergyTerms> {
    if kappa <= 0.0 {
        return Err(Error::precondition("kappa must be positive"));
    }
    let omega = 2.0 * std::f64::consts::PI;
    Ok(EnergyTerms::new()
        .with_entropy(time_fn(move |_| kappa), Some(time_fn(|_| 0.0)))
        .with_potential(PotentialTerm {
            value: space_time_fn(move |t, x| 0.5 * (omega * t).cos() * x * x),
            gradient: space_time_fn(move |t, x| (omega * t).cos() * x),
            time_derivative: Some(space_time_fn(move |t, x| {
                -0.5 * omega * (omega * t).sin() * x * x
            })),
        })
        .with_lambda(time_fn(move |t| (omega * t).cos()))
        .with_beta(time_fn(move |_| 0.5 * omega))
        .with_label("cosine_quadratic"))
}

/// Entropy only, constant κ: the heat-flow instance.
pub fn heat(kappa: f64) -> Result<EnergyTerms> {
    if kappa <= 0.0 {
        return Err(Error::precondition("kappa must be positive"));
    }
    Ok(EnergyTerms::new()
        .with_entropy(time_fn(move |_| kappa), Some(time_fn(|_| 0.0)))
        .with_lambda(time_fn(|_| 0.0))
        .with_beta(time_fn(|_| 0.0))
        .with_label("heat"))
}

/// Entropy with `κ(t) = e^{-t}`: admissible kernel whose time variation is
/// unbounded against the second moment.
pub fn decaying_entropy() -> EnergyTerms {
    EnergyTerms::new()
        .with_entropy(time_fn(|t| (-t).exp()), Some(time_fn(|t| -(-t).exp())))
        .with_lambda(time_fn(|_| 0.0))
        .with_beta(time_fn(|_| 0.0))
        .with_label("decaying_entropy")
}

/// Pairwise attraction `W(t,x,y) = strength·(x-y)²/2`.
pub fn quadratic_interaction(strength: f64) -> Result<EnergyTerms> {
    if strength <= 0.0 {
        return Err(Error::precondition("strength must be positive"));
    }
    Ok(EnergyTerms::new()
        .with_interaction(InteractionTerm {
            value: pair_fn(move |_, x, y| 0.5 * strength * (x - y) * (x - y)),
            gradient_x: pair_fn(move |_, x, y| strength * (x - y)),
            time_derivative: Some(pair_fn(|_, _, _| 0.0)),
            growth_constant: strength,
        })
        .with_lambda(time_fn(|_| 0.0))
        .with_beta(time_fn(|_| 0.0))
        .with_label("quadratic_interaction"))
}

/// Internal energy `U(z) = z^m/(m-1)` (pressure `z^m`); `m = 2` is the
/// classical porous-medium case.
pub fn porous_medium(exponent: f64) -> Result<EnergyTerms> {
    if exponent <= 1.0 {
        return Err(Error::precondition("exponent must exceed 1"));
    }
    let m = exponent;
    Ok(EnergyTerms::new()
        .with_internal(InternalTerm {
            value: space_time_fn(move |_, z| z.powf(m) / (m - 1.0)),
            dz: space_time_fn(move |_, z| m * z.powf(m - 1.0) / (m - 1.0)),
            time_derivative: Some(space_time_fn(|_, _| 0.0)),
            rate_bounds: Some((time_fn(|_| 0.0), time_fn(|_| 0.0))),
            lower_bound: Some((0.5, 0.0, 0.0)),
        })
        .with_lambda(time_fn(|_| 0.0))
        .with_beta(time_fn(|_| 0.0))
        .with_label("porous_medium"))
}

pub const WASSERSTEIN_NAMES: &[&str] = &[
    "ou_fokker_planck",
    "cosine_quadratic",
    "heat",
    "decaying_entropy",
    "quadratic_interaction",
    "porous_medium",
];

/// Parameter schemas for the named quantile-space functionals.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuParams {
    #[serde(default = "one")]
    pub a0: f64,
    #[serde(default)]
    pub a1: f64,
    #[serde(default)]
    pub m_amplitude: f64,
    pub kappa: KappaSpec,
}

fn one() -> f64 {
    1.0
}

pub fn wasserstein_by_name(name: &str, params: &serde_json::Value) -> Result<EnergyTerms> {
    match name {
        "ou_fokker_planck" => {
            let p: OuParams = serde_json::from_value(params.clone())
                .map_err(|e| Error::precondition(format!("functional.params: {e}")))?;
            ou_fokker_planck(p.a0, p.a1, p.m_amplitude, p.kappa)
        }
        "cosine_quadratic" => {
            let kappa = scalar_param(params, "kappa", 1.0)?;
            cosine_quadratic(kappa)
        }
        "heat" => {
            let kappa = scalar_param(params, "kappa", 1.0)?;
            heat(kappa)
        }
        "decaying_entropy" => Ok(decaying_entropy()),
        "quadratic_interaction" => {
            let s = scalar_param(params, "strength", 1.0)?;
            quadratic_interaction(s)
        }
        "porous_medium" => {
            let m = scalar_param(params, "exponent", 2.0)?;
            porous_medium(m)
        }
        other => Err(Error::precondition(format!(
            "unknown wasserstein functional {other:?} (expected one of {WASSERSTEIN_NAMES:?})"
        ))),
    }
}

fn scalar_param(params: &serde_json::Value, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| Error::precondition(format!("functional.params.{key}: expected number"))),
    }
}

/// Initial-datum description shared by both spaces.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Euclidean coordinates.
    Point { coords: Vec<f64> },
    Gaussian {
        mean: f64,
        #[serde(default = "one")]
        variance: f64,
    },
    Uniform { a: f64, b: f64 },
    GaussianMixture { components: Vec<(f64, f64, f64)> },
    Dirac { at: f64 },
}

impl InitialSpec {
    pub fn euclidean(&self, dim: usize) -> Result<EuclideanPoint> {
        match self {
            InitialSpec::Point { coords } => {
                if coords.len() != dim {
                    return Err(Error::precondition(format!(
                        "initial.coords: expected {dim} entries, got {}",
                        coords.len()
                    )));
                }
                Ok(EuclideanPoint(coords.clone()))
            }
            _ => Err(Error::precondition(
                "initial: euclidean runs take {\"type\": \"point\"}",
            )),
        }
    }

    pub fn quantile(&self, n: usize) -> Result<QuantileMeasure> {
        match self {
            InitialSpec::Gaussian { mean, variance } => {
                if *variance <= 0.0 {
                    return Err(Error::precondition("initial.variance must be positive"));
                }
                QuantileMeasure::gaussian(n, *mean, variance.sqrt())
            }
            InitialSpec::Uniform { a, b } => QuantileMeasure::uniform(n, *a, *b),
            InitialSpec::GaussianMixture { components } => {
                QuantileMeasure::gaussian_mixture(n, components)
            }
            InitialSpec::Dirac { at } => QuantileMeasure::dirac(n, *at),
            InitialSpec::Point { .. } => Err(Error::precondition(
                "initial: wasserstein runs take a measure-valued initial datum",
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Functional;

    #[test]
    fn unknown_names_are_rejected() {
        assert!(euclidean_by_name("nope", 1).is_err());
        assert!(wasserstein_by_name("nope", &serde_json::json!({})).is_err());
    }

    #[test]
    fn ou_declares_lambda_equal_to_stiffness() {
        let terms = ou_fokker_planck(1.0, 0.5, 1.0, KappaSpec::Constant { value: 1.0 }).unwrap();
        assert!((Functional::<QuantileMeasure>::lambda(&terms, 0.0) - 1.0).abs() < 1e-15);
        assert!((Functional::<QuantileMeasure>::lambda(&terms, 2.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ou_beta_dominates_potential_variation() {
        let terms = ou_fokker_planck(1.0, 0.5, 1.0, KappaSpec::Constant { value: 1.0 }).unwrap();
        let v = terms.potential.as_ref().unwrap();
        let mut worst = f64::INFINITY;
        for i in 0..50 {
            let s = 0.04 * i as f64;
            let t = s + 0.04;
            let rate = crate::quad::integrate(
                |r| Functional::<QuantileMeasure>::beta(&terms, r),
                s,
                t,
            );
            for x in [-4.0, -1.0, 0.0, 0.3, 2.0, 5.0] {
                let lhs = ((v.value)(s, x) - (v.value)(t, x)).abs();
                worst = worst.min(rate * (1.0 + x * x) - lhs);
            }
        }
        assert!(worst >= 0.0, "beta bound violated by {worst}");
    }

    #[test]
    fn every_catalog_name_constructs() {
        for name in WASSERSTEIN_NAMES {
            let params = if *name == "ou_fokker_planck" {
                serde_json::json!({"a0": 1.0, "a1": 0.5, "m_amplitude": 1.0,
                                   "kappa": {"type": "constant", "value": 1.0}})
            } else {
                serde_json::json!({})
            };
            wasserstein_by_name(name, &params).unwrap();
        }
        for name in EUCLIDEAN_NAMES {
            euclidean_by_name(name, 1).unwrap();
        }
    }

    #[test]
    fn initial_specs_build_states() {
        let g = InitialSpec::Gaussian {
            mean: 0.0,
            variance: 1.0,
        };
        assert_eq!(g.quantile(64).unwrap().resolution(), 64);
        let p = InitialSpec::Point {
            coords: vec![1.0, 2.0],
        };
        assert_eq!(p.euclidean(2).unwrap().0, vec![1.0, 2.0]);
        assert!(p.euclidean(3).is_err());
        assert!(g.euclidean(1).is_err());
    }
}
