//! Composite time-dependent energies on quantile measures: entropy with a
//! time-dependent diffusion coefficient, confinement, pairwise interaction,
//! and a general internal-energy density with its pressure.

use std::sync::Arc;

use super::{entropy, QuantileMeasure, QuantileSpace};
use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::metric::{
    self, Functional, GradFunctional, ProxError, ProxOptions, ProxProblem, ProxResult, Space,
};

pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type PairFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

pub fn time_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> TimeFn {
    Arc::new(f)
}

pub fn space_time_fn(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> SpaceTimeFn {
    Arc::new(f)
}

pub fn pair_fn(f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> PairFn {
    Arc::new(f)
}

/// `κ(t) ∫ ρ log ρ` with positive κ.
#[derive(Clone)]
pub struct EntropyTerm {
    pub kappa: TimeFn,
    pub kappa_derivative: Option<TimeFn>,
}

/// `∫ V(t, x) dμ` with spatial gradient and optional ∂_t V.
#[derive(Clone)]
pub struct PotentialTerm {
    pub value: SpaceTimeFn,
    pub gradient: SpaceTimeFn,
    pub time_derivative: Option<SpaceTimeFn>,
}

/// `(1/2) ∬ W(t, x, y) dμ dμ` with symmetric W, the gradient in the first
/// slot, optional ∂_t W, and the declared quadratic-growth constant.
#[derive(Clone)]
pub struct InteractionTerm {
    pub value: PairFn,
    pub gradient_x: PairFn,
    pub time_derivative: Option<PairFn>,
    pub growth_constant: f64,
}

/// `∫ U(t, ρ(x)) dx` with ∂U/∂z, optional ∂U/∂t, and the declared
/// hypothesis constants (rates for the time sandwich, exponents for the
/// lower bound).
#[derive(Clone)]
pub struct InternalTerm {
    pub value: SpaceTimeFn,
    pub dz: SpaceTimeFn,
    pub time_derivative: Option<SpaceTimeFn>,
    /// (a, A) rates bounding ∂_t U between -A·U⁺(0,·) and a·U⁻(0,·).
    pub rate_bounds: Option<(TimeFn, TimeFn)>,
    /// (α, c₁, c₂) with U(0,z) ≥ -c₁z - c₂z^α.
    pub lower_bound: Option<(f64, f64, f64)>,
}

/// Active-term description of a composite energy; every term optional.
#[derive(Clone, Default)]
pub struct EnergyTerms {
    pub entropy: Option<EntropyTerm>,
    pub potential: Option<PotentialTerm>,
    pub interaction: Option<InteractionTerm>,
    pub internal: Option<InternalTerm>,
    lambda: Option<TimeFn>,
    beta: Option<TimeFn>,
    pub label: Option<String>,
}

impl EnergyTerms {
    pub fn new() -> Self {
        EnergyTerms::default()
    }

    pub fn with_entropy(mut self, kappa: TimeFn, kappa_derivative: Option<TimeFn>) -> Self {
        self.entropy = Some(EntropyTerm {
            kappa,
            kappa_derivative,
        });
        self
    }

    pub fn with_potential(mut self, term: PotentialTerm) -> Self {
        self.potential = Some(term);
        self
    }

    pub fn with_interaction(mut self, term: InteractionTerm) -> Self {
        self.interaction = Some(term);
        self
    }

    pub fn with_internal(mut self, term: InternalTerm) -> Self {
        self.internal = Some(term);
        self
    }

    pub fn with_lambda(mut self, lambda: TimeFn) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_beta(mut self, beta: TimeFn) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    fn needs_positive_increments(&self) -> bool {
        self.entropy.is_some() || self.internal.is_some()
    }
}

impl std::fmt::Debug for EnergyTerms {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EnergyTerms")
            .field("entropy", &self.entropy.is_some())
            .field("potential", &self.potential.is_some())
            .field("interaction", &self.interaction.is_some())
            .field("internal", &self.internal.is_some())
            .field("label", &self.label)
            .finish()
    }
}

/// Composite energy value; `+∞` when an internal-energy term is active and
/// the measure has a singular part (a vanishing increment).
pub fn energy(t: f64, mu: &QuantileMeasure, terms: &EnergyTerms) -> Extended {
    let n = mu.resolution();
    let nf = n as f64;
    let q = mu.values();
    let mut total = 0.0;

    if terms.needs_positive_increments() && q.windows(2).any(|w| w[1] - w[0] <= 0.0) {
        return Extended::Infinite;
    }

    if let Some(e) = &terms.entropy {
        match entropy(mu) {
            Extended::Finite(s) => total += (e.kappa)(t) * s,
            Extended::Infinite => return Extended::Infinite,
        }
    }
    if let Some(p) = &terms.potential {
        total += q.iter().map(|x| (p.value)(t, *x)).sum::<f64>() / nf;
    }
    if let Some(w) = &terms.interaction {
        let mut acc = 0.0;
        for (i, x) in q.iter().enumerate() {
            acc += (w.value)(t, *x, *x);
            for y in &q[i + 1..] {
                acc += 2.0 * (w.value)(t, *x, *y);
            }
        }
        total += acc / (2.0 * nf * nf);
    }
    if let Some(u) = &terms.internal {
        for w in q.windows(2) {
            let d = w[1] - w[0];
            let z = 1.0 / (nf * d);
            total += (u.value)(t, z) * d;
        }
    }
    Extended::Finite(total)
}

/// Coordinate gradient of the composite energy. Internal-energy blocks
/// contribute pressure differences `P(t, z_j) − P(t, z_{j-1})`.
pub fn energy_gradient(t: f64, mu: &QuantileMeasure, terms: &EnergyTerms) -> Vec<f64> {
    let n = mu.resolution();
    let nf = n as f64;
    let q = mu.values();
    let mut g = vec![0.0; n];

    if let Some(p) = &terms.potential {
        for (gi, x) in g.iter_mut().zip(q) {
            *gi += (p.gradient)(t, *x) / nf;
        }
    }
    if let Some(w) = &terms.interaction {
        // Symmetry folds the second-slot derivative into the first.
        for (j, x) in q.iter().enumerate() {
            let mut acc = 0.0;
            for y in q {
                acc += (w.gradient_x)(t, *x, *y);
            }
            g[j] += acc / (nf * nf);
        }
    }
    if let Some(e) = &terms.entropy {
        let k = (e.kappa)(t);
        for (j, gj) in g.iter_mut().enumerate() {
            let left = if j > 0 { 1.0 / (q[j] - q[j - 1]) } else { 0.0 };
            let right = if j + 1 < n {
                1.0 / (q[j + 1] - q[j])
            } else {
                0.0
            };
            *gj += -(k / nf) * (left - right);
        }
    }
    if let Some(u) = &terms.internal {
        let pressure_at = |d: f64| {
            let z = 1.0 / (nf * d);
            z * (u.dz)(t, z) - (u.value)(t, z)
        };
        for (j, gj) in g.iter_mut().enumerate() {
            let right = if j + 1 < n {
                pressure_at(q[j + 1] - q[j])
            } else {
                0.0
            };
            let left = if j > 0 { pressure_at(q[j] - q[j - 1]) } else { 0.0 };
            *gj += right - left;
        }
    }
    g
}

/// ∂_t of the composite energy at a fixed measure; `None` when an active
/// term lacks its time derivative, or entropy is infinite.
pub fn energy_time_derivative(t: f64, mu: &QuantileMeasure, terms: &EnergyTerms) -> Option<f64> {
    let n = mu.resolution() as f64;
    let q = mu.values();
    let mut total = 0.0;
    if let Some(e) = &terms.entropy {
        let kd = e.kappa_derivative.as_ref()?;
        total += kd(t) * entropy(mu).finite()?;
    }
    if let Some(p) = &terms.potential {
        let vt = p.time_derivative.as_ref()?;
        total += q.iter().map(|x| vt(t, *x)).sum::<f64>() / n;
    }
    if let Some(w) = &terms.interaction {
        let wt = w.time_derivative.as_ref()?;
        let mut acc = 0.0;
        for x in q {
            for y in q {
                acc += wt(t, *x, *y);
            }
        }
        total += acc / (2.0 * n * n);
    }
    if let Some(u) = &terms.internal {
        let ut = u.time_derivative.as_ref()?;
        for w in q.windows(2) {
            let d = w[1] - w[0];
            if d <= 0.0 {
                return None;
            }
            total += ut(t, 1.0 / (n * d)) * d;
        }
    }
    Some(total)
}

/// `P(t, z) = z ∂U/∂z − U(t, z)`.
pub fn pressure(t: f64, z: f64, internal: &InternalTerm) -> Result<f64> {
    if z < 0.0 {
        return Err(Error::precondition(format!("density value z = {z} < 0")));
    }
    Ok(z * (internal.dz)(t, z) - (internal.value)(t, z))
}

impl Functional<QuantileMeasure> for EnergyTerms {
    fn energy(&self, t: f64, u: &QuantileMeasure) -> Extended {
        energy(t, u, self)
    }

    fn time_derivative(&self, t: f64, u: &QuantileMeasure) -> Option<f64> {
        energy_time_derivative(t, u, self)
    }

    fn lambda(&self, t: f64) -> f64 {
        self.lambda.as_ref().map_or(0.0, |f| f(t))
    }

    fn beta(&self, t: f64) -> f64 {
        self.beta.as_ref().map_or(0.0, |f| f(t))
    }
}

impl GradFunctional<QuantileMeasure> for EnergyTerms {
    fn energy_gradient(&self, t: f64, u: &QuantileMeasure) -> Vec<f64> {
        energy_gradient(t, u, self)
    }
}

/// Proximal step over nondecreasing quantile vectors: projected-gradient
/// descent with isotonic projection; barrier terms keep increments strictly
/// positive at the solution.
pub fn prox_quantile(
    t: f64,
    tau: f64,
    base: &QuantileMeasure,
    terms: &EnergyTerms,
    opts: &ProxOptions,
) -> std::result::Result<ProxResult<QuantileMeasure>, ProxError<QuantileMeasure>> {
    let space = QuantileSpace {
        resolution: base.resolution(),
    };
    metric::prox(&space, terms, t, tau, base, opts)
}

/// Quantile space, composite energy and solver options bundled as the
/// problem the scheme consumes.
#[derive(Clone, Debug)]
pub struct QuantileProblem {
    pub resolution: usize,
    pub terms: EnergyTerms,
    pub options: ProxOptions,
}

impl QuantileProblem {
    pub fn new(resolution: usize, terms: EnergyTerms) -> Self {
        QuantileProblem {
            resolution,
            terms,
            options: ProxOptions::default(),
        }
    }

    pub fn space(&self) -> QuantileSpace {
        QuantileSpace {
            resolution: self.resolution,
        }
    }
}

impl ProxProblem for QuantileProblem {
    type Point = QuantileMeasure;

    fn distance(&self, a: &QuantileMeasure, b: &QuantileMeasure) -> f64 {
        self.space().distance(a, b)
    }

    fn energy(&self, t: f64, u: &QuantileMeasure) -> Extended {
        energy(t, u, &self.terms)
    }

    fn time_derivative(&self, t: f64, u: &QuantileMeasure) -> Option<f64> {
        energy_time_derivative(t, u, &self.terms)
    }

    fn lambda(&self, t: f64) -> f64 {
        Functional::lambda(&self.terms, t)
    }

    fn beta(&self, t: f64) -> f64 {
        Functional::beta(&self.terms, t)
    }

    fn prox(
        &self,
        t: f64,
        tau: f64,
        base: &QuantileMeasure,
    ) -> std::result::Result<ProxResult<QuantileMeasure>, ProxError<QuantileMeasure>> {
        metric::prox(&self.space(), &self.terms, t, tau, base, &self.options)
    }

    fn label(&self) -> Option<&str> {
        self.terms.label.as_deref()
    }
}
