//! The Wasserstein space of probability measures on the line with finite
//! second moment, in quantile coordinates: a measure is the nondecreasing
//! vector of its quantiles at midpoint levels `s_i = (i - 1/2)/N`, and the
//! transport distance is the L² distance between quantile vectors.

mod energy;
mod validate;

pub use energy::{
    energy, energy_gradient, energy_time_derivative, pair_fn, pressure, prox_quantile,
    space_time_fn, time_fn, EnergyTerms, EntropyTerm, InteractionTerm, InternalTerm, PairFn,
    PotentialTerm, QuantileProblem, SpaceTimeFn, TimeFn,
};
pub use validate::{validate_hypotheses, HypothesisCheck, HypothesisReport, SamplePlan};

use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::metric::{CoordinateSpace, Space};
use crate::pde_oracle::GridDensity;
use statrs::distribution::ContinuousCDF;

/// Probability measure on R stored as quantile values at midpoint levels.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantileMeasure {
    q: Vec<f64>,
}

impl QuantileMeasure {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::precondition("empty quantile vector"));
        }
        if q.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("non-finite quantile entry".into()));
        }
        if q.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidState("quantile vector not nondecreasing".into()));
        }
        Ok(QuantileMeasure { q })
    }

    pub(crate) fn from_vec_unchecked(q: Vec<f64>) -> Self {
        debug_assert!(q.windows(2).all(|w| w[1] >= w[0]));
        QuantileMeasure { q }
    }

    pub fn resolution(&self) -> usize {
        self.q.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.q
    }

    /// Midpoint level `s_i = (i + 1/2)/N` of entry `i` (0-based).
    pub fn level(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.q.len() as f64
    }

    pub fn gaussian(n: usize, mean: f64, std_dev: f64) -> Result<Self> {
        if !(std_dev > 0.0) {
            return Err(Error::precondition("standard deviation must be positive"));
        }
        let normal = statrs::distribution::Normal::new(mean, std_dev)
            .map_err(|e| Error::precondition(e.to_string()))?;
        let q = (0..n)
            .map(|i| normal.inverse_cdf((i as f64 + 0.5) / n as f64))
            .collect();
        QuantileMeasure::new(q)
    }

    /// Uniform law on `[a, b]`: `q_i = a + (b - a)·s_i`.
    pub fn uniform(n: usize, a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::precondition("need b > a"));
        }
        QuantileMeasure::new(
            (0..n)
                .map(|i| a + (b - a) * (i as f64 + 0.5) / n as f64)
                .collect(),
        )
    }

    /// Point mass: all quantiles equal.
    pub fn dirac(n: usize, x: f64) -> Result<Self> {
        QuantileMeasure::new(vec![x; n])
    }

    /// Mixture of Gaussians given as (weight, mean, std) triples; quantiles
    /// found by bisection on the mixture CDF.
    pub fn gaussian_mixture(n: usize, components: &[(f64, f64, f64)]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::precondition("empty mixture"));
        }
        let wsum: f64 = components.iter().map(|c| c.0).sum();
        if !(wsum > 0.0) || components.iter().any(|c| c.0 < 0.0 || c.2 <= 0.0) {
            return Err(Error::precondition("mixture weights/stds invalid"));
        }
        let comps: Vec<(f64, statrs::distribution::Normal)> = components
            .iter()
            .map(|&(w, m, s)| {
                statrs::distribution::Normal::new(m, s)
                    .map(|d| (w / wsum, d))
                    .map_err(|e| Error::precondition(e.to_string()))
            })
            .collect::<Result<_>>()?;
        let cdf = |x: f64| -> f64 { comps.iter().map(|(w, d)| w * d.cdf(x)).sum() };
        let lo0 = components
            .iter()
            .map(|c| c.1 - 12.0 * c.2)
            .fold(f64::INFINITY, f64::min);
        let hi0 = components
            .iter()
            .map(|c| c.1 + 12.0 * c.2)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut q = Vec::with_capacity(n);
        for i in 0..n {
            let level = (i as f64 + 0.5) / n as f64;
            let (mut lo, mut hi) = (lo0, hi0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if cdf(mid) < level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            q.push(0.5 * (lo + hi));
        }
        QuantileMeasure::new(q)
    }

    pub fn translate(&self, c: f64) -> Self {
        QuantileMeasure {
            q: self.q.iter().map(|x| x + c).collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.q.iter().sum::<f64>() / self.q.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.q.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / self.q.len() as f64
    }
}

/// Exact 1-D transport distance: `sqrt((1/N) Σ (q_i - p_i)²)`.
pub fn w2_distance(mu: &QuantileMeasure, nu: &QuantileMeasure) -> Result<f64> {
    if mu.resolution() != nu.resolution() {
        return Err(Error::precondition(format!(
            "resolution mismatch: {} vs {}",
            mu.resolution(),
            nu.resolution()
        )));
    }
    let n = mu.resolution() as f64;
    Ok((mu
        .q
        .iter()
        .zip(&nu.q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
        .sqrt())
}

/// `M₂(μ) = (1/N) Σ q_i²`.
pub fn second_moment(mu: &QuantileMeasure) -> f64 {
    mu.q.iter().map(|x| x * x).sum::<f64>() / mu.q.len() as f64
}

/// `∫ρ log ρ` of the piecewise reconstruction:
/// `-(1/N) Σ log(N·Δq_i)` over the N-1 increments; `+∞` when any increment
/// vanishes (singular part).
pub fn entropy(mu: &QuantileMeasure) -> Extended {
    let n = mu.resolution() as f64;
    let mut acc = 0.0;
    for w in mu.q.windows(2) {
        let d = w[1] - w[0];
        if d <= 0.0 {
            return Extended::Infinite;
        }
        acc -= (n * d).ln();
    }
    Extended::Finite(acc / n)
}

/// Entropy floor constants for the line, calibrated once against Gaussian
/// extremizers (which maximize entropy at fixed second moment) with margin
/// for the quantile discretization, then frozen.
pub const OTTO_C: f64 = 1.2;
pub const OTTO_ALPHA: f64 = 0.5;

/// Returns `-C(1 + M₂(μ))^α` and verifies `entropy(μ)` sits above it.
pub fn otto_lower_bound(mu: &QuantileMeasure) -> Result<f64> {
    let bound = -OTTO_C * (1.0 + second_moment(mu)).powf(OTTO_ALPHA);
    match entropy(mu) {
        Extended::Infinite => Ok(bound),
        Extended::Finite(e) => {
            if e >= bound {
                Ok(bound)
            } else {
                Err(Error::Hypothesis(format!(
                    "entropy {e} fell below its moment floor {bound}"
                )))
            }
        }
    }
}

/// Euclidean projection onto the nondecreasing cone (pool adjacent
/// violators). Idempotent; O(n).
pub fn isotonic_project(v: &[f64]) -> Vec<f64> {
    #[derive(Clone, Copy)]
    struct Block {
        sum: f64,
        len: usize,
    }
    let mut blocks: Vec<Block> = Vec::with_capacity(v.len());
    for &x in v {
        let mut b = Block { sum: x, len: 1 };
        while let Some(last) = blocks.last() {
            if last.sum * b.len as f64 > b.sum * last.len as f64 {
                b.sum += last.sum;
                b.len += last.len;
                blocks.pop();
            } else {
                break;
            }
        }
        blocks.push(b);
    }
    let mut out = Vec::with_capacity(v.len());
    for b in blocks {
        let mean = b.sum / b.len as f64;
        out.extend(std::iter::repeat(mean).take(b.len));
    }
    out
}

/// Inverts the piecewise-linear CDF of a cell-averaged density at midpoint
/// levels.
pub fn from_density(rho: &GridDensity, n: usize) -> Result<QuantileMeasure> {
    if n == 0 {
        return Err(Error::precondition("resolution must be positive"));
    }
    let mass = rho.mass();
    if mass <= 0.0 {
        return Err(Error::precondition("zero-mass density"));
    }
    // Normalized cumulative mass at cell edges.
    let m = rho.len();
    let mut cdf = Vec::with_capacity(m + 1);
    cdf.push(0.0);
    let mut acc = 0.0;
    for c in &rho.cells {
        acc += c * rho.dx / mass;
        cdf.push(acc);
    }
    cdf[m] = 1.0;
    let mut q = Vec::with_capacity(n);
    let mut cell = 0usize;
    for i in 0..n {
        let level = (i as f64 + 0.5) / n as f64;
        while cell + 1 < m && cdf[cell + 1] < level {
            cell += 1;
        }
        let seg = cdf[cell + 1] - cdf[cell];
        let x_left = rho.x_min + cell as f64 * rho.dx;
        let x = if seg > 0.0 {
            x_left + (level - cdf[cell]) / seg * rho.dx
        } else {
            x_left
        };
        q.push(x);
    }
    // Rounding can leave microscopic inversions at flat stretches.
    let q = isotonic_project(&q);
    QuantileMeasure::new(q)
}

/// Reconstructs a cell-averaged density by difference quotients of the
/// quantile function: block `[q_i, q_{i+1}]` carries mass `1/N` at density
/// `Δs/Δq`, with half-mass end blocks extended at the first and last
/// interior slopes. Exact-overlap integration onto the target grid.
pub fn to_density(
    mu: &QuantileMeasure,
    x_min: f64,
    x_max: f64,
    cells: usize,
) -> Result<GridDensity> {
    if !(x_max > x_min) || cells == 0 {
        return Err(Error::precondition("invalid target grid"));
    }
    let n = mu.resolution();
    let dx = (x_max - x_min) / cells as f64;
    let mut out = vec![0.0; cells];
    let mut dropped = 0.0;

    let mut deposit_block = |l: f64, r: f64, mass: f64| {
        if mass <= 0.0 {
            return;
        }
        if r - l < 1e-300 {
            // Atom: deposit into the containing cell.
            let idx = ((l - x_min) / dx).floor();
            if idx < 0.0 || idx >= cells as f64 {
                dropped += mass;
            } else {
                out[idx as usize] += mass / dx;
            }
            return;
        }
        let density = mass / (r - l);
        let first = (((l - x_min) / dx).floor().max(0.0)) as usize;
        let last = (((r - x_min) / dx).ceil().min(cells as f64)) as usize;
        if l < x_min {
            dropped += density * (x_min.min(r) - l);
        }
        if r > x_max {
            dropped += density * (r - x_max.max(l));
        }
        for c in first..last.min(cells) {
            let cl = x_min + c as f64 * dx;
            let cr = cl + dx;
            let overlap = (r.min(cr) - l.max(cl)).max(0.0);
            out[c] += density * overlap / dx;
        }
    };

    if n == 1 {
        deposit_block(mu.q[0], mu.q[0], 1.0);
    } else {
        let inner_mass = 1.0 / n as f64;
        let d_first = mu.q[1] - mu.q[0];
        let d_last = mu.q[n - 1] - mu.q[n - 2];
        deposit_block(mu.q[0] - 0.5 * d_first, mu.q[0], 0.5 * inner_mass);
        for w in mu.q.windows(2) {
            deposit_block(w[0], w[1], inner_mass);
        }
        deposit_block(mu.q[n - 1], mu.q[n - 1] + 0.5 * d_last, 0.5 * inner_mass);
    }

    if dropped > 1e-9 {
        return Err(Error::precondition(format!(
            "target grid drops mass {dropped:.3e}; widen [{x_min}, {x_max}]"
        )));
    }
    GridDensity::new(x_min, dx, out)
}

/// Quantile coordinates as a metric space: curves are entrywise linear
/// interpolations of quantile vectors (generalized geodesics on the line).
#[derive(Clone, Copy, Debug)]
pub struct QuantileSpace {
    pub resolution: usize,
}

impl Space for QuantileSpace {
    type Point = QuantileMeasure;

    fn distance(&self, a: &QuantileMeasure, b: &QuantileMeasure) -> f64 {
        w2_distance(a, b).expect("equal resolutions within one space")
    }

    fn interpolate(&self, a: &QuantileMeasure, b: &QuantileMeasure, s: f64) -> QuantileMeasure {
        QuantileMeasure::from_vec_unchecked(
            a.q.iter()
                .zip(&b.q)
                .map(|(x, y)| x * (1.0 - s) + y * s)
                .collect(),
        )
    }

    fn validate(&self, p: &QuantileMeasure) -> Result<()> {
        if p.resolution() != self.resolution {
            return Err(Error::precondition(format!(
                "resolution mismatch: {} vs {}",
                p.resolution(),
                self.resolution
            )));
        }
        Ok(())
    }
}

impl CoordinateSpace for QuantileSpace {
    fn coords<'a>(&self, p: &'a QuantileMeasure) -> &'a [f64] {
        &p.q
    }

    fn from_coords(&self, coords: Vec<f64>) -> QuantileMeasure {
        QuantileMeasure::from_vec_unchecked(coords)
    }

    fn project(&self, coords: &mut Vec<f64>) {
        if coords.windows(2).any(|w| w[1] < w[0]) {
            *coords = isotonic_project(coords);
        }
    }

    fn interior_hint(&self, coords: &mut Vec<f64>) {
        let span = (coords.last().unwrap() - coords[0]).abs().max(1.0);
        let eps = 1e-6 * span / coords.len() as f64;
        for (i, c) in coords.iter_mut().enumerate() {
            *c += eps * i as f64;
        }
    }

    fn metric_weight(&self) -> f64 {
        1.0 / self.resolution as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde_oracle::GaussianState;

    #[test]
    fn w2_identical_is_zero() {
        let mu = QuantileMeasure::gaussian(64, 0.0, 1.0).unwrap();
        assert_eq!(w2_distance(&mu, &mu).unwrap(), 0.0);
    }

    #[test]
    fn w2_translation_is_shift() {
        let a = QuantileMeasure::uniform(128, 0.0, 1.0).unwrap();
        let b = QuantileMeasure::uniform(128, 2.0, 3.0).unwrap();
        assert!((w2_distance(&a, &b).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn w2_gaussian_closed_form() {
        // d²(N(0,1), N(m,σ²)) = m² + (σ-1)²; checked at high resolution.
        let n = 4096;
        let a = QuantileMeasure::gaussian(n, 0.0, 1.0).unwrap();
        for (m, s) in [(0.5, 1.2), (-0.3, 0.8), (1.0, 1.0)] {
            let b = QuantileMeasure::gaussian(n, m, s).unwrap();
            let d2 = w2_distance(&a, &b).unwrap().powi(2);
            let exact = m * m + (s - 1.0) * (s - 1.0);
            assert!((d2 - exact).abs() < 1e-4, "m={m} s={s}: {d2} vs {exact}");
        }
    }

    #[test]
    fn w2_resolution_mismatch_rejected() {
        let a = QuantileMeasure::uniform(32, 0.0, 1.0).unwrap();
        let b = QuantileMeasure::uniform(64, 0.0, 1.0).unwrap();
        assert!(w2_distance(&a, &b).is_err());
    }

    #[test]
    fn second_moment_cases() {
        assert_eq!(second_moment(&QuantileMeasure::dirac(16, 0.0).unwrap()), 0.0);
        let g = QuantileMeasure::gaussian(1024, 0.0, 1.0).unwrap();
        // Midpoint quantile sampling truncates the tails; the deficit decays
        // like 1/N and sits near 1.3e-3 at N = 1024.
        assert!((second_moment(&g) - 1.0).abs() < 2e-3);
    }

    #[test]
    fn isotonic_identity_on_monotone() {
        let v = vec![-1.0, 0.0, 0.5, 2.0];
        assert_eq!(isotonic_project(&v), v);
    }

    #[test]
    fn isotonic_two_point_average() {
        assert_eq!(isotonic_project(&[1.0, 0.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn isotonic_idempotent() {
        let v = vec![3.0, 1.0, 2.0, 0.0, 5.0];
        let p = isotonic_project(&v);
        assert_eq!(isotonic_project(&p), p);
    }

    /// Exhaustive contiguous-block oracle: the projection is blockwise
    /// means of some partition with nondecreasing block values; minimize
    /// distance over all of them.
    fn isotonic_oracle(v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for mask in 0..(1u32 << (n - 1)) {
            let mut cand = Vec::with_capacity(n);
            let mut start = 0;
            for i in 0..n {
                let boundary = i == n - 1 || (mask >> i) & 1 == 1;
                if boundary {
                    let mean = v[start..=i].iter().sum::<f64>() / (i - start + 1) as f64;
                    cand.extend(std::iter::repeat(mean).take(i - start + 1));
                    start = i + 1;
                }
            }
            if cand.windows(2).all(|w| w[1] >= w[0] - 1e-12) {
                let d: f64 = cand.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
                if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                    best = Some((d, cand));
                }
            }
        }
        best.unwrap().1
    }

    #[test]
    fn isotonic_matches_enumeration_oracle() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.gen_range(2..=10);
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let fast = isotonic_project(&v);
            let slow = isotonic_oracle(&v);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-8, "{v:?}");
            }
        }
    }

    #[test]
    fn uniform_density_linear_quantiles() {
        let rho = GridDensity::from_fn(0.0, 2.0, 400, |_| 0.5).unwrap();
        let mu = from_density(&rho, 64).unwrap();
        for (i, q) in mu.values().iter().enumerate() {
            let expect = 2.0 * (i as f64 + 0.5) / 64.0;
            assert!((q - expect).abs() < 1e-10, "i={i}");
        }
    }

    #[test]
    fn density_round_trip_gaussian() {
        let n = 1024;
        let mu = QuantileMeasure::gaussian(n, 0.0, 1.0).unwrap();
        let rho = to_density(&mu, -8.0, 8.0, 1024).unwrap();
        assert!((rho.mass() - 1.0).abs() < 1e-10);
        let back = from_density(&rho, n).unwrap();
        // L¹ density comparison against the exact normal law.
        let exact = GridDensity::gaussian(-8.0, 8.0, 1024, GaussianState::new(0.0, 1.0).unwrap())
            .unwrap();
        let l1: f64 = rho
            .cells
            .iter()
            .zip(&exact.cells)
            .map(|(a, b)| (a - b).abs() * rho.dx)
            .sum();
        assert!(l1 < 1e-2, "L1 error {l1}");
        assert!(w2_distance(&mu, &back).unwrap() < 1e-3);
    }

    #[test]
    fn narrow_density_gives_flat_quantiles() {
        let rho = GridDensity::from_fn(-1.0, 1.0, 2000, |x| {
            (-x * x / (2.0 * 1e-6)).exp()
        })
        .unwrap();
        let mu = from_density(&rho, 32).unwrap();
        let spread = mu.values()[31] - mu.values()[0];
        assert!(spread < 0.01, "spread {spread}");
    }

    #[test]
    fn entropy_of_uniform() {
        // ∫ρ log ρ = -log L on [0, L]; the discrete sum carries (N-1)/N.
        let n = 1024;
        let l = 2.0;
        let mu = QuantileMeasure::uniform(n, 0.0, l).unwrap();
        let e = entropy(&mu).finite().unwrap();
        let expect = -(l.ln()) * (n as f64 - 1.0) / n as f64;
        assert!((e - expect).abs() < 1e-12);
        assert!((e + l.ln()).abs() < 1e-3);
    }

    #[test]
    fn entropy_floor_on_random_mixtures() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let k = rng.gen_range(1..=3);
            let comps: Vec<(f64, f64, f64)> = (0..k)
                .map(|_| {
                    (
                        rng.gen_range(0.2..1.0),
                        rng.gen_range(-3.0..3.0),
                        rng.gen_range(0.05..2.0),
                    )
                })
                .collect();
            let mu = QuantileMeasure::gaussian_mixture(128, &comps).unwrap();
            otto_lower_bound(&mu).unwrap();
        }
    }

    #[test]
    fn translation_leaves_entropy_invariant() {
        let mu = QuantileMeasure::gaussian(256, 0.0, 1.3).unwrap();
        let shifted = mu.translate(2.5);
        let a = entropy(&mu).finite().unwrap();
        let b = entropy(&shifted).finite().unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}
