//! Discrete and continuous Gronwall bounds used by the a-priori estimates.

use crate::error::{Error, Result};
use crate::quad::{self, CumulativeIntegral};

/// Bound on sequences satisfying `a_n ≤ A + α Σ_{j=1}^n β_j a_j` with
/// `m = sup_j α β_j < 1`.
///
/// Returns `B·exp(θ·Σ_{i=0}^{n-1} β_i)` with `B = A/(1-m)`, `θ = α/(1-m)`
/// and the convention `β_0 = 0`. `betas[j-1]` is `β_j`.
pub fn discrete_bound(a_cap: f64, alpha: f64, betas: &[f64], n: usize) -> Result<f64> {
    if n == 0 || n > betas.len() {
        return Err(Error::precondition(format!(
            "index n = {n} outside 1..={}",
            betas.len()
        )));
    }
    if a_cap < 0.0 || alpha < 0.0 || betas.iter().any(|b| *b < 0.0) {
        return Err(Error::precondition(
            "discrete Gronwall data must be nonnegative",
        ));
    }
    let m = betas.iter().fold(0.0f64, |m, b| m.max(alpha * b));
    if m >= 1.0 {
        return Err(Error::Hypothesis(format!(
            "sup αβ_j = {m} ≥ 1; no bound available"
        )));
    }
    let b = a_cap / (1.0 - m);
    let theta = alpha / (1.0 - m);
    // Σ_{i=0}^{n-1} β_i with β_0 = 0 picks up β_1 .. β_{n-1}.
    let sum: f64 = betas[..n - 1].iter().sum();
    Ok(b * (theta * sum).exp())
}

/// The extremal sequence saturating the discrete hypothesis:
/// `a_n = A + α Σ_{j=1}^n β_j a_j` solved forward. Test oracle.
pub fn extremal_sequence(a_cap: f64, alpha: f64, betas: &[f64]) -> Result<Vec<f64>> {
    let mut seq = Vec::with_capacity(betas.len());
    let mut partial = 0.0;
    for &beta in betas {
        let denom = 1.0 - alpha * beta;
        if denom <= 0.0 {
            return Err(Error::Hypothesis("αβ_j ≥ 1 in extremal recursion".into()));
        }
        let a_n = (a_cap + alpha * partial) / denom;
        partial += beta * a_n;
        seq.push(a_n);
    }
    Ok(seq)
}

/// Bound for locally absolutely continuous `x` with
/// `(x²)' + 2λ̃x² ≤ a + 2bx` a.e.:
/// `e^{α(T)}|x(T)| ≤ sqrt((x(0)² + sup_{t≤T} ∫_0^t e^{2α}a)⁺) + 2∫_0^T e^{α}|b|`
/// where `α(t) = ∫_0^t λ̃`. Returns the right-hand side.
pub fn continuous_bound(
    x0: f64,
    a: impl Fn(f64) -> f64,
    b: impl Fn(f64) -> f64,
    lambda: impl Fn(f64) -> f64,
    t_end: f64,
) -> Result<f64> {
    if t_end <= 0.0 {
        return Err(Error::precondition("time horizon must be positive"));
    }
    let alpha = CumulativeIntegral::build(&lambda, 0.0, t_end);
    let weighted_a = CumulativeIntegral::build(|s| (2.0 * alpha.at(s)).exp() * a(s), 0.0, t_end);
    let sup_term = weighted_a
        .nodes()
        .map(|(_, v)| v)
        .fold(0.0f64, f64::max)
        .max(weighted_a.at(t_end));
    let drive = quad::integrate(|s| alpha.at(s).exp() * b(s).abs(), 0.0, t_end);
    let head = (x0 * x0 + sup_term).max(0.0).sqrt();
    let bound = head + 2.0 * drive;
    if !bound.is_finite() {
        return Err(Error::numeric("continuous Gronwall quadrature diverged"));
    }
    Ok(bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_feedback_returns_a() {
        let betas = vec![1.0, 2.0, 3.0];
        for n in 1..=3 {
            assert_eq!(discrete_bound(1.0, 0.0, &betas, n).unwrap(), 1.0);
        }
    }

    #[test]
    fn constant_betas_formula() {
        // A = 1, α = 0.1, β_j = 1, n = 3: B = 1/0.9, θ = 1/9, bound = (1/0.9)e^{2/9}.
        let bound = discrete_bound(1.0, 0.1, &[1.0, 1.0, 1.0], 3).unwrap();
        let expect = (1.0 / 0.9) * (2.0 / 9.0f64).exp();
        assert!((bound - expect).abs() < 1e-14);
    }

    #[test]
    fn violated_hypothesis_is_rejected() {
        let err = discrete_bound(1.0, 0.5, &[2.0, 2.0], 2).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(_)));
    }

    #[test]
    fn pure_decay_case() {
        // a = b = 0, λ̃ = 1, x0 = 1: bound 1, i.e. |x(T)| ≤ e^{-T}.
        let bound = continuous_bound(1.0, |_| 0.0, |_| 0.0, |_| 1.0, 1.0).unwrap();
        assert!((bound - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_source_case() {
        // λ̃ = 0, a = 1, b = 0, x0 = 0, T = 1: bound √1 = 1.
        let bound = continuous_bound(0.0, |_| 1.0, |_| 0.0, |_| 0.0, 1.0).unwrap();
        assert!((bound - 1.0).abs() < 1e-9);
    }
}
