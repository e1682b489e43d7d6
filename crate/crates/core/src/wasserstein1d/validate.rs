//! Executable hypothesis checks for composite energies: convexity moduli,
//! time-variation bounds, symmetry and growth of interaction kernels,
//! internal-energy sandwich and convexity conditions, and the abstract
//! time-variation bound tested against a point-mass reference.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{energy, second_moment, EnergyTerms, QuantileMeasure};
use crate::quad;

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    /// Most negative slack seen over the sample set (≥ 0 means pass).
    pub worst_margin: f64,
    pub witness: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Sampling plan for the validators; `default_plan` covers moderate and
/// near-singular measures so that variation bounds are probed where entropy
/// is large.
#[derive(Clone, Debug)]
pub struct SamplePlan {
    pub times: Vec<f64>,
    pub points: Vec<f64>,
    pub densities: Vec<f64>,
    pub measures: Vec<QuantileMeasure>,
    pub tolerance: f64,
}

impl SamplePlan {
    pub fn default_plan(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let times: Vec<f64> = (0..=16).map(|i| i as f64 / 8.0).collect();
        let mut points: Vec<f64> = (0..40).map(|_| rng.gen_range(-5.0..5.0)).collect();
        points.extend([0.0, 1.0, -1.0]);
        let densities = vec![1e-6, 1e-3, 0.1, 0.5, 1.0, 2.0, 10.0, 1e3];
        let mut measures = vec![
            QuantileMeasure::gaussian(128, 0.0, 1.0).unwrap(),
            QuantileMeasure::gaussian(128, 1.0, 0.5).unwrap(),
            QuantileMeasure::uniform(128, -1.0, 1.0).unwrap(),
            // Narrow laws: entropy grows while the second moment stays put.
            QuantileMeasure::gaussian(128, 0.0, 1e-2).unwrap(),
            QuantileMeasure::gaussian(128, 0.5, 1e-4).unwrap(),
        ];
        for _ in 0..5 {
            let m = rng.gen_range(-2.0..2.0);
            let s = rng.gen_range(0.05..2.0);
            measures.push(QuantileMeasure::gaussian(128, m, s).unwrap());
        }
        SamplePlan {
            times,
            points,
            densities,
            measures,
            tolerance: 1e-7,
        }
    }
}

struct Collector {
    name: &'static str,
    worst: f64,
    witness: String,
}

impl Collector {
    fn new(name: &'static str) -> Self {
        Collector {
            name,
            worst: f64::INFINITY,
            witness: String::from("no sample evaluated"),
        }
    }

    /// Records `margin = rhs - lhs` of an inequality `lhs ≤ rhs`.
    fn record(&mut self, margin: f64, witness: impl FnOnce() -> String) {
        if margin < self.worst {
            self.worst = margin;
            self.witness = witness();
        }
    }

    fn finish(self, tolerance: f64) -> HypothesisCheck {
        HypothesisCheck {
            name: self.name.to_string(),
            passed: self.worst >= -tolerance,
            worst_margin: self.worst,
            witness: self.witness,
        }
    }
}

/// Runs every check applicable to the active terms. Report-only: failures
/// are verdicts, not errors.
pub fn validate_hypotheses(terms: &EnergyTerms, plan: &SamplePlan) -> HypothesisReport {
    let mut report = HypothesisReport::default();
    let tol = plan.tolerance;

    if let Some(p) = &terms.potential {
        let mut v1 = Collector::new("V1-lambda-convexity");
        let mut v3 = Collector::new("V3-time-variation");
        for &t in &plan.times {
            let lam = crate::metric::Functional::<QuantileMeasure>::lambda(terms, t);
            let f = |x: f64| (p.value)(t, x) - 0.5 * lam * x * x;
            for pair in plan.points.windows(2) {
                let (x0, x1) = (pair[0], pair[1]);
                let mid = 0.5 * (x0 + x1);
                let margin = 0.5 * (f(x0) + f(x1)) - f(mid);
                v1.record(margin, || format!("t={t}, x0={x0}, x1={x1}"));
            }
        }
        for pair in plan.times.windows(2) {
            let (s, t) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            let rate = quad::integrate(|r| crate::metric::Functional::<QuantileMeasure>::beta(terms, r), s, t);
            for &x in &plan.points {
                let lhs = ((p.value)(s, x) - (p.value)(t, x)).abs();
                let rhs = rate * (1.0 + x * x);
                v3.record(rhs - lhs + tol * (1.0 + rhs.abs()), || {
                    format!("s={s}, t={t}, x={x}: |ΔV|={lhs:.3e} vs {rhs:.3e}")
                });
            }
        }
        report.checks.push(v1.finish(tol));
        report.checks.push(v3.finish(tol));
    }

    if let Some(w) = &terms.interaction {
        let mut w1 = Collector::new("W1-symmetry-and-growth");
        let mut w2c = Collector::new("W2-lambda-convexity");
        let mut w3 = Collector::new("W3-time-variation");
        for &t in &plan.times {
            for &x in &plan.points {
                for &y in &plan.points {
                    let sym = ((w.value)(t, x, y) - (w.value)(t, y, x)).abs();
                    w1.record(tol - sym, || format!("t={t}, ({x}, {y}): asymmetry {sym:.3e}"));
                }
            }
        }
        for &x in &plan.points {
            for &y in &plan.points {
                let lhs = (w.value)(0.0, x, y);
                let rhs = w.growth_constant * (1.0 + x * x + y * y);
                w1.record(rhs - lhs, || format!("growth at ({x}, {y})"));
            }
        }
        // Midpoint convexity of W(t,·,·) - λ(t)|(x,y)|²/2 on R².
        for &t in &plan.times {
            let lam = crate::metric::Functional::<QuantileMeasure>::lambda(terms, t);
            let f = |x: f64, y: f64| (w.value)(t, x, y) - 0.5 * lam * (x * x + y * y);
            for p0 in plan.points.windows(2) {
                for p1 in plan.points.windows(2) {
                    let (a, b) = ((p0[0], p1[0]), (p0[1], p1[1]));
                    let mid = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
                    let margin = 0.5 * (f(a.0, a.1) + f(b.0, b.1)) - f(mid.0, mid.1);
                    w2c.record(margin, || format!("t={t}, {a:?} vs {b:?}"));
                }
            }
        }
        for pair in plan.times.windows(2) {
            let (s, t) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            let rate = quad::integrate(|r| crate::metric::Functional::<QuantileMeasure>::beta(terms, r), s, t);
            for &x in &plan.points {
                for &y in &plan.points {
                    let lhs = ((w.value)(s, x, y) - (w.value)(t, x, y)).abs();
                    let rhs = rate * (1.0 + x * x + y * y);
                    w3.record(rhs - lhs + tol * (1.0 + rhs.abs()), || {
                        format!("s={s}, t={t}, ({x}, {y})")
                    });
                }
            }
        }
        report.checks.push(w1.finish(tol));
        report.checks.push(w2c.finish(tol));
        report.checks.push(w3.finish(tol));
    }

    if let Some(u) = &terms.internal {
        let u0 = |z: f64| (u.value)(0.0, z);
        if let Some(ut) = &u.time_derivative {
            let mut u1 = Collector::new("U1-time-sandwich");
            if let Some((rate_a, rate_big_a)) = &u.rate_bounds {
                for &t in &plan.times {
                    for &z in &plan.densities {
                        let d = ut(t, z);
                        let upper = rate_a(t) * (-u0(z)).max(0.0);
                        let lower = -rate_big_a(t) * u0(z).max(0.0);
                        u1.record(upper - d, || format!("upper at t={t}, z={z}"));
                        u1.record(d - lower, || format!("lower at t={t}, z={z}"));
                    }
                }
            } else {
                u1.record(-1.0, || "rate bounds (a, A) not declared".into());
            }
            // Superlinear growth of U(0,·): ratios along a geometric ladder
            // must keep increasing.
            let ladder = [1e2, 1e4, 1e6];
            let mut prev = u0(ladder[0]) / ladder[0];
            for &z in &ladder[1..] {
                let r = u0(z) / z;
                u1.record(r - prev, || format!("growth ratio at z={z}"));
                prev = r;
            }
            report.checks.push(u1.finish(tol));
        }
        let mut u2 = Collector::new("U2-lower-bound");
        if let Some((alpha, c1, c2)) = u.lower_bound {
            u2.record(alpha - 1.0 / 3.0, || format!("exponent α={alpha} vs 1/3"));
            for &z in &plan.densities {
                let margin = u0(z) + c1 * z + c2 * z.powf(alpha);
                u2.record(margin, || format!("z={z}"));
            }
        } else {
            u2.record(-1.0, || "constants (α, c₁, c₂) not declared".into());
        }
        report.checks.push(u2.finish(tol));

        let mut u3 = Collector::new("U3-convexity");
        u3.record(tol - u0(0.0).abs(), || format!("U(0,0) = {}", u0(0.0)));
        for &t in &plan.times {
            for pair in plan.densities.windows(2) {
                let (z0, z1) = (pair[0], pair[1]);
                let mid = 0.5 * (z0 + z1);
                let margin = 0.5 * ((u.value)(t, z0) + (u.value)(t, z1)) - (u.value)(t, mid);
                u3.record(margin, || format!("convexity in z at t={t}, [{z0}, {z1}]"));
                // On the line the dilation condition reads: z ↦ z·U(t, 1/z)
                // convex and nonincreasing on (0, ∞).
                let g = |z: f64| z * (u.value)(t, 1.0 / z);
                let margin_g = 0.5 * (g(z0) + g(z1)) - g(mid);
                u3.record(margin_g, || format!("dilation convexity at t={t}, [{z0}, {z1}]"));
                u3.record(g(z0) - g(z1) + tol, || {
                    format!("dilation monotonicity at t={t}, [{z0}, {z1}]")
                });
            }
        }
        report.checks.push(u3.finish(tol));
    }

    if let Some(e) = &terms.entropy {
        let mut kpos = Collector::new("kappa-positive");
        let mut kmono = Collector::new("kappa-nonincreasing");
        let mut prev: Option<f64> = None;
        for &t in &plan.times {
            let k = (e.kappa)(t);
            kpos.record(k, || format!("κ({t}) = {k}"));
            if let Some(p) = prev {
                kmono.record(p - k + tol, || format!("κ increased near t={t}"));
            }
            prev = Some(k);
        }
        report.checks.push(kpos.finish(tol));
        report.checks.push(kmono.finish(tol));
    }

    // Abstract time-variation bound with the point mass at the origin as
    // reference: |ℰ(t,μ) − ℰ(s,μ)| ≤ ∫_s^t β · (1 + d²(μ, δ₀)).
    let mut e3 = Collector::new("E3-time-variation");
    for pair in plan.times.windows(2) {
        let (s, t) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        let rate = quad::integrate(|r| crate::metric::Functional::<QuantileMeasure>::beta(terms, r), s, t);
        for mu in &plan.measures {
            let (Some(es), Some(et)) = (
                energy(s, mu, terms).finite(),
                energy(t, mu, terms).finite(),
            ) else {
                continue;
            };
            let lhs = (et - es).abs();
            let rhs = rate * (1.0 + second_moment(mu));
            e3.record(rhs - lhs + tol * (1.0 + rhs.abs()), || {
                format!(
                    "s={s}, t={t}, M₂={:.3}: |Δℰ|={lhs:.3e} vs ∫β(1+M₂)={rhs:.3e}",
                    second_moment(mu)
                )
            });
        }
    }
    report.checks.push(e3.finish(tol));

    report
}
