//! Time-axis quadrature helpers.
//!
//! All time integrals of rate functions (λ, β, Gronwall integrands) use
//! composite Simpson with a fixed panel density; integrands are smooth for
//! every shipped instance.

/// Simpson panels per unit of integration length.
pub const PANELS_PER_UNIT: usize = 512;

fn panel_count(a: f64, b: f64) -> usize {
    let span = (b - a).abs().max(1e-12);
    ((span * PANELS_PER_UNIT as f64).ceil() as usize).max(4)
}

/// Composite Simpson rule on `[a, b]` with the default panel density.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if (b - a).abs() == 0.0 {
        return 0.0;
    }
    simpson(f, a, b, panel_count(a, b))
}

/// Composite Simpson rule with an explicit panel count.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(1);
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let x0 = a + i as f64 * h;
        let x2 = x0 + h;
        let x1 = 0.5 * (x0 + x2);
        acc += (h / 6.0) * (f(x0) + 4.0 * f(x1) + f(x2));
    }
    acc
}

/// Running integral of `f` from `a`, tabulated on an equispaced grid.
///
/// Node `i` holds `∫_a^{a+i·h} f`. Increments are Simpson panels, so the
/// table is 4th-order accurate at the nodes; queries between nodes
/// interpolate linearly.
pub struct CumulativeIntegral {
    a: f64,
    h: f64,
    values: Vec<f64>,
}

impl CumulativeIntegral {
    pub fn build(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Self {
        let n = panel_count(a, b);
        let h = (b - a) / n as f64;
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let x0 = a + i as f64 * h;
            let x2 = x0 + h;
            let x1 = 0.5 * (x0 + x2);
            acc += (h / 6.0) * (f(x0) + 4.0 * f(x1) + f(x2));
            values.push(acc);
        }
        CumulativeIntegral { a, h, values }
    }

    pub fn upper_limit(&self) -> f64 {
        self.a + self.h * (self.values.len() - 1) as f64
    }

    /// Value of the running integral at `t` (clamped to the tabulated range).
    pub fn at(&self, t: f64) -> f64 {
        let pos = ((t - self.a) / self.h).clamp(0.0, (self.values.len() - 1) as f64);
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        let frac = pos - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Grid nodes paired with running-integral values.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.a + self.h * i as f64, *v))
    }
}

/// Trapezoid rule over sampled (time, value) pairs at arbitrary marks.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    assert_eq!(times.len(), values.len());
    let mut acc = 0.0;
    for i in 1..times.len() {
        acc += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0);
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let c = CumulativeIntegral::build(|x| (2.0 * x).cos(), 0.0, 3.0);
        for t in [0.0f64, 0.7, 1.3, 2.9, 3.0] {
            let exact = 0.5 * (2.0 * t).sin();
            // Nodes are 4th-order; off-node queries interpolate linearly.
            assert!((c.at(t) - exact).abs() < 2e-6, "t={t}");
        }
    }

    #[test]
    fn trapezoid_on_linear_data() {
        let times = [0.0, 0.5, 2.0];
        let values = [0.0, 1.0, 4.0];
        assert!((trapezoid(&times, &values) - 4.0).abs() < 1e-14);
    }
}
