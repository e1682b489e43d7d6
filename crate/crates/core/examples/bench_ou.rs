use std::time::Instant;
use tdflow::catalog::{ou_fokker_planck, KappaSpec};
use tdflow::metric::tau_star;
use tdflow::pde_oracle::{ou_gaussian_solution, GaussianState};
use tdflow::scheme::{build_partition, run_minimizing_movement, PartitionSpec};
use tdflow::wasserstein1d::{w2_distance, QuantileMeasure, QuantileProblem};

fn main() {
    let terms = ou_fokker_planck(1.0, 0.5, 1.0, KappaSpec::InverseLinear { scale: 1.0 }).unwrap();
    let problem = QuantileProblem::new(512, terms);
    let u0 = QuantileMeasure::gaussian(512, 0.0, 1.0).unwrap();
    let ts = tau_star(|s| tdflow::metric::ProxProblem::lambda(&problem, s), 1.0);
    println!("tau_star = {ts}");
    let p = build_partition(1.0, &PartitionSpec::Uniform { step: 1e-3 }, ts).unwrap();
    let start = Instant::now();
    let traj = run_minimizing_movement(&problem, p, u0).unwrap();
    let elapsed = start.elapsed();
    let total_iters: usize = traj.steps.iter().map(|s| s.iterations).sum();
    println!("run: {:?}  total prox iterations: {} (avg {:.1})", elapsed, total_iters, total_iters as f64 / 1000.0);
    let g0 = GaussianState::new(0.0, 1.0).unwrap();
    for t in [0.25, 0.5, 1.0] {
        let g = ou_gaussian_solution(|s| 1.0 + 0.5 * s, |s| s.sin(), |s| 1.0 / (1.0 + s), g0, t).unwrap();
        let oracle = QuantileMeasure::gaussian(512, g.mean, g.variance.sqrt()).unwrap();
        let n = (t / 1e-3).round() as usize;
        let w2 = w2_distance(traj.state(n), &oracle).unwrap();
        println!("t={t}: W2 = {w2:.3e}  (oracle mean {:.4}, var {:.4})", g.mean, g.variance);
    }
}
