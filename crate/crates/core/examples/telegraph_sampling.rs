// Telegraph trajectories along the z family and their ensemble average.
//
// ```bash
// cargo run --release --example telegraph_sampling
// ```

use tunnelhist::families::{integrate_family, uniform_grid, BlochDirection, Condition};
use tunnelhist::ptm::ModelParams;
use tunnelhist::trajectories::{
    ensemble_average, ks_critical_1pct, ks_statistic, rate_equation_solution, sample_family,
    SamplerConfig,
};

pub fn run_example() -> tunnelhist::Result<()> {
    let params = ModelParams::new(0.8, 2.0)?;
    let grid = uniform_grid(2.0, 21);
    let fam = integrate_family(&BlochDirection::z(), &params, Condition::Forward, &grid)?;
    let trajs = sample_family(&fam, &SamplerConfig::new(7, 20_000, 1.0)?)?;

    let series = ensemble_average(&trajs, &fam, &grid);
    let exact = rate_equation_solution(&fam, 1.0, &grid)?;
    for (p, q) in series.points.iter().zip(&exact).step_by(5) {
        println!(
            "t={:.2} p0={:.4}±{:.4} rate equation={:.4}",
            p.t, p.p0, p.p0_err, q
        );
    }
    let waits: Vec<f64> = trajs
        .iter()
        .filter_map(|t| t.waiting_times().first().copied())
        .collect();
    // only flips inside the window are seen, so the exponential is truncated at t_max
    let norm = 1.0 - (-params.gamma * 2.0).exp();
    let d = ks_statistic(&waits, |x| (1.0 - (-params.gamma * x).exp()) / norm);
    println!(
        "first waiting times: n={} KS={d:.4} (1% critical {:.4})",
        waits.len(),
        ks_critical_1pct(waits.len())
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> tunnelhist::Result<()> {
    run_example()
}
