// Closed-form propagator against the matrix exponential and an ODE solve.
//
// ```bash
// cargo run --example propagator
// ```

use tunnelhist::ptm::{
    eigen_system, propagator_closed_form, propagator_expm, propagator_numeric, BlochState,
    ModelParams,
};

pub fn run_example() -> tunnelhist::Result<()> {
    let params = ModelParams::new(0.8, 2.0)?;
    println!("regime: {}", params.regime());
    for t in [0.0, 0.5, 1.0, 2.0] {
        let closed = propagator_closed_form(&params, t);
        let expm = propagator_expm(&params, t);
        let ode = propagator_numeric(&params, t)?;
        println!(
            "t={t:<4} T11={:.6} |closed-expm|={:.1e} |closed-ode|={:.1e}",
            closed.entry(1, 1),
            closed.max_abs_diff(&expm),
            closed.max_abs_diff(&ode)
        );
    }
    let eig = eigen_system(&params);
    println!("eigenvalues: {:?}", eig.lambdas);

    let state = BlochState::from_bloch_vector([1.0, 0.0, 0.0].into());
    let out = propagator_closed_form(&params, 1.0).apply_state(&state);
    println!(
        "x-polarized state after t=1: r={:?} |r|={:.6}",
        out.bloch_vector().as_slice(),
        out.radius()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> tunnelhist::Result<()> {
    run_example()
}
