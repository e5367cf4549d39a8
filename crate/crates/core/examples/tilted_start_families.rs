// Forward-consistent families from a tilted start for three decoherence rates.
//
// ```bash
// cargo run --example tilted_start_families
// ```

use tunnelhist::families::{
    check_forward_condition, integrate_family, uniform_grid, BlochDirection, Condition,
};
use tunnelhist::ptm::ModelParams;

pub fn run_example() -> tunnelhist::Result<()> {
    let start = BlochDirection::new(0.2, 0.0);
    let grid = uniform_grid(10.0, 201);
    for gamma in [0.5, 1.2, 4.0] {
        let params = ModelParams::new(1.0, gamma)?;
        let fam = integrate_family(&start, &params, Condition::Forward, &grid)?;
        let check = check_forward_condition(&fam.decompositions(), &params, &grid)?;
        let end = fam.samples.last().expect("non-empty grid");
        println!(
            "γ={gamma}: end θ={:.4} φ={:.4} κ={:.4} forward residual={:.1e}",
            end.direction.theta,
            end.direction.wrapped_phi(),
            end.kappa,
            check.max_residual
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> tunnelhist::Result<()> {
    run_example()
}
