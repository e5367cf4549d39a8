// Stationary diameters on both sides of the γ = ω threshold.
//
// ```bash
// cargo run --example stationary_families
// ```

use tunnelhist::families::{classify_regime, drift, stationary_families};
use tunnelhist::ptm::ModelParams;

pub fn run_example() -> tunnelhist::Result<()> {
    for (omega, gamma) in [(1.0, 0.5), (1.0, 1.0), (0.8, 2.0), (176.0, 9e9)] {
        let params = ModelParams::new(omega, gamma)?;
        let set = stationary_families(&params);
        println!(
            "γ={gamma} ω={omega}: {:?} κ_z={}",
            classify_regime(&params),
            set.kappa_z
        );
        for root in &set.equatorial {
            let (_, dphi) = drift(&root.direction(), &params, root.condition);
            println!(
                "  {} {:?} φ={:.7} κ={:.4e} dφ/dt={:.1e}",
                root.condition, root.kind, root.phi, root.rate, dphi
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> tunnelhist::Result<()> {
    run_example()
}
