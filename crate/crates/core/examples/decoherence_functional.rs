// Decoherence functional, consistency and the induced Markov chain.
//
// ```bash
// cargo run --example decoherence_functional
// ```

use tunnelhist::families::{integrate_family, uniform_grid, BlochDirection, Condition};
use tunnelhist::histories::{
    consistency_check, decoherence_functional, markov_from_family, HistoryFamily,
    CONSISTENCY_TOLERANCE,
};
use tunnelhist::ptm::{BlochState, ModelParams};

pub fn run_example() -> tunnelhist::Result<()> {
    let params = ModelParams::new(0.8, 2.0)?;
    let rho = BlochState::maximally_mixed();
    let times = uniform_grid(2.0, 4);

    let fam = integrate_family(
        &BlochDirection::new(0.3, 0.4),
        &params,
        Condition::Forward,
        &times,
    )?;
    let consistent = HistoryFamily::from_trajectory(&fam)?;
    let d = decoherence_functional(&consistent, &rho)?;
    let report = consistency_check(&d, CONSISTENCY_TOLERANCE);
    println!(
        "forward family: max off-diagonal {:.1e}, passed={}",
        report.max_off_diagonal, report.passed
    );
    let chain = markov_from_family(&consistent, &rho)?;
    println!(
        "  markov={} first step {:?}",
        chain.is_markov(1e-8),
        chain.steps[0].as_slice()
    );

    let bad = consistent.with_decomposition(1, BlochDirection::x().decomposition());
    let d = decoherence_functional(&bad, &rho)?;
    let report = consistency_check(&d, CONSISTENCY_TOLERANCE);
    println!(
        "x basis swapped in: max off-diagonal {:.3e}, passed={}",
        report.max_off_diagonal, report.passed
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> tunnelhist::Result<()> {
    run_example()
}
