// Strong-decoherence regime of a heavy molecule in a dense gas.
//
// ```bash
// cargo run --example d2s2_preset
// ```

use tunnelhist::cli::preset_report;

pub fn run_example() -> tunnelhist::Result<()> {
    let r = preset_report("D2S2")?;
    println!("γ/ω = {:.3e}, regime {}", r.ratio, r.regime);
    let kx = r.kappa_x.expect("overdamped regime has a dressed x family");
    println!(
        "κ_x = {kx:.4e} s⁻¹ (ω²/4γ = {:.4e}), κ_z = {:.1e} s⁻¹",
        r.kappa_x_estimate, r.kappa_z
    );
    println!(
        "κ_x/κ_z = {:.2e}, so the x family is effectively frozen",
        kx / r.kappa_z
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> tunnelhist::Result<()> {
    run_example()
}
