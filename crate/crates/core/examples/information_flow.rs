// Holevo quantities for the X and Z ensembles on both sides of the dilation.
//
// ```bash
// cargo run --example information_flow
// ```

use tunnelhist::families::{uniform_grid, BlochDirection};
use tunnelhist::info::{chi_q_slope, info_report, Side};
use tunnelhist::ptm::ModelParams;

pub fn run_example() -> tunnelhist::Result<()> {
    let params = ModelParams::new(0.8, 2.0)?;
    let report = info_report(&params, &uniform_grid(5.0, 11))?;
    println!("     t   χX      χZ      χXc     χZc");
    for r in &report.rows {
        println!(
            "{:6.2} {:.4}  {:.4}  {:.4}  {:.4}",
            r.t, r.chi_x_direct, r.chi_z_direct, r.chi_x_comp, r.chi_z_comp
        );
    }
    for (name, w) in [("x", BlochDirection::x()), ("z", BlochDirection::z())] {
        println!(
            "initial χ_Q slopes for {name}: direct {:.4} complementary {:.4}",
            chi_q_slope(&w, &params, Side::Direct)?,
            chi_q_slope(&w, &params, Side::Complementary)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> tunnelhist::Result<()> {
    run_example()
}
