// Choi matrix, minimal Kraus set and the complementary channel.
//
// ```bash
// cargo run --example channels
// ```

use tunnelhist::channels::{kraus_from_ptm, ptm_to_choi, ComplementaryChannel};
use tunnelhist::ptm::{pauli, propagator_closed_form, ModelParams};

pub fn run_example() -> tunnelhist::Result<()> {
    let params = ModelParams::new(0.8, 2.0)?;
    for t in [1e-4, 0.1, 1.0] {
        let ptm = propagator_closed_form(&params, t);
        let choi = ptm_to_choi(&ptm);
        let kraus = kraus_from_ptm(&ptm)?;
        let back = kraus.to_ptm();
        let comp = ComplementaryChannel::for_model(&params, t)?;
        let env = comp.apply(&pauli(0).scale(0.5));
        println!(
            "t={t:<6} kraus={} completeness={:.1e} |T-T(K)|={:.1e} env_dim={} isometry={:.1e} Tr(choi)={:.3}",
            kraus.len(),
            kraus.completeness_defect(),
            ptm.max_abs_diff(&back),
            comp.env_dim(),
            comp.isometry_defect(),
            choi.trace().re,
        );
        println!(
            "  environment state from I/2, diagonal: {:?}",
            env.diagonal().iter().map(|c| c.re).collect::<Vec<_>>()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> tunnelhist::Result<()> {
    run_example()
}
