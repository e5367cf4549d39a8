//! Every example runs to completion.

mod propagator {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/propagator.rs"
    ));
}

mod channels {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/channels.rs"));
}

mod stationary_families {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/stationary_families.rs"
    ));
}

mod tilted_start_families {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/tilted_start_families.rs"
    ));
}

mod decoherence_functional {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/decoherence_functional.rs"
    ));
}

mod telegraph_sampling {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/telegraph_sampling.rs"
    ));
}

mod information_flow {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/information_flow.rs"
    ));
}

mod d2s2_preset {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/d2s2_preset.rs"
    ));
}

#[test]
fn examples_run() {
    propagator::run_example().expect("propagator");
    channels::run_example().expect("channels");
    stationary_families::run_example().expect("stationary_families");
    tilted_start_families::run_example().expect("tilted_start_families");
    decoherence_functional::run_example().expect("decoherence_functional");
    telegraph_sampling::run_example().expect("telegraph_sampling");
    information_flow::run_example().expect("information_flow");
    d2s2_preset::run_example().expect("d2s2_preset");
}
