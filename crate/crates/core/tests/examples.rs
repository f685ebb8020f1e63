#[allow(dead_code)]
mod batch_meta_dataset {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/batch_meta_dataset.rs"));
}

#[test]
fn batch_meta_dataset_runs() {
    batch_meta_dataset::run_example().expect("batch_meta_dataset example should run");
}

#[allow(dead_code)]
mod hardy_weinberg {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/hardy_weinberg.rs"));
}

#[test]
fn hardy_weinberg_runs() {
    hardy_weinberg::run_example().expect("hardy_weinberg example should run");
}

#[allow(dead_code)]
mod log_cv_ratio {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/log_cv_ratio.rs"));
}

#[test]
fn log_cv_ratio_runs() {
    log_cv_ratio::run_example().expect("log_cv_ratio example should run");
}

#[allow(dead_code)]
mod log_odds_ratio {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/log_odds_ratio.rs"));
}

#[test]
fn log_odds_ratio_runs() {
    log_odds_ratio::run_example().expect("log_odds_ratio example should run");
}

#[allow(dead_code)]
mod log_ratio_of_means {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/log_ratio_of_means.rs"));
}

#[test]
fn log_ratio_of_means_runs() {
    log_ratio_of_means::run_example().expect("log_ratio_of_means example should run");
}

#[allow(dead_code)]
mod log_risk_ratio {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/log_risk_ratio.rs"));
}

#[test]
fn log_risk_ratio_runs() {
    log_risk_ratio::run_example().expect("log_risk_ratio example should run");
}

#[allow(dead_code)]
mod paired_designs {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/paired_designs.rs"));
}

#[test]
fn paired_designs_runs() {
    paired_designs::run_example().expect("paired_designs example should run");
}

#[allow(dead_code)]
mod reciprocal_speed {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/reciprocal_speed.rs"));
}

#[test]
fn reciprocal_speed_runs() {
    reciprocal_speed::run_example().expect("reciprocal_speed example should run");
}

#[allow(dead_code)]
mod sampling_primitives {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sampling_primitives.rs"));
}

#[test]
fn sampling_primitives_runs() {
    sampling_primitives::run_example().expect("sampling_primitives example should run");
}

#[allow(dead_code)]
mod simulation_study {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/simulation_study.rs"));
}

#[test]
fn simulation_study_runs() {
    simulation_study::run_example().expect("simulation_study example should run");
}

#[allow(dead_code)]
mod standardised_mean_difference {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/standardised_mean_difference.rs"));
}

#[test]
fn standardised_mean_difference_runs() {
    standardised_mean_difference::run_example().expect("standardised_mean_difference example should run");
}
