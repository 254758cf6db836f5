//! Every example must keep running as the library evolves.

#[path = "../examples/causal_model.rs"]
mod causal_model;
#[path = "../examples/overhead_simulation.rs"]
mod overhead_simulation;
#[path = "../examples/calibration.rs"]
mod calibration;
#[path = "../examples/risk_queries.rs"]
mod risk_queries;
#[path = "../examples/pre_modeling.rs"]
mod pre_modeling;
#[path = "../examples/loocv.rs"]
mod loocv;
#[path = "../examples/refinement_loop.rs"]
mod refinement_loop;
#[path = "../examples/file_formats.rs"]
mod file_formats;

#[test]
fn causal_model_example_runs() {
    causal_model::run_example().unwrap();
}

#[test]
fn overhead_simulation_example_runs() {
    overhead_simulation::run_example().unwrap();
}

#[test]
fn calibration_example_runs() {
    calibration::run_example().unwrap();
}

#[test]
fn risk_queries_example_runs() {
    risk_queries::run_example().unwrap();
}

#[test]
fn pre_modeling_example_runs() {
    pre_modeling::run_example().unwrap();
}

#[test]
fn loocv_example_runs() {
    loocv::run_example().unwrap();
}

#[test]
fn refinement_loop_example_runs() {
    refinement_loop::run_example().unwrap();
}

#[test]
fn file_formats_example_runs() {
    file_formats::run_example().unwrap();
}
