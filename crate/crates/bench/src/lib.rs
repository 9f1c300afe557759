//! Experiment harness for the qgreedy solvers.

pub mod fit;
pub mod plan;

pub use fit::{fit_curve, CurveFit, CurveModel};
pub use plan::{
    greedy_asymptote, instance, instance_seed, load_angles, parse_advice, run_plan, BenchmarkReport, CellResult,
    ExperimentPlan, SolverKind, R_INF,
};
