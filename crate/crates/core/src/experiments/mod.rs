//! Experiment harness: configuration, grid runners and CSV output.

mod config;
mod csv;
mod run;

pub use self::config::{
    parse_angle, CompareHodConfig, ExperimentConfig, ExperimentKind, MGridConfig, Preset, RecoverySection, SweepConfig,
};
pub use self::csv::{emit_csv, emit_m_grid_csv, write_csv, write_m_grid_csv, MGridRow, ResultRow, RowStatus};
pub use self::run::{
    prepare_point, run_compare_hod, run_m_grid, run_mse_sweep, run_theory_only, simulate_point, PointOutcome,
    PreparedSignal, SimulationOptions,
};
