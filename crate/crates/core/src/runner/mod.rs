//! Batch experiments: load inputs, sample scenarios, plan each with the base
//! heuristic and with rollout, and write trajectories, summaries and plot
//! tables.

mod config;
mod experiment;
mod plotdata;

pub use config::{
    BaseKind, DataFiles, DemandSettings, ExperimentConfig, HazardSettings, ObjectiveKind, PlanSettings, RunSettings,
};
pub use experiment::{
    base_order, hazard_sites, run_experiment, run_scenario, run_scenarios, scenario_seed, with_threads, write_outputs,
    write_testbed, Aggregate, Inputs, RunSummary, ScenarioOutcome, SummaryRow,
};
pub use plotdata::{
    cumulative_moving_average, emit_plot_data, histogram, mean_trajectory, served_fraction_at, time_grid,
    GRID_STEP_DAYS, HISTOGRAM_BINS,
};
