//! Experiment harness for the tenrec solvers: synthetic instances on disk,
//! sweep execution over a parameter grid, and plot-ready CSV extraction.

pub mod grid;
pub mod instance;

pub use grid::{
    emit_csv, emit_csv_file, emit_figure_data, read_csv, read_csv_file, run_grid,
    write_figure_series, ExperimentGrid, FigureSeries, ResultRecord, SchemeKind,
};
pub use instance::{Instance, InstanceSidecar};
