//! Experiment harness: configuration, the canonical experiments, CSV and SVG
//! output, and the acceptance suite behind `smlab check`.

pub mod check;
pub mod config;
pub mod experiments;
pub mod rows;
pub mod svg;

pub use check::{run_check, CheckOptions, CheckReport, CriterionResult};
pub use config::{ConfigFile, Experiment, ExperimentConfig, ExperimentParams, Overrides};
pub use experiments::{run, run_params, write_outputs, RunOutput};
pub use rows::{emit_csv, parse_csv, read_csv, render_csv, Method, Metric, ResultRow, CSV_HEADER};
pub use svg::{emit_svg, render_svg, PlotSpec, Series};
