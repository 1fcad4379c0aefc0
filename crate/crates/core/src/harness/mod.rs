//! Baselines, evaluation, sweeps, configuration and report files.

pub mod config;
pub mod evaluate;
pub mod io;
pub mod layouts;
pub mod runs;
pub mod sweep;

pub use config::{ConfigFile, RunConfig, CONFIG_VERSION};
pub use evaluate::{evaluate, random_placement_gain_power, sample_eval_setup, Controller, EvalReport, TaskReport};
pub use io::{read_csv, read_jsonl, write_csv, write_jsonl, JsonlWriter};
pub use layouts::{baseline_layout, laa_layout, raa_layout, BaselineKind};
pub use sweep::{distance_sweep, phase_error_sweep, DistanceSweepRow, PhaseSweepRow};
