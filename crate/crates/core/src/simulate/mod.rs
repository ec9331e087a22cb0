//! Benchmark distributions, parametric competitors, and the Monte Carlo study.

pub mod distributions;
pub mod parametric;
pub mod study;

pub use distributions::{presets, Family, Preset, TestDistribution};
pub use parametric::parametric_fit;
pub use study::{fit_bernstein, run_rng, run_study, run_study_with, PointwiseMse, SimReport, StudyConfig};
