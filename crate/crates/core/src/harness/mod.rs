//! Experiment configuration, orchestration of the estimators, and report output.

mod config;
mod output;
mod run;

use std::path::PathBuf;

pub use config::{
    parse_config, ConfigDocument, ExperimentConfig, Mode, SliceAxis, DEFAULT_HORIZON, DEFAULT_SEED, DEFAULT_STEPS,
    MAX_TRUNCATION_SIZE,
};
pub use output::{format_number, render_outputs, to_json, write_outputs};
pub use run::{
    compute_report, run_experiment, ComponentMoments, EnergyTable, ErrorEntry, FrameMoments, ResidualEntry, RunReport,
    ScanEntry, Timings,
};

use crate::propagator::SolverError;
use crate::statistics::StatsError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{phase} failed: {source}")]
    Solver { phase: &'static str, source: SolverError },
    #[error("{phase} failed: {source}")]
    Statistics { phase: &'static str, source: StatsError },
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl HarnessError {
    /// Process exit status: 1 for configuration problems, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            _ => 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(extra: &str) -> ExperimentConfig {
        parse_config(&format!(
            "model = \"1d\"\ncells = 16\nsteps = 50\nwce_order = 2\nmc_samples = 40\nworkers = 1\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn wce_mode_has_no_error_table() {
        let r = compute_report(&tiny("mode = \"wce\"")).unwrap();
        assert!(r.errors.is_none());
        assert!(r.energy.wce.is_some() && r.energy.mc.is_none());
        assert!(r.timings.wce_seconds.unwrap() >= 0.0);
        assert!(r.timings.mc_seconds.is_none());
        assert_eq!(r.truncation_size, Some(6));
    }

    #[test]
    fn both_mode_reports_four_errors_per_component() {
        let r = compute_report(&tiny("")).unwrap();
        let errors = r.errors.as_ref().unwrap();
        assert_eq!(errors.len(), 8);
        assert!(errors.iter().all(|e| e.relative_error.is_some_and(|v| v.is_finite())));
        assert!(r.timings.speedup.is_some());
    }

    #[test]
    fn noise_free_reference_is_constant() {
        let r = compute_report(&tiny("mode = \"wce\"\nsigma = 0.0")).unwrap();
        let first = r.energy.reference[0];
        assert!(r.energy.reference.iter().all(|&v| v == first));
        let csv = render_outputs(&r).into_iter().find(|(n, _)| n == "energy.csv").unwrap().1;
        let line = csv.lines().nth(10).unwrap();
        assert!(line.ends_with(&format_number(first)), "{line}");
        assert!(line.contains(",,"), "mc column should be empty: {line}");
    }

    #[test]
    fn sigma_scan_adds_series() {
        let r = compute_report(&tiny("mode = \"wce\"\nsigma_scan = [0.0, 0.1, 0.5, 1.0]")).unwrap();
        let scan = r.energy_scan.as_ref().unwrap();
        assert_eq!(scan.len(), 4);
        assert!(scan.iter().all(|s| s.wce.is_some() && s.reference.len() == 51));
    }

    #[test]
    fn mc_mode_skips_the_propagator() {
        let r = compute_report(&tiny("mode = \"mc\"")).unwrap();
        assert!(r.errors.is_none() && r.truncation_size.is_none());
        assert!(r.coefficient_energy_residuals.is_none());
        assert!(r.final_frame().components[0].wce.is_none());
        assert_eq!(r.energy.mc_standard_error.as_ref().unwrap().len(), 51);
    }

    #[test]
    fn outputs_are_written_and_repeatable() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = tiny("snapshot_times = [0.5]");
        c.output = dir.path().join("a");
        let r = run_experiment(&c).unwrap();
        let names: Vec<String> = render_outputs(&r).into_iter().map(|(n, _)| n).collect();
        for n in ["energy.csv", "moments_E1.csv", "moments_H1.csv", "moments_E1_t0.5.csv", "report.json"] {
            assert!(names.iter().any(|m| m == n), "{n} missing from {names:?}");
            assert!(c.output.join(n).exists());
        }
        let moments = std::fs::read_to_string(c.output.join("moments_E1.csv")).unwrap();
        assert_eq!(moments.lines().count(), 17);
        assert!(moments.starts_with("x,wce_mean,wce_m2,wce_m3,wce_m4,mc_mean,"));

        c.output = dir.path().join("b");
        run_experiment(&c).unwrap();
        for n in ["energy.csv", "moments_E1.csv"] {
            assert_eq!(
                std::fs::read(dir.path().join("a").join(n)).unwrap(),
                std::fs::read(dir.path().join("b").join(n)).unwrap()
            );
        }
    }

    #[test]
    fn unwritable_directory_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let mut c = tiny("mode = \"wce\"");
        c.output = blocker.join("sub");
        let e = run_experiment(&c).unwrap_err();
        assert!(matches!(e, HarnessError::Io { .. }));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn json_numbers_carry_seventeen_digits() {
        let json = to_json(&vec![0.1f64, -2.5e-300]);
        assert!(json.contains("1.0000000000000001e-1"), "{json}");
        let back: Vec<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![0.1, -2.5e-300]);
    }
}
