use std::time::Instant;

use serde::Serialize;

use super::config::{ConfigDocument, ExperimentConfig};
use super::{write_outputs, HarnessError};
use crate::monte_carlo::{mc_run, McResult};
use crate::propagator::{solve_propagator, FieldState, GridSpec, Problem, WceSolution};
use crate::statistics::{
    averaged_energy, discrete_energy, energy_rate, moment_field, relative_error_frobenius, validate_coefficient_energy,
    MomentField, StatsError,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyTable {
    pub times: Vec<f64>,
    pub wce: Option<Vec<f64>>,
    pub mc: Option<Vec<f64>>,
    pub mc_standard_error: Option<Vec<f64>>,
    pub reference: Vec<f64>,
    /// `gamma` in `Phi0 + gamma t`.
    pub reference_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorEntry {
    pub component: String,
    pub order: u32,
    /// `None` when the sampled reference field is identically zero.
    pub relative_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualEntry {
    pub alpha: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanEntry {
    pub sigma: f64,
    pub wce: Option<Vec<f64>>,
    pub mc: Option<Vec<f64>>,
    pub reference: Vec<f64>,
}

/// Wall-clock of the solver phases and the pool size they ran on.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub workers: usize,
    pub wce_solve_seconds: Option<f64>,
    pub wce_moments_seconds: Option<f64>,
    pub wce_seconds: Option<f64>,
    pub mc_seconds: Option<f64>,
    /// MC over WCE wall-clock.
    pub speedup: Option<f64>,
    pub scan_seconds: Option<f64>,
}

/// Final-time (or snapshot) moments of one component from each estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentMoments {
    pub component: String,
    pub wce: Option<[Vec<f64>; 4]>,
    pub mc: Option<[Vec<f64>; 4]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMoments {
    pub time: f64,
    pub is_final: bool,
    pub components: Vec<ComponentMoments>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    /// Every experiment key except the output location and worker count.
    pub config: ConfigDocument,
    pub truncation_size: Option<usize>,
    pub frame_times: Vec<f64>,
    pub energy: EnergyTable,
    pub errors: Option<Vec<ErrorEntry>>,
    pub coefficient_energy_residuals: Option<Vec<ResidualEntry>>,
    pub advisories: Vec<String>,
    pub energy_scan: Option<Vec<ScanEntry>>,
    pub timings: Timings,
    #[serde(skip)]
    pub grid: Option<GridSpec>,
    #[serde(skip)]
    pub frames: Vec<FrameMoments>,
}

impl RunReport {
    pub fn error(&self, component: &str, order: u32) -> Option<f64> {
        self.errors.as_ref()?.iter().find(|e| e.component == component && e.order == order)?.relative_error
    }

    pub fn final_frame(&self) -> &FrameMoments {
        self.frames.last().expect("at least the final frame")
    }
}

fn solver_err(phase: &'static str) -> impl Fn(crate::propagator::SolverError) -> HarnessError {
    move |source| HarnessError::Solver { phase, source }
}

fn stats_err(phase: &'static str) -> impl Fn(StatsError) -> HarnessError {
    move |source| HarnessError::Statistics { phase, source }
}

fn component_moments(field: &MomentField, c: usize) -> [Vec<f64>; 4] {
    [1, 2, 3, 4].map(|k| field.moment(k, c).to_vec())
}

fn reference_series(problem: &Problem, phi0: f64) -> (Vec<f64>, f64) {
    let rate = energy_rate(&problem.model, &problem.sigmas, problem.grid.volume());
    (problem.time.times().iter().map(|t| phi0 + rate * t).collect(), rate)
}

/// Runs the requested estimators without touching the filesystem.
pub fn compute_report(config: &ExperimentConfig) -> Result<RunReport, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("`workers`: {e}")))?;
    pool.install(|| compute_in_pool(config, pool.current_num_threads()))
}

fn compute_in_pool(config: &ExperimentConfig, workers: usize) -> Result<RunReport, HarnessError> {
    let problem = config.problem()?;
    let model = &problem.model;
    let mut advisories = Vec::new();
    if let Some(a) = problem.stability_advisory() {
        advisories.push(format!("dt/dx = {:.4} exceeds {}; forward Euler may amplify high modes", a.ratio, a.limit));
    }
    let mut timings = Timings { workers, ..Timings::default() };
    let frame_steps = problem.frame_steps();
    let phi0 = discrete_energy(&FieldState::initial(model.kind(), problem.grid));

    let mut wce: Option<(WceSolution, Vec<MomentField>)> = None;
    if config.mode.runs_wce() {
        let start = Instant::now();
        let solution = solve_propagator(&problem, &config.wce).map_err(solver_err("wce"))?;
        let solved = start.elapsed().as_secs_f64();
        let moments = (0..frame_steps.len())
            .map(|f| moment_field(&solution, f))
            .collect::<Result<Vec<_>, _>>()
            .map_err(stats_err("wce moments"))?;
        let total = start.elapsed().as_secs_f64();
        timings.wce_solve_seconds = Some(solved);
        timings.wce_moments_seconds = Some(total - solved);
        timings.wce_seconds = Some(total);
        wce = Some((solution, moments));
    }

    let mut mc: Option<McResult> = None;
    if config.mode.runs_mc() {
        let start = Instant::now();
        let result = mc_run(&problem, &config.mc).map_err(solver_err("mc"))?;
        timings.mc_seconds = Some(start.elapsed().as_secs_f64());
        mc = Some(result);
    }
    if let (Some(w), Some(m)) = (timings.wce_seconds, timings.mc_seconds) {
        timings.speedup = Some(m / w.max(f64::MIN_POSITIVE));
    }

    let (reference, reference_rate) = reference_series(&problem, phi0);
    let energy = EnergyTable {
        times: problem.time.times(),
        wce: wce.as_ref().map(|(s, _)| averaged_energy(s).values),
        mc: mc.as_ref().map(|r| r.energy.values.clone()),
        mc_standard_error: mc.as_ref().map(|r| r.energy_stderr.clone()),
        reference,
        reference_rate,
    };

    let coefficient_energy_residuals = match &wce {
        Some((solution, _)) => {
            let mut out = Vec::new();
            for (alpha, traj) in solution.truncation.members().iter().zip(&solution.trajectories) {
                if traj.is_short_circuited() {
                    continue;
                }
                let residual = validate_coefficient_energy(alpha, traj, &problem)
                    .map_err(|e| stats_err("energy identity")(e.into()))?;
                out.push(ResidualEntry { alpha: alpha.to_string(), residual });
            }
            Some(out)
        }
        None => None,
    };

    let primary: Vec<(String, usize)> = config
        .primary_components()
        .iter()
        .map(|name| (name.to_string(), model.component_index(name).expect("primary component exists")))
        .collect();
    let frames: Vec<FrameMoments> = frame_steps
        .iter()
        .enumerate()
        .map(|(f, &step)| FrameMoments {
            time: problem.time.time(step),
            is_final: f + 1 == frame_steps.len(),
            components: primary
                .iter()
                .map(|(name, c)| ComponentMoments {
                    component: name.clone(),
                    wce: wce.as_ref().map(|(_, m)| component_moments(&m[f], *c)),
                    mc: mc.as_ref().map(|r| component_moments(&r.moments[f], *c)),
                })
                .collect(),
        })
        .collect();

    let errors = if config.mode.runs_wce() && config.mode.runs_mc() {
        let last = frames.last().expect("final frame");
        let mut table = Vec::new();
        for cm in &last.components {
            let (w, m) = (cm.wce.as_ref().expect("wce ran"), cm.mc.as_ref().expect("mc ran"));
            for k in 0..4 {
                let relative_error = match relative_error_frobenius(&w[k], &m[k]) {
                    Ok(v) => Some(v),
                    Err(StatsError::ZeroReference) => {
                        advisories.push(format!(
                            "sampled moment {} of {} is identically zero; relative error undefined",
                            k + 1,
                            cm.component
                        ));
                        None
                    }
                    Err(e) => return Err(stats_err("comparison")(e)),
                };
                table.push(ErrorEntry { component: cm.component.clone(), order: k as u32 + 1, relative_error });
            }
        }
        Some(table)
    } else {
        None
    };

    let energy_scan = if config.sigma_scan.is_empty() {
        None
    } else {
        let start = Instant::now();
        let mut entries = Vec::new();
        for &sigma in &config.sigma_scan {
            let scan_problem = config.problem_with(vec![sigma; model.num_sigmas()])?;
            let w = if config.mode.runs_wce() {
                Some(
                    averaged_energy(&solve_propagator(&scan_problem, &config.wce).map_err(solver_err("scan wce"))?)
                        .values,
                )
            } else {
                None
            };
            let m = if config.mode.runs_mc() {
                Some(mc_run(&scan_problem, &config.mc).map_err(solver_err("scan mc"))?.energy.values)
            } else {
                None
            };
            entries.push(ScanEntry { sigma, wce: w, mc: m, reference: reference_series(&scan_problem, phi0).0 });
        }
        timings.scan_seconds = Some(start.elapsed().as_secs_f64());
        Some(entries)
    };

    let mut echo = config.to_document();
    echo.output = None;
    echo.workers = None;
    Ok(RunReport {
        config: echo,
        truncation_size: wce.as_ref().map(|(s, _)| s.truncation.len()),
        frame_times: frames.iter().map(|f| f.time).collect(),
        energy,
        errors,
        coefficient_energy_residuals,
        advisories,
        energy_scan,
        timings,
        grid: Some(problem.grid),
        frames,
    })
}

/// Computes the report and writes every output file under `config.output`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport, HarnessError> {
    let report = compute_report(config)?;
    write_outputs(&report, &config.output)?;
    Ok(report)
}
