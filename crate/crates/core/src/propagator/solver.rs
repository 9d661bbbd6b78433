use rayon::prelude::*;
use serde::Serialize;

use super::field::{accumulate_operator, explicit_update};
use super::{FieldState, GridSpec, ModelVariant, SolverError, TimeGrid};
use crate::chaos::{basis_m, BasisSpec, MultiIndex, TruncationSet};

/// Everything that defines one deterministic-plus-noise experiment, shared by
/// the propagator and the Monte Carlo reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub model: ModelVariant,
    pub grid: GridSpec,
    pub time: TimeGrid,
    /// Noise amplitudes, indexed by `NoiseChannel::sigma_index`.
    pub sigmas: Vec<f64>,
    /// Extra steps (besides the last) at which states are kept.
    pub snapshot_steps: Vec<usize>,
}

impl Problem {
    pub fn new(model: ModelVariant, grid: GridSpec, time: TimeGrid, sigmas: Vec<f64>) -> Result<Self, SolverError> {
        if grid.dim() != model.kind().dim() {
            return Err(SolverError::Setup(format!(
                "{:?} needs a {}-dimensional grid",
                model.kind(),
                model.kind().dim()
            )));
        }
        if sigmas.len() != model.num_sigmas() {
            return Err(SolverError::Setup(format!(
                "model expects {} noise amplitudes, got {}",
                model.num_sigmas(),
                sigmas.len()
            )));
        }
        if sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(SolverError::Setup("noise amplitudes must be finite and nonnegative".into()));
        }
        Ok(Self { model, grid, time, sigmas, snapshot_steps: Vec::new() })
    }

    pub fn with_snapshots(mut self, mut steps: Vec<usize>) -> Result<Self, SolverError> {
        steps.sort_unstable();
        steps.dedup();
        steps.retain(|&s| s != self.time.steps());
        if steps.iter().any(|&s| s > self.time.steps()) {
            return Err(SolverError::Setup("snapshot step beyond the horizon".into()));
        }
        self.snapshot_steps = steps;
        Ok(self)
    }

    /// Steps at which frames are stored: snapshots, then the final step.
    pub fn frame_steps(&self) -> Vec<usize> {
        let mut v = self.snapshot_steps.clone();
        v.push(self.time.steps());
        v
    }

    pub fn basis(&self) -> BasisSpec {
        BasisSpec::new(self.time.horizon()).expect("time grid horizon is positive")
    }

    pub fn stability_advisory(&self) -> Option<StabilityAdvisory> {
        let ratio = self.time.dt() / self.grid.min_spacing();
        (ratio > STABILITY_RATIO_LIMIT).then_some(StabilityAdvisory { ratio, limit: STABILITY_RATIO_LIMIT })
    }
}

pub const STABILITY_RATIO_LIMIT: f64 = 0.5;

/// Forward-Euler/central-difference is only weakly stable; large `dt/dx` is flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityAdvisory {
    pub ratio: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WceOptions {
    pub max_order: u32,
    pub max_basis: u32,
    /// Skip integrating `|alpha| >= 2` coefficients, which are identically zero.
    pub short_circuit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForcingTerm {
    pub component: usize,
    pub amplitude: f64,
    pub basis: u32,
}

/// Forcing of the propagator equation for `alpha`: nonzero only for `alpha = e_{k,p}`,
/// where every component driven by channel `k` receives `±sigma_k m_p(t)`.
pub fn forcing_terms(alpha: &MultiIndex, model: &ModelVariant, sigmas: &[f64]) -> Vec<ForcingTerm> {
    let Some(slot) = alpha.as_unit() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for c in 0..model.num_components() {
        for ch in model.noise(c) {
            if ch.wiener == slot.wiener {
                out.push(ForcingTerm { component: c, amplitude: ch.sign * sigmas[ch.sigma_index], basis: slot.basis });
            }
        }
    }
    out
}

/// Initial coefficient field: the experiment's datum for `alpha = 0`, zero otherwise.
pub fn initial_condition(model: &ModelVariant, grid: &GridSpec, alpha: &MultiIndex) -> FieldState {
    if alpha.is_zero() {
        FieldState::initial(model.kind(), *grid)
    } else {
        FieldState::zeros(model.kind(), *grid)
    }
}

/// Central-difference image of the curl stencil.
pub fn spatial_rhs(state: &FieldState) -> FieldState {
    let mut data = FieldState::zeros(state.kind(), *state.grid()).into_components();
    accumulate_operator(state.kind(), state.grid(), state.components(), &mut data, 1.0);
    FieldState::from_components(state.kind(), *state.grid(), data).expect("shape preserved")
}

/// Per-component additive increment `dt * sum amplitude * m_p(t_n)` at step `n`.
pub fn forcing_shifts(
    forcing: &[ForcingTerm],
    num_components: usize,
    step: usize,
    time: &TimeGrid,
    basis: &BasisSpec,
) -> Result<Vec<f64>, SolverError> {
    let mut shifts = vec![0.0; num_components];
    let t = time.time(step);
    for f in forcing {
        shifts[f.component] += time.dt() * f.amplitude * basis_m(f.basis, t, basis)?;
    }
    Ok(shifts)
}

/// `U^{n+1} = U^n + dt (A U^n + forcing(t_n))`.
pub fn step_explicit(
    state: &FieldState,
    step: usize,
    time: &TimeGrid,
    forcing: &[ForcingTerm],
) -> Result<FieldState, SolverError> {
    if step >= time.steps() {
        return Err(SolverError::Setup(format!("step {step} is past the last step {}", time.steps())));
    }
    let basis = BasisSpec::new(time.horizon())?;
    let shifts = forcing_shifts(forcing, state.components().len(), step, time, &basis)?;
    let mut next = FieldState::zeros(state.kind(), *state.grid()).into_components();
    explicit_update(state.kind(), state.grid(), state.components(), &mut next, time.dt(), &shifts);
    Ok(FieldState::from_components(state.kind(), *state.grid(), next).expect("shape preserved"))
}

/// Time history of one chaos coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTrajectory {
    /// States at `Problem::frame_steps`; `None` when identically zero.
    frames: Option<Vec<FieldState>>,
    /// Discrete energy at every `t_n`, `n = 0..=steps`.
    pub energy: Vec<f64>,
    /// `int_Theta u_c dx` per step and component.
    pub component_integrals: Vec<Vec<f64>>,
}

impl CoefficientTrajectory {
    fn zero(problem: &Problem) -> Self {
        let steps = problem.time.steps();
        Self {
            frames: None,
            energy: vec![0.0; steps + 1],
            component_integrals: vec![vec![0.0; problem.model.num_components()]; steps + 1],
        }
    }

    /// State at frame `i`, or `None` for a short-circuited zero trajectory.
    pub fn frame(&self, i: usize) -> Option<&FieldState> {
        self.frames.as_ref().map(|f| &f[i])
    }

    pub fn final_state(&self) -> Option<&FieldState> {
        self.frames.as_ref().and_then(|f| f.last())
    }

    pub fn is_short_circuited(&self) -> bool {
        self.frames.is_none()
    }

    /// Replaces every frame by a constant field (or the zero trajectory for `None`).
    #[cfg(test)]
    pub(crate) fn set_constant_frames(&mut self, problem: &Problem, value: Option<f64>) {
        self.frames = value.map(|v| {
            let mut s = FieldState::zeros(problem.model.kind(), problem.grid);
            s.fill(v);
            vec![s; problem.frame_steps().len()]
        });
    }
}

/// Integrates one coefficient; `observe` sees the state after every step
/// (and the initial state as step 0).
pub fn solve_coefficient_observed(
    alpha: &MultiIndex,
    problem: &Problem,
    short_circuit: bool,
    mut observe: impl FnMut(usize, &FieldState),
) -> Result<CoefficientTrajectory, SolverError> {
    if short_circuit && alpha.order() >= 2 {
        return Ok(CoefficientTrajectory::zero(problem));
    }
    let kind = problem.model.kind();
    let grid = problem.grid;
    let time = problem.time;
    let basis = problem.basis();
    let forcing = forcing_terms(alpha, &problem.model, &problem.sigmas);
    let frame_steps = problem.frame_steps();
    let cell_volume = grid.cell_volume();
    let ncomp = problem.model.num_components();

    let mut frames = Vec::with_capacity(frame_steps.len());
    let mut energy = Vec::with_capacity(time.steps() + 1);
    let mut integrals = Vec::with_capacity(time.steps() + 1);
    let mut record = |n: usize, state: &FieldState, frames: &mut Vec<FieldState>| -> Result<(), SolverError> {
        let e = state.sum_of_squares() * cell_volume;
        if !e.is_finite() {
            return Err(SolverError::NonFinite { alpha: alpha.to_string(), step: n });
        }
        energy.push(e);
        integrals.push(state.components().iter().map(|c| c.iter().sum::<f64>() * cell_volume).collect::<Vec<_>>());
        if frame_steps.contains(&n) {
            frames.push(state.clone());
        }
        observe(n, state);
        Ok(())
    };

    let mut current = initial_condition(&problem.model, &grid, alpha);
    record(0, &current, &mut frames)?;
    let mut scratch_next = FieldState::zeros(kind, grid).into_components();
    for n in 0..time.steps() {
        let shifts = forcing_shifts(&forcing, ncomp, n, &time, &basis)?;
        explicit_update(kind, &grid, current.components(), &mut scratch_next, time.dt(), &shifts);
        let mut cur_data = current.into_components();
        std::mem::swap(&mut cur_data, &mut scratch_next);
        current = FieldState::from_components(kind, grid, cur_data).expect("shape preserved");
        record(n + 1, &current, &mut frames)?;
    }
    Ok(CoefficientTrajectory { frames: Some(frames), energy, component_integrals: integrals })
}

pub fn solve_coefficient(
    alpha: &MultiIndex,
    problem: &Problem,
    short_circuit: bool,
) -> Result<CoefficientTrajectory, SolverError> {
    solve_coefficient_observed(alpha, problem, short_circuit, |_, _| {})
}

/// Chaos coefficients for every member of the truncation set.
#[derive(Debug, Clone)]
pub struct WceSolution {
    pub truncation: TruncationSet,
    pub problem: Problem,
    pub trajectories: Vec<CoefficientTrajectory>,
}

impl WceSolution {
    pub fn frame_steps(&self) -> Vec<usize> {
        self.problem.frame_steps()
    }

    pub fn final_frame(&self) -> usize {
        self.problem.snapshot_steps.len()
    }

    /// Coefficient fields of all members at frame `i`; `None` entries are zero.
    pub fn frame(&self, i: usize) -> Vec<Option<&FieldState>> {
        self.trajectories.iter().map(|t| t.frame(i)).collect()
    }
}

/// Solves every propagator equation independently; results are stored by
/// position in the truncation set, so the payload does not depend on scheduling.
pub fn solve_propagator(problem: &Problem, options: &WceOptions) -> Result<WceSolution, SolverError> {
    let truncation = TruncationSet::enumerate(problem.model.num_wiener(), options.max_order, options.max_basis)?;
    let results: Vec<Result<CoefficientTrajectory, SolverError>> =
        truncation.members().par_iter().map(|alpha| solve_coefficient(alpha, problem, options.short_circuit)).collect();
    let mut trajectories = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(t) => trajectories.push(t),
            Err(e) => failures.push(e),
        }
    }
    if !failures.is_empty() {
        return Err(SolverError::Coefficients(failures));
    }
    Ok(WceSolution { truncation, problem: problem.clone(), trajectories })
}
