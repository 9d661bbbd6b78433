//! Deterministic propagator system for the chaos coefficients on periodic
//! structured grids, discretized with forward Euler in time and central
//! differences in space.

mod field;
mod grid;
mod model;
mod solver;

pub(crate) use field::explicit_update;
pub use field::FieldState;
pub use grid::{GridSpec, TimeGrid, MIN_CELLS};
pub use model::{ModelKind, ModelVariant, NoiseChannel, StencilTerm};
pub use solver::{
    forcing_shifts, forcing_terms, initial_condition, solve_coefficient, solve_coefficient_observed, solve_propagator,
    spatial_rhs, step_explicit, CoefficientTrajectory, ForcingTerm, Problem, StabilityAdvisory, WceOptions,
    WceSolution, STABILITY_RATIO_LIMIT,
};

use crate::chaos::ChaosError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid setup: {0}")]
    Setup(String),
    #[error("non-finite value in coefficient {alpha} at step {step}")]
    NonFinite { alpha: String, step: usize },
    #[error("non-finite value in Monte Carlo sample {sample} at step {step}")]
    NonFiniteSample { sample: u64, step: usize },
    #[error("{} coefficient solve(s) failed; first: {}", .0.len(), .0[0])]
    Coefficients(Vec<SolverError>),
    #[error(transparent)]
    Chaos(#[from] ChaosError),
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::chaos::MultiIndex;

    fn reference_1d(sigma: f64) -> Problem {
        let grid = GridSpec::uniform(1, 2.0 * PI, 200).unwrap();
        let time = TimeGrid::new(1.0, 1000).unwrap();
        Problem::new(ModelVariant::maxwell_1d(), grid, time, vec![sigma]).unwrap()
    }

    fn characteristics_error(state: &FieldState, t: f64) -> f64 {
        let grid = state.grid();
        let mut err: f64 = 0.0;
        for i in 0..grid.points() {
            let x = grid.coordinates(i)[0];
            let e = (x - t).sin() + (x + t).cos();
            let h = (x - t).sin() - (x + t).cos();
            err = err.max((state.component(0)[i] - e).abs()).max((state.component(1)[i] - h).abs());
        }
        err
    }

    #[test]
    fn forcing_terms_follow_model_signs() {
        let m = ModelVariant::maxwell_1d();
        assert!(forcing_terms(&MultiIndex::zero(), &m, &[1.0]).is_empty());
        let f = forcing_terms(&MultiIndex::unit(1, 2).unwrap(), &m, &[0.7]);
        assert_eq!(
            f,
            vec![
                ForcingTerm { component: 0, amplitude: -0.7, basis: 2 },
                ForcingTerm { component: 1, amplitude: 0.7, basis: 2 }
            ]
        );
        let two = MultiIndex::from_entries([(1, 1, 2)]).unwrap();
        assert!(forcing_terms(&two, &m, &[1.0]).is_empty());
        // second channel of the two-noise model only drives H
        let m3 = ModelVariant::maxwell_3d_two_noise();
        let f = forcing_terms(&MultiIndex::unit(2, 1).unwrap(), &m3, &[1.0, 0.5]);
        assert_eq!(f.iter().map(|t| t.component).collect::<Vec<_>>(), vec![3, 4, 5]);
        assert!(f.iter().all(|t| t.amplitude == 0.5));
    }

    #[test]
    fn initial_conditions() {
        let p = reference_1d(1.0);
        let z = initial_condition(&p.model, &p.grid, &MultiIndex::unit(1, 1).unwrap());
        assert!(z.is_all_zero());
        let d = initial_condition(&p.model, &p.grid, &MultiIndex::zero());
        assert!((d.component(0)[0] - 1.0).abs() < 1e-15);
        assert!((d.component(1)[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn spatial_rhs_constant_and_single_mode() {
        let p = reference_1d(1.0);
        let mut c = FieldState::zeros(ModelKind::Maxwell1d, p.grid);
        c.fill(3.25);
        assert!(spatial_rhs(&c).is_all_zero());

        let mut s = FieldState::zeros(ModelKind::Maxwell1d, p.grid);
        for i in 0..p.grid.points() {
            s.component_mut(1)[i] = p.grid.coordinates(i)[0].sin();
        }
        let rhs = spatial_rhs(&s);
        let dx = p.grid.spacing()[0];
        let mut dev: f64 = 0.0;
        for i in 0..p.grid.points() {
            let x = p.grid.coordinates(i)[0];
            let modified = -x.cos() * dx.sin() / dx;
            assert!((rhs.component(0)[i] - modified).abs() < 1e-12);
            dev = dev.max((rhs.component(0)[i] + x.cos()).abs());
        }
        assert!(dev < 2e-4, "{dev}");
    }

    #[test]
    fn spatial_rhs_wraps_periodically() {
        let grid = GridSpec::uniform(1, 1.0, 6).unwrap();
        let h = [0.5, -1.0, 2.0, 4.0, 0.25, 8.0];
        let data = vec![vec![0.0; 6], h.to_vec()];
        let s = FieldState::from_components(ModelKind::Maxwell1d, grid, data).unwrap();
        let rhs = spatial_rhs(&s);
        let dx = grid.spacing()[0];
        for i in 0..6 {
            let left = h[(i + 5) % 6];
            let right = h[(i + 1) % 6];
            assert_eq!(rhs.component(0)[i], -1.0 / (2.0 * dx) * (right - left));
        }
    }

    #[test]
    fn semi_discrete_operator_is_skew() {
        for (kind, cells) in [(ModelKind::Maxwell1d, 16), (ModelKind::Maxwell2dTm, 8), (ModelKind::Maxwell3d, 5)] {
            let grid = GridSpec::uniform(kind.dim(), 1.3, cells).unwrap();
            let mut u = FieldState::zeros(kind, grid);
            for c in 0..kind.components().len() {
                for (i, v) in u.component_mut(c).iter_mut().enumerate() {
                    *v = ((i * 7 + c * 13) as f64 * 0.37).sin();
                }
            }
            let au = spatial_rhs(&u);
            let ip: f64 = u
                .components()
                .iter()
                .zip(au.components())
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
                .sum();
            assert!(ip.abs() < 1e-10, "{kind:?}: <u, Au> = {ip}");
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let p = reference_1d(1.0);
        let z = FieldState::zeros(ModelKind::Maxwell1d, p.grid);
        let next = step_explicit(&z, 0, &p.time, &[]).unwrap();
        assert!(next.is_all_zero());
        assert!(step_explicit(&z, 1000, &p.time, &[]).is_err());
    }

    #[test]
    fn constant_mode_is_integrated_exactly() {
        let p = reference_1d(1.0);
        let alpha = MultiIndex::unit(1, 1).unwrap();
        let forcing = forcing_terms(&alpha, &p.model, &p.sigmas);
        let mut s = initial_condition(&p.model, &p.grid, &alpha);
        for n in 0..37 {
            s = step_explicit(&s, n, &p.time, &forcing).unwrap();
        }
        let expected = 37.0 * p.time.dt();
        assert!(s.component(0).iter().all(|v| (v + expected).abs() < 1e-14));
        assert!(s.component(1).iter().all(|v| (v - expected).abs() < 1e-14));

        let traj = solve_coefficient(&alpha, &p, true).unwrap();
        let fin = traj.final_state().unwrap();
        assert!(fin.component(0).iter().all(|v| (v + 1.0).abs() < 1e-12));
        assert!(fin.component(1).iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn deterministic_solution_matches_characteristics() {
        let p = reference_1d(0.0);
        let traj = solve_coefficient(&MultiIndex::zero(), &p, true).unwrap();
        let err = characteristics_error(traj.final_state().unwrap(), 1.0);
        assert!(err <= 2e-2, "{err}");
        // FTCS drift on the initialized mode
        let e0 = traj.energy[0];
        let drift = (traj.energy[1000] - e0).abs() / e0;
        assert!(drift <= 3e-3, "{drift}");
    }

    #[test]
    fn halving_dt_halves_deterministic_error() {
        let coarse = reference_1d(0.0);
        let mut fine = coarse.clone();
        fine.time = TimeGrid::new(1.0, 2000).unwrap();
        let e1 = characteristics_error(
            solve_coefficient(&MultiIndex::zero(), &coarse, true).unwrap().final_state().unwrap(),
            1.0,
        );
        let e2 = characteristics_error(
            solve_coefficient(&MultiIndex::zero(), &fine, true).unwrap().final_state().unwrap(),
            1.0,
        );
        let ratio = e2 / e1;
        assert!((0.4..=0.6).contains(&ratio), "ratio {ratio} ({e1} -> {e2})");
    }

    #[test]
    fn higher_coefficients_are_exactly_zero_without_short_circuit() {
        let grid = GridSpec::uniform(1, 2.0 * PI, 16).unwrap();
        let p = Problem::new(ModelVariant::maxwell_1d(), grid, TimeGrid::new(1.0, 50).unwrap(), vec![1.0]).unwrap();
        let alpha = MultiIndex::from_entries([(1, 1, 1), (1, 2, 1)]).unwrap();
        let mut max_seen: f64 = 0.0;
        let traj = solve_coefficient_observed(&alpha, &p, false, |_, s| max_seen = max_seen.max(s.max_abs())).unwrap();
        assert_eq!(max_seen, 0.0);
        assert!(!traj.is_short_circuited());
        assert!(solve_coefficient(&alpha, &p, true).unwrap().is_short_circuited());
    }

    #[test]
    fn propagator_counts_and_linearity() {
        let p = reference_1d(1.0);
        let opts = WceOptions { max_order: 20, max_basis: 2, short_circuit: true };
        let sol = solve_propagator(&p, &opts).unwrap();
        assert_eq!(sol.truncation.len(), 231);
        let zero = sol.trajectories.iter().filter(|t| t.final_state().is_none_or(|s| s.is_all_zero())).count();
        assert_eq!(zero, 228);

        let mut doubled = p.clone();
        doubled.sigmas = vec![2.0];
        let small = WceOptions { max_order: 1, max_basis: 2, short_circuit: true };
        let a = solve_propagator(&p, &small).unwrap();
        let b = solve_propagator(&doubled, &small).unwrap();
        assert_eq!(a.trajectories[0], b.trajectories[0]);
        for pos in 1..3 {
            let x = a.trajectories[pos].final_state().unwrap();
            let y = b.trajectories[pos].final_state().unwrap();
            for (cx, cy) in x.components().iter().zip(y.components()) {
                for (u, v) in cx.iter().zip(cy) {
                    assert!((2.0 * u - v).abs() <= 1e-14 * v.abs().max(1e-300));
                }
            }
        }
    }

    #[test]
    fn stability_advisory_threshold() {
        let p = reference_1d(1.0);
        assert!(p.stability_advisory().is_none());
        let mut q = p.clone();
        q.time = TimeGrid::new(1.0, 10).unwrap();
        assert!(q.stability_advisory().unwrap().ratio > 0.5);
    }
}
