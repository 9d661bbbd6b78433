use serde::Serialize;

use crate::chaos::{basis_m, MultiIndex};
use crate::propagator::{forcing_terms, CoefficientTrajectory, FieldState, ModelVariant, Problem, WceSolution};

/// `sum_grid (|E|^2 + |H|^2) * cell volume`.
pub fn discrete_energy(state: &FieldState) -> f64 {
    state.sum_of_squares() * state.grid().cell_volume()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl EnergySeries {
    pub fn last(&self) -> f64 {
        *self.values.last().expect("series is never empty")
    }
}

/// `E[Phi(t_n)] = sum_alpha Phi(u_alpha(t_n))`.
pub fn averaged_energy(solution: &WceSolution) -> EnergySeries {
    let times = solution.problem.time.times();
    let mut values = vec![0.0; times.len()];
    for t in &solution.trajectories {
        for (v, e) in values.iter_mut().zip(&t.energy) {
            *v += e;
        }
    }
    EnergySeries { times, values }
}

/// Growth rate `gamma = |Theta| * sum_components sigma^2` of the mean energy.
pub fn energy_rate(model: &ModelVariant, sigmas: &[f64], volume: f64) -> f64 {
    model.noise_variance_rate(sigmas) * volume
}

/// `Phi0 + gamma t`.
pub fn energy_reference(t: f64, model: &ModelVariant, sigmas: &[f64], volume: f64, phi0: f64) -> f64 {
    phi0 + energy_rate(model, sigmas, volume) * t
}

/// Relative mismatch between a coefficient's final energy and its initial energy plus
/// the work done by the forcing, `2 int_0^T sum_c amp_c m_p(t) int_Theta u_c dx dt`
/// (trapezoid rule on the step grid).
pub fn validate_coefficient_energy(
    alpha: &MultiIndex,
    trajectory: &CoefficientTrajectory,
    problem: &Problem,
) -> Result<f64, crate::chaos::ChaosError> {
    let steps = problem.time.steps();
    let basis = problem.basis();
    let forcing = forcing_terms(alpha, &problem.model, &problem.sigmas);
    let mut power = Vec::with_capacity(steps + 1);
    for n in 0..=steps {
        let t = problem.time.time(n);
        let mut p = 0.0;
        for f in &forcing {
            p += 2.0 * f.amplitude * basis_m(f.basis, t, &basis)? * trajectory.component_integrals[n][f.component];
        }
        power.push(p);
    }
    let dt = problem.time.dt();
    let gamma: f64 = power.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).sum();
    let initial = if alpha.is_zero() { trajectory.energy[0] } else { 0.0 };
    let fin = trajectory.energy[steps];
    Ok((fin - initial - gamma).abs() / (1.0 + fin))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;
    use crate::propagator::{solve_coefficient, solve_propagator, GridSpec, ModelKind, TimeGrid, WceOptions};

    fn reference_1d(sigma: f64) -> Problem {
        let grid = GridSpec::uniform(1, 2.0 * PI, 200).unwrap();
        Problem::new(ModelVariant::maxwell_1d(), grid, TimeGrid::new(1.0, 1000).unwrap(), vec![sigma]).unwrap()
    }

    #[test]
    fn discrete_energy_examples() {
        let grid = GridSpec::uniform(1, 2.0 * PI, 200).unwrap();
        assert_eq!(discrete_energy(&FieldState::zeros(ModelKind::Maxwell1d, grid)), 0.0);
        let mut s = FieldState::zeros(ModelKind::Maxwell1d, grid);
        s.component_mut(0).fill(1.0);
        assert!((discrete_energy(&s) - 2.0 * PI).abs() < 1e-12);
        let init = FieldState::initial(ModelKind::Maxwell1d, grid);
        assert!((discrete_energy(&init) - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn reference_law() {
        let m1 = ModelVariant::maxwell_1d();
        assert_eq!(energy_reference(0.7, &m1, &[0.0], 2.0 * PI, 3.0), 3.0);
        assert!((energy_reference(1.0, &m1, &[1.0], 2.0 * PI, 0.0) - 4.0 * PI).abs() < 1e-12);
        let two = ModelVariant::maxwell_3d_two_noise();
        assert!((energy_reference(1.0, &two, &[1.0, 1.0], 1.0, 2.5) - 8.5).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_energy_at_horizon() {
        let p = reference_1d(1.0);
        let sol = solve_propagator(&p, &WceOptions { max_order: 2, max_basis: 2, short_circuit: true }).unwrap();
        let e = averaged_energy(&sol);
        let rel = (e.last() - 8.0 * PI).abs() / (8.0 * PI);
        assert!(rel < 0.02, "{rel}");
        assert_eq!(e.times.len(), e.values.len());
    }

    #[test]
    fn energy_is_monotone_in_basis_count() {
        let mut p = reference_1d(1.0);
        p.time = TimeGrid::new(1.0, 200).unwrap();
        p.grid = GridSpec::uniform(1, 2.0 * PI, 32).unwrap();
        let half = |i| {
            let sol = solve_propagator(&p, &WceOptions { max_order: 1, max_basis: i, short_circuit: true }).unwrap();
            averaged_energy(&sol).values[100]
        };
        let series: Vec<f64> = (1..=4).map(half).collect();
        assert!(series.windows(2).all(|w| w[1] >= w[0]), "{series:?}");
    }

    #[test]
    fn coefficient_energy_identity() {
        let p = reference_1d(1.0);
        let unit = MultiIndex::unit(1, 1).unwrap();
        let t = solve_coefficient(&unit, &p, true).unwrap();
        assert!(validate_coefficient_energy(&unit, &t, &p).unwrap() <= 5e-3);

        let q = reference_1d(0.0);
        let t0 = solve_coefficient(&MultiIndex::zero(), &q, true).unwrap();
        assert!(validate_coefficient_energy(&MultiIndex::zero(), &t0, &q).unwrap() <= 3e-3);

        let two = MultiIndex::from_entries([(1, 1, 1), (1, 2, 1)]).unwrap();
        let t2 = solve_coefficient(&two, &p, true).unwrap();
        assert_eq!(validate_coefficient_energy(&two, &t2, &p).unwrap(), 0.0);
    }

    #[test]
    fn sigma_scaling_is_quadratic() {
        let mut p = reference_1d(0.3);
        p.grid = GridSpec::uniform(1, 2.0 * PI, 40).unwrap();
        let opts = WceOptions { max_order: 2, max_basis: 2, short_circuit: true };
        let energy = |s: f64| {
            let mut q = p.clone();
            q.sigmas = vec![s];
            averaged_energy(&solve_propagator(&q, &opts).unwrap())
        };
        let det = energy(0.0);
        let base = energy(0.3);
        let scaled = energy(0.9);
        for n in 1..det.values.len() {
            let a = base.values[n] - det.values[n];
            let b = scaled.values[n] - det.values[n];
            assert!((9.0 * a - b).abs() <= 1e-10 * b.abs(), "step {n}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn averaged_energy_is_sum_of_coefficient_energies(sigma in 0.0f64..2.0, cells in 8usize..24) {
            let grid = GridSpec::uniform(1, 2.0 * PI, cells).unwrap();
            let p = Problem::new(ModelVariant::maxwell_1d(), grid, TimeGrid::new(0.5, 30).unwrap(), vec![sigma]).unwrap();
            let sol = solve_propagator(&p, &WceOptions { max_order: 2, max_basis: 3, short_circuit: true }).unwrap();
            let direct: f64 = sol.frame(0).iter().flatten().map(|s| discrete_energy(s)).sum();
            let series = averaged_energy(&sol).last();
            prop_assert!((direct - series).abs() <= 1e-12 * series.max(1.0));
        }
    }
}
