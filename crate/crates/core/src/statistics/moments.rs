use std::collections::HashMap;

use serde::Serialize;

use super::StatsError;
use crate::chaos::{wick_g, MultiIndex};
use crate::propagator::{FieldState, GridSpec, ModelKind, WceSolution};

/// Raw moments `E[u^k]`, `k = 1..=4`, per component and grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentField {
    #[serde(skip)]
    kind: ModelKind,
    #[serde(skip)]
    grid: GridSpec,
    /// `orders[k - 1][component][point]`.
    orders: Vec<Vec<Vec<f64>>>,
}

impl MomentField {
    pub fn new(kind: ModelKind, grid: GridSpec, orders: Vec<Vec<Vec<f64>>>) -> Result<Self, StatsError> {
        let ncomp = kind.components().len();
        let shape_ok =
            orders.len() == 4 && orders.iter().all(|o| o.len() == ncomp && o.iter().all(|c| c.len() == grid.points()));
        if !shape_ok {
            return Err(StatsError::ShapeMismatch {
                candidate: orders.iter().flatten().map(Vec::len).sum(),
                reference: 4 * ncomp * grid.points(),
            });
        }
        if orders.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        Ok(Self { kind, grid, orders })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Moment of order `1..=4` of one component.
    pub fn moment(&self, order: u32, component: usize) -> &[f64] {
        &self.orders[order as usize - 1][component]
    }

    /// Points violating `E[u^2] >= E[u]^2` or `E[u^4] >= E[u^2]^2` beyond roundoff.
    pub fn consistency_violations(&self) -> usize {
        let mut bad = 0;
        for c in 0..self.kind.components().len() {
            let (m1, m2, m4) = (self.moment(1, c), self.moment(2, c), self.moment(4, c));
            for i in 0..m1.len() {
                let eps = 1e-9 * (1.0 + m4[i].abs());
                if m2[i] < m1[i] * m1[i] - eps || m4[i] < m2[i] * m2[i] - eps {
                    bad += 1;
                }
            }
        }
        bad
    }
}

fn check_frame(solution: &WceSolution, frame: usize) -> Result<(), StatsError> {
    let frames = solution.frame_steps().len();
    if frame >= frames {
        return Err(StatsError::FrameOutOfRange { frame, frames });
    }
    Ok(())
}

/// `E[u] = u_0`.
pub fn mean_field(solution: &WceSolution, frame: usize) -> Result<FieldState, StatsError> {
    check_frame(solution, frame)?;
    let zero = solution.truncation.position(&MultiIndex::zero()).expect("zero index is always a member");
    Ok(solution.trajectories[zero]
        .frame(frame)
        .cloned()
        .unwrap_or_else(|| FieldState::zeros(solution.problem.model.kind(), solution.problem.grid)))
}

/// `E[u^2] = sum_alpha u_alpha^2`, per component.
pub fn second_moment(solution: &WceSolution, frame: usize) -> Result<Vec<Vec<f64>>, StatsError> {
    check_frame(solution, frame)?;
    let mut out = zeros_like(solution);
    for state in solution.frame(frame).into_iter().flatten() {
        for (o, c) in out.iter_mut().zip(state.components()) {
            for (a, v) in o.iter_mut().zip(c) {
                *a += v * v;
            }
        }
    }
    Ok(out)
}

fn zeros_like(solution: &WceSolution) -> Vec<Vec<f64>> {
    vec![vec![0.0; solution.problem.grid.points()]; solution.problem.model.num_components()]
}

/// Chaos coefficients of `u^2`: `S_alpha = sum_rho sum_{beta <= alpha} G(alpha, beta, rho) u_{alpha-beta+rho} u_{beta+rho}`
/// for one component, with lookups outside the truncation set counting as zero.
///
/// Enumerates the nonzero pairs `(g1, g2) = (alpha-beta+rho, beta+rho)` directly and
/// recovers `alpha = g1 + g2 - 2 rho`, `beta = g2 - rho` for every `rho <= min(g1, g2)`.
fn square_coefficients(
    solution: &WceSolution,
    frame: usize,
    component: usize,
) -> Result<Vec<(usize, Vec<f64>)>, StatsError> {
    let fields = solution.frame(frame);
    let nonzero: Vec<usize> = fields
        .iter()
        .enumerate()
        .filter(|(_, f)| f.is_some_and(|s| s.component(component).iter().any(|&v| v != 0.0)))
        .map(|(i, _)| i)
        .collect();
    let members = solution.truncation.members();
    let points = solution.problem.grid.points();
    let mut acc: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut order: Vec<usize> = Vec::new();
    for &i1 in &nonzero {
        let g1 = &members[i1];
        let u1 = fields[i1].expect("nonzero").component(component);
        for &i2 in &nonzero {
            let g2 = &members[i2];
            let u2 = fields[i2].expect("nonzero").component(component);
            for rho in g1.meet(g2).lower_set() {
                let beta = g2.checked_sub(&rho).expect("rho <= g2");
                let alpha = g1.add(&beta).checked_sub(&rho).expect("rho <= g1");
                let Some(pos) = solution.truncation.position(&alpha) else {
                    continue;
                };
                let g = wick_g(&alpha, &beta, &rho)?;
                let s = acc.entry(pos).or_insert_with(|| {
                    order.push(pos);
                    vec![0.0; points]
                });
                for ((o, a), b) in s.iter_mut().zip(u1).zip(u2) {
                    *o += g * a * b;
                }
            }
        }
    }
    order.sort_unstable();
    Ok(order.into_iter().map(|p| (p, acc.remove(&p).expect("recorded"))).collect())
}

/// Third (`sum_alpha S_alpha u_alpha`) or fourth (`sum_alpha S_alpha^2`) raw moment per component.
pub fn higher_moments(solution: &WceSolution, frame: usize, order: u32) -> Result<Vec<Vec<f64>>, StatsError> {
    check_frame(solution, frame)?;
    if !(3..=4).contains(&order) {
        return Err(StatsError::UnsupportedOrder(order));
    }
    let fields = solution.frame(frame);
    let mut out = zeros_like(solution);
    for (c, o) in out.iter_mut().enumerate() {
        for (pos, s) in square_coefficients(solution, frame, c)? {
            if order == 4 {
                for (a, v) in o.iter_mut().zip(&s) {
                    *a += v * v;
                }
            } else if let Some(u) = fields[pos] {
                for ((a, v), w) in o.iter_mut().zip(&s).zip(u.component(c)) {
                    *a += v * w;
                }
            }
        }
    }
    Ok(out)
}

/// Moments 1-4 from the chaos coefficients.
pub fn moment_field(solution: &WceSolution, frame: usize) -> Result<MomentField, StatsError> {
    let mean = mean_field(solution, frame)?.into_components();
    let orders = vec![
        mean,
        second_moment(solution, frame)?,
        higher_moments(solution, frame, 3)?,
        higher_moments(solution, frame, 4)?,
    ];
    MomentField::new(solution.problem.model.kind(), solution.problem.grid, orders)
}

/// Closed-form Gaussian moments from `m = u_0` and `s^2 = sum_{|alpha|=1} u_alpha^2`.
/// Refuses solutions with a non-negligible coefficient of order two or more.
pub fn gaussian_moment_oracle(solution: &WceSolution, frame: usize) -> Result<MomentField, StatsError> {
    check_frame(solution, frame)?;
    let fields = solution.frame(frame);
    let mut mean = zeros_like(solution);
    let mut var = zeros_like(solution);
    for (alpha, field) in solution.truncation.members().iter().zip(&fields) {
        let Some(state) = field else { continue };
        match alpha.order() {
            0 => mean = state.components().to_vec(),
            1 => {
                for (o, c) in var.iter_mut().zip(state.components()) {
                    for (a, v) in o.iter_mut().zip(c) {
                        *a += v * v;
                    }
                }
            }
            _ => {
                let magnitude = state.max_abs();
                if magnitude > 1e-12 {
                    return Err(StatsError::NonGaussian { alpha: alpha.to_string(), magnitude });
                }
            }
        }
    }
    let apply = |f: &dyn Fn(f64, f64) -> f64| -> Vec<Vec<f64>> {
        mean.iter().zip(&var).map(|(m, s)| m.iter().zip(s).map(|(&m, &s)| f(m, s)).collect()).collect()
    };
    let orders = vec![
        mean.clone(),
        apply(&|m, s| m * m + s),
        apply(&|m, s| m * m * m + 3.0 * m * s),
        apply(&|m, s| m.powi(4) + 6.0 * m * m * s + 3.0 * s * s),
    ];
    MomentField::new(solution.problem.model.kind(), solution.problem.grid, orders)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::TruncationSet;
    use crate::propagator::{solve_propagator, CoefficientTrajectory, ModelVariant, Problem, TimeGrid, WceOptions};

    fn small_problem(sigma: f64) -> Problem {
        let grid = GridSpec::uniform(1, 2.0 * std::f64::consts::PI, 12).unwrap();
        Problem::new(ModelVariant::maxwell_1d(), grid, TimeGrid::new(1.0, 40).unwrap(), vec![sigma]).unwrap()
    }

    /// A solution whose coefficient fields are set by hand through a one-step run.
    fn synthetic(max_order: u32, max_basis: u32, values: &[(MultiIndex, f64)]) -> WceSolution {
        let problem = small_problem(1.0);
        let opts = WceOptions { max_order, max_basis, short_circuit: true };
        let mut sol = solve_propagator(&problem, &opts).unwrap();
        let template = sol.trajectories[0].clone();
        for (pos, alpha) in sol.truncation.members().to_vec().iter().enumerate() {
            let v = values.iter().find(|(a, _)| a == alpha).map(|(_, v)| *v);
            sol.trajectories[pos] = constant_trajectory(&template, &problem, v);
        }
        sol
    }

    fn constant_trajectory(
        template: &CoefficientTrajectory,
        problem: &Problem,
        v: Option<f64>,
    ) -> CoefficientTrajectory {
        let mut t = template.clone();
        t.set_constant_frames(problem, v);
        t
    }

    /// Literal triple sum over `alpha, rho in J` and `beta <= alpha`.
    fn naive_higher(solution: &WceSolution, order: u32, c: usize) -> Vec<f64> {
        let members = solution.truncation.members();
        let fields = solution.frame(0);
        let points = solution.problem.grid.points();
        let lookup = |m: &MultiIndex| -> Option<&[f64]> {
            solution.truncation.position(m).and_then(|p| fields[p]).map(|s| s.component(c))
        };
        let mut out = vec![0.0; points];
        for alpha in members {
            let mut s = vec![0.0; points];
            for rho in members {
                for beta in alpha.lower_set() {
                    let left = alpha.checked_sub(&beta).unwrap().add(rho);
                    let right = beta.add(rho);
                    let (Some(a), Some(b)) = (lookup(&left), lookup(&right)) else { continue };
                    let g = wick_g(alpha, &beta, rho).unwrap();
                    for i in 0..points {
                        s[i] += g * a[i] * b[i];
                    }
                }
            }
            for i in 0..points {
                out[i] += if order == 4 { s[i] * s[i] } else { s[i] * lookup(alpha).map_or(0.0, |u| u[i]) };
            }
        }
        out
    }

    #[test]
    fn single_mean_coefficient() {
        let sol = synthetic(3, 1, &[(MultiIndex::zero(), 1.5)]);
        let m = moment_field(&sol, 0).unwrap();
        for (k, want) in [(1, 1.5), (2, 2.25), (3, 3.375), (4, 5.0625)] {
            assert!(m.moment(k, 0).iter().all(|v| (v - want).abs() < 1e-12), "order {k}");
        }
    }

    #[test]
    fn one_first_order_coefficient() {
        let sol = synthetic(2, 2, &[(MultiIndex::zero(), 1.0), (MultiIndex::unit(1, 2).unwrap(), 2.0)]);
        assert!(second_moment(&sol, 0).unwrap()[0].iter().all(|&v| v == 5.0));
        let third = higher_moments(&sol, 0, 3).unwrap();
        let fourth = higher_moments(&sol, 0, 4).unwrap();
        assert!(third[1].iter().all(|v| (v - 13.0).abs() < 1e-12));
        assert!(fourth[1].iter().all(|v| (v - 73.0).abs() < 1e-12));
        let oracle = gaussian_moment_oracle(&sol, 0).unwrap();
        assert_eq!(oracle.moment(3, 0)[0], 13.0);
        assert_eq!(oracle.moment(4, 0)[0], 73.0);
    }

    #[test]
    fn standard_normal_oracle() {
        let sol = synthetic(2, 1, &[(MultiIndex::unit(1, 1).unwrap(), 1.0)]);
        let oracle = gaussian_moment_oracle(&sol, 0).unwrap();
        assert_eq!([1, 2, 3, 4].map(|k| oracle.moment(k, 0)[3]), [0.0, 1.0, 0.0, 3.0]);
    }

    #[test]
    fn oracle_rejects_second_order_content() {
        let a2 = MultiIndex::from_entries([(1, 1, 2)]).unwrap();
        let sol = synthetic(2, 1, &[(MultiIndex::zero(), 1.0), (a2, 1e-6)]);
        assert!(matches!(gaussian_moment_oracle(&sol, 0), Err(StatsError::NonGaussian { .. })));
    }

    #[test]
    fn pair_enumeration_matches_literal_triple_sum() {
        // non-Gaussian content exercises every G weight, not just the additive case
        let mi = |e: &[(u32, u32, u32)]| MultiIndex::from_entries(e.iter().copied()).unwrap();
        let values = [
            (MultiIndex::zero(), 0.7),
            (mi(&[(1, 1, 1)]), -1.1),
            (mi(&[(1, 2, 1)]), 0.4),
            (mi(&[(1, 1, 2)]), 0.3),
            (mi(&[(1, 1, 1), (1, 2, 1)]), -0.25),
            (mi(&[(1, 2, 3)]), 0.15),
            (mi(&[(1, 1, 2), (1, 2, 2)]), 0.05),
        ];
        let sol = synthetic(4, 2, &values);
        for order in [3, 4] {
            let fast = higher_moments(&sol, 0, order).unwrap();
            let slow = naive_higher(&sol, order, 0);
            for (a, b) in fast[0].iter().zip(&slow) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "order {order}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn propagated_solution_matches_oracle_and_truncation_indifference() {
        let problem = small_problem(0.8);
        let big = solve_propagator(&problem, &WceOptions { max_order: 6, max_basis: 2, short_circuit: true }).unwrap();
        let small =
            solve_propagator(&problem, &WceOptions { max_order: 2, max_basis: 2, short_circuit: true }).unwrap();
        let m = moment_field(&big, 0).unwrap();
        let o = gaussian_moment_oracle(&big, 0).unwrap();
        for k in 1..=4 {
            for c in 0..2 {
                for (a, b) in m.moment(k, c).iter().zip(o.moment(k, c)) {
                    assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-300) + 1e-300, "order {k}");
                }
            }
        }
        assert_eq!(m, moment_field(&small, 0).unwrap());
        assert_eq!(m.consistency_violations(), 0);
    }

    #[test]
    fn mean_of_noise_free_run_is_deterministic_solution() {
        let problem = small_problem(0.0);
        let sol = solve_propagator(&problem, &WceOptions { max_order: 2, max_basis: 2, short_circuit: true }).unwrap();
        let det = crate::propagator::solve_coefficient(&MultiIndex::zero(), &problem, true).unwrap();
        assert_eq!(&mean_field(&sol, 0).unwrap(), det.final_state().unwrap());
        let zero = solve_propagator(&problem, &WceOptions { max_order: 0, max_basis: 1, short_circuit: true }).unwrap();
        assert_eq!(zero.truncation, TruncationSet::enumerate(1, 0, 1).unwrap());
        assert_eq!(mean_field(&zero, 0).unwrap(), mean_field(&sol, 0).unwrap());
    }

    #[test]
    fn rejects_bad_requests() {
        let sol = synthetic(1, 1, &[]);
        assert!(matches!(higher_moments(&sol, 0, 5), Err(StatsError::UnsupportedOrder(5))));
        assert!(matches!(mean_field(&sol, 3), Err(StatsError::FrameOutOfRange { .. })));
    }
}
