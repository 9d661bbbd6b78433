use std::time::{Duration, Instant};

use super::IncrementStream;
use crate::propagator::{explicit_update, FieldState, Problem, SolverError};
use crate::statistics::{EnergySeries, MomentField};

/// Samples per leaf of the reduction tree. Fixed so that results do not depend
/// on the number of workers.
pub const BLOCK_SAMPLES: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McOptions {
    pub samples: u64,
    pub master_seed: u64,
}

/// Running power sums of the sampled fields.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleAccumulator {
    count: u64,
    /// `power_sums[frame][k - 1][component * points + i] = sum u^k`.
    power_sums: Vec<[Vec<f64>; 4]>,
    energy_sum: Vec<f64>,
    energy_sq_sum: Vec<f64>,
}

impl SampleAccumulator {
    pub fn new(frames: usize, values_per_frame: usize, steps: usize) -> Self {
        let zero = || vec![0.0; values_per_frame];
        Self {
            count: 0,
            power_sums: (0..frames).map(|_| [zero(), zero(), zero(), zero()]).collect(),
            energy_sum: vec![0.0; steps + 1],
            energy_sq_sum: vec![0.0; steps + 1],
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn add_frame(&mut self, frame: usize, state: &FieldState) {
        let [s1, s2, s3, s4] = &mut self.power_sums[frame];
        let points = state.grid().points();
        for (c, comp) in state.components().iter().enumerate() {
            let range = c * points..(c + 1) * points;
            for ((((a, b), d), e), &u) in s1[range.clone()]
                .iter_mut()
                .zip(&mut s2[range.clone()])
                .zip(&mut s3[range.clone()])
                .zip(&mut s4[range])
                .zip(comp)
            {
                let u2 = u * u;
                *a += u;
                *b += u2;
                *d += u2 * u;
                *e += u2 * u2;
            }
        }
    }

    fn add_energy(&mut self, step: usize, energy: f64) {
        self.energy_sum[step] += energy;
        self.energy_sq_sum[step] += energy * energy;
    }

    pub fn merge(&mut self, other: &SampleAccumulator) {
        self.count += other.count;
        for (mine, theirs) in self.power_sums.iter_mut().zip(&other.power_sums) {
            for (m, t) in mine.iter_mut().zip(theirs) {
                for (a, b) in m.iter_mut().zip(t) {
                    *a += b;
                }
            }
        }
        for (a, b) in self.energy_sum.iter_mut().zip(&other.energy_sum) {
            *a += b;
        }
        for (a, b) in self.energy_sq_sum.iter_mut().zip(&other.energy_sq_sum) {
            *a += b;
        }
    }

    /// Sample moments per frame, mean energy, and its standard error
    /// (zero for a single sample).
    pub fn finalize(&self, problem: &Problem) -> Result<(Vec<MomentField>, EnergySeries, Vec<f64>), SolverError> {
        if self.count == 0 {
            return Err(SolverError::Setup("no Monte Carlo samples were accumulated".into()));
        }
        let n = self.count as f64;
        let points = problem.grid.points();
        let mut moments = Vec::with_capacity(self.power_sums.len());
        for sums in &self.power_sums {
            let orders = sums
                .iter()
                .map(|s| s.chunks_exact(points).map(|c| c.iter().map(|v| v / n).collect()).collect())
                .collect();
            let field = MomentField::new(problem.model.kind(), problem.grid, orders)
                .map_err(|e| SolverError::Setup(format!("Monte Carlo moments: {e}")))?;
            moments.push(field);
        }
        let mean: Vec<f64> = self.energy_sum.iter().map(|s| s / n).collect();
        let stderr = self
            .energy_sq_sum
            .iter()
            .zip(&mean)
            .map(|(sq, m)| {
                if self.count < 2 {
                    return 0.0;
                }
                let var = ((sq - n * m * m) / (n - 1.0)).max(0.0);
                (var / n).sqrt()
            })
            .collect();
        Ok((moments, EnergySeries { times: problem.time.times(), values: mean }, stderr))
    }
}

#[derive(Debug, Clone)]
pub struct McResult {
    pub samples: u64,
    /// Sample moments at `Problem::frame_steps`.
    pub moments: Vec<MomentField>,
    pub energy: EnergySeries,
    pub energy_stderr: Vec<f64>,
    pub elapsed: Duration,
}

impl McResult {
    pub fn final_moments(&self) -> &MomentField {
        self.moments.last().expect("at least the final frame")
    }
}

/// Euler-Maruyama path of one sample, accumulated into `acc`.
fn simulate_sample(
    problem: &Problem,
    master_seed: u64,
    sample: u64,
    acc: &mut SampleAccumulator,
    buffers: &mut (Vec<Vec<f64>>, Vec<Vec<f64>>),
) -> Result<(), SolverError> {
    let kind = problem.model.kind();
    let grid = problem.grid;
    let time = problem.time;
    let ncomp = problem.model.num_components();
    let channels = problem.model.num_wiener() as usize;
    let frame_steps = problem.frame_steps();
    let cell_volume = grid.cell_volume();
    let amplitudes: Vec<Vec<(usize, f64)>> = (0..ncomp)
        .map(|c| {
            problem
                .model
                .noise(c)
                .iter()
                .map(|ch| (ch.wiener as usize - 1, ch.sign * problem.sigmas[ch.sigma_index]))
                .collect()
        })
        .collect();

    let mut stream = IncrementStream::new(master_seed, sample, channels, time.dt());
    let mut dw = vec![0.0; channels];
    let mut shifts = vec![0.0; ncomp];

    let (cur, next) = buffers;
    let initial = FieldState::initial(kind, grid).into_components();
    for (c, init) in cur.iter_mut().zip(initial) {
        c.copy_from_slice(&init);
    }
    let mut frame = 0;
    let mut record = |n: usize, data: &Vec<Vec<f64>>, acc: &mut SampleAccumulator| -> Result<(), SolverError> {
        let e: f64 = data.iter().flatten().map(|v| v * v).sum::<f64>() * cell_volume;
        if !e.is_finite() {
            return Err(SolverError::NonFiniteSample { sample, step: n });
        }
        acc.add_energy(n, e);
        if frame < frame_steps.len() && frame_steps[frame] == n {
            let state = FieldState::from_components(kind, grid, data.clone()).expect("shape preserved");
            acc.add_frame(frame, &state);
            frame += 1;
        }
        Ok(())
    };
    record(0, cur, acc)?;
    for n in 0..time.steps() {
        stream.next_step(&mut dw);
        for (s, amps) in shifts.iter_mut().zip(&amplitudes) {
            *s = amps.iter().map(|&(k, a)| a * dw[k]).sum();
        }
        explicit_update(kind, &grid, cur, next, time.dt(), &shifts);
        std::mem::swap(cur, next);
        record(n + 1, cur, acc)?;
    }
    acc.count += 1;
    Ok(())
}

fn run_block(problem: &Problem, opts: &McOptions, block: u64) -> Result<SampleAccumulator, SolverError> {
    let ncomp = problem.model.num_components();
    let points = problem.grid.points();
    let mut acc = SampleAccumulator::new(problem.frame_steps().len(), ncomp * points, problem.time.steps());
    let mut buffers = (vec![vec![0.0; points]; ncomp], vec![vec![0.0; points]; ncomp]);
    let start = block * BLOCK_SAMPLES;
    let end = (start + BLOCK_SAMPLES).min(opts.samples);
    for sample in start..end {
        simulate_sample(problem, opts.master_seed, sample, &mut acc, &mut buffers)?;
    }
    Ok(acc)
}

/// Blocks `lo..hi` reduced by a fixed midpoint-split binary tree. On failure the
/// lowest failing block wins, so the reported sample is scheduling independent.
fn reduce_blocks(problem: &Problem, opts: &McOptions, lo: u64, hi: u64) -> Result<SampleAccumulator, SolverError> {
    if hi - lo == 1 {
        return run_block(problem, opts, lo);
    }
    let mid = lo + (hi - lo) / 2;
    let (left, right) = rayon::join(|| reduce_blocks(problem, opts, lo, mid), || reduce_blocks(problem, opts, mid, hi));
    let mut left = left?;
    left.merge(&right?);
    Ok(left)
}

/// Monte Carlo moments and mean energy from `opts.samples` Euler-Maruyama paths on
/// the same stencil as the propagator.
pub fn mc_run(problem: &Problem, opts: &McOptions) -> Result<McResult, SolverError> {
    if opts.samples == 0 {
        return Err(SolverError::Setup("at least one Monte Carlo sample is required".into()));
    }
    let start = Instant::now();
    let blocks = opts.samples.div_ceil(BLOCK_SAMPLES);
    let acc = reduce_blocks(problem, opts, 0, blocks)?;
    let (moments, energy, energy_stderr) = acc.finalize(problem)?;
    Ok(McResult { samples: opts.samples, moments, energy, energy_stderr, elapsed: start.elapsed() })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::chaos::MultiIndex;
    use crate::propagator::{solve_coefficient, GridSpec, ModelVariant, TimeGrid};

    fn small_1d(sigma: f64) -> Problem {
        let grid = GridSpec::uniform(1, 2.0 * PI, 24).unwrap();
        Problem::new(ModelVariant::maxwell_1d(), grid, TimeGrid::new(1.0, 100).unwrap(), vec![sigma]).unwrap()
    }

    #[test]
    fn noise_free_samples_reproduce_deterministic_powers() {
        let p = small_1d(0.0).with_snapshots(vec![40]).unwrap();
        let r = mc_run(&p, &McOptions { samples: 70, master_seed: 3 }).unwrap();
        let det = solve_coefficient(&MultiIndex::zero(), &p, true).unwrap();
        for (f, m) in r.moments.iter().enumerate() {
            let u = det.frame(f).unwrap();
            for c in 0..2 {
                for k in 1..=4 {
                    for (a, b) in m.moment(k, c).iter().zip(u.component(c)) {
                        let want = b.powi(k as i32);
                        assert!((a - want).abs() <= 1e-12 * want.abs().max(1e-3), "frame {f} order {k}");
                    }
                }
            }
        }
        assert!(r.energy_stderr.iter().all(|&s| s < 1e-6));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let p = small_1d(1.0);
        let opts = McOptions { samples: 300, master_seed: 17 };
        let run = |workers| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
            pool.install(|| mc_run(&p, &opts)).unwrap()
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a.moments, b.moments);
        assert_eq!(a.energy, b.energy);
        assert_eq!(a.energy_stderr, b.energy_stderr);
    }

    #[test]
    fn accumulator_merge_is_additive() {
        let p = small_1d(1.0);
        let opts = McOptions { samples: 2 * BLOCK_SAMPLES, master_seed: 5 };
        let mut a = run_block(&p, &opts, 0).unwrap();
        let b = run_block(&p, &opts, 1).unwrap();
        a.merge(&b);
        assert_eq!(a.count(), 2 * BLOCK_SAMPLES);
        let r = mc_run(&p, &opts).unwrap();
        let (m, e, _) = a.finalize(&p).unwrap();
        assert_eq!(m, r.moments);
        assert_eq!(e, r.energy);
    }

    #[test]
    fn rejects_empty_runs_and_reports_blowup() {
        let p = small_1d(1.0);
        assert!(mc_run(&p, &McOptions { samples: 0, master_seed: 0 }).is_err());
        let mut wild = small_1d(1e300);
        wild.time = TimeGrid::new(1.0, 20).unwrap();
        let err = mc_run(&wild, &McOptions { samples: 3, master_seed: 0 }).unwrap_err();
        assert!(matches!(err, SolverError::NonFiniteSample { sample: 0, .. }), "{err}");
    }

    #[test]
    fn mean_energy_follows_linear_law() {
        let p = small_1d(1.0);
        let r = mc_run(&p, &McOptions { samples: 2000, master_seed: 8 }).unwrap();
        let phi0 = r.energy.values[0];
        let want = phi0 + 2.0 * 2.0 * PI;
        let got = r.energy.last();
        let se = *r.energy_stderr.last().unwrap();
        assert!((got - want).abs() <= 4.0 * se + 0.02 * want, "{got} vs {want} (se {se})");
    }
}
