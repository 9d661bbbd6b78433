use serde::Serialize;

use super::SolverError;

pub const MIN_CELLS: usize = 4;

/// Uniform periodic grid. Unused axes have one cell of unit spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    dim: usize,
    extent: [f64; 3],
    cells: [usize; 3],
    spacing: [f64; 3],
}

impl GridSpec {
    pub fn new(extent: &[f64], cells: &[usize]) -> Result<Self, SolverError> {
        let dim = extent.len();
        if !(1..=3).contains(&dim) || cells.len() != dim {
            return Err(SolverError::Setup(format!(
                "grid needs matching extents and cells for 1 to 3 axes, got {} and {}",
                extent.len(),
                cells.len()
            )));
        }
        let mut g = Self { dim, extent: [1.0; 3], cells: [1; 3], spacing: [1.0; 3] };
        for axis in 0..dim {
            if !(extent[axis].is_finite() && extent[axis] > 0.0) {
                return Err(SolverError::Setup(format!("axis {axis} extent must be positive")));
            }
            if cells[axis] < MIN_CELLS {
                return Err(SolverError::Setup(format!(
                    "axis {axis} needs at least {MIN_CELLS} cells, got {}",
                    cells[axis]
                )));
            }
            g.extent[axis] = extent[axis];
            g.cells[axis] = cells[axis];
            g.spacing[axis] = extent[axis] / cells[axis] as f64;
        }
        Ok(g)
    }

    /// Same extent and cell count on every axis.
    pub fn uniform(dim: usize, extent: f64, cells: usize) -> Result<Self, SolverError> {
        Self::new(&vec![extent; dim], &vec![cells; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent[..self.dim]
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn points(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    /// `|Theta|`.
    pub fn volume(&self) -> f64 {
        self.extent().iter().product()
    }

    /// Row-major stride of `axis`; the first axis varies slowest.
    pub fn stride(&self, axis: usize) -> usize {
        self.cells[axis + 1..].iter().product()
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut rest = flat;
        for axis in (0..3).rev() {
            out[axis] = rest % self.cells[axis];
            rest /= self.cells[axis];
        }
        out
    }

    /// Coordinates of grid point `flat`; unused axes read 0.
    pub fn coordinates(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = idx[axis] as f64 * self.spacing[axis];
        }
        x
    }
}

/// `t_n = n dt` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
    dt: f64,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self, SolverError> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(SolverError::Setup(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(SolverError::Setup("at least one time step is required".into()));
        }
        Ok(Self { horizon, steps, dt: horizon / steps as f64 })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self, n: usize) -> f64 {
        if n == self.steps {
            self.horizon
        } else {
            n as f64 * self.dt
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|n| self.time(n)).collect()
    }

    /// Step whose time is `t`, if `t` lies on the grid.
    pub fn step_at(&self, t: f64) -> Option<usize> {
        let n = (t / self.dt).round();
        if n < 0.0 || n > self.steps as f64 || (n * self.dt - t).abs() > 1e-9 * self.horizon.max(1.0) {
            return None;
        }
        Some(n as usize)
    }
}
