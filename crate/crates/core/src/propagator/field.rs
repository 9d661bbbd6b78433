use super::{GridSpec, ModelKind};

/// One scalar array per model component over the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    kind: ModelKind,
    grid: GridSpec,
    data: Vec<Vec<f64>>,
}

impl FieldState {
    pub fn zeros(kind: ModelKind, grid: GridSpec) -> Self {
        let data = vec![vec![0.0; grid.points()]; kind.components().len()];
        Self { kind, grid, data }
    }

    /// Samples the model's initial datum at every grid point.
    pub fn initial(kind: ModelKind, grid: GridSpec) -> Self {
        let mut state = Self::zeros(kind, grid);
        for (c, comp) in state.data.iter_mut().enumerate() {
            for (i, v) in comp.iter_mut().enumerate() {
                *v = kind.initial_value(c, grid.coordinates(i));
            }
        }
        state
    }

    pub fn from_components(kind: ModelKind, grid: GridSpec, data: Vec<Vec<f64>>) -> Option<Self> {
        let ok = data.len() == kind.components().len() && data.iter().all(|c| c.len() == grid.points());
        ok.then_some(Self { kind, grid, data })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.data[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.data
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.data
    }

    pub fn is_all_zero(&self) -> bool {
        self.data.iter().flatten().all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn fill(&mut self, value: f64) {
        for comp in &mut self.data {
            comp.fill(value);
        }
    }

    /// `sum_c sum_i u_c(i)^2`, without the cell volume.
    pub fn sum_of_squares(&self) -> f64 {
        self.data.iter().flatten().map(|v| v * v).sum()
    }
}

/// `dst[c] += scale * sum_terms sign * delta_axis src[source]` with periodic wrap.
pub(crate) fn accumulate_operator(
    kind: ModelKind,
    grid: &GridSpec,
    src: &[Vec<f64>],
    dst: &mut [Vec<f64>],
    scale: f64,
) {
    for (c, terms) in kind.stencil().iter().enumerate() {
        for t in terms.iter() {
            let coef = scale * t.sign / (2.0 * grid.spacing()[t.axis]);
            accumulate_central_difference(&src[t.source], &mut dst[c], grid.cells()[t.axis], grid.stride(t.axis), coef);
        }
    }
}

/// `dst[i] += coef * (src[i + stride] - src[i - stride])` along one periodic axis
/// of length `n`.
fn accumulate_central_difference(src: &[f64], dst: &mut [f64], n: usize, stride: usize, coef: f64) {
    let block = n * stride;
    if stride == 1 {
        for (d, s) in dst.chunks_exact_mut(block).zip(src.chunks_exact(block)) {
            d[0] += coef * (s[1] - s[n - 1]);
            for ((o, p), m) in d[1..n - 1].iter_mut().zip(&s[2..]).zip(&s[..n - 2]) {
                *o += coef * (p - m);
            }
            d[n - 1] += coef * (s[0] - s[n - 2]);
        }
        return;
    }
    for (d, s) in dst.chunks_exact_mut(block).zip(src.chunks_exact(block)) {
        for i in 0..n {
            let ip = if i + 1 == n { 0 } else { i + 1 };
            let im = if i == 0 { n - 1 } else { i - 1 };
            let out = &mut d[i * stride..(i + 1) * stride];
            let plus = &s[ip * stride..(ip + 1) * stride];
            let minus = &s[im * stride..(im + 1) * stride];
            for ((o, p), m) in out.iter_mut().zip(plus).zip(minus) {
                *o += coef * (p - m);
            }
        }
    }
}

/// One forward-Euler step: `dst = src + shift + dt * A src`.
pub(crate) fn explicit_update(
    kind: ModelKind,
    grid: &GridSpec,
    src: &[Vec<f64>],
    dst: &mut [Vec<f64>],
    dt: f64,
    shifts: &[f64],
) {
    for ((d, s), &shift) in dst.iter_mut().zip(src).zip(shifts) {
        if shift == 0.0 {
            d.copy_from_slice(s);
        } else {
            for (o, v) in d.iter_mut().zip(s) {
                *o = v + shift;
            }
        }
    }
    accumulate_operator(kind, grid, src, dst, dt);
}
