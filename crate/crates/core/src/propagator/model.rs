use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// `E1, H1` on `[0, 2pi]`.
    #[serde(rename = "1d")]
    Maxwell1d,
    /// Transverse-magnetic `E3, H1, H2` on `[0, 2pi]^2`.
    #[serde(rename = "2d")]
    Maxwell2dTm,
    /// Full `E, H` on `[0, 1]^3`.
    #[serde(rename = "3d")]
    Maxwell3d,
}

impl ModelKind {
    pub fn dim(self) -> usize {
        match self {
            ModelKind::Maxwell1d => 1,
            ModelKind::Maxwell2dTm => 2,
            ModelKind::Maxwell3d => 3,
        }
    }

    pub fn components(self) -> &'static [&'static str] {
        match self {
            ModelKind::Maxwell1d => &["E1", "H1"],
            ModelKind::Maxwell2dTm => &["E3", "H1", "H2"],
            ModelKind::Maxwell3d => &["E1", "E2", "E3", "H1", "H2", "H3"],
        }
    }

    /// Per-axis domain length of the reference experiments.
    pub fn default_extent(self) -> f64 {
        match self {
            ModelKind::Maxwell1d | ModelKind::Maxwell2dTm => 2.0 * PI,
            ModelKind::Maxwell3d => 1.0,
        }
    }

    /// For each component, the signed central differences feeding its time derivative.
    pub fn stencil(self) -> &'static [&'static [StencilTerm]] {
        match self {
            ModelKind::Maxwell1d => STENCIL_1D,
            ModelKind::Maxwell2dTm => STENCIL_2D,
            ModelKind::Maxwell3d => STENCIL_3D,
        }
    }

    /// Initial datum of `component` at `x`.
    pub fn initial_value(self, component: usize, x: [f64; 3]) -> f64 {
        let [x, y, z] = x;
        match self {
            ModelKind::Maxwell1d => match component {
                0 => x.sin() + x.cos(),
                _ => x.sin() - x.cos(),
            },
            ModelKind::Maxwell2dTm => match component {
                0 => x.sin() - y.cos(),
                1 => y.cos(),
                _ => x.sin(),
            },
            ModelKind::Maxwell3d => {
                let (sx, cx) = (PI * x).sin_cos();
                let (sy, cy) = (2.0 * PI * y).sin_cos();
                let (sz, cz) = (-3.0 * PI * z).sin_cos();
                let r14 = 14f64.sqrt();
                match component {
                    0 => 5.0 / r14 * cx * sy * sz,
                    1 => -4.0 / r14 * sx * cy * sz,
                    2 => -1.0 / r14 * sx * sy * sz,
                    3 => sx * cy * cz,
                    4 => cx * sy * cz,
                    _ => cx * cy * sz,
                }
            }
        }
    }
}

/// `d_t u_component += sign * delta_axis u_source`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilTerm {
    pub source: usize,
    pub axis: usize,
    pub sign: f64,
}

const fn term(source: usize, axis: usize, sign: f64) -> StencilTerm {
    StencilTerm { source, axis, sign }
}

// d_t E1 = -d_x H1, d_t H1 = -d_x E1
const STENCIL_1D: &[&[StencilTerm]] = &[&[term(1, 0, -1.0)], &[term(0, 0, -1.0)]];

// d_t E3 = d_x H2 - d_y H1, d_t H1 = -d_y E3, d_t H2 = d_x E3
const STENCIL_2D: &[&[StencilTerm]] = &[&[term(2, 0, 1.0), term(1, 1, -1.0)], &[term(0, 1, -1.0)], &[term(0, 0, 1.0)]];

// d_t E = curl H, d_t H = -curl E; components E1 E2 E3 H1 H2 H3
const STENCIL_3D: &[&[StencilTerm]] = &[
    &[term(5, 1, 1.0), term(4, 2, -1.0)],
    &[term(3, 2, 1.0), term(5, 0, -1.0)],
    &[term(4, 0, 1.0), term(3, 1, -1.0)],
    &[term(1, 2, 1.0), term(2, 1, -1.0)],
    &[term(2, 0, 1.0), term(0, 2, -1.0)],
    &[term(0, 1, 1.0), term(1, 0, -1.0)],
];

/// Additive forcing `sign * sigma[sigma_index] * dW_wiener` on one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseChannel {
    pub wiener: u32,
    pub sign: f64,
    pub sigma_index: usize,
}

/// A model system together with its noise layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelVariant {
    kind: ModelKind,
    noise: Vec<Vec<NoiseChannel>>,
    num_sigmas: usize,
}

impl ModelVariant {
    /// `d_t E1 = -d_x H1 - sigma dW`, `d_t H1 = -d_x E1 + sigma dW`.
    pub fn maxwell_1d() -> Self {
        Self::single_noise(ModelKind::Maxwell1d, &[-1.0, 1.0])
    }

    /// All three components forced by `+sigma dW`.
    pub fn maxwell_2d_tm() -> Self {
        Self::single_noise(ModelKind::Maxwell2dTm, &[1.0; 3])
    }

    /// `sigma e dW` on both `E` and `H` with one shared Wiener process.
    pub fn maxwell_3d() -> Self {
        Self::single_noise(ModelKind::Maxwell3d, &[1.0; 6])
    }

    /// `sigma1 e dW1` on `E` and `sigma2 e dW2` on `H`.
    pub fn maxwell_3d_two_noise() -> Self {
        let noise = (0..6)
            .map(|c| {
                let (wiener, sigma_index) = if c < 3 { (1, 0) } else { (2, 1) };
                vec![NoiseChannel { wiener, sign: 1.0, sigma_index }]
            })
            .collect();
        Self { kind: ModelKind::Maxwell3d, noise, num_sigmas: 2 }
    }

    fn single_noise(kind: ModelKind, signs: &[f64]) -> Self {
        let noise = signs.iter().map(|&sign| vec![NoiseChannel { wiener: 1, sign, sigma_index: 0 }]).collect();
        Self { kind, noise, num_sigmas: 1 }
    }

    pub fn for_kind(kind: ModelKind, two_noise: bool) -> Result<Self, SolverError> {
        match (kind, two_noise) {
            (ModelKind::Maxwell1d, false) => Ok(Self::maxwell_1d()),
            (ModelKind::Maxwell2dTm, false) => Ok(Self::maxwell_2d_tm()),
            (ModelKind::Maxwell3d, false) => Ok(Self::maxwell_3d()),
            (ModelKind::Maxwell3d, true) => Ok(Self::maxwell_3d_two_noise()),
            (kind, true) => {
                Err(SolverError::Setup(format!("two-noise forcing is only defined for the 3d model, not {kind:?}")))
            }
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn components(&self) -> &'static [&'static str] {
        self.kind.components()
    }

    pub fn num_components(&self) -> usize {
        self.kind.components().len()
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components().iter().position(|c| *c == name)
    }

    pub fn noise(&self, component: usize) -> &[NoiseChannel] {
        &self.noise[component]
    }

    /// Number of independent Wiener processes `K`.
    pub fn num_wiener(&self) -> u32 {
        self.noise.iter().flatten().map(|ch| ch.wiener).max().unwrap_or(1)
    }

    /// Number of noise amplitudes the model expects.
    pub fn num_sigmas(&self) -> usize {
        self.num_sigmas
    }

    /// Per-component noise variance rate `sum_channels sigma^2`.
    pub fn noise_variance_rate(&self, sigmas: &[f64]) -> f64 {
        self.noise.iter().flatten().map(|ch| sigmas[ch.sigma_index].powi(2)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_data_spot_values() {
        let m = ModelKind::Maxwell1d;
        assert!((m.initial_value(0, [0.0; 3]) - 1.0).abs() < 1e-15);
        assert!((m.initial_value(1, [0.0; 3]) + 1.0).abs() < 1e-15);
        assert_eq!(ModelKind::Maxwell3d.initial_value(0, [0.0; 3]), 0.0);
        assert!((ModelKind::Maxwell2dTm.initial_value(0, [0.0; 3]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn stencils_are_skew() {
        // central differences are skew, so each (c <- s along axis, sign) needs a
        // partner (s <- c along axis) with the same sign
        for kind in [ModelKind::Maxwell1d, ModelKind::Maxwell2dTm, ModelKind::Maxwell3d] {
            let st = kind.stencil();
            assert_eq!(st.len(), kind.components().len());
            for (c, terms) in st.iter().enumerate() {
                for t in terms.iter() {
                    assert!(t.axis < kind.dim());
                    let back =
                        st[t.source].iter().find(|b| b.source == c && b.axis == t.axis).expect("missing partner term");
                    assert_eq!(back.sign, t.sign, "{kind:?} component {c}");
                }
            }
        }
    }

    #[test]
    fn noise_layouts() {
        assert_eq!(ModelVariant::maxwell_1d().noise_variance_rate(&[1.0]), 2.0);
        assert_eq!(ModelVariant::maxwell_2d_tm().noise_variance_rate(&[2.0]), 12.0);
        assert_eq!(ModelVariant::maxwell_3d().noise_variance_rate(&[1.0]), 6.0);
        let two = ModelVariant::maxwell_3d_two_noise();
        assert_eq!(two.num_wiener(), 2);
        assert_eq!(two.noise_variance_rate(&[1.0, 1.0]), 6.0);
        assert!(ModelVariant::for_kind(ModelKind::Maxwell1d, true).is_err());
    }
}
