use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::monte_carlo::McOptions;
use crate::propagator::{GridSpec, ModelKind, ModelVariant, Problem, TimeGrid, WceOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Wce,
    Mc,
    Both,
}

impl Mode {
    pub fn runs_wce(self) -> bool {
        matches!(self, Mode::Wce | Mode::Both)
    }

    pub fn runs_mc(self) -> bool {
        matches!(self, Mode::Mc | Mode::Both)
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wce" => Ok(Mode::Wce),
            "mc" => Ok(Mode::Mc),
            "both" => Ok(Mode::Both),
            other => Err(format!("unknown mode `{other}` (expected wce, mc or both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceAxis {
    X,
    Y,
    Z,
}

impl SliceAxis {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["x", "y", "z"][self.index()]
    }
}

/// The flat key/value document as written by users. Every key but `model` is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wce_order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wce_basis: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub short_circuit: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_scan: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slice: Option<Vec<SliceAxis>>,
}

/// A validated experiment with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub cells: usize,
    pub horizon: f64,
    pub steps: usize,
    /// One amplitude, or `[sigma1, sigma2]` for the two-noise 3d system.
    pub sigmas: Vec<f64>,
    pub two_noise: bool,
    pub wce: WceOptions,
    pub mc: McOptions,
    pub mode: Mode,
    pub sigma_scan: Vec<f64>,
    pub output: PathBuf,
    pub snapshot_times: Vec<f64>,
    /// Worker threads; 0 lets the thread pool decide.
    pub workers: usize,
    pub slice: Vec<SliceAxis>,
}

struct Defaults {
    cells: usize,
    wce_order: u32,
    wce_basis: u32,
    mc_samples: u64,
}

fn defaults(model: ModelKind) -> Defaults {
    match model {
        ModelKind::Maxwell1d => Defaults { cells: 200, wce_order: 20, wce_basis: 2, mc_samples: 20000 },
        ModelKind::Maxwell2dTm => Defaults { cells: 60, wce_order: 20, wce_basis: 3, mc_samples: 10000 },
        ModelKind::Maxwell3d => Defaults { cells: 50, wce_order: 12, wce_basis: 2, mc_samples: 1000 },
    }
}

pub const DEFAULT_HORIZON: f64 = 1.0;
pub const DEFAULT_STEPS: usize = 1000;
pub const DEFAULT_SEED: u64 = 20240601;
pub const MAX_TRUNCATION_SIZE: usize = 1_000_000;

fn bad(key: &str, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(format!("`{key}`: {msg}"))
}

fn check_sigma(key: &str, v: f64) -> Result<f64, HarnessError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(bad(key, format!("must be finite and nonnegative, got {v}")))
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let doc: ConfigDocument = toml::from_str(text).map_err(|e| HarnessError::Config(e.message().to_string()))?;
    ExperimentConfig::from_document(doc)
}

impl ExperimentConfig {
    pub fn from_document(doc: ConfigDocument) -> Result<Self, HarnessError> {
        let model = doc.model.ok_or_else(|| bad("model", "missing required key (1d, 2d or 3d)"))?;
        let d = defaults(model);

        let cells = doc.cells.unwrap_or(d.cells);
        if cells < crate::propagator::MIN_CELLS {
            return Err(bad("cells", format!("must be at least {}", crate::propagator::MIN_CELLS)));
        }
        let horizon = doc.horizon.unwrap_or(DEFAULT_HORIZON);
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(bad("horizon", "must be positive"));
        }
        let steps = doc.steps.unwrap_or(DEFAULT_STEPS);
        if steps == 0 {
            return Err(bad("steps", "must be positive"));
        }

        let two_noise = doc.sigma1.is_some() || doc.sigma2.is_some();
        let sigmas = if two_noise {
            if model != ModelKind::Maxwell3d {
                return Err(bad("sigma1", "separate E/H amplitudes are only available for model 3d"));
            }
            if doc.sigma.is_some() {
                return Err(bad("sigma", "give either sigma or sigma1/sigma2, not both"));
            }
            let s1 = doc.sigma1.ok_or_else(|| bad("sigma1", "required together with sigma2"))?;
            let s2 = doc.sigma2.ok_or_else(|| bad("sigma2", "required together with sigma1"))?;
            vec![check_sigma("sigma1", s1)?, check_sigma("sigma2", s2)?]
        } else {
            vec![check_sigma("sigma", doc.sigma.unwrap_or(1.0))?]
        };

        let max_order = doc.wce_order.unwrap_or(d.wce_order);
        let max_basis = doc.wce_basis.unwrap_or(d.wce_basis);
        if max_basis == 0 {
            return Err(bad("wce_basis", "must be positive"));
        }
        let num_wiener = if two_noise { 2 } else { 1 };
        let count = crate::chaos::truncation_count(num_wiener * max_basis as u64, max_order as u64);
        if count.is_none_or(|n| n > MAX_TRUNCATION_SIZE) {
            return Err(bad("wce_order", format!("truncation set exceeds {MAX_TRUNCATION_SIZE} members")));
        }
        let mode = doc.mode.unwrap_or(Mode::Both);
        let samples = doc.mc_samples.unwrap_or(d.mc_samples);
        if samples == 0 {
            return Err(bad("mc_samples", "must be positive"));
        }
        if mode == Mode::Both && samples < 2 {
            return Err(bad("mc_samples", "mode both needs at least 2 samples"));
        }

        let sigma_scan = doc.sigma_scan.unwrap_or_default();
        for &s in &sigma_scan {
            check_sigma("sigma_scan", s)?;
        }

        let time = TimeGrid::new(horizon, steps).map_err(|e| bad("steps", e))?;
        let mut snapshot_times = doc.snapshot_times.unwrap_or_default();
        for &t in &snapshot_times {
            if time.step_at(t).is_none() {
                return Err(bad("snapshot_times", format!("{t} is not on the time grid of step {}", time.dt())));
            }
        }
        snapshot_times.sort_by(f64::total_cmp);
        snapshot_times.dedup();

        let mut slice = doc.slice.unwrap_or_default();
        slice.sort();
        slice.dedup();
        if let Some(axis) = slice.iter().find(|a| a.index() >= model.dim()) {
            return Err(bad("slice", format!("axis {} does not exist for model {model:?}", axis.name())));
        }

        Ok(Self {
            model,
            cells,
            horizon,
            steps,
            sigmas,
            two_noise,
            wce: WceOptions { max_order, max_basis, short_circuit: doc.short_circuit.unwrap_or(true) },
            mc: McOptions { samples, master_seed: doc.mc_seed.unwrap_or(DEFAULT_SEED) },
            mode,
            sigma_scan,
            output: doc.output.unwrap_or_else(|| PathBuf::from("out")),
            snapshot_times,
            workers: doc.workers.unwrap_or(0),
            slice,
        })
    }

    /// Fully explicit document; parsing it yields an equal config.
    pub fn to_document(&self) -> ConfigDocument {
        let (sigma, sigma1, sigma2) = if self.two_noise {
            (None, Some(self.sigmas[0]), Some(self.sigmas[1]))
        } else {
            (Some(self.sigmas[0]), None, None)
        };
        ConfigDocument {
            model: Some(self.model),
            cells: Some(self.cells),
            horizon: Some(self.horizon),
            steps: Some(self.steps),
            sigma,
            sigma1,
            sigma2,
            wce_order: Some(self.wce.max_order),
            wce_basis: Some(self.wce.max_basis),
            short_circuit: Some(self.wce.short_circuit),
            mc_samples: Some(self.mc.samples),
            mc_seed: Some(self.mc.master_seed),
            mode: Some(self.mode),
            sigma_scan: Some(self.sigma_scan.clone()),
            output: Some(self.output.clone()),
            snapshot_times: Some(self.snapshot_times.clone()),
            workers: Some(self.workers),
            slice: Some(self.slice.clone()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_document()).expect("config document is serializable")
    }

    pub fn model_variant(&self) -> ModelVariant {
        ModelVariant::for_kind(self.model, self.two_noise).expect("validated at parse time")
    }

    pub fn time_grid(&self) -> TimeGrid {
        TimeGrid::new(self.horizon, self.steps).expect("validated at parse time")
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::uniform(self.model.dim(), self.model.default_extent(), self.cells).expect("validated at parse time")
    }

    /// The discretized problem at noise amplitudes `sigmas`.
    pub fn problem_with(&self, sigmas: Vec<f64>) -> Result<Problem, HarnessError> {
        let time = self.time_grid();
        let steps = self.snapshot_times.iter().map(|&t| time.step_at(t).expect("validated")).collect();
        Problem::new(self.model_variant(), self.grid(), time, sigmas)
            .and_then(|p| p.with_snapshots(steps))
            .map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn problem(&self) -> Result<Problem, HarnessError> {
        self.problem_with(self.sigmas.clone())
    }

    /// Components compared between estimators.
    pub fn primary_components(&self) -> &'static [&'static str] {
        match self.model {
            ModelKind::Maxwell1d => &["E1", "H1"],
            ModelKind::Maxwell2dTm => &["E3"],
            ModelKind::Maxwell3d => &["E1"],
        }
    }
}
