//! Experiment configuration (JSON) with defaults and validation.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use obstacle_core::{DirichletData, GridSpec, LateralBoundary};

use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataConfig {
    Constant { value: f64 },
    SignoriniExact { amplitude: f64 },
    PositiveBump { amplitude: f64, width: f64 },
}

impl DataConfig {
    pub fn to_data(self) -> DirichletData<f64> {
        match self {
            Self::Constant { value } => DirichletData::Constant(value),
            Self::SignoriniExact { amplitude } => DirichletData::SignoriniExact { amplitude },
            Self::PositiveBump { amplitude, width } => DirichletData::PositiveBump { amplitude, width },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LateralMode {
    #[default]
    Dirichlet,
    Reflecting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Residual tolerance of the penalized solver, in flux units.
    pub tol: f64,
    pub max_iterations: usize,
    /// Tolerance and sweep budget of the zero-penalty solver.
    pub limit_tol: f64,
    pub limit_max_sweeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iterations: 200,
            limit_tol: 1e-9,
            limit_max_sweeps: 500_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Slack allowed in the invariant checks.
    pub tol: f64,
    /// Increments of the semiconvexity quotients, in grid spacings.
    pub quotient_steps: Vec<usize>,
    /// Lateral margin of the flat region for seminorms; `L / 2` when absent.
    pub holder_margin: Option<f64>,
    /// Smallest pair separation in grid spacings.
    pub min_separation: usize,
    pub free_boundary_level: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            quotient_steps: vec![1, 2, 4],
            holder_margin: None,
            min_separation: 2,
            free_boundary_level: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    /// Nodes per angular axis, one table row each; a per-dimension ladder when empty.
    pub resolutions: Vec<usize>,
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            resolutions: Vec::new(),
            tol: 1e-10,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    /// Nodes per unit length.
    pub resolution: usize,
    pub tangential_extent: f64,
    pub normal_extent: f64,
    pub lateral: LateralMode,
    /// Penalty parameter of single-solve subcommands.
    pub epsilon: f64,
    /// Strictly decreasing penalty parameters of `sweep` and `verify`.
    pub epsilon_list: Vec<f64>,
    pub dirichlet: DataConfig,
    pub solver: SolverConfig,
    pub estimator: EstimatorConfig,
    /// Radii of `phi-trace`; geometric from `8h` to `0.4 L` when absent.
    pub radii: Option<Vec<f64>>,
    pub phi_radii_count: usize,
    /// Radii of the growth fit; geometric from `8h` when absent.
    pub growth_radii: Option<Vec<f64>>,
    /// Hölder exponents reported by `sweep` on top of 1/2 and 3/4.
    pub alpha_list: Vec<f64>,
    /// Reference point on the flat face; the closest free-boundary point is used.
    pub center: [f64; 2],
    /// Compare every sweep entry with the zero-penalty solution.
    pub compare_limit: bool,
    pub seed: u64,
    pub output_dir: Option<String>,
    pub spectrum: SpectrumConfig,
    /// Record wall-clock times (makes reports machine-dependent).
    pub timings: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dimension: 2,
            resolution: 64,
            tangential_extent: 1.0,
            normal_extent: 1.0,
            lateral: LateralMode::Dirichlet,
            epsilon: 1e-3,
            epsilon_list: vec![1e-2, 1e-3, 1e-4, 1e-5],
            dirichlet: DataConfig::PositiveBump {
                amplitude: 1.0,
                width: 0.4,
            },
            solver: SolverConfig::default(),
            estimator: EstimatorConfig::default(),
            radii: None,
            phi_radii_count: 12,
            growth_radii: None,
            alpha_list: Vec::new(),
            center: [0.0, 0.0],
            compare_limit: true,
            seed: 1,
            output_dir: None,
            spectrum: SpectrumConfig::default(),
            timings: false,
        }
    }
}

fn invalid(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if self.dimension != 2 && self.dimension != 3 {
            return Err(invalid(format!("dimension {} not in {{2, 3}}", self.dimension)));
        }
        self.grid_spec().node_counts().map_err(|e| invalid(e.to_string()))?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid(format!("epsilon {} must be positive", self.epsilon)));
        }
        if self.epsilon_list.is_empty() {
            return Err(invalid("epsilon_list is empty"));
        }
        if self.epsilon_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(invalid("epsilon_list entries must be positive"));
        }
        if self.epsilon_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("epsilon_list must be strictly decreasing"));
        }
        self.data().validate().map_err(|e| invalid(e.to_string()))?;
        if !(self.solver.tol > 0.0) || !(self.solver.limit_tol > 0.0) || !(self.estimator.tol >= 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        if self.estimator.quotient_steps.is_empty() || self.estimator.quotient_steps.contains(&0) {
            return Err(invalid("quotient_steps must be positive multiples of h"));
        }
        if self.estimator.min_separation < 2 {
            return Err(invalid("min_separation must be at least 2 grid spacings"));
        }
        if let Some(m) = self.estimator.holder_margin {
            if !(0.0..self.tangential_extent).contains(&m) {
                return Err(invalid(format!("holder_margin {m} outside [0, L)")));
            }
        }
        let h = 1.0 / self.resolution as f64;
        let l = self.tangential_extent;
        for (name, radii) in [("radii", &self.radii), ("growth_radii", &self.growth_radii)] {
            if let Some(r) = radii {
                if r.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid(format!("{name} must be strictly increasing")));
                }
                if r.iter().any(|&x| x < 4.0 * h * (1.0 - 1e-9) || x > l.min(self.normal_extent) + 1e-12) {
                    return Err(invalid(format!("{name} must lie in [4h, min(L, H)]")));
                }
            }
        }
        if self.phi_radii_count < 2 {
            return Err(invalid("phi_radii_count must be at least 2"));
        }
        if self.alpha_list.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
            return Err(invalid("alpha_list entries must lie in (0, 1]"));
        }
        if self.center.iter().any(|c| c.abs() >= l) {
            return Err(invalid("center must lie inside the flat face"));
        }
        if self.spectrum.resolutions.iter().any(|&n| n < 32) || !(self.spectrum.tol > 0.0) {
            return Err(invalid("spectrum resolutions must be at least 32 with a positive tolerance"));
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> GridSpec<f64> {
        let lateral = match self.lateral {
            LateralMode::Dirichlet => LateralBoundary::Dirichlet,
            LateralMode::Reflecting => LateralBoundary::Reflecting,
        };
        GridSpec::new(self.dimension, self.resolution)
            .with_extents(self.tangential_extent, self.normal_extent)
            .with_lateral(lateral)
    }

    pub fn data(&self) -> DirichletData<f64> {
        self.dirichlet.to_data()
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn holder_margin(&self) -> f64 {
        self.estimator.holder_margin.unwrap_or(self.tangential_extent / 2.0)
    }

    /// Radii of `phi-trace`.
    pub fn phi_radii(&self) -> Vec<f64> {
        if let Some(r) = &self.radii {
            return r.clone();
        }
        let lo = 8.0 * self.spacing();
        let hi = 0.4 * self.tangential_extent.min(self.normal_extent);
        let n = self.phi_radii_count;
        (0..n)
            .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
            .collect()
    }

    /// Radii of the growth fit about `center`: six geometric steps from
    /// `8h` to half the distance to the lateral faces.
    pub fn fit_radii(&self, center: [f64; 2]) -> Vec<f64> {
        if let Some(r) = &self.growth_radii {
            return r.clone();
        }
        let lo = 8.0 * self.spacing();
        let hi = 0.5 * (self.tangential_extent - center[0].abs().max(center[1].abs()));
        if hi <= lo {
            return vec![lo];
        }
        (0..6).map(|k| lo * (hi / lo).powf(k as f64 / 5.0)).collect()
    }

    /// Hash of the configuration with the output location removed.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = None;
        let text = serde_json::to_string(&canonical).expect("configuration serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
