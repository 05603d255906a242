//! JSON run configuration. Every key is optional; missing keys take the
//! default platform, controller and filter values. Angles are in degrees
//! here and in radians everywhere else.

use std::path::Path;

use nalgebra::{Matrix3, SVector, Vector3, Vector6};
use serde::{Deserialize, Serialize};
use stewart_core::control::Matrix12;
use stewart_core::geometry::JointLayout;
use stewart_core::sim::{CONTROL_PERIOD, DEFAULT_SUBSTEPS};
use stewart_core::{
    Discretization, LqrWeights, NoiseCovariances, PlatformGeometry, RigidBodyParams, ScenarioKind, ScenarioSpec,
    SensorNoiseSpec, SimSettings,
};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed config {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid value for {key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub geometry: GeometryConfig,
    pub mass: MassConfig,
    pub controller: ControllerConfig,
    pub ekf: EkfConfig,
    pub noise: NoiseConfig,
    pub run: RunConfig,
}

/// Joint rings. Each base pair center `c_k` holds joints at `c_k ∓ offset`;
/// platform pair centers are conventionally `c_k + 60`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    /// m
    pub base_radius: f64,
    /// m
    pub platform_radius: f64,
    pub base_pair_centers_deg: [f64; 3],
    pub platform_pair_centers_deg: [f64; 3],
    pub pair_half_offset_deg: f64,
    /// Control point in the platform frame, m.
    pub control_point: [f64; 3],
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            base_radius: 0.20,
            platform_radius: 0.16,
            base_pair_centers_deg: [0.0, 120.0, 240.0],
            platform_pair_centers_deg: [60.0, 180.0, 300.0],
            pair_half_offset_deg: 20.0,
            control_point: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MassConfig {
    /// kg
    pub platform_mass: f64,
    /// Row-major, kg·m².
    pub platform_inertia: [[f64; 3]; 3],
    /// kg
    pub top_mass: f64,
    /// kg
    pub bottom_mass: f64,
    /// m
    pub top_com: f64,
    /// m
    pub bottom_com: f64,
    /// m/s²
    pub gravity: [f64; 3],
}

impl Default for MassConfig {
    fn default() -> Self {
        MassConfig {
            platform_mass: 0.528,
            platform_inertia: [[0.03, 0.01, 0.01], [0.01, 0.03, 0.01], [0.01, 0.01, 0.02]],
            top_mass: 0.027,
            bottom_mass: 0.1187,
            top_com: 0.1,
            bottom_com: 0.13861,
            gravity: [0.0, 0.0, -9.81],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerConfig {
    /// Diagonal of `N`: six pose weights then six velocity weights.
    pub state_weights: [f64; 12],
    /// Diagonal of `O`.
    pub input_weights: [f64; 6],
    /// Symmetric actuator force clamp, N. Absent means unlimited.
    pub force_limit: Option<f64>,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        let w = LqrWeights::default();
        let mut state_weights = [0.0; 12];
        state_weights.copy_from_slice(w.state.as_slice());
        let mut input_weights = [0.0; 6];
        input_weights.copy_from_slice(w.input.as_slice());
        ControllerConfig {
            state_weights,
            input_weights,
            force_limit: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscretizationName {
    ForwardEuler,
    ZeroOrderHold,
}

impl From<DiscretizationName> for Discretization {
    fn from(d: DiscretizationName) -> Self {
        match d {
            DiscretizationName::ForwardEuler => Discretization::ForwardEuler,
            DiscretizationName::ZeroOrderHold => Discretization::ZeroOrderHold,
        }
    }
}

/// Filter covariances by role: `predict_cov` is added to `P` in every
/// prediction, `innov_cov` to `Γ P Γᵀ` in every update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EkfConfig {
    pub predict_cov: [f64; 12],
    pub innov_cov: [f64; 12],
    pub initial_cov: [f64; 12],
    pub discretization: DiscretizationName,
}

fn diagonal(m: &Matrix12) -> [f64; 12] {
    let mut d = [0.0; 12];
    for (i, v) in d.iter_mut().enumerate() {
        *v = m[(i, i)];
    }
    d
}

impl Default for EkfConfig {
    fn default() -> Self {
        let c = NoiseCovariances::default();
        EkfConfig {
            predict_cov: diagonal(&c.predict),
            innov_cov: diagonal(&c.innovation),
            initial_cov: diagonal(&c.initial),
            discretization: DiscretizationName::ForwardEuler,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// m
    pub leg_sigma: f64,
    /// rad
    pub angle_sigma: f64,
    /// rad/s
    pub rate_sigma: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let n = SensorNoiseSpec::default();
        NoiseConfig {
            leg_sigma: n.leg_sigma,
            angle_sigma: n.angle_sigma,
            rate_sigma: n.rate_sigma,
            seed: n.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    Step,
    Sinusoid,
}

impl From<ScenarioName> for ScenarioKind {
    fn from(s: ScenarioName) -> Self {
        match s {
            ScenarioName::Step => ScenarioKind::Step,
            ScenarioName::Sinusoid => ScenarioKind::Sinusoid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scenario: ScenarioName,
    /// s. Absent means 60 s for the step scenario and 20 s for the sinusoid.
    pub duration: Option<f64>,
    /// Control period, s.
    pub dt: f64,
    /// RK4 steps per control period.
    pub substeps: usize,
    pub perfect_state: bool,
    pub literal_reference: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: ScenarioName::Step,
            duration: None,
            dt: CONTROL_PERIOD,
            substeps: DEFAULT_SUBSTEPS,
            perfect_state: false,
            literal_reference: false,
        }
    }
}

fn check_positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive and finite, got {v}")))
    }
}

fn check_non_negative(key: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be non-negative and finite, got {v}")))
    }
}

fn check_finite(key: &str, v: &[f64]) -> Result<(), ConfigError> {
    match v.iter().find(|x| !x.is_finite()) {
        Some(x) => Err(invalid(key, format!("must be finite, got {x}"))),
        None => Ok(()),
    }
}

impl SimConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        let config: SimConfig = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: SimConfig = serde_json::from_str(text).map_err(|source| ConfigError::Parse {
            path: "<string>".into(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical pretty-printed form with every key present.
    pub fn dump(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.geometry;
        check_positive("geometry.base_radius", g.base_radius)?;
        check_positive("geometry.platform_radius", g.platform_radius)?;
        check_finite("geometry.base_pair_centers_deg", &g.base_pair_centers_deg)?;
        check_finite("geometry.platform_pair_centers_deg", &g.platform_pair_centers_deg)?;
        check_finite("geometry.control_point", &g.control_point)?;
        if !(g.pair_half_offset_deg > 0.0 && g.pair_half_offset_deg < 60.0) {
            return Err(invalid(
                "geometry.pair_half_offset_deg",
                format!("must lie in (0, 60), got {}", g.pair_half_offset_deg),
            ));
        }

        let m = &self.mass;
        check_positive("mass.platform_mass", m.platform_mass)?;
        check_positive("mass.top_mass", m.top_mass)?;
        check_positive("mass.bottom_mass", m.bottom_mass)?;
        check_non_negative("mass.top_com", m.top_com)?;
        check_non_negative("mass.bottom_com", m.bottom_com)?;
        check_finite("mass.gravity", &m.gravity)?;
        check_finite("mass.platform_inertia", m.platform_inertia.as_flattened())?;
        let inertia = self.platform_inertia();
        if (inertia - inertia.transpose()).amax() > 1e-12 {
            return Err(invalid("mass.platform_inertia", "must be symmetric"));
        }
        if inertia.symmetric_eigenvalues().min() <= 0.0 {
            return Err(invalid("mass.platform_inertia", "must be positive definite"));
        }

        let c = &self.controller;
        for (i, &w) in c.state_weights.iter().enumerate() {
            if i < 6 {
                check_positive(&format!("controller.state_weights[{i}]"), w)?;
            } else {
                check_non_negative(&format!("controller.state_weights[{i}]"), w)?;
            }
        }
        for (i, &w) in c.input_weights.iter().enumerate() {
            check_positive(&format!("controller.input_weights[{i}]"), w)?;
        }
        if let Some(limit) = c.force_limit {
            check_positive("controller.force_limit", limit)?;
        }

        let e = &self.ekf;
        for (i, &v) in e.predict_cov.iter().enumerate() {
            check_non_negative(&format!("ekf.predict_cov[{i}]"), v)?;
        }
        for (i, &v) in e.innov_cov.iter().enumerate() {
            check_positive(&format!("ekf.innov_cov[{i}]"), v)?;
        }
        for (i, &v) in e.initial_cov.iter().enumerate() {
            check_non_negative(&format!("ekf.initial_cov[{i}]"), v)?;
        }

        let n = &self.noise;
        check_non_negative("noise.leg_sigma", n.leg_sigma)?;
        check_non_negative("noise.angle_sigma", n.angle_sigma)?;
        check_non_negative("noise.rate_sigma", n.rate_sigma)?;

        let r = &self.run;
        check_positive("run.dt", r.dt)?;
        if let Some(d) = r.duration {
            check_positive("run.duration", d)?;
        }
        if r.substeps == 0 {
            return Err(invalid("run.substeps", "must be at least 1"));
        }
        self.scenario().steps().map_err(|e| invalid("run.dt", e.to_string()))?;
        self.geometry().map_err(|e| invalid("geometry", e.to_string()))?;
        Ok(())
    }

    fn platform_inertia(&self) -> Matrix3<f64> {
        let i = &self.mass.platform_inertia;
        Matrix3::from_fn(|r, c| i[r][c])
    }

    pub fn geometry(&self) -> stewart_core::Result<PlatformGeometry> {
        let g = &self.geometry;
        let layout = JointLayout {
            base_radius: g.base_radius,
            platform_radius: g.platform_radius,
            base_pair_centers: g.base_pair_centers_deg.map(f64::to_radians),
            platform_pair_centers: g.platform_pair_centers_deg.map(f64::to_radians),
            pair_half_offset: g.pair_half_offset_deg.to_radians(),
        };
        PlatformGeometry::from_layout(layout, Vector3::from(g.control_point))
    }

    pub fn params(&self) -> RigidBodyParams {
        let m = &self.mass;
        RigidBodyParams {
            platform_mass: m.platform_mass,
            platform_inertia: self.platform_inertia(),
            top_mass: m.top_mass,
            bottom_mass: m.bottom_mass,
            top_com: m.top_com,
            bottom_com: m.bottom_com,
            gravity: Vector3::from(m.gravity),
        }
    }

    pub fn scenario(&self) -> ScenarioSpec {
        let mut spec = ScenarioSpec::new(self.run.scenario.into());
        if let Some(d) = self.run.duration {
            spec.duration = d;
        }
        spec.dt = self.run.dt;
        spec.literal_reference = self.run.literal_reference;
        spec
    }

    pub fn settings(&self) -> Result<SimSettings, ConfigError> {
        let geometry = self.geometry().map_err(|e| invalid("geometry", e.to_string()))?;
        let diag = |v: &[f64; 12]| Matrix12::from_diagonal(&SVector::<f64, 12>::from_column_slice(v));
        Ok(SimSettings {
            geometry,
            params: self.params(),
            weights: LqrWeights {
                state: SVector::<f64, 12>::from_column_slice(&self.controller.state_weights),
                input: Vector6::from_column_slice(&self.controller.input_weights),
            },
            covariances: NoiseCovariances {
                predict: diag(&self.ekf.predict_cov),
                innovation: diag(&self.ekf.innov_cov),
                initial: diag(&self.ekf.initial_cov),
            },
            discretization: self.ekf.discretization.into(),
            noise: SensorNoiseSpec {
                leg_sigma: self.noise.leg_sigma,
                angle_sigma: self.noise.angle_sigma,
                rate_sigma: self.noise.rate_sigma,
                seed: self.noise.seed,
            },
            substeps: self.run.substeps,
            force_limit: self.controller.force_limit,
            perfect_state: self.run.perfect_state,
            ..SimSettings::default()
        })
    }
}
