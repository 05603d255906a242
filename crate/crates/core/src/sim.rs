//! Closed-loop scenario runner.
//!
//! Each control period: reference → LQR virtual input from the estimate →
//! linearizing actuator forces → plant integration (RK4, zero-order-held
//! forces) → noisy sensors → EKF predict/update.

use nalgebra::{SVector, SymmetricEigen, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::control::{feedback_linearize, lqr_gain, saturate, solve_care, virtual_control, LqrWeights};
use crate::dynamics::{forward_dynamics, RigidBodyParams};
use crate::estimation::{self, initialize, measurement_model, Discretization, MeasurementVector, NoiseCovariances};
use crate::geometry::{PlatformGeometry, Pose, Twist};
use crate::linalg::asymmetry;
use crate::{join_state, split_state, Error, Result, StateVector};

pub const DEFAULT_SUBSTEPS: usize = 10;
pub const CONTROL_PERIOD: f64 = 0.01;

/// Height held by both reference trajectories.
pub const REFERENCE_HEIGHT: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Five 10 s holds offsetting x, y, φ, θ, ψ in turn.
    Step,
    /// Roll and pitch tracing a 0.1 rad circle at 1 rad/s.
    Sinusoid,
}

impl ScenarioKind {
    pub fn default_duration(self) -> f64 {
        match self {
            ScenarioKind::Step => 60.0,
            ScenarioKind::Sinusoid => 20.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Step => "step",
            ScenarioKind::Sinusoid => "sinusoid",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub duration: f64,
    pub dt: f64,
    /// Put 0.4 in the ż slot of the sinusoid's desired velocity instead of
    /// the true derivative 0.
    pub literal_reference: bool,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind) -> Self {
        ScenarioSpec {
            kind,
            duration: kind.default_duration(),
            dt: CONTROL_PERIOD,
            literal_reference: false,
        }
    }

    /// Number of control periods; there are `steps() + 1` records.
    pub fn steps(&self) -> Result<usize> {
        if !(self.duration > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        let n = (self.duration / self.dt).round();
        if (n * self.dt - self.duration).abs() > 1e-9 || n < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "dt {} does not divide duration {}",
                self.dt, self.duration
            )));
        }
        Ok(n as usize)
    }

    pub fn reference(&self, t: f64) -> (Vector6<f64>, Vector6<f64>) {
        match self.kind {
            ScenarioKind::Step => step_reference(t),
            ScenarioKind::Sinusoid => sinusoid_reference(t, self.literal_reference),
        }
    }
}

/// Gaussian sensor noise injected by the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorNoiseSpec {
    /// Encoder noise on each leg length, m.
    pub leg_sigma: f64,
    /// IMU Euler-angle noise, rad.
    pub angle_sigma: f64,
    /// IMU body-rate noise, rad/s.
    pub rate_sigma: f64,
    pub seed: u64,
}

impl Default for SensorNoiseSpec {
    fn default() -> Self {
        SensorNoiseSpec {
            leg_sigma: 5e-5,
            angle_sigma: 5e-4,
            rate_sigma: 1e-3,
            seed: 42,
        }
    }
}

impl SensorNoiseSpec {
    pub fn noiseless(seed: u64) -> Self {
        SensorNoiseSpec {
            leg_sigma: 0.0,
            angle_sigma: 0.0,
            rate_sigma: 0.0,
            seed,
        }
    }
}

/// Everything a closed-loop run needs besides the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub geometry: PlatformGeometry,
    pub params: RigidBodyParams,
    pub weights: LqrWeights,
    pub covariances: NoiseCovariances,
    pub discretization: Discretization,
    pub noise: SensorNoiseSpec,
    /// RK4 steps per control period.
    pub substeps: usize,
    /// Optional symmetric actuator force limit, N.
    pub force_limit: Option<f64>,
    /// Feed plant truth to the controller instead of the estimate.
    pub perfect_state: bool,
    pub initial_state: StateVector,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            geometry: PlatformGeometry::default(),
            params: RigidBodyParams::default(),
            weights: LqrWeights::default(),
            covariances: NoiseCovariances::default(),
            discretization: Discretization::ForwardEuler,
            noise: SensorNoiseSpec::default(),
            substeps: DEFAULT_SUBSTEPS,
            force_limit: None,
            perfect_state: false,
            initial_state: join_state(&Pose::home(), &Twist::zero()),
        }
    }
}

/// One control step of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub t: f64,
    pub true_state: StateVector,
    pub desired: StateVector,
    pub estimate: StateVector,
    pub measurement: SVector<f64, 12>,
    pub u: Vector6<f64>,
    pub forces: Vector6<f64>,
    pub e_l: f64,
    pub e_t: f64,
    pub e_cs: f64,
    /// Whether the force limit clipped this step's command.
    pub saturated: bool,
    /// `max |P − Pᵀ|` of the filter covariance at this step.
    pub cov_asymmetry: f64,
    /// Smallest eigenvalue of the symmetric part of `P`.
    pub cov_min_eigenvalue: f64,
}

/// Static-hold reference: z held at 0.4 m while x, y, φ, θ, ψ each take a
/// 10 s turn at their offset (0.075 m or 0.15 rad).
pub fn step_reference(t: f64) -> (Vector6<f64>, Vector6<f64>) {
    let mut q = Vector6::new(0.0, 0.0, REFERENCE_HEIGHT, 0.0, 0.0, 0.0);
    let window = |lo: f64, hi: f64| (lo..hi).contains(&t);
    if window(10.0, 20.0) {
        q[0] = 0.075;
    }
    if window(20.0, 30.0) {
        q[1] = 0.075;
    }
    if window(30.0, 40.0) {
        q[3] = 0.15;
    }
    if window(40.0, 50.0) {
        q[4] = 0.15;
    }
    if (50.0..=60.0).contains(&t) {
        q[5] = 0.15;
    }
    (q, Vector6::zeros())
}

/// `q = [0, 0, 0.4, 0.1 sin t, 0.1 cos t, 0]` and its derivative. With
/// `literal` the desired ż is 0.4 instead of 0.
pub fn sinusoid_reference(t: f64, literal: bool) -> (Vector6<f64>, Vector6<f64>) {
    let (s, c) = t.sin_cos();
    let q = Vector6::new(0.0, 0.0, REFERENCE_HEIGHT, 0.1 * s, 0.1 * c, 0.0);
    let zdot = if literal { REFERENCE_HEIGHT } else { 0.0 };
    let qd = Vector6::new(0.0, 0.0, zdot, 0.1 * c, -0.1 * s, 0.0);
    (q, qd)
}

fn state_derivative(
    x: &StateVector,
    forces: &Vector6<f64>,
    geom: &PlatformGeometry,
    params: &RigidBodyParams,
) -> Result<StateVector> {
    let (q, qdot) = split_state(x);
    let qddot = forward_dynamics(&q, &qdot, forces, geom, params)?;
    let mut dx = StateVector::zeros();
    dx.fixed_rows_mut::<6>(0).copy_from(&x.fixed_rows::<6>(6));
    dx.fixed_rows_mut::<6>(6).copy_from(&qddot);
    Ok(dx)
}

/// Classical RK4 over one control period with the forces held constant.
pub fn integrate_plant(
    x: &StateVector,
    forces: &Vector6<f64>,
    dt: f64,
    substeps: usize,
    geom: &PlatformGeometry,
    params: &RigidBodyParams,
) -> Result<StateVector> {
    if substeps == 0 {
        return Err(Error::InvalidParameter("substeps must be at least 1".into()));
    }
    let h = dt / substeps as f64;
    let mut x = *x;
    for _ in 0..substeps {
        let k1 = state_derivative(&x, forces, geom, params)?;
        let k2 = state_derivative(&(x + k1 * (h / 2.0)), forces, geom, params)?;
        let k3 = state_derivative(&(x + k2 * (h / 2.0)), forces, geom, params)?;
        let k4 = state_derivative(&(x + k3 * h), forces, geom, params)?;
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Ok(x)
}

/// Noisy sensor reading of the true state. Exactly twelve standard-normal
/// draws are consumed per call regardless of the sigmas.
pub fn simulate_measurement<R: Rng + ?Sized>(
    x: &StateVector,
    noise: &SensorNoiseSpec,
    rng: &mut R,
    geom: &PlatformGeometry,
) -> Result<MeasurementVector> {
    let mut z = measurement_model(x, geom)?;
    for i in 0..12 {
        let sigma = match i {
            0..=5 => noise.leg_sigma,
            6..=8 => noise.angle_sigma,
            _ => noise.rate_sigma,
        };
        let draw: f64 = rng.sample(StandardNormal);
        z.0[i] += sigma * draw;
    }
    Ok(z)
}

/// `(e_l, e_t, e_cs) = (‖ξ̂ − ξ‖, ‖ξ − ξ_des‖, ‖ξ_des − ξ̂‖)`.
pub fn metrics(true_state: &StateVector, desired: &StateVector, estimate: &StateVector) -> (f64, f64, f64) {
    (
        (estimate - true_state).norm(),
        (true_state - desired).norm(),
        (desired - estimate).norm(),
    )
}

pub fn run_closed_loop(scenario: &ScenarioSpec, settings: &SimSettings) -> Result<Vec<SimRecord>> {
    let steps = scenario.steps()?;
    let geom = &settings.geometry;
    let params = &settings.params;
    let cov = &settings.covariances;
    let dt = scenario.dt;
    let d = solve_care(&settings.weights)?;
    let gain = lqr_gain(&d, &settings.weights);
    let mut rng = ChaCha8Rng::seed_from_u64(settings.noise.seed);

    let mut x = settings.initial_state;
    let mut z = simulate_measurement(&x, &settings.noise, &mut rng, geom).map_err(|e| e.at_step(0))?;
    let mut ekf = initialize(&z.lengths(), geom, &cov.initial).map_err(|e| e.at_step(0))?;
    let mut records = Vec::with_capacity(steps + 1);
    let mut saturated_steps = 0usize;

    for k in 0..=steps {
        let t = k as f64 * dt;
        let (q_des, qd_des) = scenario.reference(t);
        let mut desired = StateVector::zeros();
        desired.fixed_rows_mut::<6>(0).copy_from(&q_des);
        desired.fixed_rows_mut::<6>(6).copy_from(&qd_des);

        let feedback = if settings.perfect_state { x } else { ekf.xhat };
        let u = virtual_control(&feedback, &desired, &gain);
        let (q_fb, qd_fb) = split_state(&feedback);
        let mut forces = feedback_linearize(&q_fb, &qd_fb, &u, geom, params).map_err(|e| e.at_step(k))?;
        let saturated = match settings.force_limit {
            Some(limit) => saturate(&mut forces, limit),
            None => false,
        };
        if saturated {
            saturated_steps += 1;
            log::debug!("step {k}: actuator forces clipped to ±{:?} N", settings.force_limit);
        }

        let (e_l, e_t, e_cs) = metrics(&x, &desired, &ekf.xhat);
        records.push(SimRecord {
            t,
            true_state: x,
            desired,
            estimate: ekf.xhat,
            measurement: z.0,
            u,
            forces,
            e_l,
            e_t,
            e_cs,
            saturated,
            cov_asymmetry: asymmetry(&ekf.cov),
            cov_min_eigenvalue: SymmetricEigen::new((ekf.cov + ekf.cov.transpose()) * 0.5)
                .eigenvalues
                .min(),
        });
        if k == steps {
            break;
        }

        x = integrate_plant(&x, &forces, dt, settings.substeps, geom, params).map_err(|e| e.at_step(k))?;
        z = simulate_measurement(&x, &settings.noise, &mut rng, geom).map_err(|e| e.at_step(k + 1))?;
        ekf = estimation::step(&ekf, &u, &z, dt, settings.discretization, cov, geom).map_err(|e| e.at_step(k + 1))?;
    }
    if saturated_steps > 0 {
        log::warn!("force limit active on {saturated_steps} of {} steps", steps + 1);
    }
    Ok(records)
}
