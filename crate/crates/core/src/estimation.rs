//! Extended Kalman filter on the discretized double integrator.
//!
//! The measurement stacks the six encoder leg lengths, the IMU Euler angles
//! and the IMU body rates `ω_p`. Prediction adds `predict` (`V`) and the
//! innovation covariance uses `innovation` (`W`).

use nalgebra::{SMatrix, SVector, Vector3, Vector6};

use crate::control::Matrix12;
use crate::geometry::{
    euler_rate_matrix, euler_rate_sensitivity, euler_rate_to_body_rate, forward_kinematics, inverse_kinematics,
    jacobian_rows, velocity_map, PlatformGeometry, Pose, Twist,
};
use crate::linalg::{guarded_cholesky, symmetrize, wrap_angle};
use crate::{join_state, split_state, Result, StateVector};

pub const MAX_INNOVATION_CONDITION: f64 = 1e12;

/// `z = [s₁ … s₆, φ, θ, ψ, ω_px, ω_py, ω_pz]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementVector(pub SVector<f64, 12>);

impl MeasurementVector {
    pub fn lengths(&self) -> [f64; 6] {
        std::array::from_fn(|i| self.0[i])
    }

    pub fn angles(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(6).into_owned()
    }

    pub fn body_rates(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(9).into_owned()
    }
}

/// Filter noise settings.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCovariances {
    /// Added to `P` in every prediction.
    pub predict: Matrix12,
    /// Added to `Γ P Γᵀ` in every update.
    pub innovation: Matrix12,
    /// `P₀`.
    pub initial: Matrix12,
}

impl Default for NoiseCovariances {
    fn default() -> Self {
        let diag = |v: [f64; 12]| Matrix12::from_diagonal(&SVector::<f64, 12>::from_column_slice(&v));
        NoiseCovariances {
            predict: diag([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0]),
            innovation: diag([10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 1.0, 1.0, 1.0, 3.0, 3.0, 3.0]),
            initial: diag([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01]),
        }
    }
}

/// Estimate `ξ̂` and covariance `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct EkfState {
    pub xhat: StateVector,
    pub cov: Matrix12,
}

/// How the prediction model turns `q̈ = u` into a discrete step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Discretization {
    /// `A_d = [[I, Δt I], [0, I]]`, `B_d = [0; Δt I]`.
    #[default]
    ForwardEuler,
    /// Exact for a zero-order-held input: `B_d = [½Δt² I; Δt I]`.
    ZeroOrderHold,
}

pub fn discretize_with(dt: f64, scheme: Discretization) -> (Matrix12, SMatrix<f64, 12, 6>) {
    let (a, mut b) = discretize(dt);
    if scheme == Discretization::ZeroOrderHold {
        b.fixed_view_mut::<6, 6>(0, 0).fill_with_identity();
        b.fixed_view_mut::<6, 6>(0, 0).scale_mut(0.5 * dt * dt);
    }
    (a, b)
}

/// Forward-Euler discretization: `A_d = [[I, Δt I], [0, I]]`, `B_d = [0; Δt I]`.
pub fn discretize(dt: f64) -> (Matrix12, SMatrix<f64, 12, 6>) {
    let mut a = Matrix12::identity();
    a.fixed_view_mut::<6, 6>(0, 6).fill_with_identity();
    a.fixed_view_mut::<6, 6>(0, 6).scale_mut(dt);
    let mut b = SMatrix::<f64, 12, 6>::zeros();
    b.fixed_view_mut::<6, 6>(6, 0).fill_with_identity();
    b.fixed_view_mut::<6, 6>(6, 0).scale_mut(dt);
    (a, b)
}

pub fn predict(
    ekf: &EkfState,
    u: &Vector6<f64>,
    a_d: &Matrix12,
    b_d: &SMatrix<f64, 12, 6>,
    cov: &NoiseCovariances,
) -> EkfState {
    EkfState {
        xhat: a_d * ekf.xhat + b_d * u,
        cov: a_d * ekf.cov * a_d.transpose() + cov.predict,
    }
}

/// Noiseless measurement of a state.
pub fn measurement_model(x: &StateVector, geom: &PlatformGeometry) -> Result<MeasurementVector> {
    let (q, qdot) = split_state(x);
    let rates = euler_rate_to_body_rate(&q.r, &qdot.rdot)?;
    let legs = inverse_kinematics(&q, geom)?;
    let mut z = SVector::<f64, 12>::zeros();
    for i in 0..6 {
        z[i] = legs.s[i];
    }
    z.fixed_rows_mut::<3>(6).copy_from(&q.r);
    z.fixed_rows_mut::<3>(9).copy_from(&rates);
    Ok(MeasurementVector(z))
}

/// Analytic `Γ = ∂γ/∂ξ`.
pub fn measurement_jacobian(x: &StateVector, geom: &PlatformGeometry) -> Result<Matrix12> {
    let (q, qdot) = split_state(x);
    q.check_pitch()?;
    let legs = inverse_kinematics(&q, geom)?;
    let j = jacobian_rows(&legs) * velocity_map(&q.r);
    let mut gamma = Matrix12::zeros();
    gamma.fixed_view_mut::<6, 6>(0, 0).copy_from(&j);
    gamma.fixed_view_mut::<3, 3>(6, 3).fill_with_identity();
    gamma
        .fixed_view_mut::<3, 3>(9, 3)
        .copy_from(&euler_rate_sensitivity(&q.r, &qdot.rdot));
    gamma.fixed_view_mut::<3, 3>(9, 9).copy_from(&euler_rate_matrix(&q.r));
    Ok(gamma)
}

/// Measurement update with innovation `z − γ(ξ̂)`; angle residuals are
/// wrapped to `(−π, π]`.
pub fn update(
    ekf: &EkfState,
    z: &MeasurementVector,
    gamma: &Matrix12,
    cov: &NoiseCovariances,
    geom: &PlatformGeometry,
) -> Result<EkfState> {
    let predicted = measurement_model(&ekf.xhat, geom)?;
    let mut innovation = z.0 - predicted.0;
    for i in 6..9 {
        innovation[i] = wrap_angle(innovation[i]);
    }
    let p = ekf.cov;
    let s = gamma * p * gamma.transpose() + cov.innovation;
    let chol = guarded_cholesky(&s, "innovation covariance", MAX_INNOVATION_CONDITION)?;
    let gain = chol.solve(&(gamma * p)).transpose();
    let xhat = ekf.xhat + gain * innovation;
    let mut cov = (Matrix12::identity() - gain * gamma) * p;
    symmetrize(&mut cov);
    Ok(EkfState { xhat, cov })
}

/// Initial estimate from encoder lengths: pose by numerical forward
/// kinematics from the home pose, zero velocity, `P = P₀`.
pub fn initialize(lengths: &[f64; 6], geom: &PlatformGeometry, initial_cov: &Matrix12) -> Result<EkfState> {
    let q = forward_kinematics(lengths, &Pose::home(), geom)?;
    Ok(EkfState {
        xhat: join_state(&q, &Twist::zero()),
        cov: *initial_cov,
    })
}

/// One predict + update cycle.
pub fn step(
    ekf: &EkfState,
    u: &Vector6<f64>,
    z: &MeasurementVector,
    dt: f64,
    scheme: Discretization,
    cov: &NoiseCovariances,
    geom: &PlatformGeometry,
) -> Result<EkfState> {
    let (a_d, b_d) = discretize_with(dt, scheme);
    let prior = predict(ekf, u, &a_d, &b_d, cov);
    let gamma = measurement_jacobian(&prior.xhat, geom)?;
    update(&prior, z, &gamma, cov, geom)
}
