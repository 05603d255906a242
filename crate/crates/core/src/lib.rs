//! Simulation engine for a six-legged Stewart platform.
//!
//! The crate is layered bottom-up:
//!
//! * [`geometry`]: joint layout, rotation conventions, inverse and numerical
//!   forward kinematics and the per-leg kinematic quantities.
//! * [`dynamics`]: leg Lagrangian terms, platform Newton-Euler terms and the
//!   assembled task-space equations of motion `M q̈ + C q̇ + G = H F`.
//! * [`control`]: per-axis LQR synthesis for the feedback-linearized double
//!   integrator and the nonlinear force law.
//! * [`estimation`]: extended Kalman filter fusing leg lengths, Euler angles
//!   and body rates.
//! * [`sim`]: reference generators, plant integration, sensor simulation and
//!   the closed-loop scenario runner.
//!
//! All angles are radians. The generalized velocity carried in the state is
//! `[ṫ; ṙ]` with `ṙ` the ZYX Euler-angle rates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod dynamics;
mod error;
pub mod estimation;
pub mod geometry;
pub mod linalg;
pub mod sim;

pub use control::{GainMatrix, LqrWeights};
pub use dynamics::{DynamicsMatrices, RigidBodyParams};
pub use error::{Error, Result};
pub use estimation::{Discretization, EkfState, MeasurementVector, NoiseCovariances};
pub use geometry::{LegKinematics, PlatformGeometry, Pose, Twist};
pub use sim::{ScenarioKind, ScenarioSpec, SensorNoiseSpec, SimRecord, SimSettings};

/// 12-element state `[t, r, ṫ, ṙ]`.
pub type StateVector = nalgebra::SVector<f64, 12>;

/// Splits `ξ` into its pose and generalized-velocity halves.
pub fn split_state(x: &StateVector) -> (Pose, Twist) {
    (
        Pose::new(x.fixed_rows::<3>(0).into_owned(), x.fixed_rows::<3>(3).into_owned()),
        Twist::new(x.fixed_rows::<3>(6).into_owned(), x.fixed_rows::<3>(9).into_owned()),
    )
}

pub fn join_state(q: &Pose, qdot: &Twist) -> StateVector {
    let mut x = StateVector::zeros();
    x.fixed_rows_mut::<3>(0).copy_from(&q.t);
    x.fixed_rows_mut::<3>(3).copy_from(&q.r);
    x.fixed_rows_mut::<3>(6).copy_from(&qdot.v);
    x.fixed_rows_mut::<3>(9).copy_from(&qdot.rdot);
    x
}
