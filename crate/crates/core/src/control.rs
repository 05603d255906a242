//! LQR synthesis for the feedback-linearized plant and the force law that
//! produces the linearization.
//!
//! With `F = H⁻¹(M u + C q̇ + G)` the platform reduces to `q̈ = u`: six
//! decoupled double integrators. The state `ξ = [q; q̇]` pairs axis `i` with
//! axis `i + 6`, so for diagonal weights the Riccati equation splits into six
//! 2×2 problems with a closed-form solution.

use nalgebra::{SMatrix, SVector, Vector6};

use crate::dynamics::{assemble_eom, RigidBodyParams, MAX_FORCE_MAP_CONDITION};
use crate::geometry::{PlatformGeometry, Pose, Twist};
use crate::linalg::guarded_solve;
use crate::{Error, Result, StateVector};

pub type Matrix12 = SMatrix<f64, 12, 12>;

/// Diagonal LQR weights: `N` on the state, `O` on the virtual input.
#[derive(Debug, Clone, PartialEq)]
pub struct LqrWeights {
    pub state: SVector<f64, 12>,
    pub input: Vector6<f64>,
}

impl Default for LqrWeights {
    fn default() -> Self {
        LqrWeights {
            state: SVector::<f64, 12>::from_column_slice(&[
                30.0, 30.0, 5.0, 30.0, 30.0, 200.0, 3.0, 3.0, 1.0, 3.0, 3.0, 20.0,
            ]),
            input: Vector6::repeat(10.0),
        }
    }
}

impl LqrWeights {
    pub fn validate(&self) -> Result<()> {
        for axis in 0..6 {
            let (n1, n2, o) = (self.state[axis], self.state[axis + 6], self.input[axis]);
            if !(o > 0.0) {
                return Err(Error::InvalidWeights(format!(
                    "input weight {axis} must be positive, got {o}"
                )));
            }
            if !(n2 >= 0.0) {
                return Err(Error::InvalidWeights(format!(
                    "velocity weight {} must be non-negative, got {n2}",
                    axis + 6
                )));
            }
            if !(n1 > 0.0) {
                return Err(Error::InvalidWeights(format!(
                    "position weight {axis} must be positive for a stabilizing gain, got {n1}"
                )));
            }
        }
        Ok(())
    }
}

/// 6×12 state-feedback gain.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix(pub SMatrix<f64, 6, 12>);

impl GainMatrix {
    /// Position and velocity gains `(k₁, k₂)` of one axis.
    pub fn axis(&self, axis: usize) -> (f64, f64) {
        (self.0[(axis, axis)], self.0[(axis, axis + 6)])
    }
}

/// Continuous double-integrator model `A = [[0, I], [0, 0]]`, `B = [0; I]`.
pub fn double_integrator() -> (Matrix12, SMatrix<f64, 12, 6>) {
    let mut a = Matrix12::zeros();
    a.fixed_view_mut::<6, 6>(0, 6).fill_with_identity();
    let mut b = SMatrix::<f64, 12, 6>::zeros();
    b.fixed_view_mut::<6, 6>(6, 0).fill_with_identity();
    (a, b)
}

/// Stabilizing solution `D` of `AᵀD + DA − D B O⁻¹ Bᵀ D + N = 0`.
///
/// Per axis with weights `(n₁, n₂, o)`:
/// `d₂ = √(n₁ o)`, `d₃ = √(o n₂ + 2 o d₂)`, `d₁ = d₂ d₃ / o`,
/// placed at `(i, i)`, `(i, i+6)`, `(i+6, i+6)`.
pub fn solve_care(weights: &LqrWeights) -> Result<Matrix12> {
    weights.validate()?;
    let mut d = Matrix12::zeros();
    for axis in 0..6 {
        let (n1, n2, o) = (weights.state[axis], weights.state[axis + 6], weights.input[axis]);
        let d2 = (n1 * o).sqrt();
        let d3 = (o * n2 + 2.0 * o * d2).sqrt();
        let d1 = d2 * d3 / o;
        d[(axis, axis)] = d1;
        d[(axis, axis + 6)] = d2;
        d[(axis + 6, axis)] = d2;
        d[(axis + 6, axis + 6)] = d3;
    }
    Ok(d)
}

/// `AᵀD + DA − D B O⁻¹ Bᵀ D + N`.
pub fn riccati_residual(d: &Matrix12, weights: &LqrWeights) -> Matrix12 {
    let (a, b) = double_integrator();
    let o_inv = SMatrix::<f64, 6, 6>::from_diagonal(&weights.input.map(|o| 1.0 / o));
    let n = Matrix12::from_diagonal(&weights.state);
    a.transpose() * d + d * a - d * b * o_inv * b.transpose() * d + n
}

/// `K = O⁻¹ Bᵀ D`.
pub fn lqr_gain(d: &Matrix12, weights: &LqrWeights) -> GainMatrix {
    let (_, b) = double_integrator();
    let o_inv = SMatrix::<f64, 6, 6>::from_diagonal(&weights.input.map(|o| 1.0 / o));
    GainMatrix(o_inv * b.transpose() * d)
}

/// `A − B K`.
pub fn closed_loop(k: &GainMatrix) -> Matrix12 {
    let (a, b) = double_integrator();
    a - b * k.0
}

/// `u = −K (ξ̂ − ξ_des)`.
pub fn virtual_control(estimate: &StateVector, desired: &StateVector, k: &GainMatrix) -> Vector6<f64> {
    -(k.0 * (estimate - desired))
}

/// `F = H⁻¹ (M u + C q̇ + G)`, which turns the plant into `q̈ = u`.
pub fn feedback_linearize(
    q: &Pose,
    qdot: &Twist,
    u: &Vector6<f64>,
    geom: &PlatformGeometry,
    params: &RigidBodyParams,
) -> Result<Vector6<f64>> {
    let eom = assemble_eom(q, qdot, geom, params)?;
    let rhs = eom.mass * u + eom.coriolis + eom.gravity;
    guarded_solve(&eom.force_map, &rhs, "force map H", MAX_FORCE_MAP_CONDITION)
}

/// Symmetric clamp of each actuator force to `±limit`. Returns whether any
/// entry was clipped.
pub fn saturate(forces: &mut Vector6<f64>, limit: f64) -> bool {
    let mut clipped = false;
    for f in forces.iter_mut() {
        if f.abs() > limit {
            *f = f.signum() * limit;
            clipped = true;
        }
    }
    clipped
}
