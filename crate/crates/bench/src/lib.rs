//! Shared fixtures for the benchmarks.

use nalgebra::{Vector3, Vector6};
use stewart_core::dynamics::gravity_compensation;
use stewart_core::{join_state, PlatformGeometry, Pose, RigidBodyParams, StateVector, Twist};

/// A tilted, moving platform away from every symmetry of the home pose.
pub struct Fixture {
    pub geometry: PlatformGeometry,
    pub params: RigidBodyParams,
    pub pose: Pose,
    pub twist: Twist,
    pub state: StateVector,
    pub forces: Vector6<f64>,
}

impl Default for Fixture {
    fn default() -> Self {
        let geometry = PlatformGeometry::default();
        let params = RigidBodyParams::default();
        let pose = Pose::new(Vector3::new(0.02, -0.015, 0.36), Vector3::new(0.05, -0.08, 0.1));
        let twist = Twist::new(Vector3::new(0.1, -0.05, 0.02), Vector3::new(0.2, 0.1, -0.3));
        let forces = gravity_compensation(&pose, &geometry, &params).expect("fixture pose is regular");
        Fixture {
            state: join_state(&pose, &twist),
            geometry,
            params,
            pose,
            twist,
            forces,
        }
    }
}
