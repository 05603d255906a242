//! Reference computations that share no code with the library.

use nalgebra::{Matrix3, Rotation3, Vector3, Vector6};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use stewart_core::{Pose, RigidBodyParams, Twist};

pub fn rotation(r: &Vector3<f64>) -> Matrix3<f64> {
    *Rotation3::from_euler_angles(r.x, r.y, r.z).matrix()
}

/// Pose within 0.08 m of (0, 0, 0.32) with each Euler angle in ±0.15 rad.
pub fn workspace_pose(rng: &mut ChaCha8Rng) -> Pose {
    let dir = loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if v.norm() > 1e-3 && v.norm() <= 1.0 {
            break v.normalize();
        }
    };
    let radius = 0.08 * rng.random::<f64>().cbrt();
    let r = Vector3::from_fn(|_, _| rng.random_range(-0.15..0.15));
    Pose::new(Vector3::new(0.0, 0.0, 0.32) + dir * radius, r)
}

pub fn random_vector6(rng: &mut ChaCha8Rng, scale: f64) -> Vector6<f64> {
    Vector6::from_fn(|_, _| rng.random_range(-scale..scale))
}

pub fn random_twist(rng: &mut ChaCha8Rng) -> Twist {
    Twist::from_vector(&random_vector6(rng, 0.5))
}

/// Leg kinetic energy from first principles: the top part's center of mass
/// sits at `q_p − l_t n` and the leg swings about the base joint with rate
/// `n × ṅ`.
fn leg_kinetic(qp: &Vector3<f64>, qdp: &Vector3<f64>, b: &Vector3<f64>, p: &RigidBodyParams) -> f64 {
    let l = qp - b;
    let s = l.norm();
    let n = l / s;
    let ndot = (qdp - n * n.dot(qdp)) / s;
    let v_top = qdp - ndot * p.top_com;
    let omega = n.cross(&ndot);
    let a = (p.top_mass * p.top_com.powi(2) + p.bottom_mass * p.bottom_com.powi(2)) / 3.0;
    0.5 * p.top_mass * v_top.norm_squared() + 0.5 * a * omega.norm_squared()
}

fn leg_potential(qp: &Vector3<f64>, b: &Vector3<f64>, p: &RigidBodyParams) -> f64 {
    let n = (qp - b).normalize();
    -p.top_mass * p.gravity.dot(&(qp - n * p.top_com)) - p.bottom_mass * p.gravity.dot(&(b + n * p.bottom_com))
}

fn gradient(f: impl Fn(&Vector3<f64>) -> f64, x: &Vector3<f64>, h: f64) -> Vector3<f64> {
    Vector3::from_fn(|k, _| {
        let mut e = Vector3::zeros();
        e[k] = h;
        (f(&(x + e)) - f(&(x - e))) / (2.0 * h)
    })
}

/// Force the platform exerts on a leg whose platform joint follows
/// `q_p(τ) = q_p0 + w τ + ½ a τ²`, from central differences of
/// `d/dt ∂T/∂q̇_p − ∂T/∂q_p + ∂V/∂q_p − n f`.
pub fn leg_force_euler_lagrange(
    qp0: &Vector3<f64>,
    w: &Vector3<f64>,
    acc: &Vector3<f64>,
    b: &Vector3<f64>,
    f: f64,
    p: &RigidBodyParams,
) -> Vector3<f64> {
    let momentum = |tau: f64| {
        let qp = qp0 + w * tau + acc * (0.5 * tau * tau);
        let qdp = w + acc * tau;
        gradient(|v| leg_kinetic(&qp, v, b, p), &qdp, 1e-3)
    };
    let h = 1e-5;
    let dmomentum = (momentum(h) - momentum(-h)) / (2.0 * h);
    let dtdq = gradient(|x| leg_kinetic(x, w, b, p), qp0, 1e-6);
    let dvdq = gradient(|x| leg_potential(x, b, p), qp0, 1e-6);
    let n = (qp0 - b).normalize();
    dmomentum - dtdq + dvdq - n * f
}

/// Position, velocity and acceleration of platform joint `p_i` when the
/// pose follows `q(τ) = q + q̇ τ + ½ q̈ τ²`, by central differences.
pub fn joint_trajectory(
    q: &Pose,
    qd: &Twist,
    qdd: &Vector6<f64>,
    p_i: &Vector3<f64>,
) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let (q0, v0) = (q.to_vector(), qd.to_vector());
    let at = |tau: f64| {
        let x = q0 + v0 * tau + qdd * (0.5 * tau * tau);
        let t = Vector3::new(x[0], x[1], x[2]);
        t + rotation(&Vector3::new(x[3], x[4], x[5])) * p_i
    };
    let h = 1e-4;
    let (minus, mid, plus) = (at(-h), at(0.0), at(h));
    (mid, (plus - minus) / (2.0 * h), (plus - mid * 2.0 + minus) / (h * h))
}
