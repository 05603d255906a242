//! Task-space equations of motion `M(q) q̈ + C(q, q̇) q̇ + G(q) = H(q) F`.
//!
//! Each leg is a two-part prismatic actuator whose dynamics follow from the
//! Lagrangian `T = ½ q̇_pᵀ (M₁ + M₂) q̇_p` written in the platform joint
//! position `q_p`. The platform follows Newton-Euler about its control point.
//! Everything is first formed in base quasi-velocities `ν = [v; ω]` (ω in
//! `{B}`), where each leg enters through `J_i = [I | R p̃_iᵀ Rᵀ]`, and then
//! projected into the Euler-rate state coordinates with
//! `S = blockdiag(I, R T(r))`:
//!
//! ```text
//! M = Sᵀ M_b S,   C q̇ = Sᵀ (h_b + M_b Ṡ q̇),   G = Sᵀ G_b,   H = Sᵀ H_b
//! ```
//!
//! so that `q̈` is the second derivative of `[t; r]` and `H = Jᵀ` with
//! `J = ∂s/∂q`.

use nalgebra::{Matrix3, Matrix6, SMatrix, Vector3, Vector6};

use crate::geometry::{
    base_rates, euler_rate_matrix, inverse_kinematics, joint_velocity_map, skew, velocity_map, LegKinematics,
    PlatformGeometry, Pose, Twist,
};
use crate::linalg::{condition_number, guarded_cholesky};
use crate::{Error, Result};

/// Dynamics refuse legs shorter than this; the model divides by `s`.
pub const MIN_DYNAMIC_LEG_LENGTH: f64 = 1e-6;
/// `H` above this condition number is reported as a singular configuration.
pub const MAX_FORCE_MAP_CONDITION: f64 = 1e8;
pub const MAX_MASS_CONDITION: f64 = 1e10;

pub const STANDARD_GRAVITY: f64 = 9.81;

/// Masses, inertias and center-of-mass offsets of the platform and legs.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidBodyParams {
    /// `m_p`, kg.
    pub platform_mass: f64,
    /// `I_p` about the control point, in `{P}`, kg·m².
    pub platform_inertia: Matrix3<f64>,
    /// `m_t`: moving (top) part of each actuator, kg.
    pub top_mass: f64,
    /// `m_b`: static (bottom) part of each actuator, kg.
    pub bottom_mass: f64,
    /// `l_t`: top-part center of mass distance from the platform joint, m.
    pub top_com: f64,
    /// `l_b`: bottom-part center of mass distance from the base joint, m.
    pub bottom_com: f64,
    pub gravity: Vector3<f64>,
}

impl Default for RigidBodyParams {
    fn default() -> Self {
        RigidBodyParams {
            platform_mass: 0.528,
            platform_inertia: Matrix3::new(0.03, 0.01, 0.01, 0.01, 0.03, 0.01, 0.01, 0.01, 0.02),
            top_mass: 0.027,
            bottom_mass: 0.1187,
            top_com: 0.1,
            bottom_com: 0.13861,
            gravity: Vector3::new(0.0, 0.0, -STANDARD_GRAVITY),
        }
    }
}

impl RigidBodyParams {
    /// `I_t = diag(⅓ m_t l_t², ⅓ m_t l_t², 0)` in leg-local axes.
    pub fn top_inertia(&self) -> Matrix3<f64> {
        let a = self.top_mass * self.top_com.powi(2) / 3.0;
        Matrix3::from_diagonal(&Vector3::new(a, a, 0.0))
    }

    pub fn bottom_inertia(&self) -> Matrix3<f64> {
        let a = self.bottom_mass * self.bottom_com.powi(2) / 3.0;
        Matrix3::from_diagonal(&Vector3::new(a, a, 0.0))
    }

    /// Transverse inertia of a whole leg about its joint,
    /// `⅓ (m_t l_t² + m_b l_b²)`. The leg is axisymmetric, so `I_t + I_b`
    /// acts as this scalar times the projector `ñᵀñ` in any frame.
    pub fn leg_inertia(&self) -> f64 {
        (self.top_mass * self.top_com.powi(2) + self.bottom_mass * self.bottom_com.powi(2)) / 3.0
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("platform_mass", self.platform_mass),
            ("top_mass", self.top_mass),
            ("bottom_mass", self.bottom_mass),
            ("top_com", self.top_com),
            ("bottom_com", self.bottom_com),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if (self.platform_inertia - self.platform_inertia.transpose()).amax() > 1e-12 {
            return Err(Error::InvalidParameter("platform_inertia must be symmetric".into()));
        }
        Ok(())
    }
}

/// Terms of `M q̈ + C q̇ + G = H F` in Euler-rate state coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsMatrices {
    pub mass: Matrix6<f64>,
    /// `C(q, q̇) q̇`.
    pub coriolis: Vector6<f64>,
    pub gravity: Vector6<f64>,
    /// Column i maps actuator force `f_i` to generalized force.
    pub force_map: Matrix6<f64>,
}

impl DynamicsMatrices {
    pub fn force_map_condition(&self) -> f64 {
        condition_number(&self.force_map)
    }
}

/// Inertial terms `M₁ = (I + l_t ñ²/s)ᵀ m_t (I + l_t ñ²/s)` and
/// `M₂ = (I_t + I_b) ñᵀñ / s²`.
pub fn leg_mass_matrices(n: &Vector3<f64>, s: f64, params: &RigidBodyParams) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
    check_length(0, s)?;
    let nt = skew(n);
    let top = Matrix3::identity() + nt * nt * (params.top_com / s);
    let m1 = top.transpose() * top * params.top_mass;
    let m2 = nt.transpose() * nt * (params.leg_inertia() / (s * s));
    Ok((m1, m2))
}

/// Velocity-dependent leg term `C_a`, with `C_a q̇_p` equal to
/// `d/dt(∂T/∂q̇_p) − ∂T/∂q_p − (M₁ + M₂) q̈_p`.
pub fn leg_coriolis(n: &Vector3<f64>, s: f64, qdot_p: &Vector3<f64>, params: &RigidBodyParams) -> Result<Matrix3<f64>> {
    check_length(0, s)?;
    let nt = skew(n);
    let proj = nt.transpose() * nt;
    let axial = n.dot(qdot_p);
    let transverse = proj * qdot_p;
    let (mt, lt) = (params.top_mass, params.top_com);
    let s2 = s * s;
    let s3 = s2 * s;

    let t1 = n * (qdot_p.transpose() * proj) + proj * axial + transverse * n.transpose();
    let t2 = proj * axial + transverse * n.transpose();
    let t3 = transverse * n.transpose();
    Ok(t1 * (mt * lt / s2) - t2 * (mt * lt * lt / s3) - t3 * (2.0 * params.leg_inertia() / s3))
}

/// Generalized forces acting on one leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegForces {
    /// `Q_f = n f`.
    pub actuator: Vector3<f64>,
    /// `Q_mtg = (I + l_t ñ²/s) m_t g`.
    pub top_gravity: Vector3<f64>,
    /// `Q_mbg = (l_b ñᵀñ / s) m_b g`.
    pub bottom_gravity: Vector3<f64>,
}

impl LegForces {
    pub fn total(&self) -> Vector3<f64> {
        self.actuator + self.top_gravity + self.bottom_gravity
    }
}

pub fn leg_applied_forces(n: &Vector3<f64>, s: f64, f: f64, params: &RigidBodyParams) -> LegForces {
    let nt = skew(n);
    let g = params.gravity;
    LegForces {
        actuator: n * f,
        top_gravity: (Matrix3::identity() + nt * nt * (params.top_com / s)) * g * params.top_mass,
        bottom_gravity: (nt.transpose() * nt * (params.bottom_com / s)) * g * params.bottom_mass,
    }
}

fn check_length(leg: usize, s: f64) -> Result<()> {
    if s >= MIN_DYNAMIC_LEG_LENGTH {
        Ok(())
    } else {
        Err(Error::LegCollapse { leg, length: s })
    }
}

fn checked_legs(q: &Pose, geom: &PlatformGeometry) -> Result<LegKinematics> {
    q.check_pitch()?;
    let legs = inverse_kinematics(q, geom)?;
    for (i, &s) in legs.s.iter().enumerate() {
        check_length(i, s)?;
    }
    Ok(legs)
}

/// Base quasi-acceleration `[a; α]` for an Euler-rate acceleration `q̈`.
fn base_acceleration(q: &Pose, rotation: &Matrix3<f64>, qdot: &Twist, qddot: &Vector6<f64>) -> Vector6<f64> {
    let (_, bias) = base_rates(&q.r, rotation, &qdot.rdot);
    let rddot = qddot.fixed_rows::<3>(3).into_owned();
    let alpha = rotation * (euler_rate_matrix(&q.r) * rddot) + bias;
    let mut out = Vector6::zeros();
    out.fixed_rows_mut::<3>(0).copy_from(&qddot.fixed_rows::<3>(0));
    out.fixed_rows_mut::<3>(3).copy_from(&alpha);
    out
}

fn quasi_velocity(omega: &Vector3<f64>, qdot: &Twist) -> Vector6<f64> {
    Vector6::new(qdot.v.x, qdot.v.y, qdot.v.z, omega.x, omega.y, omega.z)
}

/// Force `f_pi` that the platform exerts on leg `leg` while following
/// `(q, q̇, q̈)` with actuator force `f`.
#[allow(clippy::too_many_arguments)]
pub fn leg_constraint_force(
    q: &Pose,
    qdot: &Twist,
    qddot: &Vector6<f64>,
    leg: usize,
    geom: &PlatformGeometry,
    params: &RigidBodyParams,
    f: f64,
) -> Result<Vector3<f64>> {
    let legs = checked_legs(q, geom)?;
    let rotation = legs.rotation;
    let (omega, _) = base_rates(&q.r, &rotation, &qdot.rdot);
    let nu = quasi_velocity(&omega, qdot);
    let nu_dot = base_acceleration(q, &rotation, qdot, qddot);

    let (n, s, rp) = (legs.n[leg], legs.s[leg], legs.rp[leg]);
    let map = joint_velocity_map(&rp);
    let qdot_p = map * nu;
    let (m1, m2) = leg_mass_matrices(&n, s, params)?;
    let mass = m1 + m2;
    let ca = leg_coriolis(&n, s, &qdot_p, params)?;
    let centripetal = omega.cross(&omega.cross(&rp));
    let forces = leg_applied_forces(&n, s, f, params);
    Ok(mass * (map * nu_dot) + ca * qdot_p + mass * centripetal - forces.total())
}

/// Platform Newton-Euler blocks in base quasi-velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct PlatformMatrices {
    /// `M_p`.
    pub mass: Matrix6<f64>,
    /// `C_p = [[0, 0], [0, ω̃ R I_p Rᵀ]]`.
    pub coriolis: Matrix6<f64>,
    /// `H_p = [[I … I], [R p̃₁ Rᵀ … R p̃₆ Rᵀ]]`, mapping stacked `f_pi`.
    pub force_map: SMatrix<f64, 6, 18>,
}

pub fn platform_matrices(
    q: &Pose,
    qdot: &Twist,
    geom: &PlatformGeometry,
    params: &RigidBodyParams,
) -> PlatformMatrices {
    let rotation = q.rotation();
    let (omega, _) = base_rates(&q.r, &rotation, &qdot.rdot);
    let mp = params.platform_mass;
    let c = skew(&(rotation * geom.control_point));
    let inertia = rotation * params.platform_inertia * rotation.transpose();

    let mut mass = Matrix6::zeros();
    mass.fixed_view_mut::<3, 3>(0, 0).copy_from(&(Matrix3::identity() * mp));
    mass.fixed_view_mut::<3, 3>(0, 3).copy_from(&(c.transpose() * mp));
    mass.fixed_view_mut::<3, 3>(3, 0).copy_from(&(c * mp));
    mass.fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&(c * c.transpose() * mp + inertia));

    let mut coriolis = Matrix6::zeros();
    coriolis
        .fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&(skew(&omega) * inertia));

    let mut force_map = SMatrix::<f64, 6, 18>::zeros();
    for i in 0..6 {
        let rp = rotation * geom.platform[i];
        force_map.fixed_view_mut::<3, 3>(0, 3 * i).fill_with_identity();
        force_map.fixed_view_mut::<3, 3>(3, 3 * i).copy_from(&skew(&rp));
    }
    PlatformMatrices {
        mass,
        coriolis,
        force_map,
    }
}

/// Assembles `M`, `C q̇`, `G` and `H` without the conditioning check on `H`.
fn assemble(q: &Pose, qdot: &Twist, geom: &PlatformGeometry, params: &RigidBodyParams) -> Result<DynamicsMatrices> {
    let legs = checked_legs(q, geom)?;
    let rotation = legs.rotation;
    let (omega, rate_bias) = base_rates(&q.r, &rotation, &qdot.rdot);
    let nu = quasi_velocity(&omega, qdot);

    let mut mass_b = Matrix6::zeros();
    let mut bias_b = Vector6::zeros();
    let mut gravity_b = Vector6::zeros();
    let mut force_map_b = Matrix6::zeros();

    for i in 0..6 {
        let (n, s, rp) = (legs.n[i], legs.s[i], legs.rp[i]);
        let map = joint_velocity_map(&rp);
        let map_t = map.transpose();
        let qdot_p = map * nu;
        let (m1, m2) = leg_mass_matrices(&n, s, params)?;
        let mass = m1 + m2;
        let ca = leg_coriolis(&n, s, &qdot_p, params)?;
        let forces = leg_applied_forces(&n, s, 0.0, params);

        mass_b += map_t * mass * map;
        bias_b += map_t * (ca * qdot_p + mass * omega.cross(&omega.cross(&rp)));
        gravity_b -= map_t * (forces.top_gravity + forces.bottom_gravity);
        force_map_b.set_column(i, &(map_t * n));
    }

    let mp = params.platform_mass;
    let c = rotation * geom.control_point;
    let c_map_t = joint_velocity_map(&c).transpose();
    let platform = platform_matrices(q, qdot, geom, params);
    mass_b += platform.mass;
    bias_b += platform.coriolis * nu + c_map_t * (omega.cross(&omega.cross(&c)) * mp);
    gravity_b -= c_map_t * (params.gravity * mp);

    let s_map = velocity_map(&q.r);
    let s_t = s_map.transpose();
    let mut accel_offset = Vector6::zeros();
    accel_offset.fixed_rows_mut::<3>(3).copy_from(&rate_bias);

    let mut mass = s_t * mass_b * s_map;
    crate::linalg::symmetrize(&mut mass);
    Ok(DynamicsMatrices {
        mass,
        coriolis: s_t * (bias_b + mass_b * accel_offset),
        gravity: s_t * gravity_b,
        force_map: s_t * force_map_b,
    })
}

/// Full equations of motion at `(q, q̇)`. Fails when a leg collapses or when
/// `H` is near-singular (condition number above [`MAX_FORCE_MAP_CONDITION`]).
pub fn assemble_eom(
    q: &Pose,
    qdot: &Twist,
    geom: &PlatformGeometry,
    params: &RigidBodyParams,
) -> Result<DynamicsMatrices> {
    let eom = assemble(q, qdot, geom, params)?;
    let condition = eom.force_map_condition();
    if !(condition <= MAX_FORCE_MAP_CONDITION) {
        return Err(Error::IllConditioned {
            what: "force map H",
            condition,
        });
    }
    Ok(eom)
}

/// `q̈` from `M q̈ = H F − C q̇ − G`.
pub fn forward_dynamics(
    q: &Pose,
    qdot: &Twist,
    forces: &Vector6<f64>,
    geom: &PlatformGeometry,
    params: &RigidBodyParams,
) -> Result<Vector6<f64>> {
    let eom = assemble(q, qdot, geom, params)?;
    let chol = guarded_cholesky(&eom.mass, "mass matrix M", MAX_MASS_CONDITION)?;
    Ok(chol.solve(&(eom.force_map * forces - eom.coriolis - eom.gravity)))
}

/// Actuator forces holding the platform still at `q`: `F = H⁻¹ G`.
pub fn gravity_compensation(q: &Pose, geom: &PlatformGeometry, params: &RigidBodyParams) -> Result<Vector6<f64>> {
    let eom = assemble_eom(q, &Twist::zero(), geom, params)?;
    crate::linalg::guarded_solve(&eom.force_map, &eom.gravity, "force map H", MAX_FORCE_MAP_CONDITION)
}

/// Total kinetic energy: platform translation and rotation plus
/// `½ q̇_pᵀ (M₁ + M₂) q̇_p` for every leg.
pub fn kinetic_energy(q: &Pose, qdot: &Twist, geom: &PlatformGeometry, params: &RigidBodyParams) -> Result<f64> {
    let legs = checked_legs(q, geom)?;
    let rotation = legs.rotation;
    let (omega, _) = base_rates(&q.r, &rotation, &qdot.rdot);
    let c = rotation * geom.control_point;
    let vc = qdot.v + omega.cross(&c);
    let inertia = rotation * params.platform_inertia * rotation.transpose();
    let mut energy = 0.5 * params.platform_mass * vc.norm_squared() + 0.5 * omega.dot(&(inertia * omega));
    for i in 0..6 {
        let qdot_p = qdot.v + omega.cross(&legs.rp[i]);
        let (m1, m2) = leg_mass_matrices(&legs.n[i], legs.s[i], params)?;
        energy += 0.5 * qdot_p.dot(&((m1 + m2) * qdot_p));
    }
    Ok(energy)
}

/// Gravitational potential whose negative gradient produces `G`.
pub fn potential_energy(q: &Pose, geom: &PlatformGeometry, params: &RigidBodyParams) -> Result<f64> {
    let legs = checked_legs(q, geom)?;
    let g = params.gravity;
    let c = q.t + legs.rotation * geom.control_point;
    let mut energy = -params.platform_mass * g.dot(&c);
    for i in 0..6 {
        let top = legs.q_p[i] - legs.n[i] * params.top_com;
        let bottom = geom.base[i] + legs.n[i] * params.bottom_com;
        energy -= params.top_mass * g.dot(&top) + params.bottom_mass * g.dot(&bottom);
    }
    Ok(energy)
}
