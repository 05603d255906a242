//! Joint layout, rotation conventions and kinematics.
//!
//! Frames: `{B}` is fixed to the base, `{P}` to the moving platform. A pose is
//! the translation `t` of `{P}` in `{B}` plus ZYX Euler angles
//! `r = [φ, θ, ψ]` (roll, pitch, yaw) so that `R = Rz(ψ) Ry(θ) Rx(φ)` maps
//! `{P}` vectors into `{B}`.
//!
//! Joint pairing: base joints sit at `c_k ∓ δ` around the base pair centers
//! and platform joints at `d_k ∓ δ`, with `d_k` rotated +60° from `c_k`. The
//! leg leaving `c_k + δ` lands on `d_k + δ` and the leg leaving `c_k − δ` lands
//! on `d_{k−1} − δ`, so every platform joint is its base joint turned 60° away
//! from its pair partner. With the default layout b₁ = −20° → p₁ = 280°,
//! b₂ = 20° → p₂ = 80°, b₃ = 100° → p₃ = 40°, and so on. All six legs have the
//! same length at any centered, level pose.

use nalgebra::{Matrix3, Matrix3x6, Matrix6, RowVector3, Vector3, Vector6};

use crate::linalg::condition_number;
use crate::{Error, Result};

/// Minimum distance from `|θ| = π/2` before the Euler-rate map is refused.
pub const PITCH_SINGULARITY_MARGIN: f64 = 1e-3;

/// Legs shorter than this are treated as collapsed by the kinematics.
pub const MIN_LEG_LENGTH: f64 = 1e-9;

pub const FK_TOLERANCE: f64 = 1e-12;
pub const FK_MAX_ITERATIONS: usize = 100;
pub const FK_MAX_CONDITION: f64 = 1e12;

/// Default height of the platform frame above the base in the home pose.
pub const HOME_HEIGHT: f64 = 0.32;

/// Ring description from which the joints are generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLayout {
    pub base_radius: f64,
    pub platform_radius: f64,
    pub base_pair_centers: [f64; 3],
    pub platform_pair_centers: [f64; 3],
    pub pair_half_offset: f64,
}

impl Default for JointLayout {
    fn default() -> Self {
        JointLayout {
            base_radius: 0.20,
            platform_radius: 0.16,
            base_pair_centers: [0.0, 120f64.to_radians(), 240f64.to_radians()],
            platform_pair_centers: [60f64.to_radians(), 180f64.to_radians(), 300f64.to_radians()],
            pair_half_offset: 20f64.to_radians(),
        }
    }
}

/// Joint locations of the six legs.
#[derive(Debug, Clone, PartialEq)]
pub struct PlatformGeometry {
    /// `b_i` in `{B}`.
    pub base: [Vector3<f64>; 6],
    /// `p_i` in `{P}`.
    pub platform: [Vector3<f64>; 6],
    /// Control point `c_p` in `{P}`.
    pub control_point: Vector3<f64>,
    /// Present when the joints were generated from ring parameters.
    pub layout: Option<JointLayout>,
}

impl Default for PlatformGeometry {
    fn default() -> Self {
        Self::from_layout(JointLayout::default(), Vector3::zeros()).expect("default layout is valid")
    }
}

fn on_ring(radius: f64, angle: f64) -> Vector3<f64> {
    Vector3::new(radius * angle.cos(), radius * angle.sin(), 0.0)
}

impl PlatformGeometry {
    pub fn build(
        base_radius: f64,
        platform_radius: f64,
        base_pair_centers: [f64; 3],
        platform_pair_centers: [f64; 3],
        pair_half_offset: f64,
        control_point: Vector3<f64>,
    ) -> Result<Self> {
        Self::from_layout(
            JointLayout {
                base_radius,
                platform_radius,
                base_pair_centers,
                platform_pair_centers,
                pair_half_offset,
            },
            control_point,
        )
    }

    pub fn from_layout(layout: JointLayout, control_point: Vector3<f64>) -> Result<Self> {
        for r in [layout.base_radius, layout.platform_radius] {
            if !(r > 0.0) {
                return Err(Error::NonPositiveRadius(r));
            }
        }
        let delta = layout.pair_half_offset;
        let mut base = [Vector3::zeros(); 6];
        let mut platform = [Vector3::zeros(); 6];
        for k in 0..3 {
            let c = layout.base_pair_centers[k];
            let d_this = layout.platform_pair_centers[k];
            let d_prev = layout.platform_pair_centers[(k + 2) % 3];
            base[2 * k] = on_ring(layout.base_radius, c - delta);
            platform[2 * k] = on_ring(layout.platform_radius, d_prev - delta);
            base[2 * k + 1] = on_ring(layout.base_radius, c + delta);
            platform[2 * k + 1] = on_ring(layout.platform_radius, d_this + delta);
        }
        Ok(PlatformGeometry {
            base,
            platform,
            control_point,
            layout: Some(layout),
        })
    }

    /// Geometry from explicit joint coordinates.
    pub fn from_joints(base: [Vector3<f64>; 6], platform: [Vector3<f64>; 6], control_point: Vector3<f64>) -> Self {
        PlatformGeometry {
            base,
            platform,
            control_point,
            layout: None,
        }
    }
}

/// Platform pose: translation of `{P}` and ZYX Euler angles `[φ, θ, ψ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub t: Vector3<f64>,
    pub r: Vector3<f64>,
}

impl Pose {
    pub fn new(t: Vector3<f64>, r: Vector3<f64>) -> Self {
        Pose { t, r }
    }

    /// Level platform centered over the base at [`HOME_HEIGHT`].
    pub fn home() -> Self {
        Pose {
            t: Vector3::new(0.0, 0.0, HOME_HEIGHT),
            r: Vector3::zeros(),
        }
    }

    pub fn from_vector(q: &Vector6<f64>) -> Self {
        Pose {
            t: q.fixed_rows::<3>(0).into_owned(),
            r: q.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(self.t.x, self.t.y, self.t.z, self.r.x, self.r.y, self.r.z)
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        rotation_zyx(&self.r)
    }

    pub fn check_pitch(&self) -> Result<()> {
        check_pitch(self.r.y)
    }
}

/// Generalized velocity: `[ṫ; ṙ]` with Euler-angle rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist {
    pub v: Vector3<f64>,
    pub rdot: Vector3<f64>,
}

impl Twist {
    pub fn new(v: Vector3<f64>, rdot: Vector3<f64>) -> Self {
        Twist { v, rdot }
    }

    pub fn zero() -> Self {
        Twist {
            v: Vector3::zeros(),
            rdot: Vector3::zeros(),
        }
    }

    pub fn from_vector(qd: &Vector6<f64>) -> Self {
        Twist {
            v: qd.fixed_rows::<3>(0).into_owned(),
            rdot: qd.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(self.v.x, self.v.y, self.v.z, self.rdot.x, self.rdot.y, self.rdot.z)
    }
}

/// Per-leg vectors for one pose.
#[derive(Debug, Clone, PartialEq)]
pub struct LegKinematics {
    /// Leg vectors `l_i = t + R p_i − b_i` in `{B}`.
    pub l: [Vector3<f64>; 6],
    /// Lengths `s_i = ‖l_i‖`.
    pub s: [f64; 6],
    /// Unit vectors `n_i = l_i / s_i`.
    pub n: [Vector3<f64>; 6],
    /// Platform joint positions `t + R p_i` in `{B}`.
    pub q_p: [Vector3<f64>; 6],
    /// Platform joint offsets `R p_i` in `{B}`.
    pub rp: [Vector3<f64>; 6],
    pub rotation: Matrix3<f64>,
}

pub fn check_pitch(theta: f64) -> Result<()> {
    if theta.abs() < std::f64::consts::FRAC_PI_2 - PITCH_SINGULARITY_MARGIN {
        Ok(())
    } else {
        Err(Error::SingularPitch { theta })
    }
}

/// `R = Rz(ψ) Ry(θ) Rx(φ)` for `r = [φ, θ, ψ]`.
pub fn rotation_zyx(r: &Vector3<f64>) -> Matrix3<f64> {
    let (sf, cf) = r.x.sin_cos();
    let (st, ct) = r.y.sin_cos();
    let (sp, cp) = r.z.sin_cos();
    Matrix3::new(
        cp * ct,
        cp * st * sf - sp * cf,
        cp * st * cf + sp * sf,
        sp * ct,
        sp * st * sf + cp * cf,
        sp * st * cf - cp * sf,
        -st,
        ct * sf,
        ct * cf,
    )
}

/// Cross-product matrix: `skew(v) w = v × w`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// `T(φ, θ)` with `ω_p = T ṙ`.
pub fn euler_rate_matrix(r: &Vector3<f64>) -> Matrix3<f64> {
    let (sf, cf) = r.x.sin_cos();
    let (st, ct) = r.y.sin_cos();
    Matrix3::new(1.0, 0.0, -st, 0.0, cf, ct * sf, 0.0, -sf, ct * cf)
}

/// `∂(T(r) ṙ)/∂r`, the sensitivity of the body rate to the angles.
pub fn euler_rate_sensitivity(r: &Vector3<f64>, rdot: &Vector3<f64>) -> Matrix3<f64> {
    let (sf, cf) = r.x.sin_cos();
    let (st, ct) = r.y.sin_cos();
    let (_, td, pd) = (rdot.x, rdot.y, rdot.z);
    Matrix3::new(
        0.0,
        -ct * pd,
        0.0,
        -sf * td + ct * cf * pd,
        -st * sf * pd,
        0.0,
        -cf * td - ct * sf * pd,
        -st * cf * pd,
        0.0,
    )
}

/// `Ṫ ṙ`: the part of `ω̇_p` not driven by `r̈`.
pub fn euler_rate_bias(r: &Vector3<f64>, rdot: &Vector3<f64>) -> Vector3<f64> {
    euler_rate_sensitivity(r, rdot) * rdot
}

pub fn euler_rate_to_body_rate(r: &Vector3<f64>, rdot: &Vector3<f64>) -> Result<Vector3<f64>> {
    check_pitch(r.y)?;
    Ok(euler_rate_matrix(r) * rdot)
}

/// `ω = R ω_p`, the vector form of `ω̃ = R ω̃_p Rᵀ`.
pub fn body_rate_to_base_rate(rotation: &Matrix3<f64>, omega_p: &Vector3<f64>) -> Vector3<f64> {
    rotation * omega_p
}

/// `S = blockdiag(I, R T)`, mapping `[ṫ; ṙ]` to base quasi-velocities `[v; ω]`.
pub fn velocity_map(r: &Vector3<f64>) -> Matrix6<f64> {
    let mut s = Matrix6::identity();
    s.fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&(rotation_zyx(r) * euler_rate_matrix(r)));
    s
}

/// Base-frame angular velocity `ω` and the acceleration offset `R Ṫ ṙ`.
pub(crate) fn base_rates(
    r: &Vector3<f64>,
    rotation: &Matrix3<f64>,
    rdot: &Vector3<f64>,
) -> (Vector3<f64>, Vector3<f64>) {
    let omega = rotation * (euler_rate_matrix(r) * rdot);
    let bias = rotation * euler_rate_bias(r, rdot);
    (omega, bias)
}

/// `[I | R p̃ᵀ Rᵀ]` for a joint offset `R p` already expressed in `{B}`.
pub fn joint_velocity_map(rp: &Vector3<f64>) -> Matrix3x6<f64> {
    let mut m = Matrix3x6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).fill_with_identity();
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-skew(rp)));
    m
}

pub fn inverse_kinematics(q: &Pose, geom: &PlatformGeometry) -> Result<LegKinematics> {
    let rotation = q.rotation();
    let mut out = LegKinematics {
        l: [Vector3::zeros(); 6],
        s: [0.0; 6],
        n: [Vector3::zeros(); 6],
        q_p: [Vector3::zeros(); 6],
        rp: [Vector3::zeros(); 6],
        rotation,
    };
    for i in 0..6 {
        let rp = rotation * geom.platform[i];
        let q_p = q.t + rp;
        let l = q_p - geom.base[i];
        let s = l.norm();
        if !(s >= MIN_LEG_LENGTH) {
            return Err(Error::LegCollapse { leg: i, length: s });
        }
        out.rp[i] = rp;
        out.q_p[i] = q_p;
        out.l[i] = l;
        out.s[i] = s;
        out.n[i] = l / s;
    }
    Ok(out)
}

/// Platform joint velocities `q̇_pi = v + ω × R p_i`.
pub fn joint_velocity(q: &Pose, qdot: &Twist, geom: &PlatformGeometry) -> [Vector3<f64>; 6] {
    let rotation = q.rotation();
    let omega = rotation * (euler_rate_matrix(&q.r) * qdot.rdot);
    let mut out = [Vector3::zeros(); 6];
    for (i, v) in out.iter_mut().enumerate() {
        let rp = rotation * geom.platform[i];
        *v = qdot.v + omega.cross(&rp);
    }
    out
}

/// `ṡ_i = n_iᵀ q̇_pi`.
pub fn leg_rate(legs: &LegKinematics, qdot_p: &[Vector3<f64>; 6]) -> [f64; 6] {
    std::array::from_fn(|i| legs.n[i].dot(&qdot_p[i]))
}

/// Velocities of the top (moving) and bottom (static) leg parts' centers of
/// mass, `l_t` from the platform joint and `l_b` from the base joint.
#[derive(Debug, Clone, PartialEq)]
pub struct LegPartVelocities {
    pub top: [Vector3<f64>; 6],
    pub bottom: [Vector3<f64>; 6],
}

pub fn leg_part_velocities(legs: &LegKinematics, qdot_p: &[Vector3<f64>; 6], l_t: f64, l_b: f64) -> LegPartVelocities {
    let mut out = LegPartVelocities {
        top: [Vector3::zeros(); 6],
        bottom: [Vector3::zeros(); 6],
    };
    for (i, v) in qdot_p.iter().enumerate() {
        let nt = skew(&legs.n[i]);
        let s = legs.s[i];
        out.top[i] = (Matrix3::identity() + nt * nt * (l_t / s)) * v;
        out.bottom[i] = (nt.transpose() * nt * (l_b / s)) * v;
    }
    out
}

/// Leg angular velocities `ω_li = ñ_i q̇_pi / s_i`.
pub fn leg_angular_velocity(legs: &LegKinematics, qdot_p: &[Vector3<f64>; 6]) -> [Vector3<f64>; 6] {
    std::array::from_fn(|i| legs.n[i].cross(&qdot_p[i]) / legs.s[i])
}

/// Leg-rate Jacobian with respect to base quasi-velocities `[v; ω]`:
/// row i is `[n_iᵀ, n_iᵀ R p̃_iᵀ Rᵀ]`.
pub fn kinematic_jacobian_base(q: &Pose, geom: &PlatformGeometry) -> Result<Matrix6<f64>> {
    let legs = inverse_kinematics(q, geom)?;
    Ok(jacobian_rows(&legs))
}

pub(crate) fn jacobian_rows(legs: &LegKinematics) -> Matrix6<f64> {
    let mut j = Matrix6::zeros();
    for i in 0..6 {
        let n = legs.n[i];
        let moment = legs.rp[i].cross(&n);
        j.fixed_view_mut::<1, 3>(i, 0)
            .copy_from(&RowVector3::new(n.x, n.y, n.z));
        j.fixed_view_mut::<1, 3>(i, 3)
            .copy_from(&RowVector3::new(moment.x, moment.y, moment.z));
    }
    j
}

/// Leg-rate Jacobian in state coordinates: `ṡ = J [ṫ; ṙ]`, equal to
/// `∂s/∂q` for `q = [t; r]`.
pub fn kinematic_jacobian(q: &Pose, geom: &PlatformGeometry) -> Result<Matrix6<f64>> {
    Ok(kinematic_jacobian_base(q, geom)? * velocity_map(&q.r))
}

/// Newton-Raphson solve of `s(q) = lengths` starting from `guess`.
pub fn forward_kinematics(lengths: &[f64; 6], guess: &Pose, geom: &PlatformGeometry) -> Result<Pose> {
    let target = Vector6::from_column_slice(lengths);
    let mut q = guess.to_vector();
    let mut residual = f64::INFINITY;
    for _ in 0..=FK_MAX_ITERATIONS {
        let pose = Pose::from_vector(&q);
        let legs = inverse_kinematics(&pose, geom)?;
        let err = Vector6::from_column_slice(&legs.s) - target;
        residual = err.amax();
        if !residual.is_finite() {
            break;
        }
        if residual <= FK_TOLERANCE {
            return Ok(pose);
        }
        let j = jacobian_rows(&legs) * velocity_map(&pose.r);
        let condition = condition_number(&j);
        if !(condition <= FK_MAX_CONDITION) {
            return Err(Error::IllConditioned {
                what: "kinematic Jacobian",
                condition,
            });
        }
        let step = j.lu().solve(&err).ok_or(Error::IllConditioned {
            what: "kinematic Jacobian",
            condition: f64::INFINITY,
        })?;
        q -= step;
    }
    Err(Error::NoConvergence {
        iterations: FK_MAX_ITERATIONS,
        residual,
    })
}
