use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::Vector6;
use std::hint::black_box;
use stewart_bench::Fixture;
use stewart_core::control::{feedback_linearize, lqr_gain, solve_care};
use stewart_core::dynamics::{assemble_eom, forward_dynamics};
use stewart_core::estimation::{self, initialize, measurement_jacobian, measurement_model};
use stewart_core::geometry::{forward_kinematics, inverse_kinematics};
use stewart_core::sim::{integrate_plant, run_closed_loop, CONTROL_PERIOD, DEFAULT_SUBSTEPS};
use stewart_core::{Discretization, LqrWeights, NoiseCovariances, Pose, ScenarioKind, ScenarioSpec, SimSettings};

fn kinematics(c: &mut Criterion) {
    let fx = Fixture::default();
    let lengths = inverse_kinematics(&fx.pose, &fx.geometry).unwrap().s;
    c.bench_function("inverse_kinematics", |b| {
        b.iter(|| inverse_kinematics(black_box(&fx.pose), &fx.geometry))
    });
    c.bench_function("forward_kinematics", |b| {
        b.iter(|| forward_kinematics(black_box(&lengths), &Pose::home(), &fx.geometry))
    });
}

fn dynamics(c: &mut Criterion) {
    let fx = Fixture::default();
    let u = Vector6::new(0.3, -0.2, 0.1, 0.5, -0.4, 0.2);
    c.bench_function("assemble_eom", |b| {
        b.iter(|| assemble_eom(black_box(&fx.pose), black_box(&fx.twist), &fx.geometry, &fx.params))
    });
    c.bench_function("forward_dynamics", |b| {
        b.iter(|| {
            forward_dynamics(
                black_box(&fx.pose),
                &fx.twist,
                black_box(&fx.forces),
                &fx.geometry,
                &fx.params,
            )
        })
    });
    c.bench_function("feedback_linearize", |b| {
        b.iter(|| feedback_linearize(black_box(&fx.pose), &fx.twist, black_box(&u), &fx.geometry, &fx.params))
    });
    c.bench_function("integrate_control_period", |b| {
        b.iter(|| {
            integrate_plant(
                black_box(&fx.state),
                &fx.forces,
                CONTROL_PERIOD,
                DEFAULT_SUBSTEPS,
                &fx.geometry,
                &fx.params,
            )
        })
    });
}

fn estimation_and_control(c: &mut Criterion) {
    let fx = Fixture::default();
    let cov = NoiseCovariances::default();
    let z = measurement_model(&fx.state, &fx.geometry).unwrap();
    let ekf = initialize(&z.lengths(), &fx.geometry, &cov.initial).unwrap();
    let u = Vector6::zeros();
    c.bench_function("measurement_jacobian", |b| {
        b.iter(|| measurement_jacobian(black_box(&fx.state), &fx.geometry))
    });
    c.bench_function("ekf_step", |b| {
        b.iter(|| {
            estimation::step(
                black_box(&ekf),
                &u,
                black_box(&z),
                CONTROL_PERIOD,
                Discretization::ForwardEuler,
                &cov,
                &fx.geometry,
            )
        })
    });
    let weights = LqrWeights::default();
    c.bench_function("lqr_design", |b| {
        b.iter(|| solve_care(black_box(&weights)).map(|d| lqr_gain(&d, &weights)))
    });
}

fn scenario(c: &mut Criterion) {
    let mut spec = ScenarioSpec::new(ScenarioKind::Sinusoid);
    spec.duration = 1.0;
    let settings = SimSettings::default();
    let mut group = c.benchmark_group("closed_loop");
    group.sample_size(20);
    group.bench_function("sinusoid_1s", |b| {
        b.iter(|| run_closed_loop(black_box(&spec), &settings))
    });
    group.finish();
}

criterion_group!(benches, kinematics, dynamics, estimation_and_control, scenario);
criterion_main!(benches);
