use nalgebra::{SVector, Vector3, Vector6};
use proptest::prelude::*;
use stewart_core::control::{closed_loop, lqr_gain, riccati_residual, solve_care};
use stewart_core::estimation::{discretize, discretize_with, measurement_jacobian, measurement_model};
use stewart_core::sim::run_closed_loop;
use stewart_core::{
    join_state, Discretization, LqrWeights, PlatformGeometry, Pose, ScenarioKind, ScenarioSpec, SimSettings,
    StateVector, Twist,
};

fn weights() -> impl Strategy<Value = LqrWeights> {
    (
        prop::array::uniform6(0.1f64..500.0),
        prop::array::uniform6(0.0f64..50.0),
        prop::array::uniform6(0.1f64..50.0),
    )
        .prop_map(|(n1, n2, o)| {
            let mut state = SVector::<f64, 12>::zeros();
            for i in 0..6 {
                state[i] = n1[i];
                state[i + 6] = n2[i];
            }
            LqrWeights {
                state,
                input: Vector6::from_column_slice(&o),
            }
        })
}

fn state() -> impl Strategy<Value = StateVector> {
    (
        prop::array::uniform3(-0.05f64..0.05),
        0.28f64..0.40,
        prop::array::uniform3(-0.15f64..0.15),
        prop::array::uniform6(-0.5f64..0.5),
    )
        .prop_map(|(t, z, r, qd)| {
            let q = Pose::new(Vector3::new(t[0], t[1], z), Vector3::from(r));
            let qd = Vector6::from_column_slice(&qd);
            join_state(&q, &Twist::from_vector(&qd))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn care_solution_satisfies_riccati(w in weights()) {
        let d = solve_care(&w).unwrap();
        let residual = riccati_residual(&d, &w).amax();
        let scale = w.state.amax().max(1.0);
        prop_assert!(residual <= 1e-9 * scale, "residual {residual}");
        prop_assert!((d - d.transpose()).amax() == 0.0);
    }

    #[test]
    fn gains_match_closed_form(w in weights()) {
        let k = lqr_gain(&solve_care(&w).unwrap(), &w);
        for axis in 0..6 {
            let (n1, n2, o) = (w.state[axis], w.state[axis + 6], w.input[axis]);
            let k1 = (n1 / o).sqrt();
            let k2 = (n2 / o + 2.0 * k1).sqrt();
            let (g1, g2) = k.axis(axis);
            prop_assert!((g1 - k1).abs() <= 1e-9 * k1.max(1.0));
            prop_assert!((g2 - k2).abs() <= 1e-9 * k2.max(1.0));
        }
    }

    #[test]
    fn closed_loop_is_hurwitz(w in weights()) {
        let a = closed_loop(&lqr_gain(&solve_care(&w).unwrap(), &w));
        for ev in a.complex_eigenvalues().iter() {
            prop_assert!(ev.re < 0.0, "eigenvalue {ev}");
        }
    }

    #[test]
    fn gains_are_scale_invariant(w in weights(), c in 0.01f64..100.0) {
        let scaled = LqrWeights { state: w.state * c, input: w.input * c };
        let k = lqr_gain(&solve_care(&w).unwrap(), &w);
        let ks = lqr_gain(&solve_care(&scaled).unwrap(), &scaled);
        prop_assert!((k.0 - ks.0).amax() <= 1e-9 * k.0.amax());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn measurement_jacobian_matches_differences(x in state()) {
        let g = PlatformGeometry::default();
        let gamma = measurement_jacobian(&x, &g).unwrap();
        let h = 1e-6;
        for c in 0..12 {
            let mut plus = x;
            let mut minus = x;
            plus[c] += h;
            minus[c] -= h;
            let fd = (measurement_model(&plus, &g).unwrap().0 - measurement_model(&minus, &g).unwrap().0) / (2.0 * h);
            prop_assert!((gamma.column(c) - fd).amax() <= 1e-6, "column {c}");
        }
    }

    #[test]
    fn transition_composes(a in 0.0f64..0.1, b in 0.0f64..0.1) {
        let (da, _) = discretize(a);
        let (db, _) = discretize(b);
        let (dab, _) = discretize(a + b);
        prop_assert!((da * db - dab).amax() <= 1e-15);
    }
}

#[test]
fn zero_order_hold_integrates_constant_input_exactly() {
    let dt = 0.01;
    let u = Vector6::new(1.0, -2.0, 0.5, 0.1, -0.3, 0.2);
    let (a, b) = discretize_with(dt, Discretization::ZeroOrderHold);
    let mut x = StateVector::zeros();
    for _ in 0..100 {
        x = a * x + b * u;
    }
    for i in 0..6 {
        assert!((x[i] - 0.5 * u[i]).abs() < 1e-12);
        assert!((x[i + 6] - u[i]).abs() < 1e-12);
    }
}

#[test]
fn covariance_stays_symmetric_and_psd() {
    let mut scenario = ScenarioSpec::new(ScenarioKind::Step);
    scenario.duration = 12.0;
    let records = run_closed_loop(&scenario, &SimSettings::default()).unwrap();
    assert_eq!(records.len(), 1201);
    for r in &records {
        assert!(r.cov_asymmetry <= 1e-10);
        assert!(r.cov_min_eigenvalue >= -1e-9);
    }
}

#[test]
fn runs_are_deterministic() {
    let mut scenario = ScenarioSpec::new(ScenarioKind::Sinusoid);
    scenario.duration = 2.0;
    let settings = SimSettings::default();
    let a = run_closed_loop(&scenario, &settings).unwrap();
    let b = run_closed_loop(&scenario, &settings).unwrap();
    assert_eq!(a, b);
    let mut other = settings.clone();
    other.noise.seed += 1;
    let c = run_closed_loop(&scenario, &other).unwrap();
    assert_ne!(a.last().unwrap().measurement, c.last().unwrap().measurement);
}

#[test]
fn perfect_state_tracks_step_hold() {
    let mut scenario = ScenarioSpec::new(ScenarioKind::Step);
    scenario.duration = 20.0;
    let settings = SimSettings {
        perfect_state: true,
        ..SimSettings::default()
    };
    let records = run_closed_loop(&scenario, &settings).unwrap();
    let settled = &records[1999];
    assert!((settled.t - 19.99).abs() < 1e-12);
    assert!(settled.e_t < 2e-3, "e_t {}", settled.e_t);
}
