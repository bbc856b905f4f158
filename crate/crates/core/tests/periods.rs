mod common;

use common::*;
use kleinian2::periods::*;
use kleinian2::theta::Vec2;
use kleinian2::{AdmissiblePolynomial, Complex64 as C64};

#[test]
fn w5_and_g6_periods_certify() {
    for coeffs in [[0., -4., 0., 0., 0., 4., 0.], [-1., 0., 0., 0., 0., 0., 1.]] {
        let f = AdmissiblePolynomial::from_real(coeffs).unwrap();
        let pd = compute_period_data(&f, &PeriodOptions::default()).unwrap();
        assert!(pd.residuals.legendre < 1e-8, "{:?}", pd.residuals);
        assert!(pd.residuals.symmetry < 1e-9);
        assert!(pd.residuals.im_omega_min_eig > 0.0);
        assert!(pd.residuals.delta_certificate < DELTA_CERTIFICATE);
    }
}

#[test]
fn degree_five_riemann_constant_is_an_odd_half_period() {
    let fx = w5_fixture();
    let pd = &fx.pd;
    // 2Δ = m′ + Ω m″ with integer m′, m″ and m′·m″ odd
    let two_delta = pd.delta * C64::new(2.0, 0.0);
    let y = pd.omega.map(|z| z.im);
    let m2 = y.try_inverse().unwrap() * two_delta.map(|z| z.im);
    let m1 = two_delta.map(|z| z.re) - pd.omega.map(|z| z.re) * m2;
    for v in m1.iter().chain(m2.iter()) {
        assert!((v - v.round()).abs() < 1e-9, "{v}");
    }
    let dot = m1[0].round() as i64 * m2[0].round() as i64 + m1[1].round() as i64 * m2[1].round() as i64;
    assert_eq!(dot.rem_euclid(2), 1);
}

#[test]
fn eta_is_additive_on_the_lattice() {
    let pd = &g6_fixture().pd;
    let a = [1, 0, -1, 2];
    let b = [0, 2, 1, -1];
    let sum = [1, 2, 0, 1];
    let (wa, ea) = lattice(pd, a);
    let (wb, eb) = lattice(pd, b);
    let (ws, es) = lattice(pd, sum);
    assert!((wa + wb - ws).norm() < 1e-13);
    assert!((ea + eb - es).norm() < 1e-12);
    assert!((pd.lattice_vector(sum) - ws).norm() < 1e-13);
    assert!((pd.eta_of_lattice(sum) - es).norm() < 1e-12);
}

#[test]
fn lattice_reduction_agrees_with_real_coordinates() {
    let pd = &w5_fixture().pd;
    let z = Vec2::new(C64::new(3.7, -2.2), C64::new(-1.4, 5.1));
    let (reduced, _) = pd.lattice_reduce(&z).unwrap();
    let k = lattice_coords(pd, &reduced);
    for v in k {
        assert!((-1e-12..1.0 + 1e-12).contains(&v), "{k:?}");
    }
    assert!(lattice_distance(pd, &(z - reduced)) < 1e-12);
    let scale = max_abs(&pd.a).max(max_abs(&pd.b));
    assert!((pd.lattice_distance(&z).unwrap() * scale - lattice_distance(pd, &z)).abs() < 1e-12);
}

#[test]
fn json_round_trip_rebuilds_identical_data() {
    let fx = g6_fixture();
    let text = serde_json::to_string(&PeriodDataJson::from_data(&fx.pd)).unwrap();
    let back: PeriodDataJson = serde_json::from_str(&text).unwrap();
    let pd = back.to_data(&fx.f).unwrap();
    assert_eq!(pd.omega, fx.pd.omega);
    assert_eq!(pd.delta, fx.pd.delta);
    assert_eq!(pd.a, fx.pd.a);
    assert_eq!(pd.eta_b, fx.pd.eta_b);
    let err = back.to_data(&w5()).unwrap_err();
    assert_eq!(err.code(), "InvalidInputError");
}

#[test]
fn tampered_period_data_is_rejected() {
    let fx = w5_fixture();
    let mut json = PeriodDataJson::from_data(&fx.pd);
    json.eta_a[0][0] += 1e-3;
    assert!(json.to_data(&fx.f).is_err());
}

#[test]
fn explicit_chain_gives_an_equivalent_basis() {
    let fx = w5_fixture();
    let opts = PeriodOptions {
        chain: Some(vec![4, 3, 2, 1, 0]),
        ..Default::default()
    };
    let pd = compute_period_data(&fx.f, &opts).unwrap();
    assert_eq!(pd.cycles.order, vec![4, 3, 2, 1, 0]);
    // every new generator lies in the old lattice
    for col in [pd.a.column(0), pd.a.column(1), pd.b.column(0), pd.b.column(1)] {
        let v: Vec2 = col.into_owned();
        assert!(lattice_distance(&fx.pd, &v) < 1e-10);
    }
}
