mod common;

use common::*;
use kleinian2::kleinian::*;
use kleinian2::theta::Vec2;
use kleinian2::Divisor;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn z(a: f64, b: f64, c_: f64, d: f64) -> Vec2 {
    Vec2::new(c(a, b), c(c_, d))
}

#[test]
fn weight_two_values_at_origin() {
    for fx in [w5_fixture(), g6_fixture()] {
        let zero = Vec2::zeros();
        assert!(fx.ctx.s_eval(&zero).unwrap().norm() < 1e-12);
        let [s11, s12, s22] = fx.ctx.s_jk_eval(&zero).unwrap();
        assert!((s11 - 1.0).norm() < 1e-7);
        assert!(s12.norm() < 1e-7 && s22.norm() < 1e-7);
    }
}

#[test]
fn s_is_even_and_vanishes_on_the_curve_image() {
    let fx = g6_fixture();
    let p = z(0.21, -0.13, 0.4, 0.27);
    assert!(rel(fx.ctx.s_eval(&p).unwrap(), fx.ctx.s_eval(&(-p)).unwrap()) < 1e-10);
    for x in [c(0.3, 0.2), c(-0.7, 0.45), c(1.3, -0.6)] {
        for idx in [1u8, 2] {
            let d = Divisor::new(fx.f.point_over(x, 1.0), fx.f.infinity(idx));
            let w = fx.ctx.abel_forward(&d).unwrap();
            assert!(fx.ctx.s_relative(&w).unwrap() < 1e-9);
        }
    }
}

#[test]
fn wp_matches_divisor_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for fx in [w5_fixture(), g6_fixture()] {
        for _ in 0..5 {
            let d = random_divisor(&fx.f, &mut rng);
            let w = fx.ctx.abel_forward(&d).unwrap();
            let wp = fx.ctx.wp_eval(&w).unwrap();
            let want = xi_oracle(&fx.f, &d);
            for k in 0..3 {
                assert!(rel_floor(wp[k], want[k]) < 1e-9, "{k}: {} vs {}", wp[k], want[k]);
            }
        }
    }
}

#[test]
fn wp_is_a_pole_at_origin() {
    let fx = w5_fixture();
    let e = fx.ctx.wp_eval(&Vec2::zeros()).unwrap_err();
    assert_eq!(e.code(), "OnThetaDivisorError");
}

#[test]
fn quartic_matrix_vanishes_at_wp_values() {
    let fx = g6_fixture();
    let p = z(-0.31, 0.12, 0.08, -0.44);
    let wp = fx.ctx.wp_eval(&p).unwrap();
    assert!(quartic_residual(&fx.f, wp) < 1e-12);
    assert!(quartic_scaled(&fx.f, wp) < 1e-12);
    let m = quartic_matrix(&fx.f, wp[0], wp[1], wp[2]);
    let oracle = quartic_entries(&fx.f, wp);
    for i in 0..4 {
        for j in 0..4 {
            assert!((m[(i, j)] - oracle[i][j]).norm() < 1e-14);
        }
    }
}

#[test]
fn wp_from_log_hessian_inverts_the_second_derivative_identities() {
    // build L from chosen ℘ values, then recover them
    let f = g6();
    let fx = g6_fixture();
    let wp = fx.ctx.wp_eval(&z(0.17, 0.05, -0.23, 0.31)).unwrap();
    let k = f.coeffs();
    let (f5, f6) = (k[5], k[6]);
    let [p11, p12, p22] = wp;
    let l11 = -p11 * 2.0 - f6 * p12 * p12;
    let l12 = -f5 / 2.0 * p12 - f6 * p12 * p22;
    let l22 = -f5 / 2.0 * p22 - f6 * (p22 * p22 + p12);
    let got = wp_from_log_hessian(&f, [[l11, l12], [l12, l22]], 1e-7).unwrap();
    for i in 0..3 {
        assert!(rel_floor(got[i], wp[i]) < 1e-10);
    }
}

#[test]
fn log_hessian_matches_finite_differences() {
    let fx = w5_fixture();
    let p = z(0.13, -0.08, 0.27, 0.19);
    let l = fx.ctx.log_s_hessian(&p).unwrap();
    let s0 = fx.ctx.s_eval(&p).unwrap();
    // the ratio stays near 1, away from the branch cut of ln
    let ln_s = |q: &Vec2| (fx.ctx.s_eval(q).unwrap() / s0).ln();
    for i in 0..2 {
        for j in 0..2 {
            let approx = fd(|q: &Vec2| fd(ln_s, q, j, 1e-3), &p, i, 1e-3);
            assert!(rel_floor(approx, l[i][j]) < 1e-7);
        }
    }
    let g = fx.ctx.log_s_grad(&p).unwrap();
    for i in 0..2 {
        let approx = fd(ln_s, &p, i, 1e-4);
        assert!(rel_floor(approx, g[i]) < 1e-9, "{approx} vs {}", g[i]);
    }
}

#[test]
fn weight2_gradients_match_finite_differences() {
    let fx = g6_fixture();
    let p = z(0.02, 0.01, -0.03, 0.02);
    let g = fx.ctx.weight2_grads(&p).unwrap();
    let value = |k: usize| {
        move |q: &Vec2| {
            if k == 0 {
                fx.ctx.s_eval(q).unwrap()
            } else {
                fx.ctx.s_jk_eval(q).unwrap()[k - 1]
            }
        }
    };
    for k in 0..4 {
        for i in 0..2 {
            let approx = fd(value(k), &p, i, 1e-3);
            assert!((approx - g[k][i]).norm() < 1e-8, "k={k} i={i}: {approx} vs {}", g[k][i]);
        }
    }
}

#[test]
fn sigma_is_odd_with_unit_slope() {
    let fx = w5_fixture();
    let p = z(0.11, 0.07, -0.2, 0.15);
    let a = fx.ctx.sigma_eval(&p).unwrap();
    let b = fx.ctx.sigma_eval(&(-p)).unwrap();
    assert!(rel(a, -b) < 1e-12);
    let s = fx.ctx.s_eval(&p).unwrap();
    assert!(rel(a * a, s) < 1e-10);
    let h = 1e-4;
    let slope = fx.ctx.sigma_eval(&z(h, 0.0, 0.0, 0.0)).unwrap() / h;
    assert!((slope - 1.0).norm() < 1e-6, "{slope}");
}

#[test]
fn sigma_log_derivatives_match_finite_differences() {
    let fx = w5_fixture();
    let p = z(0.09, 0.21, 0.14, -0.12);
    let ld = fx.ctx.sigma_log_derivs(&p).unwrap();
    let s0 = fx.ctx.sigma_eval(&p).unwrap();
    let ln_sigma = |q: &Vec2| (fx.ctx.sigma_eval(q).unwrap() / s0).ln();
    for j in 0..2 {
        assert!(rel_floor(fd(ln_sigma, &p, j, 1e-3), ld.zeta[j]) < 1e-9);
    }
    // ℘jkl = −∂³ ln σ, checked against differences of ℘jk
    let wp = |k: usize| move |q: &Vec2| fx.ctx.wp_eval(q).unwrap()[k];
    let third = [(0, 0), (1, 0), (2, 0), (2, 1)];
    for (slot, (k, dir)) in third.iter().enumerate() {
        let approx = fd(wp(*k), &p, *dir, 1e-4);
        assert!(rel_floor(approx, ld.wp3[slot]) < 1e-7, "slot {slot}");
    }
}

#[test]
fn sigma_needs_weierstrass_form() {
    let fx = g6_fixture();
    let e = fx.ctx.sigma_eval(&z(0.1, 0.0, 0.2, 0.0)).unwrap_err();
    assert_eq!(e.code(), "NotWeierstrassFormError");
}

#[test]
fn rho_lambda_agrees_with_log_gradient() {
    let fx = g6_fixture();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..4 {
        let d = random_divisor(&fx.f, &mut rng);
        let rl = fx.ctx.rho_lambda_eval(&d).unwrap();
        let (x1, y1) = affine(&d.p);
        let (x2, y2) = affine(&d.q);
        assert!((rl.lambda - (y1 - y2) / (x1 - x2)).norm() < 1e-14);
        let g = fx.ctx.log_s_grad(&rl.z).unwrap();
        assert!(rel_floor(g[0], -2.0 * rl.rho[0] + rl.lambda) < 1e-9);
        assert!(rel_floor(g[1], -2.0 * rl.rho[1]) < 1e-9);
    }
}

#[test]
fn jacobi_inversion_recovers_the_divisor() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for fx in [w5_fixture(), g6_fixture()] {
        for _ in 0..4 {
            let d = random_divisor(&fx.f, &mut rng);
            let w = fx.ctx.abel_forward(&d).unwrap();
            let e = fx.ctx.jacobi_invert(&w).unwrap();
            assert!(e.approx_eq(&d, 1e-8), "{d:?} vs {e:?}");
        }
    }
}

#[test]
fn abel_map_is_independent_of_the_route() {
    let fx = w5_fixture();
    let d = Divisor::new(fx.f.point_over(c(0.4, 0.3), 1.0), fx.f.point_over(c(-0.6, 0.5), -1.0));
    let base = fx.ctx.abel_forward(&d).unwrap();
    for via in 0..5 {
        let w = fx.ctx.abel_forward_via(&d, via).unwrap();
        assert!(lattice_distance(&fx.pd, &(w - base)) < 1e-10, "via {via}");
    }
}

#[test]
fn eval_bundle_omits_undefined_values() {
    let fx = w5_fixture();
    let b = fx.ctx.eval_bundle(&Vec2::zeros(), true).unwrap();
    assert!(b.p11.is_none() && b.sigma.is_some());
    let json = serde_json::to_value(EvalBundleJson::from(&b)).unwrap();
    assert!(json.get("p11").is_none());
    assert!(json.get("S11").is_some());
    let b = fx.ctx.eval_bundle(&z(0.1, 0.1, 0.2, -0.1), false).unwrap();
    assert!(b.p22.is_some() && b.sigma.is_none());
}

#[test]
fn loose_identity_tolerance_makes_root_selection_ambiguous() {
    let fx = g6_fixture();
    let l = fx.ctx.log_s_hessian(&z(0.17, 0.05, -0.23, 0.31)).unwrap();
    assert!(wp_from_log_hessian(&fx.f, l, 1e-7).is_ok());
    let e = wp_from_log_hessian(&fx.f, l, 1e3).unwrap_err();
    assert_eq!(e.code(), "RootSelectionAmbiguity");
}

#[test]
fn lattice_translates_give_equal_wp() {
    let fx = g6_fixture();
    let p = z(0.17, 0.05, -0.23, 0.31);
    let (w, _) = lattice(&fx.pd, [1, -1, 2, 0]);
    let a = fx.ctx.wp_eval(&p).unwrap();
    let b = fx.ctx.wp_eval(&(p + w)).unwrap();
    for k in 0..3 {
        assert!(rel_floor(a[k], b[k]) < 1e-9);
    }
}
