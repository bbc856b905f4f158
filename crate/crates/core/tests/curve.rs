use kleinian2::curve::*;
use kleinian2::{Complex64 as C64, Error};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn w5() -> AdmissiblePolynomial {
    AdmissiblePolynomial::from_real([0., -4., 0., 0., 0., 4., 0.]).unwrap()
}

fn g6() -> AdmissiblePolynomial {
    AdmissiblePolynomial::from_real([-1., 0., 0., 0., 0., 0., 1.]).unwrap()
}

#[test]
fn validation_flags() {
    let f = w5();
    assert_eq!(f.degree(), 5);
    assert!(f.is_weierstrass_form());
    let g = g6();
    assert_eq!(g.degree(), 6);
    assert!(!g.is_weierstrass_form());
}

#[test]
fn validation_errors() {
    // x^5 - 2x^4 + x^3 = x^3 (x - 1)^2
    let e = AdmissiblePolynomial::from_real([0., 0., 0., 1., -2., 1., 0.]).unwrap_err();
    assert_eq!(e.code(), "RepeatedRootError");
    let e = AdmissiblePolynomial::from_real([1., 0., 0., 0., 1., 0., 0.]).unwrap_err();
    assert_eq!(e, Error::Degree);
}

#[test]
fn w5_branch_points() {
    let f = w5();
    let expect = [c(-1., 0.), c(0., -1.), c(0., 0.), c(0., 1.), c(1., 0.)];
    for (a, b) in f.branch_points().iter().zip(expect) {
        assert!((a - b).norm() < 1e-14);
    }
}

#[test]
fn g6_branch_points_are_sixth_roots_of_unity() {
    let f = g6();
    assert_eq!(f.branch_points().len(), 6);
    for r in f.branch_points() {
        assert!((r.powu(6) - 1.0).norm() < 1e-13);
    }
    for w in f.branch_points().windows(2) {
        assert!(w[0].re <= w[1].re + 1e-12);
    }
}

#[test]
fn big_f_examples() {
    let g = g6();
    assert!((g.big_f(c(1., 0.), c(2., 0.)) - c(14., 0.)).norm() < 1e-14);
    let f = AdmissiblePolynomial::from_real([3., 1., 2., 5., -1., 4., 0.5]).unwrap();
    assert_eq!(f.big_f(c(0., 0.), c(0., 0.)), c(6., 0.));
    let a = c(0.3, -1.1);
    assert!((f.big_f(a, a) - f.eval(a) * 2.0).norm() < 1e-12);
}

#[test]
fn xi_examples() {
    let g = g6();
    let p = g.point_over(c(1., 2.), 1.0);
    let q = g.point_over(c(3., 0.), 1.0);
    let xi = g.xi(&Divisor::new(p, q)).unwrap();
    assert!((xi[2] - c(4., 2.)).norm() < 1e-13);
    assert!((xi[1] - c(-3., -6.)).norm() < 1e-13);

    let s63 = 63f64.sqrt();
    let d = Divisor::new(
        g.point(c(0., 0.), c(0., 1.)).unwrap(),
        g.point(c(2., 0.), c(s63, 0.)).unwrap(),
    );
    let xi = g.xi(&d).unwrap();
    let expect = c(-2.0, -2.0 * s63) / 16.0;
    assert!((xi[0] - expect).norm() < 1e-14);
}

#[test]
fn xi_special_and_infinite() {
    let g = g6();
    let p = g.point_over(c(0.4, 0.2), 1.0);
    let d = Divisor::new(p, g.involution(&p));
    assert_eq!(g.xi(&d).unwrap_err().code(), "SpecialDivisorError");
    let d = Divisor::new(p, g.infinity(1));
    assert_eq!(g.xi(&d).unwrap_err(), Error::InfinitePoint);
}

#[test]
fn involution_examples() {
    let f = w5();
    let p = CurvePoint::Affine {
        x: c(2., 0.),
        y: c(3., 0.),
    };
    assert_eq!(
        f.involution(&p),
        CurvePoint::Affine {
            x: c(2., 0.),
            y: c(-3., 0.)
        }
    );
    assert_eq!(f.involution(&f.infinity(1)), f.infinity(1));
    let g = g6();
    assert_eq!(g.involution(&g.infinity(1)), g.infinity(2));
}

#[test]
fn xi11_is_smooth_across_the_near_diagonal_switch() {
    let starts = [c(0.31, 0.17), c(-0.45, 0.62), c(0.8, -0.35), c(-0.2, -0.9)];
    for f in [w5(), g6()] {
        let delta = DELTA_DIAG * f.root_scale();
        for x1 in starts {
            let y1 = f.eval(x1).sqrt();
            let xi11_at = |k: f64| {
                let x2 = x1 + c(0.6, 0.8) * (delta * k);
                let r = f.eval(x2).sqrt();
                let y2 = if (r - y1).norm() < (r + y1).norm() { r } else { -r };
                let d = Divisor::new(f.point(x1, y1).unwrap(), f.point(x2, y2).unwrap());
                // the closed form loses about |F| ε / |x1 − x2|² to cancellation
                let direct = (f.big_f(x1, x2) - y1 * y2 * 2.0) / ((x1 - x2) * (x1 - x2) * 4.0);
                (f.xi(&d).unwrap()[0], direct)
            };
            for k in [0.3, 0.6, 0.99, 1.01, 3.0] {
                let (got, direct) = xi11_at(k);
                let rel = (got - direct).norm() / got.norm();
                assert!(rel < 1e-7, "x1={x1} k={k} rel={rel}");
            }
            let (below, _) = xi11_at(0.9999);
            let (above, _) = xi11_at(1.0001);
            assert!((below - above).norm() / below.norm() < 1e-5);
        }
    }
}

#[test]
fn curve_json_round_trip_is_bit_exact() {
    let f = AdmissiblePolynomial::new([
        c(0.1, 1.0 / 3.0),
        c(-4.0, 0.0),
        c(1e-300, 0.0),
        c(0.0, 0.0),
        c(std::f64::consts::PI, -2.5),
        c(4.0, 0.0),
        c(0.0, 0.0),
    ])
    .unwrap();
    let s = serde_json::to_string(&CurveJson::from_poly(&f)).unwrap();
    let back: CurveJson = serde_json::from_str(&s).unwrap();
    let g = back.to_poly().unwrap();
    for (a, b) in f.coeffs().iter().zip(g.coeffs()) {
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
}
