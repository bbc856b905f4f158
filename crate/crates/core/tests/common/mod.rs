#![allow(dead_code)]

use kleinian2::kleinian::KleinianContext;
use kleinian2::periods::{compute_period_data, PeriodData, PeriodOptions};
use kleinian2::theta::{Mat2, Vec2};
use kleinian2::{AdmissiblePolynomial, Complex64 as C64, CurvePoint, Divisor};
use nalgebra::{Matrix4, Vector4};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn w5() -> AdmissiblePolynomial {
    AdmissiblePolynomial::from_real([0., -4., 0., 0., 0., 4., 0.]).unwrap()
}

pub fn g6() -> AdmissiblePolynomial {
    AdmissiblePolynomial::from_real([-1., 0., 0., 0., 0., 0., 1.]).unwrap()
}

pub struct Fixture {
    pub f: AdmissiblePolynomial,
    pub pd: PeriodData,
    pub ctx: KleinianContext,
}

fn build(f: AdmissiblePolynomial) -> Fixture {
    let pd = compute_period_data(&f, &PeriodOptions::default()).unwrap();
    let ctx = KleinianContext::new(&f, &pd).unwrap();
    Fixture { f, pd, ctx }
}

pub fn w5_fixture() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    CELL.get_or_init(|| build(w5()))
}

pub fn g6_fixture() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    CELL.get_or_init(|| build(g6()))
}

pub fn rel(a: C64, b: C64) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

pub fn rel_floor(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// Kleinian two-point form F(x1, x2) written out term by term.
pub fn two_point_form(f: &AdmissiblePolynomial, x1: C64, x2: C64) -> C64 {
    let k = f.coeffs();
    let s = x1 + x2;
    let p = x1 * x2;
    k[0] * 2.0
        + k[1] * s
        + k[2] * 2.0 * p
        + k[3] * p * s
        + k[4] * 2.0 * p * p
        + k[5] * p * p * s
        + k[6] * 2.0 * p * p * p
}

/// ξ11, ξ12, ξ22 straight from the divisor coordinates.
pub fn xi_oracle(f: &AdmissiblePolynomial, d: &Divisor) -> [C64; 3] {
    let (x1, y1) = d.p.affine().unwrap();
    let (x2, y2) = d.q.affine().unwrap();
    let xi11 = (two_point_form(f, x1, x2) - y1 * y2 * 2.0) / ((x1 - x2) * (x1 - x2) * 4.0);
    [xi11, -(x1 * x2), x1 + x2]
}

/// Coordinates of z in the real basis (A e1, A e2, B e1, B e2) of the lattice.
pub fn lattice_coords(pd: &PeriodData, z: &Vec2) -> [f64; 4] {
    let cols = [
        pd.a.column(0).into_owned(),
        pd.a.column(1).into_owned(),
        pd.b.column(0).into_owned(),
        pd.b.column(1).into_owned(),
    ];
    let m = Matrix4::from_fn(|i, j| {
        let v = cols[j][i / 2];
        if i % 2 == 0 {
            v.re
        } else {
            v.im
        }
    });
    let rhs = Vector4::new(z[0].re, z[0].im, z[1].re, z[1].im);
    let x = m.lu().solve(&rhs).unwrap();
    [x[0], x[1], x[2], x[3]]
}

/// |z − nearest lattice point|, measured through the real coordinates.
pub fn lattice_distance(pd: &PeriodData, z: &Vec2) -> f64 {
    let k = lattice_coords(pd, z);
    let n: Vec<f64> = k.iter().map(|v| v.round()).collect();
    let w = pd.a * Vec2::new(c(n[0], 0.0), c(n[1], 0.0)) + pd.b * Vec2::new(c(n[2], 0.0), c(n[3], 0.0));
    (z - w).norm()
}

pub fn lattice(pd: &PeriodData, mn: [i64; 4]) -> (Vec2, Vec2) {
    let m = Vec2::new(c(mn[0] as f64, 0.0), c(mn[1] as f64, 0.0));
    let n = Vec2::new(c(mn[2] as f64, 0.0), c(mn[3] as f64, 0.0));
    (pd.a * m + pd.b * n, pd.eta_a * m + pd.eta_b * n)
}

pub fn random_lattice(rng: &mut ChaCha8Rng) -> [i64; 4] {
    loop {
        let v: [i64; 4] = std::array::from_fn(|_| rng.gen_range(-2..=2));
        if v != [0; 4] {
            return v;
        }
    }
}

/// z = A(s + Ωt) with s, t uniform in [−½, ½)², away from the zeros of S.
pub fn random_z(fx: &Fixture, rng: &mut ChaCha8Rng) -> Vec2 {
    loop {
        let s = Vec2::new(c(rng.gen::<f64>() - 0.5, 0.0), c(rng.gen::<f64>() - 0.5, 0.0));
        let t = Vec2::new(c(rng.gen::<f64>() - 0.5, 0.0), c(rng.gen::<f64>() - 0.5, 0.0));
        let z = fx.pd.a * (s + fx.ctx.omega * t);
        if fx.ctx.s_relative(&z).unwrap() > 1e-3 {
            return z;
        }
    }
}

pub fn random_divisor(f: &AdmissiblePolynomial, rng: &mut ChaCha8Rng) -> Divisor {
    let pick = |rng: &mut ChaCha8Rng| loop {
        let x = c(rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2));
        if f.branch_points().iter().all(|e| (x - e).norm() > 0.1) {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            return f.point_over(x, sign);
        }
    };
    loop {
        let p = pick(rng);
        let q = pick(rng);
        if (p.affine().unwrap().0 - q.affine().unwrap().0).norm() > 0.2 {
            return Divisor::new(p, q);
        }
    }
}

/// Fourth-order central difference of g along coordinate `j`.
pub fn fd<G: Fn(&Vec2) -> C64>(g: G, z: &Vec2, j: usize, h: f64) -> C64 {
    let at = |t: f64| {
        let mut p = *z;
        p[j] += t;
        g(&p)
    };
    (at(-2.0 * h) - at(2.0 * h) + (at(h) - at(-h)) * 8.0) / (12.0 * h)
}

/// 4×4 determinant by cofactor expansion along the first row.
pub fn det4(m: &[[C64; 4]; 4]) -> C64 {
    let det3 = |r: [usize; 3], cidx: [usize; 3]| {
        let a = |i: usize, j: usize| m[r[i]][cidx[j]];
        a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
    };
    let mut acc = c(0.0, 0.0);
    for j in 0..4 {
        let cols: Vec<usize> = (0..4).filter(|&k| k != j).collect();
        let minor = det3([1, 2, 3], [cols[0], cols[1], cols[2]]);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += m[0][j] * minor * sign;
    }
    acc
}

/// The Kummer quartic as a determinant, entries written out from the
/// determinantal form of the relation.
pub fn quartic_entries(f: &AdmissiblePolynomial, p: [C64; 3]) -> [[C64; 4]; 4] {
    let k = f.coeffs();
    let [p11, p12, p22] = p;
    let two = c(2.0, 0.0);
    let mid = k[3] / 2.0 + k[5] / 2.0 * p12 + k[6] * p12 * p22;
    [
        [-k[0], k[1] / 2.0, two * p11, -two * p12],
        [k[1] / 2.0, -k[2] - p11 * 4.0 - k[6] * p12 * p12, mid, two * p22],
        [two * p11, mid, -k[4] - k[5] * p22 - k[6] * p22 * p22, two],
        [-two * p12, two * p22, two, c(0.0, 0.0)],
    ]
}

pub fn quartic_scaled(f: &AdmissiblePolynomial, p: [C64; 3]) -> f64 {
    let m = quartic_entries(f, p);
    let scale = m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    det4(&m).norm() / scale.powi(4)
}

pub fn max_abs(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn affine(p: &CurvePoint) -> (C64, C64) {
    p.affine().unwrap()
}
