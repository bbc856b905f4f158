//! Acceptance run on the two reference curves, one line per criterion.
//!
//! Runs without the libtest harness so the report is always printed; the
//! process exits non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use common::*;
use kleinian2::cycles::simple_chains;
use kleinian2::kleinian::KleinianContext;
use kleinian2::periods::{compute_period_data, PeriodOptions};
use kleinian2::theta::{theta_eval, theta_jet, Mat2, Vec2};
use kleinian2::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn both() -> [(&'static str, &'static Fixture); 2] {
    [("W5", w5_fixture()), ("G6", g6_fixture())]
}

fn period_certification() -> Verdict {
    let two_pi_i = Mat2::identity().map(|z| z * C64::new(0.0, 2.0 * PI));
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, fx) in both() {
        let pd = &fx.pd;
        let om = &pd.omega;
        let sym = pd.residuals.symmetry.max(max_abs(&(om - om.transpose())));
        let im = om.map(|z| C64::new(z.im, 0.0));
        let (a, b, d) = (im[(0, 0)].re, im[(0, 1)].re, im[(1, 1)].re);
        let lambda_min = 0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b * b).sqrt();
        let l1 = pd.eta_a.transpose() * pd.b - pd.a.transpose() * pd.eta_b - two_pi_i;
        let l2 = pd.b * pd.eta_a.transpose() - pd.a * pd.eta_b.transpose() - two_pi_i;
        let legendre = max_abs(&l1).max(max_abs(&l2));
        let asym = |m: Mat2| max_abs(&(m - m.transpose()));
        let symmetric = asym(pd.eta_a * pd.eta_b.transpose())
            .max(asym(pd.eta_a.transpose() * pd.a))
            .max(asym(pd.eta_b.transpose() * pd.b));
        pass &= sym < 1e-9 && lambda_min > 0.0 && legendre < 1e-8 && symmetric < 1e-8;
        parts.push(format!(
            "{name}: sym {sym:.1e}, min eig Im Ω {lambda_min:.3}, Legendre {legendre:.1e}, symmetric identities {symmetric:.1e}"
        ));
    }
    verdict(pass, parts.join("; "))
}

fn eta_integrality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for (_, fx) in both() {
        for _ in 0..20 {
            let (v, eta_v) = lattice(&fx.pd, random_lattice(&mut rng));
            let (w, eta_w) = lattice(&fx.pd, random_lattice(&mut rng));
            let val = (eta_w.transpose() * v)[0] - (eta_v.transpose() * w)[0];
            let k = val / C64::new(0.0, 2.0 * PI);
            let dist = (val - C64::new(0.0, 2.0 * PI * k.re.round())).norm();
            worst = worst.max(dist);
        }
    }
    verdict(worst < 1e-8, format!("20 pairs per curve, max distance to 2πiℤ {worst:.1e}"))
}

fn weight2_quasi_periodicity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for (_, fx) in both() {
        let all = |z: &Vec2| {
            let s = fx.ctx.s_eval(z).unwrap();
            let sjk = fx.ctx.s_jk_eval(z).unwrap();
            [s, sjk[0], sjk[1], sjk[2]]
        };
        for _ in 0..20 {
            let z = random_z(fx, &mut rng);
            let (w, eta) = lattice(&fx.pd, random_lattice(&mut rng));
            let factor = ((eta.transpose() * (z + w / C64::new(2.0, 0.0)))[0] * 2.0).exp();
            let lhs = all(&(z + w));
            let rhs = all(&z);
            for k in 0..4 {
                worst = worst.max(rel(lhs[k], factor * rhs[k]));
            }
        }
    }
    verdict(worst < 1e-8, format!("S, S11, S12, S22 at 20 (z, w) per curve, max relative {worst:.1e}"))
}

fn taylor_theorem() -> Verdict {
    let h = 1e-2;
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, fx) in both() {
        let fns: [Box<dyn Fn(&Vec2) -> C64>; 4] = [
            Box::new(|z| fx.ctx.s_eval(z).unwrap()),
            Box::new(|z| fx.ctx.s_jk_eval(z).unwrap()[0]),
            Box::new(|z| fx.ctx.s_jk_eval(z).unwrap()[1]),
            Box::new(|z| fx.ctx.s_jk_eval(z).unwrap()[2]),
        ];
        // expected Hessians of S, S11, S12, S22 at the origin
        let want = [
            [[2.0, 0.0], [0.0, 0.0]],
            [[0.0, 0.0], [0.0, 0.0]],
            [[0.0, 0.0], [0.0, -2.0]],
            [[0.0, 2.0], [2.0, 0.0]],
        ];
        let values = [0.0, 1.0, 0.0, 0.0];
        let zero = Vec2::zeros();
        let mut worst = 0.0f64;
        for (k, g) in fns.iter().enumerate() {
            worst = worst.max((g(&zero) - values[k]).norm());
            for i in 0..2 {
                worst = worst.max(fd(g, &zero, i, h).norm());
                for j in 0..2 {
                    let hij = fd(|p: &Vec2| fd(g, p, j, h), &zero, i, h);
                    worst = worst.max((hij - want[k][i][j]).norm());
                }
            }
        }
        pass &= worst < 1e-6;
        parts.push(format!("{name}: max jet deviation {worst:.1e}"));
    }
    verdict(pass, parts.join("; "))
}

fn quartic_certificate() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for (_, fx) in both() {
        for _ in 0..20 {
            let z = random_z(fx, &mut rng);
            worst = worst.max(quartic_scaled(&fx.f, fx.ctx.wp_eval(&z).unwrap()));
        }
    }
    verdict(worst < 1e-7, format!("20 z per curve, max scaled determinant {worst:.1e}"))
}

fn forward_consistency() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut forward = 0.0f64;
    let mut round_trip = 0.0f64;
    for (_, fx) in both() {
        for _ in 0..10 {
            let d = random_divisor(&fx.f, &mut rng);
            let z = fx.ctx.abel_forward(&d).unwrap();
            let wp = fx.ctx.wp_eval(&z).unwrap();
            let xi = xi_oracle(&fx.f, &d);
            for k in 0..3 {
                forward = forward.max(rel_floor(wp[k], xi[k]));
            }
            let back = fx.ctx.jacobi_invert(&z).unwrap();
            let z2 = fx.ctx.abel_forward(&back).unwrap();
            round_trip = round_trip.max(lattice_distance(&fx.pd, &(z2 - z)));
        }
        for _ in 0..10 {
            let z = random_z(fx, &mut rng);
            let d = fx.ctx.jacobi_invert(&z).unwrap();
            let z2 = fx.ctx.abel_forward(&d).unwrap();
            round_trip = round_trip.max(lattice_distance(&fx.pd, &(z2 - z)));
        }
    }
    verdict(
        forward < 1e-7 && round_trip < 1e-7,
        format!("℘ vs ξ max relative {forward:.1e}; inversion round trip {round_trip:.1e}"),
    )
}

fn sigma_family() -> Verdict {
    let fx = w5_fixture();
    let ctx = &fx.ctx;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut sq, mut logder, mut add, mut dup) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10 {
        let z = random_z(fx, &mut rng);
        let s = ctx.s_eval(&z).unwrap();
        let sg = ctx.sigma_eval(&z).unwrap();
        sq = sq.max((sg * sg - s).norm() / s.norm());

        // −∂² ln σ by finite differences of ln σ
        let ln_sigma = |p: &Vec2| (ctx.sigma_eval(p).unwrap() / sg).ln();
        let wp = ctx.wp_eval(&z).unwrap();
        let h = 1e-3;
        let d11 = -fd(|p: &Vec2| fd(ln_sigma, p, 0, h), &z, 0, h);
        let d12 = -fd(|p: &Vec2| fd(ln_sigma, p, 1, h), &z, 0, h);
        let d22 = -fd(|p: &Vec2| fd(ln_sigma, p, 1, h), &z, 1, h);
        logder = logder
            .max(rel_floor(d11, wp[0]))
            .max(rel_floor(d12, wp[1]))
            .max(rel_floor(d22, wp[2]));
    }
    for _ in 0..10 {
        let u = random_z(fx, &mut rng);
        let v = random_z(fx, &mut rng);
        let su = ctx.sigma_eval(&u).unwrap();
        let sv = ctx.sigma_eval(&v).unwrap();
        let lhs = ctx.sigma_eval(&(u + v)).unwrap() * ctx.sigma_eval(&(u - v)).unwrap() / (su * su * sv * sv);
        let pu = ctx.wp_eval(&u).unwrap();
        let pv = ctx.wp_eval(&v).unwrap();
        let rhs = pu[2] * pv[1] - pv[2] * pu[1] + pv[0] - pu[0];
        add = add.max(rel_floor(lhs, rhs));
    }
    let mut done = 0;
    while done < 10 {
        let z = random_z(fx, &mut rng);
        let z2 = z * C64::new(2.0, 0.0);
        if ctx.s_relative(&z2).unwrap() < 1e-3 {
            continue;
        }
        let h = 1e-3;
        let s = |p: &Vec2| ctx.s_eval(p).unwrap();
        let sj = |k: usize| move |p: &Vec2| ctx.s_jk_eval(p).unwrap()[k];
        let [s11, s12, s22] = ctx.s_jk_eval(&z).unwrap();
        let rhs = s12 * fd(sj(2), &z, 0, h) - s22 * fd(sj(1), &z, 0, h) + s11 * fd(s, &z, 0, h)
            - s(&z) * fd(sj(0), &z, 0, h);
        dup = dup.max(rel(ctx.sigma_eval(&z2).unwrap(), rhs));
        done += 1;
    }
    verdict(
        sq < 1e-8 && logder < 1e-6 && add < 1e-6 && dup < 1e-6,
        format!("W5: σ² vs S {sq:.1e}, log-derivative {logder:.1e}, addition {add:.1e}, duplication {dup:.1e}"),
    )
}

fn derivative_identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut first = 0.0f64;
    for (_, fx) in both() {
        for _ in 0..10 {
            let d = random_divisor(&fx.f, &mut rng);
            let rl = fx.ctx.rho_lambda_eval(&d).unwrap();
            let s0 = fx.ctx.s_eval(&rl.z).unwrap();
            let ln_s = |p: &Vec2| (fx.ctx.s_eval(p).unwrap() / s0).ln();
            let g1 = fd(ln_s, &rl.z, 0, 1e-3);
            let g2 = fd(ln_s, &rl.z, 1, 1e-3);
            first = first
                .max(rel_floor(g1, -2.0 * rl.rho[0] + rl.lambda))
                .max(rel_floor(g2, -2.0 * rl.rho[1]));
        }
    }
    let fx = g6_fixture();
    let mut witness = 0.0f64;
    for _ in 0..10 {
        let z = random_z(fx, &mut rng);
        let wp = |k: usize| move |p: &Vec2| fx.ctx.wp_eval(p).unwrap()[k];
        let diff = fd(wp(0), &z, 1, 1e-5) - fd(wp(1), &z, 0, 1e-5);
        witness = witness.max(diff.norm());
    }
    verdict(
        first < 1e-6 && witness > 1e-3,
        format!("first log-derivatives vs ρ, λ {first:.1e}; G6 non-integrability witness {witness:.3e}"),
    )
}

fn robustness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut permuted = 0.0f64;
    let mut shifted = 0.0f64;
    let mut chains = Vec::new();
    for (_, fx) in both() {
        let current = fx.pd.cycles.order.clone();
        let reversed: Vec<usize> = current.iter().rev().cloned().collect();
        let other = simple_chains(&fx.f, 0.05)
            .into_iter()
            .map(|(_, ch)| ch)
            .find(|ch| *ch != current && *ch != reversed)
            .unwrap();
        chains.push(format!("{current:?}→{other:?}"));
        let opts = PeriodOptions {
            chain: Some(other),
            ..Default::default()
        };
        let pd = compute_period_data(&fx.f, &opts).unwrap();
        let alt = KleinianContext::new(&fx.f, &pd).unwrap();
        for _ in 0..10 {
            let z = random_z(fx, &mut rng);
            let a = fx.ctx.wp_eval(&z).unwrap();
            let b = alt.wp_eval(&z).unwrap();
            for k in 0..3 {
                permuted = permuted.max(rel_floor(a[k], b[k]));
            }
        }

        let mut pd = fx.pd.clone();
        let n: Vec<f64> = (0..4).map(|_| rng.gen_range(-2i64..=2) as f64).collect();
        pd.delta += Vec2::new(c(n[0], 0.0), c(n[1], 0.0)) + pd.omega * Vec2::new(c(n[2], 0.0), c(n[3], 0.0));
        let moved = KleinianContext::new(&fx.f, &pd).unwrap();
        for _ in 0..10 {
            let z = random_z(fx, &mut rng);
            shifted = shifted.max(rel(fx.ctx.s_eval(&z).unwrap(), moved.s_eval(&z).unwrap()));
        }
    }
    verdict(
        permuted < 1e-7 && shifted < 1e-9,
        format!(
            "chains {}: ℘ change {permuted:.1e}; Δ lattice shift: S change {shifted:.1e}",
            chains.join(", ")
        ),
    )
}

fn theta_engine() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut quasi = 0.0f64;
    let mut deriv = 0.0f64;
    let i = C64::new(0.0, 1.0);
    for (_, fx) in both() {
        let om = &fx.ctx.omega;
        for _ in 0..10 {
            let z = Vec2::new(
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5)),
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5)),
            );
            let m: Vec<f64> = (0..4).map(|_| rng.gen_range(-2i64..=2) as f64).collect();
            let n = Vec2::new(c(m[0], 0.0), c(m[1], 0.0));
            let k = Vec2::new(c(m[2], 0.0), c(m[3], 0.0));
            let t0 = theta_jet(&z, om, 0).unwrap();
            let t1 = theta_eval(&(z + n + om * k), om).unwrap();
            let factor = (-i * PI * (k.transpose() * om * k)[0] - i * 2.0 * PI * (k.transpose() * z)[0]).exp();
            quasi = quasi.max((t1 - factor * t0.value).norm() / (factor.norm() * t0.abs_sum));

            let jet = theta_jet(&z, om, 3).unwrap();
            let indices: [&[usize]; 9] =
                [&[0], &[1], &[0, 0], &[0, 1], &[1, 1], &[0, 0, 0], &[0, 0, 1], &[0, 1, 1], &[1, 1, 1]];
            for idx in indices {
                let (last, lower) = idx.split_last().unwrap();
                let g = |p: &Vec2| theta_jet(p, om, lower.len()).unwrap().partial(lower);
                let approx = fd(g, &z, *last, 1e-3);
                let exact = jet.partial(idx);
                deriv = deriv.max((approx - exact).norm() / exact.norm().max(jet.abs_sum));
            }
        }
    }
    // θ(0; iI) = (Σ exp(−πn²))² from the one-dimensional series
    let one_d: f64 = (-30i64..=30).map(|n| (-PI * (n * n) as f64).exp()).sum();
    let oracle = one_d * one_d;
    let value = theta_eval(&Vec2::zeros(), &Mat2::identity().map(|z| z * i)).unwrap();
    let null = (value - oracle).norm();
    verdict(
        quasi < 1e-10 && deriv < 1e-6 && null < 1e-12,
        format!("quasi-periodicity {quasi:.1e}, derivatives vs differences {deriv:.1e}, θ(0; iI) vs 1-D series {null:.1e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("period certification", period_certification),
        ("eta integrality", eta_integrality),
        ("weight-2 quasi-periodicity", weight2_quasi_periodicity),
        ("Taylor jets at the origin", taylor_theorem),
        ("quartic certificate", quartic_certificate),
        ("forward and inversion consistency", forward_consistency),
        ("sigma family", sigma_family),
        ("derivative identities", derivative_identities),
        ("robustness", robustness),
        ("theta engine", theta_engine),
    ];
    let start = Instant::now();
    w5_fixture();
    g6_fixture();
    println!("reference curves prepared in {:.2?}", start.elapsed());
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run();
        let elapsed = t.elapsed();
        let within_budget = elapsed.as_secs_f64() < 60.0;
        let pass = v.pass && within_budget;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name} ({elapsed:.2?}): {}",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
