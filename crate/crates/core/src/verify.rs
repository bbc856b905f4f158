//! Seeded identity suite: every check samples its own points and reports the
//! worst residual against a tolerance.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::curve::{AdmissiblePolynomial, CurveJson, CurvePoint, Divisor};
use crate::cycles::simple_chains;
use crate::error::{Error, Result};
use crate::kleinian::{quartic_residual, KleinianContext};
use crate::periods::{compute_period_data, PeriodOptions};
use crate::theta::{theta_jet, Vec2};

/// Every check in suite order.
pub const CHECKS: &[&str] = &[
    "riemann_matrix",
    "legendre",
    "eta_integrality",
    "theta_quasi_periodicity",
    "theta_evenness",
    "theta_derivatives",
    "quasi_periodicity",
    "evenness",
    "s_divisor_vanishing",
    "delta_shift_invariance",
    "quartic_determinant",
    "forward_consistency",
    "jacobi_round_trip",
    "taylor_jets",
    "first_derivative_identity",
    "second_derivative_identity",
    "jacobian_formulas",
    "non_integrability",
    "log_derivative_p",
    "addition_formula",
    "duplication",
    "sigma_squared",
    "sigma_odd",
    "basis_independence",
    "linear_independence",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    #[serde(rename = "n/a")]
    NotApplicable,
}

/// Whether the residual must stay below the tolerance or exceed it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">")]
    Exceeds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub samples: usize,
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub comparison: Comparison,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub curve: CurveJson,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Outcome of one check before it is turned into a record.
enum Outcome {
    Measured { samples: usize, residual: f64 },
    NotApplicable(&'static str),
}

struct Threshold {
    tolerance: f64,
    comparison: Comparison,
}

fn rel(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

fn rel_floor(a: C64, b: C64, floor: f64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(floor)
}

// ------------------------------------------------------------- sampling

/// A point z = A(s + Ωt) with s, t in [−½, ½)², kept away from the zero set
/// of S.
pub fn random_z(ctx: &KleinianContext, rng: &mut ChaCha8Rng) -> Result<Vec2> {
    for _ in 0..1000 {
        let s = [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5];
        let t = [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5];
        let u = Vec2::new(C64::new(s[0], 0.0), C64::new(s[1], 0.0))
            + ctx.omega * Vec2::new(C64::new(t[0], 0.0), C64::new(t[1], 0.0));
        let z = ctx.pd.a * u;
        if ctx.s_relative(&z)? >= 1e-3 {
            return Ok(z);
        }
    }
    Err(Error::Convergence("could not sample a point away from the zeros of S".into()))
}

fn random_x(f: &AdmissiblePolynomial, rng: &mut ChaCha8Rng) -> C64 {
    let r = f.root_scale().max(0.1);
    loop {
        let x = C64::new(rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2)) * r;
        let near = f
            .branch_points()
            .iter()
            .map(|e| (x - e).norm())
            .fold(f64::INFINITY, f64::min);
        if near > 0.1 * r {
            return x;
        }
    }
}

/// A random affine point on the curve, away from the branch points.
pub fn random_point(f: &AdmissiblePolynomial, rng: &mut ChaCha8Rng) -> CurvePoint {
    let x = random_x(f, rng);
    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    f.point_over(x, sign)
}

/// A random non-special divisor of two affine points with distinct x.
pub fn random_divisor(f: &AdmissiblePolynomial, rng: &mut ChaCha8Rng) -> Divisor {
    let r = f.root_scale().max(0.1);
    loop {
        let p = random_point(f, rng);
        let q = random_point(f, rng);
        let (x1, _) = p.affine().expect("affine sample");
        let (x2, _) = q.affine().expect("affine sample");
        if (x1 - x2).norm() > 0.2 * r {
            return Divisor::new(p, q);
        }
    }
}

fn random_lattice(rng: &mut ChaCha8Rng) -> [i64; 4] {
    loop {
        let v = [
            rng.gen_range(-2..=2),
            rng.gen_range(-2..=2),
            rng.gen_range(-2..=2),
            rng.gen_range(-2..=2),
        ];
        if v != [0; 4] {
            return v;
        }
    }
}

// ------------------------------------------------------------ Taylor jets

/// Value, gradient and Hessian of a function at z = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: C64,
    pub grad: [C64; 2],
    pub hess: [[C64; 2]; 2],
}

/// Order-2 jets of S, S11, S12, S22 at the origin, measured by central
/// differences with one Richardson step.
pub fn measure_jets(ctx: &KleinianContext) -> Result<[Jet; 4]> {
    let eval = |z1: f64, z2: f64| -> Result<[C64; 4]> {
        let z = Vec2::new(C64::new(z1, 0.0), C64::new(z2, 0.0));
        let s = ctx.s_eval(&z)?;
        let sjk = ctx.s_jk_eval(&z)?;
        Ok([s, sjk[0], sjk[1], sjk[2]])
    };
    let scale = ctx.period_scale().min(1.0);
    let stencil = |h: f64| -> Result<[Jet; 4]> {
        let c = eval(0.0, 0.0)?;
        let xp = eval(h, 0.0)?;
        let xm = eval(-h, 0.0)?;
        let yp = eval(0.0, h)?;
        let ym = eval(0.0, -h)?;
        let pp = eval(h, h)?;
        let pm = eval(h, -h)?;
        let mp = eval(-h, h)?;
        let mm = eval(-h, -h)?;
        let mut out = [Jet {
            value: C64::new(0.0, 0.0),
            grad: [C64::new(0.0, 0.0); 2],
            hess: [[C64::new(0.0, 0.0); 2]; 2],
        }; 4];
        for k in 0..4 {
            let h11 = (xp[k] - 2.0 * c[k] + xm[k]) / (h * h);
            let h22 = (yp[k] - 2.0 * c[k] + ym[k]) / (h * h);
            let h12 = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h);
            out[k] = Jet {
                value: c[k],
                grad: [(xp[k] - xm[k]) / (2.0 * h), (yp[k] - ym[k]) / (2.0 * h)],
                hess: [[h11, h12], [h12, h22]],
            };
        }
        Ok(out)
    };
    let h = 1e-2 * scale;
    let coarse = stencil(h)?;
    let fine = stencil(h / 2.0)?;
    let mut out = fine;
    for k in 0..4 {
        for i in 0..2 {
            out[k].grad[i] = (4.0 * fine[k].grad[i] - coarse[k].grad[i]) / 3.0;
            for j in 0..2 {
                out[k].hess[i][j] = (4.0 * fine[k].hess[i][j] - coarse[k].hess[i][j]) / 3.0;
            }
        }
    }
    Ok(out)
}

/// The expected jets: S = z1², S11 = 1, S12 = −z2², S22 = 2z1z2 to order 2.
pub fn expected_jets() -> [Jet; 4] {
    let c = |x: f64| C64::new(x, 0.0);
    let zero = c(0.0);
    let jet = |v: f64, h: [[f64; 2]; 2]| Jet {
        value: c(v),
        grad: [zero, zero],
        hess: [[c(h[0][0]), c(h[0][1])], [c(h[1][0]), c(h[1][1])]],
    };
    [
        jet(0.0, [[2.0, 0.0], [0.0, 0.0]]),
        jet(1.0, [[0.0, 0.0], [0.0, 0.0]]),
        jet(0.0, [[0.0, 0.0], [0.0, -2.0]]),
        jet(0.0, [[0.0, 2.0], [2.0, 0.0]]),
    ]
}

pub fn jet_deviation(measured: &[Jet; 4]) -> f64 {
    let want = expected_jets();
    let mut worst = 0.0f64;
    for k in 0..4 {
        worst = worst.max((measured[k].value - want[k].value).norm());
        for i in 0..2 {
            worst = worst.max((measured[k].grad[i] - want[k].grad[i]).norm());
            for j in 0..2 {
                worst = worst.max((measured[k].hess[i][j] - want[k].hess[i][j]).norm());
            }
        }
    }
    worst
}

// ---------------------------------------------------------------- suite

struct Suite<'a> {
    ctx: &'a KleinianContext,
}

impl Suite<'_> {
    fn threshold(&self, name: &str) -> Threshold {
        let t = &self.ctx.tol;
        let (tolerance, comparison) = match name {
            "riemann_matrix" => (1e-9, Comparison::AtMost),
            "legendre" => (t.leg, Comparison::AtMost),
            "eta_integrality" => (1e-8, Comparison::AtMost),
            "theta_quasi_periodicity" => (1e-10, Comparison::AtMost),
            "theta_evenness" => (1e-12, Comparison::AtMost),
            "theta_derivatives" => (1e-6, Comparison::AtMost),
            "quasi_periodicity" => (1e-8, Comparison::AtMost),
            "evenness" => (1e-8, Comparison::AtMost),
            "s_divisor_vanishing" => (1e-8, Comparison::AtMost),
            "delta_shift_invariance" => (1e-9, Comparison::AtMost),
            "quartic_determinant" => (t.id, Comparison::AtMost),
            "forward_consistency" => (t.rt, Comparison::AtMost),
            "jacobi_round_trip" => (t.rt, Comparison::AtMost),
            "taylor_jets" => (1e-6, Comparison::AtMost),
            "first_derivative_identity" => (1e-6, Comparison::AtMost),
            "second_derivative_identity" => (t.id, Comparison::AtMost),
            "jacobian_formulas" => (1e-5, Comparison::AtMost),
            "non_integrability" => (1e-3, Comparison::Exceeds),
            "log_derivative_p" => (1e-6, Comparison::AtMost),
            "addition_formula" => (1e-6, Comparison::AtMost),
            "duplication" => (1e-6, Comparison::AtMost),
            "sigma_squared" => (1e-8, Comparison::AtMost),
            "sigma_odd" => (1e-8, Comparison::AtMost),
            "basis_independence" => (1e-7, Comparison::AtMost),
            "linear_independence" => (1e-6, Comparison::Exceeds),
            _ => unreachable!("unknown check {name}"),
        };
        Threshold {
            tolerance,
            comparison,
        }
    }

    fn run(&self, name: &str, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        match name {
            "riemann_matrix" => self.riemann_matrix(),
            "legendre" => self.legendre(),
            "eta_integrality" => self.eta_integrality(rng),
            "theta_quasi_periodicity" => self.theta_quasi_periodicity(rng),
            "theta_evenness" => self.theta_evenness(rng),
            "theta_derivatives" => self.theta_derivatives(rng),
            "quasi_periodicity" => self.quasi_periodicity(rng),
            "evenness" => self.evenness(rng),
            "s_divisor_vanishing" => self.s_divisor_vanishing(rng),
            "delta_shift_invariance" => self.delta_shift_invariance(rng),
            "quartic_determinant" => self.quartic_determinant(rng),
            "forward_consistency" => self.forward_consistency(rng),
            "jacobi_round_trip" => self.jacobi_round_trip(rng),
            "taylor_jets" => self.taylor_jets(),
            "first_derivative_identity" => self.first_derivative_identity(rng),
            "second_derivative_identity" => self.second_derivative_identity(rng),
            "jacobian_formulas" => self.jacobian_formulas(rng),
            "non_integrability" => self.non_integrability(rng),
            "log_derivative_p" => self.log_derivative_p(rng),
            "addition_formula" => self.addition_formula(rng),
            "duplication" => self.duplication(rng),
            "sigma_squared" => self.sigma_squared(rng),
            "sigma_odd" => self.sigma_odd(rng),
            "basis_independence" => self.basis_independence(rng),
            "linear_independence" => self.linear_independence(rng),
            _ => unreachable!("unknown check {name}"),
        }
    }

    fn riemann_matrix(&self) -> Result<Outcome> {
        let r = &self.ctx.pd.residuals;
        let residual = if r.im_omega_min_eig > 0.0 {
            r.symmetry
        } else {
            f64::INFINITY
        };
        Ok(Outcome::Measured {
            samples: 1,
            residual,
        })
    }

    fn legendre(&self) -> Result<Outcome> {
        let r = &self.ctx.pd.residuals;
        Ok(Outcome::Measured {
            samples: 4,
            residual: r.legendre.max(r.legendre_symmetry),
        })
    }

    fn eta_integrality(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let pd = &self.ctx.pd;
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let v = random_lattice(rng);
            let w = random_lattice(rng);
            let val = (pd.eta_of_lattice(w).transpose() * pd.lattice_vector(v))[0]
                - (pd.eta_of_lattice(v).transpose() * pd.lattice_vector(w))[0];
            let k = val / C64::new(0.0, 2.0 * PI);
            worst = worst.max((k - k.re.round()).norm() * 2.0 * PI);
        }
        Ok(Outcome::Measured {
            samples: 20,
            residual: worst,
        })
    }

    fn random_u(&self, rng: &mut ChaCha8Rng) -> Vec2 {
        Vec2::new(
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5)),
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5)),
        )
    }

    fn theta_quasi_periodicity(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let om = &self.ctx.omega;
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let z = self.random_u(rng);
            let n = [rng.gen_range(-2i64..=2), rng.gen_range(-2i64..=2)];
            let m = [rng.gen_range(-2i64..=2), rng.gen_range(-2i64..=2)];
            let nv = Vec2::new(C64::new(n[0] as f64, 0.0), C64::new(n[1] as f64, 0.0));
            let mv = Vec2::new(C64::new(m[0] as f64, 0.0), C64::new(m[1] as f64, 0.0));
            let base = theta_jet(&z, om, 0)?;
            let shifted = theta_jet(&(z + nv + om * mv), om, 0)?;
            let arg = -C64::new(0.0, PI) * (mv.transpose() * om * mv)[0]
                - C64::new(0.0, 2.0 * PI) * (mv.transpose() * z)[0];
            let want = arg.exp() * base.value;
            worst = worst.max((shifted.value - want).norm() / shifted.abs_sum.max(want.norm()));
        }
        Ok(Outcome::Measured {
            samples: 20,
            residual: worst,
        })
    }

    fn theta_evenness(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let om = &self.ctx.omega;
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let z = self.random_u(rng);
            let a = theta_jet(&z, om, 0)?;
            let b = theta_jet(&(-z), om, 0)?;
            worst = worst.max((a.value - b.value).norm() / a.abs_sum);
        }
        Ok(Outcome::Measured {
            samples: 20,
            residual: worst,
        })
    }

    fn theta_derivatives(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let om = &self.ctx.omega;
        let h = 1e-5;
        let mut worst = 0.0f64;
        let mut samples = 0;
        for _ in 0..5 {
            let z = self.random_u(rng);
            let jet = theta_jet(&z, om, 3)?;
            // every multi-index of order 1..=3 as a sorted index list
            let indices: [&[usize]; 9] =
                [&[0], &[1], &[0, 0], &[0, 1], &[1, 1], &[0, 0, 0], &[0, 0, 1], &[0, 1, 1], &[1, 1, 1]];
            for idx in indices {
                let (last, lower) = idx.split_last().expect("non-empty multi-index");
                let mut zp = z;
                let mut zm = z;
                zp[*last] += h;
                zm[*last] -= h;
                let fp = theta_jet(&zp, om, lower.len())?.partial(lower);
                let fm = theta_jet(&zm, om, lower.len())?.partial(lower);
                let fd = (fp - fm) / (2.0 * h);
                let exact = jet.partial(idx);
                let scale = exact.norm().max(jet.abs_sum);
                worst = worst.max((fd - exact).norm() / scale);
                samples += 1;
            }
        }
        Ok(Outcome::Measured {
            samples,
            residual: worst,
        })
    }

    fn quasi_periodicity(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let ctx = self.ctx;
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let z = random_z(ctx, rng)?;
            let mn = random_lattice(rng);
            let w = ctx.pd.lattice_vector(mn);
            let eta = ctx.pd.eta_of_lattice(mn);
            let factor = (2.0 * (eta.transpose() * (z + w * C64::new(0.5, 0.0)))[0]).exp();
            let zw = z + w;
            let at = |p: &Vec2| -> Result<[C64; 4]> {
                let s = ctx.s_eval(p)?;
                let sjk = ctx.s_jk_eval(p)?;
                Ok([s, sjk[0], sjk[1], sjk[2]])
            };
            let a = at(&zw)?;
            let b = at(&z)?;
            for k in 0..4 {
                worst = worst.max(rel(a[k], factor * b[k]));
            }
        }
        Ok(Outcome::Measured {
            samples: 20,
            residual: worst,
        })
    }

    fn evenness(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let ctx = self.ctx;
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let z = random_z(ctx, rng)?;
            worst = worst.max(rel(ctx.s_eval(&z)?, ctx.s_eval(&(-z))?));
            let a = ctx.s_jk_eval(&z)?;
            let b = ctx.s_jk_eval(&(-z))?;
            let pa = ctx.wp_eval(&z)?;
            let pb = ctx.wp_eval(&(-z))?;
            for k in 0..3 {
                worst = worst.max(rel(a[k], b[k])).max(rel(pa[k], pb[k]));
            }
        }
        Ok(Outcome::Measured {
            samples: 20,
            residual: worst,
        })
    }

    fn s_divisor_vanishing(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let ctx = self.ctx;
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let p = random_point(&ctx.f, rng);
            let z = ctx.abel_forward(&Divisor::new(p, ctx.f.infinity(1)))?;
            worst = worst.max(ctx.s_relative(&z)?);
        }
        Ok(Outcome::Measured {
            samples: 10,
            residual: worst,
        })
    }

    fn delta_shift_invariance(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let ctx = self.ctx;
        let mut pd = ctx.pd.clone();
        let n = [rng.gen_range(-2i64..=2), rng.gen_range(-2i64..=2)];
        let m = [rng.gen_range(-2i64..=2), rng.gen_range(-2i64..=2)];
        let nv = Vec2::new(C64::new(n[0] as f64, 0.0), C64::new(n[1] as f64, 0.0));
        let mv = Vec2::new(C64::new(m[0] as f64, 0.0), C64::new(m[1] as f64, 0.0));
        pd.delta += nv + pd.omega * mv;
        let shifted = KleinianContext::with_tolerances(&ctx.f, &pd, ctx.tol)?;
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let z = random_z(ctx, rng)?;
            worst = worst.max(rel(ctx.s_eval(&z)?, shifted.s_eval(&z)?));
        }
        Ok(Outcome::Measured {
            samples: 10,
            residual: worst,
        })
    }

    fn quartic_determinant(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let ctx = self.ctx;
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let z = random_z(ctx, rng)?;
            worst = worst.max(quartic_residual(&ctx.f, ctx.wp_eval(&z)?));
        }
        Ok(Outcome::Measured {
            samples: 20,
            residual: worst,
        })
    }

    fn forward_consistency(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let ctx = self.ctx;
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let d = random_divisor(&ctx.f, rng);
            let z = ctx.abel_forward(&d)?;
            let wp = ctx.wp_eval(&z)?;
            let xi = ctx.f.xi(&d)?;
            for k in 0..3 {
                worst = worst.max(rel_floor(wp[k], xi[k], 1.0));
            }
        }
        Ok(Outcome::Measured {
            samples: 10,
            residual: worst,
        })
    }

    fn jacobi_round_trip(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let ctx = self.ctx;
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let z = random_z(ctx, rng)?;
            let d = ctx.jacobi_invert(&z)?;
            let back = ctx.abel_forward(&d)?;
            worst = worst.max(ctx.pd.lattice_distance(&(back - z))?);
        }
        for _ in 0..10 {
            let d = random_divisor(&ctx.f, rng);
            let z = ctx.abel_forward(&d)?;
            let e = ctx.jacobi_invert(&z)?;
            worst = worst.max(divisor_distance(&d, &e));
        }
        Ok(Outcome::Measured {
            samples: 20,
            residual: worst,
        })
    }

    fn taylor_jets(&self) -> Result<Outcome> {
        let jets = measure_jets(self.ctx)?;
        Ok(Outcome::Measured {
            samples: 4,
            residual: jet_deviation(&jets),
        })
    }

    fn first_derivative_identity(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let ctx = self.ctx;
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let d = random_divisor(&ctx.f, rng);
            let rl = ctx.rho_lambda_eval(&d)?;
            let g = ctx.log_s_grad(&rl.z)?;
            worst = worst
                .max(rel_floor(g[0], -2.0 * rl.rho[0] + rl.lambda, 1.0))
                .max(rel_floor(g[1], -2.0 * rl.rho[1], 1.0));
        }
        Ok(Outcome::Measured {
            samples: 10,
            residual: worst,
        })
    }

    fn second_derivative_identity(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let ctx = self.ctx;
        let c = ctx.f.coeffs();
        let (f5, f6) = (c[5], c[6]);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let d = random_divisor(&ctx.f, rng);
            let z = ctx.abel_forward(&d)?;
            let l = ctx.log_s_hessian(&z)?;
            let [p11, p12, p22] = ctx.f.xi(&d)?;
            let want = [
                -2.0 * p11 - f6 * p12 * p12,
                -f5 * 0.5 * p12 - f6 * p12 * p22,
                -f5 * 0.5 * p22 - f6 * (p22 * p22 + p12),
            ];
            let got = [l[0][0], l[0][1], l[1][1]];
            for k in 0..3 {
                worst = worst.max(rel_floor(got[k], want[k], 1.0));
            }
        }
        Ok(Outcome::Measured {
            samples: 10,
            residual: worst,
        })
    }

    fn jacobian_formulas(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let ctx = self.ctx;
        let h = 1e-5;
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let d = random_divisor(&ctx.f, rng);
            let ((x1, y1), (x2, y2)) = (d.p.affine().unwrap(), d.q.affine().unwrap());
            let z = ctx.abel_forward(&d)?;
            let mut fd = [C64::new(0.0, 0.0); 2];
            for j in 0..2 {
                let mut zp = z;
                let mut zm = z;
                zp[j] += h;
                zm[j] -= h;
                fd[j] = (ctx.wp_eval(&zp)?[2] - ctx.wp_eval(&zm)?[2]) / (2.0 * h);
            }
            let want = [(y1 * x2 - y2 * x1) / (x2 - x1), (y2 - y1) / (x2 - x1)];
            for j in 0..2 {
                worst = worst.max(rel_floor(fd[j], want[j], 1.0));
            }
        }
        Ok(Outcome::Measured {
            samples: 10,
            residual: worst,
        })
    }

    fn non_integrability(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let ctx = self.ctx;
        if ctx.f.coeff(6) == C64::new(0.0, 0.0) {
            return Ok(Outcome::NotApplicable("℘11 and ℘12 are exact derivatives when f6 = 0"));
        }
        let h = 1e-5;
        let mut best = 0.0f64;
        for _ in 0..10 {
            let z = random_z(ctx, rng)?;
            let diff = |j: usize, k: usize| -> Result<C64> {
                let mut zp = z;
                let mut zm = z;
                zp[j] += h;
                zm[j] -= h;
                Ok((ctx.wp_eval(&zp)?[k] - ctx.wp_eval(&zm)?[k]) / (2.0 * h))
            };
            best = best.max((diff(1, 0)? - diff(0, 1)?).norm());
        }
        Ok(Outcome::Measured {
            samples: 10,
            residual: best,
        })
    }

    fn sigma_na(&self) -> Option<Outcome> {
        if self.ctx.f.is_weierstrass_form() {
            None
        } else {
            Some(Outcome::NotApplicable("σ is defined for Weierstrass form only"))
        }
    }

    fn log_derivative_p(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        if let Some(o) = self.sigma_na() {
            return Ok(o);
        }
        let ctx = self.ctx;
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let z = random_z(ctx, rng)?;
            let a = ctx.sigma_log_derivs(&z)?.wp;
            let b = ctx.wp_eval(&z)?;
            for k in 0..3 {
                worst = worst.max(rel_floor(a[k], b[k], 1.0));
            }
        }
        Ok(Outcome::Measured {
            samples: 10,
            residual: worst,
        })
    }

    fn addition_formula(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        if let Some(o) = self.sigma_na() {
            return Ok(o);
        }
        let ctx = self.ctx;
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let u = random_z(ctx, rng)?;
            let v = random_z(ctx, rng)?;
            let su = ctx.sigma_eval(&u)?;
            let sv = ctx.sigma_eval(&v)?;
            let lhs = ctx.sigma_eval(&(u + v))? * ctx.sigma_eval(&(u - v))? / (su * su * sv * sv);
            let pu = ctx.wp_eval(&u)?;
            let pv = ctx.wp_eval(&v)?;
            let rhs = pu[2] * pv[1] - pv[2] * pu[1] + pv[0] - pu[0];
            worst = worst.max(rel_floor(lhs, rhs, 1.0));
        }
        Ok(Outcome::Measured {
            samples: 10,
            residual: worst,
        })
    }

    fn duplication(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        if let Some(o) = self.sigma_na() {
            return Ok(o);
        }
        let ctx = self.ctx;
        let mut worst = 0.0f64;
        let mut done = 0;
        let mut tries = 0;
        while done < 10 {
            tries += 1;
            if tries > 1000 {
                return Err(Error::Convergence("duplication sampling".into()));
            }
            let z = random_z(ctx, rng)?;
            let z2 = z * C64::new(2.0, 0.0);
            if ctx.s_relative(&z2)? < 1e-3 {
                continue;
            }
            let lhs = ctx.sigma_eval(&z2)?;
            let s = ctx.s_eval(&z)?;
            let [s11, s12, s22] = ctx.s_jk_eval(&z)?;
            let g = ctx.weight2_grads(&z)?;
            let rhs = s12 * g[3][0] - s22 * g[2][0] + s11 * g[0][0] - s * g[1][0];
            worst = worst.max(rel(lhs, rhs));
            done += 1;
        }
        Ok(Outcome::Measured {
            samples: 10,
            residual: worst,
        })
    }

    fn sigma_squared(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        if let Some(o) = self.sigma_na() {
            return Ok(o);
        }
        let ctx = self.ctx;
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let z = random_z(ctx, rng)?;
            let s = ctx.s_eval(&z)?;
            let sg = ctx.sigma_eval(&z)?;
            worst = worst.max((sg * sg - s).norm() / s.norm());
        }
        Ok(Outcome::Measured {
            samples: 20,
            residual: worst,
        })
    }

    fn sigma_odd(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        if let Some(o) = self.sigma_na() {
            return Ok(o);
        }
        let ctx = self.ctx;
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let z = random_z(ctx, rng)?;
            worst = worst.max(rel(ctx.sigma_eval(&z)?, -ctx.sigma_eval(&(-z))?));
        }
        Ok(Outcome::Measured {
            samples: 20,
            residual: worst,
        })
    }

    fn basis_independence(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let ctx = self.ctx;
        let current = &ctx.pd.cycles.order;
        let reversed: Vec<usize> = current.iter().rev().cloned().collect();
        let other = simple_chains(&ctx.f, 0.05)
            .into_iter()
            .map(|(_, c)| c)
            .find(|c| c != current && *c != reversed)
            .ok_or_else(|| Error::DegenerateGeometry("no alternative chain of branch points".into()))?;
        let opts = PeriodOptions {
            chain: Some(other),
            tolerances: ctx.tol,
        };
        let pd = compute_period_data(&ctx.f, &opts)?;
        let alt = KleinianContext::with_tolerances(&ctx.f, &pd, ctx.tol)?;
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let z = random_z(ctx, rng)?;
            if alt.s_relative(&z)? < 1e-3 {
                continue;
            }
            let a = ctx.wp_eval(&z)?;
            let b = alt.wp_eval(&z)?;
            for k in 0..3 {
                worst = worst.max(rel_floor(a[k], b[k], 1.0));
            }
            worst = worst.max(rel(ctx.s_eval(&z)?, alt.s_eval(&z)?));
        }
        Ok(Outcome::Measured {
            samples: 10,
            residual: worst,
        })
    }

    fn linear_independence(&self, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let ctx = self.ctx;
        let mut rows = Vec::new();
        for _ in 0..8 {
            let z = random_z(ctx, rng)?;
            let wp = ctx.wp_eval(&z)?;
            rows.push([C64::new(1.0, 0.0), wp[0], wp[1], wp[2]]);
        }
        let m = DMatrix::from_fn(8, 4, |i, j| rows[i][j]);
        let sv = m.singular_values();
        Ok(Outcome::Measured {
            samples: 8,
            residual: sv.min() / sv.max(),
        })
    }
}

/// Order-insensitive distance between two divisors of affine points.
pub fn divisor_distance(a: &Divisor, b: &Divisor) -> f64 {
    let pt = |p: &CurvePoint, q: &CurvePoint| -> f64 {
        match (p.affine(), q.affine()) {
            (Some((x1, y1)), Some((x2, y2))) => {
                ((x1 - x2).norm() / (1.0 + x1.norm())).max((y1 - y2).norm() / (1.0 + y1.norm()))
            }
            _ => {
                if p == q {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    };
    let direct = pt(&a.p, &b.p).max(pt(&a.q, &b.q));
    let swapped = pt(&a.p, &b.q).max(pt(&a.q, &b.p));
    direct.min(swapped)
}

/// Runs the selected checks (all when `checks` is `None`) with a
/// deterministic random stream per check.
pub fn run_suite(
    ctx: &KleinianContext,
    seed: u64,
    checks: Option<&[String]>,
) -> Result<VerificationReport> {
    if let Some(list) = checks {
        for name in list {
            if !CHECKS.contains(&name.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "unknown check '{name}'; available: {}",
                    CHECKS.join(", ")
                )));
            }
        }
    }
    let suite = Suite { ctx };
    let mut records = Vec::new();
    for (index, name) in CHECKS.iter().enumerate() {
        if let Some(list) = checks {
            if !list.iter().any(|n| n == name) {
                continue;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64 + 1);
        let threshold = suite.threshold(name);
        let outcome = suite.run(name, &mut rng);
        let record = match outcome {
            Ok(Outcome::Measured { samples, residual }) => {
                let ok = match threshold.comparison {
                    Comparison::AtMost => residual <= threshold.tolerance,
                    Comparison::Exceeds => residual > threshold.tolerance,
                };
                CheckRecord {
                    name: name.to_string(),
                    status: if ok { Status::Pass } else { Status::Fail },
                    samples,
                    max_residual: residual.is_finite().then_some(residual),
                    tolerance: threshold.tolerance,
                    comparison: threshold.comparison,
                    message: None,
                }
            }
            Ok(Outcome::NotApplicable(why)) => CheckRecord {
                name: name.to_string(),
                status: Status::NotApplicable,
                samples: 0,
                max_residual: None,
                tolerance: threshold.tolerance,
                comparison: threshold.comparison,
                message: Some(why.to_string()),
            },
            Err(e) => CheckRecord {
                name: name.to_string(),
                status: Status::Fail,
                samples: 0,
                max_residual: None,
                tolerance: threshold.tolerance,
                comparison: threshold.comparison,
                message: Some(format!("{}: {e}", e.code())),
            },
        };
        records.push(record);
    }
    let pass = records.iter().all(|r| r.status != Status::Fail);
    Ok(VerificationReport {
        curve: CurveJson::from_poly(&ctx.f),
        seed,
        pass,
        checks: records,
    })
}
