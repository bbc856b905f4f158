//! Kleinian functions of weight 2 (S, S_jk), the ℘ functions, the
//! Weierstrass-form σ family, the Abel map and Jacobi inversion.

use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::abel::abel_integrals;
use crate::curve::{AdmissiblePolynomial, CurvePoint, Divisor};
use crate::error::{Error, Result};
use crate::periods::PeriodData;
use crate::roots::polynomial_roots;
use crate::theta::{theta_char, theta_jet, Mat2, ThetaJet, Vec2};
use crate::tol::Tolerances;

const I: C64 = C64::new(0.0, 1.0);

/// Below this relative size of S, S_jk comes from the fitted theta basis
/// rather than from ℘_jk·S.
pub const FIT_SWITCH: f64 = 1e-3;

const FIT_POINTS: usize = 32;

/// Characteristics of the second-order theta functions θ[ε, 0](2u; 2Ω)
/// spanning the weight-2 space.
const SECOND_ORDER: [[f64; 2]; 4] = [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.5, 0.5]];

/// Coefficients of S, S11, S12, S22 in the second-order theta basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisFit {
    pub coeffs: [[C64; 4]; 4],
    /// Worst relative residual of the least-squares fit at its sample points.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct KleinianContext {
    pub f: AdmissiblePolynomial,
    pub pd: PeriodData,
    pub tol: Tolerances,
    /// η_A A⁻¹
    pub q: Mat2,
    /// A⁻¹
    pub m: Mat2,
    pub omega: Mat2,
    pub delta: Vec2,
    pub c_s: C64,
    /// Normalization of σ and the characteristic vector m″ of Δ
    /// (Weierstrass form only).
    pub sigma: Option<SigmaData>,
    pub fit: BasisFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaData {
    pub c_sigma: C64,
    pub m2: [f64; 2],
}

/// Derivative data of S at one point.
#[derive(Debug, Clone, Copy)]
struct SPieces {
    minus: ThetaJet,
    plus: ThetaJet,
    exp_quad: C64,
    /// min over the two theta factors of |θ| / Σ|terms|
    rel: f64,
}

fn vec2(a: C64, b: C64) -> Vec2 {
    Vec2::new(a, b)
}

fn halton(index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// The 4×4 matrix whose determinant vanishes on the Kummer quartic.
pub fn quartic_matrix(f: &AdmissiblePolynomial, p11: C64, p12: C64, p22: C64) -> Matrix4<C64> {
    let c = f.coeffs();
    let two = C64::new(2.0, 0.0);
    let mid = c[3] * 0.5 + c[5] * 0.5 * p12 + c[6] * p12 * p22;
    Matrix4::new(
        -c[0],
        c[1] * 0.5,
        two * p11,
        -two * p12,
        c[1] * 0.5,
        -c[2] - 4.0 * p11 - c[6] * p12 * p12,
        mid,
        two * p22,
        two * p11,
        mid,
        -c[4] - c[5] * p22 - c[6] * p22 * p22,
        two,
        -two * p12,
        two * p22,
        two,
        C64::new(0.0, 0.0),
    )
}

/// |det| / (max |entry|)⁴ for the quartic matrix.
pub fn quartic_residual(f: &AdmissiblePolynomial, p: [C64; 3]) -> f64 {
    let m = quartic_matrix(f, p[0], p[1], p[2]);
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    m.determinant().norm() / scale.powi(4)
}

/// (℘11, ℘12, ℘22) from the second log-derivatives L = ∂²ln S.
pub fn wp_from_log_hessian(f: &AdmissiblePolynomial, l: [[C64; 2]; 2], tol_id: f64) -> Result<[C64; 3]> {
    let c = f.coeffs();
    let (f5, f6) = (c[5], c[6]);
    let (l11, l12, l22) = (l[0][0], 0.5 * (l[0][1] + l[1][0]), l[1][1]);
    if f6 == C64::new(0.0, 0.0) {
        let p12 = -2.0 * l12 / f5;
        let p22 = -2.0 * l22 / f5;
        return Ok([-l11 * 0.5, p12, p22]);
    }
    // f6·L12 = (f6 q² + f5/2 q + L22)(f6 q + f5/2) with q = ℘22
    let cubic = [
        l22 * f5 * 0.5 - f6 * l12,
        f5 * f5 * 0.25 + f6 * l22,
        f5 * f6,
        f6 * f6,
    ];
    let roots = polynomial_roots(&cubic)?;
    let mut scored: Vec<([C64; 3], f64)> = roots
        .iter()
        .map(|&q| {
            let p12 = -(l22 + f5 * 0.5 * q + f6 * q * q) / f6;
            let p11 = -(l11 + f6 * p12 * p12) * 0.5;
            let p = [p11, p12, q];
            (p, quartic_residual(f, p))
        })
        .collect();
    scored.sort_by(|a, b| a.1.total_cmp(&b.1));
    if scored.len() > 1 && scored[1].1 < tol_id {
        return Err(Error::RootSelectionAmbiguity(scored[0].1, scored[1].1));
    }
    Ok(scored[0].0)
}

impl KleinianContext {
    pub fn new(f: &AdmissiblePolynomial, pd: &PeriodData) -> Result<Self> {
        Self::with_tolerances(f, pd, pd.tolerances)
    }

    pub fn with_tolerances(f: &AdmissiblePolynomial, pd: &PeriodData, tol: Tolerances) -> Result<Self> {
        if pd.coeffs != *f.coeffs() {
            return Err(Error::InvalidInput("period data belongs to a different curve".into()));
        }
        let mut ctx = KleinianContext {
            f: f.clone(),
            pd: pd.clone(),
            tol,
            q: pd.quadratic_form(),
            m: pd.a_inv(),
            omega: pd.omega,
            delta: pd.delta,
            c_s: C64::new(1.0, 0.0),
            sigma: None,
            fit: BasisFit {
                coeffs: [[C64::new(0.0, 0.0); 4]; 4],
                residual: 0.0,
            },
        };
        ctx.normalize_s()?;
        if f.is_weierstrass_form() {
            ctx.normalize_sigma()?;
        }
        ctx.fit = ctx.fit_basis()?;
        Ok(ctx)
    }

    fn pieces(&self, z: &Vec2, order: usize) -> Result<SPieces> {
        let u = self.m * z;
        let minus = theta_jet(&(u - self.delta), &self.omega, order)?;
        let plus = theta_jet(&(u + self.delta), &self.omega, order)?;
        let exp_quad = (z.transpose() * self.q * z)[0].exp();
        let rel = (minus.value.norm() / minus.abs_sum).min(plus.value.norm() / plus.abs_sum);
        Ok(SPieces {
            minus,
            plus,
            exp_quad,
            rel,
        })
    }

    /// Gradient and Hessian in z of g(Mz) = θ(Mz − Δ)θ(Mz + Δ).
    fn product_jet(&self, p: &SPieces) -> (C64, [C64; 2], [[C64; 2]; 2]) {
        let (a, b) = (&p.minus, &p.plus);
        let g = a.value * b.value;
        let mut gu = [C64::new(0.0, 0.0); 2];
        let mut hu = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            gu[i] = a.grad[i] * b.value + a.value * b.grad[i];
            for j in 0..2 {
                hu[i][j] = a.hess[i][j] * b.value
                    + a.grad[i] * b.grad[j]
                    + a.grad[j] * b.grad[i]
                    + a.value * b.hess[i][j];
            }
        }
        let (gz, hz) = self.to_z(&gu, &hu);
        (g, gz, hz)
    }

    /// Converts u-derivatives to z-derivatives through u = A⁻¹z.
    fn to_z(&self, gu: &[C64; 2], hu: &[[C64; 2]; 2]) -> ([C64; 2], [[C64; 2]; 2]) {
        let m = &self.m;
        let mut gz = [C64::new(0.0, 0.0); 2];
        let mut hz = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for a in 0..2 {
                gz[i] += m[(a, i)] * gu[a];
            }
            for j in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        hz[i][j] += m[(a, i)] * m[(b, j)] * hu[a][b];
                    }
                }
            }
        }
        (gz, hz)
    }

    fn normalize_s(&mut self) -> Result<()> {
        let p = self.pieces(&Vec2::zeros(), 2)?;
        let (g, gz, hz) = self.product_jet(&p);
        // at z = 0 the exponential factor contributes 2Q·g to the Hessian
        let h = |i: usize, j: usize| hz[i][j] + 2.0 * self.q[(i, j)] * g;
        let h11 = h(0, 0);
        if h11.norm() == 0.0 {
            return Err(Error::Normalization("∂²S/∂z1²(0) vanishes".into()));
        }
        let c = 2.0 / h11;
        let off = [
            (c * g).norm(),
            (c * gz[0]).norm(),
            (c * gz[1]).norm(),
            (c * h(0, 1)).norm(),
            (c * h(1, 1)).norm(),
        ];
        let worst = off.iter().cloned().fold(0.0, f64::max);
        if worst > self.tol.jet {
            return Err(Error::Normalization(format!(
                "order-2 jet of S at 0 differs from z1² by {worst:e}"
            )));
        }
        self.c_s = c;
        Ok(())
    }

    fn normalize_sigma(&mut self) -> Result<()> {
        let y = self.omega.map(|z| z.im);
        let yinv = y
            .try_inverse()
            .ok_or_else(|| Error::RiemannMatrix("singular Im Ω".into()))?;
        let im_d = nalgebra::Vector2::new(self.delta[0].im, self.delta[1].im);
        let m2 = yinv * im_d * 2.0;
        let m2 = [m2[0], m2[1]];
        let jet = theta_jet(&(-self.delta), &self.omega, 1)?;
        // d/dz [exp(−πi m″ᵀMz) θ(Mz − Δ)] at 0
        let mut d = [C64::new(0.0, 0.0); 2];
        for i in 0..2 {
            for a in 0..2 {
                d[i] += self.m[(a, i)] * (jet.grad[a] - I * PI * m2[a] * jet.value);
            }
        }
        if d[0].norm() == 0.0 {
            return Err(Error::Normalization("∂σ/∂z1(0) vanishes".into()));
        }
        let c = 1.0 / d[0];
        let stray = (c * jet.value).norm().max((c * d[1]).norm());
        if stray > self.tol.jet {
            return Err(Error::Normalization(format!(
                "σ jet at 0 differs from z1 by {stray:e}"
            )));
        }
        self.sigma = Some(SigmaData { c_sigma: c, m2 });
        Ok(())
    }

    /// Values of the four second-order theta functions at 2u with their
    /// z-gradients, without the exponential factor.
    fn second_order(&self, z: &Vec2, order: usize) -> Result<[(C64, [C64; 2]); 4]> {
        let u = self.m * z;
        let w = u * C64::new(2.0, 0.0);
        let om2 = self.omega * C64::new(2.0, 0.0);
        let mut out = [(C64::new(0.0, 0.0), [C64::new(0.0, 0.0); 2]); 4];
        for (k, eps) in SECOND_ORDER.iter().enumerate() {
            let jet = theta_char(&w, &om2, *eps, [0.0, 0.0], order)?;
            let mut gz = [C64::new(0.0, 0.0); 2];
            if order >= 1 {
                for i in 0..2 {
                    for a in 0..2 {
                        gz[i] += 2.0 * self.m[(a, i)] * jet.grad[a];
                    }
                }
            }
            out[k] = (jet.value, gz);
        }
        Ok(out)
    }

    fn fit_basis(&self) -> Result<BasisFit> {
        let mut rows: Vec<[C64; 4]> = Vec::new();
        let mut rhs: Vec<[C64; 4]> = Vec::new();
        let mut idx = 1;
        while rows.len() < FIT_POINTS {
            let s = [halton(idx, 2) - 0.5, halton(idx, 3) - 0.5];
            let t = [halton(idx, 5) - 0.5, halton(idx, 7) - 0.5];
            idx += 1;
            if idx > 50 * FIT_POINTS {
                return Err(Error::Normalization("too few generic points for the basis fit".into()));
            }
            let u = vec2(C64::new(s[0], 0.0), C64::new(s[1], 0.0))
                + self.omega * vec2(C64::new(t[0], 0.0), C64::new(t[1], 0.0));
            let z = self.pd.a * u;
            let p = self.pieces(&z, 2)?;
            if p.rel < 1e-2 {
                continue;
            }
            let wp = match self.wp_from_pieces(&p) {
                Ok(w) => w,
                Err(_) => continue,
            };
            let s_over_exp = self.c_s * p.minus.value * p.plus.value;
            let basis = self.second_order(&z, 0)?;
            let scale = basis.iter().map(|b| b.0.norm()).fold(0.0, f64::max);
            rows.push(basis.map(|b| b.0 / scale));
            rhs.push([s_over_exp, wp[0] * s_over_exp, wp[1] * s_over_exp, wp[2] * s_over_exp].map(|v| v / scale));
        }
        let a = DMatrix::from_fn(rows.len(), 4, |i, j| rows[i][j]);
        let svd = a.clone().svd(true, true);
        let mut coeffs = [[C64::new(0.0, 0.0); 4]; 4];
        let mut residual = 0.0f64;
        for k in 0..4 {
            let b = DVector::from_fn(rhs.len(), |i, _| rhs[i][k]);
            let x = svd
                .solve(&b, 1e-300)
                .map_err(|e| Error::Normalization(format!("basis fit: {e}")))?;
            let r = &a * &x - &b;
            let amax = |v: &DVector<C64>| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let rel = amax(&r) / amax(&b).max(1e-300);
            residual = residual.max(rel);
            for j in 0..4 {
                coeffs[k][j] = x[j];
            }
        }
        Ok(BasisFit { coeffs, residual })
    }

    fn fitted(&self, z: &Vec2, k: usize) -> Result<(C64, [C64; 2])> {
        let basis = self.second_order(z, 1)?;
        let e = (z.transpose() * self.q * z)[0].exp();
        let qz = self.q * z;
        let mut v = C64::new(0.0, 0.0);
        let mut g = [C64::new(0.0, 0.0); 2];
        for (j, (val, grad)) in basis.iter().enumerate() {
            let c = self.fit.coeffs[k][j];
            v += c * val;
            g[0] += c * grad[0];
            g[1] += c * grad[1];
        }
        let grad = [e * (2.0 * qz[0] * v + g[0]), e * (2.0 * qz[1] * v + g[1])];
        Ok((e * v, grad))
    }

    fn log_hessian(&self, p: &SPieces) -> [[C64; 2]; 2] {
        let mut hu = [[C64::new(0.0, 0.0); 2]; 2];
        for t in [&p.minus, &p.plus] {
            for a in 0..2 {
                for b in 0..2 {
                    hu[a][b] += t.hess[a][b] / t.value - t.grad[a] * t.grad[b] / (t.value * t.value);
                }
            }
        }
        let (_, hz) = self.to_z(&[C64::new(0.0, 0.0); 2], &hu);
        let mut l = hz;
        for i in 0..2 {
            for j in 0..2 {
                l[i][j] += 2.0 * self.q[(i, j)];
            }
        }
        l
    }

    fn wp_from_pieces(&self, p: &SPieces) -> Result<[C64; 3]> {
        if p.rel < self.tol.zero {
            return Err(Error::OnThetaDivisor(p.rel));
        }
        wp_from_log_hessian(&self.f, self.log_hessian(p), self.tol.id)
    }

    // ------------------------------------------------------------ public

    /// S(z).
    pub fn s_eval(&self, z: &Vec2) -> Result<C64> {
        let p = self.pieces(z, 0)?;
        Ok(self.c_s * p.exp_quad * p.minus.value * p.plus.value)
    }

    /// Relative size of S at z: 0 on the zero set of S, of order 1 away from it.
    pub fn s_relative(&self, z: &Vec2) -> Result<f64> {
        Ok(self.pieces(z, 0)?.rel)
    }

    /// ∂S/∂z_j.
    pub fn s_grad(&self, z: &Vec2) -> Result<[C64; 2]> {
        let p = self.pieces(z, 1)?;
        let (g, gz, _) = self.product_jet(&p);
        let qz = self.q * z;
        let e = self.c_s * p.exp_quad;
        Ok([e * (2.0 * qz[0] * g + gz[0]), e * (2.0 * qz[1] * g + gz[1])])
    }

    /// ∂ ln S/∂z_j.
    pub fn log_s_grad(&self, z: &Vec2) -> Result<[C64; 2]> {
        let p = self.pieces(z, 1)?;
        if p.rel < self.tol.zero {
            return Err(Error::OnThetaDivisor(p.rel));
        }
        let mut gu = [C64::new(0.0, 0.0); 2];
        for t in [&p.minus, &p.plus] {
            for a in 0..2 {
                gu[a] += t.grad[a] / t.value;
            }
        }
        let (gz, _) = self.to_z(&gu, &[[C64::new(0.0, 0.0); 2]; 2]);
        let qz = self.q * z;
        Ok([gz[0] + 2.0 * qz[0], gz[1] + 2.0 * qz[1]])
    }

    /// ∂² ln S/∂z_j∂z_k.
    pub fn log_s_hessian(&self, z: &Vec2) -> Result<[[C64; 2]; 2]> {
        let p = self.pieces(z, 2)?;
        if p.rel < self.tol.zero {
            return Err(Error::OnThetaDivisor(p.rel));
        }
        Ok(self.log_hessian(&p))
    }

    /// (℘11, ℘12, ℘22) at z.
    pub fn wp_eval(&self, z: &Vec2) -> Result<[C64; 3]> {
        let p = self.pieces(z, 2)?;
        self.wp_from_pieces(&p)
    }

    /// (S11, S12, S22) at z.
    pub fn s_jk_eval(&self, z: &Vec2) -> Result<[C64; 3]> {
        let p = self.pieces(z, 2)?;
        if p.rel >= FIT_SWITCH {
            if let Ok(wp) = self.wp_from_pieces(&p) {
                let s = self.c_s * p.exp_quad * p.minus.value * p.plus.value;
                return Ok(wp.map(|w| w * s));
            }
        }
        Ok([
            self.fitted(z, 1)?.0,
            self.fitted(z, 2)?.0,
            self.fitted(z, 3)?.0,
        ])
    }

    /// ∂/∂z_j of (S, S11, S12, S22) from the fitted theta basis.
    pub fn weight2_grads(&self, z: &Vec2) -> Result<[[C64; 2]; 4]> {
        let mut out = [[C64::new(0.0, 0.0); 2]; 4];
        out[0] = self.s_grad(z)?;
        for k in 1..4 {
            out[k] = self.fitted(z, k)?.1;
        }
        Ok(out)
    }

    /// S evaluated through the fitted theta basis (a consistency witness).
    pub fn s_fitted(&self, z: &Vec2) -> Result<C64> {
        Ok(self.fitted(z, 0)?.0)
    }

    fn sigma_data(&self) -> Result<SigmaData> {
        self.sigma.ok_or(Error::NotWeierstrassForm)
    }

    /// σ(z) (Weierstrass form only).
    pub fn sigma_eval(&self, z: &Vec2) -> Result<C64> {
        let sd = self.sigma_data()?;
        let u = self.m * z;
        let t = theta_jet(&(u - self.delta), &self.omega, 0)?;
        let half_quad = (z.transpose() * self.q * z)[0] * 0.5;
        let chi = -I * PI * (u[0] * sd.m2[0] + u[1] * sd.m2[1]);
        Ok(sd.c_sigma * (half_quad + chi).exp() * t.value)
    }

    /// (ζ1, ζ2, ℘111, ℘112, ℘122, ℘222) (Weierstrass form only).
    pub fn sigma_log_derivs(&self, z: &Vec2) -> Result<SigmaLogDerivs> {
        let sd = self.sigma_data()?;
        let u = self.m * z;
        let t = theta_jet(&(u - self.delta), &self.omega, 3)?;
        let rel = t.value.norm() / t.abs_sum;
        if rel < self.tol.zero {
            return Err(Error::OnSigmaDivisor(rel));
        }
        let v = t.value;
        let m = &self.m;
        let qz = self.q * z;
        let mut zeta = [C64::new(0.0, 0.0); 2];
        for i in 0..2 {
            zeta[i] = qz[i];
            for a in 0..2 {
                zeta[i] += m[(a, i)] * (t.grad[a] / v - I * PI * sd.m2[a]);
            }
        }
        // third derivatives of ln θ in u
        let mut l3 = [[[C64::new(0.0, 0.0); 2]; 2]; 2];
        let mut l2 = [[C64::new(0.0, 0.0); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                l2[a][b] = t.hess[a][b] / v - t.grad[a] * t.grad[b] / (v * v);
                for c in 0..2 {
                    l3[a][b][c] = t.third[a][b][c] / v
                        - (t.hess[a][b] * t.grad[c] + t.hess[a][c] * t.grad[b] + t.hess[b][c] * t.grad[a])
                            / (v * v)
                        + 2.0 * t.grad[a] * t.grad[b] * t.grad[c] / (v * v * v);
                }
            }
        }
        let mut wp3 = [[[C64::new(0.0, 0.0); 2]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut s = C64::new(0.0, 0.0);
                    for a in 0..2 {
                        for b in 0..2 {
                            for c in 0..2 {
                                s += m[(a, i)] * m[(b, j)] * m[(c, k)] * l3[a][b][c];
                            }
                        }
                    }
                    wp3[i][j][k] = -s;
                }
            }
        }
        let mut wp2 = [C64::new(0.0, 0.0); 3];
        for (slot, (i, j)) in [(0, 0), (0, 1), (1, 1)].iter().enumerate() {
            let mut s = self.q[(*i, *j)];
            for a in 0..2 {
                for b in 0..2 {
                    s += m[(a, *i)] * m[(b, *j)] * l2[a][b];
                }
            }
            wp2[slot] = -s;
        }
        Ok(SigmaLogDerivs {
            zeta,
            wp: wp2,
            wp3: [wp3[0][0][0], wp3[0][0][1], wp3[0][1][1], wp3[1][1][1]],
        })
    }

    // ----------------------------------------------------- Abel and Jacobi

    /// Abel image of D: ∫ (ω1, ω2) from 𝒥(p) to q.
    pub fn abel_forward(&self, d: &Divisor) -> Result<Vec2> {
        Ok(abel_integrals(&self.f, d, None)?.z)
    }

    /// Abel image along the path through branch point `via`.
    pub fn abel_forward_via(&self, d: &Divisor, via: usize) -> Result<Vec2> {
        Ok(abel_integrals(&self.f, d, Some(via))?.z)
    }

    /// The divisor D with Abel image z (mod periods).
    pub fn jacobi_invert(&self, z: &Vec2) -> Result<Divisor> {
        let wp = self.wp_eval(z)?;
        let [p11, p12, p22] = wp;
        let disc = (p22 * p22 + 4.0 * p12).sqrt();
        let x1 = (p22 + disc) * 0.5;
        // the smaller root from Vieta avoids cancellation
        let x2 = if x1.norm() > 0.0 { -p12 / x1 } else { (p22 - disc) * 0.5 };
        let y1 = self.f.eval(x1).sqrt();
        let y2 = self.f.eval(x2).sqrt();

        let mut best: Option<(Divisor, f64)> = None;
        for s in [1.0, -1.0] {
            let d = Divisor::new(
                CurvePoint::Affine { x: x1, y: y1 },
                CurvePoint::Affine { x: x2, y: y2 * s },
            );
            let err = match self.f.xi(&d) {
                Ok(xi) => (xi[0] - p11).norm() / (1.0 + p11.norm()),
                Err(_) => f64::INFINITY,
            };
            if best.as_ref().is_none_or(|b| err < b.1) {
                best = Some((d, err));
            }
        }
        let (d, _) = best.expect("two candidates were scored");
        let scale = self.period_scale();
        let img = self.abel_forward(&d)?;
        let direct = self.pd.nearest_lattice(&(img - z))?.0.norm() / scale;
        let flipped = self.pd.nearest_lattice(&(-img - z))?.0.norm() / scale;
        let (d, res) = if direct <= flipped {
            (d, direct)
        } else {
            (d.involuted(&self.f), flipped)
        };
        if res > self.tol.rt {
            return Err(Error::SignResolution(res));
        }
        Ok(d)
    }

    /// max |entry| of A and B, the length scale of the period lattice.
    pub fn period_scale(&self) -> f64 {
        self.pd
            .a
            .iter()
            .chain(self.pd.b.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// (ρ1, ρ2, λ, z) for an affine, non-special, off-diagonal divisor.
    pub fn rho_lambda_eval(&self, d: &Divisor) -> Result<RhoLambda> {
        let ((x1, y1), (x2, y2)) = match (d.p.affine(), d.q.affine()) {
            (Some(p), Some(q)) => (p, q),
            _ => return Err(Error::InfinitePoint),
        };
        if d.is_special(&self.f) {
            return Err(Error::SpecialDivisor("ρ and λ need a non-special divisor".into()));
        }
        let scale = 1.0 + x1.norm().max(x2.norm());
        if (x1 - x2).norm() <= 1e-12 * scale {
            return Err(Error::Diagonal);
        }
        let ai = abel_integrals(&self.f, d, None)?;
        let r = ai.r.ok_or(Error::InfinitePoint)?;
        Ok(RhoLambda {
            rho: r,
            lambda: (y1 - y2) / (x1 - x2),
            z: ai.z,
        })
    }

    /// Every value at one point, omitting the ones that are undefined there.
    pub fn eval_bundle(&self, z: &Vec2, with_sigma: bool) -> Result<EvalBundle> {
        let s = self.s_eval(z)?;
        let sjk = self.s_jk_eval(z)?;
        let wp = self.wp_eval(z).ok();
        let mut b = EvalBundle {
            z: [z[0], z[1]],
            s,
            s11: sjk[0],
            s12: sjk[1],
            s22: sjk[2],
            p11: wp.map(|w| w[0]),
            p12: wp.map(|w| w[1]),
            p22: wp.map(|w| w[2]),
            ..Default::default()
        };
        if with_sigma {
            b.sigma = Some(self.sigma_eval(z)?);
            if let Ok(ld) = self.sigma_log_derivs(z) {
                b.zeta1 = Some(ld.zeta[0]);
                b.zeta2 = Some(ld.zeta[1]);
                b.p111 = Some(ld.wp3[0]);
                b.p112 = Some(ld.wp3[1]);
                b.p122 = Some(ld.wp3[2]);
                b.p222 = Some(ld.wp3[3]);
            }
        }
        Ok(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaLogDerivs {
    pub zeta: [C64; 2],
    /// (℘11, ℘12, ℘22) as −∂² ln σ
    pub wp: [C64; 3],
    /// (℘111, ℘112, ℘122, ℘222)
    pub wp3: [C64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoLambda {
    pub rho: [C64; 2],
    pub lambda: C64,
    pub z: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalBundle {
    pub z: [C64; 2],
    pub s: C64,
    pub s11: C64,
    pub s12: C64,
    pub s22: C64,
    pub p11: Option<C64>,
    pub p12: Option<C64>,
    pub p22: Option<C64>,
    pub sigma: Option<C64>,
    pub zeta1: Option<C64>,
    pub zeta2: Option<C64>,
    pub p111: Option<C64>,
    pub p112: Option<C64>,
    pub p122: Option<C64>,
    pub p222: Option<C64>,
}

type Pair = [f64; 2];

fn pr(z: C64) -> Pair {
    [z.re, z.im]
}

/// Serialized evaluation bundle; absent values are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalBundleJson {
    pub z: [Pair; 2],
    #[serde(rename = "S")]
    pub s: Pair,
    #[serde(rename = "S11")]
    pub s11: Pair,
    #[serde(rename = "S12")]
    pub s12: Pair,
    #[serde(rename = "S22")]
    pub s22: Pair,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p11: Option<Pair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p12: Option<Pair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p22: Option<Pair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Pair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta1: Option<Pair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta2: Option<Pair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p111: Option<Pair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p112: Option<Pair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p122: Option<Pair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p222: Option<Pair>,
}

impl From<&EvalBundle> for EvalBundleJson {
    fn from(b: &EvalBundle) -> Self {
        EvalBundleJson {
            z: [pr(b.z[0]), pr(b.z[1])],
            s: pr(b.s),
            s11: pr(b.s11),
            s12: pr(b.s12),
            s22: pr(b.s22),
            p11: b.p11.map(pr),
            p12: b.p12.map(pr),
            p22: b.p22.map(pr),
            sigma: b.sigma.map(pr),
            zeta1: b.zeta1.map(pr),
            zeta2: b.zeta2.map(pr),
            p111: b.p111.map(pr),
            p112: b.p112.map(pr),
            p122: b.p122.map(pr),
            p222: b.p222.map(pr),
        }
    }
}
