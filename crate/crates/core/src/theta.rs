//! Genus-two Riemann theta function and its derivatives up to third order.
//!
//! θ(z; Ω) = Σ_n exp(πi nᵀΩn + 2πi nᵀz). The lattice sum is centred where
//! the terms peak (n ≈ −(Im Ω)⁻¹ Im z) and truncated to an ellipsoid that
//! drops terms below the target relative accuracy, including the growth of
//! the polynomial factors that derivatives bring down.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<C64>;
pub type Vec2 = Vector2<C64>;

/// Target relative accuracy of the truncated sum.
pub const EPS_TARGET: f64 = 1e-12;

/// Largest lattice extent per coordinate before the sum is refused.
pub const MAX_RADIUS: f64 = 400.0;

const I: C64 = C64::new(0.0, 1.0);

/// Value and partial derivatives of a theta function at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaJet {
    pub value: C64,
    pub grad: [C64; 2],
    pub hess: [[C64; 2]; 2],
    pub third: [[[C64; 2]; 2]; 2],
    /// Σ |term|, the natural scale against which the value's size is judged.
    pub abs_sum: f64,
}

impl ThetaJet {
    /// Partial derivative for a multi-index given as a list of coordinate
    /// indices, e.g. `[0, 1]` for ∂²/∂z1∂z2.
    pub fn partial(&self, idx: &[usize]) -> C64 {
        match idx {
            [] => self.value,
            [i] => self.grad[*i],
            [i, j] => self.hess[*i][*j],
            [i, j, k] => self.third[*i][*j][*k],
            _ => panic!("theta derivatives above third order are not computed"),
        }
    }
}

/// Checks that `omega` is symmetric with positive definite imaginary part.
pub fn check_riemann(omega: &Mat2) -> Result<()> {
    let asym = (omega[(0, 1)] - omega[(1, 0)]).norm();
    let scale = omega.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > 1e-8 * scale.max(1.0) {
        return Err(Error::RiemannMatrix(format!("not symmetric (|Ω12 − Ω21| = {asym:e})")));
    }
    let y = omega.map(|z| z.im);
    let det = y[(0, 0)] * y[(1, 1)] - y[(0, 1)] * y[(1, 0)];
    if !(y[(0, 0)] > 0.0 && det > 0.0) {
        return Err(Error::RiemannMatrix("imaginary part is not positive definite".into()));
    }
    Ok(())
}

/// Sum over m ∈ Z² + `offset` of exp(πi mᵀΩm + 2πi mᵀz) with derivative
/// factors (2πi m)^k for k ≤ `order`.
pub fn theta_sum(z: &Vec2, omega: &Mat2, offset: [f64; 2], order: usize) -> Result<ThetaJet> {
    check_riemann(omega)?;
    let y = omega.map(|w| w.im);
    let y = Matrix2::new(y[(0, 0)], 0.5 * (y[(0, 1)] + y[(1, 0)]), 0.5 * (y[(0, 1)] + y[(1, 0)]), y[(1, 1)]);
    let yinv = y
        .try_inverse()
        .ok_or_else(|| Error::RiemannMatrix("singular imaginary part".into()))?;
    let im_z = Vector2::new(z[0].im, z[1].im);
    let centre = -(yinv * im_z);

    // Terms scale like exp(−π (m − c)ᵀY(m − c)) relative to the peak; the
    // derivative factors grow at most like (2π|m|)^order.
    let base = (100.0 / EPS_TARGET).ln();
    let lambda_min = {
        let tr = y[(0, 0)] + y[(1, 1)];
        let det = y[(0, 0)] * y[(1, 1)] - y[(0, 1)] * y[(1, 0)];
        0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt())
    };
    let r0 = (base / (PI * lambda_min)).sqrt();
    let reach = centre.norm() + r0 + 1.0;
    let budget = base + order as f64 * (1.0 + 2.0 * PI * reach).ln();
    let extent = [
        (budget / PI * yinv[(0, 0)]).sqrt(),
        (budget / PI * yinv[(1, 1)]).sqrt(),
    ];
    for &e in &extent {
        if !(e <= MAX_RADIUS) {
            return Err(Error::TruncationRadius { radius: e, cap: MAX_RADIUS });
        }
    }

    let mut jet = ThetaJet {
        value: C64::new(0.0, 0.0),
        grad: [C64::new(0.0, 0.0); 2],
        hess: [[C64::new(0.0, 0.0); 2]; 2],
        third: [[[C64::new(0.0, 0.0); 2]; 2]; 2],
        abs_sum: 0.0,
    };
    let lo0 = (centre[0] - offset[0] - extent[0]).floor() as i64;
    let hi0 = (centre[0] - offset[0] + extent[0]).ceil() as i64;
    for n0 in lo0..=hi0 {
        let m0 = n0 as f64 + offset[0];
        let d0 = m0 - centre[0];
        // Solve the quadratic in d1 for the slice of the ellipsoid.
        let a = y[(1, 1)];
        let b = y[(0, 1)] * d0;
        let c = y[(0, 0)] * d0 * d0 - budget / PI;
        let disc = b * b - a * c;
        if disc < 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        let lo1 = (centre[1] - offset[1] + (-b - sq) / a).floor() as i64;
        let hi1 = (centre[1] - offset[1] + (-b + sq) / a).ceil() as i64;
        for n1 in lo1..=hi1 {
            let m1 = n1 as f64 + offset[1];
            let m = [m0, m1];
            let quad = omega[(0, 0)] * (m0 * m0)
                + (omega[(0, 1)] + omega[(1, 0)]) * (m0 * m1)
                + omega[(1, 1)] * (m1 * m1);
            let lin = z[0] * m0 + z[1] * m1;
            let term = (I * PI * quad + I * 2.0 * PI * lin).exp();
            jet.value += term;
            jet.abs_sum += term.norm();
            if order >= 1 {
                let f = [I * 2.0 * PI * m[0], I * 2.0 * PI * m[1]];
                for i in 0..2 {
                    let ti = term * f[i];
                    jet.grad[i] += ti;
                    if order >= 2 {
                        for j in 0..2 {
                            let tij = ti * f[j];
                            jet.hess[i][j] += tij;
                            if order >= 3 {
                                for k in 0..2 {
                                    jet.third[i][j][k] += tij * f[k];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(jet)
}

/// θ(z; Ω) with derivatives up to `order` (at most 3).
pub fn theta_jet(z: &Vec2, omega: &Mat2, order: usize) -> Result<ThetaJet> {
    theta_sum(z, omega, [0.0, 0.0], order.min(3))
}

pub fn theta_eval(z: &Vec2, omega: &Mat2) -> Result<C64> {
    Ok(theta_jet(z, omega, 0)?.value)
}

/// A single partial derivative; `idx` lists coordinate indices (0 or 1).
pub fn theta_deriv(z: &Vec2, omega: &Mat2, idx: &[usize]) -> Result<C64> {
    if idx.len() > 3 || idx.iter().any(|&i| i > 1) {
        return Err(Error::InvalidInput(format!("unsupported derivative multi-index {idx:?}")));
    }
    Ok(theta_jet(z, omega, idx.len())?.partial(idx))
}

/// Theta with characteristic [a; b]:
/// Σ exp(πi (n+a)ᵀΩ(n+a) + 2πi (n+a)ᵀ(z+b)).
pub fn theta_char(z: &Vec2, omega: &Mat2, a: [f64; 2], b: [f64; 2], order: usize) -> Result<ThetaJet> {
    let shifted = Vec2::new(z[0] + b[0], z[1] + b[1]);
    theta_sum(&shifted, omega, a, order.min(3))
}
