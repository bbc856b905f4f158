//! Tanh-sinh (double-exponential) quadrature on [0, 1] for vector-valued
//! complex integrands with algebraic endpoint singularities.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative tolerance on successive level estimates.
pub const TOL_QUAD: f64 = 1e-12;

const T_MAX: f64 = 6.0;
const H0: f64 = 0.5;
const MIN_LEVELS: usize = 3;
const MAX_LEVELS: usize = 12;

#[derive(Debug, Clone, Copy)]
pub struct TanhSinh {
    pub tol: f64,
    pub max_levels: usize,
}

impl Default for TanhSinh {
    fn default() -> Self {
        TanhSinh {
            tol: TOL_QUAD,
            max_levels: MAX_LEVELS,
        }
    }
}

/// Abscissa as (s, 1 − s) and the Jacobian ds/dt at parameter t.
#[inline]
fn node(t: f64) -> (f64, f64, f64) {
    let u = 0.5 * PI * t.sinh();
    // s = 1/(1 + e^{−2u}); both s and 1 − s computed without cancellation
    let (s, sc) = if u >= 0.0 {
        let e = (-2.0 * u).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = (2.0 * u).exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    };
    let w = PI * t.cosh() * s * sc;
    (s, sc, w)
}

impl TanhSinh {
    /// Integrates `g` over s ∈ [0, 1]. The closure receives `(s, 1 − s)` so
    /// endpoint factors can be formed without cancellation.
    pub fn integrate<const N: usize, F>(&self, mut g: F) -> Result<[C64; N]>
    where
        F: FnMut(f64, f64) -> [C64; N],
    {
        let zero = [C64::new(0.0, 0.0); N];
        let mut sum = zero;
        let mut abs_sum = [0.0f64; N];
        let mut evaluations = 0usize;

        let mut accumulate = |t: f64, sum: &mut [C64; N], abs_sum: &mut [f64; N]| -> bool {
            let (s, sc, w) = node(t);
            if w == 0.0 || s == 0.0 || sc == 0.0 {
                return true;
            }
            let v = g(s, sc);
            for k in 0..N {
                let term = v[k] * w;
                if !term.re.is_finite() || !term.im.is_finite() {
                    return false;
                }
                sum[k] += term;
                abs_sum[k] += term.norm();
            }
            true
        };

        let mut h = H0;
        let kmax = (T_MAX / h).ceil() as i64;
        for k in -kmax..=kmax {
            if !accumulate(k as f64 * h, &mut sum, &mut abs_sum) {
                return Err(Error::Quadrature {
                    change: f64::NAN,
                    evaluations,
                });
            }
            evaluations += 1;
        }
        let mut prev = sum.map(|v| v * h);
        let mut last_change = f64::INFINITY;
        for level in 1..self.max_levels {
            h *= 0.5;
            let kmax = (T_MAX / h).ceil() as i64;
            let mut k = -kmax + if kmax % 2 == 0 { 1 } else { 0 };
            while k <= kmax {
                if !accumulate(k as f64 * h, &mut sum, &mut abs_sum) {
                    return Err(Error::Quadrature {
                        change: f64::NAN,
                        evaluations,
                    });
                }
                evaluations += 1;
                k += 2;
            }
            let cur = sum.map(|v| v * h);
            let mut worst = 0.0f64;
            for i in 0..N {
                let scale = (abs_sum[i] * h).max(cur[i].norm());
                let diff = (cur[i] - prev[i]).norm();
                let rel = if scale > 0.0 { diff / scale } else { 0.0 };
                worst = worst.max(rel);
            }
            last_change = worst;
            prev = cur;
            if level + 1 >= MIN_LEVELS && worst <= self.tol {
                return Ok(cur);
            }
        }
        Err(Error::Quadrature {
            change: last_change,
            evaluations,
        })
    }
}
