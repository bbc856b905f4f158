//! Complex polynomial roots: companion-matrix eigenvalues polished by Newton.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Horner evaluation; `coeffs` in ascending degree order.
pub fn horner(coeffs: &[C64], x: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// Value and first derivative in one pass.
pub fn horner_with_derivative(coeffs: &[C64], x: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn trim(coeffs: &[C64]) -> &[C64] {
    let mut n = coeffs.len();
    while n > 0 && coeffs[n - 1] == C64::new(0.0, 0.0) {
        n -= 1;
    }
    &coeffs[..n]
}

/// All roots of the polynomial with ascending coefficients `coeffs`.
///
/// Roots come from the eigenvalues of the companion matrix and are then
/// polished by Newton iteration on the original coefficients. The result is
/// sorted by real part, ties (within `1e-12` of the root scale) broken by
/// imaginary part.
pub fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let c = trim(coeffs);
    if c.len() < 2 {
        return Ok(Vec::new());
    }
    let n = c.len() - 1;
    // Highly symmetric companion matrices (x^n - 1 is a permutation matrix)
    // can stall the QR iteration; retry on a Taylor-shifted polynomial.
    let scale = c[..n]
        .iter()
        .map(|a| (a / c[n]).norm())
        .fold(1.0f64, f64::max);
    let shifts = [
        C64::new(0.0, 0.0),
        C64::new(0.0123, 0.0071) * scale,
        C64::new(-0.0311, 0.0197) * scale,
        C64::new(0.1173, -0.0889) * scale,
    ];
    let mut eig = None;
    for shift in shifts {
        let shifted = taylor_shift(c, shift);
        if let Some(vals) = companion_eigenvalues(&shifted) {
            eig = Some(vals.into_iter().map(|z| z + shift).collect::<Vec<_>>());
            break;
        }
    }
    let eig =
        eig.ok_or_else(|| Error::Convergence("Schur iteration on the companion matrix".into()))?;
    let mut roots: Vec<C64> = eig.iter().map(|&z| newton_polish(c, z)).collect();
    let scale = roots.iter().fold(1.0f64, |m, r| m.max(r.norm()));
    for r in &roots {
        if !r.re.is_finite() || !r.im.is_finite() {
            return Err(Error::Convergence("non-finite root".into()));
        }
    }
    sort_roots(&mut roots, scale);
    Ok(roots)
}

/// Coefficients of p(x + shift).
fn taylor_shift(c: &[C64], shift: C64) -> Vec<C64> {
    let mut out = c.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = out[j + 1] * shift;
            out[j] += t;
        }
    }
    out
}

fn companion_eigenvalues(c: &[C64]) -> Option<Vec<C64>> {
    let n = c.len() - 1;
    let lead = c[n];
    let mut companion = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..n {
        companion[(i, n - 1)] = -c[i] / lead;
    }
    let vals = companion.try_schur(f64::EPSILON, 10_000)?.eigenvalues()?;
    Some(vals.iter().copied().collect())
}

pub(crate) fn sort_roots(roots: &mut [C64], scale: f64) {
    let tie = 1e-12 * scale;
    roots.sort_by(|a, b| {
        if (a.re - b.re).abs() <= tie {
            a.im.total_cmp(&b.im)
        } else {
            a.re.total_cmp(&b.re)
        }
    });
}

fn newton_polish(coeffs: &[C64], mut z: C64) -> C64 {
    let mut best = z;
    let mut best_res = horner(coeffs, z).norm();
    for _ in 0..50 {
        let (p, dp) = horner_with_derivative(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        z -= step;
        let res = horner(coeffs, z).norm();
        if res < best_res {
            best = z;
            best_res = res;
        }
        if step.norm() <= 1e-17 * z.norm().max(1e-300) {
            break;
        }
    }
    best
}
