//! Abel-map integrals along concrete paths, without any period data.
//!
//! The image of D = (p) + (q) is the integral of (ω1, ω2) along a path from
//! 𝒥(p) to q. The path goes through a branch point, where the sheets meet,
//! so it can start and end anywhere.

use num_complex::Complex64 as C64;

use crate::curve::{AdmissiblePolynomial, CurvePoint, Divisor};
use crate::error::Result;
use crate::path::{path_between, path_via, Path};
use crate::quad::TanhSinh;
use crate::theta::Vec2;

/// Integrals of (ω1, ω2, r1, r2) along the Abel path of a divisor.
#[derive(Debug, Clone)]
pub struct AbelIntegrals {
    pub z: Vec2,
    /// Integrals of r1, r2; `None` when the path reaches infinity.
    pub r: Option<[C64; 2]>,
    pub path: Path,
}

/// The Abel path of `d`, routed through branch point `via` if given.
pub fn abel_path(f: &AdmissiblePolynomial, d: &Divisor, via: Option<usize>) -> Result<Path> {
    let start = f.involution(&d.p);
    match via {
        Some(k) => path_via(f, &start, &d.q, k),
        None => path_between(f, &start, &d.q),
    }
}

pub fn abel_integrals(
    f: &AdmissiblePolynomial,
    d: &Divisor,
    via: Option<usize>,
) -> Result<AbelIntegrals> {
    let path = abel_path(f, d, via)?;
    let v = path.integrate_all(f, &TanhSinh::default())?;
    let r = if path.has_ray() { None } else { Some([v[2], v[3]]) };
    Ok(AbelIntegrals {
        z: Vec2::new(v[0], v[1]),
        r,
        path,
    })
}

/// Integral of (ω1, ω2) from `from` to `to`.
pub fn integral_between(
    f: &AdmissiblePolynomial,
    from: &CurvePoint,
    to: &CurvePoint,
) -> Result<Vec2> {
    let path = path_between(f, from, to)?;
    let v = path.integrate_all(f, &TanhSinh::default())?;
    Ok(Vec2::new(v[0], v[1]))
}
