//! The curve y² = f(x): admissible polynomials, points, divisors and the
//! rational functions ξ_jk on the symmetric square.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{horner, horner_with_derivative, polynomial_roots};

/// Relative tolerance for `|y² − f(x)| ≤ ε (1 + |f(x)|)`.
pub const EPS_ON_CURVE: f64 = 1e-9;
/// Root separation threshold relative to `max(1, max |root|)`.
pub const EPS_SEP: f64 = 1e-8;
/// Near-diagonal threshold for ξ11, relative to the root scale. Below it the
/// direct quotient loses more than 1e-8 to cancellation.
pub const DELTA_DIAG: f64 = 1e-3;

const ZERO: C64 = C64::new(0.0, 0.0);

/// A degree-5 or degree-6 complex polynomial with simple roots.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissiblePolynomial {
    coeffs: [C64; 7],
    degree: usize,
    weierstrass_form: bool,
    roots: Vec<C64>,
}

impl AdmissiblePolynomial {
    /// Validate coefficients `f_0..f_6` (ascending degree).
    pub fn new(coeffs: [C64; 7]) -> Result<Self> {
        for c in &coeffs {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::InvalidInput("non-finite coefficient".into()));
            }
        }
        let degree = if coeffs[6] != ZERO {
            6
        } else if coeffs[5] != ZERO {
            5
        } else {
            return Err(Error::Degree);
        };
        let roots = polynomial_roots(&coeffs[..=degree])?;
        let scale = roots.iter().fold(1.0f64, |m, r| m.max(r.norm()));
        let threshold = EPS_SEP * scale;
        let mut separation = f64::INFINITY;
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                separation = separation.min((roots[i] - roots[j]).norm());
            }
        }
        if separation <= threshold {
            return Err(Error::RepeatedRoot {
                separation,
                threshold,
            });
        }
        let weierstrass_form = degree == 5 && coeffs[5] == C64::new(4.0, 0.0);
        Ok(AdmissiblePolynomial {
            coeffs,
            degree,
            weierstrass_form,
            roots,
        })
    }

    pub fn from_real(coeffs: [f64; 7]) -> Result<Self> {
        Self::new(coeffs.map(|c| C64::new(c, 0.0)))
    }

    pub fn coeffs(&self) -> &[C64; 7] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs[k]
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_weierstrass_form(&self) -> bool {
        self.weierstrass_form
    }

    /// Leading coefficient (f6 or f5).
    pub fn leading(&self) -> C64 {
        self.coeffs[self.degree]
    }

    /// Roots of f, sorted by real part then imaginary part.
    pub fn branch_points(&self) -> &[C64] {
        &self.roots
    }

    /// `max(1, max |root|)`, the length scale used by relative thresholds.
    pub fn root_scale(&self) -> f64 {
        self.roots.iter().fold(1.0f64, |m, r| m.max(r.norm()))
    }

    pub fn eval(&self, x: C64) -> C64 {
        horner(&self.coeffs[..=self.degree], x)
    }

    pub fn eval_with_derivative(&self, x: C64) -> (C64, C64) {
        horner_with_derivative(&self.coeffs[..=self.degree], x)
    }

    /// The symmetric polynomial F_f(a, b) with F_f(a, a) = 2 f(a).
    pub fn big_f(&self, a: C64, b: C64) -> C64 {
        let f = &self.coeffs;
        let s = a + b;
        let p = a * b;
        let p2 = p * p;
        f[0] * 2.0
            + f[1] * s
            + f[2] * 2.0 * p
            + f[3] * p * s
            + f[4] * 2.0 * p2
            + f[5] * p2 * s
            + f[6] * 2.0 * p2 * p
    }

    /// An affine point with the given x and y; checks the curve equation.
    pub fn point(&self, x: C64, y: C64) -> Result<CurvePoint> {
        let fx = self.eval(x);
        let residual = (y * y - fx).norm();
        if residual > EPS_ON_CURVE * (1.0 + fx.norm()) {
            return Err(Error::NotOnCurve {
                x: x.to_string(),
                y: y.to_string(),
                residual,
            });
        }
        Ok(CurvePoint::Affine { x, y })
    }

    /// The affine point over x whose y is the principal square root times `sign`.
    pub fn point_over(&self, x: C64, sign: f64) -> CurvePoint {
        CurvePoint::Affine {
            x,
            y: self.eval(x).sqrt() * sign,
        }
    }

    /// Normalizes the infinity index (degree 5 has a single point at infinity).
    pub fn infinity(&self, index: u8) -> CurvePoint {
        if self.degree == 5 {
            CurvePoint::Infinity { index: 1 }
        } else {
            CurvePoint::Infinity {
                index: if index == 2 { 2 } else { 1 },
            }
        }
    }

    /// Hyperelliptic involution (x, y) ↦ (x, −y); swaps the points at infinity
    /// for degree 6.
    pub fn involution(&self, p: &CurvePoint) -> CurvePoint {
        match *p {
            CurvePoint::Affine { x, y } => CurvePoint::Affine { x, y: -y },
            CurvePoint::Infinity { index } => {
                if self.degree == 5 {
                    CurvePoint::Infinity { index: 1 }
                } else {
                    CurvePoint::Infinity {
                        index: if index == 1 { 2 } else { 1 },
                    }
                }
            }
        }
    }

    pub fn contains(&self, p: &CurvePoint) -> bool {
        match *p {
            CurvePoint::Affine { x, y } => {
                let fx = self.eval(x);
                (y * y - fx).norm() <= EPS_ON_CURVE * (1.0 + fx.norm())
            }
            CurvePoint::Infinity { index } => index == 1 || (index == 2 && self.degree == 6),
        }
    }

    /// ξ_11, ξ_12, ξ_22 at a divisor of two affine points.
    pub fn xi(&self, d: &Divisor) -> Result<[C64; 3]> {
        let (x1, y1, x2, y2) = match (d.p, d.q) {
            (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => {
                (x1, y1, x2, y2)
            }
            _ => return Err(Error::InfinitePoint),
        };
        let xi22 = x1 + x2;
        let xi12 = -(x1 * x2);
        let scale = self.root_scale();
        let tol = 1e-12 * scale;
        if (x1 - x2).norm() <= tol && (y1 + y2).norm() <= 1e-9 * (1.0 + y1.norm()) {
            return Err(Error::SpecialDivisor("xi11 has a pole at q = J(p)".into()));
        }
        let xi11 = if (x1 - x2).norm() < DELTA_DIAG * scale {
            self.xi11_near_diagonal(x1, y1, x2, y2)?
        } else {
            (self.big_f(x1, x2) - y1 * y2 * 2.0) / ((x1 - x2) * (x1 - x2) * 4.0)
        };
        Ok([xi11, xi12, xi22])
    }

    /// Expansion of ξ11 in h = (x2 − x1)/2 around the midpoint, through h⁴.
    fn xi11_near_diagonal(&self, x1: C64, y1: C64, x2: C64, y2: C64) -> Result<C64> {
        let m = (x1 + x2) * 0.5;
        let h = (x2 - x1) * 0.5;
        // Taylor coefficients a_k = f^(k)(m)/k!
        let mut a = [ZERO; 7];
        let mut work: Vec<C64> = self.coeffs[..=self.degree].to_vec();
        for ak in a.iter_mut() {
            if work.is_empty() {
                break;
            }
            *ak = horner(&work, m);
            // synthetic division by (x − m) leaves the shifted coefficients
            let n = work.len();
            let mut q = vec![ZERO; n.saturating_sub(1)];
            let mut carry = ZERO;
            for i in (1..n).rev() {
                carry = carry * m + work[i];
                q[i - 1] = carry;
            }
            work = q;
        }
        let a0 = a[0];
        if a0.norm() == 0.0 {
            return Err(Error::SpecialDivisor(
                "both points at the same branch point".into(),
            ));
        }
        // y1 y2 must be close to +f(m); the opposite sign is the special locus
        if (y1 * y2 / a0).re <= 0.0 {
            return Err(Error::SpecialDivisor(
                "near-diagonal divisor on opposite sheets".into(),
            ));
        }
        // f(m − h) f(m + h) = G0 + G2 h² + G4 h⁴ + G6 h⁶ + …
        let big_g2 = a0 * a[2] * 2.0 - a[1] * a[1];
        let big_g4 = a[2] * a[2] + a0 * a[4] * 2.0 - a[1] * a[3] * 2.0;
        let big_g6 = (a0 * a[6] + a[2] * a[4] - a[1] * a[5]) * 2.0 - a[3] * a[3];
        let g2 = big_g2 / (a0 * a0);
        let g4 = big_g4 / (a0 * a0);
        let g6 = big_g6 / (a0 * a0);
        // y1 y2 = a0 (1 + s1 t + s2 t² + s3 t³), t = h²
        let s1 = g2 * 0.5;
        let s2 = g4 * 0.5 - g2 * g2 / 8.0;
        let s3 = g6 * 0.5 - g2 * g4 * 0.25 + g2 * g2 * g2 / 16.0;
        // F as a cubic in p = x1 x2 = m² − t
        let f = &self.coeffs;
        let s = m * 2.0;
        let p0 = m * m;
        let c1 = f[2] * 2.0 + f[3] * s;
        let c2 = f[4] * 2.0 + f[5] * s;
        let c3 = f[6] * 2.0;
        let fp1 = c1 + c2 * p0 * 2.0 + c3 * p0 * p0 * 3.0;
        let fp2 = c2 + c3 * p0 * 3.0;
        let n2 = -fp1 - a0 * s1 * 2.0;
        let n4 = fp2 - a0 * s2 * 2.0;
        let n6 = -c3 - a0 * s3 * 2.0;
        let t = h * h;
        Ok((n2 + (n4 + n6 * t) * t) / 16.0)
    }
}

/// A point of the curve: affine (x, y) or one of the points at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvePoint {
    Affine { x: C64, y: C64 },
    Infinity { index: u8 },
}

impl CurvePoint {
    pub fn affine(&self) -> Option<(C64, C64)> {
        match *self {
            CurvePoint::Affine { x, y } => Some((x, y)),
            CurvePoint::Infinity { .. } => None,
        }
    }

    pub fn approx_eq(&self, other: &CurvePoint, tol: f64) -> bool {
        match (self, other) {
            (CurvePoint::Affine { x: a, y: b }, CurvePoint::Affine { x: c, y: d }) => {
                (a - c).norm() <= tol * (1.0 + a.norm()) && (b - d).norm() <= tol * (1.0 + b.norm())
            }
            (CurvePoint::Infinity { index: i }, CurvePoint::Infinity { index: j }) => i == j,
            _ => false,
        }
    }
}

/// An effective degree-2 divisor (P) + (Q), unordered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Divisor {
    pub p: CurvePoint,
    pub q: CurvePoint,
}

impl Divisor {
    pub fn new(p: CurvePoint, q: CurvePoint) -> Self {
        Divisor { p, q }
    }

    pub fn swapped(&self) -> Self {
        Divisor {
            p: self.q,
            q: self.p,
        }
    }

    /// True when q = J(p), i.e. the divisor lies in the hyperelliptic class.
    pub fn is_special(&self, f: &AdmissiblePolynomial) -> bool {
        f.involution(&self.p).approx_eq(&self.q, 1e-10)
    }

    pub fn involuted(&self, f: &AdmissiblePolynomial) -> Self {
        Divisor {
            p: f.involution(&self.p),
            q: f.involution(&self.q),
        }
    }

    /// Equality up to the order of the two points.
    pub fn approx_eq(&self, other: &Divisor, tol: f64) -> bool {
        (self.p.approx_eq(&other.p, tol) && self.q.approx_eq(&other.q, tol))
            || (self.p.approx_eq(&other.q, tol) && self.q.approx_eq(&other.p, tol))
    }
}

// JSON forms ----------------------------------------------------------------

/// `{"coeffs": [[re, im] × 7]}` in ascending degree order.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CurveJson {
    pub coeffs: Vec<[f64; 2]>,
}

impl CurveJson {
    pub fn from_poly(f: &AdmissiblePolynomial) -> Self {
        CurveJson {
            coeffs: f.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn to_poly(&self) -> Result<AdmissiblePolynomial> {
        if self.coeffs.len() != 7 {
            return Err(Error::InvalidInput(format!(
                "expected 7 coefficients, got {}",
                self.coeffs.len()
            )));
        }
        let mut c = [ZERO; 7];
        for (dst, src) in c.iter_mut().zip(&self.coeffs) {
            *dst = C64::new(src[0], src[1]);
        }
        AdmissiblePolynomial::new(c)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PointJson {
    Affine { x: [f64; 2], y: [f64; 2] },
    Infinity { infinity: u8 },
}

impl PointJson {
    pub fn from_point(p: &CurvePoint) -> Self {
        match *p {
            CurvePoint::Affine { x, y } => PointJson::Affine {
                x: [x.re, x.im],
                y: [y.re, y.im],
            },
            CurvePoint::Infinity { index } => PointJson::Infinity { infinity: index },
        }
    }

    pub fn to_point(&self, f: &AdmissiblePolynomial) -> Result<CurvePoint> {
        match *self {
            PointJson::Affine { x, y } => f.point(C64::new(x[0], x[1]), C64::new(y[0], y[1])),
            PointJson::Infinity { infinity } => {
                if infinity == 1 || (infinity == 2 && f.degree() == 6) {
                    Ok(f.infinity(infinity))
                } else {
                    Err(Error::InvalidInput(format!(
                        "no point at infinity with index {infinity}"
                    )))
                }
            }
        }
    }
}

/// `{"p": point, "q": point}` where a point is `{"x": [re,im], "y": [re,im]}`
/// or `{"infinity": 1|2}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DivisorJson {
    pub p: PointJson,
    pub q: PointJson,
}

impl DivisorJson {
    pub fn from_divisor(d: &Divisor) -> Self {
        DivisorJson {
            p: PointJson::from_point(&d.p),
            q: PointJson::from_point(&d.q),
        }
    }

    pub fn to_divisor(&self, f: &AdmissiblePolynomial) -> Result<Divisor> {
        Ok(Divisor::new(self.p.to_point(f)?, self.q.to_point(f)?))
    }
}
