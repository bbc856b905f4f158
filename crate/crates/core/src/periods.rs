//! Period matrices, the η homomorphism and the Riemann constant.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::abel::{abel_integrals, integral_between};
use crate::curve::{AdmissiblePolynomial, CurveJson, Divisor};
use crate::cycles::{build_cycles, CycleBasis};
use crate::error::{Error, Result};
use crate::quad::TanhSinh;
use crate::theta::{check_riemann, theta_jet, Mat2, Vec2};
use crate::tol::Tolerances;

const TWO_PI_I: C64 = C64::new(0.0, 2.0 * PI);

/// Largest acceptable condition number of the real 4×4 generator matrix.
pub const MAX_LATTICE_CONDITION: f64 = 1e12;

/// Relative size of θ(u − Δ) accepted by the vanishing certificate.
pub const DELTA_CERTIFICATE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CycleProvenance {
    pub order: Vec<usize>,
    pub intersections: [[i64; 4]; 4],
    pub change_of_basis: [[i64; 4]; 4],
    pub clearance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PeriodResiduals {
    /// max |Ω − Ωᵀ|
    pub symmetry: f64,
    /// smallest eigenvalue of Im Ω
    pub im_omega_min_eig: f64,
    /// max of the two 2πi·I Legendre residuals
    pub legendre: f64,
    /// max asymmetry of η_Aη_Bᵀ, η_AᵀA, η_BᵀB
    pub legendre_symmetry: f64,
    /// worst relative |θ(u − Δ)| over the certificate sample points
    pub delta_certificate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodData {
    pub coeffs: [C64; 7],
    pub a: Mat2,
    pub b: Mat2,
    pub eta_a: Mat2,
    pub eta_b: Mat2,
    pub omega: Mat2,
    /// Riemann constant in theta coordinates u = A⁻¹z.
    pub delta: Vec2,
    pub cycles: CycleProvenance,
    pub residuals: PeriodResiduals,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Default)]
pub struct PeriodOptions {
    /// Explicit chain of branch-point indices for the cycle basis.
    pub chain: Option<Vec<usize>>,
    pub tolerances: Tolerances,
}

fn max_abs(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn asymmetry(m: &Mat2) -> f64 {
    (m[(0, 1)] - m[(1, 0)]).norm()
}

fn min_eig_sym(y: [[f64; 2]; 2]) -> f64 {
    let tr = y[0][0] + y[1][1];
    let det = y[0][0] * y[1][1] - y[0][1] * y[1][0];
    0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt())
}

/// Integrals of (ω1, ω2, r1, r2) over the four chain cycles.
fn chain_periods(f: &AdmissiblePolynomial, basis: &CycleBasis) -> Result<[[C64; 4]; 4]> {
    let quad = TanhSinh::default();
    let mut out = [[C64::new(0.0, 0.0); 4]; 4];
    for (k, seg) in basis.segments.iter().enumerate() {
        let v = seg.integrate(f, &quad)?;
        out[k] = v.map(|z| z * 2.0);
    }
    Ok(out)
}

impl PeriodData {
    pub fn a_inv(&self) -> Mat2 {
        self.a.try_inverse().expect("A is invertible for certified period data")
    }

    /// η_A A⁻¹, the symmetric matrix in the exponential factor of S.
    pub fn quadratic_form(&self) -> Mat2 {
        let q = self.eta_a * self.a_inv();
        (q + q.transpose()).map(|z| z * 0.5)
    }

    /// Lattice vector A m + B n.
    pub fn lattice_vector(&self, mn: [i64; 4]) -> Vec2 {
        let m = Vec2::new(C64::new(mn[0] as f64, 0.0), C64::new(mn[1] as f64, 0.0));
        let n = Vec2::new(C64::new(mn[2] as f64, 0.0), C64::new(mn[3] as f64, 0.0));
        self.a * m + self.b * n
    }

    /// η of the lattice vector A m + B n.
    pub fn eta_of_lattice(&self, mn: [i64; 4]) -> Vec2 {
        let m = Vec2::new(C64::new(mn[0] as f64, 0.0), C64::new(mn[1] as f64, 0.0));
        let n = Vec2::new(C64::new(mn[2] as f64, 0.0), C64::new(mn[3] as f64, 0.0));
        self.eta_a * m + self.eta_b * n
    }

    fn generator_matrix(&self) -> Result<Matrix4<f64>> {
        let mut g = Matrix4::<f64>::zeros();
        for j in 0..2 {
            for i in 0..2 {
                g[(i, j)] = self.a[(i, j)].re;
                g[(i + 2, j)] = self.a[(i, j)].im;
                g[(i, j + 2)] = self.b[(i, j)].re;
                g[(i + 2, j + 2)] = self.b[(i, j)].im;
            }
        }
        let sv = g.singular_values();
        let cond = sv.max() / sv.min();
        if !(cond <= MAX_LATTICE_CONDITION) {
            return Err(Error::IllConditionedLattice(cond));
        }
        Ok(g)
    }

    /// Real coordinates of z with respect to the generators a1, a2, b1, b2.
    pub fn lattice_coordinates(&self, z: &Vec2) -> Result<[f64; 4]> {
        let g = self.generator_matrix()?;
        let rhs = Vector4::new(z[0].re, z[1].re, z[0].im, z[1].im);
        let x = g
            .lu()
            .solve(&rhs)
            .ok_or(Error::IllConditionedLattice(f64::INFINITY))?;
        Ok([x[0], x[1], x[2], x[3]])
    }

    /// z = z₀ + A m + B n with the real coordinates of z₀ in [0, 1).
    pub fn lattice_reduce(&self, z: &Vec2) -> Result<(Vec2, [i64; 4])> {
        self.reduce_with(z, true)
    }

    /// Nearest lattice point: z = z₀ + A m + B n with coordinates of z₀ in
    /// [−½, ½]. |z₀| measures how far z is from the lattice.
    pub fn nearest_lattice(&self, z: &Vec2) -> Result<(Vec2, [i64; 4])> {
        self.reduce_with(z, false)
    }

    fn reduce_with(&self, z: &Vec2, floor: bool) -> Result<(Vec2, [i64; 4])> {
        let x = self.lattice_coordinates(z)?;
        let mut mn = [0i64; 4];
        for k in 0..4 {
            mn[k] = if floor { x[k].floor() } else { x[k].round() } as i64;
        }
        Ok((z - self.lattice_vector(mn), mn))
    }

    /// Distance of z to the nearest lattice point, relative to the period scale.
    pub fn lattice_distance(&self, z: &Vec2) -> Result<f64> {
        let (z0, _) = self.nearest_lattice(z)?;
        Ok(z0.norm() / max_abs(&self.a).max(max_abs(&self.b)))
    }

    fn certify(&mut self) -> Result<()> {
        let tol = self.tolerances;
        let scale_o = max_abs(&self.omega).max(1.0);
        self.residuals.symmetry = asymmetry(&self.omega);
        let y = self.omega.map(|z| z.im);
        self.residuals.im_omega_min_eig =
            min_eig_sym([[y[(0, 0)], y[(0, 1)]], [y[(1, 0)], y[(1, 1)]]]);
        let i2 = Mat2::identity() * TWO_PI_I;
        let l1 = self.eta_a.transpose() * self.b - self.a.transpose() * self.eta_b - i2;
        let l2 = self.b * self.eta_a.transpose() - self.a * self.eta_b.transpose() - i2;
        self.residuals.legendre = max_abs(&l1).max(max_abs(&l2));
        self.residuals.legendre_symmetry = asymmetry(&(self.eta_a * self.eta_b.transpose()))
            .max(asymmetry(&(self.eta_a.transpose() * self.a)))
            .max(asymmetry(&(self.eta_b.transpose() * self.b)));
        if self.residuals.symmetry > tol.sym * scale_o {
            return Err(Error::RiemannMatrix(format!(
                "|Ω − Ωᵀ| = {:e}",
                self.residuals.symmetry
            )));
        }
        if !(self.residuals.im_omega_min_eig > 0.0) {
            return Err(Error::RiemannMatrix(format!(
                "Im Ω has eigenvalue {:e}",
                self.residuals.im_omega_min_eig
            )));
        }
        if self.residuals.legendre > tol.leg || self.residuals.legendre_symmetry > tol.leg {
            return Err(Error::RiemannMatrix(format!(
                "Legendre residuals {:e}, {:e}",
                self.residuals.legendre, self.residuals.legendre_symmetry
            )));
        }
        Ok(())
    }
}

/// Deterministic sample points for the vanishing certificate, spread around
/// the branch points but away from them.
pub fn certificate_points(f: &AdmissiblePolynomial, count: usize) -> Vec<crate::CurvePoint> {
    let scale = f.root_scale().max(1e-3);
    let base = [
        C64::new(0.37, 0.21),
        C64::new(-0.52, 0.44),
        C64::new(0.18, -0.63),
        C64::new(-0.29, -0.35),
        C64::new(0.71, -0.12),
        C64::new(-0.66, 0.08),
        C64::new(0.05, 0.77),
        C64::new(0.44, 0.58),
    ];
    let mut out = Vec::with_capacity(count);
    let mut k = 0;
    while out.len() < count {
        let x = base[k % base.len()] * scale * (1.0 + 0.13 * (k / base.len()) as f64);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let near = f
            .branch_points()
            .iter()
            .map(|e| (x - e).norm())
            .fold(f64::INFINITY, f64::min);
        if near > 0.05 * scale {
            out.push(f.point_over(x, sign));
        }
        k += 1;
    }
    out
}

/// Relative |θ(A⁻¹·abel((P) + (∞1)) − Δ)| at each sample image.
fn certificate_residual(omega: &Mat2, images: &[Vec2], delta: &Vec2) -> Result<f64> {
    let mut worst = 0.0f64;
    for u in images {
        let jet = theta_jet(&(u - delta), omega, 0)?;
        worst = worst.max(jet.value.norm() / jet.abs_sum);
    }
    Ok(worst)
}

/// Riemann constant Δ (in theta coordinates) for the given periods.
///
/// Twice Δ is congruent to A⁻¹ times the integral from ∞2 to ∞1 (zero for
/// degree 5), so Δ is one of the 16 half-lattice translates of half that
/// vector; for degree 5 only the 6 odd half-periods qualify. The vanishing
/// certificate picks the one whose theta translate contains the curve.
pub fn riemann_constant(f: &AdmissiblePolynomial, a: &Mat2, omega: &Mat2) -> Result<(Vec2, f64)> {
    let a_inv = a
        .try_inverse()
        .ok_or_else(|| Error::RiemannMatrix("A is singular".into()))?;
    let c0 = if f.degree() == 6 {
        a_inv * integral_between(f, &f.infinity(2), &f.infinity(1))?
    } else {
        Vec2::zeros()
    };
    let images = certificate_points(f, 6)
        .iter()
        .map(|p| {
            let d = Divisor::new(*p, f.infinity(1));
            abel_integrals(f, &d, None).map(|ai| a_inv * ai.z)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut passing = Vec::new();
    let mut best = f64::INFINITY;
    for mask in 0..16u32 {
        let m1 = [(mask & 1) as f64, (mask >> 1 & 1) as f64];
        let m2 = [(mask >> 2 & 1) as f64, (mask >> 3 & 1) as f64];
        let odd = (m1[0] * m2[0] + m1[1] * m2[1]) as i64 % 2 == 1;
        if f.degree() == 5 && !odd {
            continue;
        }
        let mv = Vec2::new(C64::new(m1[0], 0.0), C64::new(m1[1], 0.0));
        let nv = Vec2::new(C64::new(m2[0], 0.0), C64::new(m2[1], 0.0));
        let delta = (c0 + mv + omega * nv).map(|z| z * 0.5);
        let r = certificate_residual(omega, &images, &delta)?;
        best = best.min(r);
        if r < DELTA_CERTIFICATE {
            passing.push((delta, r));
        }
    }
    match passing.len() {
        1 => Ok(passing[0]),
        n => {
            let _ = best;
            Err(Error::DeltaAmbiguity { candidates: n })
        }
    }
}

/// Periods, η matrices, Ω and Δ for `f`, with all invariants certified.
pub fn compute_period_data(f: &AdmissiblePolynomial, opts: &PeriodOptions) -> Result<PeriodData> {
    let basis = build_cycles(f, opts.chain.as_deref())?;
    let chain = chain_periods(f, &basis)?;
    let mut a = Mat2::zeros();
    let mut b = Mat2::zeros();
    let mut eta_a = Mat2::zeros();
    let mut eta_b = Mat2::zeros();
    for (col, row) in basis.change_of_basis.iter().enumerate() {
        let mut v = [C64::new(0.0, 0.0); 4];
        for k in 0..4 {
            for form in 0..4 {
                v[form] += chain[k][form] * row[k] as f64;
            }
        }
        let (per, eta) = if col < 2 { (&mut a, &mut eta_a) } else { (&mut b, &mut eta_b) };
        let j = col % 2;
        per[(0, j)] = v[0];
        per[(1, j)] = v[1];
        eta[(0, j)] = -v[2];
        eta[(1, j)] = -v[3];
    }
    let a_inv = a
        .try_inverse()
        .ok_or_else(|| Error::RiemannMatrix("A is singular".into()))?;
    let omega = a_inv * b;
    let mut pd = PeriodData {
        coeffs: *f.coeffs(),
        a,
        b,
        eta_a,
        eta_b,
        omega,
        delta: Vec2::zeros(),
        cycles: CycleProvenance {
            order: basis.order.clone(),
            intersections: basis.intersections,
            change_of_basis: basis.change_of_basis,
            clearance: basis.clearance,
        },
        residuals: PeriodResiduals::default(),
        tolerances: opts.tolerances,
    };
    pd.certify()?;
    // symmetrize before theta sees it; the asymmetry is certified small
    pd.omega = (omega + omega.transpose()).map(|z| z * 0.5);
    check_riemann(&pd.omega)?;
    let (delta, cert) = riemann_constant(f, &pd.a, &pd.omega)?;
    pd.delta = delta;
    pd.residuals.delta_certificate = cert;
    Ok(pd)
}

// ---------------------------------------------------------------- JSON

type Pair = [f64; 2];

fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

fn unpair(p: &Pair) -> C64 {
    C64::new(p[0], p[1])
}

fn mat_pairs(m: &Mat2) -> Vec<Pair> {
    vec![pair(m[(0, 0)]), pair(m[(0, 1)]), pair(m[(1, 0)]), pair(m[(1, 1)])]
}

fn pairs_mat(v: &[Pair], name: &str) -> Result<Mat2> {
    if v.len() != 4 {
        return Err(Error::InvalidInput(format!("{name} must have 4 entries")));
    }
    Ok(Mat2::new(unpair(&v[0]), unpair(&v[1]), unpair(&v[2]), unpair(&v[3])))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CyclesJson {
    pub chain: Vec<usize>,
    pub intersections: [[i64; 4]; 4],
    pub change_of_basis: [[i64; 4]; 4],
    pub clearance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualsJson {
    pub symmetry: f64,
    pub im_omega_min_eig: f64,
    pub legendre: f64,
    pub legendre_symmetry: f64,
    pub delta_certificate: f64,
}

/// Serialized period data; matrices are row-major lists of [re, im] pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodDataJson {
    pub coeffs: Vec<Pair>,
    #[serde(rename = "A")]
    pub a: Vec<Pair>,
    #[serde(rename = "B")]
    pub b: Vec<Pair>,
    #[serde(rename = "eta_A")]
    pub eta_a: Vec<Pair>,
    #[serde(rename = "eta_B")]
    pub eta_b: Vec<Pair>,
    #[serde(rename = "Omega")]
    pub omega: Vec<Pair>,
    #[serde(rename = "Delta")]
    pub delta: Vec<Pair>,
    pub cycles: CyclesJson,
    pub residuals: ResidualsJson,
    pub tolerances: Tolerances,
}

impl PeriodDataJson {
    pub fn from_data(pd: &PeriodData) -> Self {
        PeriodDataJson {
            coeffs: pd.coeffs.iter().map(|z| pair(*z)).collect(),
            a: mat_pairs(&pd.a),
            b: mat_pairs(&pd.b),
            eta_a: mat_pairs(&pd.eta_a),
            eta_b: mat_pairs(&pd.eta_b),
            omega: mat_pairs(&pd.omega),
            delta: vec![pair(pd.delta[0]), pair(pd.delta[1])],
            cycles: CyclesJson {
                chain: pd.cycles.order.clone(),
                intersections: pd.cycles.intersections,
                change_of_basis: pd.cycles.change_of_basis,
                clearance: pd.cycles.clearance,
            },
            residuals: ResidualsJson {
                symmetry: pd.residuals.symmetry,
                im_omega_min_eig: pd.residuals.im_omega_min_eig,
                legendre: pd.residuals.legendre,
                legendre_symmetry: pd.residuals.legendre_symmetry,
                delta_certificate: pd.residuals.delta_certificate,
            },
            tolerances: pd.tolerances,
        }
    }

    /// Rebuilds period data for `f`, re-checking that the coefficients match
    /// and that the stored matrices still satisfy every invariant.
    pub fn to_data(&self, f: &AdmissiblePolynomial) -> Result<PeriodData> {
        let coeffs = CurveJson {
            coeffs: self.coeffs.clone(),
        }
        .to_poly()?;
        if coeffs.coeffs() != f.coeffs() {
            return Err(Error::InvalidInput(
                "period data was computed for a different curve".into(),
            ));
        }
        if self.delta.len() != 2 {
            return Err(Error::InvalidInput("Delta must have 2 entries".into()));
        }
        let mut pd = PeriodData {
            coeffs: *f.coeffs(),
            a: pairs_mat(&self.a, "A")?,
            b: pairs_mat(&self.b, "B")?,
            eta_a: pairs_mat(&self.eta_a, "eta_A")?,
            eta_b: pairs_mat(&self.eta_b, "eta_B")?,
            omega: pairs_mat(&self.omega, "Omega")?,
            delta: Vec2::new(unpair(&self.delta[0]), unpair(&self.delta[1])),
            cycles: CycleProvenance {
                order: self.cycles.chain.clone(),
                intersections: self.cycles.intersections,
                change_of_basis: self.cycles.change_of_basis,
                clearance: self.cycles.clearance,
            },
            residuals: PeriodResiduals {
                delta_certificate: self.residuals.delta_certificate,
                ..Default::default()
            },
            tolerances: self.tolerances,
        };
        let omega = pd.omega;
        pd.certify()?;
        pd.omega = omega;
        check_riemann(&pd.omega)?;
        Ok(pd)
    }
}
