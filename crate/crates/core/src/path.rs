//! Paths on the curve and integration of ω1 = dx/y, ω2 = x dx/y and the
//! second-kind forms r1, r2 along them.
//!
//! Every path is a chain of straight segments in the x-plane, each carrying
//! its own continuous branch of y. On a segment the branch is the product
//! `σ · sqrt(lead) · ∏ sqrt(x − e_j)` where every factor is taken
//! continuously along the segment (the principal root after rotating by the
//! bisector of the angle the segment subtends at e_j). This continues y
//! analytically without stepping, and keeps the inverse-square-root
//! behaviour at branch-point endpoints in closed form.

use num_complex::Complex64 as C64;

use crate::curve::{AdmissiblePolynomial, CurvePoint};
use crate::error::{Error, Result};
use crate::quad::TanhSinh;

const ONE: C64 = C64::new(1.0, 0.0);

/// The differentials integrated along paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Omega1,
    Omega2,
    R1,
    R2,
}

impl Form {
    pub fn index(self) -> usize {
        match self {
            Form::Omega1 => 0,
            Form::Omega2 => 1,
            Form::R1 => 2,
            Form::R2 => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Factor {
    /// e_j is the start point: sqrt(x − e_j) = sqrt(s) · sqrt(D)
    AtStart(C64),
    /// e_j is the end point: sqrt(x − e_j) = sqrt(1 − s) · sqrt(−D)
    AtEnd(C64),
    /// e_j away from the segment: sqrt(w) · sqrt((x − e_j)/w)
    Rotated { root: C64, w: C64, sqrt_w: C64 },
}

/// A straight segment in the x-plane with a fixed branch of y.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    kind: SegmentKind,
    factors: Vec<Factor>,
    sign: f64,
    sqrt_lead: C64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SegmentKind {
    /// x = a + s (b − a)
    Finite { a: C64, b: C64 },
    /// x = a + dir · s/(1 − s), traversed towards infinity unless `inward`
    Ray { a: C64, dir: C64, inward: bool },
}

fn unit(z: C64) -> C64 {
    z / z.norm()
}

/// Distance from `p` to the segment [a, b].
pub(crate) fn point_segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * d.conj()).re / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// Distance from `p` to the ray a + t·dir, t ≥ 0.
pub(crate) fn point_ray_distance(p: C64, a: C64, dir: C64) -> f64 {
    let d = unit(dir);
    let t = ((p - a) * d.conj()).re.max(0.0);
    (p - (a + d * t)).norm()
}

impl Segment {
    /// Segment from `a` to `b`. `a_branch`/`b_branch` give the index of the
    /// branch point an endpoint sits on, if any. The branch sign is +1; use
    /// [`Segment::anchor_start`] / [`Segment::anchor_end`] to match a given y.
    pub fn finite(
        f: &AdmissiblePolynomial,
        a: C64,
        b: C64,
        a_branch: Option<usize>,
        b_branch: Option<usize>,
    ) -> Result<Self> {
        let d = b - a;
        if d.norm() == 0.0 {
            return Err(Error::SheetTracking("zero-length segment".into()));
        }
        let mut factors = Vec::with_capacity(f.degree());
        for (j, &e) in f.branch_points().iter().enumerate() {
            if Some(j) == a_branch {
                factors.push(Factor::AtStart(d.sqrt()));
            } else if Some(j) == b_branch {
                factors.push(Factor::AtEnd((-d).sqrt()));
            } else {
                factors.push(rotated_factor(e, a - e, b - e)?);
            }
        }
        Ok(Segment {
            kind: SegmentKind::Finite { a, b },
            factors,
            sign: 1.0,
            sqrt_lead: f.leading().sqrt(),
        })
    }

    /// Ray from `a` towards infinity in direction `dir` (or, if `inward`,
    /// from infinity back to `a`).
    pub fn ray(
        f: &AdmissiblePolynomial,
        a: C64,
        a_branch: Option<usize>,
        dir: C64,
        inward: bool,
    ) -> Result<Self> {
        let dir = unit(dir);
        let mut factors = Vec::with_capacity(f.degree());
        for (j, &e) in f.branch_points().iter().enumerate() {
            if Some(j) == a_branch {
                factors.push(Factor::AtStart(dir.sqrt()));
            } else {
                factors.push(rotated_factor(e, a - e, dir)?);
            }
        }
        Ok(Segment {
            kind: SegmentKind::Ray { a, dir, inward },
            factors,
            sign: 1.0,
            sqrt_lead: f.leading().sqrt(),
        })
    }

    pub fn with_sign(mut self, sign: f64) -> Self {
        self.sign = sign;
        self
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn is_ray(&self) -> bool {
        matches!(self.kind, SegmentKind::Ray { .. })
    }

    /// y at the finite start of a segment (s = 0).
    pub fn y_at_start(&self) -> C64 {
        self.y_finite(0.0, 1.0)
    }

    /// y at the finite end of a segment (s = 1).
    pub fn y_at_end(&self) -> C64 {
        self.y_finite(1.0, 0.0)
    }

    /// Chooses the branch sign so that y at the start equals `y`.
    pub fn anchor_start(mut self, y: C64) -> Self {
        self.sign = 1.0;
        let y0 = match self.kind {
            SegmentKind::Finite { .. } => self.y_finite(0.0, 1.0),
            SegmentKind::Ray { .. } => self.ray_scaled_y(0.0, 1.0),
        };
        if (y0 - y).norm() > (y0 + y).norm() {
            self.sign = -1.0;
        }
        self
    }

    /// Chooses the branch sign so that y at the end equals `y`.
    pub fn anchor_end(mut self, y: C64) -> Self {
        self.sign = 1.0;
        let y1 = self.y_finite(1.0, 0.0);
        if (y1 - y).norm() > (y1 + y).norm() {
            self.sign = -1.0;
        }
        self
    }

    /// Leading coefficient of y near a branch-point endpoint: y ≈ c·sqrt(s)
    /// at the start or y ≈ c·sqrt(1 − s) at the end.
    pub(crate) fn endpoint_coefficient(&self, at_start: bool) -> C64 {
        let (s, sc): (f64, f64) = if at_start { (0.0, 1.0) } else { (1.0, 0.0) };
        let mut y = self.sqrt_lead * self.sign;
        for fac in &self.factors {
            y *= match *fac {
                Factor::AtStart(sd) => {
                    if at_start {
                        sd
                    } else {
                        sd * s.sqrt()
                    }
                }
                Factor::AtEnd(smd) => {
                    if at_start {
                        smd * sc.sqrt()
                    } else {
                        smd
                    }
                }
                Factor::Rotated { root, w, sqrt_w } => {
                    let x = self.x_finite(s, sc);
                    sqrt_w * ((x - root) / w).sqrt()
                }
            };
        }
        y
    }

    /// Which point at infinity a ray reaches: 1 when y/x³ → +sqrt(f6).
    /// Degree 5 always reports 1.
    pub fn infinity_index(&self, f: &AdmissiblePolynomial) -> u8 {
        if f.degree() == 5 {
            return 1;
        }
        match self.kind {
            SegmentKind::Ray { dir, .. } => {
                let yhat = self.ray_scaled_y(1.0, 0.0);
                let ratio = yhat / (dir * dir * dir);
                let r = f.leading().sqrt();
                if (ratio - r).norm() <= (ratio + r).norm() {
                    1
                } else {
                    2
                }
            }
            SegmentKind::Finite { .. } => 0,
        }
    }

    fn x_finite(&self, s: f64, sc: f64) -> C64 {
        match self.kind {
            SegmentKind::Finite { a, b } => {
                if s <= 0.5 {
                    a + (b - a) * s
                } else {
                    b - (b - a) * sc
                }
            }
            SegmentKind::Ray { a, dir, .. } => a + dir * (s / sc),
        }
    }

    fn y_finite(&self, s: f64, sc: f64) -> C64 {
        let x = self.x_finite(s, sc);
        let mut y = self.sqrt_lead * self.sign;
        for fac in &self.factors {
            y *= match *fac {
                Factor::AtStart(sd) => sd * s.sqrt(),
                Factor::AtEnd(smd) => smd * sc.sqrt(),
                Factor::Rotated { root, w, sqrt_w } => sqrt_w * ((x - root) / w).sqrt(),
            };
        }
        y
    }

    /// The point (x, y) at parameter s; s ∈ [0, 1] on finite segments and
    /// s ∈ [0, 1) on rays.
    pub fn sample(&self, s: f64) -> (C64, C64) {
        let sc = 1.0 - s;
        let x = self.x_finite(s, sc);
        let y = match self.kind {
            SegmentKind::Finite { .. } => self.y_finite(s, sc),
            SegmentKind::Ray { .. } => {
                let n = self.factors.len() as f64;
                self.ray_scaled_y(s, sc) * sc.powf(-n / 2.0)
            }
        };
        (x, y)
    }

    /// For rays: y · (1 − s)^{n/2}, finite at s = 1.
    fn ray_scaled_y(&self, s: f64, sc: f64) -> C64 {
        let (a, dir) = match self.kind {
            SegmentKind::Ray { a, dir, .. } => (a, dir),
            SegmentKind::Finite { .. } => unreachable!("ray_scaled_y on a finite segment"),
        };
        let mut y = self.sqrt_lead * self.sign;
        for fac in &self.factors {
            y *= match *fac {
                Factor::AtStart(sd) => sd * s.sqrt(),
                Factor::AtEnd(_) => unreachable!("rays have no branch point at infinity"),
                Factor::Rotated { root, w, sqrt_w } => {
                    let g = (a - root) * sc + dir * s;
                    sqrt_w * (g / w).sqrt()
                }
            };
        }
        y
    }

    /// Integrals of (ω1, ω2, r1, r2) along the segment in its direction of
    /// travel. Rays only support the holomorphic forms; r1, r2 come back 0.
    pub fn integrate(&self, f: &AdmissiblePolynomial, quad: &TanhSinh) -> Result<[C64; 4]> {
        let c = f.coeffs();
        match self.kind {
            SegmentKind::Finite { a, b } => {
                let d = b - a;
                quad.integrate(|s, sc| {
                    let x = self.x_finite(s, sc);
                    let y = self.y_finite(s, sc);
                    let w1 = d / y;
                    let x2 = x * x;
                    let x3 = x2 * x;
                    let r1 = (c[3] * x + c[4] * 2.0 * x2 + c[5] * 3.0 * x3 + c[6] * 4.0 * x3 * x)
                        * 0.25;
                    let r2 = (c[5] * x2 + c[6] * 2.0 * x3) * 0.25;
                    [w1, w1 * x, w1 * r1, w1 * r2]
                })
            }
            SegmentKind::Ray { a, dir, inward } => {
                let half_n = f.degree() as f64 * 0.5;
                let zero = C64::new(0.0, 0.0);
                let v = quad.integrate(|s, sc| {
                    let yhat = self.ray_scaled_y(s, sc);
                    let w1 = dir * sc.powf(half_n - 2.0) / yhat;
                    let w2 = w1 * (a * sc + dir * s) / sc;
                    [w1, w2, zero, zero]
                })?;
                let sgn = if inward { -1.0 } else { 1.0 };
                Ok(v.map(|z| z * sgn))
            }
        }
    }
}

fn rotated_factor(root: C64, from_a: C64, towards: C64) -> Result<Factor> {
    if from_a.norm() == 0.0 {
        return Err(Error::SheetTracking(
            "segment starts on a branch point not flagged as such".into(),
        ));
    }
    let bis = unit(from_a) + unit(towards);
    if bis.norm() < 1e-9 {
        return Err(Error::SheetTracking(format!(
            "segment passes through the branch point {root}"
        )));
    }
    let w = unit(bis);
    Ok(Factor::Rotated {
        root,
        w,
        sqrt_w: w.sqrt(),
    })
}

/// A chain of segments; integrals add up.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Path {
    pub segments: Vec<Segment>,
}

impl Path {
    pub fn new(segments: Vec<Segment>) -> Self {
        Path { segments }
    }

    pub fn integrate_all(&self, f: &AdmissiblePolynomial, quad: &TanhSinh) -> Result<[C64; 4]> {
        let mut out = [C64::new(0.0, 0.0); 4];
        for seg in &self.segments {
            let v = seg.integrate(f, quad)?;
            for k in 0..4 {
                out[k] += v[k];
            }
        }
        Ok(out)
    }

    pub fn has_ray(&self) -> bool {
        self.segments.iter().any(Segment::is_ray)
    }
}

/// Integral of one form along a path. Second-kind forms are rejected on
/// paths that reach infinity, where they have poles.
pub fn integrate_differential(f: &AdmissiblePolynomial, path: &Path, form: Form) -> Result<C64> {
    if matches!(form, Form::R1 | Form::R2) && path.has_ray() {
        return Err(Error::InfinitePoint);
    }
    let v = path.integrate_all(f, &TanhSinh::default())?;
    Ok(v[form.index()])
}

/// Where a path endpoint sits.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Anchor {
    Branch(usize),
    Point(C64, C64),
    Infinity(u8),
}

fn anchor_of(f: &AdmissiblePolynomial, p: &CurvePoint) -> Anchor {
    match *p {
        CurvePoint::Affine { x, y } => {
            let tol = 1e-12 * f.root_scale();
            for (k, &e) in f.branch_points().iter().enumerate() {
                if (x - e).norm() <= tol {
                    return Anchor::Branch(k);
                }
            }
            Anchor::Point(x, y)
        }
        CurvePoint::Infinity { index } => Anchor::Infinity(index),
    }
}

/// Relative clearance of a segment from the branch points it does not end on.
fn segment_clearance(roots: &[C64], a: C64, b: C64, skip: &[usize]) -> f64 {
    let len = (b - a).norm().max(1e-300);
    roots
        .iter()
        .enumerate()
        .filter(|(j, _)| !skip.contains(j))
        .map(|(_, &e)| point_segment_distance(e, a, b) / len)
        .fold(f64::INFINITY, f64::min)
}

fn ray_clearance(roots: &[C64], a: C64, dir: C64, skip: &[usize]) -> f64 {
    roots
        .iter()
        .enumerate()
        .filter(|(j, _)| !skip.contains(j))
        .map(|(_, &e)| point_ray_distance(e, a, dir) / (e - a).norm().max(1e-300))
        .fold(f64::INFINITY, f64::min)
}

/// Outward ray direction from branch point `k` with the best clearance.
fn best_ray_direction(f: &AdmissiblePolynomial, k: usize) -> (C64, f64) {
    let roots = f.branch_points();
    let e = roots[k];
    let centroid = roots.iter().sum::<C64>() / roots.len() as f64;
    let base = if (e - centroid).norm() > 1e-12 {
        unit(e - centroid)
    } else {
        ONE
    };
    let mut best = (base, -1.0);
    for i in 0..16 {
        // prefer directions close to the outward one: 0, +1, −1, +2, …
        let step = if i % 2 == 0 { i / 2 } else { -(i + 1) / 2 } as f64;
        let dir = base * C64::from_polar(1.0, step * std::f64::consts::PI / 8.0);
        let c = ray_clearance(roots, e, dir, &[k]);
        if c > best.1 + 1e-9 {
            best = (dir, c);
        }
    }
    best
}

/// Leg from a branch point to an endpoint anchor.
fn leg_from_branch(f: &AdmissiblePolynomial, k: usize, to: Anchor) -> Result<Option<Segment>> {
    let e = f.branch_points()[k];
    match to {
        Anchor::Branch(j) if j == k => Ok(None),
        Anchor::Branch(j) => Ok(Some(Segment::finite(
            f,
            e,
            f.branch_points()[j],
            Some(k),
            Some(j),
        )?)),
        Anchor::Point(x, y) => Ok(Some(Segment::finite(f, e, x, Some(k), None)?.anchor_end(y))),
        Anchor::Infinity(index) => {
            let (dir, _) = best_ray_direction(f, k);
            let seg = Segment::ray(f, e, Some(k), dir, false)?;
            let seg = if seg.infinity_index(f) == f.infinity(index).infinity_idx() {
                seg
            } else {
                seg.with_sign(-1.0)
            };
            Ok(Some(seg))
        }
    }
}

/// Leg from an endpoint anchor to a branch point.
fn leg_to_branch(f: &AdmissiblePolynomial, from: Anchor, k: usize) -> Result<Option<Segment>> {
    let e = f.branch_points()[k];
    match from {
        Anchor::Branch(j) if j == k => Ok(None),
        Anchor::Branch(j) => Ok(Some(Segment::finite(
            f,
            f.branch_points()[j],
            e,
            Some(j),
            Some(k),
        )?)),
        Anchor::Point(x, y) => Ok(Some(Segment::finite(f, x, e, None, Some(k))?.anchor_start(y))),
        Anchor::Infinity(index) => {
            let (dir, _) = best_ray_direction(f, k);
            let seg = Segment::ray(f, e, Some(k), dir, true)?;
            let seg = if seg.infinity_index(f) == f.infinity(index).infinity_idx() {
                seg
            } else {
                seg.with_sign(-1.0)
            };
            Ok(Some(seg))
        }
    }
}

fn anchor_clearance(f: &AdmissiblePolynomial, anchor: Anchor, k: usize) -> f64 {
    let roots = f.branch_points();
    let e = roots[k];
    match anchor {
        Anchor::Branch(j) if j == k => f64::INFINITY,
        Anchor::Branch(j) => segment_clearance(roots, roots[j], e, &[j, k]),
        Anchor::Point(x, _) => segment_clearance(roots, x, e, &[k]),
        Anchor::Infinity(_) => best_ray_direction(f, k).1,
    }
}

/// Branch points ranked by how well a route `from → e_k → to` clears the
/// remaining branch points (best first).
pub fn ranked_vias(f: &AdmissiblePolynomial, from: &CurvePoint, to: &CurvePoint) -> Vec<usize> {
    let a = anchor_of(f, from);
    let b = anchor_of(f, to);
    let mut scored: Vec<(usize, f64)> = (0..f.branch_points().len())
        .map(|k| (k, anchor_clearance(f, a, k).min(anchor_clearance(f, b, k))))
        .collect();
    scored.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    scored.into_iter().map(|(k, _)| k).collect()
}

/// A path on the curve from `from` to `to` passing through branch point `via`.
/// Going through a branch point lets the path end on either sheet.
pub fn path_via(
    f: &AdmissiblePolynomial,
    from: &CurvePoint,
    to: &CurvePoint,
    via: usize,
) -> Result<Path> {
    let a = anchor_of(f, from);
    let b = anchor_of(f, to);
    let mut segments = Vec::new();
    if let Some(s) = leg_to_branch(f, a, via)? {
        segments.push(s);
    }
    if let Some(s) = leg_from_branch(f, via, b)? {
        segments.push(s);
    }
    Ok(Path::new(segments))
}

/// The default path from `from` to `to`, routed through the branch point
/// with the best clearance.
pub fn path_between(f: &AdmissiblePolynomial, from: &CurvePoint, to: &CurvePoint) -> Result<Path> {
    let via = ranked_vias(f, from, to)[0];
    path_via(f, from, to, via)
}

trait InfinityIdx {
    fn infinity_idx(&self) -> u8;
}

impl InfinityIdx for CurvePoint {
    fn infinity_idx(&self) -> u8 {
        match *self {
            CurvePoint::Infinity { index } => index,
            CurvePoint::Affine { .. } => 0,
        }
    }
}
