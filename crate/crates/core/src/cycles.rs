//! Homology basis from a chain of branch points.
//!
//! Four consecutive pairs from a chain of five finite branch points give
//! cycles γ_k (the segment [e_k, e_{k+1}] on one sheet and back on the
//! other). Only neighbours in the chain intersect, with sign read off from
//! the local square-root behaviour of y at the shared branch point. An
//! integer symplectic reduction then yields (a1, a2, b1, b2) with
//! a_i · b_j = δ_ij.

use num_complex::Complex64 as C64;

use crate::curve::AdmissiblePolynomial;
use crate::error::{Error, Result};
use crate::path::{point_segment_distance, Segment};

/// Chains whose segments pass closer than this (relative to their length)
/// to another branch point are rejected.
pub const MIN_CLEARANCE: f64 = 1e-6;

const CHAIN_LEN: usize = 5;
const DIRECTIONS: usize = 12;

#[derive(Debug, Clone)]
pub struct CycleBasis {
    /// Branch-point indices along the chain.
    pub order: Vec<usize>,
    /// One segment per chain cycle; the cycle integral is twice the
    /// segment integral.
    pub segments: Vec<Segment>,
    /// Intersection numbers γ_i · γ_j of the chain cycles.
    pub intersections: [[i64; 4]; 4],
    /// Rows a1, a2, b1, b2 as integer combinations of the chain cycles.
    pub change_of_basis: [[i64; 4]; 4],
    /// Smallest relative distance from a chain segment to another branch point.
    pub clearance: f64,
}

fn chain_clearance(roots: &[C64], order: &[usize]) -> f64 {
    let mut worst = f64::INFINITY;
    for w in order.windows(2) {
        let (a, b) = (roots[w[0]], roots[w[1]]);
        let len = (b - a).norm();
        for (j, &e) in roots.iter().enumerate() {
            if j == w[0] || j == w[1] {
                continue;
            }
            worst = worst.min(point_segment_distance(e, a, b) / len);
        }
    }
    worst
}

/// Candidate chains: roots sorted along a direction, strictly monotone so
/// the chain cannot cross itself. Degree 6 drops the first or last root.
fn candidate_chains(f: &AdmissiblePolynomial) -> Vec<Vec<usize>> {
    let roots = f.branch_points();
    let tie = 1e-9 * f.root_scale().max(1.0);
    let mut out: Vec<Vec<usize>> = Vec::new();
    for k in 0..DIRECTIONS {
        let phi = k as f64 * std::f64::consts::PI / DIRECTIONS as f64;
        let rot = C64::from_polar(1.0, -phi);
        let mut idx: Vec<usize> = (0..roots.len()).collect();
        let proj = |i: usize| (roots[i] * rot).re;
        idx.sort_by(|&a, &b| proj(a).total_cmp(&proj(b)));
        let windows: Vec<&[usize]> = if idx.len() == CHAIN_LEN {
            vec![&idx[..]]
        } else {
            vec![&idx[..CHAIN_LEN], &idx[idx.len() - CHAIN_LEN..]]
        };
        for w in windows {
            let strictly = w.windows(2).all(|p| proj(p[1]) - proj(p[0]) > tie);
            if strictly && !out.iter().any(|c| c == w) {
                out.push(w.to_vec());
            }
        }
    }
    out
}

fn cross(o: C64, a: C64, b: C64) -> f64 {
    ((a - o).conj() * (b - o)).im
}

fn segments_cross(p1: C64, p2: C64, q1: C64, q2: C64) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

/// Every simple chain of five branch points whose segments keep at least
/// `min_clearance` away from the other branch points, best clearance first.
/// A chain and its reversal are listed once.
pub fn simple_chains(f: &AdmissiblePolynomial, min_clearance: f64) -> Vec<(f64, Vec<usize>)> {
    let roots = f.branch_points();
    let n = roots.len();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(CHAIN_LEN);
    fn extend(
        roots: &[C64],
        n: usize,
        current: &mut Vec<usize>,
        min_clearance: f64,
        out: &mut Vec<(f64, Vec<usize>)>,
    ) {
        if current.len() == CHAIN_LEN {
            if current[0] > current[CHAIN_LEN - 1] {
                return;
            }
            let c = chain_clearance(roots, current);
            if c < min_clearance {
                return;
            }
            for i in 0..CHAIN_LEN - 1 {
                for j in i + 2..CHAIN_LEN - 1 {
                    let (a, b) = (roots[current[i]], roots[current[i + 1]]);
                    let (p, q) = (roots[current[j]], roots[current[j + 1]]);
                    if segments_cross(a, b, p, q) {
                        return;
                    }
                }
            }
            out.push((c, current.clone()));
            return;
        }
        for k in 0..n {
            if !current.contains(&k) {
                current.push(k);
                extend(roots, n, current, min_clearance, out);
                current.pop();
            }
        }
    }
    extend(roots, n, &mut current, min_clearance, &mut out);
    out.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    out
}

/// Symplectic pairing vᵀ M w for integer coefficient vectors.
fn pair(m: &[[i64; 4]; 4], v: &[i64; 4], w: &[i64; 4]) -> i64 {
    let mut s = 0;
    for i in 0..4 {
        for j in 0..4 {
            s += v[i] * m[i][j] * w[j];
        }
    }
    s
}

/// Rows a1, a2, b1, b2 of a unimodular change of basis taking the
/// antisymmetric intersection matrix `m` to standard symplectic form.
pub fn symplectic_reduce(m: &[[i64; 4]; 4]) -> Result<[[i64; 4]; 4]> {
    let unit = |k: usize| {
        let mut v = [0i64; 4];
        v[k] = 1;
        v
    };
    let mut pool: Vec<[i64; 4]> = (0..4).map(unit).collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    while pool.len() >= 2 {
        let e = pool.remove(0);
        let pos = pool
            .iter()
            .position(|v| pair(m, &e, v).abs() == 1)
            .ok_or_else(|| Error::DegenerateGeometry("chain intersection form is not unimodular".into()))?;
        let mut f = pool.remove(pos);
        if pair(m, &e, &f) == -1 {
            f = f.map(|x| -x);
        }
        for v in pool.iter_mut() {
            let ve = pair(m, v, &e);
            let vf = pair(m, v, &f);
            for i in 0..4 {
                v[i] = v[i] - vf * e[i] + ve * f[i];
            }
        }
        a.push(e);
        b.push(f);
    }
    Ok([a[0], a[1], b[0], b[1]])
}

fn det4(m: &[[i64; 4]; 4]) -> i64 {
    fn det3(m: [[i64; 3]; 3]) -> i64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
    let mut d = 0;
    for c in 0..4 {
        let mut minor = [[0i64; 3]; 3];
        for r in 1..4 {
            let mut cc = 0;
            for k in 0..4 {
                if k != c {
                    minor[r - 1][cc] = m[r][k];
                    cc += 1;
                }
            }
        }
        let sign = if c % 2 == 0 { 1 } else { -1 };
        d += sign * m[0][c] * det3(minor);
    }
    d
}

/// Builds the cycle basis. With `order` the chain is taken as given
/// (five distinct finite branch-point indices); otherwise the chain with
/// the best clearance is chosen.
pub fn build_cycles(f: &AdmissiblePolynomial, order: Option<&[usize]>) -> Result<CycleBasis> {
    let roots = f.branch_points();
    let order: Vec<usize> = match order {
        Some(o) => {
            let mut seen = o.to_vec();
            seen.sort_unstable();
            seen.dedup();
            if o.len() != CHAIN_LEN || seen.len() != CHAIN_LEN || o.iter().any(|&i| i >= roots.len()) {
                return Err(Error::InvalidInput(format!(
                    "chain order must list {CHAIN_LEN} distinct branch-point indices below {}",
                    roots.len()
                )));
            }
            o.to_vec()
        }
        None => candidate_chains(f)
            .into_iter()
            .map(|c| (chain_clearance(roots, &c), c))
            .max_by(|x, y| x.0.total_cmp(&y.0))
            .map(|(_, c)| c)
            .ok_or_else(|| Error::DegenerateGeometry("no monotone chain of branch points".into()))?,
    };
    let clearance = chain_clearance(roots, &order);
    if clearance < MIN_CLEARANCE {
        return Err(Error::DegenerateGeometry(format!(
            "chain clearance {clearance:e} below {MIN_CLEARANCE:e}"
        )));
    }
    let segments = order
        .windows(2)
        .map(|w| Segment::finite(f, roots[w[0]], roots[w[1]], Some(w[0]), Some(w[1])))
        .collect::<Result<Vec<_>>>()?;

    let mut m = [[0i64; 4]; 4];
    for k in 0..3 {
        let arriving = segments[k].endpoint_coefficient(false);
        let leaving = segments[k + 1].endpoint_coefficient(true);
        let im = (-(arriving.conj()) * leaving).im;
        let scale = arriving.norm() * leaving.norm();
        if im.abs() <= 1e-12 * scale {
            return Err(Error::DegenerateGeometry(
                "chain folds back on itself at a branch point".into(),
            ));
        }
        let s = if im > 0.0 { 1 } else { -1 };
        m[k][k + 1] = s;
        m[k + 1][k] = -s;
    }
    let change_of_basis = symplectic_reduce(&m)?;
    let det = det4(&change_of_basis);
    if det.abs() != 1 {
        return Err(Error::DegenerateGeometry(format!(
            "change of basis has determinant {det}"
        )));
    }
    Ok(CycleBasis {
        order,
        segments,
        intersections: m,
        change_of_basis,
        clearance,
    })
}
