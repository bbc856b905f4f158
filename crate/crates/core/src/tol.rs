//! Tolerances shared by period certification, evaluation and verification.

use serde::{Deserialize, Serialize};

/// Environment variable overriding the identity tolerance.
pub const TOL_ENV: &str = "KLEINIAN2_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// |S| below this fraction of its local scale counts as a zero of S.
    pub zero: f64,
    /// Abel / Jacobi-inversion round trip.
    pub rt: f64,
    /// Taylor-jet cross-checks at the origin.
    pub jet: f64,
    /// Algebraic identities such as the quartic determinant.
    pub id: f64,
    /// Symmetry of Ω.
    pub sym: f64,
    /// Legendre relations.
    pub leg: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero: 1e-6,
            rt: 1e-7,
            jet: 1e-7,
            id: 1e-7,
            sym: 1e-8,
            leg: 1e-8,
        }
    }
}

impl Tolerances {
    /// Defaults with the identity tolerance taken from `KLEINIAN2_TOL` if it
    /// is set to a positive number.
    pub fn from_env() -> Self {
        let mut t = Tolerances::default();
        if let Some(v) = std::env::var(TOL_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| *v > 0.0 && v.is_finite())
        {
            t.id = v;
        }
        t
    }
}
