//! Potential, parameter types and coordinate maps.
//!
//! Everything downstream works in dimensionless units: `z = x/L`,
//! `w_i = L² V_i` and `E = -L² ε`, with energies measured in units of
//! `2m/ħ²`. The dimensionless potential is
//!
//! ```text
//! U(z) = { -w1 [1 + tanh²z] + [w2 - w3 tanh z] } sech²z
//! ```
//!
//! and the Schrödinger equation reads `-ψ'' + U ψ = -E ψ`, so bound states
//! have `E > 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-width of the `z` window used for grid searches over the potential.
pub const DEFAULT_Z_CAP: f64 = 25.0;

const CEILING_GRID_POINTS: usize = 10_001;
const CEILING_MARGIN: f64 = 1.05;

/// Dimensional description of the well, kept only for provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionalSource {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub length: f64,
}

/// Dimensionless potential strengths `w_i = L² V_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellParameters {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source: Option<DimensionalSource>,
}

impl WellParameters {
    /// Builds a parameter set. `w1` must be non-negative so that
    /// `s = ±2√w1` is real.
    pub fn new(w1: f64, w2: f64, w3: f64) -> Result<Self> {
        if !(w1.is_finite() && w2.is_finite() && w3.is_finite()) {
            return Err(Error::Domain(format!(
                "well parameters must be finite, got ({w1}, {w2}, {w3})"
            )));
        }
        if w1 < 0.0 {
            return Err(Error::Domain(format!("w1 must be >= 0, got {w1}")));
        }
        Ok(Self {
            w1,
            w2,
            w3,
            source: None,
        })
    }

    /// Converts dimensional strengths `V_i` (units of `2m/ħ²`) and width `L`.
    pub fn from_dimensional(v1: f64, v2: f64, v3: f64, length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Domain(format!("width L must be > 0, got {length}")));
        }
        let l2 = length * length;
        let mut p = Self::new(l2 * v1, l2 * v2, l2 * v3)?;
        p.source = Some(DimensionalSource { v1, v2, v3, length });
        Ok(p)
    }

    /// The same well reflected through `z = 0`.
    pub fn mirrored(&self) -> Self {
        Self {
            w3: -self.w3,
            source: None,
            ..*self
        }
    }

    pub fn width(&self) -> Option<f64> {
        self.source.map(|s| s.length)
    }
}

/// Dimensionless energy `E = -L² ε`. Bound states have `E > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Energy(pub f64);

impl Energy {
    pub fn from_epsilon(epsilon: f64, length: f64) -> Self {
        Energy(-length * length * epsilon)
    }

    /// Physical energy `ε = -E/L²`.
    pub fn epsilon(self, length: f64) -> f64 {
        -self.0 / (length * length)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A point on the line, carried in both `z` and `ξ = (1 + tanh z)/2`.
///
/// `xi` and `xi_c = 1 - ξ` are each computed directly from `z` so that both
/// keep full relative precision in the far tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coordinate {
    pub z: f64,
    pub xi: f64,
    pub xi_c: f64,
}

impl Coordinate {
    pub fn from_z(z: f64) -> Self {
        Self {
            z,
            xi: xi_of_z(z),
            xi_c: xi_c_of_z(z),
        }
    }

    pub fn from_xi(xi: f64) -> Self {
        Self {
            z: z_of_xi(xi),
            xi,
            xi_c: 1.0 - xi,
        }
    }

    /// Recovers `z` from the stored pair.
    pub fn z_from_pair(&self) -> f64 {
        0.5 * (self.xi.ln() - self.xi_c.ln())
    }

    /// `dξ/dz = 2 ξ (1 - ξ)`.
    pub fn dxi_dz(&self) -> f64 {
        2.0 * self.xi * self.xi_c
    }
}

/// `ξ(z) = (1 + tanh z)/2`, written as a logistic to avoid cancellation.
pub fn xi_of_z(z: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * z).exp())
}

/// `1 - ξ(z)`.
pub fn xi_c_of_z(z: f64) -> f64 {
    1.0 / (1.0 + (2.0 * z).exp())
}

/// Inverse of [`xi_of_z`] on `(0, 1)`.
pub fn z_of_xi(xi: f64) -> f64 {
    0.5 * (xi / (1.0 - xi)).ln()
}

/// Dimensionless potential `U(z) = L² V(x)`.
pub fn potential_u(z: f64, p: &WellParameters) -> f64 {
    let t = z.tanh();
    let c = z.cosh();
    let sech2 = 1.0 / (c * c);
    (-p.w1 * (1.0 + t * t) + (p.w2 - p.w3 * t)) * sech2
}

/// Minimum of `U` over `[-z_cap, z_cap]` sampled on a dense grid.
pub fn potential_minimum(p: &WellParameters, z_cap: f64) -> (f64, f64) {
    let n = CEILING_GRID_POINTS;
    let h = 2.0 * z_cap / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let z = -z_cap + h * i as f64;
            (z, potential_u(z, p))
        })
        .fold(
            (0.0, f64::INFINITY),
            |best, cur| if cur.1 < best.1 { cur } else { best },
        )
}

/// Upper bound on the bound-state energies `E`.
///
/// Bound states satisfy `ε ≥ min V`, so `E ≤ -min U`; the sampled minimum
/// is padded by 5%. Returns 0 when `U ≥ 0` on the whole sampled window.
pub fn energy_search_ceiling(p: &WellParameters) -> f64 {
    energy_search_ceiling_with_cap(p, DEFAULT_Z_CAP)
}

pub fn energy_search_ceiling_with_cap(p: &WellParameters, z_cap: f64) -> f64 {
    let (_, u_min) = potential_minimum(p, z_cap);
    if u_min >= 0.0 {
        0.0
    } else {
        -u_min * CEILING_MARGIN
    }
}
