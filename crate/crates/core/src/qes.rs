//! Quasi-exactly solvable wells: parameter sets on which the left Heun
//! series truncates to a polynomial of order `N`.
//!
//! Truncation needs two conditions on the `ψ1` branch (`r = q`, so
//! `α = 2s`, `β = γ = 2q`, `δ = -2w3`):
//!
//! 1. `δ = -α(N + 1 + (β+γ)/2)`, i.e. `w3 = s(N + 1 + 2q)`, which fixes the
//!    energy `E = 4q²` with `q = w3/(2s) - (N+1)/2`;
//! 2. `c_{N+1} = 0`, a degree-`N+1` polynomial condition in `η`, hence in
//!    `w2`.
//!
//! The resulting level is available in closed form: the wavefunction is
//! `ξ^q (1-ξ)^q e^{sξ} Σ_{n≤N} c_n ξⁿ` on the whole line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frobenius::{BranchSpec, ExponentChoice, LocalSolution, SSign};
use crate::heun::{coefficients, terminating_delta, termination_residual};
use crate::model::{Coordinate, WellParameters};
use crate::numeric::{bisect, simpson};

pub const DEFAULT_W2_CAP: f64 = 200.0;
const W2_SCAN_CELLS: usize = 4000;

/// The branch used to build polynomial solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QesBranch {
    pub order: usize,
    pub s_sign: SSign,
    pub exponent_choice: ExponentChoice,
}

impl QesBranch {
    pub fn new(order: usize, s_sign: SSign) -> Self {
        Self {
            order,
            s_sign,
            exponent_choice: ExponentChoice::REqQ,
        }
    }

    fn branch(&self) -> BranchSpec {
        BranchSpec::psi1(self.s_sign)
    }
}

/// Exponent `q` forced by the first truncation condition.
pub fn truncation_exponent(w1: f64, w3: f64, order: usize, s_sign: SSign) -> Result<f64> {
    if !(w1 > 0.0) {
        return Err(Error::Domain(format!("QES construction needs w1 > 0, got {w1}")));
    }
    let s = s_sign.factor() * 2.0 * w1.sqrt();
    Ok(w3 / (2.0 * s) - 0.5 * (order as f64 + 1.0))
}

/// Closed-form energy `E = 4q²` of an order-`N` polynomial state, or
/// `None` when the forced `q` is not positive.
pub fn analytic_energy(w1: f64, w3: f64, order: usize, s_sign: SSign) -> Result<Option<f64>> {
    let q = truncation_exponent(w1, w3, order, s_sign)?;
    Ok((q > 0.0).then_some(4.0 * q * q))
}

/// A constructed polynomial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QesSolution {
    pub well: WellParameters,
    pub energy: f64,
    pub branch: QesBranch,
    /// `c_{N+1}` at the returned `w2`.
    pub residual: f64,
    /// `c_0 … c_N`.
    pub polynomial: Vec<f64>,
}

impl QesSolution {
    fn local(&self) -> LocalSolution {
        LocalSolution::with_exponent(&self.well, 0.5 * self.energy.sqrt(), self.branch.branch())
            .expect("constructed parameters are admissible")
    }

    /// Unnormalized closed-form wavefunction at `z`; valid for all `z`.
    pub fn psi(&self, z: f64) -> f64 {
        let sol = self.local();
        let c = Coordinate::from_z(z);
        let poly = self.polynomial.iter().rev().fold(0.0, |acc, cn| acc * c.xi + cn);
        c.xi.powf(sol.q) * c.xi_c.powf(sol.q) * (sol.s * c.xi).exp() * poly
    }

    /// Samples on `z` (uniform spacing) normalized to unit L² norm.
    pub fn normalized_samples(&self, z: &[f64]) -> Vec<f64> {
        let raw: Vec<f64> = z.iter().map(|&zi| self.psi(zi)).collect();
        let h = if z.len() > 1 { z[1] - z[0] } else { 1.0 };
        let sq: Vec<f64> = raw.iter().map(|v| v * v).collect();
        let norm = simpson(&sq, h).sqrt();
        raw.into_iter().map(|v| v / norm).collect()
    }

    /// Coefficients `c_0 … c_{count-1}` of the full (untruncated) recurrence.
    pub fn series_coefficients(&self, count: usize) -> Vec<f64> {
        coefficients(&self.local().hp, count)
    }
}

/// `c_{N+1}` on the truncation branch as a function of `w2`.
fn residual_at(w1: f64, w2: f64, w3: f64, q: f64, branch: &QesBranch) -> Result<f64> {
    let well = WellParameters::new(w1, w2, w3)?;
    let sol = LocalSolution::with_exponent(&well, q, branch.branch())?;
    debug_assert!(
        (sol.hp.delta - terminating_delta(&sol.hp, branch.order)).abs() <= 1e-9 * sol.hp.delta.abs().max(1.0)
    );
    Ok(termination_residual(&sol.hp, branch.order))
}

/// All `w2 ∈ [-cap, cap]` for which the order-`N` truncation holds, found
/// by a sign-change scan of `c_{N+1}(w2)` followed by bisection.
pub fn solve_w2_for_termination_in(
    w1: f64,
    w3: f64,
    order: usize,
    s_sign: SSign,
    w2_cap: f64,
) -> Result<Vec<QesSolution>> {
    let branch = QesBranch::new(order, s_sign);
    let energy = analytic_energy(w1, w3, order, s_sign)?.ok_or_else(|| {
        Error::Domain(format!(
            "no admissible polynomial state for w1={w1}, w3={w3}, N={order}, s {s_sign:?}"
        ))
    })?;
    let q = 0.5 * energy.sqrt();
    let f = |w2: f64| residual_at(w1, w2, w3, q, &branch);

    let h = 2.0 * w2_cap / W2_SCAN_CELLS as f64;
    let nodes: Vec<f64> = (0..=W2_SCAN_CELLS).map(|i| -w2_cap + h * i as f64).collect();
    let values: Vec<f64> = nodes.iter().map(|&w2| f(w2)).collect::<Result<_>>()?;

    let mut out = Vec::new();
    for i in 0..W2_SCAN_CELLS {
        let (a, b) = (values[i], values[i + 1]);
        if (a >= 0.0) != (b >= 0.0) {
            let w2 = bisect(f, nodes[i], nodes[i + 1], a, 0.0)?;
            let well = WellParameters::new(w1, w2, w3)?;
            let residual = f(w2)?;
            let mut solution = QesSolution {
                well,
                energy,
                branch,
                residual,
                polynomial: Vec::new(),
            };
            solution.polynomial = solution.series_coefficients(order + 1);
            out.push(solution);
        }
    }
    Ok(out)
}

pub fn solve_w2_for_termination(w1: f64, w3: f64, order: usize, s_sign: SSign) -> Result<Vec<QesSolution>> {
    solve_w2_for_termination_in(w1, w3, order, s_sign, DEFAULT_W2_CAP)
}
