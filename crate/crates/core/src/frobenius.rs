//! Local Frobenius solutions of the well about `ξ = 0` and `ξ = 1`.
//!
//! Each solution has the form `ψ = ξ^q (1-ξ)^r e^{sξ} H(u)` where `u = ξ`
//! about the left singularity and `u = 1 - ξ` about the right one, with
//! `q = ½√E`, `r = ±q` and `s = ±2√w1`.
//!
//! | solution | expansion | r  | α   | β   | γ   | δ    | η                   |
//! |----------|-----------|----|-----|-----|-----|------|---------------------|
//! | ψ1       | ξ = 0     | q  | 2s  | 2q  | 2q  | -2w3 | -2w1+w2+w3+2q²      |
//! | ψ2       | ξ = 0     | -q | 2s  | 2q  | -2q | -2w3 | -2w1+w2+w3+2q²      |
//! | ψ3       | ξ = 1     | q  | -2s | 2q  | 2q  | 2w3  | -2w1+w2-w3+2q²      |
//! | ψ4       | ξ = 1     | -q | -2s | -2q | 2q  | 2w3  | -2w1+w2-w3+2q²      |
//!
//! ψ1 decays as `z → -∞` and ψ3 as `z → +∞`; these two are all the
//! eigensolver needs. ψ2 and ψ4 are only normalizable when their Heun
//! factor truncates to a polynomial.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heun::{eval_heun, HeunParameters, SeriesControl};
use crate::model::{Coordinate, WellParameters};

/// Both series are kept at least this far inside their unit disks.
pub const OVERLAP_MARGIN: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionPoint {
    AtZero,
    AtOne,
}

/// Sign of the exponent `r` on `(1 - ξ)` relative to `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentChoice {
    REqQ,
    REqMinusQ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SSign {
    Plus,
    #[default]
    Minus,
}

impl SSign {
    pub fn factor(self) -> f64 {
        match self {
            SSign::Plus => 1.0,
            SSign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            SSign::Plus => SSign::Minus,
            SSign::Minus => SSign::Plus,
        }
    }
}

/// Choice of `s` for the left (ψ1) and right (ψ3) solutions of a matched
/// pair. Each local solution carries its own constant, so the two sides
/// may use different signs.
///
/// `Balanced` takes `s = -2√w1` on the left and `s = +2√w1` on the right,
/// making the exponential factor decay in each side's own series variable.
/// The Heun series then sums without heavy cancellation; with a common sign
/// one of the two series cancels by several orders of magnitude when `w1`
/// is large.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SBranch {
    Plus,
    Minus,
    #[default]
    Balanced,
}

impl SBranch {
    pub fn left(self) -> SSign {
        match self {
            SBranch::Plus => SSign::Plus,
            SBranch::Minus | SBranch::Balanced => SSign::Minus,
        }
    }

    pub fn right(self) -> SSign {
        match self {
            SBranch::Minus => SSign::Minus,
            SBranch::Plus | SBranch::Balanced => SSign::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchSpec {
    pub expansion_point: ExpansionPoint,
    pub exponent_choice: ExponentChoice,
    pub s_sign: SSign,
}

impl BranchSpec {
    pub fn psi1(s_sign: SSign) -> Self {
        Self {
            expansion_point: ExpansionPoint::AtZero,
            exponent_choice: ExponentChoice::REqQ,
            s_sign,
        }
    }

    pub fn psi2(s_sign: SSign) -> Self {
        Self {
            expansion_point: ExpansionPoint::AtZero,
            exponent_choice: ExponentChoice::REqMinusQ,
            s_sign,
        }
    }

    pub fn psi3(s_sign: SSign) -> Self {
        Self {
            expansion_point: ExpansionPoint::AtOne,
            exponent_choice: ExponentChoice::REqQ,
            s_sign,
        }
    }

    pub fn psi4(s_sign: SSign) -> Self {
        Self {
            expansion_point: ExpansionPoint::AtOne,
            exponent_choice: ExponentChoice::REqMinusQ,
            s_sign,
        }
    }
}

/// One local solution, ready to be evaluated in `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalSolution {
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub hp: HeunParameters,
    pub branch: BranchSpec,
    /// Multiplicative constant in front of the solution.
    pub scale: f64,
}

/// Value and `z`-derivative of a local solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiValue {
    pub psi: f64,
    pub dpsi_dz: f64,
    pub terms_used: usize,
}

/// Builds ψ1…ψ4 for energy `E > 0` with `q = +½√E`.
pub fn build_local_solution(p: &WellParameters, energy: f64, branch: BranchSpec) -> Result<LocalSolution> {
    if !(energy > 0.0) {
        return Err(Error::Domain(format!("energy must be > 0, got {energy}")));
    }
    LocalSolution::with_exponent(p, 0.5 * energy.sqrt(), branch)
}

impl LocalSolution {
    /// Builds a solution for an explicit exponent `q ≥ 0`; `q = 0` is the
    /// zero-energy (threshold) case.
    pub fn with_exponent(p: &WellParameters, q: f64, branch: BranchSpec) -> Result<Self> {
        if p.w1 < 0.0 {
            return Err(Error::Domain(format!("w1 must be >= 0, got {}", p.w1)));
        }
        if !(q >= 0.0) {
            return Err(Error::Domain(format!("exponent q must be >= 0, got {q}")));
        }
        let s = branch.s_sign.factor() * 2.0 * p.w1.sqrt();
        let q2 = 2.0 * q * q;
        let (r, hp) = match (branch.expansion_point, branch.exponent_choice) {
            (ExpansionPoint::AtZero, choice) => {
                let (r, gamma) = match choice {
                    ExponentChoice::REqQ => (q, 2.0 * q),
                    ExponentChoice::REqMinusQ => (-q, -2.0 * q),
                };
                let hp = HeunParameters::new(
                    2.0 * s,
                    2.0 * q,
                    gamma,
                    -2.0 * p.w3,
                    -2.0 * p.w1 + p.w2 + p.w3 + q2,
                );
                (r, hp)
            }
            (ExpansionPoint::AtOne, choice) => {
                let (r, beta) = match choice {
                    ExponentChoice::REqQ => (q, 2.0 * q),
                    ExponentChoice::REqMinusQ => (-q, -2.0 * q),
                };
                let hp = HeunParameters::new(
                    -2.0 * s,
                    beta,
                    2.0 * q,
                    2.0 * p.w3,
                    -2.0 * p.w1 + p.w2 - p.w3 + q2,
                );
                (r, hp)
            }
        };
        Ok(Self {
            q,
            r,
            s,
            hp,
            branch,
            scale: 1.0,
        })
    }

    /// Zero-energy solution used for threshold analysis.
    pub fn zero_energy(p: &WellParameters, branch: BranchSpec) -> Result<Self> {
        Self::with_exponent(p, 0.0, branch)
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// ψ2 and ψ4 are only admissible as polynomial (truncated) solutions.
    pub fn requires_truncation(&self) -> bool {
        self.branch.exponent_choice == ExponentChoice::REqMinusQ
    }

    /// Validity flag for a truncated ψ2/ψ4 of polynomial order `order`
    /// (needs `N > |q|`).
    pub fn truncation_order_admissible(&self, order: usize) -> bool {
        order as f64 > self.q.abs()
    }

    /// Series argument for this branch.
    fn series_argument(&self, c: &Coordinate) -> f64 {
        match self.branch.expansion_point {
            ExpansionPoint::AtZero => c.xi,
            ExpansionPoint::AtOne => c.xi_c,
        }
    }

    /// Whether `z` lies inside this branch's admissible region.
    pub fn admits(&self, z: f64) -> bool {
        self.series_argument(&Coordinate::from_z(z)) <= 1.0 - OVERLAP_MARGIN
    }

    pub fn eval(&self, z: f64, ctl: &SeriesControl) -> Result<PsiValue> {
        let c = Coordinate::from_z(z);
        let u = self.series_argument(&c);
        if u > 1.0 - OVERLAP_MARGIN {
            return Err(Error::Domain(format!(
                "z = {z} maps to series argument {u}, outside the disk margin for {:?}",
                self.branch.expansion_point
            )));
        }
        let series = eval_heun(&self.hp, u, ctl)?.checked()?;
        let dh_dxi = match self.branch.expansion_point {
            ExpansionPoint::AtZero => series.derivative,
            ExpansionPoint::AtOne => -series.derivative,
        };
        let (xi, xi_c) = (c.xi, c.xi_c);
        let prefactor = xi.powf(self.q) * xi_c.powf(self.r) * (self.s * xi).exp();
        // d/dz [ξ^q (1-ξ)^r e^{sξ}] = prefactor · 2(qξ' - rξ + sξξ')
        let log_slope = 2.0 * (self.q * xi_c - self.r * xi + self.s * xi * xi_c);
        let psi = prefactor * series.value;
        let dpsi = prefactor * (log_slope * series.value + 2.0 * xi * xi_c * dh_dxi);
        Ok(PsiValue {
            psi: self.scale * psi,
            dpsi_dz: self.scale * dpsi,
            terms_used: series.terms_used,
        })
    }
}

/// `(ψ, dψ/dz)` at `z`.
pub fn eval_psi(sol: &LocalSolution, z: f64, ctl: &SeriesControl) -> Result<(f64, f64)> {
    sol.eval(z, ctl).map(|v| (v.psi, v.dpsi_dz))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::potential_u;

    fn reference_well() -> WellParameters {
        WellParameters::new(15.0, 12.0, 1.0).unwrap()
    }

    #[test]
    fn exponent_from_energy() {
        let sol = build_local_solution(&reference_well(), 4.0, BranchSpec::psi1(SSign::Minus)).unwrap();
        assert_eq!(sol.q, 1.0);
        assert_eq!(sol.hp.beta, 2.0);
        assert_eq!(sol.hp.gamma, 2.0);
        assert_eq!(sol.hp.delta, -2.0);
    }

    #[test]
    fn right_branch_eta() {
        let e = 2.434;
        let sol = build_local_solution(&reference_well(), e, BranchSpec::psi3(SSign::Minus)).unwrap();
        let q = 0.5 * e.sqrt();
        let expected = -30.0 + 12.0 - 1.0 + 2.0 * q * q;
        assert!((sol.hp.eta - expected).abs() < 1e-14);
        assert!((sol.hp.eta - (-19.0 + e / 2.0)).abs() < 1e-13);
        assert_eq!(sol.hp.alpha, 4.0 * 15f64.sqrt());
        assert_eq!(sol.hp.delta, 2.0);
    }

    #[test]
    fn branch_tables() {
        let p = reference_well();
        let e = 1.44;
        let psi2 = build_local_solution(&p, e, BranchSpec::psi2(SSign::Plus)).unwrap();
        assert_eq!((psi2.hp.beta, psi2.hp.gamma, psi2.r), (1.2, -1.2, -0.6));
        assert_eq!(psi2.s, 2.0 * 15f64.sqrt());
        let psi4 = build_local_solution(&p, e, BranchSpec::psi4(SSign::Plus)).unwrap();
        assert_eq!((psi4.hp.beta, psi4.hp.gamma, psi4.r), (-1.2, 1.2, -0.6));
        assert!(psi4.requires_truncation() && !psi4.truncation_order_admissible(0));
        assert!(psi4.truncation_order_admissible(1));
    }

    #[test]
    fn rejects_non_positive_energy() {
        let p = reference_well();
        assert!(build_local_solution(&p, 0.0, BranchSpec::psi1(SSign::Minus)).is_err());
        assert!(build_local_solution(&p, -1.0, BranchSpec::psi1(SSign::Minus)).is_err());
    }

    #[test]
    fn left_solution_vanishes_far_left() {
        let ctl = SeriesControl::default();
        // ψ1 ~ ξ^q ~ e^{2qz} as z → -∞
        let sol = build_local_solution(&reference_well(), 1.0, BranchSpec::psi1(SSign::Minus)).unwrap();
        let (psi, _) = eval_psi(&sol, -30.0, &ctl).unwrap();
        assert!(psi.abs() < 1e-12, "{psi}");
        let sol = build_local_solution(&reference_well(), 0.25, BranchSpec::psi1(SSign::Minus)).unwrap();
        let (psi, _) = eval_psi(&sol, -60.0, &ctl).unwrap();
        assert!(psi.abs() < 1e-12, "{psi}");
        let sol = build_local_solution(&reference_well(), 0.25, BranchSpec::psi3(SSign::Minus)).unwrap();
        let (psi, _) = eval_psi(&sol, 60.0, &ctl).unwrap();
        assert!(psi.abs() < 1e-12, "{psi}");
    }

    #[test]
    fn domain_margin_is_enforced() {
        let sol = build_local_solution(&reference_well(), 1.0, BranchSpec::psi1(SSign::Minus)).unwrap();
        assert!(matches!(
            eval_psi(&sol, 3.0, &SeriesControl::default()),
            Err(Error::Domain(_))
        ));
        let sol3 = build_local_solution(&reference_well(), 1.0, BranchSpec::psi3(SSign::Minus)).unwrap();
        assert!(eval_psi(&sol3, 3.0, &SeriesControl::default()).is_ok());
        assert!(eval_psi(&sol3, -3.0, &SeriesControl::default()).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let ctl = SeriesControl::default();
        for branch in [BranchSpec::psi1(SSign::Minus), BranchSpec::psi3(SSign::Plus)] {
            let sol = build_local_solution(&reference_well(), 1.0, branch).unwrap();
            let h = 1e-6;
            let (_, d) = eval_psi(&sol, 0.2, &ctl).unwrap();
            let (up, _) = eval_psi(&sol, 0.2 + h, &ctl).unwrap();
            let (dn, _) = eval_psi(&sol, 0.2 - h, &ctl).unwrap();
            let fd = (up - dn) / (2.0 * h);
            assert!((d - fd).abs() <= 1e-6 * d.abs(), "{d} vs {fd}");
        }
    }

    #[test]
    fn both_sides_nonzero_at_match_point() {
        let ctl = SeriesControl::default();
        for branch in [BranchSpec::psi1(SSign::Minus), BranchSpec::psi3(SSign::Minus)] {
            let sol = build_local_solution(&reference_well(), 0.311, branch).unwrap();
            let (psi, d) = eval_psi(&sol, 0.2, &ctl).unwrap();
            assert!(psi.is_finite() && d.is_finite() && psi != 0.0);
        }
    }

    #[test]
    fn satisfies_schrodinger_equation() {
        let p = reference_well();
        let e = 1.7;
        let ctl = SeriesControl::default();
        let h = 4e-3;
        let cases = [
            (BranchSpec::psi1(SSign::Minus), e, [-2.0, -1.0, -0.4, 0.0, 0.3]),
            (BranchSpec::psi1(SSign::Plus), e, [-2.0, -1.0, -0.4, 0.0, 0.3]),
            (BranchSpec::psi2(SSign::Minus), e, [-2.0, -1.0, -0.4, 0.0, 0.3]),
            (BranchSpec::psi3(SSign::Minus), e, [-0.3, 0.0, 0.4, 1.0, 2.0]),
            // ψ4 has β = -2q, so the series needs q < 1/2
            (BranchSpec::psi4(SSign::Minus), 0.64, [-0.3, 0.0, 0.4, 1.0, 2.0]),
        ];
        for (branch, e, zs) in cases {
            let sol = build_local_solution(&p, e, branch).unwrap();
            for z in zs {
                let d = |z: f64| eval_psi(&sol, z, &ctl).unwrap().1;
                let (psi, dpsi) = eval_psi(&sol, z, &ctl).unwrap();
                let second =
                    (-d(z + 2.0 * h) + 8.0 * d(z + h) - 8.0 * d(z - h) + d(z - 2.0 * h)) / (12.0 * h);
                let residual = -second + (potential_u(z, &p) + e) * psi;
                let scale = psi.abs() + dpsi.abs();
                assert!(
                    residual.abs() <= 1e-7 * scale,
                    "{branch:?} z={z}: {residual} (scale {scale})"
                );
            }
        }
    }
}
