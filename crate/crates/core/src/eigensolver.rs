//! Bound-state energies from the Wronskian of the two decaying local
//! solutions.
//!
//! ψ1 (expanded about `ξ = 0`) decays as `z → -∞` and ψ3 (about `ξ = 1`)
//! decays as `z → +∞`. Both series converge at a common match point
//! `z_match`, and `E` is an eigenvalue exactly when
//! `W = ψ1 ψ3' - ψ3 ψ1'` vanishes there. Because the `z`-form equation has
//! no first-derivative term, `W` does not depend on where it is evaluated.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frobenius::{build_local_solution, BranchSpec, LocalSolution, SBranch, OVERLAP_MARGIN};
use crate::heun::SeriesControl;
use crate::model::{energy_search_ceiling, xi_of_z, WellParameters};
use crate::numeric::{bisect, linspace, simpson};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub z_match: f64,
    /// Number of uniformly spaced energies in the sign-change scan.
    pub grid_points: usize,
    /// Bisection stops when the bracket on `E` is narrower than this.
    pub refine_tol: f64,
    pub e_floor: f64,
    pub ceiling_override: Option<f64>,
    pub s_branch: SBranch,
    pub series: SeriesControl,
    /// Target spacing in `z` for sampled wavefunctions.
    pub wave_step: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            z_match: 0.2,
            grid_points: 2000,
            refine_tol: 1e-10,
            e_floor: 1e-6,
            ceiling_override: None,
            s_branch: SBranch::Balanced,
            series: SeriesControl::default(),
            wave_step: 0.005,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        validate_match_point(self.z_match)?;
        if self.grid_points < 10 {
            return Err(Error::Config(format!(
                "grid_points must be >= 10, got {}",
                self.grid_points
            )));
        }
        if !(self.refine_tol > 0.0) || !(self.e_floor > 0.0) {
            return Err(Error::Config("refine_tol and e_floor must be > 0".into()));
        }
        if !(self.wave_step > 0.0) {
            return Err(Error::Config(format!(
                "wave_step must be > 0, got {}",
                self.wave_step
            )));
        }
        self.series.validate()
    }
}

/// Both series must converge comfortably at the match point.
pub fn validate_match_point(z_match: f64) -> Result<()> {
    let xi = xi_of_z(z_match);
    if !(OVERLAP_MARGIN..=1.0 - OVERLAP_MARGIN).contains(&xi) {
        return Err(Error::Domain(format!(
            "z_match = {z_match} maps to xi = {xi}, outside [{OVERLAP_MARGIN}, {}]",
            1.0 - OVERLAP_MARGIN
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub ceiling: f64,
    pub grid_points: usize,
    /// Largest series length used on the left and right solutions.
    pub max_terms_left: usize,
    pub max_terms_right: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    /// Ascending.
    pub energies: Vec<f64>,
    /// Normalized `|W|` at each refined energy.
    pub wronskian_residuals: Vec<f64>,
    pub brackets: Vec<(f64, f64)>,
    pub diagnostics: SolveDiagnostics,
}

impl EigenResult {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

/// Raw and normalized Wronskian at one energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WronskianValue {
    pub raw: f64,
    /// `raw / ((|ψ1| + |ψ1'|)(|ψ3| + |ψ3'|))`.
    pub normalized: f64,
    pub terms_left: usize,
    pub terms_right: usize,
}

pub fn wronskian_of(
    left: &LocalSolution,
    right: &LocalSolution,
    z_match: f64,
    ctl: &SeriesControl,
) -> Result<WronskianValue> {
    let l = left.eval(z_match, ctl)?;
    let r = right.eval(z_match, ctl)?;
    let raw = l.psi * r.dpsi_dz - r.psi * l.dpsi_dz;
    let scale = (l.psi.abs() + l.dpsi_dz.abs()) * (r.psi.abs() + r.dpsi_dz.abs());
    let normalized = if scale > 0.0 { raw / scale } else { 0.0 };
    Ok(WronskianValue {
        raw,
        normalized,
        terms_left: l.terms_used,
        terms_right: r.terms_used,
    })
}

pub fn evaluate_wronskian(
    p: &WellParameters,
    energy: f64,
    z_match: f64,
    s_branch: SBranch,
    ctl: &SeriesControl,
) -> Result<WronskianValue> {
    let left = build_local_solution(p, energy, BranchSpec::psi1(s_branch.left()))?;
    let right = build_local_solution(p, energy, BranchSpec::psi3(s_branch.right()))?;
    wronskian_of(&left, &right, z_match, ctl)
}

/// Normalized `W(ψ1, ψ3)` at `z_match` with the default (balanced) `s`
/// choice.
pub fn wronskian(p: &WellParameters, energy: f64, z_match: f64, ctl: &SeriesControl) -> Result<f64> {
    validate_match_point(z_match)?;
    evaluate_wronskian(p, energy, z_match, SBranch::default(), ctl).map(|w| w.normalized)
}

/// Unnormalized `W(ψ1, ψ3)`; independent of `z_match` for fixed `E`.
pub fn raw_wronskian(p: &WellParameters, energy: f64, z_match: f64, ctl: &SeriesControl) -> Result<f64> {
    validate_match_point(z_match)?;
    evaluate_wronskian(p, energy, z_match, SBranch::default(), ctl).map(|w| w.raw)
}

/// Sign-change brackets of a sampled function, plus indices of cells whose
/// neighbour also changes sign.
pub(crate) fn sign_change_cells(values: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let positive = |v: f64| v >= 0.0;
    let cells: Vec<usize> = (0..values.len().saturating_sub(1))
        .filter(|&i| positive(values[i]) != positive(values[i + 1]))
        .collect();
    let crowded = cells
        .windows(2)
        .filter(|w| w[1] == w[0] + 1)
        .map(|w| w[0])
        .collect();
    (cells, crowded)
}

/// Normalized `|W(0)|` below which `E = 0` is treated as a threshold state.
/// Near threshold `W` grows like `√E`, so this still resolves levels down
/// to roughly `E ~ 1e-20`.
const THRESHOLD_NOISE: f64 = 1e-12;

/// Wronskian at `E >= 0`; `E = 0` is the limit `q -> 0` of the bound-state
/// solutions, which is continuous.
fn wronskian_from_zero(p: &WellParameters, energy: f64, opts: &SolveOptions) -> Result<WronskianValue> {
    let q = 0.5 * energy.sqrt();
    let left = LocalSolution::with_exponent(p, q, BranchSpec::psi1(opts.s_branch.left()))?;
    let right = LocalSolution::with_exponent(p, q, BranchSpec::psi3(opts.s_branch.right()))?;
    wronskian_of(&left, &right, opts.z_match, &opts.series)
}

/// Scans `E` over `[e_floor, ceiling]` for sign changes of the normalized
/// Wronskian and refines each by bisection. The scan also includes `E = 0`,
/// so levels shallower than `e_floor` are still bracketed and refined.
pub fn find_eigenvalues(p: &WellParameters, opts: &SolveOptions) -> Result<EigenResult> {
    opts.validate()?;
    let ceiling = opts.ceiling_override.unwrap_or_else(|| energy_search_ceiling(p));
    let mut result = EigenResult {
        diagnostics: SolveDiagnostics {
            ceiling,
            grid_points: opts.grid_points,
            ..Default::default()
        },
        ..Default::default()
    };
    if ceiling <= opts.e_floor {
        return Ok(result);
    }

    let mut energies = vec![0.0];
    energies.extend(linspace(opts.e_floor, ceiling, opts.grid_points));
    let evals: Vec<WronskianValue> = energies
        .par_iter()
        .map(|&e| wronskian_from_zero(p, e, opts))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = evals.iter().map(|w| w.normalized).collect();
    let diag = &mut result.diagnostics;
    diag.max_terms_left = evals.iter().map(|w| w.terms_left).max().unwrap_or(0);
    diag.max_terms_right = evals.iter().map(|w| w.terms_right).max().unwrap_or(0);

    let (mut cells, crowded) = sign_change_cells(&values);
    // A zero-energy (threshold) state makes W(0) vanish up to rounding; it
    // is not a bound state.
    if values[0].abs() <= THRESHOLD_NOISE {
        cells.retain(|&i| i != 0);
    }
    for i in crowded {
        diag.warnings.push(format!(
            "bracket too coarse: sign changes in adjacent cells near E = {:.6}; roots may be missed",
            energies[i + 1]
        ));
    }

    let refined: Vec<(f64, f64, (f64, f64))> = cells
        .par_iter()
        .map(|&i| {
            let (lo, hi) = (energies[i], energies[i + 1]);
            let f = |e: f64| wronskian_from_zero(p, e, opts).map(|w| w.normalized);
            // below e_floor an absolute tolerance would be meaningless
            let tol = if lo == 0.0 {
                opts.refine_tol * hi
            } else {
                opts.refine_tol
            };
            let root = bisect(f, lo, hi, values[i], tol)?;
            let residual = f(root)?.abs();
            Ok((root, residual, (lo, hi)))
        })
        .collect::<Result<_>>()?;

    for (root, residual, bracket) in refined {
        result.energies.push(root);
        result.wronskian_residuals.push(residual);
        result.brackets.push(bracket);
    }
    Ok(result)
}

/// A normalized bound-state wavefunction sampled on a symmetric `z` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wavefunction {
    pub energy: f64,
    pub z: Vec<f64>,
    pub psi: Vec<f64>,
    pub z_match: f64,
    /// `D` in `ψ = D ψ3` on the right of the match point, before the
    /// overall normalization.
    pub match_scale: f64,
    /// Overall factor applied so that `∫ψ² dz = 1`.
    pub norm_factor: f64,
    /// `|ψ1' - D ψ3'| / |ψ1'|` at the match point.
    pub derivative_mismatch: f64,
}

impl Wavefunction {
    pub fn spacing(&self) -> f64 {
        self.z[1] - self.z[0]
    }

    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.psi.iter().map(|v| v * v).collect();
        simpson(&sq, self.spacing())
    }
}

const MAX_WAVE_POINTS: usize = 400_001;

/// Half-width of the sampling window: the slowest tail `e^{-√E |z|}` has
/// dropped below 1e-9 at the edges.
pub fn wavefunction_span(energy: f64) -> f64 {
    let decay = (1e9f64).ln() / energy.sqrt();
    decay.max(8.0)
}

/// Glues ψ1 (left of `z_match`) to `D ψ3` (right of it) with
/// `D = ψ1(z_match)/ψ3(z_match)` and normalizes on `[-z_span, z_span]`.
pub fn assemble_wavefunction(p: &WellParameters, energy: f64, opts: &SolveOptions) -> Result<Wavefunction> {
    opts.validate()?;
    let left = build_local_solution(p, energy, BranchSpec::psi1(opts.s_branch.left()))?;
    let right = build_local_solution(p, energy, BranchSpec::psi3(opts.s_branch.right()))?;
    let l = left.eval(opts.z_match, &opts.series)?;
    let r = right.eval(opts.z_match, &opts.series)?;
    if r.psi.abs() < 1e-300 {
        return Err(Error::MatchFailure(r.psi.abs()));
    }
    let d = l.psi / r.psi;
    let right = right.with_scale(d);
    let derivative_mismatch = (l.dpsi_dz - d * r.dpsi_dz).abs() / l.dpsi_dz.abs().max(f64::MIN_POSITIVE);

    let span = wavefunction_span(energy);
    let half = ((span / opts.wave_step).ceil() as usize).min(MAX_WAVE_POINTS / 2);
    let h = span / half as f64;
    let z: Vec<f64> = (0..=2 * half).map(|i| (i as f64 - half as f64) * h).collect();
    let psi: Vec<f64> = z
        .par_iter()
        .map(|&zi| {
            let side = if zi <= opts.z_match { &left } else { &right };
            side.eval(zi, &opts.series).map(|v| v.psi)
        })
        .collect::<Result<_>>()?;

    let sq: Vec<f64> = psi.iter().map(|v| v * v).collect();
    let norm = simpson(&sq, h);
    let norm_factor = 1.0 / norm.sqrt();
    let psi = psi.into_iter().map(|v| v * norm_factor).collect();
    Ok(Wavefunction {
        energy,
        z,
        psi,
        z_match: opts.z_match,
        match_scale: d,
        norm_factor,
        derivative_mismatch,
    })
}
