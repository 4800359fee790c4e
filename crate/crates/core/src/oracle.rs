//! Finite-difference reference solver.
//!
//! Discretizes `-ψ'' + U ψ = λ ψ` on `[-z_span, z_span]` with Dirichlet
//! ends and second-order central differences. The resulting symmetric
//! tridiagonal matrix is handled with Sturm-sequence counting and
//! bisection, so bound-state counts are exact for the discrete problem.
//! Matrix eigenvalues convert to energies through `E = -λ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{potential_u, WellParameters};

/// Uniform grid on `[-z_span, z_span]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdGrid {
    pub z_span: f64,
    pub points: usize,
}

impl Default for FdGrid {
    fn default() -> Self {
        Self {
            z_span: 25.0,
            points: 8001,
        }
    }
}

impl FdGrid {
    /// Grid with spacing at most `h`, rounded so that `z = 0` is a node.
    pub fn with_spacing(z_span: f64, h: f64) -> Self {
        let half = (z_span / h).ceil() as usize;
        Self {
            z_span,
            points: 2 * half + 1,
        }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.z_span / (self.points - 1) as f64
    }

    /// Same box, half the spacing.
    pub fn refined(&self) -> Self {
        Self {
            z_span: self.z_span,
            points: 2 * (self.points - 1) + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 3 || self.points.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "grid needs an odd number of points >= 3, got {}",
                self.points
            )));
        }
        if !(self.z_span > 0.0) {
            return Err(Error::Config(format!("z_span must be > 0, got {}", self.z_span)));
        }
        Ok(())
    }

    /// Interior nodes (the Dirichlet endpoints are dropped).
    pub fn interior(&self) -> Vec<f64> {
        let h = self.spacing();
        (1..self.points - 1)
            .map(|i| -self.z_span + h * i as f64)
            .collect()
    }
}

/// Symmetric tridiagonal matrix with constant off-diagonal.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub diagonal: Vec<f64>,
    pub off_diagonal: f64,
}

impl Tridiagonal {
    pub fn schrodinger(p: &WellParameters, g: &FdGrid) -> Self {
        let h = g.spacing();
        let inv_h2 = 1.0 / (h * h);
        let diagonal = g
            .interior()
            .iter()
            .map(|&z| 2.0 * inv_h2 + potential_u(z, p))
            .collect();
        Self {
            diagonal,
            off_diagonal: -inv_h2,
        }
    }

    /// Number of eigenvalues strictly below `lambda` (Sturm count via the
    /// signs of the LDLᵀ pivots).
    pub fn count_below(&self, lambda: f64) -> usize {
        let e2 = self.off_diagonal * self.off_diagonal;
        let guard = f64::MIN_POSITIVE.sqrt() * (1.0 + e2);
        let mut count = 0;
        let mut pivot = 1.0;
        for (i, &d) in self.diagonal.iter().enumerate() {
            pivot = if i == 0 {
                d - lambda
            } else {
                (d - lambda) - e2 / pivot
            };
            if pivot.abs() < guard {
                pivot = -guard;
            }
            if pivot < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let r = 2.0 * self.off_diagonal.abs();
        let lo = self.diagonal.iter().cloned().fold(f64::INFINITY, f64::min) - r;
        let hi = self.diagonal.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + r;
        (lo, hi)
    }

    /// The `index`-th smallest eigenvalue by bisection on the Sturm count.
    pub fn eigenvalue(&self, index: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(T - shift) x = rhs` by the Thomas algorithm.
    fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.diagonal.len();
        let e = self.off_diagonal;
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let tiny = 1e-300;
        let mut denom = self.diagonal[0] - shift;
        if denom.abs() < tiny {
            denom = tiny;
        }
        c[0] = e / denom;
        d[0] = rhs[0] / denom;
        for i in 1..n {
            let mut denom = (self.diagonal[i] - shift) - e * c[i - 1];
            if denom.abs() < tiny {
                denom = tiny;
            }
            c[i] = e / denom;
            d[i] = (rhs[i] - e * d[i - 1]) / denom;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }
}

/// Matrix eigenvalues below zero, ascending (deepest first).
fn negative_eigenvalues(t: &Tridiagonal, k: usize) -> Vec<f64> {
    let count = t.count_below(0.0).min(k);
    let (lo, _) = t.bounds();
    (0..count).map(|j| t.eigenvalue(j, lo, 0.0)).collect()
}

/// Energies `E = -λ > 0` of up to `k` of the deepest discrete bound states,
/// returned in ascending order of `E`.
pub fn fd_spectrum(p: &WellParameters, g: &FdGrid, k: usize) -> Result<Vec<f64>> {
    g.validate()?;
    let t = Tridiagonal::schrodinger(p, g);
    let mut energies: Vec<f64> = negative_eigenvalues(&t, k).into_iter().map(|l| -l).collect();
    energies.reverse();
    Ok(energies)
}

/// Number of discrete eigenvalues with `ε < 0`.
pub fn fd_count_negative(p: &WellParameters, g: &FdGrid) -> Result<usize> {
    g.validate()?;
    Ok(Tridiagonal::schrodinger(p, g).count_below(0.0))
}

/// Richardson-extrapolated spectrum from `g` and its refinement.
///
/// Levels present on both grids are combined as `(4 E_{h/2} - E_h) / 3`,
/// cancelling the `O(h²)` error; levels only resolved on the fine grid
/// are passed through.
pub fn fd_spectrum_extrapolated(p: &WellParameters, g: &FdGrid, k: usize) -> Result<Vec<f64>> {
    g.validate()?;
    let coarse = negative_eigenvalues(&Tridiagonal::schrodinger(p, g), k);
    let fine = negative_eigenvalues(&Tridiagonal::schrodinger(p, &g.refined()), k);
    let mut energies: Vec<f64> = fine
        .iter()
        .enumerate()
        .map(|(j, &lf)| match coarse.get(j) {
            Some(&lc) => -(4.0 * lf - lc) / 3.0,
            None => -lf,
        })
        .collect();
    energies.reverse();
    Ok(energies)
}

/// Node count of the zero-energy solution that is bounded as `z → -∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroEnergyNodes {
    /// Sign changes inside `[-span, span]`.
    pub inside: usize,
    /// Position of a further node past the right edge, found by continuing
    /// the solution linearly (where `U` has decayed).
    pub beyond: Option<f64>,
}

impl ZeroEnergyNodes {
    /// By the oscillation theorem this is the number of bound states.
    pub fn total(&self) -> usize {
        self.inside + usize::from(self.beyond.is_some())
    }
}

/// Marches the discrete zero-energy equation across `[-span, span]`
/// starting from a constant (bounded) left tail.
pub fn zero_energy_nodes(p: &WellParameters, h: f64, span: f64) -> ZeroEnergyNodes {
    let g = FdGrid::with_spacing(span, h);
    let h = g.spacing();
    let mut prev = 1.0f64;
    let mut cur = 1.0f64;
    let mut inside = 0;
    for i in 1..g.points {
        let z = -span + h * i as f64;
        let next = (2.0 + h * h * potential_u(z, p)) * cur - prev;
        if next == 0.0 || (next < 0.0) != (cur < 0.0) {
            inside += 1;
        }
        prev = cur;
        cur = next;
        let m = cur.abs().max(prev.abs());
        if m > 1e100 {
            prev /= m;
            cur /= m;
        }
    }
    let slope = (cur - prev) / h;
    let beyond = (cur * slope < 0.0).then(|| span + (cur / slope).abs());
    ZeroEnergyNodes { inside, beyond }
}

/// Richardson-extrapolated energy of the `index`-th deepest level.
fn extrapolated_level(p: &WellParameters, g: &FdGrid, index: usize) -> Option<f64> {
    let level = |grid: &FdGrid| {
        let t = Tridiagonal::schrodinger(p, grid);
        (t.count_below(0.0) > index).then(|| t.eigenvalue(index, t.bounds().0, 0.0))
    };
    let fine = level(&g.refined())?;
    Some(match level(g) {
        Some(coarse) => -(4.0 * fine - coarse) / 3.0,
        None => -fine,
    })
}

/// Half-width and level count of the box chosen by
/// [`fd_spectrum_adaptive`].
fn adaptive_box(p: &WellParameters, h: f64, z_span: f64, max_span: f64) -> (f64, usize) {
    let count_at = |span: f64| Tridiagonal::schrodinger(p, &FdGrid::with_spacing(span, h)).count_below(0.0);
    let shallowest = |span: f64, count: usize| {
        let t = Tridiagonal::schrodinger(p, &FdGrid::with_spacing(span, h));
        -t.eigenvalue(count - 1, t.bounds().0, 0.0)
    };

    let mut span = z_span;
    let mut count = count_at(span);
    while span < max_span {
        let fits = count == 0 || shallowest(span, count).sqrt() * span >= 20.0;
        let nodes = zero_energy_nodes(p, h, span);
        if fits && nodes.total() == count {
            break;
        }
        let target = nodes.beyond.map_or(2.0 * span, |z| (4.0 * z).max(2.0 * span));
        span = target.min(max_span);
        count = count_at(span);
    }
    (span, count)
}

/// Sturm count of levels with `ε < 0` on the box picked by
/// [`fd_spectrum_adaptive`].
pub fn fd_count_adaptive(p: &WellParameters, h: f64, z_span: f64, max_span: f64) -> Result<usize> {
    FdGrid::with_spacing(z_span, h).validate()?;
    Ok(adaptive_box(p, h, z_span, max_span).1)
}

/// Extrapolated spectrum with grid spacing `h`, robust to shallow levels.
///
/// Deep levels come from the box of half-width `z_span`. The box is then
/// widened (up to `max_span`) until its level count matches the node count of
/// the zero-energy solution and the shallowest level decays by `e^{-20}` inside it;
/// levels that do not fit the base box are recomputed in the widened one.
pub fn fd_spectrum_adaptive(
    p: &WellParameters,
    h: f64,
    z_span: f64,
    max_span: f64,
    k: usize,
) -> Result<Vec<f64>> {
    let base = FdGrid::with_spacing(z_span, h);
    base.validate()?;
    let (span, count) = adaptive_box(p, h, z_span, max_span);

    let wide = FdGrid::with_spacing(span, h);
    let mut energies = Vec::with_capacity(count.min(k));
    for index in 0..count.min(k) {
        let deep = extrapolated_level(p, &base, index);
        let e = match deep {
            Some(e) if e > 0.0 && e.sqrt() * z_span >= 20.0 => e,
            _ => match extrapolated_level(p, &wide, index) {
                Some(e) => e,
                None => break,
            },
        };
        energies.push(e);
    }
    energies.reverse();
    Ok(energies)
}

/// Discrete eigenvector for energy `energy` by inverse iteration,
/// normalized to unit L² norm on the grid. Returns `(z, ψ)` including the
/// Dirichlet endpoints.
pub fn fd_eigenvector(p: &WellParameters, g: &FdGrid, energy: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    g.validate()?;
    let t = Tridiagonal::schrodinger(p, g);
    let lambda = -energy;
    // Snap the shift onto the discrete eigenvalue nearest to -E.
    let below = t.count_below(lambda);
    let (lo, hi) = t.bounds();
    let candidates: Vec<f64> = [below.checked_sub(1), Some(below)]
        .into_iter()
        .flatten()
        .filter(|&j| j < t.diagonal.len())
        .map(|j| t.eigenvalue(j, lo, hi))
        .collect();
    let exact = candidates
        .into_iter()
        .min_by(|a, b| (a - lambda).abs().total_cmp(&(b - lambda).abs()))
        .ok_or_else(|| Error::Domain("empty grid".into()))?;
    let shift = exact + 1e-10 * exact.abs().max(1.0);

    let n = t.diagonal.len();
    let h = g.spacing();
    let mut x = vec![1.0; n];
    for _ in 0..4 {
        x = t.solve_shifted(shift, &x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    }
    let scale = 1.0 / h.sqrt();
    let mut psi = Vec::with_capacity(n + 2);
    psi.push(0.0);
    psi.extend(x.iter().map(|v| v * scale));
    psi.push(0.0);
    let mut z = vec![-g.z_span];
    z.extend(g.interior());
    z.push(g.z_span);
    Ok((z, psi))
}
