//! Bound-state counts over the `(w2, w3)` plane and the curves on which
//! new levels leave the continuum.
//!
//! A level emerges exactly where a zero-energy solution is bounded at both
//! ends, i.e. where the `E = 0` Wronskian of the two analytic local
//! solutions vanishes. At `E = 0` both exponents are zero and the local
//! solutions reduce to `e^{sξ} H(…)`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolver::{find_eigenvalues, validate_match_point, wronskian_of, SolveOptions};
use crate::error::Result;
use crate::frobenius::{BranchSpec, LocalSolution, SBranch};
use crate::heun::SeriesControl;
use crate::model::WellParameters;
use crate::numeric::bisect;

/// Scan window and resolution used when none is given.
pub const DEFAULT_RANGE: (f64, f64) = (-30.0, 30.0);
pub const DEFAULT_RESOLUTION: usize = 60;
pub const W1_PRESETS: [f64; 3] = [5.0, 10.0, 15.0];

pub fn wronskian_at_zero_energy_with(
    p: &WellParameters,
    z_match: f64,
    s_branch: SBranch,
    ctl: &SeriesControl,
) -> Result<f64> {
    validate_match_point(z_match)?;
    let left = LocalSolution::zero_energy(p, BranchSpec::psi1(s_branch.left()))?;
    let right = LocalSolution::zero_energy(p, BranchSpec::psi3(s_branch.right()))?;
    Ok(wronskian_of(&left, &right, z_match, ctl)?.normalized)
}

/// Normalized `W(ψ1, ψ3)` at `E = 0`.
pub fn wronskian_at_zero_energy(p: &WellParameters, z_match: f64, ctl: &SeriesControl) -> Result<f64> {
    wronskian_at_zero_energy_with(p, z_match, SBranch::default(), ctl)
}

/// Number of bound states found by the Wronskian eigensolver.
pub fn count_bound_states(p: &WellParameters, opts: &SolveOptions) -> Result<usize> {
    Ok(find_eigenvalues(p, opts)?.len())
}

/// A traced zero-energy curve in the `(w2, w3)` plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCurve {
    pub points: Vec<(f64, f64)>,
    /// Which level emerges on crossing: 1 for the first bound state.
    pub emerging_level: usize,
    /// Bounds the region without bound states.
    pub critical: bool,
}

/// A located sign change of the `E = 0` Wronskian on one grid edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeCrossing {
    pub w2: f64,
    pub w3: f64,
    /// Grid nodes at either end of the edge, as `(i2, i3)`.
    pub from: (usize, usize),
    pub to: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeFailure {
    pub i2: usize,
    pub i3: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMap {
    pub w1: f64,
    pub w2_axis: Vec<f64>,
    pub w3_axis: Vec<f64>,
    /// `counts[i2][i3]`; `None` where the node failed.
    pub counts: Vec<Vec<Option<usize>>>,
    /// `E = 0` Wronskian at each node, same layout as `counts`.
    pub zero_energy_wronskian: Vec<Vec<Option<f64>>>,
    pub crossings: Vec<EdgeCrossing>,
    pub critical_curves: Vec<CriticalCurve>,
    pub failures: Vec<NodeFailure>,
}

impl ThresholdMap {
    pub fn count(&self, i2: usize, i3: usize) -> Option<usize> {
        self.counts[i2][i3]
    }

    /// Grid node closest to `(w2, w3)`.
    pub fn nearest_node(&self, w2: f64, w3: f64) -> (usize, usize) {
        let nearest = |axis: &[f64], v: f64| {
            (0..axis.len())
                .min_by(|&a, &b| (axis[a] - v).abs().total_cmp(&(axis[b] - v).abs()))
                .unwrap_or(0)
        };
        (nearest(&self.w2_axis, w2), nearest(&self.w3_axis, w3))
    }
}

/// Axis over `[lo, hi]` built outward from the midpoint, so a range
/// symmetric about zero gives exactly mirrored nodes.
pub fn axis(range: (f64, f64), resolution: usize) -> Vec<f64> {
    let (lo, hi) = range;
    if resolution < 2 {
        return vec![0.5 * (lo + hi)];
    }
    let mid = 0.5 * (lo + hi);
    let h = (hi - lo) / (resolution - 1) as f64;
    let centre = 0.5 * (resolution - 1) as f64;
    (0..resolution).map(|i| mid + (i as f64 - centre) * h).collect()
}

/// Fills the count map and traces the `E = 0` curves.
pub fn threshold_scan(
    w1: f64,
    w2_range: (f64, f64),
    w3_range: (f64, f64),
    resolution: usize,
    opts: &SolveOptions,
) -> Result<ThresholdMap> {
    opts.validate()?;
    if resolution < 2 {
        return Err(crate::error::Error::Config(format!(
            "threshold resolution must be >= 2, got {resolution}"
        )));
    }
    WellParameters::new(w1, 0.0, 0.0)?;
    let w2_axis = axis(w2_range, resolution);
    let w3_axis = axis(w3_range, resolution);
    let n = resolution;

    let zero_w = |w2: f64, w3: f64| -> Result<f64> {
        let p = WellParameters::new(w1, w2, w3)?;
        wronskian_at_zero_energy_with(&p, opts.z_match, opts.s_branch, &opts.series)
    };

    let nodes: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let evaluated: Vec<(std::result::Result<usize, String>, Option<f64>)> = nodes
        .par_iter()
        .map(|&(i, j)| {
            let (w2, w3) = (w2_axis[i], w3_axis[j]);
            let count = WellParameters::new(w1, w2, w3)
                .and_then(|p| count_bound_states(&p, opts))
                .map_err(|e| e.to_string());
            (count, zero_w(w2, w3).ok())
        })
        .collect();

    let mut counts = vec![vec![None; n]; n];
    let mut wz = vec![vec![None; n]; n];
    let mut failures = Vec::new();
    for (&(i, j), (count, w)) in nodes.iter().zip(evaluated) {
        match count {
            Ok(c) => counts[i][j] = Some(c),
            Err(message) => failures.push(NodeFailure {
                i2: i,
                i3: j,
                message,
            }),
        }
        wz[i][j] = w;
    }

    // Sign changes on grid edges, located by bisection along the edge.
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i + 1 < n {
                edges.push(((i, j), (i + 1, j)));
            }
            if j + 1 < n {
                edges.push(((i, j), (i, j + 1)));
            }
        }
    }
    let crossings: Vec<EdgeCrossing> = edges
        .par_iter()
        .filter_map(|&(a, b)| {
            let (wa, wb) = (wz[a.0][a.1]?, wz[b.0][b.1]?);
            if (wa >= 0.0) == (wb >= 0.0) {
                return None;
            }
            let (pa, pb) = ((w2_axis[a.0], w3_axis[a.1]), (w2_axis[b.0], w3_axis[b.1]));
            let along = |t: f64| zero_w(pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1));
            let t = bisect(along, 0.0, 1.0, wa, 1e-10).ok()?;
            Some(EdgeCrossing {
                w2: pa.0 + t * (pb.0 - pa.0),
                w3: pa.1 + t * (pb.1 - pa.1),
                from: a,
                to: b,
            })
        })
        .collect();

    let critical_curves = trace_curves(&crossings, &counts, &wz, w1, &w2_axis, &w3_axis, opts);
    Ok(ThresholdMap {
        w1,
        w2_axis,
        w3_axis,
        counts,
        zero_energy_wronskian: wz,
        crossings,
        critical_curves,
        failures,
    })
}

type Node = (usize, usize);

/// Joins edge crossings into polylines cell by cell (marching squares).
fn trace_curves(
    crossings: &[EdgeCrossing],
    counts: &[Vec<Option<usize>>],
    wz: &[Vec<Option<f64>>],
    w1: f64,
    w2_axis: &[f64],
    w3_axis: &[f64],
    opts: &SolveOptions,
) -> Vec<CriticalCurve> {
    let n2 = w2_axis.len();
    let n3 = w3_axis.len();
    let by_edge: HashMap<(Node, Node), usize> = crossings
        .iter()
        .enumerate()
        .map(|(k, c)| ((c.from, c.to), k))
        .collect();

    // Segments between crossing indices.
    let mut segments: Vec<(usize, usize)> = Vec::new();
    for i in 0..n2.saturating_sub(1) {
        for j in 0..n3.saturating_sub(1) {
            // Cell edges in cyclic order: bottom, right, top, left.
            let cell_edges = [
                ((i, j), (i + 1, j)),
                ((i + 1, j), (i + 1, j + 1)),
                ((i, j + 1), (i + 1, j + 1)),
                ((i, j), (i, j + 1)),
            ];
            let hits: Vec<usize> = cell_edges
                .iter()
                .filter_map(|e| by_edge.get(e).copied())
                .collect();
            match hits.len() {
                2 => segments.push((hits[0], hits[1])),
                4 => {
                    // Saddle: decide the pairing from the sign at the cell centre.
                    let centre = WellParameters::new(
                        w1,
                        0.5 * (w2_axis[i] + w2_axis[i + 1]),
                        0.5 * (w3_axis[j] + w3_axis[j + 1]),
                    )
                    .and_then(|p| {
                        wronskian_at_zero_energy_with(&p, opts.z_match, opts.s_branch, &opts.series)
                    })
                    .unwrap_or(0.0);
                    let corner = wz[i][j].unwrap_or(0.0);
                    if (centre >= 0.0) == (corner >= 0.0) {
                        // corner (i,j) joins the centre: cut the other two corners off
                        segments.push((hits[0], hits[1]));
                        segments.push((hits[2], hits[3]));
                    } else {
                        segments.push((hits[0], hits[3]));
                        segments.push((hits[1], hits[2]));
                    }
                }
                _ => {}
            }
        }
    }

    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); crossings.len()];
    for (s, &(a, b)) in segments.iter().enumerate() {
        adjacency[a].push(s);
        adjacency[b].push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut curves = Vec::new();

    // Start at open ends first so open polylines come out whole, then
    // sweep up closed loops.
    let starts: Vec<usize> = (0..crossings.len())
        .filter(|&k| adjacency[k].len() == 1)
        .chain(0..crossings.len())
        .collect();
    for start in starts {
        let Some(&first) = adjacency[start].iter().find(|&&s| !used[s]) else {
            continue;
        };
        let mut chain = vec![start];
        let mut current = start;
        let mut seg = Some(first);
        while let Some(s) = seg {
            used[s] = true;
            let (a, b) = segments[s];
            current = if a == current { b } else { a };
            chain.push(current);
            seg = adjacency[current].iter().copied().find(|&t| !used[t]);
        }
        curves.push(chain);
    }
    // Isolated crossings (curve clipped to a single edge at the boundary).
    for (k, adj) in adjacency.iter().enumerate() {
        if adj.is_empty() {
            curves.push(vec![k]);
        }
    }

    curves
        .into_iter()
        .map(|chain| {
            let mut tally: HashMap<usize, usize> = HashMap::new();
            for &k in &chain {
                let c = &crossings[k];
                if let (Some(a), Some(b)) = (counts[c.from.0][c.from.1], counts[c.to.0][c.to.1]) {
                    *tally.entry(a.min(b) + 1).or_default() += 1;
                }
            }
            let emerging_level = tally
                .into_iter()
                .max_by_key(|&(level, votes)| (votes, std::cmp::Reverse(level)))
                .map_or(0, |(level, _)| level);
            CriticalCurve {
                points: chain
                    .iter()
                    .map(|&k| (crossings[k].w2, crossings[k].w3))
                    .collect(),
                emerging_level,
                critical: emerging_level == 1,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_energy_wronskian_away_from_threshold() {
        let p = WellParameters::new(15.0, 12.0, 1.0).unwrap();
        let w = wronskian_at_zero_energy(&p, 0.2, &SeriesControl::default()).unwrap();
        assert!(w.abs() > 1e-3, "{w}");
    }

    #[test]
    fn zero_energy_wronskian_vanishes_on_poschl_teller_thresholds() {
        // sech² well: a level sits at E = 0 when -w2 = λ(λ+1), λ integer.
        let ctl = SeriesControl::default();
        for lambda in 1..4 {
            let w2 = -((lambda * (lambda + 1)) as f64);
            let p = WellParameters::new(0.0, w2, 0.0).unwrap();
            let at = wronskian_at_zero_energy(&p, 0.2, &ctl).unwrap();
            let off = wronskian_at_zero_energy(&WellParameters::new(0.0, w2 + 0.5, 0.0).unwrap(), 0.2, &ctl)
                .unwrap();
            assert!(at.abs() < 1e-12 && off.abs() > 1e-4, "λ={lambda}: {at} {off}");
        }
    }

    #[test]
    fn counts_for_reference_wells() {
        let opts = SolveOptions::default();
        let count =
            |w1, w2, w3| count_bound_states(&WellParameters::new(w1, w2, w3).unwrap(), &opts).unwrap();
        assert_eq!(count(15.0, 12.0, 1.0), 3);
        assert_eq!(count(0.0, 5.0, 0.0), 0);
        assert_eq!(count(0.0, -12.0, 0.0), 3);
    }

    #[test]
    fn symmetric_axis() {
        let a = axis((-30.0, 30.0), 7);
        for i in 0..7 {
            assert_eq!(a[i], -a[6 - i]);
        }
        assert_eq!(a[0], -30.0);
        assert_eq!(a[3], 0.0);
    }

    #[test]
    fn poschl_teller_line_scan() {
        // w1 = 0, w3 = 0: counts step up as w2 decreases through -λ(λ+1)
        let opts = SolveOptions {
            grid_points: 400,
            ..Default::default()
        };
        let map = threshold_scan(0.0, (-8.3, 0.7), (-0.5, 0.5), 10, &opts).unwrap();
        assert!(map.failures.is_empty());
        for (i, &w2) in map.w2_axis.iter().enumerate() {
            let expected = if w2 >= 0.0 {
                0
            } else if w2 > -2.0 {
                1
            } else if w2 > -6.0 {
                2
            } else {
                3
            };
            for j in 0..map.w3_axis.len() {
                assert_eq!(
                    map.count(i, j),
                    Some(expected),
                    "w2 = {w2}, w3 = {}",
                    map.w3_axis[j]
                );
            }
        }
        let critical: Vec<_> = map.critical_curves.iter().filter(|c| c.critical).collect();
        assert!(!critical.is_empty());
        for c in &critical {
            for &(w2, _) in &c.points {
                assert!(w2.abs() < 0.05, "{w2}");
            }
        }
    }
}
