//! Large-coupling experiments.
//!
//! For `H = Δ + μQ` with μ large, every band sits near `μ a` for some
//! potential value `a` and the bands near `μ a` behave like
//! `μ a + c_r(θ) + O(1/μ)`, where the `c_r(θ)` are the eigenvalues of the
//! hopping matrix restricted to the level set of `a`. The sweep measures the
//! total spectrum along a μ-schedule, groups bands into per-level clusters,
//! fits the decay rate, and evaluates the separable lower bound for
//! hypercubic lattices.

use std::fmt;

use thiserror::Error;

use crate::floquet::{
    assemble_floquet, compute_bands, compute_restricted_bands, hermitian_eigenvalues,
    merge_intervals, spectrum_measure, BandOptions, FloquetError, Interval,
};
use crate::lattice::{hypercubic_edges, level_sets, LevelSet, PeriodicGraph, Potential, Theta};

/// Measures below this floor are treated as numerically zero and excluded
/// from log-log fitting.
pub const MEASURE_FLOOR: f64 = 1e-9;

/// A restricted-Laplacian branch is flagged flat when its sampled range is
/// at most this wide.
pub const FLAT_BRANCH_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("mu schedule must be ascending and positive")]
    BadSchedule,
    #[error("need at least 3 usable samples for a decay fit, have {usable}")]
    InsufficientData { usable: usize },
    #[error(
        "clusters may overlap at mu = {mu:.4e}: separation requires mu >= {threshold:.4e}"
    )]
    ClusterOverlap { mu: f64, threshold: f64 },
    #[error("graph is not a row-major hypercubic lattice model")]
    NotHypercubic,
    #[error(transparent)]
    Floquet(#[from] FloquetError),
}

/// Spectrum measures along a μ-schedule with per-level band clusters.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub mus: Vec<f64>,
    pub total_measures: Vec<f64>,
    /// representative value of each level set, ascending
    pub level_values: Vec<f64>,
    /// `cluster_lengths[i][k]` is the merged length of the bands assigned to
    /// `level_values[k]` at `mus[i]`
    pub cluster_lengths: Vec<Vec<f64>>,
    /// μ values below the Gershgorin separation warning threshold
    pub underseparated: Vec<bool>,
    pub grid: Vec<usize>,
}

impl SweepResult {
    /// Delimited export: one row per μ with the total measure and one column
    /// per level cluster; an optional decay-fit block is appended as comment
    /// lines.
    pub fn write_csv(&self, out: &mut impl std::io::Write, fit: Option<&DecayFit>) -> std::io::Result<()> {
        write!(out, "# mu,total_measure")?;
        for a in &self.level_values {
            write!(out, ",cluster_a={a:.4}")?;
        }
        writeln!(out)?;
        for (i, mu) in self.mus.iter().enumerate() {
            write!(out, "{:.11e},{:.11e}", mu, self.total_measures[i])?;
            for len in &self.cluster_lengths[i] {
                write!(out, ",{len:.11e}")?;
            }
            writeln!(out)?;
        }
        if let Some(fit) = fit {
            writeln!(out, "# decay fit over log-log samples above {MEASURE_FLOOR:.1e}")?;
            writeln!(out, "# slope = {:.11e}", fit.slope)?;
            writeln!(out, "# intercept = {:.11e}", fit.intercept)?;
            writeln!(out, "# residual = {:.11e}", fit.residual)?;
            writeln!(out, "# samples_used = {}", fit.samples_used)?;
        }
        Ok(())
    }
}

/// Least-squares line through `(log mu, log measure)`.
#[derive(Clone, Copy, Debug)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// root mean square residual of the fit
    pub residual: f64,
    pub samples_used: usize,
}

impl fmt::Display for DecayFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "log-log slope {:.4} (intercept {:.4}, rms residual {:.2e}, {} samples)",
            self.slope, self.intercept, self.residual, self.samples_used
        )
    }
}

/// Gershgorin-style warning threshold: discs of radius `max degree` around
/// `μ a` stay disjoint once `μ * min_gap > 2 * max_degree`.
pub fn separation_warning_threshold(g: &PeriodicGraph, q: &Potential) -> f64 {
    match q.min_gap() {
        Some(gap) => 2.0 * g.max_degree() as f64 / gap,
        None => 0.0,
    }
}

/// Stricter threshold used as a precondition for perturbation checks.
pub fn cluster_separation_threshold(g: &PeriodicGraph, q: &Potential) -> f64 {
    match q.min_gap() {
        Some(gap) => 3.0 * g.max_degree() as f64 / gap,
        None => 0.0,
    }
}

/// Assign each band to the nearest `μ a` by interval midpoint; ties go to
/// the smaller level value.
fn assign_bands(bands: &[Interval], level_values: &[f64], mu: f64) -> Vec<usize> {
    bands
        .iter()
        .map(|band| {
            let mid = 0.5 * (band.lo + band.hi);
            let mut best = 0usize;
            let mut best_dist = f64::INFINITY;
            for (k, a) in level_values.iter().enumerate() {
                let dist = (mid - mu * a).abs();
                if dist < best_dist {
                    best_dist = dist;
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Compute bands and spectrum measure at every μ of the schedule, clustering
/// bands to the nearest `μ a` over the level-set values.
pub fn coupling_sweep(
    g: &PeriodicGraph,
    q: &Potential,
    mus: &[f64],
    grid: &[usize],
) -> Result<SweepResult, SweepError> {
    if mus.is_empty() || mus.windows(2).any(|w| w[0] >= w[1]) || mus[0] <= 0.0 {
        return Err(SweepError::BadSchedule);
    }
    let levels = level_sets(g, q, 0.0);
    let level_values: Vec<f64> = levels.iter().map(|l| l.value).collect();
    let warn_at = separation_warning_threshold(g, q);

    let mut total_measures = Vec::with_capacity(mus.len());
    let mut cluster_lengths = Vec::with_capacity(mus.len());
    let mut underseparated = Vec::with_capacity(mus.len());
    for &mu in mus {
        let bs = compute_bands(g, q, mu, grid)?;
        let est = spectrum_measure(&bs);
        let assignment = assign_bands(&bs.bands, &level_values, mu);
        let mut lengths = vec![0.0; level_values.len()];
        for (k, _) in level_values.iter().enumerate() {
            let members: Vec<Interval> = bs
                .bands
                .iter()
                .zip(&assignment)
                .filter(|(_, &c)| c == k)
                .map(|(b, _)| *b)
                .collect();
            lengths[k] = merge_intervals(members, est.merge_epsilon)
                .iter()
                .map(Interval::length)
                .sum();
        }
        total_measures.push(est.measure);
        cluster_lengths.push(lengths);
        underseparated.push(mu < warn_at);
    }
    Ok(SweepResult {
        mus: mus.to_vec(),
        total_measures,
        level_values,
        cluster_lengths,
        underseparated,
        grid: grid.to_vec(),
    })
}

/// Fit the decay exponent on samples whose measure exceeds the numerical
/// floor.
pub fn fit_decay(sr: &SweepResult) -> Result<DecayFit, SweepError> {
    let points: Vec<(f64, f64)> = sr
        .mus
        .iter()
        .zip(&sr.total_measures)
        .filter(|(_, &m)| m > MEASURE_FLOOR)
        .map(|(&mu, &m)| (mu.ln(), m.ln()))
        .collect();
    if points.len() < 3 {
        return Err(SweepError::InsufficientData {
            usable: points.len(),
        });
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let residual = (points
        .iter()
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        slope,
        intercept,
        residual,
        samples_used: points.len(),
    })
}

/// First-order band coefficients over a level set: the eigenvalue branches
/// of the restricted hopping matrix sampled over the grid.
#[derive(Clone, Debug)]
pub struct FirstOrderCoefficients {
    pub level_value: f64,
    pub samples: Vec<(Theta, Vec<f64>)>,
    /// per-branch sampled range
    pub branch_ranges: Vec<Interval>,
    /// branch flagged flat when its range is at most [`FLAT_BRANCH_TOL`]
    pub flat: Vec<bool>,
}

impl FirstOrderCoefficients {
    pub fn all_flat(&self) -> bool {
        self.flat.iter().all(|&f| f)
    }
}

pub fn first_order_coefficients(
    g: &PeriodicGraph,
    q: &Potential,
    level: &LevelSet,
    grid: &[usize],
) -> Result<FirstOrderCoefficients, SweepError> {
    assert_eq!(q.len(), g.num_vertices());
    let frag = g.induced_subgraph(&level.vertices);
    let bs = compute_restricted_bands(&frag, grid, BandOptions { refine_iters: 0 })?;
    let flat = bs
        .bands
        .iter()
        .map(|iv| iv.length() <= FLAT_BRANCH_TOL)
        .collect();
    Ok(FirstOrderCoefficients {
        level_value: level.value,
        samples: bs.samples,
        branch_ranges: bs.bands,
        flat,
    })
}

/// Comparison of the exact eigenvalues near `μ a` against the first-order
/// prediction `μ a + c_r(θ)`.
#[derive(Clone, Copy, Debug)]
pub struct PerturbationReport {
    pub mu: f64,
    pub level_value: f64,
    /// max over grid points and branches of the deviation from first order;
    /// scales like 1/μ once clusters separate
    pub max_deviation: f64,
}

pub fn perturbation_check(
    g: &PeriodicGraph,
    q: &Potential,
    level: &LevelSet,
    mu: f64,
    grid: &[usize],
) -> Result<PerturbationReport, SweepError> {
    let threshold = cluster_separation_threshold(g, q);
    if mu < threshold {
        return Err(SweepError::ClusterOverlap { mu, threshold });
    }
    let level_values: Vec<f64> = level_sets(g, q, level.tolerance)
        .iter()
        .map(|l| l.value)
        .collect();
    let coeffs = first_order_coefficients(g, q, level, grid)?;
    let mut max_deviation = 0.0f64;
    for (theta, c) in &coeffs.samples {
        let evs = hermitian_eigenvalues(&assemble_floquet(g, q, mu, theta))?;
        // eigenvalues whose nearest level anchor is this one
        let selected: Vec<f64> = evs
            .iter()
            .copied()
            .filter(|&ev| {
                let mut best = 0usize;
                let mut best_dist = f64::INFINITY;
                for (k, a) in level_values.iter().enumerate() {
                    let dist = (ev - mu * a).abs();
                    if dist < best_dist {
                        best_dist = dist;
                        best = k;
                    }
                }
                (level_values[best] - level.value).abs() <= level.tolerance
            })
            .collect();
        if selected.len() != c.len() {
            return Err(SweepError::ClusterOverlap { mu, threshold });
        }
        for (ev, c_r) in selected.iter().zip(c) {
            max_deviation = max_deviation.max((ev - (mu * level.value + c_r)).abs());
        }
    }
    Ok(PerturbationReport {
        mu,
        level_value: level.value,
        max_deviation,
    })
}

/// Separable lower bound `4 m r` for hypercubic lattices: `m` axes along
/// which the potential is constant and `r` distinct potential values. Zero
/// when no axis is free (the bound is vacuous).
#[derive(Clone, Debug)]
pub struct SeparableBound {
    pub dims: Vec<usize>,
    pub free_axes: usize,
    pub distinct_values: usize,
    pub value: f64,
}

/// Recover the row-major cell dimensions of a hypercubic lattice model, if
/// the graph is one. Tries every factorization of the vertex count into
/// admissible axis lengths (each at least 3) and compares edge sets.
pub fn detect_hypercubic_dims(g: &PeriodicGraph) -> Option<Vec<usize>> {
    let d = g.dim();
    let total = g.num_vertices();
    let mut dims = vec![0usize; d];
    fn search(
        g: &PeriodicGraph,
        dims: &mut Vec<usize>,
        axis: usize,
        remaining: usize,
    ) -> Option<Vec<usize>> {
        let d = dims.len();
        if axis == d {
            if remaining != 1 {
                return None;
            }
            let candidate = PeriodicGraph::new(
                d,
                dims.iter().product::<usize>() as u32,
                hypercubic_edges(dims),
            )
            .ok()?;
            if &candidate == g {
                return Some(dims.clone());
            }
            return None;
        }
        for n in 3..=remaining {
            if remaining % n != 0 {
                continue;
            }
            dims[axis] = n;
            if let Some(found) = search(g, dims, axis + 1, remaining / n) {
                return Some(found);
            }
        }
        None
    }
    search(g, &mut dims, 0, total)
}

pub fn separable_lower_bound(
    g: &PeriodicGraph,
    q: &Potential,
) -> Result<SeparableBound, SweepError> {
    assert_eq!(q.len(), g.num_vertices());
    let dims = detect_hypercubic_dims(g).ok_or(SweepError::NotHypercubic)?;
    let d = dims.len();
    let strides: Vec<usize> = (0..d)
        .map(|axis| dims[axis + 1..].iter().product())
        .collect();
    let index = |point: &[usize]| -> usize {
        point
            .iter()
            .zip(&strides)
            .map(|(x, s)| x * s)
            .sum()
    };
    let mut free_axes = 0usize;
    for axis in 0..d {
        let mut free = true;
        let mut point = vec![0usize; d];
        'scan: loop {
            let mut shifted = point.clone();
            shifted[axis] = (shifted[axis] + 1) % dims[axis];
            if q.values()[index(&point)] != q.values()[index(&shifted)] {
                free = false;
                break 'scan;
            }
            let mut a = d;
            loop {
                if a == 0 {
                    break 'scan;
                }
                a -= 1;
                point[a] += 1;
                if point[a] < dims[a] {
                    break;
                }
                point[a] = 0;
            }
        }
        if free {
            free_axes += 1;
        }
    }
    let distinct_values = q.distinct_values().len();
    let value = if free_axes == 0 {
        0.0
    } else {
        4.0 * free_axes as f64 * distinct_values as f64
    };
    Ok(SeparableBound {
        dims,
        free_axes,
        distinct_values,
        value,
    })
}
