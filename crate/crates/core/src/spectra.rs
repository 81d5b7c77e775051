//! Band structures, closed-form bands, and the stability and localization
//! observables of finite ribbons.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::eigen::{self, canonical_cmp, EigenError, EigenSet};
use crate::lattice::{
    bloch_matrix, build_ribbon, Boundary, GainLossProfile, LatticeError, LatticeKind,
    UnitCellSpec,
};

/// Default stability tolerance on `|Im lambda|`, in units of the coupling.
pub const DEFAULT_TOL_STABLE: f64 = 1e-8;
/// Default distance to the flat-band value, in units of the coupling.
pub const DEFAULT_TOL_FLAT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("no closed-form bands for {kind} with rho = {rho}")]
    UnsupportedAnalytic { kind: LatticeKind, rho: f64 },
    #[error("participation ratio of a zero vector")]
    ZeroVector,
    #[error("eigenvectors are required")]
    MissingVectors,
    #[error("need at least 2 k-points, got {0}")]
    TooFewKPoints(usize),
    #[error("invalid rho grid: {0}")]
    InvalidGrid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandSource {
    Bloch,
    Analytic,
}

/// Per-k eigenvalue multisets, each in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSet {
    pub k_grid: Vec<f64>,
    pub bands: Vec<Vec<Complex64>>,
    pub source: BandSource,
}

impl BandSet {
    /// Largest distance between two band sets on the same grid. At each k
    /// the two eigenvalue multisets are paired by [`multiset_distance`], so
    /// round-off that reorders nearly equal values does not count.
    pub fn max_deviation(&self, other: &BandSet) -> f64 {
        assert_eq!(self.k_grid.len(), other.k_grid.len(), "k grids differ");
        self.bands
            .iter()
            .zip(&other.bands)
            .map(|(a, b)| multiset_distance(a, b))
            .fold(0.0, f64::max)
    }
}

/// Pairs two equally sized eigenvalue multisets, closest values first.
/// Entry `i` of the result is the index in `b` matched to `a[i]`.
pub fn pair_multisets(a: &[Complex64], b: &[Complex64]) -> Option<Vec<usize>> {
    if a.len() != b.len() {
        return None;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut to_b = vec![usize::MAX; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut matched = 0;
    for (_, i, j) in pairs {
        if matched == a.len() {
            break;
        }
        if to_b[i] == usize::MAX && !used_b[j] {
            to_b[i] = j;
            used_b[j] = true;
            matched += 1;
        }
    }
    Some(to_b)
}

/// Largest distance over the pairing of [`pair_multisets`]; infinity on a
/// size mismatch.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    match pair_multisets(a, b) {
        Some(to_b) => to_b
            .iter()
            .enumerate()
            .map(|(i, &j)| (a[i] - b[j]).norm())
            .fold(0.0, f64::max),
        None => f64::INFINITY,
    }
}

/// Uniform grid `k_m = -pi + 2 pi m / count`, `m = 0..count`.
pub fn k_grid(count: usize) -> Vec<f64> {
    (0..count)
        .map(|m| -PI + 2.0 * PI * m as f64 / count as f64)
        .collect()
}

/// Closed-form bands of the built-in ribbons (coupling `V = 1`).
///
/// Only the Lieb ribbon has closed forms with gain and loss; negative
/// radicands give purely imaginary pairs.
pub fn analytic_bands(kind: LatticeKind, rho: f64, k: f64) -> Result<Vec<Complex64>, SpectraError> {
    if kind != LatticeKind::Lieb && rho != 0.0 {
        return Err(SpectraError::UnsupportedAnalytic { kind, rho });
    }
    let r = |x: f64| Complex64::new(x, 0.0);
    let cos = k.cos();
    let mut bands = match kind {
        LatticeKind::Lieb => {
            let inner = r(2.0 * (1.0 + cos) - rho * rho).sqrt();
            let outer = r(4.0 + 2.0 * cos - rho * rho).sqrt();
            vec![r(0.0), inner, -inner, outer, -outer]
        }
        LatticeKind::Kagome => {
            let a = (2.0 * (1.0 + cos)).max(0.0).sqrt();
            let b = (3.0 + 2.0 * cos).sqrt();
            vec![r(-2.0), r(a), r(-a), r(1.0 + b), r(1.0 - b)]
        }
        LatticeKind::Stub => {
            let b = (3.0 + 2.0 * cos).sqrt();
            vec![r(0.0), r(b), r(-b)]
        }
    };
    bands.sort_by(canonical_cmp);
    Ok(bands)
}

/// Closed-form bands on the grid of [`k_grid`].
pub fn analytic_band_set(kind: LatticeKind, rho: f64, k_count: usize) -> Result<BandSet, SpectraError> {
    if k_count < 2 {
        return Err(SpectraError::TooFewKPoints(k_count));
    }
    let grid = k_grid(k_count);
    let bands = grid
        .iter()
        .map(|&k| analytic_bands(kind, rho, k))
        .collect::<Result<_, _>>()?;
    Ok(BandSet {
        k_grid: grid,
        bands,
        source: BandSource::Analytic,
    })
}

/// Numerical Bloch bands on the grid of [`k_grid`].
pub fn band_structure(
    cell: &UnitCellSpec,
    profile: &GainLossProfile,
    rho: f64,
    k_count: usize,
) -> Result<BandSet, SpectraError> {
    if k_count < 2 {
        return Err(SpectraError::TooFewKPoints(k_count));
    }
    let grid = k_grid(k_count);
    let bands = grid
        .par_iter()
        .map(|&k| {
            let m = bloch_matrix(cell, profile, rho, k)?;
            Ok(eigen::eigenvalues(&m.matrix)?.values().to_vec())
        })
        .collect::<Result<Vec<_>, SpectraError>>()?;
    Ok(BandSet {
        k_grid: grid,
        bands,
        source: BandSource::Bloch,
    })
}

/// `(sum |c|^2)^2 / sum |c|^4`: 1 for a single site, `N` for a uniform state.
pub fn participation_ratio(v: &[Complex64]) -> Result<f64, SpectraError> {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(SpectraError::ZeroVector);
    }
    // rescale so that tiny or huge amplitudes do not under/overflow
    let (s2, s4) = v.iter().fold((0.0, 0.0), |(s2, s4), z| {
        let p = (z / scale).norm_sqr();
        (s2 + p, s4 + p * p)
    });
    Ok(s2 * s2 / s4)
}

fn is_stable(z: &Complex64, tol: f64) -> bool {
    z.im.abs() <= tol
}

/// Fraction of eigenvalues with `|Im lambda| <= tol`.
pub fn stable_fraction(es: &EigenSet, tol: f64) -> f64 {
    if es.is_empty() {
        return 0.0;
    }
    let stable = es.values().iter().filter(|z| is_stable(z, tol)).count();
    stable as f64 / es.len() as f64
}

/// Expected stable fraction of the Lieb ribbon in the limit of many cells
/// (`V = 1`): the share of `k` for which each dispersive band of the
/// closed-form spectrum is real, with the flat band always stable.
pub fn lieb_stable_fraction_oracle(rho: f64) -> f64 {
    let acos = |x: f64| x.clamp(-1.0, 1.0).acos() / PI;
    let r2 = rho * rho;
    let inner = if rho <= 2.0 { acos(r2 / 2.0 - 1.0) } else { 0.0 };
    let outer = if rho <= 2f64.sqrt() {
        1.0
    } else if rho <= 6f64.sqrt() {
        acos((r2 - 4.0) / 2.0)
    } else {
        0.0
    };
    (1.0 + 2.0 * inner + 2.0 * outer) / 5.0
}

/// Number of eigenvalues within `tol` of `value`.
pub fn flat_band_multiplicity(es: &EigenSet, value: Complex64, tol: f64) -> usize {
    es.values().iter().filter(|z| (*z - value).norm() <= tol).count()
}

/// Mean participation ratio over the stable eigenpairs; `None` when no
/// eigenvalue is stable.
pub fn average_pr_stable(es: &EigenSet, tol: f64) -> Result<Option<f64>, SpectraError> {
    let vectors = es.vectors().ok_or(SpectraError::MissingVectors)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (z, v) in es.values().iter().zip(vectors) {
        if is_stable(z, tol) {
            sum += participation_ratio(v)?;
            count += 1;
        }
    }
    Ok((count > 0).then(|| sum / count as f64))
}

/// Tolerances and flat-band target of a scan, in units of the coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub tol_stable: f64,
    pub tol_flat: f64,
    pub flat_value: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            tol_stable: DEFAULT_TOL_STABLE,
            tol_flat: DEFAULT_TOL_FLAT,
            flat_value: 0.0,
        }
    }
}

impl ScanOptions {
    pub fn for_kind(kind: LatticeKind) -> Self {
        ScanOptions {
            flat_value: kind.flat_band_value(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub rho: f64,
    pub stable_fraction: f64,
    pub avg_pr_stable: Option<f64>,
    pub flat_multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub lattice: String,
    pub n_cells: usize,
    pub boundary: Boundary,
    pub options: ScanOptions,
    pub rows: Vec<ScanRow>,
}

/// Checks that a rho grid is non-empty, finite, non-negative and strictly
/// increasing.
pub fn validate_rho_grid(grid: &[f64]) -> Result<(), SpectraError> {
    if grid.is_empty() {
        return Err(SpectraError::InvalidGrid("empty".into()));
    }
    if let Some(r) = grid.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(SpectraError::InvalidGrid(format!("value {r} is negative or not finite")));
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(SpectraError::InvalidGrid(format!(
            "not strictly increasing at {} -> {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Evaluates one scan row: ribbon, eigenpairs, then the three observables.
pub fn scan_row(
    cell: &UnitCellSpec,
    profile: &GainLossProfile,
    n_cells: usize,
    boundary: Boundary,
    rho: f64,
    options: &ScanOptions,
) -> Result<ScanRow, SpectraError> {
    let v = cell.coupling();
    let h = build_ribbon(cell, profile, rho, n_cells, boundary)?;
    let es = eigen::eigenpairs(h.matrix())?;
    let tol_stable = options.tol_stable * v;
    Ok(ScanRow {
        rho,
        stable_fraction: stable_fraction(&es, tol_stable),
        avg_pr_stable: average_pr_stable(&es, tol_stable)?,
        flat_multiplicity: flat_band_multiplicity(
            &es,
            Complex64::new(options.flat_value * v, 0.0),
            options.tol_flat * v,
        ),
    })
}

/// Sweeps the gain/loss strength over `rho_grid`. Rows are computed in
/// parallel and returned in grid order.
pub fn scan_rho(
    cell: &UnitCellSpec,
    profile: &GainLossProfile,
    n_cells: usize,
    boundary: Boundary,
    rho_grid: &[f64],
    options: &ScanOptions,
) -> Result<ScanResult, SpectraError> {
    validate_rho_grid(rho_grid)?;
    // fail fast on geometry errors before spawning work
    build_ribbon(cell, profile, 0.0, n_cells, boundary)?;
    let rows = rho_grid
        .par_iter()
        .map(|&rho| scan_row(cell, profile, n_cells, boundary, rho, options))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScanResult {
        lattice: cell.name().to_string(),
        n_cells,
        boundary,
        options: *options,
        rows,
    })
}
