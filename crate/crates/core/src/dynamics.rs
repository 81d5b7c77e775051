//! Coupled-mode propagation `dC/dz = i H C` with fixed-step RK4.
//!
//! A stationary mode `C(z) = C exp(i lambda z)` grows when `Im lambda < 0`;
//! the power `sum |C_n|^2` of a generic state therefore grows at the rate
//! `2 max(-Im lambda)` once the most unstable mode dominates.

use num_complex::Complex64;
use thiserror::Error;

use crate::lattice::{Boundary, LatticeKind, RibbonHamiltonian};
use crate::spectra::participation_ratio;
use crate::CMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("step dz must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("z_max must be finite and at least dz, got {0}")]
    InvalidRange(f64),
    #[error("initial state is zero")]
    ZeroState,
    #[error("state has {got} amplitudes, the ribbon has {expected} sites")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("compact localized states are not available for the {0} ribbon")]
    UnsupportedCls(LatticeKind),
    #[error("compact localized states need rho = 0, the ribbon has rho = {0}")]
    NonzeroRho(f64),
    #[error("cell {cell} is at the boundary of a {n_cells}-cell open ribbon")]
    CellAtBoundary { cell: usize, n_cells: usize },
    #[error("ribbon has no site `{label}` in cell {cell}")]
    MissingSite { label: String, cell: usize },
    #[error("site index {index} out of range for {dim} sites")]
    SiteOutOfRange { index: usize, dim: usize },
}

/// Field amplitudes at propagation distance `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
    pub z: f64,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        StateVector { amplitudes, z: 0.0 }
    }

    pub fn power(&self) -> f64 {
        power(&self.amplitudes)
    }

    /// Unit amplitude on a single site.
    pub fn single_site(dim: usize, index: usize) -> Result<Self, DynamicsError> {
        if index >= dim {
            return Err(DynamicsError::SiteOutOfRange { index, dim });
        }
        let mut a = vec![Complex64::new(0.0, 0.0); dim];
        a[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector::new(a))
    }

    /// Random amplitudes from [`SplitMix64`]: for each site in order, the real
    /// part then the imaginary part, each uniform on `[-1, 1)`.
    pub fn random(dim: usize, seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let a = (0..dim)
            .map(|_| {
                let re = 2.0 * rng.next_f64() - 1.0;
                let im = 2.0 * rng.next_f64() - 1.0;
                Complex64::new(re, im)
            })
            .collect();
        StateVector::new(a)
    }
}

/// SplitMix64 generator.
///
/// `state += 0x9E3779B97F4A7C15`, then the output is `state` mixed by
/// `z = (z ^ z>>30) * 0xBF58476D1CE4E5B9; z = (z ^ z>>27) * 0x94D049BB133111EB;
/// z ^ z>>31`. [`SplitMix64::next_f64`] keeps the top 53 bits: `(x >> 11) / 2^53`.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub z: f64,
    pub power: f64,
    pub pr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub final_state: StateVector,
    /// Full states at every sample, when requested.
    pub snapshots: Vec<StateVector>,
    /// Distance at which the power exceeded the blow-up threshold, if it did.
    pub blowup_at: Option<f64>,
}

impl Trajectory {
    pub fn blew_up(&self) -> bool {
        self.blowup_at.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions {
    /// Steps between samples.
    pub sample_stride: usize,
    pub keep_snapshots: bool,
    /// Stop once the power exceeds this multiple of the initial power.
    pub blowup_factor: f64,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions {
            sample_stride: 100,
            keep_snapshots: false,
            blowup_factor: 1e12,
        }
    }
}

/// Default step, in units of `1/V`.
pub const DEFAULT_DZ: f64 = 0.001;

fn power(a: &[Complex64]) -> f64 {
    a.iter().map(Complex64::norm_sqr).sum()
}

/// Nonzero entries of a matrix in compressed-row form.
struct SparseRows {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseRows {
    fn from_dense(m: &CMatrix) -> Self {
        let n = m.nrows();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for i in 0..n {
            for j in 0..n {
                let z = m[(i, j)];
                if z != Complex64::new(0.0, 0.0) {
                    cols.push(j);
                    vals.push(z);
                }
            }
            offsets.push(cols.len());
        }
        SparseRows { offsets, cols, vals }
    }

    /// `out = i * M * x`
    fn apply_i(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for p in self.offsets[i]..self.offsets[i + 1] {
                s += self.vals[p] * x[self.cols[p]];
            }
            *o = Complex64::new(-s.im, s.re);
        }
    }
}

/// Propagates `c0` under the ribbon Hamiltonian with default options.
pub fn propagate(
    h: &RibbonHamiltonian,
    c0: &StateVector,
    z_max: f64,
    dz: f64,
) -> Result<Trajectory, DynamicsError> {
    propagate_matrix(h.matrix(), c0, z_max, dz, &PropagateOptions::default())
}

/// Integrates `dC/dz = i m C` from `c0.z` over a distance `z_max` with
/// classical RK4 at fixed step `dz`. The last step is shortened if `z_max`
/// is not a multiple of `dz`.
pub fn propagate_matrix(
    m: &CMatrix,
    c0: &StateVector,
    z_max: f64,
    dz: f64,
    options: &PropagateOptions,
) -> Result<Trajectory, DynamicsError> {
    if !(dz.is_finite() && dz > 0.0) {
        return Err(DynamicsError::InvalidStep(dz));
    }
    if !(z_max.is_finite() && z_max >= dz) {
        return Err(DynamicsError::InvalidRange(z_max));
    }
    let n = m.nrows();
    if c0.amplitudes.len() != n {
        return Err(DynamicsError::DimensionMismatch {
            expected: n,
            got: c0.amplitudes.len(),
        });
    }
    let p0 = power(&c0.amplitudes);
    if p0 == 0.0 {
        return Err(DynamicsError::ZeroState);
    }

    let op = SparseRows::from_dense(m);
    let stride = options.sample_stride.max(1);
    let steps = ((z_max / dz) - 1e-9).ceil().max(1.0) as usize;
    let z0 = c0.z;

    let mut c = c0.amplitudes.clone();
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);

    let mut samples = Vec::new();
    let mut snapshots = Vec::new();
    let mut record = |z: f64, c: &[Complex64], samples: &mut Vec<Sample>| {
        samples.push(Sample {
            z,
            power: power(c),
            pr: participation_ratio(c).unwrap_or(f64::NAN),
        });
        if options.keep_snapshots {
            snapshots.push(StateVector {
                amplitudes: c.to_vec(),
                z,
            });
        }
    };
    record(z0, &c, &mut samples);

    let mut z = z0;
    let mut blowup_at = None;
    for step in 1..=steps {
        let h = if step == steps {
            z_max - dz * (steps - 1) as f64
        } else {
            dz
        };
        op.apply_i(&c, &mut k1);
        for i in 0..n {
            tmp[i] = c[i] + k1[i] * (0.5 * h);
        }
        op.apply_i(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = c[i] + k2[i] * (0.5 * h);
        }
        op.apply_i(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = c[i] + k3[i] * h;
        }
        op.apply_i(&tmp, &mut k4);
        for i in 0..n {
            c[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        z = z0 + if step == steps { z_max } else { dz * step as f64 };

        let p = power(&c);
        if !p.is_finite() || p > options.blowup_factor * p0 {
            blowup_at = Some(z);
            record(z, &c, &mut samples);
            break;
        }
        if step % stride == 0 || step == steps {
            record(z, &c, &mut samples);
        }
    }

    Ok(Trajectory {
        samples,
        final_state: StateVector { amplitudes: c, z },
        snapshots,
        blowup_at,
    })
}

/// Least-squares slope of `ln(power)` against `z` over the last
/// `tail_fraction` of the samples.
pub fn growth_rate(trajectory: &Trajectory, tail_fraction: f64) -> f64 {
    let s = &trajectory.samples;
    let skip = ((1.0 - tail_fraction.clamp(0.0, 1.0)) * s.len() as f64) as usize;
    let pts: Vec<(f64, f64)> = s[skip.min(s.len().saturating_sub(2))..]
        .iter()
        .map(|p| (p.z, p.power.ln()))
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(sxy, sxx), (x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    sxy / sxx
}

/// Compact localized flat-band state of a Hermitian ribbon.
///
/// * Lieb: `p_n = q_n = +1`, `r_n = r_{n+1} = -1`.
/// * Stub: `B_n = +1`, `C_n = C_{n+1} = -1`.
///
/// On open ribbons the support must avoid the first and last cells.
pub fn cls_state(
    kind: LatticeKind,
    cell_index: usize,
    ribbon: &RibbonHamiltonian,
) -> Result<StateVector, DynamicsError> {
    let support: &[(usize, &str, f64)] = match kind {
        LatticeKind::Lieb => &[(0, "p", 1.0), (0, "r", -1.0), (0, "q", 1.0), (1, "r", -1.0)],
        LatticeKind::Stub => &[(0, "B", 1.0), (0, "C", -1.0), (1, "C", -1.0)],
        LatticeKind::Kagome => return Err(DynamicsError::UnsupportedCls(kind)),
    };
    if ribbon.rho() != 0.0 {
        return Err(DynamicsError::NonzeroRho(ribbon.rho()));
    }
    let n_cells = ribbon.n_cells();
    let cells = |offset: usize| match ribbon.boundary() {
        Boundary::Periodic => (cell_index + offset) % n_cells,
        Boundary::Open => cell_index + offset,
    };
    let interior = match ribbon.boundary() {
        Boundary::Periodic => cell_index < n_cells,
        Boundary::Open => cell_index >= 1 && cell_index + 2 < n_cells,
    };
    if !interior {
        return Err(DynamicsError::CellAtBoundary {
            cell: cell_index,
            n_cells,
        });
    }
    let mut a = vec![Complex64::new(0.0, 0.0); ribbon.dim()];
    for &(offset, label, value) in support {
        let cell = cells(offset);
        let row = ribbon
            .index_of(cell, label)
            .ok_or_else(|| DynamicsError::MissingSite {
                label: label.to_string(),
                cell,
            })?;
        a[row] = Complex64::new(value, 0.0);
    }
    Ok(StateVector::new(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_gain_loss_profile, build_ribbon, build_unit_cell};

    fn ribbon(kind: LatticeKind, rho: f64, n: usize) -> RibbonHamiltonian {
        build_ribbon(&build_unit_cell(kind), &build_gain_loss_profile(kind), rho, n, Boundary::Open)
            .unwrap()
    }

    fn apply(m: &CMatrix, v: &[Complex64]) -> f64 {
        let x = nalgebra::DVector::from_column_slice(v);
        (m * x).norm()
    }

    #[test]
    fn splitmix_reference_sequence() {
        // first outputs for seed 0
        let mut g = SplitMix64::new(0);
        assert_eq!(g.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(g.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(g.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn cls_are_zero_modes() {
        let h = ribbon(LatticeKind::Lieb, 0.0, 8);
        let v = cls_state(LatticeKind::Lieb, 3, &h).unwrap();
        assert!(apply(h.matrix(), &v.amplitudes) <= 1e-12);
        assert_eq!(participation_ratio(&v.amplitudes).unwrap(), 4.0);

        let h = ribbon(LatticeKind::Stub, 0.0, 8);
        let v = cls_state(LatticeKind::Stub, 3, &h).unwrap();
        assert!(apply(h.matrix(), &v.amplitudes) <= 1e-12);
        assert_eq!(participation_ratio(&v.amplitudes).unwrap(), 3.0);
    }

    #[test]
    fn cls_errors() {
        let h = ribbon(LatticeKind::Lieb, 0.0, 6);
        assert!(matches!(cls_state(LatticeKind::Lieb, 0, &h), Err(DynamicsError::CellAtBoundary { .. })));
        assert!(matches!(cls_state(LatticeKind::Lieb, 4, &h), Err(DynamicsError::CellAtBoundary { .. })));
        assert!(cls_state(LatticeKind::Lieb, 3, &h).is_ok());
        assert_eq!(
            cls_state(LatticeKind::Kagome, 2, &ribbon(LatticeKind::Kagome, 0.0, 6)).unwrap_err(),
            DynamicsError::UnsupportedCls(LatticeKind::Kagome)
        );
        assert_eq!(
            cls_state(LatticeKind::Lieb, 2, &ribbon(LatticeKind::Lieb, 0.5, 6)).unwrap_err(),
            DynamicsError::NonzeroRho(0.5)
        );
        // labels come from the ribbon, so a stub CLS on a Lieb ribbon fails
        assert!(matches!(cls_state(LatticeKind::Stub, 2, &h), Err(DynamicsError::MissingSite { .. })));
    }

    #[test]
    fn argument_checks() {
        let h = ribbon(LatticeKind::Lieb, 0.0, 4);
        let c0 = StateVector::single_site(h.dim(), 0).unwrap();
        assert_eq!(propagate(&h, &c0, 1.0, 0.0).unwrap_err(), DynamicsError::InvalidStep(0.0));
        assert_eq!(propagate(&h, &c0, 0.001, 0.01).unwrap_err(), DynamicsError::InvalidRange(0.001));
        let zero = StateVector::new(vec![Complex64::new(0.0, 0.0); h.dim()]);
        assert_eq!(propagate(&h, &zero, 1.0, 0.01).unwrap_err(), DynamicsError::ZeroState);
        let short = StateVector::new(vec![Complex64::new(1.0, 0.0); 3]);
        assert!(matches!(propagate(&h, &short, 1.0, 0.01), Err(DynamicsError::DimensionMismatch { .. })));
        assert!(StateVector::single_site(3, 3).is_err());
    }

    #[test]
    fn sampling_layout() {
        let h = ribbon(LatticeKind::Stub, 0.0, 4);
        let c0 = StateVector::single_site(h.dim(), 2).unwrap();
        let opts = PropagateOptions {
            sample_stride: 10,
            keep_snapshots: true,
            ..Default::default()
        };
        let t = propagate_matrix(h.matrix(), &c0, 1.05, 0.01, &opts).unwrap();
        // z = 0, every 10 steps up to 1.0, then the final 1.05
        assert_eq!(t.samples.len(), 1 + 10 + 1);
        assert!(t.samples.windows(2).all(|w| w[1].z > w[0].z));
        assert!((t.final_state.z - 1.05).abs() < 1e-15);
        assert_eq!(t.snapshots.len(), t.samples.len());
    }

    #[test]
    fn dimer_blows_up() {
        let c = |re, im| Complex64::new(re, im);
        // broken PT dimer: lambda = +-i sqrt(3), power grows like exp(2 sqrt(3) z)
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 2.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, -2.0)]);
        let t = propagate_matrix(&m, &StateVector::single_site(2, 0).unwrap(), 100.0, 0.001, &Default::default())
            .unwrap();
        let z = t.blowup_at.expect("power must exceed the threshold");
        assert!(z < 10.0);
        assert!(t.samples.last().unwrap().power > 1e12);
    }
}
