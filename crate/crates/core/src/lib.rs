//! Quasi-one-dimensional flat-band lattices (Lieb, kagome and stub ribbons)
//! with balanced gain and loss.
//!
//! The crate builds unit cells and their gain/loss profiles, assembles Bloch
//! matrices and finite ribbon Hamiltonians, diagonalizes them with a dense
//! non-Hermitian eigensolver, and measures the stability and localization
//! observables used to characterize the ribbons: the fraction of modes with
//! a real propagation constant, the participation ratio of those modes and
//! the degeneracy of the flat band.
//!
//! Coupled-mode dynamics `dC/dz = i H C` are integrated in [`dynamics`], and
//! custom ribbons can be described in the line-oriented `.lat` format handled
//! by [`dsl`].

pub mod dsl;
pub mod dynamics;
pub mod eigen;
pub mod lattice;
pub mod spectra;

pub use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;

pub use dsl::{parse, serialize, LatticeDocument, ParseError};
pub use dynamics::{cls_state, propagate, PropagateOptions, StateVector, Trajectory};
pub use eigen::{eigenpairs, eigenvalues, EigenError, EigenSet};
pub use lattice::{
    bloch_matrix, build_gain_loss_profile, build_ribbon, build_unit_cell, check_pt_symmetry,
    BlochMatrix, Bond, Boundary, GainLossProfile, LatticeError, LatticeKind, PtReport,
    RibbonHamiltonian, UnitCellSpec,
};
pub use spectra::{
    analytic_bands, average_pr_stable, band_structure, flat_band_multiplicity,
    lieb_stable_fraction_oracle, multiset_distance, pair_multisets,
    participation_ratio, scan_rho, stable_fraction, BandSet,
    ScanOptions, ScanResult, ScanRow, SpectraError,
};
