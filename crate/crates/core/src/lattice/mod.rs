//! Unit cells, gain/loss profiles, Bloch matrices and finite ribbons.

mod bloch;
mod cell;
mod profile;
mod pt;
mod ribbon;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use bloch::{bloch_matrix, BlochMatrix};
pub use cell::{build_unit_cell, Bond, UnitCellSpec};
pub use profile::{build_gain_loss_profile, GainLossProfile, ProfileKind};
pub use pt::{check_pt_symmetry, PtReport, PtViolation};
pub use ribbon::{build_ribbon, termination_sites, Boundary, RibbonHamiltonian, SiteRef};

/// The three built-in ribbons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    Lieb,
    Kagome,
    Stub,
}

impl LatticeKind {
    pub const ALL: [LatticeKind; 3] = [LatticeKind::Lieb, LatticeKind::Kagome, LatticeKind::Stub];

    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Lieb => "lieb",
            LatticeKind::Kagome => "kagome",
            LatticeKind::Stub => "stub",
        }
    }

    /// Propagation constant of the flat band at zero gain/loss, in units of
    /// the coupling.
    pub fn flat_band_value(self) -> f64 {
        match self {
            LatticeKind::Lieb | LatticeKind::Stub => 0.0,
            LatticeKind::Kagome => -2.0,
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LatticeKind {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lieb" => Ok(LatticeKind::Lieb),
            "kagome" => Ok(LatticeKind::Kagome),
            "stub" => Ok(LatticeKind::Stub),
            other => Err(LatticeError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("unknown lattice kind `{0}` (expected lieb, kagome or stub)")]
    UnknownKind(String),
    #[error("unit cell has no sites")]
    EmptyCell,
    #[error("duplicate site `{0}`")]
    DuplicateSite(String),
    #[error("bond endpoint `{0}` is not a declared site")]
    UnknownSite(String),
    #[error("self-bond on site `{0}`")]
    SelfBond(String),
    #[error("duplicate bond {a}-{b} (offset {offset})")]
    DuplicateBond { a: String, b: String, offset: u8 },
    #[error("coupling must be positive and finite, got {0}")]
    InvalidCoupling(f64),
    #[error("the infinite ribbon graph is not connected")]
    Disconnected,
    #[error("multiplier of site `{site}` is not finite")]
    NonFiniteMultiplier { site: String },
    #[error("parity is not an involution: site `{0}` appears in more than one pair")]
    ParityNotInvolution(String),
    #[error("parity fixed point requires multiplier 0 (site `{site}` has {multiplier})")]
    ParityFixedPoint { site: String, multiplier: f64 },
    #[error(
        "parity-oddness violated: `{site}` has {multiplier} but its partner `{partner}` has {partner_multiplier}"
    )]
    ParityOddness {
        site: String,
        multiplier: f64,
        partner: String,
        partner_multiplier: f64,
    },
    #[error("profile refers to site `{0}` which the cell does not declare")]
    ProfileSite(String),
    #[error("a longitudinally split profile has no Bloch form")]
    NoBlochForm,
    #[error("a longitudinally split profile cannot be used with periodic boundaries")]
    PeriodicSplit,
    #[error("a ribbon needs at least 2 cells, got {0}")]
    TooFewCells(usize),
    #[error("gain/loss strength must be finite and non-negative, got {0}")]
    InvalidRho(f64),
    #[error("Bloch momentum must be finite, got {0}")]
    InvalidMomentum(f64),
    #[error("no parity permutation exists on this ribbon: {0}")]
    ParityObstruction(String),
}
