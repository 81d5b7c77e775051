use num_complex::Complex64;

use super::{GainLossProfile, LatticeError, ProfileKind, UnitCellSpec};
use crate::CMatrix;

/// The `c x c` Bloch matrix of a ribbon at momentum `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochMatrix {
    pub k: f64,
    pub matrix: CMatrix,
}

/// Assembles `H(k)`: entry `(a, b)` is `V * sum(exp(i k d))` over bonds from
/// `a` to `b` with cell offset `d`, and the diagonal carries `i rho m(a)`.
///
/// The off-diagonal part is Hermitian by construction: the `(b, a)` entry of
/// every bond is the exact conjugate of its `(a, b)` entry.
pub fn bloch_matrix(
    cell: &UnitCellSpec,
    profile: &GainLossProfile,
    rho: f64,
    k: f64,
) -> Result<BlochMatrix, LatticeError> {
    if profile.kind() != ProfileKind::CellPeriodic {
        return Err(LatticeError::NoBlochForm);
    }
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(LatticeError::InvalidRho(rho));
    }
    if !k.is_finite() {
        return Err(LatticeError::InvalidMomentum(k));
    }
    profile.validate_for(cell)?;

    let n = cell.len();
    let v = cell.coupling();
    // Reduce to [-pi, pi) so that k and k + 2 pi share a phase factor.
    let k_red = (k + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    let phase = Complex64::new(k_red.cos(), k_red.sin()) * v;
    let mut m = CMatrix::zeros(n, n);
    for bond in cell.bonds() {
        let hop = if bond.offset == 0 {
            Complex64::new(v, 0.0)
        } else {
            phase
        };
        m[(bond.a, bond.b)] += hop;
        m[(bond.b, bond.a)] += hop.conj();
    }
    for (i, mult) in profile.cell_multipliers(cell).into_iter().enumerate() {
        m[(i, i)] += Complex64::new(0.0, rho * mult);
    }
    Ok(BlochMatrix { k, matrix: m })
}
