use num_complex::Complex64;

use super::ribbon::doubled_position;
use super::{termination_sites, Boundary, LatticeError, ProfileKind, RibbonHamiltonian, SiteRef};

/// An entry where `P H P^-1` differs from `conj(H)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PtViolation {
    pub row: usize,
    pub col: usize,
    /// `conj(H[row, col])`
    pub expected: Complex64,
    /// `H[P row, P col]`
    pub found: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PtReport {
    pub symmetric: bool,
    /// Parity permutation of the ribbon rows.
    pub permutation: Vec<usize>,
    pub violations: Vec<PtViolation>,
}

/// Checks `P H P^-1 == conj(H)` entry by entry, with exact comparisons.
///
/// The parity `P` comes from the profile: the transverse involution applied
/// in every cell for cell-periodic profiles, the longitudinal mirror for
/// split profiles. A split ribbon whose mirror image does not reproduce its
/// bond graph has no parity permutation at all and is reported as an error.
pub fn check_pt_symmetry(h: &RibbonHamiltonian) -> Result<PtReport, LatticeError> {
    let permutation = parity_permutation(h)?;
    let m = h.matrix();
    let n = h.dim();
    let mut violations = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let expected = m[(i, j)].conj();
            let found = m[(permutation[i], permutation[j])];
            if expected != found {
                violations.push(PtViolation {
                    row: i,
                    col: j,
                    expected,
                    found,
                });
            }
        }
    }
    Ok(PtReport {
        symmetric: violations.is_empty(),
        permutation,
        violations,
    })
}

fn parity_permutation(h: &RibbonHamiltonian) -> Result<Vec<usize>, LatticeError> {
    let cell = h.cell();
    match h.profile().kind() {
        ProfileKind::CellPeriodic => {
            let p = h.profile().cell_parity(cell);
            Ok(h.sites()
                .iter()
                .map(|s| {
                    h.index_of(s.cell, &cell.sites()[p[s.site]])
                        .expect("every cell holds every site")
                })
                .collect())
        }
        ProfileKind::LongitudinalSplit => {
            if h.boundary() == Boundary::Periodic {
                return Err(LatticeError::PeriodicSplit);
            }
            let column = termination_sites(cell);
            let n = h.n_cells();
            let mut perm = Vec::with_capacity(h.dim());
            for s in h.sites() {
                let on_column = column.contains(&s.site);
                let x2 = doubled_position(s.cell, on_column);
                let mirrored = SiteRef {
                    cell: (2 * n - x2) / 2,
                    site: s.site,
                };
                let j = h
                    .index_of(mirrored.cell, &cell.sites()[s.site])
                    .ok_or_else(|| {
                        LatticeError::ParityObstruction(format!(
                            "site {}{} has no mirror image",
                            cell.sites()[s.site],
                            s.cell
                        ))
                    })?;
                perm.push(j);
            }
            let m = h.matrix();
            for i in 0..h.dim() {
                for j in 0..h.dim() {
                    if i != j && m[(i, j)] != m[(perm[i], perm[j])] {
                        let (a, b) = (h.site(i), h.site(j));
                        return Err(LatticeError::ParityObstruction(format!(
                            "asymmetric termination: the mirror image of the bond {}{}-{}{} is not a bond",
                            cell.sites()[a.site],
                            a.cell,
                            cell.sites()[b.site],
                            b.cell
                        )));
                    }
                }
            }
            Ok(perm)
        }
    }
}
