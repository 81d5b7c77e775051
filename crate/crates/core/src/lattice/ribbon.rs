use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::{GainLossProfile, LatticeError, ProfileKind, UnitCellSpec};
use crate::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Open,
    Periodic,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        })
    }
}

impl FromStr for Boundary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(format!("unknown boundary `{other}` (expected open or periodic)")),
        }
    }
}

/// Row of a ribbon Hamiltonian: site `site` (cell order) of cell `cell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SiteRef {
    pub cell: usize,
    pub site: usize,
}

/// Dense Hamiltonian of a finite ribbon.
///
/// Off-diagonal entries are real couplings; the diagonal is `i rho m(site)`.
#[derive(Debug, Clone)]
pub struct RibbonHamiltonian {
    matrix: CMatrix,
    n_cells: usize,
    boundary: Boundary,
    sites: Vec<SiteRef>,
    index: HashMap<SiteRef, usize>,
    cell: UnitCellSpec,
    profile: GainLossProfile,
    rho: f64,
}

impl RibbonHamiltonian {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Number of rows.
    pub fn dim(&self) -> usize {
        self.sites.len()
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn cell(&self) -> &UnitCellSpec {
        &self.cell
    }

    pub fn profile(&self) -> &GainLossProfile {
        &self.profile
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn site(&self, row: usize) -> SiteRef {
        self.sites[row]
    }

    pub fn sites(&self) -> &[SiteRef] {
        &self.sites
    }

    /// Row of site `label` in cell `cell`, if the ribbon has it.
    pub fn index_of(&self, cell: usize, label: &str) -> Option<usize> {
        let site = self.cell.site_index(label)?;
        self.index.get(&SiteRef { cell, site }).copied()
    }

    pub fn label(&self, row: usize) -> &str {
        &self.cell.sites()[self.sites[row].site]
    }
}

/// Sites of the extra end column appended to longitudinally split ribbons.
///
/// These are the targets of inter-cell bonds, together with every site that
/// is not itself the source of an inter-cell bond and whose intra-cell
/// neighbours are all targets. For the stub cell this is `{A, C}`: the
/// backbone then reads `A B A B ... A` and is mirror symmetric.
pub fn termination_sites(cell: &UnitCellSpec) -> Vec<usize> {
    let targets: Vec<usize> = cell.inter_bonds().map(|b| b.b).collect();
    let sources: Vec<usize> = cell.inter_bonds().map(|b| b.a).collect();
    (0..cell.len())
        .filter(|s| {
            targets.contains(s)
                || (!sources.contains(s) && {
                    let nb = cell.intra_neighbours(*s);
                    !nb.is_empty() && nb.iter().all(|x| targets.contains(x))
                })
        })
        .collect()
}

/// Twice the longitudinal coordinate of a site in a split ribbon.
///
/// Termination sites sit on integer positions, the rest half a cell further.
pub(crate) fn doubled_position(cell: usize, on_column: bool) -> usize {
    2 * cell + usize::from(!on_column)
}

/// Builds the Hamiltonian of a ribbon with `n_cells` cells.
///
/// With a longitudinally split profile the ribbon is closed by one extra
/// column of [`termination_sites`], so that the mirror `x -> n_cells - x`
/// maps the ribbon onto itself. Sites left of the mirror get `+1`, sites on
/// it `0`, sites right of it `-1`.
pub fn build_ribbon(
    cell: &UnitCellSpec,
    profile: &GainLossProfile,
    rho: f64,
    n_cells: usize,
    boundary: Boundary,
) -> Result<RibbonHamiltonian, LatticeError> {
    if n_cells < 2 {
        return Err(LatticeError::TooFewCells(n_cells));
    }
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(LatticeError::InvalidRho(rho));
    }
    profile.validate_for(cell)?;
    let split = profile.kind() == ProfileKind::LongitudinalSplit;
    if split && boundary == Boundary::Periodic {
        return Err(LatticeError::PeriodicSplit);
    }

    let c = cell.len();
    let mut sites: Vec<SiteRef> = (0..n_cells)
        .flat_map(|cell| (0..c).map(move |site| SiteRef { cell, site }))
        .collect();
    let column = if split { termination_sites(cell) } else { Vec::new() };
    sites.extend(column.iter().map(|&site| SiteRef {
        cell: n_cells,
        site,
    }));
    let index: HashMap<SiteRef, usize> = sites.iter().enumerate().map(|(i, s)| (*s, i)).collect();

    let n = sites.len();
    let v = Complex64::new(cell.coupling(), 0.0);
    let mut m = CMatrix::zeros(n, n);
    for (row, s) in sites.iter().enumerate() {
        for bond in cell.bonds().iter().filter(|b| b.a == s.site) {
            let to_cell = s.cell + usize::from(bond.offset);
            let to_cell = match boundary {
                Boundary::Periodic => to_cell % n_cells,
                Boundary::Open => to_cell,
            };
            if let Some(&col) = index.get(&SiteRef {
                cell: to_cell,
                site: bond.b,
            }) {
                m[(row, col)] += v;
                m[(col, row)] += v;
            }
        }
    }

    if split {
        for (row, s) in sites.iter().enumerate() {
            let x2 = doubled_position(s.cell, column.contains(&s.site));
            let sign = match x2.cmp(&n_cells) {
                std::cmp::Ordering::Less => 1.0,
                std::cmp::Ordering::Equal => 0.0,
                std::cmp::Ordering::Greater => -1.0,
            };
            m[(row, row)] = Complex64::new(0.0, rho * sign);
        }
    } else {
        let mult = profile.cell_multipliers(cell);
        for (row, s) in sites.iter().enumerate() {
            m[(row, row)] = Complex64::new(0.0, rho * mult[s.site]);
        }
    }

    Ok(RibbonHamiltonian {
        matrix: m,
        n_cells,
        boundary,
        sites,
        index,
        cell: cell.clone(),
        profile: profile.clone(),
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_gain_loss_profile, build_unit_cell, LatticeKind};

    fn ribbon(kind: LatticeKind, rho: f64, n: usize, b: Boundary) -> RibbonHamiltonian {
        build_ribbon(&build_unit_cell(kind), &build_gain_loss_profile(kind), rho, n, b).unwrap()
    }

    #[test]
    fn stub_termination_column() {
        let cell = build_unit_cell(LatticeKind::Stub);
        assert_eq!(termination_sites(&cell), vec![0, 2]);
        let h = ribbon(LatticeKind::Stub, 0.5, 6, Boundary::Open);
        assert_eq!(h.dim(), 3 * 6 + 2);
        // centre column A_3, C_3 is neutral; B_2 gains, B_3 loses
        let diag = |cell, label| h.matrix()[(h.index_of(cell, label).unwrap(), h.index_of(cell, label).unwrap())].im;
        assert_eq!(diag(3, "A"), 0.0);
        assert_eq!(diag(3, "C"), 0.0);
        assert_eq!(diag(2, "B"), 0.5);
        assert_eq!(diag(3, "B"), -0.5);
        assert_eq!(diag(0, "A"), 0.5);
        assert_eq!(diag(6, "C"), -0.5);
        // A_6 is bonded to B_5 and C_6
        let a6 = h.index_of(6, "A").unwrap();
        let nnz = (0..h.dim()).filter(|&j| j != a6 && h.matrix()[(a6, j)].re != 0.0).count();
        assert_eq!(nnz, 2);
    }

    #[test]
    fn odd_cell_count_puts_centre_on_b() {
        let h = ribbon(LatticeKind::Stub, 1.0, 5, Boundary::Open);
        let b2 = h.index_of(2, "B").unwrap();
        assert_eq!(h.matrix()[(b2, b2)].im, 0.0);
        let tr: Complex64 = h.matrix().diagonal().iter().sum();
        assert_eq!(tr, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn traceless_and_real_couplings() {
        for kind in LatticeKind::ALL {
            for b in [Boundary::Open, Boundary::Periodic] {
                if kind == LatticeKind::Stub && b == Boundary::Periodic {
                    continue;
                }
                let h = ribbon(kind, 0.7, 8, b);
                let m = h.matrix();
                let tr: Complex64 = m.diagonal().iter().sum();
                assert!(tr.norm() < 1e-12);
                for i in 0..h.dim() {
                    assert_eq!(m[(i, i)].re, 0.0);
                    for j in 0..h.dim() {
                        if i != j {
                            assert_eq!(m[(i, j)].im, 0.0);
                            assert_eq!(m[(i, j)], m[(j, i)]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn periodic_wraps_inter_bonds() {
        let open = ribbon(LatticeKind::Lieb, 0.0, 4, Boundary::Open);
        let per = ribbon(LatticeKind::Lieb, 0.0, 4, Boundary::Periodic);
        let (p3, b0) = (per.index_of(3, "p").unwrap(), per.index_of(0, "b").unwrap());
        assert_eq!(per.matrix()[(p3, b0)].re, 1.0);
        assert_eq!(open.matrix()[(p3, b0)].re, 0.0);
        let bonds = |h: &RibbonHamiltonian| h.matrix().iter().filter(|z| z.re != 0.0).count() / 2;
        assert_eq!(bonds(&open), 4 * 4 + 2 * 3);
        assert_eq!(bonds(&per), 4 * 4 + 2 * 4);
    }

    #[test]
    fn rejects_bad_arguments() {
        let cell = build_unit_cell(LatticeKind::Stub);
        let split = GainLossProfile::longitudinal_split();
        assert_eq!(
            build_ribbon(&cell, &split, 1.0, 10, Boundary::Periodic).unwrap_err(),
            LatticeError::PeriodicSplit
        );
        assert_eq!(
            build_ribbon(&cell, &split, 1.0, 1, Boundary::Open).unwrap_err(),
            LatticeError::TooFewCells(1)
        );
        assert_eq!(
            build_ribbon(&cell, &split, -1.0, 4, Boundary::Open).unwrap_err(),
            LatticeError::InvalidRho(-1.0)
        );
    }
}
