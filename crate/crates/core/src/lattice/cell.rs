use std::collections::{HashMap, HashSet, VecDeque};

use super::{LatticeError, LatticeKind};

/// A nearest-neighbour bond between two sites of the unit cell.
///
/// `offset == 0` joins two sites of the same cell. `offset == 1` joins site
/// `a` of cell `n` to site `b` of cell `n + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bond {
    pub offset: u8,
    pub a: usize,
    pub b: usize,
}

/// Geometry of a ribbon unit cell.
///
/// Bonds are stored in canonical form: intra-cell bonds have `a < b`, and the
/// bond list is sorted by `(offset, a, b)`. Two cells built from the same
/// bond sets therefore compare equal regardless of declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCellSpec {
    name: String,
    sites: Vec<String>,
    bonds: Vec<Bond>,
    coupling: f64,
}

impl UnitCellSpec {
    pub fn new<S: AsRef<str>>(
        name: impl Into<String>,
        sites: &[S],
        intra: &[(S, S)],
        inter: &[(S, S)],
        coupling: f64,
    ) -> Result<Self, LatticeError> {
        if sites.is_empty() {
            return Err(LatticeError::EmptyCell);
        }
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(LatticeError::InvalidCoupling(coupling));
        }
        let mut index = HashMap::new();
        let mut labels = Vec::with_capacity(sites.len());
        for s in sites {
            let s = s.as_ref();
            if index.insert(s.to_string(), labels.len()).is_some() {
                return Err(LatticeError::DuplicateSite(s.to_string()));
            }
            labels.push(s.to_string());
        }
        let lookup = |s: &S| {
            index
                .get(s.as_ref())
                .copied()
                .ok_or_else(|| LatticeError::UnknownSite(s.as_ref().to_string()))
        };

        let mut bonds = Vec::with_capacity(intra.len() + inter.len());
        for (a, b) in intra {
            let (ia, ib) = (lookup(a)?, lookup(b)?);
            if ia == ib {
                return Err(LatticeError::SelfBond(a.as_ref().to_string()));
            }
            bonds.push(Bond {
                offset: 0,
                a: ia.min(ib),
                b: ia.max(ib),
            });
        }
        for (a, b) in inter {
            bonds.push(Bond {
                offset: 1,
                a: lookup(a)?,
                b: lookup(b)?,
            });
        }
        bonds.sort();
        if let Some(w) = bonds.windows(2).find(|w| w[0] == w[1]) {
            return Err(LatticeError::DuplicateBond {
                a: labels[w[0].a].clone(),
                b: labels[w[0].b].clone(),
                offset: w[0].offset,
            });
        }

        let cell = UnitCellSpec {
            name: name.into(),
            sites: labels,
            bonds,
            coupling,
        };
        if !cell.ribbon_connected() {
            return Err(LatticeError::Disconnected);
        }
        Ok(cell)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sites(&self) -> &[String] {
        &self.sites
    }

    /// Number of sites in the cell.
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn site_index(&self, label: &str) -> Option<usize> {
        self.sites.iter().position(|s| s == label)
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn intra_bonds(&self) -> impl Iterator<Item = &Bond> {
        self.bonds.iter().filter(|b| b.offset == 0)
    }

    pub fn inter_bonds(&self) -> impl Iterator<Item = &Bond> {
        self.bonds.iter().filter(|b| b.offset == 1)
    }

    /// Connectivity of the infinite ribbon.
    ///
    /// The quotient graph on the cell sites must be connected, and the cell
    /// offsets accumulated around its cycles must generate all of Z; with a
    /// gcd `g > 1` the ribbon splits into `g` interleaved copies, and with no
    /// winding cycle at all it falls apart into isolated cells.
    fn ribbon_connected(&self) -> bool {
        let n = self.sites.len();
        let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
        for bond in &self.bonds {
            let d = i64::from(bond.offset);
            adj[bond.a].push((bond.b, d));
            adj[bond.b].push((bond.a, -d));
        }
        let mut shift: Vec<Option<i64>> = vec![None; n];
        shift[0] = Some(0);
        let mut queue = VecDeque::from([0usize]);
        let mut winding = 0i64;
        while let Some(u) = queue.pop_front() {
            let su = shift[u].unwrap_or_default();
            for &(v, d) in &adj[u] {
                match shift[v] {
                    None => {
                        shift[v] = Some(su + d);
                        queue.push_back(v);
                    }
                    Some(sv) => winding = gcd(winding, (su + d - sv).abs()),
                }
            }
        }
        shift.iter().all(Option::is_some) && winding == 1
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The canonical cells, all with coupling `V = 1`.
///
/// * Lieb: bottom chain `b-p-b'`, top chain `t-q-t'`, rung `b-r-t`.
/// * Kagome: a chain of bowties sharing the centre site `3`.
/// * Stub: backbone `A-B-A'` with a pendant `C` on every `A`.
pub fn build_unit_cell(kind: LatticeKind) -> UnitCellSpec {
    let (sites, intra, inter): (&[&str], &[(&str, &str)], &[(&str, &str)]) = match kind {
        LatticeKind::Lieb => (
            &["b", "p", "t", "q", "r"],
            &[("b", "p"), ("t", "q"), ("b", "r"), ("t", "r")],
            &[("p", "b"), ("q", "t")],
        ),
        LatticeKind::Kagome => (
            &["1", "2", "3", "4", "5"],
            &[("1", "2"), ("1", "3"), ("2", "3"), ("3", "4"), ("3", "5"), ("4", "5")],
            &[("2", "1"), ("5", "4")],
        ),
        LatticeKind::Stub => (&["A", "B", "C"], &[("A", "B"), ("A", "C")], &[("B", "A")]),
    };
    UnitCellSpec::new(kind.name(), sites, intra, inter, 1.0)
        .expect("built-in unit cells are valid")
}

impl UnitCellSpec {
    /// Labels adjacent to `site` through intra-cell bonds.
    pub(crate) fn intra_neighbours(&self, site: usize) -> HashSet<usize> {
        self.intra_bonds()
            .filter_map(|b| {
                if b.a == site {
                    Some(b.b)
                } else if b.b == site {
                    Some(b.a)
                } else {
                    None
                }
            })
            .collect()
    }
}
