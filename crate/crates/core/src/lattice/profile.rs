use std::collections::BTreeMap;

use super::{LatticeError, LatticeKind, UnitCellSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    /// The same multipliers in every cell, odd under a transverse mirror.
    CellPeriodic,
    /// Gain on the left half of a finite ribbon, loss on the right half.
    LongitudinalSplit,
}

/// Placement of gain and loss on a ribbon, in units of the strength `rho`.
///
/// For [`ProfileKind::CellPeriodic`] the multipliers are odd under the parity
/// involution: `m(P(s)) = -m(s)`, and fixed points of `P` carry `0`. Sites
/// without an explicit multiplier carry `0`; sites missing from the parity map
/// are fixed points. A positive multiplier is gain.
#[derive(Debug, Clone, PartialEq)]
pub struct GainLossProfile {
    kind: ProfileKind,
    multipliers: BTreeMap<String, f64>,
    parity: BTreeMap<String, String>,
}

impl GainLossProfile {
    pub fn cell_periodic<S: AsRef<str>>(
        multipliers: &[(S, f64)],
        parity_pairs: &[(S, S)],
    ) -> Result<Self, LatticeError> {
        let profile = Self::cell_periodic_unchecked(multipliers, parity_pairs)?;
        profile.check_oddness()?;
        Ok(profile)
    }

    /// Like [`GainLossProfile::cell_periodic`] but without the oddness check.
    ///
    /// The parity must still be an involution. Used to build deliberately
    /// non-PT-symmetric ribbons.
    pub fn cell_periodic_unchecked<S: AsRef<str>>(
        multipliers: &[(S, f64)],
        parity_pairs: &[(S, S)],
    ) -> Result<Self, LatticeError> {
        let mut m = BTreeMap::new();
        for (site, value) in multipliers {
            let site = site.as_ref().to_string();
            if !value.is_finite() {
                return Err(LatticeError::NonFiniteMultiplier { site });
            }
            if *value != 0.0 {
                m.insert(site, *value);
            }
        }
        let mut parity = BTreeMap::new();
        for (a, b) in parity_pairs {
            let (a, b) = (a.as_ref(), b.as_ref());
            if parity.contains_key(a) {
                return Err(LatticeError::ParityNotInvolution(a.to_string()));
            }
            parity.insert(a.to_string(), b.to_string());
            if a != b {
                if parity.contains_key(b) {
                    return Err(LatticeError::ParityNotInvolution(b.to_string()));
                }
                parity.insert(b.to_string(), a.to_string());
            }
        }
        Ok(GainLossProfile {
            kind: ProfileKind::CellPeriodic,
            multipliers: m,
            parity,
        })
    }

    pub fn longitudinal_split() -> Self {
        GainLossProfile {
            kind: ProfileKind::LongitudinalSplit,
            multipliers: BTreeMap::new(),
            parity: BTreeMap::new(),
        }
    }

    /// Cell-periodic profile with every multiplier zero and trivial parity.
    pub fn neutral() -> Self {
        GainLossProfile {
            kind: ProfileKind::CellPeriodic,
            multipliers: BTreeMap::new(),
            parity: BTreeMap::new(),
        }
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn multiplier(&self, site: &str) -> f64 {
        self.multipliers.get(site).copied().unwrap_or(0.0)
    }

    pub fn parity<'a>(&'a self, site: &'a str) -> &'a str {
        self.parity.get(site).map(String::as_str).unwrap_or(site)
    }

    /// Nonzero multipliers, keyed by site label.
    pub fn multipliers(&self) -> &BTreeMap<String, f64> {
        &self.multipliers
    }

    /// Parity pairs `(a, b)` with `a < b`; fixed points are omitted.
    pub fn parity_pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.parity
            .iter()
            .filter(|(a, b)| a < b)
            .map(|(a, b)| (a.as_str(), b.as_str()))
    }

    fn check_oddness(&self) -> Result<(), LatticeError> {
        for (site, &m) in &self.multipliers {
            let partner = self.parity(site);
            if partner == site {
                if m != 0.0 {
                    return Err(LatticeError::ParityFixedPoint {
                        site: site.clone(),
                        multiplier: m,
                    });
                }
            } else {
                let pm = self.multiplier(partner);
                if pm != -m {
                    return Err(LatticeError::ParityOddness {
                        site: site.clone(),
                        multiplier: m,
                        partner: partner.to_string(),
                        partner_multiplier: pm,
                    });
                }
            }
        }
        Ok(())
    }

    /// Checks that every label the profile mentions is a site of `cell`.
    pub fn validate_for(&self, cell: &UnitCellSpec) -> Result<(), LatticeError> {
        self.multipliers
            .keys()
            .chain(self.parity.keys())
            .chain(self.parity.values())
            .find(|s| cell.site_index(s).is_none())
            .map_or(Ok(()), |s| Err(LatticeError::ProfileSite(s.clone())))
    }

    /// Multipliers in cell order.
    pub(crate) fn cell_multipliers(&self, cell: &UnitCellSpec) -> Vec<f64> {
        cell.sites().iter().map(|s| self.multiplier(s)).collect()
    }

    /// Parity as a permutation of cell indices.
    pub(crate) fn cell_parity(&self, cell: &UnitCellSpec) -> Vec<usize> {
        cell.sites()
            .iter()
            .map(|s| {
                cell.site_index(self.parity(s))
                    .expect("profile validated against cell")
            })
            .collect()
    }
}

/// Gain/loss placements for the built-in ribbons.
///
/// * Lieb: `b:+1 p:-1 t:-1 q:+1 r:0` with parity `b<->t`, `p<->q`.
/// * Kagome: `1:+1 2:+1 4:-1 5:-1 3:0` with parity `1<->4`, `2<->5`.
/// * Stub: gain on the left half of the ribbon and loss on the right half.
pub fn build_gain_loss_profile(kind: LatticeKind) -> GainLossProfile {
    let built = match kind {
        LatticeKind::Lieb => GainLossProfile::cell_periodic(
            &[("b", 1.0), ("p", -1.0), ("t", -1.0), ("q", 1.0), ("r", 0.0)],
            &[("b", "t"), ("p", "q")],
        ),
        LatticeKind::Kagome => GainLossProfile::cell_periodic(
            &[("1", 1.0), ("2", 1.0), ("3", 0.0), ("4", -1.0), ("5", -1.0)],
            &[("1", "4"), ("2", "5")],
        ),
        LatticeKind::Stub => Ok(GainLossProfile::longitudinal_split()),
    };
    built.expect("built-in profiles are parity-odd")
}
