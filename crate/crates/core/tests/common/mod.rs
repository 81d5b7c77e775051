//! Oracles shared by the integration tests. Nothing here calls the library's
//! own Bloch assembly, band formulas or matching code.
#![allow(dead_code)]

use ptflat_core::{CMatrix, Complex64, LatticeKind};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Bond lists of the built-in cells, written out independently of the
/// library: (sites, intra bonds, inter bonds a -> b').
pub fn cell_table(kind: LatticeKind) -> (usize, Vec<(usize, usize)>, Vec<(usize, usize)>) {
    match kind {
        // b p t q r
        LatticeKind::Lieb => (5, vec![(0, 1), (2, 3), (0, 4), (2, 4)], vec![(1, 0), (3, 2)]),
        // 1 2 3 4 5
        LatticeKind::Kagome => (
            5,
            vec![(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)],
            vec![(1, 0), (4, 3)],
        ),
        // A B C
        LatticeKind::Stub => (3, vec![(0, 1), (0, 2)], vec![(1, 0)]),
    }
}

/// Bloch matrix assembled straight from the bond table.
pub fn oracle_bloch(kind: LatticeKind, diag: &[f64], rho: f64, k: f64) -> CMatrix {
    let (n, intra, inter) = cell_table(kind);
    let mut m = CMatrix::zeros(n, n);
    for (a, b) in intra {
        m[(a, b)] += c(1.0, 0.0);
        m[(b, a)] += c(1.0, 0.0);
    }
    let ph = Complex64::from_polar(1.0, k);
    for (a, b) in inter {
        m[(a, b)] += ph;
        m[(b, a)] += ph.conj();
    }
    for (i, d) in diag.iter().enumerate() {
        m[(i, i)] += c(0.0, rho * d);
    }
    m
}

/// Closed-form Lieb bands with gain/loss (V = 1).
pub fn lieb_bands(rho: f64, k: f64) -> Vec<Complex64> {
    let e = 2.0 * (1.0 + k.cos());
    let inner = c(e - rho * rho, 0.0).sqrt();
    let outer = c(e + 2.0 - rho * rho, 0.0).sqrt();
    vec![c(0.0, 0.0), inner, -inner, outer, -outer]
}

/// Closed-form kagome bands at rho = 0 (V = 1).
pub fn kagome_bands(k: f64) -> Vec<Complex64> {
    let a = (2.0 * (1.0 + k.cos())).max(0.0).sqrt();
    let b = (3.0 + 2.0 * k.cos()).sqrt();
    vec![c(-2.0, 0.0), c(a, 0.0), c(-a, 0.0), c(1.0 + b, 0.0), c(1.0 - b, 0.0)]
}

/// Closed-form stub bands at rho = 0 (V = 1).
pub fn stub_bands(k: f64) -> Vec<Complex64> {
    let b = (3.0 + 2.0 * k.cos()).sqrt();
    vec![c(0.0, 0.0), c(b, 0.0), c(-b, 0.0)]
}

/// Exact bottleneck matching distance for small multisets (all permutations).
pub fn small_match(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    assert!(a.len() <= 8, "exhaustive matching is for small sets");
    fn rec(a: &[Complex64], b: &[Complex64], used: &mut Vec<bool>, i: usize, cur: f64, best: &mut f64) {
        if cur >= *best {
            return;
        }
        if i == a.len() {
            *best = cur;
            return;
        }
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                rec(a, b, used, i + 1, cur.max((a[i] - b[j]).norm()), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
    best
}

/// Matches each value of `a` to the nearest unused value of `b` within
/// `tol`; returns the number of values left unmatched.
pub fn unmatched_within(a: &[Complex64], b: &[Complex64], tol: f64) -> usize {
    let mut used = vec![false; b.len()];
    let mut missing = 0;
    for x in a {
        let mut best: Option<(usize, f64)> = None;
        for (j, y) in b.iter().enumerate() {
            let d = (x - y).norm();
            if !used[j] && d <= tol && best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, _)) => used[j] = true,
            None => missing += 1,
        }
    }
    missing + b.len().saturating_sub(a.len())
}

/// The uniform grid `-pi + 2 pi m / count` used by the band routines.
pub fn grid(count: usize) -> Vec<f64> {
    (0..count)
        .map(|m| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * m as f64 / count as f64)
        .collect()
}

/// `m * v` with a plain triple loop.
pub fn matvec(m: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
