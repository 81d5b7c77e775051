//! Eigenvectors of an upper Hessenberg matrix by inverse iteration.

use num_complex::Complex64;

use super::reduce::{abs1, Dense};

const MAX_ITERATIONS: usize = 8;

/// LU factorization of `H - lambda I` for upper Hessenberg `H`, with
/// partial pivoting between neighbouring rows only. O(n^2).
struct HessenbergLu {
    n: usize,
    u: Vec<Complex64>,
    swapped: Vec<bool>,
    mult: Vec<Complex64>,
}

impl HessenbergLu {
    fn new(h: &Dense, lambda: Complex64, tiny: f64, u: Vec<Complex64>) -> Self {
        let n = h.n;
        let mut u = u;
        u.clear();
        u.extend_from_slice(&h.a);
        for i in 0..n {
            u[i * n + i] -= lambda;
        }
        let mut swapped = vec![false; n];
        let mut mult = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n.saturating_sub(1) {
            if abs1(u[(i + 1) * n + i]) > abs1(u[i * n + i]) {
                let (upper, lower) = u.split_at_mut((i + 1) * n);
                upper[i * n + i..(i + 1) * n].swap_with_slice(&mut lower[i..n]);
                swapped[i] = true;
            }
            if u[i * n + i] == Complex64::new(0.0, 0.0) {
                u[i * n + i] = Complex64::new(tiny, 0.0);
            }
            let m = u[(i + 1) * n + i] / u[i * n + i];
            mult[i] = m;
            if m != Complex64::new(0.0, 0.0) {
                let (upper, lower) = u.split_at_mut((i + 1) * n);
                let src = &upper[i * n + i + 1..(i + 1) * n];
                for (dst, s) in lower[i + 1..n].iter_mut().zip(src) {
                    *dst -= m * s;
                }
            }
            u[(i + 1) * n + i] = Complex64::new(0.0, 0.0);
        }
        if n > 0 && u[(n - 1) * n + n - 1] == Complex64::new(0.0, 0.0) {
            u[(n - 1) * n + n - 1] = Complex64::new(tiny, 0.0);
        }
        HessenbergLu {
            n,
            u,
            swapped,
            mult,
        }
    }

    fn solve(&self, b: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            let bi = b[i];
            b[i + 1] -= self.mult[i] * bi;
        }
        for i in (0..n).rev() {
            let row = &self.u[i * n..(i + 1) * n];
            let s: Complex64 = row[i + 1..].iter().zip(&b[i + 1..]).map(|(a, x)| a * x).sum();
            b[i] = (b[i] - s) / row[i];
        }
    }
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

/// `(H - lambda I) x` for upper Hessenberg `H`.
fn shifted_residual(h: &Dense, lambda: Complex64, x: &[Complex64]) -> f64 {
    let n = h.n;
    let mut acc = 0.0;
    for i in 0..n {
        let lo = i.saturating_sub(1);
        let row = h.row(i);
        let s: Complex64 = row[lo..].iter().zip(&x[lo..]).map(|(a, x)| a * x).sum();
        acc += (s - lambda * x[i]).norm_sqr();
    }
    acc.sqrt()
}

/// Deterministic start vector for eigenvalue number `j`.
fn start_vector(n: usize, j: usize) -> Vec<Complex64> {
    let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ (j as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    let mut next = || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    (0..n).map(|_| Complex64::new(next(), next())).collect()
}

/// Removes the components of `x` along the orthonormal vectors `basis`.
fn orthogonalize(x: &mut [Complex64], basis: &[&[Complex64]]) {
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for q in basis {
            let c: Complex64 = q.iter().zip(x.iter()).map(|(q, x)| q.conj() * x).sum();
            for (x, q) in x.iter_mut().zip(q.iter()) {
                *x -= c * q;
            }
        }
    }
}

/// Unit eigenvectors of `h` for the given eigenvalues, in the Hessenberg basis.
///
/// Eigenvalues within `cluster_tol` of an earlier one are treated as one
/// degenerate cluster: their vectors are kept orthogonal to the earlier
/// vectors of the cluster, so a semisimple eigenvalue of multiplicity `m`
/// receives `m` independent vectors.
pub(crate) fn hessenberg_eigenvectors(
    h: &Dense,
    values: &[Complex64],
    cluster_tol: f64,
) -> Vec<Vec<Complex64>> {
    let n = h.n;
    let hnorm = h.frobenius().max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * hnorm;
    let target = 64.0 * f64::EPSILON * hnorm;
    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(values.len());
    let mut scratch = Vec::with_capacity(n * n);
    for (j, &lambda) in values.iter().enumerate() {
        let cluster: Vec<&[Complex64]> = values[..j]
            .iter()
            .zip(&vectors)
            .filter(|(mu, _)| (**mu - lambda).norm() <= cluster_tol)
            .map(|(_, v)| v.as_slice())
            .collect();
        let lu = HessenbergLu::new(h, lambda, tiny, std::mem::take(&mut scratch));
        let mut x = start_vector(n, j);
        orthogonalize(&mut x, &cluster);
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for _ in 0..MAX_ITERATIONS {
            lu.solve(&mut x);
            orthogonalize(&mut x, &cluster);
            let nx = norm(&x);
            if !(nx.is_finite() && nx > 0.0) {
                x = start_vector(n, j + values.len());
                orthogonalize(&mut x, &cluster);
                continue;
            }
            x.iter_mut().for_each(|z| *z /= nx);
            let res = shifted_residual(h, lambda, &x);
            if best.as_ref().map_or(true, |(r, _)| res < *r) {
                best = Some((res, x.clone()));
            }
            if res <= target {
                break;
            }
        }
        scratch = lu.u;
        let v = best.map(|(_, v)| v).unwrap_or_else(|| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j.min(n - 1)] = Complex64::new(1.0, 0.0);
            e
        });
        vectors.push(v);
    }
    vectors
}
