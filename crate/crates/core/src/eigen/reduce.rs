//! Balancing and unitary reduction to upper Hessenberg form.

use num_complex::Complex64;

use crate::CMatrix;

/// Row-major square complex matrix used as the solver's working storage.
#[derive(Debug, Clone)]
pub(crate) struct Dense {
    pub n: usize,
    pub a: Vec<Complex64>,
}

impl Dense {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let n = m.nrows();
        let mut a = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                a.push(m[(i, j)]);
            }
        }
        Dense { n, a }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.a[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    pub fn frobenius(&self) -> f64 {
        self.a.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }
}

#[inline]
pub(crate) fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Diagonal similarity `D^-1 A D` with power-of-two entries that equalizes
/// row and column norms. Returns `D`.
pub(crate) fn balance(m: &mut Dense) -> Vec<f64> {
    const RADIX: f64 = 2.0;
    let n = m.n;
    let mut d = vec![1.0; n];
    let mut noconv = true;
    while noconv {
        noconv = false;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += abs1(m.at(j, i));
                    r += abs1(m.at(i, j));
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                noconv = true;
                d[i] *= f;
                for j in 0..n {
                    *m.at_mut(i, j) /= f;
                    *m.at_mut(j, i) *= f;
                }
            }
        }
    }
    d
}

/// Householder reflector `I - tau v v^H` acting on rows/columns `start..n`.
#[derive(Debug, Clone)]
pub(crate) struct Reflector {
    pub start: usize,
    pub v: Vec<Complex64>,
    pub tau: f64,
}

impl Reflector {
    /// `x <- (I - tau v v^H) x` on the trailing part of `x`.
    pub fn apply(&self, x: &mut [Complex64]) {
        let tail = &mut x[self.start..];
        let s: Complex64 = self.v.iter().zip(tail.iter()).map(|(v, x)| v.conj() * x).sum();
        let s = s * self.tau;
        for (x, v) in tail.iter_mut().zip(&self.v) {
            *x -= v * s;
        }
    }
}

/// Reduces `m` in place to upper Hessenberg form `Q^H m Q` and returns the
/// reflectors whose product is `Q = H_0 H_1 ... H_{n-3}`.
pub(crate) fn hessenberg(m: &mut Dense) -> Vec<Reflector> {
    let n = m.n;
    let mut reflectors = Vec::new();
    if n < 3 {
        return reflectors;
    }
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n - 2 {
        let start = k + 1;
        let tail_norm = (start + 1..n).map(|i| m.at(i, k).norm_sqr()).sum::<f64>();
        if tail_norm == 0.0 {
            continue;
        }
        let x0 = m.at(start, k);
        let alpha = (tail_norm + x0.norm_sqr()).sqrt();
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let beta = -phase * alpha;
        let mut v: Vec<Complex64> = (start..n).map(|i| m.at(i, k)).collect();
        v[0] -= beta;
        let vnorm2: f64 = v.iter().map(Complex64::norm_sqr).sum();
        let tau = 2.0 / vnorm2;

        // Left: rows start..n, columns k..n.
        acc[k..].iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (l, vl) in v.iter().enumerate() {
            let vc = vl.conj();
            let row = &m.a[(start + l) * n..(start + l + 1) * n];
            for j in k..n {
                acc[j] += vc * row[j];
            }
        }
        for (l, vl) in v.iter().enumerate() {
            let f = vl * tau;
            let row = &mut m.a[(start + l) * n..(start + l + 1) * n];
            for j in k..n {
                row[j] -= f * acc[j];
            }
        }
        // Right: all rows, columns start..n.
        for i in 0..n {
            let row = &mut m.a[i * n + start..(i + 1) * n];
            let s: Complex64 = row.iter().zip(&v).map(|(a, v)| a * v).sum();
            let s = s * tau;
            for (a, vl) in row.iter_mut().zip(&v) {
                *a -= s * vl.conj();
            }
        }
        *m.at_mut(start, k) = beta;
        for i in start + 1..n {
            *m.at_mut(i, k) = Complex64::new(0.0, 0.0);
        }
        reflectors.push(Reflector { start, v, tau });
    }
    reflectors
}
