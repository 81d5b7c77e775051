//! Implicitly shifted complex QR iteration on an upper Hessenberg matrix.

use num_complex::Complex64;

use super::reduce::{abs1, Dense};

/// Stalled sweeps between exceptional shifts.
const EXCEPTIONAL_EVERY: usize = 10;
/// Total sweep budget, per row of the matrix.
const SWEEPS_PER_ROW: usize = 30;

/// Plane rotation `[[c, conj(s)], [-s, c]]` that annihilates `y` in `(x, y)`.
#[inline]
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64, Complex64) {
    if y == Complex64::new(0.0, 0.0) {
        return (1.0, Complex64::new(0.0, 0.0), x);
    }
    let ax = x.norm();
    if ax == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0), y);
    }
    let norm = ax.hypot(y.norm());
    let phase = x / ax;
    (ax / norm, phase.conj() * y / norm, phase * norm)
}

/// Both eigenvalues of `[[a, b], [c, d]]`.
fn block_eigenvalues(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let scale = abs1(a) + abs1(b) + abs1(c) + abs1(d);
    if scale == 0.0 {
        return (a, d);
    }
    let (a, b, c, d) = (a / scale, b / scale, c / scale, d / scale);
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    ((mid + disc) * scale, (mid - disc) * scale)
}

/// Eigenvalue of the 2x2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let scale = abs1(a) + abs1(b) + abs1(c) + abs1(d);
    if scale == 0.0 {
        return d;
    }
    let (a, b, c, d) = (a / scale, b / scale, c / scale, d / scale);
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let (l1, l2) = (mid + disc, mid - disc);
    let pick = if (l1 - d).norm() <= (l2 - d).norm() { l1 } else { l2 };
    pick * scale
}

/// Computes all eigenvalues of the upper Hessenberg matrix `h`, destroying it.
///
/// On failure returns the row whose eigenvalue did not converge within the
/// sweep budget.
pub(crate) fn hessenberg_eigenvalues(h: &mut Dense) -> Result<Vec<Complex64>, usize> {
    let n = h.n;
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(w);
    }
    let ulp = f64::EPSILON;
    let smlnum = f64::MIN_POSITIVE * (n as f64 / ulp);
    let budget = SWEEPS_PER_ROW * n.max(1);
    let mut sweeps = 0usize;
    let mut stalled = 0usize;
    let mut hi = n - 1;

    loop {
        if hi == 0 {
            w[0] = h.at(0, 0);
            return Ok(w);
        }
        // Look for a negligible subdiagonal entry in rows 1..=hi.
        let mut l = 0;
        for k in (1..=hi).rev() {
            let sub = h.at(k, k - 1);
            if abs1(sub) <= smlnum {
                l = k;
                break;
            }
            let mut tst = abs1(h.at(k - 1, k - 1)) + abs1(h.at(k, k));
            if tst == 0.0 {
                if k >= 2 {
                    tst += abs1(h.at(k - 1, k - 2));
                }
                if k < hi {
                    tst += abs1(h.at(k + 1, k));
                }
            }
            if abs1(sub) <= ulp * tst {
                // Ahues-Tisseur refinement of the deflation test.
                let up = h.at(k - 1, k);
                let ab = abs1(sub).max(abs1(up));
                let ba = abs1(sub).min(abs1(up));
                let diff = h.at(k - 1, k - 1) - h.at(k, k);
                let aa = abs1(h.at(k, k)).max(abs1(diff));
                let bb = abs1(h.at(k, k)).min(abs1(diff));
                let s = aa + ab;
                if ba * (ab / s) <= smlnum.max(ulp * (bb * (aa / s))) {
                    l = k;
                    break;
                }
            }
        }
        if l > 0 {
            *h.at_mut(l, l - 1) = Complex64::new(0.0, 0.0);
        }
        if l == hi {
            w[hi] = h.at(hi, hi);
            hi -= 1;
            stalled = 0;
            continue;
        }
        if l + 1 == hi {
            // An isolated 2x2 block is solved in closed form. Iterating on
            // it can stall when its diagonal is degenerate: the subdiagonal
            // then sits at rounding level without ever passing the
            // deflation test.
            let (a, b) = (h.at(l, l), h.at(l, hi));
            let (c, d) = (h.at(hi, l), h.at(hi, hi));
            let (l1, l2) = block_eigenvalues(a, b, c, d);
            w[l] = l1;
            w[hi] = l2;
            if l == 0 {
                return Ok(w);
            }
            hi = l - 1;
            stalled = 0;
            continue;
        }

        sweeps += 1;
        stalled += 1;
        if sweeps > budget {
            return Err(hi);
        }

        let shift = if stalled % EXCEPTIONAL_EVERY == 0 {
            let anchor = if (stalled / EXCEPTIONAL_EVERY) % 2 == 1 { hi } else { l + 1 };
            h.at(anchor, anchor) + 0.75 * abs1(h.at(anchor, anchor - 1))
        } else {
            wilkinson(
                h.at(hi - 1, hi - 1),
                h.at(hi - 1, hi),
                h.at(hi, hi - 1),
                h.at(hi, hi),
            )
        };

        sweep(h, l, hi, shift);
    }
}

/// One implicit single-shift QR sweep on the active block `l..=hi`.
fn sweep(h: &mut Dense, l: usize, hi: usize, shift: Complex64) {
    let n = h.n;
    let mut x = h.at(l, l) - shift;
    let mut y = h.at(l + 1, l);
    for k in l..hi {
        if k > l {
            x = h.at(k, k - 1);
            y = h.at(k + 1, k - 1);
        }
        let (c, s, r) = givens(x, y);
        if k > l {
            *h.at_mut(k, k - 1) = r;
            *h.at_mut(k + 1, k - 1) = Complex64::new(0.0, 0.0);
        }
        let sc = s.conj();
        {
            let (upper, lower) = h.a.split_at_mut((k + 1) * n);
            let rk = &mut upper[k * n + k..k * n + hi + 1];
            let rk1 = &mut lower[k..hi + 1];
            for (a, b) in rk.iter_mut().zip(rk1.iter_mut()) {
                let (ta, tb) = (*a, *b);
                *a = ta * c + sc * tb;
                *b = -s * ta + tb * c;
            }
        }
        let last = (k + 2).min(hi);
        for i in l..=last {
            let base = i * n + k;
            let (ta, tb) = (h.a[base], h.a[base + 1]);
            h.a[base] = ta * c + s * tb;
            h.a[base + 1] = -sc * ta + tb * c;
        }
    }
}
