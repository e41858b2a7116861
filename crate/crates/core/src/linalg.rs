//! Dense complex linear algebra for small matrices.
//!
//! Symbols are m×m with m ≤ ~8, so everything here is written for tiny dense
//! matrices: Householder reduction to Hessenberg form followed by a shifted
//! QR iteration for eigenvalues, cofactor adjugates, and Faddeev–LeVerrier
//! characteristic-polynomial coefficients. No LAPACK backend; results are
//! bit-reproducible across machines.

use crate::error::{Error, Result};
use crate::{CMat, C64};

/// Largest entry modulus.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Induced infinity norm (max absolute row sum).
pub fn inf_norm(a: &CMat) -> f64 {
    let (r, c) = a.shape();
    let mut best = 0.0_f64;
    for i in 0..r {
        let mut row = 0.0;
        for j in 0..c {
            row += a[(i, j)].norm();
        }
        best = best.max(row);
    }
    best
}

/// Reduce to upper Hessenberg form with Householder reflectors (in place copy).
fn hessenberg(a: &CMat) -> CMat {
    let n = a.nrows();
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    for k in 0..n - 2 {
        // Build reflector for column k, rows k+1..n.
        let mut norm2 = 0.0;
        for i in k + 1..n {
            norm2 += h[(i, k)].norm_sqr();
        }
        let alpha_norm = norm2.sqrt();
        if alpha_norm <= f64::MIN_POSITIVE {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * alpha_norm;
        // v = x - alpha e1, normalized.
        let mut v = vec![C64::new(0.0, 0.0); n - k - 1];
        v[0] = x0 - alpha;
        for i in k + 2..n {
            v[i - k - 1] = h[(i, k)];
        }
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 <= f64::MIN_POSITIVE {
            continue;
        }
        // H = I - 2 v v^H / |v|^2 applied from left (rows k+1..n) and right.
        let scale = 2.0 / vnorm2;
        // Left: h <- h - scale * v (v^H h)
        for j in k..n {
            let mut dot = C64::new(0.0, 0.0);
            for i in 0..v.len() {
                dot += v[i].conj() * h[(k + 1 + i, j)];
            }
            let f = dot * scale;
            for i in 0..v.len() {
                let upd = v[i] * f;
                h[(k + 1 + i, j)] -= upd;
            }
        }
        // Right: h <- h - scale * (h v) v^H
        for i in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for j in 0..v.len() {
                dot += h[(i, k + 1 + j)] * v[j];
            }
            let f = dot * scale;
            for j in 0..v.len() {
                let upd = f * v[j].conj();
                h[(i, k + 1 + j)] -= upd;
            }
        }
        // Clean the column below subdiagonal.
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
    h
}

/// Complex Givens pair (c real, s) with
/// `[c s; -conj(s) c] * [f; g] = [r; 0]`.
fn givens(f: C64, g: C64) -> (f64, C64) {
    if g.norm() == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if f.norm() == 0.0 {
        return (0.0, g.conj() / g.norm());
    }
    let fa = f.norm();
    let r = (fa * fa + g.norm_sqr()).sqrt();
    let alpha = f / fa;
    (fa / r, alpha * g.conj() / r)
}

fn eig2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powu(2) + b * c;
    let sq = disc.sqrt();
    (tr + sq, tr - sq)
}

/// Eigenvalues of a small dense complex matrix by shifted QR on the
/// Hessenberg form. Order is not meaningful; callers sort.
pub fn eigenvalues(a: &CMat) -> Result<Vec<C64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigenvalues: square matrix required");
    if n == 0 {
        return Ok(vec![]);
    }
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    let mut h = hessenberg(&(a / C64::new(scale, 0.0)));
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut iter_in_block = 0usize;
    let max_iters = 60 * n;
    let mut total_iters = 0usize;

    loop {
        // Deflate negligible subdiagonals.
        for i in 0..hi {
            let tol = f64::EPSILON * (h[(i, i)].norm() + h[(i + 1, i + 1)].norm()) + 1e-300;
            if h[(i + 1, i)].norm() <= tol {
                h[(i + 1, i)] = C64::new(0.0, 0.0);
            }
        }
        // Peel converged eigenvalues off the bottom.
        while hi > 0 && h[(hi, hi - 1)].norm() == 0.0 {
            eigs.push(h[(hi, hi)]);
            hi -= 1;
            iter_in_block = 0;
        }
        if hi == 0 {
            eigs.push(h[(0, 0)]);
            break;
        }
        // Find the start of the active block.
        let mut lo = hi;
        while lo > 0 && h[(lo, lo - 1)].norm() != 0.0 {
            lo -= 1;
        }
        if hi - lo == 1 {
            let (l1, l2) = eig2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eigs.push(l1);
            eigs.push(l2);
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            iter_in_block = 0;
            continue;
        }

        total_iters += 1;
        iter_in_block += 1;
        if total_iters > max_iters {
            return Err(Error::EigenNonConvergence);
        }
        // Wilkinson shift from trailing 2x2; exceptional shift when stalled.
        let mu = if iter_in_block.is_multiple_of(17) {
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm(), 0.0)
        } else {
            let (l1, l2) = eig2(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            );
            let target = h[(hi, hi)];
            if (l1 - target).norm() <= (l2 - target).norm() {
                l1
            } else {
                l2
            }
        };

        // Explicit QR step on the active block: H - mu I = QR, H <- RQ + mu I.
        let nb = hi - lo + 1;
        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(nb - 1);
        for i in lo..hi {
            let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
            rots.push((c, s));
            for j in i..=hi {
                let x = h[(i, j)];
                let y = h[(i + 1, j)];
                h[(i, j)] = x * c + s * y;
                h[(i + 1, j)] = -s.conj() * x + y * c;
            }
            h[(i + 1, i)] = C64::new(0.0, 0.0);
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let i = lo + idx;
            let top = (i + 1).min(hi);
            for r in lo..=top.min(hi) {
                let x = h[(r, i)];
                let y = h[(r, i + 1)];
                h[(r, i)] = x * c + y * s.conj();
                h[(r, i + 1)] = -x * s + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }

    Ok(eigs.into_iter().map(|z| z * scale).collect())
}

/// Coefficients `[c1, ..., cm]` of `det(tau I - A) = tau^m + c1 tau^{m-1} + ... + cm`
/// by the Faddeev–LeVerrier recursion.
pub fn char_poly_coeffs(a: &CMat) -> Vec<C64> {
    let n = a.nrows();
    let mut coeffs = Vec::with_capacity(n);
    let mut m = CMat::identity(n, n);
    for k in 1..=n {
        let am = a * &m;
        let c = -am.diagonal().sum() / C64::new(k as f64, 0.0);
        coeffs.push(c);
        m = am + CMat::identity(n, n) * c;
    }
    coeffs
}

/// Classical adjugate via cofactors: `adj(B) B = B adj(B) = det(B) I`.
pub fn adjugate(b: &CMat) -> CMat {
    let n = b.nrows();
    if n == 1 {
        return CMat::from_element(1, 1, C64::new(1.0, 0.0));
    }
    let mut adj = CMat::zeros(n, n);
    let mut minor = CMat::zeros(n - 1, n - 1);
    for i in 0..n {
        for j in 0..n {
            // adj[i][j] = (-1)^{i+j} * minor(B with row j, col i removed)
            let mut mi = 0;
            for r in 0..n {
                if r == j {
                    continue;
                }
                let mut mj = 0;
                for c in 0..n {
                    if c == i {
                        continue;
                    }
                    minor[(mi, mj)] = b[(r, c)];
                    mj += 1;
                }
                mi += 1;
            }
            let det = minor.clone().determinant();
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            adj[(i, j)] = det * sign;
        }
    }
    adj
}
