//! Dense kernels used by the factorizations: Householder reflectors, QR,
//! LU solves and one-sided Jacobi SVD.

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, ComplexScalar, ONE, ZERO};

fn phase_of(z: ComplexScalar) -> ComplexScalar {
    let r = z.norm();
    if r == 0.0 {
        ONE
    } else {
        z / r
    }
}

/// Householder vector `w` (unnormalized) and `beta` with
/// `(I - 2 w w^* / |w|^2) x = beta e_1`, `|beta| = |x|`.
/// Returns `None` when `x` is already a multiple of `e_1`.
pub(crate) fn householder(x: &[ComplexScalar]) -> Option<(Vec<ComplexScalar>, ComplexScalar)> {
    let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
    if tail == 0.0 {
        return None;
    }
    let norm = (x[0].norm_sqr() + tail).sqrt();
    let beta = -phase_of(x[0]) * norm;
    let mut w = x.to_vec();
    w[0] -= beta;
    Some((w, beta))
}

/// Applies `H = I - 2 w w^* / |w|^2` from the left to rows `r0..r0+len(w)`
/// of `a`, columns `c0..`.
pub(crate) fn reflect_rows(a: &mut ComplexMatrix, w: &[ComplexScalar], r0: usize, c0: usize) {
    let wn: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    if wn == 0.0 {
        return;
    }
    for col in c0..a.cols() {
        let mut dot = ZERO;
        for (k, wk) in w.iter().enumerate() {
            dot += wk.conj() * a[(r0 + k, col)];
        }
        let f = dot * (2.0 / wn);
        for (k, wk) in w.iter().enumerate() {
            a[(r0 + k, col)] -= wk * f;
        }
    }
}

/// Applies `H` from the right to columns `c0..c0+len(w)` of `a`, rows `r_lo..r_hi`.
pub(crate) fn reflect_cols(
    a: &mut ComplexMatrix,
    w: &[ComplexScalar],
    c0: usize,
    r_lo: usize,
    r_hi: usize,
) {
    let wn: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    if wn == 0.0 {
        return;
    }
    for row in r_lo..r_hi {
        let mut dot = ZERO;
        for (k, wk) in w.iter().enumerate() {
            dot += a[(row, c0 + k)] * wk;
        }
        let f = dot * (2.0 / wn);
        for (k, wk) in w.iter().enumerate() {
            a[(row, c0 + k)] -= f * wk.conj();
        }
    }
}

/// Householder QR of a square or tall matrix: `a = q r`.
pub fn qr(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let (m, n) = (a.rows(), a.cols());
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(m);
    for k in 0..n.min(m.saturating_sub(1)) {
        let x: Vec<ComplexScalar> = (k..m).map(|i| r[(i, k)]).collect();
        if let Some((w, beta)) = householder(&x) {
            reflect_rows(&mut r, &w, k, k);
            reflect_cols(&mut q, &w, k, 0, m);
            r[(k, k)] = beta;
            for i in k + 1..m {
                r[(i, k)] = ZERO;
            }
        }
    }
    (q, r)
}

/// Unitary matrix whose first column is the unit vector `v`.
pub fn unitary_with_first_column(v: &[ComplexScalar]) -> ComplexMatrix {
    let n = v.len();
    let mut q = ComplexMatrix::identity(n);
    if let Some((w, beta)) = householder(v) {
        // H v = beta e1, so H e1 = v / beta; rescale the first column.
        reflect_cols(&mut q, &w, 0, 0, n);
        for i in 0..n {
            q[(i, 0)] *= beta / beta.norm();
        }
    } else {
        q[(0, 0)] = phase_of(v[0]);
    }
    q
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.ensure_square()?;
    if b.rows() != n {
        return Err(Error::ShapeMismatch(format!(
            "right-hand side has {} rows, expected {n}",
            b.rows()
        )));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = a.scale();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm()))
            .unwrap();
        if lu[(p, k)].norm() <= f64::EPSILON * scale * 1e-3 {
            return Err(Error::SingularMatrix);
        }
        if p != k {
            for c in 0..n {
                let t = lu[(k, c)];
                lu[(k, c)] = lu[(p, c)];
                lu[(p, c)] = t;
            }
            for c in 0..x.cols() {
                let t = x[(k, c)];
                x[(k, c)] = x[(p, c)];
                x[(p, c)] = t;
            }
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / pivot;
            if f == ZERO {
                continue;
            }
            lu[(i, k)] = f;
            for c in k + 1..n {
                let v = lu[(k, c)];
                lu[(i, c)] -= f * v;
            }
            for c in 0..x.cols() {
                let v = x[(k, c)];
                x[(i, c)] -= f * v;
            }
        }
    }
    for c in 0..x.cols() {
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for j in i + 1..n {
                s -= lu[(i, j)] * x[(j, c)];
            }
            x[(i, c)] = s / lu[(i, i)];
        }
    }
    Ok(x)
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve(a, &ComplexMatrix::identity(a.rows()))
}

/// Singular values (descending) and right singular vectors (as columns, in
/// the same order) by one-sided Jacobi.
pub fn svd_right(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let (m, n) = (a.rows(), a.cols());
    let mut u = a.clone();
    let mut v = ComplexMatrix::identity(n);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for i in 0..m {
                    alpha += u[(i, p)].norm_sqr();
                    beta += u[(i, q)].norm_sqr();
                    gamma += u[(i, p)].conj() * u[(i, q)];
                }
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let e = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                // column q is first rotated by conj(e) so that gamma is real
                for mat in [&mut u, &mut v] {
                    for i in 0..mat.rows() {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)] * e.conj();
                        mat[(i, p)] = xp * cs - xq * sn;
                        mat[(i, q)] = xp * sn + xq * cs;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| u[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let all: Vec<usize> = (0..n).collect();
    let v_sorted = v.select(&all, &order);
    (order.iter().map(|&j| norms[j]).collect(), v_sorted)
}

pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    svd_right(a).0
}

/// Number of singular values above `threshold`.
pub fn numerical_rank(a: &ComplexMatrix, threshold: f64) -> usize {
    singular_values(a).iter().filter(|&&s| s > threshold).count()
}

/// 2-norm condition number estimate from the singular values.
pub fn condition_number(a: &ComplexMatrix) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}
