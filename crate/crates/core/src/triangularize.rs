//! Unitary reduction of a square matrix to block upper triangular form with
//! lexicographically ordered eigenvalue blocks and a positive first
//! superdiagonal inside every block.
//!
//! The pipeline is Hessenberg reduction, single-shift complex QR, adjacent
//! swaps to order the diagonal by eigenvalue cluster, and finally a
//! per-cluster refinement that triangularizes each cluster block along the
//! kernel flag of `block - lambda I`. The refinement matters for defective
//! eigenvalues: their computed copies are spread by about `eps^(1/m)`, while
//! the flag is determined to working precision.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{householder, reflect_cols, reflect_rows, svd_right, unitary_with_first_column};
use crate::numerics::{
    approx_zero, cluster_values, lex_compare, ComplexMatrix, ComplexScalar, ToleranceConfig, ONE,
    ZERO,
};

/// `u a u^* = m` with `a` upper triangular and its diagonal grouped by
/// eigenvalue cluster, clusters in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurForm {
    pub u: ComplexMatrix,
    pub a: ComplexMatrix,
    pub diag_order: Vec<ComplexScalar>,
    /// Max-abs entry of the input; the scale of every relative test.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    pub sizes: Vec<usize>,
    pub eigenvalues: Vec<ComplexScalar>,
}

impl BlockPartition {
    pub fn new(sizes: Vec<usize>, eigenvalues: Vec<ComplexScalar>) -> Result<Self> {
        if sizes.len() != eigenvalues.len() || sizes.contains(&0) {
            return Err(Error::ShapeMismatch(
                "partition needs one positive size per eigenvalue".into(),
            ));
        }
        Ok(Self { sizes, eigenvalues })
    }

    /// Number of blocks.
    pub fn t(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Start offset of every block, plus `n` at the end.
    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.sizes.len() + 1);
        let mut acc = 0;
        out.push(0);
        for s in &self.sizes {
            acc += s;
            out.push(acc);
        }
        out
    }

    /// Entry range of block `i`.
    pub fn range(&self, i: usize) -> std::ops::Range<usize> {
        let start: usize = self.sizes[..i].iter().sum();
        start..start + self.sizes[i]
    }

    /// Block index of every entry position.
    pub fn block_of(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
            .collect()
    }
}

/// Block upper triangular form with constant-diagonal blocks whose first
/// superdiagonal is real and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserForm {
    pub a: ComplexMatrix,
    pub partition: BlockPartition,
    /// `u a u^* = input`.
    pub u: ComplexMatrix,
    pub scale: f64,
}

fn phase(z: ComplexScalar) -> ComplexScalar {
    let r = z.norm();
    if r == 0.0 {
        ONE
    } else {
        z / r
    }
}

/// Givens pair `(c, s)` with `[[c, s], [-s^*, c]] [a; b] = [r; 0]`.
fn givens(a: ComplexScalar, b: ComplexScalar) -> (f64, ComplexScalar) {
    let r = a.norm().hypot(b.norm());
    if r == 0.0 {
        return (1.0, ZERO);
    }
    (a.norm() / r, phase(a) * b.conj() / r)
}

fn rotate_rows(h: &mut ComplexMatrix, k: usize, c: f64, s: ComplexScalar, from_col: usize) {
    for col in from_col..h.cols() {
        let x = h[(k, col)];
        let y = h[(k + 1, col)];
        h[(k, col)] = x * c + s * y;
        h[(k + 1, col)] = -s.conj() * x + y * c;
    }
}

fn rotate_cols(h: &mut ComplexMatrix, k: usize, c: f64, s: ComplexScalar, rows: usize) {
    for row in 0..rows {
        let x = h[(row, k)];
        let y = h[(row, k + 1)];
        h[(row, k)] = x * c + y * s.conj();
        h[(row, k + 1)] = -x * s + y * c;
    }
}

fn hessenberg(h: &mut ComplexMatrix, u: &mut ComplexMatrix) {
    let n = h.rows();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<ComplexScalar> = (k + 1..n).map(|i| h[(i, k)]).collect();
        if let Some((w, beta)) = householder(&x) {
            reflect_rows(h, &w, k + 1, k);
            reflect_cols(h, &w, k + 1, 0, n);
            reflect_cols(u, &w, k + 1, 0, n);
            h[(k + 1, k)] = beta;
            for i in k + 2..n {
                h[(i, k)] = ZERO;
            }
        }
    }
}

/// Eigenvalue of the trailing 2x2 window closest to its last diagonal entry;
/// equidistant candidates resolve to the lexicographically smaller one.
fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> ComplexScalar {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let (m1, m2) = (mid + disc, mid - disc);
    let (d1, d2) = ((m1 - d).norm(), (m2 - d).norm());
    if d1 < d2 {
        m1
    } else if d2 < d1 {
        m2
    } else if lex_compare(m1, m2).is_le() {
        m1
    } else {
        m2
    }
}

fn qr_step(h: &mut ComplexMatrix, u: &mut ComplexMatrix, lo: usize, hi: usize, shift: ComplexScalar) {
    let n = h.rows();
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        rotate_rows(h, k, c, s, k);
        h[(k + 1, k)] = ZERO;
        rots.push((c, s));
    }
    for (off, &(c, s)) in rots.iter().enumerate() {
        let k = lo + off;
        rotate_cols(h, k, c, s, (k + 2).min(hi + 1));
        rotate_cols(u, k, c, s, n);
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

/// Complex Schur form `u t u^* = m` of an upper Hessenberg `h` (in place).
fn hessenberg_qr(h: &mut ComplexMatrix, u: &mut ComplexMatrix, limit: usize) -> Result<()> {
    let n = h.rows();
    if n < 2 {
        return Ok(());
    }
    let hnorm = h.max_abs();
    let mut hi = n - 1;
    let mut iters = 0;
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let near = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if sub <= f64::EPSILON * near || sub <= f64::EPSILON * hnorm {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iters = 0;
            continue;
        }
        iters += 1;
        if iters > limit {
            return Err(Error::NoConvergence {
                iterations: limit,
                index: hi,
            });
        }
        let shift = if iters % 10 == 0 {
            let s = h[(hi, hi - 1)].norm();
            h[(hi, hi)] + Complex64::new(0.75 * s, 0.4375 * s)
        } else {
            wilkinson_shift(h, hi)
        };
        qr_step(h, u, lo, hi, shift);
    }
    Ok(())
}

/// Exchanges diagonal entries `k` and `k+1` of upper triangular `t` by a
/// unitary similarity, accumulating into `u`.
fn swap_adjacent(t: &mut ComplexMatrix, u: &mut ComplexMatrix, k: usize) {
    let n = t.rows();
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    let c = t[(k, k + 1)];
    let gap = b - a;
    // unit eigenvector of the 2x2 block for b, second component real positive
    let x1 = c * phase(gap).conj();
    let x2 = Complex64::new(gap.norm(), 0.0);
    let norm = x1.norm().hypot(x2.norm());
    let (x1, x2) = (x1 / norm, x2 / norm);
    // q = [[x1, x2^*], [x2, -x1^*]]
    for col in k..n {
        let r0 = t[(k, col)];
        let r1 = t[(k + 1, col)];
        t[(k, col)] = x1.conj() * r0 + x2.conj() * r1;
        t[(k + 1, col)] = x2 * r0 - x1 * r1;
    }
    for (mat, rows) in [(&mut *t, k + 2), (&mut *u, n)] {
        for row in 0..rows {
            let y0 = mat[(row, k)];
            let y1 = mat[(row, k + 1)];
            mat[(row, k)] = y0 * x1 + y1 * x2;
            mat[(row, k + 1)] = y0 * x2.conj() - y1 * x1.conj();
        }
    }
    t[(k, k)] = b;
    t[(k + 1, k + 1)] = a;
    t[(k + 1, k)] = ZERO;
}

/// Unitary triangularization with the diagonal ordered by eigenvalue
/// cluster. Entries of one cluster are never swapped with each other.
pub fn schur_ordered(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<SchurForm> {
    tol.validate()?;
    let n = m.ensure_square()?;
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let scale = m.scale();
    let mut t = m.clone();
    let mut u = ComplexMatrix::identity(n);
    hessenberg(&mut t, &mut u);
    hessenberg_qr(&mut t, &mut u, tol.qr_iteration_limit(n))?;
    for r in 0..n {
        for c in 0..r {
            t[(r, c)] = ZERO;
        }
    }

    let clusters = cluster_values(&t.diagonal(), scale, tol.cluster_radius())?;
    let mut rank = vec![0usize; n];
    for (k, cl) in clusters.iter().enumerate() {
        for &i in &cl.members {
            rank[i] = k;
        }
    }
    // insertion sort by cluster rank with adjacent swaps
    for i in 1..n {
        let mut j = i;
        while j > 0 && rank[j - 1] > rank[j] {
            swap_adjacent(&mut t, &mut u, j - 1);
            rank.swap(j - 1, j);
            j -= 1;
        }
    }
    Ok(SchurForm {
        u,
        diag_order: t.diagonal(),
        a: t,
        scale,
    })
}

/// Positivizes the first superdiagonal of upper triangular `a`:
/// returns `(d a d^{-1}, d)` for a diagonal unitary `d`, with every
/// non-negligible entry `(i, i+1)` replaced by its modulus and negligible ones
/// set to zero.
pub fn positivize_superdiagonal(
    a: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> (ComplexMatrix, Vec<ComplexScalar>) {
    let n = a.rows();
    positivize_masked(a, &vec![true; n.saturating_sub(1)], a.scale(), tol)
}

fn positivize_masked(
    a: &ComplexMatrix,
    mask: &[bool],
    scale: f64,
    tol: &ToleranceConfig,
) -> (ComplexMatrix, Vec<ComplexScalar>) {
    let n = a.rows();
    let mut d = vec![ONE; n];
    for i in 0..n.saturating_sub(1) {
        let z = a[(i, i + 1)];
        let step = if mask[i] && !approx_zero(z, scale, tol.tol_zero) {
            phase(z)
        } else {
            ONE
        };
        d[i + 1] = d[i] * step;
    }
    let mut out = a.clone();
    for r in 0..n {
        for c in 0..n {
            if r != c {
                out[(r, c)] = d[r] * a[(r, c)] / d[c];
            }
        }
    }
    for i in 0..n.saturating_sub(1) {
        if !mask[i] {
            continue;
        }
        let z = a[(i, i + 1)];
        out[(i, i + 1)] = if approx_zero(z, scale, tol.tol_zero) {
            ZERO
        } else {
            Complex64::new(z.norm(), 0.0)
        };
    }
    (out, d)
}

/// Re-triangularizes the cluster block at `start..start+m` along the kernel
/// flag of `block - lambda I` and returns the largest discarded entry.
fn refine_cluster(
    a: &mut ComplexMatrix,
    u: &mut ComplexMatrix,
    start: usize,
    m: usize,
    lambda: ComplexScalar,
) -> f64 {
    let n = a.rows();
    let mut discarded: f64 = 0.0;
    for k in 0..m {
        let lo = start + k;
        let hi = start + m;
        if hi - lo > 1 {
            let mut c = a.block(lo, hi, lo, hi);
            for i in 0..hi - lo {
                c[(i, i)] -= lambda;
            }
            let (_, v) = svd_right(&c);
            let last = v.cols() - 1;
            let null: Vec<ComplexScalar> = (0..v.rows()).map(|i| v[(i, last)]).collect();
            let q = unitary_with_first_column(&null);
            // a <- diag(I, q)^* a diag(I, q) on the index range lo..hi
            let rows: Vec<usize> = (lo..hi).collect();
            let all: Vec<usize> = (0..n).collect();
            let band = a.select(&rows, &all);
            let band = &q.adjoint() * &band;
            a.set_block(lo, 0, &band);
            let cols = a.select(&all, &rows);
            a.set_block(0, lo, &(&cols * &q));
            let ucols = u.select(&all, &rows);
            u.set_block(0, lo, &(&ucols * &q));
        }
        discarded = discarded.max((a[(lo, lo)] - lambda).norm());
        for i in lo + 1..n {
            discarded = discarded.max(a[(i, lo)].norm());
        }
        a[(lo, lo)] = lambda;
        for i in lo + 1..n {
            a[(i, lo)] = ZERO;
        }
    }
    discarded
}

/// Partitions an ordered Schur form into eigenvalue blocks, snaps each
/// block's diagonal to the cluster mean and makes the within-block first
/// superdiagonal real nonnegative.
pub fn block_partition_of(s: &SchurForm, tol: &ToleranceConfig) -> Result<ObserForm> {
    let n = s.a.rows();
    let clusters = cluster_values(&s.a.diagonal(), s.scale, tol.cluster_radius())?;
    let mut a = s.a.clone();
    let mut u = s.u.clone();
    let mut sizes = Vec::with_capacity(clusters.len());
    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut start = 0;
    let limit = n as f64 * tol.tol_residual * s.scale;
    for cl in &clusters {
        let m = cl.members.len();
        let contiguous = cl.members.iter().enumerate().all(|(k, &i)| i == start + k);
        if !contiguous {
            return Err(Error::ClusterAmbiguity(format!(
                "cluster at {} is not contiguous on the Schur diagonal",
                cl.representative
            )));
        }
        let lambda = cl.representative;
        let discarded = refine_cluster(&mut a, &mut u, start, m, lambda);
        if m > 1 && discarded > limit {
            return Err(Error::ClusterAmbiguity(format!(
                "{m} eigenvalues near {lambda} do not form a single eigenvalue \
                 (residual {discarded:e} exceeds {limit:e})"
            )));
        }
        sizes.push(m);
        eigenvalues.push(lambda);
        start += m;
    }
    let partition = BlockPartition::new(sizes, eigenvalues)?;
    let block = partition.block_of();
    let mask: Vec<bool> = (0..n.saturating_sub(1)).map(|i| block[i] == block[i + 1]).collect();
    let (a, d) = positivize_masked(&a, &mask, s.scale, tol);
    // input = u a_old u^*, a_new = d a_old d^*  =>  input = (u d^*) a_new (u d^*)^*
    for r in 0..n {
        for c in 0..n {
            u[(r, c)] *= d[c].conj();
        }
    }
    Ok(ObserForm {
        a,
        partition,
        u,
        scale: s.scale,
    })
}

/// Full reduction of `m` to its block form.
pub fn obser_form(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ObserForm> {
    block_partition_of(&schur_ordered(m, tol)?, tol)
}

/// True iff every first-superdiagonal entry inside every eigenvalue block is
/// non-negligible.
pub fn is_nonderogatory(o: &ObserForm, tol: &ToleranceConfig) -> bool {
    first_derogatory_block(o, tol).is_none()
}

pub(crate) fn first_derogatory_block(o: &ObserForm, tol: &ToleranceConfig) -> Option<usize> {
    (0..o.partition.t()).find(|&b| {
        let r = o.partition.range(b);
        (r.start..r.end - 1).any(|i| approx_zero(o.a[(i, i + 1)], o.scale, tol.tol_zero))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qr;
    use crate::numerics::c;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn check_schur(m: &ComplexMatrix, s: &SchurForm) {
        let n = m.rows() as f64;
        assert!(s.u.unitarity_defect() <= n * 1e-10);
        let back = &(&s.u * &s.a) * &s.u.adjoint();
        assert!(back.max_abs_diff(m) <= n * 1e-10 * m.scale());
        assert_eq!(s.a.lower_max_abs(), 0.0);
    }

    #[test]
    fn diagonal_reorder_uses_exchange() {
        let m = ComplexMatrix::from_real_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]);
        let s = schur_ordered(&m, &tol()).unwrap();
        assert_eq!(s.a, ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]));
        assert_eq!(s.u, ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]));
    }

    #[test]
    fn triangular_input_is_kept() {
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        let s = schur_ordered(&m, &tol()).unwrap();
        assert_eq!(s.a, m);
        assert_eq!(s.u, ComplexMatrix::identity(2));
    }

    #[test]
    fn rotation_generator_eigenvalues_are_ordered() {
        // characteristic polynomial x^2 + 1
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
        let s = schur_ordered(&m, &tol()).unwrap();
        check_schur(&m, &s);
        assert!((s.a[(0, 0)] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((s.a[(1, 1)] - c(0.0, 1.0)).norm() < 1e-14);
        // normal matrix: Schur form is diagonal
        assert!(s.a[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn not_square_is_rejected() {
        let m = ComplexMatrix::zeros(2, 3);
        assert_eq!(
            schur_ordered(&m, &tol()),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        );
    }

    #[test]
    fn positivize_examples() {
        let a = ComplexMatrix::from_rows(&[vec![ZERO, c(0.0, 2.0)], vec![ZERO, ZERO]]);
        let (out, d) = positivize_superdiagonal(&a, &tol());
        assert_eq!(out, ComplexMatrix::from_real_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]));
        assert_eq!(d, vec![ONE, c(0.0, 1.0)]);

        let a = ComplexMatrix::from_rows(&[
            vec![ONE, c(-3.0, 0.0), c(5.0, 0.0)],
            vec![ZERO, ONE, c(0.0, 4.0)],
            vec![ZERO, ZERO, ONE],
        ]);
        let (out, d) = positivize_superdiagonal(&a, &tol());
        let expected = ComplexMatrix::from_rows(&[
            vec![ONE, c(3.0, 0.0), c(0.0, 5.0)],
            vec![ZERO, ONE, c(4.0, 0.0)],
            vec![ZERO, ZERO, ONE],
        ]);
        assert!(out.max_abs_diff(&expected) < 1e-15);
        assert_eq!(out[(0, 1)].im, 0.0);
        assert_eq!(d, vec![ONE, c(-1.0, 0.0), c(0.0, -1.0)]);

        let a = ComplexMatrix::from_real_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 3.0],
        ]);
        let (out, d) = positivize_superdiagonal(&a, &tol());
        assert_eq!(out, a);
        assert_eq!(d, vec![ONE; 3]);
    }

    #[test]
    fn partition_examples() {
        let mut a = ComplexMatrix::from_diagonal(&[ONE, ONE, c(2.0, 0.0)]);
        a[(0, 1)] = c(0.0, 3.0);
        let s = SchurForm {
            u: ComplexMatrix::identity(3),
            diag_order: a.diagonal(),
            a: a.clone(),
            scale: a.scale(),
        };
        let o = block_partition_of(&s, &tol()).unwrap();
        assert_eq!(o.partition.sizes, vec![2, 1]);
        assert_eq!(o.partition.eigenvalues, vec![ONE, c(2.0, 0.0)]);
        assert_eq!(o.a[(0, 1)], c(3.0, 0.0));
        assert_eq!(o.a[(0, 2)], ZERO);
        assert_eq!(o.a[(1, 2)], ZERO);
        assert!((&(&o.u * &o.a) * &o.u.adjoint()).max_abs_diff(&a) < 1e-14);

        let d = ComplexMatrix::from_diagonal(&[ONE, c(2.0, 0.0), c(3.0, 0.0)]);
        let o = obser_form(&d, &tol()).unwrap();
        assert_eq!(o.partition.sizes, vec![1, 1, 1]);
        assert_eq!(o.a, d);

        let j = ComplexMatrix::from_real_rows(&[vec![5.0, -4.0], vec![0.0, 5.0]]);
        let o = obser_form(&j, &tol()).unwrap();
        assert_eq!(o.partition.sizes, vec![2]);
        assert_eq!(o.a[(0, 1)], c(4.0, 0.0));
        assert!(is_nonderogatory(&o, &tol()));
    }

    #[test]
    fn nonderogatory_examples() {
        let scalar = ComplexMatrix::from_real_rows(&[vec![5.0, 0.0], vec![0.0, 5.0]]);
        let o = obser_form(&scalar, &tol()).unwrap();
        assert!(!is_nonderogatory(&o, &tol()));
        let d = ComplexMatrix::from_diagonal(&[ONE, c(2.0, 0.0), c(3.0, 0.0)]);
        assert!(is_nonderogatory(&obser_form(&d, &tol()).unwrap(), &tol()));
    }

    #[test]
    fn conjugated_jordan_blocks_are_recovered() {
        // J_2(2i) (+) J_3(1), already in block order, hidden by a unitary
        let mut j = ComplexMatrix::from_diagonal(&[c(0.0, 2.0), c(0.0, 2.0), ONE, ONE, ONE]);
        j[(0, 1)] = c(0.9, 0.0);
        j[(2, 3)] = c(0.7, 0.0);
        j[(3, 4)] = c(1.3, 0.0);
        j[(2, 4)] = c(0.2, -0.5);
        j[(1, 2)] = c(-0.4, 0.3);
        let g = ComplexMatrix::from_rows(
            &(0..5)
                .map(|r| (0..5).map(|k| c(((r * 7 + k * 3) % 11) as f64 - 5.0, ((r + 2 * k) % 5) as f64)).collect())
                .collect::<Vec<_>>(),
        );
        let (q, _) = qr(&g);
        let m = &(&q * &j) * &q.adjoint();
        let o = obser_form(&m, &tol()).unwrap();
        assert_eq!(o.partition.sizes, vec![2, 3]);
        assert!(is_nonderogatory(&o, &tol()));
        let back = &(&o.u * &o.a) * &o.u.adjoint();
        assert!(back.max_abs_diff(&m) < 1e-12 * m.scale());
        // the form is unique up to one phase per block
        assert!((o.a[(0, 1)] - c(0.9, 0.0)).norm() < 1e-12);
        assert!((o.a[(2, 3)] - c(0.7, 0.0)).norm() < 1e-12);
        assert!((o.a[(3, 4)] - c(1.3, 0.0)).norm() < 1e-12);
        assert!((o.a[(2, 4)] - c(0.2, -0.5)).norm() < 1e-12);
        assert!((o.a[(1, 2)].norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn close_distinct_eigenvalues_are_not_merged_silently() {
        let m = ComplexMatrix::from_diagonal(&[ONE, c(1.0 + 5e-5, 0.0)]);
        assert!(matches!(obser_form(&m, &tol()), Err(Error::ClusterAmbiguity(_))));
    }
}
