//! Canonical form of a pair `(M, N)` under simultaneous similarity when `M`
//! has distinct eigenvalues.
//!
//! After diagonalizing `M` the remaining freedom is a diagonal similarity
//! `diag(s_1, ..., s_n)`, which multiplies `b_pq` by `s_p^{-1} s_q`. Entries
//! of `B` are visited row by row; each nonzero off-diagonal entry whose
//! endpoints are not yet tied together is set to exactly 1 and the directed
//! edge `p -> q` is recorded.

use crate::error::{Error, Result};
use crate::forests::{AcyclicGraph, DiForest, LabelMode, LabeledUnionFind};
use crate::linalg::{condition_number, solve};
use crate::numerics::{
    approx_zero, cluster_values, lex_compare_tol, ComplexMatrix, ComplexScalar, ToleranceConfig,
    ONE, ZERO,
};
use crate::triangularize::schur_ordered;

/// Condition estimate of the eigenvector matrix above which results are
/// flagged as unreliable.
pub const CONDITION_WARNING: f64 = 1e8;

/// `(diag(lambda), b)` with `s^{-1} M s = diag(lambda)` and `s^{-1} N s = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagPair {
    pub lambda: Vec<ComplexScalar>,
    pub b: ComplexMatrix,
    pub s: ComplexMatrix,
    /// 2-norm condition estimate of `s`.
    pub condition: f64,
    /// `max |s^{-1} M s - diag(lambda)|`.
    pub residual: f64,
}

/// Eigenvalues and eigenvectors of `m`, which must have distinct eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonalization {
    pub s: ComplexMatrix,
    pub lambda: Vec<ComplexScalar>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPairResult {
    pub lambda: Vec<ComplexScalar>,
    pub b_can: ComplexMatrix,
    pub g: DiForest,
    /// `s_total^{-1} M s_total = diag(lambda)`, `s_total^{-1} N s_total = b_can`.
    pub s_total: ComplexMatrix,
    /// Positions set to 1, in scan order; same as the edges of `g`.
    pub ones: Vec<(usize, usize)>,
    /// Scale of the zero tests (max-abs entry of the diagonalized `N`).
    pub scale: f64,
    pub condition: f64,
    pub residual: f64,
}

/// Diagonalizes `m` by eigenvectors computed from its ordered Schur form.
/// Columns of `s` have unit length with their first non-negligible entry
/// real positive; `lambda` is strictly increasing in lexicographic order.
pub fn diagonalize_distinct(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Diagonalization> {
    // eigenvalues are simple here, so no defective-cluster widening
    let simple = ToleranceConfig {
        tol_cluster: 0.0,
        ..*tol
    };
    let schur = schur_ordered(m, &simple).map_err(|e| match e {
        Error::ClusterAmbiguity(msg) => Error::RepeatedEigenvalue {
            first: msg,
            second: String::from("(unresolved cluster)"),
        },
        other => other,
    })?;
    let n = m.rows();
    let t = &schur.a;
    let lambda = t.diagonal();
    for cl in cluster_values(&lambda, schur.scale, tol.tol_eig)? {
        if cl.members.len() > 1 {
            return Err(Error::RepeatedEigenvalue {
                first: lambda[cl.members[0]].to_string(),
                second: lambda[cl.members[1]].to_string(),
            });
        }
    }

    // eigenvectors of the triangular factor by back substitution
    let mut x = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        x[(k, k)] = ONE;
        for i in (0..k).rev() {
            let mut acc = ZERO;
            for j in i + 1..=k {
                acc += t[(i, j)] * x[(j, k)];
            }
            x[(i, k)] = -acc / (t[(i, i)] - t[(k, k)]);
        }
    }
    let mut s = &schur.u * &x;
    for k in 0..n {
        let norm: f64 = (0..n).map(|i| s[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let lead = (0..n)
            .map(|i| s[(i, k)])
            .find(|z| z.norm() > 1e-12 * norm)
            .unwrap_or(ONE);
        let f = lead.conj() / (lead.norm() * norm);
        for i in 0..n {
            s[(i, k)] *= f;
        }
    }
    Ok(Diagonalization { s, lambda })
}

/// Diagonalizes `m` and transforms `n_mat` along with it.
pub fn diag_pair(m: &ComplexMatrix, n_mat: &ComplexMatrix, tol: &ToleranceConfig) -> Result<DiagPair> {
    let n = m.ensure_square()?;
    if n_mat.rows() != n || n_mat.cols() != n {
        return Err(Error::ShapeMismatch(format!(
            "M is {n}x{n} but N is {}x{}",
            n_mat.rows(),
            n_mat.cols()
        )));
    }
    if !n_mat.is_finite() {
        return Err(Error::NonFinite);
    }
    let Diagonalization { s, lambda } = diagonalize_distinct(m, tol)?;
    let b = solve(&s, &(n_mat * &s))?;
    let residual = solve(&s, &(m * &s))?.max_abs_diff(&ComplexMatrix::from_diagonal(&lambda));
    Ok(DiagPair {
        lambda,
        b,
        condition: condition_number(&s),
        s,
        residual,
    })
}

/// State handed to an observer after every step that sets an entry to 1.
pub struct PairStep<'a> {
    pub position: (usize, usize),
    pub matrix: &'a ComplexMatrix,
    pub scales: &'a [ComplexScalar],
}

/// Canonical form of `(m, n_mat)` under simultaneous similarity.
pub fn canonicalize_pair(
    m: &ComplexMatrix,
    n_mat: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<CanonicalPairResult> {
    canonicalize_diag_pair(&diag_pair(m, n_mat, tol)?, tol, None)
}

/// Row-major scan of a diagonalized pair.
pub fn canonicalize_diag_pair(
    dp: &DiagPair,
    tol: &ToleranceConfig,
    mut observer: Option<&mut dyn FnMut(&PairStep<'_>)>,
) -> Result<CanonicalPairResult> {
    let n = dp.lambda.len();
    let scale = dp.b.scale();
    let mut b = dp.b.clone();
    // The forward error of S^{-1} N S grows with the condition of S, so the
    // zero test is widened by it; entries below the threshold (diagonal
    // included) become exact zeros so that zero patterns compare exactly.
    let zero_threshold = tol.tol_zero * dp.condition.max(1.0);
    for p in 0..n {
        for q in 0..n {
            if approx_zero(b[(p, q)], scale, zero_threshold) {
                b[(p, q)] = ZERO;
            }
        }
    }

    let mut g = DiForest::new(n);
    let mut uf = LabeledUnionFind::new(n, LabelMode::Scale);
    let mut root_scale = vec![ONE; n];
    let mut ones = Vec::new();

    for p in 0..n {
        for q in 0..n {
            if p == q || b[(p, q)] == ZERO || g.connected(p, q)? {
                continue;
            }
            let before = cfg!(debug_assertions).then(|| b.clone());
            // multiply the scales of q's component by c = 1 / b_pq
            let c = ONE / b[(p, q)];
            let root_q = uf.resolve(q).0;
            let inside: Vec<bool> = (0..n).map(|v| uf.resolve(v).0 == root_q).collect();
            for r in 0..n {
                for k in 0..n {
                    match (inside[r], inside[k]) {
                        (false, true) => b[(r, k)] *= c,
                        (true, false) => b[(r, k)] /= c,
                        _ => {}
                    }
                }
            }
            b[(p, q)] = ONE;
            root_scale[root_q] *= c;
            let abs_p = root_scale[uf.resolve(p).0] * uf.resolve(p).1;
            let abs_q = root_scale[root_q] * uf.resolve(q).1;
            uf.union(p, q, abs_q / abs_p)?;
            g.add_edge(p, q)?;
            ones.push((p, q));

            if let Some(before) = before {
                let k = p * n + q;
                debug_assert!(
                    (0..k).all(|idx| b.as_slice()[idx] == before.as_slice()[idx]),
                    "entries before ({p}, {q}) changed"
                );
            }
            if let Some(obs) = observer.as_deref_mut() {
                let scales = vertex_labels(&mut uf, &root_scale);
                obs(&PairStep {
                    position: (p, q),
                    matrix: &b,
                    scales: &scales,
                });
            }
        }
    }

    b.normalize_zeros();
    let scales = vertex_labels(&mut uf, &root_scale);
    let mut s_total = dp.s.clone();
    for r in 0..n {
        for k in 0..n {
            s_total[(r, k)] *= scales[k];
        }
    }
    Ok(CanonicalPairResult {
        lambda: dp.lambda.clone(),
        b_can: b,
        g,
        s_total,
        ones,
        scale,
        condition: dp.condition,
        residual: dp.residual,
    })
}

fn vertex_labels(uf: &mut LabeledUnionFind, root_label: &[ComplexScalar]) -> Vec<ComplexScalar> {
    (0..uf.len())
        .map(|v| {
            let (r, f) = uf.resolve(v);
            root_label[r] * f
        })
        .collect()
}

/// True if `(r, c)` comes after `(p, q)` in row-major order.
fn row_major_after(r: (usize, usize), p: (usize, usize)) -> bool {
    r > p
}

/// Checks that `b` is canonical for the directed forest `g`: ones on the
/// edges, zeros wherever the undirected path between the endpoints is
/// missing or uses an edge later in row-major order, and increasing `lambda`.
pub fn is_g_canonical_pair(
    lambda: &[ComplexScalar],
    b: &ComplexMatrix,
    g: &DiForest,
    tol: &ToleranceConfig,
) -> bool {
    let n = lambda.len();
    if b.rows() != n || b.cols() != n || g.vertex_count() != n {
        return false;
    }
    let lambda_scale = lambda.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(f64::MIN_POSITIVE);
    if lambda
        .windows(2)
        .any(|w| !lex_compare_tol(w[0], w[1], tol.tol_eig * lambda_scale).is_lt())
    {
        return false;
    }
    let scale = b.scale();
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            if g.has_edge(p, q) {
                if (b[(p, q)] - ONE).norm() > tol.tol_zero {
                    return false;
                }
                continue;
            }
            let must_vanish = match g.tree_path(p, q) {
                Err(_) => true,
                Ok(path) => path.iter().any(|s| row_major_after(s.edge, (p, q))),
            };
            if must_vanish && !approx_zero(b[(p, q)], scale, tol.tol_zero) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSummand {
    pub lambda: Vec<ComplexScalar>,
    pub b: ComplexMatrix,
    /// The component of `g`, relabeled to `0..n_i`.
    pub tree: DiForest,
    /// Vertices of the component in the original numbering, ascending.
    pub original_vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairDecomposition {
    pub summands: Vec<PairSummand>,
    /// `permutation[k]` is the original index placed at position `k`.
    pub permutation: Vec<usize>,
}

/// Splits a canonical pair into the direct sum of its tree components.
pub fn decompose_pair(cpr: &CanonicalPairResult) -> Result<PairDecomposition> {
    let n = cpr.lambda.len();
    let comps = cpr.g.components();
    let mut comp_of = vec![0; n];
    for (k, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = k;
        }
    }
    for p in 0..n {
        for q in 0..n {
            if comp_of[p] != comp_of[q] && cpr.b_can[(p, q)] != ZERO {
                return Err(Error::NonzeroCrossBlock(p, q));
            }
        }
    }
    let mut permutation = Vec::with_capacity(n);
    let mut summands = Vec::with_capacity(comps.len());
    for comp in comps {
        let mut local = vec![usize::MAX; n];
        for (k, &v) in comp.iter().enumerate() {
            local[v] = k;
        }
        let mut tree = DiForest::new(comp.len());
        for &(p, q) in cpr.g.edge_list() {
            if local[p] != usize::MAX {
                tree.add_edge(local[p], local[q])?;
            }
        }
        permutation.extend_from_slice(&comp);
        summands.push(PairSummand {
            lambda: comp.iter().map(|&v| cpr.lambda[v]).collect(),
            b: cpr.b_can.select(&comp, &comp),
            tree,
            original_vertices: comp,
        });
    }
    Ok(PairDecomposition {
        summands,
        permutation,
    })
}

/// Structural and numerical distance between two canonical pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDiff {
    /// Same size, graph, ones and zero pattern.
    pub same_structure: bool,
    /// Max entrywise difference of `b_can` and `lambda`.
    pub max_entry_diff: f64,
}

pub fn compare_pairs(a: &CanonicalPairResult, b: &CanonicalPairResult) -> PairDiff {
    let same_size = a.lambda.len() == b.lambda.len();
    let same_structure = same_size
        && a.g.edge_list() == b.g.edge_list()
        && a.ones == b.ones
        && a
            .b_can
            .as_slice()
            .iter()
            .zip(b.b_can.as_slice())
            .all(|(x, y)| (*x == ZERO) == (*y == ZERO));
    let max_entry_diff = if same_size {
        let eig = a
            .lambda
            .iter()
            .zip(&b.lambda)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        a.b_can.max_abs_diff(&b.b_can).max(eig)
    } else {
        f64::INFINITY
    };
    PairDiff {
        same_structure,
        max_entry_diff,
    }
}

/// Decides similarity of pairs from canonical forms: exact structure, then
/// entries within `max(tol_zero, 1e-8)` relative to the larger scale.
pub fn same_canonical_pair(
    a: &CanonicalPairResult,
    b: &CanonicalPairResult,
    tol: &ToleranceConfig,
) -> bool {
    let d = compare_pairs(a, b);
    let scale = a
        .b_can
        .scale()
        .max(b.b_can.scale())
        .max(a.lambda.iter().chain(&b.lambda).fold(0.0f64, |m, z| m.max(z.norm())));
    d.same_structure && d.max_entry_diff <= tol.tol_zero.max(1e-8) * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn real(v: f64) -> ComplexScalar {
        c(v, 0.0)
    }

    #[test]
    fn diagonalize_examples() {
        let d = diagonalize_distinct(&ComplexMatrix::from_diagonal(&[real(2.0), ONE]), &tol()).unwrap();
        assert_eq!(d.lambda, vec![ONE, real(2.0)]);
        assert!(d.s.max_abs_diff(&ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])) < 1e-15);

        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 2.0]]);
        let d = diagonalize_distinct(&m, &tol()).unwrap();
        assert!((d.lambda[0] - ONE).norm() < 1e-14 && (d.lambda[1] - real(2.0)).norm() < 1e-14);
        let h = 0.5f64.sqrt();
        let expected = ComplexMatrix::from_real_rows(&[vec![1.0, h], vec![0.0, h]]);
        assert!(d.s.max_abs_diff(&expected) < 1e-14);
        let resid = solve(&d.s, &(&m * &d.s))
            .unwrap()
            .max_abs_diff(&ComplexMatrix::from_diagonal(&d.lambda));
        assert!(resid < 1e-14);

        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        assert!(matches!(
            diagonalize_distinct(&m, &tol()),
            Err(Error::RepeatedEigenvalue { .. })
        ));
    }

    #[test]
    fn two_by_two_pair() {
        let m = ComplexMatrix::from_diagonal(&[ONE, real(2.0)]);
        let n = ComplexMatrix::from_rows(&[vec![real(7.0), c(0.0, 3.0)], vec![ZERO, real(4.0)]]);
        let r = canonicalize_pair(&m, &n, &tol()).unwrap();
        assert_eq!(r.b_can, ComplexMatrix::from_real_rows(&[vec![7.0, 1.0], vec![0.0, 4.0]]));
        assert_eq!(r.g.edge_list(), &[(0, 1)]);
        assert_eq!(r.ones, vec![(0, 1)]);
        let back = solve(&r.s_total, &(&n * &r.s_total)).unwrap();
        assert!(back.max_abs_diff(&r.b_can) < 1e-14);
    }

    #[test]
    fn zero_second_matrix() {
        let m = ComplexMatrix::from_diagonal(&[ONE, real(2.0)]);
        let r = canonicalize_pair(&m, &ComplexMatrix::zeros(2, 2), &tol()).unwrap();
        assert_eq!(r.b_can, ComplexMatrix::zeros(2, 2));
        assert!(r.g.edge_list().is_empty());
    }

    #[test]
    fn first_row_becomes_ones() {
        let m = ComplexMatrix::from_diagonal(&[ONE, real(2.0), real(3.0), real(4.0)]);
        let mut n = ComplexMatrix::zeros(4, 4);
        for (k, v) in [c(2.0, 1.0), c(0.0, -3.0), c(0.5, 0.5), c(-1.0, 0.2)].into_iter().enumerate() {
            n[(0, k)] = v;
        }
        n[(2, 1)] = c(1.5, -1.0);
        let r = canonicalize_pair(&m, &n, &tol()).unwrap();
        assert_eq!(r.b_can[(0, 0)], c(2.0, 1.0));
        for q in 1..4 {
            assert_eq!(r.b_can[(0, q)], ONE);
        }
        assert_eq!(r.g.edge_list(), &[(0, 1), (0, 2), (0, 3)]);
        assert!(is_g_canonical_pair(&r.lambda, &r.b_can, &r.g, &tol()));
    }

    fn mixed_pattern_fixture() -> (Vec<ComplexScalar>, ComplexMatrix, DiForest) {
        let lambda: Vec<ComplexScalar> = (1..=5).map(|k| real(k as f64)).collect();
        let mut b = ComplexMatrix::zeros(5, 5);
        let mut star = 0.3;
        for p in 0..5 {
            for q in 0..5 {
                star += 0.17;
                b[(p, q)] = c(star, 1.0 - star);
            }
        }
        for &(p, q) in &[(1, 3), (1, 5), (2, 1), (4, 3)] {
            b[(p - 1, q - 1)] = ONE;
        }
        for &(p, q) in &[(1, 2), (1, 4), (2, 4), (3, 4), (4, 1), (4, 2)] {
            b[(p - 1, q - 1)] = ZERO;
        }
        let g = DiForest::from_edges(5, &[(1, 0), (0, 2), (3, 2), (0, 4)]).unwrap();
        (lambda, b, g)
    }

    #[test]
    fn example_pattern_is_canonical() {
        let (lambda, b, g) = mixed_pattern_fixture();
        assert!(is_g_canonical_pair(&lambda, &b, &g, &tol()));
        let mut bad = b.clone();
        bad[(0, 1)] = real(0.1);
        assert!(!is_g_canonical_pair(&lambda, &bad, &g, &tol()));

        let r = canonicalize_pair(&ComplexMatrix::from_diagonal(&lambda), &b, &tol()).unwrap();
        let mut edges = r.g.edge_list().to_vec();
        edges.sort();
        let mut expected = g.edge_list().to_vec();
        expected.sort();
        assert_eq!(edges, expected);
        assert!(r.b_can.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn edge_entry_must_be_one() {
        let lambda = vec![ONE, real(2.0)];
        let b = ComplexMatrix::from_real_rows(&[vec![0.0, 0.5], vec![0.0, 0.0]]);
        let g = DiForest::from_edges(2, &[(0, 1)]).unwrap();
        assert!(!is_g_canonical_pair(&lambda, &b, &g, &tol()));
    }

    #[test]
    fn observer_sees_prefix_stability() {
        let (lambda, b, _) = mixed_pattern_fixture();
        let d = ComplexMatrix::from_diagonal(&[ONE, c(0.0, 2.0), real(0.5), c(-3.0, 1.0), real(7.0)]);
        let dinv = crate::linalg::inverse(&d).unwrap();
        let dp = DiagPair {
            lambda,
            b: &(&dinv * &b) * &d,
            s: d.clone(),
            condition: 1.0,
            residual: 0.0,
        };
        let mut last: Option<ComplexMatrix> = None;
        let mut obs = |step: &PairStep<'_>| {
            let n = step.matrix.rows();
            let k = step.position.0 * n + step.position.1;
            if let Some(prev) = &last {
                assert!((0..k).all(|i| prev.as_slice()[i] == step.matrix.as_slice()[i]));
            }
            assert_eq!(step.matrix[step.position], ONE);
            last = Some(step.matrix.clone());
        };
        let r = canonicalize_diag_pair(&dp, &tol(), Some(&mut obs)).unwrap();
        assert!(r.b_can.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn decomposition_examples() {
        let m = ComplexMatrix::from_diagonal(&[ONE, real(2.0)]);
        let r = canonicalize_pair(&m, &ComplexMatrix::from_diagonal(&[real(3.0), real(4.0)]), &tol()).unwrap();
        let d = decompose_pair(&r).unwrap();
        assert_eq!(d.summands.len(), 2);

        let m = ComplexMatrix::from_diagonal(&[ONE, real(2.0), real(3.0)]);
        let mut n = ComplexMatrix::from_diagonal(&[ONE, ONE, ONE]);
        n[(0, 2)] = c(0.0, 4.0);
        n[(2, 0)] = real(2.0);
        let r = canonicalize_pair(&m, &n, &tol()).unwrap();
        let d = decompose_pair(&r).unwrap();
        assert_eq!(d.summands.len(), 2);
        assert_eq!(d.summands[0].original_vertices, vec![0, 2]);
        assert_eq!(d.summands[1].original_vertices, vec![1]);
        assert_eq!(d.permutation, vec![0, 2, 1]);
        assert_eq!(d.summands[0].b[(0, 1)], ONE);
        assert_eq!(d.summands[0].b[(1, 0)], c(0.0, 8.0));

        n[(0, 1)] = ONE;
        let r = canonicalize_pair(&m, &n, &tol()).unwrap();
        let d = decompose_pair(&r).unwrap();
        assert_eq!(d.summands.len(), 1);
        assert_eq!(d.permutation, vec![0, 1, 2]);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let m = ComplexMatrix::identity(2);
        assert!(matches!(
            canonicalize_pair(&ComplexMatrix::from_diagonal(&[ONE, real(2.0)]), &ComplexMatrix::zeros(3, 3), &tol()),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            canonicalize_pair(&m, &m, &tol()),
            Err(Error::RepeatedEigenvalue { .. })
        ));
    }
}
