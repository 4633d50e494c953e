//! Canonical form of a nonderogatory matrix under unitary similarity.
//!
//! After reduction to block form, the only remaining freedom is a block
//! scalar unitary `u_1 I (+) ... (+) u_t I`, which multiplies block `(i, j)`
//! by `u_i^{-1} u_j`. Off-diagonal blocks are visited superdiagonal by
//! superdiagonal; each nonzero block whose endpoints are not yet tied
//! together gets its leading entry made positive, and the edge `i - j` is
//! recorded. The recorded edges form a forest that labels the canonical form.

use crate::error::{Error, Result};
use crate::forests::{AcyclicGraph, Forest, LabelMode, LabeledUnionFind};
use crate::numerics::{
    approx_zero, lex_compare_tol, ComplexMatrix, ComplexScalar, ToleranceConfig, ONE, ZERO,
};
use crate::triangularize::{first_derogatory_block, obser_form, BlockPartition, ObserForm};

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalResult {
    pub m_can: ComplexMatrix,
    pub partition: BlockPartition,
    pub g: Forest,
    /// `u_total^* m u_total = m_can`.
    pub u_total: ComplexMatrix,
    /// Block positions reduced, in order; same as the edges of `g`.
    pub reduced_blocks: Vec<(usize, usize)>,
    /// Entry position of the positive marker inside each reduced block.
    pub marked: Vec<(usize, usize)>,
    /// Scale of the zero tests (max-abs entry of the input).
    pub scale: f64,
    pub residual: f64,
    pub unitarity_defect: f64,
}

/// Outcome of normalizing a single block by a unit scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct ObssReduction {
    pub c_out: ComplexMatrix,
    pub phase: ComplexScalar,
    /// Position inside the block of the entry made positive.
    pub marked: (usize, usize),
}

/// Upper blocks listed superdiagonal by superdiagonal:
/// `(0,1), (1,2), ..., (0,2), (1,3), ..., (0,t-1)`.
pub fn scan_order(t: usize) -> Vec<(usize, usize)> {
    (1..t)
        .flat_map(|d| (0..t - d).map(move |i| (i, i + d)))
        .collect()
}

/// True if block `later` is visited after block `(i, j)` in [`scan_order`].
fn scanned_after(later: (usize, usize), (i, j): (usize, usize)) -> bool {
    let (u, v) = (later.0.min(later.1), later.0.max(later.1));
    v - u > j - i || (v - u == j - i && u > i)
}

/// Entries of a `p x q` block along its diagonals, starting from the lower
/// left corner, each diagonal read top to bottom.
pub fn antidiagonal_scan(p: usize, q: usize) -> impl Iterator<Item = (usize, usize)> {
    let (p, q) = (p as isize, q as isize);
    (-(p - 1)..q).flat_map(move |d| {
        let r0 = (-d).max(0);
        let r1 = p.min(q - d);
        (r0..r1).map(move |r| (r as usize, (r + d) as usize))
    })
}

/// Multiplies `c` by the unit scalar that turns its first non-negligible
/// entry in [`antidiagonal_scan`] order into a positive real.
pub fn obss_reduce(c: &ComplexMatrix, scale: f64, tol: &ToleranceConfig) -> Result<ObssReduction> {
    let marked = antidiagonal_scan(c.rows(), c.cols())
        .find(|&pos| !approx_zero(c[pos], scale, tol.tol_zero))
        .ok_or(Error::AllZero)?;
    let v = c[marked];
    let phase = v.conj() / v.norm();
    let mut c_out = c.scaled(phase);
    c_out[marked] = ComplexScalar::new(v.norm(), 0.0);
    Ok(ObssReduction {
        c_out,
        phase,
        marked,
    })
}

fn block_is_zero(a: &ComplexMatrix, p: &BlockPartition, i: usize, j: usize, scale: f64, tol: f64) -> bool {
    let (ri, rj) = (p.range(i), p.range(j));
    ri.clone()
        .all(|r| rj.clone().all(|c| approx_zero(a[(r, c)], scale, tol)))
}

fn block_is_exact_zero(a: &ComplexMatrix, p: &BlockPartition, i: usize, j: usize) -> bool {
    let (ri, rj) = (p.range(i), p.range(j));
    ri.clone().all(|r| rj.clone().all(|c| a[(r, c)] == ZERO))
}

fn set_block_zero(a: &mut ComplexMatrix, p: &BlockPartition, i: usize, j: usize) {
    for r in p.range(i) {
        for c in p.range(j) {
            a[(r, c)] = ZERO;
        }
    }
}

fn scale_block(a: &mut ComplexMatrix, p: &BlockPartition, i: usize, j: usize, f: ComplexScalar) {
    for r in p.range(i) {
        for c in p.range(j) {
            a[(r, c)] *= f;
        }
    }
}

/// State handed to an observer after every reduction step.
pub struct UnitaryStep<'a> {
    pub position: (usize, usize),
    pub matrix: &'a ComplexMatrix,
    /// Accumulated phase of every block.
    pub phases: &'a [ComplexScalar],
}

/// Canonical form of a nonderogatory matrix under unitary similarity.
pub fn canonicalize_unitary(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<CanonicalResult> {
    let o = obser_form(m, tol)?;
    canonicalize_obser(m, &o, tol, None)
}

/// Runs the block reduction on an already computed block form `o` of `m`.
pub fn canonicalize_obser(
    m: &ComplexMatrix,
    o: &ObserForm,
    tol: &ToleranceConfig,
    mut observer: Option<&mut dyn FnMut(&UnitaryStep<'_>)>,
) -> Result<CanonicalResult> {
    if let Some(b) = first_derogatory_block(o, tol) {
        return Err(Error::NotNonderogatory {
            eigenvalue: o.partition.eigenvalues[b].to_string(),
        });
    }
    let part = &o.partition;
    let t = part.t();
    let scale = o.scale;
    let mut a = o.a.clone();
    for (i, j) in scan_order(t) {
        if block_is_zero(&a, part, i, j, scale, tol.tol_zero) {
            set_block_zero(&mut a, part, i, j);
        }
    }

    let mut g = Forest::new(t);
    let mut uf = LabeledUnionFind::new(t, LabelMode::Phase);
    let mut root_phase = vec![ONE; t];
    let mut reduced_blocks = Vec::new();
    let mut marked = Vec::new();

    for (i, j) in scan_order(t) {
        if block_is_exact_zero(&a, part, i, j) || g.connected(i, j)? {
            continue;
        }
        let (ri, rj) = (part.range(i), part.range(j));
        let block = a.block(ri.start, ri.end, rj.start, rj.end);
        let red = obss_reduce(&block, scale, tol)?;

        // multiply the phases of j's component by `phase`
        let root_j = uf.resolve(j).0;
        let inside: Vec<bool> = (0..t).map(|v| uf.resolve(v).0 == root_j).collect();
        for (p, q) in scan_order(t) {
            match (inside[p], inside[q]) {
                (false, true) => scale_block(&mut a, part, p, q, red.phase),
                (true, false) => scale_block(&mut a, part, p, q, red.phase.conj()),
                _ => {}
            }
        }
        a.set_block(ri.start, rj.start, &red.c_out);
        root_phase[root_j] *= red.phase;
        let abs_i = root_phase[uf.resolve(i).0] * uf.resolve(i).1;
        let abs_j = root_phase[root_j] * uf.resolve(j).1;
        uf.union(i, j, abs_j / abs_i)?;
        g.add_edge(i, j)?;
        reduced_blocks.push((i, j));
        marked.push((ri.start + red.marked.0, rj.start + red.marked.1));

        if let Some(obs) = observer.as_deref_mut() {
            let phases: Vec<ComplexScalar> = (0..t)
                .map(|v| {
                    let (r, f) = uf.resolve(v);
                    root_phase[r] * f
                })
                .collect();
            obs(&UnitaryStep {
                position: (i, j),
                matrix: &a,
                phases: &phases,
            });
        }
    }

    a.normalize_zeros();
    let block = part.block_of();
    let phases: Vec<ComplexScalar> = (0..t)
        .map(|v| {
            let (r, f) = uf.resolve(v);
            root_phase[r] * f
        })
        .collect();
    let mut u_total = o.u.clone();
    for r in 0..u_total.rows() {
        for c in 0..u_total.cols() {
            u_total[(r, c)] *= phases[block[c]];
        }
    }
    let residual = (&(&u_total.adjoint() * m) * &u_total).max_abs_diff(&a);
    let unitarity_defect = u_total.unitarity_defect();
    Ok(CanonicalResult {
        m_can: a,
        partition: part.clone(),
        g,
        u_total,
        reduced_blocks,
        marked,
        scale,
        residual,
        unitarity_defect,
    })
}

/// Checks that `a` is canonical for the forest `g`: block form with positive
/// within-block superdiagonals and increasing eigenvalues, a positive leading
/// entry in every edge block, and zero blocks wherever the path between the
/// block's endpoints is missing or uses an edge scanned after the block.
pub fn is_g_canonical(
    a: &ComplexMatrix,
    partition: &BlockPartition,
    g: &Forest,
    tol: &ToleranceConfig,
) -> bool {
    let n = partition.n();
    let t = partition.t();
    if !a.is_square() || a.rows() != n || g.vertex_count() != t {
        return false;
    }
    let scale = a.scale();
    let zero = |z: ComplexScalar| approx_zero(z, scale, tol.tol_zero);
    let block = partition.block_of();

    for r in 0..n {
        for c in 0..r {
            if !zero(a[(r, c)]) {
                return false;
            }
        }
        if !zero(a[(r, r)] - partition.eigenvalues[block[r]]) {
            return false;
        }
        if r + 1 < n && block[r] == block[r + 1] {
            let s = a[(r, r + 1)];
            if !zero(ComplexScalar::new(0.0, s.im)) || s.re <= tol.tol_zero * scale {
                return false;
            }
        }
    }
    let eps = tol.tol_eig * scale;
    if partition
        .eigenvalues
        .windows(2)
        .any(|w| !lex_compare_tol(w[0], w[1], eps).is_lt())
    {
        return false;
    }

    for (i, j) in scan_order(t) {
        let (ri, rj) = (partition.range(i), partition.range(j));
        if g.has_edge(i, j) {
            let c = a.block(ri.start, ri.end, rj.start, rj.end);
            let lead = antidiagonal_scan(c.rows(), c.cols()).find(|&p| !zero(c[p]));
            match lead {
                Some(p) if zero(ComplexScalar::new(0.0, c[p].im)) && c[p].re > 0.0 => {}
                _ => return false,
            }
            continue;
        }
        let must_vanish = match g.tree_path(i, j) {
            Err(_) => true,
            Ok(path) => path.iter().any(|s| scanned_after(s.edge, (i, j))),
        };
        if must_vanish && !block_is_zero(a, partition, i, j, scale, tol.tol_zero) {
            return false;
        }
    }
    true
}

/// One indecomposable summand of a canonical matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalBlockSummand {
    /// The component of `g`, relabeled to `0..t_i`.
    pub tree: Forest,
    pub matrix: ComplexMatrix,
    pub partition: BlockPartition,
    /// Block indices of the component in the original numbering, ascending.
    pub original_vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryDecomposition {
    pub summands: Vec<CanonicalBlockSummand>,
    /// `permutation[k]` is the original entry index placed at position `k`.
    pub permutation: Vec<usize>,
}

/// Splits a canonical matrix into the direct sum of its tree components.
pub fn decompose(cr: &CanonicalResult) -> Result<UnitaryDecomposition> {
    let part = &cr.partition;
    let comps = cr.g.components();
    let mut comp_of = vec![0; part.t()];
    for (k, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = k;
        }
    }
    for (i, j) in scan_order(part.t()) {
        if comp_of[i] != comp_of[j] && !block_is_exact_zero(&cr.m_can, part, i, j) {
            let scale = cr.m_can.scale();
            if !block_is_zero(&cr.m_can, part, i, j, scale, 1e-10) {
                return Err(Error::NonzeroCrossBlock(i, j));
            }
        }
    }

    let mut permutation = Vec::with_capacity(part.n());
    let mut summands = Vec::with_capacity(comps.len());
    for comp in comps {
        let mut local = vec![usize::MAX; part.t()];
        for (k, &v) in comp.iter().enumerate() {
            local[v] = k;
        }
        let mut tree = Forest::new(comp.len());
        for &(p, q) in cr.g.edge_list() {
            if local[p] != usize::MAX {
                tree.add_edge(local[p], local[q])?;
            }
        }
        let idx: Vec<usize> = comp.iter().flat_map(|&v| part.range(v)).collect();
        let matrix = cr.m_can.select(&idx, &idx);
        permutation.extend_from_slice(&idx);
        summands.push(CanonicalBlockSummand {
            tree,
            matrix,
            partition: BlockPartition::new(
                comp.iter().map(|&v| part.sizes[v]).collect(),
                comp.iter().map(|&v| part.eigenvalues[v]).collect(),
            )?,
            original_vertices: comp,
        });
    }
    Ok(UnitaryDecomposition {
        summands,
        permutation,
    })
}

/// Rebuilds the canonical matrix from its summands: places `A_1 (+) ... (+) A_s`
/// and undoes the permutation.
pub fn reassemble(matrices: &[&ComplexMatrix], permutation: &[usize]) -> ComplexMatrix {
    let n = permutation.len();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut offset = 0;
    for m in matrices {
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                out[(permutation[offset + r], permutation[offset + c])] = m[(r, c)];
            }
        }
        offset += m.rows();
    }
    out
}

/// Structural and numerical distance between two canonical results.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalDiff {
    /// Same block sizes, graph, marked entries and zero-block pattern.
    pub same_structure: bool,
    /// Max entrywise difference of the canonical matrices and eigenvalues.
    pub max_entry_diff: f64,
}

pub fn compare_canonical(a: &CanonicalResult, b: &CanonicalResult) -> CanonicalDiff {
    let same_shape = a.partition.sizes == b.partition.sizes;
    let same_structure = same_shape
        && a.g.edge_list() == b.g.edge_list()
        && a.marked == b.marked
        && scan_order(a.partition.t()).into_iter().all(|(i, j)| {
            block_is_exact_zero(&a.m_can, &a.partition, i, j)
                == block_is_exact_zero(&b.m_can, &b.partition, i, j)
        });
    let max_entry_diff = if same_shape {
        let eig = a
            .partition
            .eigenvalues
            .iter()
            .zip(&b.partition.eigenvalues)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        a.m_can.max_abs_diff(&b.m_can).max(eig)
    } else {
        f64::INFINITY
    };
    CanonicalDiff {
        same_structure,
        max_entry_diff,
    }
}

/// Decides unitary similarity from canonical forms: exact structure, then
/// entries within `max(tol_zero, 1e-8)` relative to the larger scale.
pub fn same_canonical_form(a: &CanonicalResult, b: &CanonicalResult, tol: &ToleranceConfig) -> bool {
    let d = compare_canonical(a, b);
    let scale = a.m_can.scale().max(b.m_can.scale());
    d.same_structure && d.max_entry_diff <= tol.tol_zero.max(1e-8) * scale
}
