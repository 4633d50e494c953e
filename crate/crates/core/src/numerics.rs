//! Complex scalars, the lexicographic order on them, tolerance policy and
//! dense row-major complex matrices.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

pub const ZERO: ComplexScalar = Complex64::new(0.0, 0.0);
pub const ONE: ComplexScalar = Complex64::new(1.0, 0.0);

/// Tolerances shared by every stage of the pipeline. All thresholds are
/// relative to a matrix scale (its max-abs entry) chosen by the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Eigenvalues closer than this are treated as equal.
    pub tol_eig: f64,
    /// Wider merge radius used only by the unitary pipeline: a size-m
    /// Jordan block's computed eigenvalues are spread by about
    /// `eps^(1/m)`. Every merged cluster is then validated by the
    /// backward error of its block triangularization.
    pub tol_cluster: f64,
    /// Zero-test threshold.
    pub tol_zero: f64,
    /// Accepted backward error of factorizations.
    pub tol_residual: f64,
    /// QR iterations allowed per eigenvalue; `None` means `30 * n`.
    pub max_qr_iters: Option<usize>,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            tol_eig: 1e-8,
            // admits the rounding spread of Jordan blocks up to size 3
            tol_cluster: 1e-4,
            tol_zero: 1e-10,
            tol_residual: 1e-10,
            max_qr_iters: None,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tol_eig", self.tol_eig),
            ("tol_cluster", self.tol_cluster),
            ("tol_zero", self.tol_zero),
            ("tol_residual", self.tol_residual),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidTolerance(format!("{name} = {v}")));
            }
        }
        if self.max_qr_iters == Some(0) {
            return Err(Error::InvalidTolerance("max_qr_iters = 0".into()));
        }
        Ok(())
    }

    /// Radius of eigenvalue clusters in the unitary pipeline.
    pub fn cluster_radius(&self) -> f64 {
        self.tol_eig.max(self.tol_cluster)
    }

    pub fn qr_iteration_limit(&self, n: usize) -> usize {
        self.max_qr_iters.unwrap_or(30 * n.max(1))
    }
}

/// Exact lexicographic order: real parts first, then imaginary parts.
pub fn lex_compare(a: ComplexScalar, b: ComplexScalar) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Lexicographic comparison in which coordinates closer than `eps` count as
/// equal. Not transitive; only meant for comparing neighbours.
pub fn lex_compare_tol(a: ComplexScalar, b: ComplexScalar, eps: f64) -> Ordering {
    if (a.re - b.re).abs() > eps {
        return a.re.total_cmp(&b.re);
    }
    if (a.im - b.im).abs() > eps {
        return a.im.total_cmp(&b.im);
    }
    Ordering::Equal
}

/// Order in which `values` should be listed so that the result is
/// lexicographically increasing, treating real parts that chain together
/// within `eps` as tied. Ties are broken by imaginary part.
///
/// Conjugate eigenvalue pairs of real matrices have equal real parts in exact
/// arithmetic but not after rounding; grouping keeps their order stable.
pub fn tolerant_lex_order(values: &[ComplexScalar], eps: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| lex_compare(values[a], values[b]).then(a.cmp(&b)));
    let mut out = Vec::with_capacity(values.len());
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]].re - values[idx[end - 1]].re <= eps {
            end += 1;
        }
        let mut group = idx[start..end].to_vec();
        group.sort_by(|&a, &b| {
            values[a]
                .im
                .total_cmp(&values[b].im)
                .then(values[a].re.total_cmp(&values[b].re))
                .then(a.cmp(&b))
        });
        out.extend(group);
        start = end;
    }
    out
}

pub fn approx_zero(z: ComplexScalar, scale: f64, tol_zero: f64) -> bool {
    z.norm() <= tol_zero * scale
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub representative: ComplexScalar,
    /// Input positions, ascending.
    pub members: Vec<usize>,
}

/// Single-linkage clustering of `values` with radius `tol_eig * scale`.
///
/// Representatives are member means, summed in exact lexicographic order of
/// the members so the result does not depend on input order.
pub fn cluster_values(values: &[ComplexScalar], scale: f64, tol_eig: f64) -> Result<Vec<Cluster>> {
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let radius = tol_eig * scale;
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|members| {
            let mut sorted: Vec<ComplexScalar> = members.iter().map(|&i| values[i]).collect();
            sorted.sort_by(|a, b| lex_compare(*a, *b));
            let sum: ComplexScalar = sorted.iter().fold(ZERO, |acc, v| acc + v);
            Cluster {
                representative: sum / members.len() as f64,
                members,
            }
        })
        .collect();

    for a in 0..clusters.len() {
        for b in a + 1..clusters.len() {
            let gap = (clusters[a].representative - clusters[b].representative).norm();
            if gap < 2.0 * radius {
                return Err(Error::ClusterAmbiguity(format!(
                    "clusters at {} and {} are {gap:e} apart, below twice the radius {radius:e}",
                    clusters[a].representative, clusters[b].representative
                )));
            }
        }
    }

    let reps: Vec<ComplexScalar> = clusters.iter().map(|c| c.representative).collect();
    let order = tolerant_lex_order(&reps, radius);
    let mut taken: Vec<Option<Cluster>> = clusters.drain(..).map(Some).collect();
    Ok(order.into_iter().map(|i| taken[i].take().unwrap()).collect())
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ComplexScalar>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:>12.5e}{:+.5e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<ComplexScalar>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteEntry {
                row: k / cols.max(1),
                col: k % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(values: &[ComplexScalar]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Builds a matrix from rows; panics on ragged input.
    pub fn from_rows(rows: &[Vec<ComplexScalar>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let rows: Vec<Vec<ComplexScalar>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn as_slice(&self) -> &[ComplexScalar] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[ComplexScalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Max-abs entry, or 1 for the zero matrix; used as the scale of
    /// relative tests.
    pub fn scale(&self) -> f64 {
        let s = self.max_abs();
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    pub fn scaled(&self, s: ComplexScalar) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn diagonal(&self) -> Vec<ComplexScalar> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                out[(i, j)] = self[(r, c)];
            }
        }
        out
    }

    /// Contiguous block `[r0, r1) x [c0, c1)`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        let rows: Vec<usize> = (r0..r1).collect();
        let cols: Vec<usize> = (c0..c1).collect();
        self.select(&rows, &cols)
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &ComplexMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    /// Max-abs entry of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// `max |(self^* self - I)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        let g = &self.adjoint() * self;
        g.max_abs_diff(&Self::identity(self.cols))
    }

    /// Strictly lower-triangular max-abs entry.
    pub fn lower_max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for r in 0..self.rows {
            for c in 0..r.min(self.cols) {
                m = m.max(self[(r, c)].norm());
            }
        }
        m
    }

    /// Replaces negative zeros by positive zeros, so that equal matrices
    /// are also bitwise equal.
    pub fn normalize_zeros(&mut self) {
        for z in &mut self.data {
            if z.re == 0.0 {
                z.re = 0.0;
            }
            if z.im == 0.0 {
                z.im = 0.0;
            }
        }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn trace(&self) -> ComplexScalar {
        self.diagonal().iter().sum()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = ComplexScalar;
    fn index(&self, (r, c): (usize, usize)) -> &ComplexScalar {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut ComplexScalar {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Shorthand for `Complex64::new`.
pub fn c(re: f64, im: f64) -> ComplexScalar {
    Complex64::new(re, im)
}
