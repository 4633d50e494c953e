//! Independent equivalence oracles and seeded instance generators.
//!
//! The oracles decide equivalence by solving the defining scalar equations
//! directly (`B_ij = u_i^{-1} u_j A_ij` for block phases, `b2_pq = s_p^{-1}
//! s_q b_pq` for diagonal scalings) through constraint propagation, without
//! using the canonicalization code.
//!
//! Generators use ChaCha8 seeded with `seed_from_u64(seed)`; every draw site
//! (generator function) selects its own stream with `set_stream`, so the
//! same seed gives independent sequences for different generators and a
//! fixed sequence for each generator across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::forests::{LabelMode, LabeledUnionFind};
use crate::linalg::qr;
use crate::numerics::{approx_zero, lex_compare, ComplexMatrix, ComplexScalar, ToleranceConfig, ONE, ZERO};
use crate::triangularize::BlockPartition;

const STREAM_UNITARY: u64 = 1;
const STREAM_OBSER: u64 = 2;
const STREAM_PARTITION: u64 = 3;
const STREAM_DIAG_PAIR: u64 = 4;
const STREAM_SIMILARITY: u64 = 5;
const STREAM_PHASES: u64 = 6;
const STREAM_SCALES: u64 = 7;

/// Longest word accepted by [`trace_word_invariants`].
pub const MAX_WORD_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleVerdict {
    pub equivalent: bool,
    /// Per-vertex factors realizing the equivalence; each component is
    /// normalized so its smallest vertex has factor 1.
    pub witness: Option<Vec<ComplexScalar>>,
    /// The violated constraint when not equivalent.
    pub certificate: Option<String>,
}

impl OracleVerdict {
    fn reject(reason: String) -> Self {
        Self {
            equivalent: false,
            witness: None,
            certificate: Some(reason),
        }
    }
}

fn threshold(tol: &ToleranceConfig) -> f64 {
    tol.tol_zero.max(1e-8)
}

fn normalized_witness(uf: &mut LabeledUnionFind) -> Vec<ComplexScalar> {
    let n = uf.len();
    let mut first_factor: Vec<Option<ComplexScalar>> = vec![None; n];
    (0..n)
        .map(|v| {
            let (r, f) = uf.resolve(v);
            let base = *first_factor[r].get_or_insert(f);
            f / base
        })
        .collect()
}

/// Propagates `factor(q) / factor(p) = ratio` constraints; reports the first
/// inconsistent cycle.
fn propagate(
    n: usize,
    mode: LabelMode,
    constraints: &[(usize, usize, ComplexScalar)],
    rel_tol: f64,
) -> OracleVerdict {
    let mut uf = LabeledUnionFind::new(n, mode);
    for &(p, q, ratio) in constraints {
        match uf.relative(p, q) {
            Some(existing) => {
                if (existing - ratio).norm() > rel_tol * ratio.norm() {
                    return OracleVerdict::reject(format!(
                        "cycle through ({}, {}) requires ratio {ratio} but the path gives {existing}",
                        p + 1,
                        q + 1
                    ));
                }
            }
            None => {
                if let Err(e) = uf.union(p, q, ratio) {
                    return OracleVerdict::reject(e.to_string());
                }
            }
        }
    }
    OracleVerdict {
        equivalent: true,
        witness: Some(normalized_witness(&mut uf)),
        certificate: None,
    }
}

/// Decides whether unit scalars `u_1..u_t` exist with
/// `B_ij = u_i^{-1} u_j A_ij` for all off-diagonal blocks and `B_ii = A_ii`.
pub fn phase_match_oracle(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    partition: &BlockPartition,
    tol: &ToleranceConfig,
) -> Result<OracleVerdict> {
    let n = partition.n();
    for (name, m) in [("a", a), ("b", b)] {
        if m.rows() != n || m.cols() != n {
            return Err(Error::ShapeMismatch(format!(
                "{name} is {}x{}, partition covers {n}",
                m.rows(),
                m.cols()
            )));
        }
    }
    let scale = a.scale().max(b.scale());
    let thr = threshold(tol);
    let t = partition.t();
    let mut constraints = Vec::new();
    for i in 0..t {
        for j in 0..t {
            let (ri, rj) = (partition.range(i), partition.range(j));
            let entries: Vec<(ComplexScalar, ComplexScalar)> = ri
                .clone()
                .flat_map(|r| rj.clone().map(move |c| (r, c)))
                .map(|pos| (a[pos], b[pos]))
                .collect();
            if i == j {
                if entries.iter().any(|(x, y)| (x - y).norm() > thr * scale) {
                    return Ok(OracleVerdict::reject(format!(
                        "diagonal blocks {} differ",
                        i + 1
                    )));
                }
                continue;
            }
            let a_zero = entries.iter().all(|(x, _)| approx_zero(*x, scale, tol.tol_zero));
            let b_zero = entries.iter().all(|(_, y)| approx_zero(*y, scale, tol.tol_zero));
            match (a_zero, b_zero) {
                (true, true) => continue,
                (true, false) | (false, true) => {
                    return Ok(OracleVerdict::reject(format!(
                        "block ({}, {}) is zero in only one matrix",
                        i + 1,
                        j + 1
                    )));
                }
                (false, false) => {}
            }
            let (pa, pb) = entries
                .iter()
                .copied()
                .max_by(|x, y| x.0.norm().total_cmp(&y.0.norm()))
                .unwrap();
            let c = pb / pa;
            if (c.norm() - 1.0).abs() > thr {
                return Ok(OracleVerdict::reject(format!(
                    "block ({}, {}) ratio {c} is not unimodular",
                    i + 1,
                    j + 1
                )));
            }
            if entries.iter().any(|(x, y)| (y - c * x).norm() > thr * scale) {
                return Ok(OracleVerdict::reject(format!(
                    "block ({}, {}) is not a scalar multiple of its counterpart",
                    i + 1,
                    j + 1
                )));
            }
            constraints.push((i, j, c / c.norm()));
        }
    }
    Ok(propagate(t, LabelMode::Phase, &constraints, thr))
}

/// Decides whether nonzero `s_1..s_n` exist with `b2_pq = s_p^{-1} s_q b_pq`.
pub fn scale_match_oracle(
    b: &ComplexMatrix,
    b2: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<OracleVerdict> {
    let n = b.ensure_square()?;
    if b2.rows() != n || b2.cols() != n {
        return Err(Error::ShapeMismatch(format!(
            "b is {n}x{n} but b2 is {}x{}",
            b2.rows(),
            b2.cols()
        )));
    }
    let (s1, s2) = (b.scale(), b2.scale());
    let thr = threshold(tol);
    let mut constraints = Vec::new();
    for p in 0..n {
        if (b[(p, p)] - b2[(p, p)]).norm() > thr * s1.max(s2) {
            return Ok(OracleVerdict::reject(format!("diagonal entries {} differ", p + 1)));
        }
        for q in 0..n {
            if p == q {
                continue;
            }
            let (x, y) = (b[(p, q)], b2[(p, q)]);
            match (approx_zero(x, s1, tol.tol_zero), approx_zero(y, s2, tol.tol_zero)) {
                (true, true) => {}
                (false, false) => constraints.push((p, q, y / x)),
                _ => {
                    return Ok(OracleVerdict::reject(format!(
                        "entry ({}, {}) is zero in only one matrix",
                        p + 1,
                        q + 1
                    )))
                }
            }
        }
    }
    Ok(propagate(n, LabelMode::Scale, &constraints, thr))
}

/// [`scale_match_oracle`] for two diagonal pairs, first checking that the
/// eigenvalue lists agree.
pub fn diag_pair_oracle(
    lambda1: &[ComplexScalar],
    b1: &ComplexMatrix,
    lambda2: &[ComplexScalar],
    b2: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<OracleVerdict> {
    let scale = lambda1.iter().chain(lambda2).fold(1.0f64, |m, z| m.max(z.norm()));
    if lambda1.len() != lambda2.len()
        || lambda1
            .iter()
            .zip(lambda2)
            .any(|(x, y)| (x - y).norm() > threshold(tol) * scale)
    {
        return Ok(OracleVerdict::reject(String::from("eigenvalues differ")));
    }
    scale_match_oracle(b1, b2, tol)
}

/// Traces of all words of length `1..=max_len` in `X = m` and `X* = m^*`,
/// in shortlex order with `X < X*`. Words are spelled like `"XX*X"`.
pub fn trace_word_invariants(
    m: &ComplexMatrix,
    max_len: usize,
) -> Result<Vec<(String, ComplexScalar)>> {
    if max_len > MAX_WORD_LEN {
        return Err(Error::LengthTooLarge(max_len));
    }
    m.ensure_square()?;
    let letters = [("X", m.clone()), ("X*", m.adjoint())];
    let mut out = Vec::new();
    let mut level: Vec<(String, ComplexMatrix)> = vec![(String::new(), ComplexMatrix::identity(m.rows()))];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (word, prod) in &level {
            for (name, letter) in &letters {
                next.push((format!("{word}{name}"), prod * letter));
            }
        }
        out.extend(next.iter().map(|(w, p)| (w.clone(), p.trace())));
        level = next;
    }
    Ok(out)
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Complex standard normal: real and imaginary parts `N(0, 1/2)`.
fn complex_normal(r: &mut ChaCha8Rng) -> ComplexScalar {
    let re: f64 = StandardNormal.sample(r);
    let im: f64 = StandardNormal.sample(r);
    ComplexScalar::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn unit_phase(r: &mut ChaCha8Rng) -> ComplexScalar {
    ComplexScalar::from_polar(1.0, r.random_range(0.0..std::f64::consts::TAU))
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of `R`'s diagonal moved into `Q`.
pub fn random_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let mut r = rng(seed, STREAM_UNITARY);
    let g = ComplexMatrix::new(n, n, (0..n * n).map(|_| complex_normal(&mut r)).collect())
        .expect("finite gaussian entries");
    let (mut q, rr) = qr(&g);
    for k in 0..n {
        let d = rr[(k, k)];
        let ph = if d == ZERO { ONE } else { d / d.norm() };
        for i in 0..n {
            q[(i, k)] *= ph;
        }
    }
    q
}

/// `count` lexicographically increasing values in `[-2, 2]^2`, pairwise at
/// least `min_gap` apart, with real parts at least `min_gap / 10` apart so
/// that the order is robust to rounding.
fn distinct_values(r: &mut ChaCha8Rng, count: usize, min_gap: f64) -> Vec<ComplexScalar> {
    let mut vals: Vec<ComplexScalar> = Vec::with_capacity(count);
    while vals.len() < count {
        let z = ComplexScalar::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        if vals
            .iter()
            .all(|v| (v - z).norm() >= min_gap && (v.re - z.re).abs() >= min_gap / 10.0)
        {
            vals.push(z);
        }
    }
    vals.sort_by(|a, b| lex_compare(*a, *b));
    vals
}

/// Random partition of `n` into blocks of size 1 to 3 with distinct,
/// increasing eigenvalues at pairwise distance at least 0.1.
pub fn random_partition(n: usize, seed: u64) -> BlockPartition {
    let mut r = rng(seed, STREAM_PARTITION);
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = r.random_range(1..=left.min(3));
        sizes.push(s);
        left -= s;
    }
    let eigenvalues = distinct_values(&mut r, sizes.len(), 0.1);
    BlockPartition::new(sizes, eigenvalues).expect("valid partition")
}

/// Block form for `partition`: constant diagonal per block, within-block
/// superdiagonal in `[0.5, 2]`, other within-block upper entries random,
/// off-diagonal upper blocks nonzero with probability `fill_density`.
pub fn random_obser_form(partition: &BlockPartition, fill_density: f64, seed: u64) -> ComplexMatrix {
    let mut r = rng(seed, STREAM_OBSER);
    let n = partition.n();
    let block = partition.block_of();
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..partition.t() {
        for j in i + 1..partition.t() {
            if r.random_bool(fill_density.clamp(0.0, 1.0)) {
                for row in partition.range(i) {
                    for col in partition.range(j) {
                        a[(row, col)] = complex_normal(&mut r);
                    }
                }
            }
        }
    }
    for row in 0..n {
        a[(row, row)] = partition.eigenvalues[block[row]];
        for col in row + 1..n {
            if block[col] != block[row] {
                break;
            }
            a[(row, col)] = if col == row + 1 {
                ComplexScalar::new(r.random_range(0.5..=2.0), 0.0)
            } else {
                complex_normal(&mut r)
            };
        }
    }
    a
}

/// [`random_obser_form`] conjugated by [`random_unitary`]: `U A U^*`.
pub fn random_nonderogatory(partition: &BlockPartition, fill_density: f64, seed: u64) -> ComplexMatrix {
    let a = random_obser_form(partition, fill_density, seed);
    let u = random_unitary(partition.n(), seed);
    &(&u * &a) * &u.adjoint()
}

/// `(diag(lambda), b)`: eigenvalues increasing with gaps at least 0.1; each
/// entry of `b` is nonzero with probability `fill_density`, with modulus in
/// `[0.5, 2]` and uniform phase.
pub fn random_diag_pair(n: usize, fill_density: f64, seed: u64) -> (ComplexMatrix, ComplexMatrix) {
    let mut r = rng(seed, STREAM_DIAG_PAIR);
    let lambda = distinct_values(&mut r, n, 0.1);
    let mut b = ComplexMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..n {
            if r.random_bool(fill_density.clamp(0.0, 1.0)) {
                let modulus = r.random_range(0.5..=2.0);
                b[(p, q)] = unit_phase(&mut r) * modulus;
            }
        }
    }
    (ComplexMatrix::from_diagonal(&lambda), b)
}

/// `U diag(sigma) V` with Haar `U`, `V` and singular values log-uniform in
/// `[1, max_cond]`, so the 2-norm condition number is at most `max_cond`.
pub fn random_similarity(n: usize, max_cond: f64, seed: u64) -> ComplexMatrix {
    let mut r = rng(seed, STREAM_SIMILARITY);
    let hi = max_cond.max(1.0).ln();
    let sigma: Vec<ComplexScalar> = (0..n)
        .map(|_| ComplexScalar::new(r.random_range(0.0..=hi).exp(), 0.0))
        .collect();
    let u = random_unitary(n, r.random());
    let v = random_unitary(n, r.random());
    &(&u * &ComplexMatrix::from_diagonal(&sigma)) * &v
}

/// `count` uniform unit phases.
pub fn random_phases(count: usize, seed: u64) -> Vec<ComplexScalar> {
    let mut r = rng(seed, STREAM_PHASES);
    (0..count).map(|_| unit_phase(&mut r)).collect()
}

/// `count` nonzero scales with modulus log-uniform in `[lo, hi]` and uniform phase.
pub fn random_scales(count: usize, lo: f64, hi: f64, seed: u64) -> Vec<ComplexScalar> {
    let mut r = rng(seed, STREAM_SCALES);
    (0..count)
        .map(|_| unit_phase(&mut r) * r.random_range(lo.ln()..=hi.ln()).exp())
        .collect()
}

/// `D^{-1} a D` for `D = u_1 I (+) ... (+) u_t I`.
pub fn apply_block_factors(
    a: &ComplexMatrix,
    partition: &BlockPartition,
    u: &[ComplexScalar],
) -> ComplexMatrix {
    let block = partition.block_of();
    let mut out = a.clone();
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            out[(r, c)] = a[(r, c)] * u[block[c]] / u[block[r]];
        }
    }
    out
}

/// `D^{-1} b D` for `D = diag(s)`.
pub fn apply_diagonal_scaling(b: &ComplexMatrix, s: &[ComplexScalar]) -> ComplexMatrix {
    let mut out = b.clone();
    for r in 0..b.rows() {
        for c in 0..b.cols() {
            out[(r, c)] = b[(r, c)] * s[c] / s[r];
        }
    }
    out
}
