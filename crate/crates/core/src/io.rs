//! JSON documents for matrices and canonicalization results.
//!
//! Complex numbers are `[re, im]` pairs. Numbers are written as the shortest
//! decimal that round-trips and parsed to the nearest binary64, so every
//! numeric payload survives `parse(serialize(x))` bit for bit. Graph
//! vertices and matrix positions are 1-based in documents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forests::{AcyclicGraph, DiForest, Forest};
use crate::numerics::{ComplexMatrix, ComplexScalar, ToleranceConfig};
use crate::pair::{CanonicalPairResult, CONDITION_WARNING};
use crate::triangularize::BlockPartition;
use crate::unitary::{CanonicalResult, UnitaryDecomposition};

pub const SCHEMA_VERSION: &str = "1";
pub const KIND_UNITARY: &str = "unitary-canonical";
pub const KIND_PAIR: &str = "pair-canonical";
pub const KIND_DECOMPOSITION: &str = "unitary-decomposition";

fn schema_version() -> String {
    SCHEMA_VERSION.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    #[serde(default = "schema_version")]
    pub schema_version: String,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixDocument {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            schema_version: schema_version(),
            rows: m.rows(),
            cols: m.cols(),
            entries: (0..m.rows())
                .map(|r| m.row(r).iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    pub fn from_vector(v: &[ComplexScalar]) -> Self {
        Self::from_matrix(&ComplexMatrix::new(1, v.len(), v.to_vec()).expect("finite vector"))
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.entries.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "expected {} rows, found {}",
                self.rows,
                self.entries.len()
            )));
        }
        let mut data = Vec::with_capacity(self.rows * self.cols);
        for (r, row) in self.entries.iter().enumerate() {
            if row.len() != self.cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has {} entries, expected {}",
                    r + 1,
                    row.len(),
                    self.cols
                )));
            }
            for (c, &[re, im]) in row.iter().enumerate() {
                if !re.is_finite() || !im.is_finite() {
                    return Err(Error::NonFiniteEntry { row: r + 1, col: c + 1 });
                }
                data.push(ComplexScalar::new(re, im));
            }
        }
        ComplexMatrix::new(self.rows, self.cols, data)
    }

    pub fn to_vector(&self) -> Result<Vec<ComplexScalar>> {
        let m = self.to_matrix()?;
        if m.rows() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected a 1-row vector, found {} rows",
                m.rows()
            )));
        }
        Ok(m.as_slice().to_vec())
    }
}

/// Number or string as found in an input entry; strings are only accepted
/// to report non-finite markers such as `"NaN"` precisely.
#[derive(Deserialize)]
#[serde(untagged)]
enum RawNumber {
    Number(f64),
    Text(String),
}

#[derive(Deserialize)]
struct RawMatrixDocument {
    #[serde(default = "schema_version")]
    schema_version: String,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Vec<RawNumber>>>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses a matrix document.
pub fn parse_matrix_document(text: &str) -> Result<MatrixDocument> {
    let raw: RawMatrixDocument = serde_json::from_str(text).map_err(parse_error)?;
    let mut entries = Vec::with_capacity(raw.entries.len());
    for (r, row) in raw.entries.into_iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (c, entry) in row.into_iter().enumerate() {
            if entry.len() != 2 {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({}, {}) has {} components, expected [re, im]",
                    r + 1,
                    c + 1,
                    entry.len()
                )));
            }
            let mut pair = [0.0; 2];
            for (k, x) in entry.into_iter().enumerate() {
                pair[k] = match x {
                    RawNumber::Number(v) => v,
                    RawNumber::Text(s) => {
                        let marker = s.trim_start_matches(['+', '-']).to_ascii_lowercase();
                        if ["nan", "inf", "infinity"].contains(&marker.as_str()) {
                            return Err(Error::NonFiniteEntry { row: r + 1, col: c + 1 });
                        }
                        return Err(Error::Parse {
                            line: 0,
                            column: 0,
                            message: format!("entry ({}, {}) contains the string {s:?}", r + 1, c + 1),
                        });
                    }
                };
            }
            out.push(pair);
        }
        entries.push(out);
    }
    let doc = MatrixDocument {
        schema_version: raw.schema_version,
        rows: raw.rows,
        cols: raw.cols,
        entries,
    };
    doc.to_matrix()?;
    Ok(doc)
}

/// Parses a matrix document into a matrix.
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    parse_matrix_document(text)?.to_matrix()
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents always serialize");
    s.push('\n');
    s
}

pub fn serialize_matrix(m: &ComplexMatrix) -> String {
    to_pretty(&MatrixDocument::from_matrix(m))
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MatricesDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_can: Option<MatrixDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<MatrixDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_can: Option<MatrixDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_total: Option<MatrixDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_total: Option<MatrixDocument>,
}

/// `[p, q]` for an undirected edge, `[p, q, "->"]` for a directed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphEdge {
    Directed(usize, usize, String),
    Undirected(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: usize,
    pub edges: Vec<GraphEdge>,
}

impl GraphDocument {
    fn undirected(g: &Forest) -> Self {
        Self {
            vertices: g.vertex_count(),
            edges: g
                .edge_list()
                .iter()
                .map(|&(p, q)| GraphEdge::Undirected(p + 1, q + 1))
                .collect(),
        }
    }

    fn directed(g: &DiForest) -> Self {
        Self {
            vertices: g.vertex_count(),
            edges: g
                .edge_list()
                .iter()
                .map(|&(p, q)| GraphEdge::Directed(p + 1, q + 1, "->".to_string()))
                .collect(),
        }
    }

    fn zero_based(&self, directed: bool) -> Result<Vec<(usize, usize)>> {
        self.edges
            .iter()
            .map(|e| {
                let (p, q) = match (e, directed) {
                    (GraphEdge::Undirected(p, q), false) => (*p, *q),
                    (GraphEdge::Directed(p, q, arrow), true) if arrow == "->" => (*p, *q),
                    _ => {
                        return Err(Error::DimensionMismatch(format!(
                            "edge {e:?} does not match the graph kind"
                        )))
                    }
                };
                if p == 0 || q == 0 {
                    return Err(Error::IndexOutOfRange {
                        index: 0,
                        count: self.vertices,
                    });
                }
                Ok((p - 1, q - 1))
            })
            .collect()
    }

    pub fn to_forest(&self) -> Result<Forest> {
        Forest::from_edges(self.vertices, &self.zero_based(false)?)
    }

    pub fn to_diforest(&self) -> Result<DiForest> {
        DiForest::from_edges(self.vertices, &self.zero_based(true)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionDocument {
    pub sizes: Vec<usize>,
    pub eigenvalues: Vec<[f64; 2]>,
}

impl PartitionDocument {
    fn from_partition(p: &BlockPartition) -> Self {
        Self {
            sizes: p.sizes.clone(),
            eigenvalues: p.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_partition(&self) -> Result<BlockPartition> {
        BlockPartition::new(
            self.sizes.clone(),
            self.eigenvalues
                .iter()
                .map(|&[re, im]| ComplexScalar::new(re, im))
                .collect(),
        )
    }
}

fn default_tol_cluster() -> f64 {
    ToleranceConfig::default().tol_cluster
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub tol_eig: f64,
    #[serde(default = "default_tol_cluster")]
    pub tol_cluster: f64,
    pub tol_zero: f64,
    pub tol_residual: f64,
    /// Scale of the zero tests.
    pub scale: f64,
    /// Max-abs backward error of the accumulated transformation.
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitarity_defect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl Diagnostics {
    fn new(tol: &ToleranceConfig, scale: f64, residual: f64) -> Self {
        Self {
            tol_eig: tol.tol_eig,
            tol_cluster: tol.tol_cluster,
            tol_zero: tol.tol_zero,
            tol_residual: tol.tol_residual,
            scale,
            residual,
            unitarity_defect: None,
            condition: None,
            warnings: Vec::new(),
        }
    }

    pub fn tolerances(&self) -> ToleranceConfig {
        ToleranceConfig {
            tol_eig: self.tol_eig,
            tol_cluster: self.tol_cluster,
            tol_zero: self.tol_zero,
            tol_residual: self.tol_residual,
            max_qr_iters: None,
        }
    }
}

/// Canonical form, its graph and the transformation that produced it.
/// Fields are serialized in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    #[serde(default = "schema_version")]
    pub schema_version: String,
    pub kind: String,
    pub matrices: MatricesDocument,
    pub graph: GraphDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionDocument>,
    /// Entries normalized by the scan: positive markers (unitary) or ones (pair).
    pub reduced_positions: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

fn one_based(positions: &[(usize, usize)]) -> Vec<[usize; 2]> {
    positions.iter().map(|&(r, c)| [r + 1, c + 1]).collect()
}

impl ResultDocument {
    pub fn from_unitary(r: &CanonicalResult, tol: &ToleranceConfig) -> Self {
        let mut diag = Diagnostics::new(tol, r.scale, r.residual);
        diag.unitarity_defect = Some(r.unitarity_defect);
        Self {
            schema_version: schema_version(),
            kind: KIND_UNITARY.to_string(),
            matrices: MatricesDocument {
                m_can: Some(MatrixDocument::from_matrix(&r.m_can)),
                u_total: Some(MatrixDocument::from_matrix(&r.u_total)),
                ..Default::default()
            },
            graph: GraphDocument::undirected(&r.g),
            partition: Some(PartitionDocument::from_partition(&r.partition)),
            reduced_positions: one_based(&r.marked),
            diagnostics: Some(diag),
        }
    }

    pub fn from_pair(r: &CanonicalPairResult, tol: &ToleranceConfig) -> Self {
        let mut diag = Diagnostics::new(tol, r.scale, r.residual);
        diag.condition = Some(r.condition);
        if r.condition > CONDITION_WARNING {
            diag.warnings.push(format!(
                "eigenvector matrix condition estimate {:e} exceeds {:e}",
                r.condition, CONDITION_WARNING
            ));
        }
        Self {
            schema_version: schema_version(),
            kind: KIND_PAIR.to_string(),
            matrices: MatricesDocument {
                lambda: Some(MatrixDocument::from_vector(&r.lambda)),
                b_can: Some(MatrixDocument::from_matrix(&r.b_can)),
                s_total: Some(MatrixDocument::from_matrix(&r.s_total)),
                ..Default::default()
            },
            graph: GraphDocument::directed(&r.g),
            partition: None,
            reduced_positions: one_based(&r.ones),
            diagnostics: Some(diag),
        }
    }
}

pub fn serialize_result(doc: &ResultDocument) -> String {
    to_pretty(doc)
}

pub fn parse_result(text: &str) -> Result<ResultDocument> {
    serde_json::from_str(text).map_err(parse_error)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummandDocument {
    /// Blocks of the original canonical form in this summand (1-based).
    pub original_blocks: Vec<usize>,
    pub canonical: ResultDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionDocument {
    #[serde(default = "schema_version")]
    pub schema_version: String,
    pub kind: String,
    pub summands: Vec<SummandDocument>,
    /// `permutation[k]` is the original (1-based) index placed at position `k + 1`.
    pub permutation: Vec<usize>,
}

impl DecompositionDocument {
    pub fn from_decomposition(cr: &CanonicalResult, d: &UnitaryDecomposition) -> Self {
        let mut position = vec![0; d.permutation.len()];
        for (k, &orig) in d.permutation.iter().enumerate() {
            position[orig] = k;
        }
        let mut offset = 0;
        let summands = d
            .summands
            .iter()
            .map(|s| {
                let range = offset..offset + s.matrix.rows();
                offset = range.end;
                let reduced_positions = cr
                    .marked
                    .iter()
                    .map(|&(r, c)| (position[r], position[c]))
                    .filter(|(r, _)| range.contains(r))
                    .map(|(r, c)| [r - range.start + 1, c - range.start + 1])
                    .collect();
                SummandDocument {
                    original_blocks: s.original_vertices.iter().map(|v| v + 1).collect(),
                    canonical: ResultDocument {
                        schema_version: schema_version(),
                        kind: KIND_UNITARY.to_string(),
                        matrices: MatricesDocument {
                            m_can: Some(MatrixDocument::from_matrix(&s.matrix)),
                            ..Default::default()
                        },
                        graph: GraphDocument::undirected(&s.tree),
                        partition: Some(PartitionDocument::from_partition(&s.partition)),
                        reduced_positions,
                        diagnostics: None,
                    },
                }
            })
            .collect();
        Self {
            schema_version: schema_version(),
            kind: KIND_DECOMPOSITION.to_string(),
            summands,
            permutation: d.permutation.iter().map(|v| v + 1).collect(),
        }
    }
}

pub fn serialize_decomposition(doc: &DecompositionDocument) -> String {
    to_pretty(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;
    use proptest::prelude::*;

    #[test]
    fn parse_examples() {
        let m = parse_matrix(r#"{"rows":1,"cols":1,"entries":[[[0.0,1.0]]]}"#).unwrap();
        assert_eq!(m[(0, 0)], c(0.0, 1.0));
        assert!(matches!(
            parse_matrix(r#"{"rows":2,"cols":1,"entries":[[[0.0,1.0]]]}"#),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            parse_matrix(r#"{"rows":1,"cols":2,"entries":[[[0.0,1.0]]]}"#),
            Err(Error::DimensionMismatch(_))
        ));
        assert_eq!(
            parse_matrix(r#"{"rows":1,"cols":1,"entries":[[[1.0,"NaN"]]]}"#),
            Err(Error::NonFiniteEntry { row: 1, col: 1 })
        );
        match parse_matrix("{\n  \"rows\": 1,\n  \"cols\": oops }") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_matrix("[1, 2]"), Err(Error::Parse { .. })));
    }

    #[test]
    fn decimal_parse_is_nearest() {
        let m = parse_matrix(r#"{"rows":1,"cols":1,"entries":[[[0.1,2.2250738585072014e-308]]]}"#).unwrap();
        assert_eq!(m[(0, 0)].re, 0.1);
        assert_eq!(m[(0, 0)].im, f64::MIN_POSITIVE);
    }

    #[test]
    fn serialization_is_stable() {
        let m = ComplexMatrix::from_rows(&[vec![c(0.1, -0.0), c(1e-300, 3.0)]]);
        let text = serialize_matrix(&m);
        assert!(text.ends_with("}\n"));
        assert!(!text.contains('\r'));
        assert_eq!(text, serialize_matrix(&parse_matrix(&text).unwrap()));
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            any::<f64>().prop_filter("finite", |x| x.is_finite()),
            -10.0..10.0f64,
        ]
    }

    proptest! {
        #[test]
        fn matrix_round_trip_is_bitwise(rows in 1usize..4, cols in 1usize..4, vals in proptest::collection::vec((finite(), finite()), 16)) {
            let data: Vec<ComplexScalar> = vals.iter().take(rows * cols).map(|&(a, b)| c(a, b)).collect();
            let m = ComplexMatrix::new(rows, cols, data).unwrap();
            let back = parse_matrix(&serialize_matrix(&m)).unwrap();
            for (x, y) in m.as_slice().iter().zip(back.as_slice()) {
                prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }

        #[test]
        fn result_round_trip_is_bitwise(vals in proptest::collection::vec((finite(), finite()), 4), scale in finite()) {
            let m = ComplexMatrix::new(2, 2, vals.iter().map(|&(a, b)| c(a, b)).collect()).unwrap();
            let doc = ResultDocument {
                schema_version: schema_version(),
                kind: KIND_PAIR.to_string(),
                matrices: MatricesDocument {
                    lambda: Some(MatrixDocument::from_vector(&[c(vals[0].0, vals[1].1), c(scale, 0.0)])),
                    b_can: Some(MatrixDocument::from_matrix(&m)),
                    s_total: Some(MatrixDocument::from_matrix(&m)),
                    ..Default::default()
                },
                graph: GraphDocument {
                    vertices: 2,
                    edges: vec![GraphEdge::Directed(1, 2, "->".into())],
                },
                partition: None,
                reduced_positions: vec![[1, 2]],
                diagnostics: Some(Diagnostics::new(&ToleranceConfig::default(), scale.abs(), scale)),
            };
            let text = serialize_result(&doc);
            let back = parse_result(&text).unwrap();
            prop_assert_eq!(serialize_result(&back), text);
            let bm = back.matrices.b_can.unwrap().to_matrix().unwrap();
            for (x, y) in m.as_slice().iter().zip(bm.as_slice()) {
                prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn graph_documents() {
        let g = Forest::from_edges(3, &[(1, 2), (0, 1)]).unwrap();
        let doc = GraphDocument::undirected(&g);
        assert_eq!(serde_json::to_string(&doc).unwrap(), r#"{"vertices":3,"edges":[[2,3],[1,2]]}"#);
        assert_eq!(doc.to_forest().unwrap(), g);
        let d = DiForest::from_edges(2, &[(1, 0)]).unwrap();
        let doc = GraphDocument::directed(&d);
        assert_eq!(serde_json::to_string(&doc).unwrap(), r#"{"vertices":2,"edges":[[2,1,"->"]]}"#);
        assert_eq!(doc.to_diforest().unwrap(), d);
        assert!(doc.to_forest().is_err());
    }
}
