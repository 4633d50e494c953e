//! Acyclic constraint graphs over block indices, and a union-find whose
//! vertices carry multiplicative labels relative to their component root.
//!
//! Vertices are 0-based here; documents and the CLI use 1-based labels.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::numerics::{ComplexScalar, ONE};

/// One step of a tree path. `edge` is the edge as stored; `forward` is true
/// when the step traverses it from `edge.0` to `edge.1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStep {
    pub from: usize,
    pub to: usize,
    pub edge: (usize, usize),
    pub forward: bool,
}

/// Shared storage: edge list in insertion order plus adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Adjacency {
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Adjacency {
    fn new(n: usize) -> Self {
        Self {
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn check(&self, v: usize) -> Result<()> {
        if v < self.adj.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: v,
                count: self.adj.len(),
            })
        }
    }

    /// BFS parent tree rooted at `p`; entry is (parent vertex, edge id).
    fn bfs(&self, p: usize) -> Vec<Option<(usize, usize)>> {
        let n = self.adj.len();
        let mut seen = vec![false; n];
        let mut parent = vec![None; n];
        let mut queue = VecDeque::from([p]);
        seen[p] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let (a, b) = self.edges[e];
                let w = if a == v { b } else { a };
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((v, e));
                    queue.push_back(w);
                }
            }
        }
        parent
    }

    fn connected(&self, p: usize, q: usize) -> Result<bool> {
        self.check(p)?;
        self.check(q)?;
        Ok(p == q || self.bfs(p)[q].is_some())
    }

    fn add(&mut self, p: usize, q: usize) -> Result<()> {
        if self.connected(p, q)? {
            return Err(Error::CycleError(p, q));
        }
        let id = self.edges.len();
        self.edges.push((p, q));
        self.adj[p].push(id);
        self.adj[q].push(id);
        Ok(())
    }

    fn path(&self, p: usize, q: usize) -> Result<Vec<PathStep>> {
        self.check(p)?;
        self.check(q)?;
        if p == q {
            return Ok(Vec::new());
        }
        let parent = self.bfs(p);
        if parent[q].is_none() {
            return Err(Error::NotConnected(p, q));
        }
        let mut steps = Vec::new();
        let mut v = q;
        while v != p {
            let (u, e) = parent[v].unwrap();
            let edge = self.edges[e];
            steps.push(PathStep {
                from: u,
                to: v,
                edge,
                forward: edge == (u, v),
            });
            v = u;
        }
        steps.reverse();
        Ok(steps)
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let n = self.adj.len();
        let mut comp = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &e in &self.adj[v] {
                    let (a, b) = self.edges[e];
                    let w = if a == v { b } else { a };
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }
}

/// Read access shared by [`Forest`] and [`DiForest`].
pub trait AcyclicGraph {
    fn vertex_count(&self) -> usize;
    /// Edges in insertion order, as stored.
    fn edge_list(&self) -> &[(usize, usize)];
    /// True iff an undirected path joins `p` and `q`.
    fn connected(&self, p: usize, q: usize) -> Result<bool>;
    /// The unique simple path from `p` to `q`, ignoring edge direction.
    fn tree_path(&self, p: usize, q: usize) -> Result<Vec<PathStep>>;
    /// Connected components, each sorted, listed by smallest member.
    fn components(&self) -> Vec<Vec<usize>>;
}

macro_rules! impl_graph {
    ($ty:ty) => {
        impl AcyclicGraph for $ty {
            fn vertex_count(&self) -> usize {
                self.inner.adj.len()
            }
            fn edge_list(&self) -> &[(usize, usize)] {
                &self.inner.edges
            }
            fn connected(&self, p: usize, q: usize) -> Result<bool> {
                self.inner.connected(p, q)
            }
            fn tree_path(&self, p: usize, q: usize) -> Result<Vec<PathStep>> {
                self.inner.path(p, q)
            }
            fn components(&self) -> Vec<Vec<usize>> {
                self.inner.components()
            }
        }
    };
}

/// Undirected forest. Edges are stored as inserted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forest {
    inner: Adjacency,
}

impl Forest {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            inner: Adjacency::new(vertex_count),
        }
    }

    /// Inserts `p - q`; fails with [`Error::CycleError`] if they are already
    /// connected.
    pub fn add_edge(&mut self, p: usize, q: usize) -> Result<()> {
        self.inner.add(p, q)
    }

    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut f = Self::new(vertex_count);
        for &(p, q) in edges {
            f.add_edge(p, q)?;
        }
        Ok(f)
    }

    pub fn has_edge(&self, p: usize, q: usize) -> bool {
        self.inner
            .edges
            .iter()
            .any(|&(a, b)| (a, b) == (p, q) || (a, b) == (q, p))
    }
}

impl_graph!(Forest);

/// Directed graph whose underlying undirected graph is a forest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiForest {
    inner: Adjacency,
}

impl DiForest {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            inner: Adjacency::new(vertex_count),
        }
    }

    /// Inserts `p -> q`; fails if `p` and `q` are already joined by an
    /// undirected path.
    pub fn add_edge(&mut self, p: usize, q: usize) -> Result<()> {
        self.inner.add(p, q)
    }

    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut f = Self::new(vertex_count);
        for &(p, q) in edges {
            f.add_edge(p, q)?;
        }
        Ok(f)
    }

    pub fn has_edge(&self, p: usize, q: usize) -> bool {
        self.inner.edges.contains(&(p, q))
    }
}

impl_graph!(DiForest);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    /// Labels are unit-modulus phases.
    Phase,
    /// Labels are arbitrary nonzero scales.
    Scale,
}

/// Weighted union-find. `resolve(v)` returns the root of `v` and the factor
/// of `v` relative to that root; `union(p, q, r)` merges so that
/// `factor(q) / factor(p) = r`.
#[derive(Debug, Clone)]
pub struct LabeledUnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    label: Vec<ComplexScalar>,
    mode: LabelMode,
}

impl LabeledUnionFind {
    pub fn new(n: usize, mode: LabelMode) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
            label: vec![ONE; n],
            mode,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn mode(&self) -> LabelMode {
        self.mode
    }

    fn normalize(&self, z: ComplexScalar) -> ComplexScalar {
        match self.mode {
            LabelMode::Phase => z / z.norm(),
            LabelMode::Scale => z,
        }
    }

    pub fn resolve(&mut self, v: usize) -> (usize, ComplexScalar) {
        // iterative two-pass compression
        let mut path = Vec::new();
        let mut r = v;
        while self.parent[r] != r {
            path.push(r);
            r = self.parent[r];
        }
        // walk from just below the root downwards, accumulating factors
        let mut acc = ONE;
        for &u in path.iter().rev() {
            acc = self.normalize(self.label[u] * acc);
            self.label[u] = acc;
            self.parent[u] = r;
        }
        let f = if v == r { ONE } else { self.label[v] };
        (r, f)
    }

    pub fn connected(&mut self, p: usize, q: usize) -> bool {
        self.resolve(p).0 == self.resolve(q).0
    }

    pub fn union(&mut self, p: usize, q: usize, ratio: ComplexScalar) -> Result<()> {
        if !ratio.re.is_finite() || !ratio.im.is_finite() || ratio.norm() == 0.0 {
            return Err(Error::BadRatio(format!("{ratio}")));
        }
        if self.mode == LabelMode::Phase && (ratio.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::BadRatio(format!("{ratio} is not unit modulus")));
        }
        let (rp, fp) = self.resolve(p);
        let (rq, fq) = self.resolve(q);
        if rp == rq {
            return Err(Error::AlreadyConnected(p, q));
        }
        if self.size[rp] >= self.size[rq] {
            // factor(q) becomes fq * x
            self.parent[rq] = rp;
            self.label[rq] = self.normalize(ratio * fp / fq);
            self.size[rp] += self.size[rq];
        } else {
            self.parent[rp] = rq;
            self.label[rp] = self.normalize(fq / (ratio * fp));
            self.size[rq] += self.size[rp];
        }
        Ok(())
    }

    /// `factor(q) / factor(p)` if the two are connected.
    pub fn relative(&mut self, p: usize, q: usize) -> Option<ComplexScalar> {
        let (rp, fp) = self.resolve(p);
        let (rq, fq) = self.resolve(q);
        (rp == rq).then(|| fq / fp)
    }
}
