//! Small weighted trees used as brute-force oracle substrates.
//!
//! Fixtures are plain text, one `u v weight` edge per line; blank lines and
//! lines starting with `#` are skipped.

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

use crate::geom::GeodesicSpace;
use crate::tol;
use crate::tree::{tree_circumcenter, MetricTree};

#[derive(Debug, Error)]
pub enum TreeParseError {
    #[error("line {line}: expected `u v weight`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: edge weight must be positive and finite")]
    BadWeight { line: usize },
    #[error("line {line}: self-loop at `{vertex}`")]
    SelfLoop { line: usize, vertex: String },
    #[error("graph is not a tree: {0}")]
    NotATree(String),
    #[error("empty edge list")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A point of a [`FiniteTree`]: a vertex, or an interior point of an edge at
/// arclength `offset` from the edge's first vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FinitePoint {
    Vertex(usize),
    OnEdge { edge: usize, offset: f64 },
}

#[derive(Clone, Debug)]
pub struct FiniteTree {
    names: Vec<String>,
    edges: Vec<(usize, usize, f64)>,
    /// all-pairs vertex distances
    dist: Vec<Vec<f64>>,
    /// `next[a][b]`: (neighbor of `a` on the path to `b`, connecting edge)
    next: Vec<Vec<Option<(usize, usize)>>>,
}

impl FiniteTree {
    /// Builds a tree from named weighted edges.
    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S, f64)]) -> Result<Self, TreeParseError> {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut names = Vec::new();
        let mut intern = |name: &str| -> usize {
            *index.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                names.len() - 1
            })
        };
        let mut es = Vec::with_capacity(edges.len());
        for (line, (u, v, w)) in edges.iter().enumerate() {
            if !(*w > 0.0 && w.is_finite()) {
                return Err(TreeParseError::BadWeight { line: line + 1 });
            }
            if u.as_ref() == v.as_ref() {
                return Err(TreeParseError::SelfLoop {
                    line: line + 1,
                    vertex: u.as_ref().to_string(),
                });
            }
            es.push((intern(u.as_ref()), intern(v.as_ref()), *w));
        }
        if es.is_empty() {
            return Err(TreeParseError::Empty);
        }
        let n = names.len();
        if es.len() != n - 1 {
            return Err(TreeParseError::NotATree(format!(
                "{} vertices but {} edges",
                n,
                es.len()
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for (k, &(u, v, _)) in es.iter().enumerate() {
            adj[u].push((v, k));
            adj[v].push((u, k));
        }
        let mut dist = vec![vec![f64::INFINITY; n]; n];
        let mut next = vec![vec![None; n]; n];
        for src in 0..n {
            // parent pointers from src; next hop toward src is the parent
            dist[src][src] = 0.0;
            let mut stack = vec![src];
            while let Some(x) = stack.pop() {
                for &(y, e) in &adj[x] {
                    if dist[src][y].is_infinite() {
                        dist[src][y] = dist[src][x] + es[e].2;
                        next[y][src] = Some((x, e));
                        stack.push(y);
                    }
                }
            }
        }
        if dist[0].iter().any(|d| d.is_infinite()) {
            return Err(TreeParseError::NotATree("graph is disconnected".into()));
        }
        Ok(Self {
            names,
            edges: es,
            dist,
            next,
        })
    }

    /// Parses the edge-list text format.
    pub fn parse(text: &str) -> Result<Self, TreeParseError> {
        let mut edges = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let malformed = || TreeParseError::Malformed {
                line: k + 1,
                text: line.to_string(),
            };
            if fields.len() != 3 {
                return Err(malformed());
            }
            let w: f64 = fields[2].parse().map_err(|_| malformed())?;
            if !(w > 0.0 && w.is_finite()) {
                return Err(TreeParseError::BadWeight { line: k + 1 });
            }
            edges.push((fields[0].to_string(), fields[1].to_string(), w));
        }
        Self::from_edges(&edges)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TreeParseError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn vertex(&self, name: &str) -> Option<FinitePoint> {
        self.names.iter().position(|n| n == name).map(FinitePoint::Vertex)
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.names[v]
    }

    /// Canonical point on `edge` at `offset` from its first vertex.
    pub fn point_on_edge(&self, edge: usize, offset: f64) -> FinitePoint {
        let (u, v, w) = self.edges[edge];
        if offset <= tol::SNAP {
            FinitePoint::Vertex(u)
        } else if offset >= w - tol::SNAP {
            FinitePoint::Vertex(v)
        } else {
            FinitePoint::OnEdge { edge, offset }
        }
    }

    /// Vertices reachable directly from the point, with the distance to each.
    fn anchors(&self, p: &FinitePoint) -> Vec<(usize, f64)> {
        match *p {
            FinitePoint::Vertex(v) => vec![(v, 0.0)],
            FinitePoint::OnEdge { edge, offset } => {
                let (u, v, w) = self.edges[edge];
                vec![(u, offset), (v, w - offset)]
            }
        }
    }

    fn offset_in(&self, edge: usize, vertex: usize) -> f64 {
        let (u, _, w) = self.edges[edge];
        if vertex == u {
            0.0
        } else {
            w
        }
    }

    fn same_edge(&self, a: &FinitePoint, b: &FinitePoint) -> Option<(usize, f64, f64)> {
        match (*a, *b) {
            (FinitePoint::OnEdge { edge: e1, offset: o1 }, FinitePoint::OnEdge { edge: e2, offset: o2 })
                if e1 == e2 =>
            {
                Some((e1, o1, o2))
            }
            _ => None,
        }
    }

    fn best_anchors(&self, a: &FinitePoint, b: &FinitePoint) -> (usize, f64, usize, f64, f64) {
        let mut best = (0, 0.0, 0, 0.0, f64::INFINITY);
        for (x, dx) in self.anchors(a) {
            for (y, dy) in self.anchors(b) {
                let total = dx + self.dist[x][y] + dy;
                if total < best.4 {
                    best = (x, dx, y, dy, total);
                }
            }
        }
        best
    }

    /// Vertex path from `a` to `b` as (vertex, edge used to reach it).
    fn vertex_path(&self, a: usize, b: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut x = a;
        while x != b {
            let (y, e) = self.next[x][b].expect("tree is connected");
            out.push((y, e));
            x = y;
        }
        out
    }
}

impl GeodesicSpace for FiniteTree {
    type Point = FinitePoint;

    fn distance(&self, a: &FinitePoint, b: &FinitePoint) -> f64 {
        if let Some((_, o1, o2)) = self.same_edge(a, b) {
            return (o1 - o2).abs();
        }
        self.best_anchors(a, b).4
    }

    fn geodesic(&self, a: &FinitePoint, b: &FinitePoint, t: f64) -> FinitePoint {
        if t <= 0.0 {
            return *a;
        }
        if t >= 1.0 {
            return *b;
        }
        if let Some((e, o1, o2)) = self.same_edge(a, b) {
            return self.point_on_edge(e, o1 + t * (o2 - o1));
        }
        let (x, _, y, _, total) = self.best_anchors(a, b);
        // piecewise-linear legs, each inside one edge: (edge, from, to)
        let mut legs: Vec<(usize, f64, f64)> = Vec::new();
        if let FinitePoint::OnEdge { edge, offset } = *a {
            legs.push((edge, offset, self.offset_in(edge, x)));
        }
        let mut cur = x;
        for (v, e) in self.vertex_path(x, y) {
            legs.push((e, self.offset_in(e, cur), self.offset_in(e, v)));
            cur = v;
        }
        if let FinitePoint::OnEdge { edge, offset } = *b {
            legs.push((edge, self.offset_in(edge, y), offset));
        }
        let mut s = t * total;
        for &(e, from, to) in &legs {
            let len = (to - from).abs();
            if s <= len {
                return self.point_on_edge(e, from + s * (to - from).signum());
            }
            s -= len;
        }
        *b
    }

    fn circumcenter_hint(&self, points: &[FinitePoint]) -> Option<FinitePoint> {
        tree_circumcenter(self, points).map(|(c, _)| c)
    }

    fn name(&self) -> &'static str {
        "finite-tree"
    }
}

impl MetricTree for FiniteTree {}

#[cfg(test)]
mod tests {
    use super::*;

    fn tripod() -> FiniteTree {
        FiniteTree::parse("# tripod\nc a 1\nc b 1\n\nc d 1\n").unwrap()
    }

    #[test]
    fn parses_and_measures() {
        let t = tripod();
        assert_eq!(t.vertex_count(), 4);
        let a = t.vertex("a").unwrap();
        let b = t.vertex("b").unwrap();
        assert_eq!(t.distance(&a, &b), 2.0);
        let mid = t.geodesic(&a, &b, 0.5);
        assert_eq!(mid, t.vertex("c").unwrap());
    }

    #[test]
    fn interior_points() {
        let t = tripod();
        let p = t.point_on_edge(0, 0.25);
        let q = t.point_on_edge(1, 0.5);
        assert!((t.distance(&p, &q) - 0.75).abs() < 1e-15);
        let r = t.point_on_edge(0, 0.75);
        assert!((t.distance(&p, &r) - 0.5).abs() < 1e-15);
        let g = t.geodesic(&r, &q, 0.5);
        assert!((t.distance(&g, &r) - 0.625).abs() < 1e-12);
        assert!((t.distance(&g, &q) - 0.625).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_trees() {
        assert!(matches!(FiniteTree::parse("a b 1\nb c 1\nc a 1\n"), Err(TreeParseError::NotATree(_))));
        assert!(matches!(FiniteTree::parse("a b 1\nc d 1\n"), Err(TreeParseError::NotATree(_))));
        assert!(matches!(FiniteTree::parse("a b 0\n"), Err(TreeParseError::BadWeight { line: 1 })));
        assert!(matches!(FiniteTree::parse("a b\n"), Err(TreeParseError::Malformed { .. })));
        assert!(matches!(FiniteTree::parse("a a 1\n"), Err(TreeParseError::SelfLoop { .. })));
        assert!(matches!(FiniteTree::parse("# nothing\n"), Err(TreeParseError::Empty)));
    }

    #[test]
    fn tripod_circumcenter_is_branch_vertex() {
        let t = tripod();
        let tips: Vec<_> = ["a", "b", "d"].iter().map(|n| t.vertex(n).unwrap()).collect();
        let (c, r) = tree_circumcenter(&t, &tips).unwrap();
        assert_eq!(c, t.vertex("c").unwrap());
        assert_eq!(r, 1.0);
    }
}
