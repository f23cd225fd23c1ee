//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;

use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};

use cat0lab::cone::ConePoint;
use cat0lab::tree::TreePoint;

/// Vertices of the subtree spanned by copies 1, 2 and leaves 1, 2.
const VERTICES: [TreePoint; 7] = [
    TreePoint::Root,
    TreePoint::Branch { copy: 1 },
    TreePoint::Branch { copy: 2 },
    TreePoint::Endpoint { copy: 1, leaf: 1 },
    TreePoint::Endpoint { copy: 1, leaf: 2 },
    TreePoint::Endpoint { copy: 2, leaf: 1 },
    TreePoint::Endpoint { copy: 2, leaf: 2 },
];

/// `(upper, lower)` vertex indices of the six edges.
const EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)];

/// Where a direction sits: `(edge, angle from the upper vertex)`, one entry
/// per triangle containing it.
pub fn locate(dir: &TreePoint) -> Vec<(usize, f64)> {
    let vertex = VERTICES.iter().position(|v| v == dir);
    if let Some(v) = vertex {
        return EDGES
            .iter()
            .enumerate()
            .filter_map(|(k, &(hi, lo))| {
                if hi == v {
                    Some((k, 0.0))
                } else if lo == v {
                    Some((k, FRAC_PI_4))
                } else {
                    None
                }
            })
            .collect();
    }
    match *dir {
        TreePoint::Trunk { copy: c @ 1..=2, t } => vec![(c as usize - 1, t)],
        TreePoint::Leaf {
            copy: c @ 1..=2,
            leaf: l @ 1..=2,
            t,
        } => vec![(2 * c as usize + l as usize - 1, t)],
        _ => panic!("{dir:?} is outside the oracle's subcomplex"),
    }
}

fn planar(r: f64, angle: f64) -> [f64; 2] {
    [r * angle.cos(), r * angle.sin()]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Shortest paths in a graph whose nodes are ε-spaced points on the
/// boundaries of the flat triangles `(o, 2·u, 2·v)` plus the query points,
/// with straight-line edges between any two nodes of a common triangle.
pub struct SkeletonOracle {
    graph: UnGraph<(), f64>,
    queries: Vec<NodeIndex>,
}

impl SkeletonOracle {
    pub fn new(eps: f64, queries: &[ConePoint]) -> Self {
        let mut graph = UnGraph::new_undirected();
        let mut members: Vec<Vec<(NodeIndex, [f64; 2])>> = vec![Vec::new(); EDGES.len()];

        // radial segments o → 2·v, shared by the triangles at v
        let steps = (2.0 / eps).ceil() as usize;
        let apex = graph.add_node(());
        let mut radial: HashMap<(usize, usize), NodeIndex> = HashMap::new();
        for v in 0..VERTICES.len() {
            for k in 1..=steps {
                radial.insert((v, k), graph.add_node(()));
            }
        }
        for (e, &(hi, lo)) in EDGES.iter().enumerate() {
            members[e].push((apex, [0.0, 0.0]));
            for (v, angle) in [(hi, 0.0), (lo, FRAC_PI_4)] {
                for k in 1..=steps {
                    let r = 2.0 * k as f64 / steps as f64;
                    members[e].push((radial[&(v, k)], planar(r, angle)));
                }
            }
            // the outer chord, endpoints already present
            let (a, b) = (planar(2.0, 0.0), planar(2.0, FRAC_PI_4));
            let n = (dist(a, b) / eps).ceil() as usize;
            for k in 1..n {
                let s = k as f64 / n as f64;
                let p = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                members[e].push((graph.add_node(()), p));
            }
        }

        let mut query_nodes = Vec::with_capacity(queries.len());
        for q in queries {
            let node = if q.is_apex() { apex } else { graph.add_node(()) };
            if !q.is_apex() {
                for (e, angle) in locate(&q.direction()) {
                    members[e].push((node, planar(q.radius(), angle)));
                }
            }
            query_nodes.push(node);
        }

        for tri in &members {
            for i in 0..tri.len() {
                for j in i + 1..tri.len() {
                    if tri[i].0 != tri[j].0 {
                        graph.add_edge(tri[i].0, tri[j].0, dist(tri[i].1, tri[j].1));
                    }
                }
            }
        }
        Self {
            graph,
            queries: query_nodes,
        }
    }

    /// Graph distances from query `i` to every query.
    pub fn distances_from(&self, i: usize) -> Vec<f64> {
        let d = dijkstra(&self.graph, self.queries[i], None, |e| *e.weight());
        self.queries.iter().map(|n| d[n]).collect()
    }
}

/// A direction in the oracle's subcomplex, drawn from `u ∈ [0, 1)²`.
pub fn subcomplex_direction(u: f64, v: f64) -> TreePoint {
    let k = ((u * 7.0) as usize).min(6);
    let t = v * FRAC_PI_4;
    match k {
        0 => TreePoint::trunk(1, t),
        1 => TreePoint::trunk(2, t),
        2 => TreePoint::leaf(1, 1, t),
        3 => TreePoint::leaf(1, 2, t),
        4 => TreePoint::leaf(2, 1, t),
        5 => TreePoint::leaf(2, 2, t),
        _ => VERTICES[((v * 7.0) as usize).min(6)],
    }
}

/// Planar oracle for two unit vectors at angle `theta`: the norm of their
/// average.
pub fn planar_midpoint_norm(theta: f64) -> f64 {
    let m = [(1.0 + theta.cos()) / 2.0, theta.sin() / 2.0];
    m[0].hypot(m[1])
}

/// Edge-list fixture path.
pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// All-pairs vertex distances of a weighted tree by Floyd–Warshall.
pub fn floyd(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(a, b, w) in edges {
        d[a][b] = d[a][b].min(w);
        d[b][a] = d[b][a].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Brute-force minimax radius over an arclength grid of `step` on every
/// edge, for input vertices `inputs`.
pub fn grid_circumradius(n: usize, edges: &[(usize, usize, f64)], inputs: &[usize], step: f64) -> f64 {
    let d = floyd(n, edges);
    let mut best = f64::INFINITY;
    for &(a, b, w) in edges {
        let k = (w / step).ceil() as usize;
        for i in 0..=k {
            let s = w * i as f64 / k as f64;
            let worst = inputs
                .iter()
                .map(|&q| (s + d[a][q]).min(w - s + d[b][q]))
                .fold(0.0, f64::max);
            best = best.min(worst);
        }
    }
    best
}
