//! The countable tree `Y`.
//!
//! `Y` has a root `p` with countably many trunk edges, each of length π/4,
//! ending at branch points `b_i`. Every branch point carries countably many
//! leaf edges of length π/4 ending at endpoints `e_{i,j}`. Copy and leaf
//! indices are arbitrary `u64` labels and are never enumerated; all metric
//! data is closed-form.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use crate::geom::GeodesicSpace;
use crate::tol;

/// Length of every edge of `Y`.
pub const EDGE_LEN: f64 = FRAC_PI_4;

/// Height of a branch point above the root.
const BRANCH_HEIGHT: f64 = EDGE_LEN;
/// Height of an endpoint above the root.
const END_HEIGHT: f64 = 2.0 * EDGE_LEN;

/// A point of `Y`.
///
/// Interior parameters `t` are arclength from the upper vertex of the edge
/// (`p` for trunks, `b_i` for leaves) and lie strictly inside `(0, π/4)`;
/// use the constructors to get canonical forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TreePoint {
    Root,
    Trunk { copy: u64, t: f64 },
    Branch { copy: u64 },
    Leaf { copy: u64, leaf: u64, t: f64 },
    Endpoint { copy: u64, leaf: u64 },
}

/// An edge of `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeEdge {
    Trunk(u64),
    Leaf(u64, u64),
}

impl TreeEdge {
    /// Point at arclength `offset ∈ [0, π/4]` from the upper vertex.
    pub fn point_at(self, offset: f64) -> TreePoint {
        match self {
            TreeEdge::Trunk(copy) => TreePoint::from_path(Some(copy), None, offset),
            TreeEdge::Leaf(copy, leaf) => {
                TreePoint::from_path(Some(copy), Some(leaf), BRANCH_HEIGHT + offset)
            }
        }
    }
}

impl TreePoint {
    pub const fn p() -> Self {
        TreePoint::Root
    }

    pub const fn b(copy: u64) -> Self {
        TreePoint::Branch { copy }
    }

    pub const fn e(copy: u64, leaf: u64) -> Self {
        TreePoint::Endpoint { copy, leaf }
    }

    /// Point on trunk `copy` at distance `t` from `p`, canonicalized.
    pub fn trunk(copy: u64, t: f64) -> Self {
        Self::from_path(Some(copy), None, t.clamp(0.0, EDGE_LEN))
    }

    /// Point on leaf edge `(copy, leaf)` at distance `t` from `b_copy`,
    /// canonicalized.
    pub fn leaf(copy: u64, leaf: u64, t: f64) -> Self {
        Self::from_path(Some(copy), Some(leaf), BRANCH_HEIGHT + t.clamp(0.0, EDGE_LEN))
    }

    /// `(copy, leaf, height above p)`; the copy is absent only at `p`, the
    /// leaf only on trunks.
    pub fn path(&self) -> (Option<u64>, Option<u64>, f64) {
        match *self {
            TreePoint::Root => (None, None, 0.0),
            TreePoint::Trunk { copy, t } => (Some(copy), None, t),
            TreePoint::Branch { copy } => (Some(copy), None, BRANCH_HEIGHT),
            TreePoint::Leaf { copy, leaf, t } => (Some(copy), Some(leaf), BRANCH_HEIGHT + t),
            TreePoint::Endpoint { copy, leaf } => (Some(copy), Some(leaf), END_HEIGHT),
        }
    }

    pub fn height(&self) -> f64 {
        self.path().2
    }

    /// Canonical point at height `h` on the root path described by
    /// `copy`/`leaf`. Heights within [`tol::SNAP`] of a vertex land on it.
    pub fn from_path(copy: Option<u64>, leaf: Option<u64>, h: f64) -> Self {
        let copy = match copy {
            Some(c) if h > tol::SNAP => c,
            _ => return TreePoint::Root,
        };
        if (h - BRANCH_HEIGHT).abs() <= tol::SNAP {
            return TreePoint::Branch { copy };
        }
        match leaf {
            Some(leaf) if h > BRANCH_HEIGHT => {
                if h >= END_HEIGHT - tol::SNAP {
                    TreePoint::Endpoint { copy, leaf }
                } else {
                    TreePoint::Leaf { copy, leaf, t: h - BRANCH_HEIGHT }
                }
            }
            _ => TreePoint::Trunk { copy, t: h.min(BRANCH_HEIGHT) },
        }
    }

    /// Re-canonicalize a possibly hand-built point.
    pub fn canonical(&self) -> Self {
        let (c, l, h) = self.path();
        Self::from_path(c, l, h)
    }

    /// The edge containing this point, with arclength from its upper vertex.
    /// Vertices report the edge toward `p` (endpoints their leaf edge); the
    /// root has none.
    pub fn edge(&self) -> Option<(TreeEdge, f64)> {
        match *self {
            TreePoint::Root => None,
            TreePoint::Trunk { copy, t } => Some((TreeEdge::Trunk(copy), t)),
            TreePoint::Branch { copy } => Some((TreeEdge::Trunk(copy), EDGE_LEN)),
            TreePoint::Leaf { copy, leaf, t } => Some((TreeEdge::Leaf(copy, leaf), t)),
            TreePoint::Endpoint { copy, leaf } => Some((TreeEdge::Leaf(copy, leaf), EDGE_LEN)),
        }
    }

    /// Edges of the path from this point up to `p`.
    pub fn root_path_edges(&self) -> Vec<TreeEdge> {
        match self.path() {
            (Some(c), Some(l), _) => vec![TreeEdge::Leaf(c, l), TreeEdge::Trunk(c)],
            (Some(c), None, _) => vec![TreeEdge::Trunk(c)],
            _ => Vec::new(),
        }
    }

    pub fn is_vertex(&self) -> bool {
        matches!(
            self,
            TreePoint::Root | TreePoint::Branch { .. } | TreePoint::Endpoint { .. }
        )
    }
}

/// Height of the lowest common ancestor of two root paths.
fn lca_height(u: &(Option<u64>, Option<u64>, f64), v: &(Option<u64>, Option<u64>, f64)) -> f64 {
    match (u, v) {
        ((Some(cu), lu, hu), (Some(cv), lv, hv)) if cu == cv => match (lu, lv) {
            (Some(a), Some(b)) if a != b => BRANCH_HEIGHT,
            _ => hu.min(*hv),
        },
        _ => 0.0,
    }
}

/// Length of the unique path between two points of `Y`.
pub fn tree_distance(u: &TreePoint, v: &TreePoint) -> f64 {
    let pu = u.path();
    let pv = v.path();
    let lca = lca_height(&pu, &pv);
    (pu.2 - lca) + (pv.2 - lca)
}

/// Point at fraction `t` along the unique path from `u` to `v`.
pub fn tree_geodesic(u: &TreePoint, v: &TreePoint, t: f64) -> TreePoint {
    if t <= 0.0 {
        return *u;
    }
    if t >= 1.0 {
        return *v;
    }
    let pu = u.path();
    let pv = v.path();
    let lca = lca_height(&pu, &pv);
    let up = pu.2 - lca;
    let s = t * (up + pv.2 - lca);
    if s <= up {
        TreePoint::from_path(pu.0, pu.1, pu.2 - s)
    } else {
        TreePoint::from_path(pv.0, pv.1, lca + (s - up))
    }
}

/// The tree `Y` as a geodesic space.
#[derive(Clone, Copy, Debug, Default)]
pub struct TreeY;

impl GeodesicSpace for TreeY {
    type Point = TreePoint;

    fn distance(&self, a: &TreePoint, b: &TreePoint) -> f64 {
        tree_distance(a, b)
    }

    fn geodesic(&self, a: &TreePoint, b: &TreePoint, t: f64) -> TreePoint {
        tree_geodesic(a, b, t)
    }

    fn circumcenter_hint(&self, points: &[TreePoint]) -> Option<TreePoint> {
        tree_circumcenter(self, points).map(|(c, _)| c)
    }

    fn name(&self) -> &'static str {
        "tree-y"
    }
}

/// Marker for spaces that are metric trees (0-hyperbolic).
pub trait MetricTree: GeodesicSpace {}

impl MetricTree for TreeY {}

/// Circumcenter of a finite subset of a metric tree: the midpoint of a
/// diametral pair, with radius half the diameter. `None` for an empty set.
pub fn tree_circumcenter<S: MetricTree>(space: &S, points: &[S::Point]) -> Option<(S::Point, f64)> {
    let first = points.first()?;
    let (mut a, mut b, mut diam) = (0, 0, 0.0);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = space.distance(&points[i], &points[j]);
            if d > diam {
                (a, b, diam) = (i, j, d);
            }
        }
    }
    if diam == 0.0 {
        return Some((first.clone(), 0.0));
    }
    let center = space.geodesic(&points[a], &points[b], 0.5);
    let radius = points
        .iter()
        .map(|q| space.distance(&center, q))
        .fold(0.5 * diam, f64::max);
    Some((center, radius))
}

impl fmt::Display for TreePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TreePoint::Root => write!(f, "p"),
            TreePoint::Trunk { copy, t } => write!(f, "trunk:{copy}:{t}"),
            TreePoint::Branch { copy } => write!(f, "b:{copy}"),
            TreePoint::Leaf { copy, leaf, t } => write!(f, "leaf:{copy}:{leaf}:{t}"),
            TreePoint::Endpoint { copy, leaf } => write!(f, "e:{copy}:{leaf}"),
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("bad tree locus `{input}`: {reason}")]
pub struct LocusParseError {
    pub input: String,
    pub reason: String,
}

impl FromStr for TreePoint {
    type Err = LocusParseError;

    /// Parses `p | trunk:<i>:<t> | b:<i> | leaf:<i>:<j>:<t> | e:<i>:<j>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| LocusParseError {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let parts: Vec<&str> = s.trim().split(':').collect();
        let idx = |k: usize| -> Result<u64, LocusParseError> {
            parts[k].parse::<u64>().map_err(|_| err("index must be a nonnegative integer"))
        };
        let param = |k: usize| -> Result<f64, LocusParseError> {
            let t = parts[k].parse::<f64>().map_err(|_| err("parameter must be a number"))?;
            if (0.0..=EDGE_LEN).contains(&t) {
                Ok(t)
            } else {
                Err(err("parameter must lie in [0, π/4]"))
            }
        };
        match (parts[0], parts.len()) {
            ("p", 1) => Ok(TreePoint::Root),
            ("b", 2) => Ok(TreePoint::b(idx(1)?)),
            ("e", 3) => Ok(TreePoint::e(idx(1)?, idx(2)?)),
            ("trunk", 3) => Ok(TreePoint::trunk(idx(1)?, param(2)?)),
            ("leaf", 4) => Ok(TreePoint::leaf(idx(1)?, idx(2)?, param(3)?)),
            _ => Err(err("expected p, b:<i>, e:<i>:<j>, trunk:<i>:<t> or leaf:<i>:<j>:<t>")),
        }
    }
}
