//! The Euclidean cone `X̂` over the tree `Y`, and its truncation `X`.
//!
//! `Y` is identified with the unit sphere around the apex `o`; a point
//! `λ·y` sits at distance `λ` from `o` on the ray through `y`. Distances use
//! the cone law of cosines with the tree distance as angle, capped at π.
//!
//! `X` is the union of the flat triangles `o, 2·y₁, 2·y₂` over all edges
//! `[y₁, y₂]` of `Y`. It is convex in `X̂`, so both share the metric and
//! geodesics; only membership differs.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::geom::{golden_section_min, GeodesicSpace};
use crate::tol;
use crate::tree::{tree_distance, tree_geodesic, TreeEdge, TreePoint};

/// A point `λ·y` of the cone. The apex has radius 0 and direction `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConePoint {
    radius: f64,
    direction: TreePoint,
}

impl ConePoint {
    /// # Panics
    /// If `radius` is negative or not finite.
    pub fn new(radius: f64, direction: TreePoint) -> Self {
        assert!(
            radius >= 0.0 && radius.is_finite(),
            "cone radius must be finite and nonnegative, got {radius}"
        );
        if radius == 0.0 {
            Self::apex()
        } else {
            Self {
                radius,
                direction: direction.canonical(),
            }
        }
    }

    pub const fn apex() -> Self {
        Self {
            radius: 0.0,
            direction: TreePoint::Root,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn direction(&self) -> TreePoint {
        self.direction
    }

    pub fn is_apex(&self) -> bool {
        self.radius == 0.0
    }

    /// `s·(λ·y) = (sλ)·y`.
    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.radius * s, self.direction)
    }
}

/// Angle at the apex between two directions, capped at π.
pub fn tree_angle(a: &TreePoint, b: &TreePoint) -> f64 {
    tree_distance(a, b).min(PI)
}

/// Cone distance between `λ₁·y₁` and `λ₂·y₂`.
pub fn cone_distance(a: &ConePoint, b: &ConePoint) -> f64 {
    let (l1, l2) = (a.radius, b.radius);
    if l1 == 0.0 || l2 == 0.0 {
        return l1 + l2;
    }
    let theta = tree_angle(&a.direction, &b.direction);
    if theta >= PI {
        return l1 + l2;
    }
    // (λ₁−λ₂)² + 4λ₁λ₂ sin²(θ/2): same as the law of cosines, stable near θ = 0
    let s = (0.5 * theta).sin();
    ((l1 - l2) * (l1 - l2) + 4.0 * l1 * l2 * s * s).sqrt()
}

/// Point at fraction `t` along the cone geodesic from `a` to `b`.
///
/// When the angle is at least π the geodesic runs through the apex.
/// Otherwise the sector over the tree path between the directions is
/// developed into the plane, the straight segment is sampled, and the polar
/// angle is mapped back onto the tree path.
pub fn cone_geodesic(a: &ConePoint, b: &ConePoint, t: f64) -> ConePoint {
    if t <= 0.0 {
        return *a;
    }
    if t >= 1.0 {
        return *b;
    }
    let (l1, l2) = (a.radius, b.radius);
    let theta = if a.is_apex() || b.is_apex() {
        0.0
    } else {
        tree_distance(&a.direction, &b.direction)
    };
    if a.is_apex() || b.is_apex() || theta == 0.0 {
        let dir = if a.is_apex() { b.direction } else { a.direction };
        return ConePoint::new((1.0 - t) * l1 + t * l2, dir);
    }
    if theta >= PI {
        let s = t * (l1 + l2);
        return if s <= l1 {
            ConePoint::new(l1 - s, a.direction)
        } else {
            ConePoint::new(s - l1, b.direction)
        };
    }
    let x = (1.0 - t) * l1 + t * l2 * theta.cos();
    let y = t * l2 * theta.sin();
    let r = x.hypot(y);
    let phi = y.atan2(x).clamp(0.0, theta);
    ConePoint::new(r, tree_geodesic(&a.direction, &b.direction, phi / theta))
}

/// Polar radius of the outer chord of the triangle over the edge containing
/// `y`: `2·cos(π/8) / cos(θ − π/8)` with `θ` the arclength offset of `y`
/// along its edge. Vertices give 2.
pub fn boundary_radius(y: &TreePoint) -> f64 {
    match y.edge() {
        None => 2.0,
        Some((_, theta)) => 2.0 * FRAC_PI_8.cos() / (theta - FRAC_PI_8).cos(),
    }
}

/// Membership in the truncated complex `X`, boundary included.
pub fn x_membership(p: &ConePoint, tol: f64) -> bool {
    p.is_apex() || p.radius <= boundary_radius(&p.direction) + tol
}

/// Distance from `p` to the nearest point `λ·e` with `e` an endpoint of `Y`.
pub fn distance_to_endpoint_family(p: &ConePoint, radius: f64) -> f64 {
    let e = match p.direction {
        TreePoint::Leaf { copy, leaf, .. } | TreePoint::Endpoint { copy, leaf } => TreePoint::e(copy, leaf),
        TreePoint::Branch { copy } | TreePoint::Trunk { copy, .. } => TreePoint::e(copy, 0),
        TreePoint::Root => TreePoint::e(0, 0),
    };
    cone_distance(p, &ConePoint::new(radius, e))
}

/// Distance from `p` to the nearest point `λ·b` with `b` a branch point of `Y`.
pub fn distance_to_branch_family(p: &ConePoint, radius: f64) -> f64 {
    let b = match p.direction {
        TreePoint::Root => TreePoint::b(0),
        TreePoint::Trunk { copy, .. }
        | TreePoint::Branch { copy }
        | TreePoint::Leaf { copy, .. }
        | TreePoint::Endpoint { copy, .. } => TreePoint::b(copy),
    };
    cone_distance(p, &ConePoint::new(radius, b))
}

/// The cone `X̂` (`truncated == false`) or the complex `X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConeSpace {
    pub truncated: bool,
}

impl ConeSpace {
    pub const fn full() -> Self {
        Self { truncated: false }
    }

    pub const fn complex_x() -> Self {
        Self { truncated: true }
    }
}

impl GeodesicSpace for ConeSpace {
    type Point = ConePoint;

    fn distance(&self, a: &ConePoint, b: &ConePoint) -> f64 {
        cone_distance(a, b)
    }

    fn geodesic(&self, a: &ConePoint, b: &ConePoint, t: f64) -> ConePoint {
        cone_geodesic(a, b, t)
    }

    fn contains(&self, p: &ConePoint, tol: f64) -> bool {
        !self.truncated || x_membership(p, tol)
    }

    fn circumcenter_hint(&self, points: &[ConePoint]) -> Option<ConePoint> {
        sector_circumcenter(points)
    }

    fn project_closed_form(&self, a: &ConePoint, b: &ConePoint, x: &ConePoint) -> Option<ConePoint> {
        // radial segments only: [o, λ·y] or [λ·y, o]
        let ray = match (a.is_apex(), b.is_apex()) {
            (true, false) => b,
            (false, true) => a,
            _ => return None,
        };
        if x.is_apex() {
            return Some(ConePoint::apex());
        }
        let theta = tree_angle(&ray.direction, &x.direction);
        let s = x.radius * theta.cos();
        Some(if s <= tol::SNAP {
            ConePoint::apex()
        } else if s >= ray.radius {
            *ray
        } else {
            ConePoint::new(s, ray.direction)
        })
    }

    fn name(&self) -> &'static str {
        if self.truncated {
            "cone-complex-x"
        } else {
            "cone-full"
        }
    }
}

fn max_sq_distance(c: &ConePoint, points: &[ConePoint]) -> f64 {
    points
        .iter()
        .map(|q| {
            let d = cone_distance(c, q);
            d * d
        })
        .fold(0.0, f64::max)
}

/// Circumcenter of a finite set by exact minimization over flat sectors.
///
/// The minimizer lies in the cone over the subtree spanned by the
/// directions, which is a union of flat wedges of angle π/4 (one per tree
/// edge). The objective is convex on each wedge, so nested golden-section
/// search over `0 ≤ y ≤ x ≤ R` in developed coordinates finds each wedge's
/// minimum; the apex and the midpoint of a diametral pair compete as exact
/// candidates.
pub fn sector_circumcenter(points: &[ConePoint]) -> Option<ConePoint> {
    let r_max = points.iter().map(|p| p.radius).fold(f64::NAN, f64::max);
    if r_max.is_nan() {
        return None;
    }
    let f = |c: &ConePoint| max_sq_distance(c, points);
    let mut candidates = vec![ConePoint::apex()];
    let (mut a, mut b, mut diam) = (0, 0, -1.0);
    for i in 0..points.len() {
        for j in i..points.len() {
            let d = cone_distance(&points[i], &points[j]);
            if d > diam {
                (a, b, diam) = (i, j, d);
            }
        }
    }
    candidates.push(cone_geodesic(&points[a], &points[b], 0.5));
    if r_max == 0.0 {
        return Some(ConePoint::apex());
    }

    let edges: BTreeSet<TreeEdge> = points
        .iter()
        .filter(|p| !p.is_apex())
        .flat_map(|p| p.direction.root_path_edges())
        .collect();
    let edges: Vec<TreeEdge> = edges.into_iter().collect();
    let search_tol = 1e-12 * r_max.max(1.0);
    let at = |edge: TreeEdge, x: f64, y: f64| {
        let phi = y.atan2(x).clamp(0.0, FRAC_PI_4);
        ConePoint::new(x.hypot(y), edge.point_at(phi))
    };
    let sector_best: Vec<(ConePoint, f64)> = edges
        .par_iter()
        .map(|&edge| {
            let inner = |x: f64| golden_section_min(|y| f(&at(edge, x, y)), 0.0, x, search_tol);
            let (x, _) = golden_section_min(|x| inner(x).1, 0.0, r_max, search_tol);
            let (y, fy) = inner(x);
            (at(edge, x, y), fy)
        })
        .collect();

    let mut best = (candidates[0], f(&candidates[0]));
    for c in candidates.into_iter().skip(1) {
        let fc = f(&c);
        if fc < best.1 {
            best = (c, fc);
        }
    }
    for (c, fc) in sector_best {
        if fc < best.1 {
            best = (c, fc);
        }
    }
    Some(best.0)
}

/// Uniformly chosen locus of `Y` with copy and leaf indices below `index_cap`.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R, index_cap: u64) -> TreePoint {
    let copy = rng.random_range(0..index_cap.max(1));
    let leaf = rng.random_range(0..index_cap.max(1));
    let t = rng.random_range(0.0..FRAC_PI_4);
    match rng.random_range(0..5u8) {
        0 => TreePoint::Root,
        1 => TreePoint::trunk(copy, t),
        2 => TreePoint::b(copy),
        3 => TreePoint::leaf(copy, leaf, t),
        _ => TreePoint::e(copy, leaf),
    }
}

/// Random point of `X` with direction from [`random_direction`] and radius
/// uniform below the boundary.
pub fn random_point_in_x<R: Rng + ?Sized>(rng: &mut R, index_cap: u64) -> ConePoint {
    let dir = random_direction(rng, index_cap);
    let u: f64 = rng.random_range(0.0..=1.0);
    ConePoint::new(u * boundary_radius(&dir), dir)
}

impl fmt::Display for ConePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cone:{}@{}", self.radius, self.direction)
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("bad cone point `{input}`: {reason}")]
pub struct ConeParseError {
    pub input: String,
    pub reason: String,
}

impl FromStr for ConePoint {
    type Err = ConeParseError;

    /// Parses `cone:<radius>@<locus>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: String| ConeParseError {
            input: s.to_string(),
            reason,
        };
        let body = s
            .trim()
            .strip_prefix("cone:")
            .ok_or_else(|| err("expected `cone:<radius>@<locus>`".into()))?;
        let (r, locus) = body
            .split_once('@')
            .ok_or_else(|| err("missing `@<locus>`".into()))?;
        let radius: f64 = r.parse().map_err(|_| err(format!("radius `{r}` is not a number")))?;
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(err("radius must be finite and nonnegative".into()));
        }
        let dir: TreePoint = locus.parse().map_err(|e: crate::tree::LocusParseError| err(e.reason))?;
        Ok(ConePoint::new(radius, dir))
    }
}
