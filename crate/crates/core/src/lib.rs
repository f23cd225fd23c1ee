//! Executable geometry for weak convergence in CAT(0) spaces.
//!
//! The library builds a bounded 2-dimensional CAT(0) complex `X`: the
//! Euclidean cone over a countable tree `Y`, truncated to the union of flat
//! triangles over the edges of `Y`. On it (and on plain metric trees) it
//! computes distances, geodesics, closest-point projections, circumcenters
//! and iterated-geodesic convex hulls, and it tests Δ-convergence of point
//! sequences against finite families of probe geodesics.
//!
//! Module map:
//!
//! - [`geom`]: the [`GeodesicSpace`](geom::GeodesicSpace) trait, projection,
//!   CAT(0) comparison defect.
//! - [`tree`], [`finite_tree`]: the tree `Y` and small weighted trees.
//! - [`cone`]: the cone over `Y` and the complex `X`.
//! - [`convex`]: hull approximation and circumcenters.
//! - [`weak`]: Δ-limit tests, asymptotic centers, closure audits.
//! - [`extraction`]: selecting a Δ-convergent sequence from a convergent net.
//! - [`harness`]: built-in scenarios and reports behind the `cat0lab` CLI.

pub mod cone;
pub mod convex;
pub mod extraction;
pub mod finite_tree;
pub mod geom;
pub mod harness;
pub mod space;
pub mod tol;
pub mod tree;
pub mod weak;

pub use cone::{ConePoint, ConeSpace};
pub use convex::{circumcenter, CircumData, HullApprox};
pub use geom::{GeodesicSegment, GeodesicSpace, GeomError};
pub use space::{Point, SpaceHandle, SpaceKind};
pub use tree::{TreePoint, TreeY};
