//! Runtime-tagged spaces and points.
//!
//! The algorithms are generic over [`GeodesicSpace`]; this layer lets callers
//! that only learn the space at runtime (the CLI, scenario configs) mix
//! handles and points, rejecting cross-space operations with
//! [`GeomError::MixedSpaces`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cone::{ConePoint, ConeSpace};
use crate::convex::{circumcenter, CircumData, SolverError};
use crate::finite_tree::{FinitePoint, FiniteTree};
use crate::geom::{self, GeodesicSegment, GeodesicSpace, GeomError};
use crate::tree::{TreePoint, TreeY};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    TreeY,
    ConeComplexX,
    ConeFull,
    FiniteTree,
}

impl SpaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceKind::TreeY => "tree-y",
            SpaceKind::ConeComplexX => "cone-complex-x",
            SpaceKind::ConeFull => "cone-full",
            SpaceKind::FiniteTree => "finite-tree",
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub enum SpaceHandle {
    TreeY,
    ConeComplexX,
    ConeFull,
    FiniteTree(Arc<FiniteTree>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Tree(TreePoint),
    Cone(ConePoint),
    Finite(FinitePoint),
}

impl Point {
    fn tag(&self) -> &'static str {
        match self {
            Point::Tree(_) => "tree point",
            Point::Cone(_) => "cone point",
            Point::Finite(_) => "finite-tree point",
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Tree(p) => write!(f, "{p}"),
            Point::Cone(p) => write!(f, "{p}"),
            Point::Finite(FinitePoint::Vertex(v)) => write!(f, "vertex:{v}"),
            Point::Finite(FinitePoint::OnEdge { edge, offset }) => write!(f, "edge:{edge}:{offset}"),
        }
    }
}

impl FromStr for Point {
    type Err = GeomError;

    /// `cone:<radius>@<locus>` gives a cone point, a bare locus a tree point.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim_start().starts_with("cone:") {
            s.parse::<ConePoint>()
                .map(Point::Cone)
                .map_err(|e| GeomError::InvalidPoint(e.to_string()))
        } else {
            s.parse::<TreePoint>()
                .map(Point::Tree)
                .map_err(|e| GeomError::InvalidPoint(e.to_string()))
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SpaceError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Solver(#[from] SolverError<Point>),
}

fn lift<P: fmt::Debug>(e: SolverError<P>, wrap: impl Fn(P) -> Point) -> SolverError<Point> {
    match e {
        SolverError::Empty => SolverError::Empty,
        SolverError::InvalidTolerance(t) => SolverError::InvalidTolerance(t),
        SolverError::NotConverged {
            iterations,
            worst_gap,
            best,
        } => SolverError::NotConverged {
            iterations,
            worst_gap,
            best: CircumData {
                center: wrap(best.center),
                radius: best.radius,
                objective: best.objective,
            },
        },
    }
}

impl SpaceHandle {
    pub fn kind(&self) -> SpaceKind {
        match self {
            SpaceHandle::TreeY => SpaceKind::TreeY,
            SpaceHandle::ConeComplexX => SpaceKind::ConeComplexX,
            SpaceHandle::ConeFull => SpaceKind::ConeFull,
            SpaceHandle::FiniteTree(_) => SpaceKind::FiniteTree,
        }
    }

    fn expected(&self) -> &'static str {
        match self {
            SpaceHandle::TreeY => "tree point",
            SpaceHandle::ConeComplexX | SpaceHandle::ConeFull => "cone point",
            SpaceHandle::FiniteTree(_) => "finite-tree point",
        }
    }

    fn mixed(&self, p: &Point) -> GeomError {
        GeomError::MixedSpaces {
            expected: self.expected(),
            found: p.tag(),
        }
    }

    fn tree<'a>(&self, p: &'a Point) -> Result<&'a TreePoint, GeomError> {
        match p {
            Point::Tree(t) => Ok(t),
            other => Err(self.mixed(other)),
        }
    }

    fn cone<'a>(&self, p: &'a Point) -> Result<&'a ConePoint, GeomError> {
        match p {
            Point::Cone(c) => Ok(c),
            other => Err(self.mixed(other)),
        }
    }

    fn finite<'a>(&self, p: &'a Point) -> Result<&'a FinitePoint, GeomError> {
        match p {
            Point::Finite(c) => Ok(c),
            other => Err(self.mixed(other)),
        }
    }

    fn cone_space(&self) -> ConeSpace {
        ConeSpace {
            truncated: matches!(self, SpaceHandle::ConeComplexX),
        }
    }

    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64, GeomError> {
        Ok(match self {
            SpaceHandle::TreeY => TreeY.distance(self.tree(a)?, self.tree(b)?),
            SpaceHandle::ConeComplexX | SpaceHandle::ConeFull => {
                self.cone_space().distance(self.cone(a)?, self.cone(b)?)
            }
            SpaceHandle::FiniteTree(t) => t.distance(self.finite(a)?, self.finite(b)?),
        })
    }

    pub fn geodesic_point(&self, seg: &GeodesicSegment<Point>, t: f64) -> Result<Point, GeomError> {
        Ok(match self {
            SpaceHandle::TreeY => {
                let s = GeodesicSegment::new(*self.tree(&seg.start)?, *self.tree(&seg.end)?);
                Point::Tree(geom::geodesic_point(&TreeY, &s, t)?)
            }
            SpaceHandle::ConeComplexX | SpaceHandle::ConeFull => {
                let s = GeodesicSegment::new(*self.cone(&seg.start)?, *self.cone(&seg.end)?);
                Point::Cone(geom::geodesic_point(&self.cone_space(), &s, t)?)
            }
            SpaceHandle::FiniteTree(tree) => {
                let s = GeodesicSegment::new(*self.finite(&seg.start)?, *self.finite(&seg.end)?);
                Point::Finite(geom::geodesic_point(tree.as_ref(), &s, t)?)
            }
        })
    }

    pub fn project_to_segment(&self, seg: &GeodesicSegment<Point>, x: &Point, tol: f64) -> Result<Point, GeomError> {
        Ok(match self {
            SpaceHandle::TreeY => {
                let s = GeodesicSegment::new(*self.tree(&seg.start)?, *self.tree(&seg.end)?);
                Point::Tree(geom::project_to_segment(&TreeY, &s, self.tree(x)?, tol)?)
            }
            SpaceHandle::ConeComplexX | SpaceHandle::ConeFull => {
                let s = GeodesicSegment::new(*self.cone(&seg.start)?, *self.cone(&seg.end)?);
                Point::Cone(geom::project_to_segment(&self.cone_space(), &s, self.cone(x)?, tol)?)
            }
            SpaceHandle::FiniteTree(tree) => {
                let s = GeodesicSegment::new(*self.finite(&seg.start)?, *self.finite(&seg.end)?);
                Point::Finite(geom::project_to_segment(tree.as_ref(), &s, self.finite(x)?, tol)?)
            }
        })
    }

    pub fn cat0_midpoint_check(&self, x: &Point, y: &Point, z: &Point) -> Result<f64, GeomError> {
        Ok(match self {
            SpaceHandle::TreeY => geom::cat0_midpoint_defect(&TreeY, self.tree(x)?, self.tree(y)?, self.tree(z)?),
            SpaceHandle::ConeComplexX | SpaceHandle::ConeFull => {
                geom::cat0_midpoint_defect(&self.cone_space(), self.cone(x)?, self.cone(y)?, self.cone(z)?)
            }
            SpaceHandle::FiniteTree(t) => {
                geom::cat0_midpoint_defect(t.as_ref(), self.finite(x)?, self.finite(y)?, self.finite(z)?)
            }
        })
    }

    pub fn contains(&self, p: &Point, tol: f64) -> Result<bool, GeomError> {
        Ok(match self {
            SpaceHandle::TreeY => {
                self.tree(p)?;
                true
            }
            SpaceHandle::ConeComplexX | SpaceHandle::ConeFull => self.cone_space().contains(self.cone(p)?, tol),
            SpaceHandle::FiniteTree(_) => {
                self.finite(p)?;
                true
            }
        })
    }

    pub fn circumcenter(&self, points: &[Point], tol: f64) -> Result<CircumData<Point>, SpaceError> {
        match self {
            SpaceHandle::TreeY => {
                let pts = points.iter().map(|p| self.tree(p).copied()).collect::<Result<Vec<_>, _>>()?;
                let c = circumcenter(&TreeY, &pts, tol).map_err(|e| lift(e, Point::Tree))?;
                Ok(CircumData {
                    center: Point::Tree(c.center),
                    radius: c.radius,
                    objective: c.objective,
                })
            }
            SpaceHandle::ConeComplexX | SpaceHandle::ConeFull => {
                let pts = points.iter().map(|p| self.cone(p).copied()).collect::<Result<Vec<_>, _>>()?;
                let c = circumcenter(&self.cone_space(), &pts, tol).map_err(|e| lift(e, Point::Cone))?;
                Ok(CircumData {
                    center: Point::Cone(c.center),
                    radius: c.radius,
                    objective: c.objective,
                })
            }
            SpaceHandle::FiniteTree(t) => {
                let pts = points.iter().map(|p| self.finite(p).copied()).collect::<Result<Vec<_>, _>>()?;
                let c = circumcenter(t.as_ref(), &pts, tol).map_err(|e| lift(e, Point::Finite))?;
                Ok(CircumData {
                    center: Point::Finite(c.center),
                    radius: c.radius,
                    objective: c.objective,
                })
            }
        }
    }
}
