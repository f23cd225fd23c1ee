//! Space-agnostic geodesic machinery.
//!
//! Every shipped space implements [`GeodesicSpace`]: a closed-form metric and
//! the constant-speed parametrization of the unique geodesic between two
//! points, normalized to `t ∈ [0, 1]`. Projections, comparison checks, hulls
//! and circumcenters are written once against this trait.

use std::fmt;

use thiserror::Error;

use crate::tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("points belong to different spaces: expected {expected}, found {found}")]
    MixedSpaces {
        expected: &'static str,
        found: &'static str,
    },
    #[error("geodesic parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
}

/// A uniquely geodesic metric space.
///
/// `geodesic(a, b, t)` must return the point at fraction `t` of the way from
/// `a` to `b`, so that `d(γ(s), γ(t)) = |s − t|·d(a, b)`. Implementations may
/// assume `t ∈ [0, 1]`; the checked entry points live in this module.
pub trait GeodesicSpace: Sync {
    type Point: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64;

    fn geodesic(&self, a: &Self::Point, b: &Self::Point, t: f64) -> Self::Point;

    /// Membership in the (possibly truncated) space.
    fn contains(&self, _p: &Self::Point, _tol: f64) -> bool {
        true
    }

    /// Closed-form or otherwise accurate starting point for the circumcenter
    /// of a finite set.
    fn circumcenter_hint(&self, _points: &[Self::Point]) -> Option<Self::Point> {
        None
    }

    /// Exact projection of `x` onto `[a, b]` when the space knows one.
    fn project_closed_form(
        &self,
        _a: &Self::Point,
        _b: &Self::Point,
        _x: &Self::Point,
    ) -> Option<Self::Point> {
        None
    }

    fn name(&self) -> &'static str;
}

/// Ordered endpoint pair of the unique geodesic between them.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSegment<P> {
    pub start: P,
    pub end: P,
}

impl<P> GeodesicSegment<P> {
    pub fn new(start: P, end: P) -> Self {
        Self { start, end }
    }
}

fn check_param(t: f64) -> Result<(), GeomError> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(GeomError::ParameterOutOfRange(t))
    }
}

fn check_tol(tol: f64) -> Result<(), GeomError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(GeomError::InvalidTolerance(tol))
    }
}

/// Point at fraction `t` along the segment.
pub fn geodesic_point<S: GeodesicSpace>(
    space: &S,
    seg: &GeodesicSegment<S::Point>,
    t: f64,
) -> Result<S::Point, GeomError> {
    check_param(t)?;
    Ok(space.geodesic(&seg.start, &seg.end, t))
}

/// Length of the segment.
pub fn segment_length<S: GeodesicSpace>(space: &S, seg: &GeodesicSegment<S::Point>) -> f64 {
    space.distance(&seg.start, &seg.end)
}

/// Golden-section search for the minimizer of a unimodal function on `[lo, hi]`.
///
/// Returns `(argmin, min)`. The bracket shrinks by the golden ratio per
/// evaluation until it is narrower than `tol`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // keep the best of the interior probes; the midpoint can lose on kinks
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Closest-point projection of `x` onto the segment, returned with its
/// parameter.
///
/// `t ↦ d(γ(t), x)` is convex on a CAT(0) space, so golden-section search on
/// `[0, 1]` converges; endpoints are compared explicitly so that a projection
/// landing on an endpoint is returned exactly.
pub fn project_with_param<S: GeodesicSpace>(
    space: &S,
    seg: &GeodesicSegment<S::Point>,
    x: &S::Point,
    tol: f64,
) -> Result<(f64, S::Point), GeomError> {
    check_tol(tol)?;
    let len = space.distance(&seg.start, &seg.end);
    if len == 0.0 {
        return Ok((0.0, seg.start.clone()));
    }
    if let Some(p) = space.project_closed_form(&seg.start, &seg.end, x) {
        let t = (space.distance(&seg.start, &p) / len).clamp(0.0, 1.0);
        return Ok((t, p));
    }
    let objective = |t: f64| space.distance(&space.geodesic(&seg.start, &seg.end, t), x);
    let (t_star, f_star) = golden_section_min(objective, 0.0, 1.0, tol);
    let f0 = space.distance(&seg.start, x);
    let f1 = space.distance(&seg.end, x);
    if f0 <= f_star && f0 <= f1 {
        Ok((0.0, seg.start.clone()))
    } else if f1 <= f_star {
        Ok((1.0, seg.end.clone()))
    } else {
        Ok((t_star, space.geodesic(&seg.start, &seg.end, t_star)))
    }
}

/// Closest-point projection of `x` onto the segment.
pub fn project_to_segment<S: GeodesicSpace>(
    space: &S,
    seg: &GeodesicSegment<S::Point>,
    x: &S::Point,
    tol: f64,
) -> Result<S::Point, GeomError> {
    project_with_param(space, seg, x, tol).map(|(_, p)| p)
}

/// Defect of the CAT(0) midpoint comparison inequality for the triple.
///
/// `d²(z, m) − [½d²(z, x) + ½d²(z, y) − ¼d²(x, y)]` with `m` the midpoint of
/// `[x, y]`. Nonpositive (up to rounding) in a CAT(0) space.
pub fn cat0_midpoint_defect<S: GeodesicSpace>(
    space: &S,
    x: &S::Point,
    y: &S::Point,
    z: &S::Point,
) -> f64 {
    if x == y {
        return 0.0;
    }
    let m = space.geodesic(x, y, 0.5);
    let d = |a: &S::Point, b: &S::Point| space.distance(a, b);
    let dzm = d(z, &m);
    let dzx = d(z, x);
    let dzy = d(z, y);
    let dxy = d(x, y);
    dzm * dzm - (0.5 * dzx * dzx + 0.5 * dzy * dzy - 0.25 * dxy * dxy)
}

/// True if `a` and `b` are within `tol` of each other.
pub fn near<S: GeodesicSpace>(space: &S, a: &S::Point, b: &S::Point, tol: f64) -> bool {
    space.distance(a, b) <= tol
}

/// Default parameter tolerance for projection searches.
pub const fn default_projection_tol() -> f64 {
    tol::PROJECTION_PARAM
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_interior_minimum() {
        let (x, fx) = golden_section_min(|t| (t - 0.3).powi(2), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(fx < 1e-17);
    }

    #[test]
    fn golden_handles_kinked_objective() {
        let (x, _) = golden_section_min(|t| (t - 0.7).abs(), 0.0, 1.0, 1e-12);
        assert!((x - 0.7).abs() < 1e-9);
    }

    #[test]
    fn golden_boundary_minimum() {
        let (x, _) = golden_section_min(|t| t, 0.0, 1.0, 1e-12);
        assert!(x < 1e-9);
    }
}
