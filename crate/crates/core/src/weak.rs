//! Δ-convergence (weak convergence) tests.
//!
//! A bounded sequence converges weakly to `x` when its closest-point
//! projections onto every geodesic issuing from `x` converge to `x`. The
//! universal quantifier over geodesics is replaced by a finite
//! [`ProbeFamily`], and the limit by a finite tail window, so every verdict
//! here is relative to the declared probes and windows.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cone::{self, ConePoint};
use crate::convex::{circumcenter, hull_distance, CircumData, HullApprox};
use crate::geom::{project_to_segment, GeodesicSegment, GeodesicSpace};
use crate::tol;

pub const DEFAULT_EPS: f64 = 1e-6;
pub const DEFAULT_TAIL_START: usize = 8;
pub const DEFAULT_TAIL_LEN: usize = 24;
pub const DEFAULT_RANDOM_PROBES: usize = 16;

/// Probe targets closer than this to the candidate are skipped.
const DEGENERATE_PROBE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeakError {
    #[error("term {index} lies at distance {distance} from the anchor, beyond the declared bound {bound}")]
    Unbounded { index: usize, distance: f64, bound: f64 },
    #[error("empty tail window")]
    EmptyWindow,
    #[error("window [{start}, {end}) exceeds the {len} available terms")]
    WindowOutOfRange { start: usize, end: usize, len: usize },
    #[error("eps must be positive, got {0}")]
    InvalidEps(f64),
    #[error("circumcenter solver failed: {0}")]
    Solver(String),
    #[error("sequence {sequence}: term {index} is not in the set")]
    NotInSet { sequence: usize, index: usize },
}

type Generator<P> = Arc<dyn Fn(usize) -> P + Send + Sync>;

/// A bounded sequence given by a generator, with a declared ball
/// `B(anchor, bound)` that must contain every term.
#[derive(Clone)]
pub struct PointSequence<P> {
    generator: Generator<P>,
    pub anchor: P,
    pub bound: f64,
    /// `Some(n)` for finite sequences with terms `0..n`
    pub len: Option<usize>,
}

impl<P: fmt::Debug> fmt::Debug for PointSequence<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointSequence")
            .field("anchor", &self.anchor)
            .field("bound", &self.bound)
            .field("len", &self.len)
            .finish_non_exhaustive()
    }
}

impl<P: Clone + Send + Sync + 'static> PointSequence<P> {
    pub fn new(anchor: P, bound: f64, generator: impl Fn(usize) -> P + Send + Sync + 'static) -> Self {
        Self {
            generator: Arc::new(generator),
            anchor,
            bound,
            len: None,
        }
    }

    pub fn from_terms(anchor: P, bound: f64, terms: Vec<P>) -> Self {
        let len = terms.len();
        let terms = Arc::new(terms);
        Self {
            generator: Arc::new(move |n| terms[n].clone()),
            anchor,
            bound,
            len: Some(len),
        }
    }

    pub fn term(&self, n: usize) -> P {
        (self.generator)(n)
    }

    /// The subsequence `n ↦ x_{offset + stride·n}`.
    pub fn subsequence(&self, offset: usize, stride: usize) -> Self {
        let stride = stride.max(1);
        let parent = self.generator.clone();
        Self {
            generator: Arc::new(move |n| parent(offset + stride * n)),
            anchor: self.anchor.clone(),
            bound: self.bound,
            len: self.len.map(|l| l.saturating_sub(offset).div_ceil(stride)),
        }
    }

    /// Interleaves two sequences: even terms from `a`, odd terms from `b`.
    pub fn alternate(a: &Self, b: &Self) -> Self {
        let (ga, gb) = (a.generator.clone(), b.generator.clone());
        Self {
            generator: Arc::new(move |n| if n % 2 == 0 { ga(n / 2) } else { gb(n / 2) }),
            anchor: a.anchor.clone(),
            bound: a.bound.max(b.bound),
            len: None,
        }
    }

    /// Terms `start..start+len`, checked against the declared bound.
    pub fn window<S: GeodesicSpace<Point = P>>(&self, space: &S, start: usize, len: usize) -> Result<Vec<P>, WeakError> {
        if len == 0 {
            return Err(WeakError::EmptyWindow);
        }
        if let Some(n) = self.len {
            if start + len > n {
                return Err(WeakError::WindowOutOfRange {
                    start,
                    end: start + len,
                    len: n,
                });
            }
        }
        (start..start + len)
            .map(|i| {
                let x = self.term(i);
                let d = space.distance(&self.anchor, &x);
                if d > self.bound + tol::CLOSED_FORM {
                    Err(WeakError::Unbounded {
                        index: i,
                        distance: d,
                        bound: self.bound,
                    })
                } else {
                    Ok(x)
                }
            })
            .collect()
    }
}

/// Targets `q_j` of the probe geodesics `[x, q_j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeFamily<P> {
    pub targets: Vec<P>,
}

impl<P: Clone> ProbeFamily<P> {
    pub fn new(targets: Vec<P>) -> Self {
        Self { targets }
    }

    pub fn extended(&self, more: &[P]) -> Self {
        let mut targets = self.targets.clone();
        targets.extend_from_slice(more);
        Self { targets }
    }
}

/// Named points plus `count` seeded-random points of `X` whose copy and leaf
/// indices stay below `index_cap`.
pub fn default_cone_probes(named: &[ConePoint], count: usize, seed: u64, index_cap: u64) -> ProbeFamily<ConePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets = named.to_vec();
    targets.extend((0..count).map(|_| cone::random_point_in_x(&mut rng, index_cap)));
    ProbeFamily { targets }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeTrace {
    pub probe: usize,
    /// `d(Proj(x_n), x)` for each term of the window
    pub distances: Vec<f64>,
    pub max_distance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaVerdict {
    pub pass: bool,
    pub eps: f64,
    pub tail_start: usize,
    pub tail_len: usize,
    pub traces: Vec<ProbeTrace>,
    /// probes skipped because their target coincides with the candidate
    pub skipped: Vec<usize>,
}

impl DeltaVerdict {
    pub fn worst(&self) -> f64 {
        self.traces.iter().map(|t| t.max_distance).fold(0.0, f64::max)
    }
}

/// PASS iff for every probe, `max_n d(Proj_{[x,q]}(x_n), x) ≤ eps` over the
/// tail window.
pub fn delta_limit_test<S: GeodesicSpace>(
    space: &S,
    seq: &PointSequence<S::Point>,
    x: &S::Point,
    probes: &ProbeFamily<S::Point>,
    eps: f64,
    tail_start: usize,
    tail_len: usize,
) -> Result<DeltaVerdict, WeakError>
where
    S::Point: 'static,
{
    if eps.is_nan() || eps <= 0.0 {
        return Err(WeakError::InvalidEps(eps));
    }
    let terms = seq.window(space, tail_start, tail_len)?;
    let (skipped, active): (Vec<_>, Vec<_>) = probes
        .targets
        .iter()
        .enumerate()
        .partition(|(_, q)| space.distance(x, q) <= DEGENERATE_PROBE);
    let traces: Vec<ProbeTrace> = active
        .par_iter()
        .map(|&(probe, q)| {
            let seg = GeodesicSegment::new(x.clone(), q.clone());
            let distances: Vec<f64> = terms
                .iter()
                .map(|xn| {
                    let proj = project_to_segment(space, &seg, xn, tol::PROJECTION_PARAM)
                        .expect("projection tolerance is positive");
                    space.distance(&proj, x)
                })
                .collect();
            let max_distance = distances.iter().copied().fold(0.0, f64::max);
            ProbeTrace {
                probe,
                distances,
                max_distance,
                pass: max_distance <= eps,
            }
        })
        .collect();
    Ok(DeltaVerdict {
        pass: traces.iter().all(|t| t.pass),
        eps,
        tail_start,
        tail_len,
        traces,
        skipped: skipped.into_iter().map(|(i, _)| i).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticCenter<P> {
    pub circum: CircumData<P>,
    pub tail_start: usize,
    pub tail_len: usize,
}

/// Circumcenter of the tail window, the finite stand-in for the minimizer of
/// `y ↦ limsup d²(y, x_n)`.
pub fn asymptotic_center<S: GeodesicSpace>(
    space: &S,
    seq: &PointSequence<S::Point>,
    tail_start: usize,
    tail_len: usize,
    tol: f64,
) -> Result<AsymptoticCenter<S::Point>, WeakError>
where
    S::Point: 'static,
{
    let terms = seq.window(space, tail_start, tail_len)?;
    let circum = circumcenter(space, &terms, tol).map_err(|e| WeakError::Solver(e.to_string()))?;
    Ok(AsymptoticCenter {
        circum,
        tail_start,
        tail_len,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitCandidate<P> {
    pub window: (usize, usize),
    pub center: P,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitReport<P> {
    pub limit: Option<P>,
    pub candidates: Vec<LimitCandidate<P>>,
    /// largest distance between window centers
    pub center_spread: f64,
    pub stable: bool,
}

/// Default stability windows `[N, N+len)` and `[2N, 2N+len)`.
pub fn default_windows(tail_start: usize, tail_len: usize) -> Vec<(usize, usize)> {
    vec![(tail_start, tail_len), (2 * tail_start, tail_len)]
}

/// Asymptotic centers of each window become candidates; a candidate is
/// certified when it passes the Δ-test on every window. Nothing is returned
/// if the centers disagree by more than `eps` or if two certified candidates
/// lie more than `2·eps` apart.
pub fn weak_limit_report<S: GeodesicSpace>(
    space: &S,
    seq: &PointSequence<S::Point>,
    probes: &ProbeFamily<S::Point>,
    eps: f64,
    windows: &[(usize, usize)],
) -> Result<LimitReport<S::Point>, WeakError>
where
    S::Point: 'static,
{
    if windows.is_empty() {
        return Err(WeakError::EmptyWindow);
    }
    let centers = windows
        .iter()
        .map(|&(s, l)| asymptotic_center(space, seq, s, l, tol::ITERATIVE).map(|c| c.circum.center))
        .collect::<Result<Vec<_>, _>>()?;
    let mut spread: f64 = 0.0;
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            spread = spread.max(space.distance(&centers[i], &centers[j]));
        }
    }
    let stable = spread <= eps;
    let mut candidates = Vec::with_capacity(centers.len());
    for (&window, center) in windows.iter().zip(centers) {
        let mut certified = stable;
        for &(s, l) in windows {
            if !certified {
                break;
            }
            certified = delta_limit_test(space, seq, &center, probes, eps, s, l)?.pass;
        }
        candidates.push(LimitCandidate {
            window,
            center,
            certified,
        });
    }
    let certified: Vec<&S::Point> = candidates.iter().filter(|c| c.certified).map(|c| &c.center).collect();
    let conflicting = certified
        .iter()
        .enumerate()
        .any(|(i, a)| certified[i + 1..].iter().any(|b| space.distance(a, b) > 2.0 * eps));
    let limit = if conflicting {
        None
    } else {
        certified.first().map(|c| (*c).clone())
    };
    Ok(LimitReport {
        limit,
        candidates,
        center_spread: spread,
        stable,
    })
}

/// The certified weak limit, if any.
pub fn weak_limit_detect<S: GeodesicSpace>(
    space: &S,
    seq: &PointSequence<S::Point>,
    probes: &ProbeFamily<S::Point>,
    eps: f64,
    windows: &[(usize, usize)],
) -> Option<S::Point>
where
    S::Point: 'static,
{
    weak_limit_report(space, seq, probes, eps, windows).ok().and_then(|r| r.limit)
}

/// One piece of a [`SetDescription`].
#[derive(Clone)]
pub enum SetPart<P> {
    Singleton(P),
    Ball { center: P, radius: f64 },
    Hull(Arc<HullApprox<P>>),
    /// a named family with a distance function to it
    Family {
        name: String,
        distance: Arc<dyn Fn(&P) -> f64 + Send + Sync>,
    },
}

impl<P: fmt::Debug> fmt::Debug for SetPart<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetPart::Singleton(p) => f.debug_tuple("Singleton").field(p).finish(),
            SetPart::Ball { center, radius } => {
                f.debug_struct("Ball").field("center", center).field("radius", radius).finish()
            }
            SetPart::Hull(h) => write!(f, "Hull({} points)", h.len()),
            SetPart::Family { name, .. } => write!(f, "Family({name})"),
        }
    }
}

impl SetPart<ConePoint> {
    /// `λ·E`: all endpoints of `Y` at radius `λ`.
    pub fn endpoints(radius: f64) -> Self {
        SetPart::Family {
            name: format!("{radius}·E"),
            distance: Arc::new(move |p| cone::distance_to_endpoint_family(p, radius)),
        }
    }

    /// `λ·B`: all branch points of `Y` at radius `λ`.
    pub fn branch_points(radius: f64) -> Self {
        SetPart::Family {
            name: format!("{radius}·B"),
            distance: Arc::new(move |p| cone::distance_to_branch_family(p, radius)),
        }
    }
}

/// A finite union of described pieces.
#[derive(Clone, Debug)]
pub struct SetDescription<P> {
    pub parts: Vec<SetPart<P>>,
}

impl<P: Clone> SetDescription<P> {
    pub fn new(parts: Vec<SetPart<P>>) -> Self {
        Self { parts }
    }

    pub fn distance_to<S: GeodesicSpace<Point = P>>(&self, space: &S, q: &P) -> f64 {
        self.parts
            .iter()
            .map(|part| match part {
                SetPart::Singleton(p) => space.distance(p, q),
                SetPart::Ball { center, radius } => (space.distance(center, q) - radius).max(0.0),
                SetPart::Hull(h) => hull_distance(space, h, q),
                SetPart::Family { distance, .. } => distance(q),
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains<S: GeodesicSpace<Point = P>>(&self, space: &S, q: &P, eps: f64) -> bool {
        self.distance_to(space, q) <= eps
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceAudit<P> {
    pub limit: Option<P>,
    /// distance from the detected limit to the set
    pub limit_distance: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosureVerdict<P> {
    pub pass: bool,
    pub sequences: Vec<SequenceAudit<P>>,
}

/// Necessary-condition audit of sequential Δ-closedness: every detected weak
/// limit of every given sequence must lie in `set` within `eps`. Terms of
/// each window are required to lie in the set.
pub fn sequential_closure_check<S: GeodesicSpace>(
    space: &S,
    set: &SetDescription<S::Point>,
    seqs: &[PointSequence<S::Point>],
    probes: &ProbeFamily<S::Point>,
    eps: f64,
    windows: &[(usize, usize)],
) -> Result<ClosureVerdict<S::Point>, WeakError>
where
    S::Point: 'static,
{
    let mut audits = Vec::with_capacity(seqs.len());
    for (k, seq) in seqs.iter().enumerate() {
        for &(s, l) in windows {
            for (i, x) in seq.window(space, s, l)?.iter().enumerate() {
                if !set.contains(space, x, eps) {
                    return Err(WeakError::NotInSet {
                        sequence: k,
                        index: s + i,
                    });
                }
            }
        }
        let report = weak_limit_report(space, seq, probes, eps, windows)?;
        let limit_distance = report.limit.as_ref().map(|x| set.distance_to(space, x));
        audits.push(SequenceAudit {
            pass: limit_distance.is_none_or(|d| d <= eps),
            limit: report.limit,
            limit_distance,
        });
    }
    Ok(ClosureVerdict {
        pass: audits.iter().all(|a| a.pass),
        sequences: audits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::ConeSpace;
    use crate::tree::TreePoint;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn endpoints_distinct_copies() -> PointSequence<ConePoint> {
        PointSequence::new(ConePoint::apex(), 2.0, |n| ConePoint::new(1.0, TreePoint::e(n as u64, 0)))
    }

    fn probes() -> ProbeFamily<ConePoint> {
        let named = [
            ConePoint::apex(),
            ConePoint::new(0.5, TreePoint::p()),
            ConePoint::new(FRAC_1_SQRT_2, TreePoint::b(1)),
        ];
        default_cone_probes(&named, DEFAULT_RANDOM_PROBES, 7, DEFAULT_TAIL_START as u64)
    }

    #[test]
    fn constant_sequence_passes() {
        let x = ConePoint::new(0.4, TreePoint::leaf(2, 2, 0.3));
        let seq = PointSequence::new(x, 0.0, move |_| x);
        let v = delta_limit_test(&ConeSpace::complex_x(), &seq, &x, &probes(), 1e-12, 0, 10).unwrap();
        assert!(v.pass);
        assert_eq!(v.worst(), 0.0);
    }

    #[test]
    fn endpoints_project_exactly_to_apex() {
        let space = ConeSpace::complex_x();
        let v = delta_limit_test(&space, &endpoints_distinct_copies(), &ConePoint::apex(), &probes(), 1e-6, 8, 24)
            .unwrap();
        assert!(v.pass);
        // the apex candidate itself is skipped as degenerate
        assert_eq!(v.skipped, vec![0]);
        assert_eq!(v.worst(), 0.0);
    }

    #[test]
    fn unbounded_terms_rejected() {
        let seq = PointSequence::new(ConePoint::apex(), 1.0, |n| ConePoint::new(n as f64, TreePoint::b(1)));
        let err = delta_limit_test(&ConeSpace::full(), &seq, &ConePoint::apex(), &probes(), 1e-6, 0, 5).unwrap_err();
        assert!(matches!(err, WeakError::Unbounded { index: 2, .. }));
    }

    #[test]
    fn window_errors() {
        let seq = endpoints_distinct_copies();
        let space = ConeSpace::full();
        assert_eq!(
            delta_limit_test(&space, &seq, &ConePoint::apex(), &probes(), 1e-6, 0, 0).unwrap_err(),
            WeakError::EmptyWindow
        );
        assert!(matches!(
            delta_limit_test(&space, &seq, &ConePoint::apex(), &probes(), -1.0, 0, 3),
            Err(WeakError::InvalidEps(_))
        ));
        let finite = PointSequence::from_terms(ConePoint::apex(), 2.0, vec![ConePoint::apex(); 4]);
        assert!(matches!(finite.window(&space, 2, 3), Err(WeakError::WindowOutOfRange { .. })));
    }

    #[test]
    fn asymptotic_center_of_distinct_copies_is_apex() {
        let c = asymptotic_center(&ConeSpace::complex_x(), &endpoints_distinct_copies(), 1, 20, 1e-6).unwrap();
        assert!(c.circum.center.radius() < 1e-4);
        assert!((c.circum.radius - 1.0).abs() < 1e-9);
    }

    #[test]
    fn detect_same_copy_limit() {
        let seq = PointSequence::new(ConePoint::apex(), 2.0, |n| ConePoint::new(1.0, TreePoint::e(1, n as u64)));
        let space = ConeSpace::complex_x();
        let limit = weak_limit_detect(&space, &seq, &probes(), 1e-6, &default_windows(8, 24)).unwrap();
        let expected = ConePoint::new(FRAC_1_SQRT_2, TreePoint::b(1));
        assert!(space.distance(&limit, &expected) < 1e-6);
    }

    #[test]
    fn subsequence_indices() {
        let seq = endpoints_distinct_copies().subsequence(3, 2);
        assert_eq!(seq.term(0).direction(), TreePoint::e(3, 0));
        assert_eq!(seq.term(2).direction(), TreePoint::e(7, 0));
        let fin = PointSequence::from_terms(ConePoint::apex(), 1.0, vec![ConePoint::apex(); 7]).subsequence(1, 2);
        assert_eq!(fin.len, Some(3));
    }

    #[test]
    fn set_membership() {
        let space = ConeSpace::complex_x();
        let a = SetDescription::new(vec![
            SetPart::endpoints(1.0),
            SetPart::branch_points(FRAC_1_SQRT_2),
            SetPart::Singleton(ConePoint::new(0.5, TreePoint::p())),
            SetPart::Singleton(ConePoint::apex()),
        ]);
        assert!(a.contains(&space, &ConePoint::new(1.0, TreePoint::e(9, 3)), 1e-12));
        assert!(a.contains(&space, &ConePoint::new(FRAC_1_SQRT_2, TreePoint::b(4)), 1e-12));
        assert!(!a.contains(&space, &ConePoint::new(0.25, TreePoint::p()), 1e-3));
        assert!(!a.contains(&space, &ConePoint::new(1.0, TreePoint::b(4)), 1e-3));
        let ball = SetDescription::new(vec![SetPart::Ball {
            center: ConePoint::apex(),
            radius: 1.0,
        }]);
        assert!(ball.contains(&space, &ConePoint::new(0.9, TreePoint::b(2)), 0.0));
    }

    #[test]
    fn closure_precondition() {
        let space = ConeSpace::complex_x();
        let only_apex = SetDescription::new(vec![SetPart::Singleton(ConePoint::apex())]);
        let err = sequential_closure_check(
            &space,
            &only_apex,
            &[endpoints_distinct_copies()],
            &probes(),
            1e-6,
            &default_windows(8, 24),
        )
        .unwrap_err();
        assert_eq!(err, WeakError::NotInSet { sequence: 0, index: 8 });
    }
}
