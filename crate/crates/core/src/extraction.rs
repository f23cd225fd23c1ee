//! Extracting a Δ-convergent sequence from a Δ-convergent net.
//!
//! Given a bounded net `(x_α)` converging weakly to `x` with
//! `d(x_α, x) → r > 0`, indices `α₁ ≤ α₂ ≤ …` are chosen so that at step `k`
//! the next point satisfies
//!
//! 1. `|d(x_α, x)/r − 1| ≤ 2^{−k−1}`, and
//! 2. for every nonempty `S ⊆ {1..k}`, the projection of `x_α` onto
//!    `[x, m_S]` lies within `2^{−k−1}·r` of `x`, where `m_S` is the
//!    circumcenter of `{x_{α_i} : i ∈ S}`.
//!
//! The net itself is abstract; [`NetOracle::advance`] models "the net
//! converges, so such an index exists" by searching upward from a lower
//! bound. When `r = 0` the selection only has to converge metrically.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cone::ConePoint;
use crate::convex::{circumcenter, CircumData};
use crate::geom::{project_to_segment, GeodesicSegment, GeodesicSpace};
use crate::tol;
use crate::tree::TreePoint;
use crate::weak::PointSequence;

/// Largest supported number of extracted points; step `k` solves `2^k − 1`
/// circumcenters.
pub const MAX_STEPS: usize = 14;

/// A requirement on the next sampled point.
#[derive(Clone, Debug, PartialEq)]
pub enum Constraint<P> {
    /// `|d(x_α, x)/r − 1| ≤ bound` for `r > 0`, `d(x_α, x) ≤ bound` for `r = 0`
    Radius { center: P, r: f64, bound: f64 },
    /// `d(Proj_{[from, toward]}(x_α), from) ≤ bound`
    Projection { subset: u32, from: P, toward: P, bound: f64 },
}

impl<P: Clone> Constraint<P> {
    /// Nonnegative iff satisfied.
    pub fn slack<S: GeodesicSpace<Point = P>>(&self, space: &S, point: &P) -> f64 {
        match self {
            Constraint::Radius { center, r, bound } => {
                let d = space.distance(point, center);
                if *r > 0.0 {
                    bound - (d / r - 1.0).abs()
                } else {
                    bound - d
                }
            }
            Constraint::Projection {
                from, toward, bound, ..
            } => {
                let seg = GeodesicSegment::new(from.clone(), toward.clone());
                let proj = project_to_segment(space, &seg, point, tol::PROJECTION_PARAM)
                    .expect("projection tolerance is positive");
                bound - space.distance(&proj, from)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Constraint::Radius { bound, .. } => format!("radius condition (bound {bound:e})"),
            Constraint::Projection { subset, bound, .. } => {
                format!("projection condition for subset {subset:#b} (bound {bound:e})")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("no index satisfied the constraints after {tried} candidates; last violated: {constraint} (slack {slack:e})")]
pub struct AdvanceFailure {
    pub constraint: String,
    pub slack: f64,
    pub tried: usize,
}

/// A net over a directed index set, with a constrained search upward.
pub trait NetOracle<S: GeodesicSpace> {
    type Index: Clone + fmt::Debug + Send + Sync;

    fn initial(&self) -> Self::Index;

    fn sample(&self, index: &Self::Index) -> S::Point;

    /// `a ≥ b` in the directed order.
    fn dominates(&self, a: &Self::Index, b: &Self::Index) -> bool;

    /// An index `≥ lower` whose sample satisfies every constraint.
    fn advance(
        &self,
        space: &S,
        lower: &Self::Index,
        constraints: &[Constraint<S::Point>],
    ) -> Result<Self::Index, AdvanceFailure>;

    /// Declared ball `(center, radius)` containing every sample.
    fn bound(&self) -> (S::Point, f64);
}

/// Returns the first candidate whose sample satisfies all constraints.
pub fn first_satisfying<S, I>(
    space: &S,
    candidates: impl Iterator<Item = I>,
    sample: impl Fn(&I) -> S::Point,
    constraints: &[Constraint<S::Point>],
) -> Result<I, AdvanceFailure>
where
    S: GeodesicSpace,
{
    let mut tried = 0;
    let mut last = (String::from("none"), f64::NAN);
    for idx in candidates {
        tried += 1;
        let x = sample(&idx);
        match constraints
            .iter()
            .map(|c| (c, c.slack(space, &x)))
            .find(|(_, s)| *s < 0.0)
        {
            None => return Ok(idx),
            Some((c, s)) => last = (c.describe(), s),
        }
    }
    Err(AdvanceFailure {
        constraint: last.0,
        slack: last.1,
        tried,
    })
}

/// A sequence viewed as a net over `ℕ`. `advance` moves strictly forward.
#[derive(Clone, Debug)]
pub struct SequenceNet<P> {
    pub seq: PointSequence<P>,
    pub search_cap: usize,
}

impl<P> SequenceNet<P> {
    pub fn new(seq: PointSequence<P>) -> Self {
        Self {
            seq,
            search_cap: 100_000,
        }
    }
}

impl<S> NetOracle<S> for SequenceNet<S::Point>
where
    S: GeodesicSpace,
    S::Point: 'static,
{
    type Index = usize;

    fn initial(&self) -> usize {
        0
    }

    fn sample(&self, index: &usize) -> S::Point {
        self.seq.term(*index)
    }

    fn dominates(&self, a: &usize, b: &usize) -> bool {
        a >= b
    }

    fn advance(&self, space: &S, lower: &usize, constraints: &[Constraint<S::Point>]) -> Result<usize, AdvanceFailure> {
        let end = match self.seq.len {
            Some(n) => n.min(lower + 1 + self.search_cap),
            None => lower + 1 + self.search_cap,
        };
        first_satisfying(space, lower + 1..end, |&n| self.seq.term(n), constraints)
    }

    fn bound(&self) -> (S::Point, f64) {
        (self.seq.anchor.clone(), self.seq.bound)
    }
}

/// Net indexed by finite subsets of `ℕ` ordered by inclusion. The sample at
/// `F` is `radius·e_{m, leaf}` with `m = max(F ∪ {floor}) + 1`, a copy that is
/// larger than every index in use. It converges weakly to the apex with
/// `d(x_F, o) = radius`.
#[derive(Clone, Debug)]
pub struct FiniteSubsetNet {
    pub floor: u64,
    pub leaf: u64,
    pub radius: f64,
    pub search_cap: u64,
}

impl FiniteSubsetNet {
    pub fn new(floor: u64) -> Self {
        Self {
            floor,
            leaf: 0,
            radius: 1.0,
            search_cap: 10_000,
        }
    }

    fn top(&self, f: &BTreeSet<u64>) -> u64 {
        f.last().copied().unwrap_or(self.floor).max(self.floor)
    }
}

impl<S: GeodesicSpace<Point = ConePoint>> NetOracle<S> for FiniteSubsetNet {
    type Index = BTreeSet<u64>;

    fn initial(&self) -> BTreeSet<u64> {
        BTreeSet::new()
    }

    fn sample(&self, index: &BTreeSet<u64>) -> ConePoint {
        ConePoint::new(self.radius, TreePoint::e(self.top(index) + 1, self.leaf))
    }

    fn dominates(&self, a: &BTreeSet<u64>, b: &BTreeSet<u64>) -> bool {
        a.is_superset(b)
    }

    fn advance(
        &self,
        space: &S,
        lower: &BTreeSet<u64>,
        constraints: &[Constraint<ConePoint>],
    ) -> Result<BTreeSet<u64>, AdvanceFailure> {
        let g = self.top(lower);
        let candidates = (1..=self.search_cap).map(|j| {
            let mut f = lower.clone();
            f.extend(g + 1..=g + j);
            f
        });
        first_satisfying(
            space,
            candidates,
            |f| <Self as NetOracle<S>>::sample(self, f),
            constraints,
        )
    }

    fn bound(&self) -> (ConePoint, f64) {
        (ConePoint::apex(), self.radius)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractionError {
    #[error("at least one step is required")]
    ZeroSteps,
    #[error("{requested} steps requested; subset enumeration is capped at {cap}")]
    TooManySteps { requested: usize, cap: usize },
    #[error("r must be finite and nonnegative, got {0}")]
    BadRadius(f64),
    #[error("step {step}: {failure}")]
    AdvanceFailed { step: usize, failure: AdvanceFailure },
    #[error("step {step}: oracle returned an index not above the previous one")]
    NotDirected { step: usize },
    #[error("step {step}: sample lies outside the declared ball")]
    OutOfBounds { step: usize },
    #[error("circumcenter solver failed: {0}")]
    Solver(String),
}

/// Slack of both conditions for the point chosen at one step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    /// `k`: the number of points chosen before this one
    pub step: usize,
    pub radius_slack: f64,
    /// minimum over subsets; `None` on the `r = 0` path
    pub projection_slack: Option<f64>,
    pub subsets: usize,
}

impl StepRecord {
    pub fn min_slack(&self) -> f64 {
        self.projection_slack.map_or(self.radius_slack, |p| p.min(self.radius_slack))
    }
}

#[derive(Clone, Debug)]
pub struct ExtractionTrace<P, I> {
    pub x: P,
    pub r: f64,
    pub indices: Vec<I>,
    pub points: Vec<P>,
    /// `m_S` keyed by subset bitmask (bit `i` ↔ point `i + 1`)
    pub subset_centers: HashMap<u32, CircumData<P>>,
    /// `m_k, t_k` for the prefixes `{1..k}`, `k = 1..=K`
    pub prefix: Vec<CircumData<P>>,
    /// slacks reported while selecting
    pub steps: Vec<StepRecord>,
    pub metric_path: bool,
}

fn radius_bound(k: usize) -> f64 {
    0.5f64.powi(k as i32 + 1)
}

fn step_constraints<P: Clone>(
    x: &P,
    r: f64,
    k: usize,
    centers: &HashMap<u32, CircumData<P>>,
    metric_path: bool,
) -> Vec<Constraint<P>> {
    let bound = radius_bound(k);
    let mut cs = vec![Constraint::Radius {
        center: x.clone(),
        r: if metric_path { 0.0 } else { r },
        bound,
    }];
    if !metric_path {
        let mut masks: Vec<u32> = (1..1u32 << k).collect();
        masks.sort_unstable();
        cs.extend(masks.into_iter().map(|m| Constraint::Projection {
            subset: m,
            from: x.clone(),
            toward: centers[&m].center.clone(),
            bound: bound * r,
        }));
    }
    cs
}

fn subset_points<P: Clone>(points: &[P], mask: u32) -> Vec<P> {
    points
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, p)| p.clone())
        .collect()
}

/// Circumcenters of every subset that contains the newest point.
fn add_subset_centers<S: GeodesicSpace>(
    space: &S,
    points: &[S::Point],
    centers: &mut HashMap<u32, CircumData<S::Point>>,
) -> Result<(), ExtractionError> {
    let k = points.len();
    let newest = 1u32 << (k - 1);
    let fresh: Vec<(u32, CircumData<S::Point>)> = (newest..1u32 << k)
        .into_par_iter()
        .map(|m| {
            circumcenter(space, &subset_points(points, m), tol::ITERATIVE)
                .map(|c| (m, c))
                .map_err(|e| ExtractionError::Solver(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    centers.extend(fresh);
    Ok(())
}

/// Runs the inductive selection for `steps` points.
pub fn extract_sequence<S, N>(
    space: &S,
    net: &N,
    x: &S::Point,
    r: f64,
    steps: usize,
) -> Result<ExtractionTrace<S::Point, N::Index>, ExtractionError>
where
    S: GeodesicSpace,
    N: NetOracle<S>,
{
    if steps == 0 {
        return Err(ExtractionError::ZeroSteps);
    }
    if steps > MAX_STEPS {
        return Err(ExtractionError::TooManySteps {
            requested: steps,
            cap: MAX_STEPS,
        });
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(ExtractionError::BadRadius(r));
    }
    let metric_path = r <= tol::CLOSED_FORM;
    let (anchor, bound) = net.bound();
    let in_bounds = |p: &S::Point| space.distance(&anchor, p) <= bound + tol::CLOSED_FORM;

    let first = net.initial();
    let mut points = vec![net.sample(&first)];
    if !in_bounds(&points[0]) {
        return Err(ExtractionError::OutOfBounds { step: 0 });
    }
    let mut indices = vec![first];
    let mut centers = HashMap::new();
    let mut records = Vec::new();
    if !metric_path {
        add_subset_centers(space, &points, &mut centers)?;
    }

    for k in 1..steps {
        let constraints = step_constraints(x, r, k, &centers, metric_path);
        let lower = indices.last().expect("nonempty");
        let next = net
            .advance(space, lower, &constraints)
            .map_err(|failure| ExtractionError::AdvanceFailed { step: k, failure })?;
        if !net.dominates(&next, lower) {
            return Err(ExtractionError::NotDirected { step: k });
        }
        let p = net.sample(&next);
        if !in_bounds(&p) {
            return Err(ExtractionError::OutOfBounds { step: k });
        }
        records.push(slacks_for(space, &constraints, &p, k, metric_path));
        points.push(p);
        indices.push(next);
        if !metric_path {
            add_subset_centers(space, &points, &mut centers)?;
        }
    }

    let prefix = if metric_path {
        prefix_circumcenters(space, &points, tol::ITERATIVE).map_err(|e| ExtractionError::Solver(e.to_string()))?
    } else {
        (1..=points.len()).map(|k| centers[&((1u32 << k) - 1)].clone()).collect()
    };
    Ok(ExtractionTrace {
        x: x.clone(),
        r,
        indices,
        points,
        subset_centers: centers,
        prefix,
        steps: records,
        metric_path,
    })
}

fn slacks_for<S: GeodesicSpace>(
    space: &S,
    constraints: &[Constraint<S::Point>],
    p: &S::Point,
    k: usize,
    metric_path: bool,
) -> StepRecord {
    let radius_slack = constraints[0].slack(space, p);
    let projection_slack = (!metric_path).then(|| {
        constraints[1..]
            .iter()
            .map(|c| c.slack(space, p))
            .fold(f64::INFINITY, f64::min)
    });
    StepRecord {
        step: k,
        radius_slack,
        projection_slack,
        subsets: constraints.len() - 1,
    }
}

impl<P: Clone, I> ExtractionTrace<P, I> {
    /// Recomputes both conditions for every chosen point from the stored
    /// points and subset circumcenters, without consulting the oracle.
    pub fn verify<S: GeodesicSpace<Point = P>>(&self, space: &S) -> Vec<StepRecord> {
        (1..self.points.len())
            .map(|k| {
                let cs = step_constraints(&self.x, self.r, k, &self.subset_centers, self.metric_path);
                slacks_for(space, &cs, &self.points[k], k, self.metric_path)
            })
            .collect()
    }

    /// The extracted points as a finite sequence anchored at `x`.
    pub fn as_sequence(&self, bound: f64) -> PointSequence<P>
    where
        P: Send + Sync + 'static,
    {
        PointSequence::from_terms(self.x.clone(), bound, self.points.clone())
    }
}

/// Circumcenters of the prefixes `{p₁..p_k}` for `k = 1..=n`.
pub fn prefix_circumcenters<S: GeodesicSpace>(
    space: &S,
    points: &[S::Point],
    tol: f64,
) -> Result<Vec<CircumData<S::Point>>, crate::convex::SolverError<S::Point>> {
    (1..=points.len())
        .into_par_iter()
        .map(|k| circumcenter(space, &points[..k], tol))
        .collect()
}

/// `t²_{k+1} − t²_k − d²(m_k, m_{k+1})` for consecutive prefixes.
pub fn circumradius_gaps<S: GeodesicSpace>(space: &S, prefix: &[CircumData<S::Point>]) -> Vec<f64> {
    prefix
        .windows(2)
        .map(|w| {
            let d = space.distance(&w[0].center, &w[1].center);
            w[1].objective - w[0].objective - d * d
        })
        .collect()
}

/// Circumradius-growth gaps along the trace's prefixes; empty for `K < 2`.
pub fn circumradius_audit<S: GeodesicSpace, I>(space: &S, trace: &ExtractionTrace<S::Point, I>) -> Vec<f64> {
    circumradius_gaps(space, &trace.prefix)
}
