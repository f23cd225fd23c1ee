//! Convex hulls by iterated geodesic sampling, and circumcenters of finite
//! sets.

use std::collections::HashMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cone::ConePoint;
use crate::geom::GeodesicSpace;
use crate::tol;
use crate::tree::TreePoint;

/// Finite inner approximation of a closed convex hull.
///
/// `points[..generation_sizes[k]]` is the cloud after `k` generations, so
/// every generation contains the previous one.
#[derive(Clone, Debug)]
pub struct HullApprox<P> {
    pub points: Vec<P>,
    pub generation: usize,
    pub generation_sizes: Vec<usize>,
    pub tol: f64,
    /// false when expansion stopped at the size cap
    pub complete: bool,
}

impl<P> HullApprox<P> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The cloud as it stood after generation `k`.
    pub fn generation_cloud(&self, k: usize) -> &[P] {
        let k = k.min(self.generation_sizes.len() - 1);
        &self.points[..self.generation_sizes[k]]
    }
}

#[derive(Debug, Error)]
pub enum HullError<P: std::fmt::Debug> {
    #[error("hull cloud exceeded {cap} points during generation {}", partial.generation + 1)]
    CapExceeded { cap: usize, partial: HullApprox<P> },
    #[error("samples_per_pair must be at least 1")]
    NoSamples,
    #[error("empty seed")]
    EmptySeed,
}

#[derive(Clone, Debug)]
pub struct HullOptions {
    pub generations: usize,
    /// interior samples per pair, at parameters `k/(n+1)`
    pub samples_per_pair: usize,
    pub max_points: usize,
    pub dedup_tol: f64,
}

impl Default for HullOptions {
    fn default() -> Self {
        Self {
            generations: 1,
            // dyadic parameters k/16
            samples_per_pair: 15,
            max_points: 250_000,
            dedup_tol: tol::DEDUP,
        }
    }
}

/// Near-duplicate filter keyed on distances to two fixed anchors.
struct DedupIndex<P> {
    anchors: [P; 2],
    cell: f64,
    tol: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl<P: Clone> DedupIndex<P> {
    fn new(anchors: [P; 2], tol: f64) -> Self {
        Self {
            anchors,
            cell: (tol * 1e3).max(1e-9),
            tol,
            buckets: HashMap::new(),
        }
    }

    fn key<S: GeodesicSpace<Point = P>>(&self, space: &S, p: &P) -> (i64, i64) {
        let k = |a: &P| (space.distance(a, p) / self.cell).floor() as i64;
        (k(&self.anchors[0]), k(&self.anchors[1]))
    }

    /// Inserts `p` unless a stored point lies within tolerance.
    fn insert<S: GeodesicSpace<Point = P>>(&mut self, space: &S, cloud: &mut Vec<P>, p: P) -> bool {
        let (a, b) = self.key(space, &p);
        for da in -1..=1 {
            for db in -1..=1 {
                if let Some(ids) = self.buckets.get(&(a + da, b + db)) {
                    if ids.iter().any(|&i| space.distance(&cloud[i], &p) <= self.tol) {
                        return false;
                    }
                }
            }
        }
        self.buckets.entry((a, b)).or_default().push(cloud.len());
        cloud.push(p);
        true
    }
}

/// Iterated geodesic sampling with the default options for everything but
/// the generation and sample counts.
pub fn hull_expand<S: GeodesicSpace>(
    space: &S,
    seed: &[S::Point],
    generations: usize,
    samples_per_pair: usize,
) -> Result<HullApprox<S::Point>, HullError<S::Point>> {
    hull_expand_with(
        space,
        seed,
        &HullOptions {
            generations,
            samples_per_pair,
            ..HullOptions::default()
        },
    )
}

/// Each generation adds the sampled geodesic points between every pair of
/// cloud points that involves at least one point new in the previous
/// generation. Candidates are computed in parallel and merged in pair order.
pub fn hull_expand_with<S: GeodesicSpace>(
    space: &S,
    seed: &[S::Point],
    opts: &HullOptions,
) -> Result<HullApprox<S::Point>, HullError<S::Point>> {
    if opts.samples_per_pair == 0 {
        return Err(HullError::NoSamples);
    }
    let (first, last) = match (seed.first(), seed.last()) {
        (Some(f), Some(l)) => (f.clone(), l.clone()),
        _ => return Err(HullError::EmptySeed),
    };
    let mut index = DedupIndex::new([first, last], opts.dedup_tol);
    let mut cloud = Vec::new();
    for p in seed {
        index.insert(space, &mut cloud, p.clone());
    }
    let mut hull = HullApprox {
        generation_sizes: vec![cloud.len()],
        points: cloud,
        generation: 0,
        tol: opts.dedup_tol,
        complete: true,
    };
    let n = opts.samples_per_pair;
    let params: Vec<f64> = (1..=n).map(|k| k as f64 / (n + 1) as f64).collect();
    let mut fresh_from = 0;
    for _ in 0..opts.generations {
        let size = hull.points.len();
        let pairs: Vec<(usize, usize)> = (fresh_from.max(1)..size)
            .flat_map(|j| (0..j).map(move |i| (i, j)))
            .collect();
        let cloud = &hull.points;
        let candidates: Vec<S::Point> = pairs
            .par_iter()
            .flat_map_iter(|&(i, j)| params.iter().map(move |&t| space.geodesic(&cloud[i], &cloud[j], t)))
            .collect();
        for c in candidates {
            index.insert(space, &mut hull.points, c);
            if hull.points.len() > opts.max_points {
                hull.points.truncate(opts.max_points);
                hull.complete = false;
                return Err(HullError::CapExceeded {
                    cap: opts.max_points,
                    partial: hull,
                });
            }
        }
        fresh_from = size;
        hull.generation += 1;
        hull.generation_sizes.push(hull.points.len());
    }
    Ok(hull)
}

/// Distance from `q` to the nearest cloud point.
pub fn hull_distance<S: GeodesicSpace>(space: &S, hull: &HullApprox<S::Point>, q: &S::Point) -> f64 {
    hull.points
        .iter()
        .map(|p| space.distance(p, q))
        .fold(f64::INFINITY, f64::min)
}

/// One-sided containment certificate: `true` proves `q` is within `eps` of
/// the closed convex hull; `false` is inconclusive.
pub fn hull_contains<S: GeodesicSpace>(space: &S, hull: &HullApprox<S::Point>, q: &S::Point, eps: f64) -> bool {
    hull_distance(space, hull, q) <= eps
}

/// `(radius, locus, t)` fields for hull export.
pub trait HullRecord {
    fn csv_fields(&self) -> (String, String, f64);
}

fn locus_fields(y: &TreePoint) -> (String, f64) {
    match *y {
        TreePoint::Root => ("p".into(), 0.0),
        TreePoint::Trunk { copy, t } => (format!("trunk:{copy}"), t),
        TreePoint::Branch { copy } => (format!("b:{copy}"), 0.0),
        TreePoint::Leaf { copy, leaf, t } => (format!("leaf:{copy}:{leaf}"), t),
        TreePoint::Endpoint { copy, leaf } => (format!("e:{copy}:{leaf}"), 0.0),
    }
}

impl HullRecord for ConePoint {
    fn csv_fields(&self) -> (String, String, f64) {
        let (locus, t) = locus_fields(&self.direction());
        (self.radius().to_string(), locus, t)
    }
}

impl HullRecord for TreePoint {
    fn csv_fields(&self) -> (String, String, f64) {
        let (locus, t) = locus_fields(self);
        (String::new(), locus, t)
    }
}

/// Writes the cloud as CSV rows `radius,locus,t` with a header line.
pub fn write_hull_csv<P: HullRecord, W: Write>(hull: &HullApprox<P>, mut out: W) -> io::Result<()> {
    writeln!(out, "radius,locus,t")?;
    for p in &hull.points {
        let (r, locus, t) = p.csv_fields();
        writeln!(out, "{r},{locus},{t}")?;
    }
    Ok(())
}

/// Circumcenter of a finite set with its minimax value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircumData<P> {
    pub center: P,
    pub radius: f64,
    /// `max_i d²(center, p_i)`
    pub objective: f64,
}

#[derive(Debug, Error)]
pub enum SolverError<P: std::fmt::Debug> {
    #[error("circumcenter of an empty set")]
    Empty,
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("circumcenter not certified after {iterations} iterations (worst 2-convexity gap {worst_gap:e})")]
    NotConverged {
        iterations: usize,
        worst_gap: f64,
        best: CircumData<P>,
    },
}

#[derive(Clone, Debug)]
pub struct CircumOptions {
    pub max_iter: usize,
    /// stop once this many consecutive steps fail to improve the objective
    pub stall: usize,
}

impl Default for CircumOptions {
    fn default() -> Self {
        Self {
            max_iter: 100_000,
            stall: 256,
        }
    }
}

/// `f(y) = max_i d²(y, p_i)`.
pub fn max_sq_distance<S: GeodesicSpace>(space: &S, y: &S::Point, points: &[S::Point]) -> f64 {
    points
        .iter()
        .map(|p| {
            let d = space.distance(y, p);
            d * d
        })
        .fold(0.0, f64::max)
}

/// `f(probe) − [f(center) + d²(center, probe)]`; nonnegative at the true
/// circumcenter.
pub fn two_convexity_gap<S: GeodesicSpace>(space: &S, points: &[S::Point], center: &S::Point, probe: &S::Point) -> f64 {
    let d = space.distance(center, probe);
    max_sq_distance(space, probe, points) - (max_sq_distance(space, center, points) + d * d)
}

pub fn circumcenter<S: GeodesicSpace>(
    space: &S,
    points: &[S::Point],
    tol: f64,
) -> Result<CircumData<S::Point>, SolverError<S::Point>> {
    circumcenter_with(space, points, tol, &CircumOptions::default())
}

/// Minimizes `max_i d²(·, p_i)`.
///
/// Starts from the best of the space's hint, the midpoint of a diametral
/// pair and the first point, then runs farthest-point descent with step
/// length `c/k` (`c` the starting radius), keeping the best iterate. The
/// result is certified by the 2-convexity gap at the inputs and at short
/// geodesic probes from the center toward each input.
pub fn circumcenter_with<S: GeodesicSpace>(
    space: &S,
    points: &[S::Point],
    tol: f64,
    opts: &CircumOptions,
) -> Result<CircumData<S::Point>, SolverError<S::Point>> {
    if points.is_empty() {
        return Err(SolverError::Empty);
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(SolverError::InvalidTolerance(tol));
    }
    let f = |y: &S::Point| max_sq_distance(space, y, points);

    let mut starts = vec![points[0].clone()];
    let (mut a, mut b, mut diam) = (0, 0, 0.0);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = space.distance(&points[i], &points[j]);
            if d > diam {
                (a, b, diam) = (i, j, d);
            }
        }
    }
    starts.push(space.geodesic(&points[a], &points[b], 0.5));
    if let Some(h) = space.circumcenter_hint(points) {
        starts.push(h);
    }
    let (mut best, mut f_best) = starts
        .into_iter()
        .map(|s| {
            let v = f(&s);
            (s, v)
        })
        .fold(None, |acc: Option<(S::Point, f64)>, (s, v)| match acc {
            Some((bs, bv)) if bv <= v => Some((bs, bv)),
            _ => Some((s, v)),
        })
        .expect("at least one start");

    let c = f_best.sqrt();
    let mut iterations = 0;
    if c > 0.0 {
        let mut y = best.clone();
        let mut last_improvement = 0;
        for k in 1..=opts.max_iter {
            iterations = k;
            let (far, d) = points
                .iter()
                .map(|p| (p, space.distance(&y, p)))
                .fold((&points[0], -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if d == 0.0 {
                break;
            }
            let frac = (c / k as f64 / d).min(1.0);
            y = space.geodesic(&y, far, frac);
            let fy = f(&y);
            if fy < f_best {
                best = y.clone();
                f_best = fy;
                last_improvement = k;
            }
            if k - last_improvement >= opts.stall {
                break;
            }
        }
    }

    let data = CircumData {
        radius: f_best.sqrt(),
        objective: f_best,
        center: best,
    };
    let worst_gap = certificate_gap(space, points, &data.center);
    if worst_gap < -tol {
        return Err(SolverError::NotConverged {
            iterations,
            worst_gap,
            best: data,
        });
    }
    Ok(data)
}

/// Smallest 2-convexity gap over the inputs and short probes toward them.
pub fn certificate_gap<S: GeodesicSpace>(space: &S, points: &[S::Point], center: &S::Point) -> f64 {
    let mut worst = f64::INFINITY;
    for p in points {
        worst = worst.min(two_convexity_gap(space, points, center, p));
        for t in [1e-3, 1e-2, 1e-1] {
            let probe = space.geodesic(center, p, t);
            worst = worst.min(two_convexity_gap(space, points, center, &probe));
        }
    }
    worst
}
