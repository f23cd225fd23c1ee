//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cat0lab::cone::{self, cone_distance, ConePoint, ConeSpace};
use cat0lab::convex::{circumcenter, hull_contains, hull_distance, hull_expand, max_sq_distance};
use cat0lab::extraction::{circumradius_audit, circumradius_gaps, extract_sequence, prefix_circumcenters, FiniteSubsetNet};
use cat0lab::geom::{cat0_midpoint_defect, project_to_segment, GeodesicSegment, GeodesicSpace};
use cat0lab::harness::{self, ScenarioConfig};
use cat0lab::tree::{tree_distance, TreePoint};
use cat0lab::weak::{
    default_cone_probes, default_windows, delta_limit_test, sequential_closure_check, weak_limit_report,
    PointSequence, ProbeFamily, SetDescription, SetPart,
};
use cat0lab::tol;

const EPS: f64 = 1e-6;
const TAIL_START: usize = 8;
const TAIL_LEN: usize = 24;

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn at(r: f64, y: TreePoint) -> ConePoint {
    ConePoint::new(r, y)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn probes(seed: u64) -> ProbeFamily<ConePoint> {
    let named = [
        ConePoint::apex(),
        at(FRAC_1_SQRT_2, TreePoint::b(1)),
        at(0.5, TreePoint::p()),
        at(FRAC_1_SQRT_2, TreePoint::p()),
        at(1.0, TreePoint::b(1)),
        at(1.0, TreePoint::e(1, 1)),
    ];
    default_cone_probes(&named, 16, seed, TAIL_START as u64)
}

fn distinct_copies() -> PointSequence<ConePoint> {
    PointSequence::new(ConePoint::apex(), 2.0, |n| at(1.0, TreePoint::e(n as u64, 1)))
}

fn same_copy() -> PointSequence<ConePoint> {
    PointSequence::new(ConePoint::apex(), 2.0, |n| at(1.0, TreePoint::e(1, n as u64)))
}

fn scaled_branch_points() -> PointSequence<ConePoint> {
    PointSequence::new(ConePoint::apex(), 2.0, |n| at(FRAC_1_SQRT_2, TreePoint::b(n as u64)))
}

fn exact_distances() -> Outcome {
    let idx: Vec<u64> = (0..40).chain([1 << 20, u64::MAX - 1, u64::MAX]).collect();
    let mut worst: f64 = 0.0;
    let mut check = |got: f64, want: f64| worst = worst.max((got - want).abs());
    for &i in &idx {
        check(tree_distance(&TreePoint::p(), &TreePoint::b(i)), FRAC_PI_4);
        for &j in &idx {
            if i != j {
                check(tree_distance(&TreePoint::b(i), &TreePoint::b(j)), FRAC_PI_2);
                // endpoints in different copies
                check(tree_distance(&TreePoint::e(i, 3), &TreePoint::e(j, 3)), PI);
                // endpoints of one copy: i, j used as leaf indices
                check(tree_distance(&TreePoint::e(5, i), &TreePoint::e(5, j)), FRAC_PI_2);
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max error {worst:e}"))?;
    Ok(format!("max error {worst:e} over {} index pairs", idx.len() * idx.len()))
}

fn midpoints() -> Outcome {
    let space = ConeSpace::complex_x();
    for (i, j) in [(1, 2), (0, 7), (3, u64::MAX)] {
        let m = space.geodesic(&at(1.0, TreePoint::e(i, 1)), &at(1.0, TreePoint::e(j, 4)), 0.5);
        ensure(m.is_apex(), || format!("angle-π midpoint is {m}, not the apex"))?;
    }
    let mut worst: f64 = 0.0;
    for i in [1, 2, 9, 1 << 40] {
        let m = space.geodesic(&at(1.0, TreePoint::e(i, 1)), &at(1.0, TreePoint::e(i, 2)), 0.5);
        let expected = at(common::planar_midpoint_norm(FRAC_PI_2), TreePoint::b(i));
        worst = worst.max(cone_distance(&m, &expected));
    }
    ensure(worst <= 1e-9, || format!("angle-π/2 midpoint off by {worst:e}"))?;
    Ok(format!("apex exact; (1/√2)·b error {worst:e}"))
}

fn weak_limits() -> Outcome {
    let space = ConeSpace::complex_x();
    let probes = probes(3);
    let cases = [
        ("1·e_n distinct copies", distinct_copies(), ConePoint::apex()),
        ("1·e_{1,n} same copy", same_copy(), at(FRAC_1_SQRT_2, TreePoint::b(1))),
        ("(1/√2)·b_n", scaled_branch_points(), at(0.5, TreePoint::p())),
    ];
    let mut notes = Vec::new();
    for (name, seq, limit) in cases {
        let started = Instant::now();
        let v = delta_limit_test(&space, &seq, &limit, &probes, EPS, TAIL_START, TAIL_LEN).map_err(|e| e.to_string())?;
        let took = started.elapsed();
        ensure(v.pass, || format!("{name}: worst projection distance {:e}", v.worst()))?;
        ensure(took < Duration::from_secs(5), || format!("{name}: took {took:.2?}"))?;
        notes.push(format!("{name} worst {:e}", v.worst()));
    }
    Ok(notes.join("; "))
}

fn hull_chain() -> Outcome {
    let space = ConeSpace::complex_x();
    let seed = [
        at(1.0, TreePoint::e(1, 1)),
        at(1.0, TreePoint::e(1, 2)),
        at(1.0, TreePoint::e(2, 1)),
        at(1.0, TreePoint::e(2, 2)),
    ];
    let hull = hull_expand(&space, &seed, 3, 1).map_err(|e| e.to_string())?;
    let targets = [
        ConePoint::apex(),
        at(FRAC_1_SQRT_2, TreePoint::b(1)),
        at(FRAC_1_SQRT_2, TreePoint::b(2)),
        at(0.5, TreePoint::p()),
        at(0.25, TreePoint::p()),
    ];
    let mut worst: f64 = 0.0;
    for t in &targets {
        let d = hull_distance(&space, &hull, t);
        ensure(d <= EPS, || format!("{t} at distance {d:e} from the hull"))?;
        worst = worst.max(d);
    }
    Ok(format!("{} hull points, worst target distance {worst:e}", hull.len()))
}

fn closure_set() -> SetDescription<ConePoint> {
    SetDescription::new(vec![
        SetPart::endpoints(1.0),
        SetPart::branch_points(FRAC_1_SQRT_2),
        SetPart::Singleton(at(0.5, TreePoint::p())),
        SetPart::Singleton(ConePoint::apex()),
    ])
}

fn closure_audit() -> Outcome {
    let space = ConeSpace::complex_x();
    let seqs = [distinct_copies(), same_copy(), scaled_branch_points()];
    let v = sequential_closure_check(
        &space,
        &closure_set(),
        &seqs,
        &probes(5),
        EPS,
        &default_windows(TAIL_START, TAIL_LEN),
    )
    .map_err(|e| e.to_string())?;
    ensure(v.pass, || format!("audit failed: {:?}", v.sequences))?;
    ensure(v.sequences.iter().all(|s| s.limit.is_some()), || "a witness family has no certified limit".into())?;
    Ok(format!("{} witness families, all limits in A", v.sequences.len()))
}

fn extraction() -> Outcome {
    let space = ConeSpace::complex_x();
    let net = FiniteSubsetNet::new(TAIL_START as u64);
    let trace = extract_sequence(&space, &net, &ConePoint::apex(), 1.0, 8).map_err(|e| e.to_string())?;
    let records = trace.verify(&space);
    ensure(records.len() == 7, || format!("{} verified steps", records.len()))?;
    let min_slack = records.iter().map(|r| r.min_slack()).fold(f64::INFINITY, f64::min);
    ensure(min_slack >= 0.0, || format!("post-hoc slack {min_slack:e}"))?;
    // radius condition again, from raw distances
    for (k, p) in trace.points.iter().enumerate().skip(1) {
        let bound = 0.5f64.powi(k as i32 + 1);
        ensure((cone_distance(p, &ConePoint::apex()) - 1.0).abs() <= bound, || format!("radius at step {k}"))?;
    }
    let seq = trace.as_sequence(2.0);
    let v = delta_limit_test(&space, &seq, &ConePoint::apex(), &probes(9), EPS, 0, trace.points.len())
        .map_err(|e| e.to_string())?;
    ensure(v.pass, || format!("output worst projection distance {:e}", v.worst()))?;
    Ok(format!("min post-hoc slack {min_slack:e}; output Δ-worst {:e}", v.worst()))
}

fn circumradius() -> Outcome {
    let space = ConeSpace::complex_x();
    let net = FiniteSubsetNet::new(TAIL_START as u64);
    let trace = extract_sequence(&space, &net, &ConePoint::apex(), 1.0, 8).map_err(|e| e.to_string())?;
    let mut worst = circumradius_audit(&space, &trace).into_iter().fold(f64::INFINITY, f64::min);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let pts: Vec<ConePoint> = (0..8).map(|_| cone::random_point_in_x(&mut rng, 4)).collect();
        let prefix = prefix_circumcenters(&space, &pts, tol::ITERATIVE).map_err(|e| e.to_string())?;
        worst = worst.min(circumradius_gaps(&space, &prefix).into_iter().fold(f64::INFINITY, f64::min));
    }
    ensure(worst >= -1e-6, || format!("smallest gap {worst:e}"))?;
    Ok(format!("smallest gap {worst:e} over the trace and 20 chains"))
}

fn property_suites() -> Outcome {
    let space = ConeSpace::complex_x();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let point = |rng: &mut ChaCha8Rng| cone::random_point_in_x(rng, 4);
    let mut notes = Vec::new();

    // metric axioms, constant speed, CAT(0) defect
    let (mut tri_slack, mut speed_err, mut defect): (f64, f64, f64) = (f64::INFINITY, 0.0, f64::NEG_INFINITY);
    for _ in 0..1000 {
        let (x, y, z) = (point(&mut rng), point(&mut rng), point(&mut rng));
        let d = |a: &ConePoint, b: &ConePoint| space.distance(a, b);
        ensure(d(&x, &x) == 0.0, || format!("d(x, x) ≠ 0 at {x}"))?;
        ensure(d(&x, &y) == d(&y, &x), || format!("asymmetric at {x}, {y}"))?;
        tri_slack = tri_slack.min(d(&x, &y) + d(&y, &z) - d(&x, &z));
        let t = rng.random_range(0.0..=1.0);
        let g = space.geodesic(&x, &y, t);
        speed_err = speed_err.max((d(&x, &g) - t * d(&x, &y)).abs()).max((d(&g, &y) - (1.0 - t) * d(&x, &y)).abs());
        defect = defect.max(cat0_midpoint_defect(&space, &x, &y, &z));
    }
    ensure(tri_slack >= -1e-12, || format!("triangle inequality slack {tri_slack:e}"))?;
    ensure(speed_err <= 1e-7, || format!("constant-speed error {speed_err:e}"))?;
    ensure(defect <= 1e-7, || format!("CAT(0) defect {defect:e}"))?;
    notes.push(format!("defect {defect:e}"));

    // projection nonexpansiveness
    let mut excess: f64 = f64::NEG_INFINITY;
    for _ in 0..300 {
        let seg = GeodesicSegment::new(point(&mut rng), point(&mut rng));
        let (x, y) = (point(&mut rng), point(&mut rng));
        let px = project_to_segment(&space, &seg, &x, tol::PROJECTION_PARAM).map_err(|e| e.to_string())?;
        let py = project_to_segment(&space, &seg, &y, tol::PROJECTION_PARAM).map_err(|e| e.to_string())?;
        excess = excess.max(cone_distance(&px, &py) - cone_distance(&x, &y));
    }
    ensure(excess <= 10.0 * tol::PROJECTION_PARAM, || format!("projection expands by {excess:e}"))?;

    // hull monotonicity and containment in X
    for _ in 0..10 {
        let seed: Vec<ConePoint> = (0..3).map(|_| point(&mut rng)).collect();
        let hull = hull_expand(&space, &seed, 2, 3).map_err(|e| e.to_string())?;
        for k in 1..hull.generation_sizes.len() {
            let prev = hull.generation_cloud(k - 1);
            ensure(prev.iter().all(|p| hull_contains(&space, &hull, p, 0.0)), || "generation lost a point".into())?;
            ensure(hull.generation_cloud(k).len() >= prev.len(), || "generation shrank".into())?;
        }
        ensure(hull.points.iter().all(|p| space.contains(p, tol::MEMBERSHIP)), || "hull left X".into())?;
    }

    // 2-convexity certificate on 100 probes per instance
    let mut worst_gap: f64 = f64::INFINITY;
    for _ in 0..20 {
        let pts: Vec<ConePoint> = (0..5).map(|_| point(&mut rng)).collect();
        let c = circumcenter(&space, &pts, tol::ITERATIVE).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let y = point(&mut rng);
            let dy = cone_distance(&c.center, &y);
            worst_gap = worst_gap.min(max_sq_distance(&space, &y, &pts) - c.objective - dy * dy);
        }
    }
    ensure(worst_gap >= -tol::ITERATIVE, || format!("2-convexity gap {worst_gap:e}"))?;
    notes.push(format!("2-convexity gap {worst_gap:e}"));

    // ε-graph oracle
    let queries: Vec<ConePoint> = (0..25)
        .map(|_| {
            let dir = common::subcomplex_direction(rng.random(), rng.random());
            at(rng.random_range(0.0..=1.0) * cone::boundary_radius(&dir), dir)
        })
        .collect();
    let oracle = common::SkeletonOracle::new(0.01, &queries);
    let mut disagreement: f64 = 0.0;
    for (i, a) in queries.iter().enumerate() {
        for (j, g) in oracle.distances_from(i).into_iter().enumerate() {
            disagreement = disagreement.max((g - cone_distance(a, &queries[j])).abs());
        }
    }
    ensure(disagreement <= 0.05, || format!("graph oracle disagreement {disagreement:e}"))?;
    notes.push(format!("graph disagreement {disagreement:.2e}"));
    Ok(notes.join("; "))
}

fn negative_control() -> Outcome {
    let space = ConeSpace::complex_x();
    let mixed = PointSequence::alternate(&distinct_copies(), &scaled_branch_points());
    let windows = default_windows(TAIL_START, TAIL_LEN);
    let report = weak_limit_report(&space, &mixed, &probes(13), EPS, &windows).map_err(|e| e.to_string())?;
    ensure(report.limit.is_none(), || format!("alternating sequence certified {:?}", report.limit))?;

    let mut checked = 0;
    for info in harness::list_scenarios() {
        let r = harness::run_scenario(&ScenarioConfig::new(info.id)).map_err(|e| e.to_string())?;
        for c in r.checks.iter().filter(|c| c.name.ends_with("certificates agree")) {
            ensure(c.pass, || format!("{}: certificates {} apart", info.id, c.observed))?;
            checked += 1;
        }
    }
    Ok(format!("no certificate for the alternating sequence; {checked} uniqueness checks"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("exact distances in Y", 1, exact_distances),
        ("midpoints of unit endpoints", 1, midpoints),
        ("weak limits of the witness families", 15, weak_limits),
        ("hull chain reaches (1/4)·p", 10, hull_chain),
        ("closure audit of A", 10, closure_audit),
        ("extraction from the finite-subsets net", 60, extraction),
        ("circumradius growth gaps", 30, circumradius),
        ("property suites", 300, property_suites),
        ("negative control", 10, negative_control),
    ];
    let mut failed = 0;
    for (n, (title, limit, run)) in criteria.into_iter().enumerate() {
        let started = Instant::now();
        let outcome = run();
        let took = started.elapsed();
        let outcome = match outcome {
            Ok(_) if took > Duration::from_secs(limit) => Err(format!("took {took:.2?}, limit {limit}s")),
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("[{tag}] criterion {}: {title} ({took:.2?}): {detail}", n + 1);
        if outcome.is_err() {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
