use std::f64::consts::FRAC_1_SQRT_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CheckRecord, ScenarioConfig};
use crate::cone::{self, ConePoint, ConeSpace};
use crate::convex::{hull_distance, hull_expand};
use crate::extraction::{
    circumradius_audit, circumradius_gaps, extract_sequence, prefix_circumcenters, ExtractionTrace, FiniteSubsetNet,
};
use crate::geom::GeodesicSpace;
use crate::space::SpaceKind;
use crate::tree::TreePoint;
use crate::weak::{
    default_cone_probes, default_windows, delta_limit_test, sequential_closure_check, weak_limit_report,
    PointSequence, ProbeFamily, SetDescription, SetPart,
};

/// A catalog entry.
pub struct ScenarioInfo {
    pub id: &'static str,
    pub aliases: &'static [&'static str],
    pub description: &'static str,
    /// the claim being reproduced, quoted
    pub anchor: &'static str,
    pub space: SpaceKind,
    pub run: fn(&ScenarioConfig) -> Vec<CheckRecord>,
}

impl std::fmt::Debug for ScenarioInfo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScenarioInfo").field("id", &self.id).finish_non_exhaustive()
    }
}

pub(super) static CATALOG: &[ScenarioInfo] = &[
    ScenarioInfo {
        id: "endpoints-distinct-copies",
        aliases: &[],
        description: "unit endpoints e_{n,1} in pairwise different copies tend weakly to the apex",
        anchor: "converges weakly to o",
        space: SpaceKind::ConeComplexX,
        run: endpoints_distinct_copies,
    },
    ScenarioInfo {
        id: "endpoints-same-copy",
        aliases: &[],
        description: "unit endpoints e_{1,n} of a single copy tend weakly to (1/√2)·b_1",
        anchor: "weakly converges to $\\frac 1 {\\sqrt 2} \\cdot b$",
        space: SpaceKind::ConeComplexX,
        run: endpoints_same_copy,
    },
    ScenarioInfo {
        id: "branch-points-to-sqrt2-p",
        aliases: &[],
        description: "unit branch points b_n tend weakly to (1/√2)·p",
        anchor: "weakly converges in $X$ to the point $\\frac 1 {\\sqrt 2} \\cdot p$",
        space: SpaceKind::ConeComplexX,
        run: branch_points_to_sqrt2_p,
    },
    ScenarioInfo {
        id: "scaled-branch-points-to-half-p",
        aliases: &["branch-points-to-half-p"],
        description: "branch points at radius 1/√2 tend weakly to (1/2)·p",
        anchor: "converges weakly to $\\frac 1 2 \\cdot p$",
        space: SpaceKind::ConeComplexX,
        run: scaled_branch_points_to_half_p,
    },
    ScenarioInfo {
        id: "lemma-differ-closure-audit",
        aliases: &[],
        description: "A = E ∪ (1/√2)·B ∪ {(1/2)·p} ∪ {o} contains the weak limits of the three witness families; an alternating sequence has no limit",
        anchor: "the set A is $\\mathcal T_{\\Delta}$-closed",
        space: SpaceKind::ConeComplexX,
        run: closure_audit,
    },
    ScenarioInfo {
        id: "hull-chain-quarter-p",
        aliases: &[],
        description: "three midpoint generations over four endpoints reach o, (1/√2)·b_i, (1/2)·p and (1/4)·p",
        anchor: "$\\frac 1 4 \\cdot p \\in C_i$",
        space: SpaceKind::ConeComplexX,
        run: hull_chain_quarter_p,
    },
    ScenarioInfo {
        id: "eberlein-extraction-k8",
        aliases: &[],
        description: "eight-step extraction from the finite-subsets net with x = o, r = 1",
        anchor: "$|r_{\\alpha} -1| \\leq 2^{-k-1}$",
        space: SpaceKind::ConeComplexX,
        run: extraction_k8,
    },
    ScenarioInfo {
        id: "circumradius-monotonicity",
        aliases: &[],
        description: "prefix circumradius growth gaps on the extraction trace and on random nested chains",
        anchor: "$t_{k+1}^2 \\geq t_k^2 + d^2(m_k,m_{k+1})$",
        space: SpaceKind::ConeComplexX,
        run: circumradius_monotonicity,
    },
    ScenarioInfo {
        id: "empty-check",
        aliases: &[],
        description: "closure audit over zero sequences",
        anchor: "",
        space: SpaceKind::ConeComplexX,
        run: empty_check,
    },
];

const SEQ_BOUND: f64 = 2.0;
const EXTRACTION_STEPS: usize = 8;
const RANDOM_CHAINS: usize = 20;
const CHAIN_LEN: usize = 8;

fn at(r: f64, y: TreePoint) -> ConePoint {
    ConePoint::new(r, y)
}

fn named_points() -> Vec<ConePoint> {
    vec![
        ConePoint::apex(),
        at(FRAC_1_SQRT_2, TreePoint::b(1)),
        at(0.5, TreePoint::p()),
        at(FRAC_1_SQRT_2, TreePoint::p()),
        at(1.0, TreePoint::b(1)),
        at(1.0, TreePoint::e(1, 1)),
    ]
}

/// Named points plus seeded random points whose indices stay below the tail,
/// so no probe shares a copy or leaf with a tail term.
fn probes(cfg: &ScenarioConfig) -> ProbeFamily<ConePoint> {
    default_cone_probes(
        &named_points(),
        cfg.probes,
        cfg.scenario_seed(&cfg.scenario),
        cfg.tail_start as u64,
    )
}

fn distinct_copies() -> PointSequence<ConePoint> {
    PointSequence::new(ConePoint::apex(), SEQ_BOUND, |n| at(1.0, TreePoint::e(n as u64, 1)))
}

fn same_copy() -> PointSequence<ConePoint> {
    PointSequence::new(ConePoint::apex(), SEQ_BOUND, |n| at(1.0, TreePoint::e(1, n as u64)))
}

fn branch_points(radius: f64) -> PointSequence<ConePoint> {
    PointSequence::new(ConePoint::apex(), SEQ_BOUND, move |n| at(radius, TreePoint::b(n as u64)))
}

/// Δ-test at the expected limit, rejection of a competing candidate, and
/// detection of a unique certified limit.
fn weak_limit_checks(
    cfg: &ScenarioConfig,
    seq: &PointSequence<ConePoint>,
    expected: ConePoint,
    competitor: ConePoint,
) -> Vec<CheckRecord> {
    let space = ConeSpace::complex_x();
    let probes = probes(cfg);
    let eps = cfg.tol;
    let mut out = Vec::new();

    match delta_limit_test(&space, seq, &expected, &probes, eps, cfg.tail_start, cfg.tail_len) {
        Ok(v) => out.push(CheckRecord::within(
            "delta-test at expected limit",
            format!("max projection distance to {expected}"),
            v.worst(),
            eps,
        )),
        Err(e) => out.push(CheckRecord::error("delta-test at expected limit", expected.to_string(), e)),
    }

    match delta_limit_test(&space, seq, &competitor, &probes, eps, cfg.tail_start, cfg.tail_len) {
        Ok(v) => out.push(CheckRecord::flag(
            "competing candidate rejected",
            format!("FAIL at {competitor}"),
            format!("{} (worst {:e})", if v.pass { "PASS" } else { "FAIL" }, v.worst()),
            !v.pass,
        )),
        Err(e) => out.push(CheckRecord::error("competing candidate rejected", competitor.to_string(), e)),
    }

    out.extend(detection_checks(cfg, seq, &probes, Some(expected)));
    out
}

/// Runs detection; with `expected = None` the sequence must not certify.
fn detection_checks(
    cfg: &ScenarioConfig,
    seq: &PointSequence<ConePoint>,
    probes: &ProbeFamily<ConePoint>,
    expected: Option<ConePoint>,
) -> Vec<CheckRecord> {
    let space = ConeSpace::complex_x();
    let eps = cfg.tol;
    let windows = default_windows(cfg.tail_start, cfg.tail_len);
    let report = match weak_limit_report(&space, seq, probes, eps, &windows) {
        Ok(r) => r,
        Err(e) => return vec![CheckRecord::error("detected limit", "weak limit report", e)],
    };
    let mut out = Vec::new();
    match (expected, report.limit) {
        (Some(x), Some(found)) => {
            let d = space.distance(&x, &found);
            let mut rec = CheckRecord::within("detected limit", x.to_string(), d, eps);
            rec.observed = format!("{found} at distance {d:e}");
            out.push(rec);
        }
        (Some(x), None) => out.push(CheckRecord::flag(
            "detected limit",
            x.to_string(),
            format!("no certificate (center spread {:e})", report.center_spread),
            false,
        )),
        (None, found) => out.push(CheckRecord::flag(
            "no certificate",
            "none",
            found.map_or_else(|| "none".to_string(), |p| p.to_string()),
            found.is_none(),
        )),
    }
    let certified: Vec<&ConePoint> = report.candidates.iter().filter(|c| c.certified).map(|c| &c.center).collect();
    let mut spread: f64 = 0.0;
    for (i, a) in certified.iter().enumerate() {
        for b in &certified[i + 1..] {
            spread = spread.max(space.distance(a, b));
        }
    }
    out.push(CheckRecord::within(
        "certificates agree",
        "certified candidates within 2·eps",
        spread,
        2.0 * eps,
    ));
    out
}

fn endpoints_distinct_copies(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    let seq = distinct_copies();
    let mut out = weak_limit_checks(cfg, &seq, ConePoint::apex(), at(FRAC_1_SQRT_2, TreePoint::b(1)));
    // every probe direction is at tree distance ≥ π/2 from the tail, so each
    // projection is the apex itself
    let space = ConeSpace::complex_x();
    match delta_limit_test(&space, &seq, &ConePoint::apex(), &probes(cfg), cfg.tol, cfg.tail_start, cfg.tail_len) {
        Ok(v) => out.push(CheckRecord::within(
            "projections are exactly the apex",
            "0",
            v.worst(),
            0.0,
        )),
        Err(e) => out.push(CheckRecord::error("projections are exactly the apex", "0", e)),
    }
    out
}

fn endpoints_same_copy(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    weak_limit_checks(cfg, &same_copy(), at(FRAC_1_SQRT_2, TreePoint::b(1)), ConePoint::apex())
}

fn branch_points_to_sqrt2_p(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    weak_limit_checks(cfg, &branch_points(1.0), at(FRAC_1_SQRT_2, TreePoint::p()), ConePoint::apex())
}

fn scaled_branch_points_to_half_p(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    weak_limit_checks(cfg, &branch_points(FRAC_1_SQRT_2), at(0.5, TreePoint::p()), ConePoint::apex())
}

fn closure_set() -> SetDescription<ConePoint> {
    SetDescription::new(vec![
        SetPart::endpoints(1.0),
        SetPart::branch_points(FRAC_1_SQRT_2),
        SetPart::Singleton(at(0.5, TreePoint::p())),
        SetPart::Singleton(ConePoint::apex()),
    ])
}

fn closure_audit(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    let space = ConeSpace::complex_x();
    let probes = probes(cfg);
    let windows = default_windows(cfg.tail_start, cfg.tail_len);
    let families = [
        ("distinct-copy endpoints", distinct_copies()),
        ("same-copy endpoints", same_copy()),
        ("scaled branch points", branch_points(FRAC_1_SQRT_2)),
    ];
    let seqs: Vec<_> = families.iter().map(|(_, s)| s.clone()).collect();
    let mut out = Vec::new();
    match sequential_closure_check(&space, &closure_set(), &seqs, &probes, cfg.tol, &windows) {
        Ok(verdict) => {
            for ((name, _), audit) in families.iter().zip(&verdict.sequences) {
                let rec = match (&audit.limit, audit.limit_distance) {
                    (Some(x), Some(d)) => {
                        let mut r = CheckRecord::within(format!("limit of {name} lies in A"), "distance to A", d, cfg.tol);
                        r.observed = format!("{x} at distance {d:e}");
                        r
                    }
                    _ => CheckRecord::flag(format!("limit of {name} lies in A"), "certified limit", "none", false),
                };
                out.push(rec);
            }
            out.push(CheckRecord::flag(
                "closure audit",
                "PASS",
                if verdict.pass { "PASS" } else { "FAIL" },
                verdict.pass,
            ));
        }
        Err(e) => out.push(CheckRecord::error("closure audit", "PASS", e)),
    }

    let mixed = PointSequence::alternate(&distinct_copies(), &branch_points(FRAC_1_SQRT_2));
    for mut rec in detection_checks(cfg, &mixed, &probes, None) {
        rec.name = format!("alternating families: {}", rec.name);
        out.push(rec);
    }
    out
}

fn hull_chain_quarter_p(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    let space = ConeSpace::complex_x();
    let seed = [
        at(1.0, TreePoint::e(1, 1)),
        at(1.0, TreePoint::e(1, 2)),
        at(1.0, TreePoint::e(2, 1)),
        at(1.0, TreePoint::e(2, 2)),
    ];
    let hull = match hull_expand(&space, &seed, 3, 1) {
        Ok(h) => h,
        Err(e) => return vec![CheckRecord::error("hull expansion", "3 generations", e)],
    };
    let targets = [
        ConePoint::apex(),
        at(FRAC_1_SQRT_2, TreePoint::b(1)),
        at(FRAC_1_SQRT_2, TreePoint::b(2)),
        at(0.5, TreePoint::p()),
        at(0.25, TreePoint::p()),
    ];
    let mut out: Vec<CheckRecord> = targets
        .iter()
        .map(|t| CheckRecord::within(format!("hull contains {t}"), "distance to hull", hull_distance(&space, &hull, t), cfg.tol))
        .collect();
    let nested = hull.generation_sizes.windows(2).all(|w| w[0] <= w[1]);
    out.push(CheckRecord::flag(
        "generations nested",
        "nondecreasing sizes",
        format!("{:?}", hull.generation_sizes),
        nested,
    ));
    let outside = hull.points.iter().filter(|p| !space.contains(p, crate::tol::MEMBERSHIP)).count();
    out.push(CheckRecord::flag(
        "hull inside X",
        "0 points outside",
        format!("{outside} points outside"),
        outside == 0,
    ));
    out
}

/// The net used by the extraction scenarios: its samples live in copies
/// above every probe index.
fn extraction_trace(
    cfg: &ScenarioConfig,
) -> Result<ExtractionTrace<ConePoint, std::collections::BTreeSet<u64>>, crate::extraction::ExtractionError> {
    let net = FiniteSubsetNet::new(cfg.tail_start as u64);
    extract_sequence(&ConeSpace::complex_x(), &net, &ConePoint::apex(), 1.0, EXTRACTION_STEPS)
}

fn extraction_k8(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    let space = ConeSpace::complex_x();
    let trace = match extraction_trace(cfg) {
        Ok(t) => t,
        Err(e) => return vec![CheckRecord::error("extraction", format!("{EXTRACTION_STEPS} points"), e)],
    };
    let mut out = vec![CheckRecord::flag(
        "extraction",
        format!("{EXTRACTION_STEPS} points"),
        format!("{} points", trace.points.len()),
        trace.points.len() == EXTRACTION_STEPS,
    )];
    for rec in trace.verify(&space) {
        out.push(CheckRecord::at_least(
            format!("step {} radius condition", rec.step),
            "slack",
            rec.radius_slack,
            0.0,
        ));
        out.push(CheckRecord::at_least(
            format!("step {} projection condition ({} subsets)", rec.step, rec.subsets),
            "slack",
            rec.projection_slack.unwrap_or(f64::INFINITY),
            0.0,
        ));
    }
    let directed = trace.indices.windows(2).all(|w| w[1].is_superset(&w[0]) && w[1] != w[0]);
    out.push(CheckRecord::flag(
        "indices increase",
        "strictly nested subsets",
        format!("{} indices", trace.indices.len()),
        directed,
    ));
    let singletons = trace.points.iter().enumerate().all(|(i, p)| {
        trace
            .subset_centers
            .get(&(1u32 << i))
            .is_some_and(|c| &c.center == p && c.radius == 0.0)
    });
    out.push(CheckRecord::flag(
        "singleton circumcenters",
        "the points themselves",
        if singletons { "match" } else { "mismatch" },
        singletons,
    ));
    let seq = trace.as_sequence(SEQ_BOUND);
    match delta_limit_test(&space, &seq, &ConePoint::apex(), &probes(cfg), cfg.tol, 0, trace.points.len()) {
        Ok(v) => out.push(CheckRecord::within(
            "output delta-converges to o",
            "max projection distance to the apex",
            v.worst(),
            cfg.tol,
        )),
        Err(e) => out.push(CheckRecord::error("output delta-converges to o", "PASS", e)),
    }
    out
}

fn gap_records(label: &str, gaps: &[f64], radii: &[f64], tol: f64) -> Vec<CheckRecord> {
    let worst = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let shrink = radii.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max).max(0.0);
    vec![
        CheckRecord::at_least(format!("{label}: smallest growth gap"), "t²_{k+1} − t²_k − d²(m_k, m_{k+1})", worst, -tol),
        CheckRecord::within(format!("{label}: radii nondecreasing"), "largest decrease of t_k", shrink, tol),
    ]
}

fn circumradius_monotonicity(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    let space = ConeSpace::complex_x();
    let mut out = Vec::new();
    match extraction_trace(cfg) {
        Ok(trace) => {
            let gaps = circumradius_audit(&space, &trace);
            let radii: Vec<f64> = trace.prefix.iter().map(|c| c.radius).collect();
            out.extend(gap_records("extraction trace", &gaps, &radii, cfg.tol));
        }
        Err(e) => out.push(CheckRecord::error("extraction trace", "trace", e)),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.scenario_seed(&cfg.scenario));
    for chain in 0..RANDOM_CHAINS {
        let points: Vec<ConePoint> = (0..CHAIN_LEN).map(|_| cone::random_point_in_x(&mut rng, 4)).collect();
        let label = format!("random chain {chain}");
        match prefix_circumcenters(&space, &points, crate::tol::ITERATIVE) {
            Ok(prefix) => {
                let gaps = circumradius_gaps(&space, &prefix);
                let radii: Vec<f64> = prefix.iter().map(|c| c.radius).collect();
                out.extend(gap_records(&label, &gaps, &radii, cfg.tol));
            }
            Err(e) => out.push(CheckRecord::error(label, "prefix circumcenters", e)),
        }
    }
    out
}

fn empty_check(cfg: &ScenarioConfig) -> Vec<CheckRecord> {
    let space = ConeSpace::complex_x();
    let windows = default_windows(cfg.tail_start, cfg.tail_len);
    match sequential_closure_check(&space, &closure_set(), &[], &probes(cfg), cfg.tol, &windows) {
        Ok(v) => vec![CheckRecord::flag(
            "closure over zero sequences",
            "PASS",
            format!("{} sequences", v.sequences.len()),
            v.pass,
        )],
        Err(e) => vec![CheckRecord::error("closure over zero sequences", "PASS", e)],
    }
}
