use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use cat0lab::finite_tree::{FinitePoint, FiniteTree};
use cat0lab::harness::{self, HarnessError, ScenarioConfig, Verdict};
use cat0lab::space::{Point, SpaceHandle};
use cat0lab::{tol, weak, GeodesicSegment};

#[derive(Parser)]
#[command(name = "cat0lab", version, about = "Weak-convergence experiments on a CAT(0) cone over a metric tree")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a built-in scenario (or `all`) and write its reports
    Run(RunArgs),
    /// List the built-in scenarios
    List,
    /// Distance between two points
    Distance {
        a: String,
        b: String,
        #[command(flatten)]
        space: SpaceArgs,
    },
    /// Closest point to X on the geodesic [A, B]
    Project {
        a: String,
        b: String,
        x: String,
        #[command(flatten)]
        space: SpaceArgs,
    },
    /// Circumcenter and circumradius of a finite set
    Circumcenter {
        #[arg(required = true)]
        points: Vec<String>,
        #[arg(long, default_value_t = tol::ITERATIVE)]
        tol: f64,
        #[command(flatten)]
        space: SpaceArgs,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario id, alias, or `all`
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = weak::DEFAULT_EPS)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random probes added to the named probe points
    #[arg(long, default_value_t = weak::DEFAULT_RANDOM_PROBES)]
    probes: usize,
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = weak::DEFAULT_TAIL_START)]
    tail_start: usize,
    #[arg(long, default_value_t = weak::DEFAULT_TAIL_LEN)]
    tail_len: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceChoice {
    /// The full cone over Y
    Full,
    /// The complex X
    X,
    /// The tree Y
    Tree,
}

#[derive(clap::Args)]
struct SpaceArgs {
    /// Defaults to `x` for cone descriptors and `tree` for bare loci
    #[arg(long, value_enum)]
    space: Option<SpaceChoice>,
    /// Work in the finite tree read from this edge list; points are vertex
    /// names or `edge:<index>:<offset>`
    #[arg(long, conflicts_with = "space")]
    tree: Option<PathBuf>,
}

struct Failure {
    message: String,
    code: u8,
}

impl Failure {
    fn config(message: impl ToString) -> Self {
        Self {
            message: message.to_string(),
            code: 2,
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Self {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::List => {
            list();
            Ok(0)
        }
        Command::Distance { a, b, space } => distance(&space, &a, &b),
        Command::Project { a, b, x, space } => project(&space, &a, &b, &x),
        Command::Circumcenter { points, tol, space } => circumcenter(&space, &points, tol),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(args: RunArgs) -> Result<u8, Failure> {
    let ids: Vec<String> = if args.scenario == "all" {
        harness::list_scenarios().iter().map(|s| s.id.to_string()).collect()
    } else {
        vec![args.scenario.clone()]
    };
    let configs: Vec<ScenarioConfig> = ids
        .into_iter()
        .map(|id| ScenarioConfig {
            scenario: id,
            tol: args.tol,
            seed: args.seed,
            probes: args.probes,
            tail_start: args.tail_start,
            tail_len: args.tail_len,
            out: Some(args.out.clone()),
        })
        .collect();
    let reports = harness::run_many(&configs, args.jobs)?;
    let mut code = 0;
    for r in &reports {
        let s = &r.summary;
        println!(
            "{} {}: {}/{} checks passed ({:.2?})",
            s.verdict, s.scenario, s.passed, s.checks, r.runtime
        );
        for c in r.checks.iter().filter(|c| !c.pass) {
            println!("    failed: {} (expected {}, observed {})", c.name, c.expected, c.observed);
        }
        if s.verdict == Verdict::Fail {
            code = 1;
        }
    }
    Ok(code)
}

fn list() {
    for s in harness::list_scenarios() {
        println!("{}", s.id);
        for a in s.aliases {
            println!("  alias: {a}");
        }
        println!("  {}", s.description);
        if !s.anchor.is_empty() {
            println!("  anchor: \"{}\"", s.anchor);
        }
    }
}

fn resolve(args: &SpaceArgs, raw: &[&str]) -> Result<(SpaceHandle, Vec<Point>), Failure> {
    if let Some(path) = &args.tree {
        let tree = FiniteTree::load(path).map_err(Failure::config)?;
        let points = raw
            .iter()
            .map(|s| finite_point(&tree, s))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok((SpaceHandle::FiniteTree(Arc::new(tree)), points));
    }
    let points = raw
        .iter()
        .map(|s| s.parse::<Point>().map_err(Failure::config))
        .collect::<Result<Vec<_>, _>>()?;
    let handle = match args.space {
        Some(SpaceChoice::Full) => SpaceHandle::ConeFull,
        Some(SpaceChoice::X) => SpaceHandle::ConeComplexX,
        Some(SpaceChoice::Tree) => SpaceHandle::TreeY,
        None => match points.first() {
            Some(Point::Tree(_)) => SpaceHandle::TreeY,
            _ => SpaceHandle::ConeComplexX,
        },
    };
    for p in &points {
        if !handle.contains(p, tol::MEMBERSHIP).map_err(Failure::config)? {
            return Err(Failure::config(format!("{p} is not a point of {}", handle.kind())));
        }
    }
    Ok((handle, points))
}

fn finite_point(tree: &FiniteTree, s: &str) -> Result<Point, Failure> {
    if let Some(rest) = s.strip_prefix("edge:") {
        let (edge, offset) = rest
            .split_once(':')
            .ok_or_else(|| Failure::config(format!("expected edge:<index>:<offset>, got `{s}`")))?;
        let edge: usize = edge.parse().map_err(Failure::config)?;
        let offset: f64 = offset.parse().map_err(Failure::config)?;
        let len = tree
            .edges()
            .get(edge)
            .map(|e| e.2)
            .ok_or_else(|| Failure::config(format!("no edge {edge}")))?;
        if !(0.0..=len).contains(&offset) {
            return Err(Failure::config(format!("offset {offset} outside edge {edge} of length {len}")));
        }
        return Ok(Point::Finite(tree.point_on_edge(edge, offset)));
    }
    tree.vertex(s)
        .map(Point::Finite)
        .ok_or_else(|| Failure::config(format!("unknown vertex `{s}`")))
}

fn show(handle: &SpaceHandle, p: &Point) -> String {
    match (handle, p) {
        (SpaceHandle::FiniteTree(t), Point::Finite(FinitePoint::Vertex(v))) => t.vertex_name(*v).to_string(),
        _ => p.to_string(),
    }
}

fn distance(args: &SpaceArgs, a: &str, b: &str) -> Result<u8, Failure> {
    let (h, pts) = resolve(args, &[a, b])?;
    println!("{}", h.distance(&pts[0], &pts[1]).map_err(Failure::config)?);
    Ok(0)
}

fn project(args: &SpaceArgs, a: &str, b: &str, x: &str) -> Result<u8, Failure> {
    let (h, pts) = resolve(args, &[a, b, x])?;
    let seg = GeodesicSegment::new(pts[0], pts[1]);
    let p = h
        .project_to_segment(&seg, &pts[2], tol::PROJECTION_PARAM)
        .map_err(Failure::config)?;
    let d = h.distance(&p, &pts[2]).map_err(Failure::config)?;
    println!("{} {d}", show(&h, &p));
    Ok(0)
}

fn circumcenter(args: &SpaceArgs, raw: &[String], tol: f64) -> Result<u8, Failure> {
    let raw: Vec<&str> = raw.iter().map(String::as_str).collect();
    let (h, pts) = resolve(args, &raw)?;
    match h.circumcenter(&pts, tol) {
        Ok(c) => {
            println!("{} {}", show(&h, &c.center), c.radius);
            Ok(0)
        }
        Err(e) => Err(Failure {
            message: e.to_string(),
            code: 1,
        }),
    }
}
