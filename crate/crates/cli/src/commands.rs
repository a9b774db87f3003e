use std::fs;
use std::path::Path;

use holoshear::acceptance::{self, AcceptConfig};
use holoshear::coords::CoordFile;
use holoshear::fatgraph::GraphFile;
use holoshear::moves::{relation_suite, Move, MoveRecord, Point};
use holoshear::poisson::{casimir_check, pi_sharp, symplectic_rank, wp_coefficients};
use holoshear::{
    holonomy, json, shipped, ConstraintMap, Coords, EdgePath, Error, FatGraph, GenShearVector, Lambda, Mat2, Space,
};
use serde::Serialize;

use crate::args::{Command, MovesCommand};

pub struct Output {
    pub json: String,
    pub passed: bool,
    /// Human-readable lines for stderr.
    pub lines: Vec<String>,
}

impl Output {
    fn report<T: Serialize>(value: &T, passed: bool) -> Result<Output, String> {
        Ok(Output { json: json::to_string(value).map_err(fail)?, passed, lines: Vec::new() })
    }
}

fn fail(e: Error) -> String {
    e.to_string()
}

pub fn load_graph(arg: &str) -> Result<FatGraph, String> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(g) = shipped::by_name(arg) {
            return Ok(g);
        }
    }
    let text = fs::read_to_string(path).map_err(|e| format!("{arg}: {e}"))?;
    FatGraph::from_json(&text).map_err(|e| format!("{arg}: {e}"))
}

fn load_coords(g: &FatGraph, path: &Path) -> Result<Coords, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Coords::from_json(g, &text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn run(cmd: &Command) -> Result<Output, String> {
    match cmd {
        Command::Validate { graph } => validate(graph),
        Command::Holonomy { graph, coords, path, lambda } => holonomy_cmd(graph, coords.as_deref(), path, *lambda),
        Command::Sample { graph, space, lambda, seed } => sample(graph, *space, *lambda, *seed),
        Command::Moves(MovesCommand::Apply { graph, coords, edge, lambda }) => apply(graph, coords, edge, *lambda),
        Command::Moves(MovesCommand::Relations { graph, space, lambda, samples, seed, tol }) => {
            relations(graph, *space, *lambda, *samples, *seed, *tol)
        }
        Command::Accept { seed, samples, tol, graph } => accept(*seed, *samples, *tol, graph),
    }
}

#[derive(Serialize)]
struct ValidateReport {
    genus: usize,
    punctures: usize,
    vertices: usize,
    edges: usize,
    faces: Vec<String>,
    theta: Vec<Vec<i64>>,
    wp: Vec<Vec<i64>>,
    loops: Vec<String>,
    casimir: bool,
    symplectic_rank: usize,
    expected_rank: usize,
    gauge_admissible: bool,
}

fn validate(graph: &str) -> Result<Output, String> {
    let g = load_graph(graph)?;
    let wp = wp_coefficients(&g);
    let n = g.num_edges();
    let rank = symplectic_rank(&g);
    let report = ValidateReport {
        genus: g.genus(),
        punctures: g.punctures(),
        vertices: g.num_vertices(),
        edges: n,
        faces: g.faces().iter().map(|f| EdgePath::face(&g, f).display(&g)).collect(),
        theta: g.theta(),
        wp: (0..n).map(|i| (0..n).map(|j| wp[(i, j)]).collect()).collect(),
        loops: (0..n).filter(|&e| g.is_loop(e)).map(|e| g.label(e).to_string()).collect(),
        casimir: casimir_check(&g),
        symplectic_rank: rank.rank,
        expected_rank: rank.expected,
        gauge_admissible: ConstraintMap::new(&g).is_admissible().map_err(fail)?,
    };
    let mut out = Output::report(&report, true)?;
    out.lines.push(format!("genus {} punctures {} edges {}", report.genus, report.punctures, report.edges));
    Ok(out)
}

fn parse_path(g: &FatGraph, arg: &str) -> Result<EdgePath, String> {
    if let Some(i) = arg.strip_prefix("face:") {
        let i: usize = i.parse().map_err(|_| format!("bad face index {i:?}"))?;
        let faces = g.faces();
        let f = faces.get(i).ok_or_else(|| format!("face {i} out of range (graph has {})", faces.len()))?;
        return Ok(EdgePath::face(g, f));
    }
    EdgePath::parse(g, arg).map_err(fail)
}

/// Point on the spacetime side used for holonomies.
fn as_spacetime(g: &FatGraph, c: &Coords, lambda: Option<Lambda>) -> Result<GenShearVector, String> {
    let need = || lambda.ok_or_else(|| "--lambda is required for these coordinates".to_string());
    match c {
        Coords::Teich(x) => Ok(x.lift(lambda.unwrap_or(Lambda::Plus))),
        Coords::Spacetime(z) => Ok(z.clone()),
        Coords::Lamination { w, base: Some(x) } => GenShearVector::from_base(x, w).map_err(fail),
        Coords::Lamination { base: None, .. } => Err("lamination coordinates need a base point".into()),
        Coords::Cotangent(cv) => pi_sharp(g, cv, need()?).map_err(fail),
    }
}

#[derive(Serialize)]
struct HolonomyReport {
    path: String,
    lambda: Lambda,
    /// [[a, b], [c, d]] with each entry as [re, im].
    matrix: [[[f64; 2]; 2]; 2],
    trace: [f64; 2],
    length: Option<f64>,
}

fn holonomy_cmd(graph: &str, coords: Option<&Path>, path: &str, lambda: Option<Lambda>) -> Result<Output, String> {
    let g = load_graph(graph)?;
    let z = match coords {
        Some(p) => as_spacetime(&g, &load_coords(&g, p)?, lambda)?,
        None => holoshear::ShearVector::zero(&g).lift(lambda.unwrap_or(Lambda::Plus)),
    };
    let p = parse_path(&g, path)?;
    let h = holonomy::holonomy(&g, &p, &z).map_err(fail)?;
    let m: Mat2 = h.matrix;
    let e = |x: holoshear::RNum| [x.re, x.im];
    let t = h.trace();
    let report = HolonomyReport {
        path: p.display(&g),
        lambda: z.lambda,
        matrix: [[e(m.a), e(m.b)], [e(m.c), e(m.d)]],
        trace: [t.re, t.im],
        length: h.length().ok(),
    };
    Output::report(&report, true)
}

fn sample(graph: &str, space: Space, lambda: Lambda, seed: u64) -> Result<Output, String> {
    let g = load_graph(graph)?;
    let cm = ConstraintMap::new(&g);
    let c = match Point::sample(&cm, space, lambda, seed).map_err(fail)? {
        Point::Teich(x) => Coords::Teich(x),
        Point::Lamination(x, w) => Coords::Lamination { w, base: Some(x) },
        Point::Spacetime(z) => Coords::Spacetime(z),
        Point::Cotangent(cv, _) => Coords::Cotangent(cv),
    };
    Output::report(&c.to_file(&g), true)
}

#[derive(Serialize)]
struct ApplyReport {
    moves: Vec<MoveRecord>,
    graph: GraphFile,
    coords: CoordFile,
}

fn apply(graph: &str, coords: &Path, edges: &str, lambda: Option<Lambda>) -> Result<Output, String> {
    let mut g = load_graph(graph)?;
    let mut c = load_coords(&g, coords)?;
    let mut moves = Vec::new();
    for label in edges.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let e = g.edge_index(label).map_err(fail)?;
        let m = Move::new(&g, e).map_err(fail)?;
        let (next, l) = match &c {
            Coords::Teich(x) => (Coords::Teich(m.apply_x(x).map_err(fail)?), None),
            Coords::Lamination { w, base: Some(x) } => {
                let (x, w) = m.apply_lam(x, w).map_err(fail)?;
                (Coords::Lamination { w: w.clone(), base: Some(x) }, Some(w.lambda))
            }
            Coords::Lamination { base: None, .. } => return Err("lamination moves need a base point".into()),
            Coords::Spacetime(z) => (Coords::Spacetime(m.apply_z(z).map_err(fail)?), Some(z.lambda)),
            Coords::Cotangent(cv) => {
                let l = lambda.ok_or("--lambda is required for cotangent moves")?;
                (Coords::Cotangent(m.apply_cotangent(cv, l).map_err(fail)?), Some(l))
            }
        };
        moves.push(m.record(c.space(), l));
        c = next;
        g = m.post().clone();
    }
    Output::report(&ApplyReport { moves, graph: g.to_file(), coords: c.to_file(&g) }, true)
}

fn relations(graph: &str, space: Space, lambda: Lambda, samples: usize, seed: u64, tol: f64) -> Result<Output, String> {
    let g = load_graph(graph)?;
    let r = relation_suite(&g, space, lambda, samples, seed).map_err(fail)?;
    let passed = r.passes(tol);
    let mut out = Output::report(&r, passed)?;
    for s in &r.stats {
        let verdict = match (s.checked, s.max_residual <= tol) {
            (false, _) => "SKIP",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        out.lines.push(format!("{verdict} {:?} residual {:.3e}", s.relation, s.max_residual).to_lowercase());
    }
    out.lines.extend(r.notices.iter().cloned());
    Ok(out)
}

fn accept(seed: u64, samples: Option<usize>, tol: Option<f64>, graphs: &[String]) -> Result<Output, String> {
    let mut cfg = AcceptConfig { seed, samples, tol, ..AcceptConfig::default() };
    if !graphs.is_empty() {
        cfg.graphs = graphs.iter().map(|s| load_graph(s).map(|g| (s.clone(), g))).collect::<Result<_, _>>()?;
    }
    let report = acceptance::run(&cfg);
    let mut out = Output::report(&report, report.passed())?;
    out.lines = report.lines();
    Ok(out)
}
