//! Whitehead moves in every coordinate space, their split into a linear map
//! and a Hamiltonian flow, and the relations of the move groupoid.

use std::ops::{AddAssign, SubAssign};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coords::{ConstraintMap, CotangentVector, GenShearVector, LamVector, ShearVector, Space};
use crate::fatgraph::{face_map, transport_path, EdgePath, FatGraph, Frame};
use crate::holonomy::holonomy;
use crate::poisson::{block, wp_coefficients, Bivector, BivectorKind};
use crate::ralgebra::{li2, li2_complex, softplus, Lambda, RNum};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoveRecord {
    pub edge: String,
    pub alpha: usize,
    pub frame: Frame,
    pub pre: u64,
    pub post: u64,
    pub space: Space,
    pub lambda: Option<Lambda>,
}

/// A move at α, prepared on a fixed graph.
#[derive(Clone, Debug)]
pub struct Move {
    pre: FatGraph,
    post: FatGraph,
    frame: Frame,
    wp: DMatrix<i64>,
}

impl Move {
    pub fn new(g: &FatGraph, alpha: usize) -> Result<Move> {
        let (post, frame) = g.whitehead(alpha)?;
        Ok(Move { pre: g.clone(), post, frame, wp: wp_coefficients(g) })
    }

    pub fn pre(&self) -> &FatGraph {
        &self.pre
    }

    pub fn post(&self) -> &FatGraph {
        &self.post
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn alpha(&self) -> usize {
        self.frame.alpha
    }

    pub fn record(&self, space: Space, lambda: Option<Lambda>) -> MoveRecord {
        MoveRecord {
            edge: self.pre.label(self.alpha()).to_string(),
            alpha: self.alpha(),
            frame: self.frame,
            pre: self.pre.fingerprint(),
            post: self.post.fingerprint(),
            space,
            lambda,
        }
    }

    fn check(&self, fp: u64) -> Result<()> {
        if fp == self.pre.fingerprint() {
            Ok(())
        } else {
            Err(Error::GraphMismatch)
        }
    }

    /// log(1 + e^s), refusing points within 1e-12 of the singular set.
    fn log1p_exp(&self, s: RNum) -> Result<RNum> {
        if s.lambda == Lambda::Plus && (1.0 + s.to_complex().exp()).norm() < 1e-12 {
            return Err(self.singular(format!("1 + e^z vanishes at z = {s}")));
        }
        s.log1p_exp().map_err(|e| self.singular(e.to_string()))
    }

    fn singular(&self, detail: String) -> Error {
        Error::Domain { func: "move", detail: format!("edge {}: {detail}", self.pre.label(self.alpha())) }
    }

    /// Adds `up` at β, δ and subtracts `down` at γ, ε, once per occurrence.
    fn shift<T: Copy + AddAssign + SubAssign>(&self, v: &mut [T], up: T, down: T) {
        for e in self.frame.plus() {
            v[e] += up;
        }
        for e in self.frame.minus() {
            v[e] -= down;
        }
    }

    /// (πp)_α, the imaginary part seen by the cotangent move.
    fn wp_row(&self, p: &[f64]) -> f64 {
        let a = self.alpha();
        (0..p.len()).map(|z| self.wp[(a, z)] as f64 * p[z]).sum()
    }

    pub fn apply_x(&self, x: &ShearVector) -> Result<ShearVector> {
        self.check(x.graph)?;
        let a = self.alpha();
        let xa = x.x[a];
        let mut out = x.x.clone();
        self.shift(&mut out, softplus(xa), softplus(-xa));
        out[a] = -xa;
        Ok(ShearVector { x: out, graph: self.post.fingerprint() })
    }

    pub fn apply_lam(&self, x: &ShearVector, w: &LamVector) -> Result<(ShearVector, LamVector)> {
        self.check(w.graph)?;
        let a = self.alpha();
        let l = w.lambda;
        let xa = RNum::real(x.x[a], l);
        let wa = w.w[a];
        let up = self.log1p_exp(xa + wa)? - RNum::real(softplus(xa.re), l);
        let down = self.log1p_exp(-xa - wa)? - RNum::real(softplus(-xa.re), l);
        let mut out = w.w.clone();
        self.shift(&mut out, up, down);
        out[a] = -wa;
        let lam = LamVector { w: out, lambda: l, graph: self.post.fingerprint() };
        Ok((self.apply_x(x)?, lam))
    }

    pub fn apply_z(&self, z: &GenShearVector) -> Result<GenShearVector> {
        self.check(z.graph)?;
        let a = self.alpha();
        let za = z.z[a];
        let up = self.log1p_exp(za)?;
        let down = self.log1p_exp(-za)?;
        let mut out = z.z.clone();
        self.shift(&mut out, up, down);
        out[a] = -za;
        Ok(GenShearVector { z: out, lambda: z.lambda, graph: self.post.fingerprint() })
    }

    /// The lift of the move to (x, p); it depends on Λ through s = x^α + ℓ(πp)_α.
    pub fn apply_cotangent(&self, cv: &CotangentVector, lambda: Lambda) -> Result<CotangentVector> {
        self.check(cv.graph)?;
        let f = self.frame;
        let a = f.alpha;
        let s = RNum::new(cv.x[a], self.wp_row(&cv.p), lambda);
        let up = self.log1p_exp(s)?;
        let down = self.log1p_exp(-s)?;
        let mut x = cv.x.clone();
        self.shift(&mut x, up.re, down.re);
        x[a] = -cv.x[a];
        let mut p = cv.p.clone();
        p[a] = -cv.p[a] + cv.p[f.gamma] + cv.p[f.epsilon] + up.im;
        Ok(CotangentVector { x, p, graph: self.post.fingerprint() })
    }

    /// 2A, where A is the linear part on shear coordinates.
    pub fn linear_doubled(&self) -> DMatrix<i64> {
        let n = self.pre.num_edges();
        let a = self.alpha();
        let mut m = DMatrix::<i64>::identity(n, n) * 2;
        m[(a, a)] = -2;
        for e in self.frame.neighbours() {
            m[(e, a)] += 1;
        }
        m
    }

    /// 2A acting on x and y alike.
    pub fn linear_gen_doubled(&self) -> DMatrix<i64> {
        let a = self.linear_doubled();
        let z = DMatrix::zeros(a.nrows(), a.ncols());
        block(&a, &z, &z, &a)
    }

    /// 2Ã: 2A on the base and 2Aᵀ on the fiber.
    pub fn linear_cotangent_doubled(&self) -> DMatrix<i64> {
        let a = self.linear_doubled();
        let z = DMatrix::zeros(a.nrows(), a.ncols());
        block(&a, &z, &z, &a.transpose())
    }

    fn linear_apply(&self, v: &[f64], m: &DMatrix<i64>) -> Vec<f64> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| 0.5 * m[(i, j)] as f64 * v[j]).sum()).collect()
    }

    /// A: x^α ↦ −x^α, each neighbour gains x^α/2.
    pub fn linear_x(&self, x: &ShearVector) -> Result<ShearVector> {
        self.check(x.graph)?;
        Ok(ShearVector { x: self.linear_apply(&x.x, &self.linear_doubled()), graph: self.post.fingerprint() })
    }

    /// B: time-one flow of H(x^α) under π_WP.
    pub fn flow_x(&self, x: &ShearVector) -> Result<ShearVector> {
        self.check(x.graph)?;
        let a = self.alpha();
        let dh = hamiltonian_grad(x.x[a]);
        let p = Bivector::new(BivectorKind::WeilPetersson, &self.pre).matrix();
        let out = x.x.iter().enumerate().map(|(i, &v)| v + p[(i, a)] * dh).collect();
        Ok(ShearVector { x: out, graph: x.graph })
    }

    pub fn linear_z(&self, z: &GenShearVector) -> Result<GenShearVector> {
        self.check(z.graph)?;
        let m = self.linear_doubled();
        let x = self.linear_apply(&z.x(), &m);
        let y = self.linear_apply(&z.y(), &m);
        let out = x.iter().zip(&y).map(|(&a, &b)| RNum::new(a, b, z.lambda)).collect();
        Ok(GenShearVector { z: out, lambda: z.lambda, graph: self.post.fingerprint() })
    }

    /// B on z: z ↦ z + 2{z, Im H(z^α)}_Λ.
    pub fn flow_z(&self, z: &GenShearVector) -> Result<GenShearVector> {
        self.check(z.graph)?;
        let n = self.pre.num_edges();
        let a = self.alpha();
        let (gx, gy) = im_hamiltonian_grad(z.z[a]).map_err(|e| self.singular(e.to_string()))?;
        let p = Bivector::new(BivectorKind::Gravitational, &self.pre).matrix();
        let d = |i: usize| 2.0 * (p[(i, a)] * gx + p[(i, n + a)] * gy);
        let out = (0..n).map(|i| z.z[i] + RNum::new(d(i), d(n + i), z.lambda)).collect();
        Ok(GenShearVector { z: out, lambda: z.lambda, graph: z.graph })
    }

    pub fn linear_cotangent(&self, cv: &CotangentVector) -> Result<CotangentVector> {
        self.check(cv.graph)?;
        let m = self.linear_doubled();
        let x = self.linear_apply(&cv.x, &m);
        let p = self.linear_apply(&cv.p, &m.transpose());
        Ok(CotangentVector { x, p, graph: self.post.fingerprint() })
    }

    /// B̃: time-one flow of K = −Im H ∘ π♯ under the canonical bracket.
    pub fn flow_cotangent(&self, cv: &CotangentVector, lambda: Lambda) -> Result<CotangentVector> {
        self.check(cv.graph)?;
        let n = self.pre.num_edges();
        let a = self.alpha();
        let s = RNum::new(cv.x[a], self.wp_row(&cv.p), lambda);
        let (gx, gy) = im_hamiltonian_grad(s).map_err(|e| self.singular(e.to_string()))?;
        let mut grad = vec![0.0; 2 * n];
        grad[a] = -gx;
        for z in 0..n {
            grad[n + z] = -gy * self.wp[(a, z)] as f64;
        }
        let p = Bivector::new(BivectorKind::Cotangent, &self.pre).matrix();
        let d: Vec<f64> = (0..2 * n).map(|i| (0..2 * n).map(|j| p[(i, j)] * grad[j]).sum()).collect();
        let x = (0..n).map(|i| cv.x[i] + d[i]).collect();
        let q = (0..n).map(|i| cv.p[i] + d[n + i]).collect();
        Ok(CotangentVector { x, p: q, graph: cv.graph })
    }
}

pub fn move_x(g: &FatGraph, x: &ShearVector, alpha: usize) -> Result<(FatGraph, ShearVector, MoveRecord)> {
    let m = Move::new(g, alpha)?;
    let out = m.apply_x(x)?;
    Ok((m.post.clone(), out, m.record(Space::Teich, None)))
}

pub fn move_lam(
    g: &FatGraph,
    x: &ShearVector,
    w: &LamVector,
    alpha: usize,
) -> Result<(FatGraph, ShearVector, LamVector, MoveRecord)> {
    let m = Move::new(g, alpha)?;
    let (x2, w2) = m.apply_lam(x, w)?;
    Ok((m.post.clone(), x2, w2, m.record(Space::Lamination, Some(w.lambda))))
}

pub fn move_z(g: &FatGraph, z: &GenShearVector, alpha: usize) -> Result<(FatGraph, GenShearVector, MoveRecord)> {
    let m = Move::new(g, alpha)?;
    let out = m.apply_z(z)?;
    Ok((m.post.clone(), out, m.record(Space::Spacetime, Some(z.lambda))))
}

pub fn move_cotangent(
    g: &FatGraph,
    cv: &CotangentVector,
    alpha: usize,
    lambda: Lambda,
) -> Result<(FatGraph, CotangentVector, MoveRecord)> {
    let m = Move::new(g, alpha)?;
    let out = m.apply_cotangent(cv, lambda)?;
    Ok((m.post.clone(), out, m.record(Space::Cotangent, Some(lambda))))
}

/// The moved graph together with the image of a path on it.
pub fn transport(g: &FatGraph, p: &EdgePath, alpha: usize) -> Result<(FatGraph, EdgePath)> {
    let (post, _) = g.whitehead(alpha)?;
    let q = transport_path(g, &post, alpha, p)?;
    Ok((post, q))
}

/// H(x) = x²/4 + Li₂(−eˣ).
pub fn hamiltonian(x: f64) -> Result<f64> {
    Ok(0.25 * x * x + li2(-x.exp())?)
}

pub fn hamiltonian_grad(x: f64) -> f64 {
    0.5 * x - softplus(x)
}

/// Im H(z) for z ∈ R_Λ.
pub fn im_hamiltonian(z: RNum) -> Result<f64> {
    let (x, y) = (z.re, z.im);
    let rest = match z.lambda {
        Lambda::Zero => -y * softplus(x),
        Lambda::Minus => 0.5 * (li2(-(x + y).exp())? - li2(-(x - y).exp())?),
        Lambda::Plus => li2_complex(-z.to_complex().exp()).im,
    };
    Ok(0.5 * x * y + rest)
}

/// (∂/∂x, ∂/∂y) of Im H, i.e. (Im w, Re w) with w = z/2 − log(1 + e^z).
pub fn im_hamiltonian_grad(z: RNum) -> Result<(f64, f64)> {
    let w = z.scale(0.5) - z.log1p_exp()?;
    Ok((w.im, w.re))
}

/// A point of one of the coordinate spaces.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Teich(ShearVector),
    Lamination(ShearVector, LamVector),
    Spacetime(GenShearVector),
    Cotangent(CotangentVector, Lambda),
}

impl Point {
    pub fn sample(cm: &ConstraintMap, space: Space, lambda: Lambda, seed: u64) -> Result<Point> {
        Ok(match space {
            Space::Teich => Point::Teich(cm.sample_shear(seed)?),
            Space::Lamination => {
                Point::Lamination(cm.sample_shear(seed)?, cm.sample_lam(seed ^ 0x9e37_79b9_7f4a_7c15, lambda)?)
            }
            Space::Spacetime => Point::Spacetime(cm.sample_gen_shear(seed, lambda)?),
            Space::Cotangent => Point::Cotangent(cm.sample_cotangent(seed)?, lambda),
        })
    }

    pub fn space(&self) -> Space {
        match self {
            Point::Teich(_) => Space::Teich,
            Point::Lamination(..) => Space::Lamination,
            Point::Spacetime(_) => Space::Spacetime,
            Point::Cotangent(..) => Space::Cotangent,
        }
    }

    pub fn graph(&self) -> u64 {
        match self {
            Point::Teich(x) | Point::Lamination(x, _) => x.graph,
            Point::Spacetime(z) => z.graph,
            Point::Cotangent(c, _) => c.graph,
        }
    }

    pub fn apply(&self, m: &Move) -> Result<Point> {
        Ok(match self {
            Point::Teich(x) => Point::Teich(m.apply_x(x)?),
            Point::Lamination(x, w) => {
                let (x, w) = m.apply_lam(x, w)?;
                Point::Lamination(x, w)
            }
            Point::Spacetime(z) => Point::Spacetime(m.apply_z(z)?),
            Point::Cotangent(c, l) => Point::Cotangent(m.apply_cotangent(c, *l)?, *l),
        })
    }

    /// All real components, edge-major within each block.
    pub fn flatten(&self) -> Vec<f64> {
        match self {
            Point::Teich(x) => x.x.clone(),
            Point::Lamination(x, w) => [x.x.clone(), w.u(), w.v()].concat(),
            Point::Spacetime(z) => [z.x(), z.y()].concat(),
            Point::Cotangent(c, _) => [c.x.clone(), c.p.clone()].concat(),
        }
    }

    /// A point of the same kind with components `v`, attached to graph `fp`.
    pub fn rebuild(&self, v: &[f64], fp: u64) -> Point {
        let n = self.num_edges();
        let pair = |a: &[f64], b: &[f64], l: Lambda| a.iter().zip(b).map(|(&x, &y)| RNum::new(x, y, l)).collect();
        match self {
            Point::Teich(_) => Point::Teich(ShearVector { x: v.to_vec(), graph: fp }),
            Point::Lamination(_, w) => Point::Lamination(
                ShearVector { x: v[..n].to_vec(), graph: fp },
                LamVector { w: pair(&v[n..2 * n], &v[2 * n..], w.lambda), lambda: w.lambda, graph: fp },
            ),
            Point::Spacetime(z) => {
                Point::Spacetime(GenShearVector { z: pair(&v[..n], &v[n..], z.lambda), lambda: z.lambda, graph: fp })
            }
            Point::Cotangent(_, l) => {
                Point::Cotangent(CotangentVector { x: v[..n].to_vec(), p: v[n..].to_vec(), graph: fp }, *l)
            }
        }
    }

    pub fn num_edges(&self) -> usize {
        match self {
            Point::Teich(x) | Point::Lamination(x, _) => x.x.len(),
            Point::Spacetime(z) => z.z.len(),
            Point::Cotangent(c, _) => c.x.len(),
        }
    }

    /// Moves the value on edge e to edge `map[e]`.
    pub fn relabel(&self, map: &[usize], fp: u64) -> Point {
        let n = self.num_edges();
        let v = self.flatten();
        let mut out = vec![0.0; v.len()];
        for b in 0..v.len() / n {
            for e in 0..n {
                out[b * n + map[e]] = v[b * n + e];
            }
        }
        self.rebuild(&out, fp)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.flatten().iter().zip(other.flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    fn bivector(&self) -> Option<BivectorKind> {
        match self {
            Point::Teich(_) => Some(BivectorKind::WeilPetersson),
            Point::Lamination(..) => None,
            Point::Spacetime(_) => Some(BivectorKind::Gravitational),
            Point::Cotangent(..) => Some(BivectorKind::Cotangent),
        }
    }
}

/// Edge map `from → to` of a label-preserving isomorphism.
fn edge_map(from: &FatGraph, to: &FatGraph) -> Option<Vec<usize>> {
    let iso = from.isomorphism(to, true)?;
    Some((0..from.num_edges()).map(|e| to.edge_of(iso[from.ends(e)[0]])).collect())
}

fn compare_on(result: &Point, result_graph: &FatGraph, target: &Point, target_graph: &FatGraph) -> f64 {
    match edge_map(result_graph, target_graph) {
        Some(m) => result.relabel(&m, target.graph()).distance(target),
        None => f64::INFINITY,
    }
}

fn run(pt: &Point, g: &FatGraph, edges: &[usize]) -> Result<(Point, FatGraph)> {
    let (mut p, mut h) = (pt.clone(), g.clone());
    for &e in edges {
        let m = Move::new(&h, e)?;
        p = p.apply(&m)?;
        h = m.post;
    }
    Ok((p, h))
}

/// max over non-loop α of |W_α W_α p − p|.
pub fn involutivity(g: &FatGraph, pt: &Point) -> Result<f64> {
    let mut worst = 0.0f64;
    for a in (0..g.num_edges()).filter(|&a| !g.is_loop(a)) {
        let (p2, g2) = run(pt, g, &[a, a])?;
        worst = worst.max(compare_on(&p2, &g2, pt, g));
    }
    Ok(worst)
}

/// Pairs of non-loop edges with no common vertex.
pub fn disjoint_pairs(g: &FatGraph) -> Vec<(usize, usize)> {
    let n = g.num_edges();
    (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|&(a, b)| !g.is_loop(a) && !g.is_loop(b) && g.shared_vertices(a, b) == 0)
        .collect()
}

/// Pairs of non-loop edges meeting in exactly one vertex.
pub fn adjacent_pairs(g: &FatGraph) -> Vec<(usize, usize)> {
    let n = g.num_edges();
    (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|&(a, b)| !g.is_loop(a) && !g.is_loop(b) && g.shared_vertices(a, b) == 1)
        .collect()
}

pub fn commutativity(g: &FatGraph, pt: &Point) -> Result<f64> {
    let mut worst = 0.0f64;
    for (a, b) in disjoint_pairs(g) {
        let (pab, gab) = run(pt, g, &[a, b])?;
        let (pba, gba) = run(pt, g, &[b, a])?;
        worst = worst.max(compare_on(&pab, &gab, &pba, &gba));
    }
    Ok(worst)
}

/// Five alternating moves on α, β followed by the transposition α ↔ β.
pub fn pentagon(g: &FatGraph, pt: &Point) -> Result<f64> {
    let mut worst = 0.0f64;
    for (a, b) in adjacent_pairs(g) {
        let (p5, g5) = run(pt, g, &[a, b, a, b, a])?;
        worst = worst.max(compare_on(&p5, &g5, pt, &g.swap_labels(a, b)));
    }
    Ok(worst)
}

/// Renumbers and reorients the edges, then compares moving before and after.
pub fn naturality(g: &FatGraph, pt: &Point, rng: &mut impl Rng) -> Result<f64> {
    let n = g.num_edges();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let flip: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    let gr = g.renumber(&perm, &flip)?;
    let pr = pt.relabel(&perm, gr.fingerprint());
    let mut worst = 0.0f64;
    for a in (0..n).filter(|&a| !g.is_loop(a)) {
        let m = Move::new(g, a)?;
        let mr = Move::new(&gr, perm[a])?;
        let lhs = pr.apply(&mr)?;
        let rhs = pt.apply(&m)?.relabel(&perm, mr.post.fingerprint());
        worst = worst.max(lhs.distance(&rhs));
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Involutivity,
    Commutativity,
    Naturality,
    Pentagon,
}

impl Relation {
    pub const ALL: [Relation; 4] =
        [Relation::Involutivity, Relation::Commutativity, Relation::Naturality, Relation::Pentagon];
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationStats {
    pub relation: Relation,
    pub checked: bool,
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationReport {
    pub space: Space,
    pub lambda: Option<Lambda>,
    pub samples: usize,
    pub seed: u64,
    pub stats: Vec<RelationStats>,
    pub notices: Vec<String>,
}

impl RelationReport {
    pub fn max_residual(&self) -> f64 {
        self.stats.iter().filter(|s| s.checked).map(|s| s.max_residual).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

/// Seed of sample i, independent of how samples are spread over threads.
pub fn sample_seed(seed: u64, i: usize) -> u64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(i as u64);
    r.next_u64()
}

/// Checks every relation on `samples` random points, in parallel.
pub fn relation_suite(g: &FatGraph, space: Space, lambda: Lambda, samples: usize, seed: u64) -> Result<RelationReport> {
    relation_suite_for(g, space, lambda, samples, seed, &Relation::ALL)
}

/// As `relation_suite`, restricted to `relations`.
pub fn relation_suite_for(
    g: &FatGraph,
    space: Space,
    lambda: Lambda,
    samples: usize,
    seed: u64,
    relations: &[Relation],
) -> Result<RelationReport> {
    let cm = ConstraintMap::new(g);
    let mut notices = Vec::new();
    let available = |r: Relation| match r {
        Relation::Commutativity => !disjoint_pairs(g).is_empty(),
        Relation::Pentagon => !adjacent_pairs(g).is_empty(),
        _ => true,
    };
    let active: Vec<Relation> = relations.iter().copied().filter(|&r| available(r)).collect();
    for &r in relations.iter().filter(|&&r| !available(r)) {
        notices.push(match r {
            Relation::Commutativity => "commutativity skipped: no pair of disjoint edges".to_string(),
            _ => "pentagon skipped: no pair of edges meeting in one vertex".to_string(),
        });
    }
    let per_sample: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let s = sample_seed(seed, i);
            let pt = Point::sample(&cm, space, lambda, s)?;
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            active
                .iter()
                .map(|r| match r {
                    Relation::Involutivity => involutivity(g, &pt),
                    Relation::Commutativity => commutativity(g, &pt),
                    Relation::Naturality => naturality(g, &pt, &mut rng),
                    Relation::Pentagon => pentagon(g, &pt),
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let stats = relations
        .iter()
        .map(|&relation| {
            let k = active.iter().position(|&r| r == relation);
            RelationStats {
                relation,
                checked: k.is_some(),
                max_residual: k.map_or(0.0, |k| per_sample.iter().map(|r| r[k]).fold(0.0, f64::max)),
            }
        })
        .collect();
    let lambda = (space != Space::Teich).then_some(lambda);
    Ok(RelationReport { space, lambda, samples, seed, stats, notices })
}

/// max |J P Jᵀ − P′| with J the central-difference Jacobian of the move.
pub fn jacobian_poisson_residual(m: &Move, pt: &Point, h: f64) -> Result<f64> {
    let kind = pt.bivector().ok_or_else(|| Error::Format("no bivector on the lamination space".into()))?;
    let v = pt.flatten();
    let d = v.len();
    let mut j = DMatrix::zeros(d, d);
    for c in 0..d {
        let mut vp = v.clone();
        let mut vm = v.clone();
        vp[c] += h;
        vm[c] -= h;
        let fp = pt.rebuild(&vp, pt.graph()).apply(m)?.flatten();
        let fm = pt.rebuild(&vm, pt.graph()).apply(m)?.flatten();
        for r in 0..d {
            j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    let p = Bivector::new(kind, &m.pre).matrix();
    let q = Bivector::new(kind, &m.post).matrix();
    Ok((&j * p * j.transpose() - q).amax())
}

/// max over paths of the change in ±Tr ρ when both path and point are moved.
pub fn trace_invariance(m: &Move, z: &GenShearVector, paths: &[EdgePath]) -> Result<f64> {
    let z2 = m.apply_z(z)?;
    let mut worst = 0.0f64;
    for p in paths {
        let q = transport_path(&m.pre, &m.post, m.alpha(), p)?;
        let t1 = holonomy(&m.pre, p, z)?.trace();
        let t2 = holonomy(&m.post, &q, &z2)?.trace();
        worst = worst.max((t1 - t2).abs_max().min((t1 + t2).abs_max()));
    }
    Ok(worst)
}

/// Shifting p along the gauge direction of face i must shift the image by
/// the matching face direction after the move: max residual over faces.
pub fn gauge_shift_residual(m: &Move, cv: &CotangentVector, lambda: Lambda, q: f64) -> Result<f64> {
    let fm = face_map(&m.pre, &m.post, m.alpha())?;
    let t = ConstraintMap::new(&m.pre).theta().clone();
    let t2 = ConstraintMap::new(&m.post).theta().clone();
    let base = m.apply_cotangent(cv, lambda)?;
    let n = cv.x.len();
    let mut worst = 0.0f64;
    for (i, &j) in fm.iter().enumerate() {
        let mut shifted = cv.clone();
        for e in 0..n {
            shifted.p[e] += q * t[(i, e)];
        }
        let out = m.apply_cotangent(&shifted, lambda)?;
        for e in 0..n {
            worst = worst.max((out.x[e] - base.x[e]).abs());
            worst = worst.max((out.p[e] - base.p[e] - q * t2[(j, e)]).abs());
        }
    }
    Ok(worst)
}
