//! Edge coordinates in all four spaces, face constraints and kernel sampling.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::fatgraph::FatGraph;
use crate::{Error, Lambda, RNum, Result};

/// Box used by the samplers: ‖x‖∞ ≤ 2, ‖y‖∞ ≤ 1, ‖p‖∞ ≤ 1/4.
pub const X_BOX: f64 = 2.0;
pub const Y_BOX: f64 = 1.0;
pub const P_BOX: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    #[serde(alias = "x")]
    Teich,
    #[serde(alias = "w")]
    Lamination,
    #[serde(alias = "z")]
    Spacetime,
    #[serde(alias = "p")]
    Cotangent,
}

impl FromStr for Space {
    type Err = Error;
    fn from_str(s: &str) -> Result<Space> {
        match s {
            "teich" | "x" => Ok(Space::Teich),
            "lamination" | "w" => Ok(Space::Lamination),
            "spacetime" | "z" => Ok(Space::Spacetime),
            "cotangent" | "p" => Ok(Space::Cotangent),
            _ => Err(Error::Format(format!("unknown space {s:?}"))),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Teich => "teich",
            Space::Lamination => "lamination",
            Space::Spacetime => "spacetime",
            Space::Cotangent => "cotangent",
        })
    }
}

/// Shear coordinates x^α.
#[derive(Clone, Debug, PartialEq)]
pub struct ShearVector {
    pub x: Vec<f64>,
    pub graph: u64,
}

/// Lamination coordinates w^α = u^α + ℓv^α.
#[derive(Clone, Debug, PartialEq)]
pub struct LamVector {
    pub w: Vec<RNum>,
    pub lambda: Lambda,
    pub graph: u64,
}

/// Generalized shear coordinates z^α = x^α + ℓy^α.
#[derive(Clone, Debug, PartialEq)]
pub struct GenShearVector {
    pub z: Vec<RNum>,
    pub lambda: Lambda,
    pub graph: u64,
}

/// Base point x^α and fiber coordinates p_α.
#[derive(Clone, Debug, PartialEq)]
pub struct CotangentVector {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub graph: u64,
}

impl ShearVector {
    pub fn new(g: &FatGraph, x: Vec<f64>) -> Result<ShearVector> {
        check_len(g, x.len())?;
        Ok(ShearVector { x, graph: g.fingerprint() })
    }

    pub fn zero(g: &FatGraph) -> ShearVector {
        ShearVector { x: vec![0.0; g.num_edges()], graph: g.fingerprint() }
    }

    /// The same vector viewed as a point with y = 0.
    pub fn lift(&self, lambda: Lambda) -> GenShearVector {
        GenShearVector { z: self.x.iter().map(|&x| RNum::real(x, lambda)).collect(), lambda, graph: self.graph }
    }
}

impl LamVector {
    pub fn new(g: &FatGraph, w: Vec<RNum>, lambda: Lambda) -> Result<LamVector> {
        check_len(g, w.len())?;
        check_lambda(&w, lambda)?;
        Ok(LamVector { w, lambda, graph: g.fingerprint() })
    }

    pub fn from_parts(g: &FatGraph, u: &[f64], v: &[f64], lambda: Lambda) -> Result<LamVector> {
        check_len(g, u.len())?;
        check_len(g, v.len())?;
        let w = u.iter().zip(v).map(|(&a, &b)| RNum::new(a, b, lambda)).collect();
        Ok(LamVector { w, lambda, graph: g.fingerprint() })
    }

    pub fn u(&self) -> Vec<f64> {
        self.w.iter().map(|w| w.re).collect()
    }

    pub fn v(&self) -> Vec<f64> {
        self.w.iter().map(|w| w.im).collect()
    }
}

impl GenShearVector {
    pub fn new(g: &FatGraph, z: Vec<RNum>, lambda: Lambda) -> Result<GenShearVector> {
        check_len(g, z.len())?;
        check_lambda(&z, lambda)?;
        Ok(GenShearVector { z, lambda, graph: g.fingerprint() })
    }

    pub fn from_parts(g: &FatGraph, x: &[f64], y: &[f64], lambda: Lambda) -> Result<GenShearVector> {
        check_len(g, x.len())?;
        check_len(g, y.len())?;
        let z = x.iter().zip(y).map(|(&a, &b)| RNum::new(a, b, lambda)).collect();
        Ok(GenShearVector { z, lambda, graph: g.fingerprint() })
    }

    /// z = x + w.
    pub fn from_base(x: &ShearVector, w: &LamVector) -> Result<GenShearVector> {
        if x.graph != w.graph {
            return Err(Error::GraphMismatch);
        }
        let z = x.x.iter().zip(&w.w).map(|(&a, &b)| RNum::real(a, w.lambda) + b).collect();
        Ok(GenShearVector { z, lambda: w.lambda, graph: x.graph })
    }

    pub fn x(&self) -> Vec<f64> {
        self.z.iter().map(|z| z.re).collect()
    }

    pub fn y(&self) -> Vec<f64> {
        self.z.iter().map(|z| z.im).collect()
    }

    pub fn base(&self) -> ShearVector {
        ShearVector { x: self.x(), graph: self.graph }
    }
}

impl CotangentVector {
    pub fn new(g: &FatGraph, x: Vec<f64>, p: Vec<f64>) -> Result<CotangentVector> {
        check_len(g, x.len())?;
        check_len(g, p.len())?;
        Ok(CotangentVector { x, p, graph: g.fingerprint() })
    }

    pub fn base(&self) -> ShearVector {
        ShearVector { x: self.x.clone(), graph: self.graph }
    }
}

fn check_len(g: &FatGraph, n: usize) -> Result<()> {
    if n == g.num_edges() {
        Ok(())
    } else {
        Err(Error::Dimension { expected: g.num_edges(), got: n })
    }
}

fn check_lambda(v: &[RNum], lambda: Lambda) -> Result<()> {
    match v.iter().find(|z| z.lambda != lambda) {
        Some(z) => Err(Error::LambdaMismatch(lambda, z.lambda)),
        None => Ok(()),
    }
}

/// Anything carrying per-edge values that the face constraints act on.
pub trait EdgeVector {
    fn fingerprint(&self) -> u64;
    /// Components constrained by θ, and an optional component constrained
    /// by the gauge fixing.
    fn parts(&self) -> (Vec<Vec<f64>>, Option<Vec<f64>>);
}

impl EdgeVector for ShearVector {
    fn fingerprint(&self) -> u64 {
        self.graph
    }
    fn parts(&self) -> (Vec<Vec<f64>>, Option<Vec<f64>>) {
        (vec![self.x.clone()], None)
    }
}

impl EdgeVector for LamVector {
    fn fingerprint(&self) -> u64 {
        self.graph
    }
    fn parts(&self) -> (Vec<Vec<f64>>, Option<Vec<f64>>) {
        (vec![self.u(), self.v()], None)
    }
}

impl EdgeVector for GenShearVector {
    fn fingerprint(&self) -> u64 {
        self.graph
    }
    fn parts(&self) -> (Vec<Vec<f64>>, Option<Vec<f64>>) {
        (vec![self.x(), self.y()], None)
    }
}

impl EdgeVector for CotangentVector {
    fn fingerprint(&self) -> u64 {
        self.graph
    }
    fn parts(&self) -> (Vec<Vec<f64>>, Option<Vec<f64>>) {
        (vec![self.x.clone()], Some(self.p.clone()))
    }
}

/// Per-face residuals: θ applied to each constrained part, and θ̃ applied
/// to the fiber part when there is one.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub parts: Vec<Vec<f64>>,
    pub gauge: Option<Vec<f64>>,
}

impl Residual {
    pub fn max_abs(&self) -> f64 {
        self.parts.iter().chain(self.gauge.iter()).flatten().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Face constraints θ (F × E) and a gauge fixing θ̃ stored with the same
/// shape, so that M = θ̃θᵀ.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintMap {
    theta: DMatrix<f64>,
    gauge: Option<DMatrix<f64>>,
    graph: u64,
}

impl ConstraintMap {
    /// θ with the default gauge θ̃ = θ.
    pub fn new(g: &FatGraph) -> ConstraintMap {
        let mut cm = ConstraintMap::without_gauge(g);
        cm.gauge = Some(cm.theta.clone());
        cm
    }

    pub fn without_gauge(g: &FatGraph) -> ConstraintMap {
        let rows = g.theta();
        let theta = DMatrix::from_fn(rows.len(), g.num_edges(), |i, a| rows[i][a] as f64);
        ConstraintMap { theta, gauge: None, graph: g.fingerprint() }
    }

    pub fn with_gauge(g: &FatGraph, gauge: DMatrix<f64>) -> Result<ConstraintMap> {
        let mut cm = ConstraintMap::without_gauge(g);
        if gauge.shape() != cm.theta.shape() {
            return Err(Error::Dimension { expected: cm.theta.len(), got: gauge.len() });
        }
        cm.gauge = Some(gauge);
        Ok(cm)
    }

    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn gauge(&self) -> Option<&DMatrix<f64>> {
        self.gauge.as_ref()
    }

    pub fn num_faces(&self) -> usize {
        self.theta.nrows()
    }

    pub fn num_edges(&self) -> usize {
        self.theta.ncols()
    }

    pub fn rank(&self) -> usize {
        rank(&self.theta)
    }

    /// dim Ker θ, which is E − F when θ has full row rank.
    pub fn kernel_dim(&self) -> usize {
        self.num_edges() - self.rank()
    }

    pub fn residual<V: EdgeVector>(&self, v: &V) -> Result<Residual> {
        if v.fingerprint() != self.graph {
            return Err(Error::GraphMismatch);
        }
        let (parts, fiber) = v.parts();
        let apply = |m: &DMatrix<f64>, x: &[f64]| (m * DVector::from_column_slice(x)).as_slice().to_vec();
        let gauge = match fiber {
            Some(p) => Some(apply(self.gauge.as_ref().ok_or(Error::MissingGauge)?, &p)),
            None => None,
        };
        Ok(Residual { parts: parts.iter().map(|x| apply(&self.theta, x)).collect(), gauge })
    }

    /// M = θ̃θᵀ.
    pub fn dirac_matrix(&self) -> Result<DMatrix<f64>> {
        let gauge = self.gauge.as_ref().ok_or(Error::MissingGauge)?;
        Ok(gauge * self.theta.transpose())
    }

    /// M is invertible, judged by its smallest singular value.
    pub fn is_admissible(&self) -> Result<bool> {
        let m = self.dirac_matrix()?;
        if m.is_empty() {
            return Ok(true);
        }
        let sv = m.singular_values();
        let (lo, hi) = (sv.min(), sv.max());
        Ok(hi > 0.0 && lo > 1e-10 * hi)
    }

    pub fn require_admissible(&self) -> Result<()> {
        if self.is_admissible()? {
            Ok(())
        } else {
            Err(Error::InadmissibleGauge)
        }
    }

    /// Orthogonal projector onto Ker θ.
    pub fn kernel_projector(&self) -> Result<DMatrix<f64>> {
        projector(&self.theta)
    }

    /// Orthogonal projector onto Ker θ̃.
    pub fn gauge_projector(&self) -> Result<DMatrix<f64>> {
        projector(self.gauge.as_ref().ok_or(Error::MissingGauge)?)
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// A Gaussian vector projected onto Ker θ, rescaled so that ‖x‖∞ = bound
    /// (unless the kernel is trivial).
    pub fn sample_kernel(&self, rng: &mut ChaCha8Rng, bound: f64) -> Result<Vec<f64>> {
        sample_projected(&self.kernel_projector()?, rng, bound)
    }

    pub fn sample_shear(&self, seed: u64) -> Result<ShearVector> {
        let mut rng = Self::rng(seed);
        Ok(ShearVector { x: self.sample_kernel(&mut rng, X_BOX)?, graph: self.graph })
    }

    pub fn sample_lam(&self, seed: u64, lambda: Lambda) -> Result<LamVector> {
        let mut rng = Self::rng(seed);
        let u = self.sample_kernel(&mut rng, X_BOX)?;
        let v = self.sample_kernel(&mut rng, Y_BOX)?;
        let w = u.iter().zip(&v).map(|(&a, &b)| RNum::new(a, b, lambda)).collect();
        Ok(LamVector { w, lambda, graph: self.graph })
    }

    pub fn sample_gen_shear(&self, seed: u64, lambda: Lambda) -> Result<GenShearVector> {
        let mut rng = Self::rng(seed);
        let x = self.sample_kernel(&mut rng, X_BOX)?;
        let y = self.sample_kernel(&mut rng, Y_BOX)?;
        let z = x.iter().zip(&y).map(|(&a, &b)| RNum::new(a, b, lambda)).collect();
        Ok(GenShearVector { z, lambda, graph: self.graph })
    }

    /// Base in Ker θ, fiber gauge-fixed to Ker θ̃.
    pub fn sample_cotangent(&self, seed: u64) -> Result<CotangentVector> {
        let mut rng = Self::rng(seed);
        let x = self.sample_kernel(&mut rng, X_BOX)?;
        let p = sample_projected(&self.gauge_projector()?, &mut rng, P_BOX)?;
        Ok(CotangentVector { x, p, graph: self.graph })
    }
}

fn rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let tol = 1e-10 * sv.max().max(1.0);
    sv.iter().filter(|&&s| s > tol).count()
}

fn projector(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.ncols();
    if rank(m) < m.nrows() {
        return Err(Error::RankDeficient);
    }
    let gram = m * m.transpose();
    let inv = gram.try_inverse().ok_or(Error::RankDeficient)?;
    Ok(DMatrix::identity(n, n) - m.transpose() * inv * m)
}

fn sample_projected(proj: &DMatrix<f64>, rng: &mut ChaCha8Rng, bound: f64) -> Result<Vec<f64>> {
    let n = proj.nrows();
    let g = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
    let mut x = proj * g;
    let m = x.amax();
    if m > 1e-12 {
        x *= bound / m;
    } else {
        x.fill(0.0);
    }
    Ok(x.as_slice().to_vec())
}

/// Value of a single edge in a coordinate file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordValue {
    Scalar(f64),
    Pair([f64; 2]),
}

/// On-disk coordinate document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Lambda>,
    pub space: Space,
    pub values: BTreeMap<String, CoordValue>,
    /// Base point x for lamination coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<BTreeMap<String, f64>>,
}

/// A coordinate vector of any space.
#[derive(Clone, Debug, PartialEq)]
pub enum Coords {
    Teich(ShearVector),
    Lamination { w: LamVector, base: Option<ShearVector> },
    Spacetime(GenShearVector),
    Cotangent(CotangentVector),
}

impl Coords {
    pub fn space(&self) -> Space {
        match self {
            Coords::Teich(_) => Space::Teich,
            Coords::Lamination { .. } => Space::Lamination,
            Coords::Spacetime(_) => Space::Spacetime,
            Coords::Cotangent(_) => Space::Cotangent,
        }
    }

    pub fn lambda(&self) -> Option<Lambda> {
        match self {
            Coords::Lamination { w, .. } => Some(w.lambda),
            Coords::Spacetime(z) => Some(z.lambda),
            _ => None,
        }
    }

    pub fn from_file(g: &FatGraph, f: &CoordFile) -> Result<Coords> {
        let n = g.num_edges();
        for key in f.values.keys() {
            g.edge_index(key)?;
        }
        let get = |e: usize| -> Result<CoordValue> {
            f.values
                .get(g.label(e))
                .copied()
                .ok_or_else(|| Error::Format(format!("missing value for edge {:?}", g.label(e))))
        };
        let scalar = |e: usize| -> Result<f64> {
            match get(e)? {
                CoordValue::Scalar(x) => Ok(x),
                CoordValue::Pair(_) => Err(Error::Format(format!("edge {:?} expects a number", g.label(e)))),
            }
        };
        let pair = |e: usize| -> Result<[f64; 2]> {
            match get(e)? {
                CoordValue::Pair(p) => Ok(p),
                CoordValue::Scalar(_) => Err(Error::Format(format!("edge {:?} expects a pair", g.label(e)))),
            }
        };
        let lambda = || f.lambda.ok_or_else(|| Error::Format(format!("space {} needs lambda", f.space)));
        Ok(match f.space {
            Space::Teich => Coords::Teich(ShearVector::new(g, (0..n).map(scalar).collect::<Result<_>>()?)?),
            Space::Lamination => {
                let l = lambda()?;
                let w = (0..n).map(|e| pair(e).map(|[a, b]| RNum::new(a, b, l))).collect::<Result<_>>()?;
                let base = match &f.base {
                    Some(b) => {
                        let x = (0..n)
                            .map(|e| {
                                b.get(g.label(e))
                                    .copied()
                                    .ok_or_else(|| Error::Format(format!("missing base for {:?}", g.label(e))))
                            })
                            .collect::<Result<_>>()?;
                        Some(ShearVector::new(g, x)?)
                    }
                    None => None,
                };
                Coords::Lamination { w: LamVector::new(g, w, l)?, base }
            }
            Space::Spacetime => {
                let l = lambda()?;
                let z = (0..n).map(|e| pair(e).map(|[a, b]| RNum::new(a, b, l))).collect::<Result<_>>()?;
                Coords::Spacetime(GenShearVector::new(g, z, l)?)
            }
            Space::Cotangent => {
                let xp: Vec<[f64; 2]> = (0..n).map(pair).collect::<Result<_>>()?;
                Coords::Cotangent(CotangentVector::new(
                    g,
                    xp.iter().map(|v| v[0]).collect(),
                    xp.iter().map(|v| v[1]).collect(),
                )?)
            }
        })
    }

    pub fn to_file(&self, g: &FatGraph) -> CoordFile {
        let label = |e: usize| g.label(e).to_string();
        let pairs =
            |v: &[RNum]| v.iter().enumerate().map(|(e, z)| (label(e), CoordValue::Pair([z.re, z.im]))).collect();
        let (values, base) = match self {
            Coords::Teich(x) => {
                (x.x.iter().enumerate().map(|(e, &v)| (label(e), CoordValue::Scalar(v))).collect(), None)
            }
            Coords::Lamination { w, base } => {
                (pairs(&w.w), base.as_ref().map(|b| b.x.iter().enumerate().map(|(e, &v)| (label(e), v)).collect()))
            }
            Coords::Spacetime(z) => (pairs(&z.z), None),
            Coords::Cotangent(c) => {
                ((0..c.x.len()).map(|e| (label(e), CoordValue::Pair([c.x[e], c.p[e]]))).collect(), None)
            }
        };
        CoordFile { lambda: self.lambda(), space: self.space(), values, base }
    }

    pub fn from_json(g: &FatGraph, s: &str) -> Result<Coords> {
        Coords::from_file(g, &serde_json::from_str(s)?)
    }

    pub fn to_json(&self, g: &FatGraph) -> Result<String> {
        crate::json::to_string(&self.to_file(g))
    }
}
