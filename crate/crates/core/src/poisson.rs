//! Poisson structures on edge coordinates.
//!
//! Coordinates are flattened as follows: π_WP acts on x (length E), the
//! gravitational bivector π_Λ on (x, y) and the cotangent bivector on
//! (x, p), both of length 2E. The cotangent bracket has {x^α, p_β} = δ^α_β.

use nalgebra::DMatrix;

use crate::coords::{ConstraintMap, CotangentVector, GenShearVector};
use crate::fatgraph::{EdgePath, FatGraph};
use crate::holonomy::{holonomy, prefix_frames};
use crate::rmatrix::{LieVec, ETA};
use crate::{Error, Lambda, Mat2, RNum, Result};

/// π^{αβ} = {x^α, x^β}_WP: for each end h of α, +1 at the edge of ν(h) and
/// −1 at the edge of ν⁻¹(h).
pub fn wp_coefficients(g: &FatGraph) -> DMatrix<i64> {
    let n = g.num_edges();
    let mut p = DMatrix::zeros(n, n);
    for h in 0..g.num_half_edges() {
        let a = g.edge_of(h);
        p[(a, g.edge_of(g.nu(h)))] += 1;
        p[(a, g.edge_of(g.nu_inv(h)))] -= 1;
    }
    p
}

pub fn theta_int(g: &FatGraph) -> DMatrix<i64> {
    let rows = g.theta();
    DMatrix::from_fn(rows.len(), g.num_edges(), |i, a| rows[i][a])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BivectorKind {
    WeilPetersson,
    Gravitational,
    Cotangent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bivector {
    pub kind: BivectorKind,
    pub wp: DMatrix<i64>,
}

impl Bivector {
    pub fn new(kind: BivectorKind, g: &FatGraph) -> Bivector {
        Bivector { kind, wp: wp_coefficients(g) }
    }

    pub fn num_edges(&self) -> usize {
        self.wp.nrows()
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            BivectorKind::WeilPetersson => self.num_edges(),
            _ => 2 * self.num_edges(),
        }
    }

    /// Twice the coefficient matrix, which is integral for every kind.
    pub fn doubled(&self) -> DMatrix<i64> {
        let n = self.num_edges();
        match self.kind {
            BivectorKind::WeilPetersson => &self.wp * 2,
            BivectorKind::Gravitational => block(&DMatrix::zeros(n, n), &self.wp, &self.wp, &DMatrix::zeros(n, n)),
            BivectorKind::Cotangent => {
                let i = DMatrix::<i64>::identity(n, n) * 2;
                block(&DMatrix::zeros(n, n), &i, &(-&i), &DMatrix::zeros(n, n))
            }
        }
    }

    /// P with {f, g} = ∇fᵀ P ∇g.
    pub fn matrix(&self) -> DMatrix<f64> {
        self.doubled().map(|v| v as f64 * 0.5)
    }

    pub fn contract(&self, df: &[f64], dg: &[f64]) -> Result<f64> {
        let n = self.dim();
        for v in [df, dg] {
            if v.len() != n {
                return Err(Error::Dimension { expected: n, got: v.len() });
            }
        }
        Ok(contract(&self.matrix(), df, dg))
    }
}

fn contract(p: &DMatrix<f64>, df: &[f64], dg: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..df.len() {
        if df[i] == 0.0 {
            continue;
        }
        for j in 0..dg.len() {
            s += df[i] * p[(i, j)] * dg[j];
        }
    }
    s
}

pub(crate) fn block<T: nalgebra::Scalar + Default>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    c: &DMatrix<T>,
    d: &DMatrix<T>,
) -> DMatrix<T> {
    let (r1, c1) = a.shape();
    let (r2, c2) = d.shape();
    let mut m = DMatrix::from_element(r1 + r2, c1 + c2, T::default());
    m.view_mut((0, 0), (r1, c1)).copy_from(a);
    m.view_mut((0, c1), (r1, c2)).copy_from(b);
    m.view_mut((r1, 0), (r2, c1)).copy_from(c);
    m.view_mut((r1, c1), (r2, c2)).copy_from(d);
    m
}

/// θ·π_WP = 0.
pub fn casimir_check(g: &FatGraph) -> bool {
    (theta_int(g) * wp_coefficients(g)).iter().all(|&v| v == 0)
}

/// Rank of π_WP next to the dimension E − F of Ker θ; equality means π_WP
/// is non-degenerate on the constraint surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankReport {
    pub rank: usize,
    pub expected: usize,
}

impl RankReport {
    pub fn is_symplectic(&self) -> bool {
        self.rank == self.expected
    }
}

pub fn symplectic_rank(g: &FatGraph) -> RankReport {
    let p = wp_coefficients(g).map(|v| v as f64);
    let rank = if p.is_empty() {
        0
    } else {
        let sv = p.singular_values();
        let tol = 1e-9 * sv.max().max(1.0);
        sv.iter().filter(|&&s| s > tol).count()
    };
    RankReport { rank, expected: g.num_edges() - g.punctures() }
}

/// (x, p) ↦ (x, y) with y = π_WP p.
pub fn pi_sharp(g: &FatGraph, cv: &CotangentVector, lambda: Lambda) -> Result<GenShearVector> {
    if cv.graph != g.fingerprint() {
        return Err(Error::GraphMismatch);
    }
    let p = wp_coefficients(g);
    let n = g.num_edges();
    let y: Vec<f64> = (0..n).map(|a| (0..n).map(|b| p[(a, b)] as f64 * cv.p[b]).sum()).collect();
    GenShearVector::from_parts(g, &cv.x, &y, lambda)
}

/// Jacobian of `pi_sharp`, diag(I, π_WP).
pub fn pi_sharp_jacobian(g: &FatGraph) -> DMatrix<i64> {
    let n = g.num_edges();
    block(&DMatrix::identity(n, n), &DMatrix::zeros(n, n), &DMatrix::zeros(n, n), &wp_coefficients(g))
}

/// J·(2π_{T*})·Jᵀ = −2·(2π_Λ), i.e. J π_{T*} Jᵀ = −2π_Λ.
pub fn pushforward_check(g: &FatGraph) -> bool {
    let j = pi_sharp_jacobian(g);
    let lhs = &j * Bivector::new(BivectorKind::Cotangent, g).doubled() * j.transpose();
    let rhs = Bivector::new(BivectorKind::Gravitational, g).doubled() * -2;
    lhs == rhs
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GradientMethod {
    /// Central differences with step h, falling back to Richardson
    /// extrapolation when steps h and 2h disagree by more than 1e-4.
    Adaptive {
        h: f64,
    },
    Central {
        h: f64,
    },
    /// Fourth-order Richardson extrapolation of central differences.
    Richardson {
        h: f64,
    },
}

impl Default for GradientMethod {
    fn default() -> Self {
        GradientMethod::Adaptive { h: 1e-6 }
    }
}

fn central<F: Fn(&[f64]) -> f64>(f: &F, x: &mut [f64], i: usize, h: f64) -> f64 {
    let x0 = x[i];
    x[i] = x0 + h;
    let fp = f(x);
    x[i] = x0 - h;
    let fm = f(x);
    x[i] = x0;
    (fp - fm) / (2.0 * h)
}

pub fn gradient<F: Fn(&[f64]) -> f64>(f: &F, at: &[f64], method: GradientMethod) -> Vec<f64> {
    let mut x = at.to_vec();
    (0..at.len())
        .map(|i| match method {
            GradientMethod::Central { h } => central(f, &mut x, i, h),
            GradientMethod::Richardson { h } => {
                let (d1, d2) = (central(f, &mut x, i, h), central(f, &mut x, i, h / 2.0));
                (4.0 * d2 - d1) / 3.0
            }
            GradientMethod::Adaptive { h } => {
                let (d1, d2) = (central(f, &mut x, i, h), central(f, &mut x, i, 2.0 * h));
                if (d1 - d2).abs() > 1e-4 * d1.abs().max(1.0) {
                    (4.0 * d1 - d2) / 3.0
                } else {
                    d1
                }
            }
        })
        .collect()
}

/// {f, g} = ∇fᵀ P ∇g with numerical gradients.
pub fn bracket<F, G>(f: &F, g: &G, b: &Bivector, at: &[f64], method: GradientMethod) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> f64,
{
    if at.len() != b.dim() {
        return Err(Error::Dimension { expected: b.dim(), got: at.len() });
    }
    b.contract(&gradient(f, at, method), &gradient(g, at, method))
}

/// Gradients of the constraints c ⊕ c̃ on (x, p), a 2F × 2E matrix.
pub fn constraint_gradients(cm: &ConstraintMap) -> Result<DMatrix<f64>> {
    let gauge = cm.gauge().ok_or(Error::MissingGauge)?;
    let (f, e) = (cm.num_faces(), cm.num_edges());
    Ok(block(cm.theta(), &DMatrix::zeros(f, e), &DMatrix::zeros(f, e), gauge))
}

/// C_{ij} = {Φ_i, Φ_j}_{T*} = [[0, Mᵀ], [−M, 0]] for Φ = c ⊕ c̃.
pub fn dirac_constraint_matrix(cm: &ConstraintMap) -> Result<DMatrix<f64>> {
    let phi = constraint_gradients(cm)?;
    let p = cotangent_matrix(cm.num_edges());
    Ok(&phi * p * phi.transpose())
}

fn cotangent_matrix(n: usize) -> DMatrix<f64> {
    let i = DMatrix::<f64>::identity(n, n);
    block(&DMatrix::zeros(n, n), &i, &(-&i), &DMatrix::zeros(n, n))
}

/// P_D = P − PΦᵀC⁻¹ΦP.
pub fn dirac_bivector(cm: &ConstraintMap) -> Result<DMatrix<f64>> {
    cm.require_admissible()?;
    let phi = constraint_gradients(cm)?;
    let p = cotangent_matrix(cm.num_edges());
    let c = &phi * &p * phi.transpose();
    let cinv = c.try_inverse().ok_or(Error::InadmissibleGauge)?;
    Ok(&p - &p * phi.transpose() * cinv * &phi * &p)
}

pub fn dirac_bracket<F, G>(f: &F, g: &G, cm: &ConstraintMap, at: &[f64], method: GradientMethod) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> f64,
{
    let pd = dirac_bivector(cm)?;
    if at.len() != pd.nrows() {
        return Err(Error::Dimension { expected: pd.nrows(), got: at.len() });
    }
    Ok(contract(&pd, &gradient(f, at, method), &gradient(g, at, method)))
}

/// B = μ(·,·) + ν⟨·,·⟩ is non-degenerate iff μ²Λ + ν² ≠ 0.
pub fn form_nondegenerate(mu: f64, nu: f64, lambda: Lambda) -> bool {
    mu * mu * f64::from(lambda.value()) + nu * nu != 0.0
}

/// (x, y) flattened.
pub fn flatten(z: &GenShearVector) -> Vec<f64> {
    z.x().into_iter().chain(z.y()).collect()
}

pub fn unflatten(like: &GenShearVector, v: &[f64]) -> GenShearVector {
    let n = like.z.len();
    let z = (0..n).map(|a| RNum::new(v[a], v[n + a], like.lambda)).collect();
    GenShearVector { z, lambda: like.lambda, graph: like.graph }
}

/// Im_ℓ Tr ρ(a) as a function of the flattened (x, y).
pub fn im_trace_fn<'a>(g: &'a FatGraph, p: &'a EdgePath, like: &'a GenShearVector) -> impl Fn(&[f64]) -> f64 + 'a {
    move |v: &[f64]| holonomy(g, p, &unflatten(like, v)).map(|h| h.trace().im).unwrap_or(f64::NAN)
}

pub fn re_trace_fn<'a>(g: &'a FatGraph, p: &'a EdgePath, like: &'a GenShearVector) -> impl Fn(&[f64]) -> f64 + 'a {
    move |v: &[f64]| holonomy(g, p, &unflatten(like, v)).map(|h| h.trace().re).unwrap_or(f64::NAN)
}

/// Gradient step used for trace brackets; traces grow exponentially in
/// the coordinates, so plain 1e-6 central differences lose too many digits.
pub const TRACE_GRADIENT: GradientMethod = GradientMethod::Richardson { h: 1e-3 };

/// F with ⟨F, X⟩ = Im_ℓ Tr(ρX) for all X in the Lie algebra.
pub fn trace_dual(rho: &Mat2) -> LieVec {
    let l = rho.lambda();
    let v = std::array::from_fn(|j| {
        let jj = LieVec::basis(j, l);
        let pj = LieVec::p_basis(j, l);
        let im_tr = |x: &LieVec| (*rho * x.to_matrix()).trace().im;
        RNum::new(ETA[j] * im_tr(&pj), ETA[j] * im_tr(&jj), l)
    });
    LieVec::new(v)
}

/// +1 if h2 = ν(h1), −1 if h2 = ν⁻¹(h1).
fn local_sign(g: &FatGraph, h1: usize, h2: usize) -> f64 {
    if g.nu(h1) == h2 {
        1.0
    } else if g.nu_inv(h1) == h2 {
        -1.0
    } else {
        0.0
    }
}

/// A maximal common segment of two closed paths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    /// Position of the first shared edge in a.
    pub start_a: usize,
    /// Position of the last shared edge in a and in b (or its reverse).
    pub end_a: usize,
    pub end_b: usize,
    pub len: usize,
    pub reversed: bool,
    pub epsilon: f64,
}

/// Common segments of a with b and with b reversed, each with its local
/// intersection sign.
pub fn segments(g: &FatGraph, a: &EdgePath, b: &EdgePath) -> Vec<Segment> {
    let mut out = Vec::new();
    let (n, m) = (a.len(), b.len());
    for (bb, reversed) in [(b.clone(), false), (b.reverse(g), true)] {
        for k in 0..n {
            for l in 0..m {
                if a.hs[k] != bb.hs[l] || a.hs[(k + n - 1) % n] == bb.hs[(l + m - 1) % m] {
                    continue;
                }
                let mut r = 0;
                while r < n + m && a.hs[(k + r) % n] == bb.hs[(l + r) % m] {
                    r += 1;
                }
                if r >= n + m {
                    continue;
                }
                let (ks, ls) = ((k + r - 1) % n, (l + r - 1) % m);
                let enter = local_sign(g, g.sigma(a.hs[(k + n - 1) % n]), a.hs[k]);
                let leave = local_sign(g, g.sigma(a.hs[ks]), bb.hs[(l + r) % m]);
                out.push(Segment {
                    start_a: k,
                    end_a: ks,
                    end_b: ls,
                    len: r,
                    reversed,
                    epsilon: 0.5 * (enter + leave),
                });
            }
        }
    }
    out
}

/// The bracket {Im_ℓ Tr ρ(a), Im_ℓ Tr ρ(b)}_Λ evaluated two ways.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoldmanReport {
    /// Numerical gradients contracted with π_Λ.
    pub chain: f64,
    /// Σ_p ε_p ⟨F_p, G_p⟩ over common segments.
    pub segments: f64,
    pub num_segments: usize,
}

impl GoldmanReport {
    pub fn discrepancy(&self) -> f64 {
        (self.chain - self.segments).abs()
    }
}

pub fn goldman_bracket_traces(g: &FatGraph, a: &EdgePath, b: &EdgePath, z: &GenShearVector) -> Result<GoldmanReport> {
    let at = flatten(z);
    let bv = Bivector::new(BivectorKind::Gravitational, g);
    let chain = bracket(&im_trace_fn(g, a, z), &im_trace_fn(g, b, z), &bv, &at, TRACE_GRADIENT)?;

    let frames_a = prefix_frames(g, a, z)?;
    let f = trace_dual(&holonomy(g, a, z)?.matrix);
    let segs = segments(g, a, b);
    let mut total = 0.0;
    for (bb, reversed) in [(b.clone(), false), (b.reverse(g), true)] {
        let frames_b = prefix_frames(g, &bb, z)?;
        let gd = trace_dual(&holonomy(g, &bb, z)?.matrix);
        for s in segs.iter().filter(|s| s.reversed == reversed && s.epsilon != 0.0) {
            let fp = f.ad(&frames_a[s.end_a].sl_inverse());
            let gp = gd.ad(&frames_b[s.end_b].sl_inverse());
            total += s.epsilon * crate::rmatrix::im_form(&fp, &gp)?;
        }
    }
    Ok(GoldmanReport { chain, segments: total, num_segments: segs.len() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TracePart {
    Re,
    Im,
}

/// {Re_ℓ Tr ρ(a), z^β} = ½ Σ_k π^{α_kβ} Tr(ℓJ_kρ) and
/// {Im_ℓ Tr ρ(a), z^β} = ½ Σ_k π^{α_kβ} Tr(J_kρ), for every β.
pub fn trace_flow(g: &FatGraph, p: &EdgePath, z: &GenShearVector, part: TracePart) -> Result<Vec<RNum>> {
    let l = z.lambda;
    let pi = wp_coefficients(g);
    let rho = holonomy(g, p, z)?.matrix;
    let frames = prefix_frames(g, p, z)?;
    let mut out = vec![RNum::zero(l); g.num_edges()];
    for (k, &h) in p.hs.iter().enumerate() {
        let jk = LieVec::basis(1, l).ad(&frames[k]);
        let x = match part {
            TracePart::Re => jk.scale(RNum::ell(l)),
            TracePart::Im => jk,
        };
        let t = (x.to_matrix() * rho).trace();
        let a = g.edge_of(h);
        for (beta, o) in out.iter_mut().enumerate() {
            *o += t * (0.5 * pi[(a, beta)] as f64);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowReport {
    pub closed: Vec<RNum>,
    pub numeric: Vec<RNum>,
}

impl FlowReport {
    pub fn max_diff(&self) -> f64 {
        self.closed.iter().zip(&self.numeric).fold(0.0, |m, (a, b)| m.max((*a - *b).abs_max()))
    }
}

/// Closed-form trace flow next to the numerical bracket of the trace part
/// with each x^β and y^β.
pub fn hamiltonian_flow_check(g: &FatGraph, p: &EdgePath, z: &GenShearVector, part: TracePart) -> Result<FlowReport> {
    let closed = trace_flow(g, p, z, part)?;
    let at = flatten(z);
    let df = match part {
        TracePart::Re => gradient(&re_trace_fn(g, p, z), &at, TRACE_GRADIENT),
        TracePart::Im => gradient(&im_trace_fn(g, p, z), &at, TRACE_GRADIENT),
    };
    let pm = Bivector::new(BivectorKind::Gravitational, g).matrix();
    let n = g.num_edges();
    let numeric = (0..n)
        .map(|b| {
            let col = |j: usize| (0..2 * n).map(|i| df[i] * pm[(i, j)]).sum::<f64>();
            RNum::new(col(b), col(n + b), z.lambda)
        })
        .collect();
    Ok(FlowReport { closed, numeric })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fatgraph::closed_paths;
    use crate::shipped;
    use proptest::prelude::*;

    fn lam(li: usize) -> Lambda {
        Lambda::ALL[li]
    }

    #[test]
    fn wp_shape() {
        for (_, g) in shipped::all() {
            let p = wp_coefficients(&g);
            assert_eq!(&p + p.transpose(), DMatrix::zeros(p.nrows(), p.ncols()));
            assert!(p.iter().all(|v| v.abs() <= 2));
            assert!(casimir_check(&g));
            assert!(pushforward_check(&g));
            assert!(symplectic_rank(&g).is_symplectic());
        }
        let t = wp_coefficients(&shipped::torus());
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(t[(a, b)].abs(), if a == b { 0 } else { 2 });
            }
        }
        assert!(wp_coefficients(&shipped::sphere3()).iter().all(|&v| v == 0));
    }

    #[test]
    fn wp_matches_frames() {
        // Oracle: the frame formula summed over edges.
        for (_, g) in shipped::all() {
            let mut p = DMatrix::<i64>::zeros(g.num_edges(), g.num_edges());
            for a in 0..g.num_edges() {
                let f = g.frame(a).unwrap();
                p[(a, f.beta)] += 1;
                p[(a, f.gamma)] -= 1;
                p[(a, f.delta)] += 1;
                p[(a, f.epsilon)] -= 1;
            }
            assert_eq!(p, wp_coefficients(&g));
        }
    }

    #[test]
    fn coordinate_brackets() {
        let g = shipped::genus2();
        let n = g.num_edges();
        let pi = wp_coefficients(&g);
        let bv = Bivector::new(BivectorKind::Gravitational, &g);
        let at: Vec<f64> = (0..2 * n).map(|i| (i as f64 * 0.37).sin()).collect();
        for a in 0..n {
            for b in 0..n {
                let xa = |v: &[f64]| v[a];
                let yb = |v: &[f64]| v[n + b];
                let r = bracket(&xa, &yb, &bv, &at, GradientMethod::default()).unwrap();
                assert!((r - 0.5 * pi[(a, b)] as f64).abs() < 1e-9);
                assert!(bracket(&xa, &xa, &bv, &at, GradientMethod::default()).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constraints_are_casimir_numerically() {
        let g = shipped::sphere4();
        let n = g.num_edges();
        let th = theta_int(&g);
        let bv = Bivector::new(BivectorKind::WeilPetersson, &g);
        let at: Vec<f64> = (0..n).map(|i| 0.3 * i as f64 - 0.7).collect();
        let f = |v: &[f64]| (v[0] * v[3]).sin() + v[5].exp();
        for i in 0..th.nrows() {
            let c = |v: &[f64]| (0..n).map(|a| th[(i, a)] as f64 * v[a]).sum::<f64>();
            assert!(bracket(&f, &c, &bv, &at, GradientMethod::default()).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn pi_sharp_basics() {
        let g = shipped::genus2();
        let cm = ConstraintMap::new(&g);
        let x = cm.sample_shear(1).unwrap().x;
        let zero = CotangentVector::new(&g, x.clone(), vec![0.0; 9]).unwrap();
        assert!(pi_sharp(&g, &zero, Lambda::Plus).unwrap().y().iter().all(|&v| v == 0.0));
        for row in g.theta() {
            let p: Vec<f64> = row.iter().map(|&v| v as f64).collect();
            let cv = CotangentVector::new(&g, x.clone(), p).unwrap();
            assert!(pi_sharp(&g, &cv, Lambda::Zero).unwrap().y().iter().all(|&v| v == 0.0));
        }
        let other = CotangentVector::new(&shipped::torus(), vec![0.0; 3], vec![0.0; 3]).unwrap();
        assert!(matches!(pi_sharp(&g, &other, Lambda::Plus), Err(Error::GraphMismatch)));
    }

    #[test]
    fn dirac_structure() {
        for (_, g) in shipped::all() {
            let cm = ConstraintMap::new(&g);
            let m = cm.dirac_matrix().unwrap();
            let c = dirac_constraint_matrix(&cm).unwrap();
            let f = cm.num_faces();
            assert_eq!(c, block(&DMatrix::zeros(f, f), &m.transpose(), &(-&m), &DMatrix::zeros(f, f)));
            let pd = dirac_bivector(&cm).unwrap();
            let phi = constraint_gradients(&cm).unwrap();
            assert!((&phi * &pd).amax() < 1e-12);
            assert!((&pd + pd.transpose()).amax() < 1e-12);
        }
        let g = shipped::torus();
        let bad = ConstraintMap::with_gauge(&g, DMatrix::zeros(1, 3)).unwrap();
        assert!(matches!(dirac_bivector(&bad), Err(Error::InadmissibleGauge)));
        assert!(matches!(dirac_bivector(&ConstraintMap::without_gauge(&g)), Err(Error::MissingGauge)));
    }

    #[test]
    fn dirac_bracket_on_commuting_pair() {
        let g = shipped::genus2();
        let cm = ConstraintMap::new(&g);
        let n = g.num_edges();
        let kp = cm.kernel_projector().unwrap();
        let gp = cm.gauge_projector().unwrap();
        let u: Vec<f64> = (0..n).map(|i| (0..n).map(|j| gp[(i, j)] * (j as f64 + 1.0).cos()).sum()).collect();
        let v: Vec<f64> = (0..n).map(|i| (0..n).map(|j| kp[(i, j)] * (2.0 * j as f64).sin()).sum()).collect();
        let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| kp[(i, j)] * (j as f64 - 3.0)).sum()).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let f = |s: &[f64]| dot(&u, &s[..n]).sin() + dot(&v, &s[n..]).powi(2);
        let h = |s: &[f64]| dot(&u, &s[..n]) * dot(&w, &s[n..]);
        let at: Vec<f64> = (0..2 * n).map(|i| 0.1 * i as f64).collect();
        let plain = bracket(&f, &h, &Bivector::new(BivectorKind::Cotangent, &g), &at, TRACE_GRADIENT).unwrap();
        let dirac = dirac_bracket(&f, &h, &cm, &at, TRACE_GRADIENT).unwrap();
        assert!((plain - dirac).abs() < 1e-10, "{plain} {dirac}");
        assert!(plain.abs() > 1e-3);
        let th = cm.theta().clone();
        for i in 0..cm.num_faces() {
            let c = |s: &[f64]| (0..n).map(|a| th[(i, a)] * s[a]).sum::<f64>();
            let ct = |s: &[f64]| (0..n).map(|a| th[(i, a)] * s[n + a]).sum::<f64>();
            assert!(dirac_bracket(&c, &f, &cm, &at, TRACE_GRADIENT).unwrap().abs() < 1e-10);
            assert!(dirac_bracket(&ct, &h, &cm, &at, TRACE_GRADIENT).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn nondegeneracy_predicate() {
        assert!(!form_nondegenerate(1.0, 1.0, Lambda::Minus));
        assert!(form_nondegenerate(1.0, 0.0, Lambda::Plus));
        assert!(!form_nondegenerate(1.0, 0.0, Lambda::Zero));
        assert!(form_nondegenerate(0.0, 1.0, Lambda::Zero));
    }

    #[test]
    fn trace_dual_pairs_with_basis() {
        for l in Lambda::ALL {
            let rho = Mat2::new(
                RNum::new(1.3, 0.2, l),
                RNum::new(0.4, -0.7, l),
                RNum::new(-0.5, 0.3, l),
                RNum::new(0.9, 0.1, l),
            )
            .unwrap();
            let f = trace_dual(&rho);
            for j in 0..3 {
                for x in [LieVec::basis(j, l), LieVec::p_basis(j, l)] {
                    let lhs = crate::rmatrix::im_form(&f, &x).unwrap();
                    assert!((lhs - (rho * x.to_matrix()).trace().im).abs() < 1e-14);
                }
            }
        }
    }

    fn torus_generators(g: &FatGraph) -> (EdgePath, EdgePath) {
        (EdgePath::parse(g, "a,-b").unwrap(), EdgePath::parse(g, "b,-c").unwrap())
    }

    #[test]
    fn torus_generators_intersect_once() {
        let g = shipped::torus();
        let (a, b) = torus_generators(&g);
        let total: f64 = segments(&g, &a, &b).iter().map(|s| s.epsilon).sum();
        assert_eq!(total.abs(), 1.0);
    }

    #[test]
    fn disjoint_curves_commute() {
        let g = shipped::genus2();
        let z = ConstraintMap::new(&g).sample_gen_shear(3, Lambda::Plus).unwrap();
        let paths = closed_paths(&g, 5, None);
        let verts = |p: &EdgePath| p.hs.iter().map(|&h| g.vertex_of(h)).collect::<Vec<_>>();
        let mut found = 0;
        'outer: for a in &paths {
            for b in &paths {
                if verts(a).iter().any(|v| verts(b).contains(v)) {
                    continue;
                }
                let r = goldman_bracket_traces(&g, a, b, &z).unwrap();
                assert_eq!(r.segments, 0.0);
                assert!(r.chain.abs() < 1e-8);
                found += 1;
                if found > 5 {
                    break 'outer;
                }
            }
        }
        assert!(found > 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn goldman_two_ways(seed in any::<u64>(), li in 0usize..3) {
            let g = shipped::torus();
            let z = ConstraintMap::new(&g).sample_gen_shear(seed, lam(li)).unwrap();
            let (a, b) = torus_generators(&g);
            let r = goldman_bracket_traces(&g, &a, &b, &z).unwrap();
            prop_assert!(r.discrepancy() < 1e-8, "{r:?}");
            let s = goldman_bracket_traces(&g, &a, &a, &z).unwrap();
            prop_assert!(s.chain.abs() < 1e-9 && s.segments.abs() < 1e-12);
        }

        #[test]
        fn goldman_two_ways_longer_paths(seed in any::<u64>(), li in 0usize..3, i in 0usize..1000, j in 0usize..1000) {
            let g = shipped::sphere4();
            let z = ConstraintMap::new(&g).sample_gen_shear(seed, lam(li)).unwrap();
            let paths = closed_paths(&g, 5, None);
            let (a, b) = (&paths[i % paths.len()], &paths[j % paths.len()]);
            let r = goldman_bracket_traces(&g, a, b, &z).unwrap();
            prop_assert!(r.discrepancy() < 1e-8 * r.chain.abs().max(1.0), "{r:?}");
        }

        #[test]
        fn trace_flows(seed in any::<u64>(), li in 0usize..3) {
            let g = shipped::torus();
            let z = ConstraintMap::new(&g).sample_gen_shear(seed, lam(li)).unwrap();
            let (a, _) = torus_generators(&g);
            for part in [TracePart::Re, TracePart::Im] {
                let r = hamiltonian_flow_check(&g, &a, &z, part).unwrap();
                prop_assert!(r.max_diff() < 1e-8, "{r:?}");
            }
        }

        #[test]
        fn leibniz(seed in any::<u64>()) {
            let g = shipped::sphere4();
            let bv = Bivector::new(BivectorKind::Gravitational, &g);
            let z = ConstraintMap::new(&g).sample_gen_shear(seed, Lambda::Minus).unwrap();
            let at = flatten(&z);
            let f = |v: &[f64]| v[0] * v[7] + v[3].sin();
            let gg = |v: &[f64]| v[1].cos() + v[8];
            let h = |v: &[f64]| v[2] * v[9] - v[6];
            let gh = |v: &[f64]| gg(v) * h(v);
            let m = GradientMethod::default();
            let lhs = bracket(&f, &gh, &bv, &at, m).unwrap();
            let rhs = bracket(&f, &gg, &bv, &at, m).unwrap() * h(&at) + gg(&at) * bracket(&f, &h, &bv, &at, m).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-8);
            let fg = bracket(&f, &gg, &bv, &at, m).unwrap();
            let gf = bracket(&gg, &f, &bv, &at, m).unwrap();
            prop_assert!((fg + gf).abs() < 1e-12);
        }
    }
}
