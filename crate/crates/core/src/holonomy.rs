//! Holonomies of closed edge paths, their prefix frames, and the earthquake
//! and grafting cocycles.

use nalgebra::Matrix2;

use crate::coords::{ConstraintMap, EdgeVector, GenShearVector, LamVector, ShearVector};
use crate::fatgraph::{EdgePath, FatGraph, Turn};
use crate::rmatrix::{gen_e, gen_l, gen_r, geodesic_length, LieVec};
use crate::{Error, Lambda, Mat2, RNum, Result};

/// ρ(a) for a closed path a, determined up to sign and conjugation.
#[derive(Clone, Debug, PartialEq)]
pub struct Holonomy {
    pub matrix: Mat2,
    pub path: EdgePath,
    pub lambda: Lambda,
}

impl Holonomy {
    pub fn trace(&self) -> RNum {
        self.matrix.trace()
    }

    pub fn length(&self) -> Result<f64> {
        geodesic_length(self.trace())
    }
}

pub fn turn_matrix(t: Turn, lambda: Lambda) -> Mat2 {
    match t {
        Turn::L => gen_l(lambda),
        Turn::R => gen_r(lambda),
    }
}

fn turn_matrix_real(t: Turn) -> Matrix2<f64> {
    match t {
        Turn::L => Matrix2::new(1.0, 1.0, 0.0, 1.0),
        Turn::R => Matrix2::new(1.0, 0.0, 1.0, 1.0),
    }
}

fn check_closed(g: &FatGraph, p: &EdgePath) -> Result<Vec<Turn>> {
    if !p.closed || p.is_empty() {
        return Err(Error::OpenPath);
    }
    g.turns(p)
}

fn check_graph<V: EdgeVector>(g: &FatGraph, v: &V) -> Result<()> {
    if v.fingerprint() == g.fingerprint() {
        Ok(())
    } else {
        Err(Error::GraphMismatch)
    }
}

/// The coordinate of the k-th edge of the path, for every k.
pub fn values_along(g: &FatGraph, p: &EdgePath, z: &[RNum]) -> Vec<RNum> {
    p.hs.iter().map(|&h| z[g.edge_of(h)]).collect()
}

/// ρ = P_n E(z_n) ⋯ P_1 E(z_1) with one value per path position.
pub fn holonomy_positions(g: &FatGraph, p: &EdgePath, zs: &[RNum], lambda: Lambda) -> Result<Mat2> {
    let turns = check_closed(g, p)?;
    if zs.len() != p.len() {
        return Err(Error::Dimension { expected: p.len(), got: zs.len() });
    }
    let mut m = Mat2::identity(lambda);
    for (t, &z) in turns.iter().zip(zs) {
        m = turn_matrix(*t, lambda) * gen_e(z) * m;
    }
    Ok(m)
}

pub fn holonomy(g: &FatGraph, p: &EdgePath, z: &GenShearVector) -> Result<Holonomy> {
    check_graph(g, z)?;
    let matrix = holonomy_positions(g, p, &values_along(g, p, &z.z), z.lambda)?;
    Ok(Holonomy { matrix, path: p.clone(), lambda: z.lambda })
}

pub fn holonomy_shear(g: &FatGraph, p: &EdgePath, x: &ShearVector, lambda: Lambda) -> Result<Holonomy> {
    holonomy(g, p, &x.lift(lambda))
}

/// ρ computed with plain real 2×2 matrices.
pub fn holonomy_real(g: &FatGraph, p: &EdgePath, x: &ShearVector) -> Result<Matrix2<f64>> {
    check_graph(g, x)?;
    let turns = check_closed(g, p)?;
    let mut m = Matrix2::identity();
    for (t, &h) in turns.iter().zip(&p.hs) {
        let s = x.x[g.edge_of(h)];
        let e = Matrix2::new((s / 2.0).exp(), 0.0, 0.0, (-s / 2.0).exp());
        m = turn_matrix_real(*t) * e * m;
    }
    Ok(m)
}

/// A_k = P_n E(z_n) ⋯ E(z_{k+1}) P_k for k = 1..n (index k−1).
pub fn prefix_frames(g: &FatGraph, p: &EdgePath, z: &GenShearVector) -> Result<Vec<Mat2>> {
    check_graph(g, z)?;
    frames_positions(g, p, &values_along(g, p, &z.z), z.lambda)
}

pub fn frames_positions(g: &FatGraph, p: &EdgePath, zs: &[RNum], lambda: Lambda) -> Result<Vec<Mat2>> {
    let turns = check_closed(g, p)?;
    let n = p.len();
    let mut a = vec![Mat2::identity(lambda); n];
    a[n - 1] = turn_matrix(turns[n - 1], lambda);
    for k in (0..n - 1).rev() {
        a[k] = a[k + 1] * gen_e(zs[k + 1]) * turn_matrix(turns[k], lambda);
    }
    Ok(a)
}

/// J_k = Ad_{A_k} J₁.
pub fn lievec_frames(g: &FatGraph, p: &EdgePath, z: &GenShearVector) -> Result<Vec<LieVec>> {
    let j1 = LieVec::basis(1, z.lambda);
    Ok(prefix_frames(g, p, z)?.iter().map(|a| j1.ad(a)).collect())
}

fn check_constraint<V: EdgeVector>(strict: Option<&ConstraintMap>, v: &V) -> Result<()> {
    if let Some(cm) = strict {
        let r = cm.residual(v)?.max_abs();
        if r > 1e-9 {
            return Err(Error::Degenerate(format!("constraint residual {r:.3e}")));
        }
    }
    Ok(())
}

fn cocycle(frames: &[Mat2], deltas: &[RNum], lambda: Lambda) -> Mat2 {
    let mut z = Mat2::identity(lambda);
    for (a, &d) in frames.iter().zip(deltas) {
        z = a.ad(&gen_e(d)) * z;
    }
    z
}

/// Z(a) = Ad_{A_n(x)} E(x′_n − x_n) ⋯ Ad_{A_1(x)} E(x′_1 − x_1), so that
/// Z(a)ρ_x(a) = ρ_{x′}(a). With `strict` both vectors must satisfy the
/// constraints.
pub fn earthquake_cocycle(
    g: &FatGraph,
    p: &EdgePath,
    x: &ShearVector,
    x2: &ShearVector,
    strict: Option<&ConstraintMap>,
) -> Result<Mat2> {
    check_graph(g, x)?;
    check_graph(g, x2)?;
    check_constraint(strict, x)?;
    check_constraint(strict, x2)?;
    let l = Lambda::Plus;
    let frames = prefix_frames(g, p, &x.lift(l))?;
    let deltas: Vec<RNum> = p.hs.iter().map(|&h| RNum::real(x2.x[g.edge_of(h)] - x.x[g.edge_of(h)], l)).collect();
    Ok(cocycle(&frames, &deltas, l))
}

/// Z(a) = Ad_{A_n(x)} E(w_n) ⋯ Ad_{A_1(x)} E(w_1), so that
/// Z(a)ρ_x(a) = ρ_{x+w}(a).
pub fn grafting_cocycle(
    g: &FatGraph,
    p: &EdgePath,
    x: &ShearVector,
    w: &LamVector,
    strict: Option<&ConstraintMap>,
) -> Result<Mat2> {
    check_graph(g, x)?;
    check_graph(g, w)?;
    check_constraint(strict, x)?;
    check_constraint(strict, w)?;
    let frames = prefix_frames(g, p, &x.lift(w.lambda))?;
    Ok(cocycle(&frames, &values_along(g, p, &w.w), w.lambda))
}
