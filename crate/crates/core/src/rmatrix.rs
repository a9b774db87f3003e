//! 2×2 matrices over R_Λ: the unified matrix model of the groups G_Λ and
//! their Lie algebras.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::ralgebra::{Lambda, RNum};
use crate::{Error, Result};

/// Row-major [[a, b], [c, d]].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a: RNum,
    pub b: RNum,
    pub c: RNum,
    pub d: RNum,
}

impl Mat2 {
    pub fn new(a: RNum, b: RNum, c: RNum, d: RNum) -> Result<Mat2> {
        let l = a.lambda;
        for x in [b, c, d] {
            if x.lambda != l {
                return Err(Error::LambdaMismatch(l, x.lambda));
            }
        }
        Ok(Mat2 { a, b, c, d })
    }

    pub fn real(m: [[f64; 2]; 2], lambda: Lambda) -> Mat2 {
        let r = |x| RNum::real(x, lambda);
        Mat2 { a: r(m[0][0]), b: r(m[0][1]), c: r(m[1][0]), d: r(m[1][1]) }
    }

    pub fn identity(lambda: Lambda) -> Mat2 {
        Mat2::real([[1.0, 0.0], [0.0, 1.0]], lambda)
    }

    pub fn zero(lambda: Lambda) -> Mat2 {
        Mat2::real([[0.0, 0.0], [0.0, 0.0]], lambda)
    }

    pub fn lambda(&self) -> Lambda {
        self.a.lambda
    }

    pub fn entries(&self) -> [RNum; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> RNum {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> RNum {
        self.a + self.d
    }

    pub fn scale(&self, s: RNum) -> Mat2 {
        Mat2 { a: self.a * s, b: self.b * s, c: self.c * s, d: self.d * s }
    }

    /// Inverse of a unit-determinant matrix (the adjugate).
    pub fn sl_inverse(&self) -> Mat2 {
        Mat2 { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn inverse(&self) -> Result<Mat2> {
        let k = self.det().inv()?;
        Ok(self.sl_inverse().scale(k))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().fold(0.0, |m, x| m.max(x.abs_max()))
    }

    pub fn dist(&self, other: &Mat2) -> f64 {
        (*self - *other).max_abs()
    }

    /// Distance in PSL: min(‖M − N‖, ‖M + N‖).
    pub fn projective_dist(&self, other: &Mat2) -> f64 {
        self.dist(other).min((*self + *other).max_abs())
    }

    pub fn approx_eq_projective(&self, other: &Mat2, tol: f64) -> bool {
        self.projective_dist(other) <= tol
    }

    /// Projective distance relative to max(1, ‖M‖, ‖N‖).
    pub fn rel_projective_dist(&self, other: &Mat2) -> f64 {
        self.projective_dist(other) / self.max_abs().max(other.max_abs()).max(1.0)
    }

    /// Ad_A X = A X A⁻¹ for unit-determinant A.
    pub fn ad(&self, x: &Mat2) -> Mat2 {
        *self * *x * self.sl_inverse()
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2 { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c, d: self.d + o.d }
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2 { a: self.a - o.a, b: self.b - o.b, c: self.c - o.c, d: self.d - o.d }
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2 { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
    }
}

/// E(z) = diag(e^{z/2}, e^{−z/2}).
pub fn gen_e(z: RNum) -> Mat2 {
    let l = z.lambda;
    let zero = RNum::zero(l);
    Mat2 { a: (z * 0.5).exp(), b: zero, c: zero, d: (z * -0.5).exp() }
}

pub fn gen_l(lambda: Lambda) -> Mat2 {
    Mat2::real([[1.0, 1.0], [0.0, 1.0]], lambda)
}

pub fn gen_r(lambda: Lambda) -> Mat2 {
    Mat2::real([[1.0, 0.0], [1.0, 1.0]], lambda)
}

/// η = diag(−1, 1, 1).
pub const ETA: [f64; 3] = [-1.0, 1.0, 1.0];

/// Element v⁰J₀ + v¹J₁ + v²J₂ of the Lie algebra, with
/// J₀ = ½[[0,−1],[1,0]], J₁ = ½[[1,0],[0,−1]], J₂ = ½[[0,1],[1,0]].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LieVec {
    pub v: [RNum; 3],
}

impl LieVec {
    pub fn new(v: [RNum; 3]) -> LieVec {
        LieVec { v }
    }

    pub fn basis(i: usize, lambda: Lambda) -> LieVec {
        let mut v = [RNum::zero(lambda); 3];
        v[i] = RNum::one(lambda);
        LieVec { v }
    }

    /// P_i = ℓJ_i.
    pub fn p_basis(i: usize, lambda: Lambda) -> LieVec {
        LieVec::basis(i, lambda).scale(RNum::ell(lambda))
    }

    pub fn lambda(&self) -> Lambda {
        self.v[0].lambda
    }

    pub fn scale(&self, s: RNum) -> LieVec {
        LieVec { v: self.v.map(|x| x * s) }
    }

    pub fn to_matrix(&self) -> Mat2 {
        let [v0, v1, v2] = self.v;
        Mat2 { a: v1 * 0.5, b: (v2 - v0) * 0.5, c: (v2 + v0) * 0.5, d: v1 * -0.5 }
    }

    /// Coordinates of the traceless part of `m`.
    pub fn from_matrix(m: &Mat2) -> LieVec {
        LieVec { v: [m.c - m.b, m.a - m.d, m.b + m.c] }
    }

    pub fn ad(&self, a: &Mat2) -> LieVec {
        LieVec::from_matrix(&a.ad(&self.to_matrix()))
    }

    pub fn max_abs(&self) -> f64 {
        self.v.iter().fold(0.0, |m, x| m.max(x.abs_max()))
    }
}

impl Add for LieVec {
    type Output = LieVec;
    fn add(self, o: LieVec) -> LieVec {
        LieVec { v: [self.v[0] + o.v[0], self.v[1] + o.v[1], self.v[2] + o.v[2]] }
    }
}

impl Sub for LieVec {
    type Output = LieVec;
    fn sub(self, o: LieVec) -> LieVec {
        LieVec { v: [self.v[0] - o.v[0], self.v[1] - o.v[1], self.v[2] - o.v[2]] }
    }
}

/// κ(X, Y) = Tr(XY).
pub fn kappa(x: &LieVec, y: &LieVec) -> Result<RNum> {
    if x.lambda() != y.lambda() {
        return Err(Error::LambdaMismatch(x.lambda(), y.lambda()));
    }
    Ok((x.to_matrix() * y.to_matrix()).trace())
}

/// (X, Y) = 2 Re_ℓ κ(X, Y).
pub fn re_form(x: &LieVec, y: &LieVec) -> Result<f64> {
    Ok(2.0 * kappa(x, y)?.re)
}

/// ⟨X, Y⟩ = 2 Im_ℓ κ(X, Y).
pub fn im_form(x: &LieVec, y: &LieVec) -> Result<f64> {
    Ok(2.0 * kappa(x, y)?.im)
}

/// A unit-determinant matrix written in the group structure specific to Λ.
#[derive(Clone, Debug, PartialEq)]
pub enum Decomposed {
    /// Λ = −1: images under the projectors ½(1 ± ℓ).
    Split(Matrix2<f64>, Matrix2<f64>),
    /// Λ = 0: M = (1 + ℓT)·R with R real and T a translation.
    Dual(Matrix2<f64>, LieVec),
    /// Λ = 1.
    Complex(Matrix2<Complex64>),
}

impl Decomposed {
    /// Product in SL₂ℝ × SL₂ℝ, SL₂ℝ ⋉ sl₂ℝ or SL₂ℂ respectively.
    pub fn compose(&self, other: &Decomposed) -> Result<Decomposed> {
        match (self, other) {
            (Decomposed::Split(a, b), Decomposed::Split(c, d)) => Ok(Decomposed::Split(a * c, b * d)),
            (Decomposed::Dual(r1, t1), Decomposed::Dual(r2, t2)) => {
                let r1m = real_to_mat2(r1);
                Ok(Decomposed::Dual(r1 * r2, *t1 + t2.ad(&r1m)))
            }
            (Decomposed::Complex(a), Decomposed::Complex(b)) => Ok(Decomposed::Complex(a * b)),
            _ => Err(Error::Format("decomposition kinds differ".into())),
        }
    }

    pub fn dist(&self, other: &Decomposed) -> f64 {
        match (self, other) {
            (Decomposed::Split(a, b), Decomposed::Split(c, d)) => (a - c).amax().max((b - d).amax()),
            (Decomposed::Dual(r1, t1), Decomposed::Dual(r2, t2)) => (r1 - r2).amax().max((*t1 - *t2).max_abs()),
            (Decomposed::Complex(a), Decomposed::Complex(b)) => (a - b).iter().fold(0.0, |m, z| m.max(z.norm())),
            _ => f64::INFINITY,
        }
    }
}

fn real_to_mat2(r: &Matrix2<f64>) -> Mat2 {
    Mat2::real([[r[(0, 0)], r[(0, 1)]], [r[(1, 0)], r[(1, 1)]]], Lambda::Zero)
}

pub fn decompose(m: &Mat2) -> Result<Decomposed> {
    let det = m.det();
    let tol = 1e-9 * m.max_abs().powi(2).max(1.0);
    if (det.re - 1.0).abs() > tol || det.im.abs() > tol {
        return Err(Error::NonUnitDeterminant(det.to_string()));
    }
    let e = m.entries();
    match m.lambda() {
        Lambda::Minus => Ok(Decomposed::Split(
            Matrix2::from_fn(|i, j| e[2 * i + j].re + e[2 * i + j].im),
            Matrix2::from_fn(|i, j| e[2 * i + j].re - e[2 * i + j].im),
        )),
        Lambda::Zero => {
            let re = Matrix2::from_fn(|i, j| e[2 * i + j].re);
            let im = Mat2::real([[e[0].im, e[1].im], [e[2].im, e[3].im]], Lambda::Zero);
            let r = real_to_mat2(&re);
            Ok(Decomposed::Dual(re, LieVec::from_matrix(&(im * r.sl_inverse()))))
        }
        Lambda::Plus => Ok(Decomposed::Complex(Matrix2::from_fn(|i, j| e[2 * i + j].to_complex()))),
    }
}

/// l = 2·arccosh(|Re_ℓ tr| / 2).
pub fn geodesic_length(trace: RNum) -> Result<f64> {
    let t = trace.re.abs();
    if t.is_nan() || t < 2.0 - 1e-12 {
        return Err(Error::NonHyperbolic(trace.re));
    }
    Ok(2.0 * (t / 2.0).max(1.0).acosh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lambda() -> impl Strategy<Value = Lambda> {
        prop_oneof![Just(Lambda::Minus), Just(Lambda::Zero), Just(Lambda::Plus)]
    }

    fn rnum(l: Lambda) -> impl Strategy<Value = RNum> {
        (-1.5..1.5f64, -1.0..1.0f64).prop_map(move |(a, b)| RNum::new(a, b, l))
    }

    // Unit-determinant matrices as words E(z₁) L E(z₂) R E(z₃).
    fn group_elt(l: Lambda) -> impl Strategy<Value = Mat2> {
        (rnum(l), rnum(l), rnum(l)).prop_map(move |(a, b, c)| gen_e(a) * gen_l(l) * gen_e(b) * gen_r(l) * gen_e(c))
    }

    fn lievec(l: Lambda) -> impl Strategy<Value = LieVec> {
        (rnum(l), rnum(l), rnum(l)).prop_map(|(a, b, c)| LieVec::new([a, b, c]))
    }

    #[test]
    fn generator_examples() {
        for l in Lambda::ALL {
            assert_eq!(gen_e(RNum::zero(l)), Mat2::identity(l));
            let lr = gen_l(l) * gen_r(l);
            assert_eq!(lr, Mat2::real([[2.0, 1.0], [1.0, 1.0]], l));
            assert_eq!(lr.trace(), RNum::real(3.0, l));
            assert_eq!(gen_l(l).trace(), RNum::real(2.0, l));
            assert_eq!(gen_r(l).det(), RNum::one(l));
            let x = 0.7;
            let e = gen_e(RNum::real(x, l));
            assert!(e.dist(&Mat2::real([[(x / 2.0).exp(), 0.0], [0.0, (-x / 2.0).exp()]], l)) < 1e-15);
        }
        // Dual numbers: e^{ℓt} = 1 + ℓt.
        let y = 0.9;
        let e = gen_e(RNum::new(0.0, y, Lambda::Zero));
        assert_eq!(e.a, RNum::new(1.0, y / 2.0, Lambda::Zero));
        assert_eq!(e.d, RNum::new(1.0, -y / 2.0, Lambda::Zero));
    }

    #[test]
    fn form_tables() {
        for l in Lambda::ALL {
            #[allow(clippy::needless_range_loop)]
            for i in 0..3 {
                for j in 0..3 {
                    let ji = LieVec::basis(i, l);
                    let jj = LieVec::basis(j, l);
                    let eta = if i == j { ETA[i] } else { 0.0 };
                    assert_eq!(kappa(&ji, &jj).unwrap(), RNum::real(0.5 * eta, l));
                    assert_eq!(im_form(&ji, &LieVec::p_basis(j, l)).unwrap(), eta);
                    assert_eq!(im_form(&ji, &jj).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn decompose_examples() {
        let (mu, nu) = (0.8, -0.3);
        let e = gen_e(RNum::new(mu, nu, Lambda::Minus));
        let Decomposed::Split(p, m) = decompose(&e).unwrap() else { panic!() };
        let diag = |t: f64| Matrix2::new((t / 2.0).exp(), 0.0, 0.0, (-t / 2.0).exp());
        assert!((p - diag(mu + nu)).amax() < 1e-14);
        assert!((m - diag(mu - nu)).amax() < 1e-14);

        let e = gen_e(RNum::new(mu, nu, Lambda::Zero));
        let Decomposed::Dual(r, t) = decompose(&e).unwrap() else { panic!() };
        assert!((r - diag(mu)).amax() < 1e-14);
        assert!((t - LieVec::basis(1, Lambda::Zero).scale(RNum::real(nu, Lambda::Zero))).max_abs() < 1e-14);

        for l in Lambda::ALL {
            let id = decompose(&Mat2::identity(l)).unwrap();
            match id {
                Decomposed::Split(a, b) => assert!(a == Matrix2::identity() && b == Matrix2::identity()),
                Decomposed::Dual(r, t) => assert!(r == Matrix2::identity() && t.max_abs() == 0.0),
                Decomposed::Complex(c) => assert!(c == Matrix2::identity()),
            }
        }
        let bad = Mat2::real([[2.0, 0.0], [0.0, 1.0]], Lambda::Plus);
        assert!(matches!(decompose(&bad), Err(Error::NonUnitDeterminant(_))));
    }

    #[test]
    fn geodesic_length_examples() {
        assert_eq!(geodesic_length(RNum::real(2.0, Lambda::Zero)).unwrap(), 0.0);
        let oracle = 2.0 * (1.5 + 1.25f64.sqrt()).ln();
        let got = geodesic_length(RNum::real(-3.0, Lambda::Plus)).unwrap();
        assert!((got - oracle).abs() < 1e-15);
        assert!((got - 1.9248473002384139).abs() < 1e-14);
        assert!(matches!(geodesic_length(RNum::real(1.9, Lambda::Minus)), Err(Error::NonHyperbolic(_))));
    }

    #[test]
    fn lambda_mismatch_rejected() {
        let a = RNum::one(Lambda::Zero);
        let b = RNum::one(Lambda::Plus);
        assert!(Mat2::new(a, a, a, b).is_err());
        assert!(kappa(&LieVec::basis(0, Lambda::Zero), &LieVec::basis(0, Lambda::Plus)).is_err());
    }

    proptest! {
        #[test]
        fn gen_e_unit_det(z in lambda().prop_flat_map(rnum)) {
            let d = gen_e(z).det();
            prop_assert!((d.re - 1.0).abs() < 1e-12 && d.im.abs() < 1e-12);
        }

        #[test]
        fn kappa_ad_invariant((a, x, y) in lambda().prop_flat_map(|l| (group_elt(l), lievec(l), lievec(l)))) {
            let k0 = kappa(&x, &y).unwrap();
            let k1 = kappa(&x.ad(&a), &y.ad(&a)).unwrap();
            prop_assert!((k0 - k1).abs_max() < 1e-10);
        }

        #[test]
        fn kappa_symmetric_bilinear((x, y, s) in lambda().prop_flat_map(|l| (lievec(l), lievec(l), rnum(l)))) {
            prop_assert!((kappa(&x, &y).unwrap() - kappa(&y, &x).unwrap()).abs_max() < 1e-14);
            let lhs = kappa(&x.scale(s), &y).unwrap();
            prop_assert!((lhs - kappa(&x, &y).unwrap() * s).abs_max() < 1e-13);
        }

        #[test]
        fn lievec_round_trip(x in lambda().prop_flat_map(lievec)) {
            let m = x.to_matrix();
            prop_assert!(m.trace().abs_max() == 0.0);
            prop_assert!(LieVec::from_matrix(&m).to_matrix().dist(&m) < 1e-15);
        }

        #[test]
        fn decompose_homomorphism((m, n) in lambda().prop_flat_map(|l| (group_elt(l), group_elt(l)))) {
            let lhs = decompose(&(m * n)).unwrap();
            let rhs = decompose(&m).unwrap().compose(&decompose(&n).unwrap()).unwrap();
            prop_assert!(lhs.dist(&rhs) < 1e-10);
        }

        #[test]
        fn inverse_is_inverse(m in lambda().prop_flat_map(group_elt)) {
            let l = m.lambda();
            prop_assert!((m * m.inverse().unwrap()).dist(&Mat2::identity(l)) < 1e-10);
        }
    }
}
