//! The two-dimensional commutative algebras R_Λ = {x + ℓy : ℓ² = -Λ}.
//!
//! Λ = -1 gives the split-complex numbers, Λ = 0 the dual numbers and Λ = 1
//! the complex numbers. Real-analytic functions extend to R_Λ; `exp`, `log`
//! and the dilogarithm are supported.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const PI2_6: f64 = PI * PI / 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Lambda {
    /// Λ = -1, split-complex numbers.
    Minus,
    /// Λ = 0, dual numbers.
    Zero,
    /// Λ = 1, complex numbers.
    Plus,
}

impl Lambda {
    pub const ALL: [Lambda; 3] = [Lambda::Minus, Lambda::Zero, Lambda::Plus];

    pub fn value(self) -> i8 {
        match self {
            Lambda::Minus => -1,
            Lambda::Zero => 0,
            Lambda::Plus => 1,
        }
    }

    pub fn from_value(v: i64) -> Result<Self> {
        match v {
            -1 => Ok(Lambda::Minus),
            0 => Ok(Lambda::Zero),
            1 => Ok(Lambda::Plus),
            _ => Err(Error::Format(format!("lambda must be -1, 0 or 1, got {v}"))),
        }
    }

    fn f(self) -> f64 {
        f64::from(self.value())
    }
}

impl TryFrom<i8> for Lambda {
    type Error = Error;
    fn try_from(v: i8) -> Result<Self> {
        Lambda::from_value(v.into())
    }
}

impl From<Lambda> for i8 {
    fn from(l: Lambda) -> i8 {
        l.value()
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Real-analytic functions with a supported extension to R_Λ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Li2,
}

/// An element x + ℓy of R_Λ.
///
/// The arithmetic operators panic when the operands carry different Λ; the
/// `try_*` methods report the mismatch as an error instead.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RNum {
    pub re: f64,
    pub im: f64,
    pub lambda: Lambda,
}

impl RNum {
    pub fn new(re: f64, im: f64, lambda: Lambda) -> Self {
        RNum { re, im, lambda }
    }

    pub fn real(re: f64, lambda: Lambda) -> Self {
        RNum::new(re, 0.0, lambda)
    }

    pub fn zero(lambda: Lambda) -> Self {
        RNum::new(0.0, 0.0, lambda)
    }

    pub fn one(lambda: Lambda) -> Self {
        RNum::new(1.0, 0.0, lambda)
    }

    /// The generator ℓ.
    pub fn ell(lambda: Lambda) -> Self {
        RNum::new(0.0, 1.0, lambda)
    }

    /// The idempotents ½(1 ± ℓ) of the split-complex numbers.
    pub fn idempotents() -> (Self, Self) {
        (RNum::new(0.5, 0.5, Lambda::Minus), RNum::new(0.5, -0.5, Lambda::Minus))
    }

    fn same(self, other: RNum) -> Result<Lambda> {
        if self.lambda == other.lambda {
            Ok(self.lambda)
        } else {
            Err(Error::LambdaMismatch(self.lambda, other.lambda))
        }
    }

    pub fn try_add(self, other: RNum) -> Result<RNum> {
        let l = self.same(other)?;
        Ok(RNum::new(self.re + other.re, self.im + other.im, l))
    }

    pub fn try_sub(self, other: RNum) -> Result<RNum> {
        let l = self.same(other)?;
        Ok(RNum::new(self.re - other.re, self.im - other.im, l))
    }

    /// (x,y)·(u,v) = (xu − Λyv, xv + yu).
    pub fn try_mul(self, other: RNum) -> Result<RNum> {
        let l = self.same(other)?;
        Ok(RNum::new(self.re * other.re - l.f() * self.im * other.im, self.re * other.im + self.im * other.re, l))
    }

    pub fn try_div(self, other: RNum) -> Result<RNum> {
        self.try_mul(other.inv()?)
    }

    /// N(z) = re² + Λ·im²; z is invertible iff N(z) ≠ 0.
    pub fn norm(self) -> f64 {
        self.re * self.re + self.lambda.f() * self.im * self.im
    }

    pub fn conj(self) -> RNum {
        RNum::new(self.re, -self.im, self.lambda)
    }

    pub fn inv(self) -> Result<RNum> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotInvertible { re: self.re, im: self.im, lambda: self.lambda });
        }
        Ok(RNum::new(self.re / n, -self.im / n, self.lambda))
    }

    pub fn scale(self, s: f64) -> RNum {
        RNum::new(self.re * s, self.im * s, self.lambda)
    }

    /// Largest absolute value of the two components.
    pub fn abs_max(self) -> f64 {
        self.re.abs().max(self.im.abs())
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn from_complex(c: Complex64) -> RNum {
        RNum::new(c.re, c.im, Lambda::Plus)
    }

    pub fn exp(self) -> RNum {
        let (x, y) = (self.re, self.im);
        let ex = x.exp();
        match self.lambda {
            Lambda::Minus => RNum::new(ex * y.cosh(), ex * y.sinh(), self.lambda),
            Lambda::Zero => RNum::new(ex, ex * y, self.lambda),
            Lambda::Plus => RNum::new(ex * y.cos(), ex * y.sin(), self.lambda),
        }
    }

    /// Principal logarithm for Λ = 1; for Λ = -1 both x ± y must be positive,
    /// for Λ = 0 the real part must be positive.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn log(self) -> Result<RNum> {
        let (x, y) = (self.re, self.im);
        match self.lambda {
            Lambda::Minus => {
                let (a, b) = (x + y, x - y);
                if !(a > 0.0) || !(b > 0.0) {
                    return Err(domain("log", format!("re±im = ({a}, {b}) must be positive")));
                }
                let (la, lb) = (a.ln(), b.ln());
                Ok(RNum::new(0.5 * (la + lb), 0.5 * (la - lb), self.lambda))
            }
            Lambda::Zero => {
                if !(x > 0.0) {
                    return Err(domain("log", format!("re = {x} must be positive")));
                }
                Ok(RNum::new(x.ln(), y / x, self.lambda))
            }
            Lambda::Plus => {
                if x == 0.0 && y == 0.0 || !self.is_finite() {
                    return Err(domain("log", "argument is zero".into()));
                }
                Ok(RNum::from_complex(self.to_complex().ln()))
            }
        }
    }

    /// log(1 + e^z), avoiding overflow of the exponential where possible.
    pub fn log1p_exp(self) -> Result<RNum> {
        let (x, y) = (self.re, self.im);
        match self.lambda {
            Lambda::Minus => {
                let (a, b) = (softplus(x + y), softplus(x - y));
                Ok(RNum::new(0.5 * (a + b), 0.5 * (a - b), self.lambda))
            }
            Lambda::Zero => Ok(RNum::new(softplus(x), logistic(x) * y, self.lambda)),
            Lambda::Plus => (RNum::one(self.lambda) + self.exp()).log(),
        }
    }

    pub fn li2(self) -> Result<RNum> {
        let (x, y) = (self.re, self.im);
        match self.lambda {
            Lambda::Minus => {
                let (a, b) = (li2(x + y)?, li2(x - y)?);
                Ok(RNum::new(0.5 * (a + b), 0.5 * (a - b), self.lambda))
            }
            Lambda::Zero => {
                if y != 0.0 && x >= 1.0 {
                    return Err(domain("li2", format!("re = {x} at the singular point")));
                }
                Ok(RNum::new(li2(x)?, li2_derivative(x) * y, self.lambda))
            }
            Lambda::Plus => {
                if y == 0.0 && x > 1.0 {
                    return Err(domain("li2", format!("{x} lies on the branch cut")));
                }
                if !self.is_finite() {
                    return Err(domain("li2", "non-finite argument".into()));
                }
                Ok(RNum::from_complex(li2_complex(self.to_complex())))
            }
        }
    }
}

/// Extension of a supported real-analytic function to R_Λ.
pub fn extend(f: Func, z: RNum) -> Result<RNum> {
    match f {
        Func::Exp => Ok(z.exp()),
        Func::Log => z.log(),
        Func::Li2 => z.li2(),
    }
}

fn domain(func: &'static str, detail: String) -> Error {
    Error::Domain { func, detail }
}

/// log(1 + e^x) for real x.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Li₂′(t) = −log(1−t)/t, continued by 1 at t = 0.
fn li2_derivative(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 + t / 2.0
    } else {
        -(-t).ln_1p() / t
    }
}

/// Euler's dilogarithm on t ≤ 1.
pub fn li2(t: f64) -> Result<f64> {
    if t.is_nan() || t > 1.0 {
        return Err(domain("li2", format!("{t} > 1")));
    }
    Ok(li2_le1(t))
}

fn li2_le1(t: f64) -> f64 {
    if t == 1.0 {
        PI2_6
    } else if t.abs() <= 0.5 {
        li2_series(t)
    } else if t < -1.0 {
        let l = (-t).ln();
        -PI2_6 - 0.5 * l * l - li2_le1(1.0 / t)
    } else if t < 0.0 {
        // Landen: Li₂(t) + Li₂(t/(t−1)) = −½log²(1−t); t/(t−1) ∈ (1/3, 1/2].
        let l = (-t).ln_1p();
        -li2_le1(t / (t - 1.0)) - 0.5 * l * l
    } else {
        PI2_6 - t.ln() * (-t).ln_1p() - li2_le1(1.0 - t)
    }
}

fn li2_series(t: f64) -> f64 {
    let mut sum = 0.0;
    let mut p = t;
    for k in 1..200 {
        let term = p / (k * k) as f64;
        sum += term;
        if term.abs() <= f64::EPSILON * 0.125 * sum.abs() {
            break;
        }
        p *= t;
    }
    sum
}

// B_{2k} / (2k+1)!
const LI2_BERNOULLI: [f64; 19] = [
    0.027777777777777776,
    -0.0002777777777777778,
    4.72411186696901e-06,
    -9.185773074661964e-08,
    1.8978869988971e-09,
    -4.0647616451442256e-11,
    8.921691020456452e-13,
    -1.9939295860721074e-14,
    4.518980029619918e-16,
    -1.0356517612181247e-17,
    2.395218621026187e-19,
    -5.581785874325009e-21,
    1.3091507554183213e-22,
    -3.0874198024267403e-24,
    7.315975652702203e-26,
    -1.740845657234001e-27,
    4.1576356446139e-29,
    -9.962148488284622e-31,
    2.3940344248961652e-32,
];

/// Principal branch of the complex dilogarithm (cut along [1, ∞)).
pub fn li2_complex(z: Complex64) -> Complex64 {
    let z = upper(z);
    let one = Complex64::new(1.0, 0.0);
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    if z == one {
        return Complex64::new(PI2_6, 0.0);
    }
    if z.norm() > 1.0 {
        let l = (-z).ln();
        return -li2_complex(one / z) - PI2_6 - 0.5 * l * l;
    }
    if z.re > 0.5 {
        return -li2_complex(one - z) + PI2_6 - z.ln() * (one - z).ln();
    }
    // Σ B_n uⁿ⁺¹/(n+1)! with u = −log(1−z).
    let u = -(one - z).ln();
    let u2 = u * u;
    let mut sum = u - 0.25 * u2;
    let mut p = u;
    for c in LI2_BERNOULLI {
        p *= u2;
        let term = p * c;
        sum += term;
        if term.norm() <= f64::EPSILON * 0.125 * sum.norm() {
            break;
        }
    }
    sum
}

// Points on the cut are read as limits from the upper half-plane.
fn upper(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}

/// D(z) = Im Li₂(z) + log|z|·arg(1−z) for a complex (Λ = 1) argument.
pub fn bloch_wigner(z: RNum) -> Result<f64> {
    if z.lambda != Lambda::Plus {
        return Err(Error::LambdaMismatch(z.lambda, Lambda::Plus));
    }
    let c = upper(z.to_complex());
    if c.norm() == 0.0 || c == Complex64::new(1.0, 0.0) {
        return Err(domain("bloch_wigner", format!("singular point {c}")));
    }
    Ok(li2_complex(c).im + c.norm().ln() * Complex64::new(1.0 - c.re, -c.im).arg())
}

impl Add for RNum {
    type Output = RNum;
    fn add(self, o: RNum) -> RNum {
        self.try_add(o).expect("mixed-lambda addition")
    }
}

impl Sub for RNum {
    type Output = RNum;
    fn sub(self, o: RNum) -> RNum {
        self.try_sub(o).expect("mixed-lambda subtraction")
    }
}

impl Mul for RNum {
    type Output = RNum;
    fn mul(self, o: RNum) -> RNum {
        self.try_mul(o).expect("mixed-lambda multiplication")
    }
}

impl Mul<f64> for RNum {
    type Output = RNum;
    fn mul(self, s: f64) -> RNum {
        self.scale(s)
    }
}

impl Div<f64> for RNum {
    type Output = RNum;
    fn div(self, s: f64) -> RNum {
        self.scale(1.0 / s)
    }
}

impl Neg for RNum {
    type Output = RNum;
    fn neg(self) -> RNum {
        RNum::new(-self.re, -self.im, self.lambda)
    }
}

impl AddAssign for RNum {
    fn add_assign(&mut self, o: RNum) {
        *self = *self + o;
    }
}

impl SubAssign for RNum {
    fn sub_assign(&mut self, o: RNum) {
        *self = *self - o;
    }
}

impl fmt::Display for RNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}l", self.re, self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(re: f64, im: f64, l: Lambda) -> RNum {
        RNum::new(re, im, l)
    }

    fn close(a: RNum, b: RNum, tol: f64) -> bool {
        (a.re - b.re).abs() <= tol && (a.im - b.im).abs() <= tol
    }

    // Independent oracle: Li₂(−eˣ) = −∫_{−∞}^{x} log(1+eᵘ) du by composite Simpson.
    fn li2_neg_exp_oracle(x: f64) -> f64 {
        let a = (-45.0_f64).min(x - 1.0);
        let n = ((x - a) / 1e-3).ceil() as usize * 2;
        let h = (x - a) / n as f64;
        let f = |u: f64| softplus(u);
        // Kahan-compensated so rounding stays far below the 1e-12 target.
        let (mut s, mut comp) = (f(a) + f(x), 0.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            let y = w * f(a + i as f64 * h) - comp;
            let t = s + y;
            comp = (t - s) - y;
            s = t;
        }
        -(s * h / 3.0 + f(a))
    }

    #[test]
    fn mul_examples() {
        let l0 = RNum::ell(Lambda::Zero);
        assert_eq!(l0 * l0, RNum::zero(Lambda::Zero));
        let p = r(1.0, 1.0, Lambda::Minus) * r(1.0, -1.0, Lambda::Minus);
        assert_eq!(p, RNum::zero(Lambda::Minus));
        let i = RNum::ell(Lambda::Plus);
        assert_eq!(i * i, r(-1.0, 0.0, Lambda::Plus));
    }

    #[test]
    fn mixed_lambda_rejected() {
        let e = RNum::one(Lambda::Zero).try_mul(RNum::one(Lambda::Plus));
        assert!(matches!(e, Err(Error::LambdaMismatch(..))));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(RNum::ell(Lambda::Plus).inv().unwrap(), r(0.0, -1.0, Lambda::Plus));
        assert_eq!(r(2.0, 1.0, Lambda::Zero).inv().unwrap(), r(0.5, -0.25, Lambda::Zero));
        assert!(matches!(r(1.0, 1.0, Lambda::Minus).inv(), Err(Error::NotInvertible { .. })));
        assert!(RNum::ell(Lambda::Zero).inv().is_err());
    }

    #[test]
    fn extend_examples() {
        for l in Lambda::ALL {
            assert_eq!(extend(Func::Exp, RNum::zero(l)).unwrap(), RNum::one(l));
        }
        let (x, y) = (0.3, -1.7);
        let e = extend(Func::Exp, r(x, y, Lambda::Zero)).unwrap();
        assert!(close(e, r(x.exp(), x.exp() * y, Lambda::Zero), 1e-15));
        let lg = extend(Func::Log, r(1.0, 0.5, Lambda::Minus)).unwrap();
        let (a, b) = (1.5f64.ln(), 0.5f64.ln());
        let (ep, em) = RNum::idempotents();
        let expect = ep * RNum::real(a, Lambda::Minus) + em * RNum::real(b, Lambda::Minus);
        assert!(close(lg, expect, 1e-15));
    }

    #[test]
    fn domain_errors() {
        assert!(r(1.0, 1.5, Lambda::Minus).log().is_err());
        assert!(r(-1.0, 0.0, Lambda::Zero).log().is_err());
        assert!(RNum::zero(Lambda::Plus).log().is_err());
        assert!(r(2.0, 0.0, Lambda::Plus).li2().is_err());
        assert!(li2(1.5).is_err());
        assert!(li2(f64::NAN).is_err());
    }

    #[test]
    fn li2_special_values() {
        assert_eq!(li2(0.0).unwrap(), 0.0);
        // Alternating series Σ(−1)ᵏ/k², averaged partial sums.
        let n = 200_000;
        let mut s = 0.0;
        let mut prev = 0.0;
        for k in 1..=n {
            prev = s;
            let kf = k as f64;
            s += if k % 2 == 0 { 1.0 } else { -1.0 } / (kf * kf);
        }
        let oracle = 0.5 * (s + prev);
        assert!((li2(-1.0).unwrap() - oracle).abs() < 1e-13);
        assert!((li2(1.0).unwrap() - PI2_6).abs() < 1e-15);
        assert!((li2(0.5).unwrap() - (PI2_6 / 2.0 - 0.5 * 2f64.ln().powi(2))).abs() < 1e-15);
    }

    #[test]
    fn li2_negative_axis_accuracy() {
        for &x in &[-30.0, -5.0, -1.0, -0.2, 0.0, 0.4, 1.3, 3.0, 7.5, 13.815510557964274] {
            let t = -f64::exp(x);
            let got = li2(t).unwrap();
            let want = li2_neg_exp_oracle(x);
            assert!((got - want).abs() < 1e-12, "t = {t}: {got} vs {want}");
        }
    }

    #[test]
    fn li2_complex_matches_real() {
        for &t in &[-1e6, -3.0, -1.0, -0.7, -0.2, 0.0, 0.3, 0.6, 0.9, 1.0] {
            let c = li2_complex(Complex64::new(t, 0.0));
            assert!((c.re - li2(t).unwrap()).abs() < 1e-12 * (1.0 + c.re.abs()));
            assert!(c.im.abs() < 1e-13);
        }
    }

    #[test]
    fn li2_complex_derivative() {
        // d/dz Li₂(z) = −log(1−z)/z, checked by central differences.
        let h = 1e-6;
        for &(a, b) in &[(0.3, 0.4), (-2.0, 1.0), (0.9, -0.3), (3.0, 2.0), (-0.5, -5.0)] {
            let z = Complex64::new(a, b);
            let d = (li2_complex(z + h) - li2_complex(z - h)) / (2.0 * h);
            let want = -(Complex64::new(1.0, 0.0) - z).ln() / z;
            assert!((d - want).norm() < 1e-8, "{z}: {d} vs {want}");
        }
    }

    #[test]
    fn bloch_wigner_vanishes_on_reals() {
        for &t in &[-7.0, -1.0, -0.1, 0.2, 0.8, 1.5, 4.0] {
            let d = bloch_wigner(RNum::real(t, Lambda::Plus)).unwrap();
            assert!(d.abs() < 1e-14, "D({t}) = {d}");
        }
        assert!(bloch_wigner(RNum::one(Lambda::Plus)).is_err());
        assert!(bloch_wigner(RNum::zero(Lambda::Plus)).is_err());
        assert!(bloch_wigner(RNum::one(Lambda::Zero)).is_err());
        // Maximal value at e^{iπ/3}: the volume of the regular ideal tetrahedron.
        let w = RNum::new(0.5, 3f64.sqrt() / 2.0, Lambda::Plus);
        assert!((bloch_wigner(w).unwrap() - 1.0149416064096536).abs() < 1e-13);
    }

    #[test]
    fn idempotents_exact() {
        let (p, m) = RNum::idempotents();
        assert_eq!(p * p, p);
        assert_eq!(m * m, m);
        assert_eq!(p * m, RNum::zero(Lambda::Minus));
    }

    fn lambda() -> impl Strategy<Value = Lambda> {
        prop_oneof![Just(Lambda::Minus), Just(Lambda::Zero), Just(Lambda::Plus)]
    }

    fn int_num(l: Lambda) -> impl Strategy<Value = RNum> {
        (-50i32..50, -50i32..50).prop_map(move |(a, b)| RNum::new(a.into(), b.into(), l))
    }

    fn ring_triple() -> impl Strategy<Value = (RNum, RNum, RNum)> {
        lambda().prop_flat_map(|l| (int_num(l), int_num(l), int_num(l)))
    }

    fn num_in(l: Lambda, rx: f64, ry: f64) -> impl Strategy<Value = RNum> {
        (-rx..rx, -ry..ry).prop_map(move |(a, b)| RNum::new(a, b, l))
    }

    proptest! {
        #[test]
        fn ring_axioms_exact_on_integers((a, b, c) in ring_triple()) {
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!(a * (b + c), a * b + a * c);
        }

        #[test]
        fn inverse_is_inverse(l in lambda(), a in -5.0..5.0f64, b in -5.0..5.0f64) {
            let z = RNum::new(a, b, l);
            prop_assume!(z.norm().abs() > 1e-3);
            let p = z * z.inv().unwrap();
            prop_assert!(close(p, RNum::one(l), 1e-12));
        }

        #[test]
        fn exp_of_negative_is_inverse(z in lambda().prop_flat_map(|l| num_in(l, 3.0, 2.0))) {
            let p = z.exp() * (-z).exp();
            prop_assert!(close(p, RNum::one(z.lambda), 1e-12));
        }

        #[test]
        fn log_inverts_exp(z in lambda().prop_flat_map(|l| num_in(l, 3.0, 2.0))) {
            let w = z.exp().log().unwrap();
            prop_assert!(close(w, z, 1e-10));
        }

        #[test]
        fn log1p_exp_agrees(z in lambda().prop_flat_map(|l| num_in(l, 3.0, 2.0))) {
            let a = z.log1p_exp().unwrap();
            let b = (RNum::one(z.lambda) + z.exp()).log().unwrap();
            prop_assert!(close(a, b, 1e-12));
        }

        #[test]
        fn cauchy_riemann(l in lambda(), f in prop_oneof![Just(Func::Exp), Just(Func::Log), Just(Func::Li2)],
                          x in -1.0..1.0f64, y in -0.4..0.4f64) {
            // log needs a positive base point; Li₂ lives on the negative axis.
            let x = match f { Func::Exp => x, Func::Log => 1.5 + x, Func::Li2 => -1.0 + x };
            let h = 1e-6;
            let ev = |a: f64, b: f64| extend(f, RNum::new(a, b, l)).unwrap();
            let dx = (ev(x + h, y) - ev(x - h, y)) / (2.0 * h);
            let dy = (ev(x, y + h) - ev(x, y - h)) / (2.0 * h);
            prop_assert!((dx.re - dy.im).abs() < 1e-5);
            prop_assert!((dy.re + f64::from(l.value()) * dx.im).abs() < 1e-5);
        }

        #[test]
        fn extension_agrees_on_reals(l in lambda(), t in -40.0..0.9f64) {
            let v = RNum::real(t, l).li2().unwrap();
            prop_assert!((v.re - li2(t).unwrap()).abs() <= 1e-12 * (1.0 + v.re.abs()));
            prop_assert!(v.im.abs() < 1e-13);
        }

        #[test]
        fn li2_derivative_identity(t in -1e3..0.95f64) {
            let h = 1e-6 * (1.0 + t.abs());
            let d = (li2(t + h).unwrap() - li2(t - h).unwrap()) / (2.0 * h);
            prop_assert!((d - li2_derivative(t)).abs() < 1e-6);
        }
    }
}
