//! Scalar abstraction shared by the double and extended precision paths.
//!
//! `Dd` is an unevaluated sum of two doubles (about 31 significant digits).
//! Only the operations the Γ-function and contour code need are provided.

use num_complex::Complex;
use num_traits::{Num, NumAssign, One, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

pub trait Real:
    Copy
    + Num
    + Neg<Output = Self>
    + PartialOrd
    + NumAssign
    + Send
    + Sync
    + fmt::Debug
    + 'static
{
    /// Number of Bernoulli terms used by the Stirling series at this precision.
    const STIRLING_TERMS: usize;
    /// Modulus that arguments are shifted up to before the Stirling series.
    const STIRLING_SHIFT: f64;
    /// Gauss-Legendre panel order that saturates this precision.
    const PANEL_ORDER: usize;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn atan2(self, x: Self) -> Self;
    fn pi() -> Self;
    fn ln_2pi_half() -> Self;
    fn epsilon() -> f64;
    /// Stirling coefficients B_{2k}/(2k(2k-1)), built once per type.
    fn stirling_table() -> &'static [Self];

    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
    fn hypot(self, other: Self) -> Self {
        let (a, b) = (self.abs(), other.abs());
        let (big, small) = if a > b { (a, b) } else { (b, a) };
        if big == Self::zero() {
            return big;
        }
        let r = small / big;
        big * (Self::one() + r * r).sqrt()
    }
    fn from_i128(n: i128) -> Self {
        let hi = n as f64;
        let lo = (n - hi as i128) as f64;
        Self::from_f64(hi) + Self::from_f64(lo)
    }
}

impl Real for f64 {
    fn stirling_table() -> &'static [f64] {
        static T: std::sync::OnceLock<Vec<f64>> = std::sync::OnceLock::new();
        T.get_or_init(crate::special::stirling_coeffs::<f64>)
    }
    const STIRLING_TERMS: usize = 12;
    const STIRLING_SHIFT: f64 = 10.0;
    const PANEL_ORDER: usize = 16;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn ln_2pi_half() -> Self {
        0.918_938_533_204_672_8
    }
    fn epsilon() -> f64 {
        f64::EPSILON
    }
    fn hypot(self, other: Self) -> Self {
        f64::hypot(self, other)
    }
}

#[derive(Clone, Copy, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    const PI: Dd = Dd::new(std::f64::consts::PI, 1.224_646_799_147_353_2e-16);
    const HALF_PI: Dd = Dd::new(std::f64::consts::FRAC_PI_2, 6.123_233_995_736_766e-17);
    const LN2: Dd = Dd::new(std::f64::consts::LN_2, 2.319_046_813_846_299_6e-17);
    const LN_2PI_HALF: Dd = Dd::new(0.918_938_533_204_672_8, -3.878_294_158_067_241_4e-17);

    fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let r = (self.hi - p - e + self.lo) / b;
        let (hi, lo) = quick_two_sum(q1, r);
        Dd { hi, lo }
    }

    fn ldexp(self, k: i32) -> Dd {
        let f = 2f64.powi(k);
        Dd { hi: self.hi * f, lo: self.lo * f }
    }

    pub fn floor(self) -> Dd {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (h, l) = quick_two_sum(hi, self.lo.floor());
            Dd { hi: h, lo: l }
        } else {
            Dd { hi, lo: 0.0 }
        }
    }

    pub fn round(self) -> Dd {
        (self + Dd::from_f64(0.5)).floor()
    }

    /// Taylor kernels for |r| ≤ π/4.
    fn sin_cos_kernel(r: Dd) -> (Dd, Dd) {
        // Series on r/8, then three angle doublings.
        let x = r.ldexp(-3);
        let x2 = x * x;
        let mut term = x;
        let mut s = x;
        let mut k = 1.0;
        while term.hi.abs() > 1e-35 && k < 40.0 {
            term = -(term * x2).div_f64((k + 1.0) * (k + 2.0));
            s += term;
            k += 2.0;
        }
        // 1 − cos via its own series to keep the small part exact.
        let mut term = x2.ldexp(-1);
        let mut omc = term;
        let mut k = 2.0;
        while term.hi.abs() > 1e-35 && k < 40.0 {
            term = -(term * x2).div_f64((k + 1.0) * (k + 2.0));
            omc += term;
            k += 2.0;
        }
        let mut c = Dd::one() - omc;
        for _ in 0..3 {
            let s2 = (s * c).ldexp(1);
            c = c * c - s * s;
            s = s2;
        }
        (s, c)
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.hi + self.lo)
    }
}

impl PartialEq for Dd {
    fn eq(&self, o: &Self) -> bool {
        self.hi == o.hi && self.lo == o.lo
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&o.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&o.lo),
            c => c,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, b: Dd) -> Dd {
        let q = self / b;
        let q = if q.hi < 0.0 { -((-q).floor()) } else { q.floor() };
        self - q * b
    }
}

macro_rules! assign_op {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr for Dd {
            #[inline]
            fn $f(&mut self, b: Dd) {
                *self = *self $op b;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);
assign_op!(RemAssign, rem_assign, %);

impl Zero for Dd {
    fn zero() -> Dd {
        Dd::new(0.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for Dd {
    fn one() -> Dd {
        Dd::new(1.0, 0.0)
    }
}

impl Num for Dd {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, _radix: u32) -> Result<Dd, Self::FromStrRadixErr> {
        s.parse::<f64>().map(Dd::from_f64)
    }
}

impl Real for Dd {
    fn stirling_table() -> &'static [Dd] {
        static T: std::sync::OnceLock<Vec<Dd>> = std::sync::OnceLock::new();
        T.get_or_init(crate::special::stirling_coeffs::<Dd>)
    }
    const STIRLING_TERMS: usize = 22;
    const STIRLING_SHIFT: f64 = 24.0;
    const PANEL_ORDER: usize = 32;

    fn from_f64(x: f64) -> Self {
        Dd::new(x, 0.0)
    }
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
    fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::zero();
        }
        let k = (self.hi / Dd::LN2.hi).round();
        let r = (self - Dd::LN2.mul_f64(k)).ldexp(-10);
        // Taylor on |r| < 2^-10·ln2/2, then square ten times.
        let mut term = r;
        let mut sum = r;
        let mut n = 1.0;
        while term.hi.abs() > 1e-36 {
            n += 1.0;
            term = (term * r).div_f64(n);
            sum += term;
        }
        // sum = e^r − 1; (1+x)² − 1 = x(2+x) keeps the small part accurate.
        for _ in 0..10 {
            sum = sum * (sum + Dd::from_f64(2.0));
        }
        (sum + Dd::one()).ldexp(k as i32)
    }
    fn ln(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::from_f64(if self.hi == 0.0 { f64::NEG_INFINITY } else { f64::NAN });
        }
        // One Newton step doubles the f64 starting accuracy.
        let y = Dd::from_f64(self.hi.ln());
        y + self * (-y).exp() - Dd::one()
    }
    fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::zero();
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = Dd::from_f64(self.hi * x);
        let diff = self - ax * ax;
        ax + Dd::from_f64(diff.hi * x * 0.5)
    }
    fn sin_cos(self) -> (Dd, Dd) {
        let k = (self / Dd::HALF_PI).round();
        let r = self - Dd::HALF_PI * k;
        let (s, c) = Dd::sin_cos_kernel(r);
        match (k.hi.rem_euclid(4.0)) as i64 {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
    fn atan2(self, x: Dd) -> Dd {
        if self.hi == 0.0 && x.hi == 0.0 {
            return Dd::zero();
        }
        let t = Dd::from_f64(self.hi.atan2(x.hi));
        let (s, c) = t.sin_cos();
        t + (self * c - x * s) / (x * c + self * s)
    }
    fn pi() -> Dd {
        Dd::PI
    }
    fn ln_2pi_half() -> Dd {
        Dd::LN_2PI_HALF
    }
    fn epsilon() -> f64 {
        4.93e-32
    }
}

#[inline]
pub fn c_from<S: Real>(z: Complex<f64>) -> Complex<S> {
    Complex::new(S::from_f64(z.re), S::from_f64(z.im))
}

#[inline]
pub fn c_to_f64<S: Real>(z: Complex<S>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

#[inline]
pub fn cexp<S: Real>(z: Complex<S>) -> Complex<S> {
    let m = z.re.exp();
    let (s, c) = z.im.sin_cos();
    Complex::new(m * c, m * s)
}

#[inline]
pub fn cln<S: Real>(z: Complex<S>) -> Complex<S> {
    let big = z.re.abs().to_f64().max(z.im.abs().to_f64());
    let modulus = if big > 1e-150 && big < 1e150 {
        (z.re * z.re + z.im * z.im).ln() * S::from_f64(0.5)
    } else {
        z.re.hypot(z.im).ln()
    };
    Complex::new(modulus, z.im.atan2(z.re))
}

#[inline]
pub fn cabs<S: Real>(z: Complex<S>) -> S {
    z.re.hypot(z.im)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, b: f64, tol: f64) -> bool {
        ((a - Dd::from_f64(b)).to_f64()).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn dd_constants_consistent() {
        let (s, c) = Dd::PI.sin_cos();
        assert!(s.to_f64().abs() < 1e-31);
        assert!(close(c, -1.0, 1e-31));
        let two_pi_half = (Dd::PI * Dd::from_f64(2.0)).ln() * Dd::from_f64(0.5);
        assert!((two_pi_half - Dd::LN_2PI_HALF).to_f64().abs() < 1e-31);
        assert!((Dd::from_f64(2.0).ln() - Dd::LN2).to_f64().abs() < 1e-31);
    }

    #[test]
    fn dd_exp_ln_roundtrip() {
        for &x in &[0.1, 1.0, 2.5, -7.25, 30.0, 123.456] {
            let d = Dd::from_f64(x);
            let back = d.exp().ln();
            assert!((back - d).to_f64().abs() < 1e-30 * x.abs().max(1.0), "{x}");
        }
        // e = exp(1) to 32 digits
        let e = Dd::one().exp();
        let reference = Dd::new(std::f64::consts::E, 1.445_646_891_729_250_2e-16);
        assert!((e - reference).to_f64().abs() < 1e-31);
    }

    #[test]
    fn dd_trig_identities() {
        for &x in &[0.3, 1.7, -4.0, 12.5, 100.0] {
            let d = Dd::from_f64(x);
            let (s, c) = d.sin_cos();
            assert!((s * s + c * c - Dd::one()).to_f64().abs() < 1e-30);
            let back = s.atan2(c);
            let wrapped = d - Dd::PI * Dd::from_f64(2.0) * (d / (Dd::PI * Dd::from_f64(2.0))).round();
            assert!((back - wrapped).to_f64().abs() < 1e-29, "{x}");
        }
    }

    #[test]
    fn dd_sqrt_and_div() {
        let two = Dd::from_f64(2.0);
        let r = two.sqrt();
        assert!((r * r - two).to_f64().abs() < 1e-31);
        let third = Dd::one() / Dd::from_f64(3.0);
        assert!((third * Dd::from_f64(3.0) - Dd::one()).to_f64().abs() < 1e-31);
    }
}
