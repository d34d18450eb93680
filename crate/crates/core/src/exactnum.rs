//! Exact Gaussian-rational scalars and floating complex scalars.
//!
//! [`GaussianRational`] is the coefficient field for every symbolic identity
//! in the crate: both components are arbitrary-precision rationals kept in
//! lowest terms by construction, so equal values always have identical
//! representation. [`ComplexFloat`] is the binary64 companion used by search
//! heuristics and numeric certificates; geometric routines never convert
//! floats back into exact scalars (search code may, since every finite
//! binary64 is a dyadic rational).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
pub use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

/// Parse a real rational literal like `3/2` or `-5`.
pub fn parse_rational(s: &str) -> crate::Result<BigRational> {
    let g: GaussianRational = s.parse()?;
    if !g.is_real() {
        return Err(Error::Parse(format!("expected a real rational, got `{s}`")));
    }
    Ok(g.re().clone())
}

/// `2^k` as an exact rational, for any (possibly negative) `k`.
pub fn dyadic_pow2(k: i64) -> BigRational {
    let mag = BigInt::one() << k.unsigned_abs() as usize;
    if k >= 0 {
        BigRational::from_integer(mag)
    } else {
        BigRational::new(BigInt::one(), mag)
    }
}

/// Exact square root of a nonnegative rational, when it is rational.
pub fn exact_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let ns = q.numer().sqrt();
    let ds = q.denom().sqrt();
    if &(&ns * &ns) == q.numer() && &(&ds * &ds) == q.denom() {
        Some(BigRational::new(ns, ds))
    } else {
        None
    }
}

/// Rational-to-float conversion that stays accurate for huge numerators
/// and denominators (shell radii grow like `2^(5i+2)`).
pub fn ratio_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Scale both sides down by a common power of two and retry.
    let shift = (q.numer().bits() as i64 - 900).max(q.denom().bits() as i64 - 900);
    if shift > 0 {
        let scaled = BigRational::new(q.numer() >> shift as u64, q.denom() >> shift as u64);
        scaled.to_f64().unwrap_or(f64::NAN)
    } else {
        f64::NAN
    }
}

/// A complex number with rational real and imaginary parts.
///
/// `num_rational::BigRational` stores fractions reduced with positive
/// denominator, which gives us the canonical-representation invariant for
/// free: two equal values are structurally equal.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    re: BigRational,
    im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    /// `n/d` as a real Gaussian rational.
    pub fn from_ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Self::new(BigRational::new(n.into(), d.into()), BigRational::zero())
    }

    /// `a + b·i` from integer pairs.
    pub fn from_parts(a: i64, b: i64) -> Self {
        Self::new(
            BigRational::from_integer(a.into()),
            BigRational::from_integer(b.into()),
        )
    }

    pub fn from_real(re: BigRational) -> Self {
        Self::new(re, BigRational::zero())
    }

    /// Exact conversion of a finite binary64 (every such value is dyadic).
    ///
    /// Reserved for search heuristics; core geometry never converts
    /// float to exact.
    pub fn from_f64_exact(re: f64, im: f64) -> crate::Result<Self> {
        let r = BigRational::from_float(re).ok_or(Error::NonFinite)?;
        let i = BigRational::from_float(im).ok_or(Error::NonFinite)?;
        Ok(Self::new(r, i))
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// `re² + im²`, the exact squared modulus.
    pub fn abs2(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Exact trichotomy of `|self|` versus `2^k`, decided on squares.
    pub fn cmp_abs_to_dyadic(&self, k: i64) -> Ordering {
        self.abs2().cmp(&dyadic_pow2(2 * k))
    }

    /// Exact trichotomy of `|self|` versus a nonnegative rational.
    pub fn cmp_abs_to_ratio(&self, r: &BigRational) -> Ordering {
        debug_assert!(!r.is_negative());
        self.abs2().cmp(&(r * r))
    }

    pub fn recip(&self) -> crate::Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.abs2();
        Ok(Self::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn checked_div(&self, rhs: &Self) -> crate::Result<Self> {
        Ok(self * &rhs.recip()?)
    }

    /// Round-to-nearest conversion into a complex float.
    pub fn to_float(&self) -> ComplexFloat {
        ComplexFloat::new(ratio_to_f64(&self.re), ratio_to_f64(&self.im))
    }

    /// A rational upper bound `q ≥ |self|`, validated exactly (`q² ≥ |self|²`).
    pub fn abs_upper_bound(&self) -> BigRational {
        let a2 = self.abs2();
        if a2.is_zero() {
            return BigRational::zero();
        }
        if let Some(r) = exact_sqrt(&a2) {
            return r;
        }
        let mut guess = ratio_to_f64(&a2).sqrt() * (1.0 + 1e-12);
        loop {
            if let Some(q) = BigRational::from_float(guess) {
                if !q.is_negative() && &q * &q >= a2 {
                    return q;
                }
            }
            guess = if guess.is_finite() && guess > 0.0 {
                guess * 2.0
            } else {
                1.0
            };
        }
    }

    /// A rational lower bound `0 ≤ q ≤ |self|`, validated exactly.
    pub fn abs_lower_bound(&self) -> BigRational {
        let a2 = self.abs2();
        if a2.is_zero() {
            return BigRational::zero();
        }
        if let Some(r) = exact_sqrt(&a2) {
            return r;
        }
        let mut guess = ratio_to_f64(&a2).sqrt() * (1.0 - 1e-12);
        loop {
            if guess <= 0.0 || !guess.is_finite() {
                return BigRational::zero();
            }
            if let Some(q) = BigRational::from_float(guess) {
                if !q.is_negative() && &q * &q <= a2 {
                    return q;
                }
            }
            guess *= 0.5;
        }
    }

    /// The rational point `(1-t²)/(1+t²) + i·2t/(1+t²)` on the unit circle.
    ///
    /// Gives exact modulus-one scalars for shell samplers.
    pub fn unit_circle(t: &BigRational) -> Self {
        let t2 = t * t;
        let denom = BigRational::one() + &t2;
        Self::new(
            (BigRational::one() - &t2) / &denom,
            (BigRational::from_integer(2.into()) * t) / &denom,
        )
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self::new(&self.re * r, &self.im * r)
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

macro_rules! forward_value_ops {
    ($($trait:ident :: $method:ident),*) => {$(
        impl $trait for GaussianRational {
            type Output = GaussianRational;
            fn $method(self, rhs: GaussianRational) -> GaussianRational {
                $trait::$method(&self, &rhs)
            }
        }
    )*};
}
forward_value_ops!(Add::add, Sub::sub, Mul::mul);

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        -&self
    }
}

impl Div for &GaussianRational {
    type Output = GaussianRational;
    /// Panics on a zero divisor; use [`GaussianRational::checked_div`] where
    /// the divisor is not known to be nonzero.
    fn div(self, rhs: &GaussianRational) -> GaussianRational {
        self.checked_div(rhs).expect("division by zero")
    }
}

fn fmt_ratio(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for GaussianRational {
    /// Canonical textual form `a/b+c/d*i`, with unit denominators and zero
    /// parts elided.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_ratio(&self.re));
        }
        let im_mag = fmt_ratio(&self.im.abs());
        let im_str = if im_mag == "1" {
            "i".to_string()
        } else {
            format!("{im_mag}*i")
        };
        if self.re.is_zero() {
            return if self.im.is_negative() {
                write!(f, "-{im_str}")
            } else {
                write!(f, "{im_str}")
            };
        }
        let sign = if self.im.is_negative() { '-' } else { '+' };
        write!(f, "{}{}{}", fmt_ratio(&self.re), sign, im_str)
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_ratio(s: &str) -> Result<BigRational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(n))
        }
    }
}

impl FromStr for GaussianRational {
    type Err = Error;

    /// Accepts `a/b+c/d*i` with optional signs, and the abbreviations
    /// `a/b`, `c/d*i`, `i`, `-i`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty scalar".into()));
        }
        // Split into top-level summands at '+'/'-' not following '/' or digits'
        // exponent markers (none exist here, so any sign past index 0 splits).
        let mut terms: Vec<String> = Vec::new();
        let mut cur = String::new();
        for (idx, ch) in s.chars().enumerate() {
            if (ch == '+' || ch == '-') && idx > 0 {
                terms.push(std::mem::take(&mut cur));
                if ch == '-' {
                    cur.push('-');
                }
            } else {
                cur.push(ch);
            }
        }
        terms.push(cur);

        let mut re = BigRational::zero();
        let mut im = BigRational::zero();
        for term in terms.iter().filter(|t| !t.is_empty()) {
            if let Some(body) = term.strip_suffix("*i").or_else(|| term.strip_suffix('i')) {
                let coeff = match body {
                    "" => BigRational::one(),
                    "-" => -BigRational::one(),
                    _ => parse_ratio(body)?,
                };
                im += coeff;
            } else {
                re += parse_ratio(term)?;
            }
        }
        Ok(Self::new(re, im))
    }
}

impl Serialize for GaussianRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GaussianRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A complex scalar with finite binary64 components.
#[derive(Clone, Copy, PartialEq, Debug, Default)]
pub struct ComplexFloat {
    pub re: f64,
    pub im: f64,
}

impl ComplexFloat {
    /// Panics on NaN or infinity; geometric routines never admit either.
    pub fn new(re: f64, im: f64) -> Self {
        assert!(re.is_finite() && im.is_finite(), "non-finite complex float");
        Self { re, im }
    }

    pub fn checked(re: f64, im: f64) -> crate::Result<Self> {
        if re.is_finite() && im.is_finite() {
            Ok(Self { re, im })
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn zero() -> Self {
        Self { re: 0.0, im: 0.0 }
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn abs2(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn conj(self) -> Self {
        Self { re: self.re, im: -self.im }
    }

    /// `e^{iθ}`.
    pub fn cis(theta: f64) -> Self {
        Self { re: theta.cos(), im: theta.sin() }
    }

    pub fn scale(self, s: f64) -> Self {
        Self { re: self.re * s, im: self.im * s }
    }
}

impl Add for ComplexFloat {
    type Output = ComplexFloat;
    fn add(self, rhs: Self) -> Self {
        Self { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl Sub for ComplexFloat {
    type Output = ComplexFloat;
    fn sub(self, rhs: Self) -> Self {
        Self { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl Mul for ComplexFloat {
    type Output = ComplexFloat;
    fn mul(self, rhs: Self) -> Self {
        Self {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

impl Div for ComplexFloat {
    type Output = ComplexFloat;
    fn div(self, rhs: Self) -> Self {
        let n = rhs.abs2();
        Self {
            re: (self.re * rhs.re + self.im * rhs.im) / n,
            im: (self.im * rhs.re - self.re * rhs.im) / n,
        }
    }
}

impl Neg for ComplexFloat {
    type Output = ComplexFloat;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

impl fmt::Display for ComplexFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}i", self.re, if self.im < 0.0 { '-' } else { '+' }, self.im.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(a: i64, b: i64) -> GaussianRational {
        GaussianRational::from_parts(a, b)
    }

    #[test]
    fn product_of_conjugate_pair() {
        // (1+i)(1-i) = 2
        assert_eq!(&g(1, 1) * &g(1, -1), g(2, 0));
    }

    #[test]
    fn additive_inverse_cancels() {
        let a = GaussianRational::new(
            BigRational::new(3.into(), 2.into()),
            BigRational::from_integer(2.into()),
        );
        assert!((&a + &(-&a)).is_zero());
    }

    #[test]
    fn division_via_conjugate() {
        // (1+2i)/(3+4i) = 11/25 + (2/25)i, checked by back-multiplication.
        let q = g(1, 2).checked_div(&g(3, 4)).unwrap();
        assert_eq!(
            q,
            GaussianRational::new(
                BigRational::new(11.into(), 25.into()),
                BigRational::new(2.into(), 25.into()),
            )
        );
        assert_eq!(&q * &g(3, 4), g(1, 2));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(
            g(1, 0).checked_div(&GaussianRational::zero()),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn abs2_examples() {
        assert!(GaussianRational::zero().abs2().is_zero());
        let c = GaussianRational::new(
            BigRational::new(3.into(), 2.into()),
            BigRational::from_integer(2.into()),
        );
        assert_eq!(c.abs2(), BigRational::new(25.into(), 4.into()));
        assert_eq!(g(1, 1).abs2(), BigRational::from_integer(2.into()));
    }

    #[test]
    fn dyadic_comparison_trichotomy() {
        assert_eq!(g(1, 0).cmp_abs_to_dyadic(0), Ordering::Equal);
        assert_eq!(g(1, 1).cmp_abs_to_dyadic(0), Ordering::Greater);
        // 3/5 + (4/5)i is exactly on the unit circle.
        let c = GaussianRational::new(
            BigRational::new(3.into(), 5.into()),
            BigRational::new(4.into(), 5.into()),
        );
        assert_eq!(c.cmp_abs_to_dyadic(0), Ordering::Equal);
        assert_eq!(c.cmp_abs_to_dyadic(-1), Ordering::Greater);
        assert_eq!(c.cmp_abs_to_dyadic(5), Ordering::Less);
    }

    #[test]
    fn unit_circle_points_have_modulus_one() {
        for t in [-7i64, -2, 0, 1, 3, 12] {
            let p = GaussianRational::unit_circle(&BigRational::new(t.into(), 5.into()));
            assert!(p.abs2().is_one());
        }
    }

    #[test]
    fn abs_bounds_bracket_the_modulus() {
        let c = g(1, 1); // |c| = sqrt(2)
        let lo = c.abs_lower_bound();
        let hi = c.abs_upper_bound();
        let a2 = c.abs2();
        assert!(&lo * &lo <= a2 && &hi * &hi >= a2);
        assert!(ratio_to_f64(&(&hi - &lo)) < 1e-9);
    }

    #[test]
    fn huge_ratio_to_f64_stays_accurate() {
        let big = dyadic_pow2(5 * 40 + 2); // 2^202, beyond i64/u128
        let v = ratio_to_f64(&big);
        assert!((v.log2() - 202.0).abs() < 1e-9);
        let ratio = BigRational::new(
            dyadic_pow2(2000).numer().clone(),
            dyadic_pow2(1999).numer().clone(),
        );
        assert!((ratio_to_f64(&ratio) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn textual_round_trip() {
        for s in ["0", "1", "-1", "i", "-i", "3/2+2*i", "-3/2-2*i", "11/25+2/25*i", "1-i"] {
            let c: GaussianRational = s.parse().unwrap();
            let again: GaussianRational = c.to_string().parse().unwrap();
            assert_eq!(c, again, "round trip failed for {s}");
        }
        assert_eq!("2 + 1/3 * i".parse::<GaussianRational>().unwrap(),
                   GaussianRational::new(BigRational::from_integer(2.into()),
                                         BigRational::new(1.into(), 3.into())));
        assert!("x+i".parse::<GaussianRational>().is_err());
        assert!("1/0".parse::<GaussianRational>().is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_gaussian() -> impl Strategy<Value = GaussianRational> {
            (-40i64..40, -40i64..40, 1i64..12, 1i64..12).prop_map(|(a, b, d1, d2)| {
                GaussianRational::new(
                    BigRational::new(a.into(), d1.into()),
                    BigRational::new(b.into(), d2.into()),
                )
            })
        }

        proptest! {
            #[test]
            fn field_axioms(a in arb_gaussian(), b in arb_gaussian(), c in arb_gaussian()) {
                prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
                prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
                prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
                if !a.is_zero() {
                    prop_assert!((&a * &a.recip().unwrap()).is_one());
                }
            }

            #[test]
            fn abs2_is_multiplicative(a in arb_gaussian(), b in arb_gaussian()) {
                prop_assert_eq!((&a * &b).abs2(), a.abs2() * b.abs2());
            }

            #[test]
            fn dyadic_cmp_agrees_with_float(a in arb_gaussian(), k in -6i64..6) {
                let target = dyadic_pow2(k).to_f64().unwrap();
                let fl = a.to_float().abs();
                if (fl - target).abs() > 1e-9 {
                    let expect = if fl < target { Ordering::Less } else { Ordering::Greater };
                    prop_assert_eq!(a.cmp_abs_to_dyadic(k), expect);
                }
            }

            #[test]
            fn display_parse_round_trip(a in arb_gaussian()) {
                let s = a.to_string();
                let b: GaussianRational = s.parse().unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}
