//! Exact rationals and the ordered bound algebra used by DBMs.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("undefined sum of +inf and -inf")]
    UndefinedSum,
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
    #[error("division by zero")]
    DivisionByZero,
}

/// An exact rational number in lowest terms with a positive denominator.
///
/// Values whose numerator and denominator fit in `i64` use an inline
/// representation; everything else falls back to a big rational. The two
/// representations never overlap, so derived equality is structural.
#[derive(Clone)]
pub struct Rational(Repr);

#[derive(Clone)]
enum Repr {
    Small(i64, i64),
    Big(Box<BigRational>),
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if let (Ok(x), Ok(y)) = (u64::try_from(a), u64::try_from(b)) {
        return gcd_u64(x, y) as u128;
    }
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl Rational {
    pub fn zero() -> Self {
        Rational(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Rational(Repr::Small(1, 1))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational::from_i128(n as i128, 1)
    }

    /// Builds `num/den`. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational::from_i128(num as i128, den as i128)
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Rational::from_bigrational(BigRational::new(num, den))
    }

    fn from_i64(num: i64, den: i64) -> Self {
        if num == 0 {
            return Rational::zero();
        }
        if num == i64::MIN || den == i64::MIN {
            return Rational::from_i128_slow(num as i128, den as i128);
        }
        let (mut n, mut d) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd_u64(n.unsigned_abs(), d as u64) as i64;
        if g > 1 {
            n /= g;
            d /= g;
        }
        Rational(Repr::Small(n, d))
    }

    fn from_i128(num: i128, den: i128) -> Self {
        match (i64::try_from(num), i64::try_from(den)) {
            (Ok(n), Ok(d)) => Rational::from_i64(n, d),
            _ => Rational::from_i128_slow(num, den),
        }
    }

    fn from_i128_slow(mut num: i128, mut den: i128) -> Self {
        if den < 0 {
            num = -num;
            den = -den;
        }
        let g = gcd_u128(num.unsigned_abs(), den as u128) as i128;
        if g > 1 {
            num /= g;
            den /= g;
        }
        if num == 0 {
            return Rational::zero();
        }
        match (i64::try_from(num), i64::try_from(den)) {
            (Ok(n), Ok(d)) if n != i64::MIN => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(Box::new(BigRational::new_raw(
                BigInt::from(num),
                BigInt::from(den),
            )))),
        }
    }

    fn from_bigrational(r: BigRational) -> Self {
        // BigRational::new already reduces and normalizes the sign.
        if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
            if n != i64::MIN {
                return Rational(Repr::Small(n, d));
            }
        }
        Rational(Repr::Big(Box::new(r)))
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    /// `true` if the value is held in the arbitrary-precision representation.
    pub fn is_big(&self) -> bool {
        matches!(self.0, Repr::Big(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1, 1))
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n > 0,
            Repr::Big(b) => b.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn abs(&self) -> Rational {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => {
                assert!(*n != 0, "reciprocal of zero");
                Rational::from_i128(*d as i128, *n as i128)
            }
            Repr::Big(b) => Rational::from_bigrational(b.recip()),
        }
    }

    pub fn floor(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, d) => BigInt::from(Integer::div_floor(n, d)),
            Repr::Big(b) => b.floor().to_integer(),
        }
    }

    pub fn ceil(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, d) => BigInt::from(Integer::div_ceil(n, d)),
            Repr::Big(b) => b.ceil().to_integer(),
        }
    }

    /// Floor as `i64`; panics if out of range.
    pub fn floor_i64(&self) -> i64 {
        self.floor().to_i64().expect("floor out of i64 range")
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn min(self, other: Rational) -> Rational {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Rational) -> Rational {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Decimal rendering with at most `digits` fractional digits, trailing
    /// zeros trimmed. Exact when the expansion terminates within `digits`.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let neg = self.is_negative();
        let a = self.abs();
        let num = a.numer();
        let den = a.denom();
        let (int, mut rem) = num.div_rem(&den);
        let mut frac = String::new();
        for _ in 0..digits {
            if rem.is_zero() {
                break;
            }
            rem *= 10;
            let (q, r) = rem.div_rem(&den);
            frac.push_str(&q.to_string());
            rem = r;
        }
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        s.push_str(&int.to_string());
        if !frac.is_empty() {
            s.push('.');
            s.push_str(&frac);
        }
        s
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational::from_integer(n as i64)
    }
}

impl From<usize> for Rational {
    fn from(n: usize) -> Self {
        Rational::from_i128(n as i128, 1)
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => a == c && b == d,
            (Repr::Big(x), Repr::Big(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(n, d) => {
                0u8.hash(state);
                n.hash(state);
                d.hash(state);
            }
            Repr::Big(b) => {
                1u8.hash(state);
                b.numer().hash(state);
                b.denom().hash(state);
            }
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                ((*a as i128) * (*d as i128)).cmp(&((*c as i128) * (*b as i128)))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn add_impl(x: &Rational, y: &Rational) -> Rational {
    match (&x.0, &y.0) {
        (Repr::Small(a, b), Repr::Small(c, d)) => {
            if b == d {
                return match a.checked_add(*c) {
                    Some(n) => Rational::from_i64(n, *b),
                    None => Rational::from_i128(*a as i128 + *c as i128, *b as i128),
                };
            }
            let g = gcd_u64(*b as u64, *d as u64) as i64;
            let (bg, dg) = (b / g, d / g);
            let fast = a
                .checked_mul(dg)
                .zip(c.checked_mul(bg))
                .and_then(|(p, q)| p.checked_add(q))
                .zip(b.checked_mul(dg));
            match fast {
                Some((n, den)) => Rational::from_i64(n, den),
                None => {
                    let n = (*a as i128) * (dg as i128) + (*c as i128) * (bg as i128);
                    Rational::from_i128(n, (*b as i128) * (dg as i128))
                }
            }
        }
        _ => Rational::from_bigrational(x.to_big() + y.to_big()),
    }
}

fn mul_impl(x: &Rational, y: &Rational) -> Rational {
    match (&x.0, &y.0) {
        (Repr::Small(a, b), Repr::Small(c, d)) => {
            if *a == 0 || *c == 0 {
                return Rational::zero();
            }
            let g1 = gcd_u64(a.unsigned_abs(), *d as u64) as i64;
            let g2 = gcd_u64(c.unsigned_abs(), *b as u64) as i64;
            let (a, d) = (a / g1, d / g1);
            let (c, b) = (c / g2, b / g2);
            match (a.checked_mul(c), b.checked_mul(d)) {
                (Some(n), Some(den)) if n != i64::MIN => Rational(Repr::Small(n, den)),
                _ => Rational::from_i128((a as i128) * (c as i128), (b as i128) * (d as i128)),
            }
        }
        _ => Rational::from_bigrational(x.to_big() * y.to_big()),
    }
}

fn neg_impl(x: &Rational) -> Rational {
    match &x.0 {
        Repr::Small(n, d) => Rational(Repr::Small(-n, *d)),
        Repr::Big(b) => Rational::from_bigrational(-(**b).clone()),
    }
}

fn div_impl(x: &Rational, y: &Rational) -> Rational {
    assert!(!y.is_zero(), "division by zero");
    mul_impl(x, &y.recip())
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                $f(self, rhs)
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                $f(&self, &rhs)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                $f(&self, rhs)
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                $f(self, &rhs)
            }
        }
    };
}

binop!(Add, add, add_impl);
binop!(Mul, mul, mul_impl);
binop!(Div, div, div_impl);

fn sub_impl(x: &Rational, y: &Rational) -> Rational {
    add_impl(x, &neg_impl(y))
}
binop!(Sub, sub, sub_impl);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        neg_impl(&self)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        neg_impl(self)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = add_impl(self, rhs);
    }
}

impl AddAssign<Rational> for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = add_impl(self, &rhs);
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        *self = sub_impl(self, rhs);
    }
}

impl SubAssign<Rational> for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        *self = sub_impl(self, &rhs);
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        *self = mul_impl(self, rhs);
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl fmt::Display for Rational {
    /// Always `p/q`, including integers (`1/1`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = NumericError;

    /// Accepts `p/q`, integers and finite decimals such as `0.24`, all exact.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let err = || NumericError::Parse(s.to_string());
        if t.is_empty() {
            return Err(err());
        }
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| err())?;
            let q: BigInt = q.trim().parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(NumericError::DivisionByZero);
            }
            return Ok(Rational::from_big(p, q));
        }
        if let Some((ip, fp)) = t.split_once('.') {
            let neg = ip.starts_with('-');
            let ip_digits = ip.trim_start_matches(['-', '+']);
            let valid = |x: &str| x.chars().all(|c| c.is_ascii_digit());
            if !valid(ip_digits) || !valid(fp) || (ip_digits.is_empty() && fp.is_empty()) {
                return Err(err());
            }
            let digits = format!("{}{}", if ip_digits.is_empty() { "0" } else { ip_digits }, fp);
            let mut num: BigInt = digits.parse().map_err(|_| err())?;
            if neg {
                num = -num;
            }
            let den = BigInt::from(10u32).pow(fp.len() as u32);
            return Ok(Rational::from_big(num, den));
        }
        let n: BigInt = t.parse().map_err(|_| err())?;
        Ok(Rational::from_big(n, BigInt::one()))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Strictness of a bound. `Strict` orders below `NonStrict`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strictness {
    Strict,
    NonStrict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BoundValue {
    NegInf,
    Fin(i64),
    PosInf,
}

/// An element of `(Z ∪ {±∞}) × {<, ≤}` ordered lexicographically.
///
/// Infinite values are always stored with `Strict`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Bound {
    value: BoundValue,
    strictness: Strictness,
}

impl Bound {
    pub const INF: Bound = Bound { value: BoundValue::PosInf, strictness: Strictness::Strict };
    pub const NEG_INF: Bound = Bound { value: BoundValue::NegInf, strictness: Strictness::Strict };
    pub const LE_ZERO: Bound = Bound { value: BoundValue::Fin(0), strictness: Strictness::NonStrict };
    pub const LT_ZERO: Bound = Bound { value: BoundValue::Fin(0), strictness: Strictness::Strict };

    pub fn new(value: BoundValue, strictness: Strictness) -> Bound {
        match value {
            BoundValue::Fin(_) => Bound { value, strictness },
            _ => Bound { value, strictness: Strictness::Strict },
        }
    }

    pub fn le(a: i64) -> Bound {
        Bound { value: BoundValue::Fin(a), strictness: Strictness::NonStrict }
    }

    pub fn lt(a: i64) -> Bound {
        Bound { value: BoundValue::Fin(a), strictness: Strictness::Strict }
    }

    pub fn value(&self) -> BoundValue {
        self.value
    }

    pub fn strictness(&self) -> Strictness {
        self.strictness
    }

    pub fn finite(&self) -> Option<i64> {
        match self.value {
            BoundValue::Fin(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_strict(&self) -> bool {
        self.strictness == Strictness::Strict
    }

    pub fn is_pos_inf(&self) -> bool {
        self.value == BoundValue::PosInf
    }

    pub fn is_neg_inf(&self) -> bool {
        self.value == BoundValue::NegInf
    }

    /// `(a,◁1) + (b,◁2) = (a+b, min(◁1,◁2))`.
    pub fn checked_add(self, other: Bound) -> Result<Bound, NumericError> {
        use BoundValue::*;
        let value = match (self.value, other.value) {
            (PosInf, NegInf) | (NegInf, PosInf) => return Err(NumericError::UndefinedSum),
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
            (Fin(a), Fin(b)) => Fin(a + b),
        };
        Ok(Bound::new(value, self.strictness.min(other.strictness)))
    }

    pub fn min(self, other: Bound) -> Bound {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Bound) -> Bound {
        std::cmp::max(self, other)
    }

    /// Does `d ◁ a` hold?
    pub fn admits(&self, d: &Rational) -> bool {
        match self.value {
            BoundValue::PosInf => true,
            BoundValue::NegInf => false,
            BoundValue::Fin(a) => {
                let a = Rational::from_integer(a);
                match self.strictness {
                    Strictness::Strict => *d < a,
                    Strictness::NonStrict => *d <= a,
                }
            }
        }
    }

    /// Position on the half-integer lattice: `(a,≤) ↦ 2a`, `(a,<) ↦ 2a−1`.
    pub fn half_index(&self) -> Option<i64> {
        match (self.value, self.strictness) {
            (BoundValue::Fin(a), Strictness::NonStrict) => Some(2 * a),
            (BoundValue::Fin(a), Strictness::Strict) => Some(2 * a - 1),
            _ => None,
        }
    }

    /// Inverse of [`Bound::half_index`].
    pub fn from_half_index(k: i64) -> Bound {
        if k % 2 == 0 {
            Bound::le(k / 2)
        } else {
            Bound::lt((k + 1) / 2)
        }
    }
}

/// Free-function form of [`Bound::checked_add`].
pub fn bound_add(a: Bound, b: Bound) -> Result<Bound, NumericError> {
    a.checked_add(b)
}

pub fn bound_min(a: Bound, b: Bound) -> Bound {
    a.min(b)
}

pub fn bound_max(a: Bound, b: Bound) -> Bound {
    a.max(b)
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.value, self.strictness) {
            (BoundValue::PosInf, _) => write!(f, "inf"),
            (BoundValue::NegInf, _) => write!(f, "-inf"),
            (BoundValue::Fin(a), Strictness::Strict) => write!(f, "<{a}"),
            (BoundValue::Fin(a), Strictness::NonStrict) => write!(f, "<={a}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn rational_basics() {
        assert_eq!(r("2/4"), Rational::new(1, 2));
        assert_eq!(r("-3/-6").to_string(), "1/2");
        assert_eq!(r("0.24"), r("6/25"));
        assert_eq!(r("-0.5"), r("-1/2"));
        assert_eq!(r("7").to_string(), "7/1");
        assert_eq!(Rational::one().to_string(), "1/1");
        assert!(r("1/3") < r("1/2"));
        assert_eq!(r("1/3") + r("1/6"), r("1/2"));
        assert_eq!(r("2/5") * r("3/5"), r("6/25"));
        assert_eq!(r("1/2") / r("1/4"), r("2"));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert!(".".parse::<Rational>().is_err());
    }

    #[test]
    fn rational_overflow_promotes() {
        let big = Rational::from_integer(i64::MAX);
        let sq = &big * &big;
        assert_eq!(sq.numer(), BigInt::from(i64::MAX) * BigInt::from(i64::MAX));
        let back = &sq / &big;
        assert_eq!(back, big);
        assert!(matches!(back.0, Repr::Small(..)));
        let tiny = Rational::new(1, i64::MAX);
        let t2 = &tiny * &tiny;
        assert!(t2 < tiny);
        assert_eq!((&t2 / &tiny), tiny);
        let m = Rational::from_integer(i64::MIN);
        assert_eq!(-(-&m), m);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(r("687/1250").to_decimal_string(10), "0.5496");
        assert_eq!(r("27/50").to_decimal_string(10), "0.54");
        assert_eq!(r("1/3").to_decimal_string(4), "0.3333");
        assert_eq!(r("-5/2").to_decimal_string(4), "-2.5");
        assert_eq!(r("1").to_decimal_string(4), "1");
    }

    #[test]
    fn floor_ceil() {
        assert_eq!(r("-1/2").floor(), BigInt::from(-1));
        assert_eq!(r("-1/2").ceil(), BigInt::from(0));
        assert_eq!(r("5/2").floor(), BigInt::from(2));
        assert_eq!(r("5/2").ceil(), BigInt::from(3));
        assert_eq!(r("3").ceil(), BigInt::from(3));
    }

    #[test]
    fn bound_examples() {
        assert_eq!(bound_add(Bound::le(2), Bound::lt(3)).unwrap(), Bound::lt(5));
        assert_eq!(bound_add(Bound::LE_ZERO, Bound::LE_ZERO).unwrap(), Bound::LE_ZERO);
        assert_eq!(bound_add(Bound::INF, Bound::le(-3)).unwrap(), Bound::INF);
        assert_eq!(bound_add(Bound::INF, Bound::NEG_INF), Err(NumericError::UndefinedSum));
        assert_eq!(bound_min(Bound::lt(1), Bound::le(1)), Bound::lt(1));
        assert_eq!(bound_max(Bound::LE_ZERO, Bound::lt(5)), Bound::lt(5));
        assert_eq!(bound_min(Bound::NEG_INF, Bound::LE_ZERO), Bound::NEG_INF);
    }

    #[test]
    fn infinities_normalize() {
        let a = Bound::new(BoundValue::PosInf, Strictness::NonStrict);
        assert_eq!(a, Bound::INF);
        let b = Bound::new(BoundValue::NegInf, Strictness::NonStrict);
        assert_eq!(b, Bound::NEG_INF);
        assert!(Bound::NEG_INF < Bound::le(-1000));
        assert!(Bound::INF > Bound::le(1000));
    }

    #[test]
    fn bound_display_and_half_index() {
        assert_eq!(Bound::le(5).to_string(), "<=5");
        assert_eq!(Bound::lt(5).to_string(), "<5");
        assert_eq!(Bound::INF.to_string(), "inf");
        for k in -9..=9 {
            assert_eq!(Bound::from_half_index(k).half_index(), Some(k));
        }
        assert_eq!(Bound::lt(1).half_index(), Some(1));
        assert_eq!(Bound::le(-2).half_index(), Some(-4));
    }

    #[test]
    fn serde_roundtrip() {
        let x = r("-17/4");
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, "\"-17/4\"");
        let y: Rational = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }
}
