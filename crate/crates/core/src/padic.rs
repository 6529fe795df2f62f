//! Exact p-adic primitives on finite digit windows.
//!
//! A [`PointAddress`] stores, for each of the `n` coordinates, the base-p
//! digits at exponents `low..top`. The represented coordinate is the finite
//! expansion `sum_j d_j p^j`; negative integers and rationals with a unit
//! denominator are stored through their p-adic expansion truncated at `top`.
//! Everything downstream only needs orders and the digits below some cutoff,
//! so finite windows lose nothing as long as the window is wide enough.

use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default maximum number of digits in a window produced by [`PointAddress::dot`].
pub const DEFAULT_WINDOW_CAP: usize = 64;

/// The prime `p` and the dimension `n` shared by every computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct GlobalParams {
    p: u32,
    n: usize,
}

#[derive(Deserialize)]
struct RawParams {
    p: u32,
    n: usize,
}

impl TryFrom<RawParams> for GlobalParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        GlobalParams::new(raw.p, raw.n)
    }
}

impl GlobalParams {
    pub fn new(p: u32, n: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(GlobalParams { p, n })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p_f64(&self) -> f64 {
        f64::from(self.p)
    }

    pub fn ln_p(&self) -> f64 {
        self.p_f64().ln()
    }

    /// `1 - p^{-n}`, the Haar measure of the unit sphere.
    pub fn unit_sphere_volume(&self) -> f64 {
        1.0 - self.p_f64().powi(-(self.n as i32))
    }

    /// `p^n` as an exact integer.
    pub fn p_pow_n(&self) -> u128 {
        u128::from(self.p).pow(self.n as u32)
    }
}

/// Deterministic trial-division primality test.
pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p % 2 == 0 {
        return false;
    }
    let p = u64::from(p);
    let mut d = 3u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// A p-adic order: an integer, or `+inf` for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Order {
    Finite(i64),
    Infinite,
}

impl Order {
    pub fn finite(self) -> Option<i64> {
        match self {
            Order::Finite(v) => Some(v),
            Order::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Order::Infinite
    }

    /// `p^{-ord}`, which is `0` for the infinite order.
    pub fn norm(self, p: u32) -> f64 {
        match self {
            Order::Finite(v) => f64::from(p).powf(-(v as f64)),
            Order::Infinite => 0.0,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(v) => write!(f, "{v}"),
            Order::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" | "infinity" | "+infinity" => Ok(Order::Infinite),
            other => other
                .parse::<i64>()
                .map(Order::Finite)
                .map_err(|_| Error::Parse(format!("invalid order `{other}`"))),
        }
    }
}

/// An exact rational `num / p^exp` taken modulo 1.
///
/// Always reduced: `0 <= num < p^exp`, and `p` does not divide `num` unless the
/// phase is zero, in which case `exp == 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnitPhase {
    p: u32,
    exp: u32,
    num: BigUint,
}

impl UnitPhase {
    pub fn zero(p: u32) -> Self {
        UnitPhase {
            p,
            exp: 0,
            num: BigUint::zero(),
        }
    }

    /// The phase `num / p^exp mod 1`, reduced.
    pub fn new(p: u32, num: BigUint, exp: u32) -> Self {
        let den = BigUint::from(p).pow(exp);
        let mut num = num % &den;
        let mut exp = exp;
        let pb = BigUint::from(p);
        while exp > 0 && (&num % &pb).is_zero() {
            num /= &pb;
            exp -= 1;
        }
        if num.is_zero() {
            exp = 0;
        }
        UnitPhase { p, exp, num }
    }

    pub fn from_u64(p: u32, num: u64, exp: u32) -> Self {
        Self::new(p, BigUint::from(num), exp)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    /// Exponent `L` of the denominator `p^L`.
    pub fn den_exponent(&self) -> u32 {
        self.exp
    }

    pub fn denominator(&self) -> BigUint {
        BigUint::from(self.p).pow(self.exp)
    }

    pub fn add(&self, other: &UnitPhase) -> UnitPhase {
        debug_assert_eq!(self.p, other.p);
        let exp = self.exp.max(other.exp);
        let pb = BigUint::from(self.p);
        let a = &self.num * pb.pow(exp - self.exp);
        let b = &other.num * pb.pow(exp - other.exp);
        UnitPhase::new(self.p, a + b, exp)
    }

    pub fn neg(&self) -> UnitPhase {
        if self.is_zero() {
            return self.clone();
        }
        UnitPhase::new(self.p, self.denominator() - &self.num, self.exp)
    }

    pub fn sub(&self, other: &UnitPhase) -> UnitPhase {
        self.add(&other.neg())
    }

    /// The phase as a float in `[0, 1)`.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let den = self.denominator();
        let shift = den.bits().saturating_sub(64);
        let num = (&self.num >> shift).to_f64().unwrap_or(0.0);
        let den = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
        num / den
    }

    /// `exp(2 pi i phase)`; the only rounding step of a character evaluation.
    pub fn to_complex(&self) -> Complex64 {
        let (s, c) = (TAU * self.to_f64()).sin_cos();
        Complex64::new(c, s)
    }
}

/// An exact point of `Q_p^n` given by a finite base-p digit window.
#[derive(Debug, Clone)]
pub struct PointAddress {
    p: u32,
    low: i64,
    /// `digits[i][j - low]` is the digit of coordinate `i` at exponent `j`.
    digits: Vec<Vec<u32>>,
}

impl PointAddress {
    /// The zero point with window `low..top`.
    pub fn zero(params: &GlobalParams, low: i64, top: i64) -> Self {
        let width = (top - low).max(0) as usize;
        PointAddress {
            p: params.p,
            low,
            digits: vec![vec![0; width]; params.n],
        }
    }

    /// Builds an address from explicit digit rows (least significant first).
    pub fn from_digits(params: &GlobalParams, low: i64, rows: Vec<Vec<u32>>) -> Result<Self> {
        if rows.len() != params.n {
            return Err(Error::DimensionMismatch {
                expected: params.n,
                found: rows.len(),
            });
        }
        let width = rows[0].len();
        for row in &rows {
            if row.len() != width {
                return Err(Error::invalid("digits", "rows must have equal length"));
            }
            if let Some(&d) = row.iter().find(|&&d| d >= params.p) {
                return Err(Error::invalid(
                    "digits",
                    format!("digit {d} is not below p = {}", params.p),
                ));
            }
        }
        Ok(PointAddress {
            p: params.p,
            low,
            digits: rows,
        })
    }

    /// Expands each rational coordinate `num / den` over the window `low..top`.
    ///
    /// Digits at or above `top` are dropped, so the result represents the
    /// coordinate modulo `p^top`. Fails if a coordinate has order below `low`.
    pub fn from_rationals(
        params: &GlobalParams,
        coords: &[(i128, i128)],
        low: i64,
        top: i64,
    ) -> Result<Self> {
        if coords.len() != params.n {
            return Err(Error::DimensionMismatch {
                expected: params.n,
                found: coords.len(),
            });
        }
        if top < low {
            return Err(Error::invalid("window", "top must not be below low"));
        }
        let width = (top - low) as usize;
        let rows = coords
            .iter()
            .map(|&(num, den)| rational_digits(params.p, num, den, low, width))
            .collect::<Result<Vec<_>>>()?;
        Ok(PointAddress {
            p: params.p,
            low,
            digits: rows,
        })
    }

    /// Integer coordinates. Non-negative inputs get the narrowest window
    /// starting at exponent 0; negative inputs get [`DEFAULT_WINDOW_CAP`] digits.
    pub fn from_integers(params: &GlobalParams, coords: &[i64]) -> Result<Self> {
        let p = i128::from(params.p);
        let top = if coords.iter().any(|&c| c < 0) {
            DEFAULT_WINDOW_CAP as i64
        } else {
            let max = coords.iter().copied().max().unwrap_or(0) as i128;
            let mut width = 1i64;
            let mut reach = p;
            while reach <= max {
                reach *= p;
                width += 1;
            }
            width
        };
        let pairs: Vec<_> = coords.iter().map(|&c| (i128::from(c), 1)).collect();
        Self::from_rationals(params, &pairs, 0, top)
    }

    /// A one-dimensional address for `num / den`.
    pub fn scalar(p: u32, num: i128, den: i128, low: i64, top: i64) -> Result<Self> {
        let params = GlobalParams::new(p, 1)?;
        Self::from_rationals(&params, &[(num, den)], low, top)
    }

    pub fn dim(&self) -> usize {
        self.digits.len()
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn low(&self) -> i64 {
        self.low
    }

    /// Exclusive top exponent of the window.
    pub fn top(&self) -> i64 {
        self.low + self.width() as i64
    }

    pub fn width(&self) -> usize {
        self.digits.first().map_or(0, Vec::len)
    }

    /// Digit of coordinate `i` at exponent `j`; zero outside the window.
    pub fn digit(&self, i: usize, j: i64) -> u32 {
        if j < self.low || j >= self.top() {
            0
        } else {
            self.digits[i][(j - self.low) as usize]
        }
    }

    pub fn coordinate_order(&self, i: usize) -> Order {
        match self.digits[i].iter().position(|&d| d != 0) {
            Some(pos) => Order::Finite(self.low + pos as i64),
            None => Order::Infinite,
        }
    }

    /// `min_i ord(x_i)`.
    pub fn ord(&self) -> Order {
        (0..self.dim())
            .map(|i| self.coordinate_order(i))
            .min()
            .unwrap_or(Order::Infinite)
    }

    /// `||x||_p = p^{-ord(x)}`.
    pub fn norm(&self) -> f64 {
        self.ord().norm(self.p)
    }

    pub fn is_zero(&self) -> bool {
        self.ord().is_infinite()
    }

    /// Fractional part `{x_i}_p` of one coordinate.
    pub fn coordinate_fractional_part(&self, i: usize) -> UnitPhase {
        if self.low >= 0 {
            return UnitPhase::zero(self.p);
        }
        let exp = (-self.low) as u32;
        let stop = exp.min(self.width() as u32) as usize;
        let p = BigUint::from(self.p);
        // Horner over the digits at exponents low..-1, most significant first.
        let mut num = BigUint::zero();
        for j in (0..stop).rev() {
            num = num * &p + self.digits[i][j];
        }
        UnitPhase::new(self.p, num, exp)
    }

    /// Fractional part of a scalar address.
    ///
    /// # Panics
    /// If the address is not one-dimensional.
    pub fn fractional_part(&self) -> UnitPhase {
        assert_eq!(
            self.dim(),
            1,
            "fractional part is defined for scalar addresses"
        );
        self.coordinate_fractional_part(0)
    }

    /// The additive character `chi_p(y) = exp(2 pi i {y}_p)` of a scalar address.
    pub fn character(&self) -> Complex64 {
        self.fractional_part().to_complex()
    }

    /// Exact sum; the window widens by one digit when a carry escapes the top.
    pub fn add(&self, other: &PointAddress) -> Result<PointAddress> {
        self.check_compatible(other)?;
        let low = self.low.min(other.low);
        let top = self.top().max(other.top());
        let rows = (0..self.dim())
            .map(|i| {
                let sum = self.coordinate_big(i, low) + other.coordinate_big(i, low);
                let needed = digit_count(&sum, self.p).max((top - low) as usize);
                big_to_digits(sum, self.p, needed)
            })
            .collect::<Vec<_>>();
        Ok(self.with_rows(low, rows))
    }

    /// Difference modulo `p^top` over the union window.
    ///
    /// The order of the result is exact whenever it is below `top`; points
    /// that agree on the whole union window give the zero address.
    pub fn sub(&self, other: &PointAddress) -> Result<PointAddress> {
        self.check_compatible(other)?;
        let low = self.low.min(other.low);
        let width = (self.top().max(other.top()) - low) as usize;
        let modulus = BigUint::from(self.p).pow(width as u32);
        let rows = (0..self.dim())
            .map(|i| {
                let a = self.coordinate_big(i, low) % &modulus;
                let b = other.coordinate_big(i, low) % &modulus;
                let diff = (a + &modulus - b) % &modulus;
                big_to_digits(diff, self.p, width)
            })
            .collect();
        Ok(self.with_rows(low, rows))
    }

    /// Exact dot product `sum_i x_i y_i` of the represented expansions.
    ///
    /// The result window starts at `low_x + low_y` and is as wide as the exact
    /// product needs; exceeding `cap` digits is an error.
    pub fn dot(&self, other: &PointAddress, cap: usize) -> Result<PointAddress> {
        self.check_compatible(other)?;
        let mut sum = BigUint::zero();
        for i in 0..self.dim() {
            sum += self.coordinate_big(i, self.low) * other.coordinate_big(i, other.low);
        }
        let low = self.low + other.low;
        let needed = digit_count(&sum, self.p).max(1);
        if needed > cap {
            return Err(Error::WindowOverflow { needed, cap });
        }
        let row = big_to_digits(sum, self.p, needed);
        Ok(PointAddress {
            p: self.p,
            low,
            digits: vec![row],
        })
    }

    /// Multiplication by `p^e`, which only relabels the exponents.
    pub fn shift(&self, e: i64) -> PointAddress {
        PointAddress {
            p: self.p,
            low: self.low + e,
            digits: self.digits.clone(),
        }
    }

    fn check_compatible(&self, other: &PointAddress) -> Result<()> {
        if self.p != other.p {
            return Err(Error::invalid("p", "addresses use different primes"));
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    fn with_rows(&self, low: i64, rows: Vec<Vec<u32>>) -> PointAddress {
        let width = rows.iter().map(Vec::len).max().unwrap_or(0);
        let rows = rows
            .into_iter()
            .map(|mut r| {
                r.resize(width, 0);
                r
            })
            .collect();
        PointAddress {
            p: self.p,
            low,
            digits: rows,
        }
    }

    /// Coordinate `i` as the integer `N` with `x_i = N p^base`, `base <= low`.
    fn coordinate_big(&self, i: usize, base: i64) -> BigUint {
        debug_assert!(base <= self.low);
        let p = BigUint::from(self.p);
        let mut acc = BigUint::zero();
        for &d in self.digits[i].iter().rev() {
            acc = acc * &p + d;
        }
        acc * p.pow((self.low - base) as u32)
    }
}

impl PartialEq for PointAddress {
    /// Equal digit content over the union window.
    fn eq(&self, other: &Self) -> bool {
        if self.p != other.p || self.dim() != other.dim() {
            return false;
        }
        let low = self.low.min(other.low);
        let top = self.top().max(other.top());
        (0..self.dim()).all(|i| (low..top).all(|j| self.digit(i, j) == other.digit(i, j)))
    }
}

impl Eq for PointAddress {}

/// Characteristic function of the ball `||x - a||_p <= p^r`.
pub fn ball_indicator(r: i64, x: &PointAddress, a: &PointAddress) -> Result<bool> {
    let diff = x.sub(a)?;
    Ok(match diff.ord() {
        Order::Infinite => true,
        Order::Finite(v) => v >= -r,
    })
}

/// `p^e` as an exact rational.
pub fn p_power(p: u32, e: i64) -> BigRational {
    let base = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(base)
    } else {
        BigRational::new(BigInt::one(), base)
    }
}

/// Haar measure of the sphere `S_j^n`: `p^{nj} (1 - p^{-n})`.
pub fn shell_volume(params: &GlobalParams, j: i64) -> BigRational {
    let n = params.n as i64;
    p_power(params.p, n * j) - p_power(params.p, n * (j - 1))
}

/// `int_{||xi|| = p^j} chi_p(-x . xi) d^n xi` for a point `x` of order `m`.
pub fn shell_character_integral(params: &GlobalParams, j: i64, m: Order) -> BigRational {
    let n = params.n as i64;
    match m {
        Order::Infinite => shell_volume(params, j),
        Order::Finite(m) => match j.cmp(&(m + 1)) {
            Ordering::Less => shell_volume(params, j),
            Ordering::Equal => -p_power(params.p, n * j - n),
            Ordering::Greater => BigRational::zero(),
        },
    }
}

fn digit_count(x: &BigUint, p: u32) -> usize {
    let p = BigUint::from(p);
    let mut count = 0;
    let mut reach = BigUint::one();
    while &reach <= x {
        reach *= &p;
        count += 1;
    }
    count
}

fn big_to_digits(mut x: BigUint, p: u32, width: usize) -> Vec<u32> {
    let pb = BigUint::from(p);
    let mut out = Vec::with_capacity(width);
    for _ in 0..width {
        let (q, r) = x.div_rem(&pb);
        out.push(r.to_u32().expect("digit below p"));
        x = q;
    }
    out
}

/// Digits of `num / den` at exponents `low..low + width`.
fn rational_digits(p: u32, num: i128, den: i128, low: i64, width: usize) -> Result<Vec<u32>> {
    if den == 0 {
        return Err(Error::invalid("den", "denominator is zero"));
    }
    if num == 0 {
        return Ok(vec![0; width]);
    }
    let pi = i128::from(p);
    let (mut a, mut b) = if den < 0 { (-num, -den) } else { (num, den) };
    let g = a.gcd(&b);
    a /= g;
    b /= g;
    let mut va = 0i64;
    while a % pi == 0 {
        a /= pi;
        va += 1;
    }
    let mut vb = 0i64;
    while b % pi == 0 {
        b /= pi;
        vb += 1;
    }
    let order = va - vb;
    if order < low {
        return Err(Error::BelowWindow { order, low });
    }
    let inv_b = mod_inverse(b.rem_euclid(pi), pi);
    let mut out = vec![0u32; width];
    let shift = (order - low) as usize;
    // a/b is a p-adic unit (or a/b has b coprime to p): peel digits one at a time.
    for slot in out.iter_mut().skip(shift) {
        let d = (a.rem_euclid(pi) * inv_b).rem_euclid(pi);
        *slot = d as u32;
        a = (a - d * b) / pi;
    }
    Ok(out)
}

fn mod_inverse(a: i128, m: i128) -> i128 {
    let (mut old_r, mut r) = (a, m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(m)
}
