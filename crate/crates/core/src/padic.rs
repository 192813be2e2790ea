//! Fixed-precision arithmetic in ℚ_p for a rational prime `p`.
//!
//! A nonzero element is stored as `p^v · u` where the unit `u` is known to
//! `N` base-`p` digits (relative precision). Results of arithmetic carry the
//! precision actually justified by the operands: cancellation in a sum
//! shortens the digit vector instead of inventing low-order digits.

use std::cmp::{max, min, Ordering};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Trial-division primality test; the primes used here are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub(crate) fn check_prime(p: u32) -> Result<()> {
    if is_prime(p as u64) {
        Ok(())
    } else {
        Err(Error::NotPrime(p as u64))
    }
}

/// `p^n` as a big integer.
pub(crate) fn big_pow(p: u32, n: usize) -> BigInt {
    num_traits::pow(BigInt::from(p), n)
}

/// Splits off the largest power of `p` dividing a nonzero `x`.
pub(crate) fn strip_prime(x: &BigInt, p: u32) -> (i64, BigInt) {
    debug_assert!(!x.is_zero());
    let bp = BigInt::from(p);
    let mut v = 0;
    let mut rest = x.clone();
    loop {
        let (q, r) = rest.div_rem(&bp);
        if !r.is_zero() {
            return (v, rest);
        }
        rest = q;
        v += 1;
    }
}

/// Inverse of `a` modulo `m`, if it exists; result in `[0, m)`.
pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

fn digits_to_big(digits: &[u32], p: u32) -> BigUint {
    let bp = BigUint::from(p);
    digits.iter().rev().fold(BigUint::zero(), |acc, &d| acc * &bp + BigUint::from(d))
}

fn big_to_digits(mut x: BigUint, p: u32, n: usize) -> Vec<u32> {
    let bp = BigUint::from(p);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let (q, r) = x.div_rem(&bp);
        out.push(r.to_u32().unwrap_or(0));
        x = q;
    }
    out
}

/// `p^n` when it fits in a `u64`.
fn small_modulus(p: u32, n: usize) -> Option<u64> {
    let n = u32::try_from(n).ok()?;
    (p as u64).checked_pow(n)
}

fn digits_to_u64(digits: &[u32], p: u32) -> u64 {
    digits.iter().rev().fold(0u64, |acc, &d| acc * p as u64 + d as u64)
}

fn u64_to_digits(mut x: u64, p: u32, n: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push((x % p as u64) as u32);
        x /= p as u64;
    }
    out
}

/// An element of ℚ_p known to finite precision.
#[derive(Clone, Debug)]
pub struct PadicNumber {
    prime: u32,
    valuation: i64,
    /// Unit part, little-endian; `digits[0] != 0` for nonzero values.
    digits: Vec<u32>,
    /// Nominal relative precision of a zero value; equals `digits.len()` otherwise.
    precision: usize,
    zero: bool,
}

impl PartialEq for PadicNumber {
    fn eq(&self, other: &Self) -> bool {
        if self.prime != other.prime || self.zero != other.zero {
            return false;
        }
        self.zero || (self.valuation == other.valuation && self.digits == other.digits)
    }
}

impl Eq for PadicNumber {}

impl std::hash::Hash for PadicNumber {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.prime.hash(state);
        self.zero.hash(state);
        if !self.zero {
            self.valuation.hash(state);
            self.digits.hash(state);
        }
    }
}

impl PadicNumber {
    pub fn zero(prime: u32, precision: usize) -> Self {
        PadicNumber { prime, valuation: 0, digits: Vec::new(), precision, zero: true }
    }

    pub fn one(prime: u32, precision: usize) -> Self {
        let mut digits = vec![0; precision.max(1)];
        digits[0] = 1;
        PadicNumber { prime, valuation: 0, precision: digits.len(), digits, zero: false }
    }

    /// Builds an element from a valuation and unit digits, stripping any
    /// leading zero digits into the valuation.
    pub fn from_digits(prime: u32, valuation: i64, digits: Vec<u32>) -> Result<Self> {
        check_prime(prime)?;
        if let Some(&d) = digits.iter().find(|&&d| d >= prime) {
            return Err(Error::Malformed(format!("digit {d} out of range for p = {prime}")));
        }
        Ok(Self::normalized(prime, valuation, digits))
    }

    fn normalized(prime: u32, valuation: i64, mut digits: Vec<u32>) -> Self {
        match digits.iter().position(|&d| d != 0) {
            None => Self::zero(prime, digits.len()),
            Some(z) => {
                digits.drain(..z);
                PadicNumber { prime, valuation: valuation + z as i64, precision: digits.len(), digits, zero: false }
            }
        }
    }

    pub fn from_integer(n: i64, prime: u32, precision: usize) -> Result<Self> {
        Self::from_rational(n, 1, prime, precision)
    }

    /// Expansion of `numerator / denominator` to `precision` significant digits.
    pub fn from_rational(numerator: i64, denominator: i64, prime: u32, precision: usize) -> Result<Self> {
        Self::from_ratio(&BigInt::from(numerator), &BigInt::from(denominator), prime, precision)
    }

    pub fn from_ratio(numerator: &BigInt, denominator: &BigInt, prime: u32, precision: usize) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        check_prime(prime)?;
        if precision == 0 {
            return Err(Error::InvalidArgument("precision must be at least 1".into()));
        }
        if numerator.is_zero() {
            return Ok(Self::zero(prime, precision));
        }
        let (vn, n) = strip_prime(numerator, prime);
        let (vd, d) = strip_prime(denominator, prime);
        let modulus = big_pow(prime, precision);
        let inv = mod_inverse(&d, &modulus).expect("unit is invertible");
        let unit = (n * inv).mod_floor(&modulus);
        let digits = big_to_digits(unit.to_biguint().expect("nonnegative"), prime, precision);
        Ok(Self::normalized(prime, vn - vd, digits))
    }

    pub fn from_rational_big(q: &BigRational, prime: u32, precision: usize) -> Result<Self> {
        Self::from_ratio(q.numer(), q.denom(), prime, precision)
    }

    /// The element of ℤ_p with representative `value`, known modulo `p^abs_precision`.
    pub fn from_integer_mod(value: &BigInt, prime: u32, abs_precision: usize) -> Self {
        let modulus = big_pow(prime, abs_precision);
        let v = value.mod_floor(&modulus).to_biguint().expect("nonnegative");
        Self::normalized(prime, 0, big_to_digits(v, prime, abs_precision))
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// `None` stands for the valuation `+∞` of zero.
    pub fn valuation(&self) -> Option<i64> {
        (!self.zero).then_some(self.valuation)
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// Number of significant digits of the unit part.
    pub fn precision(&self) -> usize {
        self.precision
    }

    /// `v + N`: the value is known modulo `p` to this power. `None` for zero.
    pub fn absolute_precision(&self) -> Option<i64> {
        (!self.zero).then(|| self.valuation + self.digits.len() as i64)
    }

    /// Digit at absolute position `pos` (coefficient of `p^pos`).
    pub fn digit_at(&self, pos: i64) -> u32 {
        if self.zero || pos < self.valuation {
            return 0;
        }
        self.digits.get((pos - self.valuation) as usize).copied().unwrap_or(0)
    }

    /// Normalized absolute value `p^(-v)`, exactly.
    pub fn norm(&self) -> BigRational {
        if self.zero {
            return BigRational::zero();
        }
        let pow = big_pow(self.prime, self.valuation.unsigned_abs() as usize);
        if self.valuation >= 0 {
            BigRational::new(BigInt::one(), pow)
        } else {
            BigRational::from_integer(pow)
        }
    }

    pub fn norm_f64(&self) -> f64 {
        if self.zero {
            0.0
        } else {
            (self.prime as f64).powf(-(self.valuation as f64))
        }
    }

    fn check_same_prime(&self, other: &Self) -> Result<()> {
        if self.prime == other.prime {
            Ok(())
        } else {
            Err(Error::PrimeMismatch(self.prime, other.prime))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        if self.zero {
            return Ok(other.clone());
        }
        if other.zero {
            return Ok(self.clone());
        }
        let p = self.prime as u64;
        let v = min(self.valuation, other.valuation);
        let abs = min(self.absolute_precision().unwrap(), other.absolute_precision().unwrap());
        let len = (abs - v) as usize;
        let mut digits = Vec::with_capacity(len);
        let mut carry = 0u64;
        for i in 0..len as i64 {
            let s = self.digit_at(v + i) as u64 + other.digit_at(v + i) as u64 + carry;
            digits.push((s % p) as u32);
            carry = s / p;
        }
        Ok(Self::normalized(self.prime, v, digits))
    }

    pub fn neg(&self) -> Self {
        if self.zero {
            return self.clone();
        }
        let p = self.prime;
        let digits = self.digits.iter().enumerate().map(|(i, &d)| if i == 0 { p - d } else { p - 1 - d }).collect();
        PadicNumber { digits, ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        if self.zero || other.zero {
            return Ok(Self::zero(self.prime, min(self.precision, other.precision)));
        }
        let n = min(self.digits.len(), other.digits.len());
        let digits = match small_modulus(self.prime, n) {
            Some(m) => {
                let a = digits_to_u64(&self.digits[..n], self.prime) as u128;
                let b = digits_to_u64(&other.digits[..n], self.prime) as u128;
                u64_to_digits(((a * b) % m as u128) as u64, self.prime, n)
            }
            None => {
                let m = big_pow(self.prime, n).to_biguint().unwrap();
                let a = digits_to_big(&self.digits[..n], self.prime);
                let b = digits_to_big(&other.digits[..n], self.prime);
                big_to_digits((a * b) % m, self.prime, n)
            }
        };
        Ok(PadicNumber {
            prime: self.prime,
            valuation: self.valuation + other.valuation,
            precision: n,
            digits,
            zero: false,
        })
    }

    pub fn inv(&self) -> Result<Self> {
        if self.zero {
            return Err(Error::DivisionByZero);
        }
        let n = self.digits.len();
        let m = big_pow(self.prime, n);
        let u = BigInt::from(digits_to_big(&self.digits, self.prime));
        let w = mod_inverse(&u, &m).expect("unit is invertible");
        Ok(PadicNumber {
            prime: self.prime,
            valuation: -self.valuation,
            precision: n,
            digits: big_to_digits(w.to_biguint().unwrap(), self.prime, n),
            zero: false,
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        self.mul(&other.inv()?)
    }

    /// Multiplies by `p^k` (shifts the valuation).
    pub fn shift(&self, k: i64) -> Self {
        let mut out = self.clone();
        if !out.zero {
            out.valuation += k;
        }
        out
    }

    /// Reduces the value modulo `p^abs_precision`.
    pub fn truncate_abs(&self, abs_precision: i64) -> Self {
        if self.zero || abs_precision <= self.valuation {
            return Self::zero(self.prime, 0);
        }
        let keep = min(self.digits.len() as i64, abs_precision - self.valuation) as usize;
        PadicNumber { digits: self.digits[..keep].to_vec(), precision: keep, ..self.clone() }
    }

    /// Reads the value as exact and returns it modulo `p^abs_precision`
    /// with all digits below that position present (zero-padded).
    pub fn representative(&self, abs_precision: i64) -> Self {
        let t = self.truncate_abs(abs_precision);
        if t.zero {
            return t;
        }
        let mut digits = t.digits;
        digits.resize((abs_precision - t.valuation) as usize, 0);
        PadicNumber { precision: digits.len(), digits, ..t }
    }

    /// Keeps at most `precision` significant digits.
    pub fn with_precision(&self, precision: usize) -> Self {
        if self.zero {
            return Self::zero(self.prime, precision);
        }
        let keep = min(precision, self.digits.len());
        PadicNumber { digits: self.digits[..keep].to_vec(), precision: keep, ..self.clone() }
    }

    /// Integer representative in `[0, p^abs_precision)` of an element of ℤ_p.
    pub fn to_integer_mod(&self, abs_precision: usize) -> Result<BigInt> {
        if self.zero {
            return Ok(BigInt::zero());
        }
        if self.valuation < 0 {
            return Err(Error::NegativeValuation(self.valuation));
        }
        let abs = abs_precision as i64;
        let mut acc = BigInt::zero();
        for pos in (0..abs).rev() {
            acc = acc * self.prime + self.digit_at(pos);
        }
        Ok(acc)
    }

    /// Compares values modulo `p^abs_precision`.
    pub fn eq_mod(&self, other: &Self, abs_precision: i64) -> bool {
        self.prime == other.prime && self.truncate_abs(abs_precision) == other.truncate_abs(abs_precision)
    }

    /// Digit-series value `Σ s_j · base^(-j-1)` over the absolute digits of
    /// an element of ℤ_p. With `base == p` this maps ℤ_p onto `[0, 1]`; a
    /// larger base leaves gaps and yields a Cantor set.
    pub fn cantor_embed(&self, base: u64) -> Result<f64> {
        if base < self.prime as u64 {
            return Err(Error::InvalidArgument(format!("embedding base {base} is smaller than p = {}", self.prime)));
        }
        if self.zero {
            return Ok(0.0);
        }
        if self.valuation < 0 {
            return Err(Error::NegativeValuation(self.valuation));
        }
        let inv = 1.0 / base as f64;
        let mut scale = inv.powi(self.valuation as i32 + 1);
        let mut acc = 0.0;
        for &d in &self.digits {
            acc += d as f64 * scale;
            scale *= inv;
        }
        Ok(acc)
    }

    /// Little-endian digit string. Elements of ℤ_p are written with their
    /// absolute digits `s0 s1 …` (leading zeros encode the valuation);
    /// otherwise the string is prefixed by `v=k:` and lists the unit digits.
    /// Primes above 36 separate digits by commas.
    pub fn to_digit_string(&self) -> String {
        if self.zero {
            return "0".into();
        }
        let render = |ds: &mut dyn Iterator<Item = u32>| -> String {
            if self.prime <= 36 {
                ds.map(|d| std::char::from_digit(d, 36).unwrap()).collect()
            } else {
                ds.map(|d| d.to_string()).collect::<Vec<_>>().join(",")
            }
        };
        if self.valuation >= 0 {
            let mut it = std::iter::repeat_n(0, self.valuation as usize).chain(self.digits.iter().copied());
            render(&mut it)
        } else {
            let mut it = self.digits.iter().copied();
            format!("v={}:{}", self.valuation, render(&mut it))
        }
    }

    /// Inverse of [`PadicNumber::to_digit_string`].
    pub fn parse_digit_string(s: &str, prime: u32) -> Result<Self> {
        check_prime(prime)?;
        let s = s.trim();
        let (valuation, body) = match s.strip_prefix("v=") {
            Some(rest) => {
                let (k, body) =
                    rest.split_once(':').ok_or_else(|| Error::Malformed(format!("missing ':' in `{s}`")))?;
                let k = k.parse::<i64>().map_err(|_| Error::Malformed(format!("bad valuation in `{s}`")))?;
                (k, body)
            }
            None => (0, s),
        };
        let digits: Vec<u32> = if prime <= 36 {
            body.chars()
                .map(|c| c.to_digit(36).ok_or_else(|| Error::Malformed(format!("bad digit `{c}`"))))
                .collect::<Result<_>>()?
        } else {
            body.split(',')
                .map(|t| t.trim().parse::<u32>().map_err(|_| Error::Malformed(format!("bad digit `{t}`"))))
                .collect::<Result<_>>()?
        };
        if digits.is_empty() {
            return Err(Error::Malformed("empty digit string".into()));
        }
        Self::from_digits(prime, valuation, digits)
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_digit_string())
    }
}

/// Lexicographic order of absolute digit sequences `s0 s1 …` of elements
/// of ℤ_p (the order in which [`PadicNumber::cantor_embed`] is monotone).
pub fn digit_lex_cmp(x: &PadicNumber, y: &PadicNumber, abs_precision: i64) -> Ordering {
    for pos in 0..abs_precision {
        match x.digit_at(pos).cmp(&y.digit_at(pos)) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Evaluates an integer polynomial (ascending coefficients) at `x`.
pub fn eval_poly(coeffs: &[BigInt], x: &BigInt) -> BigInt {
    coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn derivative(coeffs: &[BigInt]) -> Vec<BigInt> {
    coeffs.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect()
}

/// Lifts a simple root `r` of `f` modulo `p` to the unique root in ℤ_p
/// congruent to `r`, known modulo `p^precision`. Coefficients ascending.
pub fn hensel_lift(coeffs: &[i64], prime: u32, residue: u32, precision: usize) -> Result<PadicNumber> {
    let big: Vec<BigInt> = coeffs.iter().map(|&c| BigInt::from(c)).collect();
    hensel_lift_big(&big, prime, residue, precision)
}

pub fn hensel_lift_big(coeffs: &[BigInt], prime: u32, residue: u32, precision: usize) -> Result<PadicNumber> {
    check_prime(prime)?;
    if precision == 0 {
        return Err(Error::InvalidArgument("precision must be at least 1".into()));
    }
    let bp = BigInt::from(prime);
    let r = BigInt::from(residue % prime);
    let df = derivative(coeffs);
    if !eval_poly(coeffs, &r).mod_floor(&bp).is_zero() {
        return Err(Error::HenselPrecondition(format!("f({}) is not divisible by {prime}", residue % prime)));
    }
    if eval_poly(&df, &r).mod_floor(&bp).is_zero() {
        return Err(Error::HenselPrecondition(format!(
            "f'({}) is divisible by {prime}; the root is not simple",
            residue % prime
        )));
    }
    let modulus = big_pow(prime, precision);
    let mut x = r;
    // Newton steps double the number of correct digits.
    let max_steps = 2 + (usize::BITS - precision.leading_zeros()) as usize;
    for _ in 0..=max_steps {
        let fx = eval_poly(coeffs, &x).mod_floor(&modulus);
        if fx.is_zero() {
            return Ok(PadicNumber::from_integer_mod(&x, prime, precision));
        }
        let dfx = eval_poly(&df, &x);
        let inv = mod_inverse(&dfx, &modulus).expect("f'(x) is a unit");
        x = (x - fx * inv).mod_floor(&modulus);
    }
    unreachable!("Newton iteration converges for a simple root")
}

/// Ultrametric bound helper: `max(‖x‖, ‖y‖)`.
pub fn max_norm(x: &PadicNumber, y: &PadicNumber) -> BigRational {
    max(x.norm(), y.norm())
}

impl PadicNumber {
    /// `self ≡ n (mod p^abs_precision)` for an element of ℤ_p.
    pub fn congruent_to_integer(&self, n: &BigInt, abs_precision: usize) -> bool {
        let m = big_pow(self.prime, abs_precision);
        match self.to_integer_mod(abs_precision) {
            Ok(x) => (x - n).mod_floor(&m).is_zero(),
            Err(_) => false,
        }
    }
}
