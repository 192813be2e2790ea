//! Exact arithmetic in real quadratic fields ℚ(√D) together with the real
//! embedding (positive square root) and the embeddings into ℚ_p for primes
//! that split in the field.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::{check_prime, hensel_lift_big, PadicNumber};

/// `(a + b√D) / c` in lowest terms with `c > 0`. Rationals have `b = 0`
/// and are stored with `D = 1`, so they combine with any field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticNumber {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: u64,
}

/// Writes `n = k² · m` with `m` square-free.
fn square_free_split(mut n: u64) -> (u64, u64) {
    let mut k = 1u64;
    let mut m = 1u64;
    let mut f = 2u64;
    while f * f <= n {
        let mut e = 0;
        while n.is_multiple_of(f) {
            n /= f;
            e += 1;
        }
        k *= f.pow(e / 2);
        if e % 2 == 1 {
            m *= f;
        }
        f += 1;
    }
    (k, m * n)
}

pub fn is_square_free(n: u64) -> bool {
    n >= 1 && square_free_split(n).0 == 1
}

impl QuadraticNumber {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>, d: u64) -> Result<Self> {
        let (a, b, c) = (a.into(), b.into(), c.into());
        if c.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if !b.is_zero() && (d < 2 || !is_square_free(d)) {
            return Err(Error::InvalidArgument(format!("D = {d} must be square-free and > 1")));
        }
        Ok(Self::reduced(a, b, c, d))
    }

    fn reduced(mut a: BigInt, mut b: BigInt, mut c: BigInt, mut d: u64) -> Self {
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let g = a.gcd(&b).gcd(&c);
        if !g.is_one() && !g.is_zero() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        if b.is_zero() {
            d = 1;
        }
        QuadraticNumber { a, b, c, d }
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self::reduced(n.into(), BigInt::zero(), BigInt::one(), 1)
    }

    pub fn rational(n: impl Into<BigInt>, d: impl Into<BigInt>) -> Result<Self> {
        Self::new(n, 0, d, 1)
    }

    pub fn from_ratio(q: &BigRational) -> Self {
        Self::reduced(q.numer().clone(), BigInt::zero(), q.denom().clone(), 1)
    }

    /// `√n` for a nonnegative integer, with square factors pulled out.
    pub fn sqrt_of(n: u64) -> Self {
        if n == 0 {
            return Self::zero();
        }
        let (k, m) = square_free_split(n);
        Self::reduced(BigInt::zero(), BigInt::from(k), BigInt::one(), m).normalize_unit_root()
    }

    // √1 = 1 is rational
    fn normalize_unit_root(self) -> Self {
        if self.d == 1 && !self.b.is_zero() {
            Self::reduced(self.a + self.b, BigInt::zero(), self.c, 1)
        } else {
            self
        }
    }

    /// The exact dyadic rational of a finite `f64`.
    pub fn from_f64_exact(x: f64) -> Result<Self> {
        Ok(Self::from_ratio(&f64_to_ratio(x)?))
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }
    pub fn b(&self) -> &BigInt {
        &self.b
    }
    pub fn c(&self) -> &BigInt {
        &self.c
    }
    /// The radicand; `1` for rationals.
    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| BigRational::new(self.a.clone(), self.c.clone()))
    }

    fn common_d(&self, other: &Self) -> Result<u64> {
        match (self.d, other.d) {
            (1, d) | (d, 1) => Ok(d),
            (d1, d2) if d1 == d2 => Ok(d1),
            (d1, d2) => Err(Error::FieldMismatch(d1, d2)),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let d = self.common_d(other)?;
        Ok(Self::reduced(
            &self.a * &other.c + &other.a * &self.c,
            &self.b * &other.c + &other.b * &self.c,
            &self.c * &other.c,
            d,
        ))
    }

    pub fn neg(&self) -> Self {
        Self::reduced(-&self.a, -&self.b, self.c.clone(), self.d)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let d = self.common_d(other)?;
        Ok(Self::reduced(
            &self.a * &other.a + BigInt::from(d) * &self.b * &other.b,
            &self.a * &other.b + &other.a * &self.b,
            &self.c * &other.c,
            d,
        ))
    }

    /// Galois conjugate `(a − b√D)/c`.
    pub fn conj(&self) -> Self {
        Self::reduced(self.a.clone(), -&self.b, self.c.clone(), self.d)
    }

    /// Field norm `x · conj(x)`.
    pub fn field_norm(&self) -> BigRational {
        let num = &self.a * &self.a - BigInt::from(self.d) * &self.b * &self.b;
        BigRational::new(num, &self.c * &self.c)
    }

    /// Field trace `x + conj(x)`.
    pub fn trace(&self) -> BigRational {
        BigRational::new(BigInt::from(2) * &self.a, self.c.clone())
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let den = &self.a * &self.a - BigInt::from(self.d) * &self.b * &self.b;
        Ok(Self::reduced(&self.c * &self.a, -(&self.c * &self.b), den, self.d))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.inv()?)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self::reduced(&self.a * q.numer(), &self.b * q.numer(), &self.c * q.denom(), self.d)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.mul(self).expect("same field");
        }
        acc
    }

    /// Exact sign of the real value (positive square root).
    pub fn signum(&self) -> Ordering {
        let sa = self.a.sign_cmp();
        let sb = self.b.sign_cmp();
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // opposite signs: compare a² with D b²
        let a2 = &self.a * &self.a;
        let db2 = BigInt::from(self.d) * &self.b * &self.b;
        match a2.cmp(&db2) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Exact comparison of real values.
    pub fn cmp_value(&self, other: &Self) -> Result<Ordering> {
        Ok(self.sub(other)?.signum())
    }

    /// Double-precision real value using `+√D`, computed without
    /// catastrophic cancellation between `a` and `b√D`.
    pub fn embed_real(&self) -> f64 {
        if self.b.is_zero() {
            return ratio_to_f64(&self.a, &self.c);
        }
        let sqrt_d = (self.d as f64).sqrt();
        if self.a.sign_cmp() == self.b.sign_cmp() || self.a.is_zero() {
            ratio_to_f64(&self.a, &self.c) + ratio_to_f64(&self.b, &self.c) * sqrt_d
        } else {
            // a + b√D = (a² − D b²) / (a − b√D)
            let num = &self.a * &self.a - BigInt::from(self.d) * &self.b * &self.b;
            let den = ratio_to_f64(&self.a, &BigInt::one()) - ratio_to_f64(&self.b, &BigInt::one()) * sqrt_d;
            ratio_to_f64(&num, &self.c) / den
        }
    }

    /// Integer minimal polynomial, ascending coefficients, primitive with
    /// positive leading coefficient.
    pub fn minimal_polynomial(&self) -> Vec<BigInt> {
        if self.b.is_zero() {
            return vec![-&self.a, self.c.clone()];
        }
        let c2 = &self.c * &self.c;
        let c1 = BigInt::from(-2) * &self.a * &self.c;
        let c0 = &self.a * &self.a - BigInt::from(self.d) * &self.b * &self.b;
        let g = c0.gcd(&c1).gcd(&c2);
        vec![c0 / &g, c1 / &g, c2 / &g]
    }

    /// Image in ℚ_p, known modulo `p^precision`, for the embedding that
    /// sends `self` to the root of its minimal polynomial congruent to
    /// `selector` modulo `p`.
    pub fn embed_padic(&self, p: u32, selector: u32, precision: usize) -> Result<PadicNumber> {
        let emb = PadicEmbedding::select(self.d, p, self, selector)?;
        emb.embed(self, precision)
    }

    /// Parses an arithmetic expression over integers, decimals, `sqrt(n)`
    /// and named constants, e.g. `(3+sqrt(17))/2` or `1/2*kappa + 1`.
    pub fn parse_expr(text: &str, lookup: &dyn Fn(&str) -> Option<QuadraticNumber>) -> Result<Self> {
        let mut parser = ExprParser { chars: text.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0, lookup };
        let v = parser.expr()?;
        if parser.pos != parser.chars.len() {
            return Err(Error::Malformed(format!("trailing input in `{text}`")));
        }
        Ok(v)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_expr(text, &|_| None)
    }
}

trait SignCmp {
    fn sign_cmp(&self) -> Ordering;
}

impl SignCmp for BigInt {
    fn sign_cmp(&self) -> Ordering {
        self.cmp(&BigInt::zero())
    }
}

fn ratio_to_f64(n: &BigInt, d: &BigInt) -> f64 {
    BigRational::new(n.clone(), d.clone()).to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn f64_to_ratio(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidArgument(format!("{x} is not finite")))
}

impl fmt::Display for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            if self.c.is_one() {
                write!(f, "{}", self.a)
            } else {
                write!(f, "{}/{}", self.a, self.c)
            }
        } else {
            let sign = if self.b.is_negative() { '-' } else { '+' };
            write!(f, "({}{}{}*sqrt({}))/{}", self.a, sign, self.b.abs(), self.d, self.c)
        }
    }
}

struct ExprParser<'a> {
    chars: Vec<char>,
    pos: usize,
    lookup: &'a dyn Fn(&str) -> Option<QuadraticNumber>,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Malformed(format!("expected `{c}` at offset {}", self.pos)))
        }
    }

    fn expr(&mut self) -> Result<QuadraticNumber> {
        let mut acc = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { acc.add(&rhs)? } else { acc.sub(&rhs)? };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<QuadraticNumber> {
        let mut acc = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == '*' { acc.mul(&rhs)? } else { acc.div(&rhs)? };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<QuadraticNumber> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<QuadraticNumber> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                if name == "sqrt" {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    let n = arg
                        .as_rational()
                        .filter(|q| q.is_integer() && !q.is_negative())
                        .and_then(|q| q.to_integer().to_u64())
                        .ok_or_else(|| Error::Malformed("sqrt expects a nonnegative integer".into()))?;
                    Ok(QuadraticNumber::sqrt_of(n))
                } else {
                    (self.lookup)(&name).ok_or(Error::UnknownConstant(name))
                }
            }
            other => Err(Error::Malformed(format!("unexpected {:?} at offset {}", other, self.pos))),
        }
    }

    fn number(&mut self) -> Result<QuadraticNumber> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        let lit: String = self.chars[start..self.pos].iter().collect();
        let (int_part, frac_part) = lit.split_once('.').unwrap_or((&lit, ""));
        if frac_part.contains('.') || (int_part.is_empty() && frac_part.is_empty()) {
            return Err(Error::Malformed(format!("bad number `{lit}`")));
        }
        let digits = format!("{int_part}{frac_part}");
        let num: BigInt = digits.parse().map_err(|_| Error::Malformed(format!("bad number `{lit}`")))?;
        let den = num_traits::pow(BigInt::from(10), frac_part.len());
        QuadraticNumber::rational(num, den)
    }
}

/// A field embedding ℚ(√D) → ℚ_p, fixed by the image of `√D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicEmbedding {
    prime: u32,
    d: u64,
    /// Image of `√D` known to `sqrt_precision` absolute digits; `None` for ℚ.
    sqrt_d: Option<PadicNumber>,
}

impl PadicEmbedding {
    /// Working absolute precision of the stored square root.
    const BASE_PRECISION: usize = 128;

    /// The (unique) embedding of ℚ into ℚ_p.
    pub fn rational(prime: u32) -> Result<Self> {
        check_prime(prime)?;
        Ok(PadicEmbedding { prime, d: 1, sqrt_d: None })
    }

    /// A square root of `D` in ℤ_p, known modulo `p^precision`.
    fn sqrt_in_qp(d: u64, p: u32, precision: usize) -> Result<PadicNumber> {
        if d.is_multiple_of(p as u64) {
            return Err(Error::Unsupported(format!("{p} ramifies in Q(sqrt({d}))")));
        }
        if p == 2 {
            if d % 8 != 1 {
                return Err(Error::Unsupported(format!("2 does not split in Q(sqrt({d}))")));
            }
            // ω = (1+√D)/2 is a simple root of X² − X − (D−1)/4 modulo 2
            let coeffs = [-BigInt::from((d - 1) / 4), BigInt::from(-1), BigInt::one()];
            let omega = hensel_lift_big(&coeffs, 2, 0, precision + 1)?;
            let two = PadicNumber::from_integer(2, 2, precision + 2)?;
            let one = PadicNumber::one(2, precision + 2);
            return Ok(two.mul(&omega)?.sub(&one)?.truncate_abs(precision as i64));
        }
        if p > 1_000_000 {
            return Err(Error::Unsupported(format!("prime {p} is too large for root search")));
        }
        let dm = d % p as u64;
        let r = (1..p as u64)
            .find(|r| r * r % p as u64 == dm)
            .ok_or_else(|| Error::Unsupported(format!("{p} does not split in Q(sqrt({d}))")))?;
        let coeffs = [-BigInt::from(d), BigInt::zero(), BigInt::one()];
        hensel_lift_big(&coeffs, p, r as u32, precision)
    }

    /// Chooses the embedding under which `anchor` reduces to `residue`
    /// modulo `p`. Fails when neither or both conjugate images do.
    pub fn select(d: u64, prime: u32, anchor: &QuadraticNumber, residue: u32) -> Result<Self> {
        check_prime(prime)?;
        if anchor.is_rational() || d == 1 {
            return Self::rational(prime);
        }
        if anchor.d != d {
            return Err(Error::FieldMismatch(anchor.d, d));
        }
        let s = Self::sqrt_in_qp(d, prime, Self::BASE_PRECISION)?;
        let candidates = [s.clone(), s.neg()];
        let mut chosen = None;
        let mut matches = 0;
        for cand in candidates {
            let emb = PadicEmbedding { prime, d, sqrt_d: Some(cand) };
            let img = emb.embed(anchor, 1)?;
            if img.valuation().is_none_or(|v| v >= 0) && img.digit_at(0) == residue % prime {
                matches += 1;
                chosen = Some(emb);
            }
        }
        match (matches, chosen) {
            (1, Some(emb)) => Ok(emb),
            _ => Err(Error::NoSimpleRoot { p: prime, residue }),
        }
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    /// Image of `√D` modulo `p^precision`.
    fn sqrt_to(&self, precision: usize) -> Result<PadicNumber> {
        let stored = self.sqrt_d.as_ref().expect("quadratic embedding");
        if precision <= Self::BASE_PRECISION {
            return Ok(stored.truncate_abs(precision as i64));
        }
        // lift further and pick the root agreeing with the stored one
        let root = Self::sqrt_in_qp(self.d, self.prime, precision)?;
        if root.eq_mod(stored, Self::BASE_PRECISION as i64) {
            Ok(root)
        } else {
            Ok(root.neg())
        }
    }

    /// Image of `x` in ℚ_p, reduced modulo `p^precision`.
    pub fn embed(&self, x: &QuadraticNumber, precision: usize) -> Result<PadicNumber> {
        let p = self.prime;
        if x.is_zero() {
            return Ok(PadicNumber::zero(p, precision));
        }
        if x.is_rational() {
            let (vn, _) = crate::padic::strip_prime(&x.a, p);
            let (vd, _) = crate::padic::strip_prime(&x.c, p);
            let v = vn - vd;
            if v >= precision as i64 {
                return Ok(PadicNumber::zero(p, precision));
            }
            let rel = (precision as i64 - v) as usize;
            return PadicNumber::from_ratio(&x.a, &x.c, p, rel);
        }
        if x.d != self.d {
            return Err(Error::FieldMismatch(x.d, self.d));
        }
        let (vc, _) = crate::padic::strip_prime(&x.c, p);
        let work = precision + vc as usize + 1;
        let s = self.sqrt_to(work)?;
        let big = work + 64;
        let to_padic = |n: &BigInt| -> Result<PadicNumber> {
            if n.is_zero() {
                Ok(PadicNumber::zero(p, big))
            } else {
                PadicNumber::from_ratio(n, &BigInt::one(), p, big)
            }
        };
        let num = to_padic(&x.a)?.add(&to_padic(&x.b)?.mul(&s)?)?;
        let c = PadicNumber::from_ratio(&x.c, &BigInt::one(), p, big)?;
        let val = num.div(&c)?;
        if val.is_zero() {
            // x ≠ 0 but (a + b s) vanished to the working precision
            return Ok(PadicNumber::zero(p, precision));
        }
        Ok(val.truncate_abs(precision as i64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kappa() -> QuadraticNumber {
        QuadraticNumber::parse("(3-sqrt(17))/2").unwrap()
    }
    fn lambda() -> QuadraticNumber {
        QuadraticNumber::parse("(3+sqrt(17))/2").unwrap()
    }

    #[test]
    fn vieta_identities() {
        let s = kappa().add(&lambda()).unwrap();
        assert_eq!(s, QuadraticNumber::from_integer(3));
        assert!(s.is_rational());
        assert_eq!(kappa().mul(&lambda()).unwrap(), QuadraticNumber::from_integer(-2));
        let inv = lambda().inv().unwrap();
        assert_eq!(inv, QuadraticNumber::parse("(-3+sqrt(17))/4").unwrap());
        assert_eq!(lambda().mul(&inv).unwrap(), QuadraticNumber::one());
        assert!(matches!(QuadraticNumber::zero().inv(), Err(Error::DivisionByZero)));
    }

    #[test]
    fn field_mismatch() {
        let x = QuadraticNumber::sqrt_of(17);
        let y = QuadraticNumber::sqrt_of(5);
        assert!(matches!(x.add(&y), Err(Error::FieldMismatch(17, 5))));
        // rationals mix with anything
        assert!(x.add(&QuadraticNumber::one()).is_ok());
    }

    #[test]
    fn canonical_form() {
        let x = QuadraticNumber::new(4, -2, -6, 17).unwrap();
        assert_eq!((x.a().clone(), x.b().clone(), x.c().clone()), (BigInt::from(-2), BigInt::from(1), BigInt::from(3)));
        assert_eq!(QuadraticNumber::sqrt_of(68), QuadraticNumber::new(0, 2, 1, 17).unwrap());
        assert_eq!(QuadraticNumber::sqrt_of(16), QuadraticNumber::from_integer(4));
        assert!(QuadraticNumber::new(1, 1, 1, 12).is_err());
        assert_eq!(kappa().to_string(), "(3-1*sqrt(17))/2");
        assert_eq!(QuadraticNumber::parse(&kappa().to_string()).unwrap(), kappa());
    }

    #[test]
    fn real_embedding() {
        assert!((kappa().embed_real() + 0.5616).abs() < 1e-3);
        assert!((lambda().embed_real() - 3.5616).abs() < 1e-3);
        assert_eq!(QuadraticNumber::from_integer(3).embed_real(), 3.0);
        // κ^40 is tiny while its coefficients are huge
        let k40 = kappa().pow(40);
        let expect = (-(17f64).sqrt() + 3.0) / 2.0;
        assert!((k40.embed_real() / expect.powi(40) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_sign_and_abs() {
        assert_eq!(kappa().signum(), Ordering::Less);
        assert_eq!(kappa().abs(), kappa().neg());
        // |κ| = 2/λ
        let two_over_lambda = QuadraticNumber::from_integer(2).div(&lambda()).unwrap();
        assert_eq!(kappa().abs(), two_over_lambda);
        assert_eq!(QuadraticNumber::zero().signum(), Ordering::Equal);
    }

    #[test]
    fn minimal_polynomials() {
        let mp = lambda().minimal_polynomial();
        assert_eq!(mp, vec![BigInt::from(-2), BigInt::from(-3), BigInt::from(1)]);
        assert_eq!(kappa().minimal_polynomial(), mp);
        let half = QuadraticNumber::rational(1, 2).unwrap();
        assert_eq!(half.minimal_polynomial(), vec![BigInt::from(-1), BigInt::from(2)]);
    }

    #[test]
    fn padic_embedding_examples() {
        let img = lambda().embed_padic(2, 0, 5).unwrap();
        assert_eq!(img.to_digit_string(), "01101");
        assert_eq!(img.norm(), BigRational::new(1.into(), 2.into()));
        let three = QuadraticNumber::from_integer(3).embed_padic(2, 1, 3).unwrap();
        assert_eq!(three, PadicNumber::from_rational(3, 1, 2, 3).unwrap());
        // κ is a unit in the same embedding: κ = 3 − λ
        let emb = PadicEmbedding::select(17, 2, &lambda(), 0).unwrap();
        assert_eq!(emb.embed(&kappa(), 10).unwrap().valuation(), Some(0));
        // both conjugates of √17 are ≡ 1 mod 2: no simple root
        let s = QuadraticNumber::sqrt_of(17);
        assert!(matches!(s.embed_padic(2, 1, 5), Err(Error::NoSimpleRoot { .. })));
        assert!(matches!(lambda().embed_padic(3, 0, 5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn padic_embedding_matches_hensel_root() {
        let emb = PadicEmbedding::select(17, 2, &lambda(), 0).unwrap();
        let img = emb.embed(&lambda(), 200).unwrap();
        let root = crate::padic::hensel_lift(&[-2, -3, 1], 2, 0, 200).unwrap();
        assert_eq!(img, root);
        // odd prime: 13 ≡ 1 mod 3 splits, and 1 + √13 has residues 0 and 2
        let anchor = QuadraticNumber::sqrt_of(13).add(&QuadraticNumber::one()).unwrap();
        let emb3 = PadicEmbedding::select(13, 3, &anchor, 0).unwrap();
        assert_eq!(emb3.embed(&anchor, 8).unwrap().digit_at(0), 0);
        let r = emb3.embed(&QuadraticNumber::sqrt_of(13), 30).unwrap();
        let thirteen = PadicNumber::from_integer(13, 3, 30).unwrap();
        assert!(r.mul(&r).unwrap().eq_mod(&thirteen, 30));
        assert!(matches!(PadicEmbedding::select(13, 3, &anchor, 1), Err(Error::NoSimpleRoot { .. })));
    }

    #[test]
    fn expressions() {
        let lookup = |name: &str| match name {
            "lambda" => Some(lambda()),
            "kappa" => Some(kappa()),
            _ => None,
        };
        let t2 = QuadraticNumber::parse_expr("lambda + 1", &lookup).unwrap();
        assert_eq!(t2, QuadraticNumber::parse("(5+sqrt(17))/2").unwrap());
        let half_t1 = QuadraticNumber::parse_expr("1/2*kappa", &lookup).unwrap();
        assert_eq!(half_t1, QuadraticNumber::parse("(3-sqrt(17))/4").unwrap());
        assert_eq!(QuadraticNumber::parse("0.25").unwrap(), QuadraticNumber::rational(1, 4).unwrap());
        assert_eq!(QuadraticNumber::parse("-(2)").unwrap(), QuadraticNumber::from_integer(-2));
        assert!(matches!(QuadraticNumber::parse_expr("mu", &lookup), Err(Error::UnknownConstant(_))));
        assert!(QuadraticNumber::parse("(1+2").is_err());
        assert!(QuadraticNumber::parse("sqrt(1/2)").is_err());
    }

    fn arb_quad() -> impl Strategy<Value = QuadraticNumber> {
        (-60i64..60, -60i64..60, 1i64..40).prop_map(|(a, b, c)| QuadraticNumber::new(a, b, c, 17).unwrap())
    }

    proptest! {
        #[test]
        fn embedding_is_homomorphism(x in arb_quad(), y in arb_quad()) {
            let emb = PadicEmbedding::select(17, 2, &lambda(), 0).unwrap();
            let n = 40usize;
            let ex = emb.embed(&x, n + 20).unwrap();
            let ey = emb.embed(&y, n + 20).unwrap();
            let sum = emb.embed(&x.add(&y).unwrap(), n).unwrap();
            prop_assert!(ex.add(&ey).unwrap().eq_mod(&sum, n as i64));
            let vx = ex.valuation().unwrap_or(0).min(0);
            let vy = ey.valuation().unwrap_or(0).min(0);
            // products of elements with negative valuation lose absolute digits
            let m = n as i64 + vx.min(0) + vy.min(0);
            let prod = emb.embed(&x.mul(&y).unwrap(), n).unwrap();
            prop_assert!(ex.mul(&ey).unwrap().eq_mod(&prod, m));
        }

        #[test]
        fn real_embedding_respects_order(x in arb_quad(), y in arb_quad()) {
            let exact = x.cmp_value(&y).unwrap();
            let fx = x.embed_real();
            let fy = y.embed_real();
            if (fx - fy).abs() > 1e-9 {
                prop_assert_eq!(exact, fx.partial_cmp(&fy).unwrap());
            }
        }
    }
}
