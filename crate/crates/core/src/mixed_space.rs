//! The product space ℝ^r × ℂ^s × ℚ_{p1} × … × ℚ_{pk} under the maximum
//! metric: points, measurable boxes, and diagonal affine maps.

use std::cmp::Ordering;
use std::io::Write;

use num_complex::Complex64;

use crate::algebraic::QuadraticNumber;
use crate::error::{Error, Result};
use crate::padic::{check_prime, PadicNumber};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpaceSignature {
    pub real: usize,
    pub complex: usize,
    pub primes: Vec<u32>,
}

impl SpaceSignature {
    pub fn new(real: usize, complex: usize, primes: Vec<u32>) -> Result<Self> {
        for &p in &primes {
            check_prime(p)?;
        }
        let sig = SpaceSignature { real, complex, primes };
        if sig.metric_dim() == 0 {
            return Err(Error::InvalidArgument("the space has no coordinates".into()));
        }
        Ok(sig)
    }

    /// `r + 2s + k`.
    pub fn metric_dim(&self) -> usize {
        self.real + 2 * self.complex + self.primes.len()
    }

    /// Number of diagonal multipliers, `r + s + k`.
    pub fn coordinate_count(&self) -> usize {
        self.real + self.complex + self.primes.len()
    }

    /// `ℝ × ℚ_p`, the only signature that can be drawn.
    pub fn is_real_times_padic(&self) -> bool {
        self.real == 1 && self.complex == 0 && self.primes.len() == 1
    }
}

pub fn metric_dim(sig: &SpaceSignature) -> usize {
    sig.metric_dim()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub reals: Vec<f64>,
    pub complexes: Vec<Complex64>,
    pub padics: Vec<PadicNumber>,
}

impl Point {
    pub fn origin(sig: &SpaceSignature, precision: usize) -> Self {
        Point {
            reals: vec![0.0; sig.real],
            complexes: vec![Complex64::new(0.0, 0.0); sig.complex],
            padics: sig.primes.iter().map(|&p| PadicNumber::zero(p, precision)).collect(),
        }
    }

    pub fn check(&self, sig: &SpaceSignature) -> Result<()> {
        let primes: Vec<u32> = self.padics.iter().map(|x| x.prime()).collect();
        if self.reals.len() != sig.real || self.complexes.len() != sig.complex || primes != sig.primes {
            return Err(Error::SignatureMismatch(format!(
                "point has shape ({}, {}, {:?}), space is ({}, {}, {:?})",
                self.reals.len(),
                self.complexes.len(),
                primes,
                sig.real,
                sig.complex,
                sig.primes
            )));
        }
        Ok(())
    }

    fn signature(&self) -> SpaceSignature {
        SpaceSignature {
            real: self.reals.len(),
            complex: self.complexes.len(),
            primes: self.padics.iter().map(|x| x.prime()).collect(),
        }
    }
}

/// Maximum metric: the largest coordinate distance, with p-adic
/// coordinates measured by the normalized absolute value.
pub fn distance(x: &Point, y: &Point) -> Result<f64> {
    y.check(&x.signature())?;
    let mut d: f64 = 0.0;
    for (a, b) in x.reals.iter().zip(&y.reals) {
        d = d.max((a - b).abs());
    }
    for (a, b) in x.complexes.iter().zip(&y.complexes) {
        d = d.max((a - b).norm());
    }
    for (a, b) in x.padics.iter().zip(&y.padics) {
        d = d.max(a.sub(b)?.norm_f64());
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(hi >= lo) {
            return Err(Error::InvalidArgument(format!("interval [{lo}, {hi}] is reversed")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    fn affine(&self, a: f64, t: f64) -> Interval {
        let (x, y) = (a * self.lo + t, a * self.hi + t);
        Interval { lo: x.min(y), hi: x.max(y) }
    }

    fn shift(&self, t: f64) -> Interval {
        Interval { lo: self.lo + t, hi: self.hi + t }
    }
}

/// The rectangle `re × im` in a rotated frame: the region is
/// `{ frame · z : z ∈ re × im }` with `|frame| = 1`. Diagonal complex
/// multipliers rotate the frame and scale the rectangle, so images of
/// boxes stay boxes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexRect {
    pub re: Interval,
    pub im: Interval,
    pub frame: Complex64,
}

impl ComplexRect {
    pub fn axis_aligned(re: Interval, im: Interval) -> Self {
        ComplexRect { re, im, frame: Complex64::new(1.0, 0.0) }
    }

    pub fn area(&self) -> f64 {
        self.re.len() * self.im.len()
    }

    pub fn max_side(&self) -> f64 {
        self.re.len().max(self.im.len())
    }

    pub fn corners(&self) -> [Complex64; 4] {
        let f = self.frame;
        [
            f * Complex64::new(self.re.lo, self.im.lo),
            f * Complex64::new(self.re.hi, self.im.lo),
            f * Complex64::new(self.re.lo, self.im.hi),
            f * Complex64::new(self.re.hi, self.im.hi),
        ]
    }

    /// Axis-aligned bounding rectangle `(re, im)` in absolute coordinates.
    pub fn bounds(&self) -> (Interval, Interval) {
        let cs = self.corners();
        let fold = |g: fn(&Complex64) -> f64| {
            let lo = cs.iter().map(g).fold(f64::INFINITY, f64::min);
            let hi = cs.iter().map(g).fold(f64::NEG_INFINITY, f64::max);
            Interval { lo, hi }
        };
        (fold(|c| c.re), fold(|c| c.im))
    }

    fn affine(&self, w: Complex64, t: Complex64) -> Result<ComplexRect> {
        let r = w.norm();
        if r == 0.0 {
            return Err(Error::Unsupported("zero complex multiplier collapses the box".into()));
        }
        let frame = self.frame * (w / r);
        let local = t / frame;
        Ok(ComplexRect {
            re: self.re.affine(r, 0.0).shift(local.re),
            im: self.im.affine(r, 0.0).shift(local.im),
            frame,
        })
    }
}

/// The ball `center + p^radius_exp · ℤ_p`, of diameter `p^(-radius_exp)`.
/// The center is kept reduced modulo `p^radius_exp`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ball {
    pub center: PadicNumber,
    pub radius_exp: i64,
}

impl Ball {
    pub fn new(center: &PadicNumber, radius_exp: i64) -> Self {
        Ball { center: center.representative(radius_exp), radius_exp }
    }

    /// ℤ_p.
    pub fn unit(prime: u32) -> Self {
        Ball { center: PadicNumber::zero(prime, 0), radius_exp: 0 }
    }

    pub fn prime(&self) -> u32 {
        self.center.prime()
    }

    pub fn diameter(&self) -> f64 {
        (self.prime() as f64).powf(-(self.radius_exp as f64))
    }

    pub fn contains(&self, x: &PadicNumber) -> Result<bool> {
        let diff = x.representative(self.radius_exp).sub(&self.center)?;
        Ok(diff.valuation().is_none_or(|v| v >= self.radius_exp))
    }

    /// Balls in ℚ_p are nested or disjoint.
    pub fn intersects(&self, other: &Ball) -> Result<bool> {
        let (small, big) = if self.radius_exp >= other.radius_exp { (self, other) } else { (other, self) };
        big.contains(&small.center)
    }

    /// `self + t`, widened to the known digits of `t`.
    pub fn shifted(&self, t: &PadicNumber) -> Result<Ball> {
        let m = t.absolute_precision().map_or(self.radius_exp, |a| a.min(self.radius_exp));
        Ok(Ball::new(&self.center.add(t)?, m))
    }

    fn affine(&self, a: &PadicNumber, t: &PadicNumber) -> Result<Ball> {
        let v = a.valuation().ok_or_else(|| Error::Unsupported("zero p-adic multiplier collapses the ball".into()))?;
        let ac = a.mul(&self.center)?;
        // widen rather than claim digits beyond what the operands determine
        let m =
            [ac.absolute_precision(), t.absolute_precision()].into_iter().flatten().fold(self.radius_exp + v, i64::min);
        let c = ac.add(t)?;
        Ok(Ball::new(&c, m))
    }
}

/// A product of real intervals, complex rectangles and p-adic balls.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductBox {
    pub reals: Vec<Interval>,
    pub complexes: Vec<ComplexRect>,
    pub balls: Vec<Ball>,
}

impl ProductBox {
    /// `[0,1]^r × ([0,1]²)^s × ℤ_{p1} × …`, of measure 1.
    pub fn unit(sig: &SpaceSignature) -> Self {
        let unit = Interval { lo: 0.0, hi: 1.0 };
        ProductBox {
            reals: vec![unit; sig.real],
            complexes: vec![ComplexRect::axis_aligned(unit, unit); sig.complex],
            balls: sig.primes.iter().map(|&p| Ball::unit(p)).collect(),
        }
    }

    /// `[-h, h]` in every real direction, `[-h, h]²` in every complex one
    /// and ℤ_p in the p-adic ones.
    pub fn centered(sig: &SpaceSignature, half_width: f64) -> Self {
        let iv = Interval { lo: -half_width, hi: half_width };
        ProductBox {
            reals: vec![iv; sig.real],
            complexes: vec![ComplexRect::axis_aligned(iv, iv); sig.complex],
            balls: sig.primes.iter().map(|&p| Ball::unit(p)).collect(),
        }
    }

    pub fn signature(&self) -> SpaceSignature {
        SpaceSignature {
            real: self.reals.len(),
            complex: self.complexes.len(),
            primes: self.balls.iter().map(|b| b.prime()).collect(),
        }
    }

    pub fn check(&self, sig: &SpaceSignature) -> Result<()> {
        if &self.signature() != sig {
            return Err(Error::SignatureMismatch(format!("box has shape {:?}, space is {:?}", self.signature(), sig)));
        }
        Ok(())
    }

    pub fn diameter(&self) -> f64 {
        let r = self.reals.iter().map(Interval::len);
        let c = self.complexes.iter().map(ComplexRect::max_side);
        let b = self.balls.iter().map(Ball::diameter);
        r.chain(c).chain(b).fold(0.0, f64::max)
    }

    /// Product of lengths, areas and ball masses `p^(-m)`; `[0,1]` and
    /// ℤ_p both have measure 1.
    pub fn haar_measure(&self) -> f64 {
        let r: f64 = self.reals.iter().map(Interval::len).product();
        let c: f64 = self.complexes.iter().map(ComplexRect::area).product();
        let b: f64 = self.balls.iter().map(Ball::diameter).product();
        r * c * b
    }

    /// Translate by a point.
    pub fn translate(&self, x: &Point) -> Result<ProductBox> {
        x.check(&self.signature())?;
        let balls = self.balls.iter().zip(&x.padics).map(|(b, t)| b.shifted(t)).collect::<Result<_>>()?;
        Ok(ProductBox {
            reals: self.reals.iter().zip(&x.reals).map(|(iv, t)| iv.shift(*t)).collect(),
            complexes: self
                .complexes
                .iter()
                .zip(&x.complexes)
                .map(|(r, t)| r.affine(Complex64::new(1.0, 0.0), *t))
                .collect::<Result<_>>()?,
            balls,
        })
    }
}

/// `x ↦ (a_1 x_1, …, a_{r+s+k} x_{r+s+k})`, optionally backed by exact
/// quadratic-field multipliers for the real and p-adic coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalMap {
    pub reals: Vec<f64>,
    pub complexes: Vec<Complex64>,
    pub padics: Vec<PadicNumber>,
    /// Real multipliers followed by p-adic ones; absent for spaces with
    /// complex factors or for maps built from floats.
    pub exact: Option<Vec<QuadraticNumber>>,
}

impl DiagonalMap {
    pub fn identity(sig: &SpaceSignature, precision: usize) -> Self {
        DiagonalMap {
            reals: vec![1.0; sig.real],
            complexes: vec![Complex64::new(1.0, 0.0); sig.complex],
            padics: sig.primes.iter().map(|&p| PadicNumber::one(p, precision)).collect(),
            exact: (sig.complex == 0).then(|| vec![QuadraticNumber::one(); sig.real + sig.primes.len()]),
        }
    }

    pub fn signature(&self) -> SpaceSignature {
        SpaceSignature {
            real: self.reals.len(),
            complex: self.complexes.len(),
            primes: self.padics.iter().map(|x| x.prime()).collect(),
        }
    }

    fn check_same_shape(&self, other: &DiagonalMap) -> Result<()> {
        if self.signature() != other.signature() {
            return Err(Error::SignatureMismatch(format!("{:?} vs {:?}", self.signature(), other.signature())));
        }
        Ok(())
    }

    /// Natural logs of the singular values, sorted descending. Zero
    /// multipliers give `-inf`.
    pub fn log_singular_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::with_capacity(self.reals.len() + 2 * self.complexes.len() + self.padics.len());
        out.extend(self.reals.iter().map(|a| a.abs().ln()));
        for w in &self.complexes {
            let l = w.norm().ln();
            out.push(l);
            out.push(l);
        }
        out.extend(self.padics.iter().map(|a| match a.valuation() {
            Some(v) => -(v as f64) * (a.prime() as f64).ln(),
            None => f64::NEG_INFINITY,
        }));
        out.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
        out
    }

    /// `α_1 ≥ … ≥ α_d`: absolute values of real multipliers, moduli of
    /// complex ones listed twice, p-adic norms.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        out.extend(self.reals.iter().map(|a| a.abs()));
        for w in &self.complexes {
            out.push(w.norm());
            out.push(w.norm());
        }
        out.extend(self.padics.iter().map(PadicNumber::norm_f64));
        out.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
        out
    }

    pub fn is_contracting(&self) -> bool {
        self.singular_values().first().is_some_and(|&a| a < 1.0)
    }

    pub fn is_nonsingular(&self) -> bool {
        self.singular_values().last().is_some_and(|&a| a > 0.0)
    }

    /// Coordinate-wise product: the linear part of `self ∘ other`.
    pub fn compose(&self, other: &DiagonalMap) -> Result<DiagonalMap> {
        self.check_same_shape(other)?;
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| x.mul(y)).collect::<Result<_>>()?),
            _ => None,
        };
        Ok(DiagonalMap {
            reals: self.reals.iter().zip(&other.reals).map(|(a, b)| a * b).collect(),
            complexes: self.complexes.iter().zip(&other.complexes).map(|(a, b)| a * b).collect(),
            padics: self.padics.iter().zip(&other.padics).map(|(a, b)| a.mul(b)).collect::<Result<_>>()?,
            exact,
        })
    }

    pub fn pow(&self, n: u32) -> Result<DiagonalMap> {
        let precision = self.padics.iter().map(PadicNumber::precision).max().unwrap_or(1);
        let mut acc = DiagonalMap::identity(&self.signature(), precision);
        if self.exact.is_none() {
            acc.exact = None;
        }
        for _ in 0..n {
            acc = acc.compose(self)?;
        }
        Ok(acc)
    }

    pub fn inverse(&self) -> Result<DiagonalMap> {
        if !self.is_nonsingular() {
            return Err(Error::DivisionByZero);
        }
        let exact = match &self.exact {
            Some(v) => Some(v.iter().map(QuadraticNumber::inv).collect::<Result<_>>()?),
            None => None,
        };
        Ok(DiagonalMap {
            reals: self.reals.iter().map(|a| 1.0 / a).collect(),
            complexes: self.complexes.iter().map(|w| 1.0 / w).collect(),
            padics: self.padics.iter().map(PadicNumber::inv).collect::<Result<_>>()?,
            exact,
        })
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        x.check(&self.signature())?;
        Ok(Point {
            reals: self.reals.iter().zip(&x.reals).map(|(a, y)| a * y).collect(),
            complexes: self.complexes.iter().zip(&x.complexes).map(|(a, y)| a * y).collect(),
            padics: self.padics.iter().zip(&x.padics).map(|(a, y)| a.mul(y)).collect::<Result<_>>()?,
        })
    }
}

pub fn singular_values(t: &DiagonalMap) -> Vec<f64> {
    t.singular_values()
}

pub fn is_contracting(t: &DiagonalMap) -> bool {
    t.is_contracting()
}

pub fn is_nonsingular(t: &DiagonalMap) -> bool {
    t.is_nonsingular()
}

/// `x ↦ T x + t`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub linear: DiagonalMap,
    pub translate: Point,
    /// Exact translation coordinates (reals then p-adics), if known.
    pub exact_translate: Option<Vec<QuadraticNumber>>,
}

impl AffineMap {
    pub fn new(linear: DiagonalMap, translate: Point) -> Result<Self> {
        translate.check(&linear.signature())?;
        Ok(AffineMap { linear, translate, exact_translate: None })
    }

    pub fn identity(sig: &SpaceSignature, precision: usize) -> Self {
        AffineMap {
            linear: DiagonalMap::identity(sig, precision),
            translate: Point::origin(sig, precision),
            exact_translate: (sig.complex == 0).then(|| vec![QuadraticNumber::zero(); sig.real + sig.primes.len()]),
        }
    }

    pub fn signature(&self) -> SpaceSignature {
        self.linear.signature()
    }

    /// Whether both the linear part and the translation are exactly known.
    pub fn is_exact(&self) -> bool {
        self.linear.exact.is_some() && self.exact_translate.is_some()
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        let y = self.linear.apply(x)?;
        Ok(Point {
            reals: y.reals.iter().zip(&self.translate.reals).map(|(a, t)| a + t).collect(),
            complexes: y.complexes.iter().zip(&self.translate.complexes).map(|(a, t)| a + t).collect(),
            padics: y.padics.iter().zip(&self.translate.padics).map(|(a, t)| a.add(t)).collect::<Result<_>>()?,
        })
    }

    /// Image of a box; diagonal maps send boxes to boxes.
    pub fn apply_box(&self, b: &ProductBox) -> Result<ProductBox> {
        b.check(&self.signature())?;
        let lin = &self.linear;
        let t = &self.translate;
        Ok(ProductBox {
            reals: b.reals.iter().zip(&lin.reals).zip(&t.reals).map(|((iv, a), s)| iv.affine(*a, *s)).collect(),
            complexes: b
                .complexes
                .iter()
                .zip(&lin.complexes)
                .zip(&t.complexes)
                .map(|((r, w), s)| r.affine(*w, *s))
                .collect::<Result<_>>()?,
            balls: b
                .balls
                .iter()
                .zip(&lin.padics)
                .zip(&t.padics)
                .map(|((ball, a), s)| ball.affine(a, s))
                .collect::<Result<_>>()?,
        })
    }

    /// `self ∘ other`: `x ↦ T_s T_o x + (T_s t_o + t_s)`.
    pub fn compose(&self, other: &AffineMap) -> Result<AffineMap> {
        let linear = self.linear.compose(&other.linear)?;
        let translate = self.apply(&other.translate)?;
        let exact_translate = match (&self.linear.exact, &self.exact_translate, &other.exact_translate) {
            (Some(a), Some(ts), Some(to)) => {
                Some(a.iter().zip(ts).zip(to).map(|((a, ts), to)| a.mul(to)?.add(ts)).collect::<Result<_>>()?)
            }
            _ => None,
        };
        Ok(AffineMap { linear, translate, exact_translate })
    }
}

pub fn apply(f: &AffineMap, x: &Point) -> Result<Point> {
    f.apply(x)
}

pub fn apply_box(f: &AffineMap, b: &ProductBox) -> Result<ProductBox> {
    f.apply_box(b)
}

pub fn compose(f: &AffineMap, g: &AffineMap) -> Result<AffineMap> {
    f.compose(g)
}

/// Writes boxes as CSV: one row per box, labelled by vertex, with interval
/// endpoints, complex rectangles (local frame plus rotation) and ball
/// centers as digit strings with their radius exponent.
pub fn write_box_csv<W: Write>(out: W, sig: &SpaceSignature, rows: &[(&str, &ProductBox)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["vertex".to_string()];
    for i in 0..sig.real {
        header.push(format!("x{i}_lo"));
        header.push(format!("x{i}_hi"));
    }
    for j in 0..sig.complex {
        for part in ["re_lo", "re_hi", "im_lo", "im_hi", "frame_re", "frame_im"] {
            header.push(format!("z{j}_{part}"));
        }
    }
    for (k, p) in sig.primes.iter().enumerate() {
        header.push(format!("q{k}_p{p}_center"));
        header.push(format!("q{k}_p{p}_exp"));
    }
    w.write_record(&header)?;
    for (vertex, b) in rows {
        b.check(sig)?;
        let mut rec = vec![vertex.to_string()];
        for iv in &b.reals {
            rec.push(format!("{:.12e}", iv.lo));
            rec.push(format!("{:.12e}", iv.hi));
        }
        for r in &b.complexes {
            for v in [r.re.lo, r.re.hi, r.im.lo, r.im.hi, r.frame.re, r.frame.im] {
                rec.push(format!("{v:.12e}"));
            }
        }
        for ball in &b.balls {
            rec.push(ball.center.to_digit_string());
            rec.push(ball.radius_exp.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::hensel_lift;
    use proptest::prelude::*;

    fn r_q2() -> SpaceSignature {
        SpaceSignature::new(1, 0, vec![2]).unwrap()
    }

    fn example_t() -> DiagonalMap {
        let lambda = hensel_lift(&[-2, -3, 1], 2, 0, 64).unwrap();
        let kappa = (3.0 - 17f64.sqrt()) / 2.0;
        DiagonalMap { reals: vec![kappa], complexes: vec![], padics: vec![lambda], exact: None }
    }

    fn q2(n: i64, d: i64) -> PadicNumber {
        PadicNumber::from_rational(n, d, 2, 32).unwrap()
    }

    #[test]
    fn metric_dims() {
        assert_eq!(metric_dim(&r_q2()), 2);
        assert_eq!(metric_dim(&SpaceSignature::new(3, 0, vec![]).unwrap()), 3);
        assert_eq!(metric_dim(&SpaceSignature::new(0, 1, vec![3, 5]).unwrap()), 4);
        assert!(SpaceSignature::new(0, 0, vec![]).is_err());
        assert!(SpaceSignature::new(1, 0, vec![6]).is_err());
    }

    #[test]
    fn distances() {
        let x = Point { reals: vec![0.0], complexes: vec![], padics: vec![q2(0, 1)] };
        let y = Point { reals: vec![0.25], complexes: vec![], padics: vec![q2(4, 1)] };
        assert_eq!(distance(&x, &x).unwrap(), 0.0);
        assert_eq!(distance(&x, &y).unwrap(), 0.25);
        let z = Point { reals: vec![0.0, 1.0], complexes: vec![], padics: vec![] };
        assert!(matches!(distance(&x, &z), Err(Error::SignatureMismatch(_))));
    }

    #[test]
    fn diameters_and_measures() {
        let sig = r_q2();
        let unit = ProductBox::unit(&sig);
        assert_eq!(unit.diameter(), 1.0);
        assert_eq!(unit.haar_measure(), 1.0);
        let small = ProductBox {
            reals: vec![Interval::new(0.0, 0.125).unwrap()],
            complexes: vec![],
            balls: vec![Ball::new(&q2(0, 1), 3)],
        };
        assert_eq!(small.diameter(), 0.125);
        let degenerate = ProductBox {
            reals: vec![Interval::new(0.3, 0.3).unwrap()],
            complexes: vec![],
            balls: vec![Ball::new(&q2(1, 1), 2)],
        };
        assert_eq!(degenerate.diameter(), 0.25);
        let half = ProductBox {
            reals: vec![Interval::new(0.0, 1.0).unwrap()],
            complexes: vec![],
            balls: vec![Ball::new(&q2(0, 1), 1)],
        };
        assert_eq!(half.haar_measure(), 0.5);
        let rect = ProductBox {
            reals: vec![Interval::new(0.0, 2.0).unwrap(), Interval::new(0.0, 3.0).unwrap()],
            complexes: vec![],
            balls: vec![],
        };
        assert_eq!(rect.haar_measure(), 6.0);
    }

    #[test]
    fn maps() {
        let sig = r_q2();
        let t = Point { reals: vec![0.7], complexes: vec![], padics: vec![q2(3, 1)] };
        let f = AffineMap::new(DiagonalMap::identity(&sig, 32), t.clone()).unwrap();
        assert_eq!(f.apply(&Point::origin(&sig, 32)).unwrap(), t);

        let g = AffineMap::new(example_t(), Point::origin(&sig, 64)).unwrap();
        let one = Point { reals: vec![1.0], complexes: vec![], padics: vec![PadicNumber::one(2, 64)] };
        let img = g.apply(&one).unwrap();
        assert!((img.reals[0].abs() - 0.5615528128088303).abs() < 1e-15);
        assert_eq!(img.padics[0].norm_f64(), 0.5);

        let sq = example_t().compose(&example_t()).unwrap();
        assert_eq!(sq.reals[0], example_t().reals[0] * example_t().reals[0]);
        assert_eq!(sq.padics[0], example_t().padics[0].mul(&example_t().padics[0]).unwrap());
    }

    #[test]
    fn singular_value_examples() {
        let sv = example_t().singular_values();
        assert!((sv[0] - (17f64.sqrt() - 3.0) / 2.0).abs() < 1e-15);
        assert_eq!(sv[1], 0.5);
        assert_eq!(
            DiagonalMap::identity(&SpaceSignature::new(2, 1, vec![3]).unwrap(), 4).singular_values(),
            vec![1.0; 5]
        );
        let c = DiagonalMap { reals: vec![], complexes: vec![Complex64::new(0.3, 0.4)], padics: vec![], exact: None };
        let sv = c.singular_values();
        assert_eq!(sv.len(), 2);
        assert!((sv[0] - 0.5).abs() < 1e-15 && (sv[1] - 0.5).abs() < 1e-15);

        assert!(example_t().is_contracting() && example_t().is_nonsingular());
        let id = DiagonalMap::identity(&r_q2(), 8);
        assert!(!id.is_contracting() && id.is_nonsingular());
        let degenerate = DiagonalMap { reals: vec![0.0, 0.5], complexes: vec![], padics: vec![], exact: None };
        assert!(degenerate.is_contracting() && !degenerate.is_nonsingular());
    }

    #[test]
    fn box_image_is_exact_under_rotation() {
        let sig = SpaceSignature::new(0, 1, vec![]).unwrap();
        let b = ProductBox::unit(&sig);
        let w = Complex64::new(0.3, 0.4);
        let lin = DiagonalMap { reals: vec![], complexes: vec![w], padics: vec![], exact: None };
        let t = Point { reals: vec![], complexes: vec![Complex64::new(1.0, -2.0)], padics: vec![] };
        let f = AffineMap::new(lin, t).unwrap();
        let img = f.apply_box(&b).unwrap();
        assert!((img.haar_measure() - 0.25).abs() < 1e-15);
        // corners of the image are images of corners
        let corner =
            f.apply(&Point { reals: vec![], complexes: vec![Complex64::new(1.0, 1.0)], padics: vec![] }).unwrap();
        let cs = img.complexes[0].corners();
        assert!(cs.iter().any(|c| (c - corner.complexes[0]).norm() < 1e-12));
    }

    #[test]
    fn box_csv_layout() {
        let sig = r_q2();
        let b = ProductBox::unit(&sig);
        let mut buf = Vec::new();
        write_box_csv(&mut buf, &sig, &[("a", &b)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "vertex,x0_lo,x0_hi,q0_p2_center,q0_p2_exp");
        assert_eq!(lines.next().unwrap(), "a,0.000000000000e0,1.000000000000e0,0,0");
    }

    fn arb_ball(p: u32) -> impl Strategy<Value = Ball> {
        (0u64..100_000, -3i64..10).prop_map(move |(c, m)| {
            let center = PadicNumber::from_integer_mod(&c.into(), p, 40);
            Ball::new(&center, m)
        })
    }

    proptest! {
        #[test]
        fn haar_scaling_real(lo in -5.0f64..5.0, len in 0.0f64..4.0, a in -3.0f64..3.0) {
            let b = ProductBox { reals: vec![Interval::new(lo, lo + len).unwrap()], complexes: vec![], balls: vec![] };
            let f = AffineMap::new(
                DiagonalMap { reals: vec![a], complexes: vec![], padics: vec![], exact: None },
                Point { reals: vec![0.0], complexes: vec![], padics: vec![] },
            ).unwrap();
            let img = f.apply_box(&b).unwrap();
            prop_assert!((img.haar_measure() - a.abs() * b.haar_measure()).abs() <= 1e-12 * (1.0 + b.haar_measure()));
        }

        #[test]
        fn haar_scaling_padic(ball in arb_ball(3), n in 1i64..2000, d in 1i64..2000) {
            let a = PadicNumber::from_rational(n, d, 3, 40).unwrap();
            let b = ProductBox { reals: vec![], complexes: vec![], balls: vec![ball] };
            let f = AffineMap::new(
                DiagonalMap { reals: vec![], complexes: vec![], padics: vec![a.clone()], exact: None },
                Point { reals: vec![], complexes: vec![], padics: vec![PadicNumber::zero(3, 40)] },
            ).unwrap();
            let img = f.apply_box(&b).unwrap();
            prop_assert!((img.haar_measure() - a.norm_f64() * b.haar_measure()).abs() <= 1e-12 * b.haar_measure());
        }

        #[test]
        fn padic_distance_is_ultrametric(a in 0u64..1_000_000, b in 0u64..1_000_000, c in 0u64..1_000_000) {
            let pt = |x: u64| Point { reals: vec![], complexes: vec![], padics: vec![PadicNumber::from_integer_mod(&x.into(), 5, 30)] };
            let (x, y, z) = (pt(a), pt(b), pt(c));
            let dxz = distance(&x, &z).unwrap();
            prop_assert!(dxz <= distance(&x, &y).unwrap().max(distance(&y, &z).unwrap()));
        }

        #[test]
        fn image_measure_and_diameter(lo in -2.0f64..2.0, len in 0.01f64..3.0, a in 0.05f64..0.95, s in any::<bool>(), ball in arb_ball(2), v in 1i64..4, u in 0u64..1000) {
            let sig = r_q2();
            let mult = PadicNumber::from_integer_mod(&(2 * u + 1).into(), 2, 40).shift(v);
            let lin = DiagonalMap { reals: vec![if s { a } else { -a }], complexes: vec![], padics: vec![mult], exact: None };
            let t = Point { reals: vec![0.3], complexes: vec![], padics: vec![PadicNumber::from_rational(5, 3, 2, 40).unwrap()] };
            let f = AffineMap::new(lin.clone(), t).unwrap();
            let b = ProductBox { reals: vec![Interval::new(lo, lo + len).unwrap()], complexes: vec![], balls: vec![ball] };
            b.check(&sig).unwrap();
            let img = f.apply_box(&b).unwrap();
            let prod: f64 = lin.singular_values().iter().product();
            prop_assert!((img.haar_measure() - prod * b.haar_measure()).abs() <= 1e-12 * b.haar_measure());
            prop_assert!(img.diameter() <= lin.singular_values()[0] * b.diameter() * (1.0 + 1e-12));
        }
    }
}
