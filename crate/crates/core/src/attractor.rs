//! Attractor covers by box iteration, box counting, overlap estimates and
//! the dual point-set iteration `X_j ⊇ T⁻¹ X_i + T⁻¹ t` over each edge
//! `i → j` with map `x ↦ T x + t`.

use std::collections::HashSet;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebraic::QuadraticNumber;
use crate::error::{Error, Result};
use crate::gifs::GifsGraph;
use crate::mixed_space::{write_box_csv, Ball, ComplexRect, Interval, Point, ProductBox};
use crate::padic::PadicNumber;

/// Largest number of cells a single box may be split into.
pub const CELL_BUDGET: u64 = 10_000_000;
/// Default point budget of the dual iteration.
pub const POINT_BUDGET: usize = 1_000_000;

/// Depth-`ℓ` images of the seed boxes, per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxCover {
    pub depth: usize,
    pub vertices: Vec<String>,
    pub boxes: Vec<Vec<ProductBox>>,
    /// Edges `i → j` whose map does not send seed `j` into seed `i`.
    pub invariance_violations: Vec<usize>,
}

impl BoxCover {
    pub fn vertex(&self, name: &str) -> Result<&[ProductBox]> {
        let i = self.vertices.iter().position(|v| v == name).ok_or_else(|| Error::UnknownVertex(name.to_string()))?;
        Ok(&self.boxes[i])
    }

    pub fn all(&self) -> impl Iterator<Item = &ProductBox> {
        self.boxes.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.boxes.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_csv<W: Write>(&self, out: W, g: &GifsGraph) -> Result<()> {
        let rows: Vec<(&str, &ProductBox)> =
            self.vertices.iter().zip(&self.boxes).flat_map(|(v, bs)| bs.iter().map(move |b| (v.as_str(), b))).collect();
        write_box_csv(out, g.signature(), &rows)
    }
}

/// `[-2, 2]` on real axes, `[-2, 2]²` on complex ones, ℤ_p on p-adic ones.
pub fn default_seeds(g: &GifsGraph) -> Vec<ProductBox> {
    vec![ProductBox::centered(g.signature(), 2.0); g.vertex_count()]
}

fn interval_within(inner: &Interval, outer: &Interval) -> bool {
    outer.lo <= inner.lo && inner.hi <= outer.hi
}

fn ball_within(inner: &Ball, outer: &Ball) -> Result<bool> {
    Ok(inner.radius_exp >= outer.radius_exp && outer.contains(&inner.center)?)
}

/// Whether `inner ⊆ outer`, comparing complex rectangles by their
/// bounding boxes.
pub fn box_within(inner: &ProductBox, outer: &ProductBox) -> Result<bool> {
    for (a, b) in inner.reals.iter().zip(&outer.reals) {
        if !interval_within(a, b) {
            return Ok(false);
        }
    }
    for (a, b) in inner.complexes.iter().zip(&outer.complexes) {
        let ((ar, ai), (br, bi)) = (a.bounds(), b.bounds());
        if !(interval_within(&ar, &br) && interval_within(&ai, &bi)) {
            return Ok(false);
        }
    }
    for (a, b) in inner.balls.iter().zip(&outer.balls) {
        if !ball_within(a, b)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Edges whose map does not carry seed `to` into seed `from`.
pub fn invariance_violations(g: &GifsGraph, seeds: &[ProductBox]) -> Result<Vec<usize>> {
    let mut bad = Vec::new();
    for (k, e) in g.edges().iter().enumerate() {
        let image = e.map.apply_box(&seeds[e.to])?;
        if !box_within(&image, &seeds[e.from])? {
            bad.push(k);
        }
    }
    Ok(bad)
}

/// `Ω_i^(ℓ) = ⋃_{e: i→j} f_e(Ω_j^(ℓ−1))`, `Ω^(0)` = seeds. Boxes of a
/// vertex are ordered by edge label, then by position in the previous
/// level, so the result does not depend on the thread count.
pub fn iterate_cover(g: &GifsGraph, seeds: &[ProductBox], depth: usize) -> Result<BoxCover> {
    if seeds.len() != g.vertex_count() {
        return Err(Error::InvalidArgument(format!("{} seeds for {} vertices", seeds.len(), g.vertex_count())));
    }
    for s in seeds {
        s.check(g.signature())?;
    }
    let invariance_violations = invariance_violations(g, seeds)?;
    let mut level: Vec<Vec<ProductBox>> = seeds.iter().map(|s| vec![s.clone()]).collect();
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len());
        for i in 0..g.vertex_count() {
            let mut boxes = Vec::new();
            for &k in g.outgoing(i) {
                let e = &g.edges()[k];
                let imgs: Vec<ProductBox> =
                    level[e.to].par_iter().map(|b| e.map.apply_box(b)).collect::<Result<_>>()?;
                boxes.extend(imgs);
            }
            next.push(boxes);
        }
        level = next;
    }
    Ok(BoxCover { depth, vertices: g.vertices().to_vec(), boxes: level, invariance_violations })
}

/// A grid cell: dyadic indices of side `2^-m` on real axes (two per
/// complex axis) and a coset of `p^m ℤ_p` per p-adic axis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub real: Vec<i64>,
    pub padic: Vec<PadicNumber>,
}

/// Indices of the half-open dyadic cells `[k 2^-m, (k+1) 2^-m)` meeting
/// `[lo, hi)`; a degenerate interval gets the cell containing it.
fn dyadic_range(iv: &Interval, m: u32) -> (i64, i64) {
    let s = (m as f64).exp2();
    let a = (iv.lo * s).floor() as i64;
    let b = ((iv.hi * s).ceil() as i64 - 1).max(a);
    (a, b)
}

/// Cosets of `p^m ℤ_p` inside a ball, as representatives mod `p^m`.
fn cosets(ball: &Ball, m: i64) -> Result<Vec<PadicNumber>> {
    let r = ball.radius_exp;
    if r >= m {
        return Ok(vec![ball.center.representative(m)]);
    }
    let p = ball.prime();
    let k = (m - r) as u32;
    let count = (p as u64)
        .checked_pow(k)
        .filter(|&c| c <= CELL_BUDGET)
        .ok_or_else(|| Error::BudgetExceeded(format!("ball splits into {p}^{k} cells")))?;
    let base = ball.center.representative(r);
    let lo = base.valuation().unwrap_or(r).min(r);
    let mut out = Vec::with_capacity(count as usize);
    for j in 0..count {
        let mut digits: Vec<u32> = (lo..r).map(|pos| base.digit_at(pos)).collect();
        let mut rest = j;
        for _ in 0..k {
            digits.push((rest % p as u64) as u32);
            rest /= p as u64;
        }
        out.push(PadicNumber::from_digits(p, lo, digits)?.representative(m));
    }
    Ok(out)
}

/// Calls `f` on every cell of resolution `m` meeting the box.
pub fn for_each_cell(b: &ProductBox, m: u32, mut f: impl FnMut(Cell)) -> Result<()> {
    let mut ranges: Vec<(i64, i64)> = b.reals.iter().map(|iv| dyadic_range(iv, m)).collect();
    for rect in &b.complexes {
        let (re, im) = rect.bounds();
        ranges.push(dyadic_range(&re, m));
        ranges.push(dyadic_range(&im, m));
    }
    let padic: Vec<Vec<PadicNumber>> = b.balls.iter().map(|ball| cosets(ball, m as i64)).collect::<Result<_>>()?;
    let total = ranges
        .iter()
        .map(|(a, b)| (b - a + 1) as u64)
        .chain(padic.iter().map(|c| c.len() as u64))
        .try_fold(1u64, |acc, n| acc.checked_mul(n).filter(|&x| x <= CELL_BUDGET));
    if total.is_none() {
        return Err(Error::BudgetExceeded(format!("box meets more than {CELL_BUDGET} cells at m = {m}")));
    }
    let mut real: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    let mut pidx = vec![0usize; padic.len()];
    loop {
        f(Cell { real: real.clone(), padic: pidx.iter().zip(&padic).map(|(&i, c)| c[i].clone()).collect() });
        // odometer over reals, then p-adic cosets
        let mut carried = true;
        for (x, r) in real.iter_mut().zip(&ranges) {
            if *x < r.1 {
                *x += 1;
                carried = false;
                break;
            }
            *x = r.0;
        }
        if carried {
            for (i, c) in pidx.iter_mut().zip(&padic) {
                if *i + 1 < c.len() {
                    *i += 1;
                    carried = false;
                    break;
                }
                *i = 0;
            }
        }
        if carried {
            return Ok(());
        }
    }
}

/// Set of resolution-`m` cells met by the boxes.
pub fn cell_set<'a, I>(boxes: I, m: u32) -> Result<HashSet<Cell>>
where
    I: IntoParallelIterator<Item = &'a ProductBox>,
{
    boxes
        .into_par_iter()
        .try_fold(HashSet::new, |mut acc, b| {
            for_each_cell(b, m, |c| {
                acc.insert(c);
            })?;
            Ok(acc)
        })
        .try_reduce(HashSet::new, |mut a, b| {
            if a.len() < b.len() {
                return Ok(b.into_iter().chain(a).collect());
            }
            a.extend(b);
            Ok(a)
        })
}

/// `N(m)`: number of distinct resolution-`m` cells met by the boxes.
pub fn box_count(boxes: &[ProductBox], m: u32) -> Result<usize> {
    Ok(cell_set(boxes, m)?.len())
}

/// Cells of a single point, as a degenerate box.
pub fn point_box(x: &Point) -> ProductBox {
    ProductBox {
        reals: x.reals.iter().map(|&v| Interval { lo: v, hi: v }).collect(),
        complexes: x
            .complexes
            .iter()
            .map(|z| ComplexRect::axis_aligned(Interval { lo: z.re, hi: z.re }, Interval { lo: z.im, hi: z.im }))
            .collect(),
        balls: x.padics.iter().map(|c| Ball::new(c, c.absolute_precision().unwrap_or(i64::MAX / 4))).collect(),
    }
}

/// Least-squares line through `(m, log₂ N(m))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `log₂ N`.
    pub residual: f64,
}

pub fn box_dim_estimate(counts: &[(u32, usize)]) -> Result<SlopeFit> {
    if counts.len() < 2 || counts.iter().any(|&(_, n)| n == 0) {
        return Err(Error::InvalidArgument("need two or more nonzero counts".into()));
    }
    let k = counts.len() as f64;
    let xs: Vec<f64> = counts.iter().map(|&(m, _)| m as f64).collect();
    let ys: Vec<f64> = counts.iter().map(|&(_, n)| (n as f64).log2()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("resolutions must differ".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(SlopeFit { slope, intercept, residual: (sse / k).sqrt() })
}

/// `(m, N(m))` for each resolution.
pub fn box_counts(boxes: &[ProductBox], resolutions: impl IntoIterator<Item = u32>) -> Result<Vec<(u32, usize)>> {
    resolutions.into_iter().map(|m| Ok((m, box_count(boxes, m)?))).collect()
}

/// CSV `m,count,slope` where `slope` is the fit over all rows so far.
pub fn write_boxcount_csv<W: Write>(out: W, counts: &[(u32, usize)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "count", "slope"])?;
    for i in 0..counts.len() {
        let slope = match box_dim_estimate(&counts[..=i]) {
            Ok(fit) => format!("{:.9}", fit.slope),
            Err(_) => String::new(),
        };
        w.write_record([counts[i].0.to_string(), counts[i].1.to_string(), slope])?;
    }
    w.flush()?;
    Ok(())
}

/// Share of the cells of `a` that `b` also meets.
pub fn overlap_fraction(a: &[ProductBox], b: &[ProductBox], m: u32) -> Result<f64> {
    let ca = cell_set(a, m)?;
    if ca.is_empty() {
        return Ok(0.0);
    }
    let cb = cell_set(b, m)?;
    Ok(ca.iter().filter(|c| cb.contains(c)).count() as f64 / ca.len() as f64)
}

/// Exact point sets of the dual iteration, restricted to a window.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSetPair {
    pub vertices: Vec<String>,
    /// Per vertex, points as exact coordinates (reals, then p-adics),
    /// sorted by their printed form.
    pub points: Vec<Vec<Vec<QuadraticNumber>>>,
    pub window: ProductBox,
    pub iterations: usize,
    /// Whether the last step reproduced its input.
    pub stable: bool,
}

/// `[-3, 3]` on real axes and `p⁻¹ℤ_p` on p-adic ones: wide enough for
/// the half-integer translations of the built-in systems.
pub fn default_dual_window(g: &GifsGraph) -> Result<ProductBox> {
    let sig = g.signature();
    if sig.complex > 0 {
        return Err(Error::Unsupported("dual iteration over complex coordinates".into()));
    }
    Ok(ProductBox {
        reals: vec![Interval { lo: -3.0, hi: 3.0 }; sig.real],
        complexes: vec![],
        balls: sig.primes.iter().map(|&p| Ball::new(&PadicNumber::zero(p, 0), -1)).collect(),
    })
}

/// Exact membership test for a window box; p-adic coordinates are
/// embedded only as far as the ball radius requires.
struct Window<'a> {
    g: &'a GifsGraph,
    reals: Vec<(QuadraticNumber, QuadraticNumber)>,
    balls: &'a [Ball],
}

impl<'a> Window<'a> {
    fn new(g: &'a GifsGraph, w: &'a ProductBox) -> Result<Self> {
        w.check(g.signature())?;
        if !w.complexes.is_empty() {
            return Err(Error::Unsupported("dual iteration over complex coordinates".into()));
        }
        let reals = w
            .reals
            .iter()
            .map(|iv| Ok((QuadraticNumber::from_f64_exact(iv.lo)?, QuadraticNumber::from_f64_exact(iv.hi)?)))
            .collect::<Result<_>>()?;
        Ok(Window { g, reals, balls: &w.balls })
    }

    fn contains(&self, x: &[QuadraticNumber]) -> Result<bool> {
        let r = self.reals.len();
        for ((lo, hi), v) in self.reals.iter().zip(x) {
            if v.cmp_value(lo)?.is_lt() || v.cmp_value(hi)?.is_gt() {
                return Ok(false);
            }
        }
        for ((ball, v), emb) in self.balls.iter().zip(&x[r..]).zip(self.g.embeddings()) {
            let prec = ball.radius_exp.max(0) as usize + 1;
            if !ball.contains(&emb.embed(v, prec)?)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

struct DualEdge {
    from: usize,
    to: usize,
    inv: Vec<QuadraticNumber>,
    shift: Vec<QuadraticNumber>,
}

fn dual_edges(g: &GifsGraph) -> Result<Vec<DualEdge>> {
    g.edges()
        .iter()
        .map(|e| {
            let (Some(lin), Some(t)) = (&e.map.linear.exact, &e.map.exact_translate) else {
                return Err(Error::Unsupported("dual iteration needs exact edge maps".into()));
            };
            let inv: Vec<QuadraticNumber> = lin.iter().map(QuadraticNumber::inv).collect::<Result<_>>()?;
            let shift = inv.iter().zip(t).map(|(a, b)| a.mul(b)).collect::<Result<_>>()?;
            Ok(DualEdge { from: e.from, to: e.to, inv, shift })
        })
        .collect()
}

fn sort_points(pts: &HashSet<Vec<QuadraticNumber>>) -> Vec<Vec<QuadraticNumber>> {
    let mut keyed: Vec<(Vec<String>, Vec<QuadraticNumber>)> =
        pts.iter().map(|p| (p.iter().map(|q| q.to_string()).collect(), p.clone())).collect();
    keyed.sort_by(|x, y| x.0.cmp(&y.0));
    keyed.into_iter().map(|(_, p)| p).collect()
}

/// Runs `X_j ← ⋃_{e: i→j} T_e⁻¹ X_i + T_e⁻¹ t_e` from `X = {0}` on every
/// vertex, keeping window points, until a step reproduces its input or
/// `max_iter` steps have run.
pub fn dual_iterate(g: &GifsGraph, window: &ProductBox, max_iter: usize, budget: usize) -> Result<PointSetPair> {
    let win = Window::new(g, window)?;
    let edges = dual_edges(g)?;
    let dim = g.signature().real + g.signature().primes.len();
    let origin = vec![QuadraticNumber::zero(); dim];
    let mut sets: Vec<HashSet<Vec<QuadraticNumber>>> = vec![HashSet::from([origin]); g.vertex_count()];
    let mut iterations = 0;
    let mut stable = false;
    while iterations < max_iter {
        let mut next: Vec<HashSet<Vec<QuadraticNumber>>> = vec![HashSet::new(); g.vertex_count()];
        for e in &edges {
            for x in sort_points(&sets[e.from]) {
                let y: Vec<QuadraticNumber> =
                    x.iter().zip(&e.inv).zip(&e.shift).map(|((v, a), s)| a.mul(v)?.add(s)).collect::<Result<_>>()?;
                if !next[e.to].contains(&y) && win.contains(&y)? {
                    next[e.to].insert(y);
                }
            }
        }
        iterations += 1;
        if next.iter().map(HashSet::len).sum::<usize>() > budget {
            return Err(Error::BudgetExceeded(format!("more than {budget} points")));
        }
        if next == sets {
            stable = true;
            break;
        }
        sets = next;
    }
    Ok(PointSetPair {
        vertices: g.vertices().to_vec(),
        points: sets.iter().map(sort_points).collect(),
        window: window.clone(),
        iterations,
        stable,
    })
}

/// Numeric image of an exact point: real embedding on real axes and the
/// graph's p-adic embeddings on p-adic ones.
pub fn embed_point(g: &GifsGraph, x: &[QuadraticNumber]) -> Result<Point> {
    let r = g.signature().real;
    Ok(Point {
        reals: x[..r].iter().map(QuadraticNumber::embed_real).collect(),
        complexes: Vec::<Complex64>::new(),
        padics: x[r..].iter().zip(g.embeddings()).map(|(v, emb)| emb.embed(v, g.precision())).collect::<Result<_>>()?,
    })
}

/// Share of the resolution-`m` cells of `window` met by
/// `⋃_v (X_v + Ω_v^(ℓ))`.
pub fn tiling_cover_check(
    g: &GifsGraph,
    points: &PointSetPair,
    cover: &BoxCover,
    window: &ProductBox,
    m: u32,
) -> Result<f64> {
    let target = cell_set([window], m)?;
    let mut covered: HashSet<Cell> = HashSet::new();
    for (v, pts) in points.points.iter().enumerate() {
        for x in pts {
            let shift = embed_point(g, x)?;
            let moved: Vec<ProductBox> =
                cover.boxes[v].par_iter().map(|b| b.translate(&shift)).collect::<Result<_>>()?;
            covered.extend(cell_set(&moved, m)?.into_iter().filter(|c| target.contains(c)));
        }
    }
    Ok(covered.len() as f64 / target.len() as f64)
}

/// CSV of exact points: `vertex` then `x{k}_a,x{k}_b,x{k}_c,x{k}_d` per
/// coordinate for the value `(a + b√d)/c`.
pub fn write_points_csv<W: Write>(out: W, pts: &PointSetPair) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dim = pts.points.iter().flatten().map(Vec::len).next().unwrap_or(0);
    let mut header = vec!["vertex".to_string()];
    for k in 0..dim {
        for s in ["a", "b", "c", "d"] {
            header.push(format!("x{k}_{s}"));
        }
    }
    w.write_record(&header)?;
    for (v, set) in pts.vertices.iter().zip(&pts.points) {
        for p in set {
            let mut row = vec![v.clone()];
            for q in p {
                row.extend([q.a().to_string(), q.b().to_string(), q.c().to_string(), q.d().to_string()]);
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gifs::fixtures::{example_boundary_reduced, example_main};
    use crate::mixed_space::SpaceSignature;
    use proptest::prelude::*;

    fn q(s: &str) -> QuadraticNumber {
        QuadraticNumber::parse(s).unwrap()
    }

    #[test]
    fn cover_sizes() {
        let g = example_main().unwrap();
        let seeds = default_seeds(&g);
        let c0 = iterate_cover(&g, &seeds, 0).unwrap();
        assert_eq!(c0.boxes, seeds.iter().map(|s| vec![s.clone()]).collect::<Vec<_>>());
        assert!(c0.invariance_violations.is_empty());
        let c2 = iterate_cover(&g, &seeds, 2).unwrap();
        assert_eq!(c2.boxes[0].len(), 17);
        assert_eq!(c2.boxes[1].len(), 5);
        let alpha = g.uniform_linear().unwrap().singular_values()[0];
        let c5 = iterate_cover(&g, &seeds, 5).unwrap();
        for b in c5.all() {
            assert!(b.diameter() <= alpha.powi(5) * seeds[0].diameter() * (1.0 + 1e-12));
        }
        let tight = vec![ProductBox::centered(g.signature(), 0.1); 2];
        assert!(!iterate_cover(&g, &tight, 1).unwrap().invariance_violations.is_empty());
    }

    #[test]
    fn unit_box_and_point_counts() {
        let sig = SpaceSignature::new(1, 0, vec![2]).unwrap();
        let unit = ProductBox::unit(&sig);
        for m in 0..8 {
            assert_eq!(box_count(std::slice::from_ref(&unit), m).unwrap(), 1 << (2 * m));
        }
        let pt = Point {
            reals: vec![0.3],
            complexes: vec![],
            padics: vec![PadicNumber::from_rational(1, 3, 2, 40).unwrap()],
        };
        for m in 0..12 {
            assert_eq!(box_count(&[point_box(&pt)], m).unwrap(), 1);
        }
        let sig3 = SpaceSignature::new(0, 1, vec![3]).unwrap();
        assert_eq!(box_count(&[ProductBox::unit(&sig3)], 2).unwrap(), 16 * 9);
    }

    #[test]
    fn slope_fits() {
        let flat: Vec<(u32, usize)> = (1..6).map(|m| (m, 7)).collect();
        assert!(box_dim_estimate(&flat).unwrap().slope.abs() < 1e-12);
        let lin: Vec<(u32, usize)> = (1..6).map(|m| (m, 1 << m)).collect();
        let fit = box_dim_estimate(&lin).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12 && fit.residual < 1e-12);
        assert!(box_dim_estimate(&lin[..1]).is_err());
        let mut out = Vec::new();
        write_boxcount_csv(&mut out, &lin).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next(), Some("m,count,slope"));
        assert_eq!(text.lines().nth(1), Some("1,2,"));
        assert_eq!(text.lines().nth(2), Some("2,4,1.000000000"));
    }

    #[test]
    fn overlap_extremes() {
        let sig = SpaceSignature::new(1, 0, vec![2]).unwrap();
        let a = vec![ProductBox::unit(&sig)];
        assert_eq!(overlap_fraction(&a, &a, 3).unwrap(), 1.0);
        let far = vec![ProductBox::unit(&sig)
            .translate(&Point { reals: vec![5.0], complexes: vec![], padics: vec![PadicNumber::zero(2, 4)] })
            .unwrap()];
        assert_eq!(overlap_fraction(&a, &far, 3).unwrap(), 0.0);
    }

    #[test]
    fn dual_first_step() {
        let g = example_main().unwrap();
        let window = default_dual_window(&g).unwrap();
        let one = dual_iterate(&g, &window, 1, POINT_BUDGET).unwrap();
        let b = g.vertex_index("b").unwrap();
        assert_eq!(one.points[b], vec![vec![q("0"), q("0")], vec![q("1/2"), q("1/2")]]);
        let full = dual_iterate(&g, &window, 100, POINT_BUDGET).unwrap();
        assert!(full.stable);
        for set in &full.points {
            assert!(set.contains(&vec![q("0"), q("0")]));
        }
        // fixed point: one more step changes nothing
        let again = dual_iterate(&g, &window, full.iterations + 1, POINT_BUDGET).unwrap();
        assert_eq!(again.points, full.points);
        let mut csv = Vec::new();
        write_points_csv(&mut csv, &full).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("vertex,x0_a,x0_b,x0_c,x0_d,x1_a"));
    }

    #[test]
    fn tiling_trivial_cases() {
        let g = example_main().unwrap();
        let seeds = default_seeds(&g);
        let cover = iterate_cover(&g, &seeds, 0).unwrap();
        let window = ProductBox::unit(g.signature());
        let empty = PointSetPair {
            vertices: g.vertices().to_vec(),
            points: vec![vec![], vec![]],
            window: window.clone(),
            iterations: 0,
            stable: true,
        };
        assert_eq!(tiling_cover_check(&g, &empty, &cover, &window, 3).unwrap(), 0.0);
        let origin = PointSetPair { points: vec![vec![vec![q("0"), q("0")]], vec![]], ..empty };
        assert_eq!(tiling_cover_check(&g, &origin, &cover, &window, 3).unwrap(), 1.0);
    }

    #[test]
    fn boundary_cover_is_invariant() {
        let g = example_boundary_reduced().unwrap();
        let c = iterate_cover(&g, &default_seeds(&g), 3).unwrap();
        assert!(c.invariance_violations.is_empty());
        assert_eq!(c.len(), 5 * 8);
    }

    #[test]
    fn nesting_of_cell_sets() {
        let g = example_main().unwrap();
        let seeds = default_seeds(&g);
        let c4 = iterate_cover(&g, &seeds, 4).unwrap();
        let c5 = iterate_cover(&g, &seeds, 5).unwrap();
        for m in [2, 4, 6] {
            for v in 0..2 {
                let coarse = cell_set(&c4.boxes[v], m).unwrap();
                let fine = cell_set(&c5.boxes[v], m).unwrap();
                assert!(fine.is_subset(&coarse));
            }
        }
    }

    fn arb_box() -> impl Strategy<Value = ProductBox> {
        (-4.0f64..4.0, 0.0f64..2.0, 0u32..64, 0i64..6).prop_map(|(lo, w, c, r)| ProductBox {
            reals: vec![Interval { lo, hi: lo + w }],
            complexes: vec![],
            balls: vec![Ball::new(&PadicNumber::from_integer(c as i64, 2, 8).unwrap(), r)],
        })
    }

    proptest! {
        #[test]
        fn count_ignores_order_and_duplicates(mut boxes in prop::collection::vec(arb_box(), 1..6), m in 0u32..5) {
            let n = box_count(&boxes, m).unwrap();
            boxes.reverse();
            let dup = boxes[0].clone();
            boxes.push(dup);
            prop_assert_eq!(box_count(&boxes, m).unwrap(), n);
        }
    }
}
