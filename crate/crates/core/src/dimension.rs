//! Affinity dimension (upper bound for the Hausdorff dimension) and lower
//! affinity dimension of a GIFS.
//!
//! Three solvers:
//!
//! * closed form for systems whose edges share one linear part `T`: the
//!   root of `Φ^q(T)·ρ(F) = 1` (resp. `Ψ^q`), solved segment by segment;
//! * spectral: the root of `ρ(M_ℓ(q)) = 1` where
//!   `M_ℓ(q)_{ij} = Σ_{ω ∈ E^ℓ_{ij}} Φ^q(T_ω)`, for `ℓ = 1, 2, 4, …`;
//! * partial sums: the growth of `S_ℓ(q) = Σ_{|ω| = ℓ} Φ^q(T_ω)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::algebraic::QuadraticNumber;
use crate::error::{Error, Result};
use crate::gifs::spectral::spectral_radius;
use crate::gifs::GifsGraph;
use crate::mixed_space::DiagonalMap;
use crate::svf::{log_phi, log_psi};

/// Upper end of every bisection bracket beyond the metric dimension.
const BRACKET_EXTRA: f64 = 64.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    SpectralIter,
    PartialSum,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::SpectralIter => "spectral_iter",
            Method::PartialSum => "partial_sum",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" | "closed_form" => Ok(Method::ClosedForm),
            "spectral" | "spectral_iter" => Ok(Method::SpectralIter),
            "partial" | "partial_sum" => Ok(Method::PartialSum),
            _ => Err(Error::InvalidArgument(format!("unknown method `{s}`"))),
        }
    }
}

/// Which singular value function drives a solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// `Φ^q`: affinity dimension.
    Upper,
    /// `Ψ^q`: lower affinity dimension.
    Lower,
}

impl Kind {
    fn log_svf(self, q: f64, logs_desc: &[f64]) -> f64 {
        match self {
            Kind::Upper => log_phi(q, logs_desc),
            Kind::Lower => log_psi(q, logs_desc),
        }
    }
}

fn check_map(t: &DiagonalMap) -> Result<()> {
    if !t.is_nonsingular() {
        return Err(Error::Singular(0));
    }
    if !t.is_contracting() {
        return Err(Error::NotContracting { edge: 0, alpha: t.singular_values()[0] });
    }
    Ok(())
}

/// Root of `Σ_{i<j} l_i + (q−j+1) l_j = −log ρ` with `l` in the order the
/// singular value function multiplies them.
fn solve_segments(logs: &[f64], rho: f64) -> Result<f64> {
    if !(rho >= 1.0) {
        return Err(Error::NoRoot(format!("spectral radius {rho} < 1")));
    }
    let target = -rho.ln();
    if target == 0.0 {
        return Ok(0.0);
    }
    let mut head = 0.0;
    for (j, &l) in logs.iter().enumerate() {
        if head + l <= target {
            return Ok(j as f64 + (target - head) / l);
        }
        head += l;
    }
    Ok(logs.len() as f64 * target / head)
}

/// The `q ≥ 0` with `Φ^q(T)·ρ = 1`.
pub fn affinity_dim_uniform(t: &DiagonalMap, rho: f64) -> Result<f64> {
    check_map(t)?;
    solve_segments(&t.log_singular_values(), rho)
}

/// The `q ≥ 0` with `Ψ^q(T)·ρ = 1`.
pub fn lower_affinity_dim_uniform(t: &DiagonalMap, rho: f64) -> Result<f64> {
    check_map(t)?;
    let asc: Vec<f64> = t.log_singular_values().into_iter().rev().collect();
    solve_segments(&asc, rho)
}

/// Exact singular values of a map with exact multipliers: `|a|` on real
/// coordinates, `p^(−v_p(a))` on p-adic ones. `None` without exact data.
pub fn exact_singular_values(t: &DiagonalMap) -> Option<Vec<QuadraticNumber>> {
    let exact = t.exact.as_ref()?;
    let r = t.reals.len();
    let mut out: Vec<QuadraticNumber> = exact[..r].iter().map(QuadraticNumber::abs).collect();
    for a in &t.padics {
        let v = a.valuation()?;
        let p = QuadraticNumber::from_integer(a.prime());
        let pv = p.pow(v.unsigned_abs() as u32);
        out.push(if v >= 0 { pv.inv().ok()? } else { pv });
    }
    Some(out)
}

fn coordinate_logs(t: &DiagonalMap) -> Vec<f64> {
    let mut out = Vec::new();
    out.extend(t.reals.iter().map(|a| a.abs().ln()));
    for w in &t.complexes {
        out.push(w.norm().ln());
        out.push(w.norm().ln());
    }
    out.extend(t.padics.iter().map(|a| match a.valuation() {
        Some(v) => -(v as f64) * (a.prime() as f64).ln(),
        None => f64::NEG_INFINITY,
    }));
    out
}

/// Distinct linear parts of the edges. Diagonal maps commute, so the
/// linear part of a path only depends on how often each class occurs.
struct Classes {
    logs: Vec<Vec<f64>>,
    of_edge: Vec<usize>,
}

fn linear_classes(g: &GifsGraph) -> Classes {
    let mut reps: Vec<&DiagonalMap> = Vec::new();
    let mut of_edge = Vec::new();
    for e in g.edges() {
        let l = &e.map.linear;
        let same = |r: &&DiagonalMap| match (&r.exact, &l.exact) {
            (Some(a), Some(b)) => a == b,
            _ => r.reals == l.reals && r.complexes == l.complexes && r.padics == l.padics,
        };
        let k = match reps.iter().position(same) {
            Some(k) => k,
            None => {
                reps.push(l);
                reps.len() - 1
            }
        };
        of_edge.push(k);
    }
    Classes { logs: reps.iter().map(|r| coordinate_logs(r)).collect(), of_edge }
}

/// Paths of one length between each pair of vertices, grouped by class
/// counts: `[i][j] → counts → number of paths`.
type Level = Vec<Vec<BTreeMap<Vec<u32>, f64>>>;

fn first_level(g: &GifsGraph, classes: &Classes) -> Level {
    let n = g.vertex_count();
    let width = classes.logs.len();
    let mut level: Level = vec![vec![BTreeMap::new(); n]; n];
    for (k, e) in g.edges().iter().enumerate() {
        let mut key = vec![0u32; width];
        key[classes.of_edge[k]] = 1;
        *level[e.from][e.to].entry(key).or_insert(0.0) += 1.0;
    }
    level
}

fn concat(a: &Level, b: &Level) -> Level {
    let n = a.len();
    let mut out: Level = vec![vec![BTreeMap::new(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_empty() {
                continue;
            }
            for j in 0..n {
                for (ka, ca) in &a[i][k] {
                    for (kb, cb) in &b[k][j] {
                        let key: Vec<u32> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
                        *out[i][j].entry(key).or_insert(0.0) += ca * cb;
                    }
                }
            }
        }
    }
    out
}

/// Per entry: `(ln count, sorted log singular values)` of each class mix.
type LogLevel = Vec<Vec<Vec<(f64, Vec<f64>)>>>;

fn log_level(level: &Level, classes: &Classes) -> LogLevel {
    level
        .iter()
        .map(|row| {
            row.iter()
                .map(|cell| {
                    cell.iter()
                        .map(|(key, count)| {
                            let d = classes.logs.first().map_or(0, Vec::len);
                            let mut v = vec![0.0; d];
                            for (m, logs) in key.iter().zip(&classes.logs) {
                                for (acc, l) in v.iter_mut().zip(logs) {
                                    *acc += *m as f64 * l;
                                }
                            }
                            v.sort_by(|a, b| b.total_cmp(a));
                            (count.ln(), v)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `log ρ(M(q))`, with entries formed in the log domain and rescaled so
/// extreme `q` neither overflow nor underflow.
fn log_rho(level: &LogLevel, q: f64, kind: Kind) -> Result<f64> {
    let n = level.len();
    let mut logs = vec![vec![f64::NEG_INFINITY; n]; n];
    let mut top = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            let terms: Vec<f64> = level[i][j].iter().map(|(lc, v)| lc + kind.log_svf(q, v)).collect();
            if let Some(m) = terms.iter().copied().reduce(f64::max) {
                logs[i][j] = m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln();
                top = top.max(logs[i][j]);
            }
        }
    }
    if top == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let m: Vec<Vec<f64>> = logs.iter().map(|r| r.iter().map(|&l| (l - top).exp()).collect()).collect();
    Ok(top + spectral_radius(&m)?.ln())
}

/// Bisection for the zero of a decreasing function on `[0, hi]`.
fn bisect(mut f: impl FnMut(f64) -> Result<f64>, hi: f64, tol: f64) -> Result<(f64, usize)> {
    if f(0.0)? <= 0.0 {
        return Ok((0.0, 0));
    }
    if f(hi)? > 0.0 {
        return Err(Error::NoRoot(format!("no sign change on [0, {hi}]")));
    }
    let (mut lo, mut hi) = (0.0, hi);
    let mut steps = 0;
    while hi - lo > tol && steps < 200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Ok((0.5 * (lo + hi), steps))
}

/// Roots of `ρ(M_ℓ(q)) = 1` along `ℓ = 1, 2, 4, …`.
#[derive(Clone, Debug, PartialEq)]
pub struct RootSequence {
    pub kind: Kind,
    /// `(ℓ, root)` pairs.
    pub roots: Vec<(usize, f64)>,
    /// Whether two successive roots agreed within the tolerance.
    pub converged: bool,
}

impl RootSequence {
    pub fn value(&self) -> f64 {
        self.roots.last().map_or(f64::NAN, |r| r.1)
    }

    /// `(min, max)` over all computed roots.
    pub fn bracket(&self) -> (f64, f64) {
        self.roots.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, r)| (lo.min(r), hi.max(r)))
    }
}

fn require_connected(g: &GifsGraph) -> Result<()> {
    if g.edges().is_empty() || !g.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    Ok(())
}

/// Doubling-`ℓ` spectral solver. Stops when successive roots differ by
/// less than `tol` or `ℓ` would exceed `l_max`.
pub fn spectral_roots(g: &GifsGraph, kind: Kind, l_max: usize, tol: f64) -> Result<RootSequence> {
    require_connected(g)?;
    if l_max == 0 {
        return Err(Error::InvalidArgument("l_max must be at least 1".into()));
    }
    let classes = linear_classes(g);
    let hi = g.signature().metric_dim() as f64 + BRACKET_EXTRA;
    let root_tol = (tol * 1e-4).max(1e-13);
    let mut level = first_level(g, &classes);
    let mut len = 1;
    let mut roots: Vec<(usize, f64)> = Vec::new();
    let mut converged = false;
    loop {
        let logs = log_level(&level, &classes);
        let (root, _) = bisect(|q| log_rho(&logs, q, kind), hi, root_tol)?;
        if let Some(&(_, prev)) = roots.last() {
            if (root - prev).abs() < tol {
                converged = true;
            }
        }
        roots.push((len, root));
        if converged || 2 * len > l_max {
            break;
        }
        level = concat(&level, &level);
        len *= 2;
    }
    Ok(RootSequence { kind, roots, converged })
}

pub fn affinity_dim_spectral(g: &GifsGraph, l_max: usize, tol: f64) -> Result<RootSequence> {
    spectral_roots(g, Kind::Upper, l_max, tol)
}

pub fn lower_affinity_dim_spectral(g: &GifsGraph, l_max: usize, tol: f64) -> Result<RootSequence> {
    spectral_roots(g, Kind::Lower, l_max, tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Diverging,
    Converging,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeResult {
    pub q: f64,
    pub classification: Classification,
    /// Geometric mean of `S_{ℓ+1}/S_ℓ` over the second half of the run.
    pub tail_ratio: f64,
    /// `S_ℓ/S_{ℓ−1}` for `ℓ = 1..=L`.
    pub ratios: Vec<f64>,
    /// `log S_ℓ` for `ℓ = 0..=L`.
    pub log_sums: Vec<f64>,
    /// Set when edges have different linear parts: the per-edge recursion
    /// then over-estimates `Φ^q(T_ω)`.
    pub biased: bool,
}

/// `log S_ℓ(q)` for `ℓ = 0..=len` via the vector recursion
/// `s_ℓ(i) = Σ_{e: i→j} Φ^q(T_e) s_{ℓ−1}(j)`.
fn partial_log_sums(g: &GifsGraph, q: f64, len: usize, kind: Kind) -> Vec<f64> {
    let n = g.vertex_count();
    let weights: Vec<f64> =
        g.edges().iter().map(|e| kind.log_svf(q, &e.map.linear.log_singular_values()).exp()).collect();
    let mut s = vec![1.0; n];
    let mut scale = 0.0;
    let mut out = vec![(n as f64).ln()];
    for _ in 0..len {
        let mut next = vec![0.0; n];
        for (i, slot) in next.iter_mut().enumerate() {
            *slot = g.outgoing(i).iter().map(|&k| weights[k] * s[g.edges()[k].to]).sum();
        }
        let top = next.iter().copied().fold(0.0f64, f64::max);
        if top == 0.0 {
            out.push(f64::NEG_INFINITY);
            s = next;
            continue;
        }
        for x in &mut next {
            *x /= top;
        }
        scale += top.ln();
        out.push(scale + next.iter().sum::<f64>().ln());
        s = next;
    }
    out
}

fn tail_ratio(log_sums: &[f64]) -> f64 {
    let len = log_sums.len() - 1;
    let mid = len / 2;
    ((log_sums[len] - log_sums[mid]) / (len - mid) as f64).exp()
}

/// Classifies the series `Σ_ℓ S_ℓ(q)` as converging or diverging from the
/// tail growth ratio, with margin `10·tol` around 1.
pub fn partial_sum_probe(g: &GifsGraph, q: f64, len: usize, tol: f64) -> Result<ProbeResult> {
    probe(g, q, len, tol, Kind::Upper)
}

pub fn probe(g: &GifsGraph, q: f64, len: usize, tol: f64, kind: Kind) -> Result<ProbeResult> {
    if len < 2 {
        return Err(Error::InvalidArgument(format!("partial-sum length {len} < 2")));
    }
    if !(q >= 0.0) {
        return Err(Error::InvalidArgument(format!("q = {q} must be nonnegative")));
    }
    let log_sums = partial_log_sums(g, q, len, kind);
    let ratios = log_sums.windows(2).map(|w| (w[1] - w[0]).exp()).collect();
    let tail = tail_ratio(&log_sums);
    let margin = 10.0 * tol;
    let classification = if tail < 1.0 - margin {
        Classification::Converging
    } else if tail > 1.0 + margin {
        Classification::Diverging
    } else {
        Classification::Inconclusive
    };
    Ok(ProbeResult { q, classification, tail_ratio: tail, ratios, log_sums, biased: g.uniform_linear().is_none() })
}

/// Bracket `(lo, hi)` of width below `tol` around the sign change of the
/// tail log-ratio, plus the number of bisection steps.
pub fn partial_sum_bracket(g: &GifsGraph, len: usize, tol: f64, kind: Kind) -> Result<((f64, f64), usize)> {
    require_connected(g)?;
    if len < 2 {
        return Err(Error::InvalidArgument(format!("partial-sum length {len} < 2")));
    }
    let f = |q: f64| tail_ratio(&partial_log_sums(g, q, len, kind)).ln();
    let mut hi = g.signature().metric_dim() as f64 + BRACKET_EXTRA;
    if f(0.0) <= 0.0 {
        return Ok(((0.0, 0.0), 0));
    }
    if f(hi) > 0.0 {
        return Err(Error::NoRoot(format!("no sign change on [0, {hi}]")));
    }
    let mut lo = 0.0;
    let mut steps = 0;
    while hi - lo > tol && steps < 200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Ok(((lo, hi), steps))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimOptions {
    pub tol: f64,
    pub l_max: usize,
    pub partial_len: usize,
    /// The user asserts the disjointness hypotheses needed for the lower
    /// bound. Never checked.
    pub assert_disjoint: bool,
}

impl Default for DimOptions {
    fn default() -> Self {
        DimOptions { tol: 1e-6, l_max: 64, partial_len: 60, assert_disjoint: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionReport {
    pub method: Method,
    pub affinity_dim: f64,
    pub lower_affinity_dim: f64,
    pub bracket: (f64, f64),
    pub lower_bracket: (f64, f64),
    pub spectral_radius: f64,
    pub metric_dim: usize,
    /// Final `ℓ` (spectral), path length `L` (partial sums), 0 otherwise.
    pub iterations: usize,
    pub roots: Vec<(usize, f64)>,
    pub lower_roots: Vec<(usize, f64)>,
    pub converged: bool,
    pub biased: bool,
    pub disjointness_asserted: bool,
    /// `(lower, upper)` bounds on the Hausdorff dimension.
    pub hausdorff_bounds: (f64, f64),
    /// `Φ^q(T)·ρ − 1` at the closed-form root.
    pub residual: Option<f64>,
}

fn r9(x: f64) -> Value {
    if x.is_finite() {
        json!((x * 1e9).round() / 1e9)
    } else {
        Value::Null
    }
}

impl DimensionReport {
    pub fn to_json(&self) -> Value {
        let pairs = |v: &[(usize, f64)]| Value::Array(v.iter().map(|&(l, r)| json!([l, r9(r)])).collect());
        json!({
            "method": self.method.as_str(),
            "affinity_dim": r9(self.affinity_dim),
            "lower_affinity_dim": r9(self.lower_affinity_dim),
            "bracket": [r9(self.bracket.0), r9(self.bracket.1)],
            "lower_bracket": [r9(self.lower_bracket.0), r9(self.lower_bracket.1)],
            "spectral_radius": r9(self.spectral_radius),
            "metric_dim": self.metric_dim,
            "iterations": self.iterations,
            "roots": pairs(&self.roots),
            "lower_roots": pairs(&self.lower_roots),
            "converged": self.converged,
            "biased": self.biased,
            "disjointness_asserted": self.disjointness_asserted,
            "hausdorff_bounds": [r9(self.hausdorff_bounds.0), r9(self.hausdorff_bounds.1)],
            "residual": self.residual.map_or(Value::Null, |r| json!(r)),
        })
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let mut row = |k: &str, v: String| writeln!(s, "{k:<22}{v}").unwrap();
        row("method", self.method.as_str().to_string());
        row("affinity_dim", format!("{:.9}", self.affinity_dim));
        row("lower_affinity_dim", format!("{:.9}", self.lower_affinity_dim));
        row("bracket", format!("[{:.9}, {:.9}]", self.bracket.0, self.bracket.1));
        row("lower_bracket", format!("[{:.9}, {:.9}]", self.lower_bracket.0, self.lower_bracket.1));
        row("spectral_radius", format!("{:.9}", self.spectral_radius));
        row("metric_dim", self.metric_dim.to_string());
        row("iterations", self.iterations.to_string());
        row("converged", self.converged.to_string());
        row("biased", self.biased.to_string());
        row("disjoint_asserted", self.disjointness_asserted.to_string());
        row("hausdorff_bounds", format!("[{:.9}, {:.9}]", self.hausdorff_bounds.0, self.hausdorff_bounds.1));
        s
    }
}

/// Runs one solver and assembles the report. Requires a strongly
/// connected graph; the closed form also needs a uniform linear part.
pub fn dimension_report(g: &GifsGraph, method: Method, opts: &DimOptions) -> Result<DimensionReport> {
    require_connected(g)?;
    let rho = g.spectral_radius()?;
    let mut report = DimensionReport {
        method,
        affinity_dim: f64::NAN,
        lower_affinity_dim: f64::NAN,
        bracket: (f64::NAN, f64::NAN),
        lower_bracket: (f64::NAN, f64::NAN),
        spectral_radius: rho,
        metric_dim: g.signature().metric_dim(),
        iterations: 0,
        roots: Vec::new(),
        lower_roots: Vec::new(),
        converged: true,
        biased: false,
        disjointness_asserted: opts.assert_disjoint,
        hausdorff_bounds: (0.0, f64::NAN),
        residual: None,
    };
    match method {
        Method::ClosedForm => {
            let t = g.uniform_linear().ok_or(Error::NotUniform)?;
            let up = affinity_dim_uniform(t, rho)?;
            let low = lower_affinity_dim_uniform(t, rho)?;
            report.affinity_dim = up;
            report.lower_affinity_dim = low;
            report.bracket = (up, up);
            report.lower_bracket = (low, low);
            report.residual = Some(log_phi(up, &t.log_singular_values()).exp() * rho - 1.0);
        }
        Method::SpectralIter => {
            let up = spectral_roots(g, Kind::Upper, opts.l_max, opts.tol)?;
            let low = spectral_roots(g, Kind::Lower, opts.l_max, opts.tol)?;
            report.affinity_dim = up.value();
            report.lower_affinity_dim = low.value();
            report.bracket = up.bracket();
            report.lower_bracket = low.bracket();
            report.iterations = up.roots.last().map_or(0, |r| r.0).max(low.roots.last().map_or(0, |r| r.0));
            report.converged = up.converged && low.converged;
            report.roots = up.roots;
            report.lower_roots = low.roots;
        }
        Method::PartialSum => {
            let (up, _) = partial_sum_bracket(g, opts.partial_len, opts.tol, Kind::Upper)?;
            let (low, _) = partial_sum_bracket(g, opts.partial_len, opts.tol, Kind::Lower)?;
            report.affinity_dim = 0.5 * (up.0 + up.1);
            report.lower_affinity_dim = 0.5 * (low.0 + low.1);
            report.bracket = up;
            report.lower_bracket = low;
            report.iterations = opts.partial_len;
            report.biased = g.uniform_linear().is_none();
        }
    }
    report.hausdorff_bounds = (if opts.assert_disjoint { report.lower_affinity_dim } else { 0.0 }, report.affinity_dim);
    Ok(report)
}

/// `(lower, upper)` bounds for the Hausdorff dimension of the solution
/// sets. The lower bound is only the lower affinity dimension when the
/// disjointness hypotheses are asserted, and 0 otherwise.
pub fn hausdorff_bounds(g: &GifsGraph, assert_disjoint: bool) -> Result<(f64, f64)> {
    let method = if g.uniform_linear().is_some() { Method::ClosedForm } else { Method::SpectralIter };
    let opts = DimOptions { assert_disjoint, ..DimOptions::default() };
    Ok(dimension_report(g, method, &opts)?.hausdorff_bounds)
}
