//! Graph-directed iterated function systems.
//!
//! An edge `i → j` labelled `f` means the term `f(Ω_j)` appears in the
//! equation for `Ω_i`, so entry `(i, j)` of the adjacency matrix counts
//! the maps carrying `Ω_j` into `Ω_i`.

pub mod file;
pub mod fixtures;
pub mod spectral;

use std::collections::{BTreeMap, HashSet};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebraic::{PadicEmbedding, QuadraticNumber};
use crate::error::{Error, Result};
use crate::mixed_space::{AffineMap, DiagonalMap, Point, SpaceSignature};

pub use file::{parse_spec, serialize_spec};
pub use fixtures::{
    example_boundary_full, example_boundary_reduced, example_main, fixture, random_uniform, FIXTURE_NAMES,
};
pub use spectral::{spectral_radius, spectral_radius_exact_2x2, strongly_connected_components};

/// Default absolute p-adic precision of edge maps.
pub const DEFAULT_PRECISION: usize = 96;

/// One coordinate of a linear multiplier or translation as written in a
/// system description.
#[derive(Clone, Debug, PartialEq)]
pub enum Coord {
    Exact(QuadraticNumber),
    Float(f64),
    Complex(Complex64),
}

/// A named constant, optionally fixing p-adic embeddings: for each prime
/// the residue its image must reduce to.
#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    pub name: String,
    pub value: QuadraticNumber,
    pub selectors: BTreeMap<u32, u32>,
}

/// Edge as described in a system file, before maps are built.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    pub label: Option<u32>,
    pub name: Option<String>,
    pub linear: Vec<Coord>,
    pub translate: Vec<Coord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: u32,
    pub name: String,
    pub map: AffineMap,
    /// Source coordinates, kept for serialization.
    pub coords: Option<(Vec<Coord>, Vec<Coord>)>,
}

/// A sequence of edges `ω_1 … ω_ℓ` running head to tail from `start` to
/// `end`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PathSlice {
    pub edges: Vec<usize>,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GifsGraph {
    signature: SpaceSignature,
    vertices: Vec<String>,
    edges: Vec<Edge>,
    constants: Vec<Constant>,
    embeddings: Vec<PadicEmbedding>,
    precision: usize,
    /// Outgoing edge indices per vertex, ordered by label.
    out: Vec<Vec<usize>>,
}

fn check_vertices(vertices: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for v in vertices {
        if !seen.insert(v.as_str()) {
            return Err(Error::Malformed(format!("duplicate vertex `{v}`")));
        }
    }
    Ok(())
}

fn embeddings_for(sig: &SpaceSignature, constants: &[Constant]) -> Result<Vec<PadicEmbedding>> {
    sig.primes
        .iter()
        .map(|&p| {
            let mut chosen: Option<PadicEmbedding> = None;
            for c in constants {
                if let Some(&res) = c.selectors.get(&p) {
                    let emb = PadicEmbedding::select(c.value.d(), p, &c.value, res)?;
                    match &chosen {
                        Some(prev) if *prev != emb => {
                            return Err(Error::Malformed(format!("conflicting selectors for prime {p}")))
                        }
                        _ => chosen = Some(emb),
                    }
                }
            }
            chosen.map_or_else(|| PadicEmbedding::rational(p), Ok)
        })
        .collect()
}

fn build_map(
    sig: &SpaceSignature,
    embeddings: &[PadicEmbedding],
    precision: usize,
    linear: &[Coord],
    translate: &[Coord],
) -> Result<AffineMap> {
    let n = sig.coordinate_count();
    if linear.len() != n || translate.len() != n {
        return Err(Error::SignatureMismatch(format!(
            "expected {n} coordinates, got {} linear and {} translation",
            linear.len(),
            translate.len()
        )));
    }
    type Parts = (Vec<f64>, Vec<Complex64>, Vec<crate::padic::PadicNumber>, Option<Vec<QuadraticNumber>>);
    let build = |coords: &[Coord]| -> Result<Parts> {
        let mut reals = Vec::new();
        let mut exact = Vec::new();
        let mut all_exact = sig.complex == 0;
        for c in &coords[..sig.real] {
            match c {
                Coord::Exact(q) => {
                    reals.push(q.embed_real());
                    exact.push(q.clone());
                }
                Coord::Float(x) => {
                    reals.push(*x);
                    all_exact = false;
                }
                Coord::Complex(_) => return Err(Error::Malformed("complex value in a real coordinate".into())),
            }
        }
        let mut complexes = Vec::new();
        for c in &coords[sig.real..sig.real + sig.complex] {
            complexes.push(match c {
                Coord::Complex(z) => *z,
                Coord::Float(x) => Complex64::new(*x, 0.0),
                Coord::Exact(q) => Complex64::new(q.embed_real(), 0.0),
            });
        }
        let mut padics = Vec::new();
        for (c, emb) in coords[sig.real + sig.complex..].iter().zip(embeddings) {
            match c {
                Coord::Exact(q) => {
                    if !q.is_rational() && emb.d() == 1 {
                        return Err(Error::Malformed(format!(
                            "no p-adic selector for prime {} to embed {q}",
                            emb.prime()
                        )));
                    }
                    padics.push(emb.embed(q, precision)?);
                    exact.push(q.clone());
                }
                _ => return Err(Error::Malformed("p-adic coordinates must be exact expressions".into())),
            }
        }
        Ok((reals, complexes, padics, all_exact.then_some(exact)))
    };
    let (reals, complexes, padics, exact) = build(linear)?;
    let lin = DiagonalMap { reals, complexes, padics, exact };
    let (reals, complexes, padics, exact_translate) = build(translate)?;
    Ok(AffineMap { linear: lin, translate: Point { reals, complexes, padics }, exact_translate })
}

impl GifsGraph {
    /// Builds a system from described edges, embedding exact coordinates
    /// through the p-adic embeddings fixed by the constants' selectors.
    pub fn from_specs(
        signature: SpaceSignature,
        vertices: Vec<String>,
        constants: Vec<Constant>,
        edges: Vec<EdgeSpec>,
        precision: usize,
    ) -> Result<Self> {
        check_vertices(&vertices)?;
        let embeddings = embeddings_for(&signature, &constants)?;
        let index =
            |name: &str| vertices.iter().position(|v| v == name).ok_or_else(|| Error::UnknownVertex(name.to_string()));
        let mut built = Vec::with_capacity(edges.len());
        for (k, e) in edges.into_iter().enumerate() {
            let map = build_map(&signature, &embeddings, precision, &e.linear, &e.translate)?;
            let label = e.label.unwrap_or(k as u32);
            built.push(Edge {
                from: index(&e.from)?,
                to: index(&e.to)?,
                label,
                name: e.name.unwrap_or_else(|| format!("f{label}")),
                map,
                coords: Some((e.linear, e.translate)),
            });
        }
        Self::assemble(signature, vertices, built, constants, embeddings, precision)
    }

    /// Builds a system directly from affine maps `(from, to, map)`; labels
    /// are the positions in `edges`.
    pub fn from_maps(
        signature: SpaceSignature,
        vertices: Vec<String>,
        edges: Vec<(usize, usize, AffineMap)>,
    ) -> Result<Self> {
        check_vertices(&vertices)?;
        let n = vertices.len();
        let mut built = Vec::with_capacity(edges.len());
        for (k, (from, to, map)) in edges.into_iter().enumerate() {
            for v in [from, to] {
                if v >= n {
                    return Err(Error::UnknownVertex(format!("#{v}")));
                }
            }
            if map.signature() != signature {
                return Err(Error::SignatureMismatch(format!("edge {k}")));
            }
            built.push(Edge { from, to, label: k as u32, name: format!("f{k}"), map, coords: None });
        }
        let embeddings = signature.primes.iter().map(|&p| PadicEmbedding::rational(p)).collect::<Result<_>>()?;
        Self::assemble(signature, vertices, built, Vec::new(), embeddings, DEFAULT_PRECISION)
    }

    fn assemble(
        signature: SpaceSignature,
        vertices: Vec<String>,
        edges: Vec<Edge>,
        constants: Vec<Constant>,
        embeddings: Vec<PadicEmbedding>,
        precision: usize,
    ) -> Result<Self> {
        let mut labels = HashSet::new();
        for (k, e) in edges.iter().enumerate() {
            if !labels.insert(e.label) {
                return Err(Error::Malformed(format!("duplicate edge label {}", e.label)));
            }
            if !e.map.linear.is_nonsingular() {
                return Err(Error::Singular(k));
            }
            if !e.map.linear.is_contracting() {
                let alpha = e.map.linear.singular_values().first().copied().unwrap_or(f64::NAN);
                return Err(Error::NotContracting { edge: k, alpha });
            }
        }
        let mut out = vec![Vec::new(); vertices.len()];
        for (k, e) in edges.iter().enumerate() {
            out[e.from].push(k);
        }
        for list in &mut out {
            list.sort_by_key(|&k| edges[k].label);
        }
        Ok(GifsGraph { signature, vertices, edges, constants, embeddings, precision, out })
    }

    pub fn signature(&self) -> &SpaceSignature {
        &self.signature
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize> {
        self.vertices.iter().position(|v| v == name).ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn constants(&self) -> &[Constant] {
        &self.constants
    }

    pub fn embeddings(&self) -> &[PadicEmbedding] {
        &self.embeddings
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    /// Outgoing edges of `v`, ordered by label.
    pub fn outgoing(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// `F_{ij}` = number of edges from `i` to `j`.
    pub fn adjacency_matrix(&self) -> Vec<Vec<u64>> {
        let n = self.vertices.len();
        let mut f = vec![vec![0u64; n]; n];
        for e in &self.edges {
            f[e.from][e.to] += 1;
        }
        f
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        spectral::spectral_radius_int(&self.adjacency_matrix())
    }

    pub fn is_strongly_connected(&self) -> bool {
        let adj: Vec<Vec<usize>> = self.out.iter().map(|l| l.iter().map(|&k| self.edges[k].to).collect()).collect();
        strongly_connected_components(&adj).len() == 1
    }

    /// `F^ℓ`, failing on overflow.
    pub fn path_counts(&self, len: usize) -> Result<Vec<Vec<u128>>> {
        let n = self.vertices.len();
        let f = self.adjacency_matrix();
        let mut acc: Vec<Vec<u128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u128).collect()).collect();
        for _ in 0..len {
            let mut next = vec![vec![0u128; n]; n];
            for i in 0..n {
                for k in 0..n {
                    if acc[i][k] == 0 {
                        continue;
                    }
                    for j in 0..n {
                        let add = acc[i][k]
                            .checked_mul(f[k][j] as u128)
                            .and_then(|x| x.checked_add(next[i][j]))
                            .ok_or_else(|| Error::BudgetExceeded("path count overflows".into()))?;
                        next[i][j] = add;
                    }
                }
            }
            acc = next;
        }
        Ok(acc)
    }

    fn paths_from(&self, start: usize, len: usize, out: &mut Vec<PathSlice>) {
        fn walk(g: &GifsGraph, v: usize, left: usize, stack: &mut Vec<usize>, start: usize, out: &mut Vec<PathSlice>) {
            if left == 0 {
                out.push(PathSlice { edges: stack.clone(), start, end: v });
                return;
            }
            for &k in &g.out[v] {
                stack.push(k);
                walk(g, g.edges[k].to, left - 1, stack, start, out);
                stack.pop();
            }
        }
        walk(self, start, len, &mut Vec::with_capacity(len), start, out);
    }

    fn group(paths: impl IntoIterator<Item = PathSlice>) -> BTreeMap<(usize, usize), Vec<PathSlice>> {
        let mut grouped: BTreeMap<(usize, usize), Vec<PathSlice>> = BTreeMap::new();
        for p in paths {
            grouped.entry((p.start, p.end)).or_default().push(p);
        }
        grouped
    }

    /// All paths of length `len` grouped by `(start, end)`, each group in
    /// lexicographic label order. Length zero gives no paths.
    pub fn enumerate_paths(&self, len: usize) -> BTreeMap<(usize, usize), Vec<PathSlice>> {
        if len == 0 {
            return BTreeMap::new();
        }
        let mut all = Vec::new();
        for v in 0..self.vertices.len() {
            self.paths_from(v, len, &mut all);
        }
        Self::group(all)
    }

    /// Same as [`enumerate_paths`](Self::enumerate_paths), split across
    /// threads by start vertex.
    pub fn enumerate_paths_par(&self, len: usize) -> BTreeMap<(usize, usize), Vec<PathSlice>> {
        if len == 0 {
            return BTreeMap::new();
        }
        let parts: Vec<Vec<PathSlice>> = (0..self.vertices.len())
            .into_par_iter()
            .map(|v| {
                let mut out = Vec::new();
                self.paths_from(v, len, &mut out);
                out
            })
            .collect();
        Self::group(parts.into_iter().flatten())
    }

    /// `T_{ω1} ∘ … ∘ T_{ωℓ}` on linear parts; identity for the empty path.
    pub fn path_linear(&self, path: &[usize]) -> Result<DiagonalMap> {
        let mut acc = DiagonalMap::identity(&self.signature, self.precision);
        for &k in path {
            acc = acc.compose(&self.edge(k)?.map.linear)?;
        }
        Ok(acc)
    }

    /// `f_{ω1} ∘ … ∘ f_{ωℓ}`; identity for the empty path.
    pub fn path_affine(&self, path: &[usize]) -> Result<AffineMap> {
        let mut acc = AffineMap::identity(&self.signature, self.precision);
        for &k in path {
            acc = acc.compose(&self.edge(k)?.map)?;
        }
        Ok(acc)
    }

    fn edge(&self, k: usize) -> Result<&Edge> {
        self.edges.get(k).ok_or_else(|| Error::InvalidArgument(format!("edge index {k} out of range")))
    }

    /// The common linear part when every edge shares one.
    pub fn uniform_linear(&self) -> Option<&DiagonalMap> {
        let first = &self.edges.first()?.map.linear;
        let same = |l: &DiagonalMap| match (&l.exact, &first.exact) {
            (Some(a), Some(b)) => a == b,
            _ => l.reals == first.reals && l.complexes == first.complexes && l.padics == first.padics,
        };
        self.edges.iter().all(|e| same(&e.map.linear)).then_some(first)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svf::phi_of;

    fn mat_pow(f: &[Vec<u64>], len: usize) -> Vec<Vec<u128>> {
        let n = f.len();
        let mut acc: Vec<Vec<u128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u128).collect()).collect();
        for _ in 0..len {
            acc = (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| acc[i][k] * f[k][j] as u128).sum()).collect()).collect();
        }
        acc
    }

    #[test]
    fn main_paths() {
        let g = example_main().unwrap();
        let total = |len| g.enumerate_paths(len).values().map(Vec::len).sum::<usize>();
        assert_eq!(total(1), 6);
        assert_eq!(total(2), 22);
        assert!(g.enumerate_paths(0).is_empty());
        let p2 = g.enumerate_paths(2);
        assert_eq!(p2[&(0, 0)].len(), 11);
        assert_eq!(p2[&(0, 1)].len(), 6);
        assert_eq!(p2[&(1, 0)].len(), 3);
        assert_eq!(p2[&(1, 1)].len(), 2);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn path_counts_match_matrix_powers() {
        for g in [example_main().unwrap(), example_boundary_full().unwrap(), example_boundary_reduced().unwrap()] {
            let f = g.adjacency_matrix();
            for len in 1..=6 {
                let grouped = g.enumerate_paths(len);
                let want = mat_pow(&f, len);
                assert_eq!(g.path_counts(len).unwrap(), want);
                for i in 0..f.len() {
                    for j in 0..f.len() {
                        let got = grouped.get(&(i, j)).map_or(0, Vec::len) as u128;
                        assert_eq!(got, want[i][j]);
                    }
                }
                assert_eq!(grouped, g.enumerate_paths_par(len));
                for paths in grouped.values() {
                    for p in paths {
                        let mut v = p.start;
                        for &k in &p.edges {
                            assert_eq!(g.edges()[k].from, v);
                            v = g.edges()[k].to;
                        }
                        assert_eq!(v, p.end);
                    }
                }
            }
        }
    }

    #[test]
    fn connectivity() {
        assert!(example_main().unwrap().is_strongly_connected());
        assert!(example_boundary_reduced().unwrap().is_strongly_connected());
        assert!(!example_boundary_full().unwrap().is_strongly_connected());
        let sig = SpaceSignature::new(1, 0, vec![]).unwrap();
        let g = GifsGraph::from_maps(sig, vec!["x".into(), "y".into()], vec![]).unwrap();
        assert!(!g.is_strongly_connected());
        assert_eq!(g.adjacency_matrix(), vec![vec![0, 0], vec![0, 0]]);
    }

    #[test]
    fn uniform_paths_are_powers() {
        let g = example_main().unwrap();
        let t = g.uniform_linear().unwrap().clone();
        assert_eq!(g.path_linear(&[]).unwrap(), DiagonalMap::identity(g.signature(), g.precision()));
        assert_eq!(g.path_affine(&[]).unwrap(), AffineMap::identity(g.signature(), g.precision()));
        for paths in g.enumerate_paths(4).values() {
            for p in paths {
                let tw = g.path_linear(&p.edges).unwrap();
                let t4 = t.pow(4).unwrap();
                assert_eq!(tw.exact, t4.exact);
                for q in [0.5, 1.0, 1.7, 2.0, 2.5] {
                    assert!((phi_of(q, &tw) / phi_of(q, &t).powi(4) - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn radius_of_fixtures() {
        let g = example_main().unwrap();
        assert!((g.spectral_radius().unwrap() - (3.0 + 17f64.sqrt()) / 2.0).abs() < 1e-12);
        let b = example_boundary_reduced().unwrap();
        assert!(b.adjacency_matrix().iter().all(|r| r.iter().sum::<u64>() == 2));
        assert!((b.spectral_radius().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_edges() {
        let sig = SpaceSignature::new(1, 0, vec![]).unwrap();
        let spec = |x: f64| EdgeSpec {
            from: "a".into(),
            to: "a".into(),
            label: None,
            name: None,
            linear: vec![Coord::Float(x)],
            translate: vec![Coord::Float(0.0)],
        };
        let build = |e| GifsGraph::from_specs(sig.clone(), vec!["a".into()], vec![], vec![e], 8);
        assert!(matches!(build(spec(1.5)), Err(Error::NotContracting { edge: 0, .. })));
        assert!(matches!(build(spec(0.0)), Err(Error::Singular(0))));
        let mut e = spec(0.5);
        e.to = "zz".into();
        assert!(matches!(build(e), Err(Error::UnknownVertex(_))));
        assert!(GifsGraph::from_specs(sig, vec!["a".into(), "a".into()], vec![], vec![], 8).is_err());
    }
}
