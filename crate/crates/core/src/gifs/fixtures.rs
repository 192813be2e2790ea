//! Built-in systems over ℝ × ℚ₂ with `T(x) = (κ x₁, λ x₂)`,
//! `κ = (3−√17)/2`, `λ = (3+√17)/2` (the 2-adic root divisible by 2),
//! `t₁ = (κ, λ)` and `t₂ = (κ+1, λ+1)`.
//!
//! * `main`: the two tiles `Ω_a`, `Ω_b`.
//! * `boundary-full`: the eight boundary pieces `Ξ_(x,y,t)`.
//! * `boundary`: the strongly connected five-piece reduction.

use num_complex::Complex64;
use rand::Rng;

use super::{parse_spec, GifsGraph};
use crate::error::{Error, Result};
use crate::mixed_space::{AffineMap, DiagonalMap, Point, SpaceSignature};
use crate::padic::PadicNumber;

pub const FIXTURE_NAMES: [&str; 3] = ["main", "boundary-full", "boundary"];

const MAIN: &str = include_str!("../../fixtures/main.json");
const BOUNDARY_FULL: &str = include_str!("../../fixtures/boundary_full.json");
const BOUNDARY: &str = include_str!("../../fixtures/boundary.json");

/// Source text of a named fixture.
pub fn fixture_text(name: &str) -> Result<&'static str> {
    match name {
        "main" => Ok(MAIN),
        "boundary-full" => Ok(BOUNDARY_FULL),
        "boundary" => Ok(BOUNDARY),
        _ => Err(Error::InvalidArgument(format!(
            "unknown fixture `{name}` (expected one of {})",
            FIXTURE_NAMES.join(", ")
        ))),
    }
}

pub fn fixture(name: &str) -> Result<GifsGraph> {
    parse_spec(fixture_text(name)?)
}

pub fn example_main() -> Result<GifsGraph> {
    fixture("main")
}

pub fn example_boundary_full() -> Result<GifsGraph> {
    fixture("boundary-full")
}

pub fn example_boundary_reduced() -> Result<GifsGraph> {
    fixture("boundary")
}

/// A random strongly connected system whose edges share one diagonal
/// contraction: 1 to 4 vertices on a directed cycle plus extra random
/// edges, over one of ℝ×ℚ₂, ℝ², ℝ×ℂ or ℝ×ℚ₃.
pub fn random_uniform<R: Rng>(rng: &mut R) -> Result<GifsGraph> {
    const PREC: usize = 24;
    let sig = match rng.gen_range(0..4) {
        0 => SpaceSignature::new(1, 0, vec![2])?,
        1 => SpaceSignature::new(2, 0, vec![])?,
        2 => SpaceSignature::new(1, 1, vec![])?,
        _ => SpaceSignature::new(1, 0, vec![3])?,
    };
    let real = |rng: &mut R| {
        let m = rng.gen_range(0.1..0.9);
        if rng.gen_bool(0.5) {
            -m
        } else {
            m
        }
    };
    let reals = (0..sig.real).map(|_| real(rng)).collect();
    let complexes =
        (0..sig.complex).map(|_| Complex64::from_polar(rng.gen_range(0.1..0.9), rng.gen_range(-3.0..3.0))).collect();
    let padics = sig
        .primes
        .iter()
        .map(|&p| {
            let unit = loop {
                let u: i64 = rng.gen_range(1..50);
                if u % p as i64 != 0 {
                    break u;
                }
            };
            Ok(PadicNumber::from_integer(unit, p, PREC)?.shift(rng.gen_range(1..4)))
        })
        .collect::<Result<_>>()?;
    let linear = DiagonalMap { reals, complexes, padics, exact: None };

    let n = rng.gen_range(1..=4);
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    for _ in 0..rng.gen_range(0..=2 * n) {
        pairs.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    let edges = pairs
        .into_iter()
        .map(|(i, j)| {
            let t = Point {
                reals: (0..sig.real).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                complexes: (0..sig.complex).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect(),
                padics: sig
                    .primes
                    .iter()
                    .map(|&p| PadicNumber::from_integer(rng.gen_range(0..16), p, PREC))
                    .collect::<Result<_>>()?,
            };
            Ok((i, j, AffineMap::new(linear.clone(), t)?))
        })
        .collect::<Result<Vec<_>>>()?;
    GifsGraph::from_maps(sig, (0..n).map(|i| format!("v{i}")).collect(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebraic::QuadraticNumber;

    #[test]
    fn shapes() {
        let g = example_main().unwrap();
        assert_eq!((g.vertex_count(), g.edges().len()), (2, 6));
        assert_eq!(g.adjacency_matrix(), vec![vec![3, 2], vec![1, 0]]);
        let b = example_boundary_reduced().unwrap();
        assert_eq!((b.vertex_count(), b.edges().len()), (5, 10));
        let f = example_boundary_full().unwrap();
        assert_eq!((f.vertex_count(), f.edges().len()), (8, 14));
        assert!(fixture("nope").is_err());
    }

    #[test]
    fn random_systems_are_uniform_and_connected() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let g = random_uniform(&mut rng).unwrap();
            assert!(g.is_strongly_connected());
            assert!(g.uniform_linear().is_some());
        }
    }

    #[test]
    fn fixtures_are_uniform_with_exact_t() {
        let kappa = QuadraticNumber::parse("(3-sqrt(17))/2").unwrap();
        let lambda = QuadraticNumber::parse("(3+sqrt(17))/2").unwrap();
        for name in FIXTURE_NAMES {
            let g = fixture(name).unwrap();
            let t = g.uniform_linear().expect("uniform");
            assert_eq!(t.exact.as_ref().unwrap(), &vec![kappa.clone(), lambda.clone()]);
            assert_eq!(t.padics[0].to_digit_string().get(..5), Some("01101"));
            assert!((t.padics[0].norm_f64() - 0.5).abs() < 1e-15);
            assert!((t.reals[0] - kappa.embed_real()).abs() < 1e-15);
        }
    }

    #[test]
    fn translations() {
        let g = example_main().unwrap();
        let names: Vec<&str> = g.edges().iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, ["T(x)", "T(x)", "T(x)+1/2 t1", "T(x)+1/2 t1", "T(x)+t2", "T(x)+t1"]);
        let half = &g.edges()[2].map;
        let lambda = &g.edges()[0].map.linear.padics[0];
        // λ/2 is a 2-adic unit
        assert_eq!(half.translate.padics[0].valuation(), Some(0));
        let two = crate::PadicNumber::from_integer(2, 2, 90).unwrap();
        assert!(half.translate.padics[0].mul(&two).unwrap().eq_mod(lambda, 90));
    }
}
