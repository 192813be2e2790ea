//! Spectral radius of nonnegative matrices and strongly connected
//! components of their support graphs.

use crate::algebraic::QuadraticNumber;
use crate::error::{Error, Result};

/// Power-iteration stopping tolerance on the Collatz–Wielandt gap.
pub const POWER_TOL: f64 = 1e-13;
/// Power-iteration step limit.
pub const POWER_MAX_ITER: usize = 100_000;

/// Strongly connected components of a directed graph given by adjacency
/// lists (Tarjan). Components come out in reverse topological order;
/// vertices inside a component are sorted.
pub fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct State<'a> {
        adj: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }

    fn visit(s: &mut State<'_>, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for &w in &s.adj[v] {
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                _ => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().expect("nonempty stack");
                s.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            s.out.push(comp);
        }
    }

    let n = adj.len();
    let mut s = State {
        adj,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.out
}

fn support(m: &[Vec<f64>]) -> Vec<Vec<usize>> {
    m.iter().map(|row| row.iter().enumerate().filter(|(_, &x)| x > 0.0).map(|(j, _)| j).collect()).collect()
}

fn check_square_nonneg(m: &[Vec<f64>]) -> Result<()> {
    let n = m.len();
    for row in m {
        if row.len() != n {
            return Err(Error::NonSquare(n, row.len()));
        }
        if row.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite and nonnegative".into()));
        }
    }
    Ok(())
}

/// Perron root of an irreducible nonnegative matrix.
///
/// Iterates on `M/s + I` (primitive, same Perron vector) from the all-ones
/// vector and stops once the Collatz–Wielandt bounds
/// `min (Bx)_i/x_i ≤ ρ(B) ≤ max (Bx)_i/x_i` agree to `tol` relative.
pub fn perron_root(m: &[Vec<f64>], tol: f64, max_iter: usize) -> Result<(f64, usize)> {
    check_square_nonneg(m)?;
    let n = m.len();
    if n == 0 {
        return Ok((0.0, 0));
    }
    let scale = m.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    if scale == 0.0 {
        return Ok((0.0, 0));
    }
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    for it in 1..=max_iter {
        for i in 0..n {
            let row = &m[i];
            let mut acc = x[i];
            for j in 0..n {
                acc += row[j] / scale * x[j];
            }
            y[i] = acc;
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let r = y[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if hi - lo <= tol * (hi - 1.0).max(f64::MIN_POSITIVE) || hi - lo <= f64::EPSILON * hi {
            return Ok(((0.5 * (lo + hi) - 1.0) * scale, it));
        }
        let norm = y.iter().fold(0.0f64, |a, &b| a.max(b));
        for i in 0..n {
            x[i] = y[i] / norm;
        }
    }
    Err(Error::BudgetExceeded(format!("power iteration did not converge in {max_iter} steps")))
}

/// Largest eigenvalue modulus of a nonnegative square matrix: the maximum
/// Perron root over the strongly connected blocks of its support.
pub fn spectral_radius(m: &[Vec<f64>]) -> Result<f64> {
    spectral_radius_with(m, POWER_TOL, POWER_MAX_ITER)
}

pub fn spectral_radius_with(m: &[Vec<f64>], tol: f64, max_iter: usize) -> Result<f64> {
    check_square_nonneg(m)?;
    let mut best = 0.0f64;
    for comp in strongly_connected_components(&support(m)) {
        if comp.len() == 1 && m[comp[0]][comp[0]] == 0.0 {
            continue;
        }
        let block: Vec<Vec<f64>> = comp.iter().map(|&i| comp.iter().map(|&j| m[i][j]).collect()).collect();
        best = best.max(perron_root(&block, tol, max_iter)?.0);
    }
    Ok(best)
}

/// Integer matrix convenience wrapper.
pub fn spectral_radius_int(m: &[Vec<u64>]) -> Result<f64> {
    let f: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    spectral_radius(&f)
}

/// Exact spectral radius `(tr + √(tr² − 4 det)) / 2` of a nonnegative
/// integer 2×2 matrix.
pub fn spectral_radius_exact_2x2(m: &[Vec<u64>]) -> Result<QuadraticNumber> {
    if m.len() != 2 || m.iter().any(|r| r.len() != 2) {
        return Err(Error::NonSquare(m.len(), m.first().map_or(0, Vec::len)));
    }
    let (a, b, c, d) = (m[0][0] as i128, m[0][1] as i128, m[1][0] as i128, m[1][1] as i128);
    let disc = (a - d) * (a - d) + 4 * b * c;
    let root =
        QuadraticNumber::sqrt_of(u64::try_from(disc).map_err(|_| Error::InvalidArgument("entries too large".into()))?);
    let tr = QuadraticNumber::from_integer(a + d);
    tr.add(&root)?.div(&QuadraticNumber::from_integer(2))
}
