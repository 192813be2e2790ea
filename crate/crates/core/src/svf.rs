//! Singular value functions of diagonal maps.
//!
//! For singular values `α_1 ≥ … ≥ α_d`:
//!
//! * `Φ^q = α_1 ⋯ α_{j−1} · α_j^(q−j+1)` for `j−1 < q ≤ j ≤ d`,
//! * `Ψ^q` is the same expression over the ascending order `α_d ≤ … ≤ α_1`,
//! * both equal `(α_1 ⋯ α_d)^(q/d)` for `q > d` and `1` at `q = 0`.
//!
//! Everything is evaluated on logarithms so that long compositions (which
//! multiply hundreds of factors below one) do not underflow.

use crate::error::{Error, Result};
use crate::mixed_space::DiagonalMap;

/// `log Φ^q` from logs sorted in the order the product runs over.
fn log_segmented(q: f64, logs: &[f64]) -> f64 {
    let d = logs.len();
    if q <= 0.0 || d == 0 {
        return 0.0;
    }
    if q > d as f64 {
        return q / d as f64 * logs.iter().sum::<f64>();
    }
    // closed segment (j-1, j]
    let j = q.ceil() as usize;
    let head: f64 = logs[..j - 1].iter().sum();
    head + (q - (j - 1) as f64) * logs[j - 1]
}

/// `log Φ^q` for log singular values sorted descending. No range checks,
/// so it also serves inverses of contractions.
pub fn log_phi(q: f64, log_alphas_desc: &[f64]) -> f64 {
    log_segmented(q, log_alphas_desc)
}

/// `log Ψ^q` for log singular values sorted descending.
pub fn log_psi(q: f64, log_alphas_desc: &[f64]) -> f64 {
    let asc: Vec<f64> = log_alphas_desc.iter().rev().copied().collect();
    log_segmented(q, &asc)
}

fn validate(q: f64, alphas: &[f64], d: usize) -> Result<Vec<f64>> {
    if !(q >= 0.0) {
        return Err(Error::InvalidArgument(format!("q = {q} must be nonnegative")));
    }
    if alphas.len() != d {
        return Err(Error::InvalidSingularValues(format!("expected {d} values, got {}", alphas.len())));
    }
    if alphas.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidSingularValues("not sorted descending".into()));
    }
    if let Some(a) = alphas.iter().find(|&&a| !(a > 0.0 && a < 1.0)) {
        return Err(Error::InvalidSingularValues(format!("{a} is outside (0, 1)")));
    }
    Ok(alphas.iter().map(|a| a.ln()).collect())
}

/// The singular value function `Φ^q`.
pub fn phi(q: f64, alphas: &[f64], d: usize) -> Result<f64> {
    let logs = validate(q, alphas, d)?;
    Ok(log_phi(q, &logs).exp())
}

/// The dual singular value function `Ψ^q`.
pub fn psi(q: f64, alphas: &[f64], d: usize) -> Result<f64> {
    let logs = validate(q, alphas, d)?;
    Ok(log_psi(q, &logs).exp())
}

/// `Φ^q(T)` straight from a diagonal map.
pub fn phi_of(q: f64, t: &DiagonalMap) -> f64 {
    log_phi(q, &t.log_singular_values()).exp()
}

/// `Ψ^q(T)` straight from a diagonal map.
pub fn psi_of(q: f64, t: &DiagonalMap) -> f64 {
    log_psi(q, &t.log_singular_values()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixed_space::SpaceSignature;
    use crate::padic::PadicNumber;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn example_alphas() -> Vec<f64> {
        vec![(17f64.sqrt() - 3.0) / 2.0, 0.5]
    }

    #[test]
    fn phi_examples() {
        let a = example_alphas();
        assert_eq!(phi(0.0, &a, 2).unwrap(), 1.0);
        let q2 = phi(2.0, &a, 2).unwrap();
        assert!((q2 - (17f64.sqrt() - 3.0) / 4.0).abs() < 1e-15);
        assert!((q2 - 0.28078).abs() < 1e-5);
        let q3 = phi(3.0, &a, 2).unwrap();
        assert!((q3 - q2.powf(1.5)).abs() < 1e-15);
        assert!((q3 - 0.14878).abs() < 1e-5);
    }

    #[test]
    fn psi_examples() {
        let a = example_alphas();
        assert_eq!(psi(0.0, &a, 2).unwrap(), 1.0);
        assert!((psi(1.0, &a, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!((psi(2.0, &a, 2).unwrap() - phi(2.0, &a, 2).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn input_errors() {
        assert!(matches!(phi(1.0, &[0.5, 0.6], 2), Err(Error::InvalidSingularValues(_))));
        assert!(matches!(phi(1.0, &[1.5, 0.6], 2), Err(Error::InvalidSingularValues(_))));
        assert!(matches!(phi(1.0, &[0.5], 2), Err(Error::InvalidSingularValues(_))));
        assert!(matches!(psi(1.0, &[0.5, 0.0], 2), Err(Error::InvalidSingularValues(_))));
        assert!(phi(-1.0, &[0.5], 1).is_err());
    }

    #[test]
    fn decreasing_and_continuous() {
        let a = [0.9, 0.7, 0.4, 0.1];
        let mut prev_phi = f64::INFINITY;
        let mut prev_psi = f64::INFINITY;
        for i in 0..=600 {
            let q = i as f64 * 0.01;
            let (f, g) = (phi(q, &a, 4).unwrap(), psi(q, &a, 4).unwrap());
            assert!(f < prev_phi && g < prev_psi, "q = {q}");
            prev_phi = f;
            prev_psi = g;
        }
        // both one-sided limits agree at the integer breakpoints
        for j in 1..=5 {
            let q = j as f64;
            for func in [phi, psi] {
                let at = func(q, &a, 4).unwrap();
                let right = func(q + 1e-9, &a, 4).unwrap();
                let left = func(q - 1e-9, &a, 4).unwrap();
                assert!((at - right).abs() < 1e-8 && (at - left).abs() < 1e-8);
            }
        }
    }

    fn arb_map() -> impl Strategy<Value = DiagonalMap> {
        (
            prop::collection::vec(prop_oneof![-0.95f64..-0.05, 0.05f64..0.95], 2),
            (0.05f64..0.95, -3.0f64..3.0),
            1i64..4,
            prop::sample::select(vec![1i64, 3, 5, 7]),
        )
            .prop_map(|(reals, (r, th), v, u)| DiagonalMap {
                reals,
                complexes: vec![Complex64::from_polar(r, th)],
                padics: vec![PadicNumber::from_rational(u, 1, 2, 24).unwrap().shift(v)],
                exact: None,
            })
    }

    proptest! {
        #[test]
        fn phi_submultiplicative(t in arb_map(), u in arb_map(), q in 0.0f64..7.0) {
            let tu = t.compose(&u).unwrap();
            prop_assert!(phi_of(q, &tu) <= phi_of(q, &t) * phi_of(q, &u) * (1.0 + 1e-12));
        }

        #[test]
        fn psi_supermultiplicative(t in arb_map(), u in arb_map(), q in 0.0f64..7.0) {
            let tu = t.compose(&u).unwrap();
            prop_assert!(psi_of(q, &tu) >= psi_of(q, &t) * psi_of(q, &u) * (1.0 - 1e-12));
        }

        #[test]
        fn power_identity(t in arb_map(), n in 1u32..12, q in 0.0f64..7.0) {
            let tn = t.pow(n).unwrap();
            let lhs = phi_of(q, &tn);
            let rhs = phi_of(q, &t).powi(n as i32);
            prop_assert!((lhs / rhs - 1.0).abs() < 1e-11);
        }

        #[test]
        fn duality(t in arb_map(), q in 0.0f64..7.0) {
            let inv = t.inverse().unwrap();
            let lhs = psi_of(q, &t);
            let rhs = 1.0 / log_phi(q, &inv.log_singular_values()).exp();
            prop_assert!((lhs / rhs - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_map() {
        let id = DiagonalMap::identity(&SpaceSignature::new(1, 0, vec![2]).unwrap(), 4);
        assert_eq!(phi_of(1.5, &id), 1.0);
    }
}
