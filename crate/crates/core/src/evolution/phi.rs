//! Exponential integrator coefficients `φ_k(z) = Σ_j z^j / (j + k)!`.
//!
//! `φ₀(z) = eᶻ`, `φ_{k+1}(z) = (φ_k(z) − 1/k!)/z`, `φ_k(0) = 1/k!`.

/// Below this magnitude the Taylor series is used; above it, the recurrence.
/// For |z| < 1 the series converges to machine precision within 25 terms,
/// while the recurrence would lose about `k·log10(1/|z|)` digits.
const SERIES_RADIUS: f64 = 1.0;
const SERIES_TERMS: usize = 25;

/// `[φ₀(z), φ₁(z), ..., φ_K(z)]` for real `z`.
pub fn phi_functions<const K: usize>(z: f64) -> [f64; K] {
    let mut out = [0.0; K];
    if z.abs() < SERIES_RADIUS {
        for (k, slot) in out.iter_mut().enumerate() {
            // Horner on Σ_j z^j / (j+k)!
            let mut acc = 0.0;
            for j in (0..SERIES_TERMS).rev() {
                acc = acc * z / (j + k + 1) as f64 + 1.0;
            }
            *slot = acc / factorial(k);
        }
    } else {
        let mut prev = z.exp();
        let mut inv_fact = 1.0;
        for (k, slot) in out.iter_mut().enumerate() {
            if k > 0 {
                prev = (prev - inv_fact) / z;
                inv_fact /= k as f64;
            }
            *slot = prev;
        }
    }
    out
}

/// `φ₁(z) = (eᶻ − 1)/z` with `φ₁(0) = 1`.
pub fn phi1(z: f64) -> f64 {
    phi_functions::<2>(z)[1]
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(k: usize, z: f64) -> f64 {
        // direct definition via high-order series in f64 is fine near 0; use the
        // closed forms elsewhere
        match k {
            0 => z.exp(),
            1 => z.exp_m1() / z,
            2 => (z.exp_m1() - z) / (z * z),
            3 => (z.exp_m1() - z - 0.5 * z * z) / (z * z * z),
            _ => unreachable!(),
        }
    }

    #[test]
    fn limits_at_zero() {
        let p = phi_functions::<4>(0.0);
        assert_eq!(p, [1.0, 1.0, 0.5, 1.0 / 6.0]);
    }

    #[test]
    fn agrees_with_closed_forms_away_from_zero() {
        for &z in &[-1e3, -50.0, -3.0, -1.0, -0.999, -0.5, 0.5, 2.0] {
            let p = phi_functions::<4>(z);
            for k in 0..4 {
                let r = reference(k, z);
                assert!(
                    (p[k] - r).abs() <= 1e-12 * r.abs().max(1e-300),
                    "k={k} z={z}: {} vs {r}",
                    p[k]
                );
            }
        }
    }

    #[test]
    fn continuous_across_the_switch() {
        let below = phi_functions::<4>(-1.0 + 1e-12);
        let above = phi_functions::<4>(-1.0 - 1e-12);
        for k in 0..4 {
            assert!((below[k] - above[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn tiny_arguments_do_not_cancel() {
        let z = -1e-9;
        assert!((phi1(z) - (1.0 + z / 2.0)).abs() < 1e-16);
        let p = phi_functions::<4>(z);
        assert!((p[3] - (1.0 / 6.0 + z / 24.0)).abs() < 1e-16);
    }
}
