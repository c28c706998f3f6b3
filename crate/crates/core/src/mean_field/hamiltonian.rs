//! The truncated Hamiltonian `H^R` and its maximizer.

use super::problem::Radius;

/// `H^R(p)` and the optimal control `α = −H^R_p(p)`.
///
/// `H^R(p) = ½|p|²` for `|p| ≤ R` and `R|p| − ½R²` beyond; `α` is `−p`
/// clipped to the ball of radius `R`.
pub fn hamiltonian_hr(p: &[f64], radius: Radius) -> (f64, Vec<f64>) {
    let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (value, scale) = value_and_scale(norm, radius.value());
    (value, p.iter().map(|v| -scale * v).collect())
}

/// `(H^R, s)` with `−H^R_p(p) = −s p`, given `|p|`.
///
/// Inside the ball the untruncated formulas are used verbatim, so results do
/// not depend on `R` at all as long as `|p| ≤ R`.
#[inline]
pub(crate) fn value_and_scale(norm: f64, r: f64) -> (f64, f64) {
    if norm > r {
        (r * norm - 0.5 * r * r, r / norm)
    } else {
        (0.5 * norm * norm, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_momentum() {
        let (h, a) = hamiltonian_hr(&[0.0, 0.0], Radius::Finite(2.0));
        assert_eq!(h, 0.0);
        assert!(a.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn outside_the_ball() {
        let (h, a) = hamiltonian_hr(&[3.0, 4.0], Radius::Finite(1.0));
        assert!((h - 4.5).abs() < 1e-15);
        assert!((a[0] + 0.6).abs() < 1e-15 && (a[1] + 0.8).abs() < 1e-15);
    }

    #[test]
    fn continuous_at_switch() {
        let r = 1.5;
        let (h, a) = hamiltonian_hr(&[r], Radius::Finite(r));
        assert_eq!(h, 0.5 * r * r);
        assert_eq!(a[0], -r);
        let (h_out, _) = hamiltonian_hr(&[r * (1.0 + 1e-12)], Radius::Finite(r));
        assert!((h_out - h).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn maximizer_attains_legendre_sup(p in -10.0f64..10.0, r in 0.1f64..5.0, b in -1.0f64..1.0) {
            // H^R(p) = sup_{|a|≤R} (−a·p − ½|a|²)
            let (h, a) = hamiltonian_hr(&[p], Radius::Finite(r));
            let at_opt = -a[0] * p - 0.5 * a[0] * a[0];
            prop_assert!((at_opt - h).abs() <= 1e-9 * (1.0 + h.abs()));
            let other = b * r;
            prop_assert!(-other * p - 0.5 * other * other <= h + 1e-12);
            prop_assert!(a[0].abs() <= r * (1.0 + 1e-15));
        }

        #[test]
        fn truncation_never_exceeds_quadratic(p in -10.0f64..10.0, r in 0.1f64..5.0) {
            let (h, _) = hamiltonian_hr(&[p], Radius::Finite(r));
            let (full, _) = hamiltonian_hr(&[p], Radius::Infinite);
            prop_assert!(h <= full + 1e-12);
        }
    }
}
