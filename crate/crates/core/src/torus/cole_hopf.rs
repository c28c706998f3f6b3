//! Closed-form solution of `−∂_t u − ½Δu + ½|∇u|² = 0`, `u_T = g`.

use super::field::ScalarField;
use crate::error::{Error, Result};

/// `u_t = −log P_{T−t} e^{−g}`.
///
/// The exponent is shifted by `min g` so that the heat semigroup acts on
/// values in `(0, 1]`, which keeps the logarithm well conditioned.
pub fn cole_hopf_hjb(g: &ScalarField, t: f64, horizon: f64) -> Result<ScalarField> {
    if !(t <= horizon) {
        return Err(Error::InvalidArgument(format!(
            "time {t} lies after the horizon {horizon}"
        )));
    }
    if t == horizon {
        return Ok(g.clone());
    }
    let shift = g.min();
    let w = g.map(|v| (-(v - shift)).exp());
    let p = w.heat_propagate(horizon - t)?;
    Ok(p.map(|v| shift - v.max(f64::MIN_POSITIVE).ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusGrid;
    use std::f64::consts::PI;

    /// `P_s f(x)` by trapezoid quadrature against the periodized Gaussian of variance `s`.
    fn heat_by_quadrature(f: impl Fn(f64) -> f64, x: f64, s: f64) -> f64 {
        let nodes = 4000;
        let mut acc = 0.0;
        for j in 0..nodes {
            let y = j as f64 / nodes as f64;
            let mut kernel = 0.0;
            for wrap in -6..=6 {
                let z = x - y + wrap as f64;
                kernel += (-z * z / (2.0 * s)).exp();
            }
            acc += f(y) * kernel / (2.0 * PI * s).sqrt();
        }
        acc / nodes as f64
    }

    #[test]
    fn constant_terminal_is_fixed() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let g = ScalarField::constant(&grid, 1.7);
        let u = cole_hopf_hjb(&g, 0.0, 0.5).unwrap();
        assert!(u.values().iter().all(|v| (v - 1.7).abs() < 1e-14));
    }

    #[test]
    fn terminal_time_returns_terminal_cost() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let g = ScalarField::from_fn(&grid, |x| (2.0 * PI * x[0]).sin());
        assert_eq!(cole_hopf_hjb(&g, 0.5, 0.5).unwrap(), g);
        assert!(cole_hopf_hjb(&g, 0.6, 0.5).is_err());
    }

    #[test]
    fn matches_gaussian_kernel_quadrature() {
        let grid = TorusGrid::new(1, 64).unwrap();
        let g = ScalarField::from_fn(&grid, |x| (2.0 * PI * x[0]).cos());
        let u = cole_hopf_hjb(&g, 0.25, 0.5).unwrap();
        for i in (0..64).step_by(5) {
            let x = grid.node(i)[0];
            let p = heat_by_quadrature(|y| (-(2.0 * PI * y).cos()).exp(), x, 0.25);
            assert!((u.values()[i] + p.ln()).abs() < 1e-10, "node {i}");
        }
    }

    #[test]
    fn satisfies_viscous_hjb_residual() {
        for dim in [1, 2] {
            let grid = TorusGrid::new(dim, 64).unwrap();
            let g = ScalarField::from_fn(&grid, |x| {
                (2.0 * PI * x[0]).cos() + 0.5 * (2.0 * PI * x[dim - 1]).sin()
            });
            let (t, tau, horizon) = (0.25, 1e-3, 0.5);
            let before = cole_hopf_hjb(&g, t - tau, horizon).unwrap();
            let after = cole_hopf_hjb(&g, t + tau, horizon).unwrap();
            let u = cole_hopf_hjb(&g, t, horizon).unwrap();
            let lap = u.laplacian();
            let grad = u.gradient();
            for i in 0..grid.len() {
                let dt = (after.values()[i] - before.values()[i]) / (2.0 * tau);
                let p2: f64 = grad.iter().map(|c| c.values()[i].powi(2)).sum();
                let r = -dt - 0.5 * lap.values()[i] + 0.5 * p2;
                assert!(r.abs() < 1e-4, "residual {r} at node {i}");
            }
        }
    }
}
