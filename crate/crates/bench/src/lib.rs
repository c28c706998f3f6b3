//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

pub use softkill_core::mean_field::{ControlPath, PicardConfig, ProblemSpec};
pub use softkill_core::torus::{ScalarField, SobolevIndex, TorusGrid};

/// `V = 1 + cos 2πx`, `g = sin 2πx` on `[0, 0.5]`, uniform `μ0`.
pub fn generic(points: usize, dt: f64) -> (ProblemSpec, ScalarField) {
    let grid = TorusGrid::new(1, points).expect("power of two");
    let spec = ProblemSpec::new(
        ScalarField::from_fn(&grid, |x| 1.0 + (2.0 * PI * x[0]).cos()),
        ScalarField::from_fn(&grid, |x| (2.0 * PI * x[0]).sin()),
        0.0,
        0.5,
        dt,
    )
    .expect("valid problem");
    (spec, ScalarField::constant(&grid, 1.0))
}

/// `0.5 sin 2πx`, frozen in time.
pub fn frozen_control(spec: &ProblemSpec) -> ControlPath {
    let grid = spec.grid();
    ControlPath::frozen(
        spec,
        vec![ScalarField::from_fn(grid, |x| {
            0.5 * (2.0 * PI * x[0]).sin()
        })],
    )
    .expect("matching grid")
}
