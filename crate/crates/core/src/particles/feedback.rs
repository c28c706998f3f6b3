//! Feedback controls `α(t, x)` evaluated at particle positions.

use crate::error::{Error, Result};
use crate::mean_field::ControlPath;
use crate::torus::BandLimited;

/// A bounded feedback for the particle system.
#[derive(Debug, Clone)]
pub enum Feedback {
    Zero,
    /// The same vector for every particle and time.
    Constant(Vec<f64>),
    /// Grid fields: linear in time between mesh nodes, band-limited in space.
    Field(FieldFeedback),
}

#[derive(Debug, Clone)]
pub struct FieldFeedback {
    times: Vec<f64>,
    /// `nodes[t][axis]`.
    nodes: Vec<Vec<BandLimited>>,
    /// Whether all nodes share one field (no time interpolation needed).
    frozen: bool,
}

impl Feedback {
    pub fn from_control(control: &ControlPath) -> Self {
        let first: Vec<_> = control.at(0).to_vec();
        let frozen = (1..control.len()).all(|i| control.at(i) == first.as_slice());
        let nodes = if frozen {
            vec![first.iter().map(|f| f.evaluator()).collect()]
        } else {
            (0..control.len())
                .map(|i| control.at(i).iter().map(|f| f.evaluator()).collect())
                .collect()
        };
        Feedback::Field(FieldFeedback {
            times: control.times().to_vec(),
            nodes,
            frozen,
        })
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        let d = match self {
            Feedback::Zero => return Ok(()),
            Feedback::Constant(v) => v.len(),
            Feedback::Field(f) => f.nodes[0].len(),
        };
        if d == dim {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "feedback of dimension {d} for particles in dimension {dim}"
            )))
        }
    }

    /// Locates `t` once per step; the returned evaluator is then applied per particle.
    pub fn at_time(&self, t: f64) -> TimeSlice<'_> {
        match self {
            Feedback::Zero => TimeSlice::Zero,
            Feedback::Constant(v) => TimeSlice::Constant(v),
            Feedback::Field(f) => {
                if f.frozen {
                    return TimeSlice::Field(&f.nodes[0], &f.nodes[0], 0.0);
                }
                let n = f.times.len();
                let i = match f.times.partition_point(|&s| s <= t) {
                    0 => 0,
                    p => (p - 1).min(n - 2),
                };
                let span = f.times[i + 1] - f.times[i];
                let lambda = ((t - f.times[i]) / span).clamp(0.0, 1.0);
                TimeSlice::Field(&f.nodes[i], &f.nodes[i + 1], lambda)
            }
        }
    }
}

/// A feedback frozen at one time.
pub enum TimeSlice<'a> {
    Zero,
    Constant(&'a [f64]),
    Field(&'a [BandLimited], &'a [BandLimited], f64),
}

impl TimeSlice<'_> {
    /// Writes `α(t, x)` into `out`.
    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        match self {
            TimeSlice::Zero => out.iter_mut().for_each(|o| *o = 0.0),
            TimeSlice::Constant(v) => out.copy_from_slice(v),
            TimeSlice::Field(a, b, lambda) => {
                for (axis, o) in out.iter_mut().enumerate() {
                    let left = a[axis].eval(x);
                    *o = if *lambda == 0.0 {
                        left
                    } else {
                        (1.0 - lambda) * left + lambda * b[axis].eval(x)
                    };
                }
            }
        }
    }
}
