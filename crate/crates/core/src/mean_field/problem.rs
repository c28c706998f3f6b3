//! Data of the limiting control problem and its uniform time mesh.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::{ScalarField, TorusGrid};

/// Radius of the truncated Hamiltonian `H^R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Radius {
    Finite(f64),
    Infinite,
}

impl Radius {
    pub fn value(self) -> f64 {
        match self {
            Radius::Finite(r) => r,
            Radius::Infinite => f64::INFINITY,
        }
    }
}

/// Potential `V ≥ 0`, terminal cost `g`, horizon `[t0, T]`, time step and radius.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    potential: ScalarField,
    terminal: ScalarField,
    t0: f64,
    horizon: f64,
    steps: usize,
    radius: Radius,
}

impl ProblemSpec {
    /// Builds a problem with the default truncation radius.
    ///
    /// `dt` must divide `T − t0` into a whole number of steps (to `1e−9` relative).
    pub fn new(
        potential: ScalarField,
        terminal: ScalarField,
        t0: f64,
        horizon: f64,
        dt: f64,
    ) -> Result<Self> {
        potential.grid().check_same(terminal.grid())?;
        if let Some(v) = potential
            .values()
            .iter()
            .find(|v| !(**v >= 0.0 && v.is_finite()))
        {
            return Err(Error::InvalidArgument(format!(
                "potential must be finite and nonnegative, found {v}"
            )));
        }
        if terminal.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "terminal cost must be finite".into(),
            ));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time step must be > 0, got {dt}"
            )));
        }
        if !(horizon > t0) {
            return Err(Error::InvalidArgument(format!(
                "horizon {horizon} must exceed the initial time {t0}"
            )));
        }
        let span = horizon - t0;
        let steps = (span / dt).round();
        if steps < 1.0 || (steps * dt - span).abs() > 1e-9 * span {
            return Err(Error::InvalidArgument(format!(
                "time step {dt} does not divide the horizon length {span}"
            )));
        }
        let mut spec = Self {
            potential,
            terminal,
            t0,
            horizon,
            steps: steps as usize,
            radius: Radius::Infinite,
        };
        spec.radius = Radius::Finite(spec.default_radius());
        Ok(spec)
    }

    pub fn with_radius(mut self, radius: Radius) -> Result<Self> {
        if let Radius::Finite(r) = radius {
            if !(r > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "radius must be > 0, got {r}"
                )));
            }
        }
        self.radius = radius;
        Ok(self)
    }

    /// The same problem posed on `[t1, T]`; `t1` must be a mesh node before `T`.
    pub fn restarted_at(&self, t1: f64) -> Result<Self> {
        let i = self.mesh_index(t1).ok_or_else(|| {
            Error::InvalidArgument(format!("restart time {t1} is not a mesh node"))
        })?;
        if i == self.steps {
            return Err(Error::InvalidArgument(
                "cannot restart at the horizon".into(),
            ));
        }
        Ok(Self {
            t0: self.time(i),
            steps: self.steps - i,
            ..self.clone()
        })
    }

    /// `4 (1 + ‖g‖_∞ + ‖∇g‖_∞) e^{(T−t0)‖V‖_∞}`.
    pub fn default_radius(&self) -> f64 {
        let g = &self.terminal;
        let grad = g
            .gradient()
            .iter()
            .map(|c| c.sup_norm())
            .fold(0.0_f64, f64::max);
        4.0 * (1.0 + g.sup_norm() + grad) * ((self.horizon - self.t0) * self.potential.max()).exp()
    }

    pub fn potential(&self) -> &ScalarField {
        &self.potential
    }

    pub fn terminal(&self) -> &ScalarField {
        &self.terminal
    }

    pub fn grid(&self) -> &TorusGrid {
        self.potential.grid()
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        (self.horizon - self.t0) / self.steps as f64
    }

    pub fn radius(&self) -> Radius {
        self.radius
    }

    /// Time of mesh node `i`; the last node is `T` exactly.
    pub fn time(&self, i: usize) -> f64 {
        if i == self.steps {
            self.horizon
        } else {
            self.t0 + i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| self.time(i)).collect()
    }

    /// Index of the mesh node at `t`, if any (to `1e−9` of a step).
    pub fn mesh_index(&self, t: f64) -> Option<usize> {
        let x = (t - self.t0) / self.dt();
        let i = x.round();
        if i < 0.0 || i > self.steps as f64 || (x - i).abs() > 1e-9 {
            None
        } else {
            Some(i as usize)
        }
    }
}
