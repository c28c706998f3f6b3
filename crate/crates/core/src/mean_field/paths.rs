//! Time-indexed fields on a uniform mesh: measure flows, adjoints and controls.

use crate::error::{Error, Result};
use crate::torus::sobolev::dual_norm_of_values;
use crate::torus::{ScalarField, SobolevIndex, TorusGrid};

use super::etd::Stage;
use super::hamiltonian::value_and_scale;
use super::problem::{ProblemSpec, Radius};

/// Densities `μ_t` at every mesh node.
#[derive(Debug, Clone)]
pub struct MeasurePath {
    pub(crate) times: Vec<f64>,
    pub(crate) densities: Vec<ScalarField>,
    /// Largest per-step deviation of the mass from 1 before renormalization.
    pub(crate) mass_drift: f64,
}

impl MeasurePath {
    /// Wraps densities given at the nodes of `spec`'s mesh.
    pub fn new(spec: &ProblemSpec, densities: Vec<ScalarField>) -> Result<Self> {
        check_mesh(spec, densities.len())?;
        for d in &densities {
            spec.grid().check_same(d.grid())?;
        }
        Ok(Self {
            times: spec.times(),
            densities,
            mass_drift: 0.0,
        })
    }

    /// `μ_t = μ0` at every node.
    pub fn constant(spec: &ProblemSpec, mu0: &ScalarField) -> Result<Self> {
        Self::new(spec, vec![mu0.clone(); spec.steps() + 1])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn densities(&self) -> &[ScalarField] {
        &self.densities
    }

    pub fn at(&self, i: usize) -> &ScalarField {
        &self.densities[i]
    }

    pub fn initial(&self) -> &ScalarField {
        &self.densities[0]
    }

    pub fn terminal(&self) -> &ScalarField {
        self.densities
            .last()
            .expect("paths hold at least two nodes")
    }

    pub fn len(&self) -> usize {
        self.densities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.densities.is_empty()
    }

    pub fn mass_drift(&self) -> f64 {
        self.mass_drift
    }

    /// `⟨f; μ_t⟩` at every node.
    pub fn pair_with(&self, f: &ScalarField) -> Vec<f64> {
        self.densities.iter().map(|mu| mu.inner(f)).collect()
    }

    /// `sup_t ‖μ_t − ν_t‖_{H^{-k}}`.
    pub fn sup_dual_distance(&self, other: &MeasurePath, k: SobolevIndex) -> f64 {
        self.densities
            .iter()
            .zip(&other.densities)
            .map(|(a, b)| {
                let diff: Vec<f64> = a
                    .values()
                    .iter()
                    .zip(b.values())
                    .map(|(x, y)| x - y)
                    .collect();
                dual_norm_of_values(a.grid(), &diff, k)
            })
            .fold(0.0, f64::max)
    }

    /// Node-wise `(1−θ) self + θ other`.
    pub fn blend(&self, other: &MeasurePath, theta: f64) -> MeasurePath {
        let densities = self
            .densities
            .iter()
            .zip(&other.densities)
            .map(|(a, b)| a.zip_with(b, |x, y| (1.0 - theta) * x + theta * y))
            .collect();
        MeasurePath {
            times: self.times.clone(),
            densities,
            mass_drift: other.mass_drift,
        }
    }
}

/// Adjoint fields `u_t` (or linearized solutions) at every mesh node.
#[derive(Debug, Clone)]
pub struct AdjointPath {
    pub(crate) times: Vec<f64>,
    pub(crate) fields: Vec<ScalarField>,
}

impl AdjointPath {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[ScalarField] {
        &self.fields
    }

    pub fn at(&self, i: usize) -> &ScalarField {
        &self.fields[i]
    }

    pub fn initial(&self) -> &ScalarField {
        &self.fields[0]
    }

    pub fn terminal(&self) -> &ScalarField {
        self.fields.last().expect("paths hold at least two nodes")
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// `sup_t ‖u_t − w_t‖_∞`.
    pub fn sup_distance(&self, other: &AdjointPath) -> f64 {
        self.fields
            .iter()
            .zip(&other.fields)
            .map(|(a, b)| a.sub(b).sup_norm())
            .fold(0.0, f64::max)
    }

    /// `sup_t ‖∇u_t‖_∞` (Euclidean norm of the gradient).
    pub fn sup_gradient(&self) -> f64 {
        self.fields
            .iter()
            .map(|u| {
                let grad = u.gradient();
                (0..u.values().len())
                    .map(|i| {
                        grad.iter()
                            .map(|c| c.values()[i].powi(2))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// A feedback vector field `α_t(x)` given per axis at every mesh node.
#[derive(Debug, Clone)]
pub struct ControlPath {
    pub(crate) times: Vec<f64>,
    /// `fields[t][axis]`.
    pub(crate) fields: Vec<Vec<ScalarField>>,
}

impl ControlPath {
    pub fn zero(spec: &ProblemSpec) -> Self {
        Self::constant(spec, &vec![0.0; spec.grid().dim()]).expect("dimension matches")
    }

    /// `α_t(x) = a0` everywhere.
    pub fn constant(spec: &ProblemSpec, a0: &[f64]) -> Result<Self> {
        let grid = spec.grid();
        if a0.len() != grid.dim() {
            return Err(Error::InvalidArgument(format!(
                "control of dimension {} on a {}-dimensional grid",
                a0.len(),
                grid.dim()
            )));
        }
        let node: Vec<ScalarField> = a0.iter().map(|&c| ScalarField::constant(grid, c)).collect();
        Ok(Self {
            times: spec.times(),
            fields: vec![node; spec.steps() + 1],
        })
    }

    /// A time-independent field, one component per axis.
    pub fn frozen(spec: &ProblemSpec, components: Vec<ScalarField>) -> Result<Self> {
        if components.len() != spec.grid().dim() {
            return Err(Error::InvalidArgument(
                "one component per axis expected".into(),
            ));
        }
        for c in &components {
            spec.grid().check_same(c.grid())?;
        }
        Ok(Self {
            times: spec.times(),
            fields: vec![components; spec.steps() + 1],
        })
    }

    /// `α_t = −H^R_p(∇u_t)`.
    pub fn from_adjoint(u: &AdjointPath, radius: Radius) -> Self {
        let r = radius.value();
        let fields = u
            .fields
            .iter()
            .map(|field| {
                let grad = field.gradient();
                let grid = field.grid();
                let n = grid.len();
                let mut comps: Vec<Vec<f64>> = vec![vec![0.0; n]; grid.dim()];
                for i in 0..n {
                    let norm = grad
                        .iter()
                        .map(|c| c.values()[i].powi(2))
                        .sum::<f64>()
                        .sqrt();
                    let (_, scale) = value_and_scale(norm, r);
                    for (axis, comp) in comps.iter_mut().enumerate() {
                        comp[i] = -scale * grad[axis].values()[i];
                    }
                }
                comps
                    .into_iter()
                    .map(|v| ScalarField::new(grid, v).expect("grid-sized"))
                    .collect()
            })
            .collect();
        Self {
            times: u.times.clone(),
            fields,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Components of `α` at mesh node `i`.
    pub fn at(&self, i: usize) -> &[ScalarField] {
        &self.fields[i]
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn grid(&self) -> &TorusGrid {
        self.fields[0][0].grid()
    }

    /// `½|α_t|²` as a field at node `i`.
    pub fn kinetic_density(&self, i: usize) -> ScalarField {
        let comps = &self.fields[i];
        let grid = comps[0].grid();
        let values = (0..grid.len())
            .map(|j| 0.5 * comps.iter().map(|c| c.values()[j].powi(2)).sum::<f64>())
            .collect();
        ScalarField::new(grid, values).expect("grid-sized")
    }

    /// `sup_{t,x} |α_t(x)|`.
    pub fn sup_norm(&self) -> f64 {
        let kinetic = (0..self.fields.len())
            .map(|i| self.kinetic_density(i).max())
            .fold(0.0_f64, f64::max);
        (2.0 * kinetic).sqrt()
    }
}

pub(crate) fn check_mesh(spec: &ProblemSpec, nodes: usize) -> Result<()> {
    if nodes == spec.steps() + 1 {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "path with {nodes} nodes on a mesh of {} steps",
            spec.steps()
        )))
    }
}

/// Interpolation weights in time for a point of interval `[i, i+1]`.
///
/// Mesh nodes are returned as is; the midpoint uses the cubic Lagrange
/// stencil, shifted one-sided next to either end of the mesh.
pub(crate) fn stage_weights(interval: usize, nodes: usize, stage: Stage) -> Vec<(usize, f64)> {
    let i = interval;
    match stage {
        Stage::Start => vec![(i, 1.0)],
        Stage::End => vec![(i + 1, 1.0)],
        Stage::Mid if nodes < 4 => vec![(i, 0.5), (i + 1, 0.5)],
        Stage::Mid if i == 0 => vec![
            (0, 5.0 / 16.0),
            (1, 15.0 / 16.0),
            (2, -5.0 / 16.0),
            (3, 1.0 / 16.0),
        ],
        Stage::Mid if i + 2 == nodes => vec![
            (i - 2, 1.0 / 16.0),
            (i - 1, -5.0 / 16.0),
            (i, 15.0 / 16.0),
            (i + 1, 5.0 / 16.0),
        ],
        Stage::Mid => vec![
            (i - 1, -1.0 / 16.0),
            (i, 9.0 / 16.0),
            (i + 1, 9.0 / 16.0),
            (i + 2, -1.0 / 16.0),
        ],
    }
}

/// `Σ w_j f_j` over node values.
pub(crate) fn combine(fields: &[ScalarField], weights: &[(usize, f64)]) -> Vec<f64> {
    let n = fields[0].values().len();
    let mut out = vec![0.0; n];
    for &(j, w) in weights {
        for (o, v) in out.iter_mut().zip(fields[j].values()) {
            *o += w * v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_weights_reproduce_cubics() {
        let p = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t - 0.3 * t * t * t;
        let nodes = 7;
        for i in 0..nodes - 1 {
            let w = stage_weights(i, nodes, Stage::Mid);
            let total: f64 = w.iter().map(|(_, c)| c).sum();
            assert!((total - 1.0).abs() < 1e-15);
            let value: f64 = w.iter().map(|&(j, c)| c * p(j as f64)).sum();
            assert!((value - p(i as f64 + 0.5)).abs() < 1e-12, "interval {i}");
            assert!(w.iter().all(|&(j, _)| j < nodes));
        }
        assert_eq!(stage_weights(2, nodes, Stage::Start), vec![(2, 1.0)]);
        assert_eq!(stage_weights(2, nodes, Stage::End), vec![(3, 1.0)]);
    }
}
