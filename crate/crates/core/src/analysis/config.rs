//! Experiment configuration read from JSON.
//!
//! Every field has a default, so `{}` is a valid configuration describing
//! the generic suite on the circle: `V = 1 + cos 2πx`, `g = sin 2πx`,
//! `μ0` uniform, `T = 0.5`. Unknown keys are rejected.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mean_field::{PicardConfig, ProblemSpec, Radius};
use crate::torus::{ScalarField, SobolevIndex, TorusGrid};

/// Named fields; in two dimensions they depend on the first coordinate only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Zero,
    One,
    Cos,
    Sin,
    OnePlusCos,
}

/// One Fourier mode `a cos(2π n·x) + b sin(2π n·x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub n: Vec<i64>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// `constant + Σ modes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierField {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub modes: Vec<Mode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Preset(Preset),
    Fourier(FourierField),
}

impl FieldSpec {
    pub fn build(&self, grid: &TorusGrid) -> Result<ScalarField> {
        match self {
            FieldSpec::Preset(p) => {
                let f: fn(f64) -> f64 = match p {
                    Preset::Zero => |_| 0.0,
                    Preset::One => |_| 1.0,
                    Preset::Cos => |x| (2.0 * PI * x).cos(),
                    Preset::Sin => |x| (2.0 * PI * x).sin(),
                    Preset::OnePlusCos => |x| 1.0 + (2.0 * PI * x).cos(),
                };
                Ok(ScalarField::from_fn(grid, |x| f(x[0])))
            }
            FieldSpec::Fourier(ff) => {
                for m in &ff.modes {
                    if m.n.len() != grid.dim() {
                        return Err(Error::Config(format!(
                            "mode {:?} does not match dimension {}",
                            m.n,
                            grid.dim()
                        )));
                    }
                }
                Ok(ScalarField::from_fn(grid, |x| {
                    ff.constant
                        + ff.modes
                            .iter()
                            .map(|m| {
                                let phase = 2.0
                                    * PI
                                    * m.n.iter().zip(x).map(|(n, x)| *n as f64 * x).sum::<f64>();
                                m.cos * phase.cos() + m.sin * phase.sin()
                            })
                            .sum::<f64>()
                }))
            }
        }
    }
}

/// `"infinite"` or a positive number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RadiusSpec {
    Finite(f64),
    Named(InfiniteTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfiniteTag {
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    /// `−∇u` (or its truncation) from the mean-field solution.
    MeanField,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParticleSettings {
    pub counts: Vec<usize>,
    pub replications: usize,
    /// Euler–Maruyama step; the PDE step if absent.
    pub dt: Option<f64>,
    /// Leading initial clocks; the rest are 0.
    pub clocks: Vec<f64>,
    pub feedback: FeedbackKind,
}

impl Default for ParticleSettings {
    fn default() -> Self {
        Self {
            counts: vec![8, 16, 32, 64, 128, 256, 512],
            replications: 64,
            dt: None,
            clocks: Vec::new(),
            feedback: FeedbackKind::MeanField,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairSettings {
    pub points: usize,
    pub delta_points: usize,
    /// Half-width of the clock-difference grid; derived from the sampled clocks if absent.
    pub delta_max: Option<f64>,
    pub dt: f64,
    /// Number of random `(x, a)` states compared with the limit.
    pub samples: usize,
    /// Clocks are drawn uniformly from `[0, clock_range]`.
    pub clock_range: f64,
    /// Whether the convergence study adds the exact two-particle row.
    pub exact_row: bool,
}

impl Default for PairSettings {
    fn default() -> Self {
        Self {
            points: 64,
            delta_points: 65,
            delta_max: None,
            dt: 2.5e-3,
            samples: 20,
            clock_range: 1.0,
            exact_row: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeSettings {
    pub pairs: usize,
    /// Number of lowest Fourier modes in random densities.
    pub modes: usize,
    /// Bound on the perturbation's sup-norm relative to the uniform density.
    pub amplitude: f64,
    /// Perturbation sizes `s` in `μ¹ + s(μ² − μ¹)`, largest first.
    pub scales: Vec<f64>,
    /// Picard tolerance for probe solves.
    pub tol: f64,
    /// Rungs of the time ladder.
    pub ladder: usize,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self {
            pairs: 20,
            modes: 8,
            amplitude: 0.5,
            scales: vec![1.0, 0.5, 0.25],
            tol: 1e-11,
            ladder: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub points: usize,
    pub potential: FieldSpec,
    pub terminal: FieldSpec,
    /// Initial density, normalized after construction.
    pub initial: FieldSpec,
    pub t0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub radius: Option<RadiusSpec>,
    /// Order `k` of `H^{-k}`; the dimension default if absent.
    pub sobolev_order: Option<u32>,
    /// Mollification time for atomic measures; `4h²` if absent.
    pub mollification: Option<f64>,
    pub picard: PicardConfig,
    pub particles: ParticleSettings,
    pub pair: PairSettings,
    pub probe: ProbeSettings,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            points: 64,
            potential: FieldSpec::Preset(Preset::OnePlusCos),
            terminal: FieldSpec::Preset(Preset::Sin),
            initial: FieldSpec::Preset(Preset::One),
            t0: 0.0,
            horizon: 0.5,
            dt: 1e-3,
            radius: None,
            sobolev_order: None,
            mollification: None,
            picard: PicardConfig::default(),
            particles: ParticleSettings::default(),
            pair: PairSettings::default(),
            probe: ProbeSettings::default(),
            seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(1..=2).contains(&self.dim) {
            return bad(format!("dim must be 1 or 2, got {}", self.dim));
        }
        if !(self.horizon > self.t0) || !(self.dt > 0.0) {
            return bad("need horizon > t0 and dt > 0".into());
        }
        if self.particles.counts.is_empty() {
            return bad("particle count list is empty".into());
        }
        if self.particles.counts.contains(&0) || self.particles.replications == 0 {
            return bad("particle counts and replications must be positive".into());
        }
        if self.particles.dt.is_some_and(|d| !(d > 0.0)) {
            return bad("particle dt must be positive".into());
        }
        if self.mollification.is_some_and(|e| !(e > 0.0)) {
            return bad("mollification must be positive".into());
        }
        if self.probe.scales.is_empty()
            || self.probe.scales.iter().any(|s| !(*s > 0.0 && *s <= 1.0))
        {
            return bad("probe scales must lie in (0, 1]".into());
        }
        if !(self.probe.amplitude > 0.0 && self.probe.amplitude < 1.0) {
            return bad("probe amplitude must lie in (0, 1)".into());
        }
        if self.probe.modes == 0 || self.probe.ladder < 2 {
            return bad("probe needs at least one mode and two ladder rungs".into());
        }
        if !(self.pair.clock_range >= 0.0) {
            return bad("pair clock range must be nonnegative".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.dim, self.points)
    }

    pub fn sobolev(&self) -> SobolevIndex {
        self.sobolev_order
            .map(SobolevIndex::new)
            .unwrap_or_else(|| SobolevIndex::default_for_dim(self.dim))
    }

    /// The Picard settings with the configured Sobolev order filled in.
    pub fn picard(&self) -> PicardConfig {
        PicardConfig {
            sobolev: self.picard.sobolev.or(Some(self.sobolev())),
            ..self.picard
        }
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        self.problem_with(self.points, self.dt)
    }

    /// The problem on another grid or step.
    pub fn problem_with(&self, points: usize, dt: f64) -> Result<ProblemSpec> {
        let grid = TorusGrid::new(self.dim, points)?;
        let spec = ProblemSpec::new(
            self.potential.build(&grid)?,
            self.terminal.build(&grid)?,
            self.t0,
            self.horizon,
            dt,
        )?;
        match self.radius {
            None => Ok(spec),
            Some(RadiusSpec::Finite(r)) => spec.with_radius(Radius::Finite(r)),
            Some(RadiusSpec::Named(InfiniteTag::Infinite)) => spec.with_radius(Radius::Infinite),
        }
    }

    pub fn initial_density(&self, grid: &TorusGrid) -> Result<ScalarField> {
        let f = self.initial.build(grid)?;
        if f.min() < 0.0 {
            return Err(Error::Config(
                "initial density is negative somewhere".into(),
            ));
        }
        let mass = f.mean();
        if !(mass > 0.0) {
            return Err(Error::Config("initial density has no mass".into()));
        }
        Ok(f.scale(1.0 / mass))
    }

    /// Initial clocks for `n` particles.
    pub fn clocks(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| self.particles.clocks.get(i).copied().unwrap_or(0.0))
            .collect()
    }

    pub fn particle_dt(&self) -> f64 {
        self.particles.dt.unwrap_or(self.dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_generic_suite() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        let spec = cfg.problem().unwrap();
        assert!((spec.potential().max() - 2.0).abs() < 1e-12);
        assert_eq!(cfg.sobolev(), SobolevIndex::new(3));
    }

    #[test]
    fn unknown_keys_and_empty_sweeps_are_rejected() {
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"pointz": 64}"#),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"particles": {"counts": []}}"#),
            Err(Error::Config(_))
        ));
        assert!(ExperimentConfig::from_json(r#"{"picard": {"tol": 1e-8, "extra": 1}}"#).is_err());
    }

    #[test]
    fn fourier_lists_and_radius_parse() {
        let cfg = ExperimentConfig::from_json(
            r#"{"potential": {"constant": 2.0, "modes": [{"n": [2], "cos": 0.5}]},
                "radius": "infinite", "particles": {"clocks": [1.0986122886681098]}}"#,
        )
        .unwrap();
        let grid = cfg.grid().unwrap();
        let v = cfg.potential.build(&grid).unwrap();
        assert!((v.values()[0] - 2.5).abs() < 1e-15);
        // x = 1/4 and 1/2: cos 4πx is −1 and 1
        assert!((v.values()[16] - 1.5).abs() < 1e-12);
        assert!((v.values()[32] - 2.5).abs() < 1e-12);
        assert_eq!(cfg.problem().unwrap().radius(), Radius::Infinite);
        assert_eq!(cfg.clocks(3), vec![1.0986122886681098, 0.0, 0.0]);
        let r = ExperimentConfig::from_json(r#"{"radius": 3.5}"#).unwrap();
        assert_eq!(r.problem().unwrap().radius(), Radius::Finite(3.5));
    }

    #[test]
    fn initial_density_is_normalized() {
        let cfg = ExperimentConfig::from_json(
            r#"{"initial": {"constant": 3.0, "modes": [{"n": [1], "sin": 1.0}]}}"#,
        )
        .unwrap();
        let mu = cfg.initial_density(&cfg.grid().unwrap()).unwrap();
        assert!((mu.mean() - 1.0).abs() < 1e-14);
        let neg = ExperimentConfig::from_json(r#"{"initial": "cos"}"#).unwrap();
        assert!(neg.initial_density(&neg.grid().unwrap()).is_err());
    }
}
