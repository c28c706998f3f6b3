//! Particle positions, killing clocks and their Euler–Maruyama dynamics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::feedback::Feedback;
use super::weights::weights_from_a;
use crate::error::{Error, Result};
use crate::torus::atomic::wrap_unit;
use crate::torus::{AtomicMeasure, BandLimited, ScalarField};

/// `N` particles on `𝕋^d` with clocks `aⁱ`; weights are derived on demand.
#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    dim: usize,
    positions: Vec<f64>,
    clocks: Vec<f64>,
    time: f64,
    rng: ChaCha8Rng,
}

/// Generator for stream `stream` of base seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl ParticleEnsemble {
    pub fn new(
        dim: usize,
        positions: Vec<f64>,
        clocks: Vec<f64>,
        time: f64,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if clocks.is_empty() || positions.len() != dim * clocks.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates for {} clocks in dimension {dim}",
                positions.len(),
                clocks.len()
            )));
        }
        if clocks.iter().chain(&positions).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "positions and clocks must be finite".into(),
            ));
        }
        Ok(Self {
            dim,
            positions: positions.into_iter().map(wrap_unit).collect(),
            clocks,
            time,
            rng,
        })
    }

    /// `n` particles drawn iid from `density`, all clocks set to `clocks`.
    pub fn sample(
        density: &ScalarField,
        clocks: Vec<f64>,
        time: f64,
        mut rng: ChaCha8Rng,
    ) -> Result<Self> {
        let dim = density.grid().dim();
        let positions = sample_density(density, clocks.len(), &mut rng)?;
        Self::new(dim, positions, clocks, time, rng)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.clocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clocks.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn clocks(&self) -> &[f64] {
        &self.clocks
    }

    pub fn weights(&self) -> Vec<f64> {
        weights_from_a(&self.clocks)
    }

    /// `Σ (1/nⁱ[a]) δ_{xⁱ}`.
    pub fn empirical_measure(&self) -> AtomicMeasure {
        let w = self.weights();
        let total: f64 = w.iter().sum();
        // the constructor insists on unit mass to 1e-12; absorb the last ulp here
        let w = w.into_iter().map(|x| x / total).collect();
        AtomicMeasure::new(self.dim, self.positions.clone(), w).expect("valid ensemble")
    }

    /// One step of `dX = α dt + dB`, `dA = V(X) dt`, with `V` taken before the move.
    ///
    /// Normals are drawn particle by particle, axis by axis.
    pub fn euler_maruyama_step(&mut self, feedback: &Feedback, potential: &BandLimited, dt: f64) {
        let slice = feedback.at_time(self.time);
        let sd = dt.sqrt();
        let mut alpha = vec![0.0; self.dim];
        for i in 0..self.clocks.len() {
            let x = &mut self.positions[i * self.dim..(i + 1) * self.dim];
            self.clocks[i] += potential.eval(x) * dt;
            slice.eval(x, &mut alpha);
            for (xa, a) in x.iter_mut().zip(&alpha) {
                let xi: f64 = self.rng.sample(StandardNormal);
                *xa = wrap_unit(*xa + a * dt + sd * xi);
            }
        }
        self.time += dt;
    }
}

/// `H^N = −Σ V(xⁱ) qⁱ + Σ (nⁱ[a]/2) |pⁱ|²`; `p` holds `d` entries per particle.
pub fn hamiltonian_n(potential_at_x: &[f64], a: &[f64], p: &[f64], q: &[f64]) -> f64 {
    let n = a.len();
    let d = p.len() / n.max(1);
    let w = weights_from_a(a);
    (0..n)
        .map(|i| {
            let p2: f64 = p[i * d..(i + 1) * d].iter().map(|v| v * v).sum();
            -potential_at_x[i] * q[i] + p2 / (2.0 * w[i])
        })
        .sum()
}

/// `n` iid draws from a grid density by rejection against its band-limited interpolant.
pub fn sample_density(density: &ScalarField, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let dim = density.grid().dim();
    let grid = density.grid();
    if (density.mean() - 1.0).abs() > 1e-8 || density.min() < -1e-10 {
        return Err(Error::InvalidArgument(
            "sampling requires a probability density".into(),
        ));
    }
    let eval = density.evaluator();
    let uniform = eval.mode_count() == 0;
    // mean + Σ|coefficients| bounds the interpolant everywhere
    let bound: f64 = density
        .spectrum()
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.in_band(*i))
        .map(|(_, c)| c.norm())
        .sum();
    let mut out = Vec::with_capacity(n * dim);
    let mut x = vec![0.0; dim];
    while out.len() < n * dim {
        x.iter_mut().for_each(|v| *v = rng.random::<f64>());
        if uniform || rng.random::<f64>() * bound < eval.eval(&x) {
            out.extend_from_slice(&x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusGrid;
    use std::f64::consts::PI;

    #[test]
    fn hamiltonian_hand_values() {
        assert_eq!(
            hamiltonian_n(&[1.0, 2.0], &[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]),
            0.0
        );
        assert!((hamiltonian_n(&[3.0], &[0.4], &[2.0], &[1.0]) + 1.0).abs() < 1e-15);
        let a = [0.3, -1.2, 2.0];
        let shifted: Vec<f64> = a.iter().map(|x| x + 5.0).collect();
        let args = ([1.0, 0.5, 2.0], [0.3, -0.7, 1.1], [0.2, 0.1, -0.4]);
        let h1 = hamiltonian_n(&args.0, &a, &args.1, &args.2);
        let h2 = hamiltonian_n(&args.0, &shifted, &args.1, &args.2);
        assert!((h1 - h2).abs() < 1e-12);
    }

    #[test]
    fn empirical_measure_of_fresh_clocks_is_uniform() {
        let e = ParticleEnsemble::new(1, vec![0.1, 0.4, 0.8], vec![0.0; 3], 0.0, stream_rng(1, 0))
            .unwrap();
        let m = e.empirical_measure();
        assert!(m.weights().iter().all(|w| (w - 1.0 / 3.0).abs() < 1e-15));
        let one = ParticleEnsemble::new(1, vec![0.3], vec![9.0], 0.0, stream_rng(1, 0)).unwrap();
        assert_eq!(one.empirical_measure().weights(), &[1.0]);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let v = ScalarField::from_fn(&grid, |x| 1.0 + (2.0 * PI * x[0]).cos()).evaluator();
        let fb = Feedback::Constant(vec![0.3]);
        let run = |stream| {
            let mut e =
                ParticleEnsemble::new(1, vec![0.5; 10], vec![0.0; 10], 0.0, stream_rng(7, stream))
                    .unwrap();
            for _ in 0..50 {
                e.euler_maruyama_step(&fb, &v, 0.01);
            }
            (e.positions().to_vec(), e.clocks().to_vec())
        };
        assert_eq!(run(0), run(0));
        assert_ne!(run(0), run(1));
    }

    #[test]
    fn constant_potential_freezes_weights() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let v = ScalarField::constant(&grid, 2.0).evaluator();
        let mut e = ParticleEnsemble::new(1, vec![0.1, 0.2], vec![0.5, 0.0], 0.0, stream_rng(3, 0))
            .unwrap();
        let w0 = e.weights();
        for _ in 0..100 {
            e.euler_maruyama_step(&Feedback::Zero, &v, 0.01);
        }
        for (a, b) in w0.iter().zip(e.weights()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn brownian_increments_have_step_variance() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let v = ScalarField::zeros(&grid).evaluator();
        let dt = 1e-4;
        let mut e = ParticleEnsemble::new(1, vec![0.5], vec![0.0], 0.0, stream_rng(11, 0)).unwrap();
        let steps = 100_000;
        let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
        for _ in 0..steps {
            let before = e.positions()[0];
            e.euler_maruyama_step(&Feedback::Zero, &v, dt);
            let mut d = e.positions()[0] - before;
            d -= d.round();
            s1 += d;
            s2 += d * d;
            s4 += d.powi(4);
        }
        let n = steps as f64;
        let mean_z = (s1 / n) / (dt / n).sqrt();
        let var = s2 / n;
        let var_se = ((s4 / n - var * var) / n).sqrt();
        assert!(mean_z.abs() < 4.0);
        assert!(((var - dt) / var_se).abs() < 4.0, "variance {var}");
        assert_eq!(e.clocks()[0], 0.0);
    }

    #[test]
    fn sampling_matches_density_moments() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let mu = ScalarField::from_fn(&grid, |x| 1.0 + 0.8 * (2.0 * PI * x[0]).cos());
        let mut rng = stream_rng(5, 0);
        let n = 200_000;
        let xs = sample_density(&mu, n, &mut rng).unwrap();
        // E cos 2πX = 0.4, Var cos ≤ 1
        let m: f64 = xs.iter().map(|x| (2.0 * PI * x).cos()).sum::<f64>() / n as f64;
        assert!((m - 0.4).abs() < 4.0 / (n as f64).sqrt());
    }
}
