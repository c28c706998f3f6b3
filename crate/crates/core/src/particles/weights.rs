//! Exponential weights `1/nⁱ[a] = e^{−aⁱ} / Σ_j e^{−aʲ}` of the killing clocks.

/// Normalized weights, computed with the smallest clock factored out so that
/// no exponential overflows and the largest weight's factor is exactly 1.
pub fn weights_from_a(a: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len()];
    weights_into(a, &mut out);
    out
}

/// [`weights_from_a`] into a caller-provided buffer.
pub fn weights_into(a: &[f64], out: &mut [f64]) {
    let shift = a.iter().copied().fold(f64::INFINITY, f64::min);
    let mut total = 0.0;
    for (o, &ai) in out.iter_mut().zip(a) {
        *o = (-(ai - shift)).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

/// `√(Σ (1/nⁱ)²)`, the right-hand side of the particle-to-limit bound.
pub fn weight_norm(weights: &[f64]) -> f64 {
    weights.iter().map(|w| w * w).sum::<f64>().sqrt()
}
