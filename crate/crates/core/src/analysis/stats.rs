//! Log-log slope fitting.

use serde::{Deserialize, Serialize};

/// Weighted least-squares line `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Larger of the weight-based and residual-based standard errors.
    pub slope_std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
}

impl SlopeFit {
    pub fn excludes_zero(&self) -> bool {
        self.ci_high < 0.0 || self.ci_low > 0.0
    }
}

const Z95: f64 = 1.959963984540054;

/// Fits `y` against `x` with weights `1/σ²`. Needs two points or more.
pub fn weighted_line_fit(x: &[f64], y: &[f64], sigma: &[f64]) -> Option<SlopeFit> {
    let n = x.len();
    if n < 2 || y.len() != n || sigma.len() != n {
        return None;
    }
    let w: Vec<f64> = sigma.iter().map(|s| 1.0 / (s * s).max(1e-300)).collect();
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = w.iter().zip(y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = (0..n).map(|i| w[i] * (x[i] - mx) * (y[i] - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let model_se = (1.0 / sxx).sqrt();
    let se = if n > 2 {
        let chi2: f64 = (0..n)
            .map(|i| w[i] * (y[i] - intercept - slope * x[i]).powi(2))
            .sum();
        model_se.max((chi2 / (n - 2) as f64 / sxx).sqrt())
    } else {
        model_se
    };
    Some(SlopeFit {
        slope,
        intercept,
        slope_std_error: se,
        ci_low: slope - Z95 * se,
        ci_high: slope + Z95 * se,
        points: n,
    })
}
