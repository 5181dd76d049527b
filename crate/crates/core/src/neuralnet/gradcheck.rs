//! Finite-difference verification of backpropagated gradients.

/// Points whose ReLU inputs or pooling margins fall below this are
/// rejected as non-differentiable for checking purposes.
pub const KINK_GUARD: f64 = 1e-4;

pub const DEFAULT_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub max_relative_error: f64,
    /// Parameter index where the maximum was attained.
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}

/// Compares `analytic` against central differences of `loss` around
/// `theta`, one coordinate at a time.
pub fn gradient_check(theta: &[f64], analytic: &[f64], epsilon: f64, mut loss: impl FnMut(&[f64]) -> f64) -> GradCheck {
    assert_eq!(theta.len(), analytic.len(), "gradient length");
    let mut point = theta.to_vec();
    let mut worst = GradCheck {
        max_relative_error: 0.0,
        worst_index: 0,
        analytic: analytic.first().copied().unwrap_or(0.0),
        numeric: 0.0,
    };
    for i in 0..theta.len() {
        point[i] = theta[i] + epsilon;
        let up = loss(&point);
        point[i] = theta[i] - epsilon;
        let down = loss(&point);
        point[i] = theta[i];
        let numeric = (up - down) / (2.0 * epsilon);
        let err = relative_error(analytic[i], numeric);
        if err > worst.max_relative_error {
            worst = GradCheck {
                max_relative_error: err,
                worst_index: i,
                analytic: analytic[i],
                numeric,
            };
        }
    }
    worst
}
