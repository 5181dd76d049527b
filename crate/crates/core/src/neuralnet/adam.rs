use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neuralnet::Param;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates, one array per parameter tensor.
/// Moments are allocated on the first step.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub config: AdamConfig,
    pub step: u64,
    pub m: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(config: AdamConfig) -> Self {
        AdamState {
            config,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    /// One bias-corrected update using each parameter's accumulated gradient.
    pub fn update(&mut self, params: &mut [&mut Param<T>]) -> Result<()> {
        if self.m.is_empty() {
            self.m = params.iter().map(|p| vec![T::zero(); p.len()]).collect();
            self.v = self.m.clone();
        }
        if self.m.len() != params.len() || self.m.iter().zip(params.iter()).any(|(m, p)| m.len() != p.len()) {
            return Err(Error::Shape("optimizer state does not match parameters".into()));
        }
        self.step += 1;
        let c = self.config;
        let (b1, b2) = (T::of(c.beta1), T::of(c.beta2));
        let lr = T::of(c.lr);
        let eps = T::of(c.epsilon);
        let step = i32::try_from(self.step).unwrap_or(i32::MAX);
        let bc1 = T::one() - b1.powi(step);
        let bc2 = T::one() - b2.powi(step);
        for ((p, m), v) in params.iter_mut().zip(&mut self.m).zip(&mut self.v) {
            let Param { value, grad } = &mut **p;
            for (((x, &g), mi), vi) in value.data_mut().iter_mut().zip(grad.iter()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = b1 * *mi + (T::one() - b1) * g;
                *vi = b2 * *vi + (T::one() - b2) * g * g;
                let m_hat = *mi / bc1;
                let v_hat = *vi / bc2;
                *x -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuralnet::Tensor;

    fn param(values: Vec<f64>, grad: Vec<f64>) -> Param<f64> {
        let mut p = Param::new(Tensor::vector(values));
        p.grad = grad;
        p
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = param(vec![0.3, -0.2], vec![0.0, 0.0]);
        let mut s = AdamState::new(AdamConfig::default());
        s.update(&mut [&mut p]).unwrap();
        assert_eq!(p.value.data(), &[0.3, -0.2]);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn first_step_is_lr_times_sign() {
        let g = [2.5, -0.01, 1e-3];
        let mut p = param(vec![0.0; 3], g.to_vec());
        let mut s = AdamState::new(AdamConfig::default());
        s.update(&mut [&mut p]).unwrap();
        for (x, g) in p.value.data().iter().zip(g) {
            let expected = -1e-3 * g / (g.abs() + 1e-8);
            assert!((x - expected).abs() < 1e-15, "{x} vs {expected}");
        }
    }

    #[test]
    fn identical_state_copies_agree() {
        let mut s = AdamState::new(AdamConfig::default());
        let mut p = param(vec![1.0, 2.0], vec![0.5, -0.5]);
        s.update(&mut [&mut p]).unwrap();
        let (mut s2, mut p2) = (s.clone(), p.clone());
        s.update(&mut [&mut p]).unwrap();
        s2.update(&mut [&mut p2]).unwrap();
        assert_eq!(p, p2);
        assert_eq!(s, s2);
    }

    #[test]
    fn mismatched_parameters_error() {
        let mut s = AdamState::new(AdamConfig::default());
        let mut p = param(vec![1.0], vec![0.1]);
        s.update(&mut [&mut p]).unwrap();
        let mut q = param(vec![1.0, 2.0], vec![0.1, 0.1]);
        assert!(s.update(&mut [&mut q]).is_err());
    }
}
