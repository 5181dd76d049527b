//! Forward and backward kernels. 2-D tensors are `[time × channels]`,
//! row-major; convolution kernels are `[filters × width × channels]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::neuralnet::Tensor;
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    None,
}

/// Smallest and largest probability fed to the logarithms of the loss.
pub const PROB_CLAMP: f64 = 1e-7;

fn dims2<T: Scalar>(t: &Tensor<T>, what: &str) -> Result<(usize, usize)> {
    match *t.shape() {
        [a, b] => Ok((a, b)),
        ref s => Err(Error::Shape(format!("{what} must be 2-D, got {s:?}"))),
    }
}

/// Valid (unpadded), stride-1 convolution over time.
pub(crate) fn conv1d_into<T: Scalar>(
    input: &[T],
    channels: usize,
    kernels: &[T],
    width: usize,
    bias: &[T],
    out: &mut [T],
) {
    let steps = input.len() / channels + 1 - width;
    let filters = bias.len();
    let span = width * channels;
    for t in 0..steps {
        let window = &input[t * channels..t * channels + span];
        let row = &mut out[t * filters..(t + 1) * filters];
        for (f, o) in row.iter_mut().enumerate() {
            *o = bias[f] + dot(window, &kernels[f * span..(f + 1) * span]);
        }
    }
}

/// Accumulates kernel/bias gradients and, if requested, the input gradient.
pub(crate) fn conv1d_backward_into<T: Scalar>(
    input: &[T],
    channels: usize,
    kernels: &[T],
    width: usize,
    grad_out: &[T],
    grad_kernels: &mut [T],
    grad_bias: &mut [T],
    mut grad_input: Option<&mut [T]>,
) {
    let filters = grad_bias.len();
    let steps = grad_out.len() / filters;
    let span = width * channels;
    for t in 0..steps {
        let window = &input[t * channels..t * channels + span];
        for f in 0..filters {
            let g = grad_out[t * filters + f];
            if g.is_zero() {
                continue;
            }
            grad_bias[f] += g;
            let gk = &mut grad_kernels[f * span..(f + 1) * span];
            for (a, &x) in gk.iter_mut().zip(window) {
                *a += g * x;
            }
            if let Some(gi) = grad_input.as_deref_mut() {
                let k = &kernels[f * span..(f + 1) * span];
                for (a, &w) in gi[t * channels..t * channels + span].iter_mut().zip(k) {
                    *a += g * w;
                }
            }
        }
    }
}

pub fn conv1d<T: Scalar>(input: &Tensor<T>, kernels: &Tensor<T>, bias: &Tensor<T>) -> Result<Tensor<T>> {
    let (steps, channels) = dims2(input, "conv1d input")?;
    let (filters, width, kc) = match *kernels.shape() {
        [f, w, c] => (f, w, c),
        ref s => return Err(Error::Shape(format!("conv1d kernels must be 3-D, got {s:?}"))),
    };
    if kc != channels || bias.len() != filters || width == 0 {
        return Err(Error::Shape(format!(
            "conv1d: input {:?}, kernels {:?}, bias {:?}",
            input.shape(),
            kernels.shape(),
            bias.shape()
        )));
    }
    if steps < width {
        return Err(Error::invalid("sequence shorter than kernel"));
    }
    let out_steps = steps - width + 1;
    let mut out = vec![T::zero(); out_steps * filters];
    conv1d_into(input.data(), channels, kernels.data(), width, bias.data(), &mut out);
    Tensor::new(vec![out_steps, filters], out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conv1dGrads<T> {
    pub input: Tensor<T>,
    pub kernels: Tensor<T>,
    pub bias: Tensor<T>,
}

pub fn conv1d_backward<T: Scalar>(input: &Tensor<T>, kernels: &Tensor<T>, grad_out: &Tensor<T>) -> Result<Conv1dGrads<T>> {
    let (steps, channels) = dims2(input, "conv1d input")?;
    let (filters, width) = (kernels.shape()[0], kernels.shape()[1]);
    if grad_out.shape() != [steps + 1 - width, filters] {
        return Err(Error::Shape(format!("conv1d grad_out {:?}", grad_out.shape())));
    }
    let mut gi = Tensor::zeros(input.shape().to_vec());
    let mut gk = Tensor::zeros(kernels.shape().to_vec());
    let mut gb = Tensor::zeros(vec![filters]);
    conv1d_backward_into(
        input.data(),
        channels,
        kernels.data(),
        width,
        grad_out.data(),
        gk.data_mut(),
        gb.data_mut(),
        Some(gi.data_mut()),
    );
    Ok(Conv1dGrads {
        input: gi,
        kernels: gk,
        bias: gb,
    })
}

pub fn relu<T: Scalar>(input: &Tensor<T>) -> Tensor<T> {
    let data = input.data().iter().map(|&x| x.max(T::zero())).collect();
    Tensor::new(input.shape().to_vec(), data).expect("same shape")
}

/// Gradient through ReLU given its pre-activation input.
pub fn relu_backward<T: Scalar>(pre: &Tensor<T>, grad_out: &Tensor<T>) -> Tensor<T> {
    let data = pre
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&x, &g)| if x > T::zero() { g } else { T::zero() })
        .collect();
    Tensor::new(pre.shape().to_vec(), data).expect("same shape")
}

/// Non-overlapping max pooling over time; returns the pooled values and,
/// per output cell, the input row that won (lowest index on ties).
pub(crate) fn maxpool_into<T: Scalar>(input: &[T], filters: usize, pool: usize, out: &mut [T], argmax: &mut [usize]) {
    let out_steps = out.len() / filters;
    for p in 0..out_steps {
        for f in 0..filters {
            let mut best_row = p * pool;
            let mut best = input[best_row * filters + f];
            for r in p * pool + 1..(p + 1) * pool {
                let x = input[r * filters + f];
                if x > best {
                    best = x;
                    best_row = r;
                }
            }
            out[p * filters + f] = best;
            argmax[p * filters + f] = best_row;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pooled<T> {
    pub output: Tensor<T>,
    pub argmax: Vec<usize>,
}

pub fn maxpool1d<T: Scalar>(input: &Tensor<T>, pool: usize) -> Result<Pooled<T>> {
    let (steps, filters) = dims2(input, "maxpool input")?;
    if pool == 0 || steps < pool {
        return Err(Error::invalid(format!("cannot pool {steps} steps with window {pool}")));
    }
    let out_steps = steps / pool;
    let mut out = vec![T::zero(); out_steps * filters];
    let mut argmax = vec![0; out_steps * filters];
    maxpool_into(input.data(), filters, pool, &mut out, &mut argmax);
    Ok(Pooled {
        output: Tensor::new(vec![out_steps, filters], out)?,
        argmax,
    })
}

pub fn maxpool1d_backward<T: Scalar>(input_steps: usize, argmax: &[usize], grad_out: &Tensor<T>) -> Tensor<T> {
    let filters = grad_out.shape()[1];
    let mut grad = Tensor::zeros(vec![input_steps, filters]);
    for (cell, (&row, &g)) in argmax.iter().zip(grad_out.data()).enumerate() {
        grad.data_mut()[row * filters + cell % filters] += g;
    }
    grad
}

/// Inverted-dropout multipliers: 0 with probability `rate`, else `1/(1-rate)`.
pub fn dropout_mask<T: Scalar, R: Rng>(len: usize, rate: f64, rng: &mut R) -> Vec<T> {
    let keep = T::of(1.0 / (1.0 - rate));
    (0..len)
        .map(|_| if rng.gen::<f64>() < rate { T::zero() } else { keep })
        .collect()
}

pub fn check_rate(rate: f64) -> Result<()> {
    if (0.0..1.0).contains(&rate) {
        Ok(())
    } else {
        Err(Error::invalid(format!("dropout rate {rate} outside [0, 1)")))
    }
}

pub fn dropout<T: Scalar>(input: &Tensor<T>, rate: f64, mode: Mode, seed: u64) -> Result<Tensor<T>> {
    check_rate(rate)?;
    if mode == Mode::Eval || rate == 0.0 {
        return Ok(input.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask: Vec<T> = dropout_mask(input.len(), rate, &mut rng);
    let data = input.data().iter().zip(&mask).map(|(&x, &m)| x * m).collect();
    Tensor::new(input.shape().to_vec(), data)
}

/// Logistic function, evaluated without overflow for large |x|.
pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

pub fn dense<T: Scalar>(input: &Tensor<T>, weights: &Tensor<T>, bias: &Tensor<T>, activation: Activation) -> Result<Tensor<T>> {
    let (m, n) = dims2(weights, "dense weights")?;
    if input.len() != n || bias.len() != m {
        return Err(Error::Shape(format!(
            "dense: input {:?}, weights {:?}, bias {:?}",
            input.shape(),
            weights.shape(),
            bias.shape()
        )));
    }
    let out = (0..m)
        .map(|i| {
            let z = bias.data()[i] + dot(&weights.data()[i * n..(i + 1) * n], input.data());
            match activation {
                Activation::Relu => z.max(T::zero()),
                Activation::Sigmoid => sigmoid(z),
                Activation::None => z,
            }
        })
        .collect();
    Ok(Tensor::vector(out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrads<T> {
    pub input: Tensor<T>,
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
}

/// Backward pass of the affine part given the gradient w.r.t. the
/// pre-activation output.
pub fn dense_backward<T: Scalar>(input: &Tensor<T>, weights: &Tensor<T>, grad_pre: &Tensor<T>) -> Result<DenseGrads<T>> {
    let (m, n) = dims2(weights, "dense weights")?;
    if input.len() != n || grad_pre.len() != m {
        return Err(Error::Shape("dense_backward shapes".into()));
    }
    let mut gi = vec![T::zero(); n];
    let mut gw = vec![T::zero(); m * n];
    for i in 0..m {
        let g = grad_pre.data()[i];
        for j in 0..n {
            gw[i * n + j] = g * input.data()[j];
            gi[j] += g * weights.data()[i * n + j];
        }
    }
    Ok(DenseGrads {
        input: Tensor::vector(gi),
        weights: Tensor::new(vec![m, n], gw)?,
        bias: grad_pre.clone(),
    })
}

fn clamp_prob<T: Scalar>(p: T) -> T {
    p.max(T::of(PROB_CLAMP)).min(T::one() - T::of(PROB_CLAMP))
}

/// Binary cross-entropy with `p` clamped to `[1e-7, 1 - 1e-7]`.
pub fn bce_loss<T: Scalar>(p: T, y: T) -> T {
    let p = clamp_prob(p);
    -(y * p.ln() + (T::one() - y) * (T::one() - p).ln())
}

/// d bce(sigmoid(z), y) / dz of the unclamped loss.
pub fn bce_grad_logit<T: Scalar>(p: T, y: T) -> T {
    p - y
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t2(rows: &[&[f64]]) -> Tensor<f64> {
        Tensor::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn conv1d_hand_example() {
        let input = t2(&[&[1.0], &[2.0], &[3.0]]);
        let k = Tensor::new(vec![1, 2, 1], vec![1.0, 1.0]).unwrap();
        let out = conv1d(&input, &k, &Tensor::vector(vec![0.0])).unwrap();
        assert_eq!(out.shape(), &[2, 1]);
        assert_eq!(out.data(), &[3.0, 5.0]);
    }

    #[test]
    fn conv1d_zero_kernel_gives_bias() {
        let input = t2(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        let k = Tensor::zeros(vec![2, 2, 2]);
        let out = conv1d(&input, &k, &Tensor::vector(vec![0.7, -1.5])).unwrap();
        assert_eq!(out.data(), &[0.7, -1.5, 0.7, -1.5]);
    }

    #[test]
    fn conv1d_width_one_identity() {
        let input = t2(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let k = Tensor::new(vec![2, 1, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let out = conv1d(&input, &k, &Tensor::vector(vec![0.0, 0.0])).unwrap();
        assert_eq!(out, input);
    }

    #[test]
    fn conv1d_short_sequence_errors() {
        let input = t2(&[&[1.0]]);
        let k = Tensor::zeros(vec![1, 2, 1]);
        let err = conv1d(&input, &k, &Tensor::vector(vec![0.0])).unwrap_err();
        assert!(err.to_string().contains("sequence shorter than kernel"));
    }

    #[test]
    fn maxpool_examples() {
        let p = maxpool1d(&t2(&[&[3.0], &[5.0], &[2.0], &[4.0]]), 2).unwrap();
        assert_eq!(p.output.data(), &[5.0, 4.0]);
        let input = t2(&[&[1.0], &[1.0], &[1.0], &[1.0]]);
        let p = maxpool1d(&input, 2).unwrap();
        assert_eq!(p.output.data(), &[1.0, 1.0]);
        let g = maxpool1d_backward(4, &p.argmax, &Tensor::new(vec![2, 1], vec![1.0, 1.0]).unwrap());
        assert_eq!(g.data(), &[1.0, 0.0, 1.0, 0.0]);
        let p = maxpool1d(&t2(&[&[1.0], &[2.0], &[3.0], &[4.0], &[9.0]]), 2).unwrap();
        assert_eq!(p.output.data(), &[2.0, 4.0]);
        assert!(maxpool1d(&t2(&[&[1.0]]), 2).is_err());
    }

    #[test]
    fn dropout_modes() {
        let x = Tensor::vector(vec![1.0f64, 2.0, 3.0]);
        assert_eq!(dropout(&x, 0.0, Mode::Train, 1).unwrap(), x);
        assert_eq!(dropout(&x, 0.7, Mode::Eval, 1).unwrap(), x);
        assert!(dropout(&x, 1.0, Mode::Train, 1).is_err());
        assert_eq!(dropout(&x, 0.5, Mode::Train, 9).unwrap(), dropout(&x, 0.5, Mode::Train, 9).unwrap());
    }

    #[test]
    fn dropout_statistics() {
        let n = 100_000;
        let x = Tensor::vector(vec![1.0f64; n]);
        let y = dropout(&x, 0.5, Mode::Train, 42).unwrap();
        let kept = y.data().iter().filter(|&&v| v != 0.0).count() as f64 / n as f64;
        assert!((kept - 0.5).abs() <= 0.01, "kept {kept}");
        let mean = y.data().iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() <= 0.02, "mean {mean}");
    }

    #[test]
    fn dense_examples() {
        let x = Tensor::vector(vec![-1.0f64, 2.0]);
        let eye = t2(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let zero = Tensor::vector(vec![0.0, 0.0]);
        assert_eq!(dense(&x, &eye, &zero, Activation::None).unwrap(), x);
        assert_eq!(dense(&x, &eye, &zero, Activation::Relu).unwrap().data(), &[0.0, 2.0]);
        assert_eq!(sigmoid(0.0f64), 0.5);
        assert!(dense(&x, &t2(&[&[1.0]]), &Tensor::vector(vec![0.0]), Activation::None).is_err());
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(-1000.0f64), 0.0);
        assert_eq!(sigmoid(1000.0f64), 1.0);
        assert!(sigmoid(-30.0f64) > 0.0);
    }

    #[test]
    fn bce_examples() {
        assert!((bce_loss(0.5f64, 1.0) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(bce_loss(1.0f64, 1.0) <= 1e-6);
        for p in [0.1, 0.3, 0.77] {
            assert!((bce_loss(p, 1.0f64) - bce_loss(1.0 - p, 0.0)).abs() < 1e-12);
        }
        assert!(bce_loss(0.0f64, 1.0).is_finite());
    }

    fn finite_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize) -> f64 {
        let h = 1e-6;
        let mut a = x.to_vec();
        let mut b = x.to_vec();
        a[i] += h;
        b[i] -= h;
        (f(&a) - f(&b)) / (2.0 * h)
    }

    #[test]
    fn conv1d_backward_matches_differences() {
        let input = Tensor::new(vec![5, 2], vec![0.3, -0.1, 0.8, 0.2, -0.5, 0.9, 0.4, -0.7, 0.1, 0.6]).unwrap();
        let kernels = Tensor::new(vec![2, 3, 2], (0..12).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        let bias = Tensor::vector(vec![0.1, -0.2]);
        let upstream = Tensor::new(vec![3, 2], vec![1.0, -2.0, 0.5, 0.3, -1.1, 0.7]).unwrap();
        let loss = |inp: &[f64], ker: &[f64]| {
            let i = Tensor::new(vec![5, 2], inp.to_vec()).unwrap();
            let k = Tensor::new(vec![2, 3, 2], ker.to_vec()).unwrap();
            dot(conv1d(&i, &k, &bias).unwrap().data(), upstream.data())
        };
        let g = conv1d_backward(&input, &kernels, &upstream).unwrap();
        for i in 0..input.len() {
            let fd = finite_diff(|x| loss(x, kernels.data()), input.data(), i);
            assert!((fd - g.input.data()[i]).abs() < 1e-8);
        }
        for i in 0..kernels.len() {
            let fd = finite_diff(|x| loss(input.data(), x), kernels.data(), i);
            assert!((fd - g.kernels.data()[i]).abs() < 1e-8);
        }
        assert_eq!(g.bias.data(), &[1.0 + 0.5 - 1.1, -2.0 + 0.3 + 0.7]);
    }

    #[test]
    fn dense_backward_matches_differences() {
        let x = Tensor::vector(vec![0.2, -0.4, 0.9]);
        let w = Tensor::new(vec![2, 3], vec![0.1, 0.2, -0.3, 0.5, -0.6, 0.4]).unwrap();
        let b = Tensor::vector(vec![0.0, 0.1]);
        let up = Tensor::vector(vec![0.7, -1.3]);
        let g = dense_backward(&x, &w, &up).unwrap();
        let loss = |xs: &[f64]| dot(dense(&Tensor::vector(xs.to_vec()), &w, &b, Activation::None).unwrap().data(), up.data());
        for i in 0..3 {
            assert!((finite_diff(loss, x.data(), i) - g.input.data()[i]).abs() < 1e-8);
        }
    }

    proptest! {
        #[test]
        fn conv1d_is_linear_in_input(
            a in -3.0f64..3.0, b in -3.0f64..3.0,
            x in proptest::collection::vec(-1.0f64..1.0, 12),
            y in proptest::collection::vec(-1.0f64..1.0, 12),
            k in proptest::collection::vec(-1.0f64..1.0, 12),
        ) {
            let kernels = Tensor::new(vec![2, 2, 3], k.clone()).unwrap();
            let zero = Tensor::vector(vec![0.0, 0.0]);
            let tx = Tensor::new(vec![4, 3], x.clone()).unwrap();
            let ty = Tensor::new(vec![4, 3], y.clone()).unwrap();
            let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let lhs = conv1d(&Tensor::new(vec![4, 3], mix).unwrap(), &kernels, &zero).unwrap();
            let cx = conv1d(&tx, &kernels, &zero).unwrap();
            let cy = conv1d(&ty, &kernels, &zero).unwrap();
            for i in 0..lhs.len() {
                prop_assert!((lhs.data()[i] - (a * cx.data()[i] + b * cy.data()[i])).abs() < 1e-10);
            }
        }

        #[test]
        fn pooling_and_relu_bounds(x in proptest::collection::vec(-5.0f64..5.0, 2..30)) {
            let t = Tensor::new(vec![x.len(), 1], x.clone()).unwrap();
            let max = x.iter().cloned().fold(f64::MIN, f64::max);
            let p = maxpool1d(&t, 2).unwrap();
            prop_assert!(p.output.data().iter().all(|&v| v <= max));
            prop_assert!(relu(&t).data().iter().all(|&v| v >= 0.0));
        }
    }
}
