//! Minimal differentiable kernels: convolution, pooling, dropout, dense,
//! sigmoid, binary cross-entropy and Adam, each with an explicit backward.

mod adam;
mod checkpoint;
pub mod gradcheck;
pub mod ops;
mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{Checkpoint, Manifest, ParamSpec, CHECKPOINT_VERSION};
pub use gradcheck::{gradient_check, relative_error, GradCheck};
pub use ops::{
    bce_grad_logit, bce_loss, conv1d, conv1d_backward, dense, dense_backward, dropout, dropout_mask, maxpool1d,
    maxpool1d_backward, relu, relu_backward, sigmoid, Activation, Conv1dGrads, DenseGrads, Mode, Pooled,
};
pub use tensor::{Param, Tensor};
