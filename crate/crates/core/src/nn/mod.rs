//! Fixed-topology dense network with Monte Carlo dropout.

mod backprop;
mod loss;
mod matrix;
mod model;
mod train;

pub use backprop::{backward, central_difference, loss_and_gradient, loss_value, max_relative_error, numeric_gradient};
pub use loss::{cross_entropy_loss, uncertainty_aware_loss, LossKind, LossSpec, PROB_FLOOR};
pub use matrix::Matrix;
pub use model::{DropoutMask, Gradients, MlpConfig, MlpModel, Params};
pub use train::{train, TrainConfig, TrainHistory};

pub(crate) use loss::normalized_entropy;
pub(crate) use matrix::gemm;
