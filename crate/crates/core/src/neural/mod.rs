//! Dense feed-forward networks with exact reverse-mode gradients, an Adam
//! optimizer and a binary checkpoint format.
//!
//! All arithmetic is `f64`. Batches are row-major `rows × dim` slices; the
//! single-sample entry points are one-row batches.

mod adam;
pub mod checkpoint;
mod gradcheck;
mod mlp;

pub use adam::{adam_step, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON};
pub use checkpoint::{read_tensors, write_tensors, Tensor, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gradcheck::{check_input_gradient, check_parameter_gradients, relative_error, GradCheck, REL_ERROR_FLOOR};
pub use mlp::{Activation, Cache, DenseLayer, Gradients, LayerGradient, Mlp};
