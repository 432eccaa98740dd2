//! Dense networks, softmax distributions and the adaptive-moment optimizer.

mod adam;
mod categorical;
mod gradcheck;
mod mlp;

pub use adam::{clip_grad_norm, Adam, StepStatus};
pub use categorical::Categorical;
pub use gradcheck::finite_diff_check;
pub use mlp::{Activation, Cache, Mlp};
