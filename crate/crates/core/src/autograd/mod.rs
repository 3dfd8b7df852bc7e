//! Reverse-mode differentiation over complex vectors.
//!
//! Adjoints follow the real-loss convention: for a complex intermediate `z`
//! the tape stores `ḡ = ∂L/∂Re z + i ∂L/∂Im z`. A holomorphic linear map
//! `y = M x` then back-propagates as `x̄ = M^H ȳ`, and the gradient of a real
//! parameter `p` is `Re(conj(ḡ) · ∂z/∂p)`.

mod checkpoint;
mod gradcheck;
mod param;
mod tape;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gradcheck::{check_gradients, relative_error, GradCheckEntry, GradCheckReport};
pub use param::{Gradients, ParamId, ParamRole, Parameter, ParameterStore};
pub(crate) use tape::realise_mask;
pub use tape::{predict, Backward, BiasSource, MaskMode, MaskParams, NodeId, PhaseMode, Tape};
