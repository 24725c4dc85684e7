//! Reverse-mode differentiation over dense matrices with fixed sparse
//! operators, and the optimizer used for training.

mod optim;
mod tape;

pub use optim::Adam;
pub use tape::{class1_probabilities, Activation, Tape, Var, LEAKY_SLOPE};
