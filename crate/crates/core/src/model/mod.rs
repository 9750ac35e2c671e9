//! Discretized reaction-diffusion systems and the function grammar used for
//! reactions and Lyapunov-like functions.

pub mod diffusion;
pub mod rational;
pub mod system;

pub use diffusion::{apply_diffusion, apply_diffusion_into, backward_diff, forward_diff};
pub use rational::{Asymptote, Limit, RationalTermFunction, Term};
pub use system::{DiscretizedSystem, ReactionPair, StateVector};
