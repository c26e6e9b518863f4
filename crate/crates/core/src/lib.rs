//! Choreography extraction for networks of processes that may spawn new
//! processes at runtime.

pub mod corpus;
pub mod equiv;
pub mod model;
pub mod par;
pub mod pipeline;
pub mod seg;
pub mod semantics;
pub mod synth;
pub mod syntax;
