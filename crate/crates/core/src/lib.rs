//! Synthesizability-aware de novo molecular design.
//!
//! A slow retrosynthesis planner labels molecules with a synthesis cost; a
//! message-passing network learns to imitate it; a Boltzmann softmax search
//! then uses the fast network inside a multi-objective score.

pub mod molgraph;
pub mod spaces;
pub mod oracle;
pub mod scoring;
pub mod optimizer;
pub mod surrogate;
pub mod evalkit;
