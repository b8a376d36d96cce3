//! Learning abstract symbolic models of skills from execution traces and
//! choosing which skill to run next to reduce model uncertainty.

pub mod bayes;
pub mod envs;
pub mod explorer;
pub mod harness;
pub mod model;
pub mod rng;
pub mod trace;
