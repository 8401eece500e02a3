//! Multi-engine algorithm selection for Answer Set Programming.
//!
//! The crate is organized around the evaluation workflow of a multi-engine
//! ASP system:
//!
//! * [`ground`] parses ground programs (numeric smodels/lparse format and a
//!   textual dialect) and computes the 52-entry ground feature vector.
//! * [`nonground`] parses non-ground programs, builds the predicate
//!   dependency graph and computes the 11-entry non-ground feature vector.
//! * [`classify`] holds the two learners: a k-nearest-neighbor selector and
//!   a PART-style decision-list generator, plus the model file format.
//! * [`engines`] runs external grounders and solvers under CPU and memory
//!   limits, and provides a deterministic mock engine.
//! * [`pipeline`] chains grounder selection, grounding, solver selection and
//!   solving for a single program.
//! * [`harness`] collects runtime tables and computes the evaluation
//!   statistics (solved counts, mean times, virtual best solver, cactus data,
//!   cross-validation).

pub mod classify;
pub mod engines;
pub mod features;
pub mod ground;
pub mod harness;
pub mod nonground;
pub mod pipeline;

pub use features::{FeatureVector, Manifest};
