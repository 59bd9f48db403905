//! Qualitative reasoning about rigid-object motion.
//!
//! The crate models forces and velocities by their component signs rather
//! than magnitudes. Given the qualitative states of a set of contacting
//! objects at two time points, the solver enumerates every qualitative
//! action (impulse direction plus application locus) that could have caused
//! the observed change, together with a machine-checkable derivation trace.
//!
//! Module layout:
//!
//! - [`sign`]: the three-valued sign calculus (signs, sign sets, sign
//!   vectors, quantization of numeric vectors).
//! - [`dynamics`]: qualitative forces, object states, the state-change
//!   envelope of a force set, and the three physical contact rules.
//! - [`scene`]: the scene data model, its JSON format, and the structure
//!   graph whose edges are contact-force variables.
//! - [`solver`]: the complete depth-first search over the structure graph,
//!   with grouped assignments and the two pruning heuristics.
//! - [`oracle`]: independent ground truth — a brute-force action enumerator
//!   and a minimal numeric impulse simulator for generating test scenes.
//! - [`report`]: run reports for the command-line front end.

pub mod dynamics;
pub mod oracle;
pub mod report;
pub mod scene;
pub mod sign;
pub mod solver;
