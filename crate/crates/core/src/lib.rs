//! Degrees of belief from possibly inconsistent, incomplete and uncertain
//! evidence.
//!
//! The pipeline has three layers:
//!
//! * a qualitative layer, where evidence sets generate an evidential
//!   [`topology`] and a frame of justification selects acceptable arguments;
//! * a quantitative layer, where certainties are merged into a mass over
//!   subsets of the evidence ([`fusion::delta`]);
//! * a bridging layer, where evidence allocation functions move that mass
//!   onto open sets and the result is read off as a belief function.
//!
//! The [`dst`] module holds classical Dempster-Shafer combination and the
//! qualitative belief operator, used as independent oracles by [`verify`].

pub mod cli;
pub mod dst;
pub mod error;
pub mod evidence;
pub mod fusion;
pub mod rational;
pub mod sets;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};
pub use evidence::{parse_frame, EvidenceItem, EvidenceSubset, QuantitativeEvidenceFrame};
pub use rational::Rational;
pub use sets::{intersect_all, is_subset, union_all, StateSet, StateUniverse};
pub use topology::{generate_topology, Topology};
