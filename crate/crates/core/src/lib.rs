//! Majority-based preference diffusion on undirected graphs.
//!
//! Nodes hold strict linear orders over a small set of alternatives and
//! update them by pairwise majority (the synchronous and asynchronous
//! engines) or by copying a random neighbour (the random engine). The crate
//! bundles the graph substrate, the preference algebra, the diffusion
//! engines, exact counting of winning placements, and the experiment
//! harness behind the `prefdiff` binary.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod preference;
pub mod rng;
pub mod solutions;

pub use error::{Error, Result};
pub use graph::{Graph, NodeSet};
pub use preference::{Order, Profile};
