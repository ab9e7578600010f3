//! Text-to-network pipeline: glossary matching, document-term counting,
//! permutation-filtered similarity networks, and the network statistics
//! computed on them.

pub mod community;
pub mod corpus;
pub mod error;
pub mod glossary;
pub mod graph;
pub mod netmetrics;
pub mod report;
pub mod richclub;
pub mod rng;
pub mod simnet;
pub mod termmatrix;

pub use error::{Error, Result};
pub use graph::{Edge, Node, WeightedGraph};
