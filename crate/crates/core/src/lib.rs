//! Laboratory for sandpile criticality on finite graph families.
//!
//! The crate brings together the pieces needed to study threshold and
//! stationary densities of abelian sandpiles and parallel chip-firing:
//!
//! * [`graph`]: multigraph storage, the graph families under study, and a
//!   plain-text serialization format;
//! * [`dynamics`]: sequential (abelian) stabilization, the burning test for
//!   recurrence, and exhaustive enumeration of recurrent configurations;
//! * [`counting`]: exact spanning-tree and unicyclic-subgraph counts;
//! * [`chain`]: an O(log n) interval stabilizer for degree-2 chains, used to
//!   reach chain sizes the generic simulator cannot;
//! * [`chipfiring`]: synchronous (parallel) chip-firing, orbit detection, and
//!   the flower-graph activity classification;
//! * [`montecarlo`]: reproducible random protocols: threshold trials,
//!   stationary sampling, density- and activity-response curves;
//! * [`analytic`]: closed-form densities, transfer-matrix and Markov routes,
//!   and exact rational identities;
//! * [`oracle`]: deliberately naive reference implementations used to verify
//!   the fast paths;
//! * [`verify`]: named self-check suites shared by tests and the CLI.

#![allow(clippy::needless_range_loop, clippy::excessive_precision)]

pub mod analytic;
pub mod chain;
pub mod chipfiring;
pub mod counting;
pub mod dynamics;
pub mod graph;
pub mod montecarlo;
pub mod oracle;
pub mod rng;
pub mod verify;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
