//! Combinatorial engine for multidegree stability and resolved degree-1 Abel
//! maps on nodal curves.
//!
//! Everything lives at the level of the dual graph: irreducible components
//! are genus-labelled vertices, nodes are edges (loops for irreducible
//! nodes), line bundles are multidegrees, and twisters are integer component
//! coefficients pushed through the negated graph Laplacian. All arithmetic is
//! exact; there is no floating point anywhere.
//!
//! The layers build on each other:
//!
//! * [`curve`] — dual graphs, subcurve algebra, chain modifications;
//! * [`stability`] — the beta function and exhaustive (quasi)stability
//!   classification with certificates;
//! * [`twister`] — Laplacian twisters, the unique quasistable twist, and
//!   twister difference subcurves;
//! * [`abel`] — fiberwise limit multidegrees over every point stratum, chain
//!   correction, admissibility, and pushforward descriptors;
//! * [`corpus`] / [`selftest`] — the built-in test curves and the acceptance
//!   criteria they must satisfy.

pub mod abel;
pub mod corpus;
pub mod curve;
pub mod selftest;
pub mod stability;
pub mod twister;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Exact rational scalar used for every beta value.
pub type Rational = num_rational::Rational64;

/// Engine-wide knobs. Defaults match the CLI defaults; the document's
/// `options` block can override them.
#[derive(Clone, Debug)]
pub struct EngineOptions {
    /// Restrict stability checks to connected subcurves (provably equivalent,
    /// kept as an opt-in optimization).
    pub connected_only: bool,
    /// Emit the full beta table in reports when the number of proper
    /// subcurves does not exceed this cap. Zero disables tables.
    pub beta_table_cap: usize,
    /// Iteration cap for the greedy quasistable-twist search before falling
    /// back to the exhaustive box search.
    pub iteration_cap: u32,
    /// Largest coefficient box side explored by the exhaustive twist search.
    pub box_cap: i64,
    /// Upper bound on enumeration volume (multidegree boxes, twist boxes,
    /// matching sweeps).
    pub search_cap: u64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            connected_only: false,
            beta_table_cap: 0,
            iteration_cap: 512,
            box_cap: 12,
            search_cap: 2_000_000,
        }
    }
}
