//! Enclosing decompositions of lambda*K_n in 2-edge-connected
//! r-factorizations of mu*K_m.
//!
//! The construction runs in two stages. [`extend`] grows the given
//! decomposition of lambda*K_n into an r-admissible decomposition of mu*K_n
//! whose classes are large enough, and [`detach`] splits an amalgamated
//! vertex back into the m - n missing vertices. [`oracle`] holds independent
//! brute-force checks used by the test suites.

pub mod cli;
pub mod conditions;
pub mod decomp;
pub mod detach;
pub mod error;
pub mod extend;
pub mod mgraph;
pub mod oracle;
pub mod pipeline;

pub use conditions::{EnclosureParams, Regime};
pub use decomp::{Decomposition, Enclosing, PartialDecomposition};
pub use error::{Error, Result};
pub use mgraph::{Multigraph, Pair, Vertex};
