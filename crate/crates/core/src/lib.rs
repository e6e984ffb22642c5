//! Extremal graph search with SAT: graphs, BFS-enumeration symmetry breaking,
//! CNF compilation, solver harness, extremal number search and exhaustive
//! oracles for small orders.

pub mod bench;
pub mod cnf;
pub mod dpll;
pub mod encoder;
pub mod error;
pub mod extremal;
pub mod fixtures;
pub mod graph;
pub mod oracle;
pub mod sbp;
pub mod solver;

pub use encoder::{Bounds, CycleEncoding, DecodedModel, Encoding, Forbid, ProblemSpec, SbpMode};
pub use error::{Error, Result};
pub use graph::{Graph, Permutation};
pub use sbp::{BfsCertificate, ParentArray, Predicate};
pub use solver::{run_solver, SeedPolicy, SolveOutcome, SolveResult, SolverConfig};
pub use extremal::{find_ex, jukna_upper_bound, ExOptions, ExResult, ExSearch};
