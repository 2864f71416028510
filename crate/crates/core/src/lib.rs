//! Disintegration of relative train track maps.
//!
//! Given a topological representative of an outer automorphism of a free
//! group, this crate computes its filtration and strata, catalogs Nielsen
//! paths, finds complete and QE-splittings, builds the almost invariant
//! subgraphs and the lattice of admissible tuples, constructs the maps
//! `f_a`, and audits the rank of the resulting abelian subgroup.

pub mod analysis;
pub mod coordinates;
pub mod ct_check;
pub mod disintegration;
pub mod document;
pub mod free_group;
pub mod error;
pub mod graph_map;
pub mod max_rank;
pub mod nielsen;
pub mod paths;
pub mod samples;
pub mod spectral;

pub use analysis::{AnalysisOptions, MapAnalysis};
pub use error::{Error, Result};
pub use graph_map::GraphMap;
pub use paths::{Circuit, EdgeId, EdgePath, MarkedGraph, OrientedEdge, VertexId};
