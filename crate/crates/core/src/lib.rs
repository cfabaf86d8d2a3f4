//! Mining neighbor and path features around a set of seed vertices of an RDF
//! knowledge graph, with path patterns generalized along the class hierarchy.
//!
//! The pipeline runs ingest, sameAs canonicalization, neighbor mining, path
//! mining and matrix emission; [`pipeline::run_pipeline`] wires them together.

pub mod canonical;
pub mod config;
pub mod error;
pub mod features;
pub mod fixtures;
pub mod ingest;
pub mod neighbors;
pub mod ontology;
pub mod oracle;
pub mod pathfeat;
pub mod pathmine;
pub mod pipeline;
pub mod stats;
pub mod symbols;
pub mod synth;

pub use canonical::{canonicalize, CanonicalGraph, VertexId, WellKnown};
pub use config::{Limit, MiningConfig, UriPatterns};
pub use error::{Error, Result};
pub use features::FeatureMatrix;
pub use ingest::{load_seed_list, load_triples, RawGraph};
pub use neighbors::{mine_neighbors, NeighborhoodResult, SupportSet};
pub use ontology::{ClassId, ClassMask, OntologyIndex};
pub use pathfeat::{Atom, Direction, Element, FeatId, FeatureTable};
pub use pathmine::{mine_path_features, PathMiningResult};
pub use pipeline::{run_pipeline, RunReport};
pub use symbols::{SymbolId, SymbolTable, Vocabulary};
