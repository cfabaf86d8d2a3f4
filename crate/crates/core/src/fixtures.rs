//! The running example graph (two seeds, six classes, one hub), bundled so
//! tests, benches and the CLI smoke tests share one encoding.

use std::path::Path;

use crate::canonical::{canonicalize, CanonicalGraph, VertexId, WellKnown};
use crate::config::{Limit, MiningConfig};
use crate::ingest::{parse_seed_list, read_triples};
use crate::ontology::{ClassId, OntologyIndex};

pub const FIG1_NT: &str = include_str!("../tests/fixtures/fig1.nt");
pub const FIG1_SEEDS: &str = include_str!("../tests/fixtures/fig1.seeds");
pub const FIG1_NS: &str = "http://example.org/fig1/";

pub struct Fig1 {
    pub graph: CanonicalGraph,
    pub ont: OntologyIndex,
    pub well_known: WellKnown,
}

impl Fig1 {
    pub fn new() -> Self {
        let origin = Path::new("fig1.nt");
        let raw = read_triples(FIG1_NT.as_bytes(), origin).expect("fixture parses");
        let cfg = MiningConfig::default();
        let well_known = WellKnown::resolve(
            &raw.vocab,
            &cfg.sameas_uri,
            &cfg.type_uri,
            &cfg.subclass_of_uri,
        );
        let seeds =
            parse_seed_list(FIG1_SEEDS, &raw.vocab, Path::new("fig1.seeds")).expect("seeds parse");
        let graph = canonicalize(raw, &well_known, &seeds.ids).expect("fixture canonicalizes");
        let ont = OntologyIndex::build(&graph, &well_known);
        Fig1 {
            graph,
            ont,
            well_known,
        }
    }

    /// Parameters of the worked example: k=3, t=2, d=4, l_min=2, l_max=3.
    pub fn config() -> MiningConfig {
        MiningConfig {
            k: 3,
            t: 2,
            d: Limit::Finite(4),
            l_min: 2,
            l_max: Limit::Finite(3),
            ..MiningConfig::default()
        }
    }

    pub fn uri(name: &str) -> String {
        format!("{FIG1_NS}{name}")
    }

    pub fn v(&self, name: &str) -> VertexId {
        self.graph
            .vertex_by_uri(&Self::uri(name))
            .unwrap_or_else(|| panic!("no vertex {name} in the fixture"))
    }

    pub fn c(&self, name: &str) -> ClassId {
        ClassId::named(self.v(name))
    }

    pub fn p(&self, name: &str) -> crate::symbols::SymbolId {
        self.graph
            .predicates()
            .get(&Self::uri(name))
            .unwrap_or_else(|| panic!("no predicate {name} in the fixture"))
    }

    /// Short fixture name of a vertex (`v3`, `T1`, ...).
    pub fn short(&self, v: VertexId) -> &str {
        let label = self.graph.canonical_label(v).unwrap_or_default();
        label.strip_prefix(FIG1_NS).unwrap_or(label)
    }
}

impl Default for Fig1 {
    fn default() -> Self {
        Self::new()
    }
}
