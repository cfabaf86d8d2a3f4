//! `owl:sameAs` contraction.
//!
//! Raw vertices connected through sameAs arcs (in either direction) collapse
//! into one canonical vertex. Canonical ids are dense and ordered by the
//! smallest raw id of each component.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::ingest::{IngestCounts, RawArc, RawGraph};
use crate::symbols::{SymbolId, SymbolTable, Vocabulary};

/// Canonical vertex index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Predicate ids of the vocabulary the pipeline treats specially. A `None`
/// means the predicate never occurs in the input.
#[derive(Clone, Copy, Debug, Default)]
pub struct WellKnown {
    pub sameas: Option<SymbolId>,
    pub rdf_type: Option<SymbolId>,
    pub subclass_of: Option<SymbolId>,
}

impl WellKnown {
    pub fn resolve(vocab: &Vocabulary, sameas: &str, rdf_type: &str, subclass_of: &str) -> Self {
        WellKnown {
            sameas: vocab.predicates.get(sameas),
            rdf_type: vocab.predicates.get(rdf_type),
            subclass_of: vocab.predicates.get(subclass_of),
        }
    }
}

/// Disjoint-set forest with union by rank and path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
    unions: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            unions: 0,
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// Returns `true` when two distinct sets were merged.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.rank[ra as usize] < self.rank[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        if self.rank[ra as usize] == self.rank[rb as usize] {
            self.rank[ra as usize] += 1;
        }
        self.unions += 1;
        true
    }

    pub fn unions(&self) -> usize {
        self.unions
    }
}

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct CanonicalReport {
    pub raw_vertices: usize,
    pub canonical_vertices: usize,
    pub unions: usize,
    pub sameas_arcs: usize,
    pub canonical_arcs: usize,
    /// Groups of raw seed URIs that became a single canonical seed.
    pub merged_seeds: Vec<Vec<String>>,
    /// Components that merged a class with a non-class vertex.
    pub class_individual_merges: Vec<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct CanonicalGraph {
    vocab: Vocabulary,
    lambda: Vec<VertexId>,
    members: Vec<Vec<SymbolId>>,
    labels: Vec<SymbolId>,
    out_adj: Vec<Vec<(SymbolId, VertexId)>>,
    in_adj: Vec<Vec<(SymbolId, VertexId)>>,
    arc_count: usize,
    seeds: Vec<VertexId>,
    pub ingest: IngestCounts,
    pub report: CanonicalReport,
}

pub fn canonicalize(
    raw: RawGraph,
    well_known: &WellKnown,
    seeds: &[SymbolId],
) -> Result<CanonicalGraph> {
    let n = raw.vertex_count();
    for s in seeds {
        if s.index() >= n {
            return Err(Error::NotFound(format!("seed vertex id {s}")));
        }
    }

    let mut uf = UnionFind::new(n);
    let mut sameas_arcs = 0;
    for a in &raw.arcs {
        if Some(a.predicate) == well_known.sameas {
            sameas_arcs += 1;
            uf.union(a.source.0, a.target.0);
        }
    }

    let mut root_to_canon: HashMap<u32, VertexId> = HashMap::new();
    let mut lambda = Vec::with_capacity(n);
    let mut members: Vec<Vec<SymbolId>> = Vec::new();
    for raw_id in 0..n as u32 {
        let root = uf.find(raw_id);
        let next = VertexId(root_to_canon.len() as u32);
        let c = *root_to_canon.entry(root).or_insert(next);
        if c == next {
            members.push(Vec::new());
        }
        members[c.index()].push(SymbolId(raw_id));
        lambda.push(c);
    }

    let vertex_table = &raw.vocab.vertices;
    let labels: Vec<SymbolId> = members
        .iter()
        .map(|m| {
            *m.iter()
                .min_by_key(|id| vertex_table.resolve(**id).unwrap_or_default())
                .expect("component without members")
        })
        .collect();

    let m = members.len();
    let mut out_adj = vec![Vec::new(); m];
    let mut in_adj = vec![Vec::new(); m];
    let mut seen = HashSet::new();
    for a in &raw.arcs {
        if Some(a.predicate) == well_known.sameas {
            continue;
        }
        let (s, t) = (lambda[a.source.index()], lambda[a.target.index()]);
        if seen.insert((s, a.predicate, t)) {
            out_adj[s.index()].push((a.predicate, t));
            in_adj[t.index()].push((a.predicate, s));
        }
    }
    for adj in out_adj.iter_mut().chain(in_adj.iter_mut()) {
        adj.sort_unstable();
    }
    let arc_count = seen.len();

    let mut canon_seeds = Vec::new();
    let mut seed_members: HashMap<VertexId, Vec<SymbolId>> = HashMap::new();
    for &s in seeds {
        let c = lambda[s.index()];
        let group = seed_members.entry(c).or_default();
        if group.is_empty() {
            canon_seeds.push(c);
        }
        if !group.contains(&s) {
            group.push(s);
        }
    }
    let resolve = |id: &SymbolId| vertex_table.resolve(*id).unwrap_or_default().to_string();
    let merged_seeds: Vec<Vec<String>> = canon_seeds
        .iter()
        .filter_map(|c| {
            let g = &seed_members[c];
            (g.len() > 1).then(|| g.iter().map(resolve).collect())
        })
        .collect();

    let class_individual_merges = if sameas_arcs > 0 {
        let mut class_like = vec![false; n];
        for a in &raw.arcs {
            if Some(a.predicate) == well_known.rdf_type {
                class_like[a.target.index()] = true;
            } else if Some(a.predicate) == well_known.subclass_of {
                class_like[a.source.index()] = true;
                class_like[a.target.index()] = true;
            }
        }
        members
            .iter()
            .filter(|m| m.len() > 1)
            .filter(|m| {
                m.iter().any(|r| class_like[r.index()]) && m.iter().any(|r| !class_like[r.index()])
            })
            .map(|m| m.iter().map(resolve).collect::<Vec<String>>())
            .collect()
    } else {
        Vec::new()
    };
    for group in &class_individual_merges {
        log::warn!(
            "sameAs merges a class with an individual: {}",
            group.join(", ")
        );
    }

    let report = CanonicalReport {
        raw_vertices: n,
        canonical_vertices: m,
        unions: uf.unions(),
        sameas_arcs,
        canonical_arcs: arc_count,
        merged_seeds,
        class_individual_merges,
    };

    Ok(CanonicalGraph {
        vocab: raw.vocab,
        lambda,
        members,
        labels,
        out_adj,
        in_adj,
        arc_count,
        seeds: canon_seeds,
        ingest: raw.counts,
        report,
    })
}

impl CanonicalGraph {
    pub fn vertex_count(&self) -> usize {
        self.members.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arc_count
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_count() as u32).map(VertexId)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn predicates(&self) -> &SymbolTable {
        &self.vocab.predicates
    }

    pub fn lambda(&self, raw: SymbolId) -> Option<VertexId> {
        self.lambda.get(raw.index()).copied()
    }

    pub fn members(&self, v: VertexId) -> &[SymbolId] {
        &self.members[v.index()]
    }

    pub fn member_uris(&self, v: VertexId) -> impl Iterator<Item = &str> {
        self.members[v.index()]
            .iter()
            .map(|id| self.vocab.vertices.resolve(*id).unwrap_or_default())
    }

    /// Lexicographically smallest member URI.
    pub fn canonical_label(&self, v: VertexId) -> Result<&str> {
        let raw = self
            .labels
            .get(v.index())
            .ok_or_else(|| Error::NotFound(format!("canonical vertex {v}")))?;
        self.vocab.vertices.resolve(*raw)
    }

    pub(crate) fn label(&self, v: VertexId) -> &str {
        self.vocab
            .vertices
            .resolve(self.labels[v.index()])
            .unwrap_or_default()
    }

    /// Finds the canonical vertex of a raw URI.
    pub fn vertex_by_uri(&self, uri: &str) -> Option<VertexId> {
        self.vocab.vertices.get(uri).and_then(|id| self.lambda(id))
    }

    pub fn predicate_label(&self, p: SymbolId) -> &str {
        self.vocab.predicates.resolve(p).unwrap_or_default()
    }

    #[inline]
    pub fn out_arcs(&self, v: VertexId) -> &[(SymbolId, VertexId)] {
        &self.out_adj[v.index()]
    }

    #[inline]
    pub fn in_arcs(&self, v: VertexId) -> &[(SymbolId, VertexId)] {
        &self.in_adj[v.index()]
    }

    pub fn arcs(&self) -> impl Iterator<Item = (VertexId, SymbolId, VertexId)> + '_ {
        self.vertices()
            .flat_map(move |s| self.out_arcs(s).iter().map(move |&(p, t)| (s, p, t)))
    }

    pub fn seeds(&self) -> &[VertexId] {
        &self.seeds
    }

    /// Replaces the seed set, e.g. when seeds are defined by class membership.
    pub fn set_seeds(&mut self, seeds: Vec<VertexId>) {
        let mut seen = HashSet::new();
        self.seeds = seeds.into_iter().filter(|s| seen.insert(*s)).collect();
    }

    /// Re-expresses the canonical graph as a raw graph whose vertex ids equal
    /// the canonical ids and whose labels are the canonical labels.
    pub fn to_raw(&self) -> RawGraph {
        let mut vocab = Vocabulary {
            predicates: self.vocab.predicates.clone(),
            ..Vocabulary::default()
        };
        for v in self.vertices() {
            let id = vocab.vertices.intern(self.label(v)).expect("empty label");
            debug_assert_eq!(id.0, v.0);
        }
        let arcs: Vec<RawArc> = self
            .arcs()
            .map(|(s, p, t)| RawArc {
                source: SymbolId(s.0),
                predicate: p,
                target: SymbolId(t.0),
            })
            .collect();
        RawGraph {
            counts: IngestCounts {
                triples: arcs.len(),
                arcs: arcs.len(),
                ..IngestCounts::default()
            },
            vocab,
            arcs,
        }
    }

    /// Writes `canonical-id<TAB>member URIs (space separated)` lines.
    pub fn dump_members_tsv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        for v in self.vertices() {
            let mut uris: Vec<&str> = self.member_uris(v).collect();
            uris.sort_unstable();
            writeln!(out, "{}\t{}", v.0, uris.join(" "))?;
        }
        Ok(())
    }
}
