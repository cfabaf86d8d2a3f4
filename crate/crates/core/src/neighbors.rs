//! Constrained breadth-first search from the seeds.
//!
//! All seeds are explored together, one level at a time. The frontier of a
//! level maps each vertex to the seeds whose shortest distance to it is
//! exactly that level, so per-seed distances fall out of the level maps.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;

use crate::canonical::{CanonicalGraph, VertexId};
use crate::config::MiningConfig;
use crate::error::{Error, Result};
use crate::ontology::{ClassId, ClassMask, OntologyIndex};
use crate::pathfeat::Direction;
use crate::symbols::SymbolId;

/// Set of seed ordinals.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportSet {
    bits: Box<[u64]>,
}

impl SupportSet {
    pub fn empty(n_seeds: usize) -> Self {
        SupportSet {
            bits: vec![0; n_seeds.div_ceil(64)].into_boxed_slice(),
        }
    }

    pub fn singleton(n_seeds: usize, ordinal: usize) -> Self {
        let mut s = Self::empty(n_seeds);
        s.insert(ordinal);
        s
    }

    pub fn from_ordinals(n_seeds: usize, ordinals: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n_seeds);
        for o in ordinals {
            s.insert(o);
        }
        s
    }

    #[inline]
    pub fn insert(&mut self, ordinal: usize) {
        self.bits[ordinal / 64] |= 1 << (ordinal % 64);
    }

    #[inline]
    pub fn remove(&mut self, ordinal: usize) {
        self.bits[ordinal / 64] &= !(1 << (ordinal % 64));
    }

    #[inline]
    pub fn contains(&self, ordinal: usize) -> bool {
        self.bits
            .get(ordinal / 64)
            .is_some_and(|w| w & (1 << (ordinal % 64)) != 0)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|w| *w == 0)
    }

    pub fn union_with(&mut self, other: &SupportSet) {
        for (a, b) in self.bits.iter_mut().zip(other.bits.iter()) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &SupportSet) {
        for (a, b) in self.bits.iter_mut().zip(other.bits.iter()) {
            *a &= b;
        }
    }

    /// `self \ other`.
    pub fn difference(&self, other: &SupportSet) -> SupportSet {
        SupportSet {
            bits: self
                .bits
                .iter()
                .zip(other.bits.iter())
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    pub fn intersects(&self, other: &SupportSet) -> bool {
        self.bits
            .iter()
            .zip(other.bits.iter())
            .any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.bits
            .iter()
            .zip(other.bits.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
        })
    }
}

impl fmt::Debug for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Blacklists and hub flags resolved against one graph.
#[derive(Clone, Debug)]
pub struct Constraints {
    pred_blocked: Vec<bool>,
    exp_blocked: Vec<bool>,
    hub: Vec<bool>,
    degree: Vec<usize>,
    pub gen_mask: ClassMask,
    pub exp_mask: ClassMask,
    pub u: bool,
}

impl Constraints {
    pub fn resolve(g: &CanonicalGraph, ont: &OntologyIndex, cfg: &MiningConfig) -> Self {
        let pred_blocked: Vec<bool> = g
            .predicates()
            .iter()
            .map(|(_, uri)| cfg.b_predicates.matches(uri))
            .collect();
        let exp_mask = ClassMask::from_patterns(g, &cfg.b_exp_types);
        let gen_mask = ClassMask::from_patterns(g, &cfg.b_gen_types);
        let exp_blocked = ont.blacklisted_instances(&exp_mask);
        let degree: Vec<usize> = g
            .vertices()
            .map(|v| degree_with(g, v, &pred_blocked, cfg.u))
            .collect();
        let hub = degree.iter().map(|&n| cfg.d.exceeded_by(n)).collect();
        Constraints {
            pred_blocked,
            exp_blocked,
            hub,
            degree,
            gen_mask,
            exp_mask,
            u: cfg.u,
        }
    }

    #[inline]
    pub fn predicate_blocked(&self, p: SymbolId) -> bool {
        self.pred_blocked[p.index()]
    }

    #[inline]
    pub fn exp_blocked(&self, v: VertexId) -> bool {
        self.exp_blocked[v.index()]
    }

    #[inline]
    pub fn is_hub(&self, v: VertexId) -> bool {
        self.hub[v.index()]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.degree[v.index()]
    }

    /// Arcs that may be followed out of `v`, ignoring the hub rule.
    pub fn steps<'g>(
        &'g self,
        g: &'g CanonicalGraph,
        v: VertexId,
    ) -> impl Iterator<Item = (SymbolId, Direction, VertexId)> + 'g {
        let fwd = g
            .out_arcs(v)
            .iter()
            .map(|&(p, w)| (p, Direction::Forward, w));
        let bwd = g
            .in_arcs(v)
            .iter()
            .take(if self.u { usize::MAX } else { 0 })
            .map(|&(p, w)| (p, Direction::Backward, w));
        fwd.chain(bwd)
            .filter(move |&(p, _, w)| !self.pred_blocked[p.index()] && !self.exp_blocked[w.index()])
    }
}

fn degree_with(g: &CanonicalGraph, v: VertexId, pred_blocked: &[bool], u: bool) -> usize {
    let count = |arcs: &[(SymbolId, VertexId)]| {
        arcs.iter()
            .filter(|(p, _)| !pred_blocked[p.index()])
            .count()
    };
    let mut n = count(g.out_arcs(v));
    if u {
        n += count(g.in_arcs(v));
    }
    n
}

/// Degree used by the hub rule: arcs with a blacklisted predicate are not
/// counted, arcs to instances of `b_exp_types` classes are.
pub fn effective_degree(g: &CanonicalGraph, v: VertexId, cfg: &MiningConfig) -> usize {
    let pred_blocked: Vec<bool> = g
        .predicates()
        .iter()
        .map(|(_, uri)| cfg.b_predicates.matches(uri))
        .collect();
    degree_with(g, v, &pred_blocked, cfg.u)
}

#[derive(Clone, Debug)]
pub struct NeighborhoodResult {
    /// Seed vertices in ordinal order.
    pub seeds: Vec<VertexId>,
    pub support: HashMap<VertexId, SupportSet>,
    /// `levels[h][v]`: seeds whose shortest distance to `v` is `h`. Level 0
    /// holds each seed alone.
    pub levels: Vec<HashMap<VertexId, SupportSet>>,
    /// Reached vertices (and seeds) whose effective degree exceeds `d`.
    pub hubs: Vec<VertexId>,
    pub interesting_neighbors: Vec<VertexId>,
    pub interesting_types: BTreeMap<ClassId, SupportSet>,
    /// Classes instantiated by some reached vertex, before `l_min`.
    pub instantiated_types: usize,
    pub constraints: Constraints,
}

impl NeighborhoodResult {
    pub fn seed_count(&self) -> usize {
        self.seeds.len()
    }

    pub fn support_of(&self, v: VertexId) -> Option<&SupportSet> {
        self.support.get(&v)
    }

    /// Reached vertices sorted by id.
    pub fn reached(&self) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = self.support.keys().copied().collect();
        out.sort_unstable();
        out
    }

    pub fn seeds_at_distance(&self, v: VertexId, h: usize) -> Option<&SupportSet> {
        self.levels.get(h).and_then(|l| l.get(&v))
    }

    pub fn distance(&self, seed_ordinal: usize, v: VertexId) -> Option<usize> {
        (1..self.levels.len()).find(|&h| {
            self.seeds_at_distance(v, h)
                .is_some_and(|s| s.contains(seed_ordinal))
        })
    }

    pub fn is_interesting_type(&self, c: ClassId) -> bool {
        self.interesting_types.contains_key(&c)
    }
}

pub fn mine_neighbors(
    g: &CanonicalGraph,
    ont: &OntologyIndex,
    cfg: &MiningConfig,
) -> Result<NeighborhoodResult> {
    if cfg.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if cfg.l_max.exceeded_by(cfg.l_min) {
        return Err(Error::Config(format!(
            "l_min ({}) exceeds l_max ({})",
            cfg.l_min, cfg.l_max
        )));
    }
    let seeds = g.seeds().to_vec();
    if seeds.is_empty() {
        return Err(Error::InvalidInput("no seed vertex in the graph".into()));
    }
    let n = seeds.len();
    let constraints = Constraints::resolve(g, ont, cfg);

    let mut visited: HashMap<VertexId, SupportSet> = HashMap::new();
    let mut level0: HashMap<VertexId, SupportSet> = HashMap::new();
    for (i, &s) in seeds.iter().enumerate() {
        level0.insert(s, SupportSet::singleton(n, i));
    }
    for (&s, set) in &level0 {
        visited.insert(s, set.clone());
    }
    let mut levels = vec![level0];
    for h in 1..=cfg.k {
        let frontier: Vec<(&VertexId, &SupportSet)> = levels[h - 1]
            .iter()
            .filter(|(v, _)| h == 1 || !constraints.is_hub(**v))
            .collect();
        let visited_ref = &visited;
        let constraints_ref = &constraints;
        let next: HashMap<VertexId, SupportSet> = frontier
            .par_iter()
            .fold(
                HashMap::new,
                |mut acc: HashMap<VertexId, SupportSet>, &(&v, from)| {
                    for (_, _, w) in constraints_ref.steps(g, v) {
                        let fresh = match visited_ref.get(&w) {
                            Some(seen) => from.difference(seen),
                            None => from.clone(),
                        };
                        if fresh.is_empty() {
                            continue;
                        }
                        acc.entry(w)
                            .and_modify(|s| s.union_with(&fresh))
                            .or_insert(fresh);
                    }
                    acc
                },
            )
            .reduce(HashMap::new, merge_maps);
        if next.is_empty() {
            break;
        }
        for (&w, set) in &next {
            visited
                .entry(w)
                .and_modify(|s| s.union_with(set))
                .or_insert_with(|| set.clone());
        }
        levels.push(next);
    }

    let mut support: HashMap<VertexId, SupportSet> = HashMap::new();
    for level in &levels[1..] {
        for (&v, set) in level {
            support
                .entry(v)
                .and_modify(|s| s.union_with(set))
                .or_insert_with(|| set.clone());
        }
    }

    let mut hubs: Vec<VertexId> = support
        .keys()
        .chain(seeds.iter())
        .copied()
        .filter(|&v| constraints.is_hub(v))
        .collect();
    hubs.sort_unstable();
    hubs.dedup();

    let mut interesting_neighbors: Vec<VertexId> = support
        .iter()
        .filter(|(_, s)| {
            let c = s.count();
            c >= cfg.l_min && !cfg.l_max.exceeded_by(c)
        })
        .map(|(v, _)| *v)
        .collect();
    interesting_neighbors.sort_unstable();

    let mut result = NeighborhoodResult {
        seeds,
        support,
        levels,
        hubs,
        interesting_neighbors,
        interesting_types: BTreeMap::new(),
        instantiated_types: 0,
        constraints,
    };
    let mut types = type_supports(&result, ont, cfg);
    result.instantiated_types = types.len();
    types.retain(|_, s| s.count() >= cfg.l_min);
    result.interesting_types = types;
    Ok(result)
}

fn merge_maps(
    mut a: HashMap<VertexId, SupportSet>,
    b: HashMap<VertexId, SupportSet>,
) -> HashMap<VertexId, SupportSet> {
    if a.len() < b.len() {
        return merge_maps(b, a);
    }
    for (v, set) in b {
        a.entry(v).and_modify(|s| s.union_with(&set)).or_insert(set);
    }
    a
}

/// Support of every class instantiated by a reached vertex, keeping classes
/// whose support reaches `l_min`. The union runs over all reached vertices,
/// not only the interesting ones.
pub fn interesting_types(
    result: &NeighborhoodResult,
    ont: &OntologyIndex,
    cfg: &MiningConfig,
) -> BTreeMap<ClassId, SupportSet> {
    let mut acc = type_supports(result, ont, cfg);
    acc.retain(|_, s| s.count() >= cfg.l_min);
    acc
}

fn type_supports(
    result: &NeighborhoodResult,
    ont: &OntologyIndex,
    cfg: &MiningConfig,
) -> BTreeMap<ClassId, SupportSet> {
    let mut acc: BTreeMap<ClassId, SupportSet> = BTreeMap::new();
    for (&v, set) in &result.support {
        for c in ont.generalizations(v, cfg.t, &result.constraints.gen_mask) {
            acc.entry(c)
                .and_modify(|s| s.union_with(set))
                .or_insert_with(|| set.clone());
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::UriPatterns;
    use crate::fixtures::Fig1;

    fn names(f: &Fig1, vs: impl IntoIterator<Item = VertexId>) -> Vec<String> {
        let mut out: Vec<String> = vs.into_iter().map(|v| f.short(v).to_string()).collect();
        out.sort();
        out
    }

    fn seeds(f: &Fig1, s: &SupportSet) -> Vec<String> {
        names(f, s.iter().map(|i| f.graph.seeds()[i]))
    }

    #[test]
    fn support_set_ops() {
        let a = SupportSet::from_ordinals(130, [0, 64, 129]);
        let b = SupportSet::from_ordinals(130, [64]);
        assert_eq!(a.count(), 3);
        assert!(b.is_subset(&a));
        assert!(!a.is_subset(&b));
        assert_eq!(a.difference(&b).iter().collect::<Vec<_>>(), vec![0, 129]);
        assert!(a.intersects(&b));
        assert!(!a.contains(63));
        assert!(SupportSet::empty(3).is_empty());
    }

    #[test]
    fn fig1_neighbors() {
        let f = Fig1::new();
        let res = mine_neighbors(&f.graph, &f.ont, &Fig1::config()).unwrap();
        assert_eq!(
            names(&f, res.reached()),
            ["v1", "v2", "v3", "v4", "v5", "v6", "v8", "v9"]
        );
        assert_eq!(names(&f, res.interesting_neighbors.clone()), ["v1", "v6"]);
        assert_eq!(seeds(&f, res.support_of(f.v("v6")).unwrap()), ["n1", "n2"]);
        assert_eq!(seeds(&f, res.support_of(f.v("v3")).unwrap()), ["n1"]);
        assert_eq!(seeds(&f, res.support_of(f.v("v9")).unwrap()), ["n2"]);
        assert_eq!(names(&f, res.hubs.clone()), ["v1"]);
        assert_eq!(res.distance(0, f.v("v6")), Some(3));
    }

    #[test]
    fn fig1_exp_blacklist_and_k1() {
        let f = Fig1::new();
        let cfg = MiningConfig {
            b_exp_types: UriPatterns::new([Fig1::uri("T3")]),
            ..Fig1::config()
        };
        let res = mine_neighbors(&f.graph, &f.ont, &cfg).unwrap();
        assert_eq!(names(&f, res.reached()), ["v1", "v2", "v4", "v8", "v9"]);
        let cfg = MiningConfig {
            k: 1,
            ..Fig1::config()
        };
        let res = mine_neighbors(&f.graph, &f.ont, &cfg).unwrap();
        assert_eq!(names(&f, res.reached()), ["v1", "v2", "v4", "v8", "v9"]);
    }

    #[test]
    fn fig1_degree() {
        let f = Fig1::new();
        assert_eq!(effective_degree(&f.graph, f.v("v1"), &Fig1::config()), 5);
        assert_eq!(effective_degree(&f.graph, f.v("v8"), &Fig1::config()), 0);
    }

    #[test]
    fn fig1_interesting_types() {
        let f = Fig1::new();
        let res = mine_neighbors(&f.graph, &f.ont, &Fig1::config()).unwrap();
        let got: Vec<String> = res
            .interesting_types
            .keys()
            .map(|c| {
                c.vertex()
                    .map_or("⊤".to_string(), |v| f.short(v).to_string())
            })
            .collect();
        let mut got = got;
        got.sort();
        assert_eq!(got, ["T1", "T3", "T5", "T6", "⊤"]);
        assert_eq!(seeds(&f, &res.interesting_types[&f.c("T1")]), ["n1", "n2"]);
    }

    #[test]
    fn rejects_k0() {
        let f = Fig1::new();
        let cfg = MiningConfig {
            k: 0,
            ..Fig1::config()
        };
        assert!(matches!(
            mine_neighbors(&f.graph, &f.ont, &cfg),
            Err(Error::Config(_))
        ));
    }
}
