//! Brute-force reference miner for small graphs.
//!
//! Shares only the graph, the configuration and the atom types with the real
//! miner. Distances come from enumerating walks, class membership from naive
//! fixpoints over the raw arc list, and pattern candidates from enumerating
//! every generalization of every path, which are then checked one by one
//! against the selection rules.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::canonical::{CanonicalGraph, VertexId};
use crate::config::{MiningConfig, UriPatterns};
use crate::error::{Error, Result};
use crate::ontology::{ClassId, ClassMask, OntologyIndex};
use crate::pathfeat::{enumerate_generalizations, render_atoms, Atom, Direction, Element};
use crate::symbols::SymbolId;

/// Graphs above this size are refused: walk enumeration is exponential.
pub const ORACLE_MAX_VERTICES: usize = 200;

type Seeds = BTreeSet<usize>;

/// Feature sets keyed by rendered form, with supports as seed labels.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub neighbors: BTreeMap<String, BTreeSet<String>>,
    pub interesting_neighbors: BTreeSet<String>,
    pub interesting_types: BTreeSet<String>,
    pub features: BTreeMap<String, BTreeSet<String>>,
}

struct Naive<'a> {
    g: &'a CanonicalGraph,
    cfg: &'a MiningConfig,
    arcs: Vec<(VertexId, SymbolId, VertexId)>,
    types: Vec<(VertexId, VertexId)>,
    subs: Vec<(VertexId, VertexId)>,
    seeds: Vec<VertexId>,
}

fn matches(g: &CanonicalGraph, patterns: &UriPatterns, c: Option<VertexId>) -> bool {
    match c {
        None => patterns.matches_top(),
        Some(v) => g.member_uris(v).any(|u| patterns.matches(u)),
    }
}

impl<'a> Naive<'a> {
    fn new(g: &'a CanonicalGraph, cfg: &'a MiningConfig) -> Self {
        let ty = g.predicates().get(&cfg.type_uri);
        let sub = g.predicates().get(&cfg.subclass_of_uri);
        let arcs: Vec<_> = g.arcs().collect();
        let types = arcs
            .iter()
            .filter(|a| Some(a.1) == ty)
            .map(|a| (a.0, a.2))
            .collect();
        let subs = arcs
            .iter()
            .filter(|a| Some(a.1) == sub)
            .map(|a| (a.0, a.2))
            .collect();
        Naive {
            g,
            cfg,
            arcs,
            types,
            subs,
            seeds: g.seeds().to_vec(),
        }
    }

    fn supers_fixpoint(&self, mut set: BTreeSet<VertexId>, rounds: usize) -> BTreeSet<VertexId> {
        for _ in 0..rounds {
            let next: BTreeSet<VertexId> = set
                .iter()
                .copied()
                .chain(
                    self.subs
                        .iter()
                        .filter(|(a, _)| set.contains(a))
                        .map(|&(_, b)| b),
                )
                .collect();
            if next == set {
                break;
            }
            set = next;
        }
        set
    }

    fn direct_types(&self, v: VertexId) -> BTreeSet<VertexId> {
        self.types
            .iter()
            .filter(|(x, _)| *x == v)
            .map(|&(_, c)| c)
            .collect()
    }

    /// Named classes reached by one type arc and at most `t - 1` subClassOf
    /// arcs (`None` = any number).
    fn reach(&self, v: VertexId, t: Option<usize>) -> BTreeSet<VertexId> {
        match t {
            Some(0) => BTreeSet::new(),
            Some(t) => self.supers_fixpoint(self.direct_types(v), t - 1),
            None => self.supers_fixpoint(self.direct_types(v), self.g.vertex_count() + 1),
        }
    }

    /// Bounded generalizations of `v` that are not gen-blacklisted, with top
    /// as `None`.
    fn inst(&self, v: VertexId) -> BTreeSet<Option<VertexId>> {
        let mut out: BTreeSet<Option<VertexId>> = self
            .reach(v, Some(self.cfg.t))
            .into_iter()
            .map(Some)
            .collect();
        out.insert(None);
        out.retain(|&c| !matches(self.g, &self.cfg.b_gen_types, c));
        out
    }

    fn exp_blocked(&self, v: VertexId) -> bool {
        self.reach(v, None)
            .into_iter()
            .any(|c| matches(self.g, &self.cfg.b_exp_types, Some(c)))
    }

    fn pred_ok(&self, p: SymbolId) -> bool {
        !self.cfg.b_predicates.matches(self.g.predicate_label(p))
    }

    fn is_hub(&self, v: VertexId) -> bool {
        let deg = self
            .arcs
            .iter()
            .filter(|a| self.pred_ok(a.1) && (a.0 == v || (self.cfg.u && a.2 == v)))
            .map(|a| {
                if self.cfg.u && a.0 == v && a.2 == v {
                    2
                } else {
                    1
                }
            })
            .sum::<usize>();
        self.cfg.d.exceeded_by(deg)
    }

    fn steps(&self, v: VertexId) -> Vec<(SymbolId, Direction, VertexId)> {
        let mut out = Vec::new();
        for &(s, p, o) in &self.arcs {
            if !self.pred_ok(p) {
                continue;
            }
            if s == v && !self.exp_blocked(o) {
                out.push((p, Direction::Forward, o));
            }
            if self.cfg.u && o == v && !self.exp_blocked(s) {
                out.push((p, Direction::Backward, s));
            }
        }
        out
    }

    /// Shortest walk length from each seed, by walk enumeration.
    fn distances(&self) -> BTreeMap<(usize, VertexId), usize> {
        let mut dist = BTreeMap::new();
        for (i, &s) in self.seeds.iter().enumerate() {
            let mut walks: Vec<Vec<VertexId>> = vec![vec![s]];
            for len in 1..=self.cfg.k {
                let mut next = Vec::new();
                for w in &walks {
                    let x = *w.last().unwrap();
                    if len > 1 && self.is_hub(x) {
                        continue;
                    }
                    for (_, _, y) in self.steps(x) {
                        let mut w2 = w.clone();
                        w2.push(y);
                        next.push(w2);
                    }
                }
                for w in &next {
                    let y = *w.last().unwrap();
                    if y != s {
                        dist.entry((i, y)).or_insert(len);
                    }
                }
                // Walks of equal length ending at the same vertex continue
                // identically; keep one of each.
                let mut ends = BTreeSet::new();
                next.retain(|w| ends.insert(*w.last().unwrap()));
                walks = next;
            }
        }
        dist
    }

    fn class_le(&self, a: Option<VertexId>, b: Option<VertexId>) -> bool {
        match (a, b) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => self
                .supers_fixpoint(BTreeSet::from([a]), self.g.vertex_count() + 1)
                .contains(&b),
        }
    }

    fn element_le(&self, x: Element, y: Element) -> bool {
        match (x, y) {
            _ if x == y => true,
            (_, Element::Individual(_)) => false,
            (Element::Class(a), Element::Class(b)) => self.class_le(a.vertex(), b.vertex()),
            (Element::Individual(v), Element::Class(b)) => match b.vertex() {
                None => true,
                Some(b) => self.reach(v, None).contains(&b),
            },
        }
    }

    fn feature_le(&self, p: &[Atom], q: &[Atom]) -> bool {
        p.len() == q.len()
            && p.iter().zip(q).all(|(a, b)| {
                a.predicate == b.predicate
                    && a.direction == b.direction
                    && self.element_le(a.element, b.element)
            })
    }
}

fn class_id(c: Option<VertexId>) -> ClassId {
    c.map_or(ClassId::TOP, ClassId::named)
}

/// Runs the reference construction on the seeds of `g`.
pub fn oracle_mine(
    g: &CanonicalGraph,
    ont: &OntologyIndex,
    cfg: &MiningConfig,
) -> Result<OracleResult> {
    if g.vertex_count() > ORACLE_MAX_VERTICES {
        return Err(Error::InvalidInput(format!(
            "the oracle handles at most {ORACLE_MAX_VERTICES} vertices, the graph has {}",
            g.vertex_count()
        )));
    }
    cfg.check()?;
    let nv = Naive::new(g, cfg);
    let label = |v: VertexId| g.canonical_label(v).unwrap_or_default().to_string();
    let seed_labels = |s: &Seeds| {
        s.iter()
            .map(|&i| label(nv.seeds[i]))
            .collect::<BTreeSet<_>>()
    };
    let seed_of: BTreeMap<VertexId, usize> =
        nv.seeds.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut out = OracleResult::default();
    if nv.seeds.is_empty() {
        return Err(Error::InvalidInput("no seed vertex in the graph".into()));
    }

    let dist = nv.distances();
    let mut support: BTreeMap<VertexId, Seeds> = BTreeMap::new();
    for &(i, v) in dist.keys() {
        support.entry(v).or_default().insert(i);
    }
    let in_bounds = |s: &Seeds| s.len() >= cfg.l_min && !cfg.l_max.exceeded_by(s.len());
    for (&v, s) in &support {
        out.neighbors.insert(label(v), seed_labels(s));
        if in_bounds(s) {
            out.interesting_neighbors.insert(label(v));
        }
    }

    let mut type_support: BTreeMap<Option<VertexId>, Seeds> = BTreeMap::new();
    for (&v, s) in &support {
        for c in nv.inst(v) {
            type_support.entry(c).or_default().extend(s.iter().copied());
        }
    }
    type_support.retain(|_, s| s.len() >= cfg.l_min);
    let interesting: BTreeSet<Option<VertexId>> = type_support.keys().copied().collect();
    for c in &interesting {
        out.interesting_types
            .insert(c.map_or("⊤".to_string(), label));
    }
    if cfg.l_min > nv.seeds.len() {
        return Ok(out);
    }

    let top_mask_free = ClassMask::from_patterns(g, &cfg.b_gen_types);
    let mut paths: Vec<(Vec<Atom>, VertexId, Seeds)> = Vec::new();
    let mut survivors_prev: BTreeMap<Vec<Atom>, BTreeSet<Vec<Atom>>> = BTreeMap::new();
    let mut selected: BTreeMap<Vec<Atom>, Seeds> = BTreeMap::new();

    for h in 1..=cfg.k {
        // Expanded paths of length h.
        let mut expanded: BTreeMap<Vec<Atom>, (VertexId, Seeds)> = BTreeMap::new();
        let origins: Vec<(Vec<Atom>, VertexId, Seeds)> = if h == 1 {
            nv.seeds
                .iter()
                .enumerate()
                .map(|(i, &s)| (Vec::new(), s, Seeds::from([i])))
                .collect()
        } else {
            std::mem::take(&mut paths)
        };
        for (prefix, x, supp) in &origins {
            if h > 1 && nv.is_hub(*x) {
                continue;
            }
            for (p, dir, y) in nv.steps(*x) {
                if !supp.iter().any(|&s| dist.get(&(s, y)) == Some(&h)) {
                    continue;
                }
                let mut s2 = supp.clone();
                if let Some(o) = seed_of.get(&y) {
                    s2.remove(o);
                }
                if s2.is_empty() {
                    continue;
                }
                let mut atoms = prefix.clone();
                atoms.push(Atom::new(p, dir, Element::Individual(y)));
                expanded
                    .entry(atoms)
                    .or_insert((y, Seeds::new()))
                    .1
                    .extend(s2);
            }
        }

        // Every admissible generalization of every expanded path.
        let mut captures: BTreeMap<Vec<Atom>, BTreeSet<Vec<Atom>>> = BTreeMap::new();
        for r in expanded.keys() {
            let options: Vec<Vec<Element>> = r
                .iter()
                .map(|a| {
                    let Element::Individual(v) = a.element else {
                        unreachable!()
                    };
                    let mut o = vec![a.element];
                    o.extend(nv.inst(v).into_iter().map(|c| Element::Class(class_id(c))));
                    o
                })
                .collect();
            let mut product: Vec<Vec<Atom>> = vec![Vec::new()];
            for (a, opts) in r.iter().zip(&options) {
                product = product
                    .into_iter()
                    .flat_map(|pre| {
                        opts.iter().map(move |&e| {
                            let mut q = pre.clone();
                            q.push(a.with_element(e));
                            q
                        })
                    })
                    .collect();
            }
            product.retain(|q| q != r);
            let mut lib = enumerate_generalizations(r, ont, cfg.t, &top_mask_free);
            lib.sort();
            let mut mine = product.clone();
            mine.sort();
            if lib != mine {
                return Err(Error::Invariant(format!(
                    "generalization enumeration disagrees with the naive product for {}",
                    render_atoms(r, g)
                )));
            }
            for q in product {
                let only_interesting = q.iter().all(|a| match a.element {
                    Element::Class(c) => interesting.contains(&c.vertex()),
                    Element::Individual(_) => true,
                });
                if !only_interesting {
                    continue;
                }
                let (qp, rp) = (&q[..h - 1], &r[..h - 1]);
                let eligible = qp == rp
                    || survivors_prev
                        .get(qp)
                        .is_some_and(|captured| captured.contains(rp));
                if eligible {
                    captures.entry(q).or_default().insert(r.clone());
                }
            }
        }

        let supp_of = |caps: &BTreeSet<Vec<Atom>>| -> Seeds {
            caps.iter()
                .flat_map(|r| expanded[r].1.iter().copied())
                .collect()
        };
        let candidates: Vec<(Vec<Atom>, Seeds)> = captures
            .iter()
            .filter(|(_, caps)| caps.len() > 1)
            .map(|(q, caps)| (q.clone(), supp_of(caps)))
            .collect();
        let retained: Vec<&(Vec<Atom>, Seeds)> = candidates
            .iter()
            .filter(|(q, s)| {
                !candidates
                    .iter()
                    .any(|(q2, s2)| s2 == s && nv.feature_le(q2, q) && !nv.feature_le(q, q2))
            })
            .collect();
        let survivors: Vec<&(Vec<Atom>, Seeds)> = retained
            .into_iter()
            .filter(|(_, s)| s.len() >= cfg.l_min)
            .collect();

        // Selection against the features of earlier iterations.
        let mut additions: Vec<(Vec<Atom>, Seeds, Vec<Vec<Atom>>)> = Vec::new();
        let c2 = |x: &[Atom], s: &Seeds| -> Option<Vec<Vec<Atom>>> {
            let mut replaced = Vec::new();
            for len in 1..x.len() {
                let pre = &x[..len];
                if selected.get(pre) == Some(s) {
                    if pre[len - 1].element.is_class() {
                        replaced.push(pre.to_vec());
                    } else {
                        return None;
                    }
                }
            }
            Some(replaced)
        };
        for (r, (_, s)) in &expanded {
            if in_bounds(s) {
                if let Some(rep) = c2(r, s) {
                    additions.push((r.clone(), s.clone(), rep));
                }
            }
        }
        for (q, s) in &survivors {
            if !in_bounds(s) || captures[q].iter().any(|r| &expanded[r].1 == s) {
                continue;
            }
            if let Some(rep) = c2(q, s) {
                additions.push((q.clone(), s.clone(), rep));
            }
        }
        for (x, s, rep) in additions {
            for r in rep {
                selected.remove(&r);
            }
            selected.insert(x, s);
        }

        survivors_prev = survivors
            .iter()
            .map(|(q, _)| (q.clone(), captures[q].clone()))
            .collect();
        paths = expanded
            .iter()
            .filter(|(r, (_, s))| {
                s.len() >= cfg.l_min || survivors_prev.values().any(|caps| caps.contains(*r))
            })
            .map(|(r, (y, s))| (r.clone(), *y, s.clone()))
            .collect();
        if paths.is_empty() {
            break;
        }
    }

    for (x, s) in &selected {
        out.features.insert(render_atoms(x, g), seed_labels(s));
    }
    Ok(out)
}

/// Miner output in the same shape as [`OracleResult`].
pub fn miner_as_oracle_result(
    g: &CanonicalGraph,
    nres: &crate::neighbors::NeighborhoodResult,
    paths: &crate::pathmine::PathMiningResult,
) -> OracleResult {
    let label = |v: VertexId| g.canonical_label(v).unwrap_or_default().to_string();
    let seeds = |s: &crate::neighbors::SupportSet| {
        s.iter()
            .map(|i| label(nres.seeds[i]))
            .collect::<BTreeSet<_>>()
    };
    OracleResult {
        neighbors: nres
            .support
            .iter()
            .map(|(&v, s)| (label(v), seeds(s)))
            .collect(),
        interesting_neighbors: nres
            .interesting_neighbors
            .iter()
            .map(|&v| label(v))
            .collect(),
        interesting_types: nres
            .interesting_types
            .keys()
            .map(|c| c.vertex().map_or("⊤".to_string(), label))
            .collect(),
        features: paths
            .features
            .iter()
            .map(|&id| (paths.table.render(id, g), seeds(paths.support(id))))
            .collect(),
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct OracleComparison {
    pub agree: bool,
    pub only_miner: Vec<String>,
    pub only_oracle: Vec<String>,
    pub neighbors_agree: bool,
    pub types_agree: bool,
}

pub fn compare(miner: &OracleResult, oracle: &OracleResult) -> OracleComparison {
    let fmt = |(k, v): (&String, &BTreeSet<String>)| format!("{k} {v:?}");
    let m: BTreeSet<String> = miner.features.iter().map(fmt).collect();
    let o: BTreeSet<String> = oracle.features.iter().map(fmt).collect();
    let neighbors_agree = miner.neighbors == oracle.neighbors
        && miner.interesting_neighbors == oracle.interesting_neighbors;
    let types_agree = miner.interesting_types == oracle.interesting_types;
    OracleComparison {
        agree: m == o && neighbors_agree && types_agree,
        only_miner: m.difference(&o).cloned().collect(),
        only_oracle: o.difference(&m).cloned().collect(),
        neighbors_agree,
        types_agree,
    }
}
