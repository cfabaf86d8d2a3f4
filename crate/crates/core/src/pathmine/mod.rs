//! Iterative mining of paths and path patterns.
//!
//! Iteration h turns the paths of length h-1 kept from the previous round
//! into paths of length h, derives patterns from them and from the
//! surviving patterns that generalize their parents, keeps the most specific
//! pattern per support set and selects features. Supports never grow along
//! an expansion, so anything below `l_min` that no surviving pattern needs
//! is dropped for good.

mod prefix_tree;

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::canonical::{CanonicalGraph, VertexId};
use crate::config::MiningConfig;
use crate::error::{Error, Result};
use crate::neighbors::{NeighborhoodResult, SupportSet};
use crate::ontology::{ClassId, OntologyIndex};
use crate::pathfeat::{Atom, Element, FeatId, FeatureTable, Specificity};

pub use prefix_tree::{Insertion, PrefixTree};

#[derive(Clone, Copy, Debug, Default)]
pub struct MineOptions {
    /// Verify support bounds, support monotonicity and non-dominance of
    /// retained patterns while mining; a violation aborts with
    /// `Error::Invariant`.
    pub check_invariants: bool,
}

/// Counters of one iteration. The feature lists are kept for tests and
/// small runs; the report only serializes their sizes.
#[derive(Clone, Debug, Default, Serialize)]
pub struct IterationTrace {
    pub h: usize,
    pub paths_in: usize,
    pub expanded: usize,
    pub candidates: usize,
    pub discarded_single: usize,
    pub evicted: usize,
    pub survivors: usize,
    pub paths_out: usize,
    pub added_count: usize,
    pub replaced_count: usize,
    #[serde(skip)]
    pub added: Vec<FeatId>,
    /// (replaced prefix, replacing feature).
    #[serde(skip)]
    pub replaced: Vec<(FeatId, FeatId)>,
}

#[derive(Clone, Debug, Default)]
pub struct PathMiningResult {
    pub table: FeatureTable,
    /// Support of every interned feature, indexed by id.
    pub supports: Vec<SupportSet>,
    /// Selected features sorted by (length, rendered form).
    pub features: Vec<FeatId>,
    pub trace: Vec<IterationTrace>,
    /// Expanded paths plus candidate patterns over all iterations.
    pub generated: usize,
    pub warnings: Vec<String>,
}

impl PathMiningResult {
    pub fn support(&self, id: FeatId) -> &SupportSet {
        &self.supports[id.index()]
    }
}

struct PathState {
    id: FeatId,
    last: VertexId,
    support: SupportSet,
    generalizers: Vec<FeatId>,
}

struct Expanded {
    prefix: FeatId,
    atom: Atom,
    parent: usize,
    support: SupportSet,
}

struct Candidate {
    prefix: FeatId,
    atom: Atom,
    support: SupportSet,
    captured: Vec<u32>,
}

struct Miner<'a> {
    g: &'a CanonicalGraph,
    ont: &'a OntologyIndex,
    nres: &'a NeighborhoodResult,
    cfg: &'a MiningConfig,
    opts: MineOptions,
    spec: Specificity<'a>,
    seed_ordinal: HashMap<VertexId, usize>,
    gen_memo: HashMap<VertexId, Vec<ClassId>>,
    table: FeatureTable,
    supports: Vec<SupportSet>,
    selected: HashMap<FeatId, usize>,
}

pub fn mine_path_features(
    g: &CanonicalGraph,
    ont: &OntologyIndex,
    nres: &NeighborhoodResult,
    cfg: &MiningConfig,
) -> Result<PathMiningResult> {
    mine_path_features_with(g, ont, nres, cfg, MineOptions::default())
}

pub fn mine_path_features_with(
    g: &CanonicalGraph,
    ont: &OntologyIndex,
    nres: &NeighborhoodResult,
    cfg: &MiningConfig,
    opts: MineOptions,
) -> Result<PathMiningResult> {
    if cfg.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let n = nres.seed_count();
    if cfg.l_min > n {
        let msg = format!(
            "l_min ({}) exceeds the number of seeds ({n}); no path feature can be selected",
            cfg.l_min
        );
        log::warn!("{msg}");
        return Ok(PathMiningResult {
            warnings: vec![msg],
            ..Default::default()
        });
    }
    let miner = Miner {
        g,
        ont,
        nres,
        cfg,
        opts,
        spec: Specificity::new(ont),
        seed_ordinal: nres
            .seeds
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, i))
            .collect(),
        gen_memo: HashMap::new(),
        table: FeatureTable::new(),
        supports: Vec::new(),
        selected: HashMap::new(),
    };
    miner.run()
}

impl<'a> Miner<'a> {
    fn run(mut self) -> Result<PathMiningResult> {
        let n = self.nres.seed_count();
        let mut paths: Vec<PathState> = self
            .nres
            .seeds
            .iter()
            .enumerate()
            .map(|(i, &s)| PathState {
                id: FeatId::ROOT,
                last: s,
                support: SupportSet::singleton(n, i),
                generalizers: Vec::new(),
            })
            .collect();
        let mut trace = Vec::new();
        let mut generated = 0;
        for h in 1..=self.cfg.k {
            if paths.is_empty() {
                break;
            }
            let (next, it) = self.iterate(h, &paths)?;
            log::info!(
                "h={h}: {} paths, {} expanded, {} candidates, {} survivors, {} added",
                it.paths_in,
                it.expanded,
                it.candidates,
                it.survivors,
                it.added_count
            );
            generated += it.expanded + it.candidates;
            trace.push(it);
            paths = next;
        }

        let mut features: Vec<(usize, String, FeatId)> = self
            .selected
            .keys()
            .map(|&id| (self.table.length(id), self.table.render(id, self.g), id))
            .collect();
        features.sort();
        Ok(PathMiningResult {
            table: self.table,
            supports: self.supports,
            features: features.into_iter().map(|(_, _, id)| id).collect(),
            trace,
            generated,
            warnings: Vec::new(),
        })
    }

    fn intern(&mut self, prefix: FeatId, atom: Atom, support: &SupportSet) -> FeatId {
        let id = self.table.intern(prefix, atom);
        if id.index() == self.supports.len() {
            self.supports.push(support.clone());
        }
        id
    }

    fn atoms_of(&self, prefix: FeatId, atom: Atom) -> Vec<Atom> {
        let mut atoms = if prefix == FeatId::ROOT {
            Vec::new()
        } else {
            self.table.atoms(prefix)
        };
        atoms.push(atom);
        atoms
    }

    fn expand(&self, h: usize, paths: &[PathState]) -> Vec<Expanded> {
        let cons = &self.nres.constraints;
        let mut raw: Vec<Expanded> = paths
            .par_iter()
            .enumerate()
            .flat_map_iter(|(i, p)| {
                let expandable = h == 1 || !cons.is_hub(p.last);
                cons.steps(self.g, p.last)
                    .take(if expandable { usize::MAX } else { 0 })
                    .filter_map(move |(pred, dir, w)| {
                        let at_h = self.nres.seeds_at_distance(w, h)?;
                        if !at_h.intersects(&p.support) {
                            return None;
                        }
                        let mut support = p.support.clone();
                        if let Some(&o) = self.seed_ordinal.get(&w) {
                            support.remove(o);
                        }
                        (!support.is_empty()).then(|| Expanded {
                            prefix: p.id,
                            atom: Atom::new(pred, dir, Element::Individual(w)),
                            parent: i,
                            support,
                        })
                    })
            })
            .collect();
        raw.par_sort_unstable_by(|a, b| {
            (a.prefix, a.atom, a.parent).cmp(&(b.prefix, b.atom, b.parent))
        });
        let mut out: Vec<Expanded> = Vec::with_capacity(raw.len());
        for e in raw {
            match out.last_mut() {
                Some(last) if last.prefix == e.prefix && last.atom == e.atom => {
                    last.support.union_with(&e.support)
                }
                _ => out.push(e),
            }
        }
        out
    }

    fn fill_gen_memo(&mut self, expanded: &[Expanded]) {
        let fresh: HashSet<VertexId> = expanded
            .iter()
            .filter_map(|e| match e.atom.element {
                Element::Individual(v) if !self.gen_memo.contains_key(&v) => Some(v),
                _ => None,
            })
            .collect();
        let (ont, nres, t) = (self.ont, self.nres, self.cfg.t);
        let computed: Vec<(VertexId, Vec<ClassId>)> = fresh
            .into_par_iter()
            .map(|v| {
                let mut gens = ont.generalizations(v, t, &nres.constraints.gen_mask);
                gens.retain(|c| nres.is_interesting_type(*c));
                (v, gens)
            })
            .collect();
        self.gen_memo.extend(computed);
    }

    fn generate(&self, paths: &[PathState], expanded: &[Expanded]) -> Vec<Candidate> {
        let mut emitted: Vec<(FeatId, Atom, u32)> = expanded
            .par_iter()
            .enumerate()
            .flat_map_iter(|(i, e)| {
                let Element::Individual(v) = e.atom.element else {
                    unreachable!("expanded paths end with individuals")
                };
                let types = &self.gen_memo[&v];
                let gens = &paths[e.parent].generalizers;
                let mut out = Vec::with_capacity(types.len() * (1 + gens.len()) + gens.len());
                for &c in types {
                    out.push((e.prefix, e.atom.with_element(Element::Class(c)), i as u32));
                }
                for &g in gens {
                    out.push((g, e.atom, i as u32));
                    for &c in types {
                        out.push((g, e.atom.with_element(Element::Class(c)), i as u32));
                    }
                }
                out
            })
            .collect();
        emitted.par_sort_unstable();
        emitted.dedup();
        let mut out: Vec<Candidate> = Vec::new();
        for (prefix, atom, i) in emitted {
            let e = &expanded[i as usize];
            match out.last_mut() {
                Some(c) if c.prefix == prefix && c.atom == atom => {
                    c.support.union_with(&e.support);
                    c.captured.push(i);
                }
                _ => out.push(Candidate {
                    prefix,
                    atom,
                    support: e.support.clone(),
                    captured: vec![i],
                }),
            }
        }
        out
    }

    /// Indices of candidates left after most-specific retention, sorted.
    fn retain_most_specific(&self, candidates: &[Candidate], live: &[usize]) -> Result<Vec<usize>> {
        let mut by_support: Vec<usize> = live.to_vec();
        by_support.par_sort_unstable_by(|&a, &b| {
            candidates[a]
                .support
                .cmp(&candidates[b].support)
                .then(a.cmp(&b))
        });
        let groups: Vec<&[usize]> = by_support
            .chunk_by(|&a, &b| candidates[a].support == candidates[b].support)
            .collect();
        let kept: Vec<Vec<usize>> = groups
            .par_iter()
            .map(|group| -> Result<Vec<usize>> {
                let atoms: Vec<Vec<Atom>> = group
                    .iter()
                    .map(|&i| self.atoms_of(candidates[i].prefix, candidates[i].atom))
                    .collect();
                if group.len() == 1 {
                    return Ok(group.to_vec());
                }
                let mut tree = PrefixTree::new(&self.spec);
                for (j, a) in atoms.iter().enumerate() {
                    tree.insert(a, j);
                }
                let stored = tree.stored();
                if self.opts.check_invariants {
                    for &x in &stored {
                        for &y in &stored {
                            if x != y && self.spec.feature_lt(&atoms[x], &atoms[y]) {
                                return Err(Error::Invariant(format!(
                                    "retained patterns {} and {} are comparable",
                                    crate::pathfeat::render_atoms(&atoms[x], self.g),
                                    crate::pathfeat::render_atoms(&atoms[y], self.g)
                                )));
                            }
                        }
                    }
                }
                Ok(stored.into_iter().map(|j| group[j]).collect())
            })
            .collect::<Result<_>>()?;
        let mut out: Vec<usize> = kept.into_iter().flatten().collect();
        out.sort_unstable();
        Ok(out)
    }

    fn iterate(
        &mut self,
        h: usize,
        paths: &[PathState],
    ) -> Result<(Vec<PathState>, IterationTrace)> {
        let cfg = self.cfg;
        let mut it = IterationTrace {
            h,
            paths_in: paths.len(),
            ..Default::default()
        };

        let expanded = self.expand(h, paths);
        it.expanded = expanded.len();
        self.fill_gen_memo(&expanded);
        let candidates = self.generate(paths, &expanded);
        it.candidates = candidates.len();

        let live: Vec<usize> = (0..candidates.len())
            .filter(|&i| candidates[i].captured.len() > 1)
            .collect();
        it.discarded_single = candidates.len() - live.len();
        let retained = self.retain_most_specific(&candidates, &live)?;
        it.evicted = live.len() - retained.len();
        let survivors: Vec<usize> = retained
            .into_iter()
            .filter(|&i| candidates[i].support.count() >= cfg.l_min)
            .collect();
        it.survivors = survivors.len();

        if self.opts.check_invariants {
            self.check_bounds(paths, &expanded, &candidates, &survivors)?;
        }

        // Intern survivors, then the paths carried to the next iteration.
        let survivor_ids: Vec<FeatId> = survivors
            .iter()
            .map(|&i| {
                let c = &candidates[i];
                self.intern(c.prefix, c.atom, &c.support)
            })
            .collect();
        let mut generalizers: Vec<Vec<FeatId>> = vec![Vec::new(); expanded.len()];
        for (&i, &id) in survivors.iter().zip(&survivor_ids) {
            for &e in &candidates[i].captured {
                generalizers[e as usize].push(id);
            }
        }
        let mut next = Vec::new();
        let mut path_ids: Vec<Option<FeatId>> = vec![None; expanded.len()];
        for (i, (e, gens)) in expanded.iter().zip(generalizers).enumerate() {
            if e.support.count() < cfg.l_min && gens.is_empty() {
                continue;
            }
            let id = self.intern(e.prefix, e.atom, &e.support);
            path_ids[i] = Some(id);
            let Element::Individual(last) = e.atom.element else {
                unreachable!()
            };
            next.push(PathState {
                id,
                last,
                support: e.support.clone(),
                generalizers: gens,
            });
        }
        it.paths_out = next.len();

        // Selection runs against the features chosen in earlier iterations.
        let mut additions: Vec<(FeatId, Vec<FeatId>)> = Vec::new();
        for (i, e) in expanded.iter().enumerate() {
            let Some(id) = path_ids[i] else { continue };
            if let Some(replaced) = self.select(id, &e.support) {
                additions.push((id, replaced));
            }
        }
        for (&i, &id) in survivors.iter().zip(&survivor_ids) {
            let c = &candidates[i];
            // (C3): a captured path with the same support is preferred.
            if c.captured
                .iter()
                .any(|&e| expanded[e as usize].support == c.support)
            {
                continue;
            }
            if let Some(replaced) = self.select(id, &c.support) {
                additions.push((id, replaced));
            }
        }
        for (id, replaced) in additions {
            for old in replaced {
                if self.selected.remove(&old).is_some() {
                    it.replaced.push((old, id));
                }
            }
            self.selected.insert(id, h);
            it.added.push(id);
        }
        it.added_count = it.added.len();
        it.replaced_count = it.replaced.len();
        Ok((next, it))
    }

    /// (C1) and (C2) for an interned feature. Returns the selected prefixes
    /// it replaces, or `None` when it is not selected.
    fn select(&self, id: FeatId, support: &SupportSet) -> Option<Vec<FeatId>> {
        let size = support.count();
        if size < self.cfg.l_min || self.cfg.l_max.exceeded_by(size) {
            return None;
        }
        let mut replaced = Vec::new();
        for anc in self.table.ancestors(id) {
            if !self.selected.contains_key(&anc) || &self.supports[anc.index()] != support {
                continue;
            }
            if self.table.last(anc).element.is_class() {
                replaced.push(anc);
            } else {
                return None;
            }
        }
        Some(replaced)
    }

    fn check_bounds(
        &self,
        paths: &[PathState],
        expanded: &[Expanded],
        candidates: &[Candidate],
        survivors: &[usize],
    ) -> Result<()> {
        let nres = self.nres;
        let element_support = |e: Element| match e {
            Element::Individual(v) => nres.support_of(v).map_or(0, SupportSet::count),
            Element::Class(c) => nres.interesting_types.get(&c).map_or(0, SupportSet::count),
        };
        let check = |prefix: FeatId, atom: Atom, support: &SupportSet| -> Result<()> {
            let atoms = self.atoms_of(prefix, atom);
            let bound = atoms
                .iter()
                .map(|a| element_support(a.element))
                .min()
                .unwrap_or(0);
            if support.count() > bound {
                return Err(Error::Invariant(format!(
                    "support {} of {} exceeds its element bound {bound}",
                    support.count(),
                    crate::pathfeat::render_atoms(&atoms, self.g)
                )));
            }
            if prefix != FeatId::ROOT && !support.is_subset(&self.supports[prefix.index()]) {
                return Err(Error::Invariant(format!(
                    "support of {} is not contained in its prefix support",
                    crate::pathfeat::render_atoms(&atoms, self.g)
                )));
            }
            Ok(())
        };
        for e in expanded {
            check(e.prefix, e.atom, &e.support)?;
            if e.prefix != FeatId::ROOT && !e.support.is_subset(&paths[e.parent].support) {
                return Err(Error::Invariant("expanded path support grew".into()));
            }
        }
        for &i in survivors {
            let c = &candidates[i];
            check(c.prefix, c.atom, &c.support)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::Fig1;
    use crate::neighbors::mine_neighbors;

    fn run(f: &Fig1, cfg: &MiningConfig) -> PathMiningResult {
        let nres = mine_neighbors(&f.graph, &f.ont, cfg).unwrap();
        mine_path_features_with(
            &f.graph,
            &f.ont,
            &nres,
            cfg,
            MineOptions {
                check_invariants: true,
            },
        )
        .unwrap()
    }

    fn short(f: &Fig1, r: &PathMiningResult, id: FeatId) -> String {
        r.table
            .render(id, &f.graph)
            .replace(crate::fixtures::FIG1_NS, "")
            .replace("#class", "")
    }

    #[test]
    fn fig2_final_features() {
        let f = Fig1::new();
        let r = run(&f, &Fig1::config());
        let got: Vec<String> = r.features.iter().map(|&id| short(&f, &r, id)).collect();
        assert_eq!(
            got,
            [
                "-[p4]->(v1)",
                "-[p6]->(T5)",
                "-[p6]->(T6)",
                "-[p1]->(T1)-[p2]->(T3)-[p3]->(v6)",
            ]
        );
        assert!(r.generated > r.features.len());
    }

    #[test]
    fn fig2_trace() {
        let f = Fig1::new();
        let r = run(&f, &Fig1::config());
        let h2: Vec<String> = r.trace[1]
            .added
            .iter()
            .map(|&id| short(&f, &r, id))
            .collect();
        assert_eq!(h2, ["-[p1]->(T1)-[p2]->(T3)"]);
        let h3: Vec<(String, String)> = r.trace[2]
            .replaced
            .iter()
            .map(|&(a, b)| (short(&f, &r, a), short(&f, &r, b)))
            .collect();
        assert_eq!(
            h3,
            [(
                "-[p1]->(T1)-[p2]->(T3)".to_string(),
                "-[p1]->(T1)-[p2]->(T3)-[p3]->(v6)".to_string()
            )]
        );
        assert_eq!(r.trace[0].expanded, 5);
        assert_eq!(r.trace[1].expanded, 2);
    }

    #[test]
    fn l_min_above_seed_count_is_empty() {
        let f = Fig1::new();
        let cfg = MiningConfig {
            l_min: 3,
            ..Fig1::config()
        };
        let r = run(&f, &cfg);
        assert!(r.features.is_empty());
        assert_eq!(r.warnings.len(), 1);
    }
}
