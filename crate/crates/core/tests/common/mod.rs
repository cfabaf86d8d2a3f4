//! Property checks shared by the proptest suite and the acceptance runner.
//! Each takes a generator seed and reports the first violation it finds.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seedmine_core::canonical::{canonicalize, VertexId, WellKnown};
use seedmine_core::features::emit_matrix;
use seedmine_core::ingest::RawGraph;
use seedmine_core::neighbors::mine_neighbors;
use seedmine_core::ontology::{ClassId, ClassMask};
use seedmine_core::pathfeat::{Atom, Direction, Element, Specificity};
use seedmine_core::pathmine::{
    mine_path_features_with, Insertion, MineOptions, PathMiningResult, PrefixTree,
};
use seedmine_core::pipeline::{mine, Prepared, RunReport, SeedSummary};
use seedmine_core::synth::{random_case, RandomCase};

pub type Check = Result<(), String>;

fn mined(
    case: &RandomCase,
    check: bool,
) -> Result<(seedmine_core::NeighborhoodResult, PathMiningResult), String> {
    let nres = mine_neighbors(&case.graph, &case.ont, &case.cfg).map_err(|e| e.to_string())?;
    let opts = MineOptions {
        check_invariants: check,
    };
    let paths = mine_path_features_with(&case.graph, &case.ont, &nres, &case.cfg, opts)
        .map_err(|e| e.to_string())?;
    Ok((nres, paths))
}

/// Every interned feature's support is contained in its prefix's support.
pub fn support_monotone(seed: u64) -> Check {
    let case = random_case(seed).map_err(|e| e.to_string())?;
    let (_, r) = mined(&case, false)?;
    for i in 0..r.table.len() {
        let id = seedmine_core::FeatId(i as u32);
        if let Some(parent) = r.table.parent(id) {
            if !r.support(id).is_subset(r.support(parent)) {
                return Err(format!("feature {i} has a support larger than its prefix"));
            }
        }
    }
    Ok(())
}

/// |SupportSet(P)| is at most the support of any of its elements.
pub fn support_bound(seed: u64) -> Check {
    let case = random_case(seed).map_err(|e| e.to_string())?;
    let (nres, r) = mined(&case, false)?;
    for i in 0..r.table.len() {
        let id = seedmine_core::FeatId(i as u32);
        let bound = r
            .table
            .atoms(id)
            .iter()
            .map(|a| match a.element {
                Element::Individual(v) => nres.support_of(v).map_or(0, |s| s.count()),
                Element::Class(c) => nres.interesting_types.get(&c).map_or(0, |s| s.count()),
            })
            .min()
            .unwrap_or(0);
        if r.support(id).count() > bound {
            return Err(format!(
                "feature {i}: support {} > bound {bound}",
                r.support(id).count()
            ));
        }
    }
    Ok(())
}

/// The miner's own pairwise check after each retention pass, plus the prefix
/// tree on random patterns inserted in random order: what stays is exactly
/// the set of minimal patterns.
pub fn non_dominance(seed: u64) -> Check {
    let case = random_case(seed).map_err(|e| e.to_string())?;
    mined(&case, true)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes: Vec<ClassId> = case.ont.classes().chain([ClassId::TOP]).collect();
    let individuals: Vec<VertexId> = case
        .graph
        .vertices()
        .filter(|&v| !case.ont.is_class(v))
        .collect();
    let preds: Vec<_> = case
        .graph
        .predicates()
        .iter()
        .map(|(id, _)| id)
        .take(2)
        .collect();
    let len = rng.gen_range(1..=3);
    let mut patterns: Vec<Vec<Atom>> = (0..rng.gen_range(2..30))
        .map(|_| {
            (0..len)
                .map(|_| {
                    let e = if rng.gen_bool(0.6) || individuals.is_empty() {
                        Element::Class(classes[rng.gen_range(0..classes.len())])
                    } else {
                        Element::Individual(individuals[rng.gen_range(0..individuals.len())])
                    };
                    Atom::new(preds[rng.gen_range(0..preds.len())], Direction::Forward, e)
                })
                .collect()
        })
        .collect();
    patterns.sort();
    patterns.dedup();
    let spec = Specificity::new(&case.ont);
    let minimal: BTreeSet<usize> = (0..patterns.len())
        .filter(|&i| !(0..patterns.len()).any(|j| spec.feature_lt(&patterns[j], &patterns[i])))
        .collect();
    let mut order: Vec<usize> = (0..patterns.len()).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut tree = PrefixTree::new(&spec);
    for &i in &order {
        let _: Insertion = tree.insert(&patterns[i], i);
    }
    let stored: BTreeSet<usize> = tree.stored().into_iter().collect();
    for &a in &stored {
        for &b in &stored {
            if a != b && spec.feature_lt(&patterns[a], &patterns[b]) {
                return Err("two stored patterns are comparable".into());
            }
        }
    }
    if stored != minimal {
        return Err(format!(
            "tree kept {stored:?}, minimal elements are {minimal:?}"
        ));
    }
    Ok(())
}

/// Random graph with random sameAs links: the quotient merges exactly the
/// sameAs components, maps arcs onto arcs, and is a fixpoint.
pub fn canonical_quotient(seed: u64) -> Check {
    const SAME: &str = "urn:same";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..25);
    let name = |i: usize| format!("urn:v{i}");
    let mut triples: Vec<(String, String, String)> = Vec::new();
    for _ in 0..rng.gen_range(0..40) {
        let p = if rng.gen_bool(0.3) {
            SAME.to_string()
        } else {
            format!("urn:p{}", rng.gen_range(0..3))
        };
        triples.push((name(rng.gen_range(0..n)), p, name(rng.gen_range(0..n))));
    }
    triples.push((name(0), "urn:p0".into(), name(n - 1)));
    let raw = RawGraph::from_iri_triples(
        triples
            .iter()
            .map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())),
    )
    .map_err(|e| e.to_string())?;
    let wk = WellKnown::resolve(&raw.vocab, SAME, "urn:type", "urn:sub");
    let g = canonicalize(raw.clone(), &wk, &[]).map_err(|e| e.to_string())?;

    // Components of the undirected sameAs graph by repeated relabeling.
    let m = raw.vertex_count();
    let mut comp: Vec<usize> = (0..m).collect();
    loop {
        let mut changed = false;
        for a in raw.arcs.iter().filter(|a| Some(a.predicate) == wk.sameas) {
            let (x, y) = (a.source.index(), a.target.index());
            let low = comp[x].min(comp[y]);
            if comp[x] != low || comp[y] != low {
                comp[x] = low;
                comp[y] = low;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for a in 0..m {
        for b in 0..m {
            let same_class = g.lambda(seedmine_core::SymbolId(a as u32))
                == g.lambda(seedmine_core::SymbolId(b as u32));
            if same_class != (comp[a] == comp[b]) {
                return Err(format!("raw vertices {a} and {b} merged incorrectly"));
            }
        }
    }
    let canon_arcs: BTreeSet<(VertexId, seedmine_core::SymbolId, VertexId)> = g.arcs().collect();
    let mapped: BTreeSet<_> = raw
        .arcs
        .iter()
        .filter(|a| Some(a.predicate) != wk.sameas)
        .map(|a| {
            (
                g.lambda(a.source).unwrap(),
                a.predicate,
                g.lambda(a.target).unwrap(),
            )
        })
        .collect();
    if canon_arcs != mapped {
        return Err("canonical arcs differ from the image of the raw arcs".into());
    }
    let wk2 = WellKnown::resolve(&g.vocab().clone(), SAME, "urn:type", "urn:sub");
    let again = canonicalize(g.to_raw(), &wk2, &[]).map_err(|e| e.to_string())?;
    if again.vertex_count() != g.vertex_count()
        || again.arcs().collect::<BTreeSet<_>>() != canon_arcs
    {
        return Err("canonicalization is not idempotent".into());
    }
    for v in g.vertices() {
        if again.canonical_label(v).ok() != g.canonical_label(v).ok() {
            return Err(format!("label of {v} changed on the second pass"));
        }
    }
    Ok(())
}

/// Generalization sets grow with t, and the unbounded b_exp check agrees
/// with a transitive-closure recomputation.
pub fn instantiates_monotone(seed: u64) -> Check {
    let case = random_case(seed).map_err(|e| e.to_string())?;
    let ont = &case.ont;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes: Vec<ClassId> = ont.classes().collect();
    let mask = if classes.is_empty() {
        ClassMask::empty()
    } else {
        ClassMask::of(&[classes[rng.gen_range(0..classes.len())]])
    };
    let mut supers: HashMap<ClassId, BTreeSet<ClassId>> = HashMap::new();
    for &c in &classes {
        let mut set: BTreeSet<ClassId> = BTreeSet::from([c]);
        loop {
            let next: BTreeSet<ClassId> = set
                .iter()
                .flat_map(|&x| ont.direct_superclasses(x).iter().copied().chain([x]))
                .collect();
            if next == set {
                break;
            }
            set = next;
        }
        supers.insert(c, set);
    }
    for v in case.graph.vertices() {
        let mut prev: BTreeSet<ClassId> = BTreeSet::new();
        for t in 0..5 {
            let cur: BTreeSet<ClassId> = ont
                .generalizations(v, t, &ClassMask::empty())
                .into_iter()
                .collect();
            if !prev.is_subset(&cur) {
                return Err(format!(
                    "generalizations of {v} shrink from t={} to t={t}",
                    t - 1
                ));
            }
            for &c in classes.iter().chain([&ClassId::TOP]) {
                if ont.instantiates(v, c, t, &ClassMask::empty()) != cur.contains(&c) {
                    return Err(format!("instantiates and generalizations disagree on {v}"));
                }
            }
            prev = cur;
        }
        let closure: BTreeSet<ClassId> = ont
            .direct_types(v)
            .iter()
            .flat_map(|c| supers[c].iter().copied())
            .collect();
        let expected = closure.iter().any(|&c| mask.contains(c));
        if ont.is_instance_of_blacklisted(v, &mask) != expected {
            return Err(format!("b_exp check on {v} disagrees with the closure"));
        }
    }
    Ok(())
}

fn emitted_bytes(case: &RandomCase, threads: usize) -> Result<Vec<Vec<u8>>, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())?;
    let prep = Prepared {
        graph: case.graph.clone(),
        ont: case.ont.clone(),
        well_known: case.well_known,
        seeds: SeedSummary::default(),
    };
    let mined = pool
        .install(|| {
            mine(
                &prep,
                &case.cfg,
                MineOptions::default(),
                &mut RunReport::default(),
            )
        })
        .map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    emit_matrix(&mined.matrix, dir.path()).map_err(|e| e.to_string())?;
    ["features.tsv", "rows.tsv", "matrix.coo"]
        .iter()
        .map(|f| std::fs::read(dir.path().join(f)).map_err(|e| e.to_string()))
        .collect()
}

/// One worker and four workers write byte-identical files.
pub fn deterministic_output(seed: u64) -> Check {
    let case = random_case(seed).map_err(|e| e.to_string())?;
    if emitted_bytes(&case, 1)? != emitted_bytes(&case, 4)? {
        return Err("outputs differ between 1 and 4 threads".into());
    }
    Ok(())
}

pub type Property = (&'static str, fn(u64) -> Check);

pub const PROPERTIES: [Property; 6] = [
    ("support monotone along expansion", support_monotone),
    ("support bounded by element supports", support_bound),
    ("prefix-tree non-dominance", non_dominance),
    (
        "canonical quotient sound and idempotent",
        canonical_quotient,
    ),
    ("instantiates monotone in t", instantiates_monotone),
    ("deterministic across thread counts", deterministic_output),
];
