//! Seeded random graphs with a layered class hierarchy.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canonical::{canonicalize, CanonicalGraph, WellKnown};
use crate::config::{Limit, MiningConfig, UriPatterns, RDFS_SUBCLASS_OF, RDF_TYPE};
use crate::error::Result;
use crate::ingest::RawGraph;
use crate::ontology::OntologyIndex;

pub const SYNTH_NS: &str = "http://synth.example/";

#[derive(Clone, Debug)]
pub struct SynthParams {
    pub individuals: usize,
    pub classes: usize,
    /// Number of class layers; layer 0 classes have no superclass.
    pub depth: usize,
    pub predicates: usize,
    /// Distinct arcs between individuals.
    pub arcs: usize,
    /// Each individual gets between 0 and this many type arcs.
    pub max_types: usize,
    /// Chance that a class gets a second superclass.
    pub multi_parent: f64,
    pub seeds: usize,
    /// Targets are drawn as `floor(n * u^skew)`, so `skew > 1` concentrates
    /// arcs on low-numbered individuals.
    pub skew: f64,
}

impl SynthParams {
    /// Small instance of the size the brute-force oracle can handle.
    pub fn small(rng: &mut impl Rng) -> Self {
        let individuals = rng.gen_range(8..=26);
        SynthParams {
            individuals,
            classes: rng.gen_range(1..=4),
            depth: rng.gen_range(1..=4),
            predicates: rng.gen_range(1..=3),
            arcs: rng.gen_range(individuals..=individuals * 2),
            max_types: 2,
            multi_parent: 0.3,
            seeds: rng.gen_range(2..=5),
            skew: 1.5,
        }
    }

    /// 10^5 vertices and about 5 * 10^5 arcs.
    pub fn scale() -> Self {
        SynthParams {
            individuals: 99_200,
            classes: 1_000,
            depth: 4,
            predicates: 20,
            arcs: 400_800,
            max_types: 2,
            multi_parent: 0.2,
            seeds: 500,
            skew: 2.0,
        }
    }
}

pub struct SynthGraph {
    pub raw: RawGraph,
    pub seeds: Vec<String>,
}

impl SynthGraph {
    pub fn seed_list(&self) -> String {
        self.seeds.iter().map(|s| format!("<{s}>\n")).collect()
    }
}

pub fn individual_uri(i: usize) -> String {
    format!("{SYNTH_NS}i{i}")
}

pub fn class_uri(c: usize) -> String {
    format!("{SYNTH_NS}C{c}")
}

pub fn predicate_uri(p: usize) -> String {
    format!("{SYNTH_NS}p{p}")
}

pub fn generate(p: &SynthParams, seed: u64) -> Result<SynthGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples: Vec<(String, String, String)> = Vec::new();

    // Class c sits on layer c * depth / classes and picks superclasses on
    // the layer above.
    let depth = p.depth.max(1);
    let layer = |c: usize| c * depth / p.classes.max(1);
    let layers: Vec<Vec<usize>> = (0..depth)
        .map(|l| (0..p.classes).filter(|&c| layer(c) == l).collect())
        .collect();
    for c in 0..p.classes {
        let l = layer(c);
        if l == 0 || layers[l - 1].is_empty() {
            continue;
        }
        let above = &layers[l - 1];
        let parents = if rng.gen_bool(p.multi_parent) { 2 } else { 1 };
        for _ in 0..parents {
            let sup = above[rng.gen_range(0..above.len())];
            triples.push((class_uri(c), RDFS_SUBCLASS_OF.into(), class_uri(sup)));
        }
    }

    if p.classes > 0 {
        for i in 0..p.individuals {
            for _ in 0..rng.gen_range(0..=p.max_types) {
                let c = rng.gen_range(0..p.classes);
                triples.push((individual_uri(i), RDF_TYPE.into(), class_uri(c)));
            }
        }
    }

    let n = p.individuals;
    let max_arcs = n * n * p.predicates;
    let mut seen = HashSet::new();
    while seen.len() < p.arcs.min(max_arcs) {
        let s = rng.gen_range(0..n);
        let o = ((rng.gen::<f64>().powf(p.skew)) * n as f64) as usize;
        let o = o.min(n - 1);
        let pr = rng.gen_range(0..p.predicates);
        if seen.insert((s, pr, o)) {
            triples.push((individual_uri(s), predicate_uri(pr), individual_uri(o)));
        }
    }

    let raw = RawGraph::from_iri_triples(
        triples
            .iter()
            .map(|(s, p, o)| (s.as_str(), p.as_str(), o.as_str())),
    )?;
    let present: Vec<usize> = (0..n)
        .filter(|&i| raw.vocab.vertices.get(&individual_uri(i)).is_some())
        .collect();
    let seeds = sample(&mut rng, present.len(), p.seeds.min(present.len()))
        .into_iter()
        .map(|j| individual_uri(present[j]))
        .collect();
    Ok(SynthGraph { raw, seeds })
}

/// A small random graph with seeds and a random configuration, as used by
/// the oracle comparisons.
pub struct RandomCase {
    pub graph: CanonicalGraph,
    pub ont: OntologyIndex,
    pub well_known: WellKnown,
    pub cfg: MiningConfig,
}

pub fn random_case(seed: u64) -> Result<RandomCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let params = SynthParams::small(&mut rng);
    let sg = generate(&params, seed)?;
    let l_min = rng.gen_range(1..=3);
    let mut cfg = MiningConfig {
        k: rng.gen_range(1..=3),
        t: rng.gen_range(0..=3),
        d: [
            Limit::Finite(2),
            Limit::Finite(3),
            Limit::Finite(5),
            Limit::Infinite,
        ][rng.gen_range(0..4)],
        l_min,
        l_max: if rng.gen_bool(0.5) {
            Limit::Infinite
        } else {
            Limit::Finite(l_min + rng.gen_range(0..=2))
        },
        u: rng.gen_bool(0.3),
        ..MiningConfig::default()
    };
    if params.classes > 0 && rng.gen_bool(0.2) {
        cfg.b_gen_types = UriPatterns::new([class_uri(rng.gen_range(0..params.classes))]);
    }
    if rng.gen_bool(0.1) {
        cfg.b_gen_types
            .0
            .push(crate::config::UriPattern::parse(crate::config::TOP_LABEL));
    }
    if params.classes > 0 && rng.gen_bool(0.15) {
        cfg.b_exp_types = UriPatterns::new([class_uri(rng.gen_range(0..params.classes))]);
    }
    let wk = WellKnown::resolve(
        &sg.raw.vocab,
        &cfg.sameas_uri,
        &cfg.type_uri,
        &cfg.subclass_of_uri,
    );
    let seeds: Vec<_> = sg
        .seeds
        .iter()
        .filter_map(|s| sg.raw.vocab.vertices.get(s))
        .collect();
    let graph = canonicalize(sg.raw, &wk, &seeds)?;
    let ont = OntologyIndex::build(&graph, &wk);
    Ok(RandomCase {
        graph,
        ont,
        well_known: wk,
        cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_a_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = SynthParams::small(&mut rng);
        let a = generate(&p, 7).unwrap();
        let b = generate(&p, 7).unwrap();
        assert_eq!(a.raw.arcs, b.raw.arcs);
        assert_eq!(a.seeds, b.seeds);
        assert_eq!(a.seeds.len(), p.seeds);
    }
}
