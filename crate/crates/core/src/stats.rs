//! Size of the whole neighborhood of the seeds, without length, level or
//! support limits. Only the blacklists and the hub rule apply.

use serde::Serialize;

use crate::canonical::CanonicalGraph;
use crate::config::{Limit, MiningConfig};
use crate::error::Result;
use crate::neighbors::mine_neighbors;
use crate::ontology::OntologyIndex;

#[derive(Clone, Debug, Serialize)]
pub struct FullNeighborhood {
    pub d: Limit,
    pub neighbors: usize,
    pub types: usize,
    /// Largest shortest distance at which a new vertex was reached.
    pub reached_k: usize,
    /// Deepest class level instantiated by a reached vertex.
    pub reached_t: usize,
}

pub fn full_neighborhood(
    g: &CanonicalGraph,
    ont: &OntologyIndex,
    cfg: &MiningConfig,
    d: Limit,
) -> Result<FullNeighborhood> {
    let unbounded = MiningConfig {
        k: g.vertex_count().max(1),
        t: usize::MAX,
        d,
        l_min: 0,
        l_max: Limit::Infinite,
        ..cfg.clone()
    };
    let res = mine_neighbors(g, ont, &unbounded)?;
    let reached_t = res
        .support
        .keys()
        .map(|&v| ont.max_level(v))
        .max()
        .unwrap_or(0);
    Ok(FullNeighborhood {
        d,
        neighbors: res.support.len(),
        types: res.interesting_types.len(),
        reached_k: res.levels.len() - 1,
        reached_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::Fig1;

    #[test]
    fn fig1_full_neighborhood() {
        let f = Fig1::new();
        let s = full_neighborhood(&f.graph, &f.ont, &Fig1::config(), Limit::Finite(4)).unwrap();
        assert_eq!((s.neighbors, s.reached_k, s.reached_t), (8, 3, 2));
        let s = full_neighborhood(&f.graph, &f.ont, &Fig1::config(), Limit::Infinite).unwrap();
        assert_eq!((s.neighbors, s.reached_k), (13, 3));
        // T1, T2, T3, T4, T5, T6 and top.
        assert_eq!(s.types, 7);
    }
}
