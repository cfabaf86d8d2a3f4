//! Most-specific retention among patterns sharing one support set.
//!
//! Levels alternate between (predicate, direction) keys and elements, so a
//! stored pattern of length h is a root-to-leaf walk of depth 2h. Queries
//! follow predicate keys exactly and element keys through the order, which
//! prunes whole subtrees of incomparable elements.

use crate::pathfeat::{Atom, Direction, Element, Specificity};
use crate::symbols::SymbolId;

#[derive(Default)]
struct Node {
    preds: Vec<((SymbolId, Direction), u32)>,
    elems: Vec<(Element, u32)>,
    leaf: Option<usize>,
}

#[derive(Debug, PartialEq, Eq)]
pub enum Insertion {
    /// A strictly more specific pattern is already stored.
    Discarded,
    Inserted {
        evicted: Vec<usize>,
    },
}

pub struct PrefixTree<'a, 'o> {
    spec: &'a Specificity<'o>,
    nodes: Vec<Node>,
}

impl<'a, 'o> PrefixTree<'a, 'o> {
    pub fn new(spec: &'a Specificity<'o>) -> Self {
        PrefixTree {
            spec,
            nodes: vec![Node::default()],
        }
    }

    pub fn insert(&mut self, atoms: &[Atom], id: usize) -> Insertion {
        let mut trail = Vec::with_capacity(atoms.len());
        if self.find_more_specific(0, atoms, &mut trail) {
            return Insertion::Discarded;
        }
        let mut evicted = Vec::new();
        trail.clear();
        self.evict_more_general(0, atoms, &mut trail, &mut evicted);
        let leaf = self.path_to(atoms);
        self.nodes[leaf].leaf = Some(id);
        Insertion::Inserted { evicted }
    }

    /// Ids currently stored, in no particular order.
    pub fn stored(&self) -> Vec<usize> {
        self.nodes.iter().filter_map(|n| n.leaf).collect()
    }

    fn path_to(&mut self, atoms: &[Atom]) -> usize {
        let mut node = 0;
        for a in atoms {
            let key = (a.predicate, a.direction);
            node = match self.nodes[node].preds.iter().find(|(k, _)| *k == key) {
                Some(&(_, c)) => c as usize,
                None => self.add_child(node, |n, c| n.preds.push((key, c))),
            };
            node = match self.nodes[node].elems.iter().find(|(e, _)| *e == a.element) {
                Some(&(_, c)) => c as usize,
                None => self.add_child(node, |n, c| n.elems.push((a.element, c))),
            };
        }
        node
    }

    fn add_child(&mut self, parent: usize, link: impl FnOnce(&mut Node, u32)) -> usize {
        let c = self.nodes.len();
        self.nodes.push(Node::default());
        link(&mut self.nodes[parent], c as u32);
        c
    }

    fn pred_child(&self, node: usize, a: &Atom) -> Option<usize> {
        let key = (a.predicate, a.direction);
        self.nodes[node]
            .preds
            .iter()
            .find(|(k, _)| *k == key)
            .map(|&(_, c)| c as usize)
    }

    /// Some stored pattern lies strictly below `atoms`.
    fn find_more_specific(&self, node: usize, atoms: &[Atom], trail: &mut Vec<Element>) -> bool {
        let depth = trail.len();
        if depth == atoms.len() {
            return self.nodes[node].leaf.is_some()
                && !atoms
                    .iter()
                    .zip(trail.iter())
                    .all(|(a, &s)| self.spec.element_le(a.element, s));
        }
        let Some(next) = self.pred_child(node, &atoms[depth]) else {
            return false;
        };
        for &(e, child) in &self.nodes[next].elems {
            if self.spec.element_le(e, atoms[depth].element) {
                trail.push(e);
                let hit = self.find_more_specific(child as usize, atoms, trail);
                trail.pop();
                if hit {
                    return true;
                }
            }
        }
        false
    }

    fn evict_more_general(
        &mut self,
        node: usize,
        atoms: &[Atom],
        trail: &mut Vec<Element>,
        out: &mut Vec<usize>,
    ) {
        let depth = trail.len();
        if depth == atoms.len() {
            let strictly_above = !atoms
                .iter()
                .zip(trail.iter())
                .all(|(a, &s)| self.spec.element_le(s, a.element));
            if strictly_above {
                if let Some(id) = self.nodes[node].leaf.take() {
                    out.push(id);
                }
            }
            return;
        }
        let Some(next) = self.pred_child(node, &atoms[depth]) else {
            return;
        };
        let children: Vec<(Element, u32)> = self.nodes[next]
            .elems
            .iter()
            .copied()
            .filter(|&(e, _)| self.spec.element_le(atoms[depth].element, e))
            .collect();
        for (e, child) in children {
            trail.push(e);
            self.evict_more_general(child as usize, atoms, trail, out);
            trail.pop();
        }
    }
}
