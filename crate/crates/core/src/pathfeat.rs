//! Paths and path patterns.
//!
//! A feature is a sequence of atoms `-[p]->E` rooted at a seed. Features are
//! interned as a trie: each id stands for (parent id, last atom), so the
//! prefixes of a feature are exactly its ancestors in the table.

use std::collections::HashMap;
use std::fmt::Write as _;

use indexmap::IndexSet;

use crate::canonical::{CanonicalGraph, VertexId};
use crate::config::TOP_LABEL;
use crate::ontology::{ClassId, ClassMask, OntologyIndex};
use crate::symbols::SymbolId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Individual(VertexId),
    Class(ClassId),
}

impl Element {
    pub fn is_class(self) -> bool {
        matches!(self, Element::Class(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: SymbolId,
    pub direction: Direction,
    pub element: Element,
}

impl Atom {
    pub fn new(predicate: SymbolId, direction: Direction, element: Element) -> Self {
        Atom {
            predicate,
            direction,
            element,
        }
    }

    pub fn with_element(self, element: Element) -> Self {
        Atom { element, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatId(pub u32);

impl FeatId {
    /// Parent of length-1 features.
    pub const ROOT: FeatId = FeatId(u32::MAX);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, Default)]
pub struct FeatureTable {
    entries: IndexSet<(FeatId, Atom)>,
    lengths: Vec<u32>,
    patterns: Vec<bool>,
}

impl FeatureTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, parent: FeatId, atom: Atom) -> FeatId {
        let (i, fresh) = self.entries.insert_full((parent, atom));
        if fresh {
            let (len, pat) = if parent == FeatId::ROOT {
                (0, false)
            } else {
                (self.lengths[parent.index()], self.patterns[parent.index()])
            };
            self.lengths.push(len + 1);
            self.patterns.push(pat || atom.element.is_class());
        }
        FeatId(i as u32)
    }

    pub fn intern_atoms(&mut self, atoms: &[Atom]) -> FeatId {
        atoms.iter().fold(FeatId::ROOT, |p, &a| self.intern(p, a))
    }

    pub fn get(&self, parent: FeatId, atom: Atom) -> Option<FeatId> {
        self.entries
            .get_index_of(&(parent, atom))
            .map(|i| FeatId(i as u32))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn parent(&self, id: FeatId) -> Option<FeatId> {
        let (p, _) = self.entries[id.index()];
        (p != FeatId::ROOT).then_some(p)
    }

    pub fn last(&self, id: FeatId) -> Atom {
        self.entries[id.index()].1
    }

    pub fn length(&self, id: FeatId) -> usize {
        self.lengths[id.index()] as usize
    }

    /// True when some element is a class.
    pub fn is_pattern(&self, id: FeatId) -> bool {
        self.patterns[id.index()]
    }

    pub fn atoms(&self, id: FeatId) -> Vec<Atom> {
        let mut out: Vec<Atom> = self.ancestors_inclusive(id).map(|f| self.last(f)).collect();
        out.reverse();
        out
    }

    /// Strict prefixes, longest first.
    pub fn ancestors(&self, id: FeatId) -> impl Iterator<Item = FeatId> + '_ {
        std::iter::successors(self.parent(id), move |&p| self.parent(p))
    }

    fn ancestors_inclusive(&self, id: FeatId) -> impl Iterator<Item = FeatId> + '_ {
        std::iter::successors(Some(id), move |&p| self.parent(p))
    }

    pub fn render(&self, id: FeatId, g: &CanonicalGraph) -> String {
        render_atoms(&self.atoms(id), g)
    }
}

/// `-[pred]->(uri)` for forward atoms, `<-[pred]-(uri)` for backward ones;
/// class elements carry a `#class` suffix after the parenthesis.
pub fn render_atoms(atoms: &[Atom], g: &CanonicalGraph) -> String {
    let mut out = String::new();
    for a in atoms {
        let pred = g.predicate_label(a.predicate);
        let (elem, class) = match a.element {
            Element::Individual(v) => (g.label(v), false),
            Element::Class(c) => (c.vertex().map_or(TOP_LABEL, |v| g.label(v)), true),
        };
        let _ = match a.direction {
            Direction::Forward => write!(out, "-[{pred}]->({elem})"),
            Direction::Backward => write!(out, "<-[{pred}]-({elem})"),
        };
        if class {
            out.push_str("#class");
        }
    }
    out
}

/// The "more specific than" order on elements, atoms and features.
///
/// An individual is below every class it reaches through one type arc and
/// any number of subClassOf arcs; a class is below its superclass closure.
/// Top is above everything. Reachability is not bounded by `t`, which keeps
/// the relation transitive.
#[derive(Clone, Debug)]
pub struct Specificity<'o> {
    ont: &'o OntologyIndex,
    closures: HashMap<ClassId, Box<[ClassId]>>,
}

impl<'o> Specificity<'o> {
    pub fn new(ont: &'o OntologyIndex) -> Self {
        let closures = ont
            .classes()
            .map(|c| (c, ont.superclass_closure(c).into_boxed_slice()))
            .collect();
        Specificity { ont, closures }
    }

    fn class_le(&self, a: ClassId, b: ClassId) -> bool {
        a == b
            || b.is_top()
            || self
                .closures
                .get(&a)
                .is_some_and(|cl| cl.binary_search(&b).is_ok())
    }

    pub fn element_le(&self, a: Element, b: Element) -> bool {
        match (a, b) {
            _ if a == b => true,
            (_, Element::Individual(_)) => false,
            (Element::Class(x), Element::Class(y)) => self.class_le(x, y),
            (Element::Individual(v), Element::Class(y)) => {
                y.is_top()
                    || self
                        .ont
                        .direct_types(v)
                        .iter()
                        .any(|&d| self.class_le(d, y))
            }
        }
    }

    pub fn atom_le(&self, a: &Atom, b: &Atom) -> bool {
        a.predicate == b.predicate
            && a.direction == b.direction
            && self.element_le(a.element, b.element)
    }

    /// `p1` is more specific than (or equal to) `p2`.
    pub fn feature_le(&self, p1: &[Atom], p2: &[Atom]) -> bool {
        p1.len() == p2.len() && p1.iter().zip(p2).all(|(a, b)| self.atom_le(a, b))
    }

    pub fn feature_lt(&self, p1: &[Atom], p2: &[Atom]) -> bool {
        self.feature_le(p1, p2) && !self.feature_le(p2, p1)
    }
}

/// Every pattern obtained by replacing each element of the path `atoms` by
/// itself or one of its generalizations, except the path itself.
pub fn enumerate_generalizations(
    atoms: &[Atom],
    ont: &OntologyIndex,
    t: usize,
    b_gen: &ClassMask,
) -> Vec<Vec<Atom>> {
    let options: Vec<Vec<Element>> = atoms
        .iter()
        .map(|a| {
            let mut opts = vec![a.element];
            if let Element::Individual(v) = a.element {
                opts.extend(
                    ont.generalizations(v, t, b_gen)
                        .into_iter()
                        .map(Element::Class),
                );
            }
            opts
        })
        .collect();
    let mut out: Vec<Vec<Atom>> = vec![Vec::new()];
    for (a, opts) in atoms.iter().zip(&options) {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                opts.iter().map(move |&e| {
                    let mut p = prefix.clone();
                    p.push(a.with_element(e));
                    p
                })
            })
            .collect();
    }
    out.retain(|p| p.as_slice() != atoms);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::Fig1;

    fn fwd(f: &Fig1, p: &str, e: &str) -> Atom {
        let element = if e.starts_with('T') {
            Element::Class(f.c(e))
        } else if e == "top" {
            Element::Class(ClassId::TOP)
        } else {
            Element::Individual(f.v(e))
        };
        Atom::new(f.p(p), Direction::Forward, element)
    }

    #[test]
    fn interning_is_a_trie() {
        let f = Fig1::new();
        let mut t = FeatureTable::new();
        let a = t.intern_atoms(&[fwd(&f, "p1", "v2"), fwd(&f, "p2", "v3")]);
        let b = t.intern_atoms(&[fwd(&f, "p1", "v2"), fwd(&f, "p2", "T3")]);
        assert_eq!(t.len(), 3);
        assert_eq!(t.parent(a), t.parent(b));
        assert_eq!(t.length(a), 2);
        assert!(!t.is_pattern(a));
        assert!(t.is_pattern(b));
        assert_eq!(t.ancestors(b).count(), 1);
        assert_eq!(t.atoms(b)[1], fwd(&f, "p2", "T3"));
        assert_eq!(t.intern_atoms(&t.atoms(a)), a);
    }

    #[test]
    fn order_on_fig1() {
        let f = Fig1::new();
        let s = Specificity::new(&f.ont);
        assert!(s.atom_le(&fwd(&f, "p2", "v3"), &fwd(&f, "p2", "T3")));
        assert!(s.atom_le(&fwd(&f, "p2", "T2"), &fwd(&f, "p2", "T3")));
        assert!(!s.atom_le(&fwd(&f, "p2", "T3"), &fwd(&f, "p2", "T2")));
        assert!(!s.atom_le(&fwd(&f, "p1", "v2"), &fwd(&f, "p2", "v2")));
        let path = [fwd(&f, "p1", "v2"), fwd(&f, "p2", "v3")];
        let pat = [fwd(&f, "p1", "T1"), fwd(&f, "p2", "T3")];
        assert!(s.feature_lt(&path, &pat));
        assert!(s.feature_le(&pat, &pat));
        assert!(!s.feature_le(&pat[..1], &pat));
        assert!(s.feature_lt(&[fwd(&f, "p1", "T1")], &[fwd(&f, "p1", "top")]));
    }

    #[test]
    fn generalization_counts() {
        let f = Fig1::new();
        let none = ClassMask::empty();
        let p2 = [fwd(&f, "p1", "v2"), fwd(&f, "p2", "v3")];
        assert_eq!(enumerate_generalizations(&p2, &f.ont, 2, &none).len(), 11);
        assert_eq!(enumerate_generalizations(&p2, &f.ont, 5, &none).len(), 11);
        let p3 = [
            fwd(&f, "p1", "v2"),
            fwd(&f, "p2", "v3"),
            fwd(&f, "p3", "v6"),
        ];
        assert_eq!(enumerate_generalizations(&p3, &f.ont, 2, &none).len(), 23);
        let top = ClassMask::of(&[ClassId::TOP]);
        assert!(enumerate_generalizations(&p3, &f.ont, 0, &top).is_empty());
    }

    #[test]
    fn render_format() {
        let f = Fig1::new();
        let atoms = [
            fwd(&f, "p1", "T1"),
            Atom::new(f.p("p2"), Direction::Backward, Element::Class(ClassId::TOP)),
        ];
        let ns = crate::fixtures::FIG1_NS;
        assert_eq!(
            render_atoms(&atoms, &f.graph),
            format!("-[{ns}p1]->({ns}T1)#class<-[{ns}p2]-(⊤)#class")
        );
    }
}
