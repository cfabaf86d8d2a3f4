//! `rdf:type` / `rdfs:subClassOf` index over the canonical graph.
//!
//! Levels are counted in hops from the vertex being generalized: its direct
//! types are at level 1, their direct superclasses at level 2, and so on.
//! When a class is reachable along several routes the shortest one counts.
//! The synthetic top class is instantiated by every vertex at every level.

use std::collections::VecDeque;
use std::fmt;

use crate::canonical::{CanonicalGraph, VertexId, WellKnown};
use crate::config::{UriPatterns, TOP_LABEL};
use crate::symbols::SymbolId;

/// A class is a canonical vertex, or the synthetic top class which owns the
/// reserved id `u32::MAX`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct ClassId(pub u32);

impl ClassId {
    pub const TOP: ClassId = ClassId(u32::MAX);

    #[inline]
    pub fn named(v: VertexId) -> Self {
        ClassId(v.0)
    }

    #[inline]
    pub fn is_top(self) -> bool {
        self == Self::TOP
    }

    #[inline]
    pub fn vertex(self) -> Option<VertexId> {
        (!self.is_top()).then_some(VertexId(self.0))
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_top() {
            f.write_str(TOP_LABEL)
        } else {
            write!(f, "c{}", self.0)
        }
    }
}

/// Per-vertex membership in a URI pattern list. A canonical vertex matches
/// when any of its member URIs does.
#[derive(Clone, Debug, Default)]
pub struct ClassMask {
    named: Vec<bool>,
    top: bool,
    any: bool,
}

impl ClassMask {
    pub fn empty() -> Self {
        ClassMask::default()
    }

    pub fn from_patterns(g: &CanonicalGraph, patterns: &UriPatterns) -> Self {
        if patterns.is_empty() {
            return ClassMask::empty();
        }
        let named: Vec<bool> = g
            .vertices()
            .map(|v| g.member_uris(v).any(|u| patterns.matches(u)))
            .collect();
        let top = patterns.matches_top();
        let any = top || named.iter().any(|b| *b);
        ClassMask { named, top, any }
    }

    /// Mask over explicit classes, mostly for tests.
    pub fn of(classes: &[ClassId]) -> Self {
        let mut m = ClassMask::default();
        for c in classes {
            match c.vertex() {
                None => m.top = true,
                Some(v) => {
                    if m.named.len() <= v.index() {
                        m.named.resize(v.index() + 1, false);
                    }
                    m.named[v.index()] = true;
                }
            }
        }
        m.any = !classes.is_empty();
        m
    }

    #[inline]
    pub fn contains(&self, c: ClassId) -> bool {
        if !self.any {
            return false;
        }
        match c.vertex() {
            None => self.top,
            Some(v) => self.named.get(v.index()).copied().unwrap_or(false),
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.any
    }
}

#[derive(Clone, Debug)]
pub struct OntologyIndex {
    type_predicate: Option<SymbolId>,
    subclass_predicate: Option<SymbolId>,
    direct_types: Vec<Vec<ClassId>>,
    superclasses: Vec<Vec<ClassId>>,
    subclasses: Vec<Vec<ClassId>>,
    is_class: Vec<bool>,
}

impl OntologyIndex {
    pub fn build(g: &CanonicalGraph, well_known: &WellKnown) -> Self {
        let n = g.vertex_count();
        let mut direct_types = vec![Vec::new(); n];
        let mut superclasses = vec![Vec::new(); n];
        let mut subclasses = vec![Vec::new(); n];
        let mut is_class = vec![false; n];
        for (s, p, t) in g.arcs() {
            if Some(p) == well_known.rdf_type {
                direct_types[s.index()].push(ClassId::named(t));
                is_class[t.index()] = true;
            } else if Some(p) == well_known.subclass_of {
                superclasses[s.index()].push(ClassId::named(t));
                subclasses[t.index()].push(ClassId::named(s));
                is_class[s.index()] = true;
                is_class[t.index()] = true;
            }
        }
        for list in direct_types
            .iter_mut()
            .chain(superclasses.iter_mut())
            .chain(subclasses.iter_mut())
        {
            list.sort_unstable();
            list.dedup();
        }
        OntologyIndex {
            type_predicate: well_known.rdf_type,
            subclass_predicate: well_known.subclass_of,
            direct_types,
            superclasses,
            subclasses,
            is_class,
        }
    }

    pub fn type_predicate(&self) -> Option<SymbolId> {
        self.type_predicate
    }

    pub fn subclass_predicate(&self) -> Option<SymbolId> {
        self.subclass_predicate
    }

    pub fn top(&self) -> ClassId {
        ClassId::TOP
    }

    pub fn direct_types(&self, v: VertexId) -> &[ClassId] {
        self.direct_types.get(v.index()).map_or(&[], Vec::as_slice)
    }

    pub fn direct_superclasses(&self, c: ClassId) -> &[ClassId] {
        c.vertex()
            .and_then(|v| self.superclasses.get(v.index()))
            .map_or(&[], Vec::as_slice)
    }

    pub fn is_class(&self, v: VertexId) -> bool {
        self.is_class.get(v.index()).copied().unwrap_or(false)
    }

    pub fn classes(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.is_class
            .iter()
            .enumerate()
            .filter(|(_, c)| **c)
            .map(|(i, _)| ClassId(i as u32))
    }

    /// Visits every class reachable from `v` by one type arc and then up to
    /// `max_level - 1` subClassOf arcs, passing its minimum level.
    fn walk_levels(
        &self,
        v: VertexId,
        max_level: Option<usize>,
        mut visit: impl FnMut(ClassId, usize),
    ) {
        let mut seen: Vec<ClassId> = Vec::new();
        let mut queue: VecDeque<(ClassId, usize)> = VecDeque::new();
        if max_level == Some(0) {
            return;
        }
        for &c in self.direct_types(v) {
            if !seen.contains(&c) {
                seen.push(c);
                queue.push_back((c, 1));
            }
        }
        while let Some((c, level)) = queue.pop_front() {
            visit(c, level);
            if max_level.is_some_and(|m| level >= m) {
                continue;
            }
            for &sup in self.direct_superclasses(c) {
                if !seen.contains(&sup) {
                    seen.push(sup);
                    queue.push_back((sup, level + 1));
                }
            }
        }
    }

    /// `inst(v, T, t, b_gen)`.
    pub fn instantiates(&self, v: VertexId, class: ClassId, t: usize, b_gen: &ClassMask) -> bool {
        if b_gen.contains(class) {
            return false;
        }
        if class.is_top() {
            return true;
        }
        let mut found = false;
        self.walk_levels(v, Some(t), |c, _| found |= c == class);
        found
    }

    /// Every class `T` with `inst(v, T, t, b_gen)`, sorted (top last).
    pub fn generalizations(&self, v: VertexId, t: usize, b_gen: &ClassMask) -> Vec<ClassId> {
        let mut out = Vec::new();
        self.walk_levels(v, Some(t), |c, _| {
            if !b_gen.contains(c) {
                out.push(c);
            }
        });
        if !b_gen.contains(ClassId::TOP) {
            out.push(ClassId::TOP);
        }
        out.sort_unstable();
        out
    }

    /// Deepest minimum level over all classes `v` instantiates.
    pub fn max_level(&self, v: VertexId) -> usize {
        let mut max = 0;
        self.walk_levels(v, None, |_, l| max = max.max(l));
        max
    }

    /// Unbounded membership: some class reached through one type arc and any
    /// number of subClassOf arcs is in `b_exp`.
    pub fn is_instance_of_blacklisted(&self, v: VertexId, b_exp: &ClassMask) -> bool {
        if b_exp.is_empty() {
            return false;
        }
        let mut hit = false;
        self.walk_levels(v, None, |c, _| hit |= b_exp.contains(c));
        hit
    }

    /// Vertices that are not allowed to be reached under `b_exp`, computed
    /// for the whole graph at once by walking the hierarchy downwards from
    /// the blacklisted classes.
    pub fn blacklisted_instances(&self, b_exp: &ClassMask) -> Vec<bool> {
        let n = self.direct_types.len();
        if b_exp.is_empty() {
            return vec![false; n];
        }
        let mut tainted = vec![false; n];
        let mut queue: VecDeque<usize> = (0..n)
            .filter(|&i| b_exp.contains(ClassId(i as u32)))
            .collect();
        for &i in &queue {
            tainted[i] = true;
        }
        while let Some(c) = queue.pop_front() {
            for sub in &self.subclasses[c] {
                let i = sub.0 as usize;
                if !tainted[i] {
                    tainted[i] = true;
                    queue.push_back(i);
                }
            }
        }
        self.direct_types
            .iter()
            .map(|types| types.iter().any(|c| tainted[c.0 as usize]))
            .collect()
    }

    /// `class` and every class reachable from it through subClassOf arcs,
    /// plus top. Sorted.
    pub fn superclass_closure(&self, class: ClassId) -> Vec<ClassId> {
        let mut out = vec![class];
        let mut i = 0;
        while i < out.len() {
            for &s in self.direct_superclasses(out[i]) {
                if !out.contains(&s) {
                    out.push(s);
                }
            }
            i += 1;
        }
        if !out.contains(&ClassId::TOP) {
            out.push(ClassId::TOP);
        }
        out.sort_unstable();
        out
    }

    /// All vertices that instantiate `class` at any level.
    pub fn instances_of(&self, class: ClassId) -> Vec<VertexId> {
        let n = self.direct_types.len();
        if class.is_top() {
            return (0..n as u32).map(VertexId).collect();
        }
        let mut below = vec![false; n];
        let mut stack = vec![class.0 as usize];
        below[class.0 as usize] = true;
        while let Some(c) = stack.pop() {
            for sub in &self.subclasses[c] {
                let i = sub.0 as usize;
                if !below[i] {
                    below[i] = true;
                    stack.push(i);
                }
            }
        }
        (0..n)
            .filter(|&v| self.direct_types[v].iter().any(|c| below[c.0 as usize]))
            .map(|v| VertexId(v as u32))
            .collect()
    }
}
