//! Dense integer interning.
//!
//! Every URI and every path feature handled by the miner is replaced by a
//! small integer as early as possible. Ids are handed out in insertion order
//! and never reused, so a table of `n` entries always holds exactly the ids
//! `0..n`.

use std::fmt;
use std::hash::Hash;
use std::io::Write;

use indexmap::IndexSet;

use crate::error::{Error, Result};

/// Index into one of the symbol tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct SymbolId(pub u32);

impl SymbolId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Generic insertion-ordered interner backed by an `IndexSet`: the set
/// position is the id.
#[derive(Clone, Debug)]
pub struct Interner<T: Hash + Eq> {
    set: IndexSet<T>,
}

impl<T: Hash + Eq> Default for Interner<T> {
    fn default() -> Self {
        Interner {
            set: IndexSet::new(),
        }
    }
}

impl<T: Hash + Eq> Interner<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, value: T) -> SymbolId {
        let (idx, _) = self.set.insert_full(value);
        SymbolId(u32::try_from(idx).expect("more than u32::MAX symbols"))
    }

    pub fn get<Q>(&self, value: &Q) -> Option<SymbolId>
    where
        T: std::borrow::Borrow<Q>,
        Q: Hash + Eq + ?Sized,
    {
        self.set.get_index_of(value).map(|i| SymbolId(i as u32))
    }

    pub fn resolve(&self, id: SymbolId) -> Option<&T> {
        self.set.get_index(id.index())
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SymbolId, &T)> {
        self.set
            .iter()
            .enumerate()
            .map(|(i, v)| (SymbolId(i as u32), v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Vertex,
    Predicate,
    Feature,
}

/// String interner for URIs (and blank node labels).
#[derive(Clone, Debug)]
pub struct SymbolTable {
    kind: SymbolKind,
    inner: Interner<Box<str>>,
}

impl SymbolTable {
    pub fn new(kind: SymbolKind) -> Self {
        SymbolTable {
            kind,
            inner: Interner::new(),
        }
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn intern(&mut self, s: &str) -> Result<SymbolId> {
        if s.is_empty() {
            return Err(Error::InvalidInput("cannot intern an empty string".into()));
        }
        if let Some(id) = self.inner.get(s) {
            return Ok(id);
        }
        Ok(self.inner.intern(s.into()))
    }

    /// Looks a string up without interning it.
    pub fn get(&self, s: &str) -> Option<SymbolId> {
        self.inner.get(s)
    }

    pub fn resolve(&self, id: SymbolId) -> Result<&str> {
        self.inner
            .resolve(id)
            .map(|s| &**s)
            .ok_or_else(|| Error::NotFound(format!("{:?} symbol {id}", self.kind)))
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SymbolId, &str)> {
        self.inner.iter().map(|(id, s)| (id, &**s))
    }

    /// Writes `id<TAB>string` lines ordered by id.
    pub fn dump_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (id, s) in self.iter() {
            writeln!(out, "{id}\t{s}")?;
        }
        Ok(())
    }
}

/// The vertex and predicate tables of one input graph.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    pub vertices: SymbolTable,
    pub predicates: SymbolTable,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary {
            vertices: SymbolTable::new(SymbolKind::Vertex),
            predicates: SymbolTable::new(SymbolKind::Predicate),
        }
    }
}
