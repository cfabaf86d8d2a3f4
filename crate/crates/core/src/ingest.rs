//! Streaming loader for the N-Triples subset accepted as input.
//!
//! Literal objects are counted and dropped together with their arc; the
//! subject of such a triple is still kept as a vertex.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::symbols::{SymbolId, Vocabulary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RawArc {
    pub source: SymbolId,
    pub predicate: SymbolId,
    pub target: SymbolId,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct IngestCounts {
    pub triples: usize,
    pub arcs: usize,
    pub dropped_literals: usize,
    pub duplicates: usize,
}

/// Directed labeled multigraph as read from disk. Vertex ids are the ids of
/// `vocab.vertices`, so the vertex set is always `0..vocab.vertices.len()`.
#[derive(Clone, Debug, Default)]
pub struct RawGraph {
    pub vocab: Vocabulary,
    pub arcs: Vec<RawArc>,
    pub counts: IngestCounts,
}

impl RawGraph {
    pub fn vertex_count(&self) -> usize {
        self.vocab.vertices.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = SymbolId> {
        (0..self.vertex_count() as u32).map(SymbolId)
    }

    /// Builds a graph from already-split IRI triples. Used by generators and
    /// tests; duplicate triples are collapsed like in `load_triples`.
    pub fn from_iri_triples<'a, I>(triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str, &'a str)>,
    {
        let mut b = Builder::default();
        for (s, p, o) in triples {
            b.push(s, p, Object::Node(o))?;
        }
        Ok(b.finish())
    }
}

#[derive(Default)]
struct Builder {
    graph: RawGraph,
    seen: HashSet<RawArc>,
}

enum Object<'a> {
    Node(&'a str),
    Literal,
}

impl Builder {
    fn push(&mut self, s: &str, p: &str, o: Object<'_>) -> Result<()> {
        let g = &mut self.graph;
        g.counts.triples += 1;
        let source = g.vocab.vertices.intern(s)?;
        let predicate = g.vocab.predicates.intern(p)?;
        match o {
            Object::Literal => g.counts.dropped_literals += 1,
            Object::Node(o) => {
                let target = g.vocab.vertices.intern(o)?;
                let arc = RawArc {
                    source,
                    predicate,
                    target,
                };
                if self.seen.insert(arc) {
                    g.arcs.push(arc);
                } else {
                    g.counts.duplicates += 1;
                }
            }
        }
        Ok(())
    }

    fn finish(mut self) -> RawGraph {
        self.graph.counts.arcs = self.graph.arcs.len();
        self.graph
    }
}

pub fn load_triples(path: &Path) -> Result<RawGraph> {
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    read_triples(file, path)
}

/// Parses N-Triples from any reader; `origin` only labels error messages.
pub fn read_triples<R: Read>(reader: R, origin: &Path) -> Result<RawGraph> {
    let mut b = Builder::default();
    let reader = BufReader::new(reader);
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", origin.display()), e))?;
        let lineno = idx + 1;
        let perr = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: lineno,
            message,
        };
        let Some((s, p, o)) = parse_line(&line).map_err(perr)? else {
            continue;
        };
        b.push(s, p, o).map_err(|e| perr(e.to_string()))?;
    }
    Ok(b.finish())
}

/// Returns `None` for blank and comment lines.
fn parse_line(line: &str) -> std::result::Result<Option<(&str, &str, Object<'_>)>, String> {
    let rest = line.trim();
    if rest.is_empty() || rest.starts_with('#') {
        return Ok(None);
    }
    let (subject, rest) = node(rest).ok_or("expected IRI or blank node as subject")?;
    let (predicate, rest) = iri(rest.trim_start()).ok_or("expected IRI as predicate")?;
    let rest = rest.trim_start();
    let (object, rest) = if rest.starts_with('"') {
        (Object::Literal, literal(rest)?)
    } else {
        let (o, rest) = node(rest).ok_or("expected IRI, blank node or literal as object")?;
        (Object::Node(o), rest)
    };
    let rest = rest.trim_start();
    let Some(tail) = rest.strip_prefix('.') else {
        return Err("missing terminating '.'".into());
    };
    let tail = tail.trim_start();
    if !(tail.is_empty() || tail.starts_with('#')) {
        return Err(format!("unexpected trailing content {tail:?}"));
    }
    Ok(Some((subject, predicate, object)))
}

fn iri(s: &str) -> Option<(&str, &str)> {
    let body = s.strip_prefix('<')?;
    let end = body.find('>')?;
    let value = &body[..end];
    if value.is_empty() || value.contains(char::is_whitespace) {
        return None;
    }
    Some((value, &body[end + 1..]))
}

fn node(s: &str) -> Option<(&str, &str)> {
    if s.starts_with("_:") {
        let end = s.find(char::is_whitespace).unwrap_or(s.len());
        if end <= 2 {
            return None;
        }
        Some((&s[..end], &s[end..]))
    } else {
        iri(s)
    }
}

/// Skips a quoted literal with its optional language tag or datatype.
fn literal(s: &str) -> std::result::Result<&str, String> {
    let bytes = s.as_bytes();
    let mut i = 1;
    loop {
        match bytes.get(i) {
            None => return Err("unterminated literal".into()),
            Some(b'\\') => i += 2,
            Some(b'"') => break,
            Some(_) => i += 1,
        }
    }
    let rest = &s[i + 1..];
    if let Some(tag) = rest.strip_prefix('@') {
        let end = tag
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
            .unwrap_or(tag.len());
        if end == 0 {
            return Err("empty language tag".into());
        }
        Ok(&tag[end..])
    } else if let Some(dt) = rest.strip_prefix("^^") {
        iri(dt)
            .map(|(_, r)| r)
            .ok_or_else(|| "malformed datatype IRI".into())
    } else {
        Ok(rest)
    }
}

/// Seeds read from a list file, split by whether they exist in the graph.
#[derive(Clone, Debug, Default)]
pub struct SeedList {
    pub ids: Vec<SymbolId>,
    pub missing: Vec<String>,
}

/// Reads one URI per line (angle brackets optional). URIs that are not
/// vertices of the graph are reported in `missing` and logged, not rejected.
pub fn load_seed_list(path: &Path, vocab: &Vocabulary) -> Result<SeedList> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_seed_list(&text, vocab, path)
}

pub fn parse_seed_list(text: &str, vocab: &Vocabulary, origin: &Path) -> Result<SeedList> {
    let mut out = SeedList::default();
    let mut any = false;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        any = true;
        let uri = line
            .strip_prefix('<')
            .and_then(|l| l.strip_suffix('>'))
            .unwrap_or(line);
        match vocab.vertices.get(uri) {
            Some(id) => out.ids.push(id),
            None => {
                log::warn!("seed {uri} does not occur in the graph; skipped");
                out.missing.push(uri.to_string());
            }
        }
    }
    if !any {
        return Err(Error::InvalidInput(format!(
            "seed list {} is empty",
            PathBuf::from(origin).display()
        )));
    }
    Ok(out)
}
