//! Final feature set and the seed × feature matrix.
//!
//! Output files of [`emit_matrix`]:
//! - `features.tsv`: `col`, `kind`, `feature`, `support` (header line first)
//! - `rows.tsv`: `row`, `seed` (header line first)
//! - `matrix.coo`: one `row<TAB>col` line per true cell, sorted

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::canonical::{CanonicalGraph, VertexId};
use crate::config::FilterConfig;
use crate::error::{Error, Result};
use crate::neighbors::{NeighborhoodResult, SupportSet};
use crate::ontology::{ClassMask, OntologyIndex};
use crate::pathfeat::{Element, FeatId};
use crate::pathmine::PathMiningResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Neighbor,
    Path,
    Pattern,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureKind::Neighbor => "neighbor",
            FeatureKind::Path => "path",
            FeatureKind::Pattern => "pattern",
        })
    }
}

impl FromStr for FeatureKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "neighbor" => Ok(FeatureKind::Neighbor),
            "path" => Ok(FeatureKind::Path),
            "pattern" => Ok(FeatureKind::Pattern),
            other => Err(format!("unknown feature kind {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub kind: FeatureKind,
    pub rendered: String,
    pub support: SupportSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureMatrix {
    /// Seed URIs (canonical labels) in row order.
    pub rows: Vec<String>,
    pub columns: Vec<Column>,
}

impl FeatureMatrix {
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.columns[col].support.contains(row)
    }

    /// True cells as sorted (row, col) pairs.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.support.iter().map(move |r| (r, c)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn count(&self, kind: FeatureKind) -> usize {
        self.columns.iter().filter(|c| c.kind == kind).count()
    }
}

/// Named class groups resolved against the graph, with the selected ones
/// combined disjunctively. No selected group means no filtering.
#[derive(Clone, Debug, Default)]
pub struct DomainFilter {
    mask: Option<ClassMask>,
    /// Per vertex: instantiates some selected class at any level.
    member: Vec<bool>,
}

impl DomainFilter {
    pub fn identity() -> Self {
        DomainFilter::default()
    }

    pub fn resolve(cfg: &FilterConfig, g: &CanonicalGraph, ont: &OntologyIndex) -> Result<Self> {
        if cfg.selected.is_empty() {
            return Ok(Self::identity());
        }
        let mut patterns = crate::config::UriPatterns::default();
        for name in &cfg.selected {
            let group = cfg
                .groups
                .get(name)
                .ok_or_else(|| Error::Config(format!("filter selects unknown group {name:?}")))?;
            patterns.0.extend(group.0.iter().cloned());
        }
        let mask = ClassMask::from_patterns(g, &patterns);
        let member = ont.blacklisted_instances(&mask);
        Ok(DomainFilter {
            mask: Some(mask),
            member,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.mask.is_none()
    }

    pub fn keeps_neighbor(&self, v: VertexId) -> bool {
        self.mask.is_none() || self.member[v.index()]
    }

    pub fn keeps_element(&self, e: Element) -> bool {
        match (&self.mask, e) {
            (None, _) => true,
            (Some(_), Element::Individual(v)) => self.member[v.index()],
            (Some(mask), Element::Class(c)) => mask.contains(c),
        }
    }
}

/// Neighbors and path features left after filtering, in column order.
#[derive(Clone, Debug, Default)]
pub struct FilteredFeatures {
    pub neighbors: Vec<VertexId>,
    pub paths: Vec<FeatId>,
}

pub fn apply_filter(
    g: &CanonicalGraph,
    nres: &NeighborhoodResult,
    paths: &PathMiningResult,
    filter: &DomainFilter,
) -> FilteredFeatures {
    let mut neighbors: Vec<VertexId> = nres
        .interesting_neighbors
        .iter()
        .copied()
        .filter(|&v| filter.keeps_neighbor(v))
        .collect();
    neighbors.sort_by(|a, b| g.label(*a).cmp(g.label(*b)));
    let paths = paths
        .features
        .iter()
        .copied()
        .filter(|&id| {
            filter.is_identity()
                || paths
                    .table
                    .atoms(id)
                    .iter()
                    .any(|a| filter.keeps_element(a.element))
        })
        .collect();
    FilteredFeatures { neighbors, paths }
}

pub fn build_matrix(
    g: &CanonicalGraph,
    nres: &NeighborhoodResult,
    paths: &PathMiningResult,
    selected: &FilteredFeatures,
) -> FeatureMatrix {
    let rows = nres.seeds.iter().map(|&s| g.label(s).to_string()).collect();
    let mut columns: Vec<Column> = selected
        .neighbors
        .iter()
        .map(|&v| Column {
            kind: FeatureKind::Neighbor,
            rendered: g.label(v).to_string(),
            support: nres.support[&v].clone(),
        })
        .collect();
    columns.extend(selected.paths.iter().map(|&id| Column {
        kind: if paths.table.is_pattern(id) {
            FeatureKind::Pattern
        } else {
            FeatureKind::Path
        },
        rendered: paths.table.render(id, g),
        support: paths.support(id).clone(),
    }));
    FeatureMatrix { rows, columns }
}

pub fn emit_matrix(m: &FeatureMatrix, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    let write = |name: &str, body: &dyn Fn(&mut dyn Write) -> std::io::Result<()>| -> Result<()> {
        let path = out_dir.join(name);
        let ctx = || format!("writing {}", path.display());
        let file = fs::File::create(&path).map_err(|e| Error::io(ctx(), e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(ctx(), e))
    };
    write("features.tsv", &|w| {
        writeln!(w, "col\tkind\tfeature\tsupport")?;
        for (i, c) in m.columns.iter().enumerate() {
            writeln!(w, "{i}\t{}\t{}\t{}", c.kind, c.rendered, c.support.count())?;
        }
        Ok(())
    })?;
    write("rows.tsv", &|w| {
        writeln!(w, "row\tseed")?;
        for (i, r) in m.rows.iter().enumerate() {
            writeln!(w, "{i}\t{r}")?;
        }
        Ok(())
    })?;
    write("matrix.coo", &|w| {
        for (r, c) in m.cells() {
            writeln!(w, "{r}\t{c}")?;
        }
        Ok(())
    })
}

/// Reads back the files written by [`emit_matrix`].
pub fn read_matrix(dir: &Path) -> Result<FeatureMatrix> {
    let read = |name: &str| {
        let path = dir.join(name);
        fs::read_to_string(&path)
            .map(|text| (path.clone(), text))
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))
    };
    let bad = |path: &Path, line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let (path, text) = read("rows.tsv")?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let (_, seed) = line
            .split_once('\t')
            .ok_or_else(|| bad(&path, i + 1, "expected `row<TAB>seed`".into()))?;
        rows.push(seed.to_string());
    }

    let (path, text) = read("features.tsv")?;
    let mut columns = Vec::new();
    let mut declared = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split('\t').collect();
        let [_, kind, rendered, support] = fields[..] else {
            return Err(bad(
                &path,
                i + 1,
                "expected four tab-separated fields".into(),
            ));
        };
        let kind = kind.parse().map_err(|m| bad(&path, i + 1, m))?;
        let support: usize = support
            .parse()
            .map_err(|_| bad(&path, i + 1, "bad support".into()))?;
        declared.push(support);
        columns.push(Column {
            kind,
            rendered: rendered.to_string(),
            support: SupportSet::empty(rows.len()),
        });
    }

    let (path, text) = read("matrix.coo")?;
    for (i, line) in text.lines().enumerate() {
        let parsed = line
            .split_once('\t')
            .and_then(|(r, c)| Some((r.parse::<usize>().ok()?, c.parse::<usize>().ok()?)));
        match parsed {
            Some((r, c)) if r < rows.len() && c < columns.len() => columns[c].support.insert(r),
            _ => return Err(bad(&path, i + 1, format!("bad cell {line:?}"))),
        }
    }
    for (c, (col, n)) in columns.iter().zip(declared).enumerate() {
        if col.support.count() != n {
            return Err(Error::Invariant(format!(
                "column {c} declares support {n} but has {} cells",
                col.support.count()
            )));
        }
    }
    Ok(FeatureMatrix { rows, columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::UriPatterns;
    use crate::fixtures::Fig1;
    use crate::neighbors::mine_neighbors;
    use crate::pathmine::mine_path_features;

    fn mined(f: &Fig1) -> (NeighborhoodResult, PathMiningResult) {
        let cfg = Fig1::config();
        let nres = mine_neighbors(&f.graph, &f.ont, &cfg).unwrap();
        let paths = mine_path_features(&f.graph, &f.ont, &nres, &cfg).unwrap();
        (nres, paths)
    }

    fn filter(f: &Fig1, groups: &[(&str, &[&str])], selected: &[&str]) -> DomainFilter {
        let cfg = FilterConfig {
            groups: groups
                .iter()
                .map(|(n, cls)| {
                    (
                        n.to_string(),
                        UriPatterns::new(cls.iter().map(|c| Fig1::uri(c))),
                    )
                })
                .collect(),
            selected: selected.iter().map(|s| s.to_string()).collect(),
        };
        DomainFilter::resolve(&cfg, &f.graph, &f.ont).unwrap()
    }

    #[test]
    fn group_filter_on_fig2() {
        let f = Fig1::new();
        let (nres, paths) = mined(&f);
        let all = apply_filter(&f.graph, &nres, &paths, &DomainFilter::identity());
        assert_eq!((all.neighbors.len(), all.paths.len()), (2, 4));

        let kept = apply_filter(
            &f.graph,
            &nres,
            &paths,
            &filter(&f, &[("g", &["T3"])], &["g"]),
        );
        let rendered: Vec<String> = kept
            .paths
            .iter()
            .map(|&id| paths.table.render(id, &f.graph))
            .collect();
        assert_eq!(rendered.len(), 1);
        assert!(rendered[0].ends_with(&format!("({})", Fig1::uri("v6"))));
        assert!(kept.neighbors.is_empty());

        let none = apply_filter(
            &f.graph,
            &nres,
            &paths,
            &filter(&f, &[("g", &["nothing"])], &["g"]),
        );
        assert!(none.neighbors.is_empty() && none.paths.is_empty());
    }

    #[test]
    fn unknown_group_is_a_config_error() {
        let f = Fig1::new();
        let cfg = FilterConfig {
            selected: vec!["x".into()],
            ..Default::default()
        };
        assert!(matches!(
            DomainFilter::resolve(&cfg, &f.graph, &f.ont),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn emission_round_trips() {
        let f = Fig1::new();
        let (nres, paths) = mined(&f);
        let sel = apply_filter(&f.graph, &nres, &paths, &DomainFilter::identity());
        let m = build_matrix(&f.graph, &nres, &paths, &sel);
        let dir = tempfile::tempdir().unwrap();
        emit_matrix(&m, dir.path()).unwrap();
        assert_eq!(read_matrix(dir.path()).unwrap(), m);
        assert_eq!(m.count(FeatureKind::Neighbor), 2);
        assert_eq!(m.count(FeatureKind::Pattern), 3);
        assert_eq!(m.count(FeatureKind::Path), 1);
    }
}
