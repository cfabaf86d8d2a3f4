//! Mining parameters and their validation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const OWL_SAMEAS: &str = "http://www.w3.org/2002/07/owl#sameAs";

/// Label of the synthetic top class in blacklists, filters and rendered
/// features.
pub const TOP_LABEL: &str = "⊤";

/// An upper bound that may be unbounded (`inf`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Limit {
    Finite(usize),
    Infinite,
}

impl Limit {
    #[inline]
    pub fn exceeded_by(self, value: usize) -> bool {
        match self {
            Limit::Finite(max) => value > max,
            Limit::Infinite => false,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Limit::Infinite)
    }
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::Finite(n) => write!(f, "{n}"),
            Limit::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Limit {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "+inf" | "infinity" | "∞" => Ok(Limit::Infinite),
            other => other
                .parse()
                .map(Limit::Finite)
                .map_err(|_| format!("expected a non-negative integer or `inf`, got {other:?}")),
        }
    }
}

impl Serialize for Limit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Limit::Finite(n) => s.serialize_u64(*n as u64),
            Limit::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Limit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(Limit::Finite(n as usize)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// One blacklist or filter entry: an exact URI, or a URI prefix written with
/// a trailing `*`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum UriPattern {
    Exact(String),
    Prefix(String),
}

impl UriPattern {
    pub fn parse(s: &str) -> Self {
        match s.strip_suffix('*') {
            Some(prefix) => UriPattern::Prefix(prefix.to_string()),
            None => UriPattern::Exact(s.to_string()),
        }
    }

    pub fn matches(&self, uri: &str) -> bool {
        match self {
            UriPattern::Exact(e) => e == uri,
            UriPattern::Prefix(p) => uri.starts_with(p.as_str()),
        }
    }
}

impl fmt::Display for UriPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UriPattern::Exact(e) => f.write_str(e),
            UriPattern::Prefix(p) => write!(f, "{p}*"),
        }
    }
}

/// A list of URI patterns, used for the three blacklists and for filter
/// groups.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UriPatterns(pub Vec<UriPattern>);

impl UriPatterns {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        UriPatterns(
            entries
                .into_iter()
                .map(|s| UriPattern::parse(s.as_ref()))
                .collect(),
        )
    }

    /// One entry per line; blank lines and `#` comments are skipped.
    pub fn parse_lines(text: &str) -> Self {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| {
                    l.strip_prefix('<')
                        .and_then(|l| l.strip_suffix('>'))
                        .unwrap_or(l)
                }),
        )
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Ok(Self::parse_lines(&text))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn matches(&self, uri: &str) -> bool {
        self.0.iter().any(|p| p.matches(uri))
    }

    pub fn matches_top(&self) -> bool {
        self.matches(TOP_LABEL)
    }
}

impl Serialize for UriPatterns {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|p| p.to_string()))
    }
}

impl<'de> Deserialize<'de> for UriPatterns {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        Ok(UriPatterns::new(v))
    }
}

/// Class-membership filter applied after mining: named groups of class
/// URIs/prefixes and the selection combined disjunctively.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub groups: BTreeMap<String, UriPatterns>,
    pub selected: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiningConfig {
    /// Maximum length of paths and path patterns.
    pub k: usize,
    /// Maximum level for generalization in class hierarchies.
    pub t: usize,
    /// Maximum (out-)degree of a vertex that may still be expanded.
    pub d: Limit,
    pub l_min: usize,
    pub l_max: Limit,
    /// Traverse arcs in both directions.
    pub u: bool,
    pub b_predicates: UriPatterns,
    pub b_exp_types: UriPatterns,
    pub b_gen_types: UriPatterns,
    pub type_uri: String,
    pub subclass_of_uri: String,
    pub sameas_uri: String,
    pub filter: FilterConfig,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            k: 3,
            t: 2,
            d: Limit::Finite(500),
            l_min: 5,
            l_max: Limit::Infinite,
            u: false,
            b_predicates: UriPatterns::new([RDF_TYPE, RDFS_SUBCLASS_OF]),
            b_exp_types: UriPatterns::default(),
            b_gen_types: UriPatterns::default(),
            type_uri: RDF_TYPE.to_string(),
            subclass_of_uri: RDFS_SUBCLASS_OF.to_string(),
            sameas_uri: OWL_SAMEAS.to_string(),
            filter: FilterConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Generalizing above this many levels without a `b_gen_types` list usually
/// drags in very generic upper-ontology classes.
const DEEP_GENERALIZATION: usize = 3;

pub fn validate_config(cfg: &MiningConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut error = |m: String| {
        out.push(Diagnostic {
            severity: Severity::Error,
            message: m,
        })
    };
    if cfg.k == 0 {
        error("k must be at least 1".into());
    }
    if cfg.l_max.exceeded_by(cfg.l_min) {
        error(format!(
            "l_min ({}) exceeds l_max ({})",
            cfg.l_min, cfg.l_max
        ));
    }
    for name in &cfg.filter.selected {
        if !cfg.filter.groups.contains_key(name) {
            error(format!("filter selects unknown group {name:?}"));
        }
    }
    for (label, uri) in [
        ("type_uri", &cfg.type_uri),
        ("subclass_of_uri", &cfg.subclass_of_uri),
        ("sameas_uri", &cfg.sameas_uri),
    ] {
        if uri.is_empty() {
            error(format!("{label} must not be empty"));
        }
    }
    let mut warn = |m: String| {
        out.push(Diagnostic {
            severity: Severity::Warning,
            message: m,
        })
    };
    if cfg.t > DEEP_GENERALIZATION && cfg.b_gen_types.is_empty() {
        warn(format!(
            "t = {} with an empty b_gen_types list; very general classes will be used in patterns",
            cfg.t
        ));
    }
    if cfg.d.is_infinite() {
        warn("d = inf disables the hub cut-off; neighborhoods may explode".into());
    }
    if cfg.l_min == 0 {
        warn("l_min = 0 accepts every reachable feature".into());
    }
    out
}

impl MiningConfig {
    /// Fails on the first error-level diagnostic.
    pub fn check(&self) -> Result<Vec<Diagnostic>> {
        let diags = validate_config(self);
        if let Some(e) = diags.iter().find(|d| d.severity == Severity::Error) {
            return Err(Error::Config(e.message.clone()));
        }
        Ok(diags)
    }

    pub fn from_toml_value(value: serde_json::Value) -> Result<Self> {
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }
}
