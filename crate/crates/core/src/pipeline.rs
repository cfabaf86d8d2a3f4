//! End-to-end driver: ingest, canonicalize, mine neighbors, mine paths,
//! filter, emit.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::canonical::{canonicalize, CanonicalGraph, CanonicalReport, WellKnown};
use crate::config::{MiningConfig, Severity};
use crate::error::{Error, Result};
use crate::features::{
    apply_filter, build_matrix, emit_matrix, DomainFilter, FeatureKind, FeatureMatrix,
    FilteredFeatures,
};
use crate::ingest::{load_seed_list, load_triples, parse_seed_list, IngestCounts, RawGraph};
use crate::neighbors::{mine_neighbors, NeighborhoodResult};
use crate::ontology::{ClassId, OntologyIndex};
use crate::pathmine::{mine_path_features_with, IterationTrace, MineOptions, PathMiningResult};

#[derive(Clone, Debug)]
pub enum SeedSource {
    /// One URI per line.
    File(PathBuf),
    /// Seed list given inline, same format as the file.
    List(String),
    /// Every instance (at any level) of this class.
    Class(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Ingest,
    Canonicalize,
    Neighbors,
    Paths,
    Filter,
    Emit,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        f.write_str(s.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage}: {error}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub error: Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SeedSummary {
    pub requested: usize,
    pub used: usize,
    pub missing: Vec<String>,
    pub merged: Vec<Vec<String>>,
    /// Seeds that are themselves classes.
    pub class_seeds: Vec<String>,
    pub from_class: Option<String>,
}

/// Graph and seeds ready for mining.
pub struct Prepared {
    pub graph: CanonicalGraph,
    pub ont: OntologyIndex,
    pub well_known: WellKnown,
    pub seeds: SeedSummary,
}

pub fn prepare(raw: RawGraph, source: &SeedSource, cfg: &MiningConfig) -> Result<Prepared> {
    let well_known = WellKnown::resolve(
        &raw.vocab,
        &cfg.sameas_uri,
        &cfg.type_uri,
        &cfg.subclass_of_uri,
    );
    let mut summary = SeedSummary::default();
    let (graph, ont) = match source {
        SeedSource::File(_) | SeedSource::List(_) => {
            let list = match source {
                SeedSource::File(path) => load_seed_list(path, &raw.vocab)?,
                SeedSource::List(text) => parse_seed_list(text, &raw.vocab, Path::new("<seeds>"))?,
                SeedSource::Class(_) => unreachable!(),
            };
            summary.requested = list.ids.len() + list.missing.len();
            summary.missing = list.missing;
            let graph = canonicalize(raw, &well_known, &list.ids)?;
            let ont = OntologyIndex::build(&graph, &well_known);
            (graph, ont)
        }
        SeedSource::Class(uri) => {
            let mut graph = canonicalize(raw, &well_known, &[])?;
            let ont = OntologyIndex::build(&graph, &well_known);
            let class = graph
                .vertex_by_uri(uri)
                .filter(|&v| ont.is_class(v))
                .ok_or_else(|| Error::NotFound(format!("seed class {uri}")))?;
            let seeds = ont.instances_of(ClassId::named(class));
            summary.requested = seeds.len();
            summary.from_class = Some(uri.clone());
            graph.set_seeds(seeds);
            (graph, ont)
        }
    };
    summary.used = graph.seeds().len();
    summary.merged = graph.report.merged_seeds.clone();
    summary.class_seeds = graph
        .seeds()
        .iter()
        .filter(|&&s| ont.is_class(s))
        .map(|&s| graph.label(s).to_string())
        .collect();
    for c in &summary.class_seeds {
        log::warn!("seed {c} is a class");
    }
    if summary.used == 0 {
        return Err(Error::InvalidInput(
            "none of the seeds occurs in the graph".into(),
        ));
    }
    Ok(Prepared {
        graph,
        ont,
        well_known,
        seeds: summary,
    })
}

pub struct Mined {
    pub neighbors: NeighborhoodResult,
    pub paths: PathMiningResult,
    pub filtered: FilteredFeatures,
    pub matrix: FeatureMatrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub millis: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BeforeLimits {
    pub neighbors: usize,
    pub types: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AfterLimits {
    pub neighbors: usize,
    pub types: usize,
    pub path_features_in_f: usize,
    pub path_features_generated: usize,
    pub paths_in_f: usize,
    pub patterns_in_f: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AfterFilter {
    pub neighbors: usize,
    pub path_features_in_f: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RunReport {
    pub config: MiningConfig,
    pub graph: Option<PathBuf>,
    pub ingest: IngestCounts,
    pub canonical: CanonicalReport,
    pub seeds: SeedSummary,
    pub hubs: usize,
    pub before_limits: BeforeLimits,
    pub after_limits: AfterLimits,
    pub after_filter: AfterFilter,
    pub total_in_f: usize,
    pub iterations: Vec<IterationTrace>,
    pub timings: Vec<StageTiming>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Clock(Vec<StageTiming>);

impl Clock {
    fn time<T>(&mut self, stage: Stage, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.push(StageTiming {
            stage,
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
        out
    }
}

/// Mines a prepared graph and fills the counters of `report`.
pub fn mine(
    prep: &Prepared,
    cfg: &MiningConfig,
    opts: MineOptions,
    report: &mut RunReport,
) -> std::result::Result<Mined, StageError> {
    let mut clock = Clock(Vec::new());
    let (g, ont) = (&prep.graph, &prep.ont);
    let neighbors = clock
        .time(Stage::Neighbors, || mine_neighbors(g, ont, cfg))
        .at(Stage::Neighbors)?;
    let paths = clock
        .time(Stage::Paths, || {
            mine_path_features_with(g, ont, &neighbors, cfg, opts)
        })
        .at(Stage::Paths)?;
    let filter = DomainFilter::resolve(&cfg.filter, g, ont).at(Stage::Filter)?;
    let (filtered, matrix) = clock.time(Stage::Filter, || {
        let filtered = apply_filter(g, &neighbors, &paths, &filter);
        let matrix = build_matrix(g, &neighbors, &paths, &filtered);
        (filtered, matrix)
    });

    report.hubs = neighbors.hubs.len();
    report.before_limits = BeforeLimits {
        neighbors: neighbors.support.len(),
        types: neighbors.instantiated_types,
    };
    let patterns = paths
        .features
        .iter()
        .filter(|&&id| paths.table.is_pattern(id))
        .count();
    report.after_limits = AfterLimits {
        neighbors: neighbors.interesting_neighbors.len(),
        types: neighbors.interesting_types.len(),
        path_features_in_f: paths.features.len(),
        path_features_generated: paths.generated,
        paths_in_f: paths.features.len() - patterns,
        patterns_in_f: patterns,
    };
    report.after_filter = AfterFilter {
        neighbors: matrix.count(FeatureKind::Neighbor),
        path_features_in_f: matrix.count(FeatureKind::Path) + matrix.count(FeatureKind::Pattern),
    };
    report.total_in_f = matrix.columns.len();
    report.iterations = paths.trace.clone();
    report.warnings.extend(paths.warnings.iter().cloned());
    report.timings.extend(clock.0);
    Ok(Mined {
        neighbors,
        paths,
        filtered,
        matrix,
    })
}

#[derive(Clone, Debug)]
pub struct PipelineInput {
    pub graph: PathBuf,
    pub seeds: SeedSource,
    pub out_dir: Option<PathBuf>,
    pub options: MineOptions,
}

pub struct RunOutput {
    pub matrix: FeatureMatrix,
    pub report: RunReport,
}

pub fn run_pipeline(
    cfg: &MiningConfig,
    input: &PipelineInput,
) -> std::result::Result<RunOutput, StageError> {
    let diags = cfg.check().at(Stage::Config)?;
    let mut report = RunReport {
        config: cfg.clone(),
        graph: Some(input.graph.clone()),
        ..Default::default()
    };
    for d in diags.iter().filter(|d| d.severity == Severity::Warning) {
        log::warn!("{d}");
        report.warnings.push(d.to_string());
    }
    let mut clock = Clock(Vec::new());
    let raw = clock
        .time(Stage::Ingest, || load_triples(&input.graph))
        .at(Stage::Ingest)?;
    report.ingest = raw.counts;
    let prep = clock
        .time(Stage::Canonicalize, || prepare(raw, &input.seeds, cfg))
        .at(Stage::Canonicalize)?;
    report.canonical = prep.graph.report.clone();
    report.seeds = prep.seeds.clone();
    for m in &prep.seeds.missing {
        report
            .warnings
            .push(format!("seed {m} does not occur in the graph"));
    }
    for c in &prep.seeds.class_seeds {
        report.warnings.push(format!("seed {c} is a class"));
    }
    report.timings.append(&mut clock.0);

    let mined = mine(&prep, cfg, input.options, &mut report)?;
    if let Some(dir) = &input.out_dir {
        clock
            .time(Stage::Emit, || emit_matrix(&mined.matrix, dir))
            .at(Stage::Emit)?;
        report.timings.append(&mut clock.0);
    }
    Ok(RunOutput {
        matrix: mined.matrix,
        report,
    })
}
