//! `seedmine`: mine neighbor and path features around seed vertices of an
//! N-Triples graph.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use seedmine_core::config::{Limit, MiningConfig, UriPatterns};
use seedmine_core::error::Error;
use seedmine_core::ingest::load_triples;
use seedmine_core::neighbors::mine_neighbors;
use seedmine_core::oracle::{compare, miner_as_oracle_result, oracle_mine};
use seedmine_core::pathmine::{mine_path_features_with, MineOptions};
use seedmine_core::pipeline::{
    prepare, run_pipeline, PipelineInput, SeedSource, Stage, StageError,
};
use seedmine_core::stats::full_neighborhood;

#[derive(Parser)]
#[command(name = "seedmine", version, about)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log progress (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole pipeline and write the feature matrix.
    Mine {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        mining: MiningArgs,
        /// Directory for features.tsv, rows.tsv and matrix.coo.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Check mining invariants while running (slower).
        #[arg(long)]
        check_invariants: bool,
    },
    /// Size of the unbounded neighborhood of the seeds.
    Stats {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        mining: MiningArgs,
    },
    /// Compare the miner with the brute-force reference (small graphs only).
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        mining: MiningArgs,
    },
}

#[derive(Args)]
struct InputArgs {
    /// N-Triples file.
    #[arg(long)]
    graph: PathBuf,
    /// Seed list, one URI per line.
    #[arg(
        long,
        conflicts_with = "seed_class",
        required_unless_present = "seed_class"
    )]
    seeds: Option<PathBuf>,
    /// Use every instance of this class as a seed.
    #[arg(long)]
    seed_class: Option<String>,
    /// Write the JSON run report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

impl InputArgs {
    fn seed_source(&self) -> SeedSource {
        match (&self.seeds, &self.seed_class) {
            (Some(p), _) => SeedSource::File(p.clone()),
            (None, Some(c)) => SeedSource::Class(c.clone()),
            (None, None) => unreachable!("clap requires one of them"),
        }
    }
}

/// Mining parameters. Flags override values from `--config`.
#[derive(Args)]
struct MiningArgs {
    /// TOML file with any of the parameters below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Maximum length of paths and path patterns.
    #[arg(long)]
    k: Option<usize>,
    /// Maximum level for generalization in class hierarchies.
    #[arg(long)]
    t: Option<usize>,
    /// Maximum degree of an expanded vertex (`inf` for none).
    #[arg(long)]
    d: Option<Limit>,
    /// Also traverse arcs backwards.
    #[arg(long)]
    u: bool,
    #[arg(long)]
    l_min: Option<usize>,
    /// Maximum support (`inf` for none).
    #[arg(long)]
    l_max: Option<Limit>,
    /// Predicates never traversed; replaces the default type/subClassOf list.
    #[arg(long, value_name = "FILE")]
    b_predicates: Option<PathBuf>,
    /// Instances of these classes are never reached.
    #[arg(long, value_name = "FILE")]
    b_exp_types: Option<PathBuf>,
    /// Classes never used in patterns.
    #[arg(long, value_name = "FILE")]
    b_gen_types: Option<PathBuf>,
    #[arg(long)]
    type_uri: Option<String>,
    #[arg(long)]
    subclassof_uri: Option<String>,
    #[arg(long)]
    sameas_uri: Option<String>,
    /// Named class group for filtering, as `name=file` (repeatable).
    #[arg(long, value_name = "NAME=FILE")]
    filter_group: Vec<String>,
    /// Comma-separated groups; a feature is kept if it matches any of them.
    #[arg(long, value_delimiter = ',')]
    filter: Vec<String>,
}

impl MiningArgs {
    fn resolve(&self) -> Result<MiningConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
                let value: serde_json::Value = toml::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                MiningConfig::from_toml_value(value)?
            }
            None => MiningConfig::default(),
        };
        let patterns =
            |p: &Path| UriPatterns::from_file(p).map_err(|e| Error::Config(e.to_string()));
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(t) = self.t {
            cfg.t = t;
        }
        if let Some(d) = self.d {
            cfg.d = d;
        }
        if self.u {
            cfg.u = true;
        }
        if let Some(l) = self.l_min {
            cfg.l_min = l;
        }
        if let Some(l) = self.l_max {
            cfg.l_max = l;
        }
        if let Some(p) = &self.b_predicates {
            cfg.b_predicates = patterns(p)?;
        }
        if let Some(p) = &self.b_exp_types {
            cfg.b_exp_types = patterns(p)?;
        }
        if let Some(p) = &self.b_gen_types {
            cfg.b_gen_types = patterns(p)?;
        }
        if let Some(s) = &self.type_uri {
            cfg.type_uri = s.clone();
        }
        if let Some(s) = &self.subclassof_uri {
            cfg.subclass_of_uri = s.clone();
        }
        if let Some(s) = &self.sameas_uri {
            cfg.sameas_uri = s.clone();
        }
        for spec in &self.filter_group {
            let (name, file) = spec.split_once('=').ok_or_else(|| {
                Error::Config(format!("--filter-group expects NAME=FILE, got {spec:?}"))
            })?;
            cfg.filter
                .groups
                .insert(name.to_string(), patterns(Path::new(file))?);
        }
        if !self.filter.is_empty() {
            cfg.filter.selected = self.filter.clone();
        }
        Ok(cfg)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 1,
        Error::InvalidInput(_) | Error::NotFound(_) | Error::Parse { .. } | Error::Io { .. } => 2,
        Error::Invariant(_) => 3,
    }
}

fn fail(e: StageError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(&e.error))
}

fn write_report(path: Option<&Path>, json: &str) -> Result<(), StageError> {
    if let Some(p) = path {
        std::fs::write(p, json).map_err(|e| StageError {
            stage: Stage::Emit,
            error: Error::Io {
                context: format!("writing {}", p.display()),
                source: e,
            },
        })?;
    }
    Ok(())
}

/// Prints to stdout, tolerating a closed pipe (`seedmine ... | head`).
fn print_stdout(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn stage<T>(stage: Stage, r: Result<T, Error>) -> Result<T, StageError> {
    r.map_err(|error| StageError { stage, error })
}

fn run(cli: Cli) -> Result<ExitCode, StageError> {
    match cli.command {
        Command::Mine {
            input,
            mining,
            out,
            check_invariants,
        } => {
            let cfg = stage(Stage::Config, mining.resolve())?;
            let pin = PipelineInput {
                graph: input.graph.clone(),
                seeds: input.seed_source(),
                out_dir: out,
                options: MineOptions { check_invariants },
            };
            let output = run_pipeline(&cfg, &pin)?;
            let r = &output.report;
            print_stdout(&format!(
                "seeds {}  neighbors {}  path features {} (generated {})  columns {}",
                r.seeds.used,
                r.after_filter.neighbors,
                r.after_filter.path_features_in_f,
                r.after_limits.path_features_generated,
                r.total_in_f
            ));
            write_report(input.report.as_deref(), &r.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Stats { input, mining } => {
            let cfg = stage(Stage::Config, mining.resolve())?;
            stage(Stage::Config, cfg.check())?;
            let raw = stage(Stage::Ingest, load_triples(&input.graph))?;
            let prep = stage(
                Stage::Canonicalize,
                prepare(raw, &input.seed_source(), &cfg),
            )?;
            let at_d = stage(
                Stage::Neighbors,
                full_neighborhood(&prep.graph, &prep.ont, &cfg, cfg.d),
            )?;
            let unbounded = stage(
                Stage::Neighbors,
                full_neighborhood(&prep.graph, &prep.ont, &cfg, Limit::Infinite),
            )?;
            let json = serde_json::to_string_pretty(&serde_json::json!({
                "seeds": prep.seeds,
                "canonical": prep.graph.report,
                "full_neighborhood": [at_d, unbounded],
            }))
            .expect("stats serialize");
            print_stdout(&json);
            write_report(input.report.as_deref(), &json)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { input, mining } => {
            let cfg = stage(Stage::Config, mining.resolve())?;
            stage(Stage::Config, cfg.check())?;
            let raw = stage(Stage::Ingest, load_triples(&input.graph))?;
            let prep = stage(
                Stage::Canonicalize,
                prepare(raw, &input.seed_source(), &cfg),
            )?;
            let (g, ont) = (&prep.graph, &prep.ont);
            let nres = stage(Stage::Neighbors, mine_neighbors(g, ont, &cfg))?;
            let opts = MineOptions {
                check_invariants: true,
            };
            let paths = stage(
                Stage::Paths,
                mine_path_features_with(g, ont, &nres, &cfg, opts),
            )?;
            let oracle = stage(Stage::Paths, oracle_mine(g, ont, &cfg))?;
            let cmp = compare(&miner_as_oracle_result(g, &nres, &paths), &oracle);
            let json = serde_json::to_string_pretty(&serde_json::json!({
                "comparison": cmp,
                "oracle": oracle,
            }))
            .expect("oracle output serializes");
            print_stdout(&json);
            write_report(input.report.as_deref(), &json)?;
            if cmp.agree {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("error: miner and oracle disagree");
                Ok(ExitCode::from(3))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => fail(e),
    }
}
