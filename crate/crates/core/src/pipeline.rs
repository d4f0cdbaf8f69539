//! End-to-end run: ingest, returns, RV matrix, MST, centralities, ranking
//! and export, plus the seeded synthetic fixture generator.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::centrality::{compute_all, CentralityError, DEFAULT_EIG_MAX_ITER, DEFAULT_EIG_TOL};
use crate::export::{
    emit_json_report, export_dot, export_graphml, export_tables, ConfigEcho, ExportError, PanelSummary,
    ReportBundle,
};
use crate::ingest::{align_panel, parse_price_records, validate_panel, IngestError, MissingPolicy};
use crate::mst::{kruskal_mst, MstError};
use crate::ranking::{importance_table, least_central, RankingError, DEFAULT_LEAST_M, DEFAULT_TOP_K};
use crate::returns::{panel_returns, ReturnsError};
use crate::rvcorr::{build_similarity_matrix, RvError};

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Format {
    Dot,
    Graphml,
    Json,
    Csv,
}

impl Format {
    pub const ALL: [Format; 4] = [Format::Dot, Format::Graphml, Format::Json, Format::Csv];

    pub fn name(&self) -> &'static str {
        match self {
            Format::Dot => "dot",
            Format::Graphml => "graphml",
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Format::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown format `{s}` (expected dot, graphml, json or csv)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub missing_policy: MissingPolicy,
    pub top_k: usize,
    pub least_m: usize,
    pub formats: BTreeSet<Format>,
    pub eig_tol: f64,
    pub eig_max_iter: usize,
    /// Also write `rv_matrix.csv` and `dist_matrix.csv`.
    pub write_matrices: bool,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            input: input.into(),
            out_dir: out_dir.into(),
            missing_policy: MissingPolicy::default(),
            top_k: DEFAULT_TOP_K,
            least_m: DEFAULT_LEAST_M,
            formats: Format::ALL.into_iter().collect(),
            eig_tol: DEFAULT_EIG_TOL,
            eig_max_iter: DEFAULT_EIG_MAX_ITER,
            write_matrices: false,
        }
    }

    fn check(&self) -> Result<(), PipelineError> {
        let bad = |msg: &str| Err(PipelineError::Config(msg.to_string()));
        if self.top_k == 0 {
            return bad("top-k must be at least 1");
        }
        if self.least_m == 0 {
            return bad("least-m must be at least 1");
        }
        if self.formats.is_empty() {
            return bad("at least one output format is required");
        }
        if !(self.eig_tol > 0.0) {
            return bad("eig-tol must be positive");
        }
        if self.eig_max_iter == 0 {
            return bad("eig-max-iter must be at least 1");
        }
        Ok(())
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            input: self.input.display().to_string(),
            missing_policy: self.missing_policy.as_str().to_string(),
            top_k: self.top_k,
            least_m: self.least_m,
            formats: self.formats.iter().map(|f| f.name().to_string()).collect(),
            eig_tol: self.eig_tol,
            eig_max_iter: self.eig_max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Returns,
    Similarity,
    Tree,
    Centrality,
    Ranking,
    Export,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Returns => "returns",
            Stage::Similarity => "similarity",
            Stage::Tree => "tree",
            Stage::Centrality => "centrality",
            Stage::Ranking => "ranking",
            Stage::Export => "export",
        })
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("[config] {0}")]
    Config(String),
    #[error("[{stage}] {}: {source}", path.display())]
    Io {
        stage: Stage,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("[ingest] {0}")]
    Ingest(#[from] IngestError),
    #[error("[returns] {0}")]
    Returns(#[from] ReturnsError),
    #[error("[similarity] {0}")]
    Similarity(#[from] RvError),
    #[error("[tree] {0}")]
    Tree(#[from] MstError),
    #[error("[centrality] {0}")]
    Centrality(#[from] CentralityError),
    #[error("[ranking] {0}")]
    Ranking(#[from] RankingError),
    #[error("[export] {0}")]
    Export(#[from] ExportError),
}

impl PipelineError {
    pub fn stage(&self) -> Stage {
        match self {
            PipelineError::Config(_) => Stage::Config,
            PipelineError::Io { stage, .. } => *stage,
            PipelineError::Ingest(_) => Stage::Ingest,
            PipelineError::Returns(_) => Stage::Returns,
            PipelineError::Similarity(_) => Stage::Similarity,
            PipelineError::Tree(_) => Stage::Tree,
            PipelineError::Centrality(_) => Stage::Centrality,
            PipelineError::Ranking(_) => Stage::Ranking,
            PipelineError::Export(_) => Stage::Export,
        }
    }

    /// Process exit code: 2 parse, 3 validation, 4 numeric, 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => EXIT_PARSE,
            PipelineError::Io { .. } => EXIT_IO,
            PipelineError::Ingest(e) if e.is_parse_error() => EXIT_PARSE,
            PipelineError::Similarity(RvError::DegenerateVariance(_) | RvError::Numerical(_)) => EXIT_NUMERIC,
            PipelineError::Centrality(CentralityError::NoConvergence { .. }) => EXIT_NUMERIC,
            _ => EXIT_VALIDATION,
        }
    }
}

#[derive(Debug)]
pub struct PipelineOutcome {
    pub bundle: ReportBundle,
    /// Files written, in write order.
    pub written: Vec<PathBuf>,
}

/// Runs every stage in order and writes the requested formats to
/// `config.out_dir`.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutcome, PipelineError> {
    config.check()?;
    let bytes = fs::read(&config.input).map_err(|source| PipelineError::Io {
        stage: Stage::Ingest,
        path: config.input.clone(),
        source,
    })?;
    let bundle = analyze(&bytes, config)?;
    let written = write_outputs(&bundle, config)?;
    Ok(PipelineOutcome { bundle, written })
}

/// The in-memory part of the pipeline, from CSV bytes to a report bundle.
pub fn analyze(csv_bytes: &[u8], config: &PipelineConfig) -> Result<ReportBundle, PipelineError> {
    config.check()?;
    let records = parse_price_records(csv_bytes)?;
    let panel = validate_panel(align_panel(&records, config.missing_policy)?)?;
    let returns = panel_returns(&panel)?;
    let similarity = build_similarity_matrix(&returns)?;
    let tree = kruskal_mst(&similarity)?;
    let centrality = compute_all(&tree, config.eig_tol, config.eig_max_iter)?;
    let importance = importance_table(&centrality.scores, config.top_k)?;
    let least = least_central(&centrality.scores, config.least_m)?;
    let summary = PanelSummary {
        n_assets: panel.n_assets(),
        n_dates: panel.n_dates(),
        first_date: panel.dates()[0],
        last_date: *panel.dates().last().expect("validated panel is non-empty"),
    };
    Ok(ReportBundle::new(
        summary,
        similarity,
        tree,
        centrality,
        importance,
        least,
        config.echo(),
    )?)
}

fn write_file(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), PipelineError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| PipelineError::Io {
        stage: Stage::Export,
        path: path.clone(),
        source,
    })?;
    written.push(path);
    Ok(())
}

fn write_outputs(bundle: &ReportBundle, config: &PipelineConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let dir = &config.out_dir;
    fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
        stage: Stage::Export,
        path: dir.clone(),
        source,
    })?;
    let mut written = Vec::new();
    for format in &config.formats {
        match format {
            Format::Dot => write_file(dir, "tree.dot", &export_dot(bundle), &mut written)?,
            Format::Graphml => write_file(dir, "tree.graphml", &export_graphml(bundle), &mut written)?,
            Format::Json => write_file(dir, "report.json", &emit_json_report(bundle), &mut written)?,
            Format::Csv => {
                for (name, text) in export_tables(bundle).files() {
                    write_file(dir, name, text, &mut written)?;
                }
            }
        }
    }
    if config.write_matrices {
        write_file(dir, "rv_matrix.csv", &bundle.similarity().rv_csv(), &mut written)?;
        write_file(dir, "dist_matrix.csv", &bundle.similarity().dist_csv(), &mut written)?;
    }
    Ok(written)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FixtureError {
    #[error("bad fixture dimensions: {assets} assets x {days} days (need >= 2 assets, >= 3 days)")]
    BadDimensions { assets: usize, days: usize },
}

/// Number of planted correlation blocks in generated fixtures.
pub const FIXTURE_BLOCKS: usize = 3;

/// Block of asset `i` among `n` assets: contiguous runs of roughly equal size.
pub fn fixture_block(i: usize, n: usize) -> usize {
    let blocks = FIXTURE_BLOCKS.min(n);
    i * blocks / n
}

pub fn fixture_code(i: usize) -> String {
    format!("FX{i:03}")
}

fn next_business_day(d: NaiveDate) -> NaiveDate {
    let mut next = d + Duration::days(1);
    while matches!(next.weekday(), Weekday::Sat | Weekday::Sun) {
        next += Duration::days(1);
    }
    next
}

/// Synthetic bid/ask panel in the input CSV format.
///
/// Bid prices follow geometric random walks whose daily log returns mix a
/// market factor, a block factor shared within each of [`FIXTURE_BLOCKS`]
/// contiguous asset blocks, and idiosyncratic noise. Asks sit above bids by
/// a positive per-asset spread with small daily jitter. Dates are business
/// days from 2008-05-05. Output is a pure function of the arguments.
pub fn generate_fixture(seed: u64, n_assets: usize, n_days: usize) -> Result<String, FixtureError> {
    if n_assets < 2 || n_days < 3 {
        return Err(FixtureError::BadDimensions {
            assets: n_assets,
            days: n_days,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = FIXTURE_BLOCKS.min(n_assets);

    struct AssetParams {
        block: usize,
        vol: f64,
        spread: f64,
        bid: f64,
    }
    let mut assets: Vec<AssetParams> = (0..n_assets)
        .map(|i| AssetParams {
            block: fixture_block(i, n_assets),
            vol: rng.random_range(0.003..0.012),
            spread: rng.random_range(0.0005..0.003),
            bid: 10f64.powf(rng.random_range(-0.3..2.2)),
        })
        .collect();

    let mut out = String::with_capacity(n_assets * n_days * 32);
    out.push_str("date,code,bid,ask\n");
    let mut date = NaiveDate::from_ymd_opt(2008, 5, 5).expect("valid start date");
    for day in 0..n_days {
        if day > 0 {
            date = next_business_day(date);
            let market: f64 = rng.sample(StandardNormal);
            let factors: Vec<f64> = (0..blocks).map(|_| rng.sample(StandardNormal)).collect();
            for a in assets.iter_mut() {
                let idio: f64 = rng.sample(StandardNormal);
                let shock = 0.3 * market + 0.8 * factors[a.block] + 0.5 * idio;
                a.bid *= (a.vol * shock).exp();
            }
        }
        for (i, a) in assets.iter().enumerate() {
            let jitter: f64 = rng.random_range(-0.1..0.1);
            let ask = a.bid * (1.0 + a.spread * (1.0 + jitter));
            out.push_str(&format!("{},{},{:.6},{:.6}\n", date.format("%Y-%m-%d"), fixture_code(i), a.bid, ask));
        }
    }
    Ok(out)
}
