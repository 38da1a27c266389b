//! The fit / report / plot pipeline behind the CLI.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nomarch_core::{
    binarize, encode_dummy, fit_aa, fit_ada, fit_ada_from_aa, AaModel, AaOptions, AdaInit, AdaModel, BinaryMatrix,
    DummyMatrix, EvaluationReport, Matrix, Method, NominalTable, SimplexLayout,
};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ConfigError, FitMethod, InputFormat, RunConfig};
use crate::formats::{self, AlphaSummary, Manifest, ModelFile, SummaryRow};
use crate::ingest::{self, IngestError, GERMAN_RISK};
use crate::svg::{self, ColorMap, SvgError};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: IngestError },

    #[error("{0}")]
    Cardinality(String),

    #[error("model {model} was fitted on different data (hash {expected}, input has {actual})")]
    Stale { model: PathBuf, expected: String, actual: String },

    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },

    #[error("cannot read model {path}: {source}")]
    Model { path: PathBuf, source: serde_json::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Plot(#[from] SvgError),

    #[error(transparent)]
    Fit(#[from] nomarch_core::Error),

    #[error("thread pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

impl RunError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Parse { .. } => 3,
            RunError::Cardinality(_) => 4,
            RunError::Stale { .. } => 5,
            _ => 1,
        }
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> RunError {
    let context = context.into();
    move |source| RunError::Io { context, source }
}

/// Parsed and encoded input plus the hash that ties models to it.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub table: NominalTable,
    pub x: DummyMatrix,
    pub hash: String,
}

impl Dataset {
    /// Index of the plot-coloring variable: the configured one, else credit
    /// risk when present, else the last variable.
    pub fn color_var(&self, config: &RunConfig) -> Result<usize, RunError> {
        let schemas = self.table.schemas();
        match &config.color_var {
            Some(name) => schemas.iter().position(|s| s.name() == name).ok_or_else(|| {
                RunError::Config(ConfigError::Invalid(format!("no variable named `{name}` to color by")))
            }),
            None => Ok(schemas.iter().position(|s| s.name() == GERMAN_RISK).unwrap_or(schemas.len() - 1)),
        }
    }
}

pub fn load(config: &RunConfig) -> Result<Dataset, RunError> {
    let bytes = fs::read(&config.input).map_err(io_err(format!("cannot read {}", config.input.display())))?;
    let parse_err = |source| RunError::Parse { path: config.input.clone(), source };
    let text = std::str::from_utf8(&bytes).map_err(|e| {
        parse_err(IngestError::Parse { line: 0, message: format!("input is not UTF-8: {e}") })
    })?;
    let table = match config.format {
        InputFormat::Csv => ingest::parse_delimited(text, config.delimiter as u8, config.header),
        InputFormat::GermanCredit => ingest::parse_german_credit(text),
    }
    .map_err(parse_err)?;
    let x = encode_dummy(&table).map_err(|e| parse_err(IngestError::Table(e)))?;
    let mut hasher = Sha256::new();
    hasher.update(config.format.as_str().as_bytes());
    hasher.update([0u8]);
    hasher.update(&bytes);
    let hash = hex::encode(hasher.finalize());
    Ok(Dataset { table, x, hash })
}

/// A fitted model in memory.
#[derive(Debug, Clone)]
pub enum Fitted {
    Ada { model: AdaModel, aa: AaModel },
    Aa(AaModel),
}

impl Fitted {
    pub fn alpha(&self) -> &Matrix {
        match self {
            Fitted::Ada { model, .. } => &model.alpha,
            Fitted::Aa(aa) => &aa.alpha,
        }
    }

    pub fn rss(&self) -> f64 {
        match self {
            Fitted::Ada { model, .. } => model.rss,
            Fitted::Aa(aa) => aa.rss,
        }
    }
}

pub fn aa_options(config: &RunConfig) -> AaOptions {
    AaOptions { restarts: config.restarts, seed: config.seed, tol: config.tol, max_iter: config.max_iter }
}

/// Runs `f` on a pool with the configured number of threads.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    Ok(builder.build()?.install(f))
}

pub fn fit(data: &Dataset, config: &RunConfig) -> Result<(Fitted, BTreeMap<String, u64>), RunError> {
    let n = data.x.n_rows();
    if config.k > n {
        return Err(RunError::Cardinality(format!("k = {} exceeds the {n} observations", config.k)));
    }
    let x = data.x.values();
    let opts = aa_options(config);
    let mut timings = BTreeMap::new();
    let fitted = with_threads(config.threads, || -> Result<Fitted, nomarch_core::Error> {
        let t = Instant::now();
        let aa = fit_aa(x, config.k, &opts)?;
        timings.insert("aa".to_string(), t.elapsed().as_millis() as u64);
        Ok(match config.method {
            FitMethod::Aa => Fitted::Aa(aa),
            FitMethod::Ada => {
                let t = Instant::now();
                let model = fit_ada_from_aa(x, &aa)?;
                timings.insert("ada".to_string(), t.elapsed().as_millis() as u64);
                Fitted::Ada { model, aa }
            }
        })
    })??;
    Ok((fitted, timings))
}

/// ADA fit from explicit zero-based starting indices (no archetype fit).
pub fn fit_ada_from(data: &Dataset, start: Vec<usize>, threads: Option<usize>) -> Result<AdaModel, RunError> {
    let k = start.len();
    Ok(with_threads(threads, || fit_ada(data.x.values(), k, &AdaInit::User(start)))??)
}

/// Profiles of a fit: archetypoid rows, or binarized archetypes.
pub fn profiles(data: &Dataset, fitted: &Fitted, threshold: f64) -> Result<BinaryMatrix, RunError> {
    Ok(match fitted {
        Fitted::Ada { model, .. } => BinaryMatrix::from_f64(&model.archetypoids(data.x.values()))?,
        Fitted::Aa(aa) => binarize(&aa.archetypes, threshold)?,
    })
}

/// Case labels: source row ids for archetypoids, `A1..Ak` for archetypes.
pub fn case_labels(data: &Dataset, fitted: &Fitted) -> Vec<String> {
    match fitted {
        Fitted::Ada { model, .. } => model.indices.iter().map(|&i| data.table.row_ids()[i].to_string()).collect(),
        Fitted::Aa(aa) => (1..=aa.k()).map(|j| format!("A{j}")).collect(),
    }
}

pub fn evaluate(data: &Dataset, fitted: &Fitted, threshold: f64) -> Result<EvaluationReport, RunError> {
    let method = match fitted {
        Fitted::Ada { .. } => Method::Ada,
        Fitted::Aa(_) => Method::Aa,
    };
    Ok(EvaluationReport::new(method, profiles(data, fitted, threshold)?, data.x.groups())?)
}

fn model_file(data: &Dataset, config: &RunConfig, fitted: &Fitted, timings: BTreeMap<String, u64>) -> ModelFile {
    let rows = |m: &Matrix| m.iter_rows().map(<[f64]>::to_vec).collect::<Vec<_>>();
    let (aa, mut warnings) = match fitted {
        Fitted::Ada { model, aa } => (aa, model.warnings.clone()),
        Fitted::Aa(aa) => (aa, Vec::new()),
    };
    warnings.extend(aa.warnings.iter().cloned());
    let mut file = ModelFile {
        tool_version: VERSION.to_string(),
        method: config.method.as_str().to_string(),
        input_format: config.format.as_str().to_string(),
        data_hash: data.hash.clone(),
        n: data.x.n_rows(),
        m: data.x.n_cols(),
        k: config.k,
        seed: config.seed,
        restarts: config.restarts,
        tol: config.tol,
        max_iter: config.max_iter,
        threshold: config.threshold,
        rss: fitted.rss(),
        archetypoids: None,
        archetypes: None,
        alpha: rows(fitted.alpha()),
        alpha_summary: AlphaSummary::new(fitted.alpha()),
        init_kind: None,
        swap_steps: None,
        starts: Vec::new(),
        aa_rss: aa.rss,
        aa_iterations: aa.iterations,
        aa_converged: aa.converged,
        aa_restart_rss: aa.restart_rss.clone(),
        warnings,
        timings_ms: timings,
    };
    match fitted {
        Fitted::Ada { model, .. } => {
            file.archetypoids = Some(model.indices.iter().map(|&i| data.table.row_ids()[i]).collect());
            file.init_kind = Some(model.init_kind.as_str().to_string());
            file.swap_steps = Some(model.swap_steps);
            file.starts = formats::ada_starts(model, &data.table);
        }
        Fitted::Aa(aa) => file.archetypes = Some(rows(&aa.archetypes)),
    }
    file
}

/// Rebuilds the in-memory fit from a model file for reporting.
pub fn restore(data: &Dataset, file: &ModelFile, model_path: &Path) -> Result<Fitted, RunError> {
    if file.data_hash != data.hash {
        return Err(RunError::Stale {
            model: model_path.into(),
            expected: file.data_hash.clone(),
            actual: data.hash.clone(),
        });
    }
    let alpha = Matrix::from_rows(&file.alpha)?;
    let placeholder_aa = |archetypes: Matrix, alpha: Matrix| AaModel {
        beta: Matrix::zeros(archetypes.rows(), data.x.n_rows()),
        archetypes,
        alpha,
        rss: file.aa_rss,
        iterations: file.aa_iterations,
        converged: file.aa_converged,
        rss_history: Vec::new(),
        restart: 0,
        restart_rss: file.aa_restart_rss.clone(),
        warnings: Vec::new(),
    };
    let malformed = |m: &str| RunError::Fit(nomarch_core::Error::Dimension(format!("model file: {m}")));
    if let Some(indices) = file.ada_indices(&data.x) {
        let model = AdaModel {
            indices,
            alpha,
            rss: file.rss,
            init_kind: nomarch_core::InitKind::User,
            swap_steps: file.swap_steps.unwrap_or(0),
            starts: Vec::new(),
            warnings: file.warnings.clone(),
        };
        let aa = placeholder_aa(Matrix::zeros(0, data.x.n_cols()), Matrix::zeros(0, 0));
        Ok(Fitted::Ada { model, aa })
    } else if let Some(z) = &file.archetypes {
        Ok(Fitted::Aa(placeholder_aa(Matrix::from_rows(z)?, alpha)))
    } else if file.archetypoids.is_some() {
        Err(malformed("archetypoid row ids not present in the input"))
    } else {
        Err(malformed("neither archetypoids nor archetypes recorded"))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(format!("cannot create {}", path.display())))?))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(io_err(format!("cannot write {}", path.display())))
}

fn write_manifest(data: &Dataset, config: &RunConfig, command: &str) -> Result<(), RunError> {
    let manifest = Manifest {
        tool: TOOL.to_string(),
        tool_version: VERSION.to_string(),
        command: command.to_string(),
        data_hash: data.hash.clone(),
        config: config.clone(),
    };
    write_json(&config.out.join(format!("manifest-{command}.json")), &manifest)
}

fn prepare_out(config: &RunConfig) -> Result<(), RunError> {
    fs::create_dir_all(&config.out).map_err(io_err(format!("cannot create {}", config.out.display())))
}

/// Paths written by a pipeline step.
#[derive(Debug, Clone, Default)]
pub struct Written(pub Vec<PathBuf>);

impl Written {
    fn push(&mut self, p: PathBuf) -> &Path {
        self.0.push(p);
        self.0.last().expect("just pushed")
    }
}

/// `fit`: model.json, profiles.csv, manifest, optionally encoded.csv.
pub fn run_fit(config: &RunConfig) -> Result<(Fitted, Written), RunError> {
    config.validate()?;
    let data = load(config)?;
    let (fitted, timings) = fit(&data, config)?;
    prepare_out(config)?;
    let mut written = Written::default();

    let file = model_file(&data, config, &fitted, timings);
    write_json(written.push(config.out.join("model.json")), &file)?;

    let profiles = profiles(&data, &fitted, config.threshold)?;
    let dense = profiles.to_f64();
    let decoded = (0..profiles.rows())
        .map(|j| data.x.decode(dense.row(j)))
        .collect::<Result<Vec<_>, _>>()?;
    formats::write_profiles(
        &case_labels(&data, &fitted),
        &decoded,
        data.x.schemas(),
        create(written.push(config.out.join("profiles.csv")))?,
    )?;

    if config.write_encoded {
        formats::write_encoded(&data.x, create(written.push(config.out.join("encoded.csv")))?)?;
    }
    write_manifest(&data, config, "fit")?;
    written.push(config.out.join("manifest-fit.json"));
    Ok((fitted, written))
}

fn read_model(path: &Path) -> Result<ModelFile, RunError> {
    let text = fs::read_to_string(path).map_err(io_err(format!("cannot read {}", path.display())))?;
    serde_json::from_str(&text).map_err(|source| RunError::Model { path: path.into(), source })
}

/// `report`: hamming.csv, summary.csv, coverage.csv, report.json and the plot.
pub fn run_report(config: &RunConfig, model_path: &Path) -> Result<(EvaluationReport, Written), RunError> {
    config.validate()?;
    let data = load(config)?;
    let file = read_model(model_path)?;
    let fitted = restore(&data, &file, model_path)?;
    prepare_out(config)?;
    let mut written = Written::default();

    let report = evaluate(&data, &fitted, file.threshold)?;
    let cases = case_labels(&data, &fitted);
    formats::write_hamming(&cases, &report.hamming, create(written.push(config.out.join("hamming.csv")))?)?;
    formats::write_summary(
        &[SummaryRow {
            method: report.method.as_str(),
            histogram: &report.histogram,
            total: report.total,
            coverage: &report.coverage,
        }],
        create(written.push(config.out.join("summary.csv")))?,
    )?;
    formats::write_coverage(
        &cases,
        &report.coverage,
        data.x.schemas(),
        create(written.push(config.out.join("coverage.csv")))?,
    )?;
    write_json(written.push(config.out.join("report.json")), &ReportJson::new(&report, &cases))?;
    written.0.extend(plot(&data, &fitted, config)?.0);
    write_manifest(&data, config, "report")?;
    written.push(config.out.join("manifest-report.json"));
    Ok((report, written))
}

/// `plot`: simplex.svg and points.csv.
pub fn run_plot(config: &RunConfig, model_path: &Path) -> Result<Written, RunError> {
    config.validate()?;
    let data = load(config)?;
    let file = read_model(model_path)?;
    let fitted = restore(&data, &file, model_path)?;
    prepare_out(config)?;
    plot(&data, &fitted, config)
}

pub fn layout(data: &Dataset, fitted: &Fitted, color_var: usize) -> Result<SimplexLayout, RunError> {
    let labels = (0..data.table.n_rows()).map(|i| data.table.label(i, color_var).to_string()).collect();
    Ok(SimplexLayout::new(fitted.alpha(), labels, case_labels(data, fitted))?)
}

fn plot(data: &Dataset, fitted: &Fitted, config: &RunConfig) -> Result<Written, RunError> {
    let var = data.color_var(config)?;
    let layout = layout(data, fitted, var)?;
    let colors = ColorMap::default_for(data.table.schemas()[var].categories())?;
    let mut written = Written::default();
    let svg = svg::render_svg(&layout, &colors)?;
    let path = written.push(config.out.join("simplex.svg")).to_path_buf();
    fs::write(&path, svg).map_err(io_err(format!("cannot write {}", path.display())))?;
    formats::write_points(
        data.table.row_ids(),
        &layout.points,
        &layout.color_labels,
        create(written.push(config.out.join("points.csv")))?,
    )?;
    Ok(written)
}

#[derive(serde::Serialize)]
struct ReportJson<'a> {
    method: &'static str,
    cases: &'a [String],
    profiles: Vec<Vec<u8>>,
    hamming: Vec<Vec<u32>>,
    histogram: BTreeMap<String, usize>,
    total: u64,
    coverage: Vec<Vec<&'static str>>,
}

impl<'a> ReportJson<'a> {
    fn new(r: &EvaluationReport, cases: &'a [String]) -> Self {
        ReportJson {
            method: r.method.as_str(),
            cases,
            profiles: (0..r.profiles.rows()).map(|i| r.profiles.row(i).to_vec()).collect(),
            hamming: (0..r.hamming.k()).map(|i| r.hamming.row(i).to_vec()).collect(),
            histogram: r.histogram.iter().map(|(d, c)| (d.to_string(), *c)).collect(),
            total: r.total,
            coverage: r.coverage.iter().map(|row| row.iter().map(|c| c.as_str()).collect()).collect(),
        }
    }
}
