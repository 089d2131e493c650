//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for invalid input (bad flags, missing or
//! malformed files, validation failures), 3 for environment failures
//! (unwritable outputs, port already bound). Log verbosity follows the
//! `PEERINF_LOG` environment variable (`error`, `warn`, `info`, `debug`).

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use peerinf_core::model::accuracy;
use peerinf_core::{
    emit_dot, emit_table, explain, generate_synthetic, split, train_gbdt, train_logistic, Backend,
    Dataset, DotStyle, ExplainerConfig, GbdtConfig, Instance, LogisticConfig, Model, ZeroPolicy,
};

use crate::document::AttributionDocument;
use crate::error::{AppError, AppResult};
use crate::io::{
    load_csv, load_generator_config, load_schema, save_schema, write_csv, write_text, SchemaFile,
};
use crate::pipeline::{build_instance, parse_inline, run_pi, Bundle, MeanSource, PiOptions};
use crate::service::{serve, AppState, Catalog, ServiceConfig};
use crate::store::{load_model, save_model, ModelFile, SplitSpec};

/// Label column written by `synth`.
pub const SYNTH_LABEL: &str = "survived";

#[derive(Debug, Parser)]
#[command(
    name = "peerinf",
    version,
    about = "Peer-influence explanations for tabular classifiers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic patient dataset (data.csv + schema.json).
    Synth(SynthArgs),
    /// Train a classifier on a train/test split and save it.
    Train(TrainArgs),
    /// Attribute one prediction to the features.
    Explain(ExplainArgs),
    /// Compute the peer-influence matrix, graph and alteration indices.
    Pi(PiArgs),
    /// Run the HTTP what-if service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Generator settings (JSON: n, seed, intercept, coefficients).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelChoice {
    Gbdt,
    Logistic,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: DataArgs,
    #[arg(long, value_enum, default_value = "gbdt")]
    pub model: ModelChoice,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Boosting rounds (gbdt).
    #[arg(long, default_value_t = 100)]
    pub rounds: usize,
    #[arg(long, default_value_t = 3)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 5)]
    pub min_leaf: usize,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub subsample: f64,
    /// Step size; defaults to 0.1 for gbdt, 0.5 for logistic.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Gradient epochs (logistic).
    #[arg(long, default_value_t = 300)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.0)]
    pub l2: f64,
    /// Minibatch size, 0 for full batch (logistic).
    #[arg(long, default_value_t = 0)]
    pub batch_size: usize,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct InstanceArgs {
    /// 0-based data row to explain.
    #[arg(long)]
    pub row: Option<usize>,
    /// Inline instance, `name=value` pairs separated by commas.
    #[arg(long)]
    pub instance: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendChoice {
    Exact,
    Sampled,
}

#[derive(Debug, Args)]
pub struct ExplainerArgs {
    #[arg(long, value_enum, default_value = "exact")]
    pub backend: BackendChoice,
    #[arg(long, default_value_t = 100)]
    pub background_rows: usize,
    #[arg(long, default_value_t = 1000)]
    pub permutations: usize,
    #[arg(long, default_value_t = 15)]
    pub max_exact_features: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ExplainerArgs {
    pub fn config(&self) -> ExplainerConfig {
        ExplainerConfig {
            backend: match self.backend {
                BackendChoice::Exact => Backend::Exact,
                BackendChoice::Sampled => Backend::Sampled,
            },
            background_rows: self.background_rows,
            seed: self.seed,
            permutations: self.permutations,
            max_exact_features: self.max_exact_features,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub input: DataArgs,
    /// Model file.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub explainer: ExplainerArgs,
    /// Attribution document to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PolicyChoice {
    Strict,
    Inclusive,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MeansChoice {
    Background,
    Dataset,
}

#[derive(Debug, Args)]
pub struct PiArgs {
    #[command(flatten)]
    pub input: DataArgs,
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub explainer: ExplainerArgs,
    #[arg(long, value_enum, default_value = "strict")]
    pub zero_policy: PolicyChoice,
    /// Features the alteration indices may pick, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub controllable: Option<Vec<String>>,
    /// Replacement values for nullified features.
    #[arg(long, value_enum, default_value = "background")]
    pub means: MeansChoice,
    /// Leave edge weights off the DOT output.
    #[arg(long)]
    pub no_edge_labels: bool,
    /// Directory for pi.json, pi.dot, alt.txt and calt.txt.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub input: DataArgs,
    /// Model file; may be repeated. Ids are file stems.
    #[arg(long, required = true)]
    pub model: Vec<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[command(flatten)]
    pub explainer: ExplainerArgs,
    #[arg(long, default_value_t = 12)]
    pub max_features: usize,
    #[arg(long, default_value_t = 1000)]
    pub max_background_rows: usize,
    /// Origin allowed by CORS; any origin when omitted.
    #[arg(long)]
    pub allow_origin: Option<String>,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> AppResult<()> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a, out),
        Command::Train(a) => cmd_train(&a, out),
        Command::Explain(a) => cmd_explain(&a, out),
        Command::Pi(a) => cmd_pi(&a, out),
        Command::Serve(a) => cmd_serve(&a, out),
    }
}

fn create_dir(dir: &Path) -> AppResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::write(dir, e))
}

fn stdout_err(e: std::io::Error) -> AppError {
    AppError::Environment(format!("writing output: {}", e))
}

pub fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> AppResult<()> {
    let mut config = match &a.config {
        Some(p) => load_generator_config(p)?,
        None => peerinf_core::GeneratorConfig::new(2493, 0),
    };
    if let Some(n) = a.n {
        config.n = n;
    }
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    let d = generate_synthetic(&config)?;
    create_dir(&a.out)?;
    let data_path = a.out.join("data.csv");
    let schema_path = a.out.join("schema.json");
    write_csv(&data_path, &d, SYNTH_LABEL)?;
    save_schema(
        &schema_path,
        &SchemaFile::new(SYNTH_LABEL, d.schema().to_vec()),
    )?;
    writeln!(
        out,
        "wrote {} rows to {} and {}",
        d.n_rows(),
        data_path.display(),
        schema_path.display()
    )
    .map_err(stdout_err)
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> AppResult<()> {
    let schema = load_schema(&a.input.schema)?;
    let d = load_csv(&a.input.data, &schema.features, &schema.label)?;
    let (train, test) = split(&d, a.train_fraction, a.seed)?;
    let model: Model = match a.model {
        ModelChoice::Gbdt => {
            let cfg = GbdtConfig {
                rounds: a.rounds,
                max_depth: a.max_depth,
                learning_rate: a.learning_rate.unwrap_or(0.1),
                min_leaf: a.min_leaf,
                lambda: a.lambda,
                subsample: a.subsample,
                seed: a.seed,
            };
            train_gbdt(&train, &cfg)?.0.into()
        }
        ModelChoice::Logistic => {
            let cfg = LogisticConfig {
                epochs: a.epochs,
                learning_rate: a.learning_rate.unwrap_or(0.5),
                l2: a.l2,
                batch_size: a.batch_size,
                seed: a.seed,
            };
            train_logistic(&train, &cfg)?.into()
        }
    };
    let file = ModelFile::new(
        model,
        d.feature_names(),
        Some(SplitSpec {
            train_fraction: a.train_fraction,
            seed: a.seed,
        }),
    );
    save_model(&a.out, &file)?;
    let (tr, te) = (accuracy(&file.model, &train), accuracy(&file.model, &test));
    tracing::info!(
        train_rows = train.n_rows(),
        test_rows = test.n_rows(),
        "trained"
    );
    writeln!(out, "train rows: {}", train.n_rows()).map_err(stdout_err)?;
    writeln!(out, "test rows: {}", test.n_rows()).map_err(stdout_err)?;
    writeln!(out, "train accuracy: {:.4}", tr).map_err(stdout_err)?;
    writeln!(out, "test accuracy: {:.4}", te).map_err(stdout_err)?;
    writeln!(out, "model written to {}", a.out.display()).map_err(stdout_err)
}

fn select_instance(d: &Dataset, args: &InstanceArgs) -> AppResult<Instance> {
    match (args.row, &args.instance) {
        (Some(i), _) => Ok(d.instance(i)?),
        (None, Some(text)) => {
            let x = build_instance(d.schema(), &parse_inline(text)?)?;
            x.validate(d.schema())?;
            Ok(x)
        }
        (None, None) => Err(AppError::Input("give --row or --instance".into())),
    }
}

pub fn cmd_explain(a: &ExplainArgs, out: &mut dyn Write) -> AppResult<()> {
    let b = Bundle::load(&a.input.data, &a.input.schema, &a.model)?;
    let x = select_instance(&b.data, &a.instance)?;
    let background = b.background()?;
    let attribution = explain(&b.model.model, &background, &x, &a.explainer.config())?;
    let names = b.feature_names();
    let doc = AttributionDocument::new(&names, &attribution);

    let width = names.iter().map(String::len).max().unwrap_or(7).max(7);
    let mut text = format!("{:<width$}  {:>12}  {:>10}\n", "feature", "value", "phi");
    for ((f, &v), &p) in b.data.schema().iter().zip(&x.values).zip(&attribution.phi) {
        text.push_str(&format!(
            "{:<width$}  {:>12}  {:>10.4}\n",
            f.name,
            f.decode(v),
            p
        ));
    }
    text.push_str(&format!("base value: {:.6}\n", attribution.base_value));
    text.push_str(&format!("score: {:.6}\n", attribution.target_score));
    text.push_str(&format!("prediction: {}\n", doc.prediction));
    let gap = attribution.efficiency_gap();
    let verdict = if gap <= 1e-9 { "ok" } else { "approximate" };
    text.push_str(&format!(
        "efficiency: |base + sum(phi) - score| = {:.3e} ({})\n",
        gap, verdict
    ));
    if let Some(p) = &a.out {
        write_text(p, &crate::io::to_json_pretty(&doc))?;
    }
    out.write_all(text.as_bytes()).map_err(stdout_err)
}

pub fn cmd_pi(a: &PiArgs, out: &mut dyn Write) -> AppResult<()> {
    let b = Bundle::load(&a.input.data, &a.input.schema, &a.model)?;
    let x = select_instance(&b.data, &a.instance)?;
    let background = b.background()?;
    let options = PiOptions {
        zero_policy: match a.zero_policy {
            PolicyChoice::Strict => ZeroPolicy::Strict,
            PolicyChoice::Inclusive => ZeroPolicy::Inclusive,
        },
        controllable: a.controllable.clone(),
        means: match a.means {
            MeansChoice::Background => MeanSource::Background,
            MeansChoice::Dataset => MeanSource::Dataset,
        },
    };
    let r = run_pi(
        &b.model.model,
        &a.explainer.config(),
        &b.data,
        &background,
        &x,
        &options,
    )?;
    let style = DotStyle {
        weight_labels: !a.no_edge_labels,
        ..DotStyle::default()
    };
    let dot = emit_dot(&r.graph, &r.explanation, &style)?;
    let names = &r.explanation.feature_names;
    let alt_table = emit_table(&r.alt, names, &r.graph)?;
    let calt_table = emit_table(&r.calt, names, &r.graph)?;

    create_dir(&a.out_dir)?;
    write_text(&a.out_dir.join("pi.json"), &r.document.to_json())?;
    write_text(&a.out_dir.join("pi.dot"), &dot.text)?;
    write_text(&a.out_dir.join("alt.txt"), &alt_table)?;
    write_text(&a.out_dir.join("calt.txt"), &calt_table)?;

    let policy = match options.zero_policy {
        ZeroPolicy::Strict => "strict",
        ZeroPolicy::Inclusive => "inclusive",
    };
    let mut text = format!(
        "prediction: {}\n\nALT\n{}\nCALT, {} zero policy\n{}",
        r.document.baseline.prediction, alt_table, policy, calt_table
    );
    text.push_str(&format!(
        "\nALT selects: {}\n",
        r.document.alt.selected_names.join(", ")
    ));
    text.push_str(&format!(
        "CALT selects: {}\n",
        r.document.calt.selected_names.join(", ")
    ));
    text.push_str(&format!("artifacts written to {}\n", a.out_dir.display()));
    out.write_all(text.as_bytes()).map_err(stdout_err)
}

fn file_stem(p: &Path) -> AppResult<String> {
    p.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| AppError::Input(format!("{}: cannot derive an id", p.display())))
}

pub fn cmd_serve(a: &ServeArgs, out: &mut dyn Write) -> AppResult<()> {
    let schema = load_schema(&a.input.schema)?;
    let data = load_csv(&a.input.data, &schema.features, &schema.label)?;
    let mut catalog = Catalog::default();
    for p in &a.model {
        let id = file_stem(p)?;
        if catalog.models.contains_key(&id) {
            return Err(AppError::Input(format!("duplicate model id `{}`", id)));
        }
        catalog.insert_model(id, load_model(p)?);
    }
    catalog.insert_dataset(file_stem(&a.input.data)?, schema, data);
    let config = ServiceConfig {
        explainer: a.explainer.config(),
        max_features: a.max_features,
        max_background_rows: a.max_background_rows,
        allow_origin: a.allow_origin.clone(),
    };
    config.explainer.validate()?;
    let state = AppState::new(catalog, config);

    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| AppError::Environment(format!("starting runtime: {}", e)))?;
    rt.block_on(async {
        let addr = format!("{}:{}", a.host, a.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| AppError::Environment(format!("cannot bind {}: {}", addr, e)))?;
        let local = listener
            .local_addr()
            .map_err(|e| AppError::Environment(e.to_string()))?;
        writeln!(out, "listening on http://{}", local).map_err(stdout_err)?;
        out.flush().map_err(stdout_err)?;
        serve(listener, state, shutdown_signal())
            .await
            .map_err(|e| AppError::Environment(format!("server error: {}", e)))
    })?;
    writeln!(out, "shut down").map_err(stdout_err)
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}
