//! Command-line front end: `synth`, `benchmark`, `xi-table` and `score`.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, ErrorClass, Result};
use crate::eval::{
    run_benchmark, with_thread_cap, BenchmarkConfig, Method, MethodConfig, ScoringContext,
    DEFAULT_Q, DEFAULT_REPETITIONS, DEFAULT_SIGNIFICANCE,
};
use crate::feature_store::{
    generate_synthetic, load_dataset, load_schema, read_feedback, read_header_schema,
    write_dataset, write_schema, Dataset, FeatureSchema, SyntheticSpec,
};
use crate::query_space::DEFAULT_EPSILON;
use crate::riemann::{XiTable, DEFAULT_ALPHA};

#[derive(Debug, Parser)]
#[command(name = "rf-lab", version, about = "Relevance-feedback experiments on feature datasets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a clustered synthetic dataset and its schema file.
    Synth(SynthArgs),
    /// Run the oracle-feedback benchmark over a treatment grid.
    Benchmark(BenchmarkArgs),
    /// Tabulate the geodesic kernel for a given alpha.
    XiTable(XiArgs),
    /// Fit one method on a feedback file and rank the whole dataset.
    Score(ScoreArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub categories: usize,
    #[arg(long)]
    pub per_category: usize,
    /// Number of word spaces.
    #[arg(long, default_value_t = 4)]
    pub words: usize,
    /// Dimension of every word space.
    #[arg(long, default_value_t = 8)]
    pub dims: usize,
    #[arg(long, default_value_t = 1.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    #[arg(long)]
    pub seed: u64,
    /// Dataset file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Schema file to write; defaults to the dataset path with `.schema` appended.
    #[arg(long)]
    pub schema: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Schema file; when absent the schema is read from the dataset header.
    #[arg(long)]
    pub schema: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = 3)]
    pub topics: usize,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Use raw query-space distances for the Riemann and latent methods.
    #[arg(long)]
    pub no_log: bool,
}

impl ModelArgs {
    fn config(&self) -> MethodConfig {
        MethodConfig {
            alpha: self.alpha,
            topics: self.topics,
            epsilon: self.epsilon,
            log_query_space: !self.no_log,
            ..MethodConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "rocchio,mars,rui-huang,mars-q,riemann,latent")]
    pub methods: String,
    #[arg(long, value_delimiter = ',', default_value = "10,5,1,0.5,0.1")]
    pub kbar: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2,5,10,20,30")]
    pub r: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_Q)]
    pub q: usize,
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
    pub significance: f64,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub seed: u64,
    /// Output directory for the report files.
    #[arg(long)]
    pub out: PathBuf,
    /// Drop the feedback items from the ranked universe.
    #[arg(long)]
    pub exclude_feedback: bool,
}

#[derive(Debug, Args)]
pub struct XiArgs {
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    #[arg(long, default_value_t = 3.0)]
    pub to: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Feedback file: one item id per line, optional weight column.
    #[arg(long)]
    pub feedback: PathBuf,
    #[arg(long)]
    pub method: String,
    #[arg(long, default_value_t = DEFAULT_Q)]
    pub q: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load(data: &DataArgs) -> Result<(Dataset, FeatureSchema)> {
    let schema = match &data.schema {
        Some(p) => load_schema(p)?,
        None => read_header_schema(&data.dataset)?,
    };
    let ds = load_dataset(&data.dataset, &schema)?;
    Ok((ds, schema))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let spec = SyntheticSpec {
        categories: a.categories,
        per_category: a.per_category,
        schema: FeatureSchema::uniform(a.words, a.dims)?,
        separation: a.separation,
        noise: a.noise,
        seed: a.seed,
    };
    let ds = generate_synthetic(&spec)?;
    let comments = vec![format!("rf-lab synth {}", spec.describe())];
    write_dataset(&a.out, &ds, &comments)?;
    let schema_path = a.schema.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".schema");
        p.into()
    });
    write_schema(&schema_path, ds.schema(), &comments)?;
    eprintln!("wrote {} items to {}", ds.len(), a.out.display());
    Ok(())
}

fn cmd_benchmark(a: &BenchmarkArgs) -> Result<()> {
    let (ds, _) = load(&a.data)?;
    let cfg = BenchmarkConfig {
        methods: Method::parse_list(&a.methods)?,
        kbars: a.kbar.clone(),
        rs: a.r.clone(),
        q: a.q,
        repetitions: a.reps,
        seed: a.seed,
        significance: a.significance,
        exclude_feedback: a.exclude_feedback,
        method_config: a.model.config(),
    };
    let mut report = with_thread_cap(|| run_benchmark(&ds, &cfg))??;
    report
        .header
        .insert(0, format!("rf-lab benchmark dataset={}", a.data.dataset.display()));
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    write_file(&a.out.join("report.tsv"), &report.to_tsv())?;
    write_file(&a.out.join("pairwise.tsv"), &report.pairwise_tsv())?;
    let table = report.to_table();
    write_file(&a.out.join("report.txt"), &table)?;
    write_file(&a.out.join("pairwise.txt"), &report.pairwise_table())?;
    print!("{table}");
    Ok(())
}

fn cmd_xi_table(a: &XiArgs) -> Result<()> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {}", a.alpha)));
    }
    if !(a.step > 0.0) || !(a.to >= a.from) {
        return Err(Error::InvalidArgument("need step > 0 and to >= from".into()));
    }
    let table = XiTable::shared(a.alpha)?;
    let n = ((a.to - a.from) / a.step + 1e-9).floor() as usize + 1;
    let mut text = format!(
        "# rf-lab xi-table alpha={} from={} to={} step={}\nx\txi\n",
        a.alpha, a.from, a.to, a.step
    );
    for i in 0..n {
        let x = a.from + i as f64 * a.step;
        text.push_str(&format!("{x}\t{:.12}\n", table.xi(x)));
    }
    emit(a.out.as_deref(), &text)
}

fn cmd_score(a: &ScoreArgs) -> Result<()> {
    let method = Method::from_name(&a.method)?;
    if method.needs_target() {
        return Err(Error::InvalidArgument(format!(
            "method `{method}` needs a known target set and cannot score a feedback file"
        )));
    }
    let (ds, _) = load(&a.data)?;
    if a.q > ds.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot return {} results from {} items",
            a.q,
            ds.len()
        )));
    }
    let fb = read_feedback(&a.feedback)?;
    let resolved = ds.resolve(&fb)?;
    let feedback: Vec<usize> = resolved.positives.iter().map(|(i, _)| *i).collect();
    let weights: Vec<f64> = resolved.positives.iter().map(|(_, w)| *w).collect();
    let config = a.model.config();
    config.validate()?;
    let universe: Vec<usize> = (0..ds.len()).collect();
    let ctx = ScoringContext {
        dataset: &ds,
        universe: &universe,
        feedback: &feedback,
        weights: Some(&weights),
        target: None,
        seed: a.seed,
        config: &config,
    };
    let scores = method.score_universe(&ctx)?;
    let ranked = crate::classic::rank(&ds, &|i: usize, _: &crate::feature_store::Item| scores[i], a.q)?;
    let mut text = format!(
        "# rf-lab score dataset={} feedback={} method={} q={} seed={} {}\nrank\tid\tscore\n",
        a.data.dataset.display(),
        a.feedback.display(),
        method,
        a.q,
        a.seed,
        config.describe()
    );
    for (k, r) in ranked.iter().enumerate() {
        text.push_str(&format!("{}\t{}\t{}\n", k + 1, ds.item(r.index).id(), r.score));
    }
    emit(a.out.as_deref(), &text)
}

/// Runs one parsed command.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::XiTable(a) => cmd_xi_table(a),
        Command::Score(a) => cmd_score(a),
    }
}

/// Exit status for an error: 2 usage, 3 data, 4 numeric.
pub fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Usage => 2,
        ErrorClass::Data => 3,
        ErrorClass::Numeric => 4,
    }
}

/// Entry point of the `rf-lab` binary.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rf-lab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
