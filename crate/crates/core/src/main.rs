use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dpkmeans::bench::{self, BenchConfig};
use dpkmeans::centers::{self, DEFAULT_MAX_K};
use dpkmeans::clustering::{
    self, CenterRule, ImprovedConfig, IterationMode, KMeansConfig, KernelMetric, PipelineConfig,
};
use dpkmeans::config::{ConfigFile, DatasetDefaults};
use dpkmeans::dataset::{self, Dataset, LabelColumn, LoadOptions, Normalization};
use dpkmeans::density::{self, DensityKernel};
use dpkmeans::distance::{pairwise_euclidean, KernelSpec};
use dpkmeans::serve::{self, ServeState};
use dpkmeans::{Error, Exec};

#[derive(Parser)]
#[command(name = "dpkmeans", version, about = "Density-peaks initialised K-means")]
struct Cli {
    /// JSON file with per-dataset defaults for t, q, kernel and normalize.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Force single-threaded execution.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decision-graph quantities (rho, delta, gamma) per point.
    Density(DensityArgs),
    /// Cluster a dataset and print the result as JSON.
    Cluster(ClusterArgs),
    /// Compare seeded random-init K-means against the density pipeline.
    Bench(BenchArgs),
    /// Serve the decision-graph explorer API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV file.
    input: PathBuf,
    /// Label column: name, 0-based index, `auto` or `none`.
    #[arg(long, default_value = "auto")]
    label: String,
    /// Columns to drop (names or 0-based indices), comma separated.
    #[arg(long, value_delimiter = ',')]
    exclude_cols: Vec<String>,
    #[arg(long, value_enum)]
    normalize: Option<NormalizeArg>,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

#[derive(Args)]
struct DensityOpts {
    /// Fraction of pairwise distances below the truncation distance.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizeArg {
    None,
    Minmax,
    Zscore,
}

impl From<NormalizeArg> for Normalization {
    fn from(a: NormalizeArg) -> Self {
        match a {
            NormalizeArg::None => Normalization::None,
            NormalizeArg::Minmax => Normalization::MinMax,
            NormalizeArg::Zscore => Normalization::ZScore,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Gaussian,
    Cutoff,
}

impl From<KernelArg> for DensityKernel {
    fn from(a: KernelArg) -> Self {
        match a {
            KernelArg::Gaussian => DensityKernel::Gaussian,
            KernelArg::Cutoff => DensityKernel::Cutoff,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Iterate,
    SinglePass,
}

impl From<ModeArg> for IterationMode {
    fn from(a: ModeArg) -> Self {
        match a {
            ModeArg::Iterate => IterationMode::Iterate,
            ModeArg::SinglePass => IterationMode::SinglePass,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    FeatureSpace,
    Point,
}

impl From<MetricArg> for KernelMetric {
    fn from(a: MetricArg) -> Self {
        match a {
            MetricArg::FeatureSpace => KernelMetric::FeatureSpace,
            MetricArg::Point => KernelMetric::Point,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum DensityOut {
    Json,
    DecisionGraph,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Algorithm {
    Improved,
    Baseline,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum BenchFormat {
    Table,
    Json,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    density: DensityOpts,
    /// Treat the input as an `i j d` distance file instead of a CSV.
    #[arg(long)]
    distances: bool,
    #[arg(long, value_enum, default_value = "json")]
    out: DensityOut,
    /// Destination of the decision-graph text.
    #[arg(long, default_value = "DECISION_GRAPH")]
    output: PathBuf,
}

#[derive(Args)]
struct KernelOpts {
    /// Kernel exponent q in (0, 2].
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, value_enum, default_value = "iterate")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "feature-space")]
    metric: MetricArg,
    #[arg(long, default_value_t = clustering::DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, default_value_t = clustering::DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    density: DensityOpts,
    #[command(flatten)]
    kernel: KernelOpts,
    /// Number of clusters.
    #[arg(long, conflicts_with = "auto_k")]
    k: Option<usize>,
    /// Choose k from the largest jump in sorted gamma.
    #[arg(long)]
    auto_k: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_K)]
    max_k: usize,
    #[arg(long, value_enum, default_value = "improved")]
    algorithm: Algorithm,
    /// Seed for the baseline's random initial centers.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Leave wall-clock timing out of the JSON.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    density: DensityOpts,
    #[command(flatten)]
    kernel: KernelOpts,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = 42)]
    seed_base: u64,
    /// Run the seeded baselines concurrently (timings become unreliable).
    #[arg(long)]
    parallel: bool,
    #[arg(long, value_enum, default_value = "table")]
    format: BenchFormat,
    /// Also write the JSON report to this file.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    density: DensityOpts,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, value_enum, default_value = "iterate")]
    mode: ModeArg,
    /// Clusters for the startup assignment shown by /api/data (gamma jump if absent).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 8080)]
    port: u16,
}

struct Ctx {
    exec: Exec,
    config: ConfigFile,
}

impl Ctx {
    fn load(&self, args: &DataArgs) -> Result<(Dataset, DatasetDefaults), Error> {
        let opts = LoadOptions {
            label: LabelColumn::parse(&args.label),
            delimiter: u8::try_from(args.delimiter)
                .map_err(|_| Error::InvalidParameter("delimiter must be ASCII".into()))?,
            has_header: None,
            exclude: args.exclude_cols.clone(),
        };
        let raw = dataset::load_csv(&args.input, &opts)?;
        let defaults = self.config.for_dataset(raw.name());
        let method = args
            .normalize
            .map(Normalization::from)
            .or(defaults.normalize)
            .unwrap_or_default();
        Ok((dataset::normalize(&raw, method)?, defaults))
    }

    fn improved(&self, opts: &KernelOpts, defaults: &DatasetDefaults) -> Result<ImprovedConfig, Error> {
        Ok(ImprovedConfig {
            q: KernelSpec::new(opts.q.or(defaults.q).unwrap_or(KernelSpec::DEFAULT_Q))?,
            mode: opts.mode.into(),
            metric: opts.metric.into(),
            max_iter: opts.max_iter,
            tol: opts.tol,
            exec: self.exec,
        })
    }
}

fn density_params(opts: &DensityOpts, defaults: &DatasetDefaults) -> (f64, DensityKernel) {
    (
        opts.t.or(defaults.t).unwrap_or(density::DEFAULT_T),
        opts.kernel.map(Into::into).or(defaults.kernel).unwrap_or_default(),
    )
}

fn run_density(ctx: &Ctx, args: DensityArgs) -> Result<(), Error> {
    let (dist, defaults) = if args.distances {
        let d = dataset::load_distance_file(&args.data.input)?;
        let name = args
            .data
            .input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        (d, ctx.config.for_dataset(&name))
    } else {
        let (data, defaults) = ctx.load(&args.data)?;
        (pairwise_euclidean(&data, ctx.exec), defaults)
    };
    let (t, kernel) = density_params(&args.density, &defaults);
    let profile = density::build_profile(&dist, t, kernel, ctx.exec)?;
    match args.out {
        DensityOut::Json => {
            let mut value = profile.points_json();
            value["t"] = t.into();
            println!("{}", serde_json::to_string_pretty(&value).unwrap());
        }
        DensityOut::DecisionGraph => {
            std::fs::write(&args.output, profile.decision_graph_text()).map_err(|source| Error::Io {
                path: args.output.clone(),
                source,
            })?;
            eprintln!("wrote {} (column 1: rho, column 2: delta)", args.output.display());
        }
    }
    Ok(())
}

fn run_cluster(ctx: &Ctx, args: ClusterArgs) -> Result<(), Error> {
    let (data, defaults) = ctx.load(&args.data)?;
    let (t, kernel) = density_params(&args.density, &defaults);
    let improved = ctx.improved(&args.kernel, &defaults)?;
    let rule = match args.k {
        Some(k) if !args.auto_k => CenterRule::TopK { k },
        _ => CenterRule::Jump { max_k: args.max_k },
    };

    let (result, centers) = match args.algorithm {
        Algorithm::Improved => {
            let out = clustering::density_kmeans(
                &data,
                &PipelineConfig {
                    t,
                    density_kernel: kernel,
                    centers: rule,
                    improved,
                },
            )?;
            (out.result, Some(out.centers))
        }
        Algorithm::Baseline => {
            let k = match rule {
                CenterRule::TopK { k } => k,
                CenterRule::Jump { max_k } => {
                    let dist = pairwise_euclidean(&data, ctx.exec);
                    let profile = density::build_profile(&dist, t, kernel, ctx.exec)?;
                    centers::select_by_jump(&profile, max_k.min(data.len().saturating_sub(1)))?.k()
                }
            };
            let cfg = KMeansConfig {
                k,
                seed: args.seed,
                max_iter: args.kernel.max_iter,
                tol: args.kernel.tol,
                exec: ctx.exec,
            };
            (clustering::kmeans_baseline(&data, &cfg)?, None)
        }
    };

    let mut value: serde_json::Value = serde_json::from_str(&result.to_json(!args.no_timing)).unwrap();
    value["dataset"] = data.name().into();
    if let Some(sel) = centers {
        value["centers"] = serde_json::to_value(&sel).unwrap();
    }
    if let Some(labels) = data.labels() {
        value["accuracy"] = dataset::accuracy(&result.assignment, labels)?.accuracy.into();
    }
    println!("{}", serde_json::to_string_pretty(&value).unwrap());
    Ok(())
}

fn run_bench(ctx: &Ctx, args: BenchArgs) -> Result<(), Error> {
    let (data, defaults) = ctx.load(&args.data)?;
    if data.labels().is_none() {
        return Err(Error::MissingLabels);
    }
    if args.runs == 0 {
        return Err(Error::InvalidParameter("--runs must be at least 1".into()));
    }
    let (t, kernel) = density_params(&args.density, &defaults);
    let mut cfg = BenchConfig::new(args.k, args.runs, args.seed_base);
    cfg.max_iter = args.kernel.max_iter;
    cfg.tol = args.kernel.tol;
    cfg.parallel_runs = args.parallel;
    cfg.pipeline = PipelineConfig {
        t,
        density_kernel: kernel,
        centers: CenterRule::TopK { k: args.k },
        improved: ctx.improved(&args.kernel, &defaults)?,
    };
    let outcome = bench::run_benchmark(&data, &cfg)?;
    let json = outcome.report.to_json(!args.no_timing);
    if let Some(path) = &args.json {
        std::fs::write(path, &json).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
    }
    match args.format {
        BenchFormat::Json => println!("{json}"),
        BenchFormat::Table => print!("{}", outcome.report.text_table()),
    }
    Ok(())
}

fn run_serve(ctx: &Ctx, args: ServeArgs) -> Result<(), Error> {
    let (data, defaults) = ctx.load(&args.data)?;
    let (t, kernel) = density_params(&args.density, &defaults);
    let improved = ImprovedConfig {
        q: KernelSpec::new(args.q.or(defaults.q).unwrap_or(KernelSpec::DEFAULT_Q))?,
        mode: args.mode.into(),
        exec: ctx.exec,
        ..Default::default()
    };
    let state = ServeState::new(data, t, kernel, improved, args.k);
    if let Some(err) = &state.profile_error {
        eprintln!("warning: density profile unavailable: {err}");
    }
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| Error::InvalidParameter(format!("bad address: {e}")))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|source| Error::Io {
        path: PathBuf::from("<runtime>"),
        source,
    })?;
    runtime
        .block_on(serve::serve(state, addr))
        .map_err(|source| Error::Io {
            path: PathBuf::from(addr.to_string()),
            source,
        })
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
    let config = match cli.config.as_deref().map(ConfigFile::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let ctx = Ctx {
        exec: if cli.sequential { Exec::Sequential } else { Exec::Parallel },
        config,
    };
    let result = match cli.command {
        Command::Density(a) => run_density(&ctx, a),
        Command::Cluster(a) => run_cluster(&ctx, a),
        Command::Bench(a) => run_bench(&ctx, a),
        Command::Serve(a) => run_serve(&ctx, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
