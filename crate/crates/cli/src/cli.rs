use std::cell::RefCell;
use std::fmt::Write;
use std::fs;
use std::io;
use std::path::PathBuf;

use cgf_core::experiments::{
    run_experiment, run_validation, ExperimentConfig, ExperimentId, NRange, Thresholds,
};
use cgf_core::geometry::{
    expected_nth_distance, nth_neighbor_ccdf, nth_neighbor_pdf, nth_neighbor_quantile, Region,
};
use cgf_core::pgf::{
    invert_fourier, pgf, pgf_adaptive, pgf_at, Algorithm, InversionParams, SplitModel,
};
use cgf_core::sim::{run_episode_batch, BatchConfig, ProgressMetric, SimOptions};
use cgf_core::CgfError;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "cgf",
    version,
    about = "Contention-resolution and hop-distance toolkit"
)]
pub struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic PMF of the CRI length.
    Pmf(PmfArgs),
    /// Recover one PMF value by Fourier inversion of the PGF.
    Invert(InvertArgs),
    /// n-th neighbour distance law for a decision region.
    Distance(DistanceArgs),
    /// Batch of simulated contention episodes.
    Simulate(SimulateArgs),
    /// Run one analytic-vs-simulation experiment table.
    Experiment(ExperimentArgs),
    /// Analytic-vs-simulation agreement for all protocols.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Sta,
    Auction,
    AuctionSkip,
}

impl From<ProtocolArg> for Algorithm {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Sta => Algorithm::Sta,
            ProtocolArg::Auction => Algorithm::Auction,
            ProtocolArg::AuctionSkip => Algorithm::AuctionSkip,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RegionArg {
    Sdr,
    Cdr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Stat {
    Ccdf,
    Pdf,
    Mean,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "sta")]
    protocol: ProtocolArg,
    /// Initial number of contenders.
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    q: usize,
    /// Binary coin bias (requires q = 2).
    #[arg(long)]
    p: Option<f64>,
}

impl ModelArgs {
    fn model(&self) -> Result<SplitModel, CgfError> {
        match self.p {
            Some(_) if self.q != 2 => Err(CgfError::Usage("--p needs --q 2".into())),
            Some(p) => SplitModel::binary(self.n, p),
            None => SplitModel::fair(self.n, self.q),
        }
    }
}

#[derive(Debug, Args)]
struct GeometryArgs {
    /// Transmission range R.
    #[arg(long = "range", default_value_t = 1.0)]
    range: f64,
    /// Lens radius (defaults to R).
    #[arg(long)]
    rho: Option<f64>,
    /// Sector aperture in radians (defaults to the lens-area calibration).
    #[arg(long)]
    aperture: Option<f64>,
}

impl GeometryArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        cfg.range = self.range;
        cfg.rho = self.rho.or(cfg.rho);
        cfg.aperture = self.aperture.or(cfg.aperture);
    }

    fn region(&self, which: RegionArg) -> Result<Region, CgfError> {
        let mut cfg = ExperimentConfig::new(ExperimentId::DistPdfCdr);
        self.apply(&mut cfg);
        match which {
            RegionArg::Sdr => cfg.sdr(),
            RegionArg::Cdr => cfg.cdr(),
        }
    }
}

#[derive(Debug, Args)]
struct PmfArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Truncation order; adaptive when omitted.
    #[arg(long)]
    k_max: Option<usize>,
    /// Print zero-probability slot counts too.
    #[arg(long)]
    all: bool,
}

#[derive(Debug, Args)]
struct InvertArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Slot count to recover.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 8.0)]
    gamma: f64,
    /// Contour radius; derived from gamma when omitted.
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Debug, Args)]
struct DistanceArgs {
    #[arg(long, value_enum, default_value = "cdr")]
    region: RegionArg,
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Neighbour rank n (1 = nearest).
    #[arg(long, default_value_t = 1)]
    rank: usize,
    /// Number of points N in the region.
    #[arg(long = "of", default_value_t = 5)]
    of: usize,
    #[arg(long, value_enum, default_value = "ccdf")]
    stat: Stat,
    /// Evaluation distance for ccdf/pdf; a grid over [0, R] when omitted.
    #[arg(long)]
    d: Option<f64>,
    #[arg(long, default_value_t = 100)]
    grid: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Region relays are dropped into (STA defaults to sdr, auctions to cdr).
    #[arg(long, value_enum)]
    region: Option<RegionArg>,
    #[arg(long, default_value_t = 100_000)]
    reps: usize,
    #[arg(long, env = "CGF_SEED", default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Auction contenders are pre-sorted into bands (no all-contender slot).
    #[arg(long)]
    presplit: bool,
    /// Count the source's request slot in the CRI length.
    #[arg(long)]
    count_request: bool,
    /// Measure progress along the source-destination axis.
    #[arg(long)]
    projection: bool,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Experiment id; may come from the config file instead.
    id: Option<String>,
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Range of N, e.g. `2..5`.
    #[arg(long)]
    n: Option<NRange>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long = "range")]
    range: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    aperture: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, env = "CGF_SEED")]
    seed: Option<u64>,
    /// Auction experiments use the skipping variant.
    #[arg(long)]
    skip: bool,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, default_value = "2..5")]
    n: NRange,
    #[arg(long, default_value_t = 100_000)]
    reps: usize,
    #[arg(long, env = "CGF_SEED", default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.01)]
    tv: f64,
}

pub enum Failure {
    Core(CgfError),
    Io(io::Error),
}

impl From<CgfError> for Failure {
    fn from(e: CgfError) -> Self {
        Failure::Core(e)
    }
}

/// Rendered output plus the reason for a validation failure, if any.
pub struct Report {
    pub text: String,
    pub failed: Option<String>,
}

impl Report {
    fn ok(text: String) -> Self {
        Report { text, failed: None }
    }
}

pub fn run(cli: Cli) -> Result<Report, Failure> {
    match cli.command {
        Command::Pmf(a) => pmf(a),
        Command::Invert(a) => invert(a),
        Command::Distance(a) => distance(a),
        Command::Simulate(a) => simulate(a),
        Command::Experiment(a) => experiment(a, cli.output),
        Command::Validate(a) => validate(a),
    }
}

type Outcome = Result<Report, Failure>;

fn pmf(a: PmfArgs) -> Outcome {
    let model = a.model.model()?;
    let algo = Algorithm::from(a.model.protocol);
    let series = match a.k_max {
        Some(k) => pgf(algo, &model, k)?,
        None => pgf_adaptive(algo, &model)?,
    };
    let mut out = format!(
        "# protocol: {algo}\n# n: {}\n# tail_mass: {:e}\nk,probability\n",
        model.n(),
        series.tail_mass()
    );
    for (k, c) in series.coeffs().iter().enumerate() {
        if a.all || *c > 0.0 {
            writeln!(out, "{k},{c}").unwrap();
        }
    }
    Ok(Report::ok(out))
}

fn invert(a: InvertArgs) -> Outcome {
    let model = a.model.model()?;
    let algo = Algorithm::from(a.model.protocol);
    let params = InversionParams {
        r: a.radius,
        gamma: a.gamma,
    };
    let failure = RefCell::new(None);
    let inv = invert_fourier(
        |z| {
            pgf_at(algo, &model, z).unwrap_or_else(|e| {
                failure.borrow_mut().get_or_insert(e);
                z
            })
        },
        a.k,
        &params,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e.into());
    }
    let out = format!(
        "# protocol: {algo}\n# n: {}\nk,probability,raw,radius\n{},{},{},{}\n",
        model.n(),
        a.k,
        inv.probability,
        inv.raw,
        inv.radius
    );
    Ok(Report::ok(out))
}

fn distance(a: DistanceArgs) -> Outcome {
    let region = a.geometry.region(a.region)?;
    let (n, total) = (a.rank, a.of);
    let mut out = format!("# region: {:?}\n# rank: {n}\n# of: {total}\n", a.region).to_lowercase();
    let eval = |d: f64| match a.stat {
        Stat::Pdf => nth_neighbor_pdf(&region, n, total, d),
        _ => nth_neighbor_ccdf(&region, n, total, d),
    };
    match (a.stat, a.d) {
        (Stat::Mean, _) => {
            writeln!(out, "mean\n{}", expected_nth_distance(&region, n, total)?).unwrap()
        }
        (Stat::Median, _) => writeln!(
            out,
            "median\n{}",
            nth_neighbor_quantile(&region, n, total, 0.5)?
        )
        .unwrap(),
        (stat, Some(d)) => writeln!(out, "d,{}\n{d},{}", stat_name(stat), eval(d)?).unwrap(),
        (stat, None) => {
            if a.grid == 0 {
                return Err(CgfError::Usage("--grid must be at least 1".into()).into());
            }
            writeln!(out, "d,{}", stat_name(stat)).unwrap();
            for j in 0..=a.grid {
                let d = region.range() * j as f64 / a.grid as f64;
                writeln!(out, "{d},{}", eval(d)?).unwrap();
            }
        }
    }
    Ok(Report::ok(out))
}

fn stat_name(s: Stat) -> &'static str {
    match s {
        Stat::Ccdf => "ccdf",
        Stat::Pdf => "pdf",
        Stat::Mean => "mean",
        Stat::Median => "median",
    }
}

fn simulate(a: SimulateArgs) -> Outcome {
    let model = a.model.model()?;
    let algo = Algorithm::from(a.model.protocol);
    let which = a.region.unwrap_or(match algo {
        Algorithm::Sta => RegionArg::Sdr,
        _ => RegionArg::Cdr,
    });
    let mut config = BatchConfig::new(algo, a.geometry.region(which)?, model.n(), model.q());
    config.probs = model.probs().to_vec();
    config.presplit = a.presplit;
    config.sim = SimOptions {
        count_request_slot: a.count_request,
        progress: if a.projection {
            ProgressMetric::Projection
        } else {
            ProgressMetric::Distance
        },
    };
    let batch = run_episode_batch(&config, a.reps, a.seed)?;
    let mut out = String::new();
    match a.format {
        Format::Jsonl => {
            for r in batch.records() {
                out.push_str(&r.to_json_line());
                out.push('\n');
            }
        }
        Format::Csv => {
            let s = &batch.summary;
            writeln!(
                out,
                "# protocol: {algo}\n# n: {}\n# seed: {}\n# replications: {}",
                model.n(),
                a.seed,
                a.reps
            )
            .unwrap();
            writeln!(
                out,
                "# mean_slots: {}\n# var_slots: {}\n# backoffs: {}",
                s.mean_slots, s.var_slots, s.backoffs
            )
            .unwrap();
            if let Some(w) = s.mean_winner_distance {
                writeln!(out, "# mean_winner_distance: {w}").unwrap();
            }
            for (r, d) in s.mean_rank_distance.iter().enumerate() {
                writeln!(out, "# mean_distance_rank{}: {d}", r + 1).unwrap();
            }
            out.push_str("k,empirical\n");
            for (k, p) in s.pmf.iter().enumerate() {
                if *p > 0.0 {
                    writeln!(out, "{k},{p}").unwrap();
                }
            }
        }
    }
    Ok(Report::ok(out))
}

fn experiment(a: ExperimentArgs, output: Option<PathBuf>) -> Outcome {
    let mut cfg = match &a.config {
        Some(path) => match fs::read_to_string(path) {
            Ok(text) => ExperimentConfig::from_toml(&text)?,
            Err(e) => return Err(Failure::Io(e)),
        },
        None => {
            let id = a.id.as_deref().ok_or_else(|| {
                let ids: Vec<&str> = ExperimentId::ALL.iter().map(|i| i.name()).collect();
                CgfError::Usage(format!(
                    "missing experiment id; expected one of: {}",
                    ids.join(", ")
                ))
            })?;
            ExperimentConfig::new(id.parse()?)
        }
    };
    if let Some(id) = &a.id {
        cfg.id = id.parse()?;
    }
    cfg.n = a.n.or(cfg.n);
    cfg.q = a.q.unwrap_or(cfg.q);
    cfg.p = a.p.or(cfg.p);
    cfg.range = a.range.unwrap_or(cfg.range);
    cfg.rho = a.rho.or(cfg.rho);
    cfg.aperture = a.aperture.or(cfg.aperture);
    cfg.replications = a.reps.unwrap_or(cfg.replications);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.skip |= a.skip;
    if output.is_some() {
        cfg.output = output;
    }
    let table = run_experiment(&cfg)?;
    Ok(table_report(&table))
}

fn validate(a: ValidateArgs) -> Outcome {
    let thresholds = Thresholds {
        tv: a.tv,
        ..Thresholds::default()
    };
    let table = run_validation(a.n, a.reps, a.seed, thresholds)?;
    Ok(table_report(&table))
}

fn table_report(table: &cgf_core::experiments::ResultTable) -> Report {
    let failed: Vec<String> = table
        .failures()
        .map(|d| format!("{}={} (limit {})", d.name, d.value, d.threshold))
        .collect();
    Report {
        text: table.to_csv(),
        failed: (!failed.is_empty()).then(|| format!("diagnostics failed: {}", failed.join("; "))),
    }
}
