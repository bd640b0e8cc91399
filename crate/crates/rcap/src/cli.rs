//! Command-line surface: generate, ingest tides, cluster, build, solve,
//! evaluate, and run comparison suites. Every randomized command takes a
//! seed and is bit-reproducible.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rcap_core::evaluate;
use rcap_core::geo::haversine_nm;
use rcap_core::model::{Allocation, Instance};
use rcap_core::solver::{
    build_model, reduce_zones, solve_cavabb, solve_variant_suite, write_lp, LinkForm, Limits,
    ModelVariant, SuiteConfig, VariantTag,
};
use rcap_core::tides::{align_to_minute_grid, derive_states, interpolate_station_levels};

use crate::clock::InstantClock;
use crate::gauge;
use crate::report;
use crate::synth::{self, GenerateProfile};
use crate::wire;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    fn input(path: &Path, message: impl ToString) -> Self {
        Self::Input { path: path.to_path_buf(), message: message.to_string() }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|source| CliError::Io { path: parent.to_path_buf(), source })?;
        }
    }
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    wire::instance_from_json(&read(path)?).map_err(|e| CliError::input(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    BestTidal,
    BetterTidal,
    ManyZones,
}

impl From<VariantArg> for VariantTag {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::BestTidal => VariantTag::BestTidal,
            VariantArg::BetterTidal => VariantTag::BetterTidal,
            VariantArg::ManyZones => VariantTag::ManyZones,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinkFormArg {
    Aggregated,
    Disaggregated,
}

impl From<LinkFormArg> for LinkForm {
    fn from(v: LinkFormArg) -> Self {
        match v {
            LinkFormArg::Aggregated => LinkForm::Aggregated,
            LinkFormArg::Disaggregated => LinkForm::Disaggregated,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rcap", about = "Rescue craft allocation toolkit", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic seeded instance.
    Generate(GenerateArgs),
    /// Tide gauge ingestion and tidal-state derivation.
    #[command(subcommand)]
    Tides(TidesCommand),
    /// Reduce an instance to k clustered zones.
    Cluster(ClusterArgs),
    /// Build the integer program and export it as an LP file.
    Build(BuildArgs),
    /// Solve an instance with the exact branch-and-bound.
    Solve(SolveArgs),
    /// Re-price solved allocations on the full-resolution instance.
    Eval(EvalArgs),
    /// Run the variant-by-zone-count comparison grid over seeds.
    Suite(SuiteArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 11)]
    pub vessels: usize,
    #[arg(long, default_value_t = 55)]
    pub stations: usize,
    #[arg(long, default_value_t = 1000)]
    pub zones: usize,
    /// Days of synthetic minute-resolution tides.
    #[arg(long, default_value_t = 30)]
    pub tide_days: u32,
    /// Use one shared tide curve at every station.
    #[arg(long)]
    pub correlated_tides: bool,
    /// Vessel-type catalog JSON; the built-in catalog when omitted.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum TidesCommand {
    /// Download gauge series as CSV files.
    Fetch(FetchArgs),
    /// Rebuild an instance's tidal states from gauge CSV files.
    Derive(DeriveArgs),
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// Gauge identifiers to fetch.
    #[arg(long, required = true, num_args = 1..)]
    pub gauge: Vec<String>,
    /// RFC 3339 window start.
    #[arg(long)]
    pub start: String,
    /// RFC 3339 window end.
    #[arg(long)]
    pub end: String,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Overrides the RCAP_GAUGE_ENDPOINT environment variable.
    #[arg(long)]
    pub endpoint: Option<String>,
}

#[derive(Debug, Args)]
pub struct DeriveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Gauge CSV files (at least three).
    #[arg(long, required = true, num_args = 1..)]
    pub gauges: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantArg::BestTidal)]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value_t = LinkFormArg::Disaggregated)]
    pub link_form: LinkFormArg,
    #[arg(long)]
    pub export_lp: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantArg::BestTidal)]
    pub variant: VariantArg,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<u64>,
    /// Accepted for interface stability; the search itself is sequential.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Report JSON destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Full-resolution instance to re-price against.
    #[arg(long)]
    pub instance: PathBuf,
    /// Solve reports whose allocations get compared; labels are file stems.
    #[arg(long, required = true, num_args = 1..)]
    pub reports: Vec<PathBuf>,
    /// Comparison CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Default: all three variants at their standard zone counts.
    #[arg(long, value_enum, num_args = 0..)]
    pub variants: Vec<VariantArg>,
    /// Zone counts; default depends on the variant when omitted.
    #[arg(long, num_args = 0..)]
    pub zones: Vec<usize>,
    #[arg(long, num_args = 0.., default_values_t = [1u64, 2, 3, 4, 5, 6, 7, 8, 9, 10])]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<u64>,
    /// Accepted for interface stability; runs execute sequentially.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn default_zone_counts(tag: VariantTag) -> &'static [usize] {
    match tag {
        VariantTag::ManyZones => &[10, 50, 100],
        VariantTag::BetterTidal => &[10, 20, 30],
        VariantTag::BestTidal => &[1, 2],
    }
}

fn suite_grid(args: &SuiteArgs) -> Vec<SuiteConfig> {
    let variants: Vec<VariantTag> = if args.variants.is_empty() {
        vec![VariantTag::ManyZones, VariantTag::BetterTidal, VariantTag::BestTidal]
    } else {
        args.variants.iter().map(|v| VariantTag::from(*v)).collect()
    };
    let mut grid = Vec::new();
    for variant in variants {
        let counts: Vec<usize> = if args.zones.is_empty() {
            default_zone_counts(variant).to_vec()
        } else {
            args.zones.clone()
        };
        for zone_count in counts {
            grid.push(SuiteConfig { variant, zone_count });
        }
    }
    grid
}

/// Runs one parsed command and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Tides(TidesCommand::Fetch(args)) => cmd_tides_fetch(args),
        Command::Tides(TidesCommand::Derive(args)) => cmd_tides_derive(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::Build(args) => cmd_build(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Suite(args) => cmd_suite(args),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<i32, CliError> {
    let catalog_text = match &args.catalog {
        Some(path) => read(path)?,
        None => synth::DEFAULT_CATALOG.to_string(),
    };
    let catalog = synth::parse_catalog(&catalog_text)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let profile = GenerateProfile {
        vessel_types: args.vessels,
        stations: args.stations,
        zones: args.zones,
        tide_days: args.tide_days,
        correlated_tides: args.correlated_tides,
    };
    let instance = synth::generate_instance(args.seed, &profile, &catalog)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    write(&args.out, &wire::instance_to_json(&instance))?;
    Ok(0)
}

fn cmd_tides_fetch(args: FetchArgs) -> Result<i32, CliError> {
    let endpoint = args
        .endpoint
        .or_else(|| std::env::var("RCAP_GAUGE_ENDPOINT").ok())
        .ok_or_else(|| {
            CliError::Invalid("no gauge endpoint: pass --endpoint or set RCAP_GAUGE_ENDPOINT".into())
        })?;
    let start = parse_time(&args.start)?;
    let end = parse_time(&args.end)?;
    for id in &args.gauge {
        let series = gauge::fetch_gauge_series(&endpoint, id, start, end)
            .map_err(|e| CliError::Invalid(format!("gauge {id}: {e}")))?;
        write(&args.out_dir.join(format!("{id}.csv")), &gauge::gauge_to_csv(&series))?;
    }
    Ok(0)
}

fn parse_time(text: &str) -> Result<DateTime<Utc>, CliError> {
    DateTime::parse_from_rfc3339(text)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| CliError::Invalid(format!("bad timestamp {text:?}: {e}")))
}

fn cmd_tides_derive(args: DeriveArgs) -> Result<i32, CliError> {
    let mut instance = load_instance(&args.instance)?;
    let mut gauges = Vec::new();
    for path in &args.gauges {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "gauge".to_string());
        let series = gauge::parse_gauge_csv(
            &read(path)?,
            &id,
            rcap_core::geo::LatLon::new(0.0, 0.0),
        )
        .map_err(|e| CliError::input(path, e))?;
        gauges.push(series);
    }
    let gauges = align_to_minute_grid(&gauges)
        .map_err(|e| CliError::Invalid(format!("gauge alignment: {e:?}")))?;
    let levels = interpolate_station_levels(&gauges, &instance.stations, haversine_nm)
        .map_err(|e| CliError::Invalid(format!("interpolation: {e:?}")))?;
    instance.tidal = derive_states(&levels, &instance.stations, &instance.vessels)
        .map_err(|e| CliError::Invalid(format!("state derivation: {e:?}")))?;
    write(&args.out, &wire::instance_to_json(&instance))?;
    Ok(0)
}

fn cmd_cluster(args: ClusterArgs) -> Result<i32, CliError> {
    let instance = load_instance(&args.instance)?;
    let reduced = reduce_zones(&instance, args.k, args.seed)
        .map_err(|e| CliError::Invalid(format!("clustering: {e:?}")))?;
    write(&args.out, &wire::instance_to_json(&reduced))?;
    Ok(0)
}

fn cmd_build(args: BuildArgs) -> Result<i32, CliError> {
    let instance = load_instance(&args.instance)?;
    let variant = ModelVariant::for_instance(&instance, args.variant.into())
        .map_err(|e| CliError::Invalid(format!("model: {e:?}")))?;
    let model = build_model(&instance, &variant, args.link_form.into());
    write(&args.export_lp, &write_lp(&model))?;
    Ok(0)
}

fn cmd_solve(args: SolveArgs) -> Result<i32, CliError> {
    let instance = load_instance(&args.instance)?;
    let variant = ModelVariant::for_instance(&instance, args.variant.into())
        .map_err(|e| CliError::Invalid(format!("model: {e:?}")))?;
    let limits = Limits { time_limit_s: args.time_limit, node_limit: args.node_limit };
    let clock = InstantClock::new();
    let report = solve_cavabb(&instance, &variant, limits, &clock);
    let json = wire::report_to_json(&report);
    match &args.out {
        Some(path) => write(path, &json)?,
        None => print!("{json}"),
    }
    Ok(wire::exit_code_for(report.status))
}

fn cmd_eval(args: EvalArgs) -> Result<i32, CliError> {
    let instance = load_instance(&args.instance)?;
    let mut labelled: Vec<(String, Allocation)> = Vec::new();
    for path in &args.reports {
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let alloc = wire::allocation_from_report_json(&read(path)?)
            .map_err(|e| CliError::input(path, e))?
            .ok_or_else(|| CliError::input(path, "report carries no allocation"))?;
        labelled.push((label, alloc));
    }
    let rows = evaluate::compare_allocations(&instance, &labelled)
        .map_err(|e| CliError::Invalid(format!("evaluation: {e:?}")))?;
    let csv = report::comparison_csv(&rows);
    match &args.out {
        Some(path) => write(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn cmd_suite(args: SuiteArgs) -> Result<i32, CliError> {
    let instance = load_instance(&args.instance)?;
    let grid = suite_grid(&args);
    let limits = Limits { time_limit_s: args.time_limit, node_limit: args.node_limit };
    let mut combined = String::new();
    for (n, &seed) in args.seeds.iter().enumerate() {
        let clock = InstantClock::new();
        let runs = solve_variant_suite(&instance, &grid, seed, limits, &clock);
        for (cfg, run) in grid.iter().zip(&runs) {
            if let Ok(run) = run {
                let name = format!("seed-{seed}/{}-z{}.report.json", cfg.variant.name(), cfg.zone_count);
                write(&args.out_dir.join(name), &wire::report_to_json(&run.report))?;
            }
        }
        let csv = report::suite_csv(seed, &runs);
        if n == 0 {
            combined.push_str(&csv);
        } else {
            // Drop the header on subsequent seeds.
            if let Some(idx) = csv.find('\n') {
                combined.push_str(&csv[idx + 1..]);
            }
        }
    }
    write(&args.out_dir.join("suite.csv"), &combined)?;
    Ok(0)
}
