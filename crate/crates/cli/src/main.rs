//! Command-line frontend: simulate trajectories, estimate models, monitor
//! streams, tabulate critical values and run the replicated studies.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gwmon::critvals::{self, CriticalValueTable, SupMode};
use gwmon::detect::{self, DetectorKind, Horizon, MonitorConfig, Statistic};
use gwmon::estimate::{self, Flavor};
use gwmon::experiments::{self, StudyConfig};
use gwmon::model::{GinarSpec, ModelSpec};
use gwmon::rng::rng_from_seed;
use gwmon::simulate::{self, Trajectory};

#[derive(Parser)]
#[command(name = "gwmon", version, about = "Online change-point monitoring for branching count processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a trajectory, optionally with a single change in dynamics.
    Simulate(SimulateArgs),
    /// Estimate moment matrices from a trajectory CSV.
    Estimate(EstimateArgs),
    /// Monitor a stream of observations against a training sample.
    Monitor(MonitorArgs),
    /// Simulate critical-value tables for the sup statistics.
    Critvals(CritvalsArgs),
    /// Run a replicated rejection-rate study.
    Study(StudyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Model JSON ({"p":..,"offspring":[[..]],"innovation":[..]}).
    #[arg(long, conflicts_with = "ginar")]
    model: Option<PathBuf>,
    /// GINAR JSON ({"order":..,"zeta":[..],"eta":..,"init":[..]}).
    #[arg(long)]
    ginar: Option<PathBuf>,
    /// Number of generations to simulate.
    #[arg(long)]
    steps: usize,
    /// Training length recorded in the sidecar (defaults to the full path).
    #[arg(long)]
    m: Option<usize>,
    /// Post-change model JSON; requires --k-star.
    #[arg(long, requires = "k_star")]
    change: Option<PathBuf>,
    /// Change index: the dynamics switch at generation m + k*.
    #[arg(long = "k-star")]
    k_star: Option<usize>,
    /// Generations to discard before recording.
    #[arg(long, default_value_t = 0)]
    burnin: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path; a JSON sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    /// Trajectory CSV (sidecar JSON picked up automatically).
    #[arg(long)]
    traj: PathBuf,
    /// Training length override.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_enum, default_value_t = FlavorArg::Cls)]
    flavor: FlavorArg,
    /// Estimates JSON output (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional residual CSV over the training range.
    #[arg(long)]
    residuals: Option<PathBuf>,
}

#[derive(Args)]
struct MonitorArgs {
    /// Training trajectory CSV; its first m+1 observations are the training
    /// sample.
    #[arg(long)]
    train: PathBuf,
    /// Training length override.
    #[arg(long)]
    m: Option<usize>,
    /// Stream CSV of `x1,...,xp` lines, or `-` for stdin.
    #[arg(long, default_value = "-")]
    stream: String,
    #[arg(long, default_value_t = 0.25)]
    gamma: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = StatisticArg::Psi3)]
    statistic: StatisticArg,
    /// Direction vector for psi2, comma separated.
    #[arg(long)]
    direction: Option<String>,
    #[arg(long, value_enum, default_value_t = FlavorArg::Cls)]
    flavor: FlavorArg,
    #[arg(long, value_enum, default_value_t = DetectorArg::Y)]
    detector: DetectorArg,
    /// Monitored types, 1-based, comma separated (e.g. `1,2`).
    #[arg(long)]
    reduction: String,
    /// Closed-end horizon multiple T; omit for open-end monitoring.
    #[arg(long)]
    horizon: Option<f64>,
    /// Critical-value table JSON (from `gwmon critvals`).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Explicit critical value, bypassing the table.
    #[arg(long = "critical-value")]
    critical_value: Option<f64>,
}

#[derive(Args)]
struct CritvalsArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::MaxAbs)]
    mode: ModeArg,
    /// Significance levels, comma separated.
    #[arg(long, default_value = "0.05,0.025")]
    alpha: String,
    #[arg(long, default_value_t = 200_000)]
    paths: usize,
    #[arg(long, default_value_t = 10_000)]
    grid: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    /// Replicates per cell (>= 1).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    replicates: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Custom study parameters JSON (overrides the scenario defaults).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Reuse a cached critical-value table instead of regenerating it.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Output directory for CSV/text tables and the run manifest.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    Cls,
    Wcls,
}

impl From<FlavorArg> for Flavor {
    fn from(f: FlavorArg) -> Flavor {
        match f {
            FlavorArg::Cls => Flavor::Cls,
            FlavorArg::Wcls => Flavor::Wcls,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StatisticArg {
    Psi1,
    Psi2,
    Psi3,
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectorArg {
    /// Mean-level detector (mean residuals).
    Y,
    /// Mean-and-variance detector (stacked residual pairs).
    Z,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    MaxAbs,
    Norm,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    /// Null rejection rates of the 2-type model at T = 1 and T = 5.
    Null2,
    /// Closed-end power grid of the 2-type model.
    Power2,
    /// Mean-level vs mean-and-variance tests on the integer autoregression.
    Ginar,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => run_simulate(args),
        Command::Estimate(args) => run_estimate(args),
        Command::Monitor(args) => run_monitor(args),
        Command::Critvals(args) => run_critvals(args),
        Command::Study(args) => run_study(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&raw).with_context(|| format!("parsing {}", path.display()))
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let (spec, default_x0) = match (&args.model, &args.ginar) {
        (Some(path), None) => (load_json::<ModelSpec>(path)?, None),
        (None, Some(path)) => {
            let ginar: GinarSpec = load_json(path)?;
            let (spec, x0) = ginar.embed();
            (spec, Some(x0))
        }
        _ => bail!("exactly one of --model or --ginar is required"),
    };
    if let Err(err) = spec.assert_stable() {
        eprintln!("warning: {err}");
    }
    let x0 = default_x0.unwrap_or_else(|| vec![0; spec.p()]);
    let mut rng = rng_from_seed(args.seed);

    let mut traj = match (&args.change, args.k_star) {
        (Some(star_path), Some(k_star)) => {
            let star: ModelSpec = load_json(star_path)?;
            let m = args.m.context("--change requires --m (training length)")?;
            simulate::simulate_with_change(&spec, &star, m, k_star, args.steps, &x0, &mut rng)?
        }
        _ => {
            let mut t = simulate::simulate_with_burnin(&spec, &x0, args.steps, args.burnin, &mut rng);
            if let Some(m) = args.m {
                t.set_training_len(m)?;
            }
            t
        }
    };
    traj.meta.seed = Some(args.seed);
    traj.save(&args.out)?;
    eprintln!(
        "wrote {} observations (m = {}) to {}",
        traj.len(),
        traj.m(),
        args.out.display()
    );
    Ok(())
}

fn run_estimate(args: EstimateArgs) -> Result<()> {
    let mut traj = Trajectory::load(&args.traj)?;
    if let Some(m) = args.m {
        traj.set_training_len(m)?;
    }
    let est = estimate::estimate(&traj, traj.m(), args.flavor.into())?;
    let json = serde_json::to_string_pretty(&est)?;
    match &args.out {
        Some(path) => std::fs::write(path, json)?,
        None => println!("{json}"),
    }
    if let Some(path) = &args.residuals {
        let res = estimate::residuals(&traj, 1, traj.m(), &est)?;
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let p = traj.p();
        let headers: Vec<String> = (1..=p)
            .flat_map(|i| [format!("m{i}"), format!("n{i}")])
            .collect();
        writeln!(w, "n,{}", headers.join(","))?;
        for n in 1..=traj.m() {
            let stacked: Vec<String> =
                res.stacked_at(n).iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{n},{}", stacked.join(","))?;
        }
    }
    Ok(())
}

fn parse_reduction(raw: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|s| {
            let idx: usize = s.trim().parse().context("reduction indices are integers")?;
            if idx == 0 {
                bail!("reduction indices are 1-based");
            }
            Ok(idx - 1)
        })
        .collect()
}

fn run_monitor(args: MonitorArgs) -> Result<()> {
    let mut traj = Trajectory::load(&args.train)?;
    if let Some(m) = args.m {
        traj.set_training_len(m)?;
    }
    let reduction = parse_reduction(&args.reduction)?;
    let statistic = match args.statistic {
        StatisticArg::Psi1 => Statistic::Psi1,
        StatisticArg::Psi3 => Statistic::Psi3,
        StatisticArg::Psi2 => {
            let raw = args.direction.context("--statistic psi2 requires --direction")?;
            let c: Vec<f64> = raw
                .split(',')
                .map(|s| s.trim().parse::<f64>().context("bad direction entry"))
                .collect::<Result<_>>()?;
            Statistic::Psi2(c)
        }
    };
    let horizon = match args.horizon {
        Some(t) => Horizon::Closed(t),
        None => Horizon::Open,
    };
    let mut config = MonitorConfig {
        gamma: args.gamma,
        horizon,
        alpha: args.alpha,
        statistic,
        flavor: args.flavor.into(),
        detector: match args.detector {
            DetectorArg::Y => DetectorKind::MeanLevel,
            DetectorArg::Z => DetectorKind::MeanVariance,
        },
        reduction,
        critical_value: 0.0,
    };
    config.critical_value = match (args.critical_value, &args.table) {
        (Some(c), _) => c,
        (None, Some(path)) => {
            let table = critvals::load_table(path)?;
            critvals::critical_value(&config, &table)?
        }
        (None, None) => bail!("provide --table or --critical-value"),
    };

    let mut state = detect::monitor_init(&traj, config)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();

    let stream: Box<dyn BufRead> = if args.stream == "-" {
        Box::new(std::io::BufReader::new(std::io::stdin()))
    } else {
        Box::new(std::io::BufReader::new(
            std::fs::File::open(&args.stream)
                .with_context(|| format!("opening stream {}", args.stream))?,
        ))
    };

    let p = traj.p();
    let mut verdict = serde_json::json!({"verdict": "no_alarm"});
    for line in stream.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        let values: std::result::Result<Vec<u64>, _> =
            fields.iter().map(|f| f.trim().parse::<u64>()).collect();
        let x = match values {
            Ok(x) if x.len() == p => x,
            Ok(x) => bail!("stream row has {} fields, expected {p}", x.len()),
            // A header such as `x1,x2` is skipped.
            Err(_) => continue,
        };
        match state.update(&x) {
            detect::Decision::Continue { k, stat } => {
                writeln!(out, "{}", serde_json::json!({"k": k, "stat": stat, "alarm": false}))?;
            }
            detect::Decision::Alarm { tau } => {
                writeln!(
                    out,
                    "{}",
                    serde_json::json!({"k": tau, "stat": state.running_sup(), "alarm": true})
                )?;
                verdict = serde_json::json!({"verdict": "alarm", "tau": tau});
                break;
            }
            detect::Decision::HorizonExhausted => {
                verdict = serde_json::json!({"verdict": "horizon_exhausted", "k_max": state.k()});
                break;
            }
        }
    }
    if verdict["verdict"] == "no_alarm" {
        verdict = serde_json::json!({
            "verdict": "no_alarm",
            "k_max": state.k(),
            "sup": state.running_sup(),
        });
    }
    writeln!(out, "{verdict}")?;
    Ok(())
}

fn run_critvals(args: CritvalsArgs) -> Result<()> {
    let alphas: Vec<f64> = args
        .alpha
        .split(',')
        .map(|s| s.trim().parse::<f64>().context("bad alpha"))
        .collect::<Result<_>>()?;
    let mode = match args.mode {
        ModeArg::MaxAbs => SupMode::MaxAbs,
        ModeArg::Norm => SupMode::Norm,
    };
    let table = critvals::build_table(
        args.gamma, args.dim, mode, &alphas, args.paths, args.grid, args.seed,
    )?;
    critvals::save_table(&table, &args.out)?;
    for (alpha, (q, se)) in alphas
        .iter()
        .zip(table.quantiles.iter().zip(&table.standard_errors))
    {
        eprintln!("alpha {alpha}: quantile {q:.4} (MC se {se:.4})");
    }
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn write_table(dir: &Path, name: &str, table: &experiments::RateTable) -> Result<()> {
    std::fs::write(dir.join(format!("{name}.csv")), table.to_csv())?;
    std::fs::write(dir.join(format!("{name}.txt")), table.to_text())?;
    Ok(())
}

fn run_study(args: StudyArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out)?;
    let (scenario_name, mut cfg) = match args.scenario {
        ScenarioArg::Null2 => ("null_two_type", StudyConfig::null_two_type(5.0)),
        ScenarioArg::Power2 => ("power_two_type", StudyConfig::power_two_type()),
        ScenarioArg::Ginar => ("ginar_comparison", StudyConfig::ginar_comparison()),
    };
    if let Some(path) = &args.config {
        cfg = load_json(path)?;
    }
    if let Some(reps) = args.replicates {
        cfg.replicates = reps as usize;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;

    let table: CriticalValueTable = match &args.table {
        Some(path) => {
            let t = critvals::load_table(path)?;
            if (t.gamma - cfg.gamma).abs() > 1e-12 {
                bail!("table gamma {} does not match study gamma {}", t.gamma, cfg.gamma);
            }
            t
        }
        None => {
            eprintln!("simulating critical values (paths 2e5, grid 1e4) ...");
            let t = experiments::study_table(cfg.gamma, cfg.seed)?;
            critvals::save_table(&t, &args.out.join("critical_values.json"))?;
            t
        }
    };

    match args.scenario {
        ScenarioArg::Null2 => {
            for t_horizon in [1.0, 5.0] {
                let mut run_cfg = cfg.clone();
                run_cfg.t = t_horizon;
                let result = experiments::run_null_table(&run_cfg, &table)?;
                let name = format!("null_t{}", t_horizon as u64);
                write_table(&args.out, &name, &result)?;
                println!("{}", result.to_text());
            }
        }
        ScenarioArg::Power2 => {
            let (cls, wcls) = experiments::run_power_table(&cfg, &table)?;
            write_table(&args.out, "power_cls", &cls)?;
            write_table(&args.out, "power_wcls", &wcls)?;
            println!("{}", cls.to_text());
            println!("{}", wcls.to_text());
        }
        ScenarioArg::Ginar => {
            let (t1, t2) = experiments::run_ginar_comparison(&cfg, &table)?;
            write_table(&args.out, "ginar_type1", &t1)?;
            write_table(&args.out, "ginar_type2", &t2)?;
            println!("{}", t1.to_text());
            println!("{}", t2.to_text());
        }
    }

    let manifest = experiments::run_manifest(scenario_name, &cfg, &table)?;
    std::fs::write(args.out.join("manifest.json"), manifest)?;
    eprintln!("study outputs in {}", args.out.display());
    Ok(())
}
