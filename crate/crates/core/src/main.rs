//! Command-line front end: simulate click datasets, certify
//! nonclassicality, and emit plot-ready sweep curves.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use clickmux::config::{self, RunConfig};
use clickmux::error::{Error, Result};
use clickmux::estimate::DEFAULT_THRESHOLD;
use clickmux::oracle;
use clickmux::runner::{self, AnalyticSource, Condition, EmpiricalSource, MomentSource};
use clickmux::simulate::{sample_dataset, ClickDataset};
use clickmux::cluster;

#[derive(Parser)]
#[command(
    name = "clickmux",
    version,
    about = "Multiplexed click detection: simulate datasets and certify nonclassicality"
)]
struct Cli {
    /// Rayon worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a click dataset and write it in the CLICKHIST format.
    Simulate(SimulateCmd),
    /// Evaluate nonclassicality conditions on a dataset or analytically.
    Certify(CertifyCmd),
    /// Sweep the two-channel reference comparison curves over the mean
    /// thermal photon number (70:30 splitting, efficiency 0.7,
    /// m-photon-added thermal input).
    Fig2(Fig2Cmd),
    /// Sweep the emitter-cluster condition values over the cluster size.
    ClusterSweep(ClusterSweepCmd),
}

/// Run-configuration source shared by `simulate` and `certify`.
#[derive(Args)]
struct ConfigArgs {
    /// JSON run configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Built-in preset: "fig2" or "cluster-experiment".
    #[arg(long)]
    preset: Option<String>,

    /// Emitter count for the cluster-experiment preset.
    #[arg(long = "M")]
    emitters: Option<usize>,

    /// Overall efficiency for the cluster-experiment preset.
    #[arg(long)]
    eta: Option<f64>,

    /// Override the number of pulses.
    #[arg(long)]
    pulses: Option<u64>,

    /// Override the RNG seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<Option<RunConfig>> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParameter(
                    "--config and --preset are mutually exclusive".into(),
                ))
            }
            (Some(path), None) => {
                if self.emitters.is_some() || self.eta.is_some() {
                    return Err(Error::InvalidParameter(
                        "--M and --eta only apply to --preset".into(),
                    ));
                }
                RunConfig::from_json(&read_file(path)?)?
            }
            (None, Some(name)) => config::preset(name, self.emitters, self.eta)?,
            (None, None) => return Ok(None),
        };
        if let Some(p) = self.pulses {
            cfg.pulses = p;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(Some(cfg))
    }

    fn require(&self) -> Result<RunConfig> {
        self.resolve()?.ok_or_else(|| {
            Error::InvalidParameter("either --config or --preset is required".into())
        })
    }
}

#[derive(Args)]
struct SimulateCmd {
    #[command(flatten)]
    source: ConfigArgs,

    /// Output CLICKHIST path; the run manifest goes to <out>.manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CertifyCmd {
    #[command(flatten)]
    source: ConfigArgs,

    /// CLICKHIST dataset to certify; without it the run is analytic and
    /// needs --config or --preset.
    #[arg(long)]
    dataset: Option<PathBuf>,

    /// Condition to evaluate (repeatable): partition text "1,2|3|4",
    /// "pair i j", q_pb, q_b, mandel_q, matrix_of_moments, "asymmetric k".
    #[arg(long = "condition")]
    conditions: Vec<String>,

    /// Significance threshold for the nonclassical verdict.
    #[arg(long)]
    threshold: Option<f64>,

    /// Output report path (JSON); a CSV table goes to <out>.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Fig2Cmd {
    /// Number of added photons of the photon-added thermal input.
    #[arg(long, default_value_t = 1)]
    m: usize,

    /// Mean thermal photon number range, swept inclusively.
    #[arg(long, default_value_t = 0.0)]
    nbar_min: f64,

    #[arg(long, default_value_t = 3.0)]
    nbar_max: f64,

    #[arg(long, default_value_t = 0.05)]
    step: f64,

    /// Scale the click-covariance column by 5 for display.
    #[arg(long)]
    scale_fig2: bool,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClusterSweepCmd {
    /// Overall detection efficiency of the cluster setup.
    #[arg(long, default_value_t = 0.009)]
    eta: f64,

    /// Largest cluster size; the sweep covers M = 1..=M_max.
    #[arg(long = "m-max", default_value_t = 14)]
    m_max: u64,

    /// Scale both condition columns by 10^4 for display.
    #[arg(long)]
    scale_1e4: bool,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Dataset(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| Error::Dataset(format!("cannot write {}: {e}", path.display())))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_manifest(out: &Path, cfg: &RunConfig) -> Result<()> {
    write_file(&manifest_path(out), &cfg.resolved()?.to_json())
}

fn cmd_simulate(cmd: &SimulateCmd) -> Result<()> {
    let cfg = cmd.source.require()?;
    let plan = cfg.build_plan()?;
    let dataset = sample_dataset(&plan)?;
    write_file(&cmd.out, &dataset.to_clickhist())?;
    write_manifest(&cmd.out, &cfg)?;
    println!(
        "wrote {}: {} channels, {} pulses, {:.6} mean clicks per pulse",
        cmd.out.display(),
        dataset.channels(),
        dataset.pulses(),
        dataset.mean_clicks_per_pulse()
    );
    Ok(())
}

fn cmd_certify(cmd: &CertifyCmd) -> Result<()> {
    let cfg = cmd.source.resolve()?;
    let threshold = cmd
        .threshold
        .or(cfg.as_ref().map(|c| c.threshold))
        .unwrap_or(DEFAULT_THRESHOLD);

    let source: Box<dyn MomentSource> = match &cmd.dataset {
        Some(path) => Box::new(EmpiricalSource::new(ClickDataset::parse(&read_file(path)?)?)),
        None => {
            let cfg = cfg.as_ref().ok_or_else(|| {
                Error::InvalidParameter(
                    "analytic certification needs --config or --preset".into(),
                )
            })?;
            Box::new(AnalyticSource::new(
                cfg.state.build()?,
                cfg.splitting.build()?,
                cfg.build_detectors()?,
            )?)
        }
    };

    let conditions: Vec<Condition> = if !cmd.conditions.is_empty() {
        cmd.conditions
            .iter()
            .map(|c| Condition::parse(c))
            .collect::<Result<_>>()?
    } else if let Some(cfg) = &cfg {
        cfg.build_conditions()?
    } else {
        config::default_conditions(source.channels())?
    };

    let mut report = runner::certify(source.as_ref(), &conditions, threshold)?;
    if let Some(cfg) = &cfg {
        report.configuration = Some(
            serde_json::to_value(cfg.resolved()?)
                .map_err(|e| Error::InvalidParameter(format!("config echo: {e}")))?,
        );
        write_manifest(&cmd.out, cfg)?;
    }

    write_file(&cmd.out, &report.to_json())?;
    write_file(&cmd.out.with_extension("csv"), &report.to_csv())?;

    for r in &report.results {
        println!(
            "{}: value {:.6e} stderr {:.2e} significance {:.2} -> {:?}",
            r.label, r.value, r.stderr, r.significance, r.verdict
        );
    }
    match &report.best_violation {
        Some(label) => println!("best violation: {label}"),
        None => println!("no violation found"),
    }
    Ok(())
}

fn cmd_fig2(cmd: &Fig2Cmd) -> Result<()> {
    if !(cmd.step > 0.0) || cmd.nbar_max < cmd.nbar_min || cmd.nbar_min < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bad sweep range [{}, {}] step {}",
            cmd.nbar_min, cmd.nbar_max, cmd.step
        )));
    }
    let steps = ((cmd.nbar_max - cmd.nbar_min) / cmd.step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| cmd.nbar_min + i as f64 * cmd.step)
        .collect();
    let points = oracle::comparison_curves(cmd.m, &grid)?;
    let click_scale = if cmd.scale_fig2 { 5.0 } else { 1.0 };

    let mut csv = String::from("nbar,click_covariance,photon_covariance\n");
    for p in &points {
        writeln!(
            csv,
            "{:.16e},{:.16e},{:.16e}",
            p.nbar,
            click_scale * p.click_covariance,
            p.photon_covariance
        )
        .unwrap();
    }
    write_file(&cmd.out, &csv)?;
    write_file(
        &manifest_path(&cmd.out),
        &pretty_json(&serde_json::json!({
            "subcommand": "fig2",
            "m": cmd.m,
            "nbar_min": cmd.nbar_min,
            "nbar_max": cmd.nbar_max,
            "step": cmd.step,
            "scale_fig2": cmd.scale_fig2,
        })),
    )?;
    println!("wrote {} ({} rows)", cmd.out.display(), points.len());
    Ok(())
}

fn cmd_cluster_sweep(cmd: &ClusterSweepCmd) -> Result<()> {
    let curve = cluster::sweep(cmd.eta, cmd.m_max)?;
    let scale = if cmd.scale_1e4 { 1e4 } else { 1.0 };

    let mut csv = String::from("emitters,cov_value,full_value\n");
    for p in &curve.points {
        writeln!(
            csv,
            "{},{:.16e},{:.16e}",
            p.emitters,
            scale * p.cov_value,
            scale * p.full_value
        )
        .unwrap();
    }
    write_file(&cmd.out, &csv)?;
    write_file(
        &manifest_path(&cmd.out),
        &pretty_json(&serde_json::json!({
            "subcommand": "cluster-sweep",
            "eta": cmd.eta,
            "m_max": cmd.m_max,
            "scale_1e4": cmd.scale_1e4,
        })),
    )?;
    println!("wrote {} ({} rows)", cmd.out.display(), curve.points.len());
    Ok(())
}

fn run(command: &Command) -> Result<()> {
    match command {
        Command::Simulate(cmd) => cmd_simulate(cmd),
        Command::Certify(cmd) => cmd_certify(cmd),
        Command::Fig2(cmd) => cmd_fig2(cmd),
        Command::ClusterSweep(cmd) => cmd_cluster_sweep(cmd),
    }
}

fn pretty_json(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json");
    s.push('\n');
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        match cli.threads {
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("--threads: {e}")))
                .and_then(|pool| pool.install(|| run(&cli.command))),
            None => run(&cli.command),
        }
    }));
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(_) => ExitCode::from(1),
    }
}
