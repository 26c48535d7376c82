//! `sumur` command-line harness: figure data, audits and module front-ends.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use sumur::audit::{self, AuditConfig};
use sumur::dynamics::{self, Scenario};
use sumur::experiments;
use sumur::protocol;
use sumur::{BlochVector, Observable};

const EXIT_ASSERTION: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "sumur", version, about = "Sum and reverse uncertainty relation workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Run seed (required by stochastic commands; may come from --config).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON experiment configuration (for `qsl`, a scenario file).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Qutrit family sweep: variance sum, Robertson, Peierls-Bogoliubov and fidelity bounds.
    Fig1 {
        #[command(flatten)]
        common: Common,
        /// Comma-separated mixing weights in [0, 1].
        #[arg(long, value_delimiter = ',', conflicts_with = "points")]
        grid: Option<Vec<f64>>,
        /// Number of uniform intervals on [0, 1] when no grid is given.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Purity of the normalized uncertainty matrix for random qubits.
    Fig3 {
        #[command(flatten)]
        common: Common,
    },
    /// Randomized audit of every asserted inequality; JSON summary.
    Audit {
        #[command(flatten)]
        common: Common,
        /// Comma-separated dimensions (each at least 2).
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
    },
    /// Reverse speed-limit report for a Lindblad scenario.
    Qsl {
        #[command(flatten)]
        common: Common,
        /// Bundled scenario name (ignored when --config is given).
        #[arg(long)]
        scenario: Option<String>,
        /// Also write the trajectory as CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Construct B for a target state and report the fidelity lower bound.
    Fidelity {
        #[command(flatten)]
        common: Common,
        /// Bloch vector of rho, `x,y,z`.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        r: Option<Vec<f64>>,
        /// Bloch vector of the target sigma, `x,y,z`.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        s: Option<Vec<f64>>,
        /// Direction of A = m.sigma, `x,y,z`.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        m: Option<Vec<f64>>,
        /// Multistart count for the root finder.
        #[arg(long, default_value_t = protocol::DEFAULT_STARTS)]
        starts: usize,
    },
    /// Three-observable hexagon residuals on random pure qutrits.
    Hexagon {
        #[command(flatten)]
        common: Common,
    },
}

/// Optional settings read from `--config`; command-line flags win.
#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    command: Option<String>,
    dims: Option<Vec<usize>>,
    seed: Option<u64>,
    samples: Option<usize>,
    grid: Option<Vec<f64>>,
    out: Option<PathBuf>,
    scenario: Option<Scenario>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Assertion(String),
}

impl From<sumur::Error> for Failure {
    fn from(e: sumur::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("bad config {}: {e}", path.display())))
}

struct Resolved {
    seed: Option<u64>,
    samples: Option<usize>,
    out: Option<PathBuf>,
    config: ExperimentConfig,
}

fn resolve(common: &Common, name: &str) -> Result<Resolved, Failure> {
    let config = match &common.config {
        Some(p) => read_config(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(c) = &config.command {
        if c != name {
            return Err(usage(format!("config is for `{c}`, not `{name}`")));
        }
    }
    Ok(Resolved {
        seed: common.seed.or(config.seed),
        samples: common.samples.or(config.samples),
        out: common.out.clone().or_else(|| config.out.clone()),
        config,
    })
}

impl Resolved {
    fn seed(&self) -> Result<u64, Failure> {
        self.seed.ok_or_else(|| usage("--seed is required for this command"))
    }
}

/// Twelve significant digits.
fn fmt(x: f64) -> String {
    format!("{x:.11e}")
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    match out {
        Some(p) => fs::File::create(p)
            .map(|f| Box::new(io::BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn write_csv(out: &Option<PathBuf>, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Outcome {
    let io_err = |e: csv::Error| usage(format!("write failed: {e}"));
    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|e| usage(format!("write failed: {e}")))
}

fn write_json<S: Serialize>(out: &Option<PathBuf>, value: &S) -> Outcome {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| usage(format!("write failed: {e}")))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| usage(format!("write failed: {e}")))
}

fn cmd_fig1(common: &Common, grid: &Option<Vec<f64>>, points: Option<usize>) -> Outcome {
    let r = resolve(common, "fig1")?;
    let grid = match (grid, points, &r.config.grid) {
        (Some(g), _, _) => g.clone(),
        (None, Some(n), _) => experiments::uniform_grid(n),
        (None, None, Some(g)) => g.clone(),
        (None, None, None) => experiments::uniform_grid(20),
    };
    let rows = experiments::fig1_rows(&grid)?;
    write_csv(
        &r.out,
        &["p", "sum_variances", "robertson", "theorem2_pb", "theorem4_reverse"],
        rows.iter().map(|x| {
            vec![fmt(x.p), fmt(x.sum_variances), fmt(x.robertson), fmt(x.theorem2_pb), fmt(x.theorem4_reverse)]
        }),
    )
}

fn cmd_fig3(common: &Common) -> Outcome {
    let r = resolve(common, "fig3")?;
    let seed = r.seed()?;
    let samples = r.samples.unwrap_or(experiments::FIG3_DEFAULT_SAMPLES);
    if samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    let rows = experiments::fig3_rows(samples, seed)?;
    let trend = experiments::fig3_trend(&rows);
    eprintln!(
        "trend: {} (worst deviation {:.3} standard errors over {} bins)",
        if trend.passed { "monotone" } else { "not monotone" },
        trend.worst_z,
        trend.bins.len()
    );
    write_csv(
        &r.out,
        &["angle", "blochRadius", "purity_of_rho"],
        rows.iter().map(|x| vec![fmt(x.angle), fmt(x.bloch_radius), fmt(x.purity_of_rho)]),
    )
}

fn cmd_audit(common: &Common, dims: &Option<Vec<usize>>) -> Outcome {
    let r = resolve(common, "audit")?;
    let defaults = AuditConfig::default();
    let config = AuditConfig {
        dims: dims.clone().or_else(|| r.config.dims.clone()).unwrap_or(defaults.dims),
        samples: r.samples.unwrap_or(defaults.samples),
        seed: r.seed()?,
    };
    let summary = audit::run_audit(&config)?;
    for (name, f) in &summary.families {
        let status = match (f.kind, f.passed) {
            (audit::FamilyKind::Assertion, true) => "pass",
            (audit::FamilyKind::Assertion, false) => "FAIL",
            (audit::FamilyKind::Diagnostic, _) => "diag",
        };
        eprintln!("{status:4} {name:32} checked {:6} failures {:6}", f.checked, f.failures);
    }
    write_json(&r.out, &summary)?;
    if summary.passed {
        Ok(())
    } else {
        Err(Failure::Assertion(format!(
            "failed assertion families: {}",
            summary.failed_assertions().join(", ")
        )))
    }
}

#[derive(Serialize)]
struct QslOutput<'a> {
    scenario: &'a str,
    dim: usize,
    steps: usize,
    report: &'a dynamics::QslReport,
}

fn cmd_qsl(common: &Common, name: &Option<String>, trajectory: &Option<PathBuf>) -> Outcome {
    let (scenario, out) = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            // either a bare scenario or an experiment config with a scenario block
            match Scenario::from_json(&text) {
                Ok(s) => (s, common.out.clone()),
                Err(_) => {
                    let r = resolve(common, "qsl")?;
                    let s = r.config.scenario.ok_or_else(|| usage("config has no scenario"))?;
                    (s, r.out)
                }
            }
        }
        None => {
            let name = name.as_deref().unwrap_or("dephasing");
            (dynamics::bundled_scenario(name)?, common.out.clone())
        }
    };
    let (traj, report) = scenario.run::<f64>()?;
    let label = if scenario.name.is_empty() { "custom" } else { scenario.name.as_str() };
    if let Some(path) = trajectory {
        let sin2 = traj.sin2_bures();
        write_csv(
            &Some(path.clone()),
            &["t", "fidelity", "bures_angle", "sin2_bures"],
            (0..traj.times.len()).map(|i| vec![fmt(traj.times[i]), fmt(traj.fidelity[i]), fmt(traj.bures[i]), fmt(sin2[i])]),
        )?;
    }
    write_json(
        &out,
        &QslOutput {
            scenario: label,
            dim: traj.initial().dim(),
            steps: traj.times.len() - 1,
            report: &report,
        },
    )
}

fn bloch3(v: &Option<Vec<f64>>, default: [f64; 3], flag: &str) -> Result<[f64; 3], Failure> {
    match v {
        None => Ok(default),
        Some(v) if v.len() == 3 => Ok([v[0], v[1], v[2]]),
        Some(v) => Err(usage(format!("--{flag} needs three components, got {}", v.len()))),
    }
}

#[derive(Serialize)]
struct FidelityOutput {
    r: [f64; 3],
    s: [f64; 3],
    m: [f64; 3],
    solution: protocol::ProtocolSolution<f64>,
    estimate: protocol::FidelityEstimate<f64>,
}

fn cmd_fidelity(common: &Common, r: &Option<Vec<f64>>, s: &Option<Vec<f64>>, m: &Option<Vec<f64>>, starts: usize) -> Outcome {
    let res = resolve(common, "fidelity")?;
    let seed = res.seed()?;
    // default: maximally mixed rho, target orthogonal to A
    let r = bloch3(r, [0.0, 0.0, 0.0], "r")?;
    let s = bloch3(s, [0.6, 0.0, 0.0], "s")?;
    let m = bloch3(m, [0.0, 0.0, 1.0], "m")?;
    let norm = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
    if norm < 1e-12 {
        return Err(usage("--m must be nonzero"));
    }
    let m = m.map(|x| x / norm);
    let rv = BlochVector::from_array(r)?;
    let sv = BlochVector::from_array(s)?;
    let mut rng = sumur::states::rng_for(seed, 0);
    let solution = match protocol::construct_b(rv, sv, m, starts, &mut rng) {
        Ok(sol) => sol,
        Err(e @ sumur::Error::NoSolution { .. }) => return Err(Failure::Assertion(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let estimate = protocol::fidelity_lower_bound(&rv.to_state(), &Observable::bloch(m), &solution, &sv.to_state())?;
    write_json(
        &res.out,
        &FidelityOutput {
            r: rv.to_array(),
            s: sv.to_array(),
            m,
            solution,
            estimate,
        },
    )
}

fn cmd_hexagon(common: &Common) -> Outcome {
    let r = resolve(common, "hexagon")?;
    let seed = r.seed()?;
    let samples = r.samples.unwrap_or(1000);
    let rows = experiments::hexagon_rows(samples, seed)?;
    write_csv(
        &r.out,
        &[
            "index",
            "sum_variances",
            "pairwise_bound",
            "residual_variant1",
            "residual_variant2",
            "sum_norms",
            "residual_direct",
            "residual_first_form",
            "residual_second_form",
        ],
        rows.iter().map(|x| {
            vec![
                x.index.to_string(),
                fmt(x.sum_variances),
                fmt(x.pairwise_bound),
                fmt(x.residual_variant1),
                fmt(x.residual_variant2),
                fmt(x.sum_norms),
                fmt(x.residual_direct),
                fmt(x.residual_first_form),
                fmt(x.residual_second_form),
            ]
        }),
    )
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Fig1 { common, grid, points } => cmd_fig1(common, grid, *points),
        Command::Fig3 { common } => cmd_fig3(common),
        Command::Audit { common, dims } => cmd_audit(common, dims),
        Command::Qsl {
            common,
            scenario,
            trajectory,
        } => cmd_qsl(common, scenario, trajectory),
        Command::Fidelity { common, r, s, m, starts } => cmd_fidelity(common, r, s, m, *starts),
        Command::Hexagon { common } => cmd_hexagon(common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Assertion(msg)) => {
            eprintln!("assertion failure: {msg}");
            ExitCode::from(EXIT_ASSERTION)
        }
    }
}
