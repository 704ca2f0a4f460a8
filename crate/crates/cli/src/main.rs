//! `se3f`: command-line access to the se3-fiber library.
//!
//! Exit codes: 0 ok, 1 verification failure (or I/O failure), 2 parse error,
//! 3 cut locus, 4 integration budget exceeded, 5 no convergence.

mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::Vector6;
use se3_fiber::flow::{integrate, momentum_diagnostics, velocity, PhaseState, Trajectory};
use se3_fiber::metric::log_norm;
use se3_fiber::sections::{
    compute_sections, coplanarity, error_g, fiber_sweep, project, section_sigma, section_sigma_d, section_sigma_rho,
    CosetPoint, FiberSweep,
};
use se3_fiber::se3::{exp_se3, log_se3};
use se3_fiber::shooting::{energy_oracle_distance, shoot_distance, ShootingConfig};
use se3_fiber::verify::{fig2_bottom, fig2_top, run_suite, Suite};
use se3_fiber::{GeoError, MetricParams};
use serde::Serialize;
use serde_json::json;

use output::Sink;

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Geo(GeoError),
    Io(String),
    Failed(String),
}

impl From<GeoError> for CliError {
    fn from(e: GeoError) -> Self {
        CliError::Geo(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) | CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Geo(e) => match e {
                GeoError::AngleAtCutLocus { .. } | GeoError::AllAtCutLocus => 3,
                GeoError::StepCountTooSmall { .. } => 4,
                GeoError::NoConvergence { .. } | GeoError::OutOfReach { .. } => 5,
                _ => 2,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Parse(m) | CliError::Io(m) | CliError::Failed(m) => m.clone(),
            CliError::Geo(e) => e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "se3f", version, about = "Geodesics, distances and fiber sections on SE(3) and SE(3)/SO(2)")]
struct Cli {
    /// Metric as inline JSON or a JSON file: {"g11":..,"g33":..,"g44":..,"g66":..,"mode":"R|SR|GI"}
    /// or a diagonal [g11,g22,g33,g44,g55,g66]. Default: the unit metric.
    #[arg(long, global = true)]
    metric: Option<String>,

    /// Shooting settings as inline JSON or a JSON file:
    /// {"tol":1e-8,"restarts":8,"steps":1000,"maxRho":3.0,"seed":0}
    #[arg(long, global = true)]
    shooting: Option<String>,

    /// Seed for every random choice (overrides the shooting seed).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Directory for output files; results go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Tabular output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Group logarithm of a rigid motion (12 numbers or exp:c1..c6).
    Log {
        #[arg(allow_hyphen_values = true)]
        element: String,
    },
    /// Group exponential of 6 algebra coordinates.
    Exp {
        #[arg(allow_hyphen_values = true)]
        coords: String,
    },
    /// Integrate the geodesic flow from the identity.
    Geodesic {
        /// Initial momentum, 6 numbers.
        #[arg(long, allow_hyphen_values = true)]
        lam0: String,
        #[arg(long = "time", default_value_t = 1.0)]
        t_final: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Geodesic distance from the identity by shooting.
    Distance {
        #[arg(allow_hyphen_values = true)]
        element: String,
        /// Also run the discrete-energy oracle with this many segments.
        #[arg(long)]
        oracle_segments: Option<usize>,
    },
    /// The sections σ, σ_ρ and σ_d of a coset (x,y,z,n1,n2,n3).
    Sections {
        #[arg(allow_hyphen_values = true)]
        coset: String,
        /// Skip the distance-minimal section.
        #[arg(long)]
        no_dist: bool,
    },
    /// Tabulate ρ (and optionally d) along the fiber of a coset.
    Sweep {
        #[arg(allow_hyphen_values = true)]
        coset: String,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(long)]
        with_dist: bool,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_parser = ["algebra", "conservation", "horizontality", "reductive", "sections", "error-convergence", "all"])]
        suite: String,
    },
    /// Recompute both Fig. 2 configurations and write their sweeps.
    ReproduceFig2 {
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(long)]
        with_dist: bool,
    },
}

/// Settings shared by all subcommands.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
struct RunConfig {
    metric: MetricParams,
    shooting: ShootingConfig,
    seed: u64,
    output_dir: Option<PathBuf>,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let metric = match &cli.metric {
            Some(s) => input::metric(s)?,
            None => MetricParams::riemannian(1.0, 1.0, 1.0, 1.0)?,
        };
        let mut shooting = match &cli.shooting {
            Some(s) => input::shooting(s)?,
            None => ShootingConfig::default(),
        };
        shooting.seed = cli.seed;
        Ok(RunConfig { metric, shooting, seed: cli.seed, output_dir: cli.out.clone() })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("se3f: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::from_cli(cli)?;
    let sink = Sink::new(cfg.output_dir.clone());
    match &cli.command {
        Command::Log { element } => {
            let c = log_se3(&input::group_element(element)?)?;
            sink.json("log.json", &c)
        }
        Command::Exp { coords } => {
            let g = exp_se3(&input::algebra(coords)?);
            sink.json("exp.json", &g)
        }
        Command::Geodesic { lam0, t_final, steps } => geodesic(&cfg, &sink, cli.format, lam0, *t_final, *steps),
        Command::Distance { element, oracle_segments } => distance(&cfg, &sink, element, *oracle_segments),
        Command::Sections { coset, no_dist } => sections(&cfg, &sink, coset, *no_dist),
        Command::Sweep { coset, samples, with_dist } => {
            sweep(&cfg, &sink, cli.format, &input::coset(coset)?, *samples, *with_dist)
        }
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            let report = run_suite(suite, &cfg.metric, cfg.seed)?;
            sink.json(&format!("verify-{suite}.json"), &report)?;
            if report.passed {
                Ok(())
            } else {
                let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                Err(CliError::Failed(format!("failed checks: {}", failed.join(", "))))
            }
        }
        Command::ReproduceFig2 { samples, with_dist } => reproduce_fig2(&cfg, *samples, *with_dist),
    }
}

fn geodesic(cfg: &RunConfig, sink: &Sink, format: Format, lam0: &str, t: f64, steps: usize) -> Result<(), CliError> {
    let lam = Vector6::from_column_slice(&input::algebra(lam0)?.as_array());
    let s0 = PhaseState::at_identity(lam);
    let tr = if lam == Vector6::zeros() {
        // nothing moves: a single sample
        Trajectory { times: vec![0.0], states: vec![s0], velocities: vec![velocity(&lam, &cfg.metric)], metric: cfg.metric }
    } else {
        integrate(&s0, &cfg.metric, t, steps)?
    };
    let d = momentum_diagnostics(&tr)?;
    match format {
        Format::Csv => sink.text("geodesic.csv", |w| {
            tr.write_csv(&mut *w)?;
            writeln!(w, "# lam6_drift={:e}", d.max_lam6_drift)?;
            writeln!(w, "# ham_drift={:e}", d.max_ham_drift)?;
            writeln!(w, "# u6_drift={:e}", d.max_u6_drift)
        }),
        Format::Json => {
            let rows: Vec<_> = tr
                .times
                .iter()
                .zip(&tr.states)
                .zip(&tr.velocities)
                .map(|((t, s), u)| json!({"t": t, "g": s.g, "lam": s.lam.as_slice(), "u": u}))
                .collect();
            sink.json("geodesic.json", &json!({"metric": cfg.metric, "samples": rows, "diagnostics": d}))
        }
    }
}


fn distance(cfg: &RunConfig, sink: &Sink, element: &str, oracle: Option<usize>) -> Result<(), CliError> {
    let g = input::group_element(element)?;
    let r = shoot_distance(&g, &cfg.metric, &cfg.shooting)?;
    let oracle = oracle.map(|n| energy_oracle_distance(&g, &cfg.metric, n)).transpose()?;
    let rho = log_norm(&g, &cfg.metric).ok();
    let out = json!({
        "metric": cfg.metric,
        "shooting": cfg.shooting,
        "result": r,
        "ties": r.ties(1e-6),
        "rho": rho,
        "oracleDistance": oracle,
    });
    sink.json("distance.json", &out)
}

fn sections(cfg: &RunConfig, sink: &Sink, coset: &str, no_dist: bool) -> Result<(), CliError> {
    let p = input::coset(coset)?;
    let base = compute_sections(&p, &cfg.metric, None)?;
    let d = if no_dist { None } else { Some(section_sigma_d(&p, &cfg.metric, &cfg.shooting)) };
    let mut result = base;
    let mut failure = None;
    match d {
        Some(Ok(d)) => {
            result.sigma_d = Some(d.element);
            result.dist_at_sigma_d = Some(d.distance);
            result.alpha_d = Some(d.alpha);
            result.horizontality_defect = Some(d.horizontality_defect());
            result.dist_ties = d.ties;
        }
        Some(Err(e)) => failure = Some(e),
        None => {}
    }
    let chain_holds = result.error_g >= -1e-9
        && result.dist_at_sigma_d.is_none_or(|d| result.rho_at_sigma_rho >= d - 1e-6);
    let out = json!({
        "metric": cfg.metric,
        "sections": result,
        "coplanarity": coplanarity(&p),
        "chainHolds": chain_holds,
        "sigmaDError": failure.as_ref().map(|e| e.to_string()),
    });
    sink.json("sections.json", &out)?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn sweep_summary(s: &FiberSweep) -> serde_json::Value {
    json!({
        "base": s.base,
        "metric": s.metric,
        "samples": s.alphas.len(),
        "argminRho": s.argmin_rho,
        "argminDist": s.argmin_dist,
        "rhoSecondDerivativeAtZero": s.rho_second_derivative,
        "symmetryDefect": s.symmetry_defect(),
        "coplanarity": coplanarity(&s.base),
    })
}

fn sweep(
    cfg: &RunConfig,
    sink: &Sink,
    format: Format,
    p: &CosetPoint,
    samples: usize,
    with_dist: bool,
) -> Result<(), CliError> {
    let s = fiber_sweep(p, &cfg.metric, samples, with_dist, &cfg.shooting)?;
    if with_dist && s.dist.as_ref().is_some_and(|d| d.iter().all(Option::is_none)) {
        return Err(GeoError::NoConvergence { best_error: f64::INFINITY }.into());
    }
    let summary = sweep_summary(&s);
    match format {
        Format::Csv => {
            sink.text("sweep.csv", |w| s.write_csv(w))?;
            if sink.is_dir() {
                sink.json("sweep-summary.json", &summary)
            } else {
                eprintln!("{summary}");
                Ok(())
            }
        }
        Format::Json => sink.json("sweep.json", &json!({"sweep": s, "summary": summary})),
    }
}

fn reproduce_fig2(cfg: &RunConfig, samples: usize, with_dist: bool) -> Result<(), CliError> {
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let sink = Sink::new(Some(dir));
    let mut summary = serde_json::Map::new();
    let mut passed = true;
    for (tag, (g, m), check) in [
        ("g1", fig2_top(), (|e: f64| (0.07..=0.13).contains(&e)) as fn(f64) -> bool),
        ("g2", fig2_bottom(), (|e: f64| e <= 1e-3) as fn(f64) -> bool),
    ] {
        let p = project(&g);
        let err = error_g(&p, &m)?;
        let s = fiber_sweep(&p, &m, samples, with_dist, &cfg.shooting)?;
        let name = if tag == "g1" { "fig2_top.csv" } else { "fig2_bottom.csv" };
        sink.text(name, |w| s.write_csv(w))?;
        let sigma = section_sigma(&p)?;
        let rho_min = section_sigma_rho(&p, &m)?;
        passed &= check(err);
        summary.insert(format!("errorG_{tag}"), json!(err));
        summary.insert(
            tag.to_string(),
            json!({
                "element": g,
                "metric": m,
                "coset": p,
                "rhoAtSigma": log_norm(&sigma, &m)?,
                "rhoAtSigmaRho": rho_min.value,
                "alphaRho": rho_min.alpha,
                "pass": check(err),
                "sweep": sweep_summary(&s),
            }),
        );
    }
    summary.insert("expected".into(), json!({"errorG_g1": [0.07, 0.13], "errorG_g2_max": 1e-3}));
    sink.json("summary.json", &serde_json::Value::Object(summary))?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed("Fig. 2 values outside their expected ranges (see summary.json)".into()))
    }
}
