//! `softkill`: runs solves, simulations, studies and probes from a JSON config.
//!
//! Exit codes: 0 on success, 2 on invalid input or configuration, 3 when a
//! solver did not converge or failed numerically, 1 on I/O errors.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use softkill_core::analysis::{
    emit_report, emit_two_column, number, regularity_probe, run_convergence_study,
    run_pair_comparison, solve_configured, study_seed, ExperimentConfig, FeedbackKind, Format,
    Report, ReportMeta,
};
use softkill_core::mean_field::{apriori_excess, duality_value_identity};
use softkill_core::particles::{simulate_cost_jn, Feedback, InitialState, SimConfig};
use softkill_core::Error;

#[derive(Debug, Parser)]
#[command(
    name = "softkill",
    version,
    about = "Weighted particle control and its mean-field limit"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration; defaults apply to absent keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid points per axis.
    #[arg(long, global = true)]
    points: Option<usize>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Comma-separated particle counts.
    #[arg(long, global = true, value_delimiter = ',')]
    counts: Option<Vec<usize>>,
    #[arg(long, global = true)]
    replications: Option<usize>,
    #[arg(long = "out", global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Both)]
    format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    fn formats(self) -> &'static [Format] {
        match self {
            OutputFormat::Csv => &[Format::Csv],
            OutputFormat::Json => &[Format::Json],
            OutputFormat::Both => &[Format::Csv, Format::Json],
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the limit problem and report the value and diagnostics.
    SolveMfc,
    /// Estimate the particle cost for one population size.
    Simulate {
        /// Population size; the first configured count if absent.
        #[arg(long)]
        particles: Option<usize>,
    },
    /// Compare exact two-particle values with the limit at random states.
    SmallN {
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Gap between particle cost and limit value over the particle counts.
    Study,
    /// Regularity probes of the value function and of optimal flows.
    Probe {
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Re-emit a JSON report in the requested format.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

/// Runs the command line and returns the process exit code.
pub fn cli_main<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => 0,
        Ok(Outcome::NotConverged(what)) => {
            eprintln!("error: {what} did not converge; results were written with failure flags");
            3
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotConverged { .. } | Error::Blowup { .. } | Error::NegativeDensity { .. } => 3,
        Error::Io(_) | Error::Invariant(_) => 1,
        _ => 2,
    }
}

enum Outcome {
    Done,
    NotConverged(&'static str),
}

fn load_config(common: &Common) -> softkill_core::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.points {
        cfg.points = v;
    }
    if let Some(v) = common.dt {
        cfg.dt = v;
    }
    if let Some(v) = common.horizon {
        cfg.horizon = v;
    }
    if let Some(v) = &common.counts {
        cfg.particles.counts = v.clone();
    }
    if let Some(v) = common.replications {
        cfg.particles.replications = v;
    }
    if let Some(v) = &common.output_dir {
        cfg.output_dir = v.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(
    report: &Report,
    format: OutputFormat,
    dir: &Path,
    stem: &str,
) -> softkill_core::Result<()> {
    for &f in format.formats() {
        let out = emit_report(report, f, dir, stem)?;
        println!("wrote {}", out.report.display());
    }
    Ok(())
}

fn meta(cfg: &ExperimentConfig) -> ReportMeta {
    ReportMeta {
        seed: cfg.seed,
        dim: cfg.dim,
        points: cfg.points,
        dt: cfg.dt,
        sobolev_order: cfg.sobolev().order(),
        extra: serde_json::Map::new(),
    }
}

fn run(cli: Cli) -> softkill_core::Result<Outcome> {
    let common = &cli.common;
    if let Command::Report { input } = &cli.command {
        let text = std::fs::read_to_string(input)?;
        let report: Report =
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        let dir = input.parent().map(Path::to_path_buf).unwrap_or_default();
        let dir = common.output_dir.clone().unwrap_or(dir);
        let stem = input
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("report");
        write(&report, common.format, &dir, stem)?;
        return Ok(Outcome::Done);
    }
    let mut cfg = load_config(common)?;
    let dir = cfg.output_dir.clone();
    match cli.command {
        Command::SolveMfc => {
            let (spec, _, sol) = solve_configured(&cfg)?;
            let mut r = Report::new(
                "solve",
                meta(&cfg),
                &[
                    "t",
                    "potential_mean",
                    "adjoint_mean",
                    "adjoint_sup",
                    "control_sup",
                ],
            );
            for i in 0..sol.measure.len() {
                let mu = sol.measure.at(i);
                let control_sup = sol
                    .control
                    .at(i)
                    .iter()
                    .map(|c| c.sup_norm())
                    .fold(0.0, f64::max);
                r.push_row(vec![
                    number(spec.time(i)),
                    number(spec.potential().inner(mu)),
                    number(sol.adjoint.at(i).inner(mu)),
                    number(sol.adjoint.at(i).sup_norm()),
                    number(control_sup),
                ]);
            }
            r.summarize("value", number(sol.value));
            r.summarize("iterations", sol.iterations);
            r.summarize("residual", number(sol.residual));
            r.summarize("converged", sol.converged);
            r.summarize("fallback_engaged", sol.fallback_engaged);
            r.summarize("duality", duality_value_identity(&spec, &sol));
            r.summarize("apriori_excess", number(apriori_excess(&spec, &sol)));
            r.summarize("mass_drift", number(sol.measure.mass_drift()));
            write(&r, common.format, &dir, "solve")?;
            println!("value {}", sol.value);
            Ok(if sol.converged {
                Outcome::Done
            } else {
                Outcome::NotConverged("fixed-point iteration")
            })
        }
        Command::Simulate { particles } => {
            let n = particles.unwrap_or(cfg.particles.counts[0]);
            if n == 0 {
                return Err(Error::Config("particle count must be positive".into()));
            }
            let (spec, mu0, sol) = solve_configured(&cfg)?;
            let feedback = match cfg.particles.feedback {
                FeedbackKind::MeanField => Feedback::from_control(&sol.control),
                FeedbackKind::Zero => Feedback::Zero,
            };
            let seed = study_seed(cfg.seed, n);
            let sim = SimConfig {
                dt: cfg.particle_dt(),
                replications: cfg.particles.replications,
                seed,
            };
            let est = simulate_cost_jn(
                &spec,
                &InitialState::Sampled {
                    density: mu0,
                    clocks: cfg.clocks(n),
                },
                &feedback,
                &sim,
            )?;
            let mut m = meta(&cfg);
            m.extra.insert("particles".into(), n.into());
            m.extra.insert("particle_dt".into(), number(sim.dt));
            m.extra.insert("stream_seed".into(), seed.into());
            let mut r = Report::new("simulate", m, &["replication", "cost"]);
            for (i, c) in est.samples.iter().enumerate() {
                r.push_row(vec![i.into(), number(*c)]);
            }
            r.summarize("mean", number(est.mean));
            r.summarize("std_error", number(est.std_error));
            r.summarize("limit_value", number(sol.value));
            write(&r, common.format, &dir, "simulate")?;
            println!("cost {} ± {}", est.mean, est.std_error);
            Ok(Outcome::Done)
        }
        Command::SmallN { samples } => {
            if let Some(s) = samples {
                cfg.pair.samples = s;
            }
            let rep = run_pair_comparison(&cfg)?;
            write(&rep.to_report(), common.format, &dir, "pair")?;
            println!("max gap/rhs {}", rep.max_ratio);
            let converged = rep.rows.iter().all(|r| r.picard_converged);
            Ok(if converged {
                Outcome::Done
            } else {
                Outcome::NotConverged("fixed-point iteration")
            })
        }
        Command::Study => {
            let rep = run_convergence_study(&cfg)?;
            write(&rep.to_report(), common.format, &dir, "convergence")?;
            emit_two_column(
                &dir.join("convergence_gap.dat"),
                ("N", "rms_gap"),
                &rep.gap_points(),
            )?;
            if let Some(fit) = &rep.fit {
                println!("slope {} [{}, {}]", fit.slope, fit.ci_low, fit.ci_high);
            }
            let ok = rep.picard_converged
                && rep.rows.iter().all(|r| r.ok)
                && rep.exact_pair_error.is_none();
            Ok(if ok {
                Outcome::Done
            } else {
                Outcome::NotConverged("study")
            })
        }
        Command::Probe { pairs } => {
            if let Some(p) = pairs {
                cfg.probe.pairs = p;
            }
            let rep = regularity_probe(&cfg)?;
            write(&rep.to_report(), common.format, &dir, "probe")?;
            Ok(if rep.all_converged {
                Outcome::Done
            } else {
                Outcome::NotConverged("probe solves")
            })
        }
        Command::Report { .. } => unreachable!("handled above"),
    }
}
