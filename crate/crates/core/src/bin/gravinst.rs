//! Batch driver: metric selection, verification suites, report emission.

use clap::{Args, Parser, Subcommand};
use gravinst::asymptotics::FalloffQuantity;
use gravinst::chart::Orientation;
use gravinst::report::{self, CompareSection, RunConfig, RunStatus, Suite};
use gravinst::zoo::{LinkType, MetricFamily};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gravinst", version, about = "Curvature verification for gravitational instantons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the metric catalog with expected flags.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
    /// Run verification suites and write a JSON report.
    Verify(VerifyArgs),
    /// Boundary-flux integrals over a radius ladder.
    Flux(FluxArgs),
    /// Fall-off exponent fits over shells.
    Falloff(FalloffArgs),
    /// Weighted C^k_1 distance between two family members.
    Compare(CompareArgs),
    /// Report manipulation.
    Report {
        #[command(subcommand)]
        action: ReportAction,
    },
}

#[derive(Subcommand)]
enum ZooAction {
    /// Print every family with its expected property flags.
    List,
}

#[derive(Subcommand)]
enum ReportAction {
    /// Merge several report JSON files into one document.
    Merge {
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct FamilyArgs {
    /// flat | schwarzschild | kerr | taub_nut | taub_bolt | eguchi_hanson | round_sphere | alf_model
    #[arg(long)]
    family: Option<String>,
    /// Mass parameter (schwarzschild, kerr).
    #[arg(long)]
    m: Option<f64>,
    /// Spin parameter (kerr), |a| < m.
    #[arg(long)]
    a: Option<f64>,
    /// NUT parameter (taub_nut, taub_bolt).
    #[arg(long)]
    n: Option<f64>,
    /// Bolt scale (eguchi_hanson) or sphere radius (round_sphere).
    #[arg(long)]
    scale: Option<f64>,
    /// Link type for alf_model: s3 | s2xs1.
    #[arg(long)]
    link: Option<String>,
    /// Fiber parameter for alf_model.
    #[arg(long)]
    fiber: Option<f64>,
}

impl FamilyArgs {
    fn resolve(&self) -> Result<Option<MetricFamily>, String> {
        let Some(name) = &self.family else { return Ok(None) };
        let fam = match name.as_str() {
            "flat" => MetricFamily::Flat,
            "schwarzschild" => MetricFamily::Schwarzschild { m: self.m.unwrap_or(1.0) },
            "kerr" => {
                MetricFamily::Kerr { m: self.m.unwrap_or(1.0), a: self.a.unwrap_or(0.3) }
            }
            "taub_nut" => MetricFamily::TaubNut { n: self.n.unwrap_or(1.0) },
            "taub_bolt" => MetricFamily::TaubBolt { n: self.n.unwrap_or(1.0) },
            "eguchi_hanson" => MetricFamily::EguchiHanson { a: self.scale.unwrap_or(1.0) },
            "round_sphere" => MetricFamily::RoundSphere { r: self.scale.unwrap_or(1.0) },
            "alf_model" => {
                let link = match self.link.as_deref().unwrap_or("s2xs1") {
                    "s3" => LinkType::S3,
                    "s2xs1" => LinkType::S2xS1,
                    other => return Err(format!("unknown link type '{other}'")),
                };
                MetricFamily::AlfModel { link, fiber: self.fiber.unwrap_or(1.0) }
            }
            other => return Err(format!("unknown family '{other}'")),
        };
        Ok(Some(fam))
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Comma-separated suites: curvature,wu,identities,flux,falloff,compare.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// plus | minus
    #[arg(long)]
    orientation: Option<String>,
    /// Config file (JSON); flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSON report here (defaults to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write flux CSV rows here when the flux suite runs.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct FluxArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Comma-separated shell radii.
    #[arg(long)]
    radii: Option<String>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip the node-doubling stability check.
    #[arg(long)]
    no_convergence_check: bool,
}

#[derive(Args)]
struct FalloffArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Comma-separated quantities: riemann,w_plus,alpha_h,alpha_g,grad_alpha_g.
    #[arg(long)]
    quantity: Option<String>,
    #[arg(long, default_value_t = 20.0)]
    r_min: f64,
    #[arg(long, default_value_t = 160.0)]
    r_max: f64,
    #[arg(long, default_value_t = 8)]
    count: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Spin of the comparison metric (same family otherwise).
    #[arg(long)]
    against_a: Option<f64>,
    /// Mass of the comparison metric.
    #[arg(long)]
    against_m: Option<f64>,
    /// NUT parameter of the comparison metric.
    #[arg(long)]
    against_n: Option<f64>,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(report: &impl serde::Serialize, out: Option<&PathBuf>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    match out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| e.to_string()),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn build_config(
    family: &FamilyArgs,
    suite: Option<&str>,
    samples: Option<usize>,
    seed: Option<u64>,
    orientation: Option<&str>,
    config_path: Option<&PathBuf>,
) -> Result<RunConfig, String> {
    let mut cfg = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
            serde_json::from_str::<RunConfig>(&text).map_err(|e| e.to_string())?
        }
        None => {
            let fam = family
                .resolve()?
                .ok_or_else(|| "either --family or --config is required".to_string())?;
            RunConfig::new(fam)
        }
    };
    if let Some(fam) = family.resolve()? {
        cfg.family = fam;
    }
    if let Some(list) = suite {
        cfg.suites = list
            .split(',')
            .map(|s| Suite::parse(s.trim()).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
    }
    if let Some(s) = samples {
        cfg.samples = s;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = orientation {
        cfg.orientation = match o {
            "plus" => Orientation::Plus,
            "minus" => Orientation::Minus,
            other => return Err(format!("orientation must be plus or minus, got '{other}'")),
        };
    }
    Ok(cfg)
}

fn run_and_emit(cfg: &RunConfig, out: Option<&PathBuf>, csv: Option<&PathBuf>) -> ExitCode {
    match report::run(cfg) {
        Ok((rep, status)) => {
            if let Some(path) = csv {
                if let Some(flux) = rep.suites.get("flux") {
                    if let Some(rows) = flux.get("rows") {
                        if let Ok(rows) =
                            serde_json::from_value::<Vec<gravinst::asymptotics::FluxRow>>(
                                rows.clone(),
                            )
                        {
                            let _ = std::fs::write(path, report::flux_csv(&rows));
                        }
                    }
                }
            }
            if emit(&rep, out).is_err() {
                return ExitCode::from(2);
            }
            for (name, suite) in &rep.suites {
                let ok = suite.get("pass").and_then(|v| v.as_bool()).unwrap_or(false);
                eprintln!("suite {name}: {}", if ok { "pass" } else { "FAIL" });
            }
            ExitCode::from(status.code() as u8)
        }
        Err(gravinst::Error::NonConvergence(msg)) => {
            eprintln!("non-convergence: {msg}");
            ExitCode::from(RunStatus::NonConvergence.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("GRAVINST_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }

    let cli = Cli::parse();
    match cli.command {
        Command::Zoo { action: ZooAction::List } => {
            for fam in MetricFamily::catalog() {
                let flags = fam.flags();
                println!(
                    "{:14} {:?}  einstein={} ricci_flat={} wu_plus={} wu_minus={} alf={}",
                    fam.name(),
                    fam,
                    flags.einstein,
                    flags.ricci_flat,
                    flags.wu_plus,
                    flags.wu_minus,
                    flags.alf
                );
            }
            ExitCode::SUCCESS
        }
        Command::Verify(args) => {
            let cfg = match build_config(
                &args.family,
                args.suite.as_deref(),
                args.samples,
                args.seed,
                args.orientation.as_deref(),
                args.config.as_ref(),
            ) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            run_and_emit(&cfg, args.out.as_ref(), args.csv.as_ref())
        }
        Command::Flux(args) => {
            let cfg = match build_config(&args.family, Some("flux"), None, None, None, None) {
                Ok(mut cfg) => {
                    if let Some(radii) = &args.radii {
                        match radii
                            .split(',')
                            .map(|s| s.trim().parse::<f64>())
                            .collect::<Result<Vec<_>, _>>()
                        {
                            Ok(r) => cfg.flux.radii = r,
                            Err(e) => {
                                eprintln!("config error: {e}");
                                return ExitCode::from(2);
                            }
                        }
                    }
                    cfg.flux.convergence_check = !args.no_convergence_check;
                    cfg
                }
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            run_and_emit(&cfg, args.out.as_ref(), args.csv.as_ref())
        }
        Command::Falloff(args) => {
            let cfg = match build_config(&args.family, Some("falloff"), None, None, None, None) {
                Ok(mut cfg) => {
                    if let Some(qs) = &args.quantity {
                        match qs
                            .split(',')
                            .map(|s| FalloffQuantity::parse(s.trim()))
                            .collect::<gravinst::Result<Vec<_>>>()
                        {
                            Ok(list) => cfg.falloff.quantities = list,
                            Err(e) => {
                                eprintln!("config error: {e}");
                                return ExitCode::from(2);
                            }
                        }
                    }
                    cfg.falloff.r_min = args.r_min;
                    cfg.falloff.r_max = args.r_max;
                    cfg.falloff.count = args.count;
                    cfg
                }
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            run_and_emit(&cfg, args.out.as_ref(), None)
        }
        Command::Compare(args) => {
            let cfg = match build_config(&args.family, Some("compare"), None, None, None, None) {
                Ok(mut cfg) => {
                    let against = match cfg.family {
                        MetricFamily::Kerr { m, a } => MetricFamily::Kerr {
                            m: args.against_m.unwrap_or(m),
                            a: args.against_a.unwrap_or(a),
                        },
                        MetricFamily::Schwarzschild { m } => MetricFamily::Schwarzschild {
                            m: args.against_m.unwrap_or(m),
                        },
                        MetricFamily::TaubNut { n } => {
                            MetricFamily::TaubNut { n: args.against_n.unwrap_or(n) }
                        }
                        MetricFamily::TaubBolt { n } => {
                            MetricFamily::TaubBolt { n: args.against_n.unwrap_or(n) }
                        }
                        other => other,
                    };
                    cfg.compare = Some(CompareSection {
                        against,
                        k: args.k,
                        plan: gravinst::asymptotics::SamplePlan {
                            shells: 6,
                            per_shell: 8,
                            r_min: 3.0,
                            r_max: 40.0,
                            seed: cfg.seed,
                        },
                    });
                    cfg
                }
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            run_and_emit(&cfg, args.out.as_ref(), None)
        }
        Command::Report { action: ReportAction::Merge { inputs, out } } => {
            let mut docs = Vec::new();
            for path in &inputs {
                match std::fs::read_to_string(path)
                    .map_err(|e| e.to_string())
                    .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))
                {
                    Ok(v) => docs.push(v),
                    Err(e) => {
                        eprintln!("cannot read {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
            }
            let merged = report::merge_reports(docs);
            let pass = merged["pass"].as_bool().unwrap_or(false);
            if emit(&merged, Some(&out)).is_err() {
                return ExitCode::from(2);
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
