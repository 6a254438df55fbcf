use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use equifit::harness::{
    calj_independence_sweep, end_to_end_kurihara, ritter_weiss_sweep, run_suite, shifted_fitting_sweep, tower_check,
    KuriharaConfig, Report, SuiteOptions, Verdict, CURATED,
};
use equifit::stickelberger::{parse_places, theta_s_sprime, AbelianFieldSpec};
use equifit::tower::TowerSpec;
use equifit::Error;

#[derive(Parser)]
#[command(name = "equifit", version, about = "Exact group-ring, Fitting-ideal and Stickelberger verifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the coefficients of Θ_{S,S'}^T(H/Q).
    Theta {
        #[arg(long)]
        conductor: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        subgroup_gens: Vec<u64>,
        #[arg(long = "S", default_value = "inf")]
        s: String,
        #[arg(long = "T", default_value = "")]
        t: String,
        #[arg(long = "Sprime", default_value = "")]
        s_prime: String,
        /// JSON with conductor, subgroup_gens, S, T, Sprime; overrides the flags.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print the full L-value record rather than the coefficients.
        #[arg(long)]
        full: bool,
    },
    /// Shifted Fitting formula and 𝒥(I) independence sweeps.
    VerifyFitt {
        #[arg(long, default_value_t = 16)]
        max_group_order: u64,
        #[arg(long, default_value_t = 36)]
        calj_max_order: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Local Ritter–Weiss module sweep.
    VerifyRw {
        #[arg(long, default_value_t = 12)]
        max_group_order: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Oracle versus formula for one instance, or every curated one.
    Kurihara {
        #[arg(long, conflicts_with = "curated")]
        config: Option<PathBuf>,
        /// Key of a curated instance, or "all".
        #[arg(long)]
        curated: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Derive a tower and run the stability and assembly checks.
    Tower {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Every verification, one check per acceptance criterion.
    Suite {
        #[arg(long, default_value_t = 16)]
        max_group_order: u64,
        #[arg(long, default_value_t = 36)]
        calj_max_order: u64,
        /// Record wall-clock timings (the report is then not reproducible).
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        output: Output,
    },
}

/// Failure kinds mapped to exit codes.
enum Fault {
    Usage(String),
    Verification(String),
}

impl From<Error> for Fault {
    fn from(e: Error) -> Fault {
        match e {
            Error::Inconsistency(_) | Error::NotContained { .. } | Error::Precision(_) => Fault::Verification(e.to_string()),
            _ => Fault::Usage(e.to_string()),
        }
    }
}

fn read_config(path: &Path) -> Result<String, Fault> {
    fs::read_to_string(path).map_err(|e| Fault::Usage(format!("{}: {e}", path.display())))
}

fn located(path: &Path, e: Error) -> Fault {
    Fault::Usage(format!("{}: {e}", path.display()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ThetaConfig {
    conductor: u64,
    #[serde(default)]
    subgroup_gens: Vec<u64>,
    #[serde(rename = "S", default = "inf")]
    s: Vec<String>,
    #[serde(rename = "T", default)]
    t: Vec<String>,
    #[serde(rename = "Sprime", default)]
    s_prime: Vec<String>,
}

fn inf() -> Vec<String> {
    vec!["inf".into()]
}

fn emit(report: &Report, output: &Output) -> Result<Verdict, Fault> {
    let text = report.to_json();
    match &output.out {
        Some(p) => fs::write(p, text).map_err(|e| Fault::Usage(format!("{}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    Ok(report.verdict)
}

fn kurihara(config: Option<PathBuf>, curated: Option<String>) -> Result<Report, Fault> {
    if let Some(path) = config {
        let cfg = KuriharaConfig::from_json(&read_config(&path)?).map_err(|e| located(&path, e))?;
        return Ok(end_to_end_kurihara(&cfg)?);
    }
    let key = curated.ok_or_else(|| Fault::Usage("kurihara needs --config or --curated".into()))?;
    let chosen: Vec<_> = CURATED.iter().filter(|c| key == "all" || c.key == key).collect();
    if chosen.is_empty() {
        let keys: Vec<&str> = CURATED.iter().map(|c| c.key).collect();
        return Err(Fault::Usage(format!("unknown curated instance {key:?}; known: {}", keys.join(", "))));
    }
    if let [one] = chosen.as_slice() {
        return Ok(end_to_end_kurihara(&KuriharaConfig::curated(one))?);
    }
    let mut report = Report::new("kurihara", json!({"curated": key}));
    for c in chosen {
        let r = end_to_end_kurihara(&KuriharaConfig::curated(c))?;
        report.check(c.key, r.verdict, serde_json::to_value(&r).expect("serializable"));
    }
    Ok(report)
}

fn run(cli: Cli) -> Result<Verdict, Fault> {
    match cli.command {
        Command::Theta { conductor, subgroup_gens, s, t, s_prime, config, full } => {
            let cfg = match config {
                Some(path) => serde_json::from_str::<ThetaConfig>(&read_config(&path)?)
                    .map_err(|e| Fault::Usage(format!("{}: {e}", path.display())))?,
                None => ThetaConfig {
                    conductor: conductor.ok_or_else(|| Fault::Usage("theta needs --conductor or --config".into()))?,
                    subgroup_gens,
                    s: vec![s],
                    t: vec![t],
                    s_prime: vec![s_prime],
                },
            };
            let spec = AbelianFieldSpec::new(cfg.conductor, &cfg.subgroup_gens);
            let v = theta_s_sprime(
                &spec,
                &parse_places(&cfg.s.join(","))?,
                &parse_places(&cfg.s_prime.join(","))?,
                &parse_places(&cfg.t.join(","))?,
            )?;
            let j = v.to_json();
            let text = if full {
                serde_json::to_string_pretty(&j)
            } else {
                serde_json::to_string(&j.coeffs.expect("full coefficients"))
            }
            .expect("serializable");
            println!("{text}");
            Ok(Verdict::Pass)
        }
        Command::VerifyFitt { max_group_order, calj_max_order, output } => {
            let mut r = Report::new("verify-fitt", json!({"max_group_order": max_group_order, "calj_max_order": calj_max_order}));
            let s = shifted_fitting_sweep(max_group_order)?;
            r.check("shifted_fitting_formula", Verdict::of(s.pass()), serde_json::to_value(&s).expect("serializable"));
            let s = calj_independence_sweep(calj_max_order)?;
            r.check("calj_decomposition_independence", Verdict::of(s.pass()), serde_json::to_value(&s).expect("serializable"));
            emit(&r, &output)
        }
        Command::VerifyRw { max_group_order, output } => {
            let mut r = Report::new("verify-rw", json!({"max_group_order": max_group_order}));
            let s = ritter_weiss_sweep(max_group_order)?;
            r.check("local_cases", Verdict::of(s.pass()), serde_json::to_value(&s).expect("serializable"));
            emit(&r, &output)
        }
        Command::Kurihara { config, curated, output } => emit(&kurihara(config, curated)?, &output),
        Command::Tower { config, output } => {
            let text = read_config(&config)?;
            let spec = TowerSpec::from_json(&text).map_err(|e| located(&config, e))?;
            let t = tower_check(&spec)?;
            let mut r = Report::new("tower", serde_json::from_str(&text).map_err(|e| Fault::Usage(e.to_string()))?);
            r.check("tower", Verdict::of(t.pass), serde_json::to_value(&t).expect("serializable"));
            emit(&r, &output)
        }
        Command::Suite { max_group_order, calj_max_order, timings, output } => {
            let mut opts = SuiteOptions::with_max_group_order(max_group_order);
            opts.calj_max_order = calj_max_order;
            opts.timings = timings;
            emit(&run_suite(&opts)?, &output)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Verdict::Fail) => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(Fault::Verification(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(1)
        }
        Err(Fault::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
