use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use chaoslab_cli::cache::write_artifacts;
use chaoslab_cli::{
    cmd_norm, cmd_scaling, cmd_supnorm, cmd_verify, cmd_walsh, ConfigFile, Mode, OutputFormat, RunConfig,
    Selection,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chaoslab", version, about = "Exact norms and extremal sign problems for degree-2 Rademacher chaos")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Config file overlaid on the built-in defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for every randomized computation.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Directory for reports and the result cache.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Recompute instead of reusing cached results.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Record wall times in reports (such reports are not byte-stable).
    #[arg(long, global = true)]
    timings: bool,
    /// Override a config key, e.g. `--set theorem5.monte_carlo=4,8`.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact sup norm of the polynomial with coefficients from a matrix file.
    Supnorm {
        matrix: PathBuf,
        #[arg(long, default_value = "decoupled", value_parser = parse_mode)]
        mode: Mode,
    },
    /// Run a verification suite (khinchin, decoupling, lemma2, lemma3,
    /// theorem5, proposition, theorem6, theorem7, orlicz, clt, all).
    Verify {
        #[arg(value_parser = parse_selection)]
        suite: Selection,
    },
    /// Table of the mean of phi_n against n^{3/2}.
    Scaling {
        /// Comma-separated list of n.
        #[arg(long, value_name = "LIST")]
        n: Option<String>,
        /// Sample count, or `all` for the exact average.
        #[arg(long)]
        samples: Option<String>,
    },
    /// Norm of the polynomial in a symmetric space (lp:Q, lp:inf,
    /// orlicz-exp, marc:EPS, lorentz:P).
    Norm {
        matrix: PathBuf,
        #[arg(long)]
        space: String,
        #[arg(long, default_value = "decoupled", value_parser = parse_mode)]
        mode: Mode,
    },
    /// Print the Walsh sign arrangement of order k as a matrix file.
    Walsh { k: u32 },
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: chaoslab_cli::CliError| e.to_string())
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: chaoslab_cli::CliError| e.to_string())
}

fn parse_selection(s: &str) -> Result<Selection, String> {
    s.parse().map_err(|e: chaoslab_cli::CliError| e.to_string())
}

fn build_config(g: &Global, extra: &[String]) -> chaoslab_cli::Result<RunConfig> {
    let file = match &g.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::defaults(),
    };
    let mut assignments: Vec<String> = g.set.clone();
    if let Some(seed) = g.seed {
        assignments.push(format!("run.seed={seed}"));
    }
    if let Some(out) = &g.out {
        assignments.push(format!("run.out={}", out.display()));
    }
    if let Some(format) = g.format {
        let name = match format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Both => "both",
        };
        assignments.push(format!("run.format={name}"));
    }
    assignments.extend_from_slice(extra);
    let mut cfg = RunConfig::from_file(file)?.with_assignments(assignments.iter().map(String::as_str))?;
    cfg.cache = !g.no_cache;
    cfg.timings = g.timings;
    Ok(cfg)
}

fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    let _ = out.flush();
}

fn run(cli: Cli) -> chaoslab_cli::Result<u8> {
    let mut extra = Vec::new();
    if let Command::Scaling { n, samples } = &cli.command {
        if let Some(n) = n {
            extra.push(format!("scaling.n={n}"));
        }
        if let Some(s) = samples {
            extra.push(format!("scaling.samples={s}"));
        }
    }
    let cfg = build_config(&cli.global, &extra)?;

    match cli.command {
        Command::Supnorm { matrix, mode } => {
            let r = cmd_supnorm(&matrix, mode, &cfg)?;
            let mut text = String::new();
            if cfg.format.csv() || !cfg.format.json() {
                text.push_str(&r.to_text());
            }
            if cfg.format.json() {
                text.push_str(&serde_json::to_string(&r).expect("report serializes"));
                text.push('\n');
            }
            emit(&text);
            Ok(0)
        }
        Command::Norm { matrix, space, mode } => {
            let r = cmd_norm(&matrix, &space, mode, &cfg)?;
            let mut text = r.to_text();
            if cfg.format.json() {
                text.push_str(&serde_json::to_string(&r).expect("report serializes"));
                text.push('\n');
            }
            emit(&text);
            Ok(0)
        }
        Command::Verify { suite } => {
            let results = cmd_verify(suite, &cfg)?;
            let mut passed = true;
            for r in &results {
                let stem = format!("verify-{}", r.suite);
                write_artifacts(&cfg, &stem, || r.to_csv(), || r.to_json())?;
                // the aggregate repeats every line already printed
                if suite == Selection::All && r.suite == "all" {
                    emit(&format!("all: {}\n", if r.passed { "PASS" } else { "FAIL" }));
                } else {
                    emit(&r.to_text());
                }
                passed &= r.passed;
            }
            Ok(if passed { 0 } else { 1 })
        }
        Command::Scaling { .. } => {
            let table = cmd_scaling(&cfg)?;
            let written = write_artifacts(&cfg, "scaling", || table.to_csv(), || table.to_json())?;
            let mut text = String::from("n\tstatus\tmean\tratio\twalsh\texhaustive_inf\n");
            let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
            for r in &table.rows {
                text.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\n",
                    r.n,
                    r.status,
                    opt(r.mean),
                    opt(r.ratio),
                    opt(r.walsh),
                    opt(r.exhaustive_inf)
                ));
            }
            for p in written {
                text.push_str(&format!("wrote {}\n", p.display()));
            }
            emit(&text);
            let failed = table.rows.iter().any(|r| r.status == chaoslab_cli::Status::Fail);
            Ok(if failed { 1 } else { 0 })
        }
        Command::Walsh { k } => {
            emit(&cmd_walsh(k)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
