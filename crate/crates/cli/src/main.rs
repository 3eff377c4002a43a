use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gsrp_cli::config::OutputFormat;
use gsrp_cli::{emit, emit_plot_data, exit_code, load_claims, load_config, verify_claims, Experiment};
use gsrp_core::properties::{oracle_equivalence, run_all};
use gsrp_core::Result;

#[derive(Parser)]
#[command(
    name = "gsrp",
    version,
    about = "Generalized sampling-reconstruction experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the lambda sweep and write one row per lambda.
    Sweep {
        /// Config file or preset name.
        #[arg(long)]
        config: String,
        /// Output path; defaults to the config's `output.path`, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Also write gnuplot-ready `snr_<scheme>.dat` files here.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
    },
    /// Print every subspace angle of the experiment.
    Angles {
        #[arg(long)]
        config: String,
        /// Mixing weight for the modified subspace.
        #[arg(long, default_value_t = 0.64)]
        lambda: f64,
        #[arg(long)]
        json: bool,
    },
    /// Run the sweep and check a claim set against it.
    Verify {
        #[arg(long)]
        config: String,
        /// Claim file or built-in claim set name.
        #[arg(long)]
        claims: String,
    },
    /// Run the randomized property suites.
    Selftest {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn sweep(
    config: &str,
    out: Option<PathBuf>,
    format: Option<Format>,
    plot_dir: Option<PathBuf>,
) -> Result<u8> {
    let cfg = load_config(config)?;
    let rows = Experiment::build(&cfg)?.sweep()?.rows;
    let format = match format {
        Some(Format::Csv) => OutputFormat::Csv,
        Some(Format::Json) => OutputFormat::Json,
        None => cfg.output.format,
    };
    match out.or(cfg.output.path.clone()) {
        Some(path) => emit(&rows, format, &path)?,
        None => {
            let text = gsrp_cli::emit::render(&rows, format)?;
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    if let Some(dir) = plot_dir {
        emit_plot_data(&rows, &dir)?;
    }
    Ok(0)
}

fn angles(config: &str, lambda: f64, json: bool) -> Result<u8> {
    let cfg = load_config(config)?;
    let exp = Experiment::build(&cfg)?;
    let set = exp.angles(lambda)?;
    let spectral = exp.spectral_prior_angle().ok();
    if json {
        let doc = serde_json::json!({
            "angles": set,
            "direct_sum_ratio": exp.context().direct_sum_ratio(),
            "spectral_cos_as": spectral.map(|s| s.cos),
        });
        println!("{doc:#}");
        return Ok(0);
    }
    println!("lambda {lambda}");
    println!("{:<14} {:>10} {:>10}", "pair", "cos", "sin");
    for (name, c, s) in set.pairs() {
        println!("{name:<14} {c:>10.6} {s:>10.6}");
    }
    println!(
        "direct-sum conditioning (A, S^perp): {:.6}",
        exp.context().direct_sum_ratio()
    );
    if let Some(s) = spectral {
        println!("cos(A, S) from generator spectra: {:.6}", s.cos);
    }
    Ok(0)
}

fn verify(config: &str, claims: &str) -> Result<u8> {
    let set = load_claims(claims)?;
    let cfg = load_config(config)?;
    let sweep = Experiment::build(&cfg)?.sweep()?;
    let report = verify_claims(&sweep, &set)?;
    for r in &report.results {
        let mark = if r.passed { "PASS" } else { "FAIL" };
        println!(
            "{mark} {}: measured {:.6} ({})",
            r.name, r.measured, r.requirement
        );
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn selftest(trials: usize, seed: u64) -> u8 {
    let mut outcomes = run_all(trials, seed);
    outcomes.push(oracle_equivalence().run(trials, seed));
    let mut ok = true;
    for o in &outcomes {
        ok &= o.passed();
        let mark = if o.passed() { "PASS" } else { "FAIL" };
        println!(
            "{mark} {:<28} {:>6} trials, worst {:.2e} of tolerance, {:.2?}",
            o.name, o.trials, o.worst_ratio, o.elapsed
        );
        if let Some(f) = &o.first_failure {
            println!("     first failure: {f}");
        }
    }
    if ok {
        0
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep {
            config,
            out,
            format,
            plot_dir,
        } => sweep(&config, out, format, plot_dir),
        Command::Angles { config, lambda, json } => angles(&config, lambda, json),
        Command::Verify { config, claims } => verify(&config, &claims),
        Command::Selftest { trials, seed } => Ok(selftest(trials, seed)),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("gsrp: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
