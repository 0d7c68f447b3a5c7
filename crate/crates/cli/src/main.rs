//! `projsum`: build projection families and canonical strategies, compute
//! correlations, certify strategies, and run robustness sweeps.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 usage or input error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use projsum::families::{family_for, validate_family, ProjectionFamily, PROJ_TOL};
use projsum::harness::{emit_report, median_epsilon_by_level, run_sweep, spearman, ReportFormat, SweepConfig};
use projsum::selftest::{approx_rep_residuals, extract_dilation};
use projsum::strategies::{
    canonical_strategy, chsh_fixture, chsh_win_probability, induced_correlation, marginals, synchronicity_defect,
    Strategy,
};
use projsum::Error;

const TOL_ENV: &str = "PROJSUM_TOL";

#[derive(Parser)]
#[command(name = "projsum", version, about = "Projection families summing to a scalar, and their self-tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or verify a projection family.
    #[command(subcommand)]
    Family(FamilyCommand),
    /// Build strategies.
    #[command(subcommand)]
    Strategy(StrategyCommand),
    /// Compute the correlation table induced by a strategy file.
    Correlate {
        strategy: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract a local dilation certificate for a strategy file.
    Selftest {
        strategy: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        cert: PathBuf,
        /// Fail (exit 1) if the certified epsilon exceeds this value.
        #[arg(long)]
        max_epsilon: Option<f64>,
    },
    /// Run a seeded robustness sweep; output format follows the extension.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Built-in demonstrations.
    #[command(subcommand)]
    Demo(DemoCommand),
}

#[derive(Subcommand)]
enum FamilyCommand {
    /// Write the family for `n` (and level `k` when `n = 4`).
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a family file's invariants.
    Verify {
        path: PathBuf,
        /// Tolerance; defaults to $PROJSUM_TOL or 1e-9.
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Subcommand)]
enum StrategyCommand {
    /// Write the canonical strategy on the maximally entangled state.
    Canonical {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum DemoCommand {
    /// Print the CHSH correlation table and winning probability.
    Chsh,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
}

enum Failure {
    Input(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = match e.path().to_string() {
            p if p == "." => "top level".to_string(),
            p => format!("field `{p}`"),
        };
        // serde_json's message already carries the line and column.
        Failure::Input(format!("{}: {field}: {}", path.display(), e.into_inner()))
    })
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> CmdResult {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)? + "\n";
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn default_tol() -> Result<f64, Failure> {
    match std::env::var(TOL_ENV) {
        Ok(raw) => match raw.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
            _ => Err(Failure::Input(format!("{TOL_ENV}={raw:?} is not a positive number"))),
        },
        Err(_) => Ok(PROJ_TOL),
    }
}

fn family_gen(n: usize, k: usize, out: &Path) -> CmdResult {
    let fam = family_for(n, k)?;
    write_json(&fam, out)?;
    println!("family n={} x={} d={} written to {}", fam.n, fam.x, fam.d, out.display());
    Ok(())
}

fn family_verify(path: &Path, tol: Option<f64>) -> CmdResult {
    let fam: ProjectionFamily = read_json(path)?;
    fam.check_shape()?;
    let tol = match tol {
        Some(t) => t,
        None => default_tol()?,
    };
    let report = validate_family(&fam, tol);
    println!("family n={} x={} d={} (tolerance {tol:e})", fam.n, fam.x, fam.d);
    println!("  x in Lambda_n:        {}", report.in_lambda);
    println!("  sum residual:         {:.3e}", report.sum_residual);
    println!(
        "  max idempotency:      {:.3e}",
        report.idempotency.iter().copied().fold(0.0, f64::max)
    );
    println!("  ranks:                {:?}", report.ranks);
    if report.pass {
        println!("all invariants hold");
        Ok(())
    } else {
        Err(Failure::Verification(format!("violated invariants: {}", report.failures.join(", "))))
    }
}

fn strategy_canonical(n: usize, k: usize, out: &Path) -> CmdResult {
    let fam = family_for(n, k)?;
    let s = canonical_strategy(&fam)?;
    write_json(&s, out)?;
    println!(
        "canonical strategy for n={} x={}: {}x{} state, written to {}",
        fam.n,
        fam.x,
        s.dim_a(),
        s.dim_b(),
        out.display()
    );
    Ok(())
}

fn correlate(strategy: &Path, out: &Path) -> CmdResult {
    let s: Strategy = read_json(strategy)?;
    let p = induced_correlation(&s)?;
    write_json(&p, out)?;
    println!(
        "correlation: {} questions, {} outcomes; synchronicity defect {:.3e}, signaling residual {:.3e}",
        p.n,
        p.k,
        synchronicity_defect(&p),
        marginals(&p).signaling_residual
    );
    println!("written to {}", out.display());
    Ok(())
}

fn selftest(strategy: &Path, n: usize, k: usize, cert_path: &Path, max_epsilon: Option<f64>) -> CmdResult {
    let s: Strategy = read_json(strategy)?;
    let fam = family_for(n, k)?;
    let report = approx_rep_residuals(&s, &fam.x)?;
    println!("delta = {:.6e}", report.delta);
    println!(
        "  synchronicity bounds: {} (max {:.3e})",
        verdict(report.lemma35_pass),
        report.sync_max
    );
    println!(
        "  relation residuals:   {} (max {:.3e}, bound {:.3e})",
        verdict(report.lemma63_pass),
        report.rep_max(),
        report.c_bound
    );
    println!(
        "  traciality:           {} (max {:.3e}, degree {})",
        verdict(report.lemma37_pass),
        report.tracial.max(),
        report.tracial.degree
    );
    let cert = match extract_dilation(&s, &fam) {
        Ok(c) => c,
        Err(e @ Error::JunkExtractionFailed { .. }) => {
            return Err(Failure::Verification(format!("junk state extraction: {e}")))
        }
        Err(e) => return Err(e.into()),
    };
    write_json(&cert, cert_path)?;
    println!(
        "epsilon = {:.6e}, alpha = {:.12}, ancilla {}x{}",
        cert.epsilon,
        cert.alpha.unwrap_or(f64::NAN),
        cert.junk.dim_a,
        cert.junk.dim_b
    );
    println!("certificate written to {}", cert_path.display());
    if !report.pass() {
        let mut failed = Vec::new();
        if !report.lemma35_pass {
            failed.push("synchronicity bounds");
        }
        if !report.lemma63_pass {
            failed.push("relation residual bound");
        }
        if !report.lemma37_pass {
            failed.push("traciality bound");
        }
        return Err(Failure::Verification(format!("violated: {}", failed.join(", "))));
    }
    if let Some(limit) = max_epsilon {
        if cert.epsilon > limit {
            return Err(Failure::Verification(format!(
                "epsilon {:.6e} exceeds --max-epsilon {limit:e}",
                cert.epsilon
            )));
        }
    }
    Ok(())
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "VIOLATED"
    }
}

fn sweep(config: &Path, out: &Path) -> CmdResult {
    let cfg: SweepConfig = read_json(config)?;
    let format = ReportFormat::from_path(out)?;
    let rows = run_sweep(&cfg)?;
    emit_report(&rows, format, out)?;
    println!(
        "{} rows ({} levels x {} trials, {}) written to {}",
        rows.len(),
        cfg.levels.len(),
        cfg.trials_per_level,
        cfg.noise_model.name(),
        out.display()
    );
    let medians = median_epsilon_by_level(&rows);
    for (level, eps) in &medians {
        match eps {
            Some(e) => println!("  level {level:.3e}: median epsilon {e:.3e}"),
            None => println!("  level {level:.3e}: no certificates"),
        }
    }
    let (levels, eps): (Vec<f64>, Vec<f64>) =
        medians.iter().filter_map(|(l, e)| e.map(|e| (*l, e))).unzip();
    if let Some(rho) = spearman(&levels, &eps) {
        println!("  spearman(level, median epsilon) = {rho:.4}");
    }
    let violations: Vec<String> = rows
        .iter()
        .filter(|r| r.delta <= 1.0 && !(r.lemma35_pass && r.lemma63_pass && r.lemma37_pass))
        .map(|r| format!("level {} trial {}", r.level, r.trial))
        .collect();
    if violations.is_empty() {
        println!("  all lemma bounds hold");
        Ok(())
    } else {
        Err(Failure::Verification(format!("lemma bounds violated at {}", violations.join("; "))))
    }
}

fn demo_chsh() -> CmdResult {
    let p = induced_correlation(&chsh_fixture())?;
    println!("CHSH on the maximally entangled state, p(a,b|x,y):");
    for v in 0..2 {
        for w in 0..2 {
            let cells: Vec<String> =
                (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| format!("{:.6}", p.get(v, w, a, b))).collect();
            println!("  x={v} y={w}: {}", cells.join(" "));
        }
    }
    println!("winning probability: {:.12}", chsh_win_probability(&p)?);
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Family(FamilyCommand::Gen { n, k, out }) => family_gen(n, k, &out),
        Command::Family(FamilyCommand::Verify { path, tol }) => family_verify(&path, tol),
        Command::Strategy(StrategyCommand::Canonical { family, out }) => strategy_canonical(family.n, family.k, &out),
        Command::Correlate { strategy, out } => correlate(&strategy, &out),
        Command::Selftest { strategy, family, cert, max_epsilon } => {
            selftest(&strategy, family.n, family.k, &cert, max_epsilon)
        }
        Command::Sweep { config, out } => sweep(&config, &out),
        Command::Demo(DemoCommand::Chsh) => demo_chsh(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
