mod config;
mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use rayon::prelude::*;
use thiserror::Error;

use prodnorm::verify::{run_suite, sample_sum, SuiteConfig};
use prodnorm::{McConfig, MethodConfig, MethodRegistry, OrderSpec};

use config::{resolve, Cli, Command, CommandKind, Flags, Resolved};
use output::{write_checks, write_rows, write_samples, Row};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Evaluation(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("write failed: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Evaluation(_) | CliError::Io(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

fn method_config(cfg: &Resolved) -> MethodConfig {
    let mut m = MethodConfig::default();
    if let Some(t) = cfg.tolerance {
        m.eval.rel_tol = t;
        m.quad.target_rel_err = t;
    }
    m
}

/// Density rows on the grid. With `mean`, the order must be a count n and
/// the rows are the density of S_n / n.
fn density_rows(cfg: &Resolved, mean: bool) -> Result<Vec<Row>, CliError> {
    let scale = if mean { cfg.copies()? as f64 } else { 1.0 };
    let method = MethodRegistry::with_builtins()
        .get(&cfg.method)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let mcfg = method_config(cfg);
    let order = OrderSpec { nu: cfg.order };
    let rows = cfg
        .grid
        .values()
        .into_par_iter()
        .map(|x| match method.evaluate(&cfg.params, order, scale * x, &mcfg) {
            Ok(r) if r.is_singular() => Row::singular(x, r.method.as_str()),
            Ok(r) => Row::ok(x, scale * r.value, scale * r.err_estimate, r.method.as_str()),
            Err(e) => Row::failed(x, method.name(), e.to_string()),
        })
        .collect();
    Ok(rows)
}

fn cmd_density(cfg: &Resolved, mean: bool, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let rows = density_rows(cfg, mean)?;
    write_rows(out, cfg, &rows)?;
    let failed: Vec<&Row> = rows.iter().filter(|r| r.status == "error").collect();
    for r in &failed {
        eprintln!("x = {}: {}", r.x, r.message.as_deref().unwrap_or(""));
    }
    match failed.len() {
        0 => Ok(()),
        k => Err(CliError::Evaluation(format!("{k} of {} grid points failed", rows.len()))),
    }
}

fn cmd_sample(cfg: &Resolved, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let n = cfg.copies()?;
    let mc = McConfig {
        n_samples: cfg.samples,
        seed: cfg.seed,
        ..McConfig::default()
    };
    let draws = sample_sum(&cfg.params, n, &mc).map_err(|e| CliError::Evaluation(e.to_string()))?;
    write_samples(out, cfg, &draws)?;
    Ok(())
}

fn cmd_verify(cfg: &Resolved, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let suite = SuiteConfig {
        params: cfg.params,
        order: OrderSpec { nu: cfg.order },
        divisibility_m: cfg.divisibility_m,
        mc: McConfig {
            n_samples: cfg.samples,
            seed: cfg.seed,
            ..McConfig::default()
        },
        methods: MethodConfig::default(),
        tolerance: cfg.tolerance,
    };
    let report = run_suite(&suite).map_err(|e| CliError::Evaluation(e.to_string()))?;
    write_checks(out, cfg, &report)?;
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn cmd_methods(out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    for m in MethodRegistry::with_builtins().iter() {
        writeln!(out, "{:<14} {}", m.name(), m.description())?;
    }
    Ok(())
}

fn run_with(kind: CommandKind, flags: &Flags, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let env = std::env::var("PRODNORM_THREADS").ok();
    let cfg = resolve(kind, flags, env.as_deref())?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| CliError::Evaluation(e.to_string()))?;
    pool.install(|| match kind {
        CommandKind::Pdf => cmd_density(&cfg, false, out),
        CommandKind::Mean => cmd_density(&cfg, true, out),
        CommandKind::Sample => cmd_sample(&cfg, out),
        CommandKind::Verify => cmd_verify(&cfg, out),
    })
}

fn run(cli: Cli, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    match cli.command {
        Command::Pdf(f) => run_with(CommandKind::Pdf, &f, out),
        Command::Mean(f) => run_with(CommandKind::Mean, &f, out),
        Command::Sample(f) => run_with(CommandKind::Sample, &f, out),
        Command::Verify(f) => run_with(CommandKind::Verify, &f, out),
        Command::Methods => cmd_methods(out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(1);
        }
    };
    let mut out = io::BufWriter::new(io::stdout());
    let result = run(cli, &mut out).and_then(|()| out.flush().map_err(CliError::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
