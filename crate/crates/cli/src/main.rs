mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ffquad::moments::{Ensemble, EnsembleSpec};
use ffquad::report::Report;
use ffquad::tables;
use ffquad::verify::{VerifyOptions, Verifier};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "ffquad", version, about = "Quadratic Dirichlet L-functions over F_q[x]")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

/// Every flag overrides the same key of the config file.
#[derive(Args)]
struct Flags {
    /// Flat key = value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Field size, a prime ≡ 1 mod 4
    #[arg(long, global = true)]
    q: Option<String>,
    /// Genus list or range, e.g. 1..3
    #[arg(long, global = true)]
    g: Option<String>,
    /// Euler-product cutoffs X
    #[arg(long, global = true)]
    x: Option<String>,
    /// Moment orders k
    #[arg(long, global = true)]
    k: Option<String>,
    /// full or sample
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Sample size
    #[arg(long, global = true)]
    n: Option<String>,
    /// Seed for sampling and Monte Carlo
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Twists separated by ';', e.g. "1; x; x^2; x(x+1)"
    #[arg(long, global = true)]
    ell: Option<String>,
    /// Matrix sizes N for rmt
    #[arg(long, global = true)]
    dim: Option<String>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    out: Option<String>,
    /// csv or json
    #[arg(long, global = true)]
    format: Option<String>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    workers: Option<String>,
    /// L-coefficient cache directory (falls back to $CACHE_DIR)
    #[arg(long, global = true)]
    cache_dir: Option<String>,
    /// Zero images kept on each side in Z_X
    #[arg(long, global = true)]
    k_max: Option<String>,
    /// Largest prime degree in truncated Euler products
    #[arg(long, global = true)]
    d_max: Option<String>,
    /// Symbol-evaluation ceiling for the full-enumeration warning
    #[arg(long, global = true)]
    budget: Option<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("q", &self.q),
            ("g", &self.g),
            ("x", &self.x),
            ("k", &self.k),
            ("mode", &self.mode),
            ("n", &self.n),
            ("seed", &self.seed),
            ("ell", &self.ell),
            ("dim", &self.dim),
            ("out", &self.out),
            ("format", &self.format),
            ("workers", &self.workers),
            ("cache_dir", &self.cache_dir),
            ("k_max", &self.k_max),
            ("d_max", &self.d_max),
            ("budget", &self.budget),
        ]
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the acceptance suite; nonzero exit on any failure
    Verify {
        /// Criterion ids to run (default: all)
        #[arg(long)]
        criteria: Option<String>,
    },
    /// L-polynomial coefficients and central values
    Lfun,
    /// Zeros as angles θ with u = q^{-1/2} e^{±iθ}
    Zeros,
    /// L(1/2) against P_X · Z_X
    Decompose,
    /// ⟨L^k⟩, ⟨P_X^k⟩ and ⟨(L/P_X)^k⟩
    Moments,
    /// Twisted moments ⟨L^k χ_D(ℓ)⟩
    Twisted,
    /// Arithmetic constants and their truncation data
    Constants,
    /// Symplectic random-matrix averages
    Rmt,
    /// Print the effective configuration
    Config,
}

fn build_config(flags: &Flags) -> Result<RunConfig, String> {
    let mut c = RunConfig::default();
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        c.apply_text(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    for (key, value) in flags.pairs() {
        if let Some(v) = value {
            c.set(key, v).map_err(|e| format!("--{}: {e}", key.replace('_', "-")))?;
        }
    }
    if c.cache_dir.is_none() {
        c.cache_dir = std::env::var_os("CACHE_DIR").filter(|v| !v.is_empty()).map(PathBuf::from);
    }
    c.validate()?;
    Ok(c)
}

fn ensembles(c: &RunConfig) -> Result<Vec<Ensemble>, String> {
    c.g.iter()
        .map(|&g| {
            let spec = EnsembleSpec {
                q: c.q,
                g,
                mode: c.mode(),
            };
            let (ens, warning) = Ensemble::build_with_cache(spec, c.cache_dir.as_deref()).map_err(|e| e.to_string())?;
            if let Some(w) = warning {
                eprintln!("warning: {w}");
            }
            Ok(ens)
        })
        .collect()
}

fn emit(c: &RunConfig, report: &mut Report) -> Result<(), String> {
    for (k, v) in c.metadata() {
        report.meta(k, v);
    }
    match &c.out {
        Some(path) => report.write(path, c.format).map_err(|e| e.to_string()),
        None => {
            print!("{}", report.render(c.format).map_err(|e| e.to_string())?);
            Ok(())
        }
    }
}

fn per_ensemble<T: serde::Serialize>(
    c: &RunConfig,
    name: &str,
    rows: impl Fn(&Ensemble) -> ffquad::Result<Vec<T>>,
) -> Result<(), String> {
    let mut report = Report::new(name);
    for ens in ensembles(c)? {
        report.extend(&rows(&ens).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    }
    emit(c, &mut report)
}

fn verify(c: &RunConfig, criteria: Option<&str>) -> Result<bool, String> {
    let ids: Vec<u32> = match criteria {
        Some(s) => config::parse_list(s)?,
        None => ffquad::verify::CRITERIA.iter().map(|c| c.0).collect(),
    };
    let mut v = Verifier::new(VerifyOptions {
        cache_dir: c.cache_dir.clone(),
        seed: c.seed,
    });
    let mut report = Report::new("verify");
    let mut failed = Vec::new();
    for id in ids {
        let o = v.run(id).map_err(|e| e.to_string())?;
        println!("{o}");
        if !o.passed {
            failed.push(id);
        }
        report.push(&o).map_err(|e| e.to_string())?;
    }
    for w in v.warnings() {
        eprintln!("warning: {w}");
    }
    let list = failed.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
    report.meta("failed", &list);
    if !failed.is_empty() {
        println!("FAILED: {list}");
    }
    if c.out.is_some() {
        emit(c, &mut report)?;
    }
    Ok(failed.is_empty())
}

fn run(cli: &Cli) -> Result<bool, String> {
    let c = build_config(&cli.flags)?;
    if let Some(w) = c.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    if !matches!(cli.command, Command::Verify { .. } | Command::Constants | Command::Rmt | Command::Config) {
        for w in c.budget_warnings() {
            eprintln!("warning: {w}");
        }
    }
    match &cli.command {
        Command::Verify { criteria } => return verify(&c, criteria.as_deref()),
        Command::Lfun => per_ensemble(&c, "lfun", |e| Ok(tables::lfun_rows(e)))?,
        Command::Zeros => per_ensemble(&c, "zeros", tables::zero_rows)?,
        Command::Decompose => per_ensemble(&c, "decompose", |e| tables::decompose_rows(e, &c.x, c.k_max))?,
        Command::Moments => per_ensemble(&c, "moments", |e| Ok(tables::moment_rows(e, &c.k, &c.x)))?,
        Command::Twisted => {
            let ells = c.ells()?;
            per_ensemble(&c, "twisted", |e| tables::twisted_rows(e, &ells, &c.k))?
        }
        Command::Constants => {
            let rows = tables::constant_rows(c.q, &c.k, &c.ells()?, c.d_max).map_err(|e| e.to_string())?;
            let mut report = Report::new("constants");
            report.extend(&rows).map_err(|e| e.to_string())?;
            emit(&c, &mut report)?
        }
        Command::Rmt => {
            let ks: Vec<f64> = c.k.iter().map(|&k| k as f64).collect();
            let rows = tables::rmt_rows(&c.dim, &ks, &c.x, c.n, c.seed).map_err(|e| e.to_string())?;
            let mut report = Report::new("rmt");
            report.extend(&rows).map_err(|e| e.to_string())?;
            emit(&c, &mut report)?
        }
        Command::Config => print!("{}", c.to_text()),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
