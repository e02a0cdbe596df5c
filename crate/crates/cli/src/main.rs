//! `extba`: run the agreement simulator, sweep it, or run the oracle suites.

mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use extba::sim_engine::fit::fit_bits;
use extba::sim_engine::report::{write_csv, CsvRow};
use extba::sim_engine::sweep::{sweep, Scenario, SweepConfig};
use extba::sim_engine::{RunMetrics, SimError};
use extba::Proposal;
use extba_verify::{bgc_enum, suites, SuiteReport};

use config::{ConfigArgs, Resolved, RUN_DEFAULTS, SWEEP_DEFAULTS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Config {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Parser, Debug)]
#[command(
    name = "extba",
    version,
    about = "Error-free Byzantine agreement simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one execution and print its summary and CSV row.
    Run(ConfigArgs),
    /// Simulate every (n, L, trial) combination and fit the bit counts.
    Sweep(ConfigArgs),
    /// Compare the implementation against brute-force reference checks.
    Oracle {
        suite: Suite,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Suite {
    Rs,
    Bgc,
    Cool,
}

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(args) => args.resolve(&RUN_DEFAULTS).and_then(|c| cmd_run(&c)),
        Command::Sweep(args) => args.resolve(&SWEEP_DEFAULTS).and_then(|c| cmd_sweep(&c)),
        Command::Oracle { suite, seed } => Ok(cmd_oracle(suite, seed)),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VIOLATION),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn single(field: &str, xs: &[usize]) -> Result<usize, CliError> {
    match xs {
        [x] => Ok(*x),
        _ => Err(CliError::Usage(format!("run takes exactly one --{field}"))),
    }
}

fn emit_csv(out: &Option<PathBuf>, rows: &[CsvRow]) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let io_err = |source| CliError::Io {
                path: path.clone(),
                source,
            };
            let file = File::create(path).map_err(io_err)?;
            let mut w = BufWriter::new(file);
            write_csv(&mut w, rows)?;
            w.flush().map_err(io_err)?;
        }
        None => write_csv(io::stdout().lock(), rows)?,
    }
    Ok(())
}

fn short(p: &Proposal) -> String {
    match p {
        Proposal::Bottom => "bottom".into(),
        Proposal::Value(v) => {
            let hex = v.to_hex();
            let shown = if hex.len() > 16 {
                format!("{}..", &hex[..16])
            } else {
                hex
            };
            format!("{shown} ({} bits)", v.bit_len())
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "VIOLATED"
    }
}

fn print_summary(cfg: &Resolved, sc: &Scenario, m: &RunMetrics) {
    println!(
        "n={} t={} L={} faults={} proposals={} valid={} seed={}",
        m.n,
        m.t,
        m.bit_len,
        cfg.faults_text,
        sc.proposals.label(),
        extba::Validity::name(&cfg.predicate),
        sc.seed
    );
    for (pid, d) in &m.decisions {
        println!(
            "  {pid} decided {} at round {}",
            short(d),
            m.decision_rounds[pid]
        );
    }
    println!("rounds={} total_bits={}", m.rounds, m.total_bits);
    let strong = if m.strong_validity_applicable {
        verdict(m.strong_validity_ok)
    } else {
        "n/a"
    };
    println!(
        "agreement={} termination={} validity={} strong_validity={}",
        verdict(m.agreement_ok),
        verdict(m.termination_ok),
        verdict(m.validity_ok),
        strong
    );
    if m.contract_violated {
        println!("note: outside the fault contract, guarantees are not checked");
    }
}

fn cmd_run(cfg: &Resolved) -> Result<bool, CliError> {
    let sc = Scenario {
        n: single("n", &cfg.ns)?,
        bit_len: single("L", &cfg.ls)?,
        t: cfg.t,
        faults: cfg.faults.clone(),
        proposals: cfg.proposals.clone(),
        predicate: cfg.predicate,
        seed: cfg.seed,
    };
    let m = sc.run()?;
    print_summary(cfg, &sc, &m);
    emit_csv(&cfg.out, &[sc.row(0, &m)?])?;
    Ok(!m.guarantee_violated())
}

fn cmd_sweep(cfg: &Resolved) -> Result<bool, CliError> {
    let sweep_cfg = SweepConfig {
        ns: cfg.ns.clone(),
        ls: cfg.ls.clone(),
        trials: cfg.trials,
        base_seed: cfg.seed,
        t: cfg.t,
        faults: cfg.faults.clone(),
        proposals: cfg.proposals.clone(),
        predicate: cfg.predicate,
    };
    let records = sweep(&sweep_cfg)?;
    let violations = records
        .iter()
        .filter(|r| r.metrics.guarantee_violated())
        .count();
    let samples: Vec<(usize, usize, u64)> = records
        .iter()
        .map(|r| (r.metrics.n, r.metrics.bit_len, r.metrics.total_bits))
        .collect();
    println!("runs={} violations={violations}", records.len());
    match fit_bits(&samples) {
        Some(f) => println!("fit a={:.4} b={:.4} R^2={:.5}", f.a, f.b, f.r_squared),
        None => println!("fit: not enough distinct (n, L) points"),
    }
    let rows: Vec<CsvRow> = records.into_iter().map(|r| r.row).collect();
    emit_csv(&cfg.out, &rows)?;
    Ok(violations == 0)
}

fn cmd_oracle(suite: Suite, seed: u64) -> bool {
    let reports: Vec<SuiteReport> = match suite {
        Suite::Rs => vec![
            suites::rs_trials(10_000, seed),
            suites::rs_oracle(1_000, seed.wrapping_add(1)),
            suites::gf_agreement(10_000, seed.wrapping_add(2)),
        ],
        Suite::Bgc => {
            let mut r: Vec<SuiteReport> = (4..=7).map(bgc_enum::exhaustive).collect();
            r.push(bgc_enum::literal(4));
            r
        }
        Suite::Cool => vec![
            suites::cool_properties(7, seed..seed + 1000),
            suites::cool_properties(13, seed..seed + 1000),
        ],
    };
    let mut ok = true;
    for r in &reports {
        println!("{} {r}", if r.passed() { "PASS" } else { "FAIL" });
        ok &= r.passed();
    }
    ok
}
