//! `tfm-lab`: audits, Myerson checks, sampling and the claim suite from the
//! command line. Reports are JSON; a short summary goes to stdout.
//!
//! Exit status: 0 when every verdict matches its expectation (or none were
//! given), 1 on a mismatch, 2 on a configuration error, 3 when the auditor
//! refuses an enumeration as too large.

pub mod config;
pub mod sample;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tfm_core::{
    audit, check_payment_rule, run_paper_suite, AuditReport, BidVector, Gamma, Mechanism, PaymentRuleReport, Property,
    SuiteOptions, SuiteReport, Verdict,
};

use config::{load_mechanism, load_scenario_space, parse_csv, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] tfm_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(tfm_core::Error::CombinatorialLimit { .. } | tfm_core::Error::VectorTooLong { .. }) => {
                EXIT_REFUSED
            }
            _ => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tfm-lab", version, about = "Audit transaction fee mechanisms for incentive compatibility")]
pub struct Cli {
    /// Worker threads for the audit search.
    #[arg(long, global = true, env = "TFM_LAB_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for profitable deviations (UIC, MIC, c-SCP).
    Audit(CommonArgs),
    /// Compare payments with critical bids.
    Myerson(CommonArgs),
    /// Run the built-in claim catalog.
    PaperSuite(CommonArgs),
    /// Sample the confirmation rule and compare with the exact marginals.
    Sample(CommonArgs),
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Mechanism as a JSON file path or inline JSON.
    #[arg(long)]
    pub mechanism: Option<String>,
    /// Comma-separated bid vector, e.g. 10,8,5.
    #[arg(long, allow_hyphen_values = true)]
    pub bids: Option<String>,
    /// Scenario space JSON file.
    #[arg(long)]
    pub scenario_space: Option<PathBuf>,
    /// Discount factor as num/den or a decimal.
    #[arg(long)]
    pub gamma: Option<String>,
    /// Coalition size bound for SCP.
    #[arg(long)]
    pub c: Option<usize>,
    /// Comma-separated properties: uic,mic,scp.
    #[arg(long)]
    pub properties: Option<String>,
    /// Candidate offset around bids and payments.
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub max_fakes: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of samples.
    #[arg(long)]
    pub n: Option<u64>,
    /// Where to write the JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Comma-separated claim ids.
    #[arg(long)]
    pub only: Option<String>,
    /// Expected outcome: pass/fail per property (audit), match/mismatch
    /// (myerson).
    #[arg(long)]
    pub expect: Option<String>,
}

impl CommonArgs {
    /// The config file, if any, with every given flag applied on top.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = &self.mechanism {
            cfg.mechanism = Some(load_mechanism(m)?);
        }
        if let Some(b) = &self.bids {
            cfg.bids = Some(parse_csv(b, "bids")?);
        }
        if let Some(p) = &self.scenario_space {
            cfg.scenario_space = Some(load_scenario_space(p)?);
        }
        if let Some(g) = &self.gamma {
            cfg.gamma = Some(
                g.parse::<Gamma>()
                    .map_err(|e| CliError::Config(format!("gamma: {e}")))?,
            );
        }
        if self.c.is_some() {
            cfg.c = self.c;
        }
        if let Some(p) = &self.properties {
            cfg.properties = parse_csv(p, "properties")?;
        }
        if self.epsilon.is_some() || self.max_fakes.is_some() {
            let mut audit = cfg.audit.clone().unwrap_or_default();
            if let Some(e) = &self.epsilon {
                audit.epsilon = e.parse().map_err(|e| CliError::Config(format!("epsilon: {e}")))?;
            }
            if let Some(f) = self.max_fakes {
                audit.max_fakes = f;
            }
            cfg.audit = Some(audit);
        }
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        if self.n.is_some() {
            cfg.n = self.n;
        }
        if self.report.is_some() {
            cfg.report = self.report.clone();
        }
        if let Some(o) = &self.only {
            cfg.only = parse_csv(o, "only")?;
        }
        if let Some(e) = &self.expect {
            cfg.expect = parse_csv(e, "expect")?;
        }
        Ok(cfg)
    }
}

/// Parses arguments, runs, and returns the exit status. Summaries go to
/// `out`, diagnostics to `err`.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            let _ = writeln!(err, "error: threads: must be at least 1");
            return EXIT_CONFIG;
        }
        // A second build in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli.command, out) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_MISMATCH,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command. `Ok(false)` means an expectation was not met.
pub fn run(command: &Command, out: &mut dyn Write) -> Result<bool, CliError> {
    match command {
        Command::Audit(a) => run_audit(&a.resolve()?, out),
        Command::Myerson(a) => run_myerson(&a.resolve()?, out),
        Command::PaperSuite(a) => run_suite(&a.resolve()?, out),
        Command::Sample(a) => run_sample(&a.resolve()?, out),
    }
}

#[derive(Debug, Serialize)]
pub struct AuditEntry {
    pub report: AuditReport,
    pub expected: Option<Verdict>,
    pub matches: bool,
}

#[derive(Debug, Serialize)]
pub struct AuditRun {
    pub command: &'static str,
    pub mechanism: Mechanism,
    pub gamma: Gamma,
    pub vectors: usize,
    pub results: Vec<AuditEntry>,
    pub matched: bool,
}

pub fn run_audit(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    let m = cfg.require_mechanism()?.clone();
    let audit_cfg = cfg.audit_config()?;
    let properties = if cfg.properties.is_empty() {
        vec![Property::Uic, Property::Mic, Property::Scp]
    } else {
        cfg.properties.clone()
    };
    let cfg = RunConfig {
        properties: properties.clone(),
        ..cfg.clone()
    };
    let expected = cfg.expected_verdicts()?;
    let c = cfg.c.unwrap_or(1);
    let vectors = cfg.vectors()?;
    let mut results = Vec::new();
    for (&p, want) in properties.iter().zip(expected) {
        let report = audit(&m, p, c, &vectors, &audit_cfg)?;
        let matches = want.is_none_or(|w| w == report.verdict);
        let _ = writeln!(out, "{}", audit_line(&report, want, matches));
        results.push(AuditEntry {
            report,
            expected: want,
            matches,
        });
    }
    let run = AuditRun {
        command: "audit",
        mechanism: m,
        gamma: audit_cfg.gamma,
        vectors: vectors.len(),
        matched: results.iter().all(|r| r.matches),
        results,
    };
    write_report(cfg.report.as_deref(), &run)?;
    Ok(run.matched)
}

fn audit_line(r: &AuditReport, want: Option<Verdict>, matches: bool) -> String {
    let name = match r.c {
        Some(c) => format!("{c}-SCP"),
        None => r.property.to_string(),
    };
    let verdict = match r.verdict {
        Verdict::PassOnGrid => "PASS".to_string(),
        Verdict::Fail => format!("FAIL (gain {})", r.best_gain().map(ToString::to_string).unwrap_or_default()),
    };
    let tail = match want {
        Some(_) if !matches => "  [unexpected]",
        _ => "",
    };
    format!(
        "{name:<6} {verdict}  gamma={} scenarios={} deviations={}{tail}",
        r.gamma, r.scenarios_checked, r.deviations_checked
    )
}

#[derive(Debug, Serialize)]
pub struct MyersonRun {
    pub command: &'static str,
    pub mechanism: Mechanism,
    pub vectors: usize,
    pub mismatched_vectors: usize,
    /// Every vector when a single one was given, otherwise only mismatches.
    pub reports: Vec<PaymentRuleReport>,
    pub matched: bool,
}

pub fn run_myerson(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    let m = cfg.require_mechanism()?.clone();
    let want = match cfg.expect.as_slice() {
        [] => None,
        [one] => match one.trim().to_ascii_lowercase().as_str() {
            "match" => Some(true),
            "mismatch" => Some(false),
            other => return Err(CliError::Config(format!("expect: unknown value {other:?} (use match or mismatch)"))),
        },
        _ => return Err(CliError::Config("expect: myerson takes a single value".into())),
    };
    let vectors = cfg.vectors()?;
    let single = vectors.len() == 1;
    let mut reports = Vec::new();
    let mut mismatched = 0;
    for v in &vectors {
        let r = check_payment_rule(&m, v)?;
        if !r.matches() {
            mismatched += 1;
        }
        if single || !r.matches() {
            reports.push(r);
        }
    }
    let all_match = mismatched == 0;
    if single {
        for c in &reports[0].checks {
            let z = c.critical_bid.map(|z| z.to_string()).unwrap_or_else(|| "none".into());
            let _ = writeln!(
                out,
                "slot {}: bid {} pays {} critical bid {} {}",
                c.slot,
                c.bid,
                c.payment,
                z,
                if c.matches { "match" } else { "MISMATCH" }
            );
        }
    }
    let _ = writeln!(
        out,
        "payment rule {} on {}/{} vectors",
        if all_match { "matches" } else { "mismatches" },
        vectors.len() - mismatched,
        vectors.len()
    );
    let run = MyersonRun {
        command: "myerson",
        mechanism: m,
        vectors: vectors.len(),
        mismatched_vectors: mismatched,
        reports,
        matched: want.is_none_or(|w| w == all_match),
    };
    write_report(cfg.report.as_deref(), &run)?;
    Ok(run.matched)
}

pub fn run_suite(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    let mut opts = SuiteOptions::default();
    if let Some(space) = &cfg.scenario_space {
        opts.space = space.clone();
    }
    if let Some(audit) = &cfg.audit {
        opts.config = audit.clone();
    }
    let only = (!cfg.only.is_empty()).then_some(cfg.only.as_slice());
    let report: SuiteReport = run_paper_suite(only, &opts)?;
    for claim in &report.claims {
        let _ = writeln!(
            out,
            "{:<4} {}  {}",
            claim.id,
            if claim.passed { "PASS" } else { "FAIL" },
            claim.title
        );
        for check in claim.checks.iter().filter(|c| !c.passed) {
            let _ = writeln!(
                out,
                "       {}: expected {}, observed {}",
                check.description, check.expected, check.observed
            );
        }
    }
    let _ = writeln!(out, "{}/{} claims reproduced", report.matched, report.total);
    write_report(cfg.report.as_deref(), &report)?;
    Ok(report.passed)
}

pub fn run_sample(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    let m = cfg.require_mechanism()?.clone();
    let bids: BidVector = cfg
        .bid_vector()?
        .ok_or_else(|| CliError::Config("bids: required (pass --bids)".into()))?;
    let n = cfg.n.unwrap_or(10_000);
    let seed = cfg.seed.unwrap_or(0);
    let report = sample::sample_run(&m, &bids, n, seed)?;
    for s in &report.slots {
        let _ = writeln!(
            out,
            "{:?} bid {}: {} / {} confirmed, exact {}{}",
            s.owner,
            s.bid,
            s.confirmed,
            report.n,
            s.marginal,
            if s.within_3_sigma { "" } else { "  [outside 3 sigma]" }
        );
    }
    write_report(cfg.report.as_deref(), &report)?;
    Ok(true)
}

fn write_report<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let Some(path) = path else {
        return Ok(());
    };
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    std::fs::write(path, text + "\n").map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
