//! Command-line interface: spectrum / perf / sweep / verify.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde_json::json;

use crate::formulas::{self, Evaluator, SpectrumTable};
use crate::oracle::{self, OracleReport};
use crate::partitions::{enumerate_partitions, Partition};
use crate::precise::rational_decimal;
use crate::symrep;

/// Default significant digits for decimal output.
const SIG_DIGITS: usize = 12;
const DEFAULT_PRECISION_BITS: u32 = 128;
const DEFAULT_SEED: u64 = 20240817;

#[derive(Parser)]
#[command(
    name = "pbt",
    version,
    about = "Performance figures for deterministic and probabilistic port-based teleportation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact spectrum of the port-based teleportation operator.
    Spectrum {
        /// Number of ports N.
        #[arg(long)]
        n: u32,
        /// Local dimension d.
        #[arg(long)]
        d: u32,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        /// Output path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fidelity and success probabilities for one (N, d).
    Perf {
        /// Number of ports N.
        #[arg(long)]
        n: u32,
        /// Local dimension d.
        #[arg(long)]
        d: u32,
        /// Working precision in bits (>= 64); env PBT_PRECISION_BITS sets the default.
        #[arg(long)]
        precision_bits: Option<u32>,
        #[arg(long, value_enum, default_value_t = PerfFormat::Text)]
        format: PerfFormat,
        /// Output path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate quantities over a grid of (d, N).
    Sweep {
        /// Local dimensions, comma separated (e.g. 2,3,4).
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<u32>,
        #[arg(long)]
        n_min: u32,
        #[arg(long)]
        n_max: u32,
        #[arg(long, default_value_t = 1)]
        n_step: u32,
        /// Quantities to tabulate (subset of F,f,p_epr,p_opt).
        #[arg(long, value_delimiter = ',', value_enum,
              default_values_t = vec![Quantity::F, Quantity::SmallF, Quantity::PEpr, Quantity::POpt])]
        quantities: Vec<Quantity>,
        /// Working precision in bits (>= 64); env PBT_PRECISION_BITS sets the default.
        #[arg(long)]
        precision_bits: Option<u32>,
        #[arg(long, value_enum, default_value_t = SweepFormat::Csv)]
        format: SweepFormat,
        /// Output path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the numerical oracle suite; exits 0 iff every check passes.
    Verify {
        /// Restrict to these local dimensions.
        #[arg(long, value_delimiter = ',')]
        d: Option<Vec<u32>>,
        /// Cap on the system count n (= N + 1) per check.
        #[arg(long)]
        max_n: Option<u32>,
        /// Subset of checks to run (default: all).
        #[arg(long, value_delimiter = ',', value_enum)]
        checks: Option<Vec<Check>>,
        /// Seed for sampled permutation checks.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Skip dense checks whose Hilbert-space dimension exceeds this.
        #[arg(long, default_value_t = 16384)]
        max_dim_guard: u128,
        #[arg(long, value_enum, default_value_t = VerifyFormat::Text)]
        format: VerifyFormat,
        /// Output path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Self-test: inject a perturbed-spectrum fixture that must fail.
        #[arg(long, hide = true)]
        inject_failure: bool,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PerfFormat {
    Text,
    Csv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SweepFormat {
    Csv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum VerifyFormat {
    Text,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Quantity {
    #[value(name = "F")]
    F,
    #[value(name = "f")]
    SmallF,
    #[value(name = "p_epr")]
    PEpr,
    #[value(name = "p_opt")]
    POpt,
}

impl Quantity {
    fn column(self) -> &'static str {
        match self {
            Quantity::F => "F",
            Quantity::SmallF => "f",
            Quantity::PEpr => "p_epr",
            Quantity::POpt => "p_opt",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Check {
    Spectrum,
    Facts,
    Zeta,
    Fidelity,
    Channel,
    SdpEpr,
    SdpOptimal,
    Prir,
}

enum CliError {
    Usage(String),
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Parse arguments, run the selected command, and return the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spectrum { n, d, format, out } => cmd_spectrum(n, d, format, &out),
        Command::Perf {
            n,
            d,
            precision_bits,
            format,
            out,
        } => cmd_perf(n, d, precision_bits, format, &out),
        Command::Sweep {
            d,
            n_min,
            n_max,
            n_step,
            quantities,
            precision_bits,
            format,
            out,
        } => cmd_sweep(&d, n_min, n_max, n_step, &quantities, precision_bits, format, &out),
        Command::Verify {
            d,
            max_n,
            checks,
            seed,
            max_dim_guard,
            format,
            out,
            inject_failure,
        } => {
            return match cmd_verify(
                d.as_deref(),
                max_n,
                checks.as_deref(),
                seed,
                max_dim_guard,
                format,
                &out,
                inject_failure,
            ) {
                Ok(all_pass) => {
                    if all_pass {
                        0
                    } else {
                        1
                    }
                }
                Err(e) => report_error(e),
            };
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => report_error(e),
    }
}

fn report_error(e: CliError) -> i32 {
    match e {
        CliError::Usage(msg) => {
            eprintln!("error: {msg}");
            2
        }
        CliError::Io(msg) => {
            eprintln!("I/O error: {msg}");
            3
        }
    }
}

fn validate_point(ports: u32, d: u32) -> Result<(), CliError> {
    if ports < 1 {
        return Err(CliError::Usage("N must be >= 1".to_string()));
    }
    if d < 2 {
        return Err(CliError::Usage("d must be >= 2".to_string()));
    }
    Ok(())
}

fn resolve_precision(flag: Option<u32>) -> Result<u32, CliError> {
    let bits = match flag {
        Some(b) => b,
        None => match std::env::var("PBT_PRECISION_BITS") {
            Ok(s) => s.parse::<u32>().map_err(|_| {
                CliError::Usage(format!("PBT_PRECISION_BITS is not a valid integer: {s:?}"))
            })?,
            Err(_) => DEFAULT_PRECISION_BITS,
        },
    };
    if bits < 64 {
        return Err(CliError::Usage(format!(
            "precision_bits must be >= 64, got {bits}"
        )));
    }
    Ok(bits)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            f.write_all(content.as_bytes())?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

fn fraction(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn cmd_spectrum(ports: u32, d: u32, format: TableFormat, out: &Option<PathBuf>) -> Result<(), CliError> {
    validate_point(ports, d)?;
    let table = formulas::spectrum(ports, d);
    let content = match format {
        TableFormat::Csv => spectrum_csv(&table),
        TableFormat::Json => spectrum_json(&table),
    };
    emit(out, &content)
}

fn spectrum_csv(table: &SpectrumTable) -> String {
    let mut s = String::from("alpha,mu,gamma_num,gamma_den,lambda,degeneracy\n");
    for e in &table.entries {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.pair.alpha.label(),
            e.pair.mu.label(),
            e.gamma.numer(),
            e.gamma.denom(),
            rational_decimal(&e.lambda, SIG_DIGITS),
            e.degeneracy,
        ));
    }
    let status = if table.trace_identity_holds() { "ok" } else { "FAILED" };
    s.push_str(&format!(
        "# trace = N*d^N = {}: {status}\n",
        table.expected_trace().numer(),
    ));
    s
}

fn spectrum_json(table: &SpectrumTable) -> String {
    let rows: Vec<serde_json::Value> = table
        .entries
        .iter()
        .map(|e| {
            json!({
                "alpha": e.pair.alpha.label(),
                "mu": e.pair.mu.label(),
                "gamma_num": e.gamma.numer().to_string(),
                "gamma_den": e.gamma.denom().to_string(),
                "lambda": rational_decimal(&e.lambda, SIG_DIGITS),
                "degeneracy": e.degeneracy.to_string(),
            })
        })
        .collect();
    let doc = json!({
        "N": table.ports,
        "d": table.local_dim,
        "rows": rows,
        "trace": table.expected_trace().numer().to_string(),
        "trace_identity": table.trace_identity_holds(),
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("serialize");
    s.push('\n');
    s
}

fn cmd_perf(
    ports: u32,
    d: u32,
    precision_bits: Option<u32>,
    format: PerfFormat,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    validate_point(ports, d)?;
    let bits = resolve_precision(precision_bits)?;
    let report = formulas::performance_report(ports, d, bits);
    let f_dec = report.fidelity.to_decimal(SIG_DIGITS);
    let avg_dec = report.avg_fidelity.to_decimal(SIG_DIGITS);
    let pe_frac = fraction(&report.p_epr);
    let pe_dec = rational_decimal(&report.p_epr, SIG_DIGITS);
    let po_frac = fraction(&report.p_opt);
    let po_dec = rational_decimal(&report.p_opt, SIG_DIGITS);
    let content = match format {
        PerfFormat::Text => format!(
            "N = {ports}, d = {d}\n\
             F = {f_dec}\n\
             f = {avg_dec}\n\
             p_epr = {pe_frac} = {pe_dec}\n\
             p_opt = {po_frac} = {po_dec}\n"
        ),
        PerfFormat::Csv => format!(
            "d,N,F,f,p_epr,p_opt\n{d},{ports},{f_dec},{avg_dec},{pe_dec},{po_dec}\n"
        ),
        PerfFormat::Json => {
            let doc = json!({
                "N": ports,
                "d": d,
                "precision_bits": bits,
                "F": f_dec,
                "f": avg_dec,
                "p_epr": {"fraction": pe_frac, "decimal": pe_dec},
                "p_opt": {"fraction": po_frac, "decimal": po_dec},
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("serialize");
            s.push('\n');
            s
        }
    };
    emit(out, &content)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    ds: &[u32],
    n_min: u32,
    n_max: u32,
    n_step: u32,
    quantities: &[Quantity],
    precision_bits: Option<u32>,
    format: SweepFormat,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    if ds.is_empty() {
        return Err(CliError::Usage("at least one d is required".to_string()));
    }
    if ds.iter().any(|&d| d < 2) {
        return Err(CliError::Usage("every d must be >= 2".to_string()));
    }
    if n_min < 1 || n_min > n_max {
        return Err(CliError::Usage(format!(
            "need 1 <= n_min <= n_max, got n_min={n_min}, n_max={n_max}"
        )));
    }
    if n_step < 1 {
        return Err(CliError::Usage("n_step must be >= 1".to_string()));
    }
    if quantities.is_empty() {
        return Err(CliError::Usage("at least one quantity is required".to_string()));
    }
    let bits = resolve_precision(precision_bits)?;
    let mut cols: Vec<Quantity> = Vec::new();
    for &q in quantities {
        if !cols.contains(&q) {
            cols.push(q);
        }
    }
    let mut ds_sorted = ds.to_vec();
    ds_sorted.sort_unstable();
    ds_sorted.dedup();
    let ns: Vec<u32> = (n_min..=n_max).step_by(n_step as usize).collect();

    // Rows are computed per d in parallel, then emitted in canonical
    // (d ascending, N ascending) order.
    let per_d: Vec<Vec<(u32, u32, Vec<String>)>> = ds_sorted
        .par_iter()
        .map(|&d| {
            let mut ev = Evaluator::new(d);
            let mut rows = Vec::with_capacity(ns.len());
            for &n in &ns {
                let mut vals = Vec::with_capacity(cols.len());
                for &q in &cols {
                    let v = match q {
                        Quantity::F => ev.fidelity_deterministic(n, bits).to_decimal(SIG_DIGITS),
                        Quantity::SmallF => ev
                            .fidelity_deterministic(n, bits)
                            .affine_avg(d)
                            .to_decimal(SIG_DIGITS),
                        Quantity::PEpr => rational_decimal(&ev.prob_success_epr(n), SIG_DIGITS),
                        Quantity::POpt => rational_decimal(&ev.prob_success_optimal(n), SIG_DIGITS),
                    };
                    vals.push(v);
                }
                ev.prune_below(n);
                rows.push((d, n, vals));
            }
            rows
        })
        .collect();

    let content = match format {
        SweepFormat::Csv => {
            let mut s = String::from("d,N");
            for &q in &cols {
                s.push(',');
                s.push_str(q.column());
            }
            s.push('\n');
            for rows in &per_d {
                for (d, n, vals) in rows {
                    s.push_str(&format!("{d},{n},{}\n", vals.join(",")));
                }
            }
            s
        }
        SweepFormat::Json => {
            let mut arr = Vec::new();
            for rows in &per_d {
                for (d, n, vals) in rows {
                    let mut obj = serde_json::Map::new();
                    obj.insert("d".to_string(), json!(d));
                    obj.insert("N".to_string(), json!(n));
                    for (q, v) in cols.iter().zip(vals) {
                        obj.insert(q.column().to_string(), json!(v));
                    }
                    arr.push(serde_json::Value::Object(obj));
                }
            }
            let mut s = serde_json::to_string_pretty(&serde_json::Value::Array(arr))
                .expect("serialize");
            s.push('\n');
            s
        }
    };
    emit(out, &content)
}

/// One verification record: the check report plus the grid point it ran at.
struct VerifyRecord {
    n: Option<u32>,
    d: Option<u32>,
    report: OracleReport,
}

/// Default cap on the system count n for each check, per local dimension.
fn default_n_cap(check: Check, d: u32) -> u32 {
    match check {
        Check::Spectrum => match d {
            2 => 10,
            3 => 6,
            4 => 5,
            _ => 4,
        },
        Check::Fidelity | Check::Channel => match d {
            2 => 7,
            3 => 5,
            _ => 4,
        },
        _ => match d {
            2 => 6,
            3 => 5,
            _ => 4,
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    ds: Option<&[u32]>,
    max_n: Option<u32>,
    checks: Option<&[Check]>,
    seed: u64,
    max_dim_guard: u128,
    format: VerifyFormat,
    out: &Option<PathBuf>,
    inject_failure: bool,
) -> Result<bool, CliError> {
    let all_checks = [
        Check::Spectrum,
        Check::Facts,
        Check::Zeta,
        Check::Fidelity,
        Check::Channel,
        Check::SdpEpr,
        Check::SdpOptimal,
        Check::Prir,
    ];
    let selected: Vec<Check> = match checks {
        Some(cs) => {
            let mut v = Vec::new();
            for &c in &all_checks {
                if cs.contains(&c) {
                    v.push(c);
                }
            }
            v
        }
        None => all_checks.to_vec(),
    };
    if selected.is_empty() {
        return Err(CliError::Usage("no checks selected".to_string()));
    }
    let dims: Vec<u32> = match ds {
        Some(list) => {
            if list.iter().any(|&d| d < 2) {
                return Err(CliError::Usage("every d must be >= 2".to_string()));
            }
            let mut v = list.to_vec();
            v.sort_unstable();
            v.dedup();
            v
        }
        None => vec![2, 3, 4],
    };

    // Build the task list in canonical order, run in parallel, keep order.
    let mut tasks: Vec<(Check, u32, u32)> = Vec::new();
    for &check in &selected {
        if check == Check::Prir {
            continue;
        }
        for &d in &dims {
            let mut cap = default_n_cap(check, d);
            if let Some(m) = max_n {
                cap = cap.min(m);
            }
            for n in 3..=cap {
                let dim = (d as u128).saturating_pow(n);
                if dim <= max_dim_guard {
                    tasks.push((check, n, d));
                }
            }
        }
    }

    let mut records: Vec<VerifyRecord> = tasks
        .par_iter()
        .map(|&(check, n, d)| {
            let report = match check {
                Check::Spectrum => oracle::verify_spectrum(n, d),
                Check::Facts => oracle::verify_partial_trace_facts_seeded(n, d, seed),
                Check::Zeta => oracle::verify_zeta(n, d),
                Check::Fidelity => oracle::verify_fidelity(n, d),
                Check::Channel => oracle::verify_channel(n, d),
                Check::SdpEpr => oracle::verify_sdp_epr(n, d),
                Check::SdpOptimal => oracle::verify_sdp_optimal(n, d),
                Check::Prir => unreachable!(),
            }
            .unwrap_or_else(|e| failed_report(&format!("{check:?}"), &e.to_string()));
            VerifyRecord {
                n: Some(n),
                d: Some(d),
                report,
            }
        })
        .collect();

    if selected.contains(&Check::Prir) {
        let cap = max_n.unwrap_or(7).min(symrep::MAX_REP_BOXES);
        let mut mus: Vec<(u32, Partition)> = Vec::new();
        for n in 3..=cap {
            for mu in enumerate_partitions(n, n) {
                mus.push((n, mu));
            }
        }
        let prir_records: Vec<VerifyRecord> = mus
            .par_iter()
            .map(|(n, mu)| {
                let mut reports = vec![
                    symrep::verify_prir_sum_rule(mu),
                    symrep::verify_trace_class_invariance(mu),
                ];
                if *n <= 7 {
                    reports.push(symrep::verify_prir_orthogonality(mu));
                }
                reports
                    .into_iter()
                    .map(|r| VerifyRecord {
                        n: Some(*n),
                        d: None,
                        report: r.unwrap_or_else(|e| failed_report("prir", &e.to_string())),
                    })
                    .collect::<Vec<_>>()
            })
            .flatten()
            .collect();
        records.extend(prir_records);
    }

    if inject_failure {
        records.push(VerifyRecord {
            n: Some(3),
            d: Some(2),
            report: perturbed_spectrum_fixture(),
        });
    }

    let all_pass = records.iter().all(|r| r.report.pass);
    let failed = records.iter().filter(|r| !r.report.pass).count();

    let content = match format {
        VerifyFormat::Text => {
            let mut s = String::new();
            for r in &records {
                let status = if r.report.pass { "PASS" } else { "FAIL" };
                let point = match (r.n, r.d) {
                    (Some(n), Some(d)) => format!(" (n={n}, d={d})"),
                    (Some(n), None) => format!(" (n={n})"),
                    _ => String::new(),
                };
                s.push_str(&format!(
                    "{status} {}{point} max_dev={:e} tol={:e}\n",
                    r.report.name, r.report.max_dev, r.report.tol
                ));
            }
            s.push_str(&format!(
                "verification: {} checks, {failed} failed\n",
                records.len()
            ));
            s
        }
        VerifyFormat::Json => {
            let arr: Vec<serde_json::Value> = records
                .iter()
                .map(|r| {
                    json!({
                        "name": r.report.name,
                        "n": r.n,
                        "d": r.d,
                        "pass": r.report.pass,
                        "max_dev": r.report.max_dev,
                        "tol": r.report.tol,
                    })
                })
                .collect();
            let doc = json!({
                "checks": arr,
                "total": records.len(),
                "failed": failed,
                "pass": all_pass,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("serialize");
            s.push('\n');
            s
        }
    };
    emit(out, &content)?;
    Ok(all_pass)
}

fn failed_report(name: &str, msg: &str) -> OracleReport {
    let mut r = OracleReport::new(name, 0.0);
    r.add(format!("error: {msg}"), f64::INFINITY);
    r.finish()
}

/// Self-test fixture: perturb one eigenvalue of the exact spectrum table and
/// check the trace identity against it. The check must fail.
fn perturbed_spectrum_fixture() -> OracleReport {
    let mut report = OracleReport::new("spectrum_perturbed", 1e-8);
    let mut table = formulas::spectrum(3, 2);
    table.entries[0].gamma += BigRational::new(BigInt::from(1), BigInt::from(1000));
    let rel = (table.trace() / table.expected_trace() - BigRational::from(BigInt::from(1)))
        .to_f64()
        .unwrap_or(f64::NAN)
        .abs();
    report.add("perturbed trace identity".to_string(), rel);
    report.finish()
}
