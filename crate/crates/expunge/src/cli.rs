//! Command-line front end: renders tables, builds and verifies
//! certificates, sweeps parameter ranges, and exports the stored catalog.
//!
//! Exit codes are shared by every subcommand: `0` success (or a verified
//! certificate), `1` search or verification failure, `2` invalid input,
//! `3` search budget exhausted.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::constructions::{certify_driver, critical_m2, m2_certify, m3_catalog};
use crate::error::{Error, Result};
use crate::render::{erased_view, tensor_view, to_csv, to_latex, to_text, vanishing_view};
use crate::rules::{replay_tables, verify_certificate, Certificate};
use crate::search::search_case;
use crate::tables::{
    build_tensor_table, build_vanishing_table, default_sequence, erase, is_unimaginative,
    validate_sequence, CaseParams, TwistVector,
};

// ─────────────────────────────────────────────────────────────────────────
// Argument types
// ─────────────────────────────────────────────────────────────────────────

/// Inclusive integer range accepted on the command line as `"4"` or
/// `"3..6"` (both endpoints included).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntRange {
    pub lo: i64,
    pub hi: i64,
}

impl IntRange {
    fn iter(self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

fn parse_range(text: &str) -> std::result::Result<IntRange, String> {
    let parse_end = |piece: &str| -> std::result::Result<i64, String> {
        piece
            .trim()
            .parse::<i64>()
            .map_err(|_| format!("`{piece}` is not an integer"))
    };
    let range = match text.split_once("..") {
        Some((lo, hi)) => IntRange {
            lo: parse_end(lo)?,
            hi: parse_end(hi)?,
        },
        None => {
            let v = parse_end(text)?;
            IntRange { lo: v, hi: v }
        }
    };
    if range.lo > range.hi {
        return Err(format!("empty range {}..{}", range.lo, range.hi));
    }
    Ok(range)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
    Latex,
}

// ─────────────────────────────────────────────────────────────────────────
// Command definitions
// ─────────────────────────────────────────────────────────────────────────

/// Top-level argument parser for the `expunge` binary.
#[derive(Parser, Debug)]
#[command(
    name = "expunge",
    version,
    about = "Vanishing tables, twists, and replayable row-elimination certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a vanishing table, a tensor table, or its erased form.
    Table(TableArgs),
    /// Build a certificate for one case and write it as JSON.
    Certify(CertifyArgs),
    /// Replay a certificate file and report whether it verifies.
    Verify(VerifyArgs),
    /// Run the drivers over a parameter range and print a CSV summary.
    Sweep(SweepArgs),
    /// List the built-in certificate catalog, optionally exporting JSON.
    Catalog(CatalogArgs),
}

#[derive(Args, Debug)]
struct TableArgs {
    /// Number of columns (the sequence length).
    #[arg(long)]
    g: i64,
    /// Largest sequence value.
    #[arg(long)]
    r: i64,
    /// Degree parameter fixing the complementary table entries.
    #[arg(long)]
    d: i64,
    /// Tensor power; omit to print the plain vanishing table.
    #[arg(long)]
    m: Option<i64>,
    /// Sequence entries, comma separated; defaults to value blocks
    /// followed by the 0..r cycle.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    delta: Option<Vec<i64>>,
    /// Twist vector (g − 1 entries, comma separated); with --m, prints
    /// the erased table.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    w: Option<Vec<i64>>,
    /// Validate the sequence with this occurrence surplus.
    #[arg(long, default_value_t = 0)]
    shift: i64,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Write the rendering to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long)]
    g: i64,
    #[arg(long)]
    r: i64,
    #[arg(long)]
    d: i64,
    /// Tensor power of the multiplication map.
    #[arg(long)]
    m: i64,
    /// Explicit sequence to certify (requires --w); routes to the
    /// searcher instead of the construction drivers.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    delta: Option<Vec<i64>>,
    /// Explicit twist vector (requires --delta).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    w: Option<Vec<i64>>,
    /// Validate the sequence with this occurrence surplus.
    #[arg(long, default_value_t = 0)]
    shift: i64,
    /// Wall-clock search budget in seconds.
    #[arg(long, default_value_t = 10.0)]
    budget: f64,
    /// Require Rule VI pairs to appear in both compared columns.
    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    strict_vi: bool,
    /// Accepted for symmetry with sweep; certificates are already
    /// byte-stable across runs and thread counts.
    #[arg(long)]
    deterministic: bool,
    /// Write the certificate JSON to this file (the summary then goes to
    /// stdout; without --out the JSON goes to stdout, the summary to
    /// stderr).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Certificate JSON file to replay.
    file: PathBuf,
    /// Require Rule VI pairs to appear in both compared columns.
    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    strict_vi: bool,
    /// Print one line per replayed step.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Tensor power to sweep; 2 and 3 are supported.
    #[arg(long)]
    m: i64,
    /// Rank range, e.g. `3..6` or `4`.
    #[arg(long, value_parser = parse_range)]
    r: IntRange,
    /// Genus range; defaults to every genus up to --g-max.
    #[arg(long, value_parser = parse_range)]
    g: Option<IntRange>,
    /// Upper genus bound used when --g is omitted.
    #[arg(long, default_value_t = 30)]
    g_max: i64,
    /// Run the cases across threads.
    #[arg(long)]
    parallel: bool,
    /// Zero the timing column so the summary is byte-stable.
    #[arg(long)]
    deterministic: bool,
    /// Per-case budget in seconds for searched fallbacks.
    #[arg(long, default_value_t = 10.0)]
    budget: f64,
    /// Write the CSV summary to this file (the aggregate line then goes
    /// to stdout; without --out the CSV goes to stdout, the aggregate to
    /// stderr).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CatalogArgs {
    /// Write each catalog certificate as JSON into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

// ─────────────────────────────────────────────────────────────────────────
// Entry point
// ─────────────────────────────────────────────────────────────────────────

/// Parse `args` (argv style, program name first) and run one command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Table(args) => cmd_table(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Catalog(args) => cmd_catalog(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

/// Exit code for an error that escaped a subcommand: search failures are
/// `1`, a blown budget is `3`, and everything else is invalid input, `2`.
fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NotFound(_) => 1,
        Error::BudgetExhausted { .. } => 3,
        _ => 2,
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn budget_duration(seconds: f64) -> Result<Duration> {
    if !seconds.is_finite() || seconds <= 0.0 {
        return Err(Error::OutOfScope(format!(
            "budget must be a positive number of seconds, got {seconds}"
        )));
    }
    Ok(Duration::from_secs_f64(seconds))
}

// ─────────────────────────────────────────────────────────────────────────
// table
// ─────────────────────────────────────────────────────────────────────────

fn cmd_table(args: &TableArgs) -> Result<i32> {
    if args.w.is_some() && args.m.is_none() {
        return Err(Error::OutOfScope(
            "--w needs --m: a twist vector erases the tensor table".into(),
        ));
    }
    if args.g < 1 || args.r < 1 {
        return Err(Error::OutOfScope(format!(
            "need g >= 1 and r >= 1, got g = {}, r = {}",
            args.g, args.r
        )));
    }
    let delta = match &args.delta {
        Some(entries) => entries.clone(),
        None => default_sequence(args.g, args.r, args.d, args.shift)?,
    };
    let seq = validate_sequence(&delta, args.g as usize, args.r, args.d, args.shift)?;
    let vtable = build_vanishing_table(&seq, args.d);
    let view = match (args.m, &args.w) {
        (None, _) => vanishing_view(&vtable),
        (Some(m), w) => {
            if m < 2 {
                return Err(Error::OutOfScope(format!("need m >= 2, got m = {m}")));
            }
            let ttable = build_tensor_table(&vtable, m);
            match w {
                None => tensor_view(&ttable, None)?,
                Some(w) => {
                    if w.len() + 1 != args.g as usize {
                        return Err(Error::LengthMismatch {
                            expected: args.g as usize - 1,
                            got: w.len(),
                        });
                    }
                    let twist = TwistVector::new(w.clone(), m * args.d);
                    let mask = erase(&ttable, w);
                    erased_view(&ttable, &mask, &twist, None)?
                }
            }
        }
    };
    let rendered = match args.format {
        OutputFormat::Text => to_text(&view),
        OutputFormat::Csv => to_csv(&view)?,
        OutputFormat::Latex => to_latex(&view),
    };
    emit(&rendered, args.out.as_deref())?;
    Ok(0)
}

// ─────────────────────────────────────────────────────────────────────────
// certify
// ─────────────────────────────────────────────────────────────────────────

fn cmd_certify(args: &CertifyArgs) -> Result<i32> {
    let budget = budget_duration(args.budget)?;
    let (cert, provenance) = match (&args.delta, &args.w) {
        (Some(delta), Some(w)) => {
            let case = CaseParams::new(args.g, args.r, args.d, args.m)?;
            let cert = search_case(case, delta, w, args.shift, budget, args.strict_vi)?;
            (cert, "search".to_string())
        }
        (None, None) => {
            let (cert, provenance) =
                certify_driver(args.g, args.r, args.d, args.m, budget, args.strict_vi)?;
            (cert, provenance.to_string())
        }
        _ => {
            return Err(Error::OutOfScope(
                "--delta and --w go together: pass both or neither".into(),
            ))
        }
    };

    let (ttable, mask) = replay_tables(&cert)?;
    let report = verify_certificate(&ttable, &mask, &cert, args.strict_vi);
    if !report.valid {
        return Err(Error::Format(format!(
            "internal: produced certificate failed verification: {}",
            report.failure.unwrap_or_default()
        )));
    }
    let summary = format!(
        "verified N={} steady={} unimaginative={} provenance={}",
        report.n,
        report.steady,
        is_unimaginative(&cert.w, cert.case.m),
        provenance
    );
    let json = cert.to_json()?;
    match &args.out {
        Some(path) => {
            fs::write(path, &json)?;
            println!("{summary}");
            println!("certificate: {}", path.display());
        }
        None => {
            print!("{json}");
            eprintln!("{summary}");
        }
    }
    Ok(0)
}

// ─────────────────────────────────────────────────────────────────────────
// verify
// ─────────────────────────────────────────────────────────────────────────

fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.file)?;
    let cert = Certificate::from_json(&text)?;
    let (ttable, mask) = replay_tables(&cert)?;
    let report = verify_certificate(&ttable, &mask, &cert, args.strict_vi);
    if args.verbose {
        for (index, step) in report.trace.iter().enumerate() {
            println!(
                "step {:>3} {} {} ({} remaining)",
                index + 1,
                if step.ok { "ok  " } else { "FAIL" },
                step.description,
                step.remaining_after
            );
        }
    }
    if report.valid {
        let case = cert.case;
        println!(
            "valid: N={} steady={} case=(g={}, r={}, d={}, m={})",
            report.n, report.steady, case.g, case.r, case.d, case.m
        );
        Ok(0)
    } else {
        println!(
            "invalid: {}",
            report.failure.unwrap_or_else(|| "unspecified failure".into())
        );
        Ok(1)
    }
}

// ─────────────────────────────────────────────────────────────────────────
// sweep
// ─────────────────────────────────────────────────────────────────────────

struct SweepRow {
    g: i64,
    r: i64,
    d: i64,
    m: i64,
    n: Option<usize>,
    provenance: String,
    status: &'static str,
    ms: u128,
}

fn status_of(err: &Error) -> &'static str {
    match err {
        Error::NotFound(_) => "not_found",
        Error::BudgetExhausted { .. } => "budget",
        Error::OutOfScope(_) => "out_of_scope",
        _ => "error",
    }
}

/// Genus base and largest supported occurrence count for the stored
/// `m = 3` catalogs: extensions keep the catalog prefix, so only cases at
/// least as large as the catalog case with no more required occurrences
/// are in range.
fn m3_extension_base(r: i64) -> Option<(i64, i64)> {
    match r {
        3 => Some((7, 1)),
        4 => Some((16, 3)),
        5 => Some((26, 4)),
        _ => None,
    }
}

/// Enumerate the `(g, r, d)` cases a sweep visits: every case of the
/// requested tensor power inside the driver's hypotheses, with
/// nonnegative Brill–Noether number.
fn sweep_cases(args: &SweepArgs) -> Result<Vec<(i64, i64, i64)>> {
    let mut cases = Vec::new();
    let g_range = |lo_default: i64| -> IntRange {
        args.g.unwrap_or(IntRange {
            lo: lo_default,
            hi: args.g_max,
        })
    };
    match args.m {
        2 => {
            for r in args.r.iter().filter(|&r| r >= 3) {
                for g in g_range(1).iter() {
                    for ell in 1..=g / (r + 1) {
                        cases.push((g, r, g + r - ell));
                    }
                }
            }
        }
        3 => {
            for r in args.r.iter() {
                let Some((g_base, ell_base)) = m3_extension_base(r) else {
                    continue;
                };
                for g in g_range(g_base).iter().filter(|&g| g >= g_base) {
                    for ell in 1..=ell_base {
                        if g - (r + 1) * ell >= 0 {
                            cases.push((g, r, g + r - ell));
                        }
                    }
                }
            }
        }
        other => {
            return Err(Error::OutOfScope(format!(
                "sweep supports m = 2 and m = 3, got m = {other}"
            )))
        }
    }
    Ok(cases)
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    let budget = budget_duration(args.budget)?;
    let cases = sweep_cases(args)?;
    let m = args.m;
    let run_case = |&(g, r, d): &(i64, i64, i64)| -> SweepRow {
        let start = Instant::now();
        let outcome = certify_driver(g, r, d, m, budget, true);
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok((cert, provenance)) => SweepRow {
                g,
                r,
                d,
                m,
                n: Some(cert.n()),
                provenance: provenance.to_string(),
                status: "verified",
                ms,
            },
            Err(err) => SweepRow {
                g,
                r,
                d,
                m,
                n: None,
                provenance: String::new(),
                status: status_of(&err),
                ms,
            },
        }
    };
    let rows: Vec<SweepRow> = if args.parallel {
        cases.par_iter().map(run_case).collect()
    } else {
        cases.iter().map(run_case).collect()
    };

    let mut summary = String::from("g,r,d,m,N,provenance,status,ms\n");
    for row in &rows {
        let ms = if args.deterministic { 0 } else { row.ms };
        writeln!(
            summary,
            "{},{},{},{},{},{},{},{}",
            row.g,
            row.r,
            row.d,
            row.m,
            row.n.map(|n| n.to_string()).unwrap_or_default(),
            row.provenance,
            row.status,
            ms
        )
        .expect("writing to a string cannot fail");
    }
    let verified = rows.iter().filter(|row| row.status == "verified").count();
    let failed = rows.len() - verified;
    let aggregate = format!("{} cases: {verified} verified, {failed} failed", rows.len());
    match &args.out {
        Some(path) => {
            fs::write(path, &summary)?;
            println!("{aggregate}");
        }
        None => {
            print!("{summary}");
            eprintln!("{aggregate}");
        }
    }
    if rows.iter().any(|row| row.status == "budget") {
        Ok(3)
    } else if failed > 0 {
        Ok(1)
    } else {
        Ok(0)
    }
}

// ─────────────────────────────────────────────────────────────────────────
// catalog
// ─────────────────────────────────────────────────────────────────────────

fn cmd_catalog(args: &CatalogArgs) -> Result<i32> {
    let entries = vec![
        m2_certify(4, 3, 6)?,
        m2_certify(5, 3, 7)?,
        critical_m2(4)?,
        m3_catalog(3)?,
        m3_catalog(4)?,
        m3_catalog(5)?,
    ];
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
    }
    println!(
        "{:>4} {:>4} {:>4} {:>4} {:>5}  {}",
        "g", "r", "d", "m", "N", "provenance"
    );
    for result in &entries {
        let case = result.case;
        println!(
            "{:>4} {:>4} {:>4} {:>4} {:>5}  {}",
            case.g, case.r, case.d, case.m, result.n, result.provenance
        );
        if let Some(dir) = &args.out {
            let cert = result.certificate.as_ref().ok_or_else(|| {
                Error::Format(format!("{} produced no certificate", result.provenance))
            })?;
            let path = dir.join(format!(
                "cert_g{}_r{}_d{}_m{}.json",
                case.g, case.r, case.d, case.m
            ));
            fs::write(path, cert.to_json()?)?;
        }
    }
    Ok(0)
}

// ─────────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> i32 {
        run(std::iter::once("expunge").chain(args.iter().copied()))
    }

    #[test]
    fn ranges_parse_both_forms() {
        assert_eq!(parse_range("4").unwrap(), IntRange { lo: 4, hi: 4 });
        assert_eq!(parse_range("3..6").unwrap(), IntRange { lo: 3, hi: 6 });
        assert!(parse_range("6..3").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn default_sequence_is_valid_and_blocky() {
        let delta = default_sequence(10, 4, 12, 0).unwrap();
        assert_eq!(delta, vec![0, 0, 1, 1, 2, 2, 3, 3, 4, 4]);
        validate_sequence(&delta, 10, 4, 12, 0).unwrap();
        let padded = default_sequence(7, 3, 9, 0).unwrap();
        assert_eq!(padded, vec![0, 1, 2, 3, 0, 1, 2]);
        validate_sequence(&padded, 7, 3, 9, 0).unwrap();
    }

    #[test]
    fn default_sequence_rejects_negative_rho() {
        assert!(matches!(
            default_sequence(4, 3, 5, 0),
            Err(Error::OutOfScope(_))
        ));
    }

    #[test]
    fn exit_codes_map_error_classes() {
        assert_eq!(exit_code(&Error::NotFound("x".into())), 1);
        assert_eq!(exit_code(&Error::BudgetExhausted { visited: 3 }), 3);
        assert_eq!(exit_code(&Error::OutOfScope("x".into())), 2);
        assert_eq!(
            exit_code(&Error::LengthMismatch {
                expected: 3,
                got: 2
            }),
            2
        );
    }

    #[test]
    fn sweep_domain_m2_stays_in_hypotheses() {
        let args = SweepArgs {
            m: 2,
            r: IntRange { lo: 3, hi: 4 },
            g: None,
            g_max: 12,
            parallel: false,
            deterministic: true,
            budget: 10.0,
            out: None,
        };
        let cases = sweep_cases(&args).unwrap();
        assert!(cases.contains(&(4, 3, 6)));
        assert!(cases.contains(&(10, 4, 12)));
        for &(g, r, d) in &cases {
            let ell = r + g - d;
            assert!(ell >= 1, "surjective-or-critical cases only");
            assert!(g - (r + 1) * ell >= 0, "nonnegative rho for ({g}, {r}, {d})");
        }
    }

    #[test]
    fn sweep_domain_m3_extends_the_catalogs() {
        let args = SweepArgs {
            m: 3,
            r: IntRange { lo: 3, hi: 6 },
            g: None,
            g_max: 28,
            parallel: false,
            deterministic: true,
            budget: 10.0,
            out: None,
        };
        let cases = sweep_cases(&args).unwrap();
        // r = 3 visits exactly d = g + 2 for g in 7..=28.
        let r3: Vec<_> = cases.iter().filter(|c| c.1 == 3).collect();
        assert_eq!(r3.len(), 22);
        assert!(r3.iter().all(|&&(g, _, d)| d == g + 2 && (7..=28).contains(&g)));
        // No r = 6 cases: there is no stored catalog to extend.
        assert!(cases.iter().all(|c| c.1 != 6));
        assert!(cases.contains(&(26, 5, 27)));
    }

    #[test]
    fn sweep_empty_range_exits_zero() {
        let code = run_args(&["sweep", "--m", "3", "--r", "6", "--deterministic"]);
        assert_eq!(code, 0);
    }

    #[test]
    fn usage_errors_exit_two() {
        // --w without --m
        assert_eq!(
            run_args(&["table", "--g", "4", "--r", "3", "--d", "6", "--w", "2,6,8"]),
            2
        );
        // --delta without --w
        assert_eq!(
            run_args(&[
                "certify", "--g", "4", "--r", "3", "--d", "6", "--m", "2", "--delta", "0,1,2,3"
            ]),
            2
        );
        // unknown flag
        assert_eq!(run_args(&["table", "--nope"]), 2);
        // unsupported sweep power
        assert_eq!(run_args(&["sweep", "--m", "4", "--r", "3"]), 2);
    }

    #[test]
    fn help_and_version_exit_zero() {
        assert_eq!(run_args(&["--help"]), 0);
        assert_eq!(run_args(&["certify", "--help"]), 0);
        assert_eq!(run_args(&["--version"]), 0);
    }

    #[test]
    fn table_csv_writes_bare_grid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.csv");
        let code = run_args(&[
            "table", "--g", "4", "--r", "3", "--d", "6", "--m", "2", "--w", "2,6,8", "--format",
            "csv", "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 10, "one line per tensor row");
        assert!(lines.iter().all(|l| l.split(',').count() == 4));
        assert_eq!(lines[0], "0:12,·,·,·");
    }

    #[test]
    fn certify_writes_verifiable_certificate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cert.json");
        let code = run_args(&[
            "certify", "--g", "10", "--r", "4", "--d", "12", "--m", "2", "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let cert = Certificate::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(cert.n(), 15);
        assert_eq!(run_args(&["verify", path.to_str().unwrap()]), 0);
    }

    #[test]
    fn certify_searches_explicit_data() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cert.json");
        let code = run_args(&[
            "certify", "--g", "4", "--r", "3", "--d", "6", "--m", "2", "--delta", "0,1,2,3",
            "--w", "2,6,8", "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let cert = Certificate::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(cert.n(), 9);
    }

    #[test]
    fn certify_rejects_out_of_scope_cases() {
        // rho < 0 for (4, 3, 5): nothing in the drivers applies and no
        // default sequence exists.
        assert_eq!(
            run_args(&["certify", "--g", "4", "--r", "3", "--d", "5", "--m", "2"]),
            2
        );
    }

    #[test]
    fn verify_flags_missing_file_as_usage_error() {
        assert_eq!(run_args(&["verify", "/nonexistent/cert.json"]), 2);
    }

    #[test]
    fn catalog_lists_and_exports_all_six() {
        let dir = tempfile::tempdir().unwrap();
        let code = run_args(&["catalog", "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code, 0);
        let mut files: Vec<String> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        files.sort();
        assert_eq!(files.len(), 6);
        assert!(files.contains(&"cert_g10_r4_d12_m2.json".to_string()));
        assert!(files.contains(&"cert_g26_r5_d27_m3.json".to_string()));
        for file in files {
            let text = fs::read_to_string(dir.path().join(file)).unwrap();
            Certificate::from_json(&text).unwrap();
        }
    }

    #[test]
    fn sweep_summary_is_deterministic_and_green() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let args = [
            "sweep",
            "--m",
            "2",
            "--r",
            "3..4",
            "--g-max",
            "14",
            "--deterministic",
            "--out",
        ];
        let full: Vec<&str> = args
            .iter()
            .copied()
            .chain(std::iter::once(path.to_str().unwrap()))
            .collect();
        assert_eq!(run_args(&full), 0);
        let first = fs::read_to_string(&path).unwrap();
        assert_eq!(run_args(&full), 0);
        let second = fs::read_to_string(&path).unwrap();
        assert_eq!(first, second, "deterministic sweeps are byte-stable");
        let mut lines = first.lines();
        assert_eq!(
            lines.next(),
            Some("g,r,d,m,N,provenance,status,ms"),
            "header row"
        );
        assert!(first.lines().skip(1).all(|l| l.contains(",verified,")));
        assert!(first.contains("10,4,12,2,15,critical_m2,verified,0"));
    }

    #[test]
    fn sweep_m3_row_uses_catalog_provenance() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep3.csv");
        let code = run_args(&[
            "sweep",
            "--m",
            "3",
            "--r",
            "3",
            "--g",
            "7..9",
            "--deterministic",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("7,3,9,3,20,m3_catalog,verified,0"));
        assert!(text.contains("8,3,10,3,20,injective_extend,verified,0"));
        assert_eq!(text.lines().count(), 4, "header plus three cases");
    }
}
