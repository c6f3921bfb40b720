//! `stickbreak`: lex-merge traces, lemma verification, bound tables, the
//! small-n optimizer and the de Bruijn–Erdős sequence from the command line.
//!
//! Exit codes: 0 when everything passes, 1 for a failed check or a bug
//! signal, 2 for usage errors and malformed input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use lexmerge_core::baskets::modulus_for;
use lexmerge_core::export::{bounds_csv, format_sig, TraceFile, CSV_DIGITS};
use lexmerge_core::lexmerge::run;
use lexmerge_core::optimizer::{conjecture_report, OptimizeOptions, Verdict};
use lexmerge_core::strategies::{bounds_table, dbe_points, strategy_from_points, ub_dbe, BoundsOptions};
use lexmerge_core::verify::{verify_n, Check, CheckReport, Status};

use stickbreak::record::RunRecord;

#[derive(Parser)]
#[command(name = "stickbreak", version, about = "Exact lex-merge interval splitting toolkit")]
struct Cli {
    /// Write a JSON run record (command, parameters, payload, checksum) here.
    #[arg(long, global = true)]
    record: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run lex-merge and certify its discrepancy exactly.
    Lexmerge {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        /// Print every collection.
        #[arg(long)]
        trace: bool,
        /// Write the exact trace as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the structural checkers over lex-merge traces or a JSON trace file.
    Verify(VerifyArgs),
    /// Tabulate the closed-form bounds as CSV.
    Bounds {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        from: u32,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        to: u32,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Add the optimizer value for rows up to the cap.
        #[arg(long)]
        with_optimal: bool,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Compute the optimal discrepancy by exhaustive search and compare it
    /// with the conjectured value.
    Optimize {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        /// Write a one-row CSV summary here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Points, gaps and discrepancy of the de Bruijn–Erdős sequence.
    Dbe {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        /// Also print the running discrepancy of every prefix.
        #[arg(long)]
        prefix_disc: bool,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..), conflicts_with = "trace")]
    from: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..), conflicts_with = "trace")]
    to: Option<u32>,
    /// Comma-separated check names (default: all).
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
    /// Audit a JSON trace file instead of running lex-merge.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizerArgs {
    /// Bisection tolerance on the discrepancy.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Worker threads for the schedule search.
    #[arg(long)]
    jobs: Option<usize>,
    /// Largest n the optimizer accepts.
    #[arg(long, default_value_t = 8)]
    cap: u32,
    /// Only consider strategies that always split a largest interval.
    #[arg(long)]
    require_split_largest: bool,
}

impl OptimizerArgs {
    fn options(&self) -> OptimizeOptions {
        OptimizeOptions {
            cap: self.cap,
            tol: self.tol,
            jobs: self.jobs,
            require_split_largest: self.require_split_largest,
        }
    }

    fn to_json(&self) -> Value {
        json!({"tol": self.tol, "cap": self.cap, "require_split_largest": self.require_split_largest})
    }
}

/// Outcome of a command: exit code plus the record payload.
struct Outcome {
    code: u8,
    parameters: Value,
    payload: Value,
}

const PASS: u8 = 0;
const FAIL: u8 = 1;
const USAGE: u8 = 2;

struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, result) = match cli.command {
        Command::Lexmerge { n, trace, json } => ("lexmerge", cmd_lexmerge(n, trace, json.as_deref())),
        Command::Verify(args) => ("verify", cmd_verify(&args)),
        Command::Bounds { from, to, csv, with_optimal, opt } => {
            ("bounds", cmd_bounds(from, to, csv.as_deref(), with_optimal, &opt))
        }
        Command::Optimize { n, csv, opt } => ("optimize", cmd_optimize(n, csv.as_deref(), &opt)),
        Command::Dbe { n, prefix_disc } => ("dbe", cmd_dbe(n, prefix_disc)),
    };
    match result {
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
        Ok(outcome) => {
            if let Some(path) = &cli.record {
                let record = RunRecord::new(name, outcome.parameters, outcome.payload);
                let text = serde_json::to_string_pretty(&record).expect("records serialize");
                if let Err(e) = fs::write(path, text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(USAGE);
                }
            }
            ExitCode::from(outcome.code)
        }
    }
}

fn sig(x: f64) -> String {
    format_sig(x, CSV_DIGITS)
}

fn cmd_lexmerge(n: u32, show_trace: bool, json_path: Option<&Path>) -> Result<Outcome, UsageError> {
    let trace = run(n)?;
    let m = modulus_for(n);
    println!("lex-merge n={n} m={m} stages={}", trace.collections.len());
    if show_trace {
        for c in &trace.collections {
            println!("B_{} = {c}", c.stage);
        }
    }
    let stage = trace.max_disc_stage();
    let certified = trace.disc_vs_target() == std::cmp::Ordering::Equal;
    println!(
        "disc(LM_{n}) = q^{} = 2^(1-1/{m}) = {}  (max at stage {stage}; exact equality {})",
        m - 1,
        sig(trace.disc_f64()),
        if certified { "certified" } else { "FAILED" }
    );
    let file = TraceFile::from_trace(&trace)?;
    if let Some(path) = json_path {
        fs::write(path, file.to_json()).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        println!("trace written to {}", path.display());
    }
    Ok(Outcome {
        code: if certified { PASS } else { FAIL },
        parameters: json!({"n": n, "trace": show_trace}),
        payload: serde_json::to_value(&file)?,
    })
}

fn parse_checks(names: &Option<Vec<String>>) -> Result<Vec<Check>, UsageError> {
    match names {
        None => Ok(Check::ALL.to_vec()),
        Some(names) => names
            .iter()
            .filter(|s| !s.trim().is_empty())
            .map(|s| Check::from_name(s).ok_or_else(|| UsageError(format!("unknown check `{s}`"))))
            .collect(),
    }
}

fn print_reports(reports: &[CheckReport]) -> u8 {
    for r in reports {
        println!("{r}");
    }
    let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
    let (pass, vacuous, fail) = (count(Status::Pass), count(Status::Vacuous), count(Status::Fail));
    println!("{} reports: {pass} pass, {vacuous} vacuous, {fail} fail", reports.len());
    if fail == 0 {
        PASS
    } else {
        FAIL
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<Outcome, UsageError> {
    let checks = parse_checks(&args.checks)?;
    let names: Vec<&str> = checks.iter().map(|c| c.name()).collect();
    if let Some(path) = &args.trace {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let file = TraceFile::from_json(&text)?;
        let reports = file.audit(&checks)?;
        let code = print_reports(&reports);
        return Ok(Outcome {
            code,
            parameters: json!({"trace": path.display().to_string(), "checks": names}),
            payload: serde_json::to_value(&reports)?,
        });
    }
    let from = args.from.unwrap_or(1);
    let to = args.to.unwrap_or(from);
    if from > to {
        return Err(UsageError(format!("--from {from} exceeds --to {to}")));
    }
    let reports: Vec<CheckReport> = (from..=to).flat_map(|n| verify_n(n, &checks)).collect();
    let code = print_reports(&reports);
    Ok(Outcome {
        code,
        parameters: json!({"from": from, "to": to, "checks": names}),
        payload: serde_json::to_value(&reports)?,
    })
}

fn cmd_bounds(
    from: u32,
    to: u32,
    csv: Option<&Path>,
    with_optimal: bool,
    opt: &OptimizerArgs,
) -> Result<Outcome, UsageError> {
    if from > to {
        return Err(UsageError(format!("--from {from} exceeds --to {to}")));
    }
    let opts = BoundsOptions { include_optimal: with_optimal, optimizer: opt.options() };
    let rows = bounds_table(from, to, &opts)?;
    let text = bounds_csv(&rows, with_optimal);
    match csv {
        Some(path) => fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{text}"),
    }
    let mut code = PASS;
    for row in &rows {
        for v in row.violations() {
            eprintln!("row n={}: {v}", row.n);
            code = FAIL;
        }
    }
    let mut parameters = json!({"from": from, "to": to, "with_optimal": with_optimal});
    if with_optimal {
        parameters["optimizer"] = opt.to_json();
    }
    Ok(Outcome { code, parameters, payload: serde_json::to_value(&rows)? })
}

fn cmd_optimize(n: u32, csv: Option<&Path>, opt: &OptimizerArgs) -> Result<Outcome, UsageError> {
    let report = conjecture_report(n, &opt.options())?;
    let r = &report.result;
    println!("n = {n}");
    println!("optimal discrepancy   {}", sig(report.value));
    let lower = r.bracket.lower.as_ref().map_or("-".to_string(), |l| sig(rat(l)));
    println!("certified bracket     ({lower}, {}]", sig(rat(&r.bracket.upper)));
    println!("lower bound           {}", sig(report.lower_bound));
    println!("conjectured value     {}", sig(report.conjectured));
    println!("schedules examined    {}", r.schedules_examined);
    println!("best schedule         {:?}", r.schedule.choices());
    let leaves: Vec<String> = r.witness.leaf_lengths.iter().map(|x| sig(rat(x))).collect();
    println!("witness leaves        [{}]", leaves.join(", "));
    println!(
        "witness splits        largest: {}, pieces at most the minimum: {}",
        r.witness.split_property.splits_largest, r.witness.split_property.pieces_at_most_min
    );
    let verdict = match report.verdict {
        Verdict::Consistent => "consistent",
        Verdict::BelowConjecture => "below_conjecture",
        Verdict::ViolatesLowerBound => "violates_lower_bound",
        Verdict::ExceedsLexMerge => "exceeds_lexmerge",
    };
    println!("verdict               {verdict}");
    if report.verdict == Verdict::BelowConjecture {
        println!("*** FINDING: the optimum is below the conjectured value 2^(1-1/ceil(n/2)) ***");
    }
    if report.verdict.is_bug() {
        eprintln!("internal error: the optimizer value contradicts a proven bound");
    }
    if let Some(path) = csv {
        let text = format!(
            "n,optimal,lower_bound,conjectured,matches_conjecture,verdict\n{n},{},{},{},{},{verdict}\n",
            sig(report.value),
            sig(report.lower_bound),
            sig(report.conjectured),
            report.matches_conjecture
        );
        fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(Outcome {
        code: if report.verdict.is_bug() { FAIL } else { PASS },
        parameters: json!({"n": n, "optimizer": opt.to_json()}),
        payload: serde_json::to_value(&report)?,
    })
}

fn rat(x: &lexmerge_core::Rational) -> f64 {
    lexmerge_core::scalar::Length::to_f64(x)
}

fn cmd_dbe(n: u32, prefix_disc: bool) -> Result<Outcome, UsageError> {
    let points = dbe_points::<f64>(n);
    let strategy = match strategy_from_points(&points) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("dBE strategy invalid: {e}");
            return Ok(Outcome { code: FAIL, parameters: json!({"n": n}), payload: json!({"error": e.to_string()}) });
        }
    };
    println!("points:");
    for (k, p) in points.points().iter().enumerate() {
        println!("  x_{} = {}", k + 1, sig(*p));
    }
    let gaps = strategy.partition(n as usize).expect("last stage");
    let gap_text: Vec<String> = gaps.iter().map(|g| sig(*g)).collect();
    println!("gaps: [{}]", gap_text.join(", "));
    let disc = strategy.disc_of();
    let bound: f64 = ub_dbe(n);
    println!("disc = {}   ub_dbe({n}) = {}", sig(disc), sig(bound));
    let prefixes = strategy.prefix_discs();
    if prefix_disc {
        println!("t,disc_prefix,ub_dbe");
        for (t, d) in prefixes.iter().enumerate() {
            println!("{},{},{}", t + 1, sig(*d), sig(ub_dbe::<f64>(t as u32 + 1)));
        }
    }
    let below_two = prefixes.iter().all(|&d| d < 2.0);
    if !below_two {
        println!("some prefix discrepancy reaches 2");
    }
    Ok(Outcome {
        code: if below_two { PASS } else { FAIL },
        parameters: json!({"n": n, "prefix_disc": prefix_disc}),
        payload: json!({"points": points.points(), "gaps": gaps, "disc": disc, "ub_dbe": bound, "prefix_discs": prefixes}),
    })
}
