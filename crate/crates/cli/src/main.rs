//! `ptawit`: reachability, witness minimization and subsystem verification
//! for probabilistic timed automata.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ptawit::minwit::{self, MinimizationReport, MinwitError, Notion, Options};
use ptawit::model::{pta_volume, Direction, Pta, Strength};
use ptawit::numeric::Rational;
use ptawit::parser::{parse, serialize_witness};
use ptawit::quotient::{build_quotient, QuotientMdp};
use ptawit::reach::{reach_prob, verify_subsystem, ReachError};

const DECIMAL_DIGITS: usize = 6;

#[derive(Debug, Parser)]
#[command(name = "ptawit", version, about = "Minimal witnessing subsystems for probabilistic timed automata")]
struct Cli {
    /// Worker threads for the parallel volume and decoding fan-out.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print a JSON report instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the exact reachability probability of goal.
    Check {
        model: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compute a minimal witnessing subsystem for `Pr^dir >= lambda`.
    Witness {
        model: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_lambda)]
        lambda: Rational,
        #[arg(long, value_enum, default_value_t = NotionArg::Loc)]
        notion: NotionArg,
        /// Enumerate every co-optimal location set (loc only).
        #[arg(long)]
        enumerate: bool,
        /// Use the quotient-sum heuristic with this many LP iterations instead of the MILP.
        #[arg(long)]
        iterations: Option<usize>,
        /// Directory receiving the witness `.pta` files.
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check that a subsystem file witnesses `Pr^dir >= lambda` for the model.
    Verify {
        model: PathBuf,
        witness: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_lambda)]
        lambda: Rational,
    },
    /// Build the region quotient and optionally export it as DOT.
    Quotient {
        model: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Clamp constant override.
        #[arg(long)]
        k: Option<i64>,
    },
    /// Print the total invariant volume of the model.
    Volume { model: PathBuf },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_enum)]
    dir: DirArg,
    /// Clamp constant override.
    #[arg(long)]
    k: Option<i64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirArg {
    Min,
    Max,
}

impl From<DirArg> for Direction {
    fn from(d: DirArg) -> Self {
        match d {
            DirArg::Min => Direction::Min,
            DirArg::Max => Direction::Max,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NotionArg {
    Loc,
    Inv,
    Vol,
}

impl From<NotionArg> for Notion {
    fn from(n: NotionArg) -> Self {
        match n {
            NotionArg::Loc => Notion::Loc,
            NotionArg::Inv => Notion::Inv,
            NotionArg::Vol => Notion::Vol,
        }
    }
}

fn parse_lambda(s: &str) -> Result<Rational, String> {
    let r: Rational = s.parse().map_err(|e| format!("{e}"))?;
    if r.is_negative() || r > Rational::one() {
        return Err(format!("lambda must lie in [0, 1], got {r}"));
    }
    Ok(r)
}

/// A failed run: message plus process exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<ReachError> for Failure {
    fn from(e: ReachError) -> Self {
        let code = match e {
            ReachError::AssumptionViolated(_) => 3,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<MinwitError> for Failure {
    fn from(e: MinwitError) -> Self {
        let code = match &e {
            MinwitError::Infeasible(_) => 2,
            MinwitError::AssumptionViolated(_) | MinwitError::Reach(ReachError::AssumptionViolated(_)) => 3,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn show(r: &Rational) -> String {
    if r.is_integer() {
        format!("{r}")
    } else {
        format!("{r} (= {})", r.to_decimal_string(DECIMAL_DIGITS))
    }
}

/// Integers without the `/1` denominator.
fn plain(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        r.to_string()
    }
}

fn load(path: &Path) -> Result<Pta, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn quotient(t: &Pta, k: Option<i64>) -> Result<QuotientMdp, Failure> {
    let k = k.unwrap_or_else(|| t.clamp());
    build_quotient(t, k).map_err(|e| Failure::usage(e.to_string()))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

#[derive(Serialize)]
struct CheckReport {
    direction: Direction,
    probability: Rational,
    decimal: String,
}

#[derive(Serialize)]
struct VerifyReport {
    direction: Direction,
    lambda: Rational,
    strength: Strength,
    passed: bool,
    probability: Option<Rational>,
    reason: Option<String>,
}

#[derive(Serialize)]
struct WitnessOutput<'a> {
    #[serde(flatten)]
    report: &'a MinimizationReport,
    files: Vec<PathBuf>,
}

fn cmd_check(model: &Path, common: &Common, as_json: bool) -> Result<String, Failure> {
    let t = load(model)?;
    let m = quotient(&t, common.k)?;
    let dir = common.dir.into();
    let p = reach_prob(&m, dir)?.values[m.initial].clone();
    Ok(if as_json {
        json(&CheckReport { direction: dir, decimal: p.to_decimal_string(DECIMAL_DIGITS), probability: p })
    } else {
        show(&p)
    })
}

fn witness_file_name(model: &Path, dir: Direction, notion: Notion, i: usize) -> String {
    let stem = model.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
    format!("{stem}-{dir}-{notion}-{i}.pta")
}

fn optimum_line(r: &MinimizationReport) -> String {
    match r.notion {
        Notion::Loc => {
            let sets: Vec<String> = r.witnesses.iter().map(|c| c.locations.join(",")).collect();
            let word = if r.optimum.is_one() { "location" } else { "locations" };
            format!("optimum {} {word}: {}", plain(&r.optimum), sets.join(" | "))
        }
        Notion::Inv => format!("optimum invariant weight {}", plain(&r.optimum)),
        Notion::Vol => format!("optimum volume {}", plain(&r.optimum)),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_witness(
    model: &Path,
    common: &Common,
    lambda: &Rational,
    notion: Notion,
    enumerate: bool,
    iterations: Option<usize>,
    out: &Path,
    report_path: Option<&Path>,
    as_json: bool,
) -> Result<String, Failure> {
    let t = load(model)?;
    let m = quotient(&t, common.k)?;
    let dir: Direction = common.dir.into();
    let report = match iterations {
        Some(n) => {
            if notion != Notion::Loc {
                return Err(Failure::usage("--iterations applies to --notion loc only"));
            }
            minwit::qs_heuristic(&t, &m, lambda, dir, n)?
        }
        None => minwit::minimize(&t, &m, lambda, dir, notion, Options { enumerate })?,
    };
    fs::create_dir_all(out).map_err(|e| Failure::usage(format!("{}: {e}", out.display())))?;
    let mut files = Vec::new();
    for (i, c) in report.witnesses.iter().enumerate() {
        let path = out.join(witness_file_name(model, dir, notion, i + 1));
        let header = format!(
            "# model: {}\n# notion: {notion}, lambda = {lambda}, objective = {}\n",
            model.display(),
            plain(&c.objective)
        );
        write(&path, &format!("{header}{}", serialize_witness(&c.witness)))?;
        files.push(path);
    }
    let text = if as_json {
        json(&WitnessOutput { report: &report, files: files.clone() })
    } else {
        let mut lines = vec![
            format!("Pr_{dir} = {}, lambda = {lambda}", show(&report.probability)),
            optimum_line(&report),
        ];
        for (c, f) in report.witnesses.iter().zip(&files) {
            let vol = c.volume.as_ref().map_or("unbounded".to_string(), plain);
            lines.push(format!(
                "witness {}: locations {}, Pr_{dir} = {}, volume {vol}",
                f.display(),
                c.locations.join(","),
                c.witness.verified_threshold
            ));
        }
        if notion == Notion::Vol {
            lines.push(format!("{} Pareto candidate(s) examined", report.candidates.len()));
        }
        lines.push(format!("elapsed {:.3}s", report.elapsed.as_secs_f64()));
        lines.join("\n")
    };
    if let Some(p) = report_path {
        write(p, &format!("{text}\n"))?;
    }
    Ok(text)
}

fn cmd_verify(
    model: &Path,
    witness: &Path,
    common: &Common,
    lambda: &Rational,
    as_json: bool,
) -> Result<(String, bool), Failure> {
    let t = load(model)?;
    let sub = load(witness)?;
    let dir: Direction = common.dir.into();
    let strength = Strength::for_direction(dir);
    let v = verify_subsystem(&t, &sub, dir, lambda)?;
    let reason = match (&v.structural, &v.probability) {
        (Err(e), _) => Some(format!("not a {strength} subsystem: {e}")),
        (Ok(()), Some(p)) if p < lambda => Some(format!("Pr_{dir} = {p} < {lambda}")),
        _ => None,
    };
    let text = if as_json {
        json(&VerifyReport {
            direction: dir,
            lambda: lambda.clone(),
            strength,
            passed: v.passed,
            probability: v.probability.clone(),
            reason: reason.clone(),
        })
    } else if v.passed {
        format!("PASS ({strength} subsystem, Pr_{dir} = {})", v.probability.as_ref().expect("checked"))
    } else {
        format!("FAIL: {}", reason.unwrap_or_default())
    };
    Ok((text, v.passed))
}

fn cmd_quotient(model: &Path, dot: Option<&Path>, k: Option<i64>, as_json: bool) -> Result<String, Failure> {
    let t = load(model)?;
    let m = quotient(&t, k)?;
    if let Some(p) = dot {
        write(p, &m.to_dot())?;
    }
    let choices: usize = m.choices.iter().map(|c| c.len()).sum();
    Ok(if as_json {
        json(&serde_json::json!({ "k": m.k, "states": m.len(), "choices": choices }))
    } else {
        format!("{} states, {choices} choices (K = {})", m.len(), m.k)
    })
}

fn cmd_volume(model: &Path, as_json: bool) -> Result<String, Failure> {
    let t = load(model)?;
    let v = pta_volume(&t);
    Ok(match (as_json, &v) {
        (true, _) => json(&serde_json::json!({ "volume": v })),
        (false, Some(v)) => show(v),
        (false, None) => "unbounded".to_string(),
    })
}

fn run(cli: Cli) -> Result<(String, bool), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    let j = cli.json;
    let ok = |s: String| (s, true);
    match &cli.command {
        Command::Check { model, common } => cmd_check(model, common, j).map(ok),
        Command::Witness { model, common, lambda, notion, enumerate, iterations, out, report } => cmd_witness(
            model,
            common,
            lambda,
            (*notion).into(),
            *enumerate,
            *iterations,
            out,
            report.as_deref(),
            j,
        )
        .map(ok),
        Command::Verify { model, witness, common, lambda } => cmd_verify(model, witness, common, lambda, j),
        Command::Quotient { model, dot, k } => cmd_quotient(model, dot.as_deref(), *k, j).map(ok),
        Command::Volume { model } => cmd_volume(model, j).map(ok),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok((text, passed)) => {
            println!("{text}");
            // A failed verification is a negative answer, not an error.
            ExitCode::from(if passed { 0 } else { 4 })
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
