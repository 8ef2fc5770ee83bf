//! The `dmaxsat` command line.
//!
//! Exit codes: 0 success (and "yes" for `dmax`), 1 a "no" answer from `dmax`
//! or a failed selftest, 2 parse/range/usage errors, 3 an enumeration limit.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::circuit::{parse_circuit, print_circuit};
use crate::count::{count_bruteforce_with_limit, count_fast, threshold_check, Count};
use crate::dimacs::parse_dimacs;
use crate::error::Error;
use crate::formula::Formula;
use crate::gadgets::{less_than_const, pack_many, pack_pair, psi_gadget};
use crate::reduction::{combine_equalities, eq_to_geq, EqualityQuery};
use crate::selftest::{self, Mutation};
use crate::solver::{
    dmax_decide_with_limit, dmax_pruned_with_limit, max_count_with_limit, parse_blocks, Witness,
};

#[derive(Debug, Parser)]
#[command(name = "dmaxsat", version, about = "Model counting gadgets, count-query reductions and MAX#SAT")]
struct Cli {
    /// Write a JSON run report (inputs digest, outputs, audit, wall time).
    #[arg(long, global = true)]
    report: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Circuit,
    Dimacs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CountEngine {
    Brute,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveEngine {
    Plain,
    Pruned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MutationArg {
    PackPair,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the model count of a formula.
    Count {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "fast")]
        engine: CountEngine,
        /// Print yes/no for "count >= BOUND" instead of the count.
        #[arg(long)]
        bound: Option<Count>,
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        /// Enumeration limit of the brute-force engine.
        #[arg(long, default_value_t = crate::count::DEFAULT_ENUMERATION_LIMIT)]
        limit: usize,
    },
    /// Print the number of Boolean operators of a formula.
    Size {
        path: PathBuf,
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
    },
    /// Pack operand counts into base-2^(n+1) digits of one formula.
    Pack {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Pack exactly two operands of arbitrary scopes with the pair gadget.
        #[arg(long)]
        pair: bool,
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a formula over N variables with exactly C models.
    Mkless {
        n: u32,
        c: Count,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the psi gadget of a formula.
    Psi {
        path: PathBuf,
        #[arg(long)]
        delta: Count,
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn the claim "#F = Y" into a threshold query "#G >= B".
    Eq2geq {
        path: PathBuf,
        y: Count,
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Collapse claims PATH:COUNT into one threshold query.
    Combine {
        #[arg(required = true)]
        queries: Vec<String>,
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether some chooser assignment leaves at least BOUND models.
    Dmax {
        path: PathBuf,
        /// Block declaration, e.g. "x: 1 3 / y: 2 4 5".
        blocks: String,
        #[arg(long)]
        bound: Count,
        #[arg(long, value_enum, default_value = "pruned")]
        engine: SolveEngine,
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        #[arg(long, default_value_t = crate::solver::DEFAULT_CHOOSER_LIMIT)]
        limit: usize,
    },
    /// Find the chooser assignment with the most counted models.
    Maxcount {
        path: PathBuf,
        blocks: String,
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        #[arg(long, default_value_t = crate::solver::DEFAULT_CHOOSER_LIMIT)]
        limit: usize,
    },
    /// Run the randomized property suites against the brute-force oracle.
    Selftest {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Maximum number of cases per suite.
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        #[arg(long, value_enum, hide = true)]
        mutate: Option<MutationArg>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Count { .. } => "count",
            Command::Size { .. } => "size",
            Command::Pack { .. } => "pack",
            Command::Mkless { .. } => "mkless",
            Command::Psi { .. } => "psi",
            Command::Eq2geq { .. } => "eq2geq",
            Command::Combine { .. } => "combine",
            Command::Dmax { .. } => "dmax",
            Command::Maxcount { .. } => "maxcount",
            Command::Selftest { .. } => "selftest",
        }
    }
}

#[derive(Debug, Serialize)]
struct RunReport {
    subcommand: &'static str,
    inputs_digest: String,
    outputs: Vec<String>,
    audit: Vec<Value>,
    wall_time_ms: f64,
}

#[derive(Debug)]
enum Failure {
    Input(Error),
    Message(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(Error::LimitExceeded { .. }) => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(e) => write!(f, "{e}"),
            Failure::Message(e) => f.write_str(e),
        }
    }
}

/// Accumulates stdout, audit records and the inputs digest of one run.
struct Session {
    stdout: String,
    audit: Vec<Value>,
    digest: Sha256,
}

impl Session {
    fn line(&mut self, text: impl AsRef<str>) {
        self.stdout.push_str(text.as_ref());
        self.stdout.push('\n');
    }

    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Message(format!("{}: {e}", path.display())))?;
        self.digest.update(path.to_string_lossy().as_bytes());
        self.digest.update([0]);
        self.digest.update(text.as_bytes());
        Ok(text)
    }

    fn formula(&mut self, path: &Path, format: Option<InputFormat>) -> Result<Formula, Failure> {
        let text = self.read(path)?;
        let format = format.unwrap_or_else(|| {
            if path.extension().is_some_and(|e| e == "cnf") {
                InputFormat::Dimacs
            } else {
                InputFormat::Circuit
            }
        });
        let parsed = match format {
            InputFormat::Circuit => parse_circuit(&text),
            InputFormat::Dimacs => parse_dimacs(&text),
        };
        parsed.map_err(|e| match e {
            Error::Syntax { .. } | Error::Dimacs { .. } => {
                Failure::Message(format!("{}: {e}", path.display()))
            }
            other => Failure::Input(other),
        })
    }

    /// Writes the formula to `out`, or to stdout after `;`-prefixed audit
    /// lines so that stdout remains a valid circuit file.
    fn emit(&mut self, formula: &Formula, audit: Vec<Value>, out: Option<&Path>) -> Result<(), Failure> {
        match out {
            Some(path) => {
                std::fs::write(path, print_circuit(formula))
                    .map_err(|e| Failure::Message(format!("{}: {e}", path.display())))?;
                for record in &audit {
                    self.line(record.to_string());
                }
            }
            None => {
                for record in &audit {
                    self.line(format!("; {record}"));
                }
                self.stdout.push_str(&print_circuit(formula));
            }
        }
        self.audit.extend(audit);
        Ok(())
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
            } else {
                let _ = out.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let start = Instant::now();
    let mut session = Session {
        stdout: String::new(),
        audit: Vec::new(),
        digest: Sha256::new(),
    };
    session.digest.update(format!("{:?}", cli.command).as_bytes());
    let name = cli.command.name();
    let result = execute(cli.command, &mut session);
    let _ = out.write_all(session.stdout.as_bytes());
    let code = match result {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {failure}");
            failure.exit_code()
        }
    };
    if let Some(path) = cli.report {
        let report = RunReport {
            subcommand: name,
            inputs_digest: hex::encode(session.digest.finalize()),
            outputs: session.stdout.lines().map(str::to_owned).collect(),
            audit: session.audit,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Err(e) = std::fs::write(&path, text) {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            return 2;
        }
    }
    code
}

fn execute(command: Command, s: &mut Session) -> Result<i32, Failure> {
    match command {
        Command::Count {
            path,
            engine,
            bound,
            format,
            limit,
        } => {
            let f = s.formula(&path, format)?;
            match (engine, bound) {
                (CountEngine::Fast, None) => s.line(count_fast(&f).to_string()),
                (CountEngine::Fast, Some(b)) => {
                    s.line(if threshold_check(&f, &b) { "yes" } else { "no" })
                }
                (CountEngine::Brute, bound) => {
                    let c = count_bruteforce_with_limit(&f, limit)?;
                    match bound {
                        None => s.line(c.to_string()),
                        Some(b) => s.line(if c >= b { "yes" } else { "no" }),
                    }
                }
            }
            Ok(0)
        }
        Command::Size { path, format } => {
            let f = s.formula(&path, format)?;
            s.line(f.size().to_string());
            Ok(0)
        }
        Command::Pack {
            paths,
            pair,
            format,
            out,
        } => {
            let fs = paths
                .iter()
                .map(|p| s.formula(p, format))
                .collect::<Result<Vec<_>, _>>()?;
            let (formula, audit) = if pair {
                let [f, g] = fs.as_slice() else {
                    return Err(Error::Usage("--pair takes exactly two operands".into()).into());
                };
                let p = pack_pair(f, g);
                let audit = json!({
                    "step": "pack_pair",
                    "m": f.scope(),
                    "n": g.scope(),
                    "scope": p.scope(),
                    "size": p.size(),
                });
                (p, audit)
            } else {
                let packed = pack_many(&fs)?;
                let audit = json!({
                    "step": "pack",
                    "digit_width": packed.digit_width,
                    "digit_count": packed.digit_count,
                    "scope": packed.total_scope(),
                    "size": packed.formula.size(),
                });
                (packed.formula, audit)
            };
            s.emit(&formula, vec![audit], out.as_deref())?;
            Ok(0)
        }
        Command::Mkless { n, c, out } => {
            let m = less_than_const(n, &c)?;
            let audit = json!({
                "step": "less_than_const",
                "n": n,
                "c": c.to_string(),
                "size": m.size(),
            });
            s.emit(&m, vec![audit], out.as_deref())?;
            Ok(0)
        }
        Command::Psi {
            path,
            delta,
            format,
            out,
        } => {
            let f = s.formula(&path, format)?;
            let g = psi_gadget(&f, &delta)?;
            let audit = json!({
                "step": "psi",
                "n": f.scope(),
                "delta": delta.to_string(),
                "scope": g.scope(),
                "size": g.size(),
            });
            s.emit(&g, vec![audit], out.as_deref())?;
            Ok(0)
        }
        Command::Eq2geq {
            path,
            y,
            format,
            out,
        } => {
            let h = s.formula(&path, format)?;
            let r = eq_to_geq(&h, &y)?;
            s.emit(&r.query.formula, vec![r.audit()], out.as_deref())?;
            emit_bound(s, &r.query.bound, out.is_some());
            Ok(0)
        }
        Command::Combine {
            queries,
            format,
            out,
        } => {
            let mut qs = Vec::new();
            for q in &queries {
                let (path, claim) = q
                    .rsplit_once(':')
                    .ok_or_else(|| Error::Usage(format!("expected PATH:COUNT, got '{q}'")))?;
                let claimed: Count = claim
                    .parse()
                    .map_err(|_| Error::Usage(format!("invalid claimed count '{claim}'")))?;
                let f = s.formula(Path::new(path), format)?;
                qs.push(EqualityQuery::new(f, claimed)?);
            }
            let combined = combine_equalities(&qs)?;
            s.emit(&combined.query().formula, combined.audit(), out.as_deref())?;
            emit_bound(s, &combined.query().bound, out.is_some());
            Ok(0)
        }
        Command::Dmax {
            path,
            blocks,
            bound,
            engine,
            format,
            limit,
        } => {
            let f = s.formula(&path, format)?;
            let inst = parse_blocks(f, &blocks)?.with_bound(bound)?;
            let found = match engine {
                SolveEngine::Plain => dmax_decide_with_limit(&inst, limit)?,
                SolveEngine::Pruned => dmax_pruned_with_limit(&inst, limit)?,
            };
            match found {
                Some(w) => {
                    s.line(witness_line("yes ", &w));
                    Ok(0)
                }
                None => {
                    s.line("no");
                    Ok(1)
                }
            }
        }
        Command::Maxcount {
            path,
            blocks,
            format,
            limit,
        } => {
            let f = s.formula(&path, format)?;
            let inst = parse_blocks(f, &blocks)?;
            let w = max_count_with_limit(&inst, limit)?;
            s.line(witness_line("", &w));
            Ok(0)
        }
        Command::Selftest {
            seed,
            budget,
            mutate,
        } => {
            let config = selftest::Config {
                seed,
                budget,
                mutation: mutate.map(|MutationArg::PackPair| Mutation::PackPair),
            };
            let reports = selftest::run(&config);
            let mut failed = false;
            for r in &reports {
                let status = if r.passed() { "pass" } else { "FAIL" };
                s.line(format!("{status} {:<14} {} cases", r.name, r.cases));
                if let Some(cx) = &r.failure {
                    failed = true;
                    for line in cx.to_string().lines() {
                        s.line(format!("    {line}"));
                    }
                }
            }
            let total: usize = reports.iter().map(|r| r.cases).sum();
            s.line(format!(
                "{} ({} suites, {total} cases, seed {seed})",
                if failed { "FAILED" } else { "ok" },
                reports.len()
            ));
            Ok(i32::from(failed))
        }
    }
}

fn witness_line(prefix: &str, w: &Witness) -> String {
    if w.values.is_empty() {
        format!("{prefix}count={}", w.achieved)
    } else {
        format!("{prefix}{w} count={}", w.achieved)
    }
}

fn emit_bound(s: &mut Session, bound: &Count, plain: bool) {
    if plain {
        s.line(format!("bound {bound}"));
    } else {
        s.line(format!("; bound {bound}"));
    }
}
