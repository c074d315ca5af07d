//! Command-line front end: validate theory files, dump the augmented
//! taxonomy, answer explanation queries with optional traces and JSON
//! output, and run engine/oracle diffs.
//!
//! Exit codes: 0 success, 1 engine/oracle mismatch, 2 parse or
//! validation or query error, 3 inconsistent theory, 4 I/O error,
//! 5 oracle limit exceeded.

use std::collections::HashMap;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::engine::{self, ExplanationSet, SaturatedContext, StepRule};
use crate::model::Theory;
use crate::ontology::AtomIdx;
use crate::oracle::{self, OracleLimits, RandomTheoryParams};
use crate::parser;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIFF: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCONSISTENT: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_LIMIT: i32 = 5;

#[derive(Parser)]
#[command(
    name = "explika",
    version,
    about = "Derives tentative explanations from causal statements and an IS-A taxonomy"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a theory file and check its consistency.
    Check { path: PathBuf },
    /// Derive explanation statements from a theory file.
    Explain {
        path: PathBuf,
        /// Only explanations starting from this atom, e.g. `On(alarm)`.
        #[arg(long, value_name = "ATOM")]
        from: Option<String>,
        /// Only explanations of this atom.
        #[arg(long, value_name = "ATOM")]
        to: Option<String>,
        /// Machine-readable output document.
        #[arg(long)]
        json: bool,
        /// Append the derivation steps under each explanation.
        #[arg(long)]
        trace: bool,
        /// Keep dominated provisos: skip the minimal-proviso filter.
        #[arg(long)]
        raw: bool,
    },
    /// Print the augmented ontological links of a theory file.
    Ontology { path: PathBuf },
    /// Compare the engine against the brute-force oracle.
    #[command(name = "diff-oracle")]
    DiffOracle {
        path: Option<PathBuf>,
        /// Fuzz over COUNT seeded random theories starting at SEED.
        #[arg(long, num_args = 2, value_names = ["SEED", "COUNT"])]
        random: Option<Vec<u64>>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColorMode {
    Auto,
    Never,
    Always,
}

impl ColorMode {
    fn from_env() -> ColorMode {
        match std::env::var("EXPLIKA_COLOR").as_deref() {
            Ok("never") => ColorMode::Never,
            Ok("always") => ColorMode::Always,
            _ => ColorMode::Auto,
        }
    }

    fn stderr_enabled(self) -> bool {
        match self {
            ColorMode::Never => false,
            ColorMode::Always => true,
            ColorMode::Auto => std::io::stderr().is_terminal(),
        }
    }
}

fn report_error(msg: &str) {
    if ColorMode::from_env().stderr_enabled() {
        eprintln!("\x1b[31merror:\x1b[0m {msg}");
    } else {
        eprintln!("error: {msg}");
    }
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Check { path } => cmd_check(&path),
        Cmd::Explain {
            path,
            from,
            to,
            json,
            trace,
            raw,
        } => cmd_explain(&path, from.as_deref(), to.as_deref(), json, trace, raw),
        Cmd::Ontology { path } => cmd_ontology(&path),
        Cmd::DiffOracle { path, random } => cmd_diff_oracle(path.as_deref(), random),
    }
}

fn load_theory(path: &Path) -> Result<Theory, i32> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            report_error(&format!("{}: {e}", path.display()));
            return Err(EXIT_IO);
        }
    };
    match parser::parse_theory(&text) {
        Ok(t) => Ok(t),
        Err(e) => {
            report_error(&format!("{}:{e}", path.display()));
            Err(EXIT_INVALID)
        }
    }
}

fn cmd_check(path: &Path) -> i32 {
    let theory = match load_theory(path) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let onto = crate::ontology::build_ontology(&theory);
    let universe_size = onto.universe().len();
    match engine::saturate(&theory, onto) {
        Ok(ctx) => {
            println!(
                "ok: {} universe atoms, {} causal atoms active, background theory consistent",
                universe_size,
                ctx.active_causal_atoms().len()
            );
            EXIT_OK
        }
        Err(e) => {
            report_error(&e.to_string());
            EXIT_INCONSISTENT
        }
    }
}

fn cmd_ontology(path: &Path) -> i32 {
    let theory = match load_theory(path) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let onto = crate::ontology::build_ontology(&theory);
    if let Err(e) = engine::saturate(&theory, onto.clone()) {
        report_error(&e.to_string());
        return EXIT_INCONSISTENT;
    }
    for (a, b) in onto.links() {
        println!("{} => {}", onto.universe().text(a), onto.universe().text(b));
    }
    EXIT_OK
}

fn cmd_explain(
    path: &Path,
    from: Option<&str>,
    to: Option<&str>,
    json: bool,
    trace: bool,
    raw: bool,
) -> i32 {
    let theory = match load_theory(path) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let result = if raw {
        engine::derive_unminimized(&theory)
    } else {
        engine::derive_all(&theory)
    };
    let (ctx, set) = match result {
        Ok(pair) => pair,
        Err(e) => {
            report_error(&e.to_string());
            return EXIT_INCONSISTENT;
        }
    };

    let filter = |arg: Option<&str>| -> Result<Option<AtomIdx>, i32> {
        match arg {
            None => Ok(None),
            Some(text) => {
                let atom = parser::parse_atom(text, &theory).map_err(|e| {
                    report_error(&format!("in query atom `{text}`: {e}"));
                    EXIT_INVALID
                })?;
                match ctx.universe().lookup(&atom) {
                    Some(idx) => Ok(Some(idx)),
                    None => {
                        report_error(&format!(
                            "unknown atom `{}`: not in the grounding universe of this theory",
                            theory.atom_text(&atom)
                        ));
                        Err(EXIT_INVALID)
                    }
                }
            }
        }
    };
    let from_idx = match filter(from) {
        Ok(f) => f,
        Err(code) => return code,
    };
    let to_idx = match filter(to) {
        Ok(f) => f,
        Err(code) => return code,
    };

    let records: Vec<((AtomIdx, AtomIdx), &engine::Entry)> = set
        .iter()
        .filter(|((ans, dum), _)| {
            !from_idx.is_some_and(|f| f != *ans) && !to_idx.is_some_and(|t| t != *dum)
        })
        .collect();

    for diag in set.diagnostics() {
        report_error(diag);
    }

    if json {
        let doc = build_document(&theory, &ctx, &set, &records);
        println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        return EXIT_OK;
    }

    for &((ans, dum), entry) in &records {
        println!("{}", render_statement(&ctx, ans, dum, &entry.proviso));
        if trace {
            print_trace(&ctx, &set, entry.step);
        }
    }
    EXIT_OK
}

fn render_statement(
    ctx: &SaturatedContext,
    ans: AtomIdx,
    dum: AtomIdx,
    proviso: &std::collections::BTreeSet<AtomIdx>,
) -> String {
    let u = ctx.universe();
    let atoms: Vec<&str> = proviso.iter().map(|&i| u.text(i)).collect();
    format!(
        "{} explains {} because_possible {{{}}}",
        u.text(ans),
        u.text(dum),
        atoms.join(", ")
    )
}

/// Steps of one derivation in replay order, premises before conclusions.
fn linearize(set: &ExplanationSet, root: u32) -> Vec<u32> {
    let mut order = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    fn visit(
        set: &ExplanationSet,
        idx: u32,
        seen: &mut std::collections::BTreeSet<u32>,
        order: &mut Vec<u32>,
    ) {
        if !seen.insert(idx) {
            return;
        }
        for &p in &set.steps()[idx as usize].premises {
            visit(set, p, seen, order);
        }
        order.push(idx);
    }
    visit(set, root, &mut seen, &mut order);
    order
}

fn print_trace(ctx: &SaturatedContext, set: &ExplanationSet, root: u32) {
    let order = linearize(set, root);
    let local: HashMap<u32, usize> = order
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, i + 1))
        .collect();
    for &idx in &order {
        let step = &set.steps()[idx as usize];
        let statement = render_statement(ctx, step.explanans, step.explanandum, &step.proviso);
        let how = match &step.rule {
            StepRule::Base {
                cause,
                effect,
                lower,
            } => format!(
                "base: {} causes {}; via {}",
                ctx.universe().text(*cause),
                ctx.universe().text(*effect),
                ctx.universe().text(*lower)
            ),
            StepRule::Trans => format!(
                "transitivity of {}, {}",
                local[&step.premises[0]], local[&step.premises[1]]
            ),
            StepRule::Simplify { .. } => {
                let refs: Vec<String> = step
                    .premises
                    .iter()
                    .map(|p| local[p].to_string())
                    .collect();
                format!("simplification of {}", refs.join(", "))
            }
        };
        println!("    {}. {}   [{}]", local[&idx], statement, how);
    }
}

#[derive(Serialize)]
struct OutputDocument {
    schema: &'static str,
    digest: String,
    explanations: Vec<Record>,
    steps: Vec<StepJson>,
    diagnostics: Vec<String>,
}

#[derive(Serialize)]
struct Record {
    explanans: String,
    explanandum: String,
    proviso: Vec<String>,
    trace: Vec<u32>,
}

#[derive(Serialize)]
struct StepJson {
    rule: &'static str,
    statement: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    causal_atom: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    via: Option<String>,
    premises: Vec<u32>,
}

fn build_document(
    theory: &Theory,
    ctx: &SaturatedContext,
    set: &ExplanationSet,
    records: &[((AtomIdx, AtomIdx), &engine::Entry)],
) -> OutputDocument {
    let digest = format!(
        "sha256:{:x}",
        Sha256::digest(parser::render_theory(theory).as_bytes())
    );

    // steps reachable from the emitted records, pool-indexed in first-use order
    let mut pool: Vec<u32> = Vec::new();
    let mut remap: HashMap<u32, u32> = HashMap::new();
    let mut explanations = Vec::new();
    for &((ans, dum), entry) in records {
        let order = linearize(set, entry.step);
        let mut trace = Vec::new();
        for idx in order {
            let new = *remap.entry(idx).or_insert_with(|| {
                pool.push(idx);
                (pool.len() - 1) as u32
            });
            trace.push(new);
        }
        let u = ctx.universe();
        explanations.push(Record {
            explanans: u.text(ans).to_string(),
            explanandum: u.text(dum).to_string(),
            proviso: entry.proviso.iter().map(|&i| u.text(i).to_string()).collect(),
            trace,
        });
    }
    let steps = pool
        .iter()
        .map(|&idx| {
            let step = &set.steps()[idx as usize];
            let (causal_atom, via) = match &step.rule {
                StepRule::Base {
                    cause,
                    effect,
                    lower,
                } => (
                    Some(format!(
                        "{} causes {}",
                        ctx.universe().text(*cause),
                        ctx.universe().text(*effect)
                    )),
                    Some(ctx.universe().text(*lower).to_string()),
                ),
                _ => (None, None),
            };
            StepJson {
                rule: match &step.rule {
                    StepRule::Base { .. } => "base",
                    StepRule::Trans => "transitivity",
                    StepRule::Simplify { .. } => "simplification",
                },
                statement: render_statement(ctx, step.explanans, step.explanandum, &step.proviso),
                causal_atom,
                via,
                premises: step.premises.iter().map(|p| remap[p]).collect(),
            }
        })
        .collect();

    OutputDocument {
        schema: "explika/1",
        digest,
        explanations,
        steps,
        diagnostics: set.diagnostics().to_vec(),
    }
}

fn cmd_diff_oracle(path: Option<&Path>, random: Option<Vec<u64>>) -> i32 {
    let limits = OracleLimits::default();
    match (path, random) {
        (Some(p), None) => {
            let theory = match load_theory(p) {
                Ok(t) => t,
                Err(code) => return code,
            };
            report_diff(&theory, &limits, &format!("{}", p.display()))
        }
        (None, Some(range)) => {
            let (seed, count) = (range[0], range[1]);
            let params = RandomTheoryParams::default();
            let mut worst = EXIT_OK;
            let mut mismatches = 0usize;
            for s in seed..seed + count {
                let theory = oracle::random_theory(s, &params);
                let code = report_diff(&theory, &limits, &format!("seed {s}"));
                if code != EXIT_OK {
                    mismatches += 1;
                    worst = worst.max(code);
                }
            }
            println!(
                "{} theories checked, {} mismatches",
                count,
                mismatches
            );
            worst
        }
        _ => {
            report_error("diff-oracle needs a theory file or --random SEED COUNT");
            EXIT_INVALID
        }
    }
}

fn report_diff(theory: &Theory, limits: &OracleLimits, label: &str) -> i32 {
    match oracle::diff_engine_oracle(theory, limits) {
        Err(e) => {
            report_error(&format!("{label}: {e}"));
            EXIT_LIMIT
        }
        Ok(report) if report.identical => {
            println!("{label}: engine and oracle agree");
            EXIT_OK
        }
        Ok(report) => {
            println!("{label}: engine and oracle DISAGREE");
            for line in &report.failures {
                println!("  failure: {line}");
            }
            for line in &report.incompleteness {
                println!("  known incompleteness: {line}");
            }
            EXIT_DIFF
        }
    }
}
