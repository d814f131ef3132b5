//! Command-line front end. [`run_cli`] returns the process exit code:
//! 0 when every expectation holds and no bug was found, 1 for a bug or an
//! expectation mismatch, 2 for usage, input or internal errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mapcheck::c11::{check_execution, C11Witness};
use mapcheck::corpus::{corpus_file, load_corpus, CorpusEntry};
use mapcheck::harness::{
    self, comparison_json, corpus_json, emit_dot, immediate, jobs_from_env, parse_orders,
    run_corpus, sweep, sweep_json, verdict_json, Comparison, DotRelation, ExpectationCheck,
    Position, SCHEMA_VERSION,
};
use mapcheck::hw::hw_relations;
use mapcheck::mapping::{builtin_mapping, parse_mapping};
use mapcheck::{parse_litmus, AnyTest, C11Test, Execution, MappingTable};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mapcheck",
    version,
    about = "Checks C11 litmus tests and their compilation to Power and ARMv7"
)]
struct Cli {
    /// Emit a JSON report on stdout instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide a test's outcome under its own model (C11 or hardware).
    Check(FileArg),
    /// Compile a C11 test with a mapping and print the ISA test.
    Compile {
        #[command(flatten)]
        file: FileArg,
        #[command(flatten)]
        mapping: MappingArg,
    },
    /// Compare a C11 test against its compiled form.
    Compare {
        #[command(flatten)]
        file: FileArg,
        #[command(flatten)]
        mapping: MappingArg,
        /// Write the C11 execution (witness or rejected candidate) as DOT.
        #[arg(long, value_name = "OUT")]
        dot: Option<PathBuf>,
        /// Write the hardware witness as DOT.
        #[arg(long, value_name = "OUT")]
        dot_target: Option<PathBuf>,
    },
    /// Vary memory orders at chosen accesses and compare every variant.
    Sweep {
        #[command(flatten)]
        file: FileArg,
        /// Comma-separated `thread:index` positions.
        #[arg(long, value_name = "POSITIONS")]
        vary: String,
        /// Comma-separated memory orders to try at each position.
        #[arg(
            long,
            value_name = "ORDERS",
            default_value = "relaxed,acquire,release,seq_cst"
        )]
        orders: String,
        /// Mapping to compare under (repeatable); defaults to all built-ins.
        #[arg(long, short, value_name = "NAME|FILE")]
        mapping: Vec<String>,
        #[command(flatten)]
        jobs: JobsArg,
    },
    /// Check every expectation in the bundled corpus, or in the given files
    /// and directories.
    Corpus {
        paths: Vec<PathBuf>,
        #[command(flatten)]
        jobs: JobsArg,
    },
    /// List the built-in mappings, or print one in mapping-file syntax.
    Mappings { name: Option<String> },
}

#[derive(Debug, Args)]
struct FileArg {
    /// Litmus file, or the name of a bundled corpus test (e.g. `rwc.lit`).
    file: String,
}

#[derive(Debug, Args)]
struct MappingArg {
    /// Built-in mapping name or mapping file.
    #[arg(long, short, value_name = "NAME|FILE")]
    mapping: String,
}

#[derive(Debug, Args)]
struct JobsArg {
    /// Worker threads; defaults to MAPCHECK_JOBS or the core count.
    #[arg(long, short)]
    jobs: Option<usize>,
}

impl JobsArg {
    fn get(&self) -> usize {
        self.jobs.filter(|&n| n > 0).unwrap_or_else(jobs_from_env)
    }
}

/// Error carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

impl From<harness::HarnessError> for Failure {
    fn from(e: harness::HarnessError) -> Self {
        usage(e.to_string())
    }
}

type CliResult = Result<i32, Failure>;

/// Runs the CLI on `argv` (including the program name), printing to stdout
/// and stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("mapcheck: {}", f.message);
            f.code
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let json = cli.json;
    match cli.command {
        Command::Check(f) => cmd_check(&f.file, json),
        Command::Compile { file, mapping } => cmd_compile(&file.file, &mapping.mapping, json),
        Command::Compare {
            file,
            mapping,
            dot,
            dot_target,
        } => cmd_compare(
            &file.file,
            &mapping.mapping,
            dot.as_deref(),
            dot_target.as_deref(),
            json,
        ),
        Command::Sweep {
            file,
            vary,
            orders,
            mapping,
            jobs,
        } => cmd_sweep(&file.file, &vary, &orders, &mapping, jobs.get(), json),
        Command::Corpus { paths, jobs } => cmd_corpus(&paths, jobs.get(), json),
        Command::Mappings { name } => cmd_mappings(name.as_deref(), json),
    }
}

fn print_json(v: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("JSON values serialise")
    );
}

/// Reads a litmus file, falling back to the bundled corpus.
fn load_test(file: &str) -> Result<AnyTest, Failure> {
    let text = match fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => match corpus_file(file) {
            Some(t) => t.to_owned(),
            None => return Err(usage(format!("{file}: {e}"))),
        },
    };
    parse_litmus(&text).map_err(|e| usage(format!("{file}:{e}")))
}

fn load_c11(file: &str) -> Result<C11Test, Failure> {
    match load_test(file)? {
        AnyTest::C11(t) => Ok(t),
        AnyTest::Isa(_) => Err(usage(format!("{file}: expected a C11 test"))),
    }
}

/// Resolves a built-in mapping name or reads a mapping file.
fn load_mapping(name_or_path: &str) -> Result<MappingTable, Failure> {
    if let Some(m) = builtin_mapping(name_or_path) {
        return Ok(m);
    }
    let text = fs::read_to_string(name_or_path).map_err(|e| {
        usage(format!(
            "`{name_or_path}` is neither a built-in mapping nor a readable file: {e}"
        ))
    })?;
    parse_mapping(&text).map_err(|e| usage(format!("{name_or_path}: {e}")))
}

fn cmd_check(file: &str, json: bool) -> CliResult {
    let test = load_test(file)?;
    let verdict = harness::check(&test)?;
    let expected = match &test {
        AnyTest::C11(t) => t.expectation,
        AnyTest::Isa(t) => t.expectation,
    };
    let met = expected.is_none_or(|e| e == verdict.expectation());
    if json {
        let mut v = verdict_json(&verdict);
        v["schema"] = json!(SCHEMA_VERSION);
        v["test"] = json!(test.name());
        v["expected"] = json!(expected);
        v["met"] = json!(met);
        print_json(&v);
    } else {
        println!(
            "{}: {} under {} ({})",
            test.name(),
            verdict.expectation(),
            verdict.model,
            verdict.reason
        );
        if let Some(e) = expected {
            let status = if met { "ok" } else { "MISMATCH" };
            println!("expected {e}: {status}");
        }
    }
    Ok(if met { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_compile(file: &str, mapping: &str, json: bool) -> CliResult {
    let test = load_c11(file)?;
    let table = load_mapping(mapping)?;
    let out = mapcheck::compile(&test, &table).map_err(|e| usage(e.to_string()))?;
    if json {
        print_json(&json!({
            "schema": SCHEMA_VERSION,
            "source_test": test.name,
            "mapping": table.name,
            "compiled_text": out.to_string(),
        }));
    } else {
        print!("{out}");
    }
    Ok(EXIT_OK)
}

fn c11_dot_relations(w: &C11Witness) -> Vec<DotRelation> {
    let e = &w.execution;
    let mut rels = vec![
        DotRelation::new("sb", immediate(&e.graph.sb)),
        DotRelation::new("rf", e.rf.clone()),
        DotRelation::new("mo", immediate(&e.mo_relation())),
        DotRelation::new("fr", e.fr()),
        DotRelation::new("sw", w.sw.clone()),
    ];
    for (kind, r) in w.forced.labeled() {
        rels.push(DotRelation::new(kind.as_str(), r.clone()));
    }
    rels
}

fn hw_dot_relations(e: &Execution) -> Vec<DotRelation> {
    let mut rels = vec![
        DotRelation::new("po", immediate(&e.graph.sb)),
        DotRelation::new("rf", e.rf.clone()),
        DotRelation::new("co", immediate(&e.mo_relation())),
        DotRelation::new("fr", e.fr()),
    ];
    if let Ok(r) = hw_relations(e) {
        rels.push(DotRelation::new("ppo", r.ppo));
        rels.push(DotRelation::new("lwfence", immediate(&r.lwfence)));
        rels.push(DotRelation::new("ffence", immediate(&r.ffence)));
    }
    rels
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn cmd_compare(
    file: &str,
    mapping: &str,
    dot: Option<&Path>,
    dot_target: Option<&Path>,
    json: bool,
) -> CliResult {
    let test = load_c11(file)?;
    let table = load_mapping(mapping)?;
    let result = harness::compare(&test, &table)?;

    if let Some(path) = dot {
        let source = match &result {
            Comparison::Bug(b) => b.source_execution.clone(),
            Comparison::Ok { source, .. } => source.witness.as_ref().map(check_execution),
        };
        match source {
            Some(w) => write_file(
                path,
                &emit_dot(&test.name, &w.execution, &c11_dot_relations(&w)),
            )?,
            None => eprintln!(
                "mapcheck: no C11 execution to draw; {} not written",
                path.display()
            ),
        }
    }
    if let Some(path) = dot_target {
        match &result.target_verdict().witness {
            Some(e) => write_file(
                path,
                &emit_dot(
                    &format!("{}+{}", test.name, table.name),
                    e,
                    &hw_dot_relations(e),
                ),
            )?,
            None => eprintln!(
                "mapcheck: hardware forbids the outcome; {} not written",
                path.display()
            ),
        }
    }

    if json {
        print_json(&comparison_json(&result));
    } else {
        print!("{}", comparison_text(&test, &table, &result));
    }
    Ok(if result.is_bug() { EXIT_FAIL } else { EXIT_OK })
}

fn comparison_text(test: &C11Test, table: &MappingTable, c: &Comparison) -> String {
    let (s, t) = (c.source_verdict(), c.target_verdict());
    let mut out = String::new();
    let _ = writeln!(out, "{} under {}", test.name, table.name);
    let _ = writeln!(out, "  c11:      {} ({})", s.expectation(), s.reason);
    let _ = writeln!(out, "  hardware: {} ({})", t.expectation(), t.reason);
    match c {
        Comparison::Ok { .. } => out.push_str("  result: ok\n"),
        Comparison::Bug(b) => {
            out.push_str("  result: BUG, the compiled program exhibits a forbidden outcome\n");
            if let Some(gap) = b.loophole_gap {
                let _ = writeln!(
                    out,
                    "  sb/mo/fr/rfe among seq_cst events is {}",
                    if gap { "acyclic" } else { "cyclic" }
                );
            }
            out.push_str("  compiled program:\n");
            for line in b.compiled.to_string().lines() {
                let _ = writeln!(out, "    {line}");
            }
        }
    }
    out
}

fn cmd_sweep(
    file: &str,
    vary: &str,
    orders: &str,
    mappings: &[String],
    jobs: usize,
    json: bool,
) -> CliResult {
    let test = load_c11(file)?;
    let positions = vary
        .split(',')
        .map(|p| p.parse::<Position>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(usage)?;
    let orders = parse_orders(orders).map_err(usage)?;
    let tables = if mappings.is_empty() {
        mapcheck::mapping_catalog()
    } else {
        mappings
            .iter()
            .map(|m| load_mapping(m))
            .collect::<Result<Vec<_>, _>>()?
    };
    let rows = sweep(&test, &positions, &orders, &tables, jobs)?;
    let bugs = rows
        .iter()
        .flat_map(|r| &r.results)
        .filter(|(_, c)| c.is_bug())
        .count();
    if json {
        print_json(&sweep_json(&rows));
    } else {
        for row in &rows {
            let cells: Vec<String> = row
                .results
                .iter()
                .map(|(m, c)| format!("{m}={}", if c.is_bug() { "BUG" } else { "ok" }))
                .collect();
            println!(
                "{} [c11 {}]: {}",
                row.variant.name,
                row.results.first().map_or("-".into(), |(_, c)| c
                    .source_verdict()
                    .expectation()
                    .to_string()),
                cells.join(" ")
            );
        }
        println!("{} variants, {bugs} bugs", rows.len());
    }
    Ok(if bugs > 0 { EXIT_FAIL } else { EXIT_OK })
}

/// Collects `.lit` files from the given files and directories, recursively
/// and in sorted order.
fn collect_entries(paths: &[PathBuf]) -> Result<Vec<CorpusEntry>, Failure> {
    fn walk(p: &Path, out: &mut Vec<PathBuf>) -> Result<(), Failure> {
        if p.is_dir() {
            let mut children: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| usage(format!("{}: {e}", p.display())))?
                .filter_map(|d| d.ok().map(|d| d.path()))
                .collect();
            children.sort();
            for c in children {
                if c.is_dir() || c.extension().is_some_and(|x| x == "lit") {
                    walk(&c, out)?;
                }
            }
        } else {
            out.push(p.to_path_buf());
        }
        Ok(())
    }
    let mut files = Vec::new();
    for p in paths {
        walk(p, &mut files)?;
    }
    files
        .into_iter()
        .map(|f| {
            let path = f.display().to_string();
            let text = fs::read_to_string(&f).map_err(|e| usage(format!("{path}: {e}")))?;
            let test = parse_litmus(&text).map_err(|e| usage(format!("{path}:{e}")))?;
            Ok(CorpusEntry { path, test })
        })
        .collect()
}

fn cmd_corpus(paths: &[PathBuf], jobs: usize, json: bool) -> CliResult {
    let entries = if paths.is_empty() {
        load_corpus()
    } else {
        collect_entries(paths)?
    };
    let checks = run_corpus(&entries, jobs)?;
    let failed = checks.iter().filter(|c| !c.met).count();
    if json {
        print_json(&corpus_json(&checks));
    } else {
        for c in &checks {
            println!("{}", check_line(c));
        }
        println!("{} checks, {failed} failed", checks.len());
    }
    Ok(if failed > 0 { EXIT_FAIL } else { EXIT_OK })
}

fn check_line(c: &ExpectationCheck) -> String {
    let status = if c.met { "ok  " } else { "FAIL" };
    let mut line = format!(
        "{status} {} [{}] expected {}, got {}",
        c.test, c.model, c.expected, c.actual
    );
    if !c.met {
        let _ = write!(line, " ({})", c.reason);
    }
    line
}

fn cmd_mappings(name: Option<&str>, json: bool) -> CliResult {
    let tables = match name {
        Some(n) => vec![load_mapping(n)?],
        None => mapcheck::mapping_catalog(),
    };
    if json {
        let list: Vec<Value> = tables
            .iter()
            .map(|t| json!({ "name": t.name, "arch": t.arch, "text": t.to_string() }))
            .collect();
        print_json(&json!({ "schema": SCHEMA_VERSION, "mappings": list }));
    } else if name.is_some() {
        print!("{}", tables[0]);
    } else {
        for t in &tables {
            println!("{} ({})", t.name, t.arch);
        }
    }
    Ok(EXIT_OK)
}
