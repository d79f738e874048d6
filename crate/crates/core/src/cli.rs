//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 internal I/O failure, 2 configuration or parse error,
//! 3 generation infeasible, 4 a SUT could not be launched, 5 adequacy below
//! the `--min-adequacy` gate.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::adequacy::{measure_adequacy_with, render_fraction, to_f64, AdequacyReport, Rational};
use crate::bundled::lexer::{lexer_main, LexerBuild};
use crate::bundled::trig::{trig_main, TrigVariant};
use crate::exec::Exec;
use crate::execution::{
    append_verdicts, fde, fdr, FdeOptions, MetricsError, MgVerdict, MutantSet, RunOptions, VerdictStatus, VerdictStore,
    run_suite,
};
use crate::generation::{
    generate_replicas, generate_satisfying_suite, parse_rational, AdequacyLevel, GenerationBudget, GenerationError,
    Generated, TieBreak,
};
use crate::model::TestSuite;
use crate::project::{DistinctnessMode, Project, ProjectError};
use crate::suite_file::{read_suite, write_suite, HookRegistry};

#[derive(Debug, Parser)]
#[command(name = "mtadq", version, about = "Adequacy measurement and suite generation for metamorphic testing")]
pub struct Cli {
    /// Project file.
    #[arg(long, global = true, default_value = "project.toml")]
    pub config: PathBuf,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 1 forces sequential execution.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory, overriding the project's `out`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measure the adequacy degree of the project suite.
    Measure(MeasureArgs),
    /// Generate suites that satisfy the criterion or fall in a level.
    Generate(GenerateArgs),
    /// Run the project suite against SUT adapters and log verdicts.
    Run(RunArgs),
    /// Compute FDE per suite and FDR per mutant and level.
    Evaluate(EvaluateArgs),
    /// Render the artifacts in the output directory as Markdown.
    Report,
    /// Run a bundled system under test on standard input.
    #[command(hide = true)]
    Sut {
        #[command(subcommand)]
        which: BundledSut,
    },
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long, value_enum)]
    pub distinctness: Option<DistinctnessMode>,
    /// Fail with exit code 5 when the degree is below this value.
    #[arg(long, value_parser = parse_fraction)]
    pub min_adequacy: Option<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Satisfy,
    Level,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieBreakArg {
    Seeded,
    Lexicographic,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long, value_enum)]
    pub distinctness: Option<DistinctnessMode>,
    /// Interval `lo,hi`, open below and closed above.
    #[arg(long)]
    pub level: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub replicas: u64,
    #[arg(long, value_enum, default_value = "seeded")]
    pub tie_break: TieBreakArg,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Per-execution timeout in milliseconds.
    #[arg(long)]
    pub timeout: Option<u64>,
    /// Adapters to run; all declared adapters by default.
    #[arg(long = "sut")]
    pub suts: Vec<String>,
    /// Suite file to run instead of the project suite.
    #[arg(long)]
    pub suite: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub timeout: Option<u64>,
    /// Count execution errors on a mutant as detections.
    #[arg(long)]
    pub crash_detects: bool,
}

#[derive(Debug, Subcommand)]
pub enum BundledSut {
    /// Sine or cosine of the angle on line one, function name on line two.
    Trig {
        #[arg(long, default_value = "trig")]
        variant: String,
    },
    /// Tokens of standard input.
    Lexer {
        #[arg(long)]
        faulty: bool,
    },
}

fn parse_fraction(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("`{s}` is not a number in [0, 1]"))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Project(#[from] ProjectError),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{0}")]
    Execution(String),
    #[error("adequacy {degree} is below the required {min}")]
    BelowThreshold { degree: String, min: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Project(_) | CliError::Config(_) | CliError::Metrics(_) => 2,
            CliError::Generation(
                GenerationError::Infeasible { .. }
                | GenerationError::Unachievable { .. }
                | GenerationError::Overshoot { .. }
                | GenerationError::BudgetExhausted(_),
            ) => 3,
            CliError::Generation(_) => 2,
            CliError::Execution(_) => 4,
            CliError::BelowThreshold { .. } => 5,
            CliError::Io { .. } => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, text).map_err(io_err(path))
}

struct Ctx {
    project: Project,
    out: PathBuf,
    seed: u64,
    workers: usize,
    exec: Exec,
}

impl Ctx {
    fn new(cli: &Cli) -> Result<Self, CliError> {
        let project = Project::load(&cli.config)?;
        let out = project.out_dir(cli.out.as_deref());
        let workers = cli.workers.unwrap_or(0);
        Ok(Ctx {
            project,
            out,
            seed: cli.seed,
            workers,
            exec: if workers == 1 { Exec::Sequential } else { Exec::default() },
        })
    }

    fn run_options(&self) -> RunOptions {
        RunOptions {
            workers: self.workers,
            exec: self.exec,
        }
    }

    fn measure(&self, suite: &TestSuite, k: Option<u32>, d: Option<DistinctnessMode>) -> Result<AdequacyReport, CliError> {
        let coverage = self.project.coverage_for(suite)?;
        let cfg = self.project.adequacy_config(k, d, &suite.mrs);
        measure_adequacy_with(&coverage, &suite.association(), &cfg, self.exec)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Sut { which } = &cli.command {
        return bundled_sut(which);
    }
    let ctx = Ctx::new(&cli)?;
    match &cli.command {
        Command::Measure(a) => cmd_measure(&ctx, a),
        Command::Generate(a) => cmd_generate(&ctx, a),
        Command::Run(a) => cmd_run(&ctx, a),
        Command::Evaluate(a) => cmd_evaluate(&ctx, a),
        Command::Report => cmd_report(&ctx),
        Command::Sut { .. } => unreachable!(),
    }
}

fn bundled_sut(which: &BundledSut) -> Result<(), CliError> {
    let mut input = String::new();
    std::io::stdin()
        .read_to_string(&mut input)
        .map_err(io_err(Path::new("<stdin>")))?;
    let output = match which {
        BundledSut::Trig { variant } => {
            let v = TrigVariant::from_id(variant).ok_or_else(|| CliError::Config(format!("unknown variant `{variant}`")))?;
            trig_main(&input, v).map_err(CliError::Execution)?
        }
        BundledSut::Lexer { faulty } => lexer_main(&input, if *faulty { LexerBuild::Faulty } else { LexerBuild::Fixed }),
    };
    print!("{output}");
    Ok(())
}

fn cmd_measure(ctx: &Ctx, a: &MeasureArgs) -> Result<(), CliError> {
    let suite = ctx.project.suite()?;
    let report = ctx.measure(&suite, a.k, a.distinctness)?;
    let json = serde_json::to_string_pretty(&report).expect("reports serialize");
    write_file(&ctx.out.join("adequacy.json"), &(json + "\n"))?;
    write_file(&ctx.out.join("adequacy.csv"), &report.to_csv())?;
    print!("{}", report.render_text());
    if let Some(min) = a.min_adequacy {
        if report.degree < min {
            return Err(CliError::BelowThreshold {
                degree: render_fraction(report.degree, report.per_requirement.len()),
                min: min.to_string(),
            });
        }
    }
    Ok(())
}

fn level_tag(level: &AdequacyLevel) -> String {
    format!("level-{}-{}", to_f64(level.lower()), to_f64(level.upper()))
}

fn cmd_generate(ctx: &Ctx, a: &GenerateArgs) -> Result<(), CliError> {
    if a.replicas == 0 {
        return Err(CliError::Config("--replicas must be positive".into()));
    }
    let (pool, mrs) = ctx.project.pools()?;
    let coverage = ctx.project.coverage(&pool)?;
    let cfg = ctx.project.adequacy_config(a.k, a.distinctness, &mrs);
    let mut budget = GenerationBudget::new(pool, mrs, ctx.seed);
    budget.exec = ctx.exec;
    budget.tie_break = match a.tie_break {
        TieBreakArg::Seeded => TieBreak::Seeded,
        TieBreakArg::Lexicographic => TieBreak::Lexicographic,
    };
    let (tag, suites): (String, Vec<Generated>) = match a.mode {
        Mode::Satisfy => {
            if a.level.is_some() {
                return Err(CliError::Config("--level applies to --mode level only".into()));
            }
            let suites = (0..a.replicas)
                .map(|i| generate_satisfying_suite(&coverage, &cfg, &budget.with_seed(ctx.seed.wrapping_add(i))))
                .collect::<Result<Vec<_>, _>>()?;
            (format!("satisfy-k{}", cfg.k), suites)
        }
        Mode::Level => {
            let text = a
                .level
                .as_deref()
                .ok_or_else(|| CliError::Config("--mode level needs --level lo,hi".into()))?;
            let level: AdequacyLevel = text.parse().map_err(|e: GenerationError| CliError::Config(e.to_string()))?;
            let suites = generate_replicas(&coverage, &cfg, level, &budget, a.replicas)?;
            (level_tag(&level), suites)
        }
    };
    let dir = ctx.out.join("suites").join(&tag);
    if dir.exists() {
        std::fs::remove_dir_all(&dir).map_err(io_err(&dir))?;
    }
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let n = coverage.requirements().len();
    for (i, g) in suites.iter().enumerate() {
        let path = dir.join(format!("r{i:03}.toml"));
        write_suite(&path, &g.suite).map_err(|e| CliError::Config(e.to_string()))?;
        println!(
            "{}  degree {} ({:.6})  groups {}",
            path.display(),
            render_fraction(g.degree, n),
            to_f64(g.degree),
            g.suite.mgs.len()
        );
    }
    Ok(())
}

fn status_counts(verdicts: &[MgVerdict]) -> (usize, usize, usize) {
    let count = |s: VerdictStatus| verdicts.iter().filter(|v| v.status == s).count();
    (
        count(VerdictStatus::Satisfied),
        count(VerdictStatus::Violated),
        count(VerdictStatus::ExecutionError),
    )
}

fn launch_failure(sut: &str, verdicts: &[MgVerdict]) -> Option<CliError> {
    verdicts
        .iter()
        .find(|v| v.is_launch_failure())
        .map(|v| CliError::Execution(format!("SUT `{sut}`: {}", v.detail)))
}

fn cmd_run(ctx: &Ctx, a: &RunArgs) -> Result<(), CliError> {
    let timeout = a.timeout.map(Duration::from_millis);
    let (suite_id, suite) = match &a.suite {
        Some(p) => (
            p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            read_suite(p, &HookRegistry::new()).map_err(|e| CliError::Config(e.to_string()))?,
        ),
        None => ("project".to_owned(), ctx.project.suite()?),
    };
    let mut adapters = ctx.project.all_adapters(timeout)?;
    if !a.suts.is_empty() {
        if let Some(missing) = a.suts.iter().find(|id| !adapters.iter().any(|s| &s.id == *id)) {
            return Err(CliError::Config(format!("no adapter named `{missing}`")));
        }
        adapters.retain(|s| a.suts.contains(&s.id));
    }
    let mut failure = None;
    for sut in &adapters {
        let verdicts = run_suite(&suite, sut, ctx.run_options());
        let path = ctx.out.join("verdicts").join(format!("{}.jsonl", sut.id));
        write_file(&path, "")?;
        append_verdicts(&path, &suite_id, &sut.id, &verdicts).map_err(io_err(&path))?;
        let (s, v, e) = status_counts(&verdicts);
        println!("{}: {s} satisfied, {v} violated, {e} errors -> {}", sut.id, path.display());
        failure = failure.or_else(|| launch_failure(&sut.id, &verdicts));
    }
    failure.map_or(Ok(()), Err)
}

/// A suite under evaluation: its id in logs and tables, and the level it was
/// generated for.
struct Evaluated {
    id: String,
    level: String,
    suite: TestSuite,
}

fn collect_suites(ctx: &Ctx) -> Result<Vec<Evaluated>, CliError> {
    let mut out = vec![Evaluated {
        id: "project".into(),
        level: "project".into(),
        suite: ctx.project.suite()?,
    }];
    let root = ctx.out.join("suites");
    let Ok(levels) = std::fs::read_dir(&root) else {
        return Ok(out);
    };
    let mut dirs: Vec<PathBuf> = levels.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_dir()).collect();
    dirs.sort();
    for dir in dirs {
        let level = dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(io_err(&dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        files.sort();
        for f in files {
            let stem = f.file_stem().unwrap_or_default().to_string_lossy();
            out.push(Evaluated {
                id: format!("{level}/{stem}"),
                level: level.clone(),
                suite: read_suite(&f, &HookRegistry::new())
                    .map_err(|e| CliError::Config(format!("{}: {e}", f.display())))?,
            });
        }
    }
    Ok(out)
}

fn cmd_evaluate(ctx: &Ctx, a: &EvaluateArgs) -> Result<(), CliError> {
    let timeout = a.timeout.map(Duration::from_millis);
    let (original, mutants) = ctx.project.mutant_set(timeout)?;
    let set = MutantSet::new(original, mutants)?;
    let suites = collect_suites(ctx)?;
    let opts = FdeOptions {
        run: ctx.run_options(),
        crash_detects: a.crash_detects,
    };
    let log = ctx.out.join("verdicts").join("evaluate.jsonl");
    write_file(&log, "")?;
    let mut store = VerdictStore::new();
    let mut fde_csv = String::from("suite,level,degree,detected,mutants,fde\n");
    let mut failure = None;
    println!("{:<32} {:<24} {:>10} {:>8}", "suite", "level", "degree", "FDE");
    for ev in &suites {
        let report = ctx.measure(&ev.suite, None, None)?;
        let outcome = fde(&ev.suite, &set, opts)?;
        for (mutant, verdicts) in &outcome.verdicts {
            append_verdicts(&log, &ev.id, mutant, verdicts).map_err(io_err(&log))?;
            store.record_verdicts(&ev.id, mutant, verdicts, a.crash_detects);
            failure = failure.or_else(|| launch_failure(mutant, verdicts));
        }
        let degree = render_fraction(report.degree, report.per_requirement.len());
        let detected = outcome.detected.iter().filter(|(_, d)| *d).count();
        let _ = writeln!(fde_csv, "{},{},{},{},{},{}", ev.id, ev.level, degree, detected, set.len(), outcome.fde);
        println!("{:<32} {:<24} {:>10} {:>8}", ev.id, ev.level, degree, outcome.fde.to_string());
    }
    write_file(&ctx.out.join("fde.csv"), &fde_csv)?;

    let mut by_level: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for ev in &suites {
        by_level.entry(&ev.level).or_default().push(&ev.id);
    }
    let mut fdr_csv = String::from("level,mutant,detecting,suites,fdr\n");
    for (level, ids) in &by_level {
        for m in set.mutants() {
            let rate = fdr(&m.id, ids, &store)?;
            let q = ids.iter().filter(|s| store.detected(s, &m.id)).count();
            let _ = writeln!(fdr_csv, "{level},{},{q},{},{rate}", m.id, ids.len());
        }
    }
    write_file(&ctx.out.join("fdr.csv"), &fdr_csv)?;
    println!("wrote {} and {}", ctx.out.join("fde.csv").display(), ctx.out.join("fdr.csv").display());
    failure.map_or(Ok(()), Err)
}

fn csv_table(text: &str) -> String {
    let mut lines = text.lines().filter(|l| !l.is_empty());
    let Some(header) = lines.next() else {
        return String::new();
    };
    let cols = header.split(',').count();
    let mut out = format!("| {} |\n|{}\n", header.replace(',', " | "), "---|".repeat(cols));
    for l in lines {
        let _ = writeln!(out, "| {} |", l.replace(',', " | "));
    }
    out
}

fn cmd_report(ctx: &Ctx) -> Result<(), CliError> {
    let mut md = String::from("# Adequacy report\n\n");
    let mut found = false;
    let adequacy = ctx.out.join("adequacy.json");
    if let Ok(text) = std::fs::read_to_string(&adequacy) {
        found = true;
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", adequacy.display())))?;
        let degree = v["degree"].as_str().unwrap_or("?");
        let n = v["per_requirement"].as_array().map_or(0, Vec::len);
        let shown = parse_rational(degree).map_or(degree.to_owned(), |r| {
            format!("{} ({:.6})", render_fraction(r, n), to_f64(r))
        });
        let _ = writeln!(md, "## Adequacy\n\n- degree: {shown}\n- k: {}\n- requirements: {n}", v["k"]);
        let _ = writeln!(md, "- satisfied: {}\n", v["satisfied"]);
        println!("degree: {shown}");
        if let Ok(csv) = std::fs::read_to_string(ctx.out.join("adequacy.csv")) {
            md.push_str(&csv_table(&csv));
            md.push('\n');
        }
    }
    for (file, title) in [("fde.csv", "Fault detection effectiveness"), ("fdr.csv", "Fault detection rate")] {
        if let Ok(csv) = std::fs::read_to_string(ctx.out.join(file)) {
            found = true;
            let _ = writeln!(md, "## {title}\n");
            md.push_str(&csv_table(&csv));
            md.push('\n');
        }
    }
    if let Ok(entries) = std::fs::read_dir(ctx.out.join("verdicts")) {
        let mut logs: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
        logs.sort();
        if !logs.is_empty() {
            found = true;
            md.push_str("## Verdict logs\n\n| log | satisfied | violated | errors |\n|---|---|---|---|\n");
            for log in logs {
                let records = crate::execution::read_verdict_log(&log).map_err(io_err(&log))?;
                let verdicts: Vec<MgVerdict> = records.into_iter().map(|r| r.verdict).collect();
                let (s, v, e) = status_counts(&verdicts);
                let name = log.file_name().unwrap_or_default().to_string_lossy();
                let _ = writeln!(md, "| {name} | {s} | {v} | {e} |");
            }
        }
    }
    if !found {
        return Err(CliError::Config(format!("no artifacts in {}", ctx.out.display())));
    }
    let path = ctx.out.join("report.md");
    write_file(&path, &md)?;
    println!("wrote {}", path.display());
    Ok(())
}
