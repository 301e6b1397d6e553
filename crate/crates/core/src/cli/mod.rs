//! The `tutorweb` command line: `serve`, `import`, `simulate`, `report`.
//!
//! Every command is a plain function taking the parsed arguments and an
//! output sink, so they can be driven from tests without a subprocess.

mod config;

pub use config::{Config, ConfigError};

use crate::analytics::report::{
    drill_grades, exam_report, parse_export, read_exam_csv, summarize_comparison, write_pass_rate_csv,
    write_student_rows_csv, pass_rate_table, ReportError,
};
use crate::analytics::{compare_schemes, AnalyticsError, PopulationSpec, Scheme, SimLecture};
use crate::content::{parse_tex_questions, LecturePath, ParseError};
use crate::grading::GradePolicy;
use crate::pacing::TimeoutPolicy;
use crate::sync::{router, FileJournal, StoreError, SyncError, SyncService};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Parser)]
#[command(name = "tutorweb", version, about = "Adaptive drilling server and analytics")]
pub struct Cli {
    /// Directory holding the answer journal
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    /// TOML config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random choice a command makes
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the sync server
    Serve(ServeArgs),
    /// Import a TeX question file into course/tutorial/lecture
    Import(ImportArgs),
    /// Compare grading schemes on a simulated cohort
    Simulate(SimulateArgs),
    /// Relate drill grades from an answer export to exam outcomes
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long)]
    pub bind: Option<String>,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    pub file: PathBuf,
    /// e.g. `math101/week1/limits`
    pub path: LecturePath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Taper,
    Fixed8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 500)]
    pub students: usize,
    /// Fraction of the cohort that guesses
    #[arg(long, default_value_t = 0.4)]
    pub guessers: f64,
    /// Run a single scheme; without this and --timeout, all standard schemes run
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    pub timeout: Option<Switch>,
    #[arg(long, default_value_t = 100)]
    pub answers: usize,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Questions in the simulated lecture
    #[arg(long, default_value_t = 150)]
    pub questions: usize,
    /// Final mastery at or above which a student counts as having mastered
    #[arg(long, default_value_t = 0.6)]
    pub mastery_threshold: f64,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Answer export (newline-delimited JSON)
    #[arg(long)]
    pub answers: PathBuf,
    /// Exam CSV with columns studentId, examGrade, passed
    #[arg(long)]
    pub exam: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    /// Also write pass_rate.csv and fit.json here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{file}:{}: {source}", source.line())]
    Parse { file: PathBuf, source: ParseError },
    #[error("cannot bind {0}: address already in use")]
    PortInUse(String),
    #[error("data directory {0} is in use by another process")]
    Locked(PathBuf),
    #[error("refusing to start: {0}")]
    CorruptStore(StoreError),
    #[error(transparent)]
    Sync(#[from] SyncError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_owned(), source }
}

/// Loads config and applies the global flags over it.
pub fn resolve_config(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(d) = &cli.data_dir {
        cfg.data_dir = d.clone();
    }
    Ok(cfg)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve_config(&cli)?;
    match cli.command {
        Command::Serve(a) => serve(&cfg, &a, cli.seed, out),
        Command::Import(a) => import(&cfg, &a, out),
        Command::Simulate(a) => simulate(&a, cli.seed.unwrap_or(0), out),
        Command::Report(a) => report(&cfg, &a, out),
    }
}

fn open_store(dir: &Path, admin_token: Option<&str>) -> Result<SyncService, CliError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let (journal, entries) = FileJournal::open(dir).map_err(|e| match e {
        StoreError::Locked(_) => CliError::Locked(dir.to_owned()),
        StoreError::Io(source) => CliError::Io { path: dir.to_owned(), source },
        other => CliError::CorruptStore(other),
    })?;
    SyncService::open(Box::new(journal), entries, admin_token).map_err(|e| match e {
        SyncError::Store(s) => CliError::CorruptStore(s),
        other => CliError::Sync(other),
    })
}

pub fn serve(cfg: &Config, args: &ServeArgs, seed: Option<u64>, out: &mut dyn Write) -> Result<(), CliError> {
    let addr = format!(
        "{}:{}",
        args.bind.as_deref().unwrap_or(&cfg.bind),
        args.port.unwrap_or(cfg.port)
    );
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(io_err(&cfg.data_dir))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr).await.map_err(|e| {
            if e.kind() == std::io::ErrorKind::AddrInUse {
                CliError::PortInUse(addr.clone())
            } else {
                CliError::Io { path: PathBuf::from(&addr), source: e }
            }
        })?;
        let mut svc = open_store(&cfg.data_dir, cfg.admin_token.as_deref())?;
        if let Some(s) = seed {
            svc = svc.with_rng_seed(s);
        }
        if cfg.admin_token.is_none() {
            tracing::warn!("no admin token configured; user management is disabled");
        }
        let shutdown = shutdown_signal().map_err(io_err(Path::new("signal handler")))?;
        let local = listener.local_addr().map_err(io_err(Path::new(&addr)))?;
        writeln!(out, "listening on {local}").and_then(|_| out.flush()).map_err(io_err(Path::new("stdout")))?;
        tracing::info!(%local, data_dir = %cfg.data_dir.display(), "serving");
        axum::serve(listener, router(Arc::new(svc)))
            .with_graceful_shutdown(shutdown)
            .await
            .map_err(io_err(Path::new(&addr)))
    })?;
    tracing::info!("shut down");
    Ok(())
}

/// Resolves on SIGINT or SIGTERM. Handlers are installed when this is
/// called, not when the future is first polled.
#[cfg(unix)]
fn shutdown_signal() -> std::io::Result<impl std::future::Future<Output = ()>> {
    use tokio::signal::unix::{signal, SignalKind};
    let mut int = signal(SignalKind::interrupt())?;
    let mut term = signal(SignalKind::terminate())?;
    Ok(async move {
        tokio::select! {
            _ = int.recv() => {},
            _ = term.recv() => {},
        }
    })
}

#[cfg(not(unix))]
fn shutdown_signal() -> std::io::Result<impl std::future::Future<Output = ()>> {
    Ok(async {
        let _ = tokio::signal::ctrl_c().await;
    })
}

pub fn import(cfg: &Config, args: &ImportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.file).map_err(io_err(&args.file))?;
    let questions = parse_tex_questions(&text).map_err(|source| CliError::Parse {
        file: args.file.clone(),
        source,
    })?;
    let svc = open_store(&cfg.data_dir, None)?;
    let outcome = svc.import_questions(&args.path, questions, cfg.lecture_settings())?;
    writeln!(out, "added {}, skipped {}", outcome.added, outcome.skipped).map_err(io_err(Path::new("stdout")))?;
    Ok(())
}

/// Schemes selected by `--scheme`/`--timeout`; the standard trio when
/// neither is given.
pub fn selected_schemes(scheme: Option<SchemeArg>, timeout: Option<Switch>) -> Vec<Scheme> {
    if scheme.is_none() && timeout.is_none() {
        return Scheme::standard();
    }
    let scheme = scheme.unwrap_or(SchemeArg::Taper);
    let timeout = timeout.unwrap_or(match scheme {
        SchemeArg::Taper => Switch::On,
        SchemeArg::Fixed8 => Switch::Off,
    });
    let (base, grade_policy) = match scheme {
        SchemeArg::Taper => ("taper", GradePolicy::default()),
        SchemeArg::Fixed8 => ("fixed8", GradePolicy::fixed_window(8)),
    };
    let (name, timeout_policy) = match timeout {
        Switch::On => (format!("{base}+timeout"), TimeoutPolicy::default()),
        Switch::Off => (base.to_string(), TimeoutPolicy::disabled()),
    };
    vec![Scheme { name, grade_policy, timeout_policy }]
}

fn file_slug(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

pub fn simulate(args: &SimulateArgs, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    let population = PopulationSpec {
        students: args.students,
        guesser_fraction: args.guessers,
        mastery_threshold: args.mastery_threshold,
        ..PopulationSpec::default()
    };
    population.validate()?;
    if args.answers == 0 || args.reps == 0 || args.questions == 0 || args.bins == 0 {
        return Err(CliError::InvalidArgs("answers, reps, questions and bins must be positive".into()));
    }
    if !(0.0..=1.0).contains(&args.mastery_threshold) {
        return Err(CliError::InvalidArgs("mastery threshold must lie in [0, 1]".into()));
    }
    if args.out.exists() && !args.out.is_dir() {
        return Err(CliError::InvalidArgs(format!("{} is not a directory", args.out.display())));
    }
    let schemes = selected_schemes(args.scheme, args.timeout);
    let lecture = SimLecture::spread(args.questions, -1.5, 1.5, 4);

    let cmp = compare_schemes(&population, &lecture, &schemes, args.answers, args.reps, seed)?;
    let summary = summarize_comparison(&cmp, args.students, args.reps, args.answers, seed);

    std::fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;
    let grades_path = args.out.join("grades.csv");
    let f = std::fs::File::create(&grades_path).map_err(io_err(&grades_path))?;
    write_student_rows_csv(std::io::BufWriter::new(f), &cmp.rows)?;
    for s in &schemes {
        let points: Vec<(f64, bool)> = cmp
            .rows
            .iter()
            .filter(|r| r.scheme == s.name)
            .map(|r| (r.grade, r.mastered))
            .collect();
        let p = args.out.join(format!("pass_rate_{}.csv", file_slug(&s.name)));
        let f = std::fs::File::create(&p).map_err(io_err(&p))?;
        write_pass_rate_csv(std::io::BufWriter::new(f), &pass_rate_table(&points, args.bins))?;
    }
    let summary_path = args.out.join("summary.json");
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(&summary_path, json + "\n").map_err(io_err(&summary_path))?;

    let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(io_err(Path::new("stdout")));
    w(out, format!("{:<16} {:>8} {:>8}", "scheme", "auc", "se"))?;
    for s in &summary.schemes {
        w(out, format!("{:<16} {:>8.4} {:>8.4}", s.scheme, s.auc_mean, s.auc_se))?;
    }
    w(out, format!("wrote {}", args.out.display()))?;
    Ok(())
}

pub fn report(cfg: &Config, args: &ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.bins == 0 {
        return Err(CliError::InvalidArgs("bins must be positive".into()));
    }
    let export = std::fs::read_to_string(&args.answers).map_err(io_err(&args.answers))?;
    let rows = parse_export(&export)?;
    let exam_file = std::fs::File::open(&args.exam).map_err(io_err(&args.exam))?;
    let exam = read_exam_csv(exam_file)?;
    let grades = drill_grades(&rows, &cfg.grade_policy);
    let rep = exam_report(&grades, &exam, args.bins)?;

    for s in &rep.unmatched_drill {
        tracing::warn!(student = %s, "no exam result for student");
        eprintln!("warning: no exam result for {s}");
    }
    for s in &rep.unmatched_exam {
        tracing::warn!(student = %s, "no drill answers for student");
        eprintln!("warning: no drill answers for {s}");
    }

    let io = |e| CliError::Io { path: "stdout".into(), source: e };
    write_pass_rate_csv(&mut *out, &rep.bins)?;
    let f = &rep.fit;
    writeln!(
        out,
        "fit: beta0={:.4} beta1={:.4} midpoint={} converged={} separated={} matched={}",
        f.beta0,
        f.beta1,
        f.midpoint.map(|m| format!("{m:.3}")).unwrap_or_else(|| "none".into()),
        f.converged,
        f.separated,
        rep.matched
    )
    .map_err(io)?;

    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let p = dir.join("pass_rate.csv");
        let file = std::fs::File::create(&p).map_err(io_err(&p))?;
        write_pass_rate_csv(std::io::BufWriter::new(file), &rep.bins)?;
        let p = dir.join("fit.json");
        let json = serde_json::to_string_pretty(&rep).expect("report serializes");
        std::fs::write(&p, json + "\n").map_err(io_err(&p))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["tutorweb", "simulate", "--out", "x", "--seed", "7", "--data-dir", "d"]).unwrap();
        assert_eq!(cli.seed, Some(7));
        assert_eq!(cli.data_dir.as_deref(), Some(Path::new("d")));
    }

    #[test]
    fn bad_lecture_path_rejected_by_parser() {
        assert!(Cli::try_parse_from(["tutorweb", "import", "f.tex", "only/two"]).is_err());
        assert!(Cli::try_parse_from(["tutorweb", "simulate", "--out", "x", "--scheme", "fixed9"]).is_err());
    }

    #[test]
    fn scheme_selection() {
        let names = |s: Vec<Scheme>| s.into_iter().map(|s| s.name).collect::<Vec<_>>();
        assert_eq!(names(selected_schemes(None, None)), ["taper+timeout", "taper", "fixed8"]);
        assert_eq!(names(selected_schemes(Some(SchemeArg::Taper), None)), ["taper+timeout"]);
        assert_eq!(names(selected_schemes(Some(SchemeArg::Fixed8), None)), ["fixed8"]);
        assert_eq!(names(selected_schemes(None, Some(Switch::Off))), ["taper"]);
        assert_eq!(
            names(selected_schemes(Some(SchemeArg::Fixed8), Some(Switch::On))),
            ["fixed8+timeout"]
        );
    }

    #[test]
    fn simulate_validates_before_work() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("never");
        let args = SimulateArgs {
            students: 1,
            guessers: 0.4,
            scheme: None,
            timeout: None,
            answers: 10,
            reps: 1,
            questions: 10,
            mastery_threshold: 0.6,
            bins: 10,
            out: out.clone(),
        };
        assert!(simulate(&args, 0, &mut Vec::new()).is_err());
        assert!(!out.exists());
        let args = SimulateArgs { students: 10, guessers: 1.5, ..args };
        assert!(simulate(&args, 0, &mut Vec::new()).is_err());
        assert!(!out.exists());
    }
}
