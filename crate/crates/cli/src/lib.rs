//! Batch front end: parses scenario files, runs the verifiers and writes reports.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use lmeas::harness::Scenario;
use lmeas::suite::{self, Format, IndexEntry, Verifier};
use lmeas::text;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

/// Smallest accepted depth override.
const MIN_DEPTH: u64 = 4;

#[derive(Parser, Debug)]
#[command(name = "lmeas", version, about = "Depth-bounded verifiers for filter convergence of vector measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
    Md,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Json => Format::Json,
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Md => Format::Md,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run scenario files, or the built-in suite when none are given.
    Run {
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        /// Overrides the depth of every scenario.
        #[arg(long, env = "LMEAS_DEPTH")]
        depth: Option<u64>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Overrides the seed of every scenario.
        #[arg(long)]
        seed: Option<u64>,
        files: Vec<PathBuf>,
    },
    /// List the built-in scenarios.
    List,
    /// Check one property of the charge in FILE.
    Check {
        #[arg(long)]
        property: String,
        #[arg(long, env = "LMEAS_DEPTH", default_value_t = 32)]
        depth: u64,
        file: PathBuf,
    },
}

/// Runs the command line and returns the exit status.
pub fn execute<I, T>(args: I, verifier: Verifier, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INPUT;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Run { format, out: dir, depth, jobs, seed, files } => run(&files, format.into(), &dir, depth, jobs, seed, verifier, out, err),
        Command::List => list(out).map(|_| EXIT_OK),
        Command::Check { property, depth, file } => check(&property, depth, &file, out).map(|_| EXIT_OK),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e:#}");
        EXIT_INPUT
    })
}

fn load(path: &Path) -> anyhow::Result<Scenario> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text::parse_scenario(&src).with_context(|| path.display().to_string())
}

fn file_name(i: usize, name: &str, format: Format) -> String {
    let slug: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    format!("{:02}-{slug}.{}", i + 1, format.extension())
}

#[allow(clippy::too_many_arguments)]
fn run(
    files: &[PathBuf],
    format: Format,
    dir: &Path,
    depth: Option<u64>,
    jobs: usize,
    seed: Option<u64>,
    verifier: Verifier,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> anyhow::Result<i32> {
    if let Some(d) = depth {
        if d < MIN_DEPTH {
            bail!("depth must be at least {MIN_DEPTH}, got {d}");
        }
    }
    let mut scenarios = if files.is_empty() {
        suite::builtin_scenarios()?
    } else {
        files.iter().map(|f| load(f)).collect::<anyhow::Result<Vec<_>>>()?
    };
    for s in &mut scenarios {
        if let Some(d) = depth {
            s.depth = d;
        }
        if let Some(k) = seed {
            s.seed = k;
        }
    }
    let results = suite::run_all(&scenarios, jobs, verifier)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut entries = vec![];
    let (mut errors, mut violations) = (0, 0);
    for (i, (s, r)) in scenarios.iter().zip(&results).enumerate() {
        let name = file_name(i, &s.name, format);
        match r {
            Ok(report) => {
                fs::write(dir.join(&name), suite::render(report, format)).with_context(|| format!("writing {name}"))?;
                if report.violation_flag {
                    violations += 1;
                    writeln!(err, "THEOREM-VIOLATION: {} ({})", s.name, s.theorem)?;
                }
                writeln!(out, "{:<28} {:<15} {}", s.name, s.theorem, report.conclusion.outcome)?;
            }
            Err(e) => {
                errors += 1;
                writeln!(err, "error: {}: {e}", s.name)?;
            }
        }
        entries.push(IndexEntry::new(&s.name, s.theorem.as_str(), r, &name));
    }
    let index = format!("index.{}", format.extension());
    fs::write(dir.join(&index), suite::render_index(&entries, format)).with_context(|| format!("writing {index}"))?;
    Ok(if violations > 0 {
        EXIT_VIOLATION
    } else if errors > 0 {
        EXIT_INPUT
    } else {
        EXIT_OK
    })
}

fn list(out: &mut dyn Write) -> anyhow::Result<()> {
    writeln!(out, "{:<28} {:<15} {:<12} depth", "name", "theorem", "filter")?;
    for s in suite::builtin_scenarios()? {
        writeln!(out, "{:<28} {:<15} {:<12} {}", s.name, s.theorem, s.filter.to_string(), s.depth)?;
    }
    Ok(())
}

fn check(property: &str, depth: u64, file: &Path, out: &mut dyn Write) -> anyhow::Result<()> {
    let src = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let charges = suite::parse_charges(&src).with_context(|| file.display().to_string())?;
    let v = suite::check_property(property, &charges, depth)?;
    writeln!(out, "{property}: {v}")?;
    Ok(())
}
