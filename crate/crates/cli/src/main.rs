use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use termdev_core::harness::{run_simulation, SimulationConfig};
use termdev_core::metrics::{
    mean_abs_angular_deviation, read_polygon, read_pose_trace, relative_circularity, TrackerRole,
};
use termdev_core::signal::read_trace;
use termdev_core::stats::{
    analyse, bonferroni, mann_whitney_u, read_sample, read_trial_table, render_report,
    significance_stars, two_proportion_ztest,
};

/// Simulation and evaluation tools for myoelectric terminal devices.
#[derive(Parser)]
#[command(name = "termdev", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a device controller against an EMG trace and write the tick log.
    Simulate {
        /// Simulation config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// EMG trace, `t,<channel>...` columns.
        #[arg(long)]
        emg: PathBuf,
        /// Output log path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Task performance metrics.
    #[command(subcommand)]
    Metrics(MetricsCommand),
    /// Two-group hypothesis tests.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Compare groups for every task and comparison in a trial table.
    Report {
        #[arg(long)]
        table: PathBuf,
        /// Family size for Bonferroni correction; defaults to the number of
        /// comparisons per task.
        #[arg(long)]
        bonferroni: Option<usize>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MetricsCommand {
    /// Circularity of a cut outline relative to its template.
    Circularity {
        #[arg(long)]
        cut: PathBuf,
        #[arg(long)]
        template: PathBuf,
    },
    /// Mean absolute angular deviation per tracker, degrees.
    Deviation {
        /// Pose logs, or directories of `.csv` pose logs.
        #[arg(long, num_args = 1.., required = true)]
        poses: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum StatsCommand {
    /// Mann-Whitney U test.
    Mwu {
        #[command(flatten)]
        a: SampleA,
        #[command(flatten)]
        b: SampleB,
        #[arg(long)]
        bonferroni: Option<usize>,
    },
    /// Pooled two-proportion z-test.
    Ztest {
        #[arg(long)]
        hits_a: u64,
        #[arg(long)]
        n_a: u64,
        #[arg(long)]
        hits_b: u64,
        #[arg(long)]
        n_b: u64,
        #[arg(long)]
        bonferroni: Option<usize>,
    },
}

#[derive(Args)]
#[group(id = "sample_a", required = true, multiple = false)]
struct SampleA {
    /// Comma-separated values.
    #[arg(
        id = "a",
        long = "a",
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    values: Option<Vec<f64>>,
    /// File with one value per line.
    #[arg(id = "a_file", long = "a-file")]
    file: Option<PathBuf>,
}

#[derive(Args)]
#[group(id = "sample_b", required = true, multiple = false)]
struct SampleB {
    #[arg(
        id = "b",
        long = "b",
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    values: Option<Vec<f64>>,
    #[arg(id = "b_file", long = "b-file")]
    file: Option<PathBuf>,
}

fn sample(values: Option<Vec<f64>>, file: Option<PathBuf>) -> Result<Vec<f64>> {
    match (values, file) {
        (Some(v), _) => {
            if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
                bail!("non-finite sample value {bad}");
            }
            Ok(v)
        }
        (None, Some(path)) => Ok(read_sample(&path)?),
        (None, None) => bail!("no sample given"),
    }
}

fn print_test(test: &str, statistic: f64, p: f64, m: Option<usize>) -> Result<()> {
    let corrected = bonferroni(&[p], m.unwrap_or(1))?[0];
    println!("test {test}");
    println!("statistic {statistic:.4}");
    println!("p_raw {p:.4}");
    println!("p_corrected {corrected:.4}");
    println!("stars {}", significance_stars(corrected));
    Ok(())
}

fn pose_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(input)
                .with_context(|| format!("{}: cannot list directory", input.display()))?
                .map(|entry| entry.map(|e| e.path()))
                .collect::<std::io::Result<_>>()
                .with_context(|| format!("{}: cannot list directory", input.display()))?;
            found.retain(|p| {
                p.extension().is_some_and(|e| e == "csv") && TrackerRole::from_path(p).is_some()
            });
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    if files.is_empty() {
        bail!("no pose logs found");
    }
    Ok(files)
}

fn display_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, emg, out } => {
            let cfg = SimulationConfig::from_file(&config)?;
            let trace = read_trace(&emg)?;
            let log = run_simulation(&cfg, &trace)?;
            log.write(&out)?;
        }
        Command::Metrics(MetricsCommand::Circularity { cut, template }) => {
            let cut = read_polygon(&cut)?;
            let template = read_polygon(&template)?;
            println!("{:.4}", relative_circularity(&cut, &template));
        }
        Command::Metrics(MetricsCommand::Deviation { poses }) => {
            let mut rows = Vec::new();
            for path in pose_files(&poses)? {
                let trace = read_pose_trace(&path)?;
                let deviation = mean_abs_angular_deviation(&trace)?;
                rows.push(format!(
                    "{},{},{:.4}",
                    display_name(&path),
                    trace.role().name(),
                    deviation.to_degrees()
                ));
            }
            println!("file,tracker,mean_deviation_deg");
            for row in rows {
                println!("{row}");
            }
        }
        Command::Stats(StatsCommand::Mwu { a, b, bonferroni }) => {
            let a = sample(a.values, a.file)?;
            let b = sample(b.values, b.file)?;
            let r = mann_whitney_u(&a, &b)?;
            print_test("mwu", r.u, r.p, bonferroni)?;
        }
        Command::Stats(StatsCommand::Ztest {
            hits_a,
            n_a,
            hits_b,
            n_b,
            bonferroni,
        }) => {
            let r = two_proportion_ztest(hits_a, n_a, hits_b, n_b)?;
            print_test("ztest", r.z, r.p, bonferroni)?;
        }
        Command::Report {
            table,
            bonferroni,
            out,
        } => {
            let table = read_trial_table(&table)?;
            let report = render_report(&analyse(&table, bonferroni)?);
            match out {
                Some(path) => std::fs::write(&path, report)
                    .with_context(|| format!("{}: cannot write report", path.display()))?,
                None => print!("{report}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Library errors already include their cause in the message.
            let mut line = e.to_string();
            for cause in e.chain().skip(1) {
                let cause = cause.to_string();
                if !line.contains(&cause) {
                    line = format!("{line}: {cause}");
                }
            }
            eprintln!("termdev: {line}");
            ExitCode::FAILURE
        }
    }
}
