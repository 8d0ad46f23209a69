//! `irtrack`: replay recorded trials, simulate the rig, fit calibrations and plot.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or parse error, 3 runtime error.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use irtrack::experiments::{
    export_scatter, load_trials, note_anomalies, run_simulated_experiment, scatter_csv, stats_report, write_svg,
    RigConfig, TrialTable,
};
use irtrack::sensor_sim::AmbientCondition;
use irtrack::tracker::{fit_calibration, FitMode};

#[derive(Debug, Parser)]
#[command(name = "irtrack", version, about = "Two-sensor infrared time-of-flight tracking toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recompute precision/accuracy statistics and scatter data for a trial file.
    Replay {
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = Report::Stats)]
        report: Report,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Also write `<stem>_scatter.csv` and `<stem>_scatter.svg` here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Report positions whose trials cluster around another position's actual.
        #[arg(long)]
        note_anomalies: bool,
    },
    /// Run the four-position protocol on the simulated rig and write a trial file.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
        trials: u32,
        #[arg(long, value_enum, default_value_t = Ambient::Dark)]
        ambient: Ambient,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's `seed`; 0 when neither is given.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit a per-axis calibration from a trial file's estimates and actuals.
    Calibrate {
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Offset)]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw the trial scatter plot as SVG.
    Plot {
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Report {
    Stats,
    Scatter,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Ambient {
    Dark,
    Lit,
}

impl From<Ambient> for AmbientCondition {
    fn from(a: Ambient) -> Self {
        match a {
            Ambient::Dark => AmbientCondition::Dark,
            Ambient::Lit => AmbientCondition::ArtificialLight,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Offset,
    Affine,
}

/// Error carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn data(e: impl fmt::Display) -> Self {
        Self {
            code: 2,
            message: e.to_string(),
        }
    }

    fn runtime(e: impl fmt::Display) -> Self {
        Self {
            code: 3,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Replay {
            data,
            report,
            format,
            out_dir,
            note_anomalies,
        } => replay(&data, report, format, out_dir.as_deref(), note_anomalies),
        Command::Simulate {
            config,
            trials,
            ambient,
            out,
            seed,
        } => simulate(&config, trials as usize, ambient.into(), &out, seed),
        Command::Calibrate { data, mode, out } => calibrate(&data, mode, out.as_deref()),
        Command::Plot { data, out } => plot(&data, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("irtrack: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(data: &Path) -> Result<TrialTable, Failure> {
    load_trials(data).map_err(Failure::data)
}

fn replay(data: &Path, report: Report, format: Format, out_dir: Option<&Path>, anomalies: bool) -> CmdResult {
    let table = load(data)?;
    let mut out = String::new();
    if matches!(report, Report::Stats | Report::Both) {
        let stats = stats_report(&table).map_err(Failure::data)?;
        out.push_str(&match format {
            Format::Text => stats.to_text(),
            Format::Csv => stats.to_csv(),
        });
    }
    if matches!(report, Report::Scatter | Report::Both) {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&scatter_csv(&table));
        if let Some(dir) = out_dir {
            let files = export_scatter(&table, dir, &table.experiment_id).map_err(Failure::runtime)?;
            for f in files {
                eprintln!("wrote {}", f.display());
            }
        }
    }
    if anomalies {
        for note in note_anomalies(&table) {
            eprintln!("note: {note}");
        }
    }
    print(&out)
}

fn simulate(config: &Path, trials: usize, condition: AmbientCondition, out: &Path, seed: Option<u64>) -> CmdResult {
    let cfg = RigConfig::load(config).map_err(Failure::data)?;
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let run = run_simulated_experiment(&cfg.rig, &cfg.positions, trials, condition, &cfg.noise, seed)
        .map_err(Failure::runtime)?;
    run.table.save(out).map_err(Failure::runtime)?;
    eprintln!("wrote {}", out.display());
    for f in &run.failures {
        eprintln!("trial failure: position {} trial {}: {}", f.position, f.trial, f.reason);
    }
    let lost = run.lost_positions();
    if !lost.is_empty() {
        return Err(Failure::runtime(format!("every trial failed at position(s) {lost:?}")));
    }

    let stats = stats_report(&run.table).map_err(Failure::runtime)?;
    let mut text = format!(
        "# seed: {seed}\n# ambient: {}\n# trials: {trials}\n# failed trials: {}\n",
        condition.label(),
        run.failures.len()
    );
    text.push_str(&stats.to_text());
    print(&text)
}

fn calibrate(data: &Path, mode: Mode, out: Option<&Path>) -> CmdResult {
    let table = load(data)?;
    let mode = match mode {
        Mode::Offset => FitMode::OffsetOnly,
        Mode::Affine => FitMode::Affine,
    };
    let fit = fit_calibration(&table.pairs(), mode).map_err(Failure::data)?;
    if fit.scale_fallback {
        eprintln!("warning: scale not identifiable on at least one axis; fell back to offset-only");
    }
    let before = stats_report(&table).map_err(Failure::data)?;
    let after = stats_report(&table.map_estimates(|p| fit.model.apply(p))).map_err(Failure::data)?;
    if let Some(path) = out {
        std::fs::write(path, fit.model.to_kv_string())
            .map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
        eprintln!("wrote {}", path.display());
    }
    print(&format!(
        "{}before avg_percent_error: {:.2}%\nafter avg_percent_error: {:.2}%\n",
        fit.model.to_kv_string(),
        before.avg_percent_error,
        after.avg_percent_error
    ))
}

fn plot(data: &Path, out: &Path) -> CmdResult {
    let table = load(data)?;
    write_svg(&table, out).map_err(Failure::runtime)?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn print(s: &str) -> CmdResult {
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(s.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(Failure::runtime)
}
