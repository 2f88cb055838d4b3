use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use landing_cli::detect::{cmd_detect, write_frame_rows};
use landing_cli::eval::cmd_eval;
use landing_cli::plot::cmd_plot;
use landing_cli::render::cmd_render;
use landing_cli::train::{cmd_train, read_metrics};
use landing_cli::{CliError, CliResult, RunConfig};
use landing_core::mission::{ObservationMode, Outcome};

#[derive(Parser)]
#[command(name = "landing", version, about = "Train and evaluate a UAV boat-landing agent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Mode {
    Vision,
    GroundTruth,
}

impl From<Mode> for ObservationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Vision => ObservationMode::Vision,
            Mode::GroundTruth => ObservationMode::GroundTruth,
        }
    }
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::load_or_default(self.config.as_deref())?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent; writes metrics.csv and checkpoints.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "runs/train")]
        out: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Overrides the configured episode count.
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Evaluate a checkpoint over seeded tests and print the success table.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value = "runs/eval")]
        out: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Overrides the configured number of tests.
        #[arg(long)]
        tests: Option<usize>,
    },
    /// Run the detector over a directory of PGM frames.
    Detect {
        frame_dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump consecutive frames of a seeded approach as PGM files.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "runs/frames")]
        out: PathBuf,
        #[arg(long, default_value_t = 30)]
        frames: usize,
    },
    /// Plot moving averages of a metrics CSV as SVG.
    Plot {
        metrics_csv: PathBuf,
        #[arg(long, default_value_t = 10)]
        window: usize,
        #[arg(long, default_value = "metrics.svg")]
        out: PathBuf,
    },
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train {
            common,
            out,
            mode,
            episodes,
        } => {
            let mut cfg = common.load()?;
            if let Some(m) = mode {
                cfg.train_mode = m.into();
            }
            if let Some(n) = episodes {
                cfg.episodes = n;
            }
            let (mut landed, mut reward) = (0usize, 0.0);
            let summary = cmd_train(&cfg, &out, |r| {
                landed += usize::from(r.outcome == Outcome::Landed);
                reward += r.total_reward;
                if r.episode_index % 10 == 0 {
                    eprintln!(
                        "episode {:>5}: landed {landed}/10, mean reward {:.1}",
                        r.episode_index,
                        reward / 10.0
                    );
                    landed = 0;
                    reward = 0.0;
                }
            })?;
            println!(
                "trained {} episodes ({} landings); metrics {}, checkpoint {}",
                summary.episodes.len(),
                summary.landings(),
                summary.metrics.display(),
                summary.checkpoint.display()
            );
        }
        Command::Eval {
            common,
            checkpoint,
            out,
            mode,
            tests,
        } => {
            let mut cfg = common.load()?;
            if let Some(n) = tests {
                cfg.eval_tests = n;
            }
            let mode = mode.map_or(cfg.eval_mode, Into::into);
            let summary = cmd_eval(&checkpoint, &cfg, mode, &out)?;
            println!("{}", summary.table);
            println!("per-test results: {}", summary.tests_csv.display());
        }
        Command::Detect { frame_dir, config, out } => {
            let cfg = RunConfig::load_or_default(config.as_deref())?;
            let report = cmd_detect(&frame_dir, &cfg.pipeline)?;
            for s in &report.skipped {
                eprintln!("skipped {}: {}", s.path.display(), s.error);
            }
            match out {
                Some(path) => {
                    let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
                    write_frame_rows(file, &report.rows).map_err(|e| CliError::Csv { path, source: e })?;
                }
                None => write_frame_rows(io::stdout().lock(), &report.rows).map_err(|e| CliError::Csv {
                    path: "<stdout>".into(),
                    source: e,
                })?,
            }
        }
        Command::Render { common, out, frames } => {
            let cfg = common.load()?;
            let written = cmd_render(&cfg, frames, &out)?;
            println!("wrote {} frames to {}", written.len(), out.display());
        }
        Command::Plot {
            metrics_csv,
            window,
            out,
        } => {
            let rows = read_metrics(&metrics_csv)?;
            let svg = cmd_plot(&rows, window)?;
            write_file(&out, &svg)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
