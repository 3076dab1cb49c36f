use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use arsc_cli::commands::{self, to_csv};
use arsc_cli::{config, mask, pgm};
use arsc_core::accuracy::DEFAULT_SEED;
use arsc_core::pipeline::{reference_image, DEFAULT_PARALLELISM};
use arsc_core::platform::{AgingSchedule, MAX_RESIDUAL};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "arsc", version, about = "Accuracy-reconfigurable stochastic computing simulator")]
struct Cli {
    /// Write the CSV report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Seed for the conventional LFSR multiplier.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u32,
    /// Worker threads for block processing (results do not depend on it).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Fpga,
    Asic,
}

#[derive(Subcommand)]
enum Cmd {
    /// DCT, mask and IDCT an image through the SC data path.
    Compress {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(6..=10))]
        bits: u32,
        /// lowpass:K, allpass, or a file with an 8x8 grid of 0/1.
        #[arg(long, default_value = "lowpass:4")]
        mask: String,
        #[arg(long)]
        platform: Option<PathBuf>,
    },
    /// Operating-point table for bit-widths 10..6 at a target throughput.
    Sweep {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        platform: PathBuf,
        /// Frames per second.
        #[arg(long)]
        target: f64,
        #[arg(long, default_value = "lowpass:4")]
        mask: String,
    },
    /// Chosen bit-width per year as the clock ages.
    Aging {
        #[arg(long)]
        platform: PathBuf,
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = 10)]
        years: u32,
    },
    /// Exhaustive multiplier check for widths 3..=max-n.
    VerifyMul {
        #[arg(long, value_parser = clap::value_parser!(u32).range(3..=10))]
        max_n: u32,
    },
    /// Fit cycle and power models to measured rows and write a platform config.
    Calibrate {
        #[arg(long)]
        rows: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Preset::Fpga)]
        aging: Preset,
        #[arg(long, default_value_t = DEFAULT_PARALLELISM)]
        parallelism: u64,
    },
    /// Write the built-in 256x256 reference image.
    GenReference {
        #[arg(long)]
        out: PathBuf,
    },
}

fn emit(report: Option<&Path>, csv: &[u8]) -> Result<()> {
    match report {
        Some(p) => fs::write(p, csv).with_context(|| format!("writing report {}", p.display())),
        None => Ok(std::io::stdout().write_all(csv)?),
    }
}

fn run(cli: Cli) -> Result<()> {
    let report = cli.report.as_deref();
    match cli.cmd {
        Cmd::Compress {
            input,
            out,
            bits,
            mask,
            platform,
        } => {
            let mask = mask::parse(&mask)?;
            let platform = platform.as_deref().map(config::load).transpose()?;
            let row = commands::compress(&input, &out, bits, &mask, platform.as_ref(), cli.threads)?;
            println!("psnr_db {}", row.psnr_db);
            println!("psnr_ref_db {}", row.psnr_ref_db);
            println!("cycles {}", row.cycles);
            println!("clamps {}", row.clamps);
            if let Some(l) = row.latency_s {
                println!("latency_s {l}");
            }
            if let Some(p) = report {
                emit(Some(p), &to_csv(&[row])?)?;
            }
        }
        Cmd::Sweep {
            input,
            platform,
            target,
            mask,
        } => {
            let mask = mask::parse(&mask)?;
            let platform = config::load(&platform)?;
            let img = pgm::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let rows = commands::sweep_image(&img, &platform, target, &mask, cli.threads)?;
            emit(report, &to_csv(&rows)?)?;
        }
        Cmd::Aging {
            platform,
            target,
            years,
        } => {
            let platform = config::load(&platform)?;
            let rows = commands::aging(&platform.model, target, years)?;
            emit(report, &to_csv(&rows)?)?;
        }
        Cmd::VerifyMul { max_n } => {
            let rows = commands::verify_mul(max_n, cli.seed)?;
            emit(report, &to_csv(&rows)?)?;
            let bad: usize = rows.iter().map(|r| r.identity_violations).sum();
            if bad > 0 {
                bail!("{bad} multiplier identity violations");
            }
        }
        Cmd::Calibrate {
            rows,
            out,
            aging,
            parallelism,
        } => {
            let data = commands::read_rows(&rows)?;
            let schedule = match aging {
                Preset::Fpga => AgingSchedule::fpga(),
                Preset::Asic => AgingSchedule::asic(),
            };
            let cal = commands::calibrate(&data, schedule, parallelism)?;
            emit(report, &to_csv(&cal.residuals)?)?;
            if !commands::within_limit(cal.worst) {
                bail!(
                    "worst residual {:.2}% exceeds {:.0}%, no config written",
                    cal.worst * 100.0,
                    MAX_RESIDUAL * 100.0
                );
            }
            let text = config::to_toml(&cal.platform, data)?;
            fs::write(&out, text).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("worst residual {:.2}%, wrote {}", cal.worst * 100.0, out.display());
        }
        Cmd::GenReference { out } => {
            pgm::write(&out, &reference_image())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
