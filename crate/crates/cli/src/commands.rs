//! Subcommand bodies. Each returns its report rows; the binary decides where
//! they go.

use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use arsc_core::accuracy::{sweep, SweepStats};
use arsc_core::dct::FrequencyMask;
use arsc_core::mac::BIT_WIDTHS;
use arsc_core::pipeline::{process_image_with, GrayImage, PipelineOptions, PipelineReport};
use arsc_core::platform::{
    fit_cycles, fit_power, frequency_at_year, min_bitwidth_for_throughput, predicted_rows,
    throughput, AgingSchedule, CalibrationRow, OperatingPoint, PlatformModel,
    DEFAULT_THROUGHPUT_SLACK, MAX_RESIDUAL,
};
use arsc_core::AccuracySelect;
use serde::{Deserialize, Serialize};

use crate::config::Platform;
use crate::pgm;

pub const MIN_VERIFY_N: u32 = 3;
pub const MAX_VERIFY_N: u32 = 10;

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner()?)
}

fn select(bits: u32) -> Result<AccuracySelect> {
    AccuracySelect::from_bits(bits).with_context(|| format!("bit-width {bits} not in 6..=10"))
}

fn options(platform: Option<&Platform>, threads: usize) -> PipelineOptions {
    PipelineOptions {
        parallelism: platform.map_or(PipelineOptions::default().parallelism, |p| p.parallelism),
        threads: threads.max(1),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressRow {
    pub bitwidth: u32,
    /// Against the input image.
    pub psnr_db: f64,
    /// Against the floating-point pipeline output.
    pub psnr_ref_db: f64,
    pub cycles: u64,
    pub cycles_data: u64,
    pub clamps: u64,
    /// Frame time at the platform's reference clock.
    pub latency_s: Option<f64>,
    pub power_w: Option<f64>,
}

pub fn compress_image(
    img: &GrayImage,
    bits: u32,
    mask: &FrequencyMask,
    platform: Option<&Platform>,
    threads: usize,
) -> Result<(PipelineReport, CompressRow)> {
    let rep = process_image_with(img, select(bits)?, mask, &options(platform, threads))?;
    let clock = platform.map(|p| p.model.reference_clock_mhz);
    let row = CompressRow {
        bitwidth: bits,
        psnr_db: rep.psnr_vs_input,
        psnr_ref_db: rep.psnr_vs_reference,
        cycles: rep.total_cycles_fixed,
        cycles_data: rep.total_cycles_data,
        clamps: rep.clamp_count,
        latency_s: clock.map(|f| rep.total_cycles_fixed as f64 / (f * 1e6)),
        power_w: platform.map(|p| p.model.power.power(p.model.reference_clock_mhz)),
    };
    Ok((rep, row))
}

pub fn compress(
    input: &Path,
    output: &Path,
    bits: u32,
    mask: &FrequencyMask,
    platform: Option<&Platform>,
    threads: usize,
) -> Result<CompressRow> {
    let img = pgm::read(input).with_context(|| format!("reading {}", input.display()))?;
    let (rep, row) = compress_image(&img, bits, mask, platform, threads)?;
    pgm::write(output, &rep.output).with_context(|| format!("writing {}", output.display()))?;
    Ok(row)
}

/// Column set of the operating-point table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub bitwidth: u32,
    /// Clock needed for the target throughput.
    pub freq_mhz: f64,
    pub power_w: f64,
    /// Against the floating-point pipeline output.
    pub psnr_db: f64,
    /// Frame time at the reference clock.
    pub latency_s: f64,
    pub throughput_fps: f64,
}

pub fn sweep_image(
    img: &GrayImage,
    platform: &Platform,
    target: f64,
    mask: &FrequencyMask,
    threads: usize,
) -> Result<Vec<SweepRow>> {
    ensure!(target > 0.0, "target throughput must be positive");
    let m = &platform.model;
    let opts = options(Some(platform), threads);
    predicted_rows(&m.cycles, &m.power, target, m.reference_clock_mhz)
        .into_iter()
        .map(|r| {
            let rep = process_image_with(img, select(r.bitwidth)?, mask, &opts)?;
            Ok(SweepRow {
                bitwidth: r.bitwidth,
                freq_mhz: r.freq_mhz,
                power_w: r.power_w,
                psnr_db: rep.psnr_vs_reference,
                latency_s: r.latency_s,
                throughput_fps: throughput(&m.cycles, r.bitwidth, r.freq_mhz),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgingRow {
    pub year: u32,
    pub freq_mhz: f64,
    /// Empty when no bit-width meets the target.
    pub bitwidth: Option<u32>,
    pub throughput_fps: f64,
    pub power_w: f64,
    pub latency_s: f64,
    pub feasible: bool,
}

pub fn aging(model: &PlatformModel, target: f64, years: u32) -> Result<Vec<AgingRow>> {
    ensure!(target > 0.0, "target throughput must be positive");
    let lowest = *BIT_WIDTHS.last().expect("non-empty");
    (0..=years)
        .map(|y| {
            let f = frequency_at_year(&model.aging, f64::from(y))?;
            let chosen = min_bitwidth_for_throughput(&model.cycles, f, target, model.throughput_slack);
            let op = OperatingPoint::at(&model.cycles, &model.power, chosen.unwrap_or(lowest), f);
            Ok(AgingRow {
                year: y,
                freq_mhz: f,
                bitwidth: chosen,
                throughput_fps: op.throughput_fps,
                power_w: op.power_w,
                latency_s: op.latency_s,
                feasible: chosen.is_some(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub n: u32,
    pub pairs: usize,
    pub identity_violations: usize,
    pub cbsc_max_abs_err: f64,
    pub cbsc_mean_abs_err: f64,
    pub conventional_mean_abs_err: f64,
}

impl From<SweepStats> for VerifyRow {
    fn from(s: SweepStats) -> Self {
        Self {
            n: s.n,
            pairs: s.pairs,
            identity_violations: s.identity_violations,
            cbsc_max_abs_err: s.cbsc_max_abs_err,
            cbsc_mean_abs_err: s.cbsc_mean_abs_err,
            conventional_mean_abs_err: s.conventional_mean_abs_err,
        }
    }
}

pub fn verify_mul(max_n: u32, seed: u32) -> Result<Vec<VerifyRow>> {
    ensure!(
        (MIN_VERIFY_N..=MAX_VERIFY_N).contains(&max_n),
        "max-n must be in {MIN_VERIFY_N}..={MAX_VERIFY_N}"
    );
    (MIN_VERIFY_N..=max_n)
        .map(|n| Ok(sweep(n, seed)?.into()))
        .collect()
}

/// Input row for `calibrate`; `psnr_db` is accepted and ignored.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RowRecord {
    pub bitwidth: u32,
    pub freq_mhz: f64,
    pub power_w: f64,
    pub latency_s: f64,
    #[serde(default)]
    pub psnr_db: Option<f64>,
}

pub fn read_rows(path: &Path) -> Result<Vec<CalibrationRow>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_rows(&text).with_context(|| format!("in rows file {}", path.display()))
}

pub fn parse_rows(text: &str) -> Result<Vec<CalibrationRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    rdr.deserialize::<RowRecord>()
        .map(|r| {
            let r = r?;
            Ok(CalibrationRow {
                bitwidth: r.bitwidth,
                freq_mhz: r.freq_mhz,
                power_w: r.power_w,
                latency_s: r.latency_s,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRow {
    pub bitwidth: u32,
    pub cycles_residual: f64,
    pub latency_residual: f64,
    pub power_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibrated {
    pub platform: Platform,
    pub residuals: Vec<ResidualRow>,
    pub worst: f64,
}

/// Fits both models. Returns the fit even when residuals are over the
/// limit; callers check `worst`.
pub fn calibrate(rows: &[CalibrationRow], aging: AgingSchedule, parallelism: u64) -> Result<Calibrated> {
    if rows.len() < 2 {
        bail!("calibration needs at least 2 rows, got {}", rows.len());
    }
    let cyc: Vec<_> = rows.iter().map(|r| (r.bitwidth, r.freq_mhz, r.latency_s)).collect();
    let pwr: Vec<_> = rows.iter().map(|r| (r.freq_mhz, r.power_w)).collect();
    let (c, wc) = fit_cycles(&cyc)?;
    let (p, wp) = fit_power(&pwr)?;
    let residuals = c
        .residuals
        .iter()
        .zip(&p.residuals)
        .map(|(r, &pr)| ResidualRow {
            bitwidth: r.bitwidth,
            cycles_residual: r.cycles,
            latency_residual: r.latency,
            power_residual: pr,
        })
        .collect();
    Ok(Calibrated {
        platform: Platform {
            model: PlatformModel {
                cycles: c.model,
                power: p.model,
                aging,
                reference_clock_mhz: c.reference_clock_mhz,
                throughput_slack: DEFAULT_THROUGHPUT_SLACK,
            },
            parallelism,
        },
        residuals,
        worst: wc.max(wp),
    })
}

pub fn within_limit(worst: f64) -> bool {
    worst <= MAX_RESIDUAL
}
