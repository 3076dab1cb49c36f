//! Calibrated timing, power and aging models, and the run-time policy that
//! trades bit-width against clock frequency.
//!
//! Calibration rows follow the layout of a measured operating-point table
//! taken at a common throughput: each row's clock is the slowest one that
//! still sustains the common frame rate at that bit-width, and its latency
//! is the effective frame time at the reference (fastest) clock.

// negated comparisons below also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mac::BIT_WIDTHS;

/// Largest relative residual a calibration may leave on any row.
pub const MAX_RESIDUAL: f64 = 0.05;

/// Default relative shortfall tolerated when checking a throughput target.
/// Published operating points are rounded to three significant digits.
pub const DEFAULT_THROUGHPUT_SLACK: f64 = 0.005;

/// `cycles_per_frame(b) = c_sc * 2^b + c_ovh`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleModel {
    pub c_sc: f64,
    pub c_ovh: f64,
}

impl CycleModel {
    pub fn new(c_sc: f64, c_ovh: f64) -> Result<Self> {
        if !(c_sc > 0.0) || !(c_ovh >= 0.0) {
            return Err(Error::Calibration(format!(
                "cycle model needs c_sc > 0 and c_ovh >= 0, got {c_sc} and {c_ovh}"
            )));
        }
        Ok(Self { c_sc, c_ovh })
    }

    pub fn cycles_per_frame(&self, bits: u32) -> f64 {
        self.c_sc * f64::from(1u32 << bits) + self.c_ovh
    }
}

/// `P(f) = p_static + p_dyn * f`, `f` in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub p_static: f64,
    pub p_dyn: f64,
}

impl PowerModel {
    pub fn new(p_static: f64, p_dyn: f64) -> Result<Self> {
        if !(p_static >= 0.0) || !(p_dyn > 0.0) {
            return Err(Error::Calibration(format!(
                "power model needs p_static >= 0 and p_dyn > 0, got {p_static} and {p_dyn}"
            )));
        }
        Ok(Self { p_static, p_dyn })
    }

    pub fn power(&self, freq_mhz: f64) -> f64 {
        self.p_static + self.p_dyn * freq_mhz
    }
}

/// Piecewise-linear clock frequency over device lifetime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgingSchedule {
    /// `(years, MHz)`, years strictly increasing, MHz non-increasing.
    anchors: Vec<(f64, f64)>,
}

impl AgingSchedule {
    pub fn new(anchors: Vec<(f64, f64)>) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::InvalidSchedule("no anchors".into()));
        }
        for &(t, f) in &anchors {
            if !t.is_finite() || !(f > 0.0) {
                return Err(Error::InvalidSchedule(format!("bad anchor ({t}, {f})")));
            }
        }
        for w in anchors.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidSchedule("years must strictly increase".into()));
            }
            if w[1].1 > w[0].1 {
                return Err(Error::InvalidSchedule("frequency must not increase".into()));
            }
        }
        Ok(Self { anchors })
    }

    /// FPGA clock: 85.7 MHz fresh, 75.7 MHz after ten years.
    pub fn fpga() -> Self {
        Self {
            anchors: vec![(0.0, 85.7), (10.0, 75.7)],
        }
    }

    /// ASIC clock: 1205 MHz fresh, 1064 MHz after ten years.
    pub fn asic() -> Self {
        Self {
            anchors: vec![(0.0, 1205.0), (10.0, 1064.0)],
        }
    }

    pub fn anchors(&self) -> &[(f64, f64)] {
        &self.anchors
    }

    pub fn span(&self) -> (f64, f64) {
        (self.anchors[0].0, self.anchors[self.anchors.len() - 1].0)
    }
}

pub fn frequency_at_year(s: &AgingSchedule, years: f64) -> Result<f64> {
    let (start, end) = s.span();
    if !(years >= start && years <= end) {
        return Err(Error::OutsideSchedule { years, start, end });
    }
    let a = &s.anchors;
    if let Some(&(_, f)) = a.iter().find(|&&(t, _)| t == years) {
        return Ok(f);
    }
    let i = a.iter().position(|&(t, _)| t > years).unwrap_or(a.len() - 1);
    let ((t0, f0), (t1, f1)) = (a[i - 1], a[i]);
    Ok(f0 + (f1 - f0) * (years - t0) / (t1 - t0))
}

/// Frames per second at `bits` and `freq_mhz`.
pub fn throughput(cm: &CycleModel, bits: u32, freq_mhz: f64) -> f64 {
    freq_mhz * 1e6 / cm.cycles_per_frame(bits)
}

/// Largest supported bit-width reaching `target` frames/s at `freq_mhz`,
/// tolerating a relative shortfall of `slack`.
pub fn min_bitwidth_for_throughput(
    cm: &CycleModel,
    freq_mhz: f64,
    target: f64,
    slack: f64,
) -> Option<u32> {
    BIT_WIDTHS
        .iter()
        .copied()
        .find(|&b| throughput(cm, b, freq_mhz) >= target * (1.0 - slack))
}

/// Clock needed to sustain `target` frames/s at `bits`.
pub fn min_frequency_for_throughput(cm: &CycleModel, bits: u32, target: f64) -> f64 {
    target * cm.cycles_per_frame(bits) / 1e6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub bitwidth: u32,
    pub freq_mhz: f64,
    pub throughput_fps: f64,
    pub power_w: f64,
    pub latency_s: f64,
}

impl OperatingPoint {
    pub fn at(cm: &CycleModel, pm: &PowerModel, bits: u32, freq_mhz: f64) -> Self {
        let fps = throughput(cm, bits, freq_mhz);
        Self {
            bitwidth: bits,
            freq_mhz,
            throughput_fps: fps,
            power_w: pm.power(freq_mhz),
            latency_s: 1.0 / fps,
        }
    }
}

/// Everything the reconfiguration policy needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformModel {
    pub cycles: CycleModel,
    pub power: PowerModel,
    pub aging: AgingSchedule,
    /// Clock at which latencies are reported.
    pub reference_clock_mhz: f64,
    pub throughput_slack: f64,
}

impl PlatformModel {
    /// Policy: at the aged clock, keep the largest bit-width that still meets
    /// `target`.
    pub fn select_config(&self, years: f64, target: f64) -> Result<OperatingPoint> {
        let f = frequency_at_year(&self.aging, years)?;
        let b = min_bitwidth_for_throughput(&self.cycles, f, target, self.throughput_slack)
            .ok_or(Error::Infeasible {
                freq_mhz: f,
                target,
            })?;
        Ok(OperatingPoint::at(&self.cycles, &self.power, b, f))
    }

    /// Effective latency at the reference clock.
    pub fn reference_latency(&self, bits: u32) -> f64 {
        self.cycles.cycles_per_frame(bits) / (self.reference_clock_mhz * 1e6)
    }
}

/// One row of a measured operating-point table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub bitwidth: u32,
    pub freq_mhz: f64,
    pub power_w: f64,
    pub latency_s: f64,
}

/// The published five-row table (bit-width, MHz, W, s).
pub fn published_rows() -> Vec<CalibrationRow> {
    [
        (10, 85.7, 0.292, 0.139),
        (9, 43.8, 0.177, 0.071),
        (8, 22.9, 0.120, 0.037),
        (7, 12.4, 0.092, 0.020),
        (6, 7.1, 0.077, 0.012),
    ]
    .into_iter()
    .map(|(bitwidth, freq_mhz, power_w, latency_s)| CalibrationRow {
        bitwidth,
        freq_mhz,
        power_w,
        latency_s,
    })
    .collect()
}

/// Published PSNR column (dB) for bit-widths 10..=6, for side-by-side reports.
pub const PUBLISHED_PSNR_DB: [f64; 5] = [38.12, 34.68, 31.27, 28.70, 27.45];

/// Ordinary least squares for `y = slope * x + intercept`.
fn fit_line(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= f64::EPSILON * mx.abs().max(1.0) {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn relative(pred: f64, obs: f64) -> f64 {
    (pred - obs) / obs
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowResidual {
    pub bitwidth: u32,
    /// Relative error of the predicted cycle count (equivalently of the
    /// predicted clock for the common throughput).
    pub cycles: f64,
    /// Relative error of the predicted latency at the reference clock.
    pub latency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleCalibration {
    pub model: CycleModel,
    /// Frame rate shared by all rows.
    pub common_throughput: f64,
    pub reference_clock_mhz: f64,
    pub residuals: Vec<RowResidual>,
}

/// Fits the cycle model to `(bit-width, MHz, latency s)` rows.
///
/// The row with the fastest clock fixes the common throughput
/// `1 / latency` and the reference clock. Each row then contributes the
/// observation `cycles_b = f_b * 10^6 / throughput`, which reduces to
/// `latency * frequency * 10^6` on the reference row.
pub fn calibrate_cycles(rows: &[(u32, f64, f64)]) -> Result<CycleCalibration> {
    let (cal, worst) = fit_cycles(rows)?;
    if worst > MAX_RESIDUAL {
        return Err(Error::Calibration(format!(
            "cycle fit leaves a {:.1}% residual (limit {:.0}%): {:?}",
            worst * 100.0,
            MAX_RESIDUAL * 100.0,
            cal.residuals
        )));
    }
    Ok(cal)
}

/// The fit without the residual gate, for reporting.
pub fn fit_cycles(rows: &[(u32, f64, f64)]) -> Result<(CycleCalibration, f64)> {
    if rows.len() < 2 {
        return Err(Error::Calibration(format!(
            "need at least 2 rows, got {}",
            rows.len()
        )));
    }
    for &(b, f, l) in rows {
        if !(1..=24).contains(&b) || !(f > 0.0) || !(l > 0.0) {
            return Err(Error::Calibration(format!("bad row ({b}, {f}, {l})")));
        }
    }
    let &(_, f_ref, l_ref) = rows
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    let common = 1.0 / l_ref;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|&(b, f, _)| (f64::from(1u32 << b), f * 1e6 / common))
        .collect();
    let (c_sc, c_ovh) = fit_line(&points)
        .ok_or_else(|| Error::Calibration("rows need at least two distinct bit-widths".into()))?;
    let model = CycleModel::new(c_sc, c_ovh)?;
    let residuals: Vec<RowResidual> = rows
        .iter()
        .zip(&points)
        .map(|(&(b, _, l), &(_, cyc))| {
            let pred = model.cycles_per_frame(b);
            RowResidual {
                bitwidth: b,
                cycles: relative(pred, cyc),
                latency: relative(pred / (f_ref * 1e6), l),
            }
        })
        .collect();
    let worst = residuals
        .iter()
        .map(|r| r.cycles.abs().max(r.latency.abs()))
        .fold(0.0, f64::max);
    Ok((
        CycleCalibration {
            model,
            common_throughput: common,
            reference_clock_mhz: f_ref,
            residuals,
        },
        worst,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerCalibration {
    pub model: PowerModel,
    /// Relative residual per input row.
    pub residuals: Vec<f64>,
}

/// Affine least-squares fit to `(MHz, W)` rows.
pub fn calibrate_power(rows: &[(f64, f64)]) -> Result<PowerCalibration> {
    let (cal, worst) = fit_power(rows)?;
    if worst > MAX_RESIDUAL {
        return Err(Error::Calibration(format!(
            "power fit leaves a {:.1}% residual (limit {:.0}%): {:?}",
            worst * 100.0,
            MAX_RESIDUAL * 100.0,
            cal.residuals
        )));
    }
    Ok(cal)
}

pub fn fit_power(rows: &[(f64, f64)]) -> Result<(PowerCalibration, f64)> {
    if rows.len() < 2 {
        return Err(Error::Calibration(format!(
            "need at least 2 rows, got {}",
            rows.len()
        )));
    }
    let (p_dyn, p_static) = fit_line(rows)
        .ok_or_else(|| Error::Calibration("rows need at least two distinct frequencies".into()))?;
    let model = PowerModel::new(p_static, p_dyn)?;
    let residuals: Vec<f64> = rows
        .iter()
        .map(|&(f, w)| relative(model.power(f), w))
        .collect();
    let worst = residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
    Ok((PowerCalibration { model, residuals }, worst))
}

/// Calibrates both models from full table rows and attaches `aging`.
pub fn calibrate_platform(rows: &[CalibrationRow], aging: AgingSchedule) -> Result<PlatformModel> {
    let cyc: Vec<_> = rows
        .iter()
        .map(|r| (r.bitwidth, r.freq_mhz, r.latency_s))
        .collect();
    let pwr: Vec<_> = rows.iter().map(|r| (r.freq_mhz, r.power_w)).collect();
    let c = calibrate_cycles(&cyc)?;
    let p = calibrate_power(&pwr)?;
    Ok(PlatformModel {
        cycles: c.model,
        power: p.model,
        aging,
        reference_clock_mhz: c.reference_clock_mhz,
        throughput_slack: DEFAULT_THROUGHPUT_SLACK,
    })
}

/// Table rows a model predicts for `target` frames/s with latencies at
/// `reference_clock_mhz`.
pub fn predicted_rows(
    cm: &CycleModel,
    pm: &PowerModel,
    target: f64,
    reference_clock_mhz: f64,
) -> Vec<CalibrationRow> {
    BIT_WIDTHS
        .iter()
        .map(|&b| {
            let f = min_frequency_for_throughput(cm, b, target);
            CalibrationRow {
                bitwidth: b,
                freq_mhz: f,
                power_w: pm.power(f),
                latency_s: cm.cycles_per_frame(b) / (reference_clock_mhz * 1e6),
            }
        })
        .collect()
}
