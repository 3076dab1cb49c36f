//! Platform configuration file (TOML).
//!
//! ```toml
//! reference_clock_mhz = 85.7      # clock at which latencies are reported
//! parallelism = 8                 # blocks processed concurrently in hardware
//! throughput_slack = 0.005        # tolerated relative shortfall vs target
//!
//! [cycles]                        # cycles/frame = c_sc * 2^b + c_ovh
//! c_sc = 11374.9
//! c_ovh = 265258.3
//!
//! [power]                         # W = p_static_w + p_dyn_w_per_mhz * MHz
//! p_static_w = 0.05766
//! p_dyn_w_per_mhz = 0.002732
//!
//! [aging]                         # either a preset ("fpga", "asic") ...
//! anchors = [[0.0, 85.7], [10.0, 75.7]]   # ... or (years, MHz) pairs
//!
//! [[rows]]                        # optional measured operating points
//! bitwidth = 10
//! freq_mhz = 85.7
//! power_w = 0.292
//! latency_s = 0.139
//! ```
//!
//! If `[cycles]` or `[power]` is missing the models are fitted from `rows`.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use arsc_core::pipeline::DEFAULT_PARALLELISM;
use arsc_core::platform::{
    calibrate_cycles, calibrate_power, AgingSchedule, CalibrationRow, CycleModel, PlatformModel,
    PowerModel, DEFAULT_THROUGHPUT_SLACK,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyclesSection {
    pub c_sc: f64,
    pub c_ovh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSection {
    pub p_static_w: f64,
    pub p_dyn_w_per_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgingSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchors: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_clock_mhz: Option<f64>,
    #[serde(default = "default_parallelism")]
    pub parallelism: u64,
    #[serde(default = "default_slack")]
    pub throughput_slack: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycles: Option<CyclesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerSection>,
    #[serde(default)]
    pub aging: AgingSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<CalibrationRow>,
}

fn default_parallelism() -> u64 {
    DEFAULT_PARALLELISM
}

fn default_slack() -> f64 {
    DEFAULT_THROUGHPUT_SLACK
}

/// A loaded configuration ready for queries.
#[derive(Debug, Clone, PartialEq)]
pub struct Platform {
    pub model: PlatformModel,
    pub parallelism: u64,
}

impl AgingSection {
    fn schedule(&self) -> Result<AgingSchedule> {
        match (&self.preset, &self.anchors) {
            (Some(_), Some(_)) => bail!("aging: give either preset or anchors, not both"),
            (Some(p), None) => match p.as_str() {
                "fpga" => Ok(AgingSchedule::fpga()),
                "asic" => Ok(AgingSchedule::asic()),
                other => bail!("aging: unknown preset {other:?}"),
            },
            (None, Some(a)) => Ok(AgingSchedule::new(a.clone())?),
            (None, None) => Ok(AgingSchedule::fpga()),
        }
    }
}

impl PlatformFile {
    pub fn into_platform(self) -> Result<Platform> {
        let aging = self.aging.schedule()?;
        let cyc_rows: Vec<_> = self
            .rows
            .iter()
            .map(|r| (r.bitwidth, r.freq_mhz, r.latency_s))
            .collect();
        let fitted = if self.cycles.is_none() || self.reference_clock_mhz.is_none() {
            if self.rows.is_empty() {
                bail!("config needs [cycles] and reference_clock_mhz, or calibration rows");
            }
            Some(calibrate_cycles(&cyc_rows).context("fitting cycle model")?)
        } else {
            None
        };
        let cycles = match (&self.cycles, &fitted) {
            (Some(c), _) => CycleModel::new(c.c_sc, c.c_ovh)?,
            (None, Some(f)) => f.model,
            (None, None) => unreachable!(),
        };
        let reference_clock_mhz = match (self.reference_clock_mhz, &fitted) {
            (Some(f), _) => f,
            (None, Some(c)) => c.reference_clock_mhz,
            (None, None) => unreachable!(),
        };
        let power = match &self.power {
            Some(p) => PowerModel::new(p.p_static_w, p.p_dyn_w_per_mhz)?,
            None => {
                if self.rows.is_empty() {
                    bail!("config needs [power] or calibration rows");
                }
                let pts: Vec<_> = self.rows.iter().map(|r| (r.freq_mhz, r.power_w)).collect();
                calibrate_power(&pts).context("fitting power model")?.model
            }
        };
        if reference_clock_mhz.is_nan() || reference_clock_mhz <= 0.0 {
            bail!("reference_clock_mhz must be positive");
        }
        if self.parallelism == 0 {
            bail!("parallelism must be at least 1");
        }
        if !(0.0..1.0).contains(&self.throughput_slack) {
            bail!("throughput_slack must be in [0, 1)");
        }
        Ok(Platform {
            model: PlatformModel {
                cycles,
                power,
                aging,
                reference_clock_mhz,
                throughput_slack: self.throughput_slack,
            },
            parallelism: self.parallelism,
        })
    }

    pub fn from_platform(p: &Platform, rows: Vec<CalibrationRow>) -> Self {
        let m = &p.model;
        Self {
            reference_clock_mhz: Some(m.reference_clock_mhz),
            parallelism: p.parallelism,
            throughput_slack: m.throughput_slack,
            cycles: Some(CyclesSection {
                c_sc: m.cycles.c_sc,
                c_ovh: m.cycles.c_ovh,
            }),
            power: Some(PowerSection {
                p_static_w: m.power.p_static,
                p_dyn_w_per_mhz: m.power.p_dyn,
            }),
            aging: AgingSection {
                preset: None,
                anchors: Some(m.aging.anchors().to_vec()),
            },
            rows,
        }
    }
}

pub fn parse(text: &str) -> Result<Platform> {
    let file: PlatformFile = toml::from_str(text)?;
    file.into_platform()
}

pub fn load(path: &Path) -> Result<Platform> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("in platform config {}", path.display()))
}

pub fn to_toml(p: &Platform, rows: Vec<CalibrationRow>) -> Result<String> {
    Ok(toml::to_string(&PlatformFile::from_platform(p, rows))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use arsc_core::platform::{calibrate_platform, published_rows};

    #[test]
    fn rows_only_config_matches_direct_calibration() {
        let mut text = String::from("[aging]\npreset = \"fpga\"\n");
        for r in published_rows() {
            text += &format!(
                "[[rows]]\nbitwidth = {}\nfreq_mhz = {}\npower_w = {}\nlatency_s = {}\n",
                r.bitwidth, r.freq_mhz, r.power_w, r.latency_s
            );
        }
        let p = parse(&text).unwrap();
        let direct = calibrate_platform(&published_rows(), AgingSchedule::fpga()).unwrap();
        assert_eq!(p.model, direct);
        assert_eq!(p.parallelism, DEFAULT_PARALLELISM);
    }

    #[test]
    fn serialized_config_reloads() {
        let direct = calibrate_platform(&published_rows(), AgingSchedule::asic()).unwrap();
        let p = Platform {
            model: direct,
            parallelism: 4,
        };
        let text = to_toml(&p, published_rows()).unwrap();
        assert_eq!(parse(&text).unwrap(), p);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(parse("").is_err());
        assert!(parse("reference_clock_mhz = 1.0\n[cycles]\nc_sc = 1.0\nc_ovh = 0.0\n").is_err());
        assert!(parse("bogus = 1\n").is_err());
        let ok = "reference_clock_mhz = 1.0\n[cycles]\nc_sc = 1.0\nc_ovh = 0.0\n\
                  [power]\np_static_w = 0.1\np_dyn_w_per_mhz = 0.01\n";
        assert!(parse(ok).is_ok());
        assert!(parse(&format!("{ok}[aging]\npreset = \"moon\"\n")).is_err());
        assert!(parse(&format!("{ok}[aging]\nanchors = [[0.0, 10.0], [5.0, 12.0]]\n")).is_err());
    }
}
