//! Fibonacci linear-feedback shift registers.
//!
//! The register shifts left; the feedback bit is the XOR of the tapped bits
//! (taps are 1-indexed from the LSB, so tap `w` is the MSB of a `w`-bit
//! register) and enters at the LSB.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximal-length Fibonacci taps for register widths 3..=16.
const TAP_TABLE: [&[u32]; 14] = [
    &[3, 2],
    &[4, 3],
    &[5, 3],
    &[6, 5],
    &[7, 6],
    &[8, 6, 5, 4],
    &[9, 5],
    &[10, 7],
    &[11, 9],
    &[12, 6, 4, 1],
    &[13, 4, 3, 1],
    &[14, 5, 3, 1],
    &[15, 14],
    &[16, 15, 13, 4],
];

pub const MIN_WIDTH: u32 = 3;
pub const MAX_WIDTH: u32 = 16;

/// Default taps for a register of `width` bits.
pub fn maximal_taps(width: u32) -> Result<&'static [u32]> {
    if !(MIN_WIDTH..=MAX_WIDTH).contains(&width) {
        return Err(Error::UnsupportedLfsrWidth(width));
    }
    Ok(TAP_TABLE[(width - MIN_WIDTH) as usize])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LfsrConfig {
    pub width: u32,
    pub taps: Vec<u32>,
    pub seed: u32,
}

impl LfsrConfig {
    /// Config with the bundled maximal-length taps.
    pub fn maximal(width: u32, seed: u32) -> Result<Self> {
        let taps = maximal_taps(width)?.to_vec();
        let cfg = Self { width, taps, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.width > 31 {
            return Err(Error::UnsupportedLfsrWidth(self.width));
        }
        if self.seed == 0 {
            return Err(Error::LfsrLockUp);
        }
        if self.seed >= self.period_bound() {
            return Err(Error::OutOfRange {
                value: self.seed.into(),
                width: self.width,
            });
        }
        if let Some(&t) = self.taps.iter().find(|&&t| t == 0 || t > self.width) {
            return Err(Error::OutOfRange {
                value: t.into(),
                width: self.width,
            });
        }
        Ok(())
    }

    fn period_bound(&self) -> u32 {
        1 << self.width
    }

    /// Period of a maximal-length sequence, `2^width - 1`.
    pub fn period(&self) -> u32 {
        self.period_bound() - 1
    }
}

/// One register step from `state`.
pub fn lfsr_step(state: u32, cfg: &LfsrConfig) -> Result<u32> {
    if state == 0 {
        return Err(Error::LfsrLockUp);
    }
    let mask = cfg.period_bound() - 1;
    if state > mask {
        return Err(Error::OutOfRange {
            value: state.into(),
            width: cfg.width,
        });
    }
    let feedback = cfg
        .taps
        .iter()
        .fold(0, |acc, &t| acc ^ ((state >> (t - 1)) & 1));
    Ok(((state << 1) | feedback) & mask)
}

/// Iterator over register states, starting with the seed.
#[derive(Debug, Clone)]
pub struct Lfsr {
    cfg: LfsrConfig,
    state: u32,
}

impl Lfsr {
    pub fn new(cfg: LfsrConfig) -> Result<Self> {
        cfg.validate()?;
        let state = cfg.seed;
        Ok(Self { cfg, state })
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    pub fn config(&self) -> &LfsrConfig {
        &self.cfg
    }
}

impl Iterator for Lfsr {
    type Item = u32;

    /// Yields the current state, then steps. A custom tap set that reaches the
    /// all-zero state ends the iteration.
    fn next(&mut self) -> Option<u32> {
        if self.state == 0 {
            return None;
        }
        let out = self.state;
        self.state = lfsr_step(self.state, &self.cfg).unwrap_or(0);
        Some(out)
    }
}
