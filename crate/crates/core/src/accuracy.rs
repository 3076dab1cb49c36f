//! Exhaustive accuracy sweeps comparing the counter-based multiplier against
//! the conventional LFSR/AND multiplier.

use serde::Serialize;

use crate::cbsc::{cbsc_multiply, sng_deterministic, unary_gen};
use crate::error::Result;
use crate::fixed::UnsignedFixed;
use crate::lfsr::LfsrConfig;
use crate::stream::{and_multiply, sng_conventional, stream_to_binary};

/// Seed used for the conventional multiplier unless overridden.
pub const DEFAULT_SEED: u32 = 1;

/// LFSR pair for a conventional multiplier of width `n`: the operand stream
/// uses `seed`, the weight stream uses its bitwise complement (1 if that is 0).
pub fn conventional_lfsrs(n: u32, seed: u32) -> Result<(LfsrConfig, LfsrConfig)> {
    let mask = (1u32 << n) - 1;
    let seed_x = seed & mask;
    let seed_w = match !seed & mask {
        0 => 1,
        s => s,
    };
    Ok((
        LfsrConfig::maximal(n, seed_x)?,
        LfsrConfig::maximal(n, seed_w)?,
    ))
}

/// Conventional SC multiply: two comparator SNGs, an AND gate and a counter
/// over `2^n` cycles. Returns the counter value.
pub fn conventional_multiply(
    x: UnsignedFixed,
    w_s: u32,
    cfg_x: &LfsrConfig,
    cfg_w: &LfsrConfig,
) -> Result<u32> {
    let n = x.width();
    let len = x.scale() as usize;
    let sx = sng_conventional(x, len, cfg_x)?;
    let sw = sng_conventional(UnsignedFixed::weight(n, w_s)?, len, cfg_w)?;
    Ok(stream_to_binary(&and_multiply(&sx, &sw)?) as u32)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepStats {
    pub n: u32,
    pub pairs: usize,
    /// Pairs where the counter formulation disagreed with the gate-level one.
    pub identity_violations: usize,
    pub cbsc_max_abs_err: f64,
    pub cbsc_mean_abs_err: f64,
    pub conventional_mean_abs_err: f64,
}

/// Absolute error of a counter value `p` (scale `2^n`) against the exact
/// product `x * w / 2^{2n}`.
fn abs_err(n: u32, p: u32, x: u32, w: u32) -> f64 {
    let scale = f64::from(1u32 << n);
    (f64::from(p) / scale - f64::from(x) * f64::from(w) / (scale * scale)).abs()
}

/// Every `(x, w_s)` pair at width `n`: checks the counter/gate identity and
/// collects error statistics for both multipliers.
pub fn sweep(n: u32, seed: u32) -> Result<SweepStats> {
    let (cfg_x, cfg_w) = conventional_lfsrs(n, seed)?;
    let scale = 1u32 << n;
    let mut stats = SweepStats {
        n,
        pairs: 0,
        identity_violations: 0,
        cbsc_max_abs_err: 0.0,
        cbsc_mean_abs_err: 0.0,
        conventional_mean_abs_err: 0.0,
    };
    let mut sum_cbsc = 0.0;
    let mut sum_conv = 0.0;
    for raw in 0..scale {
        let x = UnsignedFixed::new(n, raw)?;
        let stream = sng_deterministic(x)?;
        for w in 0..=scale {
            let counted = cbsc_multiply(x, w)?.product;
            let unary = unary_gen(w, stream.len())?;
            let gated = stream_to_binary(&and_multiply(&stream, &unary)?);
            if i64::from(counted) != gated {
                stats.identity_violations += 1;
            }
            let e = abs_err(n, counted, raw, w);
            stats.cbsc_max_abs_err = stats.cbsc_max_abs_err.max(e);
            sum_cbsc += e;
            let conv = conventional_multiply(x, w, &cfg_x, &cfg_w)?;
            sum_conv += abs_err(n, conv, raw, w);
            stats.pairs += 1;
        }
    }
    stats.cbsc_mean_abs_err = sum_cbsc / stats.pairs as f64;
    stats.conventional_mean_abs_err = sum_conv / stats.pairs as f64;
    Ok(stats)
}

/// Largest CBSC error over all pairs at width `n`, in value units.
pub fn max_multiplier_error(n: u32) -> Result<f64> {
    let scale = 1u32 << n;
    let mut worst = 0.0f64;
    for raw in 0..scale {
        let x = UnsignedFixed::new(n, raw)?;
        for w in 0..=scale {
            worst = worst.max(abs_err(n, cbsc_multiply(x, w)?.product, raw, w));
        }
    }
    Ok(worst)
}
