//! The accuracy-reconfigurable multiply-accumulate unit.
//!
//! Operands arrive as `m`-bit sign-magnitude numbers. The select code picks
//! an active bit-width `b`; magnitudes are truncated to `b` bits, multiplied
//! on the counter-based multiplier with the sign resolved by XOR, summed in
//! an exact signed accumulator, and the result is padded back to `m` bits.

use serde::{Deserialize, Serialize};

use crate::cbsc::cbsc_multiply;
use crate::error::{Error, Result};
use crate::fixed::UnsignedFixed;

/// Operand width used throughout the DCT pipeline.
pub const DEFAULT_WIDTH: u32 = 10;

/// Supported active bit-widths, indexed by select code.
pub const BIT_WIDTHS: [u32; 5] = [10, 9, 8, 7, 6];

#[derive(Debug, Clone, Copy, Eq)]
pub struct SignMagnitude {
    pub negative: bool,
    pub mag: UnsignedFixed,
}

impl PartialEq for SignMagnitude {
    /// Negative zero equals positive zero.
    fn eq(&self, other: &Self) -> bool {
        self.mag == other.mag && (self.negative == other.negative || self.mag.raw() == 0)
    }
}

impl std::hash::Hash for SignMagnitude {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.negative && self.mag.raw() != 0).hash(state);
        self.mag.hash(state);
    }
}

impl SignMagnitude {
    pub fn new(negative: bool, mag: UnsignedFixed) -> Self {
        Self { negative, mag }
    }

    pub fn positive(mag: UnsignedFixed) -> Self {
        Self::new(false, mag)
    }

    pub fn zero(width: u32) -> Self {
        Self::positive(UnsignedFixed::zero(width))
    }

    /// From a signed raw magnitude, e.g. `-5` at width 3 is `-5/8`.
    pub fn from_signed(width: u32, raw: i64) -> Result<Self> {
        let mag = u32::try_from(raw.unsigned_abs()).map_err(|_| Error::OutOfRange {
            value: raw.unsigned_abs(),
            width,
        })?;
        Ok(Self::new(raw < 0, UnsignedFixed::new(width, mag)?))
    }

    /// Coefficient form: allows the unit magnitude `2^width`.
    pub fn weight_from_signed(width: u32, raw: i64) -> Result<Self> {
        let mag = u32::try_from(raw.unsigned_abs()).map_err(|_| Error::OutOfRange {
            value: raw.unsigned_abs(),
            width,
        })?;
        Ok(Self::new(raw < 0, UnsignedFixed::weight(width, mag)?))
    }

    /// Round-to-nearest (ties away from zero) quantization of a real in
    /// `[-1, 1]` to a `width`-bit coefficient.
    pub fn quantize(value: f64, width: u32) -> Result<Self> {
        let raw = (value.abs() * f64::from(1u32 << width)).round();
        if !raw.is_finite() || raw > f64::from(1u32 << width) {
            return Err(Error::OutOfRange {
                value: raw as u64,
                width,
            });
        }
        Ok(Self::new(
            value.is_sign_negative() && raw > 0.0,
            UnsignedFixed::weight(width, raw as u32)?,
        ))
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.mag.width()
    }

    /// Signed raw magnitude.
    pub fn signed_raw(&self) -> i64 {
        let r = i64::from(self.mag.raw());
        if self.negative {
            -r
        } else {
            r
        }
    }

    pub fn value(&self) -> f64 {
        let v = self.mag.value();
        if self.negative {
            -v
        } else {
            v
        }
    }

    pub fn negate(&self) -> Self {
        Self::new(!self.negative, self.mag)
    }
}

/// Run-time accuracy select signal (3 bits wide).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AccuracySelect(u8);

impl AccuracySelect {
    pub const CODE_BITS: u32 = 3;

    pub fn from_code(code: u8) -> Result<Self> {
        if usize::from(code) >= BIT_WIDTHS.len() {
            return Err(Error::InvalidSelectCode(code));
        }
        Ok(Self(code))
    }

    pub fn from_bits(bits: u32) -> Result<Self> {
        BIT_WIDTHS
            .iter()
            .position(|&b| b == bits)
            .map(|code| Self(code as u8))
            .ok_or(Error::UnsupportedBitWidth(bits))
    }

    pub fn code(&self) -> u8 {
        self.0
    }

    pub fn bits(&self) -> u32 {
        BIT_WIDTHS[usize::from(self.0)]
    }

    /// All select states from the most to the least accurate.
    pub fn all() -> impl Iterator<Item = Self> {
        (0..BIT_WIDTHS.len() as u8).map(Self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacResult {
    pub value: SignMagnitude,
    /// Sum of the per-product down-counter loads.
    pub cycles_data: u64,
    /// `N_terms * 2^b`, the fixed schedule.
    pub cycles_fixed: u64,
    pub clamped: bool,
}

/// Keeps the sign and the `b` most significant magnitude bits.
pub fn truncate(x: SignMagnitude, sel: AccuracySelect) -> Result<SignMagnitude> {
    truncate_to(x, sel.bits())
}

pub fn truncate_to(x: SignMagnitude, bits: u32) -> Result<SignMagnitude> {
    let m = x.width();
    if bits > m {
        return Err(Error::WidthTooLarge {
            target: bits,
            source_width: m,
        });
    }
    let raw = x.mag.raw() >> (m - bits);
    Ok(SignMagnitude::new(x.negative, UnsignedFixed::new(bits, raw)?))
}

/// Appends `m - b` zero bits on the LSB side.
pub fn restore_width(p: SignMagnitude, m: u32) -> Result<SignMagnitude> {
    let b = p.width();
    if b > m {
        return Err(Error::WidthTooLarge {
            target: m,
            source_width: b,
        });
    }
    let raw = p.mag.raw() << (m - b);
    Ok(SignMagnitude::new(p.negative, UnsignedFixed::new(m, raw)?))
}

/// Signed product of two equal-width operands; `c` may carry the unit
/// magnitude. Returns the product at scale `2^b` and the data cycles.
pub fn signed_product(x: SignMagnitude, c: SignMagnitude) -> Result<(i64, u64)> {
    if x.width() != c.width() {
        return Err(Error::WidthMismatch {
            left: x.width(),
            right: c.width(),
        });
    }
    if x.mag.raw() == 0 || c.mag.raw() == 0 {
        return Ok((0, 0));
    }
    let p = cbsc_multiply(x.mag, c.mag.raw())?;
    let mag = i64::from(p.product);
    let signed = if x.negative ^ c.negative { -mag } else { mag };
    Ok((signed, u64::from(p.cycles)))
}

/// Re-quantizes a coefficient of any width to `b` bits, round to nearest
/// with ties away from zero.
fn requantize(c: SignMagnitude, b: u32) -> Result<SignMagnitude> {
    let w = c.width();
    let raw = u64::from(c.mag.raw());
    let scaled = if w >= b {
        let shift = w - b;
        if shift == 0 {
            raw
        } else {
            (raw + (1u64 << (shift - 1))) >> shift
        }
    } else {
        raw << (b - w)
    };
    Ok(SignMagnitude::new(
        c.negative,
        UnsignedFixed::weight(b, scaled as u32)?,
    ))
}

/// Unscaled multiply-accumulate.
pub fn mac(xs: &[SignMagnitude], cs: &[SignMagnitude], sel: AccuracySelect) -> Result<MacResult> {
    mac_scaled(xs, cs, sel, 0)
}

/// Multiply-accumulate with an output gain of `2^gain_log2` applied to the
/// exact accumulator before clamping. Negative gains shift right, rounding
/// the magnitude half away from zero.
pub fn mac_scaled(
    xs: &[SignMagnitude],
    cs: &[SignMagnitude],
    sel: AccuracySelect,
    gain_log2: i32,
) -> Result<MacResult> {
    if xs.is_empty() || cs.is_empty() {
        return Err(Error::Empty);
    }
    if xs.len() != cs.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: cs.len(),
        });
    }
    let m = xs[0].width();
    let b = sel.bits();
    let mut acc: i64 = 0;
    let mut cycles_data = 0u64;
    for (&x, &c) in xs.iter().zip(cs) {
        if x.width() != m {
            return Err(Error::WidthMismatch {
                left: m,
                right: x.width(),
            });
        }
        let xt = truncate_to(x, b)?;
        let ct = requantize(c, b)?;
        let (p, cycles) = signed_product(xt, ct)?;
        acc += p;
        cycles_data += cycles;
    }

    let mag = acc.unsigned_abs();
    let scaled = match gain_log2 {
        g if g >= 0 => mag << g,
        g => {
            let s = g.unsigned_abs();
            (mag + (1u64 << (s - 1))) >> s
        }
    };
    let limit = (1u64 << b) - 1;
    let clamped = scaled > limit;
    let raw = scaled.min(limit) as u32;
    let out = SignMagnitude::new(acc < 0, UnsignedFixed::new(b, raw)?);
    Ok(MacResult {
        value: restore_width(out, m)?,
        cycles_data,
        cycles_fixed: (xs.len() as u64) << b,
        clamped,
    })
}
