//! Unsigned fixed-point magnitudes in `[0, 1]`.

use crate::error::{Error, Result};

/// Widest operand the simulator handles. Raw values and stream lengths stay
/// comfortably inside `u32`.
pub const MAX_WIDTH: u32 = 24;

/// An `n`-bit unsigned fixed-point number with value `raw / 2^n`.
///
/// Plain operands satisfy `raw < 2^n`. A scaled weight may also hold exactly
/// `2^n` (the value 1.0), see [`UnsignedFixed::weight`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnsignedFixed {
    width: u32,
    raw: u32,
}

impl UnsignedFixed {
    /// Operand constructor, rejects `raw >= 2^width`.
    pub fn new(width: u32, raw: u32) -> Result<Self> {
        check_width(width)?;
        if u64::from(raw) >= 1u64 << width {
            return Err(Error::OutOfRange {
                value: raw.into(),
                width,
            });
        }
        Ok(Self { width, raw })
    }

    /// Weight constructor, accepts `raw == 2^width` (unit weight).
    pub fn weight(width: u32, raw: u32) -> Result<Self> {
        check_width(width)?;
        if u64::from(raw) > 1u64 << width {
            return Err(Error::OutOfRange {
                value: raw.into(),
                width,
            });
        }
        Ok(Self { width, raw })
    }

    pub fn zero(width: u32) -> Self {
        Self { width, raw: 0 }
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn raw(&self) -> u32 {
        self.raw
    }

    /// Scaling factor `2^width`.
    #[inline]
    pub fn scale(&self) -> u32 {
        1 << self.width
    }

    /// True when this holds the unit weight `2^width`.
    pub fn is_unit(&self) -> bool {
        self.raw == self.scale()
    }

    /// Bit `x_i` of the binary representation (`i = 0` is the LSB).
    #[inline]
    pub fn bit(&self, i: u32) -> bool {
        (self.raw >> i) & 1 == 1
    }

    pub fn value(&self) -> f64 {
        f64::from(self.raw) / f64::from(self.scale())
    }
}

fn check_width(width: u32) -> Result<()> {
    if width == 0 || width > MAX_WIDTH {
        return Err(Error::OutOfRange {
            value: width.into(),
            width: MAX_WIDTH,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operand_rejects_full_scale() {
        assert!(UnsignedFixed::new(3, 7).is_ok());
        assert_eq!(
            UnsignedFixed::new(3, 8),
            Err(Error::OutOfRange { value: 8, width: 3 })
        );
    }

    #[test]
    fn weight_accepts_unit() {
        let w = UnsignedFixed::weight(3, 8).unwrap();
        assert!(w.is_unit());
        assert_eq!(w.value(), 1.0);
        assert!(UnsignedFixed::weight(3, 9).is_err());
    }

    #[test]
    fn value_and_bits() {
        let x = UnsignedFixed::new(3, 0b101).unwrap();
        assert_eq!(x.value(), 0.625);
        assert!(x.bit(2) && !x.bit(1) && x.bit(0));
    }

    #[test]
    fn zero_width_rejected() {
        assert!(UnsignedFixed::new(0, 0).is_err());
    }
}
