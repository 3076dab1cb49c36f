//! Counter-based stochastic multiplication.
//!
//! The operand `x` is expanded into a deterministic stream of length `2^n`
//! in which bit `x_{n-i}` lands on cycles `2^{i-1} + k * 2^i` (cycles are
//! 1-indexed); the final cycle is always 0. The weight is a unary stream
//! of `w_s` ones. Multiplying means counting the ones of the operand stream
//! during the first `w_s` cycles, so a down-counter loaded with `w_s` and an
//! up-counter replace the SNGs and the AND gate.

use crate::error::{Error, Result};
use crate::fixed::UnsignedFixed;
use crate::stream::BitStream;

/// Operand bit emitted on 1-indexed `cycle` of the deterministic stream.
#[inline]
pub fn deterministic_bit(x: UnsignedFixed, cycle: u32) -> bool {
    let n = x.width();
    let tz = cycle.trailing_zeros();
    tz < n && x.bit(n - 1 - tz)
}

/// Deterministic SNG. Rejects the unit weight `2^n`, a stream cannot encode 1.0
/// with its last bit held at 0.
pub fn sng_deterministic(x: UnsignedFixed) -> Result<BitStream> {
    if x.is_unit() {
        return Err(Error::OutOfRange {
            value: x.raw().into(),
            width: x.width(),
        });
    }
    let len = x.scale();
    let bits = (1..=len).map(|c| deterministic_bit(x, c)).collect();
    BitStream::unipolar(bits)
}

/// Unary number generator: `w_s` ones followed by zeros.
pub fn unary_gen(w_s: u32, length: usize) -> Result<BitStream> {
    if w_s as usize > length {
        return Err(Error::OutOfRange {
            value: w_s.into(),
            width: length.trailing_zeros(),
        });
    }
    let bits = (0..length).map(|i| i < w_s as usize).collect();
    BitStream::unipolar(bits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CbscProduct {
    /// Up-counter value; `product / 2^n` approximates `x * w`.
    pub product: u32,
    /// Cycles until the down-counter empties (`w_s`).
    pub cycles: u32,
}

/// Counter-based multiply of `x` by the scaled weight `w_s` (`0..=2^n`).
///
/// Counts the operand bits placed in the first `w_s` cycles directly:
/// bit `x_{n-i}` occupies `floor((w_s + 2^{i-1}) / 2^i)` of them.
pub fn cbsc_multiply(x: UnsignedFixed, w_s: u32) -> Result<CbscProduct> {
    let n = x.width();
    if x.is_unit() {
        return Err(Error::OutOfRange {
            value: x.raw().into(),
            width: n,
        });
    }
    if w_s > x.scale() {
        return Err(Error::OutOfRange {
            value: w_s.into(),
            width: n,
        });
    }
    let w = u64::from(w_s);
    let product = (1..=n)
        .filter(|&i| x.bit(n - i))
        .map(|i| (w + (1u64 << (i - 1))) >> i)
        .sum::<u64>();
    Ok(CbscProduct {
        product: product as u32,
        cycles: w_s,
    })
}

/// Cycle-stepped model of the two-counter multiplier.
#[derive(Debug, Clone)]
pub struct CounterMultiplier {
    x: UnsignedFixed,
    down: u32,
    up: u32,
    cycle: u32,
}

impl CounterMultiplier {
    pub fn new(x: UnsignedFixed, w_s: u32) -> Result<Self> {
        if x.is_unit() || w_s > x.scale() {
            return Err(Error::OutOfRange {
                value: w_s.into(),
                width: x.width(),
            });
        }
        Ok(Self {
            x,
            down: w_s,
            up: 0,
            cycle: 0,
        })
    }

    pub fn done(&self) -> bool {
        self.down == 0
    }

    /// Advances one clock; no-op once the down-counter is empty.
    pub fn step(&mut self) {
        if self.done() {
            return;
        }
        self.cycle += 1;
        if deterministic_bit(self.x, self.cycle) {
            self.up += 1;
        }
        self.down -= 1;
    }

    pub fn run(mut self) -> CbscProduct {
        while !self.done() {
            self.step();
        }
        CbscProduct {
            product: self.up,
            cycles: self.cycle,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{and_multiply, stream_to_binary};

    fn fx(n: u32, raw: u32) -> UnsignedFixed {
        UnsignedFixed::new(n, raw).unwrap()
    }

    #[test]
    fn placement_example_n3() {
        assert_eq!(sng_deterministic(fx(3, 0b101)).unwrap().to_string(), "10111010");
        assert_eq!(sng_deterministic(fx(2, 0b11)).unwrap().to_string(), "1110");
        assert_eq!(sng_deterministic(fx(4, 0)).unwrap().popcount(), 0);
    }

    #[test]
    fn unit_operand_rejected() {
        let unit = UnsignedFixed::weight(3, 8).unwrap();
        assert!(sng_deterministic(unit).is_err());
        assert!(cbsc_multiply(unit, 3).is_err());
    }

    #[test]
    fn unary_cases() {
        assert_eq!(unary_gen(0, 8).unwrap().popcount(), 0);
        assert_eq!(unary_gen(8, 8).unwrap().popcount(), 8);
        assert_eq!(unary_gen(3, 8).unwrap().to_string(), "11100000");
        assert!(unary_gen(9, 8).is_err());
    }

    #[test]
    fn multiply_examples() {
        let x = fx(3, 5);
        assert_eq!(
            cbsc_multiply(x, 4).unwrap(),
            CbscProduct {
                product: 3,
                cycles: 4
            }
        );
        assert_eq!(
            cbsc_multiply(x, 0).unwrap(),
            CbscProduct {
                product: 0,
                cycles: 0
            }
        );
        assert_eq!(
            cbsc_multiply(x, 8).unwrap(),
            CbscProduct {
                product: 5,
                cycles: 8
            }
        );
        assert!(cbsc_multiply(x, 9).is_err());
    }

    #[test]
    fn counter_model_matches_closed_form_and_gates() {
        for n in 1..=6 {
            for raw in 0..(1u32 << n) {
                let x = fx(n, raw);
                let stream = sng_deterministic(x).unwrap();
                for w in 0..=(1u32 << n) {
                    let closed = cbsc_multiply(x, w).unwrap();
                    let stepped = CounterMultiplier::new(x, w).unwrap().run();
                    let unary = unary_gen(w, stream.len()).unwrap();
                    let gates = stream_to_binary(&and_multiply(&stream, &unary).unwrap());
                    assert_eq!(closed, stepped);
                    assert_eq!(i64::from(closed.product), gates, "n={n} x={raw} w={w}");
                }
            }
        }
    }
}
