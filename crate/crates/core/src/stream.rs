//! Stochastic bit-streams and the conventional gate-level arithmetic on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::UnsignedFixed;
use crate::lfsr::{Lfsr, LfsrConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    /// value = popcount / length, in [0, 1]
    Unipolar,
    /// value = (2 * popcount - length) / length, in [-1, 1]
    Bipolar,
}

/// An ordered bit sequence whose length is a power of two.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitStream {
    bits: Vec<bool>,
    polarity: Polarity,
}

impl BitStream {
    pub fn new(bits: Vec<bool>, polarity: Polarity) -> Result<Self> {
        let n = bits.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        Ok(Self { bits, polarity })
    }

    pub fn unipolar(bits: Vec<bool>) -> Result<Self> {
        Self::new(bits, Polarity::Unipolar)
    }

    pub fn bipolar(bits: Vec<bool>) -> Result<Self> {
        Self::new(bits, Polarity::Bipolar)
    }

    /// Parses a `0`/`1` string; other characters (separators) are skipped.
    pub fn parse(s: &str, polarity: Polarity) -> Result<Self> {
        let bits = s
            .chars()
            .filter_map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        Self::new(bits, polarity)
    }

    pub fn zeros(len: usize, polarity: Polarity) -> Result<Self> {
        Self::new(vec![false; len], polarity)
    }

    pub fn ones(len: usize, polarity: Polarity) -> Result<Self> {
        Self::new(vec![true; len], polarity)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    /// Always false; streams have at least two bits.
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn value(&self) -> f64 {
        let len = self.len() as f64;
        let ones = self.popcount() as f64;
        match self.polarity {
            Polarity::Unipolar => ones / len,
            Polarity::Bipolar => (2.0 * ones - len) / len,
        }
    }

    /// Bitwise complement, same polarity.
    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| !b).collect(),
            polarity: self.polarity,
        }
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
        self.bits
            .iter()
            .zip(&other.bits)
            .map(|(&a, &b)| f(a, b))
            .collect()
    }
}

impl std::fmt::Display for BitStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Comparator SNG driven by an LFSR: bit `i` is 1 iff the `i`-th register
/// state (the seed is state 0) is below `x.raw`.
///
/// `x.raw` may equal `2^n`, which yields an all-ones stream.
pub fn sng_conventional(x: UnsignedFixed, length: usize, cfg: &LfsrConfig) -> Result<BitStream> {
    if length < 2 || !length.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(length));
    }
    if x.width() != cfg.width {
        return Err(Error::WidthMismatch {
            left: x.width(),
            right: cfg.width,
        });
    }
    let lfsr = Lfsr::new(cfg.clone())?;
    let bits: Vec<bool> = lfsr.take(length).map(|s| s < x.raw()).collect();
    // a custom tap set may collapse to zero before `length` states
    if bits.len() != length {
        return Err(Error::LfsrLockUp);
    }
    BitStream::unipolar(bits)
}

/// Unipolar multiplication.
pub fn and_multiply(a: &BitStream, b: &BitStream) -> Result<BitStream> {
    a.check_len(b)?;
    for s in [a, b] {
        if s.polarity != Polarity::Unipolar {
            return Err(Error::PolarityMismatch {
                expected: Polarity::Unipolar,
            });
        }
    }
    BitStream::unipolar(a.zip_with(b, |x, y| x & y))
}

/// Bipolar multiplication.
pub fn xnor_multiply(a: &BitStream, b: &BitStream) -> Result<BitStream> {
    a.check_len(b)?;
    for s in [a, b] {
        if s.polarity != Polarity::Bipolar {
            return Err(Error::PolarityMismatch {
                expected: Polarity::Bipolar,
            });
        }
    }
    BitStream::bipolar(a.zip_with(b, |x, y| !(x ^ y)))
}

/// Scaled addition: picks `a` where `select` is 0 and `b` where it is 1.
/// The output takes the polarity of `a`.
pub fn mux_add(a: &BitStream, b: &BitStream, select: &BitStream) -> Result<BitStream> {
    a.check_len(b)?;
    a.check_len(select)?;
    let bits = a
        .bits
        .iter()
        .zip(&b.bits)
        .zip(&select.bits)
        .map(|((&x, &y), &s)| if s { y } else { x })
        .collect();
    BitStream::new(bits, a.polarity)
}

/// Counter readout: popcount for unipolar, up/down count for bipolar.
pub fn stream_to_binary(s: &BitStream) -> i64 {
    let ones = s.popcount() as i64;
    match s.polarity {
        Polarity::Unipolar => ones,
        Polarity::Bipolar => 2 * ones - s.len() as i64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uni(s: &str) -> BitStream {
        BitStream::parse(s, Polarity::Unipolar).unwrap()
    }

    fn bi(s: &str) -> BitStream {
        BitStream::parse(s, Polarity::Bipolar).unwrap()
    }

    #[test]
    fn length_must_be_power_of_two() {
        assert_eq!(BitStream::unipolar(vec![true; 6]), Err(Error::NotPowerOfTwo(6)));
        assert!(BitStream::unipolar(vec![]).is_err());
        assert!(BitStream::unipolar(vec![true]).is_err());
    }

    #[test]
    fn values() {
        assert_eq!(uni("1011").value(), 0.75);
        assert_eq!(bi("1011").value(), 0.5);
        assert_eq!(bi("0000").value(), -1.0);
    }

    #[test]
    fn conventional_sng_zero_input() {
        let cfg = LfsrConfig::maximal(3, 1).unwrap();
        let s = sng_conventional(UnsignedFixed::new(3, 0).unwrap(), 8, &cfg).unwrap();
        assert_eq!(s.popcount(), 0);
    }

    #[test]
    fn conventional_sng_full_scale_has_one_zero_per_period() {
        // seed 1 walks 1,2,5,3,7,6,4,1; only state 7 fails "< 7"
        let cfg = LfsrConfig::maximal(3, 1).unwrap();
        let s = sng_conventional(UnsignedFixed::new(3, 7).unwrap(), 8, &cfg).unwrap();
        assert_eq!(s.to_string(), "11110111");
    }

    #[test]
    fn conventional_sng_half() {
        // states 1,2,5,3,7,6,4,1 below 4: 1,2,3,1
        let cfg = LfsrConfig::maximal(3, 1).unwrap();
        let s = sng_conventional(UnsignedFixed::new(3, 4).unwrap(), 8, &cfg).unwrap();
        assert_eq!(s.to_string(), "11010001");
        assert!((s.value() - 0.5).abs() <= 1.0 / 8.0);
    }

    #[test]
    fn conventional_sng_errors() {
        let cfg = LfsrConfig::maximal(3, 1).unwrap();
        let x = UnsignedFixed::new(3, 1).unwrap();
        assert_eq!(sng_conventional(x, 6, &cfg), Err(Error::NotPowerOfTwo(6)));
        let x4 = UnsignedFixed::new(4, 1).unwrap();
        assert!(matches!(
            sng_conventional(x4, 8, &cfg),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn and_cases() {
        let a = uni("10110010");
        assert_eq!(and_multiply(&a, &uni("11111111")).unwrap(), a);
        assert_eq!(and_multiply(&a, &uni("00000000")).unwrap().popcount(), 0);
        let p = and_multiply(&uni("1010"), &uni("1100")).unwrap();
        assert_eq!(p.to_string(), "1000");
        assert_eq!(p.value(), 0.25);
    }

    #[test]
    fn and_errors() {
        assert!(matches!(
            and_multiply(&uni("10"), &uni("1010")),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            and_multiply(&uni("10"), &bi("10")),
            Err(Error::PolarityMismatch { .. })
        ));
    }

    #[test]
    fn xnor_cases() {
        let a = bi("10011100");
        assert_eq!(xnor_multiply(&a, &a).unwrap().value(), 1.0);
        assert_eq!(xnor_multiply(&a, &a.complement()).unwrap().value(), -1.0);
        let p = xnor_multiply(&bi("1100"), &bi("1010")).unwrap();
        assert_eq!(p.to_string(), "1001");
        assert_eq!(p.value(), 0.0);
        assert!(xnor_multiply(&bi("10"), &bi("1001")).is_err());
        assert!(xnor_multiply(&uni("10"), &bi("10")).is_err());
    }

    #[test]
    fn mux_cases() {
        let a = uni("10110100");
        let b = uni("01101111");
        assert_eq!(mux_add(&a, &b, &uni("00000000")).unwrap(), a);
        assert_eq!(mux_add(&a, &b, &uni("11111111")).unwrap(), b);
        let half = mux_add(&uni("1111"), &uni("0000"), &uni("0101")).unwrap();
        assert_eq!(half.value(), 0.5);
        assert!(mux_add(&a, &b, &uni("01")).is_err());
    }

    #[test]
    fn counter_readout() {
        assert_eq!(stream_to_binary(&uni("1011")), 3);
        assert_eq!(stream_to_binary(&bi("1011")), 2);
        assert_eq!(stream_to_binary(&uni("0000")), 0);
    }
}
