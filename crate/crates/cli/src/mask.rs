//! `--mask` argument: `lowpass:K`, `allpass`, or a path to an 8x8 text grid
//! of `0`/`1` (whitespace between digits allowed, `#` starts a comment).

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use arsc_core::dct::{FrequencyMask, N};

pub fn parse_grid(text: &str) -> Result<FrequencyMask> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let digits: Vec<char> = line.chars().filter(|c| !c.is_whitespace()).collect();
        if digits.is_empty() {
            continue;
        }
        if digits.len() != N {
            bail!("line {}: expected {N} digits, found {}", lineno + 1, digits.len());
        }
        let mut row = [false; N];
        for (v, d) in digits.iter().enumerate() {
            row[v] = match d {
                '0' => false,
                '1' => true,
                _ => bail!("line {}: {d:?} is not 0 or 1", lineno + 1),
            };
        }
        rows.push(row);
    }
    if rows.len() != N {
        bail!("expected {N} mask rows, found {}", rows.len());
    }
    Ok(FrequencyMask(std::array::from_fn(|u| rows[u])))
}

pub fn parse(arg: &str) -> Result<FrequencyMask> {
    if arg == "allpass" {
        return Ok(FrequencyMask::all_pass());
    }
    if let Some(k) = arg.strip_prefix("lowpass:") {
        let k: usize = k.parse().with_context(|| format!("bad lowpass size {k:?}"))?;
        if !(1..=N).contains(&k) {
            bail!("lowpass size must be in 1..={N}");
        }
        return Ok(FrequencyMask::lowpass(k));
    }
    let path = Path::new(arg);
    let text = fs::read_to_string(path)
        .with_context(|| format!("mask {arg:?} is not lowpass:K, allpass or a readable file"))?;
    parse_grid(&text).with_context(|| format!("in mask file {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_masks() {
        assert_eq!(parse("allpass").unwrap(), FrequencyMask::all_pass());
        assert_eq!(parse("lowpass:3").unwrap(), FrequencyMask::lowpass(3));
        assert!(parse("lowpass:0").is_err());
        assert!(parse("lowpass:9").is_err());
        assert!(parse("lowpass:x").is_err());
    }

    #[test]
    fn grid_matches_lowpass() {
        let text = "# keep 2x2\n11000000\n1 1 0 0 0 0 0 0\n".to_string() + &"00000000\n".repeat(6);
        assert_eq!(parse_grid(&text).unwrap(), FrequencyMask::lowpass(2));
        assert!(parse_grid("11").is_err());
        assert!(parse_grid(&"00000002\n".repeat(8)).is_err());
    }
}
