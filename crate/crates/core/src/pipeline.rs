//! Whole-image DCT -> mask -> IDCT processing on the ARSC engine.

use rayon::prelude::*;

use crate::dct::{apply_mask, dct2d_ref, idct2d_ref, Block, FrequencyMask, ScTransform, N};
use crate::error::{Error, Result};
use crate::mac::{AccuracySelect, SignMagnitude, DEFAULT_WIDTH};

/// Pixels the hardware feeds into the 2D block per step.
pub const DEFAULT_PARALLELISM: u64 = 8;

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::BadPixelBuffer {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Self {
        let pixels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Pixel with edge replication outside the image.
    fn get_clamped(&self, x: usize, y: usize) -> u8 {
        self.get(x.min(self.width - 1), y.min(self.height - 1))
    }

    fn blocks_x(&self) -> usize {
        self.width.div_ceil(N)
    }

    fn blocks_y(&self) -> usize {
        self.height.div_ceil(N)
    }

    fn block(&self, bx: usize, by: usize) -> Block<u8> {
        std::array::from_fn(|r| std::array::from_fn(|c| self.get_clamped(bx * N + c, by * N + r)))
    }
}

/// Peak signal-to-noise ratio for 8-bit images. Identical images give
/// `f64::INFINITY`.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::DimensionMismatch(a.width, a.height, b.width, b.height));
    }
    if a.is_empty() {
        return Err(Error::Empty);
    }
    let sse: u64 = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .map(|(&p, &q)| {
            let d = i64::from(p) - i64::from(q);
            (d * d) as u64
        })
        .sum();
    if sse == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse as f64 / a.pixels.len() as f64;
    Ok(10.0 * (255.0f64 * 255.0 / mse).log10())
}

/// `p / 256` as a positive `m = 10` bit magnitude (`raw = 4p`).
pub fn normalize_pixel(p: u8) -> SignMagnitude {
    SignMagnitude::from_signed(DEFAULT_WIDTH, i64::from(p) << (DEFAULT_WIDTH - 8))
        .expect("4 * 255 fits in 10 bits")
}

/// Nearest pixel to `value * 256`, clamped to `0..=255`.
pub fn denormalize(v: SignMagnitude) -> u8 {
    if v.negative {
        return 0;
    }
    let shift = v.width() - 8;
    let raw = v.mag.raw();
    let p = if shift == 0 {
        raw
    } else {
        (raw + (1 << (shift - 1))) >> shift
    };
    p.min(255) as u8
}

fn denormalize_real(v: f64) -> u8 {
    (v * 256.0).round().clamp(0.0, 255.0) as u8
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub output: GrayImage,
    /// Output of the floating-point pipeline with the same mask.
    pub reference: GrayImage,
    /// Fixed-schedule cycles divided by the parallelism factor.
    pub total_cycles_fixed: u64,
    pub total_cycles_data: u64,
    /// Saturated MAC outputs over all blocks.
    pub clamp_count: u64,
    pub psnr_vs_input: f64,
    pub psnr_vs_reference: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Hardware parallelism used to turn block cycles into frame cycles.
    pub parallelism: u64,
    /// Worker threads for block processing; 1 runs sequentially. Results
    /// do not depend on this.
    pub threads: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            parallelism: DEFAULT_PARALLELISM,
            threads: 1,
        }
    }
}

struct BlockResult {
    pixels: Block<u8>,
    reference: Block<u8>,
    cycles: u64,
    cycles_data: u64,
    clamps: u64,
}

fn process_block(
    engine: &ScTransform,
    mask: &FrequencyMask,
    block: &Block<u8>,
) -> Result<BlockResult> {
    let fixed: Block<SignMagnitude> =
        std::array::from_fn(|r| std::array::from_fn(|c| normalize_pixel(block[r][c])));
    let fwd = engine.forward_2d(&fixed)?;
    let inv = engine.inverse_2d(&apply_mask(&fwd.data, mask))?;

    let real: Block<f64> =
        std::array::from_fn(|r| std::array::from_fn(|c| f64::from(block[r][c]) / 256.0));
    let back = idct2d_ref(&apply_mask(&dct2d_ref(&real), mask));

    Ok(BlockResult {
        pixels: std::array::from_fn(|r| std::array::from_fn(|c| denormalize(inv.data[r][c]))),
        reference: std::array::from_fn(|r| std::array::from_fn(|c| denormalize_real(back[r][c]))),
        cycles: fwd.cycles + inv.cycles,
        cycles_data: fwd.cycles_data + inv.cycles_data,
        clamps: fwd.clamps + inv.clamps,
    })
}

pub fn process_image(
    img: &GrayImage,
    sel: AccuracySelect,
    mask: &FrequencyMask,
) -> Result<PipelineReport> {
    process_image_with(img, sel, mask, &PipelineOptions::default())
}

pub fn process_image_with(
    img: &GrayImage,
    sel: AccuracySelect,
    mask: &FrequencyMask,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    if img.is_empty() {
        return Err(Error::Empty);
    }
    let engine = ScTransform::new(sel);
    let (bx, by) = (img.blocks_x(), img.blocks_y());
    let run = |i: usize| process_block(&engine, mask, &img.block(i % bx, i / bx));

    let results: Vec<BlockResult> = if opts.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .expect("thread pool");
        pool.install(|| (0..bx * by).into_par_iter().map(run).collect::<Result<_>>())?
    } else {
        (0..bx * by).map(run).collect::<Result<_>>()?
    };

    let mut out = vec![0u8; img.width * img.height];
    let mut reference = vec![0u8; img.width * img.height];
    let (mut cycles, mut cycles_data, mut clamps) = (0u64, 0u64, 0u64);
    for (i, res) in results.iter().enumerate() {
        let (ox, oy) = ((i % bx) * N, (i / bx) * N);
        for r in 0..N.min(img.height - oy) {
            for c in 0..N.min(img.width - ox) {
                let at = (oy + r) * img.width + ox + c;
                out[at] = res.pixels[r][c];
                reference[at] = res.reference[r][c];
            }
        }
        cycles += res.cycles;
        cycles_data += res.cycles_data;
        clamps += res.clamps;
    }

    let output = GrayImage::new(img.width, img.height, out)?;
    let reference = GrayImage::new(img.width, img.height, reference)?;
    Ok(PipelineReport {
        psnr_vs_input: psnr(img, &output)?,
        psnr_vs_reference: psnr(&reference, &output)?,
        output,
        reference,
        total_cycles_fixed: cycles.div_ceil(opts.parallelism.max(1)),
        total_cycles_data: cycles_data,
        clamp_count: clamps,
    })
}

/// Deterministic 256x256 test image: a diagonal gradient, two smooth
/// sinusoidal textures and a small hashed grain.
pub fn reference_image() -> GrayImage {
    const SIZE: usize = 256;
    GrayImage::from_fn(SIZE, SIZE, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let gradient = 40.0 + 0.35 * (xf + yf);
        let waves = 28.0 * (xf / 9.0).sin() * (yf / 13.0).cos()
            + 14.0 * ((xf + 2.0 * yf) / 23.0).sin();
        // splitmix-style hash, +-6 levels of grain
        let mut h = (x as u64) << 32 | y as u64;
        h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h ^= h >> 31;
        let grain = (h % 13) as f64 - 6.0;
        (gradient + waves + grain).round().clamp(0.0, 255.0) as u8
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sel(b: u32) -> AccuracySelect {
        AccuracySelect::from_bits(b).unwrap()
    }

    #[test]
    fn psnr_examples() {
        let a = GrayImage::filled(4, 4, 17);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let z = GrayImage::filled(4, 4, 0);
        let w = GrayImage::filled(4, 4, 255);
        assert!(psnr(&z, &w).unwrap().abs() < 1e-12);
        let mut px = vec![0u8; 16];
        px[5] = 255;
        let one = GrayImage::new(4, 4, px).unwrap();
        assert!((psnr(&z, &one).unwrap() - 10.0 * 16f64.log10()).abs() < 1e-12);
        assert!(matches!(
            psnr(&z, &GrayImage::filled(2, 8, 0)),
            Err(Error::DimensionMismatch(..))
        ));
    }

    #[test]
    fn bad_buffer() {
        assert!(GrayImage::new(3, 3, vec![0; 8]).is_err());
    }

    #[test]
    fn pixel_scaling() {
        assert_eq!(normalize_pixel(255).mag.raw(), 1020);
        for p in 0..=255u8 {
            assert_eq!(denormalize(normalize_pixel(p)), p);
        }
        assert_eq!(denormalize(SignMagnitude::from_signed(10, -40).unwrap()), 0);
        assert_eq!(denormalize(SignMagnitude::from_signed(10, 1023).unwrap()), 255);
        assert_eq!(denormalize(SignMagnitude::from_signed(10, 6).unwrap()), 2);
    }

    #[test]
    fn empty_image_rejected() {
        let e = GrayImage::new(0, 0, vec![]).unwrap();
        assert_eq!(
            process_image(&e, sel(10), &FrequencyMask::all_pass()),
            Err(Error::Empty)
        );
    }

    /// Gate-level product: popcount of the deterministic stream ANDed with
    /// the unary weight stream.
    fn gate_product(x: u32, w: u32) -> u32 {
        use crate::cbsc::{sng_deterministic, unary_gen};
        use crate::stream::and_multiply;
        let s = sng_deterministic(crate::UnsignedFixed::new(10, x).unwrap()).unwrap();
        and_multiply(&s, &unary_gen(w, 1024).unwrap()).unwrap().popcount() as u32
    }

    /// A constant block only excites the DC path (AC pairs cancel exactly),
    /// so at b = 10 each pixel follows a scalar chain through the four passes.
    fn dc_chain(p: u8) -> u8 {
        let c = (1024.0 / 8f64.sqrt()).round() as u32;
        let sat = |v: u32| v.min(1023);
        let r1 = sat((8 * gate_product(4 * u32::from(p), c) + 2) >> 2);
        let r2 = sat((8 * gate_product(r1, c) + 2) >> 2);
        let r3 = sat(4 * gate_product(r2, c));
        let r4 = sat(4 * gate_product(r3, c));
        ((r4 + 2) >> 2).min(255) as u8
    }

    #[test]
    fn constant_image_follows_dc_chain() {
        let mut exact = 0;
        for v in 0..=255u8 {
            let img = GrayImage::filled(8, 8, v);
            let rep = process_image(&img, sel(10), &FrequencyMask::all_pass()).unwrap();
            let want = dc_chain(v);
            assert!(rep.output.pixels().iter().all(|&p| p == want), "level {v}");
            assert!((i32::from(want) - i32::from(v)).abs() <= 4, "level {v} -> {want}");
            if want == v {
                exact += 1;
                assert_eq!(rep.psnr_vs_input, f64::INFINITY);
            }
        }
        assert!(exact > 0);
        assert_eq!(dc_chain(0), 0);
    }

    #[test]
    fn stop_mask_gives_black() {
        let img = reference_image();
        let rep = process_image(&img, sel(8), &FrequencyMask::all_stop()).unwrap();
        assert!(rep.output.pixels().iter().all(|&p| p == 0));
        assert!(rep.reference.pixels().iter().all(|&p| p == 0));
    }

    #[test]
    fn padding_and_cycles() {
        let img = GrayImage::from_fn(13, 9, |x, y| (x * 11 + y * 7) as u8);
        let rep = process_image(&img, sel(6), &FrequencyMask::default()).unwrap();
        assert_eq!((rep.output.width(), rep.output.height()), (13, 9));
        // 4 blocks, 2 transforms x 16 passes-of-8 x 8 MACs x 8 terms x 2^6 cycles
        let per_block = 2 * 16 * 8 * 8 * 64;
        assert_eq!(rep.total_cycles_fixed, 4 * per_block / DEFAULT_PARALLELISM);
    }
}
