//! 8-point DCT-II / DCT-III, in floating point and on the ARSC MAC.
//!
//! Fixed-point passes keep every operand inside `(-1, 1)` by scaling each
//! forward 1D pass by `1/4` and each inverse pass by `4` (see
//! [`STAGE_SHIFT`]); the net gain of a forward+inverse 2D round trip is 1.

use std::f64::consts::PI;

use crate::error::Result;
use crate::mac::{mac_scaled, AccuracySelect, SignMagnitude};

pub const N: usize = 8;

/// log2 of the per-pass scale applied by the fixed-point transforms.
pub const STAGE_SHIFT: i32 = 2;

pub type Block<T> = [[T; N]; N];

/// Order of the two 1D passes of the forward 2D transform. Separability
/// makes both give the same result in exact arithmetic; the inverse runs the
/// passes in the opposite order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassOrder {
    ColumnsThenRows,
    RowsThenColumns,
}

pub const FORWARD_ORDER: PassOrder = PassOrder::ColumnsThenRows;

/// Orthonormal DCT-II basis factor for frequency `k` and sample `i`.
pub fn basis(k: usize, i: usize) -> f64 {
    let n = N as f64;
    if k == 0 {
        1.0 / n.sqrt()
    } else {
        (2.0 / n).sqrt() * (((2 * i + 1) * k) as f64 * PI / (2.0 * n)).cos()
    }
}

pub fn dct1d_ref(a: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|k| (0..N).map(|i| a[i] * basis(k, i)).sum())
}

pub fn idct1d_ref(f: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| (0..N).map(|k| f[k] * basis(k, i)).sum())
}

fn column<T: Copy>(b: &Block<T>, c: usize) -> [T; N] {
    std::array::from_fn(|r| b[r][c])
}

fn set_column<T: Copy>(b: &mut Block<T>, c: usize, v: &[T; N]) {
    for r in 0..N {
        b[r][c] = v[r];
    }
}

/// Applies `f` to every column, then every row (or the reverse).
fn separable<T: Copy, E>(
    block: &Block<T>,
    order: PassOrder,
    mut f: impl FnMut(&[T; N]) -> std::result::Result<[T; N], E>,
) -> std::result::Result<Block<T>, E> {
    // `buf` doubles as the intermediate buffer between the two passes
    let mut buf = *block;
    let (columns_first, rows_first) = match order {
        PassOrder::ColumnsThenRows => (true, false),
        PassOrder::RowsThenColumns => (false, true),
    };
    if columns_first {
        for c in 0..N {
            let v = f(&column(&buf, c))?;
            set_column(&mut buf, c, &v);
        }
    }
    for row in buf.iter_mut() {
        *row = f(row)?;
    }
    if rows_first {
        for c in 0..N {
            let v = f(&column(&buf, c))?;
            set_column(&mut buf, c, &v);
        }
    }
    Ok(buf)
}

fn infallible<T>(v: T) -> std::result::Result<T, std::convert::Infallible> {
    Ok(v)
}

fn unwrap_infallible<T>(r: std::result::Result<T, std::convert::Infallible>) -> T {
    match r {
        Ok(v) => v,
        Err(e) => match e {},
    }
}

pub fn dct2d_ref(block: &Block<f64>) -> Block<f64> {
    unwrap_infallible(separable(block, FORWARD_ORDER, |v| infallible(dct1d_ref(v))))
}

pub fn idct2d_ref(block: &Block<f64>) -> Block<f64> {
    unwrap_infallible(separable(block, inverse_order(), |v| infallible(idct1d_ref(v))))
}

fn inverse_order() -> PassOrder {
    match FORWARD_ORDER {
        PassOrder::ColumnsThenRows => PassOrder::RowsThenColumns,
        PassOrder::RowsThenColumns => PassOrder::ColumnsThenRows,
    }
}

/// Binary frequency-domain mask; `true` keeps the coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrequencyMask(pub Block<bool>);

impl FrequencyMask {
    pub fn all_pass() -> Self {
        Self([[true; N]; N])
    }

    pub fn all_stop() -> Self {
        Self([[false; N]; N])
    }

    /// Zonal low-pass keeping `u < k && v < k`.
    pub fn lowpass(k: usize) -> Self {
        Self(std::array::from_fn(|u| std::array::from_fn(|v| u < k && v < k)))
    }

    pub fn dc_only() -> Self {
        Self::lowpass(1)
    }

    pub fn keeps(&self, u: usize, v: usize) -> bool {
        self.0[u][v]
    }

    pub fn kept(&self) -> usize {
        self.0.iter().flatten().filter(|&&b| b).count()
    }
}

impl Default for FrequencyMask {
    /// 16 of 64 coefficients: `u < 4 && v < 4`.
    fn default() -> Self {
        Self::lowpass(4)
    }
}

/// Values that a mask can zero out.
pub trait Maskable: Copy {
    fn masked(self) -> Self;
}

impl Maskable for f64 {
    fn masked(self) -> Self {
        0.0
    }
}

impl Maskable for SignMagnitude {
    fn masked(self) -> Self {
        SignMagnitude::zero(self.width())
    }
}

pub fn apply_mask<T: Maskable>(block: &Block<T>, mask: &FrequencyMask) -> Block<T> {
    std::array::from_fn(|u| {
        std::array::from_fn(|v| {
            if mask.keeps(u, v) {
                block[u][v]
            } else {
                block[u][v].masked()
            }
        })
    })
}

/// Basis factors quantized to `b` magnitude bits, indexed `[k][i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTable {
    bits: u32,
    entries: Block<SignMagnitude>,
}

pub fn quantize_coefficients(bits: u32) -> Result<CoefficientTable> {
    let sel = AccuracySelect::from_bits(bits)?;
    let mut entries = [[SignMagnitude::zero(sel.bits()); N]; N];
    for (k, row) in entries.iter_mut().enumerate() {
        for (i, e) in row.iter_mut().enumerate() {
            *e = SignMagnitude::quantize(basis(k, i), bits)?;
        }
    }
    Ok(CoefficientTable { bits, entries })
}

impl CoefficientTable {
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn entry(&self, k: usize, i: usize) -> SignMagnitude {
        self.entries[k][i]
    }

    /// Forward coefficients for output `k`.
    pub fn row(&self, k: usize) -> [SignMagnitude; N] {
        self.entries[k]
    }

    /// Inverse coefficients for output `i`.
    pub fn column(&self, i: usize) -> [SignMagnitude; N] {
        column(&self.entries, i)
    }
}

/// Output of a fixed-point transform together with its accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transformed<T> {
    pub data: T,
    /// Fixed-schedule MAC cycles.
    pub cycles: u64,
    /// Data-dependent MAC cycles.
    pub cycles_data: u64,
    /// MAC outputs that saturated.
    pub clamps: u64,
}

/// DCT/IDCT engine on the ARSC MAC at one accuracy setting.
#[derive(Debug, Clone)]
pub struct ScTransform {
    sel: AccuracySelect,
    table: CoefficientTable,
}

impl ScTransform {
    pub fn new(sel: AccuracySelect) -> Self {
        let table = quantize_coefficients(sel.bits()).expect("select widths are valid");
        Self { sel, table }
    }

    pub fn select(&self) -> AccuracySelect {
        self.sel
    }

    pub fn table(&self) -> &CoefficientTable {
        &self.table
    }

    fn pass(
        &self,
        a: &[SignMagnitude; N],
        coeffs: impl Fn(usize) -> [SignMagnitude; N],
        gain_log2: i32,
    ) -> Result<Transformed<[SignMagnitude; N]>> {
        let mut out = [SignMagnitude::zero(a[0].width()); N];
        let (mut cycles, mut cycles_data, mut clamps) = (0, 0, 0);
        for (j, o) in out.iter_mut().enumerate() {
            let r = mac_scaled(a, &coeffs(j), self.sel, gain_log2)?;
            *o = r.value;
            cycles += r.cycles_fixed;
            cycles_data += r.cycles_data;
            clamps += u64::from(r.clamped);
        }
        Ok(Transformed {
            data: out,
            cycles,
            cycles_data,
            clamps,
        })
    }

    /// One forward pass; outputs are the DCT scaled by `1/4`.
    pub fn forward_1d(&self, a: &[SignMagnitude; N]) -> Result<Transformed<[SignMagnitude; N]>> {
        self.pass(a, |k| self.table.row(k), -STAGE_SHIFT)
    }

    /// One inverse pass; outputs are the IDCT scaled by `4`.
    pub fn inverse_1d(&self, f: &[SignMagnitude; N]) -> Result<Transformed<[SignMagnitude; N]>> {
        self.pass(f, |i| self.table.column(i), STAGE_SHIFT)
    }

    fn pass_2d(
        &self,
        block: &Block<SignMagnitude>,
        order: PassOrder,
        one: impl Fn(&[SignMagnitude; N]) -> Result<Transformed<[SignMagnitude; N]>>,
    ) -> Result<Transformed<Block<SignMagnitude>>> {
        let (mut cycles, mut cycles_data, mut clamps) = (0, 0, 0);
        let data = separable(block, order, |v| {
            let t = one(v)?;
            cycles += t.cycles;
            cycles_data += t.cycles_data;
            clamps += t.clamps;
            Ok(t.data)
        })?;
        Ok(Transformed {
            data,
            cycles,
            cycles_data,
            clamps,
        })
    }

    /// Forward 2D transform, the DCT scaled by `1/16`.
    pub fn forward_2d(&self, block: &Block<SignMagnitude>) -> Result<Transformed<Block<SignMagnitude>>> {
        self.pass_2d(block, FORWARD_ORDER, |v| self.forward_1d(v))
    }

    /// Inverse 2D transform, undoing the `1/16` of [`Self::forward_2d`].
    pub fn inverse_2d(&self, block: &Block<SignMagnitude>) -> Result<Transformed<Block<SignMagnitude>>> {
        self.pass_2d(block, inverse_order(), |v| self.inverse_1d(v))
    }
}

pub fn dct1d_sc(
    a: &[SignMagnitude; N],
    sel: AccuracySelect,
) -> Result<Transformed<[SignMagnitude; N]>> {
    ScTransform::new(sel).forward_1d(a)
}

pub fn idct1d_sc(
    f: &[SignMagnitude; N],
    sel: AccuracySelect,
) -> Result<Transformed<[SignMagnitude; N]>> {
    ScTransform::new(sel).inverse_1d(f)
}

pub fn dct2d_sc(
    block: &Block<SignMagnitude>,
    sel: AccuracySelect,
) -> Result<Transformed<Block<SignMagnitude>>> {
    ScTransform::new(sel).forward_2d(block)
}

pub fn idct2d_sc(
    block: &Block<SignMagnitude>,
    sel: AccuracySelect,
) -> Result<Transformed<Block<SignMagnitude>>> {
    ScTransform::new(sel).inverse_2d(block)
}
