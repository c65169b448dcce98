//! Orthonormal 2D discrete wavelet transform with periodic extension.
//!
//! Each level filters and decimates the rows, then the columns. Inputs are
//! replicate-padded to a multiple of `2^levels`; the inverse crops back.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;
use core::str::FromStr;

use crate::error::{config_err, structure_err};
use crate::image::{crop, pad_to_multiple};
use crate::{Error, Image, Result};

/// Orthonormal wavelet families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WaveletFilter {
    #[default]
    Haar,
    /// Four-tap Daubechies filter (two vanishing moments).
    Daubechies4,
}

impl WaveletFilter {
    /// Analysis lowpass taps.
    pub fn lowpass(self) -> &'static [f64] {
        match self {
            WaveletFilter::Haar => &HAAR_LO,
            WaveletFilter::Daubechies4 => &D4_LO,
        }
    }

    /// Analysis highpass taps, `g[j] = (-1)^j h[L-1-j]`.
    pub fn highpass(self) -> &'static [f64] {
        match self {
            WaveletFilter::Haar => &HAAR_HI,
            WaveletFilter::Daubechies4 => &D4_HI,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WaveletFilter::Haar => "haar",
            WaveletFilter::Daubechies4 => "d4",
        }
    }
}

impl FromStr for WaveletFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(WaveletFilter::Haar),
            "d4" | "daubechies4" => Ok(WaveletFilter::Daubechies4),
            other => Err(config_err!("unknown wavelet filter '{other}' (expected haar or d4)")),
        }
    }
}

const HAAR_LO: [f64; 2] = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];
const HAAR_HI: [f64; 2] = [FRAC_1_SQRT_2, -FRAC_1_SQRT_2];

// (1+√3, 3+√3, 3−√3, 1−√3) / (4√2)
const D4_LO: [f64; 4] =
    [0.482_962_913_144_534_1, 0.836_516_303_737_807_9, 0.224_143_868_042_013_4, -0.129_409_522_551_260_4];
const D4_HI: [f64; 4] = [D4_LO[3], -D4_LO[2], D4_LO[1], -D4_LO[0]];

/// The three detail subbands of one decomposition level.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailBands {
    /// Lowpass along rows, highpass along columns.
    pub horizontal: Image,
    /// Highpass along rows, lowpass along columns.
    pub vertical: Image,
    /// Highpass along both.
    pub diagonal: Image,
}

impl DetailBands {
    pub fn iter(&self) -> impl Iterator<Item = &Image> {
        [&self.horizontal, &self.vertical, &self.diagonal].into_iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Image> {
        [&mut self.horizontal, &mut self.vertical, &mut self.diagonal].into_iter()
    }
}

/// Multi-level wavelet decomposition.
///
/// `details[0]` is the finest level; `approx` is the coarsest lowpass band.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomp {
    pub filter: WaveletFilter,
    pub approx: Image,
    pub details: Vec<DetailBands>,
    /// Dims of the input before padding.
    pub original_dims: (usize, usize),
}

impl WaveletDecomp {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Total number of stored coefficients.
    pub fn coefficient_count(&self) -> usize {
        self.approx.len() + self.details.iter().flat_map(DetailBands::iter).map(Image::len).sum::<usize>()
    }
}

fn analyze_1d(x: &[f64], lo_taps: &[f64], hi_taps: &[f64], lo: &mut [f64], hi: &mut [f64]) {
    let n = x.len();
    for k in 0..n / 2 {
        let mut l = 0.0;
        let mut h = 0.0;
        for (j, (&a, &b)) in lo_taps.iter().zip(hi_taps).enumerate() {
            let v = x[(2 * k + j) % n];
            l += a * v;
            h += b * v;
        }
        lo[k] = l;
        hi[k] = h;
    }
}

fn synthesize_1d(lo: &[f64], hi: &[f64], lo_taps: &[f64], hi_taps: &[f64], x: &mut [f64]) {
    let n = x.len();
    x.fill(0.0);
    for k in 0..n / 2 {
        for (j, (&a, &b)) in lo_taps.iter().zip(hi_taps).enumerate() {
            x[(2 * k + j) % n] += a * lo[k] + b * hi[k];
        }
    }
}

/// Splits every row into lowpass and highpass halves.
fn analyze_rows(img: &Image, filter: WaveletFilter) -> (Image, Image) {
    let (h, w) = img.dims();
    let mut lo = Image::zeros(h, w / 2);
    let mut hi = Image::zeros(h, w / 2);
    for r in 0..h {
        analyze_1d(img.row(r), filter.lowpass(), filter.highpass(), lo.row_mut(r), hi.row_mut(r));
    }
    (lo, hi)
}

fn synthesize_rows(lo: &Image, hi: &Image, filter: WaveletFilter) -> Image {
    let (h, half) = lo.dims();
    let mut out = Image::zeros(h, 2 * half);
    for r in 0..h {
        synthesize_1d(lo.row(r), hi.row(r), filter.lowpass(), filter.highpass(), out.row_mut(r));
    }
    out
}

fn analyze_cols(img: &Image, filter: WaveletFilter) -> (Image, Image) {
    let (lo, hi) = analyze_rows(&img.transpose(), filter);
    (lo.transpose(), hi.transpose())
}

fn synthesize_cols(lo: &Image, hi: &Image, filter: WaveletFilter) -> Image {
    synthesize_rows(&lo.transpose(), &hi.transpose(), filter).transpose()
}

fn dwt2_level(img: &Image, filter: WaveletFilter) -> (Image, DetailBands) {
    let (row_lo, row_hi) = analyze_rows(img, filter);
    let (ll, horizontal) = analyze_cols(&row_lo, filter);
    let (vertical, diagonal) = analyze_cols(&row_hi, filter);
    (ll, DetailBands { horizontal, vertical, diagonal })
}

fn idwt2_level(approx: &Image, d: &DetailBands, filter: WaveletFilter) -> Image {
    let row_lo = synthesize_cols(approx, &d.horizontal, filter);
    let row_hi = synthesize_cols(&d.vertical, &d.diagonal, filter);
    synthesize_rows(&row_lo, &row_hi, filter)
}

/// Forward transform over `levels` levels.
pub fn dwt2(img: &Image, levels: usize, filter: WaveletFilter) -> Result<WaveletDecomp> {
    if levels == 0 {
        return Err(config_err!("wavelet levels must be at least 1"));
    }
    if levels > 16 {
        return Err(config_err!("wavelet levels {levels} is unreasonably deep"));
    }
    let mut approx = pad_to_multiple(img, 1 << levels);
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (ll, d) = dwt2_level(&approx, filter);
        details.push(d);
        approx = ll;
    }
    Ok(WaveletDecomp { filter, approx, details, original_dims: img.dims() })
}

/// Inverse of [`dwt2`], cropped to the recorded original dims.
pub fn idwt2(d: &WaveletDecomp) -> Result<Image> {
    validate(d)?;
    let mut approx = d.approx.clone();
    for bands in d.details.iter().rev() {
        approx = idwt2_level(&approx, bands, d.filter);
    }
    crop(&approx, d.original_dims)
        .map_err(|_| structure_err!("original dims {:?} exceed reconstructed {:?}", d.original_dims, approx.dims()))
}

fn validate(d: &WaveletDecomp) -> Result<()> {
    if d.details.is_empty() {
        return Err(structure_err!("decomposition has no detail levels"));
    }
    let mut expected = d.details[0].horizontal.dims();
    for (k, bands) in d.details.iter().enumerate() {
        if k > 0 {
            let (ph, pw) = expected;
            if ph % 2 != 0 || pw % 2 != 0 {
                return Err(structure_err!("level {} dims {ph}x{pw} are not even", k - 1));
            }
            expected = (ph / 2, pw / 2);
        }
        if let Some(bad) = bands.iter().find(|b| b.dims() != expected) {
            return Err(structure_err!("level {k} subband is {:?}, expected {:?}", bad.dims(), expected));
        }
    }
    if d.approx.dims() != expected {
        return Err(structure_err!("approx is {:?}, expected {:?}", d.approx.dims(), expected));
    }
    Ok(())
}
