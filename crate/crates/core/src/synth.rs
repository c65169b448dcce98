//! Synthetic ground truth and multifocus pairs.

use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::config_err;
use crate::{Image, Result};

/// Region that is in focus in image A (and out of focus in B).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FocusMask {
    /// Left half sharp in A.
    #[default]
    VerticalHalf,
    /// Top half sharp in A.
    HorizontalHalf,
    /// Disk sharp in A; center and radius are fractions of width/height and of `min(h, w)`.
    Disk { center_x: f64, center_y: f64, radius: f64 },
}

impl FocusMask {
    pub const CENTERED_DISK: FocusMask = FocusMask::Disk { center_x: 0.5, center_y: 0.5, radius: 0.3 };

    /// True where image A shows the ground truth.
    pub fn contains(&self, r: usize, c: usize, (h, w): (usize, usize)) -> bool {
        match *self {
            FocusMask::VerticalHalf => c < w / 2,
            FocusMask::HorizontalHalf => r < h / 2,
            FocusMask::Disk { center_x, center_y, radius } => {
                let dy = r as f64 + 0.5 - center_y * h as f64;
                let dx = c as f64 + 0.5 - center_x * w as f64;
                let rad = radius * h.min(w) as f64;
                dx * dx + dy * dy <= rad * rad
            }
        }
    }

    /// Hard 0/1 mask raster.
    pub fn render(&self, dims: (usize, usize)) -> Image {
        Image::from_fn(dims.0, dims.1, |r, c| if self.contains(r, c, dims) { 1.0 } else { 0.0 })
    }
}

/// Half-sample symmetric reflection (`x[-1] = x[0]`), periodic in `2n`.
fn reflect_half(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period);
    if m >= n as isize {
        (period - 1 - m) as usize
    } else {
        m as usize
    }
}

/// Normalized Gaussian taps for offsets `-radius..=radius`, `radius = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> alloc::vec::Vec<f64> {
    let radius = libm::ceil(3.0 * sigma) as isize;
    let mut taps: alloc::vec::Vec<f64> =
        (-radius..=radius).map(|k| libm::exp(-((k * k) as f64) / (2.0 * sigma * sigma))).collect();
    let total: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= total);
    taps
}

fn convolve_rows(img: &Image, taps: &[f64]) -> Image {
    let (h, w) = img.dims();
    let radius = (taps.len() / 2) as isize;
    let mut out = Image::zeros(h, w);
    for r in 0..h {
        let src = img.row(r);
        for (c, dst) in out.row_mut(r).iter_mut().enumerate() {
            *dst =
                taps.iter().enumerate().map(|(t, k)| k * src[reflect_half(c as isize + t as isize - radius, w)]).sum();
        }
    }
    out
}

/// Separable Gaussian blur with half-sample symmetric boundaries.
///
/// The extension makes the blur mean-preserving; `sigma = 0` returns the input.
pub fn gaussian_blur(img: &Image, sigma: f64) -> Result<Image> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(config_err!("blur sigma must be finite and non-negative, got {sigma}"));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let taps = gaussian_kernel(sigma);
    Ok(convolve_rows(&convolve_rows(img, &taps).transpose(), &taps).transpose())
}

/// Builds a multifocus pair: A is sharp inside `mask`, B is sharp outside it.
pub fn make_pair(gt: &Image, mask: FocusMask, sigma: f64) -> Result<(Image, Image)> {
    let blurred = gaussian_blur(gt, sigma)?;
    let dims = gt.dims();
    let pick = |sharp_in_mask: bool| {
        Image::from_fn(dims.0, dims.1, |r, c| {
            if mask.contains(r, c, dims) == sharp_in_mask {
                gt[(r, c)]
            } else {
                blurred[(r, c)]
            }
        })
    };
    Ok((pick(true), pick(false)))
}

/// Deterministic test chart in `[0, 255]`: a 4x4 tiling of checkerboards
/// (cell sizes 1, 2, 4, 8) and sinusoidal gratings (0, 45, 90, 135 degrees),
/// overlaid with seeded flat rectangles.
pub fn test_chart(h: usize, w: usize, seed: u64) -> Result<Image> {
    if h < 64 || w < 64 {
        return Err(config_err!("test chart needs at least 64x64, got {h}x{w}"));
    }
    let mut img = Image::from_fn(h, w, |r, c| {
        let tile_r = r * 4 / h;
        let tile_c = c * 4 / w;
        let kind = (tile_r * 5 + tile_c) % 8;
        if kind < 4 {
            let cell = 1usize << kind;
            if (r / cell + c / cell).is_multiple_of(2) {
                40.0
            } else {
                215.0
            }
        } else {
            let theta = (kind - 4) as f64 * PI / 4.0;
            let t = r as f64 * libm::sin(theta) + c as f64 * libm::cos(theta);
            128.0 + 100.0 * libm::sin(2.0 * PI * t / 8.0)
        }
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut below = |n: usize| (rng.next_u64() % n as u64) as usize;
    for _ in 0..12 {
        let rh = 8 + below(h / 4 - 7);
        let rw = 8 + below(w / 4 - 7);
        let r0 = below(h - rh + 1);
        let c0 = below(w - rw + 1);
        let value = below(256) as f64;
        for r in r0..r0 + rh {
            img.row_mut(r)[c0..c0 + rw].fill(value);
        }
    }
    Ok(img)
}
