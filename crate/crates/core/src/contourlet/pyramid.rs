//! Laplacian pyramid with a 5-tap binomial-like kernel.
//!
//! Each level stores `x - expand(reduce(x))`, so synthesis recovers the input
//! exactly (up to rounding) whatever kernel is used.

use alloc::vec::Vec;

use crate::error::{config_err, structure_err};
use crate::image::{crop, pad_to_multiple};
use crate::{Image, Result};

/// Smoothing kernel applied before decimation and after zero insertion.
pub const LP_KERNEL: [f64; 5] = [0.05, 0.25, 0.40, 0.25, 0.05];

/// Laplacian pyramid. `bandpass[0]` has the dims of the padded input.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianPyramid {
    pub bandpass: Vec<Image>,
    pub coarse: Image,
    pub original_dims: (usize, usize),
}

impl LaplacianPyramid {
    pub fn levels(&self) -> usize {
        self.bandpass.len()
    }
}

/// Whole-sample symmetric reflection (`x[-1] = x[1]`), periodic in `2(n-1)`.
///
/// Reflection about integer points keeps index parity, which the zero-inserted
/// expansion and the quincunx lifting both rely on.
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m >= n as isize {
        (period - m) as usize
    } else {
        m as usize
    }
}

fn smooth_1d(src: &[f64], dst: &mut [f64], gain: f64) {
    let n = src.len();
    for (i, out) in dst.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (t, &k) in LP_KERNEL.iter().enumerate() {
            acc += k * src[reflect(i as isize + t as isize - 2, n)];
        }
        *out = gain * acc;
    }
}

fn smooth_rows(img: &Image, gain: f64) -> Image {
    let mut out = Image::zeros(img.height(), img.width());
    for r in 0..img.height() {
        smooth_1d(img.row(r), out.row_mut(r), gain);
    }
    out
}

fn smooth_separable(img: &Image, gain: f64) -> Image {
    smooth_rows(&smooth_rows(img, gain).transpose(), gain).transpose()
}

/// Smooth then keep every other row and column.
pub fn reduce(img: &Image) -> Image {
    let s = smooth_separable(img, 1.0);
    Image::from_fn(img.height().div_ceil(2), img.width().div_ceil(2), |r, c| s[(2 * r, 2 * c)])
}

/// Zero-insertion upsampling to `dims`, then smoothing with the kernel scaled by 2 per axis.
pub fn expand(img: &Image, dims: (usize, usize)) -> Image {
    let up = Image::from_fn(dims.0, dims.1, |r, c| if r % 2 == 0 && c % 2 == 0 { img[(r / 2, c / 2)] } else { 0.0 });
    smooth_separable(&up, 2.0)
}

/// Decomposes `img` into `levels` bandpass images and a coarse residual.
///
/// The input is replicate-padded to a multiple of `2^levels`.
pub fn lp_analysis(img: &Image, levels: usize) -> Result<LaplacianPyramid> {
    if levels == 0 {
        return Err(config_err!("pyramid levels must be at least 1"));
    }
    if levels > 16 {
        return Err(config_err!("pyramid levels {levels} is unreasonably deep"));
    }
    let mut current = pad_to_multiple(img, 1 << levels);
    let mut bandpass = Vec::with_capacity(levels);
    for _ in 0..levels {
        let coarse = reduce(&current);
        let predicted = expand(&coarse, current.dims());
        bandpass.push(current.zip_map(&predicted, |x, p| x - p)?);
        current = coarse;
    }
    Ok(LaplacianPyramid { bandpass, coarse: current, original_dims: img.dims() })
}

/// Inverse of [`lp_analysis`].
pub fn lp_synthesis(pyr: &LaplacianPyramid) -> Result<Image> {
    if pyr.bandpass.is_empty() {
        return Err(structure_err!("pyramid has no bandpass levels"));
    }
    for k in 0..pyr.bandpass.len() {
        let (h, w) = pyr.bandpass[k].dims();
        let next = pyr.bandpass.get(k + 1).unwrap_or(&pyr.coarse).dims();
        if h % 2 != 0 || w % 2 != 0 || next != (h / 2, w / 2) {
            return Err(structure_err!("level {} is {:?} but level {k} is {h}x{w}", k + 1, next));
        }
    }
    let mut current = pyr.coarse.clone();
    for band in pyr.bandpass.iter().rev() {
        current = expand(&current, band.dims()).zip_map(band, |p, d| p + d)?;
    }
    crop(&current, pyr.original_dims)
        .map_err(|_| structure_err!("original dims {:?} exceed {:?}", pyr.original_dims, current.dims()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::noise;

    #[test]
    fn reflect_is_whole_sample() {
        let idx: Vec<usize> = (-3..8).map(|i| reflect(i, 5)).collect();
        assert_eq!(idx, vec![3, 2, 1, 0, 1, 2, 3, 4, 3, 2, 1]);
        assert_eq!(reflect(-1, 2), 1);
        assert_eq!(reflect(2, 2), 0);
        assert_eq!(reflect(5, 1), 0);
    }

    #[test]
    fn kernel_sums_to_one() {
        assert!((LP_KERNEL.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_gives_zero_bandpass() {
        let p = lp_analysis(&Image::filled(32, 32, 117.0), 3).unwrap();
        assert!(p.coarse.as_slice().iter().all(|v| (v - 117.0).abs() <= 1e-12));
        for band in &p.bandpass {
            assert!(band.as_slice().iter().all(|v| v.abs() <= 1e-12));
        }
    }

    #[test]
    fn level_dims_halve() {
        let p = lp_analysis(&noise(64, 64, 1), 2).unwrap();
        assert_eq!(p.bandpass[0].dims(), (64, 64));
        assert_eq!(p.bandpass[1].dims(), (32, 32));
        assert_eq!(p.coarse.dims(), (16, 16));
    }

    #[test]
    fn finest_band_plus_expanded_coarse_is_input() {
        let x = noise(32, 32, 2);
        let p = lp_analysis(&x, 2).unwrap();
        let lower = LaplacianPyramid {
            bandpass: p.bandpass[1..].to_vec(),
            coarse: p.coarse.clone(),
            original_dims: p.bandpass[1].dims(),
        };
        let level1 = lp_synthesis(&lower).unwrap();
        let rebuilt = expand(&level1, x.dims()).zip_map(&p.bandpass[0], |a, b| a + b).unwrap();
        assert!(rebuilt.max_abs_diff(&x) <= 1e-12);
    }

    #[test]
    fn roundtrip_within_1e12() {
        for (h, w, levels) in [(64, 64, 1), (64, 64, 3), (37, 50, 2)] {
            let x = noise(h, w, (h * w) as u64);
            let y = lp_synthesis(&lp_analysis(&x, levels).unwrap()).unwrap();
            assert!(x.max_abs_diff(&y) <= 1e-12, "{h}x{w} L{levels}");
        }
    }

    #[test]
    fn zero_pyramid_gives_zero_image() {
        let mut p = lp_analysis(&noise(16, 16, 3), 2).unwrap();
        p.coarse = p.coarse.map(|_| 0.0);
        for b in &mut p.bandpass {
            *b = b.map(|_| 0.0);
        }
        assert!(lp_synthesis(&p).unwrap().as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zeroed_coarse_removes_lowpass_contribution() {
        let x = noise(32, 32, 4);
        let p = lp_analysis(&x, 2).unwrap();
        let mut no_coarse = p.clone();
        no_coarse.coarse = p.coarse.map(|_| 0.0);
        let y = lp_synthesis(&no_coarse).unwrap();

        // Reference: expand the coarse residual twice and subtract it from X.
        let lowpass = expand(&expand(&p.coarse, (16, 16)), (32, 32));
        let expected = x.zip_map(&lowpass, |a, b| a - b).unwrap();
        assert!(y.max_abs_diff(&expected) <= 1e-10);
    }

    #[test]
    fn synthesis_rejects_bad_level_dims() {
        let mut p = lp_analysis(&noise(16, 16, 5), 2).unwrap();
        p.bandpass[1] = Image::zeros(7, 8);
        assert!(matches!(lp_synthesis(&p), Err(crate::Error::Structure(_))));
    }
}
