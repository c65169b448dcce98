//! Contourlet transform: a Laplacian pyramid for scale, a directional filter
//! bank on every bandpass level for orientation.

mod dfb;
mod pyramid;

use alloc::vec::Vec;

pub use self::dfb::{dfb_analysis, dfb_synthesis, fan_merge, fan_split, subband_dims, MAX_DFB_DEPTH};
pub use self::pyramid::{expand, lp_analysis, lp_synthesis, reduce, LaplacianPyramid, LP_KERNEL};

use crate::error::{config_err, structure_err};
use crate::image::{crop, pad_to_multiple};
use crate::{Image, Result};

/// Contourlet coefficients.
///
/// `directional[k]` holds the `2^dfb_depths[k]` subbands of pyramid level `k`
/// (level 0 is the finest).
#[derive(Debug, Clone, PartialEq)]
pub struct ContourletDecomp {
    pub lowpass: Image,
    pub directional: Vec<Vec<Image>>,
    pub dfb_depths: Vec<usize>,
    /// Dims after replicate padding.
    pub padded_dims: (usize, usize),
    /// Dims of the input before padding.
    pub original_dims: (usize, usize),
}

impl ContourletDecomp {
    pub fn pyramid_levels(&self) -> usize {
        self.directional.len()
    }

    /// Lowpass plus every directional subband.
    pub fn coefficient_count(&self) -> usize {
        self.lowpass.len() + self.directional_count()
    }

    /// Samples held in directional subbands only.
    pub fn directional_count(&self) -> usize {
        self.directional.iter().flatten().map(Image::len).sum()
    }
}

/// Multiple that the input is padded to so every level splits evenly.
pub fn padding_multiple(pyr_levels: usize, dfb_depths: &[usize]) -> usize {
    let deepest = dfb_depths.iter().copied().max().unwrap_or(0);
    1usize << (pyr_levels + deepest)
}

fn check_config(pyr_levels: usize, dfb_depths: &[usize]) -> Result<()> {
    if pyr_levels == 0 {
        return Err(config_err!("contourlet needs at least one pyramid level"));
    }
    if dfb_depths.len() != pyr_levels {
        return Err(config_err!("{} DFB depths given for {pyr_levels} pyramid levels", dfb_depths.len()));
    }
    if let Some(&d) = dfb_depths.iter().find(|&&d| d > MAX_DFB_DEPTH) {
        return Err(config_err!("DFB depth {d} exceeds {MAX_DFB_DEPTH}"));
    }
    if pyr_levels + dfb_depths.iter().max().unwrap_or(&0) > 16 {
        return Err(config_err!("pyramid levels plus DFB depth exceed 16"));
    }
    Ok(())
}

/// Forward contourlet transform.
///
/// The input is replicate-padded once to a multiple of
/// `2^(pyr_levels + max(dfb_depths))`.
pub fn ct_forward(img: &Image, pyr_levels: usize, dfb_depths: &[usize]) -> Result<ContourletDecomp> {
    check_config(pyr_levels, dfb_depths)?;
    let padded = pad_to_multiple(img, padding_multiple(pyr_levels, dfb_depths));
    let pyr = lp_analysis(&padded, pyr_levels)?;
    let directional = pyr
        .bandpass
        .iter()
        .zip(dfb_depths)
        .map(|(band, &depth)| dfb_analysis(band, depth))
        .collect::<Result<Vec<_>>>()?;
    Ok(ContourletDecomp {
        lowpass: pyr.coarse,
        directional,
        dfb_depths: dfb_depths.to_vec(),
        padded_dims: padded.dims(),
        original_dims: img.dims(),
    })
}

/// Inverse of [`ct_forward`].
pub fn ct_inverse(d: &ContourletDecomp) -> Result<Image> {
    if d.directional.len() != d.dfb_depths.len() {
        return Err(structure_err!("{} directional levels but {} DFB depths", d.directional.len(), d.dfb_depths.len()));
    }
    let mut bandpass = Vec::with_capacity(d.directional.len());
    for (k, (bands, &depth)) in d.directional.iter().zip(&d.dfb_depths).enumerate() {
        if bands.len() != 1 << depth {
            return Err(structure_err!("level {k} has {} subbands, depth {depth}", bands.len()));
        }
        bandpass.push(dfb_synthesis(bands)?);
    }
    if bandpass.first().map(Image::dims) != Some(d.padded_dims) {
        return Err(structure_err!("finest band does not match padded dims {:?}", d.padded_dims));
    }
    let pyr = LaplacianPyramid { bandpass, coarse: d.lowpass.clone(), original_dims: d.padded_dims };
    let full = lp_synthesis(&pyr)?;
    crop(&full, d.original_dims)
        .map_err(|_| structure_err!("original dims {:?} exceed {:?}", d.original_dims, d.padded_dims))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::noise;
    use crate::Error;
    use proptest::prelude::*;

    #[test]
    fn default_config_shapes() {
        let d = ct_forward(&noise(64, 64, 1), 1, &[3]).unwrap();
        assert_eq!(d.lowpass.dims(), (32, 32));
        assert_eq!(d.directional[0].len(), 8);
        assert_eq!(d.directional_count(), 4096);
    }

    #[test]
    fn constant_image() {
        let d = ct_forward(&Image::filled(64, 64, 42.0), 1, &[3]).unwrap();
        assert!(d.lowpass.as_slice().iter().all(|v| (v - 42.0).abs() <= 1e-9));
        assert!(d.directional.iter().flatten().flat_map(|b| b.as_slice()).all(|v| v.abs() <= 1e-9));
    }

    #[test]
    fn roundtrip_configs() {
        for (levels, depths) in [(1, vec![3]), (2, vec![2, 3]), (3, vec![1, 2, 0])] {
            let x = noise(64, 64, levels as u64);
            let y = ct_inverse(&ct_forward(&x, levels, &depths).unwrap()).unwrap();
            assert!(x.max_abs_diff(&y) <= 1e-9, "{levels} {depths:?}");
        }
    }

    #[test]
    fn pads_awkward_dims() {
        let x = noise(50, 70, 9);
        let d = ct_forward(&x, 2, &[2, 3]).unwrap();
        assert_eq!(d.padded_dims, (64, 96));
        assert!(ct_inverse(&d).unwrap().max_abs_diff(&x) <= 1e-9);
    }

    #[test]
    fn per_level_critical_sampling() {
        let d = ct_forward(&noise(128, 128, 2), 2, &[2, 3]).unwrap();
        assert_eq!(d.directional[0].iter().map(Image::len).sum::<usize>(), 128 * 128);
        assert_eq!(d.directional[1].iter().map(Image::len).sum::<usize>(), 64 * 64);
    }

    #[test]
    fn zero_decomposition_inverts_to_zero() {
        let mut d = ct_forward(&noise(32, 32, 3), 1, &[3]).unwrap();
        d.lowpass = d.lowpass.map(|_| 0.0);
        for b in d.directional.iter_mut().flatten() {
            *b = b.map(|_| 0.0);
        }
        assert!(ct_inverse(&d).unwrap().as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn config_and_structure_errors() {
        let x = noise(32, 32, 4);
        assert!(matches!(ct_forward(&x, 2, &[3]), Err(Error::Config(_))));
        assert!(matches!(ct_forward(&x, 0, &[]), Err(Error::Config(_))));
        let mut d = ct_forward(&x, 1, &[3]).unwrap();
        d.directional[0].pop();
        assert!(matches!(ct_inverse(&d), Err(Error::Structure(_))));
    }

    /// Logs which subband captures a 45 degree grating; selectivity is not asserted.
    #[test]
    fn diagonal_grating_energy_report() {
        let x = Image::from_fn(64, 64, |r, c| {
            128.0 + 100.0 * libm::sin(2.0 * core::f64::consts::PI * (r + c) as f64 / 8.0)
        });
        let d = ct_forward(&x, 1, &[3]).unwrap();
        let energy: Vec<f64> = d.directional[0].iter().map(|b| b.as_slice().iter().map(|v| v * v).sum()).collect();
        let best = energy.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        std::println!("45 degree grating subband energies {energy:.0?}, max at {best}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn linearity(s1 in any::<u64>(), s2 in any::<u64>(), a in -2.0f64..2.0) {
            let x = noise(32, 32, s1);
            let y = noise(32, 32, s2);
            let mix = x.zip_map(&y, |p, q| a * p + q).unwrap();
            let dm = ct_forward(&mix, 2, &[2, 3]).unwrap();
            let dx = ct_forward(&x, 2, &[2, 3]).unwrap();
            let dy = ct_forward(&y, 2, &[2, 3]).unwrap();
            let lin = |m: &Image, p: &Image, q: &Image| m.max_abs_diff(&p.zip_map(q, |u, v| a * u + v).unwrap());
            prop_assert!(lin(&dm.lowpass, &dx.lowpass, &dy.lowpass) <= 1e-9);
            let triples = dm.directional.iter().flatten().zip(dx.directional.iter().flatten()).zip(dy.directional.iter().flatten());
            for ((m, p), q) in triples {
                prop_assert!(lin(m, p, q) <= 1e-9);
            }
        }
    }
}
