//! Spatial frequency and RMSE.

use crate::{Image, Result};

/// Row frequency, column frequency and their combination.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SfValue {
    pub rf: f64,
    pub cf: f64,
    pub sf: f64,
}

/// Spatial frequency of a block.
///
/// `RF² = (1/MN) Σ (F(m,n) - F(m,n-1))²` over horizontal neighbor pairs,
/// `CF²` likewise over vertical pairs, `SF = √(RF² + CF²)`. Pairs that would
/// reach outside the block are skipped; the divisor stays `MN`.
pub fn spatial_frequency(block: &Image) -> SfValue {
    let (h, w) = block.dims();
    let mut row_sum = 0.0;
    let mut col_sum = 0.0;
    for m in 0..h {
        let row = block.row(m);
        for pair in row.windows(2) {
            let d = pair[1] - pair[0];
            row_sum += d * d;
        }
        if m > 0 {
            for (a, b) in block.row(m - 1).iter().zip(row) {
                let d = b - a;
                col_sum += d * d;
            }
        }
    }
    let area = (h * w) as f64;
    let rf2 = row_sum / area;
    let cf2 = col_sum / area;
    SfValue { rf: libm::sqrt(rf2), cf: libm::sqrt(cf2), sf: libm::sqrt(rf2 + cf2) }
}

/// Root mean squared difference over all pixels.
pub fn rmse_pair(x: &Image, y: &Image) -> Result<f64> {
    x.ensure_same_dims(y)?;
    let sum: f64 = x.as_slice().iter().zip(y.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(libm::sqrt(sum / x.len() as f64))
}

/// Error of a fused image against both inputs, and optionally a ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsReport {
    /// RMSE between input A and the fused image.
    pub rmse1: f64,
    /// RMSE between input B and the fused image.
    pub rmse2: f64,
    /// Mean of `rmse1` and `rmse2`.
    pub rmse: f64,
    pub rmse_gt: Option<f64>,
    pub sf_a: Option<SfValue>,
    pub sf_b: Option<SfValue>,
    pub sf_f: Option<SfValue>,
}

impl MetricsReport {
    /// Adds the RMSE against a ground-truth image.
    pub fn with_ground_truth(mut self, fused: &Image, gt: &Image) -> Result<Self> {
        self.rmse_gt = Some(rmse_pair(fused, gt)?);
        Ok(self)
    }

    /// Adds whole-image spatial frequencies of the three images.
    pub fn with_spatial_frequency(mut self, a: &Image, b: &Image, f: &Image) -> Self {
        self.sf_a = Some(spatial_frequency(a));
        self.sf_b = Some(spatial_frequency(b));
        self.sf_f = Some(spatial_frequency(f));
        self
    }
}

/// RMSE of the fused image against each input and their mean.
pub fn fusion_rmse(a: &Image, b: &Image, f: &Image) -> Result<MetricsReport> {
    a.ensure_same_dims(b)?;
    let rmse1 = rmse_pair(a, f)?;
    let rmse2 = rmse_pair(b, f)?;
    Ok(MetricsReport { rmse1, rmse2, rmse: (rmse1 + rmse2) / 2.0, ..Default::default() })
}
