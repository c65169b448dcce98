//! The four fusion rules and their dispatcher.
//!
//! * [`Method::WaveletMax`]: wavelet transform, larger-magnitude detail
//!   coefficient wins, approximation averaged.
//! * [`Method::SpatialSf`]: pixel blocks chosen by spatial frequency.
//! * [`Method::WaveletSf`]: spatial-frequency selection on wavelet detail bands.
//! * [`Method::ContourletSf`]: spatial-frequency selection on contourlet
//!   directional bands.
//!
//! The SF rule takes A when `SF_A > SF_B + TH`, B when `SF_A < SF_B - TH`, and
//! the pixel-wise mean otherwise.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::contourlet::{ct_forward, ct_inverse};
use crate::error::config_err;
use crate::image::{assemble_blocks, partition_blocks};
use crate::metrics::spatial_frequency;
use crate::wavelet::{dwt2, idwt2, WaveletFilter};
use crate::{Error, Image, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    WaveletMax,
    SpatialSf,
    WaveletSf,
    ContourletSf,
}

impl Method {
    /// All methods in reporting order.
    pub const ALL: [Method; 4] = [Method::WaveletMax, Method::SpatialSf, Method::WaveletSf, Method::ContourletSf];

    /// Command-line identifier.
    pub fn id(self) -> &'static str {
        match self {
            Method::WaveletMax => "wavelet",
            Method::SpatialSf => "sf",
            Method::WaveletSf => "wavelet-sf",
            Method::ContourletSf => "contourlet-sf",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.id() == s).ok_or_else(|| {
            config_err!("unknown fusion method '{s}' (expected wavelet, sf, wavelet-sf or contourlet-sf)")
        })
    }
}

/// Whether transform-domain SF selection decides per block or per subband.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Granularity {
    #[default]
    Block,
    Subband,
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "block" => Ok(Granularity::Block),
            "subband" => Ok(Granularity::Subband),
            other => Err(config_err!("unknown granularity '{other}' (expected block or subband)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionConfig {
    pub method: Method,
    /// Block height `M`.
    pub block_rows: usize,
    /// Block width `N`.
    pub block_cols: usize,
    /// Dead-zone `TH` of the SF rule, applied unscaled in every domain.
    pub threshold: f64,
    pub wavelet_levels: usize,
    pub wavelet_filter: WaveletFilter,
    pub pyr_levels: usize,
    pub dfb_depths: Vec<usize>,
    pub granularity: Granularity,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            method: Method::ContourletSf,
            block_rows: 8,
            block_cols: 8,
            threshold: 1.75,
            wavelet_levels: 1,
            wavelet_filter: WaveletFilter::Haar,
            pyr_levels: 1,
            dfb_depths: alloc::vec![3],
            granularity: Granularity::Block,
        }
    }
}

impl FusionConfig {
    pub fn with_method(method: Method) -> Self {
        FusionConfig { method, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_rows == 0 || self.block_cols == 0 {
            return Err(config_err!("block dims must be at least 1x1"));
        }
        if !(self.threshold >= 0.0 && self.threshold.is_finite()) {
            return Err(config_err!("threshold must be finite and non-negative, got {}", self.threshold));
        }
        if self.wavelet_levels == 0 {
            return Err(config_err!("wavelet levels must be at least 1"));
        }
        if self.dfb_depths.len() != self.pyr_levels {
            return Err(config_err!(
                "{} DFB depths given for {} pyramid levels",
                self.dfb_depths.len(),
                self.pyr_levels
            ));
        }
        Ok(())
    }
}

/// Outcome of one SF comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectionChoice {
    TakeA,
    TakeB,
    Average,
}

/// Three-way SF rule with dead-zone `th`.
pub fn select_by_sf(sf_a: f64, sf_b: f64, th: f64) -> SelectionChoice {
    if sf_a > sf_b + th {
        SelectionChoice::TakeA
    } else if sf_a < sf_b - th {
        SelectionChoice::TakeB
    } else {
        SelectionChoice::Average
    }
}

/// Decisions taken on one band, row-major over its block grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BandDecisions {
    pub label: String,
    /// Block rows and columns; `(1, 1)` for a whole-subband decision.
    pub grid_dims: (usize, usize),
    pub choices: Vec<SelectionChoice>,
}

impl BandDecisions {
    pub fn count(&self, choice: SelectionChoice) -> usize {
        self.choices.iter().filter(|&&c| c == choice).count()
    }
}

/// Per-band decisions of an SF-based fusion. Empty for [`Method::WaveletMax`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FusionTrace {
    pub bands: Vec<BandDecisions>,
}

impl FusionTrace {
    pub fn count(&self, choice: SelectionChoice) -> usize {
        self.bands.iter().map(|b| b.count(choice)).sum()
    }

    pub fn total(&self) -> usize {
        self.bands.iter().map(|b| b.choices.len()).sum()
    }
}

/// Fused image plus the selection decisions that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Fused {
    pub image: Image,
    pub trace: FusionTrace,
}

fn mean(a: &Image, b: &Image) -> Result<Image> {
    a.zip_map(b, |x, y| (x + y) / 2.0)
}

fn apply_choice(choice: SelectionChoice, a: &Image, b: &Image) -> Result<Image> {
    match choice {
        SelectionChoice::TakeA => Ok(a.clone()),
        SelectionChoice::TakeB => Ok(b.clone()),
        SelectionChoice::Average => mean(a, b),
    }
}

fn sf_choice(a: &Image, b: &Image, th: f64) -> SelectionChoice {
    select_by_sf(spatial_frequency(a).sf, spatial_frequency(b).sf, th)
}

/// SF selection over `M x N` blocks of one band.
fn fuse_band_blocks(a: &Image, b: &Image, cfg: &FusionConfig, label: String) -> Result<(Image, BandDecisions)> {
    let grid_a = partition_blocks(a, cfg.block_rows, cfg.block_cols)?;
    let mut grid_b = partition_blocks(b, cfg.block_rows, cfg.block_cols)?;
    let mut choices = Vec::with_capacity(grid_a.blocks().len());
    for (ba, bb) in grid_a.blocks().iter().zip(grid_b.blocks_mut()) {
        let choice = sf_choice(ba, bb, cfg.threshold);
        *bb = apply_choice(choice, ba, bb)?;
        choices.push(choice);
    }
    let fused = assemble_blocks(&grid_b)?;
    Ok((fused, BandDecisions { label, grid_dims: grid_a.grid_dims(), choices }))
}

fn fuse_band(a: &Image, b: &Image, cfg: &FusionConfig, label: String) -> Result<(Image, BandDecisions)> {
    match cfg.granularity {
        Granularity::Block => fuse_band_blocks(a, b, cfg, label),
        Granularity::Subband => {
            let choice = sf_choice(a, b, cfg.threshold);
            Ok((apply_choice(choice, a, b)?, BandDecisions { label, grid_dims: (1, 1), choices: alloc::vec![choice] }))
        }
    }
}

fn check_inputs(a: &Image, b: &Image, cfg: &FusionConfig) -> Result<()> {
    cfg.validate()?;
    a.ensure_same_dims(b)
}

fn wavelet_max(a: &Image, b: &Image, cfg: &FusionConfig) -> Result<Fused> {
    let da = dwt2(a, cfg.wavelet_levels, cfg.wavelet_filter)?;
    let mut fused = dwt2(b, cfg.wavelet_levels, cfg.wavelet_filter)?;
    fused.approx = mean(&da.approx, &fused.approx)?;
    for (bands_a, bands_f) in da.details.iter().zip(fused.details.iter_mut()) {
        for (band_a, band_f) in bands_a.iter().zip(bands_f.iter_mut()) {
            *band_f = band_a.zip_map(band_f, |x, y| if x.abs() > y.abs() { x } else { y })?;
        }
    }
    Ok(Fused { image: idwt2(&fused)?, trace: FusionTrace::default() })
}

fn spatial_sf(a: &Image, b: &Image, cfg: &FusionConfig) -> Result<Fused> {
    let (image, decisions) = fuse_band_blocks(a, b, cfg, String::from("image"))?;
    Ok(Fused { image, trace: FusionTrace { bands: alloc::vec![decisions] } })
}

fn wavelet_sf(a: &Image, b: &Image, cfg: &FusionConfig) -> Result<Fused> {
    let da = dwt2(a, cfg.wavelet_levels, cfg.wavelet_filter)?;
    let mut fused = dwt2(b, cfg.wavelet_levels, cfg.wavelet_filter)?;
    fused.approx = mean(&da.approx, &fused.approx)?;
    let mut trace = FusionTrace::default();
    for (level, (bands_a, bands_f)) in da.details.iter().zip(fused.details.iter_mut()).enumerate() {
        let names = ["horizontal", "vertical", "diagonal"];
        for ((band_a, band_f), name) in bands_a.iter().zip(bands_f.iter_mut()).zip(names) {
            let label = alloc::format!("L{}/{name}", level + 1);
            let (band, decisions) = fuse_band(band_a, band_f, cfg, label)?;
            *band_f = band;
            trace.bands.push(decisions);
        }
    }
    Ok(Fused { image: idwt2(&fused)?, trace })
}

fn contourlet_sf(a: &Image, b: &Image, cfg: &FusionConfig) -> Result<Fused> {
    let da = ct_forward(a, cfg.pyr_levels, &cfg.dfb_depths)?;
    let mut fused = ct_forward(b, cfg.pyr_levels, &cfg.dfb_depths)?;
    fused.lowpass = mean(&da.lowpass, &fused.lowpass)?;
    let mut trace = FusionTrace::default();
    for (level, (bands_a, bands_f)) in da.directional.iter().zip(fused.directional.iter_mut()).enumerate() {
        for (dir, (band_a, band_f)) in bands_a.iter().zip(bands_f.iter_mut()).enumerate() {
            let label = alloc::format!("L{}/D{dir}", level + 1);
            let (band, decisions) = fuse_band(band_a, band_f, cfg, label)?;
            *band_f = band;
            trace.bands.push(decisions);
        }
    }
    Ok(Fused { image: ct_inverse(&fused)?, trace })
}

/// Wavelet fusion with the maximum-magnitude rule on details and mean approximation.
pub fn fuse_wavelet_max(a: &Image, b: &Image, cfg: &FusionConfig) -> Result<Image> {
    check_inputs(a, b, cfg)?;
    Ok(wavelet_max(a, b, cfg)?.image)
}

/// Block-wise spatial-frequency selection in the pixel domain.
pub fn fuse_spatial_sf(a: &Image, b: &Image, cfg: &FusionConfig) -> Result<Image> {
    check_inputs(a, b, cfg)?;
    Ok(spatial_sf(a, b, cfg)?.image)
}

/// Spatial-frequency selection on wavelet detail bands, mean approximation.
pub fn fuse_wavelet_sf(a: &Image, b: &Image, cfg: &FusionConfig) -> Result<Image> {
    check_inputs(a, b, cfg)?;
    Ok(wavelet_sf(a, b, cfg)?.image)
}

/// Spatial-frequency selection on contourlet directional bands, mean lowpass.
pub fn fuse_contourlet_sf(a: &Image, b: &Image, cfg: &FusionConfig) -> Result<Image> {
    check_inputs(a, b, cfg)?;
    Ok(contourlet_sf(a, b, cfg)?.image)
}

/// Runs `cfg.method` and returns the decisions alongside the image.
pub fn fuse_traced(a: &Image, b: &Image, cfg: &FusionConfig) -> Result<Fused> {
    check_inputs(a, b, cfg)?;
    match cfg.method {
        Method::WaveletMax => wavelet_max(a, b, cfg),
        Method::SpatialSf => spatial_sf(a, b, cfg),
        Method::WaveletSf => wavelet_sf(a, b, cfg),
        Method::ContourletSf => contourlet_sf(a, b, cfg),
    }
}

/// Fuses `a` and `b` with `cfg.method`.
pub fn fuse(a: &Image, b: &Image, cfg: &FusionConfig) -> Result<Image> {
    fuse_traced(a, b, cfg).map(|f| f.image)
}
