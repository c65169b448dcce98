//! Grayscale raster, edge padding, cropping and block tiling.

use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{config_err, dim_err, structure_err};
use crate::{Error, Result};

/// Row-major grayscale raster of finite `f64` samples.
///
/// Pixel values nominally live in `[0, 255]` but transform coefficients are
/// stored in the same type and may take any finite value.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Image {
    /// Builds an image from row-major samples.
    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(dim_err!("image dims must be positive, got {height}x{width}"));
        }
        if data.len() != height * width {
            return Err(dim_err!("{} samples do not fill a {height}x{width} image", data.len()));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Image { height, width, data })
    }

    /// All-zero image. Panics if either dimension is zero.
    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    /// Constant image. Panics if either dimension is zero.
    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        assert!(height > 0 && width > 0, "image dims must be positive");
        Image { height, width, data: alloc::vec![value; height * width] }
    }

    /// Image whose sample at `(row, col)` is `f(row, col)`. Panics if either dimension is zero.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(height > 0 && width > 0, "image dims must be positive");
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Image { height, width, data }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    /// `(height, width)`
    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.width..(r + 1) * self.width]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let w = self.width;
        &mut self.data[r * w..(r + 1) * w]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image { height: self.height, width: self.width, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise combination of two equally sized images.
    pub fn zip_map(&self, other: &Image, f: impl Fn(f64, f64) -> f64) -> Result<Image> {
        self.ensure_same_dims(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Image { height: self.height, width: self.width, data })
    }

    pub fn transpose(&self) -> Image {
        let mut out = Image::zeros(self.width, self.height);
        for r in 0..self.height {
            for c in 0..self.width {
                out.data[c * self.height + r] = self.data[r * self.width + c];
            }
        }
        out
    }

    /// Largest absolute pointwise difference. Panics on mismatched dims.
    pub fn max_abs_diff(&self, other: &Image) -> f64 {
        assert_eq!(self.dims(), other.dims(), "max_abs_diff on mismatched dims");
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| f64::max(m, libm::fabs(a - b)))
    }

    pub(crate) fn ensure_same_dims(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(dim_err!("{}x{} vs {}x{}", self.height, self.width, other.height, other.width));
        }
        Ok(())
    }

    /// Copies `src` into this image with its top-left corner at `(row, col)`.
    fn blit(&mut self, src: &Image, row: usize, col: usize) {
        for r in 0..src.height {
            let dst = (row + r) * self.width + col;
            self.data[dst..dst + src.width].copy_from_slice(src.row(r));
        }
    }

    /// Sub-raster `rows x cols` starting at `(row, col)`. Caller guarantees bounds.
    fn window(&self, row: usize, col: usize, rows: usize, cols: usize) -> Image {
        let mut data = Vec::with_capacity(rows * cols);
        for r in row..row + rows {
            data.extend_from_slice(&self.row(r)[col..col + cols]);
        }
        Image { height: rows, width: cols, data }
    }
}

impl Index<(usize, usize)> for Image {
    type Output = f64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.height && c < self.width);
        &self.data[r * self.width + c]
    }
}

impl IndexMut<(usize, usize)> for Image {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.height && c < self.width);
        &mut self.data[r * self.width + c]
    }
}

/// Grows `img` to `target` by replicating its last row and column.
pub fn pad_replicate(img: &Image, target: (usize, usize)) -> Result<Image> {
    let (h, w) = img.dims();
    let (th, tw) = target;
    if th < h || tw < w {
        return Err(dim_err!("cannot pad {h}x{w} down to {th}x{tw}"));
    }
    if (th, tw) == (h, w) {
        return Ok(img.clone());
    }
    Ok(Image::from_fn(th, tw, |r, c| img[(r.min(h - 1), c.min(w - 1))]))
}

/// Top-left `dims` sub-raster of `img`.
pub fn crop(img: &Image, dims: (usize, usize)) -> Result<Image> {
    let (h, w) = img.dims();
    let (ch, cw) = dims;
    if ch > h || cw > w || ch == 0 || cw == 0 {
        return Err(dim_err!("cannot crop {h}x{w} to {ch}x{cw}"));
    }
    if dims == img.dims() {
        return Ok(img.clone());
    }
    Ok(img.window(0, 0, ch, cw))
}

/// Smallest multiple of `m` that is `>= n`.
pub(crate) fn round_up(n: usize, m: usize) -> usize {
    n.div_ceil(m) * m
}

/// Pads by replication so both dims are multiples of `multiple`.
pub(crate) fn pad_to_multiple(img: &Image, multiple: usize) -> Image {
    let target = (round_up(img.height(), multiple), round_up(img.width(), multiple));
    pad_replicate(img, target).expect("target never smaller than source")
}

/// Tiling of a raster into `M x N` blocks, row-major.
///
/// Edge blocks are truncated to the raster, never padded: block `(r, c)` covers
/// rows `[r*M, min((r+1)*M, H))` and columns `[c*N, min((c+1)*N, W))`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGrid {
    source_dims: (usize, usize),
    block_dims: (usize, usize),
    grid_dims: (usize, usize),
    blocks: Vec<Image>,
}

impl BlockGrid {
    /// Builds a grid from parts without checking block shapes;
    /// [`assemble_blocks`] validates them.
    pub fn from_parts(source_dims: (usize, usize), block_dims: (usize, usize), blocks: Vec<Image>) -> Self {
        let grid_dims = grid_dims(source_dims, block_dims);
        BlockGrid { source_dims, block_dims, grid_dims, blocks }
    }

    pub fn source_dims(&self) -> (usize, usize) {
        self.source_dims
    }

    pub fn block_dims(&self) -> (usize, usize) {
        self.block_dims
    }

    /// Number of block rows and block columns.
    pub fn grid_dims(&self) -> (usize, usize) {
        self.grid_dims
    }

    pub fn block(&self, r: usize, c: usize) -> &Image {
        &self.blocks[r * self.grid_dims.1 + c]
    }

    pub fn blocks(&self) -> &[Image] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [Image] {
        &mut self.blocks
    }

    /// Row/column span covered by block `(r, c)`: `(row0, col0, rows, cols)`.
    pub fn block_span(&self, r: usize, c: usize) -> (usize, usize, usize, usize) {
        block_span(self.source_dims, self.block_dims, r, c)
    }
}

fn grid_dims((h, w): (usize, usize), (m, n): (usize, usize)) -> (usize, usize) {
    if m == 0 || n == 0 {
        return (0, 0);
    }
    (h.div_ceil(m), w.div_ceil(n))
}

fn block_span((h, w): (usize, usize), (m, n): (usize, usize), r: usize, c: usize) -> (usize, usize, usize, usize) {
    let r0 = r * m;
    let c0 = c * n;
    (r0, c0, (r0 + m).min(h) - r0, (c0 + n).min(w) - c0)
}

/// Splits `img` into `m x n` blocks with truncated edge blocks.
pub fn partition_blocks(img: &Image, m: usize, n: usize) -> Result<BlockGrid> {
    if m == 0 || n == 0 {
        return Err(config_err!("block dims must be at least 1x1, got {m}x{n}"));
    }
    let source_dims = img.dims();
    let block_dims = (m, n);
    let (gr, gc) = grid_dims(source_dims, block_dims);
    let mut blocks = Vec::with_capacity(gr * gc);
    for r in 0..gr {
        for c in 0..gc {
            let (r0, c0, rows, cols) = block_span(source_dims, block_dims, r, c);
            blocks.push(img.window(r0, c0, rows, cols));
        }
    }
    Ok(BlockGrid { source_dims, block_dims, grid_dims: (gr, gc), blocks })
}

/// Inverse of [`partition_blocks`].
pub fn assemble_blocks(grid: &BlockGrid) -> Result<Image> {
    let (h, w) = grid.source_dims;
    let (m, n) = grid.block_dims;
    if h == 0 || w == 0 || m == 0 || n == 0 {
        return Err(structure_err!("degenerate grid {h}x{w} with {m}x{n} blocks"));
    }
    let (gr, gc) = grid.grid_dims;
    if grid.blocks.len() != gr * gc {
        return Err(structure_err!("expected {} blocks, found {}", gr * gc, grid.blocks.len()));
    }
    let mut out = Image::zeros(h, w);
    for r in 0..gr {
        for c in 0..gc {
            let (r0, c0, rows, cols) = grid.block_span(r, c);
            let block = grid.block(r, c);
            if block.dims() != (rows, cols) {
                return Err(structure_err!(
                    "block ({r},{c}) is {}x{}, expected {rows}x{cols}",
                    block.height(),
                    block.width()
                ));
            }
            out.blit(block, r0, c0);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(h: usize, w: usize) -> Image {
        Image::from_fn(h, w, |r, c| (r * w + c) as f64)
    }

    #[test]
    fn from_vec_rejects_bad_input() {
        assert!(matches!(Image::from_vec(2, 2, vec![0.0; 3]), Err(Error::Dimension(_))));
        assert!(matches!(Image::from_vec(0, 2, vec![]), Err(Error::Dimension(_))));
        assert_eq!(Image::from_vec(1, 2, vec![0.0, f64::NAN]), Err(Error::NonFinite { index: 1 }));
    }

    #[test]
    fn pad_3x3_to_4x4_replicates_last_row_and_col() {
        let x = ramp(3, 3);
        let p = pad_replicate(&x, (4, 4)).unwrap();
        let expected = [[0.0, 1.0, 2.0, 2.0], [3.0, 4.0, 5.0, 5.0], [6.0, 7.0, 8.0, 8.0], [6.0, 7.0, 8.0, 8.0]];
        for (r, row) in expected.iter().enumerate() {
            assert_eq!(p.row(r), row);
        }
    }

    #[test]
    fn pad_same_dims_is_noop_and_shrink_fails() {
        let x = ramp(4, 4);
        assert_eq!(pad_replicate(&x, (4, 4)).unwrap(), x);
        assert!(matches!(pad_replicate(&x, (3, 5)), Err(Error::Dimension(_))));
    }

    #[test]
    fn crop_cases() {
        let x = ramp(4, 4);
        let c = crop(&x, (3, 3)).unwrap();
        assert_eq!(c.row(2), &[8.0, 9.0, 10.0]);
        assert_eq!(crop(&x, (4, 4)).unwrap(), x);
        assert!(matches!(crop(&ramp(2, 2), (3, 3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn partition_exact_tiling() {
        let g = partition_blocks(&ramp(16, 16), 8, 8).unwrap();
        assert_eq!(g.grid_dims(), (2, 2));
        assert!(g.blocks().iter().all(|b| b.dims() == (8, 8)));
    }

    #[test]
    fn partition_truncates_edge_blocks() {
        let g = partition_blocks(&ramp(10, 10), 8, 8).unwrap();
        let shapes: Vec<_> = g.blocks().iter().map(Image::dims).collect();
        assert_eq!(shapes, vec![(8, 8), (8, 2), (2, 8), (2, 2)]);
        assert_eq!(g.block(1, 1)[(0, 0)], 88.0);
    }

    #[test]
    fn partition_rejects_zero_block() {
        assert!(matches!(partition_blocks(&ramp(4, 4), 0, 8), Err(Error::Config(_))));
    }

    #[test]
    fn single_block_grid_assembles_to_block() {
        let x = ramp(5, 7);
        let g = partition_blocks(&x, 8, 8).unwrap();
        assert_eq!(g.grid_dims(), (1, 1));
        assert_eq!(assemble_blocks(&g).unwrap(), x);
    }

    #[test]
    fn assemble_rejects_mismatched_edge_block() {
        let g = partition_blocks(&ramp(10, 10), 8, 8).unwrap();
        let mut blocks = g.blocks().to_vec();
        blocks[3] = Image::zeros(2, 3);
        let bad = BlockGrid::from_parts((10, 10), (8, 8), blocks);
        assert!(matches!(assemble_blocks(&bad), Err(Error::Structure(_))));
    }

    #[test]
    fn partition_assemble_37x23() {
        let x = Image::from_fn(37, 23, |r, c| ((r * 31 + c * 17) % 97) as f64 * 0.37);
        let g = partition_blocks(&x, 8, 8).unwrap();
        assert_eq!(assemble_blocks(&g).unwrap(), x);
    }

    fn image_strategy() -> impl Strategy<Value = Image> {
        (1usize..20, 1usize..20).prop_flat_map(|(h, w)| {
            prop::collection::vec(-1e3f64..1e3, h * w).prop_map(move |v| Image::from_vec(h, w, v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn partition_assemble_bijection(x in image_strategy(), m in 1usize..10, n in 1usize..10) {
            let g = partition_blocks(&x, m, n).unwrap();
            prop_assert_eq!(assemble_blocks(&g).unwrap(), x);
        }

        #[test]
        fn pad_then_crop_is_identity(x in image_strategy(), dh in 0usize..5, dw in 0usize..5) {
            let p = pad_replicate(&x, (x.height() + dh, x.width() + dw)).unwrap();
            prop_assert_eq!(crop(&p, x.dims()).unwrap(), x);
        }
    }
}
