//! Directional filter bank built from a quincunx lifting stage.
//!
//! The two-channel stage modulates the input by `(-1)^n` along columns, which
//! turns the diamond passband of a quincunx split into a fan, then applies one
//! predict and one update step on the checkerboard cosets. Lifting steps are
//! invertible whatever their weights, so every tree built from them
//! reconstructs exactly.
//!
//! Tree layout for depth `l` on an `H x W` band:
//!
//! * stage 1 splits columns: two `H x W/2` channels;
//! * stage 2 splits rows of both channels;
//! * stages 3.. split rows in the first-half subtree and columns in the
//!   second-half subtree, after a circular unit shear of the channel.
//!
//! Leaves `0..2^(l-1)` end up `H/2^(l-1) x W/2` and leaves `2^(l-1)..2^l` end up
//! `H/2 x W/2^(l-1)`.

use alloc::vec::Vec;

use super::pyramid::reflect;
use crate::error::{dim_err, structure_err};
use crate::{Image, Result};

const PREDICT_WEIGHT: f64 = 0.25;
const UPDATE_WEIGHT: f64 = 0.125;

/// Deepest tree [`dfb_analysis`] accepts.
pub const MAX_DFB_DEPTH: usize = 8;

#[inline]
fn lattice_neighbor_sum(y: &Image, m: usize, n: usize) -> f64 {
    let (h, w) = y.dims();
    let (mi, ni) = (m as isize, n as isize);
    y[(reflect(mi - 1, h), n)] + y[(reflect(mi + 1, h), n)] + y[(m, reflect(ni - 1, w))] + y[(m, reflect(ni + 1, w))]
}

/// Adds `weight * (sum of the 4 lattice neighbors)` to every sample of one coset.
/// The neighbors of a coset all lie in the other coset, so the pass is in-place safe.
fn lift(y: &mut Image, parity: usize, weight: f64) {
    let (h, w) = y.dims();
    for m in 0..h {
        let mut n = (m + parity) % 2;
        while n < w {
            let s = lattice_neighbor_sum(y, m, n);
            y[(m, n)] += weight * s;
            n += 2;
        }
    }
}

/// Multiplies column `n` by `(-1)^n`.
fn modulate(y: &mut Image) {
    for m in 0..y.height() {
        for v in y.row_mut(m).iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
}

/// Two-channel fan split. `ch0` holds the even coset (`m + n` even), `ch1` the
/// odd coset, each packed row by row into an `H x W/2` raster.
pub fn fan_split(band: &Image) -> Result<(Image, Image)> {
    let (h, w) = band.dims();
    if w % 2 != 0 {
        return Err(dim_err!("fan split needs an even width, got {h}x{w}"));
    }
    if h < 2 {
        return Err(dim_err!("fan split needs at least 2 rows, got {h}x{w}"));
    }
    let mut y = band.clone();
    modulate(&mut y);
    lift(&mut y, 1, -PREDICT_WEIGHT);
    lift(&mut y, 0, UPDATE_WEIGHT);

    let half = w / 2;
    let mut ch0 = Image::zeros(h, half);
    let mut ch1 = Image::zeros(h, half);
    for m in 0..h {
        let odd_row = m % 2;
        for j in 0..half {
            ch0[(m, j)] = y[(m, 2 * j + odd_row)];
            ch1[(m, j)] = y[(m, 2 * j + 1 - odd_row)];
        }
    }
    Ok((ch0, ch1))
}

/// Inverse of [`fan_split`].
pub fn fan_merge(ch0: &Image, ch1: &Image) -> Result<Image> {
    if ch0.dims() != ch1.dims() {
        return Err(structure_err!("fan channels differ: {:?} vs {:?}", ch0.dims(), ch1.dims()));
    }
    let (h, half) = ch0.dims();
    if h < 2 {
        return Err(structure_err!("fan channels need at least 2 rows, got {h}"));
    }
    let mut y = Image::zeros(h, 2 * half);
    for m in 0..h {
        let odd_row = m % 2;
        for j in 0..half {
            y[(m, 2 * j + odd_row)] = ch0[(m, j)];
            y[(m, 2 * j + 1 - odd_row)] = ch1[(m, j)];
        }
    }
    lift(&mut y, 0, -UPDATE_WEIGHT);
    lift(&mut y, 1, PREDICT_WEIGHT);
    modulate(&mut y);
    Ok(y)
}

/// `out(m, n) = in(m, n + s*m mod W)`
fn shear_rows(img: &Image, s: isize) -> Image {
    let (h, w) = img.dims();
    Image::from_fn(h, w, |m, n| img[(m, (n as isize + s * m as isize).rem_euclid(w as isize) as usize)])
}

/// `out(m, n) = in(m + s*n mod H, n)`
fn shear_cols(img: &Image, s: isize) -> Image {
    let (h, w) = img.dims();
    Image::from_fn(h, w, |m, n| img[((m as isize + s * n as isize).rem_euclid(h as isize) as usize, n)])
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Half {
    First,
    Second,
}

#[derive(Clone, Copy)]
enum Axis {
    Rows,
    Cols,
}

fn split(x: &Image, axis: Axis) -> Result<(Image, Image)> {
    match axis {
        Axis::Cols => fan_split(x),
        Axis::Rows => {
            let (a, b) = fan_split(&x.transpose())?;
            Ok((a.transpose(), b.transpose()))
        }
    }
}

fn merge(a: &Image, b: &Image, axis: Axis) -> Result<Image> {
    match axis {
        Axis::Cols => fan_merge(a, b),
        Axis::Rows => Ok(fan_merge(&a.transpose(), &b.transpose())?.transpose()),
    }
}

/// Which resampling precedes the split of a node at `stage`, and along which axis it splits.
/// `child` is 0 or 1 depending on which output of its parent the node is.
fn node_plan(stage: usize, half: Half, child: usize) -> (Axis, Option<(Half, isize)>) {
    if stage == 2 {
        return (Axis::Rows, None);
    }
    let sign = if child == 0 { 1 } else { -1 };
    match half {
        Half::First => (Axis::Rows, Some((Half::First, sign))),
        Half::Second => (Axis::Cols, Some((Half::Second, sign))),
    }
}

fn apply_shear(x: &Image, shear: Option<(Half, isize)>, inverse: bool) -> Image {
    match shear {
        None => x.clone(),
        Some((half, s)) => {
            let s = if inverse { -s } else { s };
            match half {
                Half::First => shear_rows(x, s),
                Half::Second => shear_cols(x, s),
            }
        }
    }
}

fn analyze_node(
    x: Image,
    remaining: usize,
    stage: usize,
    half: Half,
    child: usize,
    out: &mut Vec<Image>,
) -> Result<()> {
    if remaining == 0 {
        out.push(x);
        return Ok(());
    }
    let (axis, shear) = node_plan(stage, half, child);
    let (a, b) = split(&apply_shear(&x, shear, false), axis)?;
    analyze_node(a, remaining - 1, stage + 1, half, 0, out)?;
    analyze_node(b, remaining - 1, stage + 1, half, 1, out)
}

fn synthesize_node(leaves: &[Image], stage: usize, half: Half, child: usize) -> Result<Image> {
    if leaves.len() == 1 {
        return Ok(leaves[0].clone());
    }
    let mid = leaves.len() / 2;
    let a = synthesize_node(&leaves[..mid], stage + 1, half, 0)?;
    let b = synthesize_node(&leaves[mid..], stage + 1, half, 1)?;
    let (axis, shear) = node_plan(stage, half, child);
    Ok(apply_shear(&merge(&a, &b, axis)?, shear, true))
}

/// Splits `band` into `2^depth` directional subbands.
pub fn dfb_analysis(band: &Image, depth: usize) -> Result<Vec<Image>> {
    if depth == 0 {
        return Ok(alloc::vec![band.clone()]);
    }
    if depth > MAX_DFB_DEPTH {
        return Err(dim_err!("DFB depth {depth} exceeds {MAX_DFB_DEPTH}"));
    }
    let (h, w) = band.dims();
    let unit = 1usize << depth;
    if h % unit != 0 || w % unit != 0 {
        return Err(dim_err!("{h}x{w} band is not divisible by 2^{depth}"));
    }
    let (c0, c1) = fan_split(band)?;
    let mut out = Vec::with_capacity(unit);
    if depth == 1 {
        out.push(c0);
        out.push(c1);
        return Ok(out);
    }
    analyze_node(c0, depth - 1, 2, Half::First, 0, &mut out)?;
    analyze_node(c1, depth - 1, 2, Half::Second, 1, &mut out)?;
    Ok(out)
}

/// Expected leaf shapes for a band of `dims` split to `depth`.
pub fn subband_dims(dims: (usize, usize), depth: usize) -> Vec<(usize, usize)> {
    let (h, w) = dims;
    match depth {
        0 => alloc::vec![dims],
        1 => alloc::vec![(h, w / 2); 2],
        _ => {
            let half = 1usize << (depth - 1);
            let mut v = alloc::vec![(h / half, w / 2); half];
            v.extend(core::iter::repeat_n((h / 2, w / half), half));
            v
        }
    }
}

/// Inverse of [`dfb_analysis`]; the depth is inferred from the subband count.
pub fn dfb_synthesis(subbands: &[Image]) -> Result<Image> {
    let count = subbands.len();
    if count == 0 || !count.is_power_of_two() {
        return Err(structure_err!("{count} subbands is not a power of two"));
    }
    let depth = count.trailing_zeros() as usize;
    if depth == 0 {
        return Ok(subbands[0].clone());
    }
    let (h, w) = match depth {
        1 => (subbands[0].height(), 2 * subbands[0].width()),
        _ => (2 * subbands[count - 1].height(), 2 * subbands[0].width()),
    };
    let expected = subband_dims((h, w), depth);
    let unit = 1usize << depth;
    if h % unit != 0 || w % unit != 0 {
        return Err(structure_err!("subbands imply a {h}x{w} band, not divisible by 2^{depth}"));
    }
    for (i, (band, &dims)) in subbands.iter().zip(&expected).enumerate() {
        if band.dims() != dims {
            return Err(structure_err!("subband {i} is {:?}, expected {:?}", band.dims(), dims));
        }
    }
    if depth == 1 {
        return fan_merge(&subbands[0], &subbands[1]);
    }
    let half = count / 2;
    let c0 = synthesize_node(&subbands[..half], 2, Half::First, 0)?;
    let c1 = synthesize_node(&subbands[half..], 2, Half::Second, 1)?;
    fan_merge(&c0, &c1)
}
