use mfusion_core::metrics::spatial_frequency;
use mfusion_core::Image;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Direct transcription of the RF/CF double sums, 1-based indices, terms
/// whose neighbor would fall outside the block skipped.
fn brute_force_sf(f: &[Vec<f64>]) -> (f64, f64, f64) {
    let m_rows = f.len();
    let n_cols = f[0].len();
    let at = |m: usize, n: usize| f[m - 1][n - 1];
    let mut rf = 0.0;
    let mut cf = 0.0;
    for n in 1..=n_cols {
        for m in 1..=m_rows {
            if n >= 2 {
                rf += (at(m, n) - at(m, n - 1)).powi(2);
            }
            if m >= 2 {
                cf += (at(m, n) - at(m - 1, n)).powi(2);
            }
        }
    }
    let mn = (m_rows * n_cols) as f64;
    let (rf, cf) = ((rf / mn).sqrt(), (cf / mn).sqrt());
    (rf, cf, (rf * rf + cf * cf).sqrt())
}

#[test]
fn matches_brute_force_on_1000_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let rows: Vec<Vec<f64>> =
            (0..8).map(|_| (0..8).map(|_| (rng.next_u64() % 25_600) as f64 / 100.0).collect()).collect();
        let img = Image::from_vec(8, 8, rows.concat()).unwrap();
        let got = spatial_frequency(&img);
        let (rf, cf, sf) = brute_force_sf(&rows);
        worst = worst.max((got.rf - rf).abs()).max((got.cf - cf).abs()).max((got.sf - sf).abs());
    }
    assert!(worst <= 1e-12, "max diff {worst:e}");
}

#[test]
fn matches_brute_force_on_odd_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (h, w) in [(1, 1), (1, 5), (5, 1), (3, 8), (8, 2)] {
        let rows: Vec<Vec<f64>> = (0..h).map(|_| (0..w).map(|_| (rng.next_u64() % 256) as f64).collect()).collect();
        let got = spatial_frequency(&Image::from_vec(h, w, rows.concat()).unwrap());
        let (_, _, sf) = brute_force_sf(&rows);
        assert!((got.sf - sf).abs() <= 1e-12, "{h}x{w}");
    }
}
