use mfusion_core::fusion::{fuse, FusionConfig, Method};
use mfusion_core::metrics::rmse_pair;
use mfusion_core::synth::{make_pair, test_chart, FocusMask};

fn report(mask: FocusMask, assert_improvement: bool) {
    let gt = test_chart(256, 256, 42).unwrap();
    let (a, b) = make_pair(&gt, mask, 2.0).unwrap();
    let base = rmse_pair(&a, &gt).unwrap().min(rmse_pair(&b, &gt).unwrap());
    for method in Method::ALL {
        let f = fuse(&a, &b, &FusionConfig::with_method(method)).unwrap();
        let e = rmse_pair(&f, &gt).unwrap();
        println!("{mask:?} {method}: rmse_gt {e:.4}, best input {base:.4}, {:.1}% lower", 100.0 * (1.0 - e / base));
        if assert_improvement {
            assert!(e < base, "{mask:?} {method}: {e} >= {base}");
        }
    }
}

#[test]
fn half_masks_improve_on_both_inputs() {
    report(FocusMask::VerticalHalf, true);
    report(FocusMask::HorizontalHalf, true);
}

/// A small sharp disk leaves the inputs close to ground truth already; the
/// numbers are logged for comparison only.
#[test]
fn disk_mask_report() {
    report(FocusMask::CENTERED_DISK, false);
}
