//! The four-method comparison: synthesize a pair, fuse it with every method, score each result.

use std::thread;
use std::time::{Duration, Instant};

use mfusion_core::fusion::{fuse, FusionConfig, Method};
use mfusion_core::metrics::{fusion_rmse, MetricsReport};
use mfusion_core::synth::{make_pair, FocusMask};
use mfusion_core::{Image, Result};

use crate::pnm::quantized;
use crate::table::{fmt_sig, Table};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "MFUSION_THREADS";

pub const CSV_HEADER: [&str; 5] = ["method", "rmse1", "rmse2", "rmse", "rmse_gt"];

#[derive(Debug, Clone)]
pub struct MethodResult {
    pub method: Method,
    pub fused: Image,
    pub metrics: MetricsReport,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct BenchRun {
    pub gt: Image,
    pub a: Image,
    pub b: Image,
    pub results: Vec<MethodResult>,
}

/// Worker count from [`THREADS_ENV`], else the available parallelism.
pub fn thread_cap() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run_one(a: &Image, b: &Image, gt: Option<&Image>, cfg: &FusionConfig) -> Result<MethodResult> {
    let start = Instant::now();
    let fused = fuse(a, b, cfg)?;
    let elapsed = start.elapsed();
    let mut metrics = fusion_rmse(a, b, &fused)?;
    if let Some(gt) = gt {
        metrics = metrics.with_ground_truth(&fused, gt)?;
    }
    Ok(MethodResult { method: cfg.method, fused, metrics, elapsed })
}

/// Fuses `a` and `b` with each method in `methods`, using at most `threads` workers.
///
/// `base` supplies every parameter except the method. Results keep the order of `methods`.
pub fn run_methods(
    a: &Image,
    b: &Image,
    gt: Option<&Image>,
    base: &FusionConfig,
    methods: &[Method],
    threads: usize,
) -> Result<Vec<MethodResult>> {
    let configs: Vec<FusionConfig> = methods.iter().map(|&method| FusionConfig { method, ..base.clone() }).collect();
    let mut results = Vec::with_capacity(configs.len());
    for batch in configs.chunks(threads.max(1)) {
        let outcomes: Vec<Result<MethodResult>> = thread::scope(|s| {
            let handles: Vec<_> = batch.iter().map(|cfg| s.spawn(move || run_one(a, b, gt, cfg))).collect();
            handles.into_iter().map(|h| h.join().expect("fusion worker panicked")).collect()
        });
        for outcome in outcomes {
            results.push(outcome?);
        }
    }
    Ok(results)
}

/// Blurs `gt` into an 8-bit multifocus pair and scores all four methods against it.
///
/// Inputs and fused outputs are quantized as they would be when stored, so the
/// reported numbers match `metrics` run on the written files.
pub fn run(gt: &Image, mask: FocusMask, sigma: f64, threads: usize) -> Result<BenchRun> {
    let gt = quantized(gt);
    let (a, b) = make_pair(&gt, mask, sigma)?;
    let (a, b) = (quantized(&a), quantized(&b));
    let mut results = run_methods(&a, &b, Some(&gt), &FusionConfig::default(), &Method::ALL, threads)?;
    for r in &mut results {
        r.fused = quantized(&r.fused);
        r.metrics = fusion_rmse(&a, &b, &r.fused)?.with_ground_truth(&r.fused, &gt)?;
    }
    Ok(BenchRun { gt, a, b, results })
}

/// One row per method: `method,rmse1,rmse2,rmse,rmse_gt`.
pub fn csv(results: &[MethodResult]) -> Table {
    let mut table = Table::new(&CSV_HEADER);
    for r in results {
        let m = &r.metrics;
        table.push(vec![
            r.method.id().to_string(),
            fmt_sig(m.rmse1),
            fmt_sig(m.rmse2),
            fmt_sig(m.rmse),
            m.rmse_gt.map_or_else(String::new, fmt_sig),
        ]);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use mfusion_core::synth::test_chart;

    #[test]
    fn rows_follow_method_order_regardless_of_threads() {
        let gt = test_chart(64, 64, 3).unwrap();
        let one = run(&gt, FocusMask::VerticalHalf, 2.0, 1).unwrap();
        let many = run(&gt, FocusMask::VerticalHalf, 2.0, 8).unwrap();
        let ids: Vec<_> = one.results.iter().map(|r| r.method.id()).collect();
        assert_eq!(ids, ["wavelet", "sf", "wavelet-sf", "contourlet-sf"]);
        assert_eq!(csv(&one.results).render(), csv(&many.results).render());
        for (x, y) in one.results.iter().zip(&many.results) {
            assert_eq!(x.fused, y.fused);
        }
    }

    #[test]
    fn mean_of_input_errors() {
        let gt = test_chart(64, 64, 9).unwrap();
        for r in run(&gt, FocusMask::HorizontalHalf, 1.5, 2).unwrap().results {
            assert!((r.metrics.rmse - (r.metrics.rmse1 + r.metrics.rmse2) / 2.0).abs() <= 1e-12);
            assert!(r.fused.as_slice().iter().all(|v| v.fract() == 0.0));
        }
    }
}
