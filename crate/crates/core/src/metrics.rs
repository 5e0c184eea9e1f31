//! Depth-map error metrics: mean relative error, bad pixel ratio and mean
//! absolute error over pixels valid in both maps.

use std::fmt;

use thiserror::Error;

use crate::depth::DenseDepth;
use crate::num::Real;

pub const DEFAULT_BAD_PIXEL_THRESHOLD: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("prediction is {pred_w}x{pred_h} but ground truth is {gt_w}x{gt_h}")]
    Dimensions {
        pred_w: usize,
        pred_h: usize,
        gt_w: usize,
        gt_h: usize,
    },
    #[error("no pixel is valid in both prediction and ground truth")]
    NoOverlap,
    #[error("bad pixel threshold must be non-negative, got {0}")]
    Threshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    /// Mean relative error (fraction).
    pub mre: f64,
    /// Fraction of pixels with absolute error strictly above `d_th`.
    pub bpr: f64,
    /// Mean absolute error in metres.
    pub mae: f64,
    pub n_evaluated: usize,
    pub d_th: f64,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "mre,bpr,mae,n_evaluated,d_th";

    pub fn csv_line(&self) -> String {
        format!("{},{},{},{},{}", self.mre, self.bpr, self.mae, self.n_evaluated, self.d_th)
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MRE: {:.2}%", 100.0 * self.mre)?;
        writeln!(f, "BPR (d_th = {} m): {:.2}%", self.d_th, 100.0 * self.bpr)?;
        writeln!(f, "MAE: {:.3} m", self.mae)?;
        write!(f, "pixels: {}", self.n_evaluated)
    }
}

/// Compares `pred` against `gt`. Sums are accumulated in `f64` in raster order.
pub fn evaluate<T: Real>(pred: &DenseDepth<T>, gt: &DenseDepth<T>, d_th: f64) -> Result<EvalReport, MetricsError> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(MetricsError::Dimensions {
            pred_w: pred.width(),
            pred_h: pred.height(),
            gt_w: gt.width(),
            gt_h: gt.height(),
        });
    }
    if !(d_th >= 0.0) {
        return Err(MetricsError::Threshold(d_th));
    }
    let (mut rel, mut abs, mut bad, mut n) = (0.0f64, 0.0f64, 0usize, 0usize);
    for (p, g) in pred.raw().iter().zip(gt.raw()) {
        let (p, g) = (p.to_f64_lossy(), g.to_f64_lossy());
        if !(g > 0.0) || !g.is_finite() || !p.is_finite() {
            continue;
        }
        let e = (g - p).abs();
        rel += e / g;
        abs += e;
        bad += (e > d_th) as usize;
        n += 1;
    }
    if n == 0 {
        return Err(MetricsError::NoOverlap);
    }
    let nf = n as f64;
    Ok(EvalReport {
        mre: rel / nf,
        bpr: bad as f64 / nf,
        mae: abs / nf,
        n_evaluated: n,
        d_th,
    })
}
