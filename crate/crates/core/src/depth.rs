//! Sparse and dense depth containers.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geometry::PixelDepth;
use crate::num::{median_in_place, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DepthError {
    #[error("sample ({u}, {v}) outside {width}x{height} image")]
    OutOfBounds { u: f64, v: f64, width: usize, height: usize },
    #[error("sample at ({u}, {v}) has invalid depth {depth}")]
    InvalidDepth { u: f64, v: f64, depth: f64 },
    #[error("dimension mismatch: {0}")]
    Dimensions(String),
}

/// Irregular depth measurements on the pixel grid, at most one per pixel,
/// stored in raster order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDepth<T> {
    width: usize,
    height: usize,
    samples: Vec<PixelDepth<T>>,
}

impl<T: Real> SparseDepth<T> {
    /// Validates samples, snaps coordinates to integer pixels and averages
    /// duplicates.
    pub fn new(width: usize, height: usize, samples: impl IntoIterator<Item = PixelDepth<T>>) -> Result<Self, DepthError> {
        let mut acc: BTreeMap<usize, (T, usize)> = BTreeMap::new();
        for s in samples {
            let (u, v) = (s.u.round(), s.v.round());
            let inside = u >= T::zero()
                && v >= T::zero()
                && u < T::from_usize_lossy(width)
                && v < T::from_usize_lossy(height);
            if !inside || !u.is_finite() || !v.is_finite() {
                return Err(DepthError::OutOfBounds {
                    u: s.u.to_f64_lossy(),
                    v: s.v.to_f64_lossy(),
                    width,
                    height,
                });
            }
            if !(s.depth > T::zero()) || !s.depth.is_finite() {
                return Err(DepthError::InvalidDepth {
                    u: s.u.to_f64_lossy(),
                    v: s.v.to_f64_lossy(),
                    depth: s.depth.to_f64_lossy(),
                });
            }
            let idx = v.to_usize().unwrap_or(0) * width + u.to_usize().unwrap_or(0);
            let e = acc.entry(idx).or_insert((T::zero(), 0));
            e.0 = e.0 + s.depth;
            e.1 += 1;
        }
        let samples = acc
            .into_iter()
            .map(|(idx, (sum, n))| {
                PixelDepth::new(
                    T::from_usize_lossy(idx % width),
                    T::from_usize_lossy(idx / width),
                    sum / T::from_usize_lossy(n),
                )
            })
            .collect();
        Ok(Self { width, height, samples })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            samples: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[PixelDepth<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Linear pixel index of a sample.
    pub fn index_of(&self, s: &PixelDepth<T>) -> usize {
        s.v.to_usize().unwrap_or(0) * self.width + s.u.to_usize().unwrap_or(0)
    }

    /// Rasterises the samples; pixels without a sample are invalid.
    pub fn to_dense(&self) -> DenseDepth<T> {
        let mut d = DenseDepth::invalid(self.width, self.height);
        for s in &self.samples {
            let idx = self.index_of(s);
            d.data[idx] = s.depth;
        }
        d
    }
}

/// Per-pixel depth map; invalid pixels hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseDepth<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Real> DenseDepth<T> {
    pub fn invalid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![T::nan(); width * height],
        }
    }

    pub fn filled(width: usize, height: usize, depth: T) -> Self {
        Self {
            width,
            height,
            data: vec![depth; width * height],
        }
    }

    /// Wraps raw row-major values; non-finite or non-positive entries become invalid.
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self, DepthError> {
        if data.len() != width * height {
            return Err(DepthError::Dimensions(format!(
                "{} values for {width}x{height}",
                data.len()
            )));
        }
        let data = data
            .into_iter()
            .map(|d| if d > T::zero() && d.is_finite() { d } else { T::nan() })
            .collect();
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Option<T>) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                data.push(match f(u, v) {
                    Some(d) if d > T::zero() && d.is_finite() => d,
                    _ => T::nan(),
                });
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Option<T> {
        self.get_index(v * self.width + u)
    }

    #[inline]
    pub fn get_index(&self, idx: usize) -> Option<T> {
        let d = self.data[idx];
        if d.is_nan() {
            None
        } else {
            Some(d)
        }
    }

    /// Sets a pixel; non-positive or non-finite values mark it invalid.
    pub fn set(&mut self, u: usize, v: usize, depth: Option<T>) {
        self.data[v * self.width + u] = match depth {
            Some(d) if d > T::zero() && d.is_finite() => d,
            _ => T::nan(),
        };
    }

    pub fn raw(&self) -> &[T] {
        &self.data
    }

    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|d| !d.is_nan()).count()
    }

    pub fn median(&self) -> Option<T> {
        let mut vals: Vec<T> = self.data.iter().copied().filter(|d| !d.is_nan()).collect();
        median_in_place(&mut vals)
    }

    pub fn cast<U: Real>(&self) -> DenseDepth<U> {
        DenseDepth {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|d| U::lit(d.to_f64_lossy())).collect(),
        }
    }
}
