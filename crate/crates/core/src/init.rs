//! Dense initialisation from sparse samples and per-superpixel initial planes.

use rustdct::{DctPlanner, TransformType2And3};
use std::sync::Arc;
use thiserror::Error;

use crate::depth::{DenseDepth, SparseDepth};
use crate::geometry::{
    backproject, fit_plane_lsq, object_normal, point_plane_distance, CameraIntrinsics, GeometryError, PixelDepth,
    Plane, Point3,
};
use crate::num::{median_in_place, Real};
use crate::segmentation::SuperpixelGraph;

/// Upper bound on the points used to fit one superpixel's plane.
pub const MAX_FIT_POINTS: usize = 200;

/// Smallest smoothness weight used when the grid is not fully observed.
const MIN_LAMBDA: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InitError {
    #[error("no depth samples to interpolate")]
    NoData,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    Dimensions(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlsParams {
    /// Weight of the squared-Laplacian penalty, in pixel-grid units.
    pub lambda: f64,
    /// Bisquare reweighting passes after the initial solve.
    pub robust_passes: usize,
    /// Relative residual at which conjugate gradients stop.
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for PlsParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            robust_passes: 1,
            tolerance: 1e-6,
            max_iters: 4000,
        }
    }
}

/// Penalised least squares interpolation of sparse depth.
///
/// Minimises `Σ w(x)(D(x) − d(x))² + λ‖∇²D‖²` over the full grid, where
/// the second-derivative penalty is the discrete thin-plate energy
/// `‖∂uu D‖² + 2‖∂uv D‖² + ‖∂vv D‖²`. Solved by conjugate gradients
/// preconditioned with the cosine-basis inverse of `w̄ I + λ L²`. Output is clamped to a band
/// around the sample range so it stays positive.
pub fn pls_interpolate<T: Real>(sparse: &SparseDepth<T>, params: &PlsParams) -> Result<DenseDepth<T>, InitError> {
    if sparse.is_empty() {
        return Err(InitError::NoData);
    }
    if !(params.lambda >= 0.0) || !params.lambda.is_finite() {
        return Err(InitError::InvalidParameter(format!("lambda = {}", params.lambda)));
    }
    let (w, h) = (sparse.width(), sparse.height());
    let n = w * h;
    let idx: Vec<usize> = sparse.samples().iter().map(|s| sparse.index_of(s)).collect();
    let vals: Vec<f64> = sparse.samples().iter().map(|s| s.depth.to_f64_lossy()).collect();

    if idx.len() == n && params.lambda == 0.0 {
        let mut out = DenseDepth::invalid(w, h);
        for (s, &p) in sparse.samples().iter().zip(&idx) {
            out.set(p % w, p / w, Some(s.depth));
        }
        return Ok(out);
    }
    let lambda = params.lambda.max(MIN_LAMBDA);

    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let (lo_d, hi_d) = vals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));

    let mut weights = vec![0.0; n];
    let mut target = vec![0.0; n];
    for (&p, &v) in idx.iter().zip(&vals) {
        weights[p] = 1.0;
        target[p] = v - mean;
    }

    let mut solver = PlsSolver::new(w, h, lambda);
    let mut x = vec![0.0; n];
    solver.solve(&weights, &target, &mut x, params);

    let scale_floor = 1e-2 * vals.iter().map(|v| v.abs()).sum::<f64>() / vals.len() as f64;
    for _ in 0..params.robust_passes {
        let mut residuals: Vec<f64> = idx.iter().map(|&p| target[p] - x[p]).collect();
        let mut abs_dev: Vec<f64> = {
            let med = median_in_place(&mut residuals.clone()).unwrap_or(0.0);
            residuals.iter_mut().map(|r| (*r - med).abs()).collect()
        };
        let mad = median_in_place(&mut abs_dev).unwrap_or(0.0);
        let scale = (1.4826 * mad).max(scale_floor).max(1e-12);
        for &p in &idx {
            let u = (target[p] - x[p]) / (4.685 * scale);
            weights[p] = if u.abs() < 1.0 { (1.0 - u * u).powi(2) } else { 0.0 };
        }
        if weights.iter().all(|&wt| wt == 0.0) {
            break;
        }
        solver.solve(&weights, &target, &mut x, params);
    }

    let range = hi_d - lo_d;
    let lo = (lo_d - 0.25 * range).max(0.5 * lo_d);
    let hi = hi_d + 0.25 * range;
    let data = x.iter().map(|&v| T::lit((v + mean).clamp(lo, hi))).collect();
    DenseDepth::from_vec(w, h, data).map_err(|e| InitError::Dimensions(e.to_string()))
}

struct PlsSolver {
    w: usize,
    h: usize,
    lambda: f64,
    eig: Vec<f64>,
    row2: Arc<dyn TransformType2And3<f64>>,
    col2: Arc<dyn TransformType2And3<f64>>,
    buf: Vec<f64>,
    tbuf: Vec<f64>,
    scratch: Vec<f64>,
}

impl PlsSolver {
    fn new(w: usize, h: usize, lambda: f64) -> Self {
        let mut planner = DctPlanner::new();
        let row2 = planner.plan_dct2(w);
        let col2 = planner.plan_dct2(h);
        let scratch_len = row2.get_scratch_len().max(col2.get_scratch_len());
        let pi = std::f64::consts::PI;
        let mut eig = vec![0.0; w * h];
        for l in 0..h {
            let ey = 2.0 - 2.0 * (pi * l as f64 / h as f64).cos();
            for k in 0..w {
                let ex = 2.0 - 2.0 * (pi * k as f64 / w as f64).cos();
                eig[l * w + k] = (ex + ey) * (ex + ey);
            }
        }
        Self {
            w,
            h,
            lambda,
            eig,
            row2,
            col2,
            buf: vec![0.0; w * h],
            tbuf: vec![0.0; w * h],
            scratch: vec![0.0; scratch_len],
        }
    }

    /// out = (W + λ SᵀS) x
    fn apply(&self, weights: &[f64], x: &[f64], tmp: &mut [f64], out: &mut [f64]) {
        second_difference_normal(self.w, self.h, x, tmp, out);
        for i in 0..x.len() {
            out[i] = weights[i] * x[i] + self.lambda * out[i];
        }
    }

    fn transform_2d(&mut self, forward: bool) {
        let (w, h) = (self.w, self.h);
        for row in self.buf.chunks_exact_mut(w) {
            if forward {
                self.row2.process_dct2_with_scratch(row, &mut self.scratch);
            } else {
                self.row2.process_dct3_with_scratch(row, &mut self.scratch);
            }
        }
        for v in 0..h {
            for u in 0..w {
                self.tbuf[u * h + v] = self.buf[v * w + u];
            }
        }
        for col in self.tbuf.chunks_exact_mut(h) {
            if forward {
                self.col2.process_dct2_with_scratch(col, &mut self.scratch);
            } else {
                self.col2.process_dct3_with_scratch(col, &mut self.scratch);
            }
        }
        for v in 0..h {
            for u in 0..w {
                self.buf[v * w + u] = self.tbuf[u * h + v];
            }
        }
    }

    /// z = M⁻¹ r with M = w̄ I + λ L² (L the reflective grid Laplacian),
    /// diagonal in the cosine basis.
    fn precondition(&mut self, mean_weight: f64, r: &[f64], z: &mut [f64]) {
        self.buf.copy_from_slice(r);
        self.transform_2d(true);
        for (b, e) in self.buf.iter_mut().zip(&self.eig) {
            *b /= mean_weight + self.lambda * e;
        }
        self.transform_2d(false);
        let norm = 4.0 / (self.w * self.h) as f64;
        for (zi, b) in z.iter_mut().zip(&self.buf) {
            *zi = b * norm;
        }
    }

    fn solve(&mut self, weights: &[f64], target: &[f64], x: &mut [f64], params: &PlsParams) {
        let n = x.len();
        let mean_weight = (weights.iter().sum::<f64>() / n as f64).max(1e-6);
        let b: Vec<f64> = weights.iter().zip(target).map(|(w, t)| w * t).collect();
        let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut tmp = vec![0.0; n];
        let mut ap = vec![0.0; n];
        self.apply(weights, x, &mut tmp, &mut ap);
        let mut r: Vec<f64> = b.iter().zip(&ap).map(|(b, a)| b - a).collect();
        if b_norm == 0.0 && r.iter().all(|&v| v == 0.0) {
            return;
        }
        let stop = params.tolerance * b_norm.max(1e-300);
        let mut z = vec![0.0; n];
        self.precondition(mean_weight, &r, &mut z);
        let mut p = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        for _ in 0..params.max_iters {
            self.apply(weights, &p, &mut tmp, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if !(pap > 0.0) {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r_norm <= stop {
                break;
            }
            self.precondition(mean_weight, &r, &mut z);
            let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
    }
}

/// out = SᵀS x for the discrete thin-plate operator
/// `S = [∂uu; √2 ∂uv; ∂vv]`, with each stencil applied only where it fits
/// inside the grid. Its null space is the affine functions.
fn second_difference_normal(w: usize, h: usize, x: &[f64], tmp: &mut [f64], out: &mut [f64]) {
    out.fill(0.0);
    // ∂uu
    if w >= 3 {
        for v in 0..h {
            let row = v * w;
            for u in 1..w - 1 {
                tmp[row + u] = x[row + u - 1] - 2.0 * x[row + u] + x[row + u + 1];
            }
            for u in 1..w - 1 {
                let s = tmp[row + u];
                out[row + u - 1] += s;
                out[row + u] -= 2.0 * s;
                out[row + u + 1] += s;
            }
        }
    }
    // ∂vv
    if h >= 3 {
        for v in 1..h - 1 {
            for u in 0..w {
                let p = v * w + u;
                tmp[p] = x[p - w] - 2.0 * x[p] + x[p + w];
            }
        }
        for v in 1..h - 1 {
            for u in 0..w {
                let p = v * w + u;
                let s = tmp[p];
                out[p - w] += s;
                out[p] -= 2.0 * s;
                out[p + w] += s;
            }
        }
    }
    // ∂uv, weighted twice
    if w >= 2 && h >= 2 {
        for v in 0..h - 1 {
            for u in 0..w - 1 {
                let p = v * w + u;
                let s = 2.0 * (x[p + w + 1] - x[p + 1] - x[p + w] + x[p]);
                out[p + w + 1] += s;
                out[p + 1] -= s;
                out[p + w] -= s;
                out[p] += s;
            }
        }
    }
}

/// Region pixels at a fixed stride so that at most [`MAX_FIT_POINTS`] remain.
pub(crate) fn subsample(region: &[usize]) -> impl Iterator<Item = usize> + '_ {
    let stride = region.len().div_ceil(MAX_FIT_POINTS).max(1);
    region.iter().copied().step_by(stride)
}

fn region_points<T: Real>(
    graph: &SuperpixelGraph,
    i: usize,
    dense0: &DenseDepth<T>,
    k: &CameraIntrinsics<T>,
) -> Vec<Point3<T>> {
    subsample(graph.region(i))
        .filter_map(|p| {
            let d = dense0.get_index(p)?;
            let (u, v) = graph.coords(p);
            backproject(&PixelDepth::new(T::from_usize_lossy(u), T::from_usize_lossy(v), d), k).ok()
        })
        .collect()
}

fn region_depths<T: Real>(graph: &SuperpixelGraph, i: usize, dense0: &DenseDepth<T>) -> Vec<T> {
    graph.region(i).iter().filter_map(|&p| dense0.get_index(p)).collect()
}

fn check_dims<T: Real>(graph: &SuperpixelGraph, dense0: &DenseDepth<T>) -> Result<(), InitError> {
    if graph.width() != dense0.width() || graph.height() != dense0.height() {
        return Err(InitError::Dimensions(format!(
            "graph {}x{} vs depth {}x{}",
            graph.width(),
            graph.height(),
            dense0.width(),
            dense0.height()
        )));
    }
    Ok(())
}

/// Least-squares plane per superpixel from the initial dense map; regions
/// that cannot support a plane fall back to a front-parallel plane at their
/// median depth.
pub fn init_planes<T: Real>(
    graph: &SuperpixelGraph,
    dense0: &DenseDepth<T>,
    k: &CameraIntrinsics<T>,
) -> Result<Vec<Plane<T>>, InitError> {
    check_dims(graph, dense0)?;
    let global = dense0.median().unwrap_or_else(T::one);
    Ok((0..graph.len())
        .map(|i| {
            let pts = region_points(graph, i, dense0, k);
            match fit_plane_lsq(&pts) {
                Ok(plane) if feasible_on_region(&plane, graph, i, k) => plane,
                _ => {
                    let depth = median_in_place(&mut region_depths(graph, i, dense0)).unwrap_or(global);
                    Plane::front_parallel(depth)
                }
            }
        })
        .collect())
}

fn feasible_on_region<T: Real>(plane: &Plane<T>, graph: &SuperpixelGraph, i: usize, k: &CameraIntrinsics<T>) -> bool {
    subsample(graph.region(i)).all(|p| {
        let (u, v) = graph.coords(p);
        plane
            .depth_along(&k.ray(T::from_usize_lossy(u), T::from_usize_lossy(v)))
            .is_ok()
    })
}

/// Road/object initialisation for the cardboard-world model.
///
/// A superpixel is labelled road when the mean distance of its back-projected
/// points to `road` is below `epsilon`; otherwise it receives the upright
/// object plane through its centroid ray at the region's mean depth.
pub fn init_cardboard<T: Real>(
    graph: &SuperpixelGraph,
    dense0: &DenseDepth<T>,
    road: &Plane<T>,
    k: &CameraIntrinsics<T>,
    epsilon: T,
) -> Result<(Vec<Plane<T>>, Vec<bool>), InitError> {
    check_dims(graph, dense0)?;
    let n_obj = object_normal(road)?;
    let global = dense0.median().unwrap_or_else(T::one);
    let mut planes = Vec::with_capacity(graph.len());
    let mut is_road = Vec::with_capacity(graph.len());
    for i in 0..graph.len() {
        let pts = region_points(graph, i, dense0, k);
        let mean_dist = if pts.is_empty() {
            T::infinity()
        } else {
            pts.iter().map(|p| point_plane_distance(p, road)).sum::<T>() / T::from_usize_lossy(pts.len())
        };
        if mean_dist < epsilon {
            planes.push(*road);
            is_road.push(true);
        } else {
            let depths = region_depths(graph, i, dense0);
            let mean = if depths.is_empty() {
                global
            } else {
                depths.iter().copied().sum::<T>() / T::from_usize_lossy(depths.len())
            };
            planes.push(object_plane_at(graph, i, n_obj, mean, k)?);
            is_road.push(false);
        }
    }
    Ok((planes, is_road))
}

/// Object plane with normal `normal` crossing the centroid ray of region `i`
/// at `depth`.
pub(crate) fn object_plane_at<T: Real>(
    graph: &SuperpixelGraph,
    i: usize,
    normal: [T; 3],
    depth: T,
    k: &CameraIntrinsics<T>,
) -> Result<Plane<T>, GeometryError> {
    let (cu, cv) = graph.centroid(i);
    let anchor = backproject(&PixelDepth::new(T::lit(cu), T::lit(cv), depth), k)?;
    Plane::through_point(normal, anchor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::plane_depth_at;
    use rand::{Rng, SeedableRng};

    fn k() -> CameraIntrinsics<f64> {
        CameraIntrinsics::new(400.0, 32.0, -20.0).unwrap()
    }

    fn grid_graph(w: usize, h: usize, cell: usize) -> SuperpixelGraph {
        let cols = w.div_ceil(cell);
        let labels = (0..w * h)
            .map(|p| {
                let (u, v) = (p % w, p / w);
                ((v / cell) * cols + u / cell) as u32
            })
            .collect();
        SuperpixelGraph::from_labels(w, h, labels).unwrap()
    }

    #[test]
    fn thin_plate_operator_is_symmetric_with_affine_null_space() {
        let (w, h) = (9, 7);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let x: Vec<f64> = (0..w * h).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..w * h).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (mut tmp, mut ax, mut ay) = (vec![0.0; w * h], vec![0.0; w * h], vec![0.0; w * h]);
        second_difference_normal(w, h, &x, &mut tmp, &mut ax);
        second_difference_normal(w, h, &y, &mut tmp, &mut ay);
        let xay: f64 = x.iter().zip(&ay).map(|(a, b)| a * b).sum();
        let yax: f64 = y.iter().zip(&ax).map(|(a, b)| a * b).sum();
        assert!((xay - yax).abs() < 1e-12);
        let affine: Vec<f64> = (0..w * h).map(|p| 0.3 * (p % w) as f64 - 1.7 * (p / w) as f64 + 4.0).collect();
        second_difference_normal(w, h, &affine, &mut tmp, &mut ax);
        assert!(ax.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn fully_observed_lambda_zero_is_identity() {
        let (w, h) = (7, 5);
        let samples = (0..w * h).map(|p| PixelDepth::new((p % w) as f64, (p / w) as f64, 1.0 + (p * p % 11) as f64));
        let sparse = SparseDepth::new(w, h, samples).unwrap();
        let out = pls_interpolate(&sparse, &PlsParams { lambda: 0.0, ..Default::default() }).unwrap();
        for s in sparse.samples() {
            assert_eq!(out.get(s.u as usize, s.v as usize), Some(s.depth));
        }
    }

    #[test]
    fn single_sample_gives_constant_map() {
        let sparse = SparseDepth::new(23, 17, [PixelDepth::<f64>::new(4.0, 9.0, 5.0)]).unwrap();
        let out = pls_interpolate(&sparse, &PlsParams::default()).unwrap();
        assert_eq!(out.valid_count(), 23 * 17);
        assert!(out.raw().iter().all(|&d| (d - 5.0).abs() < 1e-12));
    }

    #[test]
    fn no_samples_is_an_error() {
        let sparse = SparseDepth::<f64>::empty(4, 4);
        assert_eq!(pls_interpolate(&sparse, &PlsParams::default()), Err(InitError::NoData));
    }

    #[test]
    fn ramp_recovered_from_five_percent() {
        let (w, h) = (80, 60);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let samples: Vec<_> = (0..w * h)
            .filter(|_| rng.gen_bool(0.05))
            .map(|p| {
                let u = (p % w) as f64;
                PixelDepth::new(u, (p / w) as f64, 0.1 * u + 2.0)
            })
            .collect();
        let sparse = SparseDepth::new(w, h, samples).unwrap();
        let out = pls_interpolate(&sparse, &PlsParams { lambda: 1e-2, ..Default::default() }).unwrap();
        let mut worst: f64 = 0.0;
        for v in 0..h {
            for u in 0..w {
                let e = (out.get(u, v).unwrap() - (0.1 * u as f64 + 2.0)).abs();
                worst = worst.max(e);
            }
        }
        assert!(worst < 0.05, "max error {worst}");
    }

    #[test]
    fn output_is_sample_order_invariant() {
        let (w, h) = (20, 12);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let mut samples: Vec<_> = (0..40)
            .map(|_| PixelDepth::new(rng.gen_range(0..w) as f64, rng.gen_range(0..h) as f64, rng.gen_range(2.0..30.0)))
            .collect();
        let a = pls_interpolate(&SparseDepth::new(w, h, samples.clone()).unwrap(), &PlsParams::default()).unwrap();
        samples.reverse();
        let b = pls_interpolate(&SparseDepth::new(w, h, samples).unwrap(), &PlsParams::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.raw().iter().all(|&d| d > 0.0));
    }

    #[test]
    fn constant_dense_gives_front_parallel_planes() {
        let g = grid_graph(40, 30, 10);
        let dense = DenseDepth::filled(40, 30, 10.0);
        let planes = init_planes(&g, &dense, &k()).unwrap();
        for p in planes {
            assert!((p.normal()[2] - 1.0).abs() < 1e-9);
            assert!((p.offset() + 10.0).abs() < 1e-9);
        }
    }

    #[test]
    fn global_slanted_plane_is_recovered_everywhere() {
        let k = k();
        let truth = Plane::from_general(0.1, 0.9, 0.3, -2.5).unwrap();
        let g = grid_graph(64, 48, 16);
        let dense = DenseDepth::from_fn(64, 48, |u, v| plane_depth_at(&truth, u as f64, v as f64, &k).ok());
        assert_eq!(dense.valid_count(), 64 * 48);
        for p in init_planes(&g, &dense, &k).unwrap() {
            let dn: f64 = p.normal().iter().zip(truth.normal()).map(|(a, b)| a * b).sum();
            assert!(dn > 1.0 - 1e-9);
            assert!((p.offset() - truth.offset()).abs() < 1e-6);
        }
    }

    #[test]
    fn single_pixel_region_falls_back() {
        // 3x3 grid where the centre pixel is its own superpixel
        let labels = vec![0, 0, 0, 0, 1, 0, 0, 0, 0];
        let g = SuperpixelGraph::from_labels(3, 3, labels).unwrap();
        let mut dense = DenseDepth::filled(3, 3, 4.0);
        dense.set(1, 1, Some(7.5));
        let planes = init_planes(&g, &dense, &k()).unwrap();
        assert_eq!(planes[1], Plane::front_parallel(7.5));
    }

    #[test]
    fn editing_outside_a_region_leaves_its_plane() {
        let g = grid_graph(40, 30, 10);
        let dense = DenseDepth::from_fn(40, 30, |u, v| Some(5.0 + 0.01 * u as f64 + 0.02 * v as f64));
        let before = init_planes(&g, &dense, &k()).unwrap();
        let mut edited = dense.clone();
        for &p in g.region(3) {
            edited.set(p % 40, p / 40, Some(20.0));
        }
        let after = init_planes(&g, &edited, &k()).unwrap();
        for i in 0..g.len() {
            if i != 3 {
                assert_eq!(before[i], after[i]);
            }
        }
    }

    #[test]
    fn cardboard_labels_road_and_objects() {
        let k = k();
        let road = Plane::new([0.0, 1.0, 0.0], -1.5).unwrap();
        let g = grid_graph(64, 40, 8);
        // rows 0..8 hold an object at 15 m, everything else is road
        let dense = DenseDepth::from_fn(64, 40, |u, v| {
            if v < 8 {
                Some(15.0)
            } else {
                plane_depth_at(&road, u as f64, v as f64, &k).ok()
            }
        });
        let (planes, is_road) = init_cardboard(&g, &dense, &road, &k, 0.2).unwrap();
        for i in 0..g.len() {
            let (_, cv) = g.centroid(i);
            if cv < 8.0 {
                assert!(!is_road[i]);
                assert!((plane_depth_at(&planes[i], 10.0, 3.0, &k).unwrap() - 15.0).abs() < 1e-9);
                let n = planes[i].normal();
                let dn: f64 = n.iter().zip(road.normal()).map(|(a, b)| a * b).sum();
                assert!(dn.abs() < 1e-9);
            } else {
                assert!(is_road[i]);
                assert_eq!(planes[i], road);
            }
        }
    }
}
