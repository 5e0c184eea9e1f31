//! Pinhole camera, planes in Hessian normal form, and plane fitting.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::num::Real;

/// Minimum |n · K⁻¹x| before a plane/ray intersection is treated as degenerate.
pub const RAY_EPSILON: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("rank-deficient point set ({0} points)")]
    RankDeficient(usize),
    #[error("no consensus: best hypothesis has {0} inliers")]
    NoConsensus(usize),
    #[error("road plane has no vertical normal component; upright object normal is undefined")]
    InvalidRoadPlane,
}

/// Reasons a plane cannot produce a usable depth along a pixel ray.
#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum RayError {
    #[error("ray is (nearly) parallel to the plane")]
    Degenerate,
    #[error("plane intersects the ray behind the camera")]
    BehindCamera,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics<T> {
    pub f: T,
    pub c_x: T,
    pub c_y: T,
}

impl<T: Real> CameraIntrinsics<T> {
    pub fn new(f: T, c_x: T, c_y: T) -> Result<Self, GeometryError> {
        if !(f > T::zero()) || !f.is_finite() {
            return Err(GeometryError::InvalidInput("focal length must be positive"));
        }
        if !c_x.is_finite() || !c_y.is_finite() {
            return Err(GeometryError::InvalidInput("principal point must be finite"));
        }
        Ok(Self { f, c_x, c_y })
    }

    /// K⁻¹ (u, v, 1)ᵀ: the viewing ray through a pixel, scaled so that z = 1.
    #[inline]
    pub fn ray(&self, u: T, v: T) -> [T; 3] {
        [(u - self.c_x) / self.f, (v - self.c_y) / self.f, T::one()]
    }

    pub fn cast<U: Real>(&self) -> CameraIntrinsics<U> {
        CameraIntrinsics {
            f: U::lit(self.f.to_f64_lossy()),
            c_x: U::lit(self.c_x.to_f64_lossy()),
            c_y: U::lit(self.c_y.to_f64_lossy()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Point3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    fn as_array(&self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// A depth measurement at pixel `(u, v)` (column, row).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelDepth<T> {
    pub u: T,
    pub v: T,
    pub depth: T,
}

impl<T: Real> PixelDepth<T> {
    pub fn new(u: T, v: T, depth: T) -> Self {
        Self { u, v, depth }
    }
}

/// Plane `n · X + offset = 0` with unit normal `n`.
///
/// Normals are kept in a canonical orientation: `n_z >= 0`, with ties broken
/// by `n_y >= 0` and then `n_x >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane<T> {
    normal: [T; 3],
    offset: T,
}

impl<T: Real> Plane<T> {
    /// Builds a plane from general-form coefficients `aX + bY + cZ + d = 0`.
    pub fn from_general(a: T, b: T, c: T, d: T) -> Result<Self, GeometryError> {
        let norm = (a * a + b * b + c * c).sqrt();
        if !norm.is_finite() || !d.is_finite() || norm <= T::min_positive_value() {
            return Err(GeometryError::InvalidInput("plane normal must be finite and nonzero"));
        }
        let mut normal = [a / norm, b / norm, c / norm];
        let mut offset = d / norm;
        if needs_flip(&normal) {
            normal = [-normal[0], -normal[1], -normal[2]];
            offset = -offset;
        }
        Ok(Self { normal, offset })
    }

    pub fn new(normal: [T; 3], offset: T) -> Result<Self, GeometryError> {
        Self::from_general(normal[0], normal[1], normal[2], offset)
    }

    /// Plane `Z = depth`.
    pub fn front_parallel(depth: T) -> Self {
        Self {
            normal: [T::zero(), T::zero(), T::one()],
            offset: -depth,
        }
    }

    /// Plane with the given normal passing through `point`.
    pub fn through_point(normal: [T; 3], point: Point3<T>) -> Result<Self, GeometryError> {
        let d = -(normal[0] * point.x + normal[1] * point.y + normal[2] * point.z);
        Self::from_general(normal[0], normal[1], normal[2], d)
    }

    pub fn normal(&self) -> [T; 3] {
        self.normal
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    /// General-form coefficients `(a, b, c, d)`; here `(n, offset)`.
    pub fn coefficients(&self) -> [T; 4] {
        [self.normal[0], self.normal[1], self.normal[2], self.offset]
    }

    /// Signed distance `n · p + offset`.
    #[inline]
    pub fn signed_distance(&self, p: &Point3<T>) -> T {
        dot(&self.normal, &p.as_array()) + self.offset
    }

    /// Depth where the plane crosses a ray from [`CameraIntrinsics::ray`].
    #[inline]
    pub fn depth_along(&self, ray: &[T; 3]) -> Result<T, RayError> {
        let denom = dot(&self.normal, ray);
        if !(denom.abs() > T::lit(RAY_EPSILON)) {
            return Err(RayError::Degenerate);
        }
        let depth = -self.offset / denom;
        if depth > T::zero() && depth.is_finite() {
            Ok(depth)
        } else {
            Err(RayError::BehindCamera)
        }
    }

    pub fn cast<U: Real>(&self) -> Plane<U> {
        Plane {
            normal: self.normal.map(|c| U::lit(c.to_f64_lossy())),
            offset: U::lit(self.offset.to_f64_lossy()),
        }
    }
}

fn needs_flip<T: Real>(n: &[T; 3]) -> bool {
    if n[2] != T::zero() {
        n[2] < T::zero()
    } else if n[1] != T::zero() {
        n[1] < T::zero()
    } else {
        n[0] < T::zero()
    }
}

#[inline]
pub(crate) fn dot<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross<T: Real>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Lifts a pixel with known depth to camera coordinates.
pub fn backproject<T: Real>(p: &PixelDepth<T>, k: &CameraIntrinsics<T>) -> Result<Point3<T>, GeometryError> {
    if !p.u.is_finite() || !p.v.is_finite() || !p.depth.is_finite() {
        return Err(GeometryError::InvalidInput("non-finite pixel or depth"));
    }
    let z = p.depth;
    Ok(Point3 {
        x: (p.u - k.c_x) * z / k.f,
        y: (p.v - k.c_y) * z / k.f,
        z,
    })
}

/// Depth predicted by `plane` at pixel `(u, v)`: `-offset / (n · K⁻¹x)`.
#[inline]
pub fn plane_depth_at<T: Real>(plane: &Plane<T>, u: T, v: T, k: &CameraIntrinsics<T>) -> Result<T, RayError> {
    plane.depth_along(&k.ray(u, v))
}

pub fn point_plane_distance<T: Real>(p: &Point3<T>, plane: &Plane<T>) -> T {
    plane.signed_distance(p).abs()
}

/// Normal of the upright object planes paired with a road plane
/// `(a_r, b_r, c_r, d_r)`: `(0, -c_r / b_r, 1)` normalised, which is
/// orthogonal to the road normal by construction.
pub fn object_normal<T: Real>(road: &Plane<T>) -> Result<[T; 3], GeometryError> {
    let [_, b, c] = road.normal();
    if !(b.abs() > T::lit(1e-12)) {
        return Err(GeometryError::InvalidRoadPlane);
    }
    let n = [T::zero(), -c / b, T::one()];
    let len = dot(&n, &n).sqrt();
    Ok(n.map(|x| x / len))
}

/// Total least squares plane fit: the normal is the direction of smallest
/// scatter about the centroid.
pub fn fit_plane_lsq<T: Real>(points: &[Point3<T>]) -> Result<Plane<T>, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::RankDeficient(points.len()));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::InvalidInput("non-finite point"));
    }
    let n = T::from_usize_lossy(points.len());
    let mut centroid = [T::zero(); 3];
    for p in points {
        centroid[0] = centroid[0] + p.x;
        centroid[1] = centroid[1] + p.y;
        centroid[2] = centroid[2] + p.z;
    }
    let centroid = centroid.map(|c| c / n);

    let mut scatter = [[T::zero(); 3]; 3];
    for p in points {
        let d = [p.x - centroid[0], p.y - centroid[1], p.z - centroid[2]];
        for r in 0..3 {
            for c in r..3 {
                scatter[r][c] = scatter[r][c] + d[r] * d[c];
            }
        }
    }
    for r in 0..3 {
        for c in 0..r {
            scatter[r][c] = scatter[c][r];
        }
    }

    let (values, vectors) = symmetric_eigen3(scatter);
    // values ascending; vectors[i] pairs with values[i]
    let largest = values[2];
    if !(largest > T::zero()) || values[1] <= largest * T::lit(1e-14) {
        return Err(GeometryError::RankDeficient(points.len()));
    }
    let normal = vectors[0];
    let offset = -dot(&normal, &centroid);
    Plane::from_general(normal[0], normal[1], normal[2], offset)
}

/// Plane through three points, or `None` when they are collinear.
fn plane_from_three<T: Real>(a: &Point3<T>, b: &Point3<T>, c: &Point3<T>) -> Option<Plane<T>> {
    let ab = [b.x - a.x, b.y - a.y, b.z - a.z];
    let ac = [c.x - a.x, c.y - a.y, c.z - a.z];
    let n = cross(&ab, &ac);
    let scale = (dot(&ab, &ab) * dot(&ac, &ac)).sqrt();
    let norm = dot(&n, &n).sqrt();
    if !(norm > scale * T::lit(1e-12)) {
        return None;
    }
    Plane::through_point(n, *a).ok()
}

/// RANSAC plane estimation followed by a least-squares refit on the inliers.
///
/// Deterministic for a given `seed`.
pub fn ransac_plane<T: Real>(
    points: &[Point3<T>],
    inlier_tol: T,
    iters: usize,
    seed: u64,
) -> Result<(Plane<T>, Vec<bool>), GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::NoConsensus(points.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, Plane<T>)> = None;
    for _ in 0..iters.max(1) {
        let idx = index::sample(&mut rng, points.len(), 3);
        let Some(plane) = plane_from_three(&points[idx.index(0)], &points[idx.index(1)], &points[idx.index(2)])
        else {
            continue;
        };
        let count = points
            .iter()
            .filter(|p| point_plane_distance(p, &plane) <= inlier_tol)
            .count();
        if best.as_ref().map_or(true, |(c, _)| count > *c) {
            best = Some((count, plane));
        }
    }
    let (count, hypothesis) = best.ok_or(GeometryError::NoConsensus(0))?;
    if count < 3 {
        return Err(GeometryError::NoConsensus(count));
    }

    let inliers: Vec<Point3<T>> = points
        .iter()
        .copied()
        .filter(|p| point_plane_distance(p, &hypothesis) <= inlier_tol)
        .collect();
    let refit = fit_plane_lsq(&inliers).unwrap_or(hypothesis);
    let mut mask: Vec<bool> = points
        .iter()
        .map(|p| point_plane_distance(p, &refit) <= inlier_tol)
        .collect();
    let mut plane = refit;
    if mask.iter().filter(|&&m| m).count() < count {
        // the refit drifted and lost support; keep the hypothesis
        plane = hypothesis;
        mask = points
            .iter()
            .map(|p| point_plane_distance(p, &hypothesis) <= inlier_tol)
            .collect();
    }
    Ok((plane, mask))
}

/// Cyclic Jacobi eigen-decomposition of a symmetric 3×3 matrix.
/// Returns eigenvalues in ascending order with matching unit eigenvectors.
pub(crate) fn symmetric_eigen3<T: Real>(m: [[T; 3]; 3]) -> ([T; 3], [[T; 3]; 3]) {
    let mut a = m;
    let mut v = [[T::zero(); 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    for _sweep in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        let diag = a[0][0].abs() + a[1][1].abs() + a[2][2].abs();
        if off <= diag * T::epsilon() * T::lit(0.5) || off == T::zero() {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q] == T::zero() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
            let c = T::one() / (t * t + T::one()).sqrt();
            let s = t * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let vkp = row[p];
                let vkq = row[q];
                row[p] = c * vkp - s * vkq;
                row[q] = s * vkp + c * vkq;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.map(|i| a[i][i]);
    let vectors = order.map(|i| {
        let col = [v[0][i], v[1][i], v[2][i]];
        let n = dot(&col, &col).sqrt();
        col.map(|c| c / n)
    });
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k500() -> CameraIntrinsics<f64> {
        CameraIntrinsics::new(500.0, 320.0, 120.0).unwrap()
    }

    #[test]
    fn backproject_examples() {
        let k = k500();
        let p = backproject(&PixelDepth::new(320.0, 120.0, 5.0), &k).unwrap();
        assert_eq!(p, Point3::new(0.0, 0.0, 5.0));
        let p = backproject(&PixelDepth::new(320.0 + 500.0, 120.0, 2.0), &k).unwrap();
        assert_eq!(p, Point3::new(2.0, 0.0, 2.0));
        let p = backproject(&PixelDepth::new(420.0, 70.0, 10.0), &k).unwrap();
        assert!((p.x - 2.0).abs() < 1e-12 && (p.y + 1.0).abs() < 1e-12 && p.z == 10.0);
        assert!(backproject(&PixelDepth::new(f64::NAN, 0.0, 1.0), &k).is_err());
    }

    #[test]
    fn intrinsics_reject_bad_focal() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 1.0).is_err());
        assert!(CameraIntrinsics::new(-3.0f32, 1.0, 1.0).is_err());
    }

    #[test]
    fn front_parallel_depth_is_constant() {
        let k = k500();
        let plane = Plane::new([0.0, 0.0, 1.0], -10.0).unwrap();
        for (u, v) in [(0.0, 0.0), (320.0, 120.0), (639.0, 239.0)] {
            assert!((plane_depth_at(&plane, u, v, &k).unwrap() - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_and_behind_rays() {
        let k = k500();
        // plane X = 1 viewed along the optical axis
        let wall = Plane::new([1.0, 0.0, 0.0], -1.0).unwrap();
        assert_eq!(plane_depth_at(&wall, 320.0, 120.0, &k), Err(RayError::Degenerate));
        let behind = Plane::front_parallel(-4.0);
        assert_eq!(plane_depth_at(&behind, 320.0, 120.0, &k), Err(RayError::BehindCamera));
    }

    #[test]
    fn slanted_plane_through_three_points() {
        let k = k500();
        let pix = [(100.0, 50.0, 8.0), (500.0, 60.0, 9.5), (300.0, 200.0, 6.0)];
        let pts: Vec<_> = pix
            .iter()
            .map(|&(u, v, d)| backproject(&PixelDepth::new(u, v, d), &k).unwrap())
            .collect();
        let plane = plane_from_three(&pts[0], &pts[1], &pts[2]).unwrap();
        // a fourth point on the same plane: a convex combination of the three
        let q = Point3::new(
            0.2 * pts[0].x + 0.3 * pts[1].x + 0.5 * pts[2].x,
            0.2 * pts[0].y + 0.3 * pts[1].y + 0.5 * pts[2].y,
            0.2 * pts[0].z + 0.3 * pts[1].z + 0.5 * pts[2].z,
        );
        let u = q.x / q.z * k.f + k.c_x;
        let v = q.y / q.z * k.f + k.c_y;
        let d = plane_depth_at(&plane, u, v, &k).unwrap();
        assert!((d - q.z).abs() < 1e-9);
        let fitted = fit_plane_lsq(&pts).unwrap();
        assert!(dot(&fitted.normal(), &plane.normal()) > 1.0 - 1e-12);
    }

    #[test]
    fn lsq_front_parallel_and_refit_roundtrip() {
        let pts: Vec<_> = [(0.0, 0.0), (1.0, 0.0), (0.0, 2.0), (3.0, 3.0)]
            .iter()
            .map(|&(x, y)| Point3::<f64>::new(x, y, 7.0))
            .collect();
        let plane = fit_plane_lsq(&pts).unwrap();
        assert!((plane.normal()[2] - 1.0).abs() < 1e-12);
        assert!((plane.offset() + 7.0).abs() < 1e-12);

        let k = k500();
        let truth = Plane::new([0.0, 0.0, 1.0], -10.0).unwrap();
        let pts: Vec<_> = [(10.0, 10.0), (600.0, 30.0), (200.0, 230.0)]
            .iter()
            .map(|&(u, v)| {
                let d = plane_depth_at(&truth, u, v, &k).unwrap();
                backproject(&PixelDepth::new(u, v, d), &k).unwrap()
            })
            .collect();
        let refit = fit_plane_lsq(&pts).unwrap();
        assert!(dot(&refit.normal(), &truth.normal()) > 1.0 - 1e-12);
        assert!((refit.offset() - truth.offset()).abs() < 1e-9);
    }

    #[test]
    fn lsq_noisy_slanted_plane() {
        use rand_distr::{Distribution, Normal};
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 1e-3).unwrap();
        let mut pts = Vec::new();
        for i in 0..50 {
            let x = (i % 10) as f64 * 0.7 - 3.0;
            let y = (i / 10) as f64 * 0.9 - 2.0;
            let z = (4.0 - x - 2.0 * y) / 3.0;
            pts.push(Point3::new(
                x + noise.sample(&mut rng),
                y + noise.sample(&mut rng),
                z + noise.sample(&mut rng),
            ));
        }
        let fitted = fit_plane_lsq(&pts).unwrap();
        let truth = Plane::from_general(1.0, 2.0, 3.0, -4.0).unwrap();
        for (a, b) in fitted.coefficients().iter().zip(truth.coefficients()) {
            assert!((a - b).abs() < 1e-2, "{:?} vs {:?}", fitted, truth);
        }
    }

    #[test]
    fn lsq_rejects_degenerate_sets() {
        let two = [Point3::new(0.0, 0.0, 1.0), Point3::new(1.0, 0.0, 1.0)];
        assert_eq!(fit_plane_lsq(&two), Err(GeometryError::RankDeficient(2)));
        let line: Vec<_> = (0..5).map(|i| Point3::new(i as f64, 2.0 * i as f64, 1.0)).collect();
        assert_eq!(fit_plane_lsq(&line), Err(GeometryError::RankDeficient(5)));
    }

    #[test]
    fn ransac_examples() {
        // ground plane Y = 1.5 with outliers
        let mut pts = Vec::new();
        for i in 0..100 {
            let x = (i % 10) as f64 - 5.0;
            let z = 5.0 + (i / 10) as f64 * 2.0;
            pts.push(Point3::new(x, 1.5, z));
        }
        for i in 0..10 {
            pts.push(Point3::new(i as f64 - 5.0, -1.0 - i as f64 * 0.3, 10.0 + i as f64));
        }
        let (plane, mask) = ransac_plane(&pts, 0.05, 200, 3).unwrap();
        assert!(mask.iter().filter(|&&m| m).count() >= 100);
        assert!((plane.normal()[1].abs() - 1.0).abs() < 1e-9);
        assert!((plane.offset() + 1.5).abs() < 1e-9);

        let coplanar: Vec<_> = (0..20)
            .map(|i| Point3::new(i as f64, (i * i % 7) as f64, 3.0))
            .collect();
        let (_, mask) = ransac_plane(&coplanar, 1e-6, 50, 1).unwrap();
        assert!(mask.iter().all(|&m| m));

        let three = [Point3::new(0.0, 0.0, 1.0), Point3::new(1.0, 0.0, 2.0), Point3::new(0.0, 1.0, 3.0)];
        let (plane, mask) = ransac_plane(&three, 1e-9, 10, 0).unwrap();
        assert_eq!(mask, vec![true; 3]);
        for p in &three {
            assert!(point_plane_distance(p, &plane) < 1e-12);
        }
    }

    #[test]
    fn ransac_no_consensus() {
        let line: Vec<_> = (0..6).map(|i| Point3::new(i as f64, 0.0, 1.0)).collect();
        assert!(matches!(ransac_plane(&line, 0.1, 20, 0), Err(GeometryError::NoConsensus(_))));
    }

    #[test]
    fn distance_examples() {
        let plane = Plane::new([0.0, 1.0, 0.0], -1.5).unwrap();
        assert_eq!(point_plane_distance(&Point3::new(0.0, 3.0, 0.0), &plane), 1.5);
        assert_eq!(point_plane_distance(&Point3::new(4.0, 1.5, -2.0), &plane), 0.0);
    }

    #[test]
    fn distance_matches_brute_force_minimum() {
        // zooming grid search over points of the plane, parametrised from an
        // arbitrary on-plane origin
        let plane = Plane::from_general(0.3, -0.8, 0.5, 2.0).unwrap();
        let p = Point3::new(1.2, -0.4, 3.3);
        let n = plane.normal();
        let origin = n.map(|c| -plane.offset() * c);
        let e1 = {
            let t: [f64; 3] = cross(&n, &[1.0, 0.0, 0.0]);
            let l = dot(&t, &t).sqrt();
            t.map(|c| c / l)
        };
        let e2 = cross(&n, &e1);
        let dist = |a: f64, b: f64| {
            let q = [0, 1, 2].map(|i| origin[i] + a * e1[i] + b * e2[i]);
            ((q[0] - p.x).powi(2) + (q[1] - p.y).powi(2) + (q[2] - p.z).powi(2)).sqrt()
        };
        let (mut ca, mut cb, mut h) = (0.0, 0.0, 1.0);
        let mut best = dist(ca, cb);
        for _ in 0..40 {
            let (mut ba, mut bb) = (ca, cb);
            for i in -10..=10 {
                for j in -10..=10 {
                    let (a, b) = (ca + i as f64 * h, cb + j as f64 * h);
                    let d = dist(a, b);
                    if d < best {
                        best = d;
                        ba = a;
                        bb = b;
                    }
                }
            }
            ca = ba;
            cb = bb;
            h *= 0.25;
        }
        assert!((best - point_plane_distance(&p, &plane)).abs() < 1e-9);
    }

    #[test]
    fn canonical_sign() {
        let p = Plane::from_general(0.0, 0.0, -2.0, 4.0).unwrap();
        assert_eq!(p.normal(), [0.0, 0.0, 1.0]);
        assert_eq!(p.offset(), -2.0);
        let p = Plane::from_general(0.0, -1.0, 0.0, 1.5).unwrap();
        assert_eq!(p.normal(), [0.0, 1.0, 0.0]);
        assert_eq!(p.offset(), -1.5);
    }

    #[test]
    fn object_normal_is_orthogonal_to_road() {
        let flat = Plane::<f64>::new([0.0, 1.0, 0.0], -1.65).unwrap();
        assert_eq!(object_normal(&flat).unwrap(), [0.0, 0.0, 1.0]);
        let pitched = Plane::<f64>::from_general(0.02, 0.97, 0.12, -1.5).unwrap();
        let n = object_normal(&pitched).unwrap();
        assert!(dot(&n, &pitched.normal()).abs() < 1e-12);
        assert!((dot(&n, &n) - 1.0).abs() < 1e-12);
        let wall = Plane::new([1.0, 0.0, 0.0], -2.0).unwrap();
        assert_eq!(object_normal(&wall), Err(GeometryError::InvalidRoadPlane));
    }

    #[test]
    fn eigen_diagonal() {
        let (vals, vecs) = symmetric_eigen3([[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]);
        assert_eq!(vals, [1.0, 2.0, 3.0]);
        assert_eq!(vecs[0], [0.0, 1.0, 0.0]);
    }
}
