//! CRF energy: squared data term plus truncated-ℓ1 depth and orientation
//! smoothness between adjacent superpixels.

use thiserror::Error;

use crate::depth::SparseDepth;
use crate::geometry::{CameraIntrinsics, PixelDepth, Plane};
use crate::num::Real;
use crate::segmentation::SuperpixelGraph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("invalid energy parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("state has {got} planes for {expected} superpixels")]
    StateLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams<T> {
    /// Data weight.
    pub theta1: T,
    /// Depth-coherence weight.
    pub theta2: T,
    /// Orientation-coherence weight.
    pub theta3: T,
    /// Depth truncation, meters.
    pub tau1: T,
    /// Orientation truncation.
    pub tau2: T,
}

impl<T: Real> Default for EnergyParams<T> {
    fn default() -> Self {
        Self {
            theta1: T::one(),
            theta2: T::lit(0.2),
            theta3: T::lit(20.0),
            tau1: T::lit(3.0),
            tau2: T::lit(0.3),
        }
    }
}

impl<T: Real> EnergyParams<T> {
    pub fn validate(&self) -> Result<(), EnergyError> {
        let non_negative = |x: T| x >= T::zero() && x.is_finite();
        if !non_negative(self.theta1) || !non_negative(self.theta2) || !non_negative(self.theta3) {
            return Err(EnergyError::InvalidParameter("weights must be finite and non-negative"));
        }
        if !(self.tau1 > T::zero()) || !(self.tau2 > T::zero()) {
            return Err(EnergyError::InvalidParameter("truncation thresholds must be positive"));
        }
        Ok(())
    }
}

/// Robust penalty `min(|x|, τ)`.
#[inline]
pub fn truncated_l1<T: Real>(x: T, tau: T) -> T {
    x.abs().min(tau)
}

/// Squared depth discrepancy of `plane` over rays with measured depths.
/// Infeasible predictions make the whole term infinite.
#[inline]
fn data_sum<T: Real>(plane: &Plane<T>, rays: &[([T; 3], T)]) -> T {
    let mut acc = T::zero();
    for (ray, measured) in rays {
        match plane.depth_along(ray) {
            Ok(d) => {
                let e = d - *measured;
                acc = acc + e * e;
            }
            Err(_) => return T::infinity(),
        }
    }
    acc
}

#[inline]
fn depth_gap<T: Real>(a: Option<T>, b: Option<T>, tau1: T) -> T {
    match (a, b) {
        (Some(a), Some(b)) => truncated_l1(a - b, tau1),
        _ => tau1,
    }
}

#[inline]
fn depth_coherence<T: Real>(si: &Plane<T>, sj: &Plane<T>, rays: &[[T; 3]], tau1: T) -> T {
    let mut acc = T::zero();
    for ray in rays {
        acc = acc + depth_gap(si.depth_along(ray).ok(), sj.depth_along(ray).ok(), tau1);
    }
    acc
}

/// `θ1 Σ (d̂(s, x) − d(x))²` over the measured pixels of one superpixel.
pub fn data_term<T: Real>(plane: &Plane<T>, samples: &[PixelDepth<T>], k: &CameraIntrinsics<T>, theta1: T) -> T {
    let rays: Vec<_> = samples.iter().map(|s| (k.ray(s.u, s.v), s.depth)).collect();
    theta1 * data_sum(plane, &rays)
}

/// Truncated depth disagreement of two planes along shared boundary pixels
/// `(u, v)`. Pixels where either plane is infeasible cost `τ1`.
pub fn smoothness_depth<T: Real>(
    si: &Plane<T>,
    sj: &Plane<T>,
    boundary: &[(usize, usize)],
    k: &CameraIntrinsics<T>,
    tau1: T,
) -> T {
    let rays: Vec<_> = boundary
        .iter()
        .map(|&(u, v)| k.ray(T::from_usize_lossy(u), T::from_usize_lossy(v)))
        .collect();
    depth_coherence(si, sj, &rays, tau1)
}

/// `ρ_τ2(1 − |n_iᵀ n_j| / (|n_i||n_j|))`.
pub fn smoothness_orient<T: Real>(si: &Plane<T>, sj: &Plane<T>, tau2: T) -> T {
    let (a, b) = (si.normal(), sj.normal());
    if a == b || a == b.map(|c| -c) {
        return T::zero();
    }
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    truncated_l1(T::one() - dot.abs() / (na * nb), tau2)
}

/// Energy split into its unary and pairwise parts. Pairwise parts are
/// already weighted by `θ2` / `θ3`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown<T> {
    pub unary: T,
    pub pairwise_depth: T,
    pub pairwise_orient: T,
    pub pairwise: T,
    pub total: T,
}

/// Samples grouped by the superpixel containing them.
pub fn group_samples<T: Real>(graph: &SuperpixelGraph, sparse: &SparseDepth<T>) -> Vec<Vec<PixelDepth<T>>> {
    let mut groups = vec![Vec::new(); graph.len()];
    for s in sparse.samples() {
        let label = graph.labels()[sparse.index_of(s)] as usize;
        groups[label].push(*s);
    }
    groups
}

/// Precomputed rays for every data and boundary pixel of a segmentation,
/// so that unary and pairwise costs can be evaluated repeatedly.
#[derive(Debug, Clone)]
pub struct EnergyModel<T> {
    params: EnergyParams<T>,
    node_rays: Vec<Vec<([T; 3], T)>>,
    edges: Vec<(usize, usize)>,
    edge_rays: Vec<Vec<[T; 3]>>,
}

impl<T: Real> EnergyModel<T> {
    pub fn new(
        graph: &SuperpixelGraph,
        samples_by_region: &[Vec<PixelDepth<T>>],
        k: &CameraIntrinsics<T>,
        params: EnergyParams<T>,
    ) -> Result<Self, EnergyError> {
        params.validate()?;
        if samples_by_region.len() != graph.len() {
            return Err(EnergyError::StateLength {
                expected: graph.len(),
                got: samples_by_region.len(),
            });
        }
        let node_rays = samples_by_region
            .iter()
            .map(|r| r.iter().map(|s| (k.ray(s.u, s.v), s.depth)).collect())
            .collect();
        let edges = graph.adjacency().to_vec();
        let edge_rays = (0..edges.len())
            .map(|e| {
                graph
                    .edge_boundary(e)
                    .iter()
                    .map(|&p| {
                        let (u, v) = graph.coords(p);
                        k.ray(T::from_usize_lossy(u), T::from_usize_lossy(v))
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            params,
            node_rays,
            edges,
            edge_rays,
        })
    }

    pub fn params(&self) -> &EnergyParams<T> {
        &self.params
    }

    pub fn node_count(&self) -> usize {
        self.node_rays.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn sample_count(&self, i: usize) -> usize {
        self.node_rays[i].len()
    }

    /// Data term of superpixel `i` under `plane`.
    #[inline]
    pub fn unary(&self, i: usize, plane: &Plane<T>) -> T {
        self.params.theta1 * data_sum(plane, &self.node_rays[i])
    }

    /// Predicted depths of `plane` at the boundary pixels of edge `e`.
    pub fn boundary_depths(&self, e: usize, plane: &Plane<T>) -> Vec<Option<T>> {
        self.edge_rays[e].iter().map(|r| plane.depth_along(r).ok()).collect()
    }

    /// Pairwise cost from precomputed boundary depths and normals; equal to
    /// [`EnergyModel::pairwise`] bit for bit.
    #[inline]
    pub fn pairwise_from_depths(&self, di: &[Option<T>], dj: &[Option<T>], si: &Plane<T>, sj: &Plane<T>) -> T {
        let mut acc = T::zero();
        for (a, b) in di.iter().zip(dj) {
            acc = acc + depth_gap(*a, *b, self.params.tau1);
        }
        self.params.theta2 * acc + self.params.theta3 * smoothness_orient(si, sj, self.params.tau2)
    }

    /// `θ2 ψ_depth + θ3 ψ_orient` for edge `e`.
    pub fn pairwise(&self, e: usize, si: &Plane<T>, sj: &Plane<T>) -> T {
        let depth = depth_coherence(si, sj, &self.edge_rays[e], self.params.tau1);
        self.params.theta2 * depth + self.params.theta3 * smoothness_orient(si, sj, self.params.tau2)
    }

    pub fn evaluate(&self, state: &[Plane<T>]) -> Result<EnergyBreakdown<T>, EnergyError> {
        if state.len() != self.node_rays.len() {
            return Err(EnergyError::StateLength {
                expected: self.node_rays.len(),
                got: state.len(),
            });
        }
        let mut out = EnergyBreakdown::default();
        for (i, plane) in state.iter().enumerate() {
            out.unary = out.unary + self.unary(i, plane);
        }
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            let depth = self.params.theta2 * depth_coherence(&state[i], &state[j], &self.edge_rays[e], self.params.tau1);
            let orient = self.params.theta3 * smoothness_orient(&state[i], &state[j], self.params.tau2);
            out.pairwise_depth = out.pairwise_depth + depth;
            out.pairwise_orient = out.pairwise_orient + orient;
            out.pairwise = out.pairwise + (depth + orient);
        }
        out.total = out.unary + out.pairwise;
        Ok(out)
    }
}

/// Full energy `Σ φ_i(s_i) + Σ_{i∼j} ψ_ij(s_i, s_j)` of a plane assignment.
pub fn total_energy<T: Real>(
    state: &[Plane<T>],
    graph: &SuperpixelGraph,
    samples_by_region: &[Vec<PixelDepth<T>>],
    k: &CameraIntrinsics<T>,
    params: &EnergyParams<T>,
) -> Result<EnergyBreakdown<T>, EnergyError> {
    EnergyModel::new(graph, samples_by_region, k, *params)?.evaluate(state)
}
