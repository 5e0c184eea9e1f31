//! Particle-based optimisation of the plane CRF.
//!
//! Each outer iteration draws a small set of candidate planes per superpixel,
//! fills unary and pairwise cost tables, and lets TRW-S pick one candidate
//! per superpixel. The candidate state replaces the incumbent only when it
//! does not increase the total energy.

pub mod trws;

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::depth::DenseDepth;
use crate::energy::{EnergyError, EnergyModel};
use crate::geometry::{dot, object_normal, CameraIntrinsics, GeometryError, Plane};
use crate::init::object_plane_at;
use crate::num::{median_in_place, Real};
use crate::segmentation::SuperpixelGraph;

pub use trws::{trws_solve, PairwiseMrf, TrwsError, TrwsOptions, TrwsSolution};

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("initial state has {got} planes for {expected} superpixels")]
    StateLength { expected: usize, got: usize },
    #[error("free-space mask requires a cardboard-mode labeling")]
    ModeMismatch,
    #[error(transparent)]
    Trws(#[from] TrwsError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Planar,
    Cardboard,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Planar => "planar",
            Mode::Cardboard => "cardboard",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "planar" => Ok(Mode::Planar),
            "cardboard" => Ok(Mode::Cardboard),
            other => Err(format!("unknown mode '{other}' (expected planar or cardboard)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    pub n_particles: usize,
    pub n_iters: usize,
    /// Proposal std of the (a, b, c, d) plane coefficients (planar mode).
    pub sigma_plane: [T; 4],
    /// Proposal std of object-plane depth in metres (cardboard mode).
    pub sigma_depth: T,
    /// Per-iteration multiplicative decay of the proposal std.
    pub decay: T,
    pub trws_sweeps: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Road distance threshold in metres (cardboard initialisation).
    pub epsilon: T,
}

impl<T: Real> SolverConfig<T> {
    pub fn planar() -> Self {
        Self {
            n_particles: 10,
            n_iters: 40,
            sigma_plane: [T::lit(0.02), T::lit(0.02), T::lit(0.02), T::lit(0.2)],
            sigma_depth: T::lit(0.5),
            decay: T::lit(0.9),
            trws_sweeps: 30,
            seed: 0,
            mode: Mode::Planar,
            epsilon: T::lit(0.2),
        }
    }

    pub fn cardboard() -> Self {
        Self {
            n_iters: 20,
            mode: Mode::Cardboard,
            ..Self::planar()
        }
    }

    pub fn validate(&self) -> Result<(), InferenceError> {
        let min_particles = match self.mode {
            Mode::Planar => 2,
            Mode::Cardboard => 3,
        };
        if self.n_particles < min_particles {
            return Err(InferenceError::Config(format!(
                "{} mode needs at least {min_particles} particles, got {}",
                self.mode, self.n_particles
            )));
        }
        if self.sigma_plane.iter().any(|s| !(*s > T::zero()) || !s.is_finite()) {
            return Err(InferenceError::Config("plane proposal std must be positive".into()));
        }
        if !(self.sigma_depth > T::zero()) || !self.sigma_depth.is_finite() {
            return Err(InferenceError::Config("depth proposal std must be positive".into()));
        }
        if !(self.decay > T::zero() && self.decay <= T::one()) {
            return Err(InferenceError::Config(format!("decay must lie in (0, 1], got {}", self.decay)));
        }
        if self.trws_sweeps == 0 {
            return Err(InferenceError::Config("trws_sweeps must be at least 1".into()));
        }
        if !(self.epsilon > T::zero()) {
            return Err(InferenceError::Config("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Candidate planes per superpixel. Slot 0 is the incumbent.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet<T> {
    pub planes: Vec<Vec<Plane<T>>>,
    /// Whether each particle is the road plane (cardboard mode; all false otherwise).
    pub is_road: Vec<Vec<bool>>,
}

impl<T> ParticleSet<T> {
    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    /// Particle slot chosen for each superpixel in the last accepted step
    /// (0 when the incumbent was kept).
    pub indices: Vec<usize>,
    /// Road flags, present only in cardboard mode.
    pub is_road: Option<Vec<bool>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow<T> {
    pub iteration: usize,
    pub unary: T,
    pub total: T,
}

#[derive(Debug, Clone)]
pub struct PcbpOutput<T> {
    pub planes: Vec<Plane<T>>,
    pub labeling: Labeling,
    pub trace: Vec<TraceRow<T>>,
    pub initial_unary: T,
    pub initial_total: T,
}

/// Starting state of the optimiser.
#[derive(Debug, Clone)]
pub enum InitState<T> {
    Planar(Vec<Plane<T>>),
    Cardboard {
        planes: Vec<Plane<T>>,
        is_road: Vec<bool>,
        road: Plane<T>,
    },
}

fn iteration_seed(seed: u64, iteration: usize) -> u64 {
    seed ^ (iteration as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn normal_sample<T: Real>(rng: &mut ChaCha8Rng, std: T) -> T {
    let z: f64 = StandardNormal.sample(rng);
    T::lit(z) * std
}

fn neighbor_fill<T: Real>(
    graph: &SuperpixelGraph,
    i: usize,
    incumbents: &[Plane<T>],
    flags: Option<&[bool]>,
    slots: usize,
    planes: &mut Vec<Plane<T>>,
    road: &mut Vec<bool>,
) {
    let nbrs = graph.neighbors(i);
    for s in 0..slots {
        let j = if nbrs.is_empty() { i } else { nbrs[s % nbrs.len()] };
        planes.push(incumbents[j]);
        road.push(flags.is_some_and(|f| f[j]));
    }
}

/// Planar proposals: incumbent, `⌊n_p/2⌋` Gaussian perturbations of its
/// coefficients, then neighbour incumbents in id order (cycled).
pub fn sample_particles_planar<T: Real>(
    incumbents: &[Plane<T>],
    graph: &SuperpixelGraph,
    sigma: [T; 4],
    seed: u64,
    n_p: usize,
) -> ParticleSet<T> {
    assert!(n_p >= 2, "planar sampling needs n_p >= 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_mcmc = n_p / 2;
    let mut set = ParticleSet {
        planes: Vec::with_capacity(incumbents.len()),
        is_road: Vec::with_capacity(incumbents.len()),
    };
    for (i, inc) in incumbents.iter().enumerate() {
        let mut planes = Vec::with_capacity(n_p);
        let mut road = Vec::with_capacity(n_p);
        planes.push(*inc);
        road.push(false);
        let coeffs = inc.coefficients();
        for _ in 0..n_mcmc {
            let noise: [T; 4] = std::array::from_fn(|c| normal_sample(&mut rng, sigma[c]));
            let p = if noise.iter().all(|x| x.is_zero()) {
                *inc
            } else {
                Plane::from_general(
                    coeffs[0] + noise[0],
                    coeffs[1] + noise[1],
                    coeffs[2] + noise[2],
                    coeffs[3] + noise[3],
                )
                .unwrap_or(*inc)
            };
            planes.push(p);
            road.push(false);
        }
        neighbor_fill(graph, i, incumbents, None, n_p - 1 - n_mcmc, &mut planes, &mut road);
        set.planes.push(planes);
        set.is_road.push(road);
    }
    set
}

/// Cardboard proposals: incumbent, the road plane, `⌈(n_p−2)/2⌉` upright
/// object planes at perturbed depths along the centroid ray, then neighbour
/// incumbents.
///
/// `anchor_depths[i]` is used as the proposal centre when the incumbent does
/// not intersect the centroid ray in front of the camera.
#[allow(clippy::too_many_arguments)]
pub fn sample_particles_cardboard<T: Real>(
    incumbents: &[Plane<T>],
    flags: &[bool],
    road: &Plane<T>,
    graph: &SuperpixelGraph,
    k: &CameraIntrinsics<T>,
    anchor_depths: &[T],
    sigma: T,
    seed: u64,
    n_p: usize,
) -> Result<ParticleSet<T>, InferenceError> {
    if n_p < 3 {
        return Err(InferenceError::Config(format!("cardboard sampling needs n_p >= 3, got {n_p}")));
    }
    let n_obj = object_normal(road)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_mcmc = (n_p - 2).div_ceil(2);
    let mut set = ParticleSet {
        planes: Vec::with_capacity(incumbents.len()),
        is_road: Vec::with_capacity(incumbents.len()),
    };
    for (i, inc) in incumbents.iter().enumerate() {
        let mut planes = Vec::with_capacity(n_p);
        let mut is_road = Vec::with_capacity(n_p);
        planes.push(*inc);
        is_road.push(flags[i]);
        planes.push(*road);
        is_road.push(true);

        let (cu, cv) = graph.centroid(i);
        let base = match inc.depth_along(&k.ray(T::lit(cu), T::lit(cv))) {
            Ok(d) => d,
            Err(_) => anchor_depths[i],
        };
        for _ in 0..n_mcmc {
            let noise = normal_sample(&mut rng, sigma);
            // reflect proposals that would cross the camera centre
            let z = (base + noise).abs().max(base * T::lit(1e-3));
            let p = if noise.is_zero() && !flags[i] {
                *inc
            } else {
                object_plane_at(graph, i, n_obj, z, k)?
            };
            planes.push(p);
            is_road.push(false);
        }
        neighbor_fill(graph, i, incumbents, Some(flags), n_p - 2 - n_mcmc, &mut planes, &mut is_road);
        set.planes.push(planes);
        set.is_road.push(is_road);
    }
    Ok(set)
}

/// Distinct planes of one node, with the first slot holding each.
fn unique_slots<T: Real>(planes: &[Plane<T>]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(planes.len());
    for (s, p) in planes.iter().enumerate() {
        if !out.iter().any(|&o| planes[o] == *p) {
            out.push(s);
        }
    }
    out
}

/// One discrete step: cost tables over the particle set, solved with TRW-S.
/// Returns the chosen slot per node.
fn solve_step<T: Real>(model: &EnergyModel<T>, set: &ParticleSet<T>, sweeps: usize) -> Result<Vec<usize>, InferenceError> {
    let slots: Vec<Vec<usize>> = set.planes.iter().map(|p| unique_slots(p)).collect();
    let unary: Vec<Vec<T>> = slots
        .iter()
        .enumerate()
        .map(|(i, s)| s.iter().map(|&l| model.unary(i, &set.planes[i][l])).collect())
        .collect();
    let mut mrf = PairwiseMrf::new(unary);
    for (e, &(i, j)) in model.edges().iter().enumerate() {
        let di: Vec<Vec<Option<T>>> = slots[i]
            .iter()
            .map(|&l| model.boundary_depths(e, &set.planes[i][l]))
            .collect();
        let dj: Vec<Vec<Option<T>>> = slots[j]
            .iter()
            .map(|&l| model.boundary_depths(e, &set.planes[j][l]))
            .collect();
        let mut table = Vec::with_capacity(di.len() * dj.len());
        for (a, &la) in slots[i].iter().enumerate() {
            for (b, &lb) in slots[j].iter().enumerate() {
                table.push(model.pairwise_from_depths(&di[a], &dj[b], &set.planes[i][la], &set.planes[j][lb]));
            }
        }
        mrf.add_edge(i, j, table)?;
    }
    let sol = trws_solve(
        &mrf,
        &TrwsOptions {
            max_sweeps: sweeps,
            ..TrwsOptions::default()
        },
    )?;
    Ok(sol.labels.iter().enumerate().map(|(i, &l)| slots[i][l]).collect())
}

/// Runs the outer optimisation loop.
pub fn pcbp_run<T: Real>(
    graph: &SuperpixelGraph,
    model: &EnergyModel<T>,
    k: &CameraIntrinsics<T>,
    config: &SolverConfig<T>,
    init: InitState<T>,
) -> Result<PcbpOutput<T>, InferenceError> {
    config.validate()?;
    let n = graph.len();
    let (mut planes, mut flags, road) = match init {
        InitState::Planar(p) => {
            if config.mode != Mode::Planar {
                return Err(InferenceError::Config("planar initial state for cardboard mode".into()));
            }
            (p, None, None)
        }
        InitState::Cardboard { planes, is_road, road } => {
            if config.mode != Mode::Cardboard {
                return Err(InferenceError::Config("cardboard initial state for planar mode".into()));
            }
            if is_road.len() != planes.len() {
                return Err(InferenceError::StateLength {
                    expected: planes.len(),
                    got: is_road.len(),
                });
            }
            (planes, Some(is_road), Some(road))
        }
    };
    if planes.len() != n || model.node_count() != n {
        return Err(InferenceError::StateLength {
            expected: n,
            got: planes.len(),
        });
    }

    let mut current = model.evaluate(&planes)?;
    let initial_unary = current.unary;
    let initial_total = current.total;
    let mut indices = vec![0usize; n];
    let mut trace = Vec::with_capacity(config.n_iters);

    let mut anchors = match (&road, &flags) {
        (Some(_), Some(_)) => anchor_depths(graph, &planes, k),
        _ => Vec::new(),
    };
    if let Some(r) = &road {
        object_normal(r)?;
    }

    let mut sigma_plane = config.sigma_plane;
    let mut sigma_depth = config.sigma_depth;
    for it in 0..config.n_iters {
        let seed = iteration_seed(config.seed, it);
        let set = match (&road, &flags) {
            (Some(r), Some(f)) => sample_particles_cardboard(
                &planes,
                f,
                r,
                graph,
                k,
                &anchors,
                sigma_depth,
                seed,
                config.n_particles,
            )?,
            _ => sample_particles_planar(&planes, graph, sigma_plane, seed, config.n_particles),
        };
        let chosen = solve_step(model, &set, config.trws_sweeps)?;
        let candidate: Vec<Plane<T>> = chosen.iter().enumerate().map(|(i, &s)| set.planes[i][s]).collect();
        let cand_energy = model.evaluate(&candidate)?;
        if cand_energy.total <= current.total {
            planes = candidate;
            current = cand_energy;
            if let Some(f) = flags.as_mut() {
                for (i, &s) in chosen.iter().enumerate() {
                    f[i] = set.is_road[i][s];
                }
                let road = road.as_ref().expect("cardboard mode has a road plane");
                for (i, p) in planes.iter().enumerate() {
                    assert!(
                        if f[i] { p == road } else { dot(&p.normal(), &road.normal()).abs() < T::lit(1e-9) },
                        "cardboard invariant violated at superpixel {i}"
                    );
                }
                let fresh = anchor_depths(graph, &planes, k);
                for (a, d) in anchors.iter_mut().zip(fresh) {
                    if d.is_finite() {
                        *a = d;
                    }
                }
            }
            indices = chosen;
        } else {
            indices.iter_mut().for_each(|x| *x = 0);
        }
        trace.push(TraceRow {
            iteration: it + 1,
            unary: current.unary,
            total: current.total,
        });
        for s in sigma_plane.iter_mut() {
            *s = *s * config.decay;
        }
        sigma_depth = sigma_depth * config.decay;
    }

    Ok(PcbpOutput {
        planes,
        labeling: Labeling { indices, is_road: flags },
        trace,
        initial_unary,
        initial_total,
    })
}

/// Depth of each plane along its superpixel's centroid ray; infeasible
/// entries take the median of the feasible ones.
fn anchor_depths<T: Real>(graph: &SuperpixelGraph, planes: &[Plane<T>], k: &CameraIntrinsics<T>) -> Vec<T> {
    let mut d: Vec<T> = planes
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (cu, cv) = graph.centroid(i);
            p.depth_along(&k.ray(T::lit(cu), T::lit(cv))).unwrap_or(T::nan())
        })
        .collect();
    let mut ok: Vec<T> = d.iter().copied().filter(|x| x.is_finite()).collect();
    let fill = median_in_place(&mut ok).unwrap_or_else(|| T::lit(10.0));
    d.iter_mut().filter(|x| !x.is_finite()).for_each(|x| *x = fill);
    d
}

/// Per-pixel depth of the superpixel planes. Pixels where a plane is
/// infeasible take the median feasible depth of their superpixel, else the
/// fallback map (if given), else stay invalid.
pub fn render_depth<T: Real>(
    state: &[Plane<T>],
    graph: &SuperpixelGraph,
    k: &CameraIntrinsics<T>,
    fallback: Option<&DenseDepth<T>>,
) -> DenseDepth<T> {
    let (w, h) = (graph.width(), graph.height());
    let mut data = vec![T::nan(); w * h];
    for (i, region) in graph.regions().iter().enumerate() {
        let mut missing = Vec::new();
        let mut feasible = Vec::with_capacity(region.len());
        for &p in region {
            let (u, v) = graph.coords(p);
            match state[i].depth_along(&k.ray(T::from_usize_lossy(u), T::from_usize_lossy(v))) {
                Ok(d) => {
                    data[p] = d;
                    feasible.push(d);
                }
                Err(_) => missing.push(p),
            }
        }
        if missing.is_empty() {
            continue;
        }
        let med = median_in_place(&mut feasible);
        for p in missing {
            data[p] = match (med, fallback) {
                (Some(m), _) => m,
                (None, Some(f)) => f.get_index(p).unwrap_or(T::nan()),
                (None, None) => T::nan(),
            };
        }
    }
    DenseDepth::from_vec(w, h, data).expect("dimensions match the graph")
}

/// Row-major mask of road-labelled pixels.
pub fn free_space_mask(labeling: &Labeling, graph: &SuperpixelGraph) -> Result<Vec<bool>, InferenceError> {
    let flags = labeling.is_road.as_ref().ok_or(InferenceError::ModeMismatch)?;
    if flags.len() != graph.len() {
        return Err(InferenceError::StateLength {
            expected: graph.len(),
            got: flags.len(),
        });
    }
    Ok(graph.labels().iter().map(|&l| flags[l as usize]).collect())
}

/// Writes the energy trace as `iteration,unary_energy,total_energy` CSV.
pub fn write_trace_csv<T: Real, W: Write>(trace: &[TraceRow<T>], mut out: W) -> std::io::Result<()> {
    writeln!(out, "iteration,unary_energy,total_energy")?;
    for r in trace {
        writeln!(out, "{},{},{}", r.iteration, r.unary, r.total)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
