//! End-to-end completion: segmentation, interpolation, plane initialisation,
//! particle optimisation and rendering, driven by a flat `key = value`
//! configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use image::RgbImage;
use thiserror::Error;

use crate::dataset::{self, FrameBundle, IoError, PlyFormat};
use crate::depth::DenseDepth;
use crate::energy::{group_samples, EnergyError, EnergyModel, EnergyParams};
use crate::geometry::{backproject, ransac_plane, CameraIntrinsics, GeometryError, Plane};
use crate::inference::{self, InferenceError, InitState, Labeling, Mode, SolverConfig, TraceRow};
use crate::init::{self, InitError, PlsParams};
use crate::num::Real;
use crate::segmentation::{slic_segment, SegmentationError, SlicParams, SuperpixelGraph};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },
    #[error("config key '{key}': {message}")]
    ConfigValue { key: String, message: String },
    #[error(transparent)]
    Segmentation(#[from] SegmentationError),
    #[error(transparent)]
    Init(#[from] InitError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Every tunable parameter. `n_i` and `superpixels` default per mode when unset.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub mode: Mode,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub sigma: [f64; 4],
    pub sigma_depth: f64,
    pub rho: f64,
    pub n_p: usize,
    pub n_i: Option<usize>,
    pub trws_iters: usize,
    pub epsilon: f64,
    pub superpixels: Option<usize>,
    pub compactness: f64,
    pub slic_iters: usize,
    pub lambda: f64,
    pub d_th: f64,
    pub crop_height: usize,
    pub downsample_h: usize,
    pub downsample_v: usize,
    pub ransac_tol: f64,
    pub ransac_iters: usize,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        let e = EnergyParams::<f64>::default();
        let s = SolverConfig::<f64>::planar();
        Self {
            mode: Mode::Planar,
            theta1: e.theta1,
            theta2: e.theta2,
            theta3: e.theta3,
            tau1: e.tau1,
            tau2: e.tau2,
            sigma: s.sigma_plane,
            sigma_depth: s.sigma_depth,
            rho: s.decay,
            n_p: s.n_particles,
            n_i: None,
            trws_iters: s.trws_sweeps,
            epsilon: s.epsilon,
            superpixels: None,
            compactness: SlicParams::default().compactness as f64,
            slic_iters: SlicParams::default().max_iters,
            lambda: PlsParams::default().lambda,
            d_th: crate::metrics::DEFAULT_BAD_PIXEL_THRESHOLD,
            crop_height: dataset::DEFAULT_CROP_HEIGHT,
            downsample_h: 6,
            downsample_v: 3,
            ransac_tol: 0.15,
            ransac_iters: 200,
            seed: 0,
        }
    }
}

/// Keys accepted by [`Config::set`], in echo order.
pub const CONFIG_KEYS: &[&str] = &[
    "mode",
    "theta1",
    "theta2",
    "theta3",
    "tau1",
    "tau2",
    "sigma",
    "sigma_depth",
    "rho",
    "n_p",
    "n_i",
    "trws_iters",
    "epsilon",
    "superpixels",
    "compactness",
    "slic_iters",
    "lambda",
    "d_th",
    "crop_height",
    "downsample_h",
    "downsample_v",
    "ransac_tol",
    "ransac_iters",
    "seed",
];

fn parse_num<V: std::str::FromStr>(key: &str, value: &str) -> Result<V, PipelineError>
where
    V::Err: std::fmt::Display,
{
    value.parse::<V>().map_err(|e| PipelineError::ConfigValue {
        key: key.to_string(),
        message: format!("{value:?}: {e}"),
    })
}

impl Config {
    pub fn for_mode(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn n_iters(&self) -> usize {
        self.n_i.unwrap_or(match self.mode {
            Mode::Planar => 40,
            Mode::Cardboard => 20,
        })
    }

    pub fn superpixel_count(&self) -> usize {
        self.superpixels.unwrap_or(match self.mode {
            Mode::Planar => 800,
            Mode::Cardboard => 1200,
        })
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), PipelineError> {
        let value = value.trim();
        match key {
            "mode" => {
                self.mode = value.parse().map_err(|message| PipelineError::ConfigValue {
                    key: key.into(),
                    message,
                })?
            }
            "theta1" => self.theta1 = parse_num(key, value)?,
            "theta2" => self.theta2 = parse_num(key, value)?,
            "theta3" => self.theta3 = parse_num(key, value)?,
            "tau1" => self.tau1 = parse_num(key, value)?,
            "tau2" => self.tau2 = parse_num(key, value)?,
            "sigma" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|p| parse_num(key, p.trim()))
                    .collect::<Result<_, _>>()?;
                self.sigma = parts.try_into().map_err(|_| PipelineError::ConfigValue {
                    key: key.into(),
                    message: "expected four comma-separated values".into(),
                })?;
            }
            "sigma_depth" => self.sigma_depth = parse_num(key, value)?,
            "rho" => self.rho = parse_num(key, value)?,
            "n_p" => self.n_p = parse_num(key, value)?,
            "n_i" => self.n_i = Some(parse_num(key, value)?),
            "trws_iters" => self.trws_iters = parse_num(key, value)?,
            "epsilon" => self.epsilon = parse_num(key, value)?,
            "superpixels" => self.superpixels = Some(parse_num(key, value)?),
            "compactness" => self.compactness = parse_num(key, value)?,
            "slic_iters" => self.slic_iters = parse_num(key, value)?,
            "lambda" => self.lambda = parse_num(key, value)?,
            "d_th" => self.d_th = parse_num(key, value)?,
            "crop_height" => self.crop_height = parse_num(key, value)?,
            "downsample_h" => self.downsample_h = parse_num(key, value)?,
            "downsample_v" => self.downsample_v = parse_num(key, value)?,
            "ransac_tol" => self.ransac_tol = parse_num(key, value)?,
            "ransac_iters" => self.ransac_iters = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            _ => {
                return Err(PipelineError::ConfigValue {
                    key: key.into(),
                    message: "unknown key".into(),
                })
            }
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), PipelineError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| PipelineError::ConfigSyntax {
                line: n + 1,
                message: format!("expected 'key = value', got {raw:?}"),
            })?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|source| PipelineError::File {
            path: path.display().to_string(),
            source,
        })?;
        let mut c = Self::default();
        c.apply_text(&text)?;
        Ok(c)
    }

    /// Effective configuration, one `key = value` per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for key in CONFIG_KEYS {
            let v = match *key {
                "mode" => self.mode.to_string(),
                "theta1" => self.theta1.to_string(),
                "theta2" => self.theta2.to_string(),
                "theta3" => self.theta3.to_string(),
                "tau1" => self.tau1.to_string(),
                "tau2" => self.tau2.to_string(),
                "sigma" => self.sigma.map(|x| x.to_string()).join(", "),
                "sigma_depth" => self.sigma_depth.to_string(),
                "rho" => self.rho.to_string(),
                "n_p" => self.n_p.to_string(),
                "n_i" => self.n_iters().to_string(),
                "trws_iters" => self.trws_iters.to_string(),
                "epsilon" => self.epsilon.to_string(),
                "superpixels" => self.superpixel_count().to_string(),
                "compactness" => self.compactness.to_string(),
                "slic_iters" => self.slic_iters.to_string(),
                "lambda" => self.lambda.to_string(),
                "d_th" => self.d_th.to_string(),
                "crop_height" => self.crop_height.to_string(),
                "downsample_h" => self.downsample_h.to_string(),
                "downsample_v" => self.downsample_v.to_string(),
                "ransac_tol" => self.ransac_tol.to_string(),
                "ransac_iters" => self.ransac_iters.to_string(),
                "seed" => self.seed.to_string(),
                _ => unreachable!("every key is listed"),
            };
            let _ = writeln!(s, "{key} = {v}");
        }
        s
    }

    pub fn energy_params<T: Real>(&self) -> EnergyParams<T> {
        EnergyParams {
            theta1: T::lit(self.theta1),
            theta2: T::lit(self.theta2),
            theta3: T::lit(self.theta3),
            tau1: T::lit(self.tau1),
            tau2: T::lit(self.tau2),
        }
    }

    pub fn solver<T: Real>(&self) -> SolverConfig<T> {
        SolverConfig {
            n_particles: self.n_p,
            n_iters: self.n_iters(),
            sigma_plane: self.sigma.map(T::lit),
            sigma_depth: T::lit(self.sigma_depth),
            decay: T::lit(self.rho),
            trws_sweeps: self.trws_iters,
            seed: self.seed,
            mode: self.mode,
            epsilon: T::lit(self.epsilon),
        }
    }

    pub fn slic(&self) -> SlicParams {
        SlicParams {
            target_count: self.superpixel_count(),
            compactness: self.compactness as f32,
            max_iters: self.slic_iters,
        }
    }

    pub fn pls(&self) -> PlsParams {
        PlsParams {
            lambda: self.lambda,
            ..PlsParams::default()
        }
    }
}

/// Wall time of each stage, in execution order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timings {
    pub stages: Vec<(&'static str, Duration)>,
}

impl Timings {
    fn time<R>(&mut self, name: &'static str, f: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let r = f();
        self.stages.push((name, start.elapsed()));
        r
    }

    pub fn total(&self) -> Duration {
        self.stages.iter().map(|(_, d)| *d).sum()
    }

    pub fn get(&self, name: &str) -> Option<Duration> {
        self.stages.iter().find(|(n, _)| *n == name).map(|(_, d)| *d)
    }
}

impl std::fmt::Display for Timings {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (name, d) in &self.stages {
            writeln!(f, "{name}: {:.3} s", d.as_secs_f64())?;
        }
        write!(f, "total: {:.3} s", self.total().as_secs_f64())
    }
}

#[derive(Debug, Clone)]
pub struct Completion<T> {
    pub graph: SuperpixelGraph,
    pub dense0: DenseDepth<T>,
    pub depth: DenseDepth<T>,
    pub planes: Vec<Plane<T>>,
    pub labeling: Labeling,
    pub road: Option<Plane<T>>,
    pub free_space: Option<Vec<bool>>,
    pub trace: Vec<TraceRow<T>>,
    pub initial_total: T,
    pub timings: Timings,
}

/// Road plane by RANSAC over the back-projected sparse samples.
pub fn estimate_road<T: Real>(bundle: &FrameBundle<T>, tol: T, iters: usize, seed: u64) -> Result<Plane<T>, PipelineError> {
    let points = bundle
        .sparse
        .samples()
        .iter()
        .map(|s| backproject(s, &bundle.k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ransac_plane(&points, tol, iters, seed)?.0)
}

/// Runs the full completion on one frame.
pub fn complete<T: Real>(bundle: &FrameBundle<T>, config: &Config) -> Result<Completion<T>, PipelineError> {
    let mut timings = Timings::default();
    let (w, h) = (bundle.image.width() as usize, bundle.image.height() as usize);
    if bundle.sparse.width() != w || bundle.sparse.height() != h {
        return Err(IoError::Dimensions(format!(
            "image {w}x{h} vs depth {}x{}",
            bundle.sparse.width(),
            bundle.sparse.height()
        ))
        .into());
    }
    let solver = config.solver::<T>();
    solver.validate()?;
    let params = config.energy_params::<T>();

    let graph = timings.time("segmentation", || slic_segment(&bundle.image, &config.slic()))?;
    let dense0 = timings.time("interpolation", || init::pls_interpolate(&bundle.sparse, &config.pls()))?;

    let (init_state, road) = timings.time("initialisation", || -> Result<_, PipelineError> {
        match config.mode {
            Mode::Planar => Ok((InitState::Planar(init::init_planes(&graph, &dense0, &bundle.k)?), None)),
            Mode::Cardboard => {
                let road = estimate_road(bundle, T::lit(config.ransac_tol), config.ransac_iters, config.seed)?;
                let (planes, is_road) = init::init_cardboard(&graph, &dense0, &road, &bundle.k, T::lit(config.epsilon))?;
                Ok((InitState::Cardboard { planes, is_road, road }, Some(road)))
            }
        }
    })?;

    let model = timings.time("cost model", || {
        EnergyModel::new(&graph, &group_samples(&graph, &bundle.sparse), &bundle.k, params)
    })?;
    let out = timings.time("optimisation", || inference::pcbp_run(&graph, &model, &bundle.k, &solver, init_state))?;
    let depth = timings.time("rendering", || inference::render_depth(&out.planes, &graph, &bundle.k, Some(&dense0)));
    let free_space = match config.mode {
        Mode::Cardboard => Some(inference::free_space_mask(&out.labeling, &graph)?),
        Mode::Planar => None,
    };
    Ok(Completion {
        graph,
        dense0,
        depth,
        planes: out.planes,
        labeling: out.labeling,
        road,
        free_space,
        trace: out.trace,
        initial_total: out.initial_total,
        timings,
    })
}

/// Output file names inside the output directory.
pub mod outputs {
    pub const DEPTH: &str = "depth.png";
    pub const CLOUD: &str = "cloud.ply";
    pub const TRACE: &str = "trace.csv";
    pub const FREE_SPACE: &str = "free_space.png";
    pub const SEGMENTS: &str = "segments.png";
    pub const CONFIG: &str = "config.txt";
    pub const TIMINGS: &str = "timings.txt";
}

/// Writes depth PNG, point cloud, trace, effective config, timings, a
/// segmentation overlay and (cardboard) the free-space mask.
pub fn write_outputs<T: Real>(
    dir: &Path,
    result: &Completion<T>,
    image: &RgbImage,
    k: &CameraIntrinsics<T>,
    config: &Config,
    ply_format: PlyFormat,
) -> Result<(), PipelineError> {
    let file_err = |p: &Path| {
        let path = p.display().to_string();
        move |source| PipelineError::File { path, source }
    };
    fs::create_dir_all(dir).map_err(file_err(dir))?;
    let (w, h) = (result.depth.width(), result.depth.height());
    dataset::write_depth_png(&result.depth, &dir.join(outputs::DEPTH))?;
    dataset::write_ply_file(
        &dir.join(outputs::CLOUD),
        &result.depth,
        image,
        k,
        result.free_space.as_deref(),
        ply_format,
    )?;
    let trace_path = dir.join(outputs::TRACE);
    let file = fs::File::create(&trace_path).map_err(file_err(&trace_path))?;
    inference::write_trace_csv(&result.trace, std::io::BufWriter::new(file)).map_err(file_err(&trace_path))?;
    if let Some(mask) = &result.free_space {
        dataset::write_mask_png(mask, w, h, &dir.join(outputs::FREE_SPACE))?;
    }
    result
        .graph
        .boundary_overlay(image, [255, 255, 0])
        .save(dir.join(outputs::SEGMENTS))
        .map_err(IoError::from)?;
    let cfg_path = dir.join(outputs::CONFIG);
    fs::write(&cfg_path, config.to_text()).map_err(file_err(&cfg_path))?;
    let t_path = dir.join(outputs::TIMINGS);
    fs::write(&t_path, format!("{}\n", result.timings)).map_err(file_err(&t_path))?;
    Ok(())
}
