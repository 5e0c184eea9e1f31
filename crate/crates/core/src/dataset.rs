//! Input loading (KITTI velodyne + calibration), cropping, lattice
//! sparsification, a synthetic road-and-boxes scene generator, and output
//! writers for depth PNGs, masks and PLY point clouds.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::{ImageBuffer, Luma, Rgb, RgbImage};
use ply_rs::ply::{
    Addable, DefaultElement, ElementDef, Encoding, Ply, Property, PropertyDef, PropertyType, ScalarType,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::depth::{DenseDepth, SparseDepth};
use crate::geometry::{backproject, object_normal, CameraIntrinsics, GeometryError, PixelDepth, Plane, Point3};
use crate::num::Real;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error at byte {offset}: {message}")]
    Parse { path: String, offset: usize, message: String },
    #[error("calibration: {0}")]
    Calib(String),
    #[error("image: {0}")]
    Image(#[from] image::ImageError),
    #[error("depth {0} m does not fit the 16-bit PNG encoding")]
    Range(f64),
    #[error("invalid synthetic scene: {0}")]
    InvalidScene(String),
    #[error("dimension mismatch: {0}")]
    Dimensions(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Depth(#[from] crate::depth::DepthError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// One input frame: colour image, sparse depth, intrinsics and optional
/// ground truth, all on the same pixel grid.
#[derive(Debug, Clone)]
pub struct FrameBundle<T> {
    pub image: RgbImage,
    pub sparse: SparseDepth<T>,
    pub k: CameraIntrinsics<T>,
    pub gt: Option<DenseDepth<T>>,
}

// ---------------------------------------------------------------- KITTI

/// Parses a velodyne scan: consecutive little-endian `f32` quadruples
/// `(x, y, z, reflectance)`.
pub fn parse_velodyne(bytes: &[u8], path: &str) -> Result<Vec<[f32; 4]>, IoError> {
    if bytes.len() % 16 != 0 {
        return Err(IoError::Parse {
            path: path.to_string(),
            offset: bytes.len() - bytes.len() % 16,
            message: format!("truncated record ({} trailing bytes)", bytes.len() % 16),
        });
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| std::array::from_fn(|i| f32::from_le_bytes([c[4 * i], c[4 * i + 1], c[4 * i + 2], c[4 * i + 3]])))
        .collect())
}

pub fn read_velodyne(path: &Path) -> Result<Vec<[f32; 4]>, IoError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    parse_velodyne(&bytes, &path.display().to_string())
}

pub fn write_velodyne(path: &Path, points: &[[f32; 4]]) -> Result<(), IoError> {
    let bytes: Vec<u8> = points.iter().flat_map(|p| p.iter().flat_map(|x| x.to_le_bytes())).collect();
    fs::write(path, bytes).map_err(io_err(path))
}

/// Camera projection and LiDAR extrinsics of one sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KittiCalib {
    /// 3x4 projection matrix of the left colour camera.
    pub p2: [[f64; 4]; 3],
    /// Rectifying rotation (identity when absent).
    pub r0_rect: [[f64; 3]; 3],
    /// 3x4 LiDAR-to-camera rigid transform.
    pub tr_velo_to_cam: [[f64; 4]; 3],
}

impl KittiCalib {
    pub fn intrinsics(&self) -> Result<CameraIntrinsics<f64>, GeometryError> {
        CameraIntrinsics::new(self.p2[0][0], self.p2[0][2], self.p2[1][2])
    }

    /// Image position and depth of a LiDAR point, if in front of the camera.
    pub fn project(&self, p: [f64; 3]) -> Option<(f64, f64, f64)> {
        let t = &self.tr_velo_to_cam;
        let cam: [f64; 3] = std::array::from_fn(|r| t[r][0] * p[0] + t[r][1] * p[1] + t[r][2] * p[2] + t[r][3]);
        let rect: [f64; 3] =
            std::array::from_fn(|r| (0..3).map(|c| self.r0_rect[r][c] * cam[c]).sum::<f64>());
        let h: [f64; 3] = std::array::from_fn(|r| {
            let m = &self.p2[r];
            m[0] * rect[0] + m[1] * rect[1] + m[2] * rect[2] + m[3]
        });
        if !(h[2] > 0.0) {
            return None;
        }
        Some((h[0] / h[2], h[1] / h[2], h[2]))
    }

    pub fn to_text(&self) -> String {
        let row = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
        let p2: Vec<f64> = self.p2.iter().flatten().copied().collect();
        let r0: Vec<f64> = self.r0_rect.iter().flatten().copied().collect();
        let tr: Vec<f64> = self.tr_velo_to_cam.iter().flatten().copied().collect();
        format!("P2: {}\nR0_rect: {}\nTr_velo_to_cam: {}\n", row(&p2), row(&r0), row(&tr))
    }
}

/// Parses `KEY: v1 v2 ...` calibration text. Needs `P2` and one of
/// `Tr_velo_to_cam` / `Tr`; `R0_rect` is optional.
pub fn parse_calib(text: &str, path: &str) -> Result<KittiCalib, IoError> {
    let mut entries: Vec<(&str, Vec<f64>)> = Vec::new();
    let mut offset = 0usize;
    for line in text.split_inclusive('\n') {
        let line_start = offset;
        offset += line.len();
        let body = line.trim_end();
        if body.trim().is_empty() {
            continue;
        }
        let Some((key, rest)) = body.split_once(':') else {
            return Err(IoError::Parse {
                path: path.to_string(),
                offset: line_start,
                message: "expected 'KEY: values'".into(),
            });
        };
        let mut values = Vec::new();
        let rest_start = line_start + key.len() + 1;
        let mut pos = 0;
        for tok in rest.split_whitespace() {
            let at = rest[pos..].find(tok).map_or(pos, |i| pos + i);
            pos = at + tok.len();
            values.push(tok.parse::<f64>().map_err(|e| IoError::Parse {
                path: path.to_string(),
                offset: rest_start + at,
                message: format!("{tok:?}: {e}"),
            })?);
        }
        entries.push((key.trim(), values));
    }
    let get = |names: &[&str], len: usize| -> Result<Option<Vec<f64>>, IoError> {
        for name in names {
            if let Some((_, v)) = entries.iter().find(|(k, _)| k == name) {
                if v.len() != len {
                    return Err(IoError::Calib(format!("{name} has {} values, expected {len}", v.len())));
                }
                return Ok(Some(v.clone()));
            }
        }
        Ok(None)
    };
    let p2 = get(&["P2"], 12)?.ok_or_else(|| IoError::Calib("missing key P2".into()))?;
    let tr = get(&["Tr_velo_to_cam", "Tr"], 12)?
        .ok_or_else(|| IoError::Calib("missing key Tr_velo_to_cam (or Tr)".into()))?;
    let r0 = get(&["R0_rect"], 9)?;
    Ok(KittiCalib {
        p2: std::array::from_fn(|r| std::array::from_fn(|c| p2[4 * r + c])),
        r0_rect: match r0 {
            Some(v) => std::array::from_fn(|r| std::array::from_fn(|c| v[3 * r + c])),
            None => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        },
        tr_velo_to_cam: std::array::from_fn(|r| std::array::from_fn(|c| tr[4 * r + c])),
    })
}

pub fn read_calib(path: &Path) -> Result<KittiCalib, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_calib(&text, &path.display().to_string())
}

/// Projects LiDAR points into a `width x height` image, keeping the nearest
/// depth per pixel.
pub fn project_points<T: Real>(
    points: &[[f32; 4]],
    calib: &KittiCalib,
    width: usize,
    height: usize,
) -> Result<SparseDepth<T>, IoError> {
    let mut nearest = vec![f64::INFINITY; width * height];
    for p in points {
        let Some((u, v, z)) = calib.project([p[0] as f64, p[1] as f64, p[2] as f64]) else {
            continue;
        };
        let (u, v) = (u.round(), v.round());
        if !(u >= 0.0 && v >= 0.0 && u < width as f64 && v < height as f64) {
            continue;
        }
        let idx = v as usize * width + u as usize;
        nearest[idx] = nearest[idx].min(z);
    }
    let samples = nearest.iter().enumerate().filter(|(_, z)| z.is_finite()).map(|(i, &z)| {
        PixelDepth::new(T::from_usize_lossy(i % width), T::from_usize_lossy(i / width), T::lit(z))
    });
    Ok(SparseDepth::new(width, height, samples)?)
}

pub fn read_rgb(path: &Path) -> Result<RgbImage, IoError> {
    Ok(image::open(path)?.to_rgb8())
}

/// Loads image, velodyne scan and calibration of one KITTI frame.
pub fn load_kitti_frame<T: Real>(image_path: &Path, velodyne_path: &Path, calib_path: &Path) -> Result<FrameBundle<T>, IoError> {
    let image = read_rgb(image_path)?;
    let points = read_velodyne(velodyne_path)?;
    let calib = read_calib(calib_path)?;
    let (w, h) = (image.width() as usize, image.height() as usize);
    let sparse = project_points(&points, &calib, w, h)?;
    Ok(FrameBundle {
        image,
        sparse,
        k: calib.intrinsics()?.cast(),
        gt: None,
    })
}

pub const DEFAULT_CROP_HEIGHT: usize = 200;

/// Keeps the bottom `crop_height` rows, shifting `c_y` and sample rows.
pub fn crop_lower_half<T: Real>(bundle: &FrameBundle<T>, crop_height: usize) -> Result<FrameBundle<T>, IoError> {
    let (w, h) = (bundle.image.width() as usize, bundle.image.height() as usize);
    if crop_height == 0 || crop_height > h {
        return Err(IoError::Dimensions(format!("cannot crop {crop_height} rows from a {h}-row image")));
    }
    let top = h - crop_height;
    let image = image::imageops::crop_imm(&bundle.image, 0, top as u32, w as u32, crop_height as u32).to_image();
    let shift = T::from_usize_lossy(top);
    let samples = bundle
        .sparse
        .samples()
        .iter()
        .filter(|s| s.v >= shift)
        .map(|s| PixelDepth::new(s.u, s.v - shift, s.depth));
    let sparse = SparseDepth::new(w, crop_height, samples)?;
    let k = CameraIntrinsics::new(bundle.k.f, bundle.k.c_x, bundle.k.c_y - shift)?;
    let gt = bundle.gt.as_ref().map(|g| DenseDepth::from_fn(w, crop_height, |u, v| g.get(u, v + top)));
    Ok(FrameBundle { image, sparse, k, gt })
}

// ---------------------------------------------------------------- sparsify

/// Keeps samples with `u % h_factor == 0` and `v % v_factor == 0`.
pub fn sparsify_samples<T: Real>(sparse: &SparseDepth<T>, h_factor: usize, v_factor: usize) -> SparseDepth<T> {
    let (h_factor, v_factor) = (h_factor.max(1), v_factor.max(1));
    let kept: Vec<PixelDepth<T>> = sparse
        .samples()
        .iter()
        .filter(|s| {
            let i = sparse.index_of(s);
            (i % sparse.width()) % h_factor == 0 && (i / sparse.width()) % v_factor == 0
        })
        .copied()
        .collect();
    SparseDepth::new(sparse.width(), sparse.height(), kept).expect("subset of valid samples")
}

/// Samples a dense map on the `(h_factor, v_factor)` lattice.
pub fn sparsify_dense<T: Real>(dense: &DenseDepth<T>, h_factor: usize, v_factor: usize) -> SparseDepth<T> {
    let (h_factor, v_factor) = (h_factor.max(1), v_factor.max(1));
    let mut samples = Vec::new();
    for v in (0..dense.height()).step_by(v_factor) {
        for u in (0..dense.width()).step_by(h_factor) {
            if let Some(d) = dense.get(u, v) {
                samples.push(PixelDepth::new(T::from_usize_lossy(u), T::from_usize_lossy(v), d));
            }
        }
    }
    SparseDepth::new(dense.width(), dense.height(), samples).expect("lattice samples are valid")
}

// ---------------------------------------------------------------- synthetic scenes

/// Upright box face standing on the road.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticObject {
    /// Depth where the object plane crosses the optical axis (metres).
    pub depth: f64,
    /// Horizontal pixel extent `[u0, u1)`.
    pub u_range: (usize, usize),
    /// Top image row; the face extends down until occluded by the road.
    pub v_top: usize,
    pub color: [u8; 3],
}

/// Colour-only elliptical patch painted on visible road pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowPatch {
    pub center: (f64, f64),
    pub radii: (f64, f64),
    /// Brightness multiplier.
    pub darkness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub width: usize,
    pub height: usize,
    pub k: CameraIntrinsics<f64>,
    pub road: Plane<f64>,
    pub road_color: [u8; 3],
    pub objects: Vec<SyntheticObject>,
    pub shadows: Vec<ShadowPatch>,
    /// Per-pixel uniform colour noise amplitude (0 disables).
    pub noise: u8,
    pub texture_seed: u64,
    /// Lattice used to draw the sparse samples from ground truth.
    pub sparsify: (usize, usize),
}

impl SyntheticScene {
    /// Road seen from 1.5 m with a slight pitch and three upright faces
    /// that together hide everything above the horizon; 640x240.
    pub fn road_and_boxes() -> Self {
        let pitch: f64 = 0.02;
        Self {
            width: 640,
            height: 240,
            k: CameraIntrinsics::new(400.0, 320.0, 40.0).expect("valid intrinsics"),
            road: Plane::new([0.0, pitch.cos(), -pitch.sin()], -1.5).expect("valid road"),
            road_color: [118, 116, 120],
            objects: vec![
                SyntheticObject { depth: 10.0, u_range: (0, 230), v_top: 0, color: [176, 64, 52] },
                SyntheticObject { depth: 15.0, u_range: (230, 420), v_top: 0, color: [60, 98, 170] },
                SyntheticObject { depth: 7.0, u_range: (420, 640), v_top: 0, color: [72, 150, 80] },
            ],
            shadows: Vec::new(),
            noise: 10,
            texture_seed: 7,
            sparsify: (6, 3),
        }
    }

    /// Adds `count` dark patches placed on the lower (road) part of the image.
    pub fn with_shadows(mut self, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, h) = (self.width as f64, self.height as f64);
        for _ in 0..count {
            self.shadows.push(ShadowPatch {
                center: (rng.gen_range(0.1 * w..0.9 * w), rng.gen_range(0.7 * h..0.95 * h)),
                radii: (rng.gen_range(0.05 * w..0.1 * w), rng.gen_range(0.04 * h..0.08 * h)),
                darkness: rng.gen_range(0.35..0.55),
            });
        }
        self
    }

    pub fn object_plane(&self, obj: &SyntheticObject) -> Result<Plane<f64>, GeometryError> {
        Plane::through_point(object_normal(&self.road)?, Point3::new(0.0, 0.0, obj.depth))
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticFrame<T> {
    pub bundle: FrameBundle<T>,
    /// Row-major ground-truth road visibility.
    pub road_mask: Vec<bool>,
}

/// Renders depth, colour, road mask and lattice samples of a scene.
pub fn generate_synthetic<T: Real>(scene: &SyntheticScene) -> Result<SyntheticFrame<T>, IoError> {
    let (w, h) = (scene.width, scene.height);
    if w == 0 || h == 0 {
        return Err(IoError::InvalidScene("empty image".into()));
    }
    let planes: Vec<Plane<f64>> = scene
        .objects
        .iter()
        .map(|o| scene.object_plane(o))
        .collect::<Result<_, _>>()?;
    let mut depth = vec![0.0f64; w * h];
    let mut owner: Vec<Option<usize>> = vec![None; w * h];
    for v in 0..h {
        for u in 0..w {
            let ray = scene.k.ray(u as f64, v as f64);
            let mut best = scene.road.depth_along(&ray).ok().map(|d| (d, None));
            for (oi, (o, p)) in scene.objects.iter().zip(&planes).enumerate() {
                if u < o.u_range.0 || u >= o.u_range.1 || v < o.v_top {
                    continue;
                }
                if let Ok(d) = p.depth_along(&ray) {
                    if best.map_or(true, |(b, _)| d < b) {
                        best = Some((d, Some(oi)));
                    }
                }
            }
            match best {
                Some((d, who)) if d > 0.0 && d.is_finite() => {
                    depth[v * w + u] = d;
                    owner[v * w + u] = who;
                }
                _ => {
                    return Err(IoError::InvalidScene(format!("no positive depth at pixel ({u}, {v})")));
                }
            }
        }
    }
    let road_mask: Vec<bool> = owner.iter().map(|o| o.is_none()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(scene.texture_seed);
    let mut image = RgbImage::new(w as u32, h as u32);
    for v in 0..h {
        for u in 0..w {
            let idx = v * w + u;
            let base = match owner[idx] {
                Some(oi) => scene.objects[oi].color,
                None => scene.road_color,
            };
            let mut c = base.map(|x| x as f64);
            if scene.noise > 0 {
                let n = rng.gen_range(-(scene.noise as f64)..=scene.noise as f64);
                c.iter_mut().for_each(|x| *x += n);
            }
            if road_mask[idx] {
                for s in &scene.shadows {
                    let (dx, dy) = ((u as f64 - s.center.0) / s.radii.0, (v as f64 - s.center.1) / s.radii.1);
                    if dx * dx + dy * dy <= 1.0 {
                        c.iter_mut().for_each(|x| *x *= s.darkness);
                    }
                }
            }
            image.put_pixel(u as u32, v as u32, Rgb(c.map(|x| x.round().clamp(0.0, 255.0) as u8)));
        }
    }

    let gt = DenseDepth::from_vec(w, h, depth.iter().map(|&d| T::lit(d)).collect())?;
    let sparse = sparsify_dense(&gt, scene.sparsify.0, scene.sparsify.1);
    Ok(SyntheticFrame {
        bundle: FrameBundle {
            image,
            sparse,
            k: scene.k.cast(),
            gt: Some(gt),
        },
        road_mask,
    })
}

// ---------------------------------------------------------------- writers

const DEPTH_SCALE: f64 = 256.0;

/// 16-bit PNG with `round(depth * 256)`; 0 marks invalid pixels.
pub fn encode_depth_png<T: Real>(d: &DenseDepth<T>) -> Result<ImageBuffer<Luma<u16>, Vec<u16>>, IoError> {
    let mut data = Vec::with_capacity(d.raw().len());
    for x in d.raw() {
        let x = x.to_f64_lossy();
        if x.is_nan() {
            data.push(0);
            continue;
        }
        let q = (x * DEPTH_SCALE).round();
        if !(q >= 1.0 && q <= u16::MAX as f64) {
            return Err(IoError::Range(x));
        }
        data.push(q as u16);
    }
    Ok(ImageBuffer::from_raw(d.width() as u32, d.height() as u32, data).expect("buffer size matches"))
}

pub fn write_depth_png<T: Real>(d: &DenseDepth<T>, path: &Path) -> Result<(), IoError> {
    encode_depth_png(d)?.save(path)?;
    Ok(())
}

pub fn read_depth_png<T: Real>(path: &Path) -> Result<DenseDepth<T>, IoError> {
    let img = image::open(path)?.into_luma16();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = img
        .into_raw()
        .into_iter()
        .map(|q| if q == 0 { T::nan() } else { T::lit(q as f64 / DEPTH_SCALE) })
        .collect();
    Ok(DenseDepth::from_vec(w, h, data)?)
}

/// 8-bit mask image, 255 where `mask` is set.
pub fn write_mask_png(mask: &[bool], width: usize, height: usize, path: &Path) -> Result<(), IoError> {
    if mask.len() != width * height {
        return Err(IoError::Dimensions(format!("mask of {} for {width}x{height}", mask.len())));
    }
    let img: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(width as u32, height as u32, mask.iter().map(|&m| if m { 255 } else { 0 }).collect())
            .expect("buffer size matches");
    img.save(path)?;
    Ok(())
}

pub fn read_mask_png(path: &Path) -> Result<(usize, usize, Vec<bool>), IoError> {
    let img = image::open(path)?.into_luma8();
    Ok((img.width() as usize, img.height() as usize, img.into_raw().into_iter().map(|x| x > 127).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

const ROAD_TINT: [u8; 3] = [40, 220, 60];

/// Coloured point cloud of all valid pixels. Road-mask pixels are blended
/// towards green.
pub fn write_ply<T: Real, W: Write>(
    out: &mut W,
    depth: &DenseDepth<T>,
    image: &RgbImage,
    k: &CameraIntrinsics<T>,
    road_mask: Option<&[bool]>,
    format: PlyFormat,
) -> Result<usize, IoError> {
    let (w, h) = (depth.width(), depth.height());
    if image.width() as usize != w || image.height() as usize != h || road_mask.is_some_and(|m| m.len() != w * h) {
        return Err(IoError::Dimensions("depth, image and mask must share dimensions".into()));
    }
    let mut ply = Ply::<DefaultElement>::new();
    ply.header.encoding = match format {
        PlyFormat::Ascii => Encoding::Ascii,
        PlyFormat::BinaryLittleEndian => Encoding::BinaryLittleEndian,
    };
    let mut vertex = ElementDef::new("vertex".to_string());
    for name in ["x", "y", "z"] {
        vertex.properties.add(PropertyDef::new(name.to_string(), PropertyType::Scalar(ScalarType::Float)));
    }
    for name in ["red", "green", "blue"] {
        vertex.properties.add(PropertyDef::new(name.to_string(), PropertyType::Scalar(ScalarType::UChar)));
    }
    ply.header.elements.add(vertex);

    let mut vertices = Vec::new();
    for v in 0..h {
        for u in 0..w {
            let Some(d) = depth.get(u, v) else { continue };
            let p = backproject(&PixelDepth::new(T::from_usize_lossy(u), T::from_usize_lossy(v), d), k)?;
            let mut rgb = image.get_pixel(u as u32, v as u32).0;
            if road_mask.is_some_and(|m| m[v * w + u]) {
                rgb = std::array::from_fn(|c| ((rgb[c] as u16 + ROAD_TINT[c] as u16) / 2) as u8);
            }
            let mut e = DefaultElement::new();
            e.insert("x".to_string(), Property::Float(p.x.to_f64_lossy() as f32));
            e.insert("y".to_string(), Property::Float(p.y.to_f64_lossy() as f32));
            e.insert("z".to_string(), Property::Float(p.z.to_f64_lossy() as f32));
            e.insert("red".to_string(), Property::UChar(rgb[0]));
            e.insert("green".to_string(), Property::UChar(rgb[1]));
            e.insert("blue".to_string(), Property::UChar(rgb[2]));
            vertices.push(e);
        }
    }
    let n = vertices.len();
    ply.payload.insert("vertex".to_string(), vertices);
    ply_rs::writer::Writer::new()
        .write_ply(out, &mut ply)
        .map_err(|source| IoError::Io {
            path: "<ply>".into(),
            source,
        })?;
    Ok(n)
}

pub fn write_ply_file<T: Real>(
    path: &Path,
    depth: &DenseDepth<T>,
    image: &RgbImage,
    k: &CameraIntrinsics<T>,
    road_mask: Option<&[bool]>,
    format: PlyFormat,
) -> Result<usize, IoError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    let n = write_ply(&mut out, depth, image, k, road_mask, format)?;
    out.flush().map_err(io_err(path))?;
    Ok(n)
}
