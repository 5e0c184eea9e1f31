use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{value_parser, Arg, ArgMatches, Args, Command, FromArgMatches, Parser, Subcommand, ValueEnum};

use planecrf::dataset::{self, FrameBundle, KittiCalib, PlyFormat, SyntheticScene};
use planecrf::depth::DenseDepth;
use planecrf::geometry::backproject;
use planecrf::metrics::{evaluate, EvalReport};
use planecrf::pipeline::{self, Config, CONFIG_KEYS};
use planecrf::segmentation::{slic_segment, SlicParams};
use planecrf::Real;

/// File names inside a frame directory (as written by `synth`).
mod frame {
    pub const IMAGE: &str = "image.png";
    pub const VELODYNE: &str = "velodyne.bin";
    pub const CALIB: &str = "calib.txt";
    pub const GT: &str = "gt.png";
    pub const ROAD_MASK: &str = "road_mask.png";
}

#[derive(Parser)]
#[command(name = "planecrf", version, about = "Sparse-to-dense depth completion with piecewise-planar CRFs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run SLIC and write the label map and a boundary overlay.
    Segment {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value_t = SlicParams::default().target_count)]
        superpixels: usize,
        #[arg(long, default_value_t = SlicParams::default().compactness)]
        compactness: f32,
        #[arg(long = "slic_iters", default_value_t = SlicParams::default().max_iters)]
        slic_iters: usize,
    },
    /// Complete a sparse depth frame into a dense depth map.
    Complete(CompleteArgs),
    /// Compare predicted depth PNGs against ground truth.
    Eval {
        #[arg(long, required_unless_present = "list")]
        pred: Option<PathBuf>,
        #[arg(long, required_unless_present = "list")]
        gt: Option<PathBuf>,
        /// Text file with one `pred.png gt.png` pair per line.
        #[arg(long, conflicts_with_all = ["pred", "gt"])]
        list: Option<PathBuf>,
        #[arg(long = "d_th", default_value_t = planecrf::metrics::DEFAULT_BAD_PIXEL_THRESHOLD)]
        d_th: f64,
        /// Emit CSV instead of text.
        #[arg(long)]
        csv: bool,
    },
    /// Write a synthetic road-and-boxes frame directory.
    Synth {
        #[arg(long, short)]
        output: PathBuf,
        /// Number of colour-only patches painted on the road.
        #[arg(long, default_value_t = 0)]
        shadows: usize,
        #[arg(long = "shadow_seed", default_value_t = 1)]
        shadow_seed: u64,
        #[arg(long = "texture_seed")]
        texture_seed: Option<u64>,
    },
    /// Keep only lattice samples of a depth PNG.
    Sparsify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long = "downsample_h", default_value_t = 6)]
        downsample_h: usize,
        #[arg(long = "downsample_v", default_value_t = 3)]
        downsample_v: usize,
    },
}

#[derive(Args)]
struct CompleteArgs {
    /// Frame directory with image.png, velodyne.bin and calib.txt (no cropping).
    #[arg(long, conflicts_with_all = ["image", "velodyne", "calib"], required_unless_present = "image")]
    frame: Option<PathBuf>,
    #[arg(long, requires_all = ["velodyne", "calib"])]
    image: Option<PathBuf>,
    #[arg(long)]
    velodyne: Option<PathBuf>,
    #[arg(long)]
    calib: Option<PathBuf>,
    /// Ground-truth depth PNG; defaults to gt.png inside --frame if present.
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = PlyArg::Binary)]
    ply: PlyArg,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    precision: Precision,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlyArg {
    Ascii,
    Binary,
}

#[derive(Clone, Copy, ValueEnum)]
enum Precision {
    F32,
    F64,
}

/// `--config FILE` plus one flag per config key.
#[derive(Default)]
struct ConfigArgs {
    file: Option<PathBuf>,
    overrides: Vec<(String, String)>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<Config> {
        let mut config = match &self.file {
            Some(p) => Config::from_file(p)?,
            None => Config::default(),
        };
        for (k, v) in &self.overrides {
            config.set(k, v)?;
        }
        Ok(config)
    }
}

impl FromArgMatches for ConfigArgs {
    fn from_arg_matches(m: &ArgMatches) -> Result<Self, clap::Error> {
        let mut s = Self::default();
        s.update_from_arg_matches(m)?;
        Ok(s)
    }

    fn update_from_arg_matches(&mut self, m: &ArgMatches) -> Result<(), clap::Error> {
        if let Some(p) = m.get_one::<PathBuf>("config") {
            self.file = Some(p.clone());
        }
        for key in CONFIG_KEYS {
            if let Some(v) = m.get_one::<String>(key) {
                self.overrides.retain(|(k, _)| k != key);
                self.overrides.push((key.to_string(), v.clone()));
            }
        }
        Ok(())
    }
}

impl Args for ConfigArgs {
    fn augment_args(cmd: Command) -> Command {
        let cmd = cmd.arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .value_parser(value_parser!(PathBuf))
                .help("Plain-text `key = value` parameter file"),
        );
        CONFIG_KEYS.iter().fold(cmd, |cmd, key| {
            cmd.arg(Arg::new(*key).long(*key).value_name("VALUE").help_heading("Parameters"))
        })
    }

    fn augment_args_for_update(cmd: Command) -> Command {
        Self::augment_args(cmd)
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Cmd::Segment {
            image,
            output,
            superpixels,
            compactness,
            slic_iters,
        } => segment(&image, &output, SlicParams { target_count: superpixels, compactness, max_iters: slic_iters }),
        Cmd::Complete(args) => match args.precision {
            Precision::F32 => complete::<f32>(&args),
            Precision::F64 => complete::<f64>(&args),
        },
        Cmd::Eval { pred, gt, list, d_th, csv } => {
            let pairs = match list {
                Some(l) => read_pairs(&l)?,
                None => vec![(pred.expect("required"), gt.expect("required"))],
            };
            eval(&pairs, d_th, csv)
        }
        Cmd::Synth {
            output,
            shadows,
            shadow_seed,
            texture_seed,
        } => {
            let mut scene = SyntheticScene::road_and_boxes().with_shadows(shadows, shadow_seed);
            if let Some(s) = texture_seed {
                scene.texture_seed = s;
            }
            synth(&scene, &output)
        }
        Cmd::Sparsify {
            input,
            output,
            downsample_h,
            downsample_v,
        } => {
            if downsample_h == 0 || downsample_v == 0 {
                bail!("downsample factors must be at least 1");
            }
            let d: DenseDepth<f64> = dataset::read_depth_png(&input)?;
            let s = dataset::sparsify_dense(&d, downsample_h, downsample_v);
            dataset::write_depth_png(&s.to_dense(), &output)?;
            println!("{} of {} samples kept", s.len(), d.valid_count());
            Ok(())
        }
    }
}

fn segment(image: &Path, output: &Path, params: SlicParams) -> Result<()> {
    let img = dataset::read_rgb(image)?;
    let graph = slic_segment(&img, &params)?;
    fs::create_dir_all(output).with_context(|| output.display().to_string())?;
    graph.label_image().save(output.join("labels.png"))?;
    graph.boundary_overlay(&img, [255, 255, 0]).save(output.join("overlay.png"))?;
    println!("{} superpixels, {} adjacencies", graph.len(), graph.adjacency().len());
    Ok(())
}

fn load_frame<T: Real>(args: &CompleteArgs, config: &Config) -> Result<(FrameBundle<T>, Option<PathBuf>)> {
    let (bundle, gt) = match &args.frame {
        Some(dir) => {
            let b = dataset::load_kitti_frame::<T>(&dir.join(frame::IMAGE), &dir.join(frame::VELODYNE), &dir.join(frame::CALIB))?;
            let gt = Some(dir.join(frame::GT)).filter(|p| p.exists());
            (b, gt)
        }
        None => {
            let (Some(image), Some(velo), Some(calib)) = (&args.image, &args.velodyne, &args.calib) else {
                bail!("--image, --velodyne and --calib are required without --frame");
            };
            let b = dataset::load_kitti_frame::<T>(image, velo, calib)?;
            let b = if b.image.height() as usize > config.crop_height {
                dataset::crop_lower_half(&b, config.crop_height)?
            } else {
                b
            };
            (b, None)
        }
    };
    let sparse = dataset::sparsify_samples(&bundle.sparse, config.downsample_h, config.downsample_v);
    Ok((FrameBundle { sparse, ..bundle }, args.gt.clone().or(gt)))
}

fn complete<T: Real>(args: &CompleteArgs) -> Result<()> {
    let config = args.config.resolve()?;
    let (bundle, gt_path) = load_frame::<T>(args, &config)?;
    eprintln!(
        "{}x{} image, {} samples, mode {}",
        bundle.image.width(),
        bundle.image.height(),
        bundle.sparse.len(),
        config.mode
    );
    let result = pipeline::complete(&bundle, &config)?;
    let ply = match args.ply {
        PlyArg::Ascii => PlyFormat::Ascii,
        PlyArg::Binary => PlyFormat::BinaryLittleEndian,
    };
    pipeline::write_outputs(&args.output, &result, &bundle.image, &bundle.k, &config, ply)?;
    if let (Some(first), Some(last)) = (result.trace.first(), result.trace.last()) {
        eprintln!(
            "energy {:.3} -> {:.3} over {} iterations",
            result.initial_total.to_f64_lossy(),
            last.total.to_f64_lossy(),
            last.iteration + 1 - first.iteration
        );
    }
    eprintln!("{}", result.timings);
    if let Some(p) = gt_path {
        let gt: DenseDepth<T> = dataset::read_depth_png(&p)?;
        let report = evaluate(&result.depth, &gt, config.d_th)?;
        fs::write(
            args.output.join("metrics.csv"),
            format!("{}\n{}\n", EvalReport::CSV_HEADER, report.csv_line()),
        )?;
        println!("{report}");
    }
    Ok(())
}

fn read_pairs(list: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    let text = fs::read_to_string(list).with_context(|| list.display().to_string())?;
    let base = list.parent().unwrap_or(Path::new("."));
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [p, g] = parts[..] else {
            bail!("{}:{}: expected `pred gt`", list.display(), i + 1);
        };
        pairs.push((base.join(p), base.join(g)));
    }
    if pairs.is_empty() {
        bail!("{}: no frames listed", list.display());
    }
    Ok(pairs)
}

/// Per-frame reports; the summary averages frames with equal weight.
fn eval(pairs: &[(PathBuf, PathBuf)], d_th: f64, csv: bool) -> Result<()> {
    let mut reports = Vec::with_capacity(pairs.len());
    for (p, g) in pairs {
        let pred: DenseDepth<f64> = dataset::read_depth_png(p)?;
        let gt: DenseDepth<f64> = dataset::read_depth_png(g)?;
        let r = evaluate(&pred, &gt, d_th).with_context(|| p.display().to_string())?;
        reports.push((p, r));
    }
    if csv {
        println!("frame,{}", EvalReport::CSV_HEADER);
        for (p, r) in &reports {
            println!("{},{}", p.display(), r.csv_line());
        }
    }
    if reports.len() == 1 {
        if !csv {
            println!("{}", reports[0].1);
        }
        return Ok(());
    }
    let n = reports.len() as f64;
    let mean = EvalReport {
        mre: reports.iter().map(|(_, r)| r.mre).sum::<f64>() / n,
        bpr: reports.iter().map(|(_, r)| r.bpr).sum::<f64>() / n,
        mae: reports.iter().map(|(_, r)| r.mae).sum::<f64>() / n,
        n_evaluated: reports.iter().map(|(_, r)| r.n_evaluated).sum(),
        d_th,
    };
    if csv {
        println!("mean,{}", mean.csv_line());
    } else {
        println!("frames: {}\n{mean}", reports.len());
    }
    Ok(())
}

/// Writes the frame as image, camera-frame velodyne points with identity
/// extrinsics, calibration, ground truth and road mask.
fn synth(scene: &SyntheticScene, output: &Path) -> Result<()> {
    let f = dataset::generate_synthetic::<f64>(scene)?;
    let b = &f.bundle;
    fs::create_dir_all(output).with_context(|| output.display().to_string())?;
    b.image.save(output.join(frame::IMAGE))?;
    let points = b
        .sparse
        .samples()
        .iter()
        .map(|s| backproject(s, &b.k).map(|p| [p.x as f32, p.y as f32, p.z as f32, 1.0]))
        .collect::<Result<Vec<_>, _>>()?;
    dataset::write_velodyne(&output.join(frame::VELODYNE), &points)?;
    let k = &b.k;
    let calib = KittiCalib {
        p2: [[k.f, 0.0, k.c_x, 0.0], [0.0, k.f, k.c_y, 0.0], [0.0, 0.0, 1.0, 0.0]],
        r0_rect: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        tr_velo_to_cam: [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]],
    };
    fs::write(output.join(frame::CALIB), calib.to_text())?;
    if let Some(gt) = &b.gt {
        dataset::write_depth_png(gt, &output.join(frame::GT))?;
    }
    dataset::write_mask_png(&f.road_mask, scene.width, scene.height, &output.join(frame::ROAD_MASK))?;
    println!("{}x{} frame, {} samples -> {}", scene.width, scene.height, points.len(), output.display());
    Ok(())
}
