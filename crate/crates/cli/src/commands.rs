//! Subcommand definitions and implementations.

use clap::{Args, Parser, Subcommand, ValueEnum};
use pointseg::backproject::{
    finalize, read_fmap, read_vftr, splat_images, vertex_coverage, write_fmap, write_vftr,
};
use pointseg::camera::{format_intrinsics, format_pose, parse_intrinsics, parse_pose, CameraView};
use pointseg::eval::{evaluate_miou, format_predictions, format_report, parse_predictions};
use pointseg::geometry::{parse_ply, write_ply, Mesh};
use pointseg::infer::{argmax_labels, ensure_covered, infer_scene, window_schedule};
use pointseg::math::Aabb;
use pointseg::network::{
    build_training_scene, compute_class_weights, format_config, load_into, parse_config,
    read_pnet, train_toy as run_training, write_pnet, Model, ModelConfig, TrainConfig, TrainScene,
};
use pointseg::posegen::{
    coverage_set, generate_pose_grid, greedy_select_coverage, PoseGridConfig,
};
use pointseg::raycast::{read_amap, render_association, write_amap, Bvh};
use pointseg::sampling::{
    assemble_points, extract_subvolume, sample_random, FeatureSelection, SubVolumeSpec,
};
use pointseg::scene::{generate_scene, label_color, IdSpace, SceneRecipe};
use pointseg::synthfeat::synth_features;
use std::fs;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    /// Bad flag combination or value (exit 1).
    Usage(String),
    /// I/O, parse, or computation failure (exit 2).
    Data(pointseg::Error),
}

impl From<pointseg::Error> for CliError {
    fn from(e: pointseg::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(pointseg::Error::Io(e))
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser)]
#[command(
    name = "pointseg",
    about = "Point-based 3D semantic segmentation pipeline",
    version
)]
pub struct Cli {
    /// Size of the worker thread pool (1 = sequential reference mode).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled room mesh.
    GenScene(GenSceneArgs),
    /// Generate a synthetic camera-pose grid and select a covering subset.
    GenPoses(GenPosesArgs),
    /// Render an association map (and optionally synthetic features).
    Render(RenderArgs),
    /// Splat feature images onto mesh vertices.
    Backproject(BackprojectArgs),
    /// Extract and sample a sub-volume, writing the chosen vertex indices.
    Sample(SampleArgs),
    /// Train the desk-scale model on one or more scenes.
    TrainToy(TrainArgs),
    /// Sliding-window inference over a scene.
    Infer(InferArgs),
    /// Evaluate predictions against ground-truth labels.
    Eval(EvalArgs),
    /// Write a PLY colored by predicted labels.
    ExportPly(ExportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IdSpaceArg {
    Compact,
    Sparse20,
}

impl From<IdSpaceArg> for IdSpace {
    fn from(v: IdSpaceArg) -> Self {
        match v {
            IdSpaceArg::Compact => IdSpace::Compact,
            IdSpaceArg::Sparse20 => IdSpace::Sparse20,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureSetArg {
    /// Coordinates only.
    Xyz,
    /// Coordinates plus vertex normals.
    Xyzn,
    /// Coordinates, normals, and back-projected image features.
    Xyznd,
}

impl From<FeatureSetArg> for FeatureSelection {
    fn from(v: FeatureSetArg) -> Self {
        match v {
            FeatureSetArg::Xyz => FeatureSelection::XYZ,
            FeatureSetArg::Xyzn => FeatureSelection::XYZ_N,
            FeatureSetArg::Xyznd => FeatureSelection::XYZ_N_D,
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Data(pointseg::Error::Io(e)))
}

fn load_mesh(path: &Path) -> Result<Mesh, CliError> {
    Ok(parse_ply(&read_to_string(path)?)?)
}

// ---------------------------------------------------------------- gen-scene

#[derive(Args)]
pub struct GenSceneArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 4.0)]
    pub width: f64,
    #[arg(long, default_value_t = 4.0)]
    pub depth: f64,
    #[arg(long, default_value_t = 2.5)]
    pub height: f64,
    /// Box (furniture) count range, e.g. "1..3".
    #[arg(long, default_value = "1..3")]
    pub boxes: String,
    /// Panel (picture) count range, e.g. "1..3".
    #[arg(long, default_value = "1..3")]
    pub panels: String,
    /// Surface tessellation edge length in meters.
    #[arg(long, default_value_t = 0.25)]
    pub tess: f64,
    /// Keep every rectangle as two triangles (coarse shell).
    #[arg(long)]
    pub no_tess: bool,
    #[arg(long, value_enum, default_value_t = IdSpaceArg::Compact)]
    pub id_space: IdSpaceArg,
}

fn parse_range(text: &str) -> Result<(usize, usize), CliError> {
    let parse_one = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| CliError::Usage(format!("invalid count '{t}' in range")))
    };
    match text.split_once("..") {
        Some((lo, hi)) => {
            let (lo, hi) = (parse_one(lo)?, parse_one(hi)?);
            if lo > hi {
                return Err(CliError::Usage(format!("empty range '{text}'")));
            }
            Ok((lo, hi))
        }
        None => {
            let v = parse_one(text)?;
            Ok((v, v))
        }
    }
}

pub fn gen_scene(args: GenSceneArgs) -> CliResult {
    let recipe = SceneRecipe {
        seed: args.seed,
        width: args.width,
        depth: args.depth,
        height: args.height,
        boxes: parse_range(&args.boxes)?,
        panels: parse_range(&args.panels)?,
        tessellation: (!args.no_tess).then_some(args.tess),
        id_space: args.id_space.into(),
    };
    let (mesh, log) = generate_scene(&recipe)?;
    fs::write(&args.out, write_ply(&mesh))?;
    println!(
        "scene {} vertices {} faces {} objects {}",
        args.out.display(),
        mesh.vertex_count(),
        mesh.face_count(),
        log.objects.len()
    );
    Ok(())
}

// ---------------------------------------------------------------- gen-poses

#[derive(Args)]
pub struct GenPosesArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub grid_w: usize,
    #[arg(long, default_value_t = 10)]
    pub grid_d: usize,
    /// Comma-separated camera heights in meters.
    #[arg(long, default_value = "1.5,2.0,2.5", value_delimiter = ',')]
    pub heights: Vec<f64>,
    /// Comma-separated attitude (pitch) angles in degrees.
    #[arg(long, default_value = "-30,0,30", value_delimiter = ',', allow_hyphen_values = true)]
    pub attitudes: Vec<f64>,
    /// Comma-separated azimuth angles in degrees.
    #[arg(long, default_value = "0,120,240", value_delimiter = ',')]
    pub azimuths: Vec<f64>,
    /// Image resolution as HxW.
    #[arg(long, default_value = "480x640")]
    pub res: String,
    /// Focal length in pixels; defaults to 0.9 x image width.
    #[arg(long)]
    pub focal: Option<f64>,
    /// Minimum hit-pixel fraction to keep a view.
    #[arg(long, default_value_t = 0.25)]
    pub threshold: f64,
    /// Maximum number of selected images.
    #[arg(long, default_value_t = 64)]
    pub budget: usize,
}

fn parse_resolution(text: &str) -> Result<(usize, usize), CliError> {
    let (h, w) = text
        .split_once('x')
        .ok_or_else(|| CliError::Usage(format!("resolution '{text}' is not HxW")))?;
    let parse = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| CliError::Usage(format!("invalid resolution component '{t}'")))
    };
    Ok((parse(h)?, parse(w)?))
}

pub fn gen_poses(args: GenPosesArgs) -> CliResult {
    let mesh = load_mesh(&args.scene)?;
    let bvh = Bvh::build(&mesh)?;
    let (res_h, res_w) = parse_resolution(&args.res)?;
    let focal = args.focal.unwrap_or(res_w as f64 * 0.9);
    let intrinsics = CameraView::default_intrinsics(res_w, res_h, focal);
    let config = PoseGridConfig {
        heights: args.heights,
        grid_w: args.grid_w,
        grid_d: args.grid_d,
        attitudes_deg: args.attitudes,
        azimuths_deg: args.azimuths,
        resolution: (res_h, res_w),
        context_threshold: args.threshold,
        budget: args.budget,
    };
    let poses = generate_pose_grid(&mesh.bounds(), &config, &intrinsics)?;

    fs::create_dir_all(&args.out_dir)?;
    fs::write(
        args.out_dir.join("intrinsics.txt"),
        format_intrinsics(&intrinsics),
    )?;
    for (i, cam) in poses.iter().enumerate() {
        fs::write(
            args.out_dir.join(format!("pose_{i:05}.txt")),
            format_pose(cam.cam_to_world()),
        )?;
    }

    // Hit fractions for the manifest, context filter, greedy selection.
    let maps = pointseg::posegen::render_all(&poses, &mesh, &bvh);
    let fractions: Vec<f64> = maps.iter().map(|m| m.hit_fraction()).collect();
    let eligible: Vec<usize> = (0..poses.len())
        .filter(|&i| fractions[i] >= args.threshold)
        .collect();
    let coverage: Vec<Vec<bool>> = eligible
        .iter()
        .map(|&i| coverage_set(&maps[i], &mesh.faces, mesh.vertex_count()))
        .collect();
    let selected_local = greedy_select_coverage(&coverage, mesh.vertex_count(), args.budget.max(1));
    let selected: Vec<usize> = selected_local.iter().map(|&l| eligible[l]).collect();

    let mut manifest = String::new();
    for (i, fraction) in fractions.iter().enumerate() {
        let flag = if selected.contains(&i) { 1 } else { 0 };
        manifest.push_str(&format!("{i} {fraction:.6} {flag}\n"));
    }
    fs::write(args.out_dir.join("manifest.txt"), manifest)?;
    println!(
        "poses {} eligible {} selected {}",
        poses.len(),
        eligible.len(),
        selected.len()
    );
    Ok(())
}

// ------------------------------------------------------------------- render

#[derive(Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub pose: PathBuf,
    #[arg(long)]
    pub intrinsics: PathBuf,
    /// Image resolution as HxW.
    #[arg(long, default_value = "480x640")]
    pub res: String,
    #[arg(long)]
    pub out_assoc: PathBuf,
    /// Also write a synthetic feature image.
    #[arg(long)]
    pub out_features: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub feature_dim: usize,
    #[arg(long, default_value_t = 4)]
    pub num_classes: usize,
    /// Gaussian noise sigma on synthetic features.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn render(args: RenderArgs) -> CliResult {
    let mesh = load_mesh(&args.scene)?;
    let bvh = Bvh::build(&mesh)?;
    let (res_h, res_w) = parse_resolution(&args.res)?;
    let pose = parse_pose(&read_to_string(&args.pose)?)?;
    let k = parse_intrinsics(&read_to_string(&args.intrinsics)?)?;
    let camera = CameraView::new(k, pose, res_w, res_h)?;
    let map = render_association(&mesh, &bvh, &camera);

    let mut out = BufWriter::new(fs::File::create(&args.out_assoc)?);
    write_amap(&map, &mut out)?;
    out.flush()?;

    if let Some(feat_path) = &args.out_features {
        let feat = synth_features(&mesh, &map, args.feature_dim, args.num_classes, args.noise, args.seed)?;
        let mut out = BufWriter::new(fs::File::create(feat_path)?);
        write_fmap(&feat, &mut out)?;
        out.flush()?;
    }
    println!("rendered {}x{} hit_fraction {:.6}", res_h, res_w, map.hit_fraction());
    Ok(())
}

// -------------------------------------------------------------- backproject

#[derive(Args)]
pub struct BackprojectArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// Association maps; must pair with --features in order.
    #[arg(long = "assoc", required = true)]
    pub assocs: Vec<PathBuf>,
    /// Feature images; must pair with --assoc in order.
    #[arg(long = "features", required = true)]
    pub features: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Force the sequential reference accumulation path.
    #[arg(long)]
    pub sequential: bool,
}

pub fn backproject(args: BackprojectArgs) -> CliResult {
    if args.assocs.len() != args.features.len() {
        return Err(CliError::Usage(format!(
            "{} --assoc flags but {} --features flags",
            args.assocs.len(),
            args.features.len()
        )));
    }
    let mesh = load_mesh(&args.scene)?;
    let mut assoc_maps = Vec::with_capacity(args.assocs.len());
    let mut feature_images = Vec::with_capacity(args.features.len());
    for (a, f) in args.assocs.iter().zip(&args.features) {
        assoc_maps.push(read_amap(&mut BufReader::new(fs::File::open(a)?))?);
        let feat = read_fmap(&mut BufReader::new(fs::File::open(f)?))?;
        feature_images.push(feat);
    }
    // Up-sample any reduced-resolution feature maps to the map resolution.
    for (assoc, feat) in assoc_maps.iter().zip(feature_images.iter_mut()) {
        if feat.height != assoc.height() || feat.width != assoc.width() {
            *feat = feat.upsample_bilinear(assoc.height(), assoc.width());
        }
    }
    let dim = feature_images
        .first()
        .map(|f| f.dim)
        .ok_or_else(|| CliError::Usage("no feature images given".into()))?;
    let pairs: Vec<(&pointseg::raycast::AssociationMap, &pointseg::backproject::FeatureImage)> =
        assoc_maps.iter().zip(feature_images.iter()).collect();
    let acc = splat_images(&pairs, &mesh.faces, mesh.vertex_count(), dim, !args.sequential)?;
    let store = finalize(&acc);
    let mut out = BufWriter::new(fs::File::create(&args.out)?);
    write_vftr(&store, &mut out)?;
    out.flush()?;
    println!("vertex_coverage {:.6}", vertex_coverage(&acc)?);
    Ok(())
}

// ------------------------------------------------------------------- sample

#[derive(Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub center_x: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub center_y: f64,
    #[arg(long, default_value_t = 1.5)]
    pub window: f64,
    /// Number of points to sample (with replacement if needed).
    #[arg(long, default_value_t = 8192)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn sample(args: SampleArgs) -> CliResult {
    let mesh = load_mesh(&args.scene)?;
    let scene = assemble_points(&mesh, None, FeatureSelection::XYZ)?;
    let spec = SubVolumeSpec::new(args.center_x, args.center_y, args.window, args.window);
    let inside = extract_subvolume(&scene, &spec);
    if inside.is_empty() {
        return Err(CliError::Data(pointseg::Error::InvalidConfig(
            "sub-volume contains no points".into(),
        )));
    }
    let sampled = sample_random(&inside, args.points, args.seed);
    let mut text = String::with_capacity(sampled.len() * 6);
    for idx in &sampled {
        text.push_str(&idx.to_string());
        text.push('\n');
    }
    fs::write(&args.out, text)?;
    println!("candidates {} sampled {}", inside.len(), sampled.len());
    Ok(())
}

// ---------------------------------------------------------------- train-toy

#[derive(Args)]
pub struct TrainArgs {
    /// Scene PLY files; pair with --features in order.
    #[arg(long = "scene", required = true)]
    pub scenes: Vec<PathBuf>,
    /// Back-projected vertex features (VFTR); pair with --scene.
    #[arg(long = "features")]
    pub features: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub out_config: PathBuf,
    #[arg(long, default_value_t = 800)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 512)]
    pub subvol_points: usize,
    #[arg(long, default_value_t = 1024)]
    pub scene_points: usize,
    #[arg(long, default_value_t = 4)]
    pub num_classes: usize,
    #[arg(long, value_enum, default_value_t = FeatureSetArg::Xyznd)]
    pub feature_set: FeatureSetArg,
    /// Disable the global scene-context branch.
    #[arg(long)]
    pub no_global: bool,
    #[arg(long, default_value_t = 1.5)]
    pub window: f64,
    /// Training sub-volume candidates drawn per scene.
    #[arg(long, default_value_t = 32)]
    pub subvols_per_scene: usize,
    /// Disable z-rotation augmentation.
    #[arg(long)]
    pub no_augment: bool,
    /// Print a loss line every this many steps.
    #[arg(long, default_value_t = 10)]
    pub log_every: usize,
}

fn load_scene_points(
    scene_path: &Path,
    vftr_path: Option<&PathBuf>,
    selection: FeatureSelection,
) -> Result<pointseg::sampling::PointSet, CliError> {
    let mesh = load_mesh(scene_path)?;
    let store = match vftr_path {
        Some(p) => Some(read_vftr(&mut BufReader::new(fs::File::open(p)?))?),
        None => None,
    };
    Ok(assemble_points(&mesh, store.as_ref(), selection)?)
}

pub fn train_toy(args: TrainArgs) -> CliResult {
    let selection: FeatureSelection = args.feature_set.into();
    if selection.image_features && args.features.len() != args.scenes.len() {
        return Err(CliError::Usage(format!(
            "feature set includes image features: need one --features per --scene ({} vs {})",
            args.features.len(),
            args.scenes.len()
        )));
    }
    let mut train_scenes: Vec<TrainScene> = Vec::new();
    for (i, scene_path) in args.scenes.iter().enumerate() {
        let points = load_scene_points(scene_path, args.features.get(i), selection)?;
        train_scenes.push(build_training_scene(
            points,
            args.window,
            args.subvols_per_scene,
            args.seed ^ (i as u64).wrapping_mul(0x9e3779b97f4a7c15),
        ));
    }

    let input_dim = train_scenes[0].scene.feature_dim;
    let mut config = ModelConfig::toy_sized(
        args.subvol_points,
        args.scene_points,
        args.num_classes,
        input_dim,
    );
    config.use_global = !args.no_global;
    let mut model = Model::new(config.clone(), args.seed)?;

    let label_sets: Vec<&[u16]> = train_scenes
        .iter()
        .flat_map(|s| s.subvolumes.iter())
        .filter_map(|sv| sv.labels.as_deref())
        .collect();
    let class_weights = compute_class_weights(&label_sets, args.num_classes);

    let run = run_training(
        &mut model,
        &train_scenes,
        &class_weights,
        &TrainConfig {
            steps: args.steps,
            seed: args.seed,
            augment: !args.no_augment,
            log_every: args.log_every.max(1),
        },
    )?;
    for (step, loss) in &run.logged {
        println!("step {step} loss {loss:.6}");
    }
    if let Some(last) = run.losses.last() {
        println!("final_loss {last:.6}");
    }

    let mut out = BufWriter::new(fs::File::create(&args.out)?);
    write_pnet(&model.params, &mut out)?;
    out.flush()?;
    fs::write(&args.out_config, format_config(&config))?;
    Ok(())
}

// -------------------------------------------------------------------- infer

#[derive(Args)]
pub struct InferArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.45)]
    pub stride: f64,
    #[arg(long, default_value_t = 1.5)]
    pub window: f64,
    #[arg(long, default_value_t = 0.5)]
    pub pad: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FeatureSetArg::Xyznd)]
    pub feature_set: FeatureSetArg,
}

pub fn infer(args: InferArgs) -> CliResult {
    if args.window <= 0.0 || args.stride <= 0.0 || args.pad < 0.0 {
        return Err(CliError::Usage(
            "window and stride must be positive, pad nonnegative".into(),
        ));
    }
    let config = parse_config(&read_to_string(&args.config)?)?;
    let selection: FeatureSelection = args.feature_set.into();
    let scene = load_scene_points(&args.scene, args.features.as_ref(), selection)?;
    if scene.feature_dim != config.input_feature_dim {
        return Err(CliError::Usage(format!(
            "feature set {} channels but model expects {}; check --feature-set",
            scene.feature_dim, config.input_feature_dim
        )));
    }
    let mut model = Model::new(config, 0)?;
    let loaded = read_pnet(&mut BufReader::new(fs::File::open(&args.params)?))?;
    load_into(&mut model.params, &loaded)?;

    let bounds = Aabb::from_points(scene.positions.iter().copied());
    let schedule = window_schedule(&bounds, args.window, args.stride, args.pad);
    let all: Vec<usize> = (0..scene.len()).collect();
    let scene_sample = scene.gather(&sample_random(&all, model.config.scene_points, args.seed));
    let field = infer_scene(&scene, &scene_sample, &model, &schedule, args.seed)?;
    ensure_covered(&field)?;
    let labels = argmax_labels(&field);
    fs::write(&args.out, format_predictions(&labels))?;
    let covered = field.window_counts.iter().filter(|&&c| c > 0).count();
    println!(
        "windows {} vertices {} covered {}",
        schedule.len(),
        scene.len(),
        covered
    );
    Ok(())
}

// --------------------------------------------------------------------- eval

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth PLY with per-vertex labels.
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, value_enum, default_value_t = IdSpaceArg::Compact)]
    pub id_space: IdSpaceArg,
}

pub fn eval(args: EvalArgs) -> CliResult {
    let predictions = parse_predictions(&read_to_string(&args.pred)?)?;
    let mesh = load_mesh(&args.gt)?;
    let ground_truth = mesh
        .labels
        .clone()
        .ok_or(pointseg::Error::NoAnnotatedVertices)?;
    if predictions.len() != ground_truth.len() {
        return Err(CliError::Data(pointseg::Error::ShapeMismatch(format!(
            "{} predictions for {} vertices",
            predictions.len(),
            ground_truth.len()
        ))));
    }
    let id_space: IdSpace = args.id_space.into();
    let report = evaluate_miou(&predictions, &ground_truth, id_space.num_classes())?;
    print!("{}", format_report(&report, &id_space.class_names()));
    Ok(())
}

// --------------------------------------------------------------- export-ply

#[derive(Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = IdSpaceArg::Compact)]
    pub id_space: IdSpaceArg,
}

pub fn export_ply(args: ExportArgs) -> CliResult {
    let mut mesh = load_mesh(&args.scene)?;
    let predictions = parse_predictions(&read_to_string(&args.pred)?)?;
    if predictions.len() != mesh.vertex_count() {
        return Err(CliError::Data(pointseg::Error::ShapeMismatch(format!(
            "{} predictions for {} vertices",
            predictions.len(),
            mesh.vertex_count()
        ))));
    }
    let id_space: IdSpace = args.id_space.into();
    mesh.colors = Some(
        predictions
            .iter()
            .map(|&l| label_color(id_space, l))
            .collect(),
    );
    mesh.labels = Some(predictions);
    fs::write(&args.out, write_ply(&mesh))?;
    println!("wrote {}", args.out.display());
    Ok(())
}
