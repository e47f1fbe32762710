//! Subcommand arguments and handlers. Every handler writes its outputs
//! atomically and finishes with a run manifest next to the primary output.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use segcodec_core::{
    apply_coarse_mask, build_palette, degrade, encode, generate_scene, idmap_to_masks,
    leaves_to_entities, miou_recall, pdm_decode, sample_coarse_mask, standard_suite,
    suite_profile, BBox, Branch, CoarseMask, CoarseMaskParams, CoarseSource, CollisionPolicy,
    DecodeConfig, DecodeMode, DegradationProfile, EntityMaskSet, FeatureScaling, FeatureSpace,
    MatchPair, SceneSpec, DEFAULT_RECALL_THRESHOLD, SUITE_VERSION,
};
use segcodec_core::pdm::NodeSummary;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::{
    decode_colormap, decode_idmap, decode_mask, encode_colormap, encode_idmap, encode_mask, to_json,
};
use crate::manifest::Run;
use crate::rle::RleDocument;
use crate::sweep::{render_table, run_sweep, SweepPlan};

fn load_masks(run: &mut Run, path: &Path) -> CliResult<EntityMaskSet> {
    let bytes = run.read(path)?;
    Ok(idmap_to_masks(&decode_idmap(&bytes).map_err(|e| e.context(path.display()))?))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EncodeArgs {
    /// Entity idmap (16-bit grayscale PNG, 0 = background).
    #[arg(long)]
    pub masks: PathBuf,
    /// Palette grid size b; b*b must not exceed 124.
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    /// share | nearest-free
    #[arg(long, default_value = "share")]
    pub collision: CollisionPolicy,
    /// Colormap PNG to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Encode report JSON to write.
    #[arg(long)]
    pub report: PathBuf,
    /// Palette JSON to write; defaults to `<out>.palette.json`.
    #[arg(long)]
    pub palette: Option<PathBuf>,
}

pub fn run_encode(args: &EncodeArgs) -> CliResult<()> {
    let mut run = Run::start("encode");
    let palette = build_palette(args.grid)?;
    let masks = load_masks(&mut run, &args.masks)?;
    let (colormap, report) = encode(&masks, &palette, args.collision)?;
    run.write(&args.out, &encode_colormap(&colormap)?)?;
    run.write(&args.report, &to_json(&report)?)?;
    let palette_path = args
        .palette
        .clone()
        .unwrap_or_else(|| args.out.with_extension("palette.json"));
    run.write(&palette_path, &to_json(&palette)?)?;
    run.finish(args, None, &args.out)?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecodeArgs {
    /// Colormap PNG (8-bit RGB).
    #[arg(long)]
    pub colormap: PathBuf,
    /// Stop splitting once the average squared distance to the mean is below this.
    #[arg(long, default_value_t = 10.0)]
    pub delta: f64,
    /// region drops near-black clusters; entity keeps them.
    #[arg(long, default_value = "region")]
    pub mode: DecodeMode,
    /// Only pixels set in this mask are decoded.
    #[arg(long)]
    pub roi: Option<PathBuf>,
    /// native | reduced | unit
    #[arg(long, default_value = "native")]
    pub scaling: FeatureScaling,
    /// rgb | lab | rgb+lab
    #[arg(long, default_value = "rgb+lab")]
    pub features: FeatureSpace,
    #[arg(long, default_value_t = 8)]
    pub max_depth: usize,
    /// Smallest cluster kept as an entity; defaults to 50 px scaled from a 512x512 canvas.
    #[arg(long)]
    pub min_cluster: Option<usize>,
    #[arg(long, default_value_t = 30)]
    pub kmeans_iters: usize,
    /// Idmap PNG to write; entities are numbered by descending size.
    #[arg(long)]
    pub out: PathBuf,
    /// Write the cluster tree as JSON.
    #[arg(long)]
    pub dump_tree: Option<PathBuf>,
}

impl DecodeArgs {
    pub fn config(&self, height: usize, width: usize) -> DecodeConfig {
        let cfg = DecodeConfig {
            delta: self.delta,
            max_depth: self.max_depth,
            kmeans_max_iters: self.kmeans_iters,
            mode: self.mode,
            features: self.features,
            scaling: self.scaling,
            ..DecodeConfig::default()
        };
        match self.min_cluster {
            Some(n) => DecodeConfig {
                min_cluster_pixels: n,
                ..cfg
            },
            None => cfg.with_min_cluster_for(height, width),
        }
    }
}

#[derive(Serialize)]
struct DumpNode {
    #[serde(flatten)]
    node: NodeSummary,
    children: Option<[usize; 2]>,
    /// Canvas indices (row * width + col), leaves only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pixels: Option<Vec<u32>>,
}

#[derive(Serialize)]
struct TreeDump {
    height: usize,
    width: usize,
    delta: f64,
    nodes: Vec<DumpNode>,
}

pub fn run_decode(args: &DecodeArgs) -> CliResult<()> {
    let mut run = Run::start("decode");
    let colormap = decode_colormap(&run.read(&args.colormap)?)?;
    let roi = match &args.roi {
        Some(p) => Some(decode_mask(&run.read(p)?).map_err(|e| e.context(p.display()))?),
        None => None,
    };
    let (h, w) = colormap.dims();
    let cfg = args.config(h, w);
    let decoded = pdm_decode(&colormap, roi.as_ref(), &cfg)?;
    let entities = leaves_to_entities(&decoded.leaves, h, w, &cfg, None);
    if entities.len() > u16::MAX as usize {
        return Err(CliError::Domain(format!(
            "{} entities do not fit a 16-bit idmap",
            entities.len()
        )));
    }
    run.write(&args.out, &encode_idmap(&entities.to_idmap())?)?;
    if let Some(path) = &args.dump_tree {
        let nodes = decoded
            .tree
            .summary()
            .into_iter()
            .zip(&decoded.tree.nodes)
            .map(|(node, full)| DumpNode {
                node,
                children: full.children,
                pixels: full.is_leaf().then(|| full.pixels.clone()),
            })
            .collect();
        let dump = TreeDump {
            height: h,
            width: w,
            delta: cfg.delta,
            nodes,
        };
        run.write(path, &to_json(&dump)?)?;
    }
    run.finish(args, None, &args.out)?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DegradeArgs {
    #[arg(long)]
    pub colormap: PathBuf,
    /// Suite profile: clean, light, medium, heavy or confuser.
    #[arg(long, default_value = "medium")]
    pub profile: String,
    /// Profile JSON overriding --profile.
    #[arg(long)]
    pub profile_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_degrade(args: &DegradeArgs) -> CliResult<()> {
    let mut run = Run::start("degrade");
    let profile = match &args.profile_file {
        Some(p) => {
            let bytes = run.read(p)?;
            serde_json::from_slice::<DegradationProfile>(&bytes)
                .map_err(|e| CliError::BadInput(format!("{}: {e}", p.display())))?
        }
        None => suite_profile(&args.profile).ok_or_else(|| {
            CliError::BadInput(format!("unknown profile {:?}", args.profile))
        })?,
    }
    .with_seed(args.seed);
    let colormap = decode_colormap(&run.read(&args.colormap)?)?;
    let noisy = degrade(&colormap, &profile)?;
    run.write(&args.out, &encode_colormap(&noisy)?)?;
    #[derive(Serialize)]
    struct Config<'a> {
        #[serde(flatten)]
        args: &'a DegradeArgs,
        resolved_profile: &'a DegradationProfile,
    }
    run.finish(
        &Config {
            args,
            resolved_profile: &profile,
        },
        Some(args.seed),
        &args.out,
    )?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// Directory of idmap PNGs; every `*.png` is a scene.
    #[arg(long)]
    pub masks_dir: PathBuf,
    #[arg(long, default_value = SUITE_VERSION)]
    pub suite: String,
    /// Restrict to these suite profiles.
    #[arg(long, value_delimiter = ',')]
    pub profiles: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub deltas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "rgb,lab,rgb+lab")]
    pub features: Vec<FeatureSpace>,
    #[arg(long, default_value = "native")]
    pub scaling: FeatureScaling,
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    #[arg(long, default_value_t = 8)]
    pub max_depth: usize,
    #[arg(long, default_value_t = DEFAULT_RECALL_THRESHOLD)]
    pub recall_thresh: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report JSON; the text table goes next to it as `.txt`.
    #[arg(long)]
    pub out: PathBuf,
}

/// Worker count from `SEGCODEC_THREADS`, if set to a positive integer.
pub fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var("SEGCODEC_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::BadInput(format!(
                "SEGCODEC_THREADS must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

pub fn run_sweep_cmd(args: &SweepArgs) -> CliResult<()> {
    let mut run = Run::start("sweep");
    if args.suite != SUITE_VERSION {
        return Err(CliError::BadInput(format!(
            "unknown suite {:?}; available: {SUITE_VERSION}",
            args.suite
        )));
    }
    if args.deltas.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(CliError::BadInput("deltas must be finite and non-negative".into()));
    }
    build_palette(args.grid)?;
    let mut profiles = standard_suite();
    if let Some(names) = &args.profiles {
        for n in names {
            if suite_profile(n).is_none() {
                return Err(CliError::BadInput(format!("unknown profile {n:?}")));
            }
        }
        profiles.retain(|p| names.contains(&p.name));
    }

    let entries = fs::read_dir(&args.masks_dir)
        .map_err(|e| CliError::BadInput(format!("cannot list {}: {e}", args.masks_dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::BadInput(format!(
            "no PNG files in {}",
            args.masks_dir.display()
        )));
    }
    let scenes: Vec<(String, CliResult<EntityMaskSet>)> = paths
        .iter()
        .map(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let loaded = run
                .read(p)
                .and_then(|bytes| decode_idmap(&bytes))
                .map(|m| idmap_to_masks(&m));
            (name, loaded)
        })
        .collect();

    let plan = SweepPlan {
        suite: args.suite.clone(),
        profiles,
        deltas: args.deltas.clone(),
        features: args.features.clone(),
        scaling: args.scaling,
        grid_size: args.grid,
        max_depth: args.max_depth,
        recall_threshold: args.recall_thresh,
        seed: args.seed,
    };
    let report = match thread_cap()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?
            .install(|| run_sweep(&scenes, &plan)),
        None => run_sweep(&scenes, &plan),
    };
    for f in &report.failures {
        eprintln!("segcodec: {}: {}", f.scene, f.error);
    }
    let table = render_table(&report, &plan);
    print!("{table}");
    run.write(&args.out, &to_json(&report)?)?;
    run.write(&args.out.with_extension("txt"), table.as_bytes())?;
    run.finish(args, Some(args.seed), &args.out)?;
    if report.failures.len() == scenes.len() {
        let code = report.failures[0].exit_code;
        let msg = format!("all {} scenes failed", scenes.len());
        return Err(match code {
            3 => CliError::Domain(msg),
            4 => CliError::Internal(msg),
            _ => CliError::BadInput(msg),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchArg {
    Curve,
    Bbox,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoarseMaskArgs {
    /// Idmap whose entities the mask must cover.
    #[arg(long, required_unless_present = "bbox", conflicts_with = "bbox")]
    pub masks: Option<PathBuf>,
    /// Box `x0,y0,x1,y1` (exclusive max) instead of an idmap; needs --height and --width.
    #[arg(long, value_delimiter = ',', requires_all = ["height", "width"])]
    pub bbox: Option<Vec<usize>>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    /// Probability of the curve branch.
    #[arg(long, default_value_t = 0.5)]
    pub pct: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub jitter: i64,
    #[arg(long, default_value_t = 1.1)]
    pub extend_min: f64,
    #[arg(long, default_value_t = 1.3)]
    pub extend_max: f64,
    #[arg(long, default_value_t = 18)]
    pub samples: usize,
    /// Force a branch instead of drawing it.
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    /// Mask PNG (0 / 255).
    #[arg(long)]
    pub out: PathBuf,
    /// Write branch, boxes and polygon vertices as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Serialize)]
struct CoarseReport {
    branch: Branch,
    bbox: BBox,
    extended: BBox,
    vertices: Vec<(f64, f64)>,
    pixels: usize,
}

pub fn run_coarse_mask(args: &CoarseMaskArgs) -> CliResult<()> {
    let mut run = Run::start("coarse-mask");
    let params = CoarseMaskParams {
        arbitrary_mask_percent: args.pct,
        extend_ratio_range: (args.extend_min, args.extend_max),
        jitter: args.jitter,
        samples_per_curve: args.samples,
        rng_seed: args.seed,
    };
    let branch = args.branch.map(|b| match b {
        BranchArg::Curve => Branch::Curve,
        BranchArg::Bbox => Branch::BBox,
    });
    let masks;
    let source = match (&args.masks, &args.bbox) {
        (Some(path), _) => {
            masks = load_masks(&mut run, path)?;
            CoarseSource::Masks(&masks)
        }
        (None, Some(b)) if b.len() != 4 => {
            return Err(CliError::BadInput(format!("--bbox needs 4 values, got {}", b.len())))
        }
        (None, Some(b)) => CoarseSource::BBox {
            bbox: BBox::new(b[0], b[1], b[2], b[3]),
            height: args.height.unwrap_or(0),
            width: args.width.unwrap_or(0),
        },
        (None, None) => return Err(CliError::BadInput("need --masks or --bbox".into())),
    };
    let sample = sample_coarse_mask(source, &params, branch)?;
    run.write(&args.out, &encode_mask(sample.mask.mask())?)?;
    if let Some(path) = &args.report {
        let report = CoarseReport {
            branch: sample.branch,
            bbox: sample.bbox,
            extended: sample.extended,
            vertices: sample.vertices.clone(),
            pixels: sample.mask.mask().count(),
        };
        run.write(path, &to_json(&report)?)?;
    }
    run.finish(args, Some(args.seed), &args.out)?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ApplyMaskArgs {
    /// RGB image PNG.
    #[arg(long)]
    pub image: PathBuf,
    /// Mask PNG; nonzero pixels are blacked out.
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_apply_mask(args: &ApplyMaskArgs) -> CliResult<()> {
    let mut run = Run::start("apply-mask");
    let image = decode_colormap(&run.read(&args.image)?).map_err(|e| e.context(args.image.display()))?;
    let mask = decode_mask(&run.read(&args.mask)?).map_err(|e| e.context(args.mask.display()))?;
    let out = apply_coarse_mask(&image, &CoarseMask::new(mask))?;
    run.write(&args.out, &encode_colormap(&out)?)?;
    run.finish(args, None, &args.out)?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RECALL_THRESHOLD)]
    pub recall_thresh: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Context copied into the report.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub feature_space: Option<FeatureSpace>,
}

/// Metrics JSON written by `eval`. Entity indices are idmap ids minus one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub miou: f64,
    pub recall: f64,
    pub recall_threshold: f64,
    pub per_entity: Vec<f64>,
    pub pairs: Vec<MatchPair>,
    pub unmatched_gt: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
    pub suite: Option<String>,
    pub profile: Option<String>,
    pub delta: Option<f64>,
    pub feature_space: Option<FeatureSpace>,
}

pub fn run_eval(args: &EvalArgs) -> CliResult<()> {
    let mut run = Run::start("eval");
    let gt = load_masks(&mut run, &args.gt)?;
    let pred = load_masks(&mut run, &args.pred)?;
    let m = miou_recall(&gt, &pred, args.recall_thresh)?;
    let report = EvalReport {
        miou: m.miou,
        recall: m.recall,
        recall_threshold: m.recall_threshold,
        per_entity: m.per_entity,
        pairs: m.matching.pairs,
        unmatched_gt: m.matching.unmatched_gt,
        unmatched_pred: m.matching.unmatched_pred,
        suite: args.suite.clone(),
        profile: args.profile.clone(),
        delta: args.delta,
        feature_space: args.feature_space,
    };
    run.write(&args.out, &to_json(&report)?)?;
    run.finish(args, None, &args.out)?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// Directory for `scene_NNN.png` idmaps; created if missing.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Square canvas side in pixels.
    #[arg(long, default_value_t = 512)]
    pub size: usize,
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    #[arg(long, default_value_t = 1)]
    pub min_entities: usize,
    #[arg(long, default_value_t = 10)]
    pub max_entities: usize,
    #[arg(long, default_value_t = 100)]
    pub min_entity_pixels: usize,
    /// Generate entities in pairs sharing one shape.
    #[arg(long)]
    pub duplicates: bool,
}

pub fn run_synth(args: &SynthArgs) -> CliResult<()> {
    let mut run = Run::start("synth");
    let spec = SceneSpec {
        height: args.size,
        width: args.size,
        grid_size: args.grid,
        min_entities: args.min_entities,
        max_entities: args.max_entities,
        min_entity_pixels: args.min_entity_pixels,
        duplicates: args.duplicates,
        ..SceneSpec::default()
    };
    fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", args.out_dir.display())))?;
    let width = args.count.saturating_sub(1).to_string().len().max(3);
    for i in 0..args.count {
        let scene = generate_scene(&spec, args.seed.wrapping_add(i as u64))?;
        let path = args.out_dir.join(format!("scene_{i:0width$}.png"));
        run.write(&path, &encode_idmap(&scene.to_idmap())?)?;
    }
    run.finish(args, Some(args.seed), &args.out_dir.join("synth.json"))?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RleExportArgs {
    /// Idmap PNG.
    #[arg(long)]
    pub masks: PathBuf,
    /// Use the compact string form for counts.
    #[arg(long)]
    pub compact: bool,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_rle_export(args: &RleExportArgs) -> CliResult<()> {
    let mut run = Run::start("rle-export");
    let masks = load_masks(&mut run, &args.masks)?;
    run.write(&args.out, &to_json(&RleDocument::from_masks(&masks, args.compact))?)?;
    run.finish(args, None, &args.out)?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RleImportArgs {
    /// RLE JSON document.
    #[arg(long)]
    pub rle: PathBuf,
    /// Idmap PNG; annotation order by id gives ids 1, 2, ...
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_rle_import(args: &RleImportArgs) -> CliResult<()> {
    let mut run = Run::start("rle-import");
    let bytes = run.read(&args.rle)?;
    let doc: RleDocument = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::BadInput(format!("{}: {e}", args.rle.display())))?;
    let masks = doc.to_masks()?;
    run.write(&args.out, &encode_idmap(&masks.to_idmap())?)?;
    run.finish(args, None, &args.out)?;
    Ok(())
}
