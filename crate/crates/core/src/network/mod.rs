//! The unified point-based segmentation model.
//!
//! A sub-volume encoder and a global scene encoder (both stacks of
//! sample/group/MLP/max set-abstraction layers) feed a decoder that fuses
//! interpolated coarse features, level-matched global context and encoder
//! skip connections, ending in a small classification head. All gradients
//! are hand-written reverse mode; see `backward`.

mod adam;
mod backward;
mod forward;
mod layers;
mod loss;
mod params;
mod train;

pub use adam::{learning_rate, AdamState};
pub use backward::backward;
pub use forward::{forward, forward_trace, ForwardTrace, FpsStart};
pub use layers::{
    feature_propagation, feature_propagation_backward, set_abstraction,
    set_abstraction_backward, Matrix, PropagationGrads, SetAbstraction,
};
pub use loss::{softmax_rows, weighted_cross_entropy, weighted_cross_entropy_with_grad};
pub use params::{
    init_affine, load_into, read_pnet, write_pnet, AffineRef, Gradients, ParamSet, Tensor,
};
pub use train::{
    build_training_scene, compute_class_weights, train_toy, TrainConfig, TrainScene, TrainingRun,
};

use crate::error::{Error, Result};
use rand_chacha::ChaCha8Rng;

/// One set-abstraction layer: how many centers to sample, the grouping
/// radius, the points per group, and the shared MLP widths.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    pub n_points: usize,
    pub radius: f64,
    pub group_size: usize,
    pub mlp_dims: Vec<usize>,
}

impl LayerSpec {
    pub fn new(n_points: usize, radius: f64, group_size: usize, mlp_dims: &[usize]) -> Self {
        LayerSpec { n_points, radius, group_size, mlp_dims: mlp_dims.to_vec() }
    }

    pub fn output_width(&self) -> usize {
        *self.mlp_dims.last().expect("mlp_dims nonempty")
    }
}

/// How the global scene encoder feeds the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlobalWiring {
    /// Scene stage 4 feeds decoder level 1, stage 3 level 2, and so on.
    LevelMatched,
    /// Only the deepest scene stage feeds decoder level 1.
    FinalStageOnly,
}

/// Full model hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub subvolume_layers: Vec<LayerSpec>,
    pub scene_layers: Vec<LayerSpec>,
    pub decoder_mlp_width: usize,
    pub num_classes: usize,
    /// Non-coordinate channels per input point (normals + image features).
    pub input_feature_dim: usize,
    pub use_global: bool,
    pub global_wiring: GlobalWiring,
    pub subvolume_points: usize,
    pub scene_points: usize,
}

impl ModelConfig {
    /// Full-scale configuration: 8192-point sub-volumes with stages
    /// (1024, 256, 64, 16), 16384-point scenes with stages
    /// (4096, 1024, 256, 128), 256-wide decoder MLPs, 20 classes, and
    /// 259 input channels (3 normal + 256 image).
    pub fn full_scale() -> Self {
        ModelConfig {
            subvolume_layers: vec![
                LayerSpec::new(1024, 0.1, 32, &[128, 128]),
                LayerSpec::new(256, 0.2, 32, &[256, 256]),
                LayerSpec::new(64, 0.4, 32, &[512, 512]),
                LayerSpec::new(16, 0.8, 32, &[512, 512, 726]),
            ],
            scene_layers: vec![
                LayerSpec::new(4096, 0.4, 32, &[128, 128]),
                LayerSpec::new(1024, 0.8, 32, &[256, 256]),
                LayerSpec::new(256, 1.2, 32, &[512, 512]),
                LayerSpec::new(128, 1.6, 32, &[512, 512, 726]),
            ],
            decoder_mlp_width: 256,
            num_classes: 20,
            input_feature_dim: 259,
            use_global: true,
            global_wiring: GlobalWiring::LevelMatched,
            subvolume_points: 8192,
            scene_points: 16384,
        }
    }

    /// Desk-scale configuration: all widths divided by 16, 128-point
    /// sub-volumes, 256-point scenes.
    pub fn toy(num_classes: usize, input_feature_dim: usize) -> Self {
        Self::toy_sized(128, 256, num_classes, input_feature_dim)
    }

    /// Desk-scale configuration with adjustable point budgets; stage sizes
    /// scale proportionally.
    pub fn toy_sized(
        subvolume_points: usize,
        scene_points: usize,
        num_classes: usize,
        input_feature_dim: usize,
    ) -> Self {
        let sub = |s: usize| (subvolume_points / s).max(1);
        let scn = |s: usize| (scene_points / s).max(1);
        ModelConfig {
            subvolume_layers: vec![
                LayerSpec::new(sub(2), 0.2, 16, &[8, 8]),
                LayerSpec::new(sub(4), 0.4, 16, &[16, 16]),
                LayerSpec::new(sub(8), 0.8, 16, &[32, 32]),
                LayerSpec::new(sub(16), 1.6, 16, &[32, 32, 45]),
            ],
            scene_layers: vec![
                LayerSpec::new(scn(4), 0.4, 16, &[8, 8]),
                LayerSpec::new(scn(8), 0.8, 16, &[16, 16]),
                LayerSpec::new(scn(16), 1.6, 16, &[32, 32]),
                LayerSpec::new(scn(32), 2.4, 16, &[32, 32, 45]),
            ],
            decoder_mlp_width: 16,
            num_classes,
            input_feature_dim,
            use_global: true,
            global_wiring: GlobalWiring::LevelMatched,
            subvolume_points,
            scene_points,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.subvolume_layers.len() != 4 || self.scene_layers.len() != 4 {
            return Err(Error::InvalidConfig("expected 4 encoder layers per branch".into()));
        }
        if self.num_classes == 0 {
            return Err(Error::InvalidConfig("num_classes must be positive".into()));
        }
        let check_stack = |layers: &[LayerSpec], input: usize, what: &str| -> Result<()> {
            let mut prev = input;
            for (i, l) in layers.iter().enumerate() {
                if l.n_points == 0 || l.n_points > prev {
                    return Err(Error::InvalidConfig(format!(
                        "{what} layer {} samples {} of {} points",
                        i + 1,
                        l.n_points,
                        prev
                    )));
                }
                if l.radius <= 0.0 || l.group_size == 0 || l.mlp_dims.is_empty() {
                    return Err(Error::InvalidConfig(format!("{what} layer {} malformed", i + 1)));
                }
                prev = l.n_points;
            }
            Ok(())
        };
        check_stack(&self.subvolume_layers, self.subvolume_points, "sub-volume")?;
        check_stack(&self.scene_layers, self.scene_points, "scene")?;
        if self.decoder_mlp_width == 0 {
            return Err(Error::InvalidConfig("decoder width must be positive".into()));
        }
        Ok(())
    }

    /// Width of the decoder concat at level `i` (0-based).
    fn decoder_input_width(&self, level: usize) -> usize {
        let sub_w: Vec<usize> = self.subvolume_layers.iter().map(|l| l.output_width()).collect();
        let scene_w: Vec<usize> = self.scene_layers.iter().map(|l| l.output_width()).collect();
        let prev = if level == 0 { sub_w[3] } else { self.decoder_mlp_width };
        let skip = if level < 3 { sub_w[2 - level] } else { self.input_feature_dim };
        let global = if self.use_global {
            match self.global_wiring {
                GlobalWiring::LevelMatched => scene_w[3 - level],
                GlobalWiring::FinalStageOnly => {
                    if level == 0 {
                        scene_w[3]
                    } else {
                        0
                    }
                }
            }
        } else {
            0
        };
        prev + global + skip
    }
}

/// Model = config + parameter tensors + affine handles.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub params: ParamSet,
    pub(crate) sub_mlps: Vec<Vec<AffineRef>>,
    pub(crate) scene_mlps: Vec<Vec<AffineRef>>,
    pub(crate) dec_mlps: Vec<Vec<AffineRef>>,
    pub(crate) head_mlps: Vec<AffineRef>,
}

impl Model {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Model> {
        use rand::SeedableRng;
        config.validate()?;
        let mut params = ParamSet::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let build_encoder = |params: &mut ParamSet,
                             rng: &mut ChaCha8Rng,
                             layers: &[LayerSpec],
                             input_dim: usize,
                             prefix: &str| {
            let mut mlps = Vec::new();
            let mut prev_width = input_dim;
            for (l, spec) in layers.iter().enumerate() {
                let mut layer_mlps = Vec::new();
                let mut in_dim = 3 + prev_width;
                for (j, &out_dim) in spec.mlp_dims.iter().enumerate() {
                    layer_mlps.push(init_affine(
                        params,
                        rng,
                        &format!("{prefix}.l{l}.mlp{j}"),
                        in_dim,
                        out_dim,
                    ));
                    in_dim = out_dim;
                }
                prev_width = spec.output_width();
                mlps.push(layer_mlps);
            }
            mlps
        };

        let sub_mlps = build_encoder(
            &mut params,
            &mut rng,
            &config.subvolume_layers,
            config.input_feature_dim,
            "sub",
        );
        let scene_mlps = if config.use_global {
            build_encoder(
                &mut params,
                &mut rng,
                &config.scene_layers,
                config.input_feature_dim,
                "scene",
            )
        } else {
            Vec::new()
        };

        let mut dec_mlps = Vec::new();
        for level in 0..4 {
            let mut in_dim = config.decoder_input_width(level);
            let mut level_mlps = Vec::new();
            for j in 0..2 {
                level_mlps.push(init_affine(
                    &mut params,
                    &mut rng,
                    &format!("dec.l{level}.mlp{j}"),
                    in_dim,
                    config.decoder_mlp_width,
                ));
                in_dim = config.decoder_mlp_width;
            }
            dec_mlps.push(level_mlps);
        }

        let head_mlps = vec![
            init_affine(
                &mut params,
                &mut rng,
                "head.mlp0",
                config.decoder_mlp_width,
                config.decoder_mlp_width,
            ),
            init_affine(
                &mut params,
                &mut rng,
                "head.mlp1",
                config.decoder_mlp_width,
                config.num_classes,
            ),
        ];

        Ok(Model { config, params, sub_mlps, scene_mlps, dec_mlps, head_mlps })
    }
}

/// Serialize a config as a key-value text file.
pub fn format_config(config: &ModelConfig) -> String {
    let mut out = String::new();
    let layer_line = |spec: &LayerSpec| {
        let dims: Vec<String> = spec.mlp_dims.iter().map(|d| d.to_string()).collect();
        format!("{} {} {} {}", spec.n_points, spec.radius, spec.group_size, dims.join(" "))
    };
    out.push_str(&format!("num_classes = {}\n", config.num_classes));
    out.push_str(&format!("input_feature_dim = {}\n", config.input_feature_dim));
    out.push_str(&format!("decoder_mlp_width = {}\n", config.decoder_mlp_width));
    out.push_str(&format!("use_global = {}\n", config.use_global));
    out.push_str(&format!(
        "global_wiring = {}\n",
        match config.global_wiring {
            GlobalWiring::LevelMatched => "level_matched",
            GlobalWiring::FinalStageOnly => "final_stage_only",
        }
    ));
    out.push_str(&format!("subvolume_points = {}\n", config.subvolume_points));
    out.push_str(&format!("scene_points = {}\n", config.scene_points));
    for (i, l) in config.subvolume_layers.iter().enumerate() {
        out.push_str(&format!("subvolume_layer_{} = {}\n", i + 1, layer_line(l)));
    }
    for (i, l) in config.scene_layers.iter().enumerate() {
        out.push_str(&format!("scene_layer_{} = {}\n", i + 1, layer_line(l)));
    }
    out
}

/// Parse the key-value config format written by [`format_config`].
pub fn parse_config(text: &str) -> Result<ModelConfig> {
    let mut config = ModelConfig::full_scale();
    let parse_layer = |value: &str| -> Result<LayerSpec> {
        let tokens: Vec<&str> = value.split_whitespace().collect();
        if tokens.len() < 4 {
            return Err(Error::InvalidConfig(format!("layer spec too short: '{value}'")));
        }
        let n_points = tokens[0]
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad point count '{}'", tokens[0])))?;
        let radius = tokens[1]
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad radius '{}'", tokens[1])))?;
        let group_size = tokens[2]
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad group size '{}'", tokens[2])))?;
        let mlp_dims: Vec<usize> = tokens[3..]
            .iter()
            .map(|t| t.parse().map_err(|_| Error::InvalidConfig(format!("bad MLP width '{t}'"))))
            .collect::<Result<_>>()?;
        Ok(LayerSpec { n_points, radius, group_size, mlp_dims })
    };
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", ln + 1)))?;
        let key = key.trim();
        let value = value.trim();
        let parse_usize = || -> Result<usize> {
            value
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad integer '{value}' for {key}")))
        };
        match key {
            "num_classes" => config.num_classes = parse_usize()?,
            "input_feature_dim" => config.input_feature_dim = parse_usize()?,
            "decoder_mlp_width" => config.decoder_mlp_width = parse_usize()?,
            "subvolume_points" => config.subvolume_points = parse_usize()?,
            "scene_points" => config.scene_points = parse_usize()?,
            "use_global" => {
                config.use_global = value
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad bool '{value}'")))?
            }
            "global_wiring" => {
                config.global_wiring = match value {
                    "level_matched" => GlobalWiring::LevelMatched,
                    "final_stage_only" => GlobalWiring::FinalStageOnly,
                    _ => return Err(Error::InvalidConfig(format!("unknown wiring '{value}'"))),
                }
            }
            _ if key.starts_with("subvolume_layer_") || key.starts_with("scene_layer_") => {
                let idx: usize = key
                    .rsplit('_')
                    .next()
                    .unwrap()
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad layer index in '{key}'")))?;
                if !(1..=4).contains(&idx) {
                    return Err(Error::InvalidConfig(format!("layer index out of range in '{key}'")));
                }
                let spec = parse_layer(value)?;
                if key.starts_with("subvolume") {
                    config.subvolume_layers[idx - 1] = spec;
                } else {
                    config.scene_layers[idx - 1] = spec;
                }
            }
            _ => return Err(Error::InvalidConfig(format!("unknown config key '{key}'"))),
        }
    }
    config.validate()?;
    Ok(config)
}
