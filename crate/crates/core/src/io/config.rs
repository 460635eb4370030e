use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::data::{load_dataset, load_unit_dataset};
use super::IoError;
use crate::geometry::{Grid, KarcherOptions};
use crate::samplers::{
    Bandwidth, BaseMeasure, CcvConfig, Dataset, DcvConfig, DpConfig, DpgmmConfig, McmcControl,
    ModelConfig, ModelKind, Transform,
};
use crate::sweep::{
    default_band_values, find_preset, CurveMode, SeedScheme, SweepSpec, DEFAULT_BAND_LEVEL,
    DEFAULT_REPLICATES,
};

/// How observations are mapped onto `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Rescaling {
    /// Affine map of the extremes onto `[0.05, 0.95]`.
    #[default]
    Envelope,
    /// Data already on `[0, 1]`, used as is.
    Identity,
}

impl Rescaling {
    pub fn name(&self) -> &'static str {
        match self {
            Rescaling::Envelope => "envelope",
            Rescaling::Identity => "identity",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDataset {
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rescale: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDp {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// `uniform` or `beta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    /// Absent means the rule-of-thumb bandwidth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDpgmm {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

/// Shared by the `[ccv]` and `[dcv]` blocks; `phi` and `aux_m` only apply to
/// the latter.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMixture {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu00: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux_m: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    /// `model.parameter`, e.g. `dpgmm.alpha`; replaces `parameter` and
    /// `values`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_components: Option<usize>,
    /// `hybrid` or `common`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_scheme: Option<String>,
    /// `first` or `mean`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMcmc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thin: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGeometry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub densities: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<bool>,
}

/// The config file as written. Every block except `[dataset]`, `[sweep]` and
/// the model block is optional, as are most keys.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub dataset: RawDataset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dp: Option<RawDp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dpgmm: Option<RawDpgmm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ccv: Option<RawMixture>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dcv: Option<RawMixture>,
    #[serde(default)]
    pub sweep: RawSweep,
    #[serde(default)]
    pub mcmc: RawMcmc,
    #[serde(default)]
    pub geometry: RawGeometry,
    #[serde(default)]
    pub output: RawOutput,
    /// Run record of a manifest; ignored when the manifest is reloaded.
    #[serde(default, skip_serializing)]
    pub run: Option<toml::Value>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        toml::from_str(text).map_err(|e| {
            let msg = e.to_string();
            if msg.contains("unknown field") {
                IoError::BadParam(msg)
            } else {
                IoError::ConfigSyntax(msg)
            }
        })
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Replaces the sweep grid with a preset.
    pub fn set_preset(&mut self, name: &str) {
        self.sweep.preset = Some(name.to_string());
        self.sweep.parameter = None;
        self.sweep.values = None;
        self.sweep.band_values = None;
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputOptions {
    pub dir: Option<PathBuf>,
    pub densities: bool,
    pub trace: bool,
}

/// A fully resolved experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dataset_path: PathBuf,
    pub transform: Transform,
    pub rescaling: Rescaling,
    pub sweep: SweepSpec,
    pub output: OutputOptions,
}

fn bad(msg: impl Into<String>) -> IoError {
    IoError::BadValue(msg.into())
}

fn parse_transform(s: Option<&str>) -> Result<Transform, IoError> {
    match s.unwrap_or("none") {
        "none" => Ok(Transform::None),
        "log" => Ok(Transform::Log),
        t => Err(bad(format!("unknown transform `{t}` (none | log)"))),
    }
}

fn parse_rescaling(s: Option<&str>) -> Result<Rescaling, IoError> {
    match s.unwrap_or("envelope") {
        "envelope" => Ok(Rescaling::Envelope),
        "identity" => Ok(Rescaling::Identity),
        t => Err(bad(format!("unknown rescale `{t}` (envelope | identity)"))),
    }
}

fn resolve_path(base: &Path, p: &Path) -> PathBuf {
    let joined = if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    };
    std::fs::canonicalize(&joined).unwrap_or(joined)
}

fn model_block(raw: &RawConfig) -> Result<ModelKind, IoError> {
    let present: Vec<ModelKind> = [
        (ModelKind::Dp, raw.dp.is_some()),
        (ModelKind::Dpgmm, raw.dpgmm.is_some()),
        (ModelKind::Ccv, raw.ccv.is_some()),
        (ModelKind::Dcv, raw.dcv.is_some()),
    ]
    .into_iter()
    .filter_map(|(k, p)| p.then_some(k))
    .collect();
    match present.as_slice() {
        [k] => Ok(*k),
        [] => Err(IoError::BadModel(
            "no model block; add one of [dp], [dpgmm], [ccv], [dcv]".into(),
        )),
        _ => Err(IoError::BadModel(format!(
            "exactly one model block allowed, found {}",
            present
                .iter()
                .map(|k| k.tag())
                .collect::<Vec<_>>()
                .join(", ")
        ))),
    }
}

fn mixture_config(m: &RawMixture, data: &Dataset) -> CcvConfig {
    let b = CcvConfig::baseline_for(data);
    CcvConfig {
        a0: m.a0.unwrap_or(b.a0),
        a1: m.a1.unwrap_or(b.a1),
        mu00: m.mu00.unwrap_or(b.mu00),
        lambda0: m.lambda0.unwrap_or(b.lambda0),
        s0: m.s0.unwrap_or(b.s0),
        s1: m.s1.unwrap_or(b.s1),
        eta: m.eta.unwrap_or(b.eta),
        gamma: m.gamma.unwrap_or(b.gamma),
        fixed_a: m.fixed_a,
    }
}

fn model_config(raw: &RawConfig, kind: ModelKind, data: &Dataset) -> Result<ModelConfig, IoError> {
    Ok(match kind {
        ModelKind::Dp => {
            let c = raw.dp.as_ref().expect("checked by model_block");
            let d = DpConfig::default();
            let g0 = match c.g0.as_deref().unwrap_or("uniform") {
                "uniform" => {
                    if c.g0_a.is_some() || c.g0_b.is_some() {
                        return Err(IoError::BadParam("g0_a and g0_b need g0 = \"beta\"".into()));
                    }
                    BaseMeasure::Uniform
                }
                "beta" => BaseMeasure::Beta {
                    a: c.g0_a.unwrap_or(1.0),
                    b: c.g0_b.unwrap_or(1.0),
                },
                g => return Err(bad(format!("unknown g0 `{g}` (uniform | beta)"))),
            };
            ModelConfig::Dp(DpConfig {
                alpha: c.alpha.unwrap_or(d.alpha),
                g0,
                truncation: c.truncation.unwrap_or(d.truncation),
                bandwidth: c.bandwidth.map_or(Bandwidth::Auto, Bandwidth::Fixed),
            })
        }
        ModelKind::Dpgmm => {
            let c = raw.dpgmm.as_ref().expect("checked by model_block");
            let d = DpgmmConfig::default();
            ModelConfig::Dpgmm(DpgmmConfig {
                alpha: c.alpha.unwrap_or(d.alpha),
                m: c.m.unwrap_or(d.m),
                r: c.r.unwrap_or(d.r),
                nu: c.nu.unwrap_or(d.nu),
                s: c.s.unwrap_or(d.s),
            })
        }
        ModelKind::Ccv => {
            let c = raw.ccv.as_ref().expect("checked by model_block");
            if c.phi.is_some() || c.aux_m.is_some() {
                return Err(IoError::BadParam("phi and aux_m belong in [dcv]".into()));
            }
            ModelConfig::Ccv(mixture_config(c, data))
        }
        ModelKind::Dcv => {
            let c = raw.dcv.as_ref().expect("checked by model_block");
            let d = DcvConfig::baseline_for(data);
            ModelConfig::Dcv(DcvConfig {
                ccv: mixture_config(c, data),
                phi: c.phi.unwrap_or(d.phi),
                aux_m: c.aux_m.unwrap_or(d.aux_m),
            })
        }
    })
}

impl ExperimentConfig {
    /// Reads and resolves a config file. Relative paths are taken from the
    /// config's directory.
    pub fn load(path: &Path) -> Result<(Self, Dataset), IoError> {
        let raw = RawConfig::read(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::resolve(&raw, base)
    }

    pub fn resolve(raw: &RawConfig, base: &Path) -> Result<(Self, Dataset), IoError> {
        let kind = model_block(raw)?;
        let transform = parse_transform(raw.dataset.transform.as_deref())?;
        let rescaling = parse_rescaling(raw.dataset.rescale.as_deref())?;
        let dataset_path = resolve_path(base, &raw.dataset.path);
        let data = match rescaling {
            Rescaling::Envelope => load_dataset(&dataset_path, transform)?,
            Rescaling::Identity => {
                if transform != Transform::None {
                    return Err(bad("rescale = \"identity\" needs transform = \"none\""));
                }
                load_unit_dataset(&dataset_path)?
            }
        };
        let model = model_config(raw, kind, &data)?;
        model
            .validate()
            .map_err(|e| bad(format!("[{}] {e}", kind.tag())))?;

        let m = &raw.mcmc;
        let dm = McmcControl::default();
        let mcmc = McmcControl {
            n_samples: m.n_samples.unwrap_or(dm.n_samples),
            burn_in: m.burn_in.unwrap_or(dm.burn_in),
            thin: m.thin.unwrap_or(dm.thin),
            seed: m.seed.unwrap_or(dm.seed),
        };
        let g = &raw.geometry;
        let dk = KarcherOptions::default();
        let grid = Grid::new(g.n_points.unwrap_or(Grid::DEFAULT_POINTS))
            .map_err(|e| bad(format!("[geometry] {e}")))?;
        let karcher = KarcherOptions {
            tolerance: g.tolerance.unwrap_or(dk.tolerance),
            step: g.step.unwrap_or(dk.step),
            max_iter: g.max_iter.unwrap_or(dk.max_iter),
        };

        let s = &raw.sweep;
        let (parameter, values) = match (&s.preset, &s.values) {
            (Some(_), Some(_)) => {
                return Err(bad("[sweep] give either `values` or `preset`, not both"));
            }
            (None, None) => return Err(bad("[sweep] needs `values` or `preset`")),
            (Some(name), None) => {
                let preset = find_preset(name).map_err(|e| IoError::BadPreset(e.to_string()))?;
                if preset.model != kind {
                    return Err(IoError::BadPreset(format!(
                        "preset {name} is for model {}, config uses {}",
                        preset.model,
                        kind.tag()
                    )));
                }
                if let Some(p) = &s.parameter {
                    if p != preset.parameter {
                        return Err(IoError::BadPreset(format!(
                            "preset {name} sweeps {}, not {p}",
                            preset.parameter
                        )));
                    }
                }
                let b = model
                    .get(preset.parameter)
                    .map_err(|e| IoError::BadPreset(e.to_string()))?;
                (preset.parameter.to_string(), preset.values_around(b))
            }
            (None, Some(values)) => {
                let p = s
                    .parameter
                    .clone()
                    .ok_or_else(|| bad("[sweep] `values` needs `parameter`"))?;
                (p, values.clone())
            }
        };
        let names = model.parameter_names();
        if !names.contains(&parameter.as_str()) {
            return Err(IoError::BadParam(format!(
                "[sweep] parameter `{parameter}` is not sweepable for {} (expected one of {})",
                kind.tag(),
                names.join(", ")
            )));
        }
        let baseline_value = model.get(&parameter).expect("name checked above");
        let sweep = SweepSpec {
            band_values: s
                .band_values
                .clone()
                .unwrap_or_else(|| default_band_values(&values, baseline_value)),
            baseline: model,
            parameter,
            values,
            replicates: s.replicates.unwrap_or(DEFAULT_REPLICATES),
            band_level: s.band_level.unwrap_or(DEFAULT_BAND_LEVEL),
            mcmc,
            d_components: s
                .d_components
                .unwrap_or(crate::sensitivity::DEFAULT_COMPONENTS),
            grid,
            karcher,
            seed_scheme: match s.seed_scheme.as_deref() {
                None => SeedScheme::default(),
                Some(n) => SeedScheme::from_name(n)
                    .ok_or_else(|| bad(format!("unknown seed_scheme `{n}` (hybrid | common)")))?,
            },
            curve: match s.curve.as_deref() {
                None => CurveMode::default(),
                Some(n) => CurveMode::from_name(n)
                    .ok_or_else(|| bad(format!("unknown curve `{n}` (first | mean)")))?,
            },
        };
        sweep.validate()?;

        let o = &raw.output;
        let output = OutputOptions {
            dir: o.dir.as_ref().map(|d| {
                if d.is_absolute() {
                    d.clone()
                } else {
                    base.join(d)
                }
            }),
            densities: o.densities.unwrap_or(false),
            trace: o.trace.unwrap_or(true),
        };
        Ok((
            Self {
                dataset_path,
                transform,
                rescaling,
                sweep,
                output,
            },
            data,
        ))
    }

    /// The config with every default filled in and paths made absolute.
    pub fn echo(&self) -> RawConfig {
        let s = &self.sweep;
        let mut raw = RawConfig {
            dataset: RawDataset {
                path: self.dataset_path.clone(),
                transform: Some(self.transform.name().to_string()),
                rescale: Some(self.rescaling.name().to_string()),
            },
            sweep: RawSweep {
                parameter: Some(s.parameter.clone()),
                values: Some(s.values.clone()),
                preset: None,
                replicates: Some(s.replicates),
                band_values: Some(s.band_values.clone()),
                band_level: Some(s.band_level),
                d_components: Some(s.d_components),
                seed_scheme: Some(s.seed_scheme.name().to_string()),
                curve: Some(s.curve.name().to_string()),
            },
            mcmc: RawMcmc {
                n_samples: Some(s.mcmc.n_samples),
                burn_in: Some(s.mcmc.burn_in),
                thin: Some(s.mcmc.thin),
                seed: Some(s.mcmc.seed),
            },
            geometry: RawGeometry {
                n_points: Some(s.grid.n_points()),
                tolerance: Some(s.karcher.tolerance),
                step: Some(s.karcher.step),
                max_iter: Some(s.karcher.max_iter),
            },
            output: RawOutput {
                dir: self.output.dir.clone(),
                densities: Some(self.output.densities),
                trace: Some(self.output.trace),
            },
            ..RawConfig::default()
        };
        let mixture = |c: &CcvConfig| RawMixture {
            a0: Some(c.a0),
            a1: Some(c.a1),
            mu00: Some(c.mu00),
            lambda0: Some(c.lambda0),
            s0: Some(c.s0),
            s1: Some(c.s1),
            eta: Some(c.eta),
            gamma: Some(c.gamma),
            fixed_a: c.fixed_a,
            phi: None,
            aux_m: None,
        };
        match &s.baseline {
            ModelConfig::Dp(c) => {
                let (g0, g0_a, g0_b) = match c.g0 {
                    BaseMeasure::Uniform => ("uniform", None, None),
                    BaseMeasure::Beta { a, b } => ("beta", Some(a), Some(b)),
                };
                raw.dp = Some(RawDp {
                    alpha: Some(c.alpha),
                    g0: Some(g0.to_string()),
                    g0_a,
                    g0_b,
                    truncation: Some(c.truncation),
                    bandwidth: match c.bandwidth {
                        Bandwidth::Auto => None,
                        Bandwidth::Fixed(h) => Some(h),
                    },
                });
            }
            ModelConfig::Dpgmm(c) => {
                raw.dpgmm = Some(RawDpgmm {
                    alpha: Some(c.alpha),
                    m: Some(c.m),
                    r: Some(c.r),
                    nu: Some(c.nu),
                    s: Some(c.s),
                });
            }
            ModelConfig::Ccv(c) => raw.ccv = Some(mixture(c)),
            ModelConfig::Dcv(c) => {
                raw.dcv = Some(RawMixture {
                    phi: Some(c.phi),
                    aux_m: Some(c.aux_m),
                    ..mixture(&c.ccv)
                });
            }
        }
        raw
    }
}
