//! One-parameter perturbation sweeps.
//!
//! For every grid value the perturbed model is fitted with all other
//! parameters at their baseline, and the three measures are computed against
//! a baseline fit. Replicates repeat the whole comparison with fresh seeds
//! and feed the bands at the declared band values.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{Grid, KarcherOptions};
use crate::samplers::{
    Dataset, McmcControl, ModelConfig, ModelKind, PosteriorSample, SamplerError,
};
use crate::seed;
use crate::sensitivity::{replicate_band, MeasureTriple, SampleSummary, SensitivityError};

/// Number of points in every preset ladder.
pub const PRESET_POINTS: usize = 15;
pub const DEFAULT_REPLICATES: usize = 25;
pub const DEFAULT_BAND_LEVEL: f64 = 0.95;

const TAG_BASELINE: u64 = 0;
const TAG_PERTURBED: u64 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("sampler failed at {} (replicate {replicate}): {source}", at(*.value))]
    Sampler {
        value: Option<f64>,
        replicate: usize,
        source: SamplerError,
    },
    #[error("measure failed at {} (replicate {replicate}): {source}", at(*.value))]
    Measure {
        value: Option<f64>,
        replicate: usize,
        source: SensitivityError,
    },
}

fn at(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("value {v}"),
        None => "baseline".to_string(),
    }
}

/// How perturbed runs are seeded relative to the baseline run of the same
/// replicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SeedScheme {
    /// Perturbed runs share one seed per replicate, distinct from the
    /// baseline seed, so the curve is not pinned to zero at the baseline.
    #[default]
    Hybrid,
    /// Perturbed runs reuse the baseline seed.
    Common,
}

impl SeedScheme {
    pub fn name(&self) -> &'static str {
        match self {
            SeedScheme::Hybrid => "hybrid",
            SeedScheme::Common => "common",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "hybrid" => Some(SeedScheme::Hybrid),
            "common" => Some(SeedScheme::Common),
            _ => None,
        }
    }
}

/// What the per-value curve reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CurveMode {
    #[default]
    FirstReplicate,
    /// Average over replicates; every value then runs every replicate.
    ReplicateMean,
}

impl CurveMode {
    pub fn name(&self) -> &'static str {
        match self {
            CurveMode::FirstReplicate => "first",
            CurveMode::ReplicateMean => "mean",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "first" => Some(CurveMode::FirstReplicate),
            "mean" => Some(CurveMode::ReplicateMean),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Geometric,
}

/// A preset perturbation ladder for one parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct PresetGrid {
    pub model: ModelKind,
    pub parameter: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub baseline: f64,
    pub spacing: Spacing,
}

impl PresetGrid {
    pub fn name(&self) -> String {
        format!("{}.{}", self.model, self.parameter)
    }

    pub fn values(&self) -> Vec<f64> {
        self.values_around(self.baseline)
    }

    /// The ladder with its point nearest `baseline` replaced by `baseline`.
    pub fn values_around(&self, baseline: f64) -> Vec<f64> {
        ladder(self.lo, self.hi, baseline, self.spacing, PRESET_POINTS)
    }
}

/// `n` points from `lo` to `hi`, evenly spaced on the linear or log scale,
/// with the nearest point snapped to `baseline`.
pub fn ladder(lo: f64, hi: f64, baseline: f64, spacing: Spacing, n: usize) -> Vec<f64> {
    let step = |i: usize| i as f64 / (n - 1) as f64;
    let mut values: Vec<f64> = match spacing {
        Spacing::Linear => (0..n).map(|i| lo + (hi - lo) * step(i)).collect(),
        Spacing::Geometric => (0..n)
            .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * step(i)).exp())
            .collect(),
    };
    values[0] = lo;
    values[n - 1] = hi;
    let gap = |v: f64| match spacing {
        Spacing::Linear => (v - baseline).abs(),
        Spacing::Geometric => (v.ln() - baseline.ln()).abs(),
    };
    let nearest = (0..n)
        .min_by(|&a, &b| gap(values[a]).total_cmp(&gap(values[b])))
        .expect("ladder is nonempty");
    values[nearest] = baseline;
    values
}

/// Preset ladders for every sweepable parameter of `model`.
pub fn sweep_grid_presets(model: ModelKind) -> Vec<PresetGrid> {
    use Spacing::{Geometric, Linear};
    let p = |parameter, lo, hi, baseline, spacing| PresetGrid {
        model,
        parameter,
        lo,
        hi,
        baseline,
        spacing,
    };
    let ccv = |v: &mut Vec<PresetGrid>| {
        v.extend([
            p("a0", 1.0, 20.0, 1.0, Linear),
            p("a1", 1.0, 20.0, 10.0, Linear),
            p("eta", 1.0, 20.0, 3.0, Linear),
            p("gamma", 1.0, 20.0, 5.0, Geometric),
        ]);
    };
    let mut out = Vec::new();
    match model {
        ModelKind::Dp => out.extend([
            p("alpha", 0.1, 15.0, 5.0, Geometric),
            p("g0_b", 1.0, 15.0, 5.0, Linear),
        ]),
        ModelKind::Dpgmm => out.extend([
            p("alpha", 0.1, 15.0, 1.0, Geometric),
            p("m", -8.0, 8.0, 0.0, Linear),
            p("r", 1.0 / 18.0, 6.0, 1.0 / 9.0, Geometric),
            p("nu", 1.0, 15.0, 5.0, Linear),
            p("s", 0.1, 12.0, 1.0, Geometric),
        ]),
        ModelKind::Ccv => ccv(&mut out),
        ModelKind::Dcv => {
            ccv(&mut out);
            out.push(p("phi", 1.5, 20.0, 2.0, Geometric));
        }
    }
    out
}

/// Looks up a preset by `model.parameter` name, e.g. `dpgmm.alpha`.
pub fn find_preset(name: &str) -> Result<PresetGrid, SweepError> {
    let (model, parameter) = name.split_once('.').ok_or_else(|| {
        SweepError::InvalidSpec(format!("preset `{name}` is not `model.parameter`"))
    })?;
    let kind = ModelKind::from_tag(model).ok_or_else(|| SweepError::UnknownModel(model.into()))?;
    sweep_grid_presets(kind)
        .into_iter()
        .find(|p| p.parameter == parameter)
        .ok_or_else(|| SweepError::InvalidSpec(format!("no preset named `{name}`")))
}

/// `{min, baseline, max}`, plus the baseline's neighbour when the baseline
/// is an endpoint.
pub fn default_band_values(values: &[f64], baseline: f64) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let mut out = vec![lo, baseline, hi];
    if sorted.len() > 2 && (baseline == lo || baseline == hi) {
        let pos = sorted.iter().position(|v| *v == baseline).unwrap_or(0);
        out.push(if baseline == lo {
            sorted[pos + 1]
        } else {
            sorted[pos - 1]
        });
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub baseline: ModelConfig,
    pub parameter: String,
    pub values: Vec<f64>,
    pub replicates: usize,
    pub band_values: Vec<f64>,
    pub band_level: f64,
    /// Retention schedule; `mcmc.seed` is the base seed of the sweep.
    pub mcmc: McmcControl,
    pub d_components: usize,
    pub grid: Grid,
    pub karcher: KarcherOptions,
    pub seed_scheme: SeedScheme,
    pub curve: CurveMode,
}

impl SweepSpec {
    /// A sweep over `values` with default replicates, band values and
    /// settings.
    pub fn new(
        baseline: ModelConfig,
        parameter: &str,
        values: Vec<f64>,
        mcmc: McmcControl,
    ) -> Result<Self, SweepError> {
        let b = baseline
            .get(parameter)
            .map_err(|e| SweepError::InvalidSpec(e.to_string()))?;
        let band_values = default_band_values(&values, b);
        let spec = Self {
            baseline,
            parameter: parameter.to_string(),
            values,
            replicates: DEFAULT_REPLICATES,
            band_values,
            band_level: DEFAULT_BAND_LEVEL,
            mcmc,
            d_components: crate::sensitivity::DEFAULT_COMPONENTS,
            grid: Grid::default(),
            karcher: KarcherOptions::default(),
            seed_scheme: SeedScheme::default(),
            curve: CurveMode::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// A sweep along a preset ladder, snapped to the baseline's value.
    pub fn from_preset(
        baseline: ModelConfig,
        preset: &PresetGrid,
        mcmc: McmcControl,
    ) -> Result<Self, SweepError> {
        if preset.model != baseline.kind() {
            return Err(SweepError::InvalidSpec(format!(
                "preset {} does not apply to model {}",
                preset.name(),
                baseline.kind()
            )));
        }
        let b = baseline
            .get(preset.parameter)
            .map_err(|e| SweepError::InvalidSpec(e.to_string()))?;
        Self::new(baseline, preset.parameter, preset.values_around(b), mcmc)
    }

    pub fn model(&self) -> ModelKind {
        self.baseline.kind()
    }

    pub fn baseline_value(&self) -> Result<f64, SweepError> {
        self.baseline
            .get(&self.parameter)
            .map_err(|e| SweepError::InvalidSpec(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: String| Err(SweepError::InvalidSpec(m));
        self.baseline
            .validate()
            .map_err(|e| SweepError::InvalidSpec(e.to_string()))?;
        self.mcmc
            .validate()
            .map_err(|e| SweepError::InvalidSpec(e.to_string()))?;
        let b = self.baseline_value()?;
        if self.values.is_empty() {
            return bad("no perturbation values".into());
        }
        for &v in &self.values {
            self.baseline
                .with(&self.parameter, v)
                .and_then(|c| c.validate())
                .map_err(|e| SweepError::InvalidSpec(format!("value {v}: {e}")))?;
        }
        if !self.values.contains(&b) {
            return bad(format!("baseline value {b} is not among the sweep values"));
        }
        if self.replicates < 1 {
            return bad("replicates must be at least 1".into());
        }
        if !self.band_values.is_empty() && self.replicates < 2 {
            return bad("bands need at least 2 replicates".into());
        }
        if let Some(v) = self.band_values.iter().find(|v| !self.values.contains(v)) {
            return bad(format!("band value {v} is not among the sweep values"));
        }
        if !(self.band_level > 0.0 && self.band_level < 1.0) {
            return bad(format!(
                "band level must lie in (0, 1), got {}",
                self.band_level
            ));
        }
        if self.d_components < 2 {
            return bad("d_components must be at least 2".into());
        }
        if self.mcmc.n_samples <= self.d_components {
            return bad(format!(
                "n_samples ({}) must exceed d_components ({})",
                self.mcmc.n_samples, self.d_components
            ));
        }
        Ok(())
    }

    pub fn baseline_seed(&self, replicate: usize) -> u64 {
        seed::derive(self.mcmc.seed, replicate as u64, TAG_BASELINE)
    }

    pub fn perturbed_seed(&self, replicate: usize) -> u64 {
        match self.seed_scheme {
            SeedScheme::Hybrid => seed::derive(self.mcmc.seed, replicate as u64, TAG_PERTURBED),
            SeedScheme::Common => self.baseline_seed(replicate),
        }
    }

    fn replicates_at(&self, value: f64) -> usize {
        if self.curve == CurveMode::ReplicateMean || self.band_values.contains(&value) {
            self.replicates
        } else {
            1
        }
    }
}

/// Replicate band of each measure at one grid value.
#[derive(Clone, Debug, PartialEq)]
pub struct Band {
    pub value: f64,
    pub d: (f64, f64),
    pub v: (f64, f64),
    pub e: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    /// Curve value: first replicate or replicate mean.
    pub triple: MeasureTriple,
    /// One triple per replicate run at this value.
    pub replicates: Vec<MeasureTriple>,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub points: Vec<SweepPoint>,
    pub bands: Vec<Band>,
    pub baseline_seeds: Vec<u64>,
    pub perturbed_seeds: Vec<u64>,
    /// Baseline fit of the first replicate, kept for density and trace
    /// output.
    pub first_baseline: PosteriorSample,
    pub wall_clock: Duration,
}

impl SweepResult {
    pub fn point(&self, value: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.value == value)
    }

    pub fn band(&self, value: f64) -> Option<&Band> {
        self.bands.iter().find(|b| b.value == value)
    }
}

/// Runs the sweep on the current rayon pool.
///
/// Results are assembled in grid order and depend only on `data` and `spec`,
/// not on the number of threads.
pub fn run_sweep(data: &Dataset, spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    let started = Instant::now();
    let needed = spec
        .values
        .iter()
        .map(|&v| spec.replicates_at(v))
        .max()
        .unwrap_or(1);

    let fit = |config: &ModelConfig, seed: u64, value: Option<f64>, replicate: usize| {
        config
            .sample(data, &spec.mcmc.with_seed(seed), spec.grid)
            .map_err(|source| SweepError::Sampler {
                value,
                replicate,
                source,
            })
    };
    let summarize = |s: &PosteriorSample, value: Option<f64>, replicate: usize| {
        SampleSummary::new(s, &spec.karcher).map_err(|source| SweepError::Measure {
            value,
            replicate,
            source,
        })
    };

    let baselines: Vec<(SampleSummary, Option<PosteriorSample>)> = (0..needed)
        .into_par_iter()
        .map(|r| {
            let s = fit(&spec.baseline, spec.baseline_seed(r), None, r)?;
            let summary = summarize(&s, None, r)?;
            Ok((summary, (r == 0).then_some(s)))
        })
        .collect::<Result<_, SweepError>>()?;

    let tasks: Vec<(usize, usize)> = spec
        .values
        .iter()
        .enumerate()
        .flat_map(|(i, &v)| (0..spec.replicates_at(v)).map(move |r| (i, r)))
        .collect();
    let triples: Vec<MeasureTriple> = tasks
        .par_iter()
        .map(|&(i, r)| {
            let value = spec.values[i];
            let config = spec
                .baseline
                .with(&spec.parameter, value)
                .map_err(|e| SweepError::InvalidSpec(e.to_string()))?;
            let s = fit(&config, spec.perturbed_seed(r), Some(value), r)?;
            let summary = summarize(&s, Some(value), r)?;
            baselines[r]
                .0
                .compare(&summary, spec.d_components)
                .map_err(|source| SweepError::Measure {
                    value: Some(value),
                    replicate: r,
                    source,
                })
        })
        .collect::<Result<_, SweepError>>()?;

    let mut points: Vec<SweepPoint> = spec
        .values
        .iter()
        .map(|&value| SweepPoint {
            value,
            triple: MeasureTriple::zero(spec.d_components),
            replicates: Vec::new(),
        })
        .collect();
    for (&(i, _), t) in tasks.iter().zip(&triples) {
        points[i].replicates.push(*t);
    }
    for p in &mut points {
        p.triple = match spec.curve {
            CurveMode::FirstReplicate => p.replicates[0],
            CurveMode::ReplicateMean => {
                let k = p.replicates.len() as f64;
                MeasureTriple {
                    d_shift: p.replicates.iter().map(|t| t.d_shift).sum::<f64>() / k,
                    v_spread: p.replicates.iter().map(|t| t.v_spread).sum::<f64>() / k,
                    e_covshape: p.replicates.iter().map(|t| t.e_covshape).sum::<f64>() / k,
                    d_components: spec.d_components,
                }
            }
        };
    }

    let mut bands = Vec::new();
    for p in points
        .iter()
        .filter(|p| spec.band_values.contains(&p.value))
    {
        let band = |f: fn(&MeasureTriple) -> f64| {
            let xs: Vec<f64> = p.replicates.iter().map(f).collect();
            replicate_band(&xs, spec.band_level).map_err(|source| SweepError::Measure {
                value: Some(p.value),
                replicate: 0,
                source,
            })
        };
        bands.push(Band {
            value: p.value,
            d: band(|t| t.d_shift)?,
            v: band(|t| t.v_spread)?,
            e: band(|t| t.e_covshape)?,
        });
    }

    let first_baseline = baselines
        .into_iter()
        .next()
        .and_then(|(_, s)| s)
        .expect("replicate 0 always runs");
    Ok(SweepResult {
        spec: spec.clone(),
        points,
        bands,
        baseline_seeds: (0..needed).map(|r| spec.baseline_seed(r)).collect(),
        perturbed_seeds: (0..needed).map(|r| spec.perturbed_seed(r)).collect(),
        first_baseline,
        wall_clock: started.elapsed(),
    })
}
