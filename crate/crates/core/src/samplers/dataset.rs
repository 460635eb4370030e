use super::SamplerError;

/// Observations are mapped into `[MARGIN, 1 - MARGIN]`.
pub const MARGIN: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Transform {
    #[default]
    None,
    Log,
}

impl Transform {
    pub fn name(&self) -> &'static str {
        match self {
            Transform::None => "none",
            Transform::Log => "log",
        }
    }
}

/// Affine map between model units `x` and the unit interval:
/// `u = (x - shift) / scale`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rescale {
    pub shift: f64,
    pub scale: f64,
}

impl Rescale {
    pub const IDENTITY: Rescale = Rescale {
        shift: 0.0,
        scale: 1.0,
    };

    pub fn to_unit(&self, x: f64) -> f64 {
        (x - self.shift) / self.scale
    }

    pub fn from_unit(&self, u: f64) -> f64 {
        self.shift + self.scale * u
    }
}

/// A univariate sample together with its embedding into `[0, 1]`.
///
/// Mixture models are fitted in model units (after the optional log
/// transform); the DP model and all densities live on the unit interval.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    name: String,
    observations: Vec<f64>,
    transform: Transform,
    rescale: Rescale,
}

impl Dataset {
    /// Applies `transform` and fits the rescale so that the extremes land on
    /// `MARGIN` and `1 - MARGIN`.
    pub fn new(
        name: impl Into<String>,
        raw: Vec<f64>,
        transform: Transform,
    ) -> Result<Self, SamplerError> {
        if raw.is_empty() {
            return Err(SamplerError::EmptyDataset);
        }
        let mut observations = Vec::with_capacity(raw.len());
        for (i, &x) in raw.iter().enumerate() {
            if !x.is_finite() {
                return Err(SamplerError::NonFiniteObservation(i));
            }
            observations.push(match transform {
                Transform::None => x,
                Transform::Log => {
                    if x <= 0.0 {
                        return Err(SamplerError::NonPositiveForLog { index: i, value: x });
                    }
                    x.ln()
                }
            });
        }
        let lo = observations.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = observations
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let rescale = if hi > lo {
            let scale = (hi - lo) / (1.0 - 2.0 * MARGIN);
            Rescale {
                shift: lo - MARGIN * scale,
                scale,
            }
        } else {
            Rescale {
                shift: lo - 0.5,
                scale: 1.0,
            }
        };
        Ok(Self {
            name: name.into(),
            observations,
            transform,
            rescale,
        })
    }

    /// Data that already live on `[0, 1]`, kept with the identity rescale.
    pub fn on_unit_interval(
        name: impl Into<String>,
        values: Vec<f64>,
    ) -> Result<Self, SamplerError> {
        if values.is_empty() {
            return Err(SamplerError::EmptyDataset);
        }
        for (i, &x) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&x) {
                return Err(SamplerError::OutsideUnitInterval { index: i, value: x });
            }
        }
        Ok(Self {
            name: name.into(),
            observations: values,
            transform: Transform::None,
            rescale: Rescale::IDENTITY,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Observations in model units.
    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    pub fn unit_observations(&self) -> Vec<f64> {
        self.observations
            .iter()
            .map(|&x| self.rescale.to_unit(x))
            .collect()
    }

    pub fn transform(&self) -> Transform {
        self.transform
    }

    pub fn rescale(&self) -> Rescale {
        self.rescale
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.observations.iter().sum::<f64>() / self.len() as f64
    }

    /// Unbiased sample variance; zero for a single observation.
    pub fn variance(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.observations
            .iter()
            .map(|x| (x - m).powi(2))
            .sum::<f64>()
            / (n - 1) as f64
    }
}
