//! Standardized innovation families: mean 0 and variance 1 by construction.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InnovationSpec {
    #[default]
    StandardNormal,
    /// ±1 with equal probability.
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    UniformStandardized,
    /// Student t with `df > 3`, scaled by `√((df-2)/df)`.
    StudentT { df: f64 },
}

impl InnovationSpec {
    pub fn validate(&self) -> Result<()> {
        if let InnovationSpec::StudentT { df } = *self {
            if !(df.is_finite() && df > 3.0) {
                return Err(Error::InvalidInnovations(format!(
                    "Student t requires df > 3 for a finite third absolute moment, got {df}"
                )));
            }
        }
        Ok(())
    }

    /// `E|ε|³`.
    pub fn third_abs_moment(&self) -> f64 {
        match *self {
            InnovationSpec::StandardNormal => 2.0 * (2.0 / std::f64::consts::PI).sqrt(),
            InnovationSpec::Rademacher => 1.0,
            InnovationSpec::UniformStandardized => 0.75 * 3f64.sqrt(),
            InnovationSpec::StudentT { df } => {
                // E|T|³ = ν^{3/2} Γ(2) Γ((ν-3)/2) / (√π Γ(ν/2)), then rescaled.
                let log = 1.5 * (df - 2.0).ln() + ln_gamma((df - 3.0) / 2.0)
                    - 0.5 * std::f64::consts::PI.ln()
                    - ln_gamma(df / 2.0);
                log.exp()
            }
        }
    }

    pub fn sampler(&self) -> Result<InnovationSampler> {
        self.validate()?;
        Ok(match *self {
            InnovationSpec::StandardNormal => InnovationSampler::Normal,
            InnovationSpec::Rademacher => InnovationSampler::Rademacher,
            InnovationSpec::UniformStandardized => InnovationSampler::Uniform,
            InnovationSpec::StudentT { df } => InnovationSampler::StudentT {
                dist: StudentT::new(df).map_err(|e| Error::InvalidInnovations(e.to_string()))?,
                scale: ((df - 2.0) / df).sqrt(),
            },
        })
    }
}

/// A prepared sampler for one innovation family.
#[derive(Debug, Clone, Copy)]
pub enum InnovationSampler {
    Normal,
    Rademacher,
    Uniform,
    StudentT { dist: StudentT<f64>, scale: f64 },
}

const SQRT_3: f64 = 1.732_050_807_568_877_2;

impl InnovationSampler {
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            InnovationSampler::Normal => StandardNormal.sample(rng),
            InnovationSampler::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            InnovationSampler::Uniform => (2.0 * rng.random::<f64>() - 1.0) * SQRT_3,
            InnovationSampler::StudentT { dist, scale } => dist.sample(rng) * scale,
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for x in out.iter_mut() {
            *x = self.draw(rng);
        }
    }
}
