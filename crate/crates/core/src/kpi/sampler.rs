use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Weibull};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::copula::{gaussian_copula_sample, CorrelationModel};
use super::{Kpi, KpiVector, ProfileTable, SliceType, KPI_COUNT};
use crate::error::{Error, Result};

/// How cross-slice contamination picks the wrong distribution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContaminationMode {
    /// The whole vector draws from another slice's profile.
    #[default]
    PerVector,
    /// Each KPI independently draws from another slice's marginal.
    PerKpi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Half-width of the multiplicative `1 + U(-alpha, alpha)` variation.
    pub alpha: f64,
    /// Per-entry missing probability.
    pub beta: f64,
    /// Measurement noise std as a multiple of each KPI's slice sigma.
    pub noise_scale: f64,
    pub contamination_prob: f64,
    pub contamination_mode: ContaminationMode,
    /// Per-vector probability that one KPI receives a Weibull outlier.
    pub outlier_prob: f64,
    pub weibull_shape: f64,
    pub weibull_scale: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            alpha: 0.15,
            beta: 0.05,
            noise_scale: 0.2,
            contamination_prob: 0.02,
            contamination_mode: ContaminationMode::PerVector,
            outlier_prob: 0.01,
            weibull_shape: 1.5,
            weibull_scale: 0.1,
        }
    }
}

impl NoiseConfig {
    /// No variation, noise, missingness, contamination, or outliers.
    pub fn noiseless() -> Self {
        NoiseConfig {
            alpha: 0.0,
            beta: 0.0,
            noise_scale: 0.0,
            contamination_prob: 0.0,
            outlier_prob: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::config(format!("noise.{name}"), format!("{v} is not a probability")))
            }
        };
        prob("beta", self.beta)?;
        prob("contamination_prob", self.contamination_prob)?;
        prob("outlier_prob", self.outlier_prob)?;
        if !(self.alpha.is_finite() && (0.0..1.0).contains(&self.alpha)) {
            return Err(Error::config("noise.alpha", "must be in [0, 1)"));
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0) {
            return Err(Error::config("noise.noise_scale", "must be finite and >= 0"));
        }
        for (name, v) in [("weibull_shape", self.weibull_shape), ("weibull_scale", self.weibull_scale)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("noise.{name}"), "must be > 0"));
            }
        }
        Ok(())
    }

    fn weibull(&self) -> Weibull<f64> {
        Weibull::new(self.weibull_scale, self.weibull_shape).expect("validated weibull parameters")
    }
}

/// Class proportions, in slice code order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassMix {
    pub embb: f64,
    pub urllc: f64,
    pub miot: f64,
}

impl Default for ClassMix {
    fn default() -> Self {
        ClassMix {
            embb: 0.2,
            urllc: 0.1,
            miot: 0.7,
        }
    }
}

impl ClassMix {
    pub fn as_array(&self) -> [f64; 3] {
        [self.embb, self.urllc, self.miot]
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.as_array();
        for (s, v) in SliceType::ALL.into_iter().zip(p) {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(
                    format!("class_mix.{}", super::slice_key(s)),
                    "must be a non-negative number",
                ));
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::config("class_mix", format!("proportions sum to {sum}, not 1")));
        }
        Ok(())
    }
}

/// Inverse-CDF draw of a slice type from a uniform `u` in [0, 1).
pub fn sample_slice_type(u: f64, mix: &ClassMix) -> Result<SliceType> {
    mix.validate()?;
    let mut acc = 0.0;
    for (slice, p) in SliceType::ALL.into_iter().zip(mix.as_array()) {
        acc += p;
        if u < acc {
            return Ok(slice);
        }
    }
    // u at or beyond the rounded total lands in the last non-empty class.
    Ok(SliceType::ALL
        .into_iter()
        .zip(mix.as_array())
        .rev()
        .find(|(_, p)| *p > 0.0)
        .map(|(s, _)| s)
        .unwrap_or(SliceType::Miot))
}

/// Draws a clean KPI vector for slice `t`.
///
/// Effects apply in order: contamination, copula + Gaussian marginals,
/// multiplicative variation, Weibull outlier, domain clamp.
pub fn sample_kpi_vector<R: Rng + ?Sized>(
    t: SliceType,
    table: &ProfileTable,
    noise: &NoiseConfig,
    corr: &CorrelationModel,
    rng: &mut R,
) -> KpiVector {
    let mut source = [t; KPI_COUNT];
    match noise.contamination_mode {
        ContaminationMode::PerKpi => {
            for s in source.iter_mut() {
                if rng.random::<f64>() < noise.contamination_prob {
                    *s = t.others()[rng.random_range(0..2)];
                }
            }
        }
        ContaminationMode::PerVector => {
            if rng.random::<f64>() < noise.contamination_prob {
                source = [t.others()[rng.random_range(0..2)]; KPI_COUNT];
            }
        }
    }

    let uniforms = gaussian_copula_sample(corr, rng);
    let std = Normal::standard();
    let mut values = [0.0; KPI_COUNT];
    for kpi in Kpi::ALL {
        let i = kpi.index();
        let ms = table.get(source[i]).get(kpi);
        let base = ms.mu + ms.sigma * std.inverse_cdf(uniforms[i]);
        let variation = 1.0 + noise.alpha * (2.0 * rng.random::<f64>() - 1.0);
        values[i] = base * variation;
    }

    if rng.random::<f64>() < noise.outlier_prob {
        let i = rng.random_range(0..KPI_COUNT);
        values[i] *= 1.0 + noise.weibull().sample(rng);
    }

    let mut k = KpiVector::complete(values);
    k.clamp_to_domain();
    k
}

/// Measurement layer: each entry independently goes missing with
/// probability `beta`, otherwise receives `N(0, noise_scale * sigma_t)` noise.
pub fn apply_measurement_model<R: Rng + ?Sized>(
    k: &KpiVector,
    t: SliceType,
    table: &ProfileTable,
    noise: &NoiseConfig,
    rng: &mut R,
) -> KpiVector {
    let profile = table.get(t);
    let mut out = *k;
    for kpi in Kpi::ALL {
        let missing = rng.random::<f64>() < noise.beta;
        let eps: f64 = rng.sample(StandardNormal);
        let v = if missing {
            None
        } else {
            k.get(kpi)
                .map(|v| kpi.clamp(v + eps * noise.noise_scale * profile.get(kpi).sigma))
        };
        out.set(kpi, v);
    }
    out
}

/// Full per-sample pipeline: clean draw followed by the measurement layer.
pub fn simulate_sample<R: Rng + ?Sized>(
    t: SliceType,
    table: &ProfileTable,
    noise: &NoiseConfig,
    corr: &CorrelationModel,
    rng: &mut R,
) -> KpiVector {
    let clean = sample_kpi_vector(t, table, noise, corr, rng);
    apply_measurement_model(&clean, t, table, noise, rng)
}
