//! Generator configuration: the ground-truth behavioral model and network
//! geometry behind the synthetic panel.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::YearMonth;
use crate::error::{Error, Result};

/// Configuration of the synthetic population.
///
/// Loaded from a TOML key-value file; unknown keys are rejected. All fields
/// have desk-scale defaults, so a config file only needs the overrides.
///
/// The adoption model is a logistic propensity over the ground-truth latents,
/// `logit(p) = beta0 + beta_flex*flex + beta_con*con + beta_dis*dis`, and an
/// adoption month drawn from a geometric hazard proportional to that
/// propensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorConfig {
    pub n_passengers: usize,
    pub n_stations: u32,
    /// Designated discount stations. Empty means the default contiguous
    /// central block of `ceil(29/98 * n_stations)` stations.
    pub discount_stations: Vec<u32>,
    /// Promotion launch month, `YYYY-MM`.
    pub promotion_launch: String,

    /// Natural tap-out band mixture: [early-morning, morning-peak, late].
    /// Must sum to 1.
    pub band_weights: [f64; 3],
    /// Probability that an adopter later abandons the promotion.
    pub attrition_prob: f64,

    /// Intercept of the adoption-propensity logit.
    pub beta0: f64,
    /// Coefficient on the flexibility latent (tap-in std, minutes).
    pub beta_flex: f64,
    /// Coefficient on the inconvenience latent (expected shift minutes).
    pub beta_con: f64,
    /// Coefficient on the travel-distance latent (trip minutes).
    pub beta_dis: f64,

    /// Adoption-month hazard = clamp(hazard_scale * propensity, min, max).
    pub hazard_scale: f64,
    pub hazard_min: f64,
    pub hazard_max: f64,

    pub fare_base: f64,
    pub fare_per_station: f64,
    pub duration_base: f64,
    pub duration_per_station: f64,
    /// Range of the per-passenger tap-out timing std (the flexibility latent).
    pub flex_min: f64,
    pub flex_max: f64,
    /// Relative std of day-to-day trip-duration noise.
    pub duration_noise_frac: f64,
    /// Sampling weight of discount stations when drawing work locations.
    pub work_discount_weight: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_passengers: 2000,
            n_stations: 20,
            discount_stations: Vec::new(),
            promotion_launch: "2014-09".to_string(),
            band_weights: [0.25, 0.55, 0.20],
            attrition_prob: 0.18,
            beta0: 0.3,
            beta_flex: 0.30,
            beta_con: -0.035,
            beta_dis: -0.015,
            hazard_scale: 0.65,
            hazard_min: 0.06,
            hazard_max: 0.95,
            fare_base: 4.0,
            fare_per_station: 0.5,
            duration_base: 6.0,
            duration_per_station: 3.0,
            flex_min: 2.0,
            flex_max: 10.0,
            duration_noise_frac: 0.03,
            work_discount_weight: 2.5,
        }
    }
}

impl GeneratorConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: GeneratorConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_passengers == 0 {
            return Err(Error::Config("n_passengers must be >= 1".into()));
        }
        if self.n_stations < 2 {
            return Err(Error::Config("n_stations must be >= 2".into()));
        }
        let wsum: f64 = self.band_weights.iter().sum();
        if (wsum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "band_weights sum to {wsum}, expected 1 within 1e-9"
            )));
        }
        if self.band_weights.iter().any(|&w| w < 0.0) {
            return Err(Error::Config("band_weights must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.attrition_prob) {
            return Err(Error::Config("attrition_prob must be in [0, 1]".into()));
        }
        if !(self.hazard_min > 0.0 && self.hazard_min <= self.hazard_max && self.hazard_max <= 1.0)
        {
            return Err(Error::Config("hazard bounds must satisfy 0 < min <= max <= 1".into()));
        }
        if self.flex_min < 1.0 || self.flex_max < self.flex_min || self.flex_max > 11.5 {
            // The adopted tap-out window needs a 2.5-sigma margin on both
            // sides, which caps the timing std at 11.5 minutes.
            return Err(Error::Config(
                "flex range must satisfy 1 <= flex_min <= flex_max <= 11.5".into(),
            ));
        }
        if self.fare_base <= 0.0 || self.fare_per_station < 0.0 {
            return Err(Error::Config("fares must be positive".into()));
        }
        if self.duration_base <= 0.0 || self.duration_per_station < 0.0 {
            return Err(Error::Config("durations must be positive".into()));
        }
        if !(0.0..0.2).contains(&self.duration_noise_frac) {
            return Err(Error::Config("duration_noise_frac must be in [0, 0.2)".into()));
        }
        if self.work_discount_weight <= 0.0 {
            return Err(Error::Config("work_discount_weight must be positive".into()));
        }
        for &s in &self.discount_stations {
            if s >= self.n_stations {
                return Err(Error::Config(format!(
                    "discount station {s} outside 0..{}",
                    self.n_stations
                )));
            }
        }
        self.launch()?;
        Ok(())
    }

    pub fn launch(&self) -> Result<YearMonth> {
        YearMonth::parse(&self.promotion_launch)
    }

    /// The discount-station set: the configured list, or the default central
    /// block sized `ceil(29/98 * n_stations)` (the fraction of discount
    /// stations in the full-scale network).
    pub fn discount_set(&self) -> BTreeSet<u32> {
        if !self.discount_stations.is_empty() {
            return self.discount_stations.iter().copied().collect();
        }
        let s = self.n_stations;
        let k = (29 * s).div_ceil(98).max(1);
        let start = (s - k) / 2;
        (start..start + k).collect()
    }
}
