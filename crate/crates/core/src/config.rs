//! Run parameters with the default experiment values.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::funkmink::FunkInversionParams;
use crate::grid::{SphereGrid, SphereTimeGrid, VolumeSpec};
use crate::recon::ReconParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub r_det: f64,
    pub n_polar: usize,
    pub n_az: usize,
    pub n_t: usize,
    pub t_max: f64,
    pub polar_min: f64,
    pub n_circle: usize,
    pub k_weight: u32,
    /// Defaults to cot(polar_min).
    pub s_max: Option<f64>,
    pub n_omega: usize,
    pub n_s: usize,
    pub x_max: f64,
    pub volume_n: usize,
    pub noise_level: f64,
    pub rng_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            r_det: 1.0,
            n_polar: 50,
            n_az: 200,
            n_t: 50,
            t_max: 2.0,
            polar_min: PI / 25.0,
            n_circle: 100,
            k_weight: 2,
            s_max: None,
            n_omega: 360,
            n_s: 401,
            x_max: 2.5,
            volume_n: 80,
            noise_level: 0.0,
            rng_seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_polar", self.n_polar),
            ("n_az", self.n_az),
            ("n_t", self.n_t),
            ("n_circle", self.n_circle),
            ("n_omega", self.n_omega),
            ("n_s", self.n_s),
            ("volume_n", self.volume_n),
        ];
        for (name, v) in counts {
            if v < 2 {
                return Err(Error::Domain(format!("{name} must be >= 2, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.noise_level) {
            return Err(Error::Domain(format!(
                "noise_level must lie in [0, 1), got {}",
                self.noise_level
            )));
        }
        if !self.k_weight.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "k_weight must be even, got {}",
                self.k_weight
            )));
        }
        if let Some(s) = self.s_max {
            if !(s > 0.0) {
                return Err(Error::Domain(format!("s_max must be positive, got {s}")));
            }
        }
        if !(self.x_max > 0.0) {
            return Err(Error::Domain(format!(
                "x_max must be positive, got {}",
                self.x_max
            )));
        }
        self.detector_grid().map(|_| ())
    }

    pub fn detector_grid(&self) -> Result<SphereTimeGrid> {
        let sphere = SphereGrid::hemisphere(self.n_polar, self.n_az, self.polar_min)?;
        SphereTimeGrid::new(sphere, self.n_t, self.t_max, self.r_det)
    }

    pub fn funk_params(&self) -> FunkInversionParams {
        FunkInversionParams {
            n_angles: self.n_omega,
            n_s: self.n_s,
            s_max: self.s_max,
            x_max: self.x_max,
            k: self.k_weight,
            ..Default::default()
        }
    }

    pub fn volume(&self) -> Result<VolumeSpec> {
        VolumeSpec::new(self.volume_n, self.r_det)
    }

    pub fn recon_params(&self) -> Result<ReconParams> {
        Ok(ReconParams {
            funk: self.funk_params(),
            volume: self.volume()?,
            n_circle: self.n_circle,
            ..Default::default()
        })
    }

    /// s_max actually used.
    pub fn resolved_s_max(&self) -> f64 {
        self.s_max.unwrap_or(1.0 / self.polar_min.tan())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_experiment() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.detector_grid().unwrap(), SphereTimeGrid::standard());
        assert!((c.resolved_s_max() - 7.915815088).abs() < 1e-8);
        assert_eq!(c.recon_params().unwrap(), ReconParams::default());
    }

    #[test]
    fn invalid_values() {
        let bad = [
            RunConfig {
                n_t: 1,
                ..Default::default()
            },
            RunConfig {
                noise_level: 1.0,
                ..Default::default()
            },
            RunConfig {
                k_weight: 3,
                ..Default::default()
            },
            RunConfig {
                polar_min: 0.0,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn json_round_trip() {
        let c = RunConfig {
            s_max: Some(12.0),
            rng_seed: 9,
            ..Default::default()
        };
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
        let partial: RunConfig = serde_json::from_str(r#"{"n_t": 20}"#).unwrap();
        assert_eq!(partial.n_t, 20);
        assert_eq!(partial.n_az, 200);
    }
}
