//! Run configuration: model shapes, ideal backbone geometry, sampling
//! parameters, and loss weights. JSON on disk, with defaults for every
//! field.

use serde::{Deserialize, Serialize};

use crate::cfa::CfaConfig;
use crate::motor::IdealGeometry;

use super::IoError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub model: CfaConfig,
    pub ideal_geometry: IdealGeometry,
    /// Euler steps for sampling.
    pub n_steps: usize,
    pub seed: u64,
    pub rot_loss_weight: f64,
    pub trans_loss_weight: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: CfaConfig::default(),
            ideal_geometry: IdealGeometry::default(),
            n_steps: 200,
            seed: 0,
            rot_loss_weight: 1.0,
            trans_loss_weight: 1.0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), IoError> {
        self.model
            .validate()
            .map_err(|reason| IoError::InvalidConfig { reason })?;
        if self.n_steps == 0 {
            return Err(IoError::InvalidConfig {
                reason: "n_steps must be at least 1".into(),
            });
        }
        for (name, w) in [
            ("rot_loss_weight", self.rot_loss_weight),
            ("trans_loss_weight", self.trans_loss_weight),
        ] {
            if !w.is_finite() || w < 0.0 {
                return Err(IoError::InvalidConfig {
                    reason: format!("{name} must be finite and nonnegative"),
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| IoError::InvalidConfig {
            reason: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }
}
