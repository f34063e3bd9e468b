//! TOML configuration files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::params::{
    Ambient, Bop, Constants, Geometry, Kinetics, Membrane, OperatingConditions, ParameterSet, Porous, VoltageParams,
    Water,
};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Number of GDL nodes. Derived from the layer thicknesses when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_gdl: Option<usize>,
}

/// Complete model configuration as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub geometry: Geometry,
    pub membrane: Membrane,
    pub porous: Porous,
    pub kinetics: Kinetics,
    pub water: Water,
    pub voltage: VoltageParams,
    pub bop: Bop,
    pub constants: Constants,
    pub ambient: Ambient,
    pub operating: OperatingConditions,
    #[serde(default, skip_serializing_if = "Numerics::is_default")]
    pub numerics: Numerics,
}

impl Numerics {
    fn is_default(&self) -> bool {
        self == &Numerics::default()
    }
}

impl ModelConfig {
    pub fn new(params: ParameterSet, operating: OperatingConditions, numerics: Numerics) -> Self {
        let ParameterSet {
            geometry,
            membrane,
            porous,
            kinetics,
            water,
            voltage,
            bop,
            constants,
            ambient,
        } = params;
        Self {
            geometry,
            membrane,
            porous,
            kinetics,
            water,
            voltage,
            bop,
            constants,
            ambient,
            operating,
            numerics,
        }
    }

    pub fn eh31() -> Self {
        Self::new(
            ParameterSet::eh31(),
            OperatingConditions::eh31(2e5),
            Numerics::default(),
        )
    }

    pub fn params(&self) -> ParameterSet {
        ParameterSet {
            geometry: self.geometry.clone(),
            membrane: self.membrane.clone(),
            porous: self.porous.clone(),
            kinetics: self.kinetics.clone(),
            water: self.water.clone(),
            voltage: self.voltage.clone(),
            bop: self.bop.clone(),
            constants: self.constants.clone(),
            ambient: self.ambient.clone(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ModelConfig = toml::from_str(text).map_err(|e| ModelError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.params();
        p.validate()?;
        self.operating.validate(&p)?;
        if let Some(n) = self.numerics.n_gdl {
            if n < 2 {
                return Err(ModelError::Config(format!("numerics.n_gdl = {n} must be at least 2")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_toml() {
        let cfg = ModelConfig::eh31();
        let text = cfg.to_toml_string();
        let back = ModelConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn missing_key_is_named() {
        let text = ModelConfig::eh31().to_toml_string().replace("H_mem = ", "H_nope = ");
        let err = ModelConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("H_nope") || err.contains("H_mem"), "{err}");
        let text: String = ModelConfig::eh31()
            .to_toml_string()
            .lines()
            .filter(|l| !l.starts_with("tau_hum"))
            .map(|l| format!("{l}\n"))
            .collect();
        let err = ModelConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("tau_hum"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = ModelConfig::eh31()
            .to_toml_string()
            .replace("[bop]\n", "[bop]\nbogus = 1.0\n");
        let err = ModelConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn n_gdl_override_is_parsed() {
        let text = format!("{}\n[numerics]\nn_gdl = 4\n", ModelConfig::eh31().to_toml_string());
        let cfg = ModelConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.numerics.n_gdl, Some(4));
    }
}
