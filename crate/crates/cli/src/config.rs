//! Scenario files.
//!
//! A scenario is a JSON document with units in the key names. It is turned
//! into SI quantities once, by [`ScenarioConfig::to_scenario`].

use std::path::Path;

use ris_pathloss::configuration::{
    focusing_phases, quantize_1bit, stripe_coding, uniform_coding, CodingState, ReflectionMap,
};
use ris_pathloss::engine::Scenario;
use ris_pathloss::geometry::{spherical_to_cartesian, Point3, RisGrid, TerminalPlacement};
use ris_pathloss::units::{db_to_linear, dbm_to_watts};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub ris: RisConfig,
    pub tx: TerminalConfig,
    pub rx: TerminalConfig,
    pub coding: CodingConfig,
    pub power: PowerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RisConfig {
    /// Rows.
    #[serde(rename = "N")]
    pub n: usize,
    /// Columns.
    #[serde(rename = "M")]
    pub m: usize,
    pub dx_mm: f64,
    pub dy_mm: f64,
    pub f_ghz: f64,
    pub states: Vec<StateConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub label: String,
    pub amp: f64,
    pub phase_deg: f64,
}

/// Either `d_m`/`theta_deg`/`phi_deg` or `xyz_m`, never both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminalConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xyz_m: Option<[f64; 3]>,
    pub gain_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CodingConfig {
    Uniform {
        state: String,
    },
    /// Column `m` takes `state0` when `((m - 1) mod period) + 1` lies in
    /// `window`.
    Stripe {
        period: usize,
        window: [usize; 2],
        state0: String,
        state1: String,
    },
    /// Continuous phases co-phased at the receiver.
    Focus {
        amp: f64,
    },
    /// Focusing phases rounded to the nearer of two states.
    #[serde(rename = "focus-1bit")]
    Focus1Bit {
        state0: String,
        state1: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    pub pt_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    pub gtgrgline_db: f64,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks placements, state references and that the coding can be built.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.ris.grid()?;
        self.ris.check_states()?;
        self.tx.placement("tx")?;
        self.rx.placement("rx")?;
        match &self.coding {
            CodingConfig::Uniform { state } => {
                self.ris.state(state, "coding.state")?;
            }
            CodingConfig::Stripe {
                state0,
                state1,
                period,
                window,
            } => {
                self.ris.state(state0, "coding.state0")?;
                self.ris.state(state1, "coding.state1")?;
                if window[0] > window[1] {
                    return Err(invalid("coding.window", "lower bound exceeds upper bound"));
                }
                if *period == 0 {
                    return Err(invalid("coding.period", "must be at least 1"));
                }
            }
            CodingConfig::Focus1Bit { state0, state1 } => {
                self.ris.state(state0, "coding.state0")?;
                self.ris.state(state1, "coding.state1")?;
            }
            CodingConfig::Focus { .. } => {}
        }
        self.map().map(|_| ())
    }

    pub fn grid(&self) -> Result<RisGrid, ConfigError> {
        self.ris.grid()
    }

    pub fn map(&self) -> Result<ReflectionMap, ConfigError> {
        let grid = self.grid()?;
        let field = |f: &str| format!("coding.{f}");
        let map = match &self.coding {
            CodingConfig::Uniform { state } => {
                uniform_coding(&grid, &self.ris.state(state, "coding.state")?)
            }
            CodingConfig::Stripe {
                period,
                window,
                state0,
                state1,
            } => stripe_coding(
                &grid,
                *period,
                window[0]..=window[1],
                &self.ris.state(state0, "coding.state0")?,
                &self.ris.state(state1, "coding.state1")?,
            )
            .map_err(|e| invalid(field("period"), e))?,
            CodingConfig::Focus { amp } => focusing_phases(
                &grid,
                &self.tx.position("tx")?,
                &self.rx.position("rx")?,
                *amp,
            )
            .map_err(|e| invalid(field("amp"), e))?,
            CodingConfig::Focus1Bit { state0, state1 } => {
                let focus = focusing_phases(
                    &grid,
                    &self.tx.position("tx")?,
                    &self.rx.position("rx")?,
                    1.0,
                )
                .map_err(|e| invalid("coding", e))?;
                quantize_1bit(
                    &focus,
                    &self.ris.state(state0, "coding.state0")?,
                    &self.ris.state(state1, "coding.state1")?,
                )
                .map_err(|e| invalid("coding", e))?
            }
        };
        Ok(map)
    }

    pub fn to_scenario(&self) -> Result<Scenario, ConfigError> {
        let tx = self.tx.placement("tx")?;
        let rx = self.rx.placement("rx")?;
        let s = Scenario::new(
            self.grid()?,
            self.map()?,
            tx,
            rx,
            dbm_to_watts(self.power.pt_dbm),
        )
        .map_err(|e| invalid("power.pt_dbm", e))?;
        match &self.calibration {
            Some(c) => s
                .with_calibrated_product(db_to_linear(c.gtgrgline_db))
                .map_err(|e| invalid("calibration.gtgrgline_db", e)),
            None => Ok(s),
        }
    }
}

impl RisConfig {
    fn grid(&self) -> Result<RisGrid, ConfigError> {
        for (name, v) in [
            ("dx_mm", self.dx_mm),
            ("dy_mm", self.dy_mm),
            ("f_ghz", self.f_ghz),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(
                    format!("ris.{name}"),
                    format!("must be positive, got {v}"),
                ));
            }
        }
        if self.n == 0 || self.m == 0 {
            return Err(invalid("ris", "N and M must be at least 1"));
        }
        RisGrid::new(
            self.n,
            self.m,
            self.dx_mm * 1e-3,
            self.dy_mm * 1e-3,
            self.f_ghz * 1e9,
        )
        .map_err(|e| invalid("ris", e))
    }

    fn check_states(&self) -> Result<(), ConfigError> {
        for (i, s) in self.states.iter().enumerate() {
            if self.states[..i].iter().any(|o| o.label == s.label) {
                return Err(invalid(
                    format!("ris.states[{i}].label"),
                    format!("duplicate label `{}`", s.label),
                ));
            }
            s.to_state()
                .map_err(|e| invalid(format!("ris.states[{i}]"), e))?;
        }
        Ok(())
    }

    fn state(&self, label: &str, field: &str) -> Result<CodingState, ConfigError> {
        let s = self
            .states
            .iter()
            .find(|s| s.label == label)
            .ok_or_else(|| invalid(field, format!("unknown state `{label}`")))?;
        s.to_state().map_err(|e| invalid(field, e))
    }
}

impl StateConfig {
    fn to_state(&self) -> ris_pathloss::Result<CodingState> {
        CodingState::new(self.label.clone(), self.amp, self.phase_deg.to_radians())
    }
}

impl TerminalConfig {
    pub fn spherical(d_m: f64, theta_deg: f64, phi_deg: f64, gain_db: f64) -> Self {
        Self {
            d_m: Some(d_m),
            theta_deg: Some(theta_deg),
            phi_deg: Some(phi_deg),
            xyz_m: None,
            gain_db,
        }
    }

    pub fn position(&self, field: &str) -> Result<Point3, ConfigError> {
        let spherical = [self.d_m, self.theta_deg, self.phi_deg];
        let p = match (self.xyz_m, spherical) {
            (Some([x, y, z]), [None, None, None]) => Point3::new(x, y, z),
            (None, [Some(d), Some(theta), phi]) => {
                spherical_to_cartesian(d, theta.to_radians(), phi.unwrap_or(0.0).to_radians())
                    .map_err(|e| invalid(field, e))?
            }
            (Some(_), _) => {
                return Err(invalid(
                    field,
                    "give either xyz_m or d_m/theta_deg/phi_deg, not both",
                ))
            }
            (None, _) => return Err(invalid(field, "needs d_m and theta_deg, or xyz_m")),
        };
        if !p.is_finite() || p.z <= 0.0 {
            return Err(invalid(field, "must lie in front of the surface (z > 0)"));
        }
        Ok(p)
    }

    pub fn placement(&self, field: &str) -> Result<TerminalPlacement, ConfigError> {
        TerminalPlacement::new(self.position(field)?, db_to_linear(self.gain_db))
            .map_err(|e| invalid(format!("{field}.gain_db"), e))
    }
}
