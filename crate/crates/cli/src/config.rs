//! Line-oriented `key = value` configuration files.
//!
//! Unspecified keys fall back to the standard scenario defaults (16x16
//! arrays, 6 clusters of 8 rays with 20 degrees spread, half-wavelength
//! pitch, 2-wavelength array separation at pi/6, 5 dB Rician factor, 0 dB SI
//! power, 5 dB SNR, step size 1, threshold 1e-5, 1000 trials). `#` starts a
//! comment; errors carry the offending line number.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use fdbeam_core::channel::{ClusterParams, RicianParams};
use fdbeam_core::montecarlo::{ExperimentConfig, ScenarioKind, SiSpec, SweepVariable};
use fdbeam_core::optimizer::{Constraint, InitScheme, OptimizerConfig};
use fdbeam_core::relay::DuplexMode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}`: {message}")]
    InvalidValue { line: usize, key: String, message: String },
    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },
}

/// Parsed simulation configuration; one field per config key.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_clusters: usize,
    pub n_rays: usize,
    pub angular_spread_deg: f64,
    pub spacing_lambda: f64,
    pub separation_lambda: f64,
    pub array_angle_rad: f64,
    pub kappa_db: f64,
    pub snr_db: f64,
    /// When present, the SI power is tied to the signal power
    /// (tau = rho * 10^(-sir/10)) and overrides `si_power_db`.
    pub sir_db: Option<f64>,
    pub si_power_db: f64,
    pub step0: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    pub constraint: Constraint,
    pub init: InitScheme,
    pub trials: usize,
    pub scenario: ScenarioKind,
    pub relay_n: usize,
    pub ue_tx: usize,
    pub ue_rx: usize,
    explicit: BTreeSet<String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            n_tx: 16,
            n_rx: 16,
            n_clusters: 6,
            n_rays: 8,
            angular_spread_deg: 20.0,
            spacing_lambda: 0.5,
            separation_lambda: 2.0,
            array_angle_rad: PI / 6.0,
            kappa_db: 5.0,
            snr_db: 5.0,
            sir_db: None,
            si_power_db: 0.0,
            step0: 1.0,
            epsilon: 1e-5,
            max_iters: 20000,
            constraint: Constraint::ConstantAmplitude,
            init: InitScheme::Svd,
            trials: 1000,
            scenario: ScenarioKind::TwoNode,
            relay_n: 4,
            ue_tx: 2,
            ue_rx: 1,
            explicit: BTreeSet::new(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| ConfigError::InvalidValue {
        line,
        key: key.to_string(),
        message: format!("cannot parse `{value}`: {e}"),
    })
}

fn invalid(line: usize, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue { line, key: key.to_string(), message: message.into() }
}

/// Parses a configuration file, validating each key as it is read.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let mut cfg = Config::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Malformed { line });
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "n_tx" => {
                cfg.n_tx = parse_num(line, key, value)?;
                if cfg.n_tx < 1 {
                    return Err(invalid(line, key, "must be >= 1"));
                }
            }
            "n_rx" => {
                cfg.n_rx = parse_num(line, key, value)?;
                if cfg.n_rx < 1 {
                    return Err(invalid(line, key, "must be >= 1"));
                }
            }
            "n_clusters" => {
                cfg.n_clusters = parse_num(line, key, value)?;
                if cfg.n_clusters < 1 {
                    return Err(invalid(line, key, "must be >= 1"));
                }
            }
            "n_rays" => {
                cfg.n_rays = parse_num(line, key, value)?;
                if cfg.n_rays < 1 {
                    return Err(invalid(line, key, "must be >= 1"));
                }
            }
            "angular_spread_deg" => {
                cfg.angular_spread_deg = parse_num(line, key, value)?;
                let ok = cfg.angular_spread_deg.is_finite()
                    && cfg.angular_spread_deg > 0.0
                    && cfg.angular_spread_deg < 180.0;
                if !ok {
                    return Err(invalid(line, key, "must lie in (0, 180)"));
                }
            }
            "spacing_lambda" => {
                cfg.spacing_lambda = parse_num(line, key, value)?;
                let ok = cfg.spacing_lambda.is_finite() && cfg.spacing_lambda > 0.0;
                if !ok {
                    return Err(invalid(line, key, "must be > 0"));
                }
            }
            "separation_lambda" => {
                cfg.separation_lambda = parse_num(line, key, value)?;
                let ok = cfg.separation_lambda.is_finite() && cfg.separation_lambda > 0.0;
                if !ok {
                    return Err(invalid(line, key, "must be > 0"));
                }
            }
            "array_angle_rad" => {
                cfg.array_angle_rad = parse_num(line, key, value)?;
                if !(0.0..=PI).contains(&cfg.array_angle_rad) {
                    return Err(invalid(line, key, "must lie in [0, pi]"));
                }
            }
            "kappa_db" => cfg.kappa_db = parse_num(line, key, value)?,
            "snr_db" => cfg.snr_db = parse_num(line, key, value)?,
            "sir_db" => cfg.sir_db = Some(parse_num(line, key, value)?),
            "si_power_db" => cfg.si_power_db = parse_num(line, key, value)?,
            "step0" => {
                cfg.step0 = parse_num(line, key, value)?;
                let ok = cfg.step0.is_finite() && cfg.step0 > 0.0;
                if !ok {
                    return Err(invalid(line, key, "must be > 0"));
                }
            }
            "epsilon" => {
                cfg.epsilon = parse_num(line, key, value)?;
                let ok = cfg.epsilon.is_finite() && cfg.epsilon > 0.0;
                if !ok {
                    return Err(invalid(line, key, "must be > 0"));
                }
            }
            "max_iters" => {
                cfg.max_iters = parse_num(line, key, value)?;
                if cfg.max_iters < 1 {
                    return Err(invalid(line, key, "must be >= 1"));
                }
            }
            "constraint" => {
                cfg.constraint = match value {
                    "unit_norm" => Constraint::UnitNorm,
                    "constant_amplitude" => Constraint::ConstantAmplitude,
                    other => {
                        return Err(invalid(
                            line,
                            key,
                            format!("`{other}` is not one of unit_norm, constant_amplitude"),
                        ))
                    }
                };
            }
            "init" => {
                cfg.init = match value {
                    "gaussian" => InitScheme::Gaussian,
                    "svd" => InitScheme::Svd,
                    other => {
                        return Err(invalid(line, key, format!("`{other}` is not one of gaussian, svd")))
                    }
                };
            }
            "trials" => {
                cfg.trials = parse_num(line, key, value)?;
                if cfg.trials < 1 {
                    return Err(invalid(line, key, "must be >= 1"));
                }
            }
            "scenario" => {
                cfg.scenario = match value {
                    "two_node" => ScenarioKind::TwoNode,
                    "relay" => ScenarioKind::Relay,
                    other => {
                        return Err(invalid(line, key, format!("`{other}` is not one of two_node, relay")))
                    }
                };
            }
            "relay_n" => {
                cfg.relay_n = parse_num(line, key, value)?;
                if cfg.relay_n < 1 {
                    return Err(invalid(line, key, "must be >= 1"));
                }
            }
            "ue_tx" => {
                cfg.ue_tx = parse_num(line, key, value)?;
                if cfg.ue_tx < 1 {
                    return Err(invalid(line, key, "must be >= 1"));
                }
            }
            "ue_rx" => {
                cfg.ue_rx = parse_num(line, key, value)?;
                if cfg.ue_rx < 1 {
                    return Err(invalid(line, key, "must be >= 1"));
                }
            }
            other => return Err(ConfigError::UnknownKey { line, key: other.to_string() }),
        }
        cfg.explicit.insert(key.to_string());
    }
    Ok(cfg)
}

impl Config {
    /// Whether the key appeared in the parsed file (as opposed to a default).
    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    /// Serializes back to the file format; parsing the output reproduces
    /// every value.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut push = |key: &str, value: String| {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        };
        push("scenario", match self.scenario {
            ScenarioKind::TwoNode => "two_node".into(),
            ScenarioKind::Relay => "relay".into(),
        });
        push("n_tx", self.n_tx.to_string());
        push("n_rx", self.n_rx.to_string());
        push("relay_n", self.relay_n.to_string());
        push("ue_tx", self.ue_tx.to_string());
        push("ue_rx", self.ue_rx.to_string());
        push("n_clusters", self.n_clusters.to_string());
        push("n_rays", self.n_rays.to_string());
        push("angular_spread_deg", self.angular_spread_deg.to_string());
        push("spacing_lambda", self.spacing_lambda.to_string());
        push("separation_lambda", self.separation_lambda.to_string());
        push("array_angle_rad", self.array_angle_rad.to_string());
        push("kappa_db", self.kappa_db.to_string());
        push("snr_db", self.snr_db.to_string());
        if let Some(sir) = self.sir_db {
            push("sir_db", sir.to_string());
        }
        push("si_power_db", self.si_power_db.to_string());
        push("step0", self.step0.to_string());
        push("epsilon", self.epsilon.to_string());
        push("max_iters", self.max_iters.to_string());
        push("constraint", match self.constraint {
            Constraint::UnitNorm => "unit_norm".into(),
            Constraint::ConstantAmplitude => "constant_amplitude".into(),
        });
        push("init", self.init.name().to_string());
        push("trials", self.trials.to_string());
        out
    }

    /// Builds the base experiment description; the sweep and grid are
    /// placeholders for the experiment definitions to override.
    pub fn base_experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            scenario: self.scenario,
            n_tx: self.n_tx,
            n_rx: self.n_rx,
            relay_n: self.relay_n,
            ue_tx: self.ue_tx,
            ue_rx: self.ue_rx,
            clusters: ClusterParams::new(
                self.n_clusters,
                self.n_rays,
                self.angular_spread_deg.to_radians(),
            )
            .expect("validated at parse time"),
            rician: RicianParams::from_db(self.kappa_db),
            spacing: self.spacing_lambda,
            separation: self.separation_lambda,
            array_angle: self.array_angle_rad,
            snr_db: self.snr_db,
            si: match self.sir_db {
                Some(db) => SiSpec::SirDb(db),
                None => SiSpec::PowerDb(self.si_power_db),
            },
            optimizer: OptimizerConfig {
                step0: self.step0,
                epsilon: self.epsilon,
                max_iters: self.max_iters,
                init: self.init,
                constraint: self.constraint,
                accept_descent: false,
            },
            duplex: DuplexMode::FullDuplex,
            sweep: SweepVariable::SnrDb,
            grid: vec![self.snr_db],
            trials: self.trials,
            master_seed: 1,
        }
    }
}
