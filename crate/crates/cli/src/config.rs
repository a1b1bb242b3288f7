//! Sweep configuration: a flat JSON object. Every key is optional and
//! falls back to the defaults below.
//!
//! ```json
//! {
//!   "sweep_variable": "p_hap",
//!   "values": [1, 3, 10, 30, 100],
//!   "realizations": 100,
//!   "algorithms": ["MPA", "MTPA", "FPA", "OTPA", "PCA"],
//!   "p_max_w": 0.001
//! }
//! ```

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use wpcn::netgen::TopologyParams;
use wpcn::{Algorithm, EhParams, SearchCaps, SystemParams, UserTemplate};

use crate::error::{CliError, ConfigError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    PMax,
    PHap,
    NUsers,
    Battery,
    Beta,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::PMax => "p_max",
            SweepVariable::PHap => "p_hap",
            SweepVariable::NUsers => "n_users",
            SweepVariable::Battery => "battery",
            SweepVariable::Beta => "beta",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub sweep_variable: SweepVariable,
    pub values: Vec<f64>,
    pub realizations: usize,
    pub algorithms: Vec<String>,
    /// Realization `r` of every sweep point uses seed `seed + r`.
    pub seed: u64,
    pub n_users: usize,

    pub bandwidth_hz: f64,
    pub p_hap_w: f64,
    pub p_max_w: f64,
    pub noise_density_w_per_hz: f64,
    pub beta_si: f64,

    pub radius_m: f64,
    pub pl_d0_db: f64,
    pub d0_m: f64,
    pub alpha_exponent: f64,
    pub sigma_shadow_db: f64,
    pub rayleigh_enabled: bool,

    pub demand_bits: f64,
    pub battery_j: f64,
    pub ps_saturation: f64,
    pub a_rate: f64,
    pub b_threshold: f64,

    pub fpa_cap: usize,
    pub bfa_cap: usize,
}

impl Default for Config {
    fn default() -> Self {
        let sys = SystemParams::default();
        let topo = TopologyParams::default();
        let user = UserTemplate::default();
        let caps = SearchCaps::default();
        Config {
            sweep_variable: SweepVariable::PHap,
            values: vec![1.0, 3.0, 10.0, 30.0, 100.0],
            realizations: 100,
            algorithms: ["MPA", "MTPA", "FPA", "OTPA", "PCA"]
                .map(String::from)
                .to_vec(),
            seed: 0,
            n_users: topo.n_users,
            bandwidth_hz: sys.bandwidth_hz,
            p_hap_w: sys.p_hap_w,
            p_max_w: sys.p_max_w,
            noise_density_w_per_hz: sys.noise_density_w_per_hz,
            beta_si: sys.beta_si,
            radius_m: topo.radius_m,
            pl_d0_db: topo.pl_d0_db,
            d0_m: topo.d0_m,
            alpha_exponent: topo.alpha_exponent,
            sigma_shadow_db: topo.sigma_shadow_db,
            rayleigh_enabled: topo.rayleigh_enabled,
            demand_bits: user.demand_bits,
            battery_j: user.battery_j,
            ps_saturation: user.eh.ps_saturation,
            a_rate: user.eh.a_rate,
            b_threshold: user.eh.b_threshold,
            fpa_cap: caps.fpa,
            bfa_cap: caps.bfa,
        }
    }
}

/// 1-based line of the first occurrence of `"key"` in `text`.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&quoted))
        .map(|i| i + 1)
}

fn field_error(text: &str, field: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError {
        line: key_line(text, field),
        field: Some(field.to_string()),
        msg: msg.into(),
    }
}

/// Pull the offending key out of a serde message such as
/// "unknown field `foo`, expected ...".
fn backticked(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}

impl FromStr for Config {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let field = if msg.starts_with("unknown field") || msg.starts_with("invalid type") {
                backticked(&msg).filter(|f| !f.contains(' '))
            } else {
                None
            };
            ConfigError {
                line: Some(e.line()).filter(|&l| l > 0),
                field,
                msg,
            }
        })?;
        cfg.check(text)?;
        Ok(cfg)
    }
}

impl Config {
    pub fn load(path: &Path) -> crate::error::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(text.parse()?)
    }

    pub fn algorithms(&self) -> Result<Vec<Algorithm>, ConfigError> {
        self.algorithms
            .iter()
            .map(|a| {
                a.parse().map_err(|_| ConfigError {
                    line: None,
                    field: Some("algorithms".into()),
                    msg: format!("unknown algorithm '{a}'"),
                })
            })
            .collect()
    }

    pub fn caps(&self) -> SearchCaps {
        SearchCaps {
            fpa: self.fpa_cap,
            bfa: self.bfa_cap,
        }
    }

    /// Largest number of users any sweep point will have.
    pub fn max_users(&self) -> usize {
        match self.sweep_variable {
            SweepVariable::NUsers => self.values.iter().fold(0.0f64, |m, v| m.max(*v)) as usize,
            _ => self.n_users,
        }
    }

    /// Validate semantics; `text` is only used to locate offending keys.
    pub fn check(&self, text: &str) -> Result<(), ConfigError> {
        if self.values.is_empty() {
            return Err(field_error(text, "values", "must not be empty"));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(field_error(text, "values", format!("non-finite value {v}")));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(field_error(text, "values", "must be strictly increasing"));
        }
        if self.sweep_variable == SweepVariable::NUsers
            && self.values.iter().any(|v| *v < 1.0 || v.fract() != 0.0)
        {
            return Err(field_error(
                text,
                "values",
                "n_users values must be positive integers",
            ));
        }
        if self.realizations == 0 {
            return Err(field_error(text, "realizations", "must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(field_error(text, "algorithms", "must not be empty"));
        }
        let algs = self.algorithms().map_err(|mut e| {
            e.line = key_line(text, "algorithms");
            e
        })?;
        let n = self.max_users();
        if algs.contains(&Algorithm::Fpa) && n > self.fpa_cap {
            return Err(field_error(
                text,
                "algorithms",
                format!("FPA needs n_users <= fpa_cap ({} > {})", n, self.fpa_cap),
            ));
        }
        if algs.contains(&Algorithm::Bfa) && n > self.bfa_cap {
            return Err(field_error(
                text,
                "algorithms",
                format!("BFA needs n_users <= bfa_cap ({} > {})", n, self.bfa_cap),
            ));
        }
        // Check every sweep point builds valid model parameters.
        for v in &self.values {
            let p = self.point(*v);
            let field = match self.sweep_variable {
                SweepVariable::PMax => "p_max_w",
                SweepVariable::PHap => "p_hap_w",
                SweepVariable::NUsers => "n_users",
                SweepVariable::Battery => "battery_j",
                SweepVariable::Beta => "beta_si",
            };
            let checks = [
                p.sys.validate(),
                p.topology(0).validate(),
                wpcn::UserProfile {
                    id: 0,
                    h_down: 1.0,
                    g_up: 1.0,
                    demand_bits: p.user.demand_bits,
                    battery_j: p.user.battery_j,
                    eh: p.user.eh,
                }
                .validate(),
            ];
            for c in checks {
                if let Err(e) = c {
                    let msg = format!("at sweep value {v}: {e}");
                    return Err(ConfigError {
                        line: key_line(text, field).or_else(|| key_line(text, "values")),
                        field: None,
                        msg,
                    });
                }
            }
        }
        Ok(())
    }

    /// Model parameters at one sweep value.
    pub fn point(&self, value: f64) -> PointParams {
        let mut sys = SystemParams {
            bandwidth_hz: self.bandwidth_hz,
            p_hap_w: self.p_hap_w,
            p_max_w: self.p_max_w,
            noise_density_w_per_hz: self.noise_density_w_per_hz,
            beta_si: self.beta_si,
        };
        let mut user = UserTemplate {
            demand_bits: self.demand_bits,
            battery_j: self.battery_j,
            eh: EhParams {
                ps_saturation: self.ps_saturation,
                a_rate: self.a_rate,
                b_threshold: self.b_threshold,
            },
        };
        let mut n_users = self.n_users;
        match self.sweep_variable {
            SweepVariable::PMax => sys.p_max_w = value,
            SweepVariable::PHap => sys.p_hap_w = value,
            SweepVariable::NUsers => n_users = value as usize,
            SweepVariable::Battery => user.battery_j = value,
            SweepVariable::Beta => sys.beta_si = value,
        }
        PointParams {
            sys,
            user,
            n_users,
            radius_m: self.radius_m,
            pl_d0_db: self.pl_d0_db,
            d0_m: self.d0_m,
            alpha_exponent: self.alpha_exponent,
            sigma_shadow_db: self.sigma_shadow_db,
            rayleigh_enabled: self.rayleigh_enabled,
        }
    }

    /// Parameters for a single instance, ignoring the sweep.
    pub fn base_point(&self) -> PointParams {
        let mut fixed = self.clone();
        fixed.sweep_variable = SweepVariable::PHap;
        fixed.point(self.p_hap_w)
    }
}

/// Everything needed to draw a realization at one sweep value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointParams {
    pub sys: SystemParams,
    pub user: UserTemplate,
    pub n_users: usize,
    pub radius_m: f64,
    pub pl_d0_db: f64,
    pub d0_m: f64,
    pub alpha_exponent: f64,
    pub sigma_shadow_db: f64,
    pub rayleigh_enabled: bool,
}

impl PointParams {
    pub fn topology(&self, seed: u64) -> TopologyParams {
        TopologyParams {
            n_users: self.n_users,
            radius_m: self.radius_m,
            pl_d0_db: self.pl_d0_db,
            d0_m: self.d0_m,
            alpha_exponent: self.alpha_exponent,
            sigma_shadow_db: self.sigma_shadow_db,
            rayleigh_enabled: self.rayleigh_enabled,
            seed,
        }
    }

    pub fn realization(&self, seed: u64) -> wpcn::Result<wpcn::Realization> {
        wpcn::netgen::generate(&self.topology(seed), &self.sys, &self.user)
    }
}
