//! Plain-text instance and schedule files.
//!
//! Both formats are line oriented and whitespace separated. Lines starting
//! with `#` are comments. Every real number is written with 17 significant
//! digits so that a file read back reproduces the exact doubles.
//!
//! Instance:
//!
//! ```text
//! # wpcn-instance v1
//! # system seed bandwidth_hz p_hap_w p_max_w noise_density_w_per_hz beta_si
//! system 42 1.0000000000000000e6 ...
//! # user id x_m y_m h_down g_up demand_bits battery_j ps_saturation a_rate b_threshold
//! user 0 ...
//! ```
//!
//! Schedule:
//!
//! ```text
//! # wpcn-schedule v1
//! algorithm MPA
//! total_length_s 1.2345678901234567e-3
//! nodes_evaluated 36
//! # slot user_id start_s duration_s power_w energy_j
//! slot 3 0.0000000000000000e0 ...
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{EhParams, SystemParams, UserProfile};
use crate::netgen::Realization;
use crate::power::Allocation;
use crate::sched::{Algorithm, Schedule};

pub const INSTANCE_MAGIC: &str = "# wpcn-instance v1";
pub const SCHEDULE_MAGIC: &str = "# wpcn-schedule v1";

/// Format a double with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_field<T: FromStr>(tok: Option<&str>, line: usize, name: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing field '{name}'"),
    })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad value '{tok}' for field '{name}'"),
    })
}

/// Non-comment lines with their 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            None
        } else {
            Some((i + 1, l.split_whitespace().collect()))
        }
    })
}

impl Realization {
    pub fn to_text(&self) -> String {
        let s = &self.sys;
        let mut out = String::new();
        out.push_str(INSTANCE_MAGIC);
        out.push('\n');
        out.push_str("# system seed bandwidth_hz p_hap_w p_max_w noise_density_w_per_hz beta_si\n");
        let _ = writeln!(
            out,
            "system {} {} {} {} {} {}",
            self.seed,
            fmt_f64(s.bandwidth_hz),
            fmt_f64(s.p_hap_w),
            fmt_f64(s.p_max_w),
            fmt_f64(s.noise_density_w_per_hz),
            fmt_f64(s.beta_si)
        );
        out.push_str(
            "# user id x_m y_m h_down g_up demand_bits battery_j ps_saturation a_rate b_threshold\n",
        );
        for (u, (x, y)) in self.users.iter().zip(&self.positions) {
            let fields = [
                *x,
                *y,
                u.h_down,
                u.g_up,
                u.demand_bits,
                u.battery_j,
                u.eh.ps_saturation,
                u.eh.a_rate,
                u.eh.b_threshold,
            ];
            let _ = write!(out, "user {}", u.id);
            for f in fields {
                out.push(' ');
                out.push_str(&fmt_f64(f));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut sys = None;
        let mut seed = 0;
        let mut users = Vec::new();
        let mut positions = Vec::new();
        for (line, toks) in records(text) {
            let mut it = toks.iter().copied();
            match it.next() {
                Some("system") => {
                    if sys.is_some() {
                        return Err(Error::Parse {
                            line,
                            msg: "duplicate system row".into(),
                        });
                    }
                    seed = parse_field(it.next(), line, "seed")?;
                    let s = SystemParams {
                        bandwidth_hz: parse_field(it.next(), line, "bandwidth_hz")?,
                        p_hap_w: parse_field(it.next(), line, "p_hap_w")?,
                        p_max_w: parse_field(it.next(), line, "p_max_w")?,
                        noise_density_w_per_hz: parse_field(
                            it.next(),
                            line,
                            "noise_density_w_per_hz",
                        )?,
                        beta_si: parse_field(it.next(), line, "beta_si")?,
                    };
                    s.validate().map_err(|e| Error::Parse {
                        line,
                        msg: e.to_string(),
                    })?;
                    sys = Some(s);
                }
                Some("user") => {
                    let id = parse_field(it.next(), line, "id")?;
                    let x: f64 = parse_field(it.next(), line, "x_m")?;
                    let y: f64 = parse_field(it.next(), line, "y_m")?;
                    let u = UserProfile {
                        id,
                        h_down: parse_field(it.next(), line, "h_down")?,
                        g_up: parse_field(it.next(), line, "g_up")?,
                        demand_bits: parse_field(it.next(), line, "demand_bits")?,
                        battery_j: parse_field(it.next(), line, "battery_j")?,
                        eh: EhParams {
                            ps_saturation: parse_field(it.next(), line, "ps_saturation")?,
                            a_rate: parse_field(it.next(), line, "a_rate")?,
                            b_threshold: parse_field(it.next(), line, "b_threshold")?,
                        },
                    };
                    u.validate().map_err(|e| Error::Parse {
                        line,
                        msg: e.to_string(),
                    })?;
                    users.push(u);
                    positions.push((x, y));
                }
                Some(other) => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown record '{other}'"),
                    })
                }
                None => unreachable!("records() skips empty lines"),
            }
            if it.next().is_some() {
                return Err(Error::Parse {
                    line,
                    msg: "trailing fields".into(),
                });
            }
        }
        let sys = sys.ok_or(Error::Parse {
            line: 0,
            msg: "no system row".into(),
        })?;
        if users.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "no user rows".into(),
            });
        }
        Ok(Realization {
            users,
            sys,
            seed,
            positions,
        })
    }
}

/// A schedule as read back from a file. The algorithm tag is free text so
/// that hand-written schedules can be checked too.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleFile {
    pub algorithm: Option<String>,
    pub total_length_s: Option<f64>,
    pub nodes_evaluated: Option<u64>,
    pub allocations: Vec<Allocation>,
}

impl From<&Schedule> for ScheduleFile {
    fn from(s: &Schedule) -> Self {
        ScheduleFile {
            algorithm: Some(s.algorithm.tag().to_string()),
            total_length_s: Some(s.total_length_s),
            nodes_evaluated: s.nodes_evaluated,
            allocations: s.allocations.clone(),
        }
    }
}

impl ScheduleFile {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(SCHEDULE_MAGIC);
        out.push('\n');
        if let Some(a) = &self.algorithm {
            let _ = writeln!(out, "algorithm {a}");
        }
        if let Some(t) = self.total_length_s {
            let _ = writeln!(out, "total_length_s {}", fmt_f64(t));
        }
        if let Some(n) = self.nodes_evaluated {
            let _ = writeln!(out, "nodes_evaluated {n}");
        }
        out.push_str("# slot user_id start_s duration_s power_w energy_j\n");
        for a in &self.allocations {
            let _ = writeln!(
                out,
                "slot {} {} {} {} {}",
                a.user_id,
                fmt_f64(a.start_time_s),
                fmt_f64(a.duration_s),
                fmt_f64(a.power_w),
                fmt_f64(a.energy_used_j)
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut file = ScheduleFile {
            algorithm: None,
            total_length_s: None,
            nodes_evaluated: None,
            allocations: Vec::new(),
        };
        for (line, toks) in records(text) {
            let mut it = toks.iter().copied();
            match it.next() {
                Some("algorithm") => {
                    file.algorithm = Some(parse_field(it.next(), line, "algorithm")?);
                }
                Some("total_length_s") => {
                    file.total_length_s = Some(parse_field(it.next(), line, "total_length_s")?);
                }
                Some("nodes_evaluated") => {
                    file.nodes_evaluated = Some(parse_field(it.next(), line, "nodes_evaluated")?);
                }
                Some("slot") => file.allocations.push(Allocation {
                    user_id: parse_field(it.next(), line, "user_id")?,
                    start_time_s: parse_field(it.next(), line, "start_s")?,
                    duration_s: parse_field(it.next(), line, "duration_s")?,
                    power_w: parse_field(it.next(), line, "power_w")?,
                    energy_used_j: parse_field(it.next(), line, "energy_j")?,
                }),
                Some(other) => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown record '{other}'"),
                    })
                }
                None => unreachable!("records() skips empty lines"),
            }
            if it.next().is_some() {
                return Err(Error::Parse {
                    line,
                    msg: "trailing fields".into(),
                });
            }
        }
        Ok(file)
    }

    /// The algorithm tag, if it names a known algorithm.
    pub fn algorithm_tag(&self) -> Option<Algorithm> {
        self.algorithm.as_deref().and_then(|a| a.parse().ok())
    }
}
