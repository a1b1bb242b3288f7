//! Independent feasibility check of a schedule against its instance.
//!
//! Only the channel model is shared with the schedulers (harvest rate and
//! SINR gain); delivered bits and energy use are recomputed from the
//! recorded powers and durations.
//!
//! A schedule tagged `PCA` comes from the uncapped baseline and is checked
//! without the power cap.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use wpcn::instance::ScheduleFile;
use wpcn::{Algorithm, Realization};

use crate::error::{CliError, Result};

/// Relative slack allowed on every inequality.
pub const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    /// Every user exactly once, no unknown ids.
    Permutation,
    /// Slots back to back from time zero.
    Contiguity,
    /// Delivered bits cover the demand.
    Data,
    /// Energy spent does not exceed battery plus harvest up to slot end.
    Energy,
    /// Transmit power within `[0, P_max]`.
    PowerCap,
    /// Positive, finite slot durations.
    Duration,
    /// Recorded total matches the end of the last slot.
    TotalLength,
}

impl Constraint {
    pub fn name(&self) -> &'static str {
        match self {
            Constraint::Permutation => "permutation",
            Constraint::Contiguity => "contiguity",
            Constraint::Data => "data",
            Constraint::Energy => "energy",
            Constraint::PowerCap => "power-cap",
            Constraint::Duration => "duration",
            Constraint::TotalLength => "total-length",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: Constraint,
    pub user_id: Option<usize>,
    /// Relative excess for data, energy and power; seconds for timing;
    /// a count for permutation problems.
    pub residual: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FAIL {}", self.constraint.name())?;
        if let Some(u) = self.user_id {
            write!(f, " user {u}")?;
        }
        write!(f, " residual {:e}", self.residual)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub slots_checked: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, c: Constraint) -> bool {
        self.violations.iter().any(|v| v.constraint == c)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        if self.passed() {
            write!(f, "PASS {} slots", self.slots_checked)
        } else {
            write!(
                f,
                "FAIL {} violation(s) over {} slots",
                self.violations.len(),
                self.slots_checked
            )
        }
    }
}

pub fn validate_schedule(instance: &Realization, schedule: &ScheduleFile) -> ValidationReport {
    let sys = &instance.sys;
    let users: BTreeMap<usize, &wpcn::UserProfile> =
        instance.users.iter().map(|u| (u.id, u)).collect();
    let mut v = Vec::new();
    let mut fail = |constraint, user_id, residual| {
        v.push(Violation {
            constraint,
            user_id,
            residual,
        })
    };

    let capped = schedule.algorithm_tag() != Some(Algorithm::Pca);

    let mut seen = BTreeMap::new();
    for a in &schedule.allocations {
        *seen.entry(a.user_id).or_insert(0usize) += 1;
    }
    for (&id, &count) in &seen {
        if !users.contains_key(&id) {
            fail(Constraint::Permutation, Some(id), count as f64);
        } else if count > 1 {
            fail(Constraint::Permutation, Some(id), (count - 1) as f64);
        }
    }
    for &id in users.keys() {
        if !seen.contains_key(&id) {
            fail(Constraint::Permutation, Some(id), -1.0);
        }
    }

    let end = schedule
        .allocations
        .last()
        .map_or(0.0, |a| a.start_time_s + a.duration_s);
    let time_tol = REL_TOL * end.abs().max(f64::MIN_POSITIVE);
    let mut prev_end = 0.0;
    for a in &schedule.allocations {
        let id = Some(a.user_id);
        let gap = a.start_time_s - prev_end;
        if !(gap.abs() <= time_tol) {
            fail(Constraint::Contiguity, id, gap);
        }
        let slot_end = a.start_time_s + a.duration_s;
        prev_end = slot_end;
        if !(a.duration_s > 0.0 && a.duration_s.is_finite()) {
            fail(Constraint::Duration, id, a.duration_s);
            continue;
        }
        if !(a.power_w >= 0.0) || (capped && a.power_w > sys.p_max_w * (1.0 + REL_TOL)) {
            fail(
                Constraint::PowerCap,
                id,
                (a.power_w - sys.p_max_w) / sys.p_max_w,
            );
        }
        let Some(u) = users.get(&a.user_id) else {
            continue;
        };
        let k = u.g_up / sys.interference_plus_noise_w();
        let bits =
            a.duration_s * sys.bandwidth_hz * (k * a.power_w).ln_1p() / std::f64::consts::LN_2;
        let data = (bits - u.demand_bits) / u.demand_bits;
        if !(data >= -REL_TOL) {
            fail(Constraint::Data, id, data);
        }
        let avail = u.battery_j + u.harvest_rate(sys) * slot_end;
        let used = a.power_w * a.duration_s;
        let energy = if avail > 0.0 {
            (used - avail) / avail
        } else {
            used
        };
        if !(energy <= REL_TOL) {
            fail(Constraint::Energy, id, energy);
        }
    }
    if let Some(total) = schedule.total_length_s {
        let diff = total - end;
        if !(diff.abs() <= time_tol) {
            fail(Constraint::TotalLength, None, diff);
        }
    }
    ValidationReport {
        slots_checked: schedule.allocations.len(),
        violations: v,
    }
}

/// Read both files and validate.
pub fn validate_files(instance: &Path, schedule: &Path) -> Result<ValidationReport> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| CliError::io(p, e));
    let inst = Realization::from_text(&read(instance)?).map_err(CliError::Core)?;
    let sched = ScheduleFile::from_text(&read(schedule)?).map_err(CliError::Core)?;
    Ok(validate_schedule(&inst, &sched))
}
