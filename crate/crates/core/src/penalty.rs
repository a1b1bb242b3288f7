//! The penalty curve: how much longer than `t_min` a user's slot is when it
//! starts at time `s`.
//!
//! `rho(s) = e(s) - s - t_min`, where `e(s)` is the end of the slot. It is
//! non-increasing in `s`, starts at `rho_max = e(0) - t_min` and reaches zero
//! at the first start from which the user can afford `P_max`. For any fixed
//! order, `sum(tau) - sum(rho) = sum(t_min)`, so minimising total penalty and
//! minimising schedule length are the same problem.

use crate::error::{Error, Result};
use crate::model::{SystemParams, UserProfile};
use crate::power::Link;
use crate::ZERO_PENALTY_TOL;

/// A point on one user's penalty curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyPoint {
    pub start_time_s: f64,
    pub end_time_s: f64,
    pub penalty_s: f64,
    pub t_min_s: f64,
}

impl PenaltyPoint {
    pub fn is_zero(&self) -> bool {
        self.penalty_s <= ZERO_PENALTY_TOL
    }
}

impl Link {
    /// Slot length in excess of `t_min` when starting at `start_s`.
    ///
    /// Computed as `tau - t_min` rather than `e - s - t_min` so that a capped
    /// slot has exactly zero penalty.
    pub fn penalty_at(&self, start_s: f64) -> Result<f64> {
        let (_, tau) = self.closed_form(self.energy_at(start_s), true)?;
        Ok(tau - self.t_min_s)
    }

    pub fn penalty_point(&self, start_s: f64) -> Result<PenaltyPoint> {
        let (_, tau) = self.closed_form(self.energy_at(start_s), true)?;
        Ok(PenaltyPoint {
            start_time_s: start_s,
            end_time_s: start_s + tau,
            penalty_s: tau - self.t_min_s,
            t_min_s: self.t_min_s,
        })
    }

    /// Earliest start from which the user can transmit at `P_max`.
    ///
    /// Solves `battery + C s + C t_min = P_max t_min` for `s`.
    pub fn zero_penalty_start(&self) -> Result<f64> {
        let need = (self.p_max_w - self.harvest_w) * self.t_min_s - self.battery_j;
        if need <= 0.0 {
            return Ok(0.0);
        }
        if self.harvest_w == 0.0 {
            return Err(Error::NeverAffordable {
                user_id: self.user_id,
            });
        }
        Ok(need / self.harvest_w)
    }
}

/// End of the slot of a user that starts transmitting at `start_s`.
pub fn end_time(user: &UserProfile, sys: &SystemParams, start_s: f64) -> Result<f64> {
    Link::new(user, sys)
        .penalty_point(start_s)
        .map(|p| p.end_time_s)
}

/// `rho(start_s)` for one user.
pub fn penalty(user: &UserProfile, sys: &SystemParams, start_s: f64) -> Result<f64> {
    Link::new(user, sys).penalty_at(start_s)
}

pub fn penalty_point(user: &UserProfile, sys: &SystemParams, start_s: f64) -> Result<PenaltyPoint> {
    Link::new(user, sys).penalty_point(start_s)
}

/// Largest penalty the user can incur, i.e. when it transmits first.
pub fn max_penalty(user: &UserProfile, sys: &SystemParams) -> Result<f64> {
    penalty(user, sys, 0.0)
}

/// Earliest start time with zero penalty. See [`Link::zero_penalty_start`].
pub fn zero_penalty_start(user: &UserProfile, sys: &SystemParams) -> Result<f64> {
    Link::new(user, sys).zero_penalty_start()
}
