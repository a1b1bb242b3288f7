//! Optimal transmit power and slot duration for one user, and evaluation of
//! whole schedules in a fixed transmission order.
//!
//! At its slot a user either transmits at `P_max` or spends everything it
//! holds: the data constraint is always tight, and exactly one of the power
//! cap and energy causality binds. When energy binds, the power solves
//!
//! ```text
//! P tau = eps + C tau,     W tau log2(1 + k P) = D
//! ```
//!
//! whose solution is expressed through the lower Lambert branch:
//!
//! ```text
//! P* = -1/k - (W eps / (D ln 2)) W( -(D ln 2 / (W k eps)) e^v ),
//! v  = -C D ln 2 / (W eps) - D ln 2 / (W k eps)
//! ```
//!
//! With `a = D ln 2 / (W k eps)` the argument is `-a e^{-a (1 + k C)}`, which
//! underflows for energy-starved users and makes `-1/k - ...` cancel. The
//! implementation therefore asks the Lambert solver for `W - v` directly and
//! uses the algebraically identical `P* = C + u / (a k)` with `u = v - W`.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::lambert::{lambert_w_self_offset, Branch};
use crate::model::{shannon_rate, SystemParams, UserProfile};
use crate::sched::{Algorithm, Schedule};

/// Residual tolerance for accepting a closed-form candidate.
const RESIDUAL_TOL: f64 = 1e-9;

/// Upper bound on the slot search of the bisection oracle, seconds.
const ORACLE_MAX_DURATION: f64 = 1e9;

/// Energy available to a user at the start of its slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartState {
    pub start_time_s: f64,
    /// Battery plus everything harvested since the frame began.
    pub energy_avail_j: f64,
}

impl StartState {
    pub fn at(user: &UserProfile, sys: &SystemParams, start_time_s: f64) -> Self {
        StartState {
            start_time_s,
            energy_avail_j: user.energy_at(sys, start_time_s),
        }
    }
}

/// One user's slot in a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub user_id: usize,
    pub start_time_s: f64,
    pub duration_s: f64,
    pub power_w: f64,
    /// `power_w * duration_s`
    pub energy_used_j: f64,
}

impl Allocation {
    pub fn end_time_s(&self) -> f64 {
        self.start_time_s + self.duration_s
    }
}

/// Per-user constants the power law needs, resolved once against the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub user_id: usize,
    /// `C_i`, watts.
    pub harvest_w: f64,
    /// `k_i`, 1/W.
    pub gain_per_w: f64,
    pub demand_bits: f64,
    pub battery_j: f64,
    pub bandwidth_hz: f64,
    pub p_max_w: f64,
    /// Slot duration at `P_max`.
    pub t_min_s: f64,
}

impl Link {
    pub fn new(user: &UserProfile, sys: &SystemParams) -> Self {
        let mut link = Link {
            user_id: user.id,
            harvest_w: user.harvest_rate(sys),
            gain_per_w: user.sinr_gain(sys),
            demand_bits: user.demand_bits,
            battery_j: user.battery_j,
            bandwidth_hz: sys.bandwidth_hz,
            p_max_w: sys.p_max_w,
            t_min_s: 0.0,
        };
        link.t_min_s = link.duration_at_power(sys.p_max_w);
        link
    }

    pub fn energy_at(&self, start_s: f64) -> f64 {
        self.battery_j + self.harvest_w * start_s
    }

    /// Time to deliver the demand at constant power `p`.
    pub fn duration_at_power(&self, p: f64) -> f64 {
        self.demand_bits / shannon_rate(self.bandwidth_hz, self.gain_per_w, p)
    }

    fn infeasible(&self) -> Error {
        Error::InfeasibleUser {
            user_id: self.user_id,
            position: None,
        }
    }

    /// `D ln 2 / (W k)`: energy needed with no harvesting as `P -> 0`. With
    /// `C = 0` the user is feasible only while holding strictly more than this.
    fn min_energy_without_harvest(&self) -> f64 {
        self.demand_bits * LN_2 / (self.bandwidth_hz * self.gain_per_w)
    }

    /// Closed-form `(power, duration)` for available energy `energy_j`.
    ///
    /// With `capped` the power is `min(P_max, P*)`; otherwise `P*`.
    pub fn closed_form(&self, energy_j: f64, capped: bool) -> Result<(f64, f64)> {
        let p_star = self.energy_limited_power(energy_j)?;
        let power = if capped {
            p_star.min(self.p_max_w)
        } else {
            p_star
        };
        Ok((power, self.duration_at_power(power)))
    }

    /// `P*`: the largest power for which energy causality holds with equality.
    fn energy_limited_power(&self, eps: f64) -> Result<f64> {
        let c = self.harvest_w;
        let k = self.gain_per_w;
        if c == 0.0 && eps <= self.min_energy_without_harvest() {
            return Err(self.infeasible());
        }
        if eps == 0.0 {
            // Limit eps -> 0: the user can only spend what it harvests.
            return Ok(c);
        }

        let a = self.min_energy_without_harvest() / eps;
        let kc = k * c;
        let mut last = String::from("no branch evaluated");
        for branch in [Branch::Lower, Branch::Principal] {
            let d = match lambert_w_self_offset(-a, kc, branch) {
                Ok(d) => d,
                Err(e) => {
                    last = e.to_string();
                    continue;
                }
            };
            let u = -d;
            if !(u > 0.0 && u.is_finite()) {
                last = format!("{branch:?} branch gives non-positive rate exponent {u}");
                continue;
            }
            let p = c + u / (a * k);
            let tau = self.duration_at_power(p);
            match self.residuals(eps, p, tau) {
                Some((data, energy)) if data <= RESIDUAL_TOL && energy <= RESIDUAL_TOL => {
                    return Ok(p)
                }
                Some((data, energy)) => {
                    last = format!("{branch:?} branch residuals data={data:e} energy={energy:e}");
                }
                None => last = format!("{branch:?} branch gives P={p}, tau={tau}"),
            }
        }
        Err(Error::Numerical {
            user_id: self.user_id,
            detail: last,
        })
    }

    /// Relative residuals of the data and energy equalities, or `None` when
    /// `(p, tau)` is not a positive finite pair.
    fn residuals(&self, eps: f64, p: f64, tau: f64) -> Option<(f64, f64)> {
        if !(p > 0.0 && tau > 0.0 && p.is_finite() && tau.is_finite()) {
            return None;
        }
        let bits = tau * shannon_rate(self.bandwidth_hz, self.gain_per_w, p);
        let data = (bits - self.demand_bits).abs() / self.demand_bits;
        let avail = eps + self.harvest_w * tau;
        let energy = (p * tau - avail).abs() / avail;
        Some((data, energy))
    }

    /// Independent solution of the binding system by bisection on the slot
    /// duration. Used to cross-check [`Link::closed_form`].
    pub fn bisection(&self, energy_j: f64, capped: bool) -> Result<(f64, f64)> {
        let eps = energy_j;
        let c = self.harvest_w;
        let k = self.gain_per_w;
        let w = self.bandwidth_hz;
        let d = self.demand_bits;
        if eps == 0.0 && c == 0.0 {
            return Err(self.infeasible());
        }
        // surplus energy at slot length tau when spending at the rate the
        // data constraint demands
        let f = |tau: f64| eps + c * tau - tau * (d * LN_2 / (w * tau)).exp_m1() / k;

        let t_min = self.t_min_s;
        if capped && f(t_min) >= 0.0 {
            return Ok((self.p_max_w, t_min));
        }
        let mut lo = if t_min > 0.0 && t_min.is_finite() {
            t_min
        } else {
            1.0
        };
        while f(lo) >= 0.0 {
            lo *= 0.5;
        }
        let mut hi = lo;
        while f(hi) < 0.0 {
            hi *= 2.0;
            if hi > ORACLE_MAX_DURATION {
                return Err(self.infeasible());
            }
        }
        lo = lo.max(hi * 0.5);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let tau = 0.5 * (lo + hi);
        Ok((c + eps / tau, tau))
    }

    /// Allocate this user a slot starting at `start_s`.
    pub fn allocate(&self, start_s: f64, capped: bool) -> Result<Allocation> {
        let (power_w, duration_s) = self.closed_form(self.energy_at(start_s), capped)?;
        Ok(Allocation {
            user_id: self.user_id,
            start_time_s: start_s,
            duration_s,
            power_w,
            energy_used_j: power_w * duration_s,
        })
    }
}

/// Optimal `(power_w, duration_s)` for a user given its start state.
pub fn optimal_power(
    user: &UserProfile,
    sys: &SystemParams,
    state: &StartState,
) -> Result<(f64, f64)> {
    Link::new(user, sys).closed_form(state.energy_avail_j, true)
}

/// Like [`optimal_power`] but without the `P_max` cap.
pub fn optimal_power_uncapped(
    user: &UserProfile,
    sys: &SystemParams,
    state: &StartState,
) -> Result<(f64, f64)> {
    Link::new(user, sys).closed_form(state.energy_avail_j, false)
}

/// Bisection cross-check for [`optimal_power`].
pub fn bisection_oracle(
    user: &UserProfile,
    sys: &SystemParams,
    state: &StartState,
) -> Result<(f64, f64)> {
    Link::new(user, sys).bisection(state.energy_avail_j, true)
}

pub(crate) fn links(users: &[UserProfile], sys: &SystemParams) -> Result<Vec<Link>> {
    if users.is_empty() {
        return Err(Error::InvalidParameter("no users to schedule".into()));
    }
    let mut ids: Vec<usize> = users.iter().map(|u| u.id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("duplicate user ids".into()));
    }
    Ok(users.iter().map(|u| Link::new(u, sys)).collect())
}

/// Walk `links` in order, each slot starting where the previous one ended.
pub(crate) fn walk_order<'a>(
    links: impl IntoIterator<Item = &'a Link>,
    capped: bool,
    algorithm: Algorithm,
) -> Result<Schedule> {
    let mut t = 0.0;
    let mut allocations = Vec::new();
    let mut t_mins = Vec::new();
    for (pos, link) in links.into_iter().enumerate() {
        let a = link.allocate(t, capped).map_err(|e| e.at_position(pos))?;
        t += a.duration_s;
        allocations.push(a);
        t_mins.push(link.t_min_s);
    }
    Ok(Schedule::from_allocations(algorithm, allocations, &t_mins))
}

/// Optimal power and time allocation for a given transmission order.
pub fn evaluate_order(users: &[UserProfile], sys: &SystemParams) -> Result<Schedule> {
    let links = links(users, sys)?;
    walk_order(&links, true, Algorithm::Otpa)
}

/// [`evaluate_order`] without the transmit power cap.
pub fn evaluate_order_pca(users: &[UserProfile], sys: &SystemParams) -> Result<Schedule> {
    let links = links(users, sys)?;
    walk_order(&links, false, Algorithm::Pca)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EhParams;

    /// Link with the given `(eps is supplied separately) C, k, D`, W = 1 MHz.
    fn link(c: f64, k: f64, d: f64, p_max: f64) -> Link {
        let mut l = Link {
            user_id: 7,
            harvest_w: c,
            gain_per_w: k,
            demand_bits: d,
            battery_j: 0.0,
            bandwidth_hz: 1e6,
            p_max_w: p_max,
            t_min_s: 0.0,
        };
        l.t_min_s = l.duration_at_power(p_max);
        l
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn matches_extended_precision_reference() {
        // eps = 1e-9 J, C = 1e-6 W, k = 1e4 /W, D = 100 bits; 50-digit values.
        let l = link(1e-6, 1e4, 100.0, f64::INFINITY);
        let (p, tau) = l.closed_form(1e-9, false).unwrap();
        assert!(rel(tau, 0.005_971_854_344_196_492_5) < 1e-12, "{tau}");
        assert!(rel(p, 1.167_452_175_214_522_8e-6) < 1e-12, "{p}");
        let (po, to) = l.bisection(1e-9, false).unwrap();
        assert!(rel(p, po) < 1e-9 && rel(tau, to) < 1e-9);
    }

    #[test]
    fn cap_binds_with_large_battery() {
        let l = link(0.0, 1e4, 100.0, 1e-3);
        let need = 1e-3 * l.t_min_s;
        let (p, tau) = l.closed_form(need * 1.5, true).unwrap();
        assert_eq!(p, 1e-3);
        assert_eq!(tau, l.t_min_s);
        assert_eq!(l.bisection(need * 1.5, true).unwrap(), (1e-3, l.t_min_s));
    }

    #[test]
    fn energy_equality_when_uncapped() {
        let l = link(2e-7, 30.0, 100.0, f64::INFINITY);
        for d in [1.0, 10.0, 100.0, 1e4] {
            let l = Link {
                demand_bits: d,
                ..l
            };
            let eps = 3e-9;
            let (p, tau) = l.closed_form(eps, true).unwrap();
            assert!(rel(p * tau, eps + l.harvest_w * tau) < 1e-9);
            assert!(rel(tau * shannon_rate(1e6, 30.0, p), d) < 1e-9);
        }
    }

    #[test]
    fn no_energy_ever_is_infeasible() {
        let l = link(0.0, 1e4, 100.0, 1e-3);
        assert!(matches!(
            l.closed_form(0.0, true),
            Err(Error::InfeasibleUser { user_id: 7, .. })
        ));
        assert!(matches!(
            l.bisection(0.0, true),
            Err(Error::InfeasibleUser { .. })
        ));
        // below the zero-power energy floor D ln2 / (W k) with C = 0
        let floor = 100.0 * LN_2 / (1e6 * 1e4);
        assert!(l.closed_form(floor * 0.9, true).is_err());
        assert!(l.bisection(floor * 0.9, true).is_err());
        assert!(l.closed_form(floor * 1.1, true).is_ok());
    }

    #[test]
    fn zero_battery_spends_harvest_only() {
        let l = link(1e-6, 1e3, 100.0, f64::INFINITY);
        let (p, tau) = l.closed_form(0.0, true).unwrap();
        assert_eq!(p, 1e-6);
        let (po, to) = l.bisection(0.0, true).unwrap();
        assert!(rel(p, po) < 1e-9 && rel(tau, to) < 1e-9);
    }

    #[test]
    fn later_start_never_lengthens_slot() {
        let l = Link {
            battery_j: 1e-9,
            ..link(5e-7, 20.0, 100.0, 1e-3)
        };
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let eps = 1e-12 * 1.15f64.powi(i);
            let (_, tau) = l.closed_form(eps, true).unwrap();
            assert!(tau <= prev);
            prev = tau;
        }
    }

    fn profile(id: usize, h: f64, g: f64) -> UserProfile {
        UserProfile {
            id,
            h_down: h,
            g_up: g,
            demand_bits: 100.0,
            battery_j: 1e-9,
            eh: EhParams::default(),
        }
    }

    #[test]
    fn single_user_with_abundant_battery() {
        let sys = SystemParams::default();
        let mut u = profile(0, 1e-3, 1e-4);
        u.battery_j = 1.0;
        let s = evaluate_order(&[u], &sys).unwrap();
        assert_eq!(s.total_length_s, u.min_transmission_time(&sys));
    }

    #[test]
    fn identical_users_later_slot_is_shorter() {
        let sys = SystemParams::default();
        let users = [profile(0, 1e-4, 1e-5), profile(1, 1e-4, 1e-5)];
        let s = evaluate_order(&users, &sys).unwrap();
        assert!(s.allocations[1].duration_s <= s.allocations[0].duration_s);
        assert!(s.allocations[1].power_w >= s.allocations[0].power_w);
    }

    #[test]
    fn order_length_is_composition_of_oracle_slots() {
        let sys = SystemParams::default();
        let users = [
            profile(4, 3e-5, 2e-6),
            profile(1, 5e-4, 8e-5),
            profile(9, 2e-6, 1e-6),
        ];
        let s = evaluate_order(&users, &sys).unwrap();
        let mut t = 0.0;
        for u in &users {
            let state = StartState::at(u, &sys, t);
            let (_, tau) = bisection_oracle(u, &sys, &state).unwrap();
            t += tau;
        }
        assert!(rel(s.total_length_s, t) < 1e-9);
        assert_eq!(s.order, vec![4, 1, 9]);
    }

    #[test]
    fn pca_relaxes_cap() {
        let sys = SystemParams::default();
        let mut users = vec![profile(0, 1e-4, 1e-5), profile(1, 2e-6, 3e-6)];
        // energy-limited everywhere: PCA and OTPA coincide
        let a = evaluate_order(&users, &sys).unwrap();
        let b = evaluate_order_pca(&users, &sys).unwrap();
        assert!(a.allocations.iter().all(|x| x.power_w < sys.p_max_w));
        assert_eq!(a.total_length_s, b.total_length_s);
        // a cap-binding user makes PCA strictly shorter
        users[0].battery_j = 1.0;
        let a = evaluate_order(&users, &sys).unwrap();
        let b = evaluate_order_pca(&users, &sys).unwrap();
        assert!(b.total_length_s < a.total_length_s);
        assert_eq!(a.algorithm, Algorithm::Otpa);
        assert_eq!(b.algorithm, Algorithm::Pca);
    }

    #[test]
    fn infeasible_user_is_tagged_with_position() {
        let sys = SystemParams::default();
        let mut users = vec![profile(3, 1e-4, 1e-5), profile(5, 1e-4, 1e-5)];
        users[1].battery_j = 0.0;
        users[1].eh.ps_saturation = 1e-300;
        users[1].h_down = 1e-300;
        let err = evaluate_order(&users, &sys).unwrap_err();
        assert_eq!(
            err,
            Error::InfeasibleUser {
                user_id: 5,
                position: Some(1)
            }
        );
    }

    #[test]
    fn rejects_empty_and_duplicate_orders() {
        let sys = SystemParams::default();
        assert!(evaluate_order(&[], &sys).is_err());
        let u = profile(1, 1e-4, 1e-5);
        assert!(evaluate_order(&[u, u], &sys).is_err());
    }
}
