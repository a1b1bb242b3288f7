//! Physical-layer quantities: harvested power, effective SINR gain, Shannon
//! rate and the minimum slot duration at full transmit power.
//!
//! Units are SI throughout: watts, seconds, joules, hertz. Decibels only
//! appear where configuration is parsed.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// Logistic (non-linear) energy-harvesting circuit parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EhParams {
    /// Output power at saturation, watts.
    pub ps_saturation: f64,
    /// Steepness of the logistic curve, 1/W.
    pub a_rate: f64,
    /// Turn-on threshold of the logistic curve, watts.
    pub b_threshold: f64,
}

impl Default for EhParams {
    fn default() -> Self {
        EhParams {
            ps_saturation: 0.024,
            a_rate: 150.0,
            b_threshold: 0.014,
        }
    }
}

impl EhParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ps_saturation > 0.0 && self.ps_saturation.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ps_saturation must be positive, got {}",
                self.ps_saturation
            )));
        }
        if !(self.a_rate > 0.0 && self.a_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "a_rate must be positive, got {}",
                self.a_rate
            )));
        }
        if !(self.b_threshold >= 0.0 && self.b_threshold.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "b_threshold must be non-negative, got {}",
                self.b_threshold
            )));
        }
        Ok(())
    }

    /// Harvested power for a given received RF power (watts).
    ///
    /// The logistic response is normalised so that zero input yields zero
    /// output: `P_s (Psi - Omega) / (1 - Omega)`. It is evaluated in the
    /// equivalent form `P_s (1 - e^{-A x}) / (1 + e^{-A (x - B)})`, which does
    /// not cancel catastrophically for small inputs.
    pub fn harvested_power(&self, rx_power_w: f64) -> f64 {
        let a = self.a_rate;
        let num = -(-a * rx_power_w).exp_m1();
        let den = 1.0 + (-a * (rx_power_w - self.b_threshold)).exp();
        self.ps_saturation * num / den
    }
}

/// Static per-user data for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserProfile {
    pub id: usize,
    /// Downlink (HAP to user) linear power gain.
    pub h_down: f64,
    /// Uplink (user to HAP) linear power gain.
    pub g_up: f64,
    /// Bits to deliver in this frame.
    pub demand_bits: f64,
    /// Battery energy at the start of the frame, joules.
    pub battery_j: f64,
    pub eh: EhParams,
}

impl UserProfile {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::InvalidParameter(format!(
                "user {}: {what} out of range ({v})",
                self.id
            )))
        };
        if !(self.h_down > 0.0 && self.h_down.is_finite()) {
            return bad("h_down", self.h_down);
        }
        if !(self.g_up > 0.0 && self.g_up.is_finite()) {
            return bad("g_up", self.g_up);
        }
        if !(self.demand_bits > 0.0 && self.demand_bits.is_finite()) {
            return bad("demand_bits", self.demand_bits);
        }
        if !(self.battery_j >= 0.0 && self.battery_j.is_finite()) {
            return bad("battery_j", self.battery_j);
        }
        self.eh.validate()
    }

    /// Harvesting rate `C_i` in watts while the HAP radiates `p_hap_w`.
    pub fn harvest_rate(&self, sys: &SystemParams) -> f64 {
        self.eh.harvested_power(self.h_down * sys.p_hap_w)
    }

    /// Effective SINR per watt of transmit power, `k_i`.
    pub fn sinr_gain(&self, sys: &SystemParams) -> f64 {
        self.g_up / sys.interference_plus_noise_w()
    }

    /// Shannon rate in bits/s at transmit power `p_tx`.
    pub fn rate_bps(&self, sys: &SystemParams, p_tx: f64) -> f64 {
        shannon_rate(sys.bandwidth_hz, self.sinr_gain(sys), p_tx)
    }

    /// Slot duration needed to deliver the demand at `P_max`.
    pub fn min_transmission_time(&self, sys: &SystemParams) -> f64 {
        self.demand_bits / self.rate_bps(sys, sys.p_max_w)
    }

    /// Energy the user holds after harvesting from time zero to `start_s`.
    pub fn energy_at(&self, sys: &SystemParams, start_s: f64) -> f64 {
        self.battery_j + self.harvest_rate(sys) * start_s
    }
}

/// `W log2(1 + k p)`, computed with `ln_1p` so that tiny SNRs keep precision.
pub fn shannon_rate(bandwidth_hz: f64, k: f64, p_tx: f64) -> f64 {
    bandwidth_hz * (k * p_tx).ln_1p() / LN_2
}

/// Network-wide constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub bandwidth_hz: f64,
    /// HAP transmit power, watts.
    pub p_hap_w: f64,
    /// User transmit power cap, watts.
    pub p_max_w: f64,
    /// Receiver noise power spectral density, W/Hz.
    pub noise_density_w_per_hz: f64,
    /// Linear fraction of HAP power leaking into its own receiver.
    pub beta_si: f64,
}

/// Thermal noise floor, -174 dBm/Hz, in W/Hz.
pub const THERMAL_NOISE_W_PER_HZ: f64 = 3.981_071_705_534_985_5e-21;

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            bandwidth_hz: 1e6,
            p_hap_w: 1.0,
            p_max_w: 1e-3,
            noise_density_w_per_hz: THERMAL_NOISE_W_PER_HZ,
            beta_si: 1e-7,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("bandwidth_hz", self.bandwidth_hz),
            ("p_hap_w", self.p_hap_w),
            ("p_max_w", self.p_max_w),
            ("noise_density_w_per_hz", self.noise_density_w_per_hz),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.beta_si) {
            return Err(Error::InvalidParameter(format!(
                "beta_si must lie in [0, 1], got {}",
                self.beta_si
            )));
        }
        Ok(())
    }

    /// `N_0 W + beta P_h`, the denominator of every user's SINR gain.
    pub fn interference_plus_noise_w(&self) -> f64 {
        self.noise_density_w_per_hz * self.bandwidth_hz + self.beta_si * self.p_hap_w
    }
}

/// dB to linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
