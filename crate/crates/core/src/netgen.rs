//! Seeded random network realizations.
//!
//! Users are dropped uniformly in a disk around the HAP. Each user gets a
//! log-distance path loss with log-normal shadowing, shared by both link
//! directions, and independent unit-mean exponential (Rayleigh power) fades
//! on the downlink and the uplink.
//!
//! Randomness comes from ChaCha20 seeded with the realization seed; user `i`
//! draws from stream `i`, so growing the network leaves the existing users'
//! draws untouched.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{EhParams, SystemParams, UserProfile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopologyParams {
    pub n_users: usize,
    pub radius_m: f64,
    /// Path loss at the reference distance, dB.
    pub pl_d0_db: f64,
    pub d0_m: f64,
    pub alpha_exponent: f64,
    /// Shadowing standard deviation, dB.
    pub sigma_shadow_db: f64,
    pub rayleigh_enabled: bool,
    pub seed: u64,
}

impl Default for TopologyParams {
    fn default() -> Self {
        TopologyParams {
            n_users: 10,
            radius_m: 10.0,
            pl_d0_db: 30.0,
            d0_m: 1.0,
            alpha_exponent: 2.76,
            sigma_shadow_db: 4.0,
            rayleigh_enabled: true,
            seed: 0,
        }
    }
}

impl TopologyParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("radius_m", self.radius_m),
            ("d0_m", self.d0_m),
            ("alpha_exponent", self.alpha_exponent),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.sigma_shadow_db >= 0.0 && self.sigma_shadow_db.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma_shadow_db must be non-negative, got {}",
                self.sigma_shadow_db
            )));
        }
        if !self.pl_d0_db.is_finite() {
            return Err(Error::InvalidParameter("pl_d0_db must be finite".into()));
        }
        if self.n_users == 0 {
            return Err(Error::InvalidParameter("n_users must be at least 1".into()));
        }
        Ok(())
    }

    /// Path loss in dB at distance `d_m` before shadowing.
    ///
    /// Distances inside the reference distance are clamped to it.
    pub fn mean_path_loss_db(&self, d_m: f64) -> f64 {
        let d = d_m.max(self.d0_m);
        self.pl_d0_db + 10.0 * self.alpha_exponent * (d / self.d0_m).log10()
    }
}

/// Per-user values that do not come from the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserTemplate {
    pub demand_bits: f64,
    pub battery_j: f64,
    pub eh: EhParams,
}

impl Default for UserTemplate {
    fn default() -> Self {
        UserTemplate {
            demand_bits: 100.0,
            battery_j: 1e-9,
            eh: EhParams::default(),
        }
    }
}

/// One Monte-Carlo draw of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub users: Vec<UserProfile>,
    pub sys: SystemParams,
    pub seed: u64,
    /// `(x_m, y_m)` of each user, HAP at the origin.
    pub positions: Vec<(f64, f64)>,
}

/// Raw random draws for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LinkDraw {
    x_m: f64,
    y_m: f64,
    shadow_db: f64,
    fade_down: f64,
    fade_up: f64,
}

fn user_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw_link(rng: &mut ChaCha20Rng, params: &TopologyParams) -> LinkDraw {
    // sqrt of a uniform radius fraction gives uniform density over the disk
    let u: f64 = rng.random();
    let theta: f64 = 2.0 * PI * rng.random::<f64>();
    let r = params.radius_m * u.sqrt();
    let z: f64 = rng.sample(StandardNormal);
    let fade_down: f64 = rng.sample(Exp1);
    let fade_up: f64 = rng.sample(Exp1);
    LinkDraw {
        x_m: r * theta.cos(),
        y_m: r * theta.sin(),
        shadow_db: params.sigma_shadow_db * z,
        fade_down,
        fade_up,
    }
}

/// Draw one realization. Identical inputs give bit-identical output.
pub fn generate(
    params: &TopologyParams,
    sys_template: &SystemParams,
    user_template: &UserTemplate,
) -> Result<Realization> {
    params.validate()?;
    sys_template.validate()?;
    let mut users = Vec::with_capacity(params.n_users);
    let mut positions = Vec::with_capacity(params.n_users);
    for id in 0..params.n_users {
        let mut rng = user_rng(params.seed, id as u64);
        let draw = draw_link(&mut rng, params);
        let d = draw.x_m.hypot(draw.y_m);
        let loss_db = params.mean_path_loss_db(d) + draw.shadow_db;
        let large_scale = 10f64.powf(-loss_db / 10.0);
        let (fd, fu) = if params.rayleigh_enabled {
            (draw.fade_down, draw.fade_up)
        } else {
            (1.0, 1.0)
        };
        let user = UserProfile {
            id,
            h_down: large_scale * fd,
            g_up: large_scale * fu,
            demand_bits: user_template.demand_bits,
            battery_j: user_template.battery_j,
            eh: user_template.eh,
        };
        user.validate()?;
        users.push(user);
        positions.push((draw.x_m, draw.y_m));
    }
    Ok(Realization {
        users,
        sys: *sys_template,
        seed: params.seed,
        positions,
    })
}

/// Empirical statistics of the channel draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainStats {
    pub trials: usize,
    /// Sample mean of the Rayleigh power fade (both directions pooled).
    pub mean_fade: f64,
    /// Sample standard deviation of the shadowing term, dB.
    pub shadow_std_db: f64,
}

/// Check that the fade has unit mean (within 1%) and the shadowing has the
/// configured standard deviation (within 2%).
pub fn mean_gain_check(params: &TopologyParams, trials: usize) -> Result<GainStats> {
    if trials < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "mean_gain_check needs at least 10^4 trials, got {trials}"
        )));
    }
    let mut fade_sum = 0.0;
    let mut shadow = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = user_rng(params.seed, t as u64);
        let d = draw_link(&mut rng, params);
        fade_sum += d.fade_down + d.fade_up;
        shadow.push(d.shadow_db);
    }
    let mean_fade = fade_sum / (2 * trials) as f64;
    let m = shadow.iter().sum::<f64>() / trials as f64;
    let var = shadow.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / (trials - 1) as f64;
    let stats = GainStats {
        trials,
        mean_fade,
        shadow_std_db: var.sqrt(),
    };
    if (mean_fade - 1.0).abs() > 0.01 {
        return Err(Error::StatisticalFailure(format!(
            "mean fade {mean_fade} not within 1% of 1"
        )));
    }
    let sigma = params.sigma_shadow_db;
    if (stats.shadow_std_db - sigma).abs() > 0.02 * sigma {
        return Err(Error::StatisticalFailure(format!(
            "shadowing std {} dB not within 2% of {sigma} dB",
            stats.shadow_std_db
        )));
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet(seed: u64) -> TopologyParams {
        TopologyParams {
            sigma_shadow_db: 0.0,
            rayleigh_enabled: false,
            seed,
            ..TopologyParams::default()
        }
    }

    #[test]
    fn path_loss_reference_points() {
        let p = quiet(0);
        assert_eq!(p.mean_path_loss_db(1.0), 30.0);
        assert!((10f64.powf(-p.mean_path_loss_db(1.0) / 10.0) - 1e-3).abs() < 1e-18);
        let p2 = TopologyParams {
            alpha_exponent: 2.0,
            ..p
        };
        assert!((p2.mean_path_loss_db(10.0) - 50.0).abs() < 1e-12);
        assert!((10f64.powf(-p2.mean_path_loss_db(10.0) / 10.0) - 1e-5).abs() < 1e-19);
        // inside d0 the loss is clamped
        assert_eq!(p.mean_path_loss_db(0.0), 30.0);
    }

    #[test]
    fn deterministic_gains_follow_distance() {
        let p = quiet(9);
        let r = generate(&p, &SystemParams::default(), &UserTemplate::default()).unwrap();
        for (u, (x, y)) in r.users.iter().zip(&r.positions) {
            let expected = 10f64.powf(-p.mean_path_loss_db(x.hypot(*y)) / 10.0);
            assert_eq!(u.h_down, expected);
            assert_eq!(u.g_up, expected);
        }
    }

    #[test]
    fn same_seed_same_realization() {
        let p = TopologyParams {
            seed: 42,
            ..TopologyParams::default()
        };
        let a = generate(&p, &SystemParams::default(), &UserTemplate::default()).unwrap();
        let b = generate(&p, &SystemParams::default(), &UserTemplate::default()).unwrap();
        assert_eq!(a, b);
        let c = generate(
            &TopologyParams { seed: 43, ..p },
            &SystemParams::default(),
            &UserTemplate::default(),
        )
        .unwrap();
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn adding_users_keeps_existing_draws() {
        let p = TopologyParams {
            n_users: 4,
            seed: 5,
            ..TopologyParams::default()
        };
        let small = generate(&p, &SystemParams::default(), &UserTemplate::default()).unwrap();
        let big = generate(
            &TopologyParams { n_users: 9, ..p },
            &SystemParams::default(),
            &UserTemplate::default(),
        )
        .unwrap();
        assert_eq!(small.users[..], big.users[..4]);
    }

    #[test]
    fn positions_inside_disk_and_gains_positive() {
        for seed in 0..50 {
            let p = TopologyParams {
                seed,
                ..TopologyParams::default()
            };
            let r = generate(&p, &SystemParams::default(), &UserTemplate::default()).unwrap();
            for ((x, y), u) in r.positions.iter().zip(&r.users) {
                assert!(x.hypot(*y) <= p.radius_m);
                assert!(u.h_down > 0.0 && u.g_up > 0.0);
            }
        }
    }

    #[test]
    fn gain_statistics() {
        let p = TopologyParams {
            seed: 1,
            ..TopologyParams::default()
        };
        let s = mean_gain_check(&p, 100_000).unwrap();
        assert!((0.99..=1.01).contains(&s.mean_fade));
        assert!((3.92..=4.08).contains(&s.shadow_std_db));

        let s0 = mean_gain_check(
            &TopologyParams {
                sigma_shadow_db: 0.0,
                ..p
            },
            10_000,
        )
        .unwrap();
        assert_eq!(s0.shadow_std_db, 0.0);
        assert!(mean_gain_check(&p, 100).is_err());
    }

    #[test]
    fn radius_squared_is_uniform() {
        // Kolmogorov-Smirnov on r^2 / R^2 against U(0, 1) at the 1% level.
        let p = TopologyParams::default();
        let n = 100_000;
        let mut v: Vec<f64> = (0..n)
            .map(|t| {
                let mut rng = user_rng(77, t as u64);
                let d = draw_link(&mut rng, &p);
                (d.x_m * d.x_m + d.y_m * d.y_m) / (p.radius_m * p.radius_m)
            })
            .collect();
        v.sort_by(|a, b| a.total_cmp(b));
        let d = v
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let lo = i as f64 / n as f64;
                let hi = (i + 1) as f64 / n as f64;
                (x - lo).abs().max((hi - x).abs())
            })
            .fold(0.0, f64::max);
        let critical = 1.628 / (n as f64).sqrt();
        assert!(d < critical, "KS statistic {d} >= {critical}");
    }

    #[test]
    fn invalid_topology() {
        let p = TopologyParams {
            radius_m: 0.0,
            ..TopologyParams::default()
        };
        assert!(generate(&p, &SystemParams::default(), &UserTemplate::default()).is_err());
    }
}
