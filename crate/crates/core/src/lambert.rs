//! Real branches of the Lambert W function.
//!
//! `W(y)` solves `w e^w = y`. For `-1/e <= y < 0` there are two real
//! solutions: the principal branch `W_0` (`w >= -1`) and the lower branch
//! `W_{-1}` (`w <= -1`). Both are evaluated with Halley's method from
//! branch-specific seeds, switching to the square-root series around the
//! branch point `y = -1/e` where the iteration loses its footing.
//!
//! [`lambert_w_offset`] evaluates `W(c e^s) - s` without forming `c e^s`.
//! The optimal-power formula needs exactly this: its argument underflows for
//! energy-starved users, and the quantity of interest is the small gap between
//! `W` and the exponent shift.

use std::f64::consts::E;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `W_0`, defined on `[-1/e, inf)`, values `>= -1`.
    Principal,
    /// `W_{-1}`, defined on `[-1/e, 0)`, values `<= -1`.
    Lower,
}

const MAX_ITERATIONS: usize = 50;
const STEP_TOL: f64 = 1e-14;

/// Arguments this far below `-1/e` are clamped to the branch point.
const DOMAIN_SLACK: f64 = 1e-15;

/// Distance from `-1/e` (in `y`) under which the series is used directly.
const SERIES_ONLY: f64 = 1e-8;

// 1/e split into a double and its rounding error.
const INV_E_HI: f64 = 0.367_879_441_171_442_33;
const INV_E_LO: f64 = -1.242_875_367_278_836_3e-17;

/// Evaluate `W(y)` on the requested branch.
///
/// Arguments in `[-1/e - 1e-15, -1/e)` are treated as `-1/e`.
pub fn lambert_w(y: f64, branch: Branch) -> Result<f64> {
    if y.is_nan() {
        return Err(Error::Domain { y, branch });
    }
    if y == f64::INFINITY && branch == Branch::Principal {
        return Ok(f64::INFINITY);
    }
    let gap = if y < 0.0 {
        // 1 + e*y, evaluated as e*(y + 1/e) with a compensated 1/e.
        E * ((y + INV_E_HI) + INV_E_LO)
    } else {
        f64::INFINITY
    };
    solve(y, 0.0, gap, branch).map_err(|_| Error::Domain { y, branch })
}

/// Evaluate `W(c e^s) - s` on the requested branch.
///
/// `s` may be arbitrarily large in magnitude; `c e^s` is never formed, so
/// the argument can lie far below the smallest representable double.
pub fn lambert_w_offset(c: f64, s: f64, branch: Branch) -> Result<f64> {
    let y_hint = c * s.exp();
    if c.is_nan() || s.is_nan() || !s.is_finite() || !c.is_finite() {
        return Err(Error::Domain { y: y_hint, branch });
    }
    let gap = if c < 0.0 {
        -(((-c).ln() + s) + 1.0).exp_m1()
    } else {
        f64::INFINITY
    };
    solve(c, s, gap, branch).map_err(|_| Error::Domain { y: y_hint, branch })
}

/// Evaluate `W(c e^{c (1 + m)}) - c (1 + m)` for `c < 0`.
///
/// This is the shape the Lambert argument takes in the optimal power law,
/// where `m` can be tiny: passing it separately keeps it from being rounded
/// away inside `1 + m`.
pub fn lambert_w_self_offset(c: f64, m: f64, branch: Branch) -> Result<f64> {
    let s = c + c * m;
    let y_hint = c * s.exp();
    if !(c < 0.0) || !m.is_finite() || !s.is_finite() {
        return Err(Error::Domain { y: y_hint, branch });
    }
    let gap = -(((-c).ln() + c + 1.0) + c * m).exp_m1();
    let fail = || Error::Domain { y: y_hint, branch };
    if gap < -E * DOMAIN_SLACK {
        return Err(fail());
    }
    let gap = gap.max(0.0);
    if gap < E * SERIES_ONLY {
        return Ok(branch_point_series(gap, branch) - s);
    }
    let mut d = seed(c, s, gap, branch) - s;
    for _ in 0..MAX_ITERATIONS {
        let step = match branch {
            Branch::Lower => {
                // d + ln((s + d) / c), with (s + d) / c = 1 + m + d / c
                let ratio_m1 = m + d / c;
                let h = d + ratio_m1.ln_1p();
                let inv_w = 1.0 / (c * (1.0 + ratio_m1));
                let h1 = 1.0 + inv_w;
                let h2 = -inv_w * inv_w;
                2.0 * h * h1 / (2.0 * h1 * h1 - h * h2)
            }
            Branch::Principal => {
                // (s + d - c e^{-d}) / c
                let g = m + d / c - (-d).exp_m1();
                let e = (-d).exp();
                let g1 = 1.0 / c + e;
                let g2 = -e;
                2.0 * g * g1 / (2.0 * g1 * g1 - g * g2)
            }
        };
        if !step.is_finite() {
            break;
        }
        d -= step;
        if step.abs() <= STEP_TOL * d.abs() {
            break;
        }
    }
    let w = s + d;
    match branch {
        Branch::Lower if w > -1.0 => Ok(-1.0 - s),
        Branch::Principal if w < -1.0 => Ok(-1.0 - s),
        _ => Ok(d),
    }
}

/// Solve `(s + d) e^d = c` for `d`, i.e. `d = W(c e^s) - s`.
///
/// `gap` is `1 + e*y` (infinite for `y >= 0`), precomputed by the caller as
/// accurately as its representation of `y` allows.
fn solve(c: f64, s: f64, gap: f64, branch: Branch) -> std::result::Result<f64, ()> {
    if gap < -E * DOMAIN_SLACK {
        return Err(());
    }
    if branch == Branch::Lower && c >= 0.0 {
        return Err(());
    }
    if c == 0.0 {
        // W_0(0) = 0
        return Ok(-s);
    }
    let gap = gap.max(0.0);

    if gap < E * SERIES_ONLY {
        return Ok(branch_point_series(gap, branch) - s);
    }

    let w0 = seed(c, s, gap, branch);
    let mut d = w0 - s;
    for _ in 0..MAX_ITERATIONS {
        let step = match branch {
            Branch::Lower => halley_step_log(c, s, d),
            Branch::Principal => halley_step_exp(c, s, d),
        };
        if !step.is_finite() {
            break;
        }
        d -= step;
        if step.abs() <= STEP_TOL * d.abs() {
            break;
        }
    }
    // A seed on the wrong side of -1 can jump branches; pull it back.
    let w = s + d;
    match branch {
        Branch::Lower if w > -1.0 => Ok(-1.0 - s),
        Branch::Principal if w < -1.0 => Ok(-1.0 - s),
        _ => Ok(d),
    }
}

/// Halley step for `G(d) = s + d - c e^{-d}`.
fn halley_step_exp(c: f64, s: f64, d: f64) -> f64 {
    let t = c * (-d).exp();
    let g = s + d - t;
    let g1 = 1.0 + t;
    let g2 = -t;
    2.0 * g * g1 / (2.0 * g1 * g1 - g * g2)
}

/// Halley step for `H(d) = d + ln(-(s + d)) - ln(-c)`, valid while `s + d < 0`.
///
/// This is `w + ln(-w) = ln(-y)` shifted by `s`; it stays finite for
/// arguments that underflow and for very negative `w`.
fn halley_step_log(c: f64, s: f64, d: f64) -> f64 {
    let w = s + d;
    let h = d + (-w).ln() - (-c).ln();
    let h1 = 1.0 + 1.0 / w;
    let h2 = -1.0 / (w * w);
    2.0 * h * h1 / (2.0 * h1 * h1 - h * h2)
}

/// Series in `p = +-sqrt(2 (1 + e y))` about the branch point.
fn branch_point_series(gap: f64, branch: Branch) -> f64 {
    let p = match branch {
        Branch::Principal => (2.0 * gap).sqrt(),
        Branch::Lower => -(2.0 * gap).sqrt(),
    };
    const COEFFS: [f64; 8] = [
        -1.0,
        1.0,
        -1.0 / 3.0,
        11.0 / 72.0,
        -43.0 / 540.0,
        769.0 / 17280.0,
        -221.0 / 8505.0,
        680_863.0 / 43_545_600.0,
    ];
    COEFFS.iter().rev().fold(0.0, |acc, &k| acc * p + k)
}

fn seed(c: f64, s: f64, gap: f64, branch: Branch) -> f64 {
    if c < 0.0 && gap < 0.5 {
        return branch_point_series(gap, branch);
    }
    match branch {
        Branch::Lower => {
            let l1 = (-c).ln() + s;
            let l2 = (-l1).ln();
            l1 - l2 + l2 / l1
        }
        Branch::Principal => {
            let log_y = if c > 0.0 {
                c.ln() + s
            } else {
                f64::NEG_INFINITY
            };
            if log_y > 1.0 {
                let l2 = log_y.ln();
                log_y - l2 + l2 / log_y
            } else {
                let y = c * s.exp();
                if y.abs() < 1e-3 {
                    y * (1.0 - y * (1.0 - 1.5 * y))
                } else {
                    // Winitzki's approximation
                    let l = y.ln_1p();
                    l * (1.0 - (1.0 + l).ln() / (2.0 + l))
                }
            }
        }
    }
}
