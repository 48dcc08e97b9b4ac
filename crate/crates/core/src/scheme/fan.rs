//! Piecewise-constant rarefaction fans and the implicit front solve.

use crate::error::{Error, Result};
use crate::gas::{GasConstants, GasState};
use crate::nozzle::Medium;
use crate::riemann::{lax_speed_unchecked, one_locus_speed, one_locus_state};
use crate::roots::brent;

use super::cell::Piece;

/// Discretized 1-rarefaction from `(z_L, w_L)` to `(z_M, w_L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FanDescriptor {
    pub p: usize,
    pub z_stars: Vec<f64>,
    pub w_l: f64,
    /// `speeds[i]` separates states `i` and `i + 1` (0-based).
    pub speeds: Vec<f64>,
    pub states: Vec<GasState>,
}

/// A fan step realized as a jump along the inverse 1-shock curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseShock {
    pub left: GasState,
    pub right: GasState,
    pub speed: f64,
    /// `z(right) - z(left)`.
    pub strength: f64,
}

/// `p = max(⌊(z_M - z_L)/h⌋ + 1, 2)`.
pub fn fan_size(span: f64, h: f64) -> usize {
    ((span / h).floor() as i64 + 1).max(2) as usize
}

/// Relative slack under which `z_M < z_L` is read as rounding.
pub const FAN_ROUNDING: f64 = 1e-12;

pub fn build_fan(u_l: GasState, z_m: f64, h: f64, gas: &GasConstants) -> Result<FanDescriptor> {
    if u_l.is_vacuum() {
        return Err(Error::Contract("fan from a vacuum state".into()));
    }
    let pl = gas.to_invariants(u_l);
    // A middle state rounded just below `z_L` is a degenerate fan.
    let z_m = if z_m < pl.z && pl.z - z_m <= FAN_ROUNDING * (1.0 + pl.z.abs()) {
        pl.z
    } else {
        z_m
    };
    if !(z_m >= pl.z) {
        return Err(Error::Contract(format!(
            "fan needs z_M >= z_L (z_L={}, z_M={z_m})",
            pl.z
        )));
    }
    if !(h > 0.0) {
        return Err(Error::Contract("fan step must be positive".into()));
    }
    let p = fan_size(z_m - pl.z, h);
    let mut z_stars: Vec<f64> = (0..p - 1).map(|i| pl.z + i as f64 * h).collect();
    z_stars.push(z_m);
    let states: Vec<GasState> = z_stars
        .iter()
        .enumerate()
        .map(|(i, z)| {
            if i == 0 || *z == pl.z {
                u_l
            } else {
                gas.state_from_invariants(*z, pl.w)
            }
        })
        .collect();
    let speeds = (0..p - 1)
        .map(|i| {
            let (a, b) = (states[i], states[i + 1]);
            if a.is_vacuum() {
                pl.w
            } else {
                a.velocity() - lax_speed_unchecked(b.rho, a.rho, gas)
            }
        })
        .collect();
    Ok(FanDescriptor {
        p,
        z_stars,
        w_l: pl.w,
        speeds,
        states,
    })
}

impl FanDescriptor {
    /// The jumps actually realized by the scheme in a uniform medium: from
    /// each fan state to the point of its inverse 1-shock curve with the
    /// next `z*`.
    pub fn inverse_shocks(&self, gas: &GasConstants) -> Result<Vec<InverseShock>> {
        let mut out = Vec::with_capacity(self.p - 1);
        for i in 0..self.p - 1 {
            let left = self.states[i];
            let target = self.z_stars[i + 1];
            let right = locus_state_with_z(left, target, gas)?;
            out.push(InverseShock {
                left,
                right,
                speed: one_locus_speed(left, right.rho, gas),
                strength: target - self.z_stars[i],
            });
        }
        Ok(out)
    }
}

/// Point of the 1-Hugoniot locus through `ul` whose 1-invariant equals
/// `z_target`. `z` decreases strictly along the locus with density and
/// tends to `+∞` as `ρ -> 0`.
pub fn locus_state_with_z(ul: GasState, z_target: f64, gas: &GasConstants) -> Result<GasState> {
    if ul.is_vacuum() {
        return Err(Error::Vacuum);
    }
    let zl = gas.to_invariants(ul).z;
    if zl == z_target {
        return Ok(ul);
    }
    let h = |rho: f64| gas.to_invariants(one_locus_state(ul, rho, gas)).z - z_target;
    let (mut lo, mut hi) = (ul.rho, ul.rho);
    if zl > z_target {
        let mut k = 0;
        loop {
            hi *= 2.0;
            if h(hi) < 0.0 {
                break;
            }
            k += 1;
            if k > 200 {
                return Err(Error::Front {
                    j: 0,
                    n: 0,
                    reason: "no locus state with the target invariant (dense side)".into(),
                });
            }
        }
    } else {
        let mut k = 0;
        loop {
            lo *= 0.5;
            if lo < 1e-300 || k > 1000 {
                return Err(Error::Front {
                    j: 0,
                    n: 0,
                    reason: "target invariant needs a density below the vacuum floor".into(),
                });
            }
            let v = h(lo);
            if v > 0.0 {
                break;
            }
            k += 1;
        }
    }
    let rho = brent(h, lo, hi, 1e-15 * hi, 200).ok_or_else(|| Error::Front {
        j: 0,
        n: 0,
        reason: "locus bracket lost".into(),
    })?;
    Ok(one_locus_state(ul, rho, gas))
}

/// Converged front between a left piece and a state on its locus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontSolution {
    pub sigma: f64,
    /// Right state `u_{k+1}` with `z = z_target`.
    pub right: GasState,
    /// Left piece at the front foot at mid-time.
    pub left: GasState,
    pub iterations: usize,
}

/// Geometry of one cell in the working frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellFrame {
    pub centre: f64,
    pub dx: f64,
    pub dt: f64,
}

impl CellFrame {
    pub fn reflected(&self) -> Self {
        CellFrame {
            centre: -self.centre,
            ..*self
        }
    }

    /// Front foot at mid-time.
    pub fn foot(&self, sigma: f64) -> f64 {
        self.centre + 0.5 * sigma * self.dt
    }

    pub fn speed_limit(&self) -> f64 {
        self.dx / self.dt
    }
}

/// Solves `σ = G(σ)`: the left piece is read at the foot of the front at
/// mid-time, the right state is its locus point with `z = z_target`, and
/// `G` is the resulting jump speed.
pub fn solve_front(
    left: &Piece,
    z_target: f64,
    sigma_prev: f64,
    sigma_guess: f64,
    frame: &CellFrame,
    medium: &Medium,
    gas: &GasConstants,
) -> Result<FrontSolution> {
    let tau = 0.5 * frame.dt;
    let g = |sigma: f64| -> Result<(f64, GasState, GasState)> {
        let x = frame.foot(sigma);
        let ul = left.state(medium, gas, x, tau);
        let ur = locus_state_with_z(ul, z_target, gas)?;
        Ok((one_locus_speed(ul, ur.rho, gas), ur, ul))
    };
    let front_err = |reason: String| Error::Front { j: 0, n: 0, reason };

    let mut sigma = sigma_guess;
    let mut last_step = f64::INFINITY;
    let mut damping = 1.0;
    for it in 0..100 {
        let (s_new, ur, ul) = g(sigma)?;
        let step = s_new - sigma;
        if step.abs() < 1e-11 {
            // one more evaluation at the converged speed keeps (σ, u) consistent
            let (s_fin, ur, ul) = if step == 0.0 { (s_new, ur, ul) } else { g(s_new)? };
            let _ = s_fin;
            if !(s_new > sigma_prev) {
                return Err(front_err(format!(
                    "front speed {s_new} does not exceed the previous one {sigma_prev}"
                )));
            }
            return Ok(FrontSolution {
                sigma: s_new,
                right: ur,
                left: ul,
                iterations: it + 1,
            });
        }
        if step.abs() > last_step {
            damping *= 0.5;
        }
        last_step = step.abs();
        sigma += damping * step;
    }

    // bisection fallback on σ - G(σ)
    let lim = frame.speed_limit();
    let phi = |s: f64| g(s).map(|(v, _, _)| s - v).unwrap_or(f64::NAN);
    let lo = if sigma_prev.is_finite() {
        sigma_prev + 1e-12
    } else {
        -lim
    };
    let (fa, fb) = (phi(lo), phi(lim));
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(front_err(format!(
            "fixed point did not converge and [{lo}, {lim}] does not bracket it"
        )));
    }
    let s = crate::roots::bisect(phi, lo, lim, 1e-13, 200)
        .ok_or_else(|| front_err("bisection fallback failed".into()))?;
    let (_, ur, ul) = g(s)?;
    Ok(FrontSolution {
        sigma: s,
        right: ur,
        left: ul,
        iterations: 100,
    })
}
