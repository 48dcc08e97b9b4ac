//! Exact Riemann solver for the homogeneous isentropic system.
//!
//! Wave curves are parameterized by density. The 1-curve through a left
//! state is the rarefaction branch `w = w_L` for `ρ <= ρ_L` and the
//! Hugoniot branch for `ρ > ρ_L`; the backward 2-curve through a right
//! state is `z = z_R` for `ρ <= ρ_R` and the Hugoniot branch above. The
//! middle density is found by bisection on the (strictly decreasing)
//! velocity mismatch between the two curves.

use crate::error::{Error, Result};
use crate::gas::{pow_guard, GasConstants, GasState};
use crate::roots::bisect;

/// Slack used by [`entropy_admissible`], relative to the size of the
/// terms in the entropy balance.
pub const ENTROPY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveKind {
    Rarefaction,
    Shock,
    /// Jump along an inverse shock curve; used only to discretize fans.
    RarefactionShock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WaveCurveKind {
    pub family: Family,
    pub kind: WaveKind,
}

/// Position of the right state relative to the wave curves through the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Region {
    /// 1-rarefaction, 2-rarefaction.
    I,
    /// 1-shock, 2-rarefaction.
    II,
    /// 1-shock, 2-shock.
    III,
    /// 1-rarefaction, 2-shock.
    IV,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveDescriptor {
    pub kind: WaveCurveKind,
    pub speed_lo: f64,
    pub speed_hi: f64,
    /// State on the left of the wave.
    pub upstream: GasState,
    /// State on the right of the wave.
    pub downstream: GasState,
}

impl WaveDescriptor {
    pub fn is_shock(&self) -> bool {
        self.kind.kind == WaveKind::Shock
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannSolution {
    pub left: GasState,
    pub right: GasState,
    pub middle: GasState,
    pub region: Region,
    pub wave1: WaveDescriptor,
    pub wave2: WaveDescriptor,
    gas: GasConstants,
}

/// `(p(ρ) - p(ρ0)) / (ρ - ρ0)`, continuous at `ρ = ρ0`.
fn pressure_slope(rho: f64, rho0: f64, gas: &GasConstants) -> f64 {
    let g = gas.gamma();
    let d = rho - rho0;
    if d.abs() <= 1e-6 * rho0 {
        // Taylor expansion of p about ρ0 up to third order.
        let p1 = pow_guard(rho0, g - 1.0);
        let p2 = (g - 1.0) * pow_guard(rho0, g - 2.0);
        let p3 = (g - 1.0) * (g - 2.0) * pow_guard(rho0, g - 3.0);
        p1 + 0.5 * p2 * d + p3 * d * d / 6.0
    } else {
        (gas.p(rho) - gas.p(rho0)) / d
    }
}

/// Signed velocity increment `√((p(ρ)-p(ρ0)) / (ρρ0(ρ-ρ0))) · (ρ-ρ0)` along
/// a Hugoniot locus; the family sign is applied by the caller.
pub fn shock_velocity_jump(rho: f64, rho0: f64, gas: &GasConstants) -> Result<f64> {
    if rho < 0.0 || rho0 < 0.0 || (rho == 0.0 && rho0 == 0.0) {
        return Err(Error::Domain(format!(
            "shock jump needs non-negative, not both zero densities ({rho}, {rho0})"
        )));
    }
    if rho0 == 0.0 {
        return Err(Error::Domain("reference density must be positive".into()));
    }
    Ok(velocity_jump(rho, rho0, gas))
}

#[inline]
fn velocity_jump(rho: f64, rho0: f64, gas: &GasConstants) -> f64 {
    if rho == rho0 {
        return 0.0;
    }
    if rho <= 0.0 {
        return f64::NEG_INFINITY;
    }
    (pressure_slope(rho, rho0, gas) / (rho * rho0)).sqrt() * (rho - rho0)
}

/// Lax speed `S(ρ, ρ0) = √(ρ (p(ρ)-p(ρ0)) / (ρ0 (ρ-ρ0)))`, equal to
/// `√p'(ρ0)` at `ρ = ρ0`.
pub fn lax_speed(rho: f64, rho0: f64, gas: &GasConstants) -> Result<f64> {
    if !(rho0 > 0.0) || rho < 0.0 {
        return Err(Error::Domain(format!(
            "lax speed needs rho0 > 0 and rho >= 0 ({rho}, {rho0})"
        )));
    }
    Ok(lax_speed_unchecked(rho, rho0, gas))
}

#[inline]
pub(crate) fn lax_speed_unchecked(rho: f64, rho0: f64, gas: &GasConstants) -> f64 {
    (rho * pressure_slope(rho, rho0, gas) / rho0).sqrt()
}

/// State on the 1-Hugoniot locus through the left state `ul` with density
/// `rho` (shock branch for `rho > ρ_l`, inverse-shock branch below).
pub fn one_locus_state(ul: GasState, rho: f64, gas: &GasConstants) -> GasState {
    let vl = ul.velocity();
    let v = vl - velocity_jump(rho, ul.rho, gas);
    GasState::from_velocity(rho, v)
}

/// Propagation speed of the 1-discontinuity from `ul` to the locus state
/// with density `rho`.
pub fn one_locus_speed(ul: GasState, rho: f64, gas: &GasConstants) -> f64 {
    ul.velocity() - lax_speed_unchecked(rho, ul.rho, gas)
}

/// Rankine-Hugoniot speed between two states on a common Hugoniot locus.
pub fn rh_speed(ul: GasState, ur: GasState, gas: &GasConstants) -> Result<f64> {
    let du = [ur.rho - ul.rho, ur.m - ul.m];
    if du[0] == 0.0 && du[1] == 0.0 {
        return Err(Error::Contract("rh_speed of identical states".into()));
    }
    let fl = gas.flux(ul);
    let fr = gas.flux(ur);
    let df = [fr[0] - fl[0], fr[1] - fl[1]];
    let lambda = if du[0].abs() >= 1e-3 * du[1].abs() {
        df[0] / du[0]
    } else {
        df[1] / du[1]
    };
    let residual = rh_residual(ul, ur, lambda, gas);
    let scale = 1.0 + fl[0].abs().max(fl[1].abs()).max(fr[0].abs()).max(fr[1].abs());
    if residual < 1e-10 * scale {
        Ok(lambda)
    } else {
        Err(Error::NotOnHugoniot { residual })
    }
}

/// `‖f(ur) - f(ul) - λ (ur - ul)‖∞`.
pub fn rh_residual(ul: GasState, ur: GasState, lambda: f64, gas: &GasConstants) -> f64 {
    let fl = gas.flux(ul);
    let fr = gas.flux(ur);
    let r0 = fr[0] - fl[0] - lambda * (ur.rho - ul.rho);
    let r1 = fr[1] - fl[1] - lambda * (ur.m - ul.m);
    r0.abs().max(r1.abs())
}

/// `λ(η*(ur) - η*(ul)) - (q*(ur) - q*(ul))` for the mechanical pair.
pub fn entropy_production(ul: GasState, ur: GasState, lambda: f64, gas: &GasConstants) -> f64 {
    let el = gas.mechanical_pair(ul);
    let er = gas.mechanical_pair(ur);
    lambda * (er.eta - el.eta) - (er.q - el.q)
}

/// Entropy condition for the mechanical energy pair. Rounding is absorbed
/// by a slack of [`ENTROPY_SLACK`] times the largest term, so the test
/// keeps its meaning for near-vacuum states.
pub fn entropy_admissible(ul: GasState, ur: GasState, lambda: f64, gas: &GasConstants) -> bool {
    let el = gas.mechanical_pair(ul);
    let er = gas.mechanical_pair(ur);
    let scale = (lambda * er.eta).abs().max((lambda * el.eta).abs()).max(er.q.abs()).max(el.q.abs());
    entropy_production(ul, ur, lambda, gas) >= -ENTROPY_SLACK * scale
}

/// Velocity along the 1-wave curve through the left state.
fn left_curve_velocity(ul: GasState, wl: f64, rho: f64, gas: &GasConstants) -> f64 {
    if rho <= ul.rho {
        wl - gas.sound_speed(rho) / gas.theta()
    } else {
        ul.velocity() - velocity_jump(rho, ul.rho, gas)
    }
}

/// Velocity along the backward 2-wave curve through the right state.
fn right_curve_velocity(ur: GasState, zr: f64, rho: f64, gas: &GasConstants) -> f64 {
    if rho <= ur.rho {
        zr + gas.sound_speed(rho) / gas.theta()
    } else {
        ur.velocity() + velocity_jump(rho, ur.rho, gas)
    }
}

fn rarefaction(family: Family, lo: f64, hi: f64, up: GasState, down: GasState) -> WaveDescriptor {
    WaveDescriptor {
        kind: WaveCurveKind {
            family,
            kind: WaveKind::Rarefaction,
        },
        speed_lo: lo,
        speed_hi: hi,
        upstream: up,
        downstream: down,
    }
}

fn shock(family: Family, speed: f64, up: GasState, down: GasState) -> WaveDescriptor {
    WaveDescriptor {
        kind: WaveCurveKind {
            family,
            kind: WaveKind::Shock,
        },
        speed_lo: speed,
        speed_hi: speed,
        upstream: up,
        downstream: down,
    }
}

/// Solves the Riemann problem with left state `ul` and right state `ur`.
pub fn solve_riemann(ul: GasState, ur: GasState, gas: &GasConstants) -> Result<RiemannSolution> {
    if !ul.is_finite() || !ur.is_finite() {
        return Err(Error::Domain("non-finite Riemann data".into()));
    }
    let ul = GasState::new(ul.rho, ul.m);
    let ur = GasState::new(ur.rho, ur.m);
    if ul.rho < 0.0 || ur.rho < 0.0 {
        return Err(Error::Domain("negative density in Riemann data".into()));
    }
    let theta = gas.theta();

    let (l1, _) = gas.characteristic_speeds(ul);
    let (_, r2) = gas.characteristic_speeds(ur);
    let pl = gas.to_invariants(ul);
    let pr = gas.to_invariants(ur);

    // Vacuum on either side, or a vacuum middle state.
    if ul.is_vacuum() || ur.is_vacuum() || pl.w <= pr.z {
        let vac = GasState::VACUUM;
        let (w1, w2) = match (ul.is_vacuum(), ur.is_vacuum()) {
            (true, true) => (
                rarefaction(Family::One, 0.0, 0.0, vac, vac),
                rarefaction(Family::Two, 0.0, 0.0, vac, vac),
            ),
            (true, false) => (
                rarefaction(Family::One, pr.z, pr.z, vac, vac),
                rarefaction(Family::Two, pr.z, r2, vac, ur),
            ),
            (false, true) => (
                rarefaction(Family::One, l1, pl.w, ul, vac),
                rarefaction(Family::Two, pl.w, pl.w, vac, vac),
            ),
            (false, false) => (
                rarefaction(Family::One, l1, pl.w, ul, vac),
                rarefaction(Family::Two, pr.z, r2, vac, ur),
            ),
        };
        return Ok(RiemannSolution {
            left: ul,
            right: ur,
            middle: vac,
            region: Region::I,
            wave1: w1,
            wave2: w2,
            gas: *gas,
        });
    }

    let mismatch = |rho: f64| {
        left_curve_velocity(ul, pl.w, rho, gas) - right_curve_velocity(ur, pr.z, rho, gas)
    };
    let shock1 = mismatch(ul.rho) > 0.0;
    let shock2 = mismatch(ur.rho) > 0.0;

    let region = match (shock1, shock2) {
        (false, false) => Region::I,
        (true, false) => Region::II,
        (true, true) => Region::III,
        (false, true) => Region::IV,
    };

    let middle = if region == Region::I {
        gas.state_from_invariants(pr.z, pl.w)
    } else {
        let lo = match region {
            Region::II => ul.rho,
            Region::IV => ur.rho,
            _ => ul.rho.max(ur.rho),
        };
        let mut hi = 2.0 * lo.max(1e-300);
        let mut guard = 0;
        while mismatch(hi) > 0.0 {
            hi *= 2.0;
            guard += 1;
            if guard > 2000 {
                return Err(Error::Domain("middle density unbounded".into()));
            }
        }
        let rho_m = bisect(mismatch, lo, hi, 0.0, 200)
            .ok_or_else(|| Error::Domain("middle-state bracket lost".into()))?;
        let c = gas.sound_speed(rho_m) / theta;
        match region {
            Region::II => gas.state_from_invariants(pr.z, pr.z + 2.0 * c),
            Region::IV => gas.state_from_invariants(pl.w - 2.0 * c, pl.w),
            _ => {
                let v = 0.5
                    * (left_curve_velocity(ul, pl.w, rho_m, gas)
                        + right_curve_velocity(ur, pr.z, rho_m, gas));
                GasState::from_velocity(rho_m, v)
            }
        }
    };

    let (m1, m2) = gas.characteristic_speeds(middle);
    let wave1 = if shock1 {
        shock(
            Family::One,
            ul.velocity() - lax_speed_unchecked(middle.rho, ul.rho, gas),
            ul,
            middle,
        )
    } else {
        rarefaction(Family::One, l1, m1.max(l1), ul, middle)
    };
    let wave2 = if shock2 {
        shock(
            Family::Two,
            ur.velocity() + lax_speed_unchecked(middle.rho, ur.rho, gas),
            middle,
            ur,
        )
    } else {
        rarefaction(Family::Two, m2.min(r2), r2, middle, ur)
    };

    Ok(RiemannSolution {
        left: ul,
        right: ur,
        middle,
        region,
        wave1,
        wave2,
        gas: *gas,
    })
}

impl RiemannSolution {
    pub fn gas(&self) -> &GasConstants {
        &self.gas
    }

    /// Self-similar state at `ξ = x/t`. At a shock speed the downstream
    /// state is returned.
    pub fn sample(&self, xi: f64) -> GasState {
        let theta = self.gas.theta();
        let w1 = &self.wave1;
        let w2 = &self.wave2;
        if xi < w1.speed_hi || (w1.is_shock() && xi < w1.speed_lo) {
            if xi < w1.speed_lo {
                return self.left;
            }
            if w1.is_shock() {
                return self.middle;
            }
            // inside the 1-fan: w = w_L and λ1 = ξ
            let wl = self.gas.to_invariants(self.left).w;
            let c = theta * (wl - xi) / (1.0 + theta);
            return self.gas.state_from_invariants(wl - 2.0 * c / theta, wl);
        }
        if xi < w2.speed_lo {
            return self.middle;
        }
        if w2.is_shock() {
            return self.right;
        }
        if xi >= w2.speed_hi {
            return self.right;
        }
        let zr = self.gas.to_invariants(self.right).z;
        let c = theta * (xi - zr) / (1.0 + theta);
        self.gas.state_from_invariants(zr, zr + 2.0 * c / theta)
    }

    /// Breakpoints of the self-similar structure in increasing order.
    pub fn breakpoints(&self) -> [f64; 4] {
        [
            self.wave1.speed_lo,
            self.wave1.speed_hi,
            self.wave2.speed_lo,
            self.wave2.speed_hi,
        ]
    }

    /// True when `ξ` lies strictly inside a rarefaction fan.
    pub fn in_fan(&self, xi: f64) -> bool {
        (!self.wave1.is_shock() && xi > self.wave1.speed_lo && xi < self.wave1.speed_hi)
            || (!self.wave2.is_shock() && xi > self.wave2.speed_lo && xi < self.wave2.speed_hi)
    }
}
