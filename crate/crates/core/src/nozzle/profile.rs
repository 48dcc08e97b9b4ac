//! In-cell steady profiles and their linear-in-time correction.
//!
//! A profile anchored at `x_d` with invariants `(z_d, w_d)` is
//! `z(x) = z_d e^{kz (B(x) - B(x_d))}`, `w(x) = w_d e^{kw (B(x) - B(x_d))}`.
//! `(kz, kw) = (-1, +1)` is the regular steady profile; `(-1, -1)` is the
//! near-vacuum profile. Reflection `x -> -x` maps `(kz, kw)` to `(-kw, -kz)`.
//!
//! The correction is the forward-Euler step of the characteristic form
//! `z_t + λ1 z_x = -a v ρ^θ`, `w_t + λ2 w_x = a v ρ^θ` with the profile
//! slopes `z_x = kz b z̄`, `w_x = kw b w̄`. For `(-1, +1)` it is the regular
//! correction; for `(-1, -1)` the `w` rate picks up `+b λ2 w̄`.

use super::bound::BoundFunction;
use super::geometry::NozzleGeometry;
use crate::error::{Error, Result};
use crate::gas::{GasConstants, GasState, InvariantPair};

/// Geometry seen from a possibly reflected frame: `a'(x) = -a(-x)`,
/// `b'(x) = b(-x)`, `B'(x) = -B(-x)`.
#[derive(Debug, Clone, Copy)]
pub struct Medium<'a> {
    pub geom: &'a NozzleGeometry,
    pub bound: &'a BoundFunction,
    pub m: f64,
    pub flip: bool,
}

impl<'a> Medium<'a> {
    pub fn new(geom: &'a NozzleGeometry, bound: &'a BoundFunction, m: f64) -> Self {
        Medium {
            geom,
            bound,
            m,
            flip: false,
        }
    }

    pub fn reflected(&self) -> Self {
        Medium {
            flip: !self.flip,
            ..*self
        }
    }

    #[inline]
    pub fn a(&self, x: f64) -> f64 {
        if self.flip {
            -self.geom.a(-x)
        } else {
            self.geom.a(x)
        }
    }

    #[inline]
    pub fn b(&self, x: f64) -> f64 {
        if self.flip {
            self.bound.eval(-x)
        } else {
            self.bound.eval(x)
        }
    }

    #[inline]
    pub fn big_b(&self, x: f64) -> f64 {
        if self.flip {
            -self.bound.integral(-x)
        } else {
            self.bound.integral(x)
        }
    }

    /// `(lower, upper)` in this frame.
    pub fn envelope(&self, x: f64) -> (f64, f64) {
        let e = self.big_b(x).exp();
        (-self.m / e, self.m * e)
    }

    /// True when `a` and `b` vanish identically on `[lo, hi]`.
    pub fn is_flat_on(&self, lo: f64, hi: f64) -> bool {
        if self.bound.is_zero() && self.geom.is_straight() {
            return true;
        }
        let (blo, bhi) = self.bound.support();
        let (lo, hi) = if self.flip { (-hi, -lo) } else { (lo, hi) };
        let xc = self.geom.x_cut();
        (hi <= blo || lo >= bhi) && (hi <= -xc || lo >= xc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub x_d: f64,
    pub z_d: f64,
    pub w_d: f64,
    pub kz: f64,
    pub kw: f64,
    /// Exact state at the anchor, returned when the invariants are unchanged.
    pub u_d: Option<GasState>,
}

impl Profile {
    /// Regular steady profile through `(x_d, pair)`.
    pub fn steady(x_d: f64, pair: InvariantPair) -> Self {
        Profile {
            x_d,
            z_d: pair.z,
            w_d: pair.w,
            kz: -1.0,
            kw: 1.0,
            u_d: None,
        }
    }

    /// Near-vacuum profile: both invariants decay like `e^{-∫b}`.
    pub fn vacuum_decay(x_d: f64, pair: InvariantPair) -> Self {
        Profile {
            x_d,
            z_d: pair.z,
            w_d: pair.w,
            kz: -1.0,
            kw: -1.0,
            u_d: None,
        }
    }

    /// Image under `x -> -x`.
    pub fn reflect(&self) -> Self {
        Profile {
            x_d: -self.x_d,
            z_d: -self.w_d,
            w_d: -self.z_d,
            kz: -self.kw,
            kw: -self.kz,
            u_d: self.u_d.map(|u| u.reflect()),
        }
    }

    /// Pins the anchor state so that unmodified evaluations return it bitwise.
    pub fn with_state(mut self, u: GasState) -> Self {
        self.u_d = Some(u);
        self
    }

    pub fn anchor(&self) -> InvariantPair {
        InvariantPair::new(self.z_d, self.w_d)
    }

    /// `(z̄(x), w̄(x))`.
    pub fn invariants_at(&self, medium: &Medium, x: f64) -> InvariantPair {
        if x == self.x_d {
            return self.anchor();
        }
        let e = medium.big_b(x) - medium.big_b(self.x_d);
        if e == 0.0 {
            return self.anchor();
        }
        InvariantPair::new(self.z_d * (self.kz * e).exp(), self.w_d * (self.kw * e).exp())
    }

    /// Time-corrected invariants at `(x, t_offset)`.
    pub fn corrected_invariants(
        &self,
        medium: &Medium,
        gas: &GasConstants,
        x: f64,
        t_offset: f64,
    ) -> InvariantPair {
        let bar = self.invariants_at(medium, x);
        if t_offset == 0.0 || !(bar.w > bar.z) {
            return bar;
        }
        let a = medium.a(x);
        let b = medium.b(x);
        if a == 0.0 && b == 0.0 {
            return bar;
        }
        let th = gas.theta();
        let c = 0.5 * th * (bar.w - bar.z); // ρ̄^θ
        let v = 0.5 * (bar.w + bar.z);
        let src = a * v * c;
        let (l1, l2) = (v - c, v + c);
        InvariantPair::new(
            bar.z + t_offset * (-l1 * self.kz * b * bar.z - src),
            bar.w + t_offset * (-l2 * self.kw * b * bar.w + src),
        )
    }

    /// State at `(x, t_offset)`; the flag reports a corrected pair with
    /// `w < z` that was mapped to vacuum.
    pub fn eval(&self, medium: &Medium, gas: &GasConstants, x: f64, t_offset: f64) -> (GasState, bool) {
        let p = self.corrected_invariants(medium, gas, x, t_offset);
        if let Some(u) = self.u_d {
            if p.z == self.z_d && p.w == self.w_d {
                return (u, false);
            }
        }
        let collapsed = p.w < p.z;
        (gas.state_from_invariants(p.z, p.w), collapsed)
    }

    pub fn state(&self, medium: &Medium, gas: &GasConstants, x: f64, t_offset: f64) -> GasState {
        self.eval(medium, gas, x, t_offset).0
    }
}

/// Regular steady profile anchored at `(x_d, u_d)`.
pub fn steady_profile(x_d: f64, u_d: GasState, gas: &GasConstants) -> Result<Profile> {
    if !u_d.is_finite() {
        return Err(Error::Domain("non-finite anchor state".into()));
    }
    let p = gas.to_invariants(u_d);
    if p.w < p.z {
        return Err(Error::Domain("anchor invariants with w < z".into()));
    }
    Ok(Profile::steady(x_d, p).with_state(u_d))
}

/// Time-corrected state `U(x, t; ū)`.
pub fn time_correct(
    profile: &Profile,
    medium: &Medium,
    gas: &GasConstants,
    x: f64,
    t_offset: f64,
) -> (GasState, bool) {
    profile.eval(medium, gas, x, t_offset)
}
