//! Gamma-law gas: pressure, fluxes, Riemann invariants and the mechanical
//! energy pair for the isentropic system in conserved variables `(ρ, m)`.
//!
//! Powers of the density are evaluated as `exp(e·ln ρ)` with an explicit
//! guard at `ρ = 0`, so the invariant round trip is accurate to about
//! `1e-12` relative rather than exact.

use crate::error::{Error, Result};

/// Densities below this value are treated as exact vacuum.
pub const VACUUM_DENSITY: f64 = 1e-14;

/// Adiabatic constants. `theta` is always `(gamma - 1) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasConstants {
    gamma: f64,
    theta: f64,
}

/// Conserved state: density and momentum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GasState {
    pub rho: f64,
    pub m: f64,
}

/// Riemann invariants `z = v - ρ^θ/θ` and `w = v + ρ^θ/θ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantPair {
    pub z: f64,
    pub w: f64,
}

/// Value of an entropy/entropy-flux pair at a state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EntropyPairValue {
    pub eta: f64,
    pub q: f64,
}

#[inline]
pub(crate) fn pow_guard(x: f64, e: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (e * x.ln()).exp()
    }
}

impl GasState {
    pub const VACUUM: GasState = GasState { rho: 0.0, m: 0.0 };

    /// Builds a state, normalizing near-vacuum densities to exact `(0, 0)`.
    #[inline]
    pub fn new(rho: f64, m: f64) -> Self {
        if rho < VACUUM_DENSITY {
            GasState::VACUUM
        } else {
            GasState { rho, m }
        }
    }

    /// Checked constructor for external input.
    pub fn try_new(rho: f64, m: f64) -> Result<Self> {
        if !rho.is_finite() || !m.is_finite() {
            return Err(Error::Domain(format!("non-finite state ({rho}, {m})")));
        }
        if rho < 0.0 {
            return Err(Error::Domain(format!("negative density {rho}")));
        }
        Ok(GasState::new(rho, m))
    }

    pub fn from_velocity(rho: f64, v: f64) -> Self {
        GasState::new(rho, rho * v)
    }

    #[inline]
    pub fn is_vacuum(&self) -> bool {
        self.rho < VACUUM_DENSITY
    }

    /// Velocity, zero on vacuum.
    #[inline]
    pub fn velocity(&self) -> f64 {
        if self.is_vacuum() {
            0.0
        } else {
            self.m / self.rho
        }
    }

    /// Mirror image under `x -> -x`.
    #[inline]
    pub fn reflect(&self) -> Self {
        GasState {
            rho: self.rho,
            m: -self.m,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.m.is_finite()
    }
}

impl InvariantPair {
    pub fn new(z: f64, w: f64) -> Self {
        InvariantPair { z, w }
    }

    /// Mirror image under `x -> -x`: `(z, w) -> (-w, -z)`.
    pub fn reflect(&self) -> Self {
        InvariantPair {
            z: -self.w,
            w: -self.z,
        }
    }
}

impl GasConstants {
    /// Accepts `1 < gamma <= 5/3`.
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma <= 5.0 / 3.0 + 1e-15) {
            return Err(Error::Domain(format!(
                "adiabatic exponent {gamma} outside (1, 5/3]"
            )));
        }
        Ok(GasConstants {
            gamma,
            theta: (gamma - 1.0) / 2.0,
        })
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `p(ρ) = ρ^γ/γ`.
    pub fn pressure(&self, rho: f64) -> Result<f64> {
        if rho < 0.0 || rho.is_nan() {
            return Err(Error::Domain(format!("negative density {rho}")));
        }
        Ok(self.p(rho))
    }

    #[inline]
    pub(crate) fn p(&self, rho: f64) -> f64 {
        pow_guard(rho, self.gamma) / self.gamma
    }

    /// `ρ^θ`, the sound speed of this gas law.
    #[inline]
    pub fn sound_speed(&self, rho: f64) -> f64 {
        pow_guard(rho, self.theta)
    }

    /// Riemann invariants. Vacuum maps to `(0, 0)`.
    pub fn to_invariants(&self, u: GasState) -> InvariantPair {
        if u.is_vacuum() {
            return InvariantPair::default();
        }
        let v = u.m / u.rho;
        let r = pow_guard(u.rho, self.theta) / self.theta;
        InvariantPair { z: v - r, w: v + r }
    }

    /// Like [`to_invariants`](Self::to_invariants) but signals vacuum.
    pub fn try_to_invariants(&self, u: GasState) -> Result<InvariantPair> {
        if u.is_vacuum() {
            Err(Error::Vacuum)
        } else {
            Ok(self.to_invariants(u))
        }
    }

    /// Inverse of [`to_invariants`](Self::to_invariants).
    pub fn from_invariants(&self, p: InvariantPair) -> Result<GasState> {
        if !(p.w >= p.z) {
            return Err(Error::Domain(format!(
                "invariants with w < z (z={}, w={})",
                p.z, p.w
            )));
        }
        Ok(self.state_from_invariants(p.z, p.w))
    }

    /// Unchecked inverse; `w < z` is treated as vacuum.
    #[inline]
    pub(crate) fn state_from_invariants(&self, z: f64, w: f64) -> GasState {
        let d = 0.5 * self.theta * (w - z);
        if !(d > 0.0) {
            return GasState::VACUUM;
        }
        let rho = pow_guard(d, 1.0 / self.theta);
        GasState::new(rho, rho * 0.5 * (w + z))
    }

    /// `f(u) = (m, m²/ρ + p(ρ))`; zero on vacuum.
    #[inline]
    pub fn flux(&self, u: GasState) -> [f64; 2] {
        if u.is_vacuum() {
            return [0.0, 0.0];
        }
        [u.m, u.m * u.m / u.rho + self.p(u.rho)]
    }

    /// Mechanical energy `η*` and its flux `q*`; zero on vacuum.
    pub fn mechanical_pair(&self, u: GasState) -> EntropyPairValue {
        if u.is_vacuum() {
            return EntropyPairValue::default();
        }
        let g = self.gamma;
        let v = u.m / u.rho;
        let eta = 0.5 * u.m * v + pow_guard(u.rho, g) / (g * (g - 1.0));
        let q = u.m * (0.5 * v * v + pow_guard(u.rho, g - 1.0) / (g - 1.0));
        EntropyPairValue { eta, q }
    }

    /// `(λ1, λ2) = (v - ρ^θ, v + ρ^θ)`; `(0, 0)` on vacuum.
    #[inline]
    pub fn characteristic_speeds(&self, u: GasState) -> (f64, f64) {
        if u.is_vacuum() {
            return (0.0, 0.0);
        }
        let v = u.m / u.rho;
        let c = pow_guard(u.rho, self.theta);
        (v - c, v + c)
    }
}

/// Geometric source `g(x, u) = (a m, a m²/ρ)` for a given coefficient `a(x)`.
#[inline]
pub fn source(a: f64, u: GasState) -> [f64; 2] {
    if u.is_vacuum() {
        return [0.0, 0.0];
    }
    [a * u.m, a * u.m * u.m / u.rho]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn air() -> GasConstants {
        GasConstants::new(1.4).unwrap()
    }

    #[test]
    fn rejects_gamma_out_of_range() {
        assert!(GasConstants::new(1.0).is_err());
        assert!(GasConstants::new(2.0).is_err());
        assert!(GasConstants::new(5.0 / 3.0).is_ok());
        assert_eq!(air().theta(), (1.4 - 1.0) / 2.0);
    }

    #[test]
    fn pressure_values() {
        let c = air();
        assert_eq!(c.pressure(0.0).unwrap(), 0.0);
        assert_relative_eq!(c.pressure(1.0).unwrap(), 1.0 / 1.4, max_relative = 1e-15);
        // independent: 2^1.4 = 2 * 2^0.4
        let expected = 2.0 * 2f64.powf(0.4) / 1.4;
        assert_relative_eq!(c.pressure(2.0).unwrap(), expected, max_relative = 1e-14);
        assert!(c.pressure(-1.0).is_err());
    }

    #[test]
    fn invariants_examples() {
        let c = air();
        let p = c.to_invariants(GasState::new(1.0, 0.0));
        assert_relative_eq!(p.z, -5.0, epsilon = 1e-14);
        assert_relative_eq!(p.w, 5.0, epsilon = 1e-14);
        let p = c.to_invariants(GasState::new(1.0, 1.0));
        assert_relative_eq!(p.z, -4.0, epsilon = 1e-14);
        assert_relative_eq!(p.w, 6.0, epsilon = 1e-14);
        // 0.8^5 = 0.32768
        let p = c.to_invariants(GasState::new(0.32768, 0.32768));
        assert_relative_eq!(p.z, -3.0, epsilon = 1e-13);
        assert_relative_eq!(p.w, 5.0, epsilon = 1e-13);
        assert_eq!(c.to_invariants(GasState::VACUUM), InvariantPair::default());
        assert_eq!(c.try_to_invariants(GasState::VACUUM), Err(Error::Vacuum));
    }

    #[test]
    fn from_invariants_examples() {
        let c = air();
        let u = c.from_invariants(InvariantPair::new(-5.0, 5.0)).unwrap();
        assert_relative_eq!(u.rho, 1.0, max_relative = 1e-14);
        assert_eq!(u.m, 0.0);
        assert_eq!(
            c.from_invariants(InvariantPair::new(0.0, 0.0)).unwrap(),
            GasState::VACUUM
        );
        let u = c.from_invariants(InvariantPair::new(-3.0, 5.0)).unwrap();
        assert_relative_eq!(u.rho, 0.32768, max_relative = 1e-13);
        assert_relative_eq!(u.m, 0.32768, max_relative = 1e-13);
        assert!(c.from_invariants(InvariantPair::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn flux_and_source_examples() {
        let c = air();
        assert_eq!(c.flux(GasState::new(1.0, 0.0)), [0.0, 1.0 / 1.4]);
        assert_eq!(c.flux(GasState::VACUUM), [0.0, 0.0]);
        let f = c.flux(GasState::new(1.0, 2.0));
        assert_eq!(f[0], 2.0);
        assert_relative_eq!(f[1], 4.0 + 1.0 / 1.4, max_relative = 1e-15);

        assert_eq!(source(0.0, GasState::new(1.0, 1.0)), [0.0, 0.0]);
        assert_eq!(source(0.3, GasState::new(1.0, 1.0)), [0.3, 0.3]);
        assert_eq!(source(0.5, GasState::new(2.0, -1.0)), [-0.5, 0.25]);
        assert_eq!(source(0.5, GasState::VACUUM), [0.0, 0.0]);
    }

    #[test]
    fn mechanical_pair_examples() {
        let c = air();
        let e = c.mechanical_pair(GasState::new(1.0, 0.0));
        assert_relative_eq!(e.eta, 1.0 / (1.4 * 0.4), max_relative = 1e-14);
        assert_eq!(e.q, 0.0);
        assert_eq!(c.mechanical_pair(GasState::VACUUM), EntropyPairValue::default());
        let e = c.mechanical_pair(GasState::new(1.0, 1.0));
        assert_relative_eq!(e.eta, 0.5 + 1.0 / (1.4 * 0.4), max_relative = 1e-14);
        assert_relative_eq!(e.q, 3.0, max_relative = 1e-14);
    }

    #[test]
    fn characteristic_speed_examples() {
        let c = air();
        let (l1, l2) = c.characteristic_speeds(GasState::new(1.0, 0.0));
        assert_relative_eq!(l1, -1.0, epsilon = 1e-15);
        assert_relative_eq!(l2, 1.0, epsilon = 1e-15);
        let (l1, l2) = c.characteristic_speeds(GasState::new(1.0, 1.0));
        assert_relative_eq!(l1, 0.0, epsilon = 1e-15);
        assert_relative_eq!(l2, 2.0, epsilon = 1e-15);
        let (l1, l2) = c.characteristic_speeds(GasState::new(0.32768, 0.0));
        assert_relative_eq!(l1, -0.8, epsilon = 1e-14);
        assert_relative_eq!(l2, 0.8, epsilon = 1e-14);
        assert_eq!(c.characteristic_speeds(GasState::VACUUM), (0.0, 0.0));
    }

    #[test]
    fn vacuum_normalization() {
        assert_eq!(GasState::new(1e-15, 3.0), GasState::VACUUM);
        assert!(GasState::try_new(-1.0, 0.0).is_err());
        assert!(GasState::try_new(f64::NAN, 0.0).is_err());
    }

    fn gamma_strategy() -> impl Strategy<Value = f64> {
        prop_oneof![Just(1.2), Just(1.4), Just(5.0 / 3.0), 1.01f64..1.666]
    }

    fn state_strategy() -> impl Strategy<Value = (f64, f64)> {
        (-6.0f64..3.0, -50.0f64..50.0).prop_map(|(lr, v)| (10f64.powf(lr), v))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn invariant_round_trip(g in gamma_strategy(), (rho, v) in state_strategy()) {
            let c = GasConstants::new(g).unwrap();
            let u = GasState::from_velocity(rho, v);
            let back = c.from_invariants(c.to_invariants(u)).unwrap();
            prop_assert!((back.rho - u.rho).abs() <= 1e-12 * u.rho);
            prop_assert!((back.m - u.m).abs() <= 1e-12 * u.m.abs().max(u.rho * 1e-3));
        }
    }

    proptest! {
        #[test]
        fn invariant_ordering(g in gamma_strategy(), (rho, v) in state_strategy()) {
            let c = GasConstants::new(g).unwrap();
            let p = c.to_invariants(GasState::from_velocity(rho, v));
            prop_assert!(p.w >= p.z);
            if v >= 0.0 {
                prop_assert!(p.w.abs() >= p.z.abs() && p.w >= 0.0);
            }
            if v <= 0.0 {
                prop_assert!(p.w.abs() <= p.z.abs() && p.z <= 0.0);
            }
        }

        #[test]
        fn energy_hessian_positive_definite(
            g in gamma_strategy(),
            rho in 0.05f64..10.0,
            v in -5.0f64..5.0,
        ) {
            let c = GasConstants::new(g).unwrap();
            let h = 1e-4 * rho.max(1.0);
            let eta = |r: f64, m: f64| c.mechanical_pair(GasState::new(r, m)).eta;
            let m = rho * v;
            let e0 = eta(rho, m);
            let err = eta(rho + h, m) - 2.0 * e0 + eta(rho - h, m);
            let emm = eta(rho, m + h) - 2.0 * e0 + eta(rho, m - h);
            let erm = (eta(rho + h, m + h) - eta(rho + h, m - h) - eta(rho - h, m + h)
                + eta(rho - h, m - h))
                / 4.0;
            prop_assert!(err > 0.0);
            prop_assert!(err * emm - erm * erm > 0.0);
        }
    }
}
