use serde::Serialize;

use crate::error::{Error, Result};
use crate::gas::GasConstants;

/// Fan, near-vacuum and averaging-vacuum exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponents {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

impl Exponents {
    /// `α = 0.8`, `β = 0.05`, `δ = min(1.5, (1 + 1/(2θ))/2)`.
    pub fn defaults(gas: &GasConstants) -> Self {
        Exponents {
            alpha: 0.8,
            beta: 0.05,
            delta: (0.5 * (1.0 + 1.0 / (2.0 * gas.theta()))).min(1.5),
        }
    }

    /// Checks every constraint on the exponents; the message names the
    /// first one that fails.
    pub fn validate(&self, gas: &GasConstants) -> Result<()> {
        let (a, b, d) = (self.alpha, self.beta, self.delta);
        let g = gas.gamma();
        let checks: [(bool, &str); 8] = [
            (a > 0.5 && a < 1.0, "alpha must satisfy 1/2 < alpha < 1"),
            (b > 0.0, "beta must be positive"),
            (b < a, "beta must be smaller than alpha"),
            (0.5 + 0.5 * b < a, "alpha must exceed 1/2 + beta/2"),
            (a < 1.0 - 2.0 * b, "alpha must be below 1 - 2 beta"),
            (b < 2.0 / (g + 5.0), "beta must be below 2/(gamma + 5)"),
            ((9.0 - 3.0 * g) * b / 2.0 < a, "alpha must exceed (9 - 3 gamma) beta / 2"),
            (d > 1.0 && d < 1.0 / (2.0 * gas.theta()), "delta must satisfy 1 < delta < 1/(2 theta)"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::Config(format!(
                    "{msg} (alpha={a}, beta={b}, delta={d}, gamma={g})"
                )));
            }
        }
        Ok(())
    }
}

/// Mesh and bound parameters. `dx / dt = 2 M e^{max(I+, I-)}` holds by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemeParameters {
    pub dx: f64,
    pub dt: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub m: f64,
    pub t_final: f64,
}

impl SchemeParameters {
    pub fn new(
        gas: &GasConstants,
        dx: f64,
        m: f64,
        max_integral: f64,
        t_final: f64,
        exps: Exponents,
    ) -> Result<Self> {
        exps.validate(gas)?;
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::Config(format!("dx must be positive, got {dx}")));
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::Config(format!("data bound M must be positive, got {m}")));
        }
        if !(t_final >= 0.0) || !t_final.is_finite() {
            return Err(Error::Config(format!("final time must be nonnegative, got {t_final}")));
        }
        if !(max_integral >= 0.0) {
            return Err(Error::Config("bound-function integrals must be nonnegative".into()));
        }
        let ratio = 2.0 * m * max_integral.exp();
        Ok(SchemeParameters {
            dx,
            dt: dx / ratio,
            alpha: exps.alpha,
            beta: exps.beta,
            delta: exps.delta,
            m,
            t_final,
        })
    }

    pub fn exponents(&self) -> Exponents {
        Exponents {
            alpha: self.alpha,
            beta: self.beta,
            delta: self.delta,
        }
    }

    /// Fan step `Δx^α`.
    pub fn fan_step(&self) -> f64 {
        self.dx.powf(self.alpha)
    }

    /// Near-vacuum threshold `Δx^β` on the middle density.
    pub fn vacuum_proximity(&self) -> f64 {
        self.dx.powf(self.beta)
    }

    /// Averaging threshold `Δx^δ`.
    pub fn vacuum_threshold(&self) -> f64 {
        self.dx.powf(self.delta)
    }

    /// `⌈T/Δt⌉`.
    pub fn steps(&self) -> u64 {
        if self.t_final <= 0.0 {
            0
        } else {
            (self.t_final / self.dt - 1e-9).ceil().max(1.0) as u64
        }
    }
}
