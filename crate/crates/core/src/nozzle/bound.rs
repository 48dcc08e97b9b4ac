//! The bound function `b(x)`, the constants `μ`, `σ`, and the invariant
//! envelope `-M e^{-B(x)} <= z`, `w <= M e^{B(x)}` with `B(x) = ∫₀^x b`.

use serde::Serialize;

use super::geometry::NozzleGeometry;
use crate::error::{Error, Result};
use crate::gas::{GasConstants, GasState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityConstants {
    pub mu: f64,
    pub sigma: f64,
}

impl AdmissibilityConstants {
    /// `½ log(1/σ)`, the allowed size of either half-line integral of `b`.
    pub fn budget(&self) -> f64 {
        0.5 * (1.0 / self.sigma).ln()
    }
}

pub fn admissibility_constants(gas: &GasConstants) -> Result<AdmissibilityConstants> {
    let th = gas.theta();
    if !(th > 0.0 && th < 1.0) {
        return Err(Error::Domain(format!("theta {th} outside (0, 1)")));
    }
    let s = th.sqrt();
    let mu = (1.0 - th).powi(2) / (th * (1.0 + th - 2.0 * s));
    let sigma = (1.0 - th) / ((1.0 - s) * (2.0 * (th + 1.0).sqrt() + s - 1.0));
    if !(sigma > 0.0 && sigma < 1.0) || !(mu > 0.0) {
        return Err(Error::Domain(format!("admissibility constants out of range: mu={mu}, sigma={sigma}")));
    }
    Ok(AdmissibilityConstants { mu, sigma })
}

/// Nonnegative piecewise-linear function on a uniform grid, zero outside
/// it. `B(x)` is the exact integral of the interpolant, so it carries no
/// quadrature error of its own.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundFunction {
    x0: f64,
    h: f64,
    values: Vec<f64>,
    /// `∫_{x0}^{x_i} b`.
    cum: Vec<f64>,
    /// `∫_{x0}^{0} b`.
    origin: f64,
}

impl BoundFunction {
    pub fn zero() -> Self {
        BoundFunction {
            x0: 0.0,
            h: 1.0,
            values: Vec::new(),
            cum: Vec::new(),
            origin: 0.0,
        }
    }

    pub fn from_samples(x0: f64, h: f64, values: Vec<f64>) -> Result<Self> {
        if !(h > 0.0) || !x0.is_finite() {
            return Err(Error::Config(format!("bound grid needs h > 0 (h = {h})")));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Config(format!("bound function value {v} is negative or not finite")));
        }
        if values.len() < 2 {
            return Ok(BoundFunction::zero());
        }
        let mut cum = Vec::with_capacity(values.len());
        cum.push(0.0);
        for i in 1..values.len() {
            cum.push(cum[i - 1] + 0.5 * h * (values[i - 1] + values[i]));
        }
        let mut out = BoundFunction {
            x0,
            h,
            values,
            cum,
            origin: 0.0,
        };
        out.origin = out.integral_from_start(0.0);
        Ok(out)
    }

    /// Samples `f` at `n + 1` equally spaced nodes of `[lo, hi]`.
    pub fn from_fn<F: Fn(f64) -> f64>(lo: f64, hi: f64, n: usize, f: F) -> Result<Self> {
        if !(hi > lo) || n == 0 {
            return Err(Error::Config("bound grid needs hi > lo and n > 0".into()));
        }
        let h = (hi - lo) / n as f64;
        let vals = (0..=n).map(|i| f(lo + h * i as f64)).collect();
        BoundFunction::from_samples(lo, h, vals)
    }

    /// Default choice: running maximum of `|a|` over `±width`, smoothed by a
    /// moving average over `±width/2`, scaled by `(1 + margin)/μ`. Sampled
    /// on a grid of spacing `width/4`.
    ///
    /// Both operations keep the result above `|a|/μ` at every grid node.
    pub fn from_geometry(
        geom: &NozzleGeometry,
        consts: &AdmissibilityConstants,
        width: f64,
        margin: f64,
    ) -> Result<Self> {
        if geom.is_straight() {
            return Ok(BoundFunction::zero());
        }
        if !(width > 0.0) || !(margin >= 0.0) {
            return Err(Error::Config("bound width must be positive and margin nonnegative".into()));
        }
        let h = width / 4.0;
        let reach = geom.x_cut() + 3.0 * width;
        let n = (2.0 * reach / h).ceil() as usize;
        let x0 = -reach;
        // |a| sampled on a grid twice as fine, folded onto the coarse nodes
        let abs_a: Vec<f64> = (0..=n)
            .map(|i| {
                let x = x0 + h * i as f64;
                geom.a(x)
                    .abs()
                    .max(geom.a(x - 0.5 * h).abs())
                    .max(geom.a(x + 0.5 * h).abs())
            })
            .collect();
        let r = 4usize; // width / h
        let run_max: Vec<f64> = (0..=n)
            .map(|i| {
                let lo = i.saturating_sub(r);
                let hi = (i + r).min(n);
                abs_a[lo..=hi].iter().cloned().fold(0.0, f64::max)
            })
            .collect();
        let q = 2usize; // width / (2h)
        let scale = (1.0 + margin) / consts.mu;
        let smooth: Vec<f64> = (0..=n)
            .map(|i| {
                let lo = i.saturating_sub(q);
                let hi = (i + q).min(n);
                let s: f64 = run_max[lo..=hi].iter().sum();
                scale * s / (hi - lo + 1) as f64
            })
            .collect();
        BoundFunction::from_samples(x0, h, smooth)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if self.values.is_empty() {
            return Ok(self.clone());
        }
        BoundFunction::from_samples(self.x0, self.h, self.values.iter().map(|v| v * c).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Grid extent `[lo, hi]` outside which `b` vanishes.
    pub fn support(&self) -> (f64, f64) {
        if self.values.is_empty() {
            return (0.0, 0.0);
        }
        (self.x0, self.x0 + self.h * (self.values.len() - 1) as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        if n == 0 {
            return 0.0;
        }
        let s = (x - self.x0) / self.h;
        if !(s >= 0.0) || s > (n - 1) as f64 {
            return 0.0;
        }
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }

    fn integral_from_start(&self, x: f64) -> f64 {
        let n = self.values.len();
        if n == 0 {
            return 0.0;
        }
        let s = (x - self.x0) / self.h;
        if !(s > 0.0) {
            return 0.0;
        }
        if s >= (n - 1) as f64 {
            return self.cum[n - 1];
        }
        let i = (s.floor() as usize).min(n - 2);
        let d = (s - i as f64) * self.h;
        let slope = (self.values[i + 1] - self.values[i]) / self.h;
        self.cum[i] + self.values[i] * d + 0.5 * slope * d * d
    }

    /// `B(x) = ∫₀^x b`.
    pub fn integral(&self, x: f64) -> f64 {
        self.integral_from_start(x) - self.origin
    }

    /// `∫₀^∞ b`.
    pub fn i_plus(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0) - self.origin
    }

    /// `∫_{-∞}^0 b`.
    pub fn i_minus(&self) -> f64 {
        self.origin
    }

    pub fn max_integral(&self) -> f64 {
        self.i_plus().max(self.i_minus())
    }
}

/// Outcome of checking the admissibility condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub mu: f64,
    pub sigma: f64,
    pub budget: f64,
    pub i_plus: f64,
    pub i_minus: f64,
    /// `max_x (|a(x)| - μ b(x))`; must not exceed `1e-12`.
    pub pointwise_margin: f64,
    pub worst_x: f64,
    /// `max(I+, I-) - budget`; positive means the budget is exceeded.
    pub integral_excess: f64,
    pub pointwise_ok: bool,
    pub integral_ok: bool,
    pub pass: bool,
}

pub fn validate_condition(
    geom: &NozzleGeometry,
    bound: &BoundFunction,
    consts: &AdmissibilityConstants,
) -> ValidationReport {
    let reach = geom.x_cut() * 1.05 + 1e-9;
    let samples = 20_000;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_x = 0.0;
    for i in 0..=samples {
        let x = -reach + 2.0 * reach * i as f64 / samples as f64;
        let gap = geom.a(x).abs() - consts.mu * bound.eval(x);
        if gap > worst {
            worst = gap;
            worst_x = x;
        }
    }
    let budget = consts.budget();
    let excess = bound.max_integral() - budget;
    let pointwise_ok = worst <= 1e-12;
    let integral_ok = excess <= 0.0;
    ValidationReport {
        mu: consts.mu,
        sigma: consts.sigma,
        budget,
        i_plus: bound.i_plus(),
        i_minus: bound.i_minus(),
        pointwise_margin: worst,
        worst_x,
        integral_excess: excess,
        pointwise_ok,
        integral_ok,
        pass: pointwise_ok && integral_ok,
    }
}

/// `(lower, upper) = (-M e^{-B(x)}, M e^{B(x)})`.
pub fn envelope(m: f64, bound: &BoundFunction, x: f64) -> (f64, f64) {
    let e = bound.integral(x).exp();
    (-m / e, m * e)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantEnvelope {
    pub m: f64,
    pub bound: BoundFunction,
}

impl InvariantEnvelope {
    pub fn new(m: f64, bound: BoundFunction) -> Result<Self> {
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::Config(format!("data bound M must be nonnegative, got {m}")));
        }
        Ok(InvariantEnvelope { m, bound })
    }

    pub fn at(&self, x: f64) -> (f64, f64) {
        envelope(self.m, &self.bound, x)
    }

    /// Amount by which `u` leaves the envelope at `x`; zero inside.
    pub fn violation(&self, gas: &GasConstants, u: GasState, x: f64) -> f64 {
        if u.is_vacuum() {
            return 0.0;
        }
        let p = gas.to_invariants(u);
        let (lo, hi) = self.at(x);
        (lo - p.z).max(p.w - hi).max(0.0)
    }
}

/// Smallest `M` for which every sample `(x, u)` satisfies the data bounds.
pub fn minimal_bound<I>(samples: I, bound: &BoundFunction, gas: &GasConstants) -> f64
where
    I: IntoIterator<Item = (f64, GasState)>,
{
    let mut m: f64 = 0.0;
    for (x, u) in samples {
        if u.is_vacuum() {
            continue;
        }
        let p = gas.to_invariants(u);
        let e = bound.integral(x).exp();
        m = m.max(-p.z * e).max(p.w / e);
    }
    m
}
