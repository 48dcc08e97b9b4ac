//! Cross-section families and the coefficient `a(x) = -A'(x)/A(x)`.

use std::path::Path;

use crate::error::{Error, Result};

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant through `(x, A)`
/// samples; constant outside the sample range.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl AreaTable {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Config(
                "area table needs at least two (x, A) rows".into(),
            ));
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Config(format!(
                    "area table x values must be strictly increasing (at x = {})",
                    w[1]
                )));
            }
        }
        if let Some(a) = ys.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
            return Err(Error::Config(format!("area table has non-positive area {a}")));
        }
        let n = xs.len();
        let delta: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        // zero end slopes keep A flat where the table stops
        let mut slopes = vec![0.0; n];
        for i in 1..n - 1 {
            let (d0, d1) = (delta[i - 1], delta[i]);
            if d0 * d1 <= 0.0 {
                slopes[i] = 0.0;
            } else {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let w0 = 2.0 * h1 + h0;
                let w1 = h1 + 2.0 * h0;
                slopes[i] = (w0 + w1) / (w0 / d0 + w1 / d1);
            }
        }
        Ok(AreaTable { xs, ys, slopes })
    }

    /// Parses two-column text: `x A` per line, comma or whitespace
    /// separated. `#` starts a comment; one non-numeric header is allowed.
    pub fn parse(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut header_seen = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            let parsed: Option<Vec<f64>> = cols.iter().map(|c| c.parse::<f64>().ok()).collect();
            match parsed {
                Some(v) if v.len() == 2 => {
                    xs.push(v[0]);
                    ys.push(v[1]);
                }
                None if !header_seen && xs.is_empty() => header_seen = true,
                _ => {
                    return Err(Error::Config(format!(
                        "area table line {}: expected two numbers, got {:?}",
                        lineno + 1,
                        raw
                    )))
                }
            }
        }
        AreaTable::new(xs, ys)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        AreaTable::parse(&text)
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    fn locate(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => (i - 1).min(self.xs.len() - 2),
        }
    }

    /// Value and derivative.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let (lo, hi) = self.x_range();
        if x <= lo {
            return (self.ys[0], 0.0);
        }
        if x >= hi {
            return (*self.ys.last().unwrap(), 0.0);
        }
        let i = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let val = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let der = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        (val, der)
    }
}

/// Area families. Every family is constant for `|x| >= X`.
#[derive(Debug, Clone, PartialEq)]
pub enum AreaProfile {
    Constant {
        area: f64,
    },
    /// `A = area · exp(-eps · s(x))`, `s = (1 - (x/X)²)³` on `|x| < X`.
    Bump {
        area: f64,
        eps: f64,
    },
    /// `ln A` blends from `ln inlet` to `ln outlet` with a quintic step and
    /// dips by `throat · s(x)` in the middle.
    ConvergingDiverging {
        inlet: f64,
        outlet: f64,
        throat: f64,
    },
    Table(AreaTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NozzleGeometry {
    profile: AreaProfile,
    x_cut: f64,
}

/// `s(r) = (1 - r²)³` and `ds/dr`, zero for `|r| >= 1`.
fn bump(r: f64) -> (f64, f64) {
    if r.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - r * r;
    (q * q * q, -6.0 * r * q * q)
}

/// Quintic smoothstep on `[0, 1]` and its derivative.
fn smoothstep(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0);
    }
    let t2 = t * t;
    (
        t2 * t * (10.0 - 15.0 * t + 6.0 * t2),
        30.0 * t2 * (1.0 - t) * (1.0 - t),
    )
}

impl NozzleGeometry {
    pub fn new(profile: AreaProfile, x_cut: f64) -> Result<Self> {
        if !(x_cut > 0.0) || !x_cut.is_finite() {
            return Err(Error::Config(format!("cutoff radius X must be positive, got {x_cut}")));
        }
        match &profile {
            AreaProfile::Constant { area } | AreaProfile::Bump { area, .. } => {
                if !(*area > 0.0) {
                    return Err(Error::Config(format!("area must be positive, got {area}")));
                }
            }
            AreaProfile::ConvergingDiverging { inlet, outlet, .. } => {
                if !(*inlet > 0.0 && *outlet > 0.0) {
                    return Err(Error::Config("inlet and outlet areas must be positive".into()));
                }
            }
            AreaProfile::Table(t) => {
                let (lo, hi) = t.x_range();
                if lo < -x_cut - 1e-12 || hi > x_cut + 1e-12 {
                    return Err(Error::Config(format!(
                        "area table range [{lo}, {hi}] exceeds the cutoff radius {x_cut}"
                    )));
                }
            }
        }
        Ok(NozzleGeometry { profile, x_cut })
    }

    pub fn straight(area: f64, x_cut: f64) -> Result<Self> {
        NozzleGeometry::new(AreaProfile::Constant { area }, x_cut)
    }

    pub fn profile(&self) -> &AreaProfile {
        &self.profile
    }

    pub fn x_cut(&self) -> f64 {
        self.x_cut
    }

    pub fn is_straight(&self) -> bool {
        matches!(self.profile, AreaProfile::Constant { .. })
            || matches!(self.profile, AreaProfile::Bump { eps, .. } if eps == 0.0)
    }

    /// `(ln A, d ln A/dx)`.
    fn log_area(&self, x: f64) -> (f64, f64) {
        let xc = self.x_cut;
        match &self.profile {
            AreaProfile::Constant { area } => (area.ln(), 0.0),
            AreaProfile::Bump { area, eps } => {
                let (s, ds) = bump(x / xc);
                (area.ln() - eps * s, -eps * ds / xc)
            }
            AreaProfile::ConvergingDiverging {
                inlet,
                outlet,
                throat,
            } => {
                let (s, ds) = bump(x / xc);
                let (h, dh) = smoothstep((x + xc) / (2.0 * xc));
                let jump = outlet.ln() - inlet.ln();
                (
                    inlet.ln() + jump * h - throat * s,
                    jump * dh / (2.0 * xc) - throat * ds / xc,
                )
            }
            AreaProfile::Table(t) => {
                let (a, da) = t.eval(x);
                (a.ln(), da / a)
            }
        }
    }

    pub fn area(&self, x: f64) -> f64 {
        match &self.profile {
            AreaProfile::Constant { area } => *area,
            AreaProfile::Table(t) => t.eval(x).0,
            _ => self.log_area(x).0.exp(),
        }
    }

    /// `a(x) = -A'(x)/A(x)`.
    pub fn a(&self, x: f64) -> f64 {
        let d = self.log_area(x).1;
        if d == 0.0 {
            0.0
        } else {
            -d
        }
    }
}
