//! TOML run configuration.
//!
//! ```toml
//! gamma = 1.4
//! dx = 0.01
//! t_final = 0.2
//!
//! [geometry]
//! family = "bump"
//! area = 1.0
//! eps = 0.3
//! x_cut = 1.0
//!
//! [initial]
//! profile = "riemann-step"
//! x0 = 0.0
//! left = { rho = 2.0, v = 0.0 }
//! right = { rho = 1.0, v = 0.0 }
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::gas::{GasConstants, GasState};
use crate::nozzle::{admissibility_constants, AreaProfile, AreaTable, BoundFunction, NozzleGeometry};
use crate::scheme::{Exponents, FarField, InitialData, Mode, Problem, SchemeParameters};

pub const DEFAULT_STRIDE: u64 = 10;
pub const DEFAULT_OUT: &str = "out";
pub const DEFAULT_X_CUT: f64 = 1.0;
pub const DEFAULT_BOUND_WIDTH: f64 = 0.02;
pub const DEFAULT_BOUND_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    gamma: f64,
    dx: f64,
    t_final: f64,
    m: Option<f64>,
    mode: Option<String>,
    stride: Option<u64>,
    out: Option<PathBuf>,
    far_field: Option<String>,
    audit_slack: Option<f64>,
    geometry: RawGeometry,
    bound: Option<RawBound>,
    initial: RawInitial,
    exponents: Option<RawExponents>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
enum RawGeometry {
    Constant {
        area: Option<f64>,
        x_cut: Option<f64>,
    },
    Bump {
        area: Option<f64>,
        eps: f64,
        x_cut: Option<f64>,
    },
    ConvergingDiverging {
        inlet: f64,
        outlet: f64,
        throat: f64,
        x_cut: Option<f64>,
    },
    Table {
        path: PathBuf,
        x_cut: Option<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBound {
    width: Option<f64>,
    margin: Option<f64>,
    /// Multiplies the constructed bound.
    scale: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    rho: f64,
    v: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case", deny_unknown_fields)]
enum RawInitial {
    RiemannStep {
        x0: Option<f64>,
        left: RawState,
        right: RawState,
    },
    GaussianDensity {
        rho_bg: Option<f64>,
        amplitude: f64,
        x0: Option<f64>,
        width: f64,
        v0: Option<f64>,
    },
    Constant {
        rho: f64,
        v: f64,
    },
    Table {
        x: Vec<f64>,
        rho: Vec<f64>,
        v: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExponents {
    alpha: Option<f64>,
    beta: Option<f64>,
    delta: Option<f64>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub gas: GasConstants,
    pub geometry: NozzleGeometry,
    pub bound: BoundFunction,
    pub initial: InitialData,
    pub m: Option<f64>,
    pub dx: f64,
    pub t_final: f64,
    pub exponents: Exponents,
    pub mode: Mode,
    pub out: PathBuf,
    pub stride: u64,
    pub far_field: FarField,
    pub audit_slack: f64,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub mode: Option<Mode>,
    pub stride: Option<u64>,
    pub dx: Option<f64>,
    pub t_final: Option<f64>,
}

fn key_err(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(key_err(key, format!("must be positive, got {v}")))
    }
}

pub fn parse_mode(s: &str) -> Result<Mode> {
    match s {
        "modified" => Ok(Mode::Modified),
        "baseline-lf" => Ok(Mode::BaselineLf),
        other => Err(key_err("mode", format!("expected \"modified\" or \"baseline-lf\", got {other:?}"))),
    }
}

pub fn mode_tag(mode: Mode) -> &'static str {
    match mode {
        Mode::Modified => "modified",
        Mode::BaselineLf => "baseline-lf",
    }
}

fn state(key: &str, s: RawState) -> Result<GasState> {
    if !(s.rho >= 0.0) || !s.rho.is_finite() || !s.v.is_finite() {
        return Err(key_err(key, format!("invalid state rho={}, v={}", s.rho, s.v)));
    }
    Ok(GasState::from_velocity(s.rho, s.v))
}

fn geometry(raw: RawGeometry, base: &Path) -> Result<NozzleGeometry> {
    let (profile, x_cut) = match raw {
        RawGeometry::Constant { area, x_cut } => (
            AreaProfile::Constant {
                area: positive("geometry.area", area.unwrap_or(1.0))?,
            },
            x_cut,
        ),
        RawGeometry::Bump { area, eps, x_cut } => (
            AreaProfile::Bump {
                area: positive("geometry.area", area.unwrap_or(1.0))?,
                eps,
            },
            x_cut,
        ),
        RawGeometry::ConvergingDiverging {
            inlet,
            outlet,
            throat,
            x_cut,
        } => (
            AreaProfile::ConvergingDiverging {
                inlet: positive("geometry.inlet", inlet)?,
                outlet: positive("geometry.outlet", outlet)?,
                throat,
            },
            x_cut,
        ),
        RawGeometry::Table { path, x_cut } => {
            let path = if path.is_absolute() { path } else { base.join(path) };
            let t = AreaTable::from_file(&path).map_err(|e| key_err("geometry.path", e))?;
            (AreaProfile::Table(t), x_cut)
        }
    };
    let x_cut = positive("geometry.x_cut", x_cut.unwrap_or(DEFAULT_X_CUT))?;
    NozzleGeometry::new(profile, x_cut).map_err(|e| key_err("geometry", e))
}

fn initial(raw: RawInitial) -> Result<InitialData> {
    let data = match raw {
        RawInitial::RiemannStep { x0, left, right } => InitialData::riemann_step(
            x0.unwrap_or(0.0),
            state("initial.left", left)?,
            state("initial.right", right)?,
        ),
        RawInitial::GaussianDensity {
            rho_bg,
            amplitude,
            x0,
            width,
            v0,
        } => InitialData::Gaussian {
            rho_bg: rho_bg.unwrap_or(0.0),
            amplitude,
            x0: x0.unwrap_or(0.0),
            width: positive("initial.width", width)?,
            v0: v0.unwrap_or(0.0),
        },
        RawInitial::Constant { rho, v } => InitialData::constant(state("initial", RawState { rho, v })?),
        RawInitial::Table { x, rho, v } => InitialData::Table { x, rho, v },
    };
    data.validate().map_err(|e| key_err("initial", e))?;
    Ok(data)
}

impl RunConfig {
    /// Parses TOML text. Relative table paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim().to_string()))?;
        let gas = GasConstants::new(raw.gamma).map_err(|_| {
            key_err("gamma", format!("{} outside (1, 5/3]", raw.gamma))
        })?;
        let geometry = geometry(raw.geometry, base)?;
        let rb = raw.bound.unwrap_or(RawBound {
            width: None,
            margin: None,
            scale: None,
        });
        let consts = admissibility_constants(&gas)?;
        let width = positive("bound.width", rb.width.unwrap_or(DEFAULT_BOUND_WIDTH))?;
        let margin = rb.margin.unwrap_or(DEFAULT_BOUND_MARGIN);
        if !(margin >= 0.0) {
            return Err(key_err("bound.margin", format!("must be nonnegative, got {margin}")));
        }
        let mut bound =
            BoundFunction::from_geometry(&geometry, &consts, width, margin).map_err(|e| key_err("bound", e))?;
        if let Some(s) = rb.scale {
            bound = bound.scaled(positive("bound.scale", s)?)?;
        }
        let defaults = Exponents::defaults(&gas);
        let re = raw.exponents.unwrap_or(RawExponents {
            alpha: None,
            beta: None,
            delta: None,
        });
        let exponents = Exponents {
            alpha: re.alpha.unwrap_or(defaults.alpha),
            beta: re.beta.unwrap_or(defaults.beta),
            delta: re.delta.unwrap_or(defaults.delta),
        };
        exponents.validate(&gas).map_err(|e| key_err("exponents", e))?;
        let far_field = match raw.far_field.as_deref() {
            None | Some("extend") => FarField::Extend,
            Some("cutoff") => FarField::Cutoff,
            Some(other) => {
                return Err(key_err("far_field", format!("expected \"extend\" or \"cutoff\", got {other:?}")))
            }
        };
        let cfg = RunConfig {
            gas,
            geometry,
            bound,
            initial: initial(raw.initial)?,
            m: raw.m.map(|m| positive("m", m)).transpose()?,
            dx: positive("dx", raw.dx)?,
            t_final: raw.t_final,
            exponents,
            mode: raw.mode.as_deref().map(parse_mode).transpose()?.unwrap_or(Mode::Modified),
            out: raw.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            stride: raw.stride.unwrap_or(DEFAULT_STRIDE),
            far_field,
            audit_slack: raw.audit_slack.unwrap_or(crate::diagnostics::AUDIT_SLACK),
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::from_toml(&text, base)
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self> {
        if let Some(p) = &o.out {
            self.out = p.clone();
        }
        if let Some(m) = o.mode {
            self.mode = m;
        }
        if let Some(s) = o.stride {
            self.stride = s;
        }
        if let Some(dx) = o.dx {
            self.dx = positive("dx", dx)?;
        }
        if let Some(t) = o.t_final {
            self.t_final = t;
        }
        self.check()?;
        Ok(self)
    }

    /// Re-validates everything the scheme parameters depend on.
    fn check(&self) -> Result<()> {
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(key_err("t_final", format!("must be nonnegative, got {}", self.t_final)));
        }
        if self.stride == 0 {
            return Err(key_err("stride", "must be at least 1"));
        }
        if !(self.audit_slack >= 0.0) {
            return Err(key_err("audit_slack", "must be nonnegative"));
        }
        SchemeParameters::new(
            &self.gas,
            self.dx,
            self.m.unwrap_or(1.0),
            self.bound.max_integral(),
            self.t_final,
            self.exponents,
        )?;
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem> {
        Problem::setup(
            self.gas,
            self.geometry.clone(),
            self.bound.clone(),
            &self.initial,
            self.dx,
            self.t_final,
            self.m,
            self.exponents,
            self.far_field,
        )
    }
}
