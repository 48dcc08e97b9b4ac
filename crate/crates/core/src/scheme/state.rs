//! Initial data, the staggered node window, projection and time stepping.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gas::{source, GasConstants, GasState};
use crate::nozzle::{minimal_bound, BoundFunction, Medium, NozzleGeometry};
use crate::quadrature::{composite, Rule};

use super::build::{build_cell, CellContext};
use super::cell::{CellCase, CellSolution};
use super::params::{Exponents, SchemeParameters};

/// Widths beyond which a Gaussian bump is replaced by its background.
pub const GAUSSIAN_TRUNCATION: f64 = 6.0;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `states[k]` holds on `(breaks[k-1], breaks[k])`.
    Piecewise {
        breaks: Vec<f64>,
        states: Vec<GasState>,
    },
    /// `ρ = ρ_bg + amplitude·exp(-((x - x0)/width)²)` with uniform velocity.
    Gaussian {
        rho_bg: f64,
        amplitude: f64,
        x0: f64,
        width: f64,
        v0: f64,
    },
    /// Linear interpolation of density and velocity, constant outside.
    Table {
        x: Vec<f64>,
        rho: Vec<f64>,
        v: Vec<f64>,
    },
}

impl InitialData {
    pub fn riemann_step(x0: f64, left: GasState, right: GasState) -> Self {
        InitialData::Piecewise {
            breaks: vec![x0],
            states: vec![left, right],
        }
    }

    pub fn slab(lo: f64, hi: f64, inside: GasState, outside: GasState) -> Self {
        InitialData::Piecewise {
            breaks: vec![lo, hi],
            states: vec![outside, inside, outside],
        }
    }

    pub fn constant(u: GasState) -> Self {
        InitialData::Piecewise {
            breaks: Vec::new(),
            states: vec![u],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        match self {
            InitialData::Piecewise { breaks, states } => {
                if states.len() != breaks.len() + 1 {
                    return bad("piecewise data needs one more state than breakpoints");
                }
                if breaks.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("breakpoints must be strictly increasing");
                }
                if states.iter().any(|u| !u.is_finite() || u.rho < 0.0) {
                    return bad("piecewise states must be finite with nonnegative density");
                }
            }
            InitialData::Gaussian {
                rho_bg,
                amplitude,
                width,
                x0,
                v0,
            } => {
                if !(*rho_bg >= 0.0) || !(*rho_bg + amplitude.min(0.0) >= 0.0) {
                    return bad("gaussian density must stay nonnegative");
                }
                if !(*width > 0.0) {
                    return bad("gaussian width must be positive");
                }
                if !x0.is_finite() || !v0.is_finite() || !amplitude.is_finite() {
                    return bad("gaussian parameters must be finite");
                }
            }
            InitialData::Table { x, rho, v } => {
                if x.len() < 2 || x.len() != rho.len() || x.len() != v.len() {
                    return bad("table data needs at least two rows of x, rho, v");
                }
                if x.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("table x must be strictly increasing");
                }
                if rho.iter().any(|r| !(*r >= 0.0)) || v.iter().any(|s| !s.is_finite()) {
                    return bad("table rho must be nonnegative and v finite");
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> GasState {
        match self {
            InitialData::Piecewise { breaks, states } => {
                let k = breaks.partition_point(|b| *b <= x);
                states[k]
            }
            InitialData::Gaussian {
                rho_bg,
                amplitude,
                x0,
                width,
                v0,
            } => {
                let s = (x - x0) / width;
                let rho = if s.abs() > GAUSSIAN_TRUNCATION {
                    *rho_bg
                } else {
                    rho_bg + amplitude * (-s * s).exp()
                };
                GasState::from_velocity(rho, *v0)
            }
            InitialData::Table { x: xs, rho, v } => {
                let n = xs.len();
                if x <= xs[0] {
                    return GasState::from_velocity(rho[0], v[0]);
                }
                if x >= xs[n - 1] {
                    return GasState::from_velocity(rho[n - 1], v[n - 1]);
                }
                let k = xs.partition_point(|p| *p <= x) - 1;
                let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
                GasState::from_velocity(
                    rho[k] + t * (rho[k + 1] - rho[k]),
                    v[k] + t * (v[k + 1] - v[k]),
                )
            }
        }
    }

    /// Points where the data fail to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            InitialData::Piecewise { breaks, .. } => breaks.clone(),
            InitialData::Gaussian { x0, width, .. } => {
                vec![x0 - GAUSSIAN_TRUNCATION * width, x0 + GAUSSIAN_TRUNCATION * width]
            }
            InitialData::Table { x, .. } => x.clone(),
        }
    }

    pub fn far_left(&self) -> GasState {
        self.eval(-1e300)
    }

    pub fn far_right(&self) -> GasState {
        self.eval(1e300)
    }
}

/// Treatment of the data to the right of the cutoff radius `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FarField {
    /// Data replaced by vacuum for `x >= X`.
    Cutoff,
    /// Data kept as given everywhere.
    Extend,
}

/// A fully resolved discretization.
#[derive(Debug, Clone)]
pub struct Problem {
    pub gas: GasConstants,
    pub geom: NozzleGeometry,
    pub bound: BoundFunction,
    pub params: SchemeParameters,
    pub far_field: FarField,
}

/// Safety factor between the data and the bound `M`.
pub const BOUND_SAFETY: f64 = 1.01;

impl Problem {
    /// Resolves `M` from the data when not given and checks the data bounds.
    #[allow(clippy::too_many_arguments)]
    pub fn setup(
        gas: GasConstants,
        geom: NozzleGeometry,
        bound: BoundFunction,
        data: &InitialData,
        dx: f64,
        t_final: f64,
        m: Option<f64>,
        exps: Exponents,
        far_field: FarField,
    ) -> Result<Self> {
        data.validate()?;
        let x_cut = geom.x_cut();
        let keep = |x: f64| far_field == FarField::Extend || x < x_cut;
        let (lo, hi) = data_window(data, &geom, &bound, dx);
        let mut pts: Vec<f64> = (0..=8000).map(|i| lo + (hi - lo) * i as f64 / 8000.0).collect();
        for b in data.breakpoints() {
            pts.push(b - 1e-12 * (1.0 + b.abs()));
            pts.push(b);
        }
        if let InitialData::Gaussian { x0, .. } = data {
            pts.push(*x0);
        }
        pts.retain(|x| keep(*x));
        let need = |x: f64| minimal_bound([(x, data.eval(x))], &bound, &gas);
        let (worst_x, worst) = pts
            .iter()
            .map(|x| (*x, need(*x)))
            .fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        let m = match m {
            Some(m) => {
                if worst > BOUND_SAFETY * m {
                    return Err(Error::Config(format!(
                        "initial data need M >= {worst} at x = {worst_x}, above the given M = {m}"
                    )));
                }
                m
            }
            None if worst > 0.0 => BOUND_SAFETY * worst,
            None => 1.0,
        };
        let params = SchemeParameters::new(&gas, dx, m, bound.max_integral(), t_final, exps)?;
        Ok(Problem {
            gas,
            geom,
            bound,
            params,
            far_field,
        })
    }

    pub fn medium(&self) -> Medium<'_> {
        Medium::new(&self.geom, &self.bound, self.params.m)
    }

    pub fn ctx(&self) -> CellContext<'_> {
        CellContext {
            gas: &self.gas,
            medium: self.medium(),
            params: &self.params,
        }
    }

    pub fn x(&self, j: i64) -> f64 {
        j as f64 * self.params.dx
    }

    /// Amount by which `u` at node `j` leaves the envelope.
    pub fn violation(&self, u: GasState, j: i64) -> f64 {
        if u.is_vacuum() {
            return 0.0;
        }
        let p = self.gas.to_invariants(u);
        let (lo, hi) = self.medium().envelope(self.x(j));
        (lo - p.z).max(p.w - hi).max(0.0)
    }

    /// `u^Δ(x, -0)`.
    pub fn initial_trace(&self, data: &InitialData, x: f64) -> GasState {
        if self.far_field == FarField::Cutoff && x >= self.geom.x_cut() {
            GasState::VACUUM
        } else {
            data.eval(x)
        }
    }
}

fn data_window(data: &InitialData, geom: &NozzleGeometry, bound: &BoundFunction, dx: f64) -> (f64, f64) {
    let x_cut = geom.x_cut();
    let (blo, bhi) = bound.support();
    let mut lo = (-x_cut).min(blo);
    let mut hi = x_cut.max(bhi);
    for b in data.breakpoints() {
        lo = lo.min(b);
        hi = hi.max(b);
    }
    (lo - 4.0 * dx, hi + 4.0 * dx)
}

/// Node values `u^n_j` for `j + n` even on a finite window, with constant
/// ambient states outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredState {
    pub n: u64,
    /// First stored index; `j_lo + n` is even.
    pub j_lo: i64,
    /// `nodes[k]` is `u^n_{j_lo + 2k}`.
    pub nodes: Vec<GasState>,
    pub ambient_left: GasState,
    pub ambient_right: GasState,
}

impl StaggeredState {
    pub fn j_hi(&self) -> i64 {
        self.j_lo + 2 * (self.nodes.len() as i64 - 1)
    }

    /// `u^n_j`; ambient outside the window.
    pub fn get(&self, j: i64) -> GasState {
        debug_assert!((j + self.n as i64).rem_euclid(2) == 0, "node parity");
        if j < self.j_lo {
            return self.ambient_left;
        }
        let k = ((j - self.j_lo) / 2) as usize;
        if k >= self.nodes.len() {
            self.ambient_right
        } else {
            self.nodes[k]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, GasState)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .map(move |(k, u)| (self.j_lo + 2 * k as i64, *u))
    }

    /// Node states on `[j_from, j_to]` (matching parity), ambient-extended.
    pub fn extended(&self, j_from: i64, j_to: i64) -> Vec<(i64, GasState)> {
        let mut j = j_from + (j_from + self.n as i64).rem_euclid(2);
        let mut out = Vec::new();
        while j <= j_to {
            out.push((j, self.get(j)));
            j += 2;
        }
        out
    }
}

/// What the projection did to one node.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ProjectionEvent {
    pub clamped: bool,
    pub vacuum: bool,
    /// Envelope violation of the average, zero for thresholded nodes.
    pub pre_violation: f64,
    /// Envelope violation of the result.
    pub post_violation: f64,
}

/// Vacuum threshold on the density, then clamp of the invariants onto the
/// envelope at node `j`.
pub fn project_node(problem: &Problem, e: GasState, j: i64) -> (GasState, ProjectionEvent) {
    let gas = &problem.gas;
    let mut ev = ProjectionEvent::default();
    if e.rho < problem.params.vacuum_threshold() {
        ev.vacuum = e.rho > 0.0;
        return (GasState::VACUUM, ev);
    }
    let (lo, hi) = problem.medium().envelope(problem.x(j));
    let p = gas.to_invariants(e);
    ev.pre_violation = (lo - p.z).max(p.w - hi).max(0.0);
    if ev.pre_violation == 0.0 {
        return (e, ev);
    }
    ev.clamped = true;
    let mut z = p.z.max(lo);
    let mut w = p.w.min(hi);
    if !(w > z) {
        return (GasState::VACUUM, ev);
    }
    let mut u = gas.state_from_invariants(z, w);
    for _ in 0..10 {
        let q = gas.to_invariants(u);
        let (dz, dw) = (lo - q.z, q.w - hi);
        if dz <= 0.0 && dw <= 0.0 {
            break;
        }
        if dz > 0.0 {
            z += dz + f64::EPSILON * lo.abs();
        }
        if dw > 0.0 {
            w -= dw + f64::EPSILON * hi.abs();
        }
        if !(w > z) {
            return (GasState::VACUUM, ev);
        }
        u = gas.state_from_invariants(z, w);
    }
    ev.post_violation = problem.violation(u, j);
    (u, ev)
}

/// Cell average of `u^Δ(·, -0)` at node `j`, split at data breakpoints.
pub fn initial_average(problem: &Problem, data: &InitialData, j: i64) -> GasState {
    let (a, b) = (problem.x(j - 1), problem.x(j + 1));
    let mut cuts = vec![a];
    let mut extra = data.breakpoints();
    if problem.far_field == FarField::Cutoff {
        extra.push(problem.geom.x_cut());
    }
    extra.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.extend(extra.into_iter().filter(|x| *x > a && *x < b));
    cuts.push(b);
    let width = b - a;
    let piecewise = matches!(data, InitialData::Piecewise { .. });
    if piecewise && cuts.len() == 2 {
        return problem.initial_trace(data, 0.5 * (a + b));
    }
    let panels = if matches!(data, InitialData::Gaussian { .. }) { 2 } else { 1 };
    let mut acc = [0.0; 2];
    for w in cuts.windows(2) {
        let v = if piecewise {
            let u = problem.initial_trace(data, 0.5 * (w[0] + w[1]));
            [u.rho * (w[1] - w[0]), u.m * (w[1] - w[0])]
        } else {
            composite(Rule::Gl5, w[0], w[1], panels, |x| {
                let u = problem.initial_trace(data, x);
                [u.rho, u.m]
            })
        };
        acc[0] += v[0];
        acc[1] += v[1];
    }
    GasState::new(acc[0] / width, acc[1] / width)
}

/// Projected cell averages of the data at `n = 0`.
pub fn initialize(problem: &Problem, data: &InitialData) -> Result<StaggeredState> {
    data.validate()?;
    let dx = problem.params.dx;
    let (lo, hi) = data_window(data, &problem.geom, &problem.bound, dx);
    let mut j_lo = (lo / dx).floor() as i64;
    j_lo -= j_lo.rem_euclid(2);
    let mut j_hi = (hi / dx).ceil() as i64;
    j_hi += j_hi.rem_euclid(2);
    let nodes = (0..=(j_hi - j_lo) / 2)
        .map(|k| {
            let j = j_lo + 2 * k;
            project_node(problem, initial_average(problem, data, j), j).0
        })
        .collect();
    let ambient_left = project_node(problem, data.far_left(), j_lo - 2).0;
    let ambient_right = match problem.far_field {
        FarField::Cutoff => GasState::VACUUM,
        FarField::Extend => project_node(problem, data.far_right(), j_hi + 2).0,
    };
    Ok(StaggeredState {
        n: 0,
        j_lo,
        nodes,
        ambient_left,
        ambient_right,
    })
}

/// Counters and extremes over one step (or a run, after merging).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StepStats {
    pub cells: u64,
    pub uniform_cells: u64,
    pub regular_cells: u64,
    pub near_vacuum_cells: u64,
    pub clamp_count: u64,
    pub vacuum_count: u64,
    /// Time corrections that crossed `w < z` and were read as vacuum.
    pub collapses: u64,
    pub max_pre_violation: f64,
    pub max_post_violation: f64,
    pub max_rh_residual: f64,
    /// Largest wave speed over `dx/dt`.
    pub max_speed_ratio: f64,
}

impl StepStats {
    pub fn merge(&mut self, o: &StepStats) {
        self.cells += o.cells;
        self.uniform_cells += o.uniform_cells;
        self.regular_cells += o.regular_cells;
        self.near_vacuum_cells += o.near_vacuum_cells;
        self.clamp_count += o.clamp_count;
        self.vacuum_count += o.vacuum_count;
        self.collapses += o.collapses;
        self.max_pre_violation = self.max_pre_violation.max(o.max_pre_violation);
        self.max_post_violation = self.max_post_violation.max(o.max_post_violation);
        self.max_rh_residual = self.max_rh_residual.max(o.max_rh_residual);
        self.max_speed_ratio = self.max_speed_ratio.max(o.max_speed_ratio);
    }
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    pub state: StaggeredState,
    pub cells: Vec<CellSolution>,
    /// Cell averages before projection, aligned with `state.nodes`.
    pub averages: Vec<GasState>,
    pub events: Vec<ProjectionEvent>,
    pub stats: StepStats,
}

/// One step of the modified scheme. The window grows by one cell per side.
pub fn advance(problem: &Problem, state: &StaggeredState) -> Result<StepOutput> {
    let ctx = problem.ctx();
    let n = state.n;
    let j_lo = state.j_lo - 1;
    let count = state.nodes.len() + 1;
    let lim = problem.params.dx / problem.params.dt;
    let mut stats = StepStats::default();
    let mut cells = Vec::with_capacity(count);
    let mut nodes = Vec::with_capacity(count);
    let mut averages = Vec::with_capacity(count);
    let mut events = Vec::with_capacity(count);
    for k in 0..count {
        let j = j_lo + 2 * k as i64;
        let cell = build_cell(&ctx, j, n, state.get(j - 1), state.get(j + 1))?;
        let (avg, collapses) = cell.average(&ctx.medium, &problem.gas);
        let (u, ev) = project_node(problem, avg, j);
        stats.cells += 1;
        match cell.case {
            CellCase::Uniform => stats.uniform_cells += 1,
            CellCase::Regular { .. } => stats.regular_cells += 1,
            CellCase::NearVacuum { .. } => stats.near_vacuum_cells += 1,
        }
        stats.collapses += collapses as u64;
        stats.clamp_count += ev.clamped as u64;
        stats.vacuum_count += ev.vacuum as u64;
        stats.max_pre_violation = stats.max_pre_violation.max(ev.pre_violation);
        stats.max_post_violation = stats.max_post_violation.max(ev.post_violation);
        stats.max_rh_residual = stats.max_rh_residual.max(cell.max_rh_residual(&ctx.medium, &problem.gas));
        stats.max_speed_ratio = stats.max_speed_ratio.max(cell.max_speed() / lim);
        cells.push(cell);
        nodes.push(u);
        averages.push(avg);
        events.push(ev);
    }
    Ok(StepOutput {
        state: StaggeredState {
            n: n + 1,
            j_lo,
            nodes,
            ambient_left: state.ambient_left,
            ambient_right: state.ambient_right,
        },
        cells,
        averages,
        events,
        stats,
    })
}

/// Read-only view handed to observers after each step.
pub struct StepRecord<'a> {
    /// Index of the new state.
    pub n: u64,
    pub t: f64,
    pub prev: &'a StaggeredState,
    pub next: &'a StaggeredState,
    /// Cells of the step from `prev` to `next`; empty in baseline mode.
    pub cells: &'a [CellSolution],
    pub averages: &'a [GasState],
    pub stats: &'a StepStats,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: u64,
    pub final_state: StaggeredState,
    pub totals: StepStats,
}

/// Which update rule `run` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Modified,
    /// Plain staggered Lax-Friedrichs with a pointwise source; not the
    /// modified scheme.
    BaselineLf,
}

/// Advances `initial` for `params.steps()` steps, calling `observer` after
/// every step.
pub fn run<F>(problem: &Problem, initial: StaggeredState, mode: Mode, mut observer: F) -> Result<RunSummary>
where
    F: FnMut(&StepRecord) -> Result<()>,
{
    let steps = problem.params.steps();
    let mut state = initial;
    let mut totals = StepStats::default();
    for _ in 0..steps {
        let out = match mode {
            Mode::Modified => advance(problem, &state)?,
            Mode::BaselineLf => advance_baseline(problem, &state),
        };
        totals.merge(&out.stats);
        let rec = StepRecord {
            n: out.state.n,
            t: out.state.n as f64 * problem.params.dt,
            prev: &state,
            next: &out.state,
            cells: &out.cells,
            averages: &out.averages,
            stats: &out.stats,
        };
        observer(&rec)?;
        state = out.state;
    }
    Ok(RunSummary {
        steps,
        final_state: state,
        totals,
    })
}

/// `u_j = (u_{j-1} + u_{j+1})/2 - (Δt/2Δx)(f_{j+1} - f_{j-1}) + Δt (g_{j-1} + g_{j+1})/2`.
/// Negative densities become vacuum.
pub fn advance_baseline(problem: &Problem, state: &StaggeredState) -> StepOutput {
    let gas = &problem.gas;
    let (dx, dt) = (problem.params.dx, problem.params.dt);
    let n = state.n;
    let j_lo = state.j_lo - 1;
    let count = state.nodes.len() + 1;
    let mut stats = StepStats::default();
    let mut nodes = Vec::with_capacity(count);
    for k in 0..count {
        let j = j_lo + 2 * k as i64;
        let (ul, ur) = (state.get(j - 1), state.get(j + 1));
        let (fl, fr) = (gas.flux(ul), gas.flux(ur));
        let gl = source(problem.geom.a(problem.x(j - 1)), ul);
        let gr = source(problem.geom.a(problem.x(j + 1)), ur);
        let r = 0.5 * (ul.rho + ur.rho) - 0.5 * dt / dx * (fr[0] - fl[0]) + 0.5 * dt * (gl[0] + gr[0]);
        let m = 0.5 * (ul.m + ur.m) - 0.5 * dt / dx * (fr[1] - fl[1]) + 0.5 * dt * (gl[1] + gr[1]);
        let u = if r > 0.0 && r.is_finite() && m.is_finite() {
            GasState::new(r, m)
        } else {
            stats.vacuum_count += (r != 0.0) as u64;
            GasState::VACUUM
        };
        stats.cells += 1;
        stats.max_post_violation = stats.max_post_violation.max(problem.violation(u, j));
        nodes.push(u);
    }
    StepOutput {
        averages: nodes.clone(),
        state: StaggeredState {
            n: n + 1,
            j_lo,
            nodes,
            ambient_left: state.ambient_left,
            ambient_right: state.ambient_right,
        },
        cells: Vec::new(),
        events: Vec::new(),
        stats,
    }
}
