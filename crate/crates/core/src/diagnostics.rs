//! Energy, mass and recurrence monitors for scheme runs.
//!
//! Integrals over space are taken over a fixed interval `D` that contains
//! every node the run can touch; outside the stored window the ambient
//! states fill in.

use serde::Serialize;

use crate::error::Result;
use crate::gas::{GasConstants, GasState};
use crate::quadrature::{composite, gauss_legendre, Rule};
use crate::scheme::{CellSolution, Problem, StaggeredState, StepRecord};

/// Interval `[lo, hi]` over which totals are measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    /// Smallest interval covering the node window after `steps` steps.
    pub fn for_run(problem: &Problem, initial: &StaggeredState, steps: u64) -> Self {
        let dx = problem.params.dx;
        let s = steps as i64 + 1;
        Domain {
            lo: (initial.j_lo - s - 1) as f64 * dx,
            hi: (initial.j_hi() + s + 1) as f64 * dx,
        }
    }
}

fn area_integral(problem: &Problem, a: f64, b: f64) -> f64 {
    if problem.geom.is_straight() {
        return problem.geom.area(0.0) * (b - a);
    }
    composite(Rule::Gl5, a, b, 2, |x| [problem.geom.area(x)])[0]
}

/// `∫_D A(x) φ(u^n(x)) dx` for the piecewise-constant node reconstruction.
fn node_integral<F: Fn(GasState) -> f64>(problem: &Problem, state: &StaggeredState, d: Domain, phi: F) -> f64 {
    let dx = problem.params.dx;
    let j_from = (d.lo / dx).floor() as i64 - 1;
    let j_to = (d.hi / dx).ceil() as i64 + 1;
    let mut acc = 0.0;
    for (j, u) in state.extended(j_from, j_to) {
        let a = problem.x(j - 1).max(d.lo);
        let b = problem.x(j + 1).min(d.hi);
        if b > a {
            let v = phi(u);
            if v != 0.0 {
                acc += v * area_integral(problem, a, b);
            }
        }
    }
    acc
}

/// `∫_D A η*(u^n) dx` with `u^n` constant on each node cell.
pub fn node_energy(problem: &Problem, state: &StaggeredState, d: Domain) -> f64 {
    let gas = problem.gas;
    node_integral(problem, state, d, |u| gas.mechanical_pair(u).eta)
}

/// `∫_D A ρ dx` for the node reconstruction.
pub fn node_mass(problem: &Problem, state: &StaggeredState, d: Domain) -> f64 {
    node_integral(problem, state, d, |u| u.rho)
}

/// `∫ A η*(u^Δ(x, nΔt + τ)) dx` over the cells, by per-piece quadrature.
pub fn trace_energy(problem: &Problem, cells: &[CellSolution], tau: f64) -> f64 {
    let gas = problem.gas;
    let medium = problem.medium();
    cells
        .iter()
        .map(|c| {
            c.integrate(&medium, &gas, tau, c.left_edge(), c.right_edge(), false, |x, u| {
                [problem.geom.area(x) * gas.mechanical_pair(u).eta]
            })
            .0[0]
        })
        .sum()
}

/// The correction term of the discrete energy recurrence, transcribed term
/// by term. The `b` terms are odd in `m`; the `a` term is even.
pub fn correction_r(problem: &Problem, x: f64, u: GasState) -> f64 {
    let (b_part, a_part) = correction_r_parts(
        &problem.gas,
        problem.params.dx,
        problem.params.dt,
        problem.geom.a(x),
        problem.bound.eval(x),
        u,
    );
    b_part + a_part
}

/// `(b terms, a term)` of the correction for explicit coefficients.
pub fn correction_r_parts(gas: &GasConstants, dx: f64, dt: f64, a: f64, b: f64, u: GasState) -> (f64, f64) {
    if u.is_vacuum() {
        return (0.0, 0.0);
    }
    let g = gas.gamma();
    let th = gas.theta();
    let (rho, m) = (u.rho, u.m);
    let rt = rho.powf(th);
    let first = -(dx / (4.0 * dt)) * b * (3.0 / (g - 1.0) * rt * m + m.powi(3) / (2.0 * rho.powf(th + 2.0)));
    let second = (dt / (4.0 * dx))
        * a
        * (g / (g - 1.0) * rho.powf(2.0 * th) * m * m / rho + 0.5 * m.powi(4) / rho.powi(3));
    let third = -(dt / (4.0 * dx))
        * b
        * ((g + th + 1.0) / ((g - 1.0) * th) * m * rho.powf(3.0 * th)
            + (g + 3.0 * th + 4.0) / (2.0 * th) * m.powi(3) * rt / (rho * rho)
            + m.powi(5) / (2.0 * rho.powf(th + 4.0)));
    (first + third, second)
}

/// Per-node check of the discrete energy recurrence for one step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceAudit {
    /// Index of the new state.
    pub n: u64,
    pub j: Vec<i64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `max(0, lhs - rhs - c Δx^{3/2})` per node.
    pub violation: Vec<f64>,
    /// `Δt |R(x_{j+1}, u_{j+1}) - R(x_{j-1}, u_{j-1})|` per node.
    pub correction: Vec<f64>,
    pub worst_violation: f64,
    pub worst_j: i64,
    pub slack_coefficient: f64,
}

/// Default `c` in the `c Δx^{3/2}` allowance.
pub const AUDIT_SLACK: f64 = 1.0;

/// Space-time integral `∫∫ a q*(u^Δ)` over one cell, Gauss-Legendre in
/// time and per-piece quadrature in space.
fn source_work(problem: &Problem, cell: &CellSolution) -> f64 {
    let gas = problem.gas;
    let medium = problem.medium();
    if medium.is_flat_on(cell.left_edge(), cell.right_edge()) && problem.geom.is_straight() {
        return 0.0;
    }
    gauss_legendre(Rule::Gl3, 0.0, cell.dt, |tau| {
        let v = cell.integrate(&medium, &gas, tau, cell.left_edge(), cell.right_edge(), false, |x, u| {
            let a = problem.geom.a(x);
            if a == 0.0 {
                [0.0]
            } else {
                [a * gas.mechanical_pair(u).q]
            }
        });
        v.0
    })[0]
}

/// Left and right sides of the recurrence at every cell of a step.
pub fn audit_recurrence(
    problem: &Problem,
    cells: &[CellSolution],
    prev: &StaggeredState,
    next: &StaggeredState,
    slack: f64,
) -> RecurrenceAudit {
    let gas = problem.gas;
    let (dx, dt) = (problem.params.dx, problem.params.dt);
    let allowance = slack * dx.powf(1.5);
    let mut out = RecurrenceAudit {
        n: next.n,
        j: Vec::with_capacity(cells.len()),
        lhs: Vec::with_capacity(cells.len()),
        rhs: Vec::with_capacity(cells.len()),
        violation: Vec::with_capacity(cells.len()),
        correction: Vec::with_capacity(cells.len()),
        worst_violation: 0.0,
        worst_j: 0,
        slack_coefficient: slack,
    };
    for cell in cells {
        let j = cell.j;
        let (ul, ur) = (prev.get(j - 1), prev.get(j + 1));
        let (pl, pr) = (gas.mechanical_pair(ul), gas.mechanical_pair(ur));
        let lhs = gas.mechanical_pair(next.get(j)).eta;
        let corr = dt * (correction_r(problem, problem.x(j + 1), ur) - correction_r(problem, problem.x(j - 1), ul));
        let rhs = 0.5 * (pl.eta + pr.eta) - dt / (2.0 * dx) * (pr.q - pl.q)
            + corr
            + source_work(problem, cell) / (2.0 * dx);
        let v = (lhs - rhs - allowance).max(0.0);
        if v > out.worst_violation {
            out.worst_violation = v;
            out.worst_j = j;
        }
        out.j.push(j);
        out.lhs.push(lhs);
        out.rhs.push(rhs);
        out.violation.push(v);
        out.correction.push(corr.abs());
    }
    out
}

/// `Σ_j ∫_{I_j} |u^Δ(x, t_{n+1} - 0) - u^{n+1}_j|² dx` for one step.
pub fn time_jump(problem: &Problem, cells: &[CellSolution], next: &StaggeredState) -> f64 {
    let gas = problem.gas;
    let medium = problem.medium();
    cells
        .iter()
        .map(|c| {
            let u = next.get(c.j);
            c.integrate(&medium, &gas, c.dt, c.left_edge(), c.right_edge(), true, |_, w| {
                let (dr, dm) = (w.rho - u.rho, w.m - u.m);
                [dr * dr + dm * dm]
            })
            .0[0]
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub n: u64,
    pub t: f64,
    pub total_energy: f64,
    pub total_mass: f64,
    /// Energy at `n = 0`.
    pub energy_bound: f64,
    /// `energy_bound - total_energy`.
    pub slack: f64,
    pub clamp_count: u64,
    pub vacuum_count: u64,
    pub max_rh_residual: f64,
    pub max_envelope_violation: f64,
    pub max_pre_violation: f64,
    /// Accumulated squared time jumps.
    pub jump_sum: f64,
    /// Ceiling for `jump_sum`; infinite until it can be set.
    pub jump_ceiling: f64,
    pub worst_recurrence_violation: Option<f64>,
}

/// Step at which the jump-sum ceiling is calibrated.
pub const JUMP_CALIBRATION_STEP: u64 = 5;
/// Multiple of the linearly extrapolated calibration value.
pub const JUMP_CEILING_FACTOR: f64 = 10.0;

/// Observer accumulating one [`EnergyReport`] per step.
pub struct Monitor<'a> {
    problem: &'a Problem,
    domain: Domain,
    energy0: f64,
    mass0: f64,
    jump_sum: f64,
    jump_rate: Option<f64>,
    audit_slack: Option<f64>,
    pub reports: Vec<EnergyReport>,
    pub audits: Vec<RecurrenceAudit>,
}

impl<'a> Monitor<'a> {
    pub fn new(problem: &'a Problem, initial: &StaggeredState, domain: Domain) -> Self {
        let energy0 = node_energy(problem, initial, domain);
        let mass0 = node_mass(problem, initial, domain);
        Monitor {
            problem,
            domain,
            energy0,
            mass0,
            jump_sum: 0.0,
            jump_rate: None,
            audit_slack: None,
            reports: vec![EnergyReport {
                n: initial.n,
                t: initial.n as f64 * problem.params.dt,
                total_energy: energy0,
                total_mass: mass0,
                energy_bound: energy0,
                slack: 0.0,
                clamp_count: 0,
                vacuum_count: 0,
                max_rh_residual: 0.0,
                max_envelope_violation: initial
                    .iter()
                    .map(|(j, u)| problem.violation(u, j))
                    .fold(0.0, f64::max),
                max_pre_violation: 0.0,
                jump_sum: 0.0,
                jump_ceiling: f64::INFINITY,
                worst_recurrence_violation: None,
            }],
            audits: Vec::new(),
        }
    }

    /// Also run the recurrence audit every step with slack coefficient `c`.
    pub fn with_audit(mut self, c: f64) -> Self {
        self.audit_slack = Some(c);
        self
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn initial_energy(&self) -> f64 {
        self.energy0
    }

    pub fn initial_mass(&self) -> f64 {
        self.mass0
    }

    pub fn observe(&mut self, rec: &StepRecord) -> Result<()> {
        let p = self.problem;
        let energy = node_energy(p, rec.next, self.domain);
        let mass = node_mass(p, rec.next, self.domain);
        self.jump_sum += time_jump(p, rec.cells, rec.next);
        if rec.n == JUMP_CALIBRATION_STEP {
            self.jump_rate = Some(self.jump_sum / rec.n as f64);
        }
        let ceiling = self
            .jump_rate
            .map_or(f64::INFINITY, |r| JUMP_CEILING_FACTOR * r * rec.n as f64);
        let worst = self.audit_slack.map(|c| {
            let a = audit_recurrence(p, rec.cells, rec.prev, rec.next, c);
            let w = a.worst_violation;
            self.audits.push(a);
            w
        });
        let post = rec
            .next
            .iter()
            .map(|(j, u)| p.violation(u, j))
            .fold(0.0, f64::max);
        self.reports.push(EnergyReport {
            n: rec.n,
            t: rec.t,
            total_energy: energy,
            total_mass: mass,
            energy_bound: self.energy0,
            slack: self.energy0 - energy,
            clamp_count: rec.stats.clamp_count,
            vacuum_count: rec.stats.vacuum_count,
            max_rh_residual: rec.stats.max_rh_residual,
            max_envelope_violation: post,
            max_pre_violation: rec.stats.max_pre_violation,
            jump_sum: self.jump_sum,
            jump_ceiling: ceiling,
            worst_recurrence_violation: worst,
        });
        Ok(())
    }

    pub fn min_slack(&self) -> f64 {
        self.reports.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
    }

    pub fn jump_sum_bounded(&self) -> bool {
        self.reports.iter().all(|r| r.jump_sum <= r.jump_ceiling)
    }

    pub fn worst_recurrence_violation(&self) -> f64 {
        self.audits.iter().map(|a| a.worst_violation).fold(0.0, f64::max)
    }
}
