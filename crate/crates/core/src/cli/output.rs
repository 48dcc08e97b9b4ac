//! File formats. Floats are written with `{:.16e}` (17 significant
//! digits), so every value re-parses to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::diagnostics::EnergyReport;
use crate::error::{Error, Result};
use crate::gas::GasState;
use crate::scheme::{Problem, StaggeredState};

pub const SNAPSHOT_HEADER: &str = "x,rho,m,v,z,w,lower,upper";
pub const ENERGY_HEADER: &str = "n,t,total_energy,total_mass,slack,clamp_count,vacuum_count,max_rh_residual,max_envelope_violation,max_pre_violation,jump_sum,jump_ceiling,worst_recurrence_violation";

pub fn f(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per stored node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotRow {
    pub x: f64,
    pub rho: f64,
    pub m: f64,
    pub v: f64,
    pub z: f64,
    pub w: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn snapshot_rows(problem: &Problem, state: &StaggeredState) -> Vec<SnapshotRow> {
    let medium = problem.medium();
    state
        .iter()
        .map(|(j, u)| {
            let x = problem.x(j);
            let p = problem.gas.to_invariants(u);
            let (lower, upper) = medium.envelope(x);
            SnapshotRow {
                x,
                rho: u.rho,
                m: u.m,
                v: u.velocity(),
                z: p.z,
                w: p.w,
                lower,
                upper,
            }
        })
        .collect()
}

pub fn snapshot_csv(rows: &[SnapshotRow]) -> String {
    let mut s = String::with_capacity(rows.len() * 200);
    s.push_str(SNAPSHOT_HEADER);
    s.push('\n');
    for r in rows {
        let cols = [r.x, r.rho, r.m, r.v, r.z, r.w, r.lower, r.upper].map(f);
        s.push_str(&cols.join(","));
        s.push('\n');
    }
    s
}

pub fn parse_snapshot(text: &str) -> Result<Vec<SnapshotRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(SNAPSHOT_HEADER) {
        return Err(Error::Config("snapshot: unexpected header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let v: std::result::Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
            match v {
                Ok(v) if v.len() == 8 => Ok(SnapshotRow {
                    x: v[0],
                    rho: v[1],
                    m: v[2],
                    v: v[3],
                    z: v[4],
                    w: v[5],
                    lower: v[6],
                    upper: v[7],
                }),
                _ => Err(Error::Config(format!("snapshot line {}: malformed row", i + 2))),
            }
        })
        .collect()
}

impl SnapshotRow {
    pub fn state(&self) -> GasState {
        GasState::new(self.rho, self.m)
    }
}

pub fn energy_csv(reports: &[EnergyReport]) -> String {
    let mut s = String::new();
    s.push_str(ENERGY_HEADER);
    s.push('\n');
    for r in reports {
        let worst = r.worst_recurrence_violation.map_or(String::new(), f);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            f(r.t),
            f(r.total_energy),
            f(r.total_mass),
            f(r.slack),
            r.clamp_count,
            r.vacuum_count,
            f(r.max_rh_residual),
            f(r.max_envelope_violation),
            f(r.max_pre_violation),
            f(r.jump_sum),
            f(r.jump_ceiling),
            worst
        );
    }
    s
}

/// Energies of two runs side by side, by step.
pub fn comparison_csv(a: &[EnergyReport], b: &[EnergyReport], tags: (&str, &str)) -> String {
    let mut s = format!("n,t,energy_{0},energy_{1},slack_{0},slack_{1}\n", tags.0, tags.1);
    for (x, y) in a.iter().zip(b) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            x.n,
            f(x.t),
            f(x.total_energy),
            f(y.total_energy),
            f(x.slack),
            f(y.slack)
        );
    }
    s
}

/// End-of-run summary written as JSON.
#[derive(Debug, Clone, Serialize)]
pub struct AuditSummary {
    pub mode: String,
    pub steps: u64,
    pub dx: f64,
    pub dt: f64,
    pub m: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub min_slack: f64,
    pub initial_mass: f64,
    pub final_mass: f64,
    pub clamp_count: u64,
    pub vacuum_count: u64,
    pub collapses: u64,
    pub max_rh_residual: f64,
    pub rh_threshold: f64,
    pub max_envelope_violation: f64,
    pub max_pre_violation: f64,
    pub jump_sum: f64,
    pub jump_sum_bounded: bool,
    pub audit_slack: f64,
    pub worst_recurrence_violation: f64,
    pub worst_recurrence_node: Option<(u64, i64)>,
    pub hard_failures: Vec<String>,
}

pub fn audit_json(a: &AuditSummary) -> String {
    let mut s = serde_json::to_string_pretty(a).expect("summary is serializable");
    s.push('\n');
    s
}

pub fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let p = dir.join(name);
    std::fs::write(&p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}
