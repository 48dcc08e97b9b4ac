//! `run`, `riemann` and `validate`.

use std::io::Write;
use std::path::PathBuf;

use crate::diagnostics::{Domain, Monitor};
use crate::error::{Error, Result};
use crate::gas::{GasConstants, GasState};
use crate::nozzle::{admissibility_constants, validate_condition};
use crate::riemann::{solve_riemann, WaveDescriptor, WaveKind};
use crate::scheme::{initialize, run, Mode, Problem, RunSummary};

use super::config::{mode_tag, RunConfig};
use super::output::{self, f, AuditSummary};

/// Mid-time jump residual above which a run counts as failed.
pub const RH_THRESHOLD: f64 = 1e-9;

/// Exit status for a run that completed with an audit hard failure.
pub const EXIT_AUDIT_FAILURE: i32 = 2;

pub struct RunOutcome {
    pub exit: i32,
    pub summary: AuditSummary,
    pub files: Vec<PathBuf>,
}

struct ModeRun {
    monitor_reports: Vec<crate::diagnostics::EnergyReport>,
    summary: AuditSummary,
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

/// Runs one mode, calling `snapshot` at `n = 0`, every `stride` steps and
/// at the last step.
fn run_mode(
    cfg: &RunConfig,
    problem: &Problem,
    mode: Mode,
    mut snapshot: impl FnMut(u64, &crate::scheme::StaggeredState) -> Result<()>,
) -> Result<ModeRun> {
    let initial = initialize(problem, &cfg.initial)?;
    let steps = problem.params.steps();
    let domain = Domain::for_run(problem, &initial, steps);
    let mut mon = Monitor::new(problem, &initial, domain);
    if mode == Mode::Modified {
        mon = mon.with_audit(cfg.audit_slack);
    }
    snapshot(0, &initial)?;
    let mut worst_node = None;
    let mut worst = 0.0;
    let sum: RunSummary = run(problem, initial, mode, |rec| {
        mon.observe(rec)?;
        if let Some(a) = mon.audits.last() {
            if a.worst_violation > worst {
                worst = a.worst_violation;
                worst_node = Some((a.n, a.worst_j));
            }
        }
        // per-node audit data are summarized above and not kept
        mon.audits.clear();
        if rec.n % cfg.stride == 0 || rec.n == steps {
            snapshot(rec.n, rec.next)?;
        }
        Ok(())
    })?;
    let reports = std::mem::take(&mut mon.reports);
    let last = reports.last().expect("monitor holds the initial report");
    let max_post = reports.iter().map(|r| r.max_envelope_violation).fold(0.0, f64::max);
    let mut hard = Vec::new();
    if mode == Mode::Modified {
        if max_post > 0.0 {
            hard.push(format!("envelope violated after projection by {max_post:e}"));
        }
        if sum.totals.max_rh_residual > RH_THRESHOLD {
            hard.push(format!(
                "mid-time jump residual {:e} above {RH_THRESHOLD:e}",
                sum.totals.max_rh_residual
            ));
        }
    }
    let summary = AuditSummary {
        mode: mode_tag(mode).into(),
        steps: sum.steps,
        dx: problem.params.dx,
        dt: problem.params.dt,
        m: problem.params.m,
        initial_energy: mon.initial_energy(),
        final_energy: last.total_energy,
        min_slack: reports.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min),
        initial_mass: mon.initial_mass(),
        final_mass: last.total_mass,
        clamp_count: sum.totals.clamp_count,
        vacuum_count: sum.totals.vacuum_count,
        collapses: sum.totals.collapses,
        max_rh_residual: sum.totals.max_rh_residual,
        rh_threshold: RH_THRESHOLD,
        max_envelope_violation: max_post,
        max_pre_violation: sum.totals.max_pre_violation,
        jump_sum: last.jump_sum,
        jump_sum_bounded: reports.iter().all(|r| r.jump_sum <= r.jump_ceiling),
        audit_slack: cfg.audit_slack,
        worst_recurrence_violation: worst,
        worst_recurrence_node: worst_node,
        hard_failures: hard,
    };
    Ok(ModeRun {
        monitor_reports: reports,
        summary,
    })
}

pub fn cmd_run(cfg: &RunConfig, out: &mut dyn Write) -> Result<RunOutcome> {
    let problem = cfg.problem()?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::Io(format!("{}: {e}", cfg.out.display())))?;
    let tag = mode_tag(cfg.mode);
    let mut files = Vec::new();
    let primary = run_mode(cfg, &problem, cfg.mode, |n, state| {
        let name = format!("{tag}_snapshot_{n:06}.csv");
        output::write(&cfg.out, &name, &output::snapshot_csv(&output::snapshot_rows(&problem, state)))?;
        files.push(cfg.out.join(name));
        Ok(())
    })?;
    let energy = format!("{tag}_energy.csv");
    output::write(&cfg.out, &energy, &output::energy_csv(&primary.monitor_reports))?;
    files.push(cfg.out.join(energy));
    let audit = format!("{tag}_audit.json");
    output::write(&cfg.out, &audit, &output::audit_json(&primary.summary))?;
    files.push(cfg.out.join(audit));

    if cfg.mode == Mode::BaselineLf {
        let reference = run_mode(cfg, &problem, Mode::Modified, |_, _| Ok(()))?;
        let text = output::comparison_csv(
            &reference.monitor_reports,
            &primary.monitor_reports,
            ("modified", "baseline_lf"),
        );
        output::write(&cfg.out, "comparison.csv", &text)?;
        files.push(cfg.out.join("comparison.csv"));
    }

    let s = &primary.summary;
    writeln!(
        out,
        "mode {} (dx {}, dt {}, M {}, {} steps)",
        s.mode,
        f(s.dx),
        f(s.dt),
        f(s.m),
        s.steps
    )
    .map_err(io)?;
    if cfg.mode == Mode::BaselineLf {
        writeln!(out, "baseline-lf is plain staggered Lax-Friedrichs with a pointwise source, not the modified scheme").map_err(io)?;
    }
    writeln!(
        out,
        "energy {} -> {} (min slack {})",
        f(s.initial_energy),
        f(s.final_energy),
        f(s.min_slack)
    )
    .map_err(io)?;
    writeln!(
        out,
        "clamps {}, vacuum events {}, max jump residual {}, max envelope violation {}",
        s.clamp_count,
        s.vacuum_count,
        f(s.max_rh_residual),
        f(s.max_envelope_violation)
    )
    .map_err(io)?;
    for h in &s.hard_failures {
        writeln!(out, "HARD FAILURE: {h}").map_err(io)?;
    }
    writeln!(out, "wrote {} files to {}", files.len(), cfg.out.display()).map_err(io)?;
    let exit = if s.hard_failures.is_empty() { 0 } else { EXIT_AUDIT_FAILURE };
    Ok(RunOutcome {
        exit,
        summary: primary.summary,
        files,
    })
}

fn wave_line(name: &str, w: &WaveDescriptor) -> String {
    match w.kind.kind {
        WaveKind::Shock => format!("{name}: shock, speed {}", f(w.speed_lo)),
        _ => format!("{name}: rarefaction, speeds [{}, {}]", f(w.speed_lo), f(w.speed_hi)),
    }
}

/// Prints the region, middle state, waves and `samples` points of the
/// solution at time `t` on `[x_min, x_max]`.
pub fn cmd_riemann(
    left: GasState,
    right: GasState,
    gamma: f64,
    t: f64,
    samples: usize,
    x_range: (f64, f64),
    out: &mut dyn Write,
) -> Result<()> {
    let gas = GasConstants::new(gamma)?;
    if !(t > 0.0) {
        return Err(Error::Config(format!("t must be positive, got {t}")));
    }
    if samples < 1 || !(x_range.1 >= x_range.0) {
        return Err(Error::Config("need samples >= 1 and x_min <= x_max".into()));
    }
    let sol = solve_riemann(left, right, &gas)?;
    let mid = gas.to_invariants(sol.middle);
    writeln!(out, "region: {:?}", sol.region).map_err(io)?;
    writeln!(
        out,
        "middle: rho {} m {} z {} w {}",
        f(sol.middle.rho),
        f(sol.middle.m),
        f(mid.z),
        f(mid.w)
    )
    .map_err(io)?;
    if left == right {
        writeln!(out, "constant state").map_err(io)?;
        writeln!(out, "x,rho,m").map_err(io)?;
        writeln!(out, "all,{},{}", f(left.rho), f(left.m)).map_err(io)?;
        return Ok(());
    }
    writeln!(out, "{}", wave_line("wave 1", &sol.wave1)).map_err(io)?;
    writeln!(out, "{}", wave_line("wave 2", &sol.wave2)).map_err(io)?;
    writeln!(out, "x,rho,m").map_err(io)?;
    for k in 0..samples {
        let x = if samples == 1 {
            x_range.0
        } else {
            x_range.0 + (x_range.1 - x_range.0) * k as f64 / (samples - 1) as f64
        };
        let u = sol.sample(x / t);
        writeln!(out, "{},{},{}", f(x), f(u.rho), f(u.m)).map_err(io)?;
    }
    Ok(())
}

/// Prints the admissibility report; returns whether it passes.
pub fn cmd_validate(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    let consts = admissibility_constants(&cfg.gas)?;
    let r = validate_condition(&cfg.geometry, &cfg.bound, &consts);
    let mut auto = cfg.clone();
    auto.m = None;
    let m_data = auto.problem()?.params.m;
    writeln!(out, "mu {}", f(r.mu)).map_err(io)?;
    writeln!(out, "sigma {}", f(r.sigma)).map_err(io)?;
    writeln!(out, "integral budget {}", f(r.budget)).map_err(io)?;
    writeln!(out, "I+ {}", f(r.i_plus)).map_err(io)?;
    writeln!(out, "I- {}", f(r.i_minus)).map_err(io)?;
    writeln!(out, "pointwise margin max(|a| - mu b) {} at x {}", f(r.pointwise_margin), f(r.worst_x)).map_err(io)?;
    writeln!(out, "integral excess {}", f(r.integral_excess)).map_err(io)?;
    writeln!(out, "M from data {}", f(m_data)).map_err(io)?;
    if let Some(m) = cfg.m {
        writeln!(out, "M configured {}", f(m)).map_err(io)?;
    }
    let verdict = match (r.pointwise_ok, r.integral_ok) {
        (true, true) => "PASS".to_string(),
        (false, true) => "FAIL (pointwise bound)".to_string(),
        (true, false) => format!("FAIL (integral over budget by {})", f(r.integral_excess)),
        (false, false) => format!("FAIL (pointwise bound, integral over budget by {})", f(r.integral_excess)),
    };
    writeln!(out, "{verdict}").map_err(io)?;
    Ok(r.pass)
}
