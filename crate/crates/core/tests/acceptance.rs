//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line, even when all pass.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nozzle_lf::diagnostics::{Domain, Monitor};
use nozzle_lf::nozzle::{BoundFunction, NozzleGeometry};
use nozzle_lf::riemann::{entropy_admissible, solve_riemann, Region};
use nozzle_lf::scheme::{
    build_cell, build_fan, initialize, project_node, run, CellCase, Exponents, FarField,
    InitialData, Mode, Piece, Problem, SideCase,
};
use nozzle_lf::{GasConstants, GasState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gammas() -> [f64; 3] {
    [1.2, 1.4, 5.0 / 3.0]
}

fn random_state(rng: &mut ChaCha8Rng) -> GasState {
    // log-uniform density so that near-vacuum data are well represented
    let rho = 10f64.powf(rng.gen_range(-2.0..1.0));
    GasState::from_velocity(rho, rng.gen_range(-5.0..5.0))
}

// ---------------------------------------------------------------------------
// criterion 1

fn p(g: f64, rho: f64) -> f64 {
    rho.powf(g) / g
}

/// Velocity on the forward 1-curve through `(rho_l, v_l)`.
fn forward_one(g: f64, rho_l: f64, v_l: f64, rho: f64) -> f64 {
    let th = 0.5 * (g - 1.0);
    if rho <= rho_l {
        v_l - (rho.powf(th) - rho_l.powf(th)) / th
    } else {
        v_l - ((p(g, rho) - p(g, rho_l)) * (rho - rho_l) / (rho * rho_l)).sqrt()
    }
}

/// Velocity on the backward 2-curve through `(rho_r, v_r)`.
fn backward_two(g: f64, rho_r: f64, v_r: f64, rho: f64) -> f64 {
    let th = 0.5 * (g - 1.0);
    if rho <= rho_r {
        v_r + (rho.powf(th) - rho_r.powf(th)) / th
    } else {
        v_r + ((p(g, rho) - p(g, rho_r)) * (rho - rho_r) / (rho * rho_r)).sqrt()
    }
}

/// Middle density by bisection on the curve gap; zero for a vacuum middle.
fn bisect_middle(g: f64, l: (f64, f64), r: (f64, f64)) -> (f64, f64) {
    let gap = |rho: f64| forward_one(g, l.0, l.1, rho) - backward_two(g, r.0, r.1, rho);
    if gap(0.0) <= 0.0 {
        return (0.0, 0.0);
    }
    let mut hi = l.0.max(r.0);
    while gap(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho = 0.5 * (lo + hi);
    (rho, forward_one(g, l.0, l.1, rho))
}

/// Region from the sign of the curve gap at the two data densities; `None`
/// when a sign is too close to zero to be decided.
fn sign_region(g: f64, l: (f64, f64), r: (f64, f64)) -> Option<Region> {
    let gap = |rho: f64| forward_one(g, l.0, l.1, rho) - backward_two(g, r.0, r.1, rho);
    let (a, b) = (gap(l.0), gap(r.0));
    if a.abs() < 1e-10 || b.abs() < 1e-10 {
        return None;
    }
    // gap decreases in rho: gap(rho_L) > 0 puts the middle above rho_L
    Some(match (a > 0.0, b > 0.0) {
        (false, false) => Region::I,
        (true, false) => Region::II,
        (true, true) => Region::III,
        (false, true) => Region::IV,
    })
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst, mut mismatched, mut checked, mut undecided) = (0.0f64, 0, 0, 0);
    let n = 1000;
    for i in 0..n {
        let g = gammas()[i % 3];
        let gas = GasConstants::new(g).unwrap();
        let (ul, ur) = (random_state(&mut rng), random_state(&mut rng));
        let l = (ul.rho, ul.velocity());
        let r = (ur.rho, ur.velocity());
        let sol = solve_riemann(ul, ur, &gas).unwrap();
        let (rho, v) = bisect_middle(g, l, r);
        let m = rho * v;
        let err = ((sol.middle.rho - rho).abs() / rho.max(1.0)).max((sol.middle.m - m).abs() / m.abs().max(1.0));
        worst = worst.max(err);
        if rho > 0.0 {
            match sign_region(g, l, r) {
                Some(reg) => {
                    checked += 1;
                    if reg != sol.region {
                        mismatched += 1;
                    }
                }
                None => undecided += 1,
            }
        }
    }
    outcome(
        worst <= 1e-9 && mismatched == 0,
        format!(
            "{n} problems, worst middle-state error {worst:.2e} (tol 1e-9), region mismatches {mismatched}/{checked}, undecidable signs {undecided}"
        ),
    )
}

// ---------------------------------------------------------------------------
// criteria 2 and 3 share their runs

struct RunResult {
    max_post: f64,
    max_pre: f64,
    min_slack: f64,
}

fn sweep_run(geom: &NozzleGeometry, data: &InitialData, dx: f64) -> RunResult {
    let p = common::problem(geom, data, dx, SWEEP_T);
    let s = initialize(&p, data).unwrap();
    let d = Domain::for_run(&p, &s, p.params.steps());
    let mut mon = Monitor::new(&p, &s, d);
    run(&p, s, Mode::Modified, |rec| mon.observe(rec)).unwrap();
    RunResult {
        max_post: mon.reports.iter().map(|r| r.max_envelope_violation).fold(0.0, f64::max),
        max_pre: mon.reports.iter().map(|r| r.max_pre_violation).fold(0.0, f64::max),
        min_slack: mon.min_slack(),
    }
}

const SWEEP_T: f64 = 0.2;
const SWEEP_DX: [f64; 2] = [0.02, 0.01];

type Sweep = Vec<(String, [RunResult; 2])>;

fn sweep() -> Sweep {
    let mut out = Vec::new();
    for (gn, geom) in common::nozzles() {
        for (dn, data) in common::data_sets() {
            let r = SWEEP_DX.map(|dx| sweep_run(&geom, &data, dx));
            out.push((format!("{gn}/{dn}"), r));
        }
    }
    out
}

/// `C_coarse / C_fine` stability; two zero constants count as stable.
fn stable_ratio(c_coarse: f64, c_fine: f64, lo: f64, hi: f64) -> bool {
    if c_coarse == 0.0 && c_fine == 0.0 {
        return true;
    }
    let r = c_coarse / c_fine;
    r >= lo && r <= hi
}

fn criterion_2(sw: &Sweep) -> Outcome {
    let mut bad = Vec::new();
    let mut worst_c: f64 = 0.0;
    let mut worst_post: f64 = 0.0;
    for (name, r) in sw {
        let c = [r[0].max_pre / SWEEP_DX[0], r[1].max_pre / SWEEP_DX[1]];
        worst_c = worst_c.max(c[0]).max(c[1]);
        worst_post = worst_post.max(r[0].max_post).max(r[1].max_post);
        if r[0].max_post != 0.0 || r[1].max_post != 0.0 || !stable_ratio(c[0], c[1], 0.3, 3.0) {
            bad.push(name.clone());
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} runs x 2 resolutions, max post-projection violation {worst_post:e}, max pre-projection C {worst_c:.3e}, failing {bad:?}",
            sw.len()
        ),
    )
}

fn criterion_3(sw: &Sweep) -> Outcome {
    let mut bad = Vec::new();
    let mut worst_c: f64 = 0.0;
    for (name, r) in sw {
        let c = [
            (-r[0].min_slack).max(0.0) / SWEEP_DX[0].sqrt(),
            (-r[1].min_slack).max(0.0) / SWEEP_DX[1].sqrt(),
        ];
        worst_c = worst_c.max(c[0]).max(c[1]);
        let stable = (c[0] == 0.0 && c[1] == 0.0) || c[1] <= 3.0 * c[0];
        if !stable {
            bad.push(name.clone());
        }
    }
    // machine-level slack for a constant state in a straight duct
    let geom = NozzleGeometry::straight(1.0, common::X_CUT).unwrap();
    let data = InitialData::constant(GasState::from_velocity(1.3, 0.4));
    let p = common::problem(&geom, &data, 0.01, SWEEP_T);
    let s = initialize(&p, &data).unwrap();
    let d = Domain::for_run(&p, &s, p.params.steps());
    let mut mon = Monitor::new(&p, &s, d);
    run(&p, s, Mode::Modified, |rec| mon.observe(rec)).unwrap();
    let constant_slack = mon.min_slack();
    outcome(
        bad.is_empty() && constant_slack >= -1e-10,
        format!(
            "{} runs x 2 resolutions, max C in slack >= -C sqrt(dx) is {worst_c:.3e}, unstable {bad:?}; constant-state min slack {constant_slack:e} (tol -1e-10)",
            sw.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// criteria 4 and 5

/// Problem whose run takes exactly `steps` steps.
fn problem_with_steps(geom: &NozzleGeometry, data: &InitialData, dx: f64, steps: u64) -> Problem {
    let probe = common::problem(geom, data, dx, 0.0);
    let p = common::problem(geom, data, dx, steps as f64 * probe.params.dt);
    assert_eq!(p.params.steps(), steps);
    p
}

fn criterion_4() -> Outcome {
    let (_, geom) = common::nozzles().swap_remove(1);
    let (_, data) = common::data_sets().swap_remove(2);
    let p = problem_with_steps(&geom, &data, 0.005, 100);
    let s = initialize(&p, &data).unwrap();
    let first_cells = s.nodes.len();
    let sum = run(&p, s, Mode::Modified, |_| Ok(())).unwrap();
    let r = sum.totals.max_rh_residual;
    outcome(
        r < 1e-9 && first_cells >= 200 && sum.steps == 100,
        format!(
            "throat nozzle, {first_cells} initial nodes, {} steps, {} regular cells, max mid-time jump residual {r:.2e} (tol 1e-9)",
            sum.steps, sum.totals.regular_cells
        ),
    )
}

fn criterion_5() -> Outcome {
    let geom = NozzleGeometry::straight(1.0, common::X_CUT).unwrap();
    let (_, data) = common::data_sets().swap_remove(1);
    let p = problem_with_steps(&geom, &data, 0.01, 100);
    let s = initialize(&p, &data).unwrap();
    let d = Domain::for_run(&p, &s, p.params.steps());
    let mut mon = Monitor::new(&p, &s, d);
    let sum = run(&p, s, Mode::Modified, |rec| mon.observe(rec)).unwrap();
    let m0 = mon.initial_mass();
    let drift = mon
        .reports
        .windows(2)
        .map(|w| (w[1].total_mass - w[0].total_mass).abs() / m0)
        .fold(0.0, f64::max);
    let quiet = sum.totals.clamp_count == 0 && sum.totals.vacuum_count == 0;
    outcome(
        quiet && drift < 1e-12 && sum.steps == 100,
        format!(
            "straight duct, {} steps, clamps {} vacuum events {}, max relative mass drift per step {drift:.2e} (tol 1e-12)",
            sum.steps, sum.totals.clamp_count, sum.totals.vacuum_count
        ),
    )
}

// ---------------------------------------------------------------------------
// criterion 6

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let gas = GasConstants::new(gammas()[i % 3]).unwrap();
        let u = random_state(&mut rng);
        let eta = |r: f64, m: f64| gas.mechanical_pair(GasState::new(r, m)).eta;
        let q = |r: f64, m: f64| gas.mechanical_pair(GasState::new(r, m)).q;
        let f = |r: f64, m: f64| gas.flux(GasState::new(r, m));
        let (hr, hm) = (1e-6 * u.rho, 1e-6 * u.m.abs().max(u.rho));
        let d = |g: &dyn Fn(f64, f64) -> f64| {
            [
                (g(u.rho + hr, u.m) - g(u.rho - hr, u.m)) / (2.0 * hr),
                (g(u.rho, u.m + hm) - g(u.rho, u.m - hm)) / (2.0 * hm),
            ]
        };
        let de = d(&eta);
        let dq = d(&q);
        let df0 = d(&|r, m| f(r, m)[0]);
        let df1 = d(&|r, m| f(r, m)[1]);
        for k in 0..2 {
            let rhs = de[0] * df0[k] + de[1] * df1[k];
            let res = (dq[k] - rhs).abs() / (1.0 + dq[k].abs());
            worst = worst.max(res);
        }
    }
    outcome(
        worst < 1e-6,
        format!("1000 states, worst relative residual of grad q - grad eta . Df is {worst:.2e} (tol 1e-6)"),
    )
}

// ---------------------------------------------------------------------------
// criterion 7


fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut inverse, mut inverse_bad, mut tiny) = (0u64, 0u64, 0u64);
    let (mut shocks, mut shocks_bad) = (0u64, 0u64);
    for i in 0..1000 {
        let gas = GasConstants::new(gammas()[i % 3]).unwrap();
        let ul = random_state(&mut rng);
        // fan end state with density down to 1e-4 of the left density
        let rho_m = ul.rho * 10f64.powf(-rng.gen_range(0.0..4.0));
        let z_m = gas.to_invariants(ul).w - 2.0 * gas.sound_speed(rho_m) / gas.theta();
        let h = 0.01f64.powf(rng.gen_range(0.5..1.0));
        let fan = build_fan(ul, z_m, h, &gas).unwrap();
        for s in fan.inverse_shocks(&gas).unwrap() {
            if s.strength == 0.0 {
                tiny += 1;
                continue;
            }
            inverse += 1;
            if entropy_admissible(s.left, s.right, s.speed, &gas) {
                inverse_bad += 1;
            }
        }
        let sol = solve_riemann(random_state(&mut rng), random_state(&mut rng), &gas).unwrap();
        for w in [sol.wave1, sol.wave2] {
            if w.is_shock() && w.upstream != w.downstream {
                shocks += 1;
                if !entropy_admissible(w.upstream, w.downstream, w.speed_lo, &gas) {
                    shocks_bad += 1;
                }
            }
        }
    }
    outcome(
        inverse > 0 && shocks > 0 && inverse_bad == 0 && shocks_bad == 0,
        format!(
            "inverse-shock jumps admitted {inverse_bad}/{inverse} ({tiny} zero-strength skipped), genuine shocks rejected {shocks_bad}/{shocks}"
        ),
    )
}

// ---------------------------------------------------------------------------
// criterion 8

fn worst_audit(geom: &NozzleGeometry, data: &InitialData, dx: f64, c: f64) -> f64 {
    let p = common::problem(geom, data, dx, SWEEP_T);
    let s = initialize(&p, data).unwrap();
    let d = Domain::for_run(&p, &s, p.params.steps());
    let mut mon = Monitor::new(&p, &s, d).with_audit(c);
    run(&p, s, Mode::Modified, |rec| mon.observe(rec)).unwrap();
    mon.worst_recurrence_violation()
}

fn criterion_8() -> Outcome {
    // the allowance c dx^{3/2} absorbs the whole excess at c = 1, so the
    // scaling is measured on the raw excess (c = 0)
    let nozzles = common::nozzles();
    let (_, data) = common::data_sets().swap_remove(2);
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["throat", "bulge", "laval"] {
        let geom = &nozzles.iter().find(|(n, _)| *n == name).unwrap().1;
        let v = SWEEP_DX.map(|dx| worst_audit(geom, &data, dx, 0.0));
        let ratio = v[0] / v[1];
        let ok = (v[0] == 0.0 && v[1] == 0.0) || ratio >= 2f64.sqrt();
        pass &= ok;
        parts.push(format!("{name} {:.2e}->{:.2e} (x{ratio:.2})", v[0], v[1]));
    }
    outcome(pass, format!("worst raw excess, dx 0.02 -> 0.01 (need x1.41): {}", parts.join(", ")))
}

// ---------------------------------------------------------------------------
// criterion 9

fn vacuum_problem() -> Problem {
    let gas = GasConstants::new(1.4).unwrap();
    let bound = BoundFunction::from_fn(-2.0, 2.0, 400, |_| 0.05).unwrap();
    Problem::setup(
        gas,
        NozzleGeometry::straight(1.0, common::X_CUT).unwrap(),
        bound,
        &InitialData::constant(GasState::VACUUM),
        0.02,
        0.0,
        Some(6.0),
        Exponents::defaults(&gas),
        FarField::Extend,
    )
    .unwrap()
}

fn with_z(z: f64, rho: f64) -> GasState {
    GasState::from_velocity(rho, z + rho.powf(0.2) / 0.2)
}

fn criterion_9() -> Outcome {
    let p = vacuum_problem();
    let ctx = p.ctx();
    let medium = p.medium();
    let nv = |region, left, right| CellCase::NearVacuum { region, left, right };
    let cases = [
        (
            "rarefaction-shock, truncated fan",
            GasState::from_velocity(1.97, 0.03),
            GasState::from_velocity(0.25, 1.3),
            nv(Region::IV, Some(SideCase::TruncatedFan), None),
            false,
        ),
        (
            "rarefaction-shock, plain",
            GasState::from_velocity(0.37, 0.44),
            GasState::from_velocity(0.03, -1.55),
            nv(Region::IV, Some(SideCase::Plain), None),
            true,
        ),
        (
            "rarefaction-shock, decay profile",
            // z_L sits between the envelope lower bounds at the two nodes
            with_z(-6.0, 0.59),
            GasState::from_velocity(0.13, -0.94),
            nv(Region::IV, Some(SideCase::DecayProfile), None),
            false,
        ),
        (
            "two rarefactions",
            GasState::from_velocity(1.73, -0.0074),
            GasState::from_velocity(0.7, 1.095),
            nv(Region::I, Some(SideCase::TruncatedFan), Some(SideCase::Plain)),
            false,
        ),
        (
            "two shocks",
            GasState::from_velocity(0.04, 2.86),
            GasState::from_velocity(0.0005, -1.51),
            nv(Region::III, None, None),
            true,
        ),
    ];
    let mut failures = Vec::new();
    for (name, ul, ur, expect, exact) in cases {
        let fail = |why: String| format!("{name}: {why}");
        if p.violation(ul, -1) > 0.0 || p.violation(ur, 1) > 0.0 {
            failures.push(fail("data leave the envelope".into()));
            continue;
        }
        let cell = match build_cell(&ctx, 0, 0, ul, ur) {
            Ok(c) => c,
            Err(e) => {
                failures.push(fail(e.to_string()));
                continue;
            }
        };
        if cell.case != expect {
            failures.push(fail(format!("routed to {}", cell.case.label())));
            continue;
        }
        if !cell.fronts_ordered() {
            failures.push(fail("fronts out of order".into()));
        }
        let (avg, _) = cell.average(&medium, &p.gas);
        let (u, _) = project_node(&p, avg, 0);
        if p.violation(u, 0) != 0.0 {
            failures.push(fail(format!("projected average leaves the envelope by {:e}", p.violation(u, 0))));
        }
        if exact {
            let sol = solve_riemann(ul, ur, &p.gas).unwrap();
            let same_piece = matches!(cell.pieces[..], [Piece::Riemann { sol: s, .. }] if s == sol);
            let dt = p.params.dt;
            let same_values = (0..=64).all(|k| {
                let x = cell.left_edge() + (cell.right_edge() - cell.left_edge()) * k as f64 / 64.0;
                [0.25, 0.5, 1.0].iter().all(|f| {
                    let tau = f * dt;
                    cell.eval(&medium, &p.gas, x, tau) == sol.sample((x - cell.centre) / tau)
                })
            });
            if !(same_piece && same_values) {
                failures.push(fail("differs from the exact Riemann solution".into()));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("5 near-vacuum routes checked, failures {failures:?}"),
    )
}

// ---------------------------------------------------------------------------

type Row = (usize, &'static str, Duration, Option<Duration>, std::thread::Result<Outcome>);

fn timed(k: usize, name: &'static str, limit: Option<u64>, extra: Duration, f: &mut dyn FnMut() -> Outcome) -> Row {
    let t0 = Instant::now();
    let r = catch_unwind(AssertUnwindSafe(f));
    (k, name, t0.elapsed() + extra, limit.map(Duration::from_secs), r)
}

fn main() -> ExitCode {
    let zero = Duration::ZERO;
    let mut rows: Vec<Row> = vec![timed(1, "riemann oracle equivalence", Some(10), zero, &mut criterion_1)];

    let t0 = Instant::now();
    let sw = catch_unwind(sweep);
    // the sweep is shared, so its time counts against both limits
    let st = t0.elapsed();
    match &sw {
        Ok(sw) => {
            rows.push(timed(2, "invariant region", Some(120), st, &mut || criterion_2(sw)));
            rows.push(timed(3, "energy inequality", Some(120), st, &mut || criterion_3(sw)));
        }
        Err(_) => {
            for (k, name) in [(2, "invariant region"), (3, "energy inequality")] {
                rows.push(timed(k, name, Some(120), st, &mut || panic!("sweep run failed")));
            }
        }
    }
    rows.push(timed(4, "mid-time jump conditions", Some(30), zero, &mut criterion_4));
    rows.push(timed(5, "homogeneous conservation", Some(10), zero, &mut criterion_5));
    rows.push(timed(6, "entropy-pair identity", None, zero, &mut criterion_6));
    rows.push(timed(7, "inverse-shock inadmissibility", None, zero, &mut criterion_7));
    rows.push(timed(8, "recurrence audit scaling", None, zero, &mut criterion_8));
    rows.push(timed(9, "near-vacuum routing", None, zero, &mut criterion_9));

    let mut failed = 0;
    for (k, name, took, limit, r) in rows {
        let (pass, detail) = match r {
            Ok(o) => (o.pass, o.detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        let in_time = limit.map_or(true, |l| took <= l);
        let pass = pass && in_time;
        if !pass {
            failed += 1;
        }
        let limit = limit.map_or(String::new(), |l| format!(" / {}s", l.as_secs()));
        println!(
            "criterion {k} [{name}]: {} ({:.2}s{limit}) {detail}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
