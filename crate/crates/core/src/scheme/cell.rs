//! Piecewise description of the approximate solution inside one cell.
//!
//! Pieces are ordered left to right and separated by straight fronts
//! `x = centre + speed · τ`, `τ = t - nΔt`, all issuing from the cell centre.

use serde::Serialize;

use crate::gas::{GasConstants, GasState};
use crate::nozzle::{Medium, Profile};
use crate::quadrature::{composite, Rule};
use crate::riemann::{rh_residual, Region, RiemannSolution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Constant(GasState),
    /// Steady profile with its time correction.
    Profile(Profile),
    /// Exact Riemann solution centred at `centre`; `mirrored` samples the
    /// solution in the reflected frame.
    Riemann {
        sol: RiemannSolution,
        centre: f64,
        mirrored: bool,
    },
}

impl Piece {
    pub fn eval(&self, medium: &Medium, gas: &GasConstants, x: f64, tau: f64) -> (GasState, bool) {
        match self {
            Piece::Constant(u) => (*u, false),
            Piece::Profile(p) => p.eval(medium, gas, x, tau),
            Piece::Riemann {
                sol,
                centre,
                mirrored,
            } => {
                let d = x - centre;
                let d = if *mirrored { -d } else { d };
                let u = if tau > 0.0 {
                    sol.sample(d / tau)
                } else if d < 0.0 {
                    sol.left
                } else {
                    sol.right
                };
                (if *mirrored { u.reflect() } else { u }, false)
            }
        }
    }

    pub fn state(&self, medium: &Medium, gas: &GasConstants, x: f64, tau: f64) -> GasState {
        self.eval(medium, gas, x, tau).0
    }

    pub fn reflect(&self) -> Piece {
        match self {
            Piece::Constant(u) => Piece::Constant(u.reflect()),
            Piece::Profile(p) => Piece::Profile(p.reflect()),
            Piece::Riemann {
                sol,
                centre,
                mirrored,
            } => Piece::Riemann {
                sol: *sol,
                centre: -centre,
                mirrored: !mirrored,
            },
        }
    }

    /// Wave edges of a Riemann piece at time offset `tau`, increasing.
    fn wave_edges(&self, tau: f64) -> Vec<f64> {
        match self {
            Piece::Riemann {
                sol,
                centre,
                mirrored,
            } => {
                let mut v: Vec<f64> = sol
                    .breakpoints()
                    .iter()
                    .map(|s| if *mirrored { centre - s * tau } else { centre + s * tau })
                    .collect();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v
            }
            _ => Vec::new(),
        }
    }

    fn in_fan(&self, x: f64, tau: f64) -> bool {
        match self {
            Piece::Riemann {
                sol,
                centre,
                mirrored,
            } if tau > 0.0 => {
                let xi = (x - centre) / tau;
                sol.in_fan(if *mirrored { -xi } else { xi })
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FrontKind {
    /// Discontinuity required to satisfy the jump conditions at mid-time.
    Rh,
    /// Boundary between construction regions in near-vacuum cells.
    Seam,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Front {
    pub speed: f64,
    pub kind: FrontKind,
}

impl Front {
    pub fn rh(speed: f64) -> Self {
        Front {
            speed,
            kind: FrontKind::Rh,
        }
    }

    pub fn seam(speed: f64) -> Self {
        Front {
            speed,
            kind: FrontKind::Seam,
        }
    }
}

/// How one side of a near-vacuum cell was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SideCase {
    /// Fan truncated at density `2Δx^β`, then a Riemann solution.
    TruncatedFan,
    /// Plain Riemann solution from the node state.
    Plain,
    /// Decaying profile up to the point where `z` meets the lower bound.
    DecayProfile,
}

impl SideCase {
    fn label(self) -> &'static str {
        match self {
            SideCase::TruncatedFan => "truncated-fan",
            SideCase::Plain => "plain",
            SideCase::DecayProfile => "decay-profile",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CellCase {
    Uniform,
    Regular {
        region: Region,
    },
    NearVacuum {
        region: Region,
        left: Option<SideCase>,
        right: Option<SideCase>,
    },
}

fn reflect_region(r: Region) -> Region {
    match r {
        Region::II => Region::IV,
        Region::IV => Region::II,
        other => other,
    }
}

impl CellCase {
    pub fn reflect(self) -> Self {
        match self {
            CellCase::Uniform => CellCase::Uniform,
            CellCase::Regular { region } => CellCase::Regular {
                region: reflect_region(region),
            },
            CellCase::NearVacuum {
                region,
                left,
                right,
            } => CellCase::NearVacuum {
                region: reflect_region(region),
                left: right,
                right: left,
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            CellCase::Uniform => "uniform".into(),
            CellCase::Regular { region } => format!("regular-{region:?}"),
            CellCase::NearVacuum {
                region,
                left,
                right,
            } => format!(
                "near-vacuum-{region:?}[{}|{}]",
                left.map(|s| s.label()).unwrap_or("-"),
                right.map(|s| s.label()).unwrap_or("-")
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSolution {
    pub j: i64,
    pub n: u64,
    /// Cell centre in the frame the pieces live in.
    pub centre: f64,
    pub dx: f64,
    pub dt: f64,
    pub pieces: Vec<Piece>,
    /// `fronts[k]` separates `pieces[k]` and `pieces[k + 1]`.
    pub fronts: Vec<Front>,
    pub case: CellCase,
}

impl CellSolution {
    pub fn uniform(j: i64, n: u64, centre: f64, dx: f64, dt: f64, u: GasState) -> Self {
        CellSolution {
            j,
            n,
            centre,
            dx,
            dt,
            pieces: vec![Piece::Constant(u)],
            fronts: Vec::new(),
            case: CellCase::Uniform,
        }
    }

    pub fn left_edge(&self) -> f64 {
        self.centre - self.dx
    }

    pub fn right_edge(&self) -> f64 {
        self.centre + self.dx
    }

    /// Image under `x -> -x`.
    pub fn reflect(&self) -> Self {
        CellSolution {
            j: self.j,
            n: self.n,
            centre: -self.centre,
            dx: self.dx,
            dt: self.dt,
            pieces: self.pieces.iter().rev().map(|p| p.reflect()).collect(),
            fronts: self
                .fronts
                .iter()
                .rev()
                .map(|f| Front {
                    speed: -f.speed,
                    kind: f.kind,
                })
                .collect(),
            case: self.case.reflect(),
        }
    }

    pub fn front_position(&self, k: usize, tau: f64) -> f64 {
        self.centre + self.fronts[k].speed * tau
    }

    /// Index of the piece covering `x` at `tau`.
    pub fn piece_index(&self, x: f64, tau: f64) -> usize {
        let mut k = 0;
        while k < self.fronts.len() && x >= self.front_position(k, tau) {
            k += 1;
        }
        k
    }

    pub fn eval(&self, medium: &Medium, gas: &GasConstants, x: f64, tau: f64) -> GasState {
        self.pieces[self.piece_index(x, tau)].state(medium, gas, x, tau)
    }

    /// `(lo, hi, piece)` covering the cell at `tau`, possibly empty intervals.
    pub fn intervals(&self, tau: f64) -> Vec<(f64, f64, usize)> {
        let lo = self.left_edge();
        let hi = self.right_edge();
        let mut out = Vec::with_capacity(self.pieces.len());
        let mut a = lo;
        for k in 0..self.pieces.len() {
            let b = if k < self.fronts.len() {
                self.front_position(k, tau).clamp(a, hi)
            } else {
                hi
            };
            out.push((a, b, k));
            a = b;
        }
        out
    }

    /// `∫_{lo}^{hi} f(x, u(x, τ)) dx` with the cell split at fronts and
    /// wave edges. `x_free` marks integrands independent of `x`, which are
    /// integrated exactly on constant stretches. Returns the integral and
    /// the number of collapsed time corrections met.
    pub fn integrate<const N: usize, F>(
        &self,
        medium: &Medium,
        gas: &GasConstants,
        tau: f64,
        lo: f64,
        hi: f64,
        x_free: bool,
        mut f: F,
    ) -> ([f64; N], u32)
    where
        F: FnMut(f64, GasState) -> [f64; N],
    {
        let mut acc = [0.0; N];
        let mut collapses = 0u32;
        for (a, b, k) in self.intervals(tau) {
            let a = a.max(lo);
            let b = b.min(hi);
            if !(b > a) {
                continue;
            }
            let piece = &self.pieces[k];
            let mut add = |v: [f64; N]| {
                for i in 0..N {
                    acc[i] += v[i];
                }
            };
            match piece {
                Piece::Constant(u) => {
                    if x_free {
                        let v = f(0.5 * (a + b), *u);
                        add(v.map(|c| c * (b - a)));
                    } else {
                        add(composite(Rule::Gl5, a, b, 1, |x| f(x, *u)));
                    }
                }
                Piece::Profile(p) => {
                    add(composite(Rule::Gl5, a, b, 2, |x| {
                        let (u, c) = p.eval(medium, gas, x, tau);
                        if c {
                            collapses += 1;
                        }
                        f(x, u)
                    }));
                }
                Piece::Riemann { .. } => {
                    let mut cuts = vec![a];
                    for e in piece.wave_edges(tau) {
                        if e > a && e < b {
                            cuts.push(e);
                        }
                    }
                    cuts.push(b);
                    for w in cuts.windows(2) {
                        let (s, e) = (w[0], w[1]);
                        if !(e > s) {
                            continue;
                        }
                        let mid = 0.5 * (s + e);
                        if piece.in_fan(mid, tau) || !x_free {
                            let panels = if piece.in_fan(mid, tau) { 2 } else { 1 };
                            add(composite(Rule::Gl5, s, e, panels, |x| {
                                f(x, piece.state(medium, gas, x, tau))
                            }));
                        } else {
                            let u = piece.state(medium, gas, mid, tau);
                            add(f(mid, u).map(|c| c * (e - s)));
                        }
                    }
                }
            }
        }
        (acc, collapses)
    }

    /// Cell average of the trace at `(n+1)Δt - 0`.
    pub fn average(&self, medium: &Medium, gas: &GasConstants) -> (GasState, u32) {
        if let [Piece::Constant(u)] = self.pieces[..] {
            return (u, 0);
        }
        let (v, c) = self.integrate(
            medium,
            gas,
            self.dt,
            self.left_edge(),
            self.right_edge(),
            true,
            |_, u| [u.rho, u.m],
        );
        let w = self.right_edge() - self.left_edge();
        (GasState::new(v[0] / w, v[1] / w), c)
    }

    /// Jump-condition residual of every `Rh` front at mid-time.
    pub fn rh_residuals(&self, medium: &Medium, gas: &GasConstants) -> Vec<f64> {
        let tau = 0.5 * self.dt;
        self.fronts
            .iter()
            .enumerate()
            .filter(|(_, f)| f.kind == FrontKind::Rh)
            .map(|(k, f)| {
                let x = self.front_position(k, tau);
                let l = self.pieces[k].state(medium, gas, x, tau);
                let r = self.pieces[k + 1].state(medium, gas, x, tau);
                rh_residual(l, r, f.speed, gas)
            })
            .collect()
    }

    pub fn max_rh_residual(&self, medium: &Medium, gas: &GasConstants) -> f64 {
        self.rh_residuals(medium, gas).into_iter().fold(0.0, f64::max)
    }

    /// Jump-condition fronts strictly increasing, seams non-decreasing.
    pub fn fronts_ordered(&self) -> bool {
        self.fronts.windows(2).all(|w| {
            if w[0].kind == FrontKind::Rh && w[1].kind == FrontKind::Rh {
                w[1].speed > w[0].speed
            } else {
                w[1].speed >= w[0].speed
            }
        })
    }

    /// Largest wave or front speed in the cell.
    pub fn max_speed(&self) -> f64 {
        let mut s = self.fronts.iter().map(|f| f.speed.abs()).fold(0.0, f64::max);
        for p in &self.pieces {
            if let Piece::Riemann { sol, .. } = p {
                for b in sol.breakpoints() {
                    s = s.max(b.abs());
                }
            }
        }
        s
    }
}
