//! Shared nozzle and data configurations for the integration tests.
#![allow(dead_code)]

use nozzle_lf::nozzle::{
    admissibility_constants, validate_condition, AreaProfile, AreaTable, BoundFunction,
    NozzleGeometry,
};
use nozzle_lf::scheme::{Exponents, FarField, InitialData, Problem};
use nozzle_lf::{GasConstants, GasState};

pub const X_CUT: f64 = 1.0;
pub const BOUND_WIDTH: f64 = 0.02;
pub const BOUND_MARGIN: f64 = 0.05;

pub fn air() -> GasConstants {
    GasConstants::new(1.4).unwrap()
}

/// Named admissible nozzles.
pub fn nozzles() -> Vec<(&'static str, NozzleGeometry)> {
    let table = AreaTable::new(
        vec![-0.8, -0.4, 0.0, 0.4, 0.8],
        vec![1.0, 0.92, 0.85, 0.9, 1.0],
    )
    .unwrap();
    vec![
        ("straight", NozzleGeometry::straight(1.0, X_CUT).unwrap()),
        (
            "throat",
            NozzleGeometry::new(AreaProfile::Bump { area: 1.0, eps: 0.3 }, X_CUT).unwrap(),
        ),
        (
            "bulge",
            NozzleGeometry::new(AreaProfile::Bump { area: 1.0, eps: -0.3 }, X_CUT).unwrap(),
        ),
        (
            "laval",
            NozzleGeometry::new(
                AreaProfile::ConvergingDiverging {
                    inlet: 1.1,
                    outlet: 1.0,
                    throat: 0.15,
                },
                X_CUT,
            )
            .unwrap(),
        ),
        ("table", NozzleGeometry::new(AreaProfile::Table(table), X_CUT).unwrap()),
    ]
}

/// Named data with rest states outside a bounded region.
pub fn data_sets() -> Vec<(&'static str, InitialData)> {
    vec![
        (
            "gaussian",
            InitialData::Gaussian {
                rho_bg: 0.0,
                amplitude: 1.0,
                x0: -0.2,
                width: 0.15,
                v0: 0.3,
            },
        ),
        (
            "slab",
            InitialData::slab(
                -0.4,
                0.0,
                GasState::from_velocity(3.0, 0.5),
                GasState::from_velocity(1.5, 0.0),
            ),
        ),
        (
            "table",
            InitialData::Table {
                x: vec![-0.8, -0.4, 0.0, 0.4, 0.8],
                rho: vec![1.5, 2.5, 3.5, 2.0, 1.5],
                v: vec![0.0, 0.2, -0.1, 0.3, 0.0],
            },
        ),
    ]
}

/// Default bound for `geom`; panics when the nozzle is not admissible.
pub fn bound_for(geom: &NozzleGeometry, gas: &GasConstants) -> BoundFunction {
    let c = admissibility_constants(gas).unwrap();
    let b = BoundFunction::from_geometry(geom, &c, BOUND_WIDTH, BOUND_MARGIN).unwrap();
    let r = validate_condition(geom, &b, &c);
    assert!(r.pass, "nozzle not admissible: {r:?}");
    b
}

pub fn problem(geom: &NozzleGeometry, data: &InitialData, dx: f64, t_final: f64) -> Problem {
    let gas = air();
    let bound = bound_for(geom, &gas);
    Problem::setup(
        gas,
        geom.clone(),
        bound,
        data,
        dx,
        t_final,
        None,
        Exponents::defaults(&gas),
        FarField::Extend,
    )
    .unwrap()
}
