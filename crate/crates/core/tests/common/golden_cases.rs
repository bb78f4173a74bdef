// Oracle-minted reference values: each case pairs one oracle computation
// with the library call it certifies. Shared by the minting example and
// the golden-file test.

use adia::dynamics::{propagate, DEFAULT_SUBSTEPS};
use adia::experiments::figure2_data;
use adia::model::{build_effective, build_full, make_instance};
use adia::oracle::{
    brute_force_min_gap, characteristic_roots, dense_two_lowest, finite_difference_matrix_element,
    inverse_gap_integral, projected_effective, reference_propagate,
};
use adia::schedule::{
    asymptotic_runtime, closed_form_time_paper, local_schedule, runtime_quadrature, DEFAULT_S_TOLERANCE,
};
use adia::spectrum::{
    dh_ds_matrix_element, eigensystem, gap_closed_form, min_gap, scan_matrix_element,
};
use adia::{DrivingProfile, EffectiveHamiltonian, Execution, Result};
use serde_json::{json, Value};

pub const GOLDEN_FILE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/golden.json");

const Q: DrivingProfile = DrivingProfile::Quadratic;
const ORACLE_QUAD_TOL: f64 = 1e-13;

pub struct Case {
    pub quantity: &'static str,
    pub tolerance: f64,
    pub parameters: fn() -> Value,
    pub oracle: fn() -> Result<f64>,
    pub library: fn() -> Result<f64>,
}

fn runtime_case(n: u32, profile: DrivingProfile) -> Result<f64> {
    let inst = make_instance(n)?;
    inverse_gap_integral(inst.overlap(), &profile, 1.0, ORACLE_QUAD_TOL)
}

fn library_runtime(n: u32, profile: DrivingProfile) -> Result<f64> {
    Ok(runtime_quadrature(&make_instance(n)?, &profile, 1.0)?.total_time)
}

fn fidelity_pair(eps: f64, reference: bool) -> Result<f64> {
    let inst = make_instance(10)?;
    let sch = local_schedule(&inst, &Q, eps, DEFAULT_S_TOLERANCE)?;
    let run = if reference {
        reference_propagate(&inst, &Q, &sch, sch.total_time() / 1e5)?
    } else {
        propagate(&inst, &Q, &sch, DEFAULT_SUBSTEPS)?
    };
    Ok(run.final_marked_fidelity)
}

fn midpoint_matrix() -> EffectiveHamiltonian {
    EffectiveHamiltonian { s: 0.5, h_mm: 0.5, h_pp: 0.5, h_mp: -0.25 }
}

pub fn cases() -> Vec<Case> {
    vec![
        Case {
            quantity: "eigensystem.midpoint_matrix.e0",
            tolerance: 1e-15,
            parameters: || json!({"matrix": [[0.5, -0.25], [-0.25, 0.5]], "oracle": "characteristic_roots"}),
            oracle: || Ok(characteristic_roots(midpoint_matrix().matrix()).0),
            library: || Ok(eigensystem(&midpoint_matrix()).e0),
        },
        Case {
            quantity: "gap.quadratic.N4.s0.25",
            tolerance: 1e-12,
            parameters: || json!({"n": 2, "s": 0.25, "profile": "quadratic", "oracle": "dense_two_lowest"}),
            oracle: || {
                let d = dense_two_lowest(&build_full(&make_instance(2)?, &Q, 0.25, 0)?)?;
                Ok(d.e1 - d.e0)
            },
            library: || gap_closed_form(&make_instance(2)?, &Q, 0.25),
        },
        Case {
            quantity: "effective.quadratic.N4096.s0.5.h_mm",
            tolerance: 1e-12,
            parameters: || json!({"n": 12, "s": 0.5, "profile": "quadratic", "oracle": "projected_effective"}),
            oracle: || Ok(projected_effective(&build_full(&make_instance(12)?, &Q, 0.5, 0)?)[0][0]),
            library: || Ok(build_effective(&make_instance(12)?, &Q, 0.5)?.h_mm),
        },
        Case {
            quantity: "effective.quadratic.N4096.s0.5.h_mp",
            tolerance: 1e-12,
            parameters: || json!({"n": 12, "s": 0.5, "profile": "quadratic", "oracle": "projected_effective"}),
            oracle: || Ok(projected_effective(&build_full(&make_instance(12)?, &Q, 0.5, 0)?)[0][1]),
            library: || Ok(build_effective(&make_instance(12)?, &Q, 0.5)?.h_mp),
        },
        Case {
            quantity: "dense.spectator_count.N64.s0.3",
            tolerance: 0.0,
            parameters: || json!({"n": 6, "s": 0.3, "profile": "quadratic", "eigenvalue": 1.0, "within": 1e-10}),
            oracle: || Ok(dense_two_lowest(&build_full(&make_instance(6)?, &Q, 0.3, 0)?)?.count_near(1.0, 1e-10) as f64),
            library: || Ok(make_instance(6)?.size_f64() - 2.0),
        },
        Case {
            quantity: "min_gap.none.N64",
            tolerance: 1e-12,
            parameters: || json!({"n": 6, "profile": "none", "oracle": "brute_force_min_gap", "points": 1_000_001}),
            oracle: || Ok(brute_force_min_gap(make_instance(6)?.overlap(), &DrivingProfile::None, 1_000_001).1),
            library: || Ok(min_gap(&make_instance(6)?, &DrivingProfile::None).g_min),
        },
        Case {
            quantity: "min_gap.quadratic.N4",
            tolerance: 1e-9,
            parameters: || json!({"n": 2, "profile": "quadratic", "oracle": "brute_force_min_gap", "points": 1_000_001}),
            oracle: || Ok(brute_force_min_gap(make_instance(2)?.overlap(), &Q, 1_000_001).1),
            library: || Ok(min_gap(&make_instance(2)?, &Q).g_min),
        },
        Case {
            quantity: "min_gap.sqrt_product.N1024",
            tolerance: 1e-9,
            parameters: || json!({"n": 10, "profile": "sqrt_product", "oracle": "brute_force_min_gap", "points": 1_000_001}),
            oracle: || Ok(brute_force_min_gap(make_instance(10)?.overlap(), &DrivingProfile::SqrtProduct, 1_000_001).1),
            library: || Ok(min_gap(&make_instance(10)?, &DrivingProfile::SqrtProduct).g_min),
        },
        Case {
            quantity: "dh_ds.quadratic.N2^40.s0.5",
            tolerance: 1e-8,
            parameters: || json!({"n": 40, "s": 0.5, "profile": "quadratic", "oracle": "finite_difference", "delta": 1e-6}),
            oracle: || finite_difference_matrix_element(&make_instance(40)?, &Q, 0.5, 1e-6),
            library: || dh_ds_matrix_element(&make_instance(40)?, &Q, 0.5),
        },
        Case {
            quantity: "dh_ds.max.quadratic.N1024",
            tolerance: 1e-5,
            parameters: || json!({"n": 10, "profile": "quadratic", "grid": 10_000, "oracle": "finite_difference", "delta": 1e-6}),
            oracle: || {
                let inst = make_instance(10)?;
                let mut best: f64 = 0.0;
                for k in 0..10_000 {
                    best = best.max(finite_difference_matrix_element(&inst, &Q, k as f64 / 9_999.0, 1e-6)?);
                }
                Ok(best)
            },
            library: || Ok(scan_matrix_element(&make_instance(10)?, &Q, 10_000, false, Execution::Sequential)?.max),
        },
        Case {
            quantity: "runtime.quadratic.x0",
            tolerance: 1e-10,
            parameters: || json!({"x": 0.0, "profile": "quadratic", "epsilon": 1.0, "oracle": "high_res_quadrature", "tol": ORACLE_QUAD_TOL}),
            oracle: || inverse_gap_integral(0.0, &Q, 1.0, ORACLE_QUAD_TOL),
            library: || Ok(asymptotic_runtime(&Q)?.value.unwrap_or(f64::NAN)),
        },
        Case {
            quantity: "runtime.sqrt_product.x0",
            tolerance: 1e-10,
            parameters: || json!({"x": 0.0, "profile": "sqrt_product", "epsilon": 1.0, "oracle": "high_res_quadrature", "tol": ORACLE_QUAD_TOL}),
            oracle: || inverse_gap_integral(0.0, &DrivingProfile::SqrtProduct, 1.0, ORACLE_QUAD_TOL),
            library: || Ok(asymptotic_runtime(&DrivingProfile::SqrtProduct)?.value.unwrap_or(f64::NAN)),
        },
        Case {
            quantity: "runtime.none.N64",
            tolerance: 1e-10,
            parameters: || json!({"n": 6, "profile": "none", "epsilon": 1.0, "oracle": "high_res_quadrature", "tol": ORACLE_QUAD_TOL}),
            oracle: || runtime_case(6, DrivingProfile::None),
            library: || library_runtime(6, DrivingProfile::None),
        },
        Case {
            quantity: "runtime.quadratic.N64",
            tolerance: 1e-11,
            parameters: || json!({"n": 6, "profile": "quadratic", "epsilon": 1.0, "oracle": "high_res_quadrature", "tol": ORACLE_QUAD_TOL}),
            oracle: || runtime_case(6, Q),
            library: || library_runtime(6, Q),
        },
        Case {
            quantity: "runtime.quadratic.N1024",
            tolerance: 1e-11,
            parameters: || json!({"n": 10, "profile": "quadratic", "epsilon": 1.0, "oracle": "high_res_quadrature", "tol": ORACLE_QUAD_TOL}),
            oracle: || runtime_case(10, Q),
            library: || library_runtime(10, Q),
        },
        Case {
            quantity: "runtime.quadratic.N2^20",
            tolerance: 1e-11,
            parameters: || json!({"n": 20, "profile": "quadratic", "epsilon": 1.0, "oracle": "high_res_quadrature", "tol": ORACLE_QUAD_TOL}),
            oracle: || runtime_case(20, Q),
            library: || library_runtime(20, Q),
        },
        Case {
            quantity: "runtime.quadratic.N2^24",
            tolerance: 1e-11,
            parameters: || json!({"n": 24, "profile": "quadratic", "epsilon": 1.0, "oracle": "high_res_quadrature", "tol": ORACLE_QUAD_TOL}),
            oracle: || runtime_case(24, Q),
            library: || library_runtime(24, Q),
        },
        Case {
            quantity: "runtime.sqrt_product.N1024",
            tolerance: 1e-11,
            parameters: || json!({"n": 10, "profile": "sqrt_product", "epsilon": 1.0, "oracle": "high_res_quadrature", "tol": ORACLE_QUAD_TOL}),
            oracle: || runtime_case(10, DrivingProfile::SqrtProduct),
            library: || library_runtime(10, DrivingProfile::SqrtProduct),
        },
        Case {
            quantity: "closed_form_t.quadratic.N64.s0.5",
            tolerance: 1e-10,
            parameters: || json!({"n": 6, "s": 0.5, "profile": "quadratic", "oracle": "high_res_quadrature", "tol": ORACLE_QUAD_TOL}),
            oracle: || inverse_gap_integral(make_instance(6)?.overlap(), &Q, 0.5, ORACLE_QUAD_TOL),
            library: || closed_form_time_paper(&make_instance(6)?, 0.5),
        },
        Case {
            quantity: "figure2.t_driven_end.N64",
            tolerance: 1e-6,
            parameters: || json!({"n": 6, "epsilon": 1.0, "profile": "quadratic", "oracle": "high_res_quadrature", "tol": ORACLE_QUAD_TOL}),
            oracle: || runtime_case(6, Q),
            library: || {
                let table = figure2_data(&make_instance(6)?, 1.0)?;
                let (t, s) = (table.column("t")?, table.column("s_driven")?);
                let last = s.iter().rposition(|v| v.is_some()).unwrap_or(0);
                Ok(t[last].unwrap_or(f64::NAN))
            },
        },
        Case {
            quantity: "propagate.fidelity.quadratic.N1024.eps0.05",
            tolerance: 1e-7,
            parameters: || json!({"n": 10, "epsilon": 0.05, "profile": "quadratic", "oracle": "reference_propagate", "dt": "T/1e5"}),
            oracle: || fidelity_pair(0.05, true),
            library: || fidelity_pair(0.05, false),
        },
        Case {
            quantity: "propagate.fidelity.quadratic.N1024.eps0.02",
            tolerance: 1e-7,
            parameters: || json!({"n": 10, "epsilon": 0.02, "profile": "quadratic", "oracle": "reference_propagate", "dt": "T/1e5"}),
            oracle: || fidelity_pair(0.02, true),
            library: || fidelity_pair(0.02, false),
        },
    ]
}
