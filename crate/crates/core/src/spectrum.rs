//! Instantaneous spectra of the reduced Hamiltonian.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::model::{
    build_effective, build_effective_derivative, check_reduced_time, effective_entries, DrivingProfile,
    EffectiveHamiltonian, ProfileKind, ReducedState, SearchInstance,
};

/// Below this overlap the closed forms are evaluated in the `x -> 0` limit.
const SMALL_OVERLAP: f64 = 1e-12;

/// Two lowest eigenpairs of `H(s)` in the reduced basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub s: f64,
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    pub v0: [f64; 2],
    pub v1: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMethod {
    ClosedForm,
    GoldenSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub s_star: f64,
    pub g_min: f64,
    pub method: GapMethod,
}

/// Which `|psi0>` coefficient the closed-form eigenvectors use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenvectorForm {
    /// `(s-1)(s+x)(1 + sqrt(1-x^2))`, as typeset.
    Printed,
    /// `2 (s-1)(s+x)`, the coefficient consistent with the typeset
    /// normalization; reproduces the exact eigenvectors.
    Consistent,
}

/// Sign convention: non-negative `|m>` component, ties broken by a
/// non-negative `|m_perp>` component.
pub(crate) fn orient(v: [f64; 2]) -> [f64; 2] {
    if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) {
        [-v[0], -v[1]]
    } else {
        v
    }
}

/// Closed-form eigen-decomposition of a real symmetric 2x2 matrix.
pub fn eigensystem(h: &EffectiveHamiltonian) -> SpectrumPoint {
    let diff = h.h_mm - h.h_pp;
    let disc = diff.hypot(2.0 * h.h_mp);
    let tr = h.trace();
    if h.h_mp == 0.0 {
        let (lo, hi) = if h.h_mm <= h.h_pp { ([1.0, 0.0], [0.0, 1.0]) } else { ([0.0, 1.0], [1.0, 0.0]) };
        return SpectrumPoint {
            s: h.s,
            e0: h.h_mm.min(h.h_pp),
            e1: h.h_mm.max(h.h_pp),
            gap: disc,
            v0: lo,
            v1: hi,
        };
    }
    // Rotation angle of the upper eigenvector (cos t, sin t).
    let theta = 0.5 * (2.0 * h.h_mp).atan2(diff);
    let (sin, cos) = theta.sin_cos();
    SpectrumPoint {
        s: h.s,
        e0: 0.5 * (tr - disc),
        e1: 0.5 * (tr + disc),
        gap: disc,
        v0: orient([-sin, cos]),
        v1: orient([cos, sin]),
    }
}

/// Spectrum of `H(s)` for an instance and profile.
pub fn spectrum_at(instance: &SearchInstance, profile: &DrivingProfile, s: f64) -> Result<SpectrumPoint> {
    Ok(eigensystem(&build_effective(instance, profile, s)?))
}

/// Spectra on a grid of reduced times, in grid order.
pub fn spectrum_grid(
    instance: &SearchInstance,
    profile: &DrivingProfile,
    grid: &[f64],
    mode: Execution,
) -> Result<Vec<SpectrumPoint>> {
    exec::map(mode, grid, |&s| spectrum_at(instance, profile, s)).into_iter().collect()
}

/// `g(s)^2 = 1 - 4 s(1-s) (1 - x(x+1) - s(1-s))` for the quadratic profile.
pub(crate) fn quadratic_gap_squared(x: f64, s: f64) -> f64 {
    let x = if x < SMALL_OVERLAP { 0.0 } else { x };
    let u = s * (1.0 - s);
    1.0 - 4.0 * u * (1.0 - x * (x + 1.0) - u)
}

/// `g(s)^2 = 1 - 4 (1 - x^2) s(1-s)` for plain interpolation, evaluated as
/// `x^2 + (1 - x^2)(1 - 2s)^2` so the `x^2`-sized minimum survives rounding.
pub(crate) fn plain_gap_squared(x: f64, s: f64) -> f64 {
    let x = if x < SMALL_OVERLAP { 0.0 } else { x };
    let w = 1.0 - 2.0 * s;
    x * x + (1.0 - x * x) * w * w
}

/// Squared gap at overlap `x`: closed forms for the plain and quadratic
/// paths, the 2x2 discriminant otherwise. Valid for `x = 0`.
pub(crate) fn gap_squared_at_overlap(x: f64, profile: &DrivingProfile, s: f64) -> f64 {
    match profile.kind() {
        ProfileKind::None => plain_gap_squared(x, s),
        ProfileKind::Quadratic => quadratic_gap_squared(x, s),
        _ => {
            let h = effective_entries(x, profile.coefficient_unchecked(s), s);
            let diff = h.h_mm - h.h_pp;
            diff * diff + 4.0 * h.h_mp * h.h_mp
        }
    }
}

/// Squared instantaneous gap, the rate function of local schedules.
pub fn gap_squared(instance: &SearchInstance, profile: &DrivingProfile, s: f64) -> Result<f64> {
    check_reduced_time(s)?;
    Ok(gap_squared_at_overlap(instance.overlap(), profile, s))
}

/// Closed-form gap of the quadratic-profile Hamiltonian.
pub fn gap_closed_form(instance: &SearchInstance, profile: &DrivingProfile, s: f64) -> Result<f64> {
    if profile.kind() != ProfileKind::Quadratic {
        return Err(Error::invalid(format!(
            "closed-form gap applies to the quadratic profile only, got {}",
            profile.label()
        )));
    }
    check_reduced_time(s)?;
    Ok(quadratic_gap_squared(instance.overlap(), s).sqrt())
}

/// Gap from the numerical eigensystem.
pub fn numerical_gap(instance: &SearchInstance, profile: &DrivingProfile, s: f64) -> Result<f64> {
    Ok(spectrum_at(instance, profile, s)?.gap)
}

/// Minimum gap over `s in [0, 1]`.
///
/// The quadratic profile is solved exactly. With `u = s(1-s)` and
/// `c = 1 - x - x^2`, `g^2 = 1 - 4cu + 4u^2` on `u in [0, 1/4]`: for
/// `c >= 1/2` (`N >= 8`) the minimum sits at `s = 1/2` with
/// `g = 1/2 + 1/sqrt(N)`; below that it moves to `u = c/2`, the smaller of
/// the two mirror-image roots is reported. Everything else goes through
/// [`min_gap_numeric`].
pub fn min_gap(instance: &SearchInstance, profile: &DrivingProfile) -> GapReport {
    if profile.kind() != ProfileKind::Quadratic {
        return min_gap_numeric(instance, profile);
    }
    let x = instance.overlap();
    let c = 1.0 - x - x * x;
    let (s_star, g_min) = if c >= 0.5 {
        (0.5, 0.5 + x)
    } else {
        (0.5 * (1.0 - (1.0 - 2.0 * c).sqrt()), (1.0 - c * c).sqrt())
    };
    GapReport {
        s_star,
        g_min,
        method: GapMethod::ClosedForm,
    }
}

/// Golden-section minimization of the numerical gap, seeded by a coarse
/// scan and checked against both endpoints.
pub fn min_gap_numeric(instance: &SearchInstance, profile: &DrivingProfile) -> GapReport {
    let x = instance.overlap();
    let gap = |s: f64| {
        let h = effective_entries(x, profile.coefficient_unchecked(s), s);
        eigensystem(&h).gap
    };
    let (s_star, g_min) = golden_minimize(gap, 64, 1e-12);
    GapReport {
        s_star,
        g_min,
        method: GapMethod::GoldenSection,
    }
}

/// Minimizes `f` on `[0, 1]`: scan `coarse + 1` points, refine the best
/// bracket by golden section until narrower than `tol`.
pub(crate) fn golden_minimize(f: impl Fn(f64) -> f64, coarse: usize, tol: f64) -> (f64, f64) {
    let mut best_k = 0;
    let mut best = f64::INFINITY;
    for k in 0..=coarse {
        let v = f(k as f64 / coarse as f64);
        if v < best {
            best = v;
            best_k = k;
        }
    }
    let mut lo = best_k.saturating_sub(1) as f64 / coarse as f64;
    let mut hi = (best_k + 1).min(coarse) as f64 / coarse as f64;
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = f(d);
        }
    }
    let mid = 0.5 * (lo + hi);
    let mut result = (mid, f(mid));
    for s in [0.0, 1.0, best_k as f64 / coarse as f64] {
        let v = f(s);
        if v < result.1 {
            result = (s, v);
        }
    }
    result
}

/// The closed-form instantaneous eigenvectors of the quadratic path,
/// `(1 -/+ g - 2s)|m> + c(s) |psi0>`, normalized and sign-fixed.
pub fn eigenvector_closed_form(
    instance: &SearchInstance,
    s: f64,
    level: u8,
    form: EigenvectorForm,
) -> Result<ReducedState> {
    let sign = match level {
        0 => -1.0,
        1 => 1.0,
        other => return Err(Error::invalid(format!("level must be 0 or 1, got {other}"))),
    };
    check_reduced_time(s)?;
    let x = instance.overlap();
    let y = instance.overlap_complement();
    let g = quadratic_gap_squared(x, s).sqrt();
    let factor = match form {
        EigenvectorForm::Printed => 1.0 + y,
        EigenvectorForm::Consistent => 2.0,
    };
    let c_m = 1.0 + sign * g - 2.0 * s;
    let c_psi = (s - 1.0) * (s + x) * factor;
    let v = [c_m + c_psi * x, c_psi * y];
    let norm = v[0].hypot(v[1]);
    if norm < 1e-14 {
        return Err(Error::NumericDegeneracy(format!(
            "closed-form eigenvector for level {level} vanishes at s = {s}; use the numerical eigensystem"
        )));
    }
    let v = orient([v[0] / norm, v[1] / norm]);
    Ok(ReducedState::real(v[0], v[1]))
}

/// The normalization printed with the closed-form eigenvectors. Equals the
/// vector norm only for [`EigenvectorForm::Consistent`].
pub fn eigenvector_printed_norm(instance: &SearchInstance, s: f64, level: u8) -> Result<f64> {
    check_reduced_time(s)?;
    let sign = if level == 0 { -1.0 } else { 1.0 };
    let x = instance.overlap();
    let g = quadratic_gap_squared(x, s).sqrt();
    let a = 2.0 * (s - 1.0) * (s + x) * instance.overlap_complement();
    let b = 1.0 + sign * g - 2.0 * s + 2.0 * (s - 1.0) * x * (s + x);
    Ok(a.hypot(b))
}

/// `|<E1; s| dH/ds |E0; s>|` with the analytic derivative of `H(s)`.
/// Infinite where the profile coefficient has a vertical tangent.
pub fn dh_ds_matrix_element(instance: &SearchInstance, profile: &DrivingProfile, s: f64) -> Result<f64> {
    let sp = spectrum_at(instance, profile, s)?;
    let d = build_effective_derivative(instance, profile, s)?;
    if !profile.derivative(s).is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(d.sandwich(sp.v1, sp.v0).abs())
}

/// `|<E1| Hm - H0 + a'(s) P |E0>|` with `P = |psi0><m| + |m><psi0|`: the
/// derivative with the driving term's sign flipped, as the adiabaticity
/// bound is usually written. Agrees with [`dh_ds_matrix_element`] where
/// `a'(s) = 0`.
pub fn flipped_sign_matrix_element(
    instance: &SearchInstance,
    profile: &DrivingProfile,
    s: f64,
) -> Result<f64> {
    let sp = spectrum_at(instance, profile, s)?;
    let da = profile.derivative(s);
    if !da.is_finite() {
        return Ok(f64::INFINITY);
    }
    let d = build_effective_derivative(instance, &DrivingProfile::None, s)?;
    let x = instance.overlap();
    let y = instance.overlap_complement();
    let flipped = EffectiveHamiltonian {
        s,
        h_mm: d.h_mm + 2.0 * da * x,
        h_pp: d.h_pp,
        h_mp: d.h_mp + da * y,
    };
    Ok(flipped.sandwich(sp.v1, sp.v0).abs())
}

/// Largest matrix element over a uniform grid of `points` reduced times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixElementScan {
    pub s_at_max: f64,
    pub max: f64,
}

pub fn scan_matrix_element(
    instance: &SearchInstance,
    profile: &DrivingProfile,
    points: usize,
    flipped_sign: bool,
    mode: Execution,
) -> Result<MatrixElementScan> {
    let values = exec::map_range(mode, points, |k| {
        let s = k as f64 / (points - 1) as f64;
        let v = if flipped_sign {
            flipped_sign_matrix_element(instance, profile, s)
        } else {
            dh_ds_matrix_element(instance, profile, s)
        };
        v.map(|v| (s, v))
    });
    let mut best = MatrixElementScan { s_at_max: 0.0, max: f64::NEG_INFINITY };
    for v in values {
        let (s, v) = v?;
        if v > best.max {
            best = MatrixElementScan { s_at_max: s, max: v };
        }
    }
    Ok(best)
}
