//! Locally adiabatic schedules `ds/dt = eps g(s)^2` and their runtimes.
//!
//! A [`Schedule`] is a dense monotone table of `(t, s, ds/dt)` samples.
//! Between samples `s(t)` and its inverse `t(s)` are cubic Hermite
//! interpolants built on the stored rates, slope-limited to stay monotone.
//!
//! Quadrature of `1/g^2` is the reference runtime; the ODE integration and
//! the closed-form antiderivatives cross-check it.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::model::{check_reduced_time, DrivingProfile, ProfileKind, SearchInstance};
use crate::ode;
use crate::quadrature;
use crate::spectrum::{self, gap_squared_at_overlap, golden_minimize, min_gap};

/// Default local error bound on `s` per ODE step.
pub const DEFAULT_S_TOLERANCE: f64 = 1e-10;
/// Samples drawn uniformly along each of the `t` and `s` axes.
pub const SAMPLES_PER_AXIS: usize = 1024;
/// Relative tolerance of the reference runtime quadrature.
pub const QUADRATURE_RTOL: f64 = 1e-12;
/// Adiabaticity parameter for dynamics-facing runs.
pub const DEFAULT_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMethod {
    LocalOde,
    LocalQuadrature,
    ClosedFormPaper,
    ClosedFormRc,
    Linear,
}

impl ScheduleMethod {
    pub fn name(self) -> &'static str {
        match self {
            ScheduleMethod::LocalOde => "local_ode",
            ScheduleMethod::LocalQuadrature => "local_quadrature",
            ScheduleMethod::ClosedFormPaper => "closed_form_paper",
            ScheduleMethod::ClosedFormRc => "closed_form_rc",
            ScheduleMethod::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulePoint {
    pub t: f64,
    pub s: f64,
    /// `ds/dt` at this sample.
    pub rate: f64,
}

/// Monotone map `t -> s(t)` from `(0, 0)` to `(T, 1)`.
#[derive(Debug, Clone)]
pub struct Schedule {
    instance: SearchInstance,
    profile: Option<DrivingProfile>,
    epsilon: Option<f64>,
    method: ScheduleMethod,
    samples: Vec<SchedulePoint>,
}

impl Schedule {
    fn from_samples(
        instance: SearchInstance,
        profile: Option<DrivingProfile>,
        epsilon: Option<f64>,
        method: ScheduleMethod,
        mut samples: Vec<SchedulePoint>,
    ) -> Result<Self> {
        samples.sort_by(|a, b| a.t.total_cmp(&b.t));
        let total = samples.last().map(|p| p.t).unwrap_or(0.0);
        let mut kept: Vec<SchedulePoint> = Vec::with_capacity(samples.len());
        for p in samples {
            match kept.last() {
                Some(prev) if p.t - prev.t <= 1e-12 * total || p.s - prev.s <= 1e-12 => {
                    // Keep exact endpoints over near-duplicates.
                    if p.s == 1.0 {
                        kept.pop();
                        kept.push(p);
                    }
                }
                _ => kept.push(p),
            }
        }
        let schedule = Self {
            instance,
            profile,
            epsilon,
            method,
            samples: kept,
        };
        schedule.check_invariants()?;
        Ok(schedule)
    }

    pub fn instance(&self) -> &SearchInstance {
        &self.instance
    }

    /// The profile this schedule was synthesized for; `None` for schedules
    /// that do not depend on the Hamiltonian (linear).
    pub fn profile(&self) -> Option<&DrivingProfile> {
        self.profile.as_ref()
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn method(&self) -> ScheduleMethod {
        self.method
    }

    pub fn samples(&self) -> &[SchedulePoint] {
        &self.samples
    }

    /// Total runtime `T`.
    pub fn total_time(&self) -> f64 {
        self.samples.last().map(|p| p.t).unwrap_or(0.0)
    }

    /// Strict monotonicity and the `(0, 0)`, `(T, 1)` endpoints.
    pub fn check_invariants(&self) -> Result<()> {
        let first = self.samples.first().ok_or_else(|| Error::Numeric("empty schedule".into()))?;
        let last = self.samples.last().expect("non-empty");
        if first.t != 0.0 || first.s != 0.0 || last.s != 1.0 || self.samples.len() < 2 {
            return Err(Error::Numeric(format!(
                "schedule endpoints ({}, {}) .. ({}, {})",
                first.t, first.s, last.t, last.s
            )));
        }
        for w in self.samples.windows(2) {
            if !(w[1].t > w[0].t && w[1].s > w[0].s) {
                return Err(Error::Numeric(format!(
                    "schedule not strictly increasing near t = {}",
                    w[0].t
                )));
            }
        }
        Ok(())
    }

    /// `s(t)`, clamped to `[0, 1]` outside `[0, T]`.
    pub fn s_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.total_time() {
            return 1.0;
        }
        let k = self.samples.partition_point(|p| p.t <= t).clamp(1, self.samples.len() - 1);
        let (a, b) = (&self.samples[k - 1], &self.samples[k]);
        hermite(t, a.t, b.t, a.s, b.s, a.rate, b.rate)
    }

    /// `t(s)`, the inverse of [`Schedule::s_at`].
    pub fn t_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return self.total_time();
        }
        let k = self.samples.partition_point(|p| p.s <= s).clamp(1, self.samples.len() - 1);
        let (a, b) = (&self.samples[k - 1], &self.samples[k]);
        hermite(s, a.s, b.s, a.t, b.t, 1.0 / a.rate, 1.0 / b.rate)
    }
}

/// Cubic Hermite interpolation with Fritsch-Carlson slope limiting.
fn hermite(x: f64, x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64) -> f64 {
    let h = x1 - x0;
    let delta = (y1 - y0) / h;
    let (mut m0, mut m1) = (m0, m1);
    if delta > 0.0 {
        let (alpha, beta) = (m0 / delta, m1 / delta);
        let r = alpha * alpha + beta * beta;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m0 = tau * alpha * delta;
            m1 = tau * beta * delta;
        }
    }
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * m1
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("epsilon must be positive and finite, got {epsilon}")))
    }
}

/// `eps g(s)^2`, with `s` clamped into `[0, 1]`.
fn local_rate(x: f64, profile: &DrivingProfile, epsilon: f64) -> impl Fn(f64) -> f64 + '_ {
    move |s: f64| epsilon * gap_squared_at_overlap(x, profile, s.clamp(0.0, 1.0))
}

/// Integrates `ds/dt = eps g(s)^2` from `s = 0` to `s = 1` with an adaptive
/// Dormand-Prince 5(4) method and samples the dense output.
pub fn local_schedule(
    instance: &SearchInstance,
    profile: &DrivingProfile,
    epsilon: f64,
    s_tolerance: f64,
) -> Result<Schedule> {
    check_epsilon(epsilon)?;
    profile.validate_path()?;
    if !(s_tolerance > 0.0) {
        return Err(Error::invalid("s tolerance must be positive"));
    }
    let rate = local_rate(instance.overlap(), profile, epsilon);
    let opts = ode::Options {
        rtol: s_tolerance,
        atol: s_tolerance,
        ..ode::Options::default()
    };
    let sol = ode::integrate_to_level(|_, s| rate(s), 0.0, 0.0, 1.0, &opts)?;
    let total = sol.t_hit;
    let m = SAMPLES_PER_AXIS;
    let mut samples = Vec::with_capacity(2 * m);
    for k in 0..m {
        let t = total * k as f64 / (m - 1) as f64;
        let s = if k == 0 {
            0.0
        } else if k == m - 1 {
            1.0
        } else {
            sol.eval(t).clamp(0.0, 1.0)
        };
        let t = if k == m - 1 { total } else { t };
        samples.push(SchedulePoint { t, s, rate: rate(s) });
    }
    // Dyadic s-grid, so s = 1/2 is sampled exactly.
    for j in 1..m {
        let s = j as f64 / m as f64;
        samples.push(SchedulePoint {
            t: sol.time_at(s),
            s,
            rate: rate(s),
        });
    }
    Schedule::from_samples(
        *instance,
        Some(profile.clone()),
        Some(epsilon),
        ScheduleMethod::LocalOde,
        samples,
    )
}

/// Same local schedule, built from cumulative quadrature of `1/(eps g^2)`
/// on a uniform `s` grid.
pub fn local_schedule_quadrature(instance: &SearchInstance, profile: &DrivingProfile, epsilon: f64) -> Result<Schedule> {
    check_epsilon(epsilon)?;
    profile.validate_path()?;
    let rate = local_rate(instance.overlap(), profile, epsilon);
    let m = 2 * SAMPLES_PER_AXIS;
    let mut samples = Vec::with_capacity(m);
    let mut t = 0.0;
    samples.push(SchedulePoint { t, s: 0.0, rate: rate(0.0) });
    for j in 1..=m {
        let (s0, s1) = ((j - 1) as f64 / m as f64, j as f64 / m as f64);
        t += quadrature::integrate(|s| 1.0 / rate(s), s0, s1, QUADRATURE_RTOL, 0.0)?.value;
        samples.push(SchedulePoint { t, s: s1, rate: rate(s1) });
    }
    Schedule::from_samples(
        *instance,
        Some(profile.clone()),
        Some(epsilon),
        ScheduleMethod::LocalQuadrature,
        samples,
    )
}

/// Local schedule of the plain interpolation, the unmodified baseline.
pub fn rc_schedule(instance: &SearchInstance, epsilon: f64) -> Result<Schedule> {
    local_schedule(instance, &DrivingProfile::None, epsilon, DEFAULT_S_TOLERANCE)
}

/// Global-adiabatic control: `s = t / T`.
pub fn linear_schedule(instance: &SearchInstance, total_time: f64) -> Result<Schedule> {
    if !(total_time > 0.0 && total_time.is_finite()) {
        return Err(Error::invalid(format!("total time must be positive, got {total_time}")));
    }
    let m = SAMPLES_PER_AXIS;
    let rate = 1.0 / total_time;
    let samples = (0..m)
        .map(|k| {
            let s = k as f64 / (m - 1) as f64;
            SchedulePoint {
                t: if k == m - 1 { total_time } else { s * total_time },
                s,
                rate,
            }
        })
        .collect();
    Schedule::from_samples(*instance, None, None, ScheduleMethod::Linear, samples)
}

/// Runtime of one (instance, profile, epsilon) configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeRecord {
    pub n: u32,
    #[serde(rename = "N")]
    pub size: u64,
    pub epsilon: f64,
    pub profile: String,
    #[serde(rename = "T")]
    pub total_time: f64,
    pub g_min: f64,
    pub method: RuntimeMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuntimeMethod {
    Quadrature,
    Ode,
    ClosedForm,
}

impl RuntimeMethod {
    pub fn name(self) -> &'static str {
        match self {
            RuntimeMethod::Quadrature => "quadrature",
            RuntimeMethod::Ode => "ode",
            RuntimeMethod::ClosedForm => "closed_form",
        }
    }
}

impl std::str::FromStr for RuntimeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quadrature" => Ok(RuntimeMethod::Quadrature),
            "ode" => Ok(RuntimeMethod::Ode),
            "closed_form" | "closed-form" => Ok(RuntimeMethod::ClosedForm),
            other => Err(Error::invalid(format!(
                "unknown method '{other}' (expected quadrature, ode, closed_form)"
            ))),
        }
    }
}

fn record(instance: &SearchInstance, profile: &DrivingProfile, epsilon: f64, total: f64, method: RuntimeMethod) -> RuntimeRecord {
    RuntimeRecord {
        n: instance.qubits(),
        size: instance.size(),
        epsilon,
        profile: profile.label(),
        total_time: total,
        g_min: min_gap(instance, profile).g_min,
        method,
    }
}

/// `T = (1/eps) * integral_0^1 ds / g(s)^2`, split at the gap minimum.
pub fn runtime_quadrature(instance: &SearchInstance, profile: &DrivingProfile, epsilon: f64) -> Result<RuntimeRecord> {
    check_epsilon(epsilon)?;
    profile.validate_path()?;
    let integral = inverse_gap_integral(instance.overlap(), profile, 1.0)?;
    Ok(record(instance, profile, epsilon, integral / epsilon, RuntimeMethod::Quadrature))
}

/// `T` from the ODE-synthesized schedule.
pub fn runtime_ode(instance: &SearchInstance, profile: &DrivingProfile, epsilon: f64) -> Result<RuntimeRecord> {
    let schedule = local_schedule(instance, profile, epsilon, DEFAULT_S_TOLERANCE)?;
    Ok(record(instance, profile, epsilon, schedule.total_time(), RuntimeMethod::Ode))
}

/// `T` from a closed-form antiderivative: the plain path's arctangent form
/// or the quadratic path's inverse-hyperbolic-tangent form.
pub fn runtime_closed_form(instance: &SearchInstance, profile: &DrivingProfile, epsilon: f64) -> Result<RuntimeRecord> {
    check_epsilon(epsilon)?;
    let total = match profile.kind() {
        ProfileKind::None => closed_form_time_rc(instance, 1.0)?,
        ProfileKind::Quadratic => closed_form_time_paper(instance, 1.0)?,
        _ => {
            return Err(Error::invalid(format!(
                "no closed-form runtime for profile {}",
                profile.label()
            )))
        }
    };
    Ok(record(instance, profile, epsilon, total / epsilon, RuntimeMethod::ClosedForm))
}

pub fn runtime(
    instance: &SearchInstance,
    profile: &DrivingProfile,
    epsilon: f64,
    method: RuntimeMethod,
) -> Result<RuntimeRecord> {
    match method {
        RuntimeMethod::Quadrature => runtime_quadrature(instance, profile, epsilon),
        RuntimeMethod::Ode => runtime_ode(instance, profile, epsilon),
        RuntimeMethod::ClosedForm => runtime_closed_form(instance, profile, epsilon),
    }
}

/// Runtimes over a list of qubit counts, in input order.
pub fn runtime_sweep(
    qubits: &[u32],
    profile: &DrivingProfile,
    epsilon: f64,
    method: RuntimeMethod,
    mode: Execution,
) -> Vec<Result<RuntimeRecord>> {
    exec::map(mode, qubits, |&n| {
        SearchInstance::new(n).and_then(|inst| runtime(&inst, profile, epsilon, method))
    })
}

/// `integral_0^upper ds / g(s)^2` at overlap `x`, split at the gap minimum.
pub(crate) fn inverse_gap_integral(x: f64, profile: &DrivingProfile, upper: f64) -> Result<f64> {
    let s_star = match profile.kind() {
        ProfileKind::None | ProfileKind::Quadratic => 0.5,
        _ => golden_minimize(|s| gap_squared_at_overlap(x, profile, s), 64, 1e-12).0,
    };
    let mut breaks = vec![0.0];
    if s_star > 0.0 && s_star < upper {
        breaks.push(s_star);
    }
    breaks.push(upper);
    let f = |s: f64| 1.0 / gap_squared_at_overlap(x, profile, s);
    Ok(quadrature::integrate_with_breaks(f, &breaks, QUADRATURE_RTOL, 0.0)?.value)
}

/// The inverse-hyperbolic-tangent antiderivative of `1/g^2` for the
/// quadratic path (in `eps = 1` units), evaluated in complex arithmetic:
///
/// `t(s) = [atanh(2 sqrt2 k2 s / (2 - k2^2 - 4s)) / k2 - (same with k1)] / (sqrt2 h)`
///
/// with `h = sqrt((1-N)(2 sqrt N + 1)) / N` and
/// `k1,2 = sqrt(-2 -/+ 4h + 4/N + 4/sqrt N)`. `h` is imaginary for `N > 1`;
/// the result must come out real.
pub fn closed_form_time_paper(instance: &SearchInstance, s: f64) -> Result<f64> {
    let t = closed_form_time_paper_complex(instance, s)?;
    if t.im.abs() > 1e-8 * t.re.abs() && t.im.abs() > 1e-15 {
        return Err(Error::FormulaInconsistency(format!(
            "closed-form t({s}) has imaginary residue {:e} (real part {:e})",
            t.im, t.re
        )));
    }
    Ok(t.re)
}

/// The complex value behind [`closed_form_time_paper`], before the
/// imaginary residue is checked and dropped.
pub fn closed_form_time_paper_complex(instance: &SearchInstance, s: f64) -> Result<Complex64> {
    check_reduced_time(s)?;
    if instance.size() < 4 {
        return Err(Error::invalid("closed-form time requires N >= 4"));
    }
    let n = instance.size_f64();
    let sqrt_n = n.sqrt();
    let one = Complex64::new(1.0, 0.0);
    let h = (Complex64::new((1.0 - n) * (2.0 * sqrt_n + 1.0), 0.0)).sqrt() / n;
    let base = Complex64::new(-2.0 + 4.0 / n + 4.0 / sqrt_n, 0.0);
    let k1 = (base - h * 4.0).sqrt();
    let k2 = (base + h * 4.0).sqrt();
    let term = |k: Complex64| {
        let arg = k * (2.0 * SQRT_2 * s) / (one * 2.0 - k * k - 4.0 * s);
        arg.atanh() / k
    };
    Ok((term(k2) - term(k1)) / (h * SQRT_2))
}

/// Arctangent antiderivative of `1/g^2` for the plain path (`eps = 1`):
/// `t(s) = sqrt(N) / (2 sqrt c) [atan(2 sqrt(N-1)(s - 1/2)) + atan(sqrt(N-1))]`
/// with `c = 1 - 1/N`.
pub fn closed_form_time_rc(instance: &SearchInstance, s: f64) -> Result<f64> {
    check_reduced_time(s)?;
    let n = instance.size_f64();
    let c = 1.0 - 1.0 / n;
    let r = (n - 1.0).sqrt();
    Ok(n.sqrt() / (2.0 * c.sqrt()) * ((2.0 * r * (s - 0.5)).atan() + r.atan()))
}

/// Tabulates a closed-form `t(s)` on a uniform `s` grid.
pub fn closed_form_schedule(instance: &SearchInstance, profile: &DrivingProfile, epsilon: f64) -> Result<Schedule> {
    check_epsilon(epsilon)?;
    let (method, time): (ScheduleMethod, fn(&SearchInstance, f64) -> Result<f64>) = match profile.kind() {
        ProfileKind::None => (ScheduleMethod::ClosedFormRc, closed_form_time_rc),
        ProfileKind::Quadratic => (ScheduleMethod::ClosedFormPaper, closed_form_time_paper),
        _ => return Err(Error::invalid(format!("no closed form for profile {}", profile.label()))),
    };
    let rate = local_rate(instance.overlap(), profile, epsilon);
    let m = 2 * SAMPLES_PER_AXIS;
    let mut samples = Vec::with_capacity(m);
    for j in 0..m {
        let s = j as f64 / (m - 1) as f64;
        samples.push(SchedulePoint {
            t: time(instance, s)? / epsilon,
            s,
            rate: rate(s),
        });
    }
    Schedule::from_samples(*instance, Some(profile.clone()), Some(epsilon), method, samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticStatus {
    Converged,
    /// `T` grows without bound as `N -> infinity`.
    Diverges,
    /// Finite, but the path does not end at `Hm`.
    InvalidEndpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantComparison {
    pub label: String,
    pub constant: f64,
    pub delta: f64,
}

/// Large-`N` limit of `T` at `eps = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRuntime {
    pub profile: String,
    pub status: AsymptoticStatus,
    pub value: Option<f64>,
    pub comparisons: Vec<ConstantComparison>,
}

impl AsymptoticRuntime {
    /// Labels of the reference constants within `tol` of the measured value.
    pub fn matches(&self, tol: f64) -> Vec<&str> {
        self.comparisons
            .iter()
            .filter(|c| c.delta.abs() <= tol)
            .map(|c| c.label.as_str())
            .collect()
    }
}

/// `lim_{x -> 0} integral_0^1 ds / g(s)^2` by quadrature at `x = 0`.
pub fn asymptotic_runtime(profile: &DrivingProfile) -> Result<AsymptoticRuntime> {
    let label = profile.label();
    // At x = 0 the plain path closes its gap at s = 1/2.
    if profile.kind() == ProfileKind::None {
        return Ok(AsymptoticRuntime {
            profile: label,
            status: AsymptoticStatus::Diverges,
            value: None,
            comparisons: Vec::new(),
        });
    }
    let (_, g2_min) = golden_minimize(|s| gap_squared_at_overlap(0.0, profile, s), 64, 1e-12);
    if g2_min <= 1e-14 {
        return Ok(AsymptoticRuntime {
            profile: label,
            status: AsymptoticStatus::Diverges,
            value: None,
            comparisons: Vec::new(),
        });
    }
    let value = inverse_gap_integral(0.0, profile, 1.0)?;
    let references: Vec<(&str, f64)> = match profile.kind() {
        ProfileKind::Quadratic => vec![("1+pi/4 (printed)", 1.0 + FRAC_PI_4), ("1+pi/2 (derived)", 1.0 + FRAC_PI_2)],
        ProfileKind::SqrtProduct | ProfileKind::PaperAlt => vec![("1 (printed)", 1.0)],
        _ => Vec::new(),
    };
    Ok(AsymptoticRuntime {
        profile: label,
        status: if profile.is_valid_path() {
            AsymptoticStatus::Converged
        } else {
            AsymptoticStatus::InvalidEndpoint
        },
        value: Some(value),
        comparisons: references
            .into_iter()
            .map(|(l, c)| ConstantComparison {
                label: l.to_string(),
                constant: c,
                delta: value - c,
            })
            .collect(),
    })
}

/// Minimum and maximum of `g(s)^2` over `[0, 1]`, bounding `ds/dt / eps`.
pub fn gap_squared_range(instance: &SearchInstance, profile: &DrivingProfile) -> (f64, f64) {
    let x = instance.overlap();
    let lo = spectrum::min_gap(instance, profile).g_min.powi(2);
    let (_, neg_hi) = golden_minimize(|s| -gap_squared_at_overlap(x, profile, s), 256, 1e-12);
    (lo, -neg_hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_instance;
    use proptest::prelude::*;

    #[test]
    fn quadratic_schedule_slopes() {
        let inst = make_instance(6).unwrap();
        let sch = local_schedule(&inst, &DrivingProfile::Quadratic, 1.0, DEFAULT_S_TOLERANCE).unwrap();
        let first = sch.samples()[0];
        assert_eq!((first.t, first.s), (0.0, 0.0));
        assert!((first.rate - 1.0).abs() < 1e-15);
        let mid = sch.samples().iter().find(|p| p.s == 0.5).unwrap();
        assert!((mid.rate - 0.390_625).abs() < 1e-15);
        let q = runtime_quadrature(&inst, &DrivingProfile::Quadratic, 1.0).unwrap();
        assert!((sch.total_time() - q.total_time).abs() < 1e-8);
        assert!(sch.samples().len() >= 512);
    }

    #[test]
    fn plain_runtime_closed_form() {
        let inst = make_instance(6).unwrap();
        let q = runtime_quadrature(&inst, &DrivingProfile::None, 1.0).unwrap();
        let exact = 64.0 * 63f64.sqrt().atan() / 63f64.sqrt();
        assert!((q.total_time - exact).abs() < 1e-10 * exact);
        assert!((q.total_time - 11.655_162_414_955).abs() < 1e-9);
        assert!((closed_form_time_rc(&inst, 1.0).unwrap() - exact).abs() < 1e-12);
        let rc = rc_schedule(&inst, 1.0).unwrap();
        assert!((rc.total_time() - exact).abs() < 1e-7 * exact);
    }

    #[test]
    fn driven_versus_baseline_at_64() {
        let inst = make_instance(6).unwrap();
        let driven = local_schedule(&inst, &DrivingProfile::Quadratic, 1.0, DEFAULT_S_TOLERANCE).unwrap();
        let rc = rc_schedule(&inst, 1.0).unwrap();
        assert!(rc.total_time() / driven.total_time() > 4.0);
    }

    #[test]
    fn complex_closed_form_time() {
        let inst = make_instance(6).unwrap();
        assert_eq!(closed_form_time_paper(&inst, 0.0).unwrap(), 0.0);
        let q = runtime_quadrature(&inst, &DrivingProfile::Quadratic, 1.0).unwrap();
        assert!((closed_form_time_paper(&inst, 1.0).unwrap() - q.total_time).abs() < 1e-9);
        let sch = local_schedule(&inst, &DrivingProfile::Quadratic, 1.0, DEFAULT_S_TOLERANCE).unwrap();
        assert!((closed_form_time_paper(&inst, 0.5).unwrap() - sch.t_at(0.5)).abs() < 1e-6);
        assert!(closed_form_time_paper(&make_instance(1).unwrap(), 0.5).is_err());
    }

    #[test]
    fn large_size_n_independence() {
        let q = DrivingProfile::Quadratic;
        let t20 = runtime_quadrature(&make_instance(20).unwrap(), &q, 1.0).unwrap().total_time;
        let t24 = runtime_quadrature(&make_instance(24).unwrap(), &q, 1.0).unwrap().total_time;
        assert!((t24 - t20).abs() < 0.01, "{t20} {t24}");
        let mut prev = 0.0;
        for n in 2..=40 {
            let t = runtime_quadrature(&make_instance(n).unwrap(), &q, 1.0).unwrap().total_time;
            assert!(t > prev, "T not monotone at n = {n}");
            prev = t;
        }
    }

    #[test]
    fn asymptotic_constants() {
        let quad = asymptotic_runtime(&DrivingProfile::Quadratic).unwrap();
        let v = quad.value.unwrap();
        assert!((1.5..=3.0).contains(&v));
        assert_eq!(quad.matches(1e-6), vec!["1+pi/2 (derived)"]);
        let plain = asymptotic_runtime(&DrivingProfile::None).unwrap();
        assert_eq!(plain.status, AsymptoticStatus::Diverges);
        assert!(plain.value.is_none());
        let sq = asymptotic_runtime(&DrivingProfile::SqrtProduct).unwrap();
        assert!((sq.value.unwrap() - 1.0).abs() < 1e-12);
        let alt = asymptotic_runtime(&DrivingProfile::PaperAlt).unwrap();
        assert_eq!(alt.status, AsymptoticStatus::InvalidEndpoint);
    }

    #[test]
    fn plain_runtime_grows_like_sqrt_n() {
        for n in [16, 20] {
            let inst = make_instance(n).unwrap();
            let t = runtime_quadrature(&inst, &DrivingProfile::None, 1.0).unwrap().total_time;
            let ratio = t / inst.size_f64().sqrt();
            assert!((ratio - FRAC_PI_2).abs() < 0.01, "n={n}: {ratio}");
        }
    }

    #[test]
    fn linear_schedule_samples() {
        let inst = make_instance(4).unwrap();
        let sch = linear_schedule(&inst, 10.0).unwrap();
        assert_eq!(sch.samples()[0].t, 0.0);
        let last = sch.samples().last().unwrap();
        assert_eq!((last.t, last.s), (10.0, 1.0));
        assert!((sch.s_at(5.0) - 0.5).abs() < 1e-15);
        assert!(linear_schedule(&inst, 0.0).is_err());
    }

    #[test]
    fn invalid_inputs() {
        let inst = make_instance(4).unwrap();
        assert!(matches!(
            local_schedule(&inst, &DrivingProfile::Quadratic, 0.0, 1e-10),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            local_schedule(&inst, &DrivingProfile::Quadratic, -1.0, 1e-10),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            local_schedule(&inst, &DrivingProfile::PaperAlt, 1.0, 1e-10),
            Err(Error::InvalidPath(_))
        ));
        assert!(runtime_closed_form(&inst, &DrivingProfile::SqrtProduct, 1.0).is_err());
    }

    #[test]
    fn slope_bounds_between_samples() {
        for p in [DrivingProfile::None, DrivingProfile::Quadratic, DrivingProfile::SqrtProduct] {
            for eps in [1.0, 0.1] {
                let inst = make_instance(6).unwrap();
                let sch = local_schedule(&inst, &p, eps, DEFAULT_S_TOLERANCE).unwrap();
                let (lo, hi) = gap_squared_range(&inst, &p);
                for w in sch.samples().windows(2) {
                    let slope = (w[1].s - w[0].s) / (w[1].t - w[0].t);
                    assert!(slope >= eps * lo * (1.0 - 1e-6), "{p} {slope}");
                    assert!(slope <= eps * hi * (1.0 + 1e-6), "{p} {slope}");
                }
            }
        }
    }

    #[test]
    fn quadrature_and_closed_form_schedules_agree_with_ode() {
        let inst = make_instance(8).unwrap();
        let ode = local_schedule(&inst, &DrivingProfile::Quadratic, 1.0, DEFAULT_S_TOLERANCE).unwrap();
        let quad = local_schedule_quadrature(&inst, &DrivingProfile::Quadratic, 1.0).unwrap();
        let cf = closed_form_schedule(&inst, &DrivingProfile::Quadratic, 1.0).unwrap();
        for k in 1..32 {
            let s = k as f64 / 32.0;
            assert!((ode.t_at(s) - quad.t_at(s)).abs() < 1e-8);
            assert!((ode.t_at(s) - cf.t_at(s)).abs() < 1e-8);
        }
    }

    #[test]
    fn epsilon_scaling() {
        let inst = make_instance(10).unwrap();
        for p in [DrivingProfile::None, DrivingProfile::Quadratic, DrivingProfile::SqrtProduct] {
            let t1 = runtime_quadrature(&inst, &p, 1.0).unwrap().total_time;
            let t01 = runtime_quadrature(&inst, &p, 0.1).unwrap().total_time;
            assert_eq!(t01, t1 / 0.1);
            let o1 = runtime_ode(&inst, &p, 1.0).unwrap().total_time;
            let o01 = runtime_ode(&inst, &p, 0.1).unwrap().total_time;
            assert!((o01 - o1 / 0.1).abs() <= 1e-9 * o01, "{p}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn inversion_round_trip(n in 2u32..=16, k in 0usize..3, s in 0.0f64..=1.0) {
            let profile = [DrivingProfile::None, DrivingProfile::Quadratic, DrivingProfile::SqrtProduct][k].clone();
            let inst = make_instance(n).unwrap();
            let sch = local_schedule(&inst, &profile, 1.0, DEFAULT_S_TOLERANCE).unwrap();
            let back = sch.s_at(sch.t_at(s));
            prop_assert!((back - s).abs() <= 1e-9, "s={} back={}", s, back);
        }
    }
}
