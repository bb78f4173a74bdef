//! Schrödinger propagation along a schedule.
//!
//! Each substep holds `H` fixed at its midpoint value `H(s(t_mid))` and
//! applies the exact exponential `exp(-i H dt)`, so the reduced propagation
//! is unitary up to rounding.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::model::{
    build_effective, initial_state, DrivingProfile, EffectiveHamiltonian, FullOperator, ReducedState, SearchInstance,
};
use crate::schedule::{Schedule, ScheduleMethod};
use crate::spectrum::eigensystem;

pub const DEFAULT_SUBSTEPS: usize = 16;
/// Largest qubit count for full-space propagation.
pub const MAX_FULL_QUBITS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub s: f64,
    pub state: ReducedState,
    /// `|<E0; s|psi(t)>|^2`.
    pub ground_fidelity: f64,
    /// `|<m|psi(t)>|^2`.
    pub marked_fidelity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSummary {
    pub method: ScheduleMethod,
    pub total_time: f64,
    pub samples: usize,
    pub epsilon: Option<f64>,
}

impl From<&Schedule> for ScheduleSummary {
    fn from(s: &Schedule) -> Self {
        Self {
            method: s.method(),
            total_time: s.total_time(),
            samples: s.samples().len(),
            epsilon: s.epsilon(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    pub final_state: ReducedState,
    pub final_marked_fidelity: f64,
    pub final_ground_fidelity: f64,
    pub epsilon: Option<f64>,
    pub schedule: ScheduleSummary,
    pub trajectory: Vec<TrajectoryPoint>,
    /// `max |<psi|psi> - 1|` over the recorded samples.
    pub norm_drift: f64,
    /// Largest norm outside `span{|m>, |psi0>}` (full-space runs only).
    pub max_leakage: Option<f64>,
}

/// `|<a|b>|^2` for unit vectors.
pub fn fidelity(a: &ReducedState, b: &ReducedState) -> Result<f64> {
    for (name, v) in [("first", a), ("second", b)] {
        if (v.norm_sqr() - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "{name} state is not normalized (norm^2 = {})",
                v.norm_sqr()
            )));
        }
    }
    Ok(a.inner(b).norm_sqr())
}

type Unitary = [[Complex64; 2]; 2];

/// `exp(-i H dt)` for a real symmetric 2x2 `H`, via
/// `H = c I + dz sigma_z + dx sigma_x`.
pub(crate) fn step_unitary(h: &EffectiveHamiltonian, dt: f64) -> Unitary {
    let c = 0.5 * (h.h_mm + h.h_pp);
    let dz = 0.5 * (h.h_mm - h.h_pp);
    let dx = h.h_mp;
    let omega = dz.hypot(dx);
    let phase = Complex64::from_polar(1.0, -c * dt);
    let (sin, cos) = (omega * dt).sin_cos();
    let k = if omega > 0.0 { sin / omega } else { dt };
    let i = Complex64::i();
    [
        [phase * (cos - i * k * dz), phase * (-i * k * dx)],
        [phase * (-i * k * dx), phase * (cos + i * k * dz)],
    ]
}

fn apply_unitary(u: &Unitary, v: &ReducedState) -> ReducedState {
    ReducedState::new(
        u[0][0] * v.amp_m + u[0][1] * v.amp_perp,
        u[1][0] * v.amp_m + u[1][1] * v.amp_perp,
    )
}

fn check_schedule(instance: &SearchInstance, profile: &DrivingProfile, schedule: &Schedule) -> Result<()> {
    if schedule.instance().qubits() != instance.qubits() {
        return Err(Error::invalid(format!(
            "schedule built for n = {}, propagating n = {}",
            schedule.instance().qubits(),
            instance.qubits()
        )));
    }
    if let Some(p) = schedule.profile() {
        if p.label() != profile.label() {
            return Err(Error::invalid(format!(
                "schedule built for profile {}, propagating {}",
                p.label(),
                profile.label()
            )));
        }
    }
    Ok(())
}

fn trajectory_point(instance: &SearchInstance, profile: &DrivingProfile, t: f64, s: f64, state: ReducedState) -> Result<TrajectoryPoint> {
    let sp = eigensystem(&build_effective(instance, profile, s)?);
    let ground = ReducedState::real(sp.v0[0], sp.v0[1]);
    Ok(TrajectoryPoint {
        t,
        s,
        state,
        ground_fidelity: ground.inner(&state).norm_sqr(),
        marked_fidelity: state.amp_m.norm_sqr(),
    })
}

fn finish(trajectory: Vec<TrajectoryPoint>, schedule: &Schedule, max_leakage: Option<f64>) -> EvolutionResult {
    let last = *trajectory.last().expect("schedule has samples");
    let norm_drift = trajectory
        .iter()
        .map(|p| (p.state.norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max);
    EvolutionResult {
        final_state: last.state,
        final_marked_fidelity: last.marked_fidelity,
        final_ground_fidelity: last.ground_fidelity,
        epsilon: schedule.epsilon(),
        schedule: schedule.into(),
        trajectory,
        norm_drift,
        max_leakage,
    }
}

/// Propagates `|psi0>` along `schedule` in the reduced basis, recording the
/// trajectory at every schedule sample.
pub fn propagate(
    instance: &SearchInstance,
    profile: &DrivingProfile,
    schedule: &Schedule,
    substeps_per_sample: usize,
) -> Result<EvolutionResult> {
    check_schedule(instance, profile, schedule)?;
    if substeps_per_sample == 0 {
        return Err(Error::invalid("substeps_per_sample must be at least 1"));
    }
    let samples = schedule.samples();
    let mut state = initial_state(instance);
    let mut trajectory = Vec::with_capacity(samples.len());
    trajectory.push(trajectory_point(instance, profile, samples[0].t, samples[0].s, state)?);
    for w in samples.windows(2) {
        let dt = (w[1].t - w[0].t) / substeps_per_sample as f64;
        for j in 0..substeps_per_sample {
            let t_mid = w[0].t + (j as f64 + 0.5) * dt;
            let h = build_effective(instance, profile, schedule.s_at(t_mid))?;
            state = apply_unitary(&step_unitary(&h, dt), &state);
        }
        trajectory.push(trajectory_point(instance, profile, w[1].t, w[1].s, state)?);
    }
    Ok(finish(trajectory, schedule, None))
}

/// Evolves `|psi0>` under the frozen Hamiltonian `H(s)` for `total_time`,
/// sampling `steps + 1` points.
pub fn propagate_frozen(
    instance: &SearchInstance,
    profile: &DrivingProfile,
    s: f64,
    total_time: f64,
    steps: usize,
) -> Result<Vec<TrajectoryPoint>> {
    if steps == 0 || !(total_time >= 0.0) {
        return Err(Error::invalid("frozen propagation needs steps >= 1 and a non-negative time"));
    }
    let h = build_effective(instance, profile, s)?;
    let dt = total_time / steps as f64;
    let u = step_unitary(&h, dt);
    let mut state = initial_state(instance);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(trajectory_point(instance, profile, 0.0, s, state)?);
    for k in 1..=steps {
        state = apply_unitary(&u, &state);
        out.push(trajectory_point(instance, profile, k as f64 * dt, s, state)?);
    }
    Ok(out)
}

/// A propagation job for [`propagate_many`].
#[derive(Debug, Clone)]
pub struct PropagationJob {
    pub instance: SearchInstance,
    pub profile: DrivingProfile,
    pub schedule: Schedule,
}

/// Independent propagations, results in job order.
pub fn propagate_many(jobs: &[PropagationJob], substeps_per_sample: usize, mode: Execution) -> Vec<Result<EvolutionResult>> {
    exec::map(mode, jobs, |job| {
        propagate(&job.instance, &job.profile, &job.schedule, substeps_per_sample)
    })
}

/// `v <- exp(-i H dt) v` for the matrix-free full-space operator, by a
/// Taylor series summed to rounding level. Long steps are split so that
/// `|H| dt` stays below 1/2 (`|H| <= 2` here).
fn full_step(op: &FullOperator, dt: f64, v: &mut [Complex64], scratch: &mut [Complex64], term: &mut [Complex64]) {
    let pieces = (4.0 * dt.abs()).ceil().max(1.0) as usize;
    let tau = dt / pieces as f64;
    let factor = Complex64::new(0.0, -tau);
    for _ in 0..pieces {
        term.copy_from_slice(v);
        let scale = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for k in 1..60 {
            op.apply_into(term, scratch);
            let c = factor / k as f64;
            let mut size = 0.0;
            for ((t, sc), vi) in term.iter_mut().zip(scratch.iter()).zip(v.iter_mut()) {
                *t = sc * c;
                *vi += *t;
                size += t.norm_sqr();
            }
            if size.sqrt() <= 1e-18 * scale {
                break;
            }
        }
    }
}

/// Projection onto `{|m>, |m_perp>}` and the norm of the remainder.
fn project(psi: &[Complex64], marked: usize, x: f64, y: f64) -> (ReducedState, f64) {
    let amp_m = psi[marked];
    let overlap_psi0 = psi.iter().sum::<Complex64>() * x;
    let amp_perp = (overlap_psi0 - amp_m * x) / y;
    // |m_perp> has entries x / y off the marked index and 0 on it.
    let perp_entry = x / y;
    let mut leak = 0.0;
    for (i, z) in psi.iter().enumerate() {
        let fitted = if i == marked { amp_m } else { amp_perp * perp_entry };
        leak += (z - fitted).norm_sqr();
    }
    (ReducedState::new(amp_m, amp_perp), leak.sqrt())
}

/// Propagation in the full `2^n`-dimensional space, projected onto the
/// reduced basis at every sample. Limited to `n <= 10`.
pub fn propagate_full(
    instance: &SearchInstance,
    profile: &DrivingProfile,
    schedule: &Schedule,
    marked_index: u64,
) -> Result<EvolutionResult> {
    propagate_full_with(instance, profile, schedule, marked_index, DEFAULT_SUBSTEPS)
}

pub fn propagate_full_with(
    instance: &SearchInstance,
    profile: &DrivingProfile,
    schedule: &Schedule,
    marked_index: u64,
    substeps_per_sample: usize,
) -> Result<EvolutionResult> {
    if instance.qubits() > MAX_FULL_QUBITS {
        return Err(Error::ResourceLimit {
            what: "full-space propagation qubits",
            requested: instance.qubits() as u64,
            limit: MAX_FULL_QUBITS as u64,
        });
    }
    check_schedule(instance, profile, schedule)?;
    if marked_index >= instance.size() {
        return Err(Error::invalid(format!("marked index {marked_index} outside [0, {})", instance.size())));
    }
    if substeps_per_sample == 0 {
        return Err(Error::invalid("substeps_per_sample must be at least 1"));
    }
    let dim = instance.size() as usize;
    let marked = marked_index as usize;
    let x = 1.0 / (dim as f64).sqrt();
    let y = (1.0 - x * x).sqrt();
    let mut psi = vec![Complex64::new(x, 0.0); dim];
    let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
    let mut term = vec![Complex64::new(0.0, 0.0); dim];
    let samples = schedule.samples();
    let mut trajectory = Vec::with_capacity(samples.len());
    let (reduced, leak) = project(&psi, marked, x, y);
    let mut max_leak = leak;
    trajectory.push(trajectory_point(instance, profile, samples[0].t, samples[0].s, reduced)?);
    for w in samples.windows(2) {
        let dt = (w[1].t - w[0].t) / substeps_per_sample as f64;
        for j in 0..substeps_per_sample {
            let s = schedule.s_at(w[0].t + (j as f64 + 0.5) * dt);
            let op = FullOperator::new(dim, marked, s, profile.coefficient(s)?);
            full_step(&op, dt, &mut psi, &mut scratch, &mut term);
        }
        let (reduced, leak) = project(&psi, marked, x, y);
        max_leak = max_leak.max(leak);
        trajectory.push(trajectory_point(instance, profile, w[1].t, w[1].s, reduced)?);
    }
    Ok(finish(trajectory, schedule, Some(max_leak)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_instance;
    use crate::schedule::{linear_schedule, local_schedule, DEFAULT_S_TOLERANCE};

    #[test]
    fn fidelity_cases() {
        let inst = make_instance(6).unwrap();
        let psi0 = initial_state(&inst);
        assert!((fidelity(&psi0, &psi0).unwrap() - 1.0).abs() < 1e-15);
        let orth = ReducedState::real(inst.overlap_complement(), -inst.overlap());
        assert!(fidelity(&psi0, &orth).unwrap() < 1e-30);
        assert!((fidelity(&psi0, &ReducedState::marked()).unwrap() - 0.015_625).abs() < 1e-15);
        assert!(matches!(
            fidelity(&ReducedState::real(1.0, 1.0), &psi0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn unitary_is_unitary() {
        let h = EffectiveHamiltonian { s: 0.3, h_mm: 0.7, h_pp: 0.2, h_mp: -0.4 };
        let u = step_unitary(&h, 0.37);
        for r in 0..2 {
            for c in 0..2 {
                let dot: Complex64 = (0..2).map(|k| u[r][k] * u[c][k].conj()).sum();
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((dot - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn frozen_initial_hamiltonian_keeps_ground_state() {
        let inst = make_instance(6).unwrap();
        let traj = propagate_frozen(&inst, &DrivingProfile::Quadratic, 0.0, 50.0, 200).unwrap();
        for p in traj {
            assert!((p.ground_fidelity - 1.0).abs() < 1e-13);
            assert!((p.marked_fidelity - 1.0 / 64.0).abs() < 1e-13);
        }
    }

    #[test]
    fn diabatic_negative_control() {
        let inst = make_instance(10).unwrap();
        let sch = linear_schedule(&inst, 0.1).unwrap();
        let r = propagate(&inst, &DrivingProfile::Quadratic, &sch, DEFAULT_SUBSTEPS).unwrap();
        assert!(r.final_marked_fidelity < 0.1);
    }

    #[test]
    fn schedule_mismatch_is_rejected() {
        let inst = make_instance(6).unwrap();
        let sch = local_schedule(&inst, &DrivingProfile::Quadratic, 1.0, DEFAULT_S_TOLERANCE).unwrap();
        let other = make_instance(7).unwrap();
        assert!(matches!(
            propagate(&other, &DrivingProfile::Quadratic, &sch, 4),
            Err(Error::InvalidArgument(_))
        ));
        assert!(propagate(&inst, &DrivingProfile::None, &sch, 4).is_err());
        assert!(propagate(&inst, &DrivingProfile::Quadratic, &sch, 0).is_err());
    }

    #[test]
    fn full_space_guard() {
        let inst = make_instance(11).unwrap();
        let sch = linear_schedule(&inst, 1.0).unwrap();
        assert!(matches!(
            propagate_full(&inst, &DrivingProfile::Quadratic, &sch, 0),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn full_space_matches_reduced_small() {
        let inst = make_instance(4).unwrap();
        let p = DrivingProfile::Quadratic;
        let sch = local_schedule(&inst, &p, 0.2, DEFAULT_S_TOLERANCE).unwrap();
        let red = propagate(&inst, &p, &sch, 4).unwrap();
        let full = propagate_full_with(&inst, &p, &sch, 5, 4).unwrap();
        assert!(full.max_leakage.unwrap() < 1e-12);
        for (a, b) in red.trajectory.iter().zip(&full.trajectory) {
            assert!((a.state.amp_m - b.state.amp_m).norm() < 1e-10);
            assert!((a.state.amp_perp - b.state.amp_perp).norm() < 1e-10);
        }
    }

    #[test]
    fn batch_modes_agree() {
        let jobs: Vec<PropagationJob> = [4u32, 6, 8]
            .iter()
            .map(|&n| {
                let instance = make_instance(n).unwrap();
                let schedule = local_schedule(&instance, &DrivingProfile::Quadratic, 0.2, DEFAULT_S_TOLERANCE).unwrap();
                PropagationJob { instance, profile: DrivingProfile::Quadratic, schedule }
            })
            .collect();
        let a = propagate_many(&jobs, 2, Execution::Sequential);
        let b = propagate_many(&jobs, 2, Execution::Parallel);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.as_ref().unwrap().final_state, y.as_ref().unwrap().final_state);
        }
    }
}
