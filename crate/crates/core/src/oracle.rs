//! Slow, independent reference implementations.
//!
//! Nothing here calls into [`crate::spectrum`], [`crate::dynamics`] or the
//! library quadrature; the oracles rebuild what they need from the operator
//! definitions so that agreement is evidence, not tautology.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{EvolutionResult, ScheduleSummary, TrajectoryPoint};
use crate::error::{Error, Result};
use crate::model::{
    build_effective, DrivingProfile, FullHamiltonian, ReducedState, SearchInstance, MAX_DENSE_QUBITS,
};
use crate::schedule::Schedule;

/// One oracle-versus-library comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub quantity: String,
    pub oracle_value: f64,
    pub library_value: f64,
    pub abs_delta: f64,
    pub rel_delta: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Inputs that produced the oracle value.
    #[serde(default)]
    pub parameters: serde_json::Value,
}

impl OracleReport {
    /// Compares on absolute delta against `tolerance`.
    pub fn new(quantity: impl Into<String>, oracle_value: f64, library_value: f64, tolerance: f64) -> Self {
        let abs_delta = (library_value - oracle_value).abs();
        let rel_delta = if oracle_value != 0.0 {
            abs_delta / oracle_value.abs()
        } else {
            abs_delta
        };
        Self {
            quantity: quantity.into(),
            oracle_value,
            library_value,
            abs_delta,
            rel_delta,
            tolerance,
            pass: abs_delta <= tolerance,
            parameters: serde_json::Value::Null,
        }
    }

    pub fn with_parameters(mut self, parameters: serde_json::Value) -> Self {
        self.parameters = parameters;
        self
    }
}

/// Full eigen-decomposition of a dense Hamiltonian, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct DenseEigen {
    pub eigenvalues: Vec<f64>,
    pub e0: f64,
    pub e1: f64,
    pub v0: Vec<f64>,
    pub v1: Vec<f64>,
}

impl DenseEigen {
    /// Number of eigenvalues within `tol` of `value`.
    pub fn count_near(&self, value: f64, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|e| (*e - value).abs() <= tol).count()
    }
}

/// Cyclic Jacobi eigensolver for a dense symmetric row-major matrix.
/// Returns eigenvalues (unsorted, matching columns) and the row-major
/// eigenvector matrix.
pub fn jacobi_eigen(matrix: &[f64], dim: usize, tol: f64, max_sweeps: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(matrix.len(), dim * dim);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1.0;
    }
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let mut row_p = vec![0.0; dim];
    let mut row_q = vec![0.0; dim];
    for _ in 0..max_sweeps {
        let off: f64 = (0..dim)
            .flat_map(|i| (i + 1..dim).map(move |j| (i, j)))
            .map(|(i, j)| a[i * dim + j] * a[i * dim + j])
            .sum::<f64>()
            .sqrt();
        if off <= tol * frob {
            let eig = (0..dim).map(|i| a[i * dim + i]).collect();
            return Ok((eig, v));
        }
        for p in 0..dim {
            for q in p + 1..dim {
                let apq = a[p * dim + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * dim + p];
                let aqq = a[q * dim + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Rows p and q of A' = J^T A J (columns follow by symmetry).
                for k in 0..dim {
                    let akp = a[p * dim + k];
                    let akq = a[q * dim + k];
                    row_p[k] = c * akp - s * akq;
                    row_q[k] = s * akp + c * akq;
                }
                row_p[p] = app - t * apq;
                row_q[q] = aqq + t * apq;
                row_p[q] = 0.0;
                row_q[p] = 0.0;
                a[p * dim..(p + 1) * dim].copy_from_slice(&row_p);
                a[q * dim..(q + 1) * dim].copy_from_slice(&row_q);
                for k in 0..dim {
                    a[k * dim + p] = row_p[k];
                    a[k * dim + q] = row_q[k];
                }
                for k in 0..dim {
                    let vkp = v[k * dim + p];
                    let vkq = v[k * dim + q];
                    v[k * dim + p] = c * vkp - s * vkq;
                    v[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::Numeric(format!("Jacobi did not converge in {max_sweeps} sweeps")))
}

/// Householder tridiagonalization followed by implicit QL with shifts,
/// accumulating the eigenvectors. Returns ascending eigenvalues and the
/// row-major matrix whose columns are the matching eigenvectors.
pub fn householder_ql_eigen(matrix: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(matrix.len(), n * n);
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut v = matrix.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let at = |k: usize, j: usize| k * n + j;

    // Reduction to tridiagonal form.
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for dk in d[..i].iter_mut() {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].fill(0.0);
            for j in 0..i {
                let f = d[j];
                v[at(j, i)] = f;
                let mut g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let (f, g) = (d[j], e[j]);
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;

    // Implicit QL iterations on the tridiagonal matrix.
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                if iterations > 60 {
                    return Err(Error::Numeric("QL iteration did not converge".into()));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d[l + 2..].iter_mut() {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let h = v[at(k, i + 1)];
                        v[at(k, i + 1)] = s * v[at(k, i)] + c * h;
                        v[at(k, i)] = c * v[at(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let mut vecs = vec![0.0; n * n];
    for (c, &src) in order.iter().enumerate() {
        for k in 0..n {
            vecs[at(k, c)] = v[at(k, src)];
        }
    }
    Ok((order.iter().map(|&i| d[i]).collect(), vecs))
}

/// Two lowest eigenpairs (and the whole spectrum) of a dense Hamiltonian.
pub fn dense_two_lowest(h: &FullHamiltonian) -> Result<DenseEigen> {
    let dim = h.dim();
    if dim > 1 << MAX_DENSE_QUBITS {
        return Err(Error::ResourceLimit {
            what: "dense eigensolver dimension",
            requested: dim as u64,
            limit: 1 << MAX_DENSE_QUBITS,
        });
    }
    let (eigenvalues, vecs) = householder_ql_eigen(h.as_slice(), dim)?;
    let column = |c: usize| -> Vec<f64> { (0..dim).map(|k| vecs[k * dim + c]).collect() };
    let second = 1.min(dim - 1);
    Ok(DenseEigen {
        e0: eigenvalues[0],
        e1: eigenvalues[second],
        v0: column(0),
        v1: column(second),
        eigenvalues,
    })
}

/// Projects the dense `H(s)` onto `{|m>, |m_perp>}`:
/// `[[<m|H|m>, <m|H|m_perp>], [<m_perp|H|m>, <m_perp|H|m_perp>]]`.
pub fn projected_effective(h: &FullHamiltonian) -> [[f64; 2]; 2] {
    let dim = h.dim();
    let m = h.marked_index();
    let x = 1.0 / (dim as f64).sqrt();
    let y = (1.0 - x * x).sqrt();
    let mut e_m = vec![0.0; dim];
    e_m[m] = 1.0;
    let perp: Vec<f64> = (0..dim).map(|i| if i == m { 0.0 } else { x / y }).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let h_m = h.apply(&e_m);
    let h_perp = h.apply(&perp);
    [[dot(&e_m, &h_m), dot(&e_m, &h_perp)], [dot(&perp, &h_m), dot(&perp, &h_perp)]]
}

/// Roots of `lambda^2 - tr lambda + det` for a 2x2 matrix, ascending.
pub fn characteristic_roots(m: [[f64; 2]; 2]) -> (f64, f64) {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    ((tr - disc) / 2.0, (tr + disc) / 2.0)
}

/// Reduced `H(s)` assembled directly from the projector definitions.
fn reduced_from_projectors(x: f64, a: f64, s: f64) -> [[f64; 2]; 2] {
    let y = (1.0 - x * x).sqrt();
    let psi = [x, y];
    let mut h = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let id = if i == j { 1.0 } else { 0.0 };
            let e_m = |k: usize| if k == 0 { 1.0 } else { 0.0 };
            let h0 = id - psi[i] * psi[j];
            let hm = id - e_m(i) * e_m(j);
            let driver = psi[i] * e_m(j) + e_m(i) * psi[j];
            h[i][j] = (1.0 - s) * h0 + s * hm - a * driver;
        }
    }
    h
}

/// Eigenpairs of a symmetric 2x2 matrix by a single Jacobi rotation;
/// returns `(e_low, v_low, e_high, v_high)`.
fn jacobi_2x2(m: [[f64; 2]; 2]) -> (f64, [f64; 2], f64, [f64; 2]) {
    let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
    if b == 0.0 {
        return if a <= d {
            (a, [1.0, 0.0], d, [0.0, 1.0])
        } else {
            (d, [0.0, 1.0], a, [1.0, 0.0])
        };
    }
    let theta = (d - a) / (2.0 * b);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let (e_p, e_q) = (a - t * b, d + t * b);
    let (vp, vq) = ([c, -s], [s, c]);
    if e_p <= e_q {
        (e_p, vp, e_q, vq)
    } else {
        (e_q, vq, e_p, vp)
    }
}

/// `|<E1| dH/ds |E0>|` by central differences of the reduced `H(s)`
/// (one-sided at the ends), eigenvectors from a 2x2 Jacobi rotation.
pub fn finite_difference_matrix_element(
    instance: &SearchInstance,
    profile: &DrivingProfile,
    s: f64,
    delta: f64,
) -> Result<f64> {
    let (lo, hi) = ((s - delta).max(0.0), (s + delta).min(1.0));
    let h_lo = build_effective(instance, profile, lo)?.matrix();
    let h_hi = build_effective(instance, profile, hi)?.matrix();
    let h = build_effective(instance, profile, s)?.matrix();
    let (_, v0, _, v1) = jacobi_2x2(h);
    let mut acc = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            acc += v1[i] * (h_hi[i][j] - h_lo[i][j]) / (hi - lo) * v0[j];
        }
    }
    Ok(acc.abs())
}

/// Fixed-step midpoint propagation with per-step exponentials from a 2x2
/// eigen-decomposition. Requires `dt <= T / 1e5`.
pub fn reference_propagate(
    instance: &SearchInstance,
    profile: &DrivingProfile,
    schedule: &Schedule,
    dt: f64,
) -> Result<EvolutionResult> {
    let total = schedule.total_time();
    if !(dt > 0.0) || dt > total / 1e5 * (1.0 + 1e-12) {
        return Err(Error::invalid(format!("reference step {dt} exceeds T/1e5 = {}", total / 1e5)));
    }
    let steps = (total / dt).ceil() as usize;
    let dt = total / steps as f64;
    let x = instance.overlap();
    let record_every = (steps / 1000).max(1);
    let mut psi = [Complex64::new(x, 0.0), Complex64::new((1.0 - x * x).sqrt(), 0.0)];
    let mut trajectory = Vec::new();
    let mut push = |t: f64, psi: &[Complex64; 2]| -> Result<()> {
        let s = schedule.s_at(t);
        let (_, g, _, _) = jacobi_2x2(reduced_from_projectors(x, profile.coefficient(s)?, s));
        let overlap = psi[0] * g[0] + psi[1] * g[1];
        trajectory.push(TrajectoryPoint {
            t,
            s,
            state: ReducedState::new(psi[0], psi[1]),
            ground_fidelity: overlap.norm_sqr(),
            marked_fidelity: psi[0].norm_sqr(),
        });
        Ok(())
    };
    push(0.0, &psi)?;
    for k in 0..steps {
        let s = schedule.s_at((k as f64 + 0.5) * dt);
        let h = reduced_from_projectors(x, profile.coefficient(s)?, s);
        let (e0, v0, e1, v1) = jacobi_2x2(h);
        let p0 = Complex64::from_polar(1.0, -e0 * dt);
        let p1 = Complex64::from_polar(1.0, -e1 * dt);
        let c0 = psi[0] * v0[0] + psi[1] * v0[1];
        let c1 = psi[0] * v1[0] + psi[1] * v1[1];
        psi = [
            p0 * c0 * v0[0] + p1 * c1 * v1[0],
            p0 * c0 * v0[1] + p1 * c1 * v1[1],
        ];
        if (k + 1) % record_every == 0 || k + 1 == steps {
            let t = if k + 1 == steps { total } else { (k + 1) as f64 * dt };
            push(t, &psi)?;
        }
    }
    let last = *trajectory.last().expect("recorded");
    let norm_drift = trajectory
        .iter()
        .map(|p| (p.state.norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(EvolutionResult {
        final_state: last.state,
        final_marked_fidelity: last.marked_fidelity,
        final_ground_fidelity: last.ground_fidelity,
        epsilon: schedule.epsilon(),
        schedule: ScheduleSummary::from(schedule),
        trajectory,
        norm_drift,
        max_leakage: None,
    })
}

/// Adaptive Simpson quadrature with Richardson acceptance: a panel is
/// accepted when its two half-panel Simpson sums differ from the whole by
/// at most `15 tol_panel`, where `tol_panel` is `tol` scaled by the panel
/// width.
pub fn high_res_quadrature<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(tol >= 1e-14) {
        return Err(Error::invalid(format!("tolerance {tol:e} below 1e-14")));
    }
    const MAX_PANELS: usize = 1_000_000;
    let simpson = |fa: f64, fm: f64, fb: f64, h: f64| h / 6.0 * (fa + 4.0 * fm + fb);
    let width = b - a;
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let mut stack = vec![(a, b, fa, fm, fb, simpson(fa, fm, fb, width))];
    let mut total = 0.0;
    let mut compensation = 0.0;
    let mut panels = 0usize;
    while let Some((lo, hi, flo, fmid, fhi, whole)) = stack.pop() {
        panels += 1;
        if panels > MAX_PANELS {
            return Err(Error::Numeric("high-resolution quadrature exceeded 1e6 panels".into()));
        }
        let mid = 0.5 * (lo + hi);
        let (fl, fr) = (f(0.5 * (lo + mid)), f(0.5 * (mid + hi)));
        let left = simpson(flo, fl, fmid, mid - lo);
        let right = simpson(fmid, fr, fhi, hi - mid);
        let refined = left + right;
        let local_tol = tol * (hi - lo) / width;
        if (refined - whole).abs() <= 15.0 * local_tol || hi - lo <= 1e-12 * width {
            // Kahan-summed accumulation of the extrapolated panel value.
            let value = refined + (refined - whole) / 15.0;
            let y = value - compensation;
            let t = total + y;
            compensation = (t - total) - y;
            total = t;
        } else {
            stack.push((mid, hi, fmid, fr, fhi, right));
            stack.push((lo, mid, flo, fl, fmid, left));
        }
    }
    Ok(total)
}

/// `integral_0^upper ds / g(s)^2` with `g^2` taken from the characteristic
/// roots of the projector-built reduced Hamiltonian at overlap `x`.
pub fn inverse_gap_integral(x: f64, profile: &DrivingProfile, upper: f64, tol: f64) -> Result<f64> {
    let integrand = |s: f64| {
        let (e0, e1) = characteristic_roots(reduced_from_projectors(x, profile.coefficient_unchecked(s), s));
        1.0 / ((e1 - e0) * (e1 - e0))
    };
    if upper > 0.5 {
        Ok(high_res_quadrature(integrand, 0.0, 0.5, tol)? + high_res_quadrature(integrand, 0.5, upper, tol)?)
    } else {
        high_res_quadrature(integrand, 0.0, upper, tol)
    }
}

/// Brute-force minimum of the characteristic-root gap over `points`
/// uniformly spaced reduced times. Returns `(s, g)`.
pub fn brute_force_min_gap(x: f64, profile: &DrivingProfile, points: usize) -> (f64, f64) {
    let mut best = (0.0, f64::INFINITY);
    for k in 0..points {
        let s = k as f64 / (points - 1) as f64;
        let (e0, e1) = characteristic_roots(reduced_from_projectors(x, profile.coefficient_unchecked(s), s));
        if e1 - e0 < best.1 {
            best = (s, e1 - e0);
        }
    }
    best
}
