//! Search instances, driving profiles and the interpolating Hamiltonian.
//!
//! The reduced basis is `{|m>, |m_perp>}` with
//! `|psi0> = x |m> + sqrt(1 - x^2) |m_perp>` and `x = 1/sqrt(N)`. The energy
//! prefactor is fixed to 1 and `hbar = 1`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest qubit count with a representable `N = 2^n`.
pub const MAX_QUBITS: u32 = 63;
/// Largest qubit count for dense `N x N` matrices.
pub const MAX_DENSE_QUBITS: u32 = 12;

/// A database of `N = 2^n` items with one marked entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchInstance {
    n: u32,
    size: u64,
    x: f64,
    marked_index: Option<u64>,
}

impl SearchInstance {
    pub fn new(n: u32) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(Error::invalid(format!(
                "qubit count must lie in 1..={MAX_QUBITS}, got {n}"
            )));
        }
        Ok(Self {
            n,
            size: 1u64 << n,
            x: (-(n as f64) / 2.0).exp2(),
            marked_index: None,
        })
    }

    /// Attaches a marked basis label for full-space constructions.
    pub fn with_marked(mut self, index: u64) -> Result<Self> {
        if index >= self.size {
            return Err(Error::invalid(format!(
                "marked index {index} outside [0, {})",
                self.size
            )));
        }
        self.marked_index = Some(index);
        Ok(self)
    }

    pub fn qubits(&self) -> u32 {
        self.n
    }

    /// Database size `N`.
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn size_f64(&self) -> f64 {
        self.size as f64
    }

    /// Overlap `x = <m|psi0> = 1/sqrt(N)`.
    pub fn overlap(&self) -> f64 {
        self.x
    }

    /// `sqrt(1 - x^2)`, the `|m_perp>` amplitude of `|psi0>`.
    pub fn overlap_complement(&self) -> f64 {
        (1.0 - self.x * self.x).sqrt()
    }

    /// Marked label, defaulting to 0.
    pub fn marked_index(&self) -> u64 {
        self.marked_index.unwrap_or(0)
    }
}

/// Shorthand for [`SearchInstance::new`].
pub fn make_instance(n: u32) -> Result<SearchInstance> {
    SearchInstance::new(n)
}

/// Names of the driving-profile variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    None,
    Quadratic,
    SqrtProduct,
    PaperAlt,
    Custom,
}

impl ProfileKind {
    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::None => "none",
            ProfileKind::Quadratic => "quadratic",
            ProfileKind::SqrtProduct => "sqrt_product",
            ProfileKind::PaperAlt => "paper_alt",
            ProfileKind::Custom => "custom",
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

type CoefficientFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied coefficient `a(s)`, closed form or sampled.
#[derive(Clone)]
pub struct CustomProfile {
    name: String,
    coefficient: CoefficientFn,
    derivative: Option<CoefficientFn>,
}

impl CustomProfile {
    pub fn new(name: impl Into<String>, coefficient: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            coefficient: Arc::new(coefficient),
            derivative: None,
        }
    }

    pub fn with_derivative(mut self, derivative: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    /// Piecewise-linear coefficient through `(s, a)` samples sorted by `s`
    /// and covering `[0, 1]`.
    pub fn from_samples(name: impl Into<String>, samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid("a sampled profile needs at least two samples"));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("sample abscissae must be strictly increasing"));
        }
        let (first, last) = (samples[0].0, samples[samples.len() - 1].0);
        if first > 0.0 || last < 1.0 {
            return Err(Error::invalid("samples must cover [0, 1]"));
        }
        let table = Arc::new(samples);
        let lookup = table.clone();
        let coefficient = move |s: f64| {
            let k = lookup.partition_point(|p| p.0 <= s).clamp(1, lookup.len() - 1);
            let (s0, a0) = lookup[k - 1];
            let (s1, a1) = lookup[k];
            a0 + (a1 - a0) * (s - s0) / (s1 - s0)
        };
        let slope = move |s: f64| {
            let k = table.partition_point(|p| p.0 <= s).clamp(1, table.len() - 1);
            let (s0, a0) = table[k - 1];
            let (s1, a1) = table[k];
            (a1 - a0) / (s1 - s0)
        };
        Ok(Self::new(name, coefficient).with_derivative(slope))
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomProfile")
            .field("name", &self.name)
            .field("has_derivative", &self.derivative.is_some())
            .finish()
    }
}

/// The path-deformation coefficient `a(s) = b(s)` of the driving term.
#[derive(Debug, Clone)]
pub enum DrivingProfile {
    /// `a = 0`: plain linear interpolation.
    None,
    /// `a = s (1 - s)`.
    Quadratic,
    /// `a = sqrt(s (1 - s))`.
    SqrtProduct,
    /// `a = sqrt(s (s + 1))`; does not vanish at `s = 1`.
    PaperAlt,
    Custom(CustomProfile),
}

impl DrivingProfile {
    /// The built-in variants.
    pub const BUILTIN: [DrivingProfile; 4] = [
        DrivingProfile::None,
        DrivingProfile::Quadratic,
        DrivingProfile::SqrtProduct,
        DrivingProfile::PaperAlt,
    ];

    pub fn kind(&self) -> ProfileKind {
        match self {
            DrivingProfile::None => ProfileKind::None,
            DrivingProfile::Quadratic => ProfileKind::Quadratic,
            DrivingProfile::SqrtProduct => ProfileKind::SqrtProduct,
            DrivingProfile::PaperAlt => ProfileKind::PaperAlt,
            DrivingProfile::Custom(_) => ProfileKind::Custom,
        }
    }

    /// Label used in tables: the kind name, or `custom:<name>`.
    pub fn label(&self) -> String {
        match self {
            DrivingProfile::Custom(c) => format!("custom:{}", c.name),
            other => other.kind().name().to_string(),
        }
    }

    /// `a(s)` with a range check on `s`.
    pub fn coefficient(&self, s: f64) -> Result<f64> {
        check_reduced_time(s)?;
        Ok(self.coefficient_unchecked(s))
    }

    /// `a(s)` without the range check. Square-root profiles clamp their
    /// radicand at zero.
    pub fn coefficient_unchecked(&self, s: f64) -> f64 {
        match self {
            DrivingProfile::None => 0.0,
            DrivingProfile::Quadratic => s * (1.0 - s),
            DrivingProfile::SqrtProduct => (s * (1.0 - s)).max(0.0).sqrt(),
            DrivingProfile::PaperAlt => (s * (s + 1.0)).max(0.0).sqrt(),
            DrivingProfile::Custom(c) => (c.coefficient)(s),
        }
    }

    /// `da/ds`. Infinite where a square-root profile has a vertical tangent.
    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            DrivingProfile::None => 0.0,
            DrivingProfile::Quadratic => 1.0 - 2.0 * s,
            DrivingProfile::SqrtProduct => {
                let r = s * (1.0 - s);
                if r <= 0.0 {
                    if s <= 0.5 {
                        f64::INFINITY
                    } else {
                        f64::NEG_INFINITY
                    }
                } else {
                    (1.0 - 2.0 * s) / (2.0 * r.sqrt())
                }
            }
            DrivingProfile::PaperAlt => {
                let r = s * (s + 1.0);
                if r <= 0.0 {
                    f64::INFINITY
                } else {
                    (2.0 * s + 1.0) / (2.0 * r.sqrt())
                }
            }
            DrivingProfile::Custom(c) => match &c.derivative {
                Some(d) => d(s),
                None => {
                    let h = 1e-6;
                    let (lo, hi) = ((s - h).max(0.0), (s + h).min(1.0));
                    ((c.coefficient)(hi) - (c.coefficient)(lo)) / (hi - lo)
                }
            },
        }
    }

    /// True when `a(0) = a(1) = 0`, so the path starts at `H0` and ends at `Hm`.
    pub fn is_valid_path(&self) -> bool {
        self.coefficient_unchecked(0.0).abs() <= 1e-15 && self.coefficient_unchecked(1.0).abs() <= 1e-15
    }

    pub fn validate_path(&self) -> Result<()> {
        if self.is_valid_path() {
            Ok(())
        } else {
            Err(Error::InvalidPath(format!(
                "profile {} has a(0) = {}, a(1) = {}; H(0) = H0 and H(1) = Hm require both to vanish",
                self.label(),
                self.coefficient_unchecked(0.0),
                self.coefficient_unchecked(1.0)
            )))
        }
    }
}

impl fmt::Display for DrivingProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for DrivingProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "plain" | "rc" => Ok(DrivingProfile::None),
            "quadratic" => Ok(DrivingProfile::Quadratic),
            "sqrt" | "sqrt_product" => Ok(DrivingProfile::SqrtProduct),
            "alt" | "paper_alt" => Ok(DrivingProfile::PaperAlt),
            other => Err(Error::invalid(format!(
                "unknown profile '{other}' (expected none, quadratic, sqrt, alt)"
            ))),
        }
    }
}

/// `a(s)` for a profile; errors when `s` is outside `[0, 1]`.
pub fn profile_coefficient(profile: &DrivingProfile, s: f64) -> Result<f64> {
    profile.coefficient(s)
}

pub(crate) fn check_reduced_time(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::invalid(format!("reduced time s = {s} outside [0, 1]")))
    }
}

/// State in the reduced basis `{|m>, |m_perp>}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub amp_m: Complex64,
    pub amp_perp: Complex64,
}

impl ReducedState {
    pub fn new(amp_m: Complex64, amp_perp: Complex64) -> Self {
        Self { amp_m, amp_perp }
    }

    pub fn real(m: f64, perp: f64) -> Self {
        Self::new(Complex64::new(m, 0.0), Complex64::new(perp, 0.0))
    }

    /// `|m>`.
    pub fn marked() -> Self {
        Self::real(1.0, 0.0)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp_m.norm_sqr() + self.amp_perp.norm_sqr()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &ReducedState) -> Complex64 {
        self.amp_m.conj() * other.amp_m + self.amp_perp.conj() * other.amp_perp
    }
}

/// `|psi0>` in the reduced basis: `(x, sqrt(1 - x^2))`.
pub fn initial_state(instance: &SearchInstance) -> ReducedState {
    ReducedState::real(instance.overlap(), instance.overlap_complement())
}

/// Real symmetric 2x2 matrix of `H(s)` in the basis `{|m>, |m_perp>}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveHamiltonian {
    pub s: f64,
    pub h_mm: f64,
    pub h_pp: f64,
    pub h_mp: f64,
}

impl EffectiveHamiltonian {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.h_mm, self.h_mp], [self.h_mp, self.h_pp]]
    }

    pub fn trace(&self) -> f64 {
        self.h_mm + self.h_pp
    }

    pub fn apply(&self, v: &ReducedState) -> ReducedState {
        ReducedState::new(
            v.amp_m * self.h_mm + v.amp_perp * self.h_mp,
            v.amp_m * self.h_mp + v.amp_perp * self.h_pp,
        )
    }

    /// `<u| H |v>` for real vectors.
    pub fn sandwich(&self, u: [f64; 2], v: [f64; 2]) -> f64 {
        u[0] * (self.h_mm * v[0] + self.h_mp * v[1]) + u[1] * (self.h_mp * v[0] + self.h_pp * v[1])
    }
}

/// Entries of `(1-s) H0 + s Hm - a (|psi0><m| + |m><psi0|)` for overlap `x`.
pub(crate) fn effective_entries(x: f64, a: f64, s: f64) -> EffectiveHamiltonian {
    let x2 = x * x;
    let y = (1.0 - x2).sqrt();
    EffectiveHamiltonian {
        s,
        h_mm: (1.0 - s) * (1.0 - x2) - 2.0 * a * x,
        h_pp: (1.0 - s) * x2 + s,
        h_mp: -(1.0 - s) * x * y - a * y,
    }
}

/// `d/ds` of [`effective_entries`] given `da/ds`.
pub(crate) fn effective_derivative_entries(x: f64, da: f64, s: f64) -> EffectiveHamiltonian {
    let x2 = x * x;
    let y = (1.0 - x2).sqrt();
    EffectiveHamiltonian {
        s,
        h_mm: -(1.0 - x2) - 2.0 * da * x,
        h_pp: 1.0 - x2,
        h_mp: x * y - da * y,
    }
}

/// `H(s)` projected onto the reduced basis.
pub fn build_effective(instance: &SearchInstance, profile: &DrivingProfile, s: f64) -> Result<EffectiveHamiltonian> {
    let a = profile.coefficient(s)?;
    Ok(effective_entries(instance.overlap(), a, s))
}

/// Analytic `dH/ds` in the reduced basis. Entries are infinite where the
/// profile derivative is.
pub fn build_effective_derivative(
    instance: &SearchInstance,
    profile: &DrivingProfile,
    s: f64,
) -> Result<EffectiveHamiltonian> {
    check_reduced_time(s)?;
    Ok(effective_derivative_entries(instance.overlap(), profile.derivative(s), s))
}

/// The 2x2 matrix exactly as typeset alongside the driven Hamiltonian,
/// `[[(s-1)(x(s+x)-1), (s-1)(s+x)sqrt(1-x^2)], [.., s(1-s)x^2]]`.
///
/// Kept only for comparison: its spectrum does not reproduce the closed-form
/// gap (at `s = 1/2`, `x -> 0` its gap is `sqrt(2)/2` instead of `1/2`).
pub fn printed_matrix(instance: &SearchInstance, s: f64) -> Result<EffectiveHamiltonian> {
    check_reduced_time(s)?;
    let x = instance.overlap();
    let y = instance.overlap_complement();
    Ok(EffectiveHamiltonian {
        s,
        h_mm: (s - 1.0) * (x * (s + x) - 1.0),
        h_pp: s * (1.0 - s) * x * x,
        h_mp: (s - 1.0) * (s + x) * y,
    })
}

/// Dense `N x N` realization of `H(s)` in the computational basis.
#[derive(Debug, Clone)]
pub struct FullHamiltonian {
    dim: usize,
    s: f64,
    profile: ProfileKind,
    marked_index: usize,
    data: Vec<f64>,
}

impl FullHamiltonian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn profile(&self) -> ProfileKind {
        self.profile
    }

    pub fn marked_index(&self) -> usize {
        self.marked_index
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(h, x)| h * x).sum())
            .collect()
    }

    pub fn apply_complex(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(h, x)| x * *h).sum())
            .collect()
    }
}

/// Assembles `H(s)` from `|psi0> = (1, .., 1)/sqrt(N)` and the marked basis
/// vector. Limited to `n <= 12`.
pub fn build_full(
    instance: &SearchInstance,
    profile: &DrivingProfile,
    s: f64,
    marked_index: u64,
) -> Result<FullHamiltonian> {
    if instance.qubits() > MAX_DENSE_QUBITS {
        return Err(Error::ResourceLimit {
            what: "dense Hamiltonian qubits",
            requested: instance.qubits() as u64,
            limit: MAX_DENSE_QUBITS as u64,
        });
    }
    if marked_index >= instance.size() {
        return Err(Error::invalid(format!(
            "marked index {marked_index} outside [0, {})",
            instance.size()
        )));
    }
    let a = profile.coefficient(s)?;
    let dim = instance.size() as usize;
    let m = marked_index as usize;
    let psi0 = 1.0 / (dim as f64).sqrt();
    let mut data = vec![0.0; dim * dim];
    for i in 0..dim {
        let marked_row = if i == m { 1.0 } else { 0.0 };
        for j in 0..dim {
            let marked_col = if j == m { 1.0 } else { 0.0 };
            let identity = if i == j { 1.0 } else { 0.0 };
            let h0 = identity - psi0 * psi0;
            let hm = identity - marked_row * marked_col;
            let driver = psi0 * marked_col + marked_row * psi0;
            data[i * dim + j] = (1.0 - s) * h0 + s * hm - a * driver;
        }
    }
    Ok(FullHamiltonian {
        dim,
        s,
        profile: profile.kind(),
        marked_index: m,
        data,
    })
}

/// Matrix-free full-space `H(s)`: the same operator as [`build_full`],
/// applied through its rank-two structure in `O(N)`.
#[derive(Debug, Clone, Copy)]
pub struct FullOperator {
    dim: usize,
    marked: usize,
    psi0: f64,
    s: f64,
    a: f64,
}

impl FullOperator {
    pub fn new(dim: usize, marked: usize, s: f64, a: f64) -> Self {
        Self {
            dim,
            marked,
            psi0: 1.0 / (dim as f64).sqrt(),
            s,
            a,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `out = H v`.
    pub fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        let overlap_psi0: Complex64 = v.iter().sum::<Complex64>() * self.psi0;
        let vm = v[self.marked];
        // (1-s)(v - |psi0><psi0|v>) + s(v - |m><m|v>) - a(|psi0><m|v> + |m><psi0|v>)
        let uniform = overlap_psi0 * ((1.0 - self.s) * self.psi0) + vm * (self.a * self.psi0);
        for (o, vi) in out.iter_mut().zip(v) {
            *o = vi - uniform;
        }
        out[self.marked] -= vm * self.s + overlap_psi0 * self.a;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn instance_sizes() {
        let six = make_instance(6).unwrap();
        assert_eq!(six.size(), 64);
        assert_eq!(six.overlap(), 0.125);
        let one = make_instance(1).unwrap();
        assert_eq!(one.size(), 2);
        assert!(close(one.overlap(), std::f64::consts::FRAC_1_SQRT_2, 1e-15));
        assert!(matches!(make_instance(64), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_instance(0), Err(Error::InvalidArgument(_))));
        let big = make_instance(63).unwrap();
        assert_eq!(big.size(), 1 << 63);
    }

    #[test]
    fn overlap_squared_times_size_is_one() {
        for n in 1..=63 {
            let inst = make_instance(n).unwrap();
            let v = inst.overlap() * inst.overlap() * inst.size_f64();
            assert!(close(v, 1.0, 4.0 * f64::EPSILON), "n={n}: {v}");
        }
    }

    #[test]
    fn marked_index_bounds() {
        let inst = make_instance(3).unwrap();
        assert_eq!(inst.marked_index(), 0);
        assert_eq!(inst.with_marked(7).unwrap().marked_index(), 7);
        assert!(inst.with_marked(8).is_err());
    }

    #[test]
    fn initial_state_amplitudes() {
        let psi = initial_state(&make_instance(6).unwrap());
        assert_eq!(psi.amp_m.re, 0.125);
        assert!(close(psi.amp_perp.re, 0.992_156_741_649_222, 1e-12));
        let psi = initial_state(&make_instance(1).unwrap());
        assert!(close(psi.amp_m.re, psi.amp_perp.re, 1e-15));
        let psi = initial_state(&make_instance(2).unwrap());
        assert_eq!(psi.amp_m.re, 0.5);
        assert!(close(psi.amp_perp.re, 0.866_025_403_784_438_6, 1e-15));
        assert!(close(psi.norm_sqr(), 1.0, 1e-15));
    }

    #[test]
    fn profile_coefficients() {
        let q = DrivingProfile::Quadratic;
        assert_eq!(q.coefficient(0.5).unwrap(), 0.25);
        assert_eq!(q.coefficient(0.0).unwrap(), 0.0);
        assert_eq!(q.coefficient(1.0).unwrap(), 0.0);
        let alt = DrivingProfile::PaperAlt;
        assert!(close(alt.coefficient(1.0).unwrap(), std::f64::consts::SQRT_2, 1e-15));
        assert!(matches!(q.coefficient(1.5), Err(Error::InvalidArgument(_))));
        assert!(matches!(q.coefficient(-0.1), Err(Error::InvalidArgument(_))));
        assert_eq!(DrivingProfile::SqrtProduct.coefficient(0.5).unwrap(), 0.5);
    }

    #[test]
    fn builtin_profiles_start_at_zero_and_alt_is_flagged() {
        for p in DrivingProfile::BUILTIN {
            assert_eq!(p.coefficient(0.0).unwrap(), 0.0, "{p}");
        }
        assert!(DrivingProfile::None.is_valid_path());
        assert!(DrivingProfile::Quadratic.is_valid_path());
        assert!(DrivingProfile::SqrtProduct.is_valid_path());
        assert!(!DrivingProfile::PaperAlt.is_valid_path());
        assert!(matches!(DrivingProfile::PaperAlt.validate_path(), Err(Error::InvalidPath(_))));
    }

    #[test]
    fn profile_names_parse() {
        for (name, kind) in [
            ("none", ProfileKind::None),
            ("quadratic", ProfileKind::Quadratic),
            ("sqrt", ProfileKind::SqrtProduct),
            ("alt", ProfileKind::PaperAlt),
        ] {
            assert_eq!(name.parse::<DrivingProfile>().unwrap().kind(), kind);
        }
        assert!("cubic".parse::<DrivingProfile>().is_err());
    }

    #[test]
    fn custom_profiles() {
        let c = DrivingProfile::Custom(CustomProfile::new("half", |s| 0.5 * s * (1.0 - s)));
        assert_eq!(c.coefficient(0.5).unwrap(), 0.125);
        assert!(close(c.derivative(0.25), 0.25, 1e-8));
        assert_eq!(c.label(), "custom:half");
        let sampled = CustomProfile::from_samples("tri", vec![(0.0, 0.0), (0.5, 0.2), (1.0, 0.0)]).unwrap();
        let p = DrivingProfile::Custom(sampled);
        assert!(close(p.coefficient(0.25).unwrap(), 0.1, 1e-15));
        assert!(close(p.derivative(0.75), -0.4, 1e-15));
        assert!(p.is_valid_path());
        assert!(CustomProfile::from_samples("bad", vec![(0.0, 0.0), (0.5, 0.0)]).is_err());
    }

    #[test]
    fn effective_endpoints() {
        for n in [1, 2, 6, 10, 20] {
            let inst = make_instance(n).unwrap();
            let x = inst.overlap();
            let y = inst.overlap_complement();
            for p in [DrivingProfile::None, DrivingProfile::Quadratic, DrivingProfile::SqrtProduct] {
                let h0 = build_effective(&inst, &p, 0.0).unwrap();
                assert!(close(h0.h_mm, 1.0 - x * x, 1e-15));
                assert!(close(h0.h_mp, -x * y, 1e-15));
                assert!(close(h0.h_pp, x * x, 1e-15));
                let h1 = build_effective(&inst, &p, 1.0).unwrap();
                assert!(close(h1.h_mm, 0.0, 1e-15));
                assert!(close(h1.h_mp, 0.0, 1e-15));
                assert!(close(h1.h_pp, 1.0, 1e-15));
            }
        }
    }

    #[test]
    fn effective_small_overlap_midpoint() {
        let h = effective_entries(0.0, 0.25, 0.5);
        assert_eq!((h.h_mm, h.h_mp, h.h_pp), (0.5, -0.25, 0.5));
        assert!(build_effective(&make_instance(4).unwrap(), &DrivingProfile::Quadratic, 1.01).is_err());
    }

    #[test]
    fn printed_matrix_disagrees_at_midpoint() {
        let inst = make_instance(40).unwrap();
        let h = printed_matrix(&inst, 0.5).unwrap();
        let gap = ((h.h_mm - h.h_pp).powi(2) + 4.0 * h.h_mp * h.h_mp).sqrt();
        assert!(close(gap, std::f64::consts::FRAC_1_SQRT_2, 1e-6));
    }

    #[test]
    fn full_two_qubit_like_case() {
        let inst = make_instance(1).unwrap();
        for m in 0..2 {
            let h = build_full(&inst, &DrivingProfile::Quadratic, 0.0, m).unwrap();
            assert!(close(h.get(0, 0), 0.5, 1e-15));
            assert!(close(h.get(0, 1), -0.5, 1e-15));
            assert!(close(h.get(1, 0), -0.5, 1e-15));
            assert!(close(h.get(1, 1), 0.5, 1e-15));
        }
    }

    #[test]
    fn full_guards() {
        let inst = make_instance(13).unwrap();
        assert!(matches!(
            build_full(&inst, &DrivingProfile::Quadratic, 0.5, 0),
            Err(Error::ResourceLimit { .. })
        ));
        let inst = make_instance(3).unwrap();
        assert!(build_full(&inst, &DrivingProfile::Quadratic, 0.5, 8).is_err());
    }

    #[test]
    fn full_is_symmetric() {
        let inst = make_instance(5).unwrap();
        let h = build_full(&inst, &DrivingProfile::SqrtProduct, 0.3, 9).unwrap();
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                assert!((h.get(i, j) - h.get(j, i)).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn structured_operator_matches_dense() {
        let inst = make_instance(5).unwrap();
        let p = DrivingProfile::Quadratic;
        let h = build_full(&inst, &p, 0.37, 11).unwrap();
        let op = FullOperator::new(32, 11, 0.37, p.coefficient(0.37).unwrap());
        let v: Vec<Complex64> = (0..32).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let dense = h.apply_complex(&v);
        let mut fast = vec![Complex64::new(0.0, 0.0); 32];
        op.apply_into(&v, &mut fast);
        for (a, b) in dense.iter().zip(&fast) {
            assert!((a - b).norm() <= 1e-14);
        }
    }

    proptest! {
        #[test]
        fn effective_is_symmetric_and_matches_definition(n in 1u32..=40, s in 0.0f64..=1.0) {
            let inst = make_instance(n).unwrap();
            let h = build_effective(&inst, &DrivingProfile::Quadratic, s).unwrap();
            let m = h.matrix();
            prop_assert_eq!(m[0][1], m[1][0]);
            let x = inst.overlap();
            let y = inst.overlap_complement();
            let a = s * (1.0 - s);
            prop_assert!((h.h_mm - ((1.0 - s) * (1.0 - x * x) - 2.0 * a * x)).abs() <= 1e-15);
            prop_assert!((h.h_mp - (-(1.0 - s) * x * y - a * y)).abs() <= 1e-15);
        }
    }
}
