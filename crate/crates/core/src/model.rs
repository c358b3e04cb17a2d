//! Hamiltonians of the two-resonator circuit and the two-frequency
//! Jahn-Teller model, the privileged-mode decomposition linking them, and
//! the hardware-to-coupling conversion.
//!
//! Three parameterizations are supported:
//!
//! * [`CircuitParams`]: qubit `Ω`, resonators `Ω₁, Ω₂`, couplings `λ₁, λ₂`,
//!   photon hopping `J`.
//! * [`ScaledParams`]: the dimensionless `(k_eff, Δ)` family with degenerate
//!   unit-frequency resonators, hopping `Δ/2` and couplings `k_eff`,
//!   `k_eff·Δ/2`.
//! * [`JTParams`]: vibrational frequencies `ω₁, ω₂` with scaling factors
//!   `k₁, k₂`; the electronic operator is always σ_x.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::operators::{annihilation, pauli, HilbertSpace, Operator, PauliAxis, C64};

/// Hermiticity tolerance accepted by [`lowest_eigenvalues`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative tolerance on `Ω₁λ₂ = λ₁J` accepted by [`circuit_to_jt`].
pub const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitParams {
    /// Qubit transition frequency.
    pub omega: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub lambda1: f64,
    /// Carries the sign of `c₂` when produced by [`jt_to_circuit`].
    pub lambda2: f64,
    /// Photon hopping; same sign as `lambda2`.
    pub j: f64,
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        positive("omega", self.omega)?;
        positive("omega1", self.omega1)?;
        positive("omega2", self.omega2)?;
        if !(self.lambda1.is_finite() && self.lambda1 >= 0.0) {
            return Err(invalid("lambda1", format!("must be finite and >= 0, got {}", self.lambda1)));
        }
        finite("lambda2", self.lambda2)?;
        finite("j", self.j)?;
        Ok(())
    }

    /// Residual `Ω₁ − (λ₁/λ₂)·J`; infinite when `λ₂ = 0` but `J ≠ 0`.
    pub fn consistency_residual(&self) -> f64 {
        if self.lambda2 == 0.0 {
            if self.j == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.omega1 - self.lambda1 / self.lambda2 * self.j
        }
    }

    fn is_consistent(&self) -> bool {
        if self.lambda2 == 0.0 || self.j == 0.0 {
            return self.lambda2 == 0.0 && self.j == 0.0;
        }
        let lhs = self.omega1 * self.lambda2;
        let rhs = self.lambda1 * self.j;
        (lhs - rhs).abs() <= CONSISTENCY_TOL * lhs.abs().max(rhs.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledParams {
    pub k_eff: f64,
    /// Mode-coupling parameter in units of the resonator frequency.
    pub delta: f64,
    /// Qubit frequency offset from the resonators, `Ω = 1 + qubit_detuning`.
    #[serde(default)]
    pub qubit_detuning: f64,
}

impl ScaledParams {
    pub fn new(k_eff: f64, delta: f64) -> Self {
        Self { k_eff, delta, qubit_detuning: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_eff.is_finite() && self.k_eff >= 0.0) {
            return Err(invalid("k_eff", format!("must be finite and >= 0, got {}", self.k_eff)));
        }
        if !(self.delta.is_finite() && self.delta.abs() < 2.0) {
            return Err(invalid("delta", format!("|delta| must be < 2, got {}", self.delta)));
        }
        finite("qubit_detuning", self.qubit_detuning)?;
        if 1.0 + self.qubit_detuning <= 0.0 {
            return Err(invalid("qubit_detuning", "qubit frequency 1 + detuning must be > 0"));
        }
        Ok(())
    }

    /// Resonator hopping `J = Δ/2`.
    pub fn hopping(&self) -> f64 {
        self.delta / 2.0
    }

    pub fn to_circuit(&self) -> CircuitParams {
        CircuitParams {
            omega: 1.0 + self.qubit_detuning,
            omega1: 1.0,
            omega2: 1.0,
            lambda1: self.k_eff,
            lambda2: self.k_eff * self.delta / 2.0,
            j: self.delta / 2.0,
        }
    }

    /// Equivalent Jahn-Teller parameters with `k₁ = k₂ = k_eff/√2` and
    /// `ω₁,₂ = 1 ± Δ/2`.
    pub fn to_jt(&self) -> JTParams {
        let k = self.k_eff / std::f64::consts::SQRT_2;
        JTParams {
            omega1: 1.0 + self.delta / 2.0,
            omega2: 1.0 - self.delta / 2.0,
            k1: k,
            k2: k,
            qubit_splitting: 1.0 + self.qubit_detuning,
        }
    }
}

fn default_qubit_splitting() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JTParams {
    pub omega1: f64,
    pub omega2: f64,
    pub k1: f64,
    pub k2: f64,
    /// Splitting of the electronic levels (the `½σ_z` term has coefficient
    /// `qubit_splitting / 2`).
    #[serde(default = "default_qubit_splitting")]
    pub qubit_splitting: f64,
}

impl JTParams {
    /// Equal scaling factors `k₁ = k₂ = k` with unit qubit splitting.
    pub fn symmetric(omega1: f64, omega2: f64, k: f64) -> Self {
        Self { omega1, omega2, k1: k, k2: k, qubit_splitting: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        positive("omega1", self.omega1)?;
        positive("omega2", self.omega2)?;
        positive("qubit_splitting", self.qubit_splitting)?;
        for (name, k) in [("k1", self.k1), ("k2", self.k2)] {
            if !(k.is_finite() && k >= 0.0) {
                return Err(invalid(name, format!("must be finite and >= 0, got {k}")));
            }
        }
        Ok(())
    }
}

/// Privileged-mode decomposition of a two-frequency Jahn-Teller model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveMode {
    pub omega_eff: f64,
    pub k_eff: f64,
    /// Frequency of the disadvantaged mode.
    pub omega_prime: f64,
    /// Privileged/disadvantaged coupling (frequency spread).
    pub c2: f64,
    /// Orthogonal rotation `α = A a`, row-major.
    pub rotation: [[f64; 2]; 2],
    /// Coupling-weighted frequency moments (first, second).
    pub moments: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareParams {
    /// Resonator inductances (H).
    pub l1: f64,
    pub l2: f64,
    /// Qubit coupling inductances (H).
    pub lc1: f64,
    pub lc2: f64,
    /// Resonator capacitances (F).
    pub c1: f64,
    pub c2: f64,
    /// Resonator-resonator coupling capacitance (F).
    pub cc: f64,
}

/// Resonator frequencies and hopping in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardwareCoupling {
    pub omega1: f64,
    pub omega2: f64,
    pub j: f64,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite, got {v}")))
    }
}

fn c(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// `(Ω/2)σ_z + Σ Ω_i α_i†α_i + [Σ λ_i(α_i† + α_i)]σ_x + J(α₁†α₂ + α₂†α₁)`.
pub fn build_circuit_hamiltonian(p: &CircuitParams, space: HilbertSpace) -> Result<Operator> {
    p.validate()?;
    let a1 = annihilation(space, 1)?;
    let a2 = annihilation(space, 2)?;
    let (a1m, a2m) = (a1.matrix(), a2.matrix());
    let (a1d, a2d) = (a1m.adjoint(), a2m.adjoint());
    let sz = pauli(space, PauliAxis::Z);
    let sx = pauli(space, PauliAxis::X);

    let mut h = sz.matrix() * c(p.omega / 2.0);
    h += &a1d * a1m * c(p.omega1);
    h += &a2d * a2m * c(p.omega2);
    let field = (&a1d + a1m) * c(p.lambda1) + (&a2d + a2m) * c(p.lambda2);
    h += field * sx.matrix();
    h += (&a1d * a2m + &a2d * a1m) * c(p.j);
    symmetrize(&mut h);
    Operator::from_matrix(space, h)
}

/// Dimensionless `(k_eff, Δ)` Hamiltonian; routes through the circuit builder.
pub fn build_scaled_hamiltonian(p: &ScaledParams, space: HilbertSpace) -> Result<Operator> {
    p.validate()?;
    build_circuit_hamiltonian(&p.to_circuit(), space)
}

/// `Σ ω_i a_i†a_i + (s/2)σ_z + Σ ω_i k_i (a_i† + a_i) σ_x`.
pub fn build_jt_hamiltonian(p: &JTParams, space: HilbertSpace) -> Result<Operator> {
    p.validate()?;
    let a1 = annihilation(space, 1)?;
    let a2 = annihilation(space, 2)?;
    let (a1m, a2m) = (a1.matrix(), a2.matrix());
    let (a1d, a2d) = (a1m.adjoint(), a2m.adjoint());
    let sz = pauli(space, PauliAxis::Z);
    let sx = pauli(space, PauliAxis::X);

    let mut h = sz.matrix() * c(p.qubit_splitting / 2.0);
    h += &a1d * a1m * c(p.omega1);
    h += &a2d * a2m * c(p.omega2);
    let field = (&a1d + a1m) * c(p.omega1 * p.k1) + (&a2d + a2m) * c(p.omega2 * p.k2);
    h += field * sx.matrix();
    symmetrize(&mut h);
    Operator::from_matrix(space, h)
}

/// Single privileged-mode Hamiltonian `(s/2)σ_z + ω_eff[α₁†α₁ + k_eff(α₁ + α₁†)σ_x]`.
pub fn build_effective_hamiltonian(
    mode: &EffectiveMode,
    qubit_splitting: f64,
    space: HilbertSpace,
) -> Result<Operator> {
    let a1 = annihilation(space, 1)?;
    let a1m = a1.matrix();
    let a1d = a1m.adjoint();
    let sz = pauli(space, PauliAxis::Z);
    let sx = pauli(space, PauliAxis::X);
    let mut h = sz.matrix() * c(qubit_splitting / 2.0);
    h += &a1d * a1m * c(mode.omega_eff);
    h += (&a1d + a1m) * sx.matrix() * c(mode.omega_eff * mode.k_eff);
    symmetrize(&mut h);
    Operator::from_matrix(space, h)
}

// Products of exactly Hermitian factors can leave ulp-level asymmetry.
fn symmetrize(h: &mut DMatrix<C64>) {
    let n = h.nrows();
    for i in 0..n {
        h[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            h[(i, j)] = avg;
            h[(j, i)] = avg.conj();
        }
    }
}

/// Rotation onto the privileged mode, `A₁₁ : A₁₂ = k₁ : k₂`.
///
/// Both the effective frequencies and `c₂` are normalized by `k_eff²`.
pub fn effective_mode_decomposition(p: &JTParams) -> Result<EffectiveMode> {
    p.validate()?;
    let k_sq = p.k1 * p.k1 + p.k2 * p.k2;
    if k_sq == 0.0 {
        return Err(invalid("k1, k2", "total Jahn-Teller coupling is zero"));
    }
    let k_eff = k_sq.sqrt();
    let (w1, w2) = (p.omega1, p.omega2);
    let (s1, s2) = (p.k1 * p.k1 / k_sq, p.k2 * p.k2 / k_sq);
    let omega_eff = w1 * s1 + w2 * s2;
    let omega_prime = w1 * s2 + w2 * s1;
    let c2 = (w1 - w2) * p.k1 * p.k2 / k_sq;
    let (u, v) = (p.k1 / k_eff, p.k2 / k_eff);
    Ok(EffectiveMode {
        omega_eff,
        k_eff,
        omega_prime,
        c2,
        rotation: [[u, v], [v, -u]],
        moments: [omega_eff, w1 * w1 * s1 + w2 * w2 * s2],
    })
}

/// Circuit parameters that realize the given Jahn-Teller model:
/// `Ω₁ = ω_eff, Ω₂ = ω′, λ₁ = ω_eff·k_eff, λ₂ = c₂·k_eff, J = c₂`.
pub fn jt_to_circuit(p: &JTParams) -> Result<CircuitParams> {
    let m = effective_mode_decomposition(p)?;
    Ok(CircuitParams {
        omega: p.qubit_splitting,
        omega1: m.omega_eff,
        omega2: m.omega_prime,
        lambda1: m.omega_eff * m.k_eff,
        lambda2: m.c2 * m.k_eff,
        j: m.c2,
    })
}

/// Inverse of [`jt_to_circuit`].
///
/// The resonator block `[[Ω₁, J], [J, Ω₂]]` is diagonalized: its eigenvalues
/// are `ω₁, ω₂` and the first components of its eigenvectors give
/// `k_i / k_eff`. The labelling follows the sign of `J` (`ω₁ > ω₂` iff
/// `J > 0`). When `J = λ₂ = 0` and `Ω₁ = Ω₂` the modes are degenerate and the
/// convention `k₁ = k₂` is used; when `Ω₁ ≠ Ω₂` the qubit couples only to
/// mode 1.
pub fn circuit_to_jt(p: &CircuitParams) -> Result<JTParams> {
    p.validate()?;
    if !p.is_consistent() {
        return Err(Error::InconsistentCircuit { residual: p.consistency_residual() });
    }
    if p.lambda1 == 0.0 {
        return Err(invalid("lambda1", "must be > 0 to define k_eff"));
    }
    let k_eff = p.lambda1 / p.omega1;
    let (w_eff, w_prime, c2) = (p.omega1, p.omega2, p.j);

    let (omega1, omega2, s1) = if c2 == 0.0 {
        if w_eff == w_prime {
            (w_eff, w_prime, 0.5)
        } else {
            (w_eff, w_prime, 1.0)
        }
    } else {
        let mean = 0.5 * (w_eff + w_prime);
        let half = 0.5 * (w_eff - w_prime);
        let r = half.hypot(c2);
        // r + half and r - half without cancellation
        let (r_plus, r_minus) = if half >= 0.0 {
            (r + half, c2 * c2 / (r + half))
        } else {
            (c2 * c2 / (r - half), r - half)
        };
        if c2 > 0.0 {
            (mean + r, mean - r, r_plus / (2.0 * r))
        } else {
            (mean - r, mean + r, r_minus / (2.0 * r))
        }
    };
    let s2 = 1.0 - s1;
    let jt = JTParams {
        omega1,
        omega2,
        k1: k_eff * s1.sqrt(),
        k2: k_eff * s2.max(0.0).sqrt(),
        qubit_splitting: p.omega,
    };
    jt.validate()?;
    Ok(jt)
}

/// Frequency ratio `ω₁/ω₂ = (1 + Δ/2)/(1 − Δ/2)` of the simulated modes.
pub fn frequency_ratio(delta: f64) -> Result<f64> {
    if !(delta.is_finite() && delta.abs() < 2.0) {
        return Err(invalid("delta", format!("|delta| must be < 2, got {delta}")));
    }
    Ok((1.0 + delta / 2.0) / (1.0 - delta / 2.0))
}

/// Exact frequency ratio for a rational hopping `J = num/den` (`Δ = 2J`),
/// returned as a reduced fraction `(p, q)` meaning `p:q`.
pub fn frequency_ratio_exact(num: i64, den: i64) -> Result<(i64, i64)> {
    if den <= 0 || num.abs() >= den {
        return Err(invalid("j", format!("need |J| < 1 with positive denominator, got {num}/{den}")));
    }
    let (p, q) = (den + num, den - num);
    let g = gcd(p, q);
    Ok((p / g, q / g))
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

/// Bright qubit-polariton operator `η = α₁ + k_eff σ_x`.
pub fn build_eta(p: &JTParams, space: HilbertSpace) -> Result<Operator> {
    p.validate()?;
    let k_eff = p.k1.hypot(p.k2);
    let a1 = annihilation(space, 1)?;
    a1.sum(&pauli(space, PauliAxis::X).scaled(k_eff))
}

/// All eigenvalues of a Hermitian operator in ascending order.
pub fn eigenvalues(h: &Operator) -> Result<Vec<f64>> {
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let mut values: Vec<f64> = h.matrix().clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// The `m` smallest eigenvalues, ascending.
pub fn lowest_eigenvalues(h: &Operator, m: usize) -> Result<Vec<f64>> {
    if m > h.dim() {
        return Err(Error::TooManyEigenvalues { requested: m, dim: h.dim() });
    }
    let mut values = eigenvalues(h)?;
    values.truncate(m);
    Ok(values)
}

/// `ω_i = 1/√((L_i + L_ci) C_i)` and `J = C_c √(ω₁ω₂ / (4 C₁ C₂))`, in rad/s.
pub fn coupling_from_hardware(h: &HardwareParams) -> Result<HardwareCoupling> {
    for (name, v) in [
        ("l1", h.l1),
        ("l2", h.l2),
        ("lc1", h.lc1),
        ("lc2", h.lc2),
        ("c1", h.c1),
        ("c2", h.c2),
    ] {
        positive(name, v)?;
    }
    // an uncoupled pair (cc = 0) is allowed
    if !(h.cc.is_finite() && h.cc >= 0.0) {
        return Err(invalid("cc", format!("must be finite and >= 0, got {}", h.cc)));
    }
    let omega1 = 1.0 / ((h.l1 + h.lc1) * h.c1).sqrt();
    let omega2 = 1.0 / ((h.l2 + h.lc2) * h.c2).sqrt();
    let j = h.cc * (omega1 * omega2 / (4.0 * h.c1 * h.c2)).sqrt();
    Ok(HardwareCoupling { omega1, omega2, j })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{commutator, make_space};
    use std::f64::consts::SQRT_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn decoupled_circuit_spectrum() {
        let s = make_space(2, 2).unwrap();
        let p = CircuitParams { omega: 1.0, omega1: 1.0, omega2: 1.0, lambda1: 0.0, lambda2: 0.0, j: 0.0 };
        let h = build_circuit_hamiltonian(&p, s).unwrap();
        let ev = eigenvalues(&h).unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5, 1.5, 1.5, 1.5, 2.5];
        for (a, b) in ev.iter().zip(expected) {
            assert!(close(*a, b, 1e-12), "{ev:?}");
        }
    }

    #[test]
    fn weak_coupling_rabi_doublet() {
        let s = make_space(2, 2).unwrap();
        let p = CircuitParams { omega: 1.0, omega1: 1.0, omega2: 1.0, lambda1: 0.05, lambda2: 0.0, j: 0.0 };
        let ev = eigenvalues(&build_circuit_hamiltonian(&p, s).unwrap()).unwrap();
        // ev[1..4] = {0.45, 0.5 (mode 2), 0.55}
        assert!(close(ev[1], 0.45, 3e-3), "{ev:?}");
        assert!(close(ev[2], 0.5, 3e-3));
        assert!(close(ev[3], 0.55, 3e-3));
    }

    #[test]
    fn builders_are_hermitian() {
        let s = make_space(3, 2).unwrap();
        let p = CircuitParams { omega: 0.7, omega1: 1.3, omega2: 0.4, lambda1: 0.9, lambda2: -0.3, j: 0.25 };
        assert_eq!(build_circuit_hamiltonian(&p, s).unwrap().hermiticity_defect(), 0.0);
        let jt = JTParams { omega1: 1.5, omega2: 0.5, k1: 0.3, k2: 0.8, qubit_splitting: 1.0 };
        assert_eq!(build_jt_hamiltonian(&jt, s).unwrap().hermiticity_defect(), 0.0);
    }

    #[test]
    fn scaled_ground_and_rabi_triplet() {
        let s = make_space(2, 2).unwrap();
        let ev = eigenvalues(&build_scaled_hamiltonian(&ScaledParams::new(0.0, 0.0), s).unwrap()).unwrap();
        assert!(close(ev[0], -0.5, 1e-14));

        let ev = eigenvalues(&build_scaled_hamiltonian(&ScaledParams::new(0.1, 0.0), s).unwrap()).unwrap();
        assert!(close(ev[1], 0.4, 5e-3), "{ev:?}");
        assert!(close(ev[2], 0.5, 5e-3));
        assert!(close(ev[3], 0.6, 5e-3));
    }

    #[test]
    fn scaled_equals_circuit_path() {
        let s = make_space(3, 3).unwrap();
        let sp = ScaledParams::new(0.8, 0.6);
        let a = build_scaled_hamiltonian(&sp, s).unwrap();
        let b = build_circuit_hamiltonian(&sp.to_circuit(), s).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn scaled_rejects_large_delta() {
        let s = make_space(2, 2).unwrap();
        assert!(build_scaled_hamiltonian(&ScaledParams::new(0.5, 2.0), s).is_err());
        assert!(build_scaled_hamiltonian(&ScaledParams::new(0.5, -2.5), s).is_err());
        assert!(build_scaled_hamiltonian(&ScaledParams::new(-0.1, 0.0), s).is_err());
    }

    #[test]
    fn jt_decoupled_oscillators() {
        let s = make_space(2, 2).unwrap();
        let p = JTParams::symmetric(1.5, 0.5, 0.0);
        let ev = eigenvalues(&build_jt_hamiltonian(&p, s).unwrap()).unwrap();
        let mut expected = vec![];
        for n1 in 0..2 {
            for n2 in 0..2 {
                for sz in [-0.5, 0.5] {
                    expected.push(n1 as f64 * 1.5 + n2 as f64 * 0.5 + sz);
                }
            }
        }
        expected.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expected) {
            assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn jt_matches_scaled_at_degeneracy() {
        // exact without coupling; with coupling the mode rotation is only
        // unitary on the untruncated space, so the ground energies converge
        // as the Fock boxes grow
        let s = make_space(3, 3).unwrap();
        let jt = build_jt_hamiltonian(&JTParams::symmetric(1.0, 1.0, 0.0), s).unwrap();
        let sc = build_scaled_hamiltonian(&ScaledParams::new(0.0, 0.0), s).unwrap();
        for (a, b) in eigenvalues(&jt).unwrap().iter().zip(eigenvalues(&sc).unwrap()) {
            assert!(close(*a, b, 1e-12));
        }
        let k = 0.4;
        let gap = |d: usize| {
            let s = make_space(d, d).unwrap();
            let jt = build_jt_hamiltonian(&JTParams::symmetric(1.0, 1.0, k), s).unwrap();
            let sc = build_scaled_hamiltonian(&ScaledParams::new(SQRT_2 * k, 0.0), s).unwrap();
            (lowest_eigenvalues(&jt, 1).unwrap()[0] - lowest_eigenvalues(&sc, 1).unwrap()[0]).abs()
        };
        let gaps: Vec<f64> = (2..=6).map(gap).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps[4] < 1e-4, "{gaps:?}");
    }

    #[test]
    fn equal_coupling_specialization() {
        let m = effective_mode_decomposition(&JTParams::symmetric(1.5, 0.5, 1.0)).unwrap();
        assert!(close(m.k_eff, SQRT_2, 1e-15));
        assert!(close(m.omega_eff, 1.0, 1e-15));
        assert!(close(m.omega_prime, 1.0, 1e-15));
        assert!(close(m.c2, 0.5, 1e-15));
        let h = 1.0 / SQRT_2;
        let expected = [[h, h], [h, -h]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(m.rotation[i][j], expected[i][j], 1e-15));
            }
        }
    }

    #[test]
    fn degenerate_modes_have_no_spread() {
        for (k1, k2) in [(1.0, 0.0), (0.3, 2.0), (1.0, 1.0)] {
            let m = effective_mode_decomposition(&JTParams { omega1: 0.8, omega2: 0.8, k1, k2, qubit_splitting: 1.0 })
                .unwrap();
            assert_eq!(m.c2, 0.0);
            assert!(close(m.omega_eff, 0.8, 1e-15));
            assert!(close(m.omega_prime, 0.8, 1e-15));
        }
    }

    #[test]
    fn asymmetric_decomposition() {
        let p = JTParams { omega1: 1.0, omega2: 2.0, k1: 2.0, k2: 1.0, qubit_splitting: 1.0 };
        let m = effective_mode_decomposition(&p).unwrap();
        assert!(close(m.k_eff, 5f64.sqrt(), 1e-15));
        assert!(close(m.omega_eff, 6.0 / 5.0, 1e-15));
        assert!(close(m.omega_prime, 9.0 / 5.0, 1e-15));
        assert!(close(m.c2, -2.0 / 5.0, 1e-15));
        // moments from the weighted distribution directly
        let w = [4.0 / 5.0, 1.0 / 5.0];
        let first = w[0] * 1.0 + w[1] * 2.0;
        let second = w[0] * 1.0 + w[1] * 4.0;
        assert!(close(m.c2 * m.c2, second - first * first, 1e-12));
    }

    #[test]
    fn zero_coupling_is_rejected() {
        assert!(effective_mode_decomposition(&JTParams::symmetric(1.0, 0.5, 0.0)).is_err());
    }

    #[test]
    fn jt_to_circuit_scaled_relations() {
        let (w1, w2, k) = (1.3, 0.7, 0.45);
        let cp = jt_to_circuit(&JTParams::symmetric(w1, w2, k)).unwrap();
        let delta = w1 - w2;
        assert!(close(cp.lambda1, (w1 + w2) * k / SQRT_2, 1e-14));
        assert!(close(cp.lambda2, delta * k / SQRT_2, 1e-14));
        assert!(close(cp.j, delta / 2.0, 1e-14));
        assert!(close(cp.omega1, 1.0, 1e-15));
        assert!(close(cp.omega2, 1.0, 1e-15));
        assert!(close(cp.omega1 * cp.lambda2 - cp.lambda1 * cp.j, 0.0, 1e-15));
    }

    #[test]
    fn degenerate_map() {
        let cp = jt_to_circuit(&JTParams::symmetric(0.9, 0.9, 0.3)).unwrap();
        assert_eq!(cp.j, 0.0);
        assert_eq!(cp.lambda2, 0.0);
        let back = circuit_to_jt(&cp).unwrap();
        assert!(close(back.omega1, 0.9, 1e-15) && close(back.omega2, 0.9, 1e-15));
        assert!(close(back.k1, 0.3, 1e-14) && close(back.k2, 0.3, 1e-14));

        // k = λ₁/(√2 Ω₁) under the k₁ = k₂ convention
        let cp = CircuitParams { omega: 1.0, omega1: 2.0, omega2: 2.0, lambda1: 1.0, lambda2: 0.0, j: 0.0 };
        let jt = circuit_to_jt(&cp).unwrap();
        assert!(close(jt.omega1, 2.0, 0.0) && close(jt.omega2, 2.0, 0.0));
        assert!(close(jt.k1, 0.5 / SQRT_2, 1e-15) && close(jt.k2, jt.k1, 0.0));
    }

    #[test]
    fn round_trip_reference_point() {
        let p = JTParams::symmetric(1.5, 0.5, 1.0);
        let back = circuit_to_jt(&jt_to_circuit(&p).unwrap()).unwrap();
        assert!(close(back.omega1, 1.5, 1e-12));
        assert!(close(back.omega2, 0.5, 1e-12));
        assert!(close(back.k1, 1.0, 1e-12));
        assert!(close(back.k2, 1.0, 1e-12));
    }

    #[test]
    fn round_trip_negative_spread() {
        let p = JTParams { omega1: 0.6, omega2: 1.7, k1: 0.2, k2: 0.9, qubit_splitting: 1.2 };
        let cp = jt_to_circuit(&p).unwrap();
        assert!(cp.j < 0.0 && cp.lambda2 < 0.0);
        let back = circuit_to_jt(&cp).unwrap();
        for (a, b) in [(back.omega1, 0.6), (back.omega2, 1.7), (back.k1, 0.2), (back.k2, 0.9), (back.qubit_splitting, 1.2)] {
            assert!(close(a, b, 1e-12), "{back:?}");
        }
    }

    #[test]
    fn inconsistent_circuit_is_rejected() {
        let cp = CircuitParams { omega: 1.0, omega1: 1.0, omega2: 1.0, lambda1: 1.0, lambda2: 0.25, j: 0.5 };
        match circuit_to_jt(&cp) {
            Err(Error::InconsistentCircuit { residual }) => assert!(close(residual, -1.0, 1e-15)),
            other => panic!("expected rejection, got {other:?}"),
        }
        let cp = CircuitParams { j: 0.1, lambda2: 0.0, ..cp };
        assert!(matches!(circuit_to_jt(&cp), Err(Error::InconsistentCircuit { .. })));
    }

    #[test]
    fn frequency_ratios() {
        assert_eq!(frequency_ratio(1.0).unwrap(), 3.0);
        assert_eq!(frequency_ratio(0.0).unwrap(), 1.0);
        assert!(close(frequency_ratio(2.0 / 3.0).unwrap(), 2.0, 1e-15));
        assert_eq!(frequency_ratio_exact(1, 2).unwrap(), (3, 1));
        assert_eq!(frequency_ratio_exact(1, 3).unwrap(), (2, 1));
        assert_eq!(frequency_ratio_exact(0, 7).unwrap(), (1, 1));
        assert!(frequency_ratio(2.0).is_err());
        assert!(frequency_ratio_exact(3, 2).is_err());
    }

    #[test]
    fn eta_commutation_relations() {
        let s = make_space(4, 2).unwrap();
        let p = JTParams { omega1: 1.4, omega2: 0.6, k1: 0.5, k2: 0.3, qubit_splitting: 1.0 };
        let eta = build_eta(&p, s).unwrap();
        let comm = commutator(&eta, &eta.adjoint()).unwrap();
        let m = effective_mode_decomposition(&p).unwrap();
        let h_eff = build_effective_hamiltonian(&m, p.qubit_splitting, s).unwrap();
        let a1 = annihilation(s, 1).unwrap();
        let lhs = commutator(&h_eff, &a1).unwrap().sum(&eta.scaled(m.omega_eff)).unwrap();
        let interior = |i: usize| s.labels(i).1 < 3;
        for i in (0..s.dim()).filter(|&i| interior(i)) {
            for j in (0..s.dim()).filter(|&j| interior(j)) {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((comm.matrix()[(i, j)] - C64::new(id, 0.0)).norm() < 1e-12);
                assert!(lhs.matrix()[(i, j)].norm() < 1e-12);
            }
        }
    }

    #[test]
    fn eta_without_coupling_is_a1() {
        let s = make_space(3, 2).unwrap();
        let p = JTParams::symmetric(1.0, 1.0, 0.0);
        let eta = build_eta(&p, s).unwrap();
        let a1 = annihilation(s, 1).unwrap();
        assert_eq!(eta.matrix(), a1.matrix());
    }

    #[test]
    fn lowest_eigenvalues_contract() {
        let s = make_space(2, 2).unwrap();
        let ev = lowest_eigenvalues(&build_scaled_hamiltonian(&ScaledParams::new(0.0, 0.0), s).unwrap(), 5).unwrap();
        assert_eq!(ev.len(), 5);
        for (a, b) in ev.iter().zip([-0.5, 0.5, 0.5, 0.5, 1.5]) {
            assert!(close(*a, b, 1e-12));
        }
        let mut m = Operator::zeros(s).into_matrix();
        m[(0, 1)] = C64::new(1.0, 0.0);
        let bad = Operator::from_matrix(s, m).unwrap();
        assert!(matches!(lowest_eigenvalues(&bad, 2), Err(Error::NotHermitian(_))));
        assert!(matches!(lowest_eigenvalues(&Operator::identity(s), 9), Err(Error::TooManyEigenvalues { .. })));
    }

    #[test]
    fn hardware_formulas() {
        let h = HardwareParams { l1: 0.6e-9, l2: 0.6e-9, lc1: 0.4e-9, lc2: 0.4e-9, c1: 1e-12, c2: 1e-12, cc: 0.5e-12 };
        let out = coupling_from_hardware(&h).unwrap();
        assert!(close(out.omega1 / 3.1622776601683795e10, 1.0, 1e-12));
        assert!(close(out.j, h.cc * out.omega1 / (2.0 * h.c1), 1e-3));
        let doubled = coupling_from_hardware(&HardwareParams { cc: 1e-12, ..h }).unwrap();
        assert!(close(doubled.j / out.j, 2.0, 1e-14));
        assert!(coupling_from_hardware(&HardwareParams { c1: 0.0, ..h }).is_err());
        assert!(coupling_from_hardware(&HardwareParams { cc: -1.0, ..h }).is_err());
        assert_eq!(coupling_from_hardware(&HardwareParams { cc: 0.0, ..h }).unwrap().j, 0.0);
    }
}
