//! Lindblad dynamics of the qubit + two resonators: Liouvillian, steady
//! state, propagation, two-time correlation and the emission spectrum of
//! mode 1.
//!
//! Superoperators act on column-stacked density matrices:
//! `vec(ρ)[c·N + r] = ρ[r, c]`, so `vec(A X B) = (Bᵀ ⊗ A) vec(X)`. This is
//! nalgebra's native storage order.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::operators::{annihilation, hermiticity_defect, kron, pauli, CMatrix, HilbertSpace, Operator, PauliAxis, C64};

pub type CVector = DVector<C64>;

pub const DENSITY_HERMITIAN_TOL: f64 = 1e-10;
pub const DENSITY_TRACE_TOL: f64 = 1e-10;
pub const DENSITY_PSD_TOL: f64 = 1e-8;
pub const STEADY_STATE_RESIDUAL_TOL: f64 = 1e-10;

/// Eigenvalues of the Liouvillian with modulus below this count as kernel.
pub const KERNEL_TOL: f64 = 1e-9;

/// Rate assigned to the stationary direction when it is deflated out of the
/// resolvent.
const DEFLATION_RATE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DissipationParams {
    /// Cavity loss rate, shared by both resonators.
    pub kappa: f64,
    /// Qubit relaxation rate.
    pub gamma: f64,
    /// Qubit dephasing rate.
    pub gamma_phi: f64,
    /// Mean thermal photon number of the cavity baths.
    pub n_th: f64,
}

impl Default for DissipationParams {
    fn default() -> Self {
        Self { kappa: 0.001, gamma: 0.001, gamma_phi: 0.01, n_th: 0.1 }
    }
}

impl DissipationParams {
    pub fn closed() -> Self {
        Self { kappa: 0.0, gamma: 0.0, gamma_phi: 0.0, n_th: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("gamma_phi", self.gamma_phi),
            ("n_th", self.n_th),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let n = space.dim();
        if matrix.shape() != (n, n) {
            return Err(Error::ShapeMismatch { expected: n, rows: matrix.nrows(), cols: matrix.ncols() });
        }
        let defect = hermiticity_defect(&matrix);
        if defect > DENSITY_HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (defect {defect:e})")));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > DENSITY_TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let rho = Self { space, matrix };
        let min = rho.min_eigenvalue();
        if min < -DENSITY_PSD_TOL {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) state vector.
    pub fn pure(space: HilbertSpace, psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if psi.len() != space.dim() || norm == 0.0 {
            return Err(Error::InvalidDensityMatrix("state vector has wrong length or zero norm".into()));
        }
        let psi = psi / C64::new(norm, 0.0);
        Ok(Self { space, matrix: &psi * psi.adjoint() })
    }

    /// Qubit in its lower level, both resonators in vacuum.
    pub fn ground(space: HilbertSpace) -> Self {
        let n = space.dim();
        let mut m = CMatrix::zeros(n, n);
        let g = space.index(1, 0, 0);
        m[(g, g)] = C64::new(1.0, 0.0);
        Self { space, matrix: m }
    }

    pub fn maximally_mixed(space: HilbertSpace) -> Self {
        let n = space.dim();
        Self { space, matrix: CMatrix::identity(n, n) / C64::new(n as f64, 0.0) }
    }

    pub(crate) fn from_raw(space: HilbertSpace, mut matrix: CMatrix) -> Self {
        hermitize(&mut matrix);
        Self { space, matrix }
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `Tr[X ρ]`.
    pub fn expectation(&self, op: &Operator) -> C64 {
        op.trace_with(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}

fn hermitize(m: &mut CMatrix) {
    let h = (&*m + m.adjoint()) * C64::new(0.5, 0.0);
    *m = h;
}

pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVector, n: usize) -> CMatrix {
    CMatrix::from_column_slice(n, n, v.as_slice())
}

/// Dense superoperator acting on column-stacked density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl Liouvillian {
    pub fn from_matrix(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let n = space.dim() * space.dim();
        if matrix.shape() != (n, n) {
            return Err(Error::ShapeMismatch { expected: n, rows: matrix.nrows(), cols: matrix.ncols() });
        }
        Ok(Self { space, matrix })
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `L(ρ)` for an arbitrary N×N matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let n = self.space.dim();
        unvectorize(&(&self.matrix * vectorize(rho)), n)
    }

    /// Full spectrum via a complex Schur decomposition.
    pub fn eigenvalues(&self) -> Vec<C64> {
        nalgebra::Schur::new(self.matrix.clone())
            .eigenvalues()
            .map(|v| v.iter().copied().collect())
            .unwrap_or_default()
    }

    /// Number of singular values below `rel_tol · σ_max`.
    pub fn kernel_dimension(&self, rel_tol: f64) -> usize {
        let sv = self.matrix.clone().singular_values();
        let max = sv.iter().copied().fold(0.0, f64::max);
        sv.iter().filter(|&&s| s <= rel_tol * max).count()
    }
}

/// `L ρ L† − ½{L†L, ρ}`.
pub fn dissipator(lop: &Operator, rho: &CMatrix) -> Result<CMatrix> {
    let n = lop.dim();
    if rho.shape() != (n, n) {
        return Err(Error::ShapeMismatch { expected: n, rows: rho.nrows(), cols: rho.ncols() });
    }
    let l = lop.matrix();
    let ld = l.adjoint();
    let ldl = &ld * l;
    let half = C64::new(0.5, 0.0);
    Ok(l * rho * &ld - (&ldl * rho + rho * &ldl) * half)
}

fn left_super(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    kron(&CMatrix::identity(n, n), a)
}

fn right_super(b: &CMatrix) -> CMatrix {
    let n = b.nrows();
    kron(&b.transpose(), &CMatrix::identity(n, n))
}

fn add_dissipator(super_op: &mut CMatrix, c: &CMatrix, rate: f64) {
    if rate == 0.0 {
        return;
    }
    let cdc = c.adjoint() * c;
    let r = C64::new(rate, 0.0);
    *super_op += (kron(&c.conjugate(), c) - (left_super(&cdc) + right_super(&cdc)) * C64::new(0.5, 0.0)) * r;
}

/// `ρ ↦ −i[H, ρ] + Σ_j (1+n_th)κ D[α_j]ρ + n_th κ D[α_j†]ρ + γ D[σ₋]ρ + (γ_φ/2) D[σ_z]ρ`.
pub fn build_liouvillian(h: &Operator, d: &DissipationParams) -> Result<Liouvillian> {
    d.validate()?;
    let defect = h.hermiticity_defect();
    if defect > crate::model::HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let space = h.space();
    let hm = h.matrix();
    let mut l = (left_super(hm) - right_super(hm)) * C64::new(0.0, -1.0);
    for mode in 1..=2 {
        let a = annihilation(space, mode)?;
        add_dissipator(&mut l, a.matrix(), (1.0 + d.n_th) * d.kappa);
        add_dissipator(&mut l, &a.matrix().adjoint(), d.n_th * d.kappa);
    }
    add_dissipator(&mut l, pauli(space, PauliAxis::Minus).matrix(), d.gamma);
    add_dissipator(&mut l, pauli(space, PauliAxis::Z).matrix(), d.gamma_phi / 2.0);
    Liouvillian::from_matrix(space, l)
}

fn trace_row_indices(n: usize) -> impl Iterator<Item = usize> {
    (0..n).map(move |i| i * n + i)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Unique stationary state: solves `L ρ = 0` with the first equation
/// replaced by `Tr ρ = 1`.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let space = l.space();
    let n = space.dim();
    let mut m = l.matrix().clone();
    m.row_mut(0).fill(C64::new(0.0, 0.0));
    for k in trace_row_indices(n) {
        m[(0, k)] = C64::new(1.0, 0.0);
    }
    let mut rhs = CVector::zeros(n * n);
    rhs[0] = C64::new(1.0, 0.0);

    let kernel_error = || {
        let dim = l.kernel_dimension(KERNEL_TOL);
        (dim != 1).then_some(Error::KernelMultiplicity(dim))
    };

    let x = match m.lu().solve(&rhs) {
        Some(x) => x,
        None => return Err(kernel_error().unwrap_or(Error::SteadyStateResidual(f64::INFINITY))),
    };
    let mut rho = unvectorize(&x, n);
    hermitize(&mut rho);
    let tr = rho.trace();
    rho /= tr;

    let scale = max_abs(l.matrix()).max(1.0);
    let residual = max_abs(&l.apply(&rho)) / scale;
    let state = DensityMatrix { space, matrix: rho };
    if !residual.is_finite() || residual > STEADY_STATE_RESIDUAL_TOL || state.min_eigenvalue() < -DENSITY_PSD_TOL {
        return Err(kernel_error().unwrap_or(Error::SteadyStateResidual(residual)));
    }
    Ok(state)
}

/// Fixed-step propagator `exp(L·dt)`.
#[derive(Debug, Clone)]
pub struct Propagator {
    step: CMatrix,
    dt: f64,
}

impl Propagator {
    pub fn new(l: &Liouvillian, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(Error::NegativeTime(dt));
        }
        let step = (l.matrix() * C64::new(dt, 0.0)).exp();
        Ok(Self { step, dt })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances a vectorized state by one step, writing into `out`.
    pub fn step_into(&self, x: &CVector, out: &mut CVector) {
        out.gemv(C64::new(1.0, 0.0), &self.step, x, C64::new(0.0, 0.0));
    }
}

/// `ρ(t) = exp(L t) ρ₀`.
pub fn evolve(l: &Liouvillian, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let n = l.space().dim();
    let prop = (l.matrix() * C64::new(t, 0.0)).exp();
    let x = prop * vectorize(rho0.matrix());
    Ok(DensityMatrix::from_raw(l.space(), unvectorize(&x, n)))
}

/// `Tr[B · exp(L t)(A ρ)]` for each time (quantum regression).
pub fn two_time_correlation(
    l: &Liouvillian,
    rho: &DensityMatrix,
    a: &Operator,
    b: &Operator,
    times: &[f64],
) -> Result<Vec<C64>> {
    if let Some(&t) = times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(Error::NegativeTime(t));
    }
    // ⟨⟨B†|x⟩⟩ = Tr[B X]
    let b_vec = vectorize(&b.matrix().adjoint());
    let seed = vectorize(&(a.matrix() * rho.matrix()));

    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&i, &j| times[i].total_cmp(&times[j]));

    let mut out = vec![C64::new(0.0, 0.0); times.len()];
    let mut x = seed;
    let mut now = 0.0;
    let mut cached: Option<(f64, CMatrix)> = None;
    for idx in order {
        let gap = times[idx] - now;
        if gap > 0.0 {
            let reuse = matches!(&cached, Some((g, _)) if (g - gap).abs() <= 1e-12 * gap);
            if !reuse {
                cached = Some((gap, (l.matrix() * C64::new(gap, 0.0)).exp()));
            }
            let step = &cached.as_ref().expect("propagator cached above").1;
            x = step * x;
            now = times[idx];
        }
        out[idx] = b_vec.dotc(&x);
    }
    Ok(out)
}

/// `C(t) = ⟨α₁†(t) α₁(0)⟩ = Tr[α₁† exp(L t)(α₁ ρ_ss)]`.
pub fn correlation(l: &Liouvillian, rho_ss: &DensityMatrix, times: &[f64]) -> Result<Vec<C64>> {
    let a1 = annihilation(l.space(), 1)?;
    two_time_correlation(l, rho_ss, &a1, &a1.adjoint(), times)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    Resolvent,
    TimeDomain,
}

/// `P(ω) = 2 Re ∫₀^∞ C(t) e^{−iωt} dt` sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    pub method: SpectrumMethod,
}

impl Spectrum {
    /// Index and value of the largest sample.
    pub fn max(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Seed `α₁ρ_ss` with its stationary component removed, so that the
/// correlation decays to zero.
fn spectrum_seed(rho_ss: &DensityMatrix, a1: &Operator) -> CVector {
    let mean = rho_ss.expectation(a1);
    vectorize(&(a1.matrix() * rho_ss.matrix() - rho_ss.matrix() * mean))
}

/// Resolvent evaluation of the emission spectrum.
///
/// The stationary direction is deflated (`L̃ = L − r·|ρ_ss⟩⟨⟨I|`) so that
/// `L̃ − iω` is invertible for every real ω, and `L̃` is reduced once to
/// upper Hessenberg form `Q H Q†`. Each frequency then costs one O(n²)
/// Hessenberg solve.
#[derive(Debug, Clone)]
pub struct ResolventSpectrum {
    hessenberg: CMatrix,
    // Q† vec(α₁) and Q† seed
    probe: CVector,
    seed: CVector,
}

impl ResolventSpectrum {
    pub fn new(l: &Liouvillian, rho_ss: &DensityMatrix) -> Result<Self> {
        let space = l.space();
        if rho_ss.space() != space {
            return Err(Error::SpaceMismatch(space, rho_ss.space()));
        }
        let n = space.dim();
        let a1 = annihilation(space, 1)?;
        let seed = spectrum_seed(rho_ss, &a1);

        let mut deflated = l.matrix().clone();
        let stationary = vectorize(rho_ss.matrix());
        let r = C64::new(DEFLATION_RATE, 0.0);
        for k in trace_row_indices(n) {
            for i in 0..n * n {
                deflated[(i, k)] -= r * stationary[i];
            }
        }
        let (q, h) = nalgebra::linalg::Hessenberg::new(deflated).unpack();
        let qa = q.adjoint();
        Ok(Self { probe: &qa * vectorize(a1.matrix()), seed: &qa * seed, hessenberg: h })
    }

    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        let y = hessenberg_solve(&self.hessenberg, C64::new(0.0, omega), &self.seed)
            .ok_or(Error::SingularResolvent(omega))?;
        Ok(-2.0 * self.probe.dotc(&y).re)
    }

    pub fn spectrum(&self, omegas: &[f64]) -> Result<Spectrum> {
        let values = omegas.par_iter().map(|&w| self.evaluate(w)).collect::<Result<Vec<_>>>()?;
        Ok(Spectrum { omegas: omegas.to_vec(), values, method: SpectrumMethod::Resolvent })
    }
}

/// Solves `(H − s·I) y = b` for upper Hessenberg `H` by Gaussian elimination
/// with adjacent-row pivoting. `None` if a pivot vanishes.
fn hessenberg_solve(h: &CMatrix, shift: C64, b: &CVector) -> Option<CVector> {
    let n = h.nrows();
    let mut a = h.clone();
    for i in 0..n {
        a[(i, i)] -= shift;
    }
    let mut y = b.clone();
    let scale = max_abs(&a).max(f64::MIN_POSITIVE);
    let tiny = scale * f64::EPSILON * n as f64;

    for k in 0..n.saturating_sub(1) {
        if a[(k + 1, k)].norm() > a[(k, k)].norm() {
            a.swap_rows(k, k + 1);
            y.swap_rows(k, k + 1);
        }
        let pivot = a[(k, k)];
        if pivot.norm() <= tiny {
            return None;
        }
        let m = a[(k + 1, k)] / pivot;
        if m != C64::new(0.0, 0.0) {
            a[(k + 1, k)] = C64::new(0.0, 0.0);
            for j in (k + 1)..n {
                let v = a[(k, j)];
                a[(k + 1, j)] -= m * v;
            }
            let v = y[k];
            y[k + 1] -= m * v;
        }
    }
    for k in (0..n).rev() {
        let pivot = a[(k, k)];
        if pivot.norm() <= tiny {
            return None;
        }
        let mut acc = y[k];
        for j in (k + 1)..n {
            acc -= a[(k, j)] * y[j];
        }
        y[k] = acc / pivot;
    }
    Some(y)
}

/// Emission spectrum of mode 1 by the resolvent method.
pub fn emission_spectrum(l: &Liouvillian, rho_ss: &DensityMatrix, omegas: &[f64]) -> Result<Spectrum> {
    ResolventSpectrum::new(l, rho_ss)?.spectrum(omegas)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDomainOptions {
    /// Propagation step.
    pub dt: f64,
    /// Stop once the propagated seed has shrunk by this factor.
    pub decay_tolerance: f64,
    pub max_time: f64,
}

impl Default for TimeDomainOptions {
    fn default() -> Self {
        Self { dt: 0.05, decay_tolerance: 1e-8, max_time: 2e5 }
    }
}

/// Emission spectrum by explicit propagation of the regression seed and
/// composite Simpson quadrature of `C(t) e^{−iωt}`. Independent of the
/// resolvent path; intended as a cross-check.
pub fn emission_spectrum_time_domain(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    omegas: &[f64],
    opts: &TimeDomainOptions,
) -> Result<Spectrum> {
    let space = l.space();
    let a1 = annihilation(space, 1)?;
    let probe = vectorize(a1.matrix());
    let prop = Propagator::new(l, opts.dt)?;

    let mut x = spectrum_seed(rho_ss, &a1);
    let mut scratch = x.clone();
    let start_norm = x.norm();
    let max_steps = (opts.max_time / opts.dt).ceil() as usize;
    let mut samples = vec![probe.dotc(&x)];
    loop {
        prop.step_into(&x, &mut scratch);
        std::mem::swap(&mut x, &mut scratch);
        samples.push(probe.dotc(&x));
        let intervals = samples.len() - 1;
        if intervals % 2 == 0 && (intervals >= max_steps || x.norm() <= opts.decay_tolerance * start_norm) {
            break;
        }
    }

    let dt = opts.dt;
    let last = samples.len() - 1;
    let values = omegas
        .par_iter()
        .map(|&w| {
            let rot = C64::from_polar(1.0, -w * dt);
            let mut phase = C64::new(1.0, 0.0);
            let mut acc = C64::new(0.0, 0.0);
            for (k, c) in samples.iter().enumerate() {
                if k % 1024 == 0 {
                    phase = C64::from_polar(1.0, -w * dt * k as f64);
                }
                let weight = if k == 0 || k == last {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += c * phase * weight;
                phase *= rot;
            }
            2.0 * (acc * (dt / 3.0)).re
        })
        .collect();
    Ok(Spectrum { omegas: omegas.to_vec(), values, method: SpectrumMethod::TimeDomain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_scaled_hamiltonian, eigenvalues, ScaledParams};
    use crate::operators::{make_space, number};

    fn mode_block_space() -> HilbertSpace {
        make_space(2, 2).unwrap()
    }

    fn default_liouvillian(k_eff: f64, delta: f64, dims: (usize, usize)) -> Liouvillian {
        let s = make_space(dims.0, dims.1).unwrap();
        let h = build_scaled_hamiltonian(&ScaledParams::new(k_eff, delta), s).unwrap();
        build_liouvillian(&h, &DissipationParams::default()).unwrap()
    }

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        // small LCG; tests only need reproducible non-structured entries
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        CMatrix::from_fn(n, n, |_, _| C64::new(next(), next()))
    }

    fn random_density(space: HilbertSpace, seed: u64) -> DensityMatrix {
        let g = random_matrix(space.dim(), seed);
        let mut rho = &g * g.adjoint();
        let tr = rho.trace();
        rho /= tr;
        DensityMatrix::new(space, rho).unwrap()
    }

    #[test]
    fn single_photon_decay() {
        let s = mode_block_space();
        let a = annihilation(s, 1).unwrap();
        let one = s.index(1, 1, 0);
        let zero = s.index(1, 0, 0);
        let mut rho = CMatrix::zeros(8, 8);
        rho[(one, one)] = C64::new(1.0, 0.0);
        let out = dissipator(&a, &rho).unwrap();
        let mut expected = CMatrix::zeros(8, 8);
        expected[(zero, zero)] = C64::new(1.0, 0.0);
        expected[(one, one)] = C64::new(-1.0, 0.0);
        assert!(max_abs(&(out - expected)) < 1e-15);
    }

    #[test]
    fn dephasing_has_no_diagonal_action() {
        let s = mode_block_space();
        let sz = pauli(s, PauliAxis::Z);
        let rho = random_matrix(8, 3);
        let out = dissipator(&sz, &rho).unwrap();
        for i in 0..8 {
            assert!(out[(i, i)].norm() < 1e-15);
        }
    }

    #[test]
    fn dissipator_is_traceless() {
        let s = mode_block_space();
        for seed in 0..5 {
            let x = Operator::from_matrix(s, random_matrix(8, seed)).unwrap();
            let rho = random_matrix(8, seed + 100);
            assert!(dissipator(&x, &rho).unwrap().trace().norm() < 1e-13);
        }
        assert!(dissipator(&pauli(s, PauliAxis::X), &CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn superoperator_matches_direct_action() {
        let s = mode_block_space();
        let h = build_scaled_hamiltonian(&ScaledParams::new(0.7, 0.4), s).unwrap();
        let d = DissipationParams { kappa: 0.03, gamma: 0.02, gamma_phi: 0.05, n_th: 0.3 };
        let l = build_liouvillian(&h, &d).unwrap();
        let rho = random_matrix(8, 9);
        let mut direct = (h.matrix() * &rho - &rho * h.matrix()) * C64::new(0.0, -1.0);
        for mode in 1..=2 {
            let a = annihilation(s, mode).unwrap();
            direct += dissipator(&a, &rho).unwrap() * C64::new((1.0 + d.n_th) * d.kappa, 0.0);
            direct += dissipator(&a.adjoint(), &rho).unwrap() * C64::new(d.n_th * d.kappa, 0.0);
        }
        direct += dissipator(&pauli(s, PauliAxis::Minus), &rho).unwrap() * C64::new(d.gamma, 0.0);
        direct += dissipator(&pauli(s, PauliAxis::Z), &rho).unwrap() * C64::new(d.gamma_phi / 2.0, 0.0);
        assert!(max_abs(&(l.apply(&rho) - direct)) < 1e-13);
    }

    #[test]
    fn closed_system_spectrum() {
        let s = mode_block_space();
        let h = build_scaled_hamiltonian(&ScaledParams::new(0.5, 0.3), s).unwrap();
        let l = build_liouvillian(&h, &DissipationParams::closed()).unwrap();
        let energies = eigenvalues(&h).unwrap();
        let mut expected: Vec<f64> = energies
            .iter()
            .flat_map(|em| energies.iter().map(move |en| em - en))
            .collect();
        let mut got: Vec<f64> = l.eigenvalues().iter().map(|z| {
            assert!(z.re.abs() < 1e-10);
            z.im
        }).collect();
        expected.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn trace_and_hermiticity_preservation() {
        let l = default_liouvillian(1.0, 1.0, (2, 2));
        let s = l.space();
        for seed in 0..10 {
            let rho = random_density(s, seed);
            let out = l.apply(rho.matrix());
            assert!(out.trace().norm() < 1e-10);
            let x = random_matrix(8, seed + 50);
            let lhs = l.apply(&x.adjoint());
            let rhs = l.apply(&x).adjoint();
            assert!(max_abs(&(lhs - rhs)) < 1e-10);
        }
    }

    #[test]
    fn non_hermitian_hamiltonian_rejected() {
        let s = mode_block_space();
        let a = annihilation(s, 1).unwrap();
        assert!(matches!(build_liouvillian(&a, &DissipationParams::default()), Err(Error::NotHermitian(_))));
        let h = Operator::identity(s);
        let bad = DissipationParams { kappa: -1.0, ..Default::default() };
        assert!(build_liouvillian(&h, &bad).is_err());
    }

    #[test]
    fn thermal_steady_state_truncated() {
        // independent cavities in thermal baths, qubit relaxing at zero temperature
        for d in [2usize, 3] {
            let l = default_liouvillian(0.0, 0.0, (d, d));
            let rho = steady_state(&l).unwrap();
            let s = l.space();
            // detailed balance of the truncated ladder: p_n ∝ (n/(1+n))^n
            let r: f64 = 0.1 / 1.1;
            let z: f64 = (0..d).map(|n| r.powi(n as i32)).sum();
            let mean: f64 = (0..d).map(|n| n as f64 * r.powi(n as i32)).sum::<f64>() / z;
            for mode in 1..=2 {
                let n = rho.expectation(&number(s, mode).unwrap());
                assert!((n.re - mean).abs() < 1e-10, "d={d}: {n} vs {mean}");
            }
            let excited = rho.expectation(&pauli(s, PauliAxis::Z)).re;
            assert!((excited + 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_temperature_fixed_point() {
        let s = mode_block_space();
        let h = build_scaled_hamiltonian(&ScaledParams::new(0.0, 0.0), s).unwrap();
        let d = DissipationParams { n_th: 0.0, ..Default::default() };
        let rho = steady_state(&build_liouvillian(&h, &d).unwrap()).unwrap();
        assert!(rho.frobenius_distance(&DensityMatrix::ground(s)) < 1e-10);
    }

    #[test]
    fn steady_state_invariants_at_reference_point() {
        let l = default_liouvillian(1.0, 1.0, (2, 2));
        let rho = steady_state(&l).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-10);
        assert!(rho.min_eigenvalue() >= -1e-8);
        assert!(max_abs(&l.apply(rho.matrix())) <= 1e-10);
        // parity symmetry forces ⟨α₁⟩ = 0
        let a1 = annihilation(l.space(), 1).unwrap();
        assert!(rho.expectation(&a1).norm() < 1e-10);
    }

    #[test]
    fn degenerate_kernel_is_reported() {
        let s = mode_block_space();
        let h = build_scaled_hamiltonian(&ScaledParams::new(0.0, 0.0), s).unwrap();
        let l = build_liouvillian(&h, &DissipationParams::closed()).unwrap();
        match steady_state(&l) {
            Err(Error::KernelMultiplicity(k)) => assert!(k > 1),
            other => panic!("expected kernel multiplicity error, got {other:?}"),
        }
    }

    #[test]
    fn evolve_basics() {
        let l = default_liouvillian(0.8, 0.5, (2, 2));
        let rho0 = DensityMatrix::ground(l.space());
        assert_eq!(evolve(&l, &rho0, 0.0).unwrap(), rho0);
        assert!(matches!(evolve(&l, &rho0, -1.0), Err(Error::NegativeTime(_))));
        let later = evolve(&l, &rho0, 37.0).unwrap();
        assert!((later.trace().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn eigenprojector_is_stationary_without_dissipation() {
        let s = mode_block_space();
        let h = build_scaled_hamiltonian(&ScaledParams::new(0.6, 0.8), s).unwrap();
        let l = build_liouvillian(&h, &DissipationParams::closed()).unwrap();
        let eig = h.matrix().clone().symmetric_eigen();
        let psi = eig.eigenvectors.column(3).into_owned();
        let rho0 = DensityMatrix::pure(s, &psi).unwrap();
        for t in [0.5, 10.0, 250.0] {
            assert!(evolve(&l, &rho0, t).unwrap().frobenius_distance(&rho0) < 1e-9);
        }
    }

    #[test]
    fn long_time_limit_is_steady_state() {
        let l = default_liouvillian(1.0, 1.0, (2, 2));
        let ss = steady_state(&l).unwrap();
        let rho0 = random_density(l.space(), 42);
        let late = evolve(&l, &rho0, 1e5).unwrap();
        assert!(late.frobenius_distance(&ss) < 1e-6);
    }

    #[test]
    fn correlation_at_zero_is_photon_number() {
        let l = default_liouvillian(1.0, 1.0, (2, 2));
        let ss = steady_state(&l).unwrap();
        let c0 = correlation(&l, &ss, &[0.0]).unwrap()[0];
        let n1 = ss.expectation(&number(l.space(), 1).unwrap());
        assert!((c0 - n1).norm() < 1e-14);
        assert!(correlation(&l, &ss, &[1.0, -0.1]).is_err());
    }

    #[test]
    fn correlation_of_free_thermal_cavity() {
        // two-level truncation: coherence decays at κ(1+2n)/2 and rotates at ω = 1
        let l = default_liouvillian(0.0, 0.0, (2, 2));
        let ss = steady_state(&l).unwrap();
        let d = DissipationParams::default();
        let rate = d.kappa * (1.0 + 2.0 * d.n_th) / 2.0;
        let n0 = d.n_th / (1.0 + 2.0 * d.n_th);
        let times = [0.0, 1.0, 10.0, 250.0, 1000.0, 3000.0];
        let c = correlation(&l, &ss, &times).unwrap();
        for (t, v) in times.iter().zip(&c) {
            let expected = C64::from_polar(n0 * (-rate * t).exp(), *t);
            assert!((v - expected).norm() < 1e-9, "t={t}: {v} vs {expected}");
        }
        // cross-check against explicit propagation of the seed
        let a1 = annihilation(l.space(), 1).unwrap();
        let seed = a1.matrix() * ss.matrix();
        let x = (l.matrix() * C64::new(10.0, 0.0)).exp() * vectorize(&seed);
        let direct = a1.adjoint().trace_with(&unvectorize(&x, 8));
        assert!((direct - c[2]).norm() < 1e-12);
    }

    #[test]
    fn correlation_decays_at_reference_point() {
        let l = default_liouvillian(1.0, 1.0, (2, 2));
        let ss = steady_state(&l).unwrap();
        let c = correlation(&l, &ss, &[0.0, 5e4]).unwrap();
        assert!(c[1].norm() < 1e-6 * c[0].norm());
    }

    #[test]
    fn hessenberg_solver_matches_lu() {
        let a = random_matrix(12, 7);
        let (_, h) = nalgebra::linalg::Hessenberg::new(a).unpack();
        let b = CVector::from_fn(12, |i, _| C64::new(i as f64, 1.0));
        let shift = C64::new(0.1, 0.3);
        let y = hessenberg_solve(&h, shift, &b).unwrap();
        let mut shifted = h.clone();
        for i in 0..12 {
            shifted[(i, i)] -= shift;
        }
        assert!((shifted * y - b).norm() < 1e-10);
        assert!(hessenberg_solve(&CMatrix::zeros(3, 3), C64::new(0.0, 0.0), &CVector::zeros(3)).is_none());
    }

    #[test]
    fn free_cavity_lorentzian() {
        let l = default_liouvillian(0.0, 0.0, (2, 2));
        let ss = steady_state(&l).unwrap();
        let solver = ResolventSpectrum::new(&l, &ss).unwrap();
        let d = DissipationParams::default();
        let hw = d.kappa * (1.0 + 2.0 * d.n_th) / 2.0;
        let n0 = d.n_th / (1.0 + 2.0 * d.n_th);
        for w in [0.0, 0.9, 0.999, 1.0, 1.0004, 1.3, 2.0] {
            let expected = 2.0 * n0 * hw / (hw * hw + (w - 1.0) * (w - 1.0));
            let got = solver.evaluate(w).unwrap();
            assert!((got - expected).abs() < 1e-8 * expected.max(1.0), "w={w}: {got} vs {expected}");
        }
    }

    #[test]
    fn undamped_photons_give_degenerate_kernel() {
        let s = mode_block_space();
        let h = build_scaled_hamiltonian(&ScaledParams::new(0.0, 0.0), s).unwrap();
        let l = build_liouvillian(&h, &DissipationParams { kappa: 0.0, gamma: 0.01, gamma_phi: 0.0, n_th: 0.0 })
            .unwrap();
        let ss = steady_state(&l);
        // the photon sector is undamped, so the kernel is degenerate
        assert!(matches!(ss, Err(Error::KernelMultiplicity(_))));
    }
}
