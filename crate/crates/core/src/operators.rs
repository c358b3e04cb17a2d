//! Operator algebra on the composite qubit ⊗ mode 1 ⊗ mode 2 space.
//!
//! Basis ordering is qubit-major, then mode 1, then mode 2:
//!
//! ```text
//! index = ((q * d1) + n1) * d2 + n2
//! ```
//!
//! Qubit index `q = 0` is the upper level (σ_z = +1) and `q = 1` the lower
//! level (σ_z = −1), so the Pauli matrices take their textbook form. Each mode
//! is truncated to occupations `0..d`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dimensions of the qubit ⊗ mode 1 ⊗ mode 2 space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    mode_dims: [usize; 2],
}

impl HilbertSpace {
    pub const QUBIT_DIM: usize = 2;

    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        if d1 < 2 || d2 < 2 {
            return Err(Error::InvalidDims { d1, d2 });
        }
        Ok(Self { mode_dims: [d1, d2] })
    }

    pub fn qubit_dim(&self) -> usize {
        Self::QUBIT_DIM
    }

    pub fn mode_dims(&self) -> [usize; 2] {
        self.mode_dims
    }

    /// Total dimension `2 · d1 · d2`.
    pub fn dim(&self) -> usize {
        Self::QUBIT_DIM * self.mode_dims[0] * self.mode_dims[1]
    }

    pub fn index(&self, q: usize, n1: usize, n2: usize) -> usize {
        let [d1, d2] = self.mode_dims;
        debug_assert!(q < 2 && n1 < d1 && n2 < d2);
        (q * d1 + n1) * d2 + n2
    }

    /// Inverse of [`HilbertSpace::index`]: `(q, n1, n2)`.
    pub fn labels(&self, index: usize) -> (usize, usize, usize) {
        let [d1, d2] = self.mode_dims;
        let n2 = index % d2;
        let rest = index / d2;
        (rest / d1, rest % d1, n2)
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2x{}x{}", self.mode_dims[0], self.mode_dims[1])
    }
}

pub fn make_space(d1: usize, d2: usize) -> Result<HilbertSpace> {
    HilbertSpace::new(d1, d2)
}

/// Dense complex operator tagged with the space it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl Operator {
    pub fn from_matrix(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: HilbertSpace) -> Self {
        let n = space.dim();
        Self { space, matrix: CMatrix::identity(n, n) }
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        let n = space.dim();
        Self { space, matrix: CMatrix::zeros(n, n) }
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space, matrix: self.matrix.adjoint() }
    }

    pub fn scaled(&self, factor: impl Into<C64>) -> Self {
        Self { space: self.space, matrix: &self.matrix * factor.into() }
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(self.space, other.space));
        }
        Ok(())
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self { space: self.space, matrix: &self.matrix * &other.matrix })
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self { space: self.space, matrix: &self.matrix + &other.matrix })
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self { space: self.space, matrix: &self.matrix - &other.matrix })
    }

    /// Largest entry of `|X − X†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Expectation value `Tr[X ρ]` for a matrix on the same space.
    pub fn trace_with(&self, rho: &CMatrix) -> C64 {
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.matrix[(i, k)] * rho[(k, i)];
            }
        }
        acc
    }
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for j in 0..ac {
        for i in 0..ar {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for l in 0..bc {
                for k in 0..br {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

fn embed(space: HilbertSpace, qubit: &CMatrix, mode1: &CMatrix, mode2: &CMatrix) -> Operator {
    let matrix = kron(&kron(qubit, mode1), mode2);
    Operator { space, matrix }
}

/// Truncated lowering operator on a single mode of dimension `d`.
pub fn lowering_block(d: usize) -> CMatrix {
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Annihilation operator of `mode` (1 or 2) embedded in the full space.
pub fn annihilation(space: HilbertSpace, mode: usize) -> Result<Operator> {
    let [d1, d2] = space.mode_dims();
    let q = CMatrix::identity(2, 2);
    match mode {
        1 => Ok(embed(space, &q, &lowering_block(d1), &CMatrix::identity(d2, d2))),
        2 => Ok(embed(space, &q, &CMatrix::identity(d1, d1), &lowering_block(d2))),
        other => Err(Error::InvalidMode(other)),
    }
}

pub fn creation(space: HilbertSpace, mode: usize) -> Result<Operator> {
    annihilation(space, mode).map(|a| a.adjoint())
}

/// `a†a` for the chosen mode.
pub fn number(space: HilbertSpace, mode: usize) -> Result<Operator> {
    let a = annihilation(space, mode)?;
    a.adjoint().product(&a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

impl PauliAxis {
    fn block(self) -> CMatrix {
        let i = C64::new(0.0, 1.0);
        let entries = match self {
            PauliAxis::X => [ZERO, ONE, ONE, ZERO],
            PauliAxis::Y => [ZERO, -i, i, ZERO],
            PauliAxis::Z => [ONE, ZERO, ZERO, -ONE],
            PauliAxis::Plus => [ZERO, ONE, ZERO, ZERO],
            PauliAxis::Minus => [ZERO, ZERO, ONE, ZERO],
        };
        CMatrix::from_row_slice(2, 2, &entries)
    }
}

impl FromStr for PauliAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(PauliAxis::X),
            "y" => Ok(PauliAxis::Y),
            "z" => Ok(PauliAxis::Z),
            "plus" | "+" => Ok(PauliAxis::Plus),
            "minus" | "-" => Ok(PauliAxis::Minus),
            _ => Err(Error::InvalidAxis(s.to_string())),
        }
    }
}

/// Qubit operator embedded with identities on both modes.
pub fn pauli(space: HilbertSpace, axis: PauliAxis) -> Operator {
    let [d1, d2] = space.mode_dims();
    embed(space, &axis.block(), &CMatrix::identity(d1, d1), &CMatrix::identity(d2, d2))
}

/// `AB − BA`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.check_space(b)?;
    let matrix = &a.matrix * &b.matrix - &b.matrix * &a.matrix;
    Ok(Operator { space: a.space, matrix })
}
