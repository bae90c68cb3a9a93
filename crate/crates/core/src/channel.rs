//! Qubit states and trace-preserving channels in the Pauli basis.
//!
//! A state `ρ = ½[I + v·σ]` is carried by its Bloch vector `v`; a channel by
//! the 4×4 real matrix `T̂ = (1 0; t T)` acting on `(1, v)`.

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::pauli::{self, coefficients, from_coefficients, kron, matrix_unit};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector(pub [f64; 3]);

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self([x, y, z])
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::from(self.0)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self([v[0], v[1], v[2]])
    }

    pub fn norm(&self) -> f64 {
        self.as_vector().norm()
    }

    /// A valid state has `‖v‖ ≤ 1`.
    pub fn is_state(&self, tol: f64) -> bool {
        self.norm() <= 1.0 + tol
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn density_operator(&self) -> DensityOperator {
        DensityOperator::from_bloch(self)
    }
}

/// 2×2 density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(Matrix2<C64>);

impl DensityOperator {
    pub fn from_bloch(v: &BlochVector) -> Self {
        let [x, y, z] = v.0;
        let a = [C64::new(1.0, 0.0), C64::new(x, 0.0), C64::new(y, 0.0), C64::new(z, 0.0)];
        Self(from_coefficients(&a))
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(m: Matrix2<C64>, tol: f64) -> Result<Self> {
        if pauli::max_abs_diff2(&m, &m.adjoint()) > tol {
            return Err(Error::InvalidChannel("density operator is not Hermitian".into()));
        }
        if (m.trace() - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidChannel(format!("density operator trace {}", m.trace())));
        }
        let eig = m.symmetric_eigenvalues();
        if eig.min() < -tol {
            return Err(Error::InvalidChannel(format!("density operator eigenvalue {}", eig.min())));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    pub fn bloch(&self) -> BlochVector {
        let a = coefficients(&self.0);
        BlochVector([a[1].re, a[2].re, a[3].re])
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        let e = self.0.symmetric_eigenvalues();
        let (lo, hi) = if e[0] <= e[1] { (e[0], e[1]) } else { (e[1], e[0]) };
        [lo, hi]
    }
}

/// Real 4×4 matrix of a qubit map in the `{I, σ₁, σ₂, σ₃}` basis.
///
/// Row and column 0 belong to the identity. The map is trace preserving iff
/// row 0 is exactly `(1, 0, 0, 0)`; constructors that accept user input check
/// this, [`PauliTransferMatrix::from_matrix_unchecked`] does not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTransferMatrix(Matrix4<f64>);

impl PauliTransferMatrix {
    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    /// Requires a trace-preserving matrix (row 0 equal to `(1,0,0,0)` exactly).
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        let tp = Self(m);
        if !tp.is_trace_preserving() {
            return Err(Error::InvalidChannel(format!(
                "row 0 must be (1,0,0,0), got ({}, {}, {}, {})",
                m[(0, 0)],
                m[(0, 1)],
                m[(0, 2)],
                m[(0, 3)]
            )));
        }
        Ok(tp)
    }

    pub fn from_rows(rows: [[f64; 4]; 4]) -> Result<Self> {
        Self::new(Matrix4::from_fn(|i, j| rows[i][j]))
    }

    pub fn from_matrix_unchecked(m: Matrix4<f64>) -> Self {
        Self(m)
    }

    /// Builds `T̂ = (1 0; t T)` from a translation and a 3×3 block.
    pub fn from_blocks(t: &Vector3<f64>, block: &Matrix3<f64>) -> Self {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = 1.0;
        for i in 0..3 {
            m[(i + 1, 0)] = t[i];
            for j in 0..3 {
                m[(i + 1, j + 1)] = block[(i, j)];
            }
        }
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn rows(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.0[(i, j)]))
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.0[(0, 0)] == 1.0 && self.0[(0, 1)] == 0.0 && self.0[(0, 2)] == 0.0 && self.0[(0, 3)] == 0.0
    }

    pub fn translation(&self) -> Vector3<f64> {
        Vector3::new(self.0[(1, 0)], self.0[(2, 0)], self.0[(3, 0)])
    }

    pub fn block(&self) -> Matrix3<f64> {
        self.0.fixed_view::<3, 3>(1, 1).into_owned()
    }

    /// `v ↦ t + T v`.
    pub fn apply(&self, v: &BlochVector) -> BlochVector {
        BlochVector::from_vector(&(self.translation() + self.block() * v.as_vector()))
    }

    /// Action on an arbitrary 2×2 operator through its Pauli coefficients.
    pub fn apply_operator(&self, a: &Matrix2<C64>) -> Matrix2<C64> {
        apply_map(&self.0, a)
    }

    /// Precomposition with the transpose `ρ ↦ ρᵀ`, which negates column 2.
    pub fn compose_transpose(&self) -> Self {
        let mut m = self.0;
        m.column_mut(2).neg_mut();
        Self(m)
    }

    pub fn adjoint(&self) -> Matrix4<f64> {
        self.0.transpose()
    }

    pub fn choi(&self) -> ChoiMatrix {
        ChoiMatrix::of_map(&self.0)
    }

    /// Maximum absolute entry difference.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.0 - other.0).amax()
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (self.0 - other.0).norm()
    }
}

pub(crate) fn apply_map(m: &Matrix4<f64>, a: &Matrix2<C64>) -> Matrix2<C64> {
    let c = coefficients(a);
    let c = Vector4::from(c);
    let out = m.map(|x| C64::new(x, 0.0)) * c;
    from_coefficients(&[out[0], out[1], out[2], out[3]])
}

/// `T̂` with row 0 `(1,0,0,0)`, column-0 tail `t` and diagonal block `diag(λ)`.
pub fn channel_from_canonical(t: [f64; 3], lambda: [f64; 3]) -> PauliTransferMatrix {
    PauliTransferMatrix::from_blocks(&Vector3::from(t), &Matrix3::from_diagonal(&Vector3::from(lambda)))
}

pub fn apply(channel: &PauliTransferMatrix, v: &BlochVector) -> BlochVector {
    channel.apply(v)
}

pub fn choi_of(channel: &PauliTransferMatrix) -> ChoiMatrix {
    channel.choi()
}

/// Hilbert–Schmidt adjoint `T̂ᵀ`. Generally not trace preserving.
pub fn adjoint(channel: &PauliTransferMatrix) -> Matrix4<f64> {
    channel.adjoint()
}

/// `Γ = (I ⊗ Φ)(|β⟩⟨β|) = ½ Σ_ij E_ij ⊗ Φ(E_ij)`, trace 1 for trace-preserving `Φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix(Matrix4<C64>);

impl ChoiMatrix {
    /// Choi matrix of an arbitrary real Pauli-basis map (e.g. an adjoint).
    pub fn of_map(m: &Matrix4<f64>) -> Self {
        let mut out = Matrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let e = matrix_unit(i, j);
                out += kron(&e, &apply_map(m, &e));
            }
        }
        Self(out * C64::new(0.5, 0.0))
    }

    pub fn from_matrix(m: Matrix4<C64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    /// Block `(i, j)` of the first tensor factor, i.e. `½ Φ(E_ij)`.
    pub fn block(&self, i: usize, j: usize) -> Matrix2<C64> {
        self.0.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        pauli::max_abs_diff4(&self.0, &self.0.adjoint()) <= tol
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let h = (self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let e = h.symmetric_eigenvalues();
        let mut out = [e[0], e[1], e[2], e[3]];
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues()[3]
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues().iter().filter(|&&e| e > tol).count()
    }

    /// Recovers the real Pauli-basis matrix of the map this is the Choi matrix of.
    pub fn to_map_matrix(&self) -> Matrix4<f64> {
        // Φ(E_ij) = 2 · block(i, j); then Φ(σ_k) from the matrix-unit expansion.
        let phi = |i: usize, j: usize| self.block(i, j) * C64::new(2.0, 0.0);
        let i_unit = C64::new(0.0, 1.0);
        let images = [
            phi(0, 0) + phi(1, 1),
            phi(0, 1) + phi(1, 0),
            phi(1, 0) * i_unit - phi(0, 1) * i_unit,
            phi(0, 0) - phi(1, 1),
        ];
        let mut m = Matrix4::zeros();
        for (k, img) in images.iter().enumerate() {
            let c = coefficients(img);
            for j in 0..4 {
                m[(j, k)] = 0.5 * c[j].re;
            }
        }
        m
    }

    pub fn to_transfer(&self) -> PauliTransferMatrix {
        PauliTransferMatrix::from_matrix_unchecked(self.to_map_matrix())
    }

    pub fn distance(&self, other: &Self) -> f64 {
        pauli::max_abs_diff4(&self.0, &other.0)
    }
}
