//! Pauli basis `{I, σ₁, σ₂, σ₃}` and small complex-matrix helpers.

use nalgebra::{Matrix2, Matrix4};

use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Returns `σ_k` for `k ∈ 0..4`, with `σ₀ = I` and `σ₂ = (0, −i; i, 0)`.
pub fn sigma(k: usize) -> Matrix2<C64> {
    match k {
        0 => Matrix2::new(ONE, ZERO, ZERO, ONE),
        1 => Matrix2::new(ZERO, ONE, ONE, ZERO),
        2 => Matrix2::new(ZERO, -I, I, ZERO),
        3 => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("Pauli index {k} out of range"),
    }
}

/// Matrix unit `E_ij = |i⟩⟨j|`.
pub fn matrix_unit(i: usize, j: usize) -> Matrix2<C64> {
    let mut e = Matrix2::zeros();
    e[(i, j)] = ONE;
    e
}

/// Coefficients `a_k = Tr(σ_k A)`, so that `A = ½ Σ a_k σ_k`.
pub fn coefficients(a: &Matrix2<C64>) -> [C64; 4] {
    std::array::from_fn(|k| (sigma(k) * a).trace())
}

/// Inverse of [`coefficients`].
pub fn from_coefficients(a: &[C64; 4]) -> Matrix2<C64> {
    (0..4).fold(Matrix2::zeros(), |acc, k| acc + sigma(k) * a[k]) * C64::new(0.5, 0.0)
}

/// Kronecker product of two 2×2 matrices, first factor on the outer index.
pub fn kron(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    let mut out = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Square root of a Hermitian PSD 2×2 matrix, clamping negative eigenvalues at zero.
pub fn sqrt_psd(a: &Matrix2<C64>) -> Matrix2<C64> {
    let h = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut out = Matrix2::zeros();
    for k in 0..2 {
        let v = eig.eigenvectors.column(k);
        let s = eig.eigenvalues[k].max(0.0).sqrt();
        out += v * v.adjoint() * C64::new(s, 0.0);
    }
    out
}

pub fn max_abs_diff2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff4(a: &Matrix4<C64>, b: &Matrix4<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
