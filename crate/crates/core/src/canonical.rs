//! Reduction of a qubit transfer matrix to the diagonal canonical form
//! `T̂ = (1 0; t diag(λ))` by proper rotations on range and domain.
//!
//! Convention: `|λ₁| ≥ |λ₂| ≥ |λ₃|`, with `λ₁, λ₂ ≥ 0` and `sign(λ₃) = sign(det T)`.
//! Two signs can always be moved by a Pauli conjugation, so this leaves one
//! representative per orbit.

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Serialize, Serializer};

use crate::channel::{channel_from_canonical, PauliTransferMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub t: [f64; 3],
    pub lambda: [f64; 3],
    /// Applied on the range: `t = rot_out · t_original`.
    pub rot_out: Matrix3<f64>,
    /// Applied on the domain: `rot_out · T · rot_inᵀ = diag(λ)`.
    pub rot_in: Matrix3<f64>,
}

impl CanonicalForm {
    /// Canonical parameters taken as-is, with identity basis changes.
    pub fn from_params(t: [f64; 3], lambda: [f64; 3]) -> Self {
        Self { t, lambda, rot_out: Matrix3::identity(), rot_in: Matrix3::identity() }
    }

    /// Canonical-basis transfer matrix built from `(t, λ)` alone.
    pub fn transfer(&self) -> PauliTransferMatrix {
        channel_from_canonical(self.t, self.lambda)
    }

    /// The original channel: `diag(1, rot_outᵀ) · T̂_canonical · diag(1, rot_in)`.
    pub fn reconstruct(&self) -> PauliTransferMatrix {
        let out = embed(&self.rot_out.transpose());
        let inp = embed(&self.rot_in);
        PauliTransferMatrix::from_matrix_unchecked(out * self.transfer().matrix() * inp)
    }

    /// Same translation with new scaling parameters.
    pub fn with_lambda(&self, lambda: [f64; 3]) -> Self {
        Self { lambda, ..self.clone() }
    }

    /// `λ_k → −λ_k`.
    pub fn flip(&self, k: usize) -> Self {
        let mut lambda = self.lambda;
        lambda[k] = -lambda[k];
        self.with_lambda(lambda)
    }

    /// `λ → −λ`.
    pub fn inverted(&self) -> Self {
        self.with_lambda(self.lambda.map(|x| -x))
    }

    pub fn t_norm(&self) -> f64 {
        Vector3::from(self.t).norm()
    }

    pub fn lambda_abs_sum(&self) -> f64 {
        self.lambda.iter().map(|x| x.abs()).sum()
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.t_norm() <= tol
    }
}

impl Serialize for CanonicalForm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            t: [f64; 3],
            lambda: [f64; 3],
            rot_out: [[f64; 3]; 3],
            rot_in: [[f64; 3]; 3],
        }
        let rows = |m: &Matrix3<f64>| std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]));
        Repr { t: self.t, lambda: self.lambda, rot_out: rows(&self.rot_out), rot_in: rows(&self.rot_in) }
            .serialize(s)
    }
}

pub(crate) fn embed(r: &Matrix3<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(1, 1).copy_from(r);
    m
}

/// Singular values in descending order.
pub fn singular_values_3x3(m: &Matrix3<f64>) -> [f64; 3] {
    let s = m.singular_values();
    let mut out = [s[0], s[1], s[2]];
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Signed singular value decomposition of the 3×3 block.
pub fn to_canonical(channel: &PauliTransferMatrix) -> CanonicalForm {
    let block = channel.block();
    let (mut u, s, mut v) = svd_sorted(&block);
    let mut lambda = s;

    // Fix the joint sign of each singular pair: largest |entry| of v_i positive.
    for i in 0..3 {
        let col = v.column(i);
        let pivot = (0..3).fold(0, |best, k| if col[k].abs() > col[best].abs() + 1e-12 { k } else { best });
        if col[pivot] < 0.0 {
            u.column_mut(i).neg_mut();
            v.column_mut(i).neg_mut();
        }
    }
    if v.determinant() < 0.0 {
        u.column_mut(2).neg_mut();
        v.column_mut(2).neg_mut();
    }
    if u.determinant() < 0.0 {
        u.column_mut(2).neg_mut();
        lambda[2] = -lambda[2];
    }

    let rot_out = u.transpose();
    let t = rot_out * channel.translation();
    CanonicalForm { t: [t[0], t[1], t[2]], lambda, rot_out, rot_in: v.transpose() }
}

/// `block = U diag(s) Vᵀ` with `s` descending and nonnegative.
fn svd_sorted(block: &Matrix3<f64>) -> (Matrix3<f64>, [f64; 3], Matrix3<f64>) {
    let is_diagonal = (0..3).all(|i| (0..3).all(|j| i == j || block[(i, j)] == 0.0));
    let (u, s, v) = if is_diagonal {
        let d = block.diagonal();
        let u = Matrix3::from_diagonal(&d.map(|x| if x < 0.0 { -1.0 } else { 1.0 }));
        (u, [d[0].abs(), d[1].abs(), d[2].abs()], Matrix3::identity())
    } else {
        let svd = block.svd(true, true);
        let u = svd.u.expect("requested U");
        let v = svd.v_t.expect("requested Vᵀ").transpose();
        let s = svd.singular_values;
        (u, [s[0], s[1], s[2]], v)
    };
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let u = Matrix3::from_columns(&order.map(|k| u.column(k).into_owned()));
    let v = Matrix3::from_columns(&order.map(|k| v.column(k).into_owned()));
    (u, order.map(|k| s[k]), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_rotation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn orthogonality_error(r: &Matrix3<f64>) -> f64 {
        (r.transpose() * r - Matrix3::identity()).amax()
    }

    #[test]
    fn already_canonical_is_unchanged() {
        for (t, l) in [
            ([0.1, 0.2, 0.3], [0.5, 0.4, 0.3]),
            ([0.0, 0.0, 0.5], [0.5, 0.4, -0.3]),
            ([0.0; 3], [1.0, 1.0, 1.0]),
            ([0.2, 0.0, 0.0], [0.3, 0.0, 0.0]),
        ] {
            let cf = to_canonical(&channel_from_canonical(t, l));
            assert_eq!(cf.lambda, l);
            assert_eq!(cf.t, t);
            assert_eq!(cf.rot_out, Matrix3::identity());
            assert_eq!(cf.rot_in, Matrix3::identity());
        }
    }

    #[test]
    fn sign_and_order_convention() {
        let cf = to_canonical(&channel_from_canonical([0.1, 0.0, 0.0], [-0.1, -0.2, 0.35]));
        assert_eq!(cf.lambda, [0.35, 0.2, 0.1]);
        let cf = to_canonical(&channel_from_canonical([0.0; 3], [-0.1, 0.2, 0.35]));
        assert_eq!(cf.lambda, [0.35, 0.2, -0.1]);
        assert!((cf.rot_out.determinant() - 1.0).abs() < 1e-15);
        assert!((cf.rot_in.determinant() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn recovers_rotated_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let r1 = random_rotation(&mut rng);
            let r2 = random_rotation(&mut rng);
            let l = Vector3::new(0.7, -0.4, 0.2);
            let block = r1 * Matrix3::from_diagonal(&l) * r2.transpose();
            let ch = PauliTransferMatrix::from_blocks(&Vector3::zeros(), &block);
            let cf = to_canonical(&ch);
            let mut got: Vec<f64> = cf.lambda.iter().map(|x| x.abs()).collect();
            got.sort_by(f64::total_cmp);
            assert!((got[0] - 0.2).abs() < 1e-10 && (got[1] - 0.4).abs() < 1e-10 && (got[2] - 0.7).abs() < 1e-10);
            assert!(cf.reconstruct().frobenius_distance(&ch) < 1e-12);
            // det T < 0 puts the sign on λ₃.
            assert!(cf.lambda[2] < 0.0);
        }
    }

    #[test]
    fn cq_product_reduces_to_one_lambda() {
        // W = (1 t₁ t₂ t₃±λ₃), U = ½(1 0 0 ±1).
        let (t, l3) = ([0.1, -0.2, 0.3], 0.4);
        let ch = channel_from_canonical(t, [0.0, 0.0, l3]);
        let cf = to_canonical(&ch);
        assert!((cf.lambda[0] - l3).abs() < 1e-14);
        assert!(cf.lambda[1].abs() < 1e-14 && cf.lambda[2].abs() < 1e-14);
        assert!((cf.t_norm() - Vector3::from(t).norm()).abs() < 1e-14);
        assert!((cf.t[0].abs() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn singular_values_examples() {
        assert_eq!(singular_values_3x3(&Matrix3::identity()), [1.0, 1.0, 1.0]);
        let s = singular_values_3x3(&Matrix3::from_diagonal(&Vector3::new(0.5, -0.3, 0.0)));
        assert!((s[0] - 0.5).abs() < 1e-15 && (s[1] - 0.3).abs() < 1e-15 && s[2].abs() < 1e-15);
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let m: Matrix3<f64> = Matrix3::from_fn(|_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
            let mut gram: Vec<f64> =
                (m.transpose() * m).symmetric_eigen().eigenvalues.iter().map(|x: &f64| x.max(0.0).sqrt()).collect();
            gram.sort_by(|a, b| b.total_cmp(a));
            let s = singular_values_3x3(&m);
            for k in 0..3 {
                assert!((s[k] - gram[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rotations_are_proper_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let mut m: Matrix4<f64> =
                Matrix4::from_fn(|i, _| if i == 0 { 0.0 } else { rand::Rng::random_range(&mut rng, -1.0..1.0) });
            m[(0, 0)] = 1.0;
            let ch = PauliTransferMatrix::new(m).unwrap();
            let cf = to_canonical(&ch);
            assert!(orthogonality_error(&cf.rot_out) < 1e-12);
            assert!(orthogonality_error(&cf.rot_in) < 1e-12);
            assert!((cf.rot_out.determinant() - 1.0).abs() < 1e-12);
            assert!((cf.rot_in.determinant() - 1.0).abs() < 1e-12);
            assert!(cf.reconstruct().frobenius_distance(&ch) < 1e-12);
            assert!(cf.lambda[0] >= cf.lambda[1].abs() && cf.lambda[1] >= cf.lambda[2].abs());
            assert!(cf.lambda[1] >= 0.0);
        }
    }
}
