//! Seeded generators for rotations, axes and canonical channel parameters.

use std::f64::consts::TAU;

use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use rand::Rng;

use crate::canonical::CanonicalForm;
use crate::cp::choi_psd;
use crate::ebt::ebt_sign_change;

/// Haar-random proper rotation (uniform unit quaternion).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let q = nalgebra::Quaternion::new(b * (TAU * u3).cos(), a * (TAU * u2).sin(), a * (TAU * u2).cos(), b * (TAU * u3).sin());
    UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner()
}

/// Uniform point on the unit sphere.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vector3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Uniform point in the unit ball.
pub fn random_in_ball<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    let r: f64 = rng.random::<f64>().cbrt();
    random_unit_vector(rng) * r
}

/// `(t, λ)` uniform in `[−1, 1]⁶`.
pub fn uniform_params<R: Rng + ?Sized>(rng: &mut R) -> ([f64; 3], [f64; 3]) {
    let mut draw = || std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
    let t = draw();
    let l = draw();
    (t, l)
}

/// Rejection sample of a completely positive canonical form with `(t, λ)` in `[−1, 1]⁶`.
pub fn random_cp<R: Rng + ?Sized>(rng: &mut R) -> CanonicalForm {
    loop {
        let (t, l) = uniform_params(rng);
        let cf = CanonicalForm::from_params(t, l);
        if choi_psd(&cf.transfer(), 0.0).verdict.is_cp() {
            return cf;
        }
    }
}

/// Rejection sample of an entanglement-breaking canonical form.
pub fn random_ebt<R: Rng + ?Sized>(rng: &mut R) -> CanonicalForm {
    loop {
        let cf = random_cp(rng);
        if matches!(ebt_sign_change(&cf, 0.0), Ok(v) if v.is_ebt()) {
            return cf;
        }
    }
}

/// Unital (`t = 0`) completely positive canonical form.
pub fn random_unital_cp<R: Rng + ?Sized>(rng: &mut R) -> CanonicalForm {
    loop {
        let l = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        let cf = CanonicalForm::from_params([0.0; 3], l);
        if choi_psd(&cf.transfer(), 0.0).verdict.is_cp() {
            return cf;
        }
    }
}
