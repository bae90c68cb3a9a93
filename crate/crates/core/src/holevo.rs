//! Measure-and-prepare ensembles `Φ(ρ) = Σ_k R_k Tr(F_k ρ)` in row-vector form.
//!
//! Item `k` carries the output Bloch vector `w` of `R_k = ½[I + w·σ]` and the
//! POVM element `F_k = u₀ I + u·σ`. With `W` rows `(1, w)` and `U` rows
//! `(u₀, u)` the transfer matrix is `T̂ = WᵀU`.

use nalgebra::{Matrix3, Matrix4, Rotation3, RowVector4, Vector3};
use serde::{Deserialize, Serialize};

use crate::channel::PauliTransferMatrix;
use crate::{Error, Result};

const ENSEMBLE_TOL: f64 = 1e-12;
const VERIFY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleItem {
    pub w: [f64; 3],
    pub u0: f64,
    pub u: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HolevoEnsemble {
    pub items: Vec<EnsembleItem>,
}

fn norm(v: &[f64; 3]) -> f64 {
    Vector3::from(*v).norm()
}

impl HolevoEnsemble {
    pub fn new(items: Vec<EnsembleItem>) -> Self {
        Self { items }
    }

    /// Rows `(1, w_k)`.
    pub fn w_rows(&self) -> Vec<[f64; 4]> {
        self.items.iter().map(|it| [1.0, it.w[0], it.w[1], it.w[2]]).collect()
    }

    /// Rows `(u₀_k, u_k)`.
    pub fn u_rows(&self) -> Vec<[f64; 4]> {
        self.items.iter().map(|it| [it.u0, it.u[0], it.u[1], it.u[2]]).collect()
    }

    /// Checks that each `R_k` is a state and `{F_k}` is a POVM.
    pub fn validate(&self) -> Result<()> {
        if self.items.is_empty() {
            return Err(Error::InvalidEnsemble("empty ensemble".into()));
        }
        for (k, it) in self.items.iter().enumerate() {
            let vals = it.w.iter().chain(&it.u).chain(std::iter::once(&it.u0));
            if vals.into_iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidEnsemble(format!("item {k}: non-finite entry")));
            }
            if norm(&it.w) > 1.0 + ENSEMBLE_TOL {
                return Err(Error::InvalidEnsemble(format!("item {k}: |w| = {} exceeds 1", norm(&it.w))));
            }
            if norm(&it.u) > it.u0 + ENSEMBLE_TOL {
                return Err(Error::InvalidEnsemble(format!(
                    "item {k}: POVM element not positive, |u| = {} > u0 = {}",
                    norm(&it.u),
                    it.u0
                )));
            }
        }
        let u0_sum: f64 = self.items.iter().map(|it| it.u0).sum();
        if (u0_sum - 1.0).abs() > ENSEMBLE_TOL {
            return Err(Error::InvalidEnsemble(format!("Σ u0 = {u0_sum}, expected 1")));
        }
        let u_sum = self.items.iter().fold(Vector3::zeros(), |acc, it| acc + Vector3::from(it.u));
        if u_sum.amax() > ENSEMBLE_TOL {
            return Err(Error::InvalidEnsemble(format!("Σ u = {:?}, expected 0", u_sum.as_slice())));
        }
        Ok(())
    }

    /// `WᵀU` without validation.
    pub fn product(&self) -> Matrix4<f64> {
        self.items.iter().fold(Matrix4::zeros(), |acc, it| {
            let w = RowVector4::new(1.0, it.w[0], it.w[1], it.w[2]);
            let u = RowVector4::new(it.u0, it.u[0], it.u[1], it.u[2]);
            acc + w.transpose() * u
        })
    }
}

/// `T̂ = WᵀU` for a valid ensemble; row 0 is set to `(1,0,0,0)` exactly.
pub fn ensemble_to_transfer(ens: &HolevoEnsemble) -> Result<PauliTransferMatrix> {
    ens.validate()?;
    let mut m = ens.product();
    m.set_row(0, &RowVector4::new(1.0, 0.0, 0.0, 0.0));
    Ok(PauliTransferMatrix::from_matrix_unchecked(m))
}

/// True iff the ensemble is valid and reproduces `channel` within `1e-10`.
pub fn verify_ensemble(ens: &HolevoEnsemble, channel: &PauliTransferMatrix) -> bool {
    ensemble_to_transfer(ens).is_ok_and(|m| m.distance(channel) <= VERIFY_TOL)
}

/// Linear CQ channel with translation `t` and scaling `λ₃` along the third axis:
/// outputs `w± = (t₁, t₂, t₃ ± λ₃)` for the projectors `|0⟩⟨0|`, `|1⟩⟨1|`.
pub fn build_cq(t: [f64; 3], lambda3: f64) -> Result<HolevoEnsemble> {
    let lhs = t[0] * t[0] + t[1] * t[1] + (t[2].abs() + lambda3.abs()).powi(2);
    if !lhs.is_finite() || lhs > 1.0 + ENSEMBLE_TOL {
        return Err(Error::NotRealizable(lhs));
    }
    let item = |s: f64| EnsembleItem { w: [t[0], t[1], t[2] + s * lambda3], u0: 0.5, u: [0.0, 0.0, 0.5 * s] };
    Ok(HolevoEnsemble::new(vec![item(1.0), item(-1.0)]))
}

/// QC ensemble: outputs `|0⟩`, `|1⟩`, measurement `F = u₀I + u·σ`, `I − F`.
#[derive(Debug, Clone, PartialEq)]
pub struct QcEnsemble {
    /// Built with `u` rotated onto the third axis.
    pub ensemble: HolevoEnsemble,
    /// Proper rotation with `rotation · u = |u| e₃`.
    pub rotation: Matrix3<f64>,
}

impl QcEnsemble {
    /// The same ensemble with the measurement in its original orientation.
    pub fn original_ensemble(&self) -> HolevoEnsemble {
        let back = self.rotation.transpose();
        let items = self
            .ensemble
            .items
            .iter()
            .map(|it| EnsembleItem { w: it.w, u0: it.u0, u: (back * Vector3::from(it.u)).into() })
            .collect();
        HolevoEnsemble::new(items)
    }

    /// Transfer matrix for the measurement as originally given.
    pub fn original_transfer(&self) -> Result<PauliTransferMatrix> {
        let canonical = ensemble_to_transfer(&self.ensemble)?;
        let m = canonical.matrix() * crate::canonical::embed(&self.rotation);
        Ok(PauliTransferMatrix::from_matrix_unchecked(m))
    }
}

pub fn build_qc(u0: f64, u: [f64; 3]) -> Result<QcEnsemble> {
    if !(0.0..=1.0).contains(&u0) {
        return Err(Error::InvalidPovm(format!("u0 = {u0} outside [0, 1]")));
    }
    let len = norm(&u);
    let cap = u0.min(1.0 - u0);
    if !len.is_finite() || len > cap + ENSEMBLE_TOL {
        return Err(Error::InvalidPovm(format!("|u| = {len} exceeds min(u0, 1 - u0) = {cap}")));
    }
    let rotation = align_to_e3(&Vector3::from(u));
    let item = |w3: f64, u0: f64, u3: f64| EnsembleItem { w: [0.0, 0.0, w3], u0, u: [0.0, 0.0, u3] };
    let ensemble = HolevoEnsemble::new(vec![item(1.0, u0, len), item(-1.0, 1.0 - u0, -len)]);
    Ok(QcEnsemble { ensemble, rotation })
}

/// Proper rotation taking `v` to `|v| e₃` (identity for `v = 0`).
pub(crate) fn align_to_e3(v: &Vector3<f64>) -> Matrix3<f64> {
    let n = v.norm();
    if n == 0.0 {
        return Matrix3::identity();
    }
    let e3 = Vector3::z();
    Rotation3::rotation_between(v, &e3)
        .unwrap_or_else(|| Rotation3::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI))
        .into_inner()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QcCqPair {
    pub w_qc: Vec<[f64; 4]>,
    pub u_qc: Vec<[f64; 4]>,
    pub w_cq: Vec<[f64; 4]>,
    pub u_cq: Vec<[f64; 4]>,
}

impl QcCqPair {
    pub fn qc(&self) -> HolevoEnsemble {
        from_rows(&self.w_qc, &self.u_qc)
    }

    pub fn cq(&self) -> HolevoEnsemble {
        from_rows(&self.w_cq, &self.u_cq)
    }
}

fn from_rows(w: &[[f64; 4]], u: &[[f64; 4]]) -> HolevoEnsemble {
    HolevoEnsemble::new(
        w.iter()
            .zip(u)
            .map(|(w, u)| EnsembleItem { w: [w[1], w[2], w[3]], u0: u[0], u: [u[1], u[2], u[3]] })
            .collect(),
    )
}

/// The QC and CQ factorizations of the canonical channel `t = (0,0,t₃)`, `λ = (0,0,λ₃)`.
pub fn qc_to_cq(t3: f64, lambda3: f64) -> Result<QcCqPair> {
    let inside = t3.abs() < 1.0 && lambda3.abs() + t3.abs() <= 1.0 + ENSEMBLE_TOL;
    if !inside {
        return Err(Error::Precondition(format!("need |t3| < 1 and |t3| + |l3| <= 1, got t3 = {t3}, l3 = {lambda3}")));
    }
    Ok(QcCqPair {
        w_qc: vec![[1.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, -1.0]],
        u_qc: vec![[0.5 * (1.0 + t3), 0.0, 0.0, 0.5 * lambda3], [0.5 * (1.0 - t3), 0.0, 0.0, -0.5 * lambda3]],
        w_cq: vec![[1.0, 0.0, 0.0, t3 + lambda3], [1.0, 0.0, 0.0, t3 - lambda3]],
        u_cq: vec![[0.5, 0.0, 0.0, 0.5], [0.5, 0.0, 0.0, -0.5]],
    })
}

/// Single-output ensemble for the constant channel `ρ ↦ ½[I + t·σ]`.
pub fn point_ensemble(t: [f64; 3]) -> HolevoEnsemble {
    HolevoEnsemble::new(vec![EnsembleItem { w: t, u0: 1.0, u: [0.0; 3] }])
}

/// Trine measurement `F_k = ⅓[I + m_k·σ]` with axes at 120° in the 1-3 plane,
/// and outputs `R_k = ½[I + σ_k]`.
pub fn trine_ensemble() -> HolevoEnsemble {
    let h = 3f64.sqrt() / 2.0;
    let axes = [[1.0, 0.0, 0.0], [-0.5, 0.0, h], [-0.5, 0.0, -h]];
    let outputs = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    HolevoEnsemble::new(
        axes.iter()
            .zip(outputs)
            .map(|(m, w)| EnsembleItem { w, u0: 1.0 / 3.0, u: m.map(|x| x / 3.0) })
            .collect(),
    )
}
