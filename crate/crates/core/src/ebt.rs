//! Entanglement breaking: four equivalent tests plus the geometric subclasses.

use serde::Serialize;

use crate::canonical::CanonicalForm;
use crate::channel::PauliTransferMatrix;
use crate::cp::{choi_psd, cp_via_contraction, CpVerdict};
use crate::{Error, Result, ZERO_LAMBDA_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EbtVerdict {
    Ebt,
    NotEbt,
    Boundary,
}

impl EbtVerdict {
    /// True for `Ebt` and `Boundary`.
    pub fn is_ebt(self) -> bool {
        self != Self::NotEbt
    }

    pub fn from_margin(margin: f64, tol: f64) -> Self {
        Self::from_cp(CpVerdict::from_margin(margin, tol))
    }

    fn from_cp(v: CpVerdict) -> Self {
        match v {
            CpVerdict::Cp => Self::Ebt,
            CpVerdict::NotCp => Self::NotEbt,
            CpVerdict::Boundary => Self::Boundary,
        }
    }
}

fn require_cp(channel: &PauliTransferMatrix, tol: f64) -> Result<()> {
    let check = choi_psd(channel, tol);
    if check.verdict.is_cp() {
        Ok(())
    } else {
        Err(Error::NotCp(check.min_eigenvalue))
    }
}

/// EBT iff flipping the sign of one `λ_k` keeps the map completely positive.
///
/// All three single flips are evaluated and must agree; a flip inside the
/// boundary band makes the verdict `Boundary`.
pub fn ebt_sign_change(cf: &CanonicalForm, tol: f64) -> Result<EbtVerdict> {
    if !cp_via_contraction(cf, tol).is_cp() {
        return Err(Error::NotCp(choi_psd(&cf.transfer(), tol).min_eigenvalue));
    }
    let flips = [0, 1, 2].map(|k| cp_via_contraction(&cf.flip(k), tol));
    if flips.contains(&CpVerdict::Boundary) {
        return Ok(EbtVerdict::Boundary);
    }
    if flips.iter().any(|&v| v != flips[0]) {
        return Err(Error::Inconsistent(format!("single sign flips disagree: {flips:?}")));
    }
    Ok(EbtVerdict::from_cp(flips[0]))
}

/// EBT iff `Φ ∘ T` is completely positive, `T` the transpose.
pub fn ebt_ppt(channel: &PauliTransferMatrix, tol: f64) -> Result<EbtVerdict> {
    require_cp(channel, tol)?;
    Ok(EbtVerdict::from_cp(choi_psd(&channel.compose_transpose(), tol).verdict))
}

/// EBT iff the largest Choi eigenvalue is at most ½.
pub fn ebt_choi_bound(channel: &PauliTransferMatrix, tol: f64) -> Result<EbtVerdict> {
    require_cp(channel, tol)?;
    Ok(EbtVerdict::from_margin(0.5 - channel.choi().max_eigenvalue(), tol))
}

/// EBT iff both `(t, λ)` and `(t, −λ)` are completely positive.
pub fn ebt_region_intersection(cf: &CanonicalForm, tol: f64) -> Result<EbtVerdict> {
    require_cp(&cf.transfer(), tol)?;
    Ok(EbtVerdict::from_cp(choi_psd(&cf.inverted().transfer(), tol).verdict))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumLambda {
    pub sum: f64,
    /// `Σ|λ_k| ≤ 1`, necessary for EBT.
    pub necessary_pass: bool,
    /// Present only for unital channels, where the bound is also sufficient.
    pub decisive: Option<EbtVerdict>,
}

const UNITAL_TOL: f64 = 1e-12;

pub fn ebt_sum_lambda(cf: &CanonicalForm, tol: f64) -> SumLambda {
    let sum = cf.lambda_abs_sum();
    let verdict = EbtVerdict::from_margin(1.0 - sum, tol);
    SumLambda {
        sum,
        necessary_pass: verdict.is_ebt(),
        decisive: cf.is_unital(UNITAL_TOL).then_some(verdict),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    Point,
    Linear,
    Planar,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Geometry {
    pub kind: GeometryKind,
    pub is_cq: bool,
    pub is_qc: bool,
}

/// Indices of `λ` entries with `|λ_k| > tol`.
pub(crate) fn nonzero_axes(lambda: &[f64; 3], tol: f64) -> Vec<usize> {
    (0..3).filter(|&k| lambda[k].abs() > tol).collect()
}

const GEOMETRY_SLACK: f64 = 1e-10;

/// Image dimension from the number of vanishing `λ_k`, with CQ/QC flags.
///
/// Point channels carry both flags: a constant output is a CQ map with
/// equal outputs and a QC map with a trivial measurement.
pub fn classify_geometry(cf: &CanonicalForm, tol: f64) -> Result<Geometry> {
    require_cp(&cf.transfer(), crate::DEFAULT_TOL)?;
    let axes = nonzero_axes(&cf.lambda, tol);
    let t = cf.t;
    let (kind, is_cq, is_qc) = match axes.as_slice() {
        [] => (GeometryKind::Point, true, true),
        [k] => {
            let perp: f64 = (0..3).filter(|i| i != k).map(|i| t[i] * t[i]).sum();
            let along = t[*k].abs() + cf.lambda[*k].abs();
            let is_cq = perp + along * along <= 1.0 + GEOMETRY_SLACK;
            let is_qc = perp.sqrt() <= tol.max(GEOMETRY_SLACK) && along <= 1.0 + GEOMETRY_SLACK;
            (GeometryKind::Linear, is_cq, is_qc)
        }
        [_, _] => (GeometryKind::Planar, false, false),
        _ => (GeometryKind::Full, false, false),
    };
    Ok(Geometry { kind, is_cq, is_qc })
}

/// Equality test `(|λ_a| + |λ_b|)² + |t|² = 1` with in-plane `t` zero, for a
/// channel with exactly one vanishing `λ_k`.
pub fn planar_touch_test(cf: &CanonicalForm) -> Result<bool> {
    let axes = nonzero_axes(&cf.lambda, ZERO_LAMBDA_TOL);
    let [a, b] = axes.as_slice() else {
        return Err(Error::Precondition(format!(
            "exactly one vanishing λ required, got {} nonzero",
            axes.len()
        )));
    };
    let t = cf.t;
    let t2: f64 = t.iter().map(|x| x * x).sum();
    let s = cf.lambda[*a].abs() + cf.lambda[*b].abs();
    let equality = (s * s + t2 - 1.0).abs() <= 1e-12;
    let in_plane_zero = t[*a].abs() <= 1e-12 && t[*b].abs() <= 1e-12;
    Ok(equality && in_plane_zero)
}

/// Unital EBT octahedron `Σ|λ_k| ≤ 1`.
pub fn octahedron_membership(lambda: &[f64; 3]) -> bool {
    lambda.iter().map(|x| x.abs()).sum::<f64>() <= 1.0 + 1e-12
}
