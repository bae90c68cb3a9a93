//! One-shot classification combining every test in the crate.

use serde::Serialize;

use crate::canonical::to_canonical;
use crate::channel::PauliTransferMatrix;
use crate::cp::{choi_psd, contraction_matrix, CpVerdict};
use crate::ebt::{
    classify_geometry, ebt_choi_bound, ebt_ppt, ebt_sign_change, ebt_sum_lambda, EbtVerdict, Geometry, SumLambda,
};
use crate::ZERO_LAMBDA_TOL;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criteria {
    pub sign_change: Option<EbtVerdict>,
    pub ppt: Option<EbtVerdict>,
    pub choi_bound: Option<EbtVerdict>,
    pub sum_lambda: SumLambda,
}

/// Contraction entries are `None` on the degenerate edge `|t₃| + |λ₃| ≥ 1`;
/// EBT fields are `None` for maps that are not completely positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub cp: bool,
    pub cp_verdict: CpVerdict,
    pub min_choi_eig: f64,
    pub m11: Option<f64>,
    pub m22: Option<f64>,
    pub det_m: Option<f64>,
    pub ebt: bool,
    pub ebt_verdict: Option<EbtVerdict>,
    pub criteria: Criteria,
    pub geometry: Option<Geometry>,
}

/// The overall EBT decision is the partial-transpose test.
pub fn classify(channel: &PauliTransferMatrix, tol: f64) -> Classification {
    let cf = to_canonical(channel);
    let psd = choi_psd(channel, tol);
    let data = contraction_matrix(&cf).ok();
    let cp = psd.verdict.is_cp();
    let ppt = ebt_ppt(channel, tol).ok();
    Classification {
        cp,
        cp_verdict: psd.verdict,
        min_choi_eig: psd.min_eigenvalue,
        m11: data.as_ref().map(|d| d.m11()),
        m22: data.as_ref().map(|d| d.m22()),
        det_m: data.as_ref().map(|d| d.det_m()),
        ebt: ppt.is_some_and(EbtVerdict::is_ebt),
        ebt_verdict: ppt,
        criteria: Criteria {
            sign_change: ebt_sign_change(&cf, tol).ok(),
            ppt,
            choi_bound: ebt_choi_bound(channel, tol).ok(),
            sum_lambda: ebt_sum_lambda(&cf, tol),
        },
        geometry: classify_geometry(&cf, ZERO_LAMBDA_TOL).ok(),
    }
}
