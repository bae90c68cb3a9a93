//! Complete positivity: Choi spectrum, the 2×2 contraction matrix, and the
//! closed-form necessary conditions.

use nalgebra::{Matrix2, Matrix4};
use serde::Serialize;

use crate::canonical::CanonicalForm;
use crate::channel::{apply_map, ChoiMatrix, PauliTransferMatrix};
use crate::pauli::{matrix_unit, sqrt_psd};
use crate::{Error, Result, C64};

/// Three-valued outcome of a positivity test; `Boundary` lies within `tol`
/// of the edge and belongs to the closed set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CpVerdict {
    Cp,
    NotCp,
    Boundary,
}

impl CpVerdict {
    pub fn from_margin(margin: f64, tol: f64) -> Self {
        if margin.abs() < tol {
            Self::Boundary
        } else if margin > 0.0 {
            Self::Cp
        } else {
            Self::NotCp
        }
    }

    /// True for `Cp` and `Boundary`.
    pub fn is_cp(self) -> bool {
        self != Self::NotCp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdCheck {
    pub verdict: CpVerdict,
    pub min_eigenvalue: f64,
}

/// Reference test: minimum eigenvalue of the Choi matrix.
pub fn choi_psd(channel: &PauliTransferMatrix, tol: f64) -> PsdCheck {
    let min_eigenvalue = channel.choi().min_eigenvalue();
    PsdCheck { verdict: CpVerdict::from_margin(min_eigenvalue, tol), min_eigenvalue }
}

/// Quantities of the contraction-matrix criterion for a canonical form.
///
/// `c_σρ = 1 + σλ₃ + ρt₃`, `τ = t₁ + i t₂`, `λ± = λ₁ ± λ₂`; complete
/// positivity is equivalent to `m = I − R†R ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionData {
    pub c_pp: f64,
    pub c_pm: f64,
    pub c_mp: f64,
    pub c_mm: f64,
    pub tau: C64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub r_phi: Matrix2<C64>,
    pub m: Matrix2<C64>,
}

impl ContractionData {
    pub fn m11(&self) -> f64 {
        self.m[(0, 0)].re
    }

    pub fn m22(&self) -> f64 {
        self.m[(1, 1)].re
    }

    pub fn m12(&self) -> C64 {
        self.m[(0, 1)]
    }

    pub fn det_m(&self) -> f64 {
        self.m11() * self.m22() - self.m12().norm_sqr()
    }

    /// Smaller eigenvalue of `m`.
    pub fn min_eigenvalue(&self) -> f64 {
        let (a, d) = (self.m11(), self.m22());
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + self.m12().norm_sqr()).sqrt();
        mean - half_gap
    }

    /// `m₁₁` from its closed form.
    pub fn m11_formula(&self) -> f64 {
        1.0 - self.tau.norm_sqr() / (self.c_pp * self.c_mm) - self.lambda_minus.powi(2) / (self.c_mm * self.c_mp)
    }

    /// `m₂₂` from its closed form.
    pub fn m22_formula(&self) -> f64 {
        1.0 - self.tau.norm_sqr() / (self.c_pm * self.c_mp) - self.lambda_plus.powi(2) / (self.c_pp * self.c_pm)
    }

    /// `|m₁₂|` from its closed form (the overall sign depends on conventions).
    pub fn m12_formula_abs(&self) -> f64 {
        let s = (self.c_mm * self.c_pm).sqrt();
        (self.tau.conj() * self.lambda_plus / (self.c_pp * s) + self.tau * self.lambda_minus / (self.c_mp * s)).norm()
    }

    /// Singular values of `R`, descending.
    pub fn r_singular_values(&self) -> [f64; 2] {
        let s = self.r_phi.singular_values();
        if s[0] >= s[1] {
            [s[0], s[1]]
        } else {
            [s[1], s[0]]
        }
    }

    /// `det(I − R R†)`, equal to `det m` in exact arithmetic.
    pub fn det_m_swapped(&self) -> f64 {
        (Matrix2::identity() - self.r_phi * self.r_phi.adjoint()).determinant().re
    }
}

fn in_interior(cf: &CanonicalForm, slack: f64) -> bool {
    cf.t[2].abs() + cf.lambda[2].abs() < 1.0 - slack
}

pub fn contraction_matrix(cf: &CanonicalForm) -> Result<ContractionData> {
    let (t, l) = (cf.t, cf.lambda);
    let edge = t[2].abs() + l[2].abs();
    if edge >= 1.0 {
        return Err(Error::DegenerateEdge(edge));
    }
    let c_pp = 1.0 + l[2] + t[2];
    let c_pm = 1.0 + l[2] - t[2];
    let c_mp = 1.0 - l[2] + t[2];
    let c_mm = 1.0 - l[2] - t[2];
    let tau = C64::new(t[0], t[1]);
    let lambda_plus = l[0] + l[1];
    let lambda_minus = l[0] - l[1];
    let re = |x: f64| C64::new(x, 0.0);
    let r_phi = Matrix2::new(
        tau / (c_pp * c_mm).sqrt(),
        re(lambda_plus / (c_pp * c_pm).sqrt()),
        re(lambda_minus / (c_mm * c_mp).sqrt()),
        tau / (c_pm * c_mp).sqrt(),
    );
    let m = Matrix2::identity() - r_phi.adjoint() * r_phi;
    Ok(ContractionData { c_pp, c_pm, c_mp, c_mm, tau, lambda_plus, lambda_minus, r_phi, m })
}

/// Contraction test for `|t₃| + |λ₃| < 1 − tol`, Choi spectrum otherwise.
pub fn cp_via_contraction(cf: &CanonicalForm, tol: f64) -> CpVerdict {
    if in_interior(cf, tol) {
        if let Ok(data) = contraction_matrix(cf) {
            return CpVerdict::from_margin(data.min_eigenvalue(), tol);
        }
    }
    choi_psd(&cf.transfer(), tol).verdict
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NecessaryConditions {
    /// Upper bound on `λ₊²` (equivalent to `m₂₂ ≥ 0`).
    pub rect_plus: bool,
    /// Upper bound on `λ₋²` (equivalent to `m₁₁ ≥ 0`).
    pub rect_minus: bool,
    /// `c₋₋ m₁₁ + c₊₋ m₂₂ ≥ 0`, i.e.
    /// `(λ₁²+λ₂²)(1+t₃) + λ₃²(1−t₃) ≤ (1+t₃)(1−|t|²) + 2λ₁λ₂λ₃`.
    pub trace_alt: bool,
}

const NECESSARY_SLACK: f64 = 1e-12;

pub fn necessary_conditions(cf: &CanonicalForm) -> Result<NecessaryConditions> {
    let d = contraction_matrix(cf)?;
    let tau2 = d.tau.norm_sqr();
    let plus_bound = d.c_pp * d.c_pm - (d.c_pp / d.c_mp) * tau2;
    let minus_bound = d.c_mm * d.c_mp - (d.c_mp / d.c_pp) * tau2;
    let ([l1, l2, l3], t3) = (cf.lambda, cf.t[2]);
    let t2: f64 = cf.t.iter().map(|x| x * x).sum();
    let lhs = (l1 * l1 + l2 * l2) * (1.0 + t3) + l3 * l3 * (1.0 - t3);
    let rhs = (1.0 + t3) * (1.0 - t2) + 2.0 * l1 * l2 * l3;
    Ok(NecessaryConditions {
        rect_plus: d.lambda_plus.powi(2) <= plus_bound + NECESSARY_SLACK,
        rect_minus: d.lambda_minus.powi(2) <= minus_bound + NECESSARY_SLACK,
        trace_alt: lhs <= rhs + NECESSARY_SLACK,
    })
}

/// Diagonal blocks `Φ̂(E₁₁)`, `Φ̂(E₂₂)` of the adjoint map.
fn adjoint_diagonal_blocks(cf: &CanonicalForm) -> (Matrix2<C64>, Matrix2<C64>) {
    let adj = cf.transfer().adjoint();
    (apply_map(&adj, &matrix_unit(0, 0)), apply_map(&adj, &matrix_unit(1, 1)))
}

/// `M = ½ (P, √P U √Q; √Q U† √P, Q)` with `P = Φ̂(E₁₁)`, `Q = Φ̂(E₂₂)`.
///
/// `M` is the Choi matrix of the adjoint of a trace-preserving map `Φ_U`;
/// with `U = R` it reproduces the adjoint Choi matrix of `cf` itself.
pub fn phi_from_contraction(cf: &CanonicalForm, u: &Matrix2<C64>) -> Result<ChoiMatrix> {
    let norm = u.singular_values().max();
    if norm > 1.0 + 1e-12 {
        return Err(Error::NotContraction(norm));
    }
    let check = choi_psd(&cf.transfer(), crate::DEFAULT_TOL);
    if !check.verdict.is_cp() {
        return Err(Error::NotCp(check.min_eigenvalue));
    }
    Ok(block_choi(cf, u))
}

pub(crate) fn block_choi(cf: &CanonicalForm, u: &Matrix2<C64>) -> ChoiMatrix {
    let (p, q) = adjoint_diagonal_blocks(cf);
    let (sp, sq) = (sqrt_psd(&p), sqrt_psd(&q));
    let off = sp * u * sq;
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&p);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&off);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&off.adjoint());
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&q);
    ChoiMatrix::from_matrix(m * C64::new(0.5, 0.0))
}

/// Transfer matrix of `Φ` from the Choi matrix of its adjoint.
pub fn channel_from_adjoint_choi(m: &ChoiMatrix) -> PauliTransferMatrix {
    PauliTransferMatrix::from_matrix_unchecked(m.to_map_matrix().transpose())
}
