//! Convex decompositions: unitary splits of any CPT map through its
//! contraction matrix, and mixtures of classical-quantum channels for
//! entanglement-breaking maps.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Rotation3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::canonical::CanonicalForm;
use crate::channel::{ChoiMatrix, PauliTransferMatrix};
use crate::cp::{block_choi, choi_psd, contraction_matrix};
use crate::ebt::{ebt_sign_change, nonzero_axes};
use crate::holevo::{EnsembleItem, HolevoEnsemble};
use crate::nnls::nnls;
use crate::sampling::{random_in_ball, random_unit_vector};
use crate::{par, Error, Result, DEFAULT_TOL, ZERO_LAMBDA_TOL, C64};

/// Classical-quantum channel `ρ ↦ Σ± Tr(½[I ± n·σ] ρ) ½[I + (t ± d)·σ]`,
/// i.e. translation `t` and rank-one block `T = d nᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqChannel {
    pub t: [f64; 3],
    pub d: [f64; 3],
    /// Unit measurement axis.
    pub axis: [f64; 3],
}

const COMPONENT_SLACK: f64 = 1e-9;

impl CqChannel {
    pub fn new(t: Vector3<f64>, d: Vector3<f64>, axis: Vector3<f64>) -> Self {
        let axis = axis.try_normalize(0.0).unwrap_or_else(Vector3::z);
        Self { t: t.into(), d: d.into(), axis: axis.into() }
    }

    /// From the two output Bloch vectors `t ± d`.
    pub fn from_outputs(plus: Vector3<f64>, minus: Vector3<f64>, axis: Vector3<f64>) -> Self {
        Self::new((plus + minus) * 0.5, (plus - minus) * 0.5, axis)
    }

    pub fn outputs(&self) -> (Vector3<f64>, Vector3<f64>) {
        let (t, d) = (Vector3::from(self.t), Vector3::from(self.d));
        (t + d, t - d)
    }

    /// Scaling parameter of the canonical form, `|d|`.
    pub fn lambda(&self) -> f64 {
        Vector3::from(self.d).norm()
    }

    /// Both outputs are states.
    pub fn is_valid(&self, slack: f64) -> bool {
        let (p, m) = self.outputs();
        p.norm() <= 1.0 + slack && m.norm() <= 1.0 + slack && (Vector3::from(self.axis).norm() - 1.0).abs() <= 1e-9
    }

    pub fn transfer(&self) -> PauliTransferMatrix {
        let block = Vector3::from(self.d) * Vector3::from(self.axis).transpose();
        PauliTransferMatrix::from_blocks(&Vector3::from(self.t), &block)
    }

    pub fn ensemble(&self) -> HolevoEnsemble {
        let (p, m) = self.outputs();
        let n = Vector3::from(self.axis) * 0.5;
        HolevoEnsemble::new(vec![
            EnsembleItem { w: p.into(), u0: 0.5, u: n.into() },
            EnsembleItem { w: m.into(), u0: 0.5, u: (-n).into() },
        ])
    }

    /// Component of `diag(1, out) · T̂ · diag(1, inp)`.
    fn transformed(&self, out: &Matrix3<f64>, inp: &Matrix3<f64>) -> Self {
        Self::new(out * Vector3::from(self.t), out * Vector3::from(self.d), inp.transpose() * Vector3::from(self.axis))
    }

    /// Entries 1..=3 of every column of `T̂`, row-major, as one 12-vector.
    fn entries(&self) -> [f64; 12] {
        flatten(&self.transfer())
    }
}

fn flatten(m: &PauliTransferMatrix) -> [f64; 12] {
    std::array::from_fn(|k| m.matrix()[(1 + k / 4, k % 4)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqDecomposition {
    pub weights: Vec<f64>,
    pub components: Vec<CqChannel>,
    /// Frobenius distance between the mixture and the target.
    pub residual: f64,
}

impl CqDecomposition {
    fn assemble(parts: Vec<(f64, CqChannel)>, target: &PauliTransferMatrix) -> Self {
        let parts: Vec<_> = parts.into_iter().filter(|(w, _)| *w > 1e-12).collect();
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        let (weights, components): (Vec<_>, Vec<_>) = parts.into_iter().map(|(w, c)| (w / total, c)).unzip();
        let mut out = Self { weights, components, residual: 0.0 };
        out.residual = out.transfer().frobenius_distance(target);
        out
    }

    pub fn transfer(&self) -> PauliTransferMatrix {
        let mut m = self
            .weights
            .iter()
            .zip(&self.components)
            .fold(nalgebra::Matrix4::zeros(), |acc, (w, c)| acc + c.transfer().matrix() * *w);
        m.set_row(0, &nalgebra::RowVector4::new(1.0, 0.0, 0.0, 0.0));
        PauliTransferMatrix::from_matrix_unchecked(m)
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn require_cp(cf: &CanonicalForm) -> Result<()> {
    let check = choi_psd(&cf.transfer(), DEFAULT_TOL);
    if check.verdict.is_cp() {
        Ok(())
    } else {
        Err(Error::NotCp(check.min_eigenvalue))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneralizedExtreme {
    pub extreme: bool,
    /// Singular values of the contraction matrix, when it is defined.
    pub singular_values: Option<[f64; 2]>,
    /// Choi rank used at the degenerate edge `|t₃| + |λ₃| = 1`.
    pub choi_rank: Option<usize>,
}

/// Unitary contraction matrix, or Choi rank at most 2 on the degenerate edge.
pub fn is_generalized_extreme(cf: &CanonicalForm, tol: f64) -> Result<GeneralizedExtreme> {
    require_cp(cf)?;
    match contraction_matrix(cf) {
        Ok(data) => {
            let s = data.r_singular_values();
            Ok(GeneralizedExtreme {
                extreme: s.iter().all(|v| (v - 1.0).abs() <= tol),
                singular_values: Some(s),
                choi_rank: None,
            })
        }
        Err(Error::DegenerateEdge(_)) => {
            let rank = cf.transfer().choi().rank(DEFAULT_TOL);
            Ok(GeneralizedExtreme { extreme: rank <= 2, singular_values: None, choi_rank: Some(rank) })
        }
        Err(e) => Err(e),
    }
}

struct RSvd {
    left: Matrix2<C64>,
    cos: [f64; 2],
    right: Matrix2<C64>,
}

fn r_svd(cf: &CanonicalForm) -> Result<RSvd> {
    let data = contraction_matrix(cf)?;
    let svd = data.r_phi.svd(true, true);
    let (mut left, mut right) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut s = [svd.singular_values[0], svd.singular_values[1]];
    if s[0] < s[1] {
        s.swap(0, 1);
        left.swap_columns(0, 1);
        right.swap_rows(0, 1);
    }
    Ok(RSvd { left, cos: s.map(|v| v.clamp(0.0, 1.0)), right })
}

fn diag_c(a: C64, b: C64) -> Matrix2<C64> {
    Matrix2::new(a, C64::new(0.0, 0.0), C64::new(0.0, 0.0), b)
}

/// `Φ = ½ Φ_{U+} + ½ Φ_{U−}` with `U± = V diag(e^{±iθ}) W†`, `cos θ` the singular values of `R`.
///
/// Both halves are returned as Choi matrices of the adjoint map, like
/// [`crate::cp::phi_from_contraction`].
pub fn split_midpoint(cf: &CanonicalForm) -> Result<(ChoiMatrix, ChoiMatrix)> {
    require_cp(cf)?;
    let RSvd { left, cos, right } = r_svd(cf)?;
    let phase = |sign: f64| {
        let [a, b] = cos.map(|c| C64::from_polar(1.0, sign * c.acos()));
        left * diag_c(a, b) * right
    };
    Ok((block_choi(cf, &phase(1.0)), block_choi(cf, &phase(-1.0))))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeTermSplit {
    /// `((c₁+c₂)/2, (c₁−c₂)/2, 1−c₁)` with `c₁ ≥ c₂` the singular values of `R`.
    pub weights: [f64; 3],
    /// Adjoint Choi matrices for `U = VW†`, `U = Vσ_zW†` and `U = 0`.
    pub maps: [ChoiMatrix; 3],
}

impl ThreeTermSplit {
    pub fn mixture(&self) -> ChoiMatrix {
        let m = self.weights.iter().zip(&self.maps).fold(nalgebra::Matrix4::zeros(), |acc, (w, c)| {
            acc + c.matrix() * C64::new(*w, 0.0)
        });
        ChoiMatrix::from_matrix(m)
    }
}

pub fn split_three_term(cf: &CanonicalForm) -> Result<ThreeTermSplit> {
    require_cp(cf)?;
    let RSvd { left, cos: [c1, c2], right } = r_svd(cf)?;
    if c2 >= 1.0 - 1e-12 {
        return Err(Error::IsExtreme);
    }
    let one = C64::new(1.0, 0.0);
    let unitary = left * right;
    let reflected = left * diag_c(one, -one) * right;
    Ok(ThreeTermSplit {
        weights: [(c1 + c2) / 2.0, (c1 - c2) / 2.0, 1.0 - c1],
        maps: [block_choi(cf, &unitary), block_choi(cf, &reflected), block_choi(cf, &Matrix2::zeros())],
    })
}

fn unit(k: usize) -> Vector3<f64> {
    let mut v = Vector3::zeros();
    v[k] = 1.0;
    v
}

/// Proper rotation taking `v` onto `|v| · target` (identity for `v = 0`).
fn align(v: &Vector3<f64>, target: &Vector3<f64>) -> Matrix3<f64> {
    if v.norm() == 0.0 {
        return Matrix3::identity();
    }
    Rotation3::rotation_between(v, target)
        .unwrap_or_else(|| {
            let perp = if target.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
            let axis = nalgebra::Unit::new_normalize(target.cross(&perp));
            Rotation3::from_axis_angle(&axis, std::f64::consts::PI)
        })
        .into_inner()
}

/// Minimizes a convex function on `[lo, hi]`.
fn golden_section(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    if hi - lo <= 0.0 {
        return (lo, f(lo));
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..70 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let candidates = [(lo, f(lo)), (hi, f(hi)), (c, fc), (d, fd)];
    candidates.into_iter().min_by(|x, y| x.1.total_cmp(&y.1)).expect("nonempty")
}

/// Planar channel (`λ_zero = 0`) as a mixture of two linear CQ channels in
/// canonical form along the two remaining axes.
///
/// In absolute coordinates the first component's scaled parameters
/// `U = (p|t^A_a| + |λ_a|, p|t^A_b|, p|t^A_k|)` and the second's add up to the
/// constant `C = (|λ_a| + |t_a|, |λ_b| + |t_b|, |t_k|)`, so the split exists iff
/// `min ‖U‖ + ‖C − U‖ ≤ 1` over the box that keeps both parts consistent.
/// This does not reach every planar channel; the rest return `None`.
fn planar_split(t: [f64; 3], lambda: [f64; 3], zero: usize) -> Option<Vec<(f64, CqChannel)>> {
    let [a, b] = match zero {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    };
    let (la, lb) = (lambda[a].abs(), lambda[b].abs());
    let (ta, tb, tk) = (t[a].abs(), t[b].abs(), t[zero].abs());
    let c = Vector3::new(la + ta, lb + tb, tk);
    let cost = |u: &Vector3<f64>| u.norm() + (c - u).norm();

    // Collinear U reaches the triangle bound ‖C‖ when the box allows it.
    let (lo, hi) = (la / (la + ta), if tb + lb > 0.0 { tb / (tb + lb) } else { 1.0 });
    let u = if lo <= hi {
        c * (0.5 * (lo + hi))
    } else {
        let third = |u1: f64, u2: f64| golden_section(0.0, tk, |u3| cost(&Vector3::new(u1, u2, u3)));
        let second = |u1: f64| golden_section(0.0, tb, |u2| third(u1, u2).1);
        let (u1, _) = golden_section(la, la + ta, |u1| second(u1).1);
        let (u2, _) = second(u1);
        Vector3::new(u1, u2, third(u1, u2).0)
    };
    if cost(&u) > 1.0 + COMPONENT_SLACK {
        return None;
    }
    let (fa, fb) = (u.norm(), (c - u).norm());
    let p = fa / (fa + fb);
    let first = unit(a) * (u[0] - la).copysign(t[a]) + unit(b) * u[1].copysign(t[b]) + unit(zero) * u[2].copysign(t[zero]);
    let rest = Vector3::from(t) - first;
    Some(vec![
        (p, CqChannel::new(first / p, unit(a) * (lambda[a] / p), unit(a))),
        (1.0 - p, CqChannel::new(rest / (1.0 - p), unit(b) * (lambda[b] / (1.0 - p)), unit(b))),
    ])
}

/// Full-rank block with translation along axis `k` only: mixture of the
/// corners of the square `|λ_a| + |λ_b| ≤ √((1−|λ_k|)² − t_k²)`.
fn square_split(t: [f64; 3], lambda: [f64; 3], k: usize) -> Option<Vec<(f64, CqChannel)>> {
    let (a, b) = ((k + 1) % 3, (k + 2) % 3);
    let half = (1.0 - lambda[k].abs()).powi(2) - t[k] * t[k];
    if half <= 0.0 {
        return None;
    }
    let side = half.sqrt();
    let (la, lb) = (lambda[a], lambda[b]);
    let rest = 1.0 - (la.abs() + lb.abs()) / side;
    if rest < -COMPONENT_SLACK {
        return None;
    }
    let rest = rest.max(0.0);
    let corner = |axis: usize, value: f64| {
        let mut l = [0.0; 3];
        l[k] = lambda[k];
        l[axis] = value;
        let zero = 3 - k - axis;
        planar_split(t, l, zero)
    };
    let mut parts = Vec::new();
    for (weight, axis, value) in [
        (la.abs() / side, a, side.copysign(la)),
        (lb.abs() / side, b, side.copysign(lb)),
        (rest / 2.0, a, side),
        (rest / 2.0, a, -side),
    ] {
        if weight <= 0.0 {
            continue;
        }
        for (w, c) in corner(axis, value)? {
            parts.push((weight * w, c));
        }
    }
    Some(parts)
}

fn constructive_canonical(t: [f64; 3], lambda: [f64; 3]) -> Option<Vec<(f64, CqChannel)>> {
    let tv = Vector3::from(t);
    let axes = nonzero_axes(&lambda, ZERO_LAMBDA_TOL);
    match axes.as_slice() {
        [] => return Some(vec![(1.0, CqChannel::new(tv, Vector3::zeros(), Vector3::z()))]),
        [k] => return Some(vec![(1.0, CqChannel::new(tv, unit(*k) * lambda[*k], unit(*k)))]),
        [a, b] => return planar_split(t, lambda, 3 - a - b),
        _ => {}
    }
    let t_axes: Vec<usize> = (0..3).filter(|&i| t[i].abs() > 1e-14).collect();
    match t_axes.as_slice() {
        [] => return square_split([0.0; 3], lambda, 2),
        [k] => return square_split(t, lambda, *k),
        _ => {}
    }
    let mags = lambda.map(f64::abs);
    let level = mags.iter().sum::<f64>() / 3.0;
    if mags.iter().all(|m| (m - level).abs() <= 1e-12) {
        // λ = ℓ ε Q with Q a proper sign rotation; absorb Q on the input,
        // then rotate t onto the first axis.
        let signs = lambda.map(|l| l.signum());
        let eps = signs.iter().product::<f64>();
        let q = Matrix3::from_diagonal(&Vector3::from(signs.map(|s| s * eps)));
        let r = align(&tv, &Vector3::x());
        let parts = square_split([tv.norm(), 0.0, 0.0], [level * eps; 3], 0)?;
        let inp = r * q;
        return Some(parts.into_iter().map(|(w, c)| (w, c.transformed(&r.transpose(), &inp))).collect());
    }
    None
}

const CONSTRUCTIVE_TOL: f64 = 1e-10;

/// Mixture of CQ channels by explicit recipes: points, lines, planar maps,
/// translation along a single axis, and equal `|λ_k|`.
pub fn decompose_constructive(cf: &CanonicalForm) -> Result<CqDecomposition> {
    match ebt_sign_change(cf, DEFAULT_TOL) {
        Ok(v) if v.is_ebt() => {}
        Ok(_) => return Err(Error::NotEbt),
        Err(Error::NotCp(_)) => return Err(Error::NotEbt),
        Err(e) => return Err(e),
    }
    let parts = constructive_canonical(cf.t, cf.lambda).ok_or(Error::NotCovered)?;
    let out = cf.rot_out.transpose();
    let parts: Vec<_> = parts.into_iter().map(|(w, c)| (w, c.transformed(&out, &cf.rot_in))).collect();
    let target = cf.reconstruct();
    let result = CqDecomposition::assemble(parts, &target);
    if result.residual > CONSTRUCTIVE_TOL || !result.components.iter().all(|c| c.is_valid(COMPONENT_SLACK)) {
        return Err(Error::NotCovered);
    }
    Ok(result)
}

/// Seed used by [`decompose_numeric`].
pub const DEFAULT_SEED: u64 = 42;
const SUM_ROW_WEIGHT: f64 = 1.0;
const RETRIES: usize = 3;

/// Fit by nonnegative least squares over sampled CQ channels, refined by
/// column generation with an exact pricing step and a final local polish.
pub fn decompose_numeric(cf: &CanonicalForm, n_candidates: usize, tol: f64) -> Result<CqDecomposition> {
    decompose_numeric_seeded(cf, n_candidates, tol, DEFAULT_SEED)
}

pub fn decompose_numeric_seeded(cf: &CanonicalForm, n_candidates: usize, tol: f64, seed: u64) -> Result<CqDecomposition> {
    let target = cf.reconstruct();
    let mut best: Option<CqDecomposition> = None;
    let mut n = n_candidates.max(1);
    for attempt in 0..RETRIES {
        let mut atoms = octahedron_vertices();
        atoms.extend(sample_candidates(n, seed.wrapping_add(attempt as u64)));
        let fit = fit_atoms(atoms, &target, tol);
        if fit.residual <= tol {
            return Ok(fit);
        }
        if best.as_ref().is_none_or(|b| fit.residual < b.residual) {
            best = Some(fit);
        }
        n *= 2;
    }
    let residual = best.map_or(f64::INFINITY, |b| b.residual);
    Err(Error::FitFailed { residual, candidates: n / 2 + 6 })
}

fn octahedron_vertices() -> Vec<CqChannel> {
    (0..6)
        .map(|i| {
            let sign = if i < 3 { 1.0 } else { -1.0 };
            CqChannel::new(Vector3::zeros(), unit(i % 3) * sign, unit(i % 3))
        })
        .collect()
}

/// Stratified: unital extreme maps, pure-output maps, and interior maps.
pub fn sample_candidates(n: usize, seed: u64) -> Vec<CqChannel> {
    par::map_range(n, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let axis = random_unit_vector(&mut rng);
        match i % 3 {
            0 => CqChannel::new(Vector3::zeros(), random_unit_vector(&mut rng), axis),
            1 => CqChannel::from_outputs(random_unit_vector(&mut rng), random_unit_vector(&mut rng), axis),
            _ => CqChannel::from_outputs(random_in_ball(&mut rng), random_in_ball(&mut rng), axis),
        }
    })
}

fn column(c: &CqChannel) -> DVector<f64> {
    let e = c.entries();
    DVector::from_iterator(13, e.into_iter().chain(std::iter::once(SUM_ROW_WEIGHT)))
}

fn target_vector(target: &PauliTransferMatrix) -> DVector<f64> {
    DVector::from_iterator(13, flatten(target).into_iter().chain(std::iter::once(SUM_ROW_WEIGHT)))
}

fn solve_weights(atoms: &[CqChannel], b: &DVector<f64>) -> (Vec<f64>, f64) {
    let cols: Vec<_> = atoms.iter().map(column).collect();
    let a = DMatrix::from_columns(&cols);
    let sol = nnls(&a, b);
    (sol.x.iter().copied().collect(), sol.residual_norm)
}

fn keep_active(atoms: Vec<CqChannel>, weights: Vec<f64>) -> (Vec<CqChannel>, Vec<f64>) {
    atoms.into_iter().zip(weights).filter(|(_, w)| *w > 0.0).unzip()
}

fn fit_atoms(atoms: Vec<CqChannel>, target: &PauliTransferMatrix, tol: f64) -> CqDecomposition {
    let b = target_vector(target);
    let (weights, _) = solve_weights(&atoms, &b);
    let (mut atoms, mut weights) = keep_active(atoms, weights);

    for _ in 0..300 {
        let assembled = mixture_vector(&atoms, &weights);
        let r = &b - assembled;
        if r.norm() <= tol * 1e-2 {
            break;
        }
        let (atom, gain) = price(&r);
        if gain + SUM_ROW_WEIGHT * r[12] <= 1e-15 {
            break;
        }
        atoms.push(atom);
        let (w, res) = solve_weights(&atoms, &b);
        let before = r.norm();
        (atoms, weights) = keep_active(atoms, w);
        if before - res <= 1e-16 {
            break;
        }
    }

    let mut parts: Vec<_> = weights.iter().copied().zip(atoms.iter().cloned()).collect();
    let provisional = CqDecomposition::assemble(parts.clone(), target);
    if provisional.residual > tol * 1e-2 {
        if let Some(polished) = polish(&parts, &b) {
            let candidate = CqDecomposition::assemble(polished.clone(), target);
            if candidate.residual < provisional.residual {
                parts = polished;
            }
        }
    }
    CqDecomposition::assemble(parts, target)
}

fn mixture_vector(atoms: &[CqChannel], weights: &[f64]) -> DVector<f64> {
    atoms.iter().zip(weights).fold(DVector::zeros(13), |acc, (c, w)| acc + column(c) * *w)
}

/// CQ channel maximizing `⟨r, entries⟩`: for a measurement axis `n` the best
/// outputs are `(g ± Hn)/|g ± Hn|`, leaving a smooth problem on the sphere.
fn price(r: &DVector<f64>) -> (CqChannel, f64) {
    let g = Vector3::new(r[0], r[4], r[8]);
    let h = Matrix3::from_fn(|i, j| r[4 * i + j + 1]);
    let value = |n: &Vector3<f64>| 0.5 * ((g + h * n).norm() + (g - h * n).norm());

    let count = 400;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut best = Vector3::z();
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..count {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
        let rad = (1.0 - z * z).sqrt();
        let phi = golden * i as f64;
        let n = Vector3::new(rad * phi.cos(), rad * phi.sin(), z);
        let v = value(&n);
        if v > best_val {
            best_val = v;
            best = n;
        }
    }

    let mut step = 0.2;
    for _ in 0..200 {
        let (p, m) = (g + h * best, g - h * best);
        let mut grad = Vector3::zeros();
        if p.norm() > 0.0 {
            grad += h.transpose() * p / p.norm();
        }
        if m.norm() > 0.0 {
            grad -= h.transpose() * m / m.norm();
        }
        grad *= 0.5;
        let tangent = grad - best * best.dot(&grad);
        if tangent.norm() < 1e-15 {
            break;
        }
        let trial = (best + tangent * step).normalize();
        let tv = value(&trial);
        if tv > best_val {
            best = trial;
            best_val = tv;
            step *= 1.5;
        } else {
            step *= 0.5;
            if step < 1e-14 {
                break;
            }
        }
    }
    let dir = |v: Vector3<f64>| v.try_normalize(0.0).unwrap_or_else(Vector3::zeros);
    let atom = CqChannel::from_outputs(dir(g + h * best), dir(g - h * best), best);
    (atom, best_val)
}

/// `v ↦ v sin|v| / |v|`, a smooth map of ℝ³ onto the closed unit ball.
fn ball(v: &Vector3<f64>) -> Vector3<f64> {
    let r = v.norm();
    if r < 1e-8 {
        v * (1.0 - r * r / 6.0)
    } else {
        v * (r.sin() / r)
    }
}

fn unball(w: &Vector3<f64>) -> Vector3<f64> {
    let r = w.norm();
    if r == 0.0 {
        return Vector3::zeros();
    }
    w * (r.min(1.0).asin() / r)
}

const PARAMS_PER_ATOM: usize = 10;

fn atoms_from_params(theta: &[f64]) -> Vec<(f64, CqChannel)> {
    theta
        .chunks(PARAMS_PER_ATOM)
        .map(|p| {
            let plus = ball(&Vector3::new(p[1], p[2], p[3]));
            let minus = ball(&Vector3::new(p[4], p[5], p[6]));
            let axis = Vector3::new(p[7], p[8], p[9]);
            (p[0] * p[0], CqChannel::from_outputs(plus, minus, axis))
        })
        .collect()
}

fn param_residual(theta: &[f64], b: &DVector<f64>) -> DVector<f64> {
    let parts = atoms_from_params(theta);
    let mut r = -b.clone();
    for (w, c) in &parts {
        r += column(c) * *w;
    }
    r
}

/// Levenberg–Marquardt on weights, outputs and axes of the active atoms.
fn polish(parts: &[(f64, CqChannel)], b: &DVector<f64>) -> Option<Vec<(f64, CqChannel)>> {
    if parts.is_empty() {
        return None;
    }
    let mut theta: Vec<f64> = Vec::with_capacity(parts.len() * PARAMS_PER_ATOM);
    for (w, c) in parts {
        let (p, m) = c.outputs();
        let (vp, vm) = (unball(&p), unball(&m));
        theta.push(w.max(0.0).sqrt());
        theta.extend(vp.iter().chain(vm.iter()).chain(c.axis.iter()));
    }
    let n = theta.len();
    let mut r = param_residual(&theta, b);
    let mut mu = 1e-6;
    let h = 1e-7;
    for _ in 0..200 {
        if r.norm() < 1e-14 {
            break;
        }
        let mut jac = DMatrix::zeros(13, n);
        for j in 0..n {
            let mut up = theta.clone();
            let mut dn = theta.clone();
            up[j] += h;
            dn[j] -= h;
            let col = (param_residual(&up, b) - param_residual(&dn, b)) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let jjt = &jac * jac.transpose();
        let mut improved = false;
        for _ in 0..20 {
            let sys = &jjt + DMatrix::identity(13, 13) * mu;
            let Some(y) = sys.lu().solve(&r) else {
                mu *= 10.0;
                continue;
            };
            let delta = jac.transpose() * y;
            let trial: Vec<f64> = theta.iter().zip(delta.iter()).map(|(t, d)| t - d).collect();
            let rt = param_residual(&trial, b);
            if rt.norm() < r.norm() {
                theta = trial;
                r = rt;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Some(atoms_from_params(&theta))
}
