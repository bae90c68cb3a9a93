use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qebt::channel::{adjoint, choi_of};
use qebt::cp::contraction_matrix;
use qebt::decompose::{decompose_numeric_seeded, is_generalized_extreme, split_midpoint};
use qebt::ebt::{classify_geometry, ebt_sum_lambda, GeometryKind};
use qebt::holevo::{build_qc, qc_to_cq, EnsembleItem};
use qebt::polytope::{enumerate_vertices, polytope_data, PolytopeKind};
use qebt::region::{contains_point, polygon_area, swap_reflect, symmetric_difference_area, trace_boundary, ebt_lens, clip_convex, scan_plane, Grid};
use qebt::sampling::{random_cp, random_ebt, random_rotation};
use qebt::*;

const TOL: f64 = 1e-9;
const BAND: f64 = 1e-8;

fn unit() -> impl Strategy<Value = f64> {
    -1.0f64..=1.0
}

fn params() -> impl Strategy<Value = ([f64; 3], [f64; 3])> {
    ([unit(), unit(), unit()], [unit(), unit(), unit()])
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn min_eig(t: [f64; 3], l: [f64; 3]) -> f64 {
    choi_psd(&channel_from_canonical(t, l), 0.0).min_eigenvalue
}

fn cp_status(t: [f64; 3], l: [f64; 3]) -> Option<bool> {
    let e = min_eig(t, l);
    (e.abs() > BAND).then_some(e > 0.0)
}

fn general_transfer(entries: [f64; 12]) -> PauliTransferMatrix {
    let mut m = Matrix4::zeros();
    m[(0, 0)] = 1.0;
    for (k, x) in entries.iter().enumerate() {
        m[(1 + k / 4, k % 4)] = *x;
    }
    PauliTransferMatrix::new(m).unwrap()
}

fn rotated(t: [f64; 3], l: [f64; 3], seed: u64) -> PauliTransferMatrix {
    let mut r = rng(seed);
    let cf = CanonicalForm { t, lambda: l, rot_out: random_rotation(&mut r), rot_in: random_rotation(&mut r) };
    cf.reconstruct()
}

fn ebt_status(ch: &PauliTransferMatrix) -> Option<bool> {
    let v = ebt_ppt(ch, 0.0).ok()?;
    let margin = choi_psd(&ch.compose_transpose(), 0.0).min_eigenvalue;
    (margin.abs() > BAND).then_some(v.is_ebt())
}

fn hermitian(a: [f64; 4]) -> Matrix2<C64> {
    Matrix2::new(
        C64::new(a[0] + a[3], 0.0),
        C64::new(a[1], -a[2]),
        C64::new(a[1], a[2]),
        C64::new(a[0] - a[3], 0.0),
    )
}

fn hs(a: &Matrix2<C64>, b: &Matrix2<C64>) -> C64 {
    (a.adjoint() * b).trace()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn choi_round_trip(e in prop::array::uniform12(unit())) {
        let ch = general_transfer(e);
        let back = choi_of(&ch).to_transfer();
        prop_assert!(ch.frobenius_distance(&back) < 1e-12);
        prop_assert!((choi_of(&ch).trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_preserved(e in prop::array::uniform12(unit()), v in [unit(), unit(), unit()]) {
        let v = Vector3::from(v);
        let v = if v.norm() > 1.0 { v / v.norm() } else { v };
        let rho = BlochVector::from_vector(&v).density_operator();
        let out = general_transfer(e).apply_operator(rho.matrix());
        prop_assert!((out.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn adjoint_involution_and_pairing(e in prop::array::uniform12(unit()), a in prop::array::uniform4(unit()), b in prop::array::uniform4(unit())) {
        let ch = general_transfer(e);
        let adj = adjoint(&ch);
        prop_assert_eq!(adj.transpose(), *ch.matrix());
        let (a, b) = (hermitian(a), hermitian(b));
        let adj_map = PauliTransferMatrix::from_matrix_unchecked(adj);
        let lhs = hs(&ch.apply_operator(&a), &b);
        let rhs = hs(&a, &adj_map.apply_operator(&b));
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn canonical_reconstructs(e in prop::array::uniform12(unit())) {
        let ch = general_transfer(e);
        let cf = to_canonical(&ch);
        prop_assert!(cf.reconstruct().frobenius_distance(&ch) < 1e-12);
        for r in [cf.rot_out, cf.rot_in] {
            prop_assert!((r.transpose() * r - Matrix3::identity()).norm() < 1e-12);
            prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
        }
        prop_assert!(cf.lambda[0].abs() >= cf.lambda[1].abs() && cf.lambda[1].abs() >= cf.lambda[2].abs());
    }

    #[test]
    fn cp_and_ebt_basis_invariant((t, l) in params(), seed in any::<u64>()) {
        let plain = channel_from_canonical(t, l);
        let turned = rotated(t, l, seed);
        if let Some(cp) = cp_status(t, l) {
            prop_assert_eq!(choi_psd(&turned, 0.0).min_eigenvalue > 0.0, cp);
            if cp {
                if let (Some(a), Some(b)) = (ebt_status(&plain), ebt_status(&turned)) {
                    prop_assert_eq!(a, b);
                }
            }
        }
        let back = to_canonical(&turned);
        prop_assert!(back.reconstruct().frobenius_distance(&turned) < 1e-12);
    }

    #[test]
    fn contraction_matches_choi((t, l) in params()) {
        prop_assume!(t[2].abs() + l[2].abs() < 0.98);
        if let Some(cp) = cp_status(t, l) {
            let cf = CanonicalForm::from_params(t, l);
            prop_assert_eq!(cp_via_contraction(&cf, TOL).is_cp(), cp);
        }
    }

    #[test]
    fn cp_permutation_symmetric((t, l) in params(), perm in 0usize..6) {
        let p = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]][perm];
        let tp = p.map(|i| t[i]);
        let lp = p.map(|i| l[i]);
        if let (Some(a), Some(b)) = (cp_status(t, l), cp_status(tp, lp)) {
            prop_assert_eq!(a, b);
        }
        prop_assert!((min_eig(t, l) - min_eig(tp, lp)).abs() < 1e-12);
    }

    #[test]
    fn cp_sign_symmetries((t, l) in params(), k in 0usize..3) {
        let mut tf = t;
        tf[k] = -tf[k];
        let mut lf = l;
        lf[(k + 1) % 3] = -lf[(k + 1) % 3];
        lf[(k + 2) % 3] = -lf[(k + 2) % 3];
        prop_assert!((min_eig(t, l) - min_eig(tf, l)).abs() < 1e-12);
        prop_assert!((min_eig(t, l) - min_eig(t, lf)).abs() < 1e-12);
    }

    #[test]
    fn determinant_from_either_product((t, l) in params()) {
        prop_assume!(t[2].abs() + l[2].abs() < 0.99);
        let data = contraction_matrix(&CanonicalForm::from_params(t, l)).unwrap();
        prop_assert!((data.det_m() - data.det_m_swapped()).abs() < 1e-10 * (1.0 + data.det_m().abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn four_criteria_agree(seed in any::<u64>()) {
        let cf = random_cp(&mut rng(seed));
        let separated = std::iter::once(cf.clone()).chain((0..3).map(|k| cf.flip(k)))
            .all(|c| choi_psd(&c.transfer(), 0.0).min_eigenvalue.abs() > BAND);
        prop_assume!(separated);
        let ch = cf.transfer();
        let v = [
            ebt_sign_change(&cf, TOL).unwrap(),
            ebt_ppt(&ch, TOL).unwrap(),
            ebt_choi_bound(&ch, TOL).unwrap(),
            ebt_region_intersection(&cf, TOL).unwrap(),
        ];
        prop_assert!(v.iter().all(|x| *x == v[0]), "{:?}", v);
        if v[0].is_ebt() {
            prop_assert!(ebt_sum_lambda(&cf, TOL).necessary_pass);
        }
    }

    #[test]
    fn ebt_needs_small_lambda_sum(seed in any::<u64>()) {
        let cf = random_ebt(&mut rng(seed));
        prop_assert!(cf.lambda_abs_sum() <= 1.0 + 1e-9);
    }

    #[test]
    fn planar_cp_is_ebt(seed in any::<u64>(), k in 0usize..3) {
        let mut r = rng(seed);
        let cf = loop {
            let (t, mut l) = qebt::sampling::uniform_params(&mut r);
            l[k] = 0.0;
            let cf = CanonicalForm::from_params(t, l);
            if choi_psd(&cf.transfer(), 0.0).verdict.is_cp() {
                break cf;
            }
        };
        prop_assert!(ebt_ppt(&cf.transfer(), TOL).unwrap().is_ebt());
        prop_assert!(ebt_sign_change(&cf, TOL).unwrap().is_ebt());
        prop_assert_eq!(classify_geometry(&cf, ZERO_LAMBDA_TOL).unwrap().kind == GeometryKind::Full, false);
    }

    #[test]
    fn unital_law(l in [unit(), unit(), unit()]) {
        let cf = CanonicalForm::from_params([0.0; 3], l);
        prop_assume!(choi_psd(&cf.transfer(), 0.0).min_eigenvalue > BAND);
        let s = cf.lambda_abs_sum();
        prop_assume!((s - 1.0).abs() > TOL);
        let decisive = ebt_sum_lambda(&cf, TOL).decisive.unwrap();
        prop_assert_eq!(decisive.is_ebt(), s < 1.0);
        prop_assert_eq!(ebt_ppt(&cf.transfer(), TOL).unwrap().is_ebt(), s < 1.0);
    }

    #[test]
    fn qc_equivalent_to_cq(u0 in 0.001f64..0.999, dir in [unit(), unit(), unit()], frac in 0.0f64..=1.0) {
        let d = Vector3::from(dir);
        prop_assume!(d.norm() > 1e-3);
        let u = d / d.norm() * frac * u0.min(1.0 - u0);
        let qc = build_qc(u0, u.into()).unwrap();
        let qc_cf = to_canonical(&qc.original_transfer().unwrap());
        let qc_geom = classify_geometry(&qc_cf, ZERO_LAMBDA_TOL).unwrap();
        prop_assert!(qc_geom.is_qc);
        let t_along: f64 = qc_cf.t.iter().sum();
        let pair = qc_to_cq(t_along, qc_cf.lambda[0]).unwrap();
        let cq_cf = to_canonical(&ensemble_to_transfer(&pair.cq()).unwrap());
        prop_assert!(classify_geometry(&cq_cf, ZERO_LAMBDA_TOL).unwrap().is_cq);
        prop_assert!((qc_cf.t_norm() - cq_cf.t_norm()).abs() < 1e-10);
        for k in 0..3 {
            prop_assert!((qc_cf.lambda[k].abs() - cq_cf.lambda[k].abs()).abs() < 1e-10);
        }
    }

    #[test]
    fn ensembles_break_entanglement(seed in any::<u64>(), pairs in 1usize..5) {
        let ens = random_ensemble(seed, pairs);
        ens.validate().unwrap();
        let row0 = ens.product().row(0).into_owned();
        for (j, target) in [1.0, 0.0, 0.0, 0.0].iter().enumerate() {
            prop_assert!((row0[j] - target).abs() < 1e-12);
        }
        let ch = ensemble_to_transfer(&ens).unwrap();
        let cf = to_canonical(&ch);
        prop_assert!(cf.lambda_abs_sum() <= 1.0 + 1e-12);
        prop_assert!(ebt_ppt(&ch, TOL).unwrap().is_ebt());
        prop_assert!(ebt_choi_bound(&ch, TOL).unwrap().is_ebt());
        prop_assert!(ebt_region_intersection(&cf, TOL).unwrap().is_ebt());
        prop_assert!(ebt_sign_change(&cf, TOL).unwrap().is_ebt());

        let mut broken = ens.clone();
        broken.items[0].u0 += 1e-3;
        prop_assert!(broken.validate().is_err());
        prop_assert!((broken.product()[(0, 0)] - 1.0).abs() > 1e-6);
    }

    #[test]
    fn midpoint_matches_adjoint_choi(seed in any::<u64>()) {
        let cf = random_cp(&mut rng(seed));
        prop_assume!(cf.t[2].abs() + cf.lambda[2].abs() < 0.999);
        let (p, m) = split_midpoint(&cf).unwrap();
        let avg = ChoiMatrix::from_matrix((p.matrix() + m.matrix()) * C64::new(0.5, 0.0));
        prop_assert!(avg.distance(&ChoiMatrix::of_map(&cf.transfer().adjoint())) < 1e-10);
    }

    #[test]
    fn pure_output_cq_channels_are_extreme(a in 0.0f64..std::f64::consts::TAU, b in 0.0f64..std::f64::consts::TAU, c in -1.0f64..=1.0) {
        let on_sphere = |x: f64, z: f64| Vector3::new(x, 0.0, z);
        let plus = on_sphere(a.cos(), a.sin());
        let minus = on_sphere(b.cos(), b.sin());
        prop_assume!((plus - minus).norm() > 1e-3);
        let axis = Vector3::new(c, (1.0 - c * c).sqrt(), 0.0);
        let ch = CqChannel::from_outputs(plus, minus, axis).transfer();
        let cf = to_canonical(&ch);
        prop_assume!(cf.t[2].abs() + cf.lambda[2].abs() < 1.0 - 1e-9);
        let ext = is_generalized_extreme(&cf, 1e-7).unwrap();
        if ext.extreme {
            prop_assert!(classify_geometry(&cf, ZERO_LAMBDA_TOL).unwrap().is_cq);
        }
    }
}

fn random_ensemble(seed: u64, pairs: usize) -> HolevoEnsemble {
    use rand::Rng;
    let mut r = rng(seed);
    let mut weights: Vec<f64> = (0..pairs).map(|_| r.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut items = Vec::new();
    for p in weights {
        let u0: f64 = r.random_range(0.0..=1.0);
        let u = qebt::sampling::random_in_ball(&mut r) * u0.min(1.0 - u0);
        for s in [1.0, -1.0] {
            let base = if s > 0.0 { u0 } else { 1.0 - u0 };
            items.push(EnsembleItem {
                w: qebt::sampling::random_in_ball(&mut r).into(),
                u0: p * base,
                u: (u * (s * p)).into(),
            });
        }
    }
    HolevoEnsemble::new(items)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn numeric_decomposition_sound(seed in any::<u64>()) {
        let cf = random_ebt(&mut rng(seed));
        let dec = decompose_numeric_seeded(&cf, 500, 1e-6, seed).unwrap();
        prop_assert!(dec.residual <= 1e-6);
        prop_assert!((dec.weight_sum() - 1.0).abs() <= 1e-12);
        prop_assert!(dec.weights.iter().all(|w| *w >= 0.0));
        prop_assert!(dec.transfer().distance(&cf.transfer()) <= 1e-6);
        for comp in &dec.components {
            prop_assert!(comp.is_valid(1e-9));
            let ccf = to_canonical(&comp.transfer());
            let g = classify_geometry(&ccf, 1e-8);
            prop_assert!(g.map(|g| g.is_cq).unwrap_or(false), "{:?}", comp);
            prop_assert!(ebt_ppt(&comp.transfer(), 1e-8).unwrap().is_ebt());
        }
    }

    #[test]
    fn scanned_cp_nodes_inside_boundary(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (t, l3) = loop {
            let (t, l) = qebt::sampling::uniform_params(&mut r);
            let (t, l3) = ([t[0] * 0.6, t[1] * 0.6, t[2] * 0.5], l[2] * 0.4);
            if min_eig(t, [0.0, 0.0, l3]) > 1e-6 {
                break (t, l3);
            }
        };
        let grid = Grid::new(41);
        let poly = trace_boundary(t, l3, 180).unwrap();
        prop_assert!(qebt::region::is_convex(&poly, 1e-8));
        for s in scan_plane(t, l3, grid, seed).unwrap() {
            if s.cp {
                prop_assert!(contains_point(&poly, [s.lambda_plus, s.lambda_minus], 2.0 * grid.spacing()));
                prop_assert_eq!(s.region.label(), "++");
            }
        }
    }
}

#[test]
fn lens_is_cp_region_meet_its_mirror() {
    for (t, l3) in [([0.4, 0.3, 0.0], 0.15), ([0.2, 0.3, 0.0], 0.35), ([0.1, -0.2, 0.3], 0.2)] {
        let cp = trace_boundary(t, l3, 720).unwrap();
        let lens = ebt_lens(t, l3, 720).unwrap();
        let meet = clip_convex(&cp, &swap_reflect(&cp));
        let diff = symmetric_difference_area(&lens, &meet);
        assert!(diff <= 0.01 * polygon_area(&lens), "{t:?} {l3}: {diff} vs {}", polygon_area(&lens));
    }
}

#[test]
fn octahedron_is_tetrahedron_meet_inverse() {
    let tet = &polytope_data(PolytopeKind::Tetrahedron)[0];
    let inv = &polytope_data(PolytopeKind::Inverted)[0];
    let oct = &polytope_data(PolytopeKind::Octahedron)[0];
    let facets: Vec<_> = tet.facets.iter().chain(&inv.facets).cloned().collect();
    let mut meet = enumerate_vertices(&facets);
    let mut expect = oct.vertices.clone();
    meet.sort();
    expect.sort();
    assert_eq!(meet, expect);
    for v in &oct.vertices {
        assert!(tet.contains(v) && inv.contains(v));
    }
}

#[test]
fn classification_json_is_stable() {
    let ch = channel_from_canonical([0.2, 0.3, 0.0], [0.1, 0.2, 0.35]);
    let a = qebt::io::to_json(&classify(&ch, TOL));
    let b = qebt::io::to_json(&classify(&ch, TOL));
    assert_eq!(a, b);
    let value: serde_json::Value = serde_json::from_str(&a).unwrap();
    let keys: Vec<_> = value.as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys, ["cp", "cp_verdict", "criteria", "det_m", "ebt", "ebt_verdict", "geometry", "m11", "m22", "min_choi_eig"]);
    let positions: Vec<_> = ["\"cp\"", "\"min_choi_eig\"", "\"m11\"", "\"ebt\"", "\"criteria\"", "\"geometry\""]
        .iter()
        .map(|k| a.find(k).unwrap())
        .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
    let float = |s: &str| s.trim_start_matches('-').split('e').next().unwrap().replace('.', "").len();
    let m11 = a.split("\"m11\":").nth(1).unwrap().split(',').next().unwrap();
    assert_eq!(float(m11), 17);
}
