//! Datasets for the `λ₊`-`λ₋` plane at fixed `t` and `λ₃`: grid scans,
//! complete-positivity boundaries, entanglement-breaking lenses, and polygon
//! helpers for comparing them.

use std::f64::consts::{SQRT_2, TAU};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::canonical::CanonicalForm;
use crate::cp::{choi_psd, contraction_matrix, cp_via_contraction};
use crate::ebt::ebt_sign_change;
use crate::{par, Error, Result, DEFAULT_TOL};

pub type Point2 = [f64; 2];

/// Sign pattern of `(m₁₁, m₂₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    PlusPlus,
    PlusMinus,
    MinusPlus,
    MinusMinus,
}

impl Region {
    pub fn from_signs(m11: f64, m22: f64, tol: f64) -> Self {
        match (m11 >= -tol, m22 >= -tol) {
            (true, true) => Self::PlusPlus,
            (true, false) => Self::PlusMinus,
            (false, true) => Self::MinusPlus,
            (false, false) => Self::MinusMinus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::PlusPlus => "++",
            Self::PlusMinus => "+-",
            Self::MinusPlus => "-+",
            Self::MinusMinus => "--",
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

impl Serialize for Region {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionSample {
    #[serde(rename = "lp")]
    pub lambda_plus: f64,
    #[serde(rename = "lm")]
    pub lambda_minus: f64,
    pub m11: f64,
    pub m22: f64,
    #[serde(rename = "detm")]
    pub det_m: f64,
    pub region: Region,
    pub cp: bool,
    pub ebt: bool,
}

impl RegionSample {
    pub fn det_ok(&self, tol: f64) -> bool {
        self.det_m >= -tol
    }
}

/// Square grid over `[−extent, extent]²`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub resolution: usize,
    pub extent: f64,
}

impl Grid {
    pub fn new(resolution: usize) -> Self {
        Self { resolution, extent: 2.0 }
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        if self.resolution < 2 {
            return 0.0;
        }
        -self.extent + 2.0 * self.extent * i as f64 / (self.resolution - 1) as f64
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.resolution.max(2) - 1) as f64
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self::new(400)
    }
}

/// `(λ₁, λ₂)` from `(λ₊, λ₋)`.
pub fn split_plus_minus(lp: f64, lm: f64) -> (f64, f64) {
    (0.5 * (lp + lm), 0.5 * (lp - lm))
}

fn form(t: [f64; 3], lambda3: f64, lp: f64, lm: f64) -> CanonicalForm {
    let (l1, l2) = split_plus_minus(lp, lm);
    CanonicalForm::from_params(t, [l1, l2, lambda3])
}

fn check_interior(t: [f64; 3], lambda3: f64) -> Result<()> {
    let edge = t[2].abs() + lambda3.abs();
    if edge >= 1.0 {
        return Err(Error::DegenerateEdge(edge));
    }
    Ok(())
}

/// Fraction of grid nodes cross-checked against the Choi spectrum.
const CROSS_CHECK_RATE: f64 = 0.01;

/// Evaluates the contraction data, complete positivity and entanglement
/// breaking at every grid node, in row-major order (`λ₊` outer).
pub fn scan_plane(t: [f64; 3], lambda3: f64, grid: Grid, seed: u64) -> Result<Vec<RegionSample>> {
    scan_plane_with_tol(t, lambda3, grid, seed, DEFAULT_TOL)
}

pub fn scan_plane_with_tol(t: [f64; 3], lambda3: f64, grid: Grid, seed: u64, tol: f64) -> Result<Vec<RegionSample>> {
    check_interior(t, lambda3)?;
    let n = grid.resolution;
    let rows: Vec<Result<Vec<RegionSample>>> = par::map_range(n, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        (0..n)
            .map(|j| {
                let (lp, lm) = (grid.coordinate(i), grid.coordinate(j));
                let cf = form(t, lambda3, lp, lm);
                let data = contraction_matrix(&cf)?;
                let verdict = cp_via_contraction(&cf, tol);
                if rng.random::<f64>() < CROSS_CHECK_RATE {
                    let oracle = choi_psd(&cf.transfer(), tol).verdict;
                    let decided = [verdict, oracle].iter().all(|v| *v != crate::CpVerdict::Boundary);
                    if decided && verdict != oracle {
                        return Err(Error::Inconsistent(format!(
                            "contraction and Choi tests disagree at lp={lp}, lm={lm}"
                        )));
                    }
                }
                let cp = verdict.is_cp();
                let ebt = cp && ebt_sign_change(&cf, tol).is_ok_and(|v| v.is_ebt());
                Ok(RegionSample {
                    lambda_plus: lp,
                    lambda_minus: lm,
                    m11: data.m11(),
                    m22: data.m22(),
                    det_m: data.det_m(),
                    region: Region::from_signs(data.m11(), data.m22(), tol),
                    cp,
                    ebt,
                })
            })
            .collect()
    });
    let mut out = Vec::with_capacity(n * n);
    for row in rows {
        out.extend(row?);
    }
    Ok(out)
}

/// CSV with columns `lp,lm,m11,m22,detm,region,cp,ebt`.
pub fn write_scan_csv<W: Write>(samples: &[RegionSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        w.serialize(s).map_err(|e| Error::Inconsistent(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Inconsistent(e.to_string()))
}

/// CSV with columns `lp,lm`.
pub fn write_polyline_csv<W: Write>(points: &[Point2], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lp", "lm"]).map_err(|e| Error::Inconsistent(e.to_string()))?;
    for p in points {
        w.serialize(p).map_err(|e| Error::Inconsistent(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Inconsistent(e.to_string()))
}

/// Largest reachable radius: `|λ₁|, |λ₂| ≤ 1` bounds `|λ±| ≤ 2`.
const MAX_RADIUS: f64 = 2.0 * SQRT_2;
const RADIUS_TOL: f64 = 1e-10;
const PSD_SLACK: f64 = 1e-13;

fn is_cp_at(t: [f64; 3], lambda3: f64, p: Point2) -> bool {
    choi_psd(&form(t, lambda3, p[0], p[1]).transfer(), 0.0).min_eigenvalue >= -PSD_SLACK
}

fn is_lens_at(t: [f64; 3], lambda3: f64, p: Point2) -> bool {
    is_cp_at(t, lambda3, p) && is_cp_at(t, lambda3, [p[1], p[0]])
}

/// Outermost radius along `angle` at which `inside` still holds.
fn bisect_ray(angle: f64, inside: &impl Fn(Point2) -> bool) -> f64 {
    let dir = [angle.cos(), angle.sin()];
    let at = |r: f64| [r * dir[0], r * dir[1]];
    let (mut lo, mut hi) = (0.0, MAX_RADIUS);
    if inside(at(hi)) {
        return hi;
    }
    while hi - lo > RADIUS_TOL {
        let mid = 0.5 * (lo + hi);
        if inside(at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn trace(n_rays: usize, inside: impl Fn(Point2) -> bool + Sync) -> Vec<Point2> {
    par::map_range(n_rays, |i| {
        let angle = TAU * i as f64 / n_rays as f64;
        let r = bisect_ray(angle, &inside);
        [r * angle.cos(), r * angle.sin()]
    })
}

fn check_trace_pre(t: [f64; 3], lambda3: f64) -> Result<()> {
    let edge = t[2].abs() + lambda3.abs();
    if edge > 1.0 + 1e-12 {
        return Err(Error::DegenerateEdge(edge));
    }
    if !is_cp_at(t, lambda3, [0.0, 0.0]) {
        return Err(Error::OriginNotCp);
    }
    Ok(())
}

/// Boundary of the completely positive set by radial bisection on the Choi
/// spectrum, vertices in counterclockwise angular order.
pub fn trace_boundary(t: [f64; 3], lambda3: f64, n_rays: usize) -> Result<Vec<Point2>> {
    check_trace_pre(t, lambda3)?;
    Ok(trace(n_rays, |p| is_cp_at(t, lambda3, p)))
}

/// Boundary of the set that stays completely positive under `λ₊ ↔ λ₋`.
pub fn ebt_lens(t: [f64; 3], lambda3: f64, n_rays: usize) -> Result<Vec<Point2>> {
    check_trace_pre(t, lambda3)?;
    Ok(trace(n_rays, |p| is_lens_at(t, lambda3, p)))
}

/// Boundary radii along `+λ₊`, `+λ₋`, `−λ₊`, `−λ₋`.
pub fn axis_crossings(t: [f64; 3], lambda3: f64) -> Result<[f64; 4]> {
    check_trace_pre(t, lambda3)?;
    Ok([0, 1, 2, 3].map(|k| bisect_ray(k as f64 * TAU / 4.0, &|p| is_cp_at(t, lambda3, p))))
}

/// Lens radii along `+λ₊`, `+λ₋`, `−λ₊`, `−λ₋`.
pub fn lens_axis_crossings(t: [f64; 3], lambda3: f64) -> Result<[f64; 4]> {
    check_trace_pre(t, lambda3)?;
    Ok([0, 1, 2, 3].map(|k| bisect_ray(k as f64 * TAU / 4.0, &|p| is_lens_at(t, lambda3, p))))
}

/// Convex hull of the lens boundary points on the diagonals `λ₊ = ±λ₋`
/// (where `λ₂ = 0` or `λ₁ = 0`).
pub fn lens_parallelogram(t: [f64; 3], lambda3: f64) -> Result<Vec<Point2>> {
    check_trace_pre(t, lambda3)?;
    Ok((0..4)
        .map(|k| {
            let angle = TAU / 8.0 + k as f64 * TAU / 4.0;
            let r = bisect_ray(angle, &|p| is_lens_at(t, lambda3, p));
            [r * angle.cos(), r * angle.sin()]
        })
        .collect())
}

/// Convex hull of the lens boundary points on both axes and both diagonals.
pub fn lens_octagon(t: [f64; 3], lambda3: f64) -> Result<Vec<Point2>> {
    check_trace_pre(t, lambda3)?;
    Ok((0..8)
        .map(|k| {
            let angle = k as f64 * TAU / 8.0;
            let r = bisect_ray(angle, &|p| is_lens_at(t, lambda3, p));
            [r * angle.cos(), r * angle.sin()]
        })
        .collect())
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Shoelace area, positive for counterclockwise order.
pub fn polygon_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    0.5 * (0..n).map(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        a[0] * b[1] - b[0] * a[1]
    })
    .sum::<f64>()
}

/// Counterclockwise convex polygon, allowing `slack` in each turn.
pub fn is_convex(poly: &[Point2], slack: f64) -> bool {
    let n = poly.len();
    (0..n).all(|i| cross(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]) >= -slack)
}

/// Point in a counterclockwise convex polygon, allowing distance `slack` outside.
pub fn contains_point(poly: &[Point2], p: Point2, slack: f64) -> bool {
    let n = poly.len();
    (0..n).all(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        len == 0.0 || cross(a, b, p) / len >= -slack
    })
}

/// Counterclockwise convex hull (monotone chain), dropping collinear points.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Sutherland–Hodgman clip of `subject` by the convex hull of `clip`.
///
/// Taking the hull first keeps tiny, noise-oriented edges of a nearly
/// convex clipper from cutting away valid area.
pub fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let clip = convex_hull(clip);
    let mut out = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % m]);
        let input = std::mem::take(&mut out);
        let k = input.len();
        for j in 0..k {
            let (p, q) = (input[j], input[(j + 1) % k]);
            let (dp, dq) = (cross(a, b, p), cross(a, b, q));
            if dp >= 0.0 {
                out.push(p);
            }
            if (dp >= 0.0) != (dq >= 0.0) {
                let s = dp / (dp - dq);
                out.push([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]);
            }
        }
    }
    out
}

/// Reflection across `λ₊ = λ₋`, order reversed to stay counterclockwise.
pub fn swap_reflect(poly: &[Point2]) -> Vec<Point2> {
    poly.iter().rev().map(|p| [p[1], p[0]]).collect()
}

/// `area(A) + area(B) − 2 area(A ∩ B)` for convex counterclockwise polygons.
pub fn symmetric_difference_area(a: &[Point2], b: &[Point2]) -> f64 {
    polygon_area(a) + polygon_area(b) - 2.0 * polygon_area(&clip_convex(a, b))
}
