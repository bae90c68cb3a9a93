//! Exact vertex and facet data for the unital polytopes in `λ`-space.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Serialize, Serializer};

pub type Point = [Rational64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PolytopeKind {
    /// Completely positive unital maps.
    Tetrahedron,
    /// The tetrahedron reflected through the origin.
    Inverted,
    /// Entanglement-breaking unital maps.
    Octahedron,
    /// The four pieces of the tetrahedron outside the octahedron.
    CornerTetrahedra,
}

impl FromStr for PolytopeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tetrahedron" => Ok(Self::Tetrahedron),
            "inverted" => Ok(Self::Inverted),
            "octahedron" => Ok(Self::Octahedron),
            "corner_tetrahedra" | "corner-tetrahedra" | "corners" => Ok(Self::CornerTetrahedra),
            other => Err(format!("unknown polytope kind '{other}'")),
        }
    }
}

/// Half-space `normal · λ ≤ offset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet {
    pub normal: [i64; 3],
    pub offset: i64,
}

impl Facet {
    pub fn value(&self, p: &Point) -> Rational64 {
        (0..3).map(|i| p[i] * self.normal[i]).sum()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.value(p) <= Rational64::from_integer(self.offset)
    }

    pub fn is_tight(&self, p: &Point) -> bool {
        self.value(p) == Rational64::from_integer(self.offset)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polytope {
    pub vertices: Vec<Point>,
    pub facets: Vec<Facet>,
}

impl Polytope {
    pub fn contains(&self, p: &Point) -> bool {
        self.facets.iter().all(|f| f.contains(p))
    }

    /// Floating-point membership with slack.
    pub fn contains_f64(&self, p: &[f64; 3], slack: f64) -> bool {
        self.facets.iter().all(|f| (0..3).map(|i| f.normal[i] as f64 * p[i]).sum::<f64>() <= f.offset as f64 + slack)
    }
}

struct Exact<'a>(&'a Rational64);

impl fmt::Display for Exact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Serialize for Polytope {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct FacetRepr {
            normal: [i64; 3],
            offset: i64,
        }
        #[derive(Serialize)]
        struct Repr {
            vertices: Vec<[String; 3]>,
            facets: Vec<FacetRepr>,
        }
        Repr {
            vertices: self.vertices.iter().map(|v| v.each_ref().map(|x| Exact(x).to_string())).collect(),
            facets: self.facets.iter().map(|f| FacetRepr { normal: f.normal, offset: f.offset }).collect(),
        }
        .serialize(s)
    }
}

fn q(v: [i64; 3]) -> Point {
    v.map(Rational64::from_integer)
}

fn sign_vectors() -> impl Iterator<Item = [i64; 3]> {
    (0..8).map(|m| [0, 1, 2].map(|k| if m >> k & 1 == 1 { -1 } else { 1 }))
}

const TETRA_VERTICES: [[i64; 3]; 4] = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]];

fn tetrahedron(parity: i64) -> Polytope {
    let facets = sign_vectors()
        .filter(|n| n[0] * n[1] * n[2] == -parity)
        .map(|normal| Facet { normal, offset: 1 })
        .collect();
    let vertices = TETRA_VERTICES.iter().map(|v| q(v.map(|x| x * parity))).collect();
    Polytope { vertices, facets }
}

fn octahedron() -> Polytope {
    let vertices = (0..6)
        .map(|i| {
            let mut v = [0; 3];
            v[i % 3] = if i < 3 { 1 } else { -1 };
            q(v)
        })
        .collect();
    let facets = sign_vectors().map(|normal| Facet { normal, offset: 1 }).collect();
    Polytope { vertices, facets }
}

fn corner(v: [i64; 3]) -> Polytope {
    let mut vertices = vec![q(v)];
    for i in 0..3 {
        let mut e = [0; 3];
        e[i] = v[i];
        vertices.push(q(e));
    }
    let mut facets = vec![Facet { normal: v.map(|x| -x), offset: -1 }];
    for n in [[1, 1, -1], [1, -1, 1], [-1, 1, 1]] {
        facets.push(Facet { normal: [0, 1, 2].map(|k| v[k] * n[k]), offset: 1 });
    }
    Polytope { vertices, facets }
}

/// One polytope, or four pieces for [`PolytopeKind::CornerTetrahedra`].
pub fn polytope_data(kind: PolytopeKind) -> Vec<Polytope> {
    match kind {
        PolytopeKind::Tetrahedron => vec![tetrahedron(1)],
        PolytopeKind::Inverted => vec![tetrahedron(-1)],
        PolytopeKind::Octahedron => vec![octahedron()],
        PolytopeKind::CornerTetrahedra => TETRA_VERTICES.iter().map(|&v| corner(v)).collect(),
    }
}

fn det3(m: &[[Rational64; 3]; 3]) -> Rational64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Vertices of `{λ : every facet holds}` by solving each facet triple exactly.
pub fn enumerate_vertices(facets: &[Facet]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::new();
    let n = facets.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let rows = [&facets[i], &facets[j], &facets[k]];
                let a = rows.map(|f| f.normal.map(Rational64::from_integer));
                let d = det3(&a);
                if d == Rational64::from_integer(0) {
                    continue;
                }
                let rhs = rows.map(|f| Rational64::from_integer(f.offset));
                let p: Point = std::array::from_fn(|c| {
                    let mut m = a;
                    for r in 0..3 {
                        m[r][c] = rhs[r];
                    }
                    det3(&m) / d
                });
                if facets.iter().all(|f| f.contains(&p)) && !out.contains(&p) {
                    out.push(p);
                }
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Point>) -> Vec<Point> {
        v.sort();
        v
    }

    #[test]
    fn listed_vertices_match_enumeration() {
        for kind in [PolytopeKind::Tetrahedron, PolytopeKind::Inverted, PolytopeKind::Octahedron, PolytopeKind::CornerTetrahedra] {
            for p in polytope_data(kind) {
                assert_eq!(enumerate_vertices(&p.facets), sorted(p.vertices.clone()), "{kind:?}");
                for v in &p.vertices {
                    assert!(p.facets.iter().filter(|f| f.is_tight(v)).count() >= 3);
                }
            }
        }
    }

    #[test]
    fn octahedron_shape() {
        let oct = &polytope_data(PolytopeKind::Octahedron)[0];
        assert_eq!(oct.vertices.len(), 6);
        assert_eq!(oct.facets.len(), 8);
        let tet = &polytope_data(PolytopeKind::Tetrahedron)[0];
        assert_eq!(tet.facets.len(), 4);
        assert!(tet.facets.iter().all(|f| f.normal.iter().product::<i64>() == -1));
    }

    #[test]
    fn octahedron_is_tetrahedron_intersection() {
        let tet = &polytope_data(PolytopeKind::Tetrahedron)[0];
        let inv = &polytope_data(PolytopeKind::Inverted)[0];
        let oct = &polytope_data(PolytopeKind::Octahedron)[0];
        let both: Vec<Facet> = tet.facets.iter().chain(&inv.facets).cloned().collect();
        assert_eq!(enumerate_vertices(&both), sorted(oct.vertices.clone()));
        for f in &oct.facets {
            assert!(both.contains(f));
        }
    }

    #[test]
    fn corner_containing_identity() {
        let corners = polytope_data(PolytopeKind::CornerTetrahedra);
        let c = corners.iter().find(|p| p.vertices.contains(&q([1, 1, 1]))).unwrap();
        assert_eq!(sorted(c.vertices.clone()), sorted(vec![q([1, 1, 1]), q([1, 0, 0]), q([0, 1, 0]), q([0, 0, 1])]));
    }

    #[test]
    fn corners_fill_tetrahedron_outside_octahedron() {
        // Sample a rational grid: each tetrahedron point lies in the
        // octahedron or in some corner piece.
        let tet = &polytope_data(PolytopeKind::Tetrahedron)[0];
        let oct = &polytope_data(PolytopeKind::Octahedron)[0];
        let corners = polytope_data(PolytopeKind::CornerTetrahedra);
        let steps = 8;
        for a in -steps..=steps {
            for b in -steps..=steps {
                for c in -steps..=steps {
                    let p = [a, b, c].map(|x| Rational64::new(x, steps));
                    if !tet.contains(&p) {
                        continue;
                    }
                    let n_corner = corners.iter().filter(|k| k.contains(&p)).count();
                    assert!(oct.contains(&p) || n_corner == 1);
                }
            }
        }
    }

    #[test]
    fn exact_serialization() {
        let s = serde_json::to_string(&polytope_data(PolytopeKind::Octahedron)[0]).unwrap();
        assert!(s.contains("\"vertices\":[[\"1\",\"0\",\"0\"]"));
    }
}
