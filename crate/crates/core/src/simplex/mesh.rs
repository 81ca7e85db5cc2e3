use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::geometry::Simplex;
use crate::error::{invalid, Error, Result};
use crate::field::BoxDomain;

/// A conforming simplicial mesh with a shared vertex table.
#[derive(Clone, Debug)]
pub struct Triangulation {
    dim: usize,
    domain: BoxDomain,
    vertices: Vec<Vec<f64>>,
    elements: Vec<Vec<usize>>,
    simplices: Vec<Simplex>,
    mesh_size: f64,
}

/// Face incidence summary, see [`Triangulation::face_report`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceReport {
    pub interior: usize,
    pub boundary: usize,
    /// Faces used by more than two simplices.
    pub overused: usize,
    /// Faces used once that do not lie on the bounding box.
    pub dangling: usize,
}

impl FaceReport {
    pub fn is_conforming(&self) -> bool {
        self.overused == 0 && self.dangling == 0
    }
}

/// An interior face and the two simplices sharing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedFace {
    pub vertices: Vec<usize>,
    pub elements: [usize; 2],
}

impl Triangulation {
    /// Builds a mesh from a vertex table and 0-based connectivity.
    /// `domain` is the box whose faces carry the Dirichlet boundary.
    pub fn new(domain: BoxDomain, vertices: Vec<Vec<f64>>, elements: Vec<Vec<usize>>) -> Result<Self> {
        let dim = domain.dim();
        if !(1..=3).contains(&dim) {
            return Err(invalid(format!("mesh dimension {dim} not in 1..=3")));
        }
        if elements.is_empty() {
            return Err(invalid("mesh has no elements"));
        }
        if let Some(v) = vertices.iter().find(|v| v.len() != dim) {
            return Err(invalid(format!("vertex {v:?} is not in ℝ^{dim}")));
        }
        let mut simplices = Vec::with_capacity(elements.len());
        for e in &elements {
            if e.len() != dim + 1 || e.iter().any(|&i| i >= vertices.len()) {
                return Err(invalid(format!("element {e:?} is not a valid {dim}-simplex index list")));
            }
            simplices.push(Simplex::new(e.iter().map(|&i| vertices[i].clone()).collect())?);
        }
        let mesh_size = simplices.iter().map(Simplex::diameter).fold(0.0, f64::max);
        Ok(Self { dim, domain, vertices, elements, simplices, mesh_size })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Max simplex diameter.
    pub fn mesh_size(&self) -> f64 {
        self.mesh_size
    }

    /// Sum of simplex measures.
    pub fn measure(&self) -> f64 {
        self.simplices.iter().map(Simplex::measure).sum()
    }

    /// Whether `x` lies on a face of the domain box.
    pub fn on_boundary(&self, x: &[f64]) -> bool {
        let scale = self.domain.lo.iter().zip(&self.domain.hi).map(|(l, h)| h - l).fold(0.0, f64::max);
        let tol = 1e-12 * scale.max(1.0);
        x.iter().zip(self.domain.lo.iter().zip(&self.domain.hi)).any(|(v, (l, h))| (v - l).abs() <= tol || (v - h).abs() <= tol)
    }

    fn face_map(&self) -> BTreeMap<Vec<usize>, Vec<usize>> {
        let mut faces: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (k, e) in self.elements.iter().enumerate() {
            for skip in 0..e.len() {
                let mut f: Vec<usize> = e.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
                f.sort_unstable();
                faces.entry(f).or_default().push(k);
            }
        }
        faces
    }

    /// Whether all vertices of a face sit on one common face of the box.
    fn face_on_box(&self, face: &[usize]) -> bool {
        let scale = self.domain.lo.iter().zip(&self.domain.hi).map(|(l, h)| h - l).fold(0.0, f64::max);
        let tol = 1e-12 * scale.max(1.0);
        (0..self.dim).any(|d| {
            let bound_at = |b: f64| face.iter().all(|&v| (self.vertices[v][d] - b).abs() <= tol);
            bound_at(self.domain.lo[d]) || bound_at(self.domain.hi[d])
        })
    }

    pub fn face_report(&self) -> FaceReport {
        let mut r = FaceReport { interior: 0, boundary: 0, overused: 0, dangling: 0 };
        for (face, users) in self.face_map() {
            match users.len() {
                1 if self.face_on_box(&face) => r.boundary += 1,
                1 => r.dangling += 1,
                2 => r.interior += 1,
                _ => r.overused += 1,
            }
        }
        r
    }

    pub fn interior_faces(&self) -> Vec<SharedFace> {
        self.face_map()
            .into_iter()
            .filter(|(_, users)| users.len() == 2)
            .map(|(vertices, users)| SharedFace { vertices, elements: [users[0], users[1]] })
            .collect()
    }

    /// First simplex (lowest index) containing `p` within `tol` on the
    /// barycentric coordinates.
    pub fn locate(&self, p: &[f64], tol: f64) -> Result<usize> {
        if p.len() != self.dim {
            return Err(invalid(format!("point of length {} in a {}D mesh", p.len(), self.dim)));
        }
        self.simplices.iter().position(|s| s.contains(p, tol)).ok_or_else(|| Error::OutOfDomain(p.to_vec()))
    }

    /// Plain-text export: `v x y z` per vertex (missing coordinates written as
    /// 0) and `e i1 … i{n+1}` per element, 0-based.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let mut c = [0.0; 3];
            c[..v.len()].copy_from_slice(v);
            let _ = writeln!(out, "v {:e} {:e} {:e}", c[0], c[1], c[2]);
        }
        for e in &self.elements {
            let idx: Vec<String> = e.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "e {}", idx.join(" "));
        }
        out
    }

    /// Parses [`Triangulation::to_text`] output. The dimension comes from the
    /// element arity and the domain from the vertex bounding box.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut raw_vertices = Vec::new();
        let mut elements = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let bad = || invalid(format!("mesh line {}: `{line}`", lineno + 1));
            match parts.next() {
                None => continue,
                Some("v") => {
                    let c: Vec<f64> = parts.map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
                    if c.len() != 3 {
                        return Err(bad());
                    }
                    raw_vertices.push(c);
                }
                Some("e") => {
                    let e: Vec<usize> = parts.map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
                    elements.push(e);
                }
                Some(_) => return Err(bad()),
            }
        }
        let dim = elements.first().map(|e| e.len().saturating_sub(1)).ok_or_else(|| invalid("mesh has no elements"))?;
        if !(1..=3).contains(&dim) {
            return Err(invalid(format!("elements with {} vertices", dim + 1)));
        }
        let vertices: Vec<Vec<f64>> = raw_vertices.into_iter().map(|mut v| {
            v.truncate(dim);
            v
        }).collect();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for v in &vertices {
            for d in 0..dim {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        Self::new(BoxDomain::new(lo, hi)?, vertices, elements)
    }
}

/// Structured mesh of a box: intervals in 1D, squares cut along the main
/// diagonal in 2D and the six-tetrahedron Kuhn split of each cube in 3D.
pub fn uniform_mesh(domain: &BoxDomain, subdivisions: usize) -> Result<Triangulation> {
    if subdivisions == 0 {
        return Err(invalid("subdivisions must be positive"));
    }
    if !domain.is_bounded() {
        return Err(invalid("uniform mesh needs a bounded box"));
    }
    let n = domain.dim();
    let k = subdivisions;
    let per = k + 1;
    let coord = |d: usize, i: usize| {
        if i == k {
            domain.hi[d]
        } else {
            domain.lo[d] + (domain.hi[d] - domain.lo[d]) * i as f64 / k as f64
        }
    };
    let index = |ijk: &[usize]| ijk.iter().rev().fold(0, |acc, &i| acc * per + i);
    let mut vertices = Vec::with_capacity(per.pow(n as u32));
    let mut ijk = vec![0usize; n];
    for flat in 0..per.pow(n as u32) {
        let mut rem = flat;
        for slot in ijk.iter_mut() {
            *slot = rem % per;
            rem /= per;
        }
        vertices.push((0..n).map(|d| coord(d, ijk[d])).collect::<Vec<f64>>());
    }
    let mut elements = Vec::new();
    let perms: Vec<Vec<usize>> = match n {
        1 => vec![vec![0]],
        2 => vec![vec![0, 1], vec![1, 0]],
        3 => vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]],
        _ => return Err(invalid(format!("uniform mesh dimension {n} not in 1..=3"))),
    };
    for cell in 0..k.pow(n as u32) {
        let mut rem = cell;
        let corner: Vec<usize> = (0..n)
            .map(|_| {
                let c = rem % k;
                rem /= k;
                c
            })
            .collect();
        // Kuhn path: walk from the corner to the opposite corner one axis at a time.
        for perm in &perms {
            let mut at = corner.clone();
            let mut e = vec![index(&at)];
            for &axis in perm {
                at[axis] += 1;
                e.push(index(&at));
            }
            elements.push(e);
        }
    }
    Triangulation::new(domain.clone(), vertices, elements)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_sizes() {
        let m = uniform_mesh(&BoxDomain::unit(1), 4).unwrap();
        assert_eq!(m.len(), 4);
        assert_eq!(m.mesh_size(), 0.25);
        let m = uniform_mesh(&BoxDomain::unit(2), 1).unwrap();
        assert_eq!(m.len(), 2);
        assert!((m.mesh_size() - 2f64.sqrt()).abs() < 1e-15);
        for k in [2, 3, 7] {
            let m = uniform_mesh(&BoxDomain::unit(2), k).unwrap();
            assert_eq!(m.len(), 2 * k * k);
            assert!((m.measure() - 1.0).abs() < 1e-13);
        }
        let m = uniform_mesh(&BoxDomain::unit(3), 3).unwrap();
        assert_eq!(m.len(), 6 * 27);
        assert!((m.measure() - 1.0).abs() < 1e-13);
        assert!((m.mesh_size() - 3f64.sqrt() / 3.0).abs() < 1e-15);
        assert!(uniform_mesh(&BoxDomain::unit(2), 0).is_err());
    }

    #[test]
    fn conforming_in_every_dimension() {
        for dim in 1..=3 {
            for k in 1..=4 {
                let m = uniform_mesh(&BoxDomain::cube(dim, -1.0, 2.0), k).unwrap();
                let r = m.face_report();
                assert!(r.is_conforming(), "dim={dim} k={k}: {r:?}");
                // boundary (n-1)-faces: 2n box faces, each split into k^{n-1} cells of n! / 2 ... counted directly
                let expect_boundary = match dim {
                    1 => 2,
                    2 => 4 * k,
                    _ => 6 * 2 * k * k,
                };
                assert_eq!(r.boundary, expect_boundary);
            }
        }
    }

    #[test]
    fn detects_nonconforming() {
        // hanging node: a triangle next to two smaller ones
        let verts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![0.5, 0.5]];
        let elems = vec![vec![0, 1, 2], vec![1, 3, 4], vec![4, 3, 2]];
        let m = Triangulation::new(BoxDomain::unit(2), verts, elems).unwrap();
        assert!(!m.face_report().is_conforming());
    }

    #[test]
    fn locate_prefers_lowest_index() {
        let m = uniform_mesh(&BoxDomain::unit(2), 1).unwrap();
        // on the shared diagonal
        assert_eq!(m.locate(&[0.5, 0.5], 1e-12).unwrap(), 0);
        assert_eq!(m.locate(&[0.2, 0.7], 1e-12).unwrap(), 1);
        assert!(matches!(m.locate(&[1.2, 0.5], 1e-12), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn text_round_trip() {
        let m = uniform_mesh(&BoxDomain::new(vec![0.0, 1.0], vec![2.0, 1.5]).unwrap(), 3).unwrap();
        let text = m.to_text();
        assert!(text.lines().next().unwrap().starts_with("v 0e0 1e0 0e0"));
        let back = Triangulation::from_text(&text).unwrap();
        assert_eq!(back.elements(), m.elements());
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.domain(), m.domain());
        assert!(Triangulation::from_text("v 0 0 0\nx 1 2\n").is_err());
    }
}
