//! Triangle meshes: watertight per-section prisms, scene assembly with
//! vertex merging, and the vertex/face accounting behind the compactness
//! comparison against dense height-map triangulations.

use std::collections::HashMap;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::RotatedRect;
use crate::grid::HeightGrid;
use crate::primitives::{FacetKind, PrimitiveType, RoofSpec};
use crate::real::Real;
use crate::transform::SimTransform;

/// Triangles below this area are dropped as degenerate.
const MIN_TRIANGLE_AREA: f64 = 1e-12;
/// Vertices closer than this merge during scene assembly.
const MERGE_EPS: f64 = 1e-6;
/// Arc segments for vault (elliptical cylinder) tessellation.
pub const VAULT_SEGMENTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh<F: Real = f64> {
    pub vertices: Vec<Vector3<F>>,
    pub faces: Vec<[u32; 3]>,
    /// Section id per face.
    pub face_sections: Vec<u32>,
}

impl<F: Real> Mesh<F> {
    pub fn validate(&self) -> Result<()> {
        if self.face_sections.len() != self.faces.len() {
            return Err(Error::invalid("face_sections length != faces length"));
        }
        let n = self.vertices.len() as u32;
        for f in &self.faces {
            if f.iter().any(|&i| i >= n) {
                return Err(Error::invalid(format!(
                    "face index out of range: {f:?} with {n} vertices"
                )));
            }
        }
        Ok(())
    }

    pub fn counts(&self) -> (usize, usize) {
        (self.vertices.len(), self.faces.len())
    }

    pub fn face_area(&self, i: usize) -> F {
        let [a, b, c] = self.faces[i];
        let (a, b, c) = (
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        );
        (b - a).cross(&(c - a)).norm() / F::of(2.0)
    }

    /// Closed orientable surface: every directed edge appears exactly once
    /// and so does its reverse.
    pub fn is_watertight(&self) -> bool {
        if self.faces.is_empty() {
            return false;
        }
        let mut directed: HashMap<(u32, u32), u32> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let e = (f[k], f[(k + 1) % 3]);
                if e.0 == e.1 {
                    return false;
                }
                *directed.entry(e).or_insert(0) += 1;
            }
        }
        directed
            .iter()
            .all(|(&(a, b), &c)| c == 1 && directed.get(&(b, a)) == Some(&1))
    }

    /// Undirected edge count (for Euler characteristic checks).
    pub fn edge_count(&self) -> usize {
        let mut edges = std::collections::HashSet::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    pub fn min_face_area(&self) -> F {
        (0..self.faces.len())
            .map(|i| self.face_area(i))
            .fold(F::of(f64::MAX), |a, b| if b < a { b } else { a })
    }

    /// Merge vertices coincident within `eps` and drop collapsed faces.
    pub fn merged(&self, eps: f64) -> Mesh<F> {
        let inv = 1.0 / eps;
        let mut lookup: HashMap<(i64, i64, i64), u32> = HashMap::new();
        let mut remap = Vec::with_capacity(self.vertices.len());
        let mut vertices = Vec::new();
        for v in &self.vertices {
            let key = (
                (v.x.f64() * inv).round() as i64,
                (v.y.f64() * inv).round() as i64,
                (v.z.f64() * inv).round() as i64,
            );
            let idx = *lookup.entry(key).or_insert_with(|| {
                vertices.push(*v);
                (vertices.len() - 1) as u32
            });
            remap.push(idx);
        }
        let mut faces = Vec::with_capacity(self.faces.len());
        let mut sections = Vec::with_capacity(self.faces.len());
        for (f, &s) in self.faces.iter().zip(&self.face_sections) {
            let g = [
                remap[f[0] as usize],
                remap[f[1] as usize],
                remap[f[2] as usize],
            ];
            if g[0] != g[1] && g[1] != g[2] && g[0] != g[2] {
                faces.push(g);
                sections.push(s);
            }
        }
        Mesh {
            vertices,
            faces,
            face_sections: sections,
        }
    }
}

pub struct PrimitiveMeshParts<F: Real = f64> {
    pub mesh: Mesh<F>,
    pub face_kinds: Vec<FacetKind>,
}

struct Builder<F: Real> {
    mesh: Mesh<F>,
    kinds: Vec<FacetKind>,
    lookup: HashMap<(u64, u64, u64), u32>,
    section: u32,
}

impl<F: Real> Builder<F> {
    fn new(section: u32) -> Self {
        Builder {
            mesh: Mesh::default(),
            kinds: Vec::new(),
            lookup: HashMap::new(),
            section,
        }
    }

    fn vertex(&mut self, p: Vector3<F>) -> u32 {
        let key = (
            p.x.f64().to_bits(),
            p.y.f64().to_bits(),
            p.z.f64().to_bits(),
        );
        if let Some(&i) = self.lookup.get(&key) {
            return i;
        }
        self.mesh.vertices.push(p);
        let i = (self.mesh.vertices.len() - 1) as u32;
        self.lookup.insert(key, i);
        i
    }

    /// Fan-triangulate a planar convex polygon given counter-clockwise as
    /// seen from outside; degenerate triangles are dropped.
    fn polygon(&mut self, pts: &[Vector3<F>], kind: FacetKind) {
        if pts.len() < 3 {
            return;
        }
        let idx: Vec<u32> = pts.iter().map(|p| self.vertex(*p)).collect();
        for k in 1..pts.len() - 1 {
            let (a, b, c) = (idx[0], idx[k], idx[k + 1]);
            if a == b || b == c || a == c {
                continue;
            }
            let area = (pts[k] - pts[0]).cross(&(pts[k + 1] - pts[0])).norm() / F::of(2.0);
            if area.f64() <= MIN_TRIANGLE_AREA {
                continue;
            }
            self.mesh.faces.push([a, b, c]);
            self.mesh.face_sections.push(self.section);
            self.kinds.push(kind);
        }
    }
}

/// Vault profile stations in [0, 1].
fn vault_stations<F: Real>() -> Vec<F> {
    (0..=VAULT_SEGMENTS)
        .map(|j| F::of(j as f64 / VAULT_SEGMENTS as f64))
        .collect()
}

/// Roof facet outlines in unit-square coordinates, counter-clockwise from
/// above. Every facet is planar under the type's surface function.
fn roof_facets<F: Real>(t: PrimitiveType) -> Vec<Vec<(F, F)>> {
    use PrimitiveType::*;
    let z = F::zero;
    let one = F::one;
    let h = || F::of(0.5);
    let unit_quad = vec![(z(), z()), (one(), z()), (one(), one()), (z(), one())];
    let strips_v = |breaks: Vec<F>| -> Vec<Vec<(F, F)>> {
        breaks
            .windows(2)
            .map(|w| vec![(z(), w[0]), (one(), w[0]), (one(), w[1]), (z(), w[1])])
            .collect()
    };
    let strips_u = |breaks: Vec<F>| -> Vec<Vec<(F, F)>> {
        breaks
            .windows(2)
            .map(|w| vec![(w[0], z()), (w[1], z()), (w[1], one()), (w[0], one())])
            .collect()
    };
    match t {
        Flat | ShedPosX | ShedNegX | ShedPosY | ShedNegY => vec![unit_quad],
        GableX => strips_v(vec![z(), h(), one()]),
        GableY => strips_u(vec![z(), h(), one()]),
        HipX => {
            let (a, b) = (F::of(0.25), F::of(0.75));
            vec![
                vec![(z(), z()), (one(), z()), (b, h()), (a, h())],
                vec![(one(), one()), (z(), one()), (a, h()), (b, h())],
                vec![(z(), one()), (z(), z()), (a, h())],
                vec![(one(), z()), (one(), one()), (b, h())],
            ]
        }
        HipY => {
            let (a, b) = (F::of(0.25), F::of(0.75));
            vec![
                vec![(z(), one()), (z(), z()), (h(), a), (h(), b)],
                vec![(one(), z()), (one(), one()), (h(), b), (h(), a)],
                vec![(z(), z()), (one(), z()), (h(), a)],
                vec![(one(), one()), (z(), one()), (h(), b)],
            ]
        }
        Pyramid => {
            let c = (h(), h());
            vec![
                vec![(z(), z()), (one(), z()), c],
                vec![(one(), z()), (one(), one()), c],
                vec![(one(), one()), (z(), one()), c],
                vec![(z(), one()), (z(), z()), c],
            ]
        }
        Mansard => {
            let i = F::of(0.15);
            let j = one() - i;
            vec![
                vec![(i, i), (j, i), (j, j), (i, j)],
                vec![(z(), z()), (one(), z()), (j, i), (i, i)],
                vec![(one(), z()), (one(), one()), (j, j), (j, i)],
                vec![(one(), one()), (z(), one()), (i, j), (j, j)],
                vec![(z(), one()), (z(), z()), (i, i), (i, j)],
            ]
        }
        GambrelX => strips_v(vec![z(), F::of(0.25), h(), F::of(0.75), one()]),
        GambrelY => strips_u(vec![z(), F::of(0.25), h(), F::of(0.75), one()]),
        VaultX => strips_v(vault_stations()),
        VaultY => strips_u(vault_stations()),
    }
}

/// Interior breakpoints of the roof edge along a wall whose free parameter
/// is `u` (south/north walls) or `v` (east/west walls).
fn wall_breaks<F: Real>(t: PrimitiveType, along_u: bool) -> Vec<F> {
    use PrimitiveType::*;
    match (t, along_u) {
        (GableY, true) | (GableX, false) => vec![F::of(0.5)],
        (GambrelY, true) | (GambrelX, false) => vec![F::of(0.25), F::of(0.5), F::of(0.75)],
        (VaultY, true) | (VaultX, false) => {
            let s: Vec<F> = vault_stations();
            s[1..s.len() - 1].to_vec()
        }
        _ => Vec::new(),
    }
}

/// Closed, outward-oriented triangle mesh of the primitive on the unit
/// footprint, heights in meters (base plane at z = 0).
pub fn primitive_mesh_parts<F: Real>(spec: &RoofSpec<F>) -> PrimitiveMeshParts<F> {
    let mut b = Builder::new(0);
    let zero = F::zero();
    let one = F::one();
    let at = |u: F, v: F| Vector3::new(u, v, spec.height_at(u, v));

    // roof
    for facet in roof_facets::<F>(spec.primitive_type) {
        let pts: Vec<Vector3<F>> = facet.iter().map(|&(u, v)| at(u, v)).collect();
        b.polygon(&pts, FacetKind::Roof);
    }

    // bottom, facing down
    b.polygon(
        &[
            Vector3::new(zero, one, zero),
            Vector3::new(one, one, zero),
            Vector3::new(one, zero, zero),
            Vector3::new(zero, zero, zero),
        ],
        FacetKind::Bottom,
    );

    // walls: (base corner a, base corner b, top profile from b back to a)
    type Side<F> = ((F, F), (F, F), bool, bool); // a, b, along_u, reversed
    let sides: [Side<F>; 4] = [
        ((zero, zero), (one, zero), true, true),  // south: tops u = 1 -> 0
        ((one, zero), (one, one), false, true),   // east: tops v = 1 -> 0
        ((one, one), (zero, one), true, false),   // north: tops u = 0 -> 1
        ((zero, one), (zero, zero), false, false), // west: tops v = 0 -> 1
    ];
    for (a, bc, along_u, reversed) in sides {
        let mut params: Vec<F> = vec![zero];
        params.extend(wall_breaks::<F>(spec.primitive_type, along_u));
        params.push(one);
        if reversed {
            params.reverse();
        }
        let fixed = a; // the side line passes through both corners
        let tops: Vec<Vector3<F>> = params
            .iter()
            .map(|&p| {
                let (u, v) = if along_u { (p, fixed.1) } else { (fixed.0, p) };
                at(u, v)
            })
            .collect();
        if tops.iter().all(|t| t.z.f64() <= MIN_TRIANGLE_AREA) {
            continue; // zero-height wall (eave at the base plane)
        }
        let mut poly = vec![
            Vector3::new(a.0, a.1, zero),
            Vector3::new(bc.0, bc.1, zero),
        ];
        poly.extend(tops);
        b.polygon(&poly, FacetKind::Wall);
    }

    PrimitiveMeshParts {
        mesh: b.mesh,
        face_kinds: b.kinds,
    }
}

/// Mesh of one primitive with the given roof parameters.
pub fn primitive_mesh<F: Real>(t: PrimitiveType, spec: &RoofSpec<F>) -> Result<Mesh<F>> {
    let spec = RoofSpec {
        primitive_type: t,
        direction: t.direction(),
        ..*spec
    };
    spec.validate()?;
    if spec.ridge_height <= F::zero() {
        return Err(Error::Degenerate("primitive has zero height".into()));
    }
    Ok(primitive_mesh_parts(&spec).mesh)
}

/// One fitted or ground-truth section of a scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneSection<F: Real = f64> {
    pub footprint: RotatedRect<F>,
    /// Absolute elevation of the section base.
    pub base_elevation: F,
    pub roof: RoofSpec<F>,
    /// Registration refinement applied on top of the placed primitive
    /// (identity for ground-truth scenes).
    pub transform: SimTransform<F>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneModel<F: Real = f64> {
    pub sections: Vec<SceneSection<F>>,
    /// Absolute terrain elevation the model is referenced to.
    pub datum: F,
}

impl<F: Real> SceneModel<F> {
    pub fn validate(&self) -> Result<()> {
        for s in &self.sections {
            s.roof.validate()?;
            s.transform.validate()?;
            if s.base_elevation < self.datum - F::of(0.5) {
                return Err(Error::invalid("section base below datum - 0.5 m"));
            }
        }
        Ok(())
    }
}

/// Instantiate every section's primitive mesh, apply its transform,
/// concatenate and merge coincident vertices. Walls drop to the datum so
/// adjacent sections of differing heights leave no gaps.
pub fn assemble_scene<F: Real>(model: &SceneModel<F>) -> Result<Mesh<F>> {
    model.validate()?;
    let mut combined = Mesh::default();
    for (si, s) in model.sections.iter().enumerate() {
        // prism measured from the datum upwards
        let lift = s.base_elevation - model.datum;
        let spec = RoofSpec {
            primitive_type: s.roof.primitive_type,
            eave_height: s.roof.eave_height + lift,
            ridge_height: s.roof.ridge_height + lift,
            direction: s.roof.direction,
        };
        if spec.ridge_height <= F::zero() {
            return Err(Error::Degenerate(format!("section {si} has zero height")));
        }
        let parts = primitive_mesh_parts(&spec);
        let base = combined.vertices.len() as u32;
        let (hx, hy) = s.footprint.half_extents;
        for v in &parts.mesh.vertices {
            let lx = (v.x - F::of(0.5)) * hx * F::of(2.0);
            let ly = (v.y - F::of(0.5)) * hy * F::of(2.0);
            let (wx, wy) = s.footprint.to_world(lx, ly);
            let placed = Vector3::new(wx, wy, model.datum + v.z);
            combined.vertices.push(s.transform.apply(&placed));
        }
        for f in &parts.mesh.faces {
            combined.faces.push([f[0] + base, f[1] + base, f[2] + base]);
            combined.face_sections.push(si as u32);
        }
    }
    Ok(combined.merged(MERGE_EPS))
}

/// Face count of the dense reference triangulation: two triangles per grid
/// cell (the representation a DHM mesh export would use).
pub fn dense_triangulation_faces<F: Real>(grid: &HeightGrid<F>) -> usize {
    2 * grid.width * grid.height
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::CATALOG;

    fn canonical_mesh(t: PrimitiveType) -> Mesh {
        primitive_mesh(t, &RoofSpec::canonical(t)).unwrap()
    }

    #[test]
    fn flat_box_counts() {
        let m = primitive_mesh(PrimitiveType::Flat, &RoofSpec::flat(4.0)).unwrap();
        assert_eq!(m.counts(), (8, 12));
        assert!(m.is_watertight());
    }

    #[test]
    fn gable_counts_and_euler() {
        let spec = RoofSpec::new(PrimitiveType::GableX, 2.0, 4.0);
        let m = primitive_mesh(PrimitiveType::GableX, &spec).unwrap();
        let (v, f) = m.counts();
        assert_eq!((v, f), (10, 16));
        let e = m.edge_count();
        assert_eq!(v + f - e, 2, "Euler characteristic");
        assert!(m.is_watertight());
    }

    #[test]
    fn every_primitive_is_watertight_and_nondegenerate() {
        for &t in CATALOG.iter() {
            let m = canonical_mesh(t);
            assert!(m.is_watertight(), "{t:?} not watertight");
            assert!(
                m.min_face_area().f64() > MIN_TRIANGLE_AREA,
                "{t:?} has degenerate faces"
            );
            // generic eave/ridge too
            let spec = RoofSpec::new(t, 3.0, if t.is_flat() { 3.0 } else { 5.0 });
            let m = primitive_mesh(t, &spec).unwrap();
            assert!(m.is_watertight(), "{t:?} (3,5) not watertight");
        }
    }

    #[test]
    fn face_index_validation() {
        let mut m = canonical_mesh(PrimitiveType::Flat);
        m.faces.push([0, 1, 99]);
        m.face_sections.push(0);
        assert!(m.validate().is_err());
    }

    fn flat_scene(n: usize, gap: f64) -> SceneModel {
        let sections = (0..n)
            .map(|i| SceneSection {
                footprint: RotatedRect {
                    center: (i as f64 * (10.0 + gap), 0.0),
                    half_extents: (5.0, 4.0),
                    angle_deg: 0.0,
                },
                base_elevation: 0.0,
                roof: RoofSpec::flat(6.0),
                transform: SimTransform::identity(),
            })
            .collect();
        SceneModel {
            sections,
            datum: 0.0,
        }
    }

    #[test]
    fn single_flat_section_is_a_cube() {
        let m = assemble_scene(&flat_scene(1, 0.0)).unwrap();
        assert_eq!(m.counts(), (8, 12));
        assert!(m.is_watertight());
    }

    #[test]
    fn three_disjoint_sections_concatenate() {
        let m = assemble_scene(&flat_scene(3, 1.0)).unwrap();
        assert_eq!(m.counts(), (24, 36));
    }

    #[test]
    fn adjacent_equal_sections_share_vertices() {
        let m = assemble_scene(&flat_scene(2, 0.0)).unwrap();
        // the shared wall's 4 corners merge: 16 - 4 = 12 vertices
        assert_eq!(m.vertices.len(), 12);
    }

    #[test]
    fn dense_reference_count() {
        let g: HeightGrid = HeightGrid::new(200, 100, 0.5, (0.0, 0.0), 0.0);
        assert_eq!(dense_triangulation_faces(&g), 40000);
    }
}
