//! The 15-type roof primitive catalog: analytic surfaces, point sampling,
//! canonical rectification and nearest-prototype classification.

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::{NnGrid, PointCloud};
use crate::error::{Error, Result};
use crate::geom::min_area_rect;
use crate::mesh;
use crate::real::Real;
use crate::rng::rng_for;

/// Slope or ridge orientation for directional primitives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    PosX,
    NegX,
    PosY,
    NegY,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveType {
    Flat,
    ShedPosX,
    ShedNegX,
    ShedPosY,
    ShedNegY,
    GableX,
    GableY,
    HipX,
    HipY,
    Pyramid,
    Mansard,
    GambrelX,
    GambrelY,
    VaultX,
    VaultY,
}

pub const CATALOG: [PrimitiveType; 15] = [
    PrimitiveType::Flat,
    PrimitiveType::ShedPosX,
    PrimitiveType::ShedNegX,
    PrimitiveType::ShedPosY,
    PrimitiveType::ShedNegY,
    PrimitiveType::GableX,
    PrimitiveType::GableY,
    PrimitiveType::HipX,
    PrimitiveType::HipY,
    PrimitiveType::Pyramid,
    PrimitiveType::Mansard,
    PrimitiveType::GambrelX,
    PrimitiveType::GambrelY,
    PrimitiveType::VaultX,
    PrimitiveType::VaultY,
];

/// Mansard skirt inset in unit-square coordinates.
const MANSARD_INSET: f64 = 0.15;
/// Vault profiles follow an arc of a wider ellipse so the boundary slope
/// stays finite (a semi-ellipse has a vertical tangent at the eaves).
const VAULT_SHAPE: f64 = 0.9;

impl PrimitiveType {
    pub fn index(self) -> usize {
        CATALOG.iter().position(|&t| t == self).unwrap()
    }

    /// Sheds carry an explicit direction; other types are symmetric or have
    /// their orientation baked into the x/y variant.
    pub fn directional(self) -> bool {
        matches!(
            self,
            PrimitiveType::ShedPosX
                | PrimitiveType::ShedNegX
                | PrimitiveType::ShedPosY
                | PrimitiveType::ShedNegY
        )
    }

    pub fn direction(self) -> Option<Direction> {
        match self {
            PrimitiveType::ShedPosX => Some(Direction::PosX),
            PrimitiveType::ShedNegX => Some(Direction::NegX),
            PrimitiveType::ShedPosY => Some(Direction::PosY),
            PrimitiveType::ShedNegY => Some(Direction::NegY),
            _ => None,
        }
    }

    pub fn is_flat(self) -> bool {
        self == PrimitiveType::Flat
    }

    /// Catalog image under a counter-clockwise rotation by `k` quarter
    /// turns. Every type maps back into the catalog.
    pub fn rotated(self, k: u8) -> PrimitiveType {
        use PrimitiveType::*;
        let mut t = self;
        for _ in 0..(k % 4) {
            t = match t {
                Flat => Flat,
                ShedPosX => ShedPosY,
                ShedPosY => ShedNegX,
                ShedNegX => ShedNegY,
                ShedNegY => ShedPosX,
                GableX => GableY,
                GableY => GableX,
                HipX => HipY,
                HipY => HipX,
                Pyramid => Pyramid,
                Mansard => Mansard,
                GambrelX => GambrelY,
                GambrelY => GambrelX,
                VaultX => VaultY,
                VaultY => VaultX,
            };
        }
        t
    }

    /// Maximum footprint aspect ratio this roof looks plausible on
    /// (`None` = unconstrained).
    pub fn aspect_limit(self) -> Option<f64> {
        use PrimitiveType::*;
        match self {
            ShedPosX | ShedNegX | ShedPosY | ShedNegY | GableX | GableY | HipX | HipY => Some(6.0),
            VaultX | VaultY => Some(2.0),
            _ => None,
        }
    }

    /// Normalized pitch profile over the unit square: 0 at the eave level,
    /// 1 at the ridge.
    pub fn shape01<F: Real>(self, u: F, v: F) -> F {
        use PrimitiveType::*;
        let one = F::one();
        let two = F::of(2.0);
        let min2 = |a: F, b: F| if a < b { a } else { b };
        let edge_dist = |u: F, v: F| min2(min2(u, one - u), min2(v, one - v));
        match self {
            Flat => F::zero(),
            ShedPosX => u,
            ShedNegX => one - u,
            ShedPosY => v,
            ShedNegY => one - v,
            GableX => one - (two * v - one).abs(),
            GableY => one - (two * u - one).abs(),
            HipX => min2(
                one - (two * v - one).abs(),
                min2(one, F::of(4.0) * min2(u, one - u)),
            ),
            HipY => min2(
                one - (two * u - one).abs(),
                min2(one, F::of(4.0) * min2(v, one - v)),
            ),
            Pyramid => two * edge_dist(u, v),
            Mansard => min2(one, edge_dist(u, v) / F::of(MANSARD_INSET)),
            GambrelX => gambrel_profile((two * v - one).abs()),
            GambrelY => gambrel_profile((two * u - one).abs()),
            VaultX => vault_profile(two * v - one),
            VaultY => vault_profile(two * u - one),
        }
    }
}

/// Two-pitch gambrel profile: shallow near the ridge (t=0), steep towards
/// the eave (t=1), break at t=0.5 and height 0.7.
fn gambrel_profile<F: Real>(t: F) -> F {
    let brk = F::of(0.5);
    if t <= brk {
        F::one() - F::of(0.6) * t
    } else {
        F::of(1.4) * (F::one() - t)
    }
}

/// Elliptical arc section, t in [-1, 1], 1 at t=0 and 0 at |t|=1.
fn vault_profile<F: Real>(t: F) -> F {
    let a = F::of(VAULT_SHAPE);
    let b = (F::one() - a * a).sqrt();
    let s = F::one() - a * t * a * t;
    let s = if s > F::zero() { s.sqrt() } else { F::zero() };
    (s - b) / (F::one() - b)
}

/// Roof parameters of one building section. Heights are meters above the
/// section base; `direction` is present exactly for shed types and must
/// agree with the variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoofSpec<F: Real = f64> {
    pub primitive_type: PrimitiveType,
    pub eave_height: F,
    pub ridge_height: F,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub direction: Option<Direction>,
}

impl<F: Real> RoofSpec<F> {
    pub fn new(primitive_type: PrimitiveType, eave_height: F, ridge_height: F) -> Self {
        RoofSpec {
            primitive_type,
            eave_height,
            ridge_height,
            direction: primitive_type.direction(),
        }
    }

    pub fn flat(eave_height: F) -> Self {
        Self::new(PrimitiveType::Flat, eave_height, eave_height)
    }

    /// Unit-height spec used for prototypes and training samples: flat is a
    /// full box, pitched roofs run from the base plane to the ridge.
    pub fn canonical(primitive_type: PrimitiveType) -> Self {
        if primitive_type.is_flat() {
            Self::new(primitive_type, F::one(), F::one())
        } else {
            Self::new(primitive_type, F::zero(), F::one())
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eave_height >= F::zero() && self.ridge_height >= self.eave_height) {
            return Err(Error::invalid("require 0 <= eave_height <= ridge_height"));
        }
        if self.primitive_type.is_flat() && self.ridge_height != self.eave_height {
            return Err(Error::invalid("flat roof requires ridge == eave"));
        }
        if self.direction != self.primitive_type.direction() {
            return Err(Error::invalid(
                "direction must be present exactly for shed types and match the variant",
            ));
        }
        Ok(())
    }

    /// Eave level as a fraction of the ridge height.
    pub fn eave_fraction(&self) -> F {
        if self.ridge_height <= F::zero() {
            F::one()
        } else {
            self.eave_height / self.ridge_height
        }
    }

    /// Normalized surface height in [0, 1] (ridge = 1).
    pub fn surface01(&self, u: F, v: F) -> F {
        let e = self.eave_fraction();
        e + (F::one() - e) * self.primitive_type.shape01(u, v)
    }

    /// Roof elevation in meters above the section base.
    pub fn height_at(&self, u: F, v: F) -> F {
        if self.ridge_height <= F::zero() {
            F::zero()
        } else {
            self.ridge_height * self.surface01(u, v)
        }
    }
}

/// Normalized roof surface height at unit-square coordinates.
pub fn surface_height<F: Real>(
    primitive_type: PrimitiveType,
    spec: &RoofSpec<F>,
    u: F,
    v: F,
) -> F {
    RoofSpec {
        primitive_type,
        ..*spec
    }
    .surface01(u, v)
}

/// Provenance of a sampled or meshed facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetKind {
    Roof,
    Wall,
    Bottom,
}

/// Uniform-by-area sample of the closed unit primitive (roof, walls and
/// bottom), tagged with the facet kind of each point.
pub fn sample_primitive_tagged<F: Real>(
    primitive_type: PrimitiveType,
    n: usize,
    seed: u64,
) -> (PointCloud<F>, Vec<FacetKind>) {
    let spec = RoofSpec::<F>::canonical(primitive_type);
    sample_solid(&spec, n, seed)
}

pub fn sample_primitive<F: Real>(primitive_type: PrimitiveType, n: usize, seed: u64) -> PointCloud<F> {
    sample_primitive_tagged(primitive_type, n, seed).0
}

/// Area-uniform sample over an arbitrary primitive solid.
pub fn sample_solid<F: Real>(spec: &RoofSpec<F>, n: usize, seed: u64) -> (PointCloud<F>, Vec<FacetKind>) {
    let parts = mesh::primitive_mesh_parts(spec);
    let m = &parts.mesh;
    let mut areas = Vec::with_capacity(m.faces.len());
    let mut total = F::zero();
    for f in &m.faces {
        let a = m.vertices[f[0] as usize];
        let b = m.vertices[f[1] as usize];
        let c = m.vertices[f[2] as usize];
        let area = (b - a).cross(&(c - a)).norm() / F::of(2.0);
        total += area;
        areas.push(total);
    }
    let mut rng = rng_for(seed, &[0x5A3B_13E5, spec.primitive_type.index() as u64]);
    let mut points = Vec::with_capacity(n);
    let mut kinds = Vec::with_capacity(n);
    for _ in 0..n {
        let t = F::of(rng.random::<f64>()) * total;
        let fi = areas.partition_point(|&c| c < t).min(m.faces.len() - 1);
        let f = m.faces[fi];
        let a = m.vertices[f[0] as usize];
        let b = m.vertices[f[1] as usize];
        let c = m.vertices[f[2] as usize];
        let r1 = F::of(rng.random::<f64>()).sqrt();
        let r2 = F::of(rng.random::<f64>());
        let p = a * (F::one() - r1) + b * (r1 * (F::one() - r2)) + c * (r1 * r2);
        points.push(p);
        kinds.push(parts.face_kinds[fi]);
    }
    (PointCloud::new(points), kinds)
}

/// Rotate about the z axis through the unit-square center by a uniform
/// angle in [-45, 45] degrees and jitter every height by uniform(-0.1, 0.1).
pub fn perturb_training<F: Real>(cloud: &PointCloud<F>, seed: u64) -> PointCloud<F> {
    let mut rng = rng_for(seed, &[0x7E27_0B17]);
    let angle = (rng.random::<f64>() * 90.0 - 45.0).to_radians();
    let (s, c) = (F::of(angle.sin()), F::of(angle.cos()));
    let half = F::of(0.5);
    let points = cloud
        .points
        .iter()
        .map(|p| {
            let (dx, dy) = (p.x - half, p.y - half);
            let dz = F::of(rng.random::<f64>() * 0.2 - 0.1);
            Vector3::new(half + c * dx - s * dy, half + s * dx + c * dy, p.z + dz)
        })
        .collect();
    PointCloud::new(points)
}

/// `per_type` perturbed samples for every catalog entry, labeled.
pub fn generate_training_set<F: Real>(
    per_type: usize,
    seed: u64,
) -> Vec<(PointCloud<F>, PrimitiveType)> {
    let mut out = Vec::with_capacity(per_type * CATALOG.len());
    for (ti, &t) in CATALOG.iter().enumerate() {
        for i in 0..per_type {
            let s = crate::rng::subseed(seed, &[ti as u64, i as u64]);
            let cloud = sample_primitive::<F>(t, TRAINING_POINTS, s);
            out.push((perturb_training(&cloud, s), t));
        }
    }
    out
}

/// Points sampled per primitive cloud.
pub const TRAINING_POINTS: usize = 2048;

/// Inverse of the canonicalization applied by [`rectify_canonical`]:
/// `world = R_z(angle) * (canonical ⊙ extents + offset)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalTransform<F: Real = f64> {
    pub angle_deg: F,
    pub offset: [F; 3],
    pub extents: [F; 3],
}

impl<F: Real> CanonicalTransform<F> {
    fn rot(angle_deg: F, p: &Vector3<F>) -> Vector3<F> {
        let a = angle_deg * F::pi() / F::of(180.0);
        let (s, c) = (a.sin(), a.cos());
        Vector3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z)
    }

    pub fn to_canonical(&self, p: &Vector3<F>) -> Vector3<F> {
        let q = Self::rot(-self.angle_deg, p);
        Vector3::new(
            (q.x - self.offset[0]) / self.extents[0],
            (q.y - self.offset[1]) / self.extents[1],
            (q.z - self.offset[2]) / self.extents[2],
        )
    }

    pub fn to_world(&self, p: &Vector3<F>) -> Vector3<F> {
        let q = Vector3::new(
            p.x * self.extents[0] + self.offset[0],
            p.y * self.extents[1] + self.offset[1],
            p.z * self.extents[2] + self.offset[2],
        );
        Self::rot(self.angle_deg, &q)
    }
}

/// Point cloud normalized to the unit cube with its inverse mapping.
/// The first `roof_count` points are the rectified input; the remainder is
/// the synthetic wall and bottom fill.
#[derive(Debug, Clone)]
pub struct CanonicalCloud<F: Real = f64> {
    pub points: PointCloud<F>,
    pub roof_count: usize,
    pub transform: CanonicalTransform<F>,
}

/// Rectify into the canonical pose: footprint orientation from the
/// minimum-area bounding rectangle of the xy coordinates, min corner at the
/// origin, walls and bottom filled at the roof's areal density, axes scaled
/// into the unit cube.
///
/// Orientation note: the principal-axis estimate is degenerate for the
/// square footprints that dominate this domain, so the bounding-rectangle
/// angle is used instead; the quarter-turn ambiguity is resolved during
/// classification.
pub fn rectify_canonical<F: Real>(cloud: &PointCloud<F>) -> Result<CanonicalCloud<F>> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    cloud.validate()?;
    let rect = min_area_rect(&cloud.xy())?;
    // quarter-turn fold: square footprints make the long-side choice a
    // coin flip, and rotations never exceed 45 degrees in this domain, so
    // the nearest quarter-turn representative is the right canonical pose
    let angle = crate::geom::normalize_quarter_turn(rect.angle_deg);
    let rotated: Vec<Vector3<F>> = cloud
        .points
        .iter()
        .map(|p| CanonicalTransform::rot(-angle, p))
        .collect();
    let mut lo = rotated[0];
    let mut hi = rotated[0];
    for p in &rotated {
        for k in 0..3 {
            if p[k] < lo[k] {
                lo[k] = p[k];
            }
            if p[k] > hi[k] {
                hi[k] = p[k];
            }
        }
    }
    let eps = F::of(1e-9);
    let ex = hi.x - lo.x;
    let ey = hi.y - lo.y;
    if ex <= eps || ey <= eps {
        return Err(Error::Degenerate("cloud xy extent is zero".into()));
    }
    let ez = if hi.z - lo.z > eps { hi.z - lo.z } else { F::one() };

    let mut local: Vec<Vector3<F>> = rotated.iter().map(|p| p - lo).collect();
    let roof_count = local.len();

    // wall and bottom fill at the roof's areal density
    let density = F::of(roof_count as f64) / (ex * ey);
    let mut rng = rng_for(0x5EC7_F111, &[roof_count as u64]);
    let roof_grid = NnGrid::build(&local)?;
    let edge_height = |x: F, y: F| -> F {
        let (i, _) = roof_grid.nearest(&Vector3::new(x, y, F::zero()));
        // nearest in xy would be ideal; z participates but roof points near
        // the boundary dominate the query anyway
        local[i].z
    };
    // stations along each side for the edge profile
    const STATIONS: usize = 33;
    let mut fill = Vec::new();
    for side in 0..4 {
        let len = if side < 2 { ex } else { ey };
        let mut heights = [F::zero(); STATIONS];
        let mut max_h = F::zero();
        for (k, h) in heights.iter_mut().enumerate() {
            let t = len * F::of(k as f64 / (STATIONS - 1) as f64);
            let (x, y) = match side {
                0 => (t, F::zero()),
                1 => (t, ey),
                2 => (F::zero(), t),
                _ => (ex, t),
            };
            *h = edge_height(x, y);
            if *h > max_h {
                max_h = *h;
            }
        }
        if max_h <= eps {
            continue;
        }
        // trapezoid area of the edge profile
        let mut area = F::zero();
        for k in 0..STATIONS - 1 {
            area += (heights[k] + heights[k + 1]) / F::of(2.0);
        }
        area *= len / F::of((STATIONS - 1) as f64);
        let n_side = (density * area).f64().round() as usize;
        let mut accepted = 0;
        let mut attempts = 0;
        while accepted < n_side && attempts < n_side * 40 + 64 {
            attempts += 1;
            let t = F::of(rng.random::<f64>()) * len;
            let z = F::of(rng.random::<f64>()) * max_h;
            let station = (t / len * F::of((STATIONS - 1) as f64)).f64();
            let k = (station.floor() as usize).min(STATIONS - 2);
            let frac = F::of(station - k as f64);
            let h = heights[k] * (F::one() - frac) + heights[k + 1] * frac;
            if z <= h {
                let p = match side {
                    0 => Vector3::new(t, F::zero(), z),
                    1 => Vector3::new(t, ey, z),
                    2 => Vector3::new(F::zero(), t, z),
                    _ => Vector3::new(ex, t, z),
                };
                fill.push(p);
                accepted += 1;
            }
        }
    }
    let n_bottom = (density * ex * ey).f64().round() as usize;
    for _ in 0..n_bottom {
        fill.push(Vector3::new(
            F::of(rng.random::<f64>()) * ex,
            F::of(rng.random::<f64>()) * ey,
            F::zero(),
        ));
    }
    local.extend(fill);

    let extents = Vector3::new(ex, ey, ez);
    let points: Vec<Vector3<F>> = local
        .iter()
        .map(|p| Vector3::new(p.x / extents.x, p.y / extents.y, p.z / extents.z))
        .collect();
    Ok(CanonicalCloud {
        points: PointCloud::new(points),
        roof_count,
        transform: CanonicalTransform {
            angle_deg: angle,
            offset: [lo.x, lo.y, lo.z],
            extents: [ex, ey, ez],
        },
    })
}

/// Prototype clouds for every catalog type with prebuilt NN indices.
pub struct PrototypeSet<F: Real = f64> {
    pub points_per_prototype: usize,
    clouds: Vec<PointCloud<F>>,
    kinds: Vec<Vec<FacetKind>>,
    grids: Vec<NnGrid<F>>,
    /// Cap on query points per chamfer direction during classification.
    pub classify_cap: usize,
}

pub const DEFAULT_PROTOTYPE_POINTS: usize = 1024;
pub const DEFAULT_PROTOTYPE_SEED: u64 = 9001;
pub const DEFAULT_CLASSIFY_CAP: usize = 512;

impl<F: Real> PrototypeSet<F> {
    pub fn build(points_per_prototype: usize, seed: u64) -> Result<Self> {
        let mut clouds = Vec::with_capacity(CATALOG.len());
        let mut kinds = Vec::with_capacity(CATALOG.len());
        let mut grids = Vec::with_capacity(CATALOG.len());
        for (ti, &t) in CATALOG.iter().enumerate() {
            let (cloud, kind) = sample_primitive_tagged::<F>(
                t,
                points_per_prototype,
                crate::rng::subseed(seed, &[0x9607_07_70, ti as u64]),
            );
            grids.push(NnGrid::build(&cloud.points)?);
            clouds.push(cloud);
            kinds.push(kind);
        }
        Ok(PrototypeSet {
            points_per_prototype,
            clouds,
            kinds,
            grids,
            classify_cap: DEFAULT_CLASSIFY_CAP,
        })
    }

    pub fn default_set() -> Result<Self> {
        Self::build(DEFAULT_PROTOTYPE_POINTS, DEFAULT_PROTOTYPE_SEED)
    }

    pub fn cloud(&self, t: PrimitiveType) -> &PointCloud<F> {
        &self.clouds[t.index()]
    }

    /// Roof-facet points of a prototype (used as the registration source;
    /// wall and bottom samples have no counterpart in a height-map cloud).
    pub fn roof_points(&self, t: PrimitiveType) -> Vec<Vector3<F>> {
        let i = t.index();
        self.clouds[i]
            .points
            .iter()
            .zip(&self.kinds[i])
            .filter(|(_, k)| **k == FacetKind::Roof)
            .map(|(p, _)| *p)
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Classification {
    pub primitive: PrimitiveType,
    /// Symmetric Chamfer distance of the winning match (unit-cube units).
    pub score: f64,
}

fn rot_quarter<F: Real>(p: &Vector3<F>, k: u8) -> Vector3<F> {
    let one = F::one();
    match k % 4 {
        0 => *p,
        1 => Vector3::new(one - p.y, p.x, p.z),
        2 => Vector3::new(one - p.x, one - p.y, p.z),
        _ => Vector3::new(p.y, one - p.x, p.z),
    }
}

/// Nearest-prototype classification by symmetric Chamfer distance,
/// minimized over the four quarter-turn orientations. The winning rotation
/// is folded into the reported type (rotating a gable by 90 degrees IS the
/// other gable variant), so the result names the cloud's orientation as
/// observed.
pub fn classify<F: Real>(
    cloud: &CanonicalCloud<F>,
    prototypes: &PrototypeSet<F>,
) -> Result<Classification> {
    if cloud.points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let query = cloud.points.subsample(prototypes.classify_cap);
    let cloud_grid = NnGrid::build(&query.points)?;
    let mut best: Option<(F, PrimitiveType)> = None;
    for &t in CATALOG.iter() {
        let proto_grid = &prototypes.grids[t.index()];
        let proto_query = prototypes.cloud(t).subsample(prototypes.classify_cap);
        for k in 0..4u8 {
            // chamfer(cloud, rot_k(proto)) without materializing rotations:
            // cloud -> proto queries rotate by -k, proto -> cloud by +k
            let inv = (4 - k) % 4;
            let mut d1 = F::zero();
            for p in &query.points {
                d1 += proto_grid.nearest(&rot_quarter(p, inv)).1.sqrt();
            }
            d1 /= F::of(query.len() as f64);
            let mut d2 = F::zero();
            for p in &proto_query.points {
                d2 += cloud_grid.nearest(&rot_quarter(p, k)).1.sqrt();
            }
            d2 /= F::of(proto_query.len() as f64);
            let score = (d1 + d2) / F::of(2.0);
            if best.is_none() || score < best.unwrap().0 {
                best = Some((score, t.rotated(k)));
            }
        }
    }
    let (score, primitive) = best.unwrap();
    Ok(Classification {
        primitive,
        score: score.f64(),
    })
}
