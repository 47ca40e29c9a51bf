//! Point clouds, nearest-neighbor acceleration and the Chamfer distance.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::grid::{BinaryMask, HeightGrid};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<F: Real = f64> {
    pub points: Vec<Vector3<F>>,
}

impl<F: Real> PointCloud<F> {
    pub fn new(points: Vec<Vector3<F>>) -> Self {
        PointCloud { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .points
            .iter()
            .any(|p| !(p.x.finite() && p.y.finite() && p.z.finite()))
        {
            return Err(Error::invalid("point cloud contains non-finite coordinates"));
        }
        Ok(())
    }

    pub fn xy(&self) -> Vec<(F, F)> {
        self.points.iter().map(|p| (p.x, p.y)).collect()
    }

    pub fn bounds(&self) -> Result<(Vector3<F>, Vector3<F>)> {
        if self.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let mut lo = self.points[0];
        let mut hi = self.points[0];
        for p in &self.points {
            for k in 0..3 {
                if p[k] < lo[k] {
                    lo[k] = p[k];
                }
                if p[k] > hi[k] {
                    hi[k] = p[k];
                }
            }
        }
        Ok((lo, hi))
    }

    pub fn centroid(&self) -> Vector3<F> {
        let mut c = Vector3::zeros();
        for p in &self.points {
            c += p;
        }
        c / F::of(self.points.len() as f64)
    }

    /// Every `stride`-th point, at least one.
    pub fn subsample(&self, max_points: usize) -> PointCloud<F> {
        if self.len() <= max_points || max_points == 0 {
            return self.clone();
        }
        let stride = self.len().div_ceil(max_points);
        PointCloud::new(self.points.iter().step_by(stride).copied().collect())
    }
}

/// One point per masked valid cell at the cell center.
pub fn grid_to_points<F: Real>(grid: &HeightGrid<F>, mask: &BinaryMask) -> Result<PointCloud<F>> {
    mask.same_shape(grid)?;
    let mut points = Vec::new();
    for (col, row) in mask.iter_true() {
        if grid.is_nodata(col, row) {
            continue;
        }
        let (x, y) = grid.cell_center(col, row);
        points.push(Vector3::new(x, y, grid.get(col, row)));
    }
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(PointCloud::new(points))
}

/// Uniform-grid nearest-neighbor index over a fixed point set.
///
/// Cells are cubes sized so the expected occupancy is a few points; queries
/// expand ring by ring until the best squared distance beats the next
/// ring's lower bound, so results are exact.
pub struct NnGrid<F: Real> {
    points: Vec<Vector3<F>>,
    origin: Vector3<F>,
    cell: F,
    dims: [usize; 3],
    buckets: Vec<Vec<u32>>,
}

impl<F: Real> NnGrid<F> {
    pub fn build(points: &[Vector3<F>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let cloud = PointCloud::new(points.to_vec());
        let (lo, hi) = cloud.bounds()?;
        let extent = hi - lo;
        let max_extent = extent.x.max(extent.y).max(extent.z).max(F::of(1e-9));
        let target = (points.len() as f64).cbrt().ceil().max(1.0);
        let cell = (max_extent / F::of(target)).max(F::of(1e-9));
        let dim = |e: F| -> usize { (e / cell).f64().floor() as usize + 1 };
        let dims = [dim(extent.x), dim(extent.y), dim(extent.z)];
        let mut buckets = vec![Vec::new(); dims[0] * dims[1] * dims[2]];
        let index_of = |p: &Vector3<F>| -> usize {
            let mut idx = [0usize; 3];
            for k in 0..3 {
                let i = ((p[k] - lo[k]) / cell).f64().floor() as usize;
                idx[k] = i.min(dims[k] - 1);
            }
            (idx[2] * dims[1] + idx[1]) * dims[0] + idx[0]
        };
        for (i, p) in points.iter().enumerate() {
            buckets[index_of(p)].push(i as u32);
        }
        Ok(NnGrid {
            points: points.to_vec(),
            origin: lo,
            cell,
            dims,
            buckets,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector3<F>] {
        &self.points
    }

    fn cell_of(&self, q: &Vector3<F>) -> [isize; 3] {
        let mut idx = [0isize; 3];
        for k in 0..3 {
            idx[k] = ((q[k] - self.origin[k]) / self.cell).f64().floor() as isize;
        }
        idx
    }

    /// Index of and squared distance to the nearest stored point.
    pub fn nearest(&self, q: &Vector3<F>) -> (usize, F) {
        let center = self.cell_of(q);
        let mut best = (usize::MAX, F::of(f64::MAX));
        let max_ring = self.dims.iter().max().copied().unwrap_or(1) as isize + 1;
        for ring in 0..=max_ring {
            if best.0 != usize::MAX {
                // ring r cells are at Chebyshev distance r; their nearest
                // possible point is (r-1) * cell away
                let bound = F::of((ring - 1).max(0) as f64) * self.cell;
                if bound * bound > best.1 {
                    break;
                }
            }
            self.scan_ring(&center, ring, q, &mut best);
        }
        best
    }

    fn scan_ring(&self, center: &[isize; 3], ring: isize, q: &Vector3<F>, best: &mut (usize, F)) {
        let lo = [center[0] - ring, center[1] - ring, center[2] - ring];
        let hi = [center[0] + ring, center[1] + ring, center[2] + ring];
        for z in lo[2]..=hi[2] {
            if z < 0 || z >= self.dims[2] as isize {
                continue;
            }
            for y in lo[1]..=hi[1] {
                if y < 0 || y >= self.dims[1] as isize {
                    continue;
                }
                for x in lo[0]..=hi[0] {
                    if x < 0 || x >= self.dims[0] as isize {
                        continue;
                    }
                    let on_shell = (x - center[0]).abs() == ring
                        || (y - center[1]).abs() == ring
                        || (z - center[2]).abs() == ring;
                    if !on_shell {
                        continue;
                    }
                    let b = (z as usize * self.dims[1] + y as usize) * self.dims[0] + x as usize;
                    for &i in &self.buckets[b] {
                        let d = (self.points[i as usize] - q).norm_squared();
                        if d < best.1 {
                            *best = (i as usize, d);
                        }
                    }
                }
            }
        }
    }
}

/// Mean nearest-neighbor distance from each point of `from` to `to`.
pub fn directed_chamfer<F: Real>(from: &[Vector3<F>], to: &NnGrid<F>) -> F {
    if from.is_empty() {
        return F::zero();
    }
    let sum: F = from.iter().map(|p| to.nearest(p).1.sqrt()).sum();
    sum / F::of(from.len() as f64)
}

/// Symmetric Chamfer distance: average of the two directed means.
pub fn chamfer_distance<F: Real>(a: &PointCloud<F>, b: &PointCloud<F>) -> Result<F> {
    let ga = NnGrid::build(&a.points)?;
    let gb = NnGrid::build(&b.points)?;
    Ok((directed_chamfer(&a.points, &gb) + directed_chamfer(&b.points, &ga)) / F::of(2.0))
}
