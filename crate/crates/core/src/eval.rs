//! Completeness, correctness and Jaccard metrics in 2D (cells) and 3D
//! (height-column voxels referenced to the datum).

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::RotatedRect;
use crate::grid::{BinaryMask, HeightGrid};
use crate::mesh::{Mesh, SceneModel, SceneSection};
use crate::real::Real;
use crate::transform::SimTransform;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalScores {
    pub completeness_2d: f64,
    pub correctness_2d: f64,
    pub jaccard_2d: f64,
    pub completeness_3d: f64,
    pub correctness_3d: f64,
    pub jaccard_3d: f64,
}

impl EvalScores {
    pub fn validate(&self) -> Result<()> {
        for (j, c, r) in [
            (self.jaccard_2d, self.completeness_2d, self.correctness_2d),
            (self.jaccard_3d, self.completeness_3d, self.correctness_3d),
        ] {
            if j > c.min(r) + 1e-12 {
                return Err(Error::invalid("jaccard exceeds min(completeness, correctness)"));
            }
        }
        Ok(())
    }
}

fn ratios(tp: u64, fp: u64, fn_: u64) -> (f64, f64, f64) {
    let completeness = if tp + fn_ == 0 {
        1.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let correctness = if tp + fp == 0 {
        1.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let jaccard = if tp + fp + fn_ == 0 {
        1.0
    } else {
        tp as f64 / (tp + fp + fn_) as f64
    };
    (completeness, correctness, jaccard)
}

/// Per-cell TP/FP/FN counts of a predicted mask against the truth.
pub fn mask_counts(pred: &BinaryMask, truth: &BinaryMask) -> Result<(u64, u64, u64)> {
    if pred.width != truth.width || pred.height != truth.height {
        return Err(Error::invalid(format!(
            "mask dimensions differ: {}x{} vs {}x{}",
            pred.width, pred.height, truth.width, truth.height
        )));
    }
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for (p, t) in pred.bits.iter().zip(&truth.bits) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok((tp, fp, fn_))
}

/// 2D completeness, correctness and Jaccard index.
pub fn scores_2d(pred: &BinaryMask, truth: &BinaryMask) -> Result<(f64, f64, f64)> {
    let (tp, fp, fn_) = mask_counts(pred, truth)?;
    Ok(ratios(tp, fp, fn_))
}

/// z-aligned similarity extracted from a transform: `(angle_deg, scale_xy,
/// map of a 2D point, z scale, z offset)`. Exact for transforms whose
/// rotation is about z; out-of-plane tilt is projected away.
struct Similarity2d<F: Real> {
    angle_deg: F,
    scale: F,
    t: SimTransform<F>,
}

impl<F: Real> Similarity2d<F> {
    fn of(t: &SimTransform<F>) -> Self {
        let r = t.rotation_matrix();
        let angle = r[(1, 0)].atan2(r[(0, 0)]) * F::of(180.0) / F::pi();
        let scale = t.scale * (r[(0, 0)] * r[(0, 0)] + r[(1, 0)] * r[(1, 0)]).sqrt();
        Similarity2d {
            angle_deg: angle,
            scale,
            t: *t,
        }
    }

    fn map_xy(&self, x: F, y: F) -> (F, F) {
        let p = self.t.apply(&Vector3::new(x, y, F::zero()));
        (p.x, p.y)
    }

    fn map_z(&self, z: F) -> F {
        let r = self.t.rotation_matrix();
        self.t.scale * r[(2, 2)] * z + self.t.translation[2]
    }
}

/// Footprint of a section after its refinement transform.
pub fn effective_footprint<F: Real>(section: &SceneSection<F>) -> RotatedRect<F> {
    let sim = Similarity2d::of(&section.transform);
    let (cx, cy) = sim.map_xy(section.footprint.center.0, section.footprint.center.1);
    RotatedRect {
        center: (cx, cy),
        half_extents: (
            section.footprint.half_extents.0 * sim.scale,
            section.footprint.half_extents.1 * sim.scale,
        ),
        angle_deg: section.footprint.angle_deg + sim.angle_deg,
    }
}

/// Surface elevation of the model at a world point: the maximum over
/// covering sections, `None` on open ground.
pub fn scene_height_at<F: Real>(scene: &SceneModel<F>, x: F, y: F) -> Option<F> {
    let mut best: Option<F> = None;
    for s in &scene.sections {
        let fp = effective_footprint(s);
        let (u, v) = fp.to_unit(x, y);
        if !(F::zero()..=F::one()).contains(&u) || !(F::zero()..=F::one()).contains(&v) {
            continue;
        }
        let sim = Similarity2d::of(&s.transform);
        let z = sim.map_z(s.base_elevation + s.roof.height_at(u, v));
        if best.is_none_or(|b| z > b) {
            best = Some(z);
        }
    }
    best
}

/// Mask of cells whose centers are covered by any section footprint.
pub fn project_to_2d<F: Real>(scene: &SceneModel<F>, template: &HeightGrid<F>) -> BinaryMask {
    let footprints: Vec<RotatedRect<F>> = scene.sections.iter().map(effective_footprint).collect();
    BinaryMask::from_fn(template.width, template.height, |c, r| {
        let (x, y) = template.cell_center(c, r);
        footprints.iter().any(|fp| fp.contains(x, y))
    })
}

/// Number of voxel centers in `[lo, hi]` on a ladder anchored at `z0`.
fn interval_voxels(z0: f64, lo: f64, hi: f64, voxel: f64) -> u64 {
    if hi <= lo {
        return 0;
    }
    let n = |h: f64| -> i64 { (((h - z0) / voxel + 0.5).floor() as i64).max(0) };
    (n(hi) - n(lo)).max(0) as u64
}

/// Column-voxel TP/FP/FN of a predicted scene against a truth height grid
/// and building mask. Both solids live between their datum and surface.
pub fn voxel_counts_scene<F: Real>(
    scene: &SceneModel<F>,
    truth: &HeightGrid<F>,
    truth_mask: &BinaryMask,
    truth_datum: F,
    voxel: f64,
) -> Result<(u64, u64, u64)> {
    truth_mask.same_shape(truth)?;
    if voxel <= 0.0 {
        return Err(Error::invalid("voxel size must be positive"));
    }
    let z0 = scene.datum.f64().min(truth_datum.f64());
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for r in 0..truth.height {
        for c in 0..truth.width {
            let (x, y) = truth.cell_center(c, r);
            let pred = scene_height_at(scene, x, y).map(|h| h.f64());
            let tru = (truth_mask.get(c, r) && !truth.is_nodata(c, r))
                .then(|| truth.get(c, r).f64());
            let np = pred.map_or(0, |h| interval_voxels(z0, scene.datum.f64(), h, voxel));
            let nt = tru.map_or(0, |h| interval_voxels(z0, truth_datum.f64(), h, voxel));
            let overlap = match (pred, tru) {
                (Some(hp), Some(ht)) => interval_voxels(
                    z0,
                    scene.datum.f64().max(truth_datum.f64()),
                    hp.min(ht),
                    voxel,
                ),
                _ => 0,
            };
            tp += overlap;
            fp += np - overlap.min(np);
            fn_ += nt - overlap.min(nt);
        }
    }
    Ok((tp, fp, fn_))
}

/// 3D completeness, correctness and Jaccard of a scene model.
pub fn scores_3d<F: Real>(
    scene: &SceneModel<F>,
    truth: &HeightGrid<F>,
    truth_mask: &BinaryMask,
    truth_datum: F,
    voxel: f64,
) -> Result<(f64, f64, f64)> {
    let (tp, fp, fn_) = voxel_counts_scene(scene, truth, truth_mask, truth_datum, voxel)?;
    Ok(ratios(tp, fp, fn_))
}

/// Upper-surface heights of a mesh rasterized onto the template grid
/// (nodata where no triangle covers the cell center).
pub fn rasterize_mesh_heights<F: Real>(mesh: &Mesh<F>, template: &HeightGrid<F>) -> HeightGrid<F> {
    let mut out = template.clone();
    let nodata = out.nodata;
    out.values.fill(nodata);
    let cs = template.cell_size.f64();
    for f in &mesh.faces {
        let a = mesh.vertices[f[0] as usize];
        let b = mesh.vertices[f[1] as usize];
        let c = mesh.vertices[f[2] as usize];
        let x0 = a.x.f64().min(b.x.f64()).min(c.x.f64());
        let x1 = a.x.f64().max(b.x.f64()).max(c.x.f64());
        let y0 = a.y.f64().min(b.y.f64()).min(c.y.f64());
        let y1 = a.y.f64().max(b.y.f64()).max(c.y.f64());
        let c0 = (((x0 - template.origin.0.f64()) / cs).floor().max(0.0)) as usize;
        let r0 = (((y0 - template.origin.1.f64()) / cs).floor().max(0.0)) as usize;
        let c1 = ((((x1 - template.origin.0.f64()) / cs).ceil()) as usize)
            .min(template.width.saturating_sub(1));
        let r1 = ((((y1 - template.origin.1.f64()) / cs).ceil()) as usize)
            .min(template.height.saturating_sub(1));
        if c0 > c1 || r0 > r1 {
            continue;
        }
        // 2D barycentric containment, z from the triangle plane
        let (ax, ay) = (a.x.f64(), a.y.f64());
        let (bx, by) = (b.x.f64(), b.y.f64());
        let (cx, cy) = (c.x.f64(), c.y.f64());
        let det = (bx - ax) * (cy - ay) - (cx - ax) * (by - ay);
        if det.abs() < 1e-18 {
            continue; // vertical or degenerate in projection
        }
        for r in r0..=r1 {
            for colc in c0..=c1 {
                let (x, y) = template.cell_center(colc, r);
                let (x, y) = (x.f64(), y.f64());
                let l1 = ((bx - x) * (cy - y) - (cx - x) * (by - y)) / det;
                let l2 = ((cx - x) * (ay - y) - (ax - x) * (cy - y)) / det;
                let l3 = 1.0 - l1 - l2;
                if l1 < -1e-12 || l2 < -1e-12 || l3 < -1e-12 {
                    continue;
                }
                let z = l1 * a.z.f64() + l2 * b.z.f64() + l3 * c.z.f64();
                let cur = out.get(colc, r);
                if cur == nodata || z > cur.f64() {
                    out.set(colc, r, F::of(z));
                }
            }
        }
    }
    out
}

/// 3D scores of a watertight mesh reconstruction (column-voxelized via its
/// rasterized upper surface).
pub fn scores_3d_mesh<F: Real>(
    mesh: &Mesh<F>,
    pred_datum: F,
    truth: &HeightGrid<F>,
    truth_mask: &BinaryMask,
    truth_datum: F,
    voxel: f64,
) -> Result<(f64, f64, f64)> {
    if !mesh.is_watertight() {
        return Err(Error::invalid("predicted mesh is not watertight"));
    }
    let heights = rasterize_mesh_heights(mesh, truth);
    if voxel <= 0.0 {
        return Err(Error::invalid("voxel size must be positive"));
    }
    let z0 = pred_datum.f64().min(truth_datum.f64());
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for r in 0..truth.height {
        for c in 0..truth.width {
            let pred = (!heights.is_nodata(c, r)).then(|| heights.get(c, r).f64());
            let tru =
                (truth_mask.get(c, r) && !truth.is_nodata(c, r)).then(|| truth.get(c, r).f64());
            let np = pred.map_or(0, |h| interval_voxels(z0, pred_datum.f64(), h, voxel));
            let nt = tru.map_or(0, |h| interval_voxels(z0, truth_datum.f64(), h, voxel));
            let overlap = match (pred, tru) {
                (Some(hp), Some(ht)) => interval_voxels(
                    z0,
                    pred_datum.f64().max(truth_datum.f64()),
                    hp.min(ht),
                    voxel,
                ),
                _ => 0,
            };
            tp += overlap;
            fp += np - overlap.min(np);
            fn_ += nt - overlap.min(nt);
        }
    }
    Ok(ratios(tp, fp, fn_))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::RoofSpec;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mask_of(w: usize, h: usize, f: impl Fn(usize, usize) -> bool) -> BinaryMask {
        BinaryMask::from_fn(w, h, f)
    }

    #[test]
    fn identical_masks_score_one() {
        let m = mask_of(8, 8, |c, r| c > 2 && r < 6);
        assert_eq!(scores_2d(&m, &m).unwrap(), (1.0, 1.0, 1.0));
    }

    #[test]
    fn direct_formula_case() {
        // TP = 9, FN = 1, FP = 0
        let truth = mask_of(5, 2, |c, r| r == 0 || c < 5);
        let truth = {
            let mut t = truth;
            for c in 0..5 {
                for r in 0..2 {
                    t.set(c, r, true);
                }
            }
            t
        };
        let pred = mask_of(5, 2, |c, r| !(c == 4 && r == 1));
        let (comp, corr, jac) = scores_2d(&pred, &truth).unwrap();
        assert_relative_eq!(comp, 0.9);
        assert_relative_eq!(corr, 1.0);
        assert_relative_eq!(jac, 0.9);
    }

    #[test]
    fn dimension_mismatch_errors() {
        let a = mask_of(4, 4, |_, _| true);
        let b = mask_of(4, 5, |_, _| true);
        assert!(scores_2d(&a, &b).is_err());
    }

    #[test]
    fn empty_masks_conventions() {
        let empty = BinaryMask::new(4, 4);
        assert_eq!(scores_2d(&empty, &empty).unwrap(), (1.0, 1.0, 1.0));
        let full = mask_of(4, 4, |_, _| true);
        let (comp, corr, jac) = scores_2d(&empty, &full).unwrap();
        assert_eq!((comp, corr, jac), (0.0, 1.0, 0.0));
    }

    #[test]
    fn random_masks_match_brute_force_counter() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let w = rng.random_range(1..12);
            let h = rng.random_range(1..12);
            let pred = BinaryMask {
                width: w,
                height: h,
                bits: (0..w * h).map(|_| rng.random::<f64>() < 0.4).collect(),
            };
            let truth = BinaryMask {
                width: w,
                height: h,
                bits: (0..w * h).map(|_| rng.random::<f64>() < 0.4).collect(),
            };
            let (comp, corr, jac) = scores_2d(&pred, &truth).unwrap();
            // brute-force oracle
            let (mut tp, mut fp, mut fn_) = (0.0f64, 0.0f64, 0.0f64);
            for r in 0..h {
                for c in 0..w {
                    if pred.get(c, r) && truth.get(c, r) {
                        tp += 1.0;
                    } else if pred.get(c, r) {
                        fp += 1.0;
                    } else if truth.get(c, r) {
                        fn_ += 1.0;
                    }
                }
            }
            let ec = if tp + fn_ == 0.0 { 1.0 } else { tp / (tp + fn_) };
            let er = if tp + fp == 0.0 { 1.0 } else { tp / (tp + fp) };
            let ej = if tp + fp + fn_ == 0.0 {
                1.0
            } else {
                tp / (tp + fp + fn_)
            };
            assert!((comp - ec).abs() < 1e-12);
            assert!((corr - er).abs() < 1e-12);
            assert!((jac - ej).abs() < 1e-12);
            // symmetry of jaccard
            let (_, _, jr) = scores_2d(&truth, &pred).unwrap();
            assert!((jac - jr).abs() < 1e-12);
        }
    }

    fn box_scene(height: f64, hx: f64, hy: f64) -> SceneModel {
        SceneModel {
            sections: vec![SceneSection {
                footprint: RotatedRect {
                    center: (0.0, 0.0),
                    half_extents: (hx, hy),
                    angle_deg: 0.0,
                },
                base_elevation: 0.0,
                roof: RoofSpec::flat(height),
                transform: SimTransform::identity(),
            }],
            datum: 0.0,
        }
    }

    fn truth_grid(height: f64, hx: f64, hy: f64) -> (HeightGrid, BinaryMask) {
        let g: HeightGrid = HeightGrid::new(40, 40, 0.5, (-9.75, -9.75), 0.0);
        let mut grid = g;
        let mask = BinaryMask::from_fn(40, 40, |c, r| {
            let (x, y) = grid.cell_center(c, r);
            x.abs() <= hx && y.abs() <= hy
        });
        for (c, r) in mask.iter_true() {
            grid.set(c, r, height);
        }
        (grid, mask)
    }

    #[test]
    fn identical_solids_score_one() {
        let scene = box_scene(10.0, 5.0, 4.0);
        let (grid, mask) = truth_grid(10.0, 5.0, 4.0);
        // build the truth grid from the scene itself so footprints align
        let mut grid = grid;
        for r in 0..grid.height {
            for c in 0..grid.width {
                let (x, y) = grid.cell_center(c, r);
                if let Some(h) = scene_height_at(&scene, x, y) {
                    grid.set(c, r, h);
                }
            }
        }
        let mask = BinaryMask::from_fn(40, 40, |c, r| {
            let (x, y) = grid.cell_center(c, r);
            scene_height_at(&scene, x, y).is_some()
        });
        let s = scores_3d(&scene, &grid, &mask, 0.0, 0.5).unwrap();
        assert_eq!(s, (1.0, 1.0, 1.0));
        let _ = mask;
    }

    #[test]
    fn column_arithmetic_case() {
        // predicted box height 8 vs truth 10, same footprint
        let scene = box_scene(8.0, 5.0, 4.0);
        let (grid, mask) = truth_grid(10.0, 5.0, 4.0);
        // align the footprint exactly with predicted coverage
        let mask = BinaryMask::from_fn(40, 40, |c, r| {
            let (x, y) = grid.cell_center(c, r);
            scene_height_at(&scene, x, y).is_some()
        });
        let mut grid2 = grid.clone();
        for (c, r) in mask.iter_true() {
            grid2.set(c, r, 10.0);
        }
        let (comp, corr, jac) = scores_3d(&scene, &grid2, &mask, 0.0, 0.5).unwrap();
        assert_relative_eq!(comp, 0.8);
        assert_relative_eq!(corr, 1.0);
        assert_relative_eq!(jac, 0.8);
    }

    #[test]
    fn voxel_counts_match_explicit_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..40 {
            let hx = 2.0 + rng.random::<f64>() * 4.0;
            let hy = 2.0 + rng.random::<f64>() * 4.0;
            let hp = 4.0 + rng.random::<f64>() * 8.0;
            let ht = 4.0 + rng.random::<f64>() * 8.0;
            let scene = box_scene(hp, hx, hy);
            let (mut grid, _) = truth_grid(ht, hx + 1.0, hy - 0.5);
            let mask = BinaryMask::from_fn(40, 40, |c, r| {
                let (x, y) = grid.cell_center(c, r);
                x.abs() <= hx + 1.0 && y.abs() <= (hy - 0.5).max(0.5)
            });
            for (c, r) in mask.iter_true() {
                grid.set(c, r, ht);
            }
            let voxel = 0.5;
            let (tp, fp, fn_) = voxel_counts_scene(&scene, &grid, &mask, 0.0, voxel).unwrap();
            // explicit per-voxel oracle
            let (mut otp, mut ofp, mut ofn) = (0u64, 0u64, 0u64);
            for r in 0..grid.height {
                for c in 0..grid.width {
                    let (x, y) = grid.cell_center(c, r);
                    let hp_here = scene_height_at(&scene, x, y).unwrap_or(f64::NEG_INFINITY);
                    let ht_here = if mask.get(c, r) {
                        grid.get(c, r)
                    } else {
                        f64::NEG_INFINITY
                    };
                    let mut k = 0usize;
                    loop {
                        let z = (k as f64 + 0.5) * voxel;
                        if z > 25.0 {
                            break;
                        }
                        let in_p = z <= hp_here;
                        let in_t = z <= ht_here;
                        match (in_p, in_t) {
                            (true, true) => otp += 1,
                            (true, false) => ofp += 1,
                            (false, true) => ofn += 1,
                            _ => {}
                        }
                        k += 1;
                    }
                }
            }
            assert_eq!((tp, fp, fn_), (otp, ofp, ofn));
        }
    }

    #[test]
    fn project_empty_model_is_all_false() {
        let scene: SceneModel = SceneModel {
            sections: vec![],
            datum: 0.0,
        };
        let g: HeightGrid = HeightGrid::new(10, 10, 0.5, (0.0, 0.0), 0.0);
        assert!(project_to_2d(&scene, &g).is_empty());
    }

    #[test]
    fn rotated_footprint_area_close_to_analytic() {
        let scene = SceneModel {
            sections: vec![SceneSection {
                footprint: RotatedRect {
                    center: (0.0, 0.0),
                    half_extents: (6.0, 3.5),
                    angle_deg: 28.0,
                },
                base_elevation: 0.0,
                roof: RoofSpec::flat(5.0),
                transform: SimTransform::identity(),
            }],
            datum: 0.0,
        };
        let g: HeightGrid = HeightGrid::new(120, 120, 0.25, (-14.875, -14.875), 0.0);
        let mask = project_to_2d(&scene, &g);
        let area = mask.count() as f64 * 0.0625;
        assert_relative_eq!(area, 4.0 * 6.0 * 3.5, max_relative = 0.02);
    }

    #[test]
    fn flat_scene_2d_equals_3d_jaccard() {
        // exact heights: column voxel counts cancel in the ratio
        let scene = box_scene(8.0, 5.0, 4.0);
        let g: HeightGrid = HeightGrid::new(40, 40, 0.5, (-9.75, -9.75), 0.0);
        let pred_mask = project_to_2d(&scene, &g);
        let mut truth = g.clone();
        let truth_mask = BinaryMask::from_fn(40, 40, |c, r| {
            let (x, y) = truth.cell_center(c, r);
            x.abs() <= 5.5 && y.abs() <= 4.5
        });
        for (c, r) in truth_mask.iter_true() {
            truth.set(c, r, 8.0);
        }
        let (_, _, j2) = scores_2d(&pred_mask, &truth_mask).unwrap();
        let (_, _, j3) = scores_3d(&scene, &truth, &truth_mask, 0.0, 0.5).unwrap();
        assert_relative_eq!(j2, j3, epsilon = 1e-12);
    }

    #[test]
    fn growing_pred_inside_truth_is_monotone() {
        let truth = mask_of(20, 20, |c, r| (4..16).contains(&c) && (4..16).contains(&r));
        let small = mask_of(20, 20, |c, r| (6..12).contains(&c) && (6..12).contains(&r));
        let bigger = mask_of(20, 20, |c, r| (5..14).contains(&c) && (5..14).contains(&r));
        let (c1, _, j1) = scores_2d(&small, &truth).unwrap();
        let (c2, _, j2) = scores_2d(&bigger, &truth).unwrap();
        assert!(c2 >= c1);
        assert!(j2 >= j1);
    }

    #[test]
    fn mesh_route_requires_watertight() {
        let mut mesh = crate::mesh::primitive_mesh(
            crate::primitives::PrimitiveType::Flat,
            &RoofSpec::flat(5.0),
        )
        .unwrap();
        mesh.faces.pop();
        mesh.face_sections.pop();
        let g: HeightGrid = HeightGrid::new(8, 8, 0.5, (0.0, 0.0), 0.0);
        let m = BinaryMask::new(8, 8);
        assert!(scores_3d_mesh(&mesh, 0.0, &g, &m, 0.0, 0.5).is_err());
    }

    #[test]
    fn mesh_route_agrees_with_scene_route() {
        let scene = box_scene(9.0, 4.0, 3.0);
        let mesh = crate::mesh::assemble_scene(&scene).unwrap();
        let g: HeightGrid = HeightGrid::new(40, 40, 0.5, (-9.75, -9.75), 0.0);
        let mut truth = g.clone();
        let truth_mask = BinaryMask::from_fn(40, 40, |c, r| {
            let (x, y) = truth.cell_center(c, r);
            x.abs() <= 4.2 && y.abs() <= 3.4
        });
        for (c, r) in truth_mask.iter_true() {
            truth.set(c, r, 9.0);
        }
        let a = scores_3d(&scene, &truth, &truth_mask, 0.0, 0.5).unwrap();
        let b = scores_3d_mesh(&mesh, 0.0, &truth, &truth_mask, 0.0, 0.5).unwrap();
        assert_relative_eq!(a.0, b.0, epsilon = 1e-9);
        assert_relative_eq!(a.1, b.1, epsilon = 1e-9);
        assert_relative_eq!(a.2, b.2, epsilon = 1e-9);
    }
}
