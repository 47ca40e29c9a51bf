//! Stereo-reconstruction corruption of ideal height maps: per-cell Gaussian
//! noise, probabilistic boundary dilation and Gaussian smoothing.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::grid::{HeightGrid, LabelGrid};
use crate::real::Real;
use crate::rng::rng_for;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StereoNoiseParams {
    /// Gaussian elevation noise, meters.
    pub sigma_height: f64,
    /// Per-boundary-cell dilation probability.
    pub dilation_prob: f64,
    /// Dilation reach along the boundary normal, cells.
    pub dilation_radius: usize,
    /// Gaussian blur std, cells.
    pub smooth_sigma: f64,
    pub seed: u64,
}

impl Default for StereoNoiseParams {
    fn default() -> Self {
        StereoNoiseParams {
            sigma_height: 0.3,
            dilation_prob: 0.5,
            dilation_radius: 2,
            smooth_sigma: 1.0,
            seed: 0,
        }
    }
}

impl StereoNoiseParams {
    pub fn validate(&self) -> crate::error::Result<()> {
        if self.sigma_height < 0.0 || self.smooth_sigma < 0.0 {
            return Err(crate::error::Error::invalid("noise sigmas must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.dilation_prob) {
            return Err(crate::error::Error::invalid("dilation_prob must be in [0, 1]"));
        }
        Ok(())
    }
}

/// Independent per-cell Gaussian elevation noise; nodata cells untouched.
pub fn add_height_noise<F: Real>(grid: &HeightGrid<F>, params: &StereoNoiseParams) -> HeightGrid<F> {
    if params.sigma_height == 0.0 {
        return grid.clone();
    }
    let normal = Normal::new(0.0, params.sigma_height).expect("sigma checked non-negative");
    let mut rng = rng_for(params.seed, &[0x4015E]);
    let mut out = grid.clone();
    for v in out.values.iter_mut() {
        let n = normal.sample(&mut rng);
        if *v != grid.nodata {
            *v += F::of(n);
        }
    }
    out
}

/// Boundary dilation: each boundary cell that sits on the higher side of a
/// label edge copies its elevation up to `dilation_radius` cells along the
/// outward boundary normal with probability `dilation_prob`, mimicking how
/// stereo matchers smear tall structures over their surroundings.
pub fn perturb_boundaries<F: Real>(
    grid: &HeightGrid<F>,
    labels: &LabelGrid,
    params: &StereoNoiseParams,
) -> HeightGrid<F> {
    let mut out = grid.clone();
    if params.dilation_prob == 0.0 || params.dilation_radius == 0 {
        return out;
    }
    let mut rng = rng_for(params.seed, &[0xD11A7E]);
    let (w, h) = (grid.width as isize, grid.height as isize);
    let get_label = |c: isize, r: isize| -> Option<u32> {
        (c >= 0 && r >= 0 && c < w && r < h).then(|| labels.get(c as usize, r as usize))
    };
    for row in 0..grid.height {
        for col in 0..grid.width {
            let here = labels.get(col, row);
            let (c, r) = (col as isize, row as isize);
            // outward normal accumulated over differing 4-neighbors
            let mut nx = 0.0f64;
            let mut ny = 0.0f64;
            let mut diff_max: Option<F> = None;
            for (dc, dr) in [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)] {
                if let Some(l) = get_label(c + dc, r + dr) {
                    if l != here {
                        nx += dc as f64;
                        ny += dr as f64;
                        let v = grid.get((c + dc) as usize, (r + dr) as usize);
                        if v != grid.nodata && diff_max.is_none_or(|m| v > m) {
                            diff_max = Some(v);
                        }
                    }
                }
            }
            let Some(diff_max) = diff_max else {
                continue; // interior cell
            };
            let draw = rng.random::<f64>();
            let own = grid.get(col, row);
            if own == grid.nodata || own <= diff_max {
                continue; // only the higher side bleeds outward
            }
            if draw >= params.dilation_prob {
                continue;
            }
            // push directions: each differing 4-neighbor offset plus the
            // combined normal (covers the diagonal at corners); fall back
            // to 8-neighbors for 1-cell-thin strips
            let mut dirs: Vec<(f64, f64)> = Vec::with_capacity(5);
            for (dc, dr) in [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)] {
                if get_label(c + dc, r + dr).is_some_and(|l| l != here) {
                    dirs.push((dc as f64, dr as f64));
                }
            }
            if nx == 0.0 && ny == 0.0 {
                for (dc, dr) in [(-1isize, -1isize), (1, -1), (-1, 1), (1, 1)] {
                    if get_label(c + dc, r + dr).is_some_and(|l| l != here) {
                        nx += dc as f64;
                        ny += dr as f64;
                    }
                }
            }
            if nx != 0.0 || ny != 0.0 {
                let len = (nx * nx + ny * ny).sqrt();
                dirs.push((nx / len, ny / len));
            }
            for (ux, uy) in dirs {
                for k in 1..=params.dilation_radius {
                    let tc = c + (k as f64 * ux).round() as isize;
                    let tr = r + (k as f64 * uy).round() as isize;
                    if tc < 0 || tr < 0 || tc >= w || tr >= h {
                        continue;
                    }
                    let (tc, tr) = (tc as usize, tr as usize);
                    if grid.get(tc, tr) != grid.nodata {
                        out.set(tc, tr, own);
                    }
                }
            }
        }
    }
    out
}

/// Separable Gaussian blur, kernel truncated at 3 sigma and renormalized
/// over in-bounds, non-nodata taps. Nodata cells pass through unchanged.
pub fn smooth<F: Real>(grid: &HeightGrid<F>, params: &StereoNoiseParams) -> HeightGrid<F> {
    if params.smooth_sigma == 0.0 {
        return grid.clone();
    }
    let sigma = params.smooth_sigma;
    let radius = (3.0 * sigma).ceil() as isize;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let pass = |src: &HeightGrid<F>, horizontal: bool| -> HeightGrid<F> {
        let mut dst = src.clone();
        for row in 0..src.height {
            for col in 0..src.width {
                if src.is_nodata(col, row) {
                    continue;
                }
                let mut acc = 0.0f64;
                let mut wsum = 0.0f64;
                for (wi, &wgt) in weights.iter().enumerate() {
                    let o = wi as isize - radius;
                    let (c, r) = if horizontal {
                        (col as isize + o, row as isize)
                    } else {
                        (col as isize, row as isize + o)
                    };
                    if c < 0 || r < 0 || c >= src.width as isize || r >= src.height as isize {
                        continue;
                    }
                    let v = src.get(c as usize, r as usize);
                    if v == src.nodata {
                        continue;
                    }
                    acc += wgt * v.f64();
                    wsum += wgt;
                }
                dst.set(col, row, F::of(acc / wsum));
            }
        }
        dst
    };
    pass(&pass(grid, true), false)
}

/// The full corruption pipeline: noise, boundary dilation, smoothing.
pub fn corrupt<F: Real>(
    grid: &HeightGrid<F>,
    labels: &LabelGrid,
    params: &StereoNoiseParams,
) -> HeightGrid<F> {
    smooth(&perturb_boundaries(&add_height_noise(grid, params), labels, params), params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn flat_box_scene(size: usize, box_lo: usize, box_hi: usize, h: f64) -> (HeightGrid, LabelGrid) {
        let mut grid: HeightGrid = HeightGrid::new(size, size, 0.5, (0.0, 0.0), 0.0);
        let mut labels = LabelGrid::new(size, size);
        for r in box_lo..box_hi {
            for c in box_lo..box_hi {
                grid.set(c, r, h);
                labels.set(c, r, 0);
            }
        }
        (grid, labels)
    }

    #[test]
    fn zero_sigma_is_identity() {
        let (grid, _) = flat_box_scene(16, 4, 12, 8.0);
        let p = StereoNoiseParams {
            sigma_height: 0.0,
            ..Default::default()
        };
        assert_eq!(add_height_noise(&grid, &p), grid);
    }

    #[test]
    fn noise_sample_std_matches_sigma() {
        let grid: HeightGrid = HeightGrid::new(256, 256, 0.5, (0.0, 0.0), 5.0);
        let p = StereoNoiseParams {
            sigma_height: 0.3,
            seed: 9,
            ..Default::default()
        };
        let noisy = add_height_noise(&grid, &p);
        let diffs: Vec<f64> = noisy
            .values
            .iter()
            .zip(&grid.values)
            .map(|(a, b)| a - b)
            .collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64;
        let std = var.sqrt();
        assert!((0.27..=0.33).contains(&std), "sample std {std}");
    }

    #[test]
    fn noise_is_deterministic_and_skips_nodata() {
        let mut grid: HeightGrid = HeightGrid::new(8, 8, 0.5, (0.0, 0.0), 2.0);
        grid.set(3, 3, grid.nodata);
        let p = StereoNoiseParams {
            seed: 4,
            ..Default::default()
        };
        let a = add_height_noise(&grid, &p);
        let b = add_height_noise(&grid, &p);
        assert_eq!(a, b);
        assert!(a.is_nodata(3, 3));
    }

    #[test]
    fn zero_prob_dilation_is_identity() {
        let (grid, labels) = flat_box_scene(16, 4, 12, 8.0);
        let p = StereoNoiseParams {
            dilation_prob: 0.0,
            ..Default::default()
        };
        assert_eq!(perturb_boundaries(&grid, &labels, &p), grid);
    }

    #[test]
    fn full_dilation_grows_mask_by_one_ring() {
        let (grid, labels) = flat_box_scene(20, 6, 14, 8.0);
        let p = StereoNoiseParams {
            dilation_prob: 1.0,
            dilation_radius: 1,
            seed: 2,
            ..Default::default()
        };
        let out = perturb_boundaries(&grid, &labels, &p);
        // morphological dilation oracle on the thresholded mask
        let before = crate::grid::BinaryMask::from_fn(20, 20, |c, r| grid.get(c, r) > 4.0);
        let expected = before.dilate(1);
        let after = crate::grid::BinaryMask::from_fn(20, 20, |c, r| out.get(c, r) > 4.0);
        assert_eq!(after, expected);
    }

    #[test]
    fn cells_far_from_boundaries_never_change() {
        let (grid, labels) = flat_box_scene(24, 6, 18, 9.0);
        for seed in 0..5 {
            let p = StereoNoiseParams {
                dilation_prob: 1.0,
                dilation_radius: 2,
                seed,
                ..Default::default()
            };
            let out = perturb_boundaries(&grid, &labels, &p);
            for r in 0..24usize {
                for c in 0..24usize {
                    // distance (Chebyshev) to the nearest label boundary cell
                    let mut near_boundary = false;
                    for dr in -2isize..=2 {
                        for dc in -2isize..=2 {
                            let (cc, rr) = (c as isize + dc, r as isize + dr);
                            if cc >= 0 && rr >= 0 && cc < 24 && rr < 24
                                && labels.is_boundary(cc as usize, rr as usize)
                            {
                                near_boundary = true;
                            }
                        }
                    }
                    if !near_boundary {
                        assert_eq!(out.get(c, r), grid.get(c, r), "cell ({c},{r}) changed");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_smooth_sigma_is_identity() {
        let (grid, _) = flat_box_scene(16, 4, 12, 8.0);
        let p = StereoNoiseParams {
            smooth_sigma: 0.0,
            ..Default::default()
        };
        assert_eq!(smooth(&grid, &p), grid);
    }

    #[test]
    fn smoothing_preserves_constant_grids() {
        let grid: HeightGrid = HeightGrid::new(32, 32, 0.5, (0.0, 0.0), 7.25);
        let p = StereoNoiseParams::default();
        let out = smooth(&grid, &p);
        for v in &out.values {
            assert_relative_eq!(*v, 7.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn impulse_response_matches_direct_convolution() {
        let n = 41;
        let mut grid: HeightGrid = HeightGrid::new(n, n, 1.0, (0.0, 0.0), 0.0);
        grid.set(20, 20, 1.0);
        let p = StereoNoiseParams {
            smooth_sigma: 1.5,
            ..Default::default()
        };
        let out = smooth(&grid, &p);
        // direct 2D truncated-kernel convolution oracle
        let sigma = 1.5f64;
        let radius = (3.0 * sigma).ceil() as isize;
        let mut norm = 0.0;
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                norm += (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
            }
        }
        for &(dc, dr) in &[(0isize, 0isize), (1, 0), (0, 2), (-3, 1), (2, -2)] {
            let expected =
                (-((dc * dc + dr * dr) as f64) / (2.0 * sigma * sigma)).exp() / norm;
            let got = out.get((20 + dc) as usize, (20 + dr) as usize);
            assert_relative_eq!(got, expected, max_relative = 1e-9);
        }
    }

    #[test]
    fn smoothing_is_linear() {
        let (g1, _) = flat_box_scene(24, 4, 12, 6.0);
        let (g2, _) = flat_box_scene(24, 10, 20, 9.0);
        let p = StereoNoiseParams::default();
        let (a, b) = (1.7f64, -0.4f64);
        let mut combo = g1.clone();
        for (i, v) in combo.values.iter_mut().enumerate() {
            *v = a * g1.values[i] + b * g2.values[i];
        }
        let lhs = smooth(&combo, &p);
        let (s1, s2) = (smooth(&g1, &p), smooth(&g2, &p));
        for i in 0..lhs.values.len() {
            assert_relative_eq!(
                lhs.values[i],
                a * s1.values[i] + b * s2.values[i],
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn composed_pipeline_stays_finite_and_zero_params_identity() {
        let (grid, labels) = flat_box_scene(32, 8, 24, 12.0);
        let p = StereoNoiseParams {
            sigma_height: 0.3,
            dilation_prob: 0.5,
            dilation_radius: 2,
            smooth_sigma: 1.0,
            seed: 77,
        };
        let out = corrupt(&grid, &labels, &p);
        assert!(out.values.iter().all(|v| v.is_finite()));
        let zero = StereoNoiseParams {
            sigma_height: 0.0,
            dilation_prob: 0.0,
            dilation_radius: 0,
            smooth_sigma: 0.0,
            seed: 77,
        };
        assert_eq!(corrupt(&grid, &labels, &zero), grid);
    }
}
