//! Raster containers: elevation grids, binary masks and section label grids.
//!
//! Cell `(col, row)` has its center at
//! `(origin.x + col * cell_size, origin.y + row * cell_size)`; row indices
//! grow towards +y. Values are stored row-major.

use crate::error::{Error, Result};
use crate::real::Real;

pub const DEFAULT_NODATA: f64 = -9999.0;

/// Sentinel label for cells not covered by any section.
pub const GROUND: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct HeightGrid<F: Real = f64> {
    pub width: usize,
    pub height: usize,
    pub cell_size: F,
    pub origin: (F, F),
    pub values: Vec<F>,
    pub nodata: F,
}

impl<F: Real> HeightGrid<F> {
    pub fn new(width: usize, height: usize, cell_size: F, origin: (F, F), fill: F) -> Self {
        HeightGrid {
            width,
            height,
            cell_size,
            origin,
            values: vec![fill; width * height],
            nodata: F::of(DEFAULT_NODATA),
        }
    }

    #[inline]
    pub fn idx(&self, col: usize, row: usize) -> usize {
        debug_assert!(col < self.width && row < self.height);
        row * self.width + col
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> F {
        self.values[self.idx(col, row)]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, v: F) {
        let i = self.idx(col, row);
        self.values[i] = v;
    }

    #[inline]
    pub fn is_nodata(&self, col: usize, row: usize) -> bool {
        self.get(col, row) == self.nodata
    }

    /// World coordinates of the cell center.
    #[inline]
    pub fn cell_center(&self, col: usize, row: usize) -> (F, F) {
        (
            self.origin.0 + F::of(col as f64) * self.cell_size,
            self.origin.1 + F::of(row as f64) * self.cell_size,
        )
    }

    /// Cell containing the world point, if inside the raster.
    pub fn cell_at(&self, x: F, y: F) -> Option<(usize, usize)> {
        let half = self.cell_size / F::of(2.0);
        let c = ((x - self.origin.0 + half) / self.cell_size).floor();
        let r = ((y - self.origin.1 + half) / self.cell_size).floor();
        if c < F::zero() || r < F::zero() {
            return None;
        }
        let (c, r) = (c.f64() as usize, r.f64() as usize);
        (c < self.width && r < self.height).then_some((c, r))
    }

    pub fn valid_values(&self) -> impl Iterator<Item = F> + '_ {
        let nodata = self.nodata;
        self.values.iter().copied().filter(move |v| *v != nodata)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.width * self.height {
            return Err(Error::invalid(format!(
                "grid holds {} values for {}x{} cells",
                self.values.len(),
                self.width,
                self.height
            )));
        }
        if !(self.cell_size > F::zero()) {
            return Err(Error::invalid("cell_size must be positive"));
        }
        if self.valid_values().any(|v| !v.finite()) {
            return Err(Error::invalid("grid contains non-finite elevations"));
        }
        Ok(())
    }

    pub fn map<G: Real>(&self, f: impl Fn(F) -> G) -> HeightGrid<G> {
        HeightGrid {
            width: self.width,
            height: self.height,
            cell_size: G::of(self.cell_size.f64()),
            origin: (G::of(self.origin.0.f64()), G::of(self.origin.1.f64())),
            values: self.values.iter().map(|&v| f(v)).collect(),
            nodata: G::of(self.nodata.f64()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                bits.push(f(col, row));
            }
        }
        BinaryMask {
            width,
            height,
            bits,
        }
    }

    #[inline]
    pub fn idx(&self, col: usize, row: usize) -> usize {
        debug_assert!(col < self.width && row < self.height);
        row * self.width + col
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> bool {
        self.bits[self.idx(col, row)]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, v: bool) {
        let i = self.idx(col, row);
        self.bits[i] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn iter_true(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| (i % w, i / w))
    }

    pub fn same_shape<F: Real>(&self, grid: &HeightGrid<F>) -> Result<()> {
        if self.width != grid.width || self.height != grid.height {
            return Err(Error::invalid(format!(
                "mask {}x{} does not match grid {}x{}",
                self.width, self.height, grid.width, grid.height
            )));
        }
        Ok(())
    }

    /// Morphological dilation with a (2r+1)^2 square structuring element.
    pub fn dilate(&self, r: usize) -> BinaryMask {
        self.morph(r, true)
    }

    /// Morphological erosion with a (2r+1)^2 square structuring element.
    pub fn erode(&self, r: usize) -> BinaryMask {
        self.morph(r, false)
    }

    pub fn open(&self, r: usize) -> BinaryMask {
        self.erode(r).dilate(r)
    }

    pub fn close(&self, r: usize) -> BinaryMask {
        self.dilate(r).erode(r)
    }

    fn morph(&self, r: usize, dilate: bool) -> BinaryMask {
        let r = r as isize;
        let mut out = BinaryMask::new(self.width, self.height);
        for row in 0..self.height {
            for col in 0..self.width {
                let mut acc = !dilate;
                'win: for dr in -r..=r {
                    for dc in -r..=r {
                        let (c, rw) = (col as isize + dc, row as isize + dr);
                        let v = if c < 0
                            || rw < 0
                            || c >= self.width as isize
                            || rw >= self.height as isize
                        {
                            false
                        } else {
                            self.get(c as usize, rw as usize)
                        };
                        if v == dilate {
                            acc = dilate;
                            break 'win;
                        }
                    }
                }
                out.set(col, row, acc);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelGrid {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
}

impl LabelGrid {
    pub fn new(width: usize, height: usize) -> Self {
        LabelGrid {
            width,
            height,
            labels: vec![GROUND; width * height],
        }
    }

    #[inline]
    pub fn idx(&self, col: usize, row: usize) -> usize {
        debug_assert!(col < self.width && row < self.height);
        row * self.width + col
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> u32 {
        self.labels[self.idx(col, row)]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, v: u32) {
        let i = self.idx(col, row);
        self.labels[i] = v;
    }

    /// True when any 4-neighbor carries a different label (raster borders do
    /// not count as boundaries).
    pub fn is_boundary(&self, col: usize, row: usize) -> bool {
        let here = self.get(col, row);
        let (c, r) = (col as isize, row as isize);
        [(c - 1, r), (c + 1, r), (c, r - 1), (c, r + 1)]
            .into_iter()
            .any(|(nc, nr)| {
                nc >= 0
                    && nr >= 0
                    && (nc as usize) < self.width
                    && (nr as usize) < self.height
                    && self.get(nc as usize, nr as usize) != here
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_center_and_lookup_roundtrip() {
        let g: HeightGrid = HeightGrid::new(4, 3, 0.5, (10.0, 20.0), 0.0);
        let (x, y) = g.cell_center(3, 2);
        assert_eq!((x, y), (11.5, 21.0));
        assert_eq!(g.cell_at(x, y), Some((3, 2)));
        assert_eq!(g.cell_at(9.0, 20.0), None);
    }

    #[test]
    fn validate_catches_dimension_mismatch() {
        let mut g: HeightGrid = HeightGrid::new(2, 2, 1.0, (0.0, 0.0), 0.0);
        g.values.pop();
        assert!(g.validate().is_err());
    }

    #[test]
    fn dilation_grows_single_cell_to_square() {
        let mut m = BinaryMask::new(5, 5);
        m.set(2, 2, true);
        let d = m.dilate(1);
        assert_eq!(d.count(), 9);
        assert!(d.get(1, 1) && d.get(3, 3) && !d.get(0, 0));
        assert_eq!(d.erode(1).count(), 1);
    }

    #[test]
    fn open_removes_specks_close_fills_holes() {
        let mut m =
            BinaryMask::from_fn(16, 16, |c, r| (2..13).contains(&c) && (2..13).contains(&r));
        m.set(0, 0, true); // speck
        m.set(7, 7, false); // hole
        let cleaned = m.open(1).close(1);
        assert!(!cleaned.get(0, 0));
        assert!(cleaned.get(7, 7));
        assert!(cleaned.get(2, 2) && cleaned.get(12, 12));
    }

    #[test]
    fn label_boundary_detection() {
        let mut l = LabelGrid::new(4, 1);
        l.set(0, 0, 0);
        l.set(1, 0, 0);
        // cells 2,3 stay GROUND
        assert!(l.is_boundary(1, 0));
        assert!(l.is_boundary(2, 0));
        assert!(!l.is_boundary(0, 0));
        assert!(!l.is_boundary(3, 0));
    }
}
