//! Planar geometry: axis-aligned and rotated rectangles, convex hulls and
//! the minimum-area bounding rectangle used for footprint orientation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Axis-aligned rectangle in the building's local frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect<F: Real = f64> {
    pub min: (F, F),
    pub max: (F, F),
}

impl<F: Real> Rect<F> {
    pub fn new(min: (F, F), max: (F, F)) -> Self {
        Rect { min, max }
    }

    pub fn width(&self) -> F {
        self.max.0 - self.min.0
    }

    pub fn height(&self) -> F {
        self.max.1 - self.min.1
    }

    pub fn area(&self) -> F {
        self.width() * self.height()
    }

    pub fn center(&self) -> (F, F) {
        let two = F::of(2.0);
        (
            (self.min.0 + self.max.0) / two,
            (self.min.1 + self.max.1) / two,
        )
    }

    /// Ratio of the longer to the shorter side.
    pub fn aspect(&self) -> F {
        let (w, h) = (self.width(), self.height());
        RealOps::max(w, h) / RealOps::min(w, h)
    }

    pub fn contains(&self, x: F, y: F) -> bool {
        x >= self.min.0 && x < self.max.0 && y >= self.min.1 && y < self.max.1
    }

    pub fn is_valid(&self) -> bool {
        self.min.0 < self.max.0 && self.min.1 < self.max.1
    }

    /// Interiors intersect (shared edges do not count).
    pub fn overlaps(&self, other: &Rect<F>) -> bool {
        self.min.0 < other.max.0
            && other.min.0 < self.max.0
            && self.min.1 < other.max.1
            && other.min.1 < self.max.1
    }

    /// Positive-length shared boundary segment on any side.
    pub fn touches_edge(&self, other: &Rect<F>, tol: F) -> bool {
        let overlap_y = RealOps::min(self.max.1, other.max.1) - RealOps::max(self.min.1, other.min.1);
        let overlap_x = RealOps::min(self.max.0, other.max.0) - RealOps::max(self.min.0, other.min.0);
        let same_x = (self.max.0 - other.min.0).abs() <= tol || (other.max.0 - self.min.0).abs() <= tol;
        let same_y = (self.max.1 - other.min.1).abs() <= tol || (other.max.1 - self.min.1).abs() <= tol;
        (same_x && overlap_y > tol) || (same_y && overlap_x > tol)
    }

    pub fn union_bbox(&self, other: &Rect<F>) -> Rect<F> {
        Rect {
            min: (
                RealOps::min(self.min.0, other.min.0),
                RealOps::min(self.min.1, other.min.1),
            ),
            max: (
                RealOps::max(self.max.0, other.max.0),
                RealOps::max(self.max.1, other.max.1),
            ),
        }
    }
}

// `RealField::min/max` take self by value but shadow `Ord`; tiny shim keeps
// call sites readable.
struct RealOps;
impl RealOps {
    fn min<F: Real>(a: F, b: F) -> F {
        if a < b {
            a
        } else {
            b
        }
    }
    fn max<F: Real>(a: F, b: F) -> F {
        if a > b {
            a
        } else {
            b
        }
    }
}

/// Rectangle with an in-plane rotation: `angle_deg` rotates the local +x
/// axis counter-clockwise into world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatedRect<F: Real = f64> {
    pub center: (F, F),
    pub half_extents: (F, F),
    pub angle_deg: F,
}

impl<F: Real> RotatedRect<F> {
    pub fn axis_aligned(rect: &Rect<F>) -> Self {
        let two = F::of(2.0);
        RotatedRect {
            center: rect.center(),
            half_extents: (rect.width() / two, rect.height() / two),
            angle_deg: F::zero(),
        }
    }

    pub fn area(&self) -> F {
        F::of(4.0) * self.half_extents.0 * self.half_extents.1
    }

    /// World point expressed in the rect's local frame (center at origin).
    pub fn to_local(&self, x: F, y: F) -> (F, F) {
        let a = -self.angle_deg * F::pi() / F::of(180.0);
        let (s, c) = (a.sin(), a.cos());
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        (c * dx - s * dy, s * dx + c * dy)
    }

    pub fn to_world(&self, lx: F, ly: F) -> (F, F) {
        let a = self.angle_deg * F::pi() / F::of(180.0);
        let (s, c) = (a.sin(), a.cos());
        (
            self.center.0 + c * lx - s * ly,
            self.center.1 + s * lx + c * ly,
        )
    }

    pub fn contains(&self, x: F, y: F) -> bool {
        let (lx, ly) = self.to_local(x, y);
        lx.abs() <= self.half_extents.0 && ly.abs() <= self.half_extents.1
    }

    /// Unit-square coordinates of a world point, `(0,0)`..`(1,1)` inside.
    pub fn to_unit(&self, x: F, y: F) -> (F, F) {
        let (lx, ly) = self.to_local(x, y);
        let two = F::of(2.0);
        (
            lx / (two * self.half_extents.0) + F::of(0.5),
            ly / (two * self.half_extents.1) + F::of(0.5),
        )
    }

    pub fn corners(&self) -> [(F, F); 4] {
        let (hx, hy) = self.half_extents;
        [
            self.to_world(-hx, -hy),
            self.to_world(hx, -hy),
            self.to_world(hx, hy),
            self.to_world(-hx, hy),
        ]
    }

    /// Signed distance from a point to the rectangle boundary (negative
    /// inside).
    pub fn boundary_distance(&self, x: F, y: F) -> F {
        let (lx, ly) = self.to_local(x, y);
        let qx = lx.abs() - self.half_extents.0;
        let qy = ly.abs() - self.half_extents.1;
        let ox = RealOps::max(qx, F::zero());
        let oy = RealOps::max(qy, F::zero());
        let outside = (ox * ox + oy * oy).sqrt();
        let inside = RealOps::min(RealOps::max(qx, qy), F::zero());
        outside + inside
    }
}

/// Convex hull by Andrew's monotone chain, counter-clockwise without
/// collinear points. Returns fewer than 3 points for degenerate input.
pub fn convex_hull<F: Real>(points: &[(F, F)]) -> Vec<(F, F)> {
    let mut pts: Vec<(F, F)> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let n = pts.len();
    if n < 3 {
        return pts;
    }
    let cross = |o: (F, F), a: (F, F), b: (F, F)| -> F {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(F, F)> = Vec::with_capacity(2 * n);
    for &p in pts.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= F::zero() {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= F::zero()
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Minimum-area bounding rectangle of a point set (rotating calipers over
/// the convex hull). The reported angle is that of the rectangle's longer
/// side, normalized to (-90, 90] degrees.
pub fn min_area_rect<F: Real>(points: &[(F, F)]) -> Result<RotatedRect<F>> {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Err(Error::Degenerate(
            "fewer than 3 non-collinear points".into(),
        ));
    }
    let mut best: Option<(F, RotatedRect<F>)> = None;
    let n = hull.len();
    for i in 0..n {
        let (x0, y0) = hull[i];
        let (x1, y1) = hull[(i + 1) % n];
        let (ex, ey) = (x1 - x0, y1 - y0);
        let len = (ex * ex + ey * ey).sqrt();
        if len == F::zero() {
            continue;
        }
        let (ux, uy) = (ex / len, ey / len); // edge direction
        let (vx, vy) = (-uy, ux); // normal
        let (mut min_u, mut max_u, mut min_v, mut max_v) =
            (F::of(f64::MAX), F::of(f64::MIN), F::of(f64::MAX), F::of(f64::MIN));
        for &(px, py) in hull.iter() {
            let du = (px - x0) * ux + (py - y0) * uy;
            let dv = (px - x0) * vx + (py - y0) * vy;
            min_u = RealOps::min(min_u, du);
            max_u = RealOps::max(max_u, du);
            min_v = RealOps::min(min_v, dv);
            max_v = RealOps::max(max_v, dv);
        }
        let (w, h) = (max_u - min_u, max_v - min_v);
        let area = w * h;
        if best.as_ref().is_none_or(|(a, _)| area < *a) {
            let two = F::of(2.0);
            let cu = (min_u + max_u) / two;
            let cv = (min_v + max_v) / two;
            let center = (x0 + cu * ux + cv * vx, y0 + cu * uy + cv * vy);
            let deg = F::of(180.0) / F::pi();
            let mut rect = if w >= h {
                RotatedRect {
                    center,
                    half_extents: (w / two, h / two),
                    angle_deg: uy.atan2(ux) * deg,
                }
            } else {
                RotatedRect {
                    center,
                    half_extents: (h / two, w / two),
                    angle_deg: vy.atan2(vx) * deg,
                }
            };
            rect.angle_deg = normalize_half_turn(rect.angle_deg);
            best = Some((area, rect));
        }
    }
    Ok(best.unwrap().1)
}

/// Fold an angle in degrees into (-90, 90].
pub fn normalize_half_turn<F: Real>(mut deg: F) -> F {
    let half = F::of(180.0);
    while deg > F::of(90.0) {
        deg -= half;
    }
    while deg <= F::of(-90.0) {
        deg += half;
    }
    deg
}

/// Fold an angle in degrees into (-45, 45] (rectangle orientations are
/// equivalent modulo quarter turns).
pub fn normalize_quarter_turn<F: Real>(mut deg: F) -> F {
    let quarter = F::of(90.0);
    while deg > F::of(45.0) {
        deg -= quarter;
    }
    while deg <= F::of(-45.0) {
        deg += quarter;
    }
    deg
}

/// Orientation of the dominant axis from the 2D covariance of a point set,
/// in degrees. Degenerate (isotropic) distributions return the eigenvalue
/// ratio so callers can fall back to `min_area_rect`.
pub fn pca_orientation<F: Real>(points: &[(F, F)]) -> Result<(F, F)> {
    if points.len() < 3 {
        return Err(Error::Degenerate("fewer than 3 points".into()));
    }
    let n = F::of(points.len() as f64);
    let (mut mx, mut my) = (F::zero(), F::zero());
    for &(x, y) in points {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    let (mut sxx, mut sxy, mut syy) = (F::zero(), F::zero(), F::zero());
    for &(x, y) in points {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let theta = (F::of(2.0) * sxy).atan2(sxx - syy) / F::of(2.0);
    let half_tr = (sxx + syy) / F::of(2.0);
    let det = (sxx - syy) * (sxx - syy) / F::of(4.0) + sxy * sxy;
    let root = det.sqrt();
    let (l1, l2) = (half_tr + root, half_tr - root);
    if l1 <= F::zero() {
        return Err(Error::Degenerate("zero covariance".into()));
    }
    let ratio = if l2 > F::zero() { l1 / l2 } else { F::of(f64::MAX) };
    Ok((normalize_half_turn(theta * F::of(180.0) / F::pi()), ratio))
}
