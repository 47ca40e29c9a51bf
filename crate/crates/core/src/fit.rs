//! Rigid-plus-scale Coherent Point Drift registration and the per-section
//! fitting loop with base-height hypotheses and a flat-roof baseline.
//!
//! CPD treats the source points as centroids of an isotropic Gaussian
//! mixture with a uniform outlier component of weight `w`; the M-step has
//! the closed-form similarity update (SVD of the weighted cross-covariance,
//! determinant-corrected into SO(3)).

use nalgebra::{Matrix3, Vector3, SVD};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{NnGrid, PointCloud};
use crate::error::{Error, Result};
use crate::geom::min_area_rect;
use crate::mesh::{primitive_mesh_parts, SceneSection};
use crate::primitives::{
    classify, rectify_canonical, FacetKind, PrimitiveType, PrototypeSet, RoofSpec,
};
use crate::real::Real;
use crate::transform::SimTransform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationMode {
    /// Unconstrained rotation in SO(3).
    Full,
    /// Rotation restricted to the z axis (for thin, ill-conditioned
    /// sections).
    ZOnly,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpdParams<F: Real = f64> {
    /// Uniform outlier component weight in [0, 1).
    pub outlier_weight: F,
    pub max_iterations: usize,
    /// Relative objective-change convergence threshold.
    pub tolerance: F,
    pub allow_scale: bool,
    pub rotation_mode: RotationMode,
}

impl<F: Real> Default for CpdParams<F> {
    fn default() -> Self {
        CpdParams {
            outlier_weight: F::of(0.1),
            max_iterations: 100,
            tolerance: F::of(1e-6),
            allow_scale: true,
            rotation_mode: RotationMode::Full,
        }
    }
}

impl<F: Real> CpdParams<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.outlier_weight >= F::zero() && self.outlier_weight < F::one()) {
            return Err(Error::invalid("outlier_weight must be in [0, 1)"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be >= 1"));
        }
        if !(self.tolerance > F::zero()) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult<F: Real = f64> {
    pub transform: SimTransform<F>,
    /// Final GMM variance (squared meters).
    pub sigma2: F,
    /// RMS nearest-neighbor residual, target to transformed source.
    pub fit_error: F,
    pub iterations: usize,
    pub converged: bool,
    /// Negative log-likelihood per iteration (non-increasing).
    pub objective_trace: Vec<F>,
}

/// Accumulators of one E-step sweep.
struct EAcc<F: Real> {
    p1: Vec<F>,
    px: Vec<Vector3<F>>,
    np: F,
    nll: F,
    sx: Vector3<F>,
    sxx: F,
}

impl<F: Real> EAcc<F> {
    fn new(m: usize) -> Self {
        EAcc {
            p1: vec![F::zero(); m],
            px: vec![Vector3::zeros(); m],
            np: F::zero(),
            nll: F::zero(),
            sx: Vector3::zeros(),
            sxx: F::zero(),
        }
    }

    fn merge(mut self, other: EAcc<F>) -> EAcc<F> {
        for (a, b) in self.p1.iter_mut().zip(&other.p1) {
            *a += *b;
        }
        for (a, b) in self.px.iter_mut().zip(&other.px) {
            *a += b;
        }
        self.np += other.np;
        self.nll += other.nll;
        self.sx += other.sx;
        self.sxx += other.sxx;
        self
    }
}

/// Chunk size for the deterministic parallel E-step: partial sums are
/// reduced in chunk order, so results do not depend on thread scheduling.
const E_STEP_CHUNK: usize = 256;

fn e_step<F: Real>(transformed: &[Vector3<F>], target: &[Vector3<F>], sigma2: F, c_outlier: F) -> EAcc<F> {
    let m = transformed.len();
    let inv = F::one() / (F::of(2.0) * sigma2);
    let log_c = if c_outlier > F::zero() {
        c_outlier.ln()
    } else {
        F::of(f64::NEG_INFINITY)
    };
    let partials: Vec<EAcc<F>> = target
        .par_chunks(E_STEP_CHUNK)
        .map(|chunk| {
            let mut acc = EAcc::new(m);
            let mut expo = vec![F::zero(); m];
            for x in chunk {
                let mut emax = F::of(f64::NEG_INFINITY);
                for (j, ty) in transformed.iter().enumerate() {
                    let d = (x - ty).norm_squared();
                    let e = -d * inv;
                    expo[j] = e;
                    if e > emax {
                        emax = e;
                    }
                }
                let mu = if log_c > emax { log_c } else { emax };
                let mut sum_pts = F::zero();
                for e in expo.iter_mut() {
                    *e = (*e - mu).exp();
                    sum_pts += *e;
                }
                let outlier_term = if c_outlier > F::zero() {
                    (log_c - mu).exp()
                } else {
                    F::zero()
                };
                let denom = sum_pts + outlier_term;
                let log_denom = mu + denom.ln();
                let pn = sum_pts / denom;
                for (j, e) in expo.iter().enumerate() {
                    let p = *e / denom;
                    acc.p1[j] += p;
                    acc.px[j] += x * p;
                }
                acc.np += pn;
                acc.nll -= log_denom;
                acc.sx += x * pn;
                acc.sxx += pn * x.norm_squared();
            }
            acc
        })
        .collect();
    partials
        .into_iter()
        .fold(EAcc::new(m), |a, b| a.merge(b))
}

/// Closed-form similarity update from the posterior moments. Exposed for
/// property tests (the rotation must stay in SO(3) for any input moments).
pub(crate) fn m_step_rotation<F: Real>(a: &Matrix3<F>, mode: RotationMode) -> Result<Matrix3<F>> {
    match mode {
        RotationMode::Full => {
            if a.iter().any(|v| !v.finite()) {
                return Err(Error::Degenerate("cross-covariance is not finite".into()));
            }
            let svd = SVD::new(*a, true, true);
            let (u, vt) = (
                svd.u.ok_or_else(|| Error::Degenerate("SVD failed".into()))?,
                svd.v_t.ok_or_else(|| Error::Degenerate("SVD failed".into()))?,
            );
            let det = (u * vt).determinant();
            let c = Matrix3::from_diagonal(&Vector3::new(F::one(), F::one(), det));
            Ok(u * c * vt)
        }
        RotationMode::ZOnly => {
            let phi = (a[(1, 0)] - a[(0, 1)]).atan2(a[(0, 0)] + a[(1, 1)]);
            let (s, c) = (phi.sin(), phi.cos());
            let mut r = Matrix3::identity();
            r[(0, 0)] = c;
            r[(0, 1)] = -s;
            r[(1, 0)] = s;
            r[(1, 1)] = c;
            Ok(r)
        }
    }
}

struct CpdRun<F: Real> {
    rot: Matrix3<F>,
    scale: F,
    trans: Vector3<F>,
    sigma2: F,
    iterations: usize,
    converged: bool,
    trace: Vec<F>,
}

/// One EM run on centered clouds from a given initial rotation.
fn cpd_run<F: Real>(
    y: &[Vector3<F>],
    x: &[Vector3<F>],
    params: &CpdParams<F>,
    init_rot: Matrix3<F>,
) -> Result<CpdRun<F>> {
    let (m, n) = (y.len(), x.len());
    let nf = F::of(n as f64);
    let mf = F::of(m as f64);

    // initial variance: mean pairwise squared distance / 3, via moments
    let sum_y: Vector3<F> = y.iter().fold(Vector3::zeros(), |a, p| a + p);
    let sum_x: Vector3<F> = x.iter().fold(Vector3::zeros(), |a, p| a + p);
    let sq_y: F = y.iter().map(|p| p.norm_squared()).sum();
    let sq_x: F = x.iter().map(|p| p.norm_squared()).sum();
    let mut sigma2 =
        (sq_x * mf + sq_y * nf - F::of(2.0) * sum_x.dot(&sum_y)) / (F::of(3.0) * nf * mf);
    if !(sigma2 > F::zero()) {
        sigma2 = F::of(1e-6);
    }

    let w = params.outlier_weight;
    let mut rot = init_rot;
    let mut scale = F::one();
    let mut trans = Vector3::<F>::zeros();
    let mut trace: Vec<F> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut transformed: Vec<Vector3<F>> = y.to_vec();

    let two_pi = F::two_pi();
    for iter in 0..params.max_iterations {
        iterations = iter + 1;
        for (t, p) in transformed.iter_mut().zip(y.iter()) {
            *t = rot * p * scale + trans;
        }
        let c_outlier = if w > F::zero() {
            (two_pi * sigma2).powf(F::of(1.5)) * w / (F::one() - w) * mf / nf
        } else {
            F::zero()
        };
        let acc = e_step(&transformed, x, sigma2, c_outlier);
        if !acc.np.finite() || acc.np <= F::of(1e-300) {
            return Err(Error::Degenerate("posterior mass vanished".into()));
        }
        let nll = acc.nll - nf * (F::one() - w).ln() + nf * mf.ln()
            + nf * F::of(1.5) * (two_pi * sigma2).ln();
        trace.push(nll);
        if iter > 0 {
            let prev = trace[iter - 1];
            if (prev - nll).abs() <= params.tolerance * (F::one() + nll.abs()) {
                converged = true;
                break;
            }
        }

        // M-step
        let mu_x = acc.sx / acc.np;
        let mut mu_y = Vector3::zeros();
        let mut sq_yw = F::zero();
        for (j, p) in y.iter().enumerate() {
            mu_y += p * acc.p1[j];
            sq_yw += acc.p1[j] * p.norm_squared();
        }
        mu_y /= acc.np;
        let mut a = Matrix3::zeros();
        for (j, p) in y.iter().enumerate() {
            let px = acc.px[j];
            for r in 0..3 {
                for c in 0..3 {
                    a[(r, c)] += px[r] * p[c];
                }
            }
        }
        a -= (mu_x * mu_y.transpose()) * acc.np;
        let yvar = sq_yw - acc.np * mu_y.norm_squared();
        let xvar = acc.sxx - acc.np * mu_x.norm_squared();
        if yvar <= F::zero() || !yvar.finite() {
            return Err(Error::Degenerate("source covariance is degenerate".into()));
        }
        rot = m_step_rotation(&a, params.rotation_mode)?;
        let tr_ar = (a.transpose() * rot).trace();
        scale = if params.allow_scale { tr_ar / yvar } else { F::one() };
        if !(scale > F::zero()) {
            return Err(Error::Degenerate("scale collapsed to non-positive".into()));
        }
        trans = mu_x - rot * mu_y * scale;
        let s2 = (xvar - F::of(2.0) * scale * tr_ar + scale * scale * yvar) / (F::of(3.0) * acc.np);
        sigma2 = if s2 > F::of(1e-15) { s2 } else { F::of(1e-15) };
        if s2 <= F::of(1e-15) {
            converged = true;
            break;
        }
    }
    Ok(CpdRun {
        rot,
        scale,
        trans,
        sigma2,
        iterations,
        converged,
        trace,
    })
}

/// Accept a run without restarting when the RMS residual is below this
/// fraction of the target's bounding-box diagonal.
const RESTART_RMS_FRACTION: f64 = 0.02;

/// Rigid-plus-scale CPD registration of `source` onto `target` by EM over
/// a Gaussian mixture with a uniform outlier component.
///
/// Both clouds are centered internally (the offset is folded back into the
/// reported translation), and poor fits are retried from a fixed list of
/// initial rotations; each retry is an independent, monotone EM run and
/// the best by residual is returned.
pub fn cpd_rigid<F: Real>(
    source: &PointCloud<F>,
    target: &PointCloud<F>,
    params: &CpdParams<F>,
) -> Result<FitResult<F>> {
    params.validate()?;
    source.validate()?;
    target.validate()?;
    let (m, n) = (source.len(), target.len());
    if m < 3 || n < 3 {
        return Err(Error::invalid("CPD needs at least 3 points on each side"));
    }
    let y_mean = source.centroid();
    let x_mean = target.centroid();
    let y: Vec<Vector3<F>> = source.points.iter().map(|p| p - y_mean).collect();
    let x: Vec<Vector3<F>> = target.points.iter().map(|p| p - x_mean).collect();
    let diag = {
        let (lo, hi) = target.bounds()?;
        (hi - lo).norm()
    };
    let good_rms = F::of(RESTART_RMS_FRACTION) * diag;

    let quarter = |axis: usize| -> Matrix3<F> {
        let mut r = Matrix3::zeros();
        match axis {
            0 => {
                // 90 degrees about x
                r[(0, 0)] = F::one();
                r[(1, 2)] = -F::one();
                r[(2, 1)] = F::one();
            }
            1 => {
                // 90 degrees about y
                r[(1, 1)] = F::one();
                r[(0, 2)] = F::one();
                r[(2, 0)] = -F::one();
            }
            _ => {
                // 90 degrees about z
                r[(2, 2)] = F::one();
                r[(0, 1)] = -F::one();
                r[(1, 0)] = F::one();
            }
        }
        r
    };
    let rz = quarter(2);
    let mut starts: Vec<Matrix3<F>> = vec![Matrix3::identity(), rz, rz * rz, rz * rz * rz];
    if params.rotation_mode == RotationMode::Full {
        starts.push(quarter(0));
        starts.push(quarter(1));
    }

    // full RMS is the reported fit_error; the trimmed RMS (lowest 70% of
    // residuals) drives restart decisions so appended outliers cannot
    // mask a good pose or reward a bad one
    let residuals_of = |run: &CpdRun<F>| -> Result<(F, F)> {
        let transformed: Vec<Vector3<F>> =
            y.iter().map(|p| run.rot * p * run.scale + run.trans).collect();
        let grid = NnGrid::build(&transformed)?;
        let mut sq: Vec<F> = x
            .par_chunks(E_STEP_CHUNK)
            .map(|chunk| chunk.iter().map(|p| grid.nearest(p).1).collect::<Vec<F>>())
            .collect::<Vec<Vec<F>>>()
            .into_iter()
            .flatten()
            .collect();
        let full = (sq.iter().copied().sum::<F>() / F::of(n as f64)).sqrt();
        let keep = ((n as f64) * 0.7).ceil() as usize;
        sq.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let trimmed =
            (sq[..keep.max(1)].iter().copied().sum::<F>() / F::of(keep.max(1) as f64)).sqrt();
        Ok((full, trimmed))
    };

    let mut best: Option<(CpdRun<F>, F, F)> = None;
    for start in starts.iter() {
        let run = cpd_run(&y, &x, params, *start)?;
        let (full, trimmed) = residuals_of(&run)?;
        if best.as_ref().is_none_or(|(_, _, b)| trimmed < *b) {
            best = Some((run, full, trimmed));
        }
        // extra starts exist to escape symmetric local optima; they only
        // run while the trimmed residual stays poor
        if best.as_ref().unwrap().2 <= good_rms {
            break;
        }
    }
    let (run, fit_error, _) = best.unwrap();

    // fold the centering back into the translation
    let trans = x_mean + run.trans - run.rot * y_mean * run.scale;
    Ok(FitResult {
        transform: SimTransform::new(run.scale, run.rot, trans),
        sigma2: run.sigma2,
        fit_error,
        iterations: run.iterations,
        converged: run.converged,
        objective_trace: run.trace,
    })
}

/// Closest-point distance from `p` to triangle `(a, b, c)`.
fn point_triangle_distance<F: Real>(p: &Vector3<F>, a: &Vector3<F>, b: &Vector3<F>, c: &Vector3<F>) -> F {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= F::zero() && d2 <= F::zero() {
        return ap.norm();
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= F::zero() && d4 <= d3 {
        return bp.norm();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= F::zero() && d1 >= F::zero() && d3 <= F::zero() {
        let v = d1 / (d1 - d3);
        return (ap - ab * v).norm();
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= F::zero() && d5 <= d6 {
        return cp.norm();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= F::zero() && d2 >= F::zero() && d6 <= F::zero() {
        let v = d2 / (d2 - d6);
        return (ap - ac * v).norm();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= F::zero() && (d4 - d3) >= F::zero() && (d5 - d6) >= F::zero() {
        let v = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (bp - (c - b) * v).norm();
    }
    let denom = F::one() / (va + vb + vc);
    let v = vb * denom;
    let u = vc * denom;
    (ap - ab * v - ac * u).norm()
}

/// World-space roof triangles of a scene section.
fn section_roof_triangles<F: Real>(
    section: &SceneSection<F>,
    datum: F,
) -> Vec<[Vector3<F>; 3]> {
    let lift = section.base_elevation - datum;
    let spec = RoofSpec {
        primitive_type: section.roof.primitive_type,
        eave_height: section.roof.eave_height + lift,
        ridge_height: section.roof.ridge_height + lift,
        direction: section.roof.direction,
    };
    let parts = primitive_mesh_parts(&spec);
    let (hx, hy) = section.footprint.half_extents;
    let place = |v: &Vector3<F>| -> Vector3<F> {
        let lx = (v.x - F::of(0.5)) * hx * F::of(2.0);
        let ly = (v.y - F::of(0.5)) * hy * F::of(2.0);
        let (wx, wy) = section.footprint.to_world(lx, ly);
        section.transform.apply(&Vector3::new(wx, wy, datum + v.z))
    };
    parts
        .mesh
        .faces
        .iter()
        .zip(&parts.face_kinds)
        .filter(|(_, k)| **k == FacetKind::Roof)
        .map(|(f, _)| {
            [
                place(&parts.mesh.vertices[f[0] as usize]),
                place(&parts.mesh.vertices[f[1] as usize]),
                place(&parts.mesh.vertices[f[2] as usize]),
            ]
        })
        .collect()
}

/// RMS distance from every cloud point to the section's roof surface.
pub fn roof_fit_error<F: Real>(cloud: &PointCloud<F>, section: &SceneSection<F>, datum: F) -> F {
    let tris = section_roof_triangles(section, datum);
    if tris.is_empty() || cloud.is_empty() {
        return F::of(f64::MAX);
    }
    let sum_sq: F = cloud
        .points
        .iter()
        .map(|p| {
            let mut best = F::of(f64::MAX);
            for t in &tris {
                let d = point_triangle_distance(p, &t[0], &t[1], &t[2]);
                if d < best {
                    best = d;
                }
            }
            best * best
        })
        .sum();
    (sum_sq / F::of(cloud.len() as f64)).sqrt()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitOptions<F: Real = f64> {
    /// Histogram bin for base-height hypotheses, meters.
    pub hist_bin: F,
    /// Minimum mode mass as a fraction of the cell count.
    pub mode_prominence: f64,
    pub max_hypotheses: usize,
    /// Minimum roof-shell height worth classifying, meters.
    pub min_shell: F,
    /// Target subsample cap for registration.
    pub target_cap: usize,
    /// Source (prototype roof) subsample cap for registration.
    pub source_cap: usize,
}

impl<F: Real> Default for FitOptions<F> {
    fn default() -> Self {
        FitOptions {
            hist_bin: F::of(0.5),
            mode_prominence: 0.10,
            max_hypotheses: 4,
            min_shell: F::of(0.3),
            target_cap: 768,
            source_cap: 512,
        }
    }
}

/// Diagnostics of one evaluated hypothesis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisFit<F: Real = f64> {
    pub base_height: F,
    pub primitive: PrimitiveType,
    pub fit_error: F,
    pub chamfer_score: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionFit<F: Real = f64> {
    pub section: SceneSection<F>,
    /// Selected eave elevation above the datum.
    pub base_height: F,
    pub fit: FitResult<F>,
    /// RMS cloud-to-roof-surface residual of the selected model.
    pub fit_error: F,
    /// Every evaluated hypothesis, selection is the arg-min of fit_error.
    pub hypotheses: Vec<HypothesisFit<F>>,
}

/// Candidate eave elevations: histogram modes of `z - datum` (0.5 m bins by
/// default, prominence-gated, capped) plus the z-minimum.
fn base_hypotheses<F: Real>(zs: &[F], options: &FitOptions<F>) -> Vec<F> {
    let mut zmin = zs[0];
    let mut zmax = zs[0];
    for &z in zs {
        if z < zmin {
            zmin = z;
        }
        if z > zmax {
            zmax = z;
        }
    }
    let bin = options.hist_bin;
    let nbins = (((zmax - zmin) / bin).f64().floor() as usize + 1).max(1);
    let mut counts = vec![0usize; nbins];
    let mut sums = vec![F::zero(); nbins];
    for &z in zs {
        let i = (((z - zmin) / bin).f64().floor() as usize).min(nbins - 1);
        counts[i] += 1;
        sums[i] += z;
    }
    let total = zs.len();
    let mut modes: Vec<(usize, F)> = Vec::new();
    for i in 0..nbins {
        let c = counts[i];
        if c == 0 || (c as f64) < options.mode_prominence * total as f64 {
            continue;
        }
        let left = if i == 0 { 0 } else { counts[i - 1] };
        let right = if i + 1 == nbins { 0 } else { counts[i + 1] };
        if c >= left && c >= right {
            modes.push((c, sums[i] / F::of(c as f64)));
        }
    }
    modes.sort_by(|a, b| b.0.cmp(&a.0));
    modes.truncate(options.max_hypotheses);
    let mut out: Vec<F> = modes.into_iter().map(|(_, v)| v).collect();
    out.push(zmin);
    // deduplicate within half a bin, clamp below at 0
    let mut dedup: Vec<F> = Vec::new();
    for v in out {
        let v = if v > F::zero() { v } else { F::zero() };
        if !dedup.iter().any(|&d| (d - v).abs() < bin / F::of(2.0)) {
            dedup.push(v);
        }
    }
    dedup
}

/// Classify and fit one section cloud: enumerate base-height hypotheses,
/// canonicalize and classify the roof shell of each, register the matching
/// prototype with CPD, always evaluate the flat-roof baseline, and return
/// the hypothesis with the smallest fit error.
pub fn fit_section<F: Real>(
    cloud: &PointCloud<F>,
    datum: F,
    prototypes: &PrototypeSet<F>,
    cpd: &CpdParams<F>,
    options: &FitOptions<F>,
) -> Result<SectionFit<F>> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    cloud.validate()?;
    let zs: Vec<F> = cloud.points.iter().map(|p| p.z - datum).collect();
    let hypotheses = base_hypotheses(&zs, options);

    let mut diagnostics: Vec<HypothesisFit<F>> = Vec::new();
    let mut best: Option<SectionFit<F>> = None;
    let mut consider = |cand: SectionFit<F>| {
        if best.as_ref().is_none_or(|b| cand.fit_error < b.fit_error) {
            best = Some(cand);
        }
    };

    // flat baseline: plane at the dominant histogram mode over the full
    // footprint
    let footprint = min_area_rect(&cloud.xy())?;
    let flat_height = {
        // densest hypothesis bin refined as that bin's mean
        let mode = hypotheses.first().copied().unwrap_or(F::zero());
        let band = options.hist_bin;
        let mut sum = F::zero();
        let mut n = 0usize;
        for &z in &zs {
            if (z - mode).abs() <= band {
                sum += z;
                n += 1;
            }
        }
        if n > 0 {
            sum / F::of(n as f64)
        } else {
            mode
        }
    };
    let flat_height = if flat_height > F::of(0.05) { flat_height } else { F::of(0.05) };
    let flat_section = SceneSection {
        footprint,
        base_elevation: datum,
        roof: RoofSpec::flat(flat_height),
        transform: SimTransform::identity(),
    };
    let flat_error = roof_fit_error(cloud, &flat_section, datum);
    let flat_sigma = flat_error * flat_error + F::of(1e-12);
    diagnostics.push(HypothesisFit {
        base_height: flat_height,
        primitive: PrimitiveType::Flat,
        fit_error: flat_error,
        chamfer_score: 0.0,
        iterations: 0,
        converged: true,
    });
    consider(SectionFit {
        section: flat_section,
        base_height: flat_height,
        fit: FitResult {
            transform: SimTransform::identity(),
            sigma2: flat_sigma,
            fit_error: flat_error,
            iterations: 0,
            converged: true,
            objective_trace: Vec::new(),
        },
        fit_error: flat_error,
        hypotheses: Vec::new(),
    });

    let mut failures: Vec<String> = Vec::new();
    for &b in &hypotheses {
        // roof shell above the hypothesized eave
        let shell = PointCloud::new(
            cloud
                .points
                .iter()
                .map(|p| {
                    let z = p.z - datum - b;
                    Vector3::new(p.x, p.y, if z > F::zero() { z } else { F::zero() })
                })
                .collect(),
        );
        let (zlo, zhi) = shell
            .points
            .iter()
            .fold((F::of(f64::MAX), F::of(f64::MIN)), |(lo, hi), p| {
                (if p.z < lo { p.z } else { lo }, if p.z > hi { p.z } else { hi })
            });
        if zhi - zlo < options.min_shell {
            continue; // effectively flat at this hypothesis; baseline covers it
        }
        let outcome = (|| -> Result<(SectionFit<F>, HypothesisFit<F>)> {
            let canon = rectify_canonical(&shell)?;
            let classification = classify(&canon, prototypes)?;
            let t = classification.primitive;
            if t.is_flat() {
                return Err(Error::FitFailed("classified flat; baseline covers".into()));
            }
            let mut source: Vec<Vector3<F>> = prototypes
                .roof_points(t)
                .into_iter()
                .map(|p| {
                    let w = canon.transform.to_world(&p);
                    Vector3::new(w.x, w.y, w.z + datum + b)
                })
                .collect();
            if source.len() > options.source_cap {
                let stride = source.len().div_ceil(options.source_cap);
                source = source.into_iter().step_by(stride).collect();
            }
            let target = cloud.subsample(options.target_cap);
            let fit = cpd_rigid(&PointCloud::new(source.clone()), &target, cpd)?;

            // bake the refinement into world-space geometry
            let full_roof: Vec<Vector3<F>> = prototypes
                .roof_points(t)
                .into_iter()
                .map(|p| {
                    let w = canon.transform.to_world(&p);
                    fit.transform
                        .apply(&Vector3::new(w.x, w.y, w.z + datum + b))
                })
                .collect();
            let (mut eave_abs, mut ridge_abs) = (F::of(f64::MAX), F::of(f64::MIN));
            for p in &full_roof {
                if p.z < eave_abs {
                    eave_abs = p.z;
                }
                if p.z > ridge_abs {
                    ridge_abs = p.z;
                }
            }
            // footprint corners through the same chain (z = 0 plane)
            let corner = |u: f64, v: f64| -> Vector3<F> {
                let w = canon
                    .transform
                    .to_world(&Vector3::new(F::of(u), F::of(v), F::zero()));
                fit.transform
                    .apply(&Vector3::new(w.x, w.y, w.z + datum + b))
            };
            let c00 = corner(0.0, 0.0);
            let c10 = corner(1.0, 0.0);
            let c01 = corner(0.0, 1.0);
            let c11 = corner(1.0, 1.0);
            let center = (
                (c00.x + c10.x + c01.x + c11.x) / F::of(4.0),
                (c00.y + c10.y + c01.y + c11.y) / F::of(4.0),
            );
            let ex = ((c10.x - c00.x) + (c11.x - c01.x)) / F::of(2.0);
            let ey = ((c10.y - c00.y) + (c11.y - c01.y)) / F::of(2.0);
            let fy_x = ((c01.x - c00.x) + (c11.x - c10.x)) / F::of(2.0);
            let fy_y = ((c01.y - c00.y) + (c11.y - c10.y)) / F::of(2.0);
            let hx = (ex * ex + ey * ey).sqrt() / F::of(2.0);
            let hy = (fy_x * fy_x + fy_y * fy_y).sqrt() / F::of(2.0);
            if hx <= F::zero() || hy <= F::zero() {
                return Err(Error::Degenerate("fitted footprint collapsed".into()));
            }
            let angle = ey.atan2(ex) * F::of(180.0) / F::pi();
            let eave_rel = {
                let e = eave_abs - datum;
                if e > F::zero() {
                    e
                } else {
                    F::zero()
                }
            };
            let ridge_rel = {
                let r = ridge_abs - datum;
                if r > eave_rel + F::of(1e-6) {
                    r
                } else {
                    eave_rel + F::of(1e-6)
                }
            };
            let section = SceneSection {
                footprint: crate::geom::RotatedRect {
                    center,
                    half_extents: (hx, hy),
                    angle_deg: angle,
                },
                base_elevation: datum,
                roof: RoofSpec::new(t, eave_rel, ridge_rel),
                transform: SimTransform::identity(),
            };
            let err = roof_fit_error(cloud, &section, datum);
            let diag = HypothesisFit {
                base_height: b,
                primitive: t,
                fit_error: err,
                chamfer_score: classification.score,
                iterations: fit.iterations,
                converged: fit.converged,
            };
            Ok((
                SectionFit {
                    section,
                    base_height: b,
                    fit,
                    fit_error: err,
                    hypotheses: Vec::new(),
                },
                diag,
            ))
        })();
        match outcome {
            Ok((cand, diag)) => {
                diagnostics.push(diag);
                consider(cand);
            }
            Err(e) => failures.push(format!("hypothesis {:.2}: {e}", b.f64())),
        }
    }

    match best {
        Some(mut chosen) => {
            chosen.hypotheses = diagnostics;
            Ok(chosen)
        }
        None => Err(Error::FitFailed(failures.join("; "))),
    }
}
